//! Weighted cubical singular homology.
//!
//! A singular cube is a map `T: Iⁿ → X`. Classical cubical homology sends `T`
//! to the alternating sum of its front and back faces. Here the boundary
//! operator is parametrized by a *weight vector* `m⃗ = (m₀, …, m_L)` over a
//! commutative coefficient ring: coordinate `j` is sliced at the `L+1` heights
//! `i/L`, and slice `i` enters with coefficient `m_i`:
//!
//! ```text
//! ∂ₙ(T) = Σ_{j=1}^{n} (−1)^{j+1} Σ_{i=0}^{L} m_i · ⟨T⟩_{n,i,j}
//! ```
//!
//! This crate makes that theory executable with exact arithmetic throughout
//! (no floating point anywhere):
//!
//! - [`coeff`] — coefficient rings (ℤ, ℤ/n, ℚ), weight vectors, the index σ,
//!   span/Bezout/NCD witnesses.
//! - [`cubeexpr`] — symbolic singular cubes `Iⁿ → ℚ^d` as composition trees
//!   (value tables, affine cells, clamped reparametrizations, faces, cylinder
//!   and jag extensions, warp maps), exactly evaluable at rational points.
//! - [`chaincore`] — formal chains, the weighted boundary operator, the
//!   `∂∘∂ = 0` certificate, pushforward, and relative chains.
//! - [`homotopylab`] — the prism and warp chain homotopies and the 3ⁿ-term
//!   subdivision operator, each with an executable identity verifier.
//! - [`gridmodel`] — finite cubical complexes on integer grids, their
//!   generator bases, boundary matrices, pairs, and the long exact sequence.
//! - [`modalg`] — Smith normal form, homology of integer and rational
//!   complexes, finitely generated module presentations, coefficient change.
//! - [`reduce`] — the Γ-quotient normalization (degenerate generators and
//!   σ-multiples), β-truncated hybrid complexes, and point-space tables.
//! - [`cwcalc`] — the closed-form homology of finite CW pairs from integral
//!   singular homology data, with two-pipeline consistency checks.

pub mod coeff;
pub mod cubeexpr;
pub mod chaincore;
pub mod homotopylab;
pub mod gridmodel;
pub mod modalg;
pub mod reduce;
pub mod cwcalc;
pub mod sampling;
