//! Exact matrix algebra over ℤ and ℚ, and finitely generated modules.
//!
//! The homology pipeline bottoms out here: boundary operators become integer
//! matrices, and groups are read off through the Smith normal form
//! `U·M·V = D` with `U, V` unimodular and the diagonal of `D` a divisibility
//! chain `d₁ | d₂ | …`. On top of the raw form this module offers kernels,
//! lattice membership (`solve`), homology of a pair of consecutive boundary
//! matrices over any supported ring, homology of *presented* complexes (each
//! degree may carry relation columns — how the Γ- and β-quotients are
//! computed), and coefficient change `H ↦ H ⊗ ℤ_σ ⊕ Tor(·, ℤ_σ)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeff::{Coeff, RingSpec};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModAlgError {
    #[error("matrix shape mismatch: {0}×{1} vs {2}×{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("boundary matrices do not compose: d_n is {0}×{1} but d_(n+1) is {2}×{3}")]
    NotAComplex(usize, usize, usize, usize),
    #[error("matrices do not form a complex: d∘d has a nonzero entry at ({0},{1})")]
    CompositionNonzero(usize, usize),
    #[error("relation columns escape the cycle lattice at column {0}")]
    RelationOutsideCycles(usize),
    #[error("rational matrix expected for ring {0}")]
    WantRational(String),
    #[error("integer matrix expected for ring {0}")]
    WantInteger(String),
}

/// A dense integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMat {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMat::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn scalar(n: usize, s: &BigInt) -> Self {
        let mut m = IntMat::zero(n, n);
        for i in 0..n {
            m.set(i, i, s.clone());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = IntMat::zero(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, BigInt::from(*v));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(
            self.cols, other.rows,
            "product shape mismatch: {}×{} · {}×{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = IntMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(i, j) + a * b;
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    /// Glues two matrices side by side (same row count).
    pub fn hconcat(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.rows, other.rows, "hconcat row mismatch");
        let mut out = IntMat::zero(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, x.len(), "matrix–vector shape mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = BigInt::zero();
                for j in 0..self.cols {
                    let a = self.get(i, j);
                    if !a.is_zero() && !x[j].is_zero() {
                        acc += a * &x[j];
                    }
                }
                acc
            })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += q · row[src]
    fn add_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = self.get(dst, j) + q * self.get(src, j);
            self.set(dst, j, v);
        }
    }

    /// col[dst] += q · col[src]
    fn add_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = self.get(i, dst) + q * self.get(i, src);
            self.set(i, dst, v);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.get(i, j);
            self.set(i, j, v);
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -self.get(i, j);
            self.set(i, j, v);
        }
    }

    pub fn is_identity(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e = self.get(i, j);
                if i == j {
                    if !e.is_one() {
                        return false;
                    }
                } else if !e.is_zero() {
                    return false;
                }
            }
        }
        true
    }
}

impl fmt::Display for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// `U·M·V = D` with `U, V` unimodular; `diag(D) = (d₁, …)` is nonnegative
/// and forms a divisibility chain. `rank` counts the nonzero dᵢ. The integer
/// inverses of both transforms fall out of the reduction for free and serve
/// as exact unimodularity certificates: `u·u_inv = I` and `v·v_inv = I` over
/// ℤ force both determinants to be ±1.
#[derive(Debug, Clone)]
pub struct SmithForm {
    pub d: IntMat,
    pub u: IntMat,
    pub u_inv: IntMat,
    pub v: IntMat,
    pub v_inv: IntMat,
    pub rank: usize,
}

impl SmithForm {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols))
            .map(|i| self.d.get(i, i).clone())
            .collect()
    }
}

/// Working state of a Smith reduction: the matrix being diagonalized plus
/// both transforms and their inverses. Every elementary operation applied to
/// `d` is mirrored on `u` or `v` and compensated on the corresponding
/// inverse, so `u·m·v = d`, `u·u_inv = I`, `v·v_inv = I` hold throughout.
struct Reduction {
    d: IntMat,
    u: IntMat,
    u_inv: IntMat,
    v: IntMat,
    v_inv: IntMat,
}

impl Reduction {
    fn new(m: &IntMat) -> Self {
        Reduction {
            d: m.clone(),
            u: IntMat::identity(m.rows),
            u_inv: IntMat::identity(m.rows),
            v: IntMat::identity(m.cols),
            v_inv: IntMat::identity(m.cols),
        }
    }

    fn add_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        self.d.add_row(dst, src, q);
        self.u.add_row(dst, src, q);
        self.u_inv.add_col(src, dst, &-q);
    }

    fn add_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        self.d.add_col(dst, src, q);
        self.v.add_col(dst, src, q);
        self.v_inv.add_row(src, dst, &-q);
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        self.d.swap_rows(a, b);
        self.u.swap_rows(a, b);
        self.u_inv.swap_cols(a, b);
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        self.d.swap_cols(a, b);
        self.v.swap_cols(a, b);
        self.v_inv.swap_rows(a, b);
    }

    fn negate_row(&mut self, i: usize) {
        self.d.negate_row(i);
        self.u.negate_row(i);
        self.u_inv.negate_col(i);
    }

    fn negate_col(&mut self, j: usize) {
        self.d.negate_col(j);
        self.v.negate_col(j);
        self.v_inv.negate_row(j);
    }

    /// cols x, y ← (p·x + q·y, r·x + s·y) with ps − rq = ±1. Used by the
    /// divisibility repair, where an extended gcd mixes two diagonal columns.
    fn combine_cols(&mut self, x: usize, y: usize, p: &BigInt, q: &BigInt, r: &BigInt, s: &BigInt) {
        for i in 0..self.d.rows {
            let a = self.d.get(i, x).clone();
            let b = self.d.get(i, y).clone();
            self.d.set(i, x, p * &a + q * &b);
            self.d.set(i, y, r * &a + s * &b);
        }
        for i in 0..self.v.rows {
            let a = self.v.get(i, x).clone();
            let b = self.v.get(i, y).clone();
            self.v.set(i, x, p * &a + q * &b);
            self.v.set(i, y, r * &a + s * &b);
        }
        // Inverse block: det·[[s, −r], [−q, p]], applied to the rows of v⁻¹.
        let det = p * s - q * r;
        for j in 0..self.v_inv.cols {
            let a = self.v_inv.get(x, j).clone();
            let b = self.v_inv.get(y, j).clone();
            self.v_inv.set(x, j, &det * (s * &a - r * &b));
            self.v_inv.set(y, j, &det * (p * &b - q * &a));
        }
    }
}

/// One full Hermite sweep with row operations: walk the columns left to
/// right, drive each to a single positive pivot by Euclidean steps, then
/// reduce the entries above the pivot into `[0, pivot)`.
fn row_sweep(r: &mut Reduction) {
    let rows = r.d.rows;
    let cols = r.d.cols;
    let mut piv = 0usize;
    for j in 0..cols {
        if piv >= rows {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for i in piv..rows {
                if r.d.get(i, j).is_zero() {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some(b) => r.d.get(i, j).abs() < r.d.get(b, j).abs(),
                };
                if better {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            r.swap_rows(piv, b);
            let mut clean = true;
            for i in (piv + 1)..rows {
                if r.d.get(i, j).is_zero() {
                    continue;
                }
                let q = -r.d.get(i, j).div_floor(r.d.get(piv, j));
                r.add_row(i, piv, &q);
                if !r.d.get(i, j).is_zero() {
                    clean = false;
                }
            }
            if clean {
                break; // leftover remainders are strictly smaller; reselect
            }
        }
        if r.d.get(piv, j).is_zero() {
            continue;
        }
        if r.d.get(piv, j).is_negative() {
            r.negate_row(piv);
        }
        for i in 0..piv {
            if !r.d.get(i, j).is_zero() {
                let q = -r.d.get(i, j).div_floor(r.d.get(piv, j));
                r.add_row(i, piv, &q);
            }
        }
        piv += 1;
    }
}

/// Mirror image of `row_sweep` with column operations.
fn col_sweep(r: &mut Reduction) {
    let rows = r.d.rows;
    let cols = r.d.cols;
    let mut piv = 0usize;
    for i in 0..rows {
        if piv >= cols {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for j in piv..cols {
                if r.d.get(i, j).is_zero() {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some(b) => r.d.get(i, j).abs() < r.d.get(i, b).abs(),
                };
                if better {
                    best = Some(j);
                }
            }
            let Some(b) = best else { break };
            r.swap_cols(piv, b);
            let mut clean = true;
            for j in (piv + 1)..cols {
                if r.d.get(i, j).is_zero() {
                    continue;
                }
                let q = -r.d.get(i, j).div_floor(r.d.get(i, piv));
                r.add_col(j, piv, &q);
                if !r.d.get(i, j).is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if r.d.get(i, piv).is_zero() {
            continue;
        }
        if r.d.get(i, piv).is_negative() {
            r.negate_col(piv);
        }
        for j in 0..piv {
            if !r.d.get(i, j).is_zero() {
                let q = -r.d.get(i, j).div_floor(r.d.get(i, piv));
                r.add_col(j, piv, &q);
            }
        }
        piv += 1;
    }
}

/// True when every nonzero entry is alone in both its row and its column,
/// i.e. the matrix is diagonal up to a permutation.
fn is_scattered_diagonal(d: &IntMat) -> bool {
    for i in 0..d.rows {
        let mut seen: Option<usize> = None;
        for j in 0..d.cols {
            if d.get(i, j).is_zero() {
                continue;
            }
            if seen.is_some() {
                return false;
            }
            seen = Some(j);
        }
        if let Some(j) = seen {
            for i2 in 0..d.rows {
                if i2 != i && !d.get(i2, j).is_zero() {
                    return false;
                }
            }
        }
    }
    true
}

/// Smith normal form by alternating Hermite sweeps: a full row-echelon
/// reduction, then a full column-echelon reduction, repeated until the
/// matrix is diagonal. Each completed sweep leaves the working matrix in a
/// canonical echelon form, which keeps coefficient growth in check where
/// single-pivot clearing makes the entries of dense inputs explode. Pivots
/// are chosen smallest magnitude first with ties broken by position, so the
/// output is deterministic.
pub fn smith_normal_form(m: &IntMat) -> SmithForm {
    let mut r = Reduction::new(m);

    // Alternate sweeps until the nonzero entries form a scattered diagonal.
    // Random dense matrices settle within a handful of sweeps; the cap is a
    // safety net, with a slower single-pivot pass to finish any stragglers.
    let mut settled = false;
    for _ in 0..64 {
        row_sweep(&mut r);
        if is_scattered_diagonal(&r.d) {
            settled = true;
            break;
        }
        col_sweep(&mut r);
        if is_scattered_diagonal(&r.d) {
            settled = true;
            break;
        }
    }
    if !settled {
        single_pivot_cleanup(&mut r);
    }

    // Pack the scattered pivots onto the leading diagonal.
    let steps = m.rows.min(m.cols);
    let mut next = 0usize;
    for j in 0..r.d.cols {
        if next >= steps {
            break;
        }
        let hit = (0..r.d.rows).find(|&i| !r.d.get(i, j).is_zero());
        if let Some(i) = hit {
            r.swap_rows(next, i);
            r.swap_cols(next, j);
            next += 1;
        }
    }
    let rank = next;

    // Repair the divisibility chain: diag(a, b) with a ∤ b becomes
    // diag(gcd, ab/gcd) through a 2×2 unimodular mix. A repair at slot i can
    // break the chain at slot i−1, so iterate; each fix strictly shrinks the
    // diagonal lexicographically, which bounds the loop.
    loop {
        let mut fixed = true;
        for i in 0..rank.saturating_sub(1) {
            let a = r.d.get(i, i).clone();
            let b = r.d.get(i + 1, i + 1).clone();
            if (&b % &a).is_zero() {
                continue;
            }
            fixed = false;
            r.add_row(i, i + 1, &BigInt::one());
            let eg = a.extended_gcd(&b);
            let (ag, bg) = (&a / &eg.gcd, &b / &eg.gcd);
            r.combine_cols(i, i + 1, &eg.x, &eg.y, &-&bg, &ag);
            let q = -(r.d.get(i + 1, i) / r.d.get(i, i));
            r.add_row(i + 1, i, &q);
        }
        if fixed {
            break;
        }
    }
    for i in 0..rank {
        if r.d.get(i, i).is_negative() {
            r.negate_row(i);
        }
    }

    SmithForm {
        d: r.d,
        u: r.u,
        u_inv: r.u_inv,
        v: r.v,
        v_inv: r.v_inv,
        rank,
    }
}

/// Fallback diagonalization for inputs the sweep alternation did not settle:
/// classic smallest-pivot clearing, position by position. Correct on any
/// input, but its entries can grow much faster than the sweeps'.
fn single_pivot_cleanup(r: &mut Reduction) {
    let steps = r.d.rows.min(r.d.cols);
    let mut t = 0;
    while t < steps {
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..r.d.rows {
            for j in t..r.d.cols {
                if r.d.get(i, j).is_zero() {
                    continue;
                }
                let better = match pivot {
                    None => true,
                    Some((pi, pj)) => r.d.get(i, j).abs() < r.d.get(pi, pj).abs(),
                };
                if better {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else {
            break;
        };
        r.swap_rows(t, pi);
        r.swap_cols(t, pj);
        loop {
            let mut dirty = false;
            for i in (t + 1)..r.d.rows {
                if r.d.get(i, t).is_zero() {
                    continue;
                }
                let q = -(r.d.get(i, t) / r.d.get(t, t));
                r.add_row(i, t, &q);
                if !r.d.get(i, t).is_zero() {
                    r.swap_rows(t, i);
                    dirty = true;
                }
            }
            for j in (t + 1)..r.d.cols {
                if r.d.get(t, j).is_zero() {
                    continue;
                }
                let q = -(r.d.get(t, j) / r.d.get(t, t));
                r.add_col(j, t, &q);
                if !r.d.get(t, j).is_zero() {
                    r.swap_cols(t, j);
                    dirty = true;
                }
            }
            if !dirty {
                break;
            }
        }
        t += 1;
    }
}

/// Determinant by fraction-free (Bareiss) elimination. Exact.
pub fn determinant(m: &IntMat) -> BigInt {
    assert_eq!(m.rows, m.cols, "determinant of a non-square matrix");
    let n = m.rows;
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a.get(k, k).is_zero() {
            let swap = ((k + 1)..n).find(|&i| !a.get(i, k).is_zero());
            match swap {
                Some(i) => {
                    a.swap_rows(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let num = a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j);
                a.set(i, j, &num / &prev);
            }
            a.set(i, k, BigInt::zero());
        }
        prev = a.get(k, k).clone();
    }
    sign * a.get(n - 1, n - 1).clone()
}

/// Full verification of a Smith form against its source matrix: the product
/// identity, unimodularity of both transforms, nonnegative diagonal, and the
/// divisibility chain. Unimodularity is checked through the carried integer
/// inverses — `u·u_inv = I` over ℤ already forces `det u = ±1` — which stays
/// cheap even when the transforms have large entries.
pub fn verify_smith(m: &IntMat, s: &SmithForm) -> bool {
    if s.u.rows != m.rows || s.v.rows != m.cols {
        return false;
    }
    if s.u.mul(m).mul(&s.v) != s.d {
        return false;
    }
    if !s.u.mul(&s.u_inv).is_identity() || !s.v.mul(&s.v_inv).is_identity() {
        return false;
    }
    if s.rank != s.diagonal().iter().filter(|x| !x.is_zero()).count() {
        return false;
    }
    let diag = s.diagonal();
    for i in 0..diag.len() {
        if diag[i].is_negative() {
            return false;
        }
        if i + 1 < diag.len() && !diag[i + 1].is_zero() {
            if diag[i].is_zero() || !(&diag[i + 1] % &diag[i]).is_zero() {
                return false;
            }
        }
    }
    // Off-diagonal must vanish.
    for i in 0..s.d.rows {
        for j in 0..s.d.cols {
            if i != j && !s.d.get(i, j).is_zero() {
                return false;
            }
        }
    }
    true
}

/// A basis (as matrix columns) of the integer kernel lattice of `m`. The
/// basis is saturated: it generates all integer solutions of `m·x = 0`.
pub fn kernel_basis(m: &IntMat) -> IntMat {
    let s = smith_normal_form(m);
    let mut out = IntMat::zero(m.cols, m.cols - s.rank);
    for (idx, j) in (s.rank..m.cols).enumerate() {
        for i in 0..m.cols {
            out.set(i, idx, s.v.get(i, j).clone());
        }
    }
    out
}

/// Reusable integer linear solver for `m·x = b` built on one Smith form.
pub struct LatticeSolver {
    s: SmithForm,
}

impl LatticeSolver {
    pub fn new(m: &IntMat) -> Self {
        LatticeSolver {
            s: smith_normal_form(m),
        }
    }

    /// Some integer solution of `m·x = b`, or `None` when `b` is outside the
    /// column lattice.
    pub fn solve(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        let s = &self.s;
        let ub = s.u.mul_vec(b);
        let mut y = vec![BigInt::zero(); s.d.cols()];
        for (i, ub_i) in ub.iter().enumerate() {
            if i < s.rank {
                let d = s.d.get(i, i);
                let (q, r) = ub_i.div_rem(d);
                if !r.is_zero() {
                    return None;
                }
                y[i] = q;
            } else if !ub_i.is_zero() {
                return None;
            }
        }
        Some(s.v.mul_vec(&y))
    }
}

/// Rank of a rational matrix by exact Gaussian elimination.
pub fn rank_rational(rows: &[Vec<BigRational>]) -> usize {
    let mut a: Vec<Vec<BigRational>> = rows.to_vec();
    let nrows = a.len();
    let ncols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..nrows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let inv = a[rank][col].recip();
        for j in col..ncols {
            let v = &a[rank][j] * &inv;
            a[rank][j] = v;
        }
        for i in 0..nrows {
            if i != rank && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in col..ncols {
                    let v = &a[i][j] - &f * &a[rank][j];
                    a[i][j] = v;
                }
            }
        }
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

/// A finitely generated module over one of the supported rings, presented by
/// its free rank and invariant-factor torsion chain `d₁ | d₂ | …` (each
/// `dᵢ ≥ 2`; over ℤ/n every `dᵢ` also properly divides `n`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FGModulePresentation {
    pub ring: RingSpec,
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
}

impl FGModulePresentation {
    pub fn zero(ring: RingSpec) -> Self {
        FGModulePresentation {
            ring,
            free_rank: 0,
            torsion: Vec::new(),
        }
    }

    pub fn free(ring: RingSpec, rank: usize) -> Self {
        FGModulePresentation {
            ring,
            free_rank: rank,
            torsion: Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    /// Builds the canonical presentation from an unsorted multiset of cyclic
    /// orders (`0` meaning a free summand, units dropped).
    pub fn from_cyclic_orders(ring: RingSpec, orders: &[BigInt]) -> Self {
        // Smith form of the diagonal matrix with the given orders re-sorts
        // everything into one divisibility chain.
        let n = orders.len();
        let mut m = IntMat::zero(n, n);
        for (i, d) in orders.iter().enumerate() {
            m.set(i, i, d.clone());
        }
        let s = smith_normal_form(&m);
        let diag = s.diagonal();
        let mut free_rank = diag.iter().filter(|d| d.is_zero()).count();
        let mut torsion: Vec<BigInt> = diag
            .into_iter()
            .filter(|d| !d.is_zero() && !d.is_one())
            .collect();
        if let RingSpec::IntegersModN(nn) = ring {
            // Over ℤ/n a cyclic order of exactly n is a free copy.
            let nb = BigInt::from(nn);
            let full = torsion.iter().filter(|d| **d == nb).count();
            free_rank += full;
            torsion.retain(|d| *d != nb);
        }
        FGModulePresentation {
            ring,
            free_rank,
            torsion,
        }
    }

    pub fn direct_sum(&self, other: &FGModulePresentation) -> FGModulePresentation {
        assert_eq!(self.ring, other.ring, "direct sum across rings");
        let mut orders: Vec<BigInt> = Vec::new();
        orders.extend(vec![BigInt::zero(); self.free_rank + other.free_rank]);
        orders.extend(self.torsion.iter().cloned());
        orders.extend(other.torsion.iter().cloned());
        if let RingSpec::IntegersModN(n) = self.ring {
            // Free ℤ/n copies re-enter the chain as order-n cyclics.
            let nb = BigInt::from(n);
            for o in orders.iter_mut() {
                if o.is_zero() {
                    *o = nb.clone();
                }
            }
        }
        FGModulePresentation::from_cyclic_orders(self.ring.clone(), &orders)
    }
}

impl fmt::Display for FGModulePresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let free_atom = match &self.ring {
            RingSpec::Integers => "Z".to_string(),
            RingSpec::Rationals => "Q".to_string(),
            RingSpec::IntegersModN(n) => format!("Z_{n}"),
        };
        let mut parts: Vec<String> = Vec::new();
        if self.free_rank == 1 {
            parts.push(free_atom);
        } else if self.free_rank > 1 {
            parts.push(format!("{free_atom}^{}", self.free_rank));
        }
        let mut i = 0;
        while i < self.torsion.len() {
            let d = &self.torsion[i];
            let mut run = 1;
            while i + run < self.torsion.len() && &self.torsion[i + run] == d {
                run += 1;
            }
            if run == 1 {
                parts.push(format!("Z_{d}"));
            } else {
                parts.push(format!("(Z_{d})^{run}"));
            }
            i += run;
        }
        f.write_str(&parts.join(" + "))
    }
}

/// Wire form of a presentation: `{"rank": 2, "torsion": ["2","4"]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PresentationJson {
    pub rank: usize,
    pub torsion: Vec<String>,
}

impl From<&FGModulePresentation> for PresentationJson {
    fn from(p: &FGModulePresentation) -> Self {
        PresentationJson {
            rank: p.free_rank,
            torsion: p.torsion.iter().map(|d| d.to_string()).collect(),
        }
    }
}

/// One degree's worth of matrix data over a ring: entries are ring elements,
/// stored column-per-generator.
#[derive(Debug, Clone)]
pub struct RingMat {
    pub ring: RingSpec,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Coeff>,
}

impl RingMat {
    pub fn zero(ring: RingSpec, rows: usize, cols: usize) -> Self {
        let z = ring.zero();
        RingMat {
            ring,
            rows,
            cols,
            entries: vec![z; rows * cols],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &Coeff {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Coeff) {
        self.entries[i * self.cols + j] = v;
    }

    /// Canonical integer lift (identity on ℤ, residue lift on ℤ/n).
    pub fn to_int(&self) -> Result<IntMat, ModAlgError> {
        let mut out = IntMat::zero(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                match self.get(i, j) {
                    Coeff::Int(v) => out.set(i, j, v.clone()),
                    Coeff::Rat(_) => return Err(ModAlgError::WantInteger(self.ring.name())),
                }
            }
        }
        Ok(out)
    }

    pub fn to_rational(&self) -> Result<Vec<Vec<BigRational>>, ModAlgError> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| match self.get(i, j) {
                        Coeff::Rat(v) => Ok(v.clone()),
                        Coeff::Int(v) => Ok(BigRational::from_integer(v.clone())),
                    })
                    .collect()
            })
            .collect()
    }
}

/// Homology at one degree from the two adjacent boundary matrices,
/// `d_n: C_n → C_(n−1)` and `d_(n+1): C_(n+1) → C_n`.
///
/// Over ℤ: kernel lattice / image lattice via two Smith forms. Over ℚ: rank
/// arithmetic. Over ℤ/n: the entries are lifted to ℤ and the quotient
/// `ker / (im + n·C_n)` is presented directly — the lift only has to compose
/// to zero mod n, which is checked.
pub fn homology_from_matrices(
    ring: &RingSpec,
    d_n: &RingMat,
    d_np1: &RingMat,
) -> Result<FGModulePresentation, ModAlgError> {
    if d_n.cols != d_np1.rows {
        return Err(ModAlgError::NotAComplex(
            d_n.rows, d_n.cols, d_np1.rows, d_np1.cols,
        ));
    }
    match ring {
        RingSpec::Rationals => {
            let a = d_n.to_rational()?;
            let b = d_np1.to_rational()?;
            let rank_dn = rank_rational(&a);
            let rank_dnp1 = rank_rational(&b);
            let dim = d_n.cols;
            Ok(FGModulePresentation::free(
                RingSpec::Rationals,
                dim - rank_dn - rank_dnp1,
            ))
        }
        RingSpec::Integers => {
            let a = d_n.to_int()?;
            let b = d_np1.to_int()?;
            check_complex(&a, &b)?;
            homology_presented_z(&a, &b, None, None)
                .map(|orders| FGModulePresentation::from_cyclic_orders(RingSpec::Integers, &orders))
        }
        RingSpec::IntegersModN(n) => {
            let a = d_n.to_int()?;
            let b = d_np1.to_int()?;
            let prod = a.mul(&b);
            let nb = BigInt::from(*n);
            for i in 0..prod.rows() {
                for j in 0..prod.cols() {
                    if !(prod.get(i, j) % &nb).is_zero() {
                        return Err(ModAlgError::CompositionNonzero(i, j));
                    }
                }
            }
            let rel = IntMat::scalar(a.cols(), &nb);
            let rel_prev = IntMat::scalar(a.rows(), &nb);
            let orders = homology_presented_z(&a, &b, Some(&rel_prev), Some(&rel))?;
            Ok(FGModulePresentation::from_cyclic_orders(
                RingSpec::IntegersModN(*n),
                &orders,
            ))
        }
    }
}

fn check_complex(a: &IntMat, b: &IntMat) -> Result<(), ModAlgError> {
    let prod = a.mul(b);
    for i in 0..prod.rows() {
        for j in 0..prod.cols() {
            if !prod.get(i, j).is_zero() {
                return Err(ModAlgError::CompositionNonzero(i, j));
            }
        }
    }
    Ok(())
}

/// Core subquotient computation over ℤ:
/// `H = {x : d_n·x ∈ im(rel_prev)} / (im(d_(n+1)) + im(rel_here))`,
/// returned as an unsorted list of cyclic orders (0 = free summand).
///
/// With both relation arguments `None` this is ordinary integral homology.
/// Relation columns let the same routine present quotient complexes (σ·id
/// relations for Γ-normalization, n·id for mod-n coefficients).
pub fn homology_presented_z(
    d_n: &IntMat,
    d_np1: &IntMat,
    rel_prev: Option<&IntMat>,
    rel_here: Option<&IntMat>,
) -> Result<Vec<BigInt>, ModAlgError> {
    let c_n = d_n.cols();

    // Generators of the relative-cycle lattice {x : d_n·x ∈ im(rel_prev)}.
    let z: IntMat = match rel_prev {
        None => kernel_basis(d_n),
        Some(rp) => {
            if rp.rows() != d_n.rows() {
                return Err(ModAlgError::ShapeMismatch(
                    rp.rows(),
                    rp.cols(),
                    d_n.rows(),
                    d_n.cols(),
                ));
            }
            // Kernel of [d_n | −rel_prev], projected to the x-block. The
            // projection generates the full preimage lattice.
            let mut neg = rp.clone();
            for i in 0..neg.rows() {
                for j in 0..neg.cols() {
                    let v = -neg.get(i, j);
                    neg.set(i, j, v);
                }
            }
            let stacked = d_n.hconcat(&neg);
            let k = kernel_basis(&stacked);
            let mut proj = IntMat::zero(c_n, k.cols());
            for j in 0..k.cols() {
                for i in 0..c_n {
                    proj.set(i, j, k.get(i, j).clone());
                }
            }
            proj
        }
    };

    // Relation columns to kill: boundaries plus the degree-n relations.
    let b: IntMat = match rel_here {
        None => d_np1.clone(),
        Some(rh) => {
            if rh.rows() != c_n {
                return Err(ModAlgError::ShapeMismatch(rh.rows(), rh.cols(), c_n, c_n));
            }
            d_np1.hconcat(rh)
        }
    };

    // Express the relations in the generators' coordinates.
    let solver = LatticeSolver::new(&z);
    let mut y = IntMat::zero(z.cols(), b.cols());
    for j in 0..b.cols() {
        let col = b.column(j);
        let sol = solver
            .solve(&col)
            .ok_or(ModAlgError::RelationOutsideCycles(j))?;
        for i in 0..z.cols() {
            y.set(i, j, sol[i].clone());
        }
    }

    // Syzygies among the generators (nontrivial only when z is redundant).
    let syz = kernel_basis(&z);
    let pres = syz.hconcat(&y);
    let s = smith_normal_form(&pres);
    let diag = s.diagonal();
    let mut orders: Vec<BigInt> = Vec::new();
    for i in 0..z.cols() {
        let d = diag.get(i).cloned().unwrap_or_else(BigInt::zero);
        orders.push(d);
    }
    Ok(orders)
}

/// Coefficient change along ℤ → ℤ_σ by the universal coefficient formula:
/// `H_k(C; ℤ_σ) ≅ H_k ⊗ ℤ_σ ⊕ Tor(H_(k−1), ℤ_σ)`, with
/// `Tor(ℤ_d, ℤ_σ) = ℤ_gcd(d,σ)`. `integral` lists `H_0, H_1, …`; degrees
/// outside the list are treated as zero.
pub fn change_coefficients(
    integral: &[FGModulePresentation],
    sigma: &BigInt,
    k: usize,
) -> FGModulePresentation {
    let s = sigma.abs();
    if s.is_zero() {
        // ℤ_0 = ℤ: nothing changes.
        return integral
            .get(k)
            .cloned()
            .unwrap_or_else(|| FGModulePresentation::zero(RingSpec::Integers));
    }
    if s.is_one() {
        return FGModulePresentation::zero(RingSpec::Integers);
    }
    let n: u64 = s
        .to_string()
        .parse()
        .expect("coefficient modulus exceeds u64");
    let ring = RingSpec::IntegersModN(n);
    let zero = FGModulePresentation::zero(RingSpec::Integers);
    let hk = integral.get(k).unwrap_or(&zero);
    let mut orders: Vec<BigInt> = Vec::new();
    // H_k ⊗ ℤ_σ: free summands become ℤ_σ, cyclics become ℤ_gcd(d,σ).
    for _ in 0..hk.free_rank {
        orders.push(s.clone());
    }
    for d in &hk.torsion {
        orders.push(d.gcd(&s));
    }
    // Tor(H_(k−1), ℤ_σ): only torsion contributes.
    if k > 0 {
        if let Some(hk1) = integral.get(k - 1) {
            for d in &hk1.torsion {
                orders.push(d.gcd(&s));
            }
        }
    }
    FGModulePresentation::from_cyclic_orders(ring, &orders)
}
