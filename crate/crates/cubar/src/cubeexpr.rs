//! Symbolic singular cubes with exact rational evaluation.
//!
//! A generator is a map `Iⁿ → ℚ^d` built as a composition tree. Leaves are
//! value tables (piecewise multilinear) or affine cells; interior nodes
//! reparametrize the domain (clamped affine maps, faces) or extend the target
//! (cylinder and jag extensions used by the prism homotopy, warp maps used by
//! the subdivision homotopy). Everything evaluates exactly at rational
//! points — there is no floating point, so identity checks on lattices are
//! proofs about the lattice, not approximations.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::coeff::{format_rational, parse_rational};

pub type Point = Vec<BigRational>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CubeError {
    #[error("value table needs (step_denom+1)^arity = {expect} rows, got {got}")]
    TableSize { expect: usize, got: usize },
    #[error("value table too large: {0} rows exceeds the {1}-row cap")]
    TableTooLarge(usize, usize),
    #[error("table row {0} has {1} coordinates, expected {2}")]
    TableRow(usize, usize, usize),
    #[error("arity {0} exceeds the supported maximum {1}")]
    ArityTooLarge(usize, usize),
    #[error("step denominator must be positive")]
    ZeroStep,
    #[error("affine cell: start has {0} axes but deltas has {1}")]
    AffineShape(usize, usize),
    #[error("clamped node: inner arity {0} but e has {1} and v has {2} entries")]
    ClampShape(usize, usize, usize),
    #[error("face index j={j} out of range 1..={arity}")]
    FaceSlot { j: usize, arity: usize },
    #[error("face height i={i} exceeds L={l}")]
    FaceHeight { i: u32, l: u32 },
    #[error("L must be positive")]
    ZeroL,
    #[error("jag index k={k} exceeds L={l}")]
    JagIndex { k: u32, l: u32 },
    #[error("warp letter {0} is not 0, 1, or 2")]
    WarpLetter(u8),
    #[error("warp node: inner arity {0} but z has {1} letters")]
    WarpShape(usize, usize),
    #[error("face of an arity-0 generator")]
    FaceOfPoint,
    #[error("expression deeper than {0} nodes")]
    TooDeep(usize),
    #[error("evaluation point has {0} coordinates, generator arity is {1}")]
    PointArity(usize, usize),
    #[error("evaluation point coordinate {0} outside [0,1]")]
    PointRange(usize),
    #[error("cannot compare maps of different shape: arity {0}→{1} vs {2}→{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("bad rational literal {0:?}")]
    BadRational(String),
    #[error("lattice step must be 1/N for an integer N ≥ 1, got {0}")]
    BadStep(String),
}

const MAX_ARITY: usize = 16;
const MAX_TABLE_ROWS: usize = 1 << 20;
const MAX_DEPTH: usize = 96;

/// A piecewise multilinear map given by its values on the lattice with step
/// `1/step_denom`. Rows are indexed in mixed radix with axis 0 most
/// significant; evaluation interpolates multilinearly inside each lattice
/// cell, exactly.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BaseTable {
    pub arity: usize,
    pub dim: usize,
    pub step_denom: u32,
    pub values: Vec<Vec<BigRational>>,
}

impl BaseTable {
    pub fn new(
        arity: usize,
        dim: usize,
        step_denom: u32,
        values: Vec<Vec<BigRational>>,
    ) -> Result<Self, CubeError> {
        if step_denom == 0 {
            return Err(CubeError::ZeroStep);
        }
        if arity > MAX_ARITY {
            return Err(CubeError::ArityTooLarge(arity, MAX_ARITY));
        }
        let side = step_denom as usize + 1;
        let mut expect: usize = 1;
        for _ in 0..arity {
            expect = expect
                .checked_mul(side)
                .filter(|&n| n <= MAX_TABLE_ROWS)
                .ok_or(CubeError::TableTooLarge(usize::MAX, MAX_TABLE_ROWS))?;
        }
        if values.len() != expect {
            return Err(CubeError::TableSize {
                expect,
                got: values.len(),
            });
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != dim {
                return Err(CubeError::TableRow(i, row.len(), dim));
            }
        }
        Ok(BaseTable {
            arity,
            dim,
            step_denom,
            values,
        })
    }

    /// Tabulates a function on the lattice. Exact for piecewise multilinear
    /// functions with breakpoints on the lattice.
    pub fn tabulate<F>(
        arity: usize,
        dim: usize,
        step_denom: u32,
        mut f: F,
    ) -> Result<Self, CubeError>
    where
        F: FnMut(&[BigRational]) -> Vec<BigRational>,
    {
        let side = step_denom as usize + 1;
        let count = side.pow(arity as u32);
        let mut values = Vec::with_capacity(count);
        for row in 0..count {
            let mut idx = row;
            let mut p = vec![BigRational::zero(); arity];
            for t in (0..arity).rev() {
                let digit = idx % side;
                idx /= side;
                p[t] = BigRational::new(BigInt::from(digit), BigInt::from(step_denom));
            }
            values.push(f(&p));
        }
        BaseTable::new(arity, dim, step_denom, values)
    }

    fn row_index(&self, idx: &[usize]) -> usize {
        let side = self.step_denom as usize + 1;
        let mut out = 0;
        for &i in idx {
            out = out * side + i;
        }
        out
    }

    pub fn eval(&self, p: &[BigRational]) -> Result<Vec<BigRational>, CubeError> {
        check_point(p, self.arity)?;
        // Locate the lattice cell and the fractional offset per axis.
        let denom = BigRational::from_integer(BigInt::from(self.step_denom));
        let mut cell = vec![0usize; self.arity];
        let mut frac = vec![BigRational::zero(); self.arity];
        for t in 0..self.arity {
            let u = &p[t] * &denom;
            let mut k = u.floor().to_integer();
            let top = BigInt::from(self.step_denom);
            if self.arity > 0 && k >= top {
                k = top - 1; // p = 1 falls into the last cell with offset 1
            }
            let ku =
                k.to_usize()
                    .ok_or(CubeError::PointRange(t))?;
            frac[t] = &u - BigRational::from_integer(BigInt::from(ku));
            cell[t] = ku;
        }
        // Multilinear blend over the 2^arity cell corners.
        let mut out = vec![BigRational::zero(); self.dim];
        for corner in 0..(1usize << self.arity) {
            let mut weight = BigRational::one();
            let mut idx = vec![0usize; self.arity];
            for t in 0..self.arity {
                if corner >> t & 1 == 1 {
                    weight *= &frac[t];
                    idx[t] = cell[t] + 1;
                } else {
                    weight *= BigRational::one() - &frac[t];
                    idx[t] = cell[t];
                }
            }
            if weight.is_zero() {
                continue;
            }
            let row = &self.values[self.row_index(&idx)];
            for (o, v) in out.iter_mut().zip(row) {
                *o += &weight * v;
            }
        }
        Ok(out)
    }

    /// Per slot: does the table provably depend on that coordinate? Exact,
    /// because a multilinear interpolant is constant along an axis iff its
    /// lattice values are.
    pub fn slot_active(&self) -> Vec<bool> {
        let side = self.step_denom as usize + 1;
        let mut active = vec![false; self.arity];
        for t in 0..self.arity {
            let stride = side.pow((self.arity - 1 - t) as u32);
            'rows: for row in 0..self.values.len() {
                let digit = row / stride % side;
                if digit + 1 < side && self.values[row] != self.values[row + stride] {
                    active[t] = true;
                    break 'rows;
                }
            }
        }
        active
    }
}

/// An affine box map: axis `a` of the target moves as `start[a] +
/// deltas[a]·x_s`, where slots are assigned to the nonzero-delta axes in
/// increasing axis order. Zero-delta axes stay at `start[a]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AffineCell {
    pub start: Vec<BigRational>,
    pub deltas: Vec<BigRational>,
}

impl AffineCell {
    pub fn new(start: Vec<BigRational>, deltas: Vec<BigRational>) -> Result<Self, CubeError> {
        if start.len() != deltas.len() {
            return Err(CubeError::AffineShape(start.len(), deltas.len()));
        }
        let cell = AffineCell { start, deltas };
        if cell.arity() > MAX_ARITY {
            return Err(CubeError::ArityTooLarge(cell.arity(), MAX_ARITY));
        }
        Ok(cell)
    }

    /// The identity map on Iⁿ.
    pub fn identity(n: usize) -> Self {
        AffineCell {
            start: vec![BigRational::zero(); n],
            deltas: vec![BigRational::one(); n],
        }
    }

    /// The constant map at a point (of any arity — arity 0 here; compose
    /// with dead slots via the chain layer for higher arities).
    pub fn constant(p: Vec<BigRational>) -> Self {
        let deltas = vec![BigRational::zero(); p.len()];
        AffineCell { start: p, deltas }
    }

    pub fn arity(&self) -> usize {
        self.deltas.iter().filter(|d| !d.is_zero()).count()
    }

    pub fn dim(&self) -> usize {
        self.start.len()
    }

    pub fn used_axes(&self) -> Vec<usize> {
        (0..self.deltas.len())
            .filter(|&a| !self.deltas[a].is_zero())
            .collect()
    }

    pub fn eval(&self, p: &[BigRational]) -> Result<Vec<BigRational>, CubeError> {
        check_point(p, self.arity())?;
        let mut out = self.start.clone();
        for (slot, axis) in self.used_axes().into_iter().enumerate() {
            out[axis] += &self.deltas[axis] * &p[slot];
        }
        Ok(out)
    }
}

/// A symbolic singular cube.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CubeExpr {
    /// Piecewise multilinear value table.
    Base(BaseTable),
    /// Affine box map.
    AffineCell(AffineCell),
    /// `x ↦ inner(clamp(α·(e + v·x)))` coordinatewise: the reparametrized
    /// restriction used by subdivision (the `α = 1/3` forms).
    Clamped {
        inner: Box<CubeExpr>,
        alpha: BigRational,
        e: Vec<BigRational>,
        v: Vec<BigRational>,
    },
    /// Coordinate `j` (1-based) frozen at height `i/l`.
    Face {
        inner: Box<CubeExpr>,
        l: u32,
        i: u32,
        j: usize,
    },
    /// `x ↦ (inner(x'), 0)` with a fresh (ignored) last input slot — the
    /// cylinder extension ξ.
    CrossZero { inner: Box<CubeExpr> },
    /// `x ↦ (inner(x'), χ_k(x_last))` — the jag extension ψ.
    CrossJag {
        inner: Box<CubeExpr>,
        l: u32,
        k: u32,
    },
    /// `(x, y) ↦ inner(η_{z₁}(x₁,y), …)` — the subdivision homotopy's warp;
    /// `tilde` selects the mirror curves.
    Warp {
        inner: Box<CubeExpr>,
        z: Vec<u8>,
        tilde: bool,
    },
}

impl CubeExpr {
    pub fn arity(&self) -> usize {
        match self {
            CubeExpr::Base(t) => t.arity,
            CubeExpr::AffineCell(c) => c.arity(),
            CubeExpr::Clamped { inner, .. } => inner.arity(),
            CubeExpr::Face { inner, .. } => inner.arity().saturating_sub(1),
            CubeExpr::CrossZero { inner } => inner.arity() + 1,
            CubeExpr::CrossJag { inner, .. } => inner.arity() + 1,
            CubeExpr::Warp { inner, .. } => inner.arity() + 1,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            CubeExpr::Base(t) => t.dim,
            CubeExpr::AffineCell(c) => c.dim(),
            CubeExpr::Clamped { inner, .. } => inner.dim(),
            CubeExpr::Face { inner, .. } => inner.dim(),
            CubeExpr::CrossZero { inner } => inner.dim() + 1,
            CubeExpr::CrossJag { inner, .. } => inner.dim() + 1,
            CubeExpr::Warp { inner, .. } => inner.dim(),
        }
    }

    /// Structural validation of the whole tree (shapes, ranges, depth).
    /// Parsers run this before anything else touches the expression.
    pub fn validate(&self) -> Result<(), CubeError> {
        self.validate_depth(0)
    }

    fn validate_depth(&self, depth: usize) -> Result<(), CubeError> {
        if depth > MAX_DEPTH {
            return Err(CubeError::TooDeep(MAX_DEPTH));
        }
        match self {
            CubeExpr::Base(t) => {
                // Re-run the constructor checks on possibly hand-built data.
                BaseTable::new(t.arity, t.dim, t.step_denom, t.values.clone()).map(|_| ())
            }
            CubeExpr::AffineCell(c) => {
                AffineCell::new(c.start.clone(), c.deltas.clone()).map(|_| ())
            }
            CubeExpr::Clamped { inner, e, v, .. } => {
                inner.validate_depth(depth + 1)?;
                let n = inner.arity();
                if e.len() != n || v.len() != n {
                    return Err(CubeError::ClampShape(n, e.len(), v.len()));
                }
                Ok(())
            }
            CubeExpr::Face { inner, l, i, j } => {
                inner.validate_depth(depth + 1)?;
                if *l == 0 {
                    return Err(CubeError::ZeroL);
                }
                let n = inner.arity();
                if n == 0 {
                    return Err(CubeError::FaceOfPoint);
                }
                if *j == 0 || *j > n {
                    return Err(CubeError::FaceSlot { j: *j, arity: n });
                }
                if i > l {
                    return Err(CubeError::FaceHeight { i: *i, l: *l });
                }
                Ok(())
            }
            CubeExpr::CrossZero { inner } => {
                inner.validate_depth(depth + 1)?;
                check_arity_cap(inner.arity() + 1)
            }
            CubeExpr::CrossJag { inner, l, k } => {
                inner.validate_depth(depth + 1)?;
                if *l == 0 {
                    return Err(CubeError::ZeroL);
                }
                if k > l {
                    return Err(CubeError::JagIndex { k: *k, l: *l });
                }
                check_arity_cap(inner.arity() + 1)
            }
            CubeExpr::Warp { inner, z, .. } => {
                inner.validate_depth(depth + 1)?;
                if z.len() != inner.arity() {
                    return Err(CubeError::WarpShape(inner.arity(), z.len()));
                }
                if let Some(&bad) = z.iter().find(|&&zi| zi > 2) {
                    return Err(CubeError::WarpLetter(bad));
                }
                check_arity_cap(inner.arity() + 1)
            }
        }
    }

    /// Exact evaluation at a rational point of `[0,1]^arity`.
    pub fn eval(&self, p: &[BigRational]) -> Result<Vec<BigRational>, CubeError> {
        match self {
            CubeExpr::Base(t) => t.eval(p),
            CubeExpr::AffineCell(c) => c.eval(p),
            CubeExpr::Clamped { inner, alpha, e, v } => {
                check_point(p, inner.arity())?;
                if e.len() != inner.arity() || v.len() != inner.arity() {
                    return Err(CubeError::ClampShape(inner.arity(), e.len(), v.len()));
                }
                let q: Vec<BigRational> = p
                    .iter()
                    .enumerate()
                    .map(|(t, x)| clamp_unit(&(alpha * (&e[t] + &v[t] * x))))
                    .collect();
                inner.eval(&q)
            }
            CubeExpr::Face { inner, l, i, j } => {
                let n = inner.arity();
                if n == 0 {
                    return Err(CubeError::FaceOfPoint);
                }
                if *j == 0 || *j > n {
                    return Err(CubeError::FaceSlot { j: *j, arity: n });
                }
                if i > l || *l == 0 {
                    return Err(CubeError::FaceHeight { i: *i, l: *l });
                }
                check_point(p, n - 1)?;
                let c = BigRational::new(BigInt::from(*i), BigInt::from(*l));
                let mut q = Vec::with_capacity(n);
                q.extend_from_slice(&p[..j - 1]);
                q.push(c);
                q.extend_from_slice(&p[j - 1..]);
                inner.eval(&q)
            }
            CubeExpr::CrossZero { inner } => {
                let n = inner.arity();
                check_point(p, n + 1)?;
                let mut out = inner.eval(&p[..n])?;
                out.push(BigRational::zero());
                Ok(out)
            }
            CubeExpr::CrossJag { inner, l, k } => {
                let n = inner.arity();
                check_point(p, n + 1)?;
                let mut out = inner.eval(&p[..n])?;
                out.push(chi(*l, *k, &p[n])?);
                Ok(out)
            }
            CubeExpr::Warp { inner, z, tilde } => {
                let n = inner.arity();
                if z.len() != n {
                    return Err(CubeError::WarpShape(n, z.len()));
                }
                check_point(p, n + 1)?;
                let y = &p[n];
                let q: Vec<BigRational> = (0..n)
                    .map(|t| eta(z[t], *tilde, &p[t], y))
                    .collect::<Result<_, _>>()?;
                inner.eval(&q)
            }
        }
    }
}

fn check_arity_cap(arity: usize) -> Result<(), CubeError> {
    if arity > MAX_ARITY {
        Err(CubeError::ArityTooLarge(arity, MAX_ARITY))
    } else {
        Ok(())
    }
}

fn check_point(p: &[BigRational], arity: usize) -> Result<(), CubeError> {
    if p.len() != arity {
        return Err(CubeError::PointArity(p.len(), arity));
    }
    for (t, x) in p.iter().enumerate() {
        if x.is_negative() || x > &BigRational::one() {
            return Err(CubeError::PointRange(t));
        }
    }
    Ok(())
}

/// Clamp to `[0,1]` — the retraction `q` applied coordinatewise.
pub fn clamp_unit(x: &BigRational) -> BigRational {
    if x.is_negative() {
        BigRational::zero()
    } else if x > &BigRational::one() {
        BigRational::one()
    } else {
        x.clone()
    }
}

/// The jag curve `χ_k` for the `L`-slice prism: the piecewise linear bump
/// with `χ_k(j/L) = δ_(j,k)`, supported on `[(k−1)/L, (k+1)/L]`.
pub fn chi(l: u32, k: u32, x: &BigRational) -> Result<BigRational, CubeError> {
    if l == 0 {
        return Err(CubeError::ZeroL);
    }
    if k > l {
        return Err(CubeError::JagIndex { k, l });
    }
    check_point(std::slice::from_ref(x), 1).map_err(|_| CubeError::PointRange(0))?;
    let lr = BigRational::from_integer(BigInt::from(l));
    let kr = BigRational::from_integer(BigInt::from(k));
    let lx = &lr * x;
    let zero = BigRational::zero();
    let one = BigRational::one();
    // On [(k−1)/L, k/L] the curve rises as Lx − k + 1; on [k/L, (k+1)/L] it
    // falls as 1 − (Lx − k); it vanishes outside. The boundary bumps k = 0
    // and k = L are the restrictions of the same formulas to [0,1].
    let rising = &lx - &kr + &one;
    let falling = &one - (&lx - &kr);
    let val = if lx <= kr {
        if rising.is_negative() {
            zero
        } else {
            rising
        }
    } else if falling.is_negative() {
        zero
    } else {
        falling
    };
    Ok(val)
}

/// The warp curves `η_z(x, y)` (and their mirrors `η̃_z` for `tilde`):
/// the three reparametrizations whose alternating sum is the subdivision
/// homotopy. All are rational in `(x, y)` with a single clamp at 1.
pub fn eta(z: u8, tilde: bool, x: &BigRational, y: &BigRational) -> Result<BigRational, CubeError> {
    if z > 2 {
        return Err(CubeError::WarpLetter(z));
    }
    check_point(std::slice::from_ref(x), 1).map_err(|_| CubeError::PointRange(0))?;
    check_point(std::slice::from_ref(y), 1).map_err(|_| CubeError::PointRange(1))?;
    let two = BigRational::from_integer(BigInt::from(2));
    // Denominator 3 − 2y (plain) or 1 + 2y (mirror); both stay in [1, 3].
    let den = if tilde {
        BigRational::one() + &two * y
    } else {
        BigRational::from_integer(BigInt::from(3)) - &two * y
    };
    let num = match z {
        0 => x.clone(),
        1 => &two - x,
        _ => &two + x,
    };
    let raw = num / den;
    Ok(if raw > BigRational::one() {
        BigRational::one()
    } else {
        raw
    })
}

/// Degeneracy verdict for a generator: does the map ignore some input slot?
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    Degenerate,
    Nondegenerate,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SlotFact {
    Dead,
    Alive,
    Maybe,
}

/// Per-slot structural facts, exact where the node structure decides them.
fn slot_facts(e: &CubeExpr) -> Vec<SlotFact> {
    match e {
        CubeExpr::Base(t) => t
            .slot_active()
            .into_iter()
            .map(|a| if a { SlotFact::Alive } else { SlotFact::Dead })
            .collect(),
        CubeExpr::AffineCell(c) => vec![SlotFact::Alive; c.arity()],
        CubeExpr::Clamped { inner, alpha, e, v } => {
            let inner_facts = slot_facts(inner);
            (0..inner.arity())
                .map(|t| {
                    if inner_facts[t] == SlotFact::Dead {
                        return SlotFact::Dead;
                    }
                    if v[t].is_zero() {
                        return SlotFact::Dead;
                    }
                    // Image interval of clamp(α(e + v·x)) over x ∈ [0,1].
                    let p0 = alpha * &e[t];
                    let p1 = alpha * (&e[t] + &v[t]);
                    let (lo, hi) = if p0 <= p1 { (p0, p1) } else { (p1, p0) };
                    if hi <= BigRational::zero() || lo >= BigRational::one() {
                        SlotFact::Dead // saturated: constant after clamping
                    } else {
                        SlotFact::Maybe
                    }
                })
                .collect()
        }
        CubeExpr::Face { inner, j, .. } => {
            let inner_facts = slot_facts(inner);
            let mut out = Vec::with_capacity(inner_facts.len().saturating_sub(1));
            for (s, fact) in inner_facts.into_iter().enumerate() {
                if s == *j - 1 {
                    continue;
                }
                out.push(match fact {
                    SlotFact::Dead => SlotFact::Dead,
                    _ => SlotFact::Maybe, // aliveness may be lost on the slice
                });
            }
            out
        }
        CubeExpr::CrossZero { inner } => {
            let mut out = slot_facts(inner);
            out.push(SlotFact::Dead);
            out
        }
        CubeExpr::CrossJag { inner, .. } => {
            let mut out = slot_facts(inner);
            out.push(SlotFact::Alive); // the appended χ coordinate varies
            out
        }
        CubeExpr::Warp { inner, .. } => {
            let inner_facts = slot_facts(inner);
            let all_dead = inner_facts.iter().all(|f| *f == SlotFact::Dead);
            let mut out: Vec<SlotFact> = inner_facts
                .into_iter()
                .map(|f| {
                    if f == SlotFact::Dead {
                        SlotFact::Dead
                    } else {
                        SlotFact::Maybe
                    }
                })
                .collect();
            out.push(if all_dead { SlotFact::Dead } else { SlotFact::Maybe });
            out
        }
    }
}

/// The default comparison lattice: fine enough for every breakpoint family
/// in the tree (jag curves at multiples of `1/L`, warp curves at halves,
/// subdivision points at thirds, table lattices at their own steps).
pub fn default_step_denom(exprs: &[&CubeExpr]) -> u32 {
    fn max_l(e: &CubeExpr) -> u32 {
        match e {
            CubeExpr::Base(_) | CubeExpr::AffineCell(_) => 1,
            CubeExpr::Clamped { inner, .. } => max_l(inner),
            CubeExpr::Face { inner, l, .. } => (*l).max(max_l(inner)),
            CubeExpr::CrossZero { inner } => max_l(inner),
            CubeExpr::CrossJag { inner, l, .. } => (*l).max(max_l(inner)),
            CubeExpr::Warp { inner, .. } => max_l(inner),
        }
    }
    fn table_denoms(e: &CubeExpr, out: &mut Vec<u32>) {
        match e {
            CubeExpr::Base(t) => out.push(t.step_denom),
            CubeExpr::AffineCell(_) => {}
            CubeExpr::Clamped { inner, .. }
            | CubeExpr::Face { inner, .. }
            | CubeExpr::CrossZero { inner }
            | CubeExpr::CrossJag { inner, .. }
            | CubeExpr::Warp { inner, .. } => table_denoms(inner, out),
        }
    }
    let mut denom: u32 = 1;
    for e in exprs {
        denom = denom.max(6 * max_l(e));
        let mut ds = Vec::new();
        table_denoms(e, &mut ds);
        for d in ds {
            denom = num_integer::lcm(denom, d.max(1)).min(60);
        }
    }
    denom.clamp(1, 60)
}

/// Iterate the lattice `{0, 1/n, …, 1}^arity` in lexicographic order.
pub fn lattice_points(arity: usize, step_denom: u32) -> impl Iterator<Item = Point> {
    let side = step_denom as usize + 1;
    let count = side.checked_pow(arity as u32).unwrap_or(0);
    (0..count).map(move |row| {
        let mut idx = row;
        let mut p = vec![BigRational::zero(); arity];
        for t in (0..arity).rev() {
            let digit = idx % side;
            idx /= side;
            p[t] = BigRational::new(BigInt::from(digit), BigInt::from(step_denom));
        }
        p
    })
}

const SEARCH_BUDGET: usize = 30_000;

fn search_denom(arity: usize, wanted: u32) -> u32 {
    if arity == 0 {
        return wanted;
    }
    let mut n = wanted;
    while n > 2 && ((n as usize + 1).pow(arity as u32)) > SEARCH_BUDGET {
        n -= 1;
    }
    n
}

/// Degeneracy test: structural facts first (exact), then a lattice witness
/// search for the undecided slots. `Degenerate` and `Nondegenerate` are
/// proofs; `Unknown` means the search budget ran out of evidence.
pub fn is_degenerate(e: &CubeExpr) -> Degeneracy {
    let facts = slot_facts(e);
    if facts.iter().any(|f| *f == SlotFact::Dead) {
        return Degeneracy::Degenerate;
    }
    if facts.iter().all(|f| *f == SlotFact::Alive) {
        return Degeneracy::Nondegenerate;
    }
    let arity = e.arity();
    let denom = search_denom(arity, default_step_denom(&[e]));
    let side = denom as usize + 1;
    let mut all_witnessed = true;
    for t in 0..arity {
        if facts[t] == SlotFact::Alive {
            continue;
        }
        // Vary slot t along each lattice line, looking for two values apart.
        let mut witnessed = false;
        'outer: for base in lattice_points(arity - 1, denom) {
            let mut prev: Option<Vec<BigRational>> = None;
            for step in 0..side {
                let mut p = base.clone();
                p.insert(t, BigRational::new(BigInt::from(step), BigInt::from(denom)));
                let Ok(val) = e.eval(&p) else {
                    return Degeneracy::Unknown;
                };
                if let Some(prev) = &prev {
                    if prev != &val {
                        witnessed = true;
                        break 'outer;
                    }
                }
                prev = Some(val);
            }
        }
        if !witnessed {
            all_witnessed = false;
        }
    }
    if all_witnessed {
        Degeneracy::Nondegenerate
    } else {
        Degeneracy::Unknown
    }
}

/// Outcome of a lattice map comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapCompare {
    /// Equal at every sampled lattice point. Sound for refutation only: a
    /// sufficiently adversarial pair could still differ off-lattice.
    AgreeOnLattice { points: usize },
    /// Definitive inequality with an exact witness.
    Differ {
        at: Point,
        lhs: Vec<BigRational>,
        rhs: Vec<BigRational>,
    },
}

/// Equality on the `1/N` lattice, where `lattice_step` must be of the form
/// `1/N` with `N ≥ 1`. Sound for refutation; lattice-complete only on the
/// piecewise-multilinear fragment when the lattice refines all breakpoints.
pub fn maps_equal(
    lhs: &CubeExpr,
    rhs: &CubeExpr,
    lattice_step: &BigRational,
) -> Result<bool, CubeError> {
    let denom = step_to_denom(lattice_step)?;
    Ok(matches!(
        compare_maps(lhs, rhs, Some(denom))?,
        MapCompare::AgreeOnLattice { .. }
    ))
}

/// Converts a step `1/N` into its denominator `N`.
pub fn step_to_denom(lattice_step: &BigRational) -> Result<u32, CubeError> {
    let bad = || CubeError::BadStep(lattice_step.to_string());
    if !lattice_step.numer().is_one() {
        return Err(bad());
    }
    lattice_step.denom().to_u32().filter(|&n| n >= 1).ok_or_else(bad)
}

/// Compares two generators pointwise on a lattice, returning an exact
/// witness on inequality. `step_denom = None` picks the default density
/// from both trees' breakpoint structure.
pub fn compare_maps(
    lhs: &CubeExpr,
    rhs: &CubeExpr,
    step_denom: Option<u32>,
) -> Result<MapCompare, CubeError> {
    if lhs.arity() != rhs.arity() || lhs.dim() != rhs.dim() {
        return Err(CubeError::ShapeMismatch(
            lhs.arity(),
            lhs.dim(),
            rhs.arity(),
            rhs.dim(),
        ));
    }
    let denom = step_denom.unwrap_or_else(|| default_step_denom(&[lhs, rhs]));
    let mut points = 0;
    for p in lattice_points(lhs.arity(), denom) {
        let a = lhs.eval(&p)?;
        let b = rhs.eval(&p)?;
        points += 1;
        if a != b {
            return Ok(MapCompare::Differ {
                at: p,
                lhs: a,
                rhs: b,
            });
        }
    }
    Ok(MapCompare::AgreeOnLattice { points })
}

// --- serde: a tagged JSON tree with rationals as "p/q" strings.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    arity: usize,
    target_dim: usize,
    lattice_step: String,
    values: Vec<Vec<String>>,
}

impl RawTable {
    fn to_table(&self) -> Result<BaseTable, CubeError> {
        let step = rat(&self.lattice_step)?;
        let denom = step_to_denom(&step)?;
        let rows = self
            .values
            .iter()
            .map(|row| rats(row))
            .collect::<Result<Vec<_>, _>>()?;
        BaseTable::new(self.arity, self.target_dim, denom, rows)
    }

    fn from_table(t: &BaseTable) -> RawTable {
        RawTable {
            arity: t.arity,
            target_dim: t.dim,
            lattice_step: format!("1/{}", t.step_denom),
            values: t
                .values
                .iter()
                .map(|row| row.iter().map(format_rational).collect())
                .collect(),
        }
    }
}

impl Serialize for BaseTable {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        RawTable::from_table(self).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for BaseTable {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        RawTable::deserialize(de)?
            .to_table()
            .map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case", deny_unknown_fields)]
enum RawExpr {
    Base {
        arity: usize,
        target_dim: usize,
        lattice_step: String,
        values: Vec<Vec<String>>,
    },
    Affine {
        start: Vec<String>,
        deltas: Vec<String>,
    },
    Clamped {
        alpha: String,
        e: Vec<String>,
        v: Vec<String>,
        inner: Box<RawExpr>,
    },
    Face {
        l: u32,
        i: u32,
        j: usize,
        inner: Box<RawExpr>,
    },
    CrossZero {
        inner: Box<RawExpr>,
    },
    CrossJag {
        l: u32,
        k: u32,
        inner: Box<RawExpr>,
    },
    Warp {
        z: Vec<u8>,
        tilde: bool,
        inner: Box<RawExpr>,
    },
}

fn rat(s: &str) -> Result<BigRational, CubeError> {
    parse_rational(s).ok_or_else(|| CubeError::BadRational(s.to_string()))
}

fn rats(xs: &[String]) -> Result<Vec<BigRational>, CubeError> {
    xs.iter().map(|s| rat(s)).collect()
}

impl RawExpr {
    fn to_expr(&self) -> Result<CubeExpr, CubeError> {
        Ok(match self {
            RawExpr::Base {
                arity,
                target_dim,
                lattice_step,
                values,
            } => {
                let raw = RawTable {
                    arity: *arity,
                    target_dim: *target_dim,
                    lattice_step: lattice_step.clone(),
                    values: values.clone(),
                };
                CubeExpr::Base(raw.to_table()?)
            }
            RawExpr::Affine { start, deltas } => {
                CubeExpr::AffineCell(AffineCell::new(rats(start)?, rats(deltas)?)?)
            }
            RawExpr::Clamped { alpha, e, v, inner } => CubeExpr::Clamped {
                inner: Box::new(inner.to_expr()?),
                alpha: rat(alpha)?,
                e: rats(e)?,
                v: rats(v)?,
            },
            RawExpr::Face { l, i, j, inner } => CubeExpr::Face {
                inner: Box::new(inner.to_expr()?),
                l: *l,
                i: *i,
                j: *j,
            },
            RawExpr::CrossZero { inner } => CubeExpr::CrossZero {
                inner: Box::new(inner.to_expr()?),
            },
            RawExpr::CrossJag { l, k, inner } => CubeExpr::CrossJag {
                inner: Box::new(inner.to_expr()?),
                l: *l,
                k: *k,
            },
            RawExpr::Warp { z, tilde, inner } => CubeExpr::Warp {
                inner: Box::new(inner.to_expr()?),
                z: z.clone(),
                tilde: *tilde,
            },
        })
    }

    fn from_expr(e: &CubeExpr) -> RawExpr {
        let fr = |r: &BigRational| format_rational(r);
        match e {
            CubeExpr::Base(t) => {
                let raw = RawTable::from_table(t);
                RawExpr::Base {
                    arity: raw.arity,
                    target_dim: raw.target_dim,
                    lattice_step: raw.lattice_step,
                    values: raw.values,
                }
            }
            CubeExpr::AffineCell(c) => RawExpr::Affine {
                start: c.start.iter().map(fr).collect(),
                deltas: c.deltas.iter().map(fr).collect(),
            },
            CubeExpr::Clamped { inner, alpha, e, v } => RawExpr::Clamped {
                alpha: fr(alpha),
                e: e.iter().map(fr).collect(),
                v: v.iter().map(fr).collect(),
                inner: Box::new(RawExpr::from_expr(inner)),
            },
            CubeExpr::Face { inner, l, i, j } => RawExpr::Face {
                l: *l,
                i: *i,
                j: *j,
                inner: Box::new(RawExpr::from_expr(inner)),
            },
            CubeExpr::CrossZero { inner } => RawExpr::CrossZero {
                inner: Box::new(RawExpr::from_expr(inner)),
            },
            CubeExpr::CrossJag { inner, l, k } => RawExpr::CrossJag {
                l: *l,
                k: *k,
                inner: Box::new(RawExpr::from_expr(inner)),
            },
            CubeExpr::Warp { inner, z, tilde } => RawExpr::Warp {
                z: z.clone(),
                tilde: *tilde,
                inner: Box::new(RawExpr::from_expr(inner)),
            },
        }
    }
}

impl Serialize for CubeExpr {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        RawExpr::from_expr(self).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for CubeExpr {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawExpr::deserialize(de)?;
        let expr = raw.to_expr().map_err(D::Error::custom)?;
        expr.validate().map_err(D::Error::custom)?;
        Ok(expr)
    }
}
