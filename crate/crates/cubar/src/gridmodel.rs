//! Finite combinatorial models on the integer grid.
//!
//! A model starts from elementary boxes (a base corner in ℤ^d plus a 0/1
//! extent per axis) and closes them under the height-`i/L` face maps. The
//! closure stays finite: a face pins one free axis at `lo + i/L`, so every
//! generator is a product of unit intervals `[a, a+1]` and rational points
//! with denominator dividing `L`. On top of the closure each generator also
//! carries a tower of constant cylinders (extra input slots the map ignores);
//! those are what make the degree-`n` chain groups nonzero above the top
//! cell dimension, exactly as for the one-point space.
//!
//! The model is a subcomplex of the singular theory, built for matrix-level
//! verification: boundary matrices, pairs and their long exact sequence, the
//! covering filter, and the subdivision comparison all happen here. It is
//! *not* claimed that the model's homology equals the weighted homology of
//! the carrier for `L ≥ 2`; space-level answers route through `cwcalc`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaincore::{boundary, CanonGen, Chain, ChainError};
use crate::coeff::{Coeff, CoeffError, RingSpec, WeightVector};
use crate::cubeexpr::AffineCell;
use crate::homotopylab::{subdivide_chain, theta_sd_chain, HomotopyError};
use crate::modalg::{
    homology_from_matrices, kernel_basis, smith_normal_form, FGModulePresentation, IntMat,
    LatticeSolver, ModAlgError, RingMat,
};

/// Hard cap on generators produced by one closure, guarding untrusted input.
pub const MAX_GRID_GENERATORS: usize = 1 << 18;
/// Hard cap on the ambient dimension of a model.
pub const MAX_MODEL_DIM: usize = 8;
/// Hard cap on elementary pieces enumerated by the cover check.
const MAX_COVER_PIECES: usize = 1 << 18;

#[derive(Debug, thiserror::Error)]
pub enum GridError {
    #[error("bad model JSON: {0}")]
    BadJson(String),
    #[error("cell has {got} coordinates in a dimension-{expect} model")]
    DimMismatch { expect: usize, got: usize },
    #[error("extent entries must be 0 or 1")]
    BadExtent,
    #[error("the lattice parameter L must be positive")]
    ZeroL,
    #[error("model dimension {0} exceeds the supported maximum {MAX_MODEL_DIM}")]
    DimTooLarge(usize),
    #[error("a model needs at least one top cell")]
    EmptyModel,
    #[error("model too large: closure exceeded {MAX_GRID_GENERATORS} generators")]
    TooLarge,
    #[error("weight has L={got} but the model was closed at L={expect}")]
    WeightLength { expect: u32, got: u32 },
    #[error("generator lists are not closed: face {face} of {gen} is missing")]
    ClosureViolated { gen: String, face: String },
    #[error("not a subcomplex: {0}")]
    NotSubcomplex(String),
    #[error("cover box is malformed: {0}")]
    CoverShape(String),
    #[error("cover interiors leave the carrier uncovered near ({0})")]
    CoverGap(String),
    #[error("{0} requires integer coefficients")]
    WantIntegers(&'static str),
    #[error("subdivision comparison runs on L=1 models, got L={0}")]
    SdNeedsUnitL(u32),
    #[error("weights ({0}, {1}) have no common-divisor-free witness")]
    NotCoprime(i64, i64),
    #[error("unknown builtin model \"{0}\"")]
    UnknownModel(String),
    #[error("internal solver invariant broke: {0}")]
    Internal(String),
    #[error("coefficient error: {0}")]
    Coeff(#[from] CoeffError),
    #[error("chain error: {0}")]
    Chain(#[from] ChainError),
    #[error("homotopy error: {0}")]
    Homotopy(#[from] HomotopyError),
    #[error("linear algebra error: {0}")]
    Alg(#[from] ModAlgError),
}

// --- Generators -----------------------------------------------------------

/// One axis of a grid generator: either a free unit extent `[lo, lo+1]` or a
/// coordinate pinned at an exact rational height.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum GridAxis {
    Free { lo: BigInt },
    Fixed { at: BigRational },
}

/// A generator of the grid model: an axis-aligned affine cube, possibly
/// extended by `ghosts` trailing input slots it ignores. Generators whose
/// pinned heights coincide are equal outright — faces at height `0` or `L`
/// land on the classical corner values and need no special casing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GridGen {
    axes: Vec<GridAxis>,
    ghosts: usize,
}

impl GridGen {
    fn from_cell(cell: &TopCell) -> GridGen {
        let axes = cell
            .base
            .iter()
            .zip(&cell.extent)
            .map(|(&b, &e)| {
                if e == 0 {
                    GridAxis::Fixed {
                        at: BigRational::from_integer(BigInt::from(b)),
                    }
                } else {
                    GridAxis::Free {
                        lo: BigInt::from(b),
                    }
                }
            })
            .collect();
        GridGen { axes, ghosts: 0 }
    }

    pub fn ambient_dim(&self) -> usize {
        self.axes.len()
    }

    pub fn free_count(&self) -> usize {
        self.axes
            .iter()
            .filter(|a| matches!(a, GridAxis::Free { .. }))
            .count()
    }

    pub fn ghosts(&self) -> usize {
        self.ghosts
    }

    /// Input arity: free axes plus ignored trailing slots.
    pub fn degree(&self) -> usize {
        self.free_count() + self.ghosts
    }

    /// The generator with `extra` more ignored slots appended.
    pub fn with_ghosts(&self, extra: usize) -> GridGen {
        GridGen {
            axes: self.axes.clone(),
            ghosts: self.ghosts + extra,
        }
    }

    /// The closed image box, one `(lo, hi)` pair per ambient axis.
    pub fn carrier(&self) -> Vec<(BigRational, BigRational)> {
        self.axes
            .iter()
            .map(|a| match a {
                GridAxis::Free { lo } => {
                    let l = BigRational::from_integer(lo.clone());
                    let h = BigRational::from_integer(lo + 1);
                    (l, h)
                }
                GridAxis::Fixed { at } => (at.clone(), at.clone()),
            })
            .collect()
    }

    /// The face with input slot `j` (1-based) pinned at height `i/l`. Slots
    /// run over the free axes in ambient order, then the ignored slots; a
    /// pinned ignored slot just disappears (the map never read it).
    pub fn face(&self, l: u32, i: u32, j: usize) -> Result<GridGen, GridError> {
        let n = self.degree();
        if l == 0 {
            return Err(GridError::ZeroL);
        }
        if j == 0 || j > n {
            return Err(GridError::Chain(ChainError::FaceSlot { j, arity: n }));
        }
        if i > l {
            return Err(GridError::Chain(ChainError::FaceHeight { i, l }));
        }
        let free = self.free_count();
        if j > free {
            return Ok(GridGen {
                axes: self.axes.clone(),
                ghosts: self.ghosts - 1,
            });
        }
        let mut axes = self.axes.clone();
        let mut seen = 0usize;
        for axis in axes.iter_mut() {
            if let GridAxis::Free { lo } = axis {
                seen += 1;
                if seen == j {
                    let at = BigRational::from_integer(lo.clone())
                        + BigRational::new(BigInt::from(i), BigInt::from(l));
                    *axis = GridAxis::Fixed { at };
                    break;
                }
            }
        }
        Ok(GridGen {
            axes,
            ghosts: self.ghosts,
        })
    }

    /// The generator as a chain-level canonical generator: the diagonal
    /// affine cell for the axes, padded by the ignored slots.
    pub fn to_canon(&self) -> CanonGen {
        let mut start = Vec::with_capacity(self.axes.len());
        let mut deltas = Vec::with_capacity(self.axes.len());
        for axis in &self.axes {
            match axis {
                GridAxis::Free { lo } => {
                    start.push(BigRational::from_integer(lo.clone()));
                    deltas.push(BigRational::one());
                }
                GridAxis::Fixed { at } => {
                    start.push(at.clone());
                    deltas.push(BigRational::zero());
                }
            }
        }
        let cell = AffineCell { start, deltas };
        CanonGen::affine_cylinder(cell, self.degree())
            .expect("ghost count never drops the arity below the live slots")
    }
}

impl fmt::Display for GridGen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, axis) in self.axes.iter().enumerate() {
            if k > 0 {
                write!(f, "×")?;
            }
            match axis {
                GridAxis::Free { lo } => write!(f, "[{},{}]", lo, lo + 1)?,
                GridAxis::Fixed { at } => write!(f, "{{{}}}", at)?,
            }
        }
        if self.ghosts > 0 {
            write!(f, "·c^{}", self.ghosts)?;
        }
        Ok(())
    }
}

// --- Models ----------------------------------------------------------------

/// An elementary box: integer base corner plus 0/1 extent per axis.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TopCell {
    pub base: Vec<i64>,
    pub extent: Vec<u8>,
}

impl TopCell {
    pub fn new(base: Vec<i64>, extent: Vec<u8>) -> TopCell {
        TopCell { base, extent }
    }
}

/// A finite model: top cells plus their face closure at a fixed `L`,
/// organized by degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridModel {
    dim: usize,
    l: u32,
    top_cells: Vec<TopCell>,
    levels: Vec<Vec<GridGen>>,
}

/// Face closure of the top cells: start from the boxes as free-extent
/// generators and pin axes at every height `i/L` until nothing new appears.
/// The result is canonical (sorted, deduplicated) per degree, so it does not
/// depend on the order the cells were given in.
pub fn closure_generate(
    dim: usize,
    l: u32,
    top_cells: &[TopCell],
) -> Result<Vec<Vec<GridGen>>, GridError> {
    if l == 0 {
        return Err(GridError::ZeroL);
    }
    if dim > MAX_MODEL_DIM {
        return Err(GridError::DimTooLarge(dim));
    }
    if top_cells.is_empty() {
        return Err(GridError::EmptyModel);
    }
    for cell in top_cells {
        if cell.base.len() != dim {
            return Err(GridError::DimMismatch {
                expect: dim,
                got: cell.base.len(),
            });
        }
        if cell.extent.len() != dim {
            return Err(GridError::DimMismatch {
                expect: dim,
                got: cell.extent.len(),
            });
        }
        if cell.extent.iter().any(|&e| e > 1) {
            return Err(GridError::BadExtent);
        }
    }
    let mut seen: BTreeSet<GridGen> = BTreeSet::new();
    let mut work: Vec<GridGen> = Vec::new();
    for cell in top_cells {
        let g = GridGen::from_cell(cell);
        if seen.insert(g.clone()) {
            work.push(g);
        }
    }
    let mut max_degree = 0usize;
    while let Some(g) = work.pop() {
        max_degree = max_degree.max(g.degree());
        for j in 1..=g.degree() {
            for i in 0..=l {
                let f = g.face(l, i, j)?;
                if seen.insert(f.clone()) {
                    if seen.len() > MAX_GRID_GENERATORS {
                        return Err(GridError::TooLarge);
                    }
                    work.push(f);
                }
            }
        }
    }
    let mut levels: Vec<Vec<GridGen>> = vec![Vec::new(); max_degree + 1];
    for g in seen {
        levels[g.degree()].push(g);
    }
    Ok(levels)
}

/// Checks that every face of every listed generator is again listed one
/// degree lower.
pub fn validate_closed(l: u32, levels: &[Vec<GridGen>]) -> Result<(), GridError> {
    let sets: Vec<BTreeSet<&GridGen>> = levels
        .iter()
        .map(|lev| lev.iter().collect::<BTreeSet<_>>())
        .collect();
    for (n, level) in levels.iter().enumerate() {
        for g in level {
            if g.degree() != n {
                return Err(GridError::NotSubcomplex(format!(
                    "generator {} listed at degree {} has degree {}",
                    g,
                    n,
                    g.degree()
                )));
            }
            if n == 0 {
                continue;
            }
            for j in 1..=n {
                for i in 0..=l {
                    let f = g.face(l, i, j)?;
                    if !sets[n - 1].contains(&f) {
                        return Err(GridError::ClosureViolated {
                            gen: g.to_string(),
                            face: f.to_string(),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

/// The degree-`n` chain basis over ghost-free closure `levels`: every listed
/// generator of degree `k ≤ n`, padded by `n − k` ignored slots.
pub fn ghost_basis(levels: &[Vec<GridGen>], n: usize) -> Vec<GridGen> {
    let mut out = Vec::new();
    for (k, level) in levels.iter().enumerate() {
        if k > n {
            break;
        }
        for g in level {
            out.push(g.with_ghosts(n - k));
        }
    }
    out.sort();
    out
}

impl GridModel {
    pub fn new(dim: usize, l: u32, top_cells: Vec<TopCell>) -> Result<GridModel, GridError> {
        let mut cells = top_cells;
        cells.sort();
        cells.dedup();
        let levels = closure_generate(dim, l, &cells)?;
        Ok(GridModel {
            dim,
            l,
            top_cells: cells,
            levels,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn top_cells(&self) -> &[TopCell] {
        &self.top_cells
    }

    /// Ghost-free closure generators, by degree.
    pub fn levels(&self) -> &[Vec<GridGen>] {
        &self.levels
    }

    /// Highest degree carrying a ghost-free generator.
    pub fn top_degree(&self) -> usize {
        self.levels.len() - 1
    }

    /// The full degree-`n` chain basis, constant towers included.
    pub fn basis(&self, n: usize) -> Vec<GridGen> {
        ghost_basis(&self.levels, n)
    }

    pub fn contains(&self, g: &GridGen) -> bool {
        let bare = g.free_count();
        self.levels
            .get(bare)
            .map(|lev| {
                lev.binary_search_by(|h| {
                    h.cmp(&GridGen {
                        axes: g.axes.clone(),
                        ghosts: 0,
                    })
                })
                .is_ok()
            })
            .unwrap_or(false)
    }

    /// Boundary matrix into the degree-`n−1` basis, towers included.
    pub fn boundary_matrix(&self, n: usize, w: &WeightVector) -> Result<RingMat, GridError> {
        let cols = self.basis(n);
        let rows = if n == 0 { Vec::new() } else { self.basis(n - 1) };
        boundary_matrix_between(w, self.l, &cols, &rows)
    }

    /// Boundary matrix over the bare closure lists (no towers). Above the
    /// top cell dimension these complexes are zero.
    pub fn closure_boundary_matrix(&self, n: usize, w: &WeightVector) -> Result<RingMat, GridError> {
        let empty: Vec<GridGen> = Vec::new();
        let cols = self.levels.get(n).unwrap_or(&empty);
        let rows = if n == 0 {
            &empty
        } else {
            self.levels.get(n - 1).unwrap_or(&empty)
        };
        boundary_matrix_between(w, self.l, cols, rows)
    }
}

// --- Boundary matrices ------------------------------------------------------

fn check_weight(l: u32, w: &WeightVector) -> Result<(), GridError> {
    if w.l() != l {
        return Err(GridError::WeightLength {
            expect: l,
            got: w.l(),
        });
    }
    Ok(())
}

/// One boundary column: accumulated coefficients of the faces of `g`,
/// `(−1)^{j+1}` per slot and the weight entry per height. Pinning an ignored
/// slot leaves the map unchanged, so those faces arrive with the weight sum.
fn boundary_column(
    g: &GridGen,
    w: &WeightVector,
    l: u32,
    row_index: &BTreeMap<GridGen, usize>,
) -> Result<BTreeMap<usize, Coeff>, GridError> {
    let ring = w.ring();
    let mut out: BTreeMap<usize, Coeff> = BTreeMap::new();
    let n = g.degree();
    let free = g.free_count();
    let put = |out: &mut BTreeMap<usize, Coeff>, face: GridGen, c: Coeff| {
        let row = *row_index
            .get(&face)
            .ok_or_else(|| GridError::ClosureViolated {
                gen: g.to_string(),
                face: face.to_string(),
            })?;
        let entry = out.entry(row).or_insert_with(|| ring.zero());
        *entry = ring.add(entry, &c);
        Ok::<(), GridError>(())
    };
    for j in 1..=n {
        let sign_plus = j % 2 == 1;
        if j <= free {
            for (i, m) in w.entries().iter().enumerate() {
                if ring.is_zero(m) {
                    continue;
                }
                let face = g.face(l, i as u32, j)?;
                let c = if sign_plus { m.clone() } else { ring.neg(m) };
                put(&mut out, face, c)?;
            }
        } else {
            let total = w.index();
            if !ring.is_zero(&total) {
                let face = g.face(l, 0, j)?;
                let c = if sign_plus { total } else { ring.neg(&total) };
                put(&mut out, face, c)?;
            }
        }
    }
    out.retain(|_, c| !ring.is_zero(c));
    Ok(out)
}

/// The boundary matrix from the `cols` basis into the `rows` basis. Errors
/// if a face with nonzero accumulated coefficient is missing from `rows`.
pub fn boundary_matrix_between(
    w: &WeightVector,
    l: u32,
    cols: &[GridGen],
    rows: &[GridGen],
) -> Result<RingMat, GridError> {
    check_weight(l, w)?;
    let ring = w.ring();
    let row_index: BTreeMap<GridGen, usize> = rows
        .iter()
        .enumerate()
        .map(|(i, g)| (g.clone(), i))
        .collect();
    let columns: Vec<Result<BTreeMap<usize, Coeff>, GridError>> = cols
        .par_iter()
        .map(|g| boundary_column(g, w, l, &row_index))
        .collect();
    let mut mat = RingMat::zero(ring.clone(), rows.len(), cols.len());
    for (j, col) in columns.into_iter().enumerate() {
        for (i, c) in col? {
            mat.set(i, j, c);
        }
    }
    Ok(mat)
}

/// Per-degree bases and boundary matrices of a model, towers included.
#[derive(Debug, Clone)]
pub struct BoundaryMatrices {
    pub ring: RingSpec,
    pub bases: Vec<Vec<GridGen>>,
    /// `mats[n]` maps the degree-`n` basis into degree `n−1`; `mats[0]` has
    /// no rows.
    pub mats: Vec<RingMat>,
}

impl BoundaryMatrices {
    /// Exact check that consecutive matrices compose to zero.
    pub fn verify(&self) -> Result<(), GridError> {
        let ring = &self.ring;
        for n in 0..self.mats.len().saturating_sub(1) {
            let a = &self.mats[n];
            let b = &self.mats[n + 1];
            for i in 0..a.rows {
                for k in 0..b.cols {
                    let mut acc = ring.zero();
                    for j in 0..a.cols {
                        let prod = ring.mul(a.get(i, j), b.get(j, k));
                        acc = ring.add(&acc, &prod);
                    }
                    if !ring.is_zero(&acc) {
                        return Err(GridError::Alg(ModAlgError::CompositionNonzero(i, k)));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Assembles bases and boundary matrices for degrees `0..=max_n`.
pub fn assemble_boundaries(
    model: &GridModel,
    w: &WeightVector,
    max_n: usize,
) -> Result<BoundaryMatrices, GridError> {
    check_weight(model.l, w)?;
    let bases: Vec<Vec<GridGen>> = (0..=max_n).map(|n| model.basis(n)).collect();
    let mut mats = Vec::with_capacity(max_n + 1);
    for n in 0..=max_n {
        let empty: Vec<GridGen> = Vec::new();
        let rows = if n == 0 { &empty } else { &bases[n - 1] };
        mats.push(boundary_matrix_between(w, model.l, &bases[n], rows)?);
    }
    Ok(BoundaryMatrices {
        ring: w.ring().clone(),
        bases,
        mats,
    })
}

/// Homology of the model in degrees `0..=max_n`, towers included.
pub fn homology_range(
    model: &GridModel,
    w: &WeightVector,
    max_n: usize,
) -> Result<Vec<FGModulePresentation>, GridError> {
    let b = assemble_boundaries(model, w, max_n + 1)?;
    let mut out = Vec::with_capacity(max_n + 1);
    for n in 0..=max_n {
        out.push(homology_from_matrices(w.ring(), &b.mats[n], &b.mats[n + 1])?);
    }
    Ok(out)
}

/// Homology of the bare closure complex (no towers) in degrees `0..=max_n`.
/// For weights summing to zero at `L = 1` this is the classical finite
/// cubical complex of the carrier.
pub fn closure_homology_range(
    model: &GridModel,
    w: &WeightVector,
    max_n: usize,
) -> Result<Vec<FGModulePresentation>, GridError> {
    let mut mats = Vec::with_capacity(max_n + 2);
    for n in 0..=max_n + 1 {
        mats.push(model.closure_boundary_matrix(n, w)?);
    }
    let mut out = Vec::with_capacity(max_n + 1);
    for n in 0..=max_n {
        out.push(homology_from_matrices(w.ring(), &mats[n], &mats[n + 1])?);
    }
    Ok(out)
}

// --- Pairs and the long exact sequence --------------------------------------

/// Relative bases (complement of the sub-model) and boundary matrices of the
/// quotient complex.
#[derive(Debug, Clone)]
pub struct PairMatrices {
    pub ring: RingSpec,
    pub rel_bases: Vec<Vec<GridGen>>,
    pub mats: Vec<RingMat>,
}

fn check_pair(x: &GridModel, a: &GridModel) -> Result<(), GridError> {
    if x.dim != a.dim {
        return Err(GridError::NotSubcomplex(format!(
            "sub-model dimension {} differs from {}",
            a.dim, x.dim
        )));
    }
    if x.l != a.l {
        return Err(GridError::NotSubcomplex(format!(
            "sub-model closed at L={} but the model at L={}",
            a.l, x.l
        )));
    }
    for level in &a.levels {
        for g in level {
            if !x.contains(g) {
                return Err(GridError::NotSubcomplex(format!(
                    "sub-model generator {} is not in the model",
                    g
                )));
            }
        }
    }
    Ok(())
}

/// Boundary matrices of the quotient complex `C(X)/C(A)` in the complement
/// basis, for degrees `0..=max_n`.
pub fn pair_matrices(
    x: &GridModel,
    a: Option<&GridModel>,
    w: &WeightVector,
    max_n: usize,
) -> Result<PairMatrices, GridError> {
    check_weight(x.l, w)?;
    if let Some(a) = a {
        check_pair(x, a)?;
    }
    let ring = w.ring().clone();
    let in_sub = |g: &GridGen| a.map(|a| a.contains(g)).unwrap_or(false);
    let rel_bases: Vec<Vec<GridGen>> = (0..=max_n)
        .map(|n| x.basis(n).into_iter().filter(|g| !in_sub(g)).collect())
        .collect();
    let mut mats = Vec::with_capacity(max_n + 1);
    for n in 0..=max_n {
        let cols = &rel_bases[n];
        let empty: Vec<GridGen> = Vec::new();
        let rows = if n == 0 { &empty } else { &rel_bases[n - 1] };
        let row_index: BTreeMap<GridGen, usize> = rows
            .iter()
            .enumerate()
            .map(|(i, g)| (g.clone(), i))
            .collect();
        let mut mat = RingMat::zero(ring.clone(), rows.len(), cols.len());
        for (j, g) in cols.iter().enumerate() {
            for term in boundary_terms(g, w, x.l)? {
                let (face, c) = term;
                if in_sub(&face) {
                    continue;
                }
                let i = *row_index
                    .get(&face)
                    .ok_or_else(|| GridError::ClosureViolated {
                        gen: g.to_string(),
                        face: face.to_string(),
                    })?;
                let acc = ring.add(mat.get(i, j), &c);
                mat.set(i, j, acc);
            }
        }
        mats.push(mat);
    }
    Ok(PairMatrices {
        ring,
        rel_bases,
        mats,
    })
}

/// All boundary faces of `g` with accumulated nonzero coefficients.
pub fn boundary_terms(
    g: &GridGen,
    w: &WeightVector,
    l: u32,
) -> Result<Vec<(GridGen, Coeff)>, GridError> {
    let ring = w.ring();
    let mut acc: BTreeMap<GridGen, Coeff> = BTreeMap::new();
    let n = g.degree();
    let free = g.free_count();
    for j in 1..=n {
        let sign_plus = j % 2 == 1;
        if j <= free {
            for (i, m) in w.entries().iter().enumerate() {
                if ring.is_zero(m) {
                    continue;
                }
                let face = g.face(l, i as u32, j)?;
                let c = if sign_plus { m.clone() } else { ring.neg(m) };
                let entry = acc.entry(face).or_insert_with(|| ring.zero());
                *entry = ring.add(entry, &c);
            }
        } else {
            let total = w.index();
            if ring.is_zero(&total) {
                continue;
            }
            let face = g.face(l, 0, j)?;
            let c = if sign_plus { total } else { ring.neg(&total) };
            let entry = acc.entry(face).or_insert_with(|| ring.zero());
            *entry = ring.add(entry, &c);
        }
    }
    Ok(acc
        .into_iter()
        .filter(|(_, c)| !ring.is_zero(c))
        .collect())
}

/// Exactness report for the pair sequence
/// `… → H_n(A) → H_n(X) → H_n(X,A) → H_{n−1}(A) → …`.
#[derive(Debug, Clone)]
pub struct LesReport {
    pub max_degree: usize,
    pub sub: Vec<FGModulePresentation>,
    pub space: Vec<FGModulePresentation>,
    pub pair: Vec<FGModulePresentation>,
    /// Whether the connecting map out of relative degree `n` is nonzero.
    pub connecting_nonzero: Vec<bool>,
    pub exact: bool,
    pub failures: Vec<String>,
}

struct HomologyData {
    /// Saturated cycle basis, one column per cycle generator.
    kernel: IntMat,
    /// Boundary image written in kernel coordinates.
    rels: IntMat,
    solver_kernel: LatticeSolver,
    pres: FGModulePresentation,
}

fn homology_data(d_n: &IntMat, d_np1: &IntMat) -> Result<HomologyData, GridError> {
    let kernel = kernel_basis(d_n);
    let solver_kernel = LatticeSolver::new(&kernel);
    let mut rels = IntMat::zero(kernel.cols(), d_np1.cols());
    for j in 0..d_np1.cols() {
        let y = solver_kernel.solve(&d_np1.column(j)).ok_or_else(|| {
            GridError::Internal("a boundary column escaped the cycle lattice".into())
        })?;
        for (i, v) in y.into_iter().enumerate() {
            rels.set(i, j, v);
        }
    }
    let pres = coker_presentation(&rels, kernel.cols());
    Ok(HomologyData {
        kernel,
        rels,
        solver_kernel,
        pres,
    })
}

fn coker_presentation(rels: &IntMat, rank: usize) -> FGModulePresentation {
    let s = smith_normal_form(rels);
    let mut orders: Vec<BigInt> = s.diagonal().into_iter().filter(|d| !d.is_zero()).collect();
    orders.extend(std::iter::repeat(BigInt::zero()).take(rank - orders.len()));
    FGModulePresentation::from_cyclic_orders(RingSpec::Integers, &orders)
}

fn neg_mat(m: &IntMat) -> IntMat {
    let mut out = IntMat::zero(m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out.set(i, j, -m.get(i, j).clone());
        }
    }
    out
}

/// Generators of `{x : G·x ∈ lattice(rels)}`: the x-block projection of the
/// kernel of `[G | −rels]`.
fn kernel_modulo(g: &IntMat, rels: &IntMat) -> IntMat {
    let stacked = g.hconcat(&neg_mat(rels));
    let k = kernel_basis(&stacked);
    let mut out = IntMat::zero(g.cols(), k.cols());
    for i in 0..g.cols() {
        for j in 0..k.cols() {
            out.set(i, j, k.get(i, j).clone());
        }
    }
    out
}

/// Does every column of `a` lie in the column lattice of `b`?
fn lattice_subset(a: &IntMat, b: &IntMat) -> bool {
    let solver = LatticeSolver::new(b);
    (0..a.cols()).all(|j| solver.solve(&a.column(j)).is_some())
}

fn lattice_equal(a: &IntMat, b: &IntMat) -> bool {
    lattice_subset(a, b) && lattice_subset(b, a)
}

/// Expresses the columns of `mapped` (chain coordinates of the target) in
/// the target's kernel coordinates.
fn express_in_kernel(mapped: &IntMat, target: &HomologyData) -> Result<IntMat, GridError> {
    let mut out = IntMat::zero(target.kernel.cols(), mapped.cols());
    for j in 0..mapped.cols() {
        let y = target.solver_kernel.solve(&mapped.column(j)).ok_or_else(|| {
            GridError::Internal("a mapped cycle escaped the target cycle lattice".into())
        })?;
        for (i, v) in y.into_iter().enumerate() {
            out.set(i, j, v);
        }
    }
    Ok(out)
}

fn index_of(basis: &[GridGen]) -> BTreeMap<GridGen, usize> {
    basis
        .iter()
        .enumerate()
        .map(|(i, g)| (g.clone(), i))
        .collect()
}

/// Computes the three homology columns of the pair, the connecting maps, and
/// checks image = kernel at every slot of the sequence through
/// `max_degree`. Integer coefficients only.
pub fn connecting_and_les_check(
    x: &GridModel,
    a: Option<&GridModel>,
    w: &WeightVector,
    max_degree: usize,
) -> Result<LesReport, GridError> {
    if !matches!(w.ring(), RingSpec::Integers) {
        return Err(GridError::WantIntegers("the long-exact-sequence check"));
    }
    check_weight(x.l, w)?;
    if let Some(a) = a {
        check_pair(x, a)?;
    }
    let top = max_degree + 1;

    // Chain-level data for X, A, and the quotient.
    let bx = assemble_boundaries(x, w, top)?;
    let x_mats: Vec<IntMat> = bx.mats.iter().map(|m| m.to_int()).collect::<Result<_, _>>()?;
    let (a_bases, a_mats): (Vec<Vec<GridGen>>, Vec<IntMat>) = match a {
        Some(a) => {
            let ba = assemble_boundaries(a, w, top)?;
            let mats: Vec<IntMat> = ba.mats.iter().map(|m| m.to_int()).collect::<Result<_, _>>()?;
            (ba.bases, mats)
        }
        None => (
            vec![Vec::new(); top + 1],
            (0..=top).map(|_| IntMat::zero(0, 0)).collect(),
        ),
    };
    let rel = pair_matrices(x, a, w, top)?;
    let rel_mats: Vec<IntMat> = rel.mats.iter().map(|m| m.to_int()).collect::<Result<_, _>>()?;

    // Homology with cycle bases per degree. Beyond the top assembled degree
    // the incoming boundary is unknown, so homology stops at max_degree; the
    // degree-(top) cycle lattices still feed image computations.
    let mut hx = Vec::new();
    let mut ha = Vec::new();
    let mut hrel = Vec::new();
    for n in 0..=max_degree {
        hx.push(homology_data(&x_mats[n], &x_mats[n + 1])?);
        ha.push(homology_data(&a_mats[n], &a_mats[n + 1])?);
        hrel.push(homology_data(&rel_mats[n], &rel_mats[n + 1])?);
    }
    let kernel_rel_top = kernel_basis(&rel_mats[top]);

    // Chain maps per degree: inclusion and projection as 0/1 matrices.
    let mut incl = Vec::new();
    let mut proj = Vec::new();
    for n in 0..=max_degree {
        let xb = &bx.bases[n];
        let xi = index_of(xb);
        let mut inc = IntMat::zero(xb.len(), a_bases[n].len());
        for (j, g) in a_bases[n].iter().enumerate() {
            let i = *xi
                .get(g)
                .ok_or_else(|| GridError::Internal("sub-model basis escaped the model".into()))?;
            inc.set(i, j, BigInt::one());
        }
        let ri = index_of(&rel.rel_bases[n]);
        let mut pr = IntMat::zero(rel.rel_bases[n].len(), xb.len());
        for (j, g) in xb.iter().enumerate() {
            if let Some(&i) = ri.get(g) {
                pr.set(i, j, BigInt::one());
            }
        }
        incl.push(inc);
        proj.push(pr);
    }

    // Connecting map on cycle bases: lift a relative cycle to the model,
    // take its boundary, land in the sub-model, read off in its cycle basis.
    let connecting = |n: usize,
                      rel_kernel: &IntMat,
                      target: &HomologyData|
     -> Result<IntMat, GridError> {
        if n == 0 {
            return Ok(IntMat::zero(target.kernel.cols(), rel_kernel.cols()));
        }
        let rel_basis = &rel.rel_bases[n];
        let x_basis = &bx.bases[n];
        let xi = index_of(x_basis);
        // Lift: relative coordinates injected into the model's basis.
        let mut lift = IntMat::zero(x_basis.len(), rel_kernel.cols());
        for (r, g) in rel_basis.iter().enumerate() {
            let i = *xi
                .get(g)
                .ok_or_else(|| GridError::Internal("relative basis escaped the model".into()))?;
            for j in 0..rel_kernel.cols() {
                lift.set(i, j, rel_kernel.get(r, j).clone());
            }
        }
        let bd = x_mats[n].mul(&lift);
        // Restrict to the sub-model block; everything else must vanish.
        let prev_a = index_of(&a_bases[n - 1]);
        let prev_x = if n == 0 { Vec::new() } else { bx.bases[n - 1].clone() };
        let mut restricted = IntMat::zero(a_bases[n - 1].len(), bd.cols());
        for (i, g) in prev_x.iter().enumerate() {
            match prev_a.get(g) {
                Some(&ai) => {
                    for j in 0..bd.cols() {
                        restricted.set(ai, j, bd.get(i, j).clone());
                    }
                }
                None => {
                    for j in 0..bd.cols() {
                        if !bd.get(i, j).is_zero() {
                            return Err(GridError::Internal(
                                "a relative cycle's boundary escaped the sub-model".into(),
                            ));
                        }
                    }
                }
            }
        }
        express_in_kernel(&restricted, target)
    };

    let mut failures = Vec::new();
    let mut connecting_nonzero = vec![false; max_degree + 1];

    // Induced maps in kernel coordinates per degree.
    let mut i_star = Vec::new();
    let mut j_star = Vec::new();
    let mut k_star = Vec::new();
    for n in 0..=max_degree {
        let ik = express_in_kernel(&incl[n].mul(&ha[n].kernel), &hx[n])?;
        let jk = express_in_kernel(&proj[n].mul(&hx[n].kernel), &hrel[n])?;
        let kk = if n == 0 {
            IntMat::zero(0, hrel[0].kernel.cols())
        } else {
            connecting(n, &hrel[n].kernel, &ha[n - 1])?
        };
        i_star.push(ik);
        j_star.push(jk);
        k_star.push(kk);
    }

    for n in 0..=max_degree {
        // Slot H_n(X): image of the inclusion equals the kernel of the
        // projection.
        let im = i_star[n].hconcat(&hx[n].rels);
        let ker = kernel_modulo(&j_star[n], &hrel[n].rels);
        if !lattice_equal(&im, &ker) {
            failures.push(format!("image ≠ kernel at H_{}(X)", n));
        }
        // Slot H_n(X, A): image of the projection equals the kernel of the
        // connecting map (everything, for n = 0).
        let im = j_star[n].hconcat(&hrel[n].rels);
        let ker = if n == 0 {
            IntMat::identity(hrel[0].kernel.cols())
        } else {
            kernel_modulo(&k_star[n], &ha[n - 1].rels)
        };
        if !lattice_equal(&im, &ker) {
            failures.push(format!("image ≠ kernel at H_{}(X, A)", n));
        }
        // Slot H_n(A): image of the connecting map from degree n+1 equals
        // the kernel of the inclusion.
        let kk_above = if n + 1 <= max_degree {
            k_star[n + 1].clone()
        } else {
            connecting(top, &kernel_rel_top, &ha[n])?
        };
        let im = kk_above.hconcat(&ha[n].rels);
        let ker = kernel_modulo(&i_star[n], &hx[n].rels);
        if !lattice_equal(&im, &ker) {
            failures.push(format!("image ≠ kernel at H_{}(A)", n));
        }
        if n > 0 {
            // Nonzero connecting map: some column escapes the boundary
            // relations of the target.
            let solver = LatticeSolver::new(&ha[n - 1].rels);
            connecting_nonzero[n] = (0..k_star[n].cols())
                .any(|j| solver.solve(&k_star[n].column(j)).is_none());
        }
    }

    Ok(LesReport {
        max_degree,
        sub: ha.into_iter().map(|h| h.pres).collect(),
        space: hx.into_iter().map(|h| h.pres).collect(),
        pair: hrel.into_iter().map(|h| h.pres).collect(),
        exact: failures.is_empty(),
        connecting_nonzero,
        failures,
    })
}

// --- Covering filter ---------------------------------------------------------

/// A closed rational box, one `(lo, hi)` pair per ambient axis.
pub type RatBox = Vec<(BigRational, BigRational)>;

fn box_contains_box(outer: &RatBox, inner: &RatBox) -> bool {
    outer
        .iter()
        .zip(inner)
        .all(|((olo, ohi), (ilo, ihi))| olo <= ilo && ihi <= ohi)
}

/// Is the box of `inner` inside some cover element?
pub fn covered_by(inner: &RatBox, cover: &[RatBox]) -> bool {
    cover.iter().any(|b| box_contains_box(b, inner))
}

/// The exact image bounding box of a chain generator, from its values on the
/// cube corners. Exact for the componentwise-affine generators produced by
/// grid models and subdivision.
pub fn gen_bbox(g: &CanonGen) -> Result<RatBox, GridError> {
    let n = g.arity();
    if n > 20 {
        return Err(GridError::DimTooLarge(n));
    }
    let mut bbox: Option<RatBox> = None;
    for mask in 0u32..(1u32 << n) {
        let corner: Vec<BigRational> = (0..n)
            .map(|t| {
                if mask >> t & 1 == 1 {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            })
            .collect();
        let value = g.eval(&corner)?;
        match &mut bbox {
            None => bbox = Some(value.into_iter().map(|v| (v.clone(), v)).collect()),
            Some(bb) => {
                for (slot, v) in value.into_iter().enumerate() {
                    if v < bb[slot].0 {
                        bb[slot].0 = v.clone();
                    }
                    if v > bb[slot].1 {
                        bb[slot].1 = v;
                    }
                }
            }
        }
    }
    Ok(bbox.expect("a map has at least one corner"))
}

/// One axis item of the cover sweep: a breakpoint or the open gap above it.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Piece {
    Point(usize),
    Gap(usize),
}

/// Verifies that the cover's interiors (relative to the carrier) cover the
/// union of top-cell boxes. Exact sweep over the elementary pieces cut by
/// every breakpoint: a point is interior-covered by a box iff the box
/// swallows the point's whole neighborhood within the carrier.
fn check_cover(model: &GridModel, cover: &[RatBox]) -> Result<(), GridError> {
    for (bi, b) in cover.iter().enumerate() {
        if b.len() != model.dim {
            return Err(GridError::CoverShape(format!(
                "box {} has {} axes, the model has {}",
                bi,
                b.len(),
                model.dim
            )));
        }
        if b.iter().any(|(lo, hi)| lo > hi) {
            return Err(GridError::CoverShape(format!("box {} is empty", bi)));
        }
    }
    let cells: Vec<RatBox> = model
        .top_cells
        .iter()
        .map(|c| {
            c.base
                .iter()
                .zip(&c.extent)
                .map(|(&b, &e)| {
                    let lo = BigRational::from_integer(BigInt::from(b));
                    let hi = BigRational::from_integer(BigInt::from(b) + e);
                    (lo, hi)
                })
                .collect()
        })
        .collect();
    let mut breaks: Vec<Vec<BigRational>> = vec![Vec::new(); model.dim];
    for b in cover.iter().chain(&cells) {
        for (axis, (lo, hi)) in b.iter().enumerate() {
            breaks[axis].push(lo.clone());
            breaks[axis].push(hi.clone());
        }
    }
    for axis in &mut breaks {
        axis.sort();
        axis.dedup();
    }
    let mut total: usize = 1;
    for axis in &breaks {
        total = total.saturating_mul(2 * axis.len() - 1);
        if total > MAX_COVER_PIECES {
            return Err(GridError::TooLarge);
        }
    }

    let piece_box = |piece: &[Piece]| -> RatBox {
        piece
            .iter()
            .enumerate()
            .map(|(axis, p)| match p {
                Piece::Point(t) => (breaks[axis][*t].clone(), breaks[axis][*t].clone()),
                Piece::Gap(t) => (breaks[axis][*t].clone(), breaks[axis][*t + 1].clone()),
            })
            .collect()
    };
    let in_carrier = |piece: &[Piece]| -> bool {
        let bb = piece_box(piece);
        cells.iter().any(|c| box_contains_box(c, &bb))
    };

    // Enumerate pieces by mixed radix over per-axis items.
    let radices: Vec<usize> = breaks.iter().map(|b| 2 * b.len() - 1).collect();
    let decode = |mut code: usize| -> Vec<Piece> {
        radices
            .iter()
            .map(|&r| {
                let d = code % r;
                code /= r;
                if d % 2 == 0 {
                    Piece::Point(d / 2)
                } else {
                    Piece::Gap(d / 2)
                }
            })
            .collect()
    };

    for code in 0..total {
        let piece = decode(code);
        if !in_carrier(&piece) {
            continue;
        }
        // The star: per axis, the piece itself plus (for points) both gaps
        // around it. A cover box swallows the neighborhood iff it contains
        // every in-carrier star piece.
        let star_options: Vec<Vec<Piece>> = piece
            .iter()
            .enumerate()
            .map(|(axis, p)| match p {
                Piece::Gap(t) => vec![Piece::Gap(*t)],
                Piece::Point(t) => {
                    let mut v = vec![Piece::Point(*t)];
                    if *t > 0 {
                        v.push(Piece::Gap(*t - 1));
                    }
                    if *t + 1 < breaks[axis].len() {
                        v.push(Piece::Gap(*t));
                    }
                    v
                }
            })
            .collect();
        let mut star: Vec<Vec<Piece>> = vec![Vec::new()];
        for options in &star_options {
            let mut next = Vec::with_capacity(star.len() * options.len());
            for stem in &star {
                for o in options {
                    let mut s = stem.clone();
                    s.push(*o);
                    next.push(s);
                }
            }
            star = next;
        }
        let star_boxes: Vec<RatBox> = star
            .into_iter()
            .filter(|q| in_carrier(q))
            .map(|q| piece_box(&q))
            .collect();
        let covered = cover
            .iter()
            .any(|b| star_boxes.iter().all(|q| box_contains_box(b, q)));
        if !covered {
            let witness: Vec<String> = piece_box(&piece)
                .iter()
                .map(|(lo, hi)| {
                    let mid = (lo + hi) / BigRational::from_integer(BigInt::from(2));
                    mid.to_string()
                })
                .collect();
            return Err(GridError::CoverGap(witness.join(", ")));
        }
    }
    Ok(())
}

/// Keeps the closure generators whose carrier box fits inside some cover
/// element, after verifying the cover's relative interiors cover the
/// carrier. The result is closed under faces (faces shrink carriers).
pub fn u_small_filter(
    model: &GridModel,
    cover: &[RatBox],
) -> Result<Vec<Vec<GridGen>>, GridError> {
    check_cover(model, cover)?;
    let filtered: Vec<Vec<GridGen>> = model
        .levels
        .iter()
        .map(|level| {
            level
                .iter()
                .filter(|g| covered_by(&g.carrier(), cover))
                .cloned()
                .collect()
        })
        .collect();
    debug_assert!(validate_closed(model.l, &filtered).is_ok());
    Ok(filtered)
}

// --- Subdivision comparison ----------------------------------------------------

/// Per-degree outcome of the subdivision comparison.
#[derive(Debug, Clone)]
pub struct SdDegreeReport {
    pub degree: usize,
    /// Cycle generators tested (a saturated basis of the cycle lattice).
    pub cycles: usize,
    /// How many passed the boundary-image membership test.
    pub witnessed: usize,
}

#[derive(Debug, Clone)]
pub struct SdComparisonReport {
    pub a: i64,
    pub b: i64,
    pub degrees: Vec<SdDegreeReport>,
    pub verified: bool,
}

fn coeff_to_int(c: &Coeff) -> Result<BigInt, GridError> {
    match c {
        Coeff::Int(z) => Ok(z.clone()),
        Coeff::Rat(_) => Err(GridError::WantIntegers("the subdivision comparison")),
    }
}

/// Matrix-level subdivision comparison for weights `(a, b)` on an `L = 1`
/// model: for every cycle `u` of the model, `a·S(u) − b·u` must lie in the
/// boundary image of the complex enlarged by the comparison prisms over `u`.
/// Membership is decided exactly via the Smith form of the assembled column
/// lattice.
pub fn sd_comparison_check(
    model: &GridModel,
    a: i64,
    b: i64,
    max_degree: usize,
) -> Result<SdComparisonReport, GridError> {
    if model.l != 1 {
        return Err(GridError::SdNeedsUnitL(model.l));
    }
    let ring = RingSpec::Integers;
    let ca = ring.from_i64(a);
    let cb = ring.from_i64(b);
    if crate::coeff::ncd_witness(&ring, &ca, &cb, 1).is_none() {
        return Err(GridError::NotCoprime(a, b));
    }
    let w = WeightVector::from_i64s(ring.clone(), &[a, b])?;

    let mut degrees = Vec::new();
    for n in 0..=max_degree {
        let basis_n = model.basis(n);
        let basis_up = model.basis(n + 1);
        let d_n = boundary_matrix_between(&w, 1, &basis_n, &model.basis_below(n))?.to_int()?;
        let cycles = kernel_basis(&d_n);

        let mut witnessed = 0usize;
        for c in 0..cycles.cols() {
            // The cycle as a chain of canonical generators.
            let mut u = Chain::zero(ring.clone(), n);
            for (r, g) in basis_n.iter().enumerate() {
                let v = cycles.get(r, c);
                if v.is_zero() {
                    continue;
                }
                u.add_term(g.to_canon(), Coeff::Int(v.clone()))?;
            }
            let sd_u = subdivide_chain(&u)?;
            let target = sd_u.scale(&ca).sub(&u.scale(&cb))?;

            // Boundary columns: the model's own degree-(n+1) generators plus
            // the comparison prism over the cycle.
            let mut columns: Vec<Chain> = Vec::with_capacity(basis_up.len() + 1);
            for g in &basis_up {
                columns.push(boundary(&Chain::generator(ring.clone(), g.to_canon()), &w)?);
            }
            columns.push(boundary(&theta_sd_chain(&u, false)?, &w)?);

            let mut keys: BTreeSet<CanonGen> = BTreeSet::new();
            for (g, _) in target.iter() {
                keys.insert(g.clone());
            }
            for col in &columns {
                for (g, _) in col.iter() {
                    keys.insert(g.clone());
                }
            }
            let key_index: BTreeMap<&CanonGen, usize> =
                keys.iter().enumerate().map(|(i, g)| (g, i)).collect();
            let mut mat = IntMat::zero(keys.len(), columns.len());
            for (j, col) in columns.iter().enumerate() {
                for (g, coeff) in col.iter() {
                    mat.set(key_index[g], j, coeff_to_int(coeff)?);
                }
            }
            let mut rhs = vec![BigInt::zero(); keys.len()];
            for (g, coeff) in target.iter() {
                rhs[key_index[g]] = coeff_to_int(coeff)?;
            }
            if LatticeSolver::new(&mat).solve(&rhs).is_some() {
                witnessed += 1;
            }
        }
        degrees.push(SdDegreeReport {
            degree: n,
            cycles: cycles.cols(),
            witnessed,
        });
    }
    let verified = degrees.iter().all(|d| d.cycles == d.witnessed);
    Ok(SdComparisonReport {
        a,
        b,
        degrees,
        verified,
    })
}

impl GridModel {
    fn basis_below(&self, n: usize) -> Vec<GridGen> {
        if n == 0 {
            Vec::new()
        } else {
            self.basis(n - 1)
        }
    }
}

// --- JSON and builtins ---------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ModelJson {
    dim: usize,
    #[serde(rename = "L")]
    l: u32,
    top_cells: Vec<TopCell>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    subcomplex: Option<Vec<TopCell>>,
}

/// A model together with an optional sub-model.
#[derive(Debug, Clone)]
pub struct ModelPair {
    pub space: GridModel,
    pub sub: Option<GridModel>,
}

/// Parses `{"dim", "L", "top_cells", "subcomplex"?}` and closes both levels.
pub fn parse_model(json: &str) -> Result<ModelPair, GridError> {
    let spec: ModelJson = serde_json::from_str(json).map_err(|e| GridError::BadJson(e.to_string()))?;
    let space = GridModel::new(spec.dim, spec.l, spec.top_cells)?;
    let sub = match spec.subcomplex {
        None => None,
        Some(cells) => {
            let a = GridModel::new(spec.dim, spec.l, cells)?;
            check_pair(&space, &a)?;
            Some(a)
        }
    };
    Ok(ModelPair { space, sub })
}

pub fn model_to_json(model: &GridModel, sub: Option<&GridModel>) -> String {
    let spec = ModelJson {
        dim: model.dim,
        l: model.l,
        top_cells: model.top_cells.clone(),
        subcomplex: sub.map(|a| a.top_cells.clone()),
    };
    serde_json::to_string_pretty(&spec).expect("model serialization cannot fail")
}

/// The boundary squares of the solid `[0,3]² × [0,1]` with the center column
/// removed: a 32-square torus surface.
fn torus_cells() -> Vec<TopCell> {
    let mut face_count: BTreeMap<TopCell, usize> = BTreeMap::new();
    for cx in 0..3i64 {
        for cy in 0..3i64 {
            if (cx, cy) == (1, 1) {
                continue;
            }
            let base = [cx, cy, 0i64];
            for axis in 0..3 {
                for side in 0..2i64 {
                    let mut fb = base;
                    fb[axis] += side;
                    let mut extent = [1u8, 1, 1];
                    extent[axis] = 0;
                    let cell = TopCell::new(fb.to_vec(), extent.to_vec());
                    *face_count.entry(cell).or_insert(0) += 1;
                }
            }
        }
    }
    face_count
        .into_iter()
        .filter(|(_, k)| *k == 1)
        .map(|(c, _)| c)
        .collect()
}

/// Built-in models: `point`, `interval`, `s1` (boundary of a square), `s2`
/// (boundary of a cube), `t2` (32-square torus surface), and `d2-pair`
/// (filled square with its boundary as the sub-model).
pub fn builtin_model(name: &str, l: u32) -> Result<ModelPair, GridError> {
    let pair = |cells: Vec<TopCell>, dim: usize, sub: Option<Vec<TopCell>>| -> Result<ModelPair, GridError> {
        let space = GridModel::new(dim, l, cells)?;
        let sub = match sub {
            None => None,
            Some(cells) => {
                let a = GridModel::new(dim, l, cells)?;
                check_pair(&space, &a)?;
                Some(a)
            }
        };
        Ok(ModelPair { space, sub })
    };
    let square_boundary = || {
        vec![
            TopCell::new(vec![0, 0], vec![1, 0]),
            TopCell::new(vec![0, 1], vec![1, 0]),
            TopCell::new(vec![0, 0], vec![0, 1]),
            TopCell::new(vec![1, 0], vec![0, 1]),
        ]
    };
    match name {
        "point" => pair(vec![TopCell::new(vec![0], vec![0])], 1, None),
        "interval" => pair(vec![TopCell::new(vec![0], vec![1])], 1, None),
        "s1" => pair(square_boundary(), 2, None),
        "s2" => pair(
            vec![
                TopCell::new(vec![0, 0, 0], vec![1, 1, 0]),
                TopCell::new(vec![0, 0, 1], vec![1, 1, 0]),
                TopCell::new(vec![0, 0, 0], vec![1, 0, 1]),
                TopCell::new(vec![0, 1, 0], vec![1, 0, 1]),
                TopCell::new(vec![0, 0, 0], vec![0, 1, 1]),
                TopCell::new(vec![1, 0, 0], vec![0, 1, 1]),
            ],
            3,
            None,
        ),
        "t2" => pair(torus_cells(), 3, None),
        "d2-pair" => pair(
            vec![TopCell::new(vec![0, 0], vec![1, 1])],
            2,
            Some(square_boundary()),
        ),
        other => Err(GridError::UnknownModel(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::parse_rational;

    fn zring() -> RingSpec {
        RingSpec::Integers
    }

    fn zw(entries: &[i64]) -> WeightVector {
        WeightVector::from_i64s(zring(), entries).unwrap()
    }

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn fixed(at: &str) -> GridAxis {
        GridAxis::Fixed { at: q(at) }
    }

    #[test]
    fn vertex_closure_is_a_single_generator() {
        for l in [1u32, 3, 7] {
            let m = GridModel::new(1, l, vec![TopCell::new(vec![5], vec![0])]).unwrap();
            assert_eq!(m.levels().len(), 1);
            assert_eq!(m.levels()[0].len(), 1);
            assert_eq!(m.levels()[0][0].to_string(), "{5}");
        }
    }

    #[test]
    fn interval_closures_enumerate_the_heights() {
        let m1 = builtin_model("interval", 1).unwrap().space;
        assert_eq!(
            m1.levels().iter().map(Vec::len).collect::<Vec<_>>(),
            vec![2, 1]
        );
        let m3 = builtin_model("interval", 3).unwrap().space;
        assert_eq!(
            m3.levels().iter().map(Vec::len).collect::<Vec<_>>(),
            vec![4, 1]
        );
        let vertices: Vec<GridGen> = m3.levels()[0].clone();
        let want: Vec<GridGen> = ["0", "1/3", "2/3", "1"]
            .iter()
            .map(|s| GridGen {
                axes: vec![fixed(s)],
                ghosts: 0,
            })
            .collect();
        assert_eq!(vertices, want);
    }

    #[test]
    fn closure_is_order_independent_and_idempotent() {
        let cells = vec![
            TopCell::new(vec![0, 0], vec![1, 0]),
            TopCell::new(vec![0, 0], vec![0, 1]),
            TopCell::new(vec![1, 0], vec![0, 1]),
            TopCell::new(vec![0, 1], vec![1, 0]),
        ];
        let mut reversed = cells.clone();
        reversed.reverse();
        let a = closure_generate(2, 2, &cells).unwrap();
        let b = closure_generate(2, 2, &reversed).unwrap();
        assert_eq!(a, b);
        validate_closed(2, &a).unwrap();
    }

    #[test]
    fn point_boundary_matrices_alternate_between_index_and_zero() {
        let point = builtin_model("point", 1).unwrap().space;
        for (weight, index) in [(vec![2i64, 3], 5i64), (vec![1, -1], 0)] {
            let w = zw(&weight);
            for n in 1..=6usize {
                let m = point.boundary_matrix(n, &w).unwrap();
                assert_eq!((m.rows, m.cols), (1, 1));
                let want = if n % 2 == 1 { index } else { 0 };
                assert_eq!(m.get(0, 0), &Coeff::Int(BigInt::from(want)));
            }
        }
    }

    #[test]
    fn interval_edge_column_hits_the_endpoints() {
        let m = builtin_model("interval", 1).unwrap().space;
        let w = zw(&[1, -1]);
        let mat = m.boundary_matrix(1, &w).unwrap();
        // Basis order is canonical: the edge sorts before the two vertices.
        let basis1 = m.basis(1);
        let basis0 = m.basis(0);
        assert_eq!(basis1.len(), 3);
        assert_eq!(basis0.len(), 2);
        let edge_col = basis1
            .iter()
            .position(|g| g.ghosts() == 0 && g.free_count() == 1)
            .unwrap();
        let v0 = basis0
            .iter()
            .position(|g| g.to_string() == "{0}")
            .unwrap();
        let v1 = basis0
            .iter()
            .position(|g| g.to_string() == "{1}")
            .unwrap();
        assert_eq!(mat.get(v0, edge_col), &Coeff::Int(BigInt::from(1)));
        assert_eq!(mat.get(v1, edge_col), &Coeff::Int(BigInt::from(-1)));
        // The constant towers have index zero here, so their columns vanish.
        for (j, g) in basis1.iter().enumerate() {
            if g.ghosts() > 0 {
                for i in 0..mat.rows {
                    assert!(zring().is_zero(mat.get(i, j)));
                }
            }
        }
    }

    #[test]
    fn square_boundary_closure_columns_sum_to_zero() {
        let m = builtin_model("s1", 1).unwrap().space;
        let w = zw(&[1, -1]);
        let mat = m.closure_boundary_matrix(1, &w).unwrap();
        assert_eq!((mat.rows, mat.cols), (4, 4));
        let ring = zring();
        for j in 0..4 {
            let mut sum = ring.zero();
            for i in 0..4 {
                sum = ring.add(&sum, mat.get(i, j));
            }
            assert!(ring.is_zero(&sum));
        }
    }

    #[test]
    fn matrix_boundary_agrees_with_the_chain_calculus() {
        let m = builtin_model("d2-pair", 1).unwrap().space;
        let w = zw(&[2, 3]);
        let ring = zring();
        for n in 1..=3usize {
            let cols = m.basis(n);
            let rows = m.basis(n - 1);
            let mat = boundary_matrix_between(&w, 1, &cols, &rows).unwrap();
            for (j, g) in cols.iter().enumerate() {
                let direct = boundary(&Chain::generator(ring.clone(), g.to_canon()), &w).unwrap();
                let mut from_matrix = Chain::zero(ring.clone(), n - 1);
                for (i, row_gen) in rows.iter().enumerate() {
                    let c = mat.get(i, j);
                    if !ring.is_zero(c) {
                        from_matrix.add_term(row_gen.to_canon(), c.clone()).unwrap();
                    }
                }
                assert_eq!(direct, from_matrix, "column {} of degree {}", g, n);
            }
        }
    }

    #[test]
    fn builtin_boundaries_compose_to_zero() {
        for name in ["point", "interval", "s1", "s2", "t2"] {
            let m = builtin_model(name, 1).unwrap().space;
            for weight in [vec![1i64, -1], vec![2, 3]] {
                let b = assemble_boundaries(&m, &zw(&weight), m.top_degree() + 2).unwrap();
                b.verify().unwrap();
            }
        }
        let m3 = builtin_model("s1", 3).unwrap().space;
        let w = WeightVector::from_i64s(zring(), &[9, 1, 4, -3]).unwrap();
        assemble_boundaries(&m3, &w, 3).unwrap().verify().unwrap();
    }

    #[test]
    fn point_homology_matches_the_closed_form() {
        let point = builtin_model("point", 1).unwrap().space;
        // Integer ring: R/(σ) in even degrees, the annihilator of σ in odd.
        for (weight, index) in [
            (vec![2i64, 3], 5i64),
            (vec![1, 10], 11),
            (vec![1, -1], 0),
            (vec![1, 0], 1),
        ] {
            let h = homology_range(&point, &zw(&weight), 5).unwrap();
            for (n, pres) in h.iter().enumerate() {
                if n % 2 == 0 {
                    match index {
                        0 => assert_eq!((pres.free_rank, pres.torsion.len()), (1, 0)),
                        1 | -1 => assert!(pres.is_zero()),
                        _ => {
                            assert_eq!(pres.free_rank, 0);
                            assert_eq!(pres.torsion, vec![BigInt::from(index)]);
                        }
                    }
                } else if index == 0 {
                    assert_eq!((pres.free_rank, pres.torsion.len()), (1, 0));
                } else {
                    assert!(pres.is_zero(), "odd degree over ℤ with nonzero index");
                }
            }
        }
        // ℤ/6 with reduced index 4: ℤ_gcd(4,6) = ℤ₂ in every degree.
        let ring6 = RingSpec::IntegersModN(6);
        let w6 = WeightVector::from_i64s(ring6, &[1, 3]).unwrap();
        let h6 = homology_range(&point, &w6, 4).unwrap();
        for pres in &h6 {
            assert_eq!(pres.free_rank, 0);
            assert_eq!(pres.torsion, vec![BigInt::from(2)]);
        }
        // ℚ: zero unless the index vanishes.
        let wq = WeightVector::from_i64s(RingSpec::Rationals, &[2, 3]).unwrap();
        for pres in &homology_range(&point, &wq, 3).unwrap() {
            assert!(pres.is_zero());
        }
        let wq0 = WeightVector::from_i64s(RingSpec::Rationals, &[1, -1]).unwrap();
        for pres in &homology_range(&point, &wq0, 3).unwrap() {
            assert_eq!((pres.free_rank, pres.torsion.len()), (1, 0));
        }
    }

    #[test]
    fn classical_surface_homology_from_closure_complexes() {
        // With weights (1, −1) the bare closure complex at L = 1 is the
        // classical finite cubical complex of the carrier.
        let w = zw(&[1, -1]);
        let s1 = builtin_model("s1", 1).unwrap().space;
        let h = closure_homology_range(&s1, &w, 2).unwrap();
        assert_eq!((h[0].free_rank, h[0].torsion.len()), (1, 0));
        assert_eq!((h[1].free_rank, h[1].torsion.len()), (1, 0));
        assert!(h[2].is_zero());

        let s2 = builtin_model("s2", 1).unwrap().space;
        let h = closure_homology_range(&s2, &w, 3).unwrap();
        assert_eq!((h[0].free_rank, h[0].torsion.len()), (1, 0));
        assert!(h[1].is_zero());
        assert_eq!((h[2].free_rank, h[2].torsion.len()), (1, 0));
        assert!(h[3].is_zero());

        let t2 = builtin_model("t2", 1).unwrap().space;
        assert_eq!(
            t2.levels().iter().map(Vec::len).collect::<Vec<_>>(),
            vec![32, 64, 32]
        );
        let h = closure_homology_range(&t2, &w, 2).unwrap();
        assert_eq!((h[0].free_rank, h[0].torsion.len()), (1, 0));
        assert_eq!((h[1].free_rank, h[1].torsion.len()), (2, 0));
        assert_eq!((h[2].free_rank, h[2].torsion.len()), (1, 0));
    }

    #[test]
    fn pair_with_itself_and_with_nothing() {
        let m = builtin_model("s1", 1).unwrap().space;
        let w = zw(&[2, 3]);
        let same = pair_matrices(&m, Some(&m), &w, 2).unwrap();
        assert!(same.rel_bases.iter().all(Vec::is_empty));
        let absolute = pair_matrices(&m, None, &w, 2).unwrap();
        for n in 0..=2usize {
            assert_eq!(absolute.rel_bases[n], m.basis(n));
            let direct = m.boundary_matrix(n, &w).unwrap();
            assert_eq!(absolute.mats[n].rows, direct.rows);
            assert_eq!(absolute.mats[n].cols, direct.cols);
            for i in 0..direct.rows {
                for j in 0..direct.cols {
                    assert_eq!(absolute.mats[n].get(i, j), direct.get(i, j));
                }
            }
        }
    }

    #[test]
    fn disk_pair_detects_the_relative_cycle() {
        let pair = builtin_model("d2-pair", 1).unwrap();
        let a = pair.sub.as_ref().unwrap();
        // Relative chain groups: only the filled square survives at degree 2,
        // with its tower above it.
        let w0 = zw(&[1, -1]);
        let rel = pair_matrices(&pair.space, Some(a), &w0, 3).unwrap();
        assert_eq!(rel.rel_bases[2].len(), 1);
        let h2 = homology_from_matrices(&zring(), &rel.mats[2], &rel.mats[3]).unwrap();
        assert_eq!((h2.free_rank, h2.torsion.len()), (1, 0));
        // With index 5 the tower's boundary reduces the class to torsion.
        let w5 = zw(&[2, 3]);
        let rel = pair_matrices(&pair.space, Some(a), &w5, 3).unwrap();
        let h2 = homology_from_matrices(&zring(), &rel.mats[2], &rel.mats[3]).unwrap();
        assert_eq!(h2.free_rank, 0);
        assert_eq!(h2.torsion, vec![BigInt::from(5)]);
    }

    #[test]
    fn sub_model_escaping_the_model_is_rejected() {
        let x = builtin_model("interval", 1).unwrap().space;
        let a = GridModel::new(1, 1, vec![TopCell::new(vec![4], vec![0])]).unwrap();
        let err = pair_matrices(&x, Some(&a), &zw(&[1, -1]), 1).unwrap_err();
        assert!(matches!(err, GridError::NotSubcomplex(_)));
    }

    #[test]
    fn les_of_a_point_alone_is_exact() {
        let point = builtin_model("point", 1).unwrap().space;
        let report = connecting_and_les_check(&point, None, &zw(&[2, 3]), 3).unwrap();
        assert!(report.exact, "{:?}", report.failures);
        assert!(report.sub.iter().all(FGModulePresentation::is_zero));
        assert!(report.connecting_nonzero.iter().all(|b| !b));
    }

    #[test]
    fn les_of_the_interval_against_its_endpoints() {
        let x = builtin_model("interval", 1).unwrap().space;
        let a = GridModel::new(
            1,
            1,
            vec![
                TopCell::new(vec![0], vec![0]),
                TopCell::new(vec![1], vec![0]),
            ],
        )
        .unwrap();
        let report = connecting_and_les_check(&x, Some(&a), &zw(&[1, -1]), 2).unwrap();
        assert!(report.exact, "{:?}", report.failures);
        assert!(report.connecting_nonzero[1]);
    }

    #[test]
    fn les_of_the_disk_pair_is_exact_for_both_weights() {
        let pair = builtin_model("d2-pair", 1).unwrap();
        let a = pair.sub.as_ref().unwrap();
        for weight in [vec![1i64, -1], vec![2, 3]] {
            let report =
                connecting_and_les_check(&pair.space, Some(a), &zw(&weight), 3).unwrap();
            assert!(report.exact, "weight {:?}: {:?}", weight, report.failures);
        }
    }

    #[test]
    fn rank_alternation_over_exact_windows() {
        // The alternating rank sum over a window of the sequence vanishes
        // when the window is capped by zero incoming maps. Two such windows:
        //
        // Interval against its endpoints, weights summing to zero: the
        // projection into relative degree 1 is zero (every degree-1 cycle of
        // the interval is a vertex tower, and the vertices sit in the
        // sub-model), so H₁(X,A) → H₀(A) → H₀(X) → H₀(X,A) → 0 is capped.
        let x = builtin_model("interval", 1).unwrap().space;
        let a = GridModel::new(
            1,
            1,
            vec![
                TopCell::new(vec![0], vec![0]),
                TopCell::new(vec![1], vec![0]),
            ],
        )
        .unwrap();
        let report = connecting_and_les_check(&x, Some(&a), &zw(&[1, -1]), 1).unwrap();
        assert!(report.exact, "{:?}", report.failures);
        let window = [
            report.pair[1].free_rank as i64,
            report.sub[0].free_rank as i64,
            report.space[0].free_rank as i64,
            report.pair[0].free_rank as i64,
        ];
        assert_eq!(window, [1, 2, 1, 0]);
        assert_eq!(window[0] - window[1] + window[2] - window[3], 0);

        // Disk pair with index 5: every group is torsion, so any window has
        // alternating rank sum zero.
        let pair = builtin_model("d2-pair", 1).unwrap();
        let report =
            connecting_and_les_check(&pair.space, pair.sub.as_ref(), &zw(&[2, 3]), 3).unwrap();
        assert!(report.exact, "{:?}", report.failures);
        let mut alternating: i64 = 0;
        let mut sign = 1i64;
        for n in (0..=3usize).rev() {
            for col in [&report.sub, &report.space, &report.pair] {
                alternating += sign * col[n].free_rank as i64;
                sign = -sign;
            }
        }
        assert_eq!(alternating, 0);
    }

    #[test]
    fn identity_cover_keeps_everything() {
        let m = builtin_model("s1", 1).unwrap().space;
        let cover = vec![vec![
            (q("-1"), q("2")),
            (q("-1"), q("2")),
        ]];
        let filtered = u_small_filter(&m, &cover).unwrap();
        assert_eq!(&filtered, m.levels());
    }

    #[test]
    fn overlapping_interval_cover_drops_the_full_edge() {
        let m = builtin_model("interval", 3).unwrap().space;
        let cover = vec![
            vec![(q("0"), q("2/3"))],
            vec![(q("1/3"), q("1"))],
        ];
        let filtered = u_small_filter(&m, &cover).unwrap();
        assert_eq!(filtered[0].len(), 4);
        assert!(filtered[1].is_empty());
    }

    #[test]
    fn gaps_in_the_cover_are_reported_with_a_witness() {
        let m = builtin_model("interval", 1).unwrap().space;
        // Interiors of these two boxes miss the midpoint 1/2.
        let cover = vec![
            vec![(q("0"), q("1/2"))],
            vec![(q("1/2"), q("1"))],
        ];
        let err = u_small_filter(&m, &cover).unwrap_err();
        match err {
            GridError::CoverGap(witness) => assert_eq!(witness, "1/2"),
            other => panic!("expected a cover gap, got {other}"),
        }
    }

    #[test]
    fn subdivided_terms_pass_the_covering_filter() {
        let m = builtin_model("interval", 1).unwrap().space;
        let cover = vec![
            vec![(q("0"), q("2/3"))],
            vec![(q("1/3"), q("1"))],
        ];
        check_cover(&m, &cover).unwrap();
        let edge = m.levels()[1][0].clone();
        let cell = AffineCell::identity(1);
        // One pass shrinks the per-axis extent to 1/3, within the overlap
        // margin of the cover.
        let k = (1..=4)
            .find(|&k| crate::homotopylab::mesh_diameter_bound(&cell, k) <= q("1/3"))
            .unwrap();
        let u = Chain::generator(zring(), edge.to_canon());
        let refined = crate::homotopylab::iterate_sd(&u, k).unwrap();
        assert!(!refined.is_zero());
        for (g, _) in refined.iter() {
            let bb = gen_bbox(g).unwrap();
            assert!(covered_by(&bb, &cover), "term {g:?} escapes the cover");
        }
    }

    #[test]
    fn subdivision_comparison_holds_on_the_point_model() {
        let point = builtin_model("point", 1).unwrap().space;
        for (a, b) in [(1i64, -1i64), (2, 3), (1, 4)] {
            let report = sd_comparison_check(&point, a, b, 3).unwrap();
            assert!(report.verified, "({a},{b}): {:?}", report.degrees);
            assert!(report.degrees.iter().any(|d| d.cycles > 0));
        }
    }

    #[test]
    fn subdivision_comparison_holds_on_the_circle_model() {
        let s1 = builtin_model("s1", 1).unwrap().space;
        for (a, b) in [(1i64, -1i64), (2, 3)] {
            let report = sd_comparison_check(&s1, a, b, 1).unwrap();
            assert!(report.verified, "({a},{b}): {:?}", report.degrees);
            let d1 = &report.degrees[1];
            assert!(d1.cycles > 0, "degree one should carry cycles");
        }
    }

    #[test]
    fn subdivision_comparison_rejects_shared_divisors_and_wide_lattices() {
        let point = builtin_model("point", 1).unwrap().space;
        assert!(matches!(
            sd_comparison_check(&point, 2, 4, 1),
            Err(GridError::NotCoprime(2, 4))
        ));
        let m3 = builtin_model("interval", 3).unwrap().space;
        assert!(matches!(
            sd_comparison_check(&m3, 1, -1, 1),
            Err(GridError::SdNeedsUnitL(3))
        ));
    }

    #[test]
    fn model_json_round_trip_and_rejections() {
        let pair = builtin_model("d2-pair", 2).unwrap();
        let json = model_to_json(&pair.space, pair.sub.as_ref());
        let back = parse_model(&json).unwrap();
        assert_eq!(back.space, pair.space);
        assert_eq!(back.sub, pair.sub);

        let cases = [
            ("not json", "bad model JSON"),
            (r#"{"dim":2,"L":0,"top_cells":[{"base":[0,0],"extent":[1,1]}]}"#, "positive"),
            (r#"{"dim":2,"L":1,"top_cells":[]}"#, "at least one"),
            (r#"{"dim":2,"L":1,"top_cells":[{"base":[0],"extent":[1]}]}"#, "dimension-2"),
            (r#"{"dim":1,"L":1,"top_cells":[{"base":[0],"extent":[2]}]}"#, "0 or 1"),
            (
                r#"{"dim":1,"L":1,"top_cells":[{"base":[0],"extent":[1]}],"subcomplex":[{"base":[9],"extent":[0]}]}"#,
                "not a subcomplex",
            ),
        ];
        for (json, needle) in cases {
            let err = parse_model(json).unwrap_err().to_string();
            assert!(err.contains(needle), "{json} → {err}");
        }
    }

    #[test]
    fn torus_cell_count_is_stable() {
        assert_eq!(torus_cells().len(), 32);
        assert!(matches!(
            builtin_model("mobius", 1),
            Err(GridError::UnknownModel(_))
        ));
    }

    #[test]
    fn towers_convert_to_padded_canonical_generators() {
        let m = builtin_model("interval", 1).unwrap().space;
        let edge = m.levels()[1][0].with_ghosts(2);
        assert_eq!(edge.degree(), 3);
        let g = edge.to_canon();
        assert_eq!(g.arity(), 3);
        assert_eq!(g.dim(), 1);
        // The padded slots are ignored by evaluation.
        let at = |x: &str, y: &str, z: &str| g.eval(&[q(x), q(y), q(z)]).unwrap();
        assert_eq!(at("1/2", "0", "1"), vec![q("1/2")]);
        assert_eq!(at("1/2", "1", "0"), vec![q("1/2")]);
        // A subdivision pass sends the constant tower of a vertex to minus
        // itself.
        let v = m.levels()[0][0].with_ghosts(1);
        let chain = Chain::generator(zring(), v.to_canon());
        let sd = subdivide_chain(&chain).unwrap();
        assert_eq!(sd, chain.scale(&Coeff::Int(BigInt::from(-1))));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_cells() -> impl Strategy<Value = Vec<TopCell>> {
            proptest::collection::vec(
                (
                    proptest::collection::vec(-2i64..3, 2),
                    proptest::collection::vec(0u8..2, 2),
                )
                    .prop_map(|(base, extent)| TopCell::new(base, extent)),
                1..5,
            )
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn random_models_compose_to_zero(cells in arb_cells(), l in 1u32..3, choose in 0usize..2) {
                let model = GridModel::new(2, l, cells).unwrap();
                let entries: Vec<i64> = match (l, choose) {
                    (1, 0) => vec![1, -1],
                    (1, _) => vec![2, 3],
                    (2, 0) => vec![1, 1, -1],
                    _ => vec![3, 0, 2],
                };
                let w = zw(&entries);
                let b = assemble_boundaries(&model, &w, model.top_degree() + 2).unwrap();
                b.verify().unwrap();
            }

            #[test]
            fn closure_never_depends_on_cell_order(cells in arb_cells(), l in 1u32..4) {
                let mut reversed = cells.clone();
                reversed.reverse();
                prop_assert_eq!(
                    closure_generate(2, l, &cells).unwrap(),
                    closure_generate(2, l, &reversed).unwrap()
                );
            }
        }
    }
}
