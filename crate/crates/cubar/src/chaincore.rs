//! Chains, the weighted boundary operator, and the canonical generator form.
//!
//! Generators are kept in a normal form — core map, affine pre-composition,
//! optional warp layer, appended cylinder/jag coordinates — chosen so that
//! the face rewrites used by the boundary operator are confluent: the two
//! orders of taking a face pair `(j, p)` with `j ≤ p` and `(p+1, j)` produce
//! byte-identical keys. Cancellation in `∂∘∂`, in the prism identity, and in
//! the subdivision identity is then detected by map-key equality rather than
//! sampling; a lattice comparison remains as a fallback for the few face
//! heights where a warp slice leaves the affine fragment.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeff::{Coeff, RingSpec, WeightVector};
use crate::cubeexpr::{
    chi, clamp_unit, compare_maps, AffineCell, BaseTable, CubeError, CubeExpr, Degeneracy,
    MapCompare,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChainError {
    #[error("ring mismatch: {0} vs {1}")]
    RingMismatch(String, String),
    #[error("degree mismatch: chain holds degree {0}, term has arity {1}")]
    DegreeMismatch(usize, usize),
    #[error("face slot j={j} out of range 1..={arity}")]
    FaceSlot { j: usize, arity: usize },
    #[error("face height i={i} exceeds L={l}")]
    FaceHeight { i: u32, l: u32 },
    #[error("generator {0} is formal (named) and cannot be evaluated")]
    FormalGenerator(String),
    #[error("generator cannot be written as an expression tree: {0}")]
    Unrepresentable(String),
    #[error("map is not composable with generator: {0}")]
    NonComposable(String),
    #[error("cylinder arity {got} is below the cell's {need} live slots")]
    CylinderArity { need: usize, got: usize },
    #[error("expression error: {0}")]
    Cube(#[from] CubeError),
    #[error("coefficient error: {0}")]
    Coeff(#[from] crate::coeff::CoeffError),
    #[error("bad chain JSON: {0}")]
    BadJson(String),
}

// --- Canonical generator form -------------------------------------------

/// The underlying map a generator is built on.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Core {
    /// A formal generator: faces and chain algebra work symbolically,
    /// evaluation is refused. Used for universally-quantified identities.
    Named { id: String, arity: usize, dim: usize },
    /// A piecewise multilinear value table.
    Table(BaseTable),
    /// An affine box parametrization.
    Affine(AffineCell),
    /// Any other expression tree, handled as an opaque evaluable map.
    Opaque(CubeExpr),
}

impl Core {
    fn arity(&self) -> usize {
        match self {
            Core::Named { arity, .. } => *arity,
            Core::Table(t) => t.arity,
            Core::Affine(c) => c.arity(),
            Core::Opaque(e) => e.arity(),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Core::Named { dim, .. } => *dim,
            Core::Table(t) => t.dim,
            Core::Affine(c) => c.dim(),
            Core::Opaque(e) => e.dim(),
        }
    }
}

/// One input feed of the affine pre-composition: what a core input slot
/// reads. `Lin` images stay inside `[0,1]` and their slots strictly
/// increase across the feed list, so the form is unique.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Feed {
    Const(BigRational),
    Lin {
        slot: usize,
        a: BigRational,
        b: BigRational,
    },
}

/// Affine pre-composition with possibly-unread (dead) input slots.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PreMap {
    arity: usize,
    feeds: Vec<Feed>,
}

/// One coordinate of the warp layer: either still driven by an input slot
/// through the curve `η_z(x, y)`, or already sliced to the section
/// `y ↦ min(q/(3−2y), 1)` (mirror: `min(q/(1+2y), 1)`) with `0 < q < 3`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum WarpCoord {
    Active { z: u8 },
    Section { q: BigRational },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct WarpLayer {
    tilde: bool,
    coords: Vec<WarpCoord>,
}

impl WarpLayer {
    fn active_count(&self) -> usize {
        self.coords
            .iter()
            .filter(|c| matches!(c, WarpCoord::Active { .. }))
            .count()
    }
}

/// The curve driving an appended coordinate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SlotCurve {
    /// Constantly zero — the cylinder coordinate of ξ.
    Zero,
    /// The jag χ_k at scale L — the coordinate of ψ_k.
    Jag { l: u32, k: u32 },
}

/// An appended target coordinate: either `a + b·curve(x)` reading a fresh
/// trailing input slot, or a fixed value with no slot (a face of the
/// former).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Ext {
    Slot {
        curve: SlotCurve,
        a: BigRational,
        b: BigRational,
    },
    Fixed(BigRational),
}

/// A generator in canonical form. Input slots are ordered: warp-driven
/// slots (plus the warp parameter, last among them), otherwise the premap
/// slots, otherwise the core slots; appended-coordinate slots trail.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CanonGen {
    core: Core,
    pre: Option<PreMap>,
    warp: Option<WarpLayer>,
    exts: Vec<Ext>,
}

fn rational_min_one(x: BigRational) -> BigRational {
    if x > BigRational::one() {
        BigRational::one()
    } else {
        x
    }
}

impl CanonGen {
    fn assemble(core: Core, pre: Option<PreMap>, warp: Option<WarpLayer>, exts: Vec<Ext>) -> Self {
        let mut g = CanonGen {
            core,
            pre,
            warp,
            exts,
        };
        g.normalize();
        g
    }

    pub fn named(id: &str, arity: usize, dim: usize) -> Self {
        CanonGen::assemble(
            Core::Named {
                id: id.to_string(),
                arity,
                dim,
            },
            None,
            None,
            Vec::new(),
        )
    }

    pub fn affine(cell: AffineCell) -> Self {
        CanonGen::assemble(Core::Affine(cell), None, None, Vec::new())
    }

    pub fn table(table: BaseTable) -> Self {
        CanonGen::assemble(Core::Table(table), None, None, Vec::new())
    }

    /// The identity parametrization of Iⁿ.
    pub fn identity(n: usize) -> Self {
        CanonGen::affine(AffineCell::identity(n))
    }

    /// An affine cell padded with trailing input slots the map ignores:
    /// `arity` total inputs, of which only the cell's own slots act.
    pub fn affine_cylinder(cell: AffineCell, arity: usize) -> Result<Self, ChainError> {
        let live = cell.arity();
        if arity < live {
            return Err(ChainError::CylinderArity { need: live, got: arity });
        }
        Ok(CanonGen::assemble(
            Core::Affine(cell),
            Some(PreMap {
                arity,
                feeds: identity_feeds(live),
            }),
            None,
            Vec::new(),
        ))
    }

    /// The constant map at `p` with `arity` (ignored) input slots.
    pub fn constant(p: Vec<BigRational>, arity: usize) -> Self {
        CanonGen::assemble(
            Core::Affine(AffineCell::constant(p)),
            Some(PreMap {
                arity,
                feeds: Vec::new(),
            }),
            None,
            Vec::new(),
        )
    }

    pub fn arity(&self) -> usize {
        self.base_arity() + self.ext_slots()
    }

    fn base_arity(&self) -> usize {
        if let Some(w) = &self.warp {
            w.active_count() + 1
        } else if let Some(p) = &self.pre {
            p.arity
        } else {
            self.core.arity()
        }
    }

    fn ext_slots(&self) -> usize {
        self.exts
            .iter()
            .filter(|e| matches!(e, Ext::Slot { .. }))
            .count()
    }

    pub fn dim(&self) -> usize {
        self.core.dim() + self.exts.len()
    }

    pub fn is_named(&self) -> Option<&str> {
        match (&self.core, &self.pre, &self.warp, self.exts.is_empty()) {
            (Core::Named { id, .. }, None, None, true) => Some(id),
            _ => None,
        }
    }

    /// Inner-map arity under warp/exts: what the premap (or core) consumes.
    fn inner_arity(&self) -> usize {
        self.pre
            .as_ref()
            .map(|p| p.arity)
            .unwrap_or_else(|| self.core.arity())
    }

    fn normalize(&mut self) {
        // An empty warp (no coordinates left) degenerates to a dead slot in
        // the position the warp parameter occupied.
        if let Some(w) = &self.warp {
            if w.coords.is_empty() {
                self.warp = None;
                let arity = self.inner_arity() + 1;
                let feeds = match self.pre.take() {
                    Some(p) => p.feeds,
                    None => identity_feeds(self.core.arity()),
                };
                self.pre = Some(PreMap { arity, feeds });
            }
        }
        // A premap whose feeds are all constant makes the inner map constant
        // in every input; collapse it (and any warp above it) to a constant
        // core over dead slots — when the core can actually be evaluated.
        if let Some(p) = &self.pre {
            let all_const = p.feeds.iter().all(|f| matches!(f, Feed::Const(_)));
            let evaluable = matches!(self.core, Core::Table(_) | Core::Affine(_) | Core::Opaque(_));
            if all_const && evaluable && !matches!(self.core, Core::Affine(_)) {
                let vals: Vec<BigRational> = p
                    .feeds
                    .iter()
                    .map(|f| match f {
                        Feed::Const(c) => c.clone(),
                        Feed::Lin { .. } => unreachable!(),
                    })
                    .collect();
                let value = match &self.core {
                    Core::Table(t) => t.eval(&vals).ok(),
                    Core::Opaque(e) => e.eval(&vals).ok(),
                    _ => None,
                };
                if let Some(value) = value {
                    let dead = if self.warp.is_some() {
                        self.base_arity()
                    } else {
                        p.arity
                    };
                    self.core = Core::Affine(AffineCell::constant(value));
                    self.pre = Some(PreMap {
                        arity: dead,
                        feeds: Vec::new(),
                    });
                    self.warp = None;
                }
            }
        }
        // A table with a single repeated value is the constant map; put it
        // in the same form faces of constants reach (affine core over dead
        // slots) so the two spellings share one key.
        if let Core::Table(t) = &self.core {
            if t.values.windows(2).all(|w| w[0] == w[1]) {
                let value = t.values[0].clone();
                let arity = self.base_arity();
                self.core = Core::Affine(AffineCell::constant(value));
                self.pre = Some(PreMap {
                    arity,
                    feeds: Vec::new(),
                });
                self.warp = None;
            }
        }
        // Fold affine feed content into an affine core; what remains of the
        // premap is at most a slot selection with dead slots.
        if let (Core::Affine(cell), Some(p)) = (&self.core, &self.pre) {
            let axes = cell.used_axes();
            debug_assert_eq!(axes.len(), p.feeds.len());
            let mut start = cell.start.clone();
            let mut deltas = cell.deltas.clone();
            let mut slots = Vec::new();
            for (s, feed) in p.feeds.iter().enumerate() {
                let axis = axes[s];
                match feed {
                    Feed::Const(c) => {
                        let moved = &deltas[axis] * c;
                        start[axis] += moved;
                        deltas[axis] = BigRational::zero();
                    }
                    Feed::Lin { slot, a, b } => {
                        let moved = &deltas[axis] * a;
                        start[axis] += moved;
                        deltas[axis] = &deltas[axis] * b;
                        slots.push(*slot);
                    }
                }
            }
            let arity = p.arity;
            self.core = Core::Affine(AffineCell { start, deltas });
            self.pre = if slots.len() == arity && slots.iter().copied().eq(0..arity) {
                None
            } else {
                Some(PreMap {
                    arity,
                    feeds: slots
                        .into_iter()
                        .map(|slot| Feed::Lin {
                            slot,
                            a: BigRational::zero(),
                            b: BigRational::one(),
                        })
                        .collect(),
                })
            };
        }
        // Drop an identity premap.
        if let Some(p) = &self.pre {
            let identityish = p.arity == p.feeds.len()
                && p.feeds.iter().enumerate().all(|(s, f)| {
                    matches!(f, Feed::Lin { slot, a, b } if *slot == s && a.is_zero() && b.is_one())
                });
            if identityish {
                self.pre = None;
            }
        }
        // Canonical appended coordinates: a slot whose curve contributes
        // nothing is the zero curve with unit scale.
        for ext in &mut self.exts {
            if let Ext::Slot { curve, a: _, b } = ext {
                if b.is_zero() {
                    *curve = SlotCurve::Zero;
                }
                if matches!(curve, SlotCurve::Zero) {
                    *b = BigRational::one();
                }
            }
        }
        if let Some(w) = &self.warp {
            debug_assert_eq!(w.coords.len(), self.inner_arity());
        }
    }

    /// Appends the cylinder coordinate: `x ↦ (self(x'), 0)`, consuming one
    /// fresh trailing slot.
    pub fn cross_zero(&self) -> CanonGen {
        let mut g = self.clone();
        g.exts.push(Ext::Slot {
            curve: SlotCurve::Zero,
            a: BigRational::zero(),
            b: BigRational::one(),
        });
        g.normalize();
        g
    }

    /// Appends the jag coordinate: `x ↦ (self(x'), χ_k(x_last))`.
    pub fn cross_jag(&self, l: u32, k: u32) -> Result<CanonGen, ChainError> {
        if l == 0 || k > l {
            return Err(ChainError::Cube(CubeError::JagIndex { k, l }));
        }
        let mut g = self.clone();
        g.exts.push(Ext::Slot {
            curve: SlotCurve::Jag { l, k },
            a: BigRational::zero(),
            b: BigRational::one(),
        });
        g.normalize();
        Ok(g)
    }

    /// Appends a constant target coordinate (the cylinder ends `e₀`/`e₁`).
    pub fn append_fixed(&self, value: BigRational) -> CanonGen {
        let mut g = self.clone();
        g.exts.push(Ext::Fixed(value));
        g.normalize();
        g
    }

    /// Wraps the generator in a warp layer with letters `z` (one per input
    /// slot); falls back to an opaque tree when the generator already
    /// carries a warp or appended coordinates.
    pub fn warp(&self, z: &[u8], tilde: bool) -> Result<CanonGen, ChainError> {
        if z.len() != self.arity() {
            return Err(ChainError::Cube(CubeError::WarpShape(
                self.arity(),
                z.len(),
            )));
        }
        if let Some(&bad) = z.iter().find(|&&zi| zi > 2) {
            return Err(ChainError::Cube(CubeError::WarpLetter(bad)));
        }
        if self.warp.is_none() && self.exts.is_empty() {
            Ok(CanonGen::assemble(
                self.core.clone(),
                self.pre.clone(),
                Some(WarpLayer {
                    tilde,
                    coords: z.iter().map(|&z| WarpCoord::Active { z }).collect(),
                }),
                Vec::new(),
            ))
        } else {
            let inner = self.to_expr()?;
            let expr = CubeExpr::Warp {
                inner: Box::new(inner),
                z: z.to_vec(),
                tilde,
            };
            Ok(CanonGen::assemble(Core::Opaque(expr), None, None, Vec::new()))
        }
    }

    /// The reparametrized restriction `x ↦ self(clamp(α(e + v·x)))`.
    pub fn clamped(
        &self,
        alpha: &BigRational,
        e: &[BigRational],
        v: &[BigRational],
    ) -> Result<CanonGen, ChainError> {
        let n = self.arity();
        if e.len() != n || v.len() != n {
            return Err(ChainError::Cube(CubeError::ClampShape(n, e.len(), v.len())));
        }
        if self.warp.is_some() || !self.exts.is_empty() {
            let inner = self.to_expr()?;
            let expr = CubeExpr::Clamped {
                inner: Box::new(inner),
                alpha: alpha.clone(),
                e: e.to_vec(),
                v: v.to_vec(),
            };
            return Ok(CanonGen::assemble(Core::Opaque(expr), None, None, Vec::new()));
        }
        // Per slot, clamp(α(e_t + v_t x)) is affine (image inside [0,1]),
        // constant (image saturated or v_t = 0), or genuinely kinked.
        let mut pre = self.materialized_pre();
        enum SlotFold {
            Aff(BigRational, BigRational),
            Const(BigRational),
            Kinked,
        }
        let folds: Vec<SlotFold> = (0..n)
            .map(|t| {
                if v[t].is_zero() {
                    return SlotFold::Const(clamp_unit(&(alpha * &e[t])));
                }
                let p0 = alpha * &e[t];
                let p1 = alpha * (&e[t] + &v[t]);
                let (lo, hi) = if p0 <= p1 {
                    (p0.clone(), p1.clone())
                } else {
                    (p1.clone(), p0.clone())
                };
                if hi <= BigRational::zero() {
                    SlotFold::Const(BigRational::zero())
                } else if lo >= BigRational::one() {
                    SlotFold::Const(BigRational::one())
                } else if lo >= BigRational::zero() && hi <= BigRational::one() {
                    SlotFold::Aff(p0, alpha * &v[t])
                } else {
                    SlotFold::Kinked
                }
            })
            .collect();
        if folds.iter().any(|f| matches!(f, SlotFold::Kinked)) {
            let inner = self.to_expr()?;
            let expr = CubeExpr::Clamped {
                inner: Box::new(inner),
                alpha: alpha.clone(),
                e: e.to_vec(),
                v: v.to_vec(),
            };
            return Ok(CanonGen::assemble(Core::Opaque(expr), None, None, Vec::new()));
        }
        for feed in &mut pre.feeds {
            if let Feed::Lin { slot, a, b } = feed {
                match &folds[*slot] {
                    SlotFold::Const(c) => {
                        let val = &*a + &*b * c;
                        *feed = Feed::Const(val);
                    }
                    SlotFold::Aff(fa, fb) => {
                        let na = &*a + &*b * fa;
                        let nb = &*b * fb;
                        *feed = Feed::Lin {
                            slot: *slot,
                            a: na,
                            b: nb,
                        };
                    }
                    SlotFold::Kinked => unreachable!(),
                }
            }
        }
        Ok(CanonGen::assemble(
            self.core.clone(),
            Some(pre),
            None,
            Vec::new(),
        ))
    }

    /// The premap with identity feeds materialized if absent. Only
    /// meaningful when no warp sits above it.
    fn materialized_pre(&self) -> PreMap {
        match &self.pre {
            Some(p) => p.clone(),
            None => PreMap {
                arity: self.core.arity(),
                feeds: identity_feeds(self.core.arity()),
            },
        }
    }

    /// The face with slot `j` (1-based) frozen at height `i/l`.
    pub fn face(&self, l: u32, i: u32, j: usize) -> Result<CanonGen, ChainError> {
        let n = self.arity();
        if l == 0 {
            return Err(ChainError::Cube(CubeError::ZeroL));
        }
        if j == 0 || j > n {
            return Err(ChainError::FaceSlot { j, arity: n });
        }
        if i > l {
            return Err(ChainError::FaceHeight { i, l });
        }
        let c = BigRational::new(BigInt::from(i), BigInt::from(l));
        let s = j - 1;
        let base = self.base_arity();
        if s >= base {
            return Ok(self.pin_ext_slot(s - base, &c));
        }
        if let Some(w) = &self.warp {
            let actives = w.active_count();
            if s == actives {
                self.pin_warp_parameter(&c, l, i)
            } else {
                Ok(self.pin_warp_active(s, &c))
            }
        } else {
            Ok(self.pin_inner_slot(s, &c))
        }
    }

    fn pin_ext_slot(&self, slot_rank: usize, c: &BigRational) -> CanonGen {
        let mut g = self.clone();
        let mut seen = 0;
        for ext in g.exts.iter_mut() {
            if let Ext::Slot { curve, a, b } = ext {
                if seen == slot_rank {
                    let val = match curve {
                        SlotCurve::Zero => a.clone(),
                        SlotCurve::Jag { l, k } => {
                            let chi_val = chi(*l, *k, c).expect("jag indices validated");
                            &*a + &*b * chi_val
                        }
                    };
                    *ext = Ext::Fixed(val);
                    break;
                }
                seen += 1;
            }
        }
        g.normalize();
        g
    }

    /// Freezes a warp-driven slot: the coordinate becomes the section with
    /// `q ∈ {c, 2−c, 2+c}`; the boundary cases `q = 0` and `q ≥ 3` pin the
    /// inner slot at a constant 0 or 1 outright.
    fn pin_warp_active(&self, active_rank: usize, c: &BigRational) -> CanonGen {
        let w = self.warp.as_ref().expect("caller checked warp");
        let mut coords = w.coords.clone();
        let t = coords
            .iter()
            .enumerate()
            .filter(|(_, c)| matches!(c, WarpCoord::Active { .. }))
            .nth(active_rank)
            .map(|(t, _)| t)
            .expect("active rank in range");
        let z = match &coords[t] {
            WarpCoord::Active { z } => *z,
            WarpCoord::Section { .. } => unreachable!(),
        };
        let two = BigRational::from_integer(BigInt::from(2));
        let q = match z {
            0 => c.clone(),
            1 => &two - c,
            _ => &two + c,
        };
        if q.is_zero() {
            coords.remove(t);
            return self.with_pinned_inner_slot(t, &BigRational::zero(), coords);
        }
        if q >= BigRational::from_integer(BigInt::from(3)) {
            coords.remove(t);
            return self.with_pinned_inner_slot(t, &BigRational::one(), coords);
        }
        coords[t] = WarpCoord::Section { q };
        CanonGen::assemble(
            self.core.clone(),
            self.pre.clone(),
            Some(WarpLayer {
                tilde: w.tilde,
                coords,
            }),
            self.exts.clone(),
        )
    }

    /// Pins inner (premap-level) slot `t` at the constant `γ` while the warp
    /// layer keeps the remaining coordinates.
    fn with_pinned_inner_slot(
        &self,
        t: usize,
        gamma: &BigRational,
        coords: Vec<WarpCoord>,
    ) -> CanonGen {
        let mut pre = self.materialized_pre();
        pin_feeds(&mut pre, t, gamma);
        let warp = Some(WarpLayer {
            tilde: self.warp.as_ref().expect("warp present").tilde,
            coords,
        });
        CanonGen::assemble(self.core.clone(), Some(pre), warp, self.exts.clone())
    }

    /// Freezes the warp parameter at height `c = i/l`: every coordinate
    /// slices to an affine or constant map when the clamp stays disengaged,
    /// and the warp layer dissolves into the premap. A coordinate whose
    /// slice is genuinely kinked forces the opaque fallback.
    fn pin_warp_parameter(&self, c: &BigRational, l: u32, i: u32) -> Result<CanonGen, ChainError> {
        let w = self.warp.as_ref().expect("caller checked warp");
        let two = BigRational::from_integer(BigInt::from(2));
        let den = if w.tilde {
            BigRational::one() + &two * c
        } else {
            BigRational::from_integer(BigInt::from(3)) - &two * c
        };
        enum YFold {
            Aff(BigRational, BigRational),
            Const(BigRational),
            Kinked,
        }
        let one = BigRational::one();
        let folds: Vec<YFold> = w
            .coords
            .iter()
            .map(|coord| match coord {
                WarpCoord::Section { q } => YFold::Const(rational_min_one(q / &den)),
                WarpCoord::Active { z } => match z {
                    0 => YFold::Aff(BigRational::zero(), &one / &den),
                    1 => {
                        if &two / &den <= one {
                            YFold::Aff(&two / &den, -(&one / &den))
                        } else if &one / &den >= one {
                            YFold::Const(one.clone())
                        } else {
                            YFold::Kinked
                        }
                    }
                    _ => {
                        if &two / &den >= one {
                            YFold::Const(one.clone())
                        } else if BigRational::from_integer(BigInt::from(3)) / &den <= one {
                            YFold::Aff(&two / &den, &one / &den)
                        } else {
                            YFold::Kinked
                        }
                    }
                },
            })
            .collect();
        if folds.iter().any(|f| matches!(f, YFold::Kinked)) {
            // A kinked slice leaves the affine fragment; keep it as an
            // opaque face of the warp tree.
            let stripped = CanonGen {
                core: self.core.clone(),
                pre: self.pre.clone(),
                warp: self.warp.clone(),
                exts: Vec::new(),
            };
            let expr = stripped.to_expr().map_err(|e| {
                ChainError::Unrepresentable(format!(
                    "kinked warp slice at height {i}/{l} over a generator with no tree form: {e}"
                ))
            })?;
            let y_slot = w.active_count() + 1;
            let face = CubeExpr::Face {
                inner: Box::new(expr),
                l,
                i,
                j: y_slot,
            };
            return Ok(CanonGen::assemble(
                Core::Opaque(face),
                None,
                None,
                self.exts.clone(),
            ));
        }
        // Rank of each coordinate among the active (slot-consuming) ones.
        let mut rank = 0usize;
        let ranks: Vec<Option<usize>> = w
            .coords
            .iter()
            .map(|coord| match coord {
                WarpCoord::Active { .. } => {
                    let r = rank;
                    rank += 1;
                    Some(r)
                }
                WarpCoord::Section { .. } => None,
            })
            .collect();
        let mut pre = self.materialized_pre();
        for feed in &mut pre.feeds {
            if let Feed::Lin { slot, a, b } = feed {
                match &folds[*slot] {
                    YFold::Const(g) => {
                        let val = &*a + &*b * g;
                        *feed = Feed::Const(val);
                    }
                    YFold::Aff(fa, fb) => {
                        let na = &*a + &*b * fa;
                        let nb = &*b * fb;
                        let new_slot = ranks[*slot].expect("affine fold only on active");
                        *feed = Feed::Lin {
                            slot: new_slot,
                            a: na,
                            b: nb,
                        };
                    }
                    YFold::Kinked => unreachable!(),
                }
            }
        }
        pre.arity = w.active_count();
        Ok(CanonGen::assemble(
            self.core.clone(),
            Some(pre),
            None,
            self.exts.clone(),
        ))
    }

    /// Pins a premap-level slot (no warp above) at the constant `c`.
    fn pin_inner_slot(&self, t: usize, c: &BigRational) -> CanonGen {
        let mut pre = self.materialized_pre();
        pin_feeds(&mut pre, t, c);
        CanonGen::assemble(self.core.clone(), Some(pre), None, self.exts.clone())
    }

    /// Exact evaluation. Refused for formal (named) generators.
    pub fn eval(&self, p: &[BigRational]) -> Result<Vec<BigRational>, ChainError> {
        let n = self.arity();
        if p.len() != n {
            return Err(ChainError::Cube(CubeError::PointArity(p.len(), n)));
        }
        for (t, x) in p.iter().enumerate() {
            if x.is_negative() || x > &BigRational::one() {
                return Err(ChainError::Cube(CubeError::PointRange(t)));
            }
        }
        let base = self.base_arity();
        let (bp, ep) = p.split_at(base);
        let inner_in: Vec<BigRational> = if let Some(w) = &self.warp {
            let y = &bp[w.active_count()];
            let two = BigRational::from_integer(BigInt::from(2));
            let den = if w.tilde {
                BigRational::one() + &two * y
            } else {
                BigRational::from_integer(BigInt::from(3)) - &two * y
            };
            let mut rank = 0usize;
            w.coords
                .iter()
                .map(|coord| match coord {
                    WarpCoord::Active { z } => {
                        let x = &bp[rank];
                        rank += 1;
                        let num = match z {
                            0 => x.clone(),
                            1 => &two - x,
                            _ => &two + x,
                        };
                        rational_min_one(num / &den)
                    }
                    WarpCoord::Section { q } => rational_min_one(q / &den),
                })
                .collect()
        } else {
            bp.to_vec()
        };
        let core_in: Vec<BigRational> = match &self.pre {
            Some(pre) => pre
                .feeds
                .iter()
                .map(|f| match f {
                    Feed::Const(c) => c.clone(),
                    Feed::Lin { slot, a, b } => a + b * &inner_in[*slot],
                })
                .collect(),
            None => inner_in,
        };
        let mut out = match &self.core {
            Core::Named { id, .. } => return Err(ChainError::FormalGenerator(id.clone())),
            Core::Table(t) => t.eval(&core_in)?,
            Core::Affine(c) => c.eval(&core_in)?,
            Core::Opaque(e) => e.eval(&core_in)?,
        };
        let mut ei = 0usize;
        for ext in &self.exts {
            match ext {
                Ext::Fixed(c) => out.push(c.clone()),
                Ext::Slot { curve, a, b } => {
                    let x = &ep[ei];
                    ei += 1;
                    let cv = match curve {
                        SlotCurve::Zero => BigRational::zero(),
                        SlotCurve::Jag { l, k } => chi(*l, *k, x)?,
                    };
                    out.push(a + b * cv);
                }
            }
        }
        Ok(out)
    }

    /// Structural degeneracy: a provably-unread input slot. Exact on the
    /// canonical fragment; opaque cores defer to the expression analysis.
    pub fn degeneracy(&self) -> Degeneracy {
        // A dead premap slot is decisive.
        if let Some(p) = &self.pre {
            let read: std::collections::BTreeSet<usize> = p
                .feeds
                .iter()
                .filter_map(|f| match f {
                    Feed::Lin { slot, .. } => Some(*slot),
                    Feed::Const(_) => None,
                })
                .collect();
            if read.len() < p.arity {
                return Degeneracy::Degenerate;
            }
        }
        match self.to_expr() {
            Ok(expr) => crate::cubeexpr::is_degenerate(&expr),
            Err(_) => Degeneracy::Unknown,
        }
    }

    /// Rebuilds an expression tree for the generator. Fails for formal
    /// generators and for the few canonical forms with no tree equivalent.
    pub fn to_expr(&self) -> Result<CubeExpr, ChainError> {
        let core_expr = match &self.core {
            Core::Named { id, .. } => return Err(ChainError::FormalGenerator(id.clone())),
            Core::Table(t) => CubeExpr::Base(t.clone()),
            Core::Affine(c) => CubeExpr::AffineCell(c.clone()),
            Core::Opaque(e) => e.clone(),
        };
        let mut expr = core_expr;
        if let Some(p) = &self.pre {
            expr = premap_to_expr(expr, p, matches!(self.core, Core::Affine(_)))?;
        }
        if let Some(w) = &self.warp {
            expr = warp_to_expr(expr, w)?;
        }
        for ext in &self.exts {
            expr = ext_to_expr(expr, ext)?;
        }
        Ok(expr)
    }

    /// Pushes the generator through an affine target transformation
    /// `y ↦ scale⊙y + offset` (coordinatewise).
    fn map_target_affine(
        &self,
        scale: &[BigRational],
        offset: &[BigRational],
    ) -> Result<CanonGen, ChainError> {
        if scale.len() != self.dim() || offset.len() != self.dim() {
            return Err(ChainError::NonComposable(format!(
                "affine map on {} coordinates applied to a generator into dimension {}",
                scale.len(),
                self.dim()
            )));
        }
        let core_dim = self.core.dim();
        let core = match &self.core {
            Core::Named { id, .. } => {
                return Err(ChainError::NonComposable(format!(
                    "cannot compose an affine map with formal generator {id}"
                )))
            }
            Core::Opaque(_) => {
                return Err(ChainError::NonComposable(
                    "cannot compose an affine map with an opaque generator".to_string(),
                ))
            }
            Core::Table(t) => {
                let values = t
                    .values
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .map(|(a, v)| &scale[a] * v + &offset[a])
                            .collect()
                    })
                    .collect();
                Core::Table(BaseTable::new(t.arity, t.dim, t.step_denom, values)?)
            }
            Core::Affine(c) => {
                // Axes whose scale vanishes make former slots dead; route
                // them through an explicit slot-dropping premap.
                let mut start = Vec::with_capacity(core_dim);
                let mut deltas = Vec::with_capacity(core_dim);
                for a in 0..core_dim {
                    start.push(&scale[a] * &c.start[a] + &offset[a]);
                    deltas.push(&scale[a] * &c.deltas[a]);
                }
                let dropped: Vec<usize> = c
                    .used_axes()
                    .iter()
                    .enumerate()
                    .filter(|(_, &axis)| deltas[axis].is_zero())
                    .map(|(s, _)| s)
                    .collect();
                if !dropped.is_empty() {
                    let mut pre = self.materialized_pre();
                    // Remove the feeds of collapsed core slots (highest
                    // first); their input slots become dead.
                    for &s in dropped.iter().rev() {
                        pre.feeds.remove(s);
                    }
                    let mut g = CanonGen {
                        core: Core::Affine(AffineCell { start, deltas }),
                        pre: Some(pre),
                        warp: self.warp.clone(),
                        exts: Vec::new(),
                    };
                    g.exts = transform_exts(&self.exts, scale, offset, core_dim);
                    g.normalize();
                    return Ok(g);
                }
                Core::Affine(AffineCell { start, deltas })
            }
        };
        let mut g = CanonGen {
            core,
            pre: self.pre.clone(),
            warp: self.warp.clone(),
            exts: transform_exts(&self.exts, scale, offset, core_dim),
        };
        g.normalize();
        Ok(g)
    }
}

fn transform_exts(
    exts: &[Ext],
    scale: &[BigRational],
    offset: &[BigRational],
    core_dim: usize,
) -> Vec<Ext> {
    exts.iter()
        .enumerate()
        .map(|(idx, ext)| {
            let a_idx = core_dim + idx;
            let (s, o) = (&scale[a_idx], &offset[a_idx]);
            match ext {
                Ext::Fixed(c) => Ext::Fixed(s * c + o),
                Ext::Slot { curve, a, b } => Ext::Slot {
                    curve: curve.clone(),
                    a: s * a + o,
                    b: s * b,
                },
            }
        })
        .collect()
}

fn identity_feeds(arity: usize) -> Vec<Feed> {
    (0..arity)
        .map(|slot| Feed::Lin {
            slot,
            a: BigRational::zero(),
            b: BigRational::one(),
        })
        .collect()
}

/// Pins premap input slot `t` at the constant `c`: feeds reading it become
/// constants, higher slots shift down.
fn pin_feeds(pre: &mut PreMap, t: usize, c: &BigRational) {
    for feed in &mut pre.feeds {
        if let Feed::Lin { slot, a, b } = feed {
            if *slot == t {
                let val = &*a + &*b * c;
                *feed = Feed::Const(val);
            } else if *slot > t {
                *slot -= 1;
            }
        }
    }
    pre.arity -= 1;
}

fn big_to_u32(x: &BigInt) -> Result<u32, ChainError> {
    x.to_u32().ok_or_else(|| {
        ChainError::Unrepresentable(format!("rational component {x} exceeds face-index range"))
    })
}

/// Expresses a premap as Face pins (constants) plus a diagonal affine
/// reparametrization; dead slots force an exact re-tabulation.
fn premap_to_expr(core_expr: CubeExpr, pre: &PreMap, core_affine: bool) -> Result<CubeExpr, ChainError> {
    let lin_count = pre
        .feeds
        .iter()
        .filter(|f| matches!(f, Feed::Lin { .. }))
        .count();
    let has_dead = {
        let read: std::collections::BTreeSet<usize> = pre
            .feeds
            .iter()
            .filter_map(|f| match f {
                Feed::Lin { slot, .. } => Some(*slot),
                Feed::Const(_) => None,
            })
            .collect();
        read.len() < pre.arity
    };
    if !has_dead {
        // Pin constant feeds from the highest core slot down.
        let mut expr = core_expr;
        for (s, feed) in pre.feeds.iter().enumerate().rev() {
            if let Feed::Const(c) = feed {
                let l = big_to_u32(c.denom())?;
                let i = big_to_u32(c.numer())?;
                expr = CubeExpr::Face {
                    inner: Box::new(expr),
                    l,
                    i,
                    j: s + 1,
                };
            }
        }
        // Remaining slots are the Lin feeds with identity slot order.
        let mut e = Vec::with_capacity(lin_count);
        let mut v = Vec::with_capacity(lin_count);
        let mut trivial = true;
        for feed in &pre.feeds {
            if let Feed::Lin { a, b, .. } = feed {
                if !a.is_zero() || !b.is_one() {
                    trivial = false;
                }
                e.push(a.clone());
                v.push(b.clone());
            }
        }
        if !trivial {
            expr = CubeExpr::Clamped {
                inner: Box::new(expr),
                alpha: BigRational::one(),
                e,
                v,
            };
        }
        return Ok(expr);
    }
    // Dead slots have no tree node; re-tabulate the composite exactly.
    let step = match &core_expr {
        CubeExpr::AffineCell(_) => 1u32,
        CubeExpr::Base(t) => {
            let mut s = BigInt::from(t.step_denom);
            for feed in &pre.feeds {
                if let Feed::Lin { a, b, .. } = feed {
                    s = num_integer::lcm(
                        s.clone(),
                        BigInt::from(t.step_denom) * a.denom() * b.numer().abs() * b.denom(),
                    );
                }
            }
            big_to_u32(&s).ok().filter(|&s| s <= 512).ok_or_else(|| {
                ChainError::Unrepresentable(
                    "dead input slots over a value table too fine to re-tabulate".to_string(),
                )
            })?
        }
        _ => {
            return Err(ChainError::Unrepresentable(
                "dead input slots over a non-tabular generator".to_string(),
            ))
        }
    };
    let side = step as usize + 1;
    if side
        .checked_pow(pre.arity as u32)
        .map_or(true, |n| n > 1 << 16)
    {
        return Err(ChainError::Unrepresentable(
            "re-tabulation of dead input slots would be too large".to_string(),
        ));
    }
    if !core_affine && !matches!(core_expr, CubeExpr::Base(_)) {
        return Err(ChainError::Unrepresentable(
            "dead input slots over a non-tabular generator".to_string(),
        ));
    }
    let dim = core_expr.dim();
    let mut err = None;
    let table = BaseTable::tabulate(pre.arity, dim, step, |p| {
        let core_in: Vec<BigRational> = pre
            .feeds
            .iter()
            .map(|f| match f {
                Feed::Const(c) => c.clone(),
                Feed::Lin { slot, a, b } => a + b * &p[*slot],
            })
            .collect();
        match core_expr.eval(&core_in) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                vec![BigRational::zero(); dim]
            }
        }
    })?;
    if let Some(e) = err {
        return Err(ChainError::Cube(e));
    }
    Ok(CubeExpr::Base(table))
}

fn warp_to_expr(inner: CubeExpr, w: &WarpLayer) -> Result<CubeExpr, ChainError> {
    // Sections are faces of the full warp: reconstruct the letter and the
    // frozen height from q, then pin those coordinates from the top down.
    let mut letters = Vec::with_capacity(w.coords.len());
    let mut pins: Vec<(usize, u32, u32)> = Vec::new();
    let one = BigRational::one();
    let two = BigRational::from_integer(BigInt::from(2));
    for (t, coord) in w.coords.iter().enumerate() {
        match coord {
            WarpCoord::Active { z } => letters.push(*z),
            WarpCoord::Section { q } => {
                let (z, c) = if q <= &one {
                    (0u8, q.clone())
                } else if q <= &two {
                    (1u8, &two - q)
                } else {
                    (2u8, q - &two)
                };
                letters.push(z);
                pins.push((t, big_to_u32(c.denom())?, big_to_u32(c.numer())?));
            }
        }
    }
    let mut expr = CubeExpr::Warp {
        inner: Box::new(inner),
        z: letters,
        tilde: w.tilde,
    };
    for (t, l, i) in pins.into_iter().rev() {
        expr = CubeExpr::Face {
            inner: Box::new(expr),
            l,
            i,
            j: t + 1,
        };
    }
    Ok(expr)
}

fn ext_to_expr(inner: CubeExpr, ext: &Ext) -> Result<CubeExpr, ChainError> {
    let zero = BigRational::zero();
    let one = BigRational::one();
    match ext {
        Ext::Slot { curve, a, b } if a == &zero && b == &one => match curve {
            SlotCurve::Zero => Ok(CubeExpr::CrossZero {
                inner: Box::new(inner),
            }),
            SlotCurve::Jag { l, k } => Ok(CubeExpr::CrossJag {
                inner: Box::new(inner),
                l: *l,
                k: *k,
            }),
        },
        Ext::Slot { .. } => Err(ChainError::Unrepresentable(
            "appended coordinate with a rescaled curve has no tree form".to_string(),
        )),
        Ext::Fixed(c) => {
            if c.is_negative() || c > &one {
                return Err(ChainError::Unrepresentable(format!(
                    "appended constant {c} lies outside [0,1]"
                )));
            }
            // Append 1−x and freeze x at 1−c.
            let arity = inner.arity();
            let l = big_to_u32(c.denom())?;
            let i_hold = c.denom() - c.numer();
            let i = big_to_u32(&i_hold)?;
            Ok(CubeExpr::Face {
                inner: Box::new(CubeExpr::CrossJag {
                    inner: Box::new(inner),
                    l: 1,
                    k: 0,
                }),
                l,
                i,
                j: arity + 1,
            })
        }
    }
}

/// Canonicalizes an expression tree into generator normal form.
impl CanonGen {
    pub fn from_expr(expr: &CubeExpr) -> Result<CanonGen, ChainError> {
        expr.validate()?;
        Ok(Self::canonicalize(expr))
    }

    fn canonicalize(expr: &CubeExpr) -> CanonGen {
        match expr {
            CubeExpr::Base(t) => CanonGen::table(t.clone()),
            CubeExpr::AffineCell(c) => CanonGen::affine(c.clone()),
            CubeExpr::Face { inner, l, i, j } => {
                let g = Self::canonicalize(inner);
                g.face(*l, *i, *j)
                    .unwrap_or_else(|_| CanonGen::assemble(Core::Opaque(expr.clone()), None, None, Vec::new()))
            }
            CubeExpr::CrossZero { inner } => Self::canonicalize(inner).cross_zero(),
            CubeExpr::CrossJag { inner, l, k } => {
                let g = Self::canonicalize(inner);
                g.cross_jag(*l, *k)
                    .unwrap_or_else(|_| CanonGen::assemble(Core::Opaque(expr.clone()), None, None, Vec::new()))
            }
            CubeExpr::Clamped { inner, alpha, e, v } => {
                let g = Self::canonicalize(inner);
                g.clamped(alpha, e, v)
                    .unwrap_or_else(|_| CanonGen::assemble(Core::Opaque(expr.clone()), None, None, Vec::new()))
            }
            CubeExpr::Warp { inner, z, tilde } => {
                let g = Self::canonicalize(inner);
                g.warp(z, *tilde)
                    .unwrap_or_else(|_| CanonGen::assemble(Core::Opaque(expr.clone()), None, None, Vec::new()))
            }
        }
    }
}

impl fmt::Display for CanonGen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.core {
            Core::Named { id, arity, dim } => write!(f, "{id}({arity}→{dim})")?,
            Core::Table(t) => write!(f, "table({}→{}@1/{})", t.arity, t.dim, t.step_denom)?,
            Core::Affine(c) => {
                write!(f, "aff[")?;
                for (i, (s, d)) in c.start.iter().zip(&c.deltas).enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    if d.is_zero() {
                        write!(f, "{s}")?;
                    } else {
                        write!(f, "{s}+{d}t")?;
                    }
                }
                write!(f, "]")?;
            }
            Core::Opaque(e) => write!(f, "expr({}→{})", e.arity(), e.dim())?,
        }
        if let Some(p) = &self.pre {
            write!(f, "∘pre{}(", p.arity)?;
            for (i, feed) in p.feeds.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                match feed {
                    Feed::Const(c) => write!(f, "={c}")?,
                    Feed::Lin { slot, a, b } => write!(f, "{a}+{b}x{slot}")?,
                }
            }
            write!(f, ")")?;
        }
        if let Some(w) = &self.warp {
            write!(f, "∘warp{}[", if w.tilde { "~" } else { "" })?;
            for (i, c) in w.coords.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                match c {
                    WarpCoord::Active { z } => write!(f, "{z}")?,
                    WarpCoord::Section { q } => write!(f, "s{q}")?,
                }
            }
            write!(f, "]")?;
        }
        for ext in &self.exts {
            match ext {
                Ext::Fixed(c) => write!(f, "×={c}")?,
                Ext::Slot { curve, a, b } => match curve {
                    SlotCurve::Zero => {
                        if a.is_zero() {
                            write!(f, "×0")?;
                        } else {
                            write!(f, "×const{a}")?;
                        }
                    }
                    SlotCurve::Jag { l, k } => {
                        if a.is_zero() && b.is_one() {
                            write!(f, "×χ({l},{k})")?;
                        } else {
                            write!(f, "×({a}+{b}χ({l},{k}))")?;
                        }
                    }
                },
            }
        }
        Ok(())
    }
}

// --- Chains ---------------------------------------------------------------

/// A finitely-supported formal combination of canonical generators of one
/// degree over one ring. No zero coefficients are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    ring: RingSpec,
    degree: usize,
    terms: BTreeMap<CanonGen, Coeff>,
}

impl Chain {
    pub fn zero(ring: RingSpec, degree: usize) -> Chain {
        Chain {
            ring,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn single(ring: RingSpec, gen: CanonGen, coeff: Coeff) -> Result<Chain, ChainError> {
        let mut c = Chain::zero(ring, gen.arity());
        c.add_term(gen, coeff)?;
        Ok(c)
    }

    pub fn generator(ring: RingSpec, gen: CanonGen) -> Chain {
        let one = ring.one();
        Chain::single(ring, gen, one).expect("unit coefficient")
    }

    pub fn ring(&self) -> &RingSpec {
        &self.ring
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CanonGen, &Coeff)> {
        self.terms.iter()
    }

    pub fn coeff_of(&self, gen: &CanonGen) -> Coeff {
        self.terms
            .get(gen)
            .cloned()
            .unwrap_or_else(|| self.ring.zero())
    }

    pub fn add_term(&mut self, gen: CanonGen, coeff: Coeff) -> Result<(), ChainError> {
        if gen.arity() != self.degree {
            return Err(ChainError::DegreeMismatch(self.degree, gen.arity()));
        }
        let coeff = self.ring.canon(&coeff)?;
        if self.ring.is_zero(&coeff) {
            return Ok(());
        }
        match self.terms.entry(gen) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = self.ring.add(e.get(), &coeff);
                if self.ring.is_zero(&sum) {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &Chain) -> Result<Chain, ChainError> {
        if self.ring != other.ring {
            return Err(ChainError::RingMismatch(
                self.ring.name(),
                other.ring.name(),
            ));
        }
        if self.degree != other.degree {
            return Err(ChainError::DegreeMismatch(self.degree, other.degree));
        }
        let mut out = self.clone();
        for (g, c) in other.iter() {
            out.add_term(g.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Chain {
        let mut out = Chain::zero(self.ring.clone(), self.degree);
        for (g, c) in self.iter() {
            out.terms.insert(g.clone(), self.ring.neg(c));
        }
        out
    }

    pub fn sub(&self, other: &Chain) -> Result<Chain, ChainError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, r: &Coeff) -> Chain {
        let mut out = Chain::zero(self.ring.clone(), self.degree);
        for (g, c) in self.iter() {
            let prod = self.ring.mul(r, c);
            // add_term drops zero products (e.g. zero divisors mod n).
            out.add_term(g.clone(), prod).expect("same degree");
        }
        out
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (g, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}·{}", self.ring.format_elem(c), g)?;
        }
        Ok(())
    }
}

/// The weighted boundary: each generator of degree `n ≥ 1` contributes
/// `Σ_{j=1}^{n} (−1)^{j+1} Σ_{i=0}^{L} m_i·⟨T⟩_{n,i,j}`; degree 0 maps to
/// the zero chain; extended linearly with like terms combined.
pub fn boundary(u: &Chain, w: &WeightVector) -> Result<Chain, ChainError> {
    if u.ring() != w.ring() {
        return Err(ChainError::RingMismatch(u.ring().name(), w.ring().name()));
    }
    let n = u.degree();
    if n == 0 {
        return Ok(Chain::zero(u.ring().clone(), 0));
    }
    let l = w.l();
    let mut out = Chain::zero(u.ring().clone(), n - 1);
    for (gen, coeff) in u.iter() {
        for j in 1..=n {
            for (i, m) in w.entries().iter().enumerate() {
                if u.ring().is_zero(m) {
                    continue;
                }
                let mut term = u.ring().mul(coeff, m);
                if j % 2 == 0 {
                    term = u.ring().neg(&term);
                }
                let face = gen.face(l, i as u32, j)?;
                out.add_term(face, term)?;
            }
        }
    }
    Ok(out)
}

// --- The ∂∘∂ certificate ---------------------------------------------------

/// How a cancelling pair was matched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    Structural,
    Lattice,
}

/// One matched pair of face-of-face terms: `(j, i, p, i')` with `j ≤ p`
/// against `(p+1, i', j, i)`, equal as generators with opposite signs.
#[derive(Debug, Clone, Serialize)]
pub struct PairedFaces {
    pub first: (usize, u32, usize, u32),
    pub second: (usize, u32, usize, u32),
    pub mode: MatchMode,
}

/// Certificate that the double boundary of a generator cancels termwise.
#[derive(Debug, Serialize)]
pub struct DdCertificate {
    pub term_count: usize,
    pub pairs: Vec<PairedFaces>,
    pub residual_terms: usize,
    pub verified: bool,
    #[serde(skip)]
    pub residual: Chain,
}

/// Expands `∂∘∂(T)` into `n(n−1)(L+1)²` face-of-face terms and pairs
/// `(j, p)` with `j ≤ p` against `(p+1, j)`. The total must vanish.
pub fn verify_dd_zero(gen: &CanonGen, w: &WeightVector) -> Result<DdCertificate, ChainError> {
    let n = gen.arity();
    let ring = w.ring().clone();
    if n <= 1 {
        return Ok(DdCertificate {
            term_count: 0,
            pairs: Vec::new(),
            residual_terms: 0,
            verified: true,
            residual: Chain::zero(ring, n.saturating_sub(1)),
        });
    }
    let l = w.l();
    let heights = l + 1;
    let m = w.entries();
    // First-level faces, indexed by (j, i).
    let mut level1: BTreeMap<(usize, u32), CanonGen> = BTreeMap::new();
    for j in 1..=n {
        for i in 0..=l {
            level1.insert((j, i), gen.face(l, i, j)?);
        }
    }
    let face2 = |j: usize, i: u32, p: usize, i2: u32| -> Result<CanonGen, ChainError> {
        level1[&(j, i)].face(l, i2, p)
    };
    let sign_of = |j: usize, p: usize| -> i64 {
        let s = if j % 2 == 1 { 1 } else { -1 };
        if p % 2 == 1 {
            s
        } else {
            -s
        }
    };
    let mut pairs = Vec::new();
    let mut residual = Chain::zero(ring.clone(), n - 2);
    let mut verified = true;
    for j in 1..=n {
        for p in j..=(n - 1) {
            for i in 0..=l {
                for i2 in 0..=l {
                    let a = face2(j, i, p, i2)?;
                    let b = face2(p + 1, i2, j, i)?;
                    let mode = if a == b {
                        MatchMode::Structural
                    } else {
                        // Lattice fallback: exact sampling on the default
                        // grid; any disagreement is a hard failure.
                        match (a.to_expr(), b.to_expr()) {
                            (Ok(ea), Ok(eb)) => match compare_maps(&ea, &eb, None) {
                                Ok(MapCompare::AgreeOnLattice { .. }) => MatchMode::Lattice,
                                _ => {
                                    verified = false;
                                    MatchMode::Lattice
                                }
                            },
                            _ => {
                                verified = false;
                                MatchMode::Lattice
                            }
                        }
                    };
                    pairs.push(PairedFaces {
                        first: (j, i, p, i2),
                        second: (p + 1, i2, j, i),
                        mode,
                    });
                    // Chain-level sum of the pair (confirms the sign flip).
                    let coeff = ring.mul(&m[i as usize], &m[i2 as usize]);
                    let s1 = sign_of(j, p);
                    let s2 = sign_of(p + 1, j);
                    debug_assert_eq!(s1, -s2);
                    let c1 = if s1 > 0 { coeff.clone() } else { ring.neg(&coeff) };
                    let c2 = if s2 > 0 { coeff.clone() } else { ring.neg(&coeff) };
                    residual.add_term(a, c1)?;
                    residual.add_term(b, c2)?;
                }
            }
        }
    }
    let term_count = n * (n - 1) * (heights as usize) * (heights as usize);
    debug_assert_eq!(pairs.len() * 2, term_count);
    // A structurally matched pair cancels termwise by key equality and the
    // sign flip, so only lattice-matched pairs (equal as maps, distinct as
    // keys) can leave a structural residue behind.
    let residual_terms = residual.len();
    debug_assert!(
        residual.is_zero() || pairs.iter().any(|p| p.mode == MatchMode::Lattice)
    );
    Ok(DdCertificate {
        term_count,
        pairs,
        residual_terms,
        verified,
        residual,
    })
}

// --- Pushforward ------------------------------------------------------------

/// Target maps the chain functor can compose with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetMap {
    Identity,
    /// Collapse everything to the constant map at a point.
    ConstantTo(Vec<BigRational>),
    /// `y ↦ scale⊙y + offset`, coordinatewise on the target.
    AxisAffine {
        scale: Vec<BigRational>,
        offset: Vec<BigRational>,
    },
}

impl TargetMap {
    /// Structural composition `self ∘ other`.
    pub fn compose(&self, other: &TargetMap) -> Result<TargetMap, ChainError> {
        Ok(match (self, other) {
            (TargetMap::Identity, g) => g.clone(),
            (f, TargetMap::Identity) => f.clone(),
            (TargetMap::ConstantTo(p), _) => TargetMap::ConstantTo(p.clone()),
            (TargetMap::AxisAffine { scale, offset }, TargetMap::ConstantTo(p)) => {
                if p.len() != scale.len() {
                    return Err(ChainError::NonComposable(format!(
                        "affine map on {} coordinates after a constant map to dimension {}",
                        scale.len(),
                        p.len()
                    )));
                }
                let q = p
                    .iter()
                    .zip(scale.iter().zip(offset))
                    .map(|(x, (s, o))| s * x + o)
                    .collect();
                TargetMap::ConstantTo(q)
            }
            (
                TargetMap::AxisAffine { scale: s2, offset: o2 },
                TargetMap::AxisAffine { scale: s1, offset: o1 },
            ) => {
                if s1.len() != s2.len() {
                    return Err(ChainError::NonComposable(format!(
                        "affine maps on {} vs {} coordinates",
                        s2.len(),
                        s1.len()
                    )));
                }
                TargetMap::AxisAffine {
                    scale: s1.iter().zip(s2).map(|(a, b)| a * b).collect(),
                    offset: o1
                        .iter()
                        .zip(s2.iter().zip(o2))
                        .map(|(o, (s, t))| s * o + t)
                        .collect(),
                }
            }
        })
    }
}

/// Composes a target map with every generator, recanonicalizes, and
/// combines like terms.
pub fn pushforward(f: &TargetMap, u: &Chain) -> Result<Chain, ChainError> {
    let mut out = Chain::zero(u.ring().clone(), u.degree());
    for (gen, coeff) in u.iter() {
        let image = match f {
            TargetMap::Identity => gen.clone(),
            TargetMap::ConstantTo(p) => CanonGen::constant(p.clone(), gen.arity()),
            TargetMap::AxisAffine { scale, offset } => gen.map_target_affine(scale, offset)?,
        };
        out.add_term(image, coeff.clone())?;
    }
    Ok(out)
}

// --- Relative chains --------------------------------------------------------

/// A chain in the pair quotient: the canonical representative drops every
/// generator the membership predicate puts in the subspace, so two relative
/// chains are equal exactly when their difference is supported in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelativeChain {
    pub chain: Chain,
    pub dropped: usize,
}

pub fn relative_reduce<F>(u: &Chain, in_subspace: F) -> RelativeChain
where
    F: Fn(&CanonGen) -> bool,
{
    let mut chain = Chain::zero(u.ring().clone(), u.degree());
    let mut dropped = 0usize;
    for (g, c) in u.iter() {
        if in_subspace(g) {
            dropped += 1;
        } else {
            chain.add_term(g.clone(), c.clone()).expect("same degree");
        }
    }
    RelativeChain { chain, dropped }
}

// --- Chain JSON --------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct RawTerm {
    gen: serde_json::Value,
    coeff: String,
}

#[derive(Serialize, Deserialize)]
struct RawChain {
    degree: usize,
    terms: Vec<RawTerm>,
}

/// Parses `{"degree":n, "terms":[{"gen":<id or expr>, "coeff":"…"}]}`,
/// canonicalizing every generator. The ring comes from context.
pub fn chain_from_json(ring: &RingSpec, json: &str) -> Result<Chain, ChainError> {
    let raw: RawChain =
        serde_json::from_str(json).map_err(|e| ChainError::BadJson(e.to_string()))?;
    let mut chain = Chain::zero(ring.clone(), raw.degree);
    for term in raw.terms {
        let gen = match &term.gen {
            serde_json::Value::String(id) => CanonGen::named(id, raw.degree, 0),
            other => {
                let expr: CubeExpr = serde_json::from_value(other.clone())
                    .map_err(|e| ChainError::BadJson(e.to_string()))?;
                CanonGen::from_expr(&expr)?
            }
        };
        let coeff = ring
            .parse_elem(&term.coeff)
            .map_err(|e| ChainError::BadJson(e.to_string()))?;
        chain.add_term(gen, coeff)?;
    }
    Ok(chain)
}

/// Serializes a chain; named generators become id strings, everything else
/// an expression tree.
pub fn chain_to_json(u: &Chain) -> Result<String, ChainError> {
    let mut terms = Vec::with_capacity(u.len());
    for (g, c) in u.iter() {
        let gen = match g.is_named() {
            Some(id) => serde_json::Value::String(id.to_string()),
            None => serde_json::to_value(g.to_expr()?)
                .map_err(|e| ChainError::BadJson(e.to_string()))?,
        };
        terms.push(RawTerm {
            gen,
            coeff: u.ring().format_elem(c),
        });
    }
    serde_json::to_string(&RawChain {
        degree: u.degree(),
        terms,
    })
    .map_err(|e| ChainError::BadJson(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::parse_rational;
    use proptest::prelude::*;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn qs(ss: &[&str]) -> Vec<BigRational> {
        ss.iter().map(|s| q(s)).collect()
    }

    fn zw(entries: &[i64]) -> WeightVector {
        WeightVector::from_i64s(RingSpec::Integers, entries).unwrap()
    }

    fn zchain(gen: CanonGen) -> Chain {
        Chain::generator(RingSpec::Integers, gen)
    }

    #[test]
    fn boundary_of_square_with_four_heights() {
        // Identity on I², L = 3, weights (9, 1, 4, −3): eight edges, the
        // vertical family with +m_i and the horizontal family with −m_i.
        let u = zchain(CanonGen::identity(2));
        let w = zw(&[9, 1, 4, -3]);
        let b = boundary(&u, &w).unwrap();
        assert_eq!(b.len(), 8);
        let m = [9i64, 1, 4, -3];
        for (i, &mi) in m.iter().enumerate() {
            let c = BigRational::new(BigInt::from(i), BigInt::from(3));
            let vertical = CanonGen::affine(
                AffineCell::new(
                    vec![c.clone(), BigRational::zero()],
                    vec![BigRational::zero(), BigRational::one()],
                )
                .unwrap(),
            );
            let horizontal = CanonGen::affine(
                AffineCell::new(
                    vec![BigRational::zero(), c],
                    vec![BigRational::one(), BigRational::zero()],
                )
                .unwrap(),
            );
            assert_eq!(b.coeff_of(&vertical), Coeff::Int(BigInt::from(mi)));
            assert_eq!(b.coeff_of(&horizontal), Coeff::Int(BigInt::from(-mi)));
        }
    }

    #[test]
    fn boundary_of_interval_endpoints() {
        let u = zchain(CanonGen::identity(1));
        let b = boundary(&u, &zw(&[1, -1])).unwrap();
        let p0 = CanonGen::affine(AffineCell::constant(qs(&["0"])));
        let p1 = CanonGen::affine(AffineCell::constant(qs(&["1"])));
        assert_eq!(b.len(), 2);
        assert_eq!(b.coeff_of(&p0), Coeff::Int(BigInt::from(1)));
        assert_eq!(b.coeff_of(&p1), Coeff::Int(BigInt::from(-1)));
    }

    #[test]
    fn boundary_vanishes_in_degree_zero_and_on_zero_chains() {
        let w = zw(&[2, 3]);
        let pt = zchain(CanonGen::affine(AffineCell::constant(qs(&["1/2"]))));
        assert!(boundary(&pt, &w).unwrap().is_zero());
        let z = Chain::zero(RingSpec::Integers, 4);
        assert!(boundary(&z, &w).unwrap().is_zero());
    }

    #[test]
    fn affine_boundary_term_count_for_unit_weights() {
        // L = 1, m = (1, −1): the boundary of an affine n-cell has exactly
        // 2n distinct face terms.
        for n in 1..=4usize {
            let b = boundary(&zchain(CanonGen::identity(n)), &zw(&[1, -1])).unwrap();
            assert_eq!(b.len(), 2 * n);
        }
    }

    #[test]
    fn double_boundary_certificate_on_cube() {
        let cert = verify_dd_zero(&CanonGen::identity(3), &zw(&[1, 1, 1])).unwrap();
        assert_eq!(cert.term_count, 54);
        assert_eq!(cert.pairs.len(), 27);
        assert!(cert.verified);
        assert!(cert.residual.is_zero());
        assert!(cert.pairs.iter().all(|p| p.mode == MatchMode::Structural));
    }

    #[test]
    fn double_boundary_certificate_is_vacuous_in_degree_one() {
        let cert = verify_dd_zero(&CanonGen::identity(1), &zw(&[5, 7])).unwrap();
        assert_eq!(cert.term_count, 0);
        assert!(cert.verified);
    }

    #[test]
    fn double_boundary_on_formal_generator() {
        // A named generator exercises the face calculus purely
        // symbolically — the certificate must close without evaluation.
        let t = CanonGen::named("T", 4, 2);
        let cert = verify_dd_zero(&t, &zw(&[9, 1, 4, -3])).unwrap();
        assert_eq!(cert.term_count, 4 * 3 * 16);
        assert!(cert.verified);
        assert!(cert.pairs.iter().all(|p| p.mode == MatchMode::Structural));
    }

    #[test]
    fn double_boundary_on_table_generator() {
        let t = BaseTable::tabulate(3, 2, 2, |p| {
            vec![&p[0] * &p[1] + q("1/3") * &p[2], &p[2] - &p[0]]
        })
        .unwrap();
        let cert = verify_dd_zero(&CanonGen::table(t), &zw(&[9, 1, 4, -3])).unwrap();
        assert_eq!(cert.term_count, 3 * 2 * 16);
        assert!(cert.verified);
    }

    #[test]
    fn faces_commute_through_jag_and_warp_layers() {
        // The rewiring (j, p) ↦ (p+1, j) must produce identical keys through
        // every layer of the canonical form at unit heights.
        let base = CanonGen::identity(2);
        let jagged = base.cross_jag(3, 1).unwrap(); // arity 3
        let warped = base.warp(&[1, 2], true).unwrap(); // arity 3
        for g in [jagged, warped] {
            for (j, p) in [(1usize, 1usize), (1, 2), (2, 2)] {
                for i in 0..=1u32 {
                    for i2 in 0..=1u32 {
                        let a = g.face(1, i, j).unwrap().face(1, i2, p).unwrap();
                        let b = g.face(1, i2, p + 1).unwrap().face(1, i, j).unwrap();
                        assert_eq!(a, b, "j={j} p={p} i={i} i2={i2}");
                    }
                }
            }
        }
    }

    #[test]
    fn canonical_eval_matches_expression_eval() {
        // Canonicalization preserves the underlying map.
        let exprs = vec![
            CubeExpr::Clamped {
                inner: Box::new(CubeExpr::AffineCell(AffineCell::identity(2))),
                alpha: q("1/3"),
                e: qs(&["2", "0"]),
                v: qs(&["-1", "1"]),
            },
            CubeExpr::Face {
                inner: Box::new(CubeExpr::Warp {
                    inner: Box::new(CubeExpr::AffineCell(AffineCell::identity(2))),
                    z: vec![1, 2],
                    tilde: false,
                }),
                l: 1,
                i: 1,
                j: 1,
            },
            CubeExpr::CrossJag {
                inner: Box::new(CubeExpr::Base(
                    BaseTable::tabulate(1, 2, 2, |p| vec![p[0].clone(), q("1/2") * &p[0]]).unwrap(),
                )),
                l: 2,
                k: 1,
            },
        ];
        for expr in exprs {
            let g = CanonGen::from_expr(&expr).unwrap();
            assert_eq!(g.arity(), expr.arity());
            assert_eq!(g.dim(), expr.dim());
            for p in crate::cubeexpr::lattice_points(expr.arity(), 4) {
                assert_eq!(g.eval(&p).unwrap(), expr.eval(&p).unwrap(), "{expr:?}");
            }
        }
    }

    #[test]
    fn round_trip_through_expression_form() {
        // Canonical generators with sections, fixed coordinates, and dead
        // slots rebuild to trees that canonicalize back to the same key.
        let warped = CanonGen::identity(2).warp(&[0, 2], false).unwrap();
        let sec = warped.face(2, 1, 1).unwrap(); // one section coordinate
        let fixed = CanonGen::identity(1).cross_jag(2, 1).unwrap().face(2, 1, 2).unwrap();
        let dead = CanonGen::constant(qs(&["1/3", "2/3"]), 2);
        for g in [sec, fixed, dead] {
            let expr = g.to_expr().unwrap();
            let back = CanonGen::from_expr(&expr).unwrap();
            assert_eq!(back, g);
        }
    }

    #[test]
    fn pushforward_identity_and_constant() {
        let u = boundary(&zchain(CanonGen::identity(2)), &zw(&[9, 1, 4, -3])).unwrap();
        assert_eq!(pushforward(&TargetMap::Identity, &u).unwrap(), u);
        let single = zchain(CanonGen::identity(2));
        let c = pushforward(&TargetMap::ConstantTo(qs(&["1/4", "1/4"])), &single).unwrap();
        assert_eq!(c.len(), 1);
        let expected = CanonGen::constant(qs(&["1/4", "1/4"]), 2);
        assert_eq!(c.coeff_of(&expected), Coeff::Int(BigInt::from(1)));
    }

    #[test]
    fn pushforward_composes_functorially() {
        let f = TargetMap::AxisAffine {
            scale: qs(&["1/2", "-1"]),
            offset: qs(&["1/4", "1"]),
        };
        let g = TargetMap::AxisAffine {
            scale: qs(&["2", "1/3"]),
            offset: qs(&["0", "1/3"]),
        };
        let u = boundary(&zchain(CanonGen::identity(2)), &zw(&[1, -1])).unwrap();
        let fg = f.compose(&g).unwrap();
        let step = pushforward(&f, &pushforward(&g, &u).unwrap()).unwrap();
        let direct = pushforward(&fg, &u).unwrap();
        assert_eq!(step, direct);
    }

    #[test]
    fn pushforward_naturality_with_boundary() {
        let f = TargetMap::AxisAffine {
            scale: qs(&["1/3", "1/3"]),
            offset: qs(&["1/3", "0"]),
        };
        let u = zchain(CanonGen::identity(2));
        let w = zw(&[2, 0, 3]);
        let lhs = pushforward(&f, &boundary(&u, &w).unwrap()).unwrap();
        let rhs = boundary(&pushforward(&f, &u).unwrap(), &w).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn pushforward_collapsing_scale_keeps_arity() {
        // Scaling axis 1 by 0 degenerates the generator but must keep its
        // slot count (the chain degree is unchanged).
        let f = TargetMap::AxisAffine {
            scale: qs(&["1", "0"]),
            offset: qs(&["0", "1/2"]),
        };
        let u = zchain(CanonGen::identity(2));
        let v = pushforward(&f, &u).unwrap();
        assert_eq!(v.degree(), 2);
        let (g, _) = v.iter().next().unwrap();
        assert_eq!(g.arity(), 2);
        assert_eq!(g.degeneracy(), Degeneracy::Degenerate);
        assert_eq!(g.eval(&qs(&["1/4", "3/4"])).unwrap(), qs(&["1/4", "1/2"]));
    }

    #[test]
    fn relative_reduction_examples() {
        let w = zw(&[1, -1]);
        let u = boundary(&zchain(CanonGen::identity(1)), &w).unwrap();
        // Subspace: the endpoint at 1.
        let in_a = |g: &CanonGen| {
            g.eval(&[]).map(|p| p == qs(&["1"])).unwrap_or(false)
        };
        let r = relative_reduce(&u, in_a);
        assert_eq!(r.chain.len(), 1);
        assert_eq!(r.dropped, 1);
        // Entirely inside the subspace → zero class.
        let all = relative_reduce(&u, |_| true);
        assert!(all.chain.is_zero());
        // Empty subspace → untouched.
        let none = relative_reduce(&u, |_| false);
        assert_eq!(none.chain, u);
        // Adding a subspace-supported chain does not change the class.
        let extra = Chain::single(
            RingSpec::Integers,
            CanonGen::affine(AffineCell::constant(qs(&["1"]))),
            Coeff::Int(BigInt::from(7)),
        )
        .unwrap();
        let shifted = relative_reduce(&u.add(&extra).unwrap(), in_a);
        assert_eq!(shifted.chain, r.chain);
    }

    #[test]
    fn chain_json_round_trip() {
        let ring = RingSpec::Integers;
        let u = boundary(&zchain(CanonGen::identity(2)), &zw(&[1, -1])).unwrap();
        let js = chain_to_json(&u).unwrap();
        let back = chain_from_json(&ring, &js).unwrap();
        assert_eq!(back, u);
        // Named generators serialize to bare id strings.
        let formal = Chain::generator(ring.clone(), CanonGen::named("T", 2, 0));
        let js = chain_to_json(&formal).unwrap();
        assert!(js.contains("\"T\""));
        assert_eq!(chain_from_json(&ring, &js).unwrap(), formal);
        // Bad input reports instead of panicking.
        assert!(chain_from_json(&ring, "{\"degree\":1}").is_err());
        assert!(chain_from_json(&ring, "{\"degree\":1,\"terms\":[{\"gen\":\"T\",\"coeff\":\"x\"}]}").is_err());
    }

    #[test]
    fn linearity_of_boundary() {
        let ring = RingSpec::Integers;
        let w = zw(&[9, 1, 4, -3]);
        let t1 = CanonGen::identity(2);
        let t2 = CanonGen::table(
            BaseTable::tabulate(2, 2, 1, |p| vec![&p[0] * &p[1], p[1].clone()]).unwrap(),
        );
        let u = Chain::single(ring.clone(), t1, Coeff::Int(BigInt::from(5))).unwrap();
        let v = Chain::single(ring.clone(), t2, Coeff::Int(BigInt::from(-2))).unwrap();
        let sum = u.add(&v).unwrap();
        let lhs = boundary(&sum, &w).unwrap();
        let rhs = boundary(&u, &w).unwrap().add(&boundary(&v, &w).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn double_boundary_cancels_on_random_tables(
            n in 1usize..=3,
            l in 1u32..=3,
            seed_vals in proptest::collection::vec(-6i64..=6, 1..=12),
        ) {
            // A pseudo-random multilinear table from the seed values.
            let dim = 2usize;
            let vals = seed_vals;
            let t = BaseTable::tabulate(n, dim, 1, |p| {
                (0..dim)
                    .map(|d| {
                        let mut acc = BigRational::from_integer(BigInt::from(
                            vals[d % vals.len()],
                        ));
                        for (k, x) in p.iter().enumerate() {
                            let c = vals[(d + k + 1) % vals.len()];
                            acc += BigRational::from_integer(BigInt::from(c)) * x;
                        }
                        acc
                    })
                    .collect()
            }).unwrap();
            let entries: Vec<i64> = (0..=l as usize)
                .map(|i| vals[i % vals.len()] - 1)
                .collect();
            let w = zw(&entries);
            let cert = verify_dd_zero(&CanonGen::table(t), &w).unwrap();
            prop_assert!(cert.verified);
            prop_assert_eq!(
                cert.term_count,
                n * n.saturating_sub(1) * ((l as usize + 1) * (l as usize + 1))
            );
        }

        #[test]
        fn boundary_is_linear_over_random_scalars(r in -9i64..=9, s in -9i64..=9) {
            let ring = RingSpec::Integers;
            let w = zw(&[2, -1, 3]);
            let u = zchain(CanonGen::identity(2));
            let v = zchain(CanonGen::table(
                BaseTable::tabulate(2, 2, 1, |p| vec![p[1].clone(), &p[0] - &p[1]]).unwrap(),
            ));
            let rc = Coeff::Int(BigInt::from(r));
            let sc = Coeff::Int(BigInt::from(s));
            let combined = u.scale(&rc).add(&v.scale(&sc)).unwrap();
            let lhs = boundary(&combined, &w).unwrap();
            let rhs = boundary(&u, &w).unwrap().scale(&rc)
                .add(&boundary(&v, &w).unwrap().scale(&sc)).unwrap();
            prop_assert_eq!(lhs, rhs);
            let _ = ring;
        }
    }
}
