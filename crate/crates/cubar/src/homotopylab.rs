//! Chain homotopies and the subdivision operator, with executable
//! verifiers for their defining identities.
//!
//! The prism homotopy Θ interpolates between the two cylinder ends of a
//! generator; its weighted analogue exists exactly when the weights span
//! the unit ideal. The subdivision operator SD replaces a generator by a
//! signed combination of its thirds, and the warp homotopy connects b·id
//! with a·SD (roles swapped for the mirror). Each verifier expands both
//! sides of the identity to chains; in the canonical generator form the
//! cancellation families of the proofs become key collisions, with an
//! exact lattice comparison as a fallback for anything that escapes them.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::chaincore::{boundary, CanonGen, Chain, ChainError};
use crate::coeff::{ncd_witness, Coeff, CoeffError, RingSpec, WeightVector};
use crate::cubeexpr::{lattice_points, step_to_denom, AffineCell, CubeError};

#[derive(Debug, Error)]
pub enum HomotopyError {
    #[error("weights do not span the unit ideal, so no homotopy inverse exists: {0}")]
    NoSpanWitness(String),
    #[error("coefficients fail the witness identity Σ r_k·m_k = 1")]
    BadBezout,
    #[error("cylinder end must be 0 or 1, got {0}")]
    BadEnd(u8),
    #[error("no subdivision class coefficient: {0}")]
    NoClassWitness(String),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("coefficient error: {0}")]
    Coeff(#[from] CoeffError),
    #[error("expression error: {0}")]
    Cube(#[from] CubeError),
}

// --- Prism homotopy ----------------------------------------------------------

/// A weight vector together with coefficients r₀..r_L witnessing
/// Σ r_k·m_k = 1, the data the prism homotopy is built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrismHomotopy {
    weight: WeightVector,
    bezout_coeffs: Vec<Coeff>,
}

impl PrismHomotopy {
    pub fn new(weight: WeightVector, bezout_coeffs: Vec<Coeff>) -> Result<Self, HomotopyError> {
        let ring = weight.ring().clone();
        if bezout_coeffs.len() != weight.entries().len() {
            return Err(HomotopyError::BadBezout);
        }
        let mut acc = ring.zero();
        for (r, m) in bezout_coeffs.iter().zip(weight.entries()) {
            acc = ring.add(&acc, &ring.mul(r, m));
        }
        if acc != ring.one() {
            return Err(HomotopyError::BadBezout);
        }
        Ok(PrismHomotopy {
            weight,
            bezout_coeffs,
        })
    }

    /// Builds the homotopy from the weight alone, solving for the witness;
    /// fails exactly when the weights do not span the unit ideal.
    pub fn from_weight(weight: WeightVector) -> Result<Self, HomotopyError> {
        match weight.span_is_unit() {
            Some(r) => PrismHomotopy::new(weight, r),
            None => Err(HomotopyError::NoSpanWitness(format!(
                "weight vector {} over {}",
                weight
                    .entries()
                    .iter()
                    .map(|c| weight.ring().format_elem(c))
                    .collect::<Vec<_>>()
                    .join(","),
                weight.ring().name()
            ))),
        }
    }

    pub fn weight(&self) -> &WeightVector {
        &self.weight
    }

    pub fn bezout_coeffs(&self) -> &[Coeff] {
        &self.bezout_coeffs
    }
}

/// The cylinder end maps: `e₀(x) = (x, 0)` and `e₁(x) = (x, 1)`.
pub fn cylinder_end(t: &CanonGen, end: u8) -> Result<CanonGen, HomotopyError> {
    let value = match end {
        0 => BigRational::from_integer(BigInt::from(0)),
        1 => BigRational::one(),
        other => return Err(HomotopyError::BadEnd(other)),
    };
    Ok(t.append_fixed(value))
}

/// The raw expansion Σ_k r_k·(ξ(T) − ψ_k(T)) as a term list, zero
/// coefficients skipped, ξ kept once per k (2(L+1) terms when all r_k ≠ 0).
pub fn theta_prism_terms(
    t: &CanonGen,
    h: &PrismHomotopy,
) -> Result<Vec<(Coeff, CanonGen)>, HomotopyError> {
    let ring = h.weight.ring();
    let l = h.weight.l();
    let xi = t.cross_zero();
    let mut terms = Vec::new();
    for (k, r) in h.bezout_coeffs.iter().enumerate() {
        if ring.is_zero(r) {
            continue;
        }
        terms.push((r.clone(), xi.clone()));
        terms.push((ring.neg(r), t.cross_jag(l, k as u32)?));
    }
    Ok(terms)
}

/// The prism chain Θ_n(T) of degree n+1, like terms combined.
pub fn theta_prism(t: &CanonGen, h: &PrismHomotopy) -> Result<Chain, HomotopyError> {
    let ring = h.weight.ring().clone();
    let mut out = Chain::zero(ring, t.arity() + 1);
    for (c, g) in theta_prism_terms(t, h)? {
        out.add_term(g, c)?;
    }
    Ok(out)
}

/// Linear extension of the prism to chains.
pub fn theta_prism_chain(u: &Chain, h: &PrismHomotopy) -> Result<Chain, HomotopyError> {
    let ring = u.ring().clone();
    let mut out = Chain::zero(ring.clone(), u.degree() + 1);
    for (g, c) in u.iter() {
        for (r, img) in theta_prism_terms(g, h)? {
            out.add_term(img, ring.mul(c, &r))?;
        }
    }
    Ok(out)
}

// --- Certificates -------------------------------------------------------------

/// How the two sides of an identity were reconciled.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCertificate {
    pub identity: String,
    pub status: String,
    /// Total expanded terms across both sides (after combining like terms).
    pub terms: usize,
    /// Unmatched terms: `coeff·generator` displays. Empty iff verified.
    pub residual: Vec<String>,
    #[serde(skip)]
    pub input: String,
    #[serde(skip)]
    pub lhs_terms: usize,
    #[serde(skip)]
    pub rhs_terms: usize,
    /// Terms that cancelled only under exact lattice comparison.
    #[serde(skip)]
    pub lattice_matched: usize,
    /// A lattice point and value identifying the first offending term.
    #[serde(skip)]
    pub witness: Option<String>,
}

impl IdentityCertificate {
    pub fn verified(&self) -> bool {
        self.status == "ok"
    }
}

/// Collapses a structural difference chain by exact evaluation on the
/// lattice: terms with identical value tables are the same map, so their
/// coefficients must cancel.
fn settle_residual(
    identity: &str,
    input: String,
    lhs: &Chain,
    rhs: &Chain,
    step_denom: u32,
) -> Result<IdentityCertificate, HomotopyError> {
    let diff = lhs.sub(rhs)?;
    let terms = lhs.len() + rhs.len();
    let mut cert = IdentityCertificate {
        identity: identity.to_string(),
        status: "ok".to_string(),
        terms,
        residual: Vec::new(),
        input,
        lhs_terms: lhs.len(),
        rhs_terms: rhs.len(),
        lattice_matched: 0,
        witness: None,
    };
    if diff.is_zero() {
        return Ok(cert);
    }
    let ring = diff.ring().clone();
    // Value-table key: exact samples at every lattice point.
    let mut classes: BTreeMap<Vec<Vec<BigRational>>, (CanonGen, Coeff)> = BTreeMap::new();
    for (g, c) in diff.iter() {
        let mut key = Vec::new();
        let mut failed = None;
        for p in lattice_points(g.arity(), step_denom) {
            match g.eval(&p) {
                Ok(v) => key.push(v),
                Err(e) => {
                    failed = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = failed {
            cert.status = "fail".to_string();
            cert.residual
                .push(format!("{}·{} (not comparable: {e})", ring.format_elem(c), g));
            continue;
        }
        match classes.entry(key) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert((g.clone(), c.clone()));
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                let sum = ring.add(&slot.get().1, c);
                slot.get_mut().1 = sum;
            }
        }
        cert.lattice_matched += 1;
    }
    for (key, (g, c)) in &classes {
        if !ring.is_zero(c) {
            cert.status = "fail".to_string();
            cert.residual.push(format!("{}·{}", ring.format_elem(c), g));
            if cert.witness.is_none() {
                let point: Vec<String> = lattice_points(g.arity(), step_denom)
                    .next()
                    .map(|p| p.iter().map(|x| x.to_string()).collect())
                    .unwrap_or_default();
                let value: Vec<String> = key
                    .first()
                    .map(|v| v.iter().map(|x| x.to_string()).collect())
                    .unwrap_or_default();
                cert.witness = Some(format!(
                    "at lattice point ({}) the term evaluates to ({})",
                    point.join(","),
                    value.join(",")
                ));
            }
        }
    }
    Ok(cert)
}

fn resolve_step(lattice_step: Option<&BigRational>, default_denom: u32) -> Result<u32, HomotopyError> {
    match lattice_step {
        Some(s) => Ok(step_to_denom(s)?),
        None => Ok(default_denom),
    }
}

/// Checks `∂_{n+1}Θ_n(T) = (−1)^{n+2}(e₀ − e₁)(T) + Θ_{n−1}∂_n(T)` by full
/// expansion of both sides.
pub fn verify_prism_identity(
    t: &CanonGen,
    h: &PrismHomotopy,
    lattice_step: Option<&BigRational>,
) -> Result<IdentityCertificate, HomotopyError> {
    let ring = h.weight.ring().clone();
    let n = t.arity();
    let step = resolve_step(lattice_step, 6 * h.weight.l().max(1))?;
    let theta = theta_prism(t, h)?;
    let lhs = boundary(&theta, &h.weight)?;
    let one = ring.one();
    let sign = if n % 2 == 0 { one.clone() } else { ring.neg(&one) };
    let mut rhs = Chain::zero(ring.clone(), n);
    rhs.add_term(cylinder_end(t, 0)?, sign.clone())?;
    rhs.add_term(cylinder_end(t, 1)?, ring.neg(&sign))?;
    if n >= 1 {
        let unit = Chain::generator(ring.clone(), t.clone());
        let db = boundary(&unit, &h.weight)?;
        rhs = rhs.add(&theta_prism_chain(&db, h)?)?;
    }
    settle_residual("lemma2", t.to_string(), &lhs, &rhs, step)
}

// --- Subdivision ----------------------------------------------------------------

/// Per-axis subdivision pieces: shift e, direction v with the clamp at 1/3.
const SD_AXIS: [(i64, i64); 3] = [(0, 1), (2, -1), (2, 1)];

/// The subdivision chain SD_n(T): `−T` in degree 0, otherwise the signed
/// sum of the 3ⁿ third-scale restrictions with sign −Π v_i.
pub fn subdivide(ring: &RingSpec, t: &CanonGen) -> Result<Chain, HomotopyError> {
    let n = t.arity();
    let mut out = Chain::zero(ring.clone(), n);
    if n == 0 {
        out.add_term(t.clone(), ring.neg(&ring.one()))?;
        return Ok(out);
    }
    let third = BigRational::new(BigInt::from(1), BigInt::from(3));
    let mut choice = vec![0usize; n];
    loop {
        let mut e = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        let mut vprod = 1i64;
        for &c in &choice {
            let (ec, vc) = SD_AXIS[c];
            e.push(BigRational::from_integer(BigInt::from(ec)));
            v.push(BigRational::from_integer(BigInt::from(vc)));
            vprod *= vc;
        }
        let coeff = ring.from_i64(-vprod);
        let gen = t.clamped(&third, &e, &v)?;
        out.add_term(gen, coeff)?;
        // Next choice vector in lexicographic order.
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(out);
            }
            choice[pos] += 1;
            if choice[pos] < SD_AXIS.len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Linear extension of subdivision to chains.
pub fn subdivide_chain(u: &Chain) -> Result<Chain, HomotopyError> {
    let ring = u.ring().clone();
    let mut out = Chain::zero(ring.clone(), u.degree());
    for (g, c) in u.iter() {
        for (img, sc) in subdivide(&ring, g)?.iter() {
            out.add_term(img.clone(), ring.mul(c, sc))?;
        }
    }
    Ok(out)
}

/// Checks `∂_n SD_n(T) = SD_{n−1} ∂_n(T)` for the weight (a, b).
pub fn verify_sd_naturality(
    ring: &RingSpec,
    t: &CanonGen,
    a: &Coeff,
    b: &Coeff,
) -> Result<IdentityCertificate, HomotopyError> {
    let w = WeightVector::new(ring.clone(), vec![a.clone(), b.clone()])?;
    let unit = Chain::generator(ring.clone(), t.clone());
    let lhs = boundary(&subdivide(ring, t)?, &w)?;
    let rhs = subdivide_chain(&boundary(&unit, &w)?)?;
    settle_residual("lemma3", t.to_string(), &lhs, &rhs, 6)
}

/// The warp prism Θ_n(T): the signed sum over z⃗ ∈ {0,1,2}ⁿ of the warp
/// wrappings, sign (−1)^{Σ z_i}; degree 0 appends the constant homotopy
/// coordinate.
pub fn theta_sd(ring: &RingSpec, t: &CanonGen, tilde: bool) -> Result<Chain, HomotopyError> {
    let n = t.arity();
    let mut out = Chain::zero(ring.clone(), n + 1);
    let mut z = vec![0u8; n];
    loop {
        let parity: u32 = z.iter().map(|&zi| zi as u32).sum();
        let coeff = if parity % 2 == 0 {
            ring.one()
        } else {
            ring.neg(&ring.one())
        };
        out.add_term(t.warp(&z, tilde)?, coeff)?;
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(out);
            }
            z[pos] += 1;
            if z[pos] < 3 {
                break;
            }
            z[pos] = 0;
            pos += 1;
        }
    }
}

/// Linear extension of the warp prism to chains.
pub fn theta_sd_chain(u: &Chain, tilde: bool) -> Result<Chain, HomotopyError> {
    let ring = u.ring().clone();
    let mut out = Chain::zero(ring.clone(), u.degree() + 1);
    for (g, c) in u.iter() {
        for (img, sc) in theta_sd(&ring, g, tilde)?.iter() {
            out.add_term(img.clone(), ring.mul(c, sc))?;
        }
    }
    Ok(out)
}

/// Checks `∂_{n+1}Θ_n(T) = (−1)^{n+2}(b·T − a·SD_n(T)) + Θ_{n−1}∂_n(T)`
/// for the weight (a, b); the mirror (tilde) exchanges a and b.
pub fn verify_sd_homotopy(
    ring: &RingSpec,
    t: &CanonGen,
    a: &Coeff,
    b: &Coeff,
    tilde: bool,
    lattice_step: Option<&BigRational>,
) -> Result<IdentityCertificate, HomotopyError> {
    let n = t.arity();
    let step = resolve_step(lattice_step, 6)?;
    let w = WeightVector::new(ring.clone(), vec![a.clone(), b.clone()])?;
    let theta = theta_sd(ring, t, tilde)?;
    let lhs = boundary(&theta, &w)?;
    let one = ring.one();
    let sign = if n % 2 == 0 { one.clone() } else { ring.neg(&one) };
    // b·T − a·SD(T), with roles of a and b exchanged for the mirror.
    let (id_coeff, sd_coeff) = if tilde { (a, b) } else { (b, a) };
    let mut rhs = Chain::zero(ring.clone(), n);
    rhs.add_term(t.clone(), ring.mul(&sign, id_coeff))?;
    let sd = subdivide(ring, t)?;
    let sd_scale = ring.neg(&ring.mul(&sign, sd_coeff));
    rhs = rhs.add(&sd.scale(&sd_scale))?;
    if n >= 1 {
        let unit = Chain::generator(ring.clone(), t.clone());
        let db = boundary(&unit, &w)?;
        rhs = rhs.add(&theta_sd_chain(&db, tilde)?)?;
    }
    let name = if tilde { "eq7~" } else { "eq7" };
    settle_residual(name, t.to_string(), &lhs, &rhs, step)
}

/// k-fold subdivision, extended linearly.
pub fn iterate_sd(u: &Chain, k: u32) -> Result<Chain, HomotopyError> {
    let mut acc = u.clone();
    for _ in 0..k {
        acc = subdivide_chain(&acc)?;
    }
    Ok(acc)
}

/// The class coefficient r_k = x_k·b^k + y_k·a^k from the Bezout witness
/// x_k·a^k + y_k·b^k = 1; at homology level r_k·[SD^{(k)}(u)] = [u].
pub fn sd_class_coeff(
    ring: &RingSpec,
    a: &Coeff,
    b: &Coeff,
    k: u32,
) -> Result<Coeff, HomotopyError> {
    let w = ncd_witness(ring, a, b, k).ok_or_else(|| {
        HomotopyError::NoClassWitness(format!(
            "powers {} and {} of ({}, {}) do not span the unit ideal",
            k,
            k,
            ring.format_elem(a),
            ring.format_elem(b)
        ))
    })?;
    if !ring.is_zero(&ring.sub(&w.g, &ring.one())) {
        return Err(HomotopyError::NoClassWitness(format!(
            "gcd of {}-th powers is {}, not a unit",
            k,
            ring.format_elem(&w.g)
        )));
    }
    let ak = ring.pow(a, k);
    let bk = ring.pow(b, k);
    Ok(ring.add(&ring.mul(&w.x, &bk), &ring.mul(&w.y, &ak)))
}

/// The exact per-axis extent bound for every term of SD^{(k)} of an affine
/// cell: its largest axis extent divided by 3^k.
pub fn mesh_diameter_bound(cell: &AffineCell, k: u32) -> BigRational {
    let mut diam = BigRational::from_integer(BigInt::from(0));
    for d in &cell.deltas {
        let a = if d < &BigRational::from_integer(BigInt::from(0)) {
            -d.clone()
        } else {
            d.clone()
        };
        if a > diam {
            diam = a;
        }
    }
    let scale = BigInt::from(3).pow(k);
    diam / BigRational::from_integer(scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::parse_rational;
    use crate::cubeexpr::BaseTable;
    use crate::sampling;
    use num_traits::Signed;
    use rand::Rng;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn qs(ss: &[&str]) -> Vec<BigRational> {
        ss.iter().map(|s| q(s)).collect()
    }

    fn zint(v: i64) -> Coeff {
        Coeff::Int(BigInt::from(v))
    }

    fn prism_z(entries: &[i64]) -> PrismHomotopy {
        let w = WeightVector::from_i64s(RingSpec::Integers, entries).unwrap();
        PrismHomotopy::from_weight(w).unwrap()
    }

    #[test]
    fn cylinder_ends_append_constants() {
        let t = CanonGen::identity(2);
        let e0 = cylinder_end(&t, 0).unwrap();
        let e1 = cylinder_end(&t, 1).unwrap();
        let p = qs(&["1/3", "3/4"]);
        assert_eq!(e0.eval(&p).unwrap(), qs(&["1/3", "3/4", "0"]));
        assert_eq!(e1.eval(&p).unwrap(), qs(&["1/3", "3/4", "1"]));
        assert_ne!(e0, e1);
        assert!(cylinder_end(&t, 2).is_err());
    }

    #[test]
    fn prism_for_unit_interval_weights() {
        let t = CanonGen::identity(1);
        let w = WeightVector::from_i64s(RingSpec::Integers, &[1, -1]).unwrap();
        let h = PrismHomotopy::new(w, vec![zint(1), zint(0)]).unwrap();
        let theta = theta_prism(&t, &h).unwrap();
        assert_eq!(theta.len(), 2);
        assert_eq!(theta.coeff_of(&t.cross_zero()), zint(1));
        assert_eq!(theta.coeff_of(&t.cross_jag(1, 0).unwrap()), zint(-1));
    }

    #[test]
    fn prism_needs_a_span_witness() {
        let w = WeightVector::from_i64s(RingSpec::Integers, &[2, 4]).unwrap();
        assert!(matches!(
            PrismHomotopy::from_weight(w),
            Err(HomotopyError::NoSpanWitness(_))
        ));
    }

    #[test]
    fn prism_expansion_term_count() {
        let w = WeightVector::from_i64s(RingSpec::Integers, &[9, 1, 4, -3]).unwrap();
        // Zero coefficients drop their pair from the expansion.
        let h = PrismHomotopy::new(w.clone(), vec![zint(1), zint(-8), zint(0), zint(0)]).unwrap();
        assert_eq!(theta_prism_terms(&CanonGen::identity(2), &h).unwrap().len(), 4);
        // All r_k nonzero at L = 3 (9·1 + 1·2 + 4·(−1) + (−3)·2 = 1): the
        // raw expansion has 2(L+1) terms; combined, ξ collapses to one.
        let h_all = PrismHomotopy::new(w, vec![zint(1), zint(2), zint(-1), zint(2)]).unwrap();
        let terms = theta_prism_terms(&CanonGen::identity(2), &h_all).unwrap();
        assert_eq!(terms.len(), 8);
        let combined = theta_prism(&CanonGen::identity(2), &h_all).unwrap();
        assert_eq!(combined.len(), 5);
    }

    #[test]
    fn prism_identity_on_interval_and_square() {
        let c1 = verify_prism_identity(&CanonGen::identity(1), &prism_z(&[1, -1]), None).unwrap();
        assert!(c1.verified(), "{:?}", c1.residual);
        assert_eq!(c1.lattice_matched, 0);
        let c2 =
            verify_prism_identity(&CanonGen::identity(2), &prism_z(&[9, 1, 4, -3]), None).unwrap();
        assert!(c2.verified(), "{:?}", c2.residual);
        assert_eq!(c2.lattice_matched, 0);
    }

    #[test]
    fn prism_identity_in_degree_zero() {
        let pt = CanonGen::affine(AffineCell::constant(qs(&["2/5", "1"])));
        let cert = verify_prism_identity(&pt, &prism_z(&[2, 3, -4]), None).unwrap();
        assert!(cert.verified(), "{:?}", cert.residual);
    }

    #[test]
    fn prism_is_linear() {
        let ring = RingSpec::Integers;
        let h = prism_z(&[9, 1, 4, -3]);
        let t1 = CanonGen::identity(2);
        let t2 = CanonGen::table(
            BaseTable::tabulate(2, 2, 1, |p| vec![&p[0] + &p[1], p[0].clone()]).unwrap(),
        );
        let u = Chain::single(ring.clone(), t1, zint(3)).unwrap();
        let v = Chain::single(ring.clone(), t2, zint(-5)).unwrap();
        let sum = u.add(&v).unwrap();
        let lhs = theta_prism_chain(&sum, &h).unwrap();
        let rhs = theta_prism_chain(&u, &h)
            .unwrap()
            .add(&theta_prism_chain(&v, &h).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn subdivision_of_the_interval() {
        // SD₁(id) = −x/3 + (2−x)/3 − (2+x)/3, as affine cells.
        let sd = subdivide(&RingSpec::Integers, &CanonGen::identity(1)).unwrap();
        assert_eq!(sd.len(), 3);
        let lo = CanonGen::affine(AffineCell::new(qs(&["0"]), qs(&["1/3"])).unwrap());
        let mid = CanonGen::affine(AffineCell::new(qs(&["2/3"]), qs(&["-1/3"])).unwrap());
        let hi = CanonGen::affine(AffineCell::new(qs(&["2/3"]), qs(&["1/3"])).unwrap());
        assert_eq!(sd.coeff_of(&lo), zint(-1));
        assert_eq!(sd.coeff_of(&mid), zint(1));
        assert_eq!(sd.coeff_of(&hi), zint(-1));
    }

    #[test]
    fn subdivision_of_the_square() {
        // The nine signed pieces of SD₂(id): (e⃗, v⃗) with sign −v₁v₂.
        let sd = subdivide(&RingSpec::Integers, &CanonGen::identity(2)).unwrap();
        assert_eq!(sd.len(), 9);
        let piece = |e: [i64; 2], v: [i64; 2]| -> CanonGen {
            let third = q("1/3");
            CanonGen::identity(2)
                .clamped(
                    &third,
                    &[
                        BigRational::from_integer(BigInt::from(e[0])),
                        BigRational::from_integer(BigInt::from(e[1])),
                    ],
                    &[
                        BigRational::from_integer(BigInt::from(v[0])),
                        BigRational::from_integer(BigInt::from(v[1])),
                    ],
                )
                .unwrap()
        };
        let expected: [([i64; 2], [i64; 2], i64); 9] = [
            ([0, 0], [1, 1], -1),
            ([2, 0], [1, 1], -1),
            ([2, 0], [-1, 1], 1),
            ([0, 2], [1, 1], -1),
            ([0, 2], [1, -1], 1),
            ([2, 2], [-1, 1], 1),
            ([2, 2], [1, 1], -1),
            ([2, 2], [1, -1], 1),
            ([2, 2], [-1, -1], -1),
        ];
        for (e, v, sign) in expected {
            assert_eq!(sd.coeff_of(&piece(e, v)), zint(sign), "e={e:?} v={v:?}");
        }
    }

    #[test]
    fn subdivision_degree_zero_and_term_counts() {
        let pt = CanonGen::affine(AffineCell::constant(qs(&["1/2"])));
        let sd0 = subdivide(&RingSpec::Integers, &pt).unwrap();
        assert_eq!(sd0.len(), 1);
        assert_eq!(sd0.coeff_of(&pt), zint(-1));
        let sd4 = subdivide(&RingSpec::Integers, &CanonGen::identity(4)).unwrap();
        assert_eq!(sd4.len(), 81);
    }

    #[test]
    fn subdivision_shrinks_each_axis_to_a_third() {
        let sd = subdivide(&RingSpec::Integers, &CanonGen::identity(2)).unwrap();
        for (g, _) in sd.iter() {
            let expr = g.to_expr().unwrap();
            match expr {
                crate::cubeexpr::CubeExpr::AffineCell(cell) => {
                    for d in &cell.deltas {
                        assert_eq!(d.abs(), q("1/3"));
                    }
                }
                other => panic!("subdivision of an affine cell stays affine, got {other:?}"),
            }
        }
    }

    #[test]
    fn naturality_of_subdivision() {
        let ring = RingSpec::Integers;
        let c1 = verify_sd_naturality(&ring, &CanonGen::identity(1), &zint(1), &zint(-1)).unwrap();
        assert!(c1.verified(), "{:?}", c1.residual);
        let c2 = verify_sd_naturality(&ring, &CanonGen::identity(2), &zint(2), &zint(3)).unwrap();
        assert!(c2.verified(), "{:?}", c2.residual);
        assert_eq!(c2.lattice_matched, 0);
        let pt = CanonGen::affine(AffineCell::constant(qs(&["1/4"])));
        let c0 = verify_sd_naturality(&ring, &pt, &zint(2), &zint(3)).unwrap();
        assert!(c0.verified());
        assert_eq!(c0.terms, 0);
    }

    #[test]
    fn warp_prism_of_the_interval() {
        let ring = RingSpec::Integers;
        let theta = theta_sd(&ring, &CanonGen::identity(1), false).unwrap();
        assert_eq!(theta.len(), 3);
        for (z, sign) in [(0u8, 1i64), (1, -1), (2, 1)] {
            let g = CanonGen::identity(1).warp(&[z], false).unwrap();
            assert_eq!(theta.coeff_of(&g), zint(sign), "z={z}");
        }
        let theta3 = theta_sd(&ring, &CanonGen::identity(3), false).unwrap();
        assert_eq!(theta3.len(), 27);
        let g11 = CanonGen::identity(2).warp(&[1, 1], false).unwrap();
        let theta2 = theta_sd(&ring, &CanonGen::identity(2), false).unwrap();
        assert_eq!(theta2.coeff_of(&g11), zint(1));
    }

    #[test]
    fn warp_homotopy_identity() {
        let ring = RingSpec::Integers;
        let cases: [(usize, i64, i64, bool); 3] =
            [(1, 1, -1, false), (2, 2, 3, false), (1, 2, 3, true)];
        for (n, a, b, tilde) in cases {
            let cert = verify_sd_homotopy(
                &ring,
                &CanonGen::identity(n),
                &zint(a),
                &zint(b),
                tilde,
                None,
            )
            .unwrap();
            assert!(
                cert.verified(),
                "n={n} a={a} b={b} tilde={tilde}: {:?}",
                cert.residual
            );
            assert_eq!(cert.lattice_matched, 0, "expected purely structural cancellation");
        }
    }

    #[test]
    fn warp_homotopy_identity_in_degree_zero() {
        let ring = RingSpec::Integers;
        let pt = CanonGen::affine(AffineCell::constant(qs(&["3/7", "0"])));
        for tilde in [false, true] {
            let cert =
                verify_sd_homotopy(&ring, &pt, &zint(2), &zint(3), tilde, None).unwrap();
            assert!(cert.verified(), "tilde={tilde}: {:?}", cert.residual);
        }
    }

    #[test]
    fn iterated_subdivision_and_class_coefficients() {
        let ring = RingSpec::Integers;
        let u = Chain::generator(ring.clone(), CanonGen::identity(1));
        let twice = iterate_sd(&u, 2).unwrap();
        assert!(twice.len() <= 9);
        assert_eq!(sd_class_coeff(&ring, &zint(2), &zint(3), 1).unwrap(), zint(-1));
        for k in 1..=4 {
            let r = sd_class_coeff(&ring, &zint(1), &zint(-1), k).unwrap();
            assert_eq!(r, zint(if k % 2 == 0 { 1 } else { -1 }));
        }
        assert!(sd_class_coeff(&ring, &zint(2), &zint(4), 1).is_err());
    }

    #[test]
    fn mesh_bound_examples() {
        let interval = AffineCell::identity(1);
        assert_eq!(mesh_diameter_bound(&interval, 0), q("1"));
        assert_eq!(mesh_diameter_bound(&interval, 2), q("1/9"));
        let square = AffineCell::identity(2);
        assert_eq!(mesh_diameter_bound(&square, 1), q("1/3"));
        let skew = AffineCell::new(qs(&["0", "1"]), qs(&["1/2", "-3/4"])).unwrap();
        assert_eq!(mesh_diameter_bound(&skew, 1), q("1/4"));
    }

    #[test]
    fn identities_on_random_tables() {
        // Small smoke suite; the full randomized batteries run in the
        // acceptance tests.
        let ring = RingSpec::Integers;
        let mut rng = sampling::seeded(0xC0FFEE);
        for round in 0..6 {
            let n = 1 + (round % 2);
            let t = CanonGen::table(sampling::random_table(&mut rng, n, 2, 2, 5));
            let w = sampling::random_unit_weight_z(&mut rng, 1 + (round % 3) as u32, 4);
            let h = PrismHomotopy::from_weight(w).unwrap();
            let cert = verify_prism_identity(&t, &h, None).unwrap();
            assert!(cert.verified(), "round {round}: {:?}", cert.residual);

            let a = zint(rng.gen_range(-5..=5));
            let b = zint(rng.gen_range(-5..=5));
            let nat = verify_sd_naturality(&ring, &t, &a, &b).unwrap();
            assert!(nat.verified(), "round {round}: {:?}", nat.residual);

            let eq7 = verify_sd_homotopy(&ring, &t, &a, &b, round % 2 == 1, None).unwrap();
            assert!(eq7.verified(), "round {round}: {:?}", eq7.residual);
        }
    }
}
