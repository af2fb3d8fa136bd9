//! Coefficient rings and weight vectors.
//!
//! Everything downstream is parametrized by a commutative ring `R` and a
//! weight vector `m⃗ = (m₀, …, m_L)` with `L ≥ 1`. Three rings are supported:
//! the integers, the integers mod `n`, and the rationals. Ring elements are
//! exact ([`BigInt`] / [`BigRational`]); mod-`n` elements are kept as their
//! canonical residues in `[0, n)`.
//!
//! The two arithmetic facts the homotopy theory runs on live here:
//!
//! - `span_is_unit`: whether `Σ rᵢ·mᵢ = 1` is solvable, with an explicit
//!   witness `r⃗` when it is (over ℤ this is `gcd(m⃗) = 1` via the extended
//!   Euclidean algorithm).
//! - `ncd_witness`: for a pair `(a, b)` and power `k`, a Bezout witness
//!   `x·aᵏ + y·bᵏ = 1` when one exists. A pair admitting such witnesses for
//!   every `k` is *never commonly dividing*; over ℤ that is `gcd(a,b) = 1`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoeffError {
    #[error("modulus must be at least 2, got {0}")]
    BadModulus(u64),
    #[error("weight vector needs at least two entries (L ≥ 1), got {0}")]
    WeightTooShort(usize),
    #[error("cannot parse {text:?} as an element of {ring}")]
    BadElement { text: String, ring: String },
    #[error("{value} is not a {ring} element")]
    WrongRing { value: String, ring: String },
    #[error("division by a non-unit: {0}")]
    NotAUnit(String),
    #[error("ring mismatch: {0} vs {1}")]
    RingMismatch(String, String),
}

/// One of the three supported coefficient rings.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RingSpec {
    /// The ring of integers ℤ.
    Integers,
    /// The ring ℤ/n for a modulus `n ≥ 2`; elements are residues in `[0, n)`.
    IntegersModN(u64),
    /// The field of rationals ℚ.
    Rationals,
}

/// An exact ring element. `Int` carries ℤ and ℤ/n values (the latter always
/// as canonical residues), `Rat` carries ℚ values in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coeff {
    Int(BigInt),
    Rat(BigRational),
}

impl RingSpec {
    pub fn mod_n(n: u64) -> Result<Self, CoeffError> {
        if n < 2 {
            return Err(CoeffError::BadModulus(n));
        }
        Ok(RingSpec::IntegersModN(n))
    }

    /// Parses `Z`, `Q`, or `Z/n` (also accepts `Zn`), the forms the CLI takes.
    pub fn parse_name(s: &str) -> Result<Self, CoeffError> {
        let t = s.trim();
        match t {
            "Z" | "z" => return Ok(RingSpec::Integers),
            "Q" | "q" => return Ok(RingSpec::Rationals),
            _ => {}
        }
        let rest = t
            .strip_prefix("Z/")
            .or_else(|| t.strip_prefix("z/"))
            .or_else(|| t.strip_prefix("Z"))
            .or_else(|| t.strip_prefix("z"));
        if let Some(digits) = rest {
            if let Ok(n) = digits.parse::<u64>() {
                return RingSpec::mod_n(n);
            }
        }
        Err(CoeffError::BadElement {
            text: s.to_string(),
            ring: "ring name (Z, Q, Z/n)".to_string(),
        })
    }

    pub fn name(&self) -> String {
        match self {
            RingSpec::Integers => "Z".to_string(),
            RingSpec::IntegersModN(n) => format!("Z/{n}"),
            RingSpec::Rationals => "Q".to_string(),
        }
    }

    pub fn zero(&self) -> Coeff {
        match self {
            RingSpec::Rationals => Coeff::Rat(BigRational::zero()),
            _ => Coeff::Int(BigInt::zero()),
        }
    }

    pub fn one(&self) -> Coeff {
        match self {
            RingSpec::Rationals => Coeff::Rat(BigRational::one()),
            _ => Coeff::Int(BigInt::one()),
        }
    }

    pub fn from_i64(&self, v: i64) -> Coeff {
        self.canon_int(BigInt::from(v))
    }

    pub fn from_bigint(&self, v: BigInt) -> Coeff {
        self.canon_int(v)
    }

    fn canon_int(&self, v: BigInt) -> Coeff {
        match self {
            RingSpec::Integers => Coeff::Int(v),
            RingSpec::IntegersModN(n) => Coeff::Int(v.mod_floor(&BigInt::from(*n))),
            RingSpec::Rationals => Coeff::Rat(BigRational::from_integer(v)),
        }
    }

    /// Re-canonicalizes an element (residue reduction mod n; ℚ is already
    /// kept in lowest terms by construction). Errors if the value does not
    /// belong to this ring (a rational in ℤ, say).
    pub fn canon(&self, c: &Coeff) -> Result<Coeff, CoeffError> {
        match (self, c) {
            (RingSpec::Integers, Coeff::Int(v)) => Ok(Coeff::Int(v.clone())),
            (RingSpec::IntegersModN(_), Coeff::Int(v)) => Ok(self.canon_int(v.clone())),
            (RingSpec::Rationals, Coeff::Rat(v)) => Ok(Coeff::Rat(v.clone())),
            (RingSpec::Rationals, Coeff::Int(v)) => {
                Ok(Coeff::Rat(BigRational::from_integer(v.clone())))
            }
            (_, Coeff::Rat(v)) => Err(CoeffError::WrongRing {
                value: v.to_string(),
                ring: self.name(),
            }),
        }
    }

    pub fn add(&self, a: &Coeff, b: &Coeff) -> Coeff {
        match (a, b) {
            (Coeff::Int(x), Coeff::Int(y)) => self.canon_int(x + y),
            (Coeff::Rat(x), Coeff::Rat(y)) => Coeff::Rat(x + y),
            _ => panic!("mixed coefficient representations"),
        }
    }

    pub fn sub(&self, a: &Coeff, b: &Coeff) -> Coeff {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Coeff, b: &Coeff) -> Coeff {
        match (a, b) {
            (Coeff::Int(x), Coeff::Int(y)) => self.canon_int(x * y),
            (Coeff::Rat(x), Coeff::Rat(y)) => Coeff::Rat(x * y),
            _ => panic!("mixed coefficient representations"),
        }
    }

    pub fn neg(&self, a: &Coeff) -> Coeff {
        match a {
            Coeff::Int(x) => self.canon_int(-x),
            Coeff::Rat(x) => Coeff::Rat(-x),
        }
    }

    pub fn pow(&self, a: &Coeff, k: u32) -> Coeff {
        let mut acc = self.one();
        for _ in 0..k {
            acc = self.mul(&acc, a);
        }
        acc
    }

    pub fn is_zero(&self, a: &Coeff) -> bool {
        match a {
            Coeff::Int(x) => x.is_zero(),
            Coeff::Rat(x) => x.is_zero(),
        }
    }

    /// Multiplicative inverse where one exists (units of ℤ and ℤ/n, all
    /// nonzero rationals).
    pub fn invert(&self, a: &Coeff) -> Result<Coeff, CoeffError> {
        match (self, a) {
            (RingSpec::Integers, Coeff::Int(x)) => {
                if x.abs().is_one() {
                    Ok(Coeff::Int(x.clone()))
                } else {
                    Err(CoeffError::NotAUnit(x.to_string()))
                }
            }
            (RingSpec::IntegersModN(n), Coeff::Int(x)) => {
                let nn = BigInt::from(*n);
                let (g, inv, _) = ext_gcd(x, &nn);
                if g.is_one() {
                    Ok(self.canon_int(inv))
                } else {
                    Err(CoeffError::NotAUnit(format!("{x} mod {n}")))
                }
            }
            (RingSpec::Rationals, Coeff::Rat(x)) => {
                if x.is_zero() {
                    Err(CoeffError::NotAUnit("0".to_string()))
                } else {
                    Ok(Coeff::Rat(x.recip()))
                }
            }
            _ => Err(CoeffError::WrongRing {
                value: self.format_elem(a),
                ring: self.name(),
            }),
        }
    }

    /// Parses an element: an integer for ℤ and ℤ/n, `p`, `-p/q` … for ℚ.
    pub fn parse_elem(&self, s: &str) -> Result<Coeff, CoeffError> {
        let bad = || CoeffError::BadElement {
            text: s.to_string(),
            ring: self.name(),
        };
        let t = s.trim();
        match self {
            RingSpec::Rationals => {
                let r = parse_rational(t).ok_or_else(bad)?;
                Ok(Coeff::Rat(r))
            }
            _ => {
                let v = BigInt::from_str(t).map_err(|_| bad())?;
                Ok(self.canon_int(v))
            }
        }
    }

    pub fn format_elem(&self, c: &Coeff) -> String {
        match c {
            Coeff::Int(v) => v.to_string(),
            Coeff::Rat(v) => format_rational(v),
        }
    }
}

/// Parses `p` or `p/q` into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let t = s.trim();
    match t.split_once('/') {
        None => BigInt::from_str(t).ok().map(BigRational::from_integer),
        Some((num, den)) => {
            let n = BigInt::from_str(num.trim()).ok()?;
            let d = BigInt::from_str(den.trim()).ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
    }
}

/// Formats a rational as `p` or `p/q` (lowest terms, `q > 0`).
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Extended Euclid: returns `(g, x, y)` with `a·x + b·y = g = gcd(a,b) ≥ 0`.
pub fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut x0, mut x1) = (BigInt::one(), BigInt::zero());
    let (mut y0, mut y1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let (q, r) = r0.div_rem(&r1);
        r0 = std::mem::replace(&mut r1, r);
        let x = &x0 - &q * &x1;
        x0 = std::mem::replace(&mut x1, x);
        let y = &y0 - &q * &y1;
        y0 = std::mem::replace(&mut y1, y);
    }
    if r0.is_negative() {
        (-r0, -x0, -y0)
    } else {
        (r0, x0, y0)
    }
}

/// A weight vector `m⃗ = (m₀, …, m_L)`, `L ≥ 1`, over a fixed ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightVector {
    ring: RingSpec,
    entries: Vec<Coeff>,
}

impl WeightVector {
    pub fn new(ring: RingSpec, entries: Vec<Coeff>) -> Result<Self, CoeffError> {
        if entries.len() < 2 {
            return Err(CoeffError::WeightTooShort(entries.len()));
        }
        let entries = entries
            .iter()
            .map(|c| ring.canon(c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(WeightVector { ring, entries })
    }

    pub fn from_i64s(ring: RingSpec, raw: &[i64]) -> Result<Self, CoeffError> {
        let entries = raw.iter().map(|&v| ring.from_i64(v)).collect();
        WeightVector::new(ring, entries)
    }

    pub fn ring(&self) -> &RingSpec {
        &self.ring
    }

    pub fn entries(&self) -> &[Coeff] {
        &self.entries
    }

    /// The subdivision parameter `L` (one less than the entry count).
    pub fn l(&self) -> u32 {
        (self.entries.len() - 1) as u32
    }

    /// The index `σ = Σ mᵢ`, the single number controlling point homology.
    pub fn index(&self) -> Coeff {
        let mut acc = self.ring.zero();
        for m in &self.entries {
            acc = self.ring.add(&acc, m);
        }
        acc
    }

    /// Decides whether `m⃗` spans the unit ideal, returning `r⃗` with
    /// `Σ rᵢ·mᵢ = 1` when it does.
    ///
    /// Over ℤ this asks `gcd(m⃗) = 1`; over ℤ/n it asks `gcd(m̃⃗, n) = 1`
    /// for the canonical lifts; over ℚ any nonzero entry suffices.
    pub fn span_is_unit(&self) -> Option<Vec<Coeff>> {
        match &self.ring {
            RingSpec::Rationals => {
                let pos = self.entries.iter().position(|c| !self.ring.is_zero(c))?;
                let mut r = vec![self.ring.zero(); self.entries.len()];
                r[pos] = self.ring.invert(&self.entries[pos]).ok()?;
                Some(r)
            }
            RingSpec::Integers => {
                let ints: Vec<BigInt> = self.entries.iter().map(coeff_int).collect();
                let (g, xs) = ext_gcd_many(&ints);
                if g.is_one() {
                    Some(xs.into_iter().map(Coeff::Int).collect())
                } else {
                    None
                }
            }
            RingSpec::IntegersModN(n) => {
                // Solve Σ xᵢ·m̃ᵢ + s·n = 1 over ℤ, then reduce the xᵢ.
                let mut ints: Vec<BigInt> = self.entries.iter().map(coeff_int).collect();
                ints.push(BigInt::from(*n));
                let (g, mut xs) = ext_gcd_many(&ints);
                if g.is_one() {
                    xs.pop();
                    Some(xs.into_iter().map(|x| self.ring.from_bigint(x)).collect())
                } else {
                    None
                }
            }
        }
    }
}

fn coeff_int(c: &Coeff) -> BigInt {
    match c {
        Coeff::Int(v) => v.clone(),
        Coeff::Rat(_) => panic!("expected an integer coefficient"),
    }
}

/// Extended Euclid over a list: `(g, x⃗)` with `Σ xᵢ·aᵢ = g = gcd(a⃗) ≥ 0`.
fn ext_gcd_many(items: &[BigInt]) -> (BigInt, Vec<BigInt>) {
    let mut g = BigInt::zero();
    let mut xs: Vec<BigInt> = Vec::with_capacity(items.len());
    for a in items {
        if xs.is_empty() {
            g = a.abs();
            xs.push(if a.is_negative() {
                -BigInt::one()
            } else {
                BigInt::one()
            });
            continue;
        }
        let (g2, u, v) = ext_gcd(&g, a);
        for x in xs.iter_mut() {
            *x *= &u;
        }
        xs.push(v);
        g = g2;
    }
    (g, xs)
}

/// A certified solution of `x·aᵏ + y·bᵏ = g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BezoutWitness {
    pub g: Coeff,
    pub x: Coeff,
    pub y: Coeff,
    pub k: u32,
}

/// Looks for a Bezout witness `x·aᵏ + y·bᵏ = 1` in the given ring.
///
/// Over ℤ the returned `x` is the minimal-magnitude representative mod `bᵏ`
/// (so `|x| ≤ |bᵏ|` whenever `bᵏ ≠ 0`), which pins the output down uniquely
/// up to that convention. Returns `None` exactly when no witness exists.
pub fn ncd_witness(ring: &RingSpec, a: &Coeff, b: &Coeff, k: u32) -> Option<BezoutWitness> {
    let ak = ring.pow(a, k);
    let bk = ring.pow(b, k);
    match ring {
        RingSpec::Rationals => {
            let (x, y) = if !ring.is_zero(&ak) {
                (ring.invert(&ak).ok()?, ring.zero())
            } else if !ring.is_zero(&bk) {
                (ring.zero(), ring.invert(&bk).ok()?)
            } else {
                return None;
            };
            Some(BezoutWitness {
                g: ring.one(),
                x,
                y,
                k,
            })
        }
        RingSpec::Integers => {
            let av = coeff_int(&ak);
            let bv = coeff_int(&bk);
            let (g, mut x, mut y) = ext_gcd(&av, &bv);
            if !g.is_one() {
                return None;
            }
            if !bv.is_zero() {
                // Shift x by multiples of bᵏ to its least-magnitude residue.
                let babs = bv.abs();
                let mut xr = x.mod_floor(&babs);
                let alt = &xr - &babs;
                if alt.abs() < xr.abs() {
                    xr = alt;
                }
                y = (BigInt::one() - &av * &xr) / &bv;
                x = xr;
            }
            debug_assert!((&av * &x + &bv * &y).is_one());
            Some(BezoutWitness {
                g: Coeff::Int(BigInt::one()),
                x: Coeff::Int(x),
                y: Coeff::Int(y),
                k,
            })
        }
        RingSpec::IntegersModN(n) => {
            let nn = BigInt::from(*n);
            let av = coeff_int(&ak);
            let bv = coeff_int(&bk);
            // gcd(aᵏ, bᵏ) must be invertible mod n.
            let (g1, u, v) = ext_gcd(&av, &bv);
            let (g2, s, _) = ext_gcd(&g1, &nn);
            if !g2.is_one() {
                return None;
            }
            let x = ring.from_bigint(&s * u);
            let y = ring.from_bigint(&s * v);
            Some(BezoutWitness {
                g: ring.one(),
                x,
                y,
                k,
            })
        }
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Int(v) => write!(f, "{v}"),
            Coeff::Rat(v) => f.write_str(&format_rational(v)),
        }
    }
}

// --- serde: rings as {"kind":"Z"} / {"kind":"Zn","n":5} / {"kind":"Q"},
// --- ring elements as their display strings, exact at every size.

impl Serialize for RingSpec {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = ser.serialize_map(None)?;
        match self {
            RingSpec::Integers => map.serialize_entry("kind", "Z")?,
            RingSpec::Rationals => map.serialize_entry("kind", "Q")?,
            RingSpec::IntegersModN(n) => {
                map.serialize_entry("kind", "Zn")?;
                map.serialize_entry("n", n)?;
            }
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for RingSpec {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            kind: String,
            n: Option<u64>,
        }
        let raw = Raw::deserialize(de)?;
        match raw.kind.as_str() {
            "Z" => Ok(RingSpec::Integers),
            "Q" => Ok(RingSpec::Rationals),
            "Zn" => {
                let n = raw
                    .n
                    .ok_or_else(|| D::Error::custom("ring kind Zn needs a modulus field n"))?;
                RingSpec::mod_n(n).map_err(D::Error::custom)
            }
            other => Err(D::Error::custom(format!("unknown ring kind {other:?}"))),
        }
    }
}

impl Serialize for Coeff {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Coeff {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        let t = s.trim();
        if t.contains('/') {
            let r = parse_rational(t)
                .ok_or_else(|| D::Error::custom(format!("bad rational {t:?}")))?;
            Ok(Coeff::Rat(r))
        } else {
            let v = BigInt::from_str(t)
                .map_err(|e| D::Error::custom(format!("bad integer {t:?}: {e}")))?;
            Ok(Coeff::Int(v))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zint() -> RingSpec {
        RingSpec::Integers
    }

    fn wz(raw: &[i64]) -> WeightVector {
        WeightVector::from_i64s(zint(), raw).unwrap()
    }

    #[test]
    fn index_sums_entries() {
        assert_eq!(wz(&[9, 1, 4, -3]).index(), Coeff::Int(BigInt::from(11)));
        assert_eq!(wz(&[1, -1]).index(), Coeff::Int(BigInt::from(0)));
        assert_eq!(wz(&[1, 4]).index(), Coeff::Int(BigInt::from(5)));
        assert_eq!(wz(&[2, 3]).index(), Coeff::Int(BigInt::from(5)));
    }

    #[test]
    fn index_mod_n_reduces() {
        let ring = RingSpec::mod_n(6).unwrap();
        let w = WeightVector::from_i64s(ring.clone(), &[4, 5]).unwrap();
        assert_eq!(w.index(), ring.from_i64(3));
    }

    #[test]
    fn weight_needs_two_entries() {
        assert_eq!(
            WeightVector::from_i64s(zint(), &[7]).unwrap_err(),
            CoeffError::WeightTooShort(1)
        );
    }

    #[test]
    fn span_witness_over_z() {
        let w = wz(&[2, 3]);
        let r = w.span_is_unit().expect("gcd(2,3)=1");
        assert_eq!(r, vec![Coeff::Int(BigInt::from(-1)), Coeff::Int(BigInt::from(1))]);
        assert!(wz(&[2, 4]).span_is_unit().is_none());
        // A unit entry anywhere always spans.
        let w = wz(&[9, 1, 4, -3]);
        let r = w.span_is_unit().expect("gcd=1");
        let mut acc = BigInt::zero();
        for (ri, mi) in r.iter().zip(w.entries()) {
            acc += coeff_int(ri) * coeff_int(mi);
        }
        assert!(acc.is_one());
    }

    #[test]
    fn span_witness_mod_n() {
        // (2,4) has gcd 2, but 2 is invertible mod 9.
        let ring = RingSpec::mod_n(9).unwrap();
        let w = WeightVector::from_i64s(ring.clone(), &[2, 4]).unwrap();
        let r = w.span_is_unit().expect("2 spans mod 9");
        let mut acc = ring.zero();
        for (ri, mi) in r.iter().zip(w.entries()) {
            acc = ring.add(&acc, &ring.mul(ri, mi));
        }
        assert_eq!(acc, ring.one());
        // Mod 6 neither 2 nor 4 nor any combination reaches a unit.
        let ring6 = RingSpec::mod_n(6).unwrap();
        let w6 = WeightVector::from_i64s(ring6, &[2, 4]).unwrap();
        assert!(w6.span_is_unit().is_none());
    }

    #[test]
    fn span_witness_over_q() {
        let ring = RingSpec::Rationals;
        let w = WeightVector::new(
            ring.clone(),
            vec![ring.zero(), ring.parse_elem("2/3").unwrap()],
        )
        .unwrap();
        let r = w.span_is_unit().expect("nonzero entry spans over Q");
        assert_eq!(r[1], ring.parse_elem("3/2").unwrap());
        let wzero = WeightVector::new(ring.clone(), vec![ring.zero(), ring.zero()]).unwrap();
        assert!(wzero.span_is_unit().is_none());
    }

    #[test]
    fn ncd_witness_examples() {
        let ring = zint();
        let w = ncd_witness(&ring, &ring.from_i64(2), &ring.from_i64(3), 2).expect("gcd=1");
        assert_eq!(w.x, Coeff::Int(BigInt::from(-2)));
        assert_eq!(w.y, Coeff::Int(BigInt::from(1)));
        assert!(ncd_witness(&ring, &ring.from_i64(2), &ring.from_i64(4), 1).is_none());
        // b = −1: the shifted-residue convention still leaves |x| ≤ |bᵏ|.
        let w = ncd_witness(&ring, &ring.from_i64(1), &ring.from_i64(-1), 3).expect("units");
        let identity = coeff_int(&w.x) * BigInt::from(1) + coeff_int(&w.y) * BigInt::from(-1);
        assert!(identity.is_one());
    }

    #[test]
    fn ncd_witness_mod_n() {
        // gcd(2,4) = 2 is a unit mod 9, so witnesses exist at every power.
        let ring = RingSpec::mod_n(9).unwrap();
        for k in 1..=4 {
            let w = ncd_witness(&ring, &ring.from_i64(2), &ring.from_i64(4), k).expect("unit gcd");
            let lhs = ring.add(
                &ring.mul(&w.x, &ring.pow(&ring.from_i64(2), k)),
                &ring.mul(&w.y, &ring.pow(&ring.from_i64(4), k)),
            );
            assert_eq!(lhs, ring.one());
        }
        let ring6 = RingSpec::mod_n(6).unwrap();
        assert!(ncd_witness(&ring6, &ring6.from_i64(2), &ring6.from_i64(4), 1).is_none());
    }

    #[test]
    fn ring_names_round_trip() {
        for name in ["Z", "Q", "Z/7"] {
            let ring = RingSpec::parse_name(name).unwrap();
            assert_eq!(ring.name(), name);
        }
        assert!(RingSpec::parse_name("Z/1").is_err());
        assert!(RingSpec::parse_name("F4").is_err());
    }

    #[test]
    fn ring_spec_json_round_trip() {
        for ring in [
            RingSpec::Integers,
            RingSpec::Rationals,
            RingSpec::mod_n(12).unwrap(),
        ] {
            let js = serde_json::to_string(&ring).unwrap();
            let back: RingSpec = serde_json::from_str(&js).unwrap();
            assert_eq!(back, ring);
        }
        let back: RingSpec = serde_json::from_str(r#"{"kind":"Zn","n":5}"#).unwrap();
        assert_eq!(back, RingSpec::mod_n(5).unwrap());
    }

    #[test]
    fn coeff_strings_round_trip() {
        let q = RingSpec::Rationals;
        for text in ["0", "-7", "2/3", "-9/4"] {
            let c = q.parse_elem(text).unwrap();
            assert_eq!(q.format_elem(&c), text);
        }
        // Non-lowest-terms input canonicalizes.
        assert_eq!(q.format_elem(&q.parse_elem("4/6").unwrap()), "2/3");
        assert_eq!(q.format_elem(&q.parse_elem("3/1").unwrap()), "3");
    }

    proptest! {
        #[test]
        fn ext_gcd_identity(a in -1000000i64..1000000, b in -1000000i64..1000000) {
            let (g, x, y) = ext_gcd(&BigInt::from(a), &BigInt::from(b));
            prop_assert_eq!(&g, &BigInt::from(a.unsigned_abs().gcd(&b.unsigned_abs())));
            prop_assert_eq!(BigInt::from(a) * x + BigInt::from(b) * y, g);
        }

        #[test]
        fn ncd_matches_gcd_for_all_small_powers(a in -60i64..60, b in -60i64..60, k in 1u32..6) {
            let ring = RingSpec::Integers;
            let w = ncd_witness(&ring, &ring.from_i64(a), &ring.from_i64(b), k);
            let coprime = a.unsigned_abs().gcd(&b.unsigned_abs()) == 1;
            prop_assert_eq!(w.is_some(), coprime);
            if let Some(w) = w {
                let lhs = ring.add(
                    &ring.mul(&w.x, &ring.pow(&ring.from_i64(a), k)),
                    &ring.mul(&w.y, &ring.pow(&ring.from_i64(b), k)),
                );
                prop_assert_eq!(lhs, ring.one());
                if b != 0 {
                    let bk = BigInt::from(b).pow(k);
                    prop_assert!(coeff_int(&w.x).abs() <= bk.abs());
                }
            }
        }

        #[test]
        fn span_witness_identity_over_z(entries in proptest::collection::vec(-40i64..40, 2..6)) {
            let w = WeightVector::from_i64s(RingSpec::Integers, &entries).unwrap();
            let gcd = entries.iter().fold(0u64, |g, &e| g.gcd(&e.unsigned_abs()));
            match w.span_is_unit() {
                Some(r) => {
                    prop_assert_eq!(gcd, 1);
                    let mut acc = BigInt::zero();
                    for (ri, mi) in r.iter().zip(w.entries()) {
                        acc += coeff_int(ri) * coeff_int(mi);
                    }
                    prop_assert!(acc.is_one());
                }
                None => prop_assert_ne!(gcd, 1),
            }
        }

        #[test]
        fn index_is_permutation_invariant(entries in proptest::collection::vec(-50i64..50, 2..6), seed in 0u64..6) {
            let w = WeightVector::from_i64s(RingSpec::Integers, &entries).unwrap();
            let mut shuffled = entries.clone();
            shuffled.rotate_left((seed as usize) % entries.len());
            let ws = WeightVector::from_i64s(RingSpec::Integers, &shuffled).unwrap();
            prop_assert_eq!(w.index(), ws.index());
        }
    }
}
