//! Closed-form weighted homology of finite CW pairs.
//!
//! For a finite CW pair with coprime weight `(a, b)` over ℤ the weighted
//! homology is determined by ordinary integral homology: when the weight set
//! is `{1, −1}` the degree-`n` group is the cumulative sum `⊕_{k≤n} H_k`,
//! and otherwise it is the parity-restricted sum of the `H_k` taken with
//! ℤ_σ coefficients, `σ = a + b`.  This module evaluates that formula from
//! a table of integral groups ([`theorem4_predict`]) and cross-checks it
//! against the matrix pipelines on grid models ([`consistency_check`]).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::coeff::{CoeffError, RingSpec, WeightVector};
use crate::gridmodel::{
    boundary_terms, homology_range, pair_matrices, GridError, GridGen, GridModel, ModelPair,
};
use crate::modalg::{
    change_coefficients, homology_from_matrices, FGModulePresentation, ModAlgError,
    PresentationJson, RingMat,
};
use crate::reduce::{gamma_homology_range, ReduceError};

#[derive(Debug, thiserror::Error)]
pub enum CwError {
    #[error("weights {0} and {1} are not coprime")]
    NotCoprime(i64, i64),
    #[error("the closed form needs a two-entry weight, so the model must be closed at L=1, not L={0}")]
    WantUnitL(u32),
    #[error("integral homology tables must be given over ℤ, degree {0} is over {1}")]
    WantIntegralData(usize, String),
    #[error("no stored homology table for '{0}'")]
    UnknownSpace(String),
    #[error("bad homology JSON: {0}")]
    BadJson(String),
    #[error("point model disagrees in degree {degree}: closed form {predicted}, matrices {computed}")]
    PointMismatch {
        degree: usize,
        predicted: String,
        computed: String,
    },
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Alg(#[from] ModAlgError),
}

// --- Input tables ------------------------------------------------------------

/// Integral homology of a CW pair, one group per degree starting at 0.
/// Degrees past the end of the list are zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CWHomologyInput {
    groups: Vec<FGModulePresentation>,
}

impl CWHomologyInput {
    pub fn new(groups: Vec<FGModulePresentation>) -> Result<Self, CwError> {
        for (k, g) in groups.iter().enumerate() {
            if g.ring != RingSpec::Integers {
                return Err(CwError::WantIntegralData(k, g.ring.name().to_string()));
            }
        }
        Ok(CWHomologyInput { groups })
    }

    /// The group in degree `k` (zero past the stored range).
    pub fn group(&self, k: usize) -> FGModulePresentation {
        self.groups
            .get(k)
            .cloned()
            .unwrap_or_else(|| FGModulePresentation::zero(RingSpec::Integers))
    }

    pub fn groups(&self) -> &[FGModulePresentation] {
        &self.groups
    }

    /// Degrees at and above this bound are zero.
    pub fn degree_bound(&self) -> usize {
        self.groups.len()
    }

    pub fn from_json(json: &str) -> Result<Self, CwError> {
        let wire: HomologyJson =
            serde_json::from_str(json).map_err(|e| CwError::BadJson(e.to_string()))?;
        let mut groups = Vec::with_capacity(wire.integral_homology.len());
        for (k, p) in wire.integral_homology.iter().enumerate() {
            let mut orders = vec![BigInt::zero(); p.rank];
            for t in &p.torsion {
                let d: BigInt = t.parse().map_err(|_| {
                    CwError::BadJson(format!("degree {k}: bad torsion order '{t}'"))
                })?;
                orders.push(d);
            }
            groups.push(FGModulePresentation::from_cyclic_orders(
                RingSpec::Integers,
                &orders,
            ));
        }
        CWHomologyInput::new(groups)
    }

    pub fn to_json(&self) -> String {
        let wire = HomologyJson {
            integral_homology: self.groups.iter().map(PresentationJson::from).collect(),
        };
        serde_json::to_string_pretty(&wire).expect("homology table serializes")
    }
}

impl fmt::Display for CWHomologyInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, g) in self.groups.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "H_{k} = {g}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct HomologyJson {
    integral_homology: Vec<PresentationJson>,
}

/// Stored integral homology for spaces that have no grid model here.
pub fn classical_homology(name: &str) -> Result<CWHomologyInput, CwError> {
    match name {
        "klein" => CWHomologyInput::new(vec![
            FGModulePresentation::free(RingSpec::Integers, 1),
            FGModulePresentation::from_cyclic_orders(
                RingSpec::Integers,
                &[BigInt::zero(), BigInt::from(2)],
            ),
            FGModulePresentation::zero(RingSpec::Integers),
        ]),
        other => Err(CwError::UnknownSpace(other.to_string())),
    }
}

// --- The closed form ---------------------------------------------------------

/// True when the weight sum is a unit, so every ℤ_σ factor collapses and the
/// closed form is trivially zero; callers should surface this as a warning.
pub fn unit_index(a: i64, b: i64) -> bool {
    (a + b).abs() == 1
}

/// Reads a coefficient-changed group back as an abelian group over ℤ
/// (free ℤ/n summands become order-n cyclics).
fn as_abelian(p: &FGModulePresentation) -> FGModulePresentation {
    let mut orders: Vec<BigInt> = Vec::new();
    match &p.ring {
        RingSpec::IntegersModN(n) => orders.extend(vec![BigInt::from(*n); p.free_rank]),
        _ => orders.extend(vec![BigInt::zero(); p.free_rank]),
    }
    orders.extend(p.torsion.iter().cloned());
    FGModulePresentation::from_cyclic_orders(RingSpec::Integers, &orders)
}

/// The degree-`k` group with ℤ_σ coefficients, as an abelian group.
pub fn coefficient_homology(input: &CWHomologyInput, sigma: &BigInt, k: usize) -> FGModulePresentation {
    as_abelian(&change_coefficients(&input.groups, sigma, k))
}

/// The weighted homology of a CW pair in degree `n` for a coprime weight
/// `(a, b)`, evaluated from its integral homology: the cumulative sum of the
/// integral groups when the weight set is `{1, −1}`, and otherwise the sum of
/// the same-parity groups up to `n` taken with ℤ_(a+b) coefficients.
pub fn theorem4_predict(
    input: &CWHomologyInput,
    a: i64,
    b: i64,
    n: usize,
) -> Result<FGModulePresentation, CwError> {
    if a.gcd(&b) != 1 {
        return Err(CwError::NotCoprime(a, b));
    }
    let mut out = FGModulePresentation::zero(RingSpec::Integers);
    if (a == 1 && b == -1) || (a == -1 && b == 1) {
        for k in 0..=n {
            out = out.direct_sum(&input.group(k));
        }
        return Ok(out);
    }
    // Coprimality rules out any other weight summing to zero.
    let sigma = BigInt::from(a) + BigInt::from(b);
    let mut k = n % 2;
    while k <= n {
        out = out.direct_sum(&coefficient_homology(input, &sigma, k));
        k += 2;
    }
    Ok(out)
}

// --- Integral homology of a grid model --------------------------------------

/// Bases and boundary matrices of the bare relative complex `C(X)/C(A)` over
/// ℤ with the unit weight: towers dropped, sub-model generators dropped.
fn relative_closure_matrices(
    x: &GridModel,
    a: &GridModel,
    w: &WeightVector,
    max_n: usize,
) -> Result<(Vec<Vec<GridGen>>, Vec<RingMat>), CwError> {
    if x.dim() != a.dim() || x.l() != a.l() {
        return Err(GridError::NotSubcomplex(
            "sub-model shape differs from the model".to_string(),
        )
        .into());
    }
    for level in a.levels() {
        for g in level {
            if !x.contains(g) {
                return Err(GridError::NotSubcomplex(format!(
                    "sub-model generator {g} is not in the model"
                ))
                .into());
            }
        }
    }
    let ring = w.ring();
    let mut bases: Vec<Vec<GridGen>> = Vec::with_capacity(max_n + 2);
    for n in 0..=max_n + 1 {
        let level: Vec<GridGen> = x
            .levels()
            .get(n)
            .map(|l| l.iter().filter(|g| !a.contains(g)).cloned().collect())
            .unwrap_or_default();
        bases.push(level);
    }
    let mut mats = Vec::with_capacity(max_n + 2);
    for n in 0..=max_n + 1 {
        let rows = if n == 0 { 0 } else { bases[n - 1].len() };
        let mut m = RingMat::zero(ring.clone(), rows, bases[n].len());
        if n > 0 {
            for (j, g) in bases[n].iter().enumerate() {
                for (face, c) in boundary_terms(g, w, x.l())? {
                    if ring.is_zero(&c) || a.contains(&face) {
                        continue;
                    }
                    let i = bases[n - 1]
                        .iter()
                        .position(|h| *h == face)
                        .ok_or_else(|| {
                            GridError::Internal("face escapes the complement basis".to_string())
                        })?;
                    m.set(i, j, c);
                }
            }
        }
        mats.push(m);
    }
    Ok((bases, mats))
}

/// Integral homology of a model pair at `L = 1`, degrees `0..=max_n`: the
/// Γ-quotient pipeline at the zero-sum unit weight, which is the classical
/// finite cubical complex of the carrier (relative to the sub-model if one
/// is present).
pub fn integral_model_homology(
    pair: &ModelPair,
    max_n: usize,
) -> Result<Vec<FGModulePresentation>, CwError> {
    if pair.space.l() != 1 {
        return Err(CwError::WantUnitL(pair.space.l()));
    }
    let w = WeightVector::from_i64s(RingSpec::Integers, &[1, -1])?;
    match &pair.sub {
        None => Ok(gamma_homology_range(&pair.space, &w, max_n)?),
        Some(a) => {
            let (_, mats) = relative_closure_matrices(&pair.space, a, &w, max_n)?;
            let mut out = Vec::with_capacity(max_n + 1);
            for n in 0..=max_n {
                out.push(homology_from_matrices(
                    &RingSpec::Integers,
                    &mats[n],
                    &mats[n + 1],
                )?);
            }
            Ok(out)
        }
    }
}

// --- Consistency against the matrix pipelines --------------------------------

/// Per-degree comparison of the closed form against the raw weighted
/// homology of the same model.
#[derive(Debug, Clone)]
pub struct ConsistencyReport {
    pub a: i64,
    pub b: i64,
    pub sigma: i64,
    pub max_degree: usize,
    /// Integral homology of the pair, the input to the closed form.
    pub integral: Vec<FGModulePresentation>,
    /// Closed-form value per degree.
    pub predicted: Vec<FGModulePresentation>,
    /// Raw weighted homology of the model complex per degree.
    pub computed: Vec<FGModulePresentation>,
    pub agree: Vec<bool>,
    pub all_agree: bool,
    pub unit_index_warning: bool,
}

fn is_point_model(pair: &ModelPair) -> bool {
    pair.sub.is_none()
        && pair.space.top_degree() == 0
        && pair.space.levels().first().map(Vec::len) == Some(1)
}

/// Computes the integral homology of the pair, evaluates the closed form for
/// `(a, b)`, recomputes the same degrees from the raw weighted boundary
/// matrices, and compares.  A mismatch on a one-point model is a hard error;
/// on other models it is recorded per degree in the report.
pub fn consistency_check(
    pair: &ModelPair,
    a: i64,
    b: i64,
    max_degree: usize,
) -> Result<ConsistencyReport, CwError> {
    if a.gcd(&b) != 1 {
        return Err(CwError::NotCoprime(a, b));
    }
    if pair.space.l() != 1 {
        return Err(CwError::WantUnitL(pair.space.l()));
    }
    let integral = integral_model_homology(pair, max_degree)?;
    let input = CWHomologyInput::new(integral.clone())?;
    let mut predicted = Vec::with_capacity(max_degree + 1);
    for n in 0..=max_degree {
        predicted.push(theorem4_predict(&input, a, b, n)?);
    }

    let w = WeightVector::from_i64s(RingSpec::Integers, &[a, b])?;
    let computed = match &pair.sub {
        None => homology_range(&pair.space, &w, max_degree)?,
        Some(sub) => {
            let pm = pair_matrices(&pair.space, Some(sub), &w, max_degree + 1)?;
            let mut out = Vec::with_capacity(max_degree + 1);
            for n in 0..=max_degree {
                out.push(homology_from_matrices(
                    &RingSpec::Integers,
                    &pm.mats[n],
                    &pm.mats[n + 1],
                )?);
            }
            out
        }
    };

    let point = is_point_model(pair);
    let mut agree = Vec::with_capacity(max_degree + 1);
    for n in 0..=max_degree {
        let ok = predicted[n] == computed[n];
        if !ok && point {
            return Err(CwError::PointMismatch {
                degree: n,
                predicted: predicted[n].to_string(),
                computed: computed[n].to_string(),
            });
        }
        agree.push(ok);
    }
    let all_agree = agree.iter().all(|&x| x);
    Ok(ConsistencyReport {
        a,
        b,
        sigma: a + b,
        max_degree,
        integral,
        predicted,
        computed,
        agree,
        all_agree,
        unit_index_warning: unit_index(a, b),
    })
}
