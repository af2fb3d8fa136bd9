//! Deterministic pseudo-random inputs for the verification suites.
//!
//! Every randomized identity check in the library and the CLI draws its
//! generators and weights from here, seeded explicitly, so failures
//! reproduce from the reported seed alone.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coeff::{RingSpec, WeightVector};
use crate::cubeexpr::BaseTable;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random rational with numerator in `[-num_bound, num_bound]` and a
/// small denominator.
pub fn random_rational(rng: &mut ChaCha8Rng, num_bound: i64) -> BigRational {
    let num = rng.gen_range(-num_bound..=num_bound);
    let den = rng.gen_range(1..=4i64);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// A random piecewise multilinear generator Iⁿ → ℝ^dim.
pub fn random_table(
    rng: &mut ChaCha8Rng,
    arity: usize,
    dim: usize,
    step_denom: u32,
    num_bound: i64,
) -> BaseTable {
    BaseTable::tabulate(arity, dim, step_denom, |_| {
        (0..dim).map(|_| random_rational(rng, num_bound)).collect()
    })
    .expect("sampled table shape is valid")
}

/// A random integer weight vector with `L + 1` entries in
/// `[-bound, bound]`, not all zero.
pub fn random_weight_z(rng: &mut ChaCha8Rng, l: u32, bound: i64) -> WeightVector {
    loop {
        let entries: Vec<i64> = (0..=l).map(|_| rng.gen_range(-bound..=bound)).collect();
        if entries.iter().any(|&m| m != 0) {
            return WeightVector::from_i64s(RingSpec::Integers, &entries)
                .expect("integer weights are valid");
        }
    }
}

/// A random integer weight vector whose entries span the unit ideal
/// (gcd 1), as the prism homotopy requires.
pub fn random_unit_weight_z(rng: &mut ChaCha8Rng, l: u32, bound: i64) -> WeightVector {
    loop {
        let w = random_weight_z(rng, l, bound);
        if w.span_is_unit().is_some() {
            return w;
        }
    }
}
