//! Seeded random inputs.
//!
//! Values are `k/q` with `q ∈ {8, 64}` and `k ∈ [−q, q]`; weights are `2^j`
//! with `j ∈ [−3, 3]`, so every characteristic stays finite and exact.

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{GridCube, Universe};
use crate::rational::{self, Rational};
use crate::stepfn::{IndicatorSet, StepFunction, Weight};

/// Generator for instance `index` of a seeded batch. Independent of the
/// order in which instances are drawn.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn random_value(rng: &mut ChaCha8Rng, q: i64) -> Rational {
    rational::ratio(rng.random_range(-q..=q), q)
}

/// One denominator per function.
pub fn random_values(rng: &mut ChaCha8Rng, count: usize) -> Vec<Rational> {
    let q = if rng.random_bool(0.5) { 8 } else { 64 };
    (0..count).map(|_| random_value(rng, q)).collect()
}

pub fn random_function(rng: &mut ChaCha8Rng, u: &Universe) -> StepFunction {
    StepFunction::new(u.clone(), random_values(rng, u.num_cells())).expect("sized to universe")
}

pub fn random_weight(rng: &mut ChaCha8Rng, u: &Universe) -> Weight {
    let vals = (0..u.num_cells())
        .map(|_| {
            let j: i32 = rng.random_range(-3..=3);
            if j >= 0 {
                rational::int(1 << j)
            } else {
                rational::ratio(1, 1 << -j)
            }
        })
        .collect();
    Weight::new(StepFunction::new(u.clone(), vals).expect("sized to universe")).expect("positive")
}

/// Random values on `support`, zero elsewhere.
pub fn random_supported(rng: &mut ChaCha8Rng, u: &Universe, support: &GridCube) -> StepFunction {
    let vals = random_values(rng, support.num_cells() as usize);
    let mut out = vec![Rational::from_integer(0.into()); u.num_cells()];
    for (i, v) in support.cells(u).into_iter().zip(vals) {
        out[i] = v;
    }
    StepFunction::new(u.clone(), out).expect("sized to universe")
}

/// A uniformly random subset of `cells` of exactly `size` elements.
pub fn random_subset(rng: &mut ChaCha8Rng, u: &Universe, cells: &[usize], size: usize) -> IndicatorSet {
    let mut pool = cells.to_vec();
    let (chosen, _) = pool.partial_shuffle(rng, size);
    let mut set = IndicatorSet::empty(u);
    for &c in chosen.iter() {
        set.insert(c);
    }
    set
}

pub fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> &'a T {
    &items[rng.random_range(0..items.len())]
}
