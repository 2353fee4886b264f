//! Seeded batches and the named suites.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::checks::*;
use super::gen::{instance_rng, pick, random_function, random_supported, random_weight};
use super::VerificationReport;
use crate::error::{Error, Result};
use crate::grid::{shifted_grids, shifted_grids_fitted, CubeFamily, DyadicGridSpec, GridCube, Universe};
use crate::maximal::MaximalKind;
use crate::rational::{self, int, ratio, Rational};
use crate::stepfn::{StepFunction, Weight};

pub const SUITES: &[&str] = &[
    "comparison",
    "a1-bound",
    "weak-type",
    "sharpness",
    "lp-lower",
    "expansion",
    "fujii",
    "covering",
    "dyadic",
    "stopping",
    "truncation",
    "alpha-beta",
];

const TAUS: [(i64, i64); 5] = [(1, 4), (1, 3), (1, 2), (2, 3), (3, 4)];

/// Parameters shared by the named suites. Unset fields take the defaults
/// documented on each suite.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub count: Option<usize>,
    #[serde(default, with = "rational::serde_vec_opt")]
    pub ts: Option<Vec<Rational>>,
    pub dims: Option<usize>,
    pub cells: Option<usize>,
}

/// `[0, 1)ⁿ` with `cells` cells per axis.
pub fn unit_universe(dims: usize, cells: usize) -> Universe {
    Universe::new(vec![Rational::zero(); dims], ratio(1, cells as i64), vec![cells; dims]).expect("valid universe")
}

fn random_tau(rng: &mut rand_chacha::ChaCha8Rng) -> Rational {
    let (a, b) = *pick(rng, &TAUS);
    ratio(a, b)
}

/// Alternating 16-cell line and 4×4 square, every third input non-negative,
/// each with all its grid-aligned cubes.
pub fn comparison_batch(count: usize, seed: u64) -> Vec<(StepFunction, CubeFamily)> {
    (0..count)
        .map(|i| {
            let mut rng = instance_rng(seed, i as u64);
            let u = if i % 2 == 0 { unit_universe(1, 16) } else { unit_universe(2, 4) };
            let mut f = random_function(&mut rng, &u);
            if i % 3 == 0 {
                f = f.abs();
            }
            let fam = CubeFamily::all(&u);
            (f, fam)
        })
        .collect()
}

/// Random `(f, w)` on `[0, 1)` with 32 cells or `[0, 1)²` with 8×8 cells, and
/// the standard dyadic grid fitted to it.
pub fn a1_batch(dims: usize, count: usize, seed: u64) -> Result<(Vec<(StepFunction, Weight)>, DyadicGridSpec)> {
    let u = if dims == 1 { unit_universe(1, 32) } else { unit_universe(dims, 8) };
    let grid = DyadicGridSpec::fitted(&u, vec![Rational::zero(); dims])?;
    let batch = (0..count)
        .map(|i| {
            let mut rng = instance_rng(seed ^ ((dims as u64) << 32), i as u64);
            (random_function(&mut rng, &u), random_weight(&mut rng, &u))
        })
        .collect();
    Ok((batch, grid))
}

fn dyadic_universe(i: usize) -> Universe {
    if i.is_multiple_of(2) {
        unit_universe(1, 24)
    } else {
        unit_universe(2, 12)
    }
}

/// Random inputs on `[0, 1)` (24 cells) or `[0, 1)²` (12×12), a random one of
/// the shifted grids, and a kind cycling through median, τ and average.
pub fn dyadic_batch(count: usize, seed: u64) -> Result<Vec<(StepFunction, DyadicGridSpec, MaximalKind)>> {
    (0..count)
        .map(|i| {
            let mut rng = instance_rng(seed, i as u64);
            let u = dyadic_universe(i);
            let f = random_function(&mut rng, &u);
            let grid = pick(&mut rng, &shifted_grids_fitted(&u)?).clone();
            let kind = match i % 3 {
                0 => MaximalKind::Median,
                1 => MaximalKind::tau(random_tau(&mut rng)),
                _ => MaximalKind::HlAverage,
            };
            Ok((f, grid, kind))
        })
        .collect()
}

/// As [`dyadic_batch`], with a random `τ` and `λ` among `0` and the values
/// of `|f|`.
pub fn stopping_batch(count: usize, seed: u64) -> Result<Vec<(StepFunction, DyadicGridSpec, Rational, Rational)>> {
    (0..count)
        .map(|i| {
            let mut rng = instance_rng(seed, i as u64);
            let u = dyadic_universe(i);
            let f = random_function(&mut rng, &u);
            let grid = pick(&mut rng, &shifted_grids_fitted(&u)?).clone();
            let tau = random_tau(&mut rng);
            let mut levels = f.distinct_abs_values();
            levels.push(Rational::zero());
            let lambda = pick(&mut rng, &levels).clone();
            Ok((f, grid, tau, lambda))
        })
        .collect()
}

/// Random inputs on `[−1, 1)` with `h = 1/24`.
pub fn domination_batch(count: usize, seed: u64) -> Vec<StepFunction> {
    let u = Universe::interval(&int(-1), &int(1), &ratio(1, 24)).expect("valid universe");
    (0..count).map(|i| random_function(&mut instance_rng(seed, i as u64), &u)).collect()
}

/// Compactly supported inputs whose universe leaves exactly the margin the
/// largest truncation side of the batch needs: 4 cells in a 34-cell line, or
/// 2×2 cells in an 8×8 square.
pub fn truncation_batch(count: usize, seed: u64) -> Vec<(StepFunction, MaximalKind)> {
    (0..count)
        .map(|i| {
            let mut rng = instance_rng(seed, i as u64);
            let (u, support) = if i % 2 == 0 {
                (
                    Universe::new(vec![int(0)], ratio(1, 8), vec![34]).expect("valid universe"),
                    GridCube::new(vec![15], 4),
                )
            } else {
                (
                    Universe::new(vec![int(0), int(0)], ratio(1, 8), vec![8, 8]).expect("valid universe"),
                    GridCube::new(vec![3, 3], 2),
                )
            };
            let kind = match (i / 2) % 3 {
                0 => MaximalKind::Median,
                1 => MaximalKind::tau(ratio(1, 4)),
                _ => MaximalKind::tau(ratio(1, 2)),
            };
            (random_supported(&mut rng, &u, &support), kind)
        })
        .collect()
}

/// The ramp `f(x) = x` on `[0, 1)` with `h = 1/32`.
pub fn fujii_ramp() -> StepFunction {
    let u = unit_universe(1, 32);
    StepFunction::from_cells(&u, |c| u.node(0, c[0]))
}

/// `w_{1/4}` moved into the unit window: `1/4` on `[1/4, 3/4)`, 1 elsewhere.
pub fn fujii_shifted_weight(u: &Universe) -> Weight {
    let vals = (0..u.num_cells())
        .map(|i| {
            let x = u.node(0, i);
            if x >= ratio(1, 4) && x < ratio(3, 4) {
                ratio(1, 4)
            } else {
                int(1)
            }
        })
        .collect();
    Weight::new(StepFunction::new(u.clone(), vals).expect("sized to universe")).expect("positive")
}

/// `{4h, 2h, h, h/2}`.
pub fn fujii_radii(h: &Rational) -> Vec<Rational> {
    [int(4), int(2), int(1), ratio(1, 2)].iter().map(|c| c * h).collect()
}

fn count_or(cfg: &SuiteConfig, default: usize) -> usize {
    cfg.count.unwrap_or(default)
}

/// Runs one named suite, or every suite for `"all"`.
pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    if name == "all" {
        let mut out = Vec::new();
        for s in SUITES {
            out.extend(run_suite(s, cfg)?);
        }
        return Ok(out);
    }
    let seed = cfg.seed;
    let report = match name {
        "comparison" => check_comparison(&comparison_batch(count_or(cfg, 1000), seed), Some(seed))?,
        "a1-bound" | "weak-type" => {
            let mut parts = Vec::new();
            for dims in [1, 2] {
                let (batch, grid) = a1_batch(dims, count_or(cfg, 50), seed)?;
                for tau in [ratio(1, 4), ratio(1, 2)] {
                    parts.push(if name == "a1-bound" {
                        check_a1_bound(&batch, &tau, &grid, Some(seed))?
                    } else {
                        check_weak_type(&batch, &tau, &grid, Some(seed))?
                    });
                }
            }
            VerificationReport::merge(name, parts)
        }
        "sharpness" => {
            let ts = cfg.ts.clone().unwrap_or_else(|| vec![ratio(1, 2), ratio(1, 4), ratio(1, 8)]);
            check_sharpness(&ts, &int(10), &ratio(1, 10))?
        }
        "lp-lower" => {
            let ts = cfg.ts.clone().unwrap_or_else(|| vec![ratio(1, 2), ratio(1, 8)]);
            let cases: Vec<(Rational, Rational)> =
                [int(1), int(2), int(4)].iter().flat_map(|p| ts.iter().map(move |t| (t.clone(), p.clone()))).collect();
            check_lp_lower(&cases, &int(10), &ratio(1, 10))?
        }
        "expansion" => {
            let etas = [ratio(1, 4), ratio(1, 2), ratio(3, 4)];
            match (cfg.dims, cfg.cells) {
                (None, None) => VerificationReport::merge(
                    "expansion",
                    vec![
                        check_expansion_exhaustive(1, 12, &etas, None)?,
                        check_expansion_sampled(2, 4, &ratio(1, 2), count_or(cfg, 10_000), seed, None)?,
                    ],
                ),
                (dims, cells) => {
                    let dims = dims.unwrap_or(1);
                    let cells = cells.unwrap_or(if dims == 1 { 12 } else { 4 });
                    if cells.pow(dims as u32) <= 16 {
                        check_expansion_exhaustive(dims, cells, &etas, None)?
                    } else {
                        let parts = etas
                            .iter()
                            .map(|eta| check_expansion_sampled(dims, cells, eta, count_or(cfg, 10_000), seed, None))
                            .collect::<Result<Vec<_>>>()?;
                        VerificationReport::merge("expansion", parts)
                    }
                }
            }
        }
        "fujii" => {
            let f = fujii_ramp();
            let u = f.universe().clone();
            let radii = fujii_radii(u.cell());
            VerificationReport::merge(
                "fujii",
                vec![
                    check_fujii(&f, &Weight::unit(&u), &int(1), &radii)?,
                    check_fujii(&f, &fujii_shifted_weight(&u), &int(1), &radii)?,
                ],
            )
        }
        "covering" => {
            let window = Universe::interval(&int(-2), &int(2), &ratio(1, 48))?;
            check_covering_and_domination(
                &window,
                &shifted_grids(1, (-6, 8)),
                &domination_batch(count_or(cfg, 100), seed),
                &ratio(1, 2),
                Some(seed),
            )?
        }
        "dyadic" => check_dyadic_equivalence(&dyadic_batch(count_or(cfg, 200), seed)?, Some(seed))?,
        "stopping" => check_stopping(&stopping_batch(count_or(cfg, 500), seed)?, Some(seed))?,
        "truncation" => check_truncation(&truncation_batch(count_or(cfg, 50), seed), Some(seed))?,
        "alpha-beta" => {
            let alphas: Vec<Rational> = TAUS.iter().map(|&(a, b)| ratio(a, b)).collect();
            let n = count_or(cfg, 50);
            let line = unit_universe(1, 10);
            let square = unit_universe(2, 3);
            let ws: Vec<Weight> = (0..n).map(|i| random_weight(&mut instance_rng(seed, i as u64), &line)).collect();
            let ws2: Vec<Weight> =
                (0..n).map(|i| random_weight(&mut instance_rng(seed, (n + i) as u64), &square)).collect();
            VerificationReport::merge(
                "alpha-beta",
                vec![check_alpha_beta(&ws, 10, &alphas, Some(seed))?, check_alpha_beta(&ws2, 3, &alphas, Some(seed))?],
            )
        }
        other => {
            return Err(Error::Domain(format!("unknown suite '{other}'; expected one of {} or all", SUITES.join(", "))))
        }
    };
    Ok(vec![report])
}
