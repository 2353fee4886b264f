//! One function per claim, each over a batch of explicit inputs.

use std::time::Instant;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{aggregate, fmt, Outcome, Verdict, VerificationReport};
use crate::error::{Error, Result};
use crate::grid::{covering_cube, CubeFamily, DyadicGridSpec, GridCube, Universe};
use crate::maximal::sets::expansion_with;
use crate::maximal::{
    brute_maximal, dominated, domination_bound, dyadic_maximal, expansion_check_refined, maximal_all_cubes,
    median_mollify, refine_set, stopping_cubes, truncation_radius, ExpansionOutcome, MaximalKind, SetMaximal,
};
use crate::median;
use crate::rational::{self, Rational};
use crate::stepfn::{
    count_cmp, l1_norm, lp_norm, weighted_measure, Cmp, IndicatorSet, NormValue, StepFunction, Weight,
};
use crate::weights::{a1_characteristic, alpha_beta_profile, sharpness_weight, CharValue};

/// Relative tolerance for floating `L^p` comparisons.
pub const LP_TOLERANCE: f64 = 1e-9;

/// The complete input of one instance of one claim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Comparison {
        f: StepFunction,
        family: CubeFamily,
    },
    A1Bound {
        f: StepFunction,
        w: Weight,
        #[serde(with = "rational::serde_str")]
        tau: Rational,
        grid: DyadicGridSpec,
    },
    WeakType {
        f: StepFunction,
        w: Weight,
        #[serde(with = "rational::serde_str")]
        tau: Rational,
        grid: DyadicGridSpec,
    },
    Sharpness {
        #[serde(with = "rational::serde_str")]
        t: Rational,
        #[serde(with = "rational::serde_str")]
        radius: Rational,
        #[serde(with = "rational::serde_str")]
        cell: Rational,
    },
    LpLower {
        #[serde(with = "rational::serde_str")]
        t: Rational,
        #[serde(with = "rational::serde_str")]
        p: Rational,
        #[serde(with = "rational::serde_str")]
        radius: Rational,
        #[serde(with = "rational::serde_str")]
        cell: Rational,
    },
    Expansion {
        set: IndicatorSet,
        cube: GridCube,
        #[serde(with = "rational::serde_str")]
        eta: Rational,
        refine: usize,
    },
    Fujii {
        f: StepFunction,
        w: Weight,
        #[serde(with = "rational::serde_str")]
        p: Rational,
        #[serde(with = "rational::serde_vec")]
        radii: Vec<Rational>,
    },
    Covering {
        universe: crate::grid::Universe,
        cube: GridCube,
        grids: Vec<DyadicGridSpec>,
    },
    Domination {
        f: StepFunction,
        #[serde(with = "rational::serde_str")]
        tau: Rational,
    },
    Dyadic {
        f: StepFunction,
        grid: DyadicGridSpec,
        op: MaximalKind,
    },
    Stopping {
        f: StepFunction,
        grid: DyadicGridSpec,
        #[serde(with = "rational::serde_str")]
        tau: Rational,
        #[serde(with = "rational::serde_str")]
        lambda: Rational,
    },
    Truncation {
        f: StepFunction,
        op: MaximalKind,
    },
    AlphaBeta {
        w: Weight,
        max_side: usize,
        #[serde(with = "rational::serde_vec")]
        alphas: Vec<Rational>,
    },
}

impl Witness {
    pub fn evaluate(&self) -> Result<Verdict> {
        match self {
            Witness::Comparison { f, family } => comparison_verdict(f, family),
            Witness::A1Bound { f, w, tau, grid } => A1Context::new(f, w, tau, grid)?.a1_verdict(),
            Witness::WeakType { f, w, tau, grid } => A1Context::new(f, w, tau, grid)?.weak_verdict(),
            Witness::Sharpness { t, radius, cell } => {
                let s = SharpnessSetup::new(radius, cell)?;
                s.verdict(t)
            }
            Witness::LpLower { t, p, radius, cell } => SharpnessSetup::new(radius, cell)?.lp_verdict(t, p),
            Witness::Expansion { set, cube, eta, refine } => {
                Ok(expansion_verdict(&expansion_check_refined(set, cube, eta, *refine)?))
            }
            Witness::Fujii { f, w, p, radii } => Ok(fujii_verdict(&fujii_errors(f, w, p, radii)?)),
            Witness::Covering { universe, cube, grids } => covering_verdict(universe, cube, grids),
            Witness::Domination { f, tau } => domination_verdict(f, tau),
            Witness::Dyadic { f, grid, op } => dyadic_verdict(f, grid, op),
            Witness::Stopping { f, grid, tau, lambda } => stopping_verdict(f, grid, tau, lambda),
            Witness::Truncation { f, op } => truncation_verdict(f, op),
            Witness::AlphaBeta { w, max_side, alphas } => alpha_beta_verdict(w, *max_side, alphas),
        }
    }
}

fn run_batch<T: Sync>(
    claim: &str,
    seed: Option<u64>,
    items: &[T],
    notes: Vec<String>,
    eval: impl Fn(&T) -> Result<Verdict> + Sync,
    witness: impl Fn(&T) -> Witness + Sync,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let outcomes =
        items.par_iter().map(|it| eval(it).map(|v| Outcome::new(v, || witness(it)))).collect::<Result<Vec<_>>>()?;
    Ok(aggregate(claim, seed, start, outcomes, notes))
}

// ---------------------------------------------------------------- comparison

fn comparison_verdict(f: &StepFunction, family: &CubeFamily) -> Result<Verdict> {
    let half = rational::ratio(1, 2);
    let nonneg = f.is_nonnegative();
    let mut v = Verdict::default();
    for q in family.enumerate_cubes()? {
        let m = median::median_max_abs(f, &q)?;
        let mh = median::tau_median(f, &q, &half)?;
        if m.abs() > mh || (nonneg && m != mh) {
            v.fail(format!("cube {q:?}: m_f = {}, m^1/2_f = {}", fmt(&m), fmt(&mh)));
            return Ok(v);
        }
        if mh.is_positive() {
            v.observe(CharValue::Exact(m.abs() / &mh));
        }
    }
    let a = brute_maximal(f, family, &MaximalKind::Median)?;
    let b = brute_maximal(f, family, &MaximalKind::tau(half))?;
    if !dominated(&a, &b) {
        v.fail("cellwise median maximal function exceeds the 1/2-maximal function".into());
    } else if nonneg && a != b {
        v.fail("median and 1/2-maximal functions differ for a non-negative input".into());
    }
    Ok(v)
}

/// `|m_f(Q)| ≤ m^{1/2}_f(Q)` on every family cube and `𝓜f ≤ 𝓜^{1/2}f`
/// cellwise, with equality for `f ≥ 0`. Ratio: `|m_f(Q)| / m^{1/2}_f(Q)`.
pub fn check_comparison(batch: &[(StepFunction, CubeFamily)], seed: Option<u64>) -> Result<VerificationReport> {
    run_batch(
        "comparison",
        seed,
        batch,
        Vec::new(),
        |(f, fam)| comparison_verdict(f, fam),
        |(f, fam)| Witness::Comparison { f: f.clone(), family: fam.clone() },
    )
}

// --------------------------------------------------------- weighted L¹ bound

struct A1Context<'a> {
    f: &'a StepFunction,
    w: &'a Weight,
    tau: &'a Rational,
    m: StepFunction,
    a1: Rational,
    f_norm: Rational,
}

impl<'a> A1Context<'a> {
    /// `[w]_{A₁}` is taken over the grid's own cubes, the only cubes the
    /// dyadic argument uses; it never exceeds the all-cube value.
    fn new(f: &'a StepFunction, w: &'a Weight, tau: &'a Rational, grid: &DyadicGridSpec) -> Result<Self> {
        let m = dyadic_maximal(f, grid, &MaximalKind::tau(tau.clone()))?;
        let c = a1_characteristic(w, &CubeFamily::dyadic(f.universe(), grid.clone()))?;
        let a1 =
            c.value.exact().cloned().ok_or_else(|| Error::Precondition("[w]_A1 is infinite over the grid".into()))?;
        let f_norm = l1_norm(f, w)?;
        Ok(A1Context { f, w, tau, m, a1, f_norm })
    }

    fn a1_verdict(&self) -> Result<Verdict> {
        if self.f_norm.is_zero() {
            return Ok(Verdict::skipped());
        }
        let mut v = Verdict::default();
        let ratio = l1_norm(&self.m, self.w)? * self.tau / (&self.a1 * &self.f_norm);
        if ratio > rational::int(4) {
            v.fail(format!("ratio {} > 4", fmt(&ratio)));
        }
        v.observe(CharValue::Exact(ratio));
        Ok(v)
    }

    fn weak_verdict(&self) -> Result<Verdict> {
        let mut v = Verdict::default();
        let constant = &self.a1 / self.tau;
        let mut levels = self.m.distinct_abs_values();
        if !levels.iter().any(|x| x.is_zero()) {
            levels.insert(0, Rational::zero());
        }
        for lambda in &levels {
            let lhs = weighted_measure(self.w, &self.m.level_set(Cmp::Gt, lambda, false))?;
            let rhs = &constant * weighted_measure(self.w, &self.f.level_set(Cmp::Gt, lambda, true))?;
            if lhs > rhs {
                v.flags.push(format!(
                    "λ = {}: w(super-level set) = {} > τ⁻¹[w]_A1·w(|f| > λ) = {}",
                    fmt(lambda),
                    fmt(&lhs),
                    fmt(&rhs)
                ));
            } else if rhs.is_positive() {
                v.observe(CharValue::Exact(lhs / rhs));
            }
        }
        Ok(v)
    }
}

/// `‖𝓜^τ_𝒟 f‖_{L¹(w)} ≤ 4τ⁻¹[w]_{A₁}‖f‖_{L¹(w)}`. Ratio: the left side over
/// `τ⁻¹[w]_{A₁}‖f‖_{L¹(w)}`, bounded by 4. Inputs with `‖f‖ = 0` are skipped.
pub fn check_a1_bound(
    batch: &[(StepFunction, Weight)],
    tau: &Rational,
    grid: &DyadicGridSpec,
    seed: Option<u64>,
) -> Result<VerificationReport> {
    run_batch(
        "a1-bound",
        seed,
        batch,
        vec![format!("tau = {}", fmt(tau))],
        |(f, w)| A1Context::new(f, w, tau, grid)?.a1_verdict(),
        |(f, w)| Witness::A1Bound { f: f.clone(), w: w.clone(), tau: tau.clone(), grid: grid.clone() },
    )
}

/// `w({𝓜^τ_𝒟 f > λ}) ≤ τ⁻¹[w]_{A₁}·w({|f| > λ})` for every `λ` among the
/// values of `𝓜^τ_𝒟 f`. Both sides are constant between consecutive values,
/// so the sweep is complete. Exceedances are flagged, not failed: only the
/// integrated `L¹` bound is normative. Ratio: left over right side.
pub fn check_weak_type(
    batch: &[(StepFunction, Weight)],
    tau: &Rational,
    grid: &DyadicGridSpec,
    seed: Option<u64>,
) -> Result<VerificationReport> {
    run_batch(
        "weak-type",
        seed,
        batch,
        vec![format!("tau = {}", fmt(tau))],
        |(f, w)| A1Context::new(f, w, tau, grid)?.weak_verdict(),
        |(f, w)| Witness::WeakType { f: f.clone(), w: w.clone(), tau: tau.clone(), grid: grid.clone() },
    )
}

// ----------------------------------------------------------------- sharpness

/// `χ_{[−1,1)}` on `[−R, R)` and its `1/2`-maximal function.
#[derive(Clone, Debug, PartialEq)]
pub struct SharpnessSetup {
    pub universe: Universe,
    pub f: StepFunction,
    pub maximal: StepFunction,
}

impl SharpnessSetup {
    pub fn new(radius: &Rational, cell: &Rational) -> Result<Self> {
        let universe = Universe::interval(&-radius, radius, cell)?;
        let f = StepFunction::box_indicator(&universe, &-Rational::one(), &Rational::one());
        let kind = MaximalKind::tau(rational::ratio(1, 2));
        let trunc = truncation_radius(&f, &kind)?;
        if !trunc.exact {
            let need = Rational::one() + &trunc.max_side - cell;
            return Err(Error::UniverseTooSmall(format!(
                "[−{0}, {0}) is too small: truncation side {1} needs radius at least {2}",
                fmt(radius),
                fmt(&trunc.max_side),
                fmt(&need)
            )));
        }
        let maximal = maximal_all_cubes(&f, &kind)?;
        Ok(SharpnessSetup { universe, f, maximal })
    }

    fn expected_maximal(&self) -> StepFunction {
        StepFunction::box_indicator(&self.universe, &rational::int(-3), &rational::int(3))
    }

    pub fn l1_ratio(&self, t: &Rational) -> Result<Rational> {
        let w = sharpness_weight(&self.universe, t)?;
        Ok(l1_norm(&self.maximal, &w)? / l1_norm(&self.f, &w)?)
    }

    fn verdict(&self, t: &Rational) -> Result<Verdict> {
        let mut v = Verdict::default();
        if self.maximal != self.expected_maximal() {
            v.fail("maximal function of χ_[−1,1) is not χ_[−3,3)".into());
        }
        let ratio = self.l1_ratio(t)?;
        let expected = sharpness_value(t);
        if ratio != expected {
            v.fail(format!("t = {}: ratio {} ≠ {}", fmt(t), fmt(&ratio), fmt(&expected)));
        }
        v.observe(CharValue::Exact(ratio / expected));
        Ok(v)
    }

    fn lp_verdict(&self, t: &Rational, p: &Rational) -> Result<Verdict> {
        let mut v = Verdict::default();
        let w = sharpness_weight(&self.universe, t)?;
        let num = lp_norm(&self.maximal, &w, p)?;
        let den = lp_norm(&self.f, &w, p)?;
        let expected = rational::to_f64(&sharpness_value(t)).powf(1.0 / rational::to_f64(p));
        let actual = match (&num, &den) {
            (NormValue::Exact(a), NormValue::Exact(b)) => {
                let r = a / b;
                if r != sharpness_value(t) {
                    v.fail(format!("t = {}, p = 1: ratio {}", fmt(t), fmt(&r)));
                }
                rational::to_f64(&r)
            }
            _ => num.to_f64() / den.to_f64(),
        };
        if (actual - expected).abs() > LP_TOLERANCE * expected {
            v.fail(format!("t = {}, p = {}: ratio {actual} vs {expected}", fmt(t), fmt(p)));
        }
        v.observe(CharValue::Float(actual / expected));
        Ok(v)
    }
}

/// `(4 + 2t)/(2t)`.
pub fn sharpness_value(t: &Rational) -> Rational {
    (rational::int(4) + t * rational::int(2)) / (t * rational::int(2))
}

/// `‖𝓜^{1/2}χ_{[−1,1)}‖_{L¹(w_t)} / ‖χ_{[−1,1)}‖_{L¹(w_t)} = (4 + 2t)/(2t)`
/// exactly, with `𝓜^{1/2}χ_{[−1,1)} = χ_{[−3,3)}` cell for cell. Ratio:
/// observed over expected.
pub fn check_sharpness(ts: &[Rational], radius: &Rational, cell: &Rational) -> Result<VerificationReport> {
    let setup = SharpnessSetup::new(radius, cell)?;
    let mut notes = Vec::new();
    for t in ts {
        let w = sharpness_weight(&setup.universe, t)?;
        let a1 = a1_characteristic(&w, &CubeFamily::all(&setup.universe))?;
        notes.push(format!(
            "t = {}: ratio {} (= 2/t + 1), finite-family [w_t]_A1 = {} ({}), limit 1/t = {}",
            fmt(t),
            fmt(&setup.l1_ratio(t)?),
            serde_json::to_string(&a1.value)?,
            a1.family,
            fmt(&t.recip())
        ));
    }
    run_batch(
        "sharpness",
        None,
        ts,
        notes,
        |t| setup.verdict(t),
        |t| Witness::Sharpness { t: t.clone(), radius: radius.clone(), cell: cell.clone() },
    )
}

/// `‖𝓜^{1/2}χ‖_{L^p(w_t)} / ‖χ‖_{L^p(w_t)} = (2/t + 1)^{1/p}` within
/// [`LP_TOLERANCE`]. Ratio: observed over expected.
pub fn check_lp_lower(
    cases: &[(Rational, Rational)],
    radius: &Rational,
    cell: &Rational,
) -> Result<VerificationReport> {
    let setup = SharpnessSetup::new(radius, cell)?;
    run_batch(
        "lp-lower",
        None,
        cases,
        Vec::new(),
        |(t, p)| setup.lp_verdict(t, p),
        |(t, p)| Witness::LpLower { t: t.clone(), p: p.clone(), radius: radius.clone(), cell: cell.clone() },
    )
}

// ----------------------------------------------------------------- expansion

/// Subcell refinement at which `𝓜^η` is evaluated: the numerator of `η`,
/// doubled per extra dimension.
///
/// Over whole-cell cubes the expansion inequality genuinely fails: a single
/// cell `E` at `η = 3/4` has `𝓜^η(E) = E`, because the inequality needs cubes
/// with fractional sides. Lattice cubes are real cubes, so a pass at any
/// refinement is a pass for the operator over all cubes.
pub fn expansion_refinement(eta: &Rational, dims: usize) -> usize {
    let num: usize = eta.numer().try_into().unwrap_or(1);
    num.max(1) << (dims.saturating_sub(1))
}

fn expansion_verdict(o: &ExpansionOutcome) -> Verdict {
    let mut v = Verdict::default();
    if !o.pass {
        v.fail(format!("|M(E) ∩ Q| = {} < {}", fmt(&o.lhs), fmt(&o.rhs)));
    } else if o.lhs.is_positive() {
        v.observe(CharValue::Exact(&o.rhs / &o.lhs));
    }
    v
}

struct ExpansionCase {
    set: IndicatorSet,
    eta: Rational,
}

fn run_expansion(
    claim: &str,
    seed: Option<u64>,
    universe: &Universe,
    cases: Vec<ExpansionCase>,
    refine_of: impl Fn(&Rational) -> usize + Sync,
    skipped: usize,
    extra_notes: Vec<String>,
) -> Result<VerificationReport> {
    let q = GridCube::new(vec![0; universe.dims()], universe.extent()[0]);
    let mut etas: Vec<Rational> = cases.iter().map(|c| c.eta.clone()).collect();
    etas.sort();
    etas.dedup();
    let mut ops = Vec::new();
    let mut coarse_failures = Vec::new();
    for eta in &etas {
        let r = refine_of(eta);
        let fine = refine_set(&IndicatorSet::empty(universe), r)?;
        ops.push((eta.clone(), r, SetMaximal::new(&CubeFamily::all(fine.universe()))?));
        coarse_failures.push(0usize);
    }
    let coarse = SetMaximal::new(&CubeFamily::all(universe))?;
    let mut notes = extra_notes;
    notes.push(format!(
        "cube family: all cubes on the lattice refined by {}",
        ops.iter().map(|(e, r, _)| format!("{} at eta = {}", r, fmt(e))).collect::<Vec<_>>().join(", ")
    ));
    let start = Instant::now();
    let results = cases
        .par_iter()
        .map(|c| {
            let (_, r, op) = ops.iter().find(|(e, _, _)| e == &c.eta).expect("eta registered");
            let fine_q = GridCube::new(vec![0; universe.dims()], q.side * r);
            let out = expansion_with(op, &refine_set(&c.set, *r)?, &fine_q, &c.eta)?;
            let at_cells = expansion_with(&coarse, &c.set, &q, &c.eta)?.pass;
            Ok((
                Outcome::new(expansion_verdict(&out), || Witness::Expansion {
                    set: c.set.clone(),
                    cube: q.clone(),
                    eta: c.eta.clone(),
                    refine: *r,
                }),
                at_cells,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut outcomes = Vec::with_capacity(results.len());
    for (c, (o, at_cells)) in cases.iter().zip(results) {
        if !at_cells {
            let i = etas.iter().position(|e| e == &c.eta).unwrap();
            coarse_failures[i] += 1;
        }
        outcomes.push(o);
    }
    for (eta, n) in etas.iter().zip(&coarse_failures) {
        notes.push(format!(
            "eta = {}: {n} instances fall below the bound when only whole-cell cubes are used",
            fmt(eta)
        ));
    }
    let mut report = aggregate(claim, seed, start, outcomes, notes);
    report.skipped += skipped;
    Ok(report)
}

/// `|𝓜^η(E) ∩ Q| ≥ (1 + (η⁻¹ − 1)/2ⁿ)|E|` for every `E ⊆ Q` with
/// `|E| ≤ η|Q|`, `Q` the whole `sideⁿ` universe. Sets violating the size
/// condition count as skipped. Ratio: right over left side.
pub fn check_expansion_exhaustive(
    dims: usize,
    side: usize,
    etas: &[Rational],
    refine: Option<usize>,
) -> Result<VerificationReport> {
    let cells = side.pow(dims as u32);
    if cells > 16 {
        return Err(Error::Domain(format!("{cells} cells is too many for exhaustion (at most 16)")));
    }
    let u = Universe::new(vec![Rational::zero(); dims], Rational::one(), vec![side; dims])?;
    let mut cases = Vec::new();
    let mut skipped = 0;
    for eta in etas {
        for bits in 0u32..1 << cells {
            let mut set = IndicatorSet::empty(&u);
            for c in 0..cells {
                if (bits >> c) & 1 == 1 {
                    set.insert(c);
                }
            }
            if rational::int(set.count() as i64) > eta * rational::int(cells as i64) {
                skipped += 1;
                continue;
            }
            cases.push(ExpansionCase { set, eta: eta.clone() });
        }
    }
    run_expansion(
        "expansion",
        None,
        &u,
        cases,
        |eta| refine.unwrap_or_else(|| expansion_refinement(eta, dims)),
        skipped,
        vec![format!("exhaustive over subsets of {side}^{dims} cells")],
    )
}

/// [`check_expansion_exhaustive`] on `count` random sets with
/// `|E| ≤ η|Q|`, sizes uniform.
pub fn check_expansion_sampled(
    dims: usize,
    side: usize,
    eta: &Rational,
    count: usize,
    seed: u64,
    refine: Option<usize>,
) -> Result<VerificationReport> {
    let u = Universe::new(vec![Rational::zero(); dims], Rational::one(), vec![side; dims])?;
    let all: Vec<usize> = (0..u.num_cells()).collect();
    let max_size = rational::ceil_mul(eta, u.num_cells() as u64) as usize;
    let max_size = if rational::int(max_size as i64) > eta * rational::int(u.num_cells() as i64) {
        max_size - 1
    } else {
        max_size
    };
    let cases = (0..count)
        .map(|i| {
            let mut rng = super::gen::instance_rng(seed, i as u64);
            let size = rand::RngExt::random_range(&mut rng, 0..=max_size);
            ExpansionCase { set: super::gen::random_subset(&mut rng, &u, &all, size), eta: eta.clone() }
        })
        .collect();
    run_expansion(
        "expansion",
        Some(seed),
        &u,
        cases,
        |eta| refine.unwrap_or_else(|| expansion_refinement(eta, dims)),
        0,
        vec![format!("{count} random subsets of {side}^{dims} cells")],
    )
}

// --------------------------------------------------------------------- fujii

/// `‖f − m_f(Q(·, r))‖_{L^p(w)}` for each radius.
pub fn fujii_errors(f: &StepFunction, w: &Weight, p: &Rational, radii: &[Rational]) -> Result<Vec<NormValue>> {
    let half = f.universe().cell() / rational::int(2);
    if radii.last() != Some(&half) {
        return Err(Error::Precondition(format!("last radius must be h/2 = {}", fmt(&half))));
    }
    if radii.windows(2).any(|pair| pair[0] <= pair[1]) {
        return Err(Error::Precondition("radii must be strictly decreasing".into()));
    }
    radii
        .iter()
        .map(|r| {
            let g = median_mollify(f, r)?;
            let diff = StepFunction::new(
                f.universe().clone(),
                f.values().iter().zip(g.values()).map(|(a, b)| a - b).collect(),
            )?;
            lp_norm(&diff, w, p)
        })
        .collect()
}

fn fujii_verdict(errors: &[NormValue]) -> Verdict {
    let mut v = Verdict::default();
    for (i, pair) in errors.windows(2).enumerate() {
        let grew = match (&pair[0], &pair[1]) {
            (NormValue::Exact(a), NormValue::Exact(b)) => b > a,
            (a, b) => b.to_f64() > a.to_f64() * (1.0 + 1e-12),
        };
        if grew {
            v.fail(format!("error grows from radius {i} to {}", i + 1));
        }
    }
    let last_zero = match errors.last() {
        Some(NormValue::Exact(e)) => e.is_zero(),
        Some(NormValue::Approx(e)) => *e == 0.0,
        None => true,
    };
    if !last_zero {
        v.fail("error at r = h/2 is not zero".into());
    }
    v
}

/// The mollification error is non-increasing along the radii and exactly 0 at
/// `h/2`.
pub fn check_fujii(f: &StepFunction, w: &Weight, p: &Rational, radii: &[Rational]) -> Result<VerificationReport> {
    let start = Instant::now();
    let errors = fujii_errors(f, w, p, radii)?;
    let notes = vec![format!(
        "errors: {}",
        radii
            .iter()
            .zip(&errors)
            .map(|(r, e)| match e {
                NormValue::Exact(x) => format!("r = {}: {}", fmt(r), fmt(x)),
                NormValue::Approx(x) => format!("r = {}: {x}", fmt(r)),
            })
            .collect::<Vec<_>>()
            .join(", ")
    )];
    let o = Outcome::new(fujii_verdict(&errors), || Witness::Fujii {
        f: f.clone(),
        w: w.clone(),
        p: p.clone(),
        radii: radii.to_vec(),
    });
    Ok(aggregate("fujii", None, start, vec![o], notes))
}

// ------------------------------------------------------ covering, domination

fn covering_verdict(u: &Universe, q: &GridCube, grids: &[DyadicGridSpec]) -> Result<Verdict> {
    let mut v = Verdict::default();
    let cov = match covering_cube(q, u, grids) {
        Ok(c) => c,
        Err(Error::ScaleRangeExhausted { .. }) => {
            v.fail(format!("no covering cube for {q:?}"));
            return Ok(v);
        }
        Err(e) => return Err(e),
    };
    let bound = rational::int(6i64.pow(u.dims() as u32));
    let side = u.cell() * rational::int(q.side as i64);
    let contains = (0..u.dims()).all(|d| {
        let lo = u.node(d, q.corner[d]);
        cov.lower[d] <= lo && &lo + &side <= &cov.lower[d] + &cov.side
    });
    let ratio = crate::rational::pow(&(&cov.side / &side), u.dims() as u32);
    if !contains || ratio != cov.ratio || ratio > bound {
        v.fail(format!("cover {cov:?} of {q:?} invalid"));
    }
    v.observe(CharValue::Exact(ratio));
    Ok(v)
}

fn domination_verdict(f: &StepFunction, tau: &Rational) -> Result<Verdict> {
    let mut v = Verdict::default();
    let bound = domination_bound(f, tau)?;
    let brute = brute_maximal(f, &CubeFamily::all(f.universe()), &MaximalKind::tau(tau.clone()))?;
    for (i, (a, b)) in brute.values().iter().zip(bound.values()).enumerate() {
        if a > b {
            v.fail(format!("cell {i}: maximal {} > dyadic bound {}", fmt(a), fmt(b)));
            break;
        }
        if b.is_positive() {
            v.observe(CharValue::Exact(a / b));
        }
    }
    Ok(v)
}

/// Every grid-aligned cube of `cover_universe` has a cover in one of `grids`
/// with `|R| ≤ 6ⁿ|Q|`, and `𝓜^τ f ≤ max_j 𝓜^{τ/6ⁿ}_{𝒟_j} f` cellwise for
/// every `f` (with `𝓜^τ` over all cubes of `f`'s universe). Ratios:
/// `|R|/|Q|` for covering, `𝓜^τ f / bound` for domination.
pub fn check_covering_and_domination(
    cover_universe: &Universe,
    grids: &[DyadicGridSpec],
    fs: &[StepFunction],
    tau: &Rational,
    seed: Option<u64>,
) -> Result<VerificationReport> {
    let cubes = CubeFamily::all(cover_universe).enumerate_cubes()?;
    let cover = run_batch(
        "covering",
        None,
        &cubes,
        Vec::new(),
        |q| covering_verdict(cover_universe, q, grids),
        |q| Witness::Covering { universe: cover_universe.clone(), cube: q.clone(), grids: grids.to_vec() },
    )?;
    let dom = run_batch(
        "domination",
        seed,
        fs,
        vec![format!("tau = {}", fmt(tau))],
        |f| domination_verdict(f, tau),
        |f| Witness::Domination { f: f.clone(), tau: tau.clone() },
    )?;
    Ok(VerificationReport::merge("covering", vec![cover, dom]))
}

// ---------------------------------------------------- dyadic, stopping cubes

fn dyadic_verdict(f: &StepFunction, grid: &DyadicGridSpec, kind: &MaximalKind) -> Result<Verdict> {
    let mut v = Verdict::default();
    let fast = dyadic_maximal(f, grid, kind)?;
    let brute = brute_maximal(f, &CubeFamily::dyadic(f.universe(), grid.clone()), kind)?;
    if let Some(i) = (0..fast.values().len()).find(|&i| fast.value(i) != brute.value(i)) {
        v.fail(format!(
            "{} at cell {i}: tree {} vs brute {}",
            kind.describe(),
            fmt(fast.value(i)),
            fmt(brute.value(i))
        ));
    }
    Ok(v)
}

/// `dyadic_maximal` equals `brute_maximal` over the same dyadic family.
pub fn check_dyadic_equivalence(
    batch: &[(StepFunction, DyadicGridSpec, MaximalKind)],
    seed: Option<u64>,
) -> Result<VerificationReport> {
    run_batch(
        "dyadic",
        seed,
        batch,
        Vec::new(),
        |(f, g, k)| dyadic_verdict(f, g, k),
        |(f, g, k)| Witness::Dyadic { f: f.clone(), grid: g.clone(), op: k.clone() },
    )
}

fn stopping_verdict(f: &StepFunction, grid: &DyadicGridSpec, tau: &Rational, lambda: &Rational) -> Result<Verdict> {
    let mut v = Verdict::default();
    let u = f.universe();
    let d = stopping_cubes(f, grid, tau, lambda)?;
    for (i, a) in d.cubes.iter().enumerate() {
        if let Some(b) = d.cubes[i + 1..].iter().find(|b| a.intersects(b)) {
            v.fail(format!("stopping cubes {a:?} and {b:?} overlap"));
        }
        let hits = count_cmp(f, a, Cmp::Gt, lambda, true)?;
        if !rational::at_least_fraction(hits, tau, a.num_cells()) {
            v.fail(format!("{a:?} has {hits} cells above λ, fewer than τ|Q|"));
        }
    }
    let mut union = IndicatorSet::empty(u);
    for q in &d.cubes {
        union = union.union(&IndicatorSet::from_cube(u, q));
    }
    let level = dyadic_maximal(f, grid, &MaximalKind::tau(tau.clone()))?.level_set(Cmp::Gt, lambda, false);
    if union != level {
        v.fail("union of stopping cubes differs from the super-level set".into());
    }
    Ok(v)
}

/// Stopping cubes are disjoint, tile `{𝓜^τ_𝒟 f > λ}`, and each has
/// `|Q ∩ {|f| > λ}| ≥ τ|Q|`.
pub fn check_stopping(
    batch: &[(StepFunction, DyadicGridSpec, Rational, Rational)],
    seed: Option<u64>,
) -> Result<VerificationReport> {
    run_batch(
        "stopping",
        seed,
        batch,
        Vec::new(),
        |(f, g, t, l)| stopping_verdict(f, g, t, l),
        |(f, g, t, l)| Witness::Stopping { f: f.clone(), grid: g.clone(), tau: t.clone(), lambda: l.clone() },
    )
}

// ---------------------------------------------------------------- truncation

fn truncation_verdict(f: &StepFunction, kind: &MaximalKind) -> Result<Verdict> {
    let mut v = Verdict::default();
    let t = truncation_radius(f, kind)?;
    if !t.exact {
        return Err(Error::Precondition("universe margin is below the truncation radius".into()));
    }
    let truncated = maximal_all_cubes(f, kind)?;
    let wide = f.universe().padded(t.max_side_cells);
    let g = f.embed(&wide)?;
    let full = brute_maximal(&g, &CubeFamily::all(&wide), kind)?.restrict(f.universe())?;
    if truncated != full {
        v.fail(format!(
            "{}: truncated family at side {} differs from all cubes of a wider universe",
            kind.describe(),
            t.max_side_cells
        ));
    }
    Ok(v)
}

/// Widening the universe beyond the truncation radius and using every cube
/// changes no output cell.
pub fn check_truncation(batch: &[(StepFunction, MaximalKind)], seed: Option<u64>) -> Result<VerificationReport> {
    run_batch(
        "truncation",
        seed,
        batch,
        Vec::new(),
        |(f, k)| truncation_verdict(f, k),
        |(f, k)| Witness::Truncation { f: f.clone(), op: k.clone() },
    )
}

// --------------------------------------------------------------- alpha, beta

/// `min w(E)/w(Q)` over every cell subset `E ⊆ Q` with `|E| ≥ α|Q|`, by
/// enumeration.
fn beta_by_subsets(w: &Weight, q: &GridCube, alpha: &Rational) -> Option<Rational> {
    let vals: Vec<&Rational> = q.cells(w.universe()).into_iter().map(|i| &w.values()[i]).collect();
    let total: Rational = vals.iter().copied().sum();
    if total.is_zero() {
        return None;
    }
    let n = vals.len();
    let mut best: Option<Rational> = None;
    for bits in 0u32..1 << n {
        if !rational::at_least_fraction(bits.count_ones() as u64, alpha, n as u64) {
            continue;
        }
        let part: Rational = (0..n).filter(|i| (bits >> i) & 1 == 1).map(|i| vals[i]).sum();
        let r = part / &total;
        if best.as_ref().is_none_or(|b| &r < b) {
            best = Some(r);
        }
    }
    best
}

fn alpha_beta_verdict(w: &Weight, max_side: usize, alphas: &[Rational]) -> Result<Verdict> {
    let mut v = Verdict::default();
    let family = CubeFamily::all_grid_aligned(w.universe(), max_side);
    let cubes = family.enumerate_cubes()?;
    if cubes.iter().any(|q| q.num_cells() > 16) {
        return Err(Error::Domain("cubes above 16 cells are too large for subset enumeration".into()));
    }
    let mut sorted = alphas.to_vec();
    sorted.sort();
    let mut prev: Option<Rational> = None;
    for alpha in &sorted {
        let greedy = alpha_beta_profile(w, &family, alpha)?.beta;
        let oracle = cubes
            .iter()
            .filter_map(|q| beta_by_subsets(w, q, alpha))
            .min()
            .ok_or_else(|| Error::Domain("no cube with positive weight".into()))?;
        if greedy != oracle {
            v.fail(format!("α = {}: greedy {} vs subsets {}", fmt(alpha), fmt(&greedy), fmt(&oracle)));
        }
        if !greedy.is_positive() || greedy > Rational::one() {
            v.fail(format!("α = {}: β = {} outside (0, 1]", fmt(alpha), fmt(&greedy)));
        }
        if prev.as_ref().is_some_and(|p| p > &greedy) {
            v.fail(format!("β decreases at α = {}", fmt(alpha)));
        }
        prev = Some(greedy);
    }
    Ok(v)
}

/// `β*(α)` from the lightest cells equals the subset minimum, lies in
/// `(0, 1]`, and is non-decreasing in `α`: the `(α, β)` property every
/// positive weight has on a finite family.
pub fn check_alpha_beta(
    batch: &[Weight],
    max_side: usize,
    alphas: &[Rational],
    seed: Option<u64>,
) -> Result<VerificationReport> {
    run_batch(
        "alpha-beta",
        seed,
        batch,
        vec![format!("alphas = {}", alphas.iter().map(fmt).collect::<Vec<_>>().join(", "))],
        |w| alpha_beta_verdict(w, max_side, alphas),
        |w| Witness::AlphaBeta { w: w.clone(), max_side, alphas: alphas.to_vec() },
    )
}
