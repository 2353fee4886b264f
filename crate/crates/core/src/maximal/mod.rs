//! Maximal operators over finite cube families.
//!
//! [`brute_maximal`] evaluates the per-cube statistic on every cube of a family
//! and takes cellwise maxima; it is the reference every faster path is checked
//! against. [`dyadic_maximal`] does the same for one dyadic grid with a single
//! bottom-up merge of sorted value histograms.
//!
//! Finite families are exact for the operators on all of ℝⁿ once they contain
//! every cube up to [`truncation_radius`] and the universe leaves that much
//! room around the support of `f`.

mod dyadic;
pub(crate) mod sets;

use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, CubeFamily, GridBox, GridCube, Universe};
use crate::median::{self, check_tau};
use crate::rational::{self, Rational};
use crate::stepfn::StepFunction;

pub use dyadic::{dyadic_maximal, stopping_cubes, StoppingDecomposition};
pub use sets::{
    expansion_check, expansion_check_refined, expansion_factor, iterate_set_maximal, refine_set, set_maximal,
    ExpansionOutcome, SetMaximal,
};

/// Which cube statistic a maximal operator takes the supremum of.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaximalKind {
    /// `|m_f(Q)|`
    Median,
    /// `m^τ_f(Q)`
    Tau {
        #[serde(with = "rational::serde_str")]
        tau: Rational,
    },
    /// Average of `|f|` over `Q`.
    HlAverage,
}

impl MaximalKind {
    pub fn tau(tau: Rational) -> Self {
        MaximalKind::Tau { tau }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MaximalKind::Tau { tau } => check_tau(tau),
            _ => Ok(()),
        }
    }

    /// The statistic on one cube, computed directly from the definition.
    pub fn statistic(&self, f: &StepFunction, q: &GridCube) -> Result<Rational> {
        match self {
            MaximalKind::Median => Ok(median::median_max_abs(f, q)?.abs()),
            MaximalKind::Tau { tau } => median::tau_median(f, q, tau),
            MaximalKind::HlAverage => median::abs_average(f, q),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            MaximalKind::Median => "median".into(),
            MaximalKind::Tau { tau } => format!("tau({})", rational::format(tau)),
            MaximalKind::HlAverage => "hl_average".into(),
        }
    }
}

/// Distinct sorted values with the rank of every cell.
pub(crate) struct Ranking {
    pub table: Vec<Rational>,
    pub ranks: Vec<u32>,
}

impl Ranking {
    pub fn new(values: impl Iterator<Item = Rational>) -> Self {
        let values: Vec<Rational> = values.collect();
        let mut table = values.clone();
        table.sort_unstable();
        table.dedup();
        let ranks = values.iter().map(|v| table.binary_search(v).expect("value in table") as u32).collect();
        Ranking { table, ranks }
    }
}

/// Per-cube statistic from the ranks of the cells in the cube.
///
/// `signed` ranks `f`, `abs` ranks `|f|`; both are built once per input.
struct CubeStatistic<'a> {
    kind: &'a MaximalKind,
    signed: Ranking,
    abs: Ranking,
    values: &'a [Rational],
}

impl<'a> CubeStatistic<'a> {
    fn new(f: &'a StepFunction, kind: &'a MaximalKind) -> Self {
        CubeStatistic {
            kind,
            signed: Ranking::new(f.values().iter().cloned()),
            abs: Ranking::new(f.values().iter().map(|v| v.abs())),
            values: f.values(),
        }
    }

    fn eval(&self, cells: &[usize]) -> Rational {
        let n = cells.len();
        match self.kind {
            MaximalKind::Median => {
                let mut r: Vec<u32> = cells.iter().map(|&i| self.signed.ranks[i]).collect();
                r.sort_unstable();
                let lo = &self.signed.table[r[n.div_ceil(2) - 1] as usize];
                let hi = &self.signed.table[r[n / 2] as usize];
                lo.abs().max(hi.abs())
            }
            MaximalKind::Tau { tau } => {
                let j = rational::ceil_mul(tau, n as u64) as usize;
                let mut r: Vec<u32> = cells.iter().map(|&i| self.abs.ranks[i]).collect();
                let (_, v, _) = r.select_nth_unstable(n - j);
                self.abs.table[*v as usize].clone()
            }
            MaximalKind::HlAverage => {
                let s: Rational = cells.iter().map(|&i| self.values[i].abs()).sum();
                s / rational::int(n as i64)
            }
        }
    }
}

fn require_same_universe(f: &StepFunction, family: &CubeFamily) -> Result<()> {
    if f.universe() != &family.universe {
        return Err(Error::UniverseMismatch("family and function live on different universes".into()));
    }
    Ok(())
}

/// Cellwise maximum, over the cubes of `family` containing the cell, of the
/// statistic selected by `kind`. Cells covered by no cube get 0.
pub fn brute_maximal(f: &StepFunction, family: &CubeFamily, kind: &MaximalKind) -> Result<StepFunction> {
    kind.validate()?;
    require_same_universe(f, family)?;
    let cubes = family.enumerate_cubes()?;
    if cubes.is_empty() {
        log::warn!("empty cube family {}; maximal function is identically 0", family.describe());
        return Ok(StepFunction::zero(f.universe()));
    }
    let u = f.universe();
    let stat = CubeStatistic::new(f, kind);
    let per_cube: Vec<(Vec<usize>, Rational)> = cubes
        .par_iter()
        .map(|q| {
            let cells = q.cells(u);
            let s = stat.eval(&cells);
            (cells, s)
        })
        .collect();
    // rank the statistics so the cellwise sweep compares integers
    let ranking = Ranking::new(per_cube.iter().map(|(_, s)| s.clone()));
    let mut best: Vec<Option<u32>> = vec![None; u.num_cells()];
    for ((cells, _), &r) in per_cube.iter().zip(&ranking.ranks) {
        for &c in cells {
            if best[c].is_none_or(|b| b < r) {
                best[c] = Some(r);
            }
        }
    }
    let values =
        best.into_iter().map(|b| b.map_or_else(Rational::zero, |r| ranking.table[r as usize].clone())).collect();
    StepFunction::new(u.clone(), values)
}

/// Largest cube side that can carry a nonzero statistic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    /// Side in cells.
    pub max_side_cells: usize,
    /// Side length.
    #[serde(with = "rational::serde_str")]
    pub max_side: Rational,
    /// Whether the universe leaves `max_side_cells − 1` cells around the
    /// support on every side, making the finite family exact for ℝⁿ.
    pub exact: bool,
}

/// Side beyond which every cube has statistic 0, so that truncating the
/// family there loses nothing.
///
/// With `S` cells in `{f ≠ 0}`: a cube of more than `S/τ` cells has
/// `m^τ = 0`, and a cube of more than `2S` cells has median set `{0}`. The
/// Hardy–Littlewood average never vanishes on cubes meeting the support, so
/// it is not truncated (the longest axis is returned).
pub fn truncation_radius(f: &StepFunction, kind: &MaximalKind) -> Result<Truncation> {
    kind.validate()?;
    let u = f.universe();
    let n = u.dims() as u32;
    let support = f.support_cells() as u64;
    let cells = if support == 0 {
        1
    } else {
        match kind {
            MaximalKind::Tau { tau } => {
                let limit = rational::int(support as i64) / tau;
                largest_side(n, |s| rational::int(s.pow(n) as i64) <= limit)
            }
            MaximalKind::Median => largest_side(n, |s| s.pow(n) <= 2 * support),
            MaximalKind::HlAverage => *u.extent().iter().max().unwrap(),
        }
    };
    let exact = match (kind, f.support_box()) {
        (MaximalKind::HlAverage, Some(_)) => false,
        (_, None) => true,
        (_, Some(b)) => (0..u.dims()).all(|d| b.lower[d] + 1 >= cells && b.upper[d] + cells - 1 <= u.extent()[d]),
    };
    Ok(Truncation { max_side_cells: cells, max_side: u.cell() * rational::int(cells as i64), exact })
}

fn largest_side(_n: u32, fits: impl Fn(u64) -> bool) -> usize {
    let mut s = 1u64;
    while fits(s + 1) {
        s += 1;
    }
    s as usize
}

/// [`brute_maximal`] over every grid-aligned cube up to the truncation side.
pub fn maximal_all_cubes(f: &StepFunction, kind: &MaximalKind) -> Result<StepFunction> {
    let t = truncation_radius(f, kind)?;
    brute_maximal(f, &CubeFamily::all_grid_aligned(f.universe(), t.max_side_cells), kind)
}

/// Cellwise maximum over the `2ⁿ` one-third-shifted dyadic grids of
/// `𝓜^{τ/6ⁿ}_{𝒟_j} f`, which dominates `𝓜^τ f`.
///
/// The function is padded with zeros far enough that every covering cube of
/// a cube inside the universe fits. The cell side must make the shifted
/// grids align with cells (e.g. `h = 1/(3·2^K)`).
pub fn domination_bound(f: &StepFunction, tau: &Rational) -> Result<StepFunction> {
    check_tau(tau)?;
    let u = f.universe();
    let n = u.dims() as u32;
    let trunc = truncation_radius(f, &MaximalKind::tau(tau.clone()))?;
    let reach = trunc.max_side_cells.max(*u.extent().iter().max().unwrap());
    let padded = u.padded(6 * reach + 6);
    let g = f.embed(&padded)?;
    let inner_tau = tau / rational::int(6i64.pow(n));
    let kind = MaximalKind::tau(inner_tau);
    let mut out: Option<Vec<Rational>> = None;
    for grid in grid::shifted_grids_fitted(&padded)? {
        let m = dyadic_maximal(&g, &grid, &kind)?.restrict(u)?;
        out = Some(match out {
            None => m.values().to_vec(),
            Some(prev) => prev.into_iter().zip(m.values()).map(|(a, b)| a.max(b.clone())).collect(),
        });
    }
    StepFunction::new(u.clone(), out.expect("at least one grid"))
}

/// The box of cells met by the cube of side `2r` centred at cell `coords`,
/// rounded outward to cell boundaries and clipped to the universe.
pub fn mollifier_window(u: &Universe, coords: &[usize], r: &Rational) -> GridBox {
    let rho = r / u.cell();
    let half = rational::ratio(1, 2);
    let below = (&half - &rho).floor().to_integer().to_i64().unwrap_or(i64::MIN / 2);
    let above = (&half + &rho).ceil().to_integer().to_i64().unwrap_or(i64::MAX / 2);
    let mut lower = Vec::with_capacity(u.dims());
    let mut upper = Vec::with_capacity(u.dims());
    for (d, &c) in coords.iter().enumerate() {
        let c = c as i64;
        lower.push((c + below).max(0) as usize);
        upper.push((c + above).min(u.extent()[d] as i64) as usize);
    }
    GridBox { lower, upper }
}

/// `x ↦ m_f(Q(x, r))` evaluated at cell centres.
pub fn median_mollify(f: &StepFunction, r: &Rational) -> Result<StepFunction> {
    let u = f.universe();
    if r * rational::int(2) < *u.cell() || !r.is_positive() {
        return Err(Error::Domain(format!(
            "radius {} smaller than half a cell ({})",
            rational::format(r),
            rational::format(&(u.cell() / rational::int(2)))
        )));
    }
    let values = (0..u.num_cells())
        .into_par_iter()
        .map(|i| median::median_max_abs_box(f, &mollifier_window(u, &u.coords(i), r)))
        .collect::<Result<Vec<_>>>()?;
    StepFunction::new(u.clone(), values)
}

/// Cellwise `a ≤ b`.
pub fn dominated(a: &StepFunction, b: &StepFunction) -> bool {
    a.universe() == b.universe() && a.values().iter().zip(b.values()).all(|(x, y)| x <= y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DyadicGridSpec;
    use crate::rational::{int, ratio};
    use crate::stepfn::IndicatorSet;

    fn chi(u: &Universe, a: i64, b: i64) -> StepFunction {
        StepFunction::from_cells(u, |c| {
            let x = u.node(0, c[0]);
            if x >= int(a) && x < int(b) {
                int(1)
            } else {
                int(0)
            }
        })
    }

    fn sharp_universe() -> Universe {
        Universe::interval(&int(-10), &int(10), &ratio(1, 10)).unwrap()
    }

    #[test]
    fn half_maximal_of_unit_indicator() {
        let u = sharp_universe();
        let f = chi(&u, -1, 1);
        let kind = MaximalKind::tau(ratio(1, 2));
        let t = truncation_radius(&f, &kind).unwrap();
        assert_eq!(t.max_side, int(4));
        assert!(t.exact);
        let m = maximal_all_cubes(&f, &kind).unwrap();
        assert_eq!(m, chi(&u, -3, 3));
    }

    #[test]
    fn constant_input() {
        let u = Universe::interval(&int(0), &int(2), &ratio(1, 4)).unwrap();
        let f = StepFunction::constant(&u, ratio(-3, 2));
        let fam = CubeFamily::all(&u);
        for kind in [MaximalKind::Median, MaximalKind::tau(ratio(1, 3)), MaximalKind::HlAverage] {
            let m = brute_maximal(&f, &fam, &kind).unwrap();
            assert!(m.values().iter().all(|v| *v == ratio(3, 2)), "{kind:?}");
        }
    }

    #[test]
    fn empty_family_gives_zero() {
        let u = Universe::interval(&int(0), &int(2), &ratio(1, 4)).unwrap();
        let f = StepFunction::constant(&u, int(2));
        let m = brute_maximal(&f, &CubeFamily::explicit(&u, vec![]), &MaximalKind::Median).unwrap();
        assert_eq!(m, StepFunction::zero(&u));
    }

    #[test]
    fn eight_cell_double_loop() {
        let u = Universe::interval(&int(0), &int(8), &int(1)).unwrap();
        let vals = [3, -5, 0, 2, -2, 7, 1, -1];
        let f = StepFunction::new(u.clone(), vals.iter().map(|&v| ratio(v, 4)).collect()).unwrap();
        let m = brute_maximal(&f, &CubeFamily::all(&u), &MaximalKind::Median).unwrap();
        let mut count = 0;
        for x in 0..8 {
            let mut best = int(0);
            for a in 0..8usize {
                for b in a + 1..=8usize {
                    if a <= x && x < b {
                        let mut window: Vec<Rational> = vals[a..b].iter().map(|&v| ratio(v, 4)).collect();
                        let mi = median::median_interval_of(&mut window).unwrap();
                        best = best.max(mi.max_abs().abs());
                    }
                    if x == 0 {
                        count += 1;
                    }
                }
            }
            assert_eq!(m.value(x), &best, "cell {x}");
        }
        assert_eq!(count, 36);
    }

    #[test]
    fn truncation_degenerate_and_median() {
        let u = Universe::interval(&int(-10), &int(10), &ratio(1, 10)).unwrap();
        let z = StepFunction::zero(&u);
        assert_eq!(truncation_radius(&z, &MaximalKind::Median).unwrap().max_side_cells, 1);
        let f = chi(&u, -1, 1);
        assert_eq!(truncation_radius(&f, &MaximalKind::Median).unwrap().max_side_cells, 40);
        assert_eq!(truncation_radius(&f, &MaximalKind::tau(ratio(1, 4))).unwrap().max_side_cells, 80);
        let sq = Universe::cube(2, &int(0), &int(8), &int(1)).unwrap();
        let one = StepFunction::from_cells(&sq, |c| if c == [3, 3] { int(1) } else { int(0) });
        // 1/τ = 9 cells allowed: 3×3
        assert_eq!(truncation_radius(&one, &MaximalKind::tau(ratio(1, 9))).unwrap().max_side_cells, 3);
    }

    #[test]
    fn mollify_half_cell_is_identity() {
        let u = Universe::interval(&int(0), &int(1), &ratio(1, 8)).unwrap();
        let f = StepFunction::from_cells(&u, |c| ratio((c[0] * c[0]) as i64 - 5, 3));
        assert_eq!(median_mollify(&f, &ratio(1, 16)).unwrap(), f);
        assert!(median_mollify(&f, &ratio(1, 17)).is_err());
        let w = mollifier_window(&u, &[3], &ratio(1, 8));
        assert_eq!(w, GridBox { lower: vec![2], upper: vec![5] });
        let w = mollifier_window(&u, &[0], &ratio(1, 4));
        assert_eq!(w, GridBox { lower: vec![0], upper: vec![3] });
    }

    #[test]
    fn mollify_monotone_stays_in_window_range() {
        let u = Universe::interval(&int(0), &int(2), &ratio(1, 16)).unwrap();
        let f = StepFunction::from_cells(&u, |c| ratio((c[0] as i64) * (c[0] as i64), 7));
        for r in [ratio(1, 8), ratio(3, 16), ratio(1, 2)] {
            let g = median_mollify(&f, &r).unwrap();
            for i in 0..u.num_cells() {
                let b = mollifier_window(&u, &[i], &r);
                let lo = f.value(b.lower[0]);
                let hi = f.value(b.upper[0] - 1);
                assert!(lo <= g.value(i) && g.value(i) <= hi);
            }
        }
    }

    #[test]
    fn dyadic_single_cell_indicator() {
        // χ of one cell: the τ-maximal function is 1 exactly on the dyadic
        // ancestors where the cell occupies at least a τ fraction
        let u = Universe::interval(&int(0), &int(1), &ratio(1, 16)).unwrap();
        let f = StepFunction::from_cells(&u, |c| if c[0] == 5 { int(1) } else { int(0) });
        let grid = DyadicGridSpec::standard(1, (0, 4));
        let m = dyadic_maximal(&f, &grid, &MaximalKind::tau(ratio(1, 4))).unwrap();
        // ancestors of cell 5 with density >= 1/4: sides 1, 2, 4 cells → [4, 8)
        let expected = StepFunction::from_cells(&u, |c| if (4..8).contains(&c[0]) { int(1) } else { int(0) });
        assert_eq!(m, expected);
        let z = dyadic_maximal(&StepFunction::zero(&u), &grid, &MaximalKind::Median).unwrap();
        assert_eq!(z, StepFunction::zero(&u));
    }

    #[test]
    fn domination_on_sharpness_example() {
        let u = Universe::interval(&int(-4), &int(4), &ratio(1, 12)).unwrap();
        let f = chi(&u, -1, 1);
        let d = domination_bound(&f, &ratio(1, 2)).unwrap();
        assert!(dominated(&chi(&u, -3, 3), &d));
        let c = StepFunction::constant(&u, int(2));
        let dc = domination_bound(&c, &ratio(1, 2)).unwrap();
        assert_eq!(dc, c);
    }

    #[test]
    fn domination_requires_aligned_cells() {
        let u = Universe::interval(&int(0), &int(1), &ratio(1, 8)).unwrap();
        let f = StepFunction::constant(&u, int(1));
        assert!(matches!(domination_bound(&f, &ratio(1, 2)), Err(Error::Misaligned(_))));
    }

    #[test]
    fn set_maximal_matches_thresholded_tau() {
        let u = Universe::interval(&int(-10), &int(10), &ratio(1, 10)).unwrap();
        let f = chi(&u, -1, 1);
        let e = f.level_set(crate::stepfn::Cmp::Ge, &int(1), false);
        let fam = CubeFamily::all_grid_aligned(&u, 40);
        let m = set_maximal(&e, &ratio(1, 2), &fam).unwrap();
        let expected = chi(&u, -3, 3).level_set(crate::stepfn::Cmp::Ge, &int(1), false);
        assert_eq!(m, expected);
        assert!(set_maximal(&IndicatorSet::empty(&u), &ratio(1, 2), &fam).unwrap().is_empty());
        let full = IndicatorSet::full(&u);
        assert_eq!(set_maximal(&full, &ratio(1, 2), &fam).unwrap(), full);
    }
}
