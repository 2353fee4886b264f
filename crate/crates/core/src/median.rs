//! Medians and τ-medians of a step function on a cube.
//!
//! With `N` congruent cells in `Q` and the cell values sorted ascending
//! `v_1 ≤ … ≤ v_N`, the median set is `[v_⌈N/2⌉, v_⌊N/2⌋+1]` and
//! `m^τ_f(Q)` is the `⌈τN⌉`-th largest value of `|f|`. Everything here is
//! exact comparison of rationals.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridBox, GridCube};
use crate::rational::{self, Rational};
use crate::stepfn::StepFunction;

/// The compact interval `[lo, hi]` of medians.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MedianInterval {
    #[serde(with = "rational::serde_str")]
    pub lo: Rational,
    #[serde(with = "rational::serde_str")]
    pub hi: Rational,
}

impl MedianInterval {
    /// Median of largest absolute value; the upper endpoint wins ties.
    pub fn max_abs(&self) -> Rational {
        if self.hi.abs() >= self.lo.abs() {
            self.hi.clone()
        } else {
            self.lo.clone()
        }
    }

    pub fn contains(&self, alpha: &Rational) -> bool {
        &self.lo <= alpha && alpha <= &self.hi
    }
}

/// Median interval of a multiset of equally weighted values. Sorts in place.
pub fn median_interval_of(values: &mut [Rational]) -> Result<MedianInterval> {
    let n = values.len();
    if n == 0 {
        return Err(Error::Domain("median of an empty cube".into()));
    }
    values.sort_unstable();
    Ok(MedianInterval { lo: values[n.div_ceil(2) - 1].clone(), hi: values[n / 2].clone() })
}

/// `m^τ` of a multiset of equally weighted values: the `⌈τN⌉`-th largest `|v|`.
pub fn tau_median_of(values: &[Rational], tau: &Rational) -> Result<Rational> {
    check_tau(tau)?;
    let n = values.len();
    if n == 0 {
        return Err(Error::Domain("τ-median of an empty cube".into()));
    }
    let j = rational::ceil_mul(tau, n as u64) as usize;
    let mut abs: Vec<Rational> = values.iter().map(|v| v.abs()).collect();
    let (_, v, _) = abs.select_nth_unstable(n - j);
    Ok(v.clone())
}

pub(crate) fn check_tau(tau: &Rational) -> Result<()> {
    if rational::in_unit_open(tau) {
        Ok(())
    } else {
        Err(Error::Domain(format!("τ = {} not in (0, 1)", rational::format(tau))))
    }
}

fn cube_values(f: &StepFunction, q: &GridCube) -> Result<Vec<Rational>> {
    if !f.universe().contains(q) {
        return Err(Error::Domain(format!("cube {q:?} outside universe or empty")));
    }
    Ok(q.cells(f.universe()).into_iter().map(|i| f.value(i).clone()).collect())
}

pub(crate) fn box_values(f: &StepFunction, b: &GridBox) -> Result<Vec<Rational>> {
    if !f.universe().contains_box(b) {
        return Err(Error::Domain(format!("box {b:?} outside universe or empty")));
    }
    Ok(b.cells(f.universe()).into_iter().map(|i| f.value(i).clone()).collect())
}

pub fn median_interval(f: &StepFunction, q: &GridCube) -> Result<MedianInterval> {
    median_interval_of(&mut cube_values(f, q)?)
}

/// `m_f(Q)`, the median with the largest absolute value.
pub fn median_max_abs(f: &StepFunction, q: &GridCube) -> Result<Rational> {
    Ok(median_interval(f, q)?.max_abs())
}

/// `m_f` over a box of cells (a cube clipped to the universe).
pub fn median_max_abs_box(f: &StepFunction, b: &GridBox) -> Result<Rational> {
    Ok(median_interval_of(&mut box_values(f, b)?)?.max_abs())
}

/// `m^τ_f(Q) = max{α ≥ 0 : |Q ∩ {|f| ≥ α}| ≥ τ|Q|}`.
pub fn tau_median(f: &StepFunction, q: &GridCube, tau: &Rational) -> Result<Rational> {
    tau_median_of(&cube_values(f, q)?, tau)
}

/// Whether `α` satisfies both defining inequalities of a median on the values.
pub fn is_median(values: &[Rational], alpha: &Rational) -> bool {
    let n = values.len() as u64;
    let below = values.iter().filter(|v| *v < alpha).count() as u64;
    let above = values.iter().filter(|v| *v > alpha).count() as u64;
    2 * below <= n && 2 * above <= n
}

/// Average of `|f|` over the cube (the Hardy–Littlewood statistic).
pub fn abs_average(f: &StepFunction, q: &GridCube) -> Result<Rational> {
    let vals = cube_values(f, q)?;
    let n = vals.len() as i64;
    let s: Rational = vals.iter().map(|v| v.abs()).fold(Rational::zero(), |a, b| a + b);
    Ok(s / rational::int(n))
}
