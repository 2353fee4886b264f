//! The set operator `𝓜^η(E)`, its iterates, and the expansion inequality
//! `|𝓜^η(E) ∩ Q| ≥ (1 + (η⁻¹ − 1)/2ⁿ)|E|`.

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{for_each_index, CubeFamily, GridCube, Universe};
use crate::median::check_tau;
use crate::rational::{self, Rational};
use crate::stepfn::{IndicatorSet, PrefixSums};

/// `𝓜^η` over a fixed family, with the cube list enumerated once.
pub struct SetMaximal {
    universe: Universe,
    cubes: Vec<GridCube>,
}

impl SetMaximal {
    pub fn new(family: &CubeFamily) -> Result<Self> {
        Ok(SetMaximal { universe: family.universe.clone(), cubes: family.enumerate_cubes()? })
    }

    /// Cells lying in some family cube `Q` with `|E ∩ Q| ≥ η|Q|`.
    pub fn apply(&self, e: &IndicatorSet, eta: &Rational) -> Result<IndicatorSet> {
        check_tau(eta)?;
        let u = &self.universe;
        if e.universe() != u {
            return Err(Error::UniverseMismatch("set and family live on different universes".into()));
        }
        let counts = PrefixSums::new(u, e.mask().iter().map(|&b| b as i64));
        // difference table over the (extent + 1)-grid; a positive prefix sum
        // at a cell means some qualifying cube covers it
        let dims: Vec<usize> = u.extent().iter().map(|x| x + 1).collect();
        let strides = strides(&dims);
        let mut diff = vec![0i32; dims.iter().product()];
        let n = u.dims();
        for q in &self.cubes {
            let hits = counts.cube_sum(q) as u64;
            if hits == 0 || !rational::at_least_fraction(hits, eta, q.num_cells()) {
                continue;
            }
            for mask in 0..1usize << n {
                let mut idx = 0;
                let mut ups = 0;
                for (d, stride) in strides.iter().enumerate() {
                    let x = if (mask >> d) & 1 == 1 {
                        ups += 1;
                        q.corner[d] + q.side
                    } else {
                        q.corner[d]
                    };
                    idx += x * stride;
                }
                diff[idx] += if ups % 2 == 0 { 1 } else { -1 };
            }
        }
        for d in 0..n {
            let s = strides[d];
            for idx in 0..diff.len() {
                if !(idx / s).is_multiple_of(dims[d]) {
                    diff[idx] += diff[idx - s];
                }
            }
        }
        let mut mask = Vec::with_capacity(u.num_cells());
        for_each_index(&vec![0; n], u.extent(), |c| {
            let idx: usize = c.iter().zip(&strides).map(|(ci, s)| ci * s).sum();
            mask.push(diff[idx] > 0);
        });
        IndicatorSet::new(u.clone(), mask)
    }

    pub fn iterate(&self, e: &IndicatorSet, eta: &Rational, k: usize) -> Result<IndicatorSet> {
        let mut cur = e.clone();
        for _ in 0..k {
            let next = self.apply(&cur, eta)?;
            if next == cur {
                break;
            }
            cur = next;
        }
        Ok(cur)
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for d in (0..dims.len().saturating_sub(1)).rev() {
        s[d] = s[d + 1] * dims[d + 1];
    }
    s
}

/// `𝓜^η(E)` over `family`.
pub fn set_maximal(e: &IndicatorSet, eta: &Rational, family: &CubeFamily) -> Result<IndicatorSet> {
    SetMaximal::new(family)?.apply(e, eta)
}

/// `(𝓜^η)^k(E)`.
pub fn iterate_set_maximal(e: &IndicatorSet, eta: &Rational, family: &CubeFamily, k: usize) -> Result<IndicatorSet> {
    if k == 0 {
        return Err(Error::Domain("iteration count must be positive".into()));
    }
    SetMaximal::new(family)?.iterate(e, eta, k)
}

/// `1 + (η⁻¹ − 1)/2ⁿ`.
pub fn expansion_factor(eta: &Rational, dims: usize) -> Rational {
    Rational::one() + (eta.recip() - Rational::one()) / rational::int(1i64 << dims)
}

/// Both sides of the expansion inequality for one `(E, Q, η)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionOutcome {
    #[serde(with = "rational::serde_str")]
    pub lhs: Rational,
    #[serde(with = "rational::serde_str")]
    pub rhs: Rational,
    pub pass: bool,
}

/// `|𝓜^η(E) ∩ Q|` against `(1 + (η⁻¹ − 1)/2ⁿ)|E|`, with `𝓜^η` over all
/// grid-aligned cubes of the universe.
///
/// Requires `E ⊆ Q` and `|E| ≤ η|Q|`.
pub fn expansion_check(e: &IndicatorSet, q: &GridCube, eta: &Rational) -> Result<ExpansionOutcome> {
    let op = SetMaximal::new(&CubeFamily::all(e.universe()))?;
    expansion_with(&op, e, q, eta)
}

/// [`expansion_check`] evaluated after splitting every cell into `refine`ⁿ
/// congruent subcells, so that `𝓜^η` ranges over cubes with corners on the
/// finer lattice. Both sides are measures and do not depend on the
/// refinement of `E` and `Q` themselves.
pub fn expansion_check_refined(
    e: &IndicatorSet,
    q: &GridCube,
    eta: &Rational,
    refine: usize,
) -> Result<ExpansionOutcome> {
    let fine = refine_set(e, refine)?;
    let fq = GridCube::new(q.corner.iter().map(|c| c * refine).collect(), q.side * refine);
    expansion_check(&fine, &fq, eta)
}

pub(crate) fn expansion_with(
    op: &SetMaximal,
    e: &IndicatorSet,
    q: &GridCube,
    eta: &Rational,
) -> Result<ExpansionOutcome> {
    check_tau(eta)?;
    let u = e.universe();
    if !u.contains(q) {
        return Err(Error::Domain(format!("cube {q:?} outside universe")));
    }
    let inside = e.count_in(q) as usize;
    if inside != e.count() {
        return Err(Error::Precondition("E is not contained in Q".into()));
    }
    let dense = num_bigint::BigInt::from(inside) * eta.denom() > eta.numer() * num_bigint::BigInt::from(q.num_cells());
    if dense {
        return Err(Error::Precondition(format!(
            "|E| = {inside} cells exceeds η|Q| = {}·{}",
            rational::format(eta),
            q.num_cells()
        )));
    }
    let h = u.cell_measure();
    let m = op.apply(e, eta)?;
    let lhs = &h * rational::int(m.count_in(q) as i64);
    let rhs = expansion_factor(eta, u.dims()) * &h * rational::int(inside as i64);
    let pass = lhs >= rhs;
    Ok(ExpansionOutcome { lhs, rhs, pass })
}

/// Splits every cell into `factor`ⁿ subcells.
pub fn refine_set(e: &IndicatorSet, factor: usize) -> Result<IndicatorSet> {
    if factor == 0 {
        return Err(Error::Domain("refinement factor must be positive".into()));
    }
    let u = e.universe();
    let fine = Universe::new(
        u.origin().to_vec(),
        u.cell() / rational::int(factor as i64),
        u.extent().iter().map(|x| x * factor).collect(),
    )?;
    let mut mask = Vec::with_capacity(fine.num_cells());
    for_each_index(&vec![0; u.dims()], fine.extent(), |c| {
        let coarse: Vec<usize> = c.iter().map(|x| x / factor).collect();
        mask.push(e.contains(u.linear(&coarse)));
    });
    IndicatorSet::new(fine, mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn line(cells: usize) -> Universe {
        Universe::new(vec![int(0)], int(1), vec![cells]).unwrap()
    }

    fn set(u: &Universe, cells: &[usize]) -> IndicatorSet {
        let mut s = IndicatorSet::empty(u);
        for &c in cells {
            s.insert(c);
        }
        s
    }

    #[test]
    fn factor_values() {
        assert_eq!(expansion_factor(&ratio(1, 2), 1), ratio(3, 2));
        assert_eq!(expansion_factor(&ratio(1, 2), 2), ratio(5, 4));
        assert_eq!(expansion_factor(&ratio(3, 4), 1), ratio(7, 6));
    }

    #[test]
    fn empty_set_passes() {
        let u = line(12);
        let q = GridCube::new(vec![0], 12);
        let out = expansion_check(&IndicatorSet::empty(&u), &q, &ratio(1, 2)).unwrap();
        assert_eq!(out, ExpansionOutcome { lhs: int(0), rhs: int(0), pass: true });
    }

    #[test]
    fn critical_density_fills_cube() {
        let u = line(12);
        let q = GridCube::new(vec![0], 12);
        let e = set(&u, &[0, 2, 4, 6, 8, 10]);
        let out = expansion_check(&e, &q, &ratio(1, 2)).unwrap();
        assert_eq!(out.lhs, int(12));
        assert!(out.pass);
    }

    #[test]
    fn rejects_dense_sets_and_sets_outside_q() {
        let u = line(12);
        let q = GridCube::new(vec![0], 4);
        let e = set(&u, &[0, 1, 2]);
        assert!(matches!(expansion_check(&e, &q, &ratio(1, 2)), Err(Error::Precondition(_))));
        let e = set(&u, &[5]);
        assert!(matches!(expansion_check(&e, &q, &ratio(1, 2)), Err(Error::Precondition(_))));
    }

    #[test]
    fn iterates_grow_and_reach_fixed_points() {
        let u = line(12);
        let fam = CubeFamily::all(&u);
        let e = set(&u, &[5]);
        let one = iterate_set_maximal(&e, &ratio(1, 2), &fam, 1).unwrap();
        assert_eq!(one, set_maximal(&e, &ratio(1, 2), &fam).unwrap());
        assert_eq!(one, set(&u, &[4, 5, 6]));
        let two = iterate_set_maximal(&e, &ratio(1, 2), &fam, 2).unwrap();
        assert!(one.is_subset(&two));
        let full = IndicatorSet::full(&u);
        assert_eq!(iterate_set_maximal(&full, &ratio(1, 2), &fam, 5).unwrap(), full);
        assert!(iterate_set_maximal(&e, &ratio(1, 2), &fam, 0).is_err());
    }

    #[test]
    fn refinement_keeps_measure() {
        let u = line(3);
        let e = set(&u, &[1]);
        let fine = refine_set(&e, 3).unwrap();
        assert_eq!(fine.count(), 3);
        assert_eq!(fine.measure(), e.measure());
    }
}
