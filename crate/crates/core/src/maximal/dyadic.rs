//! Dyadic maximal functions by one pass over the grid's cube tree, and the
//! stopping cubes of the dyadic τ-maximal function.

use std::collections::HashMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{MaximalKind, Ranking};
use crate::error::{Error, Result};
use crate::grid::{for_each_index, DyadicGridSpec, GridCube};
use crate::median::check_tau;
use crate::rational::{self, Rational};
use crate::stepfn::StepFunction;

/// Sorted `(rank, cell count)` pairs; ranks index a [`Ranking`] table.
type Histogram = Vec<(u32, u64)>;

fn merge(a: &Histogram, b: &Histogram) -> Histogram {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Rank of the `k`-th smallest entry (1-based).
fn kth_smallest(h: &Histogram, k: u64) -> u32 {
    let mut seen = 0;
    for &(r, c) in h {
        seen += c;
        if seen >= k {
            return r;
        }
    }
    unreachable!("k exceeds histogram size")
}

enum Summary {
    Hist(Histogram),
    Sum(Rational),
}

/// Cubes of a dyadic grid inside the universe, with per-node statistics.
struct Tree {
    /// Coarse to fine.
    levels: Vec<Vec<GridCube>>,
    /// `children[l][i]` indexes into `levels[l + 1]`.
    children: Vec<Vec<Vec<usize>>>,
    stats: Vec<Vec<Rational>>,
}

impl Tree {
    fn build(f: &StepFunction, grid: &DyadicGridSpec, kind: &MaximalKind) -> Result<Tree> {
        kind.validate()?;
        let u = f.universe();
        let levels: Vec<Vec<GridCube>> = grid.levels(u)?.into_iter().map(|l| l.cubes).collect();
        let ranking = match kind {
            MaximalKind::Median => Some(Ranking::new(f.values().iter().cloned())),
            MaximalKind::Tau { .. } => Some(Ranking::new(f.values().iter().map(num_traits::Signed::abs))),
            MaximalKind::HlAverage => None,
        };

        let depth = levels.len();
        let mut children: Vec<Vec<Vec<usize>>> = vec![Vec::new(); depth];
        let mut summaries: Vec<Vec<Summary>> = (0..depth).map(|_| Vec::new()).collect();
        for l in (0..depth).rev() {
            if l + 1 == depth {
                summaries[l] = levels[l].iter().map(|q| leaf_summary(f, q, ranking.as_ref())).collect();
                children[l] = vec![Vec::new(); levels[l].len()];
                continue;
            }
            let index: HashMap<&[usize], usize> =
                levels[l + 1].iter().enumerate().map(|(i, q)| (q.corner.as_slice(), i)).collect();
            let mut level_children = Vec::with_capacity(levels[l].len());
            let mut level_summaries = Vec::with_capacity(levels[l].len());
            for q in &levels[l] {
                let half = q.side / 2;
                let mut kids = Vec::with_capacity(1 << u.dims());
                let mut missing = false;
                for_each_index(&vec![0; u.dims()], &vec![2; u.dims()], |e| {
                    let corner: Vec<usize> = q.corner.iter().zip(e).map(|(c, b)| c + b * half).collect();
                    match index.get(corner.as_slice()) {
                        Some(&i) => kids.push(i),
                        None => missing = true,
                    }
                });
                if missing || half * 2 != q.side {
                    return Err(Error::Domain(format!("dyadic cube {q:?} has children outside the grid")));
                }
                let merged = kids
                    .iter()
                    .map(|&i| &summaries[l + 1][i])
                    .fold(None::<Summary>, |acc, s| Some(combine(acc, s)))
                    .expect("2^n children");
                level_children.push(kids);
                level_summaries.push(merged);
            }
            children[l] = level_children;
            summaries[l] = level_summaries;
        }

        let stats = levels
            .iter()
            .zip(&summaries)
            .map(|(cubes, sums)| {
                cubes.iter().zip(sums).map(|(q, s)| statistic(kind, ranking.as_ref(), s, q.num_cells())).collect()
            })
            .collect();
        Ok(Tree { levels, children, stats })
    }

    /// Root nodes: cubes whose parent is not in the family.
    fn roots(&self) -> Vec<(usize, usize)> {
        let mut has_parent: Vec<Vec<bool>> = self.levels.iter().map(|l| vec![false; l.len()]).collect();
        for (l, kids) in self.children.iter().enumerate() {
            for k in kids.iter().flatten() {
                has_parent[l + 1][*k] = true;
            }
        }
        let mut roots = Vec::new();
        for (l, flags) in has_parent.iter().enumerate() {
            for (i, &p) in flags.iter().enumerate() {
                if !p {
                    roots.push((l, i));
                }
            }
        }
        roots
    }
}

fn leaf_summary(f: &StepFunction, q: &GridCube, ranking: Option<&Ranking>) -> Summary {
    let cells = q.cells(f.universe());
    match ranking {
        Some(r) => {
            let mut ranks: Vec<u32> = cells.iter().map(|&i| r.ranks[i]).collect();
            ranks.sort_unstable();
            let mut h: Histogram = Vec::new();
            for x in ranks {
                match h.last_mut() {
                    Some((last, c)) if *last == x => *c += 1,
                    _ => h.push((x, 1)),
                }
            }
            Summary::Hist(h)
        }
        None => Summary::Sum(cells.iter().map(|&i| num_traits::Signed::abs(f.value(i))).sum()),
    }
}

fn combine(acc: Option<Summary>, s: &Summary) -> Summary {
    match (acc, s) {
        (None, Summary::Hist(h)) => Summary::Hist(h.clone()),
        (None, Summary::Sum(x)) => Summary::Sum(x.clone()),
        (Some(Summary::Hist(a)), Summary::Hist(b)) => Summary::Hist(merge(&a, b)),
        (Some(Summary::Sum(a)), Summary::Sum(b)) => Summary::Sum(a + b),
        _ => unreachable!("mixed summaries"),
    }
}

fn statistic(kind: &MaximalKind, ranking: Option<&Ranking>, s: &Summary, n: u64) -> Rational {
    match (kind, s) {
        (MaximalKind::Median, Summary::Hist(h)) => {
            let table = &ranking.unwrap().table;
            let lo = &table[kth_smallest(h, n.div_ceil(2)) as usize];
            let hi = &table[kth_smallest(h, n / 2 + 1) as usize];
            num_traits::Signed::abs(lo).max(num_traits::Signed::abs(hi))
        }
        (MaximalKind::Tau { tau }, Summary::Hist(h)) => {
            let j = rational::ceil_mul(tau, n);
            ranking.unwrap().table[kth_smallest(h, n - j + 1) as usize].clone()
        }
        (MaximalKind::HlAverage, Summary::Sum(x)) => x / rational::int(n as i64),
        _ => unreachable!("summary does not match kind"),
    }
}

/// `𝓜_𝒟` for the grid's cubes inside the universe: one bottom-up merge of
/// children's histograms, then one top-down pass of running maxima.
///
/// Equal to [`super::brute_maximal`] over [`crate::grid::CubeFamily::dyadic`].
pub fn dyadic_maximal(f: &StepFunction, grid: &DyadicGridSpec, kind: &MaximalKind) -> Result<StepFunction> {
    let tree = Tree::build(f, grid, kind)?;
    let u = f.universe();
    let mut out = vec![Rational::zero(); u.num_cells()];
    let mut stack: Vec<(usize, usize, Rational)> =
        tree.roots().into_iter().map(|(l, i)| (l, i, tree.stats[l][i].clone())).collect();
    while let Some((l, i, running)) = stack.pop() {
        if tree.children[l][i].is_empty() {
            for c in tree.levels[l][i].cells(u) {
                out[c] = running.clone();
            }
            continue;
        }
        for &k in &tree.children[l][i] {
            let s = &tree.stats[l + 1][k];
            let next = if s > &running { s.clone() } else { running.clone() };
            stack.push((l + 1, k, next));
        }
    }
    StepFunction::new(u.clone(), out)
}

/// Maximal cubes of a dyadic grid with `m^τ_f(Q) > λ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppingDecomposition {
    #[serde(with = "rational::serde_str")]
    pub level: Rational,
    #[serde(with = "rational::serde_str")]
    pub tau: Rational,
    pub cubes: Vec<GridCube>,
    pub grid: DyadicGridSpec,
}

/// The maximal grid cubes `Q_j` with `m^τ_f(Q_j) > λ`, in canonical order.
///
/// They are pairwise disjoint, their union is `{𝓜^τ_𝒟 f > λ}`, and each has
/// `|Q_j ∩ {|f| > λ}| ≥ τ|Q_j|`.
pub fn stopping_cubes(
    f: &StepFunction,
    grid: &DyadicGridSpec,
    tau: &Rational,
    lambda: &Rational,
) -> Result<StoppingDecomposition> {
    check_tau(tau)?;
    if lambda < &Rational::zero() {
        return Err(Error::Domain("stopping level must be non-negative".into()));
    }
    let tree = Tree::build(f, grid, &MaximalKind::tau(tau.clone()))?;
    let mut cubes = Vec::new();
    let mut stack = tree.roots();
    while let Some((l, i)) = stack.pop() {
        if &tree.stats[l][i] > lambda {
            cubes.push(tree.levels[l][i].clone());
        } else {
            stack.extend(tree.children[l][i].iter().map(|&k| (l + 1, k)));
        }
    }
    cubes.sort();
    Ok(StoppingDecomposition { level: lambda.clone(), tau: tau.clone(), cubes, grid: grid.clone() })
}
