//! Step functions, weights and sets on a [`Universe`], with exact measures
//! and weighted norms.
//!
//! A step function is the cell-constant representative of its a.e. class, so
//! every set `{f > λ} ∩ Q` is a union of whole cells and its measure is a
//! cell count times `hⁿ`.

use std::fmt::Write as _;
use std::ops::{Add, Sub};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{for_each_index, GridBox, GridCube, Universe};
use crate::rational::{self, Rational};

/// Real-valued function constant on each cell; values are row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepFunction {
    #[serde(flatten)]
    universe: Universe,
    #[serde(with = "rational::serde_vec")]
    values: Vec<Rational>,
}

/// Comparison used to select a level set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Gt,
    Ge,
    Lt,
    Le,
}

impl StepFunction {
    pub fn new(universe: Universe, values: Vec<Rational>) -> Result<Self> {
        let f = StepFunction { universe, values };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        self.universe.validate()?;
        if self.values.len() != self.universe.num_cells() {
            return Err(Error::Domain(format!(
                "{} values for a universe of {} cells",
                self.values.len(),
                self.universe.num_cells()
            )));
        }
        Ok(())
    }

    pub fn constant(universe: &Universe, c: Rational) -> Self {
        StepFunction { values: vec![c; universe.num_cells()], universe: universe.clone() }
    }

    pub fn zero(universe: &Universe) -> Self {
        Self::constant(universe, Rational::zero())
    }

    /// Evaluates `g` on the cell coordinates of every cell.
    pub fn from_cells(universe: &Universe, mut g: impl FnMut(&[usize]) -> Rational) -> Self {
        let mut values = Vec::with_capacity(universe.num_cells());
        for_each_index(&vec![0; universe.dims()], universe.extent(), |c| values.push(g(c)));
        StepFunction { universe: universe.clone(), values }
    }

    pub fn indicator(set: &IndicatorSet) -> Self {
        StepFunction {
            universe: set.universe.clone(),
            values: set.mask.iter().map(|&b| if b { rational::int(1) } else { Rational::zero() }).collect(),
        }
    }

    /// `χ_{[lo, hi)ⁿ}`: 1 on cells lying inside the cube, 0 elsewhere.
    pub fn box_indicator(universe: &Universe, lo: &Rational, hi: &Rational) -> Self {
        Self::box_valued(universe, lo, hi, &rational::int(1), &Rational::zero())
    }

    /// `inside` on cells lying in `[lo, hi)ⁿ`, `outside` elsewhere.
    pub fn box_valued(
        universe: &Universe,
        lo: &Rational,
        hi: &Rational,
        inside: &Rational,
        outside: &Rational,
    ) -> Self {
        let h = universe.cell().clone();
        Self::from_cells(universe, |c| {
            let within = c.iter().enumerate().all(|(d, &i)| {
                let x = universe.node(d, i);
                &x >= lo && &(&x + &h) <= hi
            });
            if within {
                inside.clone()
            } else {
                outside.clone()
            }
        })
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, idx: usize) -> &Rational {
        &self.values[idx]
    }

    pub fn map(&self, g: impl Fn(&Rational) -> Rational) -> Self {
        StepFunction { universe: self.universe.clone(), values: self.values.iter().map(g).collect() }
    }

    pub fn abs(&self) -> Self {
        self.map(|v| v.abs())
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        self.map(|v| v * c)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| !v.is_negative())
    }

    pub fn max_abs(&self) -> Rational {
        self.values.iter().map(|v| v.abs()).max().unwrap_or_else(Rational::zero)
    }

    /// Number of cells where `f ≠ 0`.
    pub fn support_cells(&self) -> usize {
        self.values.iter().filter(|v| !v.is_zero()).count()
    }

    /// Smallest box containing `{f ≠ 0}`, if any.
    pub fn support_box(&self) -> Option<GridBox> {
        let n = self.universe.dims();
        let mut lower = vec![usize::MAX; n];
        let mut upper = vec![0; n];
        let mut any = false;
        for (i, v) in self.values.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            any = true;
            for (d, c) in self.universe.coords(i).into_iter().enumerate() {
                lower[d] = lower[d].min(c);
                upper[d] = upper[d].max(c + 1);
            }
        }
        any.then_some(GridBox { lower, upper })
    }

    /// Sorted distinct values of `|f|`.
    pub fn distinct_abs_values(&self) -> Vec<Rational> {
        let mut v: Vec<Rational> = self.values.iter().map(|x| x.abs()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// The cells where `f ⋈ λ` (or `|f| ⋈ λ` when `absolute`).
    pub fn level_set(&self, cmp: Cmp, lambda: &Rational, absolute: bool) -> IndicatorSet {
        IndicatorSet {
            universe: self.universe.clone(),
            mask: self.values.iter().map(|v| compare(v, cmp, lambda, absolute)).collect(),
        }
    }

    /// `f` embedded in a larger universe on the same grid, zero outside.
    pub fn embed(&self, target: &Universe) -> Result<Self> {
        let offsets = grid_offset(&self.universe, target)?;
        let mut out = StepFunction::zero(target);
        for (i, v) in self.values.iter().enumerate() {
            let c: Vec<usize> = self.universe.coords(i).iter().zip(&offsets).map(|(c, o)| c + o).collect();
            out.values[target.linear(&c)] = v.clone();
        }
        Ok(out)
    }

    /// Restriction to a sub-universe on the same grid.
    pub fn restrict(&self, target: &Universe) -> Result<Self> {
        let offsets = grid_offset(target, &self.universe)?;
        Ok(StepFunction::from_cells(target, |c| {
            let outer: Vec<usize> = c.iter().zip(&offsets).map(|(c, o)| c + o).collect();
            self.values[self.universe.linear(&outer)].clone()
        }))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: StepFunction = serde_json::from_str(text)?;
        f.validate()?;
        Ok(f)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// One row per cell: index, cell-centre coordinate(s), value.
    pub fn to_csv(&self) -> String {
        let u = &self.universe;
        let mut out = String::new();
        if u.dims() == 1 {
            out.push_str("index,coordinate,value\n");
        } else {
            out.push_str("index");
            for d in 0..u.dims() {
                let _ = write!(out, ",coordinate_{d}");
            }
            out.push_str(",value\n");
        }
        let half = u.cell() / rational::int(2);
        for (i, v) in self.values.iter().enumerate() {
            let _ = write!(out, "{i}");
            for (d, c) in u.coords(i).into_iter().enumerate() {
                let _ = write!(out, ",{}", rational::to_f64(&(u.node(d, c) + &half)));
            }
            let _ = writeln!(out, ",{}", rational::to_f64(v));
        }
        out
    }
}

/// Per-axis cell offset of `inner` inside `outer`; both must share cell size
/// and node lattice.
pub fn grid_offset(inner: &Universe, outer: &Universe) -> Result<Vec<usize>> {
    if inner.dims() != outer.dims() || inner.cell() != outer.cell() {
        return Err(Error::UniverseMismatch("different dimension or cell size".into()));
    }
    (0..inner.dims())
        .map(|d| {
            let off = outer
                .node_index(d, &inner.origin()[d])
                .filter(|&o| o >= 0)
                .ok_or_else(|| Error::UniverseMismatch("origins not on a common lattice".into()))?
                as usize;
            if off + inner.extent()[d] > outer.extent()[d] {
                return Err(Error::UniverseMismatch("inner universe sticks out".into()));
            }
            Ok(off)
        })
        .collect()
}

fn compare(v: &Rational, cmp: Cmp, lambda: &Rational, absolute: bool) -> bool {
    let a;
    let x = if absolute {
        a = v.abs();
        &a
    } else {
        v
    };
    match cmp {
        Cmp::Gt => x > lambda,
        Cmp::Ge => x >= lambda,
        Cmp::Lt => x < lambda,
        Cmp::Le => x <= lambda,
    }
}

/// Number of cells of `q` where `g ⋈ λ`, `g` being `f` or `|f|`.
pub fn count_cmp(f: &StepFunction, q: &GridCube, cmp: Cmp, lambda: &Rational, absolute: bool) -> Result<u64> {
    if !f.universe.contains(q) {
        return Err(Error::Domain(format!("cube {q:?} outside universe")));
    }
    Ok(q.cells(&f.universe).into_iter().filter(|&i| compare(&f.values[i], cmp, lambda, absolute)).count() as u64)
}

/// `|Q ∩ {g > λ}|` (or `≥` when not `strict`), `g` being `f` or `|f|`.
pub fn measure_above(
    f: &StepFunction,
    q: &GridCube,
    lambda: &Rational,
    strict: bool,
    absolute: bool,
) -> Result<Rational> {
    let cmp = if strict { Cmp::Gt } else { Cmp::Ge };
    measure_cmp(f, q, cmp, lambda, absolute)
}

/// `|Q ∩ {g ⋈ λ}|`; the `<` and `≤` forms are complements of `≥` and `>`.
pub fn measure_cmp(f: &StepFunction, q: &GridCube, cmp: Cmp, lambda: &Rational, absolute: bool) -> Result<Rational> {
    let (base, complement) = match cmp {
        Cmp::Gt => (Cmp::Gt, false),
        Cmp::Ge => (Cmp::Ge, false),
        Cmp::Lt => (Cmp::Ge, true),
        Cmp::Le => (Cmp::Gt, true),
    };
    let hits = count_cmp(f, q, base, lambda, absolute)?;
    let count = if complement { q.num_cells() - hits } else { hits };
    Ok(f.universe.cell_measure() * rational::int(count as i64))
}

/// Non-negative step function used as a density.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "StepFunction", into = "StepFunction")]
pub struct Weight {
    base: StepFunction,
}

impl TryFrom<StepFunction> for Weight {
    type Error = Error;

    fn try_from(base: StepFunction) -> Result<Self> {
        Weight::new(base)
    }
}

impl From<Weight> for StepFunction {
    fn from(w: Weight) -> Self {
        w.base
    }
}

impl Weight {
    pub fn new(base: StepFunction) -> Result<Self> {
        base.validate()?;
        if let Some(i) = base.values.iter().position(|v| v.is_negative()) {
            return Err(Error::Domain(format!("weight is negative at cell {i}")));
        }
        Ok(Weight { base })
    }

    pub fn unit(universe: &Universe) -> Self {
        Weight { base: StepFunction::constant(universe, rational::int(1)) }
    }

    pub fn function(&self) -> &StepFunction {
        &self.base
    }

    pub fn universe(&self) -> &Universe {
        &self.base.universe
    }

    pub fn values(&self) -> &[Rational] {
        &self.base.values
    }

    pub fn is_positive(&self) -> bool {
        self.base.values.iter().all(|v| v.is_positive())
    }

    /// `w(Q) = Σ_{cells ⊆ Q} w·hⁿ`.
    pub fn measure_cube(&self, q: &GridCube) -> Rational {
        let s: Rational = q.cells(self.universe()).into_iter().map(|i| &self.base.values[i]).sum();
        s * self.universe().cell_measure()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Weight::new(StepFunction::from_json(text)?)
    }
}

/// A union of cells.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndicatorSet {
    universe: Universe,
    mask: Vec<bool>,
}

impl IndicatorSet {
    pub fn new(universe: Universe, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != universe.num_cells() {
            return Err(Error::Domain(format!(
                "mask of {} cells for a universe of {}",
                mask.len(),
                universe.num_cells()
            )));
        }
        Ok(IndicatorSet { universe, mask })
    }

    pub fn empty(universe: &Universe) -> Self {
        IndicatorSet { universe: universe.clone(), mask: vec![false; universe.num_cells()] }
    }

    pub fn full(universe: &Universe) -> Self {
        IndicatorSet { universe: universe.clone(), mask: vec![true; universe.num_cells()] }
    }

    pub fn from_cube(universe: &Universe, q: &GridCube) -> Self {
        let mut s = Self::empty(universe);
        for i in q.cells(universe) {
            s.mask[i] = true;
        }
        s
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    pub fn insert(&mut self, idx: usize) {
        self.mask[idx] = true;
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn measure(&self) -> Rational {
        self.universe.cell_measure() * rational::int(self.count() as i64)
    }

    /// Number of cells of `q` in the set.
    pub fn count_in(&self, q: &GridCube) -> u64 {
        q.cells(&self.universe).into_iter().filter(|&i| self.mask[i]).count() as u64
    }

    pub fn intersect_cube(&self, q: &GridCube) -> Self {
        let inside = Self::from_cube(&self.universe, q);
        self.intersection(&inside)
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !(a && b))
    }

    fn zip_with(&self, other: &Self, op: impl Fn(bool, bool) -> bool) -> Self {
        IndicatorSet {
            universe: self.universe.clone(),
            mask: self.mask.iter().zip(&other.mask).map(|(&a, &b)| op(a, b)).collect(),
        }
    }
}

/// `w(E)`, exact.
pub fn weighted_measure(w: &Weight, e: &IndicatorSet) -> Result<Rational> {
    if w.universe() != e.universe() {
        return Err(Error::UniverseMismatch("weight and set live on different universes".into()));
    }
    let s: Rational = w.values().iter().zip(&e.mask).filter(|(_, &b)| b).map(|(v, _)| v).sum();
    Ok(s * w.universe().cell_measure())
}

/// Value of an `L^p` norm: exact for `p = 1`, floating otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum NormValue {
    Exact(Rational),
    Approx(f64),
}

impl NormValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            NormValue::Exact(r) => rational::to_f64(r),
            NormValue::Approx(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            NormValue::Exact(r) => Some(r),
            NormValue::Approx(_) => None,
        }
    }
}

fn check_same(f: &StepFunction, w: &Weight) -> Result<()> {
    if f.universe() != w.universe() {
        return Err(Error::UniverseMismatch("function and weight live on different universes".into()));
    }
    Ok(())
}

/// `‖f‖_{L¹(w)} = Σ |f|·w·hⁿ`.
pub fn l1_norm(f: &StepFunction, w: &Weight) -> Result<Rational> {
    check_same(f, w)?;
    let s: Rational = f.values.iter().zip(w.values()).map(|(a, b)| a.abs() * b).sum();
    Ok(s * f.universe.cell_measure())
}

/// `(Σ |f|^p·w·hⁿ)^{1/p}`; exact for `p = 1`.
pub fn lp_norm(f: &StepFunction, w: &Weight, p: &Rational) -> Result<NormValue> {
    if !p.is_positive() {
        return Err(Error::Domain("p must be positive".into()));
    }
    if p.is_integer() && p.to_integer() == 1.into() {
        return l1_norm(f, w).map(NormValue::Exact);
    }
    Ok(NormValue::Approx(lp_norm_f64(f, w, rational::to_f64(p))?))
}

/// Floating `L^p(w)` norm in fixed cell order.
pub fn lp_norm_f64(f: &StepFunction, w: &Weight, p: f64) -> Result<f64> {
    check_same(f, w)?;
    let h = rational::to_f64(&f.universe.cell_measure());
    let s: f64 =
        f.values.iter().zip(w.values()).map(|(a, b)| rational::to_f64(&a.abs()).powf(p) * rational::to_f64(b)).sum();
    Ok((s * h).powf(1.0 / p))
}

/// Layer-cake form of `‖f‖_{L¹(w)}`: `Σ_j (v_j − v_{j−1})·w({|f| ≥ v_j})`
/// over the distinct values `0 = v_0 < v_1 < …` of `|f|`.
pub fn distribution_form_l1(f: &StepFunction, w: &Weight) -> Result<Rational> {
    check_same(f, w)?;
    let mut prev = Rational::zero();
    let mut total = Rational::zero();
    for v in f.distinct_abs_values().into_iter().filter(|v| v.is_positive()) {
        let level = f.level_set(Cmp::Ge, &v, true);
        total += (&v - &prev) * weighted_measure(w, &level)?;
        prev = v;
    }
    Ok(total)
}

/// Layer-cake form `(Σ_j (v_j^p − v_{j−1}^p)·w({|f| ≥ v_j}))^{1/p}`.
pub fn distribution_form_lp(f: &StepFunction, w: &Weight, p: f64) -> Result<f64> {
    check_same(f, w)?;
    let mut prev = 0.0f64;
    let mut total = 0.0f64;
    for v in f.distinct_abs_values().into_iter().filter(|v| v.is_positive()) {
        let level = f.level_set(Cmp::Ge, &v, true);
        let vp = rational::to_f64(&v).powf(p);
        total += (vp - prev) * rational::to_f64(&weighted_measure(w, &level)?);
        prev = vp;
    }
    Ok(total.powf(1.0 / p))
}

/// Summed-area table over the cells of a universe, for O(2ⁿ) box sums.
#[derive(Clone, Debug)]
pub struct PrefixSums<T> {
    dims: Vec<usize>,
    table: Vec<T>,
}

impl<T> PrefixSums<T>
where
    T: Clone + Zero + for<'a> Add<&'a T, Output = T> + for<'a> Sub<&'a T, Output = T>,
{
    pub fn new(u: &Universe, values: impl IntoIterator<Item = T>) -> Self {
        let dims: Vec<usize> = u.extent().iter().map(|e| e + 1).collect();
        let size: usize = dims.iter().product();
        let mut table = vec![T::zero(); size];
        let strides = table_strides(&dims);
        let mut values = values.into_iter();
        for_each_index(&vec![0; u.dims()], u.extent(), |c| {
            let idx: usize = c.iter().zip(&strides).map(|(ci, s)| (ci + 1) * s).sum();
            table[idx] = values.next().expect("one value per cell");
        });
        for d in 0..dims.len() {
            let s = strides[d];
            for idx in 0..size {
                if !(idx / s).is_multiple_of(dims[d]) {
                    let prev = table[idx - s].clone();
                    table[idx] = prev + &table[idx];
                }
            }
        }
        PrefixSums { dims, table }
    }

    /// Sum over the cells of `[lower, upper)`.
    pub fn box_sum(&self, lower: &[usize], upper: &[usize]) -> T {
        let n = lower.len();
        let strides = table_strides(&self.dims);
        let mut total = T::zero();
        for mask in 0..1usize << n {
            let mut idx = 0;
            let mut lows = 0;
            for d in 0..n {
                if (mask >> d) & 1 == 1 {
                    idx += lower[d] * strides[d];
                    lows += 1;
                } else {
                    idx += upper[d] * strides[d];
                }
            }
            total = if lows % 2 == 0 { total + &self.table[idx] } else { total - &self.table[idx] };
        }
        total
    }

    pub fn cube_sum(&self, q: &GridCube) -> T {
        let upper: Vec<usize> = q.corner.iter().map(|c| c + q.side).collect();
        self.box_sum(&q.corner, &upper)
    }
}

fn table_strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for d in (0..dims.len().saturating_sub(1)).rev() {
        s[d] = s[d + 1] * dims[d + 1];
    }
    s
}
