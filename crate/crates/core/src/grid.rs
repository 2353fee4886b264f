//! Cube geometry on a finite uniform grid.
//!
//! A [`Universe`] is a box `origin + [0, extent_i·h)` cut into congruent
//! half-open cells of side `h`. Every cube the operators range over is a
//! [`GridCube`]: a half-open cube whose corners sit on grid nodes. Dyadic
//! grids (optionally shifted by one third) are enumerated as the subset of
//! their cubes that fit inside the universe and align with its cells.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Bounded window of ℝⁿ split into `Π extent_i` cells of side `cell`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Universe {
    dims: usize,
    #[serde(with = "rational::serde_vec")]
    origin: Vec<Rational>,
    #[serde(with = "rational::serde_str")]
    cell: Rational,
    extent: Vec<usize>,
}

impl Universe {
    pub fn new(origin: Vec<Rational>, cell: Rational, extent: Vec<usize>) -> Result<Self> {
        let u = Universe { dims: origin.len(), origin, cell, extent };
        u.validate()?;
        Ok(u)
    }

    /// The cube `[lo, hi)ⁿ` cut into cells of side `cell`; `hi - lo` must be a
    /// whole number of cells.
    pub fn cube(dims: usize, lo: &Rational, hi: &Rational, cell: &Rational) -> Result<Self> {
        let cells = (hi - lo) / cell;
        if !cells.is_integer() || !cells.is_positive() {
            return Err(Error::Domain(format!(
                "[{}, {}) is not a positive whole number of cells of side {}",
                rational::format(lo),
                rational::format(hi),
                rational::format(cell)
            )));
        }
        let n = cells.to_integer().to_usize().ok_or_else(|| Error::Domain("extent overflow".into()))?;
        Universe::new(vec![lo.clone(); dims], cell.clone(), vec![n; dims])
    }

    /// One-dimensional `[lo, hi)`.
    pub fn interval(lo: &Rational, hi: &Rational, cell: &Rational) -> Result<Self> {
        Universe::cube(1, lo, hi, cell)
    }

    /// Checks the invariants after deserialization.
    pub fn validate(&self) -> Result<()> {
        if self.dims == 0 {
            return Err(Error::Domain("universe needs at least one dimension".into()));
        }
        if self.origin.len() != self.dims || self.extent.len() != self.dims {
            return Err(Error::Domain(format!(
                "universe has dims {} but origin has {} entries and extent {}",
                self.dims,
                self.origin.len(),
                self.extent.len()
            )));
        }
        if !self.cell.is_positive() {
            return Err(Error::Domain("cell side must be positive".into()));
        }
        if self.extent.contains(&0) {
            return Err(Error::Domain("every extent must be positive".into()));
        }
        Ok(())
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn origin(&self) -> &[Rational] {
        &self.origin
    }

    pub fn cell(&self) -> &Rational {
        &self.cell
    }

    pub fn extent(&self) -> &[usize] {
        &self.extent
    }

    pub fn num_cells(&self) -> usize {
        self.extent.iter().product()
    }

    /// `hⁿ`, the measure of one cell.
    pub fn cell_measure(&self) -> Rational {
        rational::pow(&self.cell, self.dims as u32)
    }

    pub fn measure(&self) -> Rational {
        self.cell_measure() * rational::int(self.num_cells() as i64)
    }

    /// Row-major strides; the last axis varies fastest.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims];
        for d in (0..self.dims.saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * self.extent[d + 1];
        }
        strides
    }

    pub fn linear(&self, coords: &[usize]) -> usize {
        let mut idx = 0;
        for (d, &c) in coords.iter().enumerate() {
            idx = idx * self.extent[d] + c;
        }
        idx
    }

    pub fn coords(&self, mut idx: usize) -> Vec<usize> {
        let mut coords = vec![0; self.dims];
        for d in (0..self.dims).rev() {
            coords[d] = idx % self.extent[d];
            idx /= self.extent[d];
        }
        coords
    }

    /// Lower coordinate of cell index `i` along `axis`.
    pub fn node(&self, axis: usize, i: usize) -> Rational {
        &self.origin[axis] + &self.cell * rational::int(i as i64)
    }

    /// Cell index containing coordinate `x` along `axis`, if inside.
    pub fn cell_at(&self, axis: usize, x: &Rational) -> Option<usize> {
        let i = ((x - &self.origin[axis]) / &self.cell).floor().to_integer();
        let i = i.to_i64()?;
        (i >= 0 && (i as usize) < self.extent[axis]).then_some(i as usize)
    }

    /// Number of cells `x` lies from the origin along `axis`, if `x` is a node.
    pub fn node_index(&self, axis: usize, x: &Rational) -> Option<i64> {
        let q = (x - &self.origin[axis]) / &self.cell;
        q.is_integer().then(|| q.to_integer().to_i64()).flatten()
    }

    pub fn contains(&self, q: &GridCube) -> bool {
        q.side > 0 && q.corner.len() == self.dims && q.corner.iter().zip(&self.extent).all(|(&c, &e)| c + q.side <= e)
    }

    pub fn contains_box(&self, b: &GridBox) -> bool {
        b.lower.len() == self.dims
            && b.lower.iter().zip(&b.upper).zip(&self.extent).all(|((&l, &u), &e)| l < u && u <= e)
    }

    /// Same grid extended by `margin` cells on both sides of every axis.
    pub fn padded(&self, margin: usize) -> Universe {
        let m = rational::int(margin as i64);
        Universe {
            dims: self.dims,
            origin: self.origin.iter().map(|o| o - &self.cell * &m).collect(),
            cell: self.cell.clone(),
            extent: self.extent.iter().map(|e| e + 2 * margin).collect(),
        }
    }

    pub fn same_grid(&self, other: &Universe) -> bool {
        self == other
    }

    /// The whole universe as a box of cells.
    pub fn full_box(&self) -> GridBox {
        GridBox { lower: vec![0; self.dims], upper: self.extent.clone() }
    }
}

/// Axis-aligned half-open cube `[corner, corner + side)` in cell units.
///
/// Field order makes the derived ordering the canonical `(side, corner)`
/// lexicographic order used by every enumeration.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridCube {
    pub side: usize,
    pub corner: Vec<usize>,
}

impl GridCube {
    pub fn new(corner: Vec<usize>, side: usize) -> Self {
        GridCube { side, corner }
    }

    pub fn num_cells(&self) -> u64 {
        (self.side as u64).pow(self.corner.len() as u32)
    }

    pub fn measure(&self, u: &Universe) -> Rational {
        rational::pow(&(u.cell() * rational::int(self.side as i64)), u.dims() as u32)
    }

    pub fn as_box(&self) -> GridBox {
        GridBox { lower: self.corner.clone(), upper: self.corner.iter().map(|c| c + self.side).collect() }
    }

    pub fn contains_cell(&self, coords: &[usize]) -> bool {
        self.corner.iter().zip(coords).all(|(&c, &x)| c <= x && x < c + self.side)
    }

    pub fn contains_cube(&self, other: &GridCube) -> bool {
        self.corner.iter().zip(&other.corner).all(|(&c, &o)| c <= o && o + other.side <= c + self.side)
    }

    pub fn intersects(&self, other: &GridCube) -> bool {
        self.corner.iter().zip(&other.corner).all(|(&c, &o)| c < o + other.side && o < c + self.side)
    }

    /// Linear indices of the cells of this cube, in row-major order.
    pub fn cells(&self, u: &Universe) -> Vec<usize> {
        self.as_box().cells(u)
    }
}

/// Half-open box of cells `[lower, upper)`; used where a cube is clipped.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridBox {
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
}

impl GridBox {
    pub fn num_cells(&self) -> u64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| (u - l) as u64).product()
    }

    pub fn cells(&self, u: &Universe) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.num_cells() as usize);
        for_each_index(&self.lower, &self.upper, |c| out.push(u.linear(c)));
        out
    }
}

/// Calls `f` on every multi-index in `[lower, upper)` in lexicographic order.
pub fn for_each_index(lower: &[usize], upper: &[usize], mut f: impl FnMut(&[usize])) {
    let n = lower.len();
    if lower.iter().zip(upper).any(|(l, u)| l >= u) {
        return;
    }
    let mut idx = lower.to_vec();
    loop {
        f(&idx);
        let mut d = n;
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < upper[d] {
                break;
            }
            idx[d] = lower[d];
        }
    }
}

/// A dyadic grid `{2^{-k}([0,1)ⁿ + m + (-1)^k·shift)}` restricted to scales
/// `k_min..=k_max`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicGridSpec {
    #[serde(with = "rational::serde_vec")]
    pub shift: Vec<Rational>,
    pub scale_range: (i32, i32),
}

/// The cubes of one scale of a dyadic grid that fit inside a universe.
#[derive(Clone, Debug)]
pub struct DyadicLevel {
    pub scale: i32,
    pub cubes: Vec<GridCube>,
}

/// Side length `2^{-k}`.
pub fn dyadic_side(k: i32) -> Rational {
    if k >= 0 {
        Rational::new(BigInt::one(), BigInt::one() << k as usize)
    } else {
        Rational::from_integer(BigInt::one() << (-k) as usize)
    }
}

const SCALE_SEARCH: i32 = 62;

impl DyadicGridSpec {
    pub fn new(shift: Vec<Rational>, scale_range: (i32, i32)) -> Result<Self> {
        let g = DyadicGridSpec { shift, scale_range };
        g.validate()?;
        Ok(g)
    }

    pub fn standard(dims: usize, scale_range: (i32, i32)) -> Self {
        DyadicGridSpec { shift: vec![Rational::zero(); dims], scale_range }
    }

    pub fn validate(&self) -> Result<()> {
        let third = rational::ratio(1, 3);
        if self.shift.is_empty() {
            return Err(Error::Domain("dyadic grid needs at least one dimension".into()));
        }
        if let Some(s) = self.shift.iter().find(|s| !s.is_zero() && **s != third) {
            return Err(Error::Domain(format!("grid shift {} not in {{0, 1/3}}", rational::format(s))));
        }
        if self.scale_range.0 > self.scale_range.1 {
            return Err(Error::Domain(format!("empty scale range {:?}", self.scale_range)));
        }
        Ok(())
    }

    pub fn dims(&self) -> usize {
        self.shift.len()
    }

    /// Lower corner offset `(-1)^k · shift · 2^{-k}` along `axis`.
    pub fn offset(&self, k: i32, axis: usize) -> Rational {
        let o = &self.shift[axis] * dyadic_side(k);
        if k.rem_euclid(2) == 1 {
            -o
        } else {
            o
        }
    }

    /// Real lower corner of the cube with multi-index `m` at scale `k`.
    pub fn lower_corner(&self, k: i32, m: &[i64]) -> Vec<Rational> {
        let s = dyadic_side(k);
        m.iter().enumerate().map(|(d, &mi)| self.offset(k, d) + &s * rational::int(mi)).collect()
    }

    fn aligned_at(&self, u: &Universe, k: i32) -> bool {
        let cells = dyadic_side(k) / u.cell();
        cells.is_integer() && (0..u.dims()).all(|d| ((self.offset(k, d) - &u.origin()[d]) / u.cell()).is_integer())
    }

    /// Widest scale range whose cubes align with the cells of `u` and fit in it:
    /// the finest scale is the finest aligned one, the coarsest the largest
    /// cube side not exceeding the shortest universe axis.
    pub fn fitted(u: &Universe, shift: Vec<Rational>) -> Result<Self> {
        let probe = DyadicGridSpec::new(shift, (0, 0))?;
        if probe.dims() != u.dims() {
            return Err(Error::UniverseMismatch(format!("grid has {} dims, universe {}", probe.dims(), u.dims())));
        }
        let shortest = u.cell() * rational::int(*u.extent().iter().min().unwrap() as i64);
        let k_min = (-SCALE_SEARCH..=SCALE_SEARCH)
            .find(|&k| dyadic_side(k) <= shortest)
            .ok_or_else(|| Error::Domain("universe too small for any dyadic scale".into()))?;
        let k_max = (k_min..=SCALE_SEARCH).take_while(|&k| probe.aligned_at(u, k)).last().ok_or_else(|| {
            Error::Misaligned(format!(
                "no dyadic scale of shift {:?} aligns with cells of side {}",
                probe.shift.iter().map(rational::format).collect::<Vec<_>>(),
                rational::format(u.cell())
            ))
        })?;
        Ok(DyadicGridSpec { shift: probe.shift, scale_range: (k_min, k_max) })
    }

    /// Cubes of each scale that lie inside `u`, coarse to fine. Fails if a
    /// scale that has cubes inside `u` does not align with the cells.
    pub fn levels(&self, u: &Universe) -> Result<Vec<DyadicLevel>> {
        self.validate()?;
        if self.dims() != u.dims() {
            return Err(Error::UniverseMismatch(format!("grid has {} dims, universe {}", self.dims(), u.dims())));
        }
        let (k_min, k_max) = self.scale_range;
        let mut levels = Vec::new();
        for k in k_min..=k_max {
            let s = dyadic_side(k);
            let mut ranges = Vec::with_capacity(u.dims());
            for d in 0..u.dims() {
                let lo = &u.origin()[d];
                let hi = u.node(d, u.extent()[d]);
                let off = self.offset(k, d);
                let first = ((lo - &off) / &s).ceil().to_integer();
                let end = ((&hi - &off) / &s).floor().to_integer();
                ranges.push((first, end));
            }
            if ranges.iter().any(|(a, b)| a >= b) {
                levels.push(DyadicLevel { scale: k, cubes: Vec::new() });
                continue;
            }
            if !self.aligned_at(u, k) {
                return Err(Error::Misaligned(format!(
                    "scale {k} (side {}) does not align with cells of side {}",
                    rational::format(&s),
                    rational::format(u.cell())
                )));
            }
            let side = (&s / u.cell()).to_integer().to_usize().expect("aligned side");
            let firsts: Vec<usize> = (0..u.dims())
                .map(|d| {
                    let lower = self.offset(k, d) + &s * Rational::from_integer(ranges[d].0.clone());
                    u.node_index(d, &lower).expect("aligned corner") as usize
                })
                .collect();
            let counts: Vec<usize> = ranges.iter().map(|(a, b)| (b - a).to_usize().expect("count fits")).collect();
            let mut cubes = Vec::new();
            for_each_index(&vec![0; u.dims()], &counts, |m| {
                let corner = m.iter().zip(&firsts).map(|(mi, f)| f + mi * side).collect();
                cubes.push(GridCube::new(corner, side));
            });
            levels.push(DyadicLevel { scale: k, cubes });
        }
        Ok(levels)
    }
}

/// The `2ⁿ` grids with shifts `{0, 1/3}ⁿ`, first axis most significant.
pub fn shifted_grids(n: usize, scale_range: (i32, i32)) -> Vec<DyadicGridSpec> {
    let third = rational::ratio(1, 3);
    (0..1usize << n)
        .map(|mask| DyadicGridSpec {
            shift: (0..n)
                .map(|d| if (mask >> (n - 1 - d)) & 1 == 1 { third.clone() } else { Rational::zero() })
                .collect(),
            scale_range,
        })
        .collect()
}

/// Shifted grids fitted to a universe (each with its own aligned scale range).
pub fn shifted_grids_fitted(u: &Universe) -> Result<Vec<DyadicGridSpec>> {
    shifted_grids(u.dims(), (0, 0)).into_iter().map(|g| DyadicGridSpec::fitted(u, g.shift)).collect()
}

/// A cube of one of several dyadic grids, in real coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Covering {
    pub grid: usize,
    pub scale: i32,
    pub index: Vec<i64>,
    #[serde(with = "rational::serde_vec")]
    pub lower: Vec<Rational>,
    #[serde(with = "rational::serde_str")]
    pub side: Rational,
    /// `|R| / |Q|`.
    #[serde(with = "rational::serde_str")]
    pub ratio: Rational,
}

impl Covering {
    /// The covering cube in cell units, when it aligns with `u` and fits inside.
    pub fn to_grid_cube(&self, u: &Universe) -> Option<GridCube> {
        let side = &self.side / u.cell();
        if !side.is_integer() {
            return None;
        }
        let side = side.to_integer().to_usize()?;
        let corner = self
            .lower
            .iter()
            .enumerate()
            .map(|(d, x)| u.node_index(d, x).and_then(|i| usize::try_from(i).ok()))
            .collect::<Option<Vec<_>>>()?;
        let q = GridCube::new(corner, side);
        u.contains(&q).then_some(q)
    }
}

/// Finds the smallest cube `R` among `grids` with `Q ⊆ R`; errors if none
/// with `|R| ≤ 6ⁿ|Q|` exists in the grids' scale ranges.
pub fn covering_cube(q: &GridCube, u: &Universe, grids: &[DyadicGridSpec]) -> Result<Covering> {
    let lower: Vec<Rational> = q.corner.iter().enumerate().map(|(d, &c)| u.node(d, c)).collect();
    let len = u.cell() * rational::int(q.side as i64);
    covering_cube_real(&lower, &len, grids).map_err(|e| match e {
        Error::ScaleRangeExhausted { bound, .. } => Error::ScaleRangeExhausted { cube: q.clone(), bound },
        other => other,
    })
}

/// [`covering_cube`] for a cube given by real lower corner and side length.
pub fn covering_cube_real(lower: &[Rational], len: &Rational, grids: &[DyadicGridSpec]) -> Result<Covering> {
    let n = lower.len();
    let bound = 6u64.pow(n as u32);
    let max_side = len * rational::int(6);
    let exhausted = || Error::ScaleRangeExhausted { cube: GridCube::new(vec![], 0), bound };
    if grids.is_empty() {
        return Err(exhausted());
    }
    let k_hi = grids.iter().map(|g| g.scale_range.1).max().unwrap();
    let k_lo = grids.iter().map(|g| g.scale_range.0).min().unwrap();
    for k in (k_lo..=k_hi).rev() {
        let s = dyadic_side(k);
        if &s < len {
            continue;
        }
        if s > max_side {
            break;
        }
        for (j, g) in grids.iter().enumerate() {
            if g.dims() != n || k < g.scale_range.0 || k > g.scale_range.1 {
                continue;
            }
            let mut index = Vec::with_capacity(n);
            let fits = (0..n).all(|d| {
                let off = g.offset(k, d);
                let m = ((&lower[d] - &off) / &s).floor().to_integer();
                let r_hi = &off + &s * Rational::from_integer(&m + 1);
                index.push(m.to_i64().unwrap_or(i64::MAX));
                &lower[d] + len <= r_hi
            });
            if fits {
                let ratio = rational::pow(&(&s / len), n as u32);
                return Ok(Covering { grid: j, scale: k, lower: g.lower_corner(k, &index), index, side: s, ratio });
            }
        }
    }
    Err(exhausted())
}

/// Family kinds over which suprema are taken.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    AllGridAligned { max_side: usize },
    Dyadic { grid: DyadicGridSpec },
    Explicit { cubes: Vec<GridCube> },
}

/// A finite, enumerable set of cubes inside a universe.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeFamily {
    pub universe: Universe,
    #[serde(flatten)]
    pub kind: FamilyKind,
}

impl CubeFamily {
    pub fn all_grid_aligned(universe: &Universe, max_side: usize) -> Self {
        CubeFamily { universe: universe.clone(), kind: FamilyKind::AllGridAligned { max_side } }
    }

    /// Every grid-aligned cube of the universe.
    pub fn all(universe: &Universe) -> Self {
        let max_side = *universe.extent().iter().min().unwrap();
        Self::all_grid_aligned(universe, max_side)
    }

    pub fn dyadic(universe: &Universe, grid: DyadicGridSpec) -> Self {
        CubeFamily { universe: universe.clone(), kind: FamilyKind::Dyadic { grid } }
    }

    pub fn explicit(universe: &Universe, cubes: Vec<GridCube>) -> Self {
        CubeFamily { universe: universe.clone(), kind: FamilyKind::Explicit { cubes } }
    }

    /// Every cube of the family exactly once, ordered by `(side, corner)`.
    pub fn enumerate_cubes(&self) -> Result<Vec<GridCube>> {
        let u = &self.universe;
        match &self.kind {
            FamilyKind::AllGridAligned { max_side } => {
                let top = (*max_side).min(*u.extent().iter().min().unwrap());
                let mut out = Vec::new();
                for side in 1..=top {
                    let upper: Vec<usize> = u.extent().iter().map(|e| e - side + 1).collect();
                    for_each_index(&vec![0; u.dims()], &upper, |c| out.push(GridCube::new(c.to_vec(), side)));
                }
                Ok(out)
            }
            FamilyKind::Dyadic { grid } => {
                let mut out: Vec<GridCube> = grid.levels(u)?.into_iter().flat_map(|l| l.cubes).collect();
                out.sort();
                Ok(out)
            }
            FamilyKind::Explicit { cubes } => {
                if let Some(q) = cubes.iter().find(|q| !u.contains(q)) {
                    return Err(Error::Domain(format!("explicit cube {q:?} outside universe")));
                }
                let mut out = cubes.clone();
                out.sort();
                out.dedup();
                Ok(out)
            }
        }
    }

    /// Short human-readable description for reports.
    pub fn describe(&self) -> String {
        match &self.kind {
            FamilyKind::AllGridAligned { max_side } => format!("all_grid_aligned(max_side={max_side})"),
            FamilyKind::Dyadic { grid } => format!(
                "dyadic(shift=[{}], scales={}..={})",
                grid.shift.iter().map(rational::format).collect::<Vec<_>>().join(","),
                grid.scale_range.0,
                grid.scale_range.1
            ),
            FamilyKind::Explicit { cubes } => format!("explicit({} cubes)", cubes.len()),
        }
    }
}
