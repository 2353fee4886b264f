//! Muckenhoupt characteristics of a weight over a finite cube family.
//!
//! A finite family only sees part of the supremum over all cubes of ℝⁿ, so
//! every [`Characteristic`] carries the family it was taken over and the cube
//! that attains it. Ties go to the first cube in canonical order.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::{CubeFamily, FamilyKind, GridCube, Universe};
use crate::maximal::{brute_maximal, MaximalKind, Ranking};
use crate::rational::{self, Rational};
use crate::stepfn::{PrefixSums, StepFunction, Weight};

/// Relative tolerance for floating characteristics.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum CharValue {
    Exact(Rational),
    Float(f64),
    Infinite,
}

impl CharValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            CharValue::Exact(r) => rational::to_f64(r),
            CharValue::Float(x) => *x,
            CharValue::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, CharValue::Infinite)
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            CharValue::Exact(r) => Some(r),
            _ => None,
        }
    }
}

impl Serialize for CharValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            CharValue::Exact(r) => s.serialize_str(&rational::format(r)),
            CharValue::Float(x) => s.serialize_f64(*x),
            CharValue::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for CharValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(CharValue::Float(x)),
            Raw::Text(t) if t == "inf" => Ok(CharValue::Infinite),
            Raw::Text(t) => rational::parse(&t, "value").map(CharValue::Exact).map_err(serde::de::Error::custom),
        }
    }
}

/// A supremum over a family with the cube attaining it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Characteristic {
    pub characteristic: String,
    pub value: CharValue,
    pub witness: Option<GridCube>,
    pub family: String,
    /// Cubes skipped because `w(Q) = 0`.
    pub skipped: usize,
}

/// Running supremum with first-witness tie breaking.
struct Sup<T> {
    best: Option<(T, GridCube)>,
    infinite: Option<GridCube>,
    skipped: usize,
}

impl<T: PartialOrd> Sup<T> {
    fn new() -> Self {
        Sup { best: None, infinite: None, skipped: 0 }
    }

    fn offer(&mut self, v: T, q: &GridCube) {
        if self.best.as_ref().is_none_or(|(b, _)| v > *b) {
            self.best = Some((v, q.clone()));
        }
    }

    fn offer_infinite(&mut self, q: &GridCube) {
        if self.infinite.is_none() {
            self.infinite = Some(q.clone());
        }
    }

    fn finish(self, name: &str, family: &CubeFamily, wrap: impl FnOnce(T) -> CharValue) -> Result<Characteristic> {
        let (value, witness) = match (self.infinite, self.best) {
            (Some(q), _) => (CharValue::Infinite, Some(q)),
            (None, Some((v, q))) => (wrap(v), Some(q)),
            (None, None) => {
                return Err(Error::Domain(format!("{name}: no cube of {} carries positive weight", family.describe())))
            }
        };
        Ok(Characteristic {
            characteristic: name.into(),
            value,
            witness,
            family: family.describe(),
            skipped: self.skipped,
        })
    }
}

fn same_universe(w_u: &Universe, family: &CubeFamily) -> Result<()> {
    if w_u != &family.universe {
        return Err(Error::UniverseMismatch("weight and family live on different universes".into()));
    }
    Ok(())
}

/// Calls `visit(cube, min rank)` for every cube of the family in canonical
/// order. All-grid-aligned families use the recurrence
/// `min_{s+1}(c) = min_{e ∈ {0,1}ⁿ} min_s(c + e)`, other families a scan.
fn for_each_cube_min(family: &CubeFamily, ranks: &[u32], mut visit: impl FnMut(&GridCube, u32)) -> Result<()> {
    let u = &family.universe;
    match &family.kind {
        FamilyKind::AllGridAligned { .. } => {
            let strides = u.strides();
            let n = u.dims();
            let cubes = family.enumerate_cubes()?;
            let mut cur: Vec<u32> = ranks.to_vec();
            let mut side = 1;
            for q in &cubes {
                while q.side > side {
                    let mut next = cur.clone();
                    let upper: Vec<usize> = u.extent().iter().map(|e| e - side).collect();
                    crate::grid::for_each_index(&vec![0; n], &upper, |c| {
                        let base: usize = c.iter().zip(&strides).map(|(ci, s)| ci * s).sum();
                        let mut m = u32::MAX;
                        for mask in 0..1usize << n {
                            let off: usize = (0..n).filter(|d| (mask >> d) & 1 == 1).map(|d| strides[d]).sum();
                            m = m.min(cur[base + off]);
                        }
                        next[base] = m;
                    });
                    cur = next;
                    side += 1;
                }
                visit(q, cur[u.linear(&q.corner)]);
            }
        }
        _ => {
            for q in family.enumerate_cubes()? {
                let m = q.cells(u).into_iter().map(|i| ranks[i]).min().expect("nonempty cube");
                visit(&q, m);
            }
        }
    }
    Ok(())
}

/// `[w]_{A₁} = sup_Q (w(Q)/|Q|)·‖w⁻¹‖_{L^∞(Q)}`, exact.
pub fn a1_characteristic(w: &Weight, family: &CubeFamily) -> Result<Characteristic> {
    same_universe(w.universe(), family)?;
    let ranking = Ranking::new(w.values().iter().cloned());
    if let Some(scaled) = scaled_integers(w.values()) {
        let mins: Vec<i128> = ranking.table.iter().map(|v| scale_one(v, &scaled.1)).collect();
        let sums = PrefixSums::new(w.universe(), scaled.0.iter().copied());
        let mut sup = Sup::<Frac>::new();
        for_each_cube_min(family, &ranking.ranks, |q, min_rank| {
            let total = sums.cube_sum(q);
            if total == 0 {
                sup.skipped += 1;
            } else if mins[min_rank as usize] == 0 {
                sup.offer_infinite(q);
            } else {
                sup.offer(Frac(total, mins[min_rank as usize] * q.num_cells() as i128), q);
            }
        })?;
        return sup.finish("A1", family, |f| CharValue::Exact(Rational::new(f.0.into(), f.1.into())));
    }
    let sums = PrefixSums::new(w.universe(), w.values().iter().cloned());
    let mut sup = Sup::<Rational>::new();
    for_each_cube_min(family, &ranking.ranks, |q, min_rank| {
        let total = sums.cube_sum(q);
        if total.is_zero() {
            sup.skipped += 1;
            return;
        }
        let min = &ranking.table[min_rank as usize];
        if min.is_zero() {
            sup.offer_infinite(q);
            return;
        }
        sup.offer(total / (min * rational::int(q.num_cells() as i64)), q);
    })?;
    sup.finish("A1", family, CharValue::Exact)
}

/// `num/den` with positive `den`, compared by cross-multiplication.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Frac(i128, i128);

impl PartialOrd for Frac {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        (self.0 * other.1).partial_cmp(&(other.0 * self.1))
    }
}

/// Values times the common denominator, when every product and cross product
/// of the A₁ quotient stays far inside `i128`.
fn scaled_integers(values: &[Rational]) -> Option<(Vec<i128>, BigInt)> {
    let lcm = values.iter().fold(BigInt::one(), |acc, v| num_integer::Integer::lcm(&acc, v.denom()));
    let scaled: Vec<i128> = values.iter().map(|v| scale_checked(v, &lcm)).collect::<Option<_>>()?;
    let total: i128 = scaled.iter().try_fold(0i128, |a, &b| a.checked_add(b))?;
    (total < 1 << 50 && values.len() < 1 << 20).then_some((scaled, lcm))
}

fn scale_checked(v: &Rational, lcm: &BigInt) -> Option<i128> {
    (v.numer() * (lcm / v.denom())).to_i128()
}

fn scale_one(v: &Rational, lcm: &BigInt) -> i128 {
    scale_checked(v, lcm).expect("value already scaled once")
}

/// `[w]_{A_p} = sup_Q ⟨w⟩_Q ⟨σ⟩_Q^{p−1}`, `σ = w^{−1/(p−1)}`. Exact for `p = 2`.
pub fn ap_characteristic(w: &Weight, p: &Rational, family: &CubeFamily) -> Result<Characteristic> {
    same_universe(w.universe(), family)?;
    if p <= &Rational::one() {
        return Err(Error::Domain(format!("A_p needs p > 1, got {}", rational::format(p))));
    }
    let name = format!("A_{}", rational::format(p));
    if p == &rational::int(2) && w.is_positive() {
        let sw = PrefixSums::new(w.universe(), w.values().iter().cloned());
        let ss = PrefixSums::new(w.universe(), w.values().iter().map(|v| v.recip()));
        let mut sup = Sup::<Rational>::new();
        for q in family.enumerate_cubes()? {
            let n2 = rational::int((q.num_cells() * q.num_cells()) as i64);
            sup.offer(sw.cube_sum(&q) * ss.cube_sum(&q) / n2, &q);
        }
        return sup.finish(&name, family, CharValue::Exact);
    }
    let vals: Vec<f64> = w.values().iter().map(rational::to_f64).collect();
    ap_characteristic_f64(w.universe(), &vals, rational::to_f64(p), family).map(|mut c| {
        c.characteristic = name;
        c
    })
}

/// [`ap_characteristic`] for a weight given by floating cell values.
pub fn ap_characteristic_f64(u: &Universe, w: &[f64], p: f64, family: &CubeFamily) -> Result<Characteristic> {
    same_universe(u, family)?;
    if p <= 1.0 {
        return Err(Error::Domain(format!("A_p needs p > 1, got {p}")));
    }
    let e = -1.0 / (p - 1.0);
    let zero_cells = PrefixSums::new(u, w.iter().map(|&x| (x == 0.0) as i64));
    let sw = PrefixSums::new(u, w.iter().copied());
    let ss = PrefixSums::new(u, w.iter().map(|&x| if x > 0.0 { x.powf(e) } else { 0.0 }));
    let mut sup = Sup::<f64>::new();
    for q in family.enumerate_cubes()? {
        let n = q.num_cells() as f64;
        let total = sw.cube_sum(&q);
        if total <= 0.0 {
            sup.skipped += 1;
            continue;
        }
        if zero_cells.cube_sum(&q) > 0 {
            sup.offer_infinite(&q);
            continue;
        }
        sup.offer((total / n) * (ss.cube_sum(&q) / n).powf(p - 1.0), &q);
    }
    sup.finish(&format!("A_{p}"), family, CharValue::Float)
}

/// `[w]_{A_∞} = sup_Q ⟨w⟩_Q exp(⟨log w⁻¹⟩_Q)`, floating.
pub fn ainf_exp_characteristic(w: &Weight, family: &CubeFamily) -> Result<Characteristic> {
    same_universe(w.universe(), family)?;
    let u = w.universe();
    let zero_cells = PrefixSums::new(u, w.values().iter().map(|v| v.is_zero() as i64));
    let sw = PrefixSums::new(u, w.values().iter().cloned());
    let logs = PrefixSums::new(u, w.values().iter().map(|v| if v.is_zero() { 0.0 } else { rational::to_f64(v).ln() }));
    let mut sup = Sup::<f64>::new();
    for q in family.enumerate_cubes()? {
        let total = sw.cube_sum(&q);
        if total.is_zero() {
            sup.skipped += 1;
            continue;
        }
        if zero_cells.cube_sum(&q) > 0 {
            sup.offer_infinite(&q);
            continue;
        }
        let n = q.num_cells() as f64;
        let avg = rational::to_f64(&total) / n;
        sup.offer(avg * (-logs.cube_sum(&q) / n).exp(), &q);
    }
    sup.finish("A_inf", family, CharValue::Float)
}

/// `[w]'_{A_∞} = sup_Q w(Q)⁻¹ ∫_Q M(wχ_Q)`, with `M` the Hardy–Littlewood
/// operator over `inner_family`. Exact.
pub fn ainf_fujii_characteristic(w: &Weight, family: &CubeFamily, inner_family: &CubeFamily) -> Result<Characteristic> {
    same_universe(w.universe(), family)?;
    same_universe(w.universe(), inner_family)?;
    let u = w.universe();
    let mut sup = Sup::<Rational>::new();
    for q in family.enumerate_cubes()? {
        let cells = q.cells(u);
        let total: Rational = cells.iter().map(|&i| &w.values()[i]).sum();
        if total.is_zero() {
            log::warn!("A_inf': skipping cube {q:?} with w(Q) = 0");
            sup.skipped += 1;
            continue;
        }
        let mut restricted = vec![Rational::zero(); u.num_cells()];
        for &i in &cells {
            restricted[i] = w.values()[i].clone();
        }
        let g = StepFunction::new(u.clone(), restricted)?;
        let m = brute_maximal(&g, inner_family, &MaximalKind::HlAverage)?;
        let integral: Rational = cells.iter().map(|&i| m.value(i)).sum();
        sup.offer(integral / total, &q);
    }
    sup.finish("A_inf_fujii", family, CharValue::Exact)
}

/// `σ = w^{−1/(p−1)}`.
#[derive(Clone, Debug, PartialEq)]
pub enum DualWeight {
    /// `1/(p−1)` is an integer and `σ` is exact.
    Exact(Weight),
    Approx {
        universe: Universe,
        values: Vec<f64>,
    },
}

impl DualWeight {
    pub fn values_f64(&self) -> Vec<f64> {
        match self {
            DualWeight::Exact(w) => w.values().iter().map(rational::to_f64).collect(),
            DualWeight::Approx { values, .. } => values.clone(),
        }
    }

    pub fn universe(&self) -> &Universe {
        match self {
            DualWeight::Exact(w) => w.universe(),
            DualWeight::Approx { universe, .. } => universe,
        }
    }
}

pub fn dual_weight(w: &Weight, p: &Rational) -> Result<DualWeight> {
    if p <= &Rational::one() {
        return Err(Error::Domain("dual weight needs p > 1".into()));
    }
    if let Some(i) = w.values().iter().position(|v| v.is_zero()) {
        return Err(Error::Domain(format!("weight vanishes at cell {i}; dual weight is infinite")));
    }
    let k = (p - Rational::one()).recip();
    if k.is_integer() {
        if let Some(k) = k.to_integer().to_u32() {
            let f = w.function().map(|v| rational::pow(&v.recip(), k));
            return Ok(DualWeight::Exact(Weight::new(f)?));
        }
    }
    let e = -rational::to_f64(&k);
    Ok(DualWeight::Approx {
        universe: w.universe().clone(),
        values: w.values().iter().map(|v| rational::to_f64(v).powf(e)).collect(),
    })
}

/// Smallest `w(E)/w(Q)` over family cubes `Q` and unions of cells `E ⊆ Q`
/// with `|E| ≥ α|Q|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaBeta {
    #[serde(with = "rational::serde_str")]
    pub alpha: Rational,
    #[serde(with = "rational::serde_str")]
    pub beta: Rational,
    pub witness: GridCube,
}

/// `β*(α)`: the inner minimum takes the `⌈α·N⌉` lightest cells of `Q`, which is
/// optimal because cells have equal measure.
pub fn alpha_beta_profile(w: &Weight, family: &CubeFamily, alpha: &Rational) -> Result<AlphaBeta> {
    same_universe(w.universe(), family)?;
    if !rational::in_unit_open(alpha) {
        return Err(Error::Domain(format!("α = {} not in (0, 1)", rational::format(alpha))));
    }
    let mut best: Option<(Rational, GridCube)> = None;
    for q in family.enumerate_cubes()? {
        let mut vals: Vec<&Rational> = q.cells(w.universe()).into_iter().map(|i| &w.values()[i]).collect();
        let total: Rational = vals.iter().copied().sum();
        if total.is_zero() {
            continue;
        }
        vals.sort_unstable();
        let k = rational::ceil_mul(alpha, vals.len() as u64) as usize;
        let light: Rational = vals[..k].iter().copied().sum();
        let ratio = light / total;
        if best.as_ref().is_none_or(|(b, _)| &ratio < b) {
            best = Some((ratio, q));
        }
    }
    let (beta, witness) = best.ok_or_else(|| Error::Domain("no cube with positive weight".into()))?;
    Ok(AlphaBeta { alpha: alpha.clone(), beta, witness })
}

/// `sup w(5Q)/w(Q)` over family cubes whose concentric quintuple fits in the
/// universe.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Doubling {
    #[serde(with = "rational::serde_str")]
    pub ratio: Rational,
    pub witness: GridCube,
    pub admissible: usize,
}

pub fn quintuple(q: &GridCube, u: &Universe) -> Option<GridCube> {
    let two = 2 * q.side;
    let corner = q
        .corner
        .iter()
        .zip(u.extent())
        .map(|(&c, &e)| (c >= two && c + 3 * q.side <= e).then(|| c - two))
        .collect::<Option<Vec<_>>>()?;
    Some(GridCube::new(corner, 5 * q.side))
}

pub fn doubling_ratio(w: &Weight, family: &CubeFamily) -> Result<Doubling> {
    same_universe(w.universe(), family)?;
    let sums = PrefixSums::new(w.universe(), w.values().iter().cloned());
    let mut best: Option<(Rational, GridCube)> = None;
    let mut admissible = 0;
    for q in family.enumerate_cubes()? {
        let Some(big) = quintuple(&q, w.universe()) else {
            continue;
        };
        let small = sums.cube_sum(&q);
        if small.is_zero() {
            continue;
        }
        admissible += 1;
        let ratio = sums.cube_sum(&big) / small;
        if best.as_ref().is_none_or(|(b, _)| &ratio > b) {
            best = Some((ratio, q));
        }
    }
    let (ratio, witness) = best.ok_or_else(|| Error::Domain("no admissible cube for the doubling ratio".into()))?;
    Ok(Doubling { ratio, witness, admissible })
}

/// Re-evaluates a characteristic's defining quotient on its witness cube alone.
pub fn replay_witness(
    w: &Weight,
    c: &Characteristic,
    p: Option<&Rational>,
    inner: Option<&CubeFamily>,
) -> Result<CharValue> {
    let q = c.witness.clone().ok_or_else(|| Error::Domain("characteristic has no witness".into()))?;
    let single = CubeFamily::explicit(w.universe(), vec![q]);
    let again = match c.characteristic.as_str() {
        "A1" => a1_characteristic(w, &single)?,
        "A_inf" => ainf_exp_characteristic(w, &single)?,
        "A_inf_fujii" => ainf_fujii_characteristic(
            w,
            &single,
            inner.ok_or_else(|| Error::Domain("fujii replay needs the inner family".into()))?,
        )?,
        _ => ap_characteristic(w, p.ok_or_else(|| Error::Domain("A_p replay needs p".into()))?, &single)?,
    };
    Ok(again.value)
}

/// Whether two characteristic values agree: exactly for rationals and
/// infinity, within [`FLOAT_TOLERANCE`] relative otherwise.
pub fn values_agree(a: &CharValue, b: &CharValue) -> bool {
    match (a, b) {
        (CharValue::Exact(x), CharValue::Exact(y)) => x == y,
        (CharValue::Infinite, CharValue::Infinite) => true,
        (CharValue::Infinite, _) | (_, CharValue::Infinite) => false,
        _ => {
            let (x, y) = (a.to_f64(), b.to_f64());
            (x - y).abs() <= FLOAT_TOLERANCE * x.abs().max(y.abs()).max(1.0)
        }
    }
}

/// `w_t = t` on `[−1, 1)ⁿ` and 1 elsewhere.
pub fn sharpness_weight(u: &Universe, t: &Rational) -> Result<Weight> {
    if !t.is_positive() {
        return Err(Error::Domain(format!("t = {} must be positive", rational::format(t))));
    }
    Weight::new(StepFunction::box_valued(u, &rational::int(-1), &rational::int(1), t, &Rational::one()))
}

/// Limit-free closed form of `[w_t]_{A₁}` over all intervals of `[−R, R)` with
/// cell `h`: `(1/t)(R − 1 + t·h)/(R − 1 + h)`.
pub fn wt_a1_closed_form(t: &Rational, radius: &Rational, h: &Rational) -> Rational {
    let r1 = radius - Rational::one();
    (&r1 + t * h) / (t * (&r1 + h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn line(lo: i64, hi: i64, h: Rational) -> Universe {
        Universe::interval(&int(lo), &int(hi), &h).unwrap()
    }

    fn w_t(u: &Universe, t: &Rational) -> Weight {
        let w = sharpness_weight(u, t).unwrap();
        // independent of box_valued: cells with left node in [−1, 1)
        for i in 0..u.num_cells() {
            let x = u.node(0, i);
            let expect = if x >= int(-1) && x < int(1) { t.clone() } else { int(1) };
            assert_eq!(w.values()[i], expect);
        }
        w
    }

    #[test]
    fn constant_weight_is_one_everywhere() {
        let u = line(0, 2, ratio(1, 4));
        let w = Weight::new(StepFunction::constant(&u, int(3))).unwrap();
        let fam = CubeFamily::all(&u);
        assert_eq!(a1_characteristic(&w, &fam).unwrap().value, CharValue::Exact(int(1)));
        assert_eq!(ap_characteristic(&w, &int(2), &fam).unwrap().value, CharValue::Exact(int(1)));
        for p in [ratio(3, 2), int(3)] {
            assert!((ap_characteristic(&w, &p, &fam).unwrap().value.to_f64() - 1.0).abs() < 1e-12);
        }
        assert!((ainf_exp_characteristic(&w, &fam).unwrap().value.to_f64() - 1.0).abs() < 1e-12);
        assert_eq!(ainf_fujii_characteristic(&w, &fam, &fam).unwrap().value, CharValue::Exact(int(1)));
    }

    #[test]
    fn vanishing_weight_is_infinite() {
        let u = line(0, 4, int(1));
        let w = Weight::new(StepFunction::new(u.clone(), vec![int(1), int(0), int(2), int(1)]).unwrap()).unwrap();
        let fam = CubeFamily::all(&u);
        let a1 = a1_characteristic(&w, &fam).unwrap();
        assert!(a1.value.is_infinite());
        assert_eq!(a1.witness, Some(GridCube::new(vec![0], 2)));
        assert!(ap_characteristic(&w, &int(2), &fam).unwrap().value.is_infinite());
        assert!(ainf_exp_characteristic(&w, &fam).unwrap().value.is_infinite());
        assert!(dual_weight(&w, &int(2)).is_err());
    }

    #[test]
    fn two_cell_exp_formula() {
        let u = line(0, 2, int(1));
        let w = Weight::new(StepFunction::new(u.clone(), vec![int(1), int(4)]).unwrap()).unwrap();
        let fam = CubeFamily::explicit(&u, vec![GridCube::new(vec![0], 2)]);
        // avg = 5/2, geometric mean = 2
        let v = ainf_exp_characteristic(&w, &fam).unwrap().value.to_f64();
        assert!((v - 1.25).abs() < 1e-12);
        // A2 on the same cube: (5/2)(5/8) = 25/16
        assert_eq!(ap_characteristic(&w, &int(2), &fam).unwrap().value, CharValue::Exact(ratio(25, 16)));
    }

    #[test]
    fn wt_small_universe_closed_form() {
        for (t, r) in [(ratio(1, 4), 5), (ratio(1, 2), 3)] {
            let h = ratio(1, 10);
            let u = line(-r, r, h.clone());
            let w = w_t(&u, &t);
            let c = a1_characteristic(&w, &CubeFamily::all(&u)).unwrap();
            assert_eq!(c.value, CharValue::Exact(wt_a1_closed_form(&t, &int(r), &h)));
            assert_eq!(replay_witness(&w, &c, None, None).unwrap(), c.value, "witness reproduces the value");
        }
    }

    #[test]
    fn a1_recurrence_matches_scan() {
        let u = Universe::new(vec![int(0), int(0)], int(1), vec![5, 4]).unwrap();
        let vals: Vec<Rational> = (0..20).map(|i| ratio(1 + (i * 7 % 5), 1 + (i % 3))).collect();
        let w = Weight::new(StepFunction::new(u.clone(), vals).unwrap()).unwrap();
        let fam = CubeFamily::all(&u);
        let explicit = CubeFamily::explicit(&u, fam.enumerate_cubes().unwrap());
        let a = a1_characteristic(&w, &fam).unwrap();
        let b = a1_characteristic(&w, &explicit).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.witness, b.witness);
    }

    #[test]
    fn dual_weights() {
        let u = line(0, 3, int(1));
        let w = Weight::new(StepFunction::new(u.clone(), vec![int(2), int(4), ratio(1, 2)]).unwrap()).unwrap();
        match dual_weight(&w, &int(2)).unwrap() {
            DualWeight::Exact(s) => assert_eq!(s.values(), &[ratio(1, 2), ratio(1, 4), int(2)]),
            other => panic!("{other:?}"),
        }
        match dual_weight(&w, &ratio(3, 2)).unwrap() {
            DualWeight::Exact(s) => assert_eq!(s.values(), &[ratio(1, 4), ratio(1, 16), int(4)]),
            other => panic!("{other:?}"),
        }
        let c = Weight::new(StepFunction::constant(&u, int(9))).unwrap();
        let s = dual_weight(&c, &int(3)).unwrap().values_f64();
        assert!(s.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn alpha_beta_unit_weight_counts_cells() {
        let u = line(0, 3, int(1));
        let w = Weight::unit(&u);
        let fam = CubeFamily::all(&u);
        // ceil(α N)/N minimised over N ∈ {1,2,3}: α=1/2 → 1/2 (N=2)
        assert_eq!(alpha_beta_profile(&w, &fam, &ratio(1, 2)).unwrap().beta, ratio(1, 2));
        // α=1/3 → 1/3 (N=3)
        assert_eq!(alpha_beta_profile(&w, &fam, &ratio(1, 3)).unwrap().beta, ratio(1, 3));
    }

    #[test]
    fn doubling_unit_weight() {
        let u = line(0, 10, int(1));
        let w = Weight::unit(&u);
        let d = doubling_ratio(&w, &CubeFamily::all(&u)).unwrap();
        assert_eq!(d.ratio, int(5));
        assert_eq!(quintuple(&GridCube::new(vec![1], 1), &u), None);
    }
}
