//! Weight characteristics against double-loop oracles written from the
//! definitions, on intervals of a line with unit cells.

use medimax::grid::{CubeFamily, GridCube, Universe};
use medimax::rational::{int, ratio, Rational};
use medimax::stepfn::{StepFunction, Weight};
use medimax::weights::*;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn line(cells: usize) -> Universe {
    Universe::new(vec![int(0)], int(1), vec![cells]).unwrap()
}

fn pow2(j: i32) -> Rational {
    if j >= 0 {
        int(1 << j)
    } else {
        ratio(1, 1 << -j)
    }
}

fn weight(vals: &[Rational]) -> Weight {
    Weight::new(StepFunction::new(line(vals.len()), vals.to_vec()).unwrap()).unwrap()
}

fn intervals(n: usize) -> Vec<(usize, usize)> {
    // canonical order: by length, then start
    (1..=n).flat_map(|len| (0..=n - len).map(move |a| (a, a + len))).collect()
}

fn sum(v: &[Rational]) -> Rational {
    v.iter().sum()
}

fn oracle_a1(v: &[Rational]) -> (Rational, (usize, usize)) {
    let mut best: Option<(Rational, (usize, usize))> = None;
    for (a, b) in intervals(v.len()) {
        let avg = sum(&v[a..b]) / int((b - a) as i64);
        let min = v[a..b].iter().min().unwrap();
        let val = avg / min;
        if best.as_ref().is_none_or(|(x, _)| &val > x) {
            best = Some((val, (a, b)));
        }
    }
    best.unwrap()
}

fn oracle_a2(v: &[Rational]) -> Rational {
    intervals(v.len())
        .into_iter()
        .map(|(a, b)| {
            let n = int((b - a) as i64);
            let inv: Rational = v[a..b].iter().map(|x| x.recip()).sum();
            sum(&v[a..b]) / &n * inv / &n
        })
        .max()
        .unwrap()
}

fn oracle_doubling(v: &[Rational]) -> Rational {
    let n = v.len();
    intervals(n)
        .into_iter()
        .filter(|&(a, b)| a >= 2 * (b - a) && b + 2 * (b - a) <= n)
        .map(|(a, b)| {
            let s = b - a;
            sum(&v[a - 2 * s..b + 2 * s]) / sum(&v[a..b])
        })
        .max()
        .unwrap()
}

fn oracle_fujii(v: &[Rational]) -> Rational {
    let n = v.len();
    let mut best = Rational::zero();
    for (a, b) in intervals(n) {
        let mut integral = Rational::zero();
        for x in a..b {
            let mut m = Rational::zero();
            for (c, d) in intervals(n) {
                if c <= x && x < d {
                    let inside: Rational = (c.max(a)..d.min(b)).map(|i| &v[i]).sum();
                    m = m.max(inside / int((d - c) as i64));
                }
            }
            integral += m;
        }
        best = best.max(integral / sum(&v[a..b]));
    }
    best
}

fn oracle_beta(v: &[Rational], alpha: &Rational) -> Rational {
    let mut best: Option<Rational> = None;
    for (a, b) in intervals(v.len()) {
        let cells = &v[a..b];
        let total = sum(cells);
        for bits in 0u32..1 << cells.len() {
            if int(bits.count_ones() as i64) < alpha * int(cells.len() as i64) {
                continue;
            }
            let part: Rational = (0..cells.len()).filter(|i| bits >> i & 1 == 1).map(|i| &cells[i]).sum();
            let r = part / &total;
            if best.as_ref().is_none_or(|x| &r < x) {
                best = Some(r);
            }
        }
    }
    best.unwrap()
}

fn exps(max_len: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(-3i32..=3, 1..=max_len).prop_map(|e| e.into_iter().map(pow2).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn a1_matches_oracle_with_witness(v in exps(10)) {
        let w = weight(&v);
        let c = a1_characteristic(&w, &CubeFamily::all(w.universe())).unwrap();
        let (val, (a, b)) = oracle_a1(&v);
        prop_assert_eq!(c.value, CharValue::Exact(val));
        prop_assert_eq!(c.witness, Some(GridCube::new(vec![a], b - a)));
    }

    #[test]
    fn a2_matches_oracle(v in exps(10)) {
        let w = weight(&v);
        let c = ap_characteristic(&w, &int(2), &CubeFamily::all(w.universe())).unwrap();
        prop_assert_eq!(c.value, CharValue::Exact(oracle_a2(&v)));
    }

    #[test]
    fn doubling_matches_oracle(v in exps(12)) {
        prop_assume!(v.len() >= 5);
        let w = weight(&v);
        let d = doubling_ratio(&w, &CubeFamily::all(w.universe())).unwrap();
        prop_assert_eq!(d.ratio, oracle_doubling(&v));
    }

    #[test]
    fn fujii_matches_oracle(v in exps(7)) {
        let w = weight(&v);
        let fam = CubeFamily::all(w.universe());
        let c = ainf_fujii_characteristic(&w, &fam, &fam).unwrap();
        let expected = oracle_fujii(&v);
        prop_assert!(expected >= Rational::one());
        prop_assert_eq!(c.value, CharValue::Exact(expected));
    }

    #[test]
    fn greedy_beta_matches_subsets(v in exps(8), k in 1i64..=3) {
        let w = weight(&v);
        let alpha = ratio(k, 4);
        let b = alpha_beta_profile(&w, &CubeFamily::all(w.universe()), &alpha).unwrap();
        prop_assert_eq!(b.beta, oracle_beta(&v, &alpha));
    }

    #[test]
    fn ordering_chain(v in exps(9), square in any::<bool>()) {
        let w = if square && v.len() >= 4 {
            let u = Universe::new(vec![int(0), int(0)], int(1), vec![2, 2]).unwrap();
            Weight::new(StepFunction::new(u, v[..4].to_vec()).unwrap()).unwrap()
        } else {
            weight(&v)
        };
        let fam = CubeFamily::all(w.universe());
        let a1 = a1_characteristic(&w, &fam).unwrap().value.to_f64();
        let exp = ainf_exp_characteristic(&w, &fam).unwrap().value.to_f64();
        prop_assert!(exp >= 1.0 - 1e-12);
        let mut prev = a1;
        for p in [ratio(3, 2), int(2), int(3), int(6)] {
            let ap = ap_characteristic(&w, &p, &fam).unwrap().value.to_f64();
            prop_assert!(exp <= ap * (1.0 + 1e-9), "exp {} > A_p {}", exp, ap);
            prop_assert!(ap <= prev * (1.0 + 1e-9), "A_p not monotone in p");
            prev = ap;
        }
    }

    #[test]
    fn duality(v in exps(8)) {
        let w = weight(&v);
        let fam = CubeFamily::all(w.universe());
        // p = 3/2, p' = 3: σ = w^{-2} exactly
        let a = ap_characteristic(&w, &ratio(3, 2), &fam).unwrap().value.to_f64();
        let sigma = match dual_weight(&w, &ratio(3, 2)).unwrap() {
            DualWeight::Exact(s) => s,
            other => panic!("expected exact dual, got {other:?}"),
        };
        let b = ap_characteristic(&sigma, &int(3), &fam).unwrap().value.to_f64();
        prop_assert!((b - a.powi(2)).abs() <= 1e-9 * b.max(1.0));
        // p = 3, p' = 3/2: σ = w^{-1/2} in floating point
        let a = ap_characteristic(&w, &int(3), &fam).unwrap().value.to_f64();
        let sigma = dual_weight(&w, &int(3)).unwrap();
        let b = ap_characteristic_f64(w.universe(), &sigma.values_f64(), 1.5, &fam).unwrap().value.to_f64();
        prop_assert!((b - a.sqrt()).abs() <= 1e-9 * b.max(1.0));
    }

    #[test]
    fn enlarging_the_family_never_decreases(v in exps(10)) {
        let w = weight(&v);
        let small = CubeFamily::all_grid_aligned(w.universe(), 2);
        let all = CubeFamily::all(w.universe());
        for (s, l) in [
            (a1_characteristic(&w, &small).unwrap(), a1_characteristic(&w, &all).unwrap()),
            (ap_characteristic(&w, &int(2), &small).unwrap(), ap_characteristic(&w, &int(2), &all).unwrap()),
            (ainf_exp_characteristic(&w, &small).unwrap(), ainf_exp_characteristic(&w, &all).unwrap()),
        ] {
            prop_assert!(s.value.to_f64() <= l.value.to_f64() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn beta_is_monotone_in_alpha(v in exps(8)) {
        let w = weight(&v);
        let fam = CubeFamily::all(w.universe());
        let betas: Vec<Rational> = [ratio(1, 5), ratio(1, 3), ratio(1, 2), ratio(4, 5)]
            .iter()
            .map(|a| alpha_beta_profile(&w, &fam, a).unwrap().beta)
            .collect();
        prop_assert!(betas.windows(2).all(|p| p[0] <= p[1]));
        prop_assert!(betas.iter().all(|b| b > &Rational::zero() && b <= &Rational::one()));
    }

    #[test]
    fn witnesses_replay(v in exps(8)) {
        let w = weight(&v);
        let fam = CubeFamily::all(w.universe());
        for c in [
            a1_characteristic(&w, &fam).unwrap(),
            ainf_exp_characteristic(&w, &fam).unwrap(),
            ainf_fujii_characteristic(&w, &fam, &fam).unwrap(),
        ] {
            let again = replay_witness(&w, &c, None, Some(&fam)).unwrap();
            prop_assert!(values_agree(&again, &c.value));
        }
        let c = ap_characteristic(&w, &int(3), &fam).unwrap();
        prop_assert!(values_agree(&replay_witness(&w, &c, Some(&int(3)), None).unwrap(), &c.value));
    }
}

#[test]
fn sharpness_weight_a1_closed_form_against_oracle() {
    for (radius, h) in [(3, ratio(1, 10)), (5, ratio(1, 4)), (2, ratio(1, 3))] {
        let u = Universe::interval(&int(-radius), &int(radius), &h).unwrap();
        for t in [ratio(1, 2), ratio(1, 4), ratio(1, 8)] {
            let w = sharpness_weight(&u, &t).unwrap();
            let (val, _) = oracle_a1(w.values());
            assert_eq!(val, wt_a1_closed_form(&t, &int(radius), &h), "R = {radius}, h = {h}, t = {t}");
            let c = a1_characteristic(&w, &CubeFamily::all(&u)).unwrap();
            assert_eq!(c.value, CharValue::Exact(val));
        }
    }
}

#[test]
fn a1_with_large_denominators_takes_the_rational_path() {
    let big = Rational::new(1.into(), num_bigint::BigInt::from(1u64 << 62));
    let v = vec![int(1), big.clone(), int(3), big * int(5), int(2)];
    let w = weight(&v);
    let c = a1_characteristic(&w, &CubeFamily::all(w.universe())).unwrap();
    assert_eq!(c.value, CharValue::Exact(oracle_a1(&v).0));
}

#[test]
fn constant_weights_give_one() {
    let u = Universe::new(vec![int(0), int(0)], int(1), vec![3, 3]).unwrap();
    let w = Weight::new(StepFunction::constant(&u, ratio(7, 3))).unwrap();
    let fam = CubeFamily::all(&u);
    assert_eq!(a1_characteristic(&w, &fam).unwrap().value, CharValue::Exact(int(1)));
    assert_eq!(ap_characteristic(&w, &int(2), &fam).unwrap().value, CharValue::Exact(int(1)));
    assert_eq!(ainf_fujii_characteristic(&w, &fam, &fam).unwrap().value, CharValue::Exact(int(1)));
    let ab = alpha_beta_profile(&w, &fam, &ratio(1, 2)).unwrap();
    // ceil(N/2)/N over N ∈ {1, 4, 9} is smallest at N = 4
    assert_eq!(ab.beta, ratio(1, 2));
}

#[test]
fn characteristic_json_shape() {
    let w = weight(&[int(1), int(0), int(1)]);
    let c = a1_characteristic(&w, &CubeFamily::all(w.universe())).unwrap();
    let v: serde_json::Value = serde_json::to_value(&c).unwrap();
    assert_eq!(v["value"], "inf");
    assert_eq!(v["characteristic"], "A1");
    let w = weight(&[int(1), int(2)]);
    let c = a1_characteristic(&w, &CubeFamily::all(w.universe())).unwrap();
    let v: serde_json::Value = serde_json::to_value(&c).unwrap();
    assert_eq!(v["value"], "3/2");
    assert_eq!(v["witness"]["side"], 2);
}
