use medimax::error::Error;
use medimax::grid::{CubeFamily, DyadicGridSpec, Universe};
use medimax::rational::{int, ratio, Rational};
use medimax::stepfn::{StepFunction, Weight};
use medimax::verify::*;
use medimax::weights::CharValue;

fn same_outcome(a: &VerificationReport, b: &VerificationReport) {
    assert_eq!(a.status, b.status);
    assert_eq!(a.instances, b.instances);
    assert_eq!(a.worst_ratio, b.worst_ratio);
    assert_eq!(a.witness, b.witness);
    assert_eq!(a.flags, b.flags);
}

#[test]
fn whole_cell_expansion_fails_and_the_witness_replays() {
    let r = check_expansion_exhaustive(1, 8, &[ratio(3, 4)], Some(1)).unwrap();
    assert!(!r.passed());
    let w = r.witness.clone().expect("failing report carries a witness");
    assert!(matches!(w, Witness::Expansion { .. }));
    assert!(replay(&w).unwrap(), "replayed witness should fail again");

    let back = VerificationReport::from_json(&r.to_json_line().unwrap()).unwrap();
    assert_eq!(back, r);
    assert!(replay(back.witness.as_ref().unwrap()).unwrap());
}

#[test]
fn refined_expansion_passes() {
    let eta = ratio(3, 4);
    let r = check_expansion_exhaustive(1, 8, &[eta], None).unwrap();
    assert!(r.passed(), "{:?}", r.notes);
    assert!(r.witness.is_none());
}

#[test]
fn suites_are_deterministic_in_the_seed() {
    let cfg = SuiteConfig { seed: 5, count: Some(12), ..SuiteConfig::default() };
    for name in ["comparison", "dyadic", "a1-bound"] {
        let a = run_suite(name, &cfg).unwrap();
        let b = run_suite(name, &cfg).unwrap();
        assert_eq!(a.len(), 1);
        same_outcome(&a[0], &b[0]);
        assert!(a[0].passed(), "{name}: {:?}", a[0].notes);
        assert_eq!(a[0].seed, Some(5));
    }
}

#[test]
fn unknown_suite_is_a_domain_error() {
    assert!(matches!(run_suite("nope", &SuiteConfig::default()), Err(Error::Domain(_))));
    assert_eq!(SUITES.len(), 12);
}

#[test]
fn sharpness_needs_room_for_the_truncation_side() {
    match SharpnessSetup::new(&int(2), &ratio(1, 10)) {
        Err(Error::UniverseTooSmall(msg)) => assert!(msg.contains("radius"), "{msg}"),
        other => panic!("expected UniverseTooSmall, got {other:?}"),
    }
    assert!(SharpnessSetup::new(&int(5), &ratio(1, 10)).is_ok());
}

#[test]
fn a1_bound_is_attained_by_a_dyadic_indicator() {
    // Half-density parents carry the value, grandparents do not: the
    // maximal function is the indicator of the parent, twice the mass.
    let u = Universe::interval(&int(0), &int(1), &ratio(1, 16)).unwrap();
    let f = StepFunction::box_indicator(&u, &int(0), &ratio(1, 4));
    let grid = DyadicGridSpec::fitted(&u, vec![int(0)]).unwrap();
    let r = check_a1_bound(&[(f.clone(), Weight::unit(&u))], &ratio(1, 2), &grid, Some(0)).unwrap();
    assert!(r.passed());
    assert_eq!(r.worst_ratio, Some(CharValue::Exact(int(1))));
    let r = check_weak_type(&[(f, Weight::unit(&u))], &ratio(1, 2), &grid, Some(0)).unwrap();
    assert!(r.flags.is_empty(), "{:?}", r.flags);
}

#[test]
fn comparison_of_a_negative_constant() {
    let u = Universe::interval(&int(0), &int(1), &ratio(1, 6)).unwrap();
    let f = StepFunction::constant(&u, ratio(-5, 8));
    let r = check_comparison(&[(f, CubeFamily::all(&u))], None).unwrap();
    assert!(r.passed());
    assert_eq!(r.worst_ratio, Some(CharValue::Exact(int(1))));
}

#[test]
fn constants_mollify_without_error() {
    let u = Universe::interval(&int(0), &int(1), &ratio(1, 32)).unwrap();
    let f = StepFunction::constant(&u, ratio(3, 2));
    let w = fujii_shifted_weight(&u);
    let errs = fujii_errors(&f, &w, &int(2), &fujii_radii(&ratio(1, 32))).unwrap();
    assert!(errs.iter().all(|e| e.to_f64() == 0.0));
}

#[test]
fn fujii_radii_must_end_at_half_a_cell() {
    let u = Universe::interval(&int(0), &int(1), &ratio(1, 8)).unwrap();
    let f = StepFunction::constant(&u, int(1));
    let w = Weight::unit(&u);
    assert!(fujii_errors(&f, &w, &int(2), &[ratio(1, 4), ratio(1, 8)]).is_err());
    assert!(fujii_errors(&f, &w, &int(2), &[ratio(1, 8), ratio(1, 4), ratio(1, 16)]).is_err());
    assert!(fujii_errors(&f, &w, &int(2), &[ratio(1, 4), ratio(1, 16)]).is_ok());
}

#[test]
fn merged_reports_keep_the_first_failure() {
    let pass = check_expansion_exhaustive(1, 4, &[ratio(1, 2)], None).unwrap();
    let fail = check_expansion_exhaustive(1, 8, &[ratio(3, 4)], Some(1)).unwrap();
    let m = VerificationReport::merge("expansion", vec![pass.clone(), fail.clone()]);
    assert!(!m.passed());
    assert_eq!(m.instances, pass.instances + fail.instances);
    assert_eq!(m.witness, fail.witness);
    let ratios: Vec<Rational> =
        [&pass, &fail].iter().filter_map(|r| r.worst_ratio.as_ref()?.exact().cloned()).collect();
    assert_eq!(m.worst_ratio.unwrap().exact(), ratios.iter().max());
}
