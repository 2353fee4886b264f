use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use medimax::grid::Universe;
use medimax::rational::{int, ratio};
use medimax::stepfn::StepFunction;
use serde_json::Value;
use tempfile::TempDir;

fn medimax(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_medimax")).args(args).current_dir(dir).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = medimax(dir, args);
    assert!(out.status.success(), "{args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, f: &StepFunction) {
    fs::write(dir.join(name), f.to_json().unwrap()).unwrap();
}

fn load(dir: &Path, name: &str) -> StepFunction {
    StepFunction::from_json(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn chars(json: &str) -> Vec<(String, Value)> {
    let v: Value = serde_json::from_str(json).unwrap();
    v["characteristics"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["characteristic"].as_str().unwrap().to_string(), c["value"].clone()))
        .collect()
}

#[test]
fn tau_max_of_the_unit_indicator() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    ok(p, &["gen", "indicator", "--from", "-1", "--to", "1", "--out", "chi.json"]);
    ok(p, &["run", "--input", "chi.json", "--op", "tau-max", "--tau", "1/2", "--out", "m.json"]);
    let m = load(p, "m.json");
    assert_eq!(m, StepFunction::box_indicator(m.universe(), &int(-3), &int(3)));
    let meta: Value = serde_json::from_str(&fs::read_to_string(p.join("m.json.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["kind"]["tau"], "1/2");
}

#[test]
fn outputs_reload_byte_identically() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    ok(p, &["gen", "random", "--seed", "3", "--universe", "0:2", "--cell", "1/12", "--out", "f.json"]);
    ok(p, &["run", "--input", "f.json", "--op", "median-max", "--out", "m.json"]);
    for name in ["f.json", "m.json"] {
        let text = fs::read_to_string(p.join(name)).unwrap();
        assert_eq!(load(p, name).to_json().unwrap() + "\n", text);
    }
}

#[test]
fn random_generation_is_deterministic() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    ok(p, &["gen", "random", "--seed", "7", "--out", "a.json"]);
    ok(p, &["gen", "random", "--seed", "7", "--out", "b.json"]);
    ok(p, &["gen", "random", "--seed", "8", "--out", "c.json"]);
    let read = |n: &str| fs::read(p.join(n)).unwrap();
    assert_eq!(read("a.json"), read("b.json"));
    assert_ne!(read("a.json"), read("c.json"));
}

#[test]
fn median_max_of_a_constant_is_its_absolute_value() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    let u = Universe::interval(&int(0), &int(1), &ratio(1, 8)).unwrap();
    write(p, "c.json", &StepFunction::constant(&u, ratio(-3, 4)));
    ok(p, &["run", "--input", "c.json", "--op", "median-max", "--out", "m.json"]);
    assert_eq!(load(p, "m.json"), StepFunction::constant(&u, ratio(3, 4)));
}

#[test]
fn dyadic_operator_equals_brute_force_on_the_dyadic_family() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    ok(p, &["gen", "random", "--seed", "11", "--universe", "0:2,0:2", "--cell", "1/6", "--out", "f.json"]);
    for shift in ["0", "1/3"] {
        ok(
            p,
            &[
                "run",
                "--input",
                "f.json",
                "--op",
                "dyadic-tau-max",
                "--tau",
                "1/3",
                "--grid-shift",
                shift,
                "--out",
                "a.json",
            ],
        );
        ok(
            p,
            &[
                "run",
                "--input",
                "f.json",
                "--op",
                "tau-max",
                "--tau",
                "1/3",
                "--family",
                "dyadic",
                "--grid-shift",
                shift,
                "--out",
                "b.json",
            ],
        );
        assert_eq!(fs::read(p.join("a.json")).unwrap(), fs::read(p.join("b.json")).unwrap());
    }
}

#[test]
fn grid_shift_of_the_wrong_dimension_is_rejected() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    ok(p, &["gen", "ramp", "--universe", "0:1", "--cell", "1/6", "--out", "f.json"]);
    let out = medimax(p, &["run", "--input", "f.json", "--op", "dyadic-hl", "--grid-shift", "0,1/3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unit_weight_has_unit_characteristics() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    let u = Universe::cube(2, &int(0), &int(1), &ratio(1, 4)).unwrap();
    write(p, "w.json", &StepFunction::constant(&u, int(1)));
    let out = ok(p, &["char", "--input", "w.json", "--replay"]);
    let cs = chars(&out);
    assert_eq!(cs.len(), 4);
    for (name, v) in cs {
        let one = v == "1/1" || v.as_f64().is_some_and(|x| (x - 1.0).abs() < 1e-12);
        assert!(one, "{name} = {v}");
    }
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["replay"].as_array().unwrap().iter().all(|r| r["agrees"] == true));
}

#[test]
fn zero_cells_give_infinite_characteristics() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    let u = Universe::interval(&int(0), &int(1), &ratio(1, 4)).unwrap();
    write(p, "w.json", &StepFunction::new(u, vec![int(1), int(0), int(2), int(1)]).unwrap());
    let cs = chars(&ok(p, &["char", "--input", "w.json", "--p", "3/2"]));
    assert_eq!(cs[0].1, "inf");
    assert_eq!(cs[1].1, "inf");
}

#[test]
fn a1_of_the_sharpness_weight_matches_its_closed_form() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    ok(p, &["gen", "w_t", "--t", "1/4", "--radius", "5", "--cell", "1/2", "--out", "w.json"]);
    let cs = chars(&ok(p, &["char", "--input", "w.json", "--fujii-limit", "0"]));
    let expected = medimax::weights::wt_a1_closed_form(&ratio(1, 4), &int(5), &ratio(1, 2));
    assert_eq!(cs[0].1, medimax::rational::format(&expected));
    assert_eq!(cs.len(), 3, "fujii is skipped above the limit");
}

#[test]
fn verify_sharpness_emits_one_passing_line() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    let out = ok(p, &["verify", "sharpness", "--t", "1/2,1/4,1/8", "--out", "r.jsonl"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 1);
    let r: Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(r["status"], "pass");
    assert_eq!(r["instances"], 3);
    assert_eq!(fs::read_to_string(p.join("r.jsonl")).unwrap(), out);
}

#[test]
fn verify_small_suites_pass() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["verify", "expansion", "--n", "1", "--cells", "8"]);
    ok(d.path(), &["verify", "comparison", "--count", "40", "--seed", "1"]);
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let d = TempDir::new().unwrap();
    let out = medimax(d.path(), &["verify", "everything"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
}

#[test]
fn bad_rationals_report_their_flag() {
    let d = TempDir::new().unwrap();
    let out = medimax(d.path(), &["gen", "ramp", "--cell", "1/x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--cell"));
    let out = medimax(d.path(), &["gen", "ramp", "--universe", "0:1:2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failing_reports_exit_one() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    let failing = medimax::verify::check_expansion_exhaustive(1, 6, &[ratio(3, 4)], Some(1)).unwrap();
    assert!(!failing.passed());
    let passing = medimax::verify::check_expansion_exhaustive(1, 6, &[ratio(3, 4)], None).unwrap();
    let lines = format!("{}\n{}\n", passing.to_json_line().unwrap(), failing.to_json_line().unwrap());
    fs::write(p.join("r.jsonl"), lines).unwrap();
    let out = medimax(p, &["report", "r.jsonl", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(1));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("claim,status,"));
    assert_eq!(csv.lines().filter(|l| l.contains(",fail,")).count(), 1);
}

#[test]
fn saved_config_replays_exactly() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    ok(p, &["gen", "random", "--seed", "5", "--weight", "--universe", "0:1", "--cell", "1/8", "--out", "w.json"]);
    ok(p, &["--save-config", "run.json", "char", "--input", "w.json", "--p", "3", "--out", "c1.json"]);
    let first = fs::read(p.join("c1.json")).unwrap();
    fs::remove_file(p.join("c1.json")).unwrap();
    ok(p, &["--config", "run.json"]);
    assert_eq!(fs::read(p.join("c1.json")).unwrap(), first);
    let cfg: Value = serde_json::from_str(&fs::read_to_string(p.join("run.json")).unwrap()).unwrap();
    assert_eq!(cfg["command"]["subcommand"], "char");
    // a config and a subcommand together are ambiguous
    let out = medimax(p, &["--config", "run.json", "verify", "fujii"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_export() {
    let d = TempDir::new().unwrap();
    let out = ok(d.path(), &["gen", "step", "--universe", "0:1", "--cell", "1/4", "--steps", "2", "--format", "csv"]);
    assert_eq!(out, "index,coordinate,value\n0,0.125,0\n1,0.375,0\n2,0.625,0.5\n3,0.875,0.5\n");
}

#[test]
fn thread_cap_is_validated() {
    let d = TempDir::new().unwrap();
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_medimax"))
            .args(["verify", "fujii"])
            .env("MEDIMAX_THREADS", v)
            .current_dir(d.path())
            .output()
            .unwrap()
    };
    assert_eq!(run("0").status.code(), Some(2));
    assert!(run("1").status.success());
}
