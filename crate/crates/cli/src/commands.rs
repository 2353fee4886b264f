use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::{info, warn};
use medimax::grid::{CubeFamily, DyadicGridSpec, Universe};
use medimax::maximal::{
    brute_maximal, domination_bound, dyadic_maximal, maximal_all_cubes, median_mollify, truncation_radius, MaximalKind,
};
use medimax::rational::{self, Rational};
use medimax::stepfn::{StepFunction, Weight};
use medimax::verify::{self, gen, SuiteConfig, VerificationReport, SUITES};
use medimax::weights::{self, Characteristic};
use serde::Serialize;
use serde_json::json;

use crate::args::*;

/// A result that contradicts the library's own invariants.
#[derive(Debug)]
pub struct Breach(pub String);

impl fmt::Display for Breach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "internal invariant breached: {}", self.0)
    }
}

impl std::error::Error for Breach {}

/// Whether the command's claims held.
pub enum Outcome {
    Success,
    Failed,
}

pub fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Gen(a) => gen_cmd(a),
        Command::Run(a) => run_cmd(a),
        Command::Char(a) => char_cmd(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Report(a) => report_cmd(a),
    }
}

fn parse(text: &str, flag: &str) -> Result<Rational> {
    Ok(rational::parse(text, flag)?)
}

fn parse_universe(a: &UniverseArgs) -> Result<Universe> {
    let cell = parse(&a.cell, "--cell")?;
    let mut origin = Vec::new();
    let mut extent = Vec::new();
    for (axis, range) in a.universe.split(',').enumerate() {
        let Some((lo, hi)) = range.split_once(':') else {
            bail!(medimax::error::Error::Parse {
                location: format!("--universe axis {axis}"),
                message: format!("expected lo:hi, got {range:?}"),
            });
        };
        let lo = parse(lo.trim(), &format!("--universe axis {axis} lower end"))?;
        let hi = parse(hi.trim(), &format!("--universe axis {axis} upper end"))?;
        let cells = (&hi - &lo) / &cell;
        if !cells.is_integer() || cells <= rational::int(0) {
            bail!(medimax::error::Error::Domain(format!(
                "axis {axis}: [{}, {}) is not a positive whole number of cells of side {}",
                rational::format(&lo),
                rational::format(&hi),
                rational::format(&cell)
            )));
        }
        origin.push(lo);
        extent.push(cells.to_integer().try_into().context("too many cells")?);
    }
    Ok(Universe::new(origin, cell, extent)?)
}

fn grid_shift(u: &Universe, text: &str) -> Result<DyadicGridSpec> {
    let shifts = text.split(',').map(|s| parse(s.trim(), "--grid-shift")).collect::<Result<Vec<_>>>()?;
    let shift = if shifts.len() == 1 { vec![shifts[0].clone(); u.dims()] } else { shifts };
    Ok(DyadicGridSpec::fitted(u, shift)?)
}

fn family(u: &Universe, a: &FamilyArgs) -> Result<CubeFamily> {
    Ok(match a.family {
        FamilyChoice::All => match a.max_side {
            Some(s) => CubeFamily::all_grid_aligned(u, s),
            None => CubeFamily::all(u),
        },
        FamilyChoice::Dyadic => CubeFamily::dyadic(u, grid_shift(u, &a.grid_shift)?),
        FamilyChoice::Truncated => bail!(medimax::error::Error::Domain(
            "the truncated family depends on the function; use it with `run`".into()
        )),
    })
}

/// Writes through a temporary file in the target directory, so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn emit(out: &Option<PathBuf>, contents: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn function_text(f: &StepFunction, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => f.to_json()? + "\n",
        Format::Csv => f.to_csv(),
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn gen_cmd(a: &GenArgs) -> Result<Outcome> {
    let u = match &a.radius {
        Some(r) => {
            let r = parse(r, "--radius")?;
            Universe::cube(a.n, &-&r, &r, &parse(&a.universe.cell, "--cell")?)?
        }
        None => parse_universe(&a.universe)?,
    };
    let f = match a.generator {
        Generator::Indicator => StepFunction::box_indicator(&u, &parse(&a.from, "--from")?, &parse(&a.to, "--to")?),
        Generator::Ramp => StepFunction::from_cells(&u, |c| u.node(0, c[0])),
        Generator::Step => {
            if a.steps == 0 {
                bail!(medimax::error::Error::Domain("--steps must be positive".into()));
            }
            let len = u.extent()[0];
            StepFunction::from_cells(&u, |c| rational::ratio((c[0] * a.steps / len) as i64, a.steps as i64))
        }
        Generator::Random => {
            let mut rng = gen::instance_rng(a.seed, 0);
            if a.weight {
                gen::random_weight(&mut rng, &u).into()
            } else {
                gen::random_function(&mut rng, &u)
            }
        }
        Generator::Wt => {
            let t = a.t.as_deref().context("w_t needs --t")?;
            weights::sharpness_weight(&u, &parse(t, "--t")?)?.into()
        }
    };
    info!("generated {:?} on {} cells", a.generator, u.num_cells());
    emit(&a.output.out, &function_text(&f, a.output.format)?)?;
    Ok(Outcome::Success)
}

fn tau(a: &RunArgs) -> Result<Rational> {
    parse(a.tau.as_deref().context("this operator needs --tau")?, "--tau")
}

fn run_cmd(a: &RunArgs) -> Result<Outcome> {
    let f = StepFunction::from_json(&read(&a.input)?)?;
    let u = f.universe().clone();
    let mut meta = json!({
        "input": a.input,
        "op": a.op,
    });
    let kind = match a.op {
        Op::MedianMax | Op::DyadicMedianMax => Some(MaximalKind::Median),
        Op::TauMax | Op::DyadicTauMax => Some(MaximalKind::tau(tau(a)?)),
        Op::Hl | Op::DyadicHl => Some(MaximalKind::HlAverage),
        Op::Mollify | Op::Domination => None,
    };
    let out = match a.op {
        Op::MedianMax | Op::TauMax | Op::Hl => {
            let kind = kind.expect("maximal op");
            meta["kind"] = json!(kind);
            if a.family.family == FamilyChoice::Truncated {
                let t = truncation_radius(&f, &kind)?;
                if !t.exact {
                    warn!(
                        "universe leaves less than the truncation side around the support; output is not exact for ℝⁿ"
                    );
                }
                meta["family"] = json!(format!("truncated(max_side={})", t.max_side_cells));
                meta["truncation"] = json!(t);
                maximal_all_cubes(&f, &kind)?
            } else {
                let fam = family(&u, &a.family)?;
                meta["family"] = json!(fam.describe());
                brute_maximal(&f, &fam, &kind)?
            }
        }
        Op::DyadicMedianMax | Op::DyadicTauMax | Op::DyadicHl => {
            let kind = kind.expect("maximal op");
            let grid = grid_shift(&u, &a.family.grid_shift)?;
            meta["kind"] = json!(kind);
            meta["family"] = json!(CubeFamily::dyadic(&u, grid.clone()).describe());
            dyadic_maximal(&f, &grid, &kind)?
        }
        Op::Mollify => {
            let r = parse(a.r.as_deref().context("mollify needs --r")?, "--r")?;
            meta["r"] = json!(rational::format(&r));
            median_mollify(&f, &r)?
        }
        Op::Domination => {
            let t = tau(a)?;
            meta["tau"] = json!(rational::format(&t));
            domination_bound(&f, &t)?
        }
    };
    emit(&a.output.out, &function_text(&out, a.output.format)?)?;
    if let Some(p) = &a.output.out {
        let mut name = p.clone().into_os_string();
        name.push(".meta.json");
        write_atomic(Path::new(&name), &(serde_json::to_string_pretty(&meta)? + "\n"))?;
    }
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct CharOutput {
    family: String,
    p: String,
    characteristics: Vec<Characteristic>,
    notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    replay: Option<Vec<ReplayResult>>,
}

#[derive(Serialize)]
struct ReplayResult {
    characteristic: String,
    value: weights::CharValue,
    agrees: bool,
}

fn char_cmd(a: &CharArgs) -> Result<Outcome> {
    let w = Weight::from_json(&read(&a.input)?)?;
    let u = w.universe();
    let fam = family(u, &a.family)?;
    let p = parse(&a.p, "--p")?;
    let mut notes = Vec::new();
    let mut chars = vec![
        weights::a1_characteristic(&w, &fam)?,
        weights::ap_characteristic(&w, &p, &fam)?,
        weights::ainf_exp_characteristic(&w, &fam)?,
    ];
    let cubes = fam.enumerate_cubes()?.len();
    if cubes <= a.fujii_limit {
        chars.push(weights::ainf_fujii_characteristic(&w, &fam, &fam)?);
    } else {
        notes.push(format!("A_inf_fujii skipped: the family has {cubes} cubes, above --fujii-limit {}", a.fujii_limit));
    }
    let replay = if a.replay {
        let mut out = Vec::new();
        for c in chars.iter().filter(|c| c.witness.is_some()) {
            let value = weights::replay_witness(&w, c, Some(&p), Some(&fam))?;
            let agrees = weights::values_agree(&value, &c.value);
            if !agrees {
                return Err(Breach(format!(
                    "{} witness {:?} gives {:?}, the supremum was {:?}",
                    c.characteristic, c.witness, value, c.value
                ))
                .into());
            }
            out.push(ReplayResult { characteristic: c.characteristic.clone(), value, agrees });
        }
        Some(out)
    } else {
        None
    };
    let report = CharOutput { family: fam.describe(), p: rational::format(&p), characteristics: chars, notes, replay };
    emit(&a.out, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    Ok(Outcome::Success)
}

fn verify_cmd(a: &VerifyArgs) -> Result<Outcome> {
    if a.suite != "all" && !SUITES.contains(&a.suite.as_str()) {
        bail!(Usage(format!("unknown suite {:?}; expected one of {} or all", a.suite, SUITES.join(", "))));
    }
    let ts =
        a.t.as_deref().map(|s| s.split(',').map(|t| parse(t.trim(), "--t")).collect::<Result<Vec<_>>>()).transpose()?;
    let cfg = SuiteConfig { seed: a.seed, count: a.count, ts, dims: a.n, cells: a.cells };
    let reports = verify::run_suite(&a.suite, &cfg)?;
    let mut lines = String::new();
    for r in &reports {
        lines += &r.to_json_line()?;
        lines.push('\n');
        eprintln!(
            "{}: {} ({} instances, {} skipped, {} ms)",
            r.claim,
            if r.passed() { "pass" } else { "FAIL" },
            r.instances,
            r.skipped,
            r.runtime_ms
        );
    }
    print!("{lines}");
    if let Some(p) = &a.out {
        write_atomic(p, &lines)?;
    }
    Ok(if reports.iter().all(|r| r.passed()) { Outcome::Success } else { Outcome::Failed })
}

fn report_cmd(a: &ReportArgs) -> Result<Outcome> {
    let mut reports = Vec::new();
    for path in &a.inputs {
        for (i, line) in read(path)?.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            reports.push(VerificationReport::from_json(line).with_context(|| format!("{}:{}", path.display(), i + 1))?);
        }
    }
    let worst = |r: &VerificationReport| match &r.worst_ratio {
        Some(v) => serde_json::to_value(v).map(|v| match v {
            serde_json::Value::String(s) => s,
            other => other.to_string(),
        }),
        None => Ok(String::new()),
    };
    let text = match a.output.format {
        Format::Csv => {
            let mut s = String::from("claim,status,instances,skipped,worst_ratio,seed,runtime_ms,flags\n");
            for r in &reports {
                s += &format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.claim,
                    if r.passed() { "pass" } else { "fail" },
                    r.instances,
                    r.skipped,
                    worst(r)?,
                    r.seed.map(|s| s.to_string()).unwrap_or_default(),
                    r.runtime_ms,
                    r.flags.len()
                );
            }
            s
        }
        Format::Json => {
            let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.claim.as_str()).collect();
            let rows: Vec<_> = reports
                .iter()
                .map(|r| {
                    Ok(json!({
                        "claim": r.claim,
                        "status": r.status,
                        "instances": r.instances,
                        "skipped": r.skipped,
                        "worst_ratio": worst(r)?,
                        "flags": r.flags.len(),
                    }))
                })
                .collect::<Result<_>>()?;
            serde_json::to_string_pretty(&json!({
                "reports": reports.len(),
                "passed": reports.len() - failed.len(),
                "failed": failed,
                "rows": rows,
            }))? + "\n"
        }
    };
    emit(&a.output.out, &text)?;
    Ok(if reports.iter().all(|r| r.passed()) { Outcome::Success } else { Outcome::Failed })
}

/// A malformed request that clap could not catch.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}
