//! Executable checks of the inequalities around median maximal operators.
//!
//! Every check produces a [`VerificationReport`]. A failing report carries a
//! [`Witness`] holding the complete input of the first failing instance, and
//! [`replay`] re-runs it single-threaded.
//!
//! The qualitative statement that the median maximal operator is bounded on
//! `L^p(w)` exactly when `w ∈ A_∞` is not one checkable inequality. It is
//! covered only through its quantified ingredients: the comparison
//! `𝓜 ≤ 𝓜^{1/2}`, domination by shifted dyadic grids, stopping cubes, the
//! expansion inequality for `𝓜^η`, the `(α, β)` profile of a weight and the
//! weighted `L¹` bound.

mod checks;
pub mod gen;
mod suites;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational;
use crate::weights::CharValue;

pub use checks::*;
pub use suites::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// Outcome of one claim over a batch of instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim: String,
    pub status: Status,
    pub instances: usize,
    pub skipped: usize,
    /// Largest value of the check's normalized quantity (see each check).
    pub worst_ratio: Option<CharValue>,
    /// Input of the first failing instance.
    pub witness: Option<Witness>,
    pub seed: Option<u64>,
    pub runtime_ms: u64,
    /// Non-normative observations, e.g. an intermediate constant exceeded.
    pub flags: Vec<String>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Combines reports of one claim run on several configurations.
    pub fn merge(claim: &str, parts: Vec<VerificationReport>) -> VerificationReport {
        let mut out = VerificationReport {
            claim: claim.into(),
            status: Status::Pass,
            instances: 0,
            skipped: 0,
            worst_ratio: None,
            witness: None,
            seed: parts.iter().find_map(|p| p.seed),
            runtime_ms: 0,
            flags: Vec::new(),
            notes: Vec::new(),
        };
        for p in parts {
            out.instances += p.instances;
            out.skipped += p.skipped;
            out.runtime_ms += p.runtime_ms;
            if p.status == Status::Fail && out.status == Status::Pass {
                out.status = Status::Fail;
                out.witness = p.witness;
            }
            if let Some(r) = p.worst_ratio {
                if out.worst_ratio.as_ref().is_none_or(|cur| exceeds(&r, cur)) {
                    out.worst_ratio = Some(r);
                }
            }
            out.flags.extend(p.flags.into_iter().map(|f| format!("[{}] {f}", p.claim)));
            out.notes.extend(p.notes.into_iter().map(|n| format!("[{}] {n}", p.claim)));
        }
        out
    }
}

/// `a > b`, exactly when both are rational.
fn exceeds(a: &CharValue, b: &CharValue) -> bool {
    match (a, b) {
        (CharValue::Exact(x), CharValue::Exact(y)) => x > y,
        _ => a.to_f64() > b.to_f64(),
    }
}

/// What one instance showed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Verdict {
    pub ratio: Option<CharValue>,
    pub failed: bool,
    pub detail: Option<String>,
    pub flags: Vec<String>,
    pub skipped: bool,
}

impl Verdict {
    pub(crate) fn observe(&mut self, r: CharValue) {
        if self.ratio.as_ref().is_none_or(|cur| exceeds(&r, cur)) {
            self.ratio = Some(r);
        }
    }

    pub(crate) fn fail(&mut self, detail: String) {
        if !self.failed {
            self.failed = true;
            self.detail = Some(detail);
        }
    }

    pub(crate) fn skipped() -> Self {
        Verdict { skipped: true, ..Verdict::default() }
    }
}

pub(crate) struct Outcome {
    verdict: Verdict,
    witness: Option<Witness>,
}

impl Outcome {
    pub(crate) fn new(verdict: Verdict, witness: impl FnOnce() -> Witness) -> Self {
        let witness = verdict.failed.then(witness);
        Outcome { verdict, witness }
    }
}

/// Folds instance outcomes in index order, so the report does not depend on
/// the order in which parallel workers finished.
pub(crate) fn aggregate(
    claim: &str,
    seed: Option<u64>,
    start: Instant,
    outcomes: Vec<Outcome>,
    notes: Vec<String>,
) -> VerificationReport {
    let mut report = VerificationReport {
        claim: claim.into(),
        status: Status::Pass,
        instances: 0,
        skipped: 0,
        worst_ratio: None,
        witness: None,
        seed,
        runtime_ms: 0,
        flags: Vec::new(),
        notes,
    };
    for (i, o) in outcomes.into_iter().enumerate() {
        let v = o.verdict;
        if v.skipped {
            report.skipped += 1;
            continue;
        }
        report.instances += 1;
        if let Some(r) = v.ratio {
            if report.worst_ratio.as_ref().is_none_or(|cur| exceeds(&r, cur)) {
                report.worst_ratio = Some(r);
            }
        }
        report.flags.extend(v.flags.into_iter().map(|f| format!("instance {i}: {f}")));
        if v.failed && report.status == Status::Pass {
            report.status = Status::Fail;
            report.witness = o.witness;
            if let Some(d) = v.detail {
                report.notes.push(format!("first failure at instance {i}: {d}"));
            }
        }
    }
    report.runtime_ms = start.elapsed().as_millis() as u64;
    report
}

/// Re-evaluates a witness on one thread. `Ok(true)` means it fails again.
pub fn replay(witness: &Witness) -> Result<bool> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::Precondition(format!("cannot build replay pool: {e}")))?;
    pool.install(|| witness.evaluate().map(|v| v.failed))
}

pub(crate) fn fmt(r: &rational::Rational) -> String {
    rational::format(r)
}
