//! Executable checks of the inclusion and norm inequalities over a corpus,
//! collected into a deterministic JSON report.

pub mod checks;
pub mod corpus;

use std::fmt;
use std::path::PathBuf;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::norms::NormTolerances;

pub use corpus::{Corpus, DominancePair, IndicatorCase, SequenceCase};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("{}: {message}", path.display())]
    Input { path: PathBuf, message: String },
    #[error("invalid corpus: {0}")]
    Corpus(String),
    #[error("unknown suite `{0}` (expected all or one of {list})", list = Suite::ALL.iter().map(|s| s.name()).collect::<Vec<_>>().join(", "))]
    UnknownSuite(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    WeakLeStrong,
    IndicatorFormula,
    Holder,
    TriangleWeak,
    Dominance,
    L1Embedding,
    ConvergenceInMeasure,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::WeakLeStrong,
        Suite::IndicatorFormula,
        Suite::Holder,
        Suite::TriangleWeak,
        Suite::Dominance,
        Suite::L1Embedding,
        Suite::ConvergenceInMeasure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::WeakLeStrong => "weak_le_strong",
            Suite::IndicatorFormula => "indicator_formula",
            Suite::Holder => "holder",
            Suite::TriangleWeak => "triangle_weak",
            Suite::Dominance => "dominance",
            Suite::L1Embedding => "l1_embedding",
            Suite::ConvergenceInMeasure => "convergence_in_measure",
        }
    }

    /// `all` or a comma-separated list of names, in the order given (duplicates dropped).
    pub fn parse_list(text: &str) -> Result<Vec<Suite>, VerifyError> {
        if text.trim() == "all" {
            return Ok(Self::ALL.to_vec());
        }
        let mut out = Vec::new();
        for name in text.split(',').map(str::trim) {
            let s = Self::ALL
                .into_iter()
                .find(|s| s.name() == name)
                .ok_or_else(|| VerifyError::UnknownSuite(name.to_string()))?;
            if !out.contains(&s) {
                out.push(s);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Error,
}

/// Non-finite numbers are written as the strings `"inf"`, `"-inf"` and `"nan"`.
fn json_number<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub inputs: serde_json::Value,
    #[serde(serialize_with = "json_number")]
    pub lhs: f64,
    #[serde(serialize_with = "json_number")]
    pub rhs: f64,
    #[serde(serialize_with = "json_number")]
    pub slack: f64,
    #[serde(serialize_with = "json_number")]
    pub tolerance: f64,
    pub verdict: Verdict,
    pub note: String,
    /// Report-only records never affect the summary verdict.
    pub asserted: bool,
}

impl CheckRecord {
    /// `verdict = pass` iff `slack ≤ tolerance`.
    pub fn judged(
        id: String,
        inputs: serde_json::Value,
        (lhs, rhs, slack): (f64, f64, f64),
        tolerance: f64,
        note: impl Into<String>,
        asserted: bool,
    ) -> Self {
        let verdict = if slack.is_nan() {
            Verdict::Error
        } else if slack <= tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self { id, inputs, lhs, rhs, slack, tolerance, verdict, note: note.into(), asserted }
    }

    /// `lhs ≤ rhs + tolerance`.
    pub fn le(id: String, inputs: serde_json::Value, lhs: f64, rhs: f64, tolerance: f64, note: impl Into<String>) -> Self {
        let slack = if lhs == rhs { 0.0 } else { lhs - rhs };
        Self::judged(id, inputs, (lhs, rhs, slack), tolerance, note, true)
    }

    pub fn error(id: String, inputs: serde_json::Value, message: impl fmt::Display, asserted: bool) -> Self {
        Self {
            id,
            inputs,
            lhs: f64::NAN,
            rhs: f64::NAN,
            slack: f64::NAN,
            tolerance: f64::NAN,
            verdict: Verdict::Error,
            note: message.to_string(),
            asserted,
        }
    }

    pub fn report_only(mut self) -> Self {
        self.asserted = false;
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub error: usize,
    /// Report-only records, whatever their verdict.
    pub reported: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl VerifyReport {
    pub fn new(suite: impl Into<String>, checks: Vec<CheckRecord>) -> Self {
        let mut summary = Summary::default();
        for c in &checks {
            if !c.asserted {
                summary.reported += 1;
                continue;
            }
            match c.verdict {
                Verdict::Pass => summary.pass += 1,
                Verdict::Fail => summary.fail += 1,
                Verdict::Error => summary.error += 1,
            }
        }
        Self { suite: suite.into(), checks, summary }
    }

    /// All asserted checks passed.
    pub fn passed(&self) -> bool {
        self.summary.fail == 0 && self.summary.error == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("suite {}\n", self.suite);
        for c in &self.checks {
            let tag = match (c.asserted, c.verdict) {
                (false, _) => "info",
                (true, Verdict::Pass) => "pass",
                (true, Verdict::Fail) => "FAIL",
                (true, Verdict::Error) => "ERROR",
            };
            out.push_str(&format!(
                "{tag:5} {}  lhs={} rhs={} slack={} tol={}",
                c.id,
                short(c.lhs),
                short(c.rhs),
                short(c.slack),
                short(c.tolerance)
            ));
            if !c.note.is_empty() {
                out.push_str(&format!("  ({})", c.note));
            }
            out.push('\n');
        }
        let s = &self.summary;
        out.push_str(&format!("{} pass, {} fail, {} error, {} report-only\n", s.pass, s.fail, s.error, s.reported));
        out
    }
}

fn short(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6e}")
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VerifyConfig {
    pub tol: NormTolerances,
}

/// Run the named suites in order and assemble one report.
pub fn run_suites(corpus: &Corpus, suites: &[Suite], cfg: &VerifyConfig) -> VerifyReport {
    let mut checks = Vec::new();
    for s in suites {
        checks.extend(run_suite(corpus, *s, cfg));
    }
    let name = if suites == Suite::ALL { "all".to_string() } else { suites.iter().map(|s| s.name()).collect::<Vec<_>>().join(",") };
    VerifyReport::new(name, checks)
}

pub fn run_suite(corpus: &Corpus, suite: Suite, cfg: &VerifyConfig) -> Vec<CheckRecord> {
    match suite {
        Suite::WeakLeStrong => checks::check_weak_le_strong(corpus, cfg),
        Suite::IndicatorFormula => checks::check_indicator_formula(corpus, cfg),
        Suite::Holder => checks::check_holder(corpus, cfg),
        Suite::TriangleWeak => checks::check_triangle_weak(corpus, cfg),
        Suite::Dominance => checks::check_dominance_equivalence(corpus, cfg),
        Suite::L1Embedding => checks::check_l1_embedding(corpus, cfg),
        Suite::ConvergenceInMeasure => checks::check_convergence_in_measure(corpus, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_lists() {
        assert_eq!(Suite::parse_list("all").unwrap().len(), 7);
        assert_eq!(Suite::parse_list("holder, holder,dominance").unwrap(), vec![Suite::Holder, Suite::Dominance]);
        assert!(Suite::parse_list("nope").is_err());
    }

    #[test]
    fn verdict_follows_slack() {
        let r = CheckRecord::le("a".into(), serde_json::Value::Null, 1.0, 1.0, 0.0, "");
        assert!(r.passed());
        let r = CheckRecord::le("b".into(), serde_json::Value::Null, 1.1, 1.0, 0.05, "");
        assert_eq!(r.verdict, Verdict::Fail);
        let r = CheckRecord::le("c".into(), serde_json::Value::Null, 1.0, f64::INFINITY, 0.0, "");
        assert!(r.passed());
        let e = CheckRecord::error("d".into(), serde_json::Value::Null, "boom", true);
        let report = VerifyReport::new("t", vec![r, e, CheckRecord::le("x".into(), serde_json::Value::Null, 2.0, 1.0, 0.0, "").report_only()]);
        assert_eq!(report.summary, Summary { pass: 1, fail: 0, error: 1, reported: 1 });
        assert!(!report.passed());
        assert!(report.to_json().contains("\"inf\""));
    }
}
