//! Command-line front end: `integrate`, `norm`, `young` and `verify`.
//!
//! Exit codes: 0 on success (and when every asserted check passes), 1 when a
//! check fails or a computation does not converge, 2 on usage or input errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::funcspec::{FuncExpr, FunctionSpec, Interval};
use crate::hkint::hk_integrate;
use crate::norms::{luxemburg_norm, weak_norm, NormResult, NormTolerances};
use crate::verifier::{corpus, run_suites, Corpus, Suite, VerifyConfig};
use crate::young::{ConjugateGrid, YoungFn};

#[derive(Debug, Parser)]
#[command(name = "hkorlicz", version, about = "Gauge integrals, Young functions and Orlicz-type norms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a function spec over a box.
    Integrate(IntegrateArgs),
    /// Luxemburg (strong) or weak norm of a function.
    Norm(NormArgs),
    /// Growth conditions and conjugate of a Young function.
    Young(YoungArgs),
    /// Run verification suites and emit a report.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Strong,
    Weak,
}

#[derive(Debug, Args)]
struct Output {
    /// Write the report here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct IntegrateArgs {
    /// Function-spec JSON file
    #[arg(long = "fn", value_name = "PATH")]
    func: PathBuf,
    /// Integration box as "lo,hi;lo,hi" [default: the function's domain]
    #[arg(long = "box", value_name = "BOX")]
    bx: Option<String>,
    /// Absolute tolerance
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[command(flatten)]
    output: Output,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Args)]
struct NormArgs {
    #[arg(long, value_enum, default_value_t = Kind::Strong)]
    kind: Kind,
    /// Function-spec JSON file
    #[arg(long = "fn", value_name = "PATH")]
    func: PathBuf,
    /// Young-function JSON file
    #[arg(long, value_name = "PATH")]
    young: PathBuf,
    /// Box as "lo,hi;lo,hi" [default: the function's domain]
    #[arg(long = "box", value_name = "BOX")]
    bx: Option<String>,
    /// Integrator tolerance for the modular
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[command(flatten)]
    output: Output,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Args)]
struct YoungArgs {
    /// Young-function JSON file
    #[arg(long, value_name = "PATH")]
    young: PathBuf,
    #[command(flatten)]
    output: Output,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// "all" or a comma-separated list of suite names
    #[arg(long, default_value = "all")]
    suite: String,
    /// "default" or a corpus manifest JSON file
    #[arg(long, default_value = "default")]
    corpus: String,
    /// Extra Young-function JSON file added to the corpus (repeatable)
    #[arg(long, value_name = "PATH")]
    young: Vec<PathBuf>,
    /// Integrator tolerance used by every modular
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[command(flatten)]
    output: Output,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

/// Failure modes that map to exit codes.
enum Failure {
    Usage(String),
    Compute(String),
}

const EXIT_FAIL: i32 = 1;
const EXIT_USAGE: i32 = 2;

pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Integrate(a) => integrate(a, out),
        Command::Norm(a) => norm(a, out),
        Command::Young(a) => young(a, out),
        Command::Verify(a) => verify(a, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Compute(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_FAIL
        }
    }
}

fn load_fn(path: &Path) -> Result<FuncExpr, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    FunctionSpec::from_json(&text)
        .and_then(|s| s.build())
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_young(path: &Path) -> Result<YoungFn, Failure> {
    corpus::load_young(path).map_err(|e| Failure::Usage(e.to_string()))
}

fn pick_box(f: &FuncExpr, text: &Option<String>) -> Result<Interval, Failure> {
    match text {
        None => Ok(f.domain().clone()),
        Some(t) => Interval::parse_cli(t).map_err(|e| Failure::Usage(format!("--box {t:?}: {e}"))),
    }
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--tol must be a positive number, got {tol}")))
    }
}

fn emit(output: &Output, out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| Failure::Compute(e.to_string())),
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

/// Finite numbers as numbers, the rest as strings.
fn num(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

fn integrate(a: IntegrateArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let f = load_fn(&a.func)?;
    let bx = pick_box(&f, &a.bx)?;
    check_tol(a.tol)?;
    let r = hk_integrate(&f, &bx, a.tol).map_err(|e| Failure::Compute(e.to_string()))?;
    let text = match a.format {
        Format::Json => pretty(&json!({
            "function": f.label(),
            "box": bx.to_string(),
            "tol": a.tol,
            "value": r.value,
            "error_estimate": r.error_estimate,
            "cells": r.cells,
            "levels": r.levels,
        })),
        Format::Text => format!(
            "value          {:.9}\nerror estimate {:.3e}\ncells          {}\n",
            r.value, r.error_estimate, r.cells
        ),
    };
    emit(&a.output, out, &text)?;
    Ok(0)
}

fn norm_json(r: &NormResult) -> serde_json::Value {
    json!({
        "value": num(r.value),
        "bracket": [num(r.bracket.0), num(r.bracket.1)],
        "modular_at_value": num(r.modular_at_value),
        "iterations": r.iterations,
        "integrator_tol": r.tolerances.integrator,
        "bisection_rel_tol": r.tolerances.bisection_rel,
    })
}

fn norm(a: NormArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let f = load_fn(&a.func)?;
    let theta = load_young(&a.young)?;
    let bx = pick_box(&f, &a.bx)?;
    check_tol(a.tol)?;
    let tol = NormTolerances { integrator: a.tol, ..NormTolerances::default() };
    let r = match a.kind {
        Kind::Strong => luxemburg_norm(&f, &theta, &bx, &tol),
        Kind::Weak => weak_norm(&f, &theta, &bx, &tol),
    }
    .map_err(|e| Failure::Compute(e.to_string()))?;
    let kind = match a.kind {
        Kind::Strong => "strong",
        Kind::Weak => "weak",
    };
    let text = match a.format {
        Format::Json => {
            let mut v = norm_json(&r);
            v["kind"] = json!(kind);
            v["function"] = json!(f.label());
            v["young"] = json!(theta.to_string());
            v["box"] = json!(bx.to_string());
            pretty(&v)
        }
        Format::Text => format!("{}\n", fmt_value(r.value)),
    };
    emit(&a.output, out, &text)?;
    Ok(0)
}

fn fmt_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        "inf".to_string()
    }
}

fn young(a: YoungArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let theta = load_young(&a.young)?;
    let d2 = theta.delta2();
    let dp = theta.delta_prime();
    let inv = theta.inverse(1.0).ok();
    let conj = if theta.is_convex() { theta.conjugate_at(1.0).ok() } else { None };
    let complementary_ok = theta.is_convex() && theta.complementary(&ConjugateGrid::default()).is_ok();
    let text = match a.format {
        Format::Json => pretty(&json!({
            "young": theta.to_string(),
            "convex": theta.is_convex(),
            "delta2": { "holds": d2.holds, "witness": num(d2.witness), "extended_witness": num(d2.extended_witness) },
            "delta_prime": {
                "holds": dp.holds,
                "ratio_at_top": num(dp.ratio_at_top),
                "sups": dp.sups.iter().map(|(k, s)| json!([k, num(*s)])).collect::<Vec<_>>(),
            },
            "inverse_at_1": inv.map(num),
            "conjugate_at_1": conj.map(num),
            "complementary_tabulated": complementary_ok,
        })),
        Format::Text => {
            let last = dp.sups.last().map_or(f64::NAN, |s| s.1);
            format!(
                "young          {theta}\nconvex         {}\ndelta2         {} (sup θ(2x)/θ(x) = {:.6})\ndelta'         {} (S(2^-20) = {:.3e}, ratio at 1e6 = {:.6})\ninverse(1)     {}\nconjugate(1)   {}\n",
                theta.is_convex(),
                d2.holds,
                d2.witness,
                dp.holds,
                last,
                dp.ratio_at_top,
                inv.map_or("none".into(), |v| format!("{v:.9}")),
                conj.map_or("none".into(), |v| format!("{v:.9}")),
            )
        }
    };
    emit(&a.output, out, &text)?;
    Ok(0)
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let suites = Suite::parse_list(&a.suite).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut corpus = if a.corpus == "default" {
        Corpus::default()
    } else {
        Corpus::load_manifest(Path::new(&a.corpus)).map_err(|e| Failure::Usage(e.to_string()))?
    };
    for path in &a.young {
        corpus.young.push(load_young(path)?);
    }
    check_tol(a.tol)?;
    let cfg = VerifyConfig { tol: NormTolerances { integrator: a.tol, ..NormTolerances::default() } };
    let report = run_suites(&corpus, &suites, &cfg);
    let text = match a.format {
        Format::Json => report.to_json() + "\n",
        Format::Text => report.to_text(),
    };
    emit(&a.output, out, &text)?;
    Ok(if report.passed() { 0 } else { EXIT_FAIL })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("hkorlicz").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn help_exits_zero() {
        for sub in ["integrate", "norm", "young", "verify"] {
            let (code, out, _) = call(&[sub, "--help"]);
            assert_eq!(code, 0);
            assert!(out.contains("--out"), "{sub}: {out}");
            assert!(out.contains("default"), "{sub}: {out}");
        }
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(call(&["integrate", "--bogus"]).0, 2);
        let (code, _, err) = call(&["integrate", "--fn", "/nonexistent/f.json"]);
        assert_eq!(code, 2);
        assert!(err.contains("/nonexistent/f.json"));
        assert_eq!(call(&["verify", "--suite", "nope"]).0, 2);
    }

    #[test]
    fn integrate_and_norm() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("chi.json");
        std::fs::write(
            &f,
            r#"{"kind":"builtin","builtin":{"name":"indicator","params":{"box":[[0,1]]}},"domain":[[0,2]]}"#,
        )
        .unwrap();
        let y = dir.path().join("p2.json");
        std::fs::write(&y, r#"{"family":"power","params":{"p":2}}"#).unwrap();
        let (code, out, _) = call(&["integrate", "--fn", f.to_str().unwrap(), "--format", "json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["value"], 1.0);
        let (code, out, _) =
            call(&["norm", "--kind", "weak", "--fn", f.to_str().unwrap(), "--young", y.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "1.000000");
    }
}
