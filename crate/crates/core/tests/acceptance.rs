//! Acceptance run: one PASS/FAIL line per criterion with its pinned tolerance.
//!
//! Runs without the libtest harness so every line is printed. The process
//! exits nonzero when a criterion fails, except for criterion 5's log1p ratio,
//! whose bound lies above the analytic supremum on the grid (see `log1p_bound`).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::time::{Duration, Instant};

use hkorlicz::cli;
use hkorlicz::funcspec::builtin::osc_primitive;
use hkorlicz::funcspec::{Builtin, FuncExpr, Interval};
use hkorlicz::hkint::hk_integrate;
use hkorlicz::measure::DistributionFn;
use hkorlicz::norms::{luxemburg_norm, weak_norm_of, NormTolerances, WeakProfile};
use hkorlicz::verifier::checks;
use hkorlicz::verifier::{CheckRecord, Corpus, VerifyConfig};
use hkorlicz::young::{YoungFn, DELTA_PRIME_T_MAX};

/// `max_k log(1 + k·10⁶)/log(1 + 10⁶)` over `k = 2^-1 … 2^-20`, attained at `k = 1/2`.
fn log1p_bound() -> f64 {
    (1.0 + 0.5 * DELTA_PRIME_T_MAX).ln() / (1.0 + DELTA_PRIME_T_MAX).ln()
}

struct Outcome {
    id: u32,
    pass: bool,
    /// Failing is the expected, documented result.
    known: bool,
    line: String,
}

fn report(id: u32, pass: bool, detail: String) -> Outcome {
    let line = format!("criterion {id:2}: {}  {detail}", if pass { "PASS" } else { "FAIL" });
    println!("{line}");
    Outcome { id, pass, known: false, line }
}

fn asserted_failures(records: &[CheckRecord]) -> Vec<&CheckRecord> {
    records.iter().filter(|r| r.asserted && !r.passed()).collect()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn indicator_closed_form(corpus: &Corpus, cfg: &VerifyConfig) -> Outcome {
    let (records, took) = timed(|| checks::check_indicator_formula(corpus, cfg));
    let bad = asserted_failures(&records);
    let worst = records.iter().map(|r| r.slack / r.rhs).fold(0.0, f64::max);
    report(
        1,
        bad.is_empty() && records.len() == 30 && took < Duration::from_secs(10),
        format!(
            "{} indicator cases, {} off, worst rel err {worst:.2e} (tol 1e-4), {:.2}s (limit 10s)",
            records.len(),
            bad.len(),
            took.as_secs_f64()
        ),
    )
}

fn weak_below_strong(corpus: &Corpus, cfg: &VerifyConfig) -> Outcome {
    let (records, took) = timed(|| checks::check_weak_le_strong(corpus, cfg));
    let bad = asserted_failures(&records);
    report(
        2,
        bad.is_empty() && records.len() >= 20 && took < Duration::from_secs(30),
        format!(
            "{} (f, θ) pairs, {} failures (slack 3·tol), {:.2}s (limit 30s)",
            records.len(),
            bad.len(),
            took.as_secs_f64()
        ),
    )
}

fn oscillating_derivative() -> Outcome {
    let unit = Interval::segment(0.0, 1.0).unwrap();
    let f = FuncExpr::from_builtin(Builtin::OscDeriv, unit.clone()).unwrap();
    let (res, took) = timed(|| hk_integrate(&f, &unit, 1e-3));
    let expected = osc_primitive(1.0);
    match res {
        Ok(r) => {
            let err = (r.value - expected).abs();
            report(
                3,
                err <= 1e-3 && took < Duration::from_secs(20),
                format!(
                    "integral {:.6} vs sin 1 = {expected:.6}, err {err:.2e} (tol 1e-3), {} cells, {:.2}s (limit 20s)",
                    r.value,
                    r.cells,
                    took.as_secs_f64()
                ),
            )
        }
        Err(e) => report(3, false, format!("integration failed: {e}")),
    }
}

fn luxemburg_matches_lp(corpus: &Corpus) -> Outcome {
    let tol = NormTolerances { integrator: 1e-9, bisection_rel: 1e-7 };
    let mut cases = 0;
    let mut worst = 0.0f64;
    let mut problems = Vec::new();
    for p in [1.0, 2.0, 3.0] {
        let theta = YoungFn::power(p);
        for f in &corpus.functions {
            let Some(exact) = f.exact_lp_norm(f.domain(), p) else { continue };
            cases += 1;
            match luxemburg_norm(f, &theta, f.domain(), &tol) {
                Ok(n) => {
                    let rel = if exact == 0.0 { n.value } else { (n.value - exact).abs() / exact };
                    worst = worst.max(rel);
                    if !(rel <= 1e-5) {
                        problems.push(format!("{}/p={p}: {} vs {exact}", f.label(), n.value));
                    }
                }
                Err(e) => problems.push(format!("{}/p={p}: {e}", f.label())),
            }
        }
    }
    let mut detail = format!("{cases} (f, p) cases, worst rel err {worst:.2e} (tol 1e-5)");
    if !problems.is_empty() {
        detail.push_str(&format!("; off: {}", problems.join(", ")));
    }
    report(4, problems.is_empty() && cases > 0, detail)
}

fn growth_conditions() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for p in [1.0, 2.0, 3.0] {
        let theta = YoungFn::power(p);
        let d2 = theta.delta2();
        let dp = theta.delta_prime();
        let good = d2.holds && (d2.witness - 2f64.powf(p)).abs() <= 1e-6 && dp.holds;
        ok &= good;
        parts.push(format!("power({p}) Δ2 witness {:.9} Δ′ {}", d2.witness, dp.holds));
    }
    let expm = YoungFn::expm().delta2();
    ok &= !expm.holds;
    parts.push(format!("expm Δ2 {}", expm.holds));

    let lp = YoungFn::log1p().delta_prime();
    let ratio_ok = !lp.holds && lp.ratio_at_top >= 0.99;
    parts.push(format!("log1p Δ′ {} ratio at 1e6 {:.4} (need ≥ 0.99)", lp.holds, lp.ratio_at_top));
    let mut out = report(5, ok && ratio_ok, parts.join("; "));
    // The grid ratio can never reach 0.99: it is bounded by log1p_bound() ≈ 0.9498.
    let at_bound = (lp.ratio_at_top - log1p_bound()).abs() <= 1e-12;
    if ok && !lp.holds && !ratio_ok && at_bound {
        out.known = true;
        println!("              log1p ratio equals the analytic maximum {:.6}; the 0.99 bound is unreachable", log1p_bound());
    }
    out
}

fn safe_holder(corpus: &Corpus, cfg: &VerifyConfig) -> Outcome {
    let records = checks::check_holder(corpus, cfg);
    let bad = asserted_failures(&records);
    let sharp = records.iter().find(|r| r.id == "holder/chi[0,1]/chi[0,1]/scaled_power(2,0.5)/sharp");
    let ratio = sharp.map_or(f64::NAN, |r| r.lhs / r.rhs);
    let safe = records.iter().filter(|r| r.asserted).count();
    report(
        6,
        bad.is_empty() && safe > 0 && (ratio - 2.0).abs() <= 1e-3,
        format!("{safe} safe checks, {} failures; χ[0,1], t²/2 ratio {ratio:.6} (target 2 ± 1e-3)", bad.len()),
    )
}

fn subadditivity(corpus: &Corpus, cfg: &VerifyConfig) -> Outcome {
    let records: Vec<CheckRecord> =
        checks::check_triangle_weak(corpus, cfg).into_iter().filter(|r| r.id.ends_with("/distribution")).collect();
    let bad = asserted_failures(&records);
    report(
        7,
        bad.is_empty() && !records.is_empty(),
        format!("{} pairs on a 64-point t-grid, {} failures (allowance 4e-3·volume)", records.len(), bad.len()),
    )
}

fn unit_certificate(corpus: &Corpus, cfg: &VerifyConfig) -> Outcome {
    let mut cases = 0;
    let mut worst = 0.0f64;
    let mut problems = Vec::new();
    for f in &corpus.functions {
        let d = match DistributionFn::new(f, f.domain()) {
            Ok(d) => d,
            Err(e) => {
                problems.push(format!("{}: {e}", f.label()));
                continue;
            }
        };
        // Independent of the 512-point profile the norm search uses.
        let dense = WeakProfile::with_grid(&d, 4096);
        for theta in &corpus.young {
            let norm = match weak_norm_of(&d, theta, &cfg.tol) {
                Ok(n) => n.value,
                Err(e) => {
                    problems.push(format!("{}/{theta}: {e}", f.label()));
                    continue;
                }
            };
            if !(norm.is_finite() && norm > 0.0) {
                continue;
            }
            cases += 1;
            let cert = dense.modular(theta, norm);
            worst = worst.max(cert);
            if !(cert <= 1.005) {
                problems.push(format!("{}/{theta}: {cert}", f.label()));
            }
        }
    }
    let mut detail = format!("{cases} (f, θ) cases, worst certificate {worst:.6} (bound 1.005)");
    if !problems.is_empty() {
        detail.push_str(&format!("; off: {}", problems.join(", ")));
    }
    report(8, problems.is_empty() && cases > 0, detail)
}

fn dominance(corpus: &Corpus, cfg: &VerifyConfig) -> Outcome {
    let records = checks::check_dominance_equivalence(corpus, cfg);
    let bad = asserted_failures(&records);
    let witness = records.iter().find(|r| r.id.ends_with("/witness"));
    let witness_ok = witness.is_some_and(|r| r.asserted && r.passed());
    report(
        9,
        bad.is_empty() && witness_ok,
        format!(
            "{} records, {} failures; non-dominating witness {}",
            records.iter().filter(|r| r.asserted).count(),
            bad.len(),
            witness.map_or("missing".to_string(), |r| format!("lhs {:.3e} > {:.0e}·rhs", r.lhs, checks::WITNESS_C)),
        ),
    )
}

fn determinism() -> Outcome {
    let once = || {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = cli::run(["hkorlicz", "verify", "--suite", "all"], &mut out, &mut err);
        (code, out)
    };
    let (a, b) = (once(), once());
    report(
        10,
        a.0 == 0 && a == b && !a.1.is_empty(),
        format!("exit codes {} and {}, {} bytes each, identical: {}", a.0, b.0, a.1.len(), a.1 == b.1),
    )
}

fn main() {
    let corpus = Corpus::default();
    let cfg = VerifyConfig::default();
    let outcomes = [
        indicator_closed_form(&corpus, &cfg),
        weak_below_strong(&corpus, &cfg),
        oscillating_derivative(),
        luxemburg_matches_lp(&corpus),
        growth_conditions(),
        safe_holder(&corpus, &cfg),
        subadditivity(&corpus, &cfg),
        unit_certificate(&corpus, &cfg),
        dominance(&corpus, &cfg),
        determinism(),
    ];
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("{passed}/{} criteria pass", outcomes.len());
    let unexpected: Vec<&Outcome> = outcomes.iter().filter(|o| !o.pass && !o.known).collect();
    if !unexpected.is_empty() {
        for o in &unexpected {
            eprintln!("unexpected failure: {}", o.line);
        }
        std::process::exit(1);
    }
    for o in outcomes.iter().filter(|o| o.known) {
        println!("criterion {} fails as documented", o.id);
    }
}
