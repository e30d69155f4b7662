//! Strong (Luxemburg) and weak Orlicz norms, each found by bisection on a
//! monotone feasibility map `α ↦ (modular(f/α) ≤ 1)`.

use thiserror::Error;

use crate::funcspec::{EvalError, FuncExpr, Interval};
use crate::hkint::{hk_integrate, Composed, HkError};
use crate::measure::{DistributionFn, MeasureError};
use crate::young::{log_grid, YoungFn};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NormError {
    #[error("integration failed: {0}")]
    Integration(#[from] HkError),
    #[error("distribution estimate failed: {0}")]
    Measure(#[from] MeasureError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormTolerances {
    /// Absolute tolerance handed to the integrator for each modular.
    pub integrator: f64,
    /// Final bracket width relative to its upper end.
    pub bisection_rel: f64,
}

impl Default for NormTolerances {
    fn default() -> Self {
        Self { integrator: 1e-4, bisection_rel: 1e-5 }
    }
}

pub const ALPHA_FLOOR: f64 = 1e-9;
pub const ALPHA_CEILING: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormResult {
    /// `f64::INFINITY` when nothing up to the ceiling is feasible.
    pub value: f64,
    pub bracket: (f64, f64),
    pub modular_at_value: f64,
    pub iterations: u32,
    pub tolerances: NormTolerances,
}

impl NormResult {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// `HK∫_K θ(|f|/α)`. Overflow of `θ` counts as `+∞`.
pub fn strong_modular(f: &FuncExpr, theta: &YoungFn, alpha: f64, k: &Interval, tol: f64) -> Result<f64, NormError> {
    check_alpha(alpha)?;
    let integrand = Composed { inner: f, map: |v: f64| theta.eval(v.abs() / alpha) };
    match hk_integrate(&integrand, k, tol) {
        Ok(r) => Ok(r.value),
        // the integrator's own finiteness check fires only on θ overflow
        Err(HkError::Eval(EvalError::NonFinite { op, .. })) if op == "integrand" => Ok(f64::INFINITY),
        Err(e) => Err(e.into()),
    }
}

pub fn luxemburg_norm(f: &FuncExpr, theta: &YoungFn, k: &Interval, tol: &NormTolerances) -> Result<NormResult, NormError> {
    search(|alpha| strong_modular(f, theta, alpha, k, tol.integrator), tol)
}

/// Candidate levels `s` with `d_f(s)`, so that the weak modular of `f/α` is
/// `max θ(s/α)·d_f(s)`: a log grid below the essential sup plus every jump and
/// its left approach.
#[derive(Debug, Clone)]
pub struct WeakProfile {
    points: Vec<(f64, f64)>,
}

pub const WEAK_GRID_POINTS: usize = 512;
pub const LEFT_APPROACH: f64 = 1e-9;

impl WeakProfile {
    pub fn new(d: &DistributionFn) -> Self {
        Self::with_grid(d, WEAK_GRID_POINTS)
    }

    pub fn with_grid(d: &DistributionFn, n: usize) -> Self {
        let m = d.ess_sup();
        if !(m > 0.0) {
            return Self { points: Vec::new() };
        }
        let mut levels = log_grid(1e-6 * m, m, n);
        for j in d.jumps() {
            levels.push(j);
            levels.push(j * (1.0 - LEFT_APPROACH));
        }
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        // θ is nondecreasing, so a point with both a smaller level and a
        // smaller measure than another can never attain the sup
        let mut points = Vec::with_capacity(levels.len());
        let mut best = 0.0f64;
        for s in levels.into_iter().rev() {
            let v = d.at(s);
            if v > best {
                best = v;
                points.push((s, v));
            }
        }
        points.reverse();
        Self { points }
    }

    /// `sup_t θ(t)·measure{|f|/α > t}`.
    pub fn modular(&self, theta: &YoungFn, alpha: f64) -> f64 {
        self.points.iter().map(|&(s, v)| theta.eval(s / alpha) * v).fold(0.0, f64::max)
    }
}

pub fn weak_modular(f: &FuncExpr, theta: &YoungFn, alpha: f64, bx: &Interval) -> Result<f64, NormError> {
    check_alpha(alpha)?;
    let d = DistributionFn::new(f, bx)?;
    Ok(WeakProfile::new(&d).modular(theta, alpha))
}

pub fn weak_norm(f: &FuncExpr, theta: &YoungFn, bx: &Interval, tol: &NormTolerances) -> Result<NormResult, NormError> {
    let d = DistributionFn::new(f, bx)?;
    weak_norm_of(&d, theta, tol)
}

/// Weak norm from an already built distribution.
pub fn weak_norm_of(d: &DistributionFn, theta: &YoungFn, tol: &NormTolerances) -> Result<NormResult, NormError> {
    let profile = WeakProfile::new(d);
    search(|alpha| Ok(profile.modular(theta, alpha)), tol)
}

fn check_alpha(alpha: f64) -> Result<(), NormError> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(NormError::InvalidInput(format!("α must be positive, got {alpha}")));
    }
    Ok(())
}

/// Bracket from α = 1 by doubling or halving within [floor, ceiling], then
/// bisect. Returns the upper end, which is feasible by construction.
fn search(mut modular: impl FnMut(f64) -> Result<f64, NormError>, tol: &NormTolerances) -> Result<NormResult, NormError> {
    let mut iterations = 0u32;
    let mut probe = |alpha: f64, it: &mut u32| -> Result<(bool, f64), NormError> {
        *it += 1;
        let m = modular(alpha)?;
        Ok((m <= 1.0, m))
    };
    let (first_ok, first_m) = probe(1.0, &mut iterations)?;
    let (mut lo, mut hi, mut m_hi);
    if first_ok {
        hi = 1.0;
        m_hi = first_m;
        loop {
            let a = hi / 2.0;
            if a < ALPHA_FLOOR {
                return Ok(NormResult {
                    value: 0.0,
                    bracket: (0.0, hi),
                    modular_at_value: m_hi,
                    iterations,
                    tolerances: *tol,
                });
            }
            let (ok, m) = probe(a, &mut iterations)?;
            if !ok {
                lo = a;
                break;
            }
            hi = a;
            m_hi = m;
        }
    } else {
        lo = 1.0;
        loop {
            let a = lo * 2.0;
            if a > ALPHA_CEILING {
                return Ok(NormResult {
                    value: f64::INFINITY,
                    bracket: (lo, f64::INFINITY),
                    modular_at_value: f64::INFINITY,
                    iterations,
                    tolerances: *tol,
                });
            }
            let (ok, m) = probe(a, &mut iterations)?;
            if ok {
                hi = a;
                m_hi = m;
                break;
            }
            lo = a;
        }
    }
    while hi - lo > tol.bisection_rel * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (ok, m) = probe(mid, &mut iterations)?;
        if ok {
            hi = mid;
            m_hi = m;
        } else {
            lo = mid;
        }
    }
    Ok(NormResult { value: hi, bracket: (lo, hi), modular_at_value: m_hi, iterations, tolerances: *tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspec::Builtin;

    fn seg(lo: f64, hi: f64) -> Interval {
        Interval::segment(lo, hi).unwrap()
    }

    fn chi01() -> FuncExpr {
        FuncExpr::indicator(seg(0.0, 1.0), seg(0.0, 2.0)).unwrap()
    }

    fn tight() -> NormTolerances {
        NormTolerances { integrator: 1e-9, bisection_rel: 1e-8 }
    }

    #[test]
    fn strong_modular_examples() {
        let k = seg(0.0, 2.0);
        let p2 = YoungFn::power(2.0);
        assert!((strong_modular(&chi01(), &p2, 1.0, &k, 1e-6).unwrap() - 1.0).abs() < 1e-12);
        assert!((strong_modular(&chi01(), &p2, 2.0, &k, 1e-6).unwrap() - 0.25).abs() < 1e-12);
        let big = FuncExpr::constant(1e3, k.clone()).unwrap();
        assert_eq!(strong_modular(&big, &YoungFn::expm(), 1.0, &k, 1e-4).unwrap(), f64::INFINITY);
    }

    #[test]
    fn luxemburg_examples() {
        let k = seg(0.0, 2.0);
        let p2 = YoungFn::power(2.0);
        let zero = FuncExpr::constant(0.0, k.clone()).unwrap();
        assert_eq!(luxemburg_norm(&zero, &p2, &k, &tight()).unwrap().value, 0.0);
        let one = luxemburg_norm(&chi01(), &p2, &k, &tight()).unwrap();
        assert!((one.value - 1.0).abs() < 1e-7 && one.value >= 1.0);
        assert!(one.modular_at_value <= 1.0);
        let two = luxemburg_norm(&chi01().scale(2.0), &p2, &k, &tight()).unwrap();
        assert!((two.value - 2.0).abs() < 2e-7);
    }

    #[test]
    fn weak_examples() {
        let k = seg(0.0, 2.0);
        let p2 = YoungFn::power(2.0);
        assert!((weak_modular(&chi01(), &p2, 1.0, &k).unwrap() - 1.0).abs() < 1e-8);
        assert!((weak_modular(&chi01(), &p2, 2.0, &k).unwrap() - 0.25).abs() < 1e-8);
        let zero = FuncExpr::constant(0.0, k.clone()).unwrap();
        assert_eq!(weak_modular(&zero, &p2, 1.0, &k).unwrap(), 0.0);
        assert_eq!(weak_norm(&zero, &p2, &k, &tight()).unwrap().value, 0.0);
        let w = weak_norm(&chi01(), &p2, &k, &tight()).unwrap();
        assert!((w.value - 1.0).abs() < 1e-7);
        let square = Interval::cube(-2.0, 2.0, 2).unwrap();
        let ball = FuncExpr::indicator(Interval::ball(&[0.0, 0.0], 1.0).unwrap(), square.clone()).unwrap();
        let w = weak_norm(&ball, &p2, &square, &tight()).unwrap();
        assert!((w.value - 2.0).abs() < 1e-6, "{w:?}");
    }

    #[test]
    fn infinite_sentinel() {
        let k = seg(0.0, 1.0);
        let huge = FuncExpr::constant(1e12, k.clone()).unwrap();
        let r = luxemburg_norm(&huge, &YoungFn::power(1.0), &k, &NormTolerances::default()).unwrap();
        assert_eq!(r.value, f64::INFINITY);
    }

    #[test]
    fn osc_modular_away_from_zero() {
        let k = seg(0.1, 1.0);
        let osc = FuncExpr::from_builtin(Builtin::OscDeriv, seg(0.0, 1.0)).unwrap();
        let hk = strong_modular(&osc, &YoungFn::power(1.0), 1.0, &k, 1e-5).unwrap();
        // brute-force midpoint oracle on 2·10⁶ cells
        let n = 2_000_000;
        let h = 0.9 / n as f64;
        let brute: f64 = (0..n).map(|i| osc.eval(&[0.1 + h * (i as f64 + 0.5)]).unwrap().abs() * h).sum();
        assert!((hk - brute).abs() < 1e-3, "{hk} vs {brute}");
    }
}
