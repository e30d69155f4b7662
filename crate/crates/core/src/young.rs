//! Young functions, their growth conditions (Δ2, Δ′), dominance, and the
//! complementary (convex conjugate) function.
//!
//! Every predicate here is a grid-based semi-decision. Each verdict carries the
//! observed values it was based on so a report can show why it was reached.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum YoungError {
    #[error("invalid Young function parameters: {0}")]
    InvalidParams(String),
    #[error("{0} is not flagged convex")]
    NotConvex(String),
    #[error("value {0} is beyond the reachable range of the Young function")]
    InverseOutOfRange(f64),
    #[error("complementary function is infinite at s = {0}")]
    ConjugateInfinite(f64),
    #[error("malformed young spec: {0}")]
    Spec(String),
}

/// Family and parameters, in the JSON young-spec layout
/// `{"family": "...", "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// `|t|^p`, `p ≥ 1`.
    Power { p: f64 },
    /// `c·|t|^p`, `p ≥ 1`, `c > 0`.
    ScaledPower { p: f64, c: f64 },
    /// `e^{|t|} − 1`.
    Expm,
    /// `log(1 + |t|)` (concave).
    Log1p,
    /// Piecewise-linear through `(t, value)` nodes, extrapolated linearly past the
    /// last node. A missing `(0, 0)` node is added.
    Table { points: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Family", into = "Family")]
pub struct YoungFn {
    family: Family,
    convex: bool,
}

impl TryFrom<Family> for YoungFn {
    type Error = YoungError;

    fn try_from(family: Family) -> Result<Self, YoungError> {
        YoungFn::new(family)
    }
}

impl From<YoungFn> for Family {
    fn from(y: YoungFn) -> Family {
        y.family
    }
}

const SLOPE_TOL: f64 = 1e-9;

impl YoungFn {
    pub fn new(family: Family) -> Result<Self, YoungError> {
        let bad = |m: String| Err(YoungError::InvalidParams(m));
        let family = match family {
            Family::Power { p } if !(p.is_finite() && p >= 1.0) => return bad(format!("power needs p ≥ 1, got {p}")),
            Family::ScaledPower { p, c } if !(p.is_finite() && p >= 1.0 && c.is_finite() && c > 0.0) => {
                return bad(format!("scaled_power needs p ≥ 1 and c > 0, got p={p}, c={c}"))
            }
            Family::Table { mut points } => {
                normalize_table(&mut points)?;
                Family::Table { points }
            }
            other => other,
        };
        let convex = match &family {
            Family::Power { .. } | Family::ScaledPower { .. } | Family::Expm => true,
            Family::Log1p => false,
            Family::Table { points } => table_is_convex(points),
        };
        Ok(Self { family, convex })
    }

    pub fn power(p: f64) -> Self {
        Self::new(Family::Power { p }).expect("power exponent must be ≥ 1")
    }

    pub fn scaled_power(p: f64, c: f64) -> Self {
        Self::new(Family::ScaledPower { p, c }).expect("scaled_power needs p ≥ 1, c > 0")
    }

    pub fn expm() -> Self {
        Self { family: Family::Expm, convex: true }
    }

    pub fn log1p() -> Self {
        Self { family: Family::Log1p, convex: false }
    }

    pub fn table(points: Vec<[f64; 2]>) -> Result<Self, YoungError> {
        Self::new(Family::Table { points })
    }

    pub fn from_json(text: &str) -> Result<Self, YoungError> {
        serde_json::from_str(text).map_err(|e| YoungError::Spec(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, YoungError> {
        let text = std::fs::read_to_string(path).map_err(|e| YoungError::Spec(e.to_string()))?;
        Self::from_json(&text)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    /// `θ(|t|)`. Total on finite input; may overflow to `+∞` for fast-growing families.
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.abs();
        match &self.family {
            Family::Power { p } => t.powf(*p),
            Family::ScaledPower { p, c } => c * t.powf(*p),
            Family::Expm => t.exp_m1(),
            Family::Log1p => t.ln_1p(),
            Family::Table { points } => table_eval(points, t),
        }
    }

    /// The smallest `t ≥ 0` with `θ(t) ≥ u`; closed form for power families,
    /// bracketing plus bisection otherwise.
    pub fn inverse(&self, u: f64) -> Result<f64, YoungError> {
        if !(u >= 0.0) || !u.is_finite() {
            return Err(YoungError::InverseOutOfRange(u));
        }
        if u == 0.0 {
            return Ok(0.0);
        }
        match &self.family {
            Family::Power { p } => return Ok(u.powf(1.0 / p)),
            Family::ScaledPower { p, c } => return Ok((u / c).powf(1.0 / p)),
            _ => {}
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        let mut expansions = 0;
        while self.eval(hi) < u {
            lo = hi;
            hi *= 2.0;
            expansions += 1;
            if expansions > 1100 || !hi.is_finite() {
                return Err(YoungError::InverseOutOfRange(u));
            }
        }
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-12 || mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) >= u {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Tabulated complementary function `φ(s) = sup_{x≥0} (x·s − θ(x))`.
    pub fn complementary(&self, grid: &ConjugateGrid) -> Result<YoungFn, YoungError> {
        if !self.convex {
            return Err(YoungError::NotConvex(self.to_string()));
        }
        let mut points = vec![[0.0, 0.0]];
        for s in grid.nodes() {
            points.push([s, self.conjugate_at(s)?]);
        }
        // Round-off in the supremum search can leave tiny dips; the conjugate is
        // nondecreasing, so clamp.
        for i in 1..points.len() {
            if points[i][1] < points[i - 1][1] {
                points[i][1] = points[i - 1][1];
            }
        }
        let mut out = YoungFn::table(points)?;
        out.convex = true;
        Ok(out)
    }

    /// `sup_{x ≥ 0} (x·s − θ(x))` by golden-section search on an expanding bracket.
    pub fn conjugate_at(&self, s: f64) -> Result<f64, YoungError> {
        if !self.convex {
            return Err(YoungError::NotConvex(self.to_string()));
        }
        if s <= 0.0 {
            return Ok(0.0);
        }
        let g = |x: f64| x * s - self.eval(x);
        let mut b = 1.0;
        let mut expansions = 0;
        while g(2.0 * b) > g(b) {
            b *= 2.0;
            expansions += 1;
            if expansions > 1100 || !g(2.0 * b).is_finite() {
                return Err(YoungError::ConjugateInfinite(s));
            }
        }
        let x = golden_max(g, 0.0, 2.0 * b);
        Ok(g(x).max(0.0))
    }

    /// Δ2 test on `θ(2x)/θ(x)` for `x ≥ 1`.
    pub fn delta2(&self) -> Delta2Verdict {
        let base = ratio_sup(self, &log_grid(1.0, 1e6, 601));
        let extended = ratio_sup(self, &log_grid(1.0, 1e12, 1201));
        let holds = base.is_finite() && extended.is_finite() && extended <= base * (1.0 + 1e-6);
        Delta2Verdict { holds, witness: base, extended_witness: extended }
    }

    /// Δ′ test: `S(k) = sup_t θ(kt)/θ(t)` for `k = 2^-1 … 2^-20`.
    pub fn delta_prime(&self) -> DeltaPrimeVerdict {
        let ts = log_grid(DELTA_PRIME_T_MIN, DELTA_PRIME_T_MAX, 1201);
        let sup_for = |k: f64| {
            ts.iter()
                .filter_map(|&t| {
                    let den = self.eval(t);
                    (den > 0.0 && den.is_finite()).then(|| self.eval(k * t) / den)
                })
                .fold(0.0, f64::max)
        };
        let sups: Vec<(f64, f64)> = (1..=20).map(|j| {
            let k = 0.5f64.powi(j);
            (k, sup_for(k))
        }).collect();
        let top = DELTA_PRIME_T_MAX;
        let ratio_at_top = sups.iter().map(|(k, _)| self.eval(k * top) / self.eval(top)).fold(0.0, f64::max);
        let last = sups.last().map_or(f64::INFINITY, |s| s.1);
        DeltaPrimeVerdict { holds: last < 1e-3, sups, ratio_at_top }
    }

    /// Smallest grid constant `C` with `self(t) ≤ other(C·t)` on the test grid.
    pub fn dominated_by(&self, other: &YoungFn) -> Option<f64> {
        let ts = log_grid(DOMINANCE_T_MIN, DOMINANCE_T_MAX, 1201);
        dominance_constants().into_iter().find(|&c| {
            ts.iter().all(|&t| self.eval(t) <= other.eval(c * t) * (1.0 + 1e-9))
        })
    }
}

/// Extent of the `t`-grid used by [`YoungFn::delta_prime`].
pub const DELTA_PRIME_T_MIN: f64 = 1e-6;
pub const DELTA_PRIME_T_MAX: f64 = 1e6;
/// Extent of the `t`-grid used by [`YoungFn::dominated_by`].
pub const DOMINANCE_T_MIN: f64 = 1e-12;
pub const DOMINANCE_T_MAX: f64 = 1e12;

/// Candidate dominance constants `2^{j/16}` covering `[10^-4, 10^4]`.
pub fn dominance_constants() -> Vec<f64> {
    (-212..=212).map(|j| 2f64.powf(j as f64 / 16.0)).collect()
}

/// `dominates(θ1, θ2)`: the constant `C` with `θ1(t) ≤ θ2(C t)`, if one is found.
pub fn dominates(theta1: &YoungFn, theta2: &YoungFn) -> Option<f64> {
    theta1.dominated_by(theta2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Delta2Verdict {
    pub holds: bool,
    /// `sup θ(2x)/θ(x)` over `x ∈ [1, 10^6]`.
    pub witness: f64,
    /// Same supremum over `x ∈ [1, 10^12]`.
    pub extended_witness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaPrimeVerdict {
    pub holds: bool,
    /// `(k, S(k))` pairs.
    pub sups: Vec<(f64, f64)>,
    /// `max_k θ(k·T)/θ(T)` at the top of the grid, `T = 10^6`.
    pub ratio_at_top: f64,
}

/// Log-spaced abscissae for [`YoungFn::complementary`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateGrid {
    pub s_min: f64,
    pub s_max: f64,
    pub points: usize,
}

impl Default for ConjugateGrid {
    fn default() -> Self {
        Self { s_min: 1e-4, s_max: 1e4, points: 2049 }
    }
}

impl ConjugateGrid {
    pub fn nodes(&self) -> Vec<f64> {
        log_grid(self.s_min, self.s_max, self.points)
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

fn ratio_sup(theta: &YoungFn, xs: &[f64]) -> f64 {
    let mut sup = 0.0f64;
    for &x in xs {
        let (num, den) = (theta.eval(2.0 * x), theta.eval(x));
        let r = if den == 0.0 {
            if num == 0.0 {
                continue;
            }
            f64::INFINITY
        } else {
            num / den
        };
        if r.is_nan() {
            return f64::INFINITY;
        }
        sup = sup.max(r);
    }
    sup
}

/// Golden-section search for the maximiser of a unimodal `g` on `[a, b]`.
pub fn golden_max(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..300 {
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
    }
    let mid = 0.5 * (a + b);
    [a, mid, b].into_iter().fold(mid, |best, x| if g(x) > g(best) { x } else { best })
}

fn normalize_table(points: &mut Vec<[f64; 2]>) -> Result<(), YoungError> {
    let bad = |m: &str| Err(YoungError::InvalidParams(format!("table: {m}")));
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return bad("non-finite node");
    }
    match points.first() {
        None => return bad("no nodes"),
        Some([t, v]) if *t == 0.0 && *v != 0.0 => return bad("θ(0) must be 0"),
        Some([t, _]) if *t < 0.0 => return bad("nodes must have t ≥ 0"),
        Some([t, _]) if *t > 0.0 => points.insert(0, [0.0, 0.0]),
        _ => {}
    }
    if points.len() < 2 {
        return bad("need at least one node besides the origin");
    }
    for w in points.windows(2) {
        if w[1][0] <= w[0][0] {
            return bad("abscissae must be strictly increasing");
        }
        if w[1][1] < w[0][1] {
            return bad("values must be nondecreasing");
        }
    }
    let n = points.len();
    if points[n - 1][1] <= points[n - 2][1] {
        return bad("last segment must increase so that θ(t) → ∞");
    }
    Ok(())
}

fn table_is_convex(points: &[[f64; 2]]) -> bool {
    let slopes: Vec<f64> = points.windows(2).map(|w| (w[1][1] - w[0][1]) / (w[1][0] - w[0][0])).collect();
    slopes.windows(2).all(|s| s[1] >= s[0] * (1.0 - SLOPE_TOL) - SLOPE_TOL)
}

fn table_eval(points: &[[f64; 2]], t: f64) -> f64 {
    let n = points.len();
    let idx = points.partition_point(|p| p[0] <= t);
    let seg = if idx >= n { n - 2 } else { idx.saturating_sub(1).min(n - 2) };
    let [t0, v0] = points[seg];
    let [t1, v1] = points[seg + 1];
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

impl fmt::Display for YoungFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Power { p } => write!(f, "power({p})"),
            Family::ScaledPower { p, c } => write!(f, "scaled_power({p},{c})"),
            Family::Expm => write!(f, "expm"),
            Family::Log1p => write!(f, "log1p"),
            Family::Table { points } => write!(f, "table[{}]", points.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn families() -> Vec<YoungFn> {
        vec![
            YoungFn::power(1.0),
            YoungFn::power(2.0),
            YoungFn::power(3.0),
            YoungFn::scaled_power(2.0, 0.5),
            YoungFn::expm(),
            YoungFn::log1p(),
            YoungFn::table(vec![[1.0, 1.0], [2.0, 3.0], [4.0, 10.0]]).unwrap(),
        ]
    }

    #[test]
    fn eval_examples() {
        assert_eq!(YoungFn::power(2.0).eval(4.0), 16.0);
        assert!((YoungFn::expm().eval(2f64.ln()) - 1.0).abs() < 1e-15);
        for th in families() {
            assert_eq!(th.eval(0.0), 0.0, "{th}");
            for t in [0.3, 1.0, 7.5] {
                assert_eq!(th.eval(-t).to_bits(), th.eval(t).to_bits());
            }
        }
    }

    #[test]
    fn young_axioms_on_growing_grid() {
        for th in families() {
            let grid = log_grid(1e-3, 1e3, 200);
            for w in grid.windows(2) {
                assert!(th.eval(w[1]) >= th.eval(w[0]), "{th} not monotone");
            }
            assert!(th.eval(1e6) > 10.0 * th.eval(1.0).max(1e-3), "{th} does not grow");
        }
    }

    #[test]
    fn convex_flags() {
        let flags: Vec<bool> = families().iter().map(YoungFn::is_convex).collect();
        assert_eq!(flags, vec![true, true, true, true, true, false, true]);
        let concave = YoungFn::table(vec![[1.0, 2.0], [2.0, 3.0]]).unwrap();
        assert!(!concave.is_convex());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(YoungFn::power(2.0).inverse(4.0).unwrap(), 2.0);
        for th in families() {
            assert_eq!(th.inverse(0.0).unwrap(), 0.0);
        }
        let ln2 = YoungFn::expm().inverse(1.0).unwrap();
        assert!((ln2 - 2f64.ln()).abs() < 1e-12);
        assert!(YoungFn::log1p().inverse(1e4).is_err());
        assert!(YoungFn::power(2.0).inverse(-1.0).is_err());
    }

    #[test]
    fn conjugate_examples() {
        let grid = ConjugateGrid::default();
        let half_square = YoungFn::scaled_power(2.0, 0.5).complementary(&grid).unwrap();
        assert!((half_square.eval(1.0) - 0.5).abs() < 1e-4);
        assert_eq!(half_square.eval(0.0), 0.0);
        let cube = YoungFn::scaled_power(3.0, 1.0 / 3.0).complementary(&grid).unwrap();
        assert!((cube.eval(1.0) - 2.0 / 3.0).abs() < 1e-4);
        // grid-supremum oracle: brute force over a fine x grid
        for s in [0.1, 1.0, 3.0] {
            let brute = (0..=200_000)
                .map(|i| i as f64 * 1e-4)
                .map(|x| x * s - 0.5 * x * x)
                .fold(0.0, f64::max);
            let direct = YoungFn::scaled_power(2.0, 0.5).conjugate_at(s).unwrap();
            assert!((direct - brute).abs() < 1e-8, "s={s}");
            assert!((half_square.eval(s) - brute).abs() < 1e-4 * brute, "s={s}");
        }
        assert!(YoungFn::log1p().complementary(&grid).is_err());
        assert!(matches!(YoungFn::power(1.0).conjugate_at(2.0), Err(YoungError::ConjugateInfinite(_))));
        assert_eq!(YoungFn::power(1.0).conjugate_at(0.5).unwrap(), 0.0);
        assert!((YoungFn::power(2.0).conjugate_at(1.0).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn delta2_examples() {
        for p in [1.0, 2.0, 3.0] {
            let v = YoungFn::power(p).delta2();
            assert!(v.holds);
            assert!((v.witness - 2f64.powf(p)).abs() < 1e-6);
        }
        let e = YoungFn::expm();
        assert!(!e.delta2().holds);
        assert!(e.eval(80.0) / e.eval(40.0) > 1e15);
        let l = YoungFn::log1p().delta2();
        assert!(l.holds);
        assert!(l.witness <= 2.0);
    }

    #[test]
    fn delta_prime_examples() {
        for p in [1.0, 2.0, 3.0] {
            let v = YoungFn::power(p).delta_prime();
            assert!(v.holds);
            for (k, s) in &v.sups {
                assert!((s - k.powf(p)).abs() <= 1e-12 * k.powf(p).max(1e-300) + 1e-15);
            }
        }
        let e = YoungFn::expm().delta_prime();
        assert!(e.holds);
        for (k, s) in &e.sups {
            assert!((s / k - 1.0).abs() < 1e-3, "k={k} S={s}");
        }
        let l = YoungFn::log1p().delta_prime();
        assert!(!l.holds);
        // ratio increases toward 1 as t grows, for every k
        let r_small = YoungFn::log1p().eval(0.5 * 1e3) / YoungFn::log1p().eval(1e3);
        assert!(l.ratio_at_top > r_small);
    }

    #[test]
    fn dominance_examples() {
        let lin = YoungFn::power(1.0);
        let twice = YoungFn::scaled_power(1.0, 2.0);
        assert_eq!(dominates(&lin, &twice), Some(0.5));
        let quartic: Vec<[f64; 2]> =
            log_grid(1e-6, 1e4, 800).into_iter().map(|t| [t, t * t + t.powi(4)]).collect();
        let quartic = YoungFn::table(quartic).unwrap();
        assert_eq!(dominates(&YoungFn::power(2.0), &quartic), Some(1.0));
        assert_eq!(dominates(&lin, &YoungFn::power(2.0)), None);
        let step = 2f64.powf(1.0 / 16.0);
        for th in families() {
            let c = dominates(&th, &th).unwrap();
            assert!(c <= step, "{th}: {c}");
        }
    }

    #[test]
    fn biconjugate_recovers_power() {
        // The tabulated conjugate is extrapolated linearly, so its own conjugate is
        // finite only up to the last slope; the outer grid stays inside that.
        let inner = ConjugateGrid { s_min: 1e-4, s_max: 1e6, points: 4001 };
        let outer = ConjugateGrid { s_min: 1e-3, s_max: 500.0, points: 1201 };
        for p in [1.5, 2.0, 3.0] {
            let th = YoungFn::power(p);
            let back = th.complementary(&inner).unwrap().complementary(&outer).unwrap();
            for t in log_grid(1e-2, 1e2, 50) {
                let rel = (back.eval(t) - th.eval(t)).abs() / th.eval(t);
                assert!(rel < 0.02, "p={p} t={t} rel={rel}");
            }
        }
    }

    #[test]
    fn spec_round_trip_and_errors() {
        let th = YoungFn::from_json(r#"{"family":"power","params":{"p":2}}"#).unwrap();
        assert_eq!(th, YoungFn::power(2.0));
        assert_eq!(YoungFn::from_json(r#"{"family":"expm"}"#).unwrap(), YoungFn::expm());
        let text = serde_json::to_string(&YoungFn::scaled_power(2.0, 0.5)).unwrap();
        assert_eq!(YoungFn::from_json(&text).unwrap(), YoungFn::scaled_power(2.0, 0.5));
        for bad in [
            r#"{"family":"power","params":{"p":0.5}}"#,
            r#"{"family":"power"}"#,
            r#"{"family":"cosh"}"#,
            r#"{"family":"table","params":{"points":[[1,1],[0.5,2]]}}"#,
            r#"{"family":"table","params":{"points":[[0,1],[1,2]]}}"#,
            "{",
        ] {
            assert!(YoungFn::from_json(bad).is_err(), "{bad}");
        }
    }
}
