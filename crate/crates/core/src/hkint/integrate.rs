use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::funcspec::{interval::cmp_points, EvalError, FuncExpr, Interval};
use crate::numeric::{neumaier, NeumaierSum};

use super::HkError;

/// Anything the adaptive integrator can sample.
pub trait Integrand: Sync {
    fn domain(&self) -> &Interval;
    /// Points the integrator must never sample; they get a pinned tag instead.
    fn singular_points(&self) -> &[Vec<f64>];
    fn value(&self, x: &[f64]) -> Result<f64, EvalError>;
}

impl Integrand for FuncExpr {
    fn domain(&self) -> &Interval {
        FuncExpr::domain(self)
    }

    fn singular_points(&self) -> &[Vec<f64>] {
        self.singular()
    }

    fn value(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.eval_inside(x)
    }
}

/// `x ↦ map(f(x))`, e.g. `θ(|f(x)|/α)` for modulars.
pub struct Composed<'a, M> {
    pub inner: &'a FuncExpr,
    pub map: M,
}

impl<M: Fn(f64) -> f64 + Sync> Integrand for Composed<'_, M> {
    fn domain(&self) -> &Interval {
        self.inner.domain()
    }

    fn singular_points(&self) -> &[Vec<f64>] {
        self.inner.singular()
    }

    fn value(&self, x: &[f64]) -> Result<f64, EvalError> {
        Ok((self.map)(self.inner.eval_inside(x)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    /// Cells in the final tagged partition.
    pub cells: usize,
    /// Refinement levels around singular points (0 if there are none).
    pub levels: u32,
}

#[derive(Debug, Clone, Copy)]
pub struct HkOptions {
    pub max_cells: usize,
    /// Bisections per axis before a cell is accepted regardless.
    pub max_depth: u32,
}

impl Default for HkOptions {
    fn default() -> Self {
        Self { max_cells: 1 << 22, max_depth: 60 }
    }
}

/// Adaptive gauge integral of `f` over `bx` to absolute tolerance `tol`.
pub fn hk_integrate<I: Integrand + ?Sized>(f: &I, bx: &Interval, tol: f64) -> Result<IntegralResult, HkError> {
    hk_integrate_with(f, bx, tol, &HkOptions::default())
}

struct Accepted {
    origin: Vec<f64>,
    value: f64,
    disagreement: f64,
    cells: usize,
}

struct Ctx<'a, I: ?Sized> {
    f: &'a I,
    /// Allowed local error per unit volume.
    density: f64,
    opts: HkOptions,
    /// Cells accepted so far, across threads.
    used: AtomicUsize,
}

/// The integrator works on a constant gauge refined cell by cell: a cell is
/// accepted when its midpoint sums on one and two further bisection levels
/// agree to within its share of `tol`. Cells containing a singular point are
/// tagged at that point (contributing zero) and shrunk level by level until two
/// successive levels change the total by at most `tol` each.
pub fn hk_integrate_with<I: Integrand + ?Sized>(
    f: &I,
    bx: &Interval,
    tol: f64,
    opts: &HkOptions,
) -> Result<IntegralResult, HkError> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(HkError::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if bx.dim() != f.domain().dim() || !f.domain().contains_box(bx) {
        return Err(HkError::InvalidInput(format!("box {bx} is not inside the domain {}", f.domain())));
    }
    let vol = bx.volume();
    if vol == 0.0 {
        return Ok(IntegralResult { value: 0.0, error_estimate: 0.0, cells: 1, levels: 0 });
    }
    let ctx = Ctx { f, density: tol / vol, opts: *opts, used: AtomicUsize::new(0) };
    let singular: Vec<&Vec<f64>> = f.singular_points().iter().filter(|s| bx.contains(s)).collect();

    if singular.is_empty() {
        let accepted = refine_region(&ctx, bx, 0)?;
        return Ok(finish(accepted, 0.0, 0, 0));
    }

    let mut accepted = Vec::new();
    let mut pinned = vec![(bx.clone(), 0u32)];
    let mut total = 0.0;
    let mut diffs: Vec<f64> = Vec::new();
    for level in 1..=opts.max_depth {
        let mut next = Vec::new();
        let mut shell = Vec::new();
        for (cell, depth) in &pinned {
            for child in cell.bisect_all() {
                if singular.iter().any(|s| child.contains(s)) {
                    next.push((child, depth + 1));
                } else {
                    shell.push((child, depth + 1));
                }
            }
        }
        let parts: Vec<Vec<Accepted>> =
            shell.par_iter().map(|(c, d)| refine_region(&ctx, c, *d)).collect::<Result<_, _>>()?;
        let mut layer: Vec<Accepted> = parts.into_iter().flatten().collect();
        layer.sort_by(|a, b| cmp_points(&a.origin, &b.origin));
        let d = neumaier(layer.iter().map(|a| a.value));
        accepted.extend(layer);
        let previous = total;
        total += d;
        diffs.push(d);
        pinned = next;
        let k = diffs.len();
        if k >= 2 && diffs[k - 1].abs() <= tol && diffs[k - 2].abs() <= tol {
            let tail = diffs[k - 1].abs() + diffs[k - 2].abs();
            return Ok(finish(accepted, tail, pinned.len(), level));
        }
        if level == opts.max_depth {
            return Err(HkError::NotConverged {
                cells: ctx.used.load(Ordering::Relaxed),
                last_sums: Some((previous, total)),
            });
        }
    }
    unreachable!("loop returns on its last level")
}

fn finish(mut accepted: Vec<Accepted>, tail: f64, pinned: usize, levels: u32) -> IntegralResult {
    accepted.sort_by(|a, b| cmp_points(&a.origin, &b.origin));
    IntegralResult {
        value: neumaier(accepted.iter().map(|a| a.value)),
        error_estimate: tail + neumaier(accepted.iter().map(|a| a.disagreement)),
        cells: pinned + accepted.iter().map(|a| a.cells).sum::<usize>(),
        levels,
    }
}

/// Uniform starting grid of about 64 cells, each refined adaptively in parallel.
fn refine_region<I: Integrand + ?Sized>(ctx: &Ctx<I>, region: &Interval, depth: u32) -> Result<Vec<Accepted>, HkError> {
    let n = region.dim() as u32;
    let k0 = 6u32.div_ceil(n).min(ctx.opts.max_depth.saturating_sub(depth + 2));
    let parts: Vec<Vec<Accepted>> = region
        .uniform_grid(k0)
        .par_iter()
        .map(|c| refine_cell(ctx, c, depth + k0))
        .collect::<Result<_, _>>()?;
    Ok(parts.into_iter().flatten().collect())
}

struct Work {
    lower: Vec<f64>,
    width: Vec<f64>,
    depth: u32,
    /// Midpoint values on the cell's own children, when the parent already has them.
    coarse: Option<Vec<f64>>,
}

fn refine_cell<I: Integrand + ?Sized>(ctx: &Ctx<I>, cell: &Interval, depth: u32) -> Result<Vec<Accepted>, HkError> {
    let n = cell.dim();
    let halves = 1usize << n;
    let quarters = 1usize << (2 * n);
    let mut out = Vec::new();
    let mut stack = vec![Work {
        lower: cell.lower().to_vec(),
        width: (0..n).map(|i| cell.width(i)).collect(),
        depth,
        coarse: None,
    }];
    while let Some(w) = stack.pop() {
        let coarse = match w.coarse {
            Some(v) => v,
            None => midpoint_values(ctx, &w.lower, &w.width, 2)?,
        };
        let fine = midpoint_values(ctx, &w.lower, &w.width, 4)?;
        let vol: f64 = w.width.iter().product();
        let s1 = neumaier(coarse.iter().copied()) * (vol / halves as f64);
        let s2 = neumaier(fine.iter().copied()) * (vol / quarters as f64);
        // midpoint error drops fourfold per bisection, so s2 is off by about gap/3
        let gap = (s1 - s2).abs();
        // Midpoints alone can all miss a jump near the cell edge; the trapezoid
        // nodes sit on those edges. Skipped when a node cannot be evaluated.
        let edge_gap = trapezoid(ctx, &w.lower, &w.width).map_or(0.0, |t| (t - s2).abs());
        let signal = gap.max(edge_gap);
        if signal / 3.0 <= ctx.density * vol || w.depth + 2 >= ctx.opts.max_depth {
            let used = ctx.used.fetch_add(quarters, Ordering::Relaxed) + quarters;
            if used > ctx.opts.max_cells {
                return Err(HkError::NotConverged { cells: used, last_sums: Some((s1, s2)) });
            }
            out.push(Accepted { origin: w.lower, value: s2, disagreement: (gap / 2.0).max(edge_gap), cells: quarters });
            continue;
        }
        let child_width: Vec<f64> = w.width.iter().map(|x| x / 2.0).collect();
        for c in (0..halves).rev() {
            let bits: Vec<usize> = (0..n).map(|axis| (c >> (n - 1 - axis)) & 1).collect();
            let lower = (0..n).map(|i| w.lower[i] + bits[i] as f64 * child_width[i]).collect();
            let values = (0..halves)
                .map(|e| {
                    let idx = (0..n).fold(0, |acc, axis| acc * 4 + 2 * bits[axis] + ((e >> (n - 1 - axis)) & 1));
                    fine[idx]
                })
                .collect();
            stack.push(Work { lower, width: child_width.clone(), depth: w.depth + 1, coarse: Some(values) });
        }
    }
    Ok(out)
}

/// Tensor trapezoid rule on the `5^n` corner nodes of the cell's `4^n`
/// grandchildren, with the outermost nodes pulled in by `2^-10` of the width.
/// The inset keeps a jump lying exactly on the cell boundary (where the
/// midpoint sums are already exact) from being flagged; the rule stays second order.
fn trapezoid<I: Integrand + ?Sized>(ctx: &Ctx<I>, lower: &[f64], width: &[f64]) -> Option<f64> {
    const WEIGHTS: [f64; 5] = [0.125, 0.25, 0.25, 0.25, 0.125];
    const INSET: f64 = 1.0 / 1024.0;
    const NODES: [f64; 5] = [INSET, 0.25, 0.5, 0.75, 1.0 - INSET];
    let n = lower.len();
    let vol: f64 = width.iter().product();
    let mut x = vec![0.0; n];
    let mut sum = NeumaierSum::default();
    for j in 0..5usize.pow(n as u32) {
        let (mut r, mut weight) = (j, vol);
        for axis in (0..n).rev() {
            let k = r % 5;
            x[axis] = lower[axis] + width[axis] * NODES[k];
            weight *= WEIGHTS[k];
            r /= 5;
        }
        if ctx.f.singular_points().iter().any(|s| s.as_slice() == x.as_slice()) {
            return None;
        }
        let v = ctx.f.value(&x).ok().filter(|v| v.is_finite())?;
        sum.add(weight * v);
    }
    Some(sum.value())
}

/// Values at the centers of an `m^n` grid over the cell, lexicographic, axis 0 slowest.
fn midpoint_values<I: Integrand + ?Sized>(
    ctx: &Ctx<I>,
    lower: &[f64],
    width: &[f64],
    m: usize,
) -> Result<Vec<f64>, HkError> {
    let n = lower.len();
    let count = m.pow(n as u32);
    let mut x = vec![0.0; n];
    let mut out = Vec::with_capacity(count);
    for j in 0..count {
        let mut r = j;
        for axis in (0..n).rev() {
            x[axis] = lower[axis] + width[axis] * ((r % m) as f64 + 0.5) / m as f64;
            r /= m;
        }
        let v = ctx.f.value(&x)?;
        if !v.is_finite() {
            return Err(EvalError::NonFinite { op: "integrand".into(), point: x }.into());
        }
        out.push(v);
    }
    Ok(out)
}

/// `sup_t |∫_lo^t f|` over a 1-D box, on dyadic grids refined until the
/// supremum moves by at most `tol`.
pub fn alexiewicz_norm<I: Integrand + ?Sized>(f: &I, bx: &Interval, tol: f64) -> Result<f64, HkError> {
    if bx.dim() != 1 {
        return Err(HkError::InvalidInput("the Alexiewicz norm is computed on intervals only".into()));
    }
    let (lo, hi) = (bx.lower()[0], bx.upper()[0]);
    let mut previous: Option<f64> = None;
    for k in 4..=10u32 {
        let m = 1usize << k;
        let piece_tol = tol / m as f64;
        let pieces: Vec<f64> = (0..m)
            .into_par_iter()
            .map(|j| {
                let a = lo + (hi - lo) * j as f64 / m as f64;
                let b = lo + (hi - lo) * (j + 1) as f64 / m as f64;
                hk_integrate(f, &Interval::segment(a, b).expect("dyadic sub-interval"), piece_tol).map(|r| r.value)
            })
            .collect::<Result<_, _>>()?;
        let mut running = 0.0f64;
        let mut sup = 0.0f64;
        for p in pieces {
            running += p;
            sup = sup.max(running.abs());
        }
        if let Some(prev) = previous {
            if (sup - prev).abs() <= tol {
                return Ok(sup);
            }
        }
        previous = Some(sup);
    }
    Ok(previous.unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspec::{builtin::osc_primitive, Builtin};

    fn seg(lo: f64, hi: f64) -> Interval {
        Interval::segment(lo, hi).unwrap()
    }

    #[test]
    fn smooth_and_step_integrals() {
        let unit = seg(0.0, 1.0);
        let x = FuncExpr::parse("x1", unit.clone()).unwrap();
        let r = hk_integrate(&x, &unit, 1e-9).unwrap();
        assert!((r.value - 0.5).abs() <= 1e-12);
        let sq = FuncExpr::parse("x1^2", unit.clone()).unwrap();
        let r = hk_integrate(&sq, &unit, 1e-8).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() <= r.error_estimate.max(1e-8));
        let square = Interval::cube(0.0, 1.0, 2).unwrap();
        let chi = FuncExpr::indicator(square.clone(), Interval::cube(0.0, 2.0, 2).unwrap()).unwrap();
        let r = hk_integrate(&chi, chi.domain(), 1e-6).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn oscillatory_derivative() {
        let unit = seg(0.0, 1.0);
        let osc = FuncExpr::from_builtin(Builtin::OscDeriv, unit.clone()).unwrap();
        let r = hk_integrate(&osc, &unit, 1e-3).unwrap();
        let exact = osc_primitive(1.0);
        assert!((exact - 1f64.sin()).abs() < 1e-15);
        assert!((r.value - exact).abs() <= 1e-3, "{r:?}");
        assert!(r.levels > 0);
    }

    #[test]
    fn undeclared_singularity_is_an_error() {
        let unit = seg(0.0, 1.0);
        let f = FuncExpr::parse("log(x1-0.5)", unit.clone()).unwrap();
        assert!(matches!(hk_integrate(&f, &unit, 1e-3), Err(HkError::Eval(_))));
    }

    #[test]
    fn box_outside_domain() {
        let f = FuncExpr::parse("x1", seg(0.0, 1.0)).unwrap();
        assert!(hk_integrate(&f, &seg(0.0, 2.0), 1e-3).is_err());
    }

    #[test]
    fn alexiewicz_examples() {
        let unit = seg(0.0, 1.0);
        let sine = FuncExpr::parse("sin(2*3.141592653589793*x1)", unit.clone()).unwrap();
        let a = alexiewicz_norm(&sine, &unit, 1e-6).unwrap();
        assert!((a - 1.0 / std::f64::consts::PI).abs() < 1e-5, "{a}");
        let x = FuncExpr::parse("x1", unit.clone()).unwrap();
        assert!((alexiewicz_norm(&x, &unit, 1e-6).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn deterministic_value() {
        let unit = seg(0.0, 1.0);
        let f = FuncExpr::parse("exp(x1)*sin(7*x1)", unit.clone()).unwrap();
        let a = hk_integrate(&f, &unit, 1e-7).unwrap();
        let b = hk_integrate(&f, &unit, 1e-7).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}
