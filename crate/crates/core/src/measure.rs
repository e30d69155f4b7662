//! Distribution functions `t ↦ measure{x ∈ box : |f(x)| > t}` and box volumes.

use rayon::prelude::*;
use thiserror::Error;

use crate::funcspec::{EvalError, ExactDistribution, FuncExpr, Interval};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("sampled distribution still moving by {gap} at level {level}")]
    NotConverged { level: u32, gap: f64 },
}

/// Volume of the closed max-norm ball of radius `r` in dimension `n`: a cube of side `2r`.
pub fn ball_volume(center: &[f64], r: f64, n: usize) -> Result<f64, MeasureError> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(MeasureError::InvalidInput(format!("radius must be positive, got {r}")));
    }
    if center.len() != n {
        return Err(MeasureError::InvalidInput(format!("center has {} coordinates, expected {n}", center.len())));
    }
    Ok((2.0 * r).powi(n as i32))
}

/// How a [`DistributionFn`] is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistMode {
    Exact,
    /// Midpoint samples on a `2^level`-per-axis grid.
    Estimated { level: u32 },
}

#[derive(Debug, Clone)]
enum Source {
    Exact(ExactDistribution),
    Sampled { sorted: Vec<f64>, cell_volume: f64, level: u32 },
}

/// Relative agreement between two sampling levels, per unit volume.
pub const ESTIMATE_TOL: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct DistributionFn {
    bx: Interval,
    source: Source,
    gap: f64,
}

fn max_level(dim: usize) -> u32 {
    match dim {
        1 => 12,
        2 => 10,
        _ => (20 / dim as u32).max(1),
    }
}

impl DistributionFn {
    /// Exact when `f` carries distribution metadata, sampled otherwise.
    pub fn new(f: &FuncExpr, bx: &Interval) -> Result<Self, MeasureError> {
        check_box(f, bx)?;
        match f.exact_distribution() {
            Some(d) => Ok(Self { bx: bx.clone(), source: Source::Exact(d), gap: 0.0 }),
            None => Self::estimated(f, bx),
        }
    }

    /// Sampled on successively finer midpoint grids until the empirical
    /// distributions of two consecutive levels agree within `10⁻³·volume`.
    pub fn estimated(f: &FuncExpr, bx: &Interval) -> Result<Self, MeasureError> {
        let d = Self::sampled_within_budget(f, bx)?;
        if d.gap > ESTIMATE_TOL * bx.volume() {
            let level = match d.source {
                Source::Sampled { level, .. } => level,
                Source::Exact(_) => 0,
            };
            return Err(MeasureError::NotConverged { level, gap: d.gap });
        }
        Ok(d)
    }

    /// Like [`DistributionFn::new`], but a sampled estimate that is still
    /// moving at the finest level is returned anyway; [`DistributionFn::gap`]
    /// tells by how much.
    pub fn within_budget(f: &FuncExpr, bx: &Interval) -> Result<Self, MeasureError> {
        check_box(f, bx)?;
        match f.exact_distribution() {
            Some(d) => Ok(Self { bx: bx.clone(), source: Source::Exact(d), gap: 0.0 }),
            None => Self::sampled_within_budget(f, bx),
        }
    }

    fn sampled_within_budget(f: &FuncExpr, bx: &Interval) -> Result<Self, MeasureError> {
        check_box(f, bx)?;
        let n = bx.dim();
        let top = max_level(n);
        let start = (6 / n as u32).clamp(1, top);
        let vol = bx.volume();
        let mut prev = sample(f, bx, start)?;
        let mut level = start;
        let mut gap = f64::INFINITY;
        while level < top {
            level += 1;
            let next = sample(f, bx, level)?;
            gap = sup_gap(&prev, &next) * vol;
            prev = next;
            if gap <= ESTIMATE_TOL * vol {
                break;
            }
        }
        let cell_volume = vol / prev.len() as f64;
        Ok(Self { bx: bx.clone(), source: Source::Sampled { sorted: prev, cell_volume, level }, gap })
    }

    /// Largest change between the last two sampling levels (0 in exact mode).
    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn mode(&self) -> DistMode {
        match &self.source {
            Source::Exact(_) => DistMode::Exact,
            Source::Sampled { level, .. } => DistMode::Estimated { level: *level },
        }
    }

    pub fn domain(&self) -> &Interval {
        &self.bx
    }

    /// `measure{|f| > t}`.
    pub fn at(&self, t: f64) -> f64 {
        match &self.source {
            Source::Exact(d) => d.dist(&self.bx, t).clamp(0.0, self.bx.volume()),
            Source::Sampled { sorted, cell_volume, .. } => {
                let above = sorted.len() - sorted.partition_point(|v| *v <= t);
                above as f64 * cell_volume
            }
        }
    }

    /// Essential supremum of `|f|` (the largest sample in estimated mode).
    pub fn ess_sup(&self) -> f64 {
        match &self.source {
            Source::Exact(d) => d.ess_sup(&self.bx),
            Source::Sampled { sorted, .. } => sorted.last().copied().unwrap_or(0.0),
        }
    }

    /// Positive levels where the distribution drops. In estimated mode every
    /// distinct sample value is one.
    pub fn jumps(&self) -> Vec<f64> {
        match &self.source {
            Source::Exact(d) => d.jumps(&self.bx),
            Source::Sampled { sorted, .. } => {
                let mut out: Vec<f64> = sorted.iter().copied().filter(|v| *v > 0.0).collect();
                out.dedup();
                out
            }
        }
    }

    /// Distribution of `|c·f|`.
    pub fn scaled(&self, c: f64) -> Self {
        let c = c.abs();
        let source = match &self.source {
            Source::Exact(d) => Source::Exact(d.scaled(c)),
            Source::Sampled { sorted, cell_volume, level } => Source::Sampled {
                sorted: sorted.iter().map(|v| v * c).collect(),
                cell_volume: *cell_volume,
                level: *level,
            },
        };
        Self { bx: self.bx.clone(), source, gap: self.gap }
    }
}

/// `measure{x ∈ bx : |f(x)| > t}`.
pub fn dist(f: &FuncExpr, bx: &Interval, t: f64) -> Result<f64, MeasureError> {
    if !(t >= 0.0) {
        return Err(MeasureError::InvalidInput(format!("level must be nonnegative, got {t}")));
    }
    Ok(DistributionFn::new(f, bx)?.at(t))
}

fn check_box(f: &FuncExpr, bx: &Interval) -> Result<(), MeasureError> {
    if bx.dim() != f.dim() || !f.domain().contains_box(bx) {
        return Err(MeasureError::InvalidInput(format!("box {bx} is not inside the domain {}", f.domain())));
    }
    Ok(())
}

/// Sorted `|f|` at the cell midpoints of a uniform grid. A midpoint that lands
/// on a declared singular point counts as 0.
fn sample(f: &FuncExpr, bx: &Interval, level: u32) -> Result<Vec<f64>, MeasureError> {
    let n = bx.dim();
    let per_axis = 1usize << level;
    let total = per_axis.pow(n as u32);
    let lower = bx.lower();
    let widths: Vec<f64> = (0..n).map(|i| bx.width(i) / per_axis as f64).collect();
    let mut values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|j| {
            let mut x = vec![0.0; n];
            let mut r = j;
            for axis in (0..n).rev() {
                x[axis] = lower[axis] + widths[axis] * ((r % per_axis) as f64 + 0.5);
                r /= per_axis;
            }
            if f.is_singular(&x) {
                return Ok(0.0);
            }
            f.eval_inside(&x).map(f64::abs)
        })
        .collect::<Result<_, _>>()?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// `sup_t |F_a(t) − F_b(t)|` for the empirical survival functions of two sorted samples.
fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut gap = 0.0f64;
    while i < a.len() || j < b.len() {
        let t = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => x.min(*y),
            (Some(x), None) => *x,
            (None, Some(y)) => *y,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        gap = gap.max((i as f64 / na - j as f64 / nb).abs());
    }
    gap
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspec::Builtin;

    fn seg(lo: f64, hi: f64) -> Interval {
        Interval::segment(lo, hi).unwrap()
    }

    #[test]
    fn ball_volumes() {
        assert_eq!(ball_volume(&[0.0], 0.5, 1).unwrap(), 1.0);
        assert_eq!(ball_volume(&[0.0, 0.0], 0.5, 2).unwrap(), 1.0);
        assert_eq!(ball_volume(&[0.0; 3], 1.0, 3).unwrap(), 8.0);
        assert!(ball_volume(&[0.0], 0.0, 1).is_err());
    }

    #[test]
    fn indicator_distribution() {
        let dom = seg(0.0, 2.0);
        let chi = FuncExpr::indicator(seg(0.0, 1.0), dom.clone()).unwrap();
        assert_eq!(dist(&chi, &dom, 0.5).unwrap(), 1.0);
        assert_eq!(dist(&chi, &dom, 1.5).unwrap(), 0.0);
        assert_eq!(DistributionFn::new(&chi, &dom).unwrap().mode(), DistMode::Exact);
    }

    #[test]
    fn identity_exact_and_sampled() {
        let unit = seg(0.0, 1.0);
        let x = FuncExpr::from_builtin(Builtin::Linear { coeffs: vec![1.0], offset: 0.0 }, unit.clone()).unwrap();
        assert!((dist(&x, &unit, 0.3).unwrap() - 0.7).abs() < 1e-15);
        let parsed = FuncExpr::parse("x1", unit.clone()).unwrap();
        let d = DistributionFn::new(&parsed, &unit).unwrap();
        assert!(matches!(d.mode(), DistMode::Estimated { .. }));
        assert!((d.at(0.3) - 0.7).abs() <= 1e-3);
    }

    #[test]
    fn sampled_scaling_is_consistent() {
        let unit = seg(0.0, 1.0);
        let f = FuncExpr::parse("sin(5*x1)", unit.clone()).unwrap();
        let d = DistributionFn::new(&f, &unit).unwrap();
        let half = DistributionFn::new(&f.scale(0.5), &unit).unwrap();
        for t in [0.05, 0.2, 0.4] {
            assert!((half.at(t) - d.at(2.0 * t)).abs() <= 2e-3);
            assert!((d.scaled(0.5).at(t) - d.at(2.0 * t)).abs() <= 1e-15);
        }
    }

    #[test]
    fn empirical_gap() {
        assert_eq!(sup_gap(&[0.0, 1.0], &[0.0, 1.0]), 0.0);
        assert_eq!(sup_gap(&[0.0, 1.0], &[1.0, 1.0]), 0.5);
    }
}
