//! Compact axis-parallel boxes `[z, w] = ∏ [z_i, w_i]` in R^n.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::FuncError;

/// A compact n-dimensional interval. Degenerate sides (`lo == hi`) are allowed
/// and give volume zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct Interval {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Interval {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, FuncError> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(FuncError::InvalidBox(format!(
                "dimension mismatch: {} lower vs {} upper endpoints",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(FuncError::InvalidBox(format!("axis {i} has a non-finite endpoint")));
            }
            if lo > hi {
                return Err(FuncError::InvalidBox(format!("axis {i}: lower {lo} > upper {hi}")));
            }
        }
        Ok(Self { lower, upper })
    }

    /// Build from per-axis `(lo, hi)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self, FuncError> {
        let (lower, upper) = pairs.iter().copied().unzip();
        Self::new(lower, upper)
    }

    /// The one-dimensional interval `[lo, hi]`.
    pub fn segment(lo: f64, hi: f64) -> Result<Self, FuncError> {
        Self::new(vec![lo], vec![hi])
    }

    /// `[lo, hi]^n`.
    pub fn cube(lo: f64, hi: f64, dim: usize) -> Result<Self, FuncError> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    /// The closed max-norm ball `B[center, radius]`, which is a cube of side `2·radius`.
    pub fn ball(center: &[f64], radius: f64) -> Result<Self, FuncError> {
        if !(radius >= 0.0) {
            return Err(FuncError::InvalidBox(format!("negative radius {radius}")));
        }
        Self::new(
            center.iter().map(|c| c - radius).collect(),
            center.iter().map(|c| c + radius).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i)).product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| 0.5 * (l + u)).collect()
    }

    /// Closed membership test.
    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (l, u))| *l <= *x && *x <= *u)
    }

    /// `other ⊆ self`.
    pub fn contains_box(&self, other: &Interval) -> bool {
        other.dim() == self.dim()
            && (0..self.dim()).all(|i| self.lower[i] <= other.lower[i] && other.upper[i] <= self.upper[i])
    }

    /// Intersection, or `None` when the boxes are disjoint.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        if other.dim() != self.dim() {
            return None;
        }
        let mut lower = Vec::with_capacity(self.dim());
        let mut upper = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let lo = self.lower[i].max(other.lower[i]);
            let hi = self.upper[i].min(other.upper[i]);
            if lo > hi {
                return None;
            }
            lower.push(lo);
            upper.push(hi);
        }
        Some(Interval { lower, upper })
    }

    /// Volume of the intersection with `other` (zero when disjoint).
    pub fn overlap_volume(&self, other: &Interval) -> f64 {
        self.intersect(other).map_or(0.0, |b| b.volume())
    }

    /// True when the open interiors meet, i.e. the intersection has positive volume.
    pub fn overlaps_interior(&self, other: &Interval) -> bool {
        other.dim() == self.dim()
            && (0..self.dim()).all(|i| self.lower[i].max(other.lower[i]) < self.upper[i].min(other.upper[i]))
    }

    /// Max-norm distance from `point` to the farthest point of the box.
    pub fn max_reach_from(&self, point: &[f64]) -> f64 {
        (0..self.dim())
            .map(|i| (point[i] - self.lower[i]).abs().max((self.upper[i] - point[i]).abs()))
            .fold(0.0, f64::max)
    }

    /// Max-norm distance from `point` to the nearest point of the box (zero inside).
    pub fn distance_to(&self, point: &[f64]) -> f64 {
        (0..self.dim())
            .map(|i| (self.lower[i] - point[i]).max(point[i] - self.upper[i]).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Split every axis at its midpoint, giving `2^n` children in lexicographic
    /// order (axis 0 varies slowest).
    pub fn bisect_all(&self) -> Vec<Interval> {
        let n = self.dim();
        let mid = self.center();
        (0..1usize << n)
            .map(|mask| {
                let mut lower = self.lower.clone();
                let mut upper = self.upper.clone();
                for axis in 0..n {
                    if mask >> (n - 1 - axis) & 1 == 1 {
                        lower[axis] = mid[axis];
                    } else {
                        upper[axis] = mid[axis];
                    }
                }
                Interval { lower, upper }
            })
            .collect()
    }

    /// Split along one axis at its midpoint.
    pub fn bisect_axis(&self, axis: usize) -> (Interval, Interval) {
        let mid = 0.5 * (self.lower[axis] + self.upper[axis]);
        let mut left = self.clone();
        let mut right = self.clone();
        left.upper[axis] = mid;
        right.lower[axis] = mid;
        (left, right)
    }

    /// Index of the widest axis (first one on ties).
    pub fn longest_axis(&self) -> usize {
        (0..self.dim()).fold(0, |best, i| if self.width(i) > self.width(best) { i } else { best })
    }

    /// Uniform grid with `2^level` cells per axis, lexicographic order.
    pub fn uniform_grid(&self, level: u32) -> Vec<Interval> {
        let mut cells = vec![self.clone()];
        for _ in 0..level {
            cells = cells.iter().flat_map(Interval::bisect_all).collect();
        }
        cells.sort_by(|a, b| cmp_points(&a.lower, &b.lower));
        cells
    }

    /// All `2^n` corner points.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|axis| if mask >> axis & 1 == 1 { self.upper[axis] } else { self.lower[axis] })
                    .collect()
            })
            .collect()
    }

    /// Parse the CLI form `"lo,hi;lo,hi"`.
    pub fn parse_cli(text: &str) -> Result<Self, FuncError> {
        let mut pairs = Vec::new();
        for part in text.split(';') {
            let nums: Vec<&str> = part.split(',').map(str::trim).collect();
            if nums.len() != 2 {
                return Err(FuncError::InvalidBox(format!("expected `lo,hi` in {part:?}")));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| FuncError::InvalidBox(format!("not a number: {s:?}")))
            };
            pairs.push((parse(nums[0])?, parse(nums[1])?));
        }
        Self::from_pairs(&pairs)
    }
}

/// Lexicographic comparison of points; NaN-free inputs assumed.
pub fn cmp_points(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

impl TryFrom<Vec<[f64; 2]>> for Interval {
    type Error = FuncError;

    fn try_from(pairs: Vec<[f64; 2]>) -> Result<Self, Self::Error> {
        let (lower, upper) = pairs.into_iter().map(|[l, u]| (l, u)).unzip();
        Interval::new(lower, upper)
    }
}

impl From<Interval> for Vec<[f64; 2]> {
    fn from(b: Interval) -> Self {
        b.lower.into_iter().zip(b.upper).map(|(l, u)| [l, u]).collect()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim() {
            if i > 0 {
                write!(f, "x")?;
            }
            write!(f, "[{}, {}]", self.lower[i], self.upper[i])?;
        }
        Ok(())
    }
}
