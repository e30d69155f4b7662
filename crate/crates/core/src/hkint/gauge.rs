use crate::funcspec::Interval;

use super::HkError;

/// A strictly positive locality radius `δ(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Gauge {
    Constant(f64),
    /// `δ(x) = max(scale · ‖x − center‖∞, floor)`.
    Radial { center: Vec<f64>, scale: f64, floor: f64 },
    /// Piecewise-constant on a dyadic grid of `2^level` cells per axis over `grid`.
    /// `values` are in lexicographic cell order (axis 0 slowest).
    Tabulated { grid: Interval, level: u32, values: Vec<f64> },
}

impl Gauge {
    pub fn constant(delta: f64) -> Result<Self, HkError> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(HkError::InvalidInput(format!("constant gauge must be positive, got {delta}")));
        }
        Ok(Gauge::Constant(delta))
    }

    pub fn radial(center: Vec<f64>, scale: f64, floor: f64) -> Result<Self, HkError> {
        if !(floor > 0.0) || !(scale >= 0.0) || !scale.is_finite() || center.iter().any(|c| !c.is_finite()) {
            return Err(HkError::InvalidInput(format!(
                "radial gauge needs floor > 0 and scale ≥ 0, got floor={floor}, scale={scale}"
            )));
        }
        Ok(Gauge::Radial { center, scale, floor })
    }

    pub fn tabulated(grid: Interval, level: u32, values: Vec<f64>) -> Result<Self, HkError> {
        let expected = 1usize
            .checked_shl(level * grid.dim() as u32)
            .ok_or_else(|| HkError::InvalidInput("tabulated gauge grid too fine".into()))?;
        if values.len() != expected {
            return Err(HkError::InvalidInput(format!(
                "tabulated gauge needs {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(HkError::InvalidInput(format!("tabulated gauge has non-positive node {bad}")));
        }
        Ok(Gauge::Tabulated { grid, level, values })
    }

    /// `δ(x)`.
    pub fn at(&self, x: &[f64]) -> f64 {
        match self {
            Gauge::Constant(d) => *d,
            Gauge::Radial { center, scale, floor } => {
                let dist = x.iter().zip(center).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                (scale * dist).max(*floor)
            }
            Gauge::Tabulated { grid, level, values } => {
                let per_axis = 1usize << level;
                let mut idx = 0usize;
                for (axis, xi) in x.iter().enumerate() {
                    let w = grid.width(axis);
                    let rel = if w > 0.0 { (xi - grid.lower()[axis]) / w } else { 0.0 };
                    let cell = ((rel * per_axis as f64).floor().max(0.0) as usize).min(per_axis - 1);
                    idx = idx * per_axis + cell;
                }
                values[idx]
            }
        }
    }

    /// True if the closed cell lies in the closed max-norm ball `B[tag, δ(tag)]`.
    pub fn admits(&self, cell: &Interval, tag: &[f64]) -> bool {
        cell.max_reach_from(tag) <= self.at(tag)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positivity_is_enforced() {
        assert!(Gauge::constant(0.0).is_err());
        assert!(Gauge::radial(vec![0.0], 0.5, 0.0).is_err());
        let g = Interval::segment(0.0, 1.0).unwrap();
        assert!(Gauge::tabulated(g.clone(), 1, vec![0.1, -0.1]).is_err());
        assert!(Gauge::tabulated(g, 1, vec![0.1]).is_err());
    }

    #[test]
    fn tabulated_lookup() {
        let grid = Interval::cube(0.0, 1.0, 2).unwrap();
        let g = Gauge::tabulated(grid, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(g.at(&[0.1, 0.1]), 1.0);
        assert_eq!(g.at(&[0.1, 0.9]), 2.0);
        assert_eq!(g.at(&[0.9, 0.1]), 3.0);
        assert_eq!(g.at(&[1.0, 1.0]), 4.0);
    }

    #[test]
    fn radial_floor() {
        let g = Gauge::radial(vec![0.0], 0.5, 1e-6).unwrap();
        assert_eq!(g.at(&[0.0]), 1e-6);
        assert_eq!(g.at(&[0.5]), 0.25);
    }
}
