//! Built-in test functions and the exact metadata they carry.

use serde::{Deserialize, Serialize};

use super::interval::Interval;
use super::{EvalError, FuncError};

/// Named built-in functions. Parameters use the same names as the JSON
/// function-spec (`{"name": ..., "params": {...}}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "snake_case")]
pub enum Builtin {
    /// Characteristic function of a closed box.
    Indicator {
        #[serde(rename = "box")]
        region: Interval,
    },
    /// `‖x‖∞^p` (plain `|x|^p` in one dimension).
    Power { p: f64 },
    /// `coeffs · x + offset`.
    Linear {
        coeffs: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    Constant { c: f64 },
    /// Derivative of `F(x) = x² sin(1/x²)`, `F(0) = 0`. Finite everywhere except
    /// that the formula is undefined at 0, and not Lebesgue integrable near 0.
    OscDeriv,
    /// Sum of `value · χ_box` over non-overlapping boxes.
    PiecewiseConst { pieces: Vec<Piece> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    #[serde(rename = "box")]
    pub region: Interval,
    pub value: f64,
}

/// Primitive of [`Builtin::OscDeriv`].
pub fn osc_primitive(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x * (1.0 / (x * x)).sin()
    }
}

impl Builtin {
    pub fn indicator(region: Interval) -> Self {
        Builtin::Indicator { region }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Indicator { .. } => "indicator",
            Builtin::Power { .. } => "power",
            Builtin::Linear { .. } => "linear",
            Builtin::Constant { .. } => "constant",
            Builtin::OscDeriv => "osc_deriv",
            Builtin::PiecewiseConst { .. } => "piecewise_const",
        }
    }

    /// The dimension this builtin is tied to, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Builtin::Indicator { region } => Some(region.dim()),
            Builtin::Linear { coeffs, .. } => Some(coeffs.len()),
            Builtin::OscDeriv => Some(1),
            Builtin::PiecewiseConst { pieces } => pieces.first().map(|p| p.region.dim()),
            Builtin::Power { .. } | Builtin::Constant { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<(), FuncError> {
        let bad = |m: String| Err(FuncError::InvalidBuiltin(m));
        match self {
            Builtin::Power { p } if !(p.is_finite() && *p > 0.0) => bad(format!("power exponent must be positive, got {p}")),
            Builtin::Linear { coeffs, offset } if coeffs.is_empty() || !offset.is_finite() || coeffs.iter().any(|c| !c.is_finite()) => {
                bad("linear needs finite, non-empty coefficients".into())
            }
            Builtin::Constant { c } if !c.is_finite() => bad("constant must be finite".into()),
            Builtin::PiecewiseConst { pieces } => {
                let Some(first) = pieces.first() else {
                    return bad("piecewise_const needs at least one piece".into());
                };
                for (i, a) in pieces.iter().enumerate() {
                    if a.region.dim() != first.region.dim() || !a.value.is_finite() {
                        return bad(format!("piece {i} has a mismatched dimension or non-finite value"));
                    }
                    for b in &pieces[i + 1..] {
                        if a.region.overlaps_interior(&b.region) {
                            return bad(format!("piece {i} overlaps a later piece"));
                        }
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Points at which the builtin itself is undefined.
    pub fn singular_points(&self) -> Vec<Vec<f64>> {
        match self {
            Builtin::OscDeriv => vec![vec![0.0]],
            _ => Vec::new(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        if let Some(d) = self.dim() {
            if x.len() != d {
                return Err(EvalError::Dimension { expected: d, got: x.len() });
            }
        }
        Ok(match self {
            Builtin::Indicator { region } => {
                if region.contains(x) {
                    1.0
                } else {
                    0.0
                }
            }
            Builtin::Power { p } => x.iter().fold(0.0f64, |m, v| m.max(v.abs())).powf(*p),
            Builtin::Linear { coeffs, offset } => coeffs.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + offset,
            Builtin::Constant { c } => *c,
            Builtin::OscDeriv => {
                let t = x[0];
                if t == 0.0 {
                    return Err(EvalError::Singular { point: x.to_vec() });
                }
                let u = 1.0 / (t * t);
                let v = 2.0 * t * u.sin() - 2.0 / t * u.cos();
                if !v.is_finite() {
                    return Err(EvalError::NonFinite { op: "osc_deriv".into(), point: x.to_vec() });
                }
                v
            }
            Builtin::PiecewiseConst { pieces } => {
                pieces.iter().find(|p| p.region.contains(x)).map_or(0.0, |p| p.value)
            }
        })
    }

    /// Exact `∫_bx f` when a closed form is known.
    pub fn exact_integral(&self, bx: &Interval) -> Option<f64> {
        match self {
            Builtin::Indicator { region } => Some(region.overlap_volume(bx)),
            Builtin::Constant { c } => Some(c * bx.volume()),
            Builtin::Linear { coeffs, offset } => {
                let mid = bx.center();
                Some(bx.volume() * (coeffs.iter().zip(&mid).map(|(c, m)| c * m).sum::<f64>() + offset))
            }
            Builtin::PiecewiseConst { pieces } => {
                Some(pieces.iter().map(|p| p.value * p.region.overlap_volume(bx)).sum())
            }
            Builtin::Power { p } if bx.dim() == 1 => Some(abs_power_integral(bx.lower()[0], bx.upper()[0], 0.0, *p)),
            Builtin::OscDeriv => Some(osc_primitive(bx.upper()[0]) - osc_primitive(bx.lower()[0])),
            Builtin::Power { .. } => None,
        }
    }

    /// Exact distribution of `|f|`, when known.
    pub fn exact_distribution(&self) -> Option<ExactDistribution> {
        match self {
            Builtin::Indicator { region } => Some(ExactDistribution::Pieces {
                pieces: vec![Piece { region: region.clone(), value: 1.0 }],
                background: 0.0,
            }),
            Builtin::Constant { c } => Some(ExactDistribution::Pieces { pieces: Vec::new(), background: c.abs() }),
            Builtin::PiecewiseConst { pieces } => Some(ExactDistribution::Pieces {
                pieces: pieces.iter().map(|p| Piece { region: p.region.clone(), value: p.value.abs() }).collect(),
                background: 0.0,
            }),
            Builtin::Power { p } => Some(ExactDistribution::Radial { center: None, scale: 1.0, exponent: *p }),
            Builtin::Linear { coeffs, offset } if coeffs.len() == 1 => {
                let c = coeffs[0];
                if c == 0.0 {
                    Some(ExactDistribution::Pieces { pieces: Vec::new(), background: offset.abs() })
                } else {
                    Some(ExactDistribution::Radial { center: Some(vec![-offset / c]), scale: c.abs(), exponent: 1.0 })
                }
            }
            Builtin::Linear { .. } | Builtin::OscDeriv => None,
        }
    }
}

/// `∫_lo^hi |x - c|^a dx` for `a ≥ 0`.
pub(crate) fn abs_power_integral(lo: f64, hi: f64, c: f64, a: f64) -> f64 {
    // Antiderivative of |x - c|^a, odd about c.
    let prim = |x: f64| {
        let d = x - c;
        d.signum() * d.abs().powf(a + 1.0) / (a + 1.0)
    };
    prim(hi) - prim(lo)
}

/// Closed-form description of `t ↦ measure{x ∈ bx : |f(x)| > t}`.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactDistribution {
    /// `|f| = value` on each (non-overlapping) piece and `background` elsewhere.
    Pieces { pieces: Vec<Piece>, background: f64 },
    /// `|f(x)| = scale · ‖x - center‖∞^exponent`; `center = None` means the origin.
    Radial { center: Option<Vec<f64>>, scale: f64, exponent: f64 },
}

impl ExactDistribution {
    /// Distribution of `|c·f|`.
    pub fn scaled(&self, c: f64) -> ExactDistribution {
        let c = c.abs();
        match self {
            ExactDistribution::Pieces { pieces, background } => ExactDistribution::Pieces {
                pieces: pieces.iter().map(|p| Piece { region: p.region.clone(), value: p.value * c }).collect(),
                background: background * c,
            },
            ExactDistribution::Radial { center, scale, exponent } => {
                ExactDistribution::Radial { center: center.clone(), scale: scale * c, exponent: *exponent }
            }
        }
    }

    /// Distribution of `|f + g|` when both are piece-wise constant with zero
    /// background and every pair of pieces is either identical or interior-disjoint.
    pub fn sum(&self, other: &ExactDistribution, signs: (f64, f64)) -> Option<ExactDistribution> {
        let (
            ExactDistribution::Pieces { pieces: a, background: ba },
            ExactDistribution::Pieces { pieces: b, background: bb },
        ) = (self, other)
        else {
            return None;
        };
        if *ba != 0.0 || *bb != 0.0 {
            return None;
        }
        // Values here are |f|; signs of the original values are lost, so only
        // same-sign sums of nonnegative builtins are representable.
        if signs.0 < 0.0 || signs.1 < 0.0 {
            return None;
        }
        let mut out: Vec<Piece> = a.iter().map(|p| Piece { region: p.region.clone(), value: p.value * signs.0 }).collect();
        for q in b {
            if let Some(p) = out.iter_mut().find(|p| p.region == q.region) {
                p.value += q.value * signs.1;
                continue;
            }
            if out.iter().any(|p| p.region.overlaps_interior(&q.region)) {
                return None;
            }
            out.push(Piece { region: q.region.clone(), value: q.value * signs.1 });
        }
        Some(ExactDistribution::Pieces { pieces: out, background: 0.0 })
    }

    /// `measure{x ∈ bx : |f(x)| > t}`.
    pub fn dist(&self, bx: &Interval, t: f64) -> f64 {
        match self {
            ExactDistribution::Pieces { pieces, background } => {
                let mut covered = 0.0;
                let mut above = 0.0;
                for p in pieces {
                    let v = p.region.overlap_volume(bx);
                    covered += v;
                    if p.value > t {
                        above += v;
                    }
                }
                if *background > t {
                    above += (bx.volume() - covered).max(0.0);
                }
                above
            }
            ExactDistribution::Radial { center, scale, exponent } => {
                if *scale == 0.0 || t < 0.0 {
                    return if t < 0.0 { bx.volume() } else { 0.0 };
                }
                let radius = (t / scale).powf(1.0 / exponent);
                if !radius.is_finite() {
                    return 0.0;
                }
                let origin = vec![0.0; bx.dim()];
                let c = center.as_deref().unwrap_or(&origin);
                let below = match Interval::ball(c, radius) {
                    Ok(ball) => ball.overlap_volume(bx),
                    Err(_) => 0.0,
                };
                (bx.volume() - below).max(0.0)
            }
        }
    }

    /// Essential supremum of `|f|` over `bx`.
    pub fn ess_sup(&self, bx: &Interval) -> f64 {
        match self {
            ExactDistribution::Pieces { pieces, background } => {
                let mut covered = 0.0;
                let mut m = 0.0f64;
                for p in pieces {
                    let v = p.region.overlap_volume(bx);
                    covered += v;
                    if v > 0.0 {
                        m = m.max(p.value);
                    }
                }
                if bx.volume() - covered > 0.0 {
                    m = m.max(*background);
                }
                m
            }
            ExactDistribution::Radial { center, scale, exponent } => {
                let origin = vec![0.0; bx.dim()];
                let c = center.as_deref().unwrap_or(&origin);
                scale * bx.max_reach_from(c).powf(*exponent)
            }
        }
    }

    /// Levels at which the distribution jumps (values taken on sets of positive measure).
    pub fn jumps(&self, bx: &Interval) -> Vec<f64> {
        match self {
            ExactDistribution::Pieces { pieces, background } => {
                let mut covered = 0.0;
                let mut out = Vec::new();
                for p in pieces {
                    let v = p.region.overlap_volume(bx);
                    covered += v;
                    if v > 0.0 && p.value > 0.0 {
                        out.push(p.value);
                    }
                }
                if bx.volume() - covered > 0.0 && *background > 0.0 {
                    out.push(*background);
                }
                out.sort_by(f64::total_cmp);
                out.dedup();
                out
            }
            ExactDistribution::Radial { .. } => Vec::new(),
        }
    }

    /// `∫_bx |f|^q`, when a closed form is available.
    pub fn abs_power_integral(&self, bx: &Interval, q: f64) -> Option<f64> {
        match self {
            ExactDistribution::Pieces { pieces, background } => {
                let mut covered = 0.0;
                let mut total = 0.0;
                for p in pieces {
                    let v = p.region.overlap_volume(bx);
                    covered += v;
                    total += p.value.powf(q) * v;
                }
                Some(total + background.powf(q) * (bx.volume() - covered).max(0.0))
            }
            ExactDistribution::Radial { center, scale, exponent } if bx.dim() == 1 => {
                let c = center.as_ref().map_or(0.0, |c| c[0]);
                Some(scale.powf(q) * abs_power_integral(bx.lower()[0], bx.upper()[0], c, exponent * q))
            }
            ExactDistribution::Radial { .. } => None,
        }
    }
}
