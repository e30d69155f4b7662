//! Test functions: parsed expressions and built-ins over a compact box, with
//! whatever exact metadata (integrals, distributions, L^p norms) is known.

pub mod builtin;
pub mod expr;
pub mod interval;
pub mod parse;
pub mod spec_file;

use thiserror::Error;

pub use builtin::{Builtin, ExactDistribution, Piece};
pub use expr::{BinOp, Expr, Func};
pub use interval::Interval;
pub use parse::{parse_expr, ParseError, ParseErrorKind};
pub use spec_file::FunctionSpec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("point {point:?} lies outside the domain {domain}")]
    OutsideDomain { point: Vec<f64>, domain: String },
    #[error("evaluation at singular point {point:?}")]
    Singular { point: Vec<f64> },
    #[error("non-finite intermediate in `{op}` at {point:?}")]
    NonFinite { op: String, point: Vec<f64> },
    #[error("point has {got} coordinates, expected {expected}")]
    Dimension { expected: usize, got: usize },
}

#[derive(Debug, Error)]
pub enum FuncError {
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("invalid builtin: {0}")]
    InvalidBuiltin(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("malformed function spec: {0}")]
    Spec(String),
}

/// A real-valued function on a box, immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct FuncExpr {
    body: Expr,
    domain: Interval,
    singular: Vec<Vec<f64>>,
    declared_integral: Option<f64>,
    label: String,
}

impl FuncExpr {
    pub fn new(body: Expr, domain: Interval) -> Result<Self, FuncError> {
        let n = domain.dim();
        if body.arity() > n {
            return Err(FuncError::Dimension(format!(
                "expression uses {} variables but the domain has dimension {n}",
                body.arity()
            )));
        }
        let mut singular = Vec::new();
        check_builtins(&body, n, &mut singular)?;
        singular.retain(|p: &Vec<f64>| domain.contains(p));
        let label = body.to_string();
        Ok(Self { body, domain, singular, declared_integral: None, label })
    }

    /// Parse `text` over `domain`, using the domain's dimension for variable checks.
    pub fn parse(text: &str, domain: Interval) -> Result<Self, FuncError> {
        let body = parse_expr(text, domain.dim())?;
        Self::new(body, domain)
    }

    pub fn from_builtin(b: Builtin, domain: Interval) -> Result<Self, FuncError> {
        let label = match &b {
            Builtin::Indicator { region } => format!("indicator{region}"),
            Builtin::Power { p } => format!("|x|^{p}"),
            Builtin::Constant { c } => format!("{c}"),
            other => other.name().to_string(),
        };
        Ok(Self::new(Expr::builtin(b), domain)?.with_label(label))
    }

    pub fn indicator(region: Interval, domain: Interval) -> Result<Self, FuncError> {
        Self::from_builtin(Builtin::indicator(region), domain)
    }

    pub fn constant(c: f64, domain: Interval) -> Result<Self, FuncError> {
        Self::from_builtin(Builtin::Constant { c }, domain)
    }

    /// Declare additional singular points (points outside the domain are dropped).
    pub fn with_singular(mut self, points: Vec<Vec<f64>>) -> Result<Self, FuncError> {
        for p in points {
            if p.len() != self.dim() {
                return Err(FuncError::Dimension(format!("singular point {p:?} has wrong dimension")));
            }
            if self.domain.contains(&p) && !self.singular.contains(&p) {
                self.singular.push(p);
            }
        }
        Ok(self)
    }

    /// Attach a known exact integral over the whole domain.
    pub fn with_exact_integral(mut self, value: f64) -> Self {
        self.declared_integral = Some(value);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Same body on a different box of the same dimension.
    pub fn with_domain(&self, domain: Interval) -> Result<Self, FuncError> {
        if domain.dim() != self.dim() {
            return Err(FuncError::Dimension(format!("cannot move a {}-d function to {domain}", self.dim())));
        }
        let mut out = Self::new(self.body.clone(), domain)?;
        out = out.with_singular(self.singular.clone())?;
        out.label = self.label.clone();
        Ok(out)
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }

    pub fn domain(&self) -> &Interval {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn singular(&self) -> &[Vec<f64>] {
        &self.singular
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_singular(&self, point: &[f64]) -> bool {
        self.singular.iter().any(|s| s.as_slice() == point)
    }

    /// Checked evaluation: the point must lie in the domain and off the singular set.
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        if point.len() != self.dim() {
            return Err(EvalError::Dimension { expected: self.dim(), got: point.len() });
        }
        if !self.domain.contains(point) {
            return Err(EvalError::OutsideDomain { point: point.to_vec(), domain: self.domain.to_string() });
        }
        if self.is_singular(point) {
            return Err(EvalError::Singular { point: point.to_vec() });
        }
        self.body.eval(point)
    }

    /// Evaluation without the domain test, for callers that already know the
    /// point is inside (integration and sampling on sub-boxes).
    pub fn eval_inside(&self, point: &[f64]) -> Result<f64, EvalError> {
        if self.is_singular(point) {
            return Err(EvalError::Singular { point: point.to_vec() });
        }
        self.body.eval(point)
    }

    /// Exact `∫_bx f`, if known.
    pub fn exact_integral(&self, bx: &Interval) -> Option<f64> {
        if bx == &self.domain {
            if let Some(v) = self.declared_integral {
                return Some(v);
            }
        }
        integral_of(&self.body, bx)
    }

    /// Exact distribution of `|f|`, if known.
    pub fn exact_distribution(&self) -> Option<ExactDistribution> {
        distribution_of(&self.body)
    }

    /// Exact `(∫_bx |f|^p)^{1/p}`, if known.
    pub fn exact_lp_norm(&self, bx: &Interval, p: f64) -> Option<f64> {
        self.exact_distribution()?.abs_power_integral(bx, p).map(|v| v.powf(1.0 / p))
    }

    fn combine(&self, other: &FuncExpr, op: BinOp, sym: &str) -> Result<FuncExpr, FuncError> {
        if other.dim() != self.dim() {
            return Err(FuncError::Dimension("operands live in different dimensions".into()));
        }
        let domain = self
            .domain
            .intersect(&other.domain)
            .ok_or_else(|| FuncError::Dimension("operand domains are disjoint".into()))?;
        let body = Expr::binary(op, self.body.clone(), other.body.clone());
        let mut singular = self.singular.clone();
        singular.extend(other.singular.iter().cloned());
        let label = format!("({}){sym}({})", self.label, other.label);
        Ok(FuncExpr::new(body, domain)?.with_singular(singular)?.with_label(label))
    }

    pub fn add(&self, other: &FuncExpr) -> Result<FuncExpr, FuncError> {
        self.combine(other, BinOp::Add, "+")
    }

    pub fn sub(&self, other: &FuncExpr) -> Result<FuncExpr, FuncError> {
        self.combine(other, BinOp::Sub, "-")
    }

    pub fn mul(&self, other: &FuncExpr) -> Result<FuncExpr, FuncError> {
        self.combine(other, BinOp::Mul, "*")
    }

    /// `c · f`, keeping any exact metadata.
    pub fn scale(&self, c: f64) -> FuncExpr {
        FuncExpr {
            body: Expr::binary(BinOp::Mul, Expr::Const(c), self.body.clone()),
            domain: self.domain.clone(),
            singular: self.singular.clone(),
            declared_integral: self.declared_integral.map(|v| c * v),
            label: format!("{c}*({})", self.label),
        }
    }

    /// `|f|`.
    pub fn abs(&self) -> FuncExpr {
        FuncExpr {
            body: Expr::Call(Func::Abs, vec![self.body.clone()]),
            domain: self.domain.clone(),
            singular: self.singular.clone(),
            declared_integral: None,
            label: format!("|{}|", self.label),
        }
    }
}

fn check_builtins(e: &Expr, n: usize, singular: &mut Vec<Vec<f64>>) -> Result<(), FuncError> {
    match e {
        Expr::Builtin(b) => {
            b.validate()?;
            if let Some(d) = b.dim() {
                if d != n {
                    return Err(FuncError::Dimension(format!(
                        "builtin `{}` is {d}-dimensional but the domain is {n}-dimensional",
                        b.name()
                    )));
                }
            }
            singular.extend(b.singular_points());
            Ok(())
        }
        Expr::Const(_) | Expr::Var(_) => Ok(()),
        Expr::Neg(a) => check_builtins(a, n, singular),
        Expr::Binary(_, a, b) => {
            check_builtins(a, n, singular)?;
            check_builtins(b, n, singular)
        }
        Expr::Call(_, args) => args.iter().try_for_each(|a| check_builtins(a, n, singular)),
    }
}

fn integral_of(e: &Expr, bx: &Interval) -> Option<f64> {
    match e {
        Expr::Builtin(b) => b.exact_integral(bx),
        Expr::Const(c) => Some(c * bx.volume()),
        Expr::Neg(a) => integral_of(a, bx).map(|v| -v),
        Expr::Binary(BinOp::Add, a, b) => Some(integral_of(a, bx)? + integral_of(b, bx)?),
        Expr::Binary(BinOp::Sub, a, b) => Some(integral_of(a, bx)? - integral_of(b, bx)?),
        Expr::Binary(BinOp::Mul, a, b) => match (a.as_ref(), b.as_ref()) {
            (Expr::Const(c), x) | (x, Expr::Const(c)) => integral_of(x, bx).map(|v| c * v),
            _ => None,
        },
        Expr::Binary(BinOp::Div, a, b) => match b.as_ref() {
            Expr::Const(c) if *c != 0.0 => integral_of(a, bx).map(|v| v / c),
            _ => None,
        },
        _ => None,
    }
}

fn distribution_of(e: &Expr) -> Option<ExactDistribution> {
    match e {
        Expr::Builtin(b) => b.exact_distribution(),
        Expr::Const(c) => Some(ExactDistribution::Pieces { pieces: Vec::new(), background: c.abs() }),
        Expr::Neg(a) => distribution_of(a),
        Expr::Call(Func::Abs, args) => distribution_of(&args[0]),
        Expr::Binary(BinOp::Mul, a, b) => match (a.as_ref(), b.as_ref()) {
            (Expr::Const(c), x) | (x, Expr::Const(c)) => distribution_of(x).map(|d| d.scaled(*c)),
            _ => None,
        },
        Expr::Binary(BinOp::Div, a, b) => match b.as_ref() {
            Expr::Const(c) if *c != 0.0 => distribution_of(a).map(|d| d.scaled(1.0 / c)),
            _ => None,
        },
        Expr::Binary(BinOp::Add, a, b) => {
            let (sa, da) = signed_piece_source(a)?;
            let (sb, db) = signed_piece_source(b)?;
            da.sum(&db, (sa, sb))
        }
        _ => None,
    }
}

/// For sums: a nonnegative builtin times a constant, as (constant, distribution).
fn signed_piece_source(e: &Expr) -> Option<(f64, ExactDistribution)> {
    let nonneg = |b: &Builtin| match b {
        Builtin::Indicator { .. } => true,
        Builtin::PiecewiseConst { pieces } => pieces.iter().all(|p| p.value >= 0.0),
        _ => false,
    };
    match e {
        Expr::Builtin(b) if nonneg(b) => Some((1.0, b.exact_distribution()?)),
        Expr::Binary(BinOp::Mul, a, b) => match (a.as_ref(), b.as_ref()) {
            (Expr::Const(c), Expr::Builtin(x)) | (Expr::Builtin(x), Expr::Const(c)) if nonneg(x) => {
                Some((*c, x.exact_distribution()?))
            }
            _ => None,
        },
        _ => None,
    }
}
