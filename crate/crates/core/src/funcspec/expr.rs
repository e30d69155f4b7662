use std::fmt;

use super::builtin::Builtin;
use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => a / b,
            BinOp::Pow => a.powf(b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    Min,
    Max,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    /// `true` for min/max, which take two or more arguments.
    pub fn is_variadic(self) -> bool {
        matches!(self, Func::Min | Func::Max)
    }
}

/// Expression tree over the variables `x1..xn`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Zero-based variable index (`x1` is `Var(0)`).
    Var(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
    Builtin(Box<Builtin>),
}

impl Expr {
    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn builtin(b: Builtin) -> Expr {
        Expr::Builtin(Box::new(b))
    }

    /// Highest variable index referenced plus one (zero for constants).
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(e) => e.arity(),
            Expr::Binary(_, a, b) => a.arity().max(b.arity()),
            Expr::Call(_, args) => args.iter().map(Expr::arity).max().unwrap_or(0),
            Expr::Builtin(b) => b.dim().unwrap_or(0),
        }
    }

    /// True if the tree contains no builtin leaves, i.e. it can be printed in
    /// the text grammar and parsed back.
    pub fn is_textual(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => true,
            Expr::Neg(e) => e.is_textual(),
            Expr::Binary(_, a, b) => a.is_textual() && b.is_textual(),
            Expr::Call(_, args) => args.iter().all(Expr::is_textual),
            Expr::Builtin(_) => false,
        }
    }

    /// Evaluate at `x`. Every intermediate must be finite.
    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => *x.get(*i).ok_or(EvalError::Dimension { expected: i + 1, got: x.len() })?,
            Expr::Neg(e) => -e.eval(x)?,
            Expr::Binary(op, a, b) => {
                let v = op.apply(a.eval(x)?, b.eval(x)?);
                if !v.is_finite() {
                    return Err(EvalError::NonFinite { op: op.symbol().to_string(), point: x.to_vec() });
                }
                v
            }
            Expr::Call(func, args) => {
                let v = match func {
                    Func::Sin => args[0].eval(x)?.sin(),
                    Func::Cos => args[0].eval(x)?.cos(),
                    Func::Exp => args[0].eval(x)?.exp(),
                    Func::Log => args[0].eval(x)?.ln(),
                    Func::Abs => args[0].eval(x)?.abs(),
                    Func::Min => fold_args(args, x, f64::min)?,
                    Func::Max => fold_args(args, x, f64::max)?,
                };
                if !v.is_finite() {
                    return Err(EvalError::NonFinite { op: func.name().to_string(), point: x.to_vec() });
                }
                v
            }
            Expr::Builtin(b) => b.eval(x)?,
        };
        Ok(v)
    }
}

fn fold_args(args: &[Expr], x: &[f64], f: fn(f64, f64) -> f64) -> Result<f64, EvalError> {
    let mut acc = args[0].eval(x)?;
    for a in &args[1..] {
        acc = f(acc, a.eval(x)?);
    }
    Ok(acc)
}

/// Fully parenthesised form. For textual trees, parsing the output gives back a
/// tree that evaluates identically.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => write!(f, "(-{})", -c),
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, a, b) => write!(f, "({a}{}{b})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Expr::Builtin(b) => write!(f, "@{}", b.name()),
        }
    }
}
