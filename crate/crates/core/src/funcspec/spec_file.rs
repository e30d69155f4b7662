//! JSON function-spec files:
//!
//! ```json
//! { "kind": "expr", "expr": "x1^2*sin(1/x1^2)", "domain": [[0, 1]], "singular": [[0]] }
//! { "kind": "builtin", "builtin": {"name": "indicator", "params": {"box": [[0, 1]]}}, "domain": [[0, 2]] }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Builtin, FuncError, FuncExpr, Interval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecKind {
    Expr,
    Builtin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub kind: SpecKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<Builtin>,
    pub domain: Interval,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singular: Option<Vec<Vec<f64>>>,
    /// Known value of the integral over the whole domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_integral: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl FunctionSpec {
    pub fn from_json(text: &str) -> Result<Self, FuncError> {
        serde_json::from_str(text).map_err(|e| FuncError::Spec(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<FuncExpr, FuncError> {
        let text = std::fs::read_to_string(path).map_err(|e| FuncError::Spec(e.to_string()))?;
        Self::from_json(&text)?.build()
    }

    pub fn build(&self) -> Result<FuncExpr, FuncError> {
        let mut f = match (self.kind, &self.expr, &self.builtin) {
            (SpecKind::Expr, Some(text), None) => FuncExpr::parse(text, self.domain.clone())?,
            (SpecKind::Builtin, None, Some(b)) => FuncExpr::from_builtin(b.clone(), self.domain.clone())?,
            (SpecKind::Expr, _, _) => return Err(FuncError::Spec("kind \"expr\" needs exactly an \"expr\" field".into())),
            (SpecKind::Builtin, _, _) => {
                return Err(FuncError::Spec("kind \"builtin\" needs exactly a \"builtin\" field".into()))
            }
        };
        if let Some(points) = &self.singular {
            f = f.with_singular(points.clone())?;
        }
        if let Some(v) = self.exact_integral {
            f = f.with_exact_integral(v);
        }
        if let Some(label) = &self.label {
            f = f.with_label(label.clone());
        }
        Ok(f)
    }
}
