use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::funcspec::{Builtin, FuncExpr, FunctionSpec, Interval, Piece};
use crate::young::YoungFn;

use super::VerifyError;

#[derive(Debug, Clone)]
pub struct DominancePair {
    pub theta1: YoungFn,
    pub theta2: YoungFn,
    /// `θ1(t) ≤ θ2(C·t)` for all `t`.
    pub known_c: f64,
}

/// Indicator of the max-norm ball `B(center, radius)` inside `B(center, 2·radius)`.
#[derive(Debug, Clone)]
pub struct IndicatorCase {
    pub dim: usize,
    pub radius: f64,
    pub theta: YoungFn,
}

/// `h_n = base + (1/n)·χ_support` on `base`'s domain.
#[derive(Debug, Clone)]
pub struct SequenceCase {
    pub base: FuncExpr,
    pub support: Interval,
    pub theta: YoungFn,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub functions: Vec<FuncExpr>,
    pub young: Vec<YoungFn>,
    pub dominating: Vec<DominancePair>,
    pub non_dominating: Vec<(YoungFn, YoungFn)>,
    pub indicator_cases: Vec<IndicatorCase>,
    pub sequences: Vec<SequenceCase>,
}

/// Center used for the indicator-ball cases.
pub const INDICATOR_CENTER: f64 = 0.3;

fn seg(lo: f64, hi: f64) -> Interval {
    Interval::segment(lo, hi).expect("valid literal segment")
}

fn cube(lo: f64, hi: f64, n: usize) -> Interval {
    Interval::cube(lo, hi, n).expect("valid literal cube")
}

fn builtin(b: Builtin, domain: Interval, label: &str) -> FuncExpr {
    FuncExpr::from_builtin(b, domain).expect("valid literal builtin").with_label(label)
}

/// Functions used by the default corpus. Each has exact metadata (an
/// integral, a distribution, or both).
pub fn default_functions() -> Vec<FuncExpr> {
    let line = seg(0.0, 2.0);
    let unit = seg(0.0, 1.0);
    let sq2 = cube(0.0, 2.0, 2);
    vec![
        builtin(Builtin::indicator(unit.clone()), line.clone(), "chi[0,1]"),
        builtin(
            Builtin::PiecewiseConst { pieces: vec![Piece { region: unit.clone(), value: 2.0 }] },
            line.clone(),
            "2chi[0,1]",
        ),
        builtin(Builtin::indicator(seg(1.0, 2.0)), line.clone(), "chi[1,2]"),
        builtin(Builtin::Linear { coeffs: vec![1.0], offset: 0.0 }, line.clone(), "x@[0,2]"),
        builtin(Builtin::Linear { coeffs: vec![1.0], offset: 0.0 }, unit.clone(), "x"),
        builtin(Builtin::Linear { coeffs: vec![2.0], offset: -1.0 }, unit.clone(), "2x-1"),
        builtin(Builtin::Power { p: 0.5 }, unit.clone(), "sqrt|x|"),
        builtin(Builtin::Constant { c: 0.5 }, unit.clone(), "0.5"),
        builtin(Builtin::Constant { c: 0.0 }, unit.clone(), "0"),
        FuncExpr::parse("sin(2*3.141592653589793*x1)", unit.clone())
            .expect("valid literal expression")
            .with_exact_integral(0.0)
            .with_label("sin(2pi x)"),
        builtin(Builtin::indicator(cube(0.0, 1.0, 2)), sq2.clone(), "chi[0,1]^2"),
        builtin(
            Builtin::PiecewiseConst {
                pieces: vec![
                    Piece { region: cube(0.0, 1.0, 2), value: 1.0 },
                    Piece { region: Interval::from_pairs(&[(1.0, 2.0), (0.0, 1.0)]).expect("literal"), value: 3.0 },
                ],
            },
            sq2,
            "steps^2",
        ),
        FuncExpr::parse("x1*x2", cube(0.0, 1.0, 2))
            .expect("valid literal expression")
            .with_exact_integral(0.25)
            .with_label("x1*x2"),
    ]
}

pub fn default_young() -> Vec<YoungFn> {
    vec![
        YoungFn::power(1.0),
        YoungFn::power(2.0),
        YoungFn::power(3.0),
        YoungFn::expm(),
        YoungFn::scaled_power(2.0, 0.5),
        YoungFn::log1p(),
    ]
}

pub fn default_dominating() -> Vec<DominancePair> {
    let pair = |theta1, theta2, known_c| DominancePair { theta1, theta2, known_c };
    vec![
        pair(YoungFn::power(1.0), YoungFn::scaled_power(1.0, 2.0), 0.5),
        pair(YoungFn::power(2.0), YoungFn::power(2.0), 1.0),
        pair(YoungFn::power(2.0), YoungFn::scaled_power(2.0, 4.0), 0.5),
        pair(YoungFn::scaled_power(2.0, 0.5), YoungFn::power(2.0), 0.5f64.sqrt()),
        pair(YoungFn::log1p(), YoungFn::power(1.0), 1.0),
    ]
}

pub fn default_indicator_cases() -> Vec<IndicatorCase> {
    let thetas = [
        YoungFn::power(1.0),
        YoungFn::power(2.0),
        YoungFn::power(3.0),
        YoungFn::expm(),
        YoungFn::scaled_power(2.0, 0.5),
    ];
    let mut out = Vec::new();
    for dim in [1, 2] {
        for radius in [0.25, 0.5, 1.0] {
            for theta in &thetas {
                out.push(IndicatorCase { dim, radius, theta: theta.clone() });
            }
        }
    }
    out
}

pub fn default_sequences() -> Vec<SequenceCase> {
    let line = seg(0.0, 2.0);
    let bases = vec![
        builtin(Builtin::Constant { c: 0.0 }, line.clone(), "0@[0,2]"),
        builtin(Builtin::Linear { coeffs: vec![1.0], offset: 0.0 }, line.clone(), "x@[0,2]"),
        builtin(Builtin::indicator(seg(1.0, 2.0)), line, "chi[1,2]"),
    ];
    bases
        .into_iter()
        .map(|base| SequenceCase { base, support: seg(0.0, 1.0), theta: YoungFn::power(1.0) })
        .collect()
}

impl Default for Corpus {
    fn default() -> Self {
        Self {
            functions: default_functions(),
            young: default_young(),
            dominating: default_dominating(),
            non_dominating: vec![(YoungFn::power(1.0), YoungFn::power(2.0))],
            indicator_cases: default_indicator_cases(),
            sequences: default_sequences(),
        }
    }
}

/// `{"functions": [paths], "young": [paths]}`; relative paths resolve against
/// the manifest's directory. Omitted lists keep the defaults.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    #[serde(default)]
    functions: Option<Vec<PathBuf>>,
    #[serde(default)]
    young: Option<Vec<PathBuf>>,
}

impl Corpus {
    pub fn load_manifest(path: &Path) -> Result<Self, VerifyError> {
        let input = |message: String| VerifyError::Input { path: path.to_path_buf(), message };
        let text = std::fs::read_to_string(path).map_err(|e| input(e.to_string()))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| input(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut corpus = Corpus::default();
        if let Some(paths) = manifest.functions {
            corpus.functions = paths.iter().map(|p| load_function(&base.join(p))).collect::<Result<_, _>>()?;
        }
        if let Some(paths) = manifest.young {
            corpus.young = paths.iter().map(|p| load_young(&base.join(p))).collect::<Result<_, _>>()?;
        }
        corpus.validate()?;
        Ok(corpus)
    }

    /// Every function needs an exact oracle, and labels must be unique so
    /// check ids are too.
    pub fn validate(&self) -> Result<(), VerifyError> {
        if self.functions.is_empty() || self.young.is_empty() {
            return Err(VerifyError::Corpus("corpus needs at least one function and one Young function".into()));
        }
        for (i, f) in self.functions.iter().enumerate() {
            if f.exact_integral(f.domain()).is_none() && f.exact_distribution().is_none() {
                return Err(VerifyError::Corpus(format!(
                    "function `{}` has no exact integral or distribution to check against",
                    f.label()
                )));
            }
            if self.functions[..i].iter().any(|g| g.label() == f.label()) {
                return Err(VerifyError::Corpus(format!("duplicate function label `{}`", f.label())));
            }
        }
        Ok(())
    }
}

pub fn load_function(path: &Path) -> Result<FuncExpr, VerifyError> {
    let input = |message: String| VerifyError::Input { path: path.to_path_buf(), message };
    let text = std::fs::read_to_string(path).map_err(|e| input(e.to_string()))?;
    let spec = FunctionSpec::from_json(&text).map_err(|e| input(e.to_string()))?;
    let f = spec.build().map_err(|e| input(e.to_string()))?;
    match spec.label {
        Some(_) => Ok(f),
        None => {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(f.with_label(stem))
        }
    }
}

pub fn load_young(path: &Path) -> Result<YoungFn, VerifyError> {
    YoungFn::load(path).map_err(|e| VerifyError::Input { path: path.to_path_buf(), message: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_corpus_is_valid() {
        let c = Corpus::default();
        c.validate().unwrap();
        assert!(c.functions.len() * c.young.len() >= 20);
        assert_eq!(c.indicator_cases.len(), 30);
        assert_eq!(c.dominating.len(), 5);
    }

    #[test]
    fn manifest_errors_name_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("broken.json");
        std::fs::write(&bad, r#"{"family":"power","params":{"p":0.5}}"#).unwrap();
        let manifest = dir.path().join("corpus.json");
        std::fs::write(&manifest, r#"{"young":["broken.json"]}"#).unwrap();
        let err = Corpus::load_manifest(&manifest).unwrap_err().to_string();
        assert!(err.contains("broken.json"), "{err}");
    }
}
