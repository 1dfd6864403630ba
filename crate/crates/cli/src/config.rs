use std::path::Path;

use morrey_embed::spaces::{parse_weight, Exponent, ParamQuadruple, RadialProblem};
use serde::Deserialize;

/// An exponent given either as a JSON number or as a string such as `"3/2"`
/// or `"inf"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ExponentField {
    Number(f64),
    Text(String),
}

impl ExponentField {
    fn resolve(&self, name: &str) -> Result<f64, String> {
        let e = match self {
            ExponentField::Number(v) => Exponent::new(*v),
            ExponentField::Text(s) => s.parse(),
        };
        e.map(Exponent::value).map_err(|e| format!("{name}: {e}"))
    }
}

fn one_dim() -> u32 {
    1
}

fn unit() -> String {
    "1".into()
}

/// Flat JSON problem description.
///
/// ```json
/// { "n": 1, "p1": "2", "p2": "1", "th1": "2", "th2": "1",
///   "omega1": "t^-0.25", "omega2": "exp(-t)" }
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default = "one_dim")]
    pub n: u32,
    pub p1: ExponentField,
    pub p2: ExponentField,
    pub th1: ExponentField,
    pub th2: ExponentField,
    pub omega1: String,
    pub omega2: String,
    #[serde(default = "unit")]
    pub v1: String,
    #[serde(default = "unit")]
    pub v2: String,
    /// Relative quadrature tolerance.
    #[serde(default)]
    pub rel_tol: Option<f64>,
    /// Multiplier on the default oracle budget.
    #[serde(default)]
    pub oracle_budget: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ProblemConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
    }

    pub fn params(&self) -> Result<ParamQuadruple, String> {
        ParamQuadruple::new(
            self.p1.resolve("p1")?,
            self.p2.resolve("p2")?,
            self.th1.resolve("th1")?,
            self.th2.resolve("th2")?,
            self.n,
        )
        .map_err(|e| e.to_string())
    }

    pub fn problem(&self) -> Result<RadialProblem, String> {
        // Weights only: infinite exponents are legal input and classify as
        // `Unsupported`.
        let weight = |name: &str, src: &str| {
            parse_weight(src)
                .and_then(|w| w.validate().map(|_| w))
                .map_err(|e| format!("{name}: {e}"))
        };
        Ok(RadialProblem::new(
            self.params()?,
            weight("omega1", &self.omega1)?,
            weight("omega2", &self.omega2)?,
            weight("v1", &self.v1)?,
            weight("v2", &self.v2)?,
        ))
    }
}
