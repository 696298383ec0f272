//! Run configuration files.
//!
//! A config is a JSON object with `"version": 1`, a `"command"` naming the
//! subcommand, and a command-specific body. Unknown keys anywhere are
//! rejected before any computation starts.

use kahlerflow::closed_form::CurvatureSign;
use kahlerflow::flow::Method;
use kahlerflow::{CVector, MagneticSpec, ManifoldSpec, C64};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::error::CliError;

pub const VERSION: u64 = 1;

/// Complex numbers are written `[re, im]`.
pub type Cx = [f64; 2];

pub fn complex_vec(v: &[Cx]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|[re, im]| C64::new(*re, *im)))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ManifoldCfg {
    Cp { m: usize, a: f64 },
    Ch { m: usize, b: f64 },
    Flat { m: usize },
    Product2d { lambdas: Vec<f64> },
}

impl ManifoldCfg {
    pub fn spec(&self) -> ManifoldSpec {
        match self {
            Self::Cp { m, a } => ManifoldSpec::ProjectiveCP { m: *m, a: *a },
            Self::Ch { m, b } => ManifoldSpec::HyperbolicCH { m: *m, b: *b },
            Self::Flat { m } => ManifoldSpec::Flat { m: *m },
            Self::Product2d { lambdas } => ManifoldSpec::Product2D { lambdas: lambdas.clone() },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagneticCfg {
    #[serde(default)]
    pub kappa: f64,
    pub lambdas: Vec<f64>,
    pub q: f64,
}

impl MagneticCfg {
    pub fn spec(&self) -> MagneticSpec {
        MagneticSpec::new(self.kappa, self.lambdas.clone(), self.q)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputCfg {
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default = "one")]
    pub sample_stride: usize,
    #[serde(default)]
    pub gnuplot: bool,
}

impl Default for OutputCfg {
    fn default() -> Self {
        Self { format: Format::Csv, path: None, sample_stride: 1, gnuplot: false }
    }
}

fn one() -> usize {
    1
}

/// Uniform time grid `0, dt, …, t_end` (the final point is `t_end`).
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_end: f64,
    pub dt: f64,
}

impl TimeGrid {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) || !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(CliError::Config(format!("time grid needs dt > 0 and t_end >= 0, got dt = {}, t_end = {}", self.dt, self.t_end)));
        }
        let n = (self.t_end / self.dt).ceil() as usize;
        if n > 50_000_000 {
            return Err(CliError::Config("time grid is too large".into()));
        }
        Ok((0..=n).map(|i| if i == n { self.t_end } else { i as f64 * self.dt }).collect())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicCfg {
    pub manifold: ManifoldCfg,
    pub u: Vec<Cx>,
    pub time: TimeGrid,
    #[serde(default)]
    pub output: OutputCfg,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodCfg {
    #[default]
    Rk4,
    Rk4Richardson,
}

impl MethodCfg {
    pub fn method(self) -> Method {
        match self {
            Self::Rk4 => Method::Rk4,
            Self::Rk4Richardson => Method::Rk4Richardson,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowCfg {
    pub manifold: ManifoldCfg,
    pub magnetic: MagneticCfg,
    pub xi: Vec<Cx>,
    pub time: TimeGrid,
    #[serde(default)]
    pub method: MethodCfg,
    #[serde(default)]
    pub stop_radius: Option<f64>,
    #[serde(default)]
    pub output: OutputCfg,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitCfg {
    /// Whatever the regime calls for.
    #[default]
    Auto,
    Schrodinger,
    Geodesic,
    /// The `k = 1` solution on negative curvature.
    Critical,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosedFormCfg {
    pub manifold: ManifoldCfg,
    pub magnetic: MagneticCfg,
    pub xi: Vec<Cx>,
    pub time: TimeGrid,
    #[serde(default)]
    pub limit: LimitCfg,
    #[serde(default)]
    pub output: OutputCfg,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignCfg {
    Positive,
    Negative,
}

impl SignCfg {
    pub fn sign(self) -> CurvatureSign {
        match self {
            Self::Positive => CurvatureSign::Positive,
            Self::Negative => CurvatureSign::Negative,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisCfg {
    K,
    Radius,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeCfg {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    /// Skip points with `|k − 1|` below this value (k axis only).
    #[serde(default)]
    pub exclude: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepCfg {
    #[serde(default = "negative")]
    pub sign: SignCfg,
    pub q: f64,
    pub h: f64,
    pub xi_abs: f64,
    pub t_probe: f64,
    pub axis: AxisCfg,
    #[serde(default)]
    pub range: Option<RangeCfg>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub output: OutputCfg,
}

fn negative() -> SignCfg {
    SignCfg::Negative
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanckCfg {
    #[serde(rename = "G")]
    pub g: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemCfg {
    pub eigenvalues: Vec<f64>,
    pub xi: Vec<Cx>,
    #[serde(default = "unit")]
    pub hbar: f64,
    pub mass_m: f64,
    /// Fundamental mass; replaced by the Planck mass when `planck` is set.
    #[serde(rename = "mass_M", default)]
    pub mass_big_m: Option<f64>,
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollapseCfg {
    pub system: SystemCfg,
    #[serde(default)]
    pub planck: Option<PlanckCfg>,
    pub time: TimeGrid,
    #[serde(default)]
    pub output: OutputCfg,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateCfg {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: OutputCfg,
}

/// Check the envelope of `text` for `command` and deserialize the body.
pub fn parse<T: DeserializeOwned>(text: &str, command: &str) -> Result<T, CliError> {
    let mut value: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
    let obj = value.as_object_mut().ok_or_else(|| CliError::Config("config must be a JSON object".into()))?;
    match obj.remove("version") {
        Some(Value::Number(n)) if n.as_u64() == Some(VERSION) => {}
        Some(other) => return Err(CliError::Config(format!("unsupported version {other}, expected {VERSION}"))),
        None => return Err(CliError::Config("missing \"version\"".into())),
    }
    match obj.remove("command") {
        Some(Value::String(c)) if c == command => {}
        Some(other) => return Err(CliError::Config(format!("config is for command {other}, not \"{command}\""))),
        None => return Err(CliError::Config("missing \"command\"".into())),
    }
    serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
}
