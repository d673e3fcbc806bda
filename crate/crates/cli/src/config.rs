use crate::run::Failure;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};
use talbot_core::pairings::default_r_grid;
use talbot_core::{GaussianTest, LineSpec, MuSchedule, Rational, RenderParams, TestFunction};

/// Overlays the keys of a JSON config file on the flag values and
/// deserialises the result.
pub fn resolve<T: DeserializeOwned>(
    command: &str,
    mut flags: Map<String, Value>,
    file: Option<&Path>,
) -> Result<T, Failure> {
    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("cannot read config {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| Failure::Input(format!("config {} is not valid JSON: {e}", path.display())))?;
        let Value::Object(mut overrides) = value else {
            return Err(Failure::Input("config file must hold a JSON object".into()));
        };
        if let Some(sub) = overrides.remove("subcommand") {
            if sub.as_str() != Some(command) {
                return Err(Failure::Input(format!("config is for subcommand {sub}, not {command:?}")));
            }
        }
        flags.extend(overrides);
    }
    normalize(&mut flags)?;
    serde_json::from_value(Value::Object(flags))
        .map_err(|e| Failure::Input(format!("invalid {command} parameters: {e}")))
}

/// Accepts `"p/q"` strings for ζ and `"n:re:im,…"` strings for
/// trigonometric coefficients.
fn normalize(m: &mut Map<String, Value>) -> Result<(), Failure> {
    if let Some(Value::Object(line)) = m.get_mut("line") {
        if let Some(Value::String(z)) = line.get("zeta") {
            let z = parse_real(z)?;
            line.insert("zeta".into(), Value::from(z));
        }
    }
    if let Some(Value::Object(phi)) = m.get_mut("phi") {
        if let Some(Value::String(c)) = phi.get("coeffs") {
            let parsed = parse_coeffs(c)?;
            phi.insert("coeffs".into(), parsed);
        }
    }
    Ok(())
}

/// A decimal or an exact `p/q`.
pub fn parse_real(s: &str) -> Result<f64, Failure> {
    if s.contains('/') {
        let r: Rational = s.parse().map_err(|e| Failure::Input(format!("bad rational {s:?}: {e}")))?;
        Ok(r.to_f64())
    } else {
        s.trim().parse().map_err(|_| Failure::Input(format!("bad number {s:?}")))
    }
}

fn parse_coeffs(s: &str) -> Result<Value, Failure> {
    let bad = || Failure::Input(format!("coefficients must look like n:re:im,n:re:im; got {s:?}"));
    let mut out = Vec::new();
    for item in s.split(',').filter(|t| !t.trim().is_empty()) {
        let parts: Vec<&str> = item.trim().split(':').collect();
        let [n, re, im] = parts[..] else { return Err(bad()) };
        let n: i64 = n.parse().map_err(|_| bad())?;
        let re: f64 = re.parse().map_err(|_| bad())?;
        let im: f64 = im.parse().map_err(|_| bad())?;
        out.push(serde_json::json!([n, re, im]));
    }
    Ok(Value::Array(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    V,
    W,
}

impl FieldKind {
    pub fn name(&self) -> &'static str {
        match self {
            FieldKind::V => "v",
            FieldKind::W => "w",
        }
    }
}

fn default_field() -> FieldKind {
    FieldKind::V
}

fn standard_phi() -> TestFunction {
    TestFunction::Gaussian(GaussianTest::standard())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussConfig {
    pub gamma: Option<[i64; 3]>,
    pub sum: Option<[i64; 3]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RevivalConfig {
    pub p: i64,
    pub q: u64,
    pub sigma: Option<f64>,
    pub n_max: Option<u64>,
}

fn default_width() -> usize {
    RenderParams::default().width
}
fn default_height() -> usize {
    RenderParams::default().height
}
fn default_n_max() -> u64 {
    RenderParams::default().n_max
}
fn default_sigma() -> f64 {
    RenderParams::default().sigma
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarpetConfig {
    #[serde(default = "default_field")]
    pub field: FieldKind,
    pub r: Option<f64>,
    #[serde(default = "default_width")]
    pub width: usize,
    #[serde(default = "default_height")]
    pub height: usize,
    #[serde(default = "default_n_max")]
    pub n_max: u64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub row: usize,
    pub row_csv: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    #[serde(default = "default_field")]
    pub field: FieldKind,
    pub r: Option<f64>,
    pub line: LineSpec,
    #[serde(default = "standard_phi")]
    pub phi: TestFunction,
    pub n_max: Option<u64>,
    pub tol: Option<f64>,
}

fn default_tol() -> f64 {
    1e-6
}

fn default_budget() -> u64 {
    100_000_000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRun {
    pub line: LineSpec,
    #[serde(default = "standard_phi")]
    pub phi: TestFunction,
    #[serde(default = "default_r_grid")]
    pub r_grid: Vec<f64>,
    #[serde(default)]
    pub mu: MuSchedule,
    pub s: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default)]
    pub fit: Vec<String>,
}
