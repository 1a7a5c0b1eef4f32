//! Run configurations. Each command reads an optional JSON document,
//! applies command-line overrides, and echoes the resolved result.

use std::path::Path;

use critshe::gausscalc::Mixture2d;
use critshe::mollifier::{Mollifier, ProfileRegistry};
use critshe::simplexint::IntegrationPlan;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::Value;

use crate::envelope::ENVELOPE_SCHEMA;
use crate::error::CliError;

pub const CONFIG_SCHEMA: &str = "1";

fn schema() -> String {
    CONFIG_SCHEMA.to_string()
}

/// Read a config file; an envelope is accepted and its `inputs` used.
pub(crate) fn load(path: &Path, command: &str) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: not valid JSON: {e}", path.display())))?;
    if v.get("schema_version").and_then(Value::as_str) == Some(ENVELOPE_SCHEMA) {
        let cmd = v.get("command").and_then(Value::as_str).unwrap_or("");
        if cmd != command {
            return Err(CliError::Validation(format!(
                "{}: envelope was produced by `{cmd}`, not `{command}`",
                path.display()
            )));
        }
        return v
            .get("inputs")
            .cloned()
            .ok_or_else(|| CliError::Validation(format!("{}: envelope without inputs", path.display())));
    }
    Ok(v)
}

/// Deserialize with the schema checked first.
pub(crate) fn parse<T: DeserializeOwned>(raw: Option<Value>, empty: T) -> Result<T, CliError> {
    let Some(v) = raw else { return Ok(empty) };
    match v.get("schema_version") {
        None => {}
        Some(Value::String(s)) if s == CONFIG_SCHEMA => {}
        Some(other) => {
            return Err(CliError::Validation(format!(
                "unsupported schema_version {other}; expected \"{CONFIG_SCHEMA}\""
            )))
        }
    }
    serde_json::from_value(v).map_err(|e| CliError::Validation(format!("config: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MollifierSpec {
    pub profile: String,
    pub support_radius: f64,
}

impl Default for MollifierSpec {
    fn default() -> Self {
        Self {
            profile: "bump".into(),
            support_radius: 1.0,
        }
    }
}

impl MollifierSpec {
    pub fn build(&self) -> Result<Mollifier, CliError> {
        Ok(Mollifier::from_registry(&ProfileRegistry::default(), &self.profile, self.support_radius)?)
    }
}

fn default_gauss() -> Mixture2d {
    Mixture2d::single([0.0, 0.0], 0.25).expect("positive variance")
}

fn default_f() -> Vec<Mixture2d> {
    vec![default_gauss()]
}

/// Expand a single factor to `n` copies.
pub(crate) fn expand_factors(f: &mut Vec<Mixture2d>, n: usize) -> Result<(), CliError> {
    if f.len() == 1 && n > 1 {
        let g = f[0].clone();
        f.resize(n, g);
    }
    if f.len() != n {
        return Err(CliError::Validation(format!("need 1 or {n} test-function factors, got {}", f.len())));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    #[default]
    Correlation,
    CenteredThirdMoment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentConfig {
    #[serde(default = "schema")]
    pub schema_version: String,
    #[serde(default)]
    pub quantity: Quantity,
    #[serde(default)]
    pub mollifier: MollifierSpec,
    /// Exactly one of `beta_zero`, `beta_star`; `beta_zero = 0` when neither is set.
    #[serde(default)]
    pub beta_zero: Option<f64>,
    #[serde(default)]
    pub beta_star: Option<f64>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default = "default_f")]
    pub f: Vec<Mixture2d>,
    #[serde(default = "default_gauss")]
    pub z_ic: Mixture2d,
    #[serde(default = "default_m_max")]
    pub m_max: usize,
    #[serde(default)]
    pub plan: IntegrationPlan,
}

fn default_m_max() -> usize {
    6
}

impl Default for MomentConfig {
    fn default() -> Self {
        serde_json::from_value(serde_json::json!({})).expect("all fields defaulted")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default = "schema")]
    pub schema_version: String,
    #[serde(default)]
    pub mollifier: MollifierSpec,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub beta_zero: f64,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_domain")]
    pub domain: f64,
    /// `(L/N)²/4` when unset.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_replicas")]
    pub replicas: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_f")]
    pub f: Vec<Mixture2d>,
    #[serde(default = "default_gauss")]
    pub z_ic: Mixture2d,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    /// Relative solver for a deterministic comparison value (`n = 2` only).
    #[serde(default)]
    pub oracle: Option<String>,
}

fn default_grid() -> usize {
    256
}
fn default_domain() -> f64 {
    8.0
}
fn default_replicas() -> u64 {
    1000
}
fn default_n() -> usize {
    2
}
fn default_times() -> Vec<f64> {
    vec![0.25]
}

impl Default for SimulateConfig {
    fn default() -> Self {
        serde_json::from_value(serde_json::json!({})).expect("all fields defaulted")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramsConfig {
    #[serde(default = "schema")]
    pub schema_version: String,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub list: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_explicit() {
        let c = MomentConfig::default();
        assert_eq!(c.schema_version, CONFIG_SCHEMA);
        assert_eq!(c.m_max, 6);
        assert_eq!(c.mollifier.profile, "bump");
        let v = serde_json::to_value(&c).unwrap();
        assert!(v.get("plan").unwrap().get("samples").is_some());
    }

    #[test]
    fn unknown_fields_and_schema_are_rejected() {
        let bad = serde_json::json!({"n": 2, "tt": 1.0});
        assert!(parse::<MomentConfig>(Some(bad), MomentConfig::default()).is_err());
        let bad = serde_json::json!({"schema_version": "9"});
        assert!(parse::<MomentConfig>(Some(bad), MomentConfig::default()).is_err());
    }
}
