use clap::Args;
use critshe::mollifier::{beta_star, RadialGrid};
use critshe::specfun::EULER_GAMMA;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::beta_phi_estimate;
use crate::config::{parse, MollifierSpec, CONFIG_SCHEMA};
use crate::envelope::{exact, measured, Envelope};
use crate::error::CliError;
use crate::Output;

#[derive(Debug, Clone, Args)]
pub struct BetaconstArgs {
    /// Mollifier profile name.
    #[arg(long)]
    pub mollifier: Option<String>,
    #[arg(long)]
    pub support_radius: Option<f64>,
    #[arg(long = "beta0", allow_hyphen_values = true)]
    pub beta0: Option<f64>,
    /// Radial grid for the pair profile; the error compares against twice as many intervals.
    #[arg(long)]
    pub grid_intervals: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BetaconstConfig {
    #[serde(default = "schema")]
    schema_version: String,
    #[serde(default)]
    mollifier: MollifierSpec,
    #[serde(default)]
    beta_zero: f64,
    #[serde(default = "intervals")]
    grid_intervals: usize,
}

fn schema() -> String {
    CONFIG_SCHEMA.into()
}

fn intervals() -> usize {
    RadialGrid::default().intervals
}

pub fn betaconst(a: &BetaconstArgs, raw: Option<Value>) -> Result<Output, CliError> {
    let empty = serde_json::from_value(json!({})).expect("all fields defaulted");
    let mut c: BetaconstConfig = parse(raw, empty)?;
    if let Some(p) = &a.mollifier {
        c.mollifier.profile = p.clone();
    }
    if let Some(r) = a.support_radius {
        c.mollifier.support_radius = r;
    }
    if let Some(b) = a.beta0 {
        c.beta_zero = b;
    }
    if let Some(k) = a.grid_intervals {
        c.grid_intervals = k;
    }
    if !c.beta_zero.is_finite() {
        return Err(CliError::Validation("beta0 must be finite".into()));
    }
    let m = c.mollifier.build()?;
    let (bphi, err) = beta_phi_estimate(&m, c.grid_intervals)?;
    let bs = beta_star(c.beta_zero, bphi);
    let results = json!({
        "beta_phi": measured(bphi, err),
        // β⋆ = 2(log 2 + β° − β_φ − γ_EM)
        "beta_star": measured(bs.0, 2.0 * err),
        "euler_gamma": exact(EULER_GAMMA),
        "profile": m.profile_name(),
    });
    let inputs = serde_json::to_value(&c).expect("serializable");
    Ok(Output {
        envelope: Some(Envelope::new("betaconst", inputs, json!({}), results, Vec::new())),
        ..Output::default()
    })
}
