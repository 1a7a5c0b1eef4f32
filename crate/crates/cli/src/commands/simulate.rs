use clap::Args;
use critshe::mollifier::{pair_profile, RadialGrid};
use critshe::shesim::{simulate_moments, two_particle_oracle, OracleRequest, SimParams, Simulator, SolverRegistry};
use serde_json::{json, Value};

use crate::config::{expand_factors, parse, SimulateConfig};
use crate::envelope::{exact, format_float, measured, Envelope, Table};
use crate::error::CliError;
use crate::Output;

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long = "beta0", allow_hyphen_values = true)]
    pub beta0: Option<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub domain: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub replicas: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Order of the moment.
    #[arg(long)]
    pub n: Option<usize>,
    /// Report times, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    #[arg(long)]
    pub mollifier: Option<String>,
    /// Also solve the two-particle problem with this relative solver (n = 2).
    #[arg(long)]
    pub oracle: Option<String>,
}

fn resolve(a: &SimulateArgs, raw: Option<Value>) -> Result<SimulateConfig, CliError> {
    let mut c: SimulateConfig = parse(raw, SimulateConfig::default())?;
    if a.epsilon.is_some() {
        c.epsilon = a.epsilon;
    }
    if let Some(b) = a.beta0 {
        c.beta_zero = b;
    }
    if let Some(g) = a.grid {
        c.grid = g;
    }
    if let Some(l) = a.domain {
        c.domain = l;
    }
    if a.dt.is_some() {
        c.dt = a.dt;
    }
    if let Some(r) = a.replicas {
        c.replicas = r;
    }
    if let Some(s) = a.seed {
        c.seed = s;
    }
    if let Some(n) = a.n {
        c.n = n;
    }
    if let Some(t) = &a.times {
        c.times = t.clone();
    }
    if let Some(p) = &a.mollifier {
        c.mollifier.profile = p.clone();
    }
    if a.oracle.is_some() {
        c.oracle = a.oracle.clone();
    }
    if c.n < 1 {
        return Err(CliError::Validation("n must be at least 1".into()));
    }
    expand_factors(&mut c.f, c.n)?;
    if c.times.is_empty() {
        return Err(CliError::Validation("need at least one report time".into()));
    }
    if c.oracle.is_some() && c.n != 2 {
        return Err(CliError::Validation("the oracle computes second moments only (n = 2)".into()));
    }
    Ok(c)
}

pub fn simulate(a: &SimulateArgs, raw: Option<Value>) -> Result<Output, CliError> {
    let mut c = resolve(a, raw)?;
    let epsilon = c.epsilon.ok_or_else(|| CliError::Validation("epsilon is required (--epsilon or config)".into()))?;
    let mut params = SimParams {
        epsilon,
        beta_zero: c.beta_zero,
        grid: c.grid,
        domain: c.domain,
        dt: 0.0,
    };
    params.dt = c.dt.unwrap_or_else(|| params.max_dt());
    c.dt = Some(params.dt);
    let mollifier = c.mollifier.build()?;
    let sim = Simulator::new(params, &mollifier)?;
    let solver = c.oracle.as_deref().map(|name| SolverRegistry::default().get(name)).transpose()?;

    let estimates = simulate_moments(&sim, &c.f, &c.z_ic, &c.times, c.replicas, c.seed)?;

    let mut warnings = Vec::new();
    let mut oracle = Vec::new();
    if let Some(solver) = &solver {
        let pair = pair_profile(&mollifier, &RadialGrid::default())?;
        for e in &estimates {
            let req = OracleRequest {
                t: e.time,
                f: [c.f[0].clone(), c.f[1].clone()],
                z_ic: c.z_ic.clone(),
                epsilon,
                beta_eps: sim.beta_eps(),
            };
            let v = two_particle_oracle(&req, &pair, solver.as_ref())?;
            let fine = two_particle_oracle(&req, &pair, solver.refined().as_ref())?;
            let err = (fine - v).abs();
            let z = (e.value - fine).abs() / (e.std_error.powi(2) + err * err).sqrt();
            if z > 3.0 {
                warnings.push(format!(
                    "t = {}: simulation and oracle differ by {z:.2} combined standard errors",
                    e.time
                ));
            }
            oracle.push((fine, err));
        }
    }

    let header: &[&str] = if solver.is_some() {
        &["time", "value", "std_error", "replicas", "steps", "oracle", "oracle_error"]
    } else {
        &["time", "value", "std_error", "replicas", "steps"]
    };
    let mut table = Table::new(header);
    let mut series = Vec::new();
    for (i, e) in estimates.iter().enumerate() {
        let mut row = vec![
            format_float(e.time),
            format_float(e.value),
            format_float(e.std_error),
            e.replicas.to_string(),
            e.steps.to_string(),
        ];
        let mut entry = json!({
            "time": e.time,
            "moment": measured(e.value, e.std_error),
            "replicas": e.replicas,
            "steps": e.steps,
        });
        if let Some(&(v, err)) = oracle.get(i) {
            row.push(format_float(v));
            row.push(format_float(err));
            entry["oracle"] = measured(v, err);
        }
        table.push(row);
        series.push(entry);
    }
    let results = json!({
        "beta_eps": exact(sim.beta_eps()),
        "dt": exact(params.dt),
        "estimates": series,
        "oracle_solver": c.oracle,
    });
    let seeds = json!({
        "simulation": c.seed,
        "per_step": "ChaCha8 keyed by (seed, replica), stream = step",
    });
    let inputs = serde_json::to_value(&c).expect("serializable");
    Ok(Output {
        envelope: Some(Envelope::new("simulate", inputs, seeds, results, warnings)),
        table: Some(table),
        plain: None,
    })
}
