use clap::Args;
use critshe::mollifier::{beta_star, RadialGrid};
use critshe::momentengine::{MomentEngine, MomentRequest, MomentResult};
use critshe::simplexint::Mode;
use critshe::specfun::BetaStar;
use serde_json::{json, Value};

use super::beta_phi_estimate;
use crate::config::{expand_factors, parse, MomentConfig, Quantity};
use crate::envelope::{exact, format_float, measured, Envelope, Table};
use crate::error::CliError;
use crate::Output;

#[derive(Debug, Clone, Args)]
pub struct MomentArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "beta0")]
    pub beta_star: Option<f64>,
    #[arg(long = "beta0", allow_hyphen_values = true)]
    pub beta0: Option<f64>,
    /// Mollifier profile used to turn β° into β⋆.
    #[arg(long)]
    pub mollifier: Option<String>,
    #[arg(long)]
    pub m_max: Option<usize>,
    /// adaptive-quadrature, monte-carlo or quasi-monte-carlo.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub mc_samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Compute the centered third moment (n = 3) instead of a correlation.
    #[arg(long)]
    pub third_moment: bool,
}

fn resolve(a: &MomentArgs, raw: Option<Value>) -> Result<MomentConfig, CliError> {
    let mut c: MomentConfig = parse(raw, MomentConfig::default())?;
    if a.n.is_some() {
        c.n = a.n;
    }
    if a.t.is_some() {
        c.t = a.t;
    }
    if let Some(b) = a.beta_star {
        c.beta_star = Some(b);
        c.beta_zero = None;
    }
    if let Some(b) = a.beta0 {
        c.beta_zero = Some(b);
        c.beta_star = None;
    }
    if let Some(p) = &a.mollifier {
        c.mollifier.profile = p.clone();
    }
    if let Some(k) = a.m_max {
        c.m_max = k;
    }
    if let Some(m) = &a.mode {
        c.plan.mode = m.parse::<Mode>().map_err(|e| CliError::Validation(e.to_string()))?;
    }
    if let Some(s) = a.mc_samples {
        c.plan.samples = s;
    }
    if let Some(s) = a.seed {
        c.plan.seed = s;
    }
    if let Some(r) = a.rel_tol {
        c.plan.rel_tol = r;
    }
    if a.third_moment {
        c.quantity = Quantity::CenteredThirdMoment;
    }
    if c.quantity == Quantity::CenteredThirdMoment {
        match c.n {
            None => c.n = Some(3),
            Some(3) => {}
            Some(n) => return Err(CliError::Validation(format!("the centered third moment needs n = 3, got {n}"))),
        }
    }
    let n = c.n.ok_or_else(|| CliError::Validation("n is required (--n or config)".into()))?;
    if c.t.is_none() {
        return Err(CliError::Validation("t is required (--t or config)".into()));
    }
    expand_factors(&mut c.f, n)?;
    if c.quantity == Quantity::CenteredThirdMoment && c.f.iter().any(|g| g != &c.f[0]) {
        return Err(CliError::Validation("the centered third moment uses one test function f^⊗3".into()));
    }
    match (c.beta_zero, c.beta_star) {
        (Some(_), Some(_)) => return Err(CliError::Validation("set beta_zero or beta_star, not both".into())),
        (None, None) => c.beta_zero = Some(0.0),
        _ => {}
    }
    c.plan.validate().map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(c)
}

pub fn moment(a: &MomentArgs, raw: Option<Value>) -> Result<Output, CliError> {
    let c = resolve(a, raw)?;
    let (n, t) = (c.n.expect("resolved"), c.t.expect("resolved"));
    let (beta, beta_json) = match (c.beta_star, c.beta_zero) {
        (Some(b), _) => (BetaStar(b), exact(b)),
        (None, Some(b0)) => {
            let m = c.mollifier.build()?;
            let (bphi, err) = beta_phi_estimate(&m, RadialGrid::default().intervals)?;
            let b = beta_star(b0, bphi);
            (b, measured(b.0, 2.0 * err))
        }
        (None, None) => unreachable!("resolved"),
    };
    let req = MomentRequest {
        n,
        t,
        beta_star: beta,
        f: c.f.clone(),
        z_ic: c.z_ic.clone(),
        m_max: c.m_max,
        plan: c.plan,
    };
    req.validate()?;
    let engine = MomentEngine::new(beta, t)?;
    let seeds = json!({
        "plan": c.plan.seed,
        "per_diagram": "diagram_seed(plan, n, m, index in enumeration order)",
    });
    let inputs = serde_json::to_value(&c).expect("serializable");

    let (mut results, table, warnings) = match c.quantity {
        Quantity::Correlation => {
            let r = engine.correlation(&req)?;
            (result_json(&r), diagram_table(&r), r.warnings.clone())
        }
        Quantity::CenteredThirdMoment => {
            let chk = engine.third_moment_routes(&c.f[0], &req)?;
            let mut warnings = chk.nondegenerate.warnings.clone();
            if chk.discrepancy_sigma > 2.0 {
                warnings.push(format!(
                    "the two third-moment routes differ by {:.2} combined standard errors",
                    chk.discrepancy_sigma
                ));
            }
            let r = json!({
                "centered_third_moment": measured(chk.nondegenerate_sum.value, chk.nondegenerate_sum.error),
                "cumulant_route": measured(chk.cumulant_route.value, chk.cumulant_route.error),
                "first_moment": exact(chk.first_moment),
                "discrepancy_sigma": exact(chk.discrepancy_sigma),
                "nondegenerate_diagrams": result_json(&chk.nondegenerate),
            });
            (r, diagram_table(&chk.nondegenerate), warnings)
        }
    };
    results["beta_star"] = beta_json;
    Ok(Output {
        envelope: Some(Envelope::new("moment", inputs, seeds, results, warnings)),
        table: Some(table),
        plain: None,
    })
}

fn result_json(r: &MomentResult) -> Value {
    let per_m: Vec<Value> = r
        .per_m
        .iter()
        .map(|p| json!({ "m": p.m, "diagrams": p.diagrams, "total": measured(p.total, p.error) }))
        .collect();
    let contributions: Vec<Value> = r
        .contributions
        .iter()
        .map(|d| {
            json!({
                "diagram": d.diagram,
                "m": d.m,
                "degenerate": d.degenerate,
                "contribution": measured(d.value, d.error),
                "evaluations": d.evaluations,
                "accuracy_warning": d.accuracy_warning,
            })
        })
        .collect();
    // the ratio's error follows from the last two per-m errors
    let ratio = r.last_ratio.map(|q| {
        let k = r.per_m.len();
        let (a, b) = (&r.per_m[k - 2], &r.per_m[k - 1]);
        let rel = ((a.error / a.total).powi(2) + (b.error / b.total).powi(2)).sqrt();
        measured(q, q.abs() * rel)
    });
    json!({
        "free_term": exact(r.free_term),
        "partial_sum": measured(r.partial_sum, r.error),
        "total": r.total.map(|v| measured(v, r.error)),
        // an extrapolated tail is uncertain by its own size
        "truncation_tail_estimate": r.truncation_tail_estimate.map(|v| measured(v, v.abs())),
        "last_ratio": ratio,
        "converged": r.converged(),
        "truncation_rule": r.truncation_rule,
        "per_m": per_m,
        "contributions": contributions,
    })
}

/// One row per evaluated diagram plus the free term.
fn diagram_table(r: &MomentResult) -> Table {
    let mut t = Table::new(&["term", "m", "degenerate", "value", "error", "evaluations", "accuracy_warning"]);
    t.push(vec![
        "free".into(),
        "0".into(),
        "false".into(),
        format_float(r.free_term),
        "exact".into(),
        "0".into(),
        "false".into(),
    ]);
    for d in &r.contributions {
        t.push(vec![
            d.diagram.clone(),
            d.m.to_string(),
            d.degenerate.to_string(),
            format_float(d.value),
            format_float(d.error),
            d.evaluations.to_string(),
            d.accuracy_warning.to_string(),
        ]);
    }
    t
}
