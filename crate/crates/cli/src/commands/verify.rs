use clap::{Args, ValueEnum};
use critshe::diagrams::{count, enumerate};
use critshe::gausscalc::{bessel_identity_residual, second_moment_closed_form, Mixture2d};
use critshe::momentengine::{semigroup_residual, MomentEngine, MomentRequest};
use critshe::simplexint::{IntegrationPlan, Mode};
use critshe::specfun::{
    conv_identity_residual, gamma_identity_check, jfn_laplace_transform, k0_ascending_series, k0_continued_fraction,
    BetaStar, JFunction, JfnEvalConfig, JfnTable,
};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{parse, CONFIG_SCHEMA};
use crate::envelope::{exact, Envelope};
use crate::error::CliError;
use crate::Output;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Γ, 𝔧 Laplace transform, convolution, Bessel and K₀ identities.
    Identities,
    /// Diagram counts against brute-force enumeration.
    Combinatorics,
    /// Diagram engine against the closed-form second moment.
    N2,
    /// Semigroup property of the second moment.
    Semigroup,
    All,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyConfig {
    #[serde(default = "schema")]
    schema_version: String,
    #[serde(default = "identities")]
    suite: Suite,
}

fn schema() -> String {
    CONFIG_SCHEMA.into()
}

fn identities() -> Suite {
    Suite::Identities
}

struct Check {
    suite: &'static str,
    name: String,
    residual: f64,
    tolerance: f64,
}

impl Check {
    fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

pub fn verify(a: &VerifyArgs, raw: Option<Value>) -> Result<Output, CliError> {
    let empty = serde_json::from_value(json!({})).expect("all fields defaulted");
    let mut c: VerifyConfig = parse(raw, empty)?;
    if let Some(s) = a.suite {
        c.suite = s;
    }
    let mut checks = Vec::new();
    let all = c.suite == Suite::All;
    if all || c.suite == Suite::Identities {
        identity_checks(&mut checks)?;
    }
    if all || c.suite == Suite::Combinatorics {
        combinatorics_checks(&mut checks)?;
    }
    if all || c.suite == Suite::N2 {
        n2_checks(&mut checks)?;
    }
    if all || c.suite == Suite::Semigroup {
        semigroup_checks(&mut checks)?;
    }
    let failed: Vec<&Check> = checks.iter().filter(|k| !k.passed()).collect();
    let warnings = failed
        .iter()
        .map(|k| format!("{} / {}: residual {:e} above tolerance {:e}", k.suite, k.name, k.residual, k.tolerance))
        .collect();
    let rows: Vec<Value> = checks
        .iter()
        .map(|k| {
            json!({
                "suite": k.suite,
                "name": k.name,
                "residual": exact(k.residual),
                "tolerance": k.tolerance,
                "pass": k.passed(),
            })
        })
        .collect();
    let results = json!({
        "checks": rows,
        "passed": checks.len() - failed.len(),
        "failed": failed.len(),
    });
    let inputs = serde_json::to_value(&c).expect("serializable");
    Ok(Output {
        envelope: Some(Envelope::new("verify", inputs, json!({}), results, warnings)),
        ..Output::default()
    })
}

fn identity_checks(out: &mut Vec<Check>) -> Result<(), CliError> {
    for m in 0..=8 {
        for alpha in [0.1, 1.0, 2.5, 7.0] {
            out.push(Check {
                suite: "identities",
                name: format!("gamma m={m} alpha={alpha}"),
                residual: gamma_identity_check(m, alpha)?,
                tolerance: 1e-12,
            });
        }
    }
    let cfg = JfnEvalConfig::default();
    for beta in [-1.0, 0.0, 1.0] {
        for (shift, im) in [(0.3, 0.0), (1.0, 0.5)] {
            let z = Complex64::new(-f64::exp(beta + shift), im);
            let numeric = jfn_laplace_transform(z, BetaStar(beta), &cfg)?;
            let exact = 1.0 / ((-z).ln() - beta);
            out.push(Check {
                suite: "identities",
                name: format!("jfn laplace beta={beta} z={z}"),
                residual: (numeric - exact).norm() / exact.norm(),
                tolerance: 1e-6,
            });
        }
    }
    for beta in [-1.0, 0.0, 2.0] {
        let t = 1.0;
        let r = conv_identity_residual(0.5, t, BetaStar(beta))?;
        let scale = JfnTable::for_horizon(BetaStar(beta), t)?.value(t)?;
        out.push(Check {
            suite: "identities",
            name: format!("convolution s=0.5 t=1 beta={beta}"),
            residual: r / scale,
            tolerance: 1e-4,
        });
    }
    for k in 0..10 {
        // a deterministic spread over [0.1, 2]³
        let frac = |a: f64| (a * (k as f64 + 1.0)).fract();
        let (tau, x, y) = (0.1 + 1.9 * frac(0.618_034), 0.1 + 1.9 * frac(0.414_214), 0.1 + 1.9 * frac(0.732_051));
        out.push(Check {
            suite: "identities",
            name: format!("bessel tau={tau:.4} a={x:.4} b={y:.4}"),
            residual: bessel_identity_residual(tau, x, y)?,
            tolerance: 1e-8,
        });
    }
    for x in [1.5, 2.0, 2.5] {
        let s = k0_ascending_series(x);
        let cf = k0_continued_fraction(x)?;
        out.push(Check {
            suite: "identities",
            name: format!("K0 series vs continued fraction x={x}"),
            residual: (s - cf).abs() / cf,
            tolerance: 1e-12,
        });
    }
    Ok(())
}

fn combinatorics_checks(out: &mut Vec<Check>) -> Result<(), CliError> {
    for n in 2..=5usize {
        for m in 1..=5usize {
            let brute = enumerate(n, m)?.count() as f64;
            let p = (n * (n - 1) / 2) as f64;
            let formula = p * (p - 1.0).powi(m as i32 - 1);
            let counted = count(n, m)?.to_f64().unwrap_or(f64::NAN);
            out.push(Check {
                suite: "combinatorics",
                name: format!("|Dgm({n},{m})|"),
                residual: (brute - formula).abs().max((counted - formula).abs()),
                tolerance: 0.0,
            });
        }
    }
    Ok(())
}

fn gaussian_data() -> (Mixture2d, Mixture2d) {
    (
        Mixture2d::single([0.0, 0.0], 0.5).expect("positive variance"),
        Mixture2d::single([0.2, 0.0], 0.5).expect("positive variance"),
    )
}

fn n2_checks(out: &mut Vec<Check>) -> Result<(), CliError> {
    let (f, z) = gaussian_data();
    for t in [0.25, 1.0] {
        for beta in [-1.0, 0.0, 1.0] {
            let b = BetaStar(beta);
            let req = MomentRequest {
                n: 2,
                t,
                beta_star: b,
                f: vec![f.clone(); 2],
                z_ic: z.clone(),
                m_max: 1,
                plan: IntegrationPlan {
                    mode: Mode::AdaptiveQuadrature,
                    samples: 0,
                    rel_tol: 1e-6,
                    seed: 0,
                },
            };
            let engine = MomentEngine::new(b, t)?;
            let got = engine.correlation(&req)?.partial_sum;
            let j = JfnTable::for_horizon(b, t)?;
            let want = second_moment_closed_form(t, &[f.clone(), f.clone()], &[z.clone(), z.clone()], &j, 1e-8)?.total();
            out.push(Check {
                suite: "n2",
                name: format!("engine vs closed form t={t} beta={beta}"),
                residual: (got - want).abs() / want,
                tolerance: 1e-3,
            });
        }
    }
    Ok(())
}

fn semigroup_checks(out: &mut Vec<Check>) -> Result<(), CliError> {
    let (f, z) = gaussian_data();
    for beta in [0.0, 1.0] {
        let r = semigroup_residual(0.5, 1.0, &[f.clone(), f.clone()], &[z.clone(), z.clone()], BetaStar(beta), 1e-2)?;
        out.push(Check {
            suite: "semigroup",
            name: format!("s=0.5 t=1 beta={beta}"),
            residual: r.relative,
            tolerance: 1e-3,
        });
    }
    Ok(())
}
