//! Limiting correlation functions `⟨f, (𝒫_t + 𝔇_t) z^{⊗n}⟩` assembled from
//! diagram contributions, the centered third moment, and the semigroup
//! check at `n = 2`.
//!
//! A diagram `((i₁,j₁),…,(i_m,j_m))` contributes
//!
//! ```text
//! ∫_{Σ_m(t)} ⟨f, 𝒫_{τ₀}𝒮*₁ (4π𝒫^𝔍_{τ½}) 𝒮₁𝒫_{τ₁}𝒮*₂ ⋯ (4π𝒫^𝔍_{τ_{m−½}}) 𝒮_m𝒫_{τ_m} z^{⊗n}⟩ dτ
//! ```
//!
//! evaluated right to left on Gaussian-mixture states.

mod semigroup;

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagrams::{classify, enumerate, DiagramError, DiagramIndex, Pair};
use crate::gausscalc::{inner_product, GaussError, GaussianMixtureState, Mixture2d};
use crate::simplexint::{integrate_simplex_scaled, IntegrandError, IntegrationPlan, IntegratorRegistry, SimplexError, TimeVector};
use crate::specfun::{BetaStar, JFunction, JfnTable, SpecFunError};

pub use semigroup::{semigroup_residual, SemigroupCheck};

/// Largest last-to-previous ratio of per-`m` totals accepted for extrapolation.
pub const MAX_TAIL_RATIO: f64 = 0.7;

#[derive(Debug, Error)]
pub enum MomentError {
    #[error("invalid request: {0}")]
    Request(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Gauss(#[from] GaussError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error("diagram {diagram}: {source}")]
    Integration {
        diagram: String,
        #[source]
        source: SimplexError,
    },
    #[error(transparent)]
    Simplex(#[from] SimplexError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentRequest {
    pub n: usize,
    pub t: f64,
    pub beta_star: BetaStar,
    /// One planar mixture per particle.
    pub f: Vec<Mixture2d>,
    pub z_ic: Mixture2d,
    #[serde(default = "default_m_max")]
    pub m_max: usize,
    #[serde(default)]
    pub plan: IntegrationPlan,
}

fn default_m_max() -> usize {
    6
}

impl MomentRequest {
    pub fn validate(&self) -> Result<(), MomentError> {
        if self.n < 1 {
            return Err(MomentError::Request("n must be at least 1".into()));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(MomentError::Request(format!("t must be positive, got {}", self.t)));
        }
        if !self.beta_star.0.is_finite() {
            return Err(MomentError::Request("beta_star must be finite".into()));
        }
        if self.f.len() != self.n {
            return Err(MomentError::Request(format!("need {} test-function factors, got {}", self.n, self.f.len())));
        }
        if self.m_max < 1 {
            return Err(MomentError::Request("m_max must be at least 1".into()));
        }
        self.plan.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramRow {
    pub diagram: String,
    pub pairs: Vec<Pair>,
    pub m: usize,
    pub degenerate: bool,
    pub value: f64,
    pub error: f64,
    pub evaluations: u64,
    pub accuracy_warning: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerM {
    pub m: usize,
    pub diagrams: usize,
    pub total: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentResult {
    pub free_term: f64,
    pub contributions: Vec<DiagramRow>,
    pub per_m: Vec<PerM>,
    /// `free_term + Σ contributions`.
    pub partial_sum: f64,
    /// Integration error of `partial_sum` (root sum of squares).
    pub error: f64,
    pub last_ratio: Option<f64>,
    pub truncation_tail_estimate: Option<f64>,
    /// `partial_sum`, withheld when the per-`m` totals do not decay.
    pub total: Option<f64>,
    pub truncation_rule: String,
    pub warnings: Vec<String>,
}

impl MomentResult {
    pub fn converged(&self) -> bool {
        self.total.is_some()
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of the `index`-th diagram of `Dgm(n, m)` in enumeration order.
pub fn diagram_seed(seed: u64, n: usize, m: usize, index: usize) -> u64 {
    splitmix(seed ^ splitmix(((n as u64) << 40) ^ ((m as u64) << 20) ^ index as u64))
}

/// Evaluator bound to one `(t, β⋆)` and a set of integrators.
pub struct MomentEngine {
    registry: IntegratorRegistry,
    jfn: Arc<dyn JFunction>,
    t: f64,
}

impl MomentEngine {
    pub fn new(beta: BetaStar, t: f64) -> Result<Self, MomentError> {
        Ok(Self::with_parts(IntegratorRegistry::default(), Arc::new(JfnTable::for_horizon(beta, t)?), t))
    }

    pub fn with_parts(registry: IntegratorRegistry, jfn: Arc<dyn JFunction>, t: f64) -> Self {
        Self { registry, jfn, t }
    }

    pub fn beta_star(&self) -> BetaStar {
        self.jfn.beta_star()
    }

    fn check(&self, req: &MomentRequest) -> Result<(), MomentError> {
        req.validate()?;
        if req.t != self.t || req.beta_star != self.jfn.beta_star() {
            return Err(MomentError::Request(format!(
                "engine built for (t={}, β⋆={}) got (t={}, β⋆={})",
                self.t,
                self.jfn.beta_star().0,
                req.t,
                req.beta_star.0
            )));
        }
        Ok(())
    }

    /// Integrand of diagram `d` at one time vector, multiplied by `∏τ_{k−½}`
    /// (each 𝔧-line enters as `τ𝔧(τ)`, which stays finite as `τ → 0`).
    pub fn diagram_integrand(
        &self,
        d: &DiagramIndex,
        f: &GaussianMixtureState,
        z: &GaussianMixtureState,
        tv: &TimeVector,
    ) -> Result<f64, GaussError> {
        let pairs = d.pairs();
        let m = pairs.len();
        // 𝒫_τ𝒮* is singular at τ = 0; that face has measure zero
        if (0..=m).any(|k| tv.integer(k) <= 0.0) {
            return Ok(0.0);
        }
        let mut state = z.apply_in(pairs[m - 1], tv.integer(m))?;
        for k in (1..=m).rev() {
            let tau = tv.half(k);
            let scaled = self.jfn.ln_scaled(tv.ln_half(k))?.exp();
            if tau > 0.0 {
                state = state.apply_j(tau, scaled)?;
            } else {
                // τ below the smallest subnormal: the heat step is the identity
                state.scale(4.0 * PI * scaled);
            }
            state = if k > 1 {
                state.apply_med(pairs[k - 1], pairs[k - 2], tv.integer(k - 1))?
            } else {
                state.apply_out(pairs[0], tv.integer(0))?
            };
        }
        inner_product(f, &state)
    }

    fn contribution_with(
        &self,
        d: &DiagramIndex,
        f: &GaussianMixtureState,
        z: &GaussianMixtureState,
        plan: &IntegrationPlan,
    ) -> Result<DiagramRow, MomentError> {
        let g = |tv: &TimeVector| -> Result<f64, IntegrandError> { Ok(self.diagram_integrand(d, f, z, tv)?) };
        let est = integrate_simplex_scaled(&self.registry, d.m(), self.t, &g, plan).map_err(|source| {
            MomentError::Integration {
                diagram: d.to_string(),
                source,
            }
        })?;
        Ok(DiagramRow {
            diagram: d.to_string(),
            pairs: d.pairs().to_vec(),
            m: d.m(),
            degenerate: classify(d).degenerate,
            value: est.value,
            error: est.error,
            evaluations: est.evaluations,
            accuracy_warning: est.accuracy_warning,
        })
    }

    /// `⟨f, 𝔇_t^{d} z^{⊗n}⟩` with its integration error; the plan is used as given.
    pub fn diagram_contribution(&self, d: &DiagramIndex, req: &MomentRequest) -> Result<Estimate, MomentError> {
        self.check(req)?;
        if d.n() != req.n {
            return Err(MomentError::Request(format!("diagram on {} particles, request n = {}", d.n(), req.n)));
        }
        let (f, z) = states(req);
        let row = self.contribution_with(d, &f, &z, &req.plan)?;
        Ok(Estimate {
            value: row.value,
            error: row.error,
        })
    }

    /// Free term plus all diagrams with `m ≤ m_max`, optionally restricted.
    fn sum_diagrams(
        &self,
        req: &MomentRequest,
        keep: &(dyn Fn(&DiagramIndex) -> bool + Sync),
    ) -> Result<MomentResult, MomentError> {
        self.check(req)?;
        let (f, z) = states(req);
        let free_term = inner_product(&f, &z.heat(req.t)?)?;
        let mut contributions = Vec::new();
        let mut per_m = Vec::new();
        if req.n >= 2 {
            for m in 1..=req.m_max {
                let jobs: Vec<(usize, DiagramIndex)> =
                    enumerate(req.n, m)?.enumerate().filter(|(_, d)| keep(d)).collect();
                if jobs.is_empty() {
                    continue;
                }
                let rows: Vec<Result<DiagramRow, MomentError>> = jobs
                    .par_iter()
                    .map(|(idx, d)| {
                        let plan = req.plan.reseeded(diagram_seed(req.plan.seed, req.n, m, *idx));
                        self.contribution_with(d, &f, &z, &plan)
                    })
                    .collect();
                let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
                per_m.push(PerM {
                    m,
                    diagrams: rows.len(),
                    total: rows.iter().map(|r| r.value).sum(),
                    error: rows.iter().map(|r| r.error * r.error).sum::<f64>().sqrt(),
                });
                contributions.extend(rows);
            }
        }
        Ok(assemble(free_term, contributions, per_m, req))
    }

    pub fn correlation(&self, req: &MomentRequest) -> Result<MomentResult, MomentError> {
        self.sum_diagrams(req, &|_| true)
    }

    /// Both routes to `E[(⟨f,Z⟩ − E⟨f,Z⟩)³]` at `n = 3` with `f^{⊗3}`.
    pub fn third_moment_routes(&self, f: &Mixture2d, req: &MomentRequest) -> Result<ThirdMomentCheck, MomentError> {
        if req.n != 3 {
            return Err(MomentError::Request(format!("third moment needs n = 3, got {}", req.n)));
        }
        let req3 = MomentRequest {
            f: vec![f.clone(); 3],
            ..req.clone()
        };
        let nondeg = self.sum_diagrams(&req3, &|d| !classify(d).degenerate)?;
        let direct = Estimate {
            value: nondeg.partial_sum - nondeg.free_term,
            error: nondeg.error,
        };
        // independent streams for the cumulant route
        let plan_b = req.plan.reseeded(splitmix(req.plan.seed ^ 0x5EED_0000_0000_0003));
        let full3 = self.correlation(&MomentRequest {
            plan: plan_b,
            ..req3.clone()
        })?;
        let full2 = self.correlation(&MomentRequest {
            n: 2,
            f: vec![f.clone(); 2],
            plan: plan_b,
            ..req3.clone()
        })?;
        let mean = f.overlap(&req.z_ic.heated(req.t)?);
        let x3 = full3.partial_sum;
        let x2 = full2.partial_sum;
        let value = x3 - 3.0 * x2 * mean + 2.0 * mean.powi(3);
        let error = (full3.error.powi(2) + (3.0 * mean * full2.error).powi(2)).sqrt();
        let cumulant = Estimate { value, error };
        let combined = (direct.error.powi(2) + cumulant.error.powi(2)).sqrt();
        Ok(ThirdMomentCheck {
            nondegenerate_sum: direct,
            cumulant_route: cumulant,
            first_moment: mean,
            discrepancy_sigma: (direct.value - cumulant.value).abs() / combined,
            nondegenerate: nondeg,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThirdMomentCheck {
    pub nondegenerate_sum: Estimate,
    pub cumulant_route: Estimate,
    pub first_moment: f64,
    /// `|route A − route B|` in units of the combined error.
    pub discrepancy_sigma: f64,
    pub nondegenerate: MomentResult,
}

fn states(req: &MomentRequest) -> (GaussianMixtureState, GaussianMixtureState) {
    (
        GaussianMixtureState::tensor(&req.f),
        GaussianMixtureState::tensor(&vec![req.z_ic.clone(); req.n]),
    )
}

fn assemble(free_term: f64, contributions: Vec<DiagramRow>, per_m: Vec<PerM>, req: &MomentRequest) -> MomentResult {
    let partial_sum = free_term + contributions.iter().map(|r| r.value).sum::<f64>();
    let error = contributions.iter().map(|r| r.error * r.error).sum::<f64>().sqrt();
    let mut warnings = Vec::new();
    if contributions.iter().any(|r| r.accuracy_warning) {
        warnings.push(format!(
            "{} diagram(s) above the requested relative tolerance {}",
            contributions.iter().filter(|r| r.accuracy_warning).count(),
            req.plan.rel_tol
        ));
    }
    // the series terminates when Dgm(n, m) is empty beyond the last m
    let terminated = req.n <= 2;
    let (last_ratio, tail) = match per_m.as_slice() {
        _ if terminated => (None, Some(0.0)),
        [.., a, b] if a.total > 0.0 => {
            let q = b.total / a.total;
            let tail = (q < 1.0).then(|| b.total * q / (1.0 - q));
            (Some(q), tail)
        }
        _ => (None, None),
    };
    let total = match last_ratio {
        Some(q) if q > MAX_TAIL_RATIO => {
            warnings.push(format!(
                "per-m totals do not decay: last ratio {q:.3} > {MAX_TAIL_RATIO} at m_max = {}",
                req.m_max
            ));
            None
        }
        None if !terminated => {
            warnings.push("fewer than two per-m totals; truncation error not estimated".into());
            None
        }
        _ => Some(partial_sum),
    };
    MomentResult {
        free_term,
        contributions,
        per_m,
        partial_sum,
        error,
        last_ratio,
        truncation_tail_estimate: if total.is_some() { tail } else { None },
        total,
        truncation_rule: format!("geometric extrapolation of per-m totals; refused above ratio {MAX_TAIL_RATIO}"),
        warnings,
    }
}

/// Convenience wrapper building a fresh engine.
pub fn diagram_contribution(d: &DiagramIndex, req: &MomentRequest) -> Result<Estimate, MomentError> {
    MomentEngine::new(req.beta_star, req.t)?.diagram_contribution(d, req)
}

pub fn correlation(req: &MomentRequest) -> Result<MomentResult, MomentError> {
    MomentEngine::new(req.beta_star, req.t)?.correlation(req)
}

/// Sum of the nondegenerate diagrams at `n = 3`, test function `f^{⊗3}`.
pub fn centered_third_moment(f: &Mixture2d, req: &MomentRequest) -> Result<Estimate, MomentError> {
    if req.n != 3 {
        return Err(MomentError::Request(format!("third moment needs n = 3, got {}", req.n)));
    }
    let engine = MomentEngine::new(req.beta_star, req.t)?;
    let req3 = MomentRequest {
        f: vec![f.clone(); 3],
        ..req.clone()
    };
    let r = engine.sum_diagrams(&req3, &|d| !classify(d).degenerate)?;
    Ok(Estimate {
        value: r.partial_sum - r.free_term,
        error: r.error,
    })
}
