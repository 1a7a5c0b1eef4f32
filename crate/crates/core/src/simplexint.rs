//! Integration over the time simplex `Σ_m(t)`: `2m+1` durations
//! `(τ₀, τ_½, τ₁, …, τ_m)` summing to `t`.
//!
//! Half-integer coordinates carry 𝔧-lines, which behave like `1/(τ ln²τ)`
//! and overflow `f64` long before their mass is negligible. Integrators
//! therefore work with the scaled integrand `h = g·∏_k τ_{k−½}`, and time
//! vectors carry `ln τ_{k−½}` exactly even when `τ_{k−½}` underflows.
//!
//! The Monte Carlo integrators draw the half-integer coordinates one after
//! another, each from the mixture `(1−λ)·q_r(τ) + λ/r` on `(0, r]` where `r`
//! is the time not yet used and `q_r(τ) = 1/(τ ln²(r′/τ))`, `r′ = e·r`
//! (inverse CDF `τ = r′ exp(−1/U)`, so `ln(r′/τ) = 1/U`). What is left is
//! spread uniformly over the `m+1` integer coordinates. The uniform part
//! keeps weights bounded for integrands that are not singular.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad::{integrate, integrate_to_infinity, QuadConfig, QuadError};

pub type IntegrandError = Box<dyn std::error::Error + Send + Sync>;

/// Integrand over the simplex; must be callable from several threads.
/// Integrators receive the scaled form `g·∏τ_{k−½}`.
pub type Integrand<'a> = dyn Fn(&TimeVector) -> Result<f64, IntegrandError> + Sync + 'a;

#[derive(Debug, Error)]
pub enum SimplexError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error("unknown integrator `{name}` (known: {known:?})")]
    UnknownIntegrator { name: String, known: Vec<&'static str> },
    #[error("integrand failed at τ = {at:?}: {source}")]
    Integrand {
        at: Vec<f64>,
        #[source]
        source: IntegrandError,
    },
    #[error("integrand returned {value} at τ = {at:?}")]
    NonFinite { at: Vec<f64>, value: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// A point of `Σ_m(t)`; `durations[2k] = τ_k`, `durations[2k−1] = τ_{k−½}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeVector {
    durations: Vec<f64>,
    ln_half: Vec<f64>,
}

impl TimeVector {
    pub fn new(durations: Vec<f64>, t: f64) -> Result<Self, SimplexError> {
        if durations.len() % 2 == 0 {
            return Err(SimplexError::Domain(format!("need 2m+1 durations, got {}", durations.len())));
        }
        if durations.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return Err(SimplexError::Domain(format!("durations must be nonnegative: {durations:?}")));
        }
        let s: f64 = durations.iter().sum();
        if (s - t).abs() > 1e-12 * t.max(1.0) {
            return Err(SimplexError::Domain(format!("durations sum to {s}, expected {t}")));
        }
        let ln_half = (1..=durations.len() / 2).map(|k| durations[2 * k - 1].ln()).collect();
        Ok(Self { durations, ln_half })
    }

    fn unchecked(durations: Vec<f64>, ln_half: Vec<f64>) -> Self {
        Self { durations, ln_half }
    }

    pub fn m(&self) -> usize {
        self.durations.len() / 2
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.durations
    }

    /// `τ_k`.
    pub fn integer(&self, k: usize) -> f64 {
        self.durations[2 * k]
    }

    /// `τ_{k−½}` for `k ≥ 1`; may underflow to zero.
    pub fn half(&self, k: usize) -> f64 {
        self.durations[2 * k - 1]
    }

    /// `ln τ_{k−½}`, exact even when `half(k)` underflows.
    pub fn ln_half(&self, k: usize) -> f64 {
        self.ln_half[k - 1]
    }

    /// `∏_k τ_{k−½}`.
    pub fn half_product(&self) -> f64 {
        self.ln_half.iter().sum::<f64>().exp()
    }

    pub fn total(&self) -> f64 {
        self.durations.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    AdaptiveQuadrature,
    MonteCarlo,
    QuasiMonteCarlo,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::AdaptiveQuadrature => "adaptive-quadrature",
            Mode::MonteCarlo => "monte-carlo",
            Mode::QuasiMonteCarlo => "quasi-monte-carlo",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Mode {
    type Err = SimplexError;

    fn from_str(s: &str) -> Result<Self, SimplexError> {
        [Mode::AdaptiveQuadrature, Mode::MonteCarlo, Mode::QuasiMonteCarlo]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| SimplexError::UnknownIntegrator {
                name: s.to_string(),
                known: vec!["adaptive-quadrature", "monte-carlo", "quasi-monte-carlo"],
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationPlan {
    pub mode: Mode,
    pub samples: u64,
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for IntegrationPlan {
    fn default() -> Self {
        Self {
            mode: Mode::MonteCarlo,
            samples: 100_000,
            rel_tol: 1e-2,
            seed: 0,
        }
    }
}

impl IntegrationPlan {
    pub fn validate(&self) -> Result<(), SimplexError> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 0.1) {
            return Err(SimplexError::Plan(format!("rel_tol must lie in (0, 0.1], got {}", self.rel_tol)));
        }
        if self.mode != Mode::AdaptiveQuadrature && self.samples < 1000 {
            return Err(SimplexError::Plan(format!("sampling modes need ≥ 1000 samples, got {}", self.samples)));
        }
        Ok(())
    }

    /// Same plan with a different seed.
    pub fn reseeded(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexEstimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: u64,
    /// `error > rel_tol·|value|`.
    pub accuracy_warning: bool,
}

impl SimplexEstimate {
    fn finish(value: f64, error: f64, evaluations: u64, rel_tol: f64) -> Self {
        Self {
            value,
            error,
            evaluations,
            accuracy_warning: error > rel_tol * value.abs(),
        }
    }
}

pub trait SimplexIntegrator: Send + Sync {
    fn name(&self) -> &'static str;

    /// `∫_{Σ_m(t)} h(τ)/∏τ_{k−½} dτ` for `m ≥ 1`, given the scaled integrand `h`.
    fn integrate(&self, m: usize, t: f64, h: &Integrand<'_>, plan: &IntegrationPlan)
        -> Result<SimplexEstimate, SimplexError>;
}

fn evaluate(g: &Integrand<'_>, tv: &TimeVector) -> Result<f64, SimplexError> {
    match g(tv) {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(SimplexError::NonFinite {
            at: tv.as_slice().to_vec(),
            value: v,
        }),
        Err(source) => Err(SimplexError::Integrand {
            at: tv.as_slice().to_vec(),
            source,
        }),
    }
}

/// Nested adaptive quadrature; `m = 1` only.
#[derive(Debug, Default)]
pub struct AdaptiveQuadrature;

impl SimplexIntegrator for AdaptiveQuadrature {
    fn name(&self) -> &'static str {
        Mode::AdaptiveQuadrature.name()
    }

    fn integrate(
        &self,
        m: usize,
        t: f64,
        h: &Integrand<'_>,
        plan: &IntegrationPlan,
    ) -> Result<SimplexEstimate, SimplexError> {
        if m != 1 {
            return Err(SimplexError::Plan(format!(
                "adaptive quadrature handles m = 1 only (got m = {m}); use a sampling mode"
            )));
        }
        let outer_cfg = QuadConfig::rel(0.1 * plan.rel_tol);
        let inner_cfg = QuadConfig::rel(0.01 * plan.rel_tol);
        let mut fail: Option<SimplexError> = None;
        let mut evals = 0u64;
        let ln_t = t.ln();
        // τ_½ = t e^{-u}, dτ_½ = τ_½ du
        let q = integrate_to_infinity(
            |u: f64| {
                if fail.is_some() {
                    return 0.0;
                }
                let half = t * (-u).exp();
                let rest = t - half;
                if rest <= 0.0 {
                    return 0.0;
                }
                let inner = integrate(
                    |tau0: f64| {
                        if fail.is_some() {
                            return 0.0;
                        }
                        let tau1 = (rest - tau0).max(0.0);
                        evals += 1;
                        match evaluate(h, &TimeVector::unchecked(vec![tau0, half, tau1], vec![ln_t - u])) {
                            Ok(v) => v,
                            Err(e) => {
                                fail = Some(e);
                                0.0
                            }
                        }
                    },
                    0.0,
                    rest,
                    &inner_cfg,
                );
                match inner {
                    Ok(q) => q.value,
                    Err(e) => {
                        fail.get_or_insert(e.into());
                        0.0
                    }
                }
            },
            0.0,
            &outer_cfg,
        );
        if let Some(e) = fail {
            return Err(e);
        }
        let q = q?;
        Ok(SimplexEstimate::finish(q.value, q.error, evals, plan.rel_tol))
    }
}

/// `t′ = e·t`.
fn log_proposal_scale(t: f64) -> f64 {
    std::f64::consts::E * t
}

/// Inverse CDF of `q(τ) = 1/(τ ln²(t′/τ))` on `(0, t]`.
pub fn log_proposal_sample(t: f64, u: f64) -> f64 {
    let tp = log_proposal_scale(t);
    (tp * (-1.0 / u).exp()).min(t)
}

fn log_proposal_ln_sample(t: f64, u: f64) -> f64 {
    (1.0 + t.ln() - 1.0 / u).min(t.ln())
}

pub fn log_proposal_density(t: f64, tau: f64) -> f64 {
    let l = (log_proposal_scale(t) / tau).ln();
    1.0 / (tau * l * l)
}

fn ln_factorial(m: usize) -> f64 {
    (1..=m).map(|k| (k as f64).ln()).sum()
}

/// Default weight `λ` of the uniform component in the half-integer proposal.
pub const UNIFORM_SHARE: f64 = 0.25;

/// One half-integer coordinate on `(0, t]` from the proposal mixture, as
/// `(τ, ln τ, 1/(τ·density))`.
fn half_sample(t: f64, u: f64, lam: f64) -> (f64, f64, f64) {
    let ln_tau = if u < lam {
        (t * u / lam).ln()
    } else {
        log_proposal_ln_sample(t, (u - lam) / (1.0 - lam))
    };
    // τ·density = (1−λ)/ln²(t′/τ) + λτ/t
    let l = 1.0 + t.ln() - ln_tau;
    let td = (1.0 - lam) / (l * l) + lam * (ln_tau - t.ln()).exp();
    (ln_tau.exp(), ln_tau, 1.0 / td)
}

/// Map `2m` uniforms to a simplex point and the weight
/// `1/(density·∏τ_{k−½})` applied to the scaled integrand; `None` on the
/// null set where the 𝔧-times use up all of `t`.
fn importance_point(m: usize, t: f64, u: &[f64], lam: f64) -> Option<(TimeVector, f64)> {
    let mut d = vec![0.0; 2 * m + 1];
    let mut ln_half = Vec::with_capacity(m);
    let mut r = t;
    let mut w = 1.0;
    for k in 1..=m {
        let (tau, ln_tau, wk) = half_sample(r, u[k - 1], lam);
        d[2 * k - 1] = tau;
        ln_half.push(ln_tau);
        r -= tau;
        w *= wk;
        if !(r > 0.0) {
            return None;
        }
    }
    if !(r > 0.0) {
        return None;
    }
    // uniform point of the m-simplex of side r from sorted uniforms
    let mut cuts: Vec<f64> = u[m..2 * m].to_vec();
    cuts.sort_by(f64::total_cmp);
    let mut prev = 0.0;
    for (k, c) in cuts.iter().enumerate() {
        d[2 * k] = r * (c - prev);
        prev = *c;
    }
    d[2 * m] = r * (1.0 - prev);
    w *= (m as f64 * r.ln() - ln_factorial(m)).exp();
    Some((TimeVector::unchecked(d, ln_half), w))
}

/// Running mean/variance, merged in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n as f64 / n as f64,
            m2: self.m2 + o.m2 + d * d * (self.n as f64 * o.n as f64) / n as f64,
        }
    }

    fn std_error(&self) -> f64 {
        if self.n < 2 {
            return f64::INFINITY;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

/// Samples per RNG stream; part of the determinism contract.
pub const BLOCK: u64 = 4096;

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

fn blocks(samples: u64) -> Vec<(u64, u64)> {
    let nb = samples.div_ceil(BLOCK);
    (0..nb).map(|b| (b, BLOCK.min(samples - b * BLOCK))).collect()
}

fn reduce(parts: Vec<Result<Moments, SimplexError>>) -> Result<Moments, SimplexError> {
    let mut acc = Moments::default();
    for p in parts {
        acc = acc.merge(p?);
    }
    Ok(acc)
}

/// Sampling law of a [`MonteCarlo`] integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Proposal {
    /// 𝔧-adapted mixture for the half-integer slots (see the module docs).
    LogSingular { uniform_share: f64 },
    /// Uniform on `Σ_m(t)`; only suitable for integrands without 𝔧 factors.
    Uniform,
}

/// Plain Monte Carlo; one ChaCha stream per block.
#[derive(Debug)]
pub struct MonteCarlo {
    pub proposal: Proposal,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        Self {
            proposal: Proposal::LogSingular {
                uniform_share: UNIFORM_SHARE,
            },
        }
    }
}

impl MonteCarlo {
    pub fn uniform() -> Self {
        Self {
            proposal: Proposal::Uniform,
        }
    }
}

impl SimplexIntegrator for MonteCarlo {
    fn name(&self) -> &'static str {
        Mode::MonteCarlo.name()
    }

    fn integrate(
        &self,
        m: usize,
        t: f64,
        h: &Integrand<'_>,
        plan: &IntegrationPlan,
    ) -> Result<SimplexEstimate, SimplexError> {
        let ln_volume = 2.0 * m as f64 * t.ln() - ln_factorial(2 * m);
        let parts: Vec<_> = blocks(plan.samples)
            .into_par_iter()
            .map(|(b, len)| {
                let mut rng = block_rng(plan.seed, b);
                let mut mom = Moments::default();
                let mut u = vec![0.0; 2 * m];
                for _ in 0..len {
                    let point = match self.proposal {
                        Proposal::LogSingular { uniform_share } => {
                            u.iter_mut().for_each(|x| *x = 1.0 - rng.gen::<f64>());
                            importance_point(m, t, &u, uniform_share)
                        }
                        Proposal::Uniform => {
                            let tv = sample_simplex(m, t, &mut rng)?;
                            let w = (ln_volume - (1..=m).map(|k| tv.ln_half(k)).sum::<f64>()).exp();
                            Some((tv, w))
                        }
                    };
                    let v = match point {
                        Some((tv, w)) => w * evaluate(h, &tv)?,
                        None => 0.0,
                    };
                    mom.push(v);
                }
                Ok(mom)
            })
            .collect();
        let mom = reduce(parts)?;
        Ok(SimplexEstimate::finish(mom.mean, mom.std_error(), mom.n, plan.rel_tol))
    }
}

/// Randomized QMC: independent Owen-scrambled Sobol replicates, error from
/// their spread.
#[derive(Debug)]
pub struct QuasiMonteCarlo {
    pub replicates: u32,
    pub uniform_share: f64,
}

impl Default for QuasiMonteCarlo {
    fn default() -> Self {
        Self {
            replicates: 16,
            uniform_share: UNIFORM_SHARE,
        }
    }
}

impl SimplexIntegrator for QuasiMonteCarlo {
    fn name(&self) -> &'static str {
        Mode::QuasiMonteCarlo.name()
    }

    fn integrate(
        &self,
        m: usize,
        t: f64,
        h: &Integrand<'_>,
        plan: &IntegrationPlan,
    ) -> Result<SimplexEstimate, SimplexError> {
        if 2 * m > sobol_burley::NUM_DIMENSIONS as usize {
            return Err(SimplexError::Plan(format!("quasi-Monte Carlo supports m ≤ {}", sobol_burley::NUM_DIMENSIONS / 2)));
        }
        let reps = self.replicates.max(2);
        let per = (plan.samples / reps as u64).max(1);
        if per > u32::MAX as u64 {
            return Err(SimplexError::Plan("too many samples per replicate".into()));
        }
        let means: Vec<Result<f64, SimplexError>> = (0..reps)
            .into_par_iter()
            .map(|r| {
                let scramble = (plan.seed as u32) ^ ((plan.seed >> 32) as u32).rotate_left(7) ^ r.wrapping_mul(0x9E37_79B9);
                // a random shift fills the f32 gaps of the Sobol points
                let mut rng = block_rng(plan.seed, u64::MAX - r as u64);
                let shift: Vec<f64> = (0..2 * m).map(|_| rng.gen::<f64>() * 2f64.powi(-24)).collect();
                let mut acc = 0.0;
                let mut u = vec![0.0; 2 * m];
                for i in 0..per as u32 {
                    for (d, x) in u.iter_mut().enumerate() {
                        let s = sobol_burley::sample(i, d as u32, scramble) as f64 + shift[d];
                        *x = 1.0 - s.min(1.0 - f64::EPSILON);
                    }
                    if let Some((tv, w)) = importance_point(m, t, &u, self.uniform_share) {
                        acc += w * evaluate(h, &tv)?;
                    }
                }
                Ok(acc / per as f64)
            })
            .collect();
        let mut mom = Moments::default();
        for v in means {
            mom.push(v?);
        }
        Ok(SimplexEstimate::finish(mom.mean, mom.std_error(), per * reps as u64, plan.rel_tol))
    }
}

/// Name-keyed registry of simplex integrators.
#[derive(Clone)]
pub struct IntegratorRegistry {
    entries: BTreeMap<&'static str, Arc<dyn SimplexIntegrator>>,
}

impl IntegratorRegistry {
    pub fn empty() -> Self {
        Self { entries: BTreeMap::new() }
    }

    pub fn register(&mut self, integrator: Arc<dyn SimplexIntegrator>) {
        self.entries.insert(integrator.name(), integrator);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn SimplexIntegrator>, SimplexError> {
        self.entries.get(name).cloned().ok_or_else(|| SimplexError::UnknownIntegrator {
            name: name.to_string(),
            known: self.names(),
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

impl Default for IntegratorRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(AdaptiveQuadrature));
        r.register(Arc::new(MonteCarlo::default()));
        r.register(Arc::new(QuasiMonteCarlo::default()));
        r
    }
}

impl fmt::Debug for IntegratorRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

/// `∫_{Σ_m(t)} g` with the integrator named by `plan.mode`; `m = 0` is a
/// point evaluation.
pub fn integrate_simplex(
    registry: &IntegratorRegistry,
    m: usize,
    t: f64,
    g: &Integrand<'_>,
    plan: &IntegrationPlan,
) -> Result<SimplexEstimate, SimplexError> {
    let h = |tv: &TimeVector| -> Result<f64, IntegrandError> { Ok(g(tv)? * tv.half_product()) };
    integrate_simplex_scaled(registry, m, t, &h, plan)
}

/// As [`integrate_simplex`], given `h = g·∏τ_{k−½}` instead of `g`.
pub fn integrate_simplex_scaled(
    registry: &IntegratorRegistry,
    m: usize,
    t: f64,
    h: &Integrand<'_>,
    plan: &IntegrationPlan,
) -> Result<SimplexEstimate, SimplexError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(SimplexError::Domain(format!("t must be positive, got {t}")));
    }
    plan.validate()?;
    if m == 0 {
        let v = evaluate(h, &TimeVector::unchecked(vec![t], vec![]))?;
        return Ok(SimplexEstimate::finish(v, 0.0, 1, plan.rel_tol));
    }
    registry.get(plan.mode.name())?.integrate(m, t, h, plan)
}

/// Uniform point of `Σ_m(t)` from normalized exponential spacings.
pub fn sample_simplex<R: Rng + ?Sized>(m: usize, t: f64, rng: &mut R) -> Result<TimeVector, SimplexError> {
    if m < 1 {
        return Err(SimplexError::Domain("sample_simplex needs m ≥ 1".into()));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(SimplexError::Domain(format!("t must be positive, got {t}")));
    }
    let e: Vec<f64> = (0..2 * m + 1).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    let mut d: Vec<f64> = e.iter().map(|x| t * x / s).collect();
    // absorb rounding in the largest coordinate
    let err = t - d.iter().sum::<f64>();
    let imax = (0..d.len()).max_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap_or(0);
    d[imax] += err;
    let ln_half = (1..=m).map(|k| d[2 * k - 1].ln()).collect();
    Ok(TimeVector::unchecked(d, ln_half))
}

/// Deterministic RNG stream `(seed, stream)` for callers of [`sample_simplex`].
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    block_rng(seed, stream)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proposal_is_normalized() {
        let t = 0.7;
        let q = crate::quad::integrate_to_infinity(
            |u: f64| {
                let tau = t * (-u).exp();
                tau * log_proposal_density(t, tau)
            },
            0.0,
            &QuadConfig::rel(1e-12),
        )
        .unwrap();
        assert!((q.value - 1.0).abs() < 1e-10, "{}", q.value);
        assert!((log_proposal_sample(t, 1.0) - t).abs() < 1e-15);
    }

    #[test]
    fn time_vector_validation() {
        assert!(TimeVector::new(vec![0.2, 0.3, 0.5], 1.0).is_ok());
        assert!(TimeVector::new(vec![0.2, 0.3], 0.5).is_err());
        assert!(TimeVector::new(vec![0.2, -0.3, 1.1], 1.0).is_err());
        assert!(TimeVector::new(vec![0.2, 0.3, 0.4], 1.0).is_err());
        let tv = TimeVector::new(vec![0.1, 0.2, 0.3, 0.15, 0.25], 1.0).unwrap();
        assert_eq!(tv.m(), 2);
        assert_eq!(tv.half(2), 0.15);
        assert_eq!(tv.integer(2), 0.25);
    }

    #[test]
    fn plan_validation() {
        let mut p = IntegrationPlan::default();
        assert!(p.validate().is_ok());
        p.samples = 10;
        assert!(p.validate().is_err());
        p.mode = Mode::AdaptiveQuadrature;
        assert!(p.validate().is_ok());
        p.rel_tol = 0.5;
        assert!(p.validate().is_err());
        assert_eq!("quasi-monte-carlo".parse::<Mode>().unwrap(), Mode::QuasiMonteCarlo);
        assert!("simpson".parse::<Mode>().is_err());
    }

    #[test]
    fn point_evaluation_at_m_zero() {
        let reg = IntegratorRegistry::default();
        let g = |tv: &TimeVector| -> Result<f64, IntegrandError> { Ok(tv.integer(0).powi(2)) };
        let e = integrate_simplex(&reg, 0, 1.5, &g, &IntegrationPlan::default()).unwrap();
        assert_eq!(e.value, 2.25);
        assert_eq!(e.error, 0.0);
    }

    #[test]
    fn nan_is_reported_with_location() {
        let reg = IntegratorRegistry::default();
        let g = |_: &TimeVector| -> Result<f64, IntegrandError> { Ok(f64::NAN) };
        let plan = IntegrationPlan {
            samples: 1000,
            ..Default::default()
        };
        match integrate_simplex(&reg, 1, 1.0, &g, &plan) {
            Err(SimplexError::NonFinite { at, .. }) => assert_eq!(at.len(), 3),
            other => panic!("{other:?}"),
        }
    }
}
