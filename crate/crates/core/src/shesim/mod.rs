//! Monte Carlo simulation of the mollified SHE
//!
//! ```text
//! ∂_t Z = ½ΔZ + √β_ε ξ_ε Z      (Itô),   ξ_ε = φ_ε ∗ ξ
//! ```
//!
//! on an `N×N` periodic grid, and a deterministic two-particle oracle for
//! the second moment (see [`oracle`]).
//!
//! One step is `Z ← e^{½Δ dt}[Z·(1 + √β_ε ΔW_ε)]`: the noise multiplies the
//! field at the start of the step and the heat flow is applied exactly in
//! Fourier space. `ΔW_ε = h²Σ_z φ_ε(·−z) ξ_z` with independent
//! `ξ_z ~ N(0, dt/h²)`, so `Cov(ΔW_ε(x), ΔW_ε(y)) ≈ dt·δ_ε(x−y)`.

mod fft2;
pub mod oracle;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gausscalc::Mixture2d;
use crate::mollifier::{beta_eps, CouplingSchedule, Mollifier, MollifierError};
use fft2::{wavenumber, Fft2};

pub use oracle::{
    two_particle_oracle, OracleRequest, RadialSolver, RelativeGauss, RelativeProblem, RelativeSolver, SolverRegistry,
    SpectralSolver,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("field blew up at step {step} of replica {replica}")]
    Blowup { replica: u64, step: u64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("unknown relative solver `{name}` (known: {known:?})")]
    UnknownSolver { name: String, known: Vec<&'static str> },
    #[error(transparent)]
    Mollifier(#[from] MollifierError),
}

/// Grid, time step and coupling of one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimParams {
    pub epsilon: f64,
    pub beta_zero: f64,
    /// Points per side; a power of two.
    pub grid: usize,
    /// Torus side `L`.
    pub domain: f64,
    /// Largest time step; steps are shortened to land on requested times.
    pub dt: f64,
}

impl SimParams {
    pub fn spacing(&self) -> f64 {
        self.domain / self.grid as f64
    }

    /// `(L/N)²/4`.
    pub fn max_dt(&self) -> f64 {
        self.spacing().powi(2) / 4.0
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.grid < 4 || !self.grid.is_power_of_two() {
            return Err(SimError::Parameter(format!("grid must be a power of two ≥ 4, got {}", self.grid)));
        }
        if !(self.domain > 0.0 && self.domain.is_finite()) {
            return Err(SimError::Parameter(format!("domain must be positive, got {}", self.domain)));
        }
        CouplingSchedule::new(self.beta_zero, self.epsilon)?;
        let cells = self.epsilon / self.spacing();
        if cells < 4.0 {
            return Err(SimError::Parameter(format!(
                "mollifier under-resolved: ε·N/L = {cells:.3} < 4"
            )));
        }
        if !(self.dt > 0.0) || self.dt > self.max_dt() * (1.0 + 1e-12) {
            return Err(SimError::Parameter(format!(
                "dt = {} violates dt ≤ (L/N)²/4 = {}",
                self.dt,
                self.max_dt()
            )));
        }
        Ok(())
    }
}

/// Field values on the torus `[−L/2, L/2)²`, row-major, `x = −L/2 + i·h`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub values: Vec<f64>,
    pub time: f64,
}

/// Grid coordinate of index `i`.
fn coord(i: usize, h: f64, l: f64) -> f64 {
    -0.5 * l + i as f64 * h
}

/// `x` folded into `[−L/2, L/2)`.
fn wrap(x: f64, l: f64) -> f64 {
    x - l * (x / l + 0.5).floor()
}

/// Mixture sampled on the grid, each component at its nearest periodic image.
pub fn sample_on_grid(g: &Mixture2d, n: usize, l: f64) -> Vec<f64> {
    let h = l / n as f64;
    let mut out = vec![0.0; n * n];
    for c in g.components() {
        let norm = c.weight / (2.0 * std::f64::consts::PI * c.var);
        for i in 0..n {
            let dx = wrap(coord(i, h, l) - c.mean[0], l);
            for j in 0..n {
                let dy = wrap(coord(j, h, l) - c.mean[1], l);
                out[i * n + j] += norm * (-(dx * dx + dy * dy) / (2.0 * c.var)).exp();
            }
        }
    }
    out
}

/// Precomputed transforms and kernels for one [`SimParams`].
#[derive(Clone)]
pub struct Simulator {
    params: SimParams,
    beta_eps: f64,
    fft: Fft2,
    /// `h²·DFT(φ_ε)/N²` in the transposed layout.
    noise_kernel: Vec<f64>,
    /// `|k|²` in the transposed layout.
    k2: Vec<f64>,
    /// `e^{-|k|²dt/2}/N²` for `params.dt`.
    heat: Vec<f64>,
}

impl std::fmt::Debug for Simulator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Simulator")
            .field("params", &self.params)
            .field("beta_eps", &self.beta_eps)
            .finish()
    }
}

impl Simulator {
    pub fn new(params: SimParams, mollifier: &Mollifier) -> Result<Self, SimError> {
        params.validate()?;
        let (n, l, h) = (params.grid, params.domain, params.spacing());
        let eps = params.epsilon;
        if mollifier.support_radius() * eps > 0.5 * l {
            return Err(SimError::Parameter("mollifier support exceeds half the torus".into()));
        }
        let beta = beta_eps(&CouplingSchedule::new(params.beta_zero, eps)?)?;
        if beta < -1e-12 {
            return Err(SimError::Parameter(format!("β_ε = {beta} is negative")));
        }
        let beta = beta.max(0.0);
        let fft = Fft2::new(n);
        let mut scratch = fft.scratch();

        // φ_ε at periodic displacements from the origin, normalized to unit discrete mass
        let mut phi: Vec<Complex64> = (0..n * n)
            .map(|p| {
                let (i, j) = (p / n, p % n);
                let dx = wrap(i as f64 * h, l);
                let dy = wrap(j as f64 * h, l);
                Complex64::new(mollifier.scaled([dx, dy], eps), 0.0)
            })
            .collect();
        let mass: f64 = phi.iter().map(|c| c.re).sum::<f64>() * h * h;
        phi.iter_mut().for_each(|c| *c /= mass);
        fft.forward(&mut phi, &mut scratch);
        let nn = (n * n) as f64;
        let noise_kernel = phi.iter().map(|c| c.re * h * h / nn).collect();

        let k2: Vec<f64> = (0..n * n)
            .map(|p| {
                let (a, b) = (p / n, p % n);
                wavenumber(a, n, l).powi(2) + wavenumber(b, n, l).powi(2)
            })
            .collect();
        let heat = heat_multiplier(&k2, params.dt, nn);
        Ok(Self {
            params,
            beta_eps: beta,
            fft,
            noise_kernel,
            k2,
            heat,
        })
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn beta_eps(&self) -> f64 {
        self.beta_eps
    }

    pub fn initial_state(&self, z_ic: &Mixture2d) -> FieldState {
        FieldState {
            values: sample_on_grid(z_ic, self.params.grid, self.params.domain),
            time: 0.0,
        }
    }

    /// `h²Σ g·Z`.
    pub fn pair(&self, g: &[f64], state: &FieldState) -> f64 {
        let h = self.params.spacing();
        g.iter().zip(&state.values).map(|(a, b)| a * b).sum::<f64>() * h * h
    }

    /// One realization of `ΔW_ε` for a step of length `dt`.
    pub fn noise_increment<R: rand::Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> Vec<f64> {
        let mut buf = self.fft.scratch();
        let mut work = vec![Complex64::new(0.0, 0.0); self.fft.n().pow(2)];
        self.noise_into(dt, rng, &mut work, &mut buf);
        work.iter().map(|c| c.re).collect()
    }

    fn noise_into<R: rand::Rng + ?Sized>(&self, dt: f64, rng: &mut R, work: &mut [Complex64], scratch: &mut [Complex64]) {
        let sd = dt.sqrt() / self.params.spacing();
        for w in work.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *w = Complex64::new(sd * z, 0.0);
        }
        self.fft.forward(work, scratch);
        for (w, k) in work.iter_mut().zip(&self.noise_kernel) {
            *w *= *k;
        }
        self.fft.inverse(work, scratch);
    }

    /// One Itô–Euler step with exact heat propagation.
    pub fn step<R: rand::Rng + ?Sized>(&self, state: &mut FieldState, dt: f64, rng: &mut R) -> Result<(), SimError> {
        let mut work = vec![Complex64::new(0.0, 0.0); self.fft.n().pow(2)];
        let mut scratch = self.fft.scratch();
        self.step_with(state, dt, rng, &mut work, &mut scratch)
    }

    fn step_with<R: rand::Rng + ?Sized>(
        &self,
        state: &mut FieldState,
        dt: f64,
        rng: &mut R,
        work: &mut [Complex64],
        scratch: &mut [Complex64],
    ) -> Result<(), SimError> {
        if !(dt >= 0.0) || dt > self.params.max_dt() * (1.0 + 1e-12) {
            return Err(SimError::Parameter(format!(
                "dt = {dt} violates dt ≤ (L/N)²/4 = {}",
                self.params.max_dt()
            )));
        }
        if dt == 0.0 {
            return Ok(());
        }
        let sb = self.beta_eps.sqrt();
        if sb > 0.0 {
            self.noise_into(dt, rng, work, scratch);
            for (w, z) in work.iter_mut().zip(&state.values) {
                *w = Complex64::new(z * (1.0 + sb * w.re), 0.0);
            }
        } else {
            for (w, z) in work.iter_mut().zip(&state.values) {
                *w = Complex64::new(*z, 0.0);
            }
        }
        self.fft.forward(work, scratch);
        if dt == self.params.dt {
            work.iter_mut().zip(&self.heat).for_each(|(w, m)| *w *= *m);
        } else {
            let nn = work.len() as f64;
            work.iter_mut()
                .zip(&self.k2)
                .for_each(|(w, k2)| *w *= (-0.5 * k2 * dt).exp() / nn);
        }
        self.fft.inverse(work, scratch);
        for (z, w) in state.values.iter_mut().zip(work.iter()) {
            *z = w.re;
        }
        state.time += dt;
        Ok(())
    }
}

fn heat_multiplier(k2: &[f64], dt: f64, nn: f64) -> Vec<f64> {
    k2.iter().map(|k| (-0.5 * k * dt).exp() / nn).collect()
}

/// Step lengths covering `[from, to]` with steps at most `max_dt`.
fn schedule(from: f64, to: f64, max_dt: f64) -> (u64, f64) {
    let span = to - from;
    if span <= 0.0 {
        return (0, 0.0);
    }
    let k = (span / max_dt * (1.0 - 1e-12)).ceil().max(1.0) as u64;
    (k, span / k as f64)
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Noise stream of step `step` of replica `replica`.
pub fn step_rng(seed: u64, replica: u64, step: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed ^ splitmix(replica)));
    rng.set_stream(step);
    rng
}

/// Mean and jackknife standard error.
pub fn jackknife(samples: &[f64]) -> (f64, f64) {
    let r = samples.len();
    if r == 0 {
        return (f64::NAN, f64::NAN);
    }
    let total: f64 = samples.iter().sum();
    let mean = total / r as f64;
    if r < 2 {
        return (mean, f64::INFINITY);
    }
    let loo: Vec<f64> = samples.iter().map(|x| (total - x) / (r - 1) as f64).collect();
    let bar = loo.iter().sum::<f64>() / r as f64;
    let var = loo.iter().map(|t| (t - bar).powi(2)).sum::<f64>() * (r - 1) as f64 / r as f64;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub time: f64,
    pub value: f64,
    pub std_error: f64,
    pub replicas: u64,
    pub steps: u64,
}

pub const MIN_REPLICAS: u64 = 100;

/// `E[∏ᵢ⟨fᵢ, Z_t⟩]` at each of `times` (nondecreasing), from `replicas`
/// independent fields.
pub fn simulate_moments(
    sim: &Simulator,
    f: &[Mixture2d],
    z_ic: &Mixture2d,
    times: &[f64],
    replicas: u64,
    seed: u64,
) -> Result<Vec<MomentEstimate>, SimError> {
    if replicas < MIN_REPLICAS {
        return Err(SimError::Parameter(format!("need at least {MIN_REPLICAS} replicas, got {replicas}")));
    }
    if f.is_empty() {
        return Err(SimError::Parameter("need at least one test function".into()));
    }
    if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(SimError::Parameter(format!("times must be nonnegative and sorted: {times:?}")));
    }
    let (n, l) = (sim.params.grid, sim.params.domain);
    let tests: Vec<Vec<f64>> = f.iter().map(|g| sample_on_grid(g, n, l)).collect();
    let init = sim.initial_state(z_ic);
    let mut plan = Vec::with_capacity(times.len());
    let mut prev = 0.0;
    for &t in times {
        plan.push(schedule(prev, t, sim.params.dt));
        prev = t;
    }

    let per_replica: Vec<Result<Vec<f64>, SimError>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut state = init.clone();
            let mut work = vec![Complex64::new(0.0, 0.0); n * n];
            let mut scratch = sim.fft.scratch();
            let mut step = 0u64;
            let mut out = Vec::with_capacity(times.len());
            for &(k, dt) in &plan {
                for _ in 0..k {
                    let mut rng = step_rng(seed, r, step);
                    sim.step_with(&mut state, dt, &mut rng, &mut work, &mut scratch)?;
                    step += 1;
                    if !state.values.iter().all(|v| v.is_finite()) {
                        return Err(SimError::Blowup { replica: r, step });
                    }
                }
                out.push(tests.iter().map(|g| sim.pair(g, &state)).product());
            }
            Ok(out)
        })
        .collect();
    let per_replica = per_replica.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut steps = 0;
    Ok(times
        .iter()
        .zip(&plan)
        .enumerate()
        .map(|(i, (&t, &(k, _)))| {
            steps += k;
            let col: Vec<f64> = per_replica.iter().map(|row| row[i]).collect();
            let (value, std_error) = jackknife(&col);
            MomentEstimate {
                time: t,
                value,
                std_error,
                replicas,
                steps,
            }
        })
        .collect())
}

/// `E[∏ᵢ⟨fᵢ, Z_t⟩]` with `n = f.len()`.
pub fn estimate_moment(
    sim: &Simulator,
    t: f64,
    f: &[Mixture2d],
    z_ic: &Mixture2d,
    replicas: u64,
    seed: u64,
) -> Result<MomentEstimate, SimError> {
    Ok(simulate_moments(sim, f, z_ic, &[t], replicas, seed)?[0])
}
