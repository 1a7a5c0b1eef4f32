//! Pre-limit second moment from the two-particle delta Bose gas.
//!
//! With `x_c = (x₁+x₂)/2` and `x_d = x₁−x₂`, `u(t,x₁,x₂) = E[Z(x₁)Z(x₂)]`
//! splits into a centre-of-mass heat flow with generator `¼Δ_c` and the
//! relative problem
//!
//! ```text
//! ∂_t u = Δ_d u + β_ε δ_ε(x_d) u.
//! ```
//!
//! For isotropic Gaussian data whose components share one variance the
//! initial product `z(x₁)z(x₂)` is a sum of products of Gaussians in `x_c`
//! and `x_d`, so the centre factor is closed form and only the relative
//! problem is solved numerically.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft2::{wavenumber, Fft2};
use super::SimError;
use crate::gausscalc::Mixture2d;
use crate::mollifier::PairProfile;

/// `weight · N(x; mean, var·I)` on the relative plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeGauss {
    pub weight: f64,
    pub mean: [f64; 2],
    pub var: f64,
}

impl RelativeGauss {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let d2 = (x[0] - self.mean[0]).powi(2) + (x[1] - self.mean[1]).powi(2);
        self.weight * (-d2 / (2.0 * self.var)).exp() / (2.0 * PI * self.var)
    }

    fn offset(&self) -> f64 {
        self.mean[0].hypot(self.mean[1])
    }
}

/// `⟨test, u(t)⟩` for `∂_t u = Δu + β_ε δ_ε u`, `u(0) = initial`.
#[derive(Debug, Clone)]
pub struct RelativeProblem<'a> {
    pub t: f64,
    pub epsilon: f64,
    pub beta_eps: f64,
    pub pair: &'a PairProfile,
    pub initial: RelativeGauss,
    pub test: Vec<RelativeGauss>,
}

impl RelativeProblem<'_> {
    fn potential(&self, r: f64) -> f64 {
        self.beta_eps * self.pair.delta_eps(r, self.epsilon)
    }

    /// Radius of the support of `δ_ε`.
    fn core(&self) -> f64 {
        self.pair.support_radius() * self.epsilon
    }

    /// Largest standard deviation among the evolved data and test functions.
    fn spread(&self) -> f64 {
        let v = self.test.iter().map(|g| g.var).fold(self.initial.var + 2.0 * self.t, f64::max);
        v.sqrt()
    }

    fn max_offset(&self) -> f64 {
        self.test.iter().map(RelativeGauss::offset).fold(self.initial.offset(), f64::max)
    }

    fn validate(&self) -> Result<(), SimError> {
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(SimError::Parameter(format!("t must be nonnegative, got {}", self.t)));
        }
        if !(self.epsilon > 0.0) || !self.beta_eps.is_finite() || self.beta_eps < 0.0 {
            return Err(SimError::Parameter("need ε > 0 and β_ε ≥ 0".into()));
        }
        if !(self.initial.var > 0.0) || self.test.iter().any(|g| !(g.var > 0.0)) {
            return Err(SimError::Parameter("Gaussian variances must be positive".into()));
        }
        Ok(())
    }
}

pub trait RelativeSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, p: &RelativeProblem<'_>) -> Result<f64, SimError>;
    /// The same method with every spacing halved, for error estimates.
    fn refined(&self) -> Box<dyn RelativeSolver>;
}

/// Strang splitting on an `M×M` periodic grid: half potential step, exact
/// heat step in Fourier space, half potential step.
#[derive(Debug, Clone)]
pub struct SpectralSolver {
    pub grid: usize,
    /// Torus side; chosen from the data when `None`.
    pub domain: Option<f64>,
    /// Time step in units of `ε²`.
    pub dt_scale: f64,
}

impl Default for SpectralSolver {
    fn default() -> Self {
        Self {
            grid: 256,
            domain: None,
            dt_scale: 0.02,
        }
    }
}

/// Torus side that keeps periodic images of the data below `1e-12`.
pub fn spectral_domain(p: &RelativeProblem<'_>) -> f64 {
    2.0 * (7.5 * p.spread() + p.max_offset() + p.core())
}

impl RelativeSolver for SpectralSolver {
    fn name(&self) -> &'static str {
        "spectral"
    }

    fn refined(&self) -> Box<dyn RelativeSolver> {
        Box::new(Self {
            grid: 2 * self.grid,
            domain: self.domain,
            dt_scale: self.dt_scale / 4.0,
        })
    }

    fn solve(&self, p: &RelativeProblem<'_>) -> Result<f64, SimError> {
        p.validate()?;
        let m = self.grid;
        if m < 8 || !m.is_power_of_two() {
            return Err(SimError::Parameter(format!("grid must be a power of two ≥ 8, got {m}")));
        }
        let l = self.domain.unwrap_or_else(|| spectral_domain(p));
        let h = l / m as f64;
        if p.beta_eps > 0.0 && p.epsilon / h < 4.0 {
            return Err(SimError::Parameter(format!(
                "δ_ε under-resolved: ε·M/L = {:.3} < 4 (M = {m}, L = {l:.3})",
                p.epsilon / h
            )));
        }
        let x = |i: usize| -0.5 * l + i as f64 * h;
        let mut u: Vec<Complex64> = (0..m * m)
            .map(|q| Complex64::new(p.initial.eval([x(q / m), x(q % m)]), 0.0))
            .collect();
        if p.t > 0.0 {
            let steps = (p.t / (self.dt_scale * p.epsilon * p.epsilon)).ceil().max(1.0) as usize;
            let dt = p.t / steps as f64;
            let half_v: Vec<f64> = (0..m * m)
                .map(|q| (0.5 * dt * p.potential(x(q / m).hypot(x(q % m)))).exp())
                .collect();
            let nn = (m * m) as f64;
            let heat: Vec<f64> = (0..m * m)
                .map(|q| (-(wavenumber(q / m, m, l).powi(2) + wavenumber(q % m, m, l).powi(2)) * dt).exp() / nn)
                .collect();
            let fft = Fft2::new(m);
            let mut scratch = fft.scratch();
            for _ in 0..steps {
                u.iter_mut().zip(&half_v).for_each(|(a, v)| *a *= *v);
                fft.forward(&mut u, &mut scratch);
                u.iter_mut().zip(&heat).for_each(|(a, k)| *a *= *k);
                fft.inverse(&mut u, &mut scratch);
                u.iter_mut().zip(&half_v).for_each(|(a, v)| *a = Complex64::new(a.re * v, 0.0));
            }
        }
        let mut acc = 0.0;
        for q in 0..m * m {
            let pt = [x(q / m), x(q % m)];
            acc += u[q].re * p.test.iter().map(|g| g.eval(pt)).sum::<f64>();
        }
        let v = acc * h * h;
        if !v.is_finite() {
            return Err(SimError::Parameter("spectral solve produced a non-finite value".into()));
        }
        Ok(v)
    }
}

/// Crank–Nicolson finite volumes in `r = |x_d|` on a graded mesh; radial
/// data only.
#[derive(Debug, Clone)]
pub struct RadialSolver {
    /// Cells per `ε` near the origin.
    pub cells_per_eps: f64,
    /// Ratio of neighbouring cell widths in the graded zone.
    pub growth: f64,
    /// Coarsest cell width in units of the data spread.
    pub coarse: f64,
    /// Time step in units of `ε²`.
    pub dt_scale: f64,
}

impl Default for RadialSolver {
    fn default() -> Self {
        Self {
            cells_per_eps: 64.0,
            growth: 1.02,
            coarse: 0.01,
            dt_scale: 0.25,
        }
    }
}

impl RadialSolver {
    /// All spacings divided by `factor`.
    pub fn refined(&self, factor: f64) -> Self {
        Self {
            cells_per_eps: self.cells_per_eps * factor,
            growth: 1.0 + (self.growth - 1.0) / factor,
            coarse: self.coarse / factor,
            dt_scale: self.dt_scale / (factor * factor),
        }
    }

    fn faces(&self, p: &RelativeProblem<'_>) -> Vec<f64> {
        let eps = p.epsilon;
        let fine = eps / self.cells_per_eps;
        let coarse = (self.coarse * p.spread()).max(fine);
        let r_max = 8.0 * p.spread() + 2.0 * p.core();
        let r_fine = 1.5 * p.core();
        let mut faces = vec![0.0];
        let mut w = fine;
        let mut r = 0.0;
        while r < r_max {
            r += w;
            faces.push(r);
            if r >= r_fine {
                w = (w * self.growth).min(coarse);
            }
        }
        faces
    }
}

impl RelativeSolver for RadialSolver {
    fn name(&self) -> &'static str {
        "radial"
    }

    fn refined(&self) -> Box<dyn RelativeSolver> {
        Box::new(RadialSolver::refined(self, 2.0))
    }

    fn solve(&self, p: &RelativeProblem<'_>) -> Result<f64, SimError> {
        p.validate()?;
        if p.initial.offset() > 0.0 || p.test.iter().any(|g| g.offset() > 0.0) {
            return Err(SimError::Precondition(
                "the radial solver needs data centred at the origin of the relative plane".into(),
            ));
        }
        if !(self.cells_per_eps >= 4.0 && self.growth >= 1.0 && self.coarse > 0.0 && self.dt_scale > 0.0) {
            return Err(SimError::Parameter(format!("invalid radial mesh {self:?}")));
        }
        let faces = self.faces(p);
        let k = faces.len() - 1;
        let centre: Vec<f64> = faces.windows(2).map(|f| 0.5 * (f[0] + f[1])).collect();
        // area/2π and flux coefficients r_{i+½}/(c_{i+1} − c_i)
        let vol: Vec<f64> = faces.windows(2).map(|f| 0.5 * (f[1] * f[1] - f[0] * f[0])).collect();
        let flux: Vec<f64> = (0..k)
            .map(|i| if i + 1 < k { faces[i + 1] / (centre[i + 1] - centre[i]) } else { 0.0 })
            .collect();
        let pot: Vec<f64> = centre.iter().map(|&r| p.potential(r)).collect();
        let mut u: Vec<f64> = centre.iter().map(|&r| p.initial.eval([r, 0.0])).collect();

        if p.t > 0.0 {
            let steps = (p.t / (self.dt_scale * p.epsilon * p.epsilon)).ceil().max(8.0) as usize;
            let dt = p.t / steps as f64;
            // two backward-Euler half steps damp the stiff modes before Crank–Nicolson
            for _ in 0..2 {
                theta_step(&mut u, &vol, &flux, &pot, 0.5 * dt, 1.0);
            }
            for _ in 1..steps {
                theta_step(&mut u, &vol, &flux, &pot, dt, 0.5);
            }
        }
        let v = 2.0
            * PI
            * (0..k)
                .map(|i| vol[i] * u[i] * p.test.iter().map(|g| g.eval([centre[i], 0.0])).sum::<f64>())
                .sum::<f64>();
        if !v.is_finite() {
            return Err(SimError::Parameter("radial solve produced a non-finite value".into()));
        }
        Ok(v)
    }
}

/// `(M − θdt·A)u⁺ = (M + (1−θ)dt·A)u` for the tridiagonal finite-volume operator.
fn theta_step(u: &mut [f64], vol: &[f64], flux: &[f64], pot: &[f64], dt: f64, theta: f64) {
    let k = u.len();
    let left = |i: usize| if i == 0 { 0.0 } else { flux[i - 1] };
    let apply = |u: &[f64], i: usize| {
        let mut a = -(left(i) + flux[i]) * u[i] + vol[i] * pot[i] * u[i];
        if i > 0 {
            a += left(i) * u[i - 1];
        }
        if i + 1 < k {
            a += flux[i] * u[i + 1];
        }
        a
    };
    let rhs: Vec<f64> = (0..k).map(|i| vol[i] * u[i] + (1.0 - theta) * dt * apply(u, i)).collect();
    // Thomas algorithm
    let sub = |i: usize| -theta * dt * left(i);
    let sup = |i: usize| -theta * dt * flux[i];
    let diag = |i: usize| vol[i] - theta * dt * (-(left(i) + flux[i]) + vol[i] * pot[i]);
    let mut c = vec![0.0; k];
    let mut d = vec![0.0; k];
    c[0] = sup(0) / diag(0);
    d[0] = rhs[0] / diag(0);
    for i in 1..k {
        let den = diag(i) - sub(i) * c[i - 1];
        c[i] = sup(i) / den;
        d[i] = (rhs[i] - sub(i) * d[i - 1]) / den;
    }
    u[k - 1] = d[k - 1];
    for i in (0..k - 1).rev() {
        u[i] = d[i] - c[i] * u[i + 1];
    }
}

/// Name-keyed registry of relative solvers.
#[derive(Clone)]
pub struct SolverRegistry {
    entries: BTreeMap<&'static str, Arc<dyn RelativeSolver>>,
}

impl SolverRegistry {
    pub fn empty() -> Self {
        Self { entries: BTreeMap::new() }
    }

    pub fn register(&mut self, solver: Arc<dyn RelativeSolver>) {
        self.entries.insert(solver.name(), solver);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn RelativeSolver>, SimError> {
        self.entries.get(name).cloned().ok_or_else(|| SimError::UnknownSolver {
            name: name.to_string(),
            known: self.names(),
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

impl Default for SolverRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(SpectralSolver::default()));
        r.register(Arc::new(RadialSolver::default()));
        r
    }
}

impl fmt::Debug for SolverRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

/// Inputs of [`two_particle_oracle`]: `⟨f₁⊗f₂, u_ε(t)⟩` with `u_ε(0) = z⊗z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRequest {
    pub t: f64,
    pub f: [Mixture2d; 2],
    pub z_ic: Mixture2d,
    pub epsilon: f64,
    pub beta_eps: f64,
}

fn shared_variance(what: &str, gs: &[&Mixture2d]) -> Result<f64, SimError> {
    let vars: Vec<Option<f64>> = gs.iter().map(|g| g.common_variance()).collect();
    match vars.as_slice() {
        [Some(v), rest @ ..] if rest.iter().all(|w| matches!(w, Some(x) if (x - v).abs() <= 1e-12 * v)) => Ok(*v),
        _ => Err(SimError::Precondition(format!(
            "{what}: all mixture components must share one variance"
        ))),
    }
}

fn overlap_2d(d: [f64; 2], var: f64) -> f64 {
    (-(d[0] * d[0] + d[1] * d[1]) / (2.0 * var)).exp() / (2.0 * PI * var)
}

/// Pre-limit second moment `E[⟨f₁,Z_t⟩⟨f₂,Z_t⟩]` of the mollified SHE.
pub fn two_particle_oracle(req: &OracleRequest, pair: &PairProfile, solver: &dyn RelativeSolver) -> Result<f64, SimError> {
    if !(req.t >= 0.0 && req.t.is_finite()) {
        return Err(SimError::Parameter(format!("t must be nonnegative, got {}", req.t)));
    }
    let vz = shared_variance("initial data", &[&req.z_ic])?;
    let vf = shared_variance("test functions", &[&req.f[0], &req.f[1]])?;
    let z = req.z_ic.components();
    // centre of mass: variance v/2 at time 0, grows by t/2
    let centre_var = 0.5 * (vz + req.t) + 0.5 * vf;
    let mut total = 0.0;
    for a in z {
        for b in z {
            let m_ab = [0.5 * (a.mean[0] + b.mean[0]), 0.5 * (a.mean[1] + b.mean[1])];
            let mut test = Vec::new();
            for c in req.f[0].components() {
                for d in req.f[1].components() {
                    let m_cd = [0.5 * (c.mean[0] + d.mean[0]), 0.5 * (c.mean[1] + d.mean[1])];
                    let centre = overlap_2d([m_ab[0] - m_cd[0], m_ab[1] - m_cd[1]], centre_var);
                    test.push(RelativeGauss {
                        weight: c.weight * d.weight * centre,
                        mean: [c.mean[0] - d.mean[0], c.mean[1] - d.mean[1]],
                        var: 2.0 * vf,
                    });
                }
            }
            let problem = RelativeProblem {
                t: req.t,
                epsilon: req.epsilon,
                beta_eps: req.beta_eps,
                pair,
                initial: RelativeGauss {
                    weight: a.weight * b.weight,
                    mean: [a.mean[0] - b.mean[0], a.mean[1] - b.mean[1]],
                    var: 2.0 * vz,
                },
                test,
            };
            total += solver.solve(&problem)?;
        }
    }
    Ok(total)
}
