//! Mollifier φ, pair profile Φ = φ∗φ, the constant β_φ, the coupling
//! schedule β_ε and the map (β°, β_φ) ↦ β⋆.

mod profiles;

use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use profiles::{Bump, ProfileRegistry, RadialProfile, SteepBump};

use crate::quad::{integrate, integrate_with_breaks, QuadConfig, QuadError};
use crate::spline::{EndCondition, UniformSpline};
use crate::specfun::{BetaStar, EULER_GAMMA};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MollifierError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("radial grid spacing {spacing} is coarser than R/16 = {limit}")]
    Resolution { spacing: f64, limit: f64 },
    #[error("quadrature failed: {0}")]
    Accuracy(#[from] QuadError),
    #[error("unknown mollifier profile '{name}' (known: {known})")]
    UnknownProfile { name: String, known: String },
}

/// Radial mollifier `φ(x) = c · g(|x|/R)` with unit mass.
#[derive(Debug, Clone)]
pub struct Mollifier {
    profile: Arc<dyn RadialProfile>,
    support_radius: f64,
    normalization: f64,
}

fn tight() -> QuadConfig {
    QuadConfig {
        abs_tol: 0.0,
        rel_tol: 1e-13,
        max_intervals: 4000,
    }
}

impl Mollifier {
    pub fn new(profile: Arc<dyn RadialProfile>, support_radius: f64) -> Result<Self, MollifierError> {
        if !(support_radius > 0.0 && support_radius.is_finite()) {
            return Err(MollifierError::Domain(format!(
                "support radius must be positive, got {support_radius}"
            )));
        }
        let g = profile.clone();
        let shape_mass = integrate(|r| g.shape(r) * r, 0.0, 1.0, &tight())?.value;
        let normalization = 1.0 / (2.0 * PI * support_radius * support_radius * shape_mass);
        Ok(Self {
            profile,
            support_radius,
            normalization,
        })
    }

    /// The standard bump on the unit disc.
    pub fn reference() -> Self {
        Self::new(Arc::new(Bump), 1.0).expect("unit bump is valid")
    }

    pub fn from_registry(registry: &ProfileRegistry, name: &str, support_radius: f64) -> Result<Self, MollifierError> {
        Self::new(registry.get(name)?, support_radius)
    }

    pub fn profile_name(&self) -> &'static str {
        self.profile.name()
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn radial(&self, r: f64) -> f64 {
        self.normalization * self.profile.shape(r.abs() / self.support_radius)
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        self.radial(x[0].hypot(x[1]))
    }

    /// `φ_ε(x) = ε^{-2} φ(x/ε)`.
    pub fn scaled(&self, x: [f64; 2], eps: f64) -> f64 {
        self.value([x[0] / eps, x[1] / eps]) / (eps * eps)
    }

    /// `x ↦ λ²φ(λx)`.
    pub fn rescaled(&self, lambda: f64) -> Result<Self, MollifierError> {
        if !(lambda > 0.0) {
            return Err(MollifierError::Domain(format!("scale must be positive, got {lambda}")));
        }
        Self::new(self.profile.clone(), self.support_radius / lambda)
    }

    pub fn mass(&self) -> Result<f64, MollifierError> {
        let r0 = self.support_radius;
        Ok(2.0 * PI * integrate(|r| self.radial(r) * r, 0.0, r0, &tight())?.value)
    }
}

/// Radial tabulation grid for Φ on `[0, 2R]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub intervals: usize,
}

impl Default for RadialGrid {
    fn default() -> Self {
        Self { intervals: 512 }
    }
}

/// `Φ(x) = ∫φ(x+y)φ(y)dy` tabulated on a radial grid.
#[derive(Debug, Clone)]
pub struct PairProfile {
    support_radius: f64,
    spline: UniformSpline,
}

/// `∫_{ℝ²} f(|y|) f(|y + r e₁|) dy` for a radial `f` supported in `[0, a]`.
fn radial_autoconvolution<F: Fn(f64) -> f64>(f: &F, a: f64, r: f64, cfg: &QuadConfig) -> Result<f64, QuadError> {
    let lo = (r - a).max(0.0);
    if lo >= a {
        return Ok(0.0);
    }
    let mut fail = None;
    let outer = integrate(
        |rho: f64| {
            let fr = f(rho);
            if fr == 0.0 {
                return 0.0;
            }
            let prod = r * rho;
            let theta0 = if prod == 0.0 {
                if rho.max(r) < a {
                    0.0
                } else {
                    return 0.0;
                }
            } else {
                let c = (a * a - r * r - rho * rho) / (2.0 * prod);
                if c >= 1.0 {
                    0.0
                } else if c <= -1.0 {
                    return 0.0;
                } else {
                    c.acos()
                }
            };
            let inner = integrate(
                |th: f64| f((r * r + rho * rho + 2.0 * prod * th.cos()).max(0.0).sqrt()),
                theta0,
                PI,
                cfg,
            );
            match inner {
                Ok(q) => 2.0 * fr * rho * q.value,
                Err(e) => {
                    fail.get_or_insert(e);
                    0.0
                }
            }
        },
        lo,
        a,
        cfg,
    );
    if let Some(e) = fail {
        return Err(e);
    }
    Ok(outer?.value)
}

/// Tabulate Φ = φ∗φ.
pub fn pair_profile(m: &Mollifier, grid: &RadialGrid) -> Result<PairProfile, MollifierError> {
    let r0 = m.support_radius();
    let a = 2.0 * r0;
    let spacing = a / grid.intervals.max(1) as f64;
    if grid.intervals == 0 || spacing > r0 / 16.0 {
        return Err(MollifierError::Resolution {
            spacing,
            limit: r0 / 16.0,
        });
    }
    let scale = m.radial(0.0).powi(2) * r0 * r0;
    let cfg = QuadConfig {
        abs_tol: 1e-15 * scale,
        rel_tol: 1e-12,
        max_intervals: 2000,
    };
    let f = |r: f64| m.radial(r);
    let values = (0..=grid.intervals)
        .map(|i| radial_autoconvolution(&f, r0, spacing * i as f64, &cfg))
        .collect::<Result<Vec<_>, _>>()?;
    // Φ is even and flat at the edge of its support
    let spline = UniformSpline::new(0.0, spacing, values, EndCondition::Clamped(0.0), EndCondition::Clamped(0.0));
    Ok(PairProfile {
        support_radius: a,
        spline,
    })
}

impl PairProfile {
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn value_radial(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= self.support_radius {
            0.0
        } else {
            self.spline.eval(r).max(0.0)
        }
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        self.value_radial(x[0].hypot(x[1]))
    }

    pub fn at_zero(&self) -> f64 {
        self.spline.nodes()[0]
    }

    pub fn nodes(&self) -> &[f64] {
        self.spline.nodes()
    }

    /// `δ_ε(x) = ε^{-2}Φ(x/ε)` at radius `r`.
    pub fn delta_eps(&self, r: f64, eps: f64) -> f64 {
        self.value_radial(r / eps) / (eps * eps)
    }

    /// `∫_{ℝ²} Φ`.
    pub fn mass(&self) -> Result<f64, MollifierError> {
        let h = self.spline.step();
        let n = self.spline.nodes().len() - 1;
        let breaks: Vec<f64> = (1..n).map(|i| i as f64 * h).collect();
        let q = integrate_with_breaks(|r| self.value_radial(r) * r, 0.0, self.support_radius, &breaks, &QuadConfig::rel(1e-12))?;
        Ok(2.0 * PI * q.value)
    }
}

/// `β_φ = ∫_{ℝ⁴} Φ(x)Φ(x')log|x−x'| = ∫_{ℝ²}(Φ∗Φ)(u) log|u| du`.
pub fn beta_phi(p: &PairProfile) -> Result<f64, MollifierError> {
    let a = p.support_radius();
    let scale = p.at_zero().powi(2) * a * a;
    let cfg = QuadConfig {
        abs_tol: 1e-15 * scale,
        rel_tol: 1e-10,
        max_intervals: 2000,
    };
    let f = |r: f64| p.value_radial(r);
    let mut fail = None;
    // graded mesh towards u = 0 for the r·log r factor
    let breaks: Vec<f64> = (1..30).map(|k| 2.0 * a * 0.5f64.powi(k)).collect();
    let q = integrate_with_breaks(
        |u: f64| {
            if u == 0.0 {
                return 0.0;
            }
            match radial_autoconvolution(&f, a, u, &cfg) {
                Ok(v) => v * u * u.ln(),
                Err(e) => {
                    fail.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        2.0 * a,
        &breaks,
        &QuadConfig {
            abs_tol: 1e-14,
            rel_tol: 1e-10,
            max_intervals: 2000,
        },
    );
    if let Some(e) = fail {
        return Err(e.into());
    }
    Ok(2.0 * PI * q?.value)
}

/// β° and ε for the critical coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingSchedule {
    pub beta_zero: f64,
    pub epsilon: f64,
}

impl CouplingSchedule {
    pub fn new(beta_zero: f64, epsilon: f64) -> Result<Self, MollifierError> {
        let s = Self { beta_zero, epsilon };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), MollifierError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(MollifierError::Domain(format!("epsilon must lie in (0,1), got {}", self.epsilon)));
        }
        if !self.beta_zero.is_finite() {
            return Err(MollifierError::Domain("beta_zero must be finite".into()));
        }
        Ok(())
    }
}

/// `β_ε = 2π/|log ε| + 2πβ°/|log ε|²`.
pub fn beta_eps(s: &CouplingSchedule) -> Result<f64, MollifierError> {
    s.validate()?;
    let l = s.epsilon.ln().abs();
    Ok(2.0 * PI / l + 2.0 * PI * s.beta_zero / (l * l))
}

/// `β⋆ = 2(log 2 + β° − β_φ − γ_EM)`.
pub fn beta_star(beta_zero: f64, beta_phi: f64) -> BetaStar {
    BetaStar(2.0 * (LN_2 + (beta_zero - beta_phi) - EULER_GAMMA))
}
