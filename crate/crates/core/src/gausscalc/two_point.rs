//! Two-particle moment in centre-of-mass / relative coordinates
//! `x_c = (x₁+x₂)/2`, `x_d = x₁ − x₂`:
//!
//! ```text
//! ρ(t/2, x_c−x_c′) · ( ρ(2t, x_d−x_d′) + ∫_{Σ₁(t)} ρ(2τ₀,x_d) 4π𝔧(τ_½) ρ(2τ₁,x_d′) dτ )
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::linalg::LinearFormIntegral;
use super::{heat2d, GaussError, Mixture2d};
use crate::quad::{integrate, integrate_to_infinity, integrate_with_breaks, QuadConfig};
use crate::specfun::{bessel_k0, JFunction};

/// `∫₀^τ ρ(2(τ−s), x_d) ρ(2s, x_d′) ds` by quadrature, for radii `a = |x_d|`, `b = |x_d′|`.
pub fn bessel_identity_lhs(tau: f64, a: f64, b: f64) -> Result<f64, GaussError> {
    if !(tau > 0.0 && a > 0.0 && b > 0.0) {
        return Err(GaussError::Domain("need tau, |x_d|, |x_d'| > 0".into()));
    }
    // peak of the exponent −a²/4(τ−s) − b²/4s
    let peak = tau * b / (a + b);
    let breaks = [0.25 * peak, 0.5 * peak, peak, peak + 0.5 * (tau - peak), peak + 0.75 * (tau - peak)];
    let cfg = QuadConfig {
        abs_tol: 1e-300,
        rel_tol: 1e-13,
        max_intervals: 2000,
    };
    let q = integrate_with_breaks(
        |s: f64| {
            let r = tau - s;
            if s <= 0.0 || r <= 0.0 {
                return 0.0;
            }
            (-a * a / (4.0 * r) - b * b / (4.0 * s)).exp() / (16.0 * PI * PI * r * s)
        },
        0.0,
        tau,
        &breaks,
        &cfg,
    )?;
    Ok(q.value)
}

/// `(8π²τ)^{-1} exp(−(a²+b²)/4τ) K₀(ab/2τ)`.
pub fn bessel_identity_rhs(tau: f64, a: f64, b: f64) -> Result<f64, GaussError> {
    if !(tau > 0.0 && a > 0.0 && b > 0.0) {
        return Err(GaussError::Domain("need tau, |x_d|, |x_d'| > 0".into()));
    }
    let x = a * b / (2.0 * tau);
    let k0 = bessel_k0(x)?;
    Ok(k0 * (-(a * a + b * b) / (4.0 * tau)).exp() / (8.0 * PI * PI * tau))
}

pub fn bessel_identity_residual(tau: f64, a: f64, b: f64) -> Result<f64, GaussError> {
    Ok((bessel_identity_lhs(tau, a, b)? - bessel_identity_rhs(tau, a, b)?).abs())
}

fn centre_and_difference(x: [[f64; 2]; 2]) -> ([f64; 2], [f64; 2]) {
    (
        [0.5 * (x[0][0] + x[1][0]), 0.5 * (x[0][1] + x[1][1])],
        [x[0][0] - x[1][0], x[0][1] - x[1][1]],
    )
}

/// Pointwise kernel of `𝒫_t + 𝔇_t` at `n = 2`, with the inner time integral
/// in Bessel form. Requires `x₁ ≠ x₂` and `x₁′ ≠ x₂′`.
pub fn second_moment_kernel(
    t: f64,
    x: [[f64; 2]; 2],
    xp: [[f64; 2]; 2],
    j: &dyn JFunction,
) -> Result<f64, GaussError> {
    if !(t > 0.0) {
        return Err(GaussError::Domain(format!("t must be positive, got {t}")));
    }
    let (c, d) = centre_and_difference(x);
    let (cp, dp) = centre_and_difference(xp);
    let a = d[0].hypot(d[1]);
    let b = dp[0].hypot(dp[1]);
    let cm = heat2d(0.5 * t, [c[0] - cp[0], c[1] - cp[1]])?;
    let free = heat2d(2.0 * t, [d[0] - dp[0], d[1] - dp[1]])?;
    let ln_t = t.ln();
    let mut fail = None;
    let q = integrate_to_infinity(
        |u: f64| {
            // τ_½ = t e^{-u}
            let tau_half = t * (-u).exp();
            let rest = t - tau_half;
            if rest <= 0.0 {
                return 0.0;
            }
            let w = match j.ln_scaled(ln_t - u) {
                Ok(v) => 4.0 * PI * v.exp(),
                Err(e) => {
                    fail.get_or_insert(GaussError::from(e));
                    return 0.0;
                }
            };
            match bessel_identity_rhs(rest, a, b) {
                Ok(v) => w * v,
                Err(e) => {
                    fail.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        &QuadConfig::rel(1e-10),
    );
    if let Some(e) = fail {
        return Err(e);
    }
    Ok(cm * (free + q?.value))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPointMoment {
    pub free: f64,
    pub interaction: f64,
    pub error: f64,
}

impl TwoPointMoment {
    pub fn total(&self) -> f64 {
        self.free + self.interaction
    }
}

/// Per-axis data of one combination of mixture components.
struct Combo {
    weight: f64,
    means: [[f64; 4]; 2],
    vars: [f64; 4],
}

fn combos(f: &[Mixture2d; 2], z: &[Mixture2d; 2]) -> Vec<Combo> {
    let mut out = Vec::new();
    for a in f[0].components() {
        for b in f[1].components() {
            for c in z[0].components() {
                for d in z[1].components() {
                    out.push(Combo {
                        weight: a.weight * b.weight * c.weight * d.weight,
                        means: [
                            [a.mean[0], b.mean[0], c.mean[0], d.mean[0]],
                            [a.mean[1], b.mean[1], c.mean[1], d.mean[1]],
                        ],
                        vars: [a.var, b.var, c.var, d.var],
                    });
                }
            }
        }
    }
    out
}

const UNIT: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

/// `∫∫ (f₁⊗f₂)(x) ∏ kernels (z₁⊗z₂)(x′)` where each kernel is a centred
/// Gaussian in a linear form of `(x₁, x₂, x₁′, x₂′)`.
fn gaussian_pairing(combos: &[Combo], kernels: &[([f64; 4], f64)]) -> Result<f64, GaussError> {
    let mut acc = 0.0;
    for c in combos {
        let mut ln = 0.0;
        for axis in 0..2 {
            let mut lf = LinearFormIntegral::new(4);
            for s in 0..4 {
                lf.factor(&UNIT[s], c.means[axis][s], c.vars[s]);
            }
            for (a, var) in kernels {
                lf.factor(a, 0.0, *var);
            }
            ln += lf.ln_value()?;
        }
        acc += c.weight * ln.exp();
    }
    Ok(acc)
}

const CENTRE: [f64; 4] = [0.5, 0.5, -0.5, -0.5];
const DIFF: [f64; 4] = [1.0, -1.0, 0.0, 0.0];
const DIFF_P: [f64; 4] = [0.0, 0.0, 1.0, -1.0];
const DIFF_BOTH: [f64; 4] = [1.0, -1.0, -1.0, 1.0];

/// Pairing of `f₁⊗f₂` and `z₁⊗z₂` against the centre-of-mass heat factor
/// of total time `t` and relative heat factors `ρ(2τ₀, x_d) ρ(2τ₁, x_d′)`.
pub(crate) struct RelativePairing {
    combos: Vec<Combo>,
    t: f64,
}

impl RelativePairing {
    pub fn new(t: f64, f: &[Mixture2d; 2], z: &[Mixture2d; 2]) -> Self {
        Self { combos: combos(f, z), t }
    }

    /// `⟨f₁⊗f₂, 𝒫_t(z₁⊗z₂)⟩`.
    pub fn free(&self) -> Result<f64, GaussError> {
        gaussian_pairing(&self.combos, &[(CENTRE, 0.5 * self.t), (DIFF_BOTH, 2.0 * self.t)])
    }

    pub fn eval(&self, tau0: f64, tau1: f64) -> Result<f64, GaussError> {
        gaussian_pairing(
            &self.combos,
            &[(CENTRE, 0.5 * self.t), (DIFF, 2.0 * tau0), (DIFF_P, 2.0 * tau1)],
        )
    }
}

/// `⟨f₁⊗f₂, (𝒫_t + 𝔇_t)(z₁⊗z₂)⟩` via the centre-of-mass / relative form.
pub fn second_moment_closed_form(
    t: f64,
    f: &[Mixture2d; 2],
    z: &[Mixture2d; 2],
    j: &dyn JFunction,
    rel_tol: f64,
) -> Result<TwoPointMoment, GaussError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(GaussError::Domain(format!("t must be positive, got {t}")));
    }
    let pairing = RelativePairing::new(t, f, z);
    let free = pairing.free()?;
    let ln_t = t.ln();
    let cfg = QuadConfig::rel(rel_tol);
    let inner_cfg = QuadConfig::rel(0.1 * rel_tol);
    let mut fail: Option<GaussError> = None;
    let outer = integrate_to_infinity(
        |u: f64| {
            let tau_half = t * (-u).exp();
            let rest = t - tau_half;
            if rest <= 0.0 {
                return 0.0;
            }
            let w = match j.ln_scaled(ln_t - u) {
                Ok(v) => 4.0 * PI * v.exp(),
                Err(e) => {
                    fail.get_or_insert(e.into());
                    return 0.0;
                }
            };
            let inner = integrate(
                |tau0: f64| {
                    let tau1 = rest - tau0;
                    if tau0 <= 0.0 || tau1 <= 0.0 {
                        return 0.0;
                    }
                    match pairing.eval(tau0, tau1) {
                        Ok(v) => v,
                        Err(e) => {
                            fail.get_or_insert(e);
                            0.0
                        }
                    }
                },
                0.0,
                rest,
                &inner_cfg,
            );
            match inner {
                Ok(q) => w * q.value,
                Err(e) => {
                    fail.get_or_insert(e.into());
                    0.0
                }
            }
        },
        0.0,
        &cfg,
    );
    if let Some(e) = fail {
        return Err(e);
    }
    let q = outer?;
    Ok(TwoPointMoment {
        free,
        interaction: q.value,
        error: q.error,
    })
}
