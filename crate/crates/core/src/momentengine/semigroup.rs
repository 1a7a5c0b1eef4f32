//! `(𝒫_s+𝔇_s)(𝒫_{t−s}+𝔇_{t−s}) = 𝒫_t+𝔇_t` at `n = 2`, term by term.
//!
//! In relative coordinates the middle factor of `𝔇_s𝔇_{t−s}` is
//! `𝒮𝒫_T𝒮* = (4πT)^{-1}`. Writing the first 𝔧-line as `t₁`, the second as
//! `a₂`, and `x`, `y` for the heat times on either side of the split at `s`,
//!
//! ```text
//! ⟨f, 𝔇_s𝔇_{t−s} z⟩ = 4π ∫ 𝔧(t₁) 𝔧(a₂) (x+y)^{-1} G(s−t₁−x, t−s−a₂−y)
//! ```
//!
//! over `t₁+x ≤ s`, `a₂+y ≤ t−s`, where `G` pairs `f`, `z` against the heat
//! factors. The 4D integral is computed by nested quadrature with
//! `t₁ = s e^{-u}`, `a₂ = (t−s) e^{-v}`, `x = X p²`, `y = Y q²`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::MomentError;
use crate::gausscalc::{second_moment_closed_form, GaussError, Mixture2d, RelativePairing};
use crate::quad::{integrate, QuadConfig, QuadError, Quadrature};
use crate::specfun::{BetaStar, JFunction, JfnTable, SpecFunError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemigroupCheck {
    pub free: f64,
    /// `⟨f, 𝒫_s𝔇_{t−s} z⟩`.
    pub heat_then_diagram: f64,
    /// `⟨f, 𝔇_s𝒫_{t−s} z⟩`.
    pub diagram_then_heat: f64,
    /// `⟨f, 𝔇_s𝔇_{t−s} z⟩`.
    pub diagram_diagram: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub relative: f64,
    /// Sum of the quadrature error estimates.
    pub error: f64,
}

/// `|⟨f,(𝒫_s+𝔇_s)(𝒫_{t−s}+𝔇_{t−s})z⟩ − ⟨f,(𝒫_t+𝔇_t)z⟩|` for `f = f₁⊗f₂`,
/// `z = z₁⊗z₂`.
pub fn semigroup_residual(
    s: f64,
    t: f64,
    f: &[Mixture2d; 2],
    z: &[Mixture2d; 2],
    beta: BetaStar,
    rel_tol: f64,
) -> Result<SemigroupCheck, MomentError> {
    if !(s > 0.0 && s < t && t.is_finite()) {
        return Err(MomentError::Request(format!("need 0 < s < t, got s={s}, t={t}")));
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(MomentError::Request(format!("rel_tol must lie in (0, 1), got {rel_tol}")));
    }
    let j = JfnTable::for_horizon(beta, t)?;
    let full = second_moment_closed_form(t, f, z, &j, rel_tol)?;
    let heated_f = [f[0].heated(s)?, f[1].heated(s)?];
    let heated_z = [z[0].heated(t - s)?, z[1].heated(t - s)?];
    let a = second_moment_closed_form(t - s, &heated_f, z, &j, rel_tol)?;
    let b = second_moment_closed_form(s, f, &heated_z, &j, rel_tol)?;
    let pairing = RelativePairing::new(t, f, z);
    let free = pairing.free()?;
    let (dd, dd_err) = double_diagram(&pairing, &j, s, t, rel_tol)?;

    let lhs = free + a.interaction + b.interaction + dd;
    let rhs = full.total();
    let residual = (lhs - rhs).abs();
    Ok(SemigroupCheck {
        free,
        heat_then_diagram: a.interaction,
        diagram_then_heat: b.interaction,
        diagram_diagram: dd,
        lhs,
        rhs,
        residual,
        relative: residual / rhs.abs(),
        error: full.error + a.error + b.error + dd_err,
    })
}

fn double_diagram(
    pairing: &RelativePairing,
    j: &JfnTable,
    s: f64,
    t: f64,
    rel_tol: f64,
) -> Result<(f64, f64), MomentError> {
    let r = t - s;
    let (ln_s, ln_r) = (s.ln(), r.ln());
    // tⱼ𝔧(tⱼ) ≈ (u + c)^{-2} for large u
    let (cu, cv) = ((-ln_s - j.beta_star().0).max(1.0), (-ln_r - j.beta_star().0).max(1.0));
    let cfg = |k: i32| QuadConfig::rel((rel_tol * 0.3f64.powi(k)).max(1e-10));
    let mut fail: Option<MomentError> = None;
    let note = |e: MomentError, fail: &mut Option<MomentError>| {
        fail.get_or_insert(e);
        0.0
    };
    let q = log_tail(
        |u: f64| {
            if fail.is_some() {
                return 0.0;
            }
            // t₁𝔧(t₁)
            let w1 = match j.ln_scaled(ln_s - u) {
                Ok(v) => v.exp(),
                Err(e) => return note(e.into(), &mut fail),
            };
            let big_x = -s * (-u).exp_m1();
            let inner = log_tail(
                |v: f64| {
                    if fail.is_some() {
                        return 0.0;
                    }
                    let w2 = match j.ln_scaled(ln_r - v) {
                        Ok(x) => x.exp(),
                        Err(e) => return note(e.into(), &mut fail),
                    };
                    let big_y = -r * (-v).exp_m1();
                    if !(big_x > 0.0 && big_y > 0.0) {
                        return 0.0;
                    }
                    let heat = integrate(
                        |p: f64| {
                            let x = big_x * p * p;
                            let q = integrate(
                                |q: f64| {
                                    let y = big_y * q * q;
                                    let d = x + y;
                                    if !(d > 0.0) {
                                        return 0.0;
                                    }
                                    let tau0 = (big_x - x).max(1e-300);
                                    let tau1 = (big_y - y).max(1e-300);
                                    match pairing.eval(tau0, tau1) {
                                        Ok(g) => 4.0 * big_x * big_y * p * q * g / d,
                                        Err(_) => f64::NAN,
                                    }
                                },
                                0.0,
                                1.0,
                                &cfg(3),
                            );
                            q.map(|q| q.value).unwrap_or(f64::NAN)
                        },
                        0.0,
                        1.0,
                        &cfg(2),
                    );
                    match heat {
                        Ok(h) if h.value.is_finite() => w2 * h.value,
                        Ok(_) => note(
                            MomentError::Gauss(GaussError::NumericalRank("heat pairing failed".into())),
                            &mut fail,
                        ),
                        Err(e) => note(SpecFunError::from(e).into(), &mut fail),
                    }
                },
                cv,
                &cfg(1),
            );
            match inner {
                Ok(q) => w1 * q.value,
                Err(e) => note(SpecFunError::from(e).into(), &mut fail),
            }
        },
        cu,
        &cfg(0),
    );
    if let Some(e) = fail {
        return Err(e);
    }
    let q = q.map_err(SpecFunError::from)?;
    Ok((4.0 * PI * q.value, 4.0 * PI * q.error))
}

/// `∫₀^∞ f(u) du` through `ξ = 1/(u+c)`, exact for `f ∝ (u+c)^{-2}`.
fn log_tail<F: FnMut(f64) -> f64>(mut f: F, c: f64, cfg: &QuadConfig) -> Result<Quadrature, QuadError> {
    integrate(
        |xi| {
            if xi <= 0.0 {
                return 0.0;
            }
            let v = f(1.0 / xi - c);
            if v == 0.0 {
                0.0
            } else {
                v / (xi * xi)
            }
        },
        0.0,
        1.0 / c,
        cfg,
    )
}
