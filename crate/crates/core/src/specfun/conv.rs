//! The two-time convolution identity for 𝔧:
//!
//! ```text
//! 𝔧(t) = ∫₀^s dt₁ ∫_s^t dt₂ 𝔧(t₁) (t₂ − t₁)^{-1} 𝔧(t − t₂),   0 < s < t.
//! ```
//!
//! Both 𝔧 factors behave like `1/(τ ln²τ)` at their endpoint, so the
//! quadrature runs in `u, v` with `t₁ = s e^{-u}` and `t − t₂ = (t−s) e^{-v}`,
//! which turns each endpoint into an algebraic `1/u²` tail.

use super::jfn::{JFunction, JfnTable};
use super::{BetaStar, SpecFunError};
use crate::quad::{integrate_to_infinity, integrate_with_breaks, QuadConfig};

const REL_TOL: f64 = 1e-8;

fn quad_cfg(rel_tol: f64) -> QuadConfig {
    QuadConfig {
        abs_tol: 0.0,
        rel_tol,
        max_intervals: 4000,
    }
}

/// The double integral on the right-hand side.
pub fn conv_identity_rhs(s: f64, t: f64, beta: BetaStar) -> Result<f64, SpecFunError> {
    if !(s > 0.0 && s < t && t.is_finite()) {
        return Err(SpecFunError::Domain(format!("need 0 < s < t, got s={s}, t={t}")));
    }
    let table = JfnTable::for_horizon(beta, t)?;
    conv_identity_rhs_with(&table, s, t, REL_TOL)
}

pub(crate) fn conv_identity_rhs_with<J: JFunction + ?Sized>(j: &J, s: f64, t: f64, rel_tol: f64) -> Result<f64, SpecFunError> {
    conv_identity_rhs_split(j, s, t - s, rel_tol)
}

/// Right-hand side at `t = s + r`, given `s` and `r` separately so that a
/// short second interval is not lost to cancellation.
pub(crate) fn conv_identity_rhs_split<J: JFunction + ?Sized>(j: &J, s: f64, r: f64, rel_tol: f64) -> Result<f64, SpecFunError> {
    let (ln_s, ln_r) = (s.ln(), r.ln());
    let mut failure: Option<SpecFunError> = None;
    let mut outer = |u: f64| -> f64 {
        // t₁·𝔧(t₁) with t₁ = s e^{-u}
        let a = match j.ln_scaled(ln_s - u) {
            Ok(v) => v.exp(),
            Err(e) => {
                failure.get_or_insert(e);
                return 0.0;
            }
        };
        let gap_u = s * (-(-u).exp_m1()); // s − t₁ ≥ 0
        let mut inner_fail = None;
        let inner = integrate_to_infinity(
            |v: f64| {
                let b = match j.ln_scaled(ln_r - v) {
                    Ok(x) => x.exp(),
                    Err(e) => {
                        inner_fail.get_or_insert(e);
                        return 0.0;
                    }
                };
                let gap = gap_u + r * (-(-v).exp_m1());
                b / gap
            },
            0.0,
            &quad_cfg(rel_tol),
        );
        if let Some(e) = inner_fail {
            failure.get_or_insert(e);
            return 0.0;
        }
        match inner {
            Ok(q) => a * q.value,
            Err(e) => {
                failure.get_or_insert(e.into());
                0.0
            }
        }
    };
    // the inner integral has a ln(1/u) singularity at u = 0
    let head = integrate_with_breaks(&mut outer, 0.0, 1.0, &[1e-6, 1e-3, 0.1], &quad_cfg(rel_tol));
    let head = match head {
        Ok(q) => q.value,
        Err(e) => return Err(failure.unwrap_or(e.into())),
    };
    let tail = integrate_to_infinity(&mut outer, 1.0, &quad_cfg(rel_tol));
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(head + tail?.value)
}

/// `|𝔧(t) − RHS|`.
pub fn conv_identity_residual(s: f64, t: f64, beta: BetaStar) -> Result<f64, SpecFunError> {
    if !(s > 0.0 && s < t && t.is_finite()) {
        return Err(SpecFunError::Domain(format!("need 0 < s < t, got s={s}, t={t}")));
    }
    let table = JfnTable::for_horizon(beta, t)?;
    let lhs = table.value(t)?;
    let rhs = conv_identity_rhs_with(&table, s, t, REL_TOL)?;
    Ok((lhs - rhs).abs())
}
