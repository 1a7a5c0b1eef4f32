//! The interaction weight
//!
//! ```text
//! 𝔧(t, β⋆) = ∫₀^∞ t^{α-1} e^{β⋆ α} / Γ(α) dα
//! ```
//!
//! attached to every double line of a diagram. Internally everything is
//! computed as `ln(t·𝔧(t))` as a function of `ln t`, which stays finite from
//! `t → 0` (where `t·𝔧 ~ |ln t|^{-2}`) to large `t` (where `𝔧` grows like
//! `exp(e^{β⋆} t)`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use super::{BetaStar, SpecFunError};
use crate::quad::{integrate_to_infinity, integrate_with_breaks, QuadConfig};
use crate::spline::UniformSpline;

/// Controls for the α-quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JfnEvalConfig {
    pub alpha_cutoff: f64,
    pub rel_tol: f64,
    pub split_point: f64,
}

impl Default for JfnEvalConfig {
    fn default() -> Self {
        Self {
            alpha_cutoff: 1e6,
            rel_tol: 1e-11,
            split_point: 1.0,
        }
    }
}

impl JfnEvalConfig {
    pub fn validate(&self) -> Result<(), SpecFunError> {
        if !(self.split_point > 0.0 && self.alpha_cutoff > self.split_point) {
            return Err(SpecFunError::Config(format!(
                "need alpha_cutoff > split_point > 0 (got {} and {})",
                self.alpha_cutoff, self.split_point
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-3) {
            return Err(SpecFunError::Config(format!(
                "rel_tol must lie in (0, 1e-3], got {}",
                self.rel_tol
            )));
        }
        Ok(())
    }
}

/// Anything that can evaluate 𝔧 for a fixed β⋆.
pub trait JFunction: Send + Sync {
    fn beta_star(&self) -> BetaStar;

    /// `ln(t·𝔧(t, β⋆))` as a function of `ln t`.
    fn ln_scaled(&self, ln_t: f64) -> Result<f64, SpecFunError>;

    fn value(&self, t: f64) -> Result<f64, SpecFunError> {
        if !(t > 0.0) {
            return Err(SpecFunError::Domain(format!("jfn requires t > 0, got {t}")));
        }
        finite_value(self.ln_scaled(t.ln())? - t.ln())
    }
}

fn finite_value(ln_v: f64) -> Result<f64, SpecFunError> {
    let v = ln_v.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SpecFunError::Accuracy {
            estimate: v,
            error_bound: f64::INFINITY,
        })
    }
}

/// Direct evaluation by adaptive quadrature in α.
#[derive(Debug, Clone, Copy)]
pub struct Jfn {
    beta: BetaStar,
    cfg: JfnEvalConfig,
}

impl Jfn {
    pub fn new(beta: BetaStar, cfg: JfnEvalConfig) -> Result<Self, SpecFunError> {
        cfg.validate()?;
        Ok(Self { beta, cfg })
    }

    pub fn with_defaults(beta: BetaStar) -> Self {
        Self {
            beta,
            cfg: JfnEvalConfig::default(),
        }
    }

    pub fn config(&self) -> &JfnEvalConfig {
        &self.cfg
    }
}

impl JFunction for Jfn {
    fn beta_star(&self) -> BetaStar {
        self.beta
    }

    fn ln_scaled(&self, ln_t: f64) -> Result<f64, SpecFunError> {
        ln_scaled_jfn(ln_t, self.beta.value(), &self.cfg)
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Root of ψ(α) = λ on `[lo, ∞)`, assuming ψ(lo) < λ.
fn digamma_root(lambda: f64, lo: f64) -> f64 {
    let mut a = lo;
    let mut b = (lo * 2.0).max(lambda.exp() + 1.0);
    while digamma(b) < lambda {
        a = b;
        b *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if digamma(mid) < lambda {
            a = mid;
        } else {
            b = mid;
        }
        if (b - a) <= 1e-14 * b {
            break;
        }
    }
    0.5 * (a + b)
}

pub(crate) fn ln_scaled_jfn(ln_t: f64, beta: f64, cfg: &JfnEvalConfig) -> Result<f64, SpecFunError> {
    if !ln_t.is_finite() {
        return Err(SpecFunError::Domain(format!("jfn requires finite ln t, got {ln_t}")));
    }
    let lambda = ln_t + beta;
    let split = cfg.split_point;
    let qcfg = QuadConfig::rel(cfg.rel_tol);

    // (0, split): 1/Γ(α) = α/Γ(α+1) removes the vanishing factor at α = 0.
    let shift1 = (lambda * split).max(0.0);
    let mut breaks = Vec::new();
    if lambda < 0.0 {
        let peak = -1.0 / lambda;
        for k in [0.25, 1.0, 4.0, 16.0] {
            if k * peak < split {
                breaks.push(k * peak);
            }
        }
    }
    let low = integrate_with_breaks(
        |a: f64| a * (a * lambda - ln_gamma(a + 1.0) - shift1).exp(),
        0.0,
        split,
        &breaks,
        &qcfg,
    )?;

    // (split, ∞): log-concave integrand, truncated 40 nats below its maximum.
    let log_f = |a: f64| a * lambda - ln_gamma(a);
    let peak = if digamma(split) >= lambda {
        split
    } else {
        digamma_root(lambda, split)
    };
    let log_max = log_f(peak);
    let width = peak.sqrt().max(1.0);
    let mut upper = peak + width;
    while log_f(upper) > log_max - 40.0 {
        upper = peak + 2.0 * (upper - peak);
        if upper > cfg.alpha_cutoff {
            upper = cfg.alpha_cutoff;
            if log_f(upper) > log_max - 40.0 {
                return Err(SpecFunError::Accuracy {
                    estimate: (log_max + upper.ln()).exp(),
                    error_bound: (log_f(upper) + upper.ln()).exp(),
                });
            }
            break;
        }
    }
    let mut breaks = vec![peak];
    for k in [-6.0, -3.0, -1.0, 1.0, 3.0, 6.0] {
        breaks.push(peak + k * width);
    }
    let high = integrate_with_breaks(|a| (log_f(a) - log_max).exp(), split, upper, &breaks, &qcfg)?;

    let ln_low = if low.value > 0.0 {
        low.value.ln() + shift1
    } else {
        f64::NEG_INFINITY
    };
    let ln_high = if high.value > 0.0 {
        high.value.ln() + log_max
    } else {
        f64::NEG_INFINITY
    };
    let out = log_add(ln_low, ln_high);
    if !out.is_finite() {
        return Err(SpecFunError::Accuracy {
            estimate: out.exp(),
            error_bound: f64::INFINITY,
        });
    }
    Ok(out)
}

/// 𝔧(t, β⋆) by direct quadrature.
pub fn jfn(t: f64, beta: BetaStar, cfg: &JfnEvalConfig) -> Result<f64, SpecFunError> {
    cfg.validate()?;
    if !(t > 0.0) {
        return Err(SpecFunError::Domain(format!("jfn requires t > 0, got {t}")));
    }
    finite_value(ln_scaled_jfn(t.ln(), beta.value(), cfg)? - t.ln())
}

/// Numerical Laplace transform `∫₀^∞ e^{zt} 𝔧(t, β⋆) dt` for `Re z < −e^{β⋆}`.
pub fn jfn_laplace_transform(z: Complex64, beta: BetaStar, cfg: &JfnEvalConfig) -> Result<Complex64, SpecFunError> {
    cfg.validate()?;
    let threshold = -beta.value().exp();
    if !(z.re < threshold) {
        return Err(SpecFunError::Domain(format!(
            "Laplace transform of jfn requires Re z < {threshold:.6}, got {}",
            z.re
        )));
    }
    let j = Jfn::new(beta, *cfg)?;
    // Split at t0: below it t = t0·e^{-u} tames the 1/(t ln²t) endpoint.
    let t0 = (1.0 / z.norm()).min(0.5);
    let qcfg = QuadConfig {
        abs_tol: 0.0,
        rel_tol: 1e-10,
        max_intervals: 4000,
    };
    let ln_t0 = t0.ln();
    let mut err = None;
    let mut near = |part: fn(Complex64) -> f64| {
        integrate_to_infinity(
            |u| {
                let ln_t = ln_t0 - u;
                match j.ln_scaled(ln_t) {
                    Ok(ls) => part((z * ln_t.exp()).exp()) * ls.exp(),
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                }
            },
            0.0,
            &qcfg,
        )
    };
    let near_re = near(|c| c.re)?;
    let near_im = near(|c| c.im)?;
    let mut far = |part: fn(Complex64) -> f64| {
        integrate_to_infinity(
            |t| {
                let ln_t = t.ln();
                match j.ln_scaled(ln_t) {
                    Ok(ls) => {
                        let w = z * t + (ls - ln_t);
                        part(w.exp())
                    }
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                }
            },
            t0,
            &qcfg,
        )
    };
    let far_re = far(|c| c.re)?;
    let far_im = far(|c| c.im)?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(Complex64::new(near_re.value + far_re.value, near_im.value + far_im.value))
}

/// `|∫₀^∞ e^{zt}𝔧(t,β⋆)dt − 1/(log(−z) − β⋆)|`.
pub fn jfn_laplace_residual(z: Complex64, beta: BetaStar, cfg: &JfnEvalConfig) -> Result<f64, SpecFunError> {
    let numeric = jfn_laplace_transform(z, beta, cfg)?;
    let exact = 1.0 / ((-z).ln() - beta.value());
    Ok((numeric - exact).norm())
}

/// 𝔧 tabulated as a natural cubic spline of `ln(t·𝔧)` in `ln t` on a
/// uniform grid; arguments outside the table fall back to direct quadrature.
#[derive(Debug, Clone)]
pub struct JfnTable {
    direct: Jfn,
    spline: UniformSpline,
}

impl JfnTable {
    /// Table covering `t ∈ [t_max·e^{-span}, t_max]` with spacing `h` in `ln t`.
    pub fn new(beta: BetaStar, t_max: f64, span: f64, h: f64) -> Result<Self, SpecFunError> {
        if !(t_max > 0.0 && span > 0.0 && h > 0.0) {
            return Err(SpecFunError::Config("table needs t_max, span, h > 0".into()));
        }
        let direct = Jfn::with_defaults(beta);
        let u1 = t_max.ln() + 4.0 * h;
        let nodes = (span / h).ceil() as usize + 5;
        let u0 = u1 - h * (nodes - 1) as f64;
        let values = (0..nodes)
            .map(|i| direct.ln_scaled(u0 + h * i as f64))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            direct,
            spline: UniformSpline::natural(u0, h, values),
        })
    }

    /// A table suitable for diagram integrals up to horizon `t`.
    pub fn for_horizon(beta: BetaStar, t: f64) -> Result<Self, SpecFunError> {
        Self::new(beta, t, 90.0, 0.01)
    }
}

impl JFunction for JfnTable {
    fn beta_star(&self) -> BetaStar {
        self.direct.beta
    }

    fn ln_scaled(&self, ln_t: f64) -> Result<f64, SpecFunError> {
        // stay two cells away from the natural-spline boundary
        let h = self.spline.step();
        if !(ln_t >= self.spline.x_min() + 2.0 * h && ln_t <= self.spline.x_max() - 2.0 * h) {
            return self.direct.ln_scaled(ln_t);
        }
        Ok(self.spline.eval(ln_t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> JfnEvalConfig {
        JfnEvalConfig::default()
    }

    #[test]
    fn fransen_robinson_constant() {
        // 𝔧(1, 0) = ∫₀^∞ dα/Γ(α) is the Fransén–Robinson constant.
        let v = jfn(1.0, BetaStar(0.0), &cfg()).unwrap();
        assert!((v - 2.807_770_242_028_519_4).abs() < 1e-12, "{v}");
    }

    #[test]
    fn positive_on_wide_range() {
        for &t in &[1e-200, 1e-30, 1e-5, 0.1, 1.0, 10.0, 60.0] {
            for &b in &[-5.0, 0.0, 2.0] {
                let v = jfn(t, BetaStar(b), &cfg()).unwrap();
                assert!(v > 0.0 && v.is_finite(), "t={t} b={b} v={v}");
            }
        }
    }

    #[test]
    fn small_t_profile() {
        // t·𝔧 ≈ 1/L² + 2γ/L³ with L = −ln t − β⋆ as t → 0
        let t: f64 = 1e-150;
        let l = -t.ln();
        let ts = Jfn::with_defaults(BetaStar(0.0)).ln_scaled(t.ln()).unwrap().exp();
        let approx = 1.0 / (l * l) + 2.0 * super::super::EULER_GAMMA / (l * l * l);
        assert!((ts / approx - 1.0).abs() < 1e-4, "{ts} vs {approx}");
    }

    #[test]
    fn domain_and_config_errors() {
        assert!(matches!(jfn(0.0, BetaStar(0.0), &cfg()), Err(SpecFunError::Domain(_))));
        assert!(matches!(jfn(-1.0, BetaStar(0.0), &cfg()), Err(SpecFunError::Domain(_))));
        let bad = JfnEvalConfig {
            rel_tol: 0.1,
            ..cfg()
        };
        assert!(matches!(jfn(1.0, BetaStar(0.0), &bad), Err(SpecFunError::Config(_))));
        let bad = JfnEvalConfig {
            split_point: 2.0,
            alpha_cutoff: 1.5,
            ..cfg()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn cutoff_too_small_is_an_accuracy_error() {
        let tight = JfnEvalConfig {
            alpha_cutoff: 3.0,
            ..cfg()
        };
        let err = jfn(50.0, BetaStar(0.0), &tight).unwrap_err();
        assert!(matches!(err, SpecFunError::Accuracy { .. }));
    }

    #[test]
    fn overflow_is_reported() {
        let err = jfn(200.0, BetaStar(2.0), &cfg()).unwrap_err();
        assert!(matches!(err, SpecFunError::Accuracy { .. }));
    }

    #[test]
    fn increasing_in_beta() {
        let a = jfn(0.7, BetaStar(-0.5), &cfg()).unwrap();
        let b = jfn(0.7, BetaStar(0.5), &cfg()).unwrap();
        assert!(b > a);
    }

    #[test]
    fn laplace_domain_error() {
        let b = BetaStar(0.3);
        let z = Complex64::new(-b.0.exp() / 2.0, 0.0);
        assert!(matches!(jfn_laplace_residual(z, b, &cfg()), Err(SpecFunError::Domain(_))));
    }

    #[test]
    fn laplace_at_minus_e_squared() {
        let z = Complex64::new(-(2f64.exp()), 0.0);
        let r = jfn_laplace_residual(z, BetaStar(0.0), &cfg()).unwrap();
        assert!(r < 0.5e-6, "{r}");
    }

    #[test]
    fn laplace_with_unit_denominator() {
        let b = 2.0;
        let z = Complex64::new(-(b + 1.0f64).exp(), 0.0);
        let r = jfn_laplace_residual(z, BetaStar(b), &cfg()).unwrap();
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn table_matches_direct() {
        let beta = BetaStar(0.4);
        let table = JfnTable::for_horizon(beta, 3.0).unwrap();
        let direct = Jfn::with_defaults(beta);
        for k in 0..400 {
            let u = 3f64.ln() - 85.0 * (k as f64 + 0.37) / 400.0;
            let a = table.ln_scaled(u).unwrap();
            let b = direct.ln_scaled(u).unwrap();
            assert!((a - b).abs() < 1e-9, "u={u}: {a} vs {b}");
        }
        // outside the table: falls back to quadrature
        assert_eq!(table.ln_scaled(5.0).unwrap(), direct.ln_scaled(5.0).unwrap());
    }

    #[test]
    fn laplace_integral_of_quadrature_near_e() {
        // ∫₀^∞ e^{-e t} 𝔧(t,0) dt = 1/(log e − 0) = 1
        let z = Complex64::new(-(1f64.exp()) - 1e-9, 0.0);
        let lt = jfn_laplace_transform(z, BetaStar(0.0), &cfg());
        // z sits on the boundary of absolute convergence: the transform may
        // not converge numerically, but when it does it must be close to 1.
        if let Ok(v) = lt {
            assert!((v.re - 1.0).abs() < 1e-2, "{v}");
        }
    }
}
