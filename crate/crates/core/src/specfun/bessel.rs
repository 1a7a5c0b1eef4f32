//! Modified Bessel function K₀ for real and complex arguments and the 2D
//! resolvent kernel built from it.
//!
//! Two regimes: the ascending series for |x| < 2 and Steed's continued
//! fraction (Temme's CF2 for ν = 0) beyond. The large-x asymptotic series is
//! avoided: near x = 2 its smallest term is still around 1e-2.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{SpecFunError, EULER_GAMMA};

const SERIES_CROSSOVER: f64 = 2.0;
const MAX_CF_ITER: usize = 20_000;

/// K₀(x) for x > 0.
pub fn bessel_k0(x: f64) -> Result<f64, SpecFunError> {
    if !(x > 0.0) || x.is_nan() {
        return Err(SpecFunError::Domain(format!("K0 requires x > 0, got {x}")));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x < SERIES_CROSSOVER {
        Ok(k0_ascending_series(x))
    } else {
        k0_continued_fraction(x)
    }
}

/// `−(ln(x/2)+γ) I₀(x) + Σ_k (x²/4)^k/(k!)² H_k`, summed until terms stop
/// contributing.
pub fn k0_ascending_series(x: f64) -> f64 {
    k0_series_complex(Complex64::new(x, 0.0)).re
}

fn k0_series_complex(w: Complex64) -> Complex64 {
    let q = w * w * 0.25;
    let log_term = -((w * 0.5).ln() + EULER_GAMMA);
    let mut term = Complex64::new(1.0, 0.0);
    let mut i0 = term;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut harmonic = 0.0;
    for k in 1..500 {
        let kf = k as f64;
        term = term * q / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        acc += term * harmonic;
        if term.norm() * (1.0 + harmonic) <= 1e-17 * (i0.norm() + acc.norm()) {
            break;
        }
    }
    log_term * i0 + acc
}

/// K₀(x) from Steed's continued fraction; accurate for x ≳ 1.5.
pub fn k0_continued_fraction(x: f64) -> Result<f64, SpecFunError> {
    if !(x > 0.0) {
        return Err(SpecFunError::Domain(format!("K0 requires x > 0, got {x}")));
    }
    Ok(k0_cf_complex(Complex64::new(x, 0.0))?.re)
}

fn k0_cf_complex(w: Complex64) -> Result<Complex64, SpecFunError> {
    let one = Complex64::new(1.0, 0.0);
    let mut b = (one + w) * 2.0;
    let mut d = one / b;
    let mut delh = d;
    let mut q1 = Complex64::new(0.0, 0.0);
    let mut q2 = one;
    let a1 = 0.25;
    let mut q = Complex64::new(a1, 0.0);
    let mut c = Complex64::new(a1, 0.0);
    let mut a = -a1;
    let mut s = one + q * delh;
    for i in 1..MAX_CF_ITER {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -c * a / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = one / (b + a * d);
        delh = (b * d - 1.0) * delh;
        let dels = q * delh;
        s += dels;
        if dels.norm() < 1e-17 * s.norm() {
            return Ok((PI / (2.0 * w)).sqrt() * (-w).exp() / s);
        }
    }
    Err(SpecFunError::Accuracy {
        estimate: ((PI / (2.0 * w)).sqrt() * (-w).exp() / s).re,
        error_bound: f64::INFINITY,
    })
}

/// K₀(w) for complex w with Re w > 0.
pub fn bessel_k0_complex(w: Complex64) -> Result<Complex64, SpecFunError> {
    if !(w.re > 0.0) {
        return Err(SpecFunError::Branch(format!(
            "complex K0 is evaluated only for Re w > 0, got {w}"
        )));
    }
    if w.norm() < SERIES_CROSSOVER {
        Ok(k0_series_complex(w))
    } else {
        k0_cf_complex(w)
    }
}

/// Green's function of `z − ½Δ` in the plane, `(1/π) K₀(√(−2z) |x|)`.
pub fn green2d(z: Complex64, x: [f64; 2]) -> Result<Complex64, SpecFunError> {
    let r = x[0].hypot(x[1]);
    if r == 0.0 {
        return Err(SpecFunError::Singularity("green2d is singular at x = 0".into()));
    }
    if z.im == 0.0 && z.re >= 0.0 {
        return Err(SpecFunError::Branch(format!(
            "green2d requires z off [0, inf), got {z}"
        )));
    }
    let root = (-2.0 * z).sqrt();
    Ok(bessel_k0_complex(root * r)? / PI)
}
