//! Rising-factorial polynomials `p_m(α) = α(α+1)⋯(α+m)` in exact rational
//! arithmetic, and the integral identity relating `p_m` to `p_{-1}, …, p_{m-1}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::SpecFunError;

/// A polynomial with exact rational coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

impl RationalPoly {
    pub fn constant(c: i64) -> Self {
        Self::from_coeffs(vec![BigRational::from_integer(BigInt::from(c))])
    }

    pub fn from_coeffs(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigRational::zero());
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Multiply by `(α + c)`.
    pub fn times_linear(&self, c: i64) -> Self {
        let c = BigRational::from_integer(BigInt::from(c));
        let mut out = vec![BigRational::zero(); self.coeffs.len() + 1];
        for (k, a) in self.coeffs.iter().enumerate() {
            out[k + 1] += a;
            out[k] += a * &c;
        }
        Self::from_coeffs(out)
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let out = (0..n)
            .map(|k| {
                let a = self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero);
                let b = other.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero);
                a + b
            })
            .collect();
        Self::from_coeffs(out)
    }

    /// Antiderivative vanishing at zero.
    pub fn antiderivative(&self) -> Self {
        let mut out = vec![BigRational::zero()];
        for (k, a) in self.coeffs.iter().enumerate() {
            out.push(a / BigRational::from_integer(BigInt::from(k as i64 + 1)));
        }
        Self::from_coeffs(out)
    }

    /// Exact evaluation at a rational point.
    pub fn eval_exact(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, a| acc * x + a)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, a| acc * x + a.to_f64().unwrap_or(f64::NAN))
    }
}

/// `p_m(α) = Γ(α+m+1)/Γ(α) = α(α+1)⋯(α+m)`; `m = -1` gives the constant 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaPolynomial {
    m: i64,
    poly: RationalPoly,
}

impl GammaPolynomial {
    pub fn new(m: i64) -> Result<Self, SpecFunError> {
        if m < -1 {
            return Err(SpecFunError::Domain(format!("p_m requires m >= -1, got {m}")));
        }
        let mut poly = RationalPoly::constant(1);
        for c in 0..=m {
            poly = poly.times_linear(c);
        }
        Ok(Self { m, poly })
    }

    pub fn m(&self) -> i64 {
        self.m
    }

    pub fn poly(&self) -> &RationalPoly {
        &self.poly
    }
}

fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// The polynomial `∫₀^α Σ_{k=0}^m C(m+1, m-k+1) (m-k)! p_{k-1}(α₁) dα₁`.
pub fn gamma_identity_rhs(m: u32) -> RationalPoly {
    let m = u64::from(m);
    let mut sum = RationalPoly::constant(0);
    for k in 0..=m {
        let c = binomial(m + 1, m - k + 1) * factorial(m - k);
        let p = GammaPolynomial::new(k as i64 - 1).expect("k - 1 >= -1");
        sum = sum.add(&p.poly().scale(&BigRational::from_integer(c)));
    }
    sum.antiderivative()
}

/// `|p_m(α) − RHS(α)|`, with both sides built and evaluated in exact
/// arithmetic; only the final difference is rounded to `f64`.
pub fn gamma_identity_check(m: i64, alpha: f64) -> Result<f64, SpecFunError> {
    if m < 0 {
        return Err(SpecFunError::Domain(format!("identity requires m >= 0, got {m}")));
    }
    if !alpha.is_finite() {
        return Err(SpecFunError::Domain("alpha must be finite".into()));
    }
    let lhs = GammaPolynomial::new(m)?;
    let rhs = gamma_identity_rhs(m as u32);
    let x = BigRational::from_float(alpha).expect("finite float");
    let diff = lhs.poly().eval_exact(&x) - rhs.eval_exact(&x);
    Ok(diff.to_f64().unwrap_or(f64::INFINITY).abs())
}
