//! Special functions behind the limiting moments: the rising-factorial
//! identity for Γ, the interaction weight 𝔧(t, β⋆), the Bessel function K₀,
//! the planar Green's function and the convolution identity for 𝔧.

mod bessel;
mod conv;
mod gamma_poly;
mod jfn;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bessel::{bessel_k0, bessel_k0_complex, k0_ascending_series, k0_continued_fraction, green2d};
pub use conv::{conv_identity_rhs, conv_identity_residual};
pub use gamma_poly::{gamma_identity_check, gamma_identity_rhs, GammaPolynomial, RationalPoly};
pub use jfn::{jfn, jfn_laplace_residual, jfn_laplace_transform, JFunction, Jfn, JfnEvalConfig, JfnTable};

/// Euler–Mascheroni constant to 16 significant digits.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecFunError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("accuracy error: estimate {estimate:e} with error bound {error_bound:e}")]
    Accuracy { estimate: f64, error_bound: f64 },
    #[error("singularity: {0}")]
    Singularity(String),
    #[error("branch cut: {0}")]
    Branch(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl From<crate::quad::QuadError> for SpecFunError {
    fn from(e: crate::quad::QuadError) -> Self {
        match e {
            crate::quad::QuadError::NotConverged { value, error } => SpecFunError::Accuracy {
                estimate: value,
                error_bound: error,
            },
            crate::quad::QuadError::NonFinite { x } => SpecFunError::Accuracy {
                estimate: f64::NAN,
                error_bound: x,
            },
        }
    }
}

/// The effective coupling β⋆. Any finite real value is admissible.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BetaStar(pub f64);

impl BetaStar {
    pub fn new(value: f64) -> Result<Self, SpecFunError> {
        if value.is_finite() {
            Ok(Self(value))
        } else {
            Err(SpecFunError::Domain(format!("beta_star must be finite, got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}
