//! Gaussian kernel calculus: heat kernels, mixture states pushed through the
//! diagram operators, and the closed-form two-particle moment.
//!
//! Test functions and initial data are tensor products of isotropic planar
//! Gaussian mixtures, so every spatial integral along a diagram is exact.

mod linalg;
mod state;
mod two_point;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub(crate) use two_point::RelativePairing;
pub use state::{inner_product, Component, ComponentView, GaussianMixtureState};
pub use two_point::{
    bessel_identity_lhs, bessel_identity_residual, bessel_identity_rhs, second_moment_closed_form,
    second_moment_kernel, TwoPointMoment,
};

use crate::quad::QuadError;
use crate::specfun::SpecFunError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaussError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical rank failure: {0}")]
    NumericalRank(String),
    #[error("dimension mismatch: {0}")]
    Mismatch(String),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// `ρ(t, x) = (2πt)^{-1} exp(−|x|²/2t)`.
pub fn heat2d(t: f64, x: [f64; 2]) -> Result<f64, GaussError> {
    if !(t > 0.0) {
        return Err(GaussError::Domain(format!("heat kernel needs t > 0, got {t}")));
    }
    Ok((-(x[0] * x[0] + x[1] * x[1]) / (2.0 * t)).exp() / (2.0 * PI * t))
}

/// One isotropic planar Gaussian `weight · N(mean, var·I₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gauss2d {
    pub weight: f64,
    pub mean: [f64; 2],
    pub var: f64,
}

/// Finite mixture of isotropic planar Gaussians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Gauss2d>", into = "Vec<Gauss2d>")]
pub struct Mixture2d {
    components: Vec<Gauss2d>,
}

impl TryFrom<Vec<Gauss2d>> for Mixture2d {
    type Error = GaussError;

    fn try_from(v: Vec<Gauss2d>) -> Result<Self, GaussError> {
        Self::new(v)
    }
}

impl From<Mixture2d> for Vec<Gauss2d> {
    fn from(m: Mixture2d) -> Self {
        m.components
    }
}

impl Mixture2d {
    pub fn new(components: Vec<Gauss2d>) -> Result<Self, GaussError> {
        if components.is_empty() {
            return Err(GaussError::Domain("mixture needs at least one component".into()));
        }
        for c in &components {
            if !(c.var > 0.0 && c.var.is_finite()) {
                return Err(GaussError::Domain(format!("component variance must be positive, got {}", c.var)));
            }
            if !(c.weight.is_finite() && c.mean.iter().all(|m| m.is_finite())) {
                return Err(GaussError::Domain("component weight and mean must be finite".into()));
            }
        }
        Ok(Self { components })
    }

    pub fn single(mean: [f64; 2], var: f64) -> Result<Self, GaussError> {
        Self::new(vec![Gauss2d { weight: 1.0, mean, var }])
    }

    pub fn components(&self) -> &[Gauss2d] {
        &self.components
    }

    pub fn mass(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.components.iter().all(|c| c.weight >= 0.0)
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * heat2d(c.var, [x[0] - c.mean[0], x[1] - c.mean[1]]).expect("var > 0"))
            .sum()
    }

    /// `ρ_t ∗ self`.
    pub fn heated(&self, t: f64) -> Result<Self, GaussError> {
        if !(t >= 0.0) {
            return Err(GaussError::Domain(format!("heat time must be nonnegative, got {t}")));
        }
        Ok(Self {
            components: self
                .components
                .iter()
                .map(|c| Gauss2d {
                    var: c.var + t,
                    ..*c
                })
                .collect(),
        })
    }

    /// `∫ self · other`.
    pub fn overlap(&self, other: &Mixture2d) -> f64 {
        let mut acc = 0.0;
        for a in &self.components {
            for b in &other.components {
                let d = [a.mean[0] - b.mean[0], a.mean[1] - b.mean[1]];
                acc += a.weight * b.weight * heat2d(a.var + b.var, d).expect("var > 0");
            }
        }
        acc
    }

    /// Common component variance, when there is one.
    pub fn common_variance(&self) -> Option<f64> {
        let v = self.components[0].var;
        self.components.iter().all(|c| c.var == v).then_some(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heat_kernel_value() {
        assert!((heat2d(1.0, [0.0, 0.0]).unwrap() - 0.159_154_943_091_895_35).abs() < 1e-16);
        assert!(heat2d(0.0, [0.0, 0.0]).is_err());
    }

    #[test]
    fn mixture_validation_and_serde() {
        assert!(Mixture2d::new(vec![]).is_err());
        assert!(Mixture2d::single([0.0, 0.0], 0.0).is_err());
        let m = Mixture2d::new(vec![
            Gauss2d { weight: 0.5, mean: [0.0, 1.0], var: 0.2 },
            Gauss2d { weight: 0.5, mean: [1.0, 0.0], var: 0.2 },
        ])
        .unwrap();
        assert_eq!(m.common_variance(), Some(0.2));
        let s = serde_json::to_string(&m).unwrap();
        let back: Mixture2d = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<Mixture2d>(r#"[{"weight":1,"mean":[0,0],"var":-1}]"#).is_err());
    }

    #[test]
    fn overlap_is_heat_kernel_at_mean_difference() {
        let a = Mixture2d::single([0.0, 0.0], 0.3).unwrap();
        let b = Mixture2d::single([1.0, 0.5], 0.2).unwrap();
        assert!((a.overlap(&b) - heat2d(0.5, [1.0, 0.5]).unwrap()).abs() < 1e-16);
    }
}
