//! Gaussian-mixture states on `k` planar slots and the fused operator maps.
//!
//! A component is `w · N(x-coords; μ_x, C) · N(y-coords; μ_y, C)`: both
//! axes share the covariance because every kernel involved is isotropic.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::linalg::{spd, symmetrize};
use super::{GaussError, Mixture2d};
use crate::diagrams::Pair;

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub mean_x: DVector<f64>,
    pub mean_y: DVector<f64>,
    pub cov: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixtureState {
    k: usize,
    components: Vec<Component>,
}

/// Serializable view of a component, used in diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentView {
    pub weight: f64,
    pub mean_x: Vec<f64>,
    pub mean_y: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

/// Slot of `y` feeding position `p` of `x = S_ij y` (0-based `i < j`):
/// the merged variable sits first, the others keep their order.
fn lowering_map(k: usize, i: usize, j: usize) -> Vec<usize> {
    let mut src = Vec::with_capacity(k);
    let mut next = 1;
    for p in 0..k {
        if p == i || p == j {
            src.push(0);
        } else {
            src.push(next);
            next += 1;
        }
    }
    src
}

fn check_pair(k: usize, pair: Pair) -> Result<(usize, usize), GaussError> {
    let (i, j) = pair;
    if !(1 <= i && i < j && j <= k) {
        return Err(GaussError::Domain(format!("pair ({i},{j}) invalid for {k} slots")));
    }
    Ok((i - 1, j - 1))
}

fn check_time(t: f64) -> Result<(), GaussError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(GaussError::Domain(format!("time must be positive, got {t}")));
    }
    Ok(())
}

impl GaussianMixtureState {
    pub fn new(k: usize, components: Vec<Component>) -> Result<Self, GaussError> {
        if k == 0 {
            return Err(GaussError::Domain("state needs at least one slot".into()));
        }
        for c in &components {
            if c.mean_x.len() != k || c.mean_y.len() != k || c.cov.nrows() != k || c.cov.ncols() != k {
                return Err(GaussError::Mismatch(format!("component dimensions do not match k = {k}")));
            }
            if !c.weight.is_finite() {
                return Err(GaussError::Domain("non-finite weight".into()));
            }
            if (&c.cov - c.cov.transpose()).amax() > 1e-12 * c.cov.amax() {
                return Err(GaussError::Domain("covariance not symmetric".into()));
            }
            let eig = c.cov.clone().symmetric_eigenvalues();
            if eig.iter().any(|&e| e < -1e-12 * c.cov.amax()) {
                return Err(GaussError::Domain("covariance not positive semidefinite".into()));
            }
        }
        Ok(Self { k, components })
    }

    /// `f₁ ⊗ … ⊗ f_k` for isotropic planar mixtures.
    pub fn tensor(factors: &[Mixture2d]) -> Self {
        let k = factors.len();
        let mut comps = vec![Component {
            weight: 1.0,
            mean_x: DVector::zeros(k),
            mean_y: DVector::zeros(k),
            cov: DMatrix::zeros(k, k),
        }];
        for (slot, f) in factors.iter().enumerate() {
            let mut next = Vec::with_capacity(comps.len() * f.components().len());
            for c in &comps {
                for g in f.components() {
                    let mut d = c.clone();
                    d.weight *= g.weight;
                    d.mean_x[slot] = g.mean[0];
                    d.mean_y[slot] = g.mean[1];
                    d.cov[(slot, slot)] = g.var;
                    next.push(d);
                }
            }
            comps = next;
        }
        Self { k, components: comps }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    pub fn scale(&mut self, factor: f64) {
        for c in &mut self.components {
            c.weight *= factor;
        }
    }

    pub fn views(&self) -> Vec<ComponentView> {
        self.components
            .iter()
            .map(|c| ComponentView {
                weight: c.weight,
                mean_x: c.mean_x.iter().copied().collect(),
                mean_y: c.mean_y.iter().copied().collect(),
                cov: (0..self.k).map(|i| (0..self.k).map(|j| c.cov[(i, j)]).collect()).collect(),
            })
            .collect()
    }

    /// Point evaluation at `(x₁,…,x_k) ∈ ℝ^{2k}`.
    pub fn eval(&self, x: &[[f64; 2]]) -> Result<f64, GaussError> {
        if x.len() != self.k {
            return Err(GaussError::Mismatch(format!("expected {} points, got {}", self.k, x.len())));
        }
        let px = DVector::from_iterator(self.k, x.iter().map(|p| p[0]));
        let py = DVector::from_iterator(self.k, x.iter().map(|p| p[1]));
        let mut acc = 0.0;
        for c in &self.components {
            let f = spd(&c.cov, "evaluation covariance")?;
            let dx = &px - &c.mean_x;
            let dy = &py - &c.mean_y;
            let q = (dx.transpose() * &f.inv * &dx)[(0, 0)] + (dy.transpose() * &f.inv * &dy)[(0, 0)];
            acc += c.weight * (-(self.k as f64) * (2.0 * PI).ln() - f.logdet - 0.5 * q).exp();
        }
        Ok(acc)
    }

    /// Heat flow with per-slot variances (same on both axes).
    pub fn heat_with(&self, variances: &[f64]) -> Result<Self, GaussError> {
        if variances.len() != self.k || variances.iter().any(|&v| !(v >= 0.0)) {
            return Err(GaussError::Domain("heat variances must be k nonnegative numbers".into()));
        }
        let mut out = self.clone();
        for c in &mut out.components {
            for (p, v) in variances.iter().enumerate() {
                c.cov[(p, p)] += v;
            }
        }
        Ok(out)
    }

    /// `𝒫_t`: variance `t` on every slot.
    pub fn heat(&self, t: f64) -> Result<Self, GaussError> {
        check_time(t)?;
        self.heat_with(&vec![t; self.k])
    }

    /// `𝒫_t 𝒮*_ij`: `k` slots to `k+1`.
    pub fn apply_out(&self, pair: Pair, t: f64) -> Result<Self, GaussError> {
        check_time(t)?;
        let k = self.k + 1;
        let (i, j) = check_pair(k, pair)?;
        let src = lowering_map(k, i, j);
        let comps = self
            .components
            .iter()
            .map(|c| Component {
                weight: c.weight,
                mean_x: DVector::from_fn(k, |p, _| c.mean_x[src[p]]),
                mean_y: DVector::from_fn(k, |p, _| c.mean_y[src[p]]),
                cov: DMatrix::from_fn(k, k, |p, q| c.cov[(src[p], src[q])] + if p == q { t } else { 0.0 }),
            })
            .collect();
        Ok(Self { k, components: comps })
    }

    /// `𝒮_ij 𝒫_t`: `k` slots to `k−1`.
    pub fn apply_in(&self, pair: Pair, t: f64) -> Result<Self, GaussError> {
        check_time(t)?;
        self.contract(pair, t)
    }

    /// `𝒮_ij 𝒫_t 𝒮*_kl`: `expand` is the pair of `𝒮*`, `contract` that of `𝒮`.
    pub fn apply_med(&self, expand: Pair, contract: Pair, t: f64) -> Result<Self, GaussError> {
        self.apply_out(expand, t)?.contract(contract, 0.0)
    }

    /// `4π𝒫^𝔍_t` given the value `𝔧(t, β⋆)`.
    pub fn apply_j(&self, t: f64, jfn_value: f64) -> Result<Self, GaussError> {
        let mut out = self.apply_squeezed_heat(t)?;
        out.scale(4.0 * PI * jfn_value);
        Ok(out)
    }

    /// Heat with variance `t/2` on slot 1 and `t` elsewhere (the kernel of
    /// `𝒫^𝔍_t` without its scalar factor).
    pub fn apply_squeezed_heat(&self, t: f64) -> Result<Self, GaussError> {
        check_time(t)?;
        let mut v = vec![t; self.k];
        v[0] = 0.5 * t;
        self.heat_with(&v)
    }

    /// Restriction to `x_i = x_j` after heat of variance `t ≥ 0`.
    fn contract(&self, pair: Pair, t: f64) -> Result<Self, GaussError> {
        let k = self.k;
        let (i, j) = check_pair(k, pair)?;
        let src = lowering_map(k, i, j);
        let km = k - 1;
        let mut comps = Vec::with_capacity(self.components.len());
        for c in &self.components {
            let mut sigma = c.cov.clone();
            for p in 0..k {
                sigma[(p, p)] += t;
            }
            let sf = spd(&sigma, "contraction covariance")?;
            // P = Aᵀ Σ⁻¹ A, h = Aᵀ Σ⁻¹ μ
            let mut prec = DMatrix::zeros(km, km);
            for p in 0..k {
                for q in 0..k {
                    prec[(src[p], src[q])] += sf.inv[(p, q)];
                }
            }
            let pf = spd(&prec, "contracted precision")?;
            let mut cov = pf.inv.clone();
            symmetrize(&mut cov);
            let mut log_w = c.weight.abs().ln() - (2.0 * PI).ln() - sf.logdet - pf.logdet;
            let mut means = [DVector::zeros(km), DVector::zeros(km)];
            for (axis, mu) in [&c.mean_x, &c.mean_y].into_iter().enumerate() {
                let smu = &sf.inv * mu;
                let mut h = DVector::zeros(km);
                for p in 0..k {
                    h[src[p]] += smu[p];
                }
                let nu = &cov * &h;
                let r = mu.dot(&smu) - h.dot(&nu);
                log_w -= 0.5 * r;
                means[axis] = nu;
            }
            let [mean_x, mean_y] = means;
            comps.push(Component {
                weight: c.weight.signum() * log_w.exp(),
                mean_x,
                mean_y,
                cov,
            });
        }
        Ok(Self { k: km, components: comps })
    }
}

/// `⟨f, g⟩ = ∫ f g` for two states on the same number of slots.
pub fn inner_product(f: &GaussianMixtureState, g: &GaussianMixtureState) -> Result<f64, GaussError> {
    if f.k != g.k {
        return Err(GaussError::Mismatch(format!("inner product of {} and {} slots", f.k, g.k)));
    }
    let k = f.k as f64;
    let mut acc = 0.0;
    for a in &f.components {
        for b in &g.components {
            let s = &a.cov + &b.cov;
            let sf = spd(&s, "overlap covariance")?;
            let dx = &a.mean_x - &b.mean_x;
            let dy = &a.mean_y - &b.mean_y;
            let q = (dx.transpose() * &sf.inv * &dx)[(0, 0)] + (dy.transpose() * &sf.inv * &dy)[(0, 0)];
            acc += a.weight * b.weight * (-k * (2.0 * PI).ln() - sf.logdet - 0.5 * q).exp();
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(mean: [f64; 2], var: f64) -> Mixture2d {
        Mixture2d::single(mean, var).unwrap()
    }

    #[test]
    fn lowering_map_layout() {
        assert_eq!(lowering_map(4, 1, 3), vec![1, 0, 2, 0]);
        assert_eq!(lowering_map(3, 0, 1), vec![0, 0, 1]);
    }

    #[test]
    fn overlap_of_equal_gaussians() {
        let s = 0.7;
        let f = GaussianMixtureState::tensor(&[gauss([0.0, 0.0], s)]);
        let v = inner_product(&f, &f).unwrap();
        assert!((v - 1.0 / (4.0 * PI * s)).abs() < 1e-15);
    }

    #[test]
    fn out_conserves_weight() {
        let z = GaussianMixtureState::tensor(&[gauss([0.3, -0.1], 0.5), gauss([1.0, 0.0], 0.2)]);
        let u = z.apply_out((1, 3), 0.4).unwrap();
        assert_eq!(u.k(), 3);
        assert!((u.total_weight() - 1.0).abs() < 1e-15);
        let c = &u.components()[0];
        assert_eq!(c.mean_x[0], c.mean_x[2]);
        assert_eq!(c.cov[(0, 2)], 0.5);
        assert_eq!(c.cov[(0, 0)], 0.9);
    }

    #[test]
    fn out_then_in_at_same_pair_gives_squared_kernel() {
        // 𝒮 𝒫_τ 𝒮* acts as (4πτ)^{-1} times heat τ/2 on the merged slot, τ elsewhere
        let v = GaussianMixtureState::tensor(&[gauss([0.2, 0.1], 0.3), gauss([-0.4, 0.5], 0.6)]);
        let tau = 0.8;
        let a = v.apply_med((1, 2), (1, 2), tau).unwrap();
        let mut b = v.heat_with(&[tau / 2.0, tau]).unwrap();
        b.scale(1.0 / (4.0 * PI * tau));
        let (ca, cb) = (&a.components()[0], &b.components()[0]);
        assert!((ca.weight - cb.weight).abs() < 1e-14);
        assert!((&ca.cov - &cb.cov).amax() < 1e-13);
        assert!((&ca.mean_x - &cb.mean_x).amax() < 1e-13);
    }

    #[test]
    fn j_scaling_and_covariance() {
        let v = GaussianMixtureState::tensor(&[gauss([0.0, 0.0], 1.0), gauss([0.0, 0.0], 1.0)]);
        let w = v.apply_j(0.5, 2.0).unwrap();
        assert!((w.total_weight() - 8.0 * PI).abs() < 1e-14);
        assert_eq!(w.components()[0].cov[(0, 0)], 1.25);
        assert_eq!(w.components()[0].cov[(1, 1)], 1.5);
    }

    #[test]
    fn domain_errors() {
        let v = GaussianMixtureState::tensor(&[gauss([0.0, 0.0], 1.0), gauss([0.0, 0.0], 1.0)]);
        assert!(v.apply_in((1, 2), 0.0).is_err());
        assert!(v.apply_in((2, 1), 1.0).is_err());
        assert!(v.apply_out((1, 4), 1.0).is_err());
        assert!(v.apply_j(-1.0, 1.0).is_err());
        let w = GaussianMixtureState::tensor(&[gauss([0.0, 0.0], 1.0)]);
        assert!(inner_product(&v, &w).is_err());
    }

    #[test]
    fn translation_covariance_of_med() {
        let v = GaussianMixtureState::tensor(&[gauss([0.2, 0.1], 0.3), gauss([-0.4, 0.5], 0.6)]);
        let shift = [1.5, -0.7];
        let vs = GaussianMixtureState::tensor(&[
            gauss([0.2 + shift[0], 0.1 + shift[1]], 0.3),
            gauss([-0.4 + shift[0], 0.5 + shift[1]], 0.6),
        ]);
        let a = v.apply_med((1, 3), (1, 2), 0.7).unwrap();
        let b = vs.apply_med((1, 3), (1, 2), 0.7).unwrap();
        let (ca, cb) = (&a.components()[0], &b.components()[0]);
        assert!((ca.weight - cb.weight).abs() < 1e-14);
        for p in 0..2 {
            assert!((cb.mean_x[p] - ca.mean_x[p] - shift[0]).abs() < 1e-13);
            assert!((cb.mean_y[p] - ca.mean_y[p] - shift[1]).abs() < 1e-13);
        }
    }
}
