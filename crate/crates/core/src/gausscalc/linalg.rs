//! Small symmetric positive-definite helpers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::GaussError;

const COND_LIMIT: f64 = 1e12;

/// Inverse and log-determinant of an SPD matrix.
#[derive(Debug, Clone)]
pub(crate) struct Spd {
    pub inv: DMatrix<f64>,
    pub logdet: f64,
}

pub(crate) fn spd(m: &DMatrix<f64>, what: &str) -> Result<Spd, GaussError> {
    if let Some(ch) = m.clone().cholesky() {
        let l = ch.l_dirty();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        let mut logdet = 0.0;
        for i in 0..m.nrows() {
            let d = l[(i, i)];
            lo = lo.min(d);
            hi = hi.max(d);
            logdet += 2.0 * d.ln();
        }
        if lo > 0.0 && (hi / lo).powi(2) <= COND_LIMIT {
            return Ok(Spd {
                inv: ch.inverse(),
                logdet,
            });
        }
    }
    // ill-conditioned or not numerically PD: symmetric eigen decomposition
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > max * 1e-15) || !(max > 0.0) {
        return Err(GaussError::NumericalRank(format!(
            "{what}: eigenvalues span [{min:e}, {max:e}]"
        )));
    }
    let inv_diag = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|&x| 1.0 / x));
    let v = &eig.eigenvectors;
    let inv = v * DMatrix::from_diagonal(&inv_diag) * v.transpose();
    let logdet = eig.eigenvalues.iter().map(|x| x.ln()).sum();
    Ok(Spd { inv, logdet })
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let a = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = a;
            m[(j, i)] = a;
        }
    }
}

/// Accumulates `∫_{ℝ^d} ∏_k N(a_kᵀv − m_k; 0, s_k) dv` (one axis).
#[derive(Debug, Clone)]
pub(crate) struct LinearFormIntegral {
    q: DMatrix<f64>,
    b: DVector<f64>,
    c: f64,
}

impl LinearFormIntegral {
    pub fn new(dim: usize) -> Self {
        Self {
            q: DMatrix::zeros(dim, dim),
            b: DVector::zeros(dim),
            c: 0.0,
        }
    }

    pub fn factor(&mut self, a: &[f64], mean: f64, var: f64) {
        let d = self.q.nrows();
        for i in 0..d {
            if a[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                self.q[(i, j)] += a[i] * a[j] / var;
            }
            self.b[i] += a[i] * mean / var;
        }
        self.c += -0.5 * mean * mean / var - 0.5 * (2.0 * std::f64::consts::PI * var).ln();
    }

    /// Natural log of the integral.
    pub fn ln_value(&self) -> Result<f64, GaussError> {
        let d = self.q.nrows() as f64;
        let f = spd(&self.q, "linear-form precision")?;
        let quad = (self.b.transpose() * &f.inv * &self.b)[(0, 0)];
        Ok(0.5 * d * (2.0 * std::f64::consts::PI).ln() - 0.5 * f.logdet + 0.5 * quad + self.c)
    }
}
