//! Square 2D FFTs on row-major `N×N` buffers.
//!
//! The forward transform leaves the spectrum transposed; every multiplier
//! used here is symmetric under `(k_x, k_y) ↦ (k_y, k_x)`, so a forward
//! transform, a pointwise product and an inverse transform need no extra
//! transposes.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub(crate) struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub(crate) fn scratch(&self) -> Vec<Complex64> {
        let len = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        vec![Complex64::new(0.0, 0.0); len.max(self.n * self.n)]
    }

    fn pass(&self, fft: &dyn Fft<f64>, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        let s = fft.get_inplace_scratch_len();
        fft.process_with_scratch(buf, &mut scratch[..s]);
        transpose(buf, &mut scratch[..self.n * self.n], self.n);
    }

    /// Unnormalized forward transform; output is transposed.
    pub(crate) fn forward(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.pass(self.forward.as_ref(), buf, scratch);
        let s = self.forward.get_inplace_scratch_len();
        self.forward.process_with_scratch(buf, &mut scratch[..s]);
    }

    /// Unnormalized inverse of [`Fft2::forward`]; takes transposed input.
    pub(crate) fn inverse(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.pass(self.inverse.as_ref(), buf, scratch);
        let s = self.inverse.get_inplace_scratch_len();
        self.inverse.process_with_scratch(buf, &mut scratch[..s]);
    }

    pub(crate) fn n(&self) -> usize {
        self.n
    }
}

fn transpose(buf: &mut [Complex64], tmp: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in 0..n {
            tmp[j * n + i] = buf[i * n + j];
        }
    }
    buf.copy_from_slice(tmp);
}

/// Angular wavenumber of DFT index `i` on a period `l`.
pub(crate) fn wavenumber(i: usize, n: usize, l: f64) -> f64 {
    let k = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
    2.0 * std::f64::consts::PI * k / l
}
