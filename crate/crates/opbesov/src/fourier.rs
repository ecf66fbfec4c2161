//! Unitary discrete Fourier transform on a periodic grid with n points per axis.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub struct FourierGrid {
    pub n: usize,
    pub dims: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FourierGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierGrid").field("n", &self.n).field("dims", &self.dims).finish()
    }
}

impl FourierGrid {
    pub fn new(n: usize, dims: usize) -> Self {
        let mut planner = FftPlanner::new();
        FourierGrid { n, dims, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Signed integer frequency of each flattened index, one entry per axis.
    pub fn frequencies(&self, flat: usize) -> Vec<i64> {
        let n = self.n;
        let mut idx = flat;
        let mut out = vec![0i64; self.dims];
        for a in (0..self.dims).rev() {
            let k = idx % n;
            idx /= n;
            out[a] = if k <= n / 2 { k as i64 } else { k as i64 - n as i64 };
        }
        out
    }

    /// Eigenvalues of the periodic second-difference Laplacian on the unit torus:
    /// Σ_axes 4n² sin²(πk/n).
    pub fn laplacian_symbol(&self) -> Vec<f64> {
        let n = self.n as f64;
        (0..self.len())
            .map(|flat| self.frequencies(flat).iter().map(|&k| 4.0 * n * n * (std::f64::consts::PI * k as f64 / n).sin().powi(2)).sum())
            .collect()
    }

    pub fn forward(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        self.transform(x, &self.forward)
    }

    pub fn inverse(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        self.transform(x, &self.inverse)
    }

    fn transform(&self, x: &DVector<Complex64>, plan: &Arc<dyn Fft<f64>>) -> DVector<Complex64> {
        let n = self.n;
        let mut data: Vec<Complex64> = x.iter().copied().collect();
        let scale = 1.0 / (n as f64).sqrt();
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..self.dims {
            let stride = n.pow((self.dims - 1 - axis) as u32);
            let block = stride * n;
            for start in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (k, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + k * stride];
                    }
                    plan.process(&mut line);
                    for (k, v) in line.iter().enumerate() {
                        data[base + k * stride] = v * scale;
                    }
                }
            }
        }
        DVector::from_vec(data)
    }
}
