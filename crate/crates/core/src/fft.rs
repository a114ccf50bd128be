//! Unitary 2D DFT on square grids.
//!
//! `forward` computes `(1/n) sum u(i,j) exp(-2 pi i (k i + l j) / n)`, so the
//! transform and its inverse are both unitary.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::ImageGrid;

#[derive(Clone)]
pub struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft2").field("n", &self.n).finish()
    }
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.run(&self.fwd, buf);
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.run(&self.inv, buf);
    }

    pub fn forward(&self, u: &ImageGrid) -> Vec<Complex64> {
        let mut buf = u.as_slice().to_vec();
        self.forward_in_place(&mut buf);
        buf
    }

    /// Inverse transform of a spectrum into a grid.
    pub fn inverse(&self, spec: &[Complex64]) -> ImageGrid {
        let mut buf = spec.to_vec();
        self.inverse_in_place(&mut buf);
        ImageGrid::from_vec(self.n, buf).expect("spectrum has n*n entries")
    }

    fn run(&self, plan: &Arc<dyn Fft<f64>>, buf: &mut [Complex64]) {
        let n = self.n;
        assert_eq!(buf.len(), n * n, "buffer is not n x n");
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(buf, &mut scratch);
        transpose(buf, n);
        plan.process_with_scratch(buf, &mut scratch);
        transpose(buf, n);
        let s = 1.0 / n as f64;
        for z in buf.iter_mut() {
            *z *= s;
        }
    }
}

fn transpose(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// Signed frequency index in `(-n/2, n/2]` for FFT bin `k`.
#[inline]
pub fn signed_freq(k: usize, n: usize) -> i64 {
    let k = k as i64;
    let n = n as i64;
    if k > n / 2 {
        k - n
    } else {
        k
    }
}
