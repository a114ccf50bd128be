use num_complex::Complex64;

use super::{RadialMask, SamplingOperator};
use crate::error::{check_len, Result};
use crate::fft::Fft2;
use crate::grid::ImageGrid;

/// `A = P F`: unitary 2D DFT followed by selection of sampled frequencies.
#[derive(Clone, Debug)]
pub struct FourierSampling {
    n: usize,
    indices: Vec<usize>,
    diagonal: Vec<f64>,
    fft: Fft2,
}

impl FourierSampling {
    /// Sampled FFT-ordered frequency indices, ascending.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

pub fn fourier_operator(mask: &RadialMask) -> FourierSampling {
    from_fft_mask(mask.n, &mask.fft_ordered())
}

pub(crate) fn from_fft_mask(n: usize, fft_mask: &[bool]) -> FourierSampling {
    let indices = (0..n * n).filter(|&k| fft_mask[k]).collect();
    let diagonal = fft_mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    FourierSampling { n, indices, diagonal, fft: Fft2::new(n) }
}

impl SamplingOperator for FourierSampling {
    fn n(&self) -> usize {
        self.n
    }

    fn measurement_len(&self) -> usize {
        self.indices.len()
    }

    fn forward(&self, u: &ImageGrid) -> Result<Vec<Complex64>> {
        check_len(self.n, u.n())?;
        let spec = self.fft.forward(u);
        Ok(self.indices.iter().map(|&k| spec[k]).collect())
    }

    fn adjoint(&self, y: &[Complex64]) -> Result<ImageGrid> {
        check_len(self.indices.len(), y.len())?;
        let mut spec = vec![Complex64::new(0.0, 0.0); self.n * self.n];
        for (&k, &v) in self.indices.iter().zip(y) {
            spec[k] = v;
        }
        Ok(self.fft.inverse(&spec))
    }

    fn fourier_diagonal(&self) -> Option<&[f64]> {
        Some(&self.diagonal)
    }

    fn normal(&self, u: &ImageGrid) -> Result<ImageGrid> {
        check_len(self.n, u.n())?;
        let mut spec = self.fft.forward(u);
        spec.iter_mut().zip(&self.diagonal).for_each(|(z, d)| *z *= *d);
        Ok(self.fft.inverse(&spec))
    }
}
