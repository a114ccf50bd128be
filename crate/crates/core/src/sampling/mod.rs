//! Measurement operators `A` with matched adjoints.

mod fourier;
mod inpaint;
mod mask;
mod radon;

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::ImageGrid;

pub use fourier::{fourier_operator, FourierSampling};
pub use inpaint::{inpainting_operator, random_pixel_mask, PixelMask};
pub use mask::{make_radial_mask, RadialMask};
pub use radon::{radon_operator, RadonOperator};

/// A linear map from `n x n` images to `m` measurements.
pub trait SamplingOperator: Send + Sync {
    fn n(&self) -> usize;

    fn measurement_len(&self) -> usize;

    fn forward(&self, u: &ImageGrid) -> Result<Vec<Complex64>>;

    fn adjoint(&self, y: &[Complex64]) -> Result<ImageGrid>;

    /// Multipliers of `F A^* A F^*` when that matrix is diagonal.
    fn fourier_diagonal(&self) -> Option<&[f64]> {
        None
    }

    /// Diagonal of `A^* A` when it is diagonal in the pixel domain.
    fn pixel_diagonal(&self) -> Option<&[f64]> {
        None
    }

    /// `A^* A u`
    fn normal(&self, u: &ImageGrid) -> Result<ImageGrid> {
        self.adjoint(&self.forward(u)?)
    }
}

/// Euclidean norm of a measurement vector.
pub fn measurement_norm(y: &[Complex64]) -> f64 {
    y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
