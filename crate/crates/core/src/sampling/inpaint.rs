use num_complex::Complex64;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::SamplingOperator;
use crate::error::{check_len, Error, Result};
use crate::grid::ImageGrid;

/// Pointwise multiplication by a 0/1 pixel mask. Measurements live on the full grid.
#[derive(Clone, Debug)]
pub struct PixelMask {
    n: usize,
    diagonal: Vec<f64>,
}

impl PixelMask {
    pub fn mask(&self) -> Vec<bool> {
        self.diagonal.iter().map(|&d| d != 0.0).collect()
    }

    pub fn observed_fraction(&self) -> f64 {
        self.diagonal.iter().sum::<f64>() / self.diagonal.len() as f64
    }
}

pub fn inpainting_operator(n: usize, mask: &[bool]) -> Result<PixelMask> {
    check_len(n * n, mask.len())?;
    Ok(PixelMask { n, diagonal: mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect() })
}

/// Exactly `round(fraction * n^2)` observed pixels, chosen uniformly.
pub fn random_pixel_mask(n: usize, fraction: f64, seed: u64) -> Result<Vec<bool>> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!("observed fraction {fraction} outside [0, 1]")));
    }
    let total = n * n;
    let keep = (fraction * total as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mask = vec![false; total];
    for k in sample(&mut rng, total, keep) {
        mask[k] = true;
    }
    Ok(mask)
}

impl SamplingOperator for PixelMask {
    fn n(&self) -> usize {
        self.n
    }

    fn measurement_len(&self) -> usize {
        self.n * self.n
    }

    fn forward(&self, u: &ImageGrid) -> Result<Vec<Complex64>> {
        check_len(self.n, u.n())?;
        Ok(u.as_slice().iter().zip(&self.diagonal).map(|(z, d)| z * d).collect())
    }

    fn adjoint(&self, y: &[Complex64]) -> Result<ImageGrid> {
        check_len(self.n * self.n, y.len())?;
        ImageGrid::from_vec(self.n, y.iter().zip(&self.diagonal).map(|(z, d)| z * d).collect())
    }

    fn pixel_diagonal(&self) -> Option<&[f64]> {
        Some(&self.diagonal)
    }
}
