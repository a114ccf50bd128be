//! Random fixtures shared by the unit tests.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{ImageGrid, SymTensorField, VectorField};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_c(r: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
}

pub fn rand_grid(r: &mut ChaCha8Rng, n: usize) -> ImageGrid {
    ImageGrid::from_fn(n, |_, _| rand_c(r)).unwrap()
}

pub fn rand_real_grid(r: &mut ChaCha8Rng, n: usize) -> ImageGrid {
    ImageGrid::from_real_fn(n, |_, _| r.random_range(-1.0..1.0)).unwrap()
}

pub fn rand_field(r: &mut ChaCha8Rng, n: usize) -> VectorField {
    VectorField::new(rand_grid(r, n), rand_grid(r, n)).unwrap()
}

pub fn rand_tensor(r: &mut ChaCha8Rng, n: usize) -> SymTensorField {
    SymTensorField::new(rand_grid(r, n), rand_grid(r, n), rand_grid(r, n)).unwrap()
}
