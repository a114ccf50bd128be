pub mod error;
pub mod experiment;
pub mod fft;
pub mod grid;
pub mod grid_ops;
pub mod io;
pub mod linsolve;
pub mod metrics;
pub mod phantom;
pub mod reweighting;
pub mod sampling;
pub mod shrinkage;
pub mod solver;
pub mod transforms;

#[cfg(test)]
mod test_util;

pub use error::{Error, Result};
pub use grid::{ImageGrid, SymTensorField, VectorField};
