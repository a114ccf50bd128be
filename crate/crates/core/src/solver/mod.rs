//! Split Bregman reconstruction and iterative hard thresholding.

mod bregman;
mod config;
mod iht;
mod log;
mod state;

pub use bregman::{objective_surrogate, split_bregman_reconstruct, Reconstruction, SplitBregman};
pub use config::{RhsVariant, SecondOrder, SolverConfig};
pub use iht::{iht_inpaint, IhtConfig, IhtStrategy};
pub use log::{ConvergenceLog, IterationRecord};
pub use state::SolverState;
