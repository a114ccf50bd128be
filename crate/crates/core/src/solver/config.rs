use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reweighting::ReweightStrategy;

/// Which form of the data term enters the `u` right-hand side.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhsVariant {
    /// `beta A^*(y + y_k)`, with `y_k` starting at zero.
    #[default]
    Combined,
    /// `beta A^* y_k`.
    Accumulated,
}

/// Second-order part of the regularizer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecondOrder {
    /// `alpha_1 ||grad u - v||_1 + alpha_0 ||E v||_1`
    #[default]
    Tgv,
    /// `alpha_1 ||grad u||_1` (`v` fixed at zero).
    Tv,
    /// No gradient terms.
    Off,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub alpha0: f64,
    pub alpha1: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub beta: f64,
    pub epsilon: f64,
    /// Sweeps between Bregman updates (`N`).
    pub inner_iters: usize,
    pub max_iter: usize,
    /// Gauss-Seidel passes per inner iteration.
    pub gs_iters: usize,
    pub strategy: ReweightStrategy,
    /// Detail factor for the `none` and `irl1` strategies.
    pub lambda: f64,
    /// 0 selects the direct spectral solve (Fourier-diagonal operators only).
    pub cg_iters: usize,
    pub cg_tol: f64,
    pub rhs_variant: RhsVariant,
    pub second_order: SecondOrder,
    /// Include the weighted analysis term.
    pub use_transform: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::wavelet_fourier()
    }
}

impl SolverConfig {
    pub fn wavelet_fourier() -> Self {
        Self {
            alpha0: 1.0,
            alpha1: 2.0,
            mu1: 6e2,
            mu2: 1e1,
            mu3: 2e1,
            beta: 1e4,
            epsilon: 1e-4,
            inner_iters: 4,
            max_iter: 100,
            gs_iters: 2,
            strategy: ReweightStrategy::MlMax,
            lambda: 1.0,
            cg_iters: 0,
            cg_tol: 1e-10,
            rhs_variant: RhsVariant::Combined,
            second_order: SecondOrder::Tgv,
            use_transform: true,
        }
    }

    pub fn shearlet_fourier() -> Self {
        Self {
            alpha0: 1.0,
            alpha1: 1.0,
            mu1: 5e3,
            mu2: 1e1,
            mu3: 2e1,
            beta: 1e5,
            epsilon: 1e-5,
            ..Self::wavelet_fourier()
        }
    }

    pub fn radon() -> Self {
        Self {
            alpha0: 1e-3,
            alpha1: 2e-3,
            mu1: 1e3,
            mu2: 1e2,
            mu3: 2e3,
            beta: 1e1,
            epsilon: 1e-6,
            max_iter: 150,
            cg_iters: 75,
            ..Self::wavelet_fourier()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mu1", self.mu1),
            ("mu2", self.mu2),
            ("mu3", self.mu3),
            ("beta", self.beta),
            ("epsilon", self.epsilon),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {value}")));
            }
        }
        for (name, value) in [("alpha0", self.alpha0), ("alpha1", self.alpha1), ("lambda", self.lambda)] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be nonnegative, got {value}")));
            }
        }
        for (name, value) in [
            ("inner_iters", self.inner_iters),
            ("max_iter", self.max_iter),
            ("gs_iters", self.gs_iters),
        ] {
            if value == 0 {
                return Err(Error::InvalidParameter(format!("{name} must be at least 1")));
            }
        }
        if !(self.cg_tol >= 0.0) {
            return Err(Error::InvalidParameter(format!("cg_tol must be nonnegative, got {}", self.cg_tol)));
        }
        Ok(())
    }
}
