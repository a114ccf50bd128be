use num_complex::Complex64;

use crate::error::{check_len, Result};
use crate::grid::{ImageGrid, SymTensorField, VectorField};
use crate::sampling::SamplingOperator;
use crate::transforms::{MultilevelTransform, SubbandStack};

/// Primal, split and Bregman variables of the reconstruction.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub u: ImageGrid,
    pub v: VectorField,
    pub w: SubbandStack,
    pub d: VectorField,
    pub t: SymTensorField,
    pub bw: SubbandStack,
    pub bd: VectorField,
    pub bt: SymTensorField,
    pub yk: Vec<Complex64>,
    pub iteration: usize,
}

impl SolverState {
    /// `u = A^* y`, everything else zero.
    pub fn initial(a: &dyn SamplingOperator, t: &dyn MultilevelTransform, y: &[Complex64]) -> Result<Self> {
        check_len(a.measurement_len(), y.len())?;
        let mut s = Self::zeros(a, t)?;
        s.u = a.adjoint(y)?;
        Ok(s)
    }

    pub fn zeros(a: &dyn SamplingOperator, t: &dyn MultilevelTransform) -> Result<Self> {
        let n = a.n();
        check_len(n, t.n())?;
        Ok(Self {
            u: ImageGrid::zeros(n)?,
            v: VectorField::zeros(n)?,
            w: SubbandStack::zeros(t.layout().clone()),
            d: VectorField::zeros(n)?,
            t: SymTensorField::zeros(n)?,
            bw: SubbandStack::zeros(t.layout().clone()),
            bd: VectorField::zeros(n)?,
            bt: SymTensorField::zeros(n)?,
            yk: vec![Complex64::new(0.0, 0.0); a.measurement_len()],
            iteration: 0,
        })
    }

    /// Name of the first variable holding a non-finite value.
    pub fn first_non_finite(&self) -> Option<&'static str> {
        let yk_ok = self.yk.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        [
            ("u", self.u.is_finite()),
            ("v", self.v.is_finite()),
            ("w", self.w.is_finite()),
            ("d", self.d.is_finite()),
            ("t", self.t.is_finite()),
            ("b_w", self.bw.is_finite()),
            ("b_d", self.bd.is_finite()),
            ("b_t", self.bt.is_finite()),
            ("y_k", yk_ok),
        ]
        .into_iter()
        .find(|(_, ok)| !ok)
        .map(|(name, _)| name)
    }
}
