//! Periodic finite differences, the symmetrized derivative used by TGV, their
//! adjoints, and the pointwise norms of the TGV terms.
//!
//! Conventions (periodic in both axes, `x` runs along columns `j`, `y` along
//! rows `i`):
//!
//! * forward:  `dx_f u(i,j) = u(i,j+1) - u(i,j)`
//! * backward: `dx_b u(i,j) = u(i,j) - u(i,j-1)`
//!
//! The divergences never appear explicitly; they enter only as adjoints.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::grid::{ImageGrid, SymTensorField, VectorField};

/// One of the four first-order periodic difference operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffOp {
    ForwardX,
    ForwardY,
    BackwardX,
    BackwardY,
}

impl DiffOp {
    pub fn apply(self, u: &ImageGrid) -> ImageGrid {
        let mut out = u.clone();
        self.apply_into(u.as_slice(), out.as_mut_slice(), u.n());
        out
    }

    pub fn apply_adjoint(self, u: &ImageGrid) -> ImageGrid {
        let mut out = u.clone();
        self.adjoint_into(u.as_slice(), out.as_mut_slice(), u.n());
        out
    }

    /// `dst = op(src)`
    pub(crate) fn apply_into(self, src: &[Complex64], dst: &mut [Complex64], n: usize) {
        match self {
            DiffOp::ForwardX => each(n, |i, j| dst[i * n + j] = src[i * n + (j + 1) % n] - src[i * n + j]),
            DiffOp::ForwardY => each(n, |i, j| dst[i * n + j] = src[((i + 1) % n) * n + j] - src[i * n + j]),
            DiffOp::BackwardX => each(n, |i, j| dst[i * n + j] = src[i * n + j] - src[i * n + (j + n - 1) % n]),
            DiffOp::BackwardY => each(n, |i, j| dst[i * n + j] = src[i * n + j] - src[((i + n - 1) % n) * n + j]),
        }
    }

    /// `dst = op^*(src)`; the adjoint of a forward difference is minus a
    /// backward difference and vice versa.
    pub(crate) fn adjoint_into(self, src: &[Complex64], dst: &mut [Complex64], n: usize) {
        match self {
            DiffOp::ForwardX => each(n, |i, j| dst[i * n + j] = src[i * n + (j + n - 1) % n] - src[i * n + j]),
            DiffOp::ForwardY => each(n, |i, j| dst[i * n + j] = src[((i + n - 1) % n) * n + j] - src[i * n + j]),
            DiffOp::BackwardX => each(n, |i, j| dst[i * n + j] = src[i * n + j] - src[i * n + (j + 1) % n]),
            DiffOp::BackwardY => each(n, |i, j| dst[i * n + j] = src[i * n + j] - src[((i + 1) % n) * n + j]),
        }
    }

    /// `dst += s * op^*(src)`
    pub(crate) fn adjoint_acc(self, src: &[Complex64], s: f64, dst: &mut [Complex64], n: usize) {
        match self {
            DiffOp::ForwardX => each(n, |i, j| dst[i * n + j] += (src[i * n + (j + n - 1) % n] - src[i * n + j]) * s),
            DiffOp::ForwardY => each(n, |i, j| dst[i * n + j] += (src[((i + n - 1) % n) * n + j] - src[i * n + j]) * s),
            DiffOp::BackwardX => each(n, |i, j| dst[i * n + j] += (src[i * n + j] - src[i * n + (j + 1) % n]) * s),
            DiffOp::BackwardY => each(n, |i, j| dst[i * n + j] += (src[i * n + j] - src[((i + 1) % n) * n + j]) * s),
        }
    }
}

#[inline]
fn each(n: usize, mut f: impl FnMut(usize, usize)) {
    for i in 0..n {
        for j in 0..n {
            f(i, j);
        }
    }
}

pub fn forward_gradient(u: &ImageGrid) -> VectorField {
    VectorField {
        x: DiffOp::ForwardX.apply(u),
        y: DiffOp::ForwardY.apply(u),
    }
}

/// Exact adjoint of [`forward_gradient`] (negative backward divergence).
pub fn forward_gradient_adjoint(p: &VectorField) -> ImageGrid {
    let n = p.n();
    let mut out = DiffOp::ForwardX.apply_adjoint(&p.x);
    DiffOp::ForwardY.adjoint_acc(p.y.as_slice(), 1.0, out.as_mut_slice(), n);
    out
}

/// Symmetrized backward derivative:
/// `xx = dx_b v_x`, `yy = dy_b v_y`, `xy = (dy_b v_x + dx_b v_y) / 2`.
pub fn sym_gradient(v: &VectorField) -> SymTensorField {
    let xx = DiffOp::BackwardX.apply(&v.x);
    let yy = DiffOp::BackwardY.apply(&v.y);
    let mut xy = DiffOp::BackwardY.apply(&v.x);
    let bxy = DiffOp::BackwardX.apply(&v.y);
    for (a, b) in xy.as_mut_slice().iter_mut().zip(bxy.as_slice()) {
        *a = (*a + b) * 0.5;
    }
    SymTensorField { xx, xy, yy }
}

/// Adjoint of [`sym_gradient`] with respect to the tensor inner product that
/// counts `xy` twice.
pub fn sym_gradient_adjoint(t: &SymTensorField) -> VectorField {
    let n = t.n();
    let mut x = DiffOp::BackwardX.apply_adjoint(&t.xx);
    DiffOp::BackwardY.adjoint_acc(t.xy.as_slice(), 1.0, x.as_mut_slice(), n);
    let mut y = DiffOp::BackwardX.apply_adjoint(&t.xy);
    DiffOp::BackwardY.adjoint_acc(t.yy.as_slice(), 1.0, y.as_mut_slice(), n);
    VectorField { x, y }
}

/// `sum_l sqrt(|v_x(l)|^2 + |v_y(l)|^2)`
pub fn vec_l1_norm(v: &VectorField) -> f64 {
    v.x.as_slice()
        .iter()
        .zip(v.y.as_slice())
        .map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt())
        .sum()
}

/// Frobenius norm of `[xx xy; xy yy]` at one pixel.
#[inline]
pub fn tensor_frobenius(xx: Complex64, xy: Complex64, yy: Complex64) -> f64 {
    (xx.norm_sqr() + 2.0 * xy.norm_sqr() + yy.norm_sqr()).sqrt()
}

/// `sum_l ||t(l)||_F` over the full symmetric matrix at each pixel.
pub fn tensor_l1_norm(t: &SymTensorField) -> f64 {
    t.xx.as_slice()
        .iter()
        .zip(t.xy.as_slice())
        .zip(t.yy.as_slice())
        .map(|((&a, &b), &c)| tensor_frobenius(a, b, c))
        .sum()
}

/// Diagonal of `F op F^*` for the unitary 2D DFT: the per-frequency multiplier.
pub fn fourier_symbol(op: DiffOp, n: usize) -> ImageGrid {
    ImageGrid::from_fn(n, |k, l| {
        let (freq, sign) = match op {
            DiffOp::ForwardX => (l, 1.0),
            DiffOp::ForwardY => (k, 1.0),
            DiffOp::BackwardX => (l, -1.0),
            DiffOp::BackwardY => (k, -1.0),
        };
        let e = Complex64::from_polar(1.0, sign * 2.0 * PI * freq as f64 / n as f64);
        if sign > 0.0 {
            e - 1.0
        } else {
            1.0 - e
        }
    })
    .expect("symbol grid has valid size")
}
