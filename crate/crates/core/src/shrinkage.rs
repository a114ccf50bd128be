//! Closed-form proximal maps of the scalar, isotropic and Frobenius `l1` terms.

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::{SymTensorField, VectorField};
use crate::grid_ops::tensor_frobenius;
use crate::transforms::{RealStack, SubbandStack};

/// Soft thresholding: `max(|z| - lambda, 0) z / |z|`.
#[inline]
pub fn shrink(z: Complex64, lambda: f64) -> Complex64 {
    let m = z.norm();
    if m <= lambda {
        Complex64::new(0.0, 0.0)
    } else {
        z * ((m - lambda) / m)
    }
}

/// Euclidean soft thresholding of the pair `(x, y)`.
#[inline]
pub fn shrink2(x: Complex64, y: Complex64, lambda: f64) -> (Complex64, Complex64) {
    let m = (x.norm_sqr() + y.norm_sqr()).sqrt();
    if m <= lambda {
        let zero = Complex64::new(0.0, 0.0);
        (zero, zero)
    } else {
        let s = (m - lambda) / m;
        (x * s, y * s)
    }
}

/// Frobenius soft thresholding of the symmetric tensor `[xx xy; xy yy]`.
#[inline]
pub fn shrink_frobenius(
    xx: Complex64,
    xy: Complex64,
    yy: Complex64,
    lambda: f64,
) -> (Complex64, Complex64, Complex64) {
    let m = tensor_frobenius(xx, xy, yy);
    if m <= lambda {
        let zero = Complex64::new(0.0, 0.0);
        (zero, zero, zero)
    } else {
        let s = (m - lambda) / m;
        (xx * s, xy * s, yy * s)
    }
}

/// Applies [`shrink2`] at every pixel.
pub fn shrink2_field(v: &VectorField, lambda: f64) -> VectorField {
    let mut out = v.clone();
    for (a, b) in out.x.as_mut_slice().iter_mut().zip(out.y.as_mut_slice()) {
        (*a, *b) = shrink2(*a, *b, lambda);
    }
    out
}

/// Applies [`shrink_frobenius`] at every pixel.
pub fn shrink_frobenius_field(t: &SymTensorField, lambda: f64) -> SymTensorField {
    let mut out = t.clone();
    let xx = out.xx.as_mut_slice().iter_mut();
    let xy = out.xy.as_mut_slice().iter_mut();
    let yy = out.yy.as_mut_slice().iter_mut();
    for ((a, b), c) in xx.zip(xy).zip(yy) {
        (*a, *b, *c) = shrink_frobenius(*a, *b, *c, lambda);
    }
    out
}

/// Keeps `c(k)` iff `|c(k)| > delta(k)`.
pub fn hard_threshold(c: &SubbandStack, delta: &RealStack) -> Result<SubbandStack> {
    c.check_layout(delta.layout())?;
    let mut out = c.clone();
    for (z, d) in out.as_flat_mut().iter_mut().zip(delta.as_flat()) {
        if z.norm() <= *d {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    Ok(out)
}
