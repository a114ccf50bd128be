//! Square periodic grids and the vector/tensor fields built on them.
//!
//! All fields store complex samples in row-major order: sample `(i, j)` lives
//! at `i * n + j`, where `i` is the row (y axis) and `j` the column (x axis).

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// An `n x n` image with complex samples.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageGrid {
    n: usize,
    data: Vec<Complex64>,
}

impl ImageGrid {
    pub fn zeros(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::GridTooSmall(n));
        }
        Ok(Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        })
    }

    pub fn from_vec(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::GridTooSmall(n));
        }
        crate::error::check_len(n * n, data.len())?;
        Ok(Self { n, data })
    }

    /// Builds a grid from `rows x cols` real samples; only square grids are accepted.
    pub fn from_real_rect(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if rows != cols {
            return Err(Error::InvalidParameter(format!(
                "grids must be square, got {rows}x{cols}"
            )));
        }
        Self::from_real(rows, data)
    }

    pub fn from_real(n: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(n, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let mut g = Self::zeros(n)?;
        for i in 0..n {
            for j in 0..n {
                g.data[i * n + j] = f(i, j);
            }
        }
        Ok(g)
    }

    pub fn from_real_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::from_fn(n, |i, j| Complex64::new(f(i, j), 0.0))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.re).collect()
    }

    pub fn modulus(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.norm()).collect()
    }

    pub fn max_imag(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    /// Drops the imaginary part when it is below `tol` everywhere.
    pub fn truncate_imag(&mut self, tol: f64) -> bool {
        if self.max_imag() < tol {
            for z in &mut self.data {
                z.im = 0.0;
            }
            true
        } else {
            false
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self, other>` with the conjugate on `other`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn scale(&mut self, s: f64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: Complex64, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// Cyclic shift: `out(i, j) = self(i - di, j - dj)`.
    pub fn shifted(&self, di: usize, dj: usize) -> Self {
        let n = self.n;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.data[((i + di) % n) * n + (j + dj) % n] = self.data[i * n + j];
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        crate::error::check_len(self.n, other.n)
    }
}

impl Index<(usize, usize)> for ImageGrid {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for ImageGrid {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

impl Add for &ImageGrid {
    type Output = ImageGrid;
    fn add(self, rhs: &ImageGrid) -> ImageGrid {
        debug_assert_eq!(self.n, rhs.n);
        ImageGrid {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ImageGrid {
    type Output = ImageGrid;
    fn sub(self, rhs: &ImageGrid) -> ImageGrid {
        debug_assert_eq!(self.n, rhs.n);
        ImageGrid {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<f64> for &ImageGrid {
    type Output = ImageGrid;
    fn mul(self, s: f64) -> ImageGrid {
        self.scaled(s)
    }
}

/// The pair `(v_x, v_y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub x: ImageGrid,
    pub y: ImageGrid,
}

impl VectorField {
    pub fn new(x: ImageGrid, y: ImageGrid) -> Result<Self> {
        x.check_same(&y)?;
        Ok(Self { x, y })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Ok(Self {
            x: ImageGrid::zeros(n)?,
            y: ImageGrid::zeros(n)?,
        })
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.x.inner(&other.x) + self.y.inner(&other.y)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x.norm_sqr() + self.y.norm_sqr()
    }

    pub fn axpy(&mut self, s: Complex64, other: &Self) {
        self.x.axpy(s, &other.x);
        self.y.axpy(s, &other.y);
    }

    pub fn scale(&mut self, s: f64) {
        self.x.scale(s);
        self.y.scale(s);
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        VectorField {
            x: &self.x - &rhs.x,
            y: &self.y - &rhs.y,
        }
    }
}

impl Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        VectorField {
            x: &self.x + &rhs.x,
            y: &self.y + &rhs.y,
        }
    }
}

/// Symmetric 2x2 tensor per pixel, `[xx xy; xy yy]`, off-diagonal stored once.
///
/// The inner product counts the off-diagonal twice, matching the Frobenius
/// norm of the full matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensorField {
    pub xx: ImageGrid,
    pub xy: ImageGrid,
    pub yy: ImageGrid,
}

impl SymTensorField {
    pub fn new(xx: ImageGrid, xy: ImageGrid, yy: ImageGrid) -> Result<Self> {
        xx.check_same(&xy)?;
        xx.check_same(&yy)?;
        Ok(Self { xx, xy, yy })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Ok(Self {
            xx: ImageGrid::zeros(n)?,
            xy: ImageGrid::zeros(n)?,
            yy: ImageGrid::zeros(n)?,
        })
    }

    pub fn n(&self) -> usize {
        self.xx.n()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.xx.inner(&other.xx) + self.xy.inner(&other.xy) * 2.0 + self.yy.inner(&other.yy)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.xx.norm_sqr() + 2.0 * self.xy.norm_sqr() + self.yy.norm_sqr()
    }

    pub fn axpy(&mut self, s: Complex64, other: &Self) {
        self.xx.axpy(s, &other.xx);
        self.xy.axpy(s, &other.xy);
        self.yy.axpy(s, &other.yy);
    }

    pub fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.xy.is_finite() && self.yy.is_finite()
    }
}

impl Sub for &SymTensorField {
    type Output = SymTensorField;
    fn sub(self, rhs: &SymTensorField) -> SymTensorField {
        SymTensorField {
            xx: &self.xx - &rhs.xx,
            xy: &self.xy - &rhs.xy,
            yy: &self.yy - &rhs.yy,
        }
    }
}
