//! Multilevel sparsifying transforms behind one analysis/synthesis interface.
//!
//! Both provided transforms are undecimated and periodic, so every subband is
//! an `n x n` array and `F Psi^* Psi F^*` is diagonal.

mod filter_bank;
mod shearlet;
mod wavelet;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::ImageGrid;

pub use filter_bank::FilterBank;
pub use shearlet::{build_shearlet, ShearletTransform};
pub use wavelet::{build_wavelet, UndecimatedWavelet, WaveletFamily};

/// Direction tag of a subband.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Lowpass,
    /// Highpass across columns (responds to vertical edges).
    WaveletX,
    /// Highpass across rows (responds to horizontal edges).
    WaveletY,
    WaveletDiagonal,
    Shear { cone: Cone, shear: i32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cone {
    Horizontal,
    Vertical,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Orientation::Lowpass => write!(f, "lowpass"),
            Orientation::WaveletX => write!(f, "x"),
            Orientation::WaveletY => write!(f, "y"),
            Orientation::WaveletDiagonal => write!(f, "xy"),
            Orientation::Shear { cone, shear } => {
                let c = if *cone == Cone::Horizontal { 'h' } else { 'v' };
                write!(f, "{c}{shear:+}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubbandInfo {
    /// 0 for the lowpass, 1..=J from coarse to fine.
    pub scale: usize,
    pub orientation: Orientation,
    pub len: usize,
}

impl SubbandInfo {
    pub fn is_lowpass(&self) -> bool {
        self.orientation == Orientation::Lowpass
    }
}

/// Ordered subband descriptors; subband 0 is always the single lowpass band.
#[derive(Clone, Debug, PartialEq)]
pub struct SubbandLayout {
    bands: Vec<SubbandInfo>,
    offsets: Vec<usize>,
    total: usize,
}

impl SubbandLayout {
    pub fn new(bands: Vec<SubbandInfo>) -> Result<Self> {
        let lowpass: Vec<_> = bands.iter().enumerate().filter(|(_, b)| b.is_lowpass()).collect();
        if lowpass.len() != 1 || lowpass[0].0 != 0 || bands[0].scale != 0 {
            return Err(Error::LayoutMismatch(
                "exactly one lowpass subband is required, at index 0".into(),
            ));
        }
        let mut offsets = Vec::with_capacity(bands.len());
        let mut total = 0;
        for b in &bands {
            offsets.push(total);
            total += b.len;
        }
        Ok(Self { bands, offsets, total })
    }

    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }

    pub fn total_len(&self) -> usize {
        self.total
    }

    pub fn bands(&self) -> &[SubbandInfo] {
        &self.bands
    }

    pub fn range(&self, j: usize) -> std::ops::Range<usize> {
        self.offsets[j]..self.offsets[j] + self.bands[j].len
    }

    pub fn max_scale(&self) -> usize {
        self.bands.iter().map(|b| b.scale).max().unwrap_or(0)
    }
}

/// Analysis coefficients partitioned into subbands.
#[derive(Clone, Debug, PartialEq)]
pub struct SubbandStack {
    layout: Arc<SubbandLayout>,
    data: Vec<Complex64>,
}

impl SubbandStack {
    pub fn zeros(layout: Arc<SubbandLayout>) -> Self {
        let data = vec![Complex64::new(0.0, 0.0); layout.total_len()];
        Self { layout, data }
    }

    pub fn from_flat(layout: Arc<SubbandLayout>, data: Vec<Complex64>) -> Result<Self> {
        crate::error::check_len(layout.total_len(), data.len())?;
        Ok(Self { layout, data })
    }

    /// Builds a stack with the same layout as `self` from a flat vector.
    pub fn with_data(&self, data: Vec<Complex64>) -> Result<Self> {
        Self::from_flat(self.layout.clone(), data)
    }

    pub fn layout(&self) -> &Arc<SubbandLayout> {
        &self.layout
    }

    pub fn num_subbands(&self) -> usize {
        self.layout.len()
    }

    pub fn subband(&self, j: usize) -> &[Complex64] {
        &self.data[self.layout.range(j)]
    }

    pub fn subband_mut(&mut self, j: usize) -> &mut [Complex64] {
        let r = self.layout.range(j);
        &mut self.data[r]
    }

    pub fn info(&self, j: usize) -> &SubbandInfo {
        &self.layout.bands()[j]
    }

    pub fn as_flat(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_flat_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_flat(self) -> Vec<Complex64> {
        self.data
    }

    pub fn check_layout(&self, other: &SubbandLayout) -> Result<()> {
        if *self.layout == *other {
            Ok(())
        } else {
            Err(Error::LayoutMismatch(format!(
                "{} subbands / {} coefficients vs {} / {}",
                self.layout.len(),
                self.layout.total_len(),
                other.len(),
                other.total_len()
            )))
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn scale(&mut self, s: f64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    pub fn axpy(&mut self, s: Complex64, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Real per-coefficient values (weights, thresholds) sharing a [`SubbandLayout`].
#[derive(Clone, Debug, PartialEq)]
pub struct RealStack {
    layout: Arc<SubbandLayout>,
    data: Vec<f64>,
}

impl RealStack {
    pub fn filled(layout: Arc<SubbandLayout>, value: f64) -> Self {
        let data = vec![value; layout.total_len()];
        Self { layout, data }
    }

    pub fn from_flat(layout: Arc<SubbandLayout>, data: Vec<f64>) -> Result<Self> {
        crate::error::check_len(layout.total_len(), data.len())?;
        Ok(Self { layout, data })
    }

    pub fn layout(&self) -> &Arc<SubbandLayout> {
        &self.layout
    }

    pub fn subband(&self, j: usize) -> &[f64] {
        &self.data[self.layout.range(j)]
    }

    pub fn subband_mut(&mut self, j: usize) -> &mut [f64] {
        let r = self.layout.range(j);
        &mut self.data[r]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn as_flat_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Frame bound declared by a transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FrameBound {
    /// `Psi^* Psi = a I`.
    Tight(f64),
    /// Not tight, but `F Psi^* Psi F^*` is known and diagonal.
    FourierDiagonal,
}

/// A multilevel analysis operator `Psi` with its adjoint and a (left) inverse.
pub trait MultilevelTransform: Send + Sync {
    fn n(&self) -> usize;

    fn layout(&self) -> &Arc<SubbandLayout>;

    fn frame_bound(&self) -> FrameBound;

    fn analyze(&self, u: &ImageGrid) -> Result<SubbandStack>;

    /// `Psi^* c`
    fn adjoint_analyze(&self, c: &SubbandStack) -> Result<ImageGrid>;

    /// Left inverse of [`analyze`](Self::analyze): `(Psi^* Psi)^{-1} Psi^* c`.
    fn synthesize(&self, c: &SubbandStack) -> Result<ImageGrid>;

    /// Per-frequency multipliers `g` with `F Psi^* Psi u = g * F u`.
    fn gram_fourier_diagonal(&self) -> Result<Vec<f64>> {
        Err(Error::NotTranslationInvariant)
    }

    fn num_scales(&self) -> usize {
        self.layout().max_scale()
    }
}
