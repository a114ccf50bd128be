//! Deterministic test images with values in `[0, 1]`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ImageGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phantom {
    SheppLogan,
    PiecewiseAffine,
    TextureMix,
}

impl Phantom {
    pub const ALL: [Phantom; 3] = [Phantom::SheppLogan, Phantom::PiecewiseAffine, Phantom::TextureMix];

    pub fn generate(self, n: usize) -> Result<ImageGrid> {
        match self {
            Phantom::SheppLogan => shepp_logan(n),
            Phantom::PiecewiseAffine => piecewise_affine(n),
            Phantom::TextureMix => texture_mix(n),
        }
    }
}

impl fmt::Display for Phantom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phantom::SheppLogan => "shepp-logan",
            Phantom::PiecewiseAffine => "piecewise-affine",
            Phantom::TextureMix => "texture-mix",
        })
    }
}

impl FromStr for Phantom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Phantom::ALL
            .into_iter()
            .find(|p| p.to_string() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown phantom `{s}`")))
    }
}

/// Centre of pixel `(i, j)` in `[-1, 1]^2`, with `y` pointing up.
fn coords(n: usize, i: usize, j: usize) -> (f64, f64) {
    let x = (2 * j + 1) as f64 / n as f64 - 1.0;
    let y = 1.0 - (2 * i + 1) as f64 / n as f64;
    (x, y)
}

// (intensity, semi-axis a, semi-axis b, centre x, centre y, rotation in degrees)
const SHEPP_LOGAN: [[f64; 6]; 10] = [
    [1.0, 0.69, 0.92, 0.0, 0.0, 0.0],
    [-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0],
    [-0.2, 0.11, 0.31, 0.22, 0.0, -18.0],
    [-0.2, 0.16, 0.41, -0.22, 0.0, 18.0],
    [0.1, 0.21, 0.25, 0.0, 0.35, 0.0],
    [0.1, 0.046, 0.046, 0.0, 0.1, 0.0],
    [0.1, 0.046, 0.046, 0.0, -0.1, 0.0],
    [0.1, 0.046, 0.023, -0.08, -0.605, 0.0],
    [0.1, 0.023, 0.023, 0.0, -0.606, 0.0],
    [0.1, 0.023, 0.046, 0.06, -0.605, 0.0],
];

/// The modified (high-contrast) Shepp-Logan head, point-sampled at pixel centres.
pub fn shepp_logan(n: usize) -> Result<ImageGrid> {
    check_size(n)?;
    ImageGrid::from_real_fn(n, |i, j| {
        let (x, y) = coords(n, i, j);
        let v: f64 = SHEPP_LOGAN
            .iter()
            .filter(|e| {
                let (s, c) = e[5].to_radians().sin_cos();
                let (dx, dy) = (x - e[3], y - e[4]);
                let xr = dx * c + dy * s;
                let yr = -dx * s + dy * c;
                (xr / e[1]).powi(2) + (yr / e[2]).powi(2) <= 1.0
            })
            .map(|e| e[0])
            .sum();
        v.clamp(0.0, 1.0)
    })
}

/// Regions of a piecewise-affine image whose interiors carry a constant gradient.
pub(crate) struct AffineRegion {
    pub rows: std::ops::Range<usize>,
    pub cols: std::ops::Range<usize>,
    /// Value change per pixel along `x` (columns) and `y` (rows).
    pub slope: (f64, f64),
}

pub(crate) fn affine_regions(n: usize) -> Vec<AffineRegion> {
    let q = n / 8;
    vec![
        AffineRegion { rows: q..4 * q, cols: 4 * q..7 * q, slope: (0.6 / (3 * q) as f64, 0.0) },
        AffineRegion { rows: 5 * q..7 * q, cols: q..4 * q, slope: (0.0, -0.5 / (2 * q) as f64) },
        AffineRegion { rows: 5 * q..7 * q, cols: 5 * q..7 * q, slope: (0.2 / (2 * q) as f64, 0.2 / (2 * q) as f64) },
    ]
}

/// Constant blocks and linear ramps on a zero background.
pub fn piecewise_affine(n: usize) -> Result<ImageGrid> {
    check_size(n)?;
    let q = n / 8;
    let regions = affine_regions(n);
    ImageGrid::from_real_fn(n, |i, j| {
        let ramps = [0.2, 0.9, 0.4];
        for (r, base) in regions.iter().zip(ramps) {
            if r.rows.contains(&i) && r.cols.contains(&j) {
                let di = (i - r.rows.start) as f64;
                let dj = (j - r.cols.start) as f64;
                return base + r.slope.0 * dj + r.slope.1 * di;
            }
        }
        if (q..4 * q).contains(&i) && (q..3 * q).contains(&j) {
            return 0.7;
        }
        let (x, y) = coords(n, i, j);
        if x * x + (y - 0.05).powi(2) <= 0.12f64.powi(2) {
            return 1.0;
        }
        0.0
    })
}

/// Piecewise-constant shapes, smooth shading and an oscillatory patch.
pub fn texture_mix(n: usize) -> Result<ImageGrid> {
    check_size(n)?;
    ImageGrid::from_real_fn(n, |i, j| {
        let (x, y) = coords(n, i, j);
        let mut v = 0.0;
        // Smoothly shaded ellipse as the body.
        let body = (x / 0.85).powi(2) + (y / 0.8).powi(2);
        if body <= 1.0 {
            v = 0.25 + 0.2 * (x + 1.0) / 2.0 + 0.1 * (1.0 - body);
        }
        // Constant blocks.
        if (-0.6..-0.1).contains(&x) && (0.15..0.55).contains(&y) {
            v = 0.8;
        }
        if (x - 0.35).powi(2) + (y + 0.35).powi(2) <= 0.2f64.powi(2) {
            v = 0.95;
        }
        if (-0.55..-0.2).contains(&x) && (-0.6..-0.25).contains(&y) {
            v = 0.1;
        }
        // Oscillatory grating patch.
        if (0.1..0.6).contains(&x) && (0.1..0.55).contains(&y) {
            v = 0.5 + 0.25 * (2.0 * PI * (3.0 * x + 2.0 * y) * 4.0).sin();
        }
        v
    })
}

fn check_size(n: usize) -> Result<()> {
    if n < 32 {
        return Err(Error::InvalidParameter(format!("phantoms need n >= 32, got {n}")));
    }
    Ok(())
}
