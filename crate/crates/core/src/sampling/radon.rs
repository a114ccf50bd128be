//! Parallel-beam projector with a pixel-driven strip-integral kernel.
//!
//! Each detector bin has unit width and records the integral of the image over
//! its strip. A square pixel's contribution to a bin is the exact area of their
//! intersection, which comes from the CDF of the pixel's trapezoidal footprint.
//! Every pixel's weights in one projection therefore sum to one.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::SamplingOperator;
use crate::error::{check_len, Error, Result};
use crate::grid::ImageGrid;

/// Bins touched by one pixel footprint (width at most sqrt 2).
const SPAN: usize = 3;

#[derive(Clone, Debug)]
pub struct RadonOperator {
    n: usize,
    angles: Vec<f64>,
    detectors: usize,
    /// First bin per (angle, pixel).
    start: Vec<u32>,
    weights: Vec<[f64; SPAN]>,
}

/// CDF of the chord-length profile of a unit square projected onto direction `theta`.
fn footprint_cdf(s: f64, a: f64, b: f64) -> f64 {
    // a >= b are |cos|, |sin| in some order.
    let s2 = 0.5 * (a + b);
    if s <= -s2 {
        return 0.0;
    }
    if s >= s2 {
        return 1.0;
    }
    if b < 1e-12 {
        return ((s + 0.5 * a) / a).clamp(0.0, 1.0);
    }
    let s1 = 0.5 * (a - b);
    if s <= -s1 {
        (s + s2).powi(2) / (2.0 * a * b)
    } else if s <= s1 {
        b / (2.0 * a) + (s + s1) / a
    } else {
        1.0 - (s2 - s).powi(2) / (2.0 * a * b)
    }
}

pub fn radon_operator(n: usize, angle_count: usize) -> Result<RadonOperator> {
    if angle_count == 0 {
        return Err(Error::InvalidParameter("angle_count must be at least 1".into()));
    }
    if n < 2 {
        return Err(Error::GridTooSmall(n));
    }
    let detectors = ((2f64.sqrt() * n as f64).ceil() as usize).max(SPAN);
    let angles: Vec<f64> = (0..angle_count).map(|a| a as f64 * PI / angle_count as f64).collect();
    let centre = 0.5 * (n as f64 - 1.0);
    let dcentre = 0.5 * (detectors as f64 - 1.0);
    let mut start = Vec::with_capacity(angle_count * n * n);
    let mut weights = Vec::with_capacity(angle_count * n * n);
    for &theta in &angles {
        let (sin, cos) = theta.sin_cos();
        let (a, b) = if cos.abs() >= sin.abs() { (cos.abs(), sin.abs()) } else { (sin.abs(), cos.abs()) };
        for i in 0..n {
            let y = i as f64 - centre;
            for j in 0..n {
                let x = j as f64 - centre;
                // Footprint centre in detector-index units.
                let c = x * cos + y * sin + dcentre;
                let lo = (c - 0.5 * (a + b) + 0.5).floor().max(0.0) as usize;
                let d0 = lo.min(detectors - SPAN);
                let mut w = [0.0; SPAN];
                for (t, wt) in w.iter_mut().enumerate() {
                    let d = (d0 + t) as f64;
                    *wt = footprint_cdf(d + 0.5 - c, a, b) - footprint_cdf(d - 0.5 - c, a, b);
                }
                start.push(d0 as u32);
                weights.push(w);
            }
        }
    }
    Ok(RadonOperator { n, angles, detectors, start, weights })
}

impl RadonOperator {
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn detector_count(&self) -> usize {
        self.detectors
    }

    /// Assembles the dense `m x n^2` matrix (small grids only).
    pub fn dense_matrix(&self) -> Vec<Vec<f64>> {
        let nn = self.n * self.n;
        let mut rows = vec![vec![0.0; nn]; self.measurement_len()];
        for a in 0..self.angles.len() {
            for p in 0..nn {
                let k = a * nn + p;
                let d0 = self.start[k] as usize;
                for (t, &w) in self.weights[k].iter().enumerate() {
                    rows[a * self.detectors + d0 + t][p] += w;
                }
            }
        }
        rows
    }
}

impl SamplingOperator for RadonOperator {
    fn n(&self) -> usize {
        self.n
    }

    fn measurement_len(&self) -> usize {
        self.angles.len() * self.detectors
    }

    fn forward(&self, u: &ImageGrid) -> Result<Vec<Complex64>> {
        check_len(self.n, u.n())?;
        let nn = self.n * self.n;
        let mut out = vec![Complex64::new(0.0, 0.0); self.measurement_len()];
        for (a, row) in out.chunks_mut(self.detectors).enumerate() {
            let base = a * nn;
            for (p, &v) in u.as_slice().iter().enumerate() {
                let d0 = self.start[base + p] as usize;
                let w = &self.weights[base + p];
                row[d0] += v * w[0];
                row[d0 + 1] += v * w[1];
                row[d0 + 2] += v * w[2];
            }
        }
        Ok(out)
    }

    fn adjoint(&self, y: &[Complex64]) -> Result<ImageGrid> {
        check_len(self.measurement_len(), y.len())?;
        let nn = self.n * self.n;
        let mut out = vec![Complex64::new(0.0, 0.0); nn];
        for (a, row) in y.chunks(self.detectors).enumerate() {
            let base = a * nn;
            for (p, acc) in out.iter_mut().enumerate() {
                let d0 = self.start[base + p] as usize;
                let w = &self.weights[base + p];
                *acc += row[d0] * w[0] + row[d0 + 1] * w[1] + row[d0 + 2] * w[2];
            }
        }
        ImageGrid::from_vec(self.n, out)
    }
}
