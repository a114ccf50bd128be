use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Equiangular radial lines through the k-space origin.
///
/// `mask` is stored centred (DC at `(n/2, n/2)`); use
/// [`fft_ordered`](Self::fft_ordered) for the layout of [`crate::fft::Fft2`].
#[derive(Clone, Debug, PartialEq)]
pub struct RadialMask {
    pub n: usize,
    pub line_count: usize,
    pub mask: Vec<bool>,
    pub sampling_rate: f64,
}

impl RadialMask {
    pub fn from_centered(n: usize, line_count: usize, mask: Vec<bool>) -> Result<Self> {
        crate::error::check_len(n * n, mask.len())?;
        let sampling_rate = mask.iter().filter(|&&b| b).count() as f64 / (n * n) as f64;
        Ok(Self { n, line_count, mask, sampling_rate })
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    /// Mask reindexed so that frequency `(0, 0)` sits at index 0.
    pub fn fft_ordered(&self) -> Vec<bool> {
        let n = self.n;
        let h = n / 2;
        let mut out = vec![false; n * n];
        for r in 0..n {
            for c in 0..n {
                out[((r + n - h) % n) * n + (c + n - h) % n] = self.mask[r * n + c];
            }
        }
        out
    }

    /// Header: `n` and `line_count` as little-endian `u32`, then `n^2` bytes (0/1), centred.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.n as u32).to_le_bytes())?;
        w.write_all(&(self.line_count as u32).to_le_bytes())?;
        let bytes: Vec<u8> = self.mask.iter().map(|&b| b as u8).collect();
        w.write_all(&bytes)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let n = u32::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let line_count = u32::from_le_bytes(word) as usize;
        let mut bytes = vec![0u8; n * n];
        r.read_exact(&mut bytes)?;
        if let Some(b) = bytes.iter().find(|&&b| b > 1) {
            return Err(Error::Format(format!("mask byte {b} is not 0 or 1")));
        }
        Self::from_centered(n, line_count, bytes.into_iter().map(|b| b == 1).collect())
    }
}

/// Rasterizes `line_count` equiangular digital lines through the centre.
///
/// Each line takes one pixel per step along its dominant axis (nearest pixel on
/// the other), so every line is symmetric about the origin and the mask is
/// invariant under `k -> -k`. `seed` draws the common angular offset.
pub fn make_radial_mask(n: usize, line_count: usize, seed: u64) -> Result<RadialMask> {
    if n < 2 || line_count == 0 || line_count > n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= line_count <= n, got {line_count} lines for n = {n}"
        )));
    }
    let step = PI / line_count as f64;
    let offset = if seed == 0 {
        0.0
    } else {
        ChaCha8Rng::seed_from_u64(seed).random_range(0.0..step)
    };
    let h = (n / 2) as i64;
    let ni = n as i64;
    let mut mask = vec![false; n * n];
    let mut set = |x: i64, y: i64| {
        if x.abs() <= h && y.abs() <= h {
            let r = (y + h).rem_euclid(ni) as usize;
            let c = (x + h).rem_euclid(ni) as usize;
            mask[r * n + c] = true;
        }
    };
    for l in 0..line_count {
        let theta = offset + l as f64 * step;
        let (s, c) = theta.sin_cos();
        for t in -h..=h {
            if c.abs() >= s.abs() {
                set(t, (t as f64 * s / c).round() as i64);
            } else {
                set((t as f64 * c / s).round() as i64, t);
            }
        }
    }
    RadialMask::from_centered(n, line_count, mask)
}
