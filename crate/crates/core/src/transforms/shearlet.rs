//! Band-limited cone-adapted shearlet frame built directly in the frequency
//! domain.
//!
//! Each atom's response is `radial_s(r) * angular_c(p) * [cone]`, where
//!
//! * `r = max(|k_x|, |k_y|) / n` is the square-ring frequency radius and
//!   `radial_s` is a Meyer-type dyadic partition: a lowpass `Phi_0` plus
//!   bandpasses `sqrt(Phi_s^2 - Phi_{s-1}^2)`;
//! * `p` is a pseudo-angle that runs over the slope `k_y/k_x` in the
//!   horizontal cone (`p` in `[-1, 1]`) and `2 - k_x/k_y` in the vertical cone,
//!   so the full half-circle of directions maps onto `[-1, 3)`;
//! * `angular_c` are Meyer bumps centred every `2^-d` in `p` whose squares sum
//!   to one. The diagonal bumps are split between the two cones.
//!
//! Squared responses therefore sum to one at every frequency: a Parseval frame.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::{Cone, FilterBank, FrameBound, MultilevelTransform, Orientation, SubbandInfo, SubbandLayout, SubbandStack};
use crate::error::{Error, Result};
use crate::fft::signed_freq;
use crate::grid::ImageGrid;

/// Meyer auxiliary function: smooth, `nu(0) = 0`, `nu(1) = 1`, `nu(x) + nu(1-x) = 1`.
pub(crate) fn meyer_nu(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x.powi(4) * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x.powi(3))
    }
}

/// Smooth lowpass that is 1 below `a`, 0 above `2a`.
fn meyer_lowpass(r: f64, a: f64) -> f64 {
    (0.5 * PI * meyer_nu((r - a) / a)).cos()
}

#[derive(Clone, Debug)]
pub struct ShearletTransform {
    directions: Vec<u32>,
    bank: FilterBank,
}

impl ShearletTransform {
    pub fn directions(&self) -> &[u32] {
        &self.directions
    }

    pub fn filter_bank(&self) -> &FilterBank {
        &self.bank
    }
}

/// Pseudo-angle of a nonzero frequency and the cone it belongs to.
fn pseudo_angle(kx: f64, ky: f64) -> (f64, Cone) {
    if ky.abs() <= kx.abs() {
        (ky / kx, Cone::Horizontal)
    } else {
        (2.0 - kx / ky, Cone::Vertical)
    }
}

/// Circular distance on the pseudo-angle circle of circumference 4.
fn angle_dist(p: f64, c: f64) -> f64 {
    let d = (p - c).rem_euclid(4.0);
    d.min(4.0 - d)
}

/// Builds a shearlet frame with `directions.len()` scales; scale `s` carries
/// `2 (2^(d_s+1) + 1)` directional subbands (shears `-2^d..=2^d` per cone).
pub fn build_shearlet(n: usize, directions: &[u32]) -> Result<ShearletTransform> {
    if n < 32 || !n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "shearlet grids must be a power of two >= 32, got {n}"
        )));
    }
    let scales = directions.len();
    if scales == 0 || directions.iter().any(|&d| d > 8) {
        return Err(Error::InvalidParameter(
            "need at least one scale and directional parameters <= 8".into(),
        ));
    }
    let nn = n * n;
    // Lowpass cutoffs: Phi_s transitions over [a_s, 2 a_s], Phi_{scales} = 1.
    let cut = |s: usize| 0.25 * 0.5f64.powi((scales - 1 - s) as i32);
    let radial = |r: f64, s: usize| -> f64 {
        if s == 0 {
            meyer_lowpass(r, cut(0))
        } else {
            let outer = if s == scales { 1.0 } else { meyer_lowpass(r, cut(s)) };
            let inner = meyer_lowpass(r, cut(s - 1));
            (outer * outer - inner * inner).max(0.0).sqrt()
        }
    };

    let freqs: Vec<(f64, f64)> = (0..nn)
        .map(|idx| {
            let (ky, kx) = (idx / n, idx % n);
            (signed_freq(kx, n) as f64, signed_freq(ky, n) as f64)
        })
        .collect();

    let mut bands = vec![SubbandInfo { scale: 0, orientation: Orientation::Lowpass, len: nn }];
    let mut responses = vec![freqs
        .iter()
        .map(|&(kx, ky)| Complex64::new(radial(kx.abs().max(ky.abs()) / n as f64, 0), 0.0))
        .collect::<Vec<_>>()];

    for (s, &d) in directions.iter().enumerate() {
        let scale = s + 1;
        let step = 0.5f64.powi(d as i32);
        let max_shear = 1i32 << d;
        for cone in [Cone::Horizontal, Cone::Vertical] {
            for shear in -max_shear..=max_shear {
                let centre = match cone {
                    Cone::Horizontal => shear as f64 * step,
                    Cone::Vertical => 2.0 - shear as f64 * step,
                };
                let resp: Vec<f64> = freqs
                    .iter()
                    .map(|&(kx, ky)| {
                        if kx == 0.0 && ky == 0.0 {
                            return 0.0;
                        }
                        let (p, c) = pseudo_angle(kx, ky);
                        if c != cone {
                            return 0.0;
                        }
                        let dist = angle_dist(p, centre) / step;
                        let ang = (0.5 * PI * meyer_nu(dist)).cos();
                        radial(kx.abs().max(ky.abs()) / n as f64, scale) * ang
                    })
                    .collect();
                bands.push(SubbandInfo { scale, orientation: Orientation::Shear { cone, shear }, len: nn });
                responses.push(symmetrize(&resp, n));
            }
        }
    }

    let bank = FilterBank::new(n, SubbandLayout::new(bands)?, responses, 1e-12)?;
    Ok(ShearletTransform { directions: directions.to_vec(), bank })
}

/// `sqrt((w(k)^2 + w(-k)^2) / 2)`: even in frequency so atoms are real. Only the
/// Nyquist row/column changes; the sum of squares over atoms is preserved.
fn symmetrize(resp: &[f64], n: usize) -> Vec<Complex64> {
    (0..n * n)
        .map(|idx| {
            let (ky, kx) = (idx / n, idx % n);
            let mirror = ((n - ky) % n) * n + (n - kx) % n;
            let v = 0.5 * (resp[idx] * resp[idx] + resp[mirror] * resp[mirror]);
            Complex64::new(v.sqrt(), 0.0)
        })
        .collect()
}

impl MultilevelTransform for ShearletTransform {
    fn n(&self) -> usize {
        self.bank.n()
    }

    fn layout(&self) -> &Arc<SubbandLayout> {
        self.bank.layout()
    }

    fn frame_bound(&self) -> FrameBound {
        self.bank.bound()
    }

    fn analyze(&self, u: &ImageGrid) -> Result<SubbandStack> {
        self.bank.analyze(u)
    }

    fn adjoint_analyze(&self, c: &SubbandStack) -> Result<ImageGrid> {
        self.bank.adjoint(c)
    }

    fn synthesize(&self, c: &SubbandStack) -> Result<ImageGrid> {
        self.bank.synthesize(c)
    }

    fn gram_fourier_diagonal(&self) -> Result<Vec<f64>> {
        Ok(self.bank.gram().to_vec())
    }
}
