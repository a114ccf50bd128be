//! Undecimated (a trous) 2D wavelet transform, normalized to a Parseval frame.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{FilterBank, FrameBound, MultilevelTransform, Orientation, SubbandInfo, SubbandLayout, SubbandStack};
use crate::error::{Error, Result};
use crate::grid::ImageGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum WaveletFamily {
    Haar,
    /// Two vanishing moments, four taps.
    Daubechies2,
    /// Four vanishing moments, eight taps.
    Daubechies4,
}

impl WaveletFamily {
    /// Orthonormal scaling filter (sums to sqrt 2).
    pub fn lowpass(self) -> Vec<f64> {
        match self {
            WaveletFamily::Haar => vec![std::f64::consts::FRAC_1_SQRT_2; 2],
            WaveletFamily::Daubechies2 => {
                let s3 = 3f64.sqrt();
                let d = 4.0 * 2f64.sqrt();
                vec![(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d]
            }
            WaveletFamily::Daubechies4 => vec![
                0.230_377_813_308_896_4,
                0.714_846_570_552_915_4,
                0.630_880_767_929_858_7,
                -0.027_983_769_416_859_9,
                -0.187_034_811_719_093_1,
                0.030_841_381_835_560_7,
                0.032_883_011_666_885_2,
                -0.010_597_401_785_069_0,
            ],
        }
    }

    /// Quadrature mirror highpass `g[k] = (-1)^k h[L-1-k]`.
    pub fn highpass(self) -> Vec<f64> {
        let h = self.lowpass();
        let l = h.len();
        (0..l)
            .map(|k| if k % 2 == 0 { h[l - 1 - k] } else { -h[l - 1 - k] })
            .collect()
    }
}

impl FromStr for WaveletFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "haar" | "db1" => Ok(WaveletFamily::Haar),
            "db2" | "daubechies2" | "daubechies-2" => Ok(WaveletFamily::Daubechies2),
            "db4" | "daubechies4" | "daubechies-4" => Ok(WaveletFamily::Daubechies4),
            other => Err(Error::InvalidParameter(format!("unknown wavelet family `{other}`"))),
        }
    }
}

impl fmt::Display for WaveletFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WaveletFamily::Haar => "haar",
            WaveletFamily::Daubechies2 => "db2",
            WaveletFamily::Daubechies4 => "db4",
        })
    }
}

impl TryFrom<String> for WaveletFamily {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<WaveletFamily> for String {
    fn from(f: WaveletFamily) -> String {
        f.to_string()
    }
}

/// DTFT of `taps` dilated by `dilation`, scaled by `1/sqrt 2`, at `omega`.
fn dilated_response(taps: &[f64], dilation: usize, omega: f64) -> Complex64 {
    taps.iter()
        .enumerate()
        .map(|(k, &h)| Complex64::from_polar(h, -omega * (k * dilation) as f64))
        .sum::<Complex64>()
        * std::f64::consts::FRAC_1_SQRT_2
}

#[derive(Clone, Debug)]
pub struct UndecimatedWavelet {
    family: WaveletFamily,
    levels: usize,
    bank: FilterBank,
}

impl UndecimatedWavelet {
    pub fn family(&self) -> WaveletFamily {
        self.family
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn filter_bank(&self) -> &FilterBank {
        &self.bank
    }
}

/// Builds a `levels`-scale undecimated wavelet frame: one lowpass plus three
/// detail subbands (x, y, diagonal) per scale, each of size `n^2`.
///
/// The per-level filters are scaled by `1/sqrt 2`, which makes the frame
/// Parseval (`a = 1`).
pub fn build_wavelet(n: usize, levels: usize, family: WaveletFamily) -> Result<UndecimatedWavelet> {
    if levels == 0 || n < 2 || levels >= usize::BITS as usize || !n.is_multiple_of(1 << levels) {
        return Err(Error::InvalidParameter(format!(
            "image side {n} must be divisible by 2^{levels} (levels >= 1)"
        )));
    }
    let lo = family.lowpass();
    let hi = family.highpass();
    let nn = n * n;
    let omega = |k: usize| 2.0 * PI * k as f64 / n as f64;

    // Scale 1 is the coarsest detail band, scale `levels` the finest; wavelet
    // level l (1 = finest) uses dilation 2^(l-1).
    let mut bands = vec![SubbandInfo { scale: 0, orientation: Orientation::Lowpass, len: nn }];
    let mut responses = Vec::new();
    let mut lowpass_acc = vec![Complex64::new(1.0, 0.0); nn];
    let mut details = Vec::new();
    for level in 1..=levels {
        let dil = 1 << (level - 1);
        let h1: Vec<Complex64> = (0..n).map(|k| dilated_response(&lo, dil, omega(k))).collect();
        let g1: Vec<Complex64> = (0..n).map(|k| dilated_response(&hi, dil, omega(k))).collect();
        let mut hx_gy = vec![Complex64::new(0.0, 0.0); nn];
        let mut gx_hy = hx_gy.clone();
        let mut gx_gy = hx_gy.clone();
        for ky in 0..n {
            for kx in 0..n {
                let idx = ky * n + kx;
                let p = lowpass_acc[idx];
                hx_gy[idx] = p * h1[kx] * g1[ky];
                gx_hy[idx] = p * g1[kx] * h1[ky];
                gx_gy[idx] = p * g1[kx] * g1[ky];
                lowpass_acc[idx] = p * h1[kx] * h1[ky];
            }
        }
        details.push((levels - level + 1, [gx_hy, hx_gy, gx_gy]));
    }
    responses.push(lowpass_acc);
    details.sort_by_key(|(scale, _)| *scale);
    for (scale, resp) in details {
        let orients = [Orientation::WaveletX, Orientation::WaveletY, Orientation::WaveletDiagonal];
        for (o, r) in orients.into_iter().zip(resp) {
            bands.push(SubbandInfo { scale, orientation: o, len: nn });
            responses.push(r);
        }
    }
    let bank = FilterBank::new(n, SubbandLayout::new(bands)?, responses, 1e-12)?;
    Ok(UndecimatedWavelet { family, levels, bank })
}

impl MultilevelTransform for UndecimatedWavelet {
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{rand_grid, rand_real_grid, rng};

    const FAMILIES: [WaveletFamily; 3] =
        [WaveletFamily::Haar, WaveletFamily::Daubechies2, WaveletFamily::Daubechies4];

    #[test]
    fn filters_are_orthonormal() {
        for f in FAMILIES {
            let h = f.lowpass();
            let g = f.highpass();
            assert!((h.iter().sum::<f64>() - 2f64.sqrt()).abs() < 1e-14);
            assert!(g.iter().sum::<f64>().abs() < 1e-14);
            // Double-shift orthonormality.
            for s in (0..h.len()).step_by(2) {
                let d: f64 = (0..h.len() - s).map(|k| h[k] * h[k + s]).sum();
                let expect = if s == 0 { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-14, "{f:?} shift {s}: {d}");
            }
        }
    }

    #[test]
    fn layout_counts() {
        let w = build_wavelet(256, 4, WaveletFamily::Daubechies2).unwrap();
        assert_eq!(w.layout().len(), 13);
        assert!(w.layout().bands().iter().all(|b| b.len == 256 * 256));
        assert_eq!(w.layout().total_len(), 13 * 256 * 256);
        assert_eq!(w.num_scales(), 4);
        assert!(build_wavelet(24, 4, WaveletFamily::Haar).is_err());
        assert!(build_wavelet(32, 0, WaveletFamily::Haar).is_err());
    }

    #[test]
    fn constant_image_only_in_lowpass() {
        let w = build_wavelet(16, 1, WaveletFamily::Haar).unwrap();
        let u = ImageGrid::from_real(16, &[2.0; 256]).unwrap();
        let c = w.analyze(&u).unwrap();
        for j in 1..4 {
            assert!(c.subband(j).iter().all(|z| z.norm() < 1e-13));
        }
        assert!((c.subband(0)[0].re - 2.0).abs() < 1e-13);
    }

    #[test]
    fn parseval_and_perfect_reconstruction() {
        let mut r = rng(1);
        for f in FAMILIES {
            let w = build_wavelet(64, 3, f).unwrap();
            assert!(matches!(w.frame_bound(), FrameBound::Tight(a) if (a - 1.0).abs() < 1e-12));
            for _ in 0..3 {
                let u = rand_grid(&mut r, 64);
                let c = w.analyze(&u).unwrap();
                assert!((c.norm_sqr() - u.norm_sqr()).abs() < 1e-10 * u.norm_sqr());
                let back = w.synthesize(&c).unwrap();
                assert!((&back - &u).norm() < 1e-10 * u.norm());
            }
        }
    }

    #[test]
    fn real_images_give_real_coefficients() {
        let mut r = rng(2);
        let w = build_wavelet(32, 2, WaveletFamily::Daubechies4).unwrap();
        let c = w.analyze(&rand_real_grid(&mut r, 32)).unwrap();
        assert!(c.as_flat().iter().all(|z| z.im.abs() < 1e-12));
    }

    /// Haar level-1 x-detail is the normalized two-tap difference along rows.
    #[test]
    fn haar_detail_matches_spatial_filter() {
        let mut r = rng(4);
        let n = 8;
        let w = build_wavelet(n, 1, WaveletFamily::Haar).unwrap();
        let u = rand_real_grid(&mut r, n);
        let c = w.analyze(&u).unwrap();
        let xband = w
            .layout()
            .bands()
            .iter()
            .position(|b| b.orientation == Orientation::WaveletX)
            .unwrap();
        for i in 0..n {
            for j in 0..n {
                // (h_y * g_x * u)(i, j) with h = g = taps/sqrt2 at offsets 0 and 1.
                let im1 = (i + n - 1) % n;
                let jm1 = (j + n - 1) % n;
                let expect = 0.25
                    * ((u.at(i, j) - u.at(i, jm1)) + (u.at(im1, j) - u.at(im1, jm1))).re;
                assert!((c.subband(xband)[i * n + j].re - expect).abs() < 1e-13);
            }
        }
    }
}
