use std::sync::Arc;

use num_complex::Complex64;

use super::{FrameBound, SubbandLayout, SubbandStack};
use crate::error::{check_len, Error, Result};
use crate::fft::Fft2;
use crate::grid::ImageGrid;

/// A bank of periodic convolution filters given by their DFT responses.
///
/// Subband `j` is `F^{-1}(H_j . F u)`, so the analysis operator is a stack of
/// circulant matrices and its Gram matrix is diagonal in frequency.
#[derive(Clone, Debug)]
pub struct FilterBank {
    n: usize,
    layout: Arc<SubbandLayout>,
    responses: Vec<Vec<Complex64>>,
    gram: Vec<f64>,
    bound: FrameBound,
    fft: Fft2,
}

impl FilterBank {
    /// `tight_tol` decides whether the Gram diagonal is constant enough to be
    /// declared a tight frame.
    pub fn new(
        n: usize,
        layout: SubbandLayout,
        responses: Vec<Vec<Complex64>>,
        tight_tol: f64,
    ) -> Result<Self> {
        if responses.len() != layout.len() {
            return Err(Error::LayoutMismatch(format!(
                "{} responses for {} subbands",
                responses.len(),
                layout.len()
            )));
        }
        for r in &responses {
            check_len(n * n, r.len())?;
        }
        let mut gram = vec![0.0; n * n];
        for r in &responses {
            for (g, h) in gram.iter_mut().zip(r) {
                *g += h.norm_sqr();
            }
        }
        let (lo, hi) = gram
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &g| (lo.min(g), hi.max(g)));
        if lo <= 0.0 {
            return Err(Error::InvalidParameter(
                "filter bank misses some frequencies (not a frame)".into(),
            ));
        }
        let mean = gram.iter().sum::<f64>() / gram.len() as f64;
        let bound = if (hi - lo) <= tight_tol * mean {
            FrameBound::Tight(mean)
        } else {
            FrameBound::FourierDiagonal
        };
        Ok(Self {
            n,
            layout: Arc::new(layout),
            responses,
            gram,
            bound,
            fft: Fft2::new(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layout(&self) -> &Arc<SubbandLayout> {
        &self.layout
    }

    pub fn bound(&self) -> FrameBound {
        self.bound
    }

    pub fn gram(&self) -> &[f64] {
        &self.gram
    }

    pub fn response(&self, j: usize) -> &[Complex64] {
        &self.responses[j]
    }

    pub fn analyze(&self, u: &ImageGrid) -> Result<SubbandStack> {
        check_len(self.n, u.n())?;
        let spec = self.fft.forward(u);
        let nn = self.n * self.n;
        let mut out = SubbandStack::zeros(self.layout.clone());
        for (j, h) in self.responses.iter().enumerate() {
            let band = out.subband_mut(j);
            debug_assert_eq!(band.len(), nn);
            for ((b, s), hk) in band.iter_mut().zip(&spec).zip(h) {
                *b = s * hk;
            }
            self.fft.inverse_in_place(band);
        }
        Ok(out)
    }

    /// Spectrum of `Psi^* c`.
    fn adjoint_spectrum(&self, c: &SubbandStack) -> Result<Vec<Complex64>> {
        c.check_layout(&self.layout)?;
        let nn = self.n * self.n;
        let mut acc = vec![Complex64::new(0.0, 0.0); nn];
        let mut buf = vec![Complex64::new(0.0, 0.0); nn];
        for (j, h) in self.responses.iter().enumerate() {
            buf.copy_from_slice(c.subband(j));
            self.fft.forward_in_place(&mut buf);
            for ((a, b), hk) in acc.iter_mut().zip(&buf).zip(h) {
                *a += b * hk.conj();
            }
        }
        Ok(acc)
    }

    pub fn adjoint(&self, c: &SubbandStack) -> Result<ImageGrid> {
        let spec = self.adjoint_spectrum(c)?;
        Ok(self.fft.inverse(&spec))
    }

    pub fn synthesize(&self, c: &SubbandStack) -> Result<ImageGrid> {
        let mut spec = self.adjoint_spectrum(c)?;
        match self.bound {
            FrameBound::Tight(a) => spec.iter_mut().for_each(|z| *z /= a),
            FrameBound::FourierDiagonal => {
                spec.iter_mut().zip(&self.gram).for_each(|(z, g)| *z /= *g)
            }
        }
        Ok(self.fft.inverse(&spec))
    }
}
