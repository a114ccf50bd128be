use std::time::Instant;

use num_complex::Complex64;

use super::{ConvergenceLog, IterationRecord, SecondOrder, SolverConfig, SolverState};
use crate::error::{check_len, Error, Result};
use crate::grid::{ImageGrid, VectorField};
use crate::grid_ops::{forward_gradient, sym_gradient, tensor_l1_norm, vec_l1_norm};
use crate::linsolve::{assemble_spectra, build_rhs, solve_diagonal, solve_triangular_cg, BlockSystemSpectra};
use crate::metrics::{relative_error, ssim};
use crate::reweighting::{ReweightStrategy, WeightSchedule};
use crate::sampling::{measurement_norm, SamplingOperator};
use crate::shrinkage::{shrink, shrink2_field, shrink_frobenius_field};
use crate::transforms::{MultilevelTransform, SubbandStack};

/// Output of a split Bregman run.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub u: ImageGrid,
    pub log: ConvergenceLog,
    pub state: SolverState,
    pub weights: WeightSchedule,
}

/// Split Bregman with reweighted analysis shrinkage and a TGV (or TV) term.
pub struct SplitBregman<'a> {
    a: &'a dyn SamplingOperator,
    t: &'a dyn MultilevelTransform,
    cfg: SolverConfig,
    reference: Option<&'a ImageGrid>,
    fixed_weights: Option<WeightSchedule>,
    observer: Option<Box<dyn FnMut(&IterationRecord) + 'a>>,
}

impl<'a> SplitBregman<'a> {
    pub fn new(a: &'a dyn SamplingOperator, t: &'a dyn MultilevelTransform, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        check_len(a.n(), t.n())?;
        if cfg.cg_iters == 0 && a.fourier_diagonal().is_none() {
            return Err(Error::InvalidParameter(
                "cg_iters = 0 selects the direct solve, which needs a Fourier-diagonal operator".into(),
            ));
        }
        Ok(Self { a, t, cfg, reference: None, fixed_weights: None, observer: None })
    }

    /// Logs relative error and SSIM against `reference`.
    pub fn with_reference(mut self, reference: &'a ImageGrid) -> Self {
        self.reference = Some(reference);
        self
    }

    /// Uses `weights` for every shrink instead of the configured strategy.
    pub fn with_fixed_weights(mut self, weights: WeightSchedule) -> Self {
        self.fixed_weights = Some(weights);
        self
    }

    /// Called after every outer iteration.
    pub fn with_observer(mut self, f: impl FnMut(&IterationRecord) + 'a) -> Self {
        self.observer = Some(Box::new(f));
        self
    }

    pub fn run(mut self, y: &[Complex64]) -> Result<Reconstruction> {
        let (a, t, cfg) = (self.a, self.t, &self.cfg);
        check_len(a.measurement_len(), y.len())?;
        if let Some(r) = self.reference {
            check_len(a.n(), r.n())?;
        }
        let start = Instant::now();
        let spectra = assemble_spectra(cfg, t, a)?;
        let mut weights = match self.fixed_weights.take() {
            Some(w) => {
                if **w.w.layout() != **t.layout() {
                    return Err(Error::LayoutMismatch("fixed weights do not match the transform".into()));
                }
                w
            }
            None => {
                if cfg.strategy == ReweightStrategy::Oracle {
                    return Err(Error::InvalidParameter("the oracle strategy needs fixed weights".into()));
                }
                WeightSchedule::new(t.layout().clone(), cfg.strategy, cfg.epsilon, cfg.lambda)?
            }
        };
        let ynorm = measurement_norm(y);
        let mut state = SolverState::initial(a, t, y)?;
        let mut log = ConvergenceLog::default();
        let tgv = cfg.second_order == SecondOrder::Tgv;
        let grad_on = cfg.second_order != SecondOrder::Off;

        for k in 1..=cfg.max_iter {
            for _ in 0..cfg.inner_iters {
                for _ in 0..cfg.gs_iters {
                    let (u, v) = solve_uv(&spectra, &state, cfg, t, a, y)?;
                    state.u = u;
                    state.v = v;
                    if cfg.use_transform {
                        let c = t.analyze(&state.u)?;
                        weights.update(&c)?;
                        state.w = shrink_coefficients(&c, &state.bw, &weights, cfg.mu1);
                    }
                    if grad_on {
                        let mut g = forward_gradient(&state.u);
                        if tgv {
                            g = &g - &state.v;
                        }
                        state.d = shrink2_field(&(&g + &state.bd), cfg.alpha1 / cfg.mu2);
                    }
                    if tgv {
                        let mut e = sym_gradient(&state.v);
                        e.axpy(Complex64::new(1.0, 0.0), &state.bt);
                        state.t = shrink_frobenius_field(&e, cfg.alpha0 / cfg.mu3);
                    }
                }
            }
            // Bregman updates.
            if cfg.use_transform {
                let mut c = t.analyze(&state.u)?;
                c.axpy(Complex64::new(-1.0, 0.0), &state.w);
                state.bw.axpy(Complex64::new(1.0, 0.0), &c);
            }
            if grad_on {
                let mut g = forward_gradient(&state.u);
                if tgv {
                    g = &g - &state.v;
                }
                let delta = &g - &state.d;
                state.bd.axpy(Complex64::new(1.0, 0.0), &delta);
            }
            if tgv {
                let mut e = sym_gradient(&state.v);
                e.axpy(Complex64::new(-1.0, 0.0), &state.t);
                state.bt.axpy(Complex64::new(1.0, 0.0), &e);
            }
            let au = a.forward(&state.u)?;
            let mut res_sq = 0.0;
            for ((yk, yi), ai) in state.yk.iter_mut().zip(y).zip(&au) {
                let r = yi - ai;
                res_sq += r.norm_sqr();
                *yk += r;
            }
            state.iteration = k;
            if let Some(variable) = state.first_non_finite() {
                return Err(Error::NonFinite { iteration: k, variable });
            }
            let record = IterationRecord {
                iter: k,
                re: self.reference.map(|r| relative_error(r, &state.u)).transpose()?,
                ssim: self.reference.map(|r| ssim(r, &state.u)).transpose()?,
                residual: if ynorm > 0.0 { res_sq.sqrt() / ynorm } else { res_sq.sqrt() },
                objective: objective_surrogate(&state, cfg, t, &weights)?,
                seconds: start.elapsed().as_secs_f64(),
            };
            if let Some(f) = self.observer.as_mut() {
                f(&record);
            }
            log.records.push(record);
        }
        let mut u = state.u.clone();
        u.truncate_imag(1e-10);
        Ok(Reconstruction { u, log, state, weights })
    }
}

fn solve_uv(
    spectra: &BlockSystemSpectra,
    state: &SolverState,
    cfg: &SolverConfig,
    t: &dyn MultilevelTransform,
    a: &dyn SamplingOperator,
    y: &[Complex64],
) -> Result<(ImageGrid, VectorField)> {
    let rhs = build_rhs(state, cfg, t, a, y)?;
    if cfg.cg_iters == 0 {
        solve_diagonal(spectra, &rhs)
    } else {
        let s = solve_triangular_cg(spectra, &rhs, a, &state.u, cfg.cg_iters, cfg.cg_tol)?;
        Ok((s.u, s.v))
    }
}

/// `shrink(c + b, lambda_j W_j(l) / mu_1)` coefficientwise.
fn shrink_coefficients(c: &SubbandStack, b: &SubbandStack, weights: &WeightSchedule, mu1: f64) -> SubbandStack {
    let mut out = c.clone();
    for j in 0..c.num_subbands() {
        let scale = weights.lambda[j] / mu1;
        let w = weights.w.subband(j);
        let bj = b.subband(j);
        for (l, z) in out.subband_mut(j).iter_mut().enumerate() {
            *z = shrink(*z + bj[l], scale * w[l]);
        }
    }
    out
}

/// `sum_j lambda_j ||W_j Psi_j u||_1 + alpha_1 ||grad u - v||_1 + alpha_0 ||E v||_1`
/// at the current state and weights.
pub fn objective_surrogate(
    state: &SolverState,
    cfg: &SolverConfig,
    t: &dyn MultilevelTransform,
    weights: &WeightSchedule,
) -> Result<f64> {
    let mut total = 0.0;
    if cfg.use_transform {
        let c = t.analyze(&state.u)?;
        for j in 0..c.num_subbands() {
            let w = weights.w.subband(j);
            let s: f64 = c.subband(j).iter().zip(w).map(|(z, w)| w * z.norm()).sum();
            total += weights.lambda[j] * s;
        }
    }
    match cfg.second_order {
        SecondOrder::Tgv => {
            total += cfg.alpha1 * vec_l1_norm(&(&forward_gradient(&state.u) - &state.v));
            total += cfg.alpha0 * tensor_l1_norm(&sym_gradient(&state.v));
        }
        SecondOrder::Tv => total += cfg.alpha1 * vec_l1_norm(&forward_gradient(&state.u)),
        SecondOrder::Off => {}
    }
    Ok(total)
}

/// Runs [`SplitBregman`] with the configured strategy.
pub fn split_bregman_reconstruct(
    a: &dyn SamplingOperator,
    t: &dyn MultilevelTransform,
    y: &[Complex64],
    cfg: &SolverConfig,
    reference: Option<&ImageGrid>,
) -> Result<(ImageGrid, ConvergenceLog)> {
    let mut sb = SplitBregman::new(a, t, cfg.clone())?;
    if let Some(r) = reference {
        sb = sb.with_reference(r);
    }
    let rec = sb.run(y)?;
    Ok((rec.u, rec.log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_ops::sym_gradient;
    use crate::phantom::Phantom;
    use crate::sampling::{fourier_operator, make_radial_mask, radon_operator, RadialMask};
    use crate::test_util::{rand_field, rand_grid, rng};
    use crate::transforms::{build_wavelet, WaveletFamily};

    fn quick(max_iter: usize) -> SolverConfig {
        SolverConfig { max_iter, inner_iters: 1, gs_iters: 1, ..SolverConfig::wavelet_fourier() }
    }

    #[test]
    fn full_sampling_recovers_the_image() {
        let n = 32;
        let u = Phantom::SheppLogan.generate(n).unwrap();
        let a = fourier_operator(&RadialMask::from_centered(n, 0, vec![true; n * n]).unwrap());
        let t = build_wavelet(n, 2, WaveletFamily::Haar).unwrap();
        let y = a.forward(&u).unwrap();
        let (rec, log) = split_bregman_reconstruct(&a, &t, &y, &quick(60), Some(&u)).unwrap();
        assert!(relative_error(&u, &rec).unwrap() < 1e-6, "{:?}", log.last());
        assert!(log.last().unwrap().residual < 1e-6);
    }

    #[test]
    fn objective_matches_explicit_sums() {
        let n = 16;
        let mut r = rng(3);
        let a = fourier_operator(&make_radial_mask(n, 6, 0).unwrap());
        let t = build_wavelet(n, 2, WaveletFamily::Haar).unwrap();
        let cfg = SolverConfig { alpha0: 0.7, alpha1: 1.3, ..SolverConfig::default() };
        let mut s = SolverState::zeros(&a, &t).unwrap();
        let mut weights = WeightSchedule::new(t.layout().clone(), ReweightStrategy::MlMax, 0.1, 1.0).unwrap();
        assert_eq!(objective_surrogate(&s, &cfg, &t, &weights).unwrap(), 0.0);

        s.u = rand_grid(&mut r, n);
        s.v = rand_field(&mut r, n);
        let c = t.analyze(&s.u).unwrap();
        weights.update(&c).unwrap();
        let mut want = 0.0;
        for j in 0..c.num_subbands() {
            for (l, z) in c.subband(j).iter().enumerate() {
                want += weights.lambda[j] * weights.w.subband(j)[l] * z.norm();
            }
        }
        let g = forward_gradient(&s.u);
        let e = sym_gradient(&s.v);
        for k in 0..n * n {
            let dx = g.x.as_slice()[k] - s.v.x.as_slice()[k];
            let dy = g.y.as_slice()[k] - s.v.y.as_slice()[k];
            want += cfg.alpha1 * (dx.norm_sqr() + dy.norm_sqr()).sqrt();
            let (xx, xy, yy) = (e.xx.as_slice()[k], e.xy.as_slice()[k], e.yy.as_slice()[k]);
            want += cfg.alpha0 * (xx.norm_sqr() + 2.0 * xy.norm_sqr() + yy.norm_sqr()).sqrt();
        }
        let got = objective_surrogate(&s, &cfg, &t, &weights).unwrap();
        assert!((got - want).abs() < 1e-10 * want, "{got} vs {want}");
    }

    #[test]
    fn reweighting_beats_constant_thresholds() {
        let n = 64;
        let u = Phantom::SheppLogan.generate(n).unwrap();
        let a = fourier_operator(&make_radial_mask(n, 12, 0).unwrap());
        let t = build_wavelet(n, 3, WaveletFamily::Haar).unwrap();
        let y = a.forward(&u).unwrap();
        let base = SolverConfig { max_iter: 40, epsilon: 0.1, ..SolverConfig::default() };
        let run = |strategy| {
            let cfg = SolverConfig { strategy, ..base.clone() };
            split_bregman_reconstruct(&a, &t, &y, &cfg, Some(&u)).unwrap().0
        };
        let re_ml = relative_error(&u, &run(ReweightStrategy::MlMax)).unwrap();
        let re_none = relative_error(&u, &run(ReweightStrategy::None)).unwrap();
        assert!(re_ml < re_none, "{re_ml} vs {re_none}");
    }

    #[test]
    fn cg_path_tracks_the_direct_path() {
        let n = 16;
        let u = Phantom::PiecewiseAffine.generate(32).unwrap();
        let u = ImageGrid::from_fn(n, |i, j| u.at(2 * i, 2 * j)).unwrap();
        let a = fourier_operator(&make_radial_mask(n, 6, 0).unwrap());
        let t = build_wavelet(n, 2, WaveletFamily::Haar).unwrap();
        let y = a.forward(&u).unwrap();
        let direct = quick(5);
        let cg = SolverConfig { cg_iters: 400, cg_tol: 1e-14, ..direct.clone() };
        let (u1, _) = split_bregman_reconstruct(&a, &t, &y, &direct, None).unwrap();
        let (u2, _) = split_bregman_reconstruct(&a, &t, &y, &cg, None).unwrap();
        assert!(relative_error(&u1, &u2).unwrap() < 1e-6);
    }

    #[test]
    fn runs_are_deterministic() {
        let n = 32;
        let u = Phantom::TextureMix.generate(n).unwrap();
        let a = fourier_operator(&make_radial_mask(n, 8, 1).unwrap());
        let t = build_wavelet(n, 2, WaveletFamily::Haar).unwrap();
        let y = a.forward(&u).unwrap();
        let (r1, l1) = split_bregman_reconstruct(&a, &t, &y, &quick(4), Some(&u)).unwrap();
        let (r2, l2) = split_bregman_reconstruct(&a, &t, &y, &quick(4), Some(&u)).unwrap();
        assert_eq!(r1, r2);
        for (p, q) in l1.records.iter().zip(&l2.records) {
            assert_eq!((p.re, p.ssim, p.residual, p.objective), (q.re, q.ssim, q.residual, q.objective));
        }
    }

    #[test]
    fn observer_sees_every_iteration() {
        let n = 16;
        let a = fourier_operator(&make_radial_mask(n, 6, 0).unwrap());
        let t = build_wavelet(n, 1, WaveletFamily::Haar).unwrap();
        let y = vec![Complex64::new(1.0, 0.0); a.measurement_len()];
        let mut seen = Vec::new();
        let rec = SplitBregman::new(&a, &t, quick(3)).unwrap().with_observer(|r| seen.push(r.iter)).run(&y).unwrap();
        assert_eq!(seen, vec![1, 2, 3]);
        assert!(rec.log.records.iter().all(|r| r.re.is_none()));
    }

    #[test]
    fn configuration_errors() {
        let n = 16;
        let fourier = fourier_operator(&make_radial_mask(n, 6, 0).unwrap());
        let radon = radon_operator(n, 4).unwrap();
        let t = build_wavelet(n, 1, WaveletFamily::Haar).unwrap();
        assert!(SplitBregman::new(&radon, &t, quick(1)).is_err());
        let oracle = SolverConfig { strategy: ReweightStrategy::Oracle, ..quick(1) };
        let y = vec![Complex64::default(); fourier.measurement_len()];
        assert!(SplitBregman::new(&fourier, &t, oracle).unwrap().run(&y).is_err());
        assert!(SplitBregman::new(&fourier, &t, quick(1)).unwrap().run(&y[1..]).is_err());
    }

    #[test]
    fn non_finite_data_aborts() {
        let n = 16;
        let a = fourier_operator(&make_radial_mask(n, 6, 0).unwrap());
        let t = build_wavelet(n, 1, WaveletFamily::Haar).unwrap();
        let mut y = vec![Complex64::default(); a.measurement_len()];
        y[3] = Complex64::new(f64::NAN, 0.0);
        let err = SplitBregman::new(&a, &t, quick(2)).unwrap().run(&y).unwrap_err();
        assert!(matches!(err, Error::NonFinite { iteration: 1, .. }), "{err}");
    }
}
