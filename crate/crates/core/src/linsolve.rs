//! The coupled `(u, v)` subproblem.
//!
//! Under the 2D DFT every block of the system except `beta A^* A` becomes a
//! per-frequency multiplier. When `A^* A` is Fourier-diagonal too, each
//! frequency is an independent 3x3 Hermitian solve. Otherwise the `v` blocks
//! are eliminated per frequency and the remaining `u` system is solved by CG.

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::fft::Fft2;
use crate::grid::{ImageGrid, VectorField};
use crate::grid_ops::{
    forward_gradient, forward_gradient_adjoint, fourier_symbol, sym_gradient, sym_gradient_adjoint, DiffOp,
};
use crate::sampling::SamplingOperator;
use crate::solver::{RhsVariant, SecondOrder, SolverConfig, SolverState};
use crate::transforms::{FrameBound, MultilevelTransform};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

/// Per-frequency multipliers of the block system, in FFT order.
///
/// Row/column order is `(u, v_x, v_y)`; the matrix at frequency `k` is
/// `[[b1, b4*, b5*], [b4, b2, b6*], [b5, b6, b3]]`.
#[derive(Clone, Debug)]
pub struct BlockSystemSpectra {
    n: usize,
    pub mode: SecondOrder,
    pub beta: f64,
    /// `b1` including `beta A^*A`; present only for Fourier-diagonal operators.
    pub b1: Option<Vec<f64>>,
    /// `b1 - beta A^*A`.
    pub b1_rest: Vec<f64>,
    pub b2: Vec<f64>,
    pub b3: Vec<f64>,
    pub b4: Vec<C>,
    pub b5: Vec<C>,
    pub b6: Vec<C>,
    /// `b1_rest` minus the eliminated `v` coupling.
    schur: Vec<f64>,
    fft: Fft2,
}

/// Right-hand side of the block system, one grid per block row.
#[derive(Clone, Debug, PartialEq)]
pub struct RightHandSide {
    pub r1: ImageGrid,
    pub r2: ImageGrid,
    pub r3: ImageGrid,
}

impl RightHandSide {
    pub fn norm_sqr(&self) -> f64 {
        self.r1.norm_sqr() + self.r2.norm_sqr() + self.r3.norm_sqr()
    }
}

/// Result of the CG path.
#[derive(Clone, Debug)]
pub struct CgSolution {
    pub u: ImageGrid,
    pub v: VectorField,
    pub iterations: usize,
    /// Final relative residual of the reduced system.
    pub residual: f64,
}

fn gram_multipliers(t: &dyn MultilevelTransform) -> Result<Vec<f64>> {
    let n = t.n();
    match t.frame_bound() {
        FrameBound::Tight(a) => Ok(vec![a; n * n]),
        FrameBound::FourierDiagonal => t.gram_fourier_diagonal(),
    }
}

fn check_penalties(cfg: &SolverConfig) -> Result<()> {
    for (name, p) in [("mu1", cfg.mu1), ("mu2", cfg.mu2), ("mu3", cfg.mu3), ("beta", cfg.beta)] {
        if !(p > 0.0) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {p}")));
        }
    }
    Ok(())
}

pub fn assemble_spectra(
    cfg: &SolverConfig,
    t: &dyn MultilevelTransform,
    a: &dyn SamplingOperator,
) -> Result<BlockSystemSpectra> {
    check_penalties(cfg)?;
    let n = a.n();
    check_len(n, t.n())?;
    let nn = n * n;
    let gram = if cfg.use_transform { gram_multipliers(t)? } else { vec![0.0; nn] };
    let sxf = fourier_symbol(DiffOp::ForwardX, n);
    let syf = fourier_symbol(DiffOp::ForwardY, n);
    let sxb = fourier_symbol(DiffOp::BackwardX, n);
    let syb = fourier_symbol(DiffOp::BackwardY, n);
    let (mu1, mu2, mu3) = (cfg.mu1, cfg.mu2, cfg.mu3);
    let grad_on = cfg.second_order != SecondOrder::Off;

    let mut b1_rest = vec![0.0; nn];
    let mut b2 = vec![0.0; nn];
    let mut b3 = vec![0.0; nn];
    let mut b4 = vec![ZERO; nn];
    let mut b5 = vec![ZERO; nn];
    let mut b6 = vec![ZERO; nn];
    for k in 0..nn {
        let (xf, yf) = (sxf.as_slice()[k], syf.as_slice()[k]);
        let (xb, yb) = (sxb.as_slice()[k], syb.as_slice()[k]);
        b1_rest[k] = mu1 * gram[k];
        if grad_on {
            b1_rest[k] += mu2 * (xf.norm_sqr() + yf.norm_sqr());
        }
        b2[k] = mu3 * (xb.norm_sqr() + 0.5 * yb.norm_sqr()) + mu2;
        b3[k] = mu3 * (yb.norm_sqr() + 0.5 * xb.norm_sqr()) + mu2;
        b4[k] = -mu2 * xf;
        b5[k] = -mu2 * yf;
        b6[k] = 0.5 * mu3 * xb.conj() * yb;
    }
    let schur = if cfg.second_order == SecondOrder::Tgv {
        (0..nn)
            .map(|k| {
                let det = b2[k] * b3[k] - b6[k].norm_sqr();
                let coupling = b3[k] * b4[k].norm_sqr() + b2[k] * b5[k].norm_sqr()
                    - 2.0 * (b4[k].conj() * b6[k].conj() * b5[k]).re;
                b1_rest[k] - coupling / det
            })
            .collect()
    } else {
        b1_rest.clone()
    };
    let b1 = a
        .fourier_diagonal()
        .map(|d| d.iter().zip(&b1_rest).map(|(d, r)| cfg.beta * d + r).collect());
    Ok(BlockSystemSpectra {
        n,
        mode: cfg.second_order,
        beta: cfg.beta,
        b1,
        b1_rest,
        b2,
        b3,
        b4,
        b5,
        b6,
        schur,
        fft: Fft2::new(n),
    })
}

/// Assembles `R1, R2, R3` from the current state.
pub fn build_rhs(
    state: &SolverState,
    cfg: &SolverConfig,
    t: &dyn MultilevelTransform,
    a: &dyn SamplingOperator,
    y: &[C],
) -> Result<RightHandSide> {
    check_len(a.measurement_len(), y.len())?;
    check_len(y.len(), state.yk.len())?;
    let n = a.n();
    let data: Vec<C> = match cfg.rhs_variant {
        RhsVariant::Combined => y.iter().zip(&state.yk).map(|(a, b)| a + b).collect(),
        RhsVariant::Accumulated => state.yk.clone(),
    };
    let mut r1 = a.adjoint(&data)?;
    r1.scale(cfg.beta);
    if cfg.use_transform {
        let mut wb = state.w.clone();
        wb.axpy(C::new(-1.0, 0.0), &state.bw);
        r1.axpy(C::new(cfg.mu1, 0.0), &t.adjoint_analyze(&wb)?);
    }
    let mut r2 = ImageGrid::zeros(n)?;
    let mut r3 = ImageGrid::zeros(n)?;
    if cfg.second_order != SecondOrder::Off {
        r1.axpy(C::new(cfg.mu2, 0.0), &forward_gradient_adjoint(&(&state.d - &state.bd)));
    }
    if cfg.second_order == SecondOrder::Tgv {
        let e = sym_gradient_adjoint(&(&state.t - &state.bt));
        r2.axpy(C::new(cfg.mu2, 0.0), &(&state.bd.x - &state.d.x));
        r2.axpy(C::new(cfg.mu3, 0.0), &e.x);
        r3.axpy(C::new(cfg.mu2, 0.0), &(&state.bd.y - &state.d.y));
        r3.axpy(C::new(cfg.mu3, 0.0), &e.y);
    }
    Ok(RightHandSide { r1, r2, r3 })
}

/// Applies the block operator to `(u, v)` with spatial-domain operators.
///
/// Outside the TGV mode the `v` rows reduce to the identity, which pins `v` to zero.
pub fn apply_block_operator(
    cfg: &SolverConfig,
    t: &dyn MultilevelTransform,
    a: &dyn SamplingOperator,
    u: &ImageGrid,
    v: &VectorField,
) -> Result<RightHandSide> {
    let mut r1 = a.normal(u)?;
    r1.scale(cfg.beta);
    if cfg.use_transform {
        r1.axpy(C::new(cfg.mu1, 0.0), &t.adjoint_analyze(&t.analyze(u)?)?);
    }
    match cfg.second_order {
        SecondOrder::Tgv => {
            let g = &forward_gradient(u) - v;
            r1.axpy(C::new(cfg.mu2, 0.0), &forward_gradient_adjoint(&g));
            let ee = sym_gradient_adjoint(&sym_gradient(v));
            let mut r2 = g.x.scaled(-cfg.mu2);
            r2.axpy(C::new(cfg.mu3, 0.0), &ee.x);
            let mut r3 = g.y.scaled(-cfg.mu2);
            r3.axpy(C::new(cfg.mu3, 0.0), &ee.y);
            Ok(RightHandSide { r1, r2, r3 })
        }
        SecondOrder::Tv => {
            r1.axpy(C::new(cfg.mu2, 0.0), &forward_gradient_adjoint(&forward_gradient(u)));
            Ok(RightHandSide { r1, r2: v.x.clone(), r3: v.y.clone() })
        }
        SecondOrder::Off => Ok(RightHandSide { r1, r2: v.x.clone(), r3: v.y.clone() }),
    }
}

/// `||K(u, v) - rhs|| / ||rhs||` with `K` from [`apply_block_operator`].
pub fn system_residual(
    cfg: &SolverConfig,
    t: &dyn MultilevelTransform,
    a: &dyn SamplingOperator,
    u: &ImageGrid,
    v: &VectorField,
    rhs: &RightHandSide,
) -> Result<f64> {
    let k = apply_block_operator(cfg, t, a, u, v)?;
    let diff = RightHandSide { r1: &k.r1 - &rhs.r1, r2: &k.r2 - &rhs.r2, r3: &k.r3 - &rhs.r3 };
    let scale = rhs.norm_sqr();
    Ok(if scale > 0.0 { (diff.norm_sqr() / scale).sqrt() } else { diff.norm_sqr().sqrt() })
}

/// Cramer's rule for a 3x3 system, with pivoted elimination when the
/// determinant underflows.
pub(crate) fn solve3(m: [[C; 3]; 3], r: [C; 3]) -> [C; 3] {
    let det3 = |m: &[[C; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let det = det3(&m);
    if det.norm() >= 1e-300 {
        let mut x = [ZERO; 3];
        for (c, xc) in x.iter_mut().enumerate() {
            let mut mc = m;
            for row in 0..3 {
                mc[row][c] = r[row];
            }
            *xc = det3(&mc) / det;
        }
        return x;
    }
    let mut a = m;
    let mut b = r;
    for col in 0..3 {
        let p = (col..3).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).unwrap();
        a.swap(col, p);
        b.swap(col, p);
        assert!(a[col][col].norm() > 0.0, "singular per-frequency block");
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                let sub = f * a[col][k];
                a[row][k] -= sub;
            }
            let sub = f * b[col];
            b[row] -= sub;
        }
    }
    let mut x = [ZERO; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in row + 1..3 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    x
}

impl BlockSystemSpectra {
    pub fn n(&self) -> usize {
        self.n
    }

    /// The Hermitian 3x3 block at frequency `k` (requires `b1`).
    pub fn block(&self, k: usize) -> Option<[[C; 3]; 3]> {
        let b1 = self.b1.as_ref()?[k];
        Some([
            [C::new(b1, 0.0), self.b4[k].conj(), self.b5[k].conj()],
            [self.b4[k], C::new(self.b2[k], 0.0), self.b6[k].conj()],
            [self.b5[k], self.b6[k], C::new(self.b3[k], 0.0)],
        ])
    }

    fn transform_rhs(&self, rhs: &RightHandSide) -> Result<[Vec<C>; 3]> {
        for r in [&rhs.r1, &rhs.r2, &rhs.r3] {
            check_len(self.n, r.n())?;
        }
        Ok([self.fft.forward(&rhs.r1), self.fft.forward(&rhs.r2), self.fft.forward(&rhs.r3)])
    }

    /// `M^{-1} r` for the 2x2 `v` block at frequency `k`.
    fn solve_v(&self, k: usize, r2: C, r3: C) -> (C, C) {
        let det = self.b2[k] * self.b3[k] - self.b6[k].norm_sqr();
        let vx = (self.b3[k] * r2 - self.b6[k].conj() * r3) / det;
        let vy = (self.b2[k] * r3 - self.b6[k] * r2) / det;
        (vx, vy)
    }

    fn to_spatial(&self, uh: Vec<C>, vxh: Option<(Vec<C>, Vec<C>)>) -> Result<(ImageGrid, VectorField)> {
        let u = self.fft.inverse(&uh);
        let v = match vxh {
            Some((x, y)) => VectorField::new(self.fft.inverse(&x), self.fft.inverse(&y))?,
            None => VectorField::zeros(self.n)?,
        };
        Ok((u, v))
    }
}

/// Direct per-frequency solve; needs a Fourier-diagonal operator.
pub fn solve_diagonal(spectra: &BlockSystemSpectra, rhs: &RightHandSide) -> Result<(ImageGrid, VectorField)> {
    let b1 = spectra.b1.as_ref().ok_or_else(|| {
        Error::InvalidParameter("direct solve needs an operator with a Fourier-diagonal normal matrix".into())
    })?;
    let [r1, r2, r3] = spectra.transform_rhs(rhs)?;
    let nn = r1.len();
    if spectra.mode != SecondOrder::Tgv {
        let uh = (0..nn).map(|k| r1[k] / b1[k]).collect();
        return spectra.to_spatial(uh, None);
    }
    let mut uh = vec![ZERO; nn];
    let mut vx = vec![ZERO; nn];
    let mut vy = vec![ZERO; nn];
    for k in 0..nn {
        let m = spectra.block(k).expect("b1 present");
        let x = solve3(m, [r1[k], r2[k], r3[k]]);
        uh[k] = x[0];
        vx[k] = x[1];
        vy[k] = x[2];
    }
    spectra.to_spatial(uh, Some((vx, vy)))
}

/// Eliminates `v` per frequency and solves the reduced `u` system
/// `beta A^*A u + F^*(s F u) = r` by conjugate gradients from `warm_start`.
pub fn solve_triangular_cg(
    spectra: &BlockSystemSpectra,
    rhs: &RightHandSide,
    a: &dyn SamplingOperator,
    warm_start: &ImageGrid,
    cg_iters: usize,
    cg_tol: f64,
) -> Result<CgSolution> {
    check_len(spectra.n, a.n())?;
    check_len(spectra.n, warm_start.n())?;
    let [r1, r2, r3] = spectra.transform_rhs(rhs)?;
    let nn = r1.len();
    let tgv = spectra.mode == SecondOrder::Tgv;
    let mut reduced = r1.clone();
    if tgv {
        for k in 0..nn {
            let (mx, my) = spectra.solve_v(k, r2[k], r3[k]);
            reduced[k] -= spectra.b4[k].conj() * mx + spectra.b5[k].conj() * my;
        }
    }
    let b = spectra.fft.inverse(&reduced);
    let apply = |x: &ImageGrid| -> Result<ImageGrid> {
        let mut out = a.normal(x)?;
        out.scale(spectra.beta);
        let mut spec = spectra.fft.forward(x);
        spec.iter_mut().zip(&spectra.schur).for_each(|(z, s)| *z *= *s);
        out.axpy(C::new(1.0, 0.0), &spectra.fft.inverse(&spec));
        Ok(out)
    };
    let (u, iterations, residual) = conjugate_gradient(apply, &b, warm_start, cg_iters, cg_tol)?;
    let v = if tgv {
        let uh = spectra.fft.forward(&u);
        let mut vx = vec![ZERO; nn];
        let mut vy = vec![ZERO; nn];
        for k in 0..nn {
            let (x, y) = spectra.solve_v(k, r2[k] - spectra.b4[k] * uh[k], r3[k] - spectra.b5[k] * uh[k]);
            vx[k] = x;
            vy[k] = y;
        }
        VectorField::new(spectra.fft.inverse(&vx), spectra.fft.inverse(&vy))?
    } else {
        VectorField::zeros(spectra.n)?
    };
    Ok(CgSolution { u, v, iterations, residual })
}

/// Plain CG for a Hermitian positive definite operator. Returns the iterate,
/// the number of iterations taken and the final relative residual.
pub fn conjugate_gradient<F>(
    apply: F,
    b: &ImageGrid,
    x0: &ImageGrid,
    max_iters: usize,
    tol: f64,
) -> Result<(ImageGrid, usize, f64)>
where
    F: Fn(&ImageGrid) -> Result<ImageGrid>,
{
    let bnorm = b.norm();
    if bnorm == 0.0 {
        return Ok((ImageGrid::zeros(b.n())?, 0, 0.0));
    }
    let mut x = x0.clone();
    let mut r = b - &apply(&x)?;
    let mut p = r.clone();
    let mut rs = r.norm_sqr();
    let mut it = 0;
    while it < max_iters && rs.sqrt() > tol * bnorm {
        let sp = apply(&p)?;
        let curvature = p.inner(&sp).re;
        if !(curvature > 0.0) {
            return Err(Error::CgBreakdown { iteration: it, curvature });
        }
        let alpha = rs / curvature;
        x.axpy(C::new(alpha, 0.0), &p);
        r.axpy(C::new(-alpha, 0.0), &sp);
        let rs_new = r.norm_sqr();
        let beta = rs_new / rs;
        rs = rs_new;
        p.scale(beta);
        p.axpy(C::new(1.0, 0.0), &r);
        it += 1;
    }
    Ok((x, it, rs.sqrt() / bnorm))
}
