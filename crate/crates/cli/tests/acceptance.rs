//! End-to-end acceptance checks, one PASS/FAIL line per criterion.
//!
//! `cargo test --test acceptance -- 1 3 8` runs a subset by number.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use anyhow::{ensure, Context, Result};
use mlrecon_core::experiment::{run_experiment, ExperimentConfig, RunOutput};
use mlrecon_core::grid::{ImageGrid, SymTensorField, VectorField};
use mlrecon_core::grid_ops::{
    forward_gradient, forward_gradient_adjoint, sym_gradient, sym_gradient_adjoint, tensor_frobenius, DiffOp,
};
use mlrecon_core::linsolve::{
    apply_block_operator, assemble_spectra, build_rhs, solve_diagonal, solve_triangular_cg, system_residual,
};
use mlrecon_core::metrics::relative_error;
use mlrecon_core::sampling::{
    fourier_operator, inpainting_operator, make_radial_mask, radon_operator, random_pixel_mask, SamplingOperator,
};
use mlrecon_core::shrinkage::{shrink, shrink2, shrink_frobenius};
use mlrecon_core::solver::{IhtConfig, IhtStrategy, SolverConfig, SolverState};
use mlrecon_core::transforms::{
    build_shearlet, build_wavelet, FrameBound, MultilevelTransform, SubbandStack, WaveletFamily,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TRIALS: usize = 100;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> Result<ExperimentConfig> {
    Ok(ExperimentConfig::load(configs_dir().join(name))?)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rand_c(r: &mut ChaCha8Rng) -> C {
    C::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
}

fn rand_vec(r: &mut ChaCha8Rng, len: usize) -> Vec<C> {
    (0..len).map(|_| rand_c(r)).collect()
}

fn rand_grid(r: &mut ChaCha8Rng, n: usize) -> ImageGrid {
    ImageGrid::from_vec(n, rand_vec(r, n * n)).unwrap()
}

fn rand_field(r: &mut ChaCha8Rng, n: usize) -> VectorField {
    VectorField::new(rand_grid(r, n), rand_grid(r, n)).unwrap()
}

fn rand_tensor(r: &mut ChaCha8Rng, n: usize) -> SymTensorField {
    SymTensorField::new(rand_grid(r, n), rand_grid(r, n), rand_grid(r, n)).unwrap()
}

fn rand_stack(r: &mut ChaCha8Rng, t: &dyn MultilevelTransform) -> SubbandStack {
    SubbandStack::from_flat(t.layout().clone(), rand_vec(r, t.layout().total_len())).unwrap()
}

/// `sum conj(a) b`
fn vdot(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn vnorm(a: &[C]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn field_dot(a: &VectorField, b: &VectorField) -> C {
    vdot(a.x.as_slice(), b.x.as_slice()) + vdot(a.y.as_slice(), b.y.as_slice())
}

fn tensor_dot(a: &SymTensorField, b: &SymTensorField) -> C {
    vdot(a.xx.as_slice(), b.xx.as_slice())
        + vdot(a.xy.as_slice(), b.xy.as_slice()) * 2.0
        + vdot(a.yy.as_slice(), b.yy.as_slice())
}

/// `|<Ax, y> - <x, A^* y>|` relative to `||Ax|| ||y||`.
fn adjoint_gap(lhs: C, rhs: C, scale: f64) -> f64 {
    (lhs - rhs).norm() / scale.max(f64::MIN_POSITIVE)
}

// ---------------------------------------------------------------- criterion 1

fn operator_adjoints(r: &mut ChaCha8Rng, name: &str, a: &dyn SamplingOperator, worst: &mut Vec<(String, f64)>) -> Result<()> {
    let mut w = 0.0f64;
    for _ in 0..TRIALS {
        let u = rand_grid(r, a.n());
        let y = rand_vec(r, a.measurement_len());
        let au = a.forward(&u)?;
        let aty = a.adjoint(&y)?;
        w = w.max(adjoint_gap(vdot(&au, &y), vdot(u.as_slice(), aty.as_slice()), vnorm(&au) * vnorm(&y)));
    }
    worst.push((name.into(), w));
    Ok(())
}

fn transform_checks(r: &mut ChaCha8Rng, name: &str, t: &dyn MultilevelTransform, worst: &mut Vec<(String, f64)>) -> Result<()> {
    let bound = match t.frame_bound() {
        FrameBound::Tight(a) => a,
        FrameBound::FourierDiagonal => anyhow::bail!("{name} does not declare a tight frame"),
    };
    let (mut adj, mut pr, mut tight) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..TRIALS {
        let u = rand_grid(r, t.n());
        let c = rand_stack(r, t);
        let tu = t.analyze(&u)?;
        let tc = t.adjoint_analyze(&c)?;
        adj = adj.max(adjoint_gap(
            vdot(tu.as_flat(), c.as_flat()),
            vdot(u.as_slice(), tc.as_slice()),
            tu.norm_sqr().sqrt() * c.norm_sqr().sqrt(),
        ));
        pr = pr.max((&t.synthesize(&tu)? - &u).norm() / u.norm());
        tight = tight.max((&t.adjoint_analyze(&tu)? - &u.scaled(bound)).norm() / u.norm());
    }
    worst.push((format!("{name} adjoint"), adj));
    worst.push((format!("{name} reconstruction"), pr));
    worst.push((format!("{name} tightness (a = {bound:.6})"), tight));
    Ok(())
}

fn criterion_1() -> Result<Outcome> {
    let mut r = rng(1);
    let mut worst = Vec::new();
    let n = 64;
    operator_adjoints(&mut r, "fourier", &fourier_operator(&make_radial_mask(n, 25, 0)?), &mut worst)?;
    operator_adjoints(&mut r, "radon", &radon_operator(32, 18)?, &mut worst)?;
    operator_adjoints(&mut r, "inpaint", &inpainting_operator(n, &random_pixel_mask(n, 0.5, 0)?)?, &mut worst)?;

    let (mut g, mut e) = (0.0f64, 0.0f64);
    let mut diff = [0.0f64; 4];
    for _ in 0..TRIALS {
        let u = rand_grid(&mut r, n);
        let p = rand_field(&mut r, n);
        let q = rand_tensor(&mut r, n);
        let gu = forward_gradient(&u);
        let gtp = forward_gradient_adjoint(&p);
        g = g.max(adjoint_gap(field_dot(&gu, &p), vdot(u.as_slice(), gtp.as_slice()), gu.norm_sqr().sqrt() * p.norm_sqr().sqrt()));
        let ep = sym_gradient(&p);
        let etq = sym_gradient_adjoint(&q);
        e = e.max(adjoint_gap(tensor_dot(&ep, &q), field_dot(&p, &etq), ep.norm_sqr().sqrt() * q.norm_sqr().sqrt()));
        let v = rand_grid(&mut r, n);
        for (k, op) in [DiffOp::ForwardX, DiffOp::ForwardY, DiffOp::BackwardX, DiffOp::BackwardY].into_iter().enumerate() {
            let du = op.apply(&u);
            let dv = op.apply_adjoint(&v);
            diff[k] = diff[k].max(adjoint_gap(vdot(du.as_slice(), v.as_slice()), vdot(u.as_slice(), dv.as_slice()), du.norm() * v.norm()));
        }
    }
    worst.push(("gradient".into(), g));
    worst.push(("symmetrized gradient".into(), e));
    worst.push(("difference operators".into(), diff.into_iter().fold(0.0, f64::max)));

    transform_checks(&mut r, "haar J=4", &build_wavelet(n, 4, WaveletFamily::Haar)?, &mut worst)?;
    transform_checks(&mut r, "db2 J=3", &build_wavelet(n, 3, WaveletFamily::Daubechies2)?, &mut worst)?;
    transform_checks(&mut r, "db4 J=3", &build_wavelet(n, 3, WaveletFamily::Daubechies4)?, &mut worst)?;
    let sh = build_shearlet(n, &[0, 1, 1])?;
    let parseval = sh.frame_bound() == FrameBound::Tight(1.0);
    transform_checks(&mut r, "shearlet [0,1,1]", &sh, &mut worst)?;

    let max = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let (name, _) = worst.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    outcome(
        max < 1e-10 && parseval,
        format!("{} checks x {TRIALS} trials, worst {max:.2e} ({name}), shearlet Parseval: {parseval}", worst.len()),
    )
}

// ---------------------------------------------------------------- criterion 2

fn flatten(u: &ImageGrid, v: &VectorField) -> DVector<C> {
    DVector::from_iterator(3 * u.len(), u.as_slice().iter().chain(v.x.as_slice()).chain(v.y.as_slice()).copied())
}

fn unflatten(n: usize, x: &DVector<C>) -> (ImageGrid, VectorField) {
    let nn = n * n;
    let g = |k: usize| ImageGrid::from_vec(n, x.as_slice()[k * nn..(k + 1) * nn].to_vec()).unwrap();
    (g(0), VectorField::new(g(1), g(2)).unwrap())
}

fn criterion_2() -> Result<Outcome> {
    let n = 8;
    let cfg = SolverConfig::wavelet_fourier();
    let t = build_wavelet(n, 2, WaveletFamily::Haar)?;
    let a = fourier_operator(&make_radial_mask(n, 3, 0)?);
    let dim = 3 * n * n;
    let mut dense = DMatrix::<C>::zeros(dim, dim);
    for col in 0..dim {
        let mut e = DVector::<C>::zeros(dim);
        e[col] = C::new(1.0, 0.0);
        let (u, v) = unflatten(n, &e);
        let k = apply_block_operator(&cfg, &t, &a, &u, &v)?;
        dense.set_column(col, &flatten(&k.r1, &VectorField::new(k.r2, k.r3)?));
    }
    let lu = dense.clone().lu();
    let spectra = assemble_spectra(&cfg, &t, &a)?;

    let (mut res, mut err, mut gap) = (0.0f64, 0.0f64, 0.0f64);
    let mut r = rng(2);
    for _ in 0..10 {
        let mut s = SolverState::zeros(&a, &t)?;
        s.u = rand_grid(&mut r, n);
        s.w = rand_stack(&mut r, &t);
        s.bw = rand_stack(&mut r, &t);
        s.d = rand_field(&mut r, n);
        s.bd = rand_field(&mut r, n);
        s.t = rand_tensor(&mut r, n);
        s.bt = rand_tensor(&mut r, n);
        s.yk = rand_vec(&mut r, a.measurement_len());
        let y = rand_vec(&mut r, a.measurement_len());
        let rhs = build_rhs(&s, &cfg, &t, &a, &y)?;
        let b = flatten(&rhs.r1, &VectorField::new(rhs.r2.clone(), rhs.r3.clone())?);
        let exact = lu.solve(&b).context("dense system is singular")?;

        let (du, dv) = solve_diagonal(&spectra, &rhs)?;
        let cg = solve_triangular_cg(&spectra, &rhs, &a, &s.u, 1000, 1e-10)?;
        for (u, v) in [(&du, &dv), (&cg.u, &cg.v)] {
            res = res.max(system_residual(&cfg, &t, &a, u, v, &rhs)?);
            err = err.max((flatten(u, v) - &exact).norm() / exact.norm());
        }
        gap = gap.max((flatten(&du, &dv) - flatten(&cg.u, &cg.v)).norm() / exact.norm());
    }
    outcome(
        res < 1e-8 && err < 1e-8 && gap < 1e-6,
        format!("10 random states: residual {res:.2e}, distance to dense solve {err:.2e}, path gap {gap:.2e}"),
    )
}

// ---------------------------------------------------------------- criterion 3

/// Coarse-to-fine grid search of a convex function over `R^D`.
fn grid_min<const D: usize>(f: impl Fn(&[f64; D]) -> f64, centre: [f64; D], span: f64) -> f64 {
    const PTS: usize = 4;
    const SIDE: usize = 2 * PTS + 1;
    let mut best = centre;
    let mut best_val = f(&centre);
    let mut h = span / PTS as f64;
    let total = SIDE.pow(D as u32);
    for _ in 0..60 {
        let c = best;
        for idx in 0..total {
            let mut p = c;
            let mut k = idx;
            for x in p.iter_mut() {
                *x += ((k % SIDE) as f64 - PTS as f64) * h;
                k /= SIDE;
            }
            let v = f(&p);
            if v < best_val {
                best_val = v;
                best = p;
            }
        }
        h *= 0.5;
    }
    best_val
}

fn criterion_3() -> Result<Outcome> {
    let mut r = rng(3);
    let mut gaps = [f64::NEG_INFINITY; 3];
    for _ in 0..1000 {
        let lam = r.random_range(0.0..1.5);

        let z = rand_c(&mut r);
        let obj = |d: &[f64; 2]| lam * d[0].hypot(d[1]) + 0.5 * ((d[0] - z.re).powi(2) + (d[1] - z.im).powi(2));
        let s = shrink(z, lam);
        gaps[0] = gaps[0].max(obj(&[s.re, s.im]) - grid_min(obj, [z.re, z.im], 2.0));

        let (x, y) = (r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        let obj = |d: &[f64; 2]| lam * d[0].hypot(d[1]) + 0.5 * ((d[0] - x).powi(2) + (d[1] - y).powi(2));
        let (sx, sy) = shrink2(C::new(x, 0.0), C::new(y, 0.0), lam);
        gaps[1] = gaps[1].max(obj(&[sx.re, sy.re]) - grid_min(obj, [x, y], 2.0));

        let m = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
        let fro = |d: &[f64; 3]| tensor_frobenius(C::new(d[0], 0.0), C::new(d[1], 0.0), C::new(d[2], 0.0));
        let obj = |d: &[f64; 3]| {
            lam * fro(d) + 0.5 * ((d[0] - m[0]).powi(2) + 2.0 * (d[1] - m[1]).powi(2) + (d[2] - m[2]).powi(2))
        };
        let (a, b, c) = shrink_frobenius(C::new(m[0], 0.0), C::new(m[1], 0.0), C::new(m[2], 0.0), lam);
        gaps[2] = gaps[2].max(obj(&[a.re, b.re, c.re]) - grid_min(obj, m, 2.0));
    }
    outcome(
        gaps.iter().all(|&g| g < 1e-6),
        format!(
            "1000 instances each, worst excess over grid search: shrink {:.1e}, shrink2 {:.1e}, shrink_F {:.1e}",
            gaps[0], gaps[1], gaps[2]
        ),
    )
}

// ------------------------------------------------------------ criteria 4 to 9

/// Runs shared between criteria, each made at most once.
#[derive(Default)]
struct Runs {
    wirl1: Option<(RunOutput, Duration)>,
    wl1: Option<(RunOutput, Duration)>,
    shepp: Option<(RunOutput, Duration)>,
    radon: Option<(RunOutput, Duration)>,
}

fn timed(cfg: &str) -> Result<(RunOutput, Duration)> {
    let start = Instant::now();
    let out = run_experiment(&load(cfg)?, |_| {})?;
    Ok((out, start.elapsed()))
}

impl Runs {
    fn fourier(&mut self) -> Result<(&RunOutput, &RunOutput, Duration)> {
        if self.wirl1.is_none() {
            self.wirl1 = Some(timed("fourier_wirl1.toml")?);
            self.wl1 = Some(timed("fourier_wl1.toml")?);
        }
        let (w, tw) = self.wirl1.as_ref().unwrap();
        let (b, tb) = self.wl1.as_ref().unwrap();
        Ok((w, b, *tw + *tb))
    }

    fn shepp(&mut self) -> Result<&(RunOutput, Duration)> {
        if self.shepp.is_none() {
            self.shepp = Some(timed("shepp_fourier.toml")?);
        }
        Ok(self.shepp.as_ref().unwrap())
    }

    fn radon(&mut self) -> Result<&(RunOutput, Duration)> {
        if self.radon.is_none() {
            self.radon = Some(timed("radon.toml")?);
        }
        Ok(self.radon.as_ref().unwrap())
    }
}

fn criterion_4(runs: &mut Runs) -> Result<Outcome> {
    let (w, b, dt) = runs.fourier()?;
    let (re_w, re_b) = (w.final_re()?, b.final_re()?);
    let (ss_w, ss_b) = (w.final_ssim()?, b.final_ssim()?);
    let gain = 1.0 - re_w / re_b;
    outcome(
        re_w <= 0.05 && gain >= 0.2 && ss_w > ss_b && dt < Duration::from_secs(300),
        format!(
            "sampling {:.2}%: WIRL1 RE {re_w:.4} SSIM {ss_w:.4}, WL1 RE {re_b:.4} SSIM {ss_b:.4}, improvement {:.0}%, {:.0} s",
            100.0 * w.sampling_rate,
            100.0 * gain,
            dt.as_secs_f64()
        ),
    )
}

fn criterion_5(runs: &mut Runs) -> Result<Outcome> {
    let (out, dt) = runs.shepp()?;
    let re = out.final_re()?;
    outcome(
        re <= 0.01 && *dt < Duration::from_secs(480),
        format!("sampling {:.2}%: RE {re:.4}, {:.0} s", 100.0 * out.sampling_rate, dt.as_secs_f64()),
    )
}

fn criterion_6(runs: &mut Runs) -> Result<Outcome> {
    let (out, dt) = runs.radon()?;
    let re = out.final_re()?;
    let aty = &out.adjoint;
    let scale = aty.inner(&out.reference).re / aty.norm_sqr();
    let baseline = relative_error(&out.reference, &aty.scaled(scale))?;
    let raw = relative_error(&out.reference, aty)?;
    outcome(
        re <= 0.05 && baseline >= 3.0 * re && *dt < Duration::from_secs(900),
        format!(
            "RE {re:.2e}, best-scaled adjoint RE {baseline:.4} (unscaled {raw:.1}), factor {:.1e}, {:.0} s",
            baseline / re.max(f64::MIN_POSITIVE),
            dt.as_secs_f64()
        ),
    )
}

fn criterion_7(runs: &mut Runs) -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut pass = true;
    let (w, b, _) = runs.fourier()?;
    let mut logs = vec![("wirl1", w.log.clone()), ("wl1", b.log.clone())];
    logs.push(("shepp", runs.shepp()?.0.log.clone()));
    logs.push(("radon", runs.radon()?.0.log.clone()));
    for (name, log) in logs {
        let at10 = log.at(10).context("fewer than 10 iterations")?.residual;
        let last = log.last().unwrap().residual;
        let ratio = last / at10;
        pass &= ratio < 0.1;
        parts.push(format!("{name} {:.2}%", 100.0 * ratio));
    }
    outcome(pass, format!("final / iteration-10 residual: {}", parts.join(", ")))
}

fn criterion_8() -> Result<Outcome> {
    let base = load("inpaint.toml")?;
    let params = [1e-4, 1e-3, 1e-2, 1e-1];
    let mut best = Vec::new();
    for strategy in [IhtStrategy::F1, IhtStrategy::F2] {
        let mut b = (f64::INFINITY, 0.0);
        for &param in &params {
            let cfg = ExperimentConfig {
                iht: Some(IhtConfig { strategy, param, ..base.iht_config() }),
                ..base.clone()
            };
            let re = run_experiment(&cfg, |_| {})?.final_re()?;
            if re < b.0 {
                b = (re, param);
            }
        }
        best.push(b);
    }
    let (f1, f2) = (best[0], best[1]);
    outcome(
        f2.0 <= f1.0,
        format!("best over {params:?}, {} iterations: f1 RE {:.4} (param {:e}), f2 RE {:.4} (param {:e})", base.iht_config().iters, f1.0, f1.1, f2.0, f2.1),
    )
}

fn cli_summary(dir: &Path) -> Result<(String, String)> {
    let cfg = configs_dir().join("fourier_wirl1.toml");
    let out = Command::new(env!("CARGO_BIN_EXE_mlrecon"))
        .args(["--test-mode", "reconstruct", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir)
        .output()?;
    ensure!(out.status.success(), "cli failed: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.join("summary.txt"))?;
    let get = |k: &str| text.lines().find_map(|l| l.strip_prefix(&format!("{k}="))).map(str::to_string);
    Ok((get("re").context("no re")?, get("ssim").context("no ssim")?))
}

fn criterion_9(runs: &mut Runs) -> Result<Outcome> {
    let tmp = tempfile::tempdir()?;
    let a = cli_summary(&tmp.path().join("a"))?;
    let b = cli_summary(&tmp.path().join("b"))?;
    let (w, _, _) = runs.fourier()?;
    let direct = (format!("{:.6}", w.final_re()?), format!("{:.6}", w.final_ssim()?));
    outcome(
        a == b && a == direct,
        format!("run 1 RE {} SSIM {}, run 2 RE {} SSIM {}, in-process RE {} SSIM {}", a.0, a.1, b.0, b.1, direct.0, direct.1),
    )
}

fn main() -> ExitCode {
    let selected: BTreeSet<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |k: u32| selected.is_empty() || selected.contains(&k);
    let mut runs = Runs::default();
    let mut failed = 0;
    for k in 1..=9 {
        if !wanted(k) {
            continue;
        }
        let start = Instant::now();
        let res = match k {
            1 => criterion_1(),
            2 => criterion_2(),
            3 => criterion_3(),
            4 => criterion_4(&mut runs),
            5 => criterion_5(&mut runs),
            6 => criterion_6(&mut runs),
            7 => criterion_7(&mut runs),
            8 => criterion_8(),
            _ => criterion_9(&mut runs),
        };
        let secs = start.elapsed().as_secs_f64();
        let limit = match k {
            1 => Some(30.0),
            2 | 3 => Some(10.0),
            _ => None,
        };
        let (pass, detail) = match res {
            Ok(o) => match limit {
                Some(l) if secs >= l => (false, format!("{} (over the {l:.0} s budget)", o.detail)),
                _ => (o.pass, o.detail),
            },
            Err(e) => (false, format!("error: {e:#}")),
        };
        failed += usize::from(!pass);
        println!("criterion {k}: {} [{secs:.1} s] {detail}", if pass { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
