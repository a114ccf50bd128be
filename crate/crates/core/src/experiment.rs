//! Experiment descriptions and the end-to-end reconstruction pipeline.
//!
//! An experiment is a TOML document:
//!
//! ```toml
//! name = "wirl1-tgv"
//! problem = "fourier"          # fourier | radon | inpaint
//! seed = 0
//!
//! [image]
//! phantom = "texture-mix"      # or: path = "image.raw"
//! n = 128
//!
//! [sampling]
//! lines = 25                   # fourier; radon uses `angles`, inpaint `density`
//!
//! [transform]
//! kind = "wavelet"             # or "shearlet" with `directions = [0, 1, 1]`
//! family = "haar"
//! levels = 4
//!
//! [solver]                     # any SolverConfig field; unset fields keep the
//! strategy = "ml-max"          # preset of the problem kind
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::io::load_image;
use crate::metrics::{relative_error, ssim};
use crate::phantom::Phantom;
use crate::reweighting::oracle_weights;
use crate::sampling::{
    fourier_operator, inpainting_operator, make_radial_mask, radon_operator, random_pixel_mask, SamplingOperator,
};
use crate::solver::{iht_inpaint, ConvergenceLog, IhtConfig, IterationRecord, SolverConfig, SplitBregman};
use crate::transforms::{build_shearlet, build_wavelet, MultilevelTransform, WaveletFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Fourier,
    Radon,
    Inpaint,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageSource {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phantom: Option<Phantom>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    /// Radial lines of a Fourier mask.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lines: Option<usize>,
    /// Projection angles of a Radon operator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angles: Option<usize>,
    /// Observed pixel fraction of an inpainting mask.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TransformSpec {
    Wavelet { family: WaveletFamily, levels: usize },
    Shearlet { directions: Vec<u32> },
}

impl Default for TransformSpec {
    fn default() -> Self {
        TransformSpec::Wavelet { family: WaveletFamily::Haar, levels: 4 }
    }
}

impl TransformSpec {
    pub fn build(&self, n: usize) -> Result<Box<dyn MultilevelTransform>> {
        Ok(match self {
            TransformSpec::Wavelet { family, levels } => Box::new(build_wavelet(n, *levels, *family)?),
            TransformSpec::Shearlet { directions } => Box::new(build_shearlet(n, directions)?),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub problem: ProblemKind,
    /// Seeds the mask (radial offset or pixel selection).
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub image: ImageSource,
    #[serde(default)]
    pub sampling: SamplingSpec,
    #[serde(default)]
    pub transform: TransformSpec,
    /// Split Bregman parameters (fourier, radon).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    /// Hard-thresholding parameters (inpaint).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iht: Option<IhtConfig>,
}

fn default_name() -> String {
    "run".into()
}

impl ExperimentConfig {
    /// Parses `text`, resolving relative paths against `base`, and validates.
    pub fn from_toml_str(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut cfg = parse_with_presets(text)?;
        if let (Some(base), Some(p)) = (base, cfg.image.path.as_mut()) {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text, path.parent())
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), strip_config_prefix(e))))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Solver parameters with the preset of the problem kind for unset fields.
    pub fn solver_config(&self) -> SolverConfig {
        self.solver.clone().unwrap_or_else(|| preset(self.problem, &self.transform))
    }

    pub fn iht_config(&self) -> IhtConfig {
        self.iht.clone().unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match (&self.image.phantom, &self.image.path) {
            (Some(_), Some(_)) => return bad("[image] takes either `phantom` or `path`, not both".into()),
            (None, None) => return bad("[image] needs `phantom` (with `n`) or `path`".into()),
            (Some(_), None) if self.image.n.is_none() => return bad("[image] phantom needs `n`".into()),
            (None, Some(p)) if !p.is_file() => return bad(format!("image file {} does not exist", p.display())),
            _ => {}
        }
        let s = &self.sampling;
        match self.problem {
            ProblemKind::Fourier if s.lines.is_none() => return bad("fourier problems need [sampling] lines".into()),
            ProblemKind::Radon if s.angles.is_none() => return bad("radon problems need [sampling] angles".into()),
            ProblemKind::Inpaint => match s.density {
                Some(d) if d > 0.0 && d <= 1.0 => {}
                Some(d) => return bad(format!("[sampling] density must lie in (0, 1], got {d}")),
                None => return bad("inpaint problems need [sampling] density".into()),
            },
            _ => {}
        }
        if let (Some(n), TransformSpec::Shearlet { .. }) = (self.image.n, &self.transform) {
            if !n.is_power_of_two() {
                return bad(format!("shearlets need a power-of-two grid, got n = {n}"));
            }
        }
        match self.problem {
            ProblemKind::Inpaint => self.iht_config().validate(),
            _ => {
                let sc = self.solver_config();
                if self.problem == ProblemKind::Radon && sc.cg_iters == 0 {
                    return bad("radon problems need [solver] cg_iters > 0".into());
                }
                sc.validate()
            }
        }
        .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn reference_image(&self) -> Result<ImageGrid> {
        match (&self.image.phantom, &self.image.path) {
            (Some(p), _) => p.generate(self.image.n.unwrap_or(0)),
            (None, Some(path)) => {
                let u = load_image(path)?;
                match self.image.n {
                    Some(n) if n != u.n() => Err(Error::Config(format!(
                        "image {} is {}x{}, config says n = {n}",
                        path.display(),
                        u.n(),
                        u.n()
                    ))),
                    _ => Ok(u),
                }
            }
            (None, None) => Err(Error::Config("no image source".into())),
        }
    }

    /// Measurement operator and the fraction of measured samples.
    pub fn operator(&self, n: usize) -> Result<(Box<dyn SamplingOperator>, f64)> {
        let s = &self.sampling;
        Ok(match self.problem {
            ProblemKind::Fourier => {
                let mask = make_radial_mask(n, s.lines.unwrap_or(0), self.seed)?;
                let rate = mask.sampling_rate;
                (Box::new(fourier_operator(&mask)), rate)
            }
            ProblemKind::Radon => {
                let a = radon_operator(n, s.angles.unwrap_or(0))?;
                let rate = a.measurement_len() as f64 / (n * n) as f64;
                (Box::new(a), rate)
            }
            ProblemKind::Inpaint => {
                let m = inpainting_operator(n, &random_pixel_mask(n, s.density.unwrap_or(0.0), self.seed)?)?;
                let rate = m.observed_fraction();
                (Box::new(m), rate)
            }
        })
    }

    /// Copy of `self` with a different name and solver parameters.
    pub fn variant(&self, name: &str, solver: SolverConfig) -> Self {
        Self { name: name.into(), solver: Some(solver), ..self.clone() }
    }
}

fn preset(kind: ProblemKind, t: &TransformSpec) -> SolverConfig {
    match (kind, t) {
        (ProblemKind::Radon, _) => SolverConfig::radon(),
        (_, TransformSpec::Shearlet { .. }) => SolverConfig::shearlet_fourier(),
        _ => SolverConfig::wavelet_fourier(),
    }
}

/// Deserializes, filling unset `[solver]` fields from the preset that matches
/// the problem kind and transform.
fn parse_with_presets(text: &str) -> Result<ExperimentConfig> {
    // Typed pass first: its errors carry line and column.
    let probe: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    if probe.solver.is_none() {
        return Ok(probe);
    }
    let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    if let Some(toml::Value::Table(given)) = doc.remove("solver") {
        let base = preset(probe.problem, &probe.transform);
        let mut merged = toml::Table::try_from(&base).map_err(|e| Error::Config(e.to_string()))?;
        merged.extend(given);
        doc.insert("solver".into(), toml::Value::Table(merged));
    }
    doc.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))
}

fn strip_config_prefix(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

/// Everything a run produces.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub name: String,
    pub reference: ImageGrid,
    pub measurements: Vec<Complex64>,
    pub reconstruction: ImageGrid,
    /// `A^* y`, the unregularized back-projection.
    pub adjoint: ImageGrid,
    pub log: ConvergenceLog,
    pub sampling_rate: f64,
    pub seconds: f64,
}

impl RunOutput {
    pub fn final_re(&self) -> Result<f64> {
        relative_error(&self.reference, &self.reconstruction)
    }

    pub fn final_ssim(&self) -> Result<f64> {
        ssim(&self.reference, &self.reconstruction)
    }

    /// `key=value` lines for `summary.txt`.
    pub fn summary(&self) -> Result<String> {
        let last = self.log.last();
        let mut s = String::new();
        s += &format!("name={}\n", self.name);
        s += &format!("n={}\n", self.reference.n());
        s += &format!("sampling_rate={:.6}\n", self.sampling_rate);
        s += &format!("iterations={}\n", self.log.len());
        s += &format!("re={:.6}\n", self.final_re()?);
        s += &format!("ssim={:.6}\n", self.final_ssim()?);
        s += &format!("residual={:.6e}\n", last.map_or(f64::NAN, |r| r.residual));
        s += &format!("adjoint_re={:.6}\n", relative_error(&self.reference, &self.adjoint)?);
        s += &format!("seconds={:.3}\n", self.seconds);
        Ok(s)
    }
}

/// Runs `cfg` end to end; `observer` sees every logged iteration.
pub fn run_experiment(cfg: &ExperimentConfig, observer: impl FnMut(&IterationRecord)) -> Result<RunOutput> {
    let reference = cfg.reference_image()?;
    let n = reference.n();
    let (a, rate) = cfg.operator(n)?;
    let t = cfg.transform.build(n)?;
    let y = a.forward(&reference)?;
    let adjoint = a.adjoint(&y)?;
    let start = Instant::now();
    let (reconstruction, log) = match cfg.problem {
        ProblemKind::Inpaint => {
            let (u, log) = iht_inpaint(a.as_ref(), t.as_ref(), &y, &cfg.iht_config(), Some(&reference))?;
            let mut obs = observer;
            log.records.iter().for_each(&mut obs);
            (u, log)
        }
        _ => {
            let rec = SplitBregman::new(a.as_ref(), t.as_ref(), cfg.solver_config())?
                .with_reference(&reference)
                .with_observer(observer)
                .run(&y)?;
            (rec.u, rec.log)
        }
    };
    Ok(RunOutput {
        name: cfg.name.clone(),
        reference,
        measurements: y,
        reconstruction,
        adjoint,
        log,
        sampling_rate: rate,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Configs compared side by side must measure the same image the same way.
pub fn check_comparable(cfgs: &[ExperimentConfig]) -> Result<()> {
    if cfgs.len() < 2 {
        return Err(Error::Config("a comparison needs at least two configs".into()));
    }
    let first = &cfgs[0];
    for c in &cfgs[1..] {
        if c.problem != first.problem || c.image != first.image || c.sampling != first.sampling || c.seed != first.seed {
            return Err(Error::Config(format!(
                "`{}` and `{}` differ in problem, image or sampling",
                first.name, c.name
            )));
        }
    }
    Ok(())
}

/// Logs of two runs with weights frozen from the reference coefficients: one
/// with a constant subband factor, one with the per-subband maxima.
#[derive(Clone, Debug)]
pub struct OracleLogs {
    pub constant: ConvergenceLog,
    pub multilevel: ConvergenceLog,
    /// The constant factor, the mean of the multilevel detail factors.
    pub lambda: f64,
}

pub fn run_oracle_experiment(cfg: &ExperimentConfig, reference: &ImageGrid) -> Result<OracleLogs> {
    if cfg.problem == ProblemKind::Inpaint {
        return Err(Error::Config("oracle runs need a fourier or radon problem".into()));
    }
    if let Some(n) = cfg.image.n {
        if n != reference.n() {
            return Err(Error::SizeMismatch { expected: n, found: reference.n() });
        }
    }
    let n = reference.n();
    let (a, _) = cfg.operator(n)?;
    let t = cfg.transform.build(n)?;
    let y = a.forward(reference)?;
    let sc = cfg.solver_config();
    let ml = oracle_weights(&t.analyze(reference)?, sc.epsilon)?;
    let lambda = ml.mean_detail_lambda();
    let run = |w| -> Result<ConvergenceLog> {
        Ok(SplitBregman::new(a.as_ref(), t.as_ref(), sc.clone())?
            .with_reference(reference)
            .with_fixed_weights(w)
            .run(&y)?
            .log)
    };
    Ok(OracleLogs { constant: run(ml.clone().with_constant_lambda(lambda))?, multilevel: run(ml)?, lambda })
}
