use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mlrecon_core::experiment::{
    check_comparable, run_experiment, run_oracle_experiment, ExperimentConfig, ProblemKind, RunOutput,
};
use mlrecon_core::io::{load_image, save_image, to_gray8};
use mlrecon_core::phantom::Phantom;
use mlrecon_core::sampling::make_radial_mask;
use mlrecon_core::solver::ConvergenceLog;
use mlrecon_core::{Error, ImageGrid};
use serde::{Deserialize, Serialize};

use crate::plot::convergence_plot;
use crate::{Cli, Command};

/// One row of `compare.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub method: String,
    pub re: f64,
    pub ssim: f64,
    pub seconds: f64,
}

/// 2 for numeric aborts anywhere in the chain, 1 otherwise.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    let numeric = e.chain().any(|c| {
        matches!(c.downcast_ref::<Error>(), Some(Error::NonFinite { .. } | Error::CgBreakdown { .. }))
    });
    if numeric { 2 } else { 1 }
}

pub fn run(cli: Cli) -> Result<()> {
    let threads = if cli.test_mode { 1 } else { cli.threads.max(1) };
    let ctx = Ctx { threads, test_mode: cli.test_mode };
    match cli.command {
        Command::Phantom { name, n, out } => phantom(name, n, &out),
        Command::Reconstruct { config, out, seed } => ctx.reconstruct(&config, out, seed),
        Command::Compare { configs, out, seed } => ctx.compare(&configs, out, seed),
        Command::Oracle { config, reference, out, seed } => ctx.oracle(&config, reference.as_deref(), out, seed),
    }
}

struct Ctx {
    threads: usize,
    test_mode: bool,
}

fn phantom(name: Phantom, n: usize, out: &Path) -> Result<()> {
    if n < 32 {
        bail!("phantoms need n >= 32, got {n}");
    }
    let u = name.generate(n)?;
    create_parent(out)?;
    save_image(&u, out).with_context(|| format!("writing {}", out.display()))?;
    write_png(&u, 0.0, 1.0, &out.with_extension("png"))?;
    println!("{}", out.display());
    Ok(())
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// `--out`, then the `output` key of the config, then `out/<name>`.
fn output_dir(flag: Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| cfg.output.clone()).unwrap_or_else(|| Path::new("out").join(&cfg.name))
}

impl Ctx {
    fn run_one(&self, cfg: &ExperimentConfig) -> Result<RunOutput> {
        let mut out = run_experiment(cfg, |_| {}).with_context(|| format!("run `{}`", cfg.name))?;
        if self.test_mode {
            out.seconds = 0.0;
            zero_times(&mut out.log);
        }
        Ok(out)
    }

    fn reconstruct(&self, config: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<()> {
        let cfg = load_config(config, seed)?;
        let dir = output_dir(out, &cfg);
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let res = self.run_one(&cfg)?;
        write_run(&dir, &cfg, &res)?;
        print!("{}", res.summary()?);
        Ok(())
    }

    fn compare(&self, paths: &[PathBuf], out: Option<PathBuf>, seed: Option<u64>) -> Result<()> {
        let cfgs = paths.iter().map(|p| load_config(p, seed)).collect::<Result<Vec<_>>>()?;
        check_comparable(&cfgs)?;
        for (k, c) in cfgs.iter().enumerate() {
            if cfgs[..k].iter().any(|d| d.name == c.name) {
                bail!(Error::Config(format!("two configs share the name `{}`", c.name)));
            }
        }
        let dir = out.unwrap_or_else(|| Path::new("out").join("compare"));
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let results = self.run_all(&cfgs)?;

        let mut wr = csv::Writer::from_path(dir.join("compare.csv"))?;
        for r in &results {
            wr.serialize(CompareRow {
                method: r.name.clone(),
                re: r.final_re()?,
                ssim: r.final_ssim()?,
                seconds: r.seconds,
            })?;
        }
        wr.flush()?;
        for (cfg, r) in cfgs.iter().zip(&results) {
            let sub = dir.join(&cfg.name);
            fs::create_dir_all(&sub)?;
            write_run(&sub, cfg, r)?;
        }
        let logs: Vec<_> = results.iter().map(|r| &r.log).collect();
        convergence_plot(&logs).save(dir.join("compare.png"))?;
        print!("{}", fs::read_to_string(dir.join("compare.csv"))?);
        Ok(())
    }

    /// Runs the configs on up to `threads` workers, keeping their order.
    fn run_all(&self, cfgs: &[ExperimentConfig]) -> Result<Vec<RunOutput>> {
        if self.threads <= 1 {
            return cfgs.iter().map(|c| self.run_one(c)).collect();
        }
        let chunk = cfgs.len().div_ceil(self.threads);
        std::thread::scope(|s| {
            let handles: Vec<_> = cfgs
                .chunks(chunk)
                .map(|part| s.spawn(move || part.iter().map(|c| self.run_one(c)).collect::<Result<Vec<_>>>()))
                .collect();
            let mut all = Vec::with_capacity(cfgs.len());
            for h in handles {
                all.extend(h.join().map_err(|_| anyhow::anyhow!("worker thread panicked"))??);
            }
            Ok(all)
        })
    }

    fn oracle(&self, config: &Path, reference: Option<&Path>, out: Option<PathBuf>, seed: Option<u64>) -> Result<()> {
        let cfg = load_config(config, seed)?;
        let u = match reference {
            Some(p) => load_image(p).with_context(|| format!("reading {}", p.display()))?,
            None => cfg.reference_image()?,
        };
        let dir = output_dir(out, &cfg);
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut logs = run_oracle_experiment(&cfg, &u)?;
        if self.test_mode {
            zero_times(&mut logs.constant);
            zero_times(&mut logs.multilevel);
        }
        logs.constant.write_csv(BufWriter::new(File::create(dir.join("oracle_constant.csv"))?))?;
        logs.multilevel.write_csv(BufWriter::new(File::create(dir.join("oracle_multilevel.csv"))?))?;
        convergence_plot(&[&logs.constant, &logs.multilevel]).save(dir.join("oracle.png"))?;
        let re = |l: &ConvergenceLog| l.last().and_then(|r| r.re).unwrap_or(f64::NAN);
        let text = format!(
            "lambda={:.6e}\nconstant_re={:.6}\nmultilevel_re={:.6}\n",
            logs.lambda,
            re(&logs.constant),
            re(&logs.multilevel)
        );
        fs::write(dir.join("summary.txt"), &text)?;
        print!("{text}");
        Ok(())
    }
}

fn zero_times(log: &mut ConvergenceLog) {
    log.records.iter_mut().for_each(|r| r.seconds = 0.0);
}

/// `rec.raw`, `rec.png`, `log.csv`, `summary.txt`, `config.toml` and, for
/// Fourier problems, `mask.bin`.
fn write_run(dir: &Path, cfg: &ExperimentConfig, r: &RunOutput) -> Result<()> {
    save_image(&r.reconstruction, dir.join("rec.raw"))?;
    let hi = r.reference.modulus().into_iter().fold(0.0, f64::max);
    write_png(&r.reconstruction, 0.0, hi, &dir.join("rec.png"))?;
    r.log.write_csv(BufWriter::new(File::create(dir.join("log.csv"))?))?;
    fs::write(dir.join("summary.txt"), r.summary()?)?;
    fs::write(dir.join("config.toml"), cfg.to_toml_string()?)?;
    if cfg.problem == ProblemKind::Fourier {
        let mask = make_radial_mask(r.reference.n(), cfg.sampling.lines.unwrap_or(0), cfg.seed)?;
        mask.write_to(BufWriter::new(File::create(dir.join("mask.bin"))?))?;
    }
    Ok(())
}

fn write_png(u: &ImageGrid, lo: f64, hi: f64, path: &Path) -> Result<()> {
    let n = u.n() as u32;
    image::GrayImage::from_raw(n, n, to_gray8(u, lo, hi))
        .context("preview buffer size")?
        .save(path)
        .with_context(|| format!("writing {}", path.display()))
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => Ok(fs::create_dir_all(p)?),
        _ => Ok(()),
    }
}
