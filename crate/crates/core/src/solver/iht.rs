use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ConvergenceLog, IterationRecord};
use crate::error::{check_len, Error, Result};
use crate::grid::ImageGrid;
use crate::metrics::{relative_error, ssim};
use crate::reweighting::{iht_strategy_f1, iht_strategy_f2};
use crate::sampling::{measurement_norm, SamplingOperator};
use crate::shrinkage::hard_threshold;
use crate::transforms::{MultilevelTransform, RealStack, SubbandStack};

/// Threshold rule of the hard-thresholding iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IhtStrategy {
    /// `lambda / (|c| + eps)`
    F1,
    /// `mu max_j / (|c| + eps)`
    F2,
}

impl fmt::Display for IhtStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IhtStrategy::F1 => "f1",
            IhtStrategy::F2 => "f2",
        })
    }
}

impl FromStr for IhtStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "f1" => Ok(IhtStrategy::F1),
            "f2" => Ok(IhtStrategy::F2),
            other => Err(Error::InvalidParameter(format!("unknown IHT strategy `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IhtConfig {
    pub strategy: IhtStrategy,
    /// `lambda` for f1, `mu` for f2.
    pub param: f64,
    pub epsilon: f64,
    pub sigma: f64,
    pub iters: usize,
}

impl Default for IhtConfig {
    fn default() -> Self {
        Self { strategy: IhtStrategy::F2, param: 0.01, epsilon: 1e-4, sigma: 0.5, iters: 100 }
    }
}

impl IhtConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(Error::InvalidParameter(format!("sigma must lie in (0, 1), got {}", self.sigma)));
        }
        if self.iters == 0 {
            return Err(Error::InvalidParameter("iters must be at least 1".into()));
        }
        if !(self.param >= 0.0 && self.epsilon > 0.0) {
            return Err(Error::InvalidParameter("need param >= 0 and epsilon > 0".into()));
        }
        Ok(())
    }
}

fn thresholds(c: &SubbandStack, cfg: &IhtConfig) -> Result<RealStack> {
    let mut d = match cfg.strategy {
        IhtStrategy::F1 => iht_strategy_f1(c, cfg.param, cfg.epsilon)?,
        IhtStrategy::F2 => iht_strategy_f2(c, cfg.param, cfg.epsilon)?,
    };
    d.as_flat_mut().iter_mut().for_each(|x| *x *= cfg.sigma);
    Ok(d)
}

/// Iterative hard thresholding:
///
/// ```text
/// u_res = A^*(y - A u_rec)
/// u_rec = Psi^{-1} T_delta(Psi(u_res + u_rec))
/// delta = sigma f(Psi(u_res + u_rec))
/// ```
///
/// starting from `u_rec = 0` and `delta = 0`. The log records the data
/// residual `||A u_rec - y|| / ||y||`, the coefficient l1 norm as objective and,
/// when `reference` is given, RE and SSIM.
pub fn iht_inpaint(
    a: &dyn SamplingOperator,
    t: &dyn MultilevelTransform,
    y: &[Complex64],
    cfg: &IhtConfig,
    reference: Option<&ImageGrid>,
) -> Result<(ImageGrid, ConvergenceLog)> {
    cfg.validate()?;
    check_len(a.measurement_len(), y.len())?;
    check_len(a.n(), t.n())?;
    if let Some(r) = reference {
        check_len(a.n(), r.n())?;
    }
    let start = Instant::now();
    let ynorm = measurement_norm(y);
    let mut rec = ImageGrid::zeros(a.n())?;
    let mut delta = RealStack::filled(t.layout().clone(), 0.0);
    let mut log = ConvergenceLog::default();
    for k in 1..=cfg.iters {
        let ar = a.forward(&rec)?;
        let diff = diff_of(y, &ar);
        let res = a.adjoint(&diff)?;
        let c = hard_threshold(&t.analyze(&(&res + &rec))?, &delta)?;
        let objective = c.as_flat().iter().map(|z| z.norm()).sum();
        rec = t.synthesize(&c)?;
        delta = thresholds(&t.analyze(&(&res + &rec))?, cfg)?;
        let r = measurement_norm(&diff_of(y, &a.forward(&rec)?));
        log.records.push(IterationRecord {
            iter: k,
            re: reference.map(|r| relative_error(r, &rec)).transpose()?,
            ssim: reference.map(|r| ssim(r, &rec)).transpose()?,
            residual: if ynorm > 0.0 { r / ynorm } else { r },
            objective,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    rec.truncate_imag(1e-10);
    Ok((rec, log))
}

fn diff_of(y: &[Complex64], ay: &[Complex64]) -> Vec<Complex64> {
    y.iter().zip(ay).map(|(a, b)| a - b).collect()
}
