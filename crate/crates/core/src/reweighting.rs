//! Subband factors `lambda_j`, coefficient weights `W_j` and IHT thresholds.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transforms::{RealStack, SubbandLayout, SubbandStack};

/// How `lambda_j` and `W_j` evolve during a reconstruction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ReweightStrategy {
    /// Constant `lambda` on every detail subband, `W = 1`.
    None,
    /// Constant `lambda`, elementwise reweighting.
    Irl1,
    /// Subband maxima with elementwise reweighting.
    MlMax,
    /// Nearest-rank subband quantile with elementwise reweighting.
    MlQuantile(f64),
    /// `N_j / (eps + ||Psi_j u||_1)` on all subbands, `W = 1`.
    CoL1,
    /// Weights frozen from known coefficients.
    Oracle,
}

impl ReweightStrategy {
    fn is_frozen(self) -> bool {
        matches!(self, ReweightStrategy::None | ReweightStrategy::Oracle)
    }
}

impl fmt::Display for ReweightStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReweightStrategy::None => write!(f, "none"),
            ReweightStrategy::Irl1 => write!(f, "irl1"),
            ReweightStrategy::MlMax => write!(f, "ml-max"),
            ReweightStrategy::MlQuantile(q) => write!(f, "ml-quantile({q})"),
            ReweightStrategy::CoL1 => write!(f, "co-l1"),
            ReweightStrategy::Oracle => write!(f, "oracle"),
        }
    }
}

impl FromStr for ReweightStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if let Some(rest) = s.strip_prefix("ml-quantile") {
            let q = rest.trim_start_matches(['(', ':', '=']).trim_end_matches(')');
            let q: f64 = q
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad quantile in `{s}`")))?;
            check_quantile(q)?;
            return Ok(ReweightStrategy::MlQuantile(q));
        }
        match s.as_str() {
            "none" => Ok(ReweightStrategy::None),
            "irl1" => Ok(ReweightStrategy::Irl1),
            "ml-max" => Ok(ReweightStrategy::MlMax),
            "co-l1" => Ok(ReweightStrategy::CoL1),
            "oracle" => Ok(ReweightStrategy::Oracle),
            _ => Err(Error::InvalidParameter(format!("unknown reweight strategy `{s}`"))),
        }
    }
}

impl TryFrom<String> for ReweightStrategy {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ReweightStrategy> for String {
    fn from(s: ReweightStrategy) -> String {
        s.to_string()
    }
}

fn check_quantile(q: f64) -> Result<()> {
    if q > 0.0 && q <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("quantile {q} outside (0, 1]")))
    }
}

fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("epsilon must be positive, got {eps}")))
    }
}

/// `lambda_j = max_l |c_j(l)|`, with `lambda_0 = 0`.
pub fn lambda_ml_max(c: &SubbandStack) -> Vec<f64> {
    (0..c.num_subbands())
        .map(|j| {
            if j == 0 {
                0.0
            } else {
                c.subband(j).iter().map(|z| z.norm()).fold(0.0, f64::max)
            }
        })
        .collect()
}

/// Nearest-rank `q`-quantile of the subband moduli, with `lambda_0 = 0`.
pub fn lambda_ml_quantile(c: &SubbandStack, q: f64) -> Result<Vec<f64>> {
    check_quantile(q)?;
    Ok((0..c.num_subbands())
        .map(|j| {
            if j == 0 || c.subband(j).is_empty() {
                return 0.0;
            }
            let mut m: Vec<f64> = c.subband(j).iter().map(|z| z.norm()).collect();
            let rank = ((q * m.len() as f64).ceil() as usize).clamp(1, m.len());
            let (_, v, _) = m.select_nth_unstable_by(rank - 1, f64::total_cmp);
            *v
        })
        .collect())
}

/// `W(l) = 1 / (eps + |c(l)|)` on every subband.
pub fn weights_irl1(c: &SubbandStack, eps: f64) -> Result<RealStack> {
    check_epsilon(eps)?;
    let data = c.as_flat().iter().map(|z| 1.0 / (eps + z.norm())).collect();
    RealStack::from_flat(c.layout().clone(), data)
}

/// `lambda_j = N_j / (eps + ||c_j||_1)` on every subband, lowpass included.
pub fn lambda_co_l1(c: &SubbandStack, eps: f64) -> Result<Vec<f64>> {
    check_epsilon(eps)?;
    Ok((0..c.num_subbands())
        .map(|j| {
            let band = c.subband(j);
            band.len() as f64 / (eps + band.iter().map(|z| z.norm()).sum::<f64>())
        })
        .collect())
}

/// Per-subband factors and per-coefficient weights; the `w`-shrink threshold of
/// coefficient `l` in subband `j` is `lambda[j] * w_j(l) / mu_1`.
#[derive(Clone, Debug)]
pub struct WeightSchedule {
    pub lambda: Vec<f64>,
    pub w: RealStack,
    pub epsilon: f64,
    pub strategy: ReweightStrategy,
    /// Constant factor used by `None` and `Irl1`.
    pub lambda_const: f64,
}

impl WeightSchedule {
    /// Schedule before the first update: constant detail factors, unit weights.
    pub fn new(
        layout: Arc<SubbandLayout>,
        strategy: ReweightStrategy,
        epsilon: f64,
        lambda_const: f64,
    ) -> Result<Self> {
        check_epsilon(epsilon)?;
        if let ReweightStrategy::MlQuantile(q) = strategy {
            check_quantile(q)?;
        }
        let lambda = constant_lambda(layout.len(), lambda_const);
        Ok(Self { lambda, w: RealStack::filled(layout, 1.0), epsilon, strategy, lambda_const })
    }

    /// Recomputes factors and weights from the current coefficients `c`.
    /// A no-op for the frozen strategies.
    pub fn update(&mut self, c: &SubbandStack) -> Result<()> {
        c.check_layout(self.w.layout())?;
        if self.strategy.is_frozen() {
            return Ok(());
        }
        let eps = self.epsilon;
        match self.strategy {
            ReweightStrategy::Irl1 => self.w = weights_irl1(c, eps)?,
            ReweightStrategy::MlMax => {
                self.lambda = lambda_ml_max(c);
                self.w = weights_irl1(c, eps)?;
            }
            ReweightStrategy::MlQuantile(q) => {
                self.lambda = lambda_ml_quantile(c, q)?;
                self.w = weights_irl1(c, eps)?;
            }
            ReweightStrategy::CoL1 => self.lambda = lambda_co_l1(c, eps)?,
            ReweightStrategy::None | ReweightStrategy::Oracle => unreachable!(),
        }
        Ok(())
    }

    /// Replaces the detail factors by one constant (`lambda_0` stays 0).
    pub fn with_constant_lambda(mut self, value: f64) -> Self {
        self.lambda = constant_lambda(self.lambda.len(), value);
        self.lambda_const = value;
        self
    }

    /// Mean of the detail factors.
    pub fn mean_detail_lambda(&self) -> f64 {
        let detail = &self.lambda[1..];
        if detail.is_empty() {
            0.0
        } else {
            detail.iter().sum::<f64>() / detail.len() as f64
        }
    }

    /// `lambda_j W_j(l) / mu_1` for every coefficient.
    pub fn thresholds(&self, mu1: f64) -> RealStack {
        let mut out = self.w.clone();
        for (j, &lam) in self.lambda.iter().enumerate() {
            out.subband_mut(j).iter_mut().for_each(|x| *x *= lam / mu1);
        }
        out
    }
}

fn constant_lambda(bands: usize, value: f64) -> Vec<f64> {
    (0..bands).map(|j| if j == 0 { 0.0 } else { value }).collect()
}

/// Factors from [`lambda_ml_max`] and weights from [`weights_irl1`] of the true
/// coefficients, frozen for the whole run.
pub fn oracle_weights(true_c: &SubbandStack, eps: f64) -> Result<WeightSchedule> {
    Ok(WeightSchedule {
        lambda: lambda_ml_max(true_c),
        w: weights_irl1(true_c, eps)?,
        epsilon: eps,
        strategy: ReweightStrategy::Oracle,
        lambda_const: 0.0,
    })
}

/// IHT thresholds `lambda / (|c| + eps)` on detail coefficients. Lowpass
/// coefficients get threshold 0.
pub fn iht_strategy_f1(c: &SubbandStack, lambda: f64, eps: f64) -> Result<RealStack> {
    check_epsilon(eps)?;
    let mut out = RealStack::filled(c.layout().clone(), 0.0);
    for j in 0..c.num_subbands() {
        if c.info(j).is_lowpass() {
            continue;
        }
        for (d, z) in out.subband_mut(j).iter_mut().zip(c.subband(j)) {
            *d = lambda / (z.norm() + eps);
        }
    }
    Ok(out)
}

/// IHT thresholds `mu max_j / (|c| + eps)` with `max_j` the largest modulus of
/// the coefficient's subband. Lowpass coefficients get threshold 0.
pub fn iht_strategy_f2(c: &SubbandStack, mu: f64, eps: f64) -> Result<RealStack> {
    check_epsilon(eps)?;
    let mut out = RealStack::filled(c.layout().clone(), 0.0);
    for j in 0..c.num_subbands() {
        if c.info(j).is_lowpass() {
            continue;
        }
        let band = c.subband(j);
        let max = band.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (d, z) in out.subband_mut(j).iter_mut().zip(band) {
            *d = mu * max / (z.norm() + eps);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::{Orientation, SubbandInfo};
    use num_complex::Complex64;

    fn stack(bands: &[&[f64]]) -> SubbandStack {
        let infos = bands
            .iter()
            .enumerate()
            .map(|(j, b)| SubbandInfo {
                scale: j,
                orientation: if j == 0 { Orientation::Lowpass } else { Orientation::WaveletX },
                len: b.len(),
            })
            .collect();
        let layout = Arc::new(SubbandLayout::new(infos).unwrap());
        let data = bands.iter().flat_map(|b| b.iter().map(|&x| Complex64::new(x, 0.0))).collect();
        SubbandStack::from_flat(layout, data).unwrap()
    }

    #[test]
    fn ml_max_examples() {
        let c = stack(&[&[9.0, -7.0], &[0.2, -0.5, 0.1], &[0.0, 0.0]]);
        assert_eq!(lambda_ml_max(&c), vec![0.0, 0.5, 0.0]);
    }

    #[test]
    fn quantile_examples() {
        let c = stack(&[&[5.0], &[1.0, 2.0, 3.0, 4.0], &[3.0, 3.0, 3.0]]);
        assert_eq!(lambda_ml_quantile(&c, 0.5).unwrap(), vec![0.0, 2.0, 3.0]);
        assert_eq!(lambda_ml_quantile(&c, 0.25).unwrap(), vec![0.0, 1.0, 3.0]);
        assert_eq!(lambda_ml_quantile(&c, 0.26).unwrap(), vec![0.0, 2.0, 3.0]);
        assert_eq!(lambda_ml_quantile(&c, 1.0).unwrap(), lambda_ml_max(&c));
        assert!(lambda_ml_quantile(&c, 0.0).is_err());
        assert!(lambda_ml_quantile(&c, 1.5).is_err());
    }

    #[test]
    fn irl1_examples() {
        let c = stack(&[&[0.5], &[0.0, 0.5, -2.0]]);
        let w = weights_irl1(&c, 1e-4).unwrap();
        assert!((w.as_flat()[0] - 1.0 / 0.5001).abs() < 1e-15);
        assert!((w.as_flat()[0] - 1.99960).abs() < 1e-5);
        assert_eq!(w.as_flat()[1], 1e4);
        assert!(w.as_flat()[3] < w.as_flat()[2]);
        assert!(weights_irl1(&c, 0.0).is_err());
    }

    #[test]
    fn co_l1_examples() {
        let c = stack(&[&[0.0, 0.0], &[0.5, -0.5, 0.5, 0.5]]);
        let l = lambda_co_l1(&c, 0.1).unwrap();
        assert!((l[1] - 4.0 / 2.1).abs() < 1e-14);
        assert!((l[1] - 1.90476).abs() < 1e-5);
        assert!((l[0] - 2.0 / 0.1).abs() < 1e-12);
    }

    #[test]
    fn oracle_is_composition_and_frozen() {
        let c = stack(&[&[1.0], &[0.2, -3.0], &[0.01, 0.1]]);
        let mut o = oracle_weights(&c, 1e-3).unwrap();
        assert_eq!(o.lambda, lambda_ml_max(&c));
        assert_eq!(o.w, weights_irl1(&c, 1e-3).unwrap());
        // Largest coefficient gets the smallest weight.
        assert!(o.w.subband(1)[1] < o.w.subband(1)[0]);
        let before = o.clone();
        o.update(&stack(&[&[7.0], &[1.0, 1.0], &[1.0, 1.0]])).unwrap();
        assert_eq!(o.lambda, before.lambda);
        assert_eq!(o.w, before.w);
        let big = oracle_weights(&c, 1e8).unwrap();
        assert!(big.w.as_flat().iter().all(|&w| (w * 1e8 - 1.0).abs() < 1e-7));
    }

    #[test]
    fn strategy_updates() {
        let c = stack(&[&[2.0], &[0.5, -1.0], &[0.25, 0.0]]);
        let mut s = WeightSchedule::new(c.layout().clone(), ReweightStrategy::None, 1e-4, 0.7).unwrap();
        assert_eq!(s.lambda, vec![0.0, 0.7, 0.7]);
        s.update(&c).unwrap();
        assert!(s.w.as_flat().iter().all(|&w| w == 1.0));

        let mut s = WeightSchedule::new(c.layout().clone(), ReweightStrategy::Irl1, 1e-4, 0.7).unwrap();
        s.update(&c).unwrap();
        assert_eq!(s.lambda, vec![0.0, 0.7, 0.7]);
        assert_eq!(s.w, weights_irl1(&c, 1e-4).unwrap());

        let mut s = WeightSchedule::new(c.layout().clone(), ReweightStrategy::MlMax, 1e-4, 0.7).unwrap();
        s.update(&c).unwrap();
        assert_eq!(s.lambda, vec![0.0, 1.0, 0.25]);

        let mut s = WeightSchedule::new(c.layout().clone(), ReweightStrategy::CoL1, 1e-4, 0.7).unwrap();
        s.update(&c).unwrap();
        assert!(s.w.as_flat().iter().all(|&w| w == 1.0));
        assert!((s.lambda[0] - 1.0 / (1e-4 + 2.0)).abs() < 1e-15);

        let t = s.thresholds(2.0);
        assert!((t.subband(1)[0] - s.lambda[1] / 2.0).abs() < 1e-15);
    }

    #[test]
    fn strategy_parsing() {
        for s in ["none", "irl1", "ml-max", "co-l1", "oracle", "ml-quantile(0.9)"] {
            let parsed: ReweightStrategy = s.parse().unwrap();
            assert_eq!(parsed.to_string(), s);
        }
        assert_eq!("ml-quantile:0.5".parse::<ReweightStrategy>().unwrap(), ReweightStrategy::MlQuantile(0.5));
        assert!("ml-quantile(2)".parse::<ReweightStrategy>().is_err());
        assert!("bogus".parse::<ReweightStrategy>().is_err());
    }

    #[test]
    fn iht_thresholds() {
        let c = stack(&[&[4.0, 2.0], &[1.0, 0.1, 0.0]]);
        let f1 = iht_strategy_f1(&c, 2.0, 1e-3).unwrap();
        for (l, z) in c.subband(1).iter().enumerate() {
            assert_eq!(f1.subband(1)[l], 2.0 / (z.norm() + 1e-3));
        }
        assert_eq!(f1.subband(1)[2], 2.0 / 1e-3);
        let f2 = iht_strategy_f2(&c, 1.0, 1e-12).unwrap();
        assert!((f2.subband(1)[0] - 1.0).abs() < 1e-11);
        assert!((f2.subband(1)[1] - 10.0).abs() < 1e-9);
        assert_eq!(f1.subband(0), &[0.0, 0.0]);
        assert_eq!(f2.subband(0), &[0.0, 0.0]);
    }
}
