//! Sample-based VaR and CVaR estimators.
//!
//! The empirical estimator takes the floor(n(1-alpha))-th largest sample
//! as VaR and averages the tail above it, normalized by `n(1-alpha)`.
//! The truncation-based estimator additionally discards the i-th sample
//! (in arrival order) when it exceeds a level `B_i` that grows with `i`,
//! which tames heavy tails that only have a bounded p-th moment. A
//! Gaussian plug-in estimator covers the case where the family is known.

use std::io::{BufRead, Read};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::{standard_normal_cvar, MomentBound, RiskLevel};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EstimatorError {
    #[error("InsufficientSamples: floor(n(1-alpha)) >= 1 required, got n={n} at alpha={alpha}")]
    InsufficientSamples { n: usize, alpha: f64 },
    #[error("InvalidDelta: delta={0} must lie strictly inside (0,1)")]
    InvalidDelta(f64),
    #[error("batch must contain at least one sample")]
    EmptyBatch,
    #[error("sample {index} is not finite: {value}")]
    NonFiniteSample { index: usize, value: f64 },
    #[error("failed to parse sample {index}: {text:?}")]
    Parse { index: usize, text: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for EstimatorError {
    fn from(err: std::io::Error) -> Self {
        EstimatorError::Io(err.to_string())
    }
}

/// An immutable batch of samples in arrival order.
///
/// Arrival order matters: the truncation level applied to the i-th sample
/// depends on i, so callers must not pre-sort.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    values: Vec<f64>,
}

impl SampleBatch {
    pub fn new(values: Vec<f64>) -> Result<Self, EstimatorError> {
        if values.is_empty() {
            return Err(EstimatorError::EmptyBatch);
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(EstimatorError::NonFiniteSample { index, value });
            }
        }
        Ok(SampleBatch { values })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Load from one-column CSV text. Blank lines are skipped; a single
    /// non-numeric header line is tolerated.
    pub fn from_csv<R: BufRead>(reader: R) -> Result<Self, EstimatorError> {
        let mut values = Vec::new();
        for (index, line) in reader.lines().enumerate() {
            let line = line?;
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            match text.parse::<f64>() {
                Ok(v) => values.push(v),
                Err(_) if index == 0 => continue, // header
                Err(_) => {
                    return Err(EstimatorError::Parse {
                        index,
                        text: text.to_string(),
                    })
                }
            }
        }
        SampleBatch::new(values)
    }

    /// Load from a stream of little-endian 64-bit floats.
    pub fn from_f64_le<R: Read>(mut reader: R) -> Result<Self, EstimatorError> {
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes)?;
        if bytes.len() % 8 != 0 {
            return Err(EstimatorError::Io(format!(
                "byte length {} is not a multiple of 8",
                bytes.len()
            )));
        }
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        SampleBatch::new(values)
    }

    /// Samples sorted into non-increasing order.
    pub fn ordered(&self) -> OrderedView {
        let mut descending = self.values.clone();
        // Stable sort keeps tied samples deterministic.
        descending.sort_by(|a, b| b.total_cmp(a));
        OrderedView { descending }
    }
}

/// Descending order statistics of a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedView {
    descending: Vec<f64>,
}

impl OrderedView {
    pub fn descending(&self) -> &[f64] {
        &self.descending
    }

    /// The k-th largest sample, 1-based.
    pub fn kth_largest(&self, k: usize) -> f64 {
        self.descending[k - 1]
    }
}

/// Which estimator produced a [`RiskEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorKind {
    Empirical,
    Truncated { p: f64, u: f64, delta: f64 },
    GaussianPlugin,
}

/// An estimated VaR/CVaR pair together with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub var_hat: f64,
    pub cvar_hat: f64,
    pub n: usize,
    pub estimator: EstimatorKind,
}

/// The order-statistic index floor(n(1-alpha)), snapped to the nearest
/// integer when the floating product sits within rounding error of one
/// (e.g. 10 * (1 - 0.9) evaluates to 0.999...8 but means 1).
pub(crate) fn tail_index(n: usize, level: RiskLevel) -> usize {
    let product = n as f64 * level.tail_mass();
    let nearest = product.round();
    if (product - nearest).abs() <= 1e-12 * product.max(1.0) {
        nearest as usize
    } else {
        product.floor() as usize
    }
}

/// Empirical distribution function at `x`.
pub fn empirical_cdf(batch: &SampleBatch, x: f64) -> f64 {
    let count = batch.values().iter().filter(|&&v| v <= x).count();
    count as f64 / batch.n() as f64
}

/// Empirical VaR: the floor(n(1-alpha))-th largest sample.
pub fn empirical_var(batch: &SampleBatch, level: RiskLevel) -> Result<f64, EstimatorError> {
    let k = tail_index(batch.n(), level);
    if k < 1 {
        return Err(EstimatorError::InsufficientSamples {
            n: batch.n(),
            alpha: level.alpha(),
        });
    }
    Ok(batch.ordered().kth_largest(k))
}

/// Empirical CVaR: the sum of samples at or above the empirical VaR,
/// normalized by `n(1-alpha)`. Ties at the threshold are all included.
pub fn empirical_cvar(batch: &SampleBatch, level: RiskLevel) -> Result<RiskEstimate, EstimatorError> {
    let var_hat = empirical_var(batch, level)?;
    let tail_sum: f64 = batch
        .values()
        .iter()
        .filter(|&&v| v >= var_hat)
        .sum();
    Ok(RiskEstimate {
        var_hat,
        cvar_hat: tail_sum / (batch.n() as f64 * level.tail_mass()),
        n: batch.n(),
        estimator: EstimatorKind::Empirical,
    })
}

/// Truncation level for the i-th arrival (1-based):
/// `B_i = (u i / log(1/delta))^{1/p}`, strictly increasing in i.
pub fn truncation_level(i: usize, p: f64, u: f64, delta: f64) -> Result<f64, EstimatorError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(EstimatorError::InvalidDelta(delta));
    }
    Ok((u * i as f64 / (1.0 / delta).ln()).powf(1.0 / p))
}

/// Truncated CVaR: keeps the i-th sample only when it lies inside
/// `[var_hat, B_i]`, with `B_i` indexed by arrival order.
pub fn truncated_cvar(
    batch: &SampleBatch,
    level: RiskLevel,
    moment: MomentBound,
    delta: f64,
) -> Result<RiskEstimate, EstimatorError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(EstimatorError::InvalidDelta(delta));
    }
    let var_hat = empirical_var(batch, level)?;
    let log_inv_delta = (1.0 / delta).ln();
    let mut tail_sum = 0.0;
    for (idx, &value) in batch.values().iter().enumerate() {
        let cap = (moment.u * (idx + 1) as f64 / log_inv_delta).powf(1.0 / moment.p);
        if value >= var_hat && value <= cap {
            tail_sum += value;
        }
    }
    Ok(RiskEstimate {
        var_hat,
        cvar_hat: tail_sum / (batch.n() as f64 * level.tail_mass()),
        n: batch.n(),
        estimator: EstimatorKind::Truncated {
            p: moment.p,
            u: moment.u,
            delta,
        },
    })
}

/// Gaussian plug-in: sample mean and unbiased sample standard deviation
/// fed through the closed-form Gaussian CVaR.
pub fn gaussian_plugin_cvar(
    batch: &SampleBatch,
    level: RiskLevel,
) -> Result<RiskEstimate, EstimatorError> {
    let n = batch.n();
    if n < 2 {
        return Err(EstimatorError::InsufficientSamples {
            n,
            alpha: level.alpha(),
        });
    }
    let mean = batch.values().iter().sum::<f64>() / n as f64;
    let ss: f64 = batch.values().iter().map(|&v| (v - mean).powi(2)).sum();
    let stddev = (ss / (n - 1) as f64).sqrt();
    let z = crate::distributions::standard_normal_quantile(level.alpha());
    Ok(RiskEstimate {
        var_hat: mean + stddev * z,
        cvar_hat: mean + stddev * standard_normal_cvar(level),
        n,
        estimator: EstimatorKind::GaussianPlugin,
    })
}
