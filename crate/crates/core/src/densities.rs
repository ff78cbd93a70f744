//! Exponential marginal densities for X and Y, with a Kolmogorov–Smirnov check.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SwapError};
use crate::numeric::mean;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub lambda: f64,
    pub n: usize,
}

impl RateEstimate {
    pub fn new(lambda: f64, n: usize) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(SwapError::NonPositiveSample);
        }
        Ok(Self { lambda, n })
    }

    /// `log(lambda) - lambda * v`, or `-inf` off the support.
    pub fn log_density(&self, v: f64) -> f64 {
        if v < 0.0 {
            f64::NEG_INFINITY
        } else {
            self.lambda.ln() - self.lambda * v
        }
    }

    pub fn cdf(&self, v: f64) -> f64 {
        if v <= 0.0 {
            0.0
        } else {
            -(-self.lambda * v).exp_m1()
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        -(-p).ln_1p() / self.lambda
    }
}

/// Marginal densities `h_X` and `h_Y` used in the posterior weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Marginals {
    pub x: RateEstimate,
    pub y: RateEstimate,
}

impl Marginals {
    pub fn fit(pair: &crate::data::SeriesPair) -> Result<Self> {
        Ok(Self { x: fit_exponential(&pair.x)?, y: fit_exponential(&pair.y)? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub d_statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

fn check_sample(sample: &[f64]) -> Result<()> {
    if sample.is_empty() || sample.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(SwapError::NonPositiveSample);
    }
    Ok(())
}

/// Maximum-likelihood exponential rate, `1 / mean`.
pub fn fit_exponential(sample: &[f64]) -> Result<RateEstimate> {
    check_sample(sample)?;
    RateEstimate::new(1.0 / mean(sample), sample.len())
}

/// One-sample K-S statistic against Exponential(`lambda`), with the
/// asymptotic Kolmogorov p-value. The rate is usually estimated from the same
/// sample, in which case the p-value is only indicative.
pub fn ks_test_exponential(sample: &[f64], lambda: f64) -> Result<KsResult> {
    check_sample(sample)?;
    let dist = RateEstimate::new(lambda, sample.len())?;
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let d = sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = dist.cdf(v);
            let i = i as f64;
            ((i + 1.0) / n - f).max(f - i / n)
        })
        .fold(0.0, f64::max);
    Ok(KsResult { d_statistic: d, p_value: kolmogorov_sf(n.sqrt() * d), n: sorted.len() })
}

/// Survival function of the Kolmogorov distribution,
/// `2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 t^2)`, clamped to [0, 1].
///
/// Below `t = 1.18` that series alternates with terms close to one, so the
/// equivalent theta-function form of the CDF,
/// `sqrt(2 pi) / t * sum_{k>=1} exp(-(2k-1)^2 pi^2 / (8 t^2))`, is used instead.
pub fn kolmogorov_sf(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    if t < 1.18 {
        let c = -std::f64::consts::PI * std::f64::consts::PI / (8.0 * t * t);
        let mut cdf = 0.0;
        for k in 1..=100u32 {
            let m = f64::from(2 * k - 1);
            let term = (c * m * m).exp();
            cdf += term;
            if term < 1e-300 {
                break;
            }
        }
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / t * cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for k in 1..=100_000u32 {
        let k = f64::from(k);
        let term = (-2.0 * k * k * t * t).exp();
        if term < 1e-300 {
            break;
        }
        sum += if k as u64 % 2 == 1 { term } else { -term };
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
