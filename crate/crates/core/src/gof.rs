//! How decisively a fit separates the two roles.
//!
//! Posterior probabilities `P(z = 1)` are modelled with a piecewise
//! approximation to the Beta CDF that is accurate for small shape parameters
//! and admits closed-form maximum-likelihood estimates. Small `alpha`/`beta`
//! mean the probabilities pile up near 0 and 1.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SwapError};

pub const PROB_CLAMP: f64 = 1e-12;
pub const HISTOGRAM_BINS: usize = 20;

fn check_unit(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(SwapError::DomainError(format!("x = {x} outside [0, 1]")));
    }
    Ok(())
}

fn check_shape(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(SwapError::DomainError(format!("shape parameters must be positive: ({alpha}, {beta})")));
    }
    Ok(())
}

/// Approximate Beta(alpha, beta) CDF.
pub fn volodin_cdf(x: f64, alpha: f64, beta: f64) -> Result<f64> {
    check_unit(x)?;
    check_shape(alpha, beta)?;
    let gamma = alpha / (alpha + beta);
    Ok(if x == 0.0 {
        0.0
    } else if x == 1.0 {
        1.0
    } else if x <= 0.5 {
        (1.0 - gamma) * (x / (1.0 - x)).powf(alpha)
    } else {
        1.0 - gamma * ((1.0 - x) / x).powf(beta)
    })
}

/// Density of [`volodin_cdf`] on the open interval; `x = 0.5` uses the lower branch.
pub fn volodin_pdf(x: f64, alpha: f64, beta: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(SwapError::DomainError(format!("x = {x} outside (0, 1)")));
    }
    check_shape(alpha, beta)?;
    let gamma = alpha / (alpha + beta);
    Ok(if x <= 0.5 {
        (1.0 - gamma) * alpha * (x / (1.0 - x)).powf(alpha - 1.0) / ((1.0 - x) * (1.0 - x))
    } else {
        gamma * beta * ((1.0 - x) / x).powf(beta - 1.0) / (x * x)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    /// `None` when no probability lies at or below 0.5.
    pub alpha_hat: Option<f64>,
    /// `None` when no probability lies above 0.5.
    pub beta_hat: Option<f64>,
    /// Fraction of probabilities above 0.5.
    pub gamma: f64,
    /// `alpha_hat + beta_hat` when both exist.
    pub eps_sum: Option<f64>,
    pub n0: usize,
    pub n1: usize,
    pub clamped: usize,
    pub histogram: Vec<HistogramBin>,
}

impl GofReport {
    pub fn n(&self) -> usize {
        self.n0 + self.n1
    }

    pub fn require_both(&self) -> Result<(f64, f64)> {
        match (self.alpha_hat, self.beta_hat) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(SwapError::AllOneSided),
        }
    }

    /// Histogram as CSV with columns `bin_left,bin_right,count`.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,count\n");
        for b in &self.histogram {
            out.push_str(&format!("{},{},{}\n", b.left, b.right, b.count));
        }
        out
    }
}

pub fn histogram(probs: &[f64], bins: usize) -> Vec<HistogramBin> {
    let mut counts = vec![0usize; bins];
    for &p in probs {
        let k = ((p.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin { left: k as f64 / bins as f64, right: (k + 1) as f64 / bins as f64, count })
        .collect()
}

/// Closed-form shape estimates from posterior probabilities. Values at or
/// below 0.5 form group 0; logs are natural.
pub fn fit_alpha_beta(probs: &[f64]) -> Result<GofReport> {
    if probs.len() < 2 {
        return Err(SwapError::InsufficientData("need at least two probabilities".into()));
    }
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(SwapError::DomainError("probabilities must lie in [0, 1]".into()));
    }
    let mut clamped = 0;
    let mut sum0 = 0.0;
    let mut sum1 = 0.0;
    let mut n0 = 0;
    let mut n1 = 0;
    for &raw in probs {
        let p = raw.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        if p != raw {
            clamped += 1;
        }
        let logit = (p / (1.0 - p)).ln();
        if raw <= 0.5 {
            n0 += 1;
            sum0 -= logit;
        } else {
            n1 += 1;
            sum1 += logit;
        }
    }
    let estimate = |count: usize, sum: f64| (count > 0 && sum > 0.0).then(|| count as f64 / sum);
    let alpha_hat = estimate(n0, sum0);
    let beta_hat = estimate(n1, sum1);
    Ok(GofReport {
        alpha_hat,
        beta_hat,
        gamma: n1 as f64 / probs.len() as f64,
        eps_sum: alpha_hat.zip(beta_hat).map(|(a, b)| a + b),
        n0,
        n1,
        clamped,
        histogram: histogram(probs, HISTOGRAM_BINS),
    })
}

/// Log-likelihood of `probs` under the approximate density with `gamma`
/// fixed at the observed fraction above 0.5. Split into the group-0 part
/// (depends on alpha only) and the group-1 part (beta only).
pub fn split_log_likelihood(probs: &[f64], alpha: f64, beta: f64) -> (f64, f64) {
    let n = probs.len() as f64;
    let gamma = probs.iter().filter(|&&p| p > 0.5).count() as f64 / n;
    let mut l0 = 0.0;
    let mut l1 = 0.0;
    for &raw in probs {
        let p = raw.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        if raw <= 0.5 {
            l0 += ((1.0 - gamma) / ((1.0 - p) * (1.0 - p))).ln() + alpha.ln() + (alpha - 1.0) * (p / (1.0 - p)).ln();
        } else {
            l1 += (gamma / (p * p)).ln() + beta.ln() + (beta - 1.0) * ((1.0 - p) / p).ln();
        }
    }
    (l0, l1)
}

/// Comparison verdict: the fit with the smaller shape estimates separates
/// the roles more decisively.
pub fn better_separated(a: &GofReport, b: &GofReport) -> Option<std::cmp::Ordering> {
    let (aa, ab) = a.require_both().ok()?;
    let (ba, bb) = b.require_both().ok()?;
    if aa < ba && ab < bb {
        Some(std::cmp::Ordering::Less)
    } else if aa > ba && ab > bb {
        Some(std::cmp::Ordering::Greater)
    } else {
        None
    }
}
