//! Synthetic data with known truth, and brute-force oracles for testing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{QuarterIndex, SeriesPair};
use crate::densities::Marginals;
use crate::error::{Result, SwapError};
use crate::exec::map_range;
use crate::gof::{split_log_likelihood, PROB_CLAMP};
use crate::model::{fit_gmm_loss, fit_gmm_loss_from, ols_fit, ModelFamily, ModelSpec};
use crate::simplex::{minimize, SimplexOptions};
use crate::swap::{complete_log_likelihood, state_for, SwapConfig, SwapState};

pub const MAX_ATTEMPTS: usize = 100_000;
pub const MAX_ENUMERATION: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTruth {
    pub model: ModelSpec,
    /// Empty means "draw from a fair coin" when passed to [`generate`].
    #[serde(default)]
    pub z_true: Vec<u8>,
    pub sigma0_sq: f64,
    pub sigma1_sq: f64,
    pub seed: u64,
}

/// A scenario file: the truth plus sample size and marginal rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub n: usize,
    pub family: ModelFamily,
    pub coefficients: Vec<f64>,
    #[serde(default)]
    pub sigma0_sq: f64,
    #[serde(default)]
    pub sigma1_sq: f64,
    pub x_rate: f64,
    pub y_rate: f64,
    pub seed: u64,
    #[serde(default)]
    pub z_true: Vec<u8>,
}

impl Scenario {
    pub fn truth(&self) -> Result<SyntheticTruth> {
        Ok(SyntheticTruth {
            model: ModelSpec::new(self.family, self.coefficients.clone())?,
            z_true: self.z_true.clone(),
            sigma0_sq: self.sigma0_sq,
            sigma1_sq: self.sigma1_sq,
            seed: self.seed,
        })
    }

    pub fn generate(&self) -> Result<(SeriesPair, SyntheticTruth)> {
        generate(&self.truth()?, self.n, self.x_rate, self.y_rate)
    }
}

fn gaussian(rng: &mut ChaCha8Rng, var: f64) -> f64 {
    let e: f64 = StandardNormal.sample(rng);
    e * var.sqrt()
}

/// Draws `n` points from the generative model. For `z = 1`, `x` is
/// exponential and `y = g(x) + e1`; for `z = 0`, `y` is exponential
/// (restricted to where `g^-1` exists) and `x = g^-1(y) + e0`. Draws that
/// leave the positive quadrant or the increasing part of `g` are rejected.
pub fn generate(truth: &SyntheticTruth, n: usize, x_rate: f64, y_rate: f64) -> Result<(SeriesPair, SyntheticTruth)> {
    if !(x_rate > 0.0 && y_rate > 0.0) {
        return Err(SwapError::InvalidConfig("marginal rates must be positive".into()));
    }
    if !(truth.sigma0_sq >= 0.0 && truth.sigma1_sq >= 0.0) {
        return Err(SwapError::InvalidConfig("noise variances must be non-negative".into()));
    }
    if !truth.z_true.is_empty() && truth.z_true.len() != n {
        return Err(SwapError::LengthMismatch(truth.z_true.len(), n));
    }
    let ex = Exp::new(x_rate).map_err(|e| SwapError::InvalidConfig(e.to_string()))?;
    let ey = Exp::new(y_rate).map_err(|e| SwapError::InvalidConfig(e.to_string()))?;
    let g = &truth.model;
    let mut rng = ChaCha8Rng::seed_from_u64(truth.seed);
    let mut z = Vec::with_capacity(n);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);

    for i in 0..n {
        let zi = match truth.z_true.get(i) {
            Some(&v) => v,
            None => u8::from(rng.random::<bool>()),
        };
        let mut drawn = None;
        for _ in 0..MAX_ATTEMPTS {
            let point = if zi == 1 {
                let x: f64 = ex.sample(&mut rng);
                let y = g.forward(x) + gaussian(&mut rng, truth.sigma1_sq);
                (g.derivative(x) > 0.0).then_some((x, y))
            } else {
                let y: f64 = ey.sample(&mut rng);
                g.inverse(y).ok().map(|xi| (xi + gaussian(&mut rng, truth.sigma0_sq), y))
            };
            if let Some((x, y)) = point.filter(|&(x, y)| x > 0.0 && y > 0.0) {
                drawn = Some((x, y));
                break;
            }
        }
        let (x, y) = drawn.ok_or(SwapError::RangeExhausted(i))?;
        z.push(zi);
        xs.push(x);
        ys.push(y);
    }
    let pair = SeriesPair::from_vecs(xs, ys, QuarterIndex::new(2000, 1)?)?;
    let mut out = truth.clone();
    out.z_true = z;
    Ok((pair, out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationResult {
    pub z: Vec<u8>,
    pub objective: f64,
    pub state: SwapState,
}

fn state_log_likelihood(
    pair: &SeriesPair,
    z: &[u8],
    m: &ModelSpec,
    h: &Marginals,
    floor: f64,
) -> Option<(SwapState, f64)> {
    let (s, _) = state_for(pair, z.to_vec(), m.clone(), (1.0, 1.0), floor, 0).ok()?;
    let ll = complete_log_likelihood(pair, &s, h).ok()?;
    ll.is_finite().then_some((s, ll))
}

/// Best complete-data log-likelihood attainable with the assignment held at
/// `z`: variances and mixing are profiled out at their maximum-likelihood
/// values, and `g` is found by alternating weighted fits followed by a
/// direct simplex polish of the profile.
pub fn best_for_assignment(
    pair: &SeriesPair,
    z: &[u8],
    family: ModelFamily,
    h: &Marginals,
    floor: f64,
) -> Option<(SwapState, f64)> {
    let (lo, hi) = pair.x_range();
    let mut best: Option<(SwapState, f64)> = None;
    let mut consider = |cand: Option<(SwapState, f64)>| {
        if let Some((s, ll)) = cand {
            if best.as_ref().is_none_or(|(_, b)| ll > *b) {
                best = Some((s, ll));
            }
        }
    };

    let mut starts: Vec<ModelSpec> = ols_fit(pair, family).into_iter().collect();
    if let Ok(w) = crate::model::LossWeights::new(1.0, 1.0) {
        starts.extend(fit_gmm_loss(pair, z, &w, family).ok());
    }
    for start in starts {
        let Some((mut s, mut ll)) = state_log_likelihood(pair, z, &start, h, floor) else { continue };
        for _ in 0..200 {
            let Ok(m) = fit_gmm_loss_from(pair, z, &s.weights(), family, std::slice::from_ref(&s.model)) else { break };
            let moved = m.distance(&s.model);
            match state_log_likelihood(pair, z, &m, h, floor) {
                Some((next, next_ll)) if next_ll >= ll => {
                    s = next;
                    ll = next_ll;
                }
                _ => break,
            }
            if moved < 1e-12 {
                break;
            }
        }
        let profile = |c: &[f64]| {
            let Ok(m) = ModelSpec::new(family, c.to_vec()) else { return f64::INFINITY };
            if !m.is_increasing_on(lo, hi) {
                return f64::INFINITY;
            }
            state_log_likelihood(pair, z, &m, h, floor).map_or(f64::INFINITY, |(_, ll)| -ll)
        };
        let opts = SimplexOptions { initial_step: 0.01, ..Default::default() };
        let r = minimize(profile, &s.model.coefficients, &opts);
        consider(Some((s.clone(), ll)));
        if let Ok(m) = ModelSpec::new(family, r.x) {
            consider(state_log_likelihood(pair, z, &m, h, floor));
        }
    }
    best
}

/// Enumerates all `2^n` assignments and returns the one with the highest
/// profiled complete-data log-likelihood. Ties go to the lowest bit pattern,
/// where observation `i` is bit `i`.
pub fn brute_force_best_assignment(
    pair: &SeriesPair,
    family: ModelFamily,
    h: &Marginals,
    cfg: &SwapConfig,
) -> Result<EnumerationResult> {
    let n = pair.len();
    if n > MAX_ENUMERATION {
        return Err(SwapError::TooLarge(n));
    }
    let results = map_range(cfg.execution, 1usize << n, |mask| {
        let z: Vec<u8> = (0..n).map(|i| ((mask >> i) & 1) as u8).collect();
        best_for_assignment(pair, &z, family, h, cfg.variance_floor)
    });
    let mut best: Option<(SwapState, f64)> = None;
    for cand in results.into_iter().flatten() {
        if best.as_ref().is_none_or(|(_, b)| cand.1 > *b) {
            best = Some(cand);
        }
    }
    let (state, objective) = best.ok_or(SwapError::AllRestartsFailed(1 << n))?;
    Ok(EnumerationResult { z: state.z.clone(), objective, state })
}

pub const GRID_STEP: f64 = 1e-3;
pub const GRID_MAX: f64 = 3.0;

/// Shape estimates maximizing the approximate-Beta likelihood over the grid
/// `step, 2 step, ..., max`.
pub fn grid_mle_beta(probs: &[f64], step: f64, max: f64) -> Result<(f64, f64)> {
    let n0 = probs.iter().filter(|&&p| p <= 0.5).count();
    if probs.is_empty() || n0 == 0 || n0 == probs.len() {
        return Err(SwapError::AllOneSided);
    }
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(SwapError::DomainError("probabilities must lie in [0, 1]".into()));
    }
    let steps = (max / step).round() as usize;
    let mut best = (f64::NEG_INFINITY, 0.0, f64::NEG_INFINITY, 0.0);
    for k in 1..=steps {
        let v = k as f64 * step;
        // the two halves of the likelihood separate, so one sweep serves both
        let (l0, l1) = split_log_likelihood(probs, v, v);
        if l0 > best.0 {
            best.0 = l0;
            best.1 = v;
        }
        if l1 > best.2 {
            best.2 = l1;
            best.3 = v;
        }
    }
    Ok((best.1, best.3))
}

/// Fraction of positions where two assignments agree.
pub fn assignment_accuracy(estimated: &[u8], truth: &[u8]) -> Result<f64> {
    if estimated.len() != truth.len() {
        return Err(SwapError::LengthMismatch(estimated.len(), truth.len()));
    }
    if truth.is_empty() {
        return Ok(1.0);
    }
    let hits = estimated.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Posterior-like probabilities drawn symmetrically away from 0.5; used by
/// tests that need random but well-formed probability sets.
pub fn random_probabilities(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut out: Vec<f64> = (0..n)
        .map(|i| {
            let u: f64 = rng.random_range(PROB_CLAMP..0.5);
            if i % 2 == 0 {
                u
            } else {
                1.0 - u
            }
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}
