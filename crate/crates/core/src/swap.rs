//! Alternating optimization of the SWAP latent indicator and model.
//!
//! Each observation carries `z` in {0, 1}. With `z = 1`, X is the predictor:
//! `y = g(x) + e1`, `e1 ~ N(0, s1^2)`. With `z = 0`, Y is the predictor:
//! `x = g^-1(y) + e0`, `e0 ~ N(0, s0^2)`. Iterations alternate between hard
//! assignment of `z` from its posterior and re-estimation of
//! `(g, s0^2, s1^2, pi0, pi1)` given `z`. Two variants differ only in how `g`
//! is refit: the GMM variant minimizes the variance-weighted residual loss,
//! the Beta variant then refines that fit under the separation loss.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::SeriesPair;
use crate::densities::Marginals;
use crate::error::{Result, SwapError};
use crate::exec::{map_range, Execution};
use crate::model::{beta_loss, fit_beta_loss, fit_gmm_loss_from, ols_fit, LossWeights, ModelFamily, ModelSpec};
use crate::numeric::KahanSum;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Gmm,
    Beta,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Gmm => "gmm",
            Variant::Beta => "beta",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = SwapError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gmm" => Ok(Variant::Gmm),
            "beta" => Ok(Variant::Beta),
            other => Err(SwapError::InvalidConfig(format!("unknown variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapConfig {
    pub variant: Variant,
    pub family: ModelFamily,
    /// Stop once the coefficient vector moves less than this (L2).
    pub tol_g: f64,
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
    pub variance_floor: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for SwapConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Gmm,
            family: ModelFamily::Quadratic,
            tol_g: 1e-8,
            max_iters: 500,
            restarts: 20,
            seed: 42,
            variance_floor: 1e-12,
            execution: Execution::default(),
        }
    }
}

impl SwapConfig {
    pub fn new(variant: Variant, family: ModelFamily) -> Self {
        Self { variant, family, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol_g > 0.0) {
            return Err(SwapError::InvalidConfig("tol_g must be positive".into()));
        }
        if self.max_iters == 0 || self.restarts == 0 {
            return Err(SwapError::InvalidConfig("max_iters and restarts must be at least 1".into()));
        }
        if !(self.variance_floor > 0.0) {
            return Err(SwapError::InvalidConfig("variance_floor must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapState {
    pub z: Vec<u8>,
    pub model: ModelSpec,
    pub sigma0_sq: f64,
    pub sigma1_sq: f64,
    pub pi0: f64,
    pub pi1: f64,
    pub n0: usize,
    pub n1: usize,
    pub iteration: usize,
}

impl SwapState {
    pub fn weights(&self) -> LossWeights {
        LossWeights { sigma0_sq: self.sigma0_sq, sigma1_sq: self.sigma1_sq }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    ZFixedPoint,
    GTolerance,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapFit {
    #[serde(rename = "final")]
    pub final_state: SwapState,
    /// `[P(z=0), P(z=1)]` per observation at the final parameters.
    pub posteriors: Vec<[f64; 2]>,
    pub objective_trace: Vec<f64>,
    pub stop_reason: StopReason,
    pub restart_index_chosen: usize,
    /// Final objective of every restart, `None` where the restart failed.
    pub restart_objectives: Vec<Option<f64>>,
    /// Whether a variance floor or mixing clamp was hit in the chosen restart.
    pub clamp_fired: bool,
    pub config: SwapConfig,
}

impl SwapFit {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("at least one iteration")
    }

    /// `P(z = 1)` per observation.
    pub fn prob_x_drives(&self) -> Vec<f64> {
        self.posteriors.iter().map(|p| p[1]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mixing {
    pub n0: usize,
    pub n1: usize,
    pub pi0: f64,
    pub pi1: f64,
    pub clamped: bool,
}

/// Counts and mixing proportions; `pi0` is kept inside `[1/(n+1), n/(n+1)]`.
pub fn update_mixing(z: &[u8]) -> Mixing {
    let n = z.len();
    let n1 = z.iter().filter(|&&v| v == 1).count();
    let n0 = n - n1;
    let raw = n0 as f64 / n as f64;
    let lo = 1.0 / (n as f64 + 1.0);
    let hi = n as f64 / (n as f64 + 1.0);
    let pi0 = raw.clamp(lo, hi);
    Mixing { n0, n1, pi0, pi1: 1.0 - pi0, clamped: pi0 != raw }
}

/// Maximum-likelihood residual variances `(s0^2, s1^2, floored)`: mean squared
/// inverse residual over `z = 0` and mean squared forward residual over
/// `z = 1`. An empty group keeps its previous value.
pub fn update_variances(
    pair: &SeriesPair,
    z: &[u8],
    m: &ModelSpec,
    previous: (f64, f64),
    floor: f64,
) -> Result<(f64, f64, bool)> {
    let mut ss = [KahanSum::default(), KahanSum::default()];
    let mut counts = [0usize; 2];
    for ((&x, &y), &zi) in pair.x.iter().zip(&pair.y).zip(z) {
        let r = if zi == 1 { y - m.forward(x) } else { x - m.inverse(y)? };
        ss[zi as usize].add(r * r);
        counts[zi as usize] += 1;
    }
    let mut floored = false;
    let mut est = |k: usize, prev: f64| {
        if counts[k] == 0 {
            return prev;
        }
        let v = ss[k].value() / counts[k] as f64;
        if v < floor {
            floored = true;
            floor
        } else {
            v
        }
    };
    let s0 = est(0, previous.0);
    let s1 = est(1, previous.1);
    Ok((s0, s1, floored))
}

/// Log of the unnormalized weights `(log B, log A)` for `z = 0` and `z = 1`.
/// `log B` is `-inf` where `g^-1(y)` is undefined.
pub fn log_weights(x: f64, y: f64, s: &SwapState, h: &Marginals) -> (f64, f64) {
    let r1 = y - s.model.forward(x);
    let log_a = s.pi1.ln() - 0.5 * (LN_2PI + s.sigma1_sq.ln()) - r1 * r1 / (2.0 * s.sigma1_sq) + h.x.log_density(x);
    let log_b = match s.model.inverse(y) {
        Ok(xi) => {
            let r0 = x - xi;
            s.pi0.ln() - 0.5 * (LN_2PI + s.sigma0_sq.ln()) - r0 * r0 / (2.0 * s.sigma0_sq) + h.y.log_density(y)
        }
        Err(_) => f64::NEG_INFINITY,
    };
    (log_b, log_a)
}

/// Normalizes a pair of log weights into probabilities.
pub fn normalize_log_weights(log_b: f64, log_a: f64) -> (f64, f64) {
    let m = log_b.max(log_a);
    if m == f64::NEG_INFINITY {
        return (0.5, 0.5);
    }
    let eb = (log_b - m).exp();
    let ea = (log_a - m).exp();
    let total = ea + eb;
    (eb / total, ea / total)
}

/// `(P(z=0 | x, y), P(z=1 | x, y))` under the current state.
pub fn posterior_z(x: f64, y: f64, s: &SwapState, h: &Marginals) -> (f64, f64) {
    let (lb, la) = log_weights(x, y, s, h);
    normalize_log_weights(lb, la)
}

/// Hard assignment; ties go to `z = 1`.
pub fn assign_z(pair: &SeriesPair, s: &SwapState, h: &Marginals) -> Vec<u8> {
    pair.x
        .iter()
        .zip(&pair.y)
        .map(|(&x, &y)| {
            let (lb, la) = log_weights(x, y, s, h);
            u8::from(la >= lb)
        })
        .collect()
}

/// Complete-data log-likelihood of the state, mixing terms included.
pub fn complete_log_likelihood(pair: &SeriesPair, s: &SwapState, h: &Marginals) -> Result<f64> {
    let mut acc = KahanSum::default();
    let c0 = s.pi0.ln() - 0.5 * (LN_2PI + s.sigma0_sq.ln());
    let c1 = s.pi1.ln() - 0.5 * (LN_2PI + s.sigma1_sq.ln());
    for ((&x, &y), &zi) in pair.x.iter().zip(&pair.y).zip(&s.z) {
        if zi == 1 {
            let r = y - s.model.forward(x);
            acc.add(c1 - r * r / (2.0 * s.sigma1_sq) + h.x.log_density(x));
        } else {
            let r = x - s.model.inverse(y)?;
            acc.add(c0 - r * r / (2.0 * s.sigma0_sq) + h.y.log_density(y));
        }
    }
    Ok(acc.value())
}

/// Value the variant optimizes: log-likelihood for GMM (higher is better),
/// separation loss for Beta (lower is better).
pub fn variant_objective(variant: Variant, pair: &SeriesPair, s: &SwapState, h: &Marginals) -> Result<f64> {
    match variant {
        Variant::Gmm => complete_log_likelihood(pair, s, h),
        Variant::Beta => Ok(beta_loss(pair, &s.z, &s.weights(), &s.model)),
    }
}

fn better(variant: Variant, a: f64, b: f64) -> bool {
    match variant {
        Variant::Gmm => a > b,
        Variant::Beta => a < b,
    }
}

/// Refits `g` for the new assignment. The current model is used as a warm
/// start alongside the OLS start.
pub fn update_model(pair: &SeriesPair, z: &[u8], s: &SwapState, cfg: &SwapConfig) -> Result<ModelSpec> {
    let w = s.weights();
    let gmm = fit_gmm_loss_from(pair, z, &w, cfg.family, std::slice::from_ref(&s.model))?;
    match cfg.variant {
        Variant::Gmm => Ok(gmm),
        Variant::Beta => fit_beta_loss(pair, z, &w, cfg.family, &gmm),
    }
}

/// Random fair-coin assignment, OLS model and the residual variances it implies.
pub fn initialize<R: Rng>(
    pair: &SeriesPair,
    cfg: &SwapConfig,
    _h: &Marginals,
    rng: &mut R,
) -> Result<(SwapState, bool)> {
    let z: Vec<u8> = (0..pair.len()).map(|_| u8::from(rng.random::<bool>())).collect();
    let model = ols_fit(pair, cfg.family)?;
    if !model.is_valid_on(pair) {
        return Err(SwapError::NonMonotoneFit);
    }
    state_for(pair, z, model, (1.0, 1.0), cfg.variance_floor, 0)
}

/// Assembles a consistent state for `z` and `model`, re-estimating variances
/// and mixing. The flag reports whether a floor or clamp was applied.
pub fn state_for(
    pair: &SeriesPair,
    z: Vec<u8>,
    model: ModelSpec,
    previous_var: (f64, f64),
    floor: f64,
    iteration: usize,
) -> Result<(SwapState, bool)> {
    let (sigma0_sq, sigma1_sq, floored) = update_variances(pair, &z, &model, previous_var, floor)?;
    let mix = update_mixing(&z);
    let state =
        SwapState { z, model, sigma0_sq, sigma1_sq, pi0: mix.pi0, pi1: mix.pi1, n0: mix.n0, n1: mix.n1, iteration };
    Ok((state, floored || mix.clamped))
}

/// One restart, run to convergence from its own seeded stream.
pub fn run_restart(pair: &SeriesPair, cfg: &SwapConfig, h: &Marginals, restart: usize) -> Result<SwapFit> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64);
    let (mut state, mut clamp_fired) = initialize(pair, cfg, h, &mut rng)?;
    let mut trace = Vec::new();
    let mut stop_reason = StopReason::MaxIters;

    for t in 1..=cfg.max_iters {
        let z_new = assign_z(pair, &state, h);
        let model = update_model(pair, &z_new, &state, cfg)?;
        let moved = model.distance(&state.model);
        let (next, clamped) = state_for(pair, z_new, model, (state.sigma0_sq, state.sigma1_sq), cfg.variance_floor, t)?;
        clamp_fired |= clamped;
        state = next;
        trace.push(variant_objective(cfg.variant, pair, &state, h)?);

        if moved < cfg.tol_g {
            stop_reason =
                if assign_z(pair, &state, h) == state.z { StopReason::ZFixedPoint } else { StopReason::GTolerance };
            break;
        }
    }

    let posteriors = pair
        .x
        .iter()
        .zip(&pair.y)
        .map(|(&x, &y)| {
            let (p0, p1) = posterior_z(x, y, &state, h);
            [p0, p1]
        })
        .collect();
    Ok(SwapFit {
        final_state: state,
        posteriors,
        objective_trace: trace,
        stop_reason,
        restart_index_chosen: restart,
        restart_objectives: Vec::new(),
        clamp_fired,
        config: cfg.clone(),
    })
}

/// Runs every restart (in parallel when enabled) and keeps the best final
/// objective; ties go to the lowest restart index.
pub fn run_swap(pair: &SeriesPair, cfg: &SwapConfig, h: &Marginals) -> Result<SwapFit> {
    cfg.validate()?;
    if pair.len() < 2 {
        return Err(SwapError::InsufficientData("need at least two observations".into()));
    }
    let results = map_range(cfg.execution, cfg.restarts, |r| run_restart(pair, cfg, h, r));

    let mut objectives = Vec::with_capacity(results.len());
    let mut best: Option<SwapFit> = None;
    for res in results {
        match res {
            Ok(fit) => {
                objectives.push(Some(fit.objective()));
                if best.as_ref().is_none_or(|b| better(cfg.variant, fit.objective(), b.objective())) {
                    best = Some(fit);
                }
            }
            Err(SwapError::NonMonotoneFit | SwapError::TrustRegionExhausted) => objectives.push(None),
            Err(e) => return Err(e),
        }
    }
    let mut best = best.ok_or(SwapError::AllRestartsFailed(cfg.restarts))?;
    best.restart_objectives = objectives;
    Ok(best)
}
