//! Bijective regression families and their fitting losses.
//!
//! A model `g` maps the x-scale onto the y-scale. Linear models are
//! `g(x) = a x + b`; quadratic models `g(x) = a x^2 + b x + c` restricted to
//! the branch on which they increase. Both losses mix forward residuals
//! `y - g(x)` and inverse residuals `x - g^-1(y)`, so fitting is done with a
//! derivative-free simplex search.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::SeriesPair;
use crate::error::{Result, SwapError};
use crate::numeric::{least_squares, polyfit, KahanSum};
use crate::simplex::{minimize, SimplexOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFamily {
    Linear,
    Quadratic,
}

impl ModelFamily {
    pub fn n_coefficients(self) -> usize {
        match self {
            ModelFamily::Linear => 2,
            ModelFamily::Quadratic => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelFamily::Linear => "linear",
            ModelFamily::Quadratic => "quadratic",
        }
    }
}

impl std::str::FromStr for ModelFamily {
    type Err = SwapError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ModelFamily::Linear),
            "quadratic" => Ok(ModelFamily::Quadratic),
            other => Err(SwapError::InvalidConfig(format!("unknown family {other:?}"))),
        }
    }
}

/// Coefficients are stored highest power first: `(a, b)` or `(a, b, c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: ModelFamily,
    pub coefficients: Vec<f64>,
}

/// Per-group residual variances used to weight the loss terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub sigma0_sq: f64,
    pub sigma1_sq: f64,
}

impl LossWeights {
    pub fn new(sigma0_sq: f64, sigma1_sq: f64) -> Result<Self> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(sigma0_sq) || !ok(sigma1_sq) {
            return Err(SwapError::InvalidConfig(format!(
                "loss weights must be positive and finite: ({sigma0_sq}, {sigma1_sq})"
            )));
        }
        Ok(Self { sigma0_sq, sigma1_sq })
    }
}

const CLAMP_PENALTY: f64 = 1e3;

impl ModelSpec {
    pub fn linear(a: f64, b: f64) -> Result<Self> {
        Self::new(ModelFamily::Linear, vec![a, b])
    }

    pub fn quadratic(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(ModelFamily::Quadratic, vec![a, b, c])
    }

    pub fn new(family: ModelFamily, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != family.n_coefficients() {
            return Err(SwapError::InvalidModel(format!(
                "{} model needs {} coefficients, got {}",
                family.as_str(),
                family.n_coefficients(),
                coefficients.len()
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(SwapError::InvalidModel("non-finite coefficient".into()));
        }
        if coefficients[0] == 0.0 {
            return Err(SwapError::InvalidModel("leading coefficient must be non-zero".into()));
        }
        Ok(Self { family, coefficients })
    }

    fn unchecked(family: ModelFamily, coefficients: &[f64]) -> Self {
        Self { family, coefficients: coefficients.to_vec() }
    }

    pub fn forward(&self, x: f64) -> f64 {
        let c = &self.coefficients;
        match self.family {
            ModelFamily::Linear => c[0] * x + c[1],
            ModelFamily::Quadratic => (c[0] * x + c[1]) * x + c[2],
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let c = &self.coefficients;
        match self.family {
            ModelFamily::Linear => c[0],
            ModelFamily::Quadratic => 2.0 * c[0] * x + c[1],
        }
    }

    /// Turning point `-b / 2a` of a quadratic; `None` for linear models.
    pub fn vertex(&self) -> Option<f64> {
        match self.family {
            ModelFamily::Linear => None,
            ModelFamily::Quadratic => Some(-self.coefficients[1] / (2.0 * self.coefficients[0])),
        }
    }

    /// Root on the increasing branch, plus the discriminant deficit that had
    /// to be clamped away (zero when the inverse is defined).
    fn inverse_with_deficit(&self, y: f64) -> (f64, f64) {
        let c = &self.coefficients;
        match self.family {
            ModelFamily::Linear => ((y - c[1]) / c[0], 0.0),
            ModelFamily::Quadratic => {
                let (a, b) = (c[0], c[1]);
                let disc = b * b - 4.0 * a * (c[2] - y);
                let (root_disc, deficit) = if disc >= 0.0 { (disc.sqrt(), 0.0) } else { (0.0, -disc) };
                // (-b + sqrt(D)) / 2a is the increasing-branch root for either
                // sign of a; the rationalized form avoids cancellation when b > 0.
                let x = if b >= 0.0 {
                    let denom = b + root_disc;
                    if denom == 0.0 {
                        -b / (2.0 * a)
                    } else {
                        2.0 * (y - c[2]) / denom
                    }
                } else {
                    (-b + root_disc) / (2.0 * a)
                };
                (x, deficit)
            }
        }
    }

    pub fn inverse(&self, y: f64) -> Result<f64> {
        let (x, deficit) = self.inverse_with_deficit(y);
        if deficit > 0.0 {
            Err(SwapError::InverseDomain(y))
        } else {
            Ok(x)
        }
    }

    /// True when `g` is strictly increasing on `[lo, hi]`.
    pub fn is_increasing_on(&self, lo: f64, hi: f64) -> bool {
        self.derivative(lo) > 0.0 && self.derivative(hi) > 0.0
    }

    /// True when the model is increasing over the sample and invertible at
    /// every observed y.
    pub fn is_valid_on(&self, pair: &SeriesPair) -> bool {
        let (lo, hi) = pair.x_range();
        self.is_increasing_on(lo, hi) && pair.y.iter().all(|&y| self.inverse_with_deficit(y).1 == 0.0)
    }

    pub fn distance(&self, other: &ModelSpec) -> f64 {
        self.coefficients.iter().zip(&other.coefficients).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }
}

impl std::fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c = &self.coefficients;
        match self.family {
            ModelFamily::Linear => write!(f, "y = {:.4} x {:+.4}", c[0], c[1]),
            ModelFamily::Quadratic => write!(f, "y = {:.4} x^2 {:+.4} x {:+.4}", c[0], c[1], c[2]),
        }
    }
}

/// Ordinary least squares of Y on X within the family, over all points.
pub fn ols_fit(pair: &SeriesPair, family: ModelFamily) -> Result<ModelSpec> {
    check_design(pair, family)?;
    let degree = family.n_coefficients() - 1;
    let coefficients = polyfit(&pair.x, &pair.y, degree)?;
    ModelSpec::new(family, coefficients).map_err(|_| SwapError::DegenerateDesign("zero leading coefficient".into()))
}

fn check_design(pair: &SeriesPair, family: ModelFamily) -> Result<()> {
    let k = family.n_coefficients();
    if pair.len() < k {
        return Err(SwapError::DegenerateDesign(format!("{} points for {} coefficients", pair.len(), k)));
    }
    let (lo, hi) = pair.x_range();
    if lo == hi {
        return Err(SwapError::DegenerateDesign("all x values identical".into()));
    }
    Ok(())
}

fn check_assignment(pair: &SeriesPair, z: &[u8]) -> Result<()> {
    if z.len() != pair.len() {
        return Err(SwapError::LengthMismatch(z.len(), pair.len()));
    }
    Ok(())
}

/// Squared forward residual, squared inverse residual and clamp deficit for one point.
fn residuals(m: &ModelSpec, x: f64, y: f64) -> (f64, f64, f64) {
    let r1 = y - m.forward(x);
    let (xi, deficit) = m.inverse_with_deficit(y);
    let r0 = x - xi;
    (r1 * r1, r0 * r0, deficit)
}

/// Variance-weighted SWAP loss: forward residuals for `z = 1`, inverse
/// residuals for `z = 0`.
pub fn gmm_loss(pair: &SeriesPair, z: &[u8], w: &LossWeights, m: &ModelSpec) -> f64 {
    let mut acc = KahanSum::default();
    for ((&x, &y), &zi) in pair.x.iter().zip(&pair.y).zip(z) {
        if zi == 1 {
            acc.add((y - m.forward(x)).powi(2) / w.sigma1_sq);
        } else {
            let (_, r0sq, deficit) = residuals(m, x, y);
            acc.add(r0sq / w.sigma0_sq);
            if deficit > 0.0 {
                acc.add(deficit * CLAMP_PENALTY / w.sigma0_sq);
            }
        }
    }
    acc.value()
}

/// Separation loss: each point's own-role residual minus its other-role
/// residual, both variance-weighted.
pub fn beta_loss(pair: &SeriesPair, z: &[u8], w: &LossWeights, m: &ModelSpec) -> f64 {
    let mut acc = KahanSum::default();
    for ((&x, &y), &zi) in pair.x.iter().zip(&pair.y).zip(z) {
        let (r1sq, r0sq, deficit) = residuals(m, x, y);
        let fwd = r1sq / w.sigma1_sq;
        let inv = r0sq / w.sigma0_sq;
        acc.add(if zi == 1 { fwd - inv } else { inv - fwd });
        if deficit > 0.0 {
            acc.add(deficit * CLAMP_PENALTY / w.sigma0_sq);
        }
    }
    acc.value()
}

fn search_loss<L>(pair: &SeriesPair, family: ModelFamily, loss: L) -> impl FnMut(&[f64]) -> f64 + '_
where
    L: Fn(&ModelSpec) -> f64 + 'static,
{
    let (lo, hi) = pair.x_range();
    move |c: &[f64]| {
        let m = ModelSpec::unchecked(family, c);
        // a decreasing (or flat) model cannot be inverted on the branch we use
        if !m.is_increasing_on(lo, hi) || c[0] == 0.0 {
            return f64::INFINITY;
        }
        loss(&m)
    }
}

/// Minimizes [`gmm_loss`] starting from the all-points OLS fit.
pub fn fit_gmm_loss(pair: &SeriesPair, z: &[u8], w: &LossWeights, family: ModelFamily) -> Result<ModelSpec> {
    fit_gmm_loss_from(pair, z, w, family, &[])
}

/// As [`fit_gmm_loss`], additionally searching from each warm start and
/// keeping whichever valid solution has the lowest loss.
pub fn fit_gmm_loss_from(
    pair: &SeriesPair,
    z: &[u8],
    w: &LossWeights,
    family: ModelFamily,
    warm_starts: &[ModelSpec],
) -> Result<ModelSpec> {
    check_assignment(pair, z)?;
    let init = ols_fit(pair, family)?;
    let z_owned = z.to_vec();
    let w_owned = *w;
    let pair_owned = pair.clone();
    let objective = move |m: &ModelSpec| gmm_loss(&pair_owned, &z_owned, &w_owned, m);

    let mut best: Option<(ModelSpec, f64)> = None;
    let starts = std::iter::once(&init).chain(warm_starts.iter().filter(|m| m.family == family));
    for start in starts {
        for step in [0.05, 0.25] {
            let opts = SimplexOptions { initial_step: step, ..Default::default() };
            let r = minimize(search_loss(pair, family, objective.clone()), &start.coefficients, &opts);
            let m = ModelSpec::unchecked(family, &r.x);
            if r.fx.is_finite() && m.coefficients[0] != 0.0 && m.is_valid_on(pair) {
                if best.as_ref().is_none_or(|(_, f)| r.fx < *f) {
                    best = Some((m, r.fx));
                }
                break;
            }
        }
    }
    let (m, _) = best.ok_or(SwapError::NonMonotoneFit)?;
    Ok(polish_gmm_fit(pair, z, w, &m))
}

/// Gauss-Newton refinement of a [`gmm_loss`] minimizer. The simplex search
/// only pins coefficients down to about the square root of its objective
/// tolerance; a few Newton-type steps take them to working precision. Steps
/// are accepted only when they lower the loss and keep the model valid.
pub fn polish_gmm_fit(pair: &SeriesPair, z: &[u8], w: &LossWeights, start: &ModelSpec) -> ModelSpec {
    let k = start.family.n_coefficients();
    let basis = |v: f64| -> Vec<f64> { (0..k).map(|j| v.powi((k - 1 - j) as i32)).collect() };
    let (s0, s1) = (w.sigma0_sq.sqrt(), w.sigma1_sq.sqrt());
    let mut m = start.clone();
    let mut loss = gmm_loss(pair, z, w, &m);
    for _ in 0..50 {
        let n = pair.len();
        let mut jac = DMatrix::zeros(n, k);
        let mut resid = DVector::zeros(n);
        for (i, ((&x, &y), &zi)) in pair.x.iter().zip(&pair.y).zip(z).enumerate() {
            if zi == 1 {
                resid[i] = (y - m.forward(x)) / s1;
                for (j, phi) in basis(x).into_iter().enumerate() {
                    jac[(i, j)] = -phi / s1;
                }
            } else {
                let Ok(xi) = m.inverse(y) else { return m };
                let slope = m.derivative(xi);
                resid[i] = (x - xi) / s0;
                // implicit differentiation of g(xi; c) = y
                for (j, phi) in basis(xi).into_iter().enumerate() {
                    jac[(i, j)] = phi / (slope * s0);
                }
            }
        }
        let Ok((step, _)) = least_squares(&jac, &(-resid)) else { return m };
        let mut improved = false;
        let mut t = 1.0;
        for _ in 0..30 {
            let c: Vec<f64> = m.coefficients.iter().zip(step.iter()).map(|(c, d)| c + t * d).collect();
            let cand = ModelSpec::unchecked(m.family, &c);
            if c[0] != 0.0 && cand.is_valid_on(pair) {
                let l = gmm_loss(pair, z, w, &cand);
                // near the minimum the decrease is below rounding; the step
                // itself (from residuals, not loss differences) is still exact
                if l <= loss + 8.0 * f64::EPSILON * loss.abs() {
                    m = cand;
                    loss = l;
                    improved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !improved || t * step.norm() <= 1e-14 * (1.0 + m.coefficients.iter().map(|c| c * c).sum::<f64>().sqrt()) {
            break;
        }
    }
    m
}

/// Box of +-50% around each coefficient of `init`.
pub fn trust_region(init: &ModelSpec) -> Vec<(f64, f64)> {
    init.coefficients
        .iter()
        .map(|&c| {
            let half = 0.5 * c.abs().max(1e-6);
            (c - half, c + half)
        })
        .collect()
}

/// Minimizes [`beta_loss`] inside the trust region around `init`.
pub fn fit_beta_loss(
    pair: &SeriesPair,
    z: &[u8],
    w: &LossWeights,
    family: ModelFamily,
    init: &ModelSpec,
) -> Result<ModelSpec> {
    check_assignment(pair, z)?;
    check_design(pair, family)?;
    if init.family != family {
        return Err(SwapError::InvalidModel("initial model has the wrong family".into()));
    }
    let bounds = trust_region(init);
    let z_owned = z.to_vec();
    let w_owned = *w;
    let pair_owned = pair.clone();
    let objective = move |m: &ModelSpec| beta_loss(&pair_owned, &z_owned, &w_owned, m);
    let opts = SimplexOptions { bounds: Some(bounds.clone()), ..Default::default() };
    let r = minimize(search_loss(pair, family, objective), &init.coefficients, &opts);
    if !r.fx.is_finite() {
        return Err(SwapError::NonMonotoneFit);
    }
    let on_boundary =
        r.x.iter()
            .zip(&bounds)
            .any(|(&v, &(lo, hi))| (v - lo).abs() <= 1e-7 * (hi - lo) || (hi - v).abs() <= 1e-7 * (hi - lo));
    if on_boundary {
        return Err(SwapError::TrustRegionExhausted);
    }
    let m = ModelSpec::unchecked(family, &r.x);
    if !m.is_valid_on(pair) {
        return Err(SwapError::NonMonotoneFit);
    }
    Ok(m)
}
