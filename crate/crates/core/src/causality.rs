//! Econometric pre-checks: bidirectional Granger causality and augmented
//! Dickey–Fuller stationarity of the regression residuals.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::data::SeriesPair;
use crate::error::{Result, SwapError};
use crate::exec::{map_range, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Lags of Y help predict X.
    YtoX,
    /// Lags of X help predict Y.
    XtoY,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::YtoX => "Y -> X",
            Direction::XtoY => "X -> Y",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrangerResult {
    pub direction: Direction,
    pub lag: usize,
    pub f_stat: f64,
    pub p_value: f64,
    pub rss_restricted: f64,
    pub rss_unrestricted: f64,
    pub df_num: usize,
    pub df_den: usize,
    /// Residuals of the unrestricted regression, in time order.
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

impl GrangerResult {
    pub fn f_from_rss(&self) -> f64 {
        ((self.rss_restricted - self.rss_unrestricted) / self.df_num as f64)
            / (self.rss_unrestricted / self.df_den as f64)
    }
}

/// Where the ADF statistic falls relative to the tabulated critical values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum PValueBracket {
    BelowOnePercent,
    Interpolated(f64),
    AboveTenPercent,
}

impl PValueBracket {
    /// Conservative upper bound on the p-value.
    pub fn upper_bound(self) -> f64 {
        match self {
            PValueBracket::BelowOnePercent => 0.01,
            PValueBracket::Interpolated(p) => p,
            PValueBracket::AboveTenPercent => 1.0,
        }
    }

    pub fn is_below(self, level: f64) -> bool {
        match self {
            PValueBracket::BelowOnePercent => level >= 0.01,
            PValueBracket::Interpolated(p) => p < level,
            PValueBracket::AboveTenPercent => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    pub one_percent: f64,
    pub two_half_percent: f64,
    pub five_percent: f64,
    pub ten_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub t_stat: f64,
    pub lag_order: usize,
    pub nobs: usize,
    pub p_value_bracket: PValueBracket,
    pub critical_values: CriticalValues,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionalAdf {
    pub direction: Direction,
    pub granger_lag: usize,
    pub adf: AdfResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalityReport {
    pub granger: Vec<GrangerResult>,
    pub adf: [DirectionalAdf; 2],
    pub bidirectional: bool,
    pub significance: f64,
}

pub const SIGNIFICANCE: f64 = 0.05;
pub const DEFAULT_MAX_LAG: usize = 8;

/// Upper tail of the F(d1, d2) distribution.
pub fn f_sf(f: f64, d1: usize, d2: usize) -> f64 {
    if !(f > 0.0) {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    let (d1, d2) = (d1 as f64, d2 as f64);
    beta_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f)).clamp(0.0, 1.0)
}

struct OlsFit {
    coef: DVector<f64>,
    se: DVector<f64>,
    residuals: Vec<f64>,
    rss: f64,
}

fn ols(design: &DMatrix<f64>, target: &DVector<f64>) -> Result<OlsFit> {
    let (rows, cols) = design.shape();
    if rows <= cols {
        return Err(SwapError::InsufficientData(format!("{rows} rows for {cols} regressors")));
    }
    let (coef, rss) = crate::numeric::least_squares(design, target)?;
    let residuals: Vec<f64> = (target - design * &coef).iter().copied().collect();
    let r = design.clone().qr().r();
    let r_inv = r.try_inverse().ok_or(SwapError::SingularDesign)?;
    let sigma2 = rss / (rows - cols) as f64;
    let se = DVector::from_fn(cols, |i, _| (sigma2 * r_inv.row(i).norm_squared()).sqrt());
    Ok(OlsFit { coef, se, residuals, rss })
}

/// Nested-model F-test of whether `lag` lags of the source series improve on
/// `lag` lags of the target series alone (both with intercept).
pub fn granger_test(pair: &SeriesPair, direction: Direction, lag: usize) -> Result<GrangerResult> {
    if lag == 0 {
        return Err(SwapError::InvalidConfig("lag must be at least 1".into()));
    }
    let (target, source) = match direction {
        Direction::YtoX => (&pair.x, &pair.y),
        Direction::XtoY => (&pair.y, &pair.x),
    };
    let n = target.len();
    let df_den = (n as isize) - 3 * lag as isize - 1;
    if n <= lag || df_den < 1 {
        return Err(SwapError::InsufficientData(format!("n = {n} too short for lag {lag}")));
    }
    let rows = n - lag;
    let df_den = df_den as usize;
    let y = DVector::from_fn(rows, |i, _| target[i + lag]);
    let restricted = DMatrix::from_fn(rows, 1 + lag, |i, j| if j == 0 { 1.0 } else { target[i + lag - j] });
    let unrestricted = DMatrix::from_fn(rows, 1 + 2 * lag, |i, j| match j {
        0 => 1.0,
        j if j <= lag => target[i + lag - j],
        j => source[i + lag - (j - lag)],
    });
    let r = ols(&restricted, &y)?;
    let u = ols(&unrestricted, &y)?;
    // nested fits can disagree in the last bits; keep the ordering exact
    let rss_u = u.rss.min(r.rss);
    let f_stat = ((r.rss - rss_u) / lag as f64) / (rss_u / df_den as f64);
    Ok(GrangerResult {
        direction,
        lag,
        f_stat,
        p_value: f_sf(f_stat, lag, df_den),
        rss_restricted: r.rss,
        rss_unrestricted: rss_u,
        df_num: lag,
        df_den,
        residuals: u.residuals,
    })
}

/// Constant-only Dickey–Fuller critical values (Fuller's table), rows by
/// sample size; `usize::MAX` stands for the asymptotic row.
#[allow(clippy::approx_constant)]
const DF_TABLE: [(usize, [f64; 4]); 6] = [
    (25, [-3.75, -3.33, -3.00, -2.63]),
    (50, [-3.58, -3.22, -2.93, -2.60]),
    (100, [-3.51, -3.17, -2.89, -2.58]),
    (250, [-3.46, -3.14, -2.88, -2.57]),
    (500, [-3.44, -3.13, -2.87, -2.57]),
    (usize::MAX, [-3.43, -3.12, -2.86, -2.57]),
];
const DF_LEVELS: [f64; 4] = [0.01, 0.025, 0.05, 0.10];

/// Critical values interpolated linearly in the sample size (in `1/n`
/// beyond the last finite row).
pub fn critical_values(n: usize) -> CriticalValues {
    let row = |cv: [f64; 4]| CriticalValues {
        one_percent: cv[0],
        two_half_percent: cv[1],
        five_percent: cv[2],
        ten_percent: cv[3],
    };
    if n <= DF_TABLE[0].0 {
        return row(DF_TABLE[0].1);
    }
    for w in DF_TABLE.windows(2) {
        let ((n0, c0), (n1, c1)) = (w[0], w[1]);
        if n <= n1 {
            let t = if n1 == usize::MAX { 1.0 - n0 as f64 / n as f64 } else { (n - n0) as f64 / (n1 - n0) as f64 };
            let mut cv = [0.0; 4];
            for k in 0..4 {
                cv[k] = c0[k] + t * (c1[k] - c0[k]);
            }
            return row(cv);
        }
    }
    row(DF_TABLE[DF_TABLE.len() - 1].1)
}

fn bracket(t_stat: f64, cv: &CriticalValues) -> PValueBracket {
    let pts = [cv.one_percent, cv.two_half_percent, cv.five_percent, cv.ten_percent];
    if t_stat < pts[0] {
        return PValueBracket::BelowOnePercent;
    }
    if t_stat > pts[3] {
        return PValueBracket::AboveTenPercent;
    }
    for k in 0..3 {
        if t_stat <= pts[k + 1] {
            let t = (t_stat - pts[k]) / (pts[k + 1] - pts[k]);
            return PValueBracket::Interpolated(DF_LEVELS[k] + t * (DF_LEVELS[k + 1] - DF_LEVELS[k]));
        }
    }
    PValueBracket::Interpolated(0.10)
}

fn adf_design(series: &[f64], lag: usize, start: usize) -> (DMatrix<f64>, DVector<f64>) {
    // rows are t = start..n-1, regressing diff[t] on [1, level[t-1], diff[t-1..t-lag]]
    let n = series.len();
    let diff = |t: usize| series[t] - series[t - 1];
    let rows = n - start;
    let x = DMatrix::from_fn(rows, 2 + lag, |i, j| {
        let t = start + i;
        match j {
            0 => 1.0,
            1 => series[t - 1],
            j => diff(t - (j - 1)),
        }
    });
    let y = DVector::from_fn(rows, |i, _| diff(start + i));
    (x, y)
}

/// ADF test with a constant and `lag_order` lagged differences.
pub fn adf_test(series: &[f64], lag_order: usize) -> Result<AdfResult> {
    let n = series.len();
    if n <= 2 * lag_order + 3 {
        return Err(SwapError::InsufficientData(format!("n = {n} too short for ADF lag {lag_order}")));
    }
    let (x, y) = adf_design(series, lag_order, lag_order + 1);
    let fit = ols(&x, &y)?;
    let t_stat = fit.coef[1] / fit.se[1];
    let nobs = y.len();
    let critical_values = critical_values(nobs);
    Ok(AdfResult { t_stat, lag_order, nobs, p_value_bracket: bracket(t_stat, &critical_values), critical_values })
}

/// Chooses the lag in `0..=max_lag` minimizing AIC on a common sample, then
/// runs [`adf_test`] at that lag.
pub fn adf_test_auto(series: &[f64], max_lag: usize) -> Result<AdfResult> {
    let n = series.len();
    let max_lag = max_lag.min(n.saturating_sub(4) / 2);
    let start = max_lag + 1;
    let mut best: Option<(usize, f64)> = None;
    for lag in 0..=max_lag {
        let (x, y) = adf_design(series, lag, start);
        let Ok(fit) = ols(&x, &y) else { continue };
        let m = y.len() as f64;
        let aic = m * (fit.rss / m).ln() + 2.0 * (lag + 2) as f64;
        if best.is_none_or(|(_, b)| aic < b) {
            best = Some((lag, aic));
        }
    }
    let (lag, _) = best.ok_or_else(|| SwapError::InsufficientData("no ADF lag could be fitted".into()))?;
    adf_test(series, lag)
}

pub fn bidirectional_report(pair: &SeriesPair, max_lag: usize) -> Result<CausalityReport> {
    bidirectional_report_with(pair, max_lag, Execution::default())
}

/// Granger tests over lags `1..=max_lag` in both directions, plus ADF on the
/// unrestricted residuals at each direction's most significant lag.
pub fn bidirectional_report_with(pair: &SeriesPair, max_lag: usize, exec: Execution) -> Result<CausalityReport> {
    if max_lag == 0 {
        return Err(SwapError::InvalidConfig("max_lag must be at least 1".into()));
    }
    let jobs: Vec<(Direction, usize)> =
        [Direction::YtoX, Direction::XtoY].into_iter().flat_map(|d| (1..=max_lag).map(move |l| (d, l))).collect();
    let granger = map_range(exec, jobs.len(), |i| granger_test(pair, jobs[i].0, jobs[i].1))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let best = |d: Direction| {
        granger
            .iter()
            .filter(|g| g.direction == d)
            .min_by(|a, b| a.p_value.total_cmp(&b.p_value))
            .expect("max_lag >= 1")
    };
    let adf_for = |d: Direction| -> Result<DirectionalAdf> {
        let g = best(d);
        Ok(DirectionalAdf { direction: d, granger_lag: g.lag, adf: adf_test_auto(&g.residuals, DEFAULT_MAX_LAG)? })
    };
    let adf = [adf_for(Direction::YtoX)?, adf_for(Direction::XtoY)?];
    let bidirectional = best(Direction::YtoX).p_value < SIGNIFICANCE && best(Direction::XtoY).p_value < SIGNIFICANCE;
    Ok(CausalityReport { granger, adf, bidirectional, significance: SIGNIFICANCE })
}

fn stars(p: f64) -> &'static str {
    match p {
        p if p < 0.001 => "***",
        p if p < 0.01 => "**",
        p if p < 0.05 => "*",
        p if p < 0.1 => ".",
        _ => "",
    }
}

impl CausalityReport {
    /// Plain-text layout in the style of R's `grangertest` output.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for d in [Direction::YtoX, Direction::XtoY] {
            out.push_str(&format!("Granger causality test ({})\n", d.label()));
            out.push_str("  Lag  Res.Df  Df         F      Pr(>F)\n");
            for g in self.granger.iter().filter(|g| g.direction == d) {
                out.push_str(&format!(
                    "  {:>3}  {:>6}  {:>2}  {:>8.4}  {:>10.4e} {}\n",
                    g.lag,
                    g.df_den,
                    g.df_num,
                    g.f_stat,
                    g.p_value,
                    stars(g.p_value)
                ));
            }
            out.push('\n');
        }
        out.push_str("Signif. codes:  0 '***' 0.001 '**' 0.01 '*' 0.05 '.' 0.1 ' ' 1\n\n");
        for a in &self.adf {
            let p = match a.adf.p_value_bracket {
                PValueBracket::BelowOnePercent => "< 0.01".to_string(),
                PValueBracket::AboveTenPercent => "> 0.10".to_string(),
                PValueBracket::Interpolated(p) => format!("{p:.4}"),
            };
            out.push_str(&format!(
                "ADF on residuals ({}, lag {}): t = {:.4}, lag order {}, p {}\n",
                a.direction.label(),
                a.granger_lag,
                a.adf.t_stat,
                a.adf.lag_order,
                p
            ));
        }
        out.push_str(&format!("bidirectional at {}: {}\n", self.significance, self.bidirectional));
        out
    }
}
