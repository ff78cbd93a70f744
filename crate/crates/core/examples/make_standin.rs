//! Writes the bundled stand-in snapshot: quarterly GDP and public debt,
//! 1966Q1 to 2023Q1, in millions of dollars.
//!
//! The series are synthetic. A latent activity path interpolates rough
//! annual GDP levels and carries a persistent seeded shock. Each quarter is
//! then generated from the SWAP model with a fixed regime calendar: in
//! X-driven quarters GDP follows the path and debt is `g(gdp) + e1`; in
//! Y-driven quarters debt follows `g(path)` and GDP is `g^-1(debt) + e0`.
//! Last quarter's regression shocks feed this quarter's path shock, which
//! makes each series lead the other.
//!
//! Usage: `cargo run -p swapfit-core --example make_standin -- <out-dir>`

use std::fs::File;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use swapfit_core::data::{write_series_csv, QuarterIndex};
use swapfit_core::ModelSpec;

// (year, quarterly GDP in $ trillions)
const ANCHORS: [(f64, f64); 17] = [
    (1966.0, 0.204),
    (1970.0, 0.268),
    (1975.0, 0.421),
    (1980.0, 0.714),
    (1982.0, 0.800),
    (1985.0, 1.085),
    (1990.0, 1.491),
    (1995.0, 1.910),
    (2000.0, 2.563),
    (2005.0, 3.260),
    (2008.0, 3.693),
    (2009.0, 3.620),
    (2010.0, 3.762),
    (2015.0, 4.552),
    (2019.0, 5.385),
    (2020.25, 4.843),
    (2023.0, 6.680),
];
/// Inclusive year spans in which debt is the driver.
const Y_DRIVEN: [(i32, i32); 4] = [(1966, 1972), (1984, 2000), (2009, 2018), (2020, 2022)];
const SEED: u64 = 19_660_101;
const SIGMA0: f64 = 0.004;
const SIGMA1: f64 = 0.15;

fn path_level(t: f64) -> f64 {
    let i = ANCHORS.iter().rposition(|a| a.0 <= t).unwrap_or(0).min(ANCHORS.len() - 2);
    let (a, b) = (ANCHORS[i], ANCHORS[i + 1]);
    let w = (t - a.0) / (b.0 - a.0);
    (a.1.ln() * (1.0 - w) + b.1.ln() * w).exp()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(&out)?;
    let g = ModelSpec::quadratic(0.6221, 0.9642, 0.0488)?;
    let quarters: Vec<QuarterIndex> =
        std::iter::successors(Some(QuarterIndex::new(1966, 1)?), |q| Some(q.succ())).take(229).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut eta = 0.0f64;
    let (mut prev_e0, mut prev_e1) = (0.0f64, 0.0f64);
    let mut gdp = Vec::with_capacity(quarters.len());
    let mut debt = Vec::with_capacity(quarters.len());
    for q in &quarters {
        eta = 0.8 * eta + 0.008 * normal() + 0.3 * prev_e1 - 0.3 * prev_e0;
        let level = path_level(q.as_year_fraction()) * eta.exp();
        let y_driven = Y_DRIVEN.iter().any(|&(a, b)| (a..=b).contains(&q.year));
        let (x, y) = if y_driven {
            let y = g.forward(level);
            let e0 = SIGMA0 * normal();
            (prev_e0, prev_e1) = (e0, 0.0);
            (g.inverse(y)? + e0, y)
        } else {
            let e1 = SIGMA1 * normal();
            (prev_e0, prev_e1) = (0.0, e1);
            (level, g.forward(level) + e1)
        };
        // millions of dollars, one decimal
        gdp.push((*q, (x * 1e7).round() / 10.0));
        debt.push((*q, (y * 1e7).round() / 10.0));
    }
    write_series_csv(File::create(out.join("gdp_quarterly.csv"))?, "DATE", "NGDPSAXDCUSQ", gdp)?;
    write_series_csv(File::create(out.join("debt_quarterly.csv"))?, "DATE", "GFDEBTN", debt)?;
    println!("wrote {} quarters to {}", quarters.len(), out.display());
    Ok(())
}
