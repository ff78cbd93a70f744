//! Runs the whole pipeline on the bundled snapshot and prints a summary.
//!
//! Usage: `cargo run --release -p swapfit-core --example bundled_fit [data-dir]`

use std::time::Instant;

use swapfit_core::causality::bidirectional_report;
use swapfit_core::data::{align_pair, load_series_csv, scale_pair};
use swapfit_core::densities::{ks_test_exponential, Marginals};
use swapfit_core::gof::fit_alpha_beta;
use swapfit_core::model::ols_fit;
use swapfit_core::timeline::timeline_segments;
use swapfit_core::{ModelFamily, SwapConfig, Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "data".into());
    let gdp = load_series_csv(format!("{dir}/gdp_quarterly.csv"), "DATE", "NGDPSAXDCUSQ")?;
    let debt = load_series_csv(format!("{dir}/debt_quarterly.csv"), "DATE", "GFDEBTN")?;
    let pair = scale_pair(&align_pair(&gdp, &debt)?, 1e-6)?;
    let h = Marginals::fit(&pair)?;
    println!("n = {}, rates = ({:.4}, {:.4})", pair.len(), h.x.lambda, h.y.lambda);
    for (name, s, r) in [("x", &pair.x, h.x.lambda), ("y", &pair.y, h.y.lambda)] {
        let ks = ks_test_exponential(s, r)?;
        println!("K-S {name}: d = {:.4}, log10 p = {:.2}", ks.d_statistic, ks.p_value.log10());
    }
    println!("SLR {}", ols_fit(&pair, ModelFamily::Linear)?);
    println!("QR  {}", ols_fit(&pair, ModelFamily::Quadratic)?);

    let report = bidirectional_report(&pair, 8)?;
    print!("{}", report.to_table());

    for variant in [Variant::Gmm, Variant::Beta] {
        for family in [ModelFamily::Linear, ModelFamily::Quadratic] {
            let cfg = SwapConfig::new(variant, family);
            let t0 = Instant::now();
            match swapfit_core::run_swap(&pair, &cfg, &h) {
                Ok(fit) => {
                    let probs = fit.prob_x_drives();
                    let gof = fit_alpha_beta(&probs)?;
                    println!(
                        "{}-{}: {} obj {:.6} stop {:?} iters {} restart {} failed {} n1 {} alpha {:?} beta {:?} ({:.2?})",
                        variant.as_str(),
                        family.as_str(),
                        fit.final_state.model,
                        fit.objective(),
                        fit.stop_reason,
                        fit.final_state.iteration,
                        fit.restart_index_chosen,
                        fit.restart_objectives.iter().filter(|o| o.is_none()).count(),
                        fit.final_state.n1,
                        gof.alpha_hat,
                        gof.beta_hat,
                        t0.elapsed()
                    );
                    let segs = timeline_segments(&fit.final_state.z, &pair.index, 5)?;
                    let text: Vec<String> =
                        segs.iter().map(|s| format!("{}-{} {:?}", s.start, s.end, s.driver)).collect();
                    println!("  {}", text.join(", "));
                }
                Err(e) => println!("{}-{}: {e} ({:.2?})", variant.as_str(), family.as_str(), t0.elapsed()),
            }
        }
    }
    Ok(())
}
