//! The subcommands. Each returns the process exit status.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use swapfit_core::causality::{bidirectional_report, CausalityReport};
use swapfit_core::data::{align_pair, parse_series, scale_pair, write_series_csv};
use swapfit_core::densities::{fit_exponential, ks_test_exponential};
use swapfit_core::gof::{better_separated, fit_alpha_beta, GofReport};
use swapfit_core::model::ols_fit;
use swapfit_core::synth::{assignment_accuracy, brute_force_best_assignment, Scenario, SyntheticTruth};
use swapfit_core::timeline::{median_filter, timeline_segments, Driver};
use swapfit_core::{KsResult, Marginals, ModelSpec, QuarterIndex, RateEstimate, SeriesPair, SwapFit, Variant};

use crate::artifacts::{scatter_svg, verify, Manifest, Run};
use crate::failure::{Failure, EXIT_FIT, EXIT_GENERAL};
use crate::settings::{ModelName, Settings};

const SWAP_MODELS: [ModelName; 4] =
    [ModelName::GmmLinear, ModelName::GmmQuadratic, ModelName::BetaLinear, ModelName::BetaQuadratic];

/// Contents of `fit_<model>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitArtifact {
    pub model: String,
    pub n: usize,
    pub scale: f64,
    pub spec: ModelSpec,
    pub index: Vec<QuarterIndex>,
    pub swap: Option<SwapFit>,
    pub z_accuracy: Option<f64>,
}

/// Contents of `truth.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthArtifact {
    pub scenario: Scenario,
    pub truth: SyntheticTruth,
    pub oracle: Option<OracleRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub objective: f64,
    pub z: Vec<u8>,
    pub model: ModelSpec,
    pub sigma0_sq: f64,
    pub sigma1_sq: f64,
    pub accuracy: f64,
}

fn value_column_of(bytes: &[u8], date_column: &str) -> Option<String> {
    let header = std::str::from_utf8(bytes).ok()?.lines().next()?;
    header
        .split(',')
        .map(|h| h.trim().trim_matches('"'))
        .find(|h| !h.is_empty() && *h != date_column)
        .map(str::to_owned)
}

fn load_series(
    run: &mut Run,
    path: Option<&Path>,
    flag: &str,
    date_column: &str,
    value_column: Option<&str>,
) -> Result<swapfit_core::RawSeries, Failure> {
    let path = path.ok_or_else(|| Failure::input(format!("{flag} is required")))?;
    let bytes = run.read_input(path)?;
    let value_column = match value_column {
        Some(c) => c.to_owned(),
        None => value_column_of(&bytes, date_column)
            .ok_or_else(|| Failure::input(format!("{}: no value column", path.display())))?,
    };
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_series(bytes.as_slice(), &name, date_column, &value_column)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_pair(settings: &Settings, run: &mut Run) -> Result<SeriesPair, Failure> {
    let x = load_series(
        run,
        settings.x_file.as_deref(),
        "--x-file",
        &settings.x_date_column,
        settings.x_value_column.as_deref(),
    )?;
    let y = load_series(
        run,
        settings.y_file.as_deref(),
        "--y-file",
        &settings.y_date_column,
        settings.y_value_column.as_deref(),
    )?;
    Ok(scale_pair(&align_pair(&x, &y)?, settings.scale)?)
}

fn format_coefficients(spec: &ModelSpec) -> String {
    spec.coefficients.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>().join(" ")
}

fn scatter_csv(pair: &SeriesPair, fit: &SwapFit) -> String {
    let mut s = String::from("quarter,x,y,z,posterior\n");
    for (i, q) in pair.index.iter().enumerate() {
        let _ = writeln!(s, "{q},{},{},{},{}", pair.x[i], pair.y[i], fit.final_state.z[i], fit.posteriors[i][1]);
    }
    s
}

struct Row {
    model: ModelName,
    spec: Option<ModelSpec>,
    fit: Option<SwapFit>,
    z_accuracy: Option<f64>,
    error: Option<String>,
}

fn comparison_csv(rows: &[Row]) -> String {
    let mut s = String::from("model,status,a,b,c,objective,stop_reason,n0,n1,restart,failed_restarts,z_accuracy\n");
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in rows {
        let coef = |k: usize| opt(r.spec.as_ref().and_then(|m| m.coefficients.get(k)).map(f64::to_string));
        let swap = r.fit.as_ref();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.model.as_str(),
            if r.error.is_some() { "failed" } else { "ok" },
            coef(0),
            coef(1),
            coef(2),
            opt(swap.map(|f| f.objective().to_string())),
            opt(swap.map(|f| format!("{:?}", f.stop_reason))),
            opt(swap.map(|f| f.final_state.n0.to_string())),
            opt(swap.map(|f| f.final_state.n1.to_string())),
            opt(swap.map(|f| f.restart_index_chosen.to_string())),
            opt(swap.map(|f| f.restart_objectives.iter().filter(|o| o.is_none()).count().to_string())),
            opt(r.z_accuracy.map(|a| a.to_string())),
        );
    }
    s
}

pub fn fit(settings: &Settings, truth: Option<&Path>) -> Result<u8, Failure> {
    let models = settings.selected_models(&ModelName::ALL);
    if models.is_empty() {
        return Err(Failure::input("no models selected"));
    }
    let mut run = Run::start(&settings.out_dir, "fit")?;
    let pair = load_pair(settings, &mut run)?;
    let truth_z = match truth {
        Some(path) => {
            let bytes = run.read_input(path)?;
            let t: TruthArtifact = serde_json::from_slice(&bytes)
                .map_err(|e| Failure::input(format!("bad truth file {}: {e}", path.display())))?;
            if t.truth.z_true.len() != pair.len() {
                return Err(Failure::input(format!(
                    "truth has {} assignments but the data has {} points",
                    t.truth.z_true.len(),
                    pair.len()
                )));
            }
            Some(t.truth.z_true)
        }
        None => None,
    };
    let marginals = if models.iter().any(|m| m.variant().is_some()) { Some(Marginals::fit(&pair)?) } else { None };

    let mut rows = Vec::new();
    println!("{:<15} {:<8} {:<28} {:>10}", "model", "status", "coefficients", "time");
    for m in models {
        let t0 = Instant::now();
        let row = match (m.variant(), &marginals) {
            (Some(variant), Some(h)) => {
                let cfg = settings.swap_config(variant, m.family());
                match swapfit_core::run_swap(&pair, &cfg, h) {
                    Ok(fit) => {
                        let z_accuracy =
                            truth_z.as_deref().map(|t| assignment_accuracy(&fit.final_state.z, t)).transpose()?;
                        let spec = fit.final_state.model.clone();
                        run.write_json(
                            &m.fit_file(),
                            &FitArtifact {
                                model: m.as_str().into(),
                                n: pair.len(),
                                scale: pair.scale_applied,
                                spec: spec.clone(),
                                index: pair.index.clone(),
                                swap: Some(fit.clone()),
                                z_accuracy,
                            },
                        )?;
                        run.write(&format!("scatter_{}.csv", m.as_str()), scatter_csv(&pair, &fit).as_bytes())?;
                        let svg =
                            scatter_svg(&format!("SWAP {}", m.as_str()), &pair.x, &pair.y, &fit.final_state.z, &spec);
                        run.write(&format!("scatter_{}.svg", m.as_str()), svg.as_bytes())?;
                        Row { model: m, spec: Some(spec), fit: Some(fit), z_accuracy, error: None }
                    }
                    Err(e) => {
                        let failure = Failure::from(e);
                        if failure.code != EXIT_FIT {
                            return Err(failure);
                        }
                        eprintln!("swapfit: {}: {failure}", m.as_str());
                        Row { model: m, spec: None, fit: None, z_accuracy: None, error: Some(failure.message) }
                    }
                }
            }
            _ => {
                let spec = ols_fit(&pair, m.family())?;
                run.write_json(
                    &m.fit_file(),
                    &FitArtifact {
                        model: m.as_str().into(),
                        n: pair.len(),
                        scale: pair.scale_applied,
                        spec: spec.clone(),
                        index: pair.index.clone(),
                        swap: None,
                        z_accuracy: None,
                    },
                )?;
                Row { model: m, spec: Some(spec), fit: None, z_accuracy: None, error: None }
            }
        };
        let shown = match (&row.spec, &row.error) {
            (Some(spec), _) => format_coefficients(spec),
            (None, Some(e)) => e.clone(),
            (None, None) => String::new(),
        };
        let status = if row.error.is_some() { "failed" } else { "ok" };
        let accuracy = row.z_accuracy.map(|a| format!("  z-accuracy {a:.4}")).unwrap_or_default();
        println!("{:<15} {:<8} {:<28} {:>10.2?}{accuracy}", m.as_str(), status, shown, t0.elapsed());
        rows.push(row);
    }
    run.write("comparison.csv", comparison_csv(&rows).as_bytes())?;
    run.finish(settings)?;
    Ok(if rows.iter().any(|r| r.error.is_some()) { EXIT_FIT } else { 0 })
}

#[derive(Debug, Serialize)]
struct MarginalCheck {
    rate: Option<RateEstimate>,
    ks: Option<KsResult>,
    log10_p: Option<f64>,
    error: Option<String>,
}

impl MarginalCheck {
    fn run(sample: &[f64]) -> Self {
        let result = fit_exponential(sample).and_then(|r| Ok((r, ks_test_exponential(sample, r.lambda)?)));
        match result {
            Ok((rate, ks)) => Self { rate: Some(rate), ks: Some(ks), log10_p: Some(ks.p_value.log10()), error: None },
            Err(e) => Self { rate: None, ks: None, log10_p: None, error: Some(e.to_string()) },
        }
    }

    fn ran(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Serialize)]
struct Precheck {
    n: usize,
    max_lag: usize,
    bidirectional: bool,
    causality: CausalityReport,
    x_marginal: MarginalCheck,
    y_marginal: MarginalCheck,
}

pub fn precheck(settings: &Settings) -> Result<u8, Failure> {
    let mut run = Run::start(&settings.out_dir, "precheck")?;
    let pair = load_pair(settings, &mut run)?;
    let causality = bidirectional_report(&pair, settings.max_lag)?;
    let report = Precheck {
        n: pair.len(),
        max_lag: settings.max_lag,
        bidirectional: causality.bidirectional,
        x_marginal: MarginalCheck::run(&pair.x),
        y_marginal: MarginalCheck::run(&pair.y),
        causality,
    };
    print!("{}", report.causality.to_table());
    for (name, m) in [("x", &report.x_marginal), ("y", &report.y_marginal)] {
        match (&m.rate, &m.ks, &m.error) {
            (Some(r), Some(ks), _) => println!(
                "exponential {name}: rate {:.4}, K-S d {:.4}, log10 p {:.2}",
                r.lambda,
                ks.d_statistic,
                ks.p_value.log10()
            ),
            (_, _, Some(e)) => println!("exponential {name}: {e}"),
            _ => {}
        }
    }
    println!("bidirectional: {}", report.bidirectional);
    run.write_json("precheck.json", &report)?;
    run.finish(settings)?;
    let ok = report.bidirectional && report.x_marginal.ran() && report.y_marginal.ran();
    Ok(if ok { 0 } else { EXIT_GENERAL })
}

fn read_fit(run: &mut Run, model: ModelName) -> Result<FitArtifact, Failure> {
    let path = run.dir().join(model.fit_file());
    if !path.is_file() {
        return Err(Failure::input(format!("missing fit: {} not found; run `swapfit fit` first", path.display())));
    }
    let bytes = run.read_input(&path)?;
    serde_json::from_slice(&bytes).map_err(|e| Failure::input(format!("bad fit artifact {}: {e}", path.display())))
}

fn swap_of(model: ModelName, artifact: FitArtifact) -> Result<(SwapFit, Vec<QuarterIndex>), Failure> {
    match artifact.swap {
        Some(fit) => Ok((fit, artifact.index)),
        None => Err(Failure::input(format!("{} is not a SWAP fit", model.as_str()))),
    }
}

#[derive(Debug, Serialize)]
struct Verdict {
    variant: Variant,
    /// `quadratic`, `linear`, or `none` when neither shape pair dominates.
    better_separated: &'static str,
}

pub fn gof(settings: &Settings) -> Result<u8, Failure> {
    let mut run = Run::start(&settings.out_dir, "gof")?;
    let explicit = settings.models.is_some();
    let mut reports: Vec<(ModelName, GofReport)> = Vec::new();
    for m in settings.selected_models(&SWAP_MODELS) {
        if m.variant().is_none() {
            return Err(Failure::input(format!("{} has no posteriors", m.as_str())));
        }
        if !explicit && !run.dir().join(m.fit_file()).is_file() {
            continue;
        }
        let (fit, _) = swap_of(m, read_fit(&mut run, m)?)?;
        let report = fit_alpha_beta(&fit.prob_x_drives())?;
        let shape = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.4}"));
        println!(
            "{:<15} alpha {:>8}  beta {:>8}  n0 {:>4}  n1 {:>4}",
            m.as_str(),
            shape(report.alpha_hat),
            shape(report.beta_hat),
            report.n0,
            report.n1
        );
        run.write_json(&format!("gof_{}.json", m.as_str()), &report)?;
        run.write(&format!("gof_{}_histogram.csv", m.as_str()), report.histogram_csv().as_bytes())?;
        reports.push((m, report));
    }
    if reports.is_empty() {
        return Err(Failure::input(format!(
            "missing fit: no SWAP fit artifacts in {}; run `swapfit fit` first",
            run.dir().display()
        )));
    }

    let mut verdicts = Vec::new();
    for (variant, lin, quad) in [
        (Variant::Gmm, ModelName::GmmLinear, ModelName::GmmQuadratic),
        (Variant::Beta, ModelName::BetaLinear, ModelName::BetaQuadratic),
    ] {
        let find = |name: ModelName| reports.iter().find(|(m, _)| *m == name).map(|(_, r)| r);
        if let (Some(l), Some(q)) = (find(lin), find(quad)) {
            let better = match better_separated(q, l) {
                Some(std::cmp::Ordering::Less) => "quadratic",
                Some(std::cmp::Ordering::Greater) => "linear",
                _ => "none",
            };
            println!("{}: better separated: {better}", variant.as_str());
            verdicts.push(Verdict { variant, better_separated: better });
        }
    }
    run.write_json("gof_verdict.json", &verdicts)?;
    run.finish(settings)?;
    Ok(0)
}

pub fn timeline(settings: &Settings) -> Result<u8, Failure> {
    let model = match settings.models.as_deref() {
        None => ModelName::GmmQuadratic,
        Some([m]) => *m,
        Some(_) => return Err(Failure::input("timeline takes exactly one model")),
    };
    let mut run = Run::start(&settings.out_dir, "timeline")?;
    let (fit, index) = swap_of(model, read_fit(&mut run, model)?)?;
    let z = &fit.final_state.z;
    let smoothed = median_filter(z, settings.smooth_window)?;
    let segments = timeline_segments(z, &index, settings.smooth_window)?;

    let mut csv = String::from("quarter,z_raw,z_smoothed,posterior,driver\n");
    for (i, q) in index.iter().enumerate() {
        let _ =
            writeln!(csv, "{q},{},{},{},{:?}", z[i], smoothed[i], fit.posteriors[i][1], Driver::from_z(smoothed[i]));
    }
    run.write("timeline.csv", csv.as_bytes())?;

    let mut seg_csv = String::from("start,end,quarters,driver\n");
    for s in &segments {
        let _ = writeln!(seg_csv, "{},{},{},{:?}", s.start, s.end, s.quarters(), s.driver);
        println!("{} - {}  {:>3} quarters  {:?}", s.start, s.end, s.quarters(), s.driver);
    }
    run.write("segments.csv", seg_csv.as_bytes())?;
    run.finish(settings)?;
    Ok(0)
}

pub fn synth(settings: &Settings, scenario_path: &Path, brute_force: bool) -> Result<u8, Failure> {
    let mut run = Run::start(&settings.out_dir, "synth")?;
    let bytes = run.read_input(scenario_path)?;
    let text = std::str::from_utf8(&bytes).map_err(|_| Failure::input("scenario is not UTF-8"))?;
    let scenario: Scenario =
        toml::from_str(text).map_err(|e| Failure::input(format!("bad scenario {}: {e}", scenario_path.display())))?;
    let (pair, truth) = scenario.generate()?;

    let oracle = if brute_force {
        let h = Marginals::fit(&pair)?;
        let cfg = settings.swap_config(Variant::Gmm, scenario.family);
        let best = brute_force_best_assignment(&pair, scenario.family, &h, &cfg)?;
        println!("oracle objective {:.6}, model {}", best.objective, best.state.model);
        Some(OracleRecord {
            accuracy: assignment_accuracy(&best.z, &truth.z_true)?,
            objective: best.objective,
            model: best.state.model.clone(),
            sigma0_sq: best.state.sigma0_sq,
            sigma1_sq: best.state.sigma1_sq,
            z: best.z,
        })
    } else {
        None
    };

    for (name, values) in [("synth_x.csv", &pair.x), ("synth_y.csv", &pair.y)] {
        let mut out = Vec::new();
        write_series_csv(&mut out, "DATE", "VALUE", pair.index.iter().copied().zip(values.iter().copied()))?;
        run.write(name, &out)?;
    }
    run.write_json("truth.json", &TruthArtifact { scenario, truth, oracle })?;
    println!("wrote {} points to {}", pair.len(), run.dir().display());
    run.finish(settings)?;
    Ok(0)
}

pub fn verify_dir(settings: &Settings) -> Result<u8, Failure> {
    let manifest = Manifest::load(&settings.out_dir)?;
    let problems = verify(&settings.out_dir, &manifest);
    for p in &problems {
        println!("{p}");
    }
    if problems.is_empty() {
        println!("{} runs verified", manifest.runs.len());
        Ok(0)
    } else {
        Ok(EXIT_GENERAL)
    }
}
