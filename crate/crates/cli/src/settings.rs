//! Command-line flags, the optional TOML config file, and their merge.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use swapfit_core::{ModelFamily, Variant};

use crate::failure::Failure;

pub const OUT_DIR_ENV: &str = "SWAPFIT_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "swapfit-out";

#[derive(Debug, Parser)]
#[command(name = "swapfit", version, about = "SWAP regression fits, pre-checks and reports")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the selected models and write per-model artifacts.
    Fit {
        #[command(flatten)]
        common: Flags,
        /// Truth JSON from `swapfit synth`; adds z-accuracy to the report.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Granger, ADF and exponential-marginal checks.
    Precheck {
        #[command(flatten)]
        common: Flags,
    },
    /// Shape estimates for the posteriors of earlier SWAP fits.
    Gof {
        #[command(flatten)]
        common: Flags,
    },
    /// Driver segments over time from an earlier SWAP fit.
    Timeline {
        #[command(flatten)]
        common: Flags,
    },
    /// Generate a synthetic pair from a scenario file.
    Synth {
        #[command(flatten)]
        common: Flags,
        #[arg(long)]
        scenario: PathBuf,
        /// Also enumerate every assignment (n <= 12) and record the optimum.
        #[arg(long)]
        brute_force: bool,
    },
    /// Recompute the digests recorded in an output directory's manifest.
    Verify {
        #[command(flatten)]
        common: Flags,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fit { .. } => "fit",
            Command::Precheck { .. } => "precheck",
            Command::Gof { .. } => "gof",
            Command::Timeline { .. } => "timeline",
            Command::Synth { .. } => "synth",
            Command::Verify { .. } => "verify",
        }
    }

    pub fn flags(&self) -> &Flags {
        match self {
            Command::Fit { common, .. }
            | Command::Precheck { common }
            | Command::Gof { common }
            | Command::Timeline { common }
            | Command::Synth { common, .. }
            | Command::Verify { common } => common,
        }
    }
}

/// Every flag is optional so that a config file can fill the gaps.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Flags {
    /// TOML file with the same keys as the long flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub x_file: Option<PathBuf>,
    #[arg(long)]
    pub y_file: Option<PathBuf>,
    #[arg(long)]
    pub x_date_column: Option<String>,
    /// Defaults to the first column that is not the date column.
    #[arg(long)]
    pub x_value_column: Option<String>,
    #[arg(long)]
    pub y_date_column: Option<String>,
    #[arg(long)]
    pub y_value_column: Option<String>,
    /// Multiplier applied to both series after alignment.
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long, value_parser = ["gmm", "beta"])]
    pub variant: Option<String>,
    #[arg(long, value_parser = ["linear", "quadratic"])]
    pub family: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub variance_floor: Option<f64>,
    #[arg(long)]
    pub smooth_window: Option<usize>,
    #[arg(long)]
    pub max_lag: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Comma-separated subset of slr, qr, gmm-linear, gmm-quadratic,
    /// beta-linear, beta-quadratic.
    #[arg(long, value_delimiter = ',')]
    pub models: Option<Vec<String>>,
}

impl Flags {
    /// Fills unset fields from `other`.
    fn or(self, other: Flags) -> Flags {
        Flags {
            config: self.config.or(other.config),
            x_file: self.x_file.or(other.x_file),
            y_file: self.y_file.or(other.y_file),
            x_date_column: self.x_date_column.or(other.x_date_column),
            x_value_column: self.x_value_column.or(other.x_value_column),
            y_date_column: self.y_date_column.or(other.y_date_column),
            y_value_column: self.y_value_column.or(other.y_value_column),
            scale: self.scale.or(other.scale),
            variant: self.variant.or(other.variant),
            family: self.family.or(other.family),
            seed: self.seed.or(other.seed),
            restarts: self.restarts.or(other.restarts),
            max_iters: self.max_iters.or(other.max_iters),
            tol: self.tol.or(other.tol),
            variance_floor: self.variance_floor.or(other.variance_floor),
            smooth_window: self.smooth_window.or(other.smooth_window),
            max_lag: self.max_lag.or(other.max_lag),
            out_dir: self.out_dir.or(other.out_dir),
            models: self.models.or(other.models),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    Slr,
    Qr,
    GmmLinear,
    GmmQuadratic,
    BetaLinear,
    BetaQuadratic,
}

impl ModelName {
    pub const ALL: [ModelName; 6] = [
        ModelName::Slr,
        ModelName::Qr,
        ModelName::GmmLinear,
        ModelName::GmmQuadratic,
        ModelName::BetaLinear,
        ModelName::BetaQuadratic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelName::Slr => "slr",
            ModelName::Qr => "qr",
            ModelName::GmmLinear => "gmm-linear",
            ModelName::GmmQuadratic => "gmm-quadratic",
            ModelName::BetaLinear => "beta-linear",
            ModelName::BetaQuadratic => "beta-quadratic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s.trim())
    }

    pub fn family(self) -> ModelFamily {
        match self {
            ModelName::Slr | ModelName::GmmLinear | ModelName::BetaLinear => ModelFamily::Linear,
            _ => ModelFamily::Quadratic,
        }
    }

    /// `None` for the plain least-squares models.
    pub fn variant(self) -> Option<Variant> {
        match self {
            ModelName::Slr | ModelName::Qr => None,
            ModelName::GmmLinear | ModelName::GmmQuadratic => Some(Variant::Gmm),
            ModelName::BetaLinear | ModelName::BetaQuadratic => Some(Variant::Beta),
        }
    }

    pub fn fit_file(self) -> String {
        format!("fit_{}.json", self.as_str())
    }
}

/// Fully resolved settings, echoed into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub x_file: Option<PathBuf>,
    pub y_file: Option<PathBuf>,
    pub x_date_column: String,
    pub x_value_column: Option<String>,
    pub y_date_column: String,
    pub y_value_column: Option<String>,
    pub scale: f64,
    pub variant: Option<Variant>,
    pub family: Option<ModelFamily>,
    pub seed: u64,
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub variance_floor: f64,
    pub smooth_window: usize,
    pub max_lag: usize,
    pub out_dir: PathBuf,
    /// Explicit selection; `None` means the command's default set.
    pub models: Option<Vec<ModelName>>,
}

impl Settings {
    /// Merges flags over the config file over the environment over defaults.
    pub fn resolve(flags: &Flags) -> Result<Settings, Failure> {
        let from_file = match &flags.config {
            Some(path) => read_config(path)?,
            None => Flags::default(),
        };
        let merged = flags.clone().or(from_file);
        let defaults = swapfit_core::SwapConfig::default();

        let out_dir = merged
            .out_dir
            .or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        let variant = merged.variant.as_deref().map(str::parse::<Variant>).transpose()?;
        let family = merged.family.as_deref().map(str::parse::<ModelFamily>).transpose()?;
        let models = merged
            .models
            .map(|names| {
                names
                    .iter()
                    .map(|n| ModelName::parse(n).ok_or_else(|| Failure::input(format!("unknown model {n:?}"))))
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?;
        if models.as_ref().is_some_and(Vec::is_empty) {
            return Err(Failure::input("--models must name at least one model"));
        }
        Ok(Settings {
            x_file: merged.x_file,
            y_file: merged.y_file,
            x_date_column: merged.x_date_column.unwrap_or_else(|| "DATE".into()),
            x_value_column: merged.x_value_column,
            y_date_column: merged.y_date_column.unwrap_or_else(|| "DATE".into()),
            y_value_column: merged.y_value_column,
            scale: merged.scale.unwrap_or(1e-6),
            variant,
            family,
            seed: merged.seed.unwrap_or(defaults.seed),
            restarts: merged.restarts.unwrap_or(defaults.restarts),
            max_iters: merged.max_iters.unwrap_or(defaults.max_iters),
            tol: merged.tol.unwrap_or(defaults.tol_g),
            variance_floor: merged.variance_floor.unwrap_or(defaults.variance_floor),
            smooth_window: merged.smooth_window.unwrap_or(5),
            max_lag: merged.max_lag.unwrap_or(8),
            out_dir,
            models,
        })
    }

    /// The explicit `--models` list, or `default` narrowed by `--variant`
    /// and `--family`.
    pub fn selected_models(&self, default: &[ModelName]) -> Vec<ModelName> {
        if let Some(m) = &self.models {
            return m.clone();
        }
        default
            .iter()
            .copied()
            .filter(|m| self.family.is_none_or(|f| m.family() == f))
            .filter(|m| match (self.variant, m.variant()) {
                (Some(want), Some(v)) => v == want,
                (Some(_), None) => false,
                (None, _) => true,
            })
            .collect()
    }

    pub fn swap_config(&self, variant: Variant, family: ModelFamily) -> swapfit_core::SwapConfig {
        swapfit_core::SwapConfig {
            variant,
            family,
            tol_g: self.tol,
            max_iters: self.max_iters,
            restarts: self.restarts,
            seed: self.seed,
            variance_floor: self.variance_floor,
            ..swapfit_core::SwapConfig::default()
        }
    }
}

fn read_config(path: &Path) -> Result<Flags, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::input(format!("bad config {}: {e}", path.display())))
}
