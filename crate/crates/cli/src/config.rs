//! Run configuration: JSON file merged with command-line flags (flags win).

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::CliError;

#[derive(Parser, Debug)]
#[command(name = "sigvol", version, about = "Signature volatility models: simulation, transforms and hedging")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Algebraic identity suite on random piecewise-linear paths.
    Selftest(Common),
    /// Simulated price paths as CSV.
    Simulate(Common),
    /// H1 sum, H3 exponential-moment estimate and martingale check.
    Hypotheses(Common),
    /// Riccati transform flow, with an optional Monte Carlo cross-check.
    Transform(Common),
    /// GKW hedge decomposition report.
    Hedge(Common),
    /// Depth table of the presets and an empirical residual scan.
    DepthReport(Common),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Selftest(_) => "selftest",
            Command::Simulate(_) => "simulate",
            Command::Hypotheses(_) => "hypotheses",
            Command::Transform(_) => "transform",
            Command::Hedge(_) => "hedge",
            Command::DepthReport(_) => "depth-report",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Selftest(c)
            | Command::Simulate(c)
            | Command::Hypotheses(c)
            | Command::Transform(c)
            | Command::Hedge(c)
            | Command::DepthReport(c) => c,
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory receiving `<subcommand>.csv` (stdout otherwise).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub trunc: Option<usize>,
    /// Preset name.
    #[arg(long)]
    pub model: Option<String>,
    /// File holding ℓ in `word=… coeff=…` lines (overrides the preset's ℓ).
    #[arg(long)]
    pub ell_file: Option<PathBuf>,
    /// Comma-separated price loadings η (required with an inline ℓ).
    #[arg(long, value_delimiter = ',')]
    pub eta: Option<Vec<f64>>,
    /// `geometric:<r>`, `polynomial:<alpha>` or `constant`.
    #[arg(long)]
    pub weight: Option<String>,
    /// Black–Scholes volatility: sets ℓ = σ·e_∅.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub s0: Option<f64>,
    #[arg(long = "T")]
    pub horizon: Option<f64>,
    /// Transform direction, `word=… coeff=…` entries separated by `;`.
    #[arg(long)]
    pub u: Option<String>,
    /// Log-price weight of the transform direction.
    #[arg(long = "uX")]
    pub u_x: Option<f64>,
    /// Paths for the transform Monte Carlo cross-check (0 skips it).
    #[arg(long)]
    pub mc_paths: Option<usize>,
    /// `call:K=1`, `digital:K=1`, `asian:K=1`, `variance_swap` or `forward`.
    #[arg(long)]
    pub payoff: Option<String>,
    /// Integrand depth of the dynamic hedge.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Residual window `N_low,M`.
    #[arg(long, value_delimiter = ',')]
    pub window: Option<Vec<usize>>,
    /// `auto`, `none` or comma-separated strikes.
    #[arg(long)]
    pub strikes: Option<String>,
    #[arg(long)]
    pub ridge: Option<f64>,
    /// Depths scanned by `depth-report`.
    #[arg(long, value_delimiter = ',')]
    pub depths: Option<Vec<usize>>,
    /// λ of the H3 estimate.
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<String>,
    /// Inline ℓ in `word=… coeff=…` lines.
    pub ell: Option<String>,
    pub eta: Option<Vec<f64>>,
    pub weight: Option<String>,
    pub sigma: Option<f64>,
    pub s0: Option<f64>,
    pub horizon: Option<f64>,
    pub steps: Option<usize>,
    pub trunc: Option<usize>,
    pub paths: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub transform: TransformBlock,
    #[serde(default)]
    pub hedge: HedgeBlock,
    #[serde(default)]
    pub hypotheses: HypothesesBlock,
}

#[derive(Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct TransformBlock {
    pub u: Option<String>,
    pub u_x: Option<f64>,
    pub mc_paths: Option<usize>,
}

#[derive(Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct HedgeBlock {
    pub payoff: Option<String>,
    pub depth: Option<usize>,
    pub window: Option<(usize, usize)>,
    pub strikes: Option<Strikes>,
    pub ridge: Option<f64>,
    pub depths: Option<Vec<usize>>,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
pub enum Strikes {
    Named(String),
    List(Vec<f64>),
}

#[derive(Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct HypothesesBlock {
    pub lambda: Option<f64>,
}

/// Fully merged configuration; subcommand defaults are applied where it is read.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: String,
    pub ell: Option<String>,
    pub eta: Option<Vec<f64>>,
    pub weight: Option<String>,
    pub sigma: Option<f64>,
    pub s0: f64,
    pub horizon: f64,
    pub steps: Option<usize>,
    pub trunc: Option<usize>,
    pub paths: Option<usize>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub u: Option<String>,
    pub u_x: f64,
    pub mc_paths: usize,
    pub payoff: Option<String>,
    pub depth: Option<usize>,
    pub window: Option<(usize, usize)>,
    pub strikes: Option<Strikes>,
    pub ridge: Option<f64>,
    pub depths: Option<Vec<usize>>,
    pub lambda: f64,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

impl RunConfig {
    pub fn merge(flags: &Common) -> Result<RunConfig, CliError> {
        let file: FileConfig = match &flags.config {
            Some(p) => serde_json::from_str(&read(p)?)
                .map_err(|e| CliError::Invalid(format!("{}: {e}", p.display())))?,
            None => FileConfig::default(),
        };
        let ell = match &flags.ell_file {
            Some(p) => Some(read(p)?),
            None => file.ell,
        };
        let window = match &flags.window {
            Some(w) if w.len() == 2 => Some((w[0], w[1])),
            Some(w) => return Err(CliError::Invalid(format!("--window needs two values, got {}", w.len()))),
            None => file.hedge.window,
        };
        let strikes = match &flags.strikes {
            Some(s) => Some(Strikes::Named(s.clone())),
            None => file.hedge.strikes,
        };
        let cfg = RunConfig {
            model: flags.model.clone().or(file.model).unwrap_or_else(|| "black_scholes".into()),
            ell,
            eta: flags.eta.clone().or(file.eta),
            weight: flags.weight.clone().or(file.weight),
            sigma: flags.sigma.or(file.sigma),
            s0: flags.s0.or(file.s0).unwrap_or(1.0),
            horizon: flags.horizon.or(file.horizon).unwrap_or(1.0),
            steps: flags.steps.or(file.steps),
            trunc: flags.trunc.or(file.trunc),
            paths: flags.paths.or(file.paths),
            seed: flags.seed.or(file.seed).ok_or_else(|| CliError::Invalid("a seed is required (--seed or config)".into()))?,
            out: flags.out.clone(),
            u: flags.u.clone().or(file.transform.u),
            u_x: flags.u_x.or(file.transform.u_x).unwrap_or(0.0),
            mc_paths: flags.mc_paths.or(file.transform.mc_paths).unwrap_or(0),
            payoff: flags.payoff.clone().or(file.hedge.payoff),
            depth: flags.depth.or(file.hedge.depth),
            window,
            strikes,
            ridge: flags.ridge.or(file.hedge.ridge),
            depths: flags.depths.clone().or(file.hedge.depths),
            lambda: flags.lambda.or(file.hypotheses.lambda).unwrap_or(0.5),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Invalid(format!("{name} must be positive, got {v}")))
            }
        };
        positive("s0", self.s0)?;
        positive("T", self.horizon)?;
        positive("lambda", self.lambda)?;
        if let Some(s) = self.sigma {
            positive("sigma", s)?;
        }
        for (name, v) in [("steps", self.steps), ("paths", self.paths)] {
            if v == Some(0) {
                return Err(CliError::Invalid(format!("{name} must be positive")));
            }
        }
        if !self.u_x.is_finite() {
            return Err(CliError::Invalid("uX must be finite".into()));
        }
        Ok(())
    }
}
