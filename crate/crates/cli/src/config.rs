//! Command-line grammar, the flat TOML config file, and resolution of
//! per-experiment defaults.

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum Experiment {
    Example1,
    Example2,
    Example3,
    LemmaAudit,
    BoundAudit,
    Custom,
    MinN,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Example1 => "example1",
            Experiment::Example2 => "example2",
            Experiment::Example3 => "example3",
            Experiment::LemmaAudit => "lemma-audit",
            Experiment::BoundAudit => "bound-audit",
            Experiment::Custom => "custom",
            Experiment::MinN => "min-n",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundArg {
    Local,
    Global,
    Scaled,
}

/// Hermite-function approximation experiments.
#[derive(Debug, Parser)]
#[command(name = "hermite-approx", version)]
pub struct Args {
    /// Experiment to run; may instead come from `--config`.
    #[arg(value_enum)]
    pub experiment: Option<Experiment>,
    /// Truncation orders, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Basis scale of h_k^α(x) = √α h_k(αx).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Half-width of the evaluation window.
    #[arg(long = "T")]
    pub t: Option<f64>,
    /// Grid points per axis (kernel and lemma grids) or along x (profiles).
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also render SVG line plots.
    #[arg(long)]
    pub svg: bool,
    /// Flat TOML file with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Signal for `custom`: indicator:A,B | hat:C,W | gaussian:S | hermite:K | csv:PATH, optionally `@D` for dilation by D.
    #[arg(long)]
    pub signal: Option<String>,
    /// Target bound value for `min-n`.
    #[arg(long)]
    pub target: Option<f64>,
    /// Bound inverted by `min-n`.
    #[arg(long, value_enum)]
    pub bound: Option<BoundArg>,
    #[arg(long = "T0")]
    pub t0: Option<f64>,
    #[arg(long = "Omega0")]
    pub omega0: Option<f64>,
    #[arg(long = "eps-t")]
    pub eps_t: Option<f64>,
    #[arg(long = "eps-omega")]
    pub eps_omega: Option<f64>,
    /// Band parameter `c` of the scaled bound.
    #[arg(long)]
    pub c: Option<f64>,
    /// Multiplies every audited right-hand side (harness self-test).
    #[arg(long, hide = true)]
    pub constant_scale: Option<f64>,
}

/// Keys accepted in a `--config` file; also the form written back as
/// `config.toml` next to each manifest.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signal: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundArg>,
    #[serde(rename = "T0", skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(rename = "Omega0", skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant_scale: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved run parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Params {
    pub experiment: Experiment,
    pub n: Vec<usize>,
    pub alpha: Option<f64>,
    #[serde(rename = "T")]
    pub t: f64,
    pub grid: usize,
    pub out: PathBuf,
    pub format: Format,
    pub svg: bool,
    pub signal: Option<String>,
    pub target: Option<f64>,
    pub bound: BoundArg,
    #[serde(rename = "T0")]
    pub t0: f64,
    #[serde(rename = "Omega0")]
    pub omega0: f64,
    pub eps_t: f64,
    pub eps_omega: f64,
    pub c: Option<f64>,
    pub constant_scale: f64,
}

impl Params {
    /// Flags override the config file; unset keys take the experiment's defaults.
    pub fn resolve(args: Args) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let experiment = args
            .experiment
            .or(file.experiment)
            .ok_or_else(|| CliError::Config("no experiment given on the command line or in the config".into()))?;
        let n = args.n.or(file.n).unwrap_or_else(|| default_n(experiment));
        let (alpha_default, t_default, grid_default) = match experiment {
            Experiment::Example1 => (None, 1.0, 80),
            Experiment::Example2 => (Some(10.0), 1.0, 2001),
            Experiment::Example3 => (None, 1.0, 2001),
            Experiment::LemmaAudit => (None, 2.0, 64),
            Experiment::BoundAudit => (None, 2.0, 0),
            Experiment::Custom => (Some(1.0), 1.0, 2001),
            Experiment::MinN => (None, 2.0, 0),
        };
        let params = Params {
            experiment,
            n,
            alpha: args.alpha.or(file.alpha).or(alpha_default),
            t: args.t.or(file.t).unwrap_or(t_default),
            grid: args.grid.or(file.grid).unwrap_or(grid_default),
            out: args
                .out
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from("hermite-approx-out").join(experiment.name())),
            format: args.format.or(file.format).unwrap_or(Format::Csv),
            svg: args.svg || file.svg.unwrap_or(false),
            signal: args.signal.or(file.signal),
            target: args.target.or(file.target),
            bound: args.bound.or(file.bound).unwrap_or(BoundArg::Local),
            t0: args.t0.or(file.t0).unwrap_or(2.0),
            omega0: args.omega0.or(file.omega0).unwrap_or(2.0),
            eps_t: args.eps_t.or(file.eps_t).unwrap_or(0.0),
            eps_omega: args.eps_omega.or(file.eps_omega).unwrap_or(0.0),
            c: args.c.or(file.c),
            constant_scale: args.constant_scale.or(file.constant_scale).unwrap_or(1.0),
        };
        params.validate()?;
        Ok(params)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.n.is_empty() && self.experiment != Experiment::MinN {
            return bad("empty n list".into());
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return bad(format!("alpha = {a} must be positive"));
            }
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return bad(format!("T = {} must be positive", self.t));
        }
        if !(self.constant_scale > 0.0 && self.constant_scale.is_finite()) {
            return bad(format!("constant_scale = {} must be positive", self.constant_scale));
        }
        match self.experiment {
            Experiment::Custom if self.signal.is_none() => bad("custom needs --signal".into()),
            Experiment::MinN if self.target.is_none() => bad("min-n needs --target".into()),
            Experiment::Example1 | Experiment::LemmaAudit | Experiment::Example2 | Experiment::Example3
            | Experiment::Custom
                if self.grid < 2 =>
            {
                bad(format!("grid = {} must be at least 2", self.grid))
            }
            _ => Ok(()),
        }
    }

    /// The flat config that reproduces this run.
    pub fn to_file_config(&self) -> FileConfig {
        FileConfig {
            experiment: Some(self.experiment),
            n: Some(self.n.clone()),
            alpha: self.alpha,
            t: Some(self.t),
            grid: Some(self.grid),
            out: Some(self.out.clone()),
            format: Some(self.format),
            svg: Some(self.svg),
            signal: self.signal.clone(),
            target: self.target,
            bound: Some(self.bound),
            t0: Some(self.t0),
            omega0: Some(self.omega0),
            eps_t: Some(self.eps_t),
            eps_omega: Some(self.eps_omega),
            c: self.c,
            constant_scale: (self.constant_scale != 1.0).then_some(self.constant_scale),
        }
    }
}

fn default_n(experiment: Experiment) -> Vec<usize> {
    match experiment {
        Experiment::Example1 => vec![10, 25, 50, 75, 100],
        Experiment::Example2 => vec![40, 80],
        Experiment::Example3 => vec![20, 50],
        Experiment::LemmaAudit => (50..=500).step_by(50).collect(),
        Experiment::BoundAudit => vec![20, 40, 50, 80],
        Experiment::Custom => vec![40],
        Experiment::MinN => vec![],
    }
}
