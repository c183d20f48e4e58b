use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use serde::Deserialize;

use durrmeyer::harness::{HarnessOptions, NRange, SuiteSelector};
use durrmeyer::quadrature::Exponent;
use durrmeyer::spectrum::WeightConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyLemmas,
    VerifyDirect,
    VerifyConverse,
    VerifyProposition,
    Kfunc,
    Norms,
    ReportAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Run the spectral and inequality checks for weighted Bernstein-Durrmeyer
/// operators and write one CSV or JSON report.
#[derive(Debug, Parser)]
#[command(name = "durrmeyer", version)]
pub struct Cli {
    /// Which checks to run.
    #[arg(long, value_enum)]
    pub command: Option<Command>,
    /// Weight exponents alpha_1..alpha_{d+1}, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Option<Vec<f64>>,
    /// Dimension (1 = interval, 2 = triangle).
    #[arg(long)]
    pub d: Option<usize>,
    /// Norm exponents: 1, 2, inf or any decimal >= 1, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<String>>,
    #[arg(long)]
    pub n_start: Option<usize>,
    #[arg(long)]
    pub n_stop: Option<usize>,
    /// Double n instead of stepping by one.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub dyadic: Option<bool>,
    /// Function suite: full, random, eigen or kink.
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub tol_identity: Option<f64>,
    #[arg(long)]
    pub tol_quadrature: Option<f64>,
    /// Lower end `delta n` of the range in the n^2 nu bound.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Upper end `sqrt(b n)` of the range in the second-derivative bound.
    #[arg(long)]
    pub b: Option<f64>,
    /// JSON file with any of the fields above; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Same fields as the flags, all optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    command: Option<Command>,
    alpha: Option<Vec<f64>>,
    d: Option<usize>,
    p: Option<Vec<Exponent>>,
    n_start: Option<usize>,
    n_stop: Option<usize>,
    dyadic: Option<bool>,
    suite: Option<SuiteSelector>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    tol_identity: Option<f64>,
    tol_quadrature: Option<f64>,
    delta: Option<f64>,
    b: Option<f64>,
}

/// A problem with the configuration itself (exit status 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<E: std::error::Error> From<E> for ConfigError {
    fn from(e: E) -> Self {
        ConfigError(e.to_string())
    }
}

/// Fully resolved run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    /// `None` when neither `--alpha` nor `--d` was given.
    pub weight: Option<WeightConfig>,
    pub ps: Option<Vec<Exponent>>,
    pub n_range: Option<NRange>,
    pub suite: SuiteSelector,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub opts: HarnessOptions,
}

fn read_file(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}

impl RunConfig {
    pub fn resolve(cli: Cli) -> Result<Self, ConfigError> {
        let file = match &cli.config {
            Some(path) => read_file(path)?,
            None => FileConfig::default(),
        };
        let command = cli
            .command
            .or(file.command)
            .ok_or_else(|| ConfigError("no --command given".into()))?;
        let alpha = cli.alpha.or(file.alpha);
        let d = cli.d.or(file.d);
        let weight = match (alpha, d) {
            (None, None) => None,
            (None, Some(d)) => Some(WeightConfig::new(d, vec![0.0; d + 1])?),
            (Some(a), d) => {
                let d = d.unwrap_or(a.len().saturating_sub(1));
                Some(WeightConfig::new(d, a)?)
            }
        };
        let ps = match cli.p {
            Some(tokens) => Some(
                tokens
                    .iter()
                    .map(|t| Exponent::from_str(t))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            None => file.p,
        };
        if ps.as_ref().is_some_and(|v| v.is_empty()) {
            return Err(ConfigError("empty list of exponents".into()));
        }
        let start = cli.n_start.or(file.n_start);
        let stop = cli.n_stop.or(file.n_stop);
        let dyadic = cli.dyadic.or(file.dyadic).unwrap_or(false);
        let n_range = match (start, stop) {
            (None, None) => None,
            (s, t) => {
                let start = s.unwrap_or(1);
                let range = NRange {
                    start,
                    stop: t.unwrap_or(start),
                    dyadic,
                };
                range.values()?;
                Some(range)
            }
        };
        let suite = match cli.suite {
            Some(s) => s.parse()?,
            None => file.suite.unwrap_or(SuiteSelector::Full),
        };
        let mut opts = HarnessOptions::default();
        if let Some(seed) = cli.seed.or(file.seed) {
            opts.seed = seed;
        }
        if let Some(t) = cli.tol_identity.or(file.tol_identity) {
            opts.tol.identity = t;
        }
        if let Some(t) = cli.tol_quadrature.or(file.tol_quadrature) {
            opts.tol.quadrature = t;
        }
        if let Some(v) = cli.delta.or(file.delta) {
            opts.delta = v;
        }
        if let Some(v) = cli.b.or(file.b) {
            opts.b = v;
        }
        for (name, t) in [("tol-identity", opts.tol.identity), ("tol-quadrature", opts.tol.quadrature)] {
            if !(t.is_finite() && t >= 0.0) {
                return Err(ConfigError(format!("{name} must be a nonnegative number, got {t}")));
            }
        }
        if !(opts.delta > 0.0 && opts.delta <= 1.0) {
            return Err(ConfigError(format!("delta must satisfy 0 < delta <= 1, got {}", opts.delta)));
        }
        if !(opts.b > 0.0 && opts.b.is_finite()) {
            return Err(ConfigError(format!("b must be positive, got {}", opts.b)));
        }
        Ok(Self {
            command,
            weight,
            ps,
            n_range,
            suite,
            out: cli.out.or(file.out),
            format: cli.format.or(file.format).unwrap_or(Format::Csv),
            opts,
        })
    }
}
