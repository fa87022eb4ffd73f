//! Command-line arguments, `--config` files and their validation.
//!
//! Every subcommand accepts `--config <path>` with a JSON object whose keys
//! mirror the long flag names (`"t-max"`, `"check-hypotheses"`, ...). Flags
//! given on the command line win.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "cfheat", version, about = "Caputo-Fabrizio time-fractional heat equation solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve D^a u - lambda u = f(t), u(0) = u0.
    Ivp(IvpArgs),
    /// Solve D^a u - u_xx = g(x, t) with one of four boundary conditions.
    Bvp(BvpArgs),
    /// Residual and hypothesis reports for a stored grid or a fresh solve.
    Verify(VerifyArgs),
    /// Basis pairing matrices (bi-orthogonality for the root system).
    Bases(BasesArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct IvpArgs {
    /// JSON file with any of these options; flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Fractional order in (0, 1].
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Coefficient lambda.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Forcing f(t), e.g. "t*exp(-t)".
    #[arg(long, allow_hyphen_values = true)]
    pub f: Option<String>,
    /// Initial value [default: 0].
    #[arg(long, allow_negative_numbers = true)]
    pub u0: Option<f64>,
    /// Horizon T [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    /// Number of time intervals; writes t-steps + 1 rows [default: 100].
    #[arg(long)]
    pub t_steps: Option<usize>,
    /// Output file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format [default: csv].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also run the Picard iteration of the Volterra form and report the largest deviation.
    #[arg(long)]
    pub oracle: bool,
    /// Grid steps for --oracle [default: 2048].
    #[arg(long)]
    pub oracle_steps: Option<usize>,
    /// Plain IEEE evaluation of the forcing instead of failing on domain errors.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct BvpArgs {
    /// JSON file with any of these options; flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// 1 Dirichlet, 2 Neumann, 3 periodic, 4 non-local.
    #[arg(long)]
    pub problem: Option<u32>,
    /// Fractional order in (0, 1).
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Forcing g(x, t), e.g. "t*sin(pi*x)".
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<String>,
    /// Horizon T [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    /// Highest wavenumber kept [default: 32].
    #[arg(long)]
    pub modes: Option<u32>,
    /// Number of x intervals [default: 32].
    #[arg(long)]
    pub x_steps: Option<usize>,
    /// Number of t intervals [default: 32].
    #[arg(long)]
    pub t_steps: Option<usize>,
    /// Output file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format [default: csv].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Exit with status 2 if the forcing violates the existence hypotheses.
    #[arg(long)]
    pub check_hypotheses: bool,
    /// Attach the PDE residual on the output grid.
    #[arg(long)]
    pub residual: bool,
    /// Plain IEEE evaluation of the forcing instead of failing on domain errors.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct VerifyArgs {
    /// JSON solution written by `bvp --format json`; otherwise the problem is solved from the flags below.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solve: BvpArgs,
}

#[derive(Debug, Default, Clone, Args, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct BasesArgs {
    /// JSON file with any of these options; flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// sine, cosine, periodic, rootsystem or adjoint.
    #[arg(long)]
    pub family: Option<String>,
    /// Highest wavenumber [default: 4].
    #[arg(long)]
    pub k_max: Option<u32>,
    /// Report file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the matrix as CSV.
    #[arg(long)]
    pub matrix_out: Option<PathBuf>,
}

fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else { return Ok(T::default()) };
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Collects every problem before reporting, so one run shows them all.
#[derive(Default)]
struct Problems(Vec<String>);

impl Problems {
    fn require<T: Copy>(&mut self, v: Option<T>, name: &str) -> Option<T> {
        if v.is_none() {
            self.0.push(format!("--{name} is required"));
        }
        v
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.0.push(msg());
        }
    }

    fn finish(self) -> Result<(), CliError> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(format!("invalid configuration:\n  - {}", self.0.join("\n  - "))))
        }
    }
}

pub struct IvpConfig {
    pub alpha: f64,
    pub lambda: f64,
    pub f: String,
    pub u0: f64,
    pub t_max: f64,
    pub t_steps: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub oracle: bool,
    pub oracle_steps: usize,
    pub lenient: bool,
}

impl IvpArgs {
    pub fn resolve(self) -> Result<IvpConfig, CliError> {
        let file: IvpArgs = load(self.config.as_deref())?;
        let mut p = Problems::default();
        let alpha = p.require(self.alpha.or(file.alpha), "alpha");
        let lambda = p.require(self.lambda.or(file.lambda), "lambda");
        let f = self.f.or(file.f);
        p.check(f.is_some(), || "--f is required".into());
        let u0 = self.u0.or(file.u0).unwrap_or(0.0);
        let t_max = self.t_max.or(file.t_max).unwrap_or(1.0);
        let t_steps = self.t_steps.or(file.t_steps).unwrap_or(100);
        let oracle_steps = self.oracle_steps.or(file.oracle_steps).unwrap_or(2048);
        if let Some(a) = alpha {
            p.check(a > 0.0 && a <= 1.0, || format!("--alpha must lie in (0, 1], got {a}"));
        }
        if let Some(l) = lambda {
            p.check(l.is_finite(), || format!("--lambda must be finite, got {l}"));
        }
        p.check(u0.is_finite(), || format!("--u0 must be finite, got {u0}"));
        p.check(t_max.is_finite() && t_max > 0.0, || format!("--t-max must be positive, got {t_max}"));
        p.check(t_steps >= 1, || "--t-steps must be at least 1".into());
        p.check(oracle_steps >= 2, || "--oracle-steps must be at least 2".into());
        p.finish()?;
        Ok(IvpConfig {
            alpha: alpha.unwrap(),
            lambda: lambda.unwrap(),
            f: f.unwrap(),
            u0,
            t_max,
            t_steps,
            out: self.out.or(file.out),
            format: self.format.or(file.format).unwrap_or_default(),
            oracle: self.oracle || file.oracle,
            oracle_steps,
            lenient: self.lenient || file.lenient,
        })
    }
}

pub struct BvpConfig {
    pub problem: u32,
    pub alpha: f64,
    pub g: String,
    pub t_max: f64,
    pub modes: u32,
    pub x_steps: usize,
    pub t_steps: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub check_hypotheses: bool,
    pub residual: bool,
    pub lenient: bool,
}

impl BvpArgs {
    pub fn resolve(self) -> Result<BvpConfig, CliError> {
        let file: BvpArgs = load(self.config.as_deref())?;
        self.merge(file).validate()
    }

    fn merge(self, file: BvpArgs) -> BvpArgs {
        BvpArgs {
            config: None,
            problem: self.problem.or(file.problem),
            alpha: self.alpha.or(file.alpha),
            g: self.g.or(file.g),
            t_max: self.t_max.or(file.t_max),
            modes: self.modes.or(file.modes),
            x_steps: self.x_steps.or(file.x_steps),
            t_steps: self.t_steps.or(file.t_steps),
            out: self.out.or(file.out),
            format: self.format.or(file.format),
            check_hypotheses: self.check_hypotheses || file.check_hypotheses,
            residual: self.residual || file.residual,
            lenient: self.lenient || file.lenient,
        }
    }

    fn validate(self) -> Result<BvpConfig, CliError> {
        let mut p = Problems::default();
        let problem = p.require(self.problem, "problem");
        let alpha = p.require(self.alpha, "alpha");
        p.check(self.g.is_some(), || "--g is required".into());
        let t_max = self.t_max.unwrap_or(1.0);
        let modes = self.modes.unwrap_or(32);
        let x_steps = self.x_steps.unwrap_or(32);
        let t_steps = self.t_steps.unwrap_or(32);
        if let Some(n) = problem {
            p.check((1..=4).contains(&n), || format!("--problem must be 1, 2, 3 or 4, got {n}"));
        }
        if let Some(a) = alpha {
            p.check(a > 0.0 && a < 1.0, || format!("--alpha must lie in (0, 1), got {a}"));
        }
        p.check(t_max.is_finite() && t_max > 0.0, || format!("--t-max must be positive, got {t_max}"));
        p.check(modes >= 1, || "--modes must be at least 1".into());
        p.check(x_steps >= 2, || "--x-steps must be at least 2".into());
        p.check(t_steps >= 1, || "--t-steps must be at least 1".into());
        p.finish()?;
        Ok(BvpConfig {
            problem: problem.unwrap(),
            alpha: alpha.unwrap(),
            g: self.g.unwrap(),
            t_max,
            modes,
            x_steps,
            t_steps,
            out: self.out,
            format: self.format.unwrap_or_default(),
            check_hypotheses: self.check_hypotheses,
            residual: self.residual,
            lenient: self.lenient,
        })
    }
}

pub enum VerifySource {
    File(PathBuf),
    Solve(BvpConfig),
}

pub struct VerifyConfig {
    pub source: VerifySource,
    pub out: Option<PathBuf>,
}

impl VerifyArgs {
    pub fn resolve(self) -> Result<VerifyConfig, CliError> {
        let file: VerifyArgs = load(self.solve.config.as_deref())?;
        let input = self.input.or(file.input);
        let merged = self.solve.merge(file.solve);
        match input {
            Some(path) => Ok(VerifyConfig { source: VerifySource::File(path), out: merged.out }),
            None => {
                let out = merged.out.clone();
                Ok(VerifyConfig { source: VerifySource::Solve(merged.validate()?), out })
            }
        }
    }
}

pub struct BasesConfig {
    pub family: cfheat::BasisFamily,
    pub k_max: u32,
    pub out: Option<PathBuf>,
    pub matrix_out: Option<PathBuf>,
}

impl BasesArgs {
    pub fn resolve(self) -> Result<BasesConfig, CliError> {
        let file: BasesArgs = load(self.config.as_deref())?;
        let mut p = Problems::default();
        let name = self.family.or(file.family);
        let family = name.as_deref().and_then(cfheat::BasisFamily::from_name);
        match &name {
            None => p.check(false, || "--family is required".into()),
            Some(n) => p.check(family.is_some(), || {
                format!("--family must be one of sine, cosine, periodic, rootsystem, adjoint; got {n:?}")
            }),
        }
        let k_max = self.k_max.or(file.k_max).unwrap_or(4);
        p.check(k_max >= 1, || "--k-max must be at least 1".into());
        p.finish()?;
        Ok(BasesConfig {
            family: family.unwrap(),
            k_max,
            out: self.out.or(file.out),
            matrix_out: self.matrix_out.or(file.matrix_out),
        })
    }
}
