//! Config-driven front end: `price`, `calibrate`, `alpha-paths` and `expect`.
//!
//! Exit codes: 0 ok, 2 validation, 3 numeric divergence, 4 non-convergence
//! (including infeasible calibrations and dilution-condition violations).

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::{Deserialize, Serialize};

use crate::alpha_path::{expected_monotone_functional, AlphaPathFamily, GeometricLiuSpec};
use crate::error::Error;
use crate::pricer::{self, calibrate, CalibrationResult};

pub use config::{Command, Functional, OutputFormat, Overrides, PathMethod, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_NONCONVERGENCE: i32 = 4;

/// Environment variable capping the worker threads used for alpha-path families.
pub const THREADS_ENV: &str = "UWARRANT_NUM_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "uwarrant",
    version,
    about = "Price dilution-adjusted equity warrants under uncertainty theory",
    after_help = "Rates (rate, drift, stock_vol, sigma) are annualized decimals; times (horizon, t_end) are in years.\n\
                  Exit codes: 0 ok, 2 validation, 3 numeric divergence, 4 non-convergence or infeasible calibration.\n\
                  UWARRANT_NUM_THREADS caps internal parallelism."
)]
pub struct Args {
    /// One of price, calibrate, alpha-paths, expect; overrides `command` in the config
    pub command: Option<String>,
    /// TOML run configuration
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Use V = N S in place of model.v_t
    #[arg(long)]
    pub approx_v: bool,
    /// Use sigma = sigma_s in place of model.sigma
    #[arg(long)]
    pub approx_sigma: bool,
    /// Write the record here instead of stdout
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = ["json", "csv"])]
    pub format: Option<String>,
    /// Calibration tolerance (relative)
    #[arg(long)]
    pub tol: Option<f64>,
    /// Calibration iteration cap
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Number of uniformly spaced alpha levels when paths.alphas is absent
    #[arg(long)]
    pub alpha_levels: Option<usize>,
    /// RK4 steps per alpha-path
    #[arg(long)]
    pub steps: Option<usize>,
}

impl Args {
    fn overrides(&self) -> Overrides {
        Overrides {
            command: self.command.clone(),
            approx_v: self.approx_v,
            approx_sigma: self.approx_sigma,
            out: self.out.clone(),
            format: self.format.clone(),
            tol: self.tol,
            max_iter: self.max_iter,
            alpha_levels: self.alpha_levels,
            steps: self.steps,
        }
    }
}

/// A failed run: exit code plus a message for stderr. A record may still be
/// emitted, e.g. the last iterate of a non-converged calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain { .. } => EXIT_VALIDATION,
            Error::Integration(_) | Error::Divergent { .. } => EXIT_DIVERGENCE,
            Error::NonConvergence { .. } | Error::Infeasible { .. } | Error::DilutionCondition { .. } => {
                EXIT_NONCONVERGENCE
            }
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Inputs echoed into every record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputsEcho {
    pub n_shares: Option<f64>,
    pub m_warrants: Option<f64>,
    pub k_ratio: Option<f64>,
    pub j_payment: Option<f64>,
    pub stock_price: f64,
    pub stock_vol: f64,
    pub rate: f64,
    pub horizon: f64,
    pub drift: f64,
    pub v_t: Option<f64>,
    pub sigma: Option<f64>,
}

impl InputsEcho {
    fn new(cfg: &RunConfig, state: Option<(f64, f64)>) -> Self {
        let cap = cfg.capital.as_ref();
        InputsEcho {
            n_shares: cap.map(|c| c.n_shares()),
            m_warrants: cap.map(|c| c.m_warrants()),
            k_ratio: cap.map(|c| c.k_ratio()),
            j_payment: cap.map(|c| c.j_payment()),
            stock_price: cfg.market.stock_price(),
            stock_vol: cfg.market.stock_vol(),
            rate: cfg.market.rate(),
            horizon: cfg.market.horizon(),
            drift: cfg.market.drift(),
            v_t: state.map(|s| s.0),
            sigma: state.map(|s| s.1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceRecord {
    pub command: String,
    pub status: String,
    pub f_w: f64,
    pub c: f64,
    pub alpha0: f64,
    pub discount: f64,
    pub dilution: f64,
    pub inputs: InputsEcho,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrateRecord {
    pub command: String,
    /// `ok`, `non-convergence`, `infeasible` or `dilution-condition`.
    pub status: String,
    pub message: Option<String>,
    pub stock_vol_form: String,
    /// On failure, the last iterate or boundary point.
    pub sigma_star: Option<f64>,
    pub v_star: Option<f64>,
    pub f_w: Option<f64>,
    pub beta: Option<f64>,
    pub residual_value: Option<f64>,
    pub residual_vol: Option<f64>,
    pub iterations: Option<usize>,
    pub scan_evaluations: Option<usize>,
    pub brackets: Vec<[f64; 2]>,
    pub multiple_roots: Option<bool>,
    pub inputs: InputsEcho,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectRecord {
    pub command: String,
    pub status: String,
    pub functional: String,
    pub t: f64,
    pub expected_value: f64,
    pub c: f64,
    pub inputs: InputsEcho,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRow {
    pub alpha: f64,
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathsRecord {
    pub command: String,
    pub status: String,
    pub method: String,
    pub rows: Vec<PathRow>,
}

/// Serialized output of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub body: String,
    pub failure: Option<Failure>,
}

fn render<T: Serialize>(record: &T, format: OutputFormat) -> Result<String, Failure> {
    match format {
        OutputFormat::Json => output::to_json(record),
        OutputFormat::Csv => output::to_csv_record(record),
    }
    .map_err(|e| Failure::validation(format!("output: {e}")))
}

fn firm_state(cfg: &RunConfig) -> Result<(f64, f64), Failure> {
    cfg.firm_state().map_err(Failure::validation)
}

/// Prices the warrant at the configured (or approximated) firm state.
pub fn run_price(cfg: &RunConfig) -> Result<Report, Failure> {
    let cap = cfg
        .capital
        .as_ref()
        .ok_or_else(|| Failure::validation("capital: missing table"))?;
    let (v, sigma) = firm_state(cfg)?;
    let q = pricer::quote_warrant(v, sigma, cap, &cfg.market, &cfg.quadrature)?;
    let record = PriceRecord {
        command: Command::Price.name().into(),
        status: "ok".into(),
        f_w: q.price,
        c: q.c,
        alpha0: q.alpha0,
        discount: q.discount,
        dilution: q.dilution,
        inputs: InputsEcho::new(cfg, Some((v, sigma))),
    };
    Ok(Report {
        body: render(&record, cfg.format)?,
        failure: None,
    })
}

/// Calibrates `(sigma*, V*)`. Non-convergence still yields a record carrying
/// the last iterate, alongside an exit-4 failure.
pub fn run_calibrate(cfg: &RunConfig) -> Result<Report, Failure> {
    let cap = cfg
        .capital
        .as_ref()
        .ok_or_else(|| Failure::validation("capital: missing table"))?;
    let settings = &cfg.calibration;
    let mut record = CalibrateRecord {
        command: Command::Calibrate.name().into(),
        status: "ok".into(),
        message: None,
        stock_vol_form: settings.form.bracket_name().into(),
        sigma_star: None,
        v_star: None,
        f_w: None,
        beta: None,
        residual_value: None,
        residual_vol: None,
        iterations: None,
        scan_evaluations: None,
        brackets: Vec::new(),
        multiple_roots: None,
        inputs: InputsEcho::new(cfg, None),
    };
    let failure = match calibrate(cap, &cfg.market, settings) {
        Ok(CalibrationResult {
            sigma_star,
            v_star,
            price,
            beta,
            residual_value,
            residual_vol,
            iterations,
            scan_evaluations,
            brackets,
            multiple_roots,
        }) => {
            record.sigma_star = Some(sigma_star);
            record.v_star = Some(v_star);
            record.f_w = Some(price);
            record.beta = Some(beta);
            record.residual_value = Some(residual_value);
            record.residual_vol = Some(residual_vol);
            record.iterations = Some(iterations);
            record.scan_evaluations = Some(scan_evaluations);
            record.brackets = brackets.into_iter().map(|(a, b)| [a, b]).collect();
            record.multiple_roots = Some(multiple_roots);
            None
        }
        Err(e) => {
            match &e {
                Error::NonConvergence {
                    iterations,
                    sigma,
                    v,
                    residual_value,
                    residual_vol,
                } => {
                    record.status = "non-convergence".into();
                    record.sigma_star = Some(*sigma);
                    record.v_star = Some(*v);
                    record.residual_value = Some(*residual_value);
                    record.residual_vol = Some(*residual_vol);
                    record.iterations = Some(*iterations);
                }
                Error::Infeasible { sigma_boundary, .. } => {
                    record.status = "infeasible".into();
                    record.sigma_star = Some(*sigma_boundary);
                }
                Error::DilutionCondition { sigma, v, .. } => {
                    record.status = "dilution-condition".into();
                    record.sigma_star = Some(*sigma);
                    record.v_star = Some(*v);
                }
                _ => return Err(e.into()),
            }
            record.message = Some(e.to_string());
            Some(Failure::from(e))
        }
    };
    Ok(Report {
        body: render(&record, cfg.format)?,
        failure,
    })
}

fn spec(cfg: &RunConfig) -> Result<GeometricLiuSpec, Failure> {
    let (v, sigma) = firm_state(cfg)?;
    Ok(GeometricLiuSpec::new(v, cfg.market.drift(), sigma)?)
}

/// Alpha-path family on `t_j = t_end j / time_points`, rows sorted by `(alpha, t)`.
pub fn run_alpha_paths(cfg: &RunConfig) -> Result<Report, Failure> {
    let spec = spec(cfg)?;
    let p = &cfg.paths;
    let times: Vec<f64> = (0..=p.time_points)
        .map(|j| p.t_end * j as f64 / p.time_points as f64)
        .collect();
    let mut rows = Vec::with_capacity(p.alphas.len() * times.len());
    match p.method {
        PathMethod::ClosedForm => {
            let family = AlphaPathFamily::geometric(&spec, &times, &p.alphas)?;
            for path in &family.paths {
                for (t, v) in path.times.iter().zip(&path.values) {
                    rows.push((path.alpha, *t, *v));
                }
            }
        }
        PathMethod::Rk4 => {
            let family = AlphaPathFamily::solve(&spec, spec.v0, p.t_end, &p.alphas, p.steps)?;
            let stride = p.steps / p.time_points;
            for path in &family.paths {
                for (j, t) in times.iter().enumerate() {
                    rows.push((path.alpha, *t, path.values[j * stride]));
                }
            }
        }
    }
    let body = match cfg.format {
        OutputFormat::Csv => output::paths_csv(&rows),
        OutputFormat::Json => render(
            &PathsRecord {
                command: Command::AlphaPaths.name().into(),
                status: "ok".into(),
                method: match p.method {
                    PathMethod::ClosedForm => "closed-form".into(),
                    PathMethod::Rk4 => "rk4".into(),
                },
                rows: rows
                    .iter()
                    .map(|&(alpha, t, value)| PathRow { alpha, t, value })
                    .collect(),
            },
            OutputFormat::Json,
        )?,
    };
    Ok(Report { body, failure: None })
}

/// `E[I(V_T)]` at `t = paths.t_end` for the configured functional.
pub fn run_expect(cfg: &RunConfig) -> Result<Report, Failure> {
    let spec = spec(cfg)?;
    let t = cfg.paths.t_end;
    let expected_value = match (cfg.functional, cfg.capital.as_ref()) {
        (Functional::Identity, _) => expected_monotone_functional(&spec, t, |x| x, &cfg.quadrature)?,
        (Functional::Payoff, Some(cap)) => {
            let (k, strike) = (cap.k_ratio(), cap.n_shares() * cap.j_payment());
            expected_monotone_functional(&spec, t, |x| (k * x - strike).max(0.0), &cfg.quadrature)?
        }
        (Functional::Payoff, None) => return Err(Failure::validation("capital: missing table")),
    };
    let record = ExpectRecord {
        command: Command::Expect.name().into(),
        status: "ok".into(),
        functional: match cfg.functional {
            Functional::Identity => "identity".into(),
            Functional::Payoff => "payoff".into(),
        },
        t,
        expected_value,
        c: spec.spread(t),
        inputs: InputsEcho::new(cfg, Some((spec.v0, spec.sigma))),
    };
    Ok(Report {
        body: render(&record, cfg.format)?,
        failure: None,
    })
}

/// Dispatches on `cfg.command`.
pub fn run(cfg: &RunConfig) -> Result<Report, Failure> {
    match cfg.command {
        Command::Price => run_price(cfg),
        Command::Calibrate => run_calibrate(cfg),
        Command::AlphaPaths => run_alpha_paths(cfg),
        Command::Expect => run_expect(cfg),
    }
}

fn load(path: &Path, overrides: &Overrides) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::validation(format!("config: cannot read {}: {e}", path.display())))?;
    RunConfig::from_toml(&text, overrides).map_err(Failure::validation)
}

fn thread_cap() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::validation(format!(
                "{THREADS_ENV}: expected a positive integer, got {s:?}"
            ))),
        },
        Err(e) => Err(Failure::validation(format!("{THREADS_ENV}: {e}"))),
    }
}

fn execute(args: &Args) -> Result<(), Failure> {
    let cfg = load(&args.config, &args.overrides())?;
    let report = match thread_cap()? {
        None => run(&cfg)?,
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::validation(format!("{THREADS_ENV}: {e}")))?
            .install(|| run(&cfg))?,
    };
    let written = match &cfg.out {
        Some(path) => fs::write(path, &report.body)
            .map_err(|e| format!("output: cannot write {}: {e}", path.display())),
        None => std::io::stdout()
            .lock()
            .write_all(report.body.as_bytes())
            .map_err(|e| format!("output: {e}")),
    };
    written.map_err(Failure::validation)?;
    report.failure.map_or(Ok(()), Err)
}

/// Parses `args` (program name first), runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(&args) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("uwarrant: {}", f.message);
            f.code
        }
    }
}
