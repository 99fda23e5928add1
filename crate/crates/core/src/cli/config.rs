//! Run configuration: a TOML document with `capital`, `market`, `model`,
//! `numerics`, `paths` and `output` tables, overridable from the command line.

use std::path::PathBuf;

use serde::Deserialize;

use crate::alpha_path::{DEFAULT_ALPHA_LEVELS, DEFAULT_STEPS};
use crate::error::Error;
use crate::pricer::{CalibrationSettings, FirmCapitalStructure, MarketObservables, StockVolForm};
use crate::quadrature::QuadratureSettings;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Price,
    Calibrate,
    AlphaPaths,
    Expect,
}

impl Command {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "price" => Ok(Command::Price),
            "calibrate" => Ok(Command::Calibrate),
            "alpha-paths" => Ok(Command::AlphaPaths),
            "expect" => Ok(Command::Expect),
            other => Err(format!(
                "command: unknown value {other:?} (expected price, calibrate, alpha-paths or expect)"
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Command::Price => "price",
            Command::Calibrate => "calibrate",
            Command::AlphaPaths => "alpha-paths",
            Command::Expect => "expect",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(format!("output.format: unknown value {other:?} (expected json or csv)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathMethod {
    ClosedForm,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    /// `E[V_T]`.
    Identity,
    /// `E[(k V_T - N J)^+]`, undiscounted and undiluted.
    Payoff,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Option<String>,
    capital: Option<RawCapital>,
    market: Option<RawMarket>,
    #[serde(default)]
    model: RawModel,
    #[serde(default)]
    numerics: RawNumerics,
    #[serde(default)]
    paths: RawPaths,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCapital {
    n_shares: f64,
    m_warrants: f64,
    k_ratio: f64,
    j_payment: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMarket {
    stock_price: f64,
    stock_vol: f64,
    rate: f64,
    horizon: f64,
    drift: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    v_t: Option<f64>,
    sigma: Option<f64>,
    #[serde(default)]
    approx_v: bool,
    #[serde(default)]
    approx_sigma: bool,
    functional: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNumerics {
    abs_tol: Option<f64>,
    rel_tol: Option<f64>,
    max_nodes: Option<usize>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    scan_points: Option<usize>,
    alpha_levels: Option<usize>,
    steps: Option<usize>,
    stock_vol_form: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPaths {
    alphas: Option<Vec<f64>>,
    t_end: Option<f64>,
    time_points: Option<usize>,
    method: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<PathBuf>,
    format: Option<String>,
}

/// Command-line values that override the config document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub command: Option<String>,
    pub approx_v: bool,
    pub approx_sigma: bool,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub alpha_levels: Option<usize>,
    pub steps: Option<usize>,
}

/// Explicit or approximated `(V_t, sigma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelChoice {
    pub v_t: Option<f64>,
    pub sigma: Option<f64>,
    pub approx_v: bool,
    pub approx_sigma: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathsConfig {
    pub alphas: Vec<f64>,
    pub t_end: f64,
    pub time_points: usize,
    pub method: PathMethod,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub capital: Option<FirmCapitalStructure>,
    pub market: MarketObservables,
    pub model: ModelChoice,
    pub functional: Functional,
    pub quadrature: QuadratureSettings,
    pub calibration: CalibrationSettings,
    pub paths: PathsConfig,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

fn field_error(e: Error) -> String {
    e.to_string().trim_start_matches("domain error: ").to_string()
}

impl RunConfig {
    /// Parses and validates a config document, applying `overrides`.
    pub fn from_toml(text: &str, overrides: &Overrides) -> Result<Self, String> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| format!("config: {}", e.to_string().trim_end()))?;

        let command_name = overrides
            .command
            .clone()
            .or(raw.command)
            .ok_or("command: missing (set `command` in the config or pass it as an argument)")?;
        let command = Command::parse(&command_name)?;

        let capital = raw
            .capital
            .map(|c| FirmCapitalStructure::new(c.n_shares, c.m_warrants, c.k_ratio, c.j_payment))
            .transpose()
            .map_err(field_error)?;
        if capital.is_none() && matches!(command, Command::Price | Command::Calibrate) {
            return Err("capital: missing table".into());
        }
        let m = raw.market.ok_or("market: missing table")?;
        let market = MarketObservables::new(m.stock_price, m.stock_vol, m.rate, m.horizon, m.drift)
            .map_err(field_error)?;

        let model = ModelChoice {
            v_t: raw.model.v_t,
            sigma: raw.model.sigma,
            approx_v: raw.model.approx_v || overrides.approx_v,
            approx_sigma: raw.model.approx_sigma || overrides.approx_sigma,
        };
        if let Some(v) = model.v_t {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("model.v_t: must be positive, got {v}"));
            }
        }
        if let Some(s) = model.sigma {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(format!("model.sigma: must be nonnegative, got {s}"));
            }
        }
        let functional = match raw.model.functional.as_deref() {
            None | Some("identity") => Functional::Identity,
            Some("payoff") => Functional::Payoff,
            Some(other) => {
                return Err(format!(
                    "model.functional: unknown value {other:?} (expected identity or payoff)"
                ))
            }
        };
        if functional == Functional::Payoff && capital.is_none() {
            return Err("capital: missing table (needed by model.functional = \"payoff\")".into());
        }

        let n = raw.numerics;
        let defaults = QuadratureSettings::default();
        let quadrature = QuadratureSettings {
            abs_tol: n.abs_tol.unwrap_or(defaults.abs_tol),
            rel_tol: n.rel_tol.unwrap_or(defaults.rel_tol),
            max_nodes: n.max_nodes.unwrap_or(defaults.max_nodes),
            ..defaults
        };
        quadrature.validate().map_err(field_error)?;
        let form = match n.stock_vol_form.as_deref() {
            None | Some("dilution-consistent") => StockVolForm::DilutionConsistent,
            Some("as-printed") => StockVolForm::AsPrinted,
            Some(other) => {
                return Err(format!(
                    "numerics.stock_vol_form: unknown value {other:?} \
                     (expected dilution-consistent or as-printed)"
                ))
            }
        };
        let cal_defaults = CalibrationSettings::default();
        let calibration = CalibrationSettings {
            tol: overrides.tol.or(n.tol).unwrap_or(cal_defaults.tol),
            max_iter: overrides.max_iter.or(n.max_iter).unwrap_or(cal_defaults.max_iter),
            scan_points: n.scan_points.unwrap_or(cal_defaults.scan_points),
            form,
            quadrature: QuadratureSettings {
                max_nodes: quadrature.max_nodes,
                ..cal_defaults.quadrature
            },
        };
        if !(calibration.tol > 0.0 && calibration.tol < 1.0) {
            return Err(format!("numerics.tol: must lie in (0, 1), got {}", calibration.tol));
        }
        if calibration.max_iter == 0 {
            return Err("numerics.max_iter: must be at least 1".into());
        }
        if calibration.scan_points < 2 {
            return Err("numerics.scan_points: must be at least 2".into());
        }

        let alpha_levels = overrides
            .alpha_levels
            .or(n.alpha_levels)
            .unwrap_or(DEFAULT_ALPHA_LEVELS);
        if alpha_levels == 0 {
            return Err("numerics.alpha_levels: must be at least 1".into());
        }
        let steps = overrides.steps.or(n.steps).unwrap_or(DEFAULT_STEPS);
        if steps == 0 {
            return Err("numerics.steps: must be at least 1".into());
        }
        let p = raw.paths;
        let mut alphas = p
            .alphas
            .unwrap_or_else(|| crate::alpha_path::uniform_levels(alpha_levels));
        if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(format!("paths.alphas: every level must lie in (0, 1), got {a}"));
        }
        if alphas.is_empty() {
            return Err("paths.alphas: must not be empty".into());
        }
        alphas.sort_by(f64::total_cmp);
        alphas.dedup();
        let t_end = p.t_end.unwrap_or(market.horizon());
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(format!("paths.t_end: must be positive, got {t_end}"));
        }
        let time_points = p.time_points.unwrap_or(10);
        if time_points == 0 {
            return Err("paths.time_points: must be at least 1".into());
        }
        let method = match p.method.as_deref() {
            None | Some("closed-form") => PathMethod::ClosedForm,
            Some("rk4") => PathMethod::Rk4,
            Some(other) => {
                return Err(format!(
                    "paths.method: unknown value {other:?} (expected closed-form or rk4)"
                ))
            }
        };
        if method == PathMethod::Rk4 && !steps.is_multiple_of(time_points) {
            return Err(format!(
                "numerics.steps: {steps} must be a multiple of paths.time_points ({time_points}) for rk4 paths"
            ));
        }

        let format = match overrides.format.clone().or(raw.output.format) {
            Some(f) => OutputFormat::parse(&f)?,
            None if command == Command::AlphaPaths => OutputFormat::Csv,
            None => OutputFormat::Json,
        };

        Ok(RunConfig {
            command,
            capital,
            market,
            model,
            functional,
            quadrature,
            calibration,
            paths: PathsConfig {
                alphas,
                t_end,
                time_points,
                method,
                steps,
            },
            out: overrides.out.clone().or(raw.output.path),
            format,
        })
    }

    /// Firm value and volatility to price at, honoring the approximation flags.
    pub fn firm_state(&self) -> Result<(f64, f64), String> {
        let v = match (self.model.v_t, self.model.approx_v, &self.capital) {
            (_, true, Some(cap)) => cap.n_shares() * self.market.stock_price(),
            (_, true, None) => return Err("capital: missing table (needed by --approx-v)".into()),
            (Some(v), false, _) => v,
            (None, false, _) => {
                return Err("model.v_t: missing (set it or pass --approx-v for V = N S)".into())
            }
        };
        let sigma = match (self.model.sigma, self.model.approx_sigma) {
            (_, true) => self.market.stock_vol(),
            (Some(s), false) => s,
            (None, false) => {
                return Err("model.sigma: missing (set it or pass --approx-sigma for sigma = sigma_s)".into())
            }
        };
        Ok((v, sigma))
    }
}
