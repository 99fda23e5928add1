//! Equity warrant valuation for firms whose value follows an uncertain
//! differential equation driven by a canonical Liu process.
//!
//! The crate is layered bottom-up:
//!
//! - [`uncertainty`]: normal uncertainty distributions, their inverses and
//!   expected values written as quantile integrals.
//! - [`quadrature`]: the adaptive Gauss-Kronrod integrator on the log-odds
//!   line that every expected value goes through.
//! - [`alpha_path`]: closed-form and numerically integrated alpha-paths,
//!   inverse distributions read off alpha-path families, and expectations of
//!   monotone functionals.
//! - [`pricer`]: warrant payoff, price, firm-value sensitivity, implied stock
//!   volatility, elasticity and the (sigma, V) calibration.
//! - [`cli`]: the config-driven front end used by the `uwarrant` binary.
//!
//! All rates are annualized decimals and times are in years.

pub mod alpha_path;
pub mod cli;
pub mod error;
pub mod pricer;
pub mod quadrature;
pub mod uncertainty;

pub use alpha_path::{
    expected_monotone_functional, gbm_alpha_path, inverse_distribution_at, solve_alpha_path,
    AlphaPath, AlphaPathFamily, AlphaPathSource, AlphaSlice, GeometricLiuSpec, NumericUde, Ude,
    UdeSpec,
};
pub use error::{Error, Result};
pub use pricer::{
    calibrate, dfw_dv, elasticity, implied_stock_vol, price_warrant, warrant_payoff,
    CalibrationResult, CalibrationSettings, FirmCapitalStructure, MarketObservables,
    StockVolForm, WarrantQuote,
};
pub use quadrature::{QuadratureBackend, QuadratureSettings};
pub use uncertainty::{
    expected_value_from_distribution, expected_value_from_quantile, inv_normal, inv_std_normal,
    normal_distribution, NormalUncertainVariable, Quantile, QuantileFunction,
};
