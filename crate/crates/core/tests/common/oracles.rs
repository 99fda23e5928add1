//! Independent reference values. Nothing here calls the library's numerics;
//! only its plain data accessors are read.

use std::f64::consts::PI;

use statrs::function::beta::{beta, beta_reg};
use uwarrant::{FirmCapitalStructure, MarketObservables};

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("oracle domain error: {0}")]
    Domain(String),
    #[error("oracle inapplicable: alpha0 = {alpha0:e} is not below {bound:e}")]
    Inapplicable { alpha0: f64, bound: f64 },
}

/// Main-path value against an oracle value.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub name: String,
    pub main_value: f64,
    pub oracle_value: f64,
    pub abs_err: f64,
    /// `abs_err / max(|oracle|, 1)`.
    pub rel_err: f64,
}

impl OracleReport {
    pub fn new(name: impl Into<String>, main_value: f64, oracle_value: f64) -> Self {
        let abs_err = (main_value - oracle_value).abs();
        OracleReport {
            name: name.into(),
            main_value,
            oracle_value,
            abs_err,
            rel_err: abs_err / oracle_value.abs().max(1.0),
        }
    }

    pub fn within(&self, rel: f64) -> bool {
        self.rel_err <= rel
    }
}

impl std::fmt::Display for OracleReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: main {:.15e}, oracle {:.15e}, rel err {:.2e}",
            self.name, self.main_value, self.oracle_value, self.rel_err
        )
    }
}

/// Midpoint rule for `int_0^1 q(alpha) d(alpha)` on `n` uniform cells.
pub fn brute_quantile_integral<Q: Fn(f64) -> f64>(q: Q, n: usize) -> f64 {
    assert!(n >= 1000, "brute_quantile_integral needs n >= 1000");
    let h = 1.0 / n as f64;
    let mut sum = 0.0;
    let mut carry = 0.0;
    for i in 0..n {
        // Kahan summation keeps 10^7 terms honest.
        let y = q((i as f64 + 0.5) * h) - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum * h
}

/// `pi c / sin(pi c) = int_0^1 (alpha / (1 - alpha))^c d(alpha)`.
pub fn beta_identity(c: f64) -> Result<f64, OracleError> {
    if !(c > 0.0 && c < 1.0) {
        return Err(OracleError::Domain(format!("c must lie in (0, 1), got {c}")));
    }
    Ok(PI * c / (PI * c).sin())
}

/// `e + sigma sqrt(3)/pi ln(alpha / (1 - alpha))`.
pub fn normal_quantile(e: f64, sigma: f64, alpha: f64) -> f64 {
    e + sigma * SQRT3 / PI * (alpha / (1.0 - alpha)).ln()
}

/// `1 / (1 + exp(pi (e - x) / (sqrt(3) sigma)))`.
pub fn normal_cdf(e: f64, sigma: f64, x: f64) -> f64 {
    1.0 / (1.0 + (PI * (e - x) / (SQRT3 * sigma)).exp())
}

/// `V0 exp(mu t + sigma t sqrt(3)/pi ln(alpha / (1 - alpha)))`.
pub fn geometric_path(v0: f64, mu: f64, sigma: f64, t: f64, alpha: f64) -> f64 {
    v0 * (mu * t + sigma * t * SQRT3 / PI * (alpha / (1.0 - alpha)).ln()).exp()
}

/// Pieces shared by the warrant oracles: `(A, NJ, c, alpha0, discount / (N + M k))`.
fn warrant_terms(v_t: f64, sigma: f64, cap: &FirmCapitalStructure, mkt: &MarketObservables) -> (f64, f64, f64, f64, f64) {
    let tau = mkt.horizon();
    let a = cap.k_ratio() * v_t * (mkt.drift() * tau).exp();
    let nj = cap.n_shares() * cap.j_payment();
    let c = sigma * tau * SQRT3 / PI;
    // Payoff is positive where (alpha / (1 - alpha))^c > NJ / A.
    let alpha0 = if c == 0.0 {
        if a > nj { 0.0 } else { 1.0 }
    } else {
        1.0 / (1.0 + (-(nj / a).ln() / c).exp())
    };
    let scale = (-mkt.rate() * tau).exp() / (cap.n_shares() + cap.m_warrants() * cap.k_ratio());
    (a, nj, c, alpha0, scale)
}

/// Level at which the warrant starts paying off.
pub fn exercise_level(v_t: f64, sigma: f64, cap: &FirmCapitalStructure, mkt: &MarketObservables) -> f64 {
    warrant_terms(v_t, sigma, cap, mkt).3
}

/// Closed form when the payoff is positive at every level down to `alpha0 < 1e-12`.
pub fn deep_itm_price(v_t: f64, sigma: f64, cap: &FirmCapitalStructure, mkt: &MarketObservables) -> Result<f64, OracleError> {
    let bound = 1e-12;
    let (a, nj, c, alpha0, scale) = warrant_terms(v_t, sigma, cap, mkt);
    if !(alpha0 < bound) {
        return Err(OracleError::Inapplicable { alpha0, bound });
    }
    let growth = if c == 0.0 { 1.0 } else { beta_identity(c)? };
    Ok(scale * (a * growth - nj))
}

/// The deep in-the-money formula with its precondition waived.
pub fn deep_itm_formula_unchecked(v_t: f64, sigma: f64, cap: &FirmCapitalStructure, mkt: &MarketObservables) -> Result<f64, OracleError> {
    let (a, nj, c, _, scale) = warrant_terms(v_t, sigma, cap, mkt);
    let growth = if c == 0.0 { 1.0 } else { beta_identity(c)? };
    Ok(scale * (a * growth - nj))
}

/// Exact price through the incomplete beta function:
/// `int_{alpha0}^1 (alpha / (1 - alpha))^c = B(1 + c, 1 - c) - B(alpha0; 1 + c, 1 - c)`.
pub fn incomplete_beta_price(v_t: f64, sigma: f64, cap: &FirmCapitalStructure, mkt: &MarketObservables) -> Result<f64, OracleError> {
    let (a, nj, c, alpha0, scale) = warrant_terms(v_t, sigma, cap, mkt);
    if c == 0.0 {
        return Ok(scale * (a - nj).max(0.0));
    }
    if c >= 1.0 {
        return Err(OracleError::Domain(format!("price is infinite for c = {c}")));
    }
    let (p, q) = (1.0 + c, 1.0 - c);
    let complete = beta(p, q);
    let upper = complete * (1.0 - beta_reg(p, q, alpha0));
    Ok(scale * (a * upper - nj * (1.0 - alpha0)))
}

/// Exact `d f_w / d V_t`: the boundary term vanishes, leaving
/// `scale k e^{mu tau} int_{alpha0}^1 (alpha / (1 - alpha))^c`.
pub fn incomplete_beta_slope(v_t: f64, sigma: f64, cap: &FirmCapitalStructure, mkt: &MarketObservables) -> Result<f64, OracleError> {
    let (a, _, c, alpha0, scale) = warrant_terms(v_t, sigma, cap, mkt);
    if c == 0.0 {
        return Ok(if alpha0 == 0.0 { scale * a / v_t } else { 0.0 });
    }
    if c >= 1.0 {
        return Err(OracleError::Domain(format!("slope is infinite for c = {c}")));
    }
    let (p, q) = (1.0 + c, 1.0 - c);
    Ok(scale * a / v_t * beta(p, q) * (1.0 - beta_reg(p, q, alpha0)))
}

/// Midpoint-rule price on `n` levels.
pub fn brute_price(v_t: f64, sigma: f64, cap: &FirmCapitalStructure, mkt: &MarketObservables, n: usize) -> f64 {
    let (a, nj, c, _, scale) = warrant_terms(v_t, sigma, cap, mkt);
    scale * brute_quantile_integral(|al| (a * (al / (1.0 - al)).powf(c) - nj).max(0.0), n)
}
