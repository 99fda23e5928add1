//! Dilution-adjusted equity warrant valuation.
//!
//! A firm financed by `N` shares and `M` warrants, each warrant buying `k`
//! new shares for `J` at maturity, pays each warrant holder
//! `(k V_T - N J)^+ / (N + M k)`. With firm value following the geometric
//! Liu process, the time-`t` price is the discounted level integral
//!
//! ```text
//! f_w = e^{-r tau} / (N + M k) * int_0^1 [k V_t e^{mu tau} (a / (1 - a))^c - N J]^+ da
//! ```
//!
//! with `tau = T - t` and `c = sigma tau sqrt(3) / pi`. The integral is taken on
//! the log-odds line from the exercise boundary `u_0 = ln(N J / (k V_t e^{mu tau})) / c`
//! upward, so the payoff kink never sits inside a quadrature panel.

mod calibrate;

pub use calibrate::{
    calibrate, solve_value_equation, CalibrationResult, CalibrationSettings,
};

use crate::alpha_path::DIVERGENCE_THRESHOLD;
use crate::error::{Error, Result};
use crate::quadrature::{self, QuadratureSettings};
use crate::uncertainty::SQRT3_OVER_PI;

/// Capital structure: `N` shares, `M` warrants, `k` shares per warrant, payment `J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirmCapitalStructure {
    n_shares: f64,
    m_warrants: f64,
    k_ratio: f64,
    j_payment: f64,
}

impl FirmCapitalStructure {
    pub fn new(n_shares: f64, m_warrants: f64, k_ratio: f64, j_payment: f64) -> Result<Self> {
        if !(n_shares > 0.0 && n_shares.is_finite()) {
            return Err(Error::domain("capital.n_shares", format!("must be positive, got {n_shares}")));
        }
        if !(m_warrants >= 0.0 && m_warrants.is_finite()) {
            return Err(Error::domain(
                "capital.m_warrants",
                format!("must be nonnegative, got {m_warrants}"),
            ));
        }
        if !(k_ratio > 0.0 && k_ratio.is_finite()) {
            return Err(Error::domain("capital.k_ratio", format!("must be positive, got {k_ratio}")));
        }
        if !(j_payment >= 0.0 && j_payment.is_finite()) {
            return Err(Error::domain(
                "capital.j_payment",
                format!("must be nonnegative, got {j_payment}"),
            ));
        }
        Ok(FirmCapitalStructure {
            n_shares,
            m_warrants,
            k_ratio,
            j_payment,
        })
    }

    pub fn n_shares(&self) -> f64 {
        self.n_shares
    }

    pub fn m_warrants(&self) -> f64 {
        self.m_warrants
    }

    pub fn k_ratio(&self) -> f64 {
        self.k_ratio
    }

    pub fn j_payment(&self) -> f64 {
        self.j_payment
    }

    /// `1 / (N + M k)`.
    pub fn dilution(&self) -> f64 {
        1.0 / (self.n_shares + self.m_warrants * self.k_ratio)
    }

    /// Total exercise payment `N J` the firm value must exceed (per unit of `k`).
    fn strike(&self) -> f64 {
        self.n_shares * self.j_payment
    }
}

/// Observable market state. `horizon` is `T - t` in years; rates are annualized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketObservables {
    stock_price: f64,
    stock_vol: f64,
    rate: f64,
    horizon: f64,
    drift: f64,
}

impl MarketObservables {
    pub fn new(stock_price: f64, stock_vol: f64, rate: f64, horizon: f64, drift: f64) -> Result<Self> {
        if !(stock_price > 0.0 && stock_price.is_finite()) {
            return Err(Error::domain(
                "market.stock_price",
                format!("must be positive, got {stock_price}"),
            ));
        }
        if !(stock_vol > 0.0 && stock_vol.is_finite()) {
            return Err(Error::domain("market.stock_vol", format!("must be positive, got {stock_vol}")));
        }
        if !rate.is_finite() {
            return Err(Error::domain("market.rate", format!("must be finite, got {rate}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::domain("market.horizon", format!("must be positive, got {horizon}")));
        }
        if !drift.is_finite() {
            return Err(Error::domain("market.drift", format!("must be finite, got {drift}")));
        }
        Ok(MarketObservables {
            stock_price,
            stock_vol,
            rate,
            horizon,
            drift,
        })
    }

    pub fn stock_price(&self) -> f64 {
        self.stock_price
    }

    pub fn stock_vol(&self) -> f64 {
        self.stock_vol
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    /// Copy with a different stock volatility.
    pub fn with_stock_vol(&self, stock_vol: f64) -> Result<Self> {
        Self::new(self.stock_price, stock_vol, self.rate, self.horizon, self.drift)
    }

    /// Copy with a different rate.
    pub fn with_rate(&self, rate: f64) -> Result<Self> {
        Self::new(self.stock_price, self.stock_vol, rate, self.horizon, self.drift)
    }

    pub fn discount(&self) -> f64 {
        (-self.rate * self.horizon).exp()
    }
}

/// Which sensitivity bracket converts firm volatility into stock volatility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StockVolForm {
    /// `sigma_s = (sigma V / S) (1 - M df/dV) / N`, the derivative of
    /// `S = (V - M f_w) / N`.
    #[default]
    DilutionConsistent,
    /// `sigma_s = (sigma V / S) (1 / N - M df/dV)`, the bracket exactly as
    /// commonly printed for this model.
    AsPrinted,
}

impl StockVolForm {
    /// `dS/dV` for the chosen form.
    pub fn bracket(self, cap: &FirmCapitalStructure, dfw_dv: f64) -> f64 {
        match self {
            StockVolForm::DilutionConsistent => (1.0 - cap.m_warrants * dfw_dv) / cap.n_shares,
            StockVolForm::AsPrinted => 1.0 / cap.n_shares - cap.m_warrants * dfw_dv,
        }
    }

    pub fn bracket_name(self) -> &'static str {
        match self {
            StockVolForm::DilutionConsistent => "(1 - M dfw/dV) / N",
            StockVolForm::AsPrinted => "1/N - M dfw/dV",
        }
    }
}

/// Price together with the quantities that determine it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarrantQuote {
    pub price: f64,
    /// `sigma tau sqrt(3) / pi`.
    pub c: f64,
    /// Lowest level at which the warrant finishes in the money.
    pub alpha0: f64,
    /// `e^{-r tau}`.
    pub discount: f64,
    /// `1 / (N + M k)`.
    pub dilution: f64,
}

/// Undiscounted per-warrant payoff `(k v_T - N J)^+ / (N + M k)`.
pub fn warrant_payoff(v_terminal: f64, cap: &FirmCapitalStructure) -> f64 {
    (cap.k_ratio * v_terminal - cap.strike()).max(0.0) * cap.dilution()
}

/// Everything the level integrals need, in log-odds form.
struct Kernel {
    /// `k V_t e^{mu tau}`, the firm's forward claim at the median level.
    forward: f64,
    strike: f64,
    c: f64,
    discount: f64,
    dilution: f64,
}

impl Kernel {
    fn new(v_t: f64, sigma: f64, cap: &FirmCapitalStructure, mkt: &MarketObservables) -> Result<Self> {
        if !(v_t > 0.0 && v_t.is_finite()) {
            return Err(Error::domain("v_t", format!("must be positive and finite, got {v_t}")));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::domain("sigma", format!("must be nonnegative and finite, got {sigma}")));
        }
        let c = sigma * mkt.horizon * SQRT3_OVER_PI;
        if c >= DIVERGENCE_THRESHOLD {
            return Err(Error::Divergent {
                c,
                detail: "warrant price integral is infinite for c >= 1".into(),
            });
        }
        Ok(Kernel {
            forward: cap.k_ratio * v_t * (mkt.drift * mkt.horizon).exp(),
            strike: cap.strike(),
            c,
            discount: mkt.discount(),
            dilution: cap.dilution(),
        })
    }

    /// Exercise boundary in log-odds, `None` when every level is in the money.
    fn boundary(&self) -> Option<f64> {
        if self.strike == 0.0 {
            None
        } else {
            Some((self.strike / self.forward).ln() / self.c)
        }
    }

    fn alpha0(&self) -> f64 {
        if self.c == 0.0 {
            return if self.forward > self.strike { 0.0 } else { 1.0 };
        }
        self.boundary().map_or(0.0, quadrature::logistic)
    }

    /// True when the integrand at the boundary is already below the smallest
    /// normal double, so the whole integral is zero in floating point.
    fn vanishes(&self, u0: f64) -> bool {
        u0 > 0.0 && self.forward.ln() + self.c * u0 + quadrature::ln_logistic_weight(u0) < -740.0
    }

    /// `int [forward e^{c u} - strike]^+ w(u) du`.
    fn payoff_integral(&self, settings: &QuadratureSettings) -> Result<f64> {
        if self.c == 0.0 {
            return Ok((self.forward - self.strike).max(0.0));
        }
        let lo = self.boundary().unwrap_or(f64::NEG_INFINITY);
        if lo.is_finite() && self.vanishes(lo) {
            return Ok(0.0);
        }
        let ln_forward = self.forward.ln();
        let (c, strike) = (self.c, self.strike);
        let v = quadrature::integrate(
            |u| {
                let ln_w = quadrature::ln_logistic_weight(u);
                (ln_forward + c * u + ln_w).exp() - strike * ln_w.exp()
            },
            lo,
            f64::INFINITY,
            settings,
        )
        .map_err(|e| with_c(e, c))?;
        Ok(v.max(0.0))
    }

    /// `int_{u_0}^inf e^{c u} w(u) du`, the level integral of `d payoff / d forward`.
    fn delta_integral(&self, settings: &QuadratureSettings) -> Result<f64> {
        if self.c == 0.0 {
            return Ok(if self.forward > self.strike { 1.0 } else { 0.0 });
        }
        let lo = self.boundary().unwrap_or(f64::NEG_INFINITY);
        if lo.is_finite() && self.vanishes(lo) {
            return Ok(0.0);
        }
        let c = self.c;
        quadrature::integrate(
            |u| (c * u + quadrature::ln_logistic_weight(u)).exp(),
            lo,
            f64::INFINITY,
            settings,
        )
        .map_err(|e| with_c(e, c))
    }
}

fn with_c(e: Error, c: f64) -> Error {
    match e {
        Error::Divergent { detail, .. } => Error::Divergent { c, detail },
        other => other,
    }
}

/// Price plus boundary diagnostics.
pub fn quote_warrant(
    v_t: f64,
    sigma: f64,
    cap: &FirmCapitalStructure,
    mkt: &MarketObservables,
    settings: &QuadratureSettings,
) -> Result<WarrantQuote> {
    let kernel = Kernel::new(v_t, sigma, cap, mkt)?;
    let integral = kernel.payoff_integral(settings)?;
    Ok(WarrantQuote {
        price: kernel.discount * kernel.dilution * integral,
        c: kernel.c,
        alpha0: kernel.alpha0(),
        discount: kernel.discount,
        dilution: kernel.dilution,
    })
}

/// Warrant price `f_w` at firm value `v_t` and firm volatility `sigma`.
pub fn price_warrant(
    v_t: f64,
    sigma: f64,
    cap: &FirmCapitalStructure,
    mkt: &MarketObservables,
    settings: &QuadratureSettings,
) -> Result<f64> {
    quote_warrant(v_t, sigma, cap, mkt, settings).map(|q| q.price)
}

/// `d f_w / d V_t`, by differentiating under the level integral.
pub fn dfw_dv(
    v_t: f64,
    sigma: f64,
    cap: &FirmCapitalStructure,
    mkt: &MarketObservables,
    settings: &QuadratureSettings,
) -> Result<f64> {
    let kernel = Kernel::new(v_t, sigma, cap, mkt)?;
    let growth = cap.k_ratio * (mkt.drift * mkt.horizon).exp();
    Ok(kernel.discount * kernel.dilution * growth * kernel.delta_integral(settings)?)
}

/// Stock volatility implied by firm volatility `sigma` at firm value `v_t`.
pub fn implied_stock_vol(
    v_t: f64,
    sigma: f64,
    cap: &FirmCapitalStructure,
    mkt: &MarketObservables,
    form: StockVolForm,
    settings: &QuadratureSettings,
) -> Result<f64> {
    let delta = dfw_dv(v_t, sigma, cap, mkt, settings)?;
    Ok(sigma * v_t / mkt.stock_price * form.bracket(cap, delta))
}

/// Elasticity `beta = sigma_s / sigma` of the stock with respect to firm value.
pub fn elasticity(
    v_t: f64,
    sigma: f64,
    cap: &FirmCapitalStructure,
    mkt: &MarketObservables,
    form: StockVolForm,
    settings: &QuadratureSettings,
) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::domain("sigma", format!("elasticity needs sigma > 0, got {sigma}")));
    }
    Ok(implied_stock_vol(v_t, sigma, cap, mkt, form, settings)? / sigma)
}
