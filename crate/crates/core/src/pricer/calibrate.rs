//! Recovering the unobservable firm value and volatility from the stock.
//!
//! The pair `(sigma, V)` must satisfy
//!
//! ```text
//! N S = V - M f_w(V, sigma)
//! sigma_s = (sigma V / S) * dS/dV
//! ```
//!
//! For fixed `sigma` the first equation has a unique root in `V` (its
//! `V`-derivative `1 - M df/dV` is asserted positive), giving `V(sigma)`. The
//! volatility residual `sigma_s(V(sigma), sigma) - sigma_s` is then scanned
//! over the admissible range `c < 1` for sign changes and the smallest root is
//! refined with the Illinois variant of regula falsi.

use crate::error::{Error, Result};
use crate::quadrature::QuadratureSettings;
use crate::uncertainty::SQRT3_OVER_PI;

use super::{dfw_dv, price_warrant, FirmCapitalStructure, MarketObservables, StockVolForm};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationSettings {
    /// Relative tolerance on both equations.
    pub tol: f64,
    /// Cap on refinement iterations of the outer root-find.
    pub max_iter: usize,
    /// Grid points used to bracket volatility roots on `(0, sigma_c)`.
    pub scan_points: usize,
    pub form: StockVolForm,
    pub quadrature: QuadratureSettings,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        CalibrationSettings {
            tol: 1e-8,
            max_iter: 200,
            scan_points: 48,
            form: StockVolForm::default(),
            quadrature: QuadratureSettings {
                abs_tol: 1e-13,
                rel_tol: 1e-12,
                ..QuadratureSettings::default()
            },
        }
    }
}

impl CalibrationSettings {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::domain("numerics.tol", format!("must lie in (0, 1), got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::domain("numerics.max_iter", "must be at least 1"));
        }
        if self.scan_points < 2 {
            return Err(Error::domain("numerics.scan_points", "must be at least 2"));
        }
        self.quadrature.validate()
    }
}

/// Solution of the calibration system.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    pub sigma_star: f64,
    pub v_star: f64,
    /// Warrant price at the calibrated point.
    pub price: f64,
    /// Elasticity `sigma_s(V*, sigma*) / sigma*`.
    pub beta: f64,
    /// `|V* - M f_w - N S|`.
    pub residual_value: f64,
    /// `|sigma_s(V*, sigma*) - sigma_s|`.
    pub residual_vol: f64,
    /// Outer refinement iterations.
    pub iterations: usize,
    /// Volatility levels evaluated while bracketing.
    pub scan_evaluations: usize,
    /// Every sign-change bracket found by the scan, in increasing sigma.
    pub brackets: Vec<(f64, f64)>,
    /// More than one bracket was found; the smallest-sigma root was returned.
    pub multiple_roots: bool,
}

/// Firm value `V(sigma)` solving `N S = V - M f_w(V, sigma)`.
pub fn solve_value_equation(
    sigma: f64,
    cap: &FirmCapitalStructure,
    mkt: &MarketObservables,
    settings: &CalibrationSettings,
) -> Result<f64> {
    let q = &settings.quadrature;
    let equity = cap.n_shares() * mkt.stock_price();
    let m = cap.m_warrants();
    if m == 0.0 {
        return Ok(equity);
    }
    let g = |v: f64| -> Result<f64> { Ok(v - m * price_warrant(v, sigma, cap, mkt, q)? - equity) };
    let slope = |v: f64| -> Result<f64> {
        let s = 1.0 - m * dfw_dv(v, sigma, cap, mkt, q)?;
        if s > 0.0 {
            Ok(s)
        } else {
            Err(Error::DilutionCondition {
                which: "1 - M dfw/dV",
                value: s,
                sigma,
                v,
            })
        }
    };

    let mut lo = equity;
    let g_lo = g(lo)?;
    if g_lo == 0.0 {
        return Ok(lo);
    }
    let mut hi = equity - g_lo;
    let mut g_hi = g(hi)?;
    let mut expansions = 0;
    while g_hi < 0.0 {
        slope(hi)?;
        lo = hi;
        hi = equity + 2.0 * (hi - equity);
        g_hi = g(hi)?;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::Integration(format!(
                "could not bracket the value equation at sigma = {sigma}"
            )));
        }
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }

    // Safeguarded Newton inside [lo, hi].
    let mut v = hi;
    let mut gv = g_hi;
    for _ in 0..100 {
        let step = gv / slope(v)?;
        let mut next = v - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let g_next = g(next)?;
        if g_next == 0.0 {
            return Ok(next);
        }
        if g_next < 0.0 {
            lo = next;
        } else {
            hi = next;
        }
        let moved = (next - v).abs();
        v = next;
        gv = g_next;
        if moved <= 4.0 * f64::EPSILON * v || hi - lo <= 4.0 * f64::EPSILON * v {
            return Ok(v);
        }
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy)]
struct Evaluation {
    sigma: f64,
    v: f64,
    /// `(implied sigma_s - sigma_s) / sigma_s`.
    residual: f64,
}

fn evaluate(
    sigma: f64,
    cap: &FirmCapitalStructure,
    mkt: &MarketObservables,
    settings: &CalibrationSettings,
) -> Result<Evaluation> {
    let q = &settings.quadrature;
    let v = solve_value_equation(sigma, cap, mkt, settings)?;
    let delta = dfw_dv(v, sigma, cap, mkt, q)?;
    let bracket = settings.form.bracket(cap, delta);
    if bracket <= 0.0 {
        return Err(Error::DilutionCondition {
            which: settings.form.bracket_name(),
            value: bracket,
            sigma,
            v,
        });
    }
    let implied = sigma * v / mkt.stock_price() * bracket;
    Ok(Evaluation {
        sigma,
        v,
        residual: (implied - mkt.stock_vol()) / mkt.stock_vol(),
    })
}

fn finish(
    sigma: f64,
    v: f64,
    cap: &FirmCapitalStructure,
    mkt: &MarketObservables,
    settings: &CalibrationSettings,
) -> Result<(f64, f64, f64, f64)> {
    let q = &settings.quadrature;
    let price = price_warrant(v, sigma, cap, mkt, q)?;
    let delta = dfw_dv(v, sigma, cap, mkt, q)?;
    let implied = sigma * v / mkt.stock_price() * settings.form.bracket(cap, delta);
    let residual_value = (v - cap.m_warrants() * price - cap.n_shares() * mkt.stock_price()).abs();
    let residual_vol = (implied - mkt.stock_vol()).abs();
    Ok((price, implied, residual_value, residual_vol))
}

/// Solves for `(sigma*, V*)` from the stock price and stock volatility.
pub fn calibrate(
    cap: &FirmCapitalStructure,
    mkt: &MarketObservables,
    settings: &CalibrationSettings,
) -> Result<CalibrationResult> {
    settings.validate()?;
    let sigma_s = mkt.stock_vol();
    let equity = cap.n_shares() * mkt.stock_price();

    if cap.m_warrants() == 0.0 {
        // No warrants: S = V / N, so the system is solved by (sigma_s, N S).
        let price = price_warrant(equity, sigma_s, cap, mkt, &settings.quadrature)?;
        return Ok(CalibrationResult {
            sigma_star: sigma_s,
            v_star: equity,
            price,
            beta: 1.0,
            residual_value: 0.0,
            residual_vol: 0.0,
            iterations: 0,
            scan_evaluations: 0,
            brackets: vec![(sigma_s, sigma_s)],
            multiple_roots: false,
        });
    }

    // c = sigma tau sqrt(3) / pi must stay below 1.
    let sigma_c = 1.0 / (SQRT3_OVER_PI * mkt.horizon());
    let n = settings.scan_points;
    let mut grid: Vec<f64> = (1..=n).map(|j| sigma_c * j as f64 / (n + 1) as f64).collect();
    if sigma_s < sigma_c {
        grid.push(sigma_s);
        grid.sort_by(f64::total_cmp);
        grid.dedup();
    }

    let mut scanned: Vec<Evaluation> = Vec::new();
    let mut stop: Option<Error> = None;
    for &sigma in &grid {
        match evaluate(sigma, cap, mkt, settings) {
            Ok(e) => scanned.push(e),
            Err(e @ (Error::DilutionCondition { .. } | Error::Divergent { .. })) => {
                stop = Some(e);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let scan_evaluations = scanned.len() + usize::from(stop.is_some());

    let mut brackets = Vec::new();
    let mut exact: Option<usize> = None;
    for (i, e) in scanned.iter().enumerate() {
        if e.residual == 0.0 {
            brackets.push((e.sigma, e.sigma));
            exact.get_or_insert(i);
        } else if let Some(next) = scanned.get(i + 1) {
            if next.residual != 0.0 && e.residual.signum() != next.residual.signum() {
                brackets.push((e.sigma, next.sigma));
            }
        }
    }

    if brackets.is_empty() {
        return Err(match stop {
            Some(e @ Error::DilutionCondition { .. }) if scanned.is_empty() => e,
            Some(e) => Error::Infeasible {
                reason: format!("volatility residual has no sign change before the admissible boundary: {e}"),
                sigma_boundary: scanned.last().map_or(grid[0], |l| l.sigma),
            },
            None => Error::Infeasible {
                reason: "volatility residual has no sign change for c < 1".into(),
                sigma_boundary: sigma_c,
            },
        });
    }
    let multiple_roots = brackets.len() > 1;

    let (sigma_star, v_star, iterations) = match exact.filter(|&i| brackets[0].0 == scanned[i].sigma) {
        Some(i) => (scanned[i].sigma, scanned[i].v, 0),
        None => refine(brackets[0], &scanned, cap, mkt, settings)?,
    };

    let (price, implied, residual_value, residual_vol) = finish(sigma_star, v_star, cap, mkt, settings)?;
    Ok(CalibrationResult {
        sigma_star,
        v_star,
        price,
        beta: implied / sigma_star,
        residual_value,
        residual_vol,
        iterations,
        scan_evaluations,
        brackets,
        multiple_roots,
    })
}

/// Illinois regula falsi on the volatility residual inside `bracket`.
fn refine(
    bracket: (f64, f64),
    scanned: &[Evaluation],
    cap: &FirmCapitalStructure,
    mkt: &MarketObservables,
    settings: &CalibrationSettings,
) -> Result<(f64, f64, usize)> {
    let at = |sigma: f64| *scanned.iter().find(|e| e.sigma == sigma).expect("bracket end was scanned");
    let (mut a, mut b) = (at(bracket.0), at(bracket.1));
    // Residual used for the retained end; damped when the same end is kept twice.
    let mut fa = a.residual;
    let equity = cap.n_shares() * mkt.stock_price();

    for iteration in 1..=settings.max_iter {
        let fb = b.residual;
        let (left, right) = (a.sigma.min(b.sigma), a.sigma.max(b.sigma));
        let mut s = (a.sigma * fb - b.sigma * fa) / (fb - fa);
        if !(s > left && s < right) {
            s = 0.5 * (left + right);
        }
        let e = evaluate(s, cap, mkt, settings)?;
        if e.residual.abs() <= settings.tol {
            let (_, _, residual_value, _) = finish(e.sigma, e.v, cap, mkt, settings)?;
            if residual_value / equity <= settings.tol {
                return Ok((e.sigma, e.v, iteration));
            }
        }
        if e.residual.signum() != fb.signum() {
            a = b;
            fa = fb;
        } else {
            fa *= 0.5;
        }
        b = e;
        if (a.sigma - b.sigma).abs() <= 4.0 * f64::EPSILON * right {
            break;
        }
    }

    let (_, _, residual_value, residual_vol) = finish(b.sigma, b.v, cap, mkt, settings)?;
    Err(Error::NonConvergence {
        iterations: settings.max_iter,
        sigma: b.sigma,
        v: b.v,
        residual_value,
        residual_vol,
    })
}
