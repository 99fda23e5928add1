//! Property checks shared by the proptest suites and the acceptance runner.

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use uwarrant::{
    dfw_dv, gbm_alpha_path, implied_stock_vol, inv_normal, inv_std_normal, normal_distribution,
    price_warrant, solve_alpha_path, FirmCapitalStructure, GeometricLiuSpec, MarketObservables,
    NormalUncertainVariable, QuadratureSettings, StockVolForm,
};

use super::oracles;

pub type Check = Result<(), TestCaseError>;

pub fn tight() -> QuadratureSettings {
    QuadratureSettings {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        ..QuadratureSettings::default()
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(e.to_string()))
}

/// A firm and market with `c < 0.85`.
#[derive(Debug, Clone, Copy)]
pub struct Case {
    pub n: f64,
    pub m: f64,
    pub k: f64,
    pub j: f64,
    pub s: f64,
    pub r: f64,
    pub tau: f64,
    pub mu: f64,
    pub v: f64,
    pub sigma: f64,
}

impl Case {
    pub fn cap(&self) -> FirmCapitalStructure {
        FirmCapitalStructure::new(self.n, self.m, self.k, self.j).unwrap()
    }

    pub fn mkt(&self) -> MarketObservables {
        MarketObservables::new(self.s, 0.2, self.r, self.tau, self.mu).unwrap()
    }

    pub fn price(&self) -> Result<f64, TestCaseError> {
        ok(price_warrant(self.v, self.sigma, &self.cap(), &self.mkt(), &tight()))
    }
}

pub fn case() -> impl Strategy<Value = Case> {
    (
        (1.0..1000.0f64, 0.0..1000.0f64, 0.1..2.0f64, 1.0..200.0f64),
        (1.0..500.0f64, -0.02..0.1f64, 0.1..5.0f64, -0.05..0.1f64),
        (-1.0..1.0f64, 0.0..0.3f64),
    )
        .prop_map(|((n, m, k, j), (s, r, tau, mu), (moneyness, sigma))| {
            // Firm value within a factor e of the discounted strike per unit of k.
            let v = n * j / k * (moneyness - mu * tau).exp();
            Case { n, m, k, j, s, r, tau, mu, v, sigma }
        })
}

pub fn round_trip(e: f64, sigma: f64, alpha: f64) -> Check {
    let xi = ok(NormalUncertainVariable::new(e, sigma))?;
    let x = ok(inv_normal(&xi, alpha))?;
    let back = ok(normal_distribution(&xi, x))?;
    prop_assert!((back - alpha).abs() <= 1e-12, "alpha {alpha} -> x {x} -> {back}");
    Ok(())
}

pub fn odd_symmetry(alpha: f64) -> Check {
    let lo = ok(inv_std_normal(alpha))?;
    let hi = ok(inv_std_normal(1.0 - alpha))?;
    prop_assert!((lo + hi).abs() <= 1e-12 * lo.abs().max(1.0), "{lo} vs {hi}");
    let oracle = oracles::normal_quantile(0.0, 1.0, alpha);
    prop_assert!((lo - oracle).abs() <= 1e-12 * oracle.abs().max(1.0));
    Ok(())
}

/// Closed-form and RK4 paths are nondecreasing in alpha at every time.
pub fn paths_monotone(v0: f64, mu: f64, sigma: f64, a1: f64, a2: f64) -> Check {
    let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
    let spec = ok(GeometricLiuSpec::new(v0, mu, sigma))?;
    for t in [0.0, 0.5, 1.0, 2.0] {
        prop_assert!(ok(gbm_alpha_path(&spec, t, lo))? <= ok(gbm_alpha_path(&spec, t, hi))?);
    }
    let p = ok(solve_alpha_path(&spec, v0, 2.0, lo, 200))?;
    let q = ok(solve_alpha_path(&spec, v0, 2.0, hi, 200))?;
    for (x, y) in p.values.iter().zip(&q.values) {
        prop_assert!(x <= y, "{x} > {y}");
    }
    Ok(())
}

fn noise(x: f64) -> f64 {
    1e-12 * x.abs().max(1e-300)
}

pub fn monotone_in_v(c: Case, bump: f64) -> Check {
    let hi = Case { v: c.v * (1.0 + bump), ..c };
    let (p0, p1) = (c.price()?, hi.price()?);
    prop_assert!(p0 <= p1 + noise(p1), "v {} -> {p0}, v {} -> {p1}", c.v, hi.v);
    Ok(())
}

/// `bump` up to 0.04 keeps `c < 0.95`.
pub fn monotone_in_sigma(c: Case, bump: f64) -> Check {
    let hi = Case { sigma: c.sigma + bump, ..c };
    let (p0, p1) = (c.price()?, hi.price()?);
    prop_assert!(p0 <= p1 + noise(p1), "sigma {} -> {p0}, sigma {} -> {p1}", c.sigma, hi.sigma);
    // Strict wherever the exercise level is interior and the change is resolvable.
    let a0 = oracles::exercise_level(c.v, c.sigma, &c.cap(), &c.mkt());
    if c.sigma > 0.0 && a0 > 1e-6 && a0 < 1.0 - 1e-6 && p1 > 1e-6 * c.j {
        prop_assert!(p0 < p1, "not strictly increasing: {p0} vs {p1}");
    }
    Ok(())
}

pub fn monotone_in_k(c: Case, bump: f64) -> Check {
    let hi = Case { k: c.k * (1.0 + bump), ..c };
    let (p0, p1) = (c.price()?, hi.price()?);
    prop_assert!(p0 <= p1 + noise(p1), "k {} -> {p0}, k {} -> {p1}", c.k, hi.k);
    Ok(())
}

pub fn monotone_in_j(c: Case, bump: f64) -> Check {
    let hi = Case { j: c.j * (1.0 + bump), ..c };
    let (p0, p1) = (c.price()?, hi.price()?);
    prop_assert!(p1 <= p0 + noise(p0), "J {} -> {p0}, J {} -> {p1}", c.j, hi.j);
    Ok(())
}

/// Raising `r` by `d / tau` scales the price by `e^{-d}`.
pub fn discount_scaling(c: Case, d: f64) -> Check {
    let shifted = Case { r: c.r + d / c.tau, ..c };
    let (p0, p1) = (c.price()?, shifted.price()?);
    let want = p0 * (-d).exp();
    prop_assert!((p1 - want).abs() <= 1e-12 * want.abs().max(1e-300) + 1e-300, "{p1} vs {want}");
    Ok(())
}

/// `0 <= f_w` and `f_w >= scale (A pi c / sin(pi c) - NJ)` by `x^+ >= x`.
pub fn lower_bounds(c: Case) -> Check {
    let p = c.price()?;
    prop_assert!(p >= 0.0);
    let floor = ok(oracles::deep_itm_formula_unchecked(c.v, c.sigma, &c.cap(), &c.mkt()))?;
    prop_assert!(p >= floor - 1e-10 * floor.abs().max(1.0), "{p} below {floor}");
    Ok(())
}

/// Price against the incomplete-beta closed form.
pub fn matches_incomplete_beta(c: Case) -> Check {
    let p = c.price()?;
    let exact = ok(oracles::incomplete_beta_price(c.v, c.sigma, &c.cap(), &c.mkt()))?;
    prop_assert!((p - exact).abs() <= 1e-8 * exact.abs().max(1e-6 * c.j), "{p} vs {exact}");
    Ok(())
}

/// Central difference with `h = 1e-4 v`.
pub fn central_difference(c: &Case) -> Result<f64, TestCaseError> {
    let h = 1e-4 * c.v;
    let up = Case { v: c.v + h, ..*c }.price()?;
    let down = Case { v: c.v - h, ..*c }.price()?;
    Ok((up - down) / (2.0 * h))
}

fn exact_slope(c: &Case) -> Result<f64, TestCaseError> {
    ok(oracles::incomplete_beta_slope(c.v, c.sigma, &c.cap(), &c.mkt()))
}

/// Slopes below this are indistinguishable from zero at price resolution.
fn slope_floor(c: &Case) -> f64 {
    1e-6 * c.k / (c.n + c.m * c.k)
}

pub fn derivative_matches_exact(c: Case) -> Check {
    let main = ok(dfw_dv(c.v, c.sigma, &c.cap(), &c.mkt(), &tight()))?;
    let exact = exact_slope(&c)?;
    prop_assert!((main - exact).abs() <= 1e-8 * exact.abs().max(slope_floor(&c)), "dfw/dV {main} vs {exact}");
    Ok(())
}

/// `sigma_s = sigma V / S * (1 - M f') / N`, rebuilt from the exact slope.
pub fn implied_vol_independent(c: Case) -> Check {
    let (cap, mkt) = (c.cap(), c.mkt());
    let slope = exact_slope(&c)?;
    let unit = c.sigma * c.v / c.s;
    let tol = 1e-7 * unit * (1.0 / c.n + c.m * slope.abs().max(slope_floor(&c)));

    let main = ok(implied_stock_vol(c.v, c.sigma, &cap, &mkt, StockVolForm::DilutionConsistent, &tight()))?;
    let oracle = unit * (1.0 - c.m * slope) / c.n;
    prop_assert!((main - oracle).abs() <= tol, "{main} vs {oracle}");

    let printed = ok(implied_stock_vol(c.v, c.sigma, &cap, &mkt, StockVolForm::AsPrinted, &tight()))?;
    let oracle = unit * (1.0 / c.n - c.m * slope);
    prop_assert!((printed - oracle).abs() <= tol * c.n.max(1.0), "{printed} vs {oracle}");
    Ok(())
}

/// The elasticity is positive whenever `1/N > M f'`.
pub fn beta_positive(c: Case) -> Check {
    if c.sigma == 0.0 {
        return Ok(());
    }
    let slope = ok(dfw_dv(c.v, c.sigma, &c.cap(), &c.mkt(), &tight()))?;
    let beta = ok(uwarrant::elasticity(c.v, c.sigma, &c.cap(), &c.mkt(), StockVolForm::AsPrinted, &tight()))?;
    if 1.0 / c.n > c.m * slope {
        prop_assert!(beta > 0.0, "beta {beta} with 1/N - M f' = {}", 1.0 / c.n - c.m * slope);
    }
    let beta = ok(uwarrant::elasticity(c.v, c.sigma, &c.cap(), &c.mkt(), StockVolForm::DilutionConsistent, &tight()))?;
    if 1.0 > c.m * slope {
        prop_assert!(beta > 0.0);
    }
    Ok(())
}

/// Pricing twice, or after a perturb-and-restore, gives identical bits.
pub fn idempotent(c: Case) -> Check {
    let p0 = c.price()?;
    let _ = Case { v: c.v * 1.5, ..c }.price()?;
    let p1 = c.price()?;
    prop_assert_eq!(p0.to_bits(), p1.to_bits());
    Ok(())
}
