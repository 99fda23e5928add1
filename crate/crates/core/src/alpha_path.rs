//! Alpha-paths of uncertain differential equations.
//!
//! For `dX = f(t, X) dt + g(t, X) dC` the alpha-path solves the ordinary
//! differential equation `dX^a = f(t, X^a) dt + |g(t, X^a)| Phi^-1(a) dt`,
//! and the solution's inverse uncertainty distribution at time `t` is
//! `a -> X_t^a`. Expectations of monotone functionals follow by integrating
//! over the level `a`.
//!
//! Geometric Liu processes `dV = mu V dt + sigma V dC` have the closed form
//! `V_t^a = V_0 exp(mu t + sigma t Phi^-1(a))`; general equations are
//! integrated with a fixed-step classical Runge-Kutta scheme.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadratureSettings};
use crate::uncertainty::{inv_std_normal, weighted, SQRT3_OVER_PI};

/// Default number of interior levels `i / 1000` for alpha-path families.
pub const DEFAULT_ALPHA_LEVELS: usize = 999;
/// Default fixed step count for [`solve_alpha_path`].
pub const DEFAULT_STEPS: usize = 10_000;
/// `c` at or above this value makes a linearly growing expectation infinite.
pub const DIVERGENCE_THRESHOLD: f64 = 1.0 - 1e-9;

/// Firm-value dynamics `dV = mu V dt + sigma V dC`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricLiuSpec {
    pub v0: f64,
    pub mu: f64,
    pub sigma: f64,
}

impl GeometricLiuSpec {
    pub fn new(v0: f64, mu: f64, sigma: f64) -> Result<Self> {
        if !(v0 > 0.0 && v0.is_finite()) {
            return Err(Error::domain("v0", format!("must be positive and finite, got {v0}")));
        }
        if !mu.is_finite() {
            return Err(Error::domain("mu", format!("must be finite, got {mu}")));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::domain("sigma", format!("must be nonnegative and finite, got {sigma}")));
        }
        Ok(GeometricLiuSpec { v0, mu, sigma })
    }

    /// Spread parameter `c = sigma t sqrt(3) / pi`; `V_t^a = V_0 e^{mu t} (a / (1 - a))^c`.
    pub fn spread(&self, t: f64) -> f64 {
        self.sigma * t * SQRT3_OVER_PI
    }

    /// `ln V_t^a` at log-odds `u`.
    pub fn ln_value_at_logit(&self, t: f64, u: f64) -> f64 {
        self.v0.ln() + self.mu * t + self.spread(t) * u
    }

    pub fn value_at_logit(&self, t: f64, u: f64) -> f64 {
        self.ln_value_at_logit(t, u).exp()
    }

    /// `E[V_t] = V_0 e^{mu t} pi c / sin(pi c)`, evaluated by quadrature in log space.
    pub fn expected_value(&self, t: f64, settings: &QuadratureSettings) -> Result<f64> {
        check_time(t)?;
        let c = self.spread(t);
        if c >= DIVERGENCE_THRESHOLD {
            return Err(divergent(c));
        }
        let base = self.v0.ln() + self.mu * t;
        quadrature::integrate(
            |u| (base + c * u + quadrature::ln_logistic_weight(u)).exp(),
            f64::NEG_INFINITY,
            f64::INFINITY,
            settings,
        )
        .map_err(|e| attach_spread(e, c))
    }
}

fn divergent(c: f64) -> Error {
    Error::Divergent {
        c,
        detail: "expectation of a linearly growing functional is infinite for c >= 1".into(),
    }
}

fn attach_spread(e: Error, c: f64) -> Error {
    match e {
        Error::Divergent { detail, .. } => Error::Divergent { c, detail },
        other => other,
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("t", format!("must be nonnegative and finite, got {t}")))
    }
}

/// Closed-form alpha-path of the geometric Liu process at time `t`.
pub fn gbm_alpha_path(spec: &GeometricLiuSpec, t: f64, alpha: f64) -> Result<f64> {
    check_time(t)?;
    let z = inv_std_normal(alpha)?;
    Ok(spec.v0 * (spec.mu * t + spec.sigma * t * z).exp())
}

/// Drift `f(t, x)` and diffusion `g(t, x)` of an uncertain differential equation.
pub trait Ude {
    fn drift(&self, t: f64, x: f64) -> f64;
    fn diffusion(&self, t: f64, x: f64) -> f64;
}

/// Uncertain differential equation from a pair of closures.
#[derive(Clone, Copy)]
pub struct UdeSpec<F, G> {
    pub drift: F,
    pub diffusion: G,
}

impl<F, G> UdeSpec<F, G>
where
    F: Fn(f64, f64) -> f64,
    G: Fn(f64, f64) -> f64,
{
    pub fn new(drift: F, diffusion: G) -> Self {
        UdeSpec { drift, diffusion }
    }
}

impl<F, G> Ude for UdeSpec<F, G>
where
    F: Fn(f64, f64) -> f64,
    G: Fn(f64, f64) -> f64,
{
    fn drift(&self, t: f64, x: f64) -> f64 {
        (self.drift)(t, x)
    }

    fn diffusion(&self, t: f64, x: f64) -> f64 {
        (self.diffusion)(t, x)
    }
}

impl Ude for GeometricLiuSpec {
    fn drift(&self, _t: f64, x: f64) -> f64 {
        self.mu * x
    }

    fn diffusion(&self, _t: f64, x: f64) -> f64 {
        self.sigma * x
    }
}

/// One alpha-path sampled on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaPath {
    pub alpha: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl AlphaPath {
    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("alpha-path has at least one point")
    }
}

/// Integrates the alpha-path ODE `x' = f(t, x) + |g(t, x)| Phi^-1(alpha)` from
/// `x(0) = x0` to `t_end` with `steps` classical RK4 steps.
pub fn solve_alpha_path<U: Ude + ?Sized>(
    ude: &U,
    x0: f64,
    t_end: f64,
    alpha: f64,
    steps: usize,
) -> Result<AlphaPath> {
    let z = inv_std_normal(alpha)?;
    solve_with_shift(ude, x0, t_end, z, steps).map(|(times, values)| AlphaPath {
        alpha,
        times,
        values,
    })
}

fn solve_with_shift<U: Ude + ?Sized>(
    ude: &U,
    x0: f64,
    t_end: f64,
    z: f64,
    steps: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if steps == 0 {
        return Err(Error::domain("steps", "must be at least 1"));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::domain("t_end", format!("must be positive and finite, got {t_end}")));
    }
    if !x0.is_finite() {
        return Err(Error::domain("x0", format!("must be finite, got {x0}")));
    }
    let rhs = |t: f64, x: f64| ude.drift(t, x) + ude.diffusion(t, x).abs() * z;
    let h = t_end / steps as f64;
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    let mut x = x0;
    times.push(0.0);
    values.push(x);
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = rhs(t, x);
        let k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1);
        let k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2);
        let k4 = rhs(t + h, x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let t_next = if i + 1 == steps { t_end } else { (i + 1) as f64 * h };
        if !x.is_finite() {
            return Err(Error::Integration(format!(
                "alpha-path became non-finite at t = {t_next}"
            )));
        }
        times.push(t_next);
        values.push(x);
    }
    Ok((times, values))
}

/// Inverse uncertainty distribution at a fixed time, tabulated on a grid of levels.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSlice {
    pub t: f64,
    pub levels: Vec<f64>,
    pub values: Vec<f64>,
}

impl AlphaSlice {
    /// Builds a slice; levels must be strictly increasing inside (0, 1).
    pub fn new(t: f64, levels: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if levels.is_empty() || levels.len() != values.len() {
            return Err(Error::domain("levels", "must be nonempty and match values in length"));
        }
        if levels.iter().any(|a| !(*a > 0.0 && *a < 1.0)) || levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("levels", "must be strictly increasing inside (0, 1)"));
        }
        Ok(AlphaSlice { t, levels, values })
    }

    /// `Psi_t^-1(alpha)`, exact on grid levels and piecewise linear between them.
    pub fn inverse_distribution_at(&self, alpha: f64) -> Result<f64> {
        let first = self.levels[0];
        let last = *self.levels.last().unwrap();
        if !(alpha >= first && alpha <= last) {
            return Err(Error::domain(
                "alpha",
                format!("{alpha} lies outside the computed level range [{first}, {last}]"),
            ));
        }
        let i = self.levels.partition_point(|a| *a < alpha);
        if self.levels[i] == alpha {
            return Ok(self.values[i]);
        }
        let (a0, a1) = (self.levels[i - 1], self.levels[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        let w = (alpha - a0) / (a1 - a0);
        Ok(v0 + w * (v1 - v0))
    }
}

/// `Psi_t^-1(alpha)` read off an alpha-path family slice.
pub fn inverse_distribution_at(slice: &AlphaSlice, alpha: f64) -> Result<f64> {
    slice.inverse_distribution_at(alpha)
}

/// Interior levels `i / (n + 1)` for `i = 1..=n`.
pub fn uniform_levels(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}

/// Alpha-paths for a set of levels on a shared time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaPathFamily {
    pub paths: Vec<AlphaPath>,
}

impl AlphaPathFamily {
    /// Solves every level numerically; levels are processed in parallel and
    /// collected in input order.
    pub fn solve<U: Ude + Sync + ?Sized>(
        ude: &U,
        x0: f64,
        t_end: f64,
        levels: &[f64],
        steps: usize,
    ) -> Result<Self> {
        let paths = levels
            .par_iter()
            .map(|&a| solve_alpha_path(ude, x0, t_end, a, steps))
            .collect::<Result<Vec<_>>>()?;
        Ok(AlphaPathFamily { paths })
    }

    /// Closed-form geometric Liu paths at the given times.
    pub fn geometric(spec: &GeometricLiuSpec, times: &[f64], levels: &[f64]) -> Result<Self> {
        let paths = levels
            .iter()
            .map(|&a| {
                let values = times
                    .iter()
                    .map(|&t| gbm_alpha_path(spec, t, a))
                    .collect::<Result<Vec<_>>>()?;
                Ok(AlphaPath {
                    alpha: a,
                    times: times.to_vec(),
                    values,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AlphaPathFamily { paths })
    }

    /// Slice through every path at time index `index`.
    pub fn slice(&self, index: usize) -> Result<AlphaSlice> {
        let first = self
            .paths
            .first()
            .ok_or_else(|| Error::domain("paths", "family is empty"))?;
        let t = *first
            .times
            .get(index)
            .ok_or_else(|| Error::domain("index", format!("{index} is past the time grid")))?;
        let levels = self.paths.iter().map(|p| p.alpha).collect();
        let values = self.paths.iter().map(|p| p.values[index]).collect();
        AlphaSlice::new(t, levels, values)
    }

    pub fn terminal_slice(&self) -> Result<AlphaSlice> {
        let n = self.paths.first().map_or(0, |p| p.times.len());
        self.slice(n.saturating_sub(1))
    }
}

/// Anything that can produce `X_t^alpha` at a given log-odds level.
pub trait AlphaPathSource {
    /// `X_t^alpha` at `alpha = 1 / (1 + exp(-u))`.
    fn value_at_logit(&self, t: f64, u: f64) -> Result<f64>;

    /// Spread `c` of a geometric source; `None` when unknown.
    fn spread(&self, _t: f64) -> Option<f64> {
        None
    }
}

impl AlphaPathSource for GeometricLiuSpec {
    fn value_at_logit(&self, t: f64, u: f64) -> Result<f64> {
        Ok(GeometricLiuSpec::value_at_logit(self, t, u))
    }

    fn spread(&self, t: f64) -> Option<f64> {
        Some(GeometricLiuSpec::spread(self, t))
    }
}

/// A general equation paired with its initial value and step count.
pub struct NumericUde<'a, U: ?Sized> {
    pub ude: &'a U,
    pub x0: f64,
    pub steps: usize,
}

impl<U: Ude + ?Sized> AlphaPathSource for NumericUde<'_, U> {
    fn value_at_logit(&self, t: f64, u: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(self.x0);
        }
        let (_, values) = solve_with_shift(self.ude, self.x0, t, SQRT3_OVER_PI * u, self.steps)?;
        Ok(*values.last().unwrap())
    }
}

/// `E[I(X_t)] = int_0^1 I(X_t^alpha) d(alpha)` for monotone `I`.
///
/// For geometric sources with `c >= 1 - 1e-9` the functional is probed far in
/// the upper tail; if it keeps growing the expectation is reported divergent
/// up front rather than left to the quadrature's tail test.
pub fn expected_monotone_functional<S, I>(
    source: &S,
    t: f64,
    functional: I,
    settings: &QuadratureSettings,
) -> Result<f64>
where
    S: AlphaPathSource + ?Sized,
    I: Fn(f64) -> f64,
{
    check_time(t)?;
    let spread = source.spread(t);
    if let Some(c) = spread.filter(|c| *c >= DIVERGENCE_THRESHOLD) {
        let far = functional(source.value_at_logit(t, 40.0)?);
        let farther = functional(source.value_at_logit(t, 80.0)?);
        if farther.abs() > far.abs() {
            return Err(divergent(c));
        }
    }
    // The quadrature integrand cannot return Result; stash the first failure.
    let failure = std::cell::RefCell::new(None);
    let integrand = |u: f64| match source.value_at_logit(t, u) {
        Ok(x) => weighted(functional(x), u),
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let result = quadrature::integrate(integrand, f64::NEG_INFINITY, f64::INFINITY, settings);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    result.map_err(|e| attach_spread(e, spread.unwrap_or(f64::NAN)))
}
