//! Normal uncertainty distributions and expected values of uncertain variables.
//!
//! A normal uncertain variable `N(e, sigma)` has distribution
//! `Phi(x) = 1 / (1 + exp(pi (e - x) / (sqrt(3) sigma)))` and quantile
//! `e + sigma (sqrt(3) / pi) ln(alpha / (1 - alpha))`. Expected values are
//! computed either from the quantile (`int_0^1 Phi^-1(alpha) d(alpha)`) or from
//! the distribution's two tails.

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadratureBackend, QuadratureSettings};

/// `sqrt(3) / pi`, the scale that maps log-odds to the standard normal uncertainty quantile.
pub const SQRT3_OVER_PI: f64 = 0.551_328_895_421_792_1;

/// Uncertain variable with normal uncertainty distribution `N(e, sigma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalUncertainVariable {
    e: f64,
    sigma: f64,
}

impl NormalUncertainVariable {
    pub fn new(e: f64, sigma: f64) -> Result<Self> {
        if !e.is_finite() {
            return Err(Error::domain("e", format!("must be finite, got {e}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain("sigma", format!("must be positive and finite, got {sigma}")));
        }
        Ok(NormalUncertainVariable { e, sigma })
    }

    /// `N(0, 1)`.
    pub fn standard() -> Self {
        NormalUncertainVariable { e: 0.0, sigma: 1.0 }
    }

    pub fn e(&self) -> f64 {
        self.e
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn scaled(&self, x: f64) -> f64 {
        (x - self.e) / (SQRT3_OVER_PI * self.sigma)
    }

    /// `Phi(x)`; accepts infinite `x` and returns the limits 0 and 1 there.
    pub fn cdf(&self, x: f64) -> f64 {
        quadrature::logistic(self.scaled(x))
    }

    /// `1 - Phi(x)`, evaluated without cancellation.
    pub fn survival(&self, x: f64) -> f64 {
        quadrature::logistic_complement(self.scaled(x))
    }

    /// Quantile at log-odds `u = ln(alpha / (1 - alpha))`.
    pub fn quantile_at_logit(&self, u: f64) -> f64 {
        self.e + self.sigma * SQRT3_OVER_PI * u
    }
}

fn check_level(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain("alpha", format!("must lie in (0, 1), got {alpha}")))
    }
}

/// Normal uncertainty distribution `Phi(x)` of `v`.
pub fn normal_distribution(v: &NormalUncertainVariable, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("x", format!("must be finite, got {x}")));
    }
    Ok(v.cdf(x))
}

/// Inverse standard normal uncertainty distribution `(sqrt(3)/pi) ln(alpha / (1 - alpha))`.
pub fn inv_std_normal(alpha: f64) -> Result<f64> {
    check_level(alpha)?;
    Ok(SQRT3_OVER_PI * quadrature::logit(alpha))
}

/// Inverse distribution of `N(e, sigma)`: `e + sigma * inv_std_normal(alpha)`.
pub fn inv_normal(v: &NormalUncertainVariable, alpha: f64) -> Result<f64> {
    Ok(v.e + v.sigma * inv_std_normal(alpha)?)
}

/// A nondecreasing map from levels `alpha in (0, 1)` to values.
///
/// Implementors that know their quantile in closed form should override
/// [`Quantile::at_logit`]; the default goes through `alpha`, which loses
/// resolution once `1 - alpha` drops below machine epsilon.
pub trait Quantile {
    fn at(&self, alpha: f64) -> f64;

    /// Quantile at log-odds `u`, i.e. at `alpha = 1 / (1 + exp(-u))`.
    fn at_logit(&self, u: f64) -> f64 {
        self.at(quadrature::logistic(u))
    }
}

impl Quantile for NormalUncertainVariable {
    fn at(&self, alpha: f64) -> f64 {
        self.quantile_at_logit(quadrature::logit(alpha))
    }

    fn at_logit(&self, u: f64) -> f64 {
        self.quantile_at_logit(u)
    }
}

#[derive(Debug, Clone, Copy)]
enum Parametrization {
    Level,
    LogOdds,
}

/// Quantile function backed by a closure, parametrized by level or by log-odds.
#[derive(Clone, Copy)]
pub struct QuantileFunction<F> {
    f: F,
    by: Parametrization,
}

impl<F: Fn(f64) -> f64> QuantileFunction<F> {
    /// `f` receives `alpha in (0, 1)`. Levels within machine epsilon of 1 round
    /// to 1, so quantiles unbounded at an endpoint need [`Self::from_logit`].
    pub fn from_alpha(f: F) -> Self {
        QuantileFunction {
            f,
            by: Parametrization::Level,
        }
    }

    /// `f` receives the log-odds `u = ln(alpha / (1 - alpha))`.
    pub fn from_logit(f: F) -> Self {
        QuantileFunction {
            f,
            by: Parametrization::LogOdds,
        }
    }
}

impl<F: Fn(f64) -> f64> Quantile for QuantileFunction<F> {
    fn at(&self, alpha: f64) -> f64 {
        match self.by {
            Parametrization::Level => (self.f)(alpha),
            Parametrization::LogOdds => (self.f)(quadrature::logit(alpha)),
        }
    }

    fn at_logit(&self, u: f64) -> f64 {
        match self.by {
            Parametrization::Level => (self.f)(quadrature::logistic(u)),
            Parametrization::LogOdds => (self.f)(u),
        }
    }
}

/// An uncertainty distribution `x -> M{xi <= x}`.
pub trait UncertaintyDistribution {
    fn cdf(&self, x: f64) -> f64;

    fn survival(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }
}

impl UncertaintyDistribution for NormalUncertainVariable {
    fn cdf(&self, x: f64) -> f64 {
        NormalUncertainVariable::cdf(self, x)
    }

    fn survival(&self, x: f64) -> f64 {
        NormalUncertainVariable::survival(self, x)
    }
}

impl<F: Fn(f64) -> f64> UncertaintyDistribution for F {
    fn cdf(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Weighted integrand on the log-odds line.
///
/// Once the weight has underflowed (`|u| > 745`) the point contributes zero even
/// if the quantile itself overflowed: an integrable quantile grows slower than
/// `1 / w`. Quantiles growing as fast as `1 / w` overflow while the weight is
/// still positive, so divergence is still reported. The price of working in
/// linear space is that tails like `w^{-c}` with `c` in `(0.95, 1)` overflow
/// before they have converged and are reported divergent too.
pub(crate) fn weighted(value: f64, u: f64) -> f64 {
    let w = quadrature::logistic_weight(u);
    if w == 0.0 && !value.is_nan() {
        0.0
    } else {
        value * w
    }
}

/// `E[xi] = int_0^1 q(alpha) d(alpha)`.
pub fn expected_value_from_quantile<Q: Quantile + ?Sized>(
    q: &Q,
    settings: &QuadratureSettings,
) -> Result<f64> {
    settings.validate()?;
    match settings.backend {
        QuadratureBackend::LogisticKronrod => quadrature::integrate(
            |u| weighted(q.at_logit(u), u),
            f64::NEG_INFINITY,
            f64::INFINITY,
            settings,
        )
        .map_err(|e| match e {
            Error::Divergent { detail, .. } => Error::Integration(format!(
                "quantile integral diverges, or the quantile is unbounded where alpha rounds \
                 to 0 or 1 (supply it by log-odds instead): {detail}"
            )),
            other => other,
        }),
        QuadratureBackend::Composite { epsilon, intervals } => {
            quadrature::composite_simpson(|a| q.at(a), epsilon, 1.0 - epsilon, intervals)
        }
    }
}

/// `E[xi] = int_0^inf (1 - Phi(x)) dx - int_-inf^0 Phi(x) dx`.
pub fn expected_value_from_distribution<D: UncertaintyDistribution + ?Sized>(
    dist: &D,
    settings: &QuadratureSettings,
) -> Result<f64> {
    settings.validate()?;
    let not_converged = |side: &'static str| {
        move |e: Error| match e {
            Error::Divergent { detail, .. } => {
                Error::Integration(format!("{side} tail not converged: {detail}"))
            }
            other => other,
        }
    };
    let upper = quadrature::integrate(|x| dist.survival(x), 0.0, f64::INFINITY, settings)
        .map_err(not_converged("upper"))?;
    let lower = quadrature::integrate(|x| dist.cdf(x), f64::NEG_INFINITY, 0.0, settings)
        .map_err(not_converged("lower"))?;
    Ok(upper - lower)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn constant_is_exact() {
        assert_relative_eq!(SQRT3_OVER_PI, 3f64.sqrt() / PI, max_relative = 1e-16);
    }

    #[test]
    fn distribution_at_location_is_half() {
        let v = NormalUncertainVariable::standard();
        assert_eq!(normal_distribution(&v, 0.0).unwrap(), 0.5);
    }

    #[test]
    fn distribution_tends_to_one() {
        let v = NormalUncertainVariable::standard();
        let mut last = 0.0;
        for x in [1.0, 5.0, 10.0, 20.0, 40.0] {
            let p = normal_distribution(&v, x).unwrap();
            assert!(p > last && p <= 1.0);
            last = p;
        }
        assert!(1.0 - last < 1e-15);
    }

    #[test]
    fn three_quarter_point() {
        // x = e + sigma sqrt(3) ln(3) / pi solves Phi(x) = 3/4.
        let v = NormalUncertainVariable::new(2.0, 3.0).unwrap();
        let x = 3.817_090_098_824_587_6;
        assert_relative_eq!(normal_distribution(&v, x).unwrap(), 0.75, max_relative = 1e-14);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(NormalUncertainVariable::new(0.0, 0.0).is_err());
        assert!(NormalUncertainVariable::new(0.0, -1.0).is_err());
        assert!(NormalUncertainVariable::new(f64::NAN, 1.0).is_err());
        let v = NormalUncertainVariable::standard();
        assert!(normal_distribution(&v, f64::INFINITY).is_err());
        assert!(normal_distribution(&v, f64::NAN).is_err());
        for a in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(inv_std_normal(a).is_err(), "{a}");
        }
    }

    #[test]
    fn inverse_values() {
        assert_eq!(inv_std_normal(0.5).unwrap(), 0.0);
        // (sqrt(3)/pi) ln 9, high-precision value.
        assert_relative_eq!(inv_std_normal(0.9).unwrap(), 1.211_393_399_216_391_7, max_relative = 1e-14);
        let v = NormalUncertainVariable::new(5.0, 2.0).unwrap();
        assert_eq!(inv_normal(&v, 0.5).unwrap(), 5.0);
        assert!((inv_std_normal(0.2).unwrap() + inv_std_normal(0.8).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn expectation_of_constant() {
        let q = QuantileFunction::from_alpha(|_| 7.25);
        let e = expected_value_from_quantile(&q, &QuadratureSettings::default()).unwrap();
        assert_relative_eq!(e, 7.25, max_relative = 1e-12);
    }

    #[test]
    fn expectation_of_normal_from_quantile() {
        let s = QuadratureSettings::default();
        for (e, sigma) in [(0.0, 1.0), (3.5, 0.01), (-2.0, 100.0)] {
            let v = NormalUncertainVariable::new(e, sigma).unwrap();
            let got = expected_value_from_quantile(&v, &s).unwrap();
            assert!((got - e).abs() <= 1e-10 + 1e-8 * e.abs(), "{e} {sigma} {got}");
        }
    }

    #[test]
    fn composite_backend_agrees_loosely() {
        let s = QuadratureSettings {
            backend: QuadratureBackend::Composite {
                epsilon: 1e-10,
                intervals: 200_000,
            },
            ..Default::default()
        };
        let v = NormalUncertainVariable::new(1.5, 0.7).unwrap();
        let got = expected_value_from_quantile(&v, &s).unwrap();
        assert!((got - 1.5).abs() < 1e-6, "{got}");
    }

    #[test]
    fn divergent_quantile_is_integration_failure() {
        // (alpha / (1 - alpha))^1.2 is not integrable at 1.
        let q = QuantileFunction::from_logit(|u: f64| (1.2 * u).exp());
        let err = expected_value_from_quantile(&q, &QuadratureSettings::default()).unwrap_err();
        assert!(matches!(err, Error::Integration(_)), "{err}");
    }

    #[test]
    fn expectation_from_distribution() {
        let s = QuadratureSettings::default();
        let v = NormalUncertainVariable::standard();
        assert!(expected_value_from_distribution(&v, &s).unwrap().abs() < 1e-9);
        let v = NormalUncertainVariable::new(4.0, 2.0).unwrap();
        let a = expected_value_from_distribution(&v, &s).unwrap();
        let b = expected_value_from_quantile(&v, &s).unwrap();
        assert!((a - b).abs() < 1e-6, "{a} {b}");
    }

    #[test]
    fn near_step_distribution() {
        let v = NormalUncertainVariable::new(2.5, 1e-9).unwrap();
        let got = expected_value_from_distribution(&v, &QuadratureSettings::default()).unwrap();
        assert!((got - 2.5).abs() < 1e-6, "{got}");
    }

    #[test]
    fn closure_distribution_uses_generic_survival() {
        let v = NormalUncertainVariable::new(1.0, 0.5).unwrap();
        let phi = move |x: f64| v.cdf(x);
        let got = expected_value_from_distribution(&phi, &QuadratureSettings::default()).unwrap();
        assert!((got - 1.0).abs() < 1e-6, "{got}");
    }

    #[test]
    fn heavy_tail_survives_weight_underflow() {
        let s = QuadratureSettings {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            ..QuadratureSettings::default()
        };
        let c = 0.9;
        let q = QuantileFunction::from_logit(move |u: f64| (c * u).exp());
        let got = expected_value_from_quantile(&q, &s).unwrap();
        assert_relative_eq!(got, PI * c / (PI * c).sin(), max_relative = 1e-10);
    }
}
