//! Adaptive Gauss-Kronrod integration on finite and infinite intervals.
//!
//! Expectations over the level set `alpha in (0, 1)` are evaluated after the
//! logistic substitution `alpha = 1 / (1 + exp(-u))`, which turns
//! `int_0^1 q(alpha) d(alpha)` into `int q(alpha(u)) w(u) du` over the real
//! line with the logistic density `w(u) = alpha (1 - alpha)`. The logarithmic
//! endpoint singularities of normal uncertainty quantiles become linear growth
//! in `u`, which the exponentially decaying weight absorbs.
//!
//! Infinite ends are handled by integrating a core window and then appending
//! tail segments of doubling width until the increments fall below tolerance.
//! Tails that keep growing are reported as [`Error::Divergent`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 15-point Kronrod abscissae (nonnegative half) and weights; every other
// abscissa (odd index) is also a 7-point Gauss node.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const NODES_PER_SEGMENT: usize = 15;
/// Tail segments stop once the integrand at the cutoff is below this level
/// (in addition to the increment test).
const TAIL_INTEGRAND_FLOOR: f64 = 1e-12;

/// Which rule [`crate::expected_value_from_quantile`] uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureBackend {
    /// Logistic substitution followed by adaptive Gauss-Kronrod on the real line.
    LogisticKronrod,
    /// Composite Simpson rule directly on `[epsilon, 1 - epsilon]` in alpha.
    /// Slow and truncation-limited; kept as a cross-check.
    Composite { epsilon: f64, intervals: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Cap on integrand evaluations for a single finite window.
    pub max_nodes: usize,
    /// Half width of the core window placed around the origin (or next to a
    /// finite bound) before tail segments are added.
    pub core_half_width: f64,
    /// Tail segments beyond this distance from the origin are not attempted.
    pub max_cutoff: f64,
    pub backend: QuadratureBackend,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_nodes: 1 << 20,
            core_half_width: 8.0,
            max_cutoff: 1e5,
            backend: QuadratureBackend::LogisticKronrod,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol >= 0.0 && self.rel_tol >= 0.0) || (self.abs_tol == 0.0 && self.rel_tol == 0.0)
        {
            return Err(Error::domain(
                "numerics.abs_tol/rel_tol",
                "must be nonnegative and not both zero",
            ));
        }
        if self.max_nodes < NODES_PER_SEGMENT {
            return Err(Error::domain("numerics.max_nodes", "must be at least 15"));
        }
        if !(self.core_half_width > 0.0 && self.core_half_width.is_finite()) {
            return Err(Error::domain("numerics.core_half_width", "must be positive and finite"));
        }
        if !(self.max_cutoff > self.core_half_width) {
            return Err(Error::domain("numerics.max_cutoff", "must exceed core_half_width"));
        }
        if let QuadratureBackend::Composite { epsilon, intervals } = self.backend {
            if !(epsilon > 0.0 && epsilon < 0.5) || intervals < 2 {
                return Err(Error::domain(
                    "numerics.backend",
                    "composite rule needs 0 < epsilon < 0.5 and at least 2 intervals",
                ));
            }
        }
        Ok(())
    }

    fn tolerance(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// `1 / (1 + exp(-u))` without overflow.
pub fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// `1 - logistic(u)`, accurate where `logistic(u)` rounds to 1.
pub fn logistic_complement(u: f64) -> f64 {
    logistic(-u)
}

/// Log-odds `ln(alpha / (1 - alpha))`.
pub fn logit(alpha: f64) -> f64 {
    (alpha / (1.0 - alpha)).ln()
}

/// Logistic density `alpha(u) (1 - alpha(u))`, the Jacobian of the substitution.
pub fn logistic_weight(u: f64) -> f64 {
    let e = (-u.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

/// Natural log of [`logistic_weight`]; finite for every finite `u`.
pub fn ln_logistic_weight(u: f64) -> f64 {
    -u.abs() - 2.0 * (-u.abs()).exp().ln_1p()
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    abs_value: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        // Largest error first; ties broken by position so the refinement order
        // never depends on heap internals.
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Integration(format!("non-finite integrand {y} at {x}")))
        }
    };
    let fc = eval(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    Ok(Segment {
        a,
        b,
        value,
        err: ((kronrod - gauss) * half).abs(),
        abs_value: abs_sum * half.abs(),
    })
}

/// Global adaptive Gauss-Kronrod over the finite pieces `[edges[i], edges[i+1]]`.
fn adaptive<F: Fn(f64) -> f64>(f: &F, edges: &[f64], tol: Tol, max_nodes: usize) -> Result<f64> {
    let mut heap = BinaryHeap::new();
    let mut done: Vec<Segment> = Vec::new();
    let mut nodes = 0usize;
    let mut value = 0.0;
    let mut err = 0.0;
    let mut abs_value = 0.0;
    for w in edges.windows(2) {
        if w[1] > w[0] {
            let s = kronrod15(f, w[0], w[1])?;
            nodes += NODES_PER_SEGMENT;
            value += s.value;
            err += s.err;
            abs_value += s.abs_value;
            heap.push(s);
        }
    }

    loop {
        let target = tol.abs.max(tol.rel * value.abs());
        let roundoff = 64.0 * f64::EPSILON * abs_value;
        if err <= target.max(roundoff) {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || nodes + 2 * NODES_PER_SEGMENT > max_nodes {
            if nodes + 2 * NODES_PER_SEGMENT > max_nodes {
                return Err(Error::Integration(format!(
                    "refinement exhausted {max_nodes} nodes with error estimate {err:e} \
                     above tolerance {target:e} (worst segment [{}, {}])",
                    worst.a, worst.b
                )));
            }
            // Cannot split further in floating point.
            done.push(worst);
            continue;
        }
        let left = kronrod15(f, worst.a, mid)?;
        let right = kronrod15(f, mid, worst.b)?;
        nodes += 2 * NODES_PER_SEGMENT;
        value += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        abs_value += left.abs_value + right.abs_value - worst.abs_value;
        heap.push(left);
        heap.push(right);
    }

    let mut all: Vec<Segment> = heap.into_vec();
    all.extend(done);
    let total_err: f64 = all.iter().map(|s| s.err).sum();
    let total_abs: f64 = all.iter().map(|s| s.abs_value).sum();
    all.sort_by(|x, y| x.a.total_cmp(&y.a));
    let total = compensated_sum(all.iter().map(|s| s.value));
    let target = tol.abs.max(tol.rel * total.abs());
    if total_err > target.max(64.0 * f64::EPSILON * total_abs) * 1e3 {
        return Err(Error::Integration(format!(
            "error estimate {total_err:e} far above tolerance {target:e}"
        )));
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy)]
struct Tol {
    abs: f64,
    rel: f64,
}

/// Integrates `f` over `[lo, hi]`, either end possibly infinite.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, settings: &QuadratureSettings) -> Result<f64> {
    integrate_with_breaks(f, lo, hi, &[], settings)
}

/// Like [`integrate`], splitting the core window at `breaks` (kinks or
/// discontinuities of `f`). Breaks outside `(lo, hi)` are ignored.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    settings: &QuadratureSettings,
) -> Result<f64> {
    settings.validate()?;
    if lo.is_nan() || hi.is_nan() {
        return Err(Error::domain("bounds", "must not be NaN"));
    }
    if lo == hi {
        return Ok(0.0);
    }
    if lo > hi {
        return integrate_with_breaks(f, hi, lo, breaks, settings).map(|v| -v);
    }
    let width = settings.core_half_width;
    let mut inner: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > lo && *x < hi)
        .collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();

    // Core window: [-W, W] widened around the breaks, clipped to [lo, hi].
    // Whatever lies outside is covered by doubling segments.
    let mut a = -width;
    let mut b = width;
    if let (Some(first), Some(last)) = (inner.first(), inner.last()) {
        a = a.min(first - width);
        b = b.max(last + width);
    }
    if lo >= b {
        a = lo;
        b = hi.min(lo + width);
    } else if hi <= a {
        b = hi;
        a = lo.max(hi - width);
    } else {
        a = a.max(lo);
        b = b.min(hi);
    }
    let mut edges = Vec::with_capacity(inner.len() + 2);
    edges.push(a);
    edges.extend(inner.iter().copied().filter(|x| *x > a && *x < b));
    edges.push(b);

    let core_tol = Tol {
        abs: settings.abs_tol,
        rel: settings.rel_tol,
    };
    let core = adaptive(&f, &edges, core_tol, settings.max_nodes)?;
    let mut parts = vec![core];
    if b < hi {
        let total = compensated_sum(parts.iter().copied());
        parts.push(tail(&f, b, hi, total, settings)?);
    }
    if a > lo {
        let total = compensated_sum(parts.iter().copied());
        parts.push(tail(&f, a, lo, total, settings)?);
    }
    Ok(compensated_sum(parts))
}

/// Sums doubling-width segments from `start` toward `end`. A finite `end` is
/// integrated up to exactly; an infinite one stops once two consecutive
/// increments and the integrand at the cutoff are negligible.
fn tail<F: Fn(f64) -> f64>(
    f: &F,
    start: f64,
    end: f64,
    reference: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    let direction = if end > start { 1.0 } else { -1.0 };
    let bounded = end.is_finite();
    let mut width = settings.core_half_width;
    let mut x = start;
    let mut increments = Vec::new();
    let mut quiet = 0;
    let mut previous: Option<f64> = None;
    loop {
        let total = compensated_sum(increments.iter().copied()) + reference;
        let target = 0.01 * settings.tolerance(total);
        let mut next = x + direction * width;
        let last_segment = bounded && (next - end) * direction >= 0.0;
        if last_segment {
            next = end;
        } else if !bounded && next.abs() > settings.max_cutoff {
            let last = previous.unwrap_or(f64::NAN);
            return Err(Error::Divergent {
                c: f64::NAN,
                detail: format!(
                    "tail past |u| = {} still contributes {last:e} per segment",
                    x.abs()
                ),
            });
        }
        let edges = if direction > 0.0 { [x, next] } else { [next, x] };
        let seg_tol = Tol {
            abs: target,
            rel: 0.01 * settings.rel_tol,
        };
        let inc = adaptive(f, &edges, seg_tol, settings.max_nodes).map_err(|e| match e {
            Error::Integration(msg) if !bounded => Error::Divergent {
                c: f64::NAN,
                detail: format!("tail segment [{}, {}]: {msg}", edges[0], edges[1]),
            },
            other => other,
        })?;
        increments.push(inc);
        if last_segment {
            break;
        }
        let edge_value = f(next);
        if !edge_value.is_finite() {
            return Err(Error::Divergent {
                c: f64::NAN,
                detail: format!("integrand overflowed at {next}"),
            });
        }
        if !bounded {
            if inc.abs() <= target && edge_value.abs() <= TAIL_INTEGRAND_FLOOR.max(target) {
                quiet += 1;
                if quiet >= 2 {
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        previous = Some(inc);
        x = next;
        width *= 2.0;
    }
    Ok(compensated_sum(increments))
}

/// Composite Simpson rule with `intervals` (rounded up to even) panels.
pub fn composite_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> Result<f64> {
    let n = if intervals.is_multiple_of(2) { intervals } else { intervals + 1 }.max(2);
    let h = (b - a) / n as f64;
    let mut terms = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let x = a + h * i as f64;
        let y = f(x);
        if !y.is_finite() {
            return Err(Error::Integration(format!("non-finite integrand {y} at {x}")));
        }
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        terms.push(w * y);
    }
    Ok(compensated_sum(terms) * h / 3.0)
}
