//! The median `M(a, b)` of the beta distribution: the unique `x ∈ (0, 1)`
//! with `I_x(a, b) = 1/2`.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::invalid;
use crate::quadrature::{density, regularized_pair, BetaParams};
use crate::{Error, Result};

/// Default parameter of [`median_approx`].
pub const DEFAULT_ALPHA: f64 = 0.3131;

const RESIDUAL_TOL: f64 = 1e-13;
const MAX_BISECTIONS: u32 = 80;
const MAX_NEWTON: u32 = 8;
const FLOOR: f64 = 1e-300;

/// A solved median.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MedianResult {
    pub value: f64,
    /// `1 − value`, computed directly when that is the small side.
    pub complement: f64,
    /// `|I_value(a, b) − 1/2|` at the solved point.
    pub residual: f64,
    pub iterations: u32,
}

/// `M(a, b)`, by bisection on a bracket followed by Newton steps.
///
/// Only `a ≤ b` is solved directly, where the median lies in `(0, 1/2]`;
/// otherwise `M(a, b) = 1 − M(b, a)`.
pub fn median(p: BetaParams) -> Result<MedianResult> {
    if p.a() > p.b() {
        let r = median(p.swapped())?;
        return Ok(MedianResult { value: r.complement, complement: r.value, ..r });
    }
    if p.a() == p.b() {
        return Ok(MedianResult { value: 0.5, complement: 0.5, residual: 0.0, iterations: 0 });
    }
    let (mut lo, mut hi) = median_bounds(p).unwrap_or((FLOOR, 0.5));
    let f = |x: f64| regularized_pair(p, x).map(|(v, _)| v - 0.5);

    let mut iterations = 0;
    let mut x = 0.5 * (lo + hi);
    let mut fx = f(x)?;
    while iterations < MAX_BISECTIONS {
        iterations += 1;
        if fx.abs() <= 0.01 * RESIDUAL_TOL {
            break;
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= 1e-7 * hi {
            break;
        }
        x = if hi > 4.0 * lo { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        fx = f(x)?;
    }

    for _ in 0..MAX_NEWTON {
        let pdf = density(p, x, 1.0 - x);
        if !(pdf > 0.0) || fx == 0.0 {
            break;
        }
        iterations += 1;
        let next = x - fx / pdf;
        let next = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        let fnext = f(next)?;
        if fnext > 0.0 {
            hi = next;
        } else {
            lo = next;
        }
        let moved = (next - x).abs();
        if fnext.abs() < fx.abs() {
            x = next;
            fx = fnext;
        }
        if moved <= 4.0 * f64::EPSILON * x {
            break;
        }
    }

    let residual = fx.abs();
    if !(residual <= RESIDUAL_TOL) || !(x > 0.0 && x < 1.0) {
        return Err(Error::NonConvergence(alloc::format!(
            "median of beta({:?}, {:?}) reached residual {residual:e}",
            p.a(),
            p.b()
        )));
    }
    Ok(MedianResult { value: x, complement: 1.0 - x, residual, iterations })
}

/// Mean–mode bracket: `((a−1)/(a+b−2), a/(a+b))` for `a < b` and the
/// mirrored interval for `a > b`. Needs `a, b > 1` and `a ≠ b`.
pub fn median_bounds(p: BetaParams) -> Result<(f64, f64)> {
    let (a, b) = (p.a(), p.b());
    if a <= 1.0 || b <= 1.0 || a == b {
        return Err(invalid!("median bounds need a, b > 1 and a != b (got a={a}, b={b})"));
    }
    let mode = (a - 1.0) / (a + b - 2.0);
    let mean = a / (a + b);
    Ok(if a < b { (mode, mean) } else { (mean, mode) })
}

/// `M_α(a, b) = (a − α)/(a + b − 2α)`.
pub fn median_approx(p: BetaParams, alpha: f64) -> Result<f64> {
    let (a, b) = (p.a(), p.b());
    if a <= 1.0 || b <= 1.0 {
        return Err(invalid!("median approximation needs a, b > 1 (got a={a}, b={b})"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid!("alpha must lie in (0, 1) (got {alpha})"));
    }
    Ok((a - alpha) / (a + b - 2.0 * alpha))
}
