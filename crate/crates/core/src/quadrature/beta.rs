//! Complete and incomplete beta functions.
//!
//! The log of the prefactor `x^a (1−x)^b / B(a, b)` is what limits accuracy
//! for large parameters. When `a` or `b` is at least [`STIRLING_MIN`] the
//! Stirling series is expanded around `x = a/(a+b)` so that the large
//! logarithms cancel analytically instead of in floating point.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, invalid};
use crate::Result;

/// Parameters of a beta distribution, both strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BetaParams {
    a: f64,
    b: f64,
}

impl BetaParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(invalid!("beta parameters must be positive and finite (got a={a}, b={b})"));
        }
        Ok(BetaParams { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `(b, a)`.
    pub fn swapped(&self) -> Self {
        BetaParams { a: self.b, b: self.a }
    }
}

const STIRLING_MIN: f64 = 10.0;
const CF_MAX_ITER: usize = 20_000;
const CF_EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln Γ(x) − [(x − ½) ln x − x + ½ ln 2π]`, valid for `x ≥ 10`.
fn stirling_correction(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    // Bernoulli terms B_{2n} / (2n(2n−1)) through n = 8.
    let coeffs = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
    ];
    let mut acc = 0.0;
    for c in coeffs.iter().rev() {
        acc = acc * r2 + c;
    }
    acc * r
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln B(a, b)`.
pub fn ln_beta(p: BetaParams) -> f64 {
    let (a, b) = (p.a, p.b);
    let s = a + b;
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if lo >= STIRLING_MIN {
        -a * (b / a).ln_1p() - b * (a / b).ln_1p() + 0.5 * (s / (a * b)).ln() + HALF_LN_2PI
            + stirling_correction(a)
            + stirling_correction(b)
            - stirling_correction(s)
    } else if hi >= STIRLING_MIN {
        // ln Γ(lo) + [ln Γ(hi) − ln Γ(hi + lo)]
        ln_gamma(lo) - (hi - 0.5) * (lo / hi).ln_1p() - lo * s.ln() + lo + stirling_correction(hi)
            - stirling_correction(s)
    } else {
        (libm::tgamma(a) * libm::tgamma(b) / libm::tgamma(s)).ln()
    }
}

/// `B(a, b) = Γ(a)Γ(b)/Γ(a+b)`.
pub fn beta_complete(p: BetaParams) -> f64 {
    let (a, b) = (p.a, p.b);
    if a < STIRLING_MIN && b < STIRLING_MIN {
        libm::tgamma(a) * libm::tgamma(b) / libm::tgamma(a + b)
    } else {
        ln_beta(p).exp()
    }
}

/// `ln[x^a y^b / B(a, b)]` with `y = 1 − x` supplied by the caller.
fn ln_prefactor(a: f64, b: f64, x: f64, y: f64) -> f64 {
    let s = a + b;
    // e = x·s − a = b − y·s; take whichever side of ½ is exact.
    let e = if x <= 0.5 { libm::fma(x, s, -a) } else { libm::fma(-y, s, b) };
    if a >= STIRLING_MIN && b >= STIRLING_MIN {
        a * (e / a).ln_1p() + b * (-e / b).ln_1p() + 0.5 * (a * b / s).ln() - HALF_LN_2PI
            - stirling_correction(a)
            - stirling_correction(b)
            + stirling_correction(s)
    } else if a >= STIRLING_MIN {
        a * (e / a).ln_1p() - 0.5 * (b / a).ln_1p() + b * (y * s).ln() - b - ln_gamma(b)
            - stirling_correction(a)
            + stirling_correction(s)
    } else if b >= STIRLING_MIN {
        b * (-e / b).ln_1p() - 0.5 * (a / b).ln_1p() + a * (x * s).ln() - a - ln_gamma(a)
            - stirling_correction(b)
            + stirling_correction(s)
    } else {
        a * ln_side(x, y) + b * ln_side(y, x) - ln_beta(BetaParams { a, b })
    }
}

/// `ln x` for `x = 1 − y`. Of the pair, only the side below ½ is sure to be
/// exact, so the other goes through `ln_1p`.
fn ln_side(x: f64, y: f64) -> f64 {
    if x > 0.5 {
        (-y).ln_1p()
    } else {
        x.ln()
    }
}

/// `x^a` for `x = 1 − y`, as [`ln_side`].
fn pow_side(x: f64, y: f64, a: f64) -> f64 {
    if x > 0.5 {
        (a * (-y).ln_1p()).exp()
    } else {
        x.powf(a)
    }
}

const DIRECT_MIN: f64 = 1e-280;

/// `x^a y^b / B(a, b)`. Unless both parameters are large the powers are
/// formed directly, which keeps the relative error at a few ulps instead of
/// `ε · |ln value|`.
fn prefactor(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if a < STIRLING_MIN || b < STIRLING_MIN {
        let (xa, yb) = (pow_side(x, y, a), pow_side(y, x, b));
        let beta = beta_complete(BetaParams { a, b });
        if xa > DIRECT_MIN && yb > DIRECT_MIN && beta.is_finite() && beta > DIRECT_MIN {
            return xa * yb / beta;
        }
    }
    ln_prefactor(a, b, x, y).exp()
}

/// Density of the beta distribution at `x` (with `y = 1 − x`).
pub(crate) fn density(p: BetaParams, x: f64, y: f64) -> f64 {
    if x <= 0.0 || y <= 0.0 {
        return 0.0;
    }
    prefactor(p.a, p.b, x, y) / (x * y)
}

/// Modified Lentz evaluation of the continued fraction for `I_x(a, b)`.
fn continued_fraction(a: f64, b: f64, x: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= CF_EPS {
            return Ok(h);
        }
    }
    Err(crate::Error::NonConvergence(alloc::format!(
        "incomplete beta continued fraction for a={a}, b={b}, x={x}"
    )))
}

/// Power series `Σ (1−b)_n x^n / (n! (a+n))`, for small `x·b`.
fn power_series(a: f64, b: f64, x: f64) -> Option<f64> {
    let mut term = 1.0;
    let mut sum = 1.0 / a;
    for n in 1..500 {
        let nf = n as f64;
        term *= (nf - b) * x / nf;
        let add = term / (a + nf);
        sum += add;
        if add.abs() <= 1e-17 * sum.abs() {
            return Some(sum);
        }
    }
    None
}

fn use_series(b: f64, x: f64) -> bool {
    x <= 0.1 && x * (b + 1.0) <= 0.5
}

/// Regularized incomplete beta `I_x(a, b)` together with `1 − I_x(a, b)`,
/// each computed without cancellation on its small side.
pub fn regularized_pair(p: BetaParams, x: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&x) {
        return Err(domain!("incomplete beta argument {x} outside [0, 1]"));
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x == 1.0 {
        return Ok((1.0, 0.0));
    }
    let y = 1.0 - x;
    let (a, b) = (p.a, p.b);
    if x < (a + 1.0) / (a + b + 2.0) {
        let v = lower_tail(a, b, x, y)?;
        Ok((v, 1.0 - v))
    } else {
        let v = lower_tail(b, a, y, x)?;
        Ok((1.0 - v, v))
    }
}

fn lower_tail(a: f64, b: f64, x: f64, y: f64) -> Result<f64> {
    if use_series(b, x) {
        if let Some(s) = power_series(a, b, x) {
            // x^a / B(a, b) = prefactor / y^b
            let scale = if b < STIRLING_MIN {
                prefactor(a, b, x, y) / pow_side(y, x, b)
            } else {
                (ln_prefactor(a, b, x, y) - b * ln_side(y, x)).exp()
            };
            return Ok(scale * s);
        }
    }
    Ok(prefactor(a, b, x, y) * continued_fraction(a, b, x)? / a)
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn regularized_incomplete_beta(p: BetaParams, x: f64) -> Result<f64> {
    regularized_pair(p, x).map(|(v, _)| v)
}

/// `∫₀^x u^{a−1} (1−u)^{b−1} du`.
pub fn incomplete_beta(p: BetaParams, x: f64) -> Result<f64> {
    let (lower, _) = regularized_pair(p, x)?;
    Ok(lower * beta_complete(p))
}
