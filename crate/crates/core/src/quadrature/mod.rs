//! Haar-measure integrals and the beta function.
//!
//! The Haar measure on `Met` is normalized as
//!
//! ```text
//! ∫ f dμ = (1/4π) ∫₀^{4π} ∫_H f(n_x a_y κ_t) dx dy / y² dt
//!        = (1/4π) ∫₀^{4π} ∫₀^∞ ∫₀^{4π} f(κ_{θ₁} h_t κ_{θ₂}) sinh(2t) dθ₁ dt dθ₂.
//! ```

mod beta;
mod gauss;

use core::f64::consts::{PI, TAU};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

pub use beta::{
    beta_complete, incomplete_beta, ln_beta, ln_gamma, regularized_incomplete_beta, regularized_pair, BetaParams,
};
pub(crate) use beta::density;
pub use gauss::{adaptive, pairwise_sum, periodic_trapezoid, GaussLegendre, Integral};

use crate::coefficients::{lift, matrix_coefficient, Weight};
use crate::error::invalid;
use crate::metgroup::{CartanCoords, HalfInt, IwasawaCoords, MetElement, FOUR_PI};
use crate::Result;

impl BetaParams {
    /// `(k/2 + 1, m/2 − 1)`; needs `m > 2`.
    pub fn from_weight(w: Weight) -> Result<Self> {
        if w.m().twice() <= 4 {
            return Err(invalid!("m = {} must exceed 2", w.m()));
        }
        BetaParams::new(0.5 * w.k() as f64 + 1.0, 0.5 * w.m().value() - 1.0)
    }
}

/// Quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadratureSpec {
    /// Cartan cutoff `T`; `None` picks the smallest `T ≥ 40` whose tail
    /// bound is below `tolerance / 10`.
    pub truncation: Option<f64>,
    /// Gauss–Legendre points per panel.
    pub nodes: usize,
    /// Absolute tolerance of the adaptive integration.
    pub tolerance: f64,
    /// Integrate `|F|` over all three Cartan coordinates instead of folding
    /// in the angular integrals.
    pub full_3d: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { truncation: None, nodes: 20, tolerance: 1e-12, full_3d: false }
    }
}

const MIN_CUTOFF: f64 = 40.0;

impl QuadratureSpec {
    pub fn new(truncation: Option<f64>, nodes: usize, tolerance: f64) -> Result<Self> {
        let spec = QuadratureSpec { truncation, nodes, tolerance, full_3d: false };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_full_3d(mut self, full_3d: bool) -> Self {
        self.full_3d = full_3d;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 8 {
            return Err(invalid!("quadrature needs at least 8 nodes (got {})", self.nodes));
        }
        if !(self.tolerance > 0.0) {
            return Err(invalid!("quadrature tolerance must be positive (got {})", self.tolerance));
        }
        if let Some(t) = self.truncation {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid!("Cartan cutoff must be positive and finite (got {t})"));
            }
        }
        Ok(())
    }

    fn rule(&self) -> GaussLegendre {
        GaussLegendre::new(self.nodes)
    }
}

/// Bound on `(1/4π)∫∫∫_{t > T} |F_{k,m}| sinh(2t)`: the integrand is
/// `8π tanh^{k+1} sech^{m−2} ≤ 8π tanh sech^{m−2}`, whose tail integral is
/// `8π cosh(T)^{2−m} / (m − 2)`. Exact at `k = 0`.
pub fn l1_tail_bound(m: HalfInt, cutoff: f64) -> f64 {
    let p = m.value() - 2.0;
    let ln_cosh = cutoff + (-2.0 * cutoff).exp().ln_1p() - core::f64::consts::LN_2;
    8.0 * PI * (-p * ln_cosh).exp() / p
}

/// `max(40, T₀)`, where `8π (2e^{−T₀})^{m−2} / (m − 2)`, which dominates
/// the tail bound, equals a tenth of `tol`.
fn auto_cutoff(m: HalfInt, tol: f64) -> f64 {
    let p = m.value() - 2.0;
    let t = core::f64::consts::LN_2 - (0.1 * tol * p / (8.0 * PI)).ln() / p;
    t.max(MIN_CUTOFF)
}

/// `4π B(k/2 + 1, m/2 − 1)`, the exact L¹ norm of `F_{k,m}`.
pub fn l1_closed_form(w: Weight) -> Result<f64> {
    Ok(4.0 * PI * beta_complete(BetaParams::from_weight(w)?))
}

/// A truncated L¹ norm with its tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct L1Norm {
    /// Integral over `t ≤ cutoff`.
    pub value: f64,
    /// Upper bound on the neglected part.
    pub tail_bound: f64,
    pub cutoff: f64,
    /// Error estimate of the adaptive quadrature.
    pub quadrature_error: f64,
}

/// `∫ |F_{k,m}| dμ` over the Cartan region `t ≤ T`.
pub fn haar_l1(w: Weight, spec: &QuadratureSpec) -> Result<L1Norm> {
    spec.validate()?;
    if w.m().twice() <= 4 {
        return Err(invalid!("F_{{k,m}} is integrable only for m > 2 (got m = {})", w.m()));
    }
    let cutoff = spec.truncation.unwrap_or_else(|| auto_cutoff(w.m(), spec.tolerance));
    let rule = spec.rule();
    let r = if spec.full_3d {
        let n = spec.nodes;
        let radial = |t: f64| {
            let angular = periodic_trapezoid(
                |a| {
                    periodic_trapezoid(
                        |b| {
                            let s = MetElement::from_cartan(CartanCoords { theta1: a, t, theta2: b });
                            matrix_coefficient(w, &s).norm()
                        },
                        FOUR_PI,
                        n,
                    )
                },
                FOUR_PI,
                n,
            );
            angular * (2.0 * t).sinh() / FOUR_PI
        };
        adaptive(&rule, radial, 0.0, cutoff, spec.tolerance)
    } else {
        // (1/4π)(4π)² |F| sinh 2t = 4π · 2 tanh^{k+1} t sech^{m−2} t
        let k = w.k() as i32;
        let p = w.m().value() - 2.0;
        let integrand = |t: f64| {
            let e = (-2.0 * t).exp();
            let tanh = -(-2.0 * t).exp_m1() / (1.0 + e);
            let sech = 2.0 * (-t).exp() / (1.0 + e);
            8.0 * PI * tanh.powi(k + 1) * sech.powf(p)
        };
        adaptive(&rule, integrand, 0.0, cutoff, spec.tolerance)
    };
    Ok(L1Norm {
        value: r.value,
        tail_bound: l1_tail_bound(w.m(), cutoff),
        cutoff,
        quadrature_error: r.error,
    })
}

const L2_P: f64 = 20.0;
const L2_Q_LO: f64 = -40.0;
const L2_Q_HI: f64 = 30.0;
const L2_T_NODES: usize = 3;

/// Both sides of `∫_Met |F_f|² dμ = ∫_H |f(z)|² Im(z)^m dv`.
///
/// The left side evaluates the lift at group elements `n_x a_y κ_t` with
/// `x = sinh p`, `y = e^q` and integrates over `t` as well. The right side
/// evaluates `f` directly with `x = y sinh p`, `y = e^q` and a different
/// rule. The regions `|p| > 20`, `q < −40` and `q > 30` are dropped.
pub fn haar_l2_lift_identity<F>(f: F, w: Weight, spec: &QuadratureSpec) -> Result<(f64, f64)>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    spec.validate()?;
    let tol = spec.tolerance;
    let lhs_rule = spec.rule();
    let rhs_rule = GaussLegendre::new(spec.nodes + 5);
    let m = w.m().value();

    let lhs = {
        let outer = |q: f64| {
            let y = q.exp();
            let inner = |p: f64| {
                let x = p.sinh();
                let dens = periodic_trapezoid(
                    |t| {
                        let s = MetElement::from_iwasawa(IwasawaCoords { x, y, t });
                        lift(&f, w, &s).map(|v| v.norm_sqr()).unwrap_or(f64::NAN)
                    },
                    FOUR_PI,
                    L2_T_NODES,
                ) / FOUR_PI;
                dens * p.cosh() / y
            };
            adaptive(&lhs_rule, inner, -L2_P, L2_P, tol).value
        };
        adaptive(&lhs_rule, outer, L2_Q_LO, L2_Q_HI, tol).value
    };

    let rhs = {
        let outer = |q: f64| {
            let y = q.exp();
            let inner = |p: f64| {
                let z = Complex64::new(y * p.sinh(), y);
                f(z).map(|v| v.norm_sqr()).unwrap_or(f64::NAN) * p.cosh()
            };
            adaptive(&rhs_rule, inner, -L2_P, L2_P, tol).value * y.powf(m)
        };
        adaptive(&rhs_rule, outer, L2_Q_LO, L2_Q_HI, tol).value
    };
    if lhs.is_nan() || rhs.is_nan() {
        return Err(invalid!("function could not be evaluated on the integration region"));
    }
    Ok((lhs, rhs))
}

/// `4∫_D w^j conj(w)^k (1 − |w|²)^{m−2} du dv` in polar coordinates
/// `w = sin φ · e^{iθ}`.
pub fn disk_inner_product(j: u32, k: u32, m: HalfInt) -> Result<Complex64> {
    if m.twice() < 3 {
        return Err(invalid!("disk inner product needs m >= 3/2 (got {m})"));
    }
    let n = (j + k + 8) as usize;
    let d = j as f64 - k as f64;
    let re = periodic_trapezoid(|t| (d * t).cos(), TAU, n);
    let im = periodic_trapezoid(|t| (d * t).sin(), TAU, n);
    let power = (j + k + 1) as i32;
    let c = 2.0 * m.value() - 3.0;
    let rule = GaussLegendre::new(20);
    let radial = adaptive(
        &rule,
        |phi: f64| {
            let (s, co) = phi.sin_cos();
            s.powi(power) * if c == 0.0 { 1.0 } else { co.powf(c) }
        },
        0.0,
        0.5 * PI,
        1e-15,
    )
    .value;
    Ok(Complex64::new(re, im) * (4.0 * radial))
}
