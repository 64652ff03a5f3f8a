//! The metaplectic group `Met` and its disk realization.
//!
//! An element of `Met` is a pair `(g, η)` with `g ∈ SL2(ℝ)` and `η` a
//! holomorphic square root of `z ↦ cz + d` on the upper half-plane. Since
//! `cz + d` maps the upper half-plane into an open half-plane (or is a
//! non-zero constant), `branch_sqrt(cz + d)` is itself holomorphic there and
//! the only two choices of `η` are `±branch_sqrt(cz + d)`. We therefore
//! store the matrix together with a [`Sign`].

use core::f64::consts::{PI, TAU};
use core::fmt;
use core::ops::Mul;

use num_complex::Complex64;
// Unused whenever std is linked into the build: inherent float methods win.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::invalid;
use crate::Result;

/// Period of the maximal compact subgroup `K = {κ_t}` of `Met`.
pub const FOUR_PI: f64 = 4.0 * PI;

/// Default tolerance on determinant and matrix comparisons.
pub const DEFAULT_TOL: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Square root with values in `{Re > 0} ∪ {Re = 0, Im ≥ 0}`.
///
/// Negative reals (with either sign of zero imaginary part) map to the
/// positive imaginary axis; `0 ↦ 0`.
pub fn branch_sqrt(z: Complex64) -> Complex64 {
    if z.re == 0.0 && z.im == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let r = z.norm();
    let w = ((z.re.abs() + r) * 0.5).sqrt();
    if z.re >= 0.0 {
        Complex64::new(w, z.im / (2.0 * w))
    } else {
        // -0.0 >= 0.0 holds, so a negative real always lands on +i·ℝ.
        let im = if z.im >= 0.0 { w } else { -w };
        Complex64::new(z.im.abs() / (2.0 * w), im)
    }
}

/// `z^{twice/2}` under the convention `z^m := (√z)^{2m}`.
pub fn half_power(z: Complex64, twice: i32) -> Complex64 {
    branch_sqrt(z).powi(twice)
}

/// `x mod p` in `[0, p]` for `p > 0`.
pub(crate) fn rem_euclid(x: f64, p: f64) -> f64 {
    let r = libm::fmod(x, p);
    if r < 0.0 {
        r + p
    } else {
        r
    }
}

/// Reduce an angle to `[0, period)`.
pub fn reduce_angle(t: f64, period: f64) -> f64 {
    let r = rem_euclid(t, period);
    // rem_euclid can round up to `period` for tiny negative inputs.
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Distance between two angles on the circle `ℝ / period·ℤ`.
pub fn circular_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = reduce_angle(a - b, period);
    d.min(period - d)
}

/// Exact half-integer, stored as `2m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HalfInt {
    twice: i64,
}

impl HalfInt {
    pub const fn from_twice(twice: i64) -> Self {
        HalfInt { twice }
    }

    pub const fn from_int(n: i64) -> Self {
        HalfInt { twice: 2 * n }
    }

    /// Parse a real value that must be an exact multiple of ½.
    pub fn from_f64(value: f64) -> Result<Self> {
        let twice = 2.0 * value;
        if !twice.is_finite() || twice.fract() != 0.0 || twice.abs() > (1u64 << 52) as f64 {
            return Err(invalid!("{value} is not a half-integer"));
        }
        Ok(HalfInt { twice: twice as i64 })
    }

    pub const fn twice(self) -> i64 {
        self.twice
    }

    pub fn value(self) -> f64 {
        self.twice as f64 * 0.5
    }

    /// True when `2m` is odd, i.e. the weight is genuinely half-integral.
    pub const fn is_genuine(self) -> bool {
        self.twice % 2 != 0
    }

    pub const fn add_int(self, n: i64) -> Self {
        HalfInt { twice: self.twice + 2 * n }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// Selects `η(i) = sign · branch_sqrt(c·i + d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// Iwasawa coordinates `(x, y, t) ↦ n_x a_y κ_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IwasawaCoords {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl IwasawaCoords {
    /// `t` is reduced to `[0, 4π)`.
    pub fn new(x: f64, y: f64, t: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() || !t.is_finite() {
            return Err(invalid!("Iwasawa coordinates need finite x, t and y > 0 (got x={x}, y={y}, t={t})"));
        }
        Ok(IwasawaCoords { x, y, t: reduce_angle(t, FOUR_PI) })
    }
}

/// Cartan coordinates `(θ₁, t, θ₂) ↦ κ_{θ₁} h_t κ_{θ₂}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CartanCoords {
    pub theta1: f64,
    pub t: f64,
    pub theta2: f64,
}

impl CartanCoords {
    /// Angles are reduced to `[0, 4π)`.
    pub fn new(theta1: f64, t: f64, theta2: f64) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() || !theta1.is_finite() || !theta2.is_finite() {
            return Err(invalid!("Cartan coordinates need finite angles and t >= 0 (got t={t})"));
        }
        Ok(CartanCoords {
            theta1: reduce_angle(theta1, FOUR_PI),
            t,
            theta2: reduce_angle(theta2, FOUR_PI),
        })
    }
}

/// A point of the metaplectic group.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetElement {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    sign: Sign,
}

impl MetElement {
    /// Checked constructor; `|ad − bc − 1|` must not exceed [`DEFAULT_TOL`].
    pub fn new(matrix: [[f64; 2]; 2], sign: Sign) -> Result<Self> {
        Self::with_tolerance(matrix, sign, DEFAULT_TOL)
    }

    pub fn with_tolerance(matrix: [[f64; 2]; 2], sign: Sign, tol: f64) -> Result<Self> {
        let [[a, b], [c, d]] = matrix;
        let det = a * d - b * c;
        if !((det - 1.0).abs() <= tol) {
            return Err(invalid!("determinant {det} differs from 1 by more than {tol}"));
        }
        Ok(MetElement { a, b, c, d, sign })
    }

    /// Element whose root takes the value `eta_i` at `i`. The sign is read off
    /// by comparing with `branch_sqrt(ci + d)`; `eta_i` only needs to be
    /// closer to one of the two roots than to the other.
    pub fn from_eta(matrix: [[f64; 2]; 2], eta_i: Complex64) -> Self {
        let [[a, b], [c, d]] = matrix;
        let root = branch_sqrt(Complex64::new(d, c));
        let sign = if (eta_i * root.conj()).re >= 0.0 { Sign::Plus } else { Sign::Minus };
        MetElement { a, b, c, d, sign }
    }

    pub(crate) const fn raw(a: f64, b: f64, c: f64, d: f64, sign: Sign) -> Self {
        MetElement { a, b, c, d, sign }
    }

    pub const fn identity() -> Self {
        MetElement::raw(1.0, 0.0, 0.0, 1.0, Sign::Plus)
    }

    /// `κ_t`: rotation by `t` with `η(i) = e^{it/2}`.
    pub fn kappa(t: f64) -> Self {
        let t = reduce_angle(t, FOUR_PI);
        let (s, c) = t.sin_cos();
        MetElement::from_eta([[c, -s], [s, c]], Complex64::from_polar(1.0, 0.5 * t))
    }

    /// `h_t = (diag(e^t, e^{-t}), e^{-t/2})`.
    pub fn h(t: f64) -> Self {
        MetElement::raw(t.exp(), 0.0, 0.0, (-t).exp(), Sign::Plus)
    }

    /// `n_x`: translation `z ↦ z + x`.
    pub fn n(x: f64) -> Self {
        MetElement::raw(1.0, x, 0.0, 1.0, Sign::Plus)
    }

    /// `a_y = (diag(y^{1/2}, y^{-1/2}), y^{-1/4})`.
    pub fn a(y: f64) -> Self {
        let s = y.sqrt();
        MetElement::raw(s, 0.0, 0.0, 1.0 / s, Sign::Plus)
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.a, self.b], [self.c, self.d]]
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// The other preimage of the same matrix, i.e. `κ_{2π} σ`.
    pub fn flip_sheet(&self) -> Self {
        MetElement { sign: self.sign.flip(), ..*self }
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// `j(g, z) = cz + d`.
    pub fn j(&self, z: Complex64) -> Complex64 {
        z * self.c + self.d
    }

    /// `η_σ(z) = sign · branch_sqrt(cz + d)`.
    pub fn eta(&self, z: Complex64) -> Complex64 {
        branch_sqrt(self.j(z)) * self.sign.value()
    }

    pub fn eta_i(&self) -> Complex64 {
        self.eta(I)
    }

    /// Fractional-linear action `σ.z = (az + b)/(cz + d)`.
    /// `g.z`. The imaginary part is formed as `Im z / |cz + d|²`, which
    /// keeps it positive even when the real part suffers cancellation.
    pub fn act(&self, z: Complex64) -> Complex64 {
        let j = self.j(z);
        let q = j.norm_sqr();
        let re = ((z * self.a + self.b) * j.conj()).re / q;
        Complex64::new(re, z.im / q)
    }

    pub fn multiply(&self, other: &MetElement) -> MetElement {
        let a = self.a * other.a + self.b * other.c;
        let b = self.a * other.b + self.b * other.d;
        let c = self.c * other.a + self.d * other.c;
        let d = self.c * other.b + self.d * other.d;
        // η(i) = η₁(g₂.i)·η₂(i). Both roots on the right are of the form
        // sign·branch_sqrt(·), so only the unsigned product needs comparing.
        let unsigned = branch_sqrt(self.j(other.act(I))) * branch_sqrt(other.j(I));
        let root = branch_sqrt(Complex64::new(d, c));
        let agree = if (unsigned * root.conj()).re >= 0.0 { Sign::Plus } else { Sign::Minus };
        MetElement { a, b, c, d, sign: agree.times(self.sign.times(other.sign)) }
    }

    pub fn inverse(&self) -> MetElement {
        let (a, b, c, d) = (self.d, -self.b, -self.c, self.a);
        // η_{σ⁻¹}(z) = 1 / η_σ(g⁻¹.z).
        let w = (I * a + b) / (I * c + d);
        let unsigned = branch_sqrt(self.j(w)).inv();
        let root = branch_sqrt(Complex64::new(d, c));
        let agree = if (unsigned * root.conj()).re >= 0.0 { Sign::Plus } else { Sign::Minus };
        MetElement { a, b, c, d, sign: agree.times(self.sign) }
    }

    pub fn from_iwasawa(coords: IwasawaCoords) -> MetElement {
        let IwasawaCoords { x, y, t } = coords;
        let sy = y.sqrt();
        let (s, c) = t.sin_cos();
        let matrix = [[sy * c + x * s / sy, -sy * s + x * c / sy], [s / sy, c / sy]];
        let eta = Complex64::from_polar(y.powf(-0.25), 0.5 * t);
        MetElement::from_eta(matrix, eta)
    }

    pub fn to_iwasawa(&self) -> IwasawaCoords {
        let z = self.act(I);
        let y = z.im;
        let phase = self.eta_i() * y.powf(0.25);
        let half = reduce_angle(phase.arg(), TAU);
        IwasawaCoords { x: z.re, y, t: reduce_angle(2.0 * half, FOUR_PI) }
    }

    pub fn from_cartan(coords: CartanCoords) -> MetElement {
        MetElement::kappa(coords.theta1) * MetElement::h(coords.t) * MetElement::kappa(coords.theta2)
    }

    /// Singular-value decomposition lifted to `Met`.
    ///
    /// Writing `g = p·I + s·J + q·diag(1,−1) + r·offdiag(1,1)` gives
    /// `cosh t = hypot(p, s)` and `sinh t = hypot(q, r)`; the angles come
    /// from the conformal and anticonformal parts. At `t = 0` the rotation
    /// is absorbed into `θ₁` and `θ₂ = 0`.
    pub fn to_cartan(&self) -> CartanCoords {
        let p = 0.5 * (self.a + self.d);
        let q = 0.5 * (self.a - self.d);
        let r = 0.5 * (self.b + self.c);
        let s = 0.5 * (self.c - self.b);
        let sinh_t = q.hypot(r);
        let t = sinh_t.asinh();
        let alpha = s.atan2(p);
        let (mut theta1, theta2) = if sinh_t == 0.0 {
            (alpha, 0.0)
        } else {
            let beta = r.atan2(q);
            (0.5 * (alpha + beta), 0.5 * (alpha - beta))
        };
        let trial = MetElement::from_cartan(CartanCoords {
            theta1: reduce_angle(theta1, FOUR_PI),
            t,
            theta2: reduce_angle(theta2, FOUR_PI),
        });
        if trial.sign != self.sign {
            theta1 += TAU;
        }
        CartanCoords {
            theta1: reduce_angle(theta1, FOUR_PI),
            t,
            theta2: reduce_angle(theta2, FOUR_PI),
        }
    }

    /// `√(a² + b² + c² + d²)`.
    pub fn frobenius_norm(&self) -> f64 {
        (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d).sqrt()
    }

    /// The `C`-conjugate `σ^C` in the disk realization.
    pub fn cayley(&self) -> DiskElement {
        // g_C = (1/2i)[[1, −i], [1, i]], g_{C⁻¹} = [[i, i], [−1, 1]].
        let half_inv_i = Complex64::new(0.0, -0.5);
        let gc = [
            [half_inv_i, half_inv_i * -I],
            [half_inv_i, half_inv_i * I],
        ];
        let gci = [[I, I], [Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)]];
        let g = [
            [Complex64::new(self.a, 0.0), Complex64::new(self.b, 0.0)],
            [Complex64::new(self.c, 0.0), Complex64::new(self.d, 0.0)],
        ];
        let matrix = mat_mul(&mat_mul(&gc, &g), &gci);
        // At w = 0: g_{C⁻¹}.0 = i and η_{C⁻¹}(0) = 1.
        let gz = self.act(I);
        let eta_c = branch_sqrt((gz + I) / (I * 2.0));
        DiskElement { matrix, eta0: eta_c * self.eta_i() }
    }

    /// Entrywise and sign comparison.
    pub fn approx_eq(&self, other: &MetElement, tol: f64) -> bool {
        self.sign == other.sign && self.matrix_distance(other) <= tol
    }

    pub fn matrix_distance(&self, other: &MetElement) -> f64 {
        (self.a - other.a)
            .abs()
            .max((self.b - other.b).abs())
            .max((self.c - other.c).abs())
            .max((self.d - other.d).abs())
    }
}

impl Mul for MetElement {
    type Output = MetElement;

    fn mul(self, rhs: MetElement) -> MetElement {
        self.multiply(&rhs)
    }
}

impl Mul for &MetElement {
    type Output = MetElement;

    fn mul(self, rhs: &MetElement) -> MetElement {
        self.multiply(rhs)
    }
}

type CMat = [[Complex64; 2]; 2];

fn mat_mul(x: &CMat, y: &CMat) -> CMat {
    [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]
}

/// An element of the disk realization `SU(1,1)~`: a matrix in `SU(1,1)`
/// together with the value at `0` of the holomorphic root of `j(g, w)`.
///
/// On the disk `j(g, w)/j(g, 0) = 1 + (c/d)w` has positive real part, so
/// the root continues holomorphically as `η(0)·branch_sqrt(1 + (c/d)w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskElement {
    pub matrix: [[Complex64; 2]; 2],
    pub eta0: Complex64,
}

impl DiskElement {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        DiskElement { matrix: [[one, zero], [zero, one]], eta0: one }
    }

    pub fn j(&self, w: Complex64) -> Complex64 {
        self.matrix[1][0] * w + self.matrix[1][1]
    }

    pub fn eta(&self, w: Complex64) -> Complex64 {
        let ratio = self.matrix[1][0] / self.matrix[1][1];
        self.eta0 * branch_sqrt(ratio * w + 1.0)
    }

    pub fn act(&self, w: Complex64) -> Complex64 {
        (self.matrix[0][0] * w + self.matrix[0][1]) / self.j(w)
    }

    /// Same multiplication rule as in `Met`.
    pub fn multiply(&self, other: &DiskElement) -> DiskElement {
        DiskElement {
            matrix: mat_mul(&self.matrix, &other.matrix),
            eta0: self.eta(other.act(Complex64::new(0.0, 0.0))) * other.eta0,
        }
    }

    /// Deviation from `SU(1,1)`: `max(|α − conj δ|, |β − conj γ|, |det − 1|)`.
    pub fn su11_defect(&self) -> f64 {
        let [[al, be], [ga, de]] = self.matrix;
        let det = al * de - be * ga;
        (al - de.conj()).norm().max((be - ga.conj()).norm()).max((det - 1.0).norm())
    }

    pub fn distance(&self, other: &DiskElement) -> f64 {
        let mut d: f64 = (self.eta0 - other.eta0).norm();
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.matrix[r][c] - other.matrix[r][c]).norm());
            }
        }
        d
    }
}
