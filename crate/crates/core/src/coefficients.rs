//! Matrix coefficients `F_{k,m}` and the functions they are built from.
//!
//! `F_{k,m}` is the lift of
//!
//! ```text
//! f_{k,m}(z) = (2i)^m (z − i)^k / (z + i)^{m+k}
//! ```
//!
//! to the group, `F_f(σ) = f(σ.i) η_σ(i)^{−2m}`. It transforms on the right
//! as `χ_m` and on the left as `χ_{m+2k}`, and in Cartan coordinates
//! `|F_{k,m}(κ h_t κ')| = tanh^k t / cosh^m t`. Half-integral powers always
//! go through [`branch_sqrt`](crate::metgroup::branch_sqrt).

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, invalid};
use crate::metgroup::{half_power, reduce_angle, rem_euclid, CartanCoords, HalfInt, IwasawaCoords, MetElement, FOUR_PI};
use crate::Result;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-3;

/// A weight `(k, m)`: `m ≥ 3/2` a half-integer, `k ≥ 0`.
///
/// Odd `2m` is the genuine metaplectic case; even `2m` gives the functions
/// that descend to SL2(ℝ).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Weight {
    k: u32,
    m: HalfInt,
}

impl Weight {
    pub fn new(k: u32, m: HalfInt) -> Result<Self> {
        if m.twice() < 3 {
            return Err(invalid!("weight m = {m} must be at least 3/2"));
        }
        if m.twice() + 2 * k as i64 + 2 > i32::MAX as i64 {
            return Err(invalid!("weight (k = {k}, m = {m}) too large"));
        }
        Ok(Weight { k, m })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn m(&self) -> HalfInt {
        self.m
    }

    /// `m + 2k`, the left K-type.
    pub fn left_type(&self) -> HalfInt {
        self.m.add_int(2 * self.k as i64)
    }

    /// Casimir eigenvalue `m(m/2 − 1)`.
    pub fn casimir_eigenvalue(&self) -> f64 {
        let m = self.m.value();
        m * (0.5 * m - 1.0)
    }

    fn twice_m(&self) -> i32 {
        self.m.twice() as i32
    }
}

/// `χ_n(κ_t) = e^{−int}`.
pub fn chi(n: HalfInt, t: f64) -> Complex64 {
    let t = reduce_angle(t, FOUR_PI);
    // n·t = (2n)(t/2); reduce mod 2π after forming the product.
    let phase = rem_euclid(n.twice() as f64 * 0.5 * t, core::f64::consts::TAU);
    Complex64::from_polar(1.0, -phase)
}

fn check_upper(z: Complex64) -> Result<()> {
    if z.im > 0.0 {
        Ok(())
    } else {
        Err(domain!("{z} is not in the upper half-plane"))
    }
}

/// `f_{k,m}(z) = (2i)^m (z − i)^k / (z + i)^{m+k}`.
pub fn f_km(w: Weight, z: Complex64) -> Result<Complex64> {
    check_upper(z)?;
    let two_m = w.twice_m();
    // (z − i)^k (z + i)^{−m−k} = ((z − i)/(z + i))^k (z + i)^{−m}, which
    // stays finite far from i.
    let ratio = (z - I) / (z + I);
    Ok(half_power(I * 2.0, two_m) * half_power(z + I, -two_m) * ratio.powi(w.k as i32))
}

/// Complex derivative of [`f_km`].
pub fn f_km_derivative(w: Weight, z: Complex64) -> Result<Complex64> {
    check_upper(z)?;
    let two_m = w.twice_m();
    let k = w.k as i32;
    let mk = 0.5 * two_m as f64 + k as f64;
    let pre = half_power(I * 2.0, two_m) * half_power(z + I, -(two_m + 2 * k + 2));
    let body = if k == 0 {
        Complex64::new(-mk, 0.0)
    } else {
        (z - I).powi(k - 1) * ((z + I) * k as f64 - (z - I) * mk)
    };
    Ok(pre * body)
}

/// The lift `F_f(σ) = f(σ.i) η_σ(i)^{−2m}`.
pub fn lift<F>(f: F, w: Weight, s: &MetElement) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let z = s.act(I);
    Ok(f(z)? * s.eta_i().powi(-w.twice_m()))
}

/// The lift in Iwasawa coordinates: `f(x + iy) y^{m/2} e^{−imt}`.
pub fn lift_iwasawa<F>(f: F, w: Weight, c: IwasawaCoords) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let value = f(Complex64::new(c.x, c.y))?;
    Ok(value * c.y.powf(0.5 * w.m.value()) * chi(w.m, c.t))
}

/// `F_{k,m}(σ)` from the lift definition.
pub fn matrix_coefficient(w: Weight, s: &MetElement) -> Complex64 {
    // σ.i always lies in the upper half-plane.
    lift(|z| f_km(w, z), w, s).unwrap_or(Complex64::new(0.0, 0.0))
}

/// `tanh^k t / cosh^m t`, stable for large `t` (underflows to 0).
pub fn cartan_profile(w: Weight, t: f64) -> f64 {
    let e = (-2.0 * t).exp();
    let tanh = -(-2.0 * t).exp_m1() / (1.0 + e);
    let sech = 2.0 * (-t).exp() / (1.0 + e);
    tanh.powi(w.k as i32) * sech.powf(w.m.value())
}

/// `F_{k,m}(κ_{θ₁} h_t κ_{θ₂}) = χ_{m+2k}(κ_{θ₁}) tanh^k t / cosh^m t χ_m(κ_{θ₂})`.
pub fn f_km_cartan(w: Weight, c: CartanCoords) -> Complex64 {
    chi(w.left_type(), c.theta1) * cartan_profile(w, c.t) * chi(w.m, c.theta2)
}

/// `F_{k,m}` as a function of Iwasawa coordinates.
fn coefficient_at(w: Weight, x: f64, y: f64, t: f64) -> Complex64 {
    let f = f_km(w, Complex64::new(x, y)).unwrap_or(Complex64::new(0.0, 0.0));
    f * y.powf(0.5 * w.m.value()) * chi(w.m, t)
}

/// Finite-difference scheme for the differential checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Central differences, error `O(h²)`.
    Central,
    /// Central differences at `h` and `h/2` combined, error `O(h⁴)`.
    Richardson,
}

fn refine<G: Fn(f64) -> Complex64>(g: G, h: f64, scheme: Scheme) -> Complex64 {
    match scheme {
        Scheme::Central => g(h),
        Scheme::Richardson => (g(0.5 * h) * 4.0 - g(h)) / 3.0,
    }
}

/// `𝒞 = 2y²(∂²_x + ∂²_y) + 2y ∂²_{x,t}` applied by finite differences to a
/// function of Iwasawa coordinates `(x, y, t)`.
pub fn casimir_operator<G>(g: G, c: IwasawaCoords, h: f64, scheme: Scheme) -> Complex64
where
    G: Fn(f64, f64, f64) -> Complex64,
{
    let IwasawaCoords { x, y, t } = c;
    let f = |dx: f64, dy: f64, dt: f64| g(x + dx, y + dy, t + dt);
    let center = f(0.0, 0.0, 0.0);
    let lap = refine(
        |h| (f(h, 0.0, 0.0) + f(-h, 0.0, 0.0) + f(0.0, h, 0.0) + f(0.0, -h, 0.0) - center * 4.0) / (h * h),
        h,
        scheme,
    );
    let mixed = refine(
        |h| (f(h, 0.0, h) - f(h, 0.0, -h) - f(-h, 0.0, h) + f(-h, 0.0, -h)) / (4.0 * h * h),
        h,
        scheme,
    );
    lap * (2.0 * y * y) + mixed * (2.0 * y)
}

/// [`casimir_operator`] applied to `F_{k,m}`.
pub fn casimir_fd(w: Weight, c: IwasawaCoords, h: f64, scheme: Scheme) -> Complex64 {
    casimir_operator(|x, y, t| coefficient_at(w, x, y, t), c, h, scheme)
}

/// Residual `|𝒞F − m(m/2 − 1)F| / (1 + |F|)` of the Casimir eigen-equation,
/// with Richardson-refined central differences of step `h`.
///
/// `h` must lie in `[1e-6, 1e-2]` and the point must keep `y ± h > 0`.
pub fn casimir_check(w: Weight, s: &MetElement, h: f64) -> Result<f64> {
    if !(1e-6..=1e-2).contains(&h) {
        return Err(invalid!("finite-difference step {h} outside [1e-6, 1e-2]"));
    }
    let c = s.to_iwasawa();
    if c.y <= 2.0 * h {
        return Err(invalid!("point too close to the real axis for step {h}"));
    }
    let value = coefficient_at(w, c.x, c.y, c.t);
    let applied = casimir_fd(w, c, h, Scheme::Richardson);
    Ok((applied - value * w.casimir_eigenvalue()).norm() / (1.0 + value.norm()))
}

/// `n⁺.F_{k,m}` from the analytic derivative of `f_{k,m}`:
/// `(2iy f'(z) + m f(z)) y^{m/2} e^{−i(m+2)t}`.
pub fn apply_n_plus(w: Weight, s: &MetElement) -> Complex64 {
    let c = s.to_iwasawa();
    let z = Complex64::new(c.x, c.y);
    let (f, df) = match (f_km(w, z), f_km_derivative(w, z)) {
        (Ok(f), Ok(df)) => (f, df),
        _ => return Complex64::new(0.0, 0.0),
    };
    let m = w.m.value();
    (df * Complex64::new(0.0, 2.0 * c.y) + f * m) * c.y.powf(0.5 * m) * chi(w.m.add_int(2), c.t)
}

/// `n⁺ = iy e^{−2it}(∂_x − i∂_y) + (i/2) e^{−2it} ∂_t` applied to `F_{k,m}`
/// by central differences.
pub fn n_plus_fd(w: Weight, s: &MetElement, h: f64, scheme: Scheme) -> Complex64 {
    let IwasawaCoords { x, y, t } = s.to_iwasawa();
    let f = |dx: f64, dy: f64, dt: f64| coefficient_at(w, x + dx, y + dy, t + dt);
    let dx = refine(|h| (f(h, 0.0, 0.0) - f(-h, 0.0, 0.0)) / (2.0 * h), h, scheme);
    let dy = refine(|h| (f(0.0, h, 0.0) - f(0.0, -h, 0.0)) / (2.0 * h), h, scheme);
    let dt = refine(|h| (f(0.0, 0.0, h) - f(0.0, 0.0, -h)) / (2.0 * h), h, scheme);
    let rot = Complex64::from_polar(1.0, -2.0 * t);
    (dx - I * dy) * (I * y) * rot + dt * (I * 0.5) * rot
}

/// `f_{k,m}|[C⁻¹]_m(w) = f_{k,m}(i(1 + w)/(1 − w)) (1 − w)^{−m}`, which
/// equals `w^k`.
pub fn cayley_transfer(w: Weight, z_disk: Complex64) -> Result<Complex64> {
    if !(z_disk.norm() < 1.0) {
        return Err(domain!("{z_disk} is not in the open unit disk"));
    }
    let one = Complex64::new(1.0, 0.0);
    let z = I * (one + z_disk) / (one - z_disk);
    Ok(f_km(w, z)? * half_power(one - z_disk, -w.twice_m()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{PI, TAU};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn weight(k: u32, twice_m: i64) -> Weight {
        Weight::new(k, HalfInt::from_twice(twice_m)).unwrap()
    }

    fn random_element(rng: &mut impl Rng) -> MetElement {
        MetElement::from_cartan(
            CartanCoords::new(rng.gen_range(0.0..FOUR_PI), rng.gen_range(0.0..3.0), rng.gen_range(0.0..FOUR_PI))
                .unwrap(),
        )
    }

    #[test]
    fn chi_examples() {
        for twice_m in [3, 5, 7, 11] {
            for k in 0..4 {
                let n = HalfInt::from_twice(twice_m + 4 * k);
                assert!((chi(n, TAU) + 1.0).norm() < 1e-14);
            }
        }
        assert_eq!(chi(HalfInt::from_twice(7), 0.0), Complex64::new(1.0, 0.0));
        assert!((chi(HalfInt::from_twice(1), PI) - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        let n = HalfInt::from_twice(9);
        assert!((chi(n, 1.3 + FOUR_PI) - chi(n, 1.3)).norm() < 1e-13);
    }

    #[test]
    fn f_km_examples() {
        for twice_m in [3, 5, 8, 13] {
            assert!((f_km(weight(0, twice_m), I).unwrap() - 1.0).norm() < 1e-14);
            for k in 1..4 {
                assert_eq!(f_km(weight(k, twice_m), I).unwrap().norm(), 0.0);
            }
        }
        // k = 1, m = 5/2 at 2i against exp/log powers on the principal branch,
        // which agree with the square-root convention for these arguments.
        let oracle = |z: Complex64, p: f64| (z.ln() * p).exp();
        let expected = oracle(I * 2.0, 2.5) * I / oracle(I * 3.0, 3.5);
        let got = f_km(weight(1, 5), I * 2.0).unwrap();
        assert!((got - expected).norm() < 1e-14);
        assert!(f_km(weight(0, 5), Complex64::new(1.0, 0.0)).is_err());
        assert!(f_km(weight(0, 5), Complex64::new(1.0, -1.0)).is_err());
    }

    #[test]
    fn f_km_is_holomorphic() {
        // Cauchy–Riemann by central differences, and the analytic derivative.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-3;
        for _ in 0..200 {
            let w = weight(rng.gen_range(0..5), rng.gen_range(3..12));
            let z = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.2..3.0));
            let f = |z| f_km(w, z).unwrap();
            let d = |v: Complex64| refine(|h| (f(z + v * h) - f(z - v * h)) / (2.0 * h), h, Scheme::Richardson);
            let (dx, dy) = (d(Complex64::new(1.0, 0.0)), d(I));
            let scale = 1.0 + dx.norm();
            assert!((dy - I * dx).norm() < 1e-8 * scale, "{z}: {}", (dy - I * dx).norm());
            assert!((dx - f_km_derivative(w, z).unwrap()).norm() < 1e-8 * scale);
        }
    }

    #[test]
    fn lift_examples() {
        let w = weight(2, 7);
        let f = |z| f_km(w, z);
        assert_eq!(lift(f, w, &MetElement::identity()).unwrap(), f_km(w, I).unwrap());
        // n_1 a_2 κ_0: the Iwasawa formula against the definition.
        let w0 = weight(0, 5);
        let s = MetElement::n(1.0) * MetElement::a(2.0) * MetElement::kappa(0.0);
        let direct = lift(|z| f_km(w0, z), w0, &s).unwrap();
        let expected = f_km(w0, Complex64::new(1.0, 2.0)).unwrap() * 2f64.powf(1.25);
        assert!((direct - expected).norm() < 1e-14);
    }

    #[test]
    fn lift_paths_agree_and_transform_right() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..500 {
            let w = weight(rng.gen_range(0..4), rng.gen_range(3..12));
            let s = random_element(&mut rng);
            let f = |z| f_km(w, z);
            let by_def = lift(f, w, &s).unwrap();
            let by_iwasawa = lift_iwasawa(f, w, s.to_iwasawa()).unwrap();
            assert!((by_def - by_iwasawa).norm() < 1e-12);
            let u = rng.gen_range(0.0..FOUR_PI);
            let right = lift(f, w, &(s * MetElement::kappa(u))).unwrap();
            assert!((right - chi(w.m(), u) * by_def).norm() < 1e-12);
        }
    }

    #[test]
    fn cartan_formula() {
        for twice_m in [3, 5, 9] {
            for k in 0..4 {
                let w = weight(k, twice_m);
                for i in 0..20 {
                    let t = 0.3 * i as f64;
                    let v = f_km_cartan(w, CartanCoords::new(0.0, t, 0.0).unwrap());
                    let expected = t.tanh().powi(k as i32) / t.cosh().powf(w.m().value());
                    assert!((v.re - expected).abs() < 1e-14 && v.im.abs() < 1e-15);
                }
                let at_zero = f_km_cartan(w, CartanCoords::new(0.0, 0.0, 0.0).unwrap());
                assert_eq!(at_zero.re, if k == 0 { 1.0 } else { 0.0 });
            }
        }
        // Deep in the tail the profile underflows instead of overflowing.
        let w = weight(1, 5);
        assert_eq!(cartan_profile(w, 800.0), 0.0);
        assert!(cartan_profile(w, 250.0) > 0.0);
    }

    #[test]
    fn cartan_and_lift_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..1000 {
            let w = weight(rng.gen_range(0..6), rng.gen_range(3..14));
            let c = CartanCoords::new(rng.gen_range(0.0..FOUR_PI), rng.gen_range(0.0..4.0), rng.gen_range(0.0..FOUR_PI))
                .unwrap();
            let via_lift = matrix_coefficient(w, &MetElement::from_cartan(c));
            let via_cartan = f_km_cartan(w, c);
            assert!((via_lift - via_cartan).norm() < 1e-10);
            assert!(via_cartan.norm() <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn casimir_eigen_equation() {
        let w = weight(0, 5);
        let r = casimir_check(w, &MetElement::h(0.5), 1e-3).unwrap();
        assert!(r <= 1e-5, "residual {r}");
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..100 {
            let w = weight(rng.gen_range(0..4), 2 * rng.gen_range(1..6) + 1);
            let s = MetElement::from_iwasawa(
                IwasawaCoords::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0), rng.gen_range(0.0..FOUR_PI)).unwrap(),
            );
            let r = casimir_check(w, &s, 1e-3).unwrap();
            assert!(r <= 1e-5, "residual {r} for {w:?}");
        }
        assert!(casimir_check(w, &MetElement::identity(), 1e-1).is_err());
    }

    #[test]
    fn casimir_operator_kills_zero() {
        let c = IwasawaCoords::new(0.2, 1.1, 0.4).unwrap();
        let zero = casimir_operator(|_, _, _| Complex64::new(0.0, 0.0), c, 1e-3, Scheme::Central);
        assert_eq!(zero, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn plain_central_differences_are_second_order() {
        // Halving the step cuts the error by about four.
        let w = weight(1, 5);
        let c = IwasawaCoords::new(0.3, 1.2, 0.7).unwrap();
        let exact = coefficient_at(w, c.x, c.y, c.t) * w.casimir_eigenvalue();
        let e1 = (casimir_fd(w, c, 2e-2, Scheme::Central) - exact).norm();
        let e2 = (casimir_fd(w, c, 1e-2, Scheme::Central) - exact).norm();
        assert!(e1 / e2 > 3.5 && e1 / e2 < 4.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn n_plus_k_types() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..300 {
            let w = weight(rng.gen_range(0..4), 2 * rng.gen_range(1..5) + 1);
            let s = random_element(&mut rng);
            let u = rng.gen_range(0.0..FOUR_PI);
            let v = apply_n_plus(w, &s);
            let right = apply_n_plus(w, &(s * MetElement::kappa(u)));
            assert!((right - chi(w.m().add_int(2), u) * v).norm() < 1e-11);
            let left = apply_n_plus(w, &(MetElement::kappa(u) * s));
            assert!((left - chi(w.left_type(), u) * v).norm() < 1e-11);
        }
    }

    #[test]
    fn n_plus_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..100 {
            let w = weight(rng.gen_range(0..4), 2 * rng.gen_range(1..5) + 1);
            let s = MetElement::from_iwasawa(
                IwasawaCoords::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0), rng.gen_range(0.0..FOUR_PI)).unwrap(),
            );
            let analytic = apply_n_plus(w, &s);
            let fd = n_plus_fd(w, &s, 1e-3, Scheme::Richardson);
            assert!((analytic - fd).norm() < 1e-6, "{analytic} vs {fd}");
        }
    }

    #[test]
    fn cayley_transfer_gives_monomials() {
        for twice_m in [3, 5, 7, 10] {
            let v = cayley_transfer(weight(0, twice_m), Complex64::new(0.3, 0.0)).unwrap();
            assert!((v - 1.0).norm() < 1e-14);
            for k in 1..5 {
                assert!(cayley_transfer(weight(k, twice_m), Complex64::new(0.0, 0.0)).unwrap().norm() < 1e-15);
            }
        }
        let z = Complex64::new(0.1, 0.2);
        let v = cayley_transfer(weight(2, 7), z).unwrap();
        assert!((v - z * z).norm() < 1e-14);
        assert!(cayley_transfer(weight(2, 7), Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn weight_validation() {
        assert!(Weight::new(0, HalfInt::from_twice(2)).is_err());
        assert!(Weight::new(0, HalfInt::from_twice(3)).is_ok());
        assert_eq!(weight(3, 5).left_type(), HalfInt::from_twice(17));
        assert_eq!(weight(0, 5).casimir_eigenvalue(), 2.5 * 0.25);
    }
}
