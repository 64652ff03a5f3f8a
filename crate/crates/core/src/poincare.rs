//! Congruence subgroups, their lifts to `Met` and partial Poincaré sums
//! `Σ_{γ ∈ Γ, ‖γ‖ ≤ R} F_{k,m}(γσ)`.
//!
//! Two families of discrete subgroups are implemented: the full preimage of
//! `Γ(N)`, which contains `κ_{2π}` and on which every sum cancels, and the
//! theta-multiplier section `Γ₁(4)~ = {(γ, J(γ, ·))}`, which meets `K`
//! trivially.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::coefficients::{matrix_coefficient, Weight};
use crate::error::{domain, invalid};
use crate::metgroup::{branch_sqrt, rem_euclid, MetElement};
use crate::nonvanishing::{l1_margin, r_window};
use crate::quadrature::pairwise_sum;
use crate::Result;

/// An integer matrix `[[a, b], [c, d]]`.
pub type IntMatrix = [[i64; 2]; 2];

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which discrete subgroup of `Met` to sum over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum Variant {
    /// Both lifts of every element of `Γ(N)`.
    FullPreimage,
    /// `Γ₁(4)` lifted by the theta multiplier.
    ThetaSection,
}

/// A congruence subgroup of level `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CongruenceSpec {
    n: u32,
    variant: Variant,
}

impl CongruenceSpec {
    /// The theta section exists only at level 4.
    pub fn new(n: u32, variant: Variant) -> Result<Self> {
        if n == 0 {
            return Err(invalid!("level N must be at least 1"));
        }
        if variant == Variant::ThetaSection && n != 4 {
            return Err(invalid!("the theta section is defined for N = 4 only (got N = {n})"));
        }
        Ok(CongruenceSpec { n, variant })
    }

    pub fn full_preimage(n: u32) -> Result<Self> {
        Self::new(n, Variant::FullPreimage)
    }

    pub fn theta_section() -> Self {
        CongruenceSpec { n: 4, variant: Variant::ThetaSection }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Membership of an `SL2(ℤ)` matrix in `Γ(N)`, resp. `Γ₁(4)`.
    pub fn contains(&self, g: &IntMatrix) -> bool {
        let n = self.n as i64;
        let [[a, b], [c, d]] = *g;
        if a * d - b * c != 1 {
            return false;
        }
        let one = |x: i64| (x - 1).rem_euclid(n) == 0;
        let zero = |x: i64| x.rem_euclid(n) == 0;
        match self.variant {
            Variant::FullPreimage => one(a) && one(d) && zero(b) && zero(c),
            Variant::ThetaSection => one(a) && one(d) && zero(c),
        }
    }
}

fn norm_sqr(g: &IntMatrix) -> i64 {
    g[0][0] * g[0][0] + g[0][1] * g[0][1] + g[1][0] * g[1][0] + g[1][1] * g[1][1]
}

/// Frobenius norm of an integer matrix.
pub fn int_norm(g: &IntMatrix) -> f64 {
    (norm_sqr(g) as f64).sqrt()
}

fn bound_sqr(radius: f64) -> i64 {
    // Integer norms: ‖γ‖ ≤ R ⇔ ‖γ‖² ≤ ⌊R² + slack⌋.
    (radius * radius + 1e-9).floor() as i64
}

/// All elements of the subgroup with `‖γ‖ ≤ radius`, sorted
/// lexicographically by `(a, b, c, d)`.
pub fn enumerate_gamma(spec: CongruenceSpec, radius: f64) -> Result<Vec<IntMatrix>> {
    if !(radius.is_finite() && radius * radius + 1e-9 >= 2.0) {
        return Err(invalid!("enumeration radius must be at least sqrt(2) (got {radius})"));
    }
    let limit = bound_sqr(radius);
    let r = (limit as f64).sqrt().floor() as i64;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            let ab = a * a + b * b;
            if ab > limit {
                continue;
            }
            for c in -r..=r {
                let abc = ab + c * c;
                if abc > limit {
                    continue;
                }
                if a == 0 {
                    // bc = −1 and d is free.
                    if b * c != -1 {
                        continue;
                    }
                    let rest = ((limit - abc) as f64).sqrt().floor() as i64;
                    for d in -rest..=rest {
                        push_if(&mut out, spec, [[a, b], [c, d]], limit);
                    }
                } else {
                    let num = 1 + b * c;
                    if num % a == 0 {
                        push_if(&mut out, spec, [[a, b], [c, num / a]], limit);
                    }
                }
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

fn push_if(out: &mut Vec<IntMatrix>, spec: CongruenceSpec, g: IntMatrix, limit: i64) {
    if norm_sqr(&g) <= limit && spec.contains(&g) {
        out.push(g);
    }
}

fn to_real(g: &IntMatrix) -> [[f64; 2]; 2] {
    [[g[0][0] as f64, g[0][1] as f64], [g[1][0] as f64, g[1][1] as f64]]
}

fn act(g: &IntMatrix, z: Complex64) -> Complex64 {
    let [[a, b], [c, d]] = to_real(g);
    (z * a + b) / (z * c + d)
}

/// `Θ(z) = Σ_{n ∈ ℤ} e^{2πi n² z}`, truncated once `e^{−2πn² Im z} < 1e−17`.
pub fn theta(z: Complex64) -> Result<Complex64> {
    if !(z.im > 0.0) || !z.re.is_finite() {
        return Err(domain!("theta needs Im z > 0 (got {z})"));
    }
    // Only z mod 1 matters: e^{2πi n² (z + 1)} = e^{2πi n² z}.
    let x = rem_euclid(z.re, 1.0);
    let cutoff = 17.0 * core::f64::consts::LN_10 / (TAU * z.im);
    let n_max = cutoff.sqrt().ceil() as u64 + 1;
    let terms = (1..=n_max).map(|n| {
        let n2 = (n * n) as f64;
        // Phase n²x reduced mod 1 before scaling by 2π.
        let phase = rem_euclid(n2 * x, 1.0) * TAU;
        Complex64::from_polar((-TAU * n2 * z.im).exp(), phase)
    });
    let (re, im): (Vec<f64>, Vec<f64>) = terms.map(|t| (t.re, t.im)).unzip();
    let tail = Complex64::new(pairwise_sum(re.into_iter()), pairwise_sum(im.into_iter()));
    Ok(Complex64::new(1.0, 0.0) + tail * 2.0)
}

/// `J(γ, z) = Θ(γ.z) / Θ(z)` for `γ ∈ Γ₁(4)`.
pub fn theta_multiplier(gamma: &IntMatrix, z: Complex64) -> Result<Complex64> {
    if !CongruenceSpec::theta_section().contains(gamma) {
        return Err(invalid!("{gamma:?} is not in Gamma_1(4)"));
    }
    let tz = theta(z)?;
    Ok(theta(act(gamma, z))? / tz)
}

/// The element `(γ, J(γ, ·))` of `Γ₁(4)~`; the sign is fixed by `J(γ, i)`.
pub fn lift_theta(gamma: &IntMatrix) -> Result<MetElement> {
    let j = theta_multiplier(gamma, I)?;
    Ok(MetElement::from_eta(to_real(gamma), j))
}

/// `(γ, +branch_sqrt(cz + d))`.
pub fn lift_plus(gamma: &IntMatrix) -> MetElement {
    let root = branch_sqrt(Complex64::new(gamma[1][1] as f64, gamma[1][0] as f64));
    MetElement::from_eta(to_real(gamma), root)
}

/// Group elements of `Met` over the matrices, in enumeration order. The
/// full preimage lists each matrix's two lifts next to each other.
pub fn lifted_elements(spec: CongruenceSpec, radius: f64) -> Result<Vec<MetElement>> {
    let matrices = enumerate_gamma(spec, radius)?;
    let mut out = Vec::with_capacity(matrices.len() * 2);
    for g in &matrices {
        match spec.variant {
            Variant::FullPreimage => {
                let e = lift_plus(g);
                out.push(e);
                out.push(e.flip_sheet());
            }
            Variant::ThetaSection => out.push(lift_theta(g)?),
        }
    }
    Ok(out)
}

/// A truncated Poincaré series.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PartialSum {
    pub value: Complex64,
    /// Number of group elements summed.
    pub terms: usize,
    pub radius: f64,
    /// Heuristic size of the omitted terms; not a bound.
    pub tail_estimate: f64,
}

/// `Σ F_{k,m}(γ̃σ)` over the lifted elements with `‖γ‖ ≤ radius`.
///
/// Terms are summed pairwise in enumeration order; the full preimage first
/// adds each matrix's two lifts together.
pub fn partial_sum(spec: CongruenceSpec, w: Weight, s: &MetElement, radius: f64) -> Result<PartialSum> {
    if w.m().twice() < 5 {
        return Err(invalid!("partial sums need m >= 5/2 (got m = {})", w.m()));
    }
    let elements = lifted_elements(spec, radius)?;
    let values: Vec<Complex64> = elements.iter().map(|g| matrix_coefficient(w, &g.multiply(s))).collect();
    let grouped: Vec<Complex64> = match spec.variant {
        Variant::FullPreimage => values.chunks(2).map(|p| p[0] + p[1]).collect(),
        Variant::ThetaSection => values,
    };
    Ok(PartialSum {
        value: complex_pairwise(&grouped),
        terms: elements.len(),
        radius,
        tail_estimate: tail_estimate(elements.len(), radius, w),
    })
}

/// Partial sums at several radii.
pub fn partial_sum_trace(spec: CongruenceSpec, w: Weight, s: &MetElement, radii: &[f64]) -> Result<Vec<PartialSum>> {
    radii.iter().map(|&r| partial_sum(spec, w, s, r)).collect()
}

fn complex_pairwise(values: &[Complex64]) -> Complex64 {
    Complex64::new(
        pairwise_sum(values.iter().map(|v| v.re)),
        pairwise_sum(values.iter().map(|v| v.im)),
    )
}

/// Term count grows like `R²` and `|F(g)| ≤ cosh(t)^{−m} ≈ (‖g‖/2)^{−m}`,
/// so the omitted terms add up to about `2 ρ 2^m R^{2−m} / (m − 2)` with
/// `ρ = terms / R²`.
fn tail_estimate(terms: usize, radius: f64, w: Weight) -> f64 {
    let m = w.m().value();
    if m <= 2.0 {
        return f64::INFINITY;
    }
    let density = terms as f64 / (radius * radius);
    2.0 * density * 2f64.powf(m) * radius.powf(2.0 - m) / (m - 2.0)
}

/// `max |partial_sum|` over base points.
pub fn max_abs_partial_sum(spec: CongruenceSpec, w: Weight, points: &[MetElement], radius: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in points {
        worst = worst.max(partial_sum(spec, w, s, radius)?.value.norm());
    }
    Ok(worst)
}

/// `∫_{C_r}|F_{k,m}| − ∫_{Met∖C_r}|F_{k,m}|` at the midpoint of the
/// radius window for level `N`.
pub fn margin_demo(n: u32, w: Weight) -> Result<f64> {
    match r_window(n, w.k(), w.m())? {
        Some((lo, hi)) => Ok(l1_margin(w, 0.5 * (lo + hi))?.value),
        None => Err(invalid!("N = {n} does not exceed the threshold for (k = {}, m = {})", w.k(), w.m())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::metgroup::{HalfInt, IwasawaCoords};
    use crate::nonvanishing::threshold_n;
    use crate::quadrature::{haar_l1, QuadratureSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn weight(k: u32, twice_m: i64) -> Weight {
        Weight::new(k, HalfInt::from_twice(twice_m)).unwrap()
    }

    /// Exhaustive scan of all entries with `|x| ≤ ⌊R⌋`.
    fn brute_force(spec: CongruenceSpec, radius: f64) -> Vec<IntMatrix> {
        let r = radius.floor() as i64;
        let mut out = Vec::new();
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    for d in -r..=r {
                        let g = [[a, b], [c, d]];
                        if ((a * a + b * b + c * c + d * d) as f64) <= radius * radius + 1e-9 && spec.contains(&g) {
                            out.push(g);
                        }
                    }
                }
            }
        }
        out
    }

    fn random_point(rng: &mut ChaCha8Rng) -> MetElement {
        let c = IwasawaCoords::new(rng.gen_range(-2.0..2.0), rng.gen_range(0.3..3.0), rng.gen_range(0.0..12.0)).unwrap();
        MetElement::from_iwasawa(c)
    }

    #[test]
    fn small_radius_examples() {
        let s2 = 2f64.sqrt();
        let g2 = enumerate_gamma(CongruenceSpec::full_preimage(2).unwrap(), s2).unwrap();
        assert_eq!(g2, vec![[[-1, 0], [0, -1]], [[1, 0], [0, 1]]]);
        let g3 = enumerate_gamma(CongruenceSpec::full_preimage(3).unwrap(), s2).unwrap();
        assert_eq!(g3, vec![[[1, 0], [0, 1]]]);
        let t = enumerate_gamma(CongruenceSpec::theta_section(), s2).unwrap();
        assert_eq!(t, vec![[[1, 0], [0, 1]]]);
        assert!(enumerate_gamma(CongruenceSpec::theta_section(), 1.0).is_err());
    }

    #[test]
    fn matches_brute_force() {
        let specs = [
            CongruenceSpec::full_preimage(1).unwrap(),
            CongruenceSpec::full_preimage(2).unwrap(),
            CongruenceSpec::full_preimage(3).unwrap(),
            CongruenceSpec::full_preimage(5).unwrap(),
            CongruenceSpec::theta_section(),
        ];
        for spec in specs {
            for radius in [2f64.sqrt(), 2.0, 4.0, 6.5, 9.0, 12.0] {
                let got = enumerate_gamma(spec, radius).unwrap();
                let want = brute_force(spec, radius);
                assert_eq!(got, want, "{spec:?}, R = {radius}");
            }
        }
    }

    #[test]
    fn nontrivial_norm_gap() {
        // γ ≠ ±1 in Γ(N) has ‖γ‖ ≥ √(N² + 2).
        for n in 2..6u32 {
            let spec = CongruenceSpec::full_preimage(n).unwrap();
            let list = enumerate_gamma(spec, 12.0).unwrap();
            let nn = (n * n) as f64;
            for g in list.iter().filter(|g| g[0][1] != 0 || g[1][0] != 0) {
                assert!(int_norm(g) >= (nn + 2.0).sqrt() - 1e-12);
            }
        }
    }

    #[test]
    fn spec_validation() {
        assert!(CongruenceSpec::new(0, Variant::FullPreimage).is_err());
        assert!(CongruenceSpec::new(8, Variant::ThetaSection).is_err());
        assert!(CongruenceSpec::new(4, Variant::ThetaSection).is_ok());
    }

    #[test]
    fn theta_values() {
        let v = theta(I).unwrap();
        let pi = core::f64::consts::PI;
        let want = 1.0 + 2.0 * ((-2.0 * pi).exp() + (-8.0 * pi).exp() + (-18.0 * pi).exp());
        assert!((v.re - want).abs() < 1e-15 && v.im.abs() < 1e-16);
        assert!((v.re - 1.0037348).abs() < 1e-6);
        let z = Complex64::new(0.3, 0.2);
        assert!((theta(z + 2.0).unwrap() - theta(z).unwrap()).norm() < 1e-13);
        assert!((theta(Complex64::new(0.1, 30.0)).unwrap() - 1.0).norm() < 1e-16);
        assert!(theta(Complex64::new(0.0, 0.0)).is_err());
        // Θ(−1/(4z)) = √(−2iz) Θ(z).
        let z = Complex64::new(0.17, 0.4);
        let lhs = theta(-(z * 4.0).inv()).unwrap();
        let rhs = (Complex64::new(0.0, -2.0) * z).sqrt() * theta(z).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn multiplier_squares_to_cocycle() {
        let list = enumerate_gamma(CongruenceSpec::theta_section(), 14.0).unwrap();
        assert!(list.len() >= 50);
        for g in list.iter().take(200) {
            let j = theta_multiplier(g, I).unwrap();
            let c = Complex64::new(g[1][1] as f64, g[1][0] as f64);
            assert!((j * j - c).norm() < 1e-10, "{g:?}");
            let e = lift_theta(g).unwrap();
            assert!((e.eta_i() - j).norm() < 1e-10);
        }
        assert_eq!(theta_multiplier(&[[1, 0], [0, 1]], Complex64::new(0.2, 0.7)).unwrap(), Complex64::new(1.0, 0.0));
        assert!(theta_multiplier(&[[1, 1], [1, 2]], I).is_err());
    }

    #[test]
    fn multiplier_cocycle() {
        let list = enumerate_gamma(CongruenceSpec::theta_section(), 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let g = list[rng.gen_range(0..list.len())];
            let h = list[rng.gen_range(0..list.len())];
            let gh = [
                [g[0][0] * h[0][0] + g[0][1] * h[1][0], g[0][0] * h[0][1] + g[0][1] * h[1][1]],
                [g[1][0] * h[0][0] + g[1][1] * h[1][0], g[1][0] * h[0][1] + g[1][1] * h[1][1]],
            ];
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0));
            let lhs = theta_multiplier(&gh, z).unwrap();
            let rhs = theta_multiplier(&g, act(&h, z)).unwrap() * theta_multiplier(&h, z).unwrap();
            assert!((lhs - rhs).norm() < 1e-10);
            // The lifts multiply like the group elements.
            let prod = lift_theta(&g).unwrap().multiply(&lift_theta(&h).unwrap());
            assert_eq!(prod.sign(), lift_theta(&gh).unwrap().sign());
        }
    }

    #[test]
    fn full_preimage_cancels() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1u32, 2, 3] {
            let spec = CongruenceSpec::full_preimage(n).unwrap();
            for (k, twice) in [(0, 5), (2, 7), (1, 9)] {
                let s = random_point(&mut rng);
                let r = partial_sum(spec, weight(k, twice), &s, 8.0).unwrap();
                assert_eq!(r.value, Complex64::new(0.0, 0.0));
                assert_eq!(r.terms, 2 * enumerate_gamma(spec, 8.0).unwrap().len());
            }
        }
    }

    #[test]
    fn theta_identity_term() {
        for twice in [5, 7, 13] {
            let r = partial_sum(CongruenceSpec::theta_section(), weight(0, twice), &MetElement::identity(), 2f64.sqrt())
                .unwrap();
            assert_eq!(r.terms, 1);
            assert!((r.value - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn theta_sums_settle() {
        let w = weight(0, 13);
        let s = MetElement::from_iwasawa(IwasawaCoords::new(0.1, 1.2, 0.4).unwrap());
        let trace = partial_sum_trace(CongruenceSpec::theta_section(), w, &s, &[6.0, 12.0, 24.0]).unwrap();
        let d1 = (trace[1].value - trace[0].value).norm();
        let d2 = (trace[2].value - trace[1].value).norm();
        assert!(d2 < d1, "{d1} then {d2}");
        assert!(trace.windows(2).all(|p| p[0].terms < p[1].terms && p[0].tail_estimate > p[1].tail_estimate));
    }

    #[test]
    fn order_does_not_matter() {
        let w = weight(1, 9);
        let s = MetElement::from_iwasawa(IwasawaCoords::new(-0.3, 0.8, 1.0).unwrap());
        let elems = lifted_elements(CongruenceSpec::theta_section(), 10.0).unwrap();
        let forward: Complex64 = elems.iter().map(|g| matrix_coefficient(w, &g.multiply(&s))).sum();
        let backward: Complex64 = elems.iter().rev().map(|g| matrix_coefficient(w, &g.multiply(&s))).sum();
        let pairwise = partial_sum(CongruenceSpec::theta_section(), w, &s, 10.0).unwrap().value;
        assert!((forward - backward).norm() < 1e-12);
        assert!((forward - pairwise).norm() < 1e-12);
    }

    #[test]
    fn margins() {
        let w = weight(0, 8);
        let m = margin_demo(6, w).unwrap();
        assert!(m > 0.0);
        let l1 = haar_l1(w, &QuadratureSpec::default()).unwrap();
        assert!(m <= l1.value + l1.tail_bound);
        assert!(margin_demo(5, w).is_err());
        // The margin shrinks as N approaches the threshold from above.
        let w = weight(3, 81);
        let t = threshold_n(3, w.m()).unwrap();
        assert!(t < 2.0);
        let m2 = margin_demo(2, w).unwrap();
        let m9 = margin_demo(9, w).unwrap();
        assert!(m2 > 0.0 && m2 < m9);
    }
}
