//! Gauss–Legendre rules and adaptive panel integration.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes from Newton iteration on `P_n`, started at Tricomi's
    /// approximations.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let nf = n as f64;
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Apply the rule on `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        pairwise_sum(self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(mid + half * x))) * half
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Deterministic pairwise summation.
pub fn pairwise_sum<I: Iterator<Item = f64>>(values: I) -> f64 {
    let v: Vec<f64> = values.collect();
    pairwise(&v)
}

fn pairwise(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => {
            let (l, r) = v.split_at(n / 2);
            pairwise(l) + pairwise(r)
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Sum of the accepted panels' `|coarse − fine|` differences.
    pub error: f64,
    pub panels: usize,
}

const MAX_DEPTH: u32 = 40;
const ROUNDING: f64 = 64.0 * f64::EPSILON;

/// Adaptive bisection on `[a, b]`: a panel is accepted once the rule on the
/// whole panel and on its two halves agree to `tol · width / (b − a)`, or to
/// a small multiple of the rounding error of the panel.
/// Panels are visited left to right, so the summation order is fixed.
pub fn adaptive<F: FnMut(f64) -> f64>(rule: &GaussLegendre, mut f: F, a: f64, b: f64, tol: f64) -> Integral {
    let total = b - a;
    if total == 0.0 {
        return Integral { value: 0.0, error: 0.0, panels: 0 };
    }
    let mut accepted: Vec<f64> = Vec::new();
    let mut error = 0.0;
    let whole = rule.integrate(&mut f, a, b);
    let mut stack: Vec<(f64, f64, f64, u32)> = alloc::vec![(a, b, whole, 0)];
    while let Some((lo, hi, coarse, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(&mut f, lo, mid);
        let right = rule.integrate(&mut f, mid, hi);
        let fine = left + right;
        let diff = (fine - coarse).abs();
        // Below the rounding floor further bisection cannot help.
        let budget = (tol * ((hi - lo) / total).abs()).max(ROUNDING * (left.abs() + right.abs()));
        if diff <= budget || depth >= MAX_DEPTH || !fine.is_finite() {
            accepted.push(fine);
            error += diff;
        } else {
            // Right half first so the left half is processed next.
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    Integral { value: pairwise(&accepted), error, panels: accepted.len() }
}

/// Periodic trapezoid rule with `n` nodes on `[0, period)`; exact for
/// trigonometric polynomials of degree below `n`.
pub fn periodic_trapezoid<F: FnMut(f64) -> f64>(mut f: F, period: f64, n: usize) -> f64 {
    let h = period / n as f64;
    pairwise_sum((0..n).map(|j| f(j as f64 * h))) * h
}
