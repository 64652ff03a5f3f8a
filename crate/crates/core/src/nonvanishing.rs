//! Thresholds `N_{k,m}` for the non-vanishing of Poincaré series of
//! `F_{k,m}`, the radius windows behind them, certificates and the grid
//! verification of the elementary estimates `N^close_{k,m}`.
//!
//! With `M = M(k/2 + 1, m/2 − 1)`, a radius `r` gives a set `C_r` on which
//! `F_{k,m}` carries more than half of its L¹ mass iff `tanh² r > M`, and
//! `C_r C_r^{−1}` meets `Γ ⊆ Γ(N)` only in the identity when
//! `tanh² r < (√(4/N² + 1) − 2/N)²`. Both hold for some `r` iff
//! `N > N_{k,m} = 4√M / (1 − M)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::betamedian::median;
use crate::coefficients::Weight;
use crate::error::invalid;
use crate::metgroup::HalfInt;
use crate::quadrature::{ln_beta, regularized_pair, BetaParams};
use crate::Result;

/// `|N − N_{k,m}|` at or below this is reported as a tie.
pub const TIE_TOL: f64 = 1e-10;
/// The constant `C` of `N^close`.
pub const CLOSE_C: f64 = 1.3738;
/// Offset of the estimate valid for `k ≤ 1000`.
pub const OFFSET_WIDE: f64 = 6.204;
/// Offset of the estimate valid for `k ≤ 158`.
pub const OFFSET_NARROW: f64 = 0.8018;
/// Largest `k` for which the wide estimate is claimed.
pub const K_MAX_WIDE: u32 = 1000;
/// Largest `k` for which the narrow estimate is claimed.
pub const K_MAX_NARROW: u32 = 158;
/// `m ≥ 26.4 + 16.9431k` forces `⌊N_{k,m}⌋ + 1 = 1`.
pub const TRIVIAL_INTERCEPT: f64 = 26.4;
/// `m ≤ 25.34 + 16.9431k` forces `⌊N_{k,m}⌋ + 1 > 1`.
pub const NONTRIVIAL_INTERCEPT: f64 = 25.34;
pub const SLOPE: f64 = 16.9431;

fn median_for(k: u32, m: HalfInt) -> Result<crate::betamedian::MedianResult> {
    if m.twice() <= 4 {
        return Err(invalid!("threshold needs m > 2 (got m = {m})"));
    }
    median(BetaParams::new(0.5 * k as f64 + 1.0, 0.5 * m.value() - 1.0)?)
}

fn n_from_median(value: f64, complement: f64) -> f64 {
    4.0 * value.sqrt() / complement
}

/// `N_{k,m} = 4√M / (1 − M)`.
pub fn threshold_n(k: u32, m: HalfInt) -> Result<f64> {
    let r = median_for(k, m)?;
    Ok(n_from_median(r.value, r.complement))
}

/// `N_{0,m} = 4 · 2^{1/(m−2)} √(4^{1/(m−2)} − 1)`.
pub fn threshold_k0(m: HalfInt) -> Result<f64> {
    if m.twice() <= 4 {
        return Err(invalid!("threshold needs m > 2 (got m = {m})"));
    }
    let e = core::f64::consts::LN_2 / (m.value() - 2.0);
    Ok(4.0 * e.exp() * (2.0 * e).exp_m1().sqrt())
}

/// `N_{k,4} = 4 / (2^{1/(k+2)} − 2^{−1/(k+2)})`.
pub fn threshold_m4(k: u32) -> f64 {
    let e = core::f64::consts::LN_2 / (k as f64 + 2.0);
    4.0 / (2.0 * e.sinh())
}

/// The exact value of `N_{k,m}` when `k = 0`, `m = 4` or `m = k + 4`.
pub fn threshold_closed_form(k: u32, m: HalfInt) -> Option<f64> {
    if m.twice() <= 4 {
        None
    } else if m.twice() == 2 * k as i64 + 8 {
        Some(4.0 * core::f64::consts::SQRT_2)
    } else if m.twice() == 8 {
        Some(threshold_m4(k))
    } else if k == 0 {
        threshold_k0(m).ok()
    } else {
        None
    }
}

/// Upper bound `4√(q(1 + q))` on `N_{k,m}` from the mean–mode bracket:
/// `q = (k+2)/(m−2)` if `0 < k < m − 4`, `q = k/(m−4)` if `0 < m − 4 < k`.
pub fn threshold_bounds(k: u32, m: HalfInt) -> Option<f64> {
    let two_k = 2 * k as i64;
    let two_m4 = m.twice() - 8;
    let (k_f, m_f) = (k as f64, m.value());
    let q = if k > 0 && two_k < two_m4 {
        (k_f + 2.0) / (m_f - 2.0)
    } else if two_m4 > 0 && two_m4 < two_k {
        k_f / (m_f - 4.0)
    } else {
        return None;
    };
    Some(4.0 * (q * (1.0 + q)).sqrt())
}

/// `N^close_{k,m} = 4√(q(1 + q))` with `q = (k + C)/(m − 4 + C)`.
pub fn threshold_close(k: u32, m: HalfInt) -> Result<f64> {
    let den = m.value() - 4.0 + CLOSE_C;
    if !(den > 0.0) {
        return Err(invalid!("N^close needs m > 4 - C (got m = {m})"));
    }
    let q = (k as f64 + CLOSE_C) / den;
    Ok(4.0 * (q * (1.0 + q)).sqrt())
}

/// `(√(4/N² + 1) − 2/N)²`, the bound on `tanh² r` from the group side.
pub fn separation_bound(n: u32) -> f64 {
    let inv = 2.0 / n as f64;
    // √(inv² + 1) − inv = 1 / (√(inv² + 1) + inv)
    let s = 1.0 / ((inv * inv + 1.0).sqrt() + inv);
    s * s
}

/// Whether `N` and `N_{k,m}` are within [`TIE_TOL`].
pub fn is_tie(n: u32, threshold: f64) -> bool {
    (n as f64 - threshold).abs() <= TIE_TOL
}

/// The open interval of `r > 0` with `M < tanh² r < (√(4/N²+1) − 2/N)²`.
pub fn r_window(n: u32, k: u32, m: HalfInt) -> Result<Option<(f64, f64)>> {
    if n == 0 {
        return Err(invalid!("N must be at least 1"));
    }
    let r = median_for(k, m)?;
    Ok(window_from(n, r.value, n_from_median(r.value, r.complement)))
}

fn window_from(n: u32, m_value: f64, threshold: f64) -> Option<(f64, f64)> {
    let upper = separation_bound(n);
    if is_tie(n, threshold) || !(m_value < upper) || !((n as f64) > threshold) {
        return None;
    }
    Some((m_value.sqrt().atanh(), upper.sqrt().atanh()))
}

/// `∫_{C_r}|F| − ∫_{Met∖C_r}|F|` written as `4π B(a, b) · fraction`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct L1Margin {
    /// The margin itself; underflows to 0 only for very large `k`, `m`.
    pub value: f64,
    /// `ln` of the margin, when it is positive.
    pub ln_value: Option<f64>,
    /// `2 I_{tanh² r}(a, b) − 1`, the margin as a fraction of the L¹ norm.
    pub fraction: f64,
}

/// The L¹ margin of `F_{k,m}` for the region `C_r`.
pub fn l1_margin(w: Weight, r: f64) -> Result<L1Margin> {
    let p = BetaParams::from_weight(w)?;
    let x = r.tanh().powi(2);
    let (lower, upper) = regularized_pair(p, x)?;
    let fraction = lower - upper;
    let ln_norm = (4.0 * PI).ln() + ln_beta(p);
    let ln_value = if fraction > 0.0 { Some(ln_norm + fraction.ln()) } else { None };
    Ok(L1Margin { value: ln_norm.exp() * fraction, ln_value, fraction })
}

/// Outcome of [`certify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "SCREAMING_SNAKE_CASE"))]
pub enum Verdict {
    Vanishes,
    Nonvanishing,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Vanishes => "VANISHES",
            Verdict::Nonvanishing => "NONVANISHING",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

/// A verdict on `P_Γ F_{k,m}` with the numbers behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Certificate {
    pub verdict: Verdict,
    #[cfg_attr(feature = "serde", serde(rename = "N"))]
    pub n: u32,
    pub k: u32,
    pub m: HalfInt,
    pub threshold: f64,
    pub median: f64,
    pub r_window: Option<(f64, f64)>,
    /// Margin at the midpoint of the window.
    pub l1_margin: Option<f64>,
    pub ln_l1_margin: Option<f64>,
    pub margin_fraction: Option<f64>,
}

/// Decide what the threshold criterion says about `P_Γ F_{k,m}` for
/// `Γ ⊆ Γ(N)`.
///
/// For odd `2m` (`m ≥ 5/2`) `Γ` lives in the metaplectic group and
/// `gamma_meets_k` states `Γ ∩ K ≠ {1}`, in which case the series vanishes
/// identically. For integer `m ≥ 3` the series descends to SL2(ℝ) and
/// `gamma_meets_k` states that `#(Γ ∩ SO₂)` does not divide `m + 2k`, i.e.
/// the character `χ_{m+2k}` is non-trivial on `Γ ∩ SO₂`.
///
/// The criterion is only sufficient, so `N ≤ N_{k,m}` gives
/// [`Verdict::Inconclusive`], as does a tie within [`TIE_TOL`].
pub fn certify(n: u32, k: u32, m: HalfInt, gamma_meets_k: bool) -> Result<Certificate> {
    if n == 0 {
        return Err(invalid!("N must be at least 1"));
    }
    if m.twice() < 5 || (!m.is_genuine() && m.twice() < 6) {
        return Err(invalid!("certificates need m >= 5/2, or integer m >= 3 (got m = {m})"));
    }
    let w = Weight::new(k, m)?;
    let med = median_for(k, m)?;
    let threshold = n_from_median(med.value, med.complement);
    let mut cert = Certificate {
        verdict: Verdict::Inconclusive,
        n,
        k,
        m,
        threshold,
        median: med.value,
        r_window: None,
        l1_margin: None,
        ln_l1_margin: None,
        margin_fraction: None,
    };
    if gamma_meets_k {
        cert.verdict = Verdict::Vanishes;
        return Ok(cert);
    }
    if let Some((lo, hi)) = window_from(n, med.value, threshold) {
        let margin = l1_margin(w, 0.5 * (lo + hi))?;
        cert.r_window = Some((lo, hi));
        cert.l1_margin = Some(margin.value);
        cert.ln_l1_margin = margin.ln_value;
        cert.margin_fraction = Some(margin.fraction);
        if margin.fraction > 0.0 {
            cert.verdict = Verdict::Nonvanishing;
        }
    }
    Ok(cert)
}

/// Offsets added to `N^close` in the two grid estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridOffsets {
    pub wide: f64,
    pub narrow: f64,
}

impl Default for GridOffsets {
    fn default() -> Self {
        GridOffsets { wide: OFFSET_WIDE, narrow: OFFSET_NARROW }
    }
}

/// Which side of the linear `m`-thresholds a cell lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Region {
    /// `m ≥ 26.4 + 16.9431k`: expect `⌊N⌋ + 1 = 1`.
    Trivial,
    /// `m ≤ 25.34 + 16.9431k`: expect `⌊N⌋ + 1 > 1`.
    Nontrivial,
    /// Strictly between the two lines.
    Unclassified,
}

/// One `(k, m)` cell of the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridCell {
    pub k: u32,
    pub two_m: i64,
    pub n_exact: f64,
    pub n_floor_plus_1: u64,
    pub n_close: f64,
    /// `⌈N^close + wide⌉ − (⌊N⌋ + 1) ∈ {0, …, 7}`; `None` for `k > 1000`.
    pub item1_ok: Option<bool>,
    /// `⌈N^close + narrow⌉ − (⌊N⌋ + 1) ∈ {0, 1}`; `None` for `k > 158`.
    pub item2_ok: Option<bool>,
    pub region: Region,
    /// Whether `⌊N⌋ + 1` matches the region; `None` when unclassified or
    /// `k > 1000`.
    pub item3_ok: Option<bool>,
}

impl GridCell {
    pub fn m(&self) -> HalfInt {
        HalfInt::from_twice(self.two_m)
    }

    /// No checked item fails.
    pub fn ok(&self) -> bool {
        self.item1_ok != Some(false) && self.item2_ok != Some(false) && self.item3_ok != Some(false)
    }
}

fn region_of(k: u32, m: f64) -> Region {
    let k = k as f64;
    if m >= TRIVIAL_INTERCEPT + SLOPE * k {
        Region::Trivial
    } else if m <= NONTRIVIAL_INTERCEPT + SLOPE * k {
        Region::Nontrivial
    } else {
        Region::Unclassified
    }
}

/// Evaluate one cell; `m ≥ 9/2`.
pub fn grid_cell(k: u32, m: HalfInt, offsets: GridOffsets) -> Result<GridCell> {
    if m.twice() < 9 {
        return Err(invalid!("grid cells need m >= 9/2 (got m = {m})"));
    }
    let n_exact = threshold_n(k, m)?;
    let n_close = threshold_close(k, m)?;
    let floor1 = n_exact.floor() as i64 + 1;
    let diff = |offset: f64| (n_close + offset).ceil() as i64 - floor1;
    let item1_ok = (k <= K_MAX_WIDE).then(|| (0..=7).contains(&diff(offsets.wide)));
    let item2_ok = (k <= K_MAX_NARROW).then(|| (0..=1).contains(&diff(offsets.narrow)));
    let region = region_of(k, m.value());
    let item3_ok = match region {
        _ if k > K_MAX_WIDE => None,
        Region::Trivial => Some(floor1 == 1),
        Region::Nontrivial => Some(floor1 > 1),
        Region::Unclassified => None,
    };
    Ok(GridCell {
        k,
        two_m: m.twice(),
        n_exact,
        n_floor_plus_1: floor1 as u64,
        n_close,
        item1_ok,
        item2_ok,
        region,
        item3_ok,
    })
}

/// Counts over a set of grid cells.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSummary {
    pub cells: u64,
    pub item1_violations: u64,
    pub item2_violations: u64,
    pub item3_violations: u64,
    pub unclassified: u64,
    /// First failing cell in `(k, 2m)` order.
    pub first_counterexample: Option<GridCell>,
}

impl GridSummary {
    pub fn record(&mut self, cell: &GridCell) {
        self.cells += 1;
        self.item1_violations += (cell.item1_ok == Some(false)) as u64;
        self.item2_violations += (cell.item2_ok == Some(false)) as u64;
        self.item3_violations += (cell.item3_ok == Some(false)) as u64;
        self.unclassified += (cell.region == Region::Unclassified) as u64;
        if !cell.ok() && self.first_counterexample.is_none() {
            self.first_counterexample = Some(*cell);
        }
    }

    /// Combine with the summary of cells that come after these.
    pub fn merge(&mut self, later: &GridSummary) {
        self.cells += later.cells;
        self.item1_violations += later.item1_violations;
        self.item2_violations += later.item2_violations;
        self.item3_violations += later.item3_violations;
        self.unclassified += later.unclassified;
        if self.first_counterexample.is_none() {
            self.first_counterexample = later.first_counterexample;
        }
    }

    pub fn violations(&self) -> u64 {
        self.item1_violations + self.item2_violations + self.item3_violations
    }
}

/// All cells with a summary.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridReport {
    pub cells: Vec<GridCell>,
    pub summary: GridSummary,
}

/// Grid bounds: the documented desk scale or the full claimed range.
pub const DESK_K_MAX: u32 = 20;
pub const DESK_TWO_M_MAX: i64 = 400;
pub const FULL_K_MAX: u32 = 1000;
/// `m < 16970`.
pub const FULL_TWO_M_MAX: i64 = 33_939;

fn check_grid(k_max: u32, m_max: HalfInt) -> Result<()> {
    if k_max > FULL_K_MAX {
        return Err(invalid!("grid verification covers k <= {FULL_K_MAX} (got {k_max})"));
    }
    if m_max.twice() < 9 {
        return Err(invalid!("grid needs m_max >= 9/2 (got {m_max})"));
    }
    Ok(())
}

/// The cells `k = k`, `m = 9/2, 5, …, m_max` in order.
pub fn grid_row(k: u32, m_max: HalfInt, offsets: GridOffsets) -> Result<Vec<GridCell>> {
    (9..=m_max.twice()).map(|t| grid_cell(k, HalfInt::from_twice(t), offsets)).collect()
}

/// Sweep `k ≤ k_max`, `9/2 ≤ m ≤ m_max`, handing each cell to `report` in
/// `(k, 2m)` order.
pub fn verify_grid<R: FnMut(&GridCell)>(
    k_max: u32,
    m_max: HalfInt,
    offsets: GridOffsets,
    mut report: R,
) -> Result<GridSummary> {
    check_grid(k_max, m_max)?;
    let mut summary = GridSummary::default();
    for k in 0..=k_max {
        for t in 9..=m_max.twice() {
            let cell = grid_cell(k, HalfInt::from_twice(t), offsets)?;
            summary.record(&cell);
            report(&cell);
        }
    }
    Ok(summary)
}

/// [`verify_grid`] keeping every cell.
pub fn verify_grid_collect(k_max: u32, m_max: HalfInt, offsets: GridOffsets) -> Result<GridReport> {
    let mut cells = Vec::new();
    let summary = verify_grid(k_max, m_max, offsets, |c| cells.push(*c))?;
    Ok(GridReport { cells, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{beta_complete, incomplete_beta};
    use proptest::prelude::*;

    fn half(twice: i64) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    #[test]
    fn closed_forms() {
        for k in 0..=50 {
            let n = threshold_n(k, half(2 * k as i64 + 8)).unwrap();
            assert!((n - 4.0 * 2f64.sqrt()).abs() <= 1e-9, "k = {k}: {n}");
            let n = threshold_n(k, half(8)).unwrap();
            let e = 1.0 / (k as f64 + 2.0);
            let want = 4.0 / (2f64.powf(e) - 2f64.powf(-e));
            assert!((n - want).abs() <= 1e-9);
            assert!((threshold_m4(k) - want).abs() <= 1e-12 * want);
        }
        for twice in 5..120 {
            let m = twice as f64 / 2.0;
            let e = 1.0 / (m - 2.0);
            let want = 4.0 * 2f64.powf(e) * (4f64.powf(e) - 1.0).sqrt();
            assert!((threshold_n(0, half(twice)).unwrap() - want).abs() <= 1e-9, "m = {m}");
            assert!((threshold_k0(half(twice)).unwrap() - want).abs() <= 1e-12 * want);
        }
        assert_eq!(threshold_closed_form(3, half(14)), Some(4.0 * 2f64.sqrt()));
        assert_eq!(threshold_closed_form(3, half(15)), None);
        assert!(threshold_n(0, half(4)).is_err());
    }

    #[test]
    fn bounds_exceed_threshold() {
        let b = threshold_bounds(1, half(20)).unwrap();
        assert!((b - 4.0 * (3.0 / 8.0 * 11.0 / 8.0f64).sqrt()).abs() < 1e-14);
        assert!(b > threshold_n(1, half(20)).unwrap());
        let b = threshold_bounds(10, half(10)).unwrap();
        assert!((b - 4.0 * 110f64.sqrt()).abs() < 1e-12);
        assert!(b > threshold_n(10, half(10)).unwrap());
        assert_eq!(threshold_bounds(3, half(14)), None);
        assert_eq!(threshold_bounds(0, half(20)), None);
        assert_eq!(threshold_bounds(5, half(8)), None);
    }

    #[test]
    fn close_values() {
        let q = 1.3738 / 1.8738;
        let want = 4.0 * (q * (1.0 + q) as f64).sqrt();
        assert!((threshold_close(0, half(9)).unwrap() - want).abs() < 1e-15);
        assert!(threshold_close(0, half(5)).is_err());
        assert!(threshold_close(0, half(6)).is_ok());
        let v = threshold_close(1000, half(33_940)).unwrap();
        assert_eq!((v + 6.204).ceil(), 8.0);
        let v = threshold_close(158, half(5405)).unwrap();
        assert_eq!((v + 0.8018).ceil(), 2.0);
    }

    #[test]
    fn anchors() {
        let n = threshold_n(1000, half(33_940)).unwrap();
        assert!(n < 1.0 && n > 0.99, "{n}");
        assert_eq!(n.floor() + 1.0, 1.0);
        let n = threshold_n(158, half(5405)).unwrap();
        assert_eq!(n.floor() + 1.0, 1.0);
    }

    #[test]
    fn windows() {
        let m = half(9);
        let t = threshold_n(0, m).unwrap();
        assert!(t > 4.5 && t < 4.6);
        assert_eq!(r_window(4, 0, m).unwrap(), None);
        let (lo, hi) = r_window(5, 0, m).unwrap().unwrap();
        assert!(lo < hi);
        for k in 0..6 {
            for twice in [5, 7, 9, 14, 30] {
                let m = half(twice);
                let t = threshold_n(k, m).unwrap();
                let floor = t.floor() as u32;
                if floor >= 1 {
                    assert_eq!(r_window(floor, k, m).unwrap(), None);
                }
                let (lo, hi) = r_window(floor + 1, k, m).unwrap().unwrap();
                let med = median(BetaParams::new(0.5 * k as f64 + 1.0, 0.5 * m.value() - 1.0).unwrap()).unwrap();
                assert!((lo.tanh().powi(2) - med.value).abs() <= 1e-10);
                assert!((hi.tanh().powi(2) - separation_bound(floor + 1)).abs() <= 1e-10);
            }
        }
        assert!(r_window(0, 0, m).is_err());
    }

    #[test]
    fn separation_bound_matches_norm_condition() {
        // tanh² r < bound ⇔ N² + 2 > 2 cosh 4r.
        for n in 1..40u32 {
            let r = separation_bound(n).sqrt().atanh();
            let lhs = (n * n + 2) as f64;
            assert!((lhs - 2.0 * (4.0 * r).cosh()).abs() < 1e-9 * lhs);
        }
    }

    #[test]
    fn certificates() {
        let c = certify(1000, 3, half(9), true).unwrap();
        assert_eq!(c.verdict, Verdict::Vanishes);
        let c = certify(6, 0, half(8), false).unwrap();
        assert_eq!(c.verdict, Verdict::Nonvanishing);
        assert!(c.l1_margin.unwrap() > 0.0 && c.r_window.is_some());
        let c = certify(1, 0, half(54), false).unwrap();
        assert_eq!(c.verdict, Verdict::Nonvanishing);
        let c = certify(5, 0, half(8), false).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert!(c.r_window.is_none());
        assert!(certify(1, 0, half(4), false).is_err());
        assert!(certify(1, 0, half(5), false).is_ok());
        assert!(certify(1, 0, half(6), false).is_ok());
        assert!(certify(1, 0, half(3), false).is_err());
        assert!(certify(0, 0, half(9), false).is_err());
    }

    #[test]
    fn margin_matches_incomplete_beta() {
        let w = Weight::new(2, half(11)).unwrap();
        let p = BetaParams::from_weight(w).unwrap();
        for r in [0.3, 0.8, 1.7] {
            let x = (r as f64).tanh().powi(2);
            let want = 4.0 * PI * (2.0 * incomplete_beta(p, x).unwrap() - beta_complete(p));
            let got = l1_margin(w, r).unwrap();
            assert!((got.value - want).abs() < 1e-12, "r = {r}");
        }
    }

    #[test]
    fn large_margin_keeps_its_logarithm() {
        let c = certify(3, 1000, half(33_940), false).unwrap();
        assert_eq!(c.verdict, Verdict::Nonvanishing);
        assert!(c.ln_l1_margin.unwrap().is_finite());
        assert!(c.margin_fraction.unwrap() > 0.0);
    }

    #[test]
    fn desk_grid_items() {
        let report = verify_grid_collect(4, half(60), GridOffsets::default()).unwrap();
        assert_eq!(report.cells.len(), 5 * (60 - 8));
        assert_eq!(report.summary.violations(), 0);
        assert!(report.cells.windows(2).all(|w| (w[0].k, w[0].two_m) < (w[1].k, w[1].two_m)));
        assert!(verify_grid(1001, half(20), GridOffsets::default(), |_| ()).is_err());
    }

    #[test]
    fn corrupted_offsets_are_caught() {
        let offsets = GridOffsets { wide: 20.0, narrow: 5.0 };
        let report = verify_grid_collect(1, half(12), offsets).unwrap();
        assert!(report.summary.item1_violations > 0 && report.summary.item2_violations > 0);
        let first = report.summary.first_counterexample.unwrap();
        assert_eq!((first.k, first.two_m), (0, 9));
    }

    #[test]
    fn regions() {
        assert_eq!(region_of(0, 26.5), Region::Trivial);
        assert_eq!(region_of(0, 25.0), Region::Nontrivial);
        assert_eq!(region_of(0, 26.0), Region::Unclassified);
        let mut s = GridSummary::default();
        s.record(&grid_cell(0, half(52), GridOffsets::default()).unwrap());
        assert_eq!(s.unclassified, 1);
    }

    proptest! {
        #[test]
        fn monotone_threshold(k in 0u32..200, twice in 5i64..2000) {
            let t = threshold_n(k, half(twice)).unwrap();
            prop_assert!(threshold_n(k + 1, half(twice)).unwrap() > t);
            prop_assert!(threshold_n(k, half(twice + 1)).unwrap() < t);
        }

        #[test]
        fn bounds_dominate(k in 1u32..300, twice in 9i64..2000) {
            if let Some(b) = threshold_bounds(k, half(twice)) {
                prop_assert!(b > threshold_n(k, half(twice)).unwrap());
            }
        }

        #[test]
        fn window_iff_above_threshold(n in 1u32..40, k in 0u32..20, twice in 5i64..80) {
            let m = half(twice);
            let t = threshold_n(k, m).unwrap();
            let w = r_window(n, k, m).unwrap();
            if is_tie(n, t) {
                prop_assert!(w.is_none());
            } else {
                prop_assert_eq!(w.is_some(), n as f64 > t);
            }
        }

        #[test]
        fn nonvanishing_has_positive_margin(n in 1u32..40, k in 0u32..20, twice in 5i64..80) {
            let m = half(twice);
            if twice % 2 == 0 && twice < 6 {
                return Ok(());
            }
            let c = certify(n, k, m, false).unwrap();
            if c.verdict == Verdict::Nonvanishing {
                prop_assert!(n as f64 > c.threshold);
                prop_assert!(c.r_window.is_some());
                prop_assert!(c.l1_margin.unwrap() > 0.0);
            }
        }
    }
}
