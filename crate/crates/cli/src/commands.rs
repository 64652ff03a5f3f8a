use std::io::Write;

use metaplectic_core::coefficients::{f_km, f_km_cartan, lift_iwasawa, matrix_coefficient};
use metaplectic_core::nonvanishing::{
    grid_row, is_tie, r_window, separation_bound, threshold_bounds, threshold_close, threshold_closed_form,
    GridOffsets, GridSummary, FULL_K_MAX, FULL_TWO_M_MAX,
};
use metaplectic_core::poincare::{lifted_elements, max_abs_partial_sum, partial_sum_trace, CongruenceSpec, Variant};
use metaplectic_core::quadrature::{haar_l1, l1_closed_form};
use metaplectic_core::{
    certify, median, threshold_n, BetaParams, CartanCoords, Complex64, HalfInt, IwasawaCoords, MetElement,
    QuadratureSpec, Weight,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{parse_half_int, parse_triple, Command, PointArg, VariantArg, WeightArg};
use crate::{CliError, SCHEMA};

type Out<'a> = &'a mut dyn Write;

pub fn dispatch(cmd: &Command, out: Out) -> Result<(), CliError> {
    match cmd {
        Command::Median { a, b } => median_cmd(*a, *b, out),
        Command::Threshold { k, m } => threshold_cmd(*k, m, out),
        Command::Certify { n, k, m, gamma_meets_k } => certify_cmd(*n, *k, m, *gamma_meets_k, out),
        Command::Window { n, k, m } => window_cmd(*n, *k, m, out),
        Command::Coeff { k, m, at } => coeff_cmd(*k, m, at, out),
        Command::L1norm { k, m, truncation, nodes, tol, full_3d } => {
            let spec = QuadratureSpec::new(*truncation, *nodes, *tol)?.with_full_3d(*full_3d);
            l1norm_cmd(*k, m, &spec, out)
        }
        Command::Poincare { variant, n, k, m, radius, at } => poincare_cmd(*variant, *n, *k, m, radius, at, out),
        Command::VerifyGrid { kmax, mmax, full } => {
            let (k_max, m_max) = if *full {
                (FULL_K_MAX, HalfInt::from_twice(FULL_TWO_M_MAX))
            } else {
                let k = kmax.ok_or("--kmax is required")?;
                (k, parse_half_int(mmax.as_deref().ok_or("--mmax is required")?)?)
            };
            verify_grid_cmd(k_max, m_max, out)
        }
        Command::CancelTest { n, k, m, radius, points } => cancel_cmd(*n, *k, m, *radius, *points, out),
    }
}

fn json<T: Serialize>(value: &T, out: Out) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn weight(k: u32, m: &WeightArg) -> Result<Weight, CliError> {
    Ok(Weight::new(k, m.half_int()?)?)
}

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("--{name} must be finite (got {v})").into())
    }
}

#[derive(Serialize)]
struct ComplexOut {
    re: f64,
    im: f64,
}

impl From<Complex64> for ComplexOut {
    fn from(z: Complex64) -> Self {
        ComplexOut { re: z.re, im: z.im }
    }
}

#[derive(Serialize)]
struct MedianOut {
    schema: u32,
    a: f64,
    b: f64,
    value: f64,
    complement: f64,
    residual: f64,
    iterations: u32,
}

fn median_cmd(a: f64, b: f64, out: Out) -> Result<(), CliError> {
    let r = median(BetaParams::new(finite("a", a)?, finite("b", b)?)?)?;
    json(
        &MedianOut {
            schema: SCHEMA,
            a,
            b,
            value: r.value,
            complement: r.complement,
            residual: r.residual,
            iterations: r.iterations,
        },
        out,
    )
}

#[derive(Serialize)]
struct ThresholdOut {
    schema: u32,
    k: u32,
    m: f64,
    two_m: i64,
    #[serde(rename = "N")]
    n: f64,
    closed_form: Option<f64>,
    #[serde(rename = "N_close")]
    n_close: Option<f64>,
    upper_bound: Option<f64>,
}

fn threshold_cmd(k: u32, m: &WeightArg, out: Out) -> Result<(), CliError> {
    let m = m.half_int()?;
    json(
        &ThresholdOut {
            schema: SCHEMA,
            k,
            m: m.value(),
            two_m: m.twice(),
            n: threshold_n(k, m)?,
            closed_form: threshold_closed_form(k, m),
            n_close: threshold_close(k, m).ok(),
            upper_bound: threshold_bounds(k, m),
        },
        out,
    )
}

#[derive(Serialize)]
struct CertificateOut {
    schema: u32,
    verdict: &'static str,
    #[serde(rename = "N")]
    n: u32,
    k: u32,
    m: f64,
    two_m: i64,
    threshold: f64,
    median: f64,
    r_window: Option<(f64, f64)>,
    l1_margin: Option<f64>,
    ln_l1_margin: Option<f64>,
    margin_fraction: Option<f64>,
}

fn certify_cmd(n: u32, k: u32, m: &WeightArg, gamma_meets_k: bool, out: Out) -> Result<(), CliError> {
    let c = certify(n, k, m.half_int()?, gamma_meets_k)?;
    json(
        &CertificateOut {
            schema: SCHEMA,
            verdict: c.verdict.as_str(),
            n: c.n,
            k: c.k,
            m: c.m.value(),
            two_m: c.m.twice(),
            threshold: c.threshold,
            median: c.median,
            r_window: c.r_window,
            l1_margin: c.l1_margin,
            ln_l1_margin: c.ln_l1_margin,
            margin_fraction: c.margin_fraction,
        },
        out,
    )
}

#[derive(Serialize)]
struct WindowOut {
    schema: u32,
    #[serde(rename = "N")]
    n: u32,
    k: u32,
    m: f64,
    two_m: i64,
    threshold: f64,
    median: f64,
    separation_bound: f64,
    tie: bool,
    r_window: Option<(f64, f64)>,
}

fn window_cmd(n: u32, k: u32, m: &WeightArg, out: Out) -> Result<(), CliError> {
    let m = m.half_int()?;
    let window = r_window(n, k, m)?;
    let med = median(BetaParams::new(0.5 * k as f64 + 1.0, 0.5 * m.value() - 1.0)?)?;
    let threshold = threshold_n(k, m)?;
    json(
        &WindowOut {
            schema: SCHEMA,
            n,
            k,
            m: m.value(),
            two_m: m.twice(),
            threshold,
            median: med.value,
            separation_bound: separation_bound(n),
            tie: is_tie(n, threshold),
            r_window: window,
        },
        out,
    )
}

#[derive(Serialize)]
struct CoeffOut {
    schema: u32,
    k: u32,
    m: f64,
    two_m: i64,
    coordinates: &'static str,
    point: [f64; 3],
    cartan_formula: ComplexOut,
    lift: ComplexOut,
    difference: f64,
}

fn coeff_cmd(k: u32, m: &WeightArg, at: &PointArg, out: Out) -> Result<(), CliError> {
    let w = weight(k, m)?;
    let (coordinates, point, cartan, lifted) = match (&at.cartan, &at.iwasawa) {
        (Some(s), None) => {
            let p = parse_triple(s)?;
            let c = CartanCoords::new(p[0], p[1], p[2])?;
            ("cartan", p, f_km_cartan(w, c), matrix_coefficient(w, &MetElement::from_cartan(c)))
        }
        (None, Some(s)) => {
            let p = parse_triple(s)?;
            let c = IwasawaCoords::new(p[0], p[1], p[2])?;
            let cartan = f_km_cartan(w, MetElement::from_iwasawa(c).to_cartan());
            ("iwasawa", p, cartan, lift_iwasawa(|z| f_km(w, z), w, c)?)
        }
        _ => return Err("give exactly one of --cartan and --iwasawa".into()),
    };
    json(
        &CoeffOut {
            schema: SCHEMA,
            k,
            m: w.m().value(),
            two_m: w.m().twice(),
            coordinates,
            point,
            cartan_formula: cartan.into(),
            lift: lifted.into(),
            difference: (cartan - lifted).norm(),
        },
        out,
    )
}

#[derive(Serialize)]
struct L1Out {
    schema: u32,
    k: u32,
    m: f64,
    two_m: i64,
    value: f64,
    closed_form: f64,
    difference: f64,
    tail_bound: f64,
    cutoff: f64,
    quadrature_error: f64,
    full_3d: bool,
}

fn l1norm_cmd(k: u32, m: &WeightArg, spec: &QuadratureSpec, out: Out) -> Result<(), CliError> {
    let w = weight(k, m)?;
    let closed_form = l1_closed_form(w)?;
    let r = haar_l1(w, spec)?;
    json(
        &L1Out {
            schema: SCHEMA,
            k,
            m: w.m().value(),
            two_m: w.m().twice(),
            value: r.value,
            closed_form,
            difference: r.value - closed_form,
            tail_bound: r.tail_bound,
            cutoff: r.cutoff,
            quadrature_error: r.quadrature_error,
            full_3d: spec.full_3d,
        },
        out,
    )
}

fn base_point(at: &str) -> Result<MetElement, CliError> {
    let p = parse_triple(at)?;
    Ok(MetElement::from_iwasawa(IwasawaCoords::new(p[0], p[1], p[2])?))
}

fn poincare_cmd(
    variant: VariantArg,
    n: u32,
    k: u32,
    m: &WeightArg,
    radii: &[f64],
    at: &str,
    out: Out,
) -> Result<(), CliError> {
    let variant = match variant {
        VariantArg::Preimage => Variant::FullPreimage,
        VariantArg::Theta => Variant::ThetaSection,
    };
    let spec = CongruenceSpec::new(n, variant)?;
    let w = weight(k, m)?;
    let s = base_point(at)?;
    for &r in radii {
        finite("radius", r)?;
    }
    let trace = partial_sum_trace(spec, w, &s, radii)?;
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(["radius", "terms", "re", "im", "tail_estimate"])?;
    for p in &trace {
        csv.write_record([
            p.radius.to_string(),
            p.terms.to_string(),
            p.value.re.to_string(),
            p.value.im.to_string(),
            p.tail_estimate.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

const GRID_CHUNK: usize = 64;

fn flag(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "true",
        Some(false) => "false",
        None => "",
    }
}

#[derive(Serialize)]
struct GridSummaryOut {
    schema: u32,
    k_max: u32,
    two_m_max: i64,
    violations: u64,
    #[serde(flatten)]
    summary: GridSummary,
}

/// Rows are computed in parallel over `k`, a chunk at a time, and written
/// in order; the summary goes to standard error.
fn verify_grid_cmd(k_max: u32, m_max: HalfInt, out: Out) -> Result<(), CliError> {
    if m_max.twice() < 9 {
        return Err(format!("--mmax must be at least 9/2 (got {m_max})").into());
    }
    let offsets = GridOffsets::default();
    let ks: Vec<u32> = (0..=k_max).collect();
    let mut summary = GridSummary::default();
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(["k", "2m", "N_exact", "N_floor_plus_1", "N_close", "item1_ok", "item2_ok"])?;
    for chunk in ks.chunks(GRID_CHUNK) {
        let rows: Vec<_> = chunk
            .par_iter()
            .map(|&k| {
                grid_row(k, m_max, offsets).map(|cells| {
                    let mut s = GridSummary::default();
                    cells.iter().for_each(|c| s.record(c));
                    (cells, s)
                })
            })
            .collect();
        for row in rows {
            let (cells, s) = row?;
            for c in &cells {
                csv.write_record([
                    c.k.to_string().as_str(),
                    &c.two_m.to_string(),
                    &c.n_exact.to_string(),
                    &c.n_floor_plus_1.to_string(),
                    &c.n_close.to_string(),
                    flag(c.item1_ok),
                    flag(c.item2_ok),
                ])?;
            }
            summary.merge(&s);
        }
    }
    csv.flush()?;
    let report = GridSummaryOut {
        schema: SCHEMA,
        k_max,
        two_m_max: m_max.twice(),
        violations: summary.violations(),
        summary,
    };
    eprintln!("{}", serde_json::to_string(&report).map_err(std::io::Error::from)?);
    Ok(())
}

#[derive(Serialize)]
struct CancelOut {
    schema: u32,
    #[serde(rename = "N")]
    n: u32,
    k: u32,
    m: f64,
    two_m: i64,
    radius: f64,
    points: usize,
    terms: usize,
    max_abs_sum: f64,
}

/// Deterministic base points from an additive recurrence in Iwasawa
/// coordinates: `x ∈ [−2, 2)`, `y ∈ [0.25, 4)`, `t ∈ [0, 4π)`.
fn sample_points(count: usize) -> Vec<MetElement> {
    const STEPS: [f64; 3] = [0.819_172_513_396_164_4, 0.671_043_606_703_789_2, 0.549_700_477_901_970_4];
    (1..=count)
        .map(|i| {
            let u = STEPS.map(|a| (i as f64 * a).fract());
            let c = IwasawaCoords::new(4.0 * u[0] - 2.0, 0.25 * 16f64.powf(u[1]), 4.0 * std::f64::consts::PI * u[2]);
            MetElement::from_iwasawa(c.expect("sample coordinates are valid"))
        })
        .collect()
}

fn cancel_cmd(n: u32, k: u32, m: &WeightArg, radius: f64, points: usize, out: Out) -> Result<(), CliError> {
    let spec = CongruenceSpec::full_preimage(n)?;
    let w = weight(k, m)?;
    finite("radius", radius)?;
    if points == 0 {
        return Err("--points must be positive".into());
    }
    let terms = lifted_elements(spec, radius)?.len();
    let max_abs_sum = max_abs_partial_sum(spec, w, &sample_points(points), radius)?;
    json(
        &CancelOut {
            schema: SCHEMA,
            n,
            k,
            m: w.m().value(),
            two_m: w.m().twice(),
            radius,
            points,
            terms,
            max_abs_sum,
        },
        out,
    )
}
