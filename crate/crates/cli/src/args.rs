use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use metaplectic_core::HalfInt;

#[derive(Parser, Debug)]
#[command(name = "metaplectic", version, about = "Metaplectic matrix coefficients, thresholds and Poincaré sums")]
pub struct Cli {
    /// Write output to PATH instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Median of the beta distribution.
    Median {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
    },
    /// The threshold N_{k,m}, its closed form and approximations.
    Threshold {
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        m: WeightArg,
    },
    /// Non-vanishing certificate for level N.
    Certify {
        #[arg(long = "N")]
        n: u32,
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        m: WeightArg,
        /// The subgroup meets the maximal compact (contains -I).
        #[arg(long)]
        gamma_meets_k: bool,
    },
    /// The radius window for level N.
    Window {
        #[arg(long = "N")]
        n: u32,
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        m: WeightArg,
    },
    /// F_{k,m} at a point, by the Cartan formula and through the lift.
    Coeff {
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        m: WeightArg,
        #[command(flatten)]
        at: PointArg,
    },
    /// Haar L1 norm by quadrature against the closed form.
    L1norm {
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        m: WeightArg,
        /// Cutoff in the Cartan radius; chosen from the tolerance if absent.
        #[arg(long)]
        truncation: Option<f64>,
        #[arg(long, default_value_t = 20)]
        nodes: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Integrate over all three Cartan coordinates.
        #[arg(long)]
        full_3d: bool,
    },
    /// Partial Poincaré sums, one CSV row per radius.
    Poincare {
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[arg(long = "N")]
        n: u32,
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        m: WeightArg,
        /// One or more radii, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        radius: Vec<f64>,
        /// Base point in Iwasawa coordinates.
        #[arg(long, value_name = "X,Y,T", allow_hyphen_values = true)]
        at: String,
    },
    /// Threshold grid as CSV; summary on standard error.
    VerifyGrid {
        #[arg(long, required_unless_present = "full")]
        kmax: Option<u32>,
        /// Largest m, a half-integer.
        #[arg(long, required_unless_present = "full")]
        mmax: Option<String>,
        /// The full range k <= 1000, m <= 33939/2.
        #[arg(long, conflicts_with_all = ["kmax", "mmax"])]
        full: bool,
    },
    /// Largest |partial sum| of the full preimage of Gamma(N) over sample points.
    CancelTest {
        #[arg(long = "N")]
        n: u32,
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        m: WeightArg,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct WeightArg {
    /// Weight m as a decimal half-integer, e.g. 2.5.
    #[arg(long)]
    pub m: Option<String>,
    /// Weight given as the integer 2m.
    #[arg(long = "two-m")]
    pub two_m: Option<i64>,
}

impl WeightArg {
    pub fn half_int(&self) -> Result<HalfInt, String> {
        match (&self.m, self.two_m) {
            (Some(s), None) => parse_half_int(s),
            (None, Some(t)) => Ok(HalfInt::from_twice(t)),
            _ => Err("give exactly one of --m and --two-m".into()),
        }
    }
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct PointArg {
    /// Cartan coordinates.
    #[arg(long, value_name = "THETA1,T,THETA2", allow_hyphen_values = true)]
    pub cartan: Option<String>,
    /// Iwasawa coordinates.
    #[arg(long, value_name = "X,Y,T", allow_hyphen_values = true)]
    pub iwasawa: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum VariantArg {
    Preimage,
    Theta,
}

/// Exact half-integer from a decimal string, rejecting e.g. `2.3`.
pub fn parse_half_int(s: &str) -> Result<HalfInt, String> {
    let s = s.trim();
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let frac = frac.trim_end_matches('0');
    let half = match frac {
        "" => false,
        "5" => true,
        _ => return Err(format!("m = {s} is not a half-integer")),
    };
    let negative = int.starts_with('-');
    let whole: i64 = match int {
        "" | "-" | "+" => 0,
        _ => int.parse().map_err(|_| format!("cannot parse m = {s}"))?,
    };
    let twice = whole
        .checked_mul(2)
        .and_then(|t| if half { if negative { t.checked_sub(1) } else { t.checked_add(1) } } else { Some(t) })
        .ok_or_else(|| format!("m = {s} is out of range"))?;
    Ok(HalfInt::from_twice(twice))
}

/// Three comma-separated finite numbers.
pub fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got '{s}'"));
    }
    let mut out = [0.0f64; 3];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p.parse().map_err(|_| format!("cannot parse '{p}' as a number"))?;
        if !o.is_finite() {
            return Err(format!("'{p}' is not finite"));
        }
    }
    Ok(out)
}
