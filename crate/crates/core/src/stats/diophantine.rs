//! Diophantine sums `Σ 1/(8π² m² ‖mα‖²)` and the variance constant σ(α)².

use std::f64::consts::PI;

use serde::Serialize;

use crate::birkhoff::StreamOptions;
use crate::cf::{alpha_value, index_of, PartialQuotientSource, SourceKind};
use crate::default_bits;
use crate::error::{Error, Result};
use crate::rotation::{drive_orbit, guard};
use crate::summation::CompensatedSum;

/// `Σ_{m<=M} w(m) / ‖mα‖²` evaluated at each point of an increasing `grid`.
pub fn weighted_inverse_square_grid(
    src: &PartialQuotientSource,
    grid: &[u64],
    opts: &StreamOptions,
    weight: impl Fn(u64) -> f64 + Sync,
) -> Result<Vec<f64>> {
    check_grid(grid, 1)?;
    let last = *grid.last().expect("nonempty grid");
    let bits = opts.bits.unwrap_or_else(|| default_bits(last));
    let alpha = alpha_value(src, bits)?;
    let mut acc = CompensatedSum::new();
    let mut out = Vec::with_capacity(grid.len());
    let mut next = 0usize;
    drive_orbit(
        &alpha,
        1,
        last,
        opts.chunk_size,
        |m, x| {
            let d = guard(x, m)?;
            Ok(weight(m) / (d * d))
        },
        |m, t: f64| {
            acc.add(t);
            if m == grid[next] {
                out.push(acc.value());
                next += 1;
            }
        },
    )?;
    Ok(out)
}

pub(crate) fn check_grid(grid: &[u64], min_len: usize) -> Result<()> {
    if grid.len() < min_len {
        return Err(Error::InvalidArgument(format!(
            "grid needs at least {min_len} points"
        )));
    }
    if grid[0] == 0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "grid must be positive and strictly increasing".into(),
        ));
    }
    Ok(())
}

fn dioph_weight(m: u64) -> f64 {
    let mf = m as f64;
    1.0 / (8.0 * PI * PI * mf * mf)
}

/// `Σ_{m=1}^M 1/(8π² m² ‖mα‖²)`.
pub fn diophantine_sum(src: &PartialQuotientSource, m: u64, opts: &StreamOptions) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("M must be at least 1".into()));
    }
    Ok(weighted_inverse_square_grid(src, &[m], opts, dioph_weight)?[0])
}

/// [`diophantine_sum`] at every point of an increasing grid, in one pass.
pub fn diophantine_sum_grid(
    src: &PartialQuotientSource,
    grid: &[u64],
    opts: &StreamOptions,
) -> Result<Vec<f64>> {
    weighted_inverse_square_grid(src, grid, opts, dioph_weight)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosedFormAlpha {
    Golden,
    Sqrt3,
}

impl std::str::FromStr for ClosedFormAlpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "golden" => Ok(ClosedFormAlpha::Golden),
            "sqrt3" | "sqrt:3" => Ok(ClosedFormAlpha::Sqrt3),
            other => Err(Error::Unsupported(format!(
                "no closed form for sigma^2 of `{other}`"
            ))),
        }
    }
}

impl ClosedFormAlpha {
    /// Recognizes sources whose fractional part is that of φ or √3.
    pub fn of_source(src: &PartialQuotientSource) -> Option<Self> {
        match &src.kind {
            SourceKind::Quadratic { preperiod, period } if preperiod.is_empty() => {
                match period.as_slice() {
                    [1] => Some(ClosedFormAlpha::Golden),
                    [1, 2] => Some(ClosedFormAlpha::Sqrt3),
                    _ => None,
                }
            }
            _ => None,
        }
    }
}

/// Closed forms `π²/(60√5 log φ)` and `π²/(24√3 log(2+√3))`.
pub fn sigma2_closed_form(alpha: ClosedFormAlpha) -> f64 {
    match alpha {
        ClosedFormAlpha::Golden => {
            let phi = (1.0 + 5f64.sqrt()) / 2.0;
            PI * PI / (60.0 * 5f64.sqrt() * phi.ln())
        }
        ClosedFormAlpha::Sqrt3 => PI * PI / (24.0 * 3f64.sqrt() * (2.0 + 3f64.sqrt()).ln()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridPoint {
    pub m: u64,
    pub sum: f64,
    /// `sum / log M`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sigma2Estimate {
    pub slope: f64,
    pub intercept: f64,
    pub per_point: Vec<GridPoint>,
}

/// Ordinary least squares `y ≈ intercept + slope · x`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fits `diophantine_sum(M) ≈ c + σ² log M` over the grid.
pub fn sigma2_estimate(
    src: &PartialQuotientSource,
    grid: &[u64],
    opts: &StreamOptions,
) -> Result<Sigma2Estimate> {
    check_grid(grid, 3)?;
    let sums = diophantine_sum_grid(src, grid, opts)?;
    Ok(sigma2_from_sums(grid, &sums))
}

pub fn sigma2_from_sums(grid: &[u64], sums: &[f64]) -> Sigma2Estimate {
    let xs: Vec<f64> = grid.iter().map(|&m| (m as f64).ln()).collect();
    let (slope, intercept) = least_squares(&xs, sums);
    let per_point = grid
        .iter()
        .zip(sums)
        .zip(&xs)
        .map(|((&m, &sum), &lx)| GridPoint {
            m,
            sum,
            ratio: if lx > 0.0 { sum / lx } else { f64::NAN },
        })
        .collect();
    Sigma2Estimate {
        slope,
        intercept,
        per_point,
    }
}

/// `2^lo, 2^(lo+1), ..., 2^hi`.
pub fn dyadic_grid(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|e| 1u64 << e).collect()
}

/// Main terms for the temporal mean and variance of `log P_N`, with the scale
/// of the neglected error terms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanVariancePrediction {
    pub m: u64,
    /// `½ log M`
    pub mean: f64,
    /// `Σ_{m<=M} 1/(8π² m² ‖mα‖²)`
    pub variance_main: f64,
    /// `k` with `q_k <= M < q_{k+1}`.
    pub k: usize,
    /// `max a_l` over `|l - k| <= ceil(log k)`.
    pub window_max_quotient: u64,
    pub log_log_m: f64,
    /// `window_max_quotient · log log M`
    pub mean_error_scale: f64,
    /// `window_max_quotient² · (log log M)^4`
    pub variance_error_scale: f64,
}

pub fn predicted_mean_variance(
    src: &PartialQuotientSource,
    m: u64,
    opts: &StreamOptions,
) -> Result<MeanVariancePrediction> {
    if src.growth_degree().is_none() {
        return Err(Error::HypothesisViolated);
    }
    let k = index_of(src, m)?.k;
    let w = ((k.max(1) as f64).ln().ceil() as usize).max(1);
    let lo = k.saturating_sub(w).max(1);
    let quotients: Vec<u64> = src.quotients().take(k + w).collect();
    let window_max_quotient = quotients
        .iter()
        .enumerate()
        .filter(|(i, _)| i + 1 >= lo)
        .map(|(_, &a)| a)
        .max()
        .unwrap_or(1);
    let log_log_m = (m as f64).ln().max(1.0).ln();
    let amax = window_max_quotient as f64;
    Ok(MeanVariancePrediction {
        m,
        mean: 0.5 * (m as f64).ln(),
        variance_main: diophantine_sum(src, m, opts)?,
        k,
        window_max_quotient,
        log_log_m,
        mean_error_scale: amax * log_log_m,
        variance_error_scale: amax * amax * log_log_m.powi(4),
    })
}
