//! Checks of the extreme-value, symmetry and partial-quotient identities over
//! a full period `0 <= N < q_k`, and of the variance band for indicators.

use std::f64::consts::PI;

use serde::Serialize;

use crate::birkhoff::{prefix_stream, BirkhoffSeries, StreamOptions, SummandKind};
use crate::cf::{convergents, e_alpha, partial_quotients, PartialQuotientSource};
use crate::error::{Error, Result};
use crate::quadrature::v_constant;
use crate::stats::diophantine::{check_grid, diophantine_sum, weighted_inverse_square_grid};
use crate::stats::moments::moments_of;

/// Largest period handled by the full-period checks.
pub const MAX_PERIOD: u64 = 1 << 32;

const V_TOL: f64 = 1e-10;

fn period_q(src: &PartialQuotientSource, k: usize) -> Result<u64> {
    let conv = convergents(src, k)?;
    let q = &conv[k].q;
    match u64::try_from(q) {
        Ok(q) if q <= MAX_PERIOD => Ok(q),
        _ => Err(Error::InvalidArgument(format!(
            "q_{k} = {q} exceeds the supported period {MAX_PERIOD}"
        ))),
    }
}

/// `log P_N` for `N = 0..q` (length `q`).
fn log_sudler_period(
    src: &PartialQuotientSource,
    q: u64,
    opts: &StreamOptions,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(q as usize);
    out.push(0.0);
    if q > 1 {
        let s = prefix_stream(SummandKind::LogSudler, src, q - 1, opts)?;
        out.extend_from_slice(s.values());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub k: usize,
    pub q_k: u64,
    /// `max_N |log P_N + log P_{q_k-N-1} - log q_k|`
    pub value: f64,
    pub argmax: u64,
}

pub fn symmetry_check(
    src: &PartialQuotientSource,
    k: usize,
    opts: &StreamOptions,
) -> Result<SymmetryReport> {
    let q = period_q(src, k)?;
    let lp = log_sudler_period(src, q, opts)?;
    let log_q = (q as f64).ln();
    let (mut value, mut argmax) = (f64::NEG_INFINITY, 0u64);
    for n in 0..q as usize {
        let r = (lp[n] + lp[q as usize - n - 1] - log_q).abs();
        if r > value {
            value = r;
            argmax = n as u64;
        }
    }
    Ok(SymmetryReport {
        k,
        q_k: q,
        value,
        argmax,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremeReport {
    pub k: usize,
    pub q_k: u64,
    pub max: f64,
    pub min: f64,
    pub argmax: u64,
    pub argmin: u64,
    pub quotient_sum: u64,
    /// `V (a_1 + ... + a_k)`
    pub predicted: f64,
    /// `max / predicted`
    pub ratio: f64,
    /// `A_k + k log A_k` with `A_k = max a_l`.
    pub error_scale: f64,
    /// `max + min - log q_k`
    pub symmetry_residual: f64,
}

pub fn extreme_check(
    src: &PartialQuotientSource,
    k: usize,
    opts: &StreamOptions,
) -> Result<ExtremeReport> {
    let q = period_q(src, k)?;
    let lp = log_sudler_period(src, q, opts)?;
    let (mut max, mut min) = (lp[0], lp[0]);
    let (mut argmax, mut argmin) = (0u64, 0u64);
    for (n, &v) in lp.iter().enumerate() {
        if v > max {
            max = v;
            argmax = n as u64;
        }
        if v < min {
            min = v;
            argmin = n as u64;
        }
    }
    let a = partial_quotients(src, k)?;
    let quotient_sum: u64 = a.iter().sum();
    let a_max = *a.iter().max().expect("k >= 1") as f64;
    let predicted = v_constant(V_TOL)? * quotient_sum as f64;
    Ok(ExtremeReport {
        k,
        q_k: q,
        max,
        min,
        argmax,
        argmin,
        quotient_sum,
        predicted,
        ratio: max / predicted,
        error_scale: a_max + k as f64 * a_max.ln(),
        symmetry_residual: max + min - (q as f64).ln(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SquareSumReport {
    pub k: usize,
    pub q_k: u64,
    /// `√(Σ_{m<q_k} 1/(8π² m² ‖mα‖²))`
    pub lhs: f64,
    /// `(π/√720) √(a_1² + ... + a_k²)`
    pub rhs: f64,
    pub ratio: f64,
    /// `√k`
    pub error_scale: f64,
}

pub fn pq_square_sum_check(
    src: &PartialQuotientSource,
    k: usize,
    opts: &StreamOptions,
) -> Result<SquareSumReport> {
    let q = period_q(src, k)?;
    if q < 2 {
        return Err(Error::InvalidArgument(format!("q_{k} = {q} leaves an empty sum")));
    }
    let lhs = diophantine_sum(src, q - 1, opts)?.sqrt();
    let squares: f64 = partial_quotients(src, k)?
        .iter()
        .map(|&a| (a as f64) * (a as f64))
        .sum();
    let rhs = PI / 720f64.sqrt() * squares.sqrt();
    Ok(SquareSumReport {
        k,
        q_k: q,
        lhs,
        rhs,
        ratio: lhs / rhs,
        error_scale: (k as f64).sqrt(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandPoint {
    pub m: u64,
    pub variance: f64,
    /// `B_M² / log M`
    pub ratio: f64,
    /// `Σ_{m<=M} sin²(πm(b-a)) / (2π⁴ m² ‖mα‖²)`
    pub predicted_variance_main: f64,
    pub predicted_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandReport {
    pub length: f64,
    pub points: Vec<BandPoint>,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// `B_M²/log M` of `I_[0,len]({x}) - len` at each grid point, with the main-term
/// prediction.
pub fn bu_variance_check(
    src: &PartialQuotientSource,
    length: f64,
    grid: &[u64],
    opts: &StreamOptions,
) -> Result<BandReport> {
    let kind = SummandKind::Indicator { a: 0.0, b: length };
    kind.validate()?;
    check_grid(grid, 1)?;
    if grid[0] < 2 {
        return Err(Error::InvalidArgument("grid points must be at least 2".into()));
    }
    let last = *grid.last().expect("nonempty");
    let series = prefix_stream(kind, src, last, opts)?;
    let predicted = weighted_inverse_square_grid(src, grid, opts, |m| {
        let mf = m as f64;
        let s = (PI * (mf * length).fract()).sin();
        s * s / (2.0 * PI.powi(4) * mf * mf)
    })?;
    let points: Vec<BandPoint> = grid
        .iter()
        .zip(predicted)
        .map(|(&m, pred)| {
            let r = moments_of(&series.values()[..m as usize]).expect("m >= 1");
            let lm = (m as f64).ln();
            BandPoint {
                m,
                variance: r.variance,
                ratio: r.variance / lm,
                predicted_variance_main: pred,
                predicted_ratio: pred / lm,
            }
        })
        .collect();
    let min_ratio = points.iter().map(|p| p.ratio).fold(f64::INFINITY, f64::min);
    let max_ratio = points.iter().map(|p| p.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(BandReport {
        length,
        points,
        min_ratio,
        max_ratio,
    })
}

/// `{qα}` in binary64, the length of a bounded-remainder interval.
pub fn bounded_remainder_length(src: &PartialQuotientSource, q: u64) -> Result<f64> {
    let alpha = crate::cf::alpha_value(src, 128)?;
    Ok(crate::rotation::frac_at(&alpha, q).to_f64())
}

/// Running extremes of a series at each horizon of an increasing grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RangePoint {
    pub m: u64,
    /// `min_{N<=M} S_N`
    pub min: f64,
    /// `max_{N<=M} (S_N - log N)`
    pub max_minus_log: f64,
    /// `max_{N<=M} |S_N|`
    pub max_abs: f64,
}

pub fn running_range(series: &BirkhoffSeries, grid: &[u64]) -> Result<Vec<RangePoint>> {
    check_grid(grid, 1)?;
    let last = *grid.last().expect("nonempty");
    if last as usize > series.len() {
        return Err(Error::InvalidArgument(format!(
            "horizon {last} exceeds series length {}",
            series.len()
        )));
    }
    let mut out = Vec::with_capacity(grid.len());
    let (mut min, mut mx, mut abs) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    let mut next = 0;
    for (i, &v) in series.values()[..last as usize].iter().enumerate() {
        let n = i as u64 + 1;
        min = min.min(v);
        mx = mx.max(v - (n as f64).ln());
        abs = abs.max(v.abs());
        if n == grid[next] {
            out.push(RangePoint {
                m: n,
                min,
                max_minus_log: mx,
                max_abs: abs,
            });
            next += 1;
        }
    }
    Ok(out)
}

/// `sup_{N<=M} |log Π_{n<=N} 2e‖nα‖ - log P_N|` at each grid point.
pub fn diophantine_product_gap(
    src: &PartialQuotientSource,
    grid: &[u64],
    opts: &StreamOptions,
) -> Result<Vec<(u64, f64)>> {
    check_grid(grid, 1)?;
    let last = *grid.last().expect("nonempty");
    let lp = prefix_stream(SummandKind::LogSudler, src, last, opts)?;
    let ld = prefix_stream(SummandKind::LogDiophantine, src, last, opts)?;
    let mut out = Vec::with_capacity(grid.len());
    let mut sup = 0.0f64;
    let mut next = 0;
    for (i, (a, b)) in ld.values().iter().zip(lp.values()).enumerate() {
        sup = sup.max((a - b).abs());
        if i as u64 + 1 == grid[next] {
            out.push((grid[next], sup));
            next += 1;
        }
    }
    Ok(out)
}

/// `A_M(S) - E(α) log M` for the sawtooth sums at each grid point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CenteringPoint {
    pub m: u64,
    pub mean: f64,
    pub predicted: f64,
    pub residual: f64,
}

pub fn beck_centering_check(
    src: &PartialQuotientSource,
    grid: &[u64],
    opts: &StreamOptions,
) -> Result<Vec<CenteringPoint>> {
    let e = e_alpha(src)?;
    check_grid(grid, 1)?;
    let last = *grid.last().expect("nonempty");
    let s = prefix_stream(SummandKind::BeckSawtooth, src, last, opts)?;
    grid.iter()
        .map(|&m| {
            let mean = moments_of(&s.values()[..m as usize])?.mean;
            let predicted = e * (m as f64).ln();
            Ok(CenteringPoint {
                m,
                mean,
                predicted,
                residual: mean - predicted,
            })
        })
        .collect()
}
