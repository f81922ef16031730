//! Prefix sums `S_N = Σ_{n<=N} f(nα)` for the supported summands, and the
//! Fourier-series formulas for `log P_N` used as cross-checks.

use std::f64::consts::PI;
use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};

use crate::cf::{alpha_value, PartialQuotientSource};
use crate::default_bits;
use crate::error::{Error, Result};
use crate::fixed::FixedPointFraction;
use crate::rotation::{self, guard, DEFAULT_CHUNK_SIZE};
use crate::summation::CompensatedSum;

const EPS: f64 = f64::EPSILON;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SummandKind {
    /// `log|2 sin(πx)|`
    LogSudler,
    /// `log(2e‖x‖)`
    LogDiophantine,
    /// `{x} - 1/2`
    BeckSawtooth,
    /// `I_[a,b]({x}) - (b - a)`
    Indicator { a: f64, b: f64 },
}

impl SummandKind {
    pub fn validate(&self) -> Result<()> {
        if let SummandKind::Indicator { a, b } = *self {
            let ok = (0.0..=1.0).contains(&a) && a < b && b <= 1.0 && b - a < 1.0;
            if !ok {
                return Err(Error::InvalidInterval { a, b });
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            SummandKind::LogSudler => "log_sudler",
            SummandKind::LogDiophantine => "log_diophantine",
            SummandKind::BeckSawtooth => "beck_sawtooth",
            SummandKind::Indicator { .. } => "indicator",
        }
    }
}

#[derive(Clone, Debug)]
pub struct StreamOptions {
    /// Working precision; `None` uses [`default_bits`] for the horizon.
    pub bits: Option<u32>,
    pub chunk_size: u64,
}

impl Default for StreamOptions {
    fn default() -> Self {
        Self {
            bits: None,
            chunk_size: DEFAULT_CHUNK_SIZE,
        }
    }
}

/// Prefix sums for `N = 1..=M`; entry `N = 0` is the empty sum.
#[derive(Clone, Debug)]
pub struct BirkhoffSeries {
    pub kind: SummandKind,
    pub alpha_spec: String,
    pub bits: u32,
    values: Vec<f64>,
    err_bounds: Vec<f64>,
}

impl BirkhoffSeries {
    /// Builds a series from precomputed prefix values (entries `N = 1..`).
    pub fn from_values(kind: SummandKind, alpha_spec: impl Into<String>, values: Vec<f64>) -> Self {
        let err_bounds = vec![0.0; values.len()];
        Self {
            kind,
            alpha_spec: alpha_spec.into(),
            bits: 0,
            values,
            err_bounds,
        }
    }

    /// Horizon `M`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `S_N`, with `S_0 = 0`.
    pub fn value(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.values[n - 1]
        }
    }

    pub fn err_bound(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.err_bounds[n - 1]
        }
    }

    /// Values for `N = 1..=M`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn err_bounds(&self) -> &[f64] {
        &self.err_bounds
    }

    /// `(N, S_N, err_N)` for `N = 1..=M`.
    pub fn entries(&self) -> impl Iterator<Item = (u64, f64, f64)> + '_ {
        self.values
            .iter()
            .zip(&self.err_bounds)
            .enumerate()
            .map(|(i, (&v, &e))| (i as u64 + 1, v, e))
    }

    /// Keeps only the first `m` entries.
    pub fn truncated(&self, m: usize) -> BirkhoffSeries {
        BirkhoffSeries {
            kind: self.kind,
            alpha_spec: self.alpha_spec.clone(),
            bits: self.bits,
            values: self.values[..m].to_vec(),
            err_bounds: self.err_bounds[..m].to_vec(),
        }
    }
}

/// One evaluated term with its value and error contribution.
#[derive(Clone, Copy, Debug)]
pub struct Term {
    pub value: f64,
    pub err: f64,
}

/// Summand evaluator bound to a working precision.
pub struct Summand {
    kind: SummandKind,
    endpoints: Option<(FixedPointFraction, FixedPointFraction)>,
}

impl Summand {
    pub fn new(kind: SummandKind, bits: u32) -> Result<Self> {
        kind.validate()?;
        let endpoints = match kind {
            SummandKind::Indicator { a, b } => Some((
                FixedPointFraction::from_f64(a, bits),
                // b = 1 wraps to 0 mod 1; it only matters as an exclusive upper end.
                FixedPointFraction::from_f64(b, bits),
            )),
            _ => None,
        };
        Ok(Self { kind, endpoints })
    }

    #[inline]
    pub fn eval(&self, n: u64, x: &FixedPointFraction) -> Result<Term> {
        let input = x.error_bound();
        match self.kind {
            SummandKind::LogSudler => {
                let d = guard(x, n)?;
                let v = (2.0 * (PI * d).sin()).ln();
                Ok(Term {
                    value: v,
                    err: input / d + 4.0 * EPS * (v.abs() + 1.0),
                })
            }
            SummandKind::LogDiophantine => {
                let d = guard(x, n)?;
                let v = 1.0 + std::f64::consts::LN_2 + d.ln();
                Ok(Term {
                    value: v,
                    err: input / d + 4.0 * EPS * (v.abs() + 1.0),
                })
            }
            SummandKind::BeckSawtooth => Ok(Term {
                value: x.to_f64() - 0.5,
                err: input + EPS,
            }),
            SummandKind::Indicator { a, b } => {
                let (fa, fb) = self.endpoints.as_ref().expect("indicator endpoints");
                let inside = self.inside(n, x, fa, fb, b == 1.0)?;
                Ok(Term {
                    value: if inside { 1.0 } else { 0.0 } - (b - a),
                    err: EPS,
                })
            }
        }
    }

    fn inside(
        &self,
        n: u64,
        x: &FixedPointFraction,
        a: &FixedPointFraction,
        b: &FixedPointFraction,
        b_is_one: bool,
    ) -> Result<bool> {
        use std::cmp::Ordering::*;
        let grazing = |end: &FixedPointFraction| Error::SingularitySuspect {
            index: n,
            distance: x.circular_distance(end),
            bound: x.error_bound(),
        };
        let above_a = match x.compare_with_margin(a) {
            Some(Less) => false,
            Some(_) => true,
            None => return Err(grazing(a)),
        };
        if b_is_one {
            return Ok(above_a);
        }
        let below_b = match x.compare_with_margin(b) {
            Some(Greater) => false,
            Some(_) => true,
            None => return Err(grazing(b)),
        };
        Ok(above_a && below_b)
    }
}

/// Prefix sums of `f(nα)` for `N = 1..=M` with compensated accumulation.
///
/// `err_bound(N)` adds, per term, the propagated orbit error, the evaluation
/// error of `f`, and `3 ε |f(nα)|` for the compensated summation.
pub fn prefix_stream(
    kind: SummandKind,
    src: &PartialQuotientSource,
    m: u64,
    opts: &StreamOptions,
) -> Result<BirkhoffSeries> {
    if m == 0 {
        return Err(Error::InvalidArgument("M must be at least 1".into()));
    }
    let bits = opts.bits.unwrap_or_else(|| default_bits(m));
    let alpha = alpha_value(src, bits)?;
    let summand = Summand::new(kind, bits)?;
    let mut values = Vec::with_capacity(m as usize);
    let mut err_bounds = Vec::with_capacity(m as usize);
    let mut acc = CompensatedSum::new();
    let mut err = 0.0f64;
    rotation::drive_orbit(
        &alpha,
        1,
        m,
        opts.chunk_size,
        |n, x| summand.eval(n, x),
        |_, t: Term| {
            acc.add(t.value);
            err += t.err + 3.0 * EPS * t.value.abs();
            values.push(acc.value());
            err_bounds.push(err);
        },
    )?;
    Ok(BirkhoffSeries {
        kind,
        alpha_spec: src.to_string(),
        bits,
        values,
        err_bounds,
    })
}

/// The individual terms `f(nα)`, `n = 1..=M`, without summation.
pub fn terms(
    kind: SummandKind,
    src: &PartialQuotientSource,
    m: u64,
    opts: &StreamOptions,
) -> Result<Vec<Term>> {
    let bits = opts.bits.unwrap_or_else(|| default_bits(m));
    let alpha = alpha_value(src, bits)?;
    let summand = Summand::new(kind, bits)?;
    let mut out = Vec::with_capacity(m as usize);
    rotation::drive_orbit(&alpha, 1, m, opts.chunk_size, |n, x| summand.eval(n, x), |_, t| {
        out.push(t)
    })?;
    Ok(out)
}

/// A truncated Fourier evaluation and a bound on the neglected tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FourierEstimate {
    pub value: f64,
    pub tail_bound: f64,
}

/// `Σ_{m<=K} (1/2m) (1 - sin(π(2N+1)mα) / sin(πmα))`, the Dirichlet-kernel form
/// of `log P_N`, with tail bound `Σ_{n<=N} 1/(K‖nα‖)`.
pub fn fourier_log_sudler(
    src: &PartialQuotientSource,
    n: u64,
    cutoff: u64,
    opts: &StreamOptions,
) -> Result<FourierEstimate> {
    if cutoff == 0 {
        return Err(Error::InvalidArgument("cutoff K must be at least 1".into()));
    }
    let mult = 2 * n + 1;
    let bits = opts
        .bits
        .unwrap_or_else(|| default_bits(cutoff.saturating_mul(mult)));
    let alpha = alpha_value(src, bits)?;
    let mut acc = CompensatedSum::new();
    rotation::drive_orbit(
        &alpha,
        1,
        cutoff,
        opts.chunk_size,
        |m, x| {
            let d = guard(x, m)?;
            let (z, wraps) = x.mul_u64(mult);
            // sin(π y) for y = wraps + z; sin(π x) >= 0 on [0, 1).
            let num = (PI * z.dist_to_int_f64()).sin();
            let num = if wraps % 2 == 1 { -num } else { num };
            let ratio = num / (PI * d).sin();
            Ok((1.0 - ratio) / (2.0 * m as f64))
        },
        |_, t: f64| acc.add(t),
    )?;
    let tail_bound = if n == 0 {
        0.0
    } else {
        inverse_distance_sum(&alpha, n, opts.chunk_size, |_| 1.0)? / cutoff as f64
    };
    Ok(FourierEstimate {
        value: acc.value(),
        tail_bound,
    })
}

/// `Σ_{m<=K} (1/2m) (1 - sin²(πMmα) / (M sin²(πmα)))`, the Fejér-kernel form of
/// `(1/M) Σ_{N=0}^{M-1} log P_N`. The tail bound averages the pointwise bound:
/// `Σ_{n<M} (M - n) / (M K ‖nα‖)`.
pub fn fejer_average_log_sudler(
    src: &PartialQuotientSource,
    m_horizon: u64,
    cutoff: u64,
    opts: &StreamOptions,
) -> Result<FourierEstimate> {
    if m_horizon == 0 || cutoff == 0 {
        return Err(Error::InvalidArgument("M and K must be at least 1".into()));
    }
    let bits = opts
        .bits
        .unwrap_or_else(|| default_bits(cutoff.saturating_mul(m_horizon)));
    let alpha = alpha_value(src, bits)?;
    let mf = m_horizon as f64;
    let mut acc = CompensatedSum::new();
    rotation::drive_orbit(
        &alpha,
        1,
        cutoff,
        opts.chunk_size,
        |m, x| {
            let d = guard(x, m)?;
            let (z, _) = x.mul_u64(m_horizon);
            let s_num = (PI * z.dist_to_int_f64()).sin();
            let s_den = (PI * d).sin();
            let kernel = (s_num * s_num) / (mf * s_den * s_den);
            Ok((1.0 - kernel) / (2.0 * m as f64))
        },
        |_, t: f64| acc.add(t),
    )?;
    let tail_bound = if m_horizon == 1 {
        0.0
    } else {
        inverse_distance_sum(&alpha, m_horizon - 1, opts.chunk_size, |n| {
            (m_horizon - n) as f64 / mf
        })? / cutoff as f64
    };
    Ok(FourierEstimate {
        value: acc.value(),
        tail_bound,
    })
}

fn inverse_distance_sum(
    alpha: &FixedPointFraction,
    n: u64,
    chunk: u64,
    weight: impl Fn(u64) -> f64 + Sync,
) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    rotation::drive_orbit(alpha, 1, n, chunk, |i, x| Ok(weight(i) / guard(x, i)?), |_, t: f64| {
        acc.add(t)
    })?;
    Ok(acc.value())
}

/// Writes `(N, value)` pairs as little-endian `u64, f64` records.
pub fn write_binary<W: Write>(series: &BirkhoffSeries, mut w: W) -> io::Result<()> {
    for (n, v, _) in series.entries() {
        w.write_all(&n.to_le_bytes())?;
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()
}

pub fn read_binary<R: Read>(mut r: R) -> io::Result<Vec<(u64, f64)>> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    if buf.len() % 16 != 0 {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            "sidecar length is not a multiple of 16 bytes",
        ));
    }
    Ok(buf
        .chunks_exact(16)
        .map(|c| {
            let n = u64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let v = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            (n, v)
        })
        .collect())
}
