//! Empirical distributions against the standard normal and Lévy laws.

use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;
use serde::Serialize;
use libm::erfc;

use crate::birkhoff::BirkhoffSeries;
use crate::cf::{partial_quotients, PartialQuotientSource};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Reference {
    StandardNormal,
    Levy,
}

impl Reference {
    pub fn cdf(self, x: f64) -> f64 {
        match self {
            Reference::StandardNormal => normal_cdf(x),
            Reference::Levy => levy_cdf(x),
        }
    }
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// CDF of the standard Lévy law, `erfc(1/√(2t))` for `t > 0`.
pub fn levy_cdf(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t.is_infinite() {
        1.0
    } else {
        erfc(1.0 / (2.0 * t).sqrt())
    }
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `sorted` and `cdf`,
/// evaluated on both sides of every sample point.
pub fn ks_distance_sorted(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d.clamp(0.0, 1.0)
}

pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    ks_distance_sorted(&sorted, cdf)
}

/// Probabilities at which [`DistributionReport::quantiles`] are taken.
pub const QUANTILE_LEVELS: [f64; 9] = [0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistributionReport {
    pub count: usize,
    /// `(level, sample quantile)` pairs.
    pub quantiles: Vec<(f64, f64)>,
    pub ks_distance: f64,
    pub reference: Reference,
}

impl DistributionReport {
    pub fn from_samples(mut samples: Vec<f64>, reference: Reference) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("no samples".into()));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::InvalidArgument("NaN sample".into()));
        }
        samples.sort_by(f64::total_cmp);
        let n = samples.len();
        let quantiles = QUANTILE_LEVELS
            .iter()
            .map(|&p| {
                let i = ((p * n as f64).ceil() as usize).clamp(1, n) - 1;
                (p, samples[i])
            })
            .collect();
        Ok(Self {
            count: n,
            quantiles,
            ks_distance: ks_distance_sorted(&samples, |x| reference.cdf(x)),
            reference,
        })
    }
}

/// Normalizes `z_N = (log P_N - ½ log N) / √(σ² log N)` for `N = 2..=M` and
/// compares with the standard normal.
pub fn clt_report(log_p: &BirkhoffSeries, m: u64, sigma2: f64) -> Result<DistributionReport> {
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidArgument("sigma^2 must be positive".into()));
    }
    if m < 100 {
        return Err(Error::InvalidArgument("M must be at least 100".into()));
    }
    if m as usize > log_p.len() {
        return Err(Error::InvalidArgument(format!(
            "horizon {m} exceeds series length {}",
            log_p.len()
        )));
    }
    let samples = (2..=m as usize)
        .map(|n| {
            let ln = (n as f64).ln();
            (log_p.value(n) - 0.5 * ln) / (sigma2 * ln).sqrt()
        })
        .collect();
    DistributionReport::from_samples(samples, Reference::StandardNormal)
}

/// Two-sided DKW band `√(ln(2/δ) / (2n))` holding with probability `1 - δ`.
pub fn dkw_bound(n: usize, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt()
}

/// Per-seed output of [`ae_experiment`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedSample {
    pub seed: u64,
    /// `(2 log²2 / π) Σ_{l<=k} a_l² / k²`
    pub statistic: f64,
    pub sum_squares: f64,
    pub max_quotient: u64,
    /// `log q_k`
    pub log_qk: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogQkSummary {
    /// Mean of `log q_k / k`; tends to `π²/(12 log 2)`.
    pub mean_rate: f64,
    pub limit_rate: f64,
    /// Sample standard deviation of `(log q_k - k π²/(12 log 2)) / √k`.
    pub tau: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AeReport {
    pub k: usize,
    pub precision_bits: u32,
    pub distribution: DistributionReport,
    pub log_qk: LogQkSummary,
    pub samples: Vec<SeedSample>,
}

/// Precision that comfortably yields `k` quotients of a Gauss-random α.
pub fn ae_precision_bits(k: usize) -> u32 {
    4 * k as u32 + 1024
}

fn seed_sample(seed: u64, k: usize, bits: u32) -> Result<SeedSample> {
    let src = PartialQuotientSource::gauss_random(seed, bits)?;
    let a = partial_quotients(&src, k)?;
    let mut sum_squares = 0.0;
    let mut log_qk = 0.0;
    // r_l = q_l / q_{l-1} = a_l + 1 / r_{l-1}, with 1/r_0 = 0.
    let mut inv_r = 0.0f64;
    for &ai in &a {
        let af = ai as f64;
        sum_squares += af * af;
        let r = af + inv_r;
        log_qk += r.ln();
        inv_r = 1.0 / r;
    }
    let kf = k as f64;
    Ok(SeedSample {
        seed,
        statistic: 2.0 * LN_2 * LN_2 / PI * sum_squares / (kf * kf),
        sum_squares,
        max_quotient: a.iter().copied().max().unwrap_or(0),
        log_qk,
    })
}

/// Gauss-random α for each seed; Lévy statistic of the squared quotients.
pub fn ae_experiment(seeds: &[u64], k: usize) -> Result<AeReport> {
    if k < 100 {
        return Err(Error::InvalidArgument("k must be at least 100".into()));
    }
    if seeds.len() < 200 {
        return Err(Error::InvalidArgument("at least 200 seeds are required".into()));
    }
    let bits = ae_precision_bits(k);
    let samples: Vec<SeedSample> = seeds
        .par_iter()
        .map(|&s| seed_sample(s, k, bits))
        .collect::<Result<_>>()?;
    let distribution = DistributionReport::from_samples(
        samples.iter().map(|s| s.statistic).collect(),
        Reference::Levy,
    )?;
    let kf = k as f64;
    let limit_rate = PI * PI / (12.0 * LN_2);
    let n = samples.len() as f64;
    let mean_rate = samples.iter().map(|s| s.log_qk / kf).sum::<f64>() / n;
    let devs: Vec<f64> = samples
        .iter()
        .map(|s| (s.log_qk - kf * limit_rate) / kf.sqrt())
        .collect();
    let dm = devs.iter().sum::<f64>() / n;
    let tau = (devs.iter().map(|d| (d - dm) * (d - dm)).sum::<f64>() / (n - 1.0)).sqrt();
    Ok(AeReport {
        k,
        precision_bits: bits,
        distribution,
        log_qk: LogQkSummary {
            mean_rate,
            limit_rate,
            tau,
        },
        samples,
    })
}
