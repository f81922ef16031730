use serde::Serialize;

use crate::birkhoff::BirkhoffSeries;
use crate::error::{Error, Result};
use crate::summation::CompensatedSum;

/// Temporal mean `A_M` and variance `B_M²` of `S_N` over `N = 1..=M`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub m: u64,
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
    pub argmin: u64,
    pub argmax: u64,
    pub predicted_mean: Option<f64>,
    pub predicted_variance_main: Option<f64>,
    /// `(mean - predicted_mean, variance - predicted_variance_main)` when both are set.
    pub residuals: Option<(f64, f64)>,
}

impl MomentReport {
    pub fn with_prediction(mut self, mean: f64, variance_main: f64) -> Self {
        self.predicted_mean = Some(mean);
        self.predicted_variance_main = Some(variance_main);
        self.residuals = Some((self.mean - mean, self.variance - variance_main));
        self
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Two-pass moments of `values`; indices in the report are 1-based.
pub fn moments_of(values: &[f64]) -> Result<MomentReport> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().copied().collect::<CompensatedSum>().value() / n;
    let variance = values
        .iter()
        .map(|&v| (v - mean) * (v - mean))
        .collect::<CompensatedSum>()
        .value()
        / n;
    let (mut min, mut max) = (values[0], values[0]);
    let (mut argmin, mut argmax) = (1u64, 1u64);
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < min {
            min = v;
            argmin = i as u64 + 1;
        }
        if v > max {
            max = v;
            argmax = i as u64 + 1;
        }
    }
    Ok(MomentReport {
        m: values.len() as u64,
        mean,
        variance,
        min,
        max,
        argmin,
        argmax,
        predicted_mean: None,
        predicted_variance_main: None,
        residuals: None,
    })
}

/// `A_M` and `B_M²` over the first `m` entries of `series`.
pub fn temporal_moments(series: &BirkhoffSeries, m: u64) -> Result<MomentReport> {
    if m == 0 || m as usize > series.len() {
        return Err(Error::InvalidArgument(format!(
            "horizon {m} outside 1..={}",
            series.len()
        )));
    }
    moments_of(&series.values()[..m as usize])
}

/// Welford's single-pass mean and variance.
pub fn welford(values: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in values.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let n = values.len().max(1) as f64;
    (mean, (m2 / n).max(0.0))
}

/// Centered cross moment of `log P_N` and `S_N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossMomentReport {
    pub m: u64,
    /// `(1/M) Σ (log P_N - ½ log M)(S_N - A_M(S))`
    pub value: f64,
    pub std_log_p: f64,
    pub std_s: f64,
    /// `value / (std_log_p · std_s)`.
    pub correlation: f64,
    /// `(log log M)^4`.
    pub loglog4_scale: f64,
}

pub fn cross_moment(
    log_p: &BirkhoffSeries,
    sawtooth: &BirkhoffSeries,
    m: u64,
) -> Result<CrossMomentReport> {
    let lp = temporal_moments(log_p, m)?;
    let s = temporal_moments(sawtooth, m)?;
    let half_log_m = 0.5 * (m as f64).ln();
    let value = log_p.values()[..m as usize]
        .iter()
        .zip(&sawtooth.values()[..m as usize])
        .map(|(&l, &x)| (l - half_log_m) * (x - s.mean))
        .collect::<CompensatedSum>()
        .value()
        / m as f64;
    let (std_log_p, std_s) = (lp.std_dev(), s.std_dev());
    let correlation = if std_log_p > 0.0 && std_s > 0.0 {
        value / (std_log_p * std_s)
    } else {
        0.0
    };
    let ll = (m as f64).ln().max(1.0).ln();
    Ok(CrossMomentReport {
        m,
        value,
        std_log_p,
        std_s,
        correlation,
        loglog4_scale: ll.powi(4),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::birkhoff::SummandKind;

    #[test]
    fn constant_and_two_point_series() {
        let r = moments_of(&[3.5; 10]).unwrap();
        assert_eq!((r.mean, r.variance), (3.5, 0.0));
        let r = moments_of(&[0.0, 1.0]).unwrap();
        assert_eq!((r.mean, r.variance), (0.5, 0.25));
        assert_eq!((r.argmin, r.argmax), (1, 2));
    }

    #[test]
    fn ties_pick_smallest_index() {
        let r = moments_of(&[1.0, 3.0, 0.0, 3.0, 0.0]).unwrap();
        assert_eq!((r.argmax, r.argmin), (2, 3));
    }

    #[test]
    fn horizon_checked() {
        let s = BirkhoffSeries::from_values(SummandKind::LogSudler, "golden", vec![1.0, 2.0]);
        assert!(temporal_moments(&s, 3).is_err());
        assert!(temporal_moments(&s, 0).is_err());
        assert_eq!(temporal_moments(&s, 1).unwrap().mean, 1.0);
    }

    #[test]
    fn single_sample_cross_moment_is_zero() {
        let a = BirkhoffSeries::from_values(SummandKind::LogSudler, "golden", vec![0.7]);
        let b = BirkhoffSeries::from_values(SummandKind::BeckSawtooth, "golden", vec![0.1]);
        assert_eq!(cross_moment(&a, &b, 1).unwrap().value, 0.0);
    }

    #[test]
    fn prediction_residuals() {
        let r = moments_of(&[1.0, 3.0]).unwrap().with_prediction(1.5, 2.0);
        assert_eq!(r.residuals, Some((0.5, -1.0)));
    }
}
