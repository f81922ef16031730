//! Main terms of `A_M` and `B_M²` for a general Birkhoff summand, from its
//! Fourier coefficients.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::birkhoff::{StreamOptions, SummandKind};
use crate::cf::{alpha_value, PartialQuotientSource};
use crate::default_bits;
use crate::error::{Error, Result};
use crate::fixed::FixedPointFraction;
use crate::rotation::{drive_orbit, guard};
use crate::summation::CompensatedSum;

#[derive(Clone, Debug, PartialEq)]
pub enum Coefficients {
    Zero,
    /// `{x} - ½`: `f̂(m) = i / (2πm)`.
    Sawtooth,
    /// `I_[a,b]({x}) - (b - a)`.
    Indicator { a: f64, b: f64 },
    /// `f̂(1), ..., f̂(len)`; negative indices follow by conjugation.
    Table(Vec<Complex64>),
}

/// A real 1-periodic mean-zero function given by its Fourier coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierModel {
    pub coefficients: Coefficients,
    /// Largest `m` with a nonzero coefficient, if finite.
    pub cutoff: Option<u64>,
    pub total_variation: f64,
    /// Accept a cutoff below the Fejér range required for the horizon.
    pub truncated: bool,
}

impl FourierModel {
    pub fn zero() -> Self {
        Self {
            coefficients: Coefficients::Zero,
            cutoff: None,
            total_variation: 0.0,
            truncated: false,
        }
    }

    pub fn sawtooth() -> Self {
        Self {
            coefficients: Coefficients::Sawtooth,
            cutoff: None,
            total_variation: 2.0,
            truncated: false,
        }
    }

    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        SummandKind::Indicator { a, b }.validate()?;
        Ok(Self {
            coefficients: Coefficients::Indicator { a, b },
            cutoff: None,
            total_variation: 2.0,
            truncated: false,
        })
    }

    /// Model from `f̂(1..=len)`. Rejects tables violating `|f̂(m)| <= V/m`.
    pub fn table(coeffs: Vec<Complex64>, total_variation: f64, truncated: bool) -> Result<Self> {
        for (i, c) in coeffs.iter().enumerate() {
            let m = (i + 1) as f64;
            if c.norm() > total_variation / m * (1.0 + 1e-12) {
                return Err(Error::InvalidArgument(format!(
                    "coefficient {} exceeds the total-variation bound",
                    i + 1
                )));
            }
        }
        Ok(Self {
            cutoff: Some(coeffs.len() as u64),
            coefficients: Coefficients::Table(coeffs),
            total_variation,
            truncated,
        })
    }

    pub fn for_summand(kind: SummandKind) -> Result<Self> {
        match kind {
            SummandKind::BeckSawtooth => Ok(Self::sawtooth()),
            SummandKind::Indicator { a, b } => Self::indicator(a, b),
            other => Err(Error::Unsupported(format!(
                "no Fourier model for {}",
                other.name()
            ))),
        }
    }

    /// Restricts the model to `0 < |m| <= cutoff`.
    pub fn with_cutoff(mut self, cutoff: u64) -> Self {
        self.cutoff = Some(cutoff);
        self
    }

    pub fn with_truncation(mut self, truncated: bool) -> Self {
        self.truncated = truncated;
        self
    }

    /// `f̂(m)` for `m >= 1`.
    pub fn coefficient(&self, m: u64) -> Complex64 {
        if self.cutoff.is_some_and(|c| m > c) {
            return Complex64::new(0.0, 0.0);
        }
        let mf = m as f64;
        match &self.coefficients {
            Coefficients::Zero => Complex64::new(0.0, 0.0),
            Coefficients::Sawtooth => Complex64::new(0.0, 1.0 / (2.0 * PI * mf)),
            Coefficients::Indicator { a, b } => {
                // (e^{-2πima} - e^{-2πimb}) / (2πim); phases reduced mod 1 first.
                let ea = Complex64::from_polar(1.0, -2.0 * PI * frac_mul(mf, *a));
                let eb = Complex64::from_polar(1.0, -2.0 * PI * frac_mul(mf, *b));
                (ea - eb) / Complex64::new(0.0, 2.0 * PI * mf)
            }
            Coefficients::Table(t) => t.get(m as usize - 1).copied().unwrap_or_default(),
        }
    }

    /// `|f̂(m)|²`, in closed form where available.
    pub fn coefficient_norm_sqr(&self, m: u64) -> f64 {
        if self.cutoff.is_some_and(|c| m > c) {
            return 0.0;
        }
        let mf = m as f64;
        match &self.coefficients {
            Coefficients::Sawtooth => 1.0 / (4.0 * PI * PI * mf * mf),
            Coefficients::Indicator { a, b } => {
                let s = (PI * frac_mul(mf, b - a)).sin();
                s * s / (PI * PI * mf * mf)
            }
            _ => self.coefficient(m).norm_sqr(),
        }
    }
}

/// `{m x}` with the integer part removed in f64 before the multiplication error grows.
fn frac_mul(m: f64, x: f64) -> f64 {
    let y = m * x;
    y - y.floor()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictedMoments {
    pub m: u64,
    /// Fejér cutoff actually used.
    pub h: u64,
    /// `Σ_{0<|m|<H} (1 - |m|/H) f̂(m) e(mα) / (1 - e(mα))`
    pub mean_main: f64,
    /// `Σ_{m<=M} |f̂(m)|² / (2π² ‖mα‖²)`
    pub variance_main: f64,
    pub truncated: bool,
}

/// `floor(M log^{2d+1} M)`, at least 1.
pub fn fejer_cutoff(m: u64, d: u32) -> u64 {
    let l = (m as f64).ln().max(1.0);
    let h = m as f64 * l.powi(2 * d as i32 + 1);
    if h >= u64::MAX as f64 {
        u64::MAX
    } else {
        (h.floor() as u64).max(1)
    }
}

/// `cot(π{x})` from the guard-checked distance and the half of the circle.
fn cot_pi(x: &FixedPointFraction, d: f64) -> f64 {
    let c = 1.0 / (PI * d).tan();
    if x.upper_half() {
        -c
    } else {
        c
    }
}

pub fn predicted_birkhoff_moments(
    model: &FourierModel,
    src: &PartialQuotientSource,
    m: u64,
    opts: &StreamOptions,
) -> Result<PredictedMoments> {
    if m == 0 {
        return Err(Error::InvalidArgument("M must be at least 1".into()));
    }
    let h = match (src.growth_degree(), model.cutoff) {
        (Some(d), cutoff) => {
            let required = fejer_cutoff(m, d);
            match cutoff {
                Some(c) if c < required && !model.truncated => {
                    return Err(Error::TruncationFlagged { cutoff: c, required });
                }
                Some(c) if c < required => c + 1,
                _ => required,
            }
        }
        // Without a growth bound only an explicitly truncated table is usable.
        (None, Some(c)) if model.truncated => c + 1,
        (None, _) => return Err(Error::HypothesisViolated),
    };
    if matches!(model.coefficients, Coefficients::Zero) {
        return Ok(PredictedMoments {
            m,
            h,
            mean_main: 0.0,
            variance_main: 0.0,
            truncated: model.truncated,
        });
    }
    let last = m.max(h - 1);
    let bits = opts.bits.unwrap_or_else(|| default_bits(last));
    let alpha = alpha_value(src, bits)?;
    let hf = h as f64;
    let mut mean = CompensatedSum::new();
    let mut var = CompensatedSum::new();
    drive_orbit(
        &alpha,
        1,
        last,
        opts.chunk_size,
        |j, x| {
            let d = guard(x, j)?;
            let a = if j < h {
                // f̂(j) e(jα)/(1 - e(jα)) plus its conjugate at -j:
                // -Re f̂ - Im f̂ · cot(π jα).
                let c = model.coefficient(j);
                (1.0 - j as f64 / hf) * (-c.re - c.im * cot_pi(x, d))
            } else {
                0.0
            };
            let v = if j <= m {
                model.coefficient_norm_sqr(j) / (2.0 * PI * PI * d * d)
            } else {
                0.0
            };
            Ok((a, v))
        },
        |_, (a, v)| {
            mean.add(a);
            var.add(v);
        },
    )?;
    Ok(PredictedMoments {
        m,
        h,
        mean_main: mean.value(),
        variance_main: var.value(),
        truncated: model.truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::diophantine::diophantine_sum;

    #[test]
    fn zero_model() {
        let p = predicted_birkhoff_moments(
            &FourierModel::zero(),
            &PartialQuotientSource::golden(),
            1000,
            &StreamOptions::default(),
        )
        .unwrap();
        assert_eq!((p.mean_main, p.variance_main), (0.0, 0.0));
    }

    #[test]
    fn sawtooth_variance_is_diophantine_sum_over_pi_squared() {
        let src = PartialQuotientSource::golden();
        let opts = StreamOptions::default();
        let p = predicted_birkhoff_moments(&FourierModel::sawtooth(), &src, 2000, &opts).unwrap();
        let d = diophantine_sum(&src, 2000, &opts).unwrap();
        assert!((p.variance_main - d / (PI * PI)).abs() / p.variance_main < 1e-10);
    }

    #[test]
    fn indicator_coefficients_agree_with_closed_norm() {
        let m = FourierModel::indicator(0.2, 0.7).unwrap();
        for j in 1..50 {
            let direct = m.coefficient(j).norm_sqr();
            assert!((direct - m.coefficient_norm_sqr(j)).abs() < 1e-14);
            assert!(m.coefficient(j).norm() <= m.total_variation / j as f64);
        }
    }

    #[test]
    fn sawtooth_coefficients_match_quadrature() {
        // f̂(m) = ∫_0^1 (x - ½) e^{-2πimx} dx by the midpoint rule.
        let n = 20_000;
        for j in 1..4u64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                let x = (i as f64 + 0.5) / n as f64;
                acc += Complex64::from_polar(x - 0.5, -2.0 * PI * j as f64 * x);
            }
            acc /= n as f64;
            assert!((acc - FourierModel::sawtooth().coefficient(j)).norm() < 1e-8);
        }
    }

    #[test]
    fn truncation_is_enforced() {
        let src = PartialQuotientSource::golden();
        let opts = StreamOptions::default();
        let t = FourierModel::table(vec![Complex64::new(0.0, 0.1)], 2.0, false).unwrap();
        assert!(matches!(
            predicted_birkhoff_moments(&t, &src, 100, &opts),
            Err(Error::TruncationFlagged { cutoff: 1, .. })
        ));
        let p = predicted_birkhoff_moments(&t.with_truncation(true), &src, 100, &opts).unwrap();
        assert_eq!(p.h, 2);
        assert!(FourierModel::table(vec![Complex64::new(3.0, 0.0)], 2.0, false).is_err());
    }

    #[test]
    fn random_source_needs_truncated_model() {
        let src: PartialQuotientSource = "random:3".parse().unwrap();
        let opts = StreamOptions::default();
        assert_eq!(
            predicted_birkhoff_moments(&FourierModel::sawtooth(), &src, 100, &opts),
            Err(Error::HypothesisViolated)
        );
    }

    #[test]
    fn fejer_cutoff_values() {
        assert_eq!(fejer_cutoff(1, 0), 1);
        assert_eq!(fejer_cutoff(1000, 0), (1000.0 * 1000f64.ln()).floor() as u64);
    }
}
