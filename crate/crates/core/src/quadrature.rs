//! Integrals of `log|2 sin(πx)|` and the extreme-value constant
//! `V = ∫_0^{5/6} log|2 sin(πx)| dx`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Split point below which the integrand is handled analytically.
const DELTA: f64 = 1e-4;

const MAX_INTERVALS: usize = 10_000;

// 15-point Kronrod abscissae and weights, with the embedded 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One Gauss-Kronrod 7/15 panel: `(integral, error estimate)`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod integration to absolute tolerance `tol`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (v, e) = gk15(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= tol {
            return Ok(total);
        }
        if panels.len() >= MAX_INTERVALS {
            return Err(Error::ToleranceNotMet {
                tolerance: tol,
                estimate: err,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("nonempty");
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}

/// `∫_0^δ log|2 sin(πx)| dx`: the exact `∫ log(2πx)` plus the series of
/// `log(sin y / y) = -y²/6 - y⁴/180 - y⁶/2835 - y⁸/37800 - ...`.
fn singular_piece(delta: f64) -> f64 {
    if delta == 0.0 {
        return 0.0;
    }
    let main = delta * ((2.0 * PI * delta).ln() - 1.0);
    const COEFFS: [f64; 4] = [1.0 / 6.0, 1.0 / 180.0, 1.0 / 2835.0, 1.0 / 37800.0];
    let correction: f64 = COEFFS
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let p = 2 * (i as i32 + 1);
            -c * PI.powi(p) * delta.powi(p + 1) / (p + 1) as f64
        })
        .sum();
    main + correction
}

pub fn log_sine(x: f64) -> f64 {
    (2.0 * (PI * x).sin().abs()).ln()
}

/// `∫_0^upper log|2 sin(πx)| dx` for `upper ∈ (δ, 1]`, using the reflection
/// `f(1 - x) = f(x)` for the endpoint singularity at 1.
pub fn log_sine_integral(upper: f64, tol: f64) -> Result<f64> {
    if !(upper > DELTA && upper <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "upper limit {upper} outside ({DELTA}, 1]"
        )));
    }
    let head = singular_piece(DELTA);
    if upper <= 1.0 - DELTA {
        Ok(head + integrate_adaptive(log_sine, DELTA, upper, tol)?)
    } else {
        let tail = singular_piece(DELTA) - singular_piece(1.0 - upper);
        Ok(head + integrate_adaptive(log_sine, DELTA, 1.0 - DELTA, tol)? + tail)
    }
}

/// `V = ∫_0^{5/6} log|2 sin(πx)| dx`.
pub fn v_constant(tol: f64) -> Result<f64> {
    if !(1e-12..=1e-4).contains(&tol) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol:e} outside [1e-12, 1e-4]"
        )));
    }
    log_sine_integral(5.0 / 6.0, tol)
}
