use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use sudlerlab_core::birkhoff::{prefix_stream, StreamOptions, SummandKind};
use sudlerlab_core::stats::moments::{moments_of, welford};
use sudlerlab_core::summation::CompensatedSum;
use sudlerlab_core::PartialQuotientSource;

#[test]
fn compensated_sum_is_exact_on_dyadic_inputs() {
    // Inputs k·2^-40 with |k| < 2^52 sum exactly in i128.
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let mut exact: i128 = 0;
    let mut acc = CompensatedSum::new();
    let mut naive = 0.0f64;
    for i in 0..1_000_000 {
        let k: i64 = rng.random_range(-(1i64 << 52)..(1i64 << 52));
        // Occasional huge terms force cancellation.
        let k = if i % 1000 == 0 { k << 10 } else { k };
        exact += k as i128;
        let x = k as f64 * 2f64.powi(-40);
        acc.add(x);
        naive += x;
    }
    let exact = exact as f64 * 2f64.powi(-40);
    let err = (acc.value() - exact).abs();
    assert!(err <= exact.abs() * f64::EPSILON, "compensated error {err}");
    assert!((naive - exact).abs() >= err);
}

#[test]
fn compensated_sum_survives_catastrophic_cancellation() {
    let acc: CompensatedSum = [1e16, 1.0, -1e16, 1.0].into_iter().collect();
    assert_eq!(acc.value(), 2.0);
}

#[test]
fn welford_matches_two_pass_on_a_long_series() {
    let src = PartialQuotientSource::sqrt(3).unwrap();
    let s = prefix_stream(SummandKind::LogSudler, &src, 1_000_000, &StreamOptions::default()).unwrap();
    let v = s.values();
    let n = v.len() as f64;
    let mean: f64 = v.iter().copied().collect::<CompensatedSum>().value() / n;
    let var: f64 = v
        .iter()
        .map(|x| (x - mean) * (x - mean))
        .collect::<CompensatedSum>()
        .value()
        / n;
    let (wm, wv) = welford(v);
    let r = moments_of(v).unwrap();
    assert!((wm - mean).abs() <= 1e-8 * mean.abs().max(1.0));
    assert!((wv - var).abs() <= 1e-8 * var);
    assert!((r.mean - mean).abs() <= 1e-8 * mean.abs().max(1.0));
    assert!((r.variance - var).abs() <= 1e-8 * var);
}
