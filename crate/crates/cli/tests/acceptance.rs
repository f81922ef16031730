//! End-to-end acceptance suite: one PASS/FAIL line per criterion.
//!
//! Thresholds are pinned below. Criteria listed in `KNOWN_GAPS` are expected
//! to fail at this scale; they are still evaluated and reported, and the run
//! fails if one of them unexpectedly passes (so the list cannot go stale) or
//! if any other criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use sudlerlab_core::birkhoff::{
    fejer_average_log_sudler, fourier_log_sudler, prefix_stream, BirkhoffSeries, StreamOptions,
    SummandKind,
};
use sudlerlab_core::quadrature::{log_sine_integral, v_constant};
use sudlerlab_core::stats::diophantine::least_squares;
use sudlerlab_core::stats::{
    ae_experiment, beck_centering_check, bounded_remainder_length, bu_variance_check,
    clt_report, diophantine_product_gap, dyadic_grid, levy_cdf, pq_square_sum_check,
    running_range, sigma2_closed_form, sigma2_estimate, symmetry_check, temporal_moments,
    ClosedFormAlpha,
};
use sudlerlab_core::{convergents, e_alpha, index_of, PartialQuotientSource};

/// Criteria expected to fail, with the measured reason.
const KNOWN_GAPS: &[(u32, &str)] = &[
    (5, "KS decays like ~0.41/sqrt(log M); 0.111 at M = 1e6, reaches 0.1 only near 3e7"),
    (9, "O(sqrt k) correction still ~0.41 at q_16 = 398959; ratio 1.231, 1.18 at q_17"),
];

// Pinned thresholds.
const V_REF: f64 = 0.1615;
const V_TOL: f64 = 5e-4;
const FULL_PERIOD_TOL: f64 = 1e-9;
const SIGMA2_REL_TOL: f64 = 0.10;
const VARIANCE_REL_TOL: f64 = 0.15;
const KS_MAX: f64 = 0.1;
const KS_SLACK: f64 = 0.02;
const SYMMETRY_SPREAD: f64 = 0.01;
const SYMMETRY_SLOPE: f64 = 1e-3;
const GAP_DRIFT: f64 = 0.01;
const SQUARE_SUM_BAND: (f64, f64) = (0.8, 1.2);
const CENTERING_MAX: f64 = 0.25;
const CENTERING_SLOPE: f64 = 0.01;
const BU_BAND: (f64, f64) = (0.03, 0.05);
const BU_CONTROL_FINAL: f64 = 0.015;
const ORACLE_TOL: f64 = 1e-9;
const LEVY_KS_MAX: f64 = 0.1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn opts() -> StreamOptions {
    StreamOptions::default()
}

fn golden() -> PartialQuotientSource {
    PartialQuotientSource::golden()
}

fn sqrt3() -> PartialQuotientSource {
    PartialQuotientSource::sqrt(3).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn v_constant_check() -> Outcome {
    let t = Instant::now();
    let v = v_constant(1e-10).unwrap();
    let full = log_sine_integral(1.0, 1e-10).unwrap();
    let secs = t.elapsed().as_secs_f64();
    outcome(
        (v - V_REF).abs() <= V_TOL && full.abs() <= FULL_PERIOD_TOL && secs < 1.0,
        format!("V = {v:.6}, full period = {full:.1e}, {secs:.3} s"),
    )
}

fn sigma2_check() -> Outcome {
    // Closed forms evaluated here, independently of the library.
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let golden_cf = PI * PI / (60.0 * 5f64.sqrt() * phi.ln());
    let sqrt3_cf = PI * PI / (24.0 * 3f64.sqrt() * (2.0 + 3f64.sqrt()).ln());
    let lib_ok = rel(sigma2_closed_form(ClosedFormAlpha::Golden), golden_cf) < 1e-12
        && rel(sigma2_closed_form(ClosedFormAlpha::Sqrt3), sqrt3_cf) < 1e-12;
    let grid = dyadic_grid(10, 20);
    let g = sigma2_estimate(&golden(), &grid, &opts()).unwrap().slope;
    let s = sigma2_estimate(&sqrt3(), &grid, &opts()).unwrap().slope;
    outcome(
        lib_ok && rel(g, golden_cf) <= SIGMA2_REL_TOL && rel(s, sqrt3_cf) <= SIGMA2_REL_TOL,
        format!(
            "golden {g:.5} vs {golden_cf:.5} ({:+.1}%), sqrt3 {s:.5} vs {sqrt3_cf:.5} ({:+.1}%)",
            100.0 * (g / golden_cf - 1.0),
            100.0 * (s / sqrt3_cf - 1.0)
        ),
    )
}

fn mean_law_check(series: &BirkhoffSeries) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for m in [10_000u64, 100_000, 1_000_000] {
        let a = temporal_moments(series, m).unwrap().mean;
        let lm = (m as f64).ln();
        let dev = (a - 0.5 * lm).abs();
        pass &= dev <= 3.0 * lm.ln();
        parts.push(format!("M={m}: |A-½logM| = {dev:.3} (bound {:.2})", 3.0 * lm.ln()));
    }
    outcome(pass, parts.join(", "))
}

fn variance_law_check(series: &BirkhoffSeries) -> Outcome {
    let m = 1_000_000u64;
    let b = temporal_moments(series, m).unwrap().variance / (m as f64).ln();
    let s = sigma2_closed_form(ClosedFormAlpha::Golden);
    outcome(
        rel(b, s) <= VARIANCE_REL_TOL,
        format!("B²/log M = {b:.5} vs σ² = {s:.5} ({:+.1}%)", 100.0 * (b / s - 1.0)),
    )
}

fn clt_check(series: &BirkhoffSeries) -> Outcome {
    let s = sigma2_closed_form(ClosedFormAlpha::Golden);
    let ks: Vec<f64> = [10_000u64, 100_000, 1_000_000]
        .iter()
        .map(|&m| clt_report(series, m, s).unwrap().ks_distance)
        .collect();
    let trend = ks.windows(2).all(|w| w[1] <= w[0] + KS_SLACK);
    outcome(
        trend && ks[2] <= KS_MAX,
        format!(
            "KS = {:.4} / {:.4} / {:.4} at M = 1e4/1e5/1e6 (trend {}, need <= {KS_MAX} at 1e6)",
            ks[0],
            ks[1],
            ks[2],
            if trend { "ok" } else { "broken" }
        ),
    )
}

fn golden_range_check(series: &BirkhoffSeries) -> Outcome {
    let r = running_range(series, &[10_000, 1_000_000]).unwrap();
    let (a, b) = (&r[0], &r[1]);
    outcome(
        a.min == b.min && a.max_minus_log == b.max_minus_log,
        format!(
            "min {:.6} -> {:.6}, max(logP - log N) {:.6} -> {:.6}",
            a.min, b.min, a.max_minus_log, b.max_minus_log
        ),
    )
}

fn symmetry_criterion() -> Outcome {
    let src = golden();
    let top = index_of(&src, 1_000_000).unwrap().k;
    let ks: Vec<usize> = (top - 4..=top).collect();
    let vals: Vec<f64> = ks
        .iter()
        .map(|&k| symmetry_check(&src, k, &opts()).unwrap().value)
        .collect();
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let xs: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let (slope, _) = least_squares(&xs, &vals);
    outcome(
        hi - lo < SYMMETRY_SPREAD && slope.abs() < SYMMETRY_SLOPE,
        format!(
            "k = {}..={}: values in [{lo:.6}, {hi:.6}], slope {slope:.1e}",
            ks[0], top
        ),
    )
}

fn diophantine_product_check() -> Outcome {
    let g = diophantine_product_gap(&golden(), &[10_000, 1_000_000], &opts()).unwrap();
    let drift = (g[1].1 - g[0].1).abs();
    outcome(
        drift <= GAP_DRIFT,
        format!("sup gap {:.6} at 1e4, {:.6} at 1e6", g[0].1, g[1].1),
    )
}

fn square_sum_criterion() -> Outcome {
    let src = PartialQuotientSource::e();
    let k = index_of(&src, 1_000_000).unwrap().k;
    let r = pq_square_sum_check(&src, k, &opts()).unwrap();
    outcome(
        (SQUARE_SUM_BAND.0..=SQUARE_SUM_BAND.1).contains(&r.ratio),
        format!("e, k = {k}, q_k = {}: ratio {:.4}", r.q_k, r.ratio),
    )
}

fn beck_centering_criterion() -> Outcome {
    let src = sqrt3();
    let e = e_alpha(&src).unwrap();
    let expected = 1.0 / (12.0 * (2.0 + 3f64.sqrt()).ln());
    // Dyadic horizons up to 10^6.
    let grid = dyadic_grid(4, 19);
    let pts = beck_centering_check(&src, &grid, &opts()).unwrap();
    let xs: Vec<f64> = pts.iter().map(|p| (p.m as f64).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.residual).collect();
    let worst = ys.iter().fold(0.0f64, |a, y| a.max(y.abs()));
    let (slope, _) = least_squares(&xs, &ys);
    outcome(
        (e - expected).abs() < 1e-14 && worst <= CENTERING_MAX && slope.abs() <= CENTERING_SLOPE,
        format!("E = {e:.5}, max |residual| {worst:.4}, slope vs log M {slope:.1e}"),
    )
}

fn bu_criterion() -> Outcome {
    let src = golden();
    let grid = dyadic_grid(10, 20);
    let band = bu_variance_check(&src, 0.5, &grid, &opts()).unwrap();
    let in_band = band.min_ratio >= BU_BAND.0 && band.max_ratio <= BU_BAND.1;
    let mut controls_ok = true;
    let mut finals = Vec::new();
    for q in 1..=5u64 {
        let l = bounded_remainder_length(&src, q).unwrap();
        let r = bu_variance_check(&src, l, &grid, &opts()).unwrap();
        let ratios: Vec<f64> = r.points.iter().map(|p| p.ratio).collect();
        let last = *ratios.last().unwrap();
        controls_ok &= ratios.windows(2).all(|w| w[1] < w[0]) && last < BU_CONTROL_FINAL;
        finals.push(format!("{last:.4}"));
    }
    outcome(
        in_band && controls_ok,
        format!(
            "L = 1/2 ratios in [{:.4}, {:.4}]; controls q = 1..5 end at [{}]",
            band.min_ratio,
            band.max_ratio,
            finals.join(", ")
        ),
    )
}

/// `{nα}` from the exact residue of a deep convergent.
struct RationalAlpha {
    p: BigInt,
    q: BigInt,
}

impl RationalAlpha {
    fn new(src: &PartialQuotientSource) -> Self {
        let c = convergents(src, 80).unwrap().pop().unwrap();
        Self { p: c.p, q: BigInt::from(c.q) }
    }

    fn frac(&self, n: u64) -> f64 {
        let r = (&self.p * BigInt::from(n)).mod_floor(&self.q);
        let shift = self.q.bits() as usize + 64;
        let scaled: BigInt = (r.abs() << shift) / &self.q;
        scaled.to_f64().unwrap() / 2f64.powi(shift as i32)
    }

    /// `log P_N` for `N = 0..=n`, compensated.
    fn log_products(&self, n: u64) -> Vec<f64> {
        let (mut acc, mut comp) = (0.0f64, 0.0f64);
        let mut out = vec![0.0];
        for i in 1..=n {
            let y = (2.0 * (PI * self.frac(i)).sin()).abs().ln() - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
            out.push(acc);
        }
        out
    }
}

fn oracle_criterion() -> Outcome {
    let specs = ["golden", "sqrt:2", "sqrt:3", "e"];
    let sources: Vec<PartialQuotientSource> = specs.iter().map(|s| s.parse().unwrap()).collect();
    let mut worst_direct = 0.0f64;
    for src in &sources {
        let oracle = RationalAlpha::new(src).log_products(1000);
        let s = prefix_stream(SummandKind::LogSudler, src, 1000, &opts()).unwrap();
        for n in 1..=1000usize {
            worst_direct = worst_direct.max((s.value(n) - oracle[n]).abs());
        }
    }

    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    let tables: Vec<Vec<f64>> = sources
        .iter()
        .map(|s| RationalAlpha::new(s).log_products(10_000))
        .collect();
    let mut fourier_ok = 0;
    for _ in 0..100 {
        let i = rng.random_range(0..sources.len());
        let n = rng.random_range(1..=10_000u64);
        let cutoff = rng.random_range(100..=20_000u64);
        let f = fourier_log_sudler(&sources[i], n, cutoff, &opts()).unwrap();
        if (f.value - tables[i][n as usize]).abs() <= f.tail_bound {
            fourier_ok += 1;
        }
    }

    let mut fejer_ok = true;
    let mut fejer_gap = 0.0f64;
    for (src, table) in sources.iter().zip(&tables) {
        let m = 100usize;
        let mean = table[..m].iter().sum::<f64>() / m as f64;
        let f = fejer_average_log_sudler(src, m as u64, 10_000, &opts()).unwrap();
        fejer_ok &= (f.value - mean).abs() <= f.tail_bound;
        fejer_gap = fejer_gap.max((f.value - mean).abs() / f.tail_bound);
    }
    outcome(
        worst_direct <= ORACLE_TOL && fourier_ok == 100 && fejer_ok,
        format!(
            "direct max err {worst_direct:.1e}; Fourier {fourier_ok}/100 within tail bound; \
             Fejér worst |gap|/bound {fejer_gap:.3}"
        ),
    )
}

/// `erfc(x)` from the Taylor series of erf; fine for small x.
fn erfc_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    for n in 1..60 {
        term *= -x * x / n as f64;
        sum += term / (2 * n + 1) as f64;
    }
    1.0 - 2.0 / PI.sqrt() * sum
}

fn levy_criterion() -> Outcome {
    let seeds: Vec<u64> = (0..500).collect();
    let r = ae_experiment(&seeds, 10_000).unwrap();
    let at1 = levy_cdf(1.0);
    let oracle = erfc_series(1.0 / 2f64.sqrt());
    let ks = r.distribution.ks_distance;
    outcome(
        ks <= LEVY_KS_MAX && (at1 - 0.3173).abs() <= 1e-4 && (at1 - oracle).abs() < 1e-12,
        format!(
            "KS = {ks:.4} over 500 seeds, levy_cdf(1) = {at1:.6}, log q_k/k = {:.5} (limit {:.5})",
            r.log_qk.mean_rate, r.log_qk.limit_rate
        ),
    )
}

fn run_cli(args: &[String], out: &Path) -> Vec<u8> {
    let mut full = vec!["sudlerlab".to_string()];
    full.extend(args.iter().cloned());
    full.push("--out".into());
    full.push(out.display().to_string());
    let (mut so, mut se) = (Vec::new(), Vec::new());
    let code = sudlerlab_cli::run(&full, &mut so, &mut se);
    assert_eq!(code, 0, "{full:?}: {}", String::from_utf8_lossy(&se));
    std::fs::read(out).unwrap()
}

fn determinism_criterion() -> Outcome {
    let commands: Vec<&str> = vec![
        "cf --alpha e --k 40",
        "sudler --alpha golden --max-n 200000",
        "sudler --alpha sqrt:3 --max-n 150000 --summand sawtooth",
        "sudler --alpha random:7 --max-n 70000 --summand indicator --a 0.1 --b 0.6",
        "moments --alpha golden --m 150000",
        "moments --alpha sqrt:3 --m 100000 --summand sawtooth",
        "dioph-sum --alpha golden --grid dyadic:10:17",
        "dioph-sum --alpha e --k 12",
        "sigma2 --alpha sqrt:3 --grid dyadic:10:17",
        "clt --alpha golden --m 100000",
        "symmetry --alpha golden --k 20,21,22",
        "extremes --alpha sqrt:2 --k 10,12",
        "birkhoff-predict --alpha golden --m 70000 --summand indicator --a 0 --b 0.5",
        "bu --alpha golden --length 0.5 --grid dyadic:10:17",
        "vconst --tol 1e-8",
        "ae-levy --seeds 200 --k 300",
    ];
    let dir = tempfile::tempdir().unwrap();
    let mut mismatches = Vec::new();
    let mut runs = 0;
    for (i, cmd) in commands.iter().enumerate() {
        for format in ["csv", "json"] {
            let mut reference: Option<Vec<u8>> = None;
            for workers in [1, 4, 8] {
                for chunk in [1u64 << 16, 1 << 20] {
                    let mut args: Vec<String> = cmd.split(' ').map(String::from).collect();
                    args.extend(
                        [
                            "--format".to_string(),
                            format.into(),
                            "--workers".into(),
                            workers.to_string(),
                            "--chunk-size".into(),
                            chunk.to_string(),
                        ]
                        .into_iter(),
                    );
                    let path = dir.path().join(format!("{i}-{format}-{workers}-{chunk}.out"));
                    let bytes = run_cli(&args, &path);
                    runs += 1;
                    match &reference {
                        None => reference = Some(bytes),
                        Some(r) if *r != bytes => {
                            mismatches.push(format!("{cmd} [{format}, w={workers}, c={chunk}]"))
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{runs} runs over {} commands, all payloads identical", commands.len())
        } else {
            format!("mismatches: {}", mismatches.join("; "))
        },
    )
}

fn main() {
    // `cargo test` passes harness flags such as `--nocapture`; a filter
    // argument other than `acceptance` skips the suite.
    if std::env::args()
        .skip(1)
        .any(|a| !a.starts_with('-') && !"acceptance".contains(a.as_str()))
    {
        return;
    }
    let golden_series = prefix_stream(SummandKind::LogSudler, &golden(), 1_000_000, &opts()).unwrap();
    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "V constant", Box::new(v_constant_check)),
        (2, "sigma^2 from Diophantine sums", Box::new(sigma2_check)),
        (3, "mean law", Box::new(|| mean_law_check(&golden_series))),
        (4, "variance law", Box::new(|| variance_law_check(&golden_series))),
        (5, "CLT trend", Box::new(|| clt_check(&golden_series))),
        (6, "golden-ratio range", Box::new(|| golden_range_check(&golden_series))),
        (7, "symmetry", Box::new(symmetry_criterion)),
        (8, "Diophantine product", Box::new(diophantine_product_check)),
        (9, "partial-quotient square-sum law", Box::new(square_sum_criterion)),
        (10, "Beck centering", Box::new(beck_centering_criterion)),
        (11, "bounded-variance band", Box::new(bu_criterion)),
        (12, "oracle suite", Box::new(oracle_criterion)),
        (13, "Levy experiment", Box::new(levy_criterion)),
        (14, "determinism", Box::new(determinism_criterion)),
    ];
    let mut unexpected = Vec::new();
    let (mut passed, total) = (0, criteria.len());
    for (id, name, check) in &criteria {
        let t = Instant::now();
        let o = check();
        let secs = t.elapsed().as_secs_f64();
        let gap = KNOWN_GAPS.iter().find(|(g, _)| g == id);
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("[{status}] {id:>2} {name}: {} ({secs:.1} s)", o.detail);
        match (o.pass, gap) {
            (true, None) => passed += 1,
            (false, Some((_, why))) => println!("        known gap: {why}"),
            (true, Some(_)) => {
                passed += 1;
                unexpected.push(format!("criterion {id} passes but is listed in KNOWN_GAPS"));
            }
            (false, None) => unexpected.push(format!("criterion {id} failed")),
        }
    }
    println!("acceptance: {passed}/{total} criteria pass, {} known gaps", KNOWN_GAPS.len());
    if !unexpected.is_empty() {
        for u in &unexpected {
            println!("error: {u}");
        }
        std::process::exit(1);
    }
}
