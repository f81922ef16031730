use std::f64::consts::PI;
use std::io::BufWriter;

use serde_json::Value;

use sudlerlab_core::birkhoff::{prefix_stream, write_binary, SummandKind};
use sudlerlab_core::cf::{convergents, e_alpha};
use sudlerlab_core::quadrature::{log_sine_integral, v_constant};
use sudlerlab_core::stats::checks::{bounded_remainder_length, bu_variance_check};
use sudlerlab_core::stats::diophantine::sigma2_from_sums;
use sudlerlab_core::stats::{
    ae_experiment, clt_report, diophantine_sum_grid, extreme_check, pq_square_sum_check,
    predicted_birkhoff_moments, predicted_mean_variance, sigma2_closed_form, symmetry_check,
    temporal_moments, ClosedFormAlpha, FourierModel,
};
use sudlerlab_core::{default_bits, Error, PartialQuotientSource};

use crate::report::{num, Report};
use crate::{parse_alpha, Command, Context, RunError, SummandArgs};

impl Context {
    /// Records the precision used for horizon `m` and returns it.
    fn bits_for(&mut self, m: u64) -> u32 {
        let b = self.opts.bits.unwrap_or_else(|| default_bits(m));
        self.precision_bits = Some(self.precision_bits.map_or(b, |p| p.max(b)));
        b
    }
}

fn header(r: &mut Report, spec: &str, src: &PartialQuotientSource) {
    r.set("alpha", spec);
    r.set("alpha_canonical", src.to_string());
    if let sudlerlab_core::SourceKind::GaussRandom { seed, .. } = src.kind {
        r.set("seed", seed);
    }
}

fn value_column(kind: SummandKind) -> &'static str {
    match kind {
        SummandKind::LogSudler => "logP",
        SummandKind::LogDiophantine => "logD",
        _ => "S",
    }
}

fn usage(msg: impl Into<String>) -> RunError {
    RunError::Usage(msg.into())
}

fn check_m(m: u64) -> Result<(), RunError> {
    if m == 0 {
        return Err(usage("M must be at least 1"));
    }
    Ok(())
}

pub(crate) fn execute(cmd: &Command, ctx: &mut Context) -> Result<Report, RunError> {
    match cmd {
        Command::Cf { alpha, k } => cf(alpha, *k),
        Command::Sudler {
            alpha,
            max_n,
            summand,
            ..
        } => sudler(ctx, alpha, *max_n, summand),
        Command::Moments {
            alpha,
            m,
            summand,
            cutoff,
        } => moments(ctx, alpha, *m, summand, *cutoff),
        Command::DiophSum { alpha, m, grid, k } => {
            let src = parse_alpha(alpha)?;
            if let Some(k) = k {
                return square_sum(ctx, alpha, &src, *k);
            }
            let points = match (m, grid) {
                (Some(m), None) => {
                    check_m(*m)?;
                    vec![*m]
                }
                (None, Some(g)) => g.0.clone(),
                _ => return Err(usage("dioph-sum needs exactly one of --m, --grid, --k")),
            };
            let mut r = Report::new("dioph_sum");
            header(&mut r, alpha, &src);
            r.set("precision_bits", ctx.bits_for(*points.last().expect("nonempty")));
            let sums = diophantine_sum_grid(&src, &points, &ctx.opts)?;
            r.table(vec!["M", "sum", "ratio"]);
            for (&m, &s) in points.iter().zip(&sums) {
                let l = (m as f64).ln();
                r.row(vec![m.into(), num(s), num(s / l)]);
            }
            Ok(r)
        }
        Command::Sigma2 { alpha, grid } => {
            let src = parse_alpha(alpha)?;
            if grid.0.len() < 3 {
                return Err(usage("sigma2 needs at least 3 grid points"));
            }
            let mut r = Report::new("sigma2");
            header(&mut r, alpha, &src);
            r.set("precision_bits", ctx.bits_for(*grid.0.last().expect("nonempty")));
            let sums = diophantine_sum_grid(&src, &grid.0, &ctx.opts)?;
            let est = sigma2_from_sums(&grid.0, &sums);
            r.set_f64("slope", est.slope).set_f64("intercept", est.intercept);
            if let Some(c) = ClosedFormAlpha::of_source(&src) {
                let cf = sigma2_closed_form(c);
                r.set_f64("closed_form", cf).set_f64("relative_error", est.slope / cf - 1.0);
            }
            r.table(vec!["M", "sum", "ratio"]);
            for p in &est.per_point {
                r.row(vec![p.m.into(), num(p.sum), num(p.ratio)]);
            }
            Ok(r)
        }
        Command::Clt { alpha, m, sigma2 } => {
            let src = parse_alpha(alpha)?;
            let sigma2 = match sigma2 {
                Some(s) => *s,
                None => ClosedFormAlpha::of_source(&src)
                    .map(sigma2_closed_form)
                    .ok_or_else(|| usage("--sigma2 is required unless alpha is golden or sqrt:3"))?,
            };
            if !(sigma2 > 0.0) {
                return Err(usage("--sigma2 must be positive"));
            }
            if *m < 100 {
                return Err(usage("clt needs M >= 100"));
            }
            let mut r = Report::new("clt");
            header(&mut r, alpha, &src);
            r.set("precision_bits", ctx.bits_for(*m));
            let series = prefix_stream(SummandKind::LogSudler, &src, *m, &ctx.opts)?;
            let d = clt_report(&series, *m, sigma2)?;
            r.set("M", *m).set_f64("sigma2", sigma2);
            r.set("count", d.count).set_f64("ks_distance", d.ks_distance);
            r.set("reference", "standard_normal");
            r.table(vec!["level", "quantile"]);
            for (p, q) in d.quantiles {
                r.row(vec![num(p), num(q)]);
            }
            Ok(r)
        }
        Command::Symmetry { alpha, k } => {
            let src = parse_alpha(alpha)?;
            let mut r = Report::new("symmetry");
            header(&mut r, alpha, &src);
            r.table(vec!["k", "q_k", "value", "argmax"]);
            let mut rows = Vec::new();
            for &k in k {
                let s = symmetry_check(&src, k, &ctx.opts)?;
                ctx.bits_for(s.q_k);
                rows.push(vec![k.into(), s.q_k.into(), num(s.value), s.argmax.into()]);
            }
            r.set("precision_bits", ctx.precision_bits);
            r.rows = rows;
            Ok(r)
        }
        Command::Extremes { alpha, k } => {
            let src = parse_alpha(alpha)?;
            let mut r = Report::new("extremes");
            header(&mut r, alpha, &src);
            r.set_f64("V", v_constant(1e-10)?);
            r.table(vec![
                "k",
                "q_k",
                "max",
                "min",
                "argmax",
                "argmin",
                "predicted",
                "ratio",
                "error_scale",
                "symmetry_residual",
            ]);
            let mut rows = Vec::new();
            for &k in k {
                let e = extreme_check(&src, k, &ctx.opts)?;
                ctx.bits_for(e.q_k);
                rows.push(vec![
                    k.into(),
                    e.q_k.into(),
                    num(e.max),
                    num(e.min),
                    e.argmax.into(),
                    e.argmin.into(),
                    num(e.predicted),
                    num(e.ratio),
                    num(e.error_scale),
                    num(e.symmetry_residual),
                ]);
            }
            r.set("precision_bits", ctx.precision_bits);
            r.rows = rows;
            Ok(r)
        }
        Command::BirkhoffPredict {
            alpha,
            m,
            summand,
            cutoff,
        } => {
            check_m(*m)?;
            let src = parse_alpha(alpha)?;
            let kind = summand.kind();
            kind.validate()?;
            let mut model = FourierModel::for_summand(kind)?;
            if let Some(c) = cutoff {
                model = model.with_cutoff(*c).with_truncation(true);
            }
            let mut r = Report::new("birkhoff_predict");
            header(&mut r, alpha, &src);
            r.set("summand", kind.name());
            let p = predicted_birkhoff_moments(&model, &src, *m, &ctx.opts)?;
            r.set("precision_bits", ctx.bits_for(p.h.max(*m)));
            let series = prefix_stream(kind, &src, *m, &ctx.opts)?;
            let e = temporal_moments(&series, *m)?;
            r.set("M", *m).set("H", p.h).set("truncated", p.truncated);
            r.set_f64("mean", e.mean).set_f64("variance", e.variance);
            r.set_f64("predicted_mean", p.mean_main);
            r.set_f64("predicted_variance_main", p.variance_main);
            r.set_f64("mean_residual", e.mean - p.mean_main);
            r.set_f64("variance_residual", e.variance - p.variance_main);
            Ok(r)
        }
        Command::Bu {
            alpha,
            length,
            length_q,
            grid,
        } => {
            let src = parse_alpha(alpha)?;
            let length = match (length, length_q) {
                (Some(l), None) => *l,
                (None, Some(q)) => bounded_remainder_length(&src, *q)?,
                _ => return Err(usage("bu needs exactly one of --length, --length-q")),
            };
            if grid.0[0] < 2 {
                return Err(usage("bu grid points must be at least 2"));
            }
            let mut r = Report::new("bu");
            header(&mut r, alpha, &src);
            r.set("precision_bits", ctx.bits_for(*grid.0.last().expect("nonempty")));
            if let Some(q) = length_q {
                r.set("length_q", *q);
            }
            let b = bu_variance_check(&src, length, &grid.0, &ctx.opts)?;
            r.set_f64("length", length);
            r.set_f64("min_ratio", b.min_ratio).set_f64("max_ratio", b.max_ratio);
            r.table(vec![
                "M",
                "variance",
                "ratio",
                "predicted_variance_main",
                "predicted_ratio",
            ]);
            for p in b.points {
                r.row(vec![
                    p.m.into(),
                    num(p.variance),
                    num(p.ratio),
                    num(p.predicted_variance_main),
                    num(p.predicted_ratio),
                ]);
            }
            Ok(r)
        }
        Command::Vconst { tol } => {
            if !(1e-12..=1e-4).contains(tol) {
                return Err(usage(format!("--tol {tol:e} outside [1e-12, 1e-4]")));
            }
            let mut r = Report::new("vconst");
            r.set_f64("V", v_constant(*tol)?);
            r.set_f64("tol", *tol);
            r.set_f64("full_period", log_sine_integral(1.0, *tol)?);
            Ok(r)
        }
        Command::AeLevy {
            seeds,
            seed_start,
            k,
        } => {
            if *seeds < 200 || *k < 100 {
                return Err(usage("ae-levy needs at least 200 seeds and k >= 100"));
            }
            let list: Vec<u64> = (0..*seeds as u64)
                .map(|i| seed_start.checked_add(i))
                .collect::<Option<_>>()
                .ok_or_else(|| usage("seed range overflows"))?;
            let a = ae_experiment(&list, *k)?;
            ctx.precision_bits = Some(a.precision_bits);
            let mut r = Report::new("ae_levy");
            r.set("k", *k).set("seeds", *seeds).set("seed_start", *seed_start);
            r.set("precision_bits", a.precision_bits);
            r.set("count", a.distribution.count);
            r.set_f64("ks_distance", a.distribution.ks_distance);
            r.set("reference", "levy");
            r.set(
                "quantiles",
                Value::Array(
                    a.distribution
                        .quantiles
                        .iter()
                        .map(|&(p, q)| Value::Array(vec![num(p), num(q)]))
                        .collect(),
                ),
            );
            r.set_f64("log_qk_mean_rate", a.log_qk.mean_rate);
            r.set_f64("log_qk_limit_rate", a.log_qk.limit_rate);
            r.set_f64("log_qk_tau", a.log_qk.tau);
            r.table(vec!["seed", "statistic", "sum_squares", "max_quotient", "log_qk"]);
            for s in a.samples {
                r.row(vec![
                    s.seed.into(),
                    num(s.statistic),
                    num(s.sum_squares),
                    s.max_quotient.into(),
                    num(s.log_qk),
                ]);
            }
            Ok(r)
        }
    }
}

fn cf(alpha: &str, k: usize) -> Result<Report, RunError> {
    let src = parse_alpha(alpha)?;
    let conv = convergents(&src, k)?;
    let mut r = Report::new("cf");
    header(&mut r, alpha, &src);
    r.set("k", k);
    if let Ok(e) = e_alpha(&src) {
        r.set_f64("e_alpha", e);
    }
    r.table(vec!["k", "a", "p", "q"]);
    let quotients: Vec<i64> = std::iter::once(src.a0)
        .chain(src.quotients().take(k).map(|a| a as i64))
        .collect();
    for (c, a) in conv.iter().zip(quotients) {
        r.row(vec![
            c.k.into(),
            a.into(),
            Value::String(c.p.to_string()),
            Value::String(c.q.to_string()),
        ]);
    }
    Ok(r)
}

fn sudler(
    ctx: &mut Context,
    alpha: &str,
    max_n: u64,
    summand: &SummandArgs,
) -> Result<Report, RunError> {
    check_m(max_n)?;
    let src = parse_alpha(alpha)?;
    let kind = summand.kind();
    kind.validate()?;
    let mut r = Report::new("sudler");
    header(&mut r, alpha, &src);
    r.set("summand", kind.name());
    r.set("precision_bits", ctx.bits_for(max_n));
    let series = prefix_stream(kind, &src, max_n, &ctx.opts)?;
    if let Some(f) = ctx.binary.take() {
        write_binary(&series, BufWriter::new(f))?;
    }
    r.table(vec!["N", value_column(kind), "err"]);
    r.rows = series
        .entries()
        .map(|(n, v, e)| vec![n.into(), num(v), num(e)])
        .collect();
    Ok(r)
}

fn moments(
    ctx: &mut Context,
    alpha: &str,
    m: u64,
    summand: &SummandArgs,
    cutoff: Option<u64>,
) -> Result<Report, RunError> {
    check_m(m)?;
    let src = parse_alpha(alpha)?;
    let kind = summand.kind();
    kind.validate()?;
    let mut r = Report::new("moments");
    header(&mut r, alpha, &src);
    r.set("summand", kind.name());
    r.set("precision_bits", ctx.bits_for(m));
    let series = prefix_stream(kind, &src, m, &ctx.opts)?;
    let mut report = temporal_moments(&series, m)?;
    match kind {
        SummandKind::LogSudler => match predicted_mean_variance(&src, m, &ctx.opts) {
            Ok(p) => {
                report = report.with_prediction(p.mean, p.variance_main);
                r.set("window_max_quotient", p.window_max_quotient);
                r.set_f64("mean_error_scale", p.mean_error_scale);
                r.set_f64("variance_error_scale", p.variance_error_scale);
            }
            Err(Error::HypothesisViolated) => {}
            Err(e) => return Err(e.into()),
        },
        SummandKind::BeckSawtooth | SummandKind::Indicator { .. } => {
            let mut model = FourierModel::for_summand(kind)?;
            if let Some(c) = cutoff {
                model = model.with_cutoff(c).with_truncation(true);
            }
            match predicted_birkhoff_moments(&model, &src, m, &ctx.opts) {
                Ok(p) => {
                    ctx.bits_for(p.h.max(m));
                    report = report.with_prediction(p.mean_main, p.variance_main);
                    r.set("H", p.h).set("truncated", p.truncated);
                }
                Err(Error::HypothesisViolated) => {}
                Err(e) => return Err(e.into()),
            }
            if kind == SummandKind::BeckSawtooth {
                if let Ok(e) = e_alpha(&src) {
                    let centering = e * (m as f64).ln();
                    r.set_f64("beck_centering", centering);
                    r.set_f64("beck_residual", report.mean - centering);
                }
            }
        }
        SummandKind::LogDiophantine => {}
    }
    r.set("precision_bits", ctx.precision_bits);
    r.set("M", report.m);
    r.set_f64("mean", report.mean).set_f64("variance", report.variance);
    r.set_f64("min", report.min).set_f64("max", report.max);
    r.set("argmin", report.argmin).set("argmax", report.argmax);
    let (pm, pv) = (report.predicted_mean, report.predicted_variance_main);
    r.set("predicted_mean", pm.map_or(Value::Null, num));
    r.set("predicted_variance_main", pv.map_or(Value::Null, num));
    let (rm, rv) = report.residuals.map_or((Value::Null, Value::Null), |(a, b)| (num(a), num(b)));
    r.set("mean_residual", rm).set("variance_residual", rv);
    let lm = (m as f64).ln();
    if lm > 0.0 {
        r.set_f64("variance_over_log_m", report.variance / lm);
    }
    Ok(r)
}

fn square_sum(
    ctx: &mut Context,
    alpha: &str,
    src: &PartialQuotientSource,
    k: usize,
) -> Result<Report, RunError> {
    let s = pq_square_sum_check(src, k, &ctx.opts)?;
    let mut r = Report::new("pq_square_sum");
    header(&mut r, alpha, src);
    r.set("precision_bits", ctx.bits_for(s.q_k));
    r.set_f64("coefficient", PI / 720f64.sqrt());
    r.table(vec!["k", "q_k", "lhs", "rhs", "ratio", "error_scale"]);
    r.row(vec![
        s.k.into(),
        s.q_k.into(),
        num(s.lhs),
        num(s.rhs),
        num(s.ratio),
        num(s.error_scale),
    ]);
    Ok(r)
}
