//! Python bindings: `import sudlerlab`.

use num_bigint::BigInt;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use sudlerlab_core::birkhoff::{self, StreamOptions, SummandKind};
use sudlerlab_core::stats::{self, ClosedFormAlpha};
use sudlerlab_core::{cf, quadrature, Error, PartialQuotientSource};

fn to_py(e: Error) -> PyErr {
    if e.is_numeric() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn summand(name: &str, a: f64, b: f64) -> PyResult<SummandKind> {
    let kind = match name {
        "log_sudler" => SummandKind::LogSudler,
        "log_diophantine" => SummandKind::LogDiophantine,
        "sawtooth" | "beck_sawtooth" => SummandKind::BeckSawtooth,
        "indicator" => SummandKind::Indicator { a, b },
        other => return Err(PyValueError::new_err(format!("unknown summand `{other}`"))),
    };
    kind.validate().map_err(to_py)?;
    Ok(kind)
}

fn options(bits: Option<u32>) -> StreamOptions {
    StreamOptions {
        bits,
        ..StreamOptions::default()
    }
}

/// A continued-fraction description of α, parsed from an alpha string such as `golden` or `sqrt:3`.
#[pyclass(name = "Alpha", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyAlpha {
    inner: PartialQuotientSource,
}

#[pymethods]
impl PyAlpha {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(Self {
            inner: spec.parse().map_err(to_py)?,
        })
    }

    fn partial_quotients(&self, k: usize) -> PyResult<Vec<u64>> {
        cf::partial_quotients(&self.inner, k).map_err(to_py)
    }

    /// `[(k, p_k, q_k), ...]` for `k = 0..=k`.
    fn convergents(&self, k: usize) -> PyResult<Vec<(usize, BigInt, BigInt)>> {
        Ok(cf::convergents(&self.inner, k)
            .map_err(to_py)?
            .into_iter()
            .map(|c| (c.k, c.p, BigInt::from(c.q)))
            .collect())
    }

    /// `{α}` rounded to binary64.
    fn frac(&self) -> PyResult<f64> {
        Ok(cf::alpha_value(&self.inner, 192).map_err(to_py)?.to_f64())
    }

    fn e_alpha(&self) -> PyResult<f64> {
        cf::e_alpha(&self.inner).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Alpha('{}')", self.inner)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }
}

/// `[S_1, ..., S_M]` for the chosen summand.
#[pyfunction]
#[pyo3(signature = (alpha, m, summand="log_sudler", a=0.0, b=0.5, bits=None))]
fn prefix_stream(
    py: Python<'_>,
    alpha: &PyAlpha,
    m: u64,
    summand: &str,
    a: f64,
    b: f64,
    bits: Option<u32>,
) -> PyResult<Vec<f64>> {
    let kind = self::summand(summand, a, b)?;
    let src = alpha.inner.clone();
    let series = py
        .detach(|| birkhoff::prefix_stream(kind, &src, m, &options(bits)))
        .map_err(to_py)?;
    Ok(series.values().to_vec())
}

/// `(value, tail_bound)` of the truncated Fourier formula for `log P_N`.
#[pyfunction]
fn fourier_log_sudler(alpha: &PyAlpha, n: u64, cutoff: u64) -> PyResult<(f64, f64)> {
    let f = birkhoff::fourier_log_sudler(&alpha.inner, n, cutoff, &options(None)).map_err(to_py)?;
    Ok((f.value, f.tail_bound))
}

/// `(mean, variance, min, max, argmin, argmax)` of `values[:m]`.
#[pyfunction]
fn moments(values: Vec<f64>) -> PyResult<(f64, f64, f64, f64, u64, u64)> {
    let r = stats::moments::moments_of(&values).map_err(to_py)?;
    Ok((r.mean, r.variance, r.min, r.max, r.argmin, r.argmax))
}

#[pyfunction]
fn diophantine_sum(py: Python<'_>, alpha: &PyAlpha, m: u64) -> PyResult<f64> {
    let src = alpha.inner.clone();
    py.detach(|| stats::diophantine_sum(&src, m, &options(None)))
        .map_err(to_py)
}

/// `(slope, intercept)` of the Diophantine sum against `log M` over `grid`.
#[pyfunction]
fn sigma2_estimate(py: Python<'_>, alpha: &PyAlpha, grid: Vec<u64>) -> PyResult<(f64, f64)> {
    let src = alpha.inner.clone();
    let e = py
        .detach(|| stats::sigma2_estimate(&src, &grid, &options(None)))
        .map_err(to_py)?;
    Ok((e.slope, e.intercept))
}

#[pyfunction]
fn sigma2_closed_form(name: &str) -> PyResult<f64> {
    Ok(stats::sigma2_closed_form(
        name.parse::<ClosedFormAlpha>().map_err(to_py)?,
    ))
}

/// `(value, q_k)` of the symmetry check at index `k`.
#[pyfunction]
fn symmetry_check(py: Python<'_>, alpha: &PyAlpha, k: usize) -> PyResult<(f64, u64)> {
    let src = alpha.inner.clone();
    let r = py
        .detach(|| stats::symmetry_check(&src, k, &options(None)))
        .map_err(to_py)?;
    Ok((r.value, r.q_k))
}

/// KS distance of the normalized `log P_N` to the standard normal.
#[pyfunction]
fn clt_ks_distance(py: Python<'_>, alpha: &PyAlpha, m: u64, sigma2: f64) -> PyResult<f64> {
    let src = alpha.inner.clone();
    py.detach(|| {
        let s = birkhoff::prefix_stream(SummandKind::LogSudler, &src, m, &options(None))?;
        stats::clt_report(&s, m, sigma2).map(|r| r.ks_distance)
    })
    .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (tol=1e-10))]
fn v_constant(tol: f64) -> PyResult<f64> {
    quadrature::v_constant(tol).map_err(to_py)
}

#[pyfunction]
fn levy_cdf(t: f64) -> f64 {
    stats::levy_cdf(t)
}

#[pymodule]
fn sudlerlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", sudlerlab_core::VERSION)?;
    m.add_class::<PyAlpha>()?;
    m.add_function(wrap_pyfunction!(prefix_stream, m)?)?;
    m.add_function(wrap_pyfunction!(fourier_log_sudler, m)?)?;
    m.add_function(wrap_pyfunction!(moments, m)?)?;
    m.add_function(wrap_pyfunction!(diophantine_sum, m)?)?;
    m.add_function(wrap_pyfunction!(sigma2_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(sigma2_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(symmetry_check, m)?)?;
    m.add_function(wrap_pyfunction!(clt_ks_distance, m)?)?;
    m.add_function(wrap_pyfunction!(v_constant, m)?)?;
    m.add_function(wrap_pyfunction!(levy_cdf, m)?)?;
    Ok(())
}
