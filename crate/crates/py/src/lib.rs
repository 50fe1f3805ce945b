use mixpolar_core::code_design::{
    block_error_bound_with, default_rate_grid, max_k_at_bound, rate_curve_from, select_information_set_with, PeMetric,
};
use mixpolar_core::construction::{build_layout, Layout, Scheme};
use mixpolar_core::erasure_de::{de_evolve, DeResult};
use mixpolar_core::kernels::{exponent_bounds, partial_distances, Kernel, MixedKernel};
use mixpolar_core::sc_codec::simulate_bler;
use pyo3::exceptions::{PyMemoryError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: mixpolar_core::Error) -> PyErr {
    match e {
        mixpolar_core::Error::CapacityExceeded { .. } => PyMemoryError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_scheme(scheme: &str) -> PyResult<Scheme> {
    scheme.parse().map_err(to_py)
}

fn evolve(scheme: &str, n: usize, epsilon: f64) -> PyResult<(Layout, DeResult)> {
    let layout = build_layout(parse_scheme(scheme)?, n).map_err(to_py)?;
    let de = de_evolve(&layout, epsilon).map_err(to_py)?;
    Ok((layout, de))
}

/// Channel order of a construction: one list of 1-based bit indices per synthesized channel.
#[pyfunction]
fn layout(scheme: &str, n: usize) -> PyResult<Vec<Vec<usize>>> {
    let layout = build_layout(parse_scheme(scheme)?, n).map_err(to_py)?;
    Ok(layout.channels().iter().map(|c| c.indices()).collect())
}

type DeRow = (usize, usize, f64, f64, f64, f64);

/// Erasure density evolution over `BEC(epsilon)`.
///
/// Returns `(start, width, I, Z, P_e_ambiguous, P_e_guess)` per channel.
#[pyfunction]
fn density_evolution(scheme: &str, n: usize, epsilon: f64) -> PyResult<Vec<DeRow>> {
    let (layout, de) = evolve(scheme, n, epsilon)?;
    Ok(layout
        .channels()
        .iter()
        .zip(&de.channels)
        .map(|(c, s)| {
            let m = &s.metrics;
            (c.start, c.width, m.i, m.z, m.pe_ambiguous, m.pe_guess)
        })
        .collect())
}

/// Information set of size `k` minimizing the union bound.
#[pyfunction]
#[pyo3(signature = (scheme, n, epsilon, k, metric = "ambiguous"))]
fn select<'py>(
    py: Python<'py>,
    scheme: &str,
    n: usize,
    epsilon: f64,
    k: usize,
    metric: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let metric: PeMetric = metric.parse().map_err(to_py)?;
    let (_, de) = evolve(scheme, n, epsilon)?;
    let set = select_information_set_with(&de, k, metric).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("K", set.k)?;
    d.set_item("requested_K", set.requested_k)?;
    d.set_item("exact", set.is_exact())?;
    d.set_item("bound", block_error_bound_with(&de, &set, metric))?;
    d.set_item("info_mask", set.info_mask(&de))?;
    d.set_item("selected", set.selected)?;
    Ok(d)
}

/// `(rate, K, bound)` points of the union-bound curve.
#[pyfunction]
#[pyo3(signature = (scheme, n, epsilon, rates = None))]
fn rate_curve(scheme: &str, n: usize, epsilon: f64, rates: Option<Vec<f64>>) -> PyResult<Vec<(f64, usize, f64)>> {
    let (_, de) = evolve(scheme, n, epsilon)?;
    let rates = rates.unwrap_or_else(default_rate_grid);
    let points = rate_curve_from(&de, &rates).map_err(to_py)?;
    Ok(points.iter().map(|p| (p.rate, p.k, p.bound)).collect())
}

/// Largest `K` whose union bound stays at or below `target`.
#[pyfunction]
fn max_k(scheme: &str, n: usize, epsilon: f64, target: f64) -> PyResult<usize> {
    let (_, de) = evolve(scheme, n, epsilon)?;
    max_k_at_bound(&de, target).map_err(to_py)
}

/// Monte Carlo block error rate of SC decoding; returns `(errors, bler, stderr)`.
#[pyfunction]
#[pyo3(signature = (scheme, n, epsilon, k, trials = 10_000, seed = 1))]
fn simulate(py: Python<'_>, scheme: &str, n: usize, epsilon: f64, k: usize, trials: u64, seed: u64) -> PyResult<(u64, f64, f64)> {
    let (layout, de) = evolve(scheme, n, epsilon)?;
    let set = select_information_set_with(&de, k, PeMetric::default()).map_err(to_py)?;
    let est = py
        .detach(|| simulate_bler(&layout, &set, epsilon, trials, seed))
        .map_err(to_py)?;
    Ok((est.errors, est.bler, est.stderr))
}

fn kernel(name: &str) -> PyResult<Kernel> {
    match name {
        "g1" => Ok(Kernel::g1()),
        "rs4" => Ok(Kernel::rs4()),
        "arikan" => Ok(Kernel::arikan()),
        "quaternary_arikan" => Ok(Kernel::quaternary_arikan()),
        other => Err(PyValueError::new_err(format!("unknown kernel `{other}`"))),
    }
}

/// Partial distances `(d_min, d_max)` per input group.
#[pyfunction]
fn kernel_distances(name: &str) -> PyResult<Vec<(usize, usize)>> {
    let k = kernel(name)?;
    let pd = partial_distances(&k).map_err(to_py)?;
    Ok(pd.min.iter().copied().zip(pd.max.iter().copied()).collect())
}

/// `(E1, E2)` exponent bounds of a kernel, or of the mixed construction for `"mixed"`.
#[pyfunction]
fn kernel_exponents(name: &str) -> PyResult<(f64, f64)> {
    let e = match name {
        "mixed" => MixedKernel::g1_rs4().exponent_bounds().map_err(to_py)?,
        _ => exponent_bounds(&kernel(name)?).map_err(to_py)?,
    };
    Ok((e.e1, e.e2))
}

#[pymodule]
pub fn mixpolar(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(layout, m)?)?;
    m.add_function(wrap_pyfunction!(density_evolution, m)?)?;
    m.add_function(wrap_pyfunction!(select, m)?)?;
    m.add_function(wrap_pyfunction!(rate_curve, m)?)?;
    m.add_function(wrap_pyfunction!(max_k, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_distances, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_exponents, m)?)?;
    Ok(())
}
