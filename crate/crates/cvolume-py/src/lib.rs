//! Python bindings. Documents cross the boundary as JSON text in the same
//! schemas the CLI uses; scalars come back as Python `complex`.

use cvolume::flatten::default_flattening;
use cvolume::io;
use cvolume::selftest::{self, Config};
use cvolume::solver::solve_shaping;
use cvolume::volume::manifold_volume;
use cvolume::{Error, C64};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(io::to_text(&io::error_to_json(&e)))
}

#[pyfunction]
pub fn li2(z: C64) -> C64 {
    cvolume::dilog::li2(z)
}

/// `𝓛(z; p0, p1)` reduced mod 2π².
#[pyfunction]
pub fn lifted_l(z: C64, p0: i64, p1: i64) -> PyResult<C64> {
    Ok(cvolume::dilog::lifted_l_pq(z, p0, p1).map_err(err)?.reduced().value)
}

#[pyfunction]
pub fn lens_oracle(p: i64, q: i64, n: i64) -> PyResult<C64> {
    Ok(cvolume::surgery::lens_oracle(p, q, n).map_err(err)?.reduced().value)
}

/// Complex volume of a lens space computed through the kink diagram.
#[pyfunction]
pub fn lens_volume(p: i64, q: i64, n: i64) -> PyResult<C64> {
    let pres = cvolume::fixtures::lens(p, q, n).map_err(err)?;
    let (chi, f) = (pres.shaping.unwrap(), pres.flattening.unwrap());
    let v = manifold_volume(&pres.diagram, &chi, &f, &[], 1e-9).map_err(err)?;
    Ok(v.total.reduced().value)
}

/// A bundled presentation as JSON.
#[pyfunction]
pub fn fixture(name: &str) -> PyResult<String> {
    Ok(io::to_text(&io::presentation_to_json(&cvolume::fixtures::by_name(name).map_err(err)?)))
}

/// Volume report for a shaped presentation. Without a flattening the
/// default one is used.
#[pyfunction]
#[pyo3(signature = (presentation, tol = 1e-9))]
pub fn volume(presentation: &str, tol: f64) -> PyResult<String> {
    let p = io::parse_presentation(&io::parse_json(presentation).map_err(err)?).map_err(err)?;
    let chi = p.shaping.as_ref().ok_or_else(|| PyValueError::new_err("presentation has no shaping"))?;
    let f = match &p.flattening {
        Some(f) => f.clone(),
        None => default_flattening(&p.diagram, chi).map_err(err)?,
    };
    let r = manifold_volume(&p.diagram, chi, &f, &p.targets, tol).map_err(err)?;
    Ok(io::to_text(&io::volume_report_to_json(&r)))
}

/// Solve a request document; returns the results document.
#[pyfunction]
pub fn solve(request: &str) -> PyResult<String> {
    let req = io::parse_solve_request(&io::parse_json(request).map_err(err)?, None).map_err(err)?;
    let results = solve_shaping(&req).map_err(err)?;
    Ok(io::to_text(&io::solve_results_to_json(&req, &results)))
}

/// Runs the listed criteria (all when empty); returns `(passed, report)`.
#[pyfunction]
#[pyo3(signature = (criteria = Vec::new(), seed = 1))]
pub fn run_selftest(criteria: Vec<u32>, seed: u64) -> (bool, String) {
    let cfg = Config { seed, ..Config::default() };
    let ids: Vec<u32> = if criteria.is_empty() { (1..=10).collect() } else { criteria };
    let results: Vec<_> = ids.iter().map(|&id| selftest::run_criterion(id, &cfg)).collect();
    (results.iter().all(|c| c.passed()), io::to_text(&selftest::report_json(&cfg, &results)))
}

#[pymodule]
pub fn cvolume_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(li2, m)?)?;
    m.add_function(wrap_pyfunction!(lifted_l, m)?)?;
    m.add_function(wrap_pyfunction!(lens_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(lens_volume, m)?)?;
    m.add_function(wrap_pyfunction!(fixture, m)?)?;
    m.add_function(wrap_pyfunction!(volume, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_selftest, m)?)?;
    Ok(())
}
