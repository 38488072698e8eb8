//! Python bindings: parameter scales, canned configurations, runs,
//! verification studies and the file readers.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qg2::bench::{self, CaseName};
use qg2::cli;
use qg2::config;
use qg2::filter::FilterMode;
use qg2::grid::ScalarField;
use qg2::mms;
use qg2::physics::{self, PhysicalParams};
use qg2::timeloop::read_series_csv;
use qg2::QgError;

type RunResult = (String, u64, f64, Option<(f64, f64, f64, f64)>);
type FldData = (usize, usize, (f64, f64, f64, f64), f64, Vec<f64>);
type StatsTriple = (f64, f64, f64);

fn py_err(e: QgError) -> PyErr {
    match e {
        QgError::File { .. } | QgError::Io(_) => PyIOError::new_err(e.to_string()),
        QgError::NotConverged { .. } | QgError::Breakdown { .. } | QgError::NonFinite { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn params(ro: f64, re: f64, length: f64) -> PyResult<PhysicalParams> {
    PhysicalParams::new(ro, re, 0.0, 0.0, 0.5, length).map_err(py_err)
}

/// Munk boundary-layer width `L (Ro/Re)^(1/3)`.
#[pyfunction]
#[pyo3(signature = (ro, re, length = 1.0))]
fn munk_scale(ro: f64, re: f64, length: f64) -> PyResult<f64> {
    Ok(physics::munk_scale(&params(ro, re, length)?))
}

/// Kolmogorov length `L Re^(-3/4)`.
#[pyfunction]
#[pyo3(signature = (ro, re, length = 1.0))]
fn kolmogorov_scale(ro: f64, re: f64, length: f64) -> PyResult<f64> {
    Ok(physics::kolmogorov_scale(&params(ro, re, length)?))
}

/// INI text of a canned case (`case1`/`case2`) on a benchmark mesh.
#[pyfunction]
#[pyo3(signature = (case, mesh = "32x64", filter = "none", alpha = None))]
fn case_config(case: &str, mesh: &str, filter: &str, alpha: Option<f64>) -> PyResult<String> {
    let case: CaseName = case.parse().map_err(py_err)?;
    let mesh = config::parse_mesh(mesh).map_err(py_err)?;
    let mode: FilterMode = filter.parse().map_err(py_err)?;
    Ok(bench::make_case(case, mesh, mode, alpha).map_err(py_err)?.to_ini())
}

/// Runs a configuration given as INI text; returns the run directory and
/// enstrophy statistics.
#[pyfunction]
fn run(py: Python<'_>, config_text: &str) -> PyResult<RunResult> {
    let cfg = config::parse_config(config_text).map_err(py_err)?;
    let summary = py.detach(|| cli::execute_run(&cfg)).map_err(py_err)?;
    let stats = summary.stats.map(|[e1, e2]| (e1.avg, e1.max, e2.avg, e2.min));
    Ok((summary.dir.display().to_string(), summary.steps, summary.t, stats))
}

/// Convergence study of a named verification case: one
/// `(n, [psi1, psi2, q1, q2] errors)` tuple per mesh.
#[pyfunction]
#[pyo3(signature = (case, meshes, t_end = None, workers = 1))]
fn verify(
    py: Python<'_>,
    case: &str,
    meshes: Vec<usize>,
    t_end: Option<f64>,
    workers: usize,
) -> PyResult<Vec<(usize, [f64; 4])>> {
    let c = mms::case(case).map_err(py_err)?;
    let mut cfg = c.config();
    cfg.meshes = meshes;
    if let Some(t) = t_end {
        cfg.t_end = t;
    }
    let study = py
        .detach(|| mms::run_convergence_study(&cfg, workers))
        .map_err(py_err)?;
    Ok(study.results.iter().map(|r| (r.n, r.errors)).collect())
}

/// Reads a `.fld` file: `(nx, ny, (x0, xf, y0, yf), time, row-major values)`.
#[pyfunction]
fn read_fld(path: PathBuf) -> PyResult<FldData> {
    let (f, t) = ScalarField::load(&path).map_err(py_err)?;
    let g = *f.grid();
    Ok((g.nx(), g.ny(), g.bounds(), t, f.into_values()))
}

/// Reads an enstrophy CSV as a list of `(t, E1, E2)`.
#[pyfunction]
fn read_enstrophy(path: PathBuf) -> PyResult<Vec<(f64, f64, f64)>> {
    read_series_csv(&path).map_err(py_err)
}

/// `((E1 avg, min, max), (E2 avg, min, max))` over the window.
#[pyfunction]
#[pyo3(signature = (series, window = (20.0, 100.0)))]
fn enstrophy_stats(
    series: Vec<(f64, f64, f64)>,
    window: (f64, f64),
) -> PyResult<(StatsTriple, StatsTriple)> {
    let [e1, e2] = bench::enstrophy_stats(&series, window).map_err(py_err)?;
    Ok(((e1.avg, e1.min, e1.max), (e2.avg, e2.min, e2.max)))
}

#[pymodule]
fn qg2py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(munk_scale, m)?)?;
    m.add_function(wrap_pyfunction!(kolmogorov_scale, m)?)?;
    m.add_function(wrap_pyfunction!(case_config, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(read_fld, m)?)?;
    m.add_function(wrap_pyfunction!(read_enstrophy, m)?)?;
    m.add_function(wrap_pyfunction!(enstrophy_stats, m)?)?;
    Ok(())
}
