//! Python bindings. Results come back as plain dicts and lists.

use nlhopf::amplitude::{classify_unfolding, predict as amp_predict, PlanarSystem};
use nlhopf::eigen::build_basis;
use nlhopf::linstab::{double_hopf as find_double_hopf, model_at, DoubleHopfPoint};
use nlhopf::model::{ModelSpec, ParamPoint};
use nlhopf::normalform::{normal_form as nf, NormalFormReport};
use nlhopf::pdesim::{
    classify_attractor, preset, simulate as run_sim, Grid, InitialCondition, SimConfig, PRESET_NAMES,
};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde_json::{json, Value};
use std::f64::consts::PI;

fn err(e: nlhopf::Error) -> PyErr {
    match e {
        nlhopf::Error::Parse(_) | nlhopf::Error::Domain(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    let json = py.import("json")?;
    Ok(json.call_method1("loads", (v.to_string(),))?.unbind())
}

fn load(model: Option<&str>) -> PyResult<ModelSpec> {
    ModelSpec::from_json_str(model.unwrap_or(r#"{"kind": "holling_tanner"}"#)).map_err(err)
}

struct Located {
    spec: ModelSpec,
    dh: DoubleHopfPoint,
}

fn locate(model: Option<&str>, mode: u32) -> PyResult<Located> {
    let spec = load(model)?;
    let dh = find_double_hopf(&spec, mode).map_err(err)?;
    let spec = model_at(&spec, &dh).map_err(err)?;
    Ok(Located { spec, dh })
}

fn reduce(p: &Located) -> PyResult<NormalFormReport> {
    let basis = build_basis(&p.spec, &p.dh).map_err(err)?;
    nf(&p.spec, &basis, &p.dh).map_err(err)
}

fn value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialise")
}

/// Double Hopf point with critical mode `mode`. `model` is a JSON model description.
#[pyfunction]
#[pyo3(signature = (model=None, mode=1))]
fn double_hopf(py: Python<'_>, model: Option<&str>, mode: u32) -> PyResult<Py<PyAny>> {
    let p = locate(model, mode)?;
    to_py(py, &value(&p.dh))
}

/// Third-order coefficients, polar form and unfolding case.
#[pyfunction]
#[pyo3(signature = (model=None, mode=1, intermediates=false))]
fn normal_form(py: Python<'_>, model: Option<&str>, mode: u32, intermediates: bool) -> PyResult<Py<PyAny>> {
    let p = locate(model, mode)?;
    let report = reduce(&p)?;
    let mut v = value(&report);
    if !intermediates {
        v.as_object_mut().expect("report is an object").remove("intermediates");
    }
    if let Some(polar) = &report.polar {
        if let Ok(u) = classify_unfolding(polar) {
            v["unfolding"] = json!(u.case_id.to_string());
        }
    }
    to_py(py, &v)
}

/// Amplitude-system prediction at offset (mu1, mu2) from the double Hopf point.
#[pyfunction]
#[pyo3(signature = (mu1, mu2, model=None, mode=1))]
fn predict(py: Python<'_>, mu1: f64, mu2: f64, model: Option<&str>, mode: u32) -> PyResult<Py<PyAny>> {
    let p = locate(model, mode)?;
    let report = reduce(&p)?;
    let polar = report
        .polar
        .ok_or_else(|| PyRuntimeError::new_err(report.polar_error.clone().unwrap_or_default()))?;
    let pred = amp_predict(&PlanarSystem::new(polar, ParamPoint::new(mu1, mu2), p.dh.n1, p.dh.n2)).map_err(err)?;
    let mut v = value(&pred);
    v["verdict"] = json!(pred.attractor_str());
    to_py(py, &v)
}

#[pyfunction]
fn preset_names() -> Vec<&'static str> {
    PRESET_NAMES.to_vec()
}

/// Simulates at offset (mu1, mu2) and classifies the attractor.
///
/// `ic` is "equilibrium" or "u0,us,uc;v0,vs,vc". The returned probe series is
/// thinned to at most `max_samples` points.
#[pyfunction]
#[pyo3(signature = (mu1, mu2, model=None, mode=1, ic="equilibrium", grid=128, t_end=5000.0, dt=None, max_samples=2000))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    mu1: f64,
    mu2: f64,
    model: Option<&str>,
    mode: u32,
    ic: &str,
    grid: usize,
    t_end: f64,
    dt: Option<f64>,
    max_samples: usize,
) -> PyResult<Py<PyAny>> {
    let ic = InitialCondition::parse(ic).map_err(err)?;
    run(py, ParamPoint::new(mu1, mu2), ic, model, mode, grid, t_end, dt, max_samples)
}

/// Runs a named experiment; see `preset_names`.
#[pyfunction]
#[pyo3(signature = (name, model=None, mode=1, grid=128, t_end=5000.0, dt=None, max_samples=2000))]
#[allow(clippy::too_many_arguments)]
fn simulate_preset(
    py: Python<'_>,
    name: &str,
    model: Option<&str>,
    mode: u32,
    grid: usize,
    t_end: f64,
    dt: Option<f64>,
    max_samples: usize,
) -> PyResult<Py<PyAny>> {
    let p = locate(model, mode)?;
    let pr = preset(name, p.dh.lambda0)
        .ok_or_else(|| PyValueError::new_err(format!("unknown preset '{name}'; known: {}", PRESET_NAMES.join(", "))))?;
    run(py, pr.mu, pr.ic, model, mode, grid, t_end, dt, max_samples)
}

#[allow(clippy::too_many_arguments)]
fn run(
    py: Python<'_>,
    mu: ParamPoint,
    ic: InitialCondition,
    model: Option<&str>,
    mode: u32,
    m: usize,
    t_end: f64,
    dt: Option<f64>,
    max_samples: usize,
) -> PyResult<Py<PyAny>> {
    let p = locate(model, mode)?;
    let report = reduce(&p).ok();
    let grid = Grid::new(m, p.spec.ell).map_err(err)?;
    let cfg = SimConfig {
        dt,
        t_end,
        ic,
        delay: Some(2.0 * PI / p.dh.omega1),
        ..SimConfig::default()
    };
    let spec = p.spec.clone();
    let (trace, class) = py
        .detach(move || {
            let trace = run_sim(&spec, mu, grid, &cfg)?;
            let class = classify_attractor(&trace, &cfg)?;
            Ok::<_, nlhopf::Error>((trace, class))
        })
        .map_err(err)?;
    let prediction = report
        .and_then(|r| r.polar)
        .and_then(|polar| amp_predict(&PlanarSystem::new(polar, mu, p.dh.n1, p.dh.n2)).ok());
    let stride = trace.t.len().div_ceil(max_samples.max(1)).max(1);
    let thin = |xs: &[f64]| xs.iter().step_by(stride).copied().collect::<Vec<_>>();
    let v = json!({
        "mu": [mu.mu1, mu.mu2],
        "kind": class.kind.as_str(),
        "metrics": class.metrics,
        "prediction": prediction.as_ref().map(|p| p.attractor_str()),
        "t": thin(&trace.t),
        "u_pi": thin(&trace.u_probe),
        "v_pi": thin(&trace.v_probe),
        "final_u": trace.final_state.u,
        "final_v": trace.final_state.v,
    });
    to_py(py, &v)
}

#[pymodule]
fn nlhopf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(double_hopf, m)?)?;
    m.add_function(wrap_pyfunction!(normal_form, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_preset, m)?)?;
    Ok(())
}
