//! Python bindings for the certificate engine: parse and print identities,
//! synthesize certificates, compile proof sketches, run the exact numeric
//! oracle, and emit Lean sketches with manifests.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use wz_core::leanemit::{emit_direct, emit_lean, write_manifest, LeanConfig};
use wz_core::orchestrator::{numeric_verify, VerifyOptions};
use wz_core::parser::{parse_identity, print_identity};
use wz_core::sketch::{build_sketch, ProofSketch};
use wz_core::telescope::Relation;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn sketch_of(text: &str, max_order: u32) -> PyResult<ProofSketch> {
    let id = parse_identity(text).map_err(err)?;
    build_sketch(&id, max_order).map_err(err)
}

/// Parse an identity and return its canonical text form.
#[pyfunction]
fn canonical(text: &str) -> PyResult<String> {
    let id = parse_identity(text).map_err(err)?;
    Ok(print_identity(&id))
}

/// Synthesize the certificate. Returns a dict with `covered`, and when
/// covered: `certificate`, `order`, `coefficients`.
#[pyfunction]
#[pyo3(signature = (text, max_order = 4))]
fn certify<'py>(py: Python<'py>, text: &str, max_order: u32) -> PyResult<Bound<'py, PyDict>> {
    let sk = sketch_of(text, max_order)?;
    let out = PyDict::new(py);
    out.set_item("covered", !sk.uncovered)?;
    if let Some(rel) = &sk.relation {
        out.set_item("certificate", rel.certificate().render())?;
        out.set_item("order", rel.order())?;
        let coeffs: Vec<String> = match rel {
            Relation::Wz(_) => vec!["-1".to_string(), "1".to_string()],
            Relation::Creative(r) => r.coeffs.iter().map(|c| c.render()).collect(),
        };
        out.set_item("coefficients", coeffs)?;
    }
    Ok(out)
}

/// Compile the proof sketch. Returns a dict with the obligation pool.
#[pyfunction]
#[pyo3(signature = (text, max_order = 4))]
fn sketch<'py>(py: Python<'py>, text: &str, max_order: u32) -> PyResult<Bound<'py, PyDict>> {
    let sk = sketch_of(text, max_order)?;
    let out = PyDict::new(py);
    out.set_item("covered", !sk.uncovered)?;
    out.set_item("identity", print_identity(&sk.original))?;
    if let Some(rel) = &sk.relation {
        out.set_item("certificate", rel.certificate().render())?;
        out.set_item("order", rel.order())?;
    }
    if let Some(b) = &sk.base_case {
        let base = PyDict::new(py);
        base.set_item("n0", b.n0)?;
        base.set_item("value", b.value_text.clone())?;
        out.set_item("base_case", base)?;
    }
    let obs = PyList::empty(py);
    for ob in &sk.obligations {
        let d = PyDict::new(py);
        d.set_item("id", ob.id.clone())?;
        d.set_item("kind", ob.kind.as_str())?;
        d.set_item("goal", ob.goal_internal.clone())?;
        d.set_item("goal_lean", ob.goal_lean.clone())?;
        d.set_item("status", ob.status.as_str())?;
        d.set_item("provenance", ob.provenance.clone())?;
        obs.append(d)?;
    }
    out.set_item("obligations", obs)?;
    out.set_item("warnings", sk.warnings.clone())?;
    Ok(out)
}

/// Exact numeric verification up to `n_max` (parameters sampled over
/// `param_min..=param_max`).
#[pyfunction]
#[pyo3(signature = (text, n_max = 20, param_min = 1, param_max = 5))]
fn verify<'py>(
    py: Python<'py>,
    text: &str,
    n_max: i64,
    param_min: i64,
    param_max: i64,
) -> PyResult<Bound<'py, PyDict>> {
    let id = parse_identity(text).map_err(err)?;
    let opts = VerifyOptions {
        n_max,
        param_min,
        param_max,
        ..Default::default()
    };
    let rep = numeric_verify(&id, &opts);
    let out = PyDict::new(py);
    out.set_item("pass", rep.pass)?;
    out.set_item("checked", rep.checked)?;
    out.set_item("equal", rep.equal)?;
    out.set_item("unequal", rep.unequal)?;
    out.set_item("skipped", rep.skipped)?;
    Ok(out)
}

/// Emit the Lean sketch text and the manifest JSON for an identity.
#[pyfunction]
#[pyo3(signature = (text, name = "identity", max_order = 4))]
fn emit<'py>(
    py: Python<'py>,
    text: &str,
    name: &str,
    max_order: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let sk = sketch_of(text, max_order)?;
    let config = LeanConfig::default();
    let lean = if sk.uncovered {
        emit_direct(&sk.identity, name, &config)
    } else {
        emit_lean(&sk, name, &config, &BTreeMap::new()).map_err(err)?
    };
    let manifest = write_manifest(&sk);
    let out = PyDict::new(py);
    out.set_item("lean", lean.text)?;
    out.set_item("manifest", manifest.to_json())?;
    out.set_item("open_placeholders", lean.placeholder_map.len())?;
    Ok(out)
}

#[pymodule]
fn wz_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", wz_core::VERSION)?;
    m.add_function(wrap_pyfunction!(canonical, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(sketch, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(emit, m)?)?;
    Ok(())
}
