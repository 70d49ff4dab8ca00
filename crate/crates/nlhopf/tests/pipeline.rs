//! End-to-end runs of the analysis chain on built-in and user-supplied models.

use nlhopf::amplitude::{classify_unfolding, predict, region_map, regions, PlanarSystem};
use nlhopf::eigen::build_basis;
use nlhopf::linstab::{double_hopf, model_at, n_star};
use nlhopf::model::{holling_tanner, ModelSpec, ParamPoint};
use nlhopf::normalform::{normal_form, NormalFormReport};
use nlhopf::Error;
use std::f64::consts::PI;

fn reference() -> ModelSpec {
    holling_tanner(1.0, 0.35, 0.1, 0.6, 0.2, 8f64.sqrt()).unwrap()
}

fn run(spec: &ModelSpec) -> NormalFormReport {
    let dh = double_hopf(spec, 1).unwrap();
    let at = model_at(spec, &dh).unwrap();
    let basis = build_basis(&at, &dh).unwrap();
    normal_form(&at, &basis, &dh).unwrap()
}

fn close(a: &NormalFormReport, b: &NormalFormReport, tol: f64) {
    for (x, y) in a.third_order.values().iter().zip(b.third_order.values()) {
        assert!((x - y).norm() <= tol * y.norm().max(1e-3), "{x} vs {y}");
    }
}

#[test]
fn custom_copy_of_builtin_agrees() {
    let ht = reference();
    let copy = ModelSpec::custom(ht.linear.clone(), ht.d2.clone(), ht.d3.clone(), ht.ell, ht.equilibrium, "copy").unwrap();
    let dh = double_hopf(&copy, 1).unwrap();
    assert!((dh.omega1 - 0.43874821936960606).abs() < 1e-12);
    let basis = build_basis(&copy, &dh).unwrap();
    let rep = normal_form(&copy, &basis, &dh).unwrap();
    close(&rep, &run(&ht), 1e-13);
    assert_eq!(rep.polar.unwrap().kappa1, run(&ht).polar.unwrap().kappa1);
}

#[test]
fn custom_model_survives_json() {
    let ht = reference();
    let copy = ModelSpec::custom(ht.linear.clone(), ht.d2.clone(), ht.d3.clone(), ht.ell, ht.equilibrium, "copy").unwrap();
    let text = copy.to_json_value().to_string();
    let back = ModelSpec::from_json_str(&text).unwrap();
    let dh = double_hopf(&back, 1).unwrap();
    let basis = build_basis(&back, &dh).unwrap();
    close(&normal_form(&back, &basis, &dh).unwrap(), &run(&ht), 1e-13);
}

#[test]
fn builtin_from_json_with_ell_squared() {
    let spec = ModelSpec::from_json_str(r#"{"kind": "holling_tanner", "params": {"ell2": 8}}"#).unwrap();
    close(&run(&spec), &run(&reference()), 1e-13);
}

#[test]
fn malformed_model_names_the_key() {
    let err = ModelSpec::from_json_str(r#"{"kind": "holling_tanner", "params": {"beta": "x"}}"#).unwrap_err();
    assert!(err.to_string().contains("params.beta"), "{err}");
    let err = ModelSpec::from_json_str(r#"{"kind": "holling_tanner", "tensors": {"F_zz": [1, 2]}}"#).unwrap_err();
    assert!(err.to_string().contains("tensors.F_zz"), "{err}");
}

#[test]
fn short_domain_has_no_double_hopf() {
    let spec = holling_tanner(1.0, 0.005, 0.99, 0.6, 0.2, 1.0).unwrap();
    assert_eq!(n_star(&spec).unwrap(), 0);
    assert!(matches!(double_hopf(&spec, 1), Err(Error::HypothesisViolation(_))));
}

#[test]
fn off_point_base_is_reexpanded() {
    // a builtin expanded elsewhere still finds the same double Hopf point
    let spec = holling_tanner(0.8, 0.3, 0.1, 0.6, 0.2, 8f64.sqrt()).unwrap();
    let rep = run(&spec);
    assert!((rep.double_hopf.lambda0 - 1.0).abs() < 1e-12);
    close(&rep, &run(&reference()), 1e-12);
}

#[test]
fn sectors_cover_the_plane() {
    let rep = run(&reference());
    let p = rep.polar.unwrap();
    let sectors = regions(&p, 0, 1).unwrap();
    let total: f64 = sectors.iter().map(|s| s.end - s.start).sum();
    assert!((total - 2.0 * PI).abs() < 1e-12);
    let samples = region_map(&p, 0, 1, (-0.1, 0.1), (-0.05, 0.05), 21, 11).unwrap();
    assert_eq!(samples.len(), 21 * 11);
    classify_unfolding(&p).unwrap();
}

#[test]
fn presets_have_predictions() {
    let rep = run(&reference());
    let p = rep.polar.unwrap();
    let d1 = predict(&PlanarSystem::new(p, ParamPoint::new(-0.2, 0.00925), 0, 1)).unwrap();
    assert_eq!(d1.attractor_str(), "constant");
    let d2 = predict(&PlanarSystem::new(p, ParamPoint::new(-0.2, -0.02), 0, 1)).unwrap();
    assert_eq!(d2.attractor_str(), "homogeneous-periodic");
}

#[test]
fn report_json_carries_h_residuals() {
    let rep = run(&reference());
    let v: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
    let h = v["intermediates"]["h"].as_array().unwrap();
    assert!(!h.is_empty());
    assert!(h.iter().all(|e| e["residual"].as_f64().unwrap() < 1e-10));
    assert_eq!(v["case"], "II");
}
