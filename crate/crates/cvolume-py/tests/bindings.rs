use cvolume_py::{fixture, lens_oracle, lens_volume, volume};
use pyo3::prelude::*;
use pyo3::types::PyModule;
use std::f64::consts::PI;

#[test]
fn lens_volume_matches_the_oracle() {
    let v = lens_volume(5, 1, 1).unwrap();
    assert!((v.im - 1.2 * PI * PI).abs() < 1e-9);
    assert_eq!(v, lens_oracle(5, 1, 1).unwrap());
}

#[test]
fn documents_round_trip_through_the_bindings() {
    let pres = fixture("figure-eight").unwrap();
    let report: serde_json::Value = serde_json::from_str(&volume(&pres, 1e-9).unwrap()).unwrap();
    assert!((report["volume"][0].as_f64().unwrap() - 2.029883212819).abs() < 1e-9);
}

#[test]
fn the_module_imports_in_an_embedded_interpreter() {
    Python::attach(|py| {
        let m = PyModule::new(py, "cvolume_py").unwrap();
        cvolume_py::cvolume_py(&m).unwrap();
        let z: num_complex::Complex64 = m.getattr("li2").unwrap().call1((0.5,)).unwrap().extract().unwrap();
        assert!((z.re - (PI * PI / 12.0 - 2f64.ln().powi(2) / 2.0)).abs() < 1e-12);
        let bad = m.getattr("lens_oracle").unwrap().call1((4, 2, 1));
        assert!(bad.unwrap_err().to_string().contains("NotCoprime"));
    });
}
