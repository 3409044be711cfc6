use fhartree_web::{condensate_distance, evolve_gaussian, ground_state};
use serde_json::Value;

fn parse(s: Result<String, wasm_bindgen::JsValue>) -> Value {
    serde_json::from_str(&s.expect("op succeeds")).unwrap()
}

fn last(v: &Value) -> f64 {
    v.as_array().unwrap().last().unwrap().as_f64().unwrap()
}

#[test]
fn evolve_conserves_mass() {
    let r = parse(evolve_gaussian(0.6, 0.5, 1, 1.0, 0.0, 64, 10.0, 1.0, 0.5, 0.01));
    assert!((last(&r["mass"]) - 1.0).abs() < 1e-10);
    assert_eq!(r["final"].as_array().unwrap().len(), 64);
    assert!(r["blowup_time"].is_null());
}

#[test]
fn ground_state_converges() {
    let r = parse(ground_state(0.6, 0.3, 128, 20.0));
    assert!(r["residual"].as_f64().unwrap() < 1e-8);
    assert!(r["mass"].as_f64().unwrap() > 0.0);
}

#[test]
fn condensate_distance_obeys_chain() {
    let r = parse(condensate_distance(2, 8, 4.0, 3));
    let (a, hs, tr) = (
        r["pickl"].as_f64().unwrap(),
        r["hs"].as_f64().unwrap(),
        r["trace"].as_f64().unwrap(),
    );
    assert!(hs <= (2.0 * a).sqrt() + 1e-10);
    assert!(tr >= hs - 1e-12);
}
