mod common;

use common::*;
use quadbt_core::io;
use quadbt_core::loewner::{quadruple_from_data, reduce};
use quadbt_core::models::{generate, ModelSpec};
use quadbt_core::quadrature::{interleaved_rules, sample_dataset};
use quadbt_core::spectral::{make_oracles, Variant};
use quadbt_core::{Error, Mat};

#[test]
fn model_round_trip_is_bit_exact() {
    let g = generate(&ModelSpec::random_stable(5, 2, 3, 7)).unwrap();
    let back = io::model_from_json(&io::model_to_json(&g).unwrap()).unwrap();
    assert_eq!(back, g);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.json");
    io::write_model(&p, &g).unwrap();
    assert_eq!(io::read_model(&p).unwrap(), g);
}

#[test]
fn model_json_is_row_major() {
    let g = quadbt_core::StateSpace::new(
        Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]),
        Mat::from_row_slice(2, 1, &[5.0, 6.0]),
        Mat::from_row_slice(1, 2, &[7.0, 8.0]),
        Mat::from_row_slice(1, 1, &[9.0]),
    )
    .unwrap();
    let v: serde_json::Value = serde_json::from_str(&io::model_to_json(&g).unwrap()).unwrap();
    let a: Vec<f64> = v["A"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(a, vec![1.0, 2.0, 3.0, 4.0]);
    assert_eq!(v["n"], 2);
}

#[test]
fn model_json_errors() {
    let bad = r#"{"n": 2, "m": 1, "p": 1, "A": [1, 2, 3], "B": [1, 1], "C": [1, 1], "D": [0]}"#;
    assert!(matches!(io::model_from_json(bad), Err(Error::DimensionMismatch(_))));
    assert!(matches!(io::model_from_json("{"), Err(Error::InvalidInput(_))));
    let missing = std::path::Path::new("/nonexistent/model.json");
    assert!(matches!(io::read_model(missing), Err(Error::Io(_))));
}

#[test]
fn fmt17_round_trips() {
    for x in [0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0, 123456.789] {
        assert_eq!(io::fmt17(x).parse::<f64>().unwrap(), x);
    }
    assert_eq!(io::fmt17(f64::NAN), "NaN");
}

#[test]
fn dataset_round_trip() {
    let g = generate(&ModelSpec::random_passive(6, 2, 1)).unwrap();
    let o = make_oracles(&g, Variant::Prbt).unwrap();
    let (l, r) = interleaved_rules(0.1, 100.0, 8).unwrap();
    let mut d = sample_dataset(&o, &l, &r).unwrap();
    d.feedthrough = Some(g.d.clone());
    let s = io::dataset_to_json(&d).unwrap();
    let back = io::dataset_from_json(&s).unwrap();
    assert_eq!(back.left, d.left);
    assert_eq!(back.right, d.right);
    assert_eq!(back.gsa_left, d.gsa_left);
    assert_eq!(back.gb_right, d.gb_right);
    assert_eq!(back.gc_left, d.gc_left);
    assert_eq!(back.gsa_right, d.gsa_right);
    assert_eq!(back.feedthrough, d.feedthrough);
    assert_eq!(back.variant, Variant::Prbt);
    assert_eq!(io::dataset_to_json(&back).unwrap(), s);
}

#[test]
fn dataset_load_validates() {
    let o = make_oracles(&s1(), Variant::Lyapunov).unwrap();
    let (l, r) = interleaved_rules(0.1, 100.0, 4).unwrap();
    let d = sample_dataset(&o, &l, &r).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&io::dataset_to_json(&d).unwrap()).unwrap();
    v["right"]["nodes"] = v["left"]["nodes"].clone();
    assert!(matches!(io::dataset_from_json(&v.to_string()), Err(Error::NodeCollision(_))));
    let mut v: serde_json::Value = serde_json::from_str(&io::dataset_to_json(&d).unwrap()).unwrap();
    v["shape"]["p_y"] = 2.into();
    assert!(matches!(io::dataset_from_json(&v.to_string()), Err(Error::DimensionMismatch(_))));
}

#[test]
fn sidecar_lists_all_singular_values() {
    let g = generate(&ModelSpec::ladder(10)).unwrap();
    let o = make_oracles(&g, Variant::Bst).unwrap();
    let (l, r) = interleaved_rules(0.1, 1e4, 20).unwrap();
    let rom = reduce(&quadruple_from_data(&sample_dataset(&o, &l, &r).unwrap()).unwrap(), 3, Some(&g.d)).unwrap();
    let v: serde_json::Value = serde_json::from_str(&io::sidecar_to_json(&rom).unwrap()).unwrap();
    assert_eq!(v["variant"], "bst");
    assert_eq!(v["order"], 3);
    assert_eq!(v["provenance"]["kind"], "quadrature");
    assert_eq!(v["provenance"]["n_left"], 20);
    assert_eq!(v["singular_values"].as_array().unwrap().len(), rom.singular_values.len());
}
