use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn run(out: &Path, args: &[&str]) -> i32 {
    let status = Command::new(env!("CARGO_BIN_EXE_prodsynth"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "off")
        .status()
        .unwrap();
    status.code().unwrap()
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("small.json");
    fs::write(
        &path,
        r#"{"categories": 2, "merchants": 8, "products_per_category": 40, "identity_probability": 0.3}"#,
    )
    .unwrap();
    path.to_str().unwrap().to_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn full_chain_writes_reports_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = small_config(dir.path());
    assert_eq!(run(&out, &["generate", "--synth-config", &cfg, "--seed", "5"]), 0);
    for cmd in ["extract", "learn", "synthesize", "eval"] {
        assert_eq!(run(&out, &[cmd]), 0, "{cmd}");
        assert!(out.join(format!("{cmd}.report.json")).exists(), "{cmd}");
    }
    let report = json(&out.join("report.json"));
    let methods = report["methods"].as_array().unwrap();
    assert_eq!(methods.len(), 6);
    assert!(methods.iter().all(|m| !m["points"].as_array().unwrap().is_empty()));
    assert!(report["products"].is_object());
    let csv = fs::read_to_string(out.join("curves/classifier.csv")).unwrap();
    assert!(csv.starts_with("theta,coverage,precision\n"));
    assert!(csv.lines().count() > 2);

    let synth = json(&out.join("synthesize.report.json"));
    let n = |k: &str| synth[k].as_u64().unwrap();
    assert_eq!(n("pairs_reconciled") + n("pairs_discarded"), n("pairs_in"));

    let learn = json(&out.join("learn.report.json"));
    let corrs = fs::read_to_string(out.join("correspondences.jsonl")).unwrap();
    assert_eq!(corrs.lines().count() as u64, learn["selected"].as_u64().unwrap());

    // Eval is a pure function of its inputs.
    let first = fs::read(out.join("curves/nb.csv")).unwrap();
    assert_eq!(run(&out, &["eval", "--methods", "nb"]), 0);
    assert_eq!(fs::read(out.join("curves/nb.csv")).unwrap(), first);
}

#[test]
fn extract_without_a_page_store_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("offers.jsonl"), "").unwrap();
    assert_eq!(run(dir.path(), &["extract"]), 2);
}

#[test]
fn learn_on_empty_matches_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let cfg = small_config(out);
    assert_eq!(run(out, &["generate", "--synth-config", &cfg]), 0);
    fs::write(out.join("matches.jsonl"), "").unwrap();
    assert_eq!(run(out, &["learn"]), 3);
}

#[test]
fn synthesize_with_no_offers_writes_an_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    fs::write(
        out.join("catalog.jsonl"),
        r#"{"kind":"schema","category":"C","attributes":["UPC"]}"#,
    )
    .unwrap();
    fs::write(out.join("offers.jsonl"), "").unwrap();
    fs::write(out.join("correspondences.jsonl"), "").unwrap();
    assert_eq!(run(out, &["synthesize"]), 0);
    assert_eq!(fs::read_to_string(out.join("products.jsonl")).unwrap(), "");
}

#[test]
fn synthesize_fuses_values_and_drops_keyless_offers() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    fs::write(
        out.join("catalog.jsonl"),
        r#"{"kind":"schema","category":"Laptops","attributes":["Model Part Number","Operating System"]}"#,
    )
    .unwrap();
    let offers = [
        r#"{"id":"o1","merchant":"A","category":"Laptops","title":"x","spec":[["MPN","X-1"],["OS","Windows Vista"]]}"#,
        r#"{"id":"o2","merchant":"A","category":"Laptops","title":"x","spec":[["MPN","x1"],["OS","Microsoft Windows Vista"]]}"#,
        r#"{"id":"o3","merchant":"A","category":"Laptops","title":"x","spec":[["MPN","X 1"],["OS","Microsoft Vista"]]}"#,
        r#"{"id":"o4","merchant":"A","category":"Laptops","title":"x","spec":[["OS","Linux"]]}"#,
        r#"{"id":"o5","merchant":"B","category":"Laptops","title":"x","spec":[["MPN","Y2"]]}"#,
    ];
    fs::write(out.join("offers.jsonl"), offers.join("\n")).unwrap();
    let corrs = [
        r#"{"catalog":"Model Part Number","offer":"MPN","merchant":"A","category":"Laptops","score":0.9}"#,
        r#"{"catalog":"Operating System","offer":"OS","merchant":"A","category":"Laptops","score":0.9}"#,
    ];
    fs::write(out.join("correspondences.jsonl"), corrs.join("\n")).unwrap();
    assert_eq!(run(out, &["synthesize"]), 0);

    let report = json(&out.join("synthesize.report.json"));
    // o4 has no key at all; o5's only pair has no correspondence.
    assert_eq!(report["keyless_offers_dropped"], 2);
    let products = fs::read_to_string(out.join("products.jsonl")).unwrap();
    assert_eq!(products.lines().count(), 1);
    let p: Value = serde_json::from_str(products.lines().next().unwrap()).unwrap();
    let spec = p["spec"].as_array().unwrap();
    assert!(spec.contains(&serde_json::json!(["Operating System", "Microsoft Windows Vista"])));
    assert_eq!(p["provenance"]["Operating System"].as_array().unwrap().len(), 3);
}

#[test]
fn unknown_methods_and_config_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let cfg = small_config(out);
    assert_eq!(run(out, &["generate", "--synth-config", &cfg]), 0);
    assert_eq!(run(out, &["eval", "--methods", "classifier,oracle"]), 2);

    let bad = out.join("run.json");
    fs::write(&bad, r#"{"theta": 0.4, "colour": "blue"}"#).unwrap();
    assert_eq!(run(out, &["learn", "--config", bad.to_str().unwrap()]), 2);
    fs::write(&bad, r#"{"theta": 0.4, "max_iters": 500}"#).unwrap();
    assert_eq!(run(out, &["learn", "--config", bad.to_str().unwrap()]), 0);
    assert_eq!(json(&out.join("learn.report.json"))["theta"], 0.4);

    assert_eq!(run(out, &["learn", "--theta", "1.5"]), 2);
}
