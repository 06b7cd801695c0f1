use std::io::Write;
use std::path::PathBuf;
use std::process::Command;

use serde_json::{json, Value};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_splice")).args(args).output().expect("binary runs");
    let text = String::from_utf8(out.stdout).expect("utf-8 output");
    let value = serde_json::from_str(&text).unwrap_or(Value::Null);
    (out.status.code().expect("exit code"), value, text)
}

fn temp_json(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

#[test]
fn check_running_example() {
    let (code, v, _) = run(&["check", data("d1.json").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["command"], "check");
    assert_eq!(v["status"], "ok");
    assert_eq!(v["payload"], json!({"edge_determinant": true, "semigroup": true, "coprime": true}));
}

#[test]
fn malformed_json_is_a_parse_error() {
    let f = temp_json("{\"leaves\": [");
    let (code, v, _) = run(&["check", f.path().to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(v["status"], "error");
}

#[test]
fn unknown_keys_are_a_parse_error() {
    let f = temp_json(r#"{"leaves": [], "nodes": [], "edges": [], "extra": 1}"#);
    let (code, _, _) = run(&["check", f.path().to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn failing_edge_determinant_exits_one() {
    let f = temp_json(
        r#"{"leaves": ["a","b","c","d"], "nodes": ["u","v"], "edges": [
            {"a":"u","b":"a","wa":2}, {"a":"u","b":"b","wa":3}, {"a":"u","b":"v","wa":1,"wb":1},
            {"a":"v","b":"c","wa":2}, {"a":"v","b":"d","wa":3}]}"#,
    );
    let (code, v, _) = run(&["check", f.path().to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(v["status"], "violation");
    assert_eq!(v["payload"]["edge_determinant"], false);
}

#[test]
fn member_outside_carries_certificate() {
    let (code, v, _) = run(&["member", data("d1.json").to_str().unwrap(), "--w", "1,1,1,1,1"]);
    assert_eq!(code, 0);
    let p = &v["payload"];
    assert_eq!(p["member"], false);
    assert_eq!(p["certificate"]["node"], "v");
    assert_eq!(p["certificate"]["monomial"], json!([0, 0, 0, 0, 2]));
}

#[test]
fn member_on_a_node_ray_carries_cell() {
    let (code, v, _) = run(&["member", data("d1_system.json").to_str().unwrap(), "--w", "147,98,60,84,210"]);
    assert_eq!(code, 0);
    assert_eq!(v["payload"]["member"], true);
    assert_eq!(v["payload"]["cell"]["kind"], "ray");
    assert_eq!(v["payload"]["cell"]["ray"], "u");
}

#[test]
fn member_queries_keep_input_order() {
    let mut queries = Vec::new();
    for k in 1..=40 {
        queries.push(json!([k, 1, 1, 1, 1]));
        queries.push(json!(["147", "98", "60", "84", "210"]));
    }
    let f = temp_json(&Value::Array(queries.clone()).to_string());
    let (code, v, _) = run(&["member", data("d1.json").to_str().unwrap(), "--queries", f.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    let results = v["payload"]["results"].as_array().unwrap();
    assert_eq!(results.len(), queries.len());
    for (r, q) in results.iter().zip(&queries) {
        let w: Vec<String> = q.as_array().unwrap().iter().map(|x| x.to_string().trim_matches('"').to_string()).collect();
        let got: Vec<String> = r["w"].as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect();
        assert_eq!(got, w);
    }
    assert!(results.iter().skip(1).step_by(2).all(|r| r["member"] == true));
}

#[test]
fn non_positive_weight_is_refused() {
    let (code, v, _) = run(&["member", data("d1.json").to_str().unwrap(), "--w", "1,0,1,1,1"]);
    assert_eq!(code, 1);
    assert_eq!(v["status"], "violation");
}

#[test]
fn end_curve_of_running_example() {
    let (code, v, _) = run(&["endcurve", data("d1_system.json").to_str().unwrap(), "--root", "l1"]);
    assert_eq!(code, 0);
    let p = &v["payload"];
    assert_eq!(p["exponents"], json!([49, 30, 42, 105]));
    assert_eq!(p["g"], 1);
    assert_eq!(p["components"][0]["exact"], json!(["-1", "3", "-2", "1"]));
}

#[test]
fn end_curve_needs_a_leaf() {
    let (code, _, _) = run(&["endcurve", data("d1.json").to_str().unwrap(), "--root", "u"]);
    assert_eq!(code, 1);
}

#[test]
fn recover_reproduces_running_example() {
    let (code, v, _) = run(&["recover", data("d1_fan.json").to_str().unwrap()]);
    assert_eq!(code, 0);
    let want: Value = serde_json::from_str(&std::fs::read_to_string(data("d1.json")).unwrap()).unwrap();
    assert_eq!(v["payload"], want);
}

#[test]
fn recover_refuses_multiplicity_two() {
    let mut fan: Value = serde_json::from_str(&std::fs::read_to_string(data("d1_fan.json")).unwrap()).unwrap();
    fan["cones"][0]["multiplicity"] = json!(2);
    let f = temp_json(&fan.to_string());
    let (code, v, _) = run(&["recover", f.path().to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(v["payload"]["error"].as_str().unwrap().contains("multiplicity"));
}

#[test]
fn roundtrip_and_fan() {
    let (code, v, _) = run(&["roundtrip", data("d1.json").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["payload"]["isomorphic"], true);
    let (code, v, _) = run(&["fan", data("d1.json").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["payload"]["rays"].as_array().unwrap().len(), 7);
    assert_eq!(v["payload"]["cones"].as_array().unwrap().len(), 6);
}

#[test]
fn random_is_deterministic_and_admissible() {
    let args = ["random", "--leaves", "6", "--nodes", "2", "--seed", "11", "--coprime"];
    let (code, v, first) = run(&args);
    assert_eq!(code, 0);
    let (_, _, second) = run(&args);
    assert_eq!(first, second);
    let f = temp_json(&v["payload"].to_string());
    let (code, _, _) = run(&["check", f.path().to_str().unwrap()]);
    assert_eq!(code, 0);
}

#[test]
fn random_with_impossible_shape_is_infeasible() {
    let (code, v, _) = run(&["random", "--leaves", "3", "--nodes", "3", "--seed", "0"]);
    assert_eq!(code, 3, "{v}");
}

#[test]
fn seeded_system_is_deterministic() {
    let d = data("d1.json");
    let (code, _, a) = run(&["system", d.to_str().unwrap(), "--seed", "5"]);
    assert_eq!(code, 0);
    let (_, _, b) = run(&["system", d.to_str().unwrap(), "--seed", "5"]);
    assert_eq!(a, b);
    let (_, v, _) = run(&["system", d.to_str().unwrap()]);
    assert_eq!(v["payload"]["equations"].as_array().unwrap().len(), 3);
}

#[test]
fn initial_forms_and_smoke() {
    let (code, v, _) = run(&[
        "initial",
        data("d1_system.json").to_str().unwrap(),
        "--w",
        "147,98,60,84,210",
        "--samples",
        "2",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["payload"]["monomial_free"], true);
    assert_eq!(v["payload"]["generators"].as_array().unwrap().len(), 3);
    assert_eq!(v["payload"]["smoke"]["points"], 16);
}

#[test]
fn usage_errors_exit_two() {
    let (code, _, _) = run(&["member", data("d1.json").to_str().unwrap()]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 2);
}
