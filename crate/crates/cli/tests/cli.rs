use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qgeo::report::{Report, SCHEMA_VERSION};
use qgeo_cli::SceneFile;
use serde_json::Value;

fn qgeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgeo")).args(args).env_remove("QGEO_JET_ORDER_MAX").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(o: &Output) -> Report {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn value(r: &Report, scene: &str, name: &str) -> f64 {
    r.quantities.iter().find(|q| q.scene == scene && q.name == name).unwrap().value
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join(name)
}

#[test]
fn list_shows_registry_catalog_and_suites() {
    let o = qgeo(&["list"]);
    assert_eq!(code(&o), 0);
    let s = String::from_utf8(o.stdout).unwrap();
    for needle in ["K1", "W_Q", "Pfbar", "clifford-torus", "s2xs2-in-s5", "gauss-bonnet", "renorm-area"] {
        assert!(s.contains(needle), "{needle}");
    }
}

#[test]
fn eval_catalog_values() {
    let o = qgeo(&["eval", "--catalog", "clifford-torus", "--json", "-"]);
    assert_eq!(code(&o), 0);
    let r = report(&o);
    assert_eq!(r.schema, SCHEMA_VERSION);
    assert!((value(&r, "clifford-torus", "Q") - 1.0).abs() < 1e-12);

    let r = report(&qgeo(&["eval", "--catalog", "equatorial-s4-in-s5", "--json", "-"]));
    assert!((value(&r, "equatorial-s4-in-s5", "Q") - 6.0).abs() < 1e-12);
    assert!(value(&r, "equatorial-s4-in-s5", "W_Q").abs() < 1e-12);
    let q = r.quantities.iter().find(|q| q.name == "Q").unwrap();
    assert_eq!(q.weight, Some(-4));

    let r = report(&qgeo(&["eval", "--catalog", "flat-plane", "--json", "-"]));
    assert!(!r.quantities.is_empty());
    assert!(r.quantities.iter().all(|q| q.value == 0.0));
}

#[test]
fn scene_file_expectations_and_exit_codes() {
    let file = data("data/appendix_n5.json");
    let o = qgeo(&["eval", "--scene", file.to_str().unwrap(), "--json", "-"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&o);
    assert_eq!(r.summary.total, 2);
    assert_eq!(r.quantities.len(), 10);

    // a wrong expectation fails with status 1
    let dir = tempfile::tempdir().unwrap();
    let mut f: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    f["expect"]["K1"] = Value::from(0.5);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&f).unwrap()).unwrap();
    assert_eq!(code(&qgeo(&["eval", "--scene", bad.to_str().unwrap()])), 1);

    // malformed input is a configuration error with a position
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\n  \"catalog\": \"clifford-torus\",\n  \"points\": [1, \n}").unwrap();
    let o = qgeo(&["eval", "--scene", broken.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3 column 14"), "{}", stderr(&o));

    // inconsistent dimensions
    f["submanifold"]["map"]["k"] = Value::from(5);
    std::fs::write(&bad, serde_json::to_string(&f).unwrap()).unwrap();
    assert_eq!(code(&qgeo(&["eval", "--scene", bad.to_str().unwrap()])), 2);

    assert_eq!(code(&qgeo(&["eval", "--scene", "/nonexistent/scene.json"])), 2);
    assert_eq!(code(&qgeo(&["eval", "--catalog", "no-such-scene"])), 2);
    assert_eq!(code(&qgeo(&["eval"])), 2);
}

#[test]
fn scene_files_round_trip() {
    let text = std::fs::read_to_string(data("data/appendix_n5.json")).unwrap();
    let a = SceneFile::parse(&text).unwrap();
    let b = SceneFile::parse(&serde_json::to_string(&a).unwrap()).unwrap();
    assert_eq!(a, b);
    let c = SceneFile::catalog("s2xs2-in-s5", 3);
    assert_eq!(SceneFile::parse(&serde_json::to_string(&c).unwrap()).unwrap(), c);
    assert!(SceneFile::parse(r#"{"catalog": "clifford-torus", "bogus": 1}"#).is_err());
    assert!(SceneFile::parse(r#"{"catalog": "clifford-torus", "quantities": ["nope"]}"#).is_err());
}

#[test]
fn verify_reports_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let o = qgeo(&[
        "verify",
        "ambient",
        "--seed",
        "3",
        "--upsilon-degree",
        "3",
        "--json",
        "-",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&o);
    assert_eq!(r.command, "verify ambient");
    assert_eq!(r.seed, 3);
    assert!(r.summary.total >= 10 && r.summary.failed == 0);
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("suite,name,topic,residual,tolerance,bound,pass\n"));
    assert_eq!(table.lines().count(), r.summary.total + 1);

    // an impossible tolerance turns every check into a failure
    assert_eq!(code(&qgeo(&["verify", "--suite", "ambient", "--tol", "1e-300"])), 1);
    assert_eq!(code(&qgeo(&["verify", "--suite", "ambient", "--tol", "-1"])), 2);
    assert_eq!(code(&qgeo(&["verify", "no-such-suite"])), 2);
}

#[test]
fn jet_budget_is_configuration() {
    let o = Command::new(env!("CARGO_BIN_EXE_qgeo"))
        .args(["eval", "--catalog", "clifford-torus"])
        .env("QGEO_JET_ORDER_MAX", "99")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_qgeo"))
        .args(["eval", "--catalog", "clifford-torus"])
        .env("QGEO_JET_ORDER_MAX", "3")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn renorm_command() {
    let o = qgeo(&["renorm", "--k", "2", "--json", "-"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&o);
    let scene = &r.quantities[0].scene;
    assert!((value(&r, scene, "renormalized area") + 2.0 * std::f64::consts::PI).abs() < 1e-6);
    assert!((value(&r, scene, "coefficient of eps^-1") - 2.0 * std::f64::consts::PI).abs() < 1e-8);

    let o = qgeo(&["renorm", "--k", "2", "--eps-min", "0.01", "--eps-max", "0.010000000000001", "--samples", "3"]);
    assert!(stderr(&o).contains("condition number"), "{}", stderr(&o));
    assert_eq!(code(&qgeo(&["renorm", "--k", "2", "--eps-min", "0.2", "--eps-max", "0.1"])), 2);
    assert_eq!(code(&qgeo(&["renorm", "--k", "3"])), 2);
}

fn close_json(a: &Value, b: &Value, path: &str) {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs())), "{path}: {x} vs {y}");
        }
        (Value::Array(x), Value::Array(y)) => {
            assert_eq!(x.len(), y.len(), "{path}");
            for (i, (u, v)) in x.iter().zip(y).enumerate() {
                close_json(u, v, &format!("{path}[{i}]"));
            }
        }
        (Value::Object(x), Value::Object(y)) => {
            assert_eq!(x.keys().collect::<Vec<_>>(), y.keys().collect::<Vec<_>>(), "{path}");
            for (k, u) in x {
                close_json(u, &y[k], &format!("{path}.{k}"));
            }
        }
        _ => assert_eq!(a, b, "{path}"),
    }
}

#[test]
fn catalog_golden_file() {
    let golden = data("golden/catalog_seed3.json");
    let o = qgeo(&["eval", "--catalog", "all", "--seed", "3", "--json", "-"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let again = qgeo(&["eval", "--catalog", "all", "--seed", "3", "--json", "-"]);
    assert_eq!(o.stdout, again.stdout, "report is not deterministic");
    if std::env::var_os("QGEO_UPDATE_GOLDEN").is_some() {
        std::fs::write(&golden, &o.stdout).unwrap();
    }
    let want: Value = serde_json::from_str(&std::fs::read_to_string(&golden).unwrap()).unwrap();
    let got: Value = serde_json::from_slice(&o.stdout).unwrap();
    close_json(&got, &want, "$");
}

#[test]
fn verify_all_passes() {
    let o = qgeo(&["verify", "all", "--seed", "7", "--json", "-"]);
    let r = report(&o);
    let failed: Vec<_> = r.checks.iter().filter(|c| !c.pass).map(|c| &c.name).collect();
    assert_eq!(code(&o), 0, "{failed:?}");
    for suite in ["ambient", "submanifold", "invariants", "conformal", "gauss-bonnet", "renorm-area"] {
        assert!(r.checks.iter().any(|c| c.suite == suite), "{suite}");
    }
}
