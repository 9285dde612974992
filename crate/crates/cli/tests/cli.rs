use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use adscurv::conemetric::{triangulate_quotient, ScaledHyperbolic};
use adscurv::fuchsian::genus2_octagon_group;
use serde_json::Value;

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adscurv"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env("ADSCURV_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn statuses(v: &Value) -> Vec<(String, String)> {
    v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["check"].as_str().unwrap().to_owned(), r["status"].as_str().unwrap().to_owned()))
        .collect()
}

const SMALL_MESH: &[&str] = &["--region", "disc:1.0", "--h", "0.1", "--stencil", "10", "--pairs", "30"];

#[test]
fn surface_zero_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args: Vec<&str> = ["surface", "--fn", "zero"].iter().chain(SMALL_MESH).copied().collect();
    let first = run(&a, &args);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(run(&b, &args).status.code(), Some(0));
    let bytes = fs::read(a.join("report.json")).unwrap();
    assert_eq!(bytes, fs::read(b.join("report.json")).unwrap());

    let v = report(&a);
    assert_eq!(v["schema"], "adscurv.report/1");
    assert_eq!(v["seed"], 1);
    assert_eq!(v["input_digest"].as_str().unwrap().len(), 64);
    let names: Vec<String> = statuses(&v).into_iter().map(|(c, s)| format!("{c}:{s}")).collect();
    assert_eq!(names, ["upper-bound:PASS", "lower-bound:PASS", "spacelike:PASS", "conformal-scaling:PASS"]);
    assert!(v["reports"][0]["anchor"].as_str().unwrap().contains("at most"));
    let pairs = fs::read_to_string(a.join("pairs.csv")).unwrap();
    assert_eq!(pairs.lines().count(), 31);
    assert!(fs::read_to_string(a.join("distances.csv")).unwrap().starts_with("vertex,"));
}

#[test]
fn seed_is_recorded_outside_the_digest() {
    let dir = tempfile::tempdir().unwrap();
    let args: Vec<&str> = ["surface", "--fn", "const:0.5"].iter().chain(SMALL_MESH).copied().collect();
    let mut with_seed = vec!["--seed", "9"];
    with_seed.extend(&args);
    assert_eq!(run(&dir.path().join("a"), &args).status.code(), Some(0));
    assert_eq!(run(&dir.path().join("b"), &with_seed).status.code(), Some(0));
    let (a, b) = (report(&dir.path().join("a")), report(&dir.path().join("b")));
    assert_eq!(b["seed"], 9);
    assert_eq!(a["input_digest"], b["input_digest"]);
    assert_ne!(fs::read(dir.path().join("a/pairs.csv")).unwrap(), fs::read(dir.path().join("b/pairs.csv")).unwrap());
    let factor = a["reports"][3]["measured"]["factor"].as_f64().unwrap();
    assert!((factor - 0.5f64.cos()).abs() < 1e-15);
}

#[test]
fn surface_envelope_and_cones_pass() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["envelope:seed=7", "cone:-1", "smoothed-cone:-1,0.1"] {
        let args: Vec<&str> = ["surface", "--fn", f].iter().chain(SMALL_MESH).copied().collect();
        let out = dir.path().join(f.replace([':', ','], "_"));
        let o = run(&out, &args);
        assert_eq!(o.status.code(), Some(0), "{f}: {}", String::from_utf8_lossy(&o.stdout));
        let v = report(&out);
        assert!(v["reports"][2]["measured"]["K"].as_f64().unwrap() > 0.0);
        assert_eq!(v["reports"].as_array().unwrap().len(), 3);
    }
}

#[test]
fn bad_specs_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["surface", "--fn", "wobble"],
        vec!["surface", "--fn", "const:2.0"],
        vec!["surface", "--fn", "zero", "--region", "disc:-1"],
        vec!["approx", "--src", "const:x"],
        vec!["approx", "--eps", "0"],
        vec!["frobnicate"],
    ] {
        let out = dir.path().join("x");
        let o = run(&out, &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!out.join("report.json").exists(), "{args:?}");
    }
}

#[test]
fn approx_isometric_source() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["approx", "--src", "u0", "--eps", "0.5,0.25"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let v = report(dir.path());
    assert!(statuses(&v).iter().all(|(_, s)| s == "PASS"));
    for r in v["reports"].as_array().unwrap() {
        if r["check"].as_str().unwrap().starts_with("distance-window") {
            assert!(r["measured"]["min_error"].as_f64().unwrap() > -1e-9);
        }
    }
    let table = fs::read_to_string(dir.path().join("error_vs_eps.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("eps,steiner,"));
    assert!(rows[1].starts_with("0.5,1,") && rows[2].starts_with("0.25,2,"));
}

#[test]
fn approx_constant_source_errors_shrink() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["approx", "--src", "const:0.5236", "--eps", "0.4,0.2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = report(dir.path());
    let last = v["reports"].as_array().unwrap().last().unwrap();
    assert_eq!(last["check"], "error-decrease");
    assert_eq!(last["status"], "PASS");
}

#[test]
fn approx_triangulation_input() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let out = dir.path().join("out");
    let o = run(&out, &["approx", "--src", "u0", "--eps", "0.5", "--triangulation", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    let src = ScaledHyperbolic::hyperbolic(genus2_octagon_group()).unwrap();
    let qt = triangulate_quotient(&src, 0.5).unwrap();
    let file = dir.path().join("t.json");
    fs::write(&file, qt.triangulation().to_json().unwrap()).unwrap();
    let o = run(&out, &["approx", "--src", "u0", "--eps", "0.5", "--triangulation", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let checks: Vec<String> = statuses(&report(&out)).into_iter().map(|x| x.0).collect();
    assert!(checks.contains(&"identity@file".to_owned()) && checks.contains(&"excess@file".to_owned()));

    fs::write(&file, "{\"not\": \"a triangulation\"}").unwrap();
    let o = run(&out.join("again"), &["approx", "--src", "u0", "--triangulation", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_filters_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify", "--only", "chord-bound"]);
    assert_eq!(o.status.code(), Some(0));
    let v = report(dir.path());
    assert_eq!(statuses(&v), [("chord-bound".to_owned(), "PASS".to_owned())]);
    assert_eq!(v["reports"][0]["measured"]["samples"], 100_000);

    let o = run(dir.path(), &["verify", "--only", "causal,systole,smoothing,length-convergence"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(statuses(&report(dir.path())).len(), 4);

    assert_eq!(run(&dir.path().join("u"), &["verify", "--only", "nonsense"]).status.code(), Some(2));

    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, "{\"seed\": 3, \"chart_lines\": ").unwrap();
    let o = run(&dir.path().join("c"), &["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema error"));
    fs::write(&cfg, "{\"seed\": 3, \"colour\": 1}").unwrap();
    assert_eq!(run(&dir.path().join("c"), &["verify", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));

    fs::write(&cfg, "{\"seed\": 3, \"chord_samples\": 500}").unwrap();
    let out = dir.path().join("d");
    let o = run(&out, &["verify", "--only", "chord-bound", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = report(&out);
    assert_eq!(v["seed"], 3);
    assert_eq!(v["reports"][0]["measured"]["samples"], 500);
}

#[test]
fn failing_check_exits_one_and_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    // caps wider than the cone's chart disc cannot be built
    fs::write(&cfg, "{\"rhos\": [5.0]}").unwrap();
    let o = run(dir.path(), &["verify", "--only", "smoothing,systole", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAILED: smoothing"));
    // reports follow the suite order, not the order given to --only
    let v = report(dir.path());
    assert_eq!(statuses(&v), [("systole".into(), "PASS".into()), ("smoothing".into(), "FAIL".into())]);
}
