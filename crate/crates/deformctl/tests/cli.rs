use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn deformctl(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deformctl"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn record<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["records"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["name"] == name)
        .unwrap_or_else(|| panic!("no record {name}"))
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

/// A Z₃ group file, a cocycle file that references it, and a bundle file.
fn z3_fixture(dir: &Path) {
    write(dir, "z3.toml", "cayley = [[0, 1, 2], [1, 2, 0], [2, 0, 1]]\nlabels = [\"e\", \"a\", \"a2\"]\n");
    write(dir, "omega.toml", "group = \"z3.toml\"\nkind = \"random-coboundary\"\nseed = 5\n");
    write(dir, "real.toml", "group = \"z3.toml\"\nkind = \"random-real-coboundary\"\n");
    write(dir, "algebra.toml", "group = \"z3.toml\"\nbuiltin = \"group-algebra\"\n");
}

#[test]
fn list_names_every_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let out = deformctl(dir.path(), &["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["trivial-everything", "z2", "z3z3-bicharacter", "pauli", "nc-torus-z2"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn builtin_report_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = deformctl(dir.path(), &["builtin", "z2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["format"], "deformctl-report/1");
    assert_eq!(r["passed"], true);
    assert_eq!(r["environment"]["seed"], 20_240_917);
    assert_eq!(r["environment"]["theta_grid"].as_array().unwrap().len(), 11);
    assert!(r["records"].as_array().unwrap().iter().all(|x| x.get("runtime_ms").is_none()));
    assert!(record(&r, "cocycle.validate")["outcome"]["residual"].as_f64().unwrap() < 1e-12);
    // ℤ₂ has two characters
    assert_eq!(record(&r, "k0.untwisted-rank")["outcome"]["count"], 2);
}

#[test]
fn bicharacter_collapses_k0() {
    let dir = tempfile::tempdir().unwrap();
    let r = json(&deformctl(dir.path(), &["builtin", "z2z2-bicharacter"]));
    assert_eq!(record(&r, "k0.untwisted-rank")["outcome"]["count"], 4);
    assert_eq!(record(&r, "k0.deformed-rank")["outcome"]["count"], 1);
    assert_eq!(record(&r, "k0.compare")["pass"], true);
}

#[test]
fn print_config_round_trips_through_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = deformctl(dir.path(), &["builtin", "pauli", "--print-config"]);
    assert!(out.status.success());
    write(dir.path(), "pauli.toml", &String::from_utf8(out.stdout).unwrap());
    let a = deformctl(dir.path(), &["run", "pauli.toml"]);
    let b = deformctl(dir.path(), &["builtin", "pauli"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn report_flag_writes_file_and_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = deformctl(dir.path(), &["builtin", "trivial-everything", "--report", "out.json", "--timings"]);
    assert!(out.status.success());
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.lines().any(|l| l.contains("PASS") && l.contains("deform.oracle")));
    let r: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out.json")).unwrap()).unwrap();
    assert!(r["records"].as_array().unwrap().iter().all(|x| x["runtime_ms"].is_number()));
}

#[test]
fn overrides_change_seed_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    let r = json(&deformctl(dir.path(), &["builtin", "z2", "--seed", "7", "--theta-grid", "0:0.5:3"]));
    assert_eq!(r["environment"]["seed"], 7);
    assert_eq!(r["environment"]["theta_grid"], serde_json::json!([0.0, 0.25, 0.5]));
}

#[test]
fn scenario_files_resolve_relative_references() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("data")).unwrap();
    z3_fixture(&dir.path().join("data"));
    write(
        dir.path(),
        "scenario.toml",
        "name = \"z3\"\ngroup = \"data/z3.toml\"\ncocycle = \"data/omega.toml\"\nreal_cocycle = \"data/real.toml\"\n\
         bundle = \"data/algebra.toml\"\nsuites = [\"cocycle\", \"deform\", \"k0\"]\ntheta_grid = [0.0, 0.5, 1.0]\n\
         [tolerances]\n\"deform.oracle\" = 1e-9\n",
    );
    let out = deformctl(dir.path(), &["run", "scenario.toml"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["scenario"], "z3");
    assert_eq!(record(&r, "deform.oracle")["tolerance"], 1e-9);
    assert_eq!(record(&r, "k0.path-invariance")["pass"], true);
    assert!(r["records"].as_array().unwrap().iter().all(|x| !x["name"].as_str().unwrap().starts_with("crossed.")));
}

#[test]
fn missing_and_malformed_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = deformctl(dir.path(), &["run", "absent.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());

    write(dir.path(), "bad.toml", "name = \"x\"\ngroup = \"builtin:z2\"\nunknown_key = 1\n");
    assert_eq!(deformctl(dir.path(), &["run", "bad.toml"]).status.code(), Some(2));
    assert_eq!(deformctl(dir.path(), &["builtin", "nope"]).status.code(), Some(2));
    assert_eq!(deformctl(dir.path(), &["builtin", "z2", "--theta-grid", "0:1"]).status.code(), Some(2));
}

#[test]
fn invalid_cocycle_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "s.toml",
        "name = \"x\"\ngroup = \"builtin:z2\"\n[cocycle]\nturns = [[0, \"1/3\"], [0, 0]]\n",
    );
    let out = deformctl(dir.path(), &["run", "s.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cocycle"));
}

#[test]
fn group_validate_reports_bad_tables() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "ok.toml", "cayley = [[0, 1], [1, 0]]\n");
    write(dir.path(), "bad.toml", "cayley = [[0, 1], [1, 1]]\n");
    let ok = deformctl(dir.path(), &["group", "validate", "ok.toml"]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = deformctl(dir.path(), &["group", "validate", "bad.toml"]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(json(&bad)["passed"], false);
    assert_eq!(deformctl(dir.path(), &["group", "validate", "builtin:d4"]).status.code(), Some(0));
}

#[test]
fn expectation_mismatch_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "s.toml",
        "name = \"x\"\ngroup = \"builtin:z2xz2\"\ncocycle = \"builtin:bicharacter\"\nsuites = [\"k0\"]\nexpect = { k0_isomorphic = true }\n",
    );
    let out = deformctl(dir.path(), &["run", "s.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(record(&json(&out), "k0.compare")["pass"], false);
}

#[test]
fn pair_subcommands_filter_records() {
    let dir = tempfile::tempdir().unwrap();
    z3_fixture(dir.path());
    let names = |args: &[&str]| -> Vec<String> {
        let out = deformctl(dir.path(), args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        json(&out)["records"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap().to_string()).collect()
    };
    assert_eq!(names(&["crossed", "vk", "algebra.toml", "omega.toml"]), ["crossed.v-multiplicativity"]);
    assert!(names(&["crossed", "wk", "algebra.toml", "real.toml"]).contains(&"crossed.w-cocycle".to_string()));
    assert!(names(&["deform", "run", "algebra.toml", "omega.toml"]).contains(&"deform.oracle".to_string()));
    assert!(names(&["k0", "algebra.toml", "omega.toml", "--compare-untwisted"]).contains(&"k0.compare".to_string()));
    assert_eq!(names(&["tga", "relations", "omega.toml"])[0], "tga.relations");
    assert_eq!(names(&["triple", "path", "algebra.toml", "real.toml", "builtin:ancilla"]), ["triple.index-path"]);
}

#[test]
fn cocycle_commands() {
    let dir = tempfile::tempdir().unwrap();
    z3_fixture(dir.path());
    for args in [
        ["cocycle", "validate", "omega.toml"],
        ["cocycle", "opposite", "omega.toml"],
        ["cocycle", "exp", "real.toml"],
    ] {
        assert_eq!(deformctl(dir.path(), &args).status.code(), Some(0), "{args:?}");
    }
    assert_eq!(deformctl(dir.path(), &["bundle", "validate", "algebra.toml"]).status.code(), Some(0));
}
