use std::process::Command;

fn charp(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_charp"))
        .args(args)
        .env("CHARP_BUDGET_PROFILE", "fast")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
    )
}

#[test]
fn list_names_every_frozen_id() {
    let (code, out) = charp(&["list"]);
    assert_eq!(code, 0);
    for id in [
        "decalage",
        "sym-cohomology",
        "four-term-exact",
        "norm-cokernel-zp2",
        "cartier",
        "omega-trunc-vs-symp",
        "steenrod-p0",
        "steenrod-p1",
        "witt-bockstein-agree",
        "algebra-bockstein",
        "witt-identity",
        "ghost-v",
        "additive-cohomology-dims",
        "lattice-vanishing",
        "semidirect-agree",
        "weights-1",
        "weights-2",
        "weights-3",
        "weights-4",
        "borel-1",
        "borel-2",
        "borel-3",
        "field-search",
        "alpha-sl2-f4",
        "alpha-u2-f2-zero",
        "alpha-ta-f9",
        "chi1-iso",
        "integral-facts-p2",
        "bock-alpha-nonzero-p2",
    ] {
        assert!(
            out.lines().any(|l| l.split_whitespace().next() == Some(id)),
            "{id} not listed"
        );
    }
}

#[test]
fn run_emits_the_report_schema() {
    let (code, out) = charp(&["--json", "run", "decalage", "--p", "2", "--dim", "3"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(|s| s.as_str()).collect();
    for k in [
        "id",
        "params",
        "computed",
        "expected",
        "pass",
        "skipped",
        "runtime_ms",
        "version",
    ] {
        assert!(keys.contains(&k), "missing {k}");
    }
    assert_eq!(v["params"]["p"], 2);
    assert_eq!(v["computed"]["h"], serde_json::json!([0, 0, 3]));
    for e in v["expected"].as_object().unwrap().values() {
        assert!(["paper", "trivial", "derived"].contains(&e["provenance"].as_str().unwrap()));
    }
}

#[test]
fn out_file_matches_stdout() {
    let path = std::env::temp_dir().join(format!("charp_cli_{}.json", std::process::id()));
    let p = path.to_str().unwrap();
    let (code, out) = charp(&["--json", "run", "ghost-v", "--seed", "3", "--out", p]);
    assert_eq!(code, 0);
    let file = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(file.trim(), out.trim());
}

#[test]
fn run_all_by_tag() {
    let (code, out) = charp(&["run-all", "--tag", "combinatorics"]);
    assert_eq!(code, 0);
    for id in [
        "weights-1",
        "weights-4",
        "borel-1",
        "borel-3",
        "field-search",
    ] {
        assert!(out.contains(id), "{id} missing");
    }
    assert!(!out.contains("decalage"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(charp(&["run", "no-such-id"]).0, 2);
    assert_eq!(charp(&["run", "decalage", "--p", "7"]).0, 2);
    assert_eq!(charp(&["run", "borel-1", "--q", "27"]).0, 2);
    assert_eq!(charp(&["frobnicate"]).0, 2);
}

#[test]
fn config_file_overrides_budget() {
    let path = std::env::temp_dir().join(format!("charp_cfg_{}.toml", std::process::id()));
    std::fs::write(&path, "max_level = 2\n").unwrap();
    let (code, out) = charp(&[
        "--config",
        path.to_str().unwrap(),
        "--json",
        "run",
        "sym-cohomology",
    ]);
    std::fs::write(&path, "max_level = \"many\"\n").unwrap();
    let bad = charp(&["--config", path.to_str().unwrap(), "run", "sym-cohomology"]).0;
    std::fs::remove_file(&path).unwrap();
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["skipped"], true);
    assert_eq!(v["pass"], false);
    assert_eq!(bad, 2);
}
