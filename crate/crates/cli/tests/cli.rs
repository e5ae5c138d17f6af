use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn dirand(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirand"))
        .args(args)
        .env_remove("DIRAND_THREADS")
        .output()
        .expect("binary runs")
}

fn payload(args: &[&str]) -> Value {
    let out = dirand(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: Value = serde_json::from_slice(&out.stdout).expect("stdout is JSON");
    assert!(report["wall_time"].as_f64().is_some());
    report["payload"].clone()
}

fn config(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn close(v: &Value, target: f64, tol: f64) -> bool {
    v.as_f64().is_some_and(|x| (x - target).abs() <= tol)
}

#[test]
fn chsh_bounds() {
    let p = payload(&["bell", "bounds", "chsh"]);
    assert_eq!(p["local"], 2.0);
    assert!(close(&p["quantum_attained"], 2f64.sqrt() * 2.0, 1e-9));
    assert!(close(&p["ns"], 4.0, 1e-6));
}

#[test]
fn mermin_bounds() {
    let p = payload(&["bell", "bounds", "mermin5"]);
    assert_eq!(p["local"], 6.0);
    assert!(close(&p["ns"], 0.0, 1e-6));
    assert!(close(&p["quantum_attained"], 0.0, 1e-9));
}

#[test]
fn pr_box_evaluates_to_four() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("prbox.json");
    std::fs::write(
        &path,
        r#"{"scenario":{"parties":2,"inputs":[2,2],"outputs":[2,2]},
            "table":[0.5,0,0,0.5, 0.5,0,0,0.5, 0.5,0,0,0.5, 0,0.5,0.5,0]}"#,
    )
    .unwrap();
    let p = payload(&["bell", "eval", "chsh", path.to_str().unwrap()]);
    assert!(close(&p["value"], 4.0, 1e-12));
    assert_eq!(p["violates_local_bound"], true);

    std::fs::write(&path, r#"{"scenario":{"parties":2,"inputs":[2,2],"outputs":[2,2]},"table":[1]}"#).unwrap();
    let out = dirand(&["bell", "eval", "chsh", path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
}

#[test]
fn guessing_bounds() {
    let p = payload(&["guess", "mermin5", "0", "--majority", "0,1,2", "--input", "1,0,0,0,0", "--guess", "0"]);
    assert!(close(&p["bound"], 0.75, 1e-6));
    let p = payload(&["guess", "chsh", "4"]);
    assert!(close(&p["bound"], 0.5, 1e-6));
    let p = payload(&["guess", "chsh", "2"]);
    assert!(close(&p["bound"], 1.0, 1e-6));
}

#[test]
fn extractor_sweeps_pass() {
    for kind in ["hadamard", "bpp"] {
        let p = payload(&["extractor", kind, "--n", "3"]);
        assert_eq!(p["pass"], true, "{kind}");
        assert_eq!(p["reports"].as_array().unwrap().len(), 9);
    }
    let p = payload(&["extractor", "deor", "--n", "6", "--rank-check"]);
    assert_eq!(p["pass"], true);
    assert_eq!(p["subsets_checked"], 63);
    let p = payload(&["extractor", "hadamard", "--n", "5", "--kx", "3", "--ky", "3", "--samples", "50"]);
    assert_eq!(p["sampled"], true);
}

#[test]
fn quadratic_protocol_is_reproducible() {
    let cfg = config("quadratic_honest.json");
    let a = payload(&["--seed", "11", "--trials", "3", "protocol", &cfg]);
    let b = payload(&["--seed", "11", "--trials", "3", "protocol", &cfg]);
    let c = payload(&["--seed", "12", "--trials", "3", "protocol", &cfg]);
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a["accepted"], 3);
    assert_eq!(a["ledger_balanced"], true);
    assert!(a["mean_certified_entropy"].as_f64().unwrap() > 0.0);
    let classical = payload(&["--trials", "3", "protocol", &config("quadratic_classical.json")]);
    assert_eq!(classical["mean_certified_entropy"], 0.0);
}

#[test]
fn thread_count_does_not_change_the_payload() {
    let cfg = config("single_device_repeat_tree.json");
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_dirand"))
            .args(["--seed", "3", "--trials", "16", "protocol", &cfg])
            .env("DIRAND_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        serde_json::from_slice::<Value>(&out.stdout).unwrap()["payload"].clone()
    };
    assert_eq!(run("1"), run("4"));
    let bad = Command::new(env!("CARGO_BIN_EXE_dirand"))
        .args(["tree"])
        .env("DIRAND_THREADS", "many")
        .output()
        .unwrap();
    assert!(!bad.status.success());
}

#[test]
fn bouda_with_deterministic_devices_aborts() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("runs.csv");
    let p = payload(&[
        "--trials",
        "400",
        "--csv",
        csv.to_str().unwrap(),
        "protocol",
        &config("bouda_deterministic.json"),
    ]);
    assert!(p["abort_rate"].as_f64().unwrap() >= 0.2);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 401);
    assert!(text.starts_with("trial,accepted,abort_reason"));
}

#[test]
fn single_device_reports() {
    let p = payload(&["protocol", &config("single_device_bounds.json")]);
    let bounds = p["bounds"].as_array().unwrap();
    assert_eq!(bounds[0]["regime"], "full_cheating");
    assert_eq!(bounds[1]["p_cheat"], 1.0);
    let p = payload(&["--trials", "50", "protocol", &config("single_device_repeat_tree.json")]);
    assert_eq!(p["accepted"], 50);
    assert!(p["runs"].as_array().unwrap().iter().all(|r| r["output_hex"] == "00"));
}

#[test]
fn example_configs_run() {
    for name in [
        "gallego_honest.json",
        "brandao_honest.json",
        "concatenated_fehr.json",
        "vv_exponential_scaled.json",
        "vv_quantum_scaled.json",
    ] {
        let p = payload(&["--seed", "1", "protocol", &config(name)]);
        assert_eq!(p["ledger_balanced"], true, "{name}");
    }
}

#[test]
fn hash_cover_round_trip() {
    let built = payload(&["--seed", "4", "hash-cover", "construct", "--n", "3"]);
    assert_eq!(built["verdict"]["counterexample"], Value::Null);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("family.json");
    std::fs::write(&path, built["family"].to_string()).unwrap();
    let checked = payload(&["hash-cover", "verify", path.to_str().unwrap()]);
    assert_eq!(checked["covers"], true);
    assert_eq!(checked["members"], built["members"]);
}

#[test]
fn tree_report() {
    let p = payload(&["tree", "--max-depth", "40", "--rates", "0.9"]);
    let trees = p["trees"].as_array().unwrap();
    assert_eq!(trees[1]["max_leaves"], "12");
    assert_eq!(trees[3]["repeat_leaves"], "100");
    assert_eq!(trees[39]["max_leaves"], 12u128.pow(20).to_string());
    assert!(close(&p["threshold"], 12f64.log2() / 4.0, 1e-15));
}

#[test]
fn errors_exit_nonzero() {
    for args in [
        vec!["bell", "bounds", "nonsense"],
        vec!["protocol", "/definitely/missing.json"],
        vec!["extractor", "hadamard", "--n", "3", "--rank-check"],
        vec!["tree", "--max-depth", "41"],
    ] {
        let out = dirand(&args);
        assert!(!out.status.success(), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}
