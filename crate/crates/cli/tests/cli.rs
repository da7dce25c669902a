use std::process::{Command, Output};

fn dunkl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dunkl"))
        .args(args)
        .env_remove("DUNKL_REPORT_TIMINGS")
        .env_remove("DUNKL_JOBS")
        .output()
        .unwrap()
}

fn reports(out: &Output) -> Vec<serde_json::Value> {
    serde_json::from_slice::<serde_json::Value>(&out.stdout).unwrap().as_array().unwrap().clone()
}

#[test]
fn osc_full_symbolic_run() {
    let out = dunkl(&["--model", "osc", "--dims", "3", "--suites", "core,coproduct,model", "--mode", "symbolic", "--output", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = reports(&out);
    let suites: Vec<&str> = r.iter().map(|s| s["suite"].as_str().unwrap()).collect();
    assert_eq!(suites, ["core", "coproduct", "model"]);
    for s in &r {
        assert_eq!(s["summary"]["failed"], 0);
        assert_eq!(s["mode"], "symbolic");
        assert!(s["seed"].is_null());
        let keys: Vec<&String> = s.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 7);
        for c in s["checks"].as_array().unwrap() {
            assert_eq!(c.as_object().unwrap().len(), 5);
            assert_eq!(c["status"], "pass");
            assert_eq!(c["millis"], 0);
        }
    }
    assert_eq!(r[2]["model"], "osc");
}

#[test]
fn kc_in_one_dimension_is_rejected() {
    let out = dunkl(&["--model", "kc", "--dims", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("KC-family requires N ≥ 2"));
    assert!(out.stdout.is_empty());
}

#[test]
fn taubnut_sampled_records_seed() {
    let out = dunkl(&["--model", "taubnut", "--dims", "2", "--mode", "sampled", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0));
    for s in reports(&out) {
        assert_eq!(s["seed"], 42);
        assert_eq!(s["mode"], "sampled");
    }
}

#[test]
fn custom_oscillator_runs_universal_suites() {
    let out = dunkl(&["--expr", "1/2 * Jp + omega^2 * 1/2 * Jm", "--dims", "2", "--output", "markdown"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("## universal (N = 2, model custom, symbolic)"));
    assert!(text.contains("| [H, C^[2]] = 0 |"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn non_integral_custom_hamiltonian_fails() {
    // x1 breaks the rotational symmetry the Casimirs need.
    let out = dunkl(&["--expr", "1/2*Jp + x1", "--dims", "2", "--suites", "model"]);
    assert_eq!(out.status.code(), Some(1));
    let r = reports(&out);
    let failed = r[0]["checks"].as_array().unwrap().iter().find(|c| c["status"] == "fail").unwrap();
    assert_eq!(failed["witness"]["kind"], "term");
}

#[test]
fn params_file_fixes_values() {
    let path = std::env::temp_dir().join(format!("dunkl-params-{}.json", std::process::id()));
    std::fs::write(&path, r#"{"omega": "3/2", "hbar": "1"}"#).unwrap();
    let p = path.to_str().unwrap();
    let out = dunkl(&["--model", "osc", "--dims", "2", "--params", p, "--suites", "model"]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn strict_budget_skip_exits_three() {
    let args = ["--model", "osc", "--dims", "2", "--suites", "coproduct", "--term-budget", "60"];
    let lax = dunkl(&args);
    assert_eq!(lax.status.code(), Some(0));
    assert!(reports(&lax)[0]["summary"]["skipped"].as_u64().unwrap() > 0);
    let strict = dunkl(&[&args[..], &["--strict"]].concat());
    assert_eq!(strict.status.code(), Some(3));
}

#[test]
fn jobs_env_fallback_is_accepted() {
    let out = Command::new(env!("CARGO_BIN_EXE_dunkl"))
        .args(["--model", "sw", "--dims", "2", "--suites", "core"])
        .env("DUNKL_JOBS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let bad = Command::new(env!("CARGO_BIN_EXE_dunkl"))
        .args(["--model", "sw", "--dims", "2"])
        .env("DUNKL_JOBS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
