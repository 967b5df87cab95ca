use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const REFERENCE_MODEL: &str =
    r#""model": {"d": 1, "theta": 1, "a": 1, "b": 2, "c": 1, "k": 2, "q": 1, "mu": 1, "beta": 1, "h0": 0.4}"#;

fn viralfb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_viralfb")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_error(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("stderr has a JSON line");
    serde_json::from_str::<serde_json::Value>(line).unwrap()["error"].clone()
}

#[test]
fn thresholds_and_eigen_on_the_reference_set() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ref.json", &format!("{{{REFERENCE_MODEL}}}"));
    let cfg = cfg.to_str().unwrap();

    let out = viralfb(&["thresholds", "--config", cfg]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["r0"], 4.0);
    assert!((v["lambda_cap"].as_f64().unwrap() - 1.8138).abs() < 1e-4);
    let d_cap = 4.0 * 0.16 * 3.0 / std::f64::consts::PI.powi(2);
    assert!((v["d_cap"].as_f64().unwrap() - d_cap).abs() < 1e-15);

    let out = viralfb(&["eigen", "--config", cfg, "--m", "1", "--l", "0.8"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((json(&out)["lambda1"].as_f64().unwrap() + 0.1499).abs() < 1e-4);

    let out = viralfb(&["certificate", "--config", cfg, "--l", "0.8"]);
    assert_eq!(out.status.code(), Some(0));
    let c = &json(&out)["certificate"];
    let m = c["M"].as_f64().unwrap();
    assert!((c["mu0"].as_f64().unwrap() * m - 0.0539).abs() < 1e-4);
}

#[test]
fn numbers_print_with_seventeen_digits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ref.json", &format!("{{{REFERENCE_MODEL}}}"));
    let out = viralfb(&["thresholds", "--config", cfg.to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"r0\": 4.0000000000000000e0"), "{text}");
}

#[test]
fn usage_and_validation_errors_exit_2() {
    let out = viralfb(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let dir = tempfile::tempdir().unwrap();
    let bad = REFERENCE_MODEL.replace("\"d\": 1", "\"d\": -1");
    let cfg = write_config(dir.path(), "bad.json", &format!("{{{bad}}}"));
    let out = viralfb(&["thresholds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let e = stderr_error(&out);
    assert_eq!(e["message"], "model.d must be positive");
    assert_eq!(e["exit_code"], 2);

    let cfg = write_config(dir.path(), "typo.json", &format!("{{{REFERENCE_MODEL}, \"stepper\": {{\"t_ned\": 1}}}}"));
    let out = viralfb(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_error(&out)["message"].as_str().unwrap().contains("t_ned"));

    let out = viralfb(&["thresholds", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let stiff = r#"{"model": {"d": 1, "theta": 1, "a": 1, "b": 2, "c": 1000, "k": 2000, "q": 1, "mu": 1, "beta": 1, "h0": 0.4},
 "stepper": {"max_retries": 0, "t_end": 1.0}}"#;
    let cfg = write_config(dir.path(), "stiff.json", stiff);
    let out = viralfb(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_error(&out)["kind"], "step_rejected");
}

#[test]
fn simulate_writes_outputs_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{{{REFERENCE_MODEL}, \"stepper\": {{\"t_end\": 3.0, \"stop_on_decision\": false}}, \"outputs\": {{\"profile_every\": 1.0}}}}"
    );
    let cfg = write_config(dir.path(), "run.json", &body);
    let cfg = cfg.to_str().unwrap();
    let mut snapshots = Vec::new();
    for name in ["a", "b"] {
        let out_dir = dir.path().join(name);
        let out = viralfb(&["simulate", "--config", cfg, "--out", out_dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let stdout = String::from_utf8(out.stdout).unwrap();
        assert_eq!(stdout.lines().count(), 1);
        snapshots.push(
            ["series.csv", "profiles.csv", "summary.json"].map(|f| fs::read(out_dir.join(f)).unwrap()),
        );
    }
    assert_eq!(snapshots[0], snapshots[1]);

    let a = dir.path().join("a");
    let series = fs::read_to_string(a.join("series.csv")).unwrap();
    assert!(series.starts_with("t,g,h,width,max_w,max_v,u_center\n"));
    let profiles = fs::read_to_string(a.join("profiles.csv")).unwrap();
    assert!(profiles.starts_with("t,x,u,v,w\n"));
    // rows outside the habitat leave v and w blank
    assert!(profiles.lines().nth(1).unwrap().ends_with(",,"));
    let times: std::collections::BTreeSet<&str> = profiles.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(times.len(), 4);

    let summary: serde_json::Value = serde_json::from_slice(&fs::read(a.join("summary.json")).unwrap()).unwrap();
    for key in ["classification", "r0", "lambda_cap", "final_width", "t_final", "center_triple", "equilibrium_triple", "clip_count", "certificate"] {
        assert!(summary.get(key).is_some(), "missing {key}");
    }
    assert_eq!(summary["t_final"], 3.0);

    let echoed: serde_json::Value = serde_json::from_slice(&fs::read(a.join("effective_config.json")).unwrap()).unwrap();
    assert_eq!(echoed["stepper"]["n_y"], 257);
    assert_eq!(echoed["initial"]["profile"], "cosine");
}

#[test]
fn sweep_marks_analytic_cells() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ref.json", &format!("{{{REFERENCE_MODEL}}}"));
    let out = viralfb(&["sweep", "--config", cfg.to_str().unwrap(), "--axis", "h0=1.0:1.2:2", "--axis", "d=0.5:1.0:2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("h0,d,gamma,r0,lambda_cap,verdict,source"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.ends_with(",spreading,analytic")));

    let out = viralfb(&["sweep", "--config", cfg.to_str().unwrap(), "--axis", "k=1:2:3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ode_baseline_reaches_the_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ref.json", &format!("{{{REFERENCE_MODEL}}}"));
    let out = viralfb(&["ode-baseline", "--config", cfg.to_str().unwrap(), "--t-end", "100", "--dt", "0.01"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,u,v,w\n"));
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(last[0], 100.0);
    assert!((last[1] - 0.25).abs() < 1e-9 && (last[2] - 0.75).abs() < 1e-9 && (last[3] - 1.5).abs() < 1e-9);
}
