use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn shortpulse(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shortpulse"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn summary(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn run_writes_every_file_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = shortpulse(&["run", "--n-u", "60", "--n-ub", "16", "--checkpoint"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    for f in ["summary.json", "norms.csv", "scaling.csv", "plot.gp", "state.ckpt"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let s = summary(&out);
    assert_eq!(s["experiment"], "single-run");
    assert_eq!(s["passed"], true);
    assert_eq!(s["config"]["n_u"], "60");
    assert!(String::from_utf8_lossy(&o.stdout).contains("single-run: PASSED"));
}

#[test]
fn config_file_is_layered_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.conf");
    std::fs::write(
        &cfg,
        "# small sweep\nn_u = 40\nn_ub = 16\ndelta_list = 0.04, 0.02, 0.01\nnonlinearity = focusing:7\n",
    )
    .unwrap();
    let out = dir.path().join("sweep");
    let o = shortpulse(&["sweep", "--config", cfg.to_str().unwrap(), "--n-u", "48"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let s = summary(&out);
    assert_eq!(s["experiment"], "delta-sweep");
    assert_eq!(s["config"]["n_u"], "48");
    assert_eq!(s["config"]["nonlinearity"], "focusing:7");
    assert_eq!(s["config"]["delta_list"], "0.04,0.02,0.01");
}

#[test]
fn violated_bound_gives_exit_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tight");
    // No measured series is constant to within 0.01 %.
    let o = shortpulse(
        &["sweep", "--n-u", "40", "--n-ub", "16", "--headroom", "1.0001", "--delta-list", "0.04,0.02,0.01"],
        &out,
    );
    assert_eq!(o.status.code(), Some(1));
    let s = summary(&out);
    assert_eq!(s["passed"], false);
    assert!(s["fits"]
        .as_array()
        .unwrap()
        .iter()
        .any(|f| f["verdict"] == "violated"));
}

#[test]
fn invalid_configuration_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bad");
    let o = shortpulse(&["sweep", "--delta-list", "0.01,0.02,0.04"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("decreasing"));
    assert!(!out.exists());

    let o = shortpulse(&["run", "--angular-mode", "2"], &out);
    assert_eq!(o.status.code(), Some(2));

    let o = shortpulse(&["run", "--nonlinearity", "cubic"], &out);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_config_keys_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "n_u = 40\nseed = 7\n").unwrap();
    let o = shortpulse(&["run", "--config", cfg.to_str().unwrap()], &dir.path().join("x"));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("seed"), "{err}");
}

#[test]
fn seed_flag_does_not_exist() {
    let dir = tempfile::tempdir().unwrap();
    let o = shortpulse(&["sweep", "--seed", "1"], &dir.path().join("x"));
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn converge_and_contrast_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("conv");
    let o = shortpulse(&["converge", "--levels", "3"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let rows = summary(&out)["details"]["rows"].as_array().unwrap().len();
    assert_eq!(rows, 5);

    let out = dir.path().join("contrast");
    let o = shortpulse(&["contrast"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(summary(&out)["details"]["ode_baseline"]["outcome"]["blow_up_time"].is_number());
}

#[test]
fn contrast_rejects_defocusing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let o = shortpulse(&["contrast", "--nonlinearity", "defocusing:3", "--n-u", "30"], &out);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn prop61_and_audit_pass_in_two_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["--dim", "2", "--angular-mode", "2", "--nonlinearity", "exp-focusing", "--n-theta", "16"];
    for cmd in ["prop61", "audit"] {
        let out = dir.path().join(cmd);
        let mut args = vec![cmd];
        args.extend(common);
        let o = shortpulse(&args, &out);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&o.stdout));
    }
}
