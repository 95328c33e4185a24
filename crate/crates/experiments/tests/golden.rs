//! Byte-exact output formats. Set `UPDATE_GOLDEN=1` to rewrite the files
//! under `tests/golden/` after an intentional format change.

use std::path::PathBuf;

use serde_json::{json, Value};
use shortpulse::{Dimension, NormColumn, NormReport, NormRow};
use shortpulse_experiments::fit::{FitRule, ScalingFit, Verdict};
use shortpulse_experiments::report::{norms_csv, plot_script, scaling_csv, summary_json, Check, NormTable, RunFailure};
use shortpulse_experiments::{run_experiment, Experiment, Results, RunConfig};

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn assert_golden(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(
        expected == actual,
        "{name} differs from {}\n--- expected\n{expected}\n--- actual\n{actual}",
        path.display()
    );
}

fn synthetic() -> Results {
    let mut r = Results::new("delta-sweep").with_config(&RunConfig::for_experiment(Experiment::DeltaSweep));
    r.csv_stride = 2;
    let deltas = vec![0.04, 0.02, 0.01];
    r.fits.push(ScalingFit {
        quantity: "in_Lbar_phi".into(),
        exponent: 0.5,
        rule: FitRule::Bounded {
            headroom: 3.0,
            slope_tolerance: 0.1,
        },
        deltas: deltas.clone(),
        values: vec![0.2, 0.1375, 0.1],
        slope: Some(0.5),
        ratios: vec![1.0, 0.97, 1.0],
        ratio_spread: Some(1.03),
        verdict: Verdict::BoundRespected,
        note: String::new(),
    });
    r.fits.push(ScalingFit::structurally_zero(
        "out_Omega_phi",
        0.5,
        FitRule::Bounded {
            headroom: 3.0,
            slope_tolerance: 0.1,
        },
        &deltas,
    ));
    r.fits.push(ScalingFit::failed(
        "sup_phi",
        0.25,
        FitRule::BoundDirection {
            headroom: 3.0,
            slope_tolerance: 0.1,
        },
        &deltas,
        &[0.5, 0.25, f64::NAN],
        "delta=0.01: blow-up".into(),
    ));
    r.checks.push(Check::at_most("huygens delta=0.04", 0.0, 1e-13));
    r.checks.push(Check::within("order mms-2d phi", 1.98, 1.9, 2.1));
    r.failures.push(RunFailure {
        delta: 0.01,
        message: "blow-up".into(),
    });
    r.details = json!({ "runs": [{ "delta": 0.04, "kinetic_flux": 612.5 }] });
    let columns = vec![
        NormColumn {
            name: "E1",
            structurally_zero: false,
        },
        NormColumn {
            name: "out_Omega_phi",
            structurally_zero: true,
        },
    ];
    let mut rows = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            rows.push(NormRow {
                i,
                j,
                u: -4.0 + 1.5 * i as f64,
                ub: 0.02 * j as f64,
                values: vec![0.25 * (i + j) as f64, 0.0],
            });
        }
    }
    r.norms.push(NormTable {
        delta: 0.04,
        report: NormReport {
            delta: 0.04,
            dim: Dimension::Three,
            nodes_u: 3,
            nodes_ub: 3,
            columns,
            rows,
        },
    });
    r
}

#[test]
fn summary_json_matches_golden() {
    assert_golden("summary.json", &summary_json(&synthetic()));
}

#[test]
fn scaling_csv_matches_golden() {
    assert_golden("scaling.csv", &scaling_csv(&synthetic()));
}

#[test]
fn norms_csv_matches_golden() {
    assert_golden("norms.csv", &norms_csv(&synthetic()));
}

#[test]
fn plot_script_matches_golden() {
    assert_golden("plot.gp", &plot_script(&synthetic()));
}

#[test]
fn empty_results_match_golden() {
    let r = Results::new("delta-sweep");
    assert_golden("empty_summary.json", &summary_json(&r));
    assert_golden("empty_plot.gp", &plot_script(&r));
}

fn small(dim: Dimension) -> RunConfig {
    let mut c = RunConfig::for_experiment(Experiment::SingleRun);
    c.n_u = 12;
    c.n_ub = 8;
    c.n_theta = 8;
    c.dim = dim;
    if dim == Dimension::Two {
        c.angular_mode = 2;
    }
    c
}

#[test]
fn norm_column_contract_3d() {
    let csv = norms_csv(&run_experiment(&small(Dimension::Three)));
    assert_golden("norms_header_3d.txt", &format!("{}\n", csv.lines().next().unwrap()));
}

#[test]
fn norm_column_contract_2d() {
    let csv = norms_csv(&run_experiment(&small(Dimension::Two)));
    assert_golden("norms_header_2d.txt", &format!("{}\n", csv.lines().next().unwrap()));
}

#[test]
fn summary_schema_of_a_real_sweep() {
    let mut c = RunConfig::for_experiment(Experiment::DeltaSweep);
    c.n_u = 30;
    c.n_ub = 16;
    let v: Value = serde_json::from_str(&summary_json(&run_experiment(&c))).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["checks", "config", "details", "experiment", "failures", "fits", "passed", "schema"]);
    let fit_keys: Vec<&str> = v["fits"][0].as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        fit_keys,
        ["deltas", "exponent", "note", "quantity", "ratio_spread", "ratios", "rule", "slope", "values", "verdict"]
    );
    assert_eq!(v["fits"][0]["rule"]["kind"], "bounded");
}
