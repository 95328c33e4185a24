//! Experiment results and the files written for them.
//!
//! Every experiment produces [`Results`]; [`emit_report`] writes
//! `summary.json`, `norms.csv`, `scaling.csv` and `plot.gp` into the output
//! directory. All floats use fixed formatting and rows keep a fixed order,
//! so identical results give byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use shortpulse::Report;

use crate::fit::{ScalingFit, Verdict};

pub const SCHEMA: &str = "shortpulse-summary/1";

/// A pass/fail comparison of one measured number against a criterion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub criterion: String,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            criterion: format!("<= {limit:e}"),
            passed: measured <= limit,
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            criterion: format!(">= {limit:e}"),
            passed: measured >= limit,
        }
    }

    pub fn within(name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            criterion: format!("in [{lo}, {hi}]"),
            passed: measured >= lo && measured <= hi,
        }
    }

    /// A yes/no outcome; `measured` is 1 when it holds.
    pub fn holds(name: impl Into<String>, holds: bool, criterion: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            measured: if holds { 1.0 } else { 0.0 },
            criterion: criterion.into(),
            passed: holds,
        }
    }
}

/// A solver run that did not complete.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunFailure {
    pub delta: f64,
    pub message: String,
}

/// Norm report of one evolution, written to `norms.csv`.
#[derive(Clone, Debug)]
pub struct NormTable {
    pub delta: f64,
    pub report: Report,
}

#[derive(Clone, Debug)]
pub struct Results {
    pub experiment: String,
    pub config: BTreeMap<String, String>,
    pub fits: Vec<ScalingFit>,
    pub checks: Vec<Check>,
    pub failures: Vec<RunFailure>,
    /// Experiment-specific measurements.
    pub details: Value,
    pub norms: Vec<NormTable>,
    pub csv_stride: usize,
}

impl Results {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            config: BTreeMap::new(),
            fits: Vec::new(),
            checks: Vec::new(),
            failures: Vec::new(),
            details: json!({}),
            norms: Vec::new(),
            csv_stride: 1,
        }
    }

    pub fn with_config(mut self, config: &crate::config::RunConfig) -> Self {
        // The output directory is left out so results do not depend on where they are written.
        self.config = config
            .entries()
            .into_iter()
            .filter(|(k, _)| *k != "out")
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        self.csv_stride = config.csv_stride;
        self
    }

    /// No fit is violated or failed, every check holds and every run completed.
    pub fn passed(&self) -> bool {
        self.fits.iter().all(|f| !f.verdict.is_failure())
            && self.checks.iter().all(|c| c.passed)
            && self.failures.is_empty()
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn fit(&self, quantity: &str) -> Option<&ScalingFit> {
        self.fits.iter().find(|f| f.quantity == quantity)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Names of failed fits and checks, in report order.
    pub fn failure_names(&self) -> Vec<String> {
        let fits = self
            .fits
            .iter()
            .filter(|f| f.verdict.is_failure())
            .map(|f| format!("fit {} ({})", f.quantity, f.verdict.label()));
        let checks = self.checks.iter().filter(|c| !c.passed).map(|c| format!("check {}", c.name));
        let runs = self
            .failures
            .iter()
            .map(|f| format!("run delta={}: {}", f.delta, f.message));
        fits.chain(checks).chain(runs).collect()
    }
}

pub fn summary_json(results: &Results) -> String {
    let doc = json!({
        "schema": SCHEMA,
        "experiment": results.experiment,
        "passed": results.passed(),
        "config": results.config,
        "fits": results.fits,
        "checks": results.checks,
        "failures": results.failures,
        "details": results.details,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("summary is serializable");
    s.push('\n');
    s
}

/// `delta,u,ub,<columns>` for every table, thinned by the stride.
pub fn norms_csv(results: &Results) -> String {
    let mut out = String::new();
    let mut header_written = false;
    for table in &results.norms {
        let mut buf = Vec::new();
        table
            .report
            .write_csv(&mut buf, results.csv_stride)
            .expect("writing to memory");
        let text = String::from_utf8(buf).expect("csv is utf-8");
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        if !header_written {
            let _ = writeln!(out, "delta,{header}");
            header_written = true;
        }
        for line in lines {
            let _ = writeln!(out, "{:.12e},{line}", table.delta);
        }
    }
    if !header_written {
        out.push_str("delta,u,ub\n");
    }
    out
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.12e}")
    }
}

/// Long format: one line per (quantity, delta).
pub fn scaling_csv(results: &Results) -> String {
    let mut out = String::from("quantity,exponent,rule,delta,value,ratio,slope,verdict\n");
    for f in &results.fits {
        let slope = f.slope.map_or("nan".to_string(), num);
        for k in 0..f.deltas.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                f.quantity,
                num(f.exponent),
                f.rule.label(),
                num(f.deltas[k]),
                num(f.values[k]),
                num(f.ratios[k]),
                slope,
                f.verdict.label()
            );
        }
    }
    out
}

/// Gnuplot script: each fitted series on log-log axes with a dashed
/// reference line `q(delta_0) (delta / delta_0)^p`.
pub fn plot_script(results: &Results) -> String {
    let mut s = String::new();
    s.push_str("# Norms against delta on log-log axes, dashed lines are delta^p references.\n");
    s.push_str("# Usage: gnuplot plot.gp (writes scaling.png)\n");
    s.push_str("set terminal pngcairo size 1000,700 noenhanced\n");
    s.push_str("set output 'scaling.png'\n");
    s.push_str("set logscale xy\n");
    s.push_str("set xlabel 'delta'\n");
    s.push_str("set ylabel 'norm'\n");
    s.push_str("set key outside right\n");
    let plotted: Vec<&ScalingFit> = results
        .fits
        .iter()
        .filter(|f| f.values.len() >= 2 && f.values.iter().all(|v| v.is_finite() && *v > 0.0))
        .filter(|f| f.verdict != Verdict::StructurallyZero)
        .collect();
    if plotted.is_empty() {
        s.push_str("set label 1 'no fitted series' at graph 0.5, graph 0.5 center\n");
        s.push_str("plot [0.001:0.1] [0.1:10] 1 notitle with dots\n");
        return s;
    }
    for (n, f) in plotted.iter().enumerate() {
        let _ = writeln!(s, "$q{n} << EOD");
        for (d, v) in f.deltas.iter().zip(&f.values) {
            let _ = writeln!(s, "{} {}", num(*d), num(*v));
        }
        s.push_str("EOD\n");
    }
    let terms: Vec<String> = plotted
        .iter()
        .enumerate()
        .flat_map(|(n, f)| {
            [
                format!(
                    "$q{n} using 1:2 with linespoints lc {c} title '{} (p = {})'",
                    f.quantity,
                    f.exponent,
                    c = n + 1
                ),
                format!(
                    "{} * (x / {})**({}) with lines dt 2 lc {c} notitle",
                    num(f.values[0]),
                    num(f.deltas[0]),
                    f.exponent,
                    c = n + 1
                ),
            ]
        })
        .collect();
    s.push_str("plot ");
    s.push_str(&terms.join(", \\\n     "));
    s.push('\n');
    s
}

#[derive(Debug, thiserror::Error)]
#[error("cannot write {path}: {source}")]
pub struct ReportError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

/// Paths written by [`emit_report`].
#[derive(Clone, Debug, PartialEq)]
pub struct EmittedFiles {
    pub summary: PathBuf,
    pub norms: PathBuf,
    pub scaling: PathBuf,
    pub plot: PathBuf,
}

pub fn emit_report(results: &Results, out_dir: &Path) -> Result<EmittedFiles, ReportError> {
    fs::create_dir_all(out_dir).map_err(|source| ReportError {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let write = |name: &str, text: String| -> Result<PathBuf, ReportError> {
        let path = out_dir.join(name);
        fs::write(&path, text).map_err(|source| ReportError {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    };
    Ok(EmittedFiles {
        summary: write("summary.json", summary_json(results))?,
        norms: write("norms.csv", norms_csv(results))?,
        scaling: write("scaling.csv", scaling_csv(results))?,
        plot: write("plot.gp", plot_script(results))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::FitRule;

    const RULE: FitRule = FitRule::Bounded {
        headroom: 3.0,
        slope_tolerance: 0.1,
    };

    #[test]
    fn empty_results_pass() {
        let r = Results::new("delta-sweep");
        assert!(r.passed());
        assert_eq!(r.exit_code(), 0);
        let v: Value = serde_json::from_str(&summary_json(&r)).unwrap();
        assert_eq!(v["fits"].as_array().unwrap().len(), 0);
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(scaling_csv(&r).lines().count(), 1);
    }

    #[test]
    fn violated_fit_fails_the_exit_code() {
        let mut r = Results::new("delta-sweep");
        let d = [0.04, 0.02, 0.01];
        r.fits.push(ScalingFit::evaluate("q", 0.0, RULE, &d, &[1.0, 10.0, 100.0]));
        assert_eq!(r.fits[0].verdict, Verdict::Violated);
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn inconclusive_fit_does_not_fail() {
        let mut r = Results::new("delta-sweep");
        let d = [0.04, 0.02, 0.01];
        r.fits.push(ScalingFit::evaluate("q", 0.0, RULE, &d, &[0.0, 0.0, 0.0]));
        assert_eq!(r.fits[0].verdict, Verdict::Inconclusive);
        assert!(r.passed());
    }

    #[test]
    fn scaling_csv_cardinality() {
        let mut r = Results::new("delta-sweep");
        let d = [0.04, 0.02, 0.01, 0.005];
        for q in 0..7 {
            r.fits
                .push(ScalingFit::evaluate(&format!("q{q}"), 0.0, RULE, &d, &[1.0; 4]));
        }
        let csv = scaling_csv(&r);
        assert_eq!(csv.lines().count(), 1 + 7 * 4);
        let v: Value = serde_json::from_str(&summary_json(&r)).unwrap();
        assert_eq!(v["fits"].as_array().unwrap().len(), 7);
    }

    #[test]
    fn emission_is_idempotent() {
        let mut r = Results::new("delta-sweep");
        let d = [0.04, 0.02, 0.01];
        r.fits.push(ScalingFit::evaluate("q", 0.5, RULE, &d, &[0.2, 0.14, 0.1]));
        r.checks.push(Check::at_most("c", 0.5, 1.0));
        let dir = tempfile::tempdir().unwrap();
        let a = emit_report(&r, dir.path()).unwrap();
        let first: Vec<Vec<u8>> = [&a.summary, &a.norms, &a.scaling, &a.plot]
            .iter()
            .map(|p| fs::read(p).unwrap())
            .collect();
        emit_report(&r, dir.path()).unwrap();
        let second: Vec<Vec<u8>> = [&a.summary, &a.norms, &a.scaling, &a.plot]
            .iter()
            .map(|p| fs::read(p).unwrap())
            .collect();
        assert_eq!(first, second);
    }

    #[test]
    fn io_errors_name_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = emit_report(&Results::new("x"), &blocker.join("sub")).unwrap_err();
        assert!(err.to_string().contains("sub"));
    }
}
