//! Pulse-width sweeps and the fitted scaling of the norm hierarchy.

use rayon::prelude::*;
use serde_json::{json, Value};
use shortpulse::{assemble_norm_report, conserved_energy_flux, verify_data_bounds, DataBoundsReport, InitialEnergy, Report, State};

use crate::config::RunConfig;
use crate::fit::{FitRule, ScalingFit};
use crate::report::{Check, NormTable, Results, RunFailure};
use crate::run::{huygens_defect, kinetic_flux_at, run};

/// Largest `|phi|` allowed on `ub = 0`.
pub const HUYGENS_TOLERANCE: f64 = 1e-13;

/// Allowed relative variation of the data flux across a sweep.
pub const FLUX_SPREAD_TOLERANCE: f64 = 0.05;

/// Tracked bounds `max over the slab <= C delta^p`: (report column, p).
pub const TRACKED: [(&str, f64); 7] = [
    ("out_L_phi", 0.0),
    ("out_Omega_phi", 0.5),
    ("in_Omega_phi", 0.0),
    ("in_Lbar_phi", 0.5),
    ("out_L2_phi", -1.0),
    ("in_Lbar2_phi", 0.25),
    ("sup_phi", 0.25),
];

/// Outcome of one evolution of a sweep.
#[derive(Clone, Debug)]
pub struct SweepEntry<M> {
    pub delta: f64,
    pub amplitude: f64,
    pub data: Option<DataBoundsReport<f64>>,
    pub outcome: Result<M, String>,
}

/// Evolves every pulse width in parallel and measures each completed run.
/// Entries keep the order of `delta_list`.
pub fn run_sweep<M, F>(config: &RunConfig, measure: F) -> Vec<SweepEntry<M>>
where
    M: Send,
    F: Fn(&State) -> shortpulse::Result<M> + Sync,
{
    config
        .delta_list
        .par_iter()
        .map(|&delta| match run(config, delta) {
            Err(e) => SweepEntry {
                delta,
                amplitude: f64::NAN,
                data: None,
                outcome: Err(e.to_string()),
            },
            Ok(data_run) => {
                let data = verify_data_bounds(&data_run.pulse, &data_run.grid).ok();
                let outcome = match &data_run.state {
                    Ok(s) => measure(s).map_err(|e| e.to_string()),
                    Err(e) => Err(e.to_string()),
                };
                SweepEntry {
                    delta,
                    amplitude: data_run.amplitude,
                    data,
                    outcome,
                }
            }
        })
        .collect()
}

/// Fits one measured series, marking it failed if any run did not complete.
pub fn fit_series<M>(
    quantity: &str,
    exponent: f64,
    rule: FitRule,
    entries: &[SweepEntry<M>],
    structurally_zero: bool,
    value: impl Fn(&M) -> f64,
) -> ScalingFit {
    let deltas: Vec<f64> = entries.iter().map(|e| e.delta).collect();
    let values: Vec<f64> = entries
        .iter()
        .map(|e| e.outcome.as_ref().map_or(f64::NAN, &value))
        .collect();
    let failures: Vec<String> = entries
        .iter()
        .filter_map(|e| e.outcome.as_ref().err().map(|m| format!("delta={}: {m}", e.delta)))
        .collect();
    if !failures.is_empty() {
        return ScalingFit::failed(quantity, exponent, rule, &deltas, &values, failures.join("; "));
    }
    if structurally_zero {
        return ScalingFit::structurally_zero(quantity, exponent, rule, &deltas);
    }
    ScalingFit::evaluate(quantity, exponent, rule, &deltas, &values)
}

pub(crate) fn record_failures<M>(results: &mut Results, entries: &[SweepEntry<M>]) {
    for e in entries {
        if let Err(message) = &e.outcome {
            results.failures.push(RunFailure {
                delta: e.delta,
                message: message.clone(),
            });
        }
    }
}

/// Data norms whose exponents are sharp, judged by slope equality.
pub const SHARP_DATA_NORMS: [&str; 4] = ["sup_L_phi", "sup_L2_phi", "l2_L_phi", "l2_L2_phi"];

/// Fits of the data norms on `C_{u0}`. Sharp exponents are judged by
/// equality, the rest as upper bounds.
pub fn data_fits<M>(config: &RunConfig, entries: &[SweepEntry<M>]) -> Vec<ScalingFit> {
    let deltas: Vec<f64> = entries.iter().map(|e| e.delta).collect();
    let Some(first) = entries.iter().find_map(|e| e.data.as_ref()) else {
        return Vec::new();
    };
    first
        .entries
        .iter()
        .map(|bound| {
            let name = format!("data_{}", bound.name);
            let rule = if !SHARP_DATA_NORMS.contains(&bound.name) {
                FitRule::Bounded {
                    headroom: config.headroom,
                    slope_tolerance: config.slope_tolerance,
                }
            } else {
                FitRule::Equality {
                    tolerance: config.equality_tolerance,
                }
            };
            if bound.structurally_zero {
                return ScalingFit::structurally_zero(&name, bound.exponent, rule, &deltas);
            }
            let values: Vec<f64> = entries
                .iter()
                .map(|e| {
                    e.data
                        .as_ref()
                        .and_then(|d| d.get(bound.name))
                        .map_or(f64::NAN, |b| b.value)
                })
                .collect();
            if values.iter().any(|v| v.is_nan()) {
                return ScalingFit::failed(&name, bound.exponent, rule, &deltas, &values, "data not evaluated".into());
            }
            ScalingFit::evaluate(&name, bound.exponent, rule, &deltas, &values)
        })
        .collect()
}

/// Measurements of one completed sweep run.
#[derive(Clone, Debug)]
pub struct SweepMeasure {
    pub report: Report,
    pub huygens: f64,
    pub energy: InitialEnergy<f64>,
}

fn measure(state: &State) -> shortpulse::Result<SweepMeasure> {
    Ok(SweepMeasure {
        report: assemble_norm_report(state)?,
        huygens: huygens_defect(state),
        energy: conserved_energy_flux(state),
    })
}

fn relative_spread(values: &[f64]) -> f64 {
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if hi <= 0.0 {
        0.0
    } else {
        (hi - lo) / hi
    }
}

/// Runs the sweep, fits every tracked quantity and the data exponents, and
/// checks Huygens' principle and the delta-independence of the data flux.
pub fn delta_sweep(config: &RunConfig) -> Results {
    let mut results = Results::new("delta-sweep").with_config(config);
    let entries = run_sweep(config, measure);
    record_failures(&mut results, &entries);

    let rule = FitRule::Bounded {
        headroom: config.headroom,
        slope_tolerance: config.slope_tolerance,
    };
    let reference = entries.iter().find_map(|e| e.outcome.as_ref().ok());
    for (column, p) in TRACKED {
        let zero = reference.is_some_and(|m| m.report.is_structurally_zero(column).unwrap_or(false));
        results.fits.push(fit_series(column, p, rule, &entries, zero, |m| {
            m.report.max(column).unwrap_or(f64::NAN)
        }));
    }
    results.fits.extend(data_fits(config, &entries));

    let mut fluxes = Vec::new();
    let mut per_delta = Vec::new();
    for e in &entries {
        let mut row = json!({ "delta": e.delta, "amplitude": e.amplitude });
        match &e.outcome {
            Ok(m) => {
                results
                    .checks
                    .push(Check::at_most(format!("huygens delta={}", e.delta), m.huygens, HUYGENS_TOLERANCE));
                fluxes.push(m.energy.kinetic);
                row["kinetic_flux"] = json!(m.energy.kinetic);
                row["potential"] = json!(m.energy.potential);
                row["huygens_defect"] = json!(m.huygens);
                row["max_M"] = json!(m.report.max("M").unwrap_or(f64::NAN));
                results.norms.push(NormTable {
                    delta: e.delta,
                    report: m.report.clone(),
                });
            }
            Err(message) => row["failure"] = json!(message),
        }
        per_delta.push(row);
    }
    if fluxes.len() == entries.len() && !fluxes.is_empty() {
        results
            .checks
            .push(Check::at_most("kinetic_flux_spread", relative_spread(&fluxes), FLUX_SPREAD_TOLERANCE));
    }
    if let Some(&delta) = config.delta_list.first() {
        let res = config.resolution();
        let scaling = kinetic_flux_at(config, delta, res, 1.0)
            .and_then(|one| Ok(kinetic_flux_at(config, delta, res, 2.0)? / one));
        match scaling {
            Ok(ratio) => results
                .checks
                .push(Check::at_most("kinetic_flux_amplitude_doubling", (ratio / 4.0 - 1.0).abs(), 0.01)),
            Err(e) => results.checks.push(Check::holds(
                "kinetic_flux_amplitude_doubling",
                false,
                format!("flux evaluation failed: {e}"),
            )),
        }
    }
    results.details = json!({ "runs": Value::Array(per_delta) });
    results
}
