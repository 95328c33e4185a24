//! One evolution with every diagnostic attached.

use serde_json::json;
use shortpulse::{
    assemble_norm_report, conserved_energy_flux, energy_identity_audit, sobolev_check, verify_data_bounds,
    CommutatorPair, Lemma, Multiplier, State,
};

use crate::config::RunConfig;
use crate::report::{Check, NormTable, Results, RunFailure};
use crate::run::{huygens_defect, run};
use crate::sweep::HUYGENS_TOLERANCE;

/// Runs at `config.delta` and returns the results together with the
/// evolved state, if the run completed.
pub fn single_run_with_state(config: &RunConfig) -> (Results, Option<State>) {
    let mut results = Results::new("single-run").with_config(config);
    let delta = config.delta;
    let data = match run(config, delta) {
        Ok(d) => d,
        Err(e) => {
            results.failures.push(RunFailure {
                delta,
                message: e.to_string(),
            });
            return (results, None);
        }
    };
    let state = match data.state {
        Ok(s) => s,
        Err(e) => {
            results.failures.push(RunFailure {
                delta,
                message: e.to_string(),
            });
            return (results, None);
        }
    };
    let mut details = json!({ "delta": delta, "amplitude": data.amplitude, "sup_phi": state.max_abs() });

    let huygens = huygens_defect(&state);
    results.checks.push(Check::at_most("huygens", huygens, HUYGENS_TOLERANCE));

    let energy = conserved_energy_flux(&state);
    details["initial_energy"] = json!({ "kinetic": energy.kinetic, "potential": energy.potential });

    let mut ledgers = Vec::new();
    for x in Multiplier::ALL {
        match energy_identity_audit(&state, x, config.u_end, delta) {
            Ok(l) => {
                results.checks.push(Check::at_most(
                    format!("energy {x} relative residual"),
                    l.relative_residual,
                    config.energy_tolerance,
                ));
                ledgers.push(json!({
                    "multiplier": x.label(),
                    "flux_out": l.flux_out,
                    "flux_in": l.flux_in,
                    "initial_flux": l.initial_flux,
                    "bulk_k": l.bulk_k,
                    "bulk_source": l.bulk_source,
                    "residual": l.residual,
                    "relative_residual": l.relative_residual,
                }));
            }
            Err(e) => results.checks.push(Check::holds(format!("energy {x} ledger"), false, e.to_string())),
        }
    }
    details["energy_ledgers"] = json!(ledgers);

    details["commutator_residuals"] = json!({
        "L_Omega": state.commutator_residual(CommutatorPair::LOmega),
        "Lbar_Omega": state.commutator_residual(CommutatorPair::LbarOmega),
    });

    let sobolev: Vec<_> = Lemma::for_dimension(config.dim)
        .into_iter()
        .filter_map(|lemma| sobolev_check(&state, lemma).ok())
        .map(|a| json!({ "lemma": a.lemma.label(), "worst_ratio": a.worst_ratio, "violations": a.violations }))
        .collect();
    details["sobolev"] = json!(sobolev);

    if let Ok(bounds) = verify_data_bounds(&data.pulse, &data.grid) {
        let entries: Vec<_> = bounds
            .entries
            .iter()
            .map(|b| json!({ "name": b.name, "value": b.value, "exponent": b.exponent }))
            .collect();
        details["data_norms"] = json!(entries);
    }

    match assemble_norm_report(&state) {
        Ok(report) => {
            let maxima: serde_json::Map<String, serde_json::Value> = report
                .columns
                .iter()
                .map(|c| (c.name.to_string(), json!(report.max(&c.name).unwrap_or(f64::NAN))))
                .collect();
            details["norm_maxima"] = json!(maxima);
            results.norms.push(NormTable { delta, report });
        }
        Err(e) => results.checks.push(Check::holds("norm report", false, e.to_string())),
    }
    results.details = details;
    (results, Some(state))
}

pub fn single_run(config: &RunConfig) -> Results {
    single_run_with_state(config).0
}
