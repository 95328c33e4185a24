//! Smallness of the solution on the last ingoing cone `ub = delta`.

use serde_json::json;
use shortpulse::{Quantity, State};

use crate::config::RunConfig;
use crate::fit::FitRule;
use crate::report::{Check, Results};
use crate::run::{huygens_defect, sup_on_last_ingoing_cone};
use crate::sweep::{fit_series, record_failures, run_sweep, HUYGENS_TOLERANCE};

/// Suprema on `ub = delta` and their bound exponents: (name, quantity, p).
pub const PROP61_QUANTITIES: [(&str, Quantity, f64); 5] = [
    ("cbar_sup_L_phi", Quantity::LPhi, 0.25),
    ("cbar_sup_phi", Quantity::Phi, 0.25),
    ("cbar_sup_Lbar_phi", Quantity::LbarPhi, 1.25),
    ("cbar_sup_Omega_phi", Quantity::OmegaPhi, 0.25),
    ("cbar_sup_L2_phi", Quantity::L2Phi, 0.25),
];

#[derive(Clone, Debug)]
pub struct Prop61Measure {
    pub sups: Vec<f64>,
    pub angular_zero: bool,
    pub huygens: f64,
}

fn measure(state: &State) -> shortpulse::Result<Prop61Measure> {
    let sups = PROP61_QUANTITIES
        .iter()
        .map(|&(_, q, _)| sup_on_last_ingoing_cone(state, &state.quantity(q)))
        .collect();
    Ok(Prop61Measure {
        sups,
        angular_zero: state.angular_structurally_zero(),
        huygens: huygens_defect(state),
    })
}

/// Fits the suprema with the bound-direction rule: the ratio to `delta^p`
/// may not grow beyond `headroom` times its value at the widest pulse.
pub fn prop61_check(config: &RunConfig) -> Results {
    let mut results = Results::new("prop61").with_config(config);
    let entries = run_sweep(config, measure);
    record_failures(&mut results, &entries);
    let rule = FitRule::BoundDirection {
        headroom: config.headroom,
        slope_tolerance: config.slope_tolerance,
    };
    let angular_zero = entries
        .iter()
        .find_map(|e| e.outcome.as_ref().ok())
        .is_some_and(|m| m.angular_zero);
    for (k, &(name, q, p)) in PROP61_QUANTITIES.iter().enumerate() {
        let zero = angular_zero && q.omega_order() > 0;
        results
            .fits
            .push(fit_series(name, p, rule, &entries, zero, |m| m.sups[k]));
    }
    let mut runs = Vec::new();
    for e in &entries {
        if let Ok(m) = &e.outcome {
            results
                .checks
                .push(Check::at_most(format!("huygens delta={}", e.delta), m.huygens, HUYGENS_TOLERANCE));
            let sups: serde_json::Map<String, serde_json::Value> = PROP61_QUANTITIES
                .iter()
                .zip(&m.sups)
                .map(|(&(name, _, _), &v)| (name.to_string(), json!(v)))
                .collect();
            runs.push(json!({ "delta": e.delta, "amplitude": e.amplitude, "sups": sups }));
        }
    }
    results.details = json!({ "runs": runs });
    results
}
