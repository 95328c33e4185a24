//! A large-energy focusing pulse that survives the slab, against the
//! homogeneous ODE with comparable data, which blows up.

use serde_json::json;
use shortpulse::{conserved_energy_flux, Quantity, Resolution, State};

use crate::config::RunConfig;
use crate::ode::{blow_up_time_quadrature, integrate_power_ode};
use crate::report::{Check, NormTable, Results, RunFailure};
use crate::run::{kinetic_flux_at, run_at};

pub const DEFAULT_ENERGY_TARGET: f64 = 1000.0;

/// Relative tolerance of the ODE integrator.
pub const ODE_RTOL: f64 = 1e-10;

/// Allowed disagreement between integrator and quadrature blow-up times.
pub const ODE_ORACLE_TOLERANCE: f64 = 1e-3;

/// Allowed relative change of `sup |phi|` between the two resolutions.
pub const RESOLUTION_TOLERANCE: f64 = 0.01;

/// `(sup |phi|, sup |L phi|)` on the initial outgoing cone.
pub fn data_sups(state: &State) -> (f64, f64) {
    let g = &state.grid;
    let l = state.quantity(Quantity::LPhi);
    let mut sup_phi = 0.0f64;
    let mut sup_l = 0.0f64;
    for j in 0..g.nodes_ub() {
        for k in g.block(0, j) {
            sup_phi = sup_phi.max(state.values[k].abs());
            sup_l = sup_l.max(l[k].abs());
        }
    }
    (sup_phi, sup_l)
}

/// Runs the matched-energy pulse at two resolutions and the ODE baseline
/// `phi(0) = sup |phi|`, `phi'(0) = sup |L phi| / 2` over the same time span.
pub fn focusing_contrast(config: &RunConfig) -> Results {
    let mut results = Results::new("focusing-contrast").with_config(config);
    let Some(k) = config.nonlinearity.exponent().filter(|_| config.nonlinearity.is_focusing()) else {
        results.checks.push(Check::holds(
            "focusing power nonlinearity",
            false,
            format!("{} is not a focusing power", config.nonlinearity.label()),
        ));
        return results;
    };
    let target = config.energy_target.unwrap_or(DEFAULT_ENERGY_TARGET);
    let cfg = RunConfig {
        energy_target: Some(target),
        ..config.clone()
    };
    let delta = cfg.delta;
    let horizon = cfg.u_end - cfg.u0;
    let base = cfg.resolution();
    let fine = Resolution::new(2 * base.n_u, 2 * base.n_ub, base.n_theta);

    let mut details = json!({ "energy_target": target, "delta": delta, "horizon": horizon });
    let mut sups = Vec::new();
    for (label, res) in [("base", base), ("refined", fine)] {
        match run_at(&cfg, delta, res) {
            Err(e) => results.failures.push(RunFailure {
                delta,
                message: format!("{label}: {e}"),
            }),
            Ok(data) => match &data.state {
                Err(e) => {
                    results.failures.push(RunFailure {
                        delta,
                        message: format!("{label}: {e}"),
                    });
                    results.checks.push(Check::holds(
                        format!("pulse completes slab ({label})"),
                        false,
                        "no blow-up up to u_end",
                    ));
                }
                Ok(state) => {
                    let energy = conserved_energy_flux(state);
                    let sup = state.max_abs();
                    results.checks.push(Check::holds(
                        format!("pulse completes slab ({label})"),
                        true,
                        "no blow-up up to u_end",
                    ));
                    results.checks.push(Check::at_least(format!("data energy ({label})"), energy.kinetic, target));
                    details[label] = json!({
                        "amplitude": data.amplitude,
                        "kinetic_flux": energy.kinetic,
                        "potential": energy.potential,
                        "sup_phi": sup,
                    });
                    sups.push(sup);
                    if label == "base" {
                        let (phi0, l0) = data_sups(state);
                        let ode = integrate_power_ode(k, phi0, 0.5 * l0, horizon, ODE_RTOL);
                        results.checks.push(Check::holds(
                            "ode baseline blows up before the horizon",
                            ode.blow_up_time.is_some_and(|t| t < horizon),
                            format!("blow-up time < {horizon}"),
                        ));
                        details["ode_baseline"] = json!({ "phi0": phi0, "dphi0": 0.5 * l0, "outcome": ode });
                        let one = kinetic_flux_at(&cfg, delta, res, data.amplitude);
                        let two = kinetic_flux_at(&cfg, delta, res, 2.0 * data.amplitude);
                        if let (Ok(one), Ok(two)) = (one, two) {
                            results.checks.push(Check::at_most(
                                "flux quadruples under amplitude doubling",
                                (two / one / 4.0 - 1.0).abs(),
                                0.01,
                            ));
                        }
                        if let Ok(report) = shortpulse::assemble_norm_report(state) {
                            results.norms.push(NormTable { delta, report });
                        }
                    }
                }
            },
        }
    }
    if let [a, b] = sups[..] {
        results
            .checks
            .push(Check::at_most("sup_phi resolution change", (a - b).abs() / b, RESOLUTION_TOLERANCE));
    }

    let oracle = integrate_power_ode(3, 1.0, 0.0, 10.0, ODE_RTOL);
    let exact = blow_up_time_quadrature(3, 1.0, 0.0).unwrap_or(f64::NAN);
    let rel = oracle.blow_up_time.map_or(f64::INFINITY, |t| (t - exact).abs() / exact);
    results.checks.push(Check::at_most("ode oracle k=3 blow-up time", rel, ODE_ORACLE_TOLERANCE));
    details["ode_oracle"] = json!({ "integrated": oracle.blow_up_time, "quadrature": exact });
    results.details = details;
    results
}
