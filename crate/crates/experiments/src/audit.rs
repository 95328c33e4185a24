//! Sobolev-inequality ratios across a sweep and the energy-identity ledger.

use rayon::prelude::*;
use serde_json::json;
use shortpulse::{energy_identity_audit, sobolev_check, Lemma, Multiplier, Resolution, SobolevAudit, State};

use crate::config::RunConfig;
use crate::report::{Check, Results, RunFailure};
use crate::run::run_at;

/// Residual reduction under one refinement that still counts as first order.
pub const MIN_RESIDUAL_REDUCTION: f64 = 1.8;

/// Residuals below this fraction of the ledger scale are at rounding level.
const ROUNDING_RESIDUAL: f64 = 1e-12;

fn refined(res: Resolution) -> Resolution {
    Resolution::new(2 * res.n_u, 2 * res.n_ub, res.n_theta)
}

fn audits(state: &State, lemmas: &[Lemma]) -> shortpulse::Result<Vec<SobolevAudit<f64>>> {
    lemmas.iter().map(|&l| sobolev_check(state, l)).collect()
}

type AuditPair = (Vec<SobolevAudit<f64>>, Vec<SobolevAudit<f64>>);

fn audit_delta(config: &RunConfig, delta: f64, lemmas: &[Lemma]) -> Result<AuditPair, String> {
    let one = |res: Resolution| -> Result<Vec<SobolevAudit<f64>>, String> {
        let data = run_at(config, delta, res).map_err(|e| e.to_string())?;
        let state = data.state.map_err(|e| e.to_string())?;
        audits(&state, lemmas).map_err(|e| e.to_string())
    };
    let base = config.resolution();
    Ok((one(base)?, one(refined(base))?))
}

fn sobolev_part(config: &RunConfig, results: &mut Results) -> serde_json::Value {
    let lemmas = Lemma::for_dimension(config.dim);
    let outcomes: Vec<(f64, Result<AuditPair, String>)> = config
        .delta_list
        .par_iter()
        .map(|&d| (d, audit_delta(config, d, &lemmas)))
        .collect();
    let mut rows = Vec::new();
    for (li, lemma) in lemmas.iter().enumerate() {
        let mut base_ratios = Vec::new();
        let mut worst_change = 0.0f64;
        let mut violations = 0;
        let mut per_delta = Vec::new();
        for (delta, outcome) in &outcomes {
            let Ok((base, fine)) = outcome else { continue };
            let (b, f) = (&base[li], &fine[li]);
            let change = (b.worst_ratio - f.worst_ratio).abs() / f.worst_ratio;
            worst_change = worst_change.max(change);
            violations += b.violations + f.violations;
            base_ratios.push(b.worst_ratio);
            per_delta.push(json!({
                "delta": delta,
                "worst_ratio": b.worst_ratio,
                "refined_worst_ratio": f.worst_ratio,
                "relative_change": change,
                "parts": b.parts.iter().map(|p| json!({
                    "label": p.label,
                    "worst_ratio": p.worst_ratio,
                    "u": p.at_u,
                    "ub": p.at_ub,
                })).collect::<Vec<_>>(),
            }));
        }
        let finite = !base_ratios.is_empty() && base_ratios.iter().all(|r| r.is_finite());
        results
            .checks
            .push(Check::holds(format!("{lemma} finite"), finite && violations == 0, "finite ratios, no violations"));
        results.checks.push(Check::at_most(
            format!("{lemma} refinement change"),
            worst_change,
            config.refinement_tolerance,
        ));
        let hi = base_ratios.iter().cloned().fold(0.0, f64::max);
        let lo = base_ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        results
            .checks
            .push(Check::at_most(format!("{lemma} delta spread"), spread, config.headroom));
        rows.push(json!({ "lemma": lemma.label(), "runs": per_delta }));
    }
    for (delta, outcome) in outcomes {
        if let Err(message) = outcome {
            results.failures.push(RunFailure { delta, message });
        }
    }
    json!(rows)
}

fn energy_part(config: &RunConfig, results: &mut Results) -> serde_json::Value {
    let delta = config.delta;
    let base = config.resolution();
    let states: Vec<Result<State, String>> = [base, refined(base)]
        .par_iter()
        .map(|&res| {
            let data = run_at(config, delta, res).map_err(|e| e.to_string())?;
            data.state.map_err(|e| e.to_string())
        })
        .collect();
    let (coarse, fine) = match (&states[0], &states[1]) {
        (Ok(a), Ok(b)) => (a, b),
        (a, b) => {
            for message in [a, b].into_iter().filter_map(|s| s.as_ref().err()) {
                results.failures.push(RunFailure {
                    delta,
                    message: message.clone(),
                });
            }
            return json!([]);
        }
    };
    let (u_star, ub_star) = (config.u_end, delta);
    let mut ledgers = Vec::new();
    for x in Multiplier::ALL {
        let pair = energy_identity_audit(coarse, x, u_star, ub_star)
            .and_then(|a| Ok((a, energy_identity_audit(fine, x, u_star, ub_star)?)));
        let (a, b) = match pair {
            Ok(p) => p,
            Err(e) => {
                results.checks.push(Check::holds(format!("energy {} ledger", x.label()), false, e.to_string()));
                continue;
            }
        };
        results
            .checks
            .push(Check::at_most(format!("energy {} relative residual", x.label()), a.relative_residual, config.energy_tolerance));
        let rounding = a.residual.abs() <= ROUNDING_RESIDUAL * a.scale;
        let reduction = if rounding { f64::INFINITY } else { a.residual.abs() / b.residual.abs() };
        results
            .checks
            .push(Check::at_least(format!("energy {} residual reduction", x.label()), reduction, MIN_RESIDUAL_REDUCTION));
        let ledger = |l: &shortpulse::Ledger| {
            json!({
                "flux_out": l.flux_out,
                "flux_in": l.flux_in,
                "initial_flux": l.initial_flux,
                "bulk_k": l.bulk_k,
                "bulk_source": l.bulk_source,
                "residual": l.residual,
                "scale": l.scale,
                "relative_residual": l.relative_residual,
            })
        };
        ledgers.push(json!({
            "multiplier": x.label(),
            "u_star": u_star,
            "ub_star": ub_star,
            "base": ledger(&a),
            "refined": ledger(&b),
            "residual_reduction": reduction,
        }));
    }
    json!(ledgers)
}

/// Sobolev ratios at base and doubled resolution for every pulse width of
/// the sweep, and the energy ledgers for both null multipliers at `delta`.
pub fn sobolev_audit(config: &RunConfig) -> Results {
    let mut results = Results::new("sobolev-audit").with_config(config);
    let sobolev = sobolev_part(config, &mut results);
    let energy = energy_part(config, &mut results);
    results.details = json!({ "sobolev": sobolev, "energy": energy });
    results
}
