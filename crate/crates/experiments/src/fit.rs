//! Log-log slope fits of measured norms against their `delta` exponents.

use serde::Serialize;

/// Values at or below this are treated as numerically zero.
pub const NOISE_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    BoundRespected,
    Violated,
    Inconclusive,
    /// Zero by symmetry; excluded from fitting.
    StructurallyZero,
    /// A solver run of the sweep did not complete.
    Failed,
}

impl Verdict {
    /// Whether the verdict counts against the exit status.
    pub fn is_failure(self) -> bool {
        matches!(self, Verdict::Violated | Verdict::Failed)
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::BoundRespected => "bound-respected",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
            Verdict::StructurallyZero => "structurally-zero",
            Verdict::Failed => "failed",
        }
    }
}

/// How a measured series is judged against `norm <= C delta^p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FitRule {
    /// Slope must equal `p` within `tolerance` (closed-form data norms).
    Equality { tolerance: f64 },
    /// `max ratio / min ratio <= headroom` and `slope >= p - slope_tolerance`.
    Bounded { headroom: f64, slope_tolerance: f64 },
    /// `slope >= p - slope_tolerance` and no ratio exceeds `headroom` times
    /// the ratio at the largest delta. For quantities far below their bound.
    BoundDirection { headroom: f64, slope_tolerance: f64 },
}

impl FitRule {
    pub fn label(&self) -> &'static str {
        match self {
            FitRule::Equality { .. } => "equality",
            FitRule::Bounded { .. } => "bounded",
            FitRule::BoundDirection { .. } => "bound-direction",
        }
    }
}

/// One fitted quantity of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    pub quantity: String,
    pub exponent: f64,
    pub rule: FitRule,
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
    /// Least-squares slope of `log q` against `log delta`.
    pub slope: Option<f64>,
    /// `q / delta^p`.
    pub ratios: Vec<f64>,
    /// `max ratio / min ratio`.
    pub ratio_spread: Option<f64>,
    pub verdict: Verdict,
    pub note: String,
}

/// Least-squares slope of `y` against `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Slope of `log values` against `log deltas`.
pub fn log_log_slope(deltas: &[f64], values: &[f64]) -> Option<f64> {
    let x: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    least_squares_slope(&x, &y)
}

impl ScalingFit {
    /// Fits `values(deltas)` and applies `rule`. `deltas` must be ordered
    /// from largest to smallest.
    pub fn evaluate(quantity: &str, exponent: f64, rule: FitRule, deltas: &[f64], values: &[f64]) -> Self {
        let ratios: Vec<f64> = deltas.iter().zip(values).map(|(d, q)| q / d.powf(exponent)).collect();
        let mut fit = ScalingFit {
            quantity: quantity.to_string(),
            exponent,
            rule,
            deltas: deltas.to_vec(),
            values: values.to_vec(),
            slope: None,
            ratios,
            ratio_spread: None,
            verdict: Verdict::Inconclusive,
            note: String::new(),
        };
        if deltas.len() < 3 {
            fit.note = "fewer than 3 points".into();
            return fit;
        }
        if values.iter().all(|&v| v == 0.0) {
            fit.note = "identically zero".into();
            return fit;
        }
        if values.iter().any(|v| !v.is_finite() || *v <= NOISE_FLOOR) {
            fit.note = format!("value at or below the noise floor {NOISE_FLOOR:e}");
            return fit;
        }
        let slope = log_log_slope(deltas, values);
        fit.slope = slope;
        let (lo, hi) = fit
            .ratios
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
        fit.ratio_spread = Some(hi / lo);
        let Some(slope) = slope else {
            fit.note = "degenerate delta list".into();
            return fit;
        };
        let ok = match rule {
            FitRule::Equality { tolerance } => (slope - exponent).abs() <= tolerance,
            FitRule::Bounded {
                headroom,
                slope_tolerance,
            } => hi / lo <= headroom && slope >= exponent - slope_tolerance,
            FitRule::BoundDirection {
                headroom,
                slope_tolerance,
            } => {
                let first = fit.ratios[0];
                slope >= exponent - slope_tolerance && fit.ratios.iter().all(|&r| r <= headroom * first)
            }
        };
        fit.verdict = if ok { Verdict::BoundRespected } else { Verdict::Violated };
        fit
    }

    pub fn structurally_zero(quantity: &str, exponent: f64, rule: FitRule, deltas: &[f64]) -> Self {
        ScalingFit {
            quantity: quantity.to_string(),
            exponent,
            rule,
            deltas: deltas.to_vec(),
            values: vec![0.0; deltas.len()],
            slope: None,
            ratios: vec![0.0; deltas.len()],
            ratio_spread: None,
            verdict: Verdict::StructurallyZero,
            note: "vanishes by symmetry".into(),
        }
    }

    pub fn failed(quantity: &str, exponent: f64, rule: FitRule, deltas: &[f64], values: &[f64], note: String) -> Self {
        ScalingFit {
            quantity: quantity.to_string(),
            exponent,
            rule,
            deltas: deltas.to_vec(),
            values: values.to_vec(),
            slope: None,
            ratios: vec![f64::NAN; deltas.len()],
            ratio_spread: None,
            verdict: Verdict::Failed,
            note,
        }
    }
}
