//! The spatially homogeneous comparison problem `phi'' = |phi|^{k-1} phi`.

use serde::Serialize;

/// `|phi|` at which the integration stops and the blow-up time is extrapolated.
pub const ODE_BLOW_UP_THRESHOLD: f64 = 1e8;

const MAX_STEPS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OdeOutcome {
    /// Extrapolated blow-up time, if `|phi|` crossed the threshold before the horizon.
    pub blow_up_time: Option<f64>,
    /// Time the integration stopped.
    pub final_time: f64,
    pub final_value: f64,
    pub steps: usize,
}

fn power(phi: f64, k: u32) -> f64 {
    phi.abs().powi(k as i32 - 1) * phi
}

// Dormand-Prince 5(4) tableau; the right-hand side is autonomous, so the
// stage times are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `phi'' = |phi|^{k-1} phi` with adaptive Dormand-Prince steps
/// until `horizon` or until `|phi|` passes [`ODE_BLOW_UP_THRESHOLD`]. Near
/// blow-up `phi ~ c (T - t)^{-2/(k-1)}`, so `T` is extrapolated as
/// `t + 2 phi / ((k - 1) phi')`.
pub fn integrate_power_ode(k: u32, phi0: f64, dphi0: f64, horizon: f64, rtol: f64) -> OdeOutcome {
    assert!(k >= 2, "exponent must exceed 1");
    let f = |y: [f64; 2]| [y[1], power(y[0], k)];
    let atol = rtol * 1e-3;
    let mut t = 0.0;
    let mut y = [phi0, dphi0];
    let mut h = (horizon * 1e-3).min(1e-2);
    let mut steps = 0;
    while t < horizon && steps < MAX_STEPS {
        if y[0].abs() >= ODE_BLOW_UP_THRESHOLD {
            let remaining = 2.0 * y[0] / ((k - 1) as f64 * y[1]);
            return OdeOutcome {
                blow_up_time: (remaining > 0.0).then_some(t + remaining),
                final_time: t,
                final_value: y[0],
                steps,
            };
        }
        h = h.min(horizon - t);
        let mut stages = [[0.0; 2]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (p, a) in A[s].iter().enumerate().take(s) {
                ys[0] += h * a * stages[p][0];
                ys[1] += h * a * stages[p][1];
            }
            stages[s] = f(ys);
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for c in 0..2 {
            let mut e = 0.0;
            for s in 0..7 {
                y5[c] += h * B5[s] * stages[s][c];
                e += h * (B5[s] - B4[s]) * stages[s][c];
            }
            let scale = atol + rtol * y[c].abs().max(y5[c].abs());
            err = err.max((e / scale).abs());
        }
        if !err.is_finite() {
            h *= 0.2;
            continue;
        }
        if err <= 1.0 {
            t += h;
            y = y5;
            steps += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    OdeOutcome {
        blow_up_time: None,
        final_time: t,
        final_value: y[0],
        steps,
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn binomial(n: u32, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Blow-up time from the first integral
/// `phi'^2 = phi'(0)^2 + 2 (phi^{k+1} - phi(0)^{k+1}) / (k + 1)`,
/// `T = int_{phi(0)}^inf dphi / phi'`, for data that grows monotonically
/// (`phi(0) >= 0`, `phi'(0) >= 0`, not both zero). The substitutions
/// `phi = phi(0) + w^2`, `w = s / (1 - s)` give a smooth integrand on `[0, 1]`.
pub fn blow_up_time_quadrature(k: u32, phi0: f64, dphi0: f64) -> Option<f64> {
    if k < 2 || phi0 < 0.0 || dphi0 < 0.0 || (phi0 == 0.0 && dphi0 == 0.0) {
        return None;
    }
    let kp = k + 1;
    let integrand = |s: f64| {
        let w = s / (1.0 - s);
        let x = w * w;
        // (phi0 + x)^{k+1} - phi0^{k+1} without cancellation.
        let growth: f64 = (1..=kp)
            .map(|j| binomial(kp, j) * phi0.powi((kp - j) as i32) * x.powi(j as i32))
            .sum();
        let speed2 = dphi0 * dphi0 + 2.0 * growth / kp as f64;
        2.0 * w / speed2.sqrt() / ((1.0 - s) * (1.0 - s))
    };
    let rule = gauss_legendre(20);
    let panels = 400;
    let width = 1.0 / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * width;
        for &(x, w) in &rule {
            total += 0.5 * width * w * integrand(mid + 0.5 * width * x);
        }
    }
    Some(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Complete elliptic integral of the first kind via the arithmetic-geometric mean.
    fn elliptic_k(modulus: f64) -> f64 {
        let (mut a, mut b) = (1.0f64, (1.0 - modulus * modulus).sqrt());
        for _ in 0..40 {
            let (an, bn) = (0.5 * (a + b), (a * b).sqrt());
            a = an;
            b = bn;
        }
        std::f64::consts::PI / (2.0 * a)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(5);
        let s: f64 = rule.iter().map(|(x, w)| w * x.powi(8)).sum();
        assert_relative_eq!(s, 2.0 / 9.0, max_relative = 1e-14);
        let total: f64 = rule.iter().map(|(_, w)| w).sum();
        assert_relative_eq!(total, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn cubic_quadrature_matches_the_elliptic_integral() {
        let t = blow_up_time_quadrature(3, 1.0, 0.0).unwrap();
        assert_relative_eq!(t, elliptic_k(std::f64::consts::FRAC_1_SQRT_2), max_relative = 1e-12);
    }

    #[test]
    fn cubic_integration_matches_the_quadrature() {
        let out = integrate_power_ode(3, 1.0, 0.0, 10.0, 1e-10);
        let t = out.blow_up_time.unwrap();
        assert_relative_eq!(t, 1.854_074_677_301_372, max_relative = 1e-6);
    }

    #[test]
    fn quadratic_blow_up_from_rest_at_zero_velocity() {
        // phi'' = phi^2 from phi = 1: T = int_1^inf dphi / sqrt(2 (phi^3 - 1) / 3).
        let q = blow_up_time_quadrature(2, 1.0, 0.0).unwrap();
        let ode = integrate_power_ode(2, 1.0, 0.0, 10.0, 1e-10).blow_up_time.unwrap();
        assert_relative_eq!(q, ode, max_relative = 1e-6);
    }

    #[test]
    fn pure_velocity_data() {
        // phi(0) = 0, phi'(0) = 1, k = 3: T = int_0^inf dphi / sqrt(1 + phi^4 / 2).
        let q = blow_up_time_quadrature(3, 0.0, 1.0).unwrap();
        let ode = integrate_power_ode(3, 0.0, 1.0, 10.0, 1e-10).blow_up_time.unwrap();
        assert_relative_eq!(q, ode, max_relative = 1e-6);
    }

    #[test]
    fn short_horizon_reports_no_blow_up() {
        let out = integrate_power_ode(3, 1.0, 0.0, 1.0, 1e-10);
        assert_eq!(out.blow_up_time, None);
        assert_relative_eq!(out.final_time, 1.0, max_relative = 1e-12);
        assert!(out.final_value > 1.0);
    }

    #[test]
    fn rest_state_has_no_quadrature() {
        assert_eq!(blow_up_time_quadrature(3, 0.0, 0.0), None);
        assert_eq!(blow_up_time_quadrature(3, -1.0, 0.0), None);
    }
}
