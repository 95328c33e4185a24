//! Convergence order of the diamond scheme against exact solutions.

use std::sync::Arc;

use serde::Serialize;
use serde_json::json;
use shortpulse::{
    build_grid, evolve, evolve_with_data, Dimension, Grid, Nonlinearity, PulseSpec, Resolution, SharedForcing,
    State, Symmetry,
};

use crate::config::RunConfig;
use crate::fit::least_squares_slope;
use crate::report::{Check, Results};

/// Order the scheme is designed to reach.
pub const DESIGN_ORDER: f64 = 2.0;

/// Angular mode of the manufactured 2D solution.
pub const MMS_MODE: u32 = 2;

const MMS_THETA: usize = 16;

/// Errors of one measured quantity over dyadic resolutions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderRow {
    pub case: String,
    pub quantity: String,
    /// `ub` cells of each level.
    pub cells: Vec<usize>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log (1 / cells)`.
    pub order: Option<f64>,
}

impl OrderRow {
    fn new(case: &str, quantity: &str, cells: &[usize], errors: Vec<f64>) -> Self {
        let finite = errors.iter().all(|e| e.is_finite() && *e > 0.0);
        let order = finite
            .then(|| {
                let x: Vec<f64> = cells.iter().map(|&n| -(n as f64).ln()).collect();
                let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
                least_squares_slope(&x, &y)
            })
            .flatten();
        Self {
            case: case.into(),
            quantity: quantity.into(),
            cells: cells.to_vec(),
            errors,
            order,
        }
    }
}

fn levels(base: usize, count: usize) -> Vec<usize> {
    (0..count).map(|k| base << k).collect()
}

/// Exact linear spherical wave: `r phi` is constant along ingoing rays.
/// Returns `(phi, L phi, Lbar phi)`.
pub fn dalembert_exact(pulse: &PulseSpec<f64>, u0: f64, u: f64, ub: f64) -> (f64, f64, f64) {
    let r = ub - u;
    let r0 = ub - u0;
    let f = pulse.value(ub, 0.0);
    let fp = pulse.frame_derivative(ub, 0.0, 1, 0).0;
    let psi = r0 * f;
    let dpsi = f + r0 * fp;
    (psi / r, dpsi / r - psi / (r * r), psi / (r * r))
}

fn max_error(grid: &Grid, computed: &[f64], exact: impl Fn(usize, usize, usize) -> f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..grid.nodes_u() {
        for j in 0..grid.nodes_ub() {
            for m in 0..grid.n_theta {
                worst = worst.max((computed[grid.index(i, j, m)] - exact(i, j, m)).abs());
            }
        }
    }
    worst
}

/// Linear 3D spherical evolution of the sine-power pulse compared with the
/// exact solution. The field itself is exact to rounding, so the orders are
/// measured on the frame derivatives.
pub fn dalembert_case(count: usize) -> shortpulse::Result<Vec<OrderRow>> {
    let (u0, u_end, delta) = (-4.0, -1.0, 0.5);
    let pulse = PulseSpec::sin4(delta);
    let cells = levels(16, count);
    let mut phi = Vec::new();
    let mut l = Vec::new();
    let mut lbar = Vec::new();
    for &n in &cells {
        let grid = build_grid(u0, u_end, delta, Resolution::new(3 * n, n, 1), Dimension::Three, Symmetry::Spherical)?;
        let s = evolve(&grid, &pulse, Nonlinearity::Linear, None)?;
        let exact = |i: usize, j: usize| dalembert_exact(&pulse, u0, grid.u(i), grid.ub(j));
        phi.push(max_error(&grid, &s.values, |i, j, _| exact(i, j).0));
        l.push(max_error(&grid, &s.frame.l_phi, |i, j, _| exact(i, j).1));
        lbar.push(max_error(&grid, &s.frame.lbar_phi, |i, j, _| exact(i, j).2));
    }
    let mut rows = vec![
        OrderRow::new("dalembert-3d", "L_phi", &cells, l),
        OrderRow::new("dalembert-3d", "Lbar_phi", &cells, lbar),
    ];
    let mut phi_row = OrderRow::new("dalembert-3d", "phi", &cells, phi);
    phi_row.order = None;
    rows.push(phi_row);
    Ok(rows)
}

/// `sin u sin ub cos(m theta)` and the forcing that makes it a solution of
/// `Box phi = N(phi) + F`.
pub fn manufactured(dim: Dimension, mode: u32, nonlinearity: Nonlinearity) -> (impl Fn(f64, f64, f64) -> f64 + Copy, SharedForcing<f64>) {
    let m = mode as f64;
    let exact = move |u: f64, ub: f64, th: f64| u.sin() * ub.sin() * (m * th).cos();
    let c = dim.radial_coefficient::<f64>();
    let forcing: SharedForcing<f64> = Arc::new(move |u: f64, ub: f64, th: f64| {
        let a = (m * th).cos();
        let r = ub - u;
        let mixed = u.cos() * ub.cos() * a;
        let l = u.sin() * ub.cos() * a;
        let lbar = u.cos() * ub.sin() * a;
        let angular = -m * m * u.sin() * ub.sin() * a;
        -mixed + c / r * (l - lbar) + angular / (r * r) - nonlinearity.eval(exact(u, ub, th))
    });
    (exact, forcing)
}

fn manufactured_run(dim: Dimension, mode: u32, nonlinearity: Nonlinearity, n: usize) -> shortpulse::Result<(Grid, State, f64)> {
    let (symmetry, n_theta) = match dim {
        Dimension::Three => (Symmetry::Spherical, 1),
        Dimension::Two => (Symmetry::FullAngular, MMS_THETA),
    };
    let grid = build_grid(-3.0, -1.0, 1.0, Resolution::new(2 * n, n, n_theta), dim, symmetry)?;
    let (exact, forcing) = manufactured(dim, mode, nonlinearity);
    let u0 = grid.u0;
    let s = evolve_with_data(&grid, |ub, th| exact(u0, ub, th), nonlinearity, Some(forcing))?;
    let err = max_error(&grid, &s.values, |i, j, m| exact(grid.u(i), grid.ub(j), grid.theta(m)));
    Ok((grid, s, err))
}

pub fn manufactured_case(dim: Dimension, nonlinearity: Nonlinearity, count: usize) -> shortpulse::Result<OrderRow> {
    let mode = if dim == Dimension::Two { MMS_MODE } else { 0 };
    let cells = levels(8, count);
    let errors = cells
        .iter()
        .map(|&n| manufactured_run(dim, mode, nonlinearity, n).map(|r| r.2))
        .collect::<shortpulse::Result<Vec<f64>>>()?;
    let case = match dim {
        Dimension::Three => "mms-3d",
        Dimension::Two => "mms-2d",
    };
    Ok(OrderRow::new(case, "phi", &cells, errors))
}

/// Largest `|phi|` of a zero-data unforced run at the coarsest level.
pub fn zero_case(config: &RunConfig) -> shortpulse::Result<f64> {
    let grid = config.grid_at(config.delta, Resolution::new(48, 16, config.resolution().n_theta))?;
    let pulse = config.pulse(config.delta)?.with_amplitude(0.0);
    Ok(evolve(&grid, &pulse, config.nonlinearity, None)?.max_abs())
}

fn nonlinearity_for(dim: Dimension, configured: Nonlinearity) -> Nonlinearity {
    match (dim, configured) {
        (Dimension::Three, Nonlinearity::ExpFocusing) => Nonlinearity::Power {
            k: 3,
            sign: shortpulse::Sign::Defocusing,
        },
        (_, nl) => nl,
    }
}

/// Runs every oracle case at `config.levels` dyadic resolutions and checks
/// the fitted orders against `2 +- order_tolerance`.
pub fn convergence_study(config: &RunConfig) -> Results {
    let mut results = Results::new("convergence").with_config(config);
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    match dalembert_case(config.levels) {
        Ok(r) => rows.extend(r),
        Err(e) => errors.push(("dalembert-3d", e.to_string())),
    }
    for dim in [Dimension::Two, Dimension::Three] {
        match manufactured_case(dim, nonlinearity_for(dim, config.nonlinearity), config.levels) {
            Ok(r) => rows.push(r),
            Err(e) => errors.push((if dim == Dimension::Two { "mms-2d" } else { "mms-3d" }, e.to_string())),
        }
    }
    let (lo, hi) = (DESIGN_ORDER - config.order_tolerance, DESIGN_ORDER + config.order_tolerance);
    for row in &rows {
        if row.quantity == "phi" && row.case == "dalembert-3d" {
            continue;
        }
        let name = format!("order {} {}", row.case, row.quantity);
        match row.order {
            Some(order) => results.checks.push(Check::within(name, order, lo, hi)),
            None => results.checks.push(Check::holds(name, false, "errors must be positive and finite")),
        }
    }
    if let Some(phi) = rows.iter().find(|r| r.case == "dalembert-3d" && r.quantity == "phi") {
        let worst = phi.errors.iter().cloned().fold(0.0, f64::max);
        results.checks.push(Check::at_most("dalembert-3d phi exact", worst, 1e-12));
    }
    match zero_case(config) {
        Ok(v) => results.checks.push(Check::at_most("zero solution", v, 0.0)),
        Err(e) => errors.push(("zero", e.to_string())),
    }
    for (case, message) in errors {
        results
            .checks
            .push(Check::holds(format!("run {case}"), false, format!("solver error: {message}")));
    }
    results.details = json!({ "rows": rows });
    results
}
