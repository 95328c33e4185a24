//! Single evolutions driven by a [`RunConfig`].

use shortpulse::{
    conserved_energy_flux, evolve, Error, FieldState, Grid, Nonlinearity, Pulse, Resolution, State,
};

use crate::config::RunConfig;

/// One evolution at a given pulse width.
#[derive(Debug)]
pub struct RunData {
    pub delta: f64,
    pub amplitude: f64,
    pub grid: Grid,
    pub pulse: Pulse,
    pub state: Result<State, Error>,
}

impl RunData {
    pub fn failure(&self) -> Option<String> {
        self.state.as_ref().err().map(|e| e.to_string())
    }
}

/// Kinetic flux through `C_{u0}` of the configured profile at the given
/// amplitude. Only the data enters, so a two-row grid suffices.
pub fn kinetic_flux_at(config: &RunConfig, delta: f64, resolution: Resolution, amplitude: f64) -> shortpulse::Result<f64> {
    let mut res = resolution;
    res.n_u = 2;
    let grid = config.grid_at(delta, res)?;
    let pulse = config.pulse(delta)?.with_amplitude(amplitude);
    let state = evolve(&grid, &pulse, Nonlinearity::Linear, None)?;
    Ok(conserved_energy_flux(&state).kinetic)
}

pub fn unit_kinetic_flux(config: &RunConfig, delta: f64, resolution: Resolution) -> shortpulse::Result<f64> {
    kinetic_flux_at(config, delta, resolution, 1.0)
}

/// Configured amplitude, or the smallest one whose kinetic data flux
/// reaches `energy_target`.
pub fn select_amplitude(config: &RunConfig, delta: f64, resolution: Resolution) -> shortpulse::Result<f64> {
    match config.energy_target {
        None => Ok(config.amplitude),
        Some(target) => {
            let unit = unit_kinetic_flux(config, delta, resolution)?;
            if unit <= 0.0 {
                return Err(Error::InvalidPulse("profile carries no energy".into()));
            }
            Ok((target / unit).sqrt() * (1.0 + 1e-12))
        }
    }
}

pub fn run_at(config: &RunConfig, delta: f64, resolution: Resolution) -> shortpulse::Result<RunData> {
    let grid = config.grid_at(delta, resolution)?;
    let amplitude = select_amplitude(config, delta, resolution)?;
    let pulse = config.pulse(delta)?.with_amplitude(amplitude);
    let state = evolve(&grid, &pulse, config.nonlinearity, None);
    Ok(RunData {
        delta,
        amplitude,
        grid,
        pulse,
        state,
    })
}

pub fn run(config: &RunConfig, delta: f64) -> shortpulse::Result<RunData> {
    run_at(config, delta, config.resolution())
}

/// Largest `|phi|` on the ingoing cone `ub = 0`.
pub fn huygens_defect(state: &FieldState<f64>) -> f64 {
    let g = &state.grid;
    let mut worst = 0.0f64;
    for i in 0..g.nodes_u() {
        for v in &state.values[g.block(i, 0)] {
            worst = worst.max(v.abs());
        }
    }
    worst
}

/// Largest `|q|` on the last ingoing cone `ub = delta`.
pub fn sup_on_last_ingoing_cone(state: &FieldState<f64>, field: &[f64]) -> f64 {
    let g = &state.grid;
    let j = g.n_ub;
    let mut worst = 0.0f64;
    for i in 0..g.nodes_u() {
        for v in &field[g.block(i, j)] {
            worst = worst.max(v.abs());
        }
    }
    worst
}
