//! Double-null characteristic solver for semilinear wave equations
//! `Box phi = +-|phi|^{k-1} phi` (and `Box phi = -phi e^{phi^2}` in 2+1
//! dimensions) with short-pulse data, plus the norm, Sobolev and energy
//! machinery used to measure how the solution scales with the pulse
//! width `delta`.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

pub mod angular;
pub mod energy;
pub mod error;
pub mod evolve;
pub mod geometry;
pub mod nonlinearity;
pub mod norms;
pub mod pulse;
pub mod scalar;
pub mod sobolev;
pub mod state;

pub use energy::{
    conserved_energy_flux, deformation_current, energy_identity_audit, stress_null_components, EnergyLedger,
    InitialEnergy, Multiplier, StressComponents,
};
pub use error::{Error, Result};
pub use evolve::{evolve, evolve_with_data, null_frame_rhs, reduced_rhs, step_diamond, Cell, CellStencil};
pub use geometry::{build_grid, Dimension, FrameSample, NullGrid, Resolution, SphereMeasure, Symmetry};
pub use nonlinearity::{Nonlinearity, Sign};
pub use norms::{
    assemble_norm_report, cone_norm_ingoing, cone_norm_outgoing, sphere_norm, NormColumn, NormReport, NormRow,
    SphereExponent,
};
pub use pulse::{ingoing_data, short_pulse_value, verify_data_bounds, DataBoundsReport, Profile, PulseSpec};
pub use scalar::Real;
pub use sobolev::{sobolev_check, Lemma, SobolevAudit};
pub use state::{CommutatorPair, FieldState, Forcing, Quantity, SharedForcing};

pub type Grid = NullGrid<f64>;
pub type Grid32 = NullGrid<f32>;
pub type Pulse = PulseSpec<f64>;
pub type Pulse32 = PulseSpec<f32>;
pub type State = FieldState<f64>;
pub type State32 = FieldState<f32>;
pub type Report = NormReport<f64>;
pub type Ledger = EnergyLedger<f64>;
