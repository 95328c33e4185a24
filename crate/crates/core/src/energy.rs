//! Null-frame stress components, deformation currents and the integrated
//! energy identity on the characteristic slab.
//!
//! With the multiplier `X` in `{L, Lbar}` and `Phi = Box phi = N(phi) + F`,
//! integrating `div P^X = K^X + Phi X phi` over the slab
//! `D = [u0, u*] x [0, ub*]` (volume `2 du dub dmu`) gives
//!
//! ```text
//! int_{C_u*} T(X, L) + int_{Cbar_ub*} T(X, Lbar)
//!     = int_{C_u0} T(X, L) - iint_D (K^X + Phi X phi)
//! ```
//!
//! where the cone integrals are `int dub int_S` and `int du int_S`. The
//! ledger stores the bulk terms with that minus sign folded in.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{Dimension, FrameSample, NullGrid};
use crate::scalar::Real;
use crate::state::{FieldState, Quantity};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Multiplier {
    L,
    Lbar,
}

impl Multiplier {
    pub const ALL: [Multiplier; 2] = [Multiplier::L, Multiplier::Lbar];

    pub fn label(self) -> &'static str {
        match self {
            Multiplier::L => "L",
            Multiplier::Lbar => "Lbar",
        }
    }
}

impl fmt::Display for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Multiplier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L" => Ok(Multiplier::L),
            "Lbar" => Ok(Multiplier::Lbar),
            _ => Err(Error::Unsupported(format!("unknown multiplier `{s}`"))),
        }
    }
}

/// `T(L,L) = |L phi|^2`, `T(Lbar,Lbar) = |Lbar phi|^2`, `T(L,Lbar) = |nabla phi|^2`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct StressComponents<T> {
    pub ll: T,
    pub lbar_lbar: T,
    pub l_lbar: T,
}

impl<T: Real> StressComponents<T> {
    pub fn from_sample(s: &FrameSample<T>) -> Self {
        Self {
            ll: s.l_phi * s.l_phi,
            lbar_lbar: s.lbar_phi * s.lbar_phi,
            l_lbar: s.slashed_nabla_phi * s.slashed_nabla_phi,
        }
    }

    /// `T(X, L)`.
    pub fn along_l(&self, x: Multiplier) -> T {
        match x {
            Multiplier::L => self.ll,
            Multiplier::Lbar => self.l_lbar,
        }
    }

    /// `T(X, Lbar)`.
    pub fn along_lbar(&self, x: Multiplier) -> T {
        match x {
            Multiplier::L => self.l_lbar,
            Multiplier::Lbar => self.lbar_lbar,
        }
    }
}

/// Stress components at every angular sample of the sphere through `(u, ub)`.
pub fn stress_null_components<T: Real>(state: &FieldState<T>, u: T, ub: T) -> Result<Vec<StressComponents<T>>> {
    let (i, j) = state.grid.node_at(u, ub)?;
    Ok((0..state.grid.n_theta)
        .map(|m| StressComponents::from_sample(&state.frame_sample(i, j, m)))
        .collect())
}

/// `K^L = r^-1 L phi Lbar phi` in 3D and `(2r)^-1 (|nabla phi|^2 + L phi Lbar phi)`
/// in 2D; `K^Lbar = -K^L`.
pub fn deformation_density<T: Real>(s: &FrameSample<T>, r: T, dim: Dimension, x: Multiplier) -> T {
    let k_l = match dim {
        Dimension::Three => s.l_phi * s.lbar_phi / r,
        Dimension::Two => {
            (s.slashed_nabla_phi * s.slashed_nabla_phi + s.l_phi * s.lbar_phi) / (T::lit(2.0) * r)
        }
    };
    match x {
        Multiplier::L => k_l,
        Multiplier::Lbar => -k_l,
    }
}

/// `K^X` at every angular sample of the sphere through `(u, ub)`.
pub fn deformation_current<T: Real>(state: &FieldState<T>, x: Multiplier, u: T, ub: T) -> Result<Vec<T>> {
    let g = &state.grid;
    let (i, j) = g.node_at(u, ub)?;
    let r = g.r(i, j);
    Ok((0..g.n_theta)
        .map(|m| deformation_density(&state.frame_sample(i, j, m), r, g.dim, x))
        .collect())
}

/// The five terms of the energy identity on `[u0, u*] x [0, ub*]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyLedger<T> {
    pub multiplier: Multiplier,
    pub u_star: T,
    pub ub_star: T,
    /// `int_{C_u*} T(X, L)`.
    pub flux_out: T,
    /// `int_{Cbar_ub*} T(X, Lbar)`.
    pub flux_in: T,
    /// `int_{C_u0} T(X, L)`.
    pub initial_flux: T,
    /// `-iint K^X`.
    pub bulk_k: T,
    /// `-iint Phi X phi`.
    pub bulk_source: T,
    /// `flux_out + flux_in - initial_flux - bulk_k - bulk_source`.
    pub residual: T,
    /// Largest term, with the bulk integrals taken of absolute values so that
    /// cancelling bulk contributions still set the scale.
    pub scale: T,
    /// `|residual| / scale`.
    pub relative_residual: T,
}

fn trapezoid_weight(k: usize, last: usize) -> f64 {
    if k == 0 || k == last {
        0.5
    } else {
        1.0
    }
}

fn sphere_integral<T: Real>(grid: &NullGrid<T>, i: usize, j: usize, f: impl Fn(usize) -> T) -> T {
    let w = grid.sphere_area(grid.r(i, j)) / T::from_count(grid.n_theta);
    w * (0..grid.n_theta).map(f).sum::<T>()
}

/// Evaluates every term of the energy identity by trapezoid quadrature.
pub fn energy_identity_audit<T: Real>(
    state: &FieldState<T>,
    x: Multiplier,
    u_star: T,
    ub_star: T,
) -> Result<EnergyLedger<T>> {
    let g = &state.grid;
    let (ie, je) = g.node_at(u_star, ub_star)?;
    let stress = |i: usize, j: usize, m: usize| StressComponents::from_sample(&state.frame_sample(i, j, m));

    let mut flux_out = T::zero();
    let mut initial_flux = T::zero();
    for j in 0..=je {
        let w = T::lit(trapezoid_weight(j, je)) * g.h_ub();
        flux_out = flux_out + w * sphere_integral(g, ie, j, |m| stress(ie, j, m).along_l(x));
        initial_flux = initial_flux + w * sphere_integral(g, 0, j, |m| stress(0, j, m).along_l(x));
    }
    let mut flux_in = T::zero();
    for i in 0..=ie {
        let w = T::lit(trapezoid_weight(i, ie)) * g.h_u();
        flux_in = flux_in + w * sphere_integral(g, i, je, |m| stress(i, je, m).along_lbar(x));
    }

    let mut k_int = T::zero();
    let mut src_int = T::zero();
    let mut k_abs = T::zero();
    let mut src_abs = T::zero();
    let two = T::lit(2.0);
    let per_node = T::from_count(g.n_theta).recip();
    for i in 0..=ie {
        for j in 0..=je {
            let r = g.r(i, j);
            let (u, ub) = (g.u(i), g.ub(j));
            let w = two
                * T::lit(trapezoid_weight(i, ie) * trapezoid_weight(j, je))
                * g.h_u()
                * g.h_ub()
                * g.sphere_area(r)
                * per_node;
            for m in 0..g.n_theta {
                let sample = state.frame_sample(i, j, m);
                let k = deformation_density(&sample, r, g.dim, x);
                let forcing = state
                    .forcing
                    .as_ref()
                    .map_or(T::zero(), |f| f.eval(u, ub, g.theta(m)));
                let x_phi = match x {
                    Multiplier::L => sample.l_phi,
                    Multiplier::Lbar => sample.lbar_phi,
                };
                let s = (state.nonlinearity.eval(sample.phi) + forcing) * x_phi;
                k_int = k_int + w * k;
                src_int = src_int + w * s;
                k_abs = k_abs + w * k.abs();
                src_abs = src_abs + w * s.abs();
            }
        }
    }
    let bulk_k = -k_int;
    let bulk_source = -src_int;
    let residual = flux_out + flux_in - initial_flux - bulk_k - bulk_source;
    let scale = [flux_out, flux_in, initial_flux, k_abs, src_abs]
        .iter()
        .fold(T::zero(), |a, v| a.max(v.abs()));
    let relative_residual = if scale > T::zero() {
        residual.abs() / scale
    } else {
        T::zero()
    };
    Ok(EnergyLedger {
        multiplier: x,
        u_star,
        ub_star,
        flux_out,
        flux_in,
        initial_flux,
        bulk_k,
        bulk_source,
        residual,
        scale,
        relative_residual,
    })
}

/// Energy carried by the data on `C_u0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialEnergy<T> {
    /// `int_{C_u0} T(d_t, L) = ½ int (|L phi|^2 + |nabla phi|^2)`.
    pub kinetic: T,
    /// `int_{C_u0} V(phi)` with `V' = N`, `V(0) = 0`.
    pub potential: T,
}

impl<T: Real> InitialEnergy<T> {
    pub fn total(&self) -> T {
        self.kinetic + self.potential
    }
}

pub fn conserved_energy_flux<T: Real>(state: &FieldState<T>) -> InitialEnergy<T> {
    let g = &state.grid;
    let nabla = state.quantity(Quantity::SlashedNablaPhi);
    let last = g.n_ub;
    let mut kinetic = T::zero();
    let mut potential = T::zero();
    for j in 0..=last {
        let w = T::lit(trapezoid_weight(j, last)) * g.h_ub();
        let base = g.index(0, j, 0);
        kinetic = kinetic
            + w * sphere_integral(g, 0, j, |m| {
                let l = state.frame.l_phi[base + m];
                let n = nabla[base + m];
                l * l + n * n
            });
        potential = potential + w * sphere_integral(g, 0, j, |m| state.nonlinearity.potential(state.values[base + m]));
    }
    InitialEnergy {
        kinetic: T::lit(0.5) * kinetic,
        potential,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, Resolution, Symmetry};
    use crate::nonlinearity::Nonlinearity;

    fn sample(l: f64, lb: f64, nabla: f64) -> FrameSample<f64> {
        FrameSample {
            phi: 0.0,
            l_phi: l,
            lbar_phi: lb,
            omega_phi: 0.0,
            slashed_nabla_phi: nabla,
        }
    }

    #[test]
    fn stress_components_are_squares() {
        let s = StressComponents::from_sample(&sample(2.0, -1.0, 0.5));
        assert_eq!(s.ll, 4.0);
        assert_eq!(s.lbar_lbar, 1.0);
        assert_eq!(s.l_lbar, 0.25);
        assert_eq!(s.along_l(Multiplier::L), 4.0);
        assert_eq!(s.along_lbar(Multiplier::Lbar), 1.0);
    }

    #[test]
    fn deformation_current_values() {
        let s = sample(1.0, 3.0, 0.0);
        assert_eq!(deformation_density(&s, 2.0, Dimension::Three, Multiplier::L), 1.5);
        assert_eq!(deformation_density(&s, 2.0, Dimension::Three, Multiplier::Lbar), -1.5);
        assert_eq!(deformation_density(&s, 2.0, Dimension::Two, Multiplier::L), 0.75);
        let t = sample(1.0, 3.0, 2.0);
        assert_eq!(deformation_density(&t, 2.0, Dimension::Two, Multiplier::L), 1.75);
    }

    #[test]
    fn zero_field_ledger_is_zero() {
        let g = build_grid(-3.0, -1.0, 0.1, Resolution::new(6, 6, 1), Dimension::Three, Symmetry::Spherical).unwrap();
        let n = g.node_count();
        let s = FieldState::from_values(g, vec![0.0; n], Nonlinearity::focusing(3).unwrap(), None);
        for x in Multiplier::ALL {
            let l = energy_identity_audit(&s, x, -1.0, 0.1).unwrap();
            assert_eq!(l.residual, 0.0);
            assert_eq!(l.relative_residual, 0.0);
        }
        let e = conserved_energy_flux(&s);
        assert_eq!(e.kinetic, 0.0);
        assert_eq!(e.potential, 0.0);
    }

    #[test]
    fn multiplier_labels_round_trip() {
        for x in Multiplier::ALL {
            assert_eq!(x.label().parse::<Multiplier>().unwrap(), x);
        }
    }
}
