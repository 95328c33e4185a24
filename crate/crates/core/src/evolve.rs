//! Null-parallelogram marching of `Box phi = N(phi) + F` through the slab.
//!
//! Each cell of the `(u, ub)` plane is updated from its south, west and
//! east corners:
//!
//! ```text
//!            N (i+1, j+1)
//!           / \
//!  W (i+1,j)   E (i, j+1)
//!           \ /
//!            S (i, j)
//! ```
//!
//! `phi_N = phi_W + phi_E - phi_S + h_u h_ub RHS(centre)`, where RHS is
//! the mixed derivative `d_u d_ub phi` from the null-frame form of the
//! equation. In spherical mode the update runs on `psi = r phi`, for
//! which `d_u d_ub psi = -r (N(psi/r) + F)`.

use crate::angular::AngularOps;
use crate::error::{Error, Result};
use crate::geometry::{Dimension, NullGrid};
use crate::nonlinearity::Nonlinearity;
use crate::pulse::PulseSpec;
use crate::scalar::Real;
use crate::state::{FieldState, SharedForcing};

/// `|phi|` above this aborts the evolution as a blow-up.
pub const BLOW_UP_THRESHOLD: f64 = 1e8;

/// Centre values entering the null-frame right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CellStencil<T> {
    pub phi: T,
    /// `L phi = d phi / d ub`.
    pub l_phi: T,
    /// `Lbar phi = d phi / d u`.
    pub lbar_phi: T,
    /// `d^2 phi / d theta^2` on the unit circle.
    pub angular_laplacian: T,
    /// External source `F`.
    pub forcing: T,
}

/// `d_u d_ub phi = r^-2 Lap_theta phi + c r^-1 (L phi - Lbar phi) - N(phi) - F`,
/// with `c = 1` in 3D and `c = ½` in 2D. `None` signals overflow.
pub fn null_frame_rhs<T: Real>(
    stencil: &CellStencil<T>,
    r: T,
    dim: Dimension,
    nonlinearity: &Nonlinearity,
) -> Option<T> {
    let c: T = dim.radial_coefficient();
    let v = stencil.angular_laplacian / (r * r) + c * (stencil.l_phi - stencil.lbar_phi) / r
        - nonlinearity.eval(stencil.phi)
        - stencil.forcing;
    v.is_finite().then_some(v)
}

/// Spherical reduction: `d_u d_ub psi = -r (N(psi / r) + F)` for `psi = r phi`.
pub fn reduced_rhs<T: Real>(psi: T, r: T, nonlinearity: &Nonlinearity, forcing: T) -> Option<T> {
    let v = -r * (nonlinearity.eval(psi / r) + forcing);
    v.is_finite().then_some(v)
}

/// Spacings of one null parallelogram.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell<T> {
    pub h_u: T,
    pub h_ub: T,
}

impl<T: Real> Cell<T> {
    pub fn area(&self) -> T {
        self.h_u * self.h_ub
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepError {
    NonFinite,
    /// The corrector changed the north value by more than half the predictor change.
    NoContraction { first: f64, second: f64 },
}

/// Corrector bookkeeping of one successful step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport<T> {
    pub predictor_change: T,
    pub corrector_change: T,
}

/// One null-parallelogram update for a block of angular samples.
///
/// `rhs(north_guess, out)` fills the centre right-hand side for the given
/// guess of the north corner and returns `false` on overflow. The first
/// evaluation uses the linear guess `W + E - S` (predictor), the second
/// uses the predicted value (corrector).
pub fn step_diamond<T, R>(
    south: &[T],
    west: &[T],
    east: &[T],
    cell: &Cell<T>,
    mut rhs: R,
    north: &mut [T],
) -> std::result::Result<StepReport<T>, StepError>
where
    T: Real,
    R: FnMut(&[T], &mut [T]) -> bool,
{
    let n = south.len();
    debug_assert!(west.len() == n && east.len() == n && north.len() == n);
    let area = cell.area();
    let base: Vec<T> = (0..n).map(|m| west[m] + east[m] - south[m]).collect();
    let mut centre = vec![T::zero(); n];

    if !rhs(&base, &mut centre) {
        return Err(StepError::NonFinite);
    }
    let predicted: Vec<T> = (0..n).map(|m| base[m] + area * centre[m]).collect();
    if !rhs(&predicted, &mut centre) {
        return Err(StepError::NonFinite);
    }
    let mut first = T::zero();
    let mut second = T::zero();
    let mut scale = T::zero();
    for m in 0..n {
        north[m] = base[m] + area * centre[m];
        if !north[m].is_finite() {
            return Err(StepError::NonFinite);
        }
        first = first.max((predicted[m] - base[m]).abs());
        second = second.max((north[m] - predicted[m]).abs());
        scale = scale.max(north[m].abs());
    }
    let eps64 = T::epsilon() * T::lit(64.0);
    let abs_tol = T::lit(1e-12).max(eps64);
    let rel_tol = T::lit(1e-10).max(eps64);
    let converged = second < abs_tol || second < rel_tol * scale;
    if !converged && second > T::lit(0.5) * first {
        return Err(StepError::NoContraction {
            first: first.as_f64(),
            second: second.as_f64(),
        });
    }
    Ok(StepReport {
        predictor_change: first,
        corrector_change: second,
    })
}

/// Evolves short-pulse data on `C_{u0}` (zero on `ub = 0`) through the slab.
pub fn evolve<T: Real>(
    grid: &NullGrid<T>,
    pulse: &PulseSpec<T>,
    nonlinearity: Nonlinearity,
    forcing: Option<SharedForcing<T>>,
) -> Result<FieldState<T>> {
    if (pulse.delta - grid.delta).abs() > T::epsilon() * T::lit(16.0) * grid.delta {
        return Err(Error::InvalidPulse(format!(
            "pulse delta {} does not match grid delta {}",
            pulse.delta, grid.delta
        )));
    }
    if grid.is_spherical() && pulse.angular_mode != 0 {
        return Err(Error::InvalidPulse("spherical mode needs angular_mode = 0".into()));
    }
    evolve_with_data(grid, |ub, theta| pulse.value(ub, theta), nonlinearity, forcing)
}

/// Evolves arbitrary outgoing data `data(ub, theta)` on `C_{u0}`. The
/// ingoing data on `ub = 0` is zero, so `data(0, theta)` must vanish.
pub fn evolve_with_data<T, D>(
    grid: &NullGrid<T>,
    data: D,
    nonlinearity: Nonlinearity,
    forcing: Option<SharedForcing<T>>,
) -> Result<FieldState<T>>
where
    T: Real,
    D: Fn(T, T) -> T,
{
    let thetas = grid.thetas();
    for &theta in &thetas {
        let v = data(T::zero(), theta);
        if v != T::zero() {
            return Err(Error::InvalidPulse(format!(
                "outgoing data must vanish on ub = 0 (got {v} at theta = {theta})"
            )));
        }
    }
    let mut values = vec![T::zero(); grid.node_count()];
    for j in 0..grid.nodes_ub() {
        for (m, &theta) in thetas.iter().enumerate() {
            values[grid.index(0, j, m)] = data(grid.ub(j), theta);
        }
    }
    if grid.is_spherical() {
        march_spherical(grid, &mut values, &nonlinearity, forcing.as_deref())?;
    } else {
        march_angular(grid, &mut values, &nonlinearity, forcing.as_deref())?;
    }
    Ok(FieldState::from_values(grid.clone(), values, nonlinearity, forcing))
}

fn check_node<T: Real>(grid: &NullGrid<T>, i: usize, j: usize, block: &[T]) -> Result<()> {
    let limit = T::lit(BLOW_UP_THRESHOLD);
    for (m, &v) in block.iter().enumerate() {
        if !v.is_finite() || v.abs() > limit {
            return Err(Error::BlowUp {
                u: grid.u(i).as_f64(),
                ub: grid.ub(j).as_f64(),
                theta_index: m,
                value: v.abs().as_f64(),
            });
        }
    }
    Ok(())
}

fn step_error<T: Real>(grid: &NullGrid<T>, i: usize, j: usize, e: StepError, north: &[T]) -> Error {
    match e {
        StepError::NonFinite => Error::BlowUp {
            u: grid.u(i).as_f64(),
            ub: grid.ub(j).as_f64(),
            theta_index: 0,
            value: north.first().map_or(f64::NAN, |v| v.as_f64()),
        },
        StepError::NoContraction { first, second } => Error::StepFailure {
            u: grid.u(i).as_f64(),
            ub: grid.ub(j).as_f64(),
            first,
            second,
        },
    }
}

fn march_spherical<T: Real>(
    grid: &NullGrid<T>,
    values: &mut [T],
    nonlinearity: &Nonlinearity,
    forcing: Option<&dyn crate::state::Forcing<T>>,
) -> Result<()> {
    let (nu, nub) = (grid.nodes_u(), grid.nodes_ub());
    let mut psi = vec![T::zero(); nu * nub];
    for j in 0..nub {
        psi[j] = grid.r(0, j) * values[grid.index(0, j, 0)];
    }
    let cell = Cell {
        h_u: grid.h_u(),
        h_ub: grid.h_ub(),
    };
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let mut north = [T::zero()];
    for i in 0..grid.n_u {
        let u_c = half * (grid.u(i) + grid.u(i + 1));
        for j in 0..grid.n_ub {
            let ub_c = half * (grid.ub(j) + grid.ub(j + 1));
            let r_c = ub_c - u_c;
            let f_c = forcing.map_or(T::zero(), |f| f.eval(u_c, ub_c, T::zero()));
            let s = psi[i * nub + j];
            let w = psi[(i + 1) * nub + j];
            let e = psi[i * nub + j + 1];
            let rhs = |guess: &[T], out: &mut [T]| {
                let psi_c = quarter * (s + w + e + guess[0]);
                match reduced_rhs(psi_c, r_c, nonlinearity, f_c) {
                    Some(v) => {
                        out[0] = v;
                        true
                    }
                    None => false,
                }
            };
            step_diamond(&[s], &[w], &[e], &cell, rhs, &mut north)
                .map_err(|err| step_error(grid, i + 1, j + 1, err, &north))?;
            psi[(i + 1) * nub + j + 1] = north[0];
            let phi = north[0] / grid.r(i + 1, j + 1);
            check_node(grid, i + 1, j + 1, &[phi])?;
        }
    }
    for i in 0..nu {
        for j in 0..nub {
            values[grid.index(i, j, 0)] = psi[i * nub + j] / grid.r(i, j);
        }
    }
    Ok(())
}

fn march_angular<T: Real>(
    grid: &NullGrid<T>,
    values: &mut [T],
    nonlinearity: &Nonlinearity,
    forcing: Option<&dyn crate::state::Forcing<T>>,
) -> Result<()> {
    let nt = grid.n_theta;
    let ops = AngularOps::new(nt);
    let thetas = grid.thetas();
    let dim = grid.dim;
    let cell = Cell {
        h_u: grid.h_u(),
        h_ub: grid.h_ub(),
    };
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let two = T::lit(2.0);

    // Angular Laplacian of every filled node, kept alongside the values.
    let mut lap = vec![T::zero(); values.len()];
    for j in 0..grid.nodes_ub() {
        let b = grid.block(0, j);
        ops.derivative_into(&values[b.clone()], 2, &mut lap[b]);
    }

    let mut north = vec![T::zero(); nt];
    let mut f_c = vec![T::zero(); nt];
    let mut lap_guess = vec![T::zero(); nt];
    for i in 0..grid.n_u {
        let u_c = half * (grid.u(i) + grid.u(i + 1));
        for j in 0..grid.n_ub {
            let ub_c = half * (grid.ub(j) + grid.ub(j + 1));
            let r_c = ub_c - u_c;
            for (m, &theta) in thetas.iter().enumerate() {
                f_c[m] = forcing.map_or(T::zero(), |f| f.eval(u_c, ub_c, theta));
            }
            let (bs, bw, be) = (grid.block(i, j), grid.block(i + 1, j), grid.block(i, j + 1));
            let (s, w, e) = (&values[bs.clone()], &values[bw.clone()], &values[be.clone()]);
            let (ls, lw, le) = (&lap[bs], &lap[bw], &lap[be]);
            let rhs = |guess: &[T], out: &mut [T]| {
                ops.derivative_into(guess, 2, &mut lap_guess);
                for m in 0..nt {
                    let stencil = CellStencil {
                        phi: quarter * (s[m] + w[m] + e[m] + guess[m]),
                        l_phi: ((e[m] - s[m]) + (guess[m] - w[m])) / (two * cell.h_ub),
                        lbar_phi: ((w[m] - s[m]) + (guess[m] - e[m])) / (two * cell.h_u),
                        angular_laplacian: quarter * (ls[m] + lw[m] + le[m] + lap_guess[m]),
                        forcing: f_c[m],
                    };
                    match null_frame_rhs(&stencil, r_c, dim, nonlinearity) {
                        Some(v) => out[m] = v,
                        None => return false,
                    }
                }
                true
            };
            step_diamond(s, w, e, &cell, rhs, &mut north)
                .map_err(|err| step_error(grid, i + 1, j + 1, err, &north))?;
            check_node(grid, i + 1, j + 1, &north)?;
            let bn = grid.block(i + 1, j + 1);
            values[bn.clone()].copy_from_slice(&north);
            ops.derivative_into(&north, 2, &mut lap[bn]);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, Resolution, Symmetry};
    use crate::nonlinearity::Sign;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    #[test]
    fn rhs_of_zero_field_vanishes() {
        let s = CellStencil::<f64>::default();
        let n = Nonlinearity::focusing(3).unwrap();
        assert_eq!(null_frame_rhs(&s, 2.0, Dimension::Three, &n), Some(0.0));
        assert_eq!(null_frame_rhs(&s, 2.0, Dimension::Two, &n), Some(0.0));
    }

    #[test]
    fn focusing_cubic_moves_to_right_hand_side_with_plus_sign() {
        let s = CellStencil {
            phi: 2.0,
            ..Default::default()
        };
        let n = Nonlinearity::Power { k: 3, sign: Sign::Focusing };
        assert_eq!(null_frame_rhs(&s, 1.0, Dimension::Three, &n), Some(8.0));
    }

    #[test]
    fn overflow_is_signalled() {
        let s = CellStencil {
            phi: 1e200,
            ..Default::default()
        };
        let n = Nonlinearity::focusing(7).unwrap();
        assert_eq!(null_frame_rhs(&s, 1.0, Dimension::Three, &n), None);
    }

    #[test]
    fn spherical_reduction_matches_null_frame_form() {
        // d_u d_ub (r phi) = Lbar phi - L phi + r d_u d_ub phi, and with the
        // null-frame form of d_u d_ub phi this collapses to -r N(phi).
        let n = Nonlinearity::defocusing(3).unwrap();
        for &(phi, l, lb, r) in &[(0.3, 1.2, -0.7, 2.5), (-0.1, 4.0, 0.2, 1.1), (0.0, 1.0, 3.0, 2.0)] {
            let s = CellStencil {
                phi,
                l_phi: l,
                lbar_phi: lb,
                ..Default::default()
            };
            let mixed_phi = null_frame_rhs(&s, r, Dimension::Three, &n).unwrap();
            let mixed_psi = lb - l + r * mixed_phi;
            let reduced = reduced_rhs(r * phi, r, &n, 0.0).unwrap();
            assert_relative_eq!(mixed_psi, reduced, epsilon = 1e-14);
        }
        // Linear case: psi is a free 1+1 wave.
        assert_eq!(reduced_rhs(0.7, 2.0, &Nonlinearity::Linear, 0.0), Some(-0.0));
    }

    #[test]
    fn diamond_is_exact_for_free_waves() {
        let cell = Cell { h_u: 0.1, h_ub: 0.05 };
        let mut north = [0.0];
        step_diamond(&[1.0], &[2.5], &[-0.5], &cell, |_, out| {
            out[0] = 0.0;
            true
        }, &mut north)
        .unwrap();
        assert_eq!(north[0], 2.5 - 0.5 - 1.0);
    }

    #[test]
    fn diamond_integrates_constant_source_exactly() {
        let cell = Cell { h_u: 0.1, h_ub: 0.05 };
        let c = 3.0;
        let mut north = [0.0];
        step_diamond(&[1.0], &[2.0], &[0.5], &cell, |_, out| {
            out[0] = c;
            true
        }, &mut north)
        .unwrap();
        assert_relative_eq!(north[0] - 2.0 - 0.5 + 1.0, c * 0.005, max_relative = 1e-13);
    }

    #[test]
    fn diamond_rejects_non_contracting_corrector() {
        let cell = Cell { h_u: 1.0, h_ub: 1.0 };
        let mut north = [0.0];
        // rhs = 10 * guess: the fixed-point map expands.
        let r = step_diamond(&[0.0], &[1.0], &[1.0], &cell, |g, out| {
            out[0] = 10.0 * g[0];
            true
        }, &mut north);
        assert!(matches!(r, Err(StepError::NoContraction { .. })));
    }

    fn grid3(delta: f64, n_u: usize, n_ub: usize) -> NullGrid<f64> {
        build_grid(-4.0, -1.0, delta, Resolution::new(n_u, n_ub, 1), Dimension::Three, Symmetry::Spherical).unwrap()
    }

    #[test]
    fn zero_pulse_gives_zero_solution() {
        let g = grid3(0.01, 30, 16);
        let p = PulseSpec::sin4(0.01).with_amplitude(0.0);
        let s = evolve(&g, &p, Nonlinearity::focusing(3).unwrap(), None).unwrap();
        assert!(s.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn region_one_stays_exactly_zero() {
        let g = grid3(0.01, 60, 32);
        let s = evolve(&g, &PulseSpec::sin4(0.01), Nonlinearity::focusing(7).unwrap(), None).unwrap();
        for i in 0..g.nodes_u() {
            assert_eq!(s.phi(i, 0, 0), 0.0);
        }
    }

    #[test]
    fn linear_spherical_matches_dalembert() {
        let delta = 0.05;
        let g = grid3(delta, 60, 32);
        let p = PulseSpec::sin4(delta);
        let s = evolve(&g, &p, Nonlinearity::Linear, None).unwrap();
        for i in 0..g.nodes_u() {
            for j in 0..g.nodes_ub() {
                let (u, ub) = (g.u(i), g.ub(j));
                let exact = (ub - g.u0) * p.value(ub, 0.0) / (ub - u);
                assert!((s.phi(i, j, 0) - exact).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn identical_runs_are_bit_identical() {
        let g = build_grid(-3.0, -1.0, 0.05, Resolution::new(20, 16, 8), Dimension::Two, Symmetry::FullAngular).unwrap();
        let p = PulseSpec::new(crate::pulse::Profile::Sin4, 1.0, 0.05, 2).unwrap();
        let a = evolve(&g, &p, Nonlinearity::ExpFocusing, None).unwrap();
        let b = evolve(&g, &p, Nonlinearity::ExpFocusing, None).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn blow_up_reports_first_failing_node() {
        // Focusing quintic with huge amplitude blows up inside the slab.
        let g = grid3(0.5, 40, 40);
        let p = PulseSpec::sin4(0.5).with_amplitude(40.0);
        let err = evolve(&g, &p, Nonlinearity::focusing(5).unwrap(), None).unwrap_err();
        match err {
            Error::BlowUp { u, ub, .. } | Error::StepFailure { u, ub, .. } => {
                assert!(g.contains(u, ub));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn spherical_mode_rejects_angular_pulses() {
        let g = grid3(0.01, 10, 10);
        let p = PulseSpec::new(crate::pulse::Profile::Sin4, 1.0, 0.01, 1).unwrap();
        assert!(evolve(&g, &p, Nonlinearity::Linear, None).is_err());
    }

    #[test]
    fn forcing_enters_with_box_convention() {
        // phi* = u ub solves Box phi = F with F = -d_u d_ub phi* + r^-1 (L - Lbar) phi*
        // = -1 + (u - ub)/r = -2 in 3D spherical symmetry.
        let g = grid3(0.2, 20, 20);
        let forcing: SharedForcing<f64> = Arc::new(|_u: f64, _ub: f64, _t: f64| -2.0);
        let s = evolve_with_data(&g, |ub, _| g.u0 * ub, Nonlinearity::Linear, Some(forcing)).unwrap();
        for i in 0..g.nodes_u() {
            for j in 0..g.nodes_ub() {
                assert!((s.phi(i, j, 0) - g.u(i) * g.ub(j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn runs_in_single_precision() {
        let g = build_grid(-4.0f32, -1.0, 0.05, Resolution::new(30, 16, 1), Dimension::Three, Symmetry::Spherical).unwrap();
        let s = evolve(&g, &PulseSpec::sin4(0.05f32), Nonlinearity::defocusing(3).unwrap(), None).unwrap();
        assert!(s.max_abs().is_finite());
        assert!(s.max_abs() > 0.0);
    }
}
