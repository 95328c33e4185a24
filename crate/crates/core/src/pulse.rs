//! Short-pulse characteristic data on the initial outgoing cone `C_{u0}`.
//!
//! The data is `a delta^{1/2} psi0(ub / delta) cos(m theta)` with `psi0`
//! supported in `(0, 1)`, and zero on the initial ingoing cone `ub = 0`.

use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::NullGrid;
use crate::scalar::Real;

/// Smooth bump `psi0(s)` supported in `s in (0, 1)`.
#[derive(Clone, Copy)]
pub enum Profile {
    /// `sin^4(pi s)`: C^3 at the support ends, closed-form derivatives.
    Sin4,
    /// `e^4 exp(-1 / (s (1 - s)))`, normalized to peak value 1. C-infinity.
    Bump,
    /// User profile without closed-form derivatives; derivatives fall back to
    /// central differences. The function must vanish outside `(0, 1)`.
    Custom {
        name: &'static str,
        f: fn(f64) -> f64,
    },
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl PartialEq for Profile {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name()
    }
}

impl Profile {
    pub fn name(&self) -> &'static str {
        match self {
            Profile::Sin4 => "sin4",
            Profile::Bump => "bump",
            Profile::Custom { name, .. } => name,
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "sin4" => Ok(Profile::Sin4),
            "bump" => Ok(Profile::Bump),
            other => Err(Error::InvalidPulse(format!("unknown profile `{other}`"))),
        }
    }

    pub fn has_closed_form_derivatives(&self) -> bool {
        !matches!(self, Profile::Custom { .. })
    }

    pub fn value<T: Real>(&self, s: T) -> T {
        if s <= T::zero() || s >= T::one() {
            return T::zero();
        }
        match self {
            Profile::Sin4 => (T::PI() * s).sin().powi(4),
            Profile::Bump => bump_parts(s).0,
            Profile::Custom { f, .. } => T::lit(f(s.as_f64())),
        }
    }

    /// `d^order psi0 / ds^order` for `order <= 2`; `None` when no closed form exists.
    pub fn derivative<T: Real>(&self, s: T, order: u32) -> Option<T> {
        if order == 0 {
            return Some(self.value(s));
        }
        if s <= T::zero() || s >= T::one() {
            return self.has_closed_form_derivatives().then(T::zero);
        }
        match (self, order) {
            (Profile::Sin4, 1) => {
                let (sn, cs) = (T::PI() * s).sin_cos();
                Some(T::lit(4.0) * T::PI() * sn.powi(3) * cs)
            }
            (Profile::Sin4, 2) => {
                let (sn, cs) = (T::PI() * s).sin_cos();
                let pi2 = T::PI() * T::PI();
                Some(T::lit(4.0) * pi2 * (T::lit(3.0) * sn * sn * cs * cs - sn.powi(4)))
            }
            (Profile::Bump, 1) => {
                let (v, g1, _) = bump_parts(s);
                Some(v * g1)
            }
            (Profile::Bump, 2) => {
                let (v, g1, g2) = bump_parts(s);
                Some(v * (g2 + g1 * g1))
            }
            _ => None,
        }
    }

    /// Derivative with central-difference fallback; the flag is `true` when
    /// the fallback was used.
    pub fn derivative_or_fd<T: Real>(&self, s: T, order: u32) -> (T, bool) {
        if let Some(d) = self.derivative(s, order) {
            return (d, false);
        }
        let h = 1e-4;
        let f = |x: f64| self.value::<f64>(x);
        let x = s.as_f64();
        let d = match order {
            1 => (f(x + h) - f(x - h)) / (2.0 * h),
            2 => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
            _ => f64::NAN,
        };
        (T::lit(d), true)
    }
}

/// Bump value and the first two derivatives of its exponent `g = -1/(s(1-s))`.
fn bump_parts<T: Real>(s: T) -> (T, T, T) {
    let q = s - s * s;
    let q1 = T::one() - T::lit(2.0) * s;
    let q2 = -T::lit(2.0);
    let g = -T::one() / q;
    let g1 = q1 / (q * q);
    let g2 = q2 / (q * q) - T::lit(2.0) * q1 * q1 / (q * q * q);
    (T::lit(4.0).exp() * g.exp(), g1, g2)
}

/// Parameters of the short pulse.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSpec<T> {
    pub profile: Profile,
    pub amplitude: T,
    pub delta: T,
    /// Angular modulation `cos(m theta)`; must be 0 in spherical mode.
    pub angular_mode: u32,
}

impl<T: Real> PulseSpec<T> {
    pub fn new(profile: Profile, amplitude: T, delta: T, angular_mode: u32) -> Result<Self> {
        if !(amplitude >= T::zero()) || !amplitude.is_finite() {
            return Err(Error::InvalidPulse(format!("amplitude {amplitude} must be >= 0")));
        }
        if !(delta > T::zero()) {
            return Err(Error::InvalidPulse(format!("delta {delta} must be positive")));
        }
        Ok(Self {
            profile,
            amplitude,
            delta,
            angular_mode,
        })
    }

    /// Default `sin^4` profile with unit amplitude and no angular dependence.
    pub fn sin4(delta: T) -> Self {
        Self {
            profile: Profile::Sin4,
            amplitude: T::one(),
            delta,
            angular_mode: 0,
        }
    }

    pub fn with_amplitude(mut self, amplitude: T) -> Self {
        self.amplitude = amplitude;
        self
    }

    fn angular(&self, theta: T, omega_order: u32) -> T {
        let m = T::lit(self.angular_mode as f64);
        let (s, c) = (m * theta).sin_cos();
        let mp = m.powi(omega_order as i32);
        match omega_order % 4 {
            0 => mp * c,
            1 => -mp * s,
            2 => -mp * c,
            _ => mp * s,
        }
    }

    /// Field value on `C_{u0}`; exactly zero for `ub <= 0` and `ub >= delta`.
    pub fn value(&self, ub: T, theta: T) -> T {
        short_pulse_value(self, ub, theta)
    }

    /// `L^l_order Omega^omega_order phi` on `C_{u0}`, using the closed-form
    /// profile derivatives when available. The flag reports a
    /// finite-difference fallback.
    pub fn frame_derivative(&self, ub: T, theta: T, l_order: u32, omega_order: u32) -> (T, bool) {
        let s = ub / self.delta;
        let (d, fd) = self.profile.derivative_or_fd(s, l_order);
        let scale = self.delta.powf(T::lit(0.5) - T::lit(l_order as f64));
        (self.amplitude * scale * d * self.angular(theta, omega_order), fd)
    }
}

/// Data on the initial outgoing cone, `a delta^{1/2} psi0(ub/delta) cos(m theta)`.
pub fn short_pulse_value<T: Real>(spec: &PulseSpec<T>, ub: T, theta: T) -> T {
    if ub <= T::zero() || ub >= spec.delta {
        return T::zero();
    }
    let s = ub / spec.delta;
    spec.amplitude * spec.delta.sqrt() * spec.profile.value(s) * spec.angular(theta, 0)
}

/// Trace on the initial ingoing cone `ub = 0`: identically zero, one value per `(u, theta)` node.
pub fn ingoing_data<T: Real>(grid: &NullGrid<T>) -> Vec<T> {
    vec![T::zero(); grid.nodes_u() * grid.n_theta]
}

/// Whether a norm is a supremum or an `L^2(C_{u0})` cone norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    Sup,
    ConeL2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataBound<T> {
    pub name: &'static str,
    pub kind: BoundKind,
    pub value: T,
    /// Exponent `p` in `norm <~ delta^p`.
    pub exponent: f64,
    /// Relaxed bounds are checked only as inequalities, not as slopes.
    pub relaxed: bool,
    /// Zero by construction (angular quantity without angular dependence).
    pub structurally_zero: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataBoundsReport<T> {
    pub delta: T,
    pub entries: Vec<DataBound<T>>,
    /// Set when the profile had no closed-form derivatives.
    pub finite_difference_fallback: bool,
}

impl<T: Real> DataBoundsReport<T> {
    pub fn get(&self, name: &str) -> Option<&DataBound<T>> {
        self.entries.iter().find(|e| e.name == name)
    }
}

/// (name, kind, L order, Omega order, exponent, relaxed)
const DATA_QUANTITIES: &[(&str, BoundKind, u32, u32, f64, bool)] = &[
    ("sup_L_phi", BoundKind::Sup, 1, 0, -0.5, false),
    ("sup_L2_phi", BoundKind::Sup, 2, 0, -1.5, false),
    ("sup_Omega_phi", BoundKind::Sup, 0, 1, 0.5, false),
    ("sup_L_Omega_phi", BoundKind::Sup, 1, 1, -0.5, false),
    ("sup_L2_Omega_phi", BoundKind::Sup, 2, 1, -1.5, false),
    ("sup_Omega2_phi", BoundKind::Sup, 0, 2, 0.0, true),
    ("l2_L_phi", BoundKind::ConeL2, 1, 0, 0.0, false),
    ("l2_L_Omega_phi", BoundKind::ConeL2, 1, 1, 0.0, false),
    ("l2_Omega_phi", BoundKind::ConeL2, 0, 1, 0.5, false),
    ("l2_Omega2_phi", BoundKind::ConeL2, 0, 2, 0.5, false),
    ("l2_L2_phi", BoundKind::ConeL2, 2, 0, -1.0, false),
    ("l2_L2_Omega_phi", BoundKind::ConeL2, 2, 1, -1.0, false),
];

/// Measures the sup and cone-`L^2` norms of the data and its frame
/// derivatives on `C_{u0}`, each paired with its `delta` exponent.
pub fn verify_data_bounds<T: Real>(spec: &PulseSpec<T>, grid: &NullGrid<T>) -> Result<DataBoundsReport<T>> {
    if (spec.delta - grid.delta).abs() > T::epsilon() * T::lit(16.0) * grid.delta {
        return Err(Error::InvalidPulse(format!(
            "pulse delta {} does not match grid delta {}",
            spec.delta, grid.delta
        )));
    }
    let angular_zero = spec.angular_mode == 0 || grid.is_spherical();
    let thetas = grid.thetas();
    let h = grid.h_ub();
    let mut fallback = false;
    let mut entries = Vec::with_capacity(DATA_QUANTITIES.len());
    for &(name, kind, l_order, omega_order, exponent, relaxed) in DATA_QUANTITIES {
        let structurally_zero = omega_order > 0 && angular_zero;
        let mut sup = T::zero();
        let mut cone = T::zero();
        for j in 0..grid.nodes_ub() {
            let ub = grid.ub(j);
            let measure = grid.sphere_measure_at(0, j);
            let mut sphere = T::zero();
            for (m, &theta) in thetas.iter().enumerate() {
                let (q, fd) = if structurally_zero {
                    (T::zero(), false)
                } else {
                    spec.frame_derivative(ub, theta, l_order, omega_order)
                };
                fallback |= fd;
                sup = sup.max(q.abs());
                sphere = sphere + measure.weights[m] * q * q;
            }
            let w = if j == 0 || j == grid.n_ub { T::lit(0.5) * h } else { h };
            cone = cone + w * sphere;
        }
        let value = match kind {
            BoundKind::Sup => sup,
            BoundKind::ConeL2 => cone.sqrt(),
        };
        entries.push(DataBound {
            name,
            kind,
            value,
            exponent,
            relaxed,
            structurally_zero,
        });
    }
    Ok(DataBoundsReport {
        delta: spec.delta,
        entries,
        finite_difference_fallback: fallback,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, Dimension, Resolution, Symmetry};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid3(delta: f64, n_ub: usize) -> NullGrid<f64> {
        build_grid(-4.0, -1.0, delta, Resolution::new(30, n_ub, 1), Dimension::Three, Symmetry::Spherical).unwrap()
    }

    #[test]
    fn vanishes_before_onset_and_after_pulse() {
        let p = PulseSpec::sin4(0.01);
        assert_eq!(p.value(-0.3, 0.0), 0.0);
        assert_eq!(p.value(0.0, 0.0), 0.0);
        assert_eq!(p.value(0.01, 0.0), 0.0);
        assert_eq!(p.value(0.02, 0.0), 0.0);
    }

    #[test]
    fn midpoint_value() {
        let p = PulseSpec::sin4(0.01);
        assert_relative_eq!(p.value(0.005, 0.0), 0.1, max_relative = 1e-14);
    }

    #[test]
    fn half_power_scaling_at_fixed_shape_coordinate() {
        let a = PulseSpec::sin4(0.04);
        let b = PulseSpec::sin4(0.01);
        let s = 0.37;
        assert_relative_eq!(a.value(s * 0.04, 0.0) / b.value(s * 0.01, 0.0), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn closed_form_profile_derivatives_match_differences() {
        for profile in [Profile::Sin4, Profile::Bump] {
            for &s in &[0.1, 0.33, 0.5, 0.71, 0.93] {
                let h = 1e-5;
                let fd1 = (profile.value(s + h) - profile.value(s - h)) / (2.0 * h);
                let fd2 = (profile.value(s + h) - 2.0 * profile.value(s) + profile.value(s - h)) / (h * h);
                let d1: f64 = profile.derivative(s, 1).unwrap();
                let d2: f64 = profile.derivative(s, 2).unwrap();
                assert!((d1 - fd1).abs() < 1e-6 * (1.0 + d1.abs()), "{profile:?} s={s}");
                assert!((d2 - fd2).abs() < 1e-3 * (1.0 + d2.abs()), "{profile:?} s={s}");
            }
        }
        assert_relative_eq!(Profile::Bump.value(0.5), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn sup_of_l_phi_matches_calculus_maximum() {
        // max of 4 pi sin^3 cos over (0,1) sits at tan^2 = 3: 3 sqrt(3) pi / 4.
        let delta = 0.01;
        // s = 1/3 is a grid point when n_ub is a multiple of 3.
        let g = grid3(delta, 96);
        let report = verify_data_bounds(&PulseSpec::sin4(delta), &g).unwrap();
        let expected = delta.powf(-0.5) * 3.0 * 3f64.sqrt() * std::f64::consts::PI / 4.0;
        assert_relative_eq!(report.get("sup_L_phi").unwrap().value, expected, max_relative = 1e-12);
        assert!(!report.finite_difference_fallback);
    }

    #[test]
    fn angular_entries_vanish_without_modulation() {
        let g = grid3(0.01, 64);
        let report = verify_data_bounds(&PulseSpec::sin4(0.01), &g).unwrap();
        let e = report.get("sup_Omega_phi").unwrap();
        assert_eq!(e.value, 0.0);
        assert!(e.structurally_zero);
    }

    #[test]
    fn cone_norm_of_l_phi_is_delta_independent() {
        // Quadrature oracle: int_0^1 |psi0'|^2 4 pi (delta s - u0)^2 ds.
        let oracle = |delta: f64| {
            let n = 20_000;
            let mut acc = 0.0;
            for k in 0..n {
                let s = (k as f64 + 0.5) / n as f64;
                let d: f64 = Profile::Sin4.derivative(s, 1).unwrap();
                let r0 = delta * s + 4.0;
                acc += d * d * 4.0 * std::f64::consts::PI * r0 * r0 / n as f64;
            }
            acc.sqrt()
        };
        let mut values = vec![];
        for delta in [0.04, 0.01] {
            let g = grid3(delta, 256);
            let r = verify_data_bounds(&PulseSpec::sin4(delta), &g).unwrap();
            let v = r.get("l2_L_phi").unwrap().value;
            assert_relative_eq!(v, oracle(delta), max_relative = 1e-4);
            values.push(v);
        }
        assert!((values[0] / values[1] - 1.0).abs() < 0.01);
    }

    #[test]
    fn custom_profile_is_flagged() {
        fn quad(s: f64) -> f64 {
            if s <= 0.0 || s >= 1.0 {
                0.0
            } else {
                (s * (1.0 - s)).powi(3) * 64.0
            }
        }
        let spec = PulseSpec::new(Profile::Custom { name: "cubic", f: quad }, 1.0, 0.01, 0).unwrap();
        let g = grid3(0.01, 64);
        let report = verify_data_bounds(&spec, &g).unwrap();
        assert!(report.finite_difference_fallback);
        assert!(report.get("sup_L_phi").unwrap().value.is_finite());
    }

    #[test]
    fn angular_modulation_derivatives() {
        let spec = PulseSpec::new(Profile::Sin4, 1.0, 0.01, 2).unwrap();
        let ub = 0.005;
        let theta = 0.3;
        let (om, _) = spec.frame_derivative(ub, theta, 0, 1);
        assert_relative_eq!(om, -2.0 * 0.1 * (0.6f64).sin(), max_relative = 1e-13);
        let (om2, _) = spec.frame_derivative(ub, theta, 0, 2);
        assert_relative_eq!(om2, -4.0 * 0.1 * (0.6f64).cos(), max_relative = 1e-13);
    }

    proptest! {
        #[test]
        fn support_is_exact(ub in -1.0f64..1.0, delta in 1e-3f64..0.5) {
            let p = PulseSpec::sin4(delta);
            if ub <= 0.0 || ub >= delta {
                prop_assert_eq!(p.value(ub, 0.0), 0.0);
            }
        }

        #[test]
        fn scaling_is_half_power(s in 0.01f64..0.99, d1 in 1e-3f64..0.5, d2 in 1e-3f64..0.5) {
            let a = PulseSpec::sin4(d1).value(s * d1, 0.0);
            let b = PulseSpec::sin4(d2).value(s * d2, 0.0);
            let expected = (d1 / d2).sqrt();
            prop_assert!((a / b - expected).abs() <= 1e-12 * expected);
        }
    }
}
