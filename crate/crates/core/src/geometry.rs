//! The discrete double-null slab `[u0, u_end] x [0, delta] (x S^1)`.
//!
//! Nodes are addressed by `(i, j, m)`: `i` along the retarded time `u`,
//! `j` along the advanced time `ub`, `m` along the angle. In these
//! coordinates the null frame is `L = d/d ub`, `Lbar = d/d u`, and the
//! radius and time are `r = ub - u`, `t = u + ub`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Spatial dimension of the background Minkowski space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dimension {
    Two,
    Three,
}

impl Dimension {
    pub fn as_usize(self) -> usize {
        match self {
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }

    pub fn from_usize(d: usize) -> Result<Self> {
        match d {
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            _ => Err(Error::InvalidGrid(format!("dimension must be 2 or 3, got {d}"))),
        }
    }

    /// Coefficient `c` of the radial term `c r^-1 (L - Lbar)` in the null-frame equation.
    pub fn radial_coefficient<T: Real>(self) -> T {
        match self {
            Dimension::Two => T::lit(0.5),
            Dimension::Three => T::one(),
        }
    }
}

/// Angular treatment of the slab.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symmetry {
    /// No angular dependence; only valid in three dimensions.
    Spherical,
    /// Full dependence on the circle angle; only valid in two dimensions.
    FullAngular,
}

/// Grid sample counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Resolution {
    /// Cells along `u` over the whole slab.
    pub n_u: usize,
    /// Cells along `ub` over the pulse width `delta`.
    pub n_ub: usize,
    /// Angular samples (1 in spherical mode).
    pub n_theta: usize,
}

impl Resolution {
    pub fn new(n_u: usize, n_ub: usize, n_theta: usize) -> Self {
        Self { n_u, n_ub, n_theta }
    }

    /// Same angular sampling, both null spacings halved.
    pub fn refined(self) -> Self {
        Self {
            n_u: 2 * self.n_u,
            n_ub: 2 * self.n_ub,
            n_theta: self.n_theta,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NullGrid<T> {
    pub u0: T,
    pub u_end: T,
    pub delta: T,
    pub n_u: usize,
    pub n_ub: usize,
    pub n_theta: usize,
    pub dim: Dimension,
    pub symmetry: Symmetry,
}

/// Builds and validates a slab grid.
pub fn build_grid<T: Real>(
    u0: T,
    u_end: T,
    delta: T,
    resolution: Resolution,
    dim: Dimension,
    symmetry: Symmetry,
) -> Result<NullGrid<T>> {
    if !(u0.is_finite() && u_end.is_finite() && delta.is_finite()) {
        return Err(Error::InvalidGrid("grid parameters must be finite".into()));
    }
    if u_end > -T::one() {
        return Err(Error::InvalidGrid(format!(
            "u_end = {u_end} exceeds -1; the radius would approach the axis"
        )));
    }
    if u0 >= u_end {
        return Err(Error::InvalidGrid(format!("u0 = {u0} must be below u_end = {u_end}")));
    }
    if delta <= T::zero() {
        return Err(Error::InvalidGrid(format!("delta = {delta} must be positive")));
    }
    if resolution.n_u < 2 || resolution.n_ub < 2 {
        return Err(Error::InvalidGrid(format!(
            "need at least 2 cells per null direction, got n_u = {}, n_ub = {}",
            resolution.n_u, resolution.n_ub
        )));
    }
    match (dim, symmetry) {
        (Dimension::Three, Symmetry::FullAngular) => {
            return Err(Error::Unsupported(
                "full angular dependence on S^2 is not supported; use spherical mode in 3D".into(),
            ))
        }
        (Dimension::Two, Symmetry::Spherical) => {
            return Err(Error::InvalidGrid("spherical mode is only defined in 3D".into()))
        }
        _ => {}
    }
    match symmetry {
        Symmetry::Spherical if resolution.n_theta != 1 => {
            return Err(Error::InvalidGrid("spherical mode uses n_theta = 1".into()))
        }
        Symmetry::FullAngular if resolution.n_theta < 2 => {
            return Err(Error::InvalidGrid("full-angular mode needs n_theta >= 2".into()))
        }
        _ => {}
    }
    Ok(NullGrid {
        u0,
        u_end,
        delta,
        n_u: resolution.n_u,
        n_ub: resolution.n_ub,
        n_theta: resolution.n_theta,
        dim,
        symmetry,
    })
}

/// Sphere (or circle) measure at one node of the `(u, ub)` plane.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereMeasure<T> {
    pub radius: T,
    /// `4 pi r^2` in 3D, `2 pi r` in 2D.
    pub total: T,
    /// Per-angular-node quadrature weights; they sum to `total`.
    pub weights: Vec<T>,
}

impl<T: Real> SphereMeasure<T> {
    pub fn integrate(&self, samples: &[T]) -> T {
        debug_assert_eq!(samples.len(), self.weights.len());
        self.weights
            .iter()
            .zip(samples)
            .map(|(&w, &q)| w * q)
            .sum()
    }
}

/// Value of `phi` together with its null-frame derivatives at one node.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct FrameSample<T> {
    pub phi: T,
    /// `L phi = d phi / d ub`.
    pub l_phi: T,
    /// `Lbar phi = d phi / d u`.
    pub lbar_phi: T,
    /// `Omega phi = d phi / d theta`; zero in spherical mode.
    pub omega_phi: T,
    /// `r^-1 Omega phi`.
    pub slashed_nabla_phi: T,
}

impl<T: Real> NullGrid<T> {
    pub fn resolution(&self) -> Resolution {
        Resolution::new(self.n_u, self.n_ub, self.n_theta)
    }

    pub fn h_u(&self) -> T {
        (self.u_end - self.u0) / T::from_count(self.n_u)
    }

    pub fn h_ub(&self) -> T {
        self.delta / T::from_count(self.n_ub)
    }

    /// Number of nodes along `u` (cells + 1).
    pub fn nodes_u(&self) -> usize {
        self.n_u + 1
    }

    pub fn nodes_ub(&self) -> usize {
        self.n_ub + 1
    }

    pub fn node_count(&self) -> usize {
        self.nodes_u() * self.nodes_ub() * self.n_theta
    }

    pub fn is_spherical(&self) -> bool {
        self.symmetry == Symmetry::Spherical
    }

    pub fn u(&self, i: usize) -> T {
        if i == self.n_u {
            return self.u_end;
        }
        self.u0 + (self.u_end - self.u0) * T::from_count(i) / T::from_count(self.n_u)
    }

    pub fn ub(&self, j: usize) -> T {
        if j == self.n_ub {
            return self.delta;
        }
        self.delta * T::from_count(j) / T::from_count(self.n_ub)
    }

    pub fn theta(&self, m: usize) -> T {
        if self.is_spherical() {
            return T::zero();
        }
        T::TAU() * T::from_count(m) / T::from_count(self.n_theta)
    }

    pub fn thetas(&self) -> Vec<T> {
        (0..self.n_theta).map(|m| self.theta(m)).collect()
    }

    pub fn r(&self, i: usize, j: usize) -> T {
        radius(self.u(i), self.ub(j))
    }

    /// Flat storage index: u-major, then ub, then theta.
    #[inline]
    pub fn index(&self, i: usize, j: usize, m: usize) -> usize {
        (i * self.nodes_ub() + j) * self.n_theta + m
    }

    /// Offset of the angular block of node `(i, j)`.
    #[inline]
    pub fn block(&self, i: usize, j: usize) -> std::ops::Range<usize> {
        let start = self.index(i, j, 0);
        start..start + self.n_theta
    }

    pub fn contains(&self, u: T, ub: T) -> bool {
        u >= self.u0 && u <= self.u_end && ub >= T::zero() && ub <= self.delta
    }

    /// Grid indices of the node at `(u, ub)`; the point must be grid-aligned.
    pub fn node_at(&self, u: T, ub: T) -> Result<(usize, usize)> {
        let outside = || Error::OutsideDomain {
            u: u.as_f64(),
            ub: ub.as_f64(),
        };
        let tol = T::lit(1e-6);
        if !(u >= self.u0 - tol * self.h_u() && u <= self.u_end + tol * self.h_u()) {
            return Err(outside());
        }
        if !(ub >= -tol * self.h_ub() && ub <= self.delta + tol * self.h_ub()) {
            return Err(outside());
        }
        let i = ((u - self.u0) / self.h_u()).round().to_usize().ok_or_else(outside)?;
        let j = (ub / self.h_ub()).round().to_usize().ok_or_else(outside)?;
        if i > self.n_u || j > self.n_ub {
            return Err(outside());
        }
        if (self.u(i) - u).abs() > tol * self.h_u() || (self.ub(j) - ub).abs() > tol * self.h_ub() {
            return Err(outside());
        }
        Ok((i, j))
    }

    /// Area (length in 2D) of the sphere of radius `r`.
    pub fn sphere_area(&self, r: T) -> T {
        match self.dim {
            Dimension::Three => T::lit(4.0) * T::PI() * r * r,
            Dimension::Two => T::TAU() * r,
        }
    }

    /// Measure and angular quadrature weights of `S_{ub,u}`.
    pub fn sphere_measure(&self, u: T, ub: T) -> Result<SphereMeasure<T>> {
        if !self.contains(u, ub) {
            return Err(Error::OutsideDomain {
                u: u.as_f64(),
                ub: ub.as_f64(),
            });
        }
        Ok(self.sphere_measure_at_radius(radius(u, ub)))
    }

    /// Measure at grid node `(i, j)`.
    pub fn sphere_measure_at(&self, i: usize, j: usize) -> SphereMeasure<T> {
        self.sphere_measure_at_radius(self.r(i, j))
    }

    fn sphere_measure_at_radius(&self, r: T) -> SphereMeasure<T> {
        let total = self.sphere_area(r);
        let w = total / T::from_count(self.n_theta);
        SphereMeasure {
            radius: r,
            total,
            weights: vec![w; self.n_theta],
        }
    }
}

/// `r = ub - u`.
#[inline]
pub fn radius<T: Real>(u: T, ub: T) -> T {
    ub - u
}

/// `t = u + ub`.
#[inline]
pub fn time<T: Real>(u: T, ub: T) -> T {
    u + ub
}

/// Inverse map `(t, r) -> (u, ub) = (½(t - r), ½(t + r))`.
#[inline]
pub fn null_coordinates<T: Real>(t: T, r: T) -> (T, T) {
    let half = T::lit(0.5);
    (half * (t - r), half * (t + r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn default_grid() -> NullGrid<f64> {
        build_grid(
            -4.0,
            -1.0,
            0.01,
            Resolution::new(300, 64, 1),
            Dimension::Three,
            Symmetry::Spherical,
        )
        .unwrap()
    }

    #[test]
    fn spacings_follow_from_counts() {
        let g = default_grid();
        assert_relative_eq!(g.h_u(), 0.01, max_relative = 1e-14);
        assert_relative_eq!(g.h_ub(), 1.5625e-4, max_relative = 1e-14);
        assert_eq!(g.node_count(), 301 * 65);
        assert_eq!(g.u(300), -1.0);
        assert_eq!(g.ub(64), 0.01);
    }

    #[test]
    fn node_count_is_tensor_product() {
        let g = build_grid(
            -3.0,
            -1.0,
            0.1,
            Resolution::new(10, 8, 16),
            Dimension::Two,
            Symmetry::FullAngular,
        )
        .unwrap();
        assert_eq!(g.node_count(), 11 * 9 * 16);
        assert_eq!(g.index(10, 8, 15), g.node_count() - 1);
    }

    #[test]
    fn time_and_radius_from_null_coordinates() {
        assert_relative_eq!(time(-2.0, 0.1), -1.9, max_relative = 1e-15);
        assert_relative_eq!(radius(-2.0, 0.1), 2.1, max_relative = 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        let res = Resolution::new(10, 10, 1);
        assert!(build_grid(-4.0, -0.5, 0.01, res, Dimension::Three, Symmetry::Spherical).is_err());
        assert!(build_grid(-4.0, -1.0, 0.0, res, Dimension::Three, Symmetry::Spherical).is_err());
        assert!(build_grid(-4.0, -1.0, -0.1, res, Dimension::Three, Symmetry::Spherical).is_err());
        assert!(build_grid(-1.0, -1.0, 0.1, res, Dimension::Three, Symmetry::Spherical).is_err());
        assert!(matches!(
            build_grid(-4.0, -1.0, 0.1, Resolution::new(10, 10, 8), Dimension::Three, Symmetry::FullAngular),
            Err(Error::Unsupported(_))
        ));
        assert!(build_grid(-4.0, -1.0, 0.1, Resolution::new(1, 10, 1), Dimension::Three, Symmetry::Spherical).is_err());
        assert!(build_grid(-4.0, -1.0, 0.1, Resolution::new(10, 10, 1), Dimension::Two, Symmetry::FullAngular).is_err());
    }

    #[test]
    fn sphere_measures() {
        let g = default_grid();
        let m = g.sphere_measure(-2.0, 0.0).unwrap();
        assert_relative_eq!(m.total, 16.0 * std::f64::consts::PI, max_relative = 1e-15);
        let g2 = build_grid(
            -4.0,
            -1.0,
            0.1,
            Resolution::new(10, 10, 12),
            Dimension::Two,
            Symmetry::FullAngular,
        )
        .unwrap();
        let m2 = g2.sphere_measure(-1.0, 0.0).unwrap();
        assert_relative_eq!(m2.total, 2.0 * std::f64::consts::PI, max_relative = 1e-15);
        assert_relative_eq!(m2.integrate(&vec![1.0; 12]), m2.total, max_relative = 1e-15);
        assert!(g2.sphere_measure(-0.5, 0.0).is_err());
    }

    #[test]
    fn circle_quadrature_is_spectrally_accurate() {
        // exp(cos theta) integrates to 2 pi I0(1) on the unit circle.
        let i0_1 = 1.266_065_877_752_008_4;
        for n in [12usize, 16] {
            let g = build_grid(
                -2.0,
                -1.0,
                0.1,
                Resolution::new(4, 4, n),
                Dimension::Two,
                Symmetry::FullAngular,
            )
            .unwrap();
            let m = g.sphere_measure(-1.0, 0.0).unwrap();
            let f: Vec<f64> = g.thetas().iter().map(|t: &f64| t.cos().exp()).collect();
            assert_relative_eq!(m.integrate(&f), std::f64::consts::TAU * i0_1, max_relative = 1e-9);
        }
    }

    proptest! {
        #[test]
        fn null_coordinates_round_trip(u in -10.0f64..-1.0, ub in 0.0f64..1.0) {
            let (u2, ub2) = null_coordinates(time(u, ub), radius(u, ub));
            prop_assert!((u2 - u).abs() <= 4.0 * f64::EPSILON * 10.0);
            prop_assert!((ub2 - ub).abs() <= 4.0 * f64::EPSILON * 10.0);
        }

        #[test]
        fn radius_positive_on_every_node(u0 in -10.0f64..-1.5, delta in 1e-4f64..1.0, n_u in 2usize..40, n_ub in 2usize..40) {
            let g = build_grid(u0, -1.0, delta, Resolution::new(n_u, n_ub, 1), Dimension::Three, Symmetry::Spherical).unwrap();
            for i in 0..g.nodes_u() {
                for j in 0..g.nodes_ub() {
                    prop_assert!(g.r(i, j) > 0.0);
                }
            }
        }
    }
}
