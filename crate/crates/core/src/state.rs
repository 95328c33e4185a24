//! Evolved field on the slab together with its null-frame derivatives.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use crate::angular::AngularOps;
use crate::error::{Error, Result};
use crate::geometry::{build_grid, Dimension, FrameSample, NullGrid, Resolution, Symmetry};
use crate::nonlinearity::Nonlinearity;
use crate::scalar::Real;

/// External source `F(u, ub, theta)` in `Box phi = N(phi) + F`.
pub trait Forcing<T>: Send + Sync {
    fn eval(&self, u: T, ub: T, theta: T) -> T;
}

impl<T, F> Forcing<T> for F
where
    F: Fn(T, T, T) -> T + Send + Sync,
{
    fn eval(&self, u: T, ub: T, theta: T) -> T {
        self(u, ub, theta)
    }
}

pub type SharedForcing<T> = Arc<dyn Forcing<T>>;

/// Stored first derivatives, same layout as the field values.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameFields<T> {
    pub l_phi: Vec<T>,
    pub lbar_phi: Vec<T>,
    pub omega_phi: Vec<T>,
}

/// Solution of one characteristic evolution.
#[derive(Clone)]
pub struct FieldState<T: Real> {
    pub grid: NullGrid<T>,
    /// `phi` at every node, u-major then ub then theta.
    pub values: Vec<T>,
    pub frame: FrameFields<T>,
    pub nonlinearity: Nonlinearity,
    pub forcing: Option<SharedForcing<T>>,
    angular: AngularOps<T>,
}

impl<T: Real> fmt::Debug for FieldState<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldState")
            .field("grid", &self.grid)
            .field("nonlinearity", &self.nonlinearity)
            .field("forced", &self.forcing.is_some())
            .finish_non_exhaustive()
    }
}

/// Field quantities that norms can be taken of.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantity {
    Phi,
    LPhi,
    LbarPhi,
    OmegaPhi,
    Omega2Phi,
    Omega3Phi,
    SlashedNablaPhi,
    L2Phi,
    Lbar2Phi,
    LLbarPhi,
    LOmegaPhi,
    LbarOmegaPhi,
    LOmega2Phi,
    LbarOmega2Phi,
    L2OmegaPhi,
    Lbar2OmegaPhi,
}

impl Quantity {
    pub const ALL: [Quantity; 16] = [
        Quantity::Phi,
        Quantity::LPhi,
        Quantity::LbarPhi,
        Quantity::OmegaPhi,
        Quantity::Omega2Phi,
        Quantity::Omega3Phi,
        Quantity::SlashedNablaPhi,
        Quantity::L2Phi,
        Quantity::Lbar2Phi,
        Quantity::LLbarPhi,
        Quantity::LOmegaPhi,
        Quantity::LbarOmegaPhi,
        Quantity::LOmega2Phi,
        Quantity::LbarOmega2Phi,
        Quantity::L2OmegaPhi,
        Quantity::Lbar2OmegaPhi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Phi => "phi",
            Quantity::LPhi => "L_phi",
            Quantity::LbarPhi => "Lbar_phi",
            Quantity::OmegaPhi => "Omega_phi",
            Quantity::Omega2Phi => "Omega2_phi",
            Quantity::Omega3Phi => "Omega3_phi",
            Quantity::SlashedNablaPhi => "nabla_phi",
            Quantity::L2Phi => "L2_phi",
            Quantity::Lbar2Phi => "Lbar2_phi",
            Quantity::LLbarPhi => "L_Lbar_phi",
            Quantity::LOmegaPhi => "L_Omega_phi",
            Quantity::LbarOmegaPhi => "Lbar_Omega_phi",
            Quantity::LOmega2Phi => "L_Omega2_phi",
            Quantity::LbarOmega2Phi => "Lbar_Omega2_phi",
            Quantity::L2OmegaPhi => "L2_Omega_phi",
            Quantity::Lbar2OmegaPhi => "Lbar2_Omega_phi",
        }
    }

    /// Number of angular derivatives in the quantity.
    pub fn omega_order(self) -> u32 {
        match self {
            Quantity::OmegaPhi
            | Quantity::SlashedNablaPhi
            | Quantity::LOmegaPhi
            | Quantity::LbarOmegaPhi
            | Quantity::L2OmegaPhi
            | Quantity::Lbar2OmegaPhi => 1,
            Quantity::Omega2Phi | Quantity::LOmega2Phi | Quantity::LbarOmega2Phi => 2,
            Quantity::Omega3Phi => 3,
            _ => 0,
        }
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .iter()
            .copied()
            .find(|q| q.name() == s)
            .ok_or_else(|| Error::UnknownQuantity(s.to_string()))
    }
}

/// Axis of a one-dimensional difference.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NullAxis {
    /// Along `ub` (the `L` direction).
    Outgoing,
    /// Along `u` (the `Lbar` direction).
    Ingoing,
}

/// Second-order difference along a null axis: central in the interior,
/// three-point one-sided at the ends.
pub fn null_derivative<T: Real>(grid: &NullGrid<T>, field: &[T], axis: NullAxis) -> Vec<T> {
    assert_eq!(field.len(), grid.node_count());
    let mut out = vec![T::zero(); field.len()];
    let (n, h) = match axis {
        NullAxis::Outgoing => (grid.nodes_ub(), grid.h_ub()),
        NullAxis::Ingoing => (grid.nodes_u(), grid.h_u()),
    };
    let inv2h = T::one() / (T::lit(2.0) * h);
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    let lines = match axis {
        NullAxis::Outgoing => grid.nodes_u(),
        NullAxis::Ingoing => grid.nodes_ub(),
    };
    let idx = |line: usize, k: usize, m: usize| match axis {
        NullAxis::Outgoing => grid.index(line, k, m),
        NullAxis::Ingoing => grid.index(k, line, m),
    };
    for line in 0..lines {
        for m in 0..grid.n_theta {
            let f = |k: usize| field[idx(line, k, m)];
            out[idx(line, 0, m)] = (-three * f(0) + four * f(1) - f(2)) * inv2h;
            for k in 1..n - 1 {
                out[idx(line, k, m)] = (f(k + 1) - f(k - 1)) * inv2h;
            }
            out[idx(line, n - 1, m)] = (three * f(n - 1) - four * f(n - 2) + f(n - 3)) * inv2h;
        }
    }
    out
}

/// Spectral angular derivative of every sphere block.
pub fn angular_derivative<T: Real>(grid: &NullGrid<T>, ops: &AngularOps<T>, field: &[T], order: u32) -> Vec<T> {
    let mut out = vec![T::zero(); field.len()];
    if grid.is_spherical() || order == 0 {
        if order == 0 {
            out.copy_from_slice(field);
        }
        return out;
    }
    for i in 0..grid.nodes_u() {
        for j in 0..grid.nodes_ub() {
            let b = grid.block(i, j);
            ops.derivative_into(&field[b.clone()], order, &mut out[b]);
        }
    }
    out
}

/// Pair of frame fields whose commutator is checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommutatorPair {
    LOmega,
    LbarOmega,
}

/// Largest discrepancy between the cell-centred null difference of
/// `Omega f` and the corner average of `Omega` applied to the node-stored
/// null derivative of `f`. Both approximate the same commuting
/// derivatives, so the residual is `O(h^2)`; it is exactly zero without an
/// angular axis.
pub fn commutator_residual_field<T: Real>(grid: &NullGrid<T>, f: &[T], pair: CommutatorPair) -> T {
    if grid.is_spherical() {
        return T::zero();
    }
    let ops = AngularOps::new(grid.n_theta);
    let omega_f = angular_derivative(grid, &ops, f, 1);
    let axis = match pair {
        CommutatorPair::LOmega => NullAxis::Outgoing,
        CommutatorPair::LbarOmega => NullAxis::Ingoing,
    };
    let null_f = null_derivative(grid, f, axis);
    let omega_null_f = angular_derivative(grid, &ops, &null_f, 1);
    let quarter = T::lit(0.25);
    let mut worst = T::zero();
    for i in 0..grid.n_u {
        for j in 0..grid.n_ub {
            for m in 0..grid.n_theta {
                let s = grid.index(i, j, m);
                let w = grid.index(i + 1, j, m);
                let e = grid.index(i, j + 1, m);
                let n = grid.index(i + 1, j + 1, m);
                let cell = match pair {
                    CommutatorPair::LOmega => {
                        ((omega_f[e] - omega_f[s]) + (omega_f[n] - omega_f[w])) / (T::lit(2.0) * grid.h_ub())
                    }
                    CommutatorPair::LbarOmega => {
                        ((omega_f[w] - omega_f[s]) + (omega_f[n] - omega_f[e])) / (T::lit(2.0) * grid.h_u())
                    }
                };
                let node = quarter * (omega_null_f[s] + omega_null_f[w] + omega_null_f[e] + omega_null_f[n]);
                worst = worst.max((cell - node).abs());
            }
        }
    }
    worst
}

impl<T: Real> FieldState<T> {
    /// Wraps evolved values and computes the stored frame derivatives.
    pub fn from_values(
        grid: NullGrid<T>,
        values: Vec<T>,
        nonlinearity: Nonlinearity,
        forcing: Option<SharedForcing<T>>,
    ) -> Self {
        assert_eq!(values.len(), grid.node_count());
        let angular = AngularOps::new(grid.n_theta);
        let frame = FrameFields {
            l_phi: null_derivative(&grid, &values, NullAxis::Outgoing),
            lbar_phi: null_derivative(&grid, &values, NullAxis::Ingoing),
            omega_phi: angular_derivative(&grid, &angular, &values, 1),
        };
        Self {
            grid,
            values,
            frame,
            nonlinearity,
            forcing,
            angular,
        }
    }

    pub fn angular_ops(&self) -> &AngularOps<T> {
        &self.angular
    }

    pub fn phi(&self, i: usize, j: usize, m: usize) -> T {
        self.values[self.grid.index(i, j, m)]
    }

    pub fn frame_sample(&self, i: usize, j: usize, m: usize) -> FrameSample<T> {
        let k = self.grid.index(i, j, m);
        let omega = self.frame.omega_phi[k];
        FrameSample {
            phi: self.values[k],
            l_phi: self.frame.l_phi[k],
            lbar_phi: self.frame.lbar_phi[k],
            omega_phi: omega,
            slashed_nabla_phi: omega / self.grid.r(i, j),
        }
    }

    /// Whether angular quantities vanish by construction.
    pub fn angular_structurally_zero(&self) -> bool {
        self.grid.is_spherical()
    }

    /// Samples of `quantity` at every node. Second derivatives are nested
    /// differences of the stored first derivatives.
    pub fn quantity(&self, quantity: Quantity) -> Vec<T> {
        let g = &self.grid;
        let d_ub = |f: &[T]| null_derivative(g, f, NullAxis::Outgoing);
        let d_u = |f: &[T]| null_derivative(g, f, NullAxis::Ingoing);
        let d_th = |f: &[T], k: u32| angular_derivative(g, &self.angular, f, k);
        match quantity {
            Quantity::Phi => self.values.clone(),
            Quantity::LPhi => self.frame.l_phi.clone(),
            Quantity::LbarPhi => self.frame.lbar_phi.clone(),
            Quantity::OmegaPhi => self.frame.omega_phi.clone(),
            Quantity::Omega2Phi => d_th(&self.values, 2),
            Quantity::Omega3Phi => d_th(&self.values, 3),
            Quantity::SlashedNablaPhi => {
                let mut out = self.frame.omega_phi.clone();
                for i in 0..g.nodes_u() {
                    for j in 0..g.nodes_ub() {
                        let r = g.r(i, j);
                        for v in &mut out[g.block(i, j)] {
                            *v = *v / r;
                        }
                    }
                }
                out
            }
            Quantity::L2Phi => d_ub(&self.frame.l_phi),
            Quantity::Lbar2Phi => d_u(&self.frame.lbar_phi),
            Quantity::LLbarPhi => d_ub(&self.frame.lbar_phi),
            Quantity::LOmegaPhi => d_ub(&self.frame.omega_phi),
            Quantity::LbarOmegaPhi => d_u(&self.frame.omega_phi),
            Quantity::LOmega2Phi => d_ub(&d_th(&self.values, 2)),
            Quantity::LbarOmega2Phi => d_u(&d_th(&self.values, 2)),
            Quantity::L2OmegaPhi => d_ub(&d_ub(&self.frame.omega_phi)),
            Quantity::Lbar2OmegaPhi => d_u(&d_u(&self.frame.omega_phi)),
        }
    }

    pub fn commutator_residual(&self, pair: CommutatorPair) -> T {
        commutator_residual_field(&self.grid, &self.values, pair)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |a, &v| a.max(v.abs()))
    }

    /// Writes the field as a plain-text header followed by little-endian `f64` values.
    pub fn write_checkpoint(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io {
            path: path.display().to_string(),
            source,
        };
        let g = &self.grid;
        let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        let header = format!(
            "shortpulse-checkpoint 1\nscalar f64\ndim {}\nsymmetry {}\nu0 {:e}\nu_end {:e}\ndelta {:e}\nn_u {}\nn_ub {}\nn_theta {}\nnonlinearity {}\nordering u,ub,theta\ncount {}\nend\n",
            g.dim.as_usize(),
            match g.symmetry {
                Symmetry::Spherical => "spherical",
                Symmetry::FullAngular => "full-angular",
            },
            g.u0.as_f64(),
            g.u_end.as_f64(),
            g.delta.as_f64(),
            g.n_u,
            g.n_ub,
            g.n_theta,
            self.nonlinearity.label(),
            self.values.len(),
        );
        file.write_all(header.as_bytes()).map_err(io)?;
        for v in &self.values {
            file.write_all(&v.as_f64().to_le_bytes()).map_err(io)?;
        }
        file.flush().map_err(io)
    }
}

/// Contents of a checkpoint file.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub grid: NullGrid<f64>,
    pub nonlinearity: Nonlinearity,
    pub values: Vec<f64>,
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let io = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let bad = |msg: &str| Error::Checkpoint(format!("{}: {msg}", path.display()));
    let mut reader = BufReader::new(std::fs::File::open(path).map_err(io)?);
    let mut fields = std::collections::HashMap::new();
    let mut line = String::new();
    reader.read_line(&mut line).map_err(io)?;
    if line.trim() != "shortpulse-checkpoint 1" {
        return Err(bad("missing magic line"));
    }
    loop {
        line.clear();
        if reader.read_line(&mut line).map_err(io)? == 0 {
            return Err(bad("header not terminated"));
        }
        let l = line.trim();
        if l == "end" {
            break;
        }
        let (k, v) = l.split_once(' ').ok_or_else(|| bad("malformed header line"))?;
        fields.insert(k.to_string(), v.to_string());
    }
    let get = |k: &str| fields.get(k).ok_or_else(|| bad(&format!("missing `{k}`")));
    let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| bad(&format!("bad `{k}`"))) };
    let count = |k: &str| -> Result<usize> { get(k)?.parse().map_err(|_| bad(&format!("bad `{k}`"))) };
    let dim = Dimension::from_usize(count("dim")?)?;
    let symmetry = match get("symmetry")?.as_str() {
        "spherical" => Symmetry::Spherical,
        "full-angular" => Symmetry::FullAngular,
        _ => return Err(bad("bad `symmetry`")),
    };
    let grid = build_grid(
        num("u0")?,
        num("u_end")?,
        num("delta")?,
        Resolution::new(count("n_u")?, count("n_ub")?, count("n_theta")?),
        dim,
        symmetry,
    )?;
    let nonlinearity = Nonlinearity::parse(get("nonlinearity")?)?;
    let n = count("count")?;
    if n != grid.node_count() {
        return Err(bad("count does not match grid"));
    }
    let mut bytes = Vec::with_capacity(8 * n);
    reader.read_to_end(&mut bytes).map_err(io)?;
    if bytes.len() != 8 * n {
        return Err(bad("payload length mismatch"));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok(Checkpoint {
        grid,
        nonlinearity,
        values,
    })
}
