//! Sphere norms, truncated cone norms and the E / Ebar / F / Fbar families.
//!
//! Cone norms are taken over the truncated cones
//! `C_u = {0 <= ub' <= ub}` and `Cbar_ub = {u0 <= u' <= u}` with the
//! trapezoid rule along the null direction and the sphere measure on each
//! section. The `|u|` weights are omitted from the families.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::{Dimension, NullGrid};
use crate::scalar::Real;
use crate::state::{FieldState, Quantity};

/// Exponent `p` of a sphere norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SphereExponent {
    Two,
    Four,
    Infinity,
}

impl SphereExponent {
    pub fn from_p(p: f64) -> Result<Self> {
        match p {
            p if p == 2.0 => Ok(Self::Two),
            p if p == 4.0 => Ok(Self::Four),
            p if p.is_infinite() && p > 0.0 => Ok(Self::Infinity),
            _ => Err(Error::Unsupported(format!("sphere norm exponent {p}"))),
        }
    }
}

/// `(int_S |q|^p)^(1/p)` (or the max for `p = inf`) at node `(i, j)`.
pub fn sphere_norm_at<T: Real>(grid: &NullGrid<T>, field: &[T], i: usize, j: usize, p: SphereExponent) -> T {
    let block = &field[grid.block(i, j)];
    if p == SphereExponent::Infinity {
        return block.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
    }
    let w = grid.sphere_measure_at(i, j);
    match p {
        SphereExponent::Two => w.integrate(&block.iter().map(|&v| v * v).collect::<Vec<_>>()).sqrt(),
        _ => w
            .integrate(&block.iter().map(|&v| (v * v) * (v * v)).collect::<Vec<_>>())
            .sqrt()
            .sqrt(),
    }
}

pub fn sphere_norm<T: Real>(state: &FieldState<T>, u: T, ub: T, quantity: Quantity, p: SphereExponent) -> Result<T> {
    let (i, j) = state.grid.node_at(u, ub)?;
    Ok(sphere_norm_at(&state.grid, &state.quantity(quantity), i, j, p))
}

/// `int_S q^2` at every node of the `(u, ub)` plane, indexed `i * nodes_ub + j`.
pub fn sphere_square_integrals<T: Real>(grid: &NullGrid<T>, field: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(grid.nodes_u() * grid.nodes_ub());
    for i in 0..grid.nodes_u() {
        for j in 0..grid.nodes_ub() {
            let w = grid.sphere_area(grid.r(i, j)) / T::from_count(grid.n_theta);
            let s: T = field[grid.block(i, j)].iter().map(|&v| v * v).sum();
            out.push(w * s);
        }
    }
    out
}

/// Running trapezoid integral of `s` in `ub` along each outgoing cone.
pub fn cumulative_outgoing<T: Real>(grid: &NullGrid<T>, s: &[T]) -> Vec<T> {
    let (nu, nub) = (grid.nodes_u(), grid.nodes_ub());
    let half_h = T::lit(0.5) * grid.h_ub();
    let mut out = vec![T::zero(); nu * nub];
    for i in 0..nu {
        for j in 1..nub {
            let k = i * nub + j;
            out[k] = out[k - 1] + half_h * (s[k - 1] + s[k]);
        }
    }
    out
}

/// Running trapezoid integral of `s` in `u` along each ingoing cone.
pub fn cumulative_ingoing<T: Real>(grid: &NullGrid<T>, s: &[T]) -> Vec<T> {
    let (nu, nub) = (grid.nodes_u(), grid.nodes_ub());
    let half_h = T::lit(0.5) * grid.h_u();
    let mut out = vec![T::zero(); nu * nub];
    for i in 1..nu {
        for j in 0..nub {
            let k = i * nub + j;
            out[k] = out[k - nub] + half_h * (s[k - nub] + s[k]);
        }
    }
    out
}

fn sqrt_all<T: Real>(v: Vec<T>) -> Vec<T> {
    v.into_iter().map(|x| x.max(T::zero()).sqrt()).collect()
}

/// `||q||_{L^2(C_u)}` on every truncated outgoing cone, indexed like the plane.
pub fn outgoing_cone_norms<T: Real>(grid: &NullGrid<T>, field: &[T]) -> Vec<T> {
    sqrt_all(cumulative_outgoing(grid, &sphere_square_integrals(grid, field)))
}

/// `||q||_{L^2(Cbar_ub)}` on every truncated ingoing cone.
pub fn ingoing_cone_norms<T: Real>(grid: &NullGrid<T>, field: &[T]) -> Vec<T> {
    sqrt_all(cumulative_ingoing(grid, &sphere_square_integrals(grid, field)))
}

/// `||q||_{L^2(C_u^{[0, ub*]})}`.
pub fn cone_norm_outgoing<T: Real>(state: &FieldState<T>, u: T, ub_star: T, quantity: Quantity) -> Result<T> {
    let g = &state.grid;
    let (i, j) = g.node_at(u, ub_star)?;
    let s = sphere_square_integrals(g, &state.quantity(quantity));
    Ok(cumulative_outgoing(g, &s)[i * g.nodes_ub() + j].sqrt())
}

/// `||q||_{L^2(Cbar_ub^{[u0, u*]})}`.
pub fn cone_norm_ingoing<T: Real>(state: &FieldState<T>, ub: T, u_star: T, quantity: Quantity) -> Result<T> {
    let g = &state.grid;
    let (i, j) = g.node_at(u_star, ub)?;
    let s = sphere_square_integrals(g, &state.quantity(quantity));
    Ok(cumulative_ingoing(g, &s)[i * g.nodes_ub() + j].sqrt())
}

/// One named column of a [`NormReport`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormColumn {
    pub name: &'static str,
    /// Vanishes by symmetry (angular entries in spherical mode).
    pub structurally_zero: bool,
}

/// Column values at one node `(i, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormRow<T> {
    pub i: usize,
    pub j: usize,
    pub u: T,
    pub ub: T,
    pub values: Vec<T>,
}

/// Every norm of the hierarchy at every node of the `(u, ub)` plane.
#[derive(Clone, Debug, PartialEq)]
pub struct NormReport<T> {
    pub delta: T,
    pub dim: Dimension,
    pub nodes_u: usize,
    pub nodes_ub: usize,
    pub columns: Vec<NormColumn>,
    /// u-major, then ub.
    pub rows: Vec<NormRow<T>>,
}

/// Cone components, in column order: (name, quantity, outgoing?, needs third order).
const COMPONENTS: [(&str, Quantity, bool, bool); 16] = [
    ("out_L_phi", Quantity::LPhi, true, false),
    ("out_Omega_phi", Quantity::OmegaPhi, true, false),
    ("out_L_Omega_phi", Quantity::LOmegaPhi, true, false),
    ("out_Omega2_phi", Quantity::Omega2Phi, true, false),
    ("out_L_Omega2_phi", Quantity::LOmega2Phi, true, true),
    ("out_Omega3_phi", Quantity::Omega3Phi, true, true),
    ("out_L2_phi", Quantity::L2Phi, true, false),
    ("out_L2_Omega_phi", Quantity::L2OmegaPhi, true, true),
    ("in_Omega_phi", Quantity::OmegaPhi, false, false),
    ("in_Lbar_phi", Quantity::LbarPhi, false, false),
    ("in_Omega2_phi", Quantity::Omega2Phi, false, false),
    ("in_Lbar_Omega_phi", Quantity::LbarOmegaPhi, false, false),
    ("in_Omega3_phi", Quantity::Omega3Phi, false, true),
    ("in_Lbar_Omega2_phi", Quantity::LbarOmega2Phi, false, true),
    ("in_Lbar2_phi", Quantity::Lbar2Phi, false, false),
    ("in_Lbar2_Omega_phi", Quantity::Lbar2OmegaPhi, false, true),
];

/// Family columns: (name, needs third order, angular-only).
const FAMILIES: [(&str, bool, bool); 10] = [
    ("E1", false, false),
    ("E2", false, true),
    ("E3", true, true),
    ("Ebar1", false, false),
    ("Ebar2", false, true),
    ("Ebar3", true, true),
    ("F2", false, false),
    ("F3", true, true),
    ("Fbar2", false, false),
    ("Fbar3", true, true),
];

/// Sphere columns: (name, quantity, exponent).
const SPHERE: [(&str, Quantity, SphereExponent); 4] = [
    ("sup_phi", Quantity::Phi, SphereExponent::Infinity),
    ("L4_L_phi", Quantity::LPhi, SphereExponent::Four),
    ("L4_Omega_phi", Quantity::OmegaPhi, SphereExponent::Four),
    ("L4_Lbar_phi", Quantity::LbarPhi, SphereExponent::Four),
];

/// Column names of a report in the given dimension, in CSV order (after `u,ub`).
pub fn report_columns(dim: Dimension, spherical: bool) -> Vec<NormColumn> {
    let third = dim == Dimension::Three;
    let mut cols = Vec::new();
    for &(name, needs_third, angular) in &FAMILIES {
        if needs_third && !third {
            continue;
        }
        cols.push(NormColumn {
            name,
            structurally_zero: spherical && angular,
        });
    }
    cols.push(NormColumn {
        name: "M",
        structurally_zero: false,
    });
    for &(name, q, _) in &SPHERE {
        cols.push(NormColumn {
            name,
            structurally_zero: spherical && q.omega_order() > 0,
        });
    }
    for &(name, q, _, needs_third) in &COMPONENTS {
        if needs_third && !third {
            continue;
        }
        cols.push(NormColumn {
            name,
            structurally_zero: spherical && q.omega_order() > 0,
        });
    }
    cols
}

/// Evaluates every family, sphere norm and cone component at every node.
pub fn assemble_norm_report<T: Real>(state: &FieldState<T>) -> Result<NormReport<T>> {
    let g = &state.grid;
    let third = g.dim == Dimension::Three;
    let columns = report_columns(g.dim, g.is_spherical());
    let plane = g.nodes_u() * g.nodes_ub();

    let mut component: Vec<(&str, Vec<T>)> = Vec::new();
    for &(name, q, outgoing, needs_third) in &COMPONENTS {
        if needs_third && !third {
            continue;
        }
        let values = if state.angular_structurally_zero() && q.omega_order() > 0 {
            vec![T::zero(); plane]
        } else {
            let field = state.quantity(q);
            if outgoing {
                outgoing_cone_norms(g, &field)
            } else {
                ingoing_cone_norms(g, &field)
            }
        };
        component.push((name, values));
    }
    let comp = |name: &str| -> &Vec<T> {
        &component
            .iter()
            .find(|(n, _)| *n == name)
            .expect("component column")
            .1
    };

    let mut sphere_fields: Vec<Vec<T>> = Vec::new();
    for &(_, q, _) in &SPHERE {
        sphere_fields.push(state.quantity(q));
    }

    let inv_sqrt_delta = g.delta.sqrt().recip();
    let mut rows = Vec::with_capacity(plane);
    for i in 0..g.nodes_u() {
        for j in 0..g.nodes_ub() {
            let k = i * g.nodes_ub() + j;
            let c = |name: &str| comp(name)[k];
            let mut fam: Vec<(&str, T)> = vec![
                ("E1", c("out_L_phi") + inv_sqrt_delta * c("out_Omega_phi")),
                ("E2", c("out_L_Omega_phi") + inv_sqrt_delta * c("out_Omega2_phi")),
                ("Ebar1", c("in_Omega_phi") + inv_sqrt_delta * c("in_Lbar_phi")),
                ("Ebar2", c("in_Omega2_phi") + inv_sqrt_delta * c("in_Lbar_Omega_phi")),
                ("F2", g.delta * c("out_L2_phi")),
                ("Fbar2", c("in_Lbar2_phi")),
            ];
            if third {
                fam.push(("E3", c("out_L_Omega2_phi") + inv_sqrt_delta * c("out_Omega3_phi")));
                fam.push(("Ebar3", c("in_Omega3_phi") + inv_sqrt_delta * c("in_Lbar_Omega2_phi")));
                fam.push(("F3", g.delta * c("out_L2_Omega_phi")));
                fam.push(("Fbar3", c("in_Lbar2_Omega_phi")));
            }
            let m_total: T = fam.iter().map(|&(_, v)| v).sum();
            let mut values = Vec::with_capacity(columns.len());
            for col in &columns {
                let v = if col.name == "M" {
                    m_total
                } else if let Some(&(_, v)) = fam.iter().find(|(n, _)| *n == col.name) {
                    v
                } else if let Some(s) = SPHERE.iter().position(|(n, _, _)| *n == col.name) {
                    sphere_norm_at(g, &sphere_fields[s], i, j, SPHERE[s].2)
                } else {
                    c(col.name)
                };
                values.push(v);
            }
            rows.push(NormRow {
                i,
                j,
                u: g.u(i),
                ub: g.ub(j),
                values,
            });
        }
    }
    Ok(NormReport {
        delta: g.delta,
        dim: g.dim,
        nodes_u: g.nodes_u(),
        nodes_ub: g.nodes_ub(),
        columns,
        rows,
    })
}

impl<T: Real> NormReport<T> {
    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownQuantity(name.to_string()))
    }

    pub fn row(&self, i: usize, j: usize) -> &NormRow<T> {
        &self.rows[i * self.nodes_ub + j]
    }

    pub fn value(&self, i: usize, j: usize, name: &str) -> Result<T> {
        Ok(self.row(i, j).values[self.column_index(name)?])
    }

    /// Largest value of a column over the whole plane.
    pub fn max(&self, name: &str) -> Result<T> {
        let c = self.column_index(name)?;
        Ok(self.rows.iter().fold(T::zero(), |a, r| a.max(r.values[c])))
    }

    pub fn is_structurally_zero(&self, name: &str) -> Result<bool> {
        Ok(self.columns[self.column_index(name)?].structurally_zero)
    }

    /// CSV with header `u,ub,<columns>`; every `stride`-th node in each
    /// direction plus the last one. Values use `{:.12e}`.
    pub fn write_csv<W: Write>(&self, mut w: W, stride: usize) -> std::io::Result<()> {
        let stride = stride.max(1);
        let mut header = String::from("u,ub");
        for c in &self.columns {
            header.push(',');
            header.push_str(c.name);
        }
        writeln!(w, "{header}")?;
        let keep = |k: usize, n: usize| k % stride == 0 || k + 1 == n;
        let mut line = String::new();
        for r in &self.rows {
            if !keep(r.i, self.nodes_u) || !keep(r.j, self.nodes_ub) {
                continue;
            }
            line.clear();
            let _ = write!(line, "{:.12e},{:.12e}", r.u.as_f64(), r.ub.as_f64());
            for v in &r.values {
                let _ = write!(line, ",{:.12e}", v.as_f64());
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}
