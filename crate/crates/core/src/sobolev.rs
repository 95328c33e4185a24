//! Discrete checks of the sphere and cone Sobolev inequalities.
//!
//! Each inequality `LHS <= C * RHS` is evaluated at every applicable node
//! of the `(u, ub)` plane with its `|u|` weights kept; the audit reports the
//! worst ratio `LHS / RHS`, i.e. the smallest constant `C` that makes the
//! discrete inequality hold on this solution.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::Dimension;
use crate::norms::{cumulative_ingoing, cumulative_outgoing, sphere_norm_at, sphere_square_integrals, SphereExponent};
use crate::scalar::Real;
use crate::state::{FieldState, Quantity};

/// Outgoing-cone checks skip cones shorter than this many cells, where the
/// trapezoid rule cannot resolve the onset of the field.
pub const MIN_CONE_CELLS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Lemma {
    /// `|u|^½ ||phi||_{L4(S)} <= C ||L phi||^½ (||phi|| + |u| ||nabla phi||)^½` on `C_u`, 3D.
    OutgoingCone3,
    /// L4 control along `Cbar_ub` from the data sphere, 3D.
    IngoingCone3,
    /// Sup and `L6` control on a circle, 2D.
    Circle2,
    /// `|u|^¼ ||phi||_{L4(S)}` along `C_u`, 2D.
    OutgoingCone2,
    /// `|u|^¼ ||phi||_{L4(S)}` along `Cbar_ub`, 2D.
    IngoingCone2,
}

impl Lemma {
    pub const ALL: [Lemma; 5] = [
        Lemma::OutgoingCone3,
        Lemma::IngoingCone3,
        Lemma::Circle2,
        Lemma::OutgoingCone2,
        Lemma::IngoingCone2,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Lemma::OutgoingCone3 => "outgoing-cone-3d",
            Lemma::IngoingCone3 => "ingoing-cone-3d",
            Lemma::Circle2 => "circle-2d",
            Lemma::OutgoingCone2 => "outgoing-cone-2d",
            Lemma::IngoingCone2 => "ingoing-cone-2d",
        }
    }

    pub fn dimension(self) -> Dimension {
        match self {
            Lemma::OutgoingCone3 | Lemma::IngoingCone3 => Dimension::Three,
            _ => Dimension::Two,
        }
    }

    pub fn for_dimension(dim: Dimension) -> Vec<Lemma> {
        Self::ALL.into_iter().filter(|l| l.dimension() == dim).collect()
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Lemma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.label() == s)
            .ok_or_else(|| Error::Unsupported(format!("unknown inequality `{s}`")))
    }
}

/// Worst ratio of one inequality of a lemma.
#[derive(Clone, Debug, PartialEq)]
pub struct SobolevPart<T> {
    pub label: &'static str,
    pub worst_ratio: T,
    pub at_u: T,
    pub at_ub: T,
    /// Nodes with a vanishing right-hand side but non-zero left-hand side.
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SobolevAudit<T> {
    pub lemma: Lemma,
    pub worst_ratio: T,
    pub parts: Vec<SobolevPart<T>>,
    pub nodes_checked: usize,
    pub violations: usize,
}

struct Tally<T> {
    part: SobolevPart<T>,
}

impl<T: Real> Tally<T> {
    fn new(label: &'static str) -> Self {
        Self {
            part: SobolevPart {
                label,
                worst_ratio: T::zero(),
                at_u: T::nan(),
                at_ub: T::nan(),
                violations: 0,
            },
        }
    }

    fn record(&mut self, lhs: T, rhs: T, u: T, ub: T) {
        if rhs > T::zero() {
            let ratio = lhs / rhs;
            if ratio > self.part.worst_ratio {
                self.part.worst_ratio = ratio;
                self.part.at_u = u;
                self.part.at_ub = ub;
            }
        } else if lhs > T::zero() {
            self.part.violations += 1;
        }
    }
}

/// Per-node ingredients shared by the checks.
struct Ingredients<T> {
    nub: usize,
    l2: Vec<T>,
    l4: Vec<T>,
    sup: Vec<T>,
    nabla_l2: Vec<T>,
    out_l: Vec<T>,
    out_phi: Vec<T>,
    out_nabla: Vec<T>,
    in_lbar: Vec<T>,
    in_phi: Vec<T>,
    in_w_lbar: Vec<T>,
    in_w_phi: Vec<T>,
    in_w_nabla: Vec<T>,
    in_u_nabla: Vec<T>,
}

fn ingredients<T: Real>(state: &FieldState<T>) -> Ingredients<T> {
    let g = &state.grid;
    let nub = g.nodes_ub();
    let phi = &state.values;
    let nabla = state.quantity(Quantity::SlashedNablaPhi);
    let mut l2 = Vec::new();
    let mut l4 = Vec::new();
    let mut sup = Vec::new();
    let mut nabla_l2 = Vec::new();
    for i in 0..g.nodes_u() {
        for j in 0..nub {
            l2.push(sphere_norm_at(g, phi, i, j, SphereExponent::Two));
            l4.push(sphere_norm_at(g, phi, i, j, SphereExponent::Four));
            sup.push(sphere_norm_at(g, phi, i, j, SphereExponent::Infinity));
            nabla_l2.push(sphere_norm_at(g, &nabla, i, j, SphereExponent::Two));
        }
    }
    let s_phi = sphere_square_integrals(g, phi);
    let s_l = sphere_square_integrals(g, &state.frame.l_phi);
    let s_lbar = sphere_square_integrals(g, &state.frame.lbar_phi);
    let s_nabla = sphere_square_integrals(g, &nabla);
    let weighted = |s: &[T], power: T| -> Vec<T> {
        s.iter()
            .enumerate()
            .map(|(k, &v)| v * g.u(k / nub).abs().powf(power))
            .collect()
    };
    let root = |v: Vec<T>| v.into_iter().map(|x| x.max(T::zero()).sqrt()).collect::<Vec<_>>();
    Ingredients {
        nub,
        l2,
        l4,
        sup,
        nabla_l2,
        out_l: root(cumulative_outgoing(g, &s_l)),
        out_phi: root(cumulative_outgoing(g, &s_phi)),
        out_nabla: root(cumulative_outgoing(g, &s_nabla)),
        in_lbar: root(cumulative_ingoing(g, &s_lbar)),
        in_phi: root(cumulative_ingoing(g, &s_phi)),
        in_w_lbar: root(cumulative_ingoing(g, &weighted(&s_lbar, T::one()))),
        in_w_phi: root(cumulative_ingoing(g, &weighted(&s_phi, -T::one()))),
        in_w_nabla: root(cumulative_ingoing(g, &weighted(&s_nabla, T::one()))),
        in_u_nabla: root(cumulative_ingoing(g, &weighted(&s_nabla, T::lit(2.0)))),
    }
}

/// Evaluates the inequalities of `lemma` on `state.values`.
pub fn sobolev_check<T: Real>(state: &FieldState<T>, lemma: Lemma) -> Result<SobolevAudit<T>> {
    let g = &state.grid;
    if g.dim != lemma.dimension() {
        return Err(Error::Unsupported(format!(
            "inequality {lemma} needs a {}D state",
            lemma.dimension().as_usize()
        )));
    }
    let d = ingredients(state);
    let quarter = T::lit(0.25);
    let (mut a, mut b) = match lemma {
        Lemma::Circle2 => (Tally::new("sup"), Tally::new("l6")),
        _ => (Tally::new("l4"), Tally::new("l2")),
    };
    let outgoing = matches!(lemma, Lemma::OutgoingCone3 | Lemma::OutgoingCone2);
    let mut checked = 0;
    for i in 0..g.nodes_u() {
        for j in 0..g.nodes_ub() {
            if outgoing && j < MIN_CONE_CELLS {
                continue;
            }
            let k = i * d.nub + j;
            let k0 = j;
            let (u, ub) = (g.u(i), g.ub(j));
            let au = u.abs();
            let au0 = g.u0.abs();
            checked += 1;
            match lemma {
                Lemma::OutgoingCone3 => {
                    a.record(
                        au.sqrt() * d.l4[k],
                        (d.out_l[k] * (d.out_phi[k] + au * d.out_nabla[k])).sqrt(),
                        u,
                        ub,
                    );
                    b.record(d.l2[k], (d.out_l[k] * d.out_phi[k]).sqrt(), u, ub);
                }
                Lemma::IngoingCone3 => {
                    let bracket = d.in_w_phi[k] * d.in_w_phi[k] + d.in_w_nabla[k] * d.in_w_nabla[k];
                    a.record(
                        au.sqrt() * d.l4[k],
                        au0.sqrt() * d.l4[k0] + d.in_w_lbar[k].sqrt() * bracket.powf(quarter),
                        u,
                        ub,
                    );
                    b.record(d.l2[k], d.l2[k0] + (d.in_lbar[k] * d.in_phi[k]).sqrt(), u, ub);
                }
                Lemma::Circle2 => {
                    a.record(d.sup[k], au.sqrt() * d.nabla_l2[k] + d.l2[k] / au.sqrt(), u, ub);
                    let l4 = d.l4[k];
                    let l6 = sphere_l6_power(state, i, j);
                    let n2 = d.nabla_l2[k] * d.nabla_l2[k];
                    let f2 = d.l2[k] * d.l2[k];
                    b.record(l6, (l4 * l4) * (l4 * l4) * (au * n2 + f2 / au), u, ub);
                }
                Lemma::OutgoingCone2 => {
                    a.record(
                        au.powf(quarter) * d.l4[k],
                        d.out_l[k].sqrt() * (d.out_phi[k].sqrt() + au.sqrt() * d.out_nabla[k].sqrt()),
                        u,
                        ub,
                    );
                    b.record(d.l2[k], (d.out_l[k] * d.out_phi[k]).sqrt(), u, ub);
                }
                Lemma::IngoingCone2 => {
                    a.record(
                        au.powf(quarter) * d.l4[k],
                        au0.powf(quarter) * d.l4[k0] + d.in_lbar[k].sqrt() * (d.in_phi[k].sqrt() + d.in_u_nabla[k].sqrt()),
                        u,
                        ub,
                    );
                    b.record(d.l2[k], d.l2[k0] + (d.in_lbar[k] * d.in_phi[k]).sqrt(), u, ub);
                }
            }
        }
    }
    let parts = vec![a.part, b.part];
    let worst_ratio = parts.iter().fold(T::zero(), |m, p| m.max(p.worst_ratio));
    let violations = parts.iter().map(|p| p.violations).sum();
    Ok(SobolevAudit {
        lemma,
        worst_ratio,
        parts,
        nodes_checked: checked,
        violations,
    })
}

fn sphere_l6_power<T: Real>(state: &FieldState<T>, i: usize, j: usize) -> T {
    let g = &state.grid;
    let w = g.sphere_measure_at(i, j);
    let block = &state.values[g.block(i, j)];
    w.integrate(&block.iter().map(|&v| (v * v) * (v * v) * (v * v)).collect::<Vec<_>>())
}
