//! Parametric worst-case plant families.
//!
//! * `thm1`: two nodes, `A = r e₂e₁ᵀ`, initial state tuned so the deadbeat
//!   ratio tends to the bound as `r → ∞`.
//! * `sink`: two nodes, node 2 a sink with self-coupling `r`.
//! * `path`: three nodes in a chain `1 → 2 → 3` with weights `r`, `s`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::sweep::GridPoint;
use crate::error::{Error, Result};
use crate::graphs::DirectedGraph;
use crate::model::Plant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Thm1,
    Sink,
    Path,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Thm1 => "thm1",
            Family::Sink => "sink",
            Family::Path => "path",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "thm1" => Ok(Family::Thm1),
            "sink" => Ok(Family::Sink),
            "path" => Ok(Family::Path),
            other => Err(Error::InvalidArgument(format!(
                "unknown family `{other}` (expected thm1, sink or path)"
            ))),
        }
    }
}

/// A family member together with its plant graph.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyInstance {
    pub family: Family,
    pub eps: f64,
    pub r: f64,
    pub s: Option<f64>,
    pub plant: Plant,
    pub graph: DirectedGraph,
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("eps must be positive and finite, got {eps}")))
    }
}

fn check_param(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { field: name.into() })
    }
}

fn graph(n: usize, edges: &[(usize, usize)]) -> DirectedGraph {
    let mut g = DirectedGraph::empty(n);
    for &(from, to) in edges {
        g.add_edge(from, to);
    }
    g
}

/// `x₀ = c/(εr) e₁`, `w₀ = c/(ε²r) e₁ − e₂` with
/// `c = (ε² + 1)(√(4ε² + 1) + 1)/2`.
pub fn thm1_initial_state(eps: f64, r: f64) -> (DVector<f64>, DVector<f64>) {
    let e2 = eps * eps;
    let c = (e2 + 1.0) * ((4.0 * e2 + 1.0).sqrt() + 1.0) / 2.0;
    let x0 = DVector::from_vec(vec![c / (eps * r), 0.0]);
    let w0 = DVector::from_vec(vec![c / (e2 * r), -1.0]);
    (x0, w0)
}

pub fn family_thm1(eps: f64, r: f64) -> Result<FamilyInstance> {
    check_eps(eps)?;
    check_param("r", r)?;
    if r == 0.0 {
        return Err(Error::InvalidArgument("thm1 family needs r != 0".into()));
    }
    let mut a = DMatrix::zeros(2, 2);
    a[(1, 0)] = r;
    let (x0, w0) = thm1_initial_state(eps, r);
    let plant = Plant::new(a, DVector::from_element(2, eps), DVector::from_element(2, 1.0), x0, w0, eps)?;
    Ok(FamilyInstance {
        family: Family::Thm1,
        eps,
        r,
        s: None,
        plant,
        graph: graph(2, &[(0, 1)]),
    })
}

pub fn family_sink(eps: f64, r: f64) -> Result<FamilyInstance> {
    check_eps(eps)?;
    check_param("r", r)?;
    let mut a = DMatrix::zeros(2, 2);
    a[(1, 1)] = r;
    let plant = Plant::new(
        a,
        DVector::from_element(2, eps),
        DVector::from_element(2, 1.0),
        DVector::zeros(2),
        DVector::from_vec(vec![0.0, 1.0]),
        eps,
    )?;
    Ok(FamilyInstance {
        family: Family::Sink,
        eps,
        r,
        s: None,
        plant,
        graph: graph(2, &[(0, 1), (1, 1)]),
    })
}

pub fn family_path(eps: f64, r: f64, s: f64) -> Result<FamilyInstance> {
    check_eps(eps)?;
    check_param("r", r)?;
    check_param("s", s)?;
    let mut a = DMatrix::zeros(3, 3);
    a[(1, 0)] = r;
    a[(2, 1)] = s;
    let plant = Plant::new(
        a,
        DVector::from_element(3, eps),
        DVector::from_element(3, 1.0),
        DVector::zeros(3),
        DVector::from_vec(vec![1.0, 0.0, 0.0]),
        eps,
    )?;
    Ok(FamilyInstance {
        family: Family::Path,
        eps,
        r,
        s: Some(s),
        plant,
        graph: graph(3, &[(0, 1), (1, 2)]),
    })
}

pub fn family(kind: Family, eps: f64, point: GridPoint) -> Result<FamilyInstance> {
    match (kind, point.s) {
        (Family::Thm1, None) => family_thm1(eps, point.r),
        (Family::Sink, None) => family_sink(eps, point.r),
        (Family::Path, Some(s)) => family_path(eps, point.r, s),
        (Family::Path, None) => Err(Error::InvalidArgument("path family needs grid points r:s".into())),
        (_, Some(_)) => Err(Error::InvalidArgument(format!("{kind} family takes a single parameter r"))),
    }
}

/// `(J*, J_Δ)` on the `thm1` family, evaluated symbolically, with
/// `s = √(4ε² + 1)`:
///
/// ```text
/// J*  = ((ε²+1)s + 5ε² + 4ε⁴ + 1)/(2ε²)
///       + ((2ε² + s + 1)s + ε⁴(2ε² + s + 5))/(2ε²r²)
/// J_Δ = (ε²+1)(3ε²s + 5ε² + 4ε⁴ + s + 1)/(2ε⁴)
///       + (ε²+1)(ε²s + ε⁴s + ε² + 3ε⁴ + 2ε⁶)/(2ε⁴r²)
/// ```
///
/// The `ε⁴(2ε² + s + 5)` term is what the quadratic form in `X₂₂` gives for
/// this initial state; it is often dropped in print, which understates `J*`
/// by `O(1/r²)` without changing the limit of the ratio.
pub fn thm1_costs(eps: f64, r: f64) -> (f64, f64) {
    let e2 = eps * eps;
    let e4 = e2 * e2;
    let e6 = e4 * e2;
    let r2 = r * r;
    let s = (4.0 * e2 + 1.0).sqrt();
    let j_opt = ((e2 + 1.0) * s + 5.0 * e2 + 4.0 * e4 + 1.0) / (2.0 * e2)
        + ((2.0 * e2 + s + 1.0) * s + e4 * (2.0 * e2 + s + 5.0)) / (2.0 * e2 * r2);
    let j_deadbeat = (e2 + 1.0) * (3.0 * e2 * s + 5.0 * e2 + 4.0 * e4 + s + 1.0) / (2.0 * e4)
        + (e2 + 1.0) * (e2 * s + e4 * s + e2 + 3.0 * e4 + 2.0 * e6) / (2.0 * e4 * r2);
    (j_opt, j_deadbeat)
}

/// `(J_Θ, J_Δ)` on the `sink` family, evaluated symbolically.
pub fn sink_family_costs(eps: f64, r: f64) -> (f64, f64) {
    let e2 = eps * eps;
    let r2 = r * r;
    let root = (r2 * r2 + 2.0 * r2 * e2 - 2.0 * r2 + e2 * e2 + 2.0 * e2 + 1.0).sqrt();
    ((root + r2 + e2 + 1.0) / 2.0, r2 + e2 + 1.0)
}
