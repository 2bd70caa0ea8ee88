//! Control design strategies: maps from a plant model `(A, B, D)` to a
//! [`Controller`].
//!
//! The deadbeat, sink-aware and PI designs are limited-model-information
//! strategies: row `i` of every controller matrix is computed from row `i` of
//! `A`, `b_ii`, `d_ii` and (for the sink-aware design) whether node `i` is a
//! sink. Rows are built entry by entry from scalars so that this locality is
//! exact in floating point, not only algebraically.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::DirectedGraph;
use crate::model::{Controller, Plant};
use crate::riccati::{self, DareOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Deadbeat,
    Theta,
    OptimalCentralized,
    ProportionalIntegral,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::Deadbeat,
        StrategyKind::Theta,
        StrategyKind::OptimalCentralized,
        StrategyKind::ProportionalIntegral,
    ];

    /// Short name used on the command line and in sweep tables.
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Deadbeat => "deadbeat",
            StrategyKind::Theta => "theta",
            StrategyKind::OptimalCentralized => "optimal",
            StrategyKind::ProportionalIntegral => "pi",
        }
    }

    /// Whether row `i` of the design depends only on subsystem `i`'s model.
    pub fn is_limited_model_information(self) -> bool {
        !matches!(self, StrategyKind::OptimalCentralized)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "deadbeat" | "delta" => Ok(StrategyKind::Deadbeat),
            "theta" => Ok(StrategyKind::Theta),
            "optimal" | "optimal_centralized" | "centralized" => Ok(StrategyKind::OptimalCentralized),
            "pi" | "proportional_integral" => Ok(StrategyKind::ProportionalIntegral),
            other => Err(Error::InvalidArgument(format!(
                "unknown strategy `{other}` (expected deadbeat, theta, optimal or pi)"
            ))),
        }
    }
}

/// Synthesize `kind` for `p`. `plant_graph` locates the sinks for
/// [`StrategyKind::Theta`] and is ignored otherwise.
pub fn synthesize(
    p: &Plant,
    plant_graph: &DirectedGraph,
    kind: StrategyKind,
    dare: &DareOptions,
) -> Result<Controller> {
    match kind {
        StrategyKind::Deadbeat => Ok(synth_deadbeat(p)),
        StrategyKind::Theta => synth_theta(p, plant_graph),
        StrategyKind::OptimalCentralized => synth_optimal_centralized(p, dare),
        StrategyKind::ProportionalIntegral => synth_pi(p),
    }
}

/// Deadbeat design: `A_K = D`, `B_K = −B⁻¹D²`, `C_K = I`, `D_K = −B⁻¹(A + D)`.
///
/// The closed loop satisfies `x(k) = 0` and `u(k) + w(k) = 0` for all `k ≥ 2`.
pub fn synth_deadbeat(p: &Plant) -> Controller {
    let n = p.n();
    let (a, b, d) = (&p.a, &p.b_diag, &p.d_diag);
    Controller {
        a_k: DMatrix::from_diagonal(d),
        b_k: DMatrix::from_fn(n, n, |i, j| if i == j { -(d[i] * d[i]) / b[i] } else { 0.0 }),
        c_k: DMatrix::identity(n, n),
        d_k: DMatrix::from_fn(n, n, |i, j| {
            let dij = if i == j { d[i] } else { 0.0 };
            // `+ 0.0` turns the −0 of an absent coupling into 0.
            -(a[(i, j)] + dij) / b[i] + 0.0
        }),
    }
}

/// Optimal centralized controller from the Riccati gains:
/// `A_K = D`, `B_K = G₁ + D G₂ B⁻¹ − G₂ B⁻¹ A`, `C_K = I`, `D_K = G₂ B⁻¹`.
pub fn synth_optimal_centralized(p: &Plant, dare: &DareOptions) -> Result<Controller> {
    let sol = riccati::solve_for_plant(p, dare)?;
    Ok(optimal_from_gains(p, &sol.g1, &sol.g2))
}

pub(crate) fn optimal_from_gains(p: &Plant, g1: &DMatrix<f64>, g2: &DMatrix<f64>) -> Controller {
    let n = p.n();
    let g2_binv = g2 * p.b_inv();
    Controller {
        a_k: p.d(),
        b_k: g1 + p.d() * &g2_binv - &g2_binv * &p.a,
        c_k: DMatrix::identity(n, n),
        d_k: g2_binv,
    }
}

/// Gain of the isolated-node optimal law applied on a sink with self-coupling
/// `a` and input gain `b`:
///
/// ```text
/// f = 2 / (b² + a² + 1 + √(a⁴ + 2a²b² − 2a² + b⁴ + 2b² + 1)) − 1.
/// ```
///
/// Always in `(−1, 0)`.
pub fn sink_gain(a: f64, b: f64) -> f64 {
    let (a2, b2) = (a * a, b * b);
    let disc = a2 * a2 + 2.0 * a2 * b2 - 2.0 * a2 + b2 * b2 + 2.0 * b2 + 1.0;
    2.0 / (b2 + a2 + 1.0 + disc.sqrt()) - 1.0
}

/// Per-node sink gains: `f_i` on sinks, `0` elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct SinkGainTable {
    pub f: DVector<f64>,
    pub is_sink: Vec<bool>,
}

impl SinkGainTable {
    pub fn new(p: &Plant, plant_graph: &DirectedGraph) -> Result<Self> {
        if plant_graph.node_count() != p.n() {
            return Err(Error::Dimension {
                field: "plant_graph".into(),
                expected: p.n(),
                found: plant_graph.node_count(),
            });
        }
        let is_sink: Vec<bool> = (0..p.n()).map(|i| plant_graph.is_sink(i)).collect();
        let f = DVector::from_fn(p.n(), |i, _| {
            if is_sink[i] {
                sink_gain(p.a[(i, i)], p.b_diag[i])
            } else {
                0.0
            }
        });
        Ok(SinkGainTable { f, is_sink })
    }

    /// Feedback weight used by the sink-aware design: `f_i` on sinks and `−1`
    /// on every other node, where `−1` reproduces the deadbeat rows exactly.
    pub fn feedback_weight(&self, i: usize) -> f64 {
        if self.is_sink[i] {
            self.f[i]
        } else {
            -1.0
        }
    }
}

/// Sink-aware design: deadbeat on non-sinks, the isolated-node optimum on
/// sinks. With `F = diag(φ_i)` from [`SinkGainTable::feedback_weight`],
///
/// ```text
/// A_K = D,  B_K = B⁻¹D(F + I)A − B⁻¹D²,  C_K = I,  D_K = B⁻¹(FA − D).
/// ```
///
/// Nodes may be numbered in any order.
pub fn synth_theta(p: &Plant, plant_graph: &DirectedGraph) -> Result<Controller> {
    let table = SinkGainTable::new(p, plant_graph)?;
    Ok(theta_from_table(p, &table))
}

pub fn theta_from_table(p: &Plant, table: &SinkGainTable) -> Controller {
    let n = p.n();
    let (a, b, d) = (&p.a, &p.b_diag, &p.d_diag);
    let phi: Vec<f64> = (0..n).map(|i| table.feedback_weight(i)).collect();
    Controller {
        a_k: DMatrix::from_diagonal(d),
        b_k: DMatrix::from_fn(n, n, |i, j| {
            let coupled = d[i] * (phi[i] + 1.0) * a[(i, j)] / b[i];
            if i == j {
                coupled - d[i] * d[i] / b[i]
            } else {
                coupled
            }
        }),
        c_k: DMatrix::identity(n, n),
        d_k: DMatrix::from_fn(n, n, |i, j| {
            let dij = if i == j { d[i] } else { 0.0 };
            (phi[i] * a[(i, j)] - dij) / b[i]
        }),
    }
}

/// Explicit gains of the PI deadbeat law `u(k) = Kp x(k) + Ki Σ_{i≤k} x(i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiGains {
    #[serde(rename = "Kp", with = "rows")]
    pub kp: DMatrix<f64>,
    #[serde(rename = "Ki", with = "rows")]
    pub ki: DMatrix<f64>,
}

mod rows {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        crate::model::matrix_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
    }
}

fn require_identity_d(p: &Plant) -> Result<()> {
    match p.d_diag.iter().position(|&d| d != 1.0) {
        Some(index) => Err(Error::PiRequiresIdentityD {
            index: index + 1,
            value: p.d_diag[index],
        }),
        None => Ok(()),
    }
}

/// `Kp = −B⁻¹A`, `Ki = −B⁻¹`. Requires `D = I`.
pub fn pi_gains(p: &Plant) -> Result<PiGains> {
    require_identity_d(p)?;
    let n = p.n();
    let b = &p.b_diag;
    Ok(PiGains {
        kp: DMatrix::from_fn(n, n, |i, j| -p.a[(i, j)] / b[i]),
        ki: DMatrix::from_fn(n, n, |i, j| if i == j { -1.0 / b[i] } else { 0.0 }),
    })
}

/// PI deadbeat controller: the deadbeat realization at `D = I`, whose
/// integrator state carries `−B⁻¹ Σ_{i<k} x(i)`.
pub fn synth_pi(p: &Plant) -> Result<Controller> {
    require_identity_d(p)?;
    Ok(synth_deadbeat(p))
}

/// Step-reference tracking as constant-disturbance rejection. In error
/// coordinates `x̄ = x − r` the plant `x(k+1) = A x(k) + B u(k)` becomes
/// `x̄(k+1) = A x̄(k) + B (u(k) + w)` with `w = B⁻¹(A r − r)` and `D = I`.
pub fn reference_to_disturbance(
    a: &DMatrix<f64>,
    b_diag: &DVector<f64>,
    r_ref: &DVector<f64>,
    x0: &DVector<f64>,
) -> Result<Plant> {
    let n = a.nrows();
    if r_ref.len() != n {
        return Err(Error::Dimension {
            field: "r_ref".into(),
            expected: n,
            found: r_ref.len(),
        });
    }
    let drift = a * r_ref - r_ref;
    let w0 = DVector::from_fn(n, |i, _| drift[i] / b_diag[i]);
    let epsilon = b_diag.iter().fold(f64::INFINITY, |m, b| m.min(b.abs()));
    Plant::new(
        a.clone(),
        b_diag.clone(),
        DVector::from_element(n, 1.0),
        x0 - r_ref,
        w0,
        epsilon,
    )
}
