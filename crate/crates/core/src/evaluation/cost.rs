use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::simulate::ClosedLoop;
use super::CompensatedSum;
use crate::error::{Error, Result};
use crate::graphs::DirectedGraph;
use crate::model::{Controller, Plant};
use crate::riccati::{self, DareOptions};
use crate::synthesis::{self, StrategyKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMethod {
    ClosedForm,
    Simulated,
}

/// Which cost route to use. `Auto` takes the closed form when the strategy
/// has one and falls back to simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodChoice {
    #[default]
    Auto,
    ClosedForm,
    Simulated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostOptions {
    pub rel_tol: f64,
    pub cap: f64,
    pub horizon_max: usize,
    /// Consecutive negligible stage costs needed to declare convergence.
    pub window: usize,
    pub dare: DareOptions,
}

impl Default for CostOptions {
    fn default() -> Self {
        CostOptions {
            rel_tol: 1e-15,
            cap: 1e18,
            horizon_max: 1_000_000,
            window: 5,
            dare: DareOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub value: f64,
    pub method: CostMethod,
    pub converged: bool,
    pub horizon_used: usize,
}

impl CostReport {
    fn closed_form(value: f64) -> Self {
        CostReport {
            value,
            method: CostMethod::ClosedForm,
            converged: true,
            horizon_used: 0,
        }
    }
}

/// Infinite-horizon cost by simulation.
///
/// Stops once `window` consecutive stage costs fall to `rel_tol·max(1, J)`,
/// or reports divergence (`value = ∞`) once the partial sum passes `cap`,
/// the horizon passes `horizon_max`, or a value stops being finite.
pub fn cost_simulated(p: &Plant, k: &Controller, opts: &CostOptions) -> Result<CostReport> {
    if !(opts.rel_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("rel_tol must be positive, got {}", opts.rel_tol)));
    }
    let window = opts.window.max(1);
    let mut cl = ClosedLoop::new(p, k)?;
    let mut total = CompensatedSum::default();
    let mut quiet = 0usize;
    loop {
        let step = cl.step();
        total.add(step.stage_cost);
        let j = total.value();
        if !j.is_finite() || j > opts.cap {
            return Ok(diverged(cl.k));
        }
        if step.stage_cost <= opts.rel_tol * j.max(1.0) {
            quiet += 1;
            if quiet >= window {
                return Ok(CostReport {
                    value: j,
                    method: CostMethod::Simulated,
                    converged: true,
                    horizon_used: cl.k,
                });
            }
        } else {
            quiet = 0;
        }
        if cl.k > opts.horizon_max {
            return Ok(diverged(cl.k));
        }
    }
}

fn diverged(horizon_used: usize) -> CostReport {
    CostReport {
        value: f64::INFINITY,
        method: CostMethod::Simulated,
        converged: false,
        horizon_used,
    }
}

fn quad(m: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    v.dot(&(m * v))
}

fn stack(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}

fn blocks(q11: DMatrix<f64>, q12: DMatrix<f64>, q21: DMatrix<f64>, q22: DMatrix<f64>) -> DMatrix<f64> {
    let n = q11.nrows();
    let mut q = DMatrix::zeros(2 * n, 2 * n);
    q.view_mut((0, 0), (n, n)).copy_from(&q11);
    q.view_mut((0, n), (n, n)).copy_from(&q12);
    q.view_mut((n, 0), (n, n)).copy_from(&q21);
    q.view_mut((n, n), (n, n)).copy_from(&q22);
    q
}

/// The deadbeat cost matrix acting on `[x₀; B w₀]`.
pub fn deadbeat_cost_blocks(p: &Plant) -> DMatrix<f64> {
    let n = p.n();
    let i = DMatrix::<f64>::identity(n, n);
    let a = &p.a;
    let at = a.transpose();
    let d = p.d();
    let b_inv2 = DMatrix::from_diagonal(&p.b_diag.map(|b| 1.0 / (b * b)));
    let at_b2 = &at * &b_inv2;
    let at_b2_a = &at_b2 * a;

    let q11 = &i + &d * &d * (&i + &b_inv2) + &at_b2_a + &d * &at_b2_a * &d + &at_b2 * &d + &d * &b_inv2 * a;
    let q12 = -&d - &at_b2 - &d * &b_inv2 - &d * &at_b2_a;
    let q22 = &at_b2_a + &b_inv2 + &i;
    let q21 = q12.transpose();
    blocks(q11, q12, q21, q22)
}

/// Exact deadbeat cost. The closed loop is null after two steps, so this is
/// a finite quadratic form in `(x₀, B w₀)`.
pub fn cost_deadbeat_closed_form(p: &Plant) -> f64 {
    let bw0 = p.b_diag.component_mul(&p.w0);
    quad(&deadbeat_cost_blocks(p), &stack(&p.x0, &bw0))
}

/// The optimal cost matrix acting on `[x₀; w₀]`, built from `X₂₂`.
pub fn optimal_cost_matrix(p: &Plant, x22: &DMatrix<f64>) -> DMatrix<f64> {
    let n = p.n();
    let i = DMatrix::<f64>::identity(n, n);
    let b_inv = p.b_inv();
    let d = p.d();
    let q11 = &b_inv * (x22 + &d * x22 * &d - &i) * &b_inv;
    let q12 = -(&b_inv * &d * x22);
    let q21 = -(x22 * &d * &b_inv);
    blocks(q11, q12, q21, x22.clone())
}

/// Exact cost of the optimal centralized controller.
pub fn cost_optimal_closed_form(p: &Plant, dare: &DareOptions) -> Result<f64> {
    let sol = riccati::solve_for_plant(p, dare)?;
    Ok(quad(&optimal_cost_matrix(p, &sol.x22), &stack(&p.x0, &p.w0)))
}

/// Lower-bound matrix acting on `[x₀; B w₀]`, with `W = Aᵀ(I + B²)⁻¹A + I`.
pub fn lower_bound_blocks(p: &Plant) -> DMatrix<f64> {
    let n = p.n();
    let i = DMatrix::<f64>::identity(n, n);
    let d = p.d();
    let inv_1b2 = DMatrix::from_diagonal(&p.b_diag.map(|b| 1.0 / (1.0 + b * b)));
    let b_inv2 = DMatrix::from_diagonal(&p.b_diag.map(|b| 1.0 / (b * b)));
    let w = p.a.transpose() * inv_1b2 * &p.a + &i;
    let wb = &w + &b_inv2;
    let q11 = &w + &d * &w * &d + &d * &d * &b_inv2;
    let q12 = -(&d * &wb);
    let q21 = -(&wb * &d);
    blocks(q11, q12, q21, wb)
}

/// A lower bound on the optimal cost that needs no Riccati solve. Tight when
/// `A² = 0`.
pub fn optimal_cost_lower_bound(p: &Plant) -> f64 {
    let bw0 = p.b_diag.component_mul(&p.w0);
    quad(&lower_bound_blocks(p), &stack(&p.x0, &bw0))
}

/// Closed-form cost of a strategy, or `None` when it has none.
///
/// The PI controller is the deadbeat controller at `D = I`, so it shares the
/// deadbeat form.
pub fn cost_closed_form(p: &Plant, kind: StrategyKind, dare: &DareOptions) -> Result<Option<f64>> {
    match kind {
        StrategyKind::Deadbeat => Ok(Some(cost_deadbeat_closed_form(p))),
        StrategyKind::ProportionalIntegral => {
            synthesis::pi_gains(p)?;
            Ok(Some(cost_deadbeat_closed_form(p)))
        }
        StrategyKind::OptimalCentralized => cost_optimal_closed_form(p, dare).map(Some),
        StrategyKind::Theta => Ok(None),
    }
}

/// Cost of strategy `kind` on `p` by the requested route.
pub fn strategy_cost(
    p: &Plant,
    plant_graph: &DirectedGraph,
    kind: StrategyKind,
    method: MethodChoice,
    opts: &CostOptions,
) -> Result<CostReport> {
    if method != MethodChoice::Simulated {
        match cost_closed_form(p, kind, &opts.dare)? {
            Some(v) => return Ok(CostReport::closed_form(v)),
            None if method == MethodChoice::ClosedForm => {
                return Err(Error::InvalidArgument(format!("no closed-form cost for strategy `{kind}`")));
            }
            None => {}
        }
    }
    let k = synthesis::synthesize(p, plant_graph, kind, &opts.dare)?;
    cost_simulated(p, &k, opts)
}

/// `(2ε² + 1 + √(4ε² + 1)) / (2ε²)`
pub fn ratio_bound(eps: f64) -> f64 {
    let e2 = eps * eps;
    (2.0 * e2 + 1.0 + (4.0 * e2 + 1.0).sqrt()) / (2.0 * e2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub strategy: StrategyKind,
    pub cost_strategy: f64,
    pub cost_optimal_centralized: f64,
    pub ratio: f64,
    pub bound: f64,
    pub within_bound: bool,
    pub converged: bool,
}

const BOUND_SLACK: f64 = 1e-6;

/// Per-plant competitive ratio of `kind` against the optimal centralized
/// controller. Uses `0/0 = 1`; a zero denominator under a positive numerator
/// gives `∞`.
pub fn ratio(p: &Plant, plant_graph: &DirectedGraph, kind: StrategyKind, opts: &CostOptions) -> Result<RatioReport> {
    let num = strategy_cost(p, plant_graph, kind, MethodChoice::Auto, opts)?;
    let den = cost_optimal_closed_form(p, &opts.dare)?;
    let ratio = if num.value == 0.0 && den == 0.0 {
        1.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num.value / den
    };
    let bound = ratio_bound(p.epsilon);
    Ok(RatioReport {
        strategy: kind,
        cost_strategy: num.value,
        cost_optimal_centralized: den,
        ratio,
        bound,
        within_bound: ratio <= bound + BOUND_SLACK,
        converged: num.converged,
    })
}
