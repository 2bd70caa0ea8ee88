//! Controller synthesis for disturbance accommodation with limited model
//! information.
//!
//! A plant is a set of scalar subsystems coupled through a directed graph,
//!
//! ```text
//! x(k+1) = A x(k) + B (u(k) + w(k)),    w(k+1) = D w(k),
//! ```
//!
//! with `B` and `D` diagonal. The crate provides:
//!
//! - [`graphs`]: plant/control/design graphs, sinks and supergraph checks;
//! - [`model`]: [`Plant`] and [`Controller`] types, validation and JSON files;
//! - [`riccati`]: the augmented system and its discrete algebraic Riccati
//!   equation (value iteration plus the closed form for `A² = 0`);
//! - [`synthesis`]: deadbeat, sink-aware, optimal centralized and PI designs;
//! - [`evaluation`]: closed-loop simulation, exact cost formulas, competitive
//!   ratios, worst-case plant families and parameter sweeps.

pub mod error;
pub mod evaluation;
pub mod graphs;
pub mod model;
pub mod riccati;
pub mod synthesis;

pub use error::{Error, Result};
pub use evaluation::{
    cost_deadbeat_closed_form, cost_optimal_closed_form, cost_simulated, optimal_cost_lower_bound,
    ratio, ratio_bound, simulate, CostMethod, CostOptions, CostReport, Family, FamilyInstance,
    GridPoint, RatioReport, SweepRow, SweepSpec, Trajectory,
};
pub use graphs::DirectedGraph;
pub use model::{Controller, Plant, ValidationIssue, ValidationReport};
pub use riccati::{AugmentedSystem, DareOptions, DareSolution};
pub use synthesis::{PiGains, SinkGainTable, StrategyKind};

pub use nalgebra::{DMatrix, DVector};
