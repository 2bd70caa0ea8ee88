use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cost::{ratio, CostOptions};
use super::families::{family, Family};
use super::simulate::fmt_float;
use crate::error::{Error, Result};
use crate::synthesis::StrategyKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub r: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub s: Option<f64>,
}

impl GridPoint {
    pub fn r(r: f64) -> Self {
        GridPoint { r, s: None }
    }

    pub fn rs(r: f64, s: f64) -> Self {
        GridPoint { r, s: Some(s) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub family: Family,
    pub eps: f64,
    pub grid: Vec<GridPoint>,
    pub strategies: Vec<StrategyKind>,
}

/// One `(grid point, strategy)` evaluation. A failed row keeps its error
/// text and leaves the numeric fields empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub family: Family,
    pub eps: f64,
    pub r: f64,
    pub s: Option<f64>,
    pub strategy: StrategyKind,
    pub cost: Option<f64>,
    pub cost_opt: Option<f64>,
    pub ratio: Option<f64>,
    pub bound: Option<f64>,
    pub within_bound: Option<bool>,
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

pub const SWEEP_CSV_HEADER: &str = "family,eps,r,s,strategy,cost,cost_opt,ratio,bound,within_bound,converged";

fn evaluate(spec: &SweepSpec, point: GridPoint, strategy: StrategyKind, opts: &CostOptions) -> SweepRow {
    let mut row = SweepRow {
        family: spec.family,
        eps: spec.eps,
        r: point.r,
        s: point.s,
        strategy,
        cost: None,
        cost_opt: None,
        ratio: None,
        bound: None,
        within_bound: None,
        converged: None,
        error: None,
    };
    let outcome = family(spec.family, spec.eps, point).and_then(|f| ratio(&f.plant, &f.graph, strategy, opts));
    match outcome {
        Ok(rep) => {
            row.cost = Some(rep.cost_strategy);
            row.cost_opt = Some(rep.cost_optimal_centralized);
            row.ratio = Some(rep.ratio);
            row.bound = Some(rep.bound);
            row.within_bound = Some(rep.within_bound);
            row.converged = Some(rep.converged);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Evaluate every grid point against every strategy, grid-major. Rows are
/// computed in parallel on at most `jobs` threads (all cores when `None`)
/// and returned in input order.
pub fn run_sweep(spec: &SweepSpec, opts: &CostOptions, jobs: Option<usize>) -> Result<Vec<SweepRow>> {
    if spec.grid.is_empty() {
        return Err(Error::InvalidArgument("sweep grid is empty".into()));
    }
    let tasks: Vec<(GridPoint, StrategyKind)> = spec
        .grid
        .iter()
        .flat_map(|&p| spec.strategies.iter().map(move |&s| (p, s)))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| tasks.par_iter().map(|&(p, s)| evaluate(spec, p, s, opts)).collect()))
}

fn opt_float(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

fn opt_bool(v: Option<bool>) -> String {
    v.map(|b| b.to_string()).unwrap_or_default()
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_CSV_HEADER}\n");
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            row.family,
            fmt_float(row.eps),
            fmt_float(row.r),
            opt_float(row.s),
            row.strategy,
            opt_float(row.cost),
            opt_float(row.cost_opt),
            opt_float(row.ratio),
            opt_float(row.bound),
            opt_bool(row.within_bound),
            opt_bool(row.converged),
        )
        .unwrap();
    }
    out
}

/// Pretty JSON array of rows. Non-finite values become `null`.
pub fn sweep_to_json(rows: &[SweepRow]) -> String {
    serde_json::to_string_pretty(rows).expect("plain data serializes")
}
