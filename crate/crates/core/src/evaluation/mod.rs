//! Closed-loop simulation, cost evaluation and competitive ratios.
//!
//! Costs are available two ways: exact quadratic forms in `(x₀, w₀)` and
//! simulation of the closed loop with compensated summation. The two routes
//! share no code beyond the plant and controller data, so each checks the
//! other.

mod cost;
mod families;
mod simulate;
mod sweep;

pub use cost::{
    cost_closed_form, cost_deadbeat_closed_form, cost_optimal_closed_form, cost_simulated,
    deadbeat_cost_blocks, lower_bound_blocks, optimal_cost_lower_bound, optimal_cost_matrix, ratio,
    ratio_bound, strategy_cost, CostMethod, CostOptions, CostReport, MethodChoice, RatioReport,
};
pub use families::{
    family, family_path, family_sink, family_thm1, sink_family_costs, thm1_costs, thm1_initial_state,
    Family, FamilyInstance,
};
pub use simulate::{simulate, ClosedLoop, StepSample, Trajectory};
pub use sweep::{run_sweep, sweep_to_csv, sweep_to_json, GridPoint, SweepRow, SweepSpec, SWEEP_CSV_HEADER};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for v in iter {
            s.add(v);
        }
        s
    }
}
