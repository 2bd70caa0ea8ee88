use std::fmt::Write as _;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::model::{Controller, Plant};

/// Closed loop of a plant and a controller, advanced one step at a time.
///
/// ```text
/// u(k)      = C_K x_K(k) + D_K x(k)
/// ξ(k)      = u(k) + w(k)
/// x(k+1)    = A x(k) + B ξ(k)
/// x_K(k+1)  = A_K x_K(k) + B_K x(k)
/// w(k+1)    = D w(k)
/// ```
pub struct ClosedLoop<'a> {
    plant: &'a Plant,
    controller: &'a Controller,
    pub k: usize,
    pub x: DVector<f64>,
    pub x_k: DVector<f64>,
    pub w: DVector<f64>,
}

/// Signals at time `k`, computed before advancing.
#[derive(Debug, Clone)]
pub struct StepSample {
    pub u: DVector<f64>,
    pub xi: DVector<f64>,
    pub stage_cost: f64,
}

impl<'a> ClosedLoop<'a> {
    pub fn new(plant: &'a Plant, controller: &'a Controller) -> Result<Self> {
        if controller.n() != plant.n() {
            return Err(Error::Dimension {
                field: "controller".into(),
                expected: plant.n(),
                found: controller.n(),
            });
        }
        Ok(ClosedLoop {
            plant,
            controller,
            k: 0,
            x: plant.x0.clone(),
            x_k: DVector::zeros(controller.n_state()),
            w: plant.w0.clone(),
        })
    }

    /// Outputs at the current time without advancing.
    pub fn sample(&self) -> StepSample {
        let u = &self.controller.c_k * &self.x_k + &self.controller.d_k * &self.x;
        let xi = &u + &self.w;
        let stage_cost = self.x.norm_squared() + xi.norm_squared();
        StepSample { u, xi, stage_cost }
    }

    /// Advance to `k + 1` using `xi = ξ(k)`.
    pub fn advance(&mut self, xi: &DVector<f64>) {
        let p = self.plant;
        let x_next = &p.a * &self.x + p.b_diag.component_mul(xi);
        let xk_next = &self.controller.a_k * &self.x_k + &self.controller.b_k * &self.x;
        self.w.component_mul_assign(&p.d_diag);
        self.x = x_next;
        self.x_k = xk_next;
        self.k += 1;
    }

    pub fn step(&mut self) -> StepSample {
        let s = self.sample();
        self.advance(&s.xi);
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub x: Vec<DVector<f64>>,
    pub x_k: Vec<DVector<f64>>,
    pub u: Vec<DVector<f64>>,
    pub w: Vec<DVector<f64>>,
    pub xi: Vec<DVector<f64>>,
    pub stage_costs: Vec<f64>,
}

impl Trajectory {
    /// Last time index (the trajectory holds `horizon + 1` samples).
    pub fn horizon(&self) -> usize {
        self.x.len() - 1
    }

    pub fn total_cost(&self) -> f64 {
        self.stage_costs.iter().copied().collect::<super::CompensatedSum>().value()
    }

    /// One row per time step: `k`, `x_*`, `xk_*`, `u_*`, `w_*`, `xi_*`,
    /// `stage_cost`, floats with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let n = self.x.first().map_or(0, DVector::len);
        let m = self.x_k.first().map_or(0, DVector::len);
        let mut out = String::from("k");
        for (prefix, count) in [("x", n), ("xk", m), ("u", n), ("w", n), ("xi", n)] {
            for i in 1..=count {
                write!(out, ",{prefix}_{i}").unwrap();
            }
        }
        out.push_str(",stage_cost\n");
        for k in 0..self.x.len() {
            write!(out, "{k}").unwrap();
            for v in [&self.x[k], &self.x_k[k], &self.u[k], &self.w[k], &self.xi[k]] {
                for value in v.iter() {
                    write!(out, ",{}", fmt_float(*value)).unwrap();
                }
            }
            writeln!(out, ",{}", fmt_float(self.stage_costs[k])).unwrap();
        }
        out
    }
}

pub(crate) fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Simulate `k = 0..=horizon` from `x_K(0) = 0`.
pub fn simulate(p: &Plant, controller: &Controller, horizon: usize) -> Result<Trajectory> {
    let mut cl = ClosedLoop::new(p, controller)?;
    let cap = horizon + 1;
    let mut traj = Trajectory {
        x: Vec::with_capacity(cap),
        x_k: Vec::with_capacity(cap),
        u: Vec::with_capacity(cap),
        w: Vec::with_capacity(cap),
        xi: Vec::with_capacity(cap),
        stage_costs: Vec::with_capacity(cap),
    };
    for k in 0..=horizon {
        let s = cl.sample();
        traj.x.push(cl.x.clone());
        traj.x_k.push(cl.x_k.clone());
        traj.w.push(cl.w.clone());
        traj.stage_costs.push(s.stage_cost);
        if k < horizon {
            cl.advance(&s.xi);
        }
        traj.u.push(s.u);
        traj.xi.push(s.xi);
    }
    Ok(traj)
}
