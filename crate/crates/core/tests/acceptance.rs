//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{max_abs_diff, random_plants, rng, DMode, Sample};
use distacc::evaluation::{
    cost_deadbeat_closed_form, cost_optimal_closed_form, cost_simulated, family_sink, optimal_cost_lower_bound,
    ratio, ratio_bound, run_sweep, simulate, sink_family_costs, thm1_costs, CostOptions, Family, GridPoint,
    SweepSpec,
};
use distacc::riccati::{build_augmented, nilpotent_closed_form, solve_dare, DareOptions};
use distacc::synthesis::{
    reference_to_disturbance, synth_deadbeat, synth_optimal_centralized, synth_pi, synth_theta, synthesize,
    StrategyKind,
};
use distacc::{Controller, DMatrix, DVector, Plant};
use rand::Rng;

const SEED: u64 = 0x5eed_acce;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn class_plants() -> Vec<Sample> {
    random_plants(SEED, 500, 0.5)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// The optimal cost on the `thm1` family as usually printed, without the
/// `ε⁴(2ε² + s + 5)/(2ε²r²)` term.
fn thm1_opt_printed(eps: f64, r: f64) -> f64 {
    let e2 = eps * eps;
    let s = (4.0 * e2 + 1.0).sqrt();
    ((e2 + 1.0) * s + 5.0 * e2 + 4.0 * e2 * e2 + 1.0) / (2.0 * e2) + (2.0 * e2 + s + 1.0) * s / (2.0 * e2 * r * r)
}

fn c1_ratio_limit() -> (Outcome, Outcome) {
    let start = Instant::now();
    let spec = SweepSpec {
        family: Family::Thm1,
        eps: 1.0,
        grid: [10.0, 100.0, 1000.0].into_iter().map(GridPoint::r).collect(),
        strategies: vec![StrategyKind::Deadbeat],
    };
    let rows = run_sweep(&spec, &CostOptions::default(), None).expect("sweep runs");
    let elapsed = start.elapsed().as_secs_f64();
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio.unwrap_or(f64::NAN)).collect();
    let limit = (3.0 + 5f64.sqrt()) / 2.0;
    let monotone = ratios.windows(2).all(|w| w[0] < w[1]) && ratios.iter().all(|&r| r < limit);
    let last_gap = (ratios[2] - limit).abs();
    let mut printed_opt = 0f64;
    let mut exact_opt = 0f64;
    let mut deadbeat = 0f64;
    for row in &rows {
        let cost_opt = row.cost_opt.unwrap_or(f64::NAN);
        let (j_opt, j_db) = thm1_costs(1.0, row.r);
        printed_opt = printed_opt.max(rel(cost_opt, thm1_opt_printed(1.0, row.r)));
        exact_opt = exact_opt.max(rel(cost_opt, j_opt));
        deadbeat = deadbeat.max(rel(row.cost.unwrap_or(f64::NAN), j_db));
    }
    let j10 = rows[0].cost_opt.unwrap_or(f64::NAN);
    let j10_db = rows[0].cost.unwrap_or(f64::NAN);
    let limit_ok = monotone && last_gap <= 1e-3 && elapsed < 1.0;
    (
        outcome(
            limit_ok && deadbeat <= 1e-9 && printed_opt <= 1e-9 && (j10 - 7.2946).abs() < 5e-5 && (j10_db - 19.0490).abs() < 5e-5,
            format!(
                "ratios {ratios:.10?}, |r1000 - limit| = {last_gap:.2e}, {elapsed:.3}s; \
                 r=10: J* = {j10:.4}, J_deadbeat = {j10_db:.4}; rel err vs printed J* {printed_opt:.1e}, \
                 vs J_deadbeat {deadbeat:.1e}"
            ),
        ),
        outcome(
            limit_ok && deadbeat <= 1e-9 && exact_opt <= 1e-9,
            format!("J* vs formula with the 1/r^2 term restored: rel err {exact_opt:.1e}"),
        ),
    )
}

fn c2_ratio_bound(plants: &[Sample]) -> Outcome {
    let start = Instant::now();
    let bound = ratio_bound(0.5);
    let opts = CostOptions::default();
    let mut worst = 0f64;
    let mut errors = 0;
    for s in plants {
        match ratio(&s.plant, &s.graph, StrategyKind::Deadbeat, &opts) {
            Ok(r) => worst = worst.max(r.ratio),
            Err(_) => errors += 1,
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        worst <= bound + 1e-6 && errors == 0 && elapsed < 30.0,
        format!("max ratio {worst:.6} vs bound {bound:.6}, {errors} errors, {elapsed:.2}s"),
    )
}

fn c3_deadbeat_nulling(plants: &[Sample]) -> Outcome {
    let mut worst = 0f64;
    for s in plants {
        let p = &s.plant;
        let t = simulate(p, &synth_deadbeat(p), 3).expect("dimensions agree");
        let scale = 1.0 + p.x0.norm() + p.w0.norm();
        let m = t.x[2].norm().max(t.x[3].norm()).max(t.xi[2].norm());
        worst = worst.max(m / scale);
    }
    outcome(worst <= 1e-9, format!("max scaled residual {worst:.2e}"))
}

fn c4_closed_vs_simulated(plants: &[Sample]) -> Outcome {
    let opts = CostOptions::default();
    let mut worst_db = 0f64;
    let mut worst_opt = 0f64;
    let mut convergent = 0;
    for s in plants {
        let p = &s.plant;
        let j = cost_deadbeat_closed_form(p);
        let sim = cost_simulated(p, &synth_deadbeat(p), &opts).expect("simulates");
        worst_db = worst_db.max((j - sim.value).abs() / (1.0 + j));

        let j = cost_optimal_closed_form(p, &opts.dare).expect("DARE solves");
        let k = synth_optimal_centralized(p, &opts.dare).expect("DARE solves");
        let sim = cost_simulated(p, &k, &opts).expect("simulates");
        if sim.converged {
            convergent += 1;
            worst_opt = worst_opt.max((j - sim.value).abs() / (1.0 + j));
        }
    }
    outcome(
        worst_db <= 1e-9 && worst_opt <= 1e-6,
        format!(
            "deadbeat max {worst_db:.2e}; optimal max {worst_opt:.2e} over {convergent}/{} convergent",
            plants.len()
        ),
    )
}

fn c5_dare(plants: &[Sample]) -> Outcome {
    let opts = DareOptions::default();
    let mut worst_residual = 0f64;
    let mut failures = 0;
    for s in plants {
        match solve_dare(&build_augmented(&s.plant), &opts) {
            Ok(sol) => worst_residual = worst_residual.max(sol.residual),
            Err(_) => failures += 1,
        }
    }
    let mut r = rng(SEED ^ 5);
    let mut worst_closed = 0f64;
    for _ in 0..100 {
        let s = common::random_nilpotent_plant(&mut r, 0.5);
        let iter = solve_dare(&build_augmented(&s.plant), &opts).expect("DARE solves");
        let closed = nilpotent_closed_form(&s.plant).expect("A^2 = 0");
        worst_residual = worst_residual.max(iter.residual).max(closed.residual);
        worst_closed = worst_closed.max(max_abs_diff(&iter.x, &closed.x));
    }
    let p = running_instance();
    let sol = solve_dare(&build_augmented(&p), &opts).expect("DARE solves");
    let x22_ok = max_abs_diff(&sol.x22, &DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 2.0])) <= 1e-9;
    let g2_ok = max_abs_diff(&sol.g2, &DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, -1.0, -1.0])) <= 1e-9;
    let cost = cost_optimal_closed_form(&p, &opts).expect("DARE solves");
    let running_ok = x22_ok && g2_ok && (cost - 4.0).abs() <= 1e-9;
    outcome(
        worst_residual <= 1e-9 && failures == 0 && worst_closed <= 1e-8 && running_ok,
        format!(
            "max residual {worst_residual:.2e}, {failures} failures, nilpotent max |ΔX| {worst_closed:.2e}, running instance {}",
            if running_ok { "ok" } else { "MISMATCH" }
        ),
    )
}

fn running_instance() -> Plant {
    Plant::new(
        DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 2.0, 0.0]),
        DVector::from_element(2, 1.0),
        DVector::from_element(2, 1.0),
        DVector::zeros(2),
        DVector::from_vec(vec![1.0, 0.0]),
        1.0,
    )
    .unwrap()
}

fn c6_lower_bound(plants: &[Sample]) -> Outcome {
    let opts = DareOptions::default();
    let mut worst_excess = f64::NEG_INFINITY;
    for s in plants {
        let lb = optimal_cost_lower_bound(&s.plant);
        let j = cost_optimal_closed_form(&s.plant, &opts).expect("DARE solves");
        worst_excess = worst_excess.max(lb - j);
    }
    let mut r = rng(SEED ^ 6);
    let mut worst_gap = 0f64;
    for _ in 0..100 {
        let s = common::random_nilpotent_plant(&mut r, 0.5);
        let lb = optimal_cost_lower_bound(&s.plant);
        let j = cost_optimal_closed_form(&s.plant, &opts).expect("DARE solves");
        worst_gap = worst_gap.max((lb - j).abs());
    }
    let p = running_instance();
    let running = (optimal_cost_lower_bound(&p), cost_optimal_closed_form(&p, &opts).unwrap());
    let running_ok = (running.0 - 4.0).abs() <= 1e-8 && (running.1 - 4.0).abs() <= 1e-8;
    outcome(
        worst_excess <= 1e-8 && worst_gap <= 1e-8 && running_ok,
        format!(
            "max (bound - J*) {worst_excess:.2e}, nilpotent max |bound - J*| {worst_gap:.2e}, running ({}, {})",
            running.0, running.1
        ),
    )
}

fn theta_vs_deadbeat(s: &Sample, opts: &CostOptions) -> (f64, f64) {
    let k = synth_theta(&s.plant, &s.graph).expect("graph matches plant");
    let theta = cost_simulated(&s.plant, &k, opts).expect("simulates").value;
    (theta, cost_deadbeat_closed_form(&s.plant))
}

fn c7_theta_domination() -> (Outcome, Outcome) {
    let opts = CostOptions::default();
    let inst = family_sink(1.0, 1.0).unwrap();
    let k = synth_theta(&inst.plant, &inst.graph).unwrap();
    let theta = cost_simulated(&inst.plant, &k, &opts).unwrap().value;
    let deadbeat = cost_deadbeat_closed_form(&inst.plant);
    let (theta_formula, _) = sink_family_costs(1.0, 1.0);
    let printed = (5f64.sqrt() + 3.0) / 2.0;
    let family_ok = (theta - theta_formula).abs() <= 1e-9 && (theta - printed).abs() <= 1e-9 && deadbeat == 3.0;

    let mut r = rng(SEED ^ 7);
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut violations_x0_zero = 0;
    let mut worst_x0_zero = f64::NEG_INFINITY;
    for _ in 0..200 {
        let n = r.random_range(2..=5);
        let graph = common::random_sink_graph(&mut r, n);
        let plant = common::plant_on(&mut r, &graph, 0.5, DMode::Bounded);
        let s = Sample { plant, graph };
        let (theta, deadbeat) = theta_vs_deadbeat(&s, &opts);
        worst = worst.max(theta - deadbeat);
        if theta > deadbeat + 1e-9 {
            violations += 1;
        }
        let zero = Sample {
            plant: s.plant.with_initial(DVector::zeros(n), s.plant.w0.clone()).unwrap(),
            graph: s.graph,
        };
        let (theta, deadbeat) = theta_vs_deadbeat(&zero, &opts);
        worst_x0_zero = worst_x0_zero.max(theta - deadbeat);
        if theta > deadbeat + 1e-9 {
            violations_x0_zero += 1;
        }
    }
    (
        outcome(
            family_ok && violations == 0,
            format!(
                "sink(1,1): J_theta = {theta:.12} (formula {theta_formula:.12}), J_deadbeat = {deadbeat}; \
                 random (x0, w0): {violations}/200 with J_theta > J_deadbeat + 1e-9, max excess {worst:.3e}"
            ),
        ),
        outcome(
            violations_x0_zero == 0,
            format!("same plants with x0 = 0: {violations_x0_zero}/200 violations, max excess {worst_x0_zero:.3e}"),
        ),
    )
}

fn controller_gap(a: &Controller, b: &Controller) -> f64 {
    max_abs_diff(&a.a_k, &b.a_k)
        .max(max_abs_diff(&a.b_k, &b.b_k))
        .max(max_abs_diff(&a.c_k, &b.c_k))
        .max(max_abs_diff(&a.d_k, &b.d_k))
}

fn c8_theta_optimal_case() -> Outcome {
    let opts = CostOptions::default();
    let mut r = rng(SEED ^ 8);
    let mut worst_gap = 0f64;
    let mut worst_ratio = 0f64;
    for _ in 0..100 {
        let s = common::random_nilpotent_plant(&mut r, 0.5);
        assert_eq!(s.graph.sink_blocks_zero(), (true, true));
        let theta = synth_theta(&s.plant, &s.graph).unwrap();
        let opt = synth_optimal_centralized(&s.plant, &opts.dare).unwrap();
        worst_gap = worst_gap.max(controller_gap(&theta, &opt));
        let rep = ratio(&s.plant, &s.graph, StrategyKind::Theta, &opts).unwrap();
        worst_ratio = worst_ratio.max((rep.ratio - 1.0).abs());
    }
    outcome(
        worst_gap <= 1e-9 && worst_ratio <= 1e-9,
        format!("max matrix gap {worst_gap:.2e}, max |ratio - 1| {worst_ratio:.2e}"),
    )
}

/// `u(k) = −B⁻¹A x(k) − B⁻¹ Σ_{i≤k} x(i)`, run directly on the plant.
fn explicit_pi(p: &Plant, horizon: usize) -> Vec<DVector<f64>> {
    let n = p.n();
    let mut x = p.x0.clone();
    let mut w = p.w0.clone();
    let mut sum = DVector::zeros(n);
    let mut xs = Vec::with_capacity(horizon + 1);
    for _ in 0..=horizon {
        xs.push(x.clone());
        sum += &x;
        let ax = &p.a * &x;
        let u = DVector::from_fn(n, |i, _| -(ax[i] + sum[i]) / p.b_diag[i]);
        x = ax + p.b_diag.component_mul(&(u + &w));
        w.component_mul_assign(&p.d_diag);
    }
    xs
}

fn c9_pi() -> Outcome {
    let mut r = rng(SEED ^ 9);
    let mut worst_pi = 0f64;
    for _ in 0..100 {
        let n = r.random_range(2..=5);
        let graph = common::random_graph(&mut r, n);
        let p = common::plant_on(&mut r, &graph, 0.5, DMode::Identity);
        let t = simulate(&p, &synth_pi(&p).unwrap(), 50).unwrap();
        let scale = 1.0 + p.x0.norm() + p.w0.norm();
        for (a, b) in t.x.iter().zip(explicit_pi(&p, 50)) {
            worst_pi = worst_pi.max((a - b).norm() / scale);
        }
    }

    // Step reference: run the original plant x(k+1) = A x + B u with the PI
    // controller fed the tracking error, and check x(k) = r_ref for k ≥ 2.
    let mut worst_track = 0f64;
    for _ in 0..100 {
        let n = r.random_range(2..=5);
        let graph = common::random_graph(&mut r, n);
        let base = common::plant_on(&mut r, &graph, 0.5, DMode::Identity);
        let r_ref = DVector::from_fn(n, |_, _| r.random_range(-3.0..=3.0));
        let p = reference_to_disturbance(&base.a, &base.b_diag, &r_ref, &base.x0).unwrap();
        let k = synth_pi(&p).unwrap();
        let transformed = simulate(&p, &k, 4).unwrap();
        let scale = 1.0 + base.x0.norm() + r_ref.norm();
        for xbar in &transformed.x[2..] {
            worst_track = worst_track.max(xbar.norm() / scale);
        }
        let mut x = base.x0.clone();
        let mut xk = DVector::zeros(n);
        for step in 0..=4 {
            if step >= 2 {
                worst_track = worst_track.max((&x - &r_ref).norm() / scale);
            }
            let e = &x - &r_ref;
            let u = &k.c_k * &xk + &k.d_k * &e;
            xk = &k.a_k * &xk + &k.b_k * &e;
            x = &base.a * &x + base.b_diag.component_mul(&u);
        }
    }
    outcome(
        worst_pi <= 1e-9 && worst_track <= 1e-9,
        format!("PI vs summation law max {worst_pi:.2e}; tracking error after k = 2 max {worst_track:.2e}"),
    )
}

fn rows_except(m: &DMatrix<f64>, j: usize) -> Vec<u64> {
    (0..m.nrows())
        .filter(|&i| i != j)
        .flat_map(|i| m.row(i).iter().map(|v| v.to_bits()).collect::<Vec<_>>())
        .collect()
}

fn c10_locality() -> Outcome {
    let mut r = rng(SEED ^ 10);
    let dare = DareOptions::default();
    let mut broken = 0;
    for _ in 0..100 {
        let n = r.random_range(2..=5);
        let graph = common::random_graph(&mut r, n);
        let p = common::plant_on(&mut r, &graph, 0.5, DMode::Bounded);
        let j = r.random_range(0..n);
        let mut a = p.a.clone();
        for col in 0..n {
            if graph.has_edge(col, j) {
                a[(j, col)] = r.random_range(-5.0..=5.0);
            }
        }
        let q = Plant::new(a, p.b_diag.clone(), p.d_diag.clone(), p.x0.clone(), p.w0.clone(), p.epsilon).unwrap();
        for kind in [StrategyKind::Deadbeat, StrategyKind::Theta] {
            let k1 = synthesize(&p, &graph, kind, &dare).unwrap();
            let k2 = synthesize(&q, &graph, kind, &dare).unwrap();
            // Subcontroller i owns state i, so its rows are the same index in every matrix.
            let same = [(&k1.a_k, &k2.a_k), (&k1.b_k, &k2.b_k), (&k1.c_k, &k2.c_k), (&k1.d_k, &k2.d_k)]
                .iter()
                .all(|(m1, m2)| rows_except(m1, j) == rows_except(m2, j));
            if !same {
                broken += 1;
            }
        }
    }
    outcome(broken == 0, format!("{broken}/200 strategy outputs changed outside the perturbed row"))
}

fn main() -> ExitCode {
    let plants = class_plants();
    let (c1, c1_exact) = c1_ratio_limit();
    let (c7, c7_zero) = c7_theta_domination();
    let results = [
        ("1 competitive-ratio limit", c1),
        ("2 ratio bound soundness", c2_ratio_bound(&plants)),
        ("3 deadbeat two-step nulling", c3_deadbeat_nulling(&plants)),
        ("4 closed-form/simulation agreement", c4_closed_vs_simulated(&plants)),
        ("5 DARE correctness", c5_dare(&plants)),
        ("6 lower bound", c6_lower_bound(&plants)),
        ("7 theta domination", c7),
        ("8 theta optimality case", c8_theta_optimal_case()),
        ("9 PI equivalence and tracking", c9_pi()),
        ("10 locality", c10_locality()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("criterion {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    let info = |o: &Outcome| if o.pass { "PASS" } else { "FAIL" };
    println!("info 1 exact J*: {} ({})", info(&c1_exact), c1_exact.detail);
    println!(
        "info 7 with x0 = 0: {} ({})",
        info(&c7_zero),
        c7_zero.detail
    );
    println!("acceptance: {}/{} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
