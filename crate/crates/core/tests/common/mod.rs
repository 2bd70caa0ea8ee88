#![allow(dead_code)]

use distacc::{DMatrix, DVector, DirectedGraph, Plant};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DMode {
    /// `d_ii` uniform in `[−1, 1]`.
    Bounded,
    Identity,
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub plant: Plant,
    pub graph: DirectedGraph,
}

/// Random graph on `n` nodes with no isolated node.
pub fn random_graph(rng: &mut impl Rng, n: usize) -> DirectedGraph {
    loop {
        let mut g = DirectedGraph::empty(n);
        for to in 0..n {
            for from in 0..n {
                let p = if to == from { 0.6 } else { 0.4 };
                if rng.random_bool(p) {
                    g.add_edge(from, to);
                }
            }
        }
        if g.isolated_nodes().is_empty() {
            return g;
        }
    }
}

/// Random graph with at least one sink (and, as always, no isolated node).
pub fn random_sink_graph(rng: &mut impl Rng, n: usize) -> DirectedGraph {
    loop {
        let g = random_graph(rng, n);
        if !g.sinks().is_empty() {
            return g;
        }
    }
}

/// Random graph whose edges all run from a non-sink to a sink, so both
/// diagonal blocks of the sink-ordered adjacency vanish.
pub fn random_bipartite_sink_graph(rng: &mut impl Rng, n: usize) -> DirectedGraph {
    loop {
        let mut nodes: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            nodes.swap(i, rng.random_range(0..=i));
        }
        let k = rng.random_range(1..n);
        let (sources, sinks) = nodes.split_at(k);
        let mut g = DirectedGraph::empty(n);
        for &from in sources {
            for &to in sinks {
                if rng.random_bool(0.5) {
                    g.add_edge(from, to);
                }
            }
            let to = sinks[rng.random_range(0..sinks.len())];
            g.add_edge(from, to);
        }
        if g.isolated_nodes().is_empty() {
            return g;
        }
    }
}

fn normal_vec(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Plant on `graph`: `A` entries in `[−5, 5]` on its edges, `b_ii ∈ [ε, 3]`,
/// `d` per `mode`, standard normal `x₀` and `w₀`.
pub fn plant_on(rng: &mut impl Rng, graph: &DirectedGraph, eps: f64, mode: DMode) -> Plant {
    let n = graph.node_count();
    let a = DMatrix::from_fn(n, n, |i, j| if graph.has_edge(j, i) { rng.random_range(-5.0..=5.0) } else { 0.0 });
    let b = DVector::from_fn(n, |_, _| rng.random_range(eps..=3.0));
    let d = match mode {
        DMode::Bounded => DVector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0)),
        DMode::Identity => DVector::from_element(n, 1.0),
    };
    let x0 = normal_vec(rng, n);
    let w0 = normal_vec(rng, n);
    Plant::new(a, b, d, x0, w0, eps).expect("generated plant is valid")
}

/// The standard random class: `n ∈ {2..5}`, random graph, bounded `D`.
pub fn random_plant(rng: &mut impl Rng, eps: f64) -> Sample {
    let n = rng.random_range(2..=5);
    let graph = random_graph(rng, n);
    let plant = plant_on(rng, &graph, eps, DMode::Bounded);
    Sample { plant, graph }
}

pub fn random_plants(seed: u64, count: usize, eps: f64) -> Vec<Sample> {
    let mut r = rng(seed);
    (0..count).map(|_| random_plant(&mut r, eps)).collect()
}

/// Random plant with `A² = 0`: edges only from a "source" set into a
/// disjoint "target" set.
pub fn random_nilpotent_plant(rng: &mut impl Rng, eps: f64) -> Sample {
    let n = rng.random_range(2..=5);
    let graph = random_bipartite_sink_graph(rng, n);
    let plant = plant_on(rng, &graph, eps, DMode::Bounded);
    Sample { plant, graph }
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
