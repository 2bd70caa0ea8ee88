//! Fixed plants for the benchmarks.

use distacc::{DMatrix, DVector, Plant};

/// A dense `n × n` plant with deterministic, well-spread entries.
pub fn dense_plant(n: usize) -> Plant {
    let a = DMatrix::from_fn(n, n, |i, j| ((3 * i + 7 * j + 1) as f64).sin() * 2.0);
    let b = DVector::from_fn(n, |i, _| 0.5 + (i % 3) as f64 * 0.75);
    let d = DVector::from_fn(n, |i, _| if i % 2 == 0 { 1.0 } else { -0.5 });
    let x0 = DVector::from_fn(n, |i, _| ((i + 1) as f64).cos());
    let w0 = DVector::from_fn(n, |i, _| ((2 * i + 1) as f64).sin());
    Plant::new(a, b, d, x0, w0, 0.5).expect("fixture is valid")
}

/// A strictly lower-triangular chain, so `A` is nilpotent but `A² ≠ 0` for `n ≥ 3`.
pub fn chain_plant(n: usize) -> Plant {
    let a = DMatrix::from_fn(n, n, |i, j| if i == j + 1 { 1.5 } else { 0.0 });
    Plant::new(
        a,
        DVector::from_element(n, 1.0),
        DVector::from_element(n, 1.0),
        DVector::zeros(n),
        DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 }),
        1.0,
    )
    .expect("fixture is valid")
}
