//! Plant and controller data model.

mod io;

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graphs::DirectedGraph;

pub use io::{
    load_controller, load_plant, plant_from_json, plant_to_json, controller_from_json,
    controller_to_json, save_controller, save_plant, ControllerFile, PlantFile,
};
pub(crate) use io::matrix_to_rows as matrix_rows;

/// `x(k+1) = A x(k) + B (u(k) + w(k))`, `w(k+1) = D w(k)` with diagonal `B`, `D`.
///
/// `B` and `D` are stored as their diagonals. `epsilon` is the class bound on
/// `σ_min(B)`; whether this plant's `B` meets it is a validation question, see
/// [`validate_plant`].
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    pub a: DMatrix<f64>,
    pub b_diag: DVector<f64>,
    pub d_diag: DVector<f64>,
    pub x0: DVector<f64>,
    pub w0: DVector<f64>,
    pub epsilon: f64,
}

fn check_finite<'a>(field: &str, values: impl IntoIterator<Item = &'a f64>) -> Result<()> {
    if values.into_iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { field: field.into() })
    }
}

fn check_len(field: &str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension {
            field: field.into(),
            expected,
            found,
        })
    }
}

impl Plant {
    /// Checks shapes, finiteness, `epsilon > 0` and that `B` is invertible.
    pub fn new(
        a: DMatrix<f64>,
        b_diag: DVector<f64>,
        d_diag: DVector<f64>,
        x0: DVector<f64>,
        w0: DVector<f64>,
        epsilon: f64,
    ) -> Result<Self> {
        let n = a.nrows();
        check_len("A", n, a.ncols())?;
        check_len("b_diag", n, b_diag.len())?;
        check_len("d_diag", n, d_diag.len())?;
        check_len("x0", n, x0.len())?;
        check_len("w0", n, w0.len())?;
        check_finite("A", a.iter())?;
        check_finite("b_diag", b_diag.iter())?;
        check_finite("d_diag", d_diag.iter())?;
        check_finite("x0", x0.iter())?;
        check_finite("w0", w0.iter())?;
        if !epsilon.is_finite() {
            return Err(Error::NonFinite { field: "epsilon".into() });
        }
        if epsilon <= 0.0 {
            return Err(Error::Schema {
                field: "epsilon".into(),
                reason: format!("must be positive, got {epsilon}"),
            });
        }
        if let Some(i) = b_diag.iter().position(|&b| b == 0.0) {
            return Err(Error::Schema {
                field: format!("b_diag[{i}]"),
                reason: "B must be invertible".into(),
            });
        }
        Ok(Plant {
            a,
            b_diag,
            d_diag,
            x0,
            w0,
            epsilon,
        })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn b(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.b_diag)
    }

    pub fn d(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.d_diag)
    }

    pub fn b_inv(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.b_diag.map(|b| 1.0 / b))
    }

    /// Same model with a different initial condition.
    pub fn with_initial(&self, x0: DVector<f64>, w0: DVector<f64>) -> Result<Self> {
        Plant::new(self.a.clone(), self.b_diag.clone(), self.d_diag.clone(), x0, w0, self.epsilon)
    }

    /// `‖A²‖_F ≤ 1e-12 · max(1, ‖A‖_F²)`.
    pub fn is_nilpotent_deg2(&self) -> bool {
        nilpotency_defect(&self.a) <= 0.0
    }
}

/// `‖A²‖_F` minus the nilpotency tolerance; nonpositive means `A² = 0`.
pub(crate) fn nilpotency_defect(a: &DMatrix<f64>) -> f64 {
    let sq = (a * a).norm();
    let scale = a.norm();
    sq - 1e-12 * (scale * scale).max(1.0)
}

/// Dynamic state-feedback law
/// `x_K(k+1) = A_K x_K(k) + B_K x(k)`, `u(k) = C_K x_K(k) + D_K x(k)`,
/// started from `x_K(0) = 0`. Realizations are kept as synthesized, minimal
/// or not.
#[derive(Debug, Clone, PartialEq)]
pub struct Controller {
    pub a_k: DMatrix<f64>,
    pub b_k: DMatrix<f64>,
    pub c_k: DMatrix<f64>,
    pub d_k: DMatrix<f64>,
}

impl Controller {
    pub fn new(
        a_k: DMatrix<f64>,
        b_k: DMatrix<f64>,
        c_k: DMatrix<f64>,
        d_k: DMatrix<f64>,
    ) -> Result<Self> {
        let m = a_k.nrows();
        let n = d_k.nrows();
        check_len("A_K", m, a_k.ncols())?;
        check_len("D_K", n, d_k.ncols())?;
        check_len("B_K", m, b_k.nrows())?;
        check_len("B_K", n, b_k.ncols())?;
        check_len("C_K", n, c_k.nrows())?;
        check_len("C_K", m, c_k.ncols())?;
        check_finite("A_K", a_k.iter())?;
        check_finite("B_K", b_k.iter())?;
        check_finite("C_K", c_k.iter())?;
        check_finite("D_K", d_k.iter())?;
        Ok(Controller { a_k, b_k, c_k, d_k })
    }

    /// Static gain `u = D_K x`.
    pub fn static_gain(d_k: DMatrix<f64>) -> Self {
        let n = d_k.nrows();
        Controller {
            a_k: DMatrix::zeros(0, 0),
            b_k: DMatrix::zeros(0, n),
            c_k: DMatrix::zeros(n, 0),
            d_k,
        }
    }

    pub fn n_state(&self) -> usize {
        self.a_k.nrows()
    }

    /// Number of plant states measured (and inputs produced).
    pub fn n(&self) -> usize {
        self.d_k.nrows()
    }

    /// Structural pattern of `K(z) = C_K (zI - A_K)^{-1} B_K + D_K`: entry
    /// `(i, j)` is present iff `(D_K)_ij ≠ 0` or some controller state read by
    /// row `i` of `C_K` is reachable through `A_K` from a state driven by
    /// column `j` of `B_K`. Entries with `|v| <= tol` count as zero.
    pub fn sparsity(&self, tol: f64) -> DirectedGraph {
        let m = self.n_state();
        let n = self.n();
        // reach[(p, q)]: state p depends on state q through some power A_K^t, t >= 0.
        let mut reach = DMatrix::from_fn(m, m, |p, q| p == q || self.a_k[(p, q)].abs() > tol);
        // Warshall closure.
        for k in 0..m {
            for p in 0..m {
                if reach[(p, k)] {
                    for q in 0..m {
                        if reach[(k, q)] {
                            reach[(p, q)] = true;
                        }
                    }
                }
            }
        }
        let adjacency = DMatrix::from_fn(n, n, |i, j| {
            if self.d_k[(i, j)].abs() > tol {
                return true;
            }
            (0..m).any(|p| {
                self.c_k[(i, p)].abs() > tol
                    && (0..m).any(|q| reach[(p, q)] && self.b_k[(q, j)].abs() > tol)
            })
        });
        DirectedGraph::from_adjacency(adjacency).expect("square by construction")
    }

    /// `A_K` and `C_K` diagonal (scalar subcontrollers share no state).
    pub fn is_decentralized_realization(&self) -> bool {
        fn diagonal(m: &DMatrix<f64>) -> bool {
            m.is_square()
                && (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == 0.0))
        }
        diagonal(&self.a_k) && diagonal(&self.c_k)
    }
}

pub fn controller_sparsity(k: &Controller, tol: f64) -> DirectedGraph {
    k.sparsity(tol)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    SigmaMinBelowEpsilon { index: usize, value: f64, epsilon: f64 },
    GraphViolation { row: usize, col: usize, value: f64 },
    GraphSize { expected: usize, found: usize },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::SigmaMinBelowEpsilon { index, value, epsilon } => write!(
                f,
                "sigma_min(B) < epsilon: |b_{}{}| = {value} < {epsilon}",
                index + 1,
                index + 1
            ),
            ValidationIssue::GraphViolation { row, col, value } => write!(
                f,
                "A violates plant graph: a_{}{} = {value} but (s_P)_{}{} = 0",
                row + 1,
                col + 1,
                row + 1,
                col + 1
            ),
            ValidationIssue::GraphSize { expected, found } => write!(
                f,
                "plant graph has {found} nodes, plant dimension is {expected}"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return writeln!(f, "ok: sigma_min(B) >= epsilon; A conforms to plant graph");
        }
        for issue in &self.issues {
            writeln!(f, "FAIL: {issue}")?;
        }
        Ok(())
    }
}

/// Membership of `B` in `B(ε)` and of `A` in `A(S_P)`. Vector lengths are
/// already enforced by [`Plant::new`].
pub fn validate_plant(p: &Plant, plant_graph: &DirectedGraph) -> ValidationReport {
    let mut issues = Vec::new();
    for (index, &b) in p.b_diag.iter().enumerate() {
        if b.abs() < p.epsilon {
            issues.push(ValidationIssue::SigmaMinBelowEpsilon {
                index,
                value: b.abs(),
                epsilon: p.epsilon,
            });
        }
    }
    if plant_graph.node_count() != p.n() {
        issues.push(ValidationIssue::GraphSize {
            expected: p.n(),
            found: plant_graph.node_count(),
        });
        return ValidationReport { issues };
    }
    for row in 0..p.n() {
        for col in 0..p.n() {
            let value = p.a[(row, col)];
            if value != 0.0 && !plant_graph.adjacency()[(row, col)] {
                issues.push(ValidationIssue::GraphViolation { row, col, value });
            }
        }
    }
    ValidationReport { issues }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    fn plant(a: DMatrix<f64>, b: DVector<f64>, eps: f64) -> Plant {
        let n = a.nrows();
        Plant::new(a, b, DVector::from_element(n, 1.0), DVector::zeros(n), DVector::zeros(n), eps).unwrap()
    }

    #[test]
    fn sigma_min_boundary_passes() {
        let p = plant(DMatrix::zeros(2, 2), dvector![1.0, 1.0], 1.0);
        assert!(validate_plant(&p, &DirectedGraph::identity(2)).passed());
    }

    #[test]
    fn sigma_min_violation_reported() {
        let p = plant(DMatrix::zeros(2, 2), dvector![0.5, 1.0], 1.0);
        let report = validate_plant(&p, &DirectedGraph::identity(2));
        assert_eq!(
            report.issues,
            vec![ValidationIssue::SigmaMinBelowEpsilon { index: 0, value: 0.5, epsilon: 1.0 }]
        );
        assert!(report.to_string().contains("sigma_min(B) < epsilon"));
    }

    #[test]
    fn graph_violation_reported() {
        let p = plant(dmatrix![0.0, 3.0; 0.0, 0.0], dvector![1.0, 1.0], 1.0);
        let report = validate_plant(&p, &DirectedGraph::identity(2));
        assert_eq!(
            report.issues,
            vec![ValidationIssue::GraphViolation { row: 0, col: 1, value: 3.0 }]
        );
        assert!(report.to_string().contains("A violates plant graph"));
    }

    #[test]
    fn constructor_rejects_bad_input() {
        let z = || DVector::zeros(2);
        assert!(matches!(
            Plant::new(DMatrix::zeros(3, 2), z(), z(), z(), z(), 1.0),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(
            Plant::new(DMatrix::zeros(2, 2), dvector![1.0, f64::NAN], z(), z(), z(), 1.0),
            Err(Error::NonFinite { .. })
        ));
        assert!(Plant::new(DMatrix::zeros(2, 2), dvector![1.0, 0.0], z(), z(), z(), 1.0).is_err());
        assert!(Plant::new(DMatrix::zeros(2, 2), dvector![1.0, 1.0], z(), z(), z(), 0.0).is_err());
    }

    #[test]
    fn sparsity_of_static_and_dense_gains() {
        let k = Controller::new(
            DMatrix::identity(2, 2),
            DMatrix::zeros(2, 2),
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
        )
        .unwrap();
        assert_eq!(k.sparsity(0.0), DirectedGraph::identity(2));
        let dense = Controller::static_gain(DMatrix::from_element(3, 3, 0.7));
        assert_eq!(dense.sparsity(0.0), DirectedGraph::complete(3));
    }

    #[test]
    fn sparsity_follows_state_chains() {
        // x_K1 <- x_2, x_K2 <- x_K1, u_1 <- x_K2: entry (1, 2) through two hops.
        let k = Controller::new(
            dmatrix![0.0, 0.0; 1.0, 0.0],
            dmatrix![0.0, 1.0; 0.0, 0.0],
            dmatrix![0.0, 1.0; 0.0, 0.0],
            DMatrix::zeros(2, 2),
        )
        .unwrap();
        let s = k.sparsity(0.0);
        assert!(s.has_edge(1, 0));
        assert_eq!(s.to_rows(), vec![vec![0, 1], vec![0, 0]]);
    }

    #[test]
    fn nilpotency_test() {
        let p = plant(dmatrix![0.0, 0.0; 2.0, 0.0], dvector![1.0, 1.0], 1.0);
        assert!(p.is_nilpotent_deg2());
        let p = plant(dmatrix![0.0, 1.0; 1.0, 0.0], dvector![1.0, 1.0], 1.0);
        assert!(!p.is_nilpotent_deg2());
    }
}
