//! Augmented system and Riccati machinery for the optimal centralized design.
//!
//! With `ξ(k) = u(k) + w(k)` and `ū(k) = u(k+1) - D u(k)` the plant becomes
//!
//! ```text
//! [x; ξ](k+1) = Ã [x; ξ](k) + B̃ ū(k),   Ã = [[A, B], [0, D]],  B̃ = [[0], [I]],
//! ```
//!
//! and the cost `Σ ‖x‖² + ‖ξ‖²` is an LQ problem with unit state weight and
//! no input penalty. Its value matrix `X` solves
//!
//! ```text
//! ÃᵀXB̃ (B̃ᵀXB̃)⁻¹ B̃ᵀXÃ − ÃᵀXÃ + X − I = 0,
//! ```
//!
//! and the optimal update is `ū = G₁ x + G₂ ξ` with
//! `[G₁ G₂] = −(B̃ᵀXB̃)⁻¹ B̃ᵀXÃ`.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::model::{nilpotency_defect, Plant};

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSystem {
    pub a_tilde: DMatrix<f64>,
    pub b_tilde: DMatrix<f64>,
}

impl AugmentedSystem {
    /// Subsystem count `n` (the augmented state has `2n` entries).
    pub fn n(&self) -> usize {
        self.b_tilde.ncols()
    }

    /// Popov–Belevitch–Hautus test: `[Ã − λI, B̃]` has full row rank at every
    /// eigenvalue `λ` of `Ã`.
    pub fn is_controllable(&self, tol: f64) -> bool {
        let m = self.a_tilde.nrows();
        let eigs = self.a_tilde.complex_eigenvalues();
        eigs.iter().all(|&lambda| {
            let mut pbh = DMatrix::<Complex<f64>>::zeros(m, m + self.n());
            for i in 0..m {
                for j in 0..m {
                    pbh[(i, j)] = Complex::new(self.a_tilde[(i, j)], 0.0);
                }
                pbh[(i, i)] -= lambda;
                for j in 0..self.n() {
                    pbh[(i, m + j)] = Complex::new(self.b_tilde[(i, j)], 0.0);
                }
            }
            let sv = pbh.singular_values();
            let smax = sv.max().max(1.0);
            sv.iter().filter(|&&s| s > tol * smax).count() == m
        })
    }
}

pub fn build_augmented(p: &Plant) -> AugmentedSystem {
    let n = p.n();
    let mut a_tilde = DMatrix::zeros(2 * n, 2 * n);
    a_tilde.view_mut((0, 0), (n, n)).copy_from(&p.a);
    for i in 0..n {
        a_tilde[(i, n + i)] = p.b_diag[i];
        a_tilde[(n + i, n + i)] = p.d_diag[i];
    }
    let mut b_tilde = DMatrix::zeros(2 * n, n);
    for i in 0..n {
        b_tilde[(n + i, i)] = 1.0;
    }
    AugmentedSystem { a_tilde, b_tilde }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DareOptions {
    /// Stop when `‖X_{k+1} − X_k‖_F ≤ tol · max(1, ‖X_k‖_F)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for DareOptions {
    fn default() -> Self {
        DareOptions {
            tol: 1e-12,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DareSolution {
    pub x: DMatrix<f64>,
    pub x11: DMatrix<f64>,
    pub x12: DMatrix<f64>,
    pub x22: DMatrix<f64>,
    pub g1: DMatrix<f64>,
    pub g2: DMatrix<f64>,
    /// Frobenius norm of the Riccati residual at `x`.
    pub residual: f64,
    /// Value-iteration sweeps; zero for closed-form solutions.
    pub iterations: usize,
}

impl DareSolution {
    fn assemble(aug: &AugmentedSystem, x: DMatrix<f64>, iterations: usize) -> Result<Self> {
        let n = aug.n();
        let (g1, g2) = gains(aug, &x)?;
        let residual = dare_residual(aug, &x)?;
        Ok(DareSolution {
            x11: x.view((0, 0), (n, n)).into_owned(),
            x12: x.view((0, n), (n, n)).into_owned(),
            x22: x.view((n, n), (n, n)).into_owned(),
            x,
            g1,
            g2,
            residual,
            iterations,
        })
    }
}

/// `[G₁ G₂] = −(B̃ᵀXB̃)⁻¹ B̃ᵀXÃ`, split into the `x` and `ξ` blocks.
fn gains(aug: &AugmentedSystem, x: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = aug.n();
    let xb = x * &aug.b_tilde;
    let btxb = aug.b_tilde.transpose() * &xb;
    let chol = btxb.cholesky().ok_or(Error::DareSingular)?;
    let g = -chol.solve(&(xb.transpose() * &aug.a_tilde));
    Ok((
        g.view((0, 0), (n, n)).into_owned(),
        g.view((0, n), (n, n)).into_owned(),
    ))
}

/// `‖ÃᵀXB̃(B̃ᵀXB̃)⁻¹B̃ᵀXÃ − ÃᵀXÃ + X − I‖_F`.
pub fn dare_residual(aug: &AugmentedSystem, x: &DMatrix<f64>) -> Result<f64> {
    let m = x.nrows();
    let next = riccati_step(aug, x)?;
    let r = x - next;
    debug_assert_eq!(r.nrows(), m);
    Ok(r.norm())
}

/// One value-iteration sweep: `ÃᵀXÃ − ÃᵀXB̃(B̃ᵀXB̃)⁻¹B̃ᵀXÃ + I`, symmetrized.
///
/// Evaluated as `Ãᵀ M Ã + I` with `M = X − XB̃(B̃ᵀXB̃)⁻¹B̃ᵀX`, so the large
/// cancellation happens at the scale of `X` rather than of `ÃᵀXÃ`.
fn riccati_step(aug: &AugmentedSystem, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let xb = x * &aug.b_tilde;
    let btxb = aug.b_tilde.transpose() * &xb;
    let chol = btxb.cholesky().ok_or(Error::DareSingular)?;
    let m = x - &xb * chol.solve(&xb.transpose());
    let m = (&m + m.transpose()) * 0.5;
    let mut next = aug.a_tilde.transpose() * m * &aug.a_tilde;
    for i in 0..next.nrows() {
        next[(i, i)] += 1.0;
    }
    Ok((&next + next.transpose()) * 0.5)
}

/// Value iteration from `X₀ = I`.
pub fn solve_dare(aug: &AugmentedSystem, opts: &DareOptions) -> Result<DareSolution> {
    let m = aug.a_tilde.nrows();
    let mut x = DMatrix::identity(m, m);
    let mut step = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        let next = riccati_step(aug, &x)?;
        step = (&next - &x).norm();
        let scale = x.norm().max(1.0);
        x = next;
        if !step.is_finite() {
            break;
        }
        if step <= opts.tol * scale {
            let (x, extra) = polish(aug, x, step)?;
            return DareSolution::assemble(aug, x, iter + extra);
        }
    }
    Err(Error::DareNotConverged {
        iterations: opts.max_iter,
        step,
    })
}

/// Keep iterating past the relative stop while the step still shrinks, so the
/// absolute residual ends near rounding level even when `‖X‖` is large.
fn polish(aug: &AugmentedSystem, mut x: DMatrix<f64>, mut step: f64) -> Result<(DMatrix<f64>, usize)> {
    const MAX_EXTRA: usize = 10_000;
    let mut extra = 0;
    while step > 0.0 && extra < MAX_EXTRA {
        let next = riccati_step(aug, &x)?;
        let s = (&next - &x).norm();
        extra += 1;
        if !(s < step) {
            break;
        }
        x = next;
        step = s;
    }
    Ok((x, extra))
}

/// Closed-form solution for `A² = 0`:
///
/// ```text
/// X = [[AᵀA + I, AᵀB], [BA, BAᵀ(I + B²)⁻¹AB + I + B²]],  G₁ = 0,
/// G₂ = −(I + B²)⁻¹BAB − D.
/// ```
pub fn nilpotent_closed_form(p: &Plant) -> Result<DareSolution> {
    if nilpotency_defect(&p.a) > 0.0 {
        return Err(Error::NotNilpotent {
            norm: (&p.a * &p.a).norm(),
        });
    }
    let n = p.n();
    let a = &p.a;
    let b = p.b();
    let ib2_inv = DMatrix::from_diagonal(&p.b_diag.map(|b| 1.0 / (1.0 + b * b)));
    let eye = DMatrix::<f64>::identity(n, n);

    let x11 = a.transpose() * a + &eye;
    let x12 = a.transpose() * &b;
    let x22 = &b * a.transpose() * &ib2_inv * a * &b + &eye + &b * &b;
    let mut x = DMatrix::zeros(2 * n, 2 * n);
    x.view_mut((0, 0), (n, n)).copy_from(&x11);
    x.view_mut((0, n), (n, n)).copy_from(&x12);
    x.view_mut((n, 0), (n, n)).copy_from(&x12.transpose());
    x.view_mut((n, n), (n, n)).copy_from(&x22);

    let g1 = DMatrix::zeros(n, n);
    let g2 = -(&ib2_inv * &b * a * &b) - p.d();
    let aug = build_augmented(p);
    let residual = dare_residual(&aug, &x)?;
    Ok(DareSolution {
        x,
        x11,
        x12,
        x22,
        g1,
        g2,
        residual,
        iterations: 0,
    })
}

/// Closed form when `A² = 0`, value iteration otherwise.
pub fn solve_for_plant(p: &Plant, opts: &DareOptions) -> Result<DareSolution> {
    if p.is_nilpotent_deg2() {
        nilpotent_closed_form(p)
    } else {
        solve_dare(&build_augmented(p), opts)
    }
}
