//! High-precision reference solutions, used to report optimality gaps and to
//! anchor the theory checks.
//!
//! Quadratics with a closed-form minimizer return it directly. Everything
//! else is solved by a damped Newton method whose inner linear systems are
//! handled by conjugate gradients on Hessian-vector products, with a
//! backtracking line search for globalization. The target is
//! `‖∇F(w)‖² ≤ 1e-16`, far below any tolerance the experiments compare
//! against.

use crate::error::{OasisError, Result};
use crate::linalg::{self, axpy, dot, norm_sq};
use crate::optimizers::armijo_with_slope;
use crate::problems::Objective;

/// Stop once the squared full gradient norm falls below this.
pub const REFERENCE_GRAD_TOL: f64 = 1e-16;
/// Outer Newton iteration cap.
pub const REFERENCE_MAX_OUTER: usize = 500;

/// A solution accurate enough to subtract from.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub w_star: Vec<f64>,
    pub f_star: f64,
    /// Squared gradient norm actually reached.
    pub grad_norm_sq: f64,
    /// Outer iterations spent (0 when a closed form was available).
    pub iterations: usize,
}

/// Solve `min F` to near machine precision.
pub fn reference_solve(problem: &dyn Objective) -> Result<ReferenceSolution> {
    if let Some(w_star) = problem.exact_minimizer() {
        let f_star = problem.value(&w_star, None);
        let g = problem.gradient(&w_star, None);
        return Ok(ReferenceSolution {
            f_star,
            grad_norm_sq: norm_sq(&g),
            w_star,
            iterations: 0,
        });
    }

    let dim = problem.dim();
    let mut w = vec![0.0; dim];
    for outer in 0..REFERENCE_MAX_OUTER {
        let g = problem.gradient(&w, None);
        let gsq = norm_sq(&g);
        if gsq <= REFERENCE_GRAD_TOL {
            return Ok(ReferenceSolution {
                f_star: problem.value(&w, None),
                grad_norm_sq: gsq,
                w_star: w,
                iterations: outer,
            });
        }
        let mut p = cg_direction(problem, &w, &g);
        let mut slope = dot(&g, &p);
        if slope >= 0.0 {
            // The model direction failed to descend; fall back to steepest
            // descent, whose slope is exactly -‖g‖².
            p = g.iter().map(|gi| -gi).collect();
            slope = -gsq;
        }
        let ls = armijo_with_slope(problem, &w, &p, slope, 1.0, 1e-4, 0.5).map_err(|_| {
            OasisError::NoConvergence {
                routine: "newton_cg",
                iterations: outer,
                residual: gsq,
            }
        })?;
        axpy(ls.eta, &p, &mut w);
    }
    let g = problem.gradient(&w, None);
    Err(OasisError::NoConvergence {
        routine: "newton_cg",
        iterations: REFERENCE_MAX_OUTER,
        residual: norm_sq(&g),
    })
}

/// Approximately solve `H(w) p = -g` by conjugate gradients, stopping at the
/// standard superlinear forcing residual `min(0.5, ‖g‖^½)·‖g‖`. Negative
/// curvature aborts the inner loop: the direction built so far is returned,
/// or steepest descent if it surfaced immediately.
fn cg_direction(problem: &dyn Objective, w: &[f64], g: &[f64]) -> Vec<f64> {
    let dim = w.len();
    let gnorm = norm_sq(g).sqrt();
    let forcing = gnorm.sqrt().min(0.5) * gnorm;
    let max_inner = (2 * dim).clamp(1, 500);

    let mut x = vec![0.0; dim];
    let mut r: Vec<f64> = g.iter().map(|gi| -gi).collect();
    let mut p = r.clone();
    let mut rsq = norm_sq(&r);
    for inner in 0..max_inner {
        if rsq.sqrt() <= forcing {
            break;
        }
        let hp = problem.hvp(w, &p, None);
        let php = dot(&p, &hp);
        if php <= 0.0 {
            if inner == 0 {
                return g.iter().map(|gi| -gi).collect();
            }
            break;
        }
        let alpha = rsq / php;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &hp, &mut r);
        let rsq_next = norm_sq(&r);
        let beta = rsq_next / rsq;
        for i in 0..dim {
            p[i] = r[i] + beta * p[i];
        }
        rsq = rsq_next;
    }
    if linalg::all_finite(&x) && norm_sq(&x) > 0.0 {
        x
    } else {
        g.iter().map(|gi| -gi).collect()
    }
}
