//! Central finite-difference oracles.
//!
//! These derivative approximations deliberately know nothing about an
//! objective's analytic gradient/HVP code paths — they only call
//! [`Objective::value`] (respectively [`Objective::gradient`]) — so tests can
//! use them as independent referees for the hand-derived formulas.

use super::Objective;
use crate::linalg;

/// Step size used for all central differences: `1e-6 · max(1, ‖w‖)`.
fn step(w: &[f64]) -> f64 {
    1e-6 * linalg::norm(w).max(1.0)
}

/// Central-difference gradient: `(F(w + h e_i) - F(w - h e_i)) / 2h` per
/// coordinate. O(d) objective evaluations — test-scale only.
pub fn gradient_fd<P: Objective + ?Sized>(
    problem: &P,
    w: &[f64],
    batch: Option<&[usize]>,
) -> Vec<f64> {
    let h = step(w);
    let mut g = vec![0.0; w.len()];
    let mut wp = w.to_vec();
    for i in 0..w.len() {
        let orig = wp[i];
        wp[i] = orig + h;
        let fp = problem.value(&wp, batch);
        wp[i] = orig - h;
        let fm = problem.value(&wp, batch);
        wp[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Central-difference Hessian-vector product:
/// `(∇F(w + h v) - ∇F(w - h v)) / 2h`.
pub fn hvp_fd<P: Objective + ?Sized>(
    problem: &P,
    w: &[f64],
    v: &[f64],
    batch: Option<&[usize]>,
) -> Vec<f64> {
    let h = step(w);
    let mut wp = w.to_vec();
    linalg::axpy(h, v, &mut wp);
    let gp = problem.gradient(&wp, batch);
    let mut wm = w.to_vec();
    linalg::axpy(-h, v, &mut wm);
    let gm = problem.gradient(&wm, batch);
    gp.iter()
        .zip(&gm)
        .map(|(p, m)| (p - m) / (2.0 * h))
        .collect()
}
