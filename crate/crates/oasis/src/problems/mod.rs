//! Benchmark objectives.
//!
//! Every objective exposes value/gradient/Hessian-vector-product oracles over
//! an optional mini-batch of sample indices (`None` = the full dataset), so
//! deterministic and stochastic optimizers share one interface. The module
//! also provides smoothness/strong-convexity constant estimation, uniform
//! mini-batch sampling, and finite-difference oracles for cross-checking the
//! analytic derivatives.

pub mod fd;
mod logistic;
mod nls;
mod quadratic;

pub use logistic::LogisticRegression;
pub use nls::NonlinearLeastSquares;
pub use quadratic::{Quadratic, QuadraticMatrix};

use crate::error::{OasisError, Result};
use crate::linalg::{self, Rng};

/// A twice-differentiable empirical-risk objective
/// `F(w) = (1/|B|) Σ_{i∈B} f_i(w) (+ regularizer)`.
///
/// The `batch` argument selects which samples participate; `None` means all of
/// them. Implementations must average over the batch (not sum), keep the full
/// regularizer regardless of the batch, and be deterministic: the same `(w,
/// batch)` always produces bitwise-identical results.
pub trait Objective {
    /// Number of coordinates of `w`.
    fn dim(&self) -> usize;

    /// Number of data samples (1 for data-free objectives).
    fn n_samples(&self) -> usize;

    /// Objective value.
    fn value(&self, w: &[f64], batch: Option<&[usize]>) -> f64;

    /// Gradient.
    fn gradient(&self, w: &[f64], batch: Option<&[usize]>) -> Vec<f64>;

    /// Hessian-vector product `∇²F(w) · v`.
    fn hvp(&self, w: &[f64], v: &[f64], batch: Option<&[usize]>) -> Vec<f64>;

    /// Smoothness / strong-convexity information for the full objective.
    fn curvature(&self) -> Result<Curvature>;

    /// Classification accuracy at `w`, for objectives that carry labels.
    /// Purely an instrumentation hook — never part of the optimization.
    fn classification_accuracy(&self, _w: &[f64], _batch: Option<&[usize]>) -> Option<f64> {
        None
    }

    /// Exact minimizer, for objectives that have one in closed form.
    fn exact_minimizer(&self) -> Option<Vec<f64>> {
        None
    }
}

/// Result of [`Objective::curvature`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curvature {
    /// `μ I ⪯ ∇²F ⪯ L I` everywhere with `μ > 0`.
    StronglyConvex { mu: f64, l: f64 },
    /// Only an upper curvature bound `‖∇²F‖ ≤ L` is available.
    SmoothOnly { l: f64 },
}

impl Curvature {
    /// The smoothness constant, whichever variant.
    pub fn l(&self) -> f64 {
        match *self {
            Curvature::StronglyConvex { l, .. } | Curvature::SmoothOnly { l } => l,
        }
    }

    /// The strong-convexity constant, or an error for merely-smooth objectives.
    pub fn mu(&self) -> Result<f64> {
        match *self {
            Curvature::StronglyConvex { mu, .. } => Ok(mu),
            Curvature::SmoothOnly { .. } => Err(OasisError::NotApplicable(
                "objective is not strongly convex".into(),
            )),
        }
    }
}

/// Convergence tolerance of [`power_iteration`] (relative change of the
/// Rayleigh quotient between sweeps).
pub const POWER_ITERATION_TOL: f64 = 1e-8;

/// Iteration cap of [`power_iteration`].
pub const POWER_ITERATION_MAX_ITER: usize = 10_000;

/// Largest eigenvalue of a symmetric positive semidefinite operator by power
/// iteration with a fixed-seed random start (deterministic across calls).
///
/// Converges when the Rayleigh quotient changes by at most
/// `POWER_ITERATION_TOL · max(1, |λ|)` between sweeps; errors out after
/// `POWER_ITERATION_MAX_ITER` sweeps without convergence.
pub fn power_iteration<F>(dim: usize, op: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if dim == 0 {
        return Ok(0.0);
    }
    // Fixed internal seed: the estimate must not depend on caller state.
    let mut rng = Rng::new(0x9E37_79B9_7F4A_7C15);
    let mut x: Vec<f64> = (0..dim).map(|_| rng.standard_normal()).collect();
    let nx = linalg::norm(&x);
    for xi in &mut x {
        *xi /= nx;
    }
    let mut lambda_prev = f64::INFINITY;
    let mut last_change = f64::INFINITY;
    for _ in 0..POWER_ITERATION_MAX_ITER {
        let y = op(&x);
        let lambda = linalg::dot(&x, &y);
        let ny = linalg::norm(&y);
        if ny == 0.0 {
            // The operator annihilates the iterate: zero operator (numerically).
            return Ok(0.0);
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
        last_change = (lambda - lambda_prev).abs();
        if last_change <= POWER_ITERATION_TOL * lambda.abs().max(1.0) {
            return Ok(lambda);
        }
        lambda_prev = lambda;
    }
    Err(OasisError::NoConvergence {
        routine: "power iteration",
        iterations: POWER_ITERATION_MAX_ITER,
        residual: last_change,
    })
}

/// Uniform mini-batch of `b` distinct indices from `0..n` (partial
/// Fisher–Yates). `b == n` returns a full permutation. Errors on `b == 0` or
/// `b > n`.
pub fn sample_batch(n: usize, b: usize, rng: &mut Rng) -> Result<Vec<usize>> {
    if b == 0 {
        return Err(OasisError::Config("batch size must be positive".into()));
    }
    if b > n {
        return Err(OasisError::Config(format!(
            "batch size {b} exceeds sample count {n}"
        )));
    }
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..b {
        let j = i + rng.next_below((n - i) as u64) as usize;
        pool.swap(i, j);
    }
    pool.truncate(b);
    Ok(pool)
}

/// Numerically stable `log(1 + exp(u))`.
pub(crate) fn log1p_exp(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

/// Numerically stable logistic sigmoid `1 / (1 + exp(-u))`.
pub(crate) fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// Iterate over either the batch or all of `0..n`, calling `f(position_in_batch, sample_index)`.
pub(crate) fn for_each_sample(n: usize, batch: Option<&[usize]>, mut f: impl FnMut(usize, usize)) {
    match batch {
        Some(idx) => {
            for (j, &i) in idx.iter().enumerate() {
                f(j, i);
            }
        }
        None => {
            for i in 0..n {
                f(i, i);
            }
        }
    }
}

/// Batch cardinality under the `None` = full convention.
pub(crate) fn batch_len(n: usize, batch: Option<&[usize]>) -> usize {
    batch.map_or(n, |idx| idx.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_and_log1p_exp_are_stable_at_extremes() {
        assert_eq!(sigmoid(1000.0), 1.0);
        assert!(sigmoid(-1000.0) >= 0.0 && sigmoid(-1000.0) < 1e-300);
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-16);
        // log(1+e^u) ≈ u for large u, ≈ e^u for very negative u; never inf/NaN.
        assert!((log1p_exp(1000.0) - 1000.0).abs() < 1e-9);
        assert!(log1p_exp(-1000.0) >= 0.0);
        assert!(log1p_exp(-1000.0).is_finite());
        assert!((log1p_exp(0.0) - std::f64::consts::LN_2).abs() < 1e-16);
    }

    #[test]
    fn power_iteration_finds_top_eigenvalue_of_diagonal() {
        let h = [3.0, 100.0, 7.0];
        let top =
            power_iteration(3, |v| v.iter().zip(&h).map(|(vi, hi)| vi * hi).collect()).unwrap();
        assert!((top - 100.0).abs() < 1e-5 * 100.0, "top = {top}");
    }

    #[test]
    fn power_iteration_matches_dense_eigensolver_oracle() {
        // Random PSD Gram matrix; oracle = nalgebra's symmetric eigensolver.
        let mut rng = Rng::new(55);
        let n = 8;
        let g: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.standard_normal()).collect())
            .collect();
        // A = GᵀG (PSD).
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = (0..n).map(|k| g[k][i] * g[k][j]).sum();
            }
        }
        let top =
            power_iteration(n, |v| a.iter().map(|row| linalg::dot(row, v)).collect()).unwrap();
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| a[i][j]);
        let oracle = m
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::NEG_INFINITY, |acc, &e| acc.max(e));
        assert!(
            (top - oracle).abs() <= 1e-6 * oracle.abs().max(1.0),
            "power {top} vs oracle {oracle}"
        );
    }

    #[test]
    fn power_iteration_is_deterministic() {
        let h = [1.0, 2.0, 5.0, 0.5];
        let run =
            || power_iteration(4, |v| v.iter().zip(&h).map(|(a, b)| a * b).collect()).unwrap();
        assert_eq!(run().to_bits(), run().to_bits());
    }

    #[test]
    fn power_iteration_zero_operator_returns_zero() {
        assert_eq!(power_iteration(5, |v| vec![0.0; v.len()]).unwrap(), 0.0);
    }

    #[test]
    fn sample_batch_validates_bounds() {
        let mut rng = Rng::new(1);
        assert!(sample_batch(10, 0, &mut rng).is_err());
        assert!(sample_batch(10, 11, &mut rng).is_err());
    }

    #[test]
    fn sample_batch_returns_distinct_in_range_indices() {
        let mut rng = Rng::new(2);
        for _ in 0..100 {
            let batch = sample_batch(20, 7, &mut rng).unwrap();
            assert_eq!(batch.len(), 7);
            let mut seen = [false; 20];
            for &i in &batch {
                assert!(i < 20);
                assert!(!seen[i], "duplicate index {i}");
                seen[i] = true;
            }
        }
    }

    #[test]
    fn sample_batch_full_size_is_a_permutation() {
        let mut rng = Rng::new(3);
        let mut batch = sample_batch(12, 12, &mut rng).unwrap();
        batch.sort_unstable();
        assert_eq!(batch, (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn sample_batch_is_roughly_uniform() {
        let mut rng = Rng::new(4);
        let mut counts = [0usize; 10];
        let draws = 20_000;
        for _ in 0..draws {
            for i in sample_batch(10, 3, &mut rng).unwrap() {
                counts[i] += 1;
            }
        }
        // Each index expects draws·3/10 = 6000 hits; allow ±5%.
        for &c in &counts {
            assert!((5_700..6_300).contains(&c), "counts {counts:?}");
        }
    }

    #[test]
    fn curvature_accessors() {
        let sc = Curvature::StronglyConvex { mu: 0.1, l: 2.0 };
        assert_eq!(sc.l(), 2.0);
        assert_eq!(sc.mu().unwrap(), 0.1);
        let so = Curvature::SmoothOnly { l: 3.0 };
        assert_eq!(so.l(), 3.0);
        assert!(so.mu().is_err());
    }
}
