//! Dense vector helpers, a CSR sparse matrix, and the deterministic RNG.
//!
//! Vectors are plain `Vec<f64>` / `&[f64]`; the free functions here cover the
//! handful of BLAS-1 style operations the optimizers need, plus the diagonally
//! weighted norm pair used by the adaptive step-size rule.

pub mod csr;
pub mod rng;

pub use csr::CsrMatrix;
pub use rng::Rng;

/// Dot product. Panics in debug builds on length mismatch.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Squared Euclidean norm.
pub fn norm_sq(x: &[f64]) -> f64 {
    dot(x, x)
}

/// Euclidean norm.
pub fn norm(x: &[f64]) -> f64 {
    norm_sq(x).sqrt()
}

/// Max-magnitude (ℓ∞) norm. Returns 0 for an empty slice.
pub fn linf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `y += a * x`.
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Element-wise difference `x - y` as a new vector.
pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

/// Weighted norm `‖x‖_D = sqrt(Σ d_i x_i²)` for a positive diagonal `d`.
///
/// This is the metric in which the adaptive optimizers measure iterate
/// displacement; `d` is expected to be a clamped preconditioner diagonal and
/// therefore strictly positive.
pub fn weighted_norm(x: &[f64], d: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), d.len());
    x.iter()
        .zip(d)
        .map(|(xi, di)| {
            debug_assert!(*di > 0.0, "weighted_norm needs a positive diagonal");
            di * xi * xi
        })
        .sum::<f64>()
        .sqrt()
}

/// Dual weighted norm `‖x‖*_D = sqrt(Σ x_i² / d_i)` for a positive diagonal `d`.
///
/// Dual to [`weighted_norm`] in the sense that `|⟨x, y⟩| ≤ ‖x‖*_D · ‖y‖_D`;
/// the adaptive step-size rule measures gradient differences in this norm.
pub fn weighted_dual_norm(x: &[f64], d: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), d.len());
    x.iter()
        .zip(d)
        .map(|(xi, di)| {
            debug_assert!(*di > 0.0, "weighted_dual_norm needs a positive diagonal");
            xi * xi / di
        })
        .sum::<f64>()
        .sqrt()
}

/// True iff every entry is finite.
pub fn all_finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}
