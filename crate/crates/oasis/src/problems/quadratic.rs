//! Quadratic objective with a known minimizer (oracle problem).

use super::{power_iteration, Curvature, Objective};
use crate::error::{OasisError, Result};
use crate::linalg;

/// The Hessian of a [`Quadratic`].
#[derive(Debug, Clone)]
pub enum QuadraticMatrix {
    /// Diagonal Hessian, stored as its diagonal.
    Diagonal(Vec<f64>),
    /// Dense symmetric Hessian, row-major.
    Dense(Vec<Vec<f64>>),
}

impl QuadraticMatrix {
    fn dim(&self) -> usize {
        match self {
            QuadraticMatrix::Diagonal(d) => d.len(),
            QuadraticMatrix::Dense(rows) => rows.len(),
        }
    }

    fn matvec(&self, v: &[f64]) -> Vec<f64> {
        match self {
            QuadraticMatrix::Diagonal(d) => d.iter().zip(v).map(|(di, vi)| di * vi).collect(),
            QuadraticMatrix::Dense(rows) => rows.iter().map(|r| linalg::dot(r, v)).collect(),
        }
    }
}

/// `F(w) = ½ wᵀH w - bᵀw` for a symmetric `H`.
///
/// Used as the ground-truth fixture throughout the test and verification
/// suites: the gradient (`Hw - b`), the Hessian-vector product (`Hv`), and —
/// for positive definite diagonal `H` — the minimizer `w* = H⁻¹b` and minimum
/// value `-½ bᵀH⁻¹b` are all available in closed form.
#[derive(Debug, Clone)]
pub struct Quadratic {
    h: QuadraticMatrix,
    b: Vec<f64>,
}

impl Quadratic {
    /// Build the objective, checking dimensions and (for dense `H`) symmetry.
    pub fn new(h: QuadraticMatrix, b: Vec<f64>) -> Result<Self> {
        if h.dim() != b.len() {
            return Err(OasisError::Dimension(format!(
                "Hessian dimension {} vs linear term {}",
                h.dim(),
                b.len()
            )));
        }
        if let QuadraticMatrix::Dense(rows) = &h {
            for (i, row) in rows.iter().enumerate() {
                if row.len() != rows.len() {
                    return Err(OasisError::Dimension(format!(
                        "dense Hessian row {i} has length {}",
                        row.len()
                    )));
                }
                for (j, &v) in row.iter().enumerate() {
                    if (v - rows[j][i]).abs() > 1e-12 * v.abs().max(1.0) {
                        return Err(OasisError::Config(format!(
                            "dense Hessian is not symmetric at ({i}, {j})"
                        )));
                    }
                }
            }
        }
        Ok(Quadratic { h, b })
    }

    /// Convenience constructor for diagonal `H`.
    pub fn diagonal(h: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        Self::new(QuadraticMatrix::Diagonal(h), b)
    }

    /// Closed-form minimizer `H⁻¹b`, available when `H` is diagonal with all
    /// entries positive.
    pub fn minimizer(&self) -> Option<Vec<f64>> {
        match &self.h {
            QuadraticMatrix::Diagonal(d) if d.iter().all(|&x| x > 0.0) => {
                Some(d.iter().zip(&self.b).map(|(di, bi)| bi / di).collect())
            }
            _ => None,
        }
    }

    /// `F(w*)` when the closed-form minimizer exists.
    pub fn min_value(&self) -> Option<f64> {
        self.minimizer().map(|w| self.value(&w, None))
    }

    /// The exact Hessian diagonal (diagonal variant only).
    pub fn hessian_diagonal(&self) -> Option<&[f64]> {
        match &self.h {
            QuadraticMatrix::Diagonal(d) => Some(d),
            QuadraticMatrix::Dense(_) => None,
        }
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }

    /// Data-free objective: a single "sample", so every batch is the full one.
    fn n_samples(&self) -> usize {
        1
    }

    fn value(&self, w: &[f64], _batch: Option<&[usize]>) -> f64 {
        0.5 * linalg::dot(w, &self.h.matvec(w)) - linalg::dot(&self.b, w)
    }

    fn gradient(&self, w: &[f64], _batch: Option<&[usize]>) -> Vec<f64> {
        let mut g = self.h.matvec(w);
        linalg::axpy(-1.0, &self.b, &mut g);
        g
    }

    fn hvp(&self, _w: &[f64], v: &[f64], _batch: Option<&[usize]>) -> Vec<f64> {
        self.h.matvec(v)
    }

    fn curvature(&self) -> Result<Curvature> {
        match &self.h {
            QuadraticMatrix::Diagonal(d) => {
                let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let l = lo.abs().max(hi.abs());
                if lo > 0.0 {
                    Ok(Curvature::StronglyConvex { mu: lo, l })
                } else {
                    Ok(Curvature::SmoothOnly { l })
                }
            }
            QuadraticMatrix::Dense(_) => {
                // ‖H‖₂ from power iteration on H² (valid for indefinite H),
                // then the smallest eigenvalue via the shifted operator
                // ‖H‖I - H, whose top eigenvalue is ‖H‖ - λ_min(H).
                let dim = self.dim();
                let l = power_iteration(dim, |v| self.h.matvec(&self.h.matvec(v)))?
                    .max(0.0)
                    .sqrt();
                let shift_top = power_iteration(dim, |v| {
                    let mut y = self.h.matvec(v);
                    for (yi, vi) in y.iter_mut().zip(v) {
                        *yi = l * vi - *yi;
                    }
                    y
                })?;
                let lambda_min = l - shift_top;
                if lambda_min > 0.0 {
                    Ok(Curvature::StronglyConvex { mu: lambda_min, l })
                } else {
                    Ok(Curvature::SmoothOnly { l })
                }
            }
        }
    }

    fn exact_minimizer(&self) -> Option<Vec<f64>> {
        self.minimizer()
    }
}
