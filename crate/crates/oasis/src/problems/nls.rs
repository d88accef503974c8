//! Sigmoid nonlinear least squares (nonconvex benchmark).

use super::{batch_len, for_each_sample, power_iteration, sigmoid, Curvature, Objective};
use crate::error::{OasisError, Result};
use crate::linalg::CsrMatrix;

/// Nonlinear least squares with a sigmoid link and `{0, 1}` targets:
///
/// ```text
/// F(w) = (s/|B|) Σ_{i∈B} (y_i - φ(x_iᵀw))²,   φ(t) = 1/(1+e^{-t})
/// ```
///
/// where `s = 1` by default and `s = 1/2` when `half_scale` is set (both
/// conventions appear in the literature; the derivatives below follow the
/// chosen `s` self-consistently). Nonconvex, with a global curvature bound
/// `‖∇²F‖ ≤ (5s/8)·σ_max(XᵀX)/n`.
#[derive(Debug, Clone)]
pub struct NonlinearLeastSquares {
    x: CsrMatrix,
    y: Vec<f64>,
    half_scale: bool,
}

impl NonlinearLeastSquares {
    /// Build the objective. Targets must be exactly `0.0` or `1.0`.
    pub fn new(x: CsrMatrix, y: Vec<f64>, half_scale: bool) -> Result<Self> {
        if y.len() != x.n_rows() {
            return Err(OasisError::Dimension(format!(
                "{} targets for {} rows",
                y.len(),
                x.n_rows()
            )));
        }
        if let Some(bad) = y.iter().find(|&&yi| yi != 0.0 && yi != 1.0) {
            return Err(OasisError::Config(format!(
                "nonlinear-least-squares targets must be 0 or 1, found {bad}"
            )));
        }
        Ok(NonlinearLeastSquares { x, y, half_scale })
    }

    /// Convert `{-1, +1}` labels to the `{0, 1}` targets this loss expects.
    pub fn from_pm_labels(x: CsrMatrix, y_pm: &[f64], half_scale: bool) -> Result<Self> {
        let y01 = y_pm.iter().map(|&y| (y + 1.0) / 2.0).collect();
        Self::new(x, y01, half_scale)
    }

    fn scale(&self) -> f64 {
        if self.half_scale {
            0.5
        } else {
            1.0
        }
    }

    pub fn data(&self) -> &CsrMatrix {
        &self.x
    }

    pub fn targets(&self) -> &[f64] {
        &self.y
    }

    /// Fraction of samples with thresholded prediction `φ(x_iᵀw) ≥ 1/2 ⇒ 1`
    /// matching the target (ties predict 1).
    pub fn accuracy(&self, w: &[f64], batch: Option<&[usize]>) -> f64 {
        let m = batch_len(self.y.len(), batch);
        if m == 0 {
            return f64::NAN;
        }
        let mut hits = 0usize;
        for_each_sample(self.y.len(), batch, |_, i| {
            let pred = if self.x.row_dot(i, w) >= 0.0 {
                1.0
            } else {
                0.0
            };
            if pred == self.y[i] {
                hits += 1;
            }
        });
        hits as f64 / m as f64
    }
}

impl Objective for NonlinearLeastSquares {
    fn dim(&self) -> usize {
        self.x.n_cols()
    }

    fn n_samples(&self) -> usize {
        self.x.n_rows()
    }

    fn value(&self, w: &[f64], batch: Option<&[usize]>) -> f64 {
        let m = batch_len(self.n_samples(), batch);
        let mut loss = 0.0;
        for_each_sample(self.n_samples(), batch, |_, i| {
            let r = self.y[i] - sigmoid(self.x.row_dot(i, w));
            loss += r * r;
        });
        self.scale() * loss / m as f64
    }

    fn gradient(&self, w: &[f64], batch: Option<&[usize]>) -> Vec<f64> {
        // dℓ/dt = -2(y - φ)·φ(1-φ)
        let m = batch_len(self.n_samples(), batch);
        let scale = self.scale() / m as f64;
        let mut g = vec![0.0; self.dim()];
        for_each_sample(self.n_samples(), batch, |_, i| {
            let phi = sigmoid(self.x.row_dot(i, w));
            let coeff = -2.0 * (self.y[i] - phi) * phi * (1.0 - phi) * scale;
            let (cols, vals) = self.x.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                g[c] += coeff * v;
            }
        });
        g
    }

    fn hvp(&self, w: &[f64], v: &[f64], batch: Option<&[usize]>) -> Vec<f64> {
        // d²ℓ/dt² = -2·φ(1-φ)·(y - 2(1+y)φ + 3φ²); three row passes as in the
        // logistic case.
        let m = batch_len(self.n_samples(), batch);
        let scale = -2.0 * self.scale() / m as f64;
        let mut hv = vec![0.0; self.dim()];
        for_each_sample(self.n_samples(), batch, |_, i| {
            let phi = sigmoid(self.x.row_dot(i, w));
            let u = self.x.row_dot(i, v);
            let yi = self.y[i];
            let bracket = phi * (1.0 - phi) * (yi - 2.0 * (1.0 + yi) * phi + 3.0 * phi * phi);
            let coeff = scale * bracket * u;
            let (cols, vals) = self.x.row(i);
            for (&c, &x) in cols.iter().zip(vals) {
                hv[c] += coeff * x;
            }
        });
        hv
    }

    fn curvature(&self) -> Result<Curvature> {
        // |d²ℓ/dt²| ≤ 2[φ'² + |y-φ|·|φ''|] ≤ 2(1/16 + 1/4) = 5/8.
        let n = self.n_samples() as f64;
        let sigma_max = power_iteration(self.dim(), |v| self.x.spmv_t(&self.x.spmv(v)))?;
        Ok(Curvature::SmoothOnly {
            l: self.scale() * 0.625 * sigma_max / n,
        })
    }

    fn classification_accuracy(&self, w: &[f64], batch: Option<&[usize]>) -> Option<f64> {
        Some(self.accuracy(w, batch))
    }
}
