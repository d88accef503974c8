//! ℓ2-regularized logistic regression over sparse data.

use super::{
    batch_len, for_each_sample, log1p_exp, power_iteration, sigmoid, Curvature, Objective,
};
use crate::error::{OasisError, Result};
use crate::linalg::{self, CsrMatrix};

/// Binary logistic regression with labels in `{-1, +1}`:
///
/// ```text
/// F(w) = (1/|B|) Σ_{i∈B} log(1 + exp(-y_i · x_iᵀw)) + (λ/2)‖w‖²
/// ```
///
/// Strongly convex with `μ = λ` when `λ > 0`, and `L`-smooth with
/// `L = σ_max(XᵀX)/(4n) + λ`.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    x: CsrMatrix,
    y: Vec<f64>,
    lambda: f64,
}

impl LogisticRegression {
    /// Build the objective. Labels must be exactly `-1.0` or `+1.0` and match
    /// the row count; `lambda` must be nonnegative and finite.
    pub fn new(x: CsrMatrix, y: Vec<f64>, lambda: f64) -> Result<Self> {
        if y.len() != x.n_rows() {
            return Err(OasisError::Dimension(format!(
                "{} labels for {} rows",
                y.len(),
                x.n_rows()
            )));
        }
        if let Some(bad) = y.iter().find(|&&yi| yi != 1.0 && yi != -1.0) {
            return Err(OasisError::Config(format!(
                "logistic labels must be ±1, found {bad}"
            )));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(OasisError::Config(format!(
                "regularization must be finite and nonnegative, got {lambda}"
            )));
        }
        Ok(LogisticRegression { x, y, lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn data(&self) -> &CsrMatrix {
        &self.x
    }

    pub fn labels(&self) -> &[f64] {
        &self.y
    }

    /// Fraction of samples whose sign prediction `x_iᵀw ≥ 0 ⇒ +1` matches the
    /// label (ties predict `+1`). `None` batch scores the full dataset.
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
                -1.0
            };
            if pred == self.y[i] {
                hits += 1;
            }
        });
        hits as f64 / m as f64
    }
}

impl Objective for LogisticRegression {
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
            loss += log1p_exp(-self.y[i] * self.x.row_dot(i, w));
        });
        loss / m as f64 + 0.5 * self.lambda * linalg::norm_sq(w)
    }

    fn gradient(&self, w: &[f64], batch: Option<&[usize]>) -> Vec<f64> {
        let m = batch_len(self.n_samples(), batch);
        let scale = 1.0 / m as f64;
        let mut g = vec![0.0; self.dim()];
        for_each_sample(self.n_samples(), batch, |_, i| {
            // d/dt log(1+e^{-y t}) = -y·σ(-y t)
            let coeff = -self.y[i] * sigmoid(-self.y[i] * self.x.row_dot(i, w)) * scale;
            let (cols, vals) = self.x.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                g[c] += coeff * v;
            }
        });
        linalg::axpy(self.lambda, w, &mut g);
        g
    }

    fn hvp(&self, w: &[f64], v: &[f64], batch: Option<&[usize]>) -> Vec<f64> {
        // Three row passes: margins t_i = x_iᵀw, directional values u_i = x_iᵀv,
        // then accumulate σ(t_i)σ(-t_i)·u_i weighted rows. The sigmoid factor
        // is label-free because y_i² = 1.
        let m = batch_len(self.n_samples(), batch);
        let scale = 1.0 / m as f64;
        let mut hv = vec![0.0; self.dim()];
        for_each_sample(self.n_samples(), batch, |_, i| {
            let t = self.x.row_dot(i, w);
            let u = self.x.row_dot(i, v);
            let s = sigmoid(t) * sigmoid(-t);
            let coeff = s * u * scale;
            let (cols, vals) = self.x.row(i);
            for (&c, &x) in cols.iter().zip(vals) {
                hv[c] += coeff * x;
            }
        });
        linalg::axpy(self.lambda, v, &mut hv);
        hv
    }

    fn curvature(&self) -> Result<Curvature> {
        let n = self.n_samples() as f64;
        let sigma_max = power_iteration(self.dim(), |v| self.x.spmv_t(&self.x.spmv(v)))?;
        let l = sigma_max / (4.0 * n) + self.lambda;
        if self.lambda > 0.0 {
            Ok(Curvature::StronglyConvex { mu: self.lambda, l })
        } else {
            Ok(Curvature::SmoothOnly { l })
        }
    }

    fn classification_accuracy(&self, w: &[f64], batch: Option<&[usize]>) -> Option<f64> {
        Some(self.accuracy(w, batch))
    }
}
