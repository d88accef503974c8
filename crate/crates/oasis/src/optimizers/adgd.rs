//! Adaptive gradient descent without preconditioning.

use crate::error::{OasisError, Result};
use crate::linalg::{self, Rng};
use crate::problems::{sample_batch, Objective};

use super::{adaptive_lr, check_finite, pass_fraction, BatchSpec, Hyper, Optimizer, StepInfo};

/// Plain gradient descent with the self-tuning step size
///
/// ```text
/// η_k = min{ sqrt(1 + γ·θ_{k-1})·η_{k-1},  ‖Δw‖ / (c·‖Δg‖) }
/// ```
///
/// i.e. the adaptive rule in the Euclidean metric, with no curvature probes
/// and no diagonal scaling. It is exactly the preconditioned adaptive method
/// restricted to `D̂ = I`, and is implemented through the same weighted-norm
/// and step-size code with a unit diagonal so the two produce bitwise
/// identical trajectories when the preconditioned method is pinned to the
/// identity (`β₂ = 1`, `α = 1`, `D₀ = 1`).
pub struct AdgdOptimizer {
    w: Vec<f64>,
    w_prev: Option<Vec<f64>>,
    /// Unit diagonal fed to the shared weighted-norm routines.
    ones: Vec<f64>,
    eta: f64,
    theta: Option<f64>,
    gamma: f64,
    optimistic: bool,
    k: usize,
    passes: f64,
    /// Cached full-batch gradient at `w` (deterministic runs only).
    g_prev_full: Option<Vec<f64>>,
}

impl AdgdOptimizer {
    /// Build from `hyper`, of which only `eta0`, `gamma`, and `optimistic`
    /// are meaningful here.
    pub fn new(w0: Vec<f64>, hyper: &Hyper) -> Result<Self> {
        if !(hyper.eta0 > 0.0 && hyper.eta0.is_finite()) {
            return Err(OasisError::Config(format!(
                "eta0 must be positive and finite, got {}",
                hyper.eta0
            )));
        }
        if !(hyper.gamma >= 0.0 && hyper.gamma.is_finite()) {
            return Err(OasisError::Config(format!(
                "gamma must be nonnegative and finite, got {}",
                hyper.gamma
            )));
        }
        if !linalg::all_finite(&w0) {
            return Err(OasisError::Config(
                "initial point has a non-finite coordinate".to_string(),
            ));
        }
        let dim = w0.len();
        Ok(AdgdOptimizer {
            w: w0,
            w_prev: None,
            ones: vec![1.0; dim],
            eta: hyper.eta0,
            theta: None,
            gamma: hyper.gamma,
            optimistic: hyper.optimistic,
            k: 0,
            passes: 0.0,
            g_prev_full: None,
        })
    }
}

impl Optimizer for AdgdOptimizer {
    fn w(&self) -> &[f64] {
        &self.w
    }

    fn w_prev(&self) -> Option<&[f64]> {
        self.w_prev.as_deref()
    }

    fn d_hat(&self) -> Option<&[f64]> {
        None
    }

    fn k(&self) -> usize {
        self.k
    }

    fn passes(&self) -> f64 {
        self.passes
    }

    fn eta(&self) -> f64 {
        self.eta
    }

    fn theta(&self) -> Option<f64> {
        self.theta
    }

    fn scale_eta(&mut self, rho: f64) {
        self.eta *= rho;
    }

    fn dhat_max_seen(&self) -> Option<f64> {
        None
    }

    fn probe_linf_max(&self) -> Option<f64> {
        None
    }

    fn step(
        &mut self,
        problem: &dyn Objective,
        rng: &mut Rng,
        batch: &BatchSpec,
    ) -> Result<StepInfo> {
        if problem.dim() != self.w.len() {
            return Err(OasisError::Dimension(format!(
                "problem has {} coordinates but the iterate has {}",
                problem.dim(),
                self.w.len()
            )));
        }
        let n = problem.n_samples();
        let idx_g: Option<Vec<usize>> = match batch.size {
            None => None,
            Some(b) => Some(sample_batch(n, b, rng)?),
        };
        let stochastic = idx_g.is_some();

        let g = problem.gradient(&self.w, idx_g.as_deref());
        self.passes += pass_fraction(problem, idx_g.as_deref());

        let eta_prev = self.eta;
        let eta = if self.k == 0 {
            self.eta
        } else {
            let w_prev = self.w_prev.as_ref().unwrap();
            let g_at_prev: Vec<f64> = if stochastic {
                self.passes += pass_fraction(problem, idx_g.as_deref());
                problem.gradient(w_prev, idx_g.as_deref())
            } else {
                match self.g_prev_full.take() {
                    Some(cached) => cached,
                    None => {
                        self.passes += 1.0;
                        problem.gradient(w_prev, None)
                    }
                }
            };
            let dw = linalg::sub(&self.w, w_prev);
            let dg = linalg::sub(&g, &g_at_prev);
            match adaptive_lr(
                self.eta,
                self.theta,
                &dw,
                &dg,
                &self.ones,
                self.gamma,
                self.optimistic,
            ) {
                Ok(e) => e,
                Err(OasisError::NoFiniteStepSize) => self.eta,
                Err(e) => return Err(e),
            }
        };
        if self.k >= 1 {
            self.theta = Some(eta / eta_prev);
        }

        let mut w_next = self.w.clone();
        for i in 0..w_next.len() {
            w_next[i] -= eta * g[i] / self.ones[i];
        }
        check_finite(&w_next, self.k, eta)?;
        self.w_prev = Some(std::mem::replace(&mut self.w, w_next));
        self.k += 1;
        self.eta = eta;
        self.g_prev_full = if stochastic { None } else { Some(g) };

        Ok(StepInfo {
            eta,
            theta: self.theta,
            dhat_min: 1.0,
            dhat_max: 1.0,
            drift: None,
            f_evals: 0,
        })
    }
}
