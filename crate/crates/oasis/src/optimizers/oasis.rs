//! The doubly adaptive diagonally preconditioned method and its variants.

use crate::error::{OasisError, Result};
use crate::estimator::{self, DiagonalPreconditioner};
use crate::linalg::{self, Rng};
use crate::problems::{sample_batch, Objective};

use super::{
    adaptive_lr, armijo_with_slope, check_finite, pass_fraction, BatchSpec, Hyper, Optimizer,
    StepInfo,
};

/// Step-size policy for [`OasisOptimizer`]. All policies share the same
/// Hutchinson-EMA preconditioner; they differ only in how far they move along
/// the preconditioned gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OasisMode {
    /// Self-tuning step size from local curvature, capped to grow by at most
    /// `sqrt(1 + γ·θ)` per iteration.
    Adaptive,
    /// Constant step size `eta0` (modulo scheduling).
    Fixed,
    /// Constant step size applied to an exponential average of gradients.
    /// The average is seeded with the first gradient itself, so the first
    /// step coincides with the fixed-step variant.
    Momentum,
    /// Backtracking Armijo search along the preconditioned descent direction
    /// `p = -D̂⁻¹g`. Full-batch only.
    LineSearch {
        /// First step size tried each iteration.
        eta_init: f64,
        /// Sufficient-decrease fraction, in (0,1).
        c1: f64,
        /// Backtracking shrink factor, in (0,1).
        tau: f64,
    },
}

impl OasisMode {
    /// Armijo search with conventional parameters: `η_init = 1`, `c1 = 1e-4`,
    /// `τ = 1/2`.
    pub fn line_search() -> Self {
        OasisMode::LineSearch {
            eta_init: 1.0,
            c1: 1e-4,
            tau: 0.5,
        }
    }
}

/// Diagonally preconditioned first-order method whose preconditioner is an
/// exponential moving average of Hutchinson estimates of the Hessian
/// diagonal, clamped below at `α`:
///
/// ```text
/// D_k  = β₂·D_{k-1} + (1-β₂)·(z_k ⊙ H(w_k) z_k),   z_k ~ Rademacher
/// D̂_k  = max(|D_k|, α)            (entrywise)
/// w_{k+1} = w_k - η_k · D̂_k⁻¹ ∇F(w_k)
/// ```
///
/// The very first step uses the warm-started `D̂₀` without drawing a probe;
/// every later step draws one probe before moving. The step size `η_k` comes
/// from the configured [`OasisMode`].
pub struct OasisOptimizer {
    mode: OasisMode,
    hyper: Hyper,
    w: Vec<f64>,
    w_prev: Option<Vec<f64>>,
    precond: DiagonalPreconditioner,
    /// Step size used by the most recent step (η₀ before any step).
    eta: f64,
    /// Ratio of the two most recent step sizes; `None` is the "no history
    /// yet" sentinel that lets the curvature term decide the first adaptive
    /// step outright.
    theta: Option<f64>,
    k: usize,
    passes: f64,
    /// Full-batch gradient at `w` from the previous step, kept so the
    /// deterministic adaptive variant reuses it instead of recomputing.
    g_prev_full: Option<Vec<f64>>,
    /// Gradient average for [`OasisMode::Momentum`].
    momentum: Option<Vec<f64>>,
}

impl OasisOptimizer {
    /// Build with the standard warm start: average `hyper.warmstart`
    /// Hutchinson probes at `w0` into `D₀` (full-batch, counted as that many
    /// passes). `warmstart = 0` selects the bias-corrected zero start
    /// instead, seeded with a single probe so the first step is still scaled
    /// by observed curvature rather than by the clamp floor.
    pub fn new(
        problem: &dyn Objective,
        w0: Vec<f64>,
        mode: OasisMode,
        hyper: Hyper,
        rng: &mut Rng,
    ) -> Result<Self> {
        validate_hyper(&hyper)?;
        let dim = problem.dim();
        if w0.len() != dim {
            return Err(OasisError::Dimension(format!(
                "initial point has {} coordinates but the problem has {}",
                w0.len(),
                dim
            )));
        }
        let (precond, warm_passes) = if hyper.warmstart > 0 {
            let m = hyper.warmstart;
            let d0 = estimator::warmstart(dim, m, rng, |z| problem.hvp(&w0, z, None));
            (
                DiagonalPreconditioner::from_initial(d0, hyper.alpha, hyper.beta2),
                m as f64,
            )
        } else {
            if hyper.beta2 >= 1.0 {
                return Err(OasisError::Config(
                    "the bias-corrected zero start (warmstart = 0) needs beta2 < 1".to_string(),
                ));
            }
            let mut p = DiagonalPreconditioner::zero_bias_corrected(dim, hyper.alpha, hyper.beta2);
            let v = estimator::draw_hutchinson(dim, rng, |z| problem.hvp(&w0, z, None));
            p.update(&v);
            (p, 1.0)
        };
        let mut me = Self::from_parts(w0, mode, hyper, precond)?;
        me.passes = warm_passes;
        Ok(me)
    }

    /// Build with an explicit initial diagonal `d0` and no warm-start probes.
    pub fn with_initial_diagonal(
        w0: Vec<f64>,
        mode: OasisMode,
        hyper: Hyper,
        d0: Vec<f64>,
    ) -> Result<Self> {
        validate_hyper(&hyper)?;
        if d0.len() != w0.len() {
            return Err(OasisError::Dimension(format!(
                "initial diagonal has {} entries but the point has {}",
                d0.len(),
                w0.len()
            )));
        }
        if !linalg::all_finite(&d0) {
            return Err(OasisError::Config(
                "initial diagonal has a non-finite entry".to_string(),
            ));
        }
        let precond = DiagonalPreconditioner::from_initial(d0, hyper.alpha, hyper.beta2);
        Self::from_parts(w0, mode, hyper, precond)
    }

    fn from_parts(
        w0: Vec<f64>,
        mode: OasisMode,
        hyper: Hyper,
        precond: DiagonalPreconditioner,
    ) -> Result<Self> {
        if !linalg::all_finite(&w0) {
            return Err(OasisError::Config(
                "initial point has a non-finite coordinate".to_string(),
            ));
        }
        let eta = match mode {
            OasisMode::LineSearch { eta_init, .. } => eta_init,
            _ => hyper.eta0,
        };
        Ok(OasisOptimizer {
            mode,
            hyper,
            w: w0,
            w_prev: None,
            precond,
            eta,
            theta: None,
            k: 0,
            passes: 0.0,
            g_prev_full: None,
            momentum: None,
        })
    }

    /// The preconditioner state (diagonal, clamp floor, probe statistics).
    pub fn preconditioner(&self) -> &DiagonalPreconditioner {
        &self.precond
    }

    /// The configured step-size policy.
    pub fn mode(&self) -> OasisMode {
        self.mode
    }

    /// Move to `w - η·D̂⁻¹·direction`, committing `w_prev` and `k`.
    fn apply_step(&mut self, eta: f64, direction: &[f64]) -> Result<()> {
        let d_hat = self.precond.d_hat();
        let mut w_next = self.w.clone();
        for i in 0..w_next.len() {
            w_next[i] -= eta * direction[i] / d_hat[i];
        }
        check_finite(&w_next, self.k, eta)?;
        self.w_prev = Some(std::mem::replace(&mut self.w, w_next));
        self.k += 1;
        self.eta = eta;
        Ok(())
    }
}

impl Optimizer for OasisOptimizer {
    fn w(&self) -> &[f64] {
        &self.w
    }

    fn w_prev(&self) -> Option<&[f64]> {
        self.w_prev.as_deref()
    }

    fn d_hat(&self) -> Option<&[f64]> {
        Some(self.precond.d_hat())
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
        // For the adaptive policy this rescales the previous step size, so
        // the growth cap for the next iteration shrinks by the same factor;
        // the stored ratio θ is left alone.
        self.eta *= rho;
    }

    fn dhat_max_seen(&self) -> Option<f64> {
        Some(self.precond.dhat_max_seen())
    }

    fn probe_linf_max(&self) -> Option<f64> {
        Some(self.precond.probe_linf_max())
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
        let dim = self.w.len();

        // Randomness is consumed in a fixed order — gradient batch, then
        // probe batch (if drawn separately), then the Rademacher vector — so
        // runs with the same seed reproduce bitwise.
        let idx_g: Option<Vec<usize>> = match batch.size {
            None => None,
            Some(b) => Some(sample_batch(n, b, rng)?),
        };
        let stochastic = idx_g.is_some();

        // Curvature probe: every iteration after the first.
        let mut drift = None;
        if self.k >= 1 {
            let idx_p: Option<Vec<usize>> = if batch.distinct_probe_batch {
                match batch.size {
                    None => None,
                    Some(b) => Some(sample_batch(n, b, rng)?),
                }
            } else {
                idx_g.clone()
            };
            let v =
                estimator::draw_hutchinson(dim, rng, |z| problem.hvp(&self.w, z, idx_p.as_deref()));
            self.precond.update(&v);
            drift = Some(self.precond.last_drift());
            self.passes += pass_fraction(problem, idx_p.as_deref());
        }

        let g = problem.gradient(&self.w, idx_g.as_deref());
        self.passes += pass_fraction(problem, idx_g.as_deref());

        let mut f_evals = 0;
        let eta_prev = self.eta;
        match self.mode {
            OasisMode::Adaptive => {
                let eta = if self.k == 0 {
                    self.eta
                } else {
                    // The comparison gradient is taken at the previous
                    // iterate *on this step's batch*, so numerator and
                    // denominator see the same sample of the objective.
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
                        self.precond.d_hat(),
                        self.hyper.gamma,
                        self.hyper.optimistic,
                    ) {
                        Ok(e) => e,
                        // No finite candidate means no usable local
                        // information; coasting on the previous step size is
                        // the conservative choice (θ becomes exactly 1).
                        Err(OasisError::NoFiniteStepSize) => self.eta,
                        Err(e) => return Err(e),
                    }
                };
                if self.k >= 1 {
                    self.theta = Some(eta / eta_prev);
                }
                self.apply_step(eta, &g)?;
                if !stochastic {
                    self.g_prev_full = Some(g);
                } else {
                    self.g_prev_full = None;
                }
            }
            OasisMode::Fixed => {
                self.apply_step(self.eta, &g)?;
            }
            OasisMode::Momentum => {
                match &mut self.momentum {
                    None => self.momentum = Some(g.clone()),
                    Some(m) => {
                        let b1 = self.hyper.beta1;
                        for (mi, gi) in m.iter_mut().zip(&g) {
                            *mi = b1 * *mi + (1.0 - b1) * gi;
                        }
                    }
                }
                let m = self.momentum.take().unwrap();
                let res = self.apply_step(self.eta, &m);
                self.momentum = Some(m);
                res?;
            }
            OasisMode::LineSearch { eta_init, c1, tau } => {
                if stochastic {
                    return Err(OasisError::Config(
                        "line-search mode requires full-batch (deterministic) runs".to_string(),
                    ));
                }
                let d_hat = self.precond.d_hat();
                let p: Vec<f64> = g.iter().zip(d_hat).map(|(gi, di)| -gi / di).collect();
                let slope = linalg::dot(&g, &p);
                let res = armijo_with_slope(problem, &self.w, &p, slope, eta_init, c1, tau)?;
                // Every trial evaluation is a full pass over the data.
                self.passes += res.f_evals as f64;
                f_evals = res.f_evals;
                self.apply_step(res.eta, &g)?;
            }
        }

        Ok(StepInfo {
            eta: self.eta,
            theta: match self.mode {
                OasisMode::Adaptive => self.theta,
                _ => None,
            },
            dhat_min: self.precond.min_entry(),
            dhat_max: self.precond.max_entry(),
            drift,
            f_evals,
        })
    }
}

/// Reject hyper-parameters outside their domains with a configuration error
/// (the preconditioner constructors assert, which is the wrong failure mode
/// for user-supplied values).
fn validate_hyper(hyper: &Hyper) -> Result<()> {
    if !(hyper.eta0 > 0.0 && hyper.eta0.is_finite()) {
        return Err(OasisError::Config(format!(
            "eta0 must be positive and finite, got {}",
            hyper.eta0
        )));
    }
    if !(hyper.alpha > 0.0 && hyper.alpha.is_finite()) {
        return Err(OasisError::Config(format!(
            "alpha must be positive and finite, got {}",
            hyper.alpha
        )));
    }
    if !(0.0..1.0).contains(&hyper.beta1) {
        return Err(OasisError::Config(format!(
            "beta1 must lie in [0,1), got {}",
            hyper.beta1
        )));
    }
    if !(0.0..=1.0).contains(&hyper.beta2) {
        return Err(OasisError::Config(format!(
            "beta2 must lie in [0,1], got {}",
            hyper.beta2
        )));
    }
    if !(hyper.gamma >= 0.0 && hyper.gamma.is_finite()) {
        return Err(OasisError::Config(format!(
            "gamma must be nonnegative and finite, got {}",
            hyper.gamma
        )));
    }
    Ok(())
}
