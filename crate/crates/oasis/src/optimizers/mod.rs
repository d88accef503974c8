//! Optimization methods.
//!
//! Two families share one driving interface:
//!
//! * the doubly adaptive methods ([`OasisOptimizer`], [`AdgdOptimizer`]) —
//!   diagonal Hutchinson preconditioning (or the identity) combined with a
//!   self-tuning step size, plus fixed-step, momentum, and backtracking
//!   line-search variants;
//! * the classical baselines ([`BaselineOptimizer`]) — SGD, AdaGrad, RMSProp,
//!   Adam, AdamW, AdaHessian.
//!
//! A method is advanced by calling [`Optimizer::step`] with an objective, the
//! run's RNG, and a batch policy; everything the experiment harness logs
//! (step size, preconditioner extremes, EMA drift, pass count) is exposed
//! through [`StepInfo`] and the trait accessors.

mod adgd;
mod baselines;
mod oasis;

pub use adgd::AdgdOptimizer;
pub use baselines::{BaselineKind, BaselineOptimizer};
pub use oasis::{OasisMode, OasisOptimizer};

use crate::error::{OasisError, Result};
use crate::linalg::{self, Rng};
use crate::problems::Objective;

/// Hyper-parameters shared across methods. Each method reads the subset it
/// understands and ignores the rest.
#[derive(Debug, Clone)]
pub struct Hyper {
    /// Initial step size (adaptive methods) or the fixed step size.
    pub eta0: f64,
    /// Clamp floor for the preconditioner diagonal.
    pub alpha: f64,
    /// First-moment (momentum) decay.
    pub beta1: f64,
    /// Second-moment / curvature-EMA decay.
    pub beta2: f64,
    /// Growth-cap coefficient: the adaptive step may grow by at most
    /// `sqrt(1 + gamma·θ)` per iteration (`gamma = 1` is the canonical rule).
    pub gamma: f64,
    /// Use the optimistic curvature candidate (denominator `1·‖Δg‖*` instead
    /// of `2·‖Δg‖*`).
    pub optimistic: bool,
    /// Denominator offset for the baseline preconditioners.
    pub epsilon: f64,
    /// Decoupled weight decay (AdamW only).
    pub weight_decay: f64,
    /// Number of Hutchinson probes averaged at the start to seed the
    /// preconditioner; `0` selects the bias-corrected zero start (which seeds
    /// itself with a single probe instead).
    pub warmstart: usize,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            eta0: 1e-4,
            alpha: 1e-5,
            beta1: 0.9,
            beta2: 0.99,
            gamma: 1.0,
            optimistic: false,
            epsilon: 1e-8,
            weight_decay: 1e-4,
            warmstart: 10,
        }
    }
}

/// Mini-batch policy for one run.
#[derive(Debug, Clone, Copy)]
pub struct BatchSpec {
    /// `None` = deterministic full-batch mode.
    pub size: Option<usize>,
    /// Draw the Hessian-probe batch independently of the gradient batch
    /// (default is to reuse the same indices, which is cheaper but makes the
    /// probe and gradient noise correlated).
    pub distinct_probe_batch: bool,
}

impl BatchSpec {
    /// Deterministic full-batch policy.
    pub fn full() -> Self {
        BatchSpec {
            size: None,
            distinct_probe_batch: false,
        }
    }

    /// Mini-batches of `b` samples, probe batch reused from the gradient batch.
    pub fn minibatch(b: usize) -> Self {
        BatchSpec {
            size: Some(b),
            distinct_probe_batch: false,
        }
    }
}

/// Per-iteration diagnostics returned by [`Optimizer::step`].
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    /// Step size actually used.
    pub eta: f64,
    /// Step-size ratio `η_k/η_{k-1}` after this step. Only the self-tuning
    /// methods produce one (`None` until their second step, and always `None`
    /// for fixed-step and line-search methods).
    pub theta: Option<f64>,
    /// Smallest / largest preconditioner entry used this step (1 for methods
    /// that don't precondition).
    pub dhat_min: f64,
    pub dhat_max: f64,
    /// `‖D_k - D_{k-1}‖∞` of the raw curvature EMA, when one was updated.
    pub drift: Option<f64>,
    /// Objective evaluations spent by line search this step.
    pub f_evals: usize,
}

/// A method the experiment harness can drive.
pub trait Optimizer {
    /// Current iterate.
    fn w(&self) -> &[f64];

    /// Previous iterate, once a step has been taken.
    fn w_prev(&self) -> Option<&[f64]>;

    /// The preconditioner diagonal used by the *most recent* step, for methods
    /// that have one.
    fn d_hat(&self) -> Option<&[f64]>;

    /// Completed steps.
    fn k(&self) -> usize;

    /// Effective data passes consumed so far (gradients + Hessian-vector
    /// products + line-search evaluations, each weighted by its batch
    /// fraction). Instrumentation performed by the harness is not included.
    fn passes(&self) -> f64;

    /// Step size used by the most recent step (the configured one before any).
    fn eta(&self) -> f64;

    /// Current step-size ratio — see [`StepInfo::theta`].
    fn theta(&self) -> Option<f64>;

    /// Multiply the (base) step size by `rho` — the scheduling hook. For
    /// adaptive methods this rescales the previous step size, which also
    /// rescales the growth cap for the next iteration.
    fn scale_eta(&mut self, rho: f64);

    /// Largest preconditioner entry observed over the whole run, when the
    /// method preconditions.
    fn dhat_max_seen(&self) -> Option<f64>;

    /// Largest curvature-probe magnitude `‖v‖∞` observed, when probing.
    fn probe_linf_max(&self) -> Option<f64>;

    /// Advance one iteration. Returns diagnostics, or an
    /// [`OasisError::Aborted`] if the iterate left the finite range.
    fn step(
        &mut self,
        problem: &dyn Objective,
        rng: &mut Rng,
        batch: &BatchSpec,
    ) -> Result<StepInfo>;
}

/// The self-tuning step size shared by the adaptive methods:
///
/// ```text
/// η_k = min{ sqrt(1 + γ·θ_{k-1}) · η_{k-1},   ‖Δw‖_D̂ / (c·‖Δg‖*_D̂) }
/// ```
///
/// with `θ_{k-1} = η_{k-1}/η_{k-2}` (`None` encodes the `+∞` sentinel before
/// any ratio exists, making the curvature term decide the first adaptive
/// step), `c = 2` normally and `c = 1` for the optimistic variant. A zero
/// `‖Δg‖*` makes the curvature term `+∞` (the growth cap decides); if both
/// terms are infinite there is no information at all and the caller should
/// keep its previous step size — that case is reported as
/// [`OasisError::NoFiniteStepSize`].
pub fn adaptive_lr(
    eta_prev: f64,
    theta_prev: Option<f64>,
    dw: &[f64],
    dg: &[f64],
    d_hat: &[f64],
    gamma: f64,
    optimistic: bool,
) -> Result<f64> {
    let growth = theta_prev.map(|th| (1.0 + gamma * th).sqrt() * eta_prev);
    let num = linalg::weighted_norm(dw, d_hat);
    let den = linalg::weighted_dual_norm(dg, d_hat);
    let c = if optimistic { 1.0 } else { 2.0 };
    let curvature = if den > 0.0 {
        Some(num / (c * den))
    } else {
        None
    };
    match (growth, curvature) {
        (Some(a), Some(b)) => Ok(a.min(b)),
        (Some(a), None) => Ok(a),
        (None, Some(b)) => Ok(b),
        (None, None) => Err(OasisError::NoFiniteStepSize),
    }
}

/// Cap on backtracking halvings in [`armijo_linesearch`].
pub const ARMIJO_MAX_BACKTRACKS: usize = 60;

/// Result of a successful [`armijo_linesearch`].
#[derive(Debug, Clone, Copy)]
pub struct LineSearchResult {
    /// Accepted step size.
    pub eta: f64,
    /// Backtracking halvings performed (0 = the initial step was accepted).
    pub backtracks: usize,
    /// Objective evaluations consumed (including the base-point evaluation).
    pub f_evals: usize,
}

/// Backtracking Armijo line search along `p` from `w`:
/// accept the first `η ∈ {η_init·τ^j}` with
/// `F(w + ηp) ≤ F(w) + c1·η·∇F(w)ᵀp`.
///
/// Errors if `p` is not a descent direction (`∇F(w)ᵀp ≥ 0`) or if no step is
/// accepted within [`ARMIJO_MAX_BACKTRACKS`] halvings.
pub fn armijo_linesearch(
    problem: &dyn Objective,
    w: &[f64],
    p: &[f64],
    eta_init: f64,
    c1: f64,
    tau: f64,
) -> Result<LineSearchResult> {
    let g = problem.gradient(w, None);
    let slope = linalg::dot(&g, p);
    armijo_with_slope(problem, w, p, slope, eta_init, c1, tau)
}

/// [`armijo_linesearch`] with the directional derivative `∇F(w)ᵀp` already in
/// hand, for callers that have computed the gradient anyway. `f_evals` counts
/// objective evaluations only.
pub(crate) fn armijo_with_slope(
    problem: &dyn Objective,
    w: &[f64],
    p: &[f64],
    slope: f64,
    eta_init: f64,
    c1: f64,
    tau: f64,
) -> Result<LineSearchResult> {
    if !(eta_init > 0.0 && eta_init.is_finite()) {
        return Err(OasisError::Config(format!(
            "line-search initial step must be positive, got {eta_init}"
        )));
    }
    if !(0.0 < c1 && c1 < 1.0) {
        return Err(OasisError::Config(format!(
            "line-search c1 must lie in (0,1), got {c1}"
        )));
    }
    if !(0.0 < tau && tau < 1.0) {
        return Err(OasisError::Config(format!(
            "line-search backtracking factor must lie in (0,1), got {tau}"
        )));
    }
    if slope >= 0.0 {
        return Err(OasisError::LineSearch(format!(
            "not a descent direction (slope = {slope:e})"
        )));
    }
    let f0 = problem.value(w, None);
    let mut f_evals = 1; // the base point
    let mut eta = eta_init;
    let mut trial = w.to_vec();
    // f_evals tracks objective evaluations, not iterations; the two only
    // coincide because this loop does exactly one evaluation per trial.
    #[allow(clippy::explicit_counter_loop)]
    for backtracks in 0..=ARMIJO_MAX_BACKTRACKS {
        trial.copy_from_slice(w);
        linalg::axpy(eta, p, &mut trial);
        let f_trial = problem.value(&trial, None);
        f_evals += 1;
        if f_trial <= f0 + c1 * eta * slope {
            return Ok(LineSearchResult {
                eta,
                backtracks,
                f_evals,
            });
        }
        eta *= tau;
    }
    Err(OasisError::LineSearch(format!(
        "no acceptable step within {ARMIJO_MAX_BACKTRACKS} halvings (reached η = {eta:e})"
    )))
}

/// Shared post-step sanity check: error out (with context) if the new iterate
/// picked up a non-finite coordinate.
pub(crate) fn check_finite(w: &[f64], k: usize, eta: f64) -> Result<()> {
    if linalg::all_finite(w) {
        Ok(())
    } else {
        Err(OasisError::Aborted {
            iteration: k,
            message: format!("iterate has a non-finite coordinate (η = {eta:e})"),
        })
    }
}

/// Deterministic-mode gradient cost in effective passes: the batch fraction.
pub(crate) fn pass_fraction(problem: &dyn Objective, batch: Option<&[usize]>) -> f64 {
    match batch {
        None => 1.0,
        Some(idx) => idx.len() as f64 / problem.n_samples() as f64,
    }
}
