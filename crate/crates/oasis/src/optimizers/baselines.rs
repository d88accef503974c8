//! Classical first-order baselines: SGD with momentum, AdaGrad, RMSProp,
//! Adam, AdamW, and the Hutchinson-probe variant AdaHessian.

use crate::error::{OasisError, Result};
use crate::estimator::{self, SecondMomentKind, SecondMomentState};
use crate::linalg::{self, Rng};
use crate::problems::{sample_batch, Objective};

use super::{check_finite, pass_fraction, BatchSpec, Hyper, Optimizer, StepInfo};

/// Which baseline update rule to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    /// `m = β₁m + (1-β₁)g`, `w -= η·m` (no bias correction; β₁ = 0 is plain
    /// gradient descent).
    Sgd,
    /// `w -= η·g / (sqrt(Σ g⊙g) + ε)`.
    AdaGrad,
    /// `w -= η·g / (sqrt(EMA[g⊙g]) + ε)`.
    RmsProp,
    /// Bias-corrected first and second moments:
    /// `w -= η·m̂ / (sqrt(v̂) + ε)`.
    Adam,
    /// Adam plus decoupled weight decay `w -= η·λ_wd·w` applied before the
    /// Adam step.
    AdamW,
    /// Adam whose second moment is built from squared Hutchinson probes of
    /// the Hessian diagonal instead of squared gradients.
    AdaHessian,
}

impl BaselineKind {
    /// All kinds, in presentation order.
    pub const ALL: [BaselineKind; 6] = [
        BaselineKind::Sgd,
        BaselineKind::AdaGrad,
        BaselineKind::RmsProp,
        BaselineKind::Adam,
        BaselineKind::AdamW,
        BaselineKind::AdaHessian,
    ];

    /// Lower-case name used in configuration and output files.
    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Sgd => "sgd",
            BaselineKind::AdaGrad => "adagrad",
            BaselineKind::RmsProp => "rmsprop",
            BaselineKind::Adam => "adam",
            BaselineKind::AdamW => "adamw",
            BaselineKind::AdaHessian => "adahessian",
        }
    }

    fn second_moment(self) -> Option<SecondMomentKind> {
        match self {
            BaselineKind::Sgd => None,
            BaselineKind::AdaGrad => Some(SecondMomentKind::AdaGrad),
            BaselineKind::RmsProp => Some(SecondMomentKind::RmsProp),
            BaselineKind::Adam | BaselineKind::AdamW => Some(SecondMomentKind::Adam),
            BaselineKind::AdaHessian => Some(SecondMomentKind::AdaHessian),
        }
    }

    fn uses_first_moment(self) -> bool {
        matches!(
            self,
            BaselineKind::Sgd | BaselineKind::Adam | BaselineKind::AdamW | BaselineKind::AdaHessian
        )
    }

    fn needs_beta2(self) -> bool {
        matches!(
            self,
            BaselineKind::RmsProp
                | BaselineKind::Adam
                | BaselineKind::AdamW
                | BaselineKind::AdaHessian
        )
    }
}

/// One of the classical methods in [`BaselineKind`], driven through the same
/// [`Optimizer`] interface as the preconditioned methods.
pub struct BaselineOptimizer {
    kind: BaselineKind,
    beta1: f64,
    epsilon: f64,
    weight_decay: f64,
    w: Vec<f64>,
    w_prev: Option<Vec<f64>>,
    eta: f64,
    /// First moment (EMA of gradients), zero-initialized.
    m: Vec<f64>,
    second: Option<SecondMomentState>,
    k: usize,
    passes: f64,
}

impl BaselineOptimizer {
    /// Build from `hyper`, of which `eta0`, `beta1`, `beta2`, `epsilon`, and
    /// (for AdamW) `weight_decay` are meaningful here.
    pub fn new(kind: BaselineKind, w0: Vec<f64>, hyper: &Hyper) -> Result<Self> {
        if !(hyper.eta0 > 0.0 && hyper.eta0.is_finite()) {
            return Err(OasisError::Config(format!(
                "eta0 must be positive and finite, got {}",
                hyper.eta0
            )));
        }
        if !(0.0..1.0).contains(&hyper.beta1) {
            return Err(OasisError::Config(format!(
                "beta1 must lie in [0,1), got {}",
                hyper.beta1
            )));
        }
        if kind.needs_beta2() && !(0.0..1.0).contains(&hyper.beta2) {
            return Err(OasisError::Config(format!(
                "{} needs beta2 in [0,1), got {}",
                kind.name(),
                hyper.beta2
            )));
        }
        if !(hyper.epsilon > 0.0 && hyper.epsilon.is_finite()) {
            return Err(OasisError::Config(format!(
                "epsilon must be positive and finite, got {}",
                hyper.epsilon
            )));
        }
        if !(hyper.weight_decay >= 0.0 && hyper.weight_decay.is_finite()) {
            return Err(OasisError::Config(format!(
                "weight_decay must be nonnegative and finite, got {}",
                hyper.weight_decay
            )));
        }
        if !linalg::all_finite(&w0) {
            return Err(OasisError::Config(
                "initial point has a non-finite coordinate".to_string(),
            ));
        }
        let dim = w0.len();
        Ok(BaselineOptimizer {
            kind,
            beta1: hyper.beta1,
            epsilon: hyper.epsilon,
            weight_decay: hyper.weight_decay,
            w: w0,
            w_prev: None,
            eta: hyper.eta0,
            m: vec![0.0; dim],
            second: kind
                .second_moment()
                .map(|smk| SecondMomentState::new(smk, dim, hyper.beta2)),
            k: 0,
            passes: 0.0,
        })
    }

    /// Which rule this instance runs.
    pub fn kind(&self) -> BaselineKind {
        self.kind
    }
}

impl Optimizer for BaselineOptimizer {
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
        None
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
        let dim = self.w.len();
        let idx_g: Option<Vec<usize>> = match batch.size {
            None => None,
            Some(b) => Some(sample_batch(n, b, rng)?),
        };

        let g = problem.gradient(&self.w, idx_g.as_deref());
        self.passes += pass_fraction(problem, idx_g.as_deref());

        // AdaHessian draws its curvature probe every iteration (its second
        // moment starts at zero and is bias-corrected, so no warm start is
        // needed or taken).
        let probe: Option<Vec<f64>> = if self.kind == BaselineKind::AdaHessian {
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
            self.passes += pass_fraction(problem, idx_p.as_deref());
            Some(v)
        } else {
            None
        };

        let t = self.k + 1; // 1-based update count for bias correction

        // Decoupled weight decay shrinks the iterate before the main update.
        let mut w_next = self.w.clone();
        if self.kind == BaselineKind::AdamW && self.weight_decay > 0.0 {
            for wi in w_next.iter_mut() {
                *wi -= self.eta * self.weight_decay * *wi;
            }
        }

        // First moment.
        let numerator: Vec<f64> = if self.kind.uses_first_moment() {
            let b1 = self.beta1;
            for (mi, gi) in self.m.iter_mut().zip(&g) {
                *mi = b1 * *mi + (1.0 - b1) * gi;
            }
            match self.kind {
                BaselineKind::Sgd => self.m.clone(),
                _ => {
                    let corr = 1.0 - self.beta1.powi(t as i32);
                    self.m.iter().map(|mi| mi / corr).collect()
                }
            }
        } else {
            g.clone()
        };

        // Second moment and the actual move.
        let (dhat_min, dhat_max);
        match &mut self.second {
            None => {
                for (wi, ni) in w_next.iter_mut().zip(&numerator) {
                    *wi -= self.eta * ni;
                }
                dhat_min = 1.0;
                dhat_max = 1.0;
            }
            Some(state) => {
                let input = probe.as_deref().unwrap_or(&g);
                let d = state.update(input);
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for ((wi, ni), di) in w_next.iter_mut().zip(&numerator).zip(&d) {
                    let denom = di + self.epsilon;
                    lo = lo.min(denom);
                    hi = hi.max(denom);
                    *wi -= self.eta * ni / denom;
                }
                dhat_min = lo;
                dhat_max = hi;
            }
        }

        check_finite(&w_next, self.k, self.eta)?;
        self.w_prev = Some(std::mem::replace(&mut self.w, w_next));
        self.k += 1;

        Ok(StepInfo {
            eta: self.eta,
            theta: None,
            dhat_min,
            dhat_max,
            drift: None,
            f_evals: 0,
        })
    }
}
