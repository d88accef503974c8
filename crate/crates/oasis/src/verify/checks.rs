//! The individual verification checks: each one runs an instrumented
//! optimizer on a fixture and turns a provable inequality into an assertion
//! with pinned tolerances (1e-12 where arithmetic is exact, 1e-9 relative
//! where rounding accumulates).
//!
//! Conventions shared by the checks:
//!
//! * `Gamma_emp` is the largest preconditioner entry observed over the run —
//!   the tightest constant valid for that run. Where a bound needs the
//!   constant *before* the run (to pick a step size or a decay), a probing
//!   phase measures it first, the value is inflated by 5%, and the main run
//!   verifies post hoc that its own entries stayed below the inflated value.
//! * `Gamma_s` is the largest probe magnitude `‖z ⊙ H z‖∞` seen (the
//!   warm-start average included), which bounds successive changes of the
//!   raw EMA diagonal.
//! * Starting points are `0.01 ·` standard normal, drawn from the run seed
//!   exactly as the experiment harness draws them.

use super::{CheckEntry, CheckStatus};
use crate::error::{OasisError, Result};
use crate::harness::reference_solve;
use crate::linalg::{self, Rng};
use crate::optimizers::{AdgdOptimizer, BatchSpec, Hyper, OasisMode, OasisOptimizer, Optimizer};
use crate::problems::{Curvature, Objective};

/// Relative tolerance for inequality checks that accumulate rounding.
pub const REL_TOL: f64 = 1e-9;
/// Absolute tolerance for exact-arithmetic identities.
pub const EXACT_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Shared instrumentation
// ---------------------------------------------------------------------------

struct TraceStep {
    eta: f64,
    theta: Option<f64>,
    drift: Option<f64>,
    dhat_min: f64,
    w: Vec<f64>,
    f: f64,
    grad_norm_sq: f64,
    d_hat: Vec<f64>,
}

struct Trace {
    w0: Vec<f64>,
    f0: f64,
    grad_norm_sq0: f64,
    d_hat0: Vec<f64>,
    steps: Vec<TraceStep>,
    gamma_emp: f64,
    probe_linf: f64,
    aborted_at: Option<usize>,
}

/// Run a full-batch OASIS configuration for `n_steps`, recording everything
/// the checks look at. Divergence stops the recording instead of failing.
fn trace_run(
    problem: &dyn Objective,
    mode: OasisMode,
    hyper: Hyper,
    seed: u64,
    n_steps: usize,
) -> Result<Trace> {
    let mut rng = Rng::new(seed);
    let w0: Vec<f64> = (0..problem.dim())
        .map(|_| 0.01 * rng.standard_normal())
        .collect();
    let mut opt = OasisOptimizer::new(problem, w0.clone(), mode, hyper, &mut rng)?;
    let d_hat0 = opt.preconditioner().d_hat().to_vec();
    let f0 = problem.value(&w0, None);
    let g0 = problem.gradient(&w0, None);
    let batch = BatchSpec::full();

    let mut steps = Vec::with_capacity(n_steps);
    let mut aborted_at = None;
    for k in 0..n_steps {
        match opt.step(problem, &mut rng, &batch) {
            Ok(info) => {
                let w = opt.w().to_vec();
                let f = problem.value(&w, None);
                let g = problem.gradient(&w, None);
                steps.push(TraceStep {
                    eta: info.eta,
                    theta: info.theta,
                    drift: info.drift,
                    dhat_min: info.dhat_min,
                    w,
                    f,
                    grad_norm_sq: linalg::norm_sq(&g),
                    d_hat: opt.preconditioner().d_hat().to_vec(),
                });
            }
            Err(OasisError::Aborted { .. }) => {
                aborted_at = Some(k);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Trace {
        w0,
        f0,
        grad_norm_sq0: linalg::norm_sq(&g0),
        d_hat0,
        steps,
        gamma_emp: opt.preconditioner().dhat_max_seen(),
        probe_linf: opt.preconditioner().probe_linf_max(),
        aborted_at,
    })
}

/// Strong-convexity constants of a problem, when it has them.
fn mu_l(problem: &dyn Objective) -> Result<(Option<f64>, f64)> {
    Ok(match problem.curvature()? {
        Curvature::StronglyConvex { mu, l } => (Some(mu), l),
        Curvature::SmoothOnly { l } => (None, l),
    })
}

#[allow(clippy::too_many_arguments)]
fn entry(
    check: &'static str,
    fixture: &str,
    seed: u64,
    claim: impl Into<String>,
    observed: impl Into<String>,
    iterations: usize,
    margin: f64,
    status: CheckStatus,
) -> CheckEntry {
    CheckEntry {
        check,
        fixture: fixture.to_string(),
        seed,
        claim: claim.into(),
        observed: observed.into(),
        iterations,
        margin,
        status,
    }
}

fn status_of(margin: f64) -> CheckStatus {
    if margin >= 0.0 {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    }
}

// ---------------------------------------------------------------------------
// Preconditioner spectrum, probe magnitudes, and EMA drift
// ---------------------------------------------------------------------------

/// Every preconditioner entry stays at or above the clamp floor `alpha`; the
/// largest probe magnitude `Gamma_s` never exceeds `sqrt(d)·L`; and each
/// raw-EMA update moves the diagonal by at most `2(1-beta2)·Gamma_s` in the
/// max norm.
pub fn check_spectrum_and_drift(
    problem: &dyn Objective,
    fixture: &str,
    seed: u64,
) -> Result<CheckEntry> {
    let hyper = Hyper {
        eta0: 1e-3,
        alpha: 1e-3,
        beta2: 0.99,
        ..Hyper::default()
    };
    let alpha = hyper.alpha;
    let beta2 = hyper.beta2;
    let n_steps = 100;
    let trace = trace_run(problem, OasisMode::Adaptive, hyper, seed, n_steps)?;

    let (_, l) = mu_l(problem)?;
    let probe_cap = (problem.dim() as f64).sqrt() * l;
    let drift_bound = 2.0 * (1.0 - beta2) * trace.probe_linf + EXACT_TOL;

    let min_entry = trace
        .steps
        .iter()
        .map(|s| s.dhat_min)
        .fold(f64::INFINITY, f64::min);
    let worst_drift = trace
        .steps
        .iter()
        .filter_map(|s| s.drift)
        .fold(0.0_f64, f64::max);

    let m_floor = min_entry - (alpha - EXACT_TOL);
    let m_probe = probe_cap * (1.0 + REL_TOL) - trace.probe_linf;
    let m_drift = drift_bound - worst_drift;
    let margin = m_floor.min(m_probe).min(m_drift);

    Ok(entry(
        "spectrum-drift",
        fixture,
        seed,
        format!(
            "min(Dhat) >= alpha = {alpha:.1e} at every step; max probe magnitude Gamma_s <= \
             sqrt(d)*L; |D_k - D_(k-1)|_inf <= 2*(1-beta2)*Gamma_s = {drift_bound:.3e}"
        ),
        format!(
            "min entry {min_entry:.6e}; Gamma_s {:.6e} vs sqrt(d)*L {probe_cap:.6e}; worst \
             drift {worst_drift:.6e}",
            trace.probe_linf
        ),
        trace.steps.len(),
        margin,
        status_of(margin),
    ))
}

// ---------------------------------------------------------------------------
// Adaptive step-size bounds
// ---------------------------------------------------------------------------

/// On a strongly convex problem the self-tuned step size stays inside
/// `[alpha/(2L), Gamma_emp/(2*mu)]` from the second step on. Problems
/// without a strong-convexity constant are refused.
pub fn check_eta_bounds(problem: &dyn Objective, fixture: &str, seed: u64) -> Result<CheckEntry> {
    let (mu, l) = mu_l(problem)?;
    let Some(mu) = mu else {
        return Ok(entry(
            "eta-bounds",
            fixture,
            seed,
            "step-size bounds need a strong-convexity constant",
            "not strongly convex: no mu available, bounds undefined",
            0,
            f64::NAN,
            CheckStatus::Refused,
        ));
    };
    let hyper = Hyper {
        eta0: 1e-3,
        alpha: 1e-3,
        beta2: 0.99,
        ..Hyper::default()
    };
    let alpha = hyper.alpha;
    let n_steps = 120;
    let trace = trace_run(problem, OasisMode::Adaptive, hyper, seed, n_steps)?;

    let lower = alpha / (2.0 * l) - EXACT_TOL;
    let upper = trace.gamma_emp / (2.0 * mu) + EXACT_TOL;
    // The first step uses the configured eta0, not the adaptive rule; the
    // bounds apply from the first self-tuned step on. They also presuppose a
    // live curvature signal: once the iterate is bitwise frozen (possible in
    // floating point when the preconditioner solves the problem exactly),
    // gradient differences are exactly zero and the rule legitimately runs
    // on its growth branch alone, so inspection stops there.
    let first_frozen = (1..trace.steps.len()).find(|&i| trace.steps[i].w == trace.steps[i - 1].w);
    // The step that produced the first frozen pair still tuned itself from a
    // live difference, so it is included; everything after is not.
    let end = first_frozen.map_or(trace.steps.len(), |i| i + 1);
    let live = &trace.steps[1..end];
    let min_eta = live.iter().map(|s| s.eta).fold(f64::INFINITY, f64::min);
    let max_eta = live.iter().map(|s| s.eta).fold(f64::NEG_INFINITY, f64::max);
    let margin = (min_eta - lower).min(upper - max_eta);
    let frozen_note = match first_frozen {
        Some(i) => format!(
            "; iterate bitwise stationary from step {} on (no curvature signal)",
            i + 1
        ),
        None => String::new(),
    };

    Ok(entry(
        "eta-bounds",
        fixture,
        seed,
        format!(
            "while a curvature signal exists, self-tuned step sizes lie in \
             [alpha/(2L), Gamma_emp/(2*mu)] = [{lower:.6e}, {upper:.6e}]"
        ),
        format!(
            "eta range [{min_eta:.6e}, {max_eta:.6e}] over {} self-tuned steps; \
             Gamma_emp {:.6e}{frozen_note}",
            live.len(),
            trace.gamma_emp
        ),
        trace.steps.len(),
        margin,
        status_of(margin),
    ))
}

// ---------------------------------------------------------------------------
// Fixed-step linear rate (strongly convex)
// ---------------------------------------------------------------------------

struct FixedRateRun {
    gaps: Vec<f64>,
    gap0: f64,
    eta: f64,
    gamma_cap: f64,
    gamma_run: f64,
    aborted: bool,
}

/// Probe `Gamma_emp` with a conservatively small step, then rerun at the
/// theory step `eta = alpha^2 / (1.01·L·Gamma_cap)` (`eta_scale` multiplies
/// it, for the negative control) and return the optimality-gap series.
fn fixed_rate_run(
    problem: &dyn Objective,
    seed: u64,
    alpha: f64,
    eta_scale: f64,
    n_steps: usize,
) -> Result<FixedRateRun> {
    let (_, l) = mu_l(problem)?;
    let probe_eta = alpha * alpha / (l * (problem.dim() as f64).sqrt() * l);
    let phase1 = trace_run(
        problem,
        OasisMode::Fixed,
        Hyper {
            eta0: probe_eta,
            alpha,
            beta2: 0.99,
            ..Hyper::default()
        },
        seed,
        60,
    )?;
    let gamma_cap = 1.05 * phase1.gamma_emp;
    let eta = eta_scale * alpha * alpha / (1.01 * l * gamma_cap);

    let reference = reference_solve(problem)?;
    let phase2 = trace_run(
        problem,
        OasisMode::Fixed,
        Hyper {
            eta0: eta,
            alpha,
            beta2: 0.99,
            ..Hyper::default()
        },
        seed,
        n_steps,
    )?;
    Ok(FixedRateRun {
        gaps: phase2
            .steps
            .iter()
            .map(|s| s.f - reference.f_star)
            .collect(),
        gap0: phase2.f0 - reference.f_star,
        eta,
        gamma_cap,
        gamma_run: phase2.gamma_emp,
        aborted: phase2.aborted_at.is_some(),
    })
}

/// With a fixed step at the theory cap, the optimality gap contracts at
/// least geometrically: `gap_k <= (1 - eta*mu/Gamma)^k * gap_0`.
pub fn check_fixed_lr_rate(
    problem: &dyn Objective,
    fixture: &str,
    seed: u64,
) -> Result<CheckEntry> {
    let (mu, _) = mu_l(problem)?;
    let Some(mu) = mu else {
        return Ok(entry(
            "fixed-lr-rate",
            fixture,
            seed,
            "geometric-rate check needs a strong-convexity constant",
            "not strongly convex",
            0,
            f64::NAN,
            CheckStatus::Refused,
        ));
    };
    let run = fixed_rate_run(problem, seed, 1.0, 1.0, 100)?;
    if run.gamma_run > run.gamma_cap {
        return Ok(entry(
            "fixed-lr-rate",
            fixture,
            seed,
            "preconditioner entries must stay below the probed cap",
            format!(
                "Gamma of the rated run {:.6e} exceeded the probed cap {:.6e}",
                run.gamma_run, run.gamma_cap
            ),
            run.gaps.len(),
            run.gamma_cap - run.gamma_run,
            CheckStatus::Fail,
        ));
    }
    let rate = 1.0 - run.eta * mu / run.gamma_cap;
    let mut margin = f64::INFINITY;
    let mut bound = run.gap0;
    for gap in &run.gaps {
        bound *= rate;
        margin = margin.min(bound * (1.0 + REL_TOL) - gap);
    }
    Ok(entry(
        "fixed-lr-rate",
        fixture,
        seed,
        format!(
            "with eta = {:.6e} (theory cap for alpha = 1, Gamma = {:.4e}), gap_k <= \
             (1 - eta*mu/Gamma)^k * gap_0 with rate {rate:.10}",
            run.eta, run.gamma_cap
        ),
        format!(
            "gap_0 {:.6e}, final gap {:.6e}, worst slack {margin:.6e}",
            run.gap0,
            run.gaps.last().copied().unwrap_or(f64::NAN)
        ),
        run.gaps.len(),
        margin,
        status_of(margin),
    ))
}

/// Negative control: a step ten times past the theory cap must violate the
/// same inequality, proving the checker can detect violations. The entry
/// passes when a violation IS found.
pub fn check_fixed_lr_negative_control(
    problem: &dyn Objective,
    fixture: &str,
    seed: u64,
) -> Result<CheckEntry> {
    let (mu, _) = mu_l(problem)?;
    let mu = mu.expect("negative control runs on a strongly convex fixture");
    let run = fixed_rate_run(problem, seed, 10.0, 10.0, 100)?;
    let rate = 1.0 - run.eta * mu / run.gamma_cap;
    let mut bound = run.gap0;
    let mut first_violation = None;
    for (k, gap) in run.gaps.iter().enumerate() {
        bound *= rate;
        if *gap > bound * (1.0 + REL_TOL) {
            first_violation = Some((k + 1, *gap, bound));
            break;
        }
    }
    let (status, observed, margin) = match (first_violation, run.aborted) {
        (Some((k, gap, bound)), _) => (
            CheckStatus::Pass,
            format!("first violation at step {k}: gap {gap:.6e} vs bound {bound:.6e}"),
            gap - bound,
        ),
        (None, true) => (
            CheckStatus::Pass,
            "run diverged past the finite range (violation by abort)".to_string(),
            f64::INFINITY,
        ),
        (None, false) => (
            CheckStatus::Fail,
            "ten-fold step produced no detectable violation".to_string(),
            -1.0,
        ),
    };
    Ok(entry(
        "fixed-lr-negative-control",
        fixture,
        seed,
        format!(
            "a step of 10x the theory cap (eta = {:.6e}) must break the geometric bound, \
             and the checker must flag it",
            run.eta
        ),
        observed,
        run.gaps.len(),
        margin,
        status,
    ))
}

// ---------------------------------------------------------------------------
// Fixed-step averaged-gradient bound (nonconvex)
// ---------------------------------------------------------------------------

/// On the bounded-below nonconvex objective, the running average of squared
/// gradient norms obeys `(1/T) Σ_{k=1..T} |∇F(w_k)|² <= 2·Gamma·F(w_0)/(eta·T)`
/// for every `T` (the loss is nonnegative, so 0 lower-bounds it).
pub fn check_nonconvex_bound(
    problem: &dyn Objective,
    fixture: &str,
    seed: u64,
) -> Result<CheckEntry> {
    let alpha = 1.0;
    let (_, l) = mu_l(problem)?;
    let probe_eta = alpha * alpha / (l * (problem.dim() as f64).sqrt() * l);
    let phase1 = trace_run(
        problem,
        OasisMode::Fixed,
        Hyper {
            eta0: probe_eta,
            alpha,
            beta2: 0.99,
            ..Hyper::default()
        },
        seed,
        60,
    )?;
    let gamma_cap = 1.05 * phase1.gamma_emp;
    let eta = alpha * alpha / (1.01 * l * gamma_cap);
    let t_max = 200;
    let phase2 = trace_run(
        problem,
        OasisMode::Fixed,
        Hyper {
            eta0: eta,
            alpha,
            beta2: 0.99,
            ..Hyper::default()
        },
        seed,
        t_max,
    )?;
    if phase2.gamma_emp > gamma_cap {
        return Ok(entry(
            "nonconvex-bound",
            fixture,
            seed,
            "preconditioner entries must stay below the probed cap",
            format!(
                "Gamma of the rated run {:.6e} exceeded the probed cap {gamma_cap:.6e}",
                phase2.gamma_emp
            ),
            phase2.steps.len(),
            gamma_cap - phase2.gamma_emp,
            CheckStatus::Fail,
        ));
    }

    let mut margin = f64::INFINITY;
    let mut worst_t = 0;
    let mut acc = 0.0;
    for (i, step) in phase2.steps.iter().enumerate() {
        let t = (i + 1) as f64;
        acc += step.grad_norm_sq;
        let lhs = acc / t;
        let rhs = 2.0 * gamma_cap * phase2.f0 / (eta * t);
        let slack = rhs * (1.0 + REL_TOL) - lhs;
        if slack < margin {
            margin = slack;
            worst_t = i + 1;
        }
    }
    Ok(entry(
        "nonconvex-bound",
        fixture,
        seed,
        format!(
            "averaged squared gradient norms obey (1/T)*sum <= 2*Gamma*F(w_0)/(eta*T) for \
             every T <= {t_max}, with eta = {eta:.6e}, Gamma = {gamma_cap:.4e}, lower bound 0"
        ),
        format!(
            "tightest at T = {worst_t} with slack {margin:.6e}; F(w_0) = {:.6e}",
            phase2.f0
        ),
        phase2.steps.len(),
        margin,
        status_of(margin),
    ))
}

// ---------------------------------------------------------------------------
// Backtracking line-search rates
// ---------------------------------------------------------------------------

/// With backtracking from a unit step, the gap contracts by at least
/// `1 - 4*mu*alpha^2*c1*(1-c1)*tau / (Gamma_emp^2 * L)` per step.
pub fn check_linesearch_rate(
    problem: &dyn Objective,
    fixture: &str,
    seed: u64,
    alpha: f64,
) -> Result<CheckEntry> {
    let (mu, l) = mu_l(problem)?;
    let mu = mu.expect("line-search rate runs on strongly convex fixtures");
    let (c1, tau) = (0.25, 0.5);
    let mode = OasisMode::LineSearch {
        eta_init: 1.0,
        c1,
        tau,
    };
    let hyper = Hyper {
        alpha,
        beta2: 0.99,
        ..Hyper::default()
    };
    let n_steps = 100;
    let trace = trace_run(problem, mode, hyper, seed, n_steps)?;
    let reference = reference_solve(problem)?;
    let gamma = trace.gamma_emp;
    let rate = 1.0 - 4.0 * mu * alpha * alpha * c1 * (1.0 - c1) * tau / (gamma * gamma * l);

    let gap0 = trace.f0 - reference.f_star;
    let mut bound = gap0;
    let mut margin = f64::INFINITY;
    for step in &trace.steps {
        bound *= rate;
        margin = margin.min(bound * (1.0 + REL_TOL) - (step.f - reference.f_star));
    }
    Ok(entry(
        "linesearch-rate",
        fixture,
        seed,
        format!(
            "backtracking (c1 = {c1}, tau = {tau}, unit initial step) contracts the gap by \
             at least 1 - 4*mu*alpha^2*c1*(1-c1)*tau/(Gamma_emp^2*L) = {rate:.10} per step"
        ),
        format!(
            "gap_0 {gap0:.6e}, final gap {:.6e}, Gamma_emp {gamma:.6e}, worst slack {margin:.6e}",
            trace
                .steps
                .last()
                .map_or(f64::NAN, |s| s.f - reference.f_star)
        ),
        trace.steps.len(),
        margin,
        status_of(margin),
    ))
}

/// Nonconvex backtracking: for every `T`, the average of
/// `|∇F(w_k)|²` over `k = 0..T-1` is bounded by
/// `Gamma_emp^2*L*F(w_0) / (2*alpha^2*c1*(1-c1)*tau*T)`.
pub fn check_linesearch_nonconvex(
    problem: &dyn Objective,
    fixture: &str,
    seed: u64,
) -> Result<CheckEntry> {
    let (_, l) = mu_l(problem)?;
    let (alpha, c1, tau) = (1.0, 0.25, 0.5);
    let mode = OasisMode::LineSearch {
        eta_init: 1.0,
        c1,
        tau,
    };
    let hyper = Hyper {
        alpha,
        beta2: 0.99,
        ..Hyper::default()
    };
    let t_max = 200;
    let trace = trace_run(problem, mode, hyper, seed, t_max)?;
    let gamma = trace.gamma_emp;
    let denom = 2.0 * alpha * alpha * c1 * (1.0 - c1) * tau;

    // The sum runs over the starting point and the first T-1 iterates.
    let mut margin = f64::INFINITY;
    let mut worst_t = 0;
    let mut acc = 0.0;
    let mut prev_gsq = trace.grad_norm_sq0;
    for (i, step) in trace.steps.iter().enumerate() {
        let t = (i + 1) as f64;
        acc += prev_gsq;
        prev_gsq = step.grad_norm_sq;
        let lhs = acc / t;
        let rhs = gamma * gamma * l * trace.f0 / (denom * t);
        let slack = rhs * (1.0 + REL_TOL) - lhs;
        if slack < margin {
            margin = slack;
            worst_t = i + 1;
        }
    }
    Ok(entry(
        "linesearch-nonconvex-bound",
        fixture,
        seed,
        format!(
            "averaged squared gradients under backtracking obey (1/T)*sum_(k<T) <= \
             Gamma_emp^2*L*F(w_0)/({denom}*T) for every T <= {t_max}"
        ),
        format!("tightest at T = {worst_t} with slack {margin:.6e}; Gamma_emp {gamma:.6e}"),
        trace.steps.len(),
        margin,
        status_of(margin),
    ))
}

// ---------------------------------------------------------------------------
// Equivalence with unpreconditioned adaptive gradient descent
// ---------------------------------------------------------------------------

/// With `beta2 = 1`, `alpha = 1`, and an identity starting diagonal, the
/// preconditioned method IS plain adaptive gradient descent: trajectories
/// must agree to 1e-12 over 50 deterministic steps.
pub fn check_adgd_equivalence(
    problem: &dyn Objective,
    fixture: &str,
    seed: u64,
) -> Result<CheckEntry> {
    let n_steps = 50;
    let diff = adgd_trajectory_gap(problem, seed, 1.0, n_steps)?;
    let margin = EXACT_TOL - diff;
    Ok(entry(
        "adgd-equivalence",
        fixture,
        seed,
        "with beta2 = 1, alpha = 1, identity starting diagonal, iterates match plain \
         adaptive gradient descent to 1e-12 over 50 steps",
        format!("max |w_oasis - w_adgd| = {diff:.3e}"),
        n_steps,
        margin,
        status_of(margin),
    ))
}

/// Negative control: with `beta2 = 0.5` the diagonal actually adapts, so the
/// trajectories must separate past 1e-6 within 10 steps — proving the
/// equivalence check is sensitive.
pub fn check_adgd_negative_control(
    problem: &dyn Objective,
    fixture: &str,
    seed: u64,
) -> Result<CheckEntry> {
    let n_steps = 10;
    let diff = adgd_trajectory_gap(problem, seed, 0.5, n_steps)?;
    let margin = diff - 1e-6;
    Ok(entry(
        "adgd-negative-control",
        fixture,
        seed,
        "with beta2 = 0.5 the preconditioner adapts and the trajectories must separate \
         by more than 1e-6 within 10 steps",
        format!("max |w_oasis - w_adgd| = {diff:.3e}"),
        n_steps,
        margin,
        status_of(margin),
    ))
}

/// Largest coordinate difference between the two trajectories after
/// `n_steps` deterministic steps.
fn adgd_trajectory_gap(
    problem: &dyn Objective,
    seed: u64,
    beta2: f64,
    n_steps: usize,
) -> Result<f64> {
    let mut rng = Rng::new(seed);
    let w0: Vec<f64> = (0..problem.dim())
        .map(|_| 0.01 * rng.standard_normal())
        .collect();
    let hyper = Hyper {
        eta0: 1e-3,
        alpha: 1.0,
        beta2,
        gamma: 1.0,
        ..Hyper::default()
    };
    let ones = vec![1.0; problem.dim()];
    let mut oasis = OasisOptimizer::with_initial_diagonal(
        w0.clone(),
        OasisMode::Adaptive,
        hyper.clone(),
        ones,
    )?;
    let mut adgd = AdgdOptimizer::new(w0, &hyper)?;
    // Probe draws cannot influence deterministic trajectories, so the two
    // methods may consume their generators differently.
    let mut rng_a = Rng::new(seed ^ 0x5ca1ab1e);
    let mut rng_b = Rng::new(seed ^ 0x0ddba11);
    let batch = BatchSpec::full();
    let mut worst = 0.0_f64;
    for _ in 0..n_steps {
        oasis.step(problem, &mut rng_a, &batch)?;
        adgd.step(problem, &mut rng_b, &batch)?;
        let diff = oasis
            .w()
            .iter()
            .zip(adgd.w())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        worst = worst.max(diff);
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Contraction of the composite potential (adaptive, strongly convex)
// ---------------------------------------------------------------------------

fn beta2_threshold(alpha: f64, mu: f64, l: f64, gamma: f64) -> f64 {
    let a2 = alpha * alpha;
    let m2 = mu * mu;
    let g2 = gamma * gamma;
    let t1 = 1.0 - a2 * a2 * m2 * m2 / (4.0 * l * l * g2 * (a2 * m2 + l * g2));
    let t2 =
        1.0 - alpha.powi(3) * mu.powi(3) / (4.0 * l * gamma * (2.0 * a2 * m2 + l.powi(3) * g2));
    t1.max(t2)
}

/// When the EMA decay is close enough to 1 (threshold computed from
/// `alpha, mu, L, Gamma_emp`), the potential
/// `Psi = |w_k - w*|²_Dhat + ½|w_k - w_(k-1)|²_Dhat + 2*eta*(1+theta)*(F(w_(k-1)) - F*)`
/// contracts by at least `1 - alpha²/(2*Gamma²*kappa²)` per step.
pub fn check_psi_contraction(
    problem: &dyn Objective,
    fixture: &str,
    seed: u64,
) -> Result<CheckEntry> {
    let (mu, l) = mu_l(problem)?;
    let mu = mu.expect("contraction check runs on strongly convex fixtures");
    let alpha = 1.0;

    // Probe Gamma_emp first: the decay threshold needs it before the run.
    let phase1 = trace_run(
        problem,
        OasisMode::Adaptive,
        Hyper {
            eta0: 0.1,
            alpha,
            beta2: 0.999,
            ..Hyper::default()
        },
        seed,
        50,
    )?;
    let gamma_cap = 1.05 * phase1.gamma_emp;
    let threshold = beta2_threshold(alpha, mu, l, gamma_cap);
    let beta2 = 0.5 * (1.0 + threshold);

    let n_steps = 80;
    let trace = trace_run(
        problem,
        OasisMode::Adaptive,
        Hyper {
            eta0: 0.1,
            alpha,
            beta2,
            ..Hyper::default()
        },
        seed,
        n_steps,
    )?;
    let gamma = gamma_cap.max(trace.gamma_emp);
    let threshold_run = beta2_threshold(alpha, mu, l, gamma);
    if beta2 < threshold_run {
        return Ok(entry(
            "psi-contraction",
            fixture,
            seed,
            "contraction is conditional on the decay threshold",
            format!(
                "configured beta2 {beta2:.12} fell below the recomputed threshold \
                 {threshold_run:.12}; condition unmet"
            ),
            trace.steps.len(),
            f64::NAN,
            CheckStatus::Refused,
        ));
    }

    let reference = reference_solve(problem)?;
    let kappa = l / mu;
    let rate = 1.0 - alpha * alpha / (2.0 * gamma * gamma * kappa * kappa);

    // Psi after a step needs that step's eta, theta, diagonal, and the
    // previous iterate; theta exists from the second step on.
    let psi_at = |idx: usize| -> Option<f64> {
        let step = &trace.steps[idx];
        let theta = step.theta?;
        let w_prev = if idx == 0 {
            &trace.w0
        } else {
            &trace.steps[idx - 1].w
        };
        let f_prev = if idx == 0 {
            trace.f0
        } else {
            trace.steps[idx - 1].f
        };
        let to_star = linalg::sub(&step.w, &reference.w_star);
        let to_prev = linalg::sub(&step.w, w_prev);
        let a = linalg::weighted_norm(&to_star, &step.d_hat).powi(2);
        let b = linalg::weighted_norm(&to_prev, &step.d_hat).powi(2);
        Some(a + 0.5 * b + 2.0 * step.eta * (1.0 + theta) * (f_prev - reference.f_star))
    };

    let psis: Vec<Option<f64>> = (0..trace.steps.len()).map(psi_at).collect();
    let first_psi = psis.iter().flatten().next().copied().unwrap_or(f64::NAN);
    // Below this floor the potential is dominated by cancellation noise in
    // F - F*, so the ratio stops being meaningful.
    let floor = 1e-8 * first_psi;
    let mut margin = f64::INFINITY;
    let mut inspected = 0;
    for pair in psis.windows(2) {
        if let (Some(prev), Some(next)) = (pair[0], pair[1]) {
            if prev < floor {
                break;
            }
            inspected += 1;
            margin = margin.min(rate * prev * (1.0 + REL_TOL) - next);
        }
    }
    Ok(entry(
        "psi-contraction",
        fixture,
        seed,
        format!(
            "with beta2 = {beta2:.12} (above the threshold {threshold:.12}), the composite \
             potential contracts by at least rate {rate:.12} per step, checked until it \
             falls below 1e-8 of its first value"
        ),
        format!(
            "first potential {first_psi:.6e}, {inspected} ratios inspected, worst slack \
             {margin:.6e}, Gamma {gamma:.6e}"
        ),
        inspected,
        margin,
        status_of(margin),
    ))
}

// ---------------------------------------------------------------------------
// Descriptive sublinear-decay record (convex adaptive)
// ---------------------------------------------------------------------------

/// The averaged-iterate gap and the two computable constants of its O(1/k)
/// bound are recorded for inspection. Nothing is asserted: the bound's
/// remaining constant is a spectrum cap only bracketed empirically, so this
/// entry is descriptive by design.
pub fn check_convex_adaptive_descriptive(
    problem: &dyn Objective,
    fixture: &str,
    seed: u64,
) -> Result<CheckEntry> {
    let hyper = Hyper {
        eta0: 1e-3,
        alpha: 1e-5,
        beta2: 0.99,
        ..Hyper::default()
    };
    let alpha = hyper.alpha;
    let beta2 = hyper.beta2;
    let (_, l) = mu_l(problem)?;
    let k_max = 100;
    let trace = trace_run(problem, OasisMode::Adaptive, hyper, seed, k_max + 1)?;
    let reference = reference_solve(problem)?;

    // Averaged iterate over the first k_max steps.
    let dim = problem.dim();
    let mut w_bar = vec![0.0; dim];
    for step in trace.steps.iter().take(k_max) {
        for (acc, wi) in w_bar.iter_mut().zip(&step.w) {
            *acc += wi;
        }
    }
    for acc in w_bar.iter_mut() {
        *acc /= k_max as f64;
    }
    let lhs = problem.value(&w_bar, None) - reference.f_star;

    // First constant: distances of the first iterate under the starting
    // diagonal, plus the first self-tuned step's weighted gap term.
    let w1 = &trace.steps[0].w;
    let d0 = &trace.d_hat0;
    let to_star = linalg::sub(w1, &reference.w_star);
    let to_prev = linalg::sub(w1, &trace.w0);
    let (eta1, theta1) = trace
        .steps
        .get(1)
        .and_then(|s| s.theta.map(|t| (s.eta, t)))
        .unwrap_or((f64::NAN, f64::NAN));
    let c_const = 0.5
        * (2.0 * linalg::weighted_norm(&to_star, d0).powi(2)
            + linalg::weighted_norm(&to_prev, d0).powi(2))
        + 2.0 * eta1 * theta1 * (trace.f0 - reference.f_star);

    // Second constant: the weighted path sum accumulated over the run.
    let mut q_sum = 0.0;
    for i in 1..=k_max {
        let Some(theta) = trace.steps.get(i).and_then(|s| s.theta) else {
            continue;
        };
        let eta_theta = trace.steps[i].eta * theta;
        let w_i = &trace.steps[i - 1].w;
        let w_im1 = if i == 1 {
            &trace.w0
        } else {
            &trace.steps[i - 2].w
        };
        let move_sq = linalg::norm_sq(&linalg::sub(w_i, w_im1));
        let dist_sq = linalg::norm_sq(&linalg::sub(w_i, &reference.w_star));
        q_sum += (2.0 * eta_theta + alpha) / (2.0 * alpha) * move_sq
            + (l * l * eta_theta + alpha) / alpha * dist_sq;
    }
    let rhs = l * c_const / k_max as f64
        + 2.0 * l * (1.0 - beta2) * trace.gamma_emp * q_sum / k_max as f64;

    Ok(entry(
        "convex-adaptive-descriptive",
        fixture,
        seed,
        "recorded, not asserted: averaged-iterate gap against the computable parts of its \
         O(1/k) bound (path-sum constant uses the empirical spectrum cap)",
        format!(
            "averaged gap {lhs:.6e}; L*C/k = {:.6e}; path term {:.6e}; bound total {rhs:.6e}",
            l * c_const / k_max as f64,
            rhs - l * c_const / k_max as f64
        ),
        k_max,
        f64::NAN,
        CheckStatus::Pass,
    ))
}

// ---------------------------------------------------------------------------
// Stochastic plateau (qualitative neighborhood convergence)
// ---------------------------------------------------------------------------

/// Mini-batch runs with a fixed theory-capped step converge to a noise
/// plateau, not to the minimizer. Qualitative check: at an equal pass
/// budget, the mini-batch plateau stays within 10x of the full-batch gap.
pub fn check_stochastic_plateau(
    problem: &dyn Objective,
    fixture: &str,
    seed: u64,
) -> Result<CheckEntry> {
    let n = problem.n_samples();
    let batch_size = (n / 10).max(1);
    let alpha = 1.0;
    let (_, l) = mu_l(problem)?;

    // Probe the spectrum cap, then fix the shared step size.
    let probe_eta = alpha * alpha / (l * (problem.dim() as f64).sqrt() * l);
    let phase1 = trace_run(
        problem,
        OasisMode::Fixed,
        Hyper {
            eta0: probe_eta,
            alpha,
            beta2: 0.99,
            ..Hyper::default()
        },
        seed,
        40,
    )?;
    let gamma_cap = 1.05 * phase1.gamma_emp;
    // A fraction of the theory cap: small enough that the full-batch gap is
    // still resolvable at the pass budget (at the cap itself the run reaches
    // machine precision and the ratio becomes meaningless), large enough
    // that the mini-batch noise floor is a real effect.
    let eta = alpha * alpha / (16.0 * 1.01 * l * gamma_cap);
    let hyper = Hyper {
        eta0: eta,
        alpha,
        beta2: 0.99,
        ..Hyper::default()
    };
    let reference = reference_solve(problem)?;

    // Full-batch: 40 iterations at 2 passes each.
    let iterations = 40;
    let det = trace_run(problem, OasisMode::Fixed, hyper.clone(), seed, iterations)?;
    let det_gap = det.steps.last().map_or(f64::NAN, |s| s.f) - reference.f_star;

    // Mini-batch: epochs matched to the same pass budget (2 passes each:
    // steps_per_epoch × 2·b/n = 2 when b divides n).
    let mut rng = Rng::new(seed);
    let w0: Vec<f64> = (0..problem.dim())
        .map(|_| 0.01 * rng.standard_normal())
        .collect();
    let mut opt = OasisOptimizer::new(problem, w0, OasisMode::Fixed, hyper, &mut rng)?;
    let batch = BatchSpec::minibatch(batch_size);
    let steps_per_epoch = n.div_ceil(batch_size);
    let mut epoch_gaps = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        for _ in 0..steps_per_epoch {
            opt.step(problem, &mut rng, &batch)?;
        }
        epoch_gaps.push(problem.value(opt.w(), None) - reference.f_star);
    }
    let tail = &epoch_gaps[epoch_gaps.len() - epoch_gaps.len() / 4..];
    let plateau = tail.iter().copied().fold(f64::INFINITY, f64::min);

    let margin = 10.0 * det_gap - plateau;
    Ok(entry(
        "stochastic-plateau",
        fixture,
        seed,
        format!(
            "mini-batch (b = {batch_size}) fixed-step runs plateau within 10x of the \
             full-batch gap at an equal pass budget ({} epochs, eta = {eta:.6e}, \
             one sixteenth of the theory cap)",
            iterations
        ),
        format!(
            "full-batch gap {det_gap:.6e}; mini-batch plateau (min of last quarter) \
             {plateau:.6e}; ratio {:.3}",
            plateau / det_gap
        ),
        iterations,
        margin,
        status_of(margin),
    ))
}
