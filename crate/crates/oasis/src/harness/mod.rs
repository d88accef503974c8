//! Experiment harness: multi-seed optimizer runs with per-iteration
//! instrumentation, CSV logging with exact round-trip, SVG plots, a
//! high-precision reference solver, and the diagonal-estimator fidelity
//! experiment.
//!
//! A run is configured by [`ExperimentConfig`], executed by
//! [`run_experiment`] (seeds in parallel, capped by the `OASIS_THREADS`
//! environment variable), and produces one [`RunRecord`] per seed. What the
//! instrumentation evaluates (objective, gradient norm, accuracy, the
//! contraction functional) is never charged to the optimizer's pass count.

mod config;
mod csv;
mod fidelity;
mod reference;
mod svg;

pub use config::Manifest;
pub use csv::{
    read_runs_csv, read_runs_csv_file, records_equal, write_runs_csv, write_runs_csv_file,
    RUNS_CSV_HEADER,
};
pub use fidelity::{
    diag_fidelity_experiment, write_fidelity_csv, write_fidelity_csv_file, FidelityConfig,
    FidelityRow, FIDELITY_CSV_HEADER,
};
pub use reference::{reference_solve, ReferenceSolution, REFERENCE_GRAD_TOL, REFERENCE_MAX_OUTER};
pub use svg::{plot_svg, plot_svg_file, PlotMetric};

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::{OasisError, Result};
use crate::linalg::{self, Rng};
use crate::optimizers::{
    AdgdOptimizer, BaselineKind, BaselineOptimizer, BatchSpec, Hyper, OasisMode, OasisOptimizer,
    Optimizer, StepInfo,
};
use crate::problems::Objective;

/// Environment variable that caps the number of worker threads used to run
/// seeds in parallel.
pub const THREADS_ENV_VAR: &str = "OASIS_THREADS";

/// Which method an experiment runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MethodSpec {
    /// The preconditioned method in one of its step-size modes.
    Oasis(OasisMode),
    /// Adaptive gradient descent without preconditioning.
    Adgd,
    /// One of the classical baselines.
    Baseline(BaselineKind),
}

impl MethodSpec {
    /// Name used in configuration files and output.
    pub fn name(&self) -> &'static str {
        match self {
            MethodSpec::Oasis(OasisMode::Adaptive) => "oasis",
            MethodSpec::Oasis(OasisMode::Fixed) => "oasis_fixed",
            MethodSpec::Oasis(OasisMode::Momentum) => "oasis_momentum",
            MethodSpec::Oasis(OasisMode::LineSearch { .. }) => "oasis_linesearch",
            MethodSpec::Adgd => "adgd",
            MethodSpec::Baseline(k) => k.name(),
        }
    }

    /// Inverse of [`MethodSpec::name`]. `oasis_adaptive` is accepted as an
    /// alias for `oasis`; the line-search variant comes back with its
    /// conventional parameters (`η_init = 1`, `c1 = 1e-4`, `τ = 1/2`).
    pub fn from_name(name: &str) -> Result<Self> {
        let spec = match name {
            "oasis" | "oasis_adaptive" => MethodSpec::Oasis(OasisMode::Adaptive),
            "oasis_fixed" => MethodSpec::Oasis(OasisMode::Fixed),
            "oasis_momentum" => MethodSpec::Oasis(OasisMode::Momentum),
            "oasis_linesearch" => MethodSpec::Oasis(OasisMode::line_search()),
            "adgd" => MethodSpec::Adgd,
            "sgd" => MethodSpec::Baseline(BaselineKind::Sgd),
            "adagrad" => MethodSpec::Baseline(BaselineKind::AdaGrad),
            "rmsprop" => MethodSpec::Baseline(BaselineKind::RmsProp),
            "adam" => MethodSpec::Baseline(BaselineKind::Adam),
            "adamw" => MethodSpec::Baseline(BaselineKind::AdamW),
            "adahessian" => MethodSpec::Baseline(BaselineKind::AdaHessian),
            other => {
                return Err(OasisError::Config(format!(
                    "unknown method `{other}` (expected one of oasis, oasis_fixed, \
                     oasis_momentum, oasis_linesearch, adgd, sgd, adagrad, rmsprop, adam, \
                     adamw, adahessian)"
                )))
            }
        };
        Ok(spec)
    }
}

/// Multiply the step size by `factor` after logging unit `at` completes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleEntry {
    /// Logging unit (iteration for full-batch runs, epoch for mini-batch
    /// runs) after which the factor is applied, exactly once.
    pub at: usize,
    pub factor: f64,
}

/// Everything that defines an experiment apart from the objective itself.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub method: MethodSpec,
    pub hyper: Hyper,
    /// `None` = full-batch (deterministic) runs.
    pub batch_size: Option<usize>,
    /// Draw the curvature-probe batch independently of the gradient batch.
    pub distinct_probe_batch: bool,
    /// Run length in logging units: iterations for full-batch runs, epochs
    /// (of `ceil(n / batch_size)` steps each) for mini-batch runs.
    pub length: usize,
    /// One independent run per seed; the seed drives the starting point, the
    /// curvature probes, and the batch draws.
    pub seeds: Vec<u64>,
    /// The starting point is `w0_scale ·` a standard normal vector.
    pub w0_scale: f64,
    /// Step-size schedule, applied at logging-unit boundaries.
    pub schedule: Vec<ScheduleEntry>,
}

impl ExperimentConfig {
    /// Full-batch config with library defaults: 100 iterations, seeds 1–3,
    /// starting scale 0.01, no schedule.
    pub fn new(method: MethodSpec) -> Self {
        ExperimentConfig {
            method,
            hyper: Hyper::default(),
            batch_size: None,
            distinct_probe_batch: false,
            length: 100,
            seeds: vec![1, 2, 3],
            w0_scale: 0.01,
            schedule: Vec::new(),
        }
    }

    fn validate(&self, n_samples: usize) -> Result<()> {
        if self.length == 0 {
            return Err(OasisError::Config("run length must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(OasisError::Config("need at least one seed".into()));
        }
        if !(self.w0_scale >= 0.0 && self.w0_scale.is_finite()) {
            return Err(OasisError::Config(format!(
                "w0_scale must be nonnegative and finite, got {}",
                self.w0_scale
            )));
        }
        if let Some(b) = self.batch_size {
            if b == 0 || b > n_samples {
                return Err(OasisError::Config(format!(
                    "batch size {b} is outside 1..={n_samples}"
                )));
            }
        }
        for e in &self.schedule {
            if !(e.factor > 0.0 && e.factor.is_finite()) {
                return Err(OasisError::Config(format!(
                    "schedule factor must be positive and finite, got {}",
                    e.factor
                )));
            }
        }
        Ok(())
    }
}

/// One instrumented snapshot of a run. Fields that don't apply hold NaN, and
/// NaN round-trips through the CSV form.
#[derive(Debug, Clone, Copy)]
pub struct LogRow {
    /// Completed optimizer steps at this snapshot.
    pub iter: usize,
    /// Effective data passes spent by the optimizer (instrumentation free).
    pub passes: f64,
    /// Full-batch objective value.
    pub f: f64,
    /// `f - f_star` when a reference solution is attached.
    pub gap: f64,
    /// Squared full-batch gradient norm.
    pub grad_norm_sq: f64,
    /// Step size that produced this snapshot (NaN on the starting row).
    pub eta: f64,
    /// Step-size ratio, when the method defines one.
    pub theta: f64,
    /// Extremes of the preconditioner diagonal in use.
    pub dhat_min: f64,
    pub dhat_max: f64,
    /// `‖D_k - D_{k-1}‖∞` of the most recent curvature-EMA update.
    pub drift: f64,
    /// Contraction functional
    /// `‖w-w*‖²_D̂ + ½‖w-w_prev‖²_D̂ + 2η(1+θ)(F(w_prev)-F*)`,
    /// defined once a step ratio and a reference exist.
    pub psi: f64,
    /// Classification accuracy, for objectives that carry labels.
    pub accuracy: f64,
}

/// All snapshots of one seed's run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub seed: u64,
    pub rows: Vec<LogRow>,
    /// True if the run stopped early because an iterate left the finite
    /// range; the rows then end at the last finite state.
    pub aborted: bool,
}

/// Construct the configured method at `w0`. Warm-start probes (for the
/// preconditioned methods) draw from `rng`.
pub fn build_optimizer(
    problem: &dyn Objective,
    method: &MethodSpec,
    hyper: &Hyper,
    w0: Vec<f64>,
    rng: &mut Rng,
) -> Result<Box<dyn Optimizer>> {
    match method {
        MethodSpec::Oasis(mode) => Ok(Box::new(OasisOptimizer::new(
            problem,
            w0,
            *mode,
            hyper.clone(),
            rng,
        )?)),
        MethodSpec::Adgd => Ok(Box::new(AdgdOptimizer::new(w0, hyper)?)),
        MethodSpec::Baseline(kind) => Ok(Box::new(BaselineOptimizer::new(*kind, w0, hyper)?)),
    }
}

/// Number of worker threads: the smaller of the job count and the machine's
/// parallelism, capped by the `OASIS_THREADS` environment variable when set.
fn thread_count(jobs: usize) -> Result<usize> {
    let hw = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let default = hw.min(jobs).max(1);
    match std::env::var(THREADS_ENV_VAR) {
        Err(_) => Ok(default),
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(t) if t >= 1 => Ok(t.min(jobs).max(1)),
            _ => Err(OasisError::Config(format!(
                "{THREADS_ENV_VAR} must be a positive integer, got `{raw}`"
            ))),
        },
    }
}

/// Run the experiment once per seed (in parallel) and return the records in
/// seed order. A run that diverges is recorded as aborted, not an error;
/// configuration problems are errors.
pub fn run_experiment(
    problem: &(dyn Objective + Sync),
    config: &ExperimentConfig,
    reference: Option<&ReferenceSolution>,
) -> Result<Vec<RunRecord>> {
    config.validate(problem.n_samples())?;
    if let Some(r) = reference {
        if r.w_star.len() != problem.dim() {
            return Err(OasisError::Dimension(format!(
                "reference solution has {} coordinates but the problem has {}",
                r.w_star.len(),
                problem.dim()
            )));
        }
    }
    let seeds = &config.seeds;
    let workers = thread_count(seeds.len())?;
    let slots: Vec<Mutex<Option<Result<RunRecord>>>> =
        seeds.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= seeds.len() {
                    break;
                }
                let record = run_single_seed(problem, config, reference, seeds[i]);
                *slots[i].lock().unwrap() = Some(record);
            });
        }
    });
    let mut out = Vec::with_capacity(seeds.len());
    for slot in slots {
        out.push(
            slot.into_inner()
                .unwrap()
                .expect("every seed index was claimed by a worker")?,
        );
    }
    Ok(out)
}

fn run_single_seed(
    problem: &dyn Objective,
    config: &ExperimentConfig,
    reference: Option<&ReferenceSolution>,
    seed: u64,
) -> Result<RunRecord> {
    let mut rng = Rng::new(seed);
    let dim = problem.dim();
    // Per-seed randomness is consumed in a fixed order: starting point,
    // then warm-start probes, then the steps.
    let w0: Vec<f64> = (0..dim)
        .map(|_| config.w0_scale * rng.standard_normal())
        .collect();
    let mut opt = build_optimizer(problem, &config.method, &config.hyper, w0, &mut rng)?;
    let batch = BatchSpec {
        size: config.batch_size,
        distinct_probe_batch: config.distinct_probe_batch,
    };
    let steps_per_unit = match config.batch_size {
        None => 1,
        Some(b) => problem.n_samples().div_ceil(b),
    };

    let mut rows = Vec::with_capacity(config.length + 1);
    rows.push(instrument(problem, &*opt, reference, None));
    let mut aborted = row_diverged(&rows[0]);
    if !aborted {
        'run: for unit in 1..=config.length {
            let mut last_info: Option<StepInfo> = None;
            for _ in 0..steps_per_unit {
                match opt.step(problem, &mut rng, &batch) {
                    Ok(info) => last_info = Some(info),
                    Err(OasisError::Aborted { .. }) => {
                        rows.push(instrument(problem, &*opt, reference, last_info.as_ref()));
                        aborted = true;
                        break 'run;
                    }
                    Err(e) => return Err(e),
                }
            }
            let row = instrument(problem, &*opt, reference, last_info.as_ref());
            aborted = row_diverged(&row);
            rows.push(row);
            if aborted {
                break;
            }
            for entry in &config.schedule {
                if entry.at == unit {
                    opt.scale_eta(entry.factor);
                }
            }
        }
    }
    Ok(RunRecord {
        seed,
        rows,
        aborted,
    })
}

/// Take one instrumented snapshot. `info` is the most recent step's
/// diagnostics (`None` on the starting row).
/// True when the logged state is numerically unusable: the objective or the
/// full gradient norm overflowed or went NaN, which can happen while every
/// coordinate of `w` is still representable.
fn row_diverged(row: &LogRow) -> bool {
    !(row.f.is_finite() && row.grad_norm_sq.is_finite())
}

fn instrument(
    problem: &dyn Objective,
    opt: &dyn Optimizer,
    reference: Option<&ReferenceSolution>,
    info: Option<&StepInfo>,
) -> LogRow {
    let w = opt.w();
    let f = problem.value(w, None);
    let g = problem.gradient(w, None);
    let grad_norm_sq = linalg::norm_sq(&g);
    let gap = reference.map_or(f64::NAN, |r| f - r.f_star);
    let accuracy = problem.classification_accuracy(w, None).unwrap_or(f64::NAN);

    let (eta, theta, dhat_min, dhat_max, drift) = match info {
        Some(i) => (
            i.eta,
            i.theta.unwrap_or(f64::NAN),
            i.dhat_min,
            i.dhat_max,
            i.drift.unwrap_or(f64::NAN),
        ),
        None => {
            let (lo, hi) = match opt.d_hat() {
                Some(d) => (
                    d.iter().copied().fold(f64::INFINITY, f64::min),
                    d.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                ),
                None => (f64::NAN, f64::NAN),
            };
            (f64::NAN, f64::NAN, lo, hi, f64::NAN)
        }
    };

    let psi = match (info, opt.d_hat(), opt.w_prev(), reference) {
        (Some(i), Some(d_hat), Some(w_prev), Some(r)) => match i.theta {
            Some(th) => {
                let to_star = linalg::sub(w, &r.w_star);
                let to_prev = linalg::sub(w, w_prev);
                let a = linalg::weighted_norm(&to_star, d_hat).powi(2);
                let b = linalg::weighted_norm(&to_prev, d_hat).powi(2);
                let f_prev = problem.value(w_prev, None);
                a + 0.5 * b + 2.0 * i.eta * (1.0 + th) * (f_prev - r.f_star)
            }
            None => f64::NAN,
        },
        _ => f64::NAN,
    };

    LogRow {
        iter: opt.k(),
        passes: opt.passes(),
        f,
        gap,
        grad_norm_sq,
        eta,
        theta,
        dhat_min,
        dhat_max,
        drift,
        psi,
        accuracy,
    }
}
