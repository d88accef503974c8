//! Empirical verification of the optimizer's provable guarantees.
//!
//! Every claim the library's convergence analysis makes about observable
//! quantities — step-size bounds, spectrum floors, EMA drift, geometric
//! rates, averaged-gradient bounds, potential contraction, method
//! equivalences, stochastic plateaus — is re-checked numerically on a small
//! battery of fixtures with pinned tolerances. Negative controls prove the
//! checkers can actually detect violations, and checks whose preconditions a
//! fixture does not meet report `Refused` rather than silently passing.
//!
//! Entry point: [`run_suite`] with `"all"` or a single check id from
//! [`SUITES`]; the result renders as text ([`TheoryReport::render`]) or CSV
//! ([`TheoryReport::to_csv`]).

mod checks;
mod fixtures;

use std::fmt::Write as _;

use crate::error::{OasisError, Result};

pub use checks::{EXACT_TOL, REL_TOL};
pub use fixtures::{battery, Fixture, RUN_SEEDS};

/// Outcome of a single check on a single fixture and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    /// The claimed inequality held (or, for a negative control, the planted
    /// violation was detected).
    Pass,
    /// The claim was violated beyond its tolerance.
    Fail,
    /// The fixture does not meet the claim's preconditions; nothing was
    /// asserted.
    Refused,
}

impl CheckStatus {
    fn label(self) -> &'static str {
        match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Refused => "REFUSED",
        }
    }
}

/// One verified claim: what was asserted, what was measured, and how much
/// slack remained.
#[derive(Debug, Clone)]
pub struct CheckEntry {
    /// Check id, one of [`SUITES`].
    pub check: &'static str,
    /// Fixture name the check ran on.
    pub fixture: String,
    /// Seed of the run.
    pub seed: u64,
    /// The inequality or property asserted, with its constants resolved.
    pub claim: String,
    /// The measured quantities behind the verdict.
    pub observed: String,
    /// Number of optimizer iterations the verdict rests on.
    pub iterations: usize,
    /// Worst-case slack: nonnegative means the claim held everywhere
    /// (NaN for descriptive or refused entries).
    pub margin: f64,
    /// Verdict.
    pub status: CheckStatus,
}

/// Aggregated results of a verification run.
#[derive(Debug, Clone)]
pub struct TheoryReport {
    /// All entries, in execution order.
    pub entries: Vec<CheckEntry>,
}

impl TheoryReport {
    /// Number of entries with the given status.
    fn count(&self, status: CheckStatus) -> usize {
        self.entries.iter().filter(|e| e.status == status).count()
    }

    /// Number of passing entries.
    pub fn passed(&self) -> usize {
        self.count(CheckStatus::Pass)
    }

    /// Number of failing entries.
    pub fn failed(&self) -> usize {
        self.count(CheckStatus::Fail)
    }

    /// Number of refused entries.
    pub fn refused(&self) -> usize {
        self.count(CheckStatus::Refused)
    }

    /// True when no entry failed (refusals do not count as failures).
    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }

    /// Human-readable multi-line report.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("theory verification report\n");
        out.push_str("==========================\n");
        for e in &self.entries {
            let margin = if e.margin.is_nan() {
                "n/a".to_string()
            } else {
                format!("{:.3e}", e.margin)
            };
            let _ = writeln!(
                out,
                "[{:>7}] {} ({}, seed {}, {} iters, margin {})",
                e.status.label(),
                e.check,
                e.fixture,
                e.seed,
                e.iterations,
                margin
            );
            let _ = writeln!(out, "          claim:    {}", e.claim);
            let _ = writeln!(out, "          observed: {}", e.observed);
        }
        let _ = writeln!(
            out,
            "--------------------------\n{} passed, {} failed, {} refused — {}",
            self.passed(),
            self.failed(),
            self.refused(),
            if self.all_passed() {
                "every asserted claim held"
            } else {
                "VIOLATIONS FOUND"
            }
        );
        out
    }

    /// CSV rendering, one row per entry. Fields containing commas, quotes,
    /// or newlines are double-quoted.
    pub fn to_csv(&self) -> String {
        fn quote(field: &str) -> String {
            if field.contains([',', '"', '\n']) {
                format!("\"{}\"", field.replace('"', "\"\""))
            } else {
                field.to_string()
            }
        }
        let mut out = String::from("check,fixture,seed,status,iterations,margin,claim,observed\n");
        for e in &self.entries {
            let margin = if e.margin.is_nan() {
                "NaN".to_string()
            } else {
                format!("{:.17e}", e.margin)
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                quote(e.check),
                quote(&e.fixture),
                e.seed,
                e.status.label(),
                e.iterations,
                margin,
                quote(&e.claim),
                quote(&e.observed)
            );
        }
        out
    }
}

/// All check ids, in the order `"all"` runs them.
pub const SUITES: [&str; 12] = [
    "spectrum-drift",
    "eta-bounds",
    "fixed-lr-rate",
    "fixed-lr-negative-control",
    "nonconvex-bound",
    "linesearch-rate",
    "linesearch-nonconvex-bound",
    "adgd-equivalence",
    "adgd-negative-control",
    "psi-contraction",
    "convex-adaptive-descriptive",
    "stochastic-plateau",
];

/// Run one check id (or `"all"`) across its fixtures and the standard
/// seeds; unknown ids are a configuration error listing the valid names.
pub fn run_suite(suite: &str) -> Result<TheoryReport> {
    if suite != "all" && !SUITES.contains(&suite) {
        return Err(OasisError::Config(format!(
            "unknown verification suite '{suite}'; valid: all, {}",
            SUITES.join(", ")
        )));
    }
    let mut entries = Vec::new();
    for id in SUITES {
        if suite != "all" && suite != id {
            continue;
        }
        run_check(id, &mut entries)?;
    }
    Ok(TheoryReport { entries })
}

/// Append every (fixture, seed) entry for one check id.
fn run_check(id: &'static str, entries: &mut Vec<CheckEntry>) -> Result<()> {
    // Fixtures are rebuilt per check: each run must start from pristine
    // state, and construction is cheap next to the optimizer loops.
    let strongly_convex = || {
        battery()
            .into_iter()
            .filter(|f| f.name != "nls1")
            .collect::<Vec<_>>()
    };
    match id {
        "spectrum-drift" => {
            for fixture in battery() {
                for seed in RUN_SEEDS {
                    entries.push(checks::check_spectrum_and_drift(
                        fixture.problem.as_ref(),
                        fixture.name,
                        seed,
                    )?);
                }
            }
        }
        "eta-bounds" => {
            for fixture in battery() {
                for seed in RUN_SEEDS {
                    entries.push(checks::check_eta_bounds(
                        fixture.problem.as_ref(),
                        fixture.name,
                        seed,
                    )?);
                }
            }
        }
        "fixed-lr-rate" => {
            for fixture in strongly_convex() {
                for seed in RUN_SEEDS {
                    entries.push(checks::check_fixed_lr_rate(
                        fixture.problem.as_ref(),
                        fixture.name,
                        seed,
                    )?);
                }
            }
        }
        "fixed-lr-negative-control" => {
            let fixture = fixtures::quad1();
            for seed in RUN_SEEDS {
                entries.push(checks::check_fixed_lr_negative_control(
                    fixture.problem.as_ref(),
                    fixture.name,
                    seed,
                )?);
            }
        }
        "nonconvex-bound" => {
            let fixture = fixtures::nls1();
            for seed in RUN_SEEDS {
                entries.push(checks::check_nonconvex_bound(
                    fixture.problem.as_ref(),
                    fixture.name,
                    seed,
                )?);
            }
        }
        "linesearch-rate" => {
            // The clamp floor on the diagonal fixture is raised above its
            // smallest eigenvalue so the unit step is not an exact solve.
            for (fixture, alpha) in [(fixtures::quad1(), 3.0), (fixtures::logi1(), 1.0)] {
                for seed in RUN_SEEDS {
                    entries.push(checks::check_linesearch_rate(
                        fixture.problem.as_ref(),
                        fixture.name,
                        seed,
                        alpha,
                    )?);
                }
            }
        }
        "linesearch-nonconvex-bound" => {
            let fixture = fixtures::nls1();
            for seed in RUN_SEEDS {
                entries.push(checks::check_linesearch_nonconvex(
                    fixture.problem.as_ref(),
                    fixture.name,
                    seed,
                )?);
            }
        }
        "adgd-equivalence" => {
            for fixture in [fixtures::quad1(), fixtures::logi1()] {
                for seed in RUN_SEEDS {
                    entries.push(checks::check_adgd_equivalence(
                        fixture.problem.as_ref(),
                        fixture.name,
                        seed,
                    )?);
                }
            }
        }
        "adgd-negative-control" => {
            let fixture = fixtures::quad1();
            for seed in RUN_SEEDS {
                entries.push(checks::check_adgd_negative_control(
                    fixture.problem.as_ref(),
                    fixture.name,
                    seed,
                )?);
            }
        }
        "psi-contraction" => {
            let fixture = fixtures::quad1();
            for seed in RUN_SEEDS {
                entries.push(checks::check_psi_contraction(
                    fixture.problem.as_ref(),
                    fixture.name,
                    seed,
                )?);
            }
        }
        "convex-adaptive-descriptive" => {
            let fixture = fixtures::logi1();
            for seed in RUN_SEEDS {
                entries.push(checks::check_convex_adaptive_descriptive(
                    fixture.problem.as_ref(),
                    fixture.name,
                    seed,
                )?);
            }
        }
        "stochastic-plateau" => {
            for fixture in [fixtures::logi1(), fixtures::logi2()] {
                for seed in RUN_SEEDS {
                    entries.push(checks::check_stochastic_plateau(
                        fixture.problem.as_ref(),
                        fixture.name,
                        seed,
                    )?);
                }
            }
        }
        other => unreachable!("unhandled check id {other}"),
    }
    Ok(())
}
