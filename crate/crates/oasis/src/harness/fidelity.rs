//! How well do randomized diagonal estimates track the true Hessian
//! diagonal?
//!
//! The experiment fixes a dense symmetric matrix `A` (symmetrized standard
//! normal), draws Rademacher probes `z`, forms `v = z ⊙ (Az)` — whose
//! expectation is exactly `diag(A)` — and tracks three estimators side by
//! side after every sample:
//!
//! * the plain running mean of `v`, compared against `diag(A)`;
//! * the clamped magnitude of a bias-corrected EMA of `v` (the
//!   preconditioner update used by the optimizer), compared against
//!   `|diag(A)|`;
//! * the square root of a bias-corrected EMA of `v²` (the second-moment
//!   readout), compared against `|diag(A)|`. Squaring first folds the
//!   off-diagonal mass of `A` into every coordinate, so this one carries a
//!   persistent upward bias the EMA-of-`v` estimator does not.
//!
//! Each comparison is reported under two normalizations: relative to the
//! diagonal's own norm, and relative to `‖A‖_F`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{OasisError, Result};
use crate::estimator::{DiagonalPreconditioner, SecondMomentKind, SecondMomentState};
use crate::linalg::Rng;

/// Parameters of the diagonal-fidelity experiment.
#[derive(Debug, Clone, Copy)]
pub struct FidelityConfig {
    pub dim: usize,
    /// Number of probes drawn (one row per probe).
    pub samples: usize,
    /// Decay of both EMA estimators.
    pub beta2: f64,
    /// Clamp floor of the preconditioner-style estimator.
    pub alpha: f64,
    pub seed: u64,
}

impl Default for FidelityConfig {
    fn default() -> Self {
        FidelityConfig {
            dim: 100,
            samples: 200,
            beta2: 0.99,
            alpha: 1e-8,
            seed: 1,
        }
    }
}

/// Estimator errors after `t` probes. `*_vs_diag` divides the ℓ2 error by
/// the norm of the comparison diagonal, `*_rel_fro` by `‖A‖_F`.
#[derive(Debug, Clone, Copy)]
pub struct FidelityRow {
    pub t: usize,
    pub mean_vs_diag: f64,
    pub mean_rel_fro: f64,
    pub oasis_vs_diag: f64,
    pub oasis_rel_fro: f64,
    pub adahessian_vs_diag: f64,
    pub adahessian_rel_fro: f64,
}

fn l2_err(estimate: &[f64], target: &[f64]) -> f64 {
    estimate
        .iter()
        .zip(target)
        .map(|(e, d)| (e - d) * (e - d))
        .sum::<f64>()
        .sqrt()
}

/// Run the experiment and return one row per probe.
pub fn diag_fidelity_experiment(config: &FidelityConfig) -> Result<Vec<FidelityRow>> {
    let d = config.dim;
    if d == 0 || config.samples == 0 {
        return Err(OasisError::Config(
            "fidelity experiment needs dim >= 1 and samples >= 1".into(),
        ));
    }
    if !(config.beta2 >= 0.0 && config.beta2 < 1.0) {
        return Err(OasisError::Config(format!(
            "fidelity beta2 must lie in [0, 1), got {}",
            config.beta2
        )));
    }
    if !(config.alpha > 0.0 && config.alpha.is_finite()) {
        return Err(OasisError::Config(format!(
            "fidelity alpha must be positive and finite, got {}",
            config.alpha
        )));
    }

    let mut rng = Rng::new(config.seed);
    // A = (G + Gᵀ)/2 with iid standard normal G, stored row-major.
    let mut a = vec![0.0_f64; d * d];
    for entry in a.iter_mut() {
        *entry = rng.standard_normal();
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let s = 0.5 * (a[i * d + j] + a[j * d + i]);
            a[i * d + j] = s;
            a[j * d + i] = s;
        }
    }
    let diag: Vec<f64> = (0..d).map(|i| a[i * d + i]).collect();
    let abs_diag: Vec<f64> = diag.iter().map(|x| x.abs()).collect();
    let diag_norm = diag.iter().map(|x| x * x).sum::<f64>().sqrt();
    let fro = a.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut mean_acc = vec![0.0_f64; d];
    let mut precond = DiagonalPreconditioner::zero_bias_corrected(d, config.alpha, config.beta2);
    let mut second = SecondMomentState::new(SecondMomentKind::AdaHessian, d, config.beta2);

    let mut z = vec![0.0_f64; d];
    let mut rows = Vec::with_capacity(config.samples);
    for t in 1..=config.samples {
        rng.rademacher_into(&mut z);
        let mut v = vec![0.0_f64; d];
        for i in 0..d {
            let mut az = 0.0;
            let row = &a[i * d..(i + 1) * d];
            for j in 0..d {
                az += row[j] * z[j];
            }
            v[i] = z[i] * az;
        }

        for (acc, vi) in mean_acc.iter_mut().zip(&v) {
            *acc += vi;
        }
        let mean: Vec<f64> = mean_acc.iter().map(|s| s / t as f64).collect();
        precond.update(&v);
        let readout = second.update(&v);

        let e_mean = l2_err(&mean, &diag);
        let e_precond = l2_err(precond.d_hat(), &abs_diag);
        let e_second = l2_err(&readout, &abs_diag);
        rows.push(FidelityRow {
            t,
            mean_vs_diag: e_mean / diag_norm,
            mean_rel_fro: e_mean / fro,
            oasis_vs_diag: e_precond / diag_norm,
            oasis_rel_fro: e_precond / fro,
            adahessian_vs_diag: e_second / diag_norm,
            adahessian_rel_fro: e_second / fro,
        });
    }
    Ok(rows)
}

/// Header line of the fidelity CSV.
pub const FIDELITY_CSV_HEADER: &str =
    "t,mean_vs_diag,mean_rel_fro,oasis_vs_diag,oasis_rel_fro,adahessian_vs_diag,adahessian_rel_fro";

/// Render fidelity rows to CSV text (same float conventions as the run CSV).
pub fn write_fidelity_csv(rows: &[FidelityRow]) -> String {
    let mut out = String::new();
    out.push_str(FIDELITY_CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.t,
            r.mean_vs_diag,
            r.mean_rel_fro,
            r.oasis_vs_diag,
            r.oasis_rel_fro,
            r.adahessian_vs_diag,
            r.adahessian_rel_fro
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Write fidelity rows to a file.
pub fn write_fidelity_csv_file(rows: &[FidelityRow], path: &Path) -> Result<()> {
    std::fs::write(path, write_fidelity_csv(rows))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_mean_converges_and_errors_shrink() {
        let config = FidelityConfig {
            dim: 40,
            samples: 400,
            ..FidelityConfig::default()
        };
        let rows = diag_fidelity_experiment(&config).unwrap();
        assert_eq!(rows.len(), 400);
        assert_eq!(rows[0].t, 1);
        assert_eq!(rows.last().unwrap().t, 400);
        let first = rows[0].mean_rel_fro;
        let last = rows.last().unwrap().mean_rel_fro;
        assert!(last < first, "error should shrink: {first} -> {last}");
        assert!(last < 0.2, "final mean error {last}");
    }

    #[test]
    fn ema_of_probes_beats_root_mean_square_of_probes() {
        // Squaring before averaging mixes in off-diagonal energy, so the
        // second-moment readout stays biased above |diag| while the EMA of
        // the probes themselves homes in on it.
        let rows = diag_fidelity_experiment(&FidelityConfig::default()).unwrap();
        let last = rows.last().unwrap();
        assert!(
            last.oasis_vs_diag < last.adahessian_vs_diag,
            "{} vs {}",
            last.oasis_vs_diag,
            last.adahessian_vs_diag
        );
    }

    #[test]
    fn same_seed_reproduces_identical_rows() {
        let config = FidelityConfig {
            dim: 15,
            samples: 50,
            ..FidelityConfig::default()
        };
        let a = diag_fidelity_experiment(&config).unwrap();
        let b = diag_fidelity_experiment(&config).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.mean_vs_diag.to_bits(), y.mean_vs_diag.to_bits());
            assert_eq!(x.oasis_rel_fro.to_bits(), y.oasis_rel_fro.to_bits());
        }
    }

    #[test]
    fn csv_output_has_the_documented_shape() {
        let config = FidelityConfig {
            dim: 5,
            samples: 3,
            ..FidelityConfig::default()
        };
        let rows = diag_fidelity_experiment(&config).unwrap();
        let text = write_fidelity_csv(&rows);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], FIDELITY_CSV_HEADER);
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("1,"));
    }

    #[test]
    fn degenerate_configs_are_rejected() {
        let bad = [
            FidelityConfig {
                dim: 0,
                ..FidelityConfig::default()
            },
            FidelityConfig {
                samples: 0,
                ..FidelityConfig::default()
            },
            FidelityConfig {
                beta2: 1.0,
                ..FidelityConfig::default()
            },
            FidelityConfig {
                alpha: 0.0,
                ..FidelityConfig::default()
            },
        ];
        for c in &bad {
            assert!(diag_fidelity_experiment(c).is_err());
        }
    }
}
