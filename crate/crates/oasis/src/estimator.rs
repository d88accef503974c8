//! Diagonal curvature estimation.
//!
//! The adaptive optimizers in this crate precondition with an estimate of the
//! Hessian diagonal obtained from Hutchinson probes: for a Rademacher vector
//! `z`, the vector `z ⊙ (H z)` has expectation `diag(H)` coordinate-wise. The
//! probes are smoothed with an exponential moving average and the result is
//! clamped in magnitude away from zero so it can be inverted safely:
//!
//! ```text
//! D_k = β₂ D_{k-1} + (1-β₂) · z_k ⊙ (H(w_k) z_k)
//! D̂_k[i] = max(|D_k[i]|, α)
//! ```
//!
//! Two initializations are supported: averaging `m` probes at the starting
//! point (warm start), or starting the EMA from zero and dividing by
//! `1 - β₂^t` (bias correction). The module also implements the second-moment
//! preconditioners of the standard baselines (AdaGrad, RMSProp, Adam,
//! AdaHessian) behind one update function so the optimizer steps stay uniform.

use crate::linalg::{self, Rng};

/// One Hutchinson probe: `v = z ⊙ hz` where `hz = H z`.
///
/// For Rademacher `z`, `E[v] = diag(H)` and each entry obeys
/// `|v_i| ≤ Σ_j |H_ij|` (row ℓ1 norm), hence `|v_i| ≤ √d · ‖H‖₂`.
pub fn hutchinson_sample(z: &[f64], hz: &[f64]) -> Vec<f64> {
    debug_assert_eq!(z.len(), hz.len());
    z.iter().zip(hz).map(|(zi, hi)| zi * hi).collect()
}

/// Draw a fresh Rademacher probe and evaluate it through `hvp`.
///
/// `hvp` receives `z` and must return `H z` for the Hessian being probed.
pub fn draw_hutchinson<F>(dim: usize, rng: &mut Rng, hvp: F) -> Vec<f64>
where
    F: FnOnce(&[f64]) -> Vec<f64>,
{
    let z = rng.rademacher(dim);
    let hz = hvp(&z);
    hutchinson_sample(&z, &hz)
}

/// Warm start: plain average of `m` Hutchinson probes (all at the same point).
///
/// Panics if `m == 0`; use the bias-corrected preconditioner initialization
/// instead when no averaging is wanted.
pub fn warmstart<F>(dim: usize, m: usize, rng: &mut Rng, mut hvp: F) -> Vec<f64>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    assert!(m > 0, "warmstart needs at least one probe");
    let mut acc = vec![0.0; dim];
    for _ in 0..m {
        let v = draw_hutchinson(dim, rng, &mut hvp);
        linalg::axpy(1.0, &v, &mut acc);
    }
    for a in &mut acc {
        *a /= m as f64;
    }
    acc
}

/// In-place EMA update: `d = beta2 * d + (1 - beta2) * v`.
pub fn ema_update(d: &mut [f64], v: &[f64], beta2: f64) {
    debug_assert_eq!(d.len(), v.len());
    for (di, vi) in d.iter_mut().zip(v) {
        *di = beta2 * *di + (1.0 - beta2) * vi;
    }
}

/// Magnitude clamp: `d_hat[i] = max(|d[i]|, alpha)`.
pub fn clamp(d: &[f64], alpha: f64) -> Vec<f64> {
    d.iter().map(|di| di.abs().max(alpha)).collect()
}

/// Debiased EMA value after `t ≥ 1` updates of an EMA started from zero:
/// `d / (1 - beta2^t)`.
pub fn bias_correct(d: &[f64], beta2: f64, t: usize) -> Vec<f64> {
    assert!(t >= 1, "bias correction needs at least one update");
    let denom = 1.0 - beta2.powi(t as i32);
    d.iter().map(|di| di / denom).collect()
}

/// EMA-smoothed, magnitude-clamped diagonal estimate.
///
/// Maintains the raw signed EMA `d`, the clamped positive diagonal `d_hat`
/// actually used for preconditioning, and the two empirical extremes the
/// theory checks need: the largest `d_hat` entry ever observed and the largest
/// probe magnitude `‖v‖∞` ever fed in.
#[derive(Debug, Clone)]
pub struct DiagonalPreconditioner {
    d: Vec<f64>,
    d_hat: Vec<f64>,
    alpha: f64,
    beta2: f64,
    /// Number of EMA updates applied; drives bias correction when enabled.
    updates: usize,
    /// If true, `d_hat` is the clamp of `d / (1 - beta2^updates)` (EMA started
    /// from zero) instead of the clamp of `d` itself.
    bias_corrected: bool,
    /// Running max over `d_hat` entries since construction.
    dhat_max_seen: f64,
    /// Running max of `‖v‖∞` over probes (seeded with `‖d₀‖∞` at construction).
    probe_linf_max: f64,
    /// `‖D_k - D_{k-1}‖∞` of the most recent raw-EMA update (0 before any).
    last_drift: f64,
}

impl DiagonalPreconditioner {
    /// Start from an explicit initial estimate `d0` (e.g. a [`warmstart`]
    /// average or the identity).
    pub fn from_initial(d0: Vec<f64>, alpha: f64, beta2: f64) -> Self {
        assert!(alpha > 0.0, "clamp floor must be positive");
        assert!((0.0..=1.0).contains(&beta2), "beta2 must lie in [0, 1]");
        let d_hat = clamp(&d0, alpha);
        let dhat_max_seen = linalg::linf_norm(&d_hat);
        let probe_linf_max = linalg::linf_norm(&d0);
        DiagonalPreconditioner {
            d: d0,
            d_hat,
            alpha,
            beta2,
            updates: 0,
            bias_corrected: false,
            dhat_max_seen,
            probe_linf_max,
            last_drift: 0.0,
        }
    }

    /// Identity initialization (`d0 = 1`).
    pub fn identity(dim: usize, alpha: f64, beta2: f64) -> Self {
        Self::from_initial(vec![1.0; dim], alpha, beta2)
    }

    /// Bias-corrected initialization: EMA starts at zero and every readout is
    /// divided by `1 - beta2^t`. The first [`DiagonalPreconditioner::update`]
    /// therefore reproduces its probe exactly (clamped), with no warm start.
    pub fn zero_bias_corrected(dim: usize, alpha: f64, beta2: f64) -> Self {
        assert!(alpha > 0.0, "clamp floor must be positive");
        assert!(
            (0.0..1.0).contains(&beta2),
            "bias correction needs beta2 in [0, 1)"
        );
        DiagonalPreconditioner {
            d: vec![0.0; dim],
            d_hat: vec![alpha; dim],
            alpha,
            beta2,
            updates: 0,
            bias_corrected: true,
            dhat_max_seen: alpha,
            probe_linf_max: 0.0,
            last_drift: 0.0,
        }
    }

    /// Fold one Hutchinson probe into the EMA and refresh the clamped diagonal.
    pub fn update(&mut self, v: &[f64]) {
        debug_assert_eq!(v.len(), self.d.len());
        let mut drift = 0.0f64;
        for (di, vi) in self.d.iter_mut().zip(v) {
            let old = *di;
            *di = self.beta2 * old + (1.0 - self.beta2) * vi;
            drift = drift.max((*di - old).abs());
        }
        self.updates += 1;
        self.last_drift = drift;
        self.probe_linf_max = self.probe_linf_max.max(linalg::linf_norm(v));
        if self.bias_corrected {
            let corrected = bias_correct(&self.d, self.beta2, self.updates);
            self.d_hat = clamp(&corrected, self.alpha);
        } else {
            self.d_hat = clamp(&self.d, self.alpha);
        }
        self.dhat_max_seen = self.dhat_max_seen.max(linalg::linf_norm(&self.d_hat));
    }

    /// The clamped positive diagonal used for preconditioning.
    pub fn d_hat(&self) -> &[f64] {
        &self.d_hat
    }

    /// The raw signed EMA state.
    pub fn d_raw(&self) -> &[f64] {
        &self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta2(&self) -> f64 {
        self.beta2
    }

    /// EMA updates applied so far.
    pub fn updates(&self) -> usize {
        self.updates
    }

    pub fn min_entry(&self) -> f64 {
        self.d_hat.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.d_hat.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest `d_hat` entry observed over the preconditioner's lifetime
    /// (the empirical `Γ` of the spectrum bound `αI ⪯ D̂ ⪯ ΓI`).
    pub fn dhat_max_seen(&self) -> f64 {
        self.dhat_max_seen
    }

    /// Largest probe magnitude `‖v‖∞` observed (seeded with `‖d₀‖∞`); the
    /// empirical `Γ` of the probe magnitude and EMA drift bounds.
    pub fn probe_linf_max(&self) -> f64 {
        self.probe_linf_max
    }

    /// `‖D_k - D_{k-1}‖∞` of the most recent [`DiagonalPreconditioner::update`]
    /// (the raw EMA, before clamping); 0 before the first update.
    pub fn last_drift(&self) -> f64 {
        self.last_drift
    }
}

/// Which baseline second-moment rule a [`SecondMomentState`] follows.
///
/// All four produce a positive diagonal `D` that the step divides by (after
/// adding a small `epsilon`):
///
/// | kind       | accumulator                          | readout                |
/// |------------|--------------------------------------|------------------------|
/// | AdaGrad    | `acc += g⊙g`                         | `sqrt(acc)`            |
/// | RMSProp    | `acc = β₂acc + (1-β₂)g⊙g`            | `sqrt(acc)`            |
/// | Adam       | `acc = β₂acc + (1-β₂)g⊙g`            | `sqrt(acc/(1-β₂^t))`   |
/// | AdaHessian | `acc = β₂acc + (1-β₂)v⊙v` (probe `v`)| `sqrt(acc/(1-β₂^t))`   |
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecondMomentKind {
    AdaGrad,
    RmsProp,
    Adam,
    AdaHessian,
}

/// Second-moment accumulator for the baseline preconditioners.
#[derive(Debug, Clone)]
pub struct SecondMomentState {
    kind: SecondMomentKind,
    acc: Vec<f64>,
    beta2: f64,
    updates: usize,
}

impl SecondMomentState {
    pub fn new(kind: SecondMomentKind, dim: usize, beta2: f64) -> Self {
        SecondMomentState {
            kind,
            acc: vec![0.0; dim],
            beta2,
            updates: 0,
        }
    }

    pub fn kind(&self) -> SecondMomentKind {
        self.kind
    }

    /// Fold in a gradient (AdaGrad/RMSProp/Adam) or a Hutchinson probe
    /// (AdaHessian) and return the current diagonal `D` (without epsilon).
    pub fn update(&mut self, input: &[f64]) -> Vec<f64> {
        debug_assert_eq!(input.len(), self.acc.len());
        self.updates += 1;
        match self.kind {
            SecondMomentKind::AdaGrad => {
                for (a, x) in self.acc.iter_mut().zip(input) {
                    *a += x * x;
                }
                self.acc.iter().map(|a| a.sqrt()).collect()
            }
            SecondMomentKind::RmsProp => {
                for (a, x) in self.acc.iter_mut().zip(input) {
                    *a = self.beta2 * *a + (1.0 - self.beta2) * x * x;
                }
                self.acc.iter().map(|a| a.sqrt()).collect()
            }
            SecondMomentKind::Adam | SecondMomentKind::AdaHessian => {
                for (a, x) in self.acc.iter_mut().zip(input) {
                    *a = self.beta2 * *a + (1.0 - self.beta2) * x * x;
                }
                let denom = 1.0 - self.beta2.powi(self.updates as i32);
                self.acc.iter().map(|a| (a / denom).sqrt()).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CsrMatrix;

    /// Dense symmetric mat-vec for probe tests.
    fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter().map(|row| linalg::dot(row, x)).collect()
    }

    #[test]
    fn probe_of_identity_is_all_ones() {
        let mut rng = Rng::new(1);
        let v = draw_hutchinson(17, &mut rng, |z| z.to_vec());
        assert!(v.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn probe_of_diagonal_matrix_is_exact() {
        // z ⊙ (D z) = z² ⊙ diag = diag exactly, whatever the signs.
        let diag = vec![2.0, -3.0, 0.0, 1e6, -1e-6];
        let mut rng = Rng::new(2);
        for _ in 0..10 {
            let v = draw_hutchinson(5, &mut rng, |z| {
                z.iter().zip(&diag).map(|(zi, di)| zi * di).collect()
            });
            for (vi, di) in v.iter().zip(&diag) {
                assert!((vi - di).abs() <= 1e-12 * (1.0 + di.abs()));
            }
        }
    }

    #[test]
    fn probe_magnitude_bounded_by_row_l1_norm() {
        let a: Vec<Vec<f64>> = vec![
            vec![1.0, -2.0, 0.5],
            vec![-2.0, 3.0, 1.0],
            vec![0.5, 1.0, -4.0],
        ];
        let row_l1: Vec<f64> = a
            .iter()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .collect();
        // Spectral norm oracle via nalgebra for the √d·‖H‖₂ form of the bound.
        let m = nalgebra::DMatrix::from_fn(3, 3, |i, j| a[i][j]);
        let spectral = m
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, &e| acc.max(e.abs()));
        let mut rng = Rng::new(3);
        for _ in 0..200 {
            let v = draw_hutchinson(3, &mut rng, |z| matvec(&a, z));
            for (i, vi) in v.iter().enumerate() {
                assert!(vi.abs() <= row_l1[i] + 1e-12);
                assert!(vi.abs() <= 3.0_f64.sqrt() * spectral + 1e-12);
            }
        }
    }

    #[test]
    fn probe_mean_converges_to_diagonal() {
        // Cheap unbiasedness check (the full-budget one lives in the
        // acceptance suite): 20k probes on a fixed 6×6 symmetric matrix.
        let mut rng = Rng::new(4);
        let g: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..6).map(|_| rng.standard_normal()).collect())
            .collect();
        let a: Vec<Vec<f64>> = (0..6)
            .map(|i| (0..6).map(|j| 0.5 * (g[i][j] + g[j][i])).collect())
            .collect();
        let diag: Vec<f64> = (0..6).map(|i| a[i][i]).collect();
        let mut acc = vec![0.0; 6];
        let n = 20_000;
        for _ in 0..n {
            let v = draw_hutchinson(6, &mut rng, |z| matvec(&a, z));
            linalg::axpy(1.0, &v, &mut acc);
        }
        for x in &mut acc {
            *x /= n as f64;
        }
        let err = linalg::norm(&linalg::sub(&acc, &diag)) / linalg::norm(&diag);
        assert!(err < 0.05, "relative error {err}");
    }

    #[test]
    fn probe_works_through_sparse_gram_operator() {
        // diag(XᵀX) recovered exactly when XᵀX is diagonal (orthogonal columns).
        let x = CsrMatrix::from_dense(&[vec![3.0, 0.0], vec![0.0, -2.0], vec![4.0, 0.0]]).unwrap();
        let mut rng = Rng::new(5);
        let v = draw_hutchinson(2, &mut rng, |z| x.spmv_t(&x.spmv(z)));
        assert!((v[0] - 25.0).abs() < 1e-12);
        assert!((v[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn ema_matches_hand_unrolled_recursion() {
        let mut d = vec![10.0, -4.0];
        ema_update(&mut d, &[2.0, 2.0], 0.9);
        // 0.9·10 + 0.1·2 = 9.2; 0.9·(-4) + 0.1·2 = -3.4
        assert!((d[0] - 9.2).abs() < 1e-14);
        assert!((d[1] - (-3.4)).abs() < 1e-14);
        ema_update(&mut d, &[0.0, 1.0], 0.9);
        assert!((d[0] - 8.28).abs() < 1e-14);
        assert!((d[1] - (-2.96)).abs() < 1e-14);
    }

    #[test]
    fn ema_with_beta_one_freezes_state() {
        let mut d = vec![1.0, 2.0];
        ema_update(&mut d, &[100.0, -100.0], 1.0);
        assert_eq!(d, vec![1.0, 2.0]);
    }

    #[test]
    fn clamp_takes_magnitude_then_floor() {
        assert_eq!(clamp(&[0.5, -3.0, 1e-9], 1.0), vec![1.0, 3.0, 1.0]);
    }

    #[test]
    fn clamp_is_idempotent_and_floored() {
        let mut rng = Rng::new(6);
        for _ in 0..100 {
            let d: Vec<f64> = (0..10).map(|_| rng.standard_normal() * 5.0).collect();
            let alpha = 0.25;
            let once = clamp(&d, alpha);
            assert_eq!(clamp(&once, alpha), once);
            assert!(once.iter().all(|&x| x >= alpha));
        }
    }

    #[test]
    fn bias_correction_recovers_constant_probe() {
        // EMA from zero with β₂ = 0.5 fed the constant probe (1,): raw state
        // after two updates is 0.75; dividing by 1 - 0.5² = 0.75 restores 1.
        let mut d = vec![0.0];
        ema_update(&mut d, &[1.0], 0.5);
        ema_update(&mut d, &[1.0], 0.5);
        assert!((d[0] - 0.75).abs() < 1e-15);
        let corrected = bias_correct(&d, 0.5, 2);
        assert!((corrected[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn preconditioner_identity_is_fixed_point_when_frozen() {
        // β₂ = 1 keeps the EMA at its start; with α = 1 and d₀ = 1 the clamped
        // diagonal stays exactly the identity forever.
        let mut p = DiagonalPreconditioner::identity(3, 1.0, 1.0);
        let mut rng = Rng::new(7);
        for _ in 0..20 {
            let v: Vec<f64> = (0..3).map(|_| rng.standard_normal() * 10.0).collect();
            p.update(&v);
            assert_eq!(p.d_hat(), &[1.0, 1.0, 1.0]);
        }
    }

    #[test]
    fn preconditioner_tracks_clamp_invariant_and_extremes() {
        let mut p = DiagonalPreconditioner::from_initial(vec![0.5, -2.0], 0.8, 0.5);
        assert_eq!(p.d_hat(), &[0.8, 2.0]);
        p.update(&[-10.0, 0.0]);
        // d = 0.5·(0.5, -2) + 0.5·(-10, 0) = (-4.75, -1.0)
        assert_eq!(p.d_raw(), &[-4.75, -1.0]);
        assert_eq!(p.d_hat(), &[4.75, 1.0]);
        assert!(p.min_entry() >= p.alpha());
        assert_eq!(p.dhat_max_seen(), 4.75);
        assert_eq!(p.probe_linf_max(), 10.0);
    }

    #[test]
    fn bias_corrected_preconditioner_reproduces_first_probe() {
        let mut p = DiagonalPreconditioner::zero_bias_corrected(3, 1e-8, 0.99);
        p.update(&[2.0, -3.0, 0.0]);
        let want = [2.0, 3.0, 1e-8];
        for (got, want) in p.d_hat().iter().zip(&want) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn second_moment_adagrad_accumulates_without_decay() {
        let mut s = SecondMomentState::new(SecondMomentKind::AdaGrad, 2, 0.9);
        let d1 = s.update(&[3.0, 4.0]);
        assert_eq!(d1, vec![3.0, 4.0]);
        let d2 = s.update(&[0.0, 3.0]);
        // acc = (9, 16) + (0, 9) = (9, 25)
        assert_eq!(d2, vec![3.0, 5.0]);
    }

    #[test]
    fn second_moment_rmsprop_decays() {
        let mut s = SecondMomentState::new(SecondMomentKind::RmsProp, 1, 0.5);
        let d1 = s.update(&[2.0]);
        // acc = 0.5·0 + 0.5·4 = 2
        assert!((d1[0] - 2.0_f64.sqrt()).abs() < 1e-15);
        let d2 = s.update(&[0.0]);
        assert!((d2[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn second_moment_adam_first_step_is_gradient_magnitude() {
        let mut s = SecondMomentState::new(SecondMomentKind::Adam, 3, 0.999);
        let d = s.update(&[0.5, -2.0, 0.0]);
        let want = [0.5, 2.0, 0.0];
        for (g, w) in d.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn second_moment_adahessian_recovers_constant_diagonal() {
        // Probes of a constant diagonal Hessian diag(2, -3) are exactly
        // (2, -3); the bias-corrected sqrt-EMA of squares is (2, 3) at every k.
        let mut s = SecondMomentState::new(SecondMomentKind::AdaHessian, 2, 0.95);
        for _ in 0..25 {
            let d = s.update(&[2.0, -3.0]);
            assert!((d[0] - 2.0).abs() < 1e-12);
            assert!((d[1] - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn warmstart_is_plain_average_of_probes() {
        let a = vec![vec![1.0, 2.0], vec![2.0, -1.0]];
        let m = 10;
        let mut rng = Rng::new(42);
        let d0 = warmstart(2, m, &mut rng, |z| matvec(&a, z));
        // Oracle: replay the identical probe stream by reconstructing the rng.
        let mut oracle_rng = Rng::new(42);
        let mut acc = vec![0.0; 2];
        for _ in 0..m {
            let z = oracle_rng.rademacher(2);
            let v = hutchinson_sample(&z, &matvec(&a, &z));
            linalg::axpy(1.0, &v, &mut acc);
        }
        for x in &mut acc {
            *x /= m as f64;
        }
        assert_eq!(d0, acc);
    }
}
