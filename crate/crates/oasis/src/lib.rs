//! Doubly adaptive diagonal-preconditioned optimization.
//!
//! This crate implements a family of first- and second-order stochastic
//! optimizers built around a Hutchinson estimate of the Hessian diagonal
//! (kept as an exponential moving average, clamped away from zero) combined
//! with a self-tuning step size, together with the classical baselines it is
//! usually compared against (SGD, AdaGrad, RMSProp, Adam, AdamW, AdaHessian,
//! and the curvature-free adaptive-step method AdGD).
//!
//! On top of the optimizers sit:
//!
//! * [`problems`] — benchmark objectives (ℓ2-regularized logistic regression,
//!   sigmoid nonlinear least squares, quadratics) over sparse CSR data, with
//!   finite-difference oracles for cross-checking analytic derivatives;
//! * [`dataio`] — a LIBSVM-format reader/writer, train/test splitting, and a
//!   synthetic classification generator;
//! * [`harness`] — a deterministic experiment driver: seeded runs, effective-pass
//!   accounting, reference solutions, CSV/SVG reporting, and a diagonal-estimate
//!   fidelity experiment;
//! * [`verify`] — an empirical check suite for the convergence guarantees the
//!   adaptive methods are supposed to satisfy (step-size bounds, linear rates,
//!   nonconvex stationarity bounds, spectrum/drift bounds, equivalences).
//!
//! Everything is deterministic given a seed: randomness flows from the small
//! splittable generator in [`linalg::rng`], so identical configurations produce
//! byte-identical reports on every platform.

pub mod dataio;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod linalg;
pub mod optimizers;
pub mod problems;
pub mod verify;

pub use error::OasisError;
