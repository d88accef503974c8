//! The fixture battery the verification suite runs on: two quadratics, two
//! synthetic logistic-regression problems, and one synthetic nonlinear
//! least-squares problem, each paired with three run seeds.
//!
//! Data generation is seeded independently of the run seeds, so every
//! invocation sees the same five problems.

use crate::dataio::synth_classification;
use crate::linalg::Rng;
use crate::problems::{LogisticRegression, NonlinearLeastSquares, Objective, Quadratic};

/// Seeds each check runs under (driving the starting point and the probes).
pub const RUN_SEEDS: [u64; 3] = [1, 2, 3];

/// One named problem of the battery.
pub struct Fixture {
    pub name: &'static str,
    pub problem: Box<dyn Objective + Sync + Send>,
}

/// Well-conditioned diagonal quadratic: `H = diag(2, 8)`, `b = (2, 8)`,
/// so `w* = (1, 1)` and `F* = -5`.
pub fn quad1() -> Fixture {
    Fixture {
        name: "quad1",
        problem: Box::new(
            Quadratic::diagonal(vec![2.0, 8.0], vec![2.0, 8.0]).expect("valid fixture"),
        ),
    }
}

/// Ill-conditioned diagonal quadratic (condition number 1000):
/// `H = diag(0.1, 1, 10, 100)` with `w* = (1, 1, 1, 1)`.
pub fn quad2() -> Fixture {
    Fixture {
        name: "quad2",
        problem: Box::new(
            Quadratic::diagonal(vec![0.1, 1.0, 10.0, 100.0], vec![0.1, 1.0, 10.0, 100.0])
                .expect("valid fixture"),
        ),
    }
}

/// Synthetic logistic regression, 200 samples, 10 features, λ = 0.1.
pub fn logi1() -> Fixture {
    let mut rng = Rng::new(4101);
    let (x, y) = synth_classification(200, 10, 1.0, 1.0, &mut rng).expect("valid fixture");
    Fixture {
        name: "logi1",
        problem: Box::new(LogisticRegression::new(x, y, 0.1).expect("valid fixture")),
    }
}

/// Synthetic logistic regression, 300 samples, 20 features, λ = 1/n.
pub fn logi2() -> Fixture {
    let mut rng = Rng::new(4102);
    let (x, y) = synth_classification(300, 20, 0.5, 0.6, &mut rng).expect("valid fixture");
    Fixture {
        name: "logi2",
        problem: Box::new(LogisticRegression::new(x, y, 1.0 / 300.0).expect("valid fixture")),
    }
}

/// Synthetic nonlinear least squares (sigmoid model, nonconvex), 200 samples,
/// 10 features.
pub fn nls1() -> Fixture {
    let mut rng = Rng::new(4103);
    let (x, y) = synth_classification(200, 10, 1.0, 1.0, &mut rng).expect("valid fixture");
    Fixture {
        name: "nls1",
        problem: Box::new(
            NonlinearLeastSquares::from_pm_labels(x, &y, false).expect("valid fixture"),
        ),
    }
}

/// The full battery in report order.
pub fn battery() -> Vec<Fixture> {
    vec![quad1(), quad2(), logi1(), logi2(), nls1()]
}
