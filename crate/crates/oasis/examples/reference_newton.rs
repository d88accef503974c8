//! High-accuracy reference solutions: diagonal quadratics solve in closed
//! form, everything else runs damped Newton with conjugate-gradient inner
//! solves and Armijo backtracking until the squared gradient norm reaches
//! 1e-16. These solutions anchor every optimality-gap metric in the
//! experiment harness.

use oasis::dataio::synth_classification;
use oasis::error::Result;
use oasis::harness::{reference_solve, REFERENCE_GRAD_TOL};
use oasis::linalg::{self, Rng};
use oasis::problems::{LogisticRegression, Objective, Quadratic, QuadraticMatrix};

fn main() -> Result<()> {
    // Closed form: no iterations at all.
    let quad = Quadratic::new(QuadraticMatrix::Diagonal(vec![2.0, 8.0]), vec![2.0, 8.0])?;
    let solution = reference_solve(&quad)?;
    println!(
        "diagonal quadratic: w* = {:?}, F* = {}, {} iterations (closed form)",
        solution.w_star, solution.f_star, solution.iterations
    );

    // Dense quadratic: Newton-CG lands on the solution in one step.
    let dense = Quadratic::new(
        QuadraticMatrix::Dense(vec![vec![2.0, 1.0], vec![1.0, 3.0]]),
        vec![1.0, 2.0],
    )?;
    let solution = reference_solve(&dense)?;
    println!(
        "dense quadratic:    w* = ({:.12}, {:.12}), F* = {:.12}, {} iteration(s)",
        solution.w_star[0], solution.w_star[1], solution.f_star, solution.iterations
    );

    // A real problem: regularized logistic regression.
    let mut rng = Rng::new(5);
    let (x, y) = synth_classification(200, 10, 1.0, 1.0, &mut rng)?;
    let problem = LogisticRegression::new(x, y, 0.005)?;
    let solution = reference_solve(&problem)?;
    let grad = problem.gradient(&solution.w_star, None);
    println!(
        "logistic n=200 d=10: F* = {:.15}, |grad|^2 = {:.3e} (tolerance {:.0e}), \
         {} iterations",
        solution.f_star,
        linalg::norm_sq(&grad),
        REFERENCE_GRAD_TOL,
        solution.iterations
    );
    Ok(())
}
