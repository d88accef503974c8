//! Backtracking line search along the preconditioned descent direction:
//! each iteration tries `eta_init` and shrinks by `tau` until the Armijo
//! sufficient-decrease test accepts. On a dense ill-conditioned quadratic
//! the diagonal preconditioner is only an approximation of the Hessian,
//! so the unit step is sometimes too bold — backtracking pays a few extra
//! objective evaluations to keep every step safe, with no tuning.

use oasis::error::Result;
use oasis::linalg::{norm_sq, Rng};
use oasis::optimizers::{BatchSpec, Hyper, OasisMode, OasisOptimizer, Optimizer};
use oasis::problems::{Objective, Quadratic, QuadraticMatrix};

fn main() -> Result<()> {
    // A dense symmetric positive-definite Hessian H = B B^T + 0.1 I with
    // wildly uneven diagonal entries: diagonal preconditioning helps a lot
    // but cannot capture the off-diagonal coupling.
    let d = 10;
    let mut rng = Rng::new(3);
    let b_mat: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let scale = 10f64.powi(i as i32 % 2);
            (0..d).map(|_| scale * rng.standard_normal()).collect()
        })
        .collect();
    let rows: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let mut h: f64 = (0..d).map(|k| b_mat[i][k] * b_mat[j][k]).sum();
                    if i == j {
                        h += 0.1;
                    }
                    h
                })
                .collect()
        })
        .collect();
    let problem = Quadratic::new(QuadraticMatrix::Dense(rows), vec![1.0; d])?;

    let w0: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
    let mode = OasisMode::LineSearch {
        eta_init: 1.0,
        c1: 1e-4,
        tau: 0.5,
    };
    let hyper = Hyper {
        alpha: 1e-6,
        ..Hyper::default()
    };
    let mut search = OasisOptimizer::new(&problem, w0.clone(), mode, hyper.clone(), &mut rng)?;

    // The blind alternative: the same unit step applied without any check.
    let mut fixed = OasisOptimizer::new(
        &problem,
        w0,
        OasisMode::Fixed,
        Hyper { eta0: 1.0, ..hyper },
        &mut rng,
    )?;

    let batch = BatchSpec::full();
    let f0 = problem.value(search.w(), None);
    println!("dense quadratic, d = {d}; line search vs the same unit step applied blindly");
    println!("iter   F(line search)  accepted eta  f evals | F(fixed eta = 1)");
    for k in 0..20 {
        let info = search.step(&problem, &mut rng, &batch)?;
        fixed.step(&problem, &mut rng, &batch)?;
        println!(
            "{k:>4}   {:<15.6e} {:<13.4} {:>7} | {:<.6e}",
            problem.value(search.w(), None),
            info.eta,
            info.f_evals,
            problem.value(fixed.w(), None),
        );
    }
    let f_search = problem.value(search.w(), None);
    let f_fixed = problem.value(fixed.w(), None);
    println!(
        "\nstarted at F = {f0:.3e}; line search reached {f_search:.3e} \
         ({:.1} effective passes), the unchecked unit step {}",
        search.passes(),
        if f_fixed > f0 {
            format!("diverged to {f_fixed:.3e}")
        } else {
            format!("reached {f_fixed:.3e}")
        },
    );
    println!(
        "final |grad|^2: line search {:.3e}, fixed {:.3e}",
        norm_sq(&problem.gradient(search.w(), None)),
        norm_sq(&problem.gradient(fixed.w(), None)),
    );
    Ok(())
}
