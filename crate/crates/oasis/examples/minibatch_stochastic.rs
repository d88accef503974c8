//! Mini-batch training through the experiment harness: the adaptive method
//! tunes its own step size on stochastic gradients and stochastic curvature
//! probes, while SGD gets the classic hand-built recipe — a tuned step plus
//! a tenfold decay at epoch 15. Logging happens at epoch boundaries, and
//! pass accounting charges each gradient and probe by its batch fraction.

use oasis::dataio::synth_classification;
use oasis::error::Result;
use oasis::harness::{
    reference_solve, run_experiment, ExperimentConfig, MethodSpec, ScheduleEntry,
};
use oasis::linalg::Rng;
use oasis::problems::LogisticRegression;

fn main() -> Result<()> {
    let mut rng = Rng::new(11);
    let (x, y) = synth_classification(500, 25, 1.0, 0.9, &mut rng)?;
    let problem = LogisticRegression::new(x, y, 1.0 / 500.0)?;
    let reference = reference_solve(&problem)?;

    let mut adaptive = ExperimentConfig::new(MethodSpec::from_name("oasis")?);
    adaptive.batch_size = Some(50); // 10 steps per epoch
    adaptive.length = 25; // epochs
    adaptive.seeds = vec![1];
    adaptive.hyper.eta0 = 1e-3;

    // Step decay is how a fixed-step method copes with gradient noise:
    // without it SGD stalls at the noise floor of its initial step.
    let mut decayed_sgd = adaptive.clone();
    decayed_sgd.method = MethodSpec::from_name("sgd")?;
    decayed_sgd.hyper.eta0 = 0.5;
    decayed_sgd.schedule = vec![ScheduleEntry {
        at: 15,
        factor: 0.1,
    }];

    let oasis_rows = run_experiment(&problem, &adaptive, Some(&reference))?
        .remove(0)
        .rows;
    let sgd_rows = run_experiment(&problem, &decayed_sgd, Some(&reference))?
        .remove(0)
        .rows;

    println!("               --- adaptive ---------------------   --- sgd + decay at 15 ---");
    println!("epoch  passes  gap          eta          accuracy   gap          eta");
    for (a, s) in oasis_rows.iter().zip(&sgd_rows) {
        println!(
            "{:>5} {:>7.1}  {:<12.4e} {:<12.4e} {:<8.3}   {:<12.4e} {:<12.4e}",
            a.iter / 10,
            a.passes,
            a.gap,
            a.eta,
            a.accuracy,
            s.gap,
            s.eta
        );
    }
    println!(
        "\nthe trade-off in one table: the adaptive method finds a working step in \
         one epoch with zero tuning and holds its noise plateau from there, while \
         sgd descends further — but only because both the step 0.5 and the epoch-15 \
         cut (watch its eta column) were picked by hand for this problem. adaptive \
         passes advance by 3 x batch/n per step (gradient + probe), sgd by batch/n."
    );
    Ok(())
}
