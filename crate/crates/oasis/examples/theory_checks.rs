//! Run the full empirical verification battery: every provable property of
//! the optimizer family — step-size bounds, spectrum floors, EMA drift
//! bounds, geometric rates, averaged-gradient bounds, potential
//! contraction, method equivalences, stochastic plateaus — re-checked
//! numerically on five fixtures and three seeds, with negative controls
//! proving the checkers can detect violations.

use oasis::error::Result;
use oasis::verify;

fn main() -> Result<()> {
    let report = verify::run_suite("all")?;
    print!("{}", report.render());
    if !report.all_passed() {
        std::process::exit(2);
    }
    Ok(())
}
