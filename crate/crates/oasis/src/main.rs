//! Command-line front end: a thin dispatcher over the library.
//!
//! Subcommands: `run` (experiment from a manifest), `fidelity` (diagonal
//! estimator comparison), `verify` (theory-check battery), `reference`
//! (high-accuracy solve), `plot` (CSV to SVG). Exit codes: 0 success,
//! 1 configuration error, 2 runtime failure (abort, non-convergence, I/O).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Arg, ArgMatches, Command};

use oasis::error::{OasisError, Result};
use oasis::harness::{
    self, diag_fidelity_experiment, plot_svg_file, read_runs_csv_file, reference_solve,
    write_fidelity_csv_file, write_runs_csv_file, FidelityConfig, Manifest, PlotMetric,
};
use oasis::problems::Curvature;
use oasis::verify;

fn cli() -> Command {
    Command::new("oasis")
        .about("Adaptive preconditioned optimization: experiments, estimator fidelity, theory checks")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(
            Command::new("run")
                .about("Run the experiment described by a manifest; write per-iteration CSV logs")
                .arg(
                    Arg::new("config")
                        .long("config")
                        .value_name("FILE")
                        .required(true)
                        .help("Experiment manifest (flat key = value text)"),
                )
                .arg(
                    Arg::new("seed-count")
                        .long("seed-count")
                        .value_name("N")
                        .value_parser(clap::value_parser!(usize))
                        .help("Replace the manifest's seed list with 1..=N"),
                )
                .arg(
                    Arg::new("out")
                        .long("out")
                        .value_name("DIR")
                        .default_value(".")
                        .help("Directory for runs.csv"),
                ),
        )
        .subcommand(
            Command::new("fidelity")
                .about("Compare diagonal estimators against the true diagonal of a random symmetric matrix")
                .arg(
                    Arg::new("dim")
                        .long("dim")
                        .value_name("D")
                        .default_value("100")
                        .value_parser(clap::value_parser!(usize)),
                )
                .arg(
                    Arg::new("iters")
                        .long("iters")
                        .value_name("T")
                        .default_value("500")
                        .value_parser(clap::value_parser!(usize))
                        .help("Number of probe samples"),
                )
                .arg(
                    Arg::new("beta2")
                        .long("beta2")
                        .value_name("B")
                        .default_value("0.99")
                        .value_parser(clap::value_parser!(f64)),
                )
                .arg(
                    Arg::new("alpha")
                        .long("alpha")
                        .value_name("A")
                        .default_value("1e-8")
                        .value_parser(clap::value_parser!(f64))
                        .help("Clamp floor of the EMA estimator"),
                )
                .arg(
                    Arg::new("seed")
                        .long("seed")
                        .value_name("S")
                        .default_value("1")
                        .value_parser(clap::value_parser!(u64)),
                )
                .arg(
                    Arg::new("out")
                        .long("out")
                        .value_name("FILE")
                        .default_value("fidelity.csv"),
                ),
        )
        .subcommand(
            Command::new("verify")
                .about("Run the empirical theory-check battery")
                .arg(
                    Arg::new("suite")
                        .long("suite")
                        .value_name("NAME")
                        .default_value("all")
                        .help("`all` or a single check id (see README)"),
                )
                .arg(
                    Arg::new("out")
                        .long("out")
                        .value_name("FILE")
                        .default_value("verify_report.csv")
                        .help("CSV report path (text report goes to stdout)"),
                ),
        )
        .subcommand(
            Command::new("reference")
                .about("Solve the manifest's problem to high accuracy and print the solution")
                .arg(
                    Arg::new("config")
                        .long("config")
                        .value_name("FILE")
                        .required(true),
                ),
        )
        .subcommand(
            Command::new("plot")
                .about("Render a runs CSV to an SVG line chart")
                .arg(
                    Arg::new("metric")
                        .long("metric")
                        .value_name("M")
                        .default_value("gap")
                        .help("gap, f, grad_norm_sq, or eta"),
                )
                .arg(Arg::new("in").long("in").value_name("CSV").required(true))
                .arg(Arg::new("out").long("out").value_name("SVG").required(true))
                .arg(
                    Arg::new("title")
                        .long("title")
                        .value_name("TEXT")
                        .help("Chart title (defaults to the metric name)"),
                ),
        )
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            // Help and version displays are successes; everything else is a
            // configuration error under this binary's exit-code contract.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match matches.subcommand() {
        Some(("run", m)) => cmd_run(m),
        Some(("fidelity", m)) => cmd_fidelity(m),
        Some(("verify", m)) => cmd_verify(m),
        Some(("reference", m)) => cmd_reference(m),
        Some(("plot", m)) => cmd_plot(m),
        _ => unreachable!("subcommand is required"),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// 1 for configuration problems, 2 for failures at run time.
fn exit_code_for(e: &OasisError) -> u8 {
    match e {
        OasisError::Config(_)
        | OasisError::Parse { .. }
        | OasisError::Dimension(_)
        | OasisError::NotApplicable(_) => 1,
        _ => 2,
    }
}

fn cmd_run(m: &ArgMatches) -> Result<ExitCode> {
    let mut manifest = Manifest::load(m.get_one::<String>("config").unwrap())?;
    if let Some(count) = m.get_one::<usize>("seed-count") {
        manifest.set_seed_count(*count)?;
    }
    let out_dir = PathBuf::from(m.get_one::<String>("out").unwrap());
    let problem = manifest.build_problem()?;
    let config = manifest.build_experiment()?;

    // Optimality gaps need a reference solution, which only strongly convex
    // problems define; failure to converge disables gaps rather than
    // fabricating them.
    let reference = match problem.curvature()? {
        Curvature::StronglyConvex { .. } => match reference_solve(problem.as_ref()) {
            Ok(r) => Some(r),
            Err(e @ OasisError::NoConvergence { .. }) => {
                eprintln!("note: reference solve failed ({e}); gap columns disabled");
                None
            }
            Err(e) => return Err(e),
        },
        Curvature::SmoothOnly { .. } => None,
    };

    let records = harness::run_experiment(problem.as_ref(), &config, reference.as_ref())?;
    if !out_dir.as_os_str().is_empty() && !out_dir.exists() {
        std::fs::create_dir_all(&out_dir)?;
    }
    let csv_path = out_dir.join("runs.csv");
    write_runs_csv_file(&records, &csv_path)?;

    let mut any_aborted = false;
    for record in &records {
        let last = record.rows.last().expect("every record has rows");
        let flag = if record.aborted {
            any_aborted = true;
            " ABORTED"
        } else {
            ""
        };
        println!(
            "seed {:>3}: {} rows, {:.1} passes, final F {:.6e}, gap {:.6e}, |grad|^2 {:.6e}{flag}",
            record.seed,
            record.rows.len(),
            last.passes,
            last.f,
            last.gap,
            last.grad_norm_sq
        );
    }
    println!("wrote {}", csv_path.display());
    if any_aborted {
        eprintln!("error: at least one seed aborted with a non-finite iterate or objective");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_fidelity(m: &ArgMatches) -> Result<ExitCode> {
    let config = FidelityConfig {
        dim: *m.get_one::<usize>("dim").unwrap(),
        samples: *m.get_one::<usize>("iters").unwrap(),
        beta2: *m.get_one::<f64>("beta2").unwrap(),
        alpha: *m.get_one::<f64>("alpha").unwrap(),
        seed: *m.get_one::<u64>("seed").unwrap(),
    };
    let rows = diag_fidelity_experiment(&config)?;
    let out = Path::new(m.get_one::<String>("out").unwrap());
    write_fidelity_csv_file(&rows, out)?;
    let last = rows.last().expect("samples >= 1 is validated");
    println!(
        "after {} samples (dim {}, beta2 {}): relative error vs true diagonal — \
         running mean {:.4e}, clamped EMA {:.4e}, root-mean-square EMA {:.4e}",
        config.samples,
        config.dim,
        config.beta2,
        last.mean_vs_diag,
        last.oasis_vs_diag,
        last.adahessian_vs_diag
    );
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(m: &ArgMatches) -> Result<ExitCode> {
    let suite = m.get_one::<String>("suite").unwrap();
    let report = verify::run_suite(suite)?;
    print!("{}", report.render());
    let out = Path::new(m.get_one::<String>("out").unwrap());
    std::fs::write(out, report.to_csv())?;
    println!("wrote {}", out.display());
    if report.all_passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: theory checks reported violations");
        Ok(ExitCode::from(2))
    }
}

fn cmd_reference(m: &ArgMatches) -> Result<ExitCode> {
    let manifest = Manifest::load(m.get_one::<String>("config").unwrap())?;
    let problem = manifest.build_problem()?;
    let solution = reference_solve(problem.as_ref())?;
    println!(
        "solved to |grad|^2 = {:.6e} in {} outer iterations",
        solution.grad_norm_sq, solution.iterations
    );
    println!("F* = {:.17e}", solution.f_star);
    let shown = solution.w_star.len().min(10);
    for (i, v) in solution.w_star.iter().take(shown).enumerate() {
        println!("w*[{i}] = {v:.17e}");
    }
    if solution.w_star.len() > shown {
        println!("... ({} more coordinates)", solution.w_star.len() - shown);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_plot(m: &ArgMatches) -> Result<ExitCode> {
    let metric_name = m.get_one::<String>("metric").unwrap();
    let metric = PlotMetric::from_name(metric_name).ok_or_else(|| {
        OasisError::Config(format!(
            "unknown metric `{metric_name}` (expected gap, f, grad_norm_sq, or eta)"
        ))
    })?;
    let input = m.get_one::<String>("in").unwrap();
    let out = m.get_one::<String>("out").unwrap();
    let records = read_runs_csv_file(Path::new(input))?;
    let title = match m.get_one::<String>("title") {
        Some(t) => t.clone(),
        None => format!("{} by effective passes", metric.name()),
    };
    plot_svg_file(&records, metric, &title, Path::new(out))?;
    println!("wrote {out}");
    Ok(ExitCode::SUCCESS)
}
