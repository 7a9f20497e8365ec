use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use signdesc::error::Error;
use signdesc::harness::{
    self, canned, emit_bound_tables, list_experiments, run_experiment, ExperimentConfig,
};
use signdesc::probes::probe_point;
use signdesc::problems::{
    counterexample_problem, quadratic_problem, rosenbrock, rosenbrock_component_oracle, Objective,
    Oracle,
};
use signdesc::rng::RandomSource;
use signdesc::DenseVector;

#[derive(Parser)]
#[command(
    name = "signdesc",
    version,
    about = "Sign-based stochastic optimization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file or the canned registry
    Run(RunArgs),
    /// List the canned experiments
    List,
    /// Write the analytical bound tables as CSV
    Bounds {
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte-Carlo probe of success probabilities and moments at a point
    Probe(ProbeArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to a TOML experiment config
    config: Option<PathBuf>,
    /// Canned experiment id (see `list`)
    #[arg(long, conflicts_with = "config")]
    id: Option<String>,
    /// Base seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Repetition count override
    #[arg(long)]
    reps: Option<usize>,
    /// Output directory (default: config, then $SIGNDESC_OUT, then ./signdesc-out)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProbeArgs {
    /// Problem id: rosenbrock | counterexample | quadratic
    #[arg(long)]
    id: String,
    /// Probe point as a comma-separated list, e.g. --point 1.0,-0.5
    #[arg(long)]
    point: String,
    /// Monte-Carlo sample count
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Oracle noise scale (per-coordinate standard deviation)
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    /// RNG seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidConfig(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn dispatch(cli: Cli) -> signdesc::Result<()> {
    match cli.command {
        Command::Run(args) => run_command(args),
        Command::List => {
            print!("{}", list_experiments());
            Ok(())
        }
        Command::Bounds { out } => {
            emit_bound_tables(&out)?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Probe(args) => probe_command(args),
    }
}

fn run_command(args: RunArgs) -> signdesc::Result<()> {
    let configs: Vec<ExperimentConfig> = match (&args.config, &args.id) {
        (Some(path), None) => vec![ExperimentConfig::load(path)?],
        (None, Some(id)) => {
            let exp = canned(id).ok_or_else(|| {
                Error::config(format!(
                    "unknown experiment id `{id}`; valid ids:\n{}",
                    list_experiments()
                ))
            })?;
            if exp.configs.is_empty() {
                // table-only experiments write the bound tables instead
                let dir = harness::resolve_out_dir(args.out.as_deref(), None);
                std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
                    path: dir.display().to_string(),
                    source: e,
                })?;
                let path = dir.join(format!("{id}.csv"));
                emit_bound_tables(&path)?;
                println!("wrote {}", path.display());
                return Ok(());
            }
            exp.configs
        }
        _ => {
            return Err(Error::config(
                "pass exactly one of a config file or --id <canned-id>",
            ))
        }
    };
    for mut config in configs {
        if let Some(seed) = args.seed {
            config.seed = seed;
        }
        if let Some(reps) = args.reps {
            config.reps = reps;
        }
        config.validate()?;
        let out_dir = harness::resolve_out_dir(args.out.as_deref(), config.out.as_deref());
        let summary = run_experiment(&config, &out_dir)?;
        println!(
            "{}: {} reps, final f = {:.6e} +/- {:.6e}, aggregate {}",
            summary.id,
            config.reps,
            summary.final_f_mean,
            summary.final_f_std,
            summary.aggregate_path.display()
        );
    }
    Ok(())
}

fn probe_command(args: ProbeArgs) -> signdesc::Result<()> {
    let point: Vec<f64> = args
        .point
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::config(format!("bad coordinate `{s}` in --point")))
        })
        .collect::<signdesc::Result<_>>()?;
    let x = DenseVector::new(point)?;
    if args.samples < 2 {
        return Err(Error::config("--samples must be at least 2"));
    }
    let (objective, oracle): (std::sync::Arc<dyn Objective>, std::sync::Arc<dyn Oracle>) =
        match args.id.as_str() {
            "rosenbrock" => {
                let d = x.dim();
                (rosenbrock(d)?, rosenbrock_component_oracle(d, args.nu)?)
            }
            "counterexample" => {
                if x.dim() != 2 {
                    return Err(Error::config("counterexample needs a 2-d point"));
                }
                let (f, oracle) = counterexample_problem(0.5)?;
                (f, oracle)
            }
            "quadratic" => {
                let d = x.dim();
                let (f, oracle) = quadratic_problem(vec![1.0; d], vec![args.nu; d])?;
                (f, oracle)
            }
            other => {
                return Err(Error::config(format!(
                    "unknown problem `{other}`; valid: rosenbrock, counterexample, quadratic"
                )))
            }
        };
    let mut rng = RandomSource::new(args.seed);
    let report = probe_point(
        objective.as_ref(),
        oracle.as_ref(),
        &x,
        args.samples,
        &mut rng,
    )?;
    println!(
        "probe of `{}` at {:?} with {} samples (seed {})",
        args.id,
        x.as_slice(),
        args.samples,
        args.seed
    );
    let hw = report.rho_hat.half_widths.as_ref().unwrap();
    println!("coord  gradient        rho_hat (+/- hw)      mean            variance        nu^3");
    #[allow(clippy::needless_range_loop)]
    for i in 0..x.dim() {
        let rho = if report.rho_hat.defined[i] {
            format!("{:.4} ({:.4})", report.rho_hat.probs[i], hw[i])
        } else {
            "undefined (g_i = 0)".into()
        };
        let m = &report.moments[i];
        println!(
            "{i:>5}  {:>14.6e}  {rho:<20}  {:>14.6e}  {:>14.6e}  {:>14.6e}",
            report.gradient[i], m.mean, m.variance, m.third_central
        );
    }
    if report.bound_checks.is_empty() {
        println!("no applicable analytical bounds at this point");
    } else {
        println!("bound checks (empirical + half-width vs analytical lower bound):");
        for check in &report.bound_checks {
            println!(
                "  coord {} {:<15} bound {:>9.6} empirical {:>9.6} margin {:>+10.6} {}",
                check.coordinate,
                check.name,
                check.bound,
                check.empirical,
                check.margin,
                if check.pass { "ok" } else { "VIOLATED" }
            );
        }
    }
    Ok(())
}
