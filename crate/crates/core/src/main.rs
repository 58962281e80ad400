//! Batch CLI for the Robin-coefficient inversion experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use robin_inverse::error::Error;
use robin_inverse::harness::{
    self, forward_convergence_report, parse_config_file, reproduce_tables, TableOptions,
};
use robin_inverse::sampler::AcceptanceMode;

#[derive(Parser)]
#[command(
    name = "robin-inverse",
    about = "Bayesian reconstruction of a time-dependent Robin coefficient \
             from noisy boundary temperature data",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModeArg {
    /// Acceptance potential: standard-pcn or paper-literal.
    #[arg(long, value_parser = AcceptanceMode::parse)]
    mode: Option<AcceptanceMode>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single experiment described by a config file.
    Run {
        /// Path to a `key = value` experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Override the chain seed of the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory of the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        mode: ModeArg,
    },
    /// Reproduce the reference tables: 3 priors x 3 noise levels per example.
    Tables {
        /// Which example to sweep: 1, 2, 3 or all.
        #[arg(long, default_value = "all")]
        which: String,
        /// Comma-separated chain/data seeds, one experiment per seed.
        #[arg(long, default_value = "1,2,3", value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Output directory for per-experiment artifacts and table files.
        #[arg(long, default_value = "tables")]
        out: PathBuf,
        /// Concurrent experiments.
        #[arg(long, default_value_t = 2)]
        workers: usize,
        /// Chain length per experiment.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Fixed pCN step size for both phases; defaults to the per-example
        /// reference values.
        #[arg(long)]
        beta: Option<f64>,
        #[command(flatten)]
        mode: ModeArg,
    },
    /// Manufactured-solution convergence report for the forward solver.
    ForwardCheck {
        /// Optional directory for a CSV copy of the report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Persistence property suite: pairing oracle and the TV identity.
    PhCheck,
}

fn parse_which(which: &str) -> Result<Vec<u8>, Error> {
    match which {
        "all" => Ok(vec![1, 2, 3]),
        "1" => Ok(vec![1]),
        "2" => Ok(vec![2]),
        "3" => Ok(vec![3]),
        other => Err(Error::Config(format!(
            "--which must be 1, 2, 3 or all, got {other:?}"
        ))),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            mode,
        } => {
            let mut cfg = parse_config_file(&config)?;
            if let Some(seed) = seed {
                cfg.sampler.seed = seed;
            }
            if let Some(out) = out {
                cfg.out_dir = out;
            }
            if let Some(mode) = mode.mode {
                cfg.sampler.mode = mode;
            }
            let output = harness::run_experiment(&cfg)?;
            let row = &output.row;
            let lambda = row
                .lambda_hat
                .map(|l| format!("{l:.4}"))
                .unwrap_or_else(|| "/".into());
            println!(
                "example {} eps {} prior {}: lambda_hat {} e_r {:.4} acceptance {:.3} ({:.1}s)",
                row.example_id,
                row.epsilon,
                row.prior,
                lambda,
                row.e_r,
                row.acceptance_rate,
                row.wall_time.as_secs_f64()
            );
            println!("artifacts written to {}", cfg.out_dir.display());
            Ok(())
        }
        Command::Tables {
            which,
            seeds,
            out,
            workers,
            samples,
            beta,
            mode,
        } => {
            let which = parse_which(&which)?;
            let opts = TableOptions {
                out_dir: out.clone(),
                workers,
                mode: mode.mode.unwrap_or(AcceptanceMode::StandardPcn),
                n_samples: samples,
                beta,
            };
            let cells = reproduce_tables(&which, &seeds, &opts)?;
            println!("epsilon  prior         lambda_hat  e_r");
            for cell in &cells {
                let lambda = cell
                    .mean_lambda_hat
                    .map(|l| format!("{l:10.4}"))
                    .unwrap_or_else(|| format!("{:>10}", "/"));
                println!(
                    "ex{} {:5} {:13} {} {:8.4}",
                    cell.example_id, cell.epsilon, cell.prior, lambda, cell.mean_e_r
                );
            }
            println!("table files written to {}", out.display());
            Ok(())
        }
        Command::ForwardCheck { out } => {
            let rows = forward_convergence_report()?;
            let mut csv = String::from("example_id,coarse_error,fine_error,order\n");
            println!("example  max_rel_err(100x200)  max_rel_err(200x400)  order");
            let mut ok = true;
            for row in &rows {
                println!(
                    "{:7}  {:20.3e}  {:20.3e}  {:5.2}",
                    row.example_id, row.coarse_error, row.fine_error, row.order
                );
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    row.example_id, row.coarse_error, row.fine_error, row.order
                ));
                ok &= row.coarse_error <= 1e-2 && row.order >= 1.8;
            }
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("forward_check.csv"), csv)?;
            }
            if !ok {
                return Err(Error::InvalidArgument {
                    what: "forward solver",
                    detail: "convergence contract violated (error > 1e-2 or order < 1.8)".into(),
                });
            }
            println!("forward solver convergence contract satisfied");
            Ok(())
        }
        Command::PhCheck => {
            let alphabet = [0.0, 1.0, 2.0, 3.0];
            let checked = harness::phcheck::exhaustive_oracle_comparison(&alphabet, 8).map_err(
                |m| Error::InvalidArgument {
                    what: "persistence pairing",
                    detail: m,
                },
            )?;
            println!("pairing oracle: {checked} sequences over a 4-value alphabet match");
            let dev = harness::phcheck::tv_identity_max_deviation(1000, 2024);
            println!("TV identity: max relative deviation {dev:.3e} over 1000 random sequences");
            if dev > 1e-12 {
                return Err(Error::InvalidArgument {
                    what: "persistent distance",
                    detail: format!("TV identity deviation {dev:.3e} exceeds 1e-12"),
                });
            }
            println!("persistence property suite satisfied");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help and version requests are not failures
            if err.use_stderr() {
                eprintln!("{err}");
                return ExitCode::from(1);
            }
            print!("{err}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
