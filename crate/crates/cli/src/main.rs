use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use flowkit::NetworkOptions;
use flowkit_cli::bench;
use flowkit_cli::buildflow;
use flowkit_cli::songflow::{self, SongflowConfig};
use flowkit_cli::CliError;

#[derive(Parser)]
#[command(
    name = "flowkit",
    version,
    about = "Run flowkit circuits as process networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Speedup,
    Scaling,
}

#[derive(Subcommand)]
enum Command {
    /// Top-ten songs and artists over synthetic monthly listening data.
    Songflow {
        /// Rows per month.
        #[arg(long, default_value_t = 1000)]
        inputs: usize,
        #[arg(long, default_value = "./flowkit-out")]
        workdir: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Evaluate with the sequential interpreter instead of a network.
        #[arg(long)]
        serial: bool,
        /// Print the network topology and exit.
        #[arg(long)]
        dump_topology: bool,
        /// Bound every pipe to this many messages.
        #[arg(long)]
        max_queue: Option<usize>,
        /// Simulated work per aggregated row, in microseconds.
        #[arg(long, default_value_t = 0)]
        row_cost_us: u64,
    },
    /// Run a YAML-configured command pipeline over a list of files.
    Buildflow {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "./flowkit-out")]
        workdir: PathBuf,
        /// Print the circuit and exit.
        #[arg(long)]
        explain: bool,
        #[arg(long)]
        max_queue: Option<usize>,
    },
    /// Time the network against the sequential interpreter.
    Bench {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        /// Comma-separated sizes for the scaling suite.
        #[arg(long, value_delimiter = ',', default_values_t = bench::SCALING_SIZES)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        row_cost_us: u64,
        #[arg(long, default_value = "./flowkit-out")]
        workdir: PathBuf,
        /// Also write the raw samples to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check the circuit laws on generated cases.
    Props {
        #[arg(long, default_value_t = 500)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn options(max_queue: Option<usize>) -> NetworkOptions {
    NetworkOptions { max_queue }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Songflow {
            inputs,
            workdir,
            seed,
            serial,
            dump_topology,
            max_queue,
            row_cost_us,
        } => {
            let row_cost = Duration::from_micros(row_cost_us);
            if dump_topology {
                print!("{}", songflow::song_topology(row_cost, &workdir)?);
                return Ok(());
            }
            let mut cfg = SongflowConfig::new(workdir, inputs, seed);
            cfg.serial = serial;
            cfg.row_cost = row_cost;
            cfg.options = options(max_queue);
            let out = songflow::run_songflow(&cfg)?;
            println!("{}", out.top_songs.display());
            println!("{}", out.top_artists.display());
            eprintln!("elapsed {:.1} ms", out.elapsed.as_secs_f64() * 1000.0);
        }
        Command::Buildflow {
            config,
            workdir,
            explain,
            max_queue,
        } => {
            if explain {
                print!("{}", buildflow::explain(&config, &workdir)?);
                return Ok(());
            }
            let out = buildflow::run_buildflow(&config, &workdir, options(max_queue))?;
            println!("{}", out.display());
        }
        Command::Bench {
            suite,
            repeats,
            sizes,
            row_cost_us,
            workdir,
            csv,
        } => {
            let repeats = repeats.max(1);
            let samples = match suite {
                Suite::Speedup => bench::speedup(repeats, NetworkOptions::default())?,
                Suite::Scaling => bench::scaling(
                    &sizes,
                    repeats,
                    Duration::from_micros(row_cost_us),
                    &workdir,
                    NetworkOptions::default(),
                )?,
            };
            print!("{}", bench::to_table(&samples));
            match suite {
                Suite::Speedup => {
                    println!("parallel/serial = {:.3}", bench::speedup_ratio(&samples));
                }
                Suite::Scaling => {
                    let (fit, ratio) = bench::scaling_summary(&samples);
                    println!(
                        "fit: wall_ms = {:.4} * n + {:.2} (r2 = {:.4}); largest/smallest = {:.2}",
                        fit.slope, fit.intercept, fit.r2, ratio
                    );
                }
            }
            if let Some(path) = csv {
                std::fs::write(&path, bench::to_csv(&samples))
                    .map_err(|e| CliError::io(&path, e))?;
            }
        }
        Command::Props { cases, seed } => print!("{}", flowkit_cli::props(seed, cases)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
