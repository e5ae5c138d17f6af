//! `dirand`: batch front end. Reports go to stdout as JSON, logs to stderr.

mod bell;
mod cover;
mod extractor;
mod protocol;
mod report;
mod tree;

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use dirand::lp::OutputFunction;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::extractor::{ExtractorKind, SweepArgs};
use crate::report::Timer;

#[derive(Parser, Debug)]
#[command(name = "dirand", version, about = "Device-independent randomness toolkit")]
struct Cli {
    /// Run seed; trial i draws from ChaCha20 stream i of this seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Independent protocol trials.
    #[arg(long, global = true, default_value_t = 1)]
    trials: u64,
    /// Also write a per-trial CSV summary (protocol runs only).
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate or bound Bell expressions.
    Bell {
        #[command(subcommand)]
        action: BellAction,
    },
    /// Largest no-signaling guessing probability at a fixed expression value.
    Guess {
        expression: String,
        #[arg(allow_hyphen_values = true)]
        value: f64,
        /// Input tuple, e.g. 1,0,0,0,0. Default: every constrained input.
        #[arg(long, value_delimiter = ',')]
        input: Option<Vec<usize>>,
        /// Full output tuple. Default: every output tuple.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["majority", "parity"])]
        output: Option<Vec<usize>>,
        /// Guess the majority of these parties' outputs.
        #[arg(long, value_delimiter = ',', conflicts_with = "parity")]
        majority: Option<Vec<usize>>,
        /// Guess the parity of these parties' outputs.
        #[arg(long, value_delimiter = ',')]
        parity: Option<Vec<usize>>,
        /// Guessed function value. Default: both.
        #[arg(long)]
        guess: Option<usize>,
    },
    /// Worst-case extractor sweeps over flat sources.
    Extractor {
        #[arg(value_enum)]
        extractor: ExtractorKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        kx: Option<usize>,
        #[arg(long)]
        ky: Option<usize>,
        /// DEOR output bits.
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Universal-hash output bits.
        #[arg(long, default_value_t = 1)]
        l: usize,
        /// Sample this many flat sources instead of enumerating.
        #[arg(long)]
        samples: Option<usize>,
        /// Check that every subset sum of the DEOR matrices is invertible.
        #[arg(long)]
        rank_check: bool,
    },
    /// Verify or construct hash families covering all 4-subsets.
    HashCover {
        #[command(subcommand)]
        action: CoverAction,
    },
    /// Run a protocol configuration.
    Protocol { config: PathBuf },
    /// Cheating-tree leaf counts and single-device bounds.
    Tree {
        #[arg(long, default_value_t = 20)]
        max_depth: usize,
        #[arg(long, value_delimiter = ',')]
        rates: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        rounds: usize,
    },
}

#[derive(Subcommand, Debug)]
enum BellAction {
    Eval { expression: String, behavior: PathBuf },
    Bounds {
        expression: String,
        /// Skip the no-signaling LP.
        #[arg(long)]
        skip_lp: bool,
    },
}

#[derive(Subcommand, Debug)]
enum CoverAction {
    Verify {
        family: PathBuf,
        /// Random quadruples checked when n is too large to enumerate.
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    Construct {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        target: Option<usize>,
    },
}

pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    serde_json::from_reader(BufReader::new(f)).with_context(|| format!("cannot parse {}", path.display()))
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("DIRAND_THREADS") {
        let n: usize = v.parse().with_context(|| format!("DIRAND_THREADS={v} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn write_csv(path: &Path, rows: &[protocol::CsvRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn execute(cli: Cli) -> Result<report::RunReport> {
    let timer = Timer::start();
    let seed = cli.seed;
    let (name, config, payload): (&str, Value, Value) = match cli.command {
        Command::Bell { action } => match action {
            BellAction::Eval { expression, behavior } => (
                "bell eval",
                json!({ "expression": expression, "behavior": behavior }),
                bell::eval(&expression, &behavior)?,
            ),
            BellAction::Bounds { expression, skip_lp } => (
                "bell bounds",
                json!({ "expression": expression, "skip_lp": skip_lp }),
                bell::bounds(&expression, skip_lp)?,
            ),
        },
        Command::Guess {
            expression,
            value,
            input,
            output,
            majority,
            parity,
            guess,
        } => {
            let function = majority
                .map(|parties| OutputFunction::Majority { parties })
                .or(parity.map(|parties| OutputFunction::Parity { parties }));
            let config = json!({
                "expression": expression, "value": value, "input": input,
                "output": output, "function": function, "guess": guess,
            });
            let args = bell::GuessArgs {
                expression,
                value,
                input,
                output,
                function,
                guess,
            };
            ("guess", config, bell::guess(&args)?)
        }
        Command::Extractor {
            extractor,
            n,
            kx,
            ky,
            m,
            l,
            samples,
            rank_check,
        } => {
            let args = SweepArgs {
                extractor,
                n,
                k_x: kx,
                k_y: ky,
                m,
                l,
                samples,
                rank_check,
            };
            ("extractor", serde_json::to_value(&args)?, extractor::sweep(&args, seed)?)
        }
        Command::HashCover { action } => match action {
            CoverAction::Verify { family, samples } => (
                "hash-cover verify",
                json!({ "family": family, "samples": samples }),
                cover::verify(&family, samples, seed)?,
            ),
            CoverAction::Construct { n, target } => (
                "hash-cover construct",
                json!({ "n": n, "target": target }),
                cover::construct(n, target, seed)?,
            ),
        },
        Command::Protocol { config } => {
            let cfg: protocol::ProtocolConfig = read_json(&config)?;
            let echo = json!({ "file": config, "trials": cli.trials, "protocol": cfg });
            log(&format!("running {} trial(s) from {}", cli.trials, config.display()));
            let (payload, rows) = protocol::run(cfg, seed, cli.trials)?;
            if let Some(path) = &cli.csv {
                write_csv(path, &rows)?;
            }
            ("protocol", echo, payload)
        }
        Command::Tree {
            max_depth,
            rates,
            rounds,
        } => (
            "tree",
            json!({ "max_depth": max_depth, "rates": rates, "rounds": rounds }),
            tree::report(max_depth, &rates, rounds)?,
        ),
    };
    Ok(timer.finish(name, config, seed, payload))
}

fn log(msg: &str) {
    eprintln!("dirand: {msg}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| execute(cli)).and_then(|report| {
        println!("{}", serde_json::to_string_pretty(&report)?);
        Ok(report)
    });
    match result {
        Ok(report) => {
            log(&format!("{} finished in {:.3} s", report.command, report.wall_time));
            ExitCode::SUCCESS
        }
        Err(e) => {
            log(&format!("error: {e:#}"));
            ExitCode::FAILURE
        }
    }
}
