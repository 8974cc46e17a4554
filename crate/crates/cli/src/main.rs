//! `bellkey`: analyse two-qubit states, compute optimal local filters,
//! simulate the filtered entanglement-based QKD protocol and sweep the
//! Gisin family.
//!
//! Exit codes: 0 success, 1 invalid state or parameter, 2 only an X-form
//! normal form exists, 64 usage or parse error.

mod input;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bellkey::filtering::filtered_key_rate;
use bellkey::sim::{run_protocol, FilterSampling, SimConfig, SimReport};
use bellkey::sweep::{gisin_sweep, GridAxis};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::report::{AnalysisReport, FilterReport, XFormReport};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Invalid(String),
    XForm(XFormReport),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::XForm(_) => 2,
            CliError::Usage(_) => 64,
        }
    }
}

impl From<bellkey::Error> for CliError {
    fn from(e: bellkey::Error) -> Self {
        use bellkey::Error as E;
        match e {
            E::XForm(params) => CliError::XForm(XFormReport::new(params)),
            E::Config(_) | E::NoSiftedRounds | E::UnsupportedBases(_) => CliError::Usage(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bellkey", version, about = "Bell violation, key rates and local filtering for two-qubit states")]
struct Cli {
    /// Worker threads for parallel work. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Correlation spectrum, CHSH optimum, QBER, key rate and entanglement.
    Analyze { state_file: PathBuf },
    /// Optimal local filters and the filtered key rate.
    Filter { state_file: PathBuf },
    /// Monte Carlo run of the protocol.
    Simulate {
        state_file: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        rounds: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        with_filtering: bool,
        #[arg(long, default_value_t = bellkey::sim::DEFAULT_CHSH_TEST_FRACTION)]
        chsh_fraction: f64,
        #[arg(long, value_enum, default_value_t = Sampling::Povm)]
        sampling: Sampling,
    },
    /// Grid sweep written as CSV.
    Sweep {
        #[arg(long, value_enum)]
        family: SweepFamily,
        /// `start:end:count`
        #[arg(long)]
        alpha: String,
        /// `start:end:count`
        #[arg(long)]
        mu: String,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Sampling {
    Povm,
    PostSelected,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SweepFamily {
    Gisin,
}

#[derive(Serialize)]
struct SimulationOutput {
    config: SimConfig,
    report: SimReport,
}

fn print(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}").map_err(|e| CliError::Usage(format!("cannot write output: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Analyze { state_file } => {
            let state = input::read_state(&state_file)?;
            print(&report::to_json(&AnalysisReport::of(&state)))
        }
        Command::Filter { state_file } => {
            let state = input::read_state(&state_file)?;
            let out = filtered_key_rate(&state)?;
            print(&report::to_json(&FilterReport::of(&state, &out)))
        }
        Command::Simulate { state_file, rounds, seed, with_filtering, chsh_fraction, sampling } => {
            let state = input::read_state(&state_file)?;
            let mut config = SimConfig::new(rounds, seed).with_filtering(with_filtering);
            config.chsh_test_fraction = chsh_fraction;
            config.sampling = match sampling {
                Sampling::Povm => FilterSampling::Povm,
                Sampling::PostSelected => FilterSampling::PostSelected,
            };
            let report = run_protocol(&state, &config)?;
            print(&report::to_json(&SimulationOutput { config, report }))
        }
        Command::Sweep { family: SweepFamily::Gisin, alpha, mu, out } => {
            let parse = |flag: &str, s: &str| {
                s.parse::<GridAxis>().map_err(|e| CliError::Usage(format!("--{flag}: {e}")))
            };
            let rows = gisin_sweep(&parse("alpha", &alpha)?, &parse("mu", &mu)?)?;
            let sink: Box<dyn Write> = match &out {
                Some(path) => Box::new(
                    std::fs::File::create(path)
                        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", path.display())))?,
                ),
                None => Box::new(std::io::stdout().lock()),
            };
            let io_err = |e: csv::Error| CliError::Usage(format!("cannot write CSV: {e}"));
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(report::CSV_HEADER).map_err(io_err)?;
            for row in &rows {
                w.write_record(report::csv_record(row)).map_err(io_err)?;
            }
            w.flush().map_err(|e| CliError::Usage(format!("cannot write CSV: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(64) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            match &err {
                CliError::XForm(rep) => {
                    let _ = print(&report::to_json(rep));
                    eprintln!("error: {}", rep.note);
                }
                CliError::Usage(msg) | CliError::Invalid(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(err.code())
        }
    }
}
