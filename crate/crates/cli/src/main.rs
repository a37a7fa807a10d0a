use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use signet::commands::{self, GainOptions, SimulateOptions, VerifyOptions};
use signet::network::load_network;
use signet::{CliError, CliResult, ExitStatus};
use signet_core::generate::Family;

/// Analyze and simulate signed networks with separate first- and
/// second-order interaction layers.
#[derive(Debug, Parser)]
#[command(name = "signet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sign consistency, connectivity, balance, certificates, gain and prediction.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        gain: GainArgs,
        #[arg(long)]
        json: bool,
    },
    /// Integrate the network and classify the outcome.
    Simulate {
        file: PathBuf,
        /// Step size.
        #[arg(long = "h", value_parser = positive)]
        h: Option<f64>,
        /// Final time.
        #[arg(long, value_parser = positive)]
        tmax: Option<f64>,
        /// Trajectory CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        gain: GainArgs,
        #[arg(long)]
        json: bool,
    },
    /// Randomized comparison of predicted and simulated behaviour.
    Verify {
        /// Agents per generated network.
        #[arg(long, default_value_t = 4, value_parser = at_least::<2>)]
        n: usize,
        #[arg(long, default_value_t = 25, value_parser = at_least::<1>)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = FamilyArg::ConsistentBalanced)]
        family: FamilyArg,
        #[arg(long, default_value_t = signet_core::stability::DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value_t = signet_core::stability::DEFAULT_MARGIN)]
        margin: f64,
        #[arg(long)]
        json: bool,
    },
    /// Gain index (mu or zeta) and the selected gain k.
    Gain {
        file: PathBuf,
        #[command(flatten)]
        gain: GainArgs,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
struct GainArgs {
    /// Lyapunov weight, must exceed 1 (default: file value or 2).
    #[arg(long)]
    delta: Option<f64>,
    /// Relative gain margin above the index (default: file value or 0.1).
    #[arg(long)]
    margin: Option<f64>,
}

impl From<GainArgs> for GainOptions {
    fn from(a: GainArgs) -> Self {
        GainOptions {
            delta: a.delta,
            margin: a.margin,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    ConsistentBalanced,
    ConsistentUnbalanced,
    Inconsistent,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::ConsistentBalanced => Family::ConsistentBalanced,
            FamilyArg::ConsistentUnbalanced => Family::ConsistentUnbalanced,
            FamilyArg::Inconsistent => Family::Inconsistent,
        }
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be a positive number, got {s}"))
    }
}

fn at_least<const MIN: usize>(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|e| format!("{e}"))?;
    if v >= MIN {
        Ok(v)
    } else {
        Err(format!("must be at least {MIN}, got {v}"))
    }
}

fn emit<T: Serialize>(json: bool, value: &T, text: impl FnOnce() -> String) -> CliResult<()> {
    let mut stdout = std::io::stdout().lock();
    if json {
        let s = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
        writeln!(stdout, "{s}")?;
    } else {
        write!(stdout, "{}", text())?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<ExitStatus> {
    match cli.command {
        Command::Analyze { file, gain, json } => {
            let net = load_network(&file)?;
            let (report, status) = commands::analyze(&net, gain.into())?;
            emit(json, &report, || report.render_text())?;
            if let (true, Some(f)) = (json, &report.hypothesis_failure) {
                eprintln!("hypothesis failed: {f}");
            }
            Ok(status)
        }
        Command::Simulate {
            file,
            h,
            tmax,
            out,
            gain,
            json,
        } => {
            let net = load_network(&file)?;
            let opts = SimulateOptions {
                gain: gain.into(),
                h,
                t_max: tmax,
            };
            let (report, _) = commands::simulate_network(&net, &opts, out.as_deref())?;
            emit(json, &report, || report.render_text())?;
            Ok(ExitStatus::Success)
        }
        Command::Verify {
            n,
            trials,
            seed,
            family,
            delta,
            margin,
            json,
        } => {
            let report = commands::verify(VerifyOptions {
                n,
                trials,
                seed,
                family: family.into(),
                delta,
                margin,
            })?;
            emit(json, &report, || report.render_text())?;
            if report.passed == report.trials {
                Ok(ExitStatus::Success)
            } else {
                Err(CliError::VerificationFailed {
                    failed: report.trials - report.passed,
                    trials: report.trials,
                })
            }
        }
        Command::Gain { file, gain, json } => {
            let net = load_network(&file)?;
            let report = commands::gain(&net, gain.into())?;
            emit(json, &report, || {
                let mut s = String::new();
                report.render(&mut s);
                s
            })?;
            Ok(ExitStatus::Success)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SIGNET_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(ExitStatus::InputError.code() as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status().code() as u8)
        }
    }
}
