use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ncd_cli::acceptance::{self, VerifyConfig, CRITERIA};
use ncd_cli::figures::{self, Figure, FigureOptions};
use ncd_cli::{exit, json, load_state, CliError};
use ncd_core::bounds::{report_for_spec, ReportConfig};
use ncd_core::fock::DEFAULT_TAIL_TOL;
use ncd_core::husimi::{q_sup, QSupConfig, DEFAULT_SEED};

#[derive(Parser)]
#[command(
    name = "ncd",
    version,
    about = "Bounds on the nonclassical distance of bosonic states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Numerics {
    /// Photon cutoff applied to every mode (overrides the state document).
    #[arg(long = "trunc", value_name = "N")]
    trunc: Option<usize>,
    /// Admissible neglected probability mass.
    #[arg(long = "tail-tol", value_name = "X")]
    tail_tol: Option<f64>,
    /// Seed of the multistart Husimi search.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Fig1,
    Fig2,
    Fig3,
}

#[derive(Subcommand)]
enum Command {
    /// Print the bound report of a state as JSON.
    Report {
        /// State document, or `-` for standard input.
        state: PathBuf,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Write a figure sweep as CSV plus a plotting script.
    Figure {
        #[arg(value_enum)]
        which: Which,
        /// CSV path (default: <which>.csv).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of sweep points.
        #[arg(long)]
        steps: Option<usize>,
        /// First sweep value.
        #[arg(long)]
        from: Option<f64>,
        /// Last sweep value.
        #[arg(long)]
        to: Option<f64>,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Run the acceptance corpus and print one line per check.
    Verify {
        /// Restrict to criteria by key or number (repeatable).
        #[arg(long, value_name = "KEY")]
        only: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Print the Husimi supremum of a state as JSON.
    Qsup {
        state: PathBuf,
        #[command(flatten)]
        numerics: Numerics,
    },
}

fn qsup_config(n: &Numerics) -> QSupConfig {
    QSupConfig {
        seed: n.seed,
        ..QSupConfig::default()
    }
}

/// Writes to standard output; a closed pipe ends the output quietly.
fn emit(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(CliError::Io(format!("standard output: {e}")))
        }
        _ => Ok(()),
    }
}

fn print_json(v: &serde_json::Value) -> Result<(), CliError> {
    emit(&serde_json::to_string_pretty(v).expect("JSON values serialize"))
}

fn write_file(path: &std::path::Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(bytes))
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Report { state, numerics } => {
            let parsed = load_state(&state)?;
            let trunc = parsed.truncation(numerics.trunc, numerics.tail_tol)?;
            let cfg = ReportConfig {
                qsup: qsup_config(&numerics),
                ..ReportConfig::default()
            };
            let r = report_for_spec(&parsed.spec, Some(&trunc), &cfg)?;
            print_json(&json::report(&r))?;
        }
        Command::Qsup { state, numerics } => {
            let parsed = load_state(&state)?;
            let trunc = parsed.truncation(numerics.trunc, numerics.tail_tol)?;
            let q = q_sup(&parsed.spec.build(&trunc)?, &qsup_config(&numerics))?;
            print_json(&json::qsup(&q))?;
        }
        Command::Figure {
            which,
            out,
            steps,
            from,
            to,
            numerics,
        } => {
            let fig = match which {
                Which::Fig1 => Figure::Fig1,
                Which::Fig2 => Figure::Fig2,
                Which::Fig3 => Figure::Fig3,
            };
            let mut sweep = fig.default_sweep();
            sweep.steps = steps.unwrap_or(sweep.steps);
            sweep.from = from.unwrap_or(sweep.from);
            sweep.to = to.unwrap_or(sweep.to);
            let opts = FigureOptions {
                cutoff: numerics.trunc,
                tail_tol: numerics.tail_tol.unwrap_or(DEFAULT_TAIL_TOL),
            };
            let table = figures::compute(fig, &sweep, &opts)?;
            let csv_path = out.unwrap_or_else(|| PathBuf::from(format!("{}.csv", fig.name())));
            write_file(&csv_path, table.to_csv_string().as_bytes())?;
            let script = csv_path.with_extension("plot.py");
            let name = csv_path
                .file_name()
                .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            write_file(&script, figures::plot_script(fig, &name).as_bytes())?;
            eprintln!("wrote {} and {}", csv_path.display(), script.display());
        }
        Command::Verify { only, seed } => {
            let mut ids = Vec::new();
            for key in &only {
                match acceptance::lookup(key) {
                    Some(id) => ids.push(id),
                    None => {
                        let keys: Vec<&str> = CRITERIA.iter().map(|c| c.1).collect();
                        return Err(CliError::Io(format!(
                            "unknown criterion \"{key}\"; expected one of {keys:?}"
                        )));
                    }
                }
            }
            let mut failed = 0;
            for (id, checks) in acceptance::run(&ids, &VerifyConfig { seed }) {
                let title = CRITERIA.iter().find(|c| c.0 == id).map_or("", |c| c.2);
                let mut text = format!("# criterion {id}: {title}");
                for c in &checks {
                    text += &format!("\n{c}");
                    failed += usize::from(!c.passed());
                }
                emit(&text)?;
            }
            emit(&format!("{failed} failing check(s)"))?;
            return Ok(if failed == 0 {
                exit::OK
            } else {
                exit::VERIFY_FAILED
            });
        }
    }
    Ok(exit::OK)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
