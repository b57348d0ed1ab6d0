use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hqt_cli::commands::{cmd_bench, cmd_gen, cmd_table1, cmd_validate, GenMode};
use hqt_cli::pointfile::{read_points, write_points};
use hqt_cli::report::Report;
use hqt_cli::EXIT_CRITERION;

#[derive(Parser)]
#[command(name = "hqt", about = "Hyperbolic quadtree index tools", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Ball,
    Box,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a point file.
    Gen {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Mode::Ball)]
        mode: Mode,
        /// Ball radius (ball mode).
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Box width (box mode).
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        /// Box height exponent: z in [1, 2^height] (box mode).
        #[arg(long, default_value_t = 1.0)]
        height: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate index results against brute-force oracles.
    Validate {
        file: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 100)]
        queries: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the child/parent diameter ratio table.
    Table1 {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure build and query costs.
    Bench {
        file: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 100)]
        queries: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit_report(report: &Report, out: Option<&PathBuf>) -> hqt_cli::Result<ExitCode> {
    let json = report.to_json();
    if let Some(path) = out {
        std::fs::write(path, &json)?;
    }
    println!("{json}");
    Ok(if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CRITERION as u8)
    })
}

fn run() -> hqt_cli::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen { dim, n, mode, radius, width, height, seed, out } => {
            let mode = match mode {
                Mode::Ball => GenMode::Ball { radius },
                Mode::Box => GenMode::Box { width, height },
            };
            let points = cmd_gen(dim, n, mode, seed)?;
            match out {
                Some(path) => {
                    let mut w = BufWriter::new(File::create(path)?);
                    write_points(&mut w, &points)?;
                    w.flush()?;
                }
                None => {
                    let stdout = std::io::stdout();
                    write_points(stdout.lock(), &points)?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { file, delta, queries, seed, out } => {
            let points = read_points(BufReader::new(File::open(file)?))?;
            let report = cmd_validate(&points, delta, queries, seed)?;
            emit_report(&report, out.as_ref())
        }
        Command::Table1 { out } => emit_report(&cmd_table1(), out.as_ref()),
        Command::Bench { file, delta, queries, seed, out } => {
            let points = read_points(BufReader::new(File::open(file)?))?;
            let report = cmd_bench(&points, delta, queries, seed)?;
            emit_report(&report, out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
