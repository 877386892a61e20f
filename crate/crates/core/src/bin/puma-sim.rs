//! Command-line front end: `run`, `sweep` and `decode`.
//!
//! Exit status is 0 on success, 1 for configuration errors, 2 otherwise.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use puma_sim::bench::{self, AllocatorKind, BenchSpec, Benchmark};
use puma_sim::{chart, Error, SimConfig};

#[derive(Parser)]
#[command(
    name = "puma-sim",
    version,
    about = "Subarray-aware allocation simulator for processing-using-DRAM"
)]
struct Cli {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// One benchmark run, printed as CSV.
    Run {
        #[arg(long, default_value = "and")]
        bench: Benchmark,
        #[arg(long, default_value = "puma")]
        allocator: AllocatorKind,
        #[arg(long, default_value_t = 65536)]
        size_bits: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Print the PUMA allocator trace to stderr.
        #[arg(long)]
        trace: bool,
    },
    /// The full benchmark x allocator x size grid from the config.
    Sweep {
        #[arg(long)]
        csv: PathBuf,
        /// Directory for one SVG chart per benchmark.
        #[arg(long)]
        charts: Option<PathBuf>,
    },
    /// Decode a physical address (hex or decimal).
    Decode {
        #[arg(long)]
        addr: String,
    },
}

fn parse_addr(s: &str) -> Result<u64, String> {
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16),
        None => s.replace('_', "").parse(),
    };
    r.map_err(|e| format!("bad address `{s}`: {e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}

fn real_main(cli: Cli) -> Result<(), Error> {
    let config = match &cli.config {
        Some(p) => SimConfig::load(p)?,
        None => SimConfig::default(),
    };
    let setup = config.build()?;
    match cli.cmd {
        Cmd::Run {
            bench,
            allocator,
            size_bits,
            seed,
            csv,
            trace,
        } => {
            let spec = BenchSpec {
                benchmark: bench,
                allocator,
                size_bits,
                seed,
                repetitions: 1,
            };
            let (record, events) = bench::run_traced(&setup, &spec, trace)?;
            for e in &events {
                eprintln!("{e}");
            }
            match csv {
                Some(path) => bench::emit_csv(&[record], &path)?,
                None => print!("{}", bench::records_to_csv(&[record])),
            }
        }
        Cmd::Sweep { csv, charts } => {
            let records = bench::sweep(&setup)?;
            bench::emit_csv(&records, &csv)?;
            println!("{} records -> {}", records.len(), csv.display());
            if let Some(dir) = charts {
                for p in chart::write_charts(&records, &dir)? {
                    println!("chart -> {}", p.display());
                }
            }
        }
        Cmd::Decode { addr } => {
            let addr = match parse_addr(&addr) {
                Ok(a) => a,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    std::process::exit(2);
                }
            };
            let coord = setup.mapping.decode(addr)?;
            let id = setup.mapping.subarray_id_of(&coord);
            println!("{addr:#x}: {coord} ({id})");
        }
    }
    Ok(())
}
