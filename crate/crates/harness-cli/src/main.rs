//! Command-line entry point.
//!
//! Exit codes: 0 success, 2 configuration error, 3 assertion failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use harness_cli::bench::{bench_pir_point, bench_pow_point, PIR_CSV_HEADER, POW_CSV_HEADER};
use harness_cli::dbtool::{build_db_file, infer_dims, parse_records};
use harness_cli::sim::run_sim;
use harness_cli::{SchemeChoice, SimConfig, SimError};
use pow::PowKind;

#[derive(Parser)]
#[command(name = "sas-sim", about = "Private spectrum access: simulation, benchmarks, database tooling")]
struct Cli {
    #[command(subcommand)]
    command: TopCommand,
}

#[derive(Subcommand)]
enum TopCommand {
    /// Run protocol simulations.
    Sim {
        #[command(subcommand)]
        command: SimCommand,
    },
    /// Run benchmarks, printing CSV to stdout.
    Bench {
        #[command(subcommand)]
        command: BenchCommand,
    },
    /// Database tooling.
    Db {
        #[command(subcommand)]
        command: DbCommand,
    },
}

#[derive(Subcommand)]
enum SimCommand {
    /// Drive the full flow for every configured user plus the attack matrix.
    Run(SimRunArgs),
}

#[derive(Args)]
struct SimRunArgs {
    /// Flat key=value configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Directory for per-phase CSV metric files.
    #[arg(long)]
    metrics_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Batched server kernels, scalar vs data-parallel.
    Pir(BenchPirArgs),
    /// Puzzle generate/solve/verify costs.
    Pow(BenchPowArgs),
}

#[derive(Args)]
struct BenchPirArgs {
    /// ens | ftr | oop
    #[arg(long)]
    scheme: String,
    /// Comma-separated row counts, powers of two allowed as 2^k.
    #[arg(long, default_value = "2^12")]
    rows: String,
    /// Comma-separated batch sizes.
    #[arg(long, default_value = "1,128")]
    batch: String,
    #[arg(long, default_value_t = 3072)]
    block_bytes: usize,
    #[arg(long, default_value_t = 4)]
    workers: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct BenchPowArgs {
    /// hct | lbp
    #[arg(long)]
    kind: String,
    /// Comma-separated difficulty levels.
    #[arg(long, default_value = "14,18,20")]
    kappa: String,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Subcommand)]
enum DbCommand {
    /// Build a replica file from a records CSV.
    Build(DbBuildArgs),
}

#[derive(Args)]
struct DbBuildArgs {
    /// Records CSV: cell_x,cell_y,channel,tv,eirp_centi_dbm,available[,aux_hex]
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// hct | lbp; omit to build without puzzles.
    #[arg(long)]
    pow: Option<String>,
    /// Comma-separated difficulties, one puzzle each.
    #[arg(long, default_value = "20")]
    kappa: String,
    #[arg(long, default_value_t = 3072)]
    block_bytes: usize,
    #[arg(long, default_value_t = 1)]
    window: u64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn parse_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|tok| {
            let tok = tok.trim();
            if let Some(exp) = tok.strip_prefix("2^") {
                exp.parse::<u32>().map(|e| 1usize << e).map_err(|e| e.to_string())
            } else {
                tok.parse::<usize>().map_err(|e| e.to_string())
            }
        })
        .collect()
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Assertion(msg)) => {
            eprintln!("assertion failure: {msg}");
            ExitCode::from(3)
        }
    }
}

enum CliError {
    Config(String),
    Assertion(String),
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match cli.command {
        TopCommand::Sim { command: SimCommand::Run(args) } => {
            let cfg = SimConfig::from_file(&args.config).map_err(|e| CliError::Config(e.to_string()))?;
            let report = run_sim(&cfg).map_err(|e| match e {
                SimError::Assertion(m) => CliError::Assertion(m),
                SimError::Infra(m) => CliError::Config(m),
            })?;
            println!("transcript_digest={}", report.digest_hex());
            println!(
                "honest_granted={}/{} frames={} wire_bytes={}",
                report.honest_granted, report.honest_total, report.frames_total, report.wire_bytes_total
            );
            if report.flood_attempts > 0 {
                println!(
                    "flood: {} attempts, {} accepted",
                    report.flood_attempts, report.flood_accepted
                );
            }
            for (kind, code) in &report.attack_results {
                let verdict = if *code == kind.expected_code() { "ok" } else { "UNEXPECTED" };
                println!("attack {}: code {:#04x} ({verdict})", kind.name(), code);
            }
            if let Some(dir) = args.metrics_dir {
                write_metrics(&dir, &report).map_err(|e| CliError::Config(e))?;
            }
            if report.honest_granted != report.honest_total {
                return Err(CliError::Assertion(format!(
                    "{} of {} honest users granted",
                    report.honest_granted, report.honest_total
                )));
            }
            if let Some((kind, code)) =
                report.attack_results.iter().find(|(k, c)| *c != k.expected_code())
            {
                return Err(CliError::Assertion(format!(
                    "attack {} produced code {:#04x}, expected {:#04x}",
                    kind.name(),
                    code,
                    kind.expected_code()
                )));
            }
            Ok(())
        }
        TopCommand::Bench { command } => match command {
            BenchCommand::Pir(args) => {
                let scheme = match args.scheme.as_str() {
                    "ens" => SchemeChoice::Ens,
                    "ftr" => SchemeChoice::Ftr,
                    "oop" => SchemeChoice::Oop,
                    other => return Err(CliError::Config(format!("scheme '{other}'"))),
                };
                let rows = parse_list(&args.rows).map_err(CliError::Config)?;
                let batches = parse_list(&args.batch).map_err(CliError::Config)?;
                println!("{PIR_CSV_HEADER}");
                for &r in &rows {
                    for &b in &batches {
                        for row in
                            bench_pir_point(scheme, r, args.block_bytes, b, args.workers, args.seed)
                        {
                            println!("{}", row.csv());
                        }
                    }
                }
                Ok(())
            }
            BenchCommand::Pow(args) => {
                let kind = match args.kind.as_str() {
                    "hct" => PowKind::Hct,
                    "lbp" => PowKind::Lbp,
                    other => return Err(CliError::Config(format!("pow kind '{other}'"))),
                };
                let kappas = parse_list(&args.kappa).map_err(CliError::Config)?;
                println!("{POW_CSV_HEADER}");
                for &k in &kappas {
                    println!("{}", bench_pow_point(kind, k as u32, args.seed).csv());
                }
                Ok(())
            }
        },
        TopCommand::Db { command: DbCommand::Build(args) } => {
            let text = std::fs::read_to_string(&args.records)
                .map_err(|e| CliError::Config(format!("records: {e}")))?;
            let records = parse_records(&text).map_err(|e| CliError::Config(e.to_string()))?;
            let dims = infer_dims(&records);
            let pow_kind = match args.pow.as_deref() {
                None => None,
                Some("hct") => Some(PowKind::Hct),
                Some("lbp") => Some(PowKind::Lbp),
                Some(other) => return Err(CliError::Config(format!("pow kind '{other}'"))),
            };
            let kappas: Vec<u32> = parse_list(&args.kappa)
                .map_err(CliError::Config)?
                .into_iter()
                .map(|k| k as u32)
                .collect();
            let (rows, block_bytes) = build_db_file(
                &records,
                &dims,
                args.block_bytes,
                pow_kind,
                &kappas,
                args.window,
                args.seed,
                &args.out,
            )
            .map_err(|e| CliError::Config(e.to_string()))?;
            println!(
                "wrote {} rows × {} bytes to {}",
                rows,
                block_bytes,
                args.out.display()
            );
            Ok(())
        }
    }
}

fn write_metrics(dir: &std::path::Path, report: &harness_cli::SimReport) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    let phases = ["pol", "circuit", "query", "solve", "service"];
    for phase in phases {
        let mut csv = String::from("user,ms,wire_bytes,outcome\n");
        for row in report.phase_rows.iter().filter(|r| r.phase == phase) {
            csv.push_str(&format!("{},{:.3},{},{}\n", row.user, row.ms, row.wire_bytes, row.outcome));
        }
        std::fs::write(dir.join(format!("{phase}.csv")), csv).map_err(|e| e.to_string())?;
    }
    Ok(())
}
