//! Thin command-line front end; all work happens in the library.

use clap::{Args, Parser, Subcommand};
use sparsepim::cli::{self, MatrixSource, RunSpec, EXIT_FAILURE, EXIT_USAGE};
use sparsepim::machine::{default_machine, MachineConfig, Profile, TransferGranularity};
use sparsepim::scalar::Dtype;
use sparsepim::Error;
use std::path::PathBuf;
use std::process::ExitCode;

/// Environment variable holding a default machine config file path.
const CONFIG_ENV: &str = "SPARSEPIM_CONFIG";

#[derive(Parser)]
#[command(name = "sparsepim", version, about = "SpMV experiments on a simulated near-bank PIM system")]
struct CliArgs {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scheme end to end and emit a JSON report.
    Run(RunArgs),
    /// Evaluate a grid of schemes, core counts, and vertical partitions.
    Sweep(SweepArgs),
    /// Check every registered scheme against the dense reference.
    Verify(VerifyArgs),
    /// Print sparsity statistics for a matrix.
    Stats(StatsArgs),
}

#[derive(Args)]
struct SourceArgs {
    /// Matrix Market file to load.
    #[arg(long, value_name = "PATH", conflicts_with = "generate")]
    matrix: Option<PathBuf>,
    /// Synthetic matrix spec, e.g. `power-law:n=1000,nnz=5000,exponent=2.1`.
    #[arg(long, value_name = "SPEC")]
    generate: Option<String>,
    /// Seed for generators and the input vector. Required with --generate.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct MachineArgs {
    /// Machine profile.
    #[arg(long, default_value = "pim-A")]
    profile: String,
    /// TOML file overriding machine parameters (default: $SPARSEPIM_CONFIG).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Transfer granularity: coarse, rank, or bank.
    #[arg(long, default_value = "rank")]
    granularity: String,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    machine: MachineArgs,
    /// Scheme name, e.g. CSR.nnz, COO.nnz-lf, DCOO, RBDBCSR.
    #[arg(long)]
    scheme: String,
    #[arg(long, default_value = "int32")]
    dtype: String,
    /// Simulated core count (defaults to the profile's).
    #[arg(long)]
    cores: Option<usize>,
    /// Vertical partitions for 2D schemes.
    #[arg(long, default_value_t = 1)]
    vertical: usize,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    machine: MachineArgs,
    /// Comma-separated scheme names, or `all`.
    #[arg(long, default_value = "all")]
    scheme: String,
    #[arg(long, default_value = "int32")]
    dtype: String,
    /// Comma-separated core counts.
    #[arg(long, default_value = "64,256,1024,2048")]
    cores: String,
    /// Comma-separated vertical partition counts for 2D schemes.
    #[arg(long, default_value = "2,4,8,16,32")]
    vertical: String,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    machine: MachineArgs,
    #[arg(long, default_value = "int64")]
    dtype: String,
    #[arg(long, default_value_t = 8)]
    cores: usize,
    #[arg(long, default_value_t = 4)]
    vertical: usize,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    source: SourceArgs,
}

fn resolve_source(args: &SourceArgs) -> Result<(MatrixSource, u64), String> {
    match (&args.matrix, &args.generate) {
        (Some(path), None) => Ok((MatrixSource::File(path.clone()), args.seed.unwrap_or(0))),
        (None, Some(spec)) => {
            let seed = args
                .seed
                .ok_or_else(|| "--seed is required with --generate".to_string())?;
            let (kind, n) = cli::parse_generator_spec(spec).map_err(|e| e.to_string())?;
            Ok((MatrixSource::Generate { kind, n }, seed))
        }
        _ => Err("exactly one of --matrix or --generate is required".to_string()),
    }
}

fn resolve_machine(args: &MachineArgs) -> Result<(MachineConfig, TransferGranularity), String> {
    let profile: Profile = args.profile.parse()?;
    let mut cfg = default_machine(profile);
    let config_path = args
        .config
        .clone()
        .or_else(|| std::env::var(CONFIG_ENV).ok().map(PathBuf::from));
    if let Some(path) = config_path {
        cfg.apply_overrides_file(&path)
            .map_err(|e| format!("config {}: {e}", path.display()))?;
    }
    let granularity: TransferGranularity = args.granularity.parse()?;
    Ok((cfg, granularity))
}

fn parse_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|tok| tok.trim().parse::<usize>().map_err(|_| format!("invalid count `{tok}`")))
        .collect()
}

fn usage_err(msg: String) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE as u8)
}

fn run(code: sparsepim::Result<i32>) -> ExitCode {
    match code {
        Ok(c) => ExitCode::from(c as u8),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Scheme(_) | Error::Generate(_) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            };
            ExitCode::from(code as u8)
        }
    }
}

fn main() -> ExitCode {
    let args = CliArgs::parse();
    match args.command {
        Command::Run(a) => {
            let (source, seed) = match resolve_source(&a.source) {
                Ok(v) => v,
                Err(m) => return usage_err(m),
            };
            let (machine, granularity) = match resolve_machine(&a.machine) {
                Ok(v) => v,
                Err(m) => return usage_err(m),
            };
            let dtype: Dtype = match a.dtype.parse() {
                Ok(d) => d,
                Err(m) => return usage_err(m),
            };
            let spec = RunSpec {
                source,
                scheme_names: vec![a.scheme],
                dtype,
                machine,
                core_counts: a.cores.into_iter().collect(),
                vertical_counts: vec![a.vertical],
                granularity,
                seed,
                out: a.out,
            };
            run(cli::cmd_run(&spec))
        }
        Command::Sweep(a) => {
            let (source, seed) = match resolve_source(&a.source) {
                Ok(v) => v,
                Err(m) => return usage_err(m),
            };
            let (machine, granularity) = match resolve_machine(&a.machine) {
                Ok(v) => v,
                Err(m) => return usage_err(m),
            };
            let dtype: Dtype = match a.dtype.parse() {
                Ok(d) => d,
                Err(m) => return usage_err(m),
            };
            let cores = match parse_list(&a.cores) {
                Ok(v) => v,
                Err(m) => return usage_err(m),
            };
            let vertical = match parse_list(&a.vertical) {
                Ok(v) => v,
                Err(m) => return usage_err(m),
            };
            let spec = RunSpec {
                source,
                scheme_names: a.scheme.split(',').map(|s| s.trim().to_string()).collect(),
                dtype,
                machine,
                core_counts: cores,
                vertical_counts: vertical,
                granularity,
                seed,
                out: a.out,
            };
            run(cli::cmd_sweep(&spec))
        }
        Command::Verify(a) => {
            let (source, seed) = match resolve_source(&a.source) {
                Ok(v) => v,
                Err(m) => return usage_err(m),
            };
            let (machine, granularity) = match resolve_machine(&a.machine) {
                Ok(v) => v,
                Err(m) => return usage_err(m),
            };
            let dtype: Dtype = match a.dtype.parse() {
                Ok(d) => d,
                Err(m) => return usage_err(m),
            };
            let spec = RunSpec {
                source,
                scheme_names: vec!["all".into()],
                dtype,
                machine,
                core_counts: vec![a.cores],
                vertical_counts: vec![a.vertical],
                granularity,
                seed,
                out: None,
            };
            run(cli::cmd_verify(&spec))
        }
        Command::Stats(a) => {
            let (source, seed) = match resolve_source(&a.source) {
                Ok(v) => v,
                Err(m) => return usage_err(m),
            };
            run(cli::cmd_stats(&source, seed))
        }
    }
}
