use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use krein_cli::{
    gen_instance, resolve_tolerances, run_command, CliError, Command, GenParams, Instance, Kind, RunOptions,
    ToleranceOverrides, DEFAULT_SAMPLES, TOLERANCE_ENV,
};

/// Positive and contractive extensions of operators given on a subspace.
///
/// Exit status: 0 success, 1 bad input, 2 infeasible instance, 3 oracle mismatch.
#[derive(Parser)]
#[command(name = "krein", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide whether a positive extension exists.
    Check(RunArgs),
    /// Compute the Krein–von Neumann extension.
    Kvn(RunArgs),
    /// Shorten `full_operator` to the domain.
    Short(RunArgs),
    /// Extremal contractive extensions, and membership of `full_operator`.
    Interval(RunArgs),
    /// Uniqueness of the norm-preserving extension.
    Unique(RunArgs),
    /// Minimal PSD solution of `S·A = B`.
    Solve(RunArgs),
    /// Run every applicable cross-check.
    VerifyAll(RunArgs),
    /// Write a seeded random instance.
    Gen(GenArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Instance file, `-` for stdin.
    instance: PathBuf,
    #[arg(long = "tol-rank")]
    tol_rank: Option<f64>,
    #[arg(long = "tol-psd")]
    tol_psd: Option<f64>,
    #[arg(long = "tol-residual")]
    tol_residual: Option<f64>,
    /// Seed for sampled checks; defaults to the instance's seed, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Samples per sampled check.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    kind: Kind,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    degenerate: bool,
    #[arg(long = "attain-norm")]
    attain_norm: bool,
    /// Output file; stdout when omitted or `-`.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    let io_err = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io_err)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(io_err)
    }
}

fn env_profile() -> Result<Option<ToleranceOverrides>, CliError> {
    let Some(path) = std::env::var_os(TOLERANCE_ENV) else {
        return Ok(None);
    };
    let path = PathBuf::from(path);
    let text = read_input(&path)?;
    ToleranceOverrides::parse_profile(&text).map(Some)
}

fn run(cmd: Command, args: &RunArgs) -> Result<i32, CliError> {
    let inst = Instance::parse(&read_input(&args.instance)?)?;
    let flags = ToleranceOverrides {
        rank_rel: args.tol_rank,
        psd_slack: args.tol_psd,
        residual: args.tol_residual,
    };
    let tol = resolve_tolerances(env_profile()?.as_ref(), &inst, &flags)?;
    let opts = RunOptions {
        tol,
        samples: args.samples,
        seed: args.seed.or(inst.seed).unwrap_or(0),
    };
    let report = run_command(cmd, &inst, &opts)?;
    print!("{}", report.write());
    Ok(report.exit_code())
}

fn generate(args: &GenArgs) -> Result<i32, CliError> {
    let inst = gen_instance(&GenParams {
        kind: args.kind,
        n: args.n,
        k: args.k,
        seed: args.seed,
        degenerate: args.degenerate,
        attain_norm: args.attain_norm,
    })?;
    let text = inst.write();
    match &args.output {
        Some(path) if path.as_os_str() != "-" => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?,
        _ => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "stdout".into(),
                source,
            })?,
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Cmd::Check(a) => run(Command::Check, a),
        Cmd::Kvn(a) => run(Command::Kvn, a),
        Cmd::Short(a) => run(Command::Short, a),
        Cmd::Interval(a) => run(Command::Interval, a),
        Cmd::Unique(a) => run(Command::Unique, a),
        Cmd::Solve(a) => run(Command::Solve, a),
        Cmd::VerifyAll(a) => run(Command::VerifyAll, a),
        Cmd::Gen(a) => generate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("krein: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
