use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use lrmf_core::oracle::{exact_cluster, exact_factorize, DEFAULT_BUDGET};
use lrmf_core::{encode, lrmf, DEFAULT_RESTARTS};
use lrmf_cli::bench::{bench_synth, to_csv, BenchConfig};
use lrmf_cli::io::load_matrix_csv;
use lrmf_cli::run::{resolve_algebra, run_factorize, FactorizeOptions};

#[derive(Parser)]
#[command(name = "lrmf", version, about = "Low-rank Boolean and GF(p) matrix factorization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct AlgebraArgs {
    /// Prime modulus of the field.
    #[arg(long)]
    p: Option<u32>,
    /// Boolean semiring (implies p = 2).
    #[arg(long)]
    boolean: bool,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Distance exponent.
    #[arg(long, default_value_t = 1)]
    q: u32,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Leave wall-clock times out of the output so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct FactorizeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Outputs go to PREFIX.B.csv, PREFIX.U.csv, PREFIX.V.csv, PREFIX.report.{txt,json}.
    #[arg(long)]
    output_prefix: Option<PathBuf>,
    #[command(flatten)]
    algebra: AlgebraArgs,
    #[arg(long)]
    rank: usize,
    /// Per-block rank for the block solver (default 5).
    #[arg(long)]
    rs: Option<usize>,
    /// Number of blocks; forces the block solver.
    #[arg(long)]
    d: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Bin gray levels into p equal-width buckets first (image input).
    #[arg(long)]
    bucket: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Factorize a CSV matrix (or a .pgm image).
    Factorize(FactorizeArgs),
    /// Factorize a PGM image through gray-level quantization.
    Image(FactorizeArgs),
    /// Mean and standard deviation of the error on random matrices, as CSV.
    BenchSynth {
        #[arg(long, default_value_t = 50)]
        m: usize,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
        ranks: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[arg(long)]
        rs: Option<usize>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write the table here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare the heuristic with exhaustive search on a small CSV matrix.
    OracleCheck {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[arg(long)]
        rank: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

/// The invocation, with the program path normalized so reports do not
/// depend on where the binary lives.
fn command_line() -> String {
    std::iter::once("lrmf".to_string())
        .chain(std::env::args().skip(1))
        .collect::<Vec<_>>()
        .join(" ")
}

fn factorize(args: FactorizeArgs, image: bool) -> anyhow::Result<()> {
    let output_prefix = args.output_prefix.unwrap_or_else(|| args.input.with_extension(""));
    let opts = FactorizeOptions {
        input: args.input,
        output_prefix,
        p: args.algebra.p,
        boolean: args.algebra.boolean,
        rank: args.rank,
        r_s: args.rs,
        d: args.d,
        q: args.solver.q,
        restarts: args.solver.restarts,
        seed: args.solver.seed,
        image,
        bucket: args.bucket,
        timing: !args.solver.no_timing,
        command: command_line(),
    };
    let report = run_factorize(&opts)?;
    print!("{}", report.to_key_value());
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Factorize(args) => factorize(args, false)?,
        Command::Image(args) => factorize(args, true)?,
        Command::BenchSynth {
            m,
            n,
            density,
            ranks,
            trials,
            algebra,
            rs,
            solver,
            output,
        } => {
            let cfg = BenchConfig {
                m,
                n,
                density,
                ranks,
                trials,
                seed: solver.seed,
                algebra: resolve_algebra(algebra.p, algebra.boolean)?,
                q: solver.q,
                restarts: solver.restarts,
                r_s: rs,
                timing: !solver.no_timing,
            };
            let table = to_csv(&bench_synth(&cfg)?);
            match output {
                Some(path) => fs::write(&path, table).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{table}"),
            }
        }
        Command::OracleCheck {
            input,
            algebra,
            rank,
            solver,
        } => {
            let algebra = resolve_algebra(algebra.p, algebra.boolean)?;
            let a = load_matrix_csv(&input, algebra)?;
            let exact = exact_factorize(&a, rank, solver.q, DEFAULT_BUDGET)?;
            let clustered = exact_cluster(&encode(&a, rank, solver.q)?.instance, DEFAULT_BUDGET)?;
            let heuristic = lrmf(&a, rank, solver.q, solver.restarts, solver.seed)?;
            let lower_bound = heuristic.error >= exact.error;
            let agree = clustered.cost == exact.error;
            println!("exact_error={}", exact.error);
            println!("exact_cluster_cost={}", clustered.cost);
            println!("lrmf_error={}", heuristic.error);
            println!("lower_bound_holds={lower_bound}");
            println!("oracles_agree={agree}");
            println!("optimum_reached={}", heuristic.error == exact.error);
            if !lower_bound || !agree {
                bail!("oracle check failed");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
