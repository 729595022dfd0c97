use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use maass_cli::commands::{
    self, cmd_check, cmd_eval, cmd_lift, cmd_restrict, cmd_solve, resolve_primes, CheckMode,
    CmdError, EvalOp,
};

/// Exact-arithmetic toolkit for Fourier expansions on orthogonal groups:
/// Maass lifts, coefficient symmetry checks, null-space solving, restriction
/// and numeric evaluation.
#[derive(Parser)]
#[command(name = "maass", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Extend a seed file to a coefficient table by the divisor sum
    Lift {
        /// Seed file path
        #[arg(long)]
        seed: PathBuf,
        /// Weight; defaults to the `k` header of the seed file
        #[arg(short)]
        k: Option<u32>,
        #[arg(long)]
        a_max: i64,
        #[arg(long)]
        b_max: i64,
        /// Output coefficient file
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the divisor-sum relation and/or the symmetry defects
    Check {
        /// Coefficient file path
        #[arg(long)]
        coeffs: PathBuf,
        /// Weight; defaults to the `k` header of the coefficient file
        #[arg(short)]
        k: Option<u32>,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
        /// Comma-separated primes (default: env MAASS_PRIMES, else 2,3)
        #[arg(long)]
        primes: Option<String>,
    },
    /// Solve the symmetry constraints on a box, write a null-space basis and
    /// a comparison report
    Solve {
        /// Gram matrix rows, `;`-separated, entries whitespace-separated;
        /// omit for rank 0
        #[arg(long)]
        gram: Option<String>,
        #[arg(short)]
        k: u32,
        #[arg(long)]
        primes: Option<String>,
        #[arg(long)]
        a_max: i64,
        #[arg(long)]
        b_max: i64,
        /// Output directory for basis files and report.txt
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Restrict a coefficient file along a sublattice embedding
    Restrict {
        #[arg(long)]
        coeffs: PathBuf,
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the truncated expansion (or an up/down operator value) at a
    /// domain point
    Eval {
        #[arg(long)]
        coeffs: PathBuf,
        #[arg(short)]
        k: Option<u32>,
        #[arg(long, value_enum, default_value_t = OpArg::Id)]
        op: OpArg,
        /// Prime level for the operator ops
        #[arg(short)]
        p: Option<u64>,
        /// 2(m+2) reals: tau, fiber coordinates, z, each as `re im`
        #[arg(long)]
        point: String,
        /// Up/down comparison tolerance (default: 2 * tail bound + 1e-12)
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Maass,
    Sym,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum OpArg {
    Id,
    Tup,
    Tdown,
}

fn parse_gram(spec: Option<&str>) -> Result<Vec<Vec<i64>>, CmdError> {
    let Some(s) = spec else {
        return Ok(Vec::new());
    };
    s.split(';')
        .filter(|row| !row.trim().is_empty())
        .map(|row| {
            row.split_whitespace()
                .map(|t| {
                    t.parse::<i64>()
                        .map_err(|_| CmdError::Usage(format!("bad Gram entry `{t}`")))
                })
                .collect()
        })
        .collect()
}

fn run() -> Result<i32, CmdError> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Lift {
            seed,
            k,
            a_max,
            b_max,
            out,
        } => {
            cmd_lift(&seed, k, a_max, b_max, &out)?;
            Ok(commands::EXIT_OK)
        }
        Cmd::Check {
            coeffs,
            k,
            mode,
            primes,
        } => {
            let mode = match mode {
                ModeArg::Maass => CheckMode::Maass,
                ModeArg::Sym => CheckMode::Sym,
                ModeArg::Both => CheckMode::Both,
            };
            let primes = resolve_primes(primes.as_deref())?;
            let outcome = cmd_check(&coeffs, k, mode, &primes)?;
            for line in &outcome.lines {
                println!("{line}");
            }
            if outcome.passed {
                println!("check: PASS");
                Ok(commands::EXIT_OK)
            } else {
                println!("check: FAIL");
                Ok(commands::EXIT_CHECK_FAILED)
            }
        }
        Cmd::Solve {
            gram,
            k,
            primes,
            a_max,
            b_max,
            out_dir,
        } => {
            let primes = resolve_primes(primes.as_deref())?;
            let gram = parse_gram(gram.as_deref())?;
            let outcome = cmd_solve(gram, k, &primes, a_max, b_max, &out_dir)?;
            for line in &outcome.report_lines {
                println!("{line}");
            }
            Ok(commands::EXIT_OK)
        }
        Cmd::Restrict {
            coeffs,
            embedding,
            out,
        } => {
            cmd_restrict(&coeffs, &embedding, &out)?;
            Ok(commands::EXIT_OK)
        }
        Cmd::Eval {
            coeffs,
            k,
            op,
            p,
            point,
            tolerance,
        } => {
            let op = match op {
                OpArg::Id => EvalOp::Id,
                OpArg::Tup => EvalOp::TUp,
                OpArg::Tdown => EvalOp::TDown,
            };
            let coords: Result<Vec<f64>, _> =
                point.split_whitespace().map(|t| t.parse::<f64>()).collect();
            let coords =
                coords.map_err(|e| CmdError::Usage(format!("bad point coordinate: {e}")))?;
            let outcome = cmd_eval(&coeffs, k, op, p, &coords, tolerance)?;
            println!("{}", outcome.printed);
            if let Some(cmp) = outcome.comparison {
                if !cmp.passed {
                    eprintln!(
                        "up/down mismatch: |difference| = {:e} exceeds tolerance {:e}",
                        cmp.difference, cmp.tolerance
                    );
                    return Ok(commands::EXIT_CHECK_FAILED);
                }
            }
            Ok(commands::EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
