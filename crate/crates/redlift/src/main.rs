mod commands;
mod instance;
mod suite;

use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use redlift_core::{ToleranceConfig, C64};

use commands::{GenOptions, Output, SweepOptions};
use instance::{write_text, Kind};

#[derive(Parser)]
#[command(name = "redlift", version, about = "Commutant lifting and Redheffer coefficient toolkit")]
struct Cli {
    /// Truncation degree for Hardy space computations.
    #[arg(long = "K", global = true, default_value_t = 16)]
    k: usize,
    /// Seed for the ChaCha8 generator.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Residual tolerance for checks.
    #[arg(long, global = true)]
    tol_check: Option<f64>,
    /// Relative tolerance for numerical rank.
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// Output path, `-` for stdout.
    #[arg(long, global = true, default_value = "-")]
    out: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen {
        kind: Kind,
        /// Comma separated dimensions, meaning depends on the kind.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long)]
        isometric: bool,
        /// Spectral radius of the state operator for isometric omegas.
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        norm: Option<f64>,
        /// Strict data set with a strict contraction T'.
        #[arg(long)]
        strict: bool,
        #[arg(long, default_value_t = 0.8)]
        a_norm: f64,
        #[arg(long)]
        f_zero: bool,
        #[arg(long)]
        g_zero: bool,
        /// State dimension of a realized Schur parameter.
        #[arg(long, default_value_t = 0)]
        state: usize,
        /// Build from an existing omega or data set file.
        #[arg(long)]
        from_omega: Option<String>,
    },
    /// Run the verification suite on an instance.
    Verify { file: String },
    /// Tabulate the transform norm and its bounds along a ray of parameters.
    Sweep {
        file: String,
        #[arg(long)]
        v0: Option<String>,
        #[arg(long, default_value_t = 0.9)]
        t_max: f64,
        #[arg(long, default_value_t = 10)]
        steps: usize,
    },
    /// Recover a data set and omega from a co-isometric quadruple.
    Inverse {
        file: String,
        /// Input split when the file holds a bare system.
        #[arg(long)]
        split: Option<usize>,
    },
    /// Redheffer product of two block operators.
    Product { left: String, right: String },
    /// Test two omegas or two systems for unitary equivalence.
    Equiv { left: String, right: String },
    /// Evaluate the transform at a point of the disc.
    Transform {
        file: String,
        #[arg(long)]
        param: Option<String>,
        /// Point as `re,im`.
        #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
        lambda: String,
    },
    /// Build and verify the interpolant for a parameter.
    Interpolant {
        file: String,
        #[arg(long)]
        param: Option<String>,
    },
}

fn tolerances(cli: &Cli) -> Result<ToleranceConfig> {
    let mut tol = ToleranceConfig::default();
    if let Some(c) = cli.tol_check {
        tol.check_tol = c;
    }
    if let Some(r) = cli.tol_rank {
        tol.rank_tol = r;
    }
    Ok(tol.validated()?)
}

fn parse_lambda(s: &str) -> Result<C64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [re] => Ok(C64::new(re.parse()?, 0.0)),
        [re, im] => Ok(C64::new(re.parse()?, im.parse()?)),
        _ => bail!("lambda must be `re` or `re,im`, got {:?}", s),
    }
}

fn run(cli: &Cli) -> Result<Output> {
    let tol = tolerances(cli)?;
    let (k, seed) = (cli.k, cli.seed);
    match &cli.command {
        Command::Gen {
            kind,
            dims,
            isometric,
            rho,
            norm,
            strict,
            a_norm,
            f_zero,
            g_zero,
            state,
            from_omega,
        } => {
            let opts = GenOptions {
                dims: dims.clone(),
                isometric: *isometric,
                rho: *rho,
                norm: *norm,
                strict: *strict,
                a_norm: *a_norm,
                f_zero: *f_zero,
                g_zero: *g_zero,
                state: *state,
                from_omega: from_omega.clone(),
            };
            commands::gen(*kind, &opts, k, seed, &tol)
        }
        Command::Verify { file } => commands::verify(file, k, seed, &tol),
        Command::Sweep {
            file,
            v0,
            t_max,
            steps,
        } => {
            let opts = SweepOptions {
                v0: v0.clone(),
                t_max: *t_max,
                steps: *steps,
            };
            commands::sweep(file, &opts, k, seed, &tol)
        }
        Command::Inverse { file, split } => commands::inverse(file, *split, k, seed, &tol),
        Command::Product { left, right } => commands::product(left, right, &tol),
        Command::Equiv { left, right } => commands::equiv(left, right, &tol),
        Command::Transform {
            file,
            param,
            lambda,
        } => commands::transform(file, param.as_deref(), parse_lambda(lambda)?, k, &tol),
        Command::Interpolant { file, param } => {
            commands::interpolant_cmd(file, param.as_deref(), k, seed, &tol)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match run(&cli) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {:#}", e);
            return ExitCode::from(2);
        }
    };
    if let Err(e) = write_text(&cli.out, &out.text) {
        eprintln!("error: {:#}", e);
        return ExitCode::from(2);
    }
    if out.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
