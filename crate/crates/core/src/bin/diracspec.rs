use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dirac_spectral::cli::{self, Fault, TestFunction, WeylGrid, EXIT_USAGE};
use dirac_spectral::par::Execution;
use dirac_spectral::Complex64;

#[derive(Parser)]
#[command(name = "diracspec", version, about = "Spectral computations for a Dirac system with a discontinuous weight")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues, norming constants and proportionality factors.
    Eigs {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        n_min: i64,
        #[arg(long, allow_hyphen_values = true)]
        n_max: i64,
        #[arg(long)]
        out: PathBuf,
        /// Run numerical kernels on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Characteristic function on a real interval.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lambda_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        lambda_max: f64,
        #[arg(long, default_value_t = 201)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Weyl function over a rectangle of the complex plane.
    Weyl {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value_t = -2.0)]
        re_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 2.0)]
        re_max: f64,
        #[arg(long, default_value_t = 5)]
        re_steps: usize,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.5)]
        im_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 2.0)]
        im_max: f64,
        #[arg(long, default_value_t = 4)]
        im_steps: usize,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.1)]
        margin: f64,
        /// Largest |n| of the symmetric series.
        #[arg(long, default_value_t = 20)]
        series_n: i64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Eigenfunction expansion of a test function.
    Expand {
        #[arg(long)]
        config: PathBuf,
        /// One of `sin`, `one`, `poly`.
        #[arg(long, default_value = "sin")]
        function: String,
        #[arg(long, default_value_t = 10)]
        n: i64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Resolvent applied to a test function.
    Resolvent {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        re_lambda: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        im_lambda: f64,
        #[arg(long, default_value = "one")]
        function: String,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        f3: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        f4: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Potential reconstruction from spectral data.
    Invert {
        /// Boundary coefficients and weight; the potential is ignored.
        #[arg(long)]
        config: PathBuf,
        /// `spectral_data.json` written by `eigs`.
        #[arg(long)]
        data: PathBuf,
        /// Basis, initial parameters and optimiser settings.
        #[arg(long)]
        inverse: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Built-in invariant suite on the reference configurations.
    Selfcheck {
        #[arg(long)]
        out: PathBuf,
        /// Negative control; `oracle` corrupts the oracle comparison.
        #[arg(long)]
        inject_fault: Option<String>,
    },
}

fn function(name: &str) -> Result<TestFunction, u8> {
    TestFunction::parse(name).ok_or_else(|| {
        eprintln!("error: unknown function {name:?}; expected sin, one or poly");
        EXIT_USAGE as u8
    })
}

fn run(args: Args) -> Result<i32, u8> {
    Ok(match args.command {
        Command::Eigs {
            config,
            n_min,
            n_max,
            out,
            sequential,
        } => {
            let exec = if sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            cli::cmd_eigs_with(&config, n_min, n_max, &out, exec)
        }
        Command::Sweep {
            config,
            lambda_min,
            lambda_max,
            steps,
            out,
        } => cli::cmd_sweep(&config, lambda_min, lambda_max, steps, &out),
        Command::Weyl {
            config,
            re_min,
            re_max,
            re_steps,
            im_min,
            im_max,
            im_steps,
            margin,
            series_n,
            out,
        } => {
            let grid = WeylGrid {
                re_min,
                re_max,
                re_steps,
                im_min,
                im_max,
                im_steps,
                margin,
            };
            cli::cmd_weyl(&config, &grid, series_n, &out)
        }
        Command::Expand {
            config,
            function: f,
            n,
            out,
        } => cli::cmd_expand(&config, function(&f)?, n, &out),
        Command::Resolvent {
            config,
            re_lambda,
            im_lambda,
            function: f,
            f3,
            f4,
            out,
        } => cli::cmd_resolvent(&config, Complex64::new(re_lambda, im_lambda), function(&f)?, f3, f4, &out),
        Command::Invert {
            config,
            data,
            inverse,
            out,
        } => cli::cmd_invert(&config, &data, &inverse, &out),
        Command::Selfcheck { out, inject_fault } => {
            let fault = match inject_fault.as_deref() {
                None => None,
                Some(name) => Some(Fault::parse(name).ok_or_else(|| {
                    eprintln!("error: unknown fault {name:?}; expected oracle");
                    EXIT_USAGE as u8
                })?),
            };
            cli::cmd_selfcheck(&out, fault)
        }
    })
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(code) => ExitCode::from(code),
    }
}
