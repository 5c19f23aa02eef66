//! `pkm`: coefficients, values, norms, masses, spectral pairings, zeros and
//! bound checks for the Poincare series `P_{k,m}`.
//!
//! Exit codes: 0 success, 2 domain or usage error, 3 numeric failure,
//! 4 a certification or check that did not pass.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use poincare_lab::config::{self, Config, OutputFormat, CACHE_DIR_ENV};

use crate::output::Emit;

#[derive(Parser, Debug)]
#[command(name = "pkm", version, about = "Numerical laboratory for the Poincare series P_{k,m} on SL2(Z)")]
pub struct Cli {
    /// Mantissa bits for the extended-precision Bessel backend.
    #[arg(long, global = true, default_value_t = 256)]
    pub precision_bits: u32,
    /// Relative tolerance for coefficients and series.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Worker threads; 0 uses one per core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Directory for cached coefficient tables.
    #[arg(long, global = true, env = CACHE_DIR_ENV, default_value = ".pkm-cache")]
    pub cache_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fourier coefficients p(1..=n_max), cached on disk.
    Coeff {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: u64,
        #[arg(long, default_value_t = 10)]
        n_max: u64,
    },
    /// P(x + iy).
    Eval {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: u64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long)]
        y: f64,
    },
    /// Petersson norm <P, P> from p(m).
    Norm {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: u64,
    },
    /// Integral of y^k |P|^2 / <P, P> over a region of the fundamental domain.
    Mass {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: u64,
        /// `full` or `x_lo,x_hi,y_lo,y_hi` (`inf` allowed for y_hi).
        #[arg(long, default_value = "full", allow_hyphen_values = true)]
        region: String,
        #[arg(long, default_value_t = 1e-9)]
        rel_tol: f64,
    },
    /// <P E(., 1/2 + it), P> / <P, P> by 2D quadrature and by unfolding.
    Inner {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: u64,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, value_enum, default_value_t = Mode::Both)]
        mode: Mode,
        /// Unfolded constant term only, against its closed form.
        #[arg(long)]
        constant_only: bool,
        #[arg(long, default_value_t = 1e-8)]
        rel_tol: f64,
    },
    /// Zero inventory with the valence check.
    Zeros {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: u64,
        #[arg(long, default_value_t = 1e-10)]
        refine_tol: f64,
        /// Height above which no zeros are sought; defaults to the
        /// certified zero-free height.
        #[arg(long)]
        y_max: Option<f64>,
    },
    /// Runs one bound check.
    Verify {
        #[arg(long, value_enum)]
        bound: Bound,
        #[arg(long, default_value_t = 2000)]
        c_max: u64,
        #[arg(long, default_value_t = 100)]
        mn_max: u64,
        /// Weights for the grid checks.
        #[arg(long, value_delimiter = ',')]
        k_list: Option<Vec<u32>>,
        #[arg(long)]
        schedule: Option<String>,
    },
    /// Mass and zero equidistribution along an m(k) schedule.
    Equidist {
        /// `m=1`, `m=k`, `m=2k`, `m=k*logk` or `m=k^1.2`.
        #[arg(long)]
        schedule: String,
        #[arg(long, value_delimiter = ',', default_value = "60,120,180")]
        k_list: Vec<u32>,
        #[arg(long, value_enum, default_value_t = Measure::Both)]
        measure: Measure,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Direct,
    Unfolded,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Bound {
    Kloosterman,
    BesselEnvelope,
    Smn,
    Pkmn,
    Pkmm,
    MassConvergence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Measure {
    Mass,
    Zeros,
    Both,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = Config {
        precision_bits: cli.precision_bits,
        default_tol: cli.tol,
        threads: cli.threads,
        cache_dir: cli.cache_dir.clone(),
        output_format: match cli.format {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        },
        ..Config::default()
    };
    if let Err(e) = config::set_global(cfg) {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: cannot size the thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(report) => {
            let mut out = std::io::stdout().lock();
            if let Err(e) = report.emit(cli.format, &mut out) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(if report.passed { 0 } else { 4 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
