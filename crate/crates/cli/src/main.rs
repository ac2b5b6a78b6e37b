mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use soundtexture::Error;

/// Tonal, pulsal and noisy texture analysis of sounds.
#[derive(Parser, Debug)]
#[command(name = "soundtexture", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Calibration profile (JSON) to read or write.
    #[arg(long, global = true, value_name = "FILE")]
    pub profile: Option<PathBuf>,

    /// Output file or directory.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Seed of the calibration noise; the noise floor uses seed + 1.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Correlation threshold θ for correlation distances.
    #[arg(long, global = true)]
    pub theta: Option<f64>,

    /// Diamond extent along the CSR axis, in correlation distances.
    #[arg(long = "c-p", global = true)]
    pub c_p: Option<f64>,

    /// Diamond extent along the tract axis, in correlation distances.
    #[arg(long = "c-t", global = true)]
    pub c_t: Option<f64>,

    /// Tract level Θ (dB) at which the gates are half open.
    #[arg(long, global = true)]
    pub gate_threshold: Option<f64>,

    /// Gate slope per dB.
    #[arg(long, global = true)]
    pub gate_slope: Option<f64>,

    /// Descriptor weighting.
    #[arg(long, global = true, value_enum, default_value_t = WeightingArg::Both)]
    pub weighting: WeightingArg,

    /// Run without the rayon thread pool.
    #[arg(long, global = true)]
    pub sequential: bool,

    /// Log progress (equivalent to RUST_LOG=info).
    #[arg(short, long, global = true)]
    pub verbose: bool,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum WeightingArg {
    Energy,
    Area,
    #[default]
    Both,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Calibrate correlation distances on generated white noise.
    Calibrate {
        /// Noise duration in seconds.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Write cochleagram, texture maps, histograms and prevalence ratios.
    Analyze {
        wav: PathBuf,
        /// Write matrices in the binary format instead of CSV.
        #[arg(long)]
        binary: bool,
    },
    /// Compute pulsality, tonality and noisiness for a file or directory.
    Describe { input: PathBuf },
    /// Correlate descriptors with perceptual coordinates.
    Compare {
        descriptors: PathBuf,
        perceptual: PathBuf,
    },
}

pub mod exit {
    pub const CONFIG: u8 = 2;
    pub const MISMATCH: u8 = 3;
    pub const IO: u8 = 4;
    pub const DATA: u8 = 5;
}

/// Maps library errors onto the documented exit codes.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => exit::CONFIG,
        Error::Version(_) => exit::MISMATCH,
        Error::Io { .. } => exit::IO,
        _ => exit::DATA,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(exit::CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = if cli.global.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
