use std::path::{Path, PathBuf};

use soundtexture::analysis::PerceptualTable;
use soundtexture::calibration::{load_profile, save_profile, CorrelationProfile};
use soundtexture::descriptors::Weighting;
use soundtexture::pipeline::{self, MatrixFormat};
use soundtexture::signal_io::read_wav;
use soundtexture::{Error, Execution, Pipeline, Result, RunConfig};

use crate::{Cli, Command, GlobalArgs, WeightingArg};

/// File config (if any) with flag overrides applied.
pub fn resolve_config(args: &GlobalArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_toml_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.noise.seed = seed;
    }
    if let Some(theta) = args.theta {
        cfg.theta = theta;
    }
    if let Some(c_p) = args.c_p {
        cfg.tract.c_p = c_p;
    }
    if let Some(c_t) = args.c_t {
        cfg.tract.c_t = c_t;
    }
    if let Some(t) = args.gate_threshold {
        cfg.descriptors.gate_threshold = t;
    }
    if let Some(s) = args.gate_slope {
        cfg.descriptors.gate_slope = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn weightings(arg: WeightingArg) -> Vec<Weighting> {
    match arg {
        WeightingArg::Energy => vec![Weighting::Energy],
        WeightingArg::Area => vec![Weighting::Area],
        WeightingArg::Both => vec![Weighting::Energy, Weighting::Area],
    }
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::Config(format!("--{flag} is required for this command")))
}

fn load_checked_profile(args: &GlobalArgs, cfg: &RunConfig) -> Result<CorrelationProfile> {
    let profile = load_profile(required(&args.profile, "profile")?, &cfg.filterbank)?;
    if profile.theta != cfg.theta {
        log::warn!(
            "profile was calibrated with theta = {}, run config says {}; using the profile",
            profile.theta,
            cfg.theta
        );
    }
    Ok(profile)
}

pub fn run(cli: &Cli) -> Result<()> {
    let args = &cli.global;
    let mut cfg = resolve_config(args)?;
    if let Command::Calibrate { duration: Some(d) } = &cli.command {
        cfg.noise.duration_s = *d;
        cfg.validate()?;
    }
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    // the remaining commands need the filterbank
    if let Command::Compare {
        descriptors,
        perceptual,
    } = &cli.command
    {
        return compare(args, &cfg, descriptors, perceptual);
    }
    let pipeline = Pipeline::new(cfg, exec)?;
    match &cli.command {
        Command::Calibrate { .. } => calibrate(args, &pipeline),
        Command::Analyze { wav, binary } => analyze(args, &pipeline, wav, *binary),
        Command::Describe { input } => describe(args, &pipeline, input),
        Command::Compare { .. } => unreachable!("handled above"),
    }
}

fn calibrate(args: &GlobalArgs, pipeline: &Pipeline) -> Result<()> {
    let out = args
        .out
        .as_deref()
        .or(args.profile.as_deref())
        .ok_or_else(|| Error::Config("--out (or --profile) is required for calibrate".into()))?;
    log::info!(
        "calibrating on {} s of noise, seed {}",
        pipeline.config().noise.duration_s,
        pipeline.config().seed()
    );
    let profile = pipeline.calibrate()?;
    save_profile(&profile, out)?;
    log::info!("wrote {}", out.display());
    Ok(())
}

fn analyze(args: &GlobalArgs, pipeline: &Pipeline, wav: &Path, binary: bool) -> Result<()> {
    let profile = load_checked_profile(args, pipeline.config())?;
    let out = required(&args.out, "out")?;
    let signal = read_wav(wav)?;
    let analysis = pipeline.analyze(&signal, &wav.display().to_string(), &profile)?;
    let provenance = pipeline.config().provenance()?.with_profile(&profile)?;
    let format = if binary {
        MatrixFormat::Binary
    } else {
        MatrixFormat::Csv
    };
    let written = pipeline::write_analysis(&analysis, out, &provenance, format)?;
    log::info!("wrote {} files to {}", written.len(), out.display());
    Ok(())
}

fn describe(args: &GlobalArgs, pipeline: &Pipeline, input: &Path) -> Result<()> {
    let profile = load_checked_profile(args, pipeline.config())?;
    let out = required(&args.out, "out")?;
    let files = if input.is_dir() {
        pipeline::list_wav_files(input)?
    } else {
        vec![input.to_path_buf()]
    };
    let rows = pipeline.batch_descriptors(&files, &profile, &weightings(args.weighting));
    let provenance = pipeline.config().provenance()?.with_profile(&profile)?;
    pipeline::write_descriptor_csv(&rows, out, &provenance)?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    if rows.is_empty() {
        return Err(Error::Input(format!("no .wav files in {}", input.display())));
    }
    if failed == rows.len() {
        return Err(Error::Input(format!("all {} files failed", files.len())));
    }
    if failed > 0 {
        log::warn!("{failed} of {} rows failed; see the warnings column", rows.len());
    }
    Ok(())
}

fn compare(args: &GlobalArgs, cfg: &RunConfig, descriptors: &Path, perceptual: &Path) -> Result<()> {
    let out = required(&args.out, "out")?;
    let table = PerceptualTable::read_csv(perceptual)?;
    let rows = pipeline::read_descriptor_csv(descriptors)?;
    let provenance = cfg.provenance()?;
    let report = pipeline::compare(&rows, &table, out, &provenance)?;
    print!("{}", pipeline::correlation_summary(&report));
    Ok(())
}
