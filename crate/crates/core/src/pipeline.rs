//! End-to-end runs: calibration, per-sound analysis, descriptor batches and
//! the comparison against perceptual coordinates, plus their file outputs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{
    self, correlate_with_mds, match_rows, prevalence, CorrelationReport, DescriptorKind, MapHistograms,
    PerceptualTable, PrevalenceReport,
};
use crate::calibration::{self, CalibrationSettings, CorrelationProfile, DEFAULT_THETA};
use crate::descriptors::{compute_descriptors, DescriptorConfig, DescriptorTriple, Weighting};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::export::{self, Provenance};
use crate::filterbank::{Cochleagram, Filterbank, FilterbankConfig};
use crate::signal_io::{self, NoiseSpec, Signal, REQUIRED_SAMPLE_RATE};
use crate::texture::{texture_maps, OffsetMode, TextureMaps, TractParams};

/// Every tunable of a run. Loaded from TOML; command-line flags override.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub theta: f64,
    /// Drop the first filter-length of frames, where the filters are still
    /// filling from the implicit zeros before the signal.
    pub skip_warmup: bool,
    /// Add a white-noise floor (same distribution as the calibration noise,
    /// seed + 1) to analysed sounds.
    pub noise_floor: bool,
    pub offset_mode: OffsetMode,
    pub filterbank: FilterbankConfig,
    pub noise: NoiseSpec,
    pub tract: TractParams,
    pub descriptors: DescriptorConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            theta: DEFAULT_THETA,
            skip_warmup: true,
            noise_floor: true,
            offset_mode: OffsetMode::default(),
            filterbank: FilterbankConfig::default(),
            noise: NoiseSpec::default(),
            tract: TractParams::default(),
            descriptors: DescriptorConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.filterbank.validate()?;
        if self.filterbank.sample_rate != REQUIRED_SAMPLE_RATE {
            return Err(Error::Config(format!(
                "sample rate must be {REQUIRED_SAMPLE_RATE} Hz, got {}",
                self.filterbank.sample_rate
            )));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::Config(format!("theta must lie in (0, 1), got {}", self.theta)));
        }
        self.noise.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.tract.validate()?;
        self.descriptors.validate()
    }

    pub fn seed(&self) -> u64 {
        self.noise.seed
    }

    /// Noise floor spec: the calibration distribution with the next seed.
    pub fn floor_spec(&self) -> NoiseSpec {
        self.noise.with_seed(self.noise.seed.wrapping_add(1))
    }

    pub fn provenance(&self) -> Result<Provenance> {
        Provenance::new(self.filterbank.config_hash(), self.seed(), self)
    }
}

/// Texture analysis of one sound.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub cochleagram: Cochleagram,
    pub maps: TextureMaps,
    pub histograms: MapHistograms,
    /// Present when the profile carries reference histograms.
    pub prevalence: Option<[PrevalenceReport; 4]>,
}

impl Analysis {
    pub fn prevalence_named(&self) -> Option<[(&'static str, &PrevalenceReport); 4]> {
        self.prevalence.as_ref().map(|p| {
            [
                ("o_h", &p[0]),
                ("o_v", &p[1]),
                ("t_vert", &p[2]),
                ("t_horiz", &p[3]),
            ]
        })
    }
}

/// One row of a descriptor batch: a triple, or the error for that file.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchRow {
    pub file: String,
    pub weighting: Weighting,
    pub outcome: std::result::Result<DescriptorTriple, String>,
}

/// A configured filterbank ready to process many sounds.
pub struct Pipeline {
    config: RunConfig,
    filterbank: Filterbank,
    exec: Execution,
}

impl Pipeline {
    pub fn new(config: RunConfig, exec: Execution) -> Result<Self> {
        config.validate()?;
        let filterbank = Filterbank::new(&config.filterbank)?;
        Ok(Self {
            config,
            filterbank,
            exec,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn filterbank(&self) -> &Filterbank {
        &self.filterbank
    }

    fn trim(&self, cg: Cochleagram) -> Result<Cochleagram> {
        if !self.config.skip_warmup {
            return Ok(cg);
        }
        let warmup = self.config.filterbank.filter_len_frames();
        if cg.n_frames() <= warmup {
            return Err(Error::Input(format!(
                "{}: {} frames do not outlast the {warmup}-frame filter warm-up",
                cg.source_id(),
                cg.n_frames()
            )));
        }
        cg.skip_frames(warmup)
    }

    /// Cochleagram of a raw signal, without a noise floor.
    pub fn cochleagram(&self, signal: &Signal, source_id: &str) -> Result<Cochleagram> {
        if signal.sample_rate() != REQUIRED_SAMPLE_RATE {
            return Err(Error::Input(format!(
                "{source_id}: sample rate {} Hz, expected {REQUIRED_SAMPLE_RATE} Hz",
                signal.sample_rate()
            )));
        }
        let cg = self.filterbank.cochleagram(signal, self.exec)?.with_source_id(source_id);
        self.trim(cg)
    }

    /// Cochleagram of a sound to be analysed: noise floor added if configured.
    pub fn sound_cochleagram(&self, signal: &Signal, source_id: &str) -> Result<Cochleagram> {
        if self.config.noise_floor {
            let floored = signal_io::add_noise_floor(signal, &self.config.floor_spec())?;
            self.cochleagram(&floored, source_id)
        } else {
            self.cochleagram(signal, source_id)
        }
    }

    /// Calibrates on the configured noise and attaches the white-noise
    /// reference histograms.
    pub fn calibrate(&self) -> Result<CorrelationProfile> {
        let cg = self.calibration_cochleagram()?;
        self.calibrate_from(&cg)
    }

    /// Cochleagram of the configured calibration noise.
    pub fn calibration_cochleagram(&self) -> Result<Cochleagram> {
        let noise = signal_io::generate_white_noise(&self.config.noise, self.config.filterbank.sample_rate)?;
        self.cochleagram(&noise, "calibration-noise")
    }

    /// Calibration on a precomputed noise cochleagram of the configured noise.
    pub fn calibrate_from(&self, cg: &Cochleagram) -> Result<CorrelationProfile> {
        let spec = &self.config.noise;
        let settings = CalibrationSettings::for_config(&self.config.filterbank, self.config.theta);
        let mut profile = calibration::estimate_profile(cg, &settings, self.exec)?;
        profile.noise_spec = Some(spec.clone());
        profile.duration_s = spec.duration_s;
        let maps = texture_maps(cg, &profile, &self.config.tract, self.config.offset_mode, self.exec)?;
        let reference = MapHistograms::from_maps(&maps)?;
        profile.reference_histograms =
            Some(reference.into_reference(self.config.tract, self.config.offset_mode));
        Ok(profile)
    }

    fn check_profile(&self, profile: &CorrelationProfile) -> Result<()> {
        let expected = self.config.filterbank.config_hash();
        if profile.config_hash != expected {
            return Err(Error::Version(format!(
                "profile was calibrated with config {} but the run uses {expected}; recalibrate",
                profile.config_hash
            )));
        }
        Ok(())
    }

    pub fn texture(&self, cg: &Cochleagram, profile: &CorrelationProfile) -> Result<TextureMaps> {
        self.check_profile(profile)?;
        profile.check_matches(cg)?;
        texture_maps(cg, profile, &self.config.tract, self.config.offset_mode, self.exec)
    }

    /// Full analysis of a sound: cochleagram, maps, histograms and, when the
    /// profile holds matching reference histograms, prevalence ratios.
    pub fn analyze(&self, signal: &Signal, source_id: &str, profile: &CorrelationProfile) -> Result<Analysis> {
        let cochleagram = self.sound_cochleagram(signal, source_id)?;
        self.analyze_cochleagram(cochleagram, profile)
    }

    pub fn analyze_cochleagram(&self, cochleagram: Cochleagram, profile: &CorrelationProfile) -> Result<Analysis> {
        let maps = self.texture(&cochleagram, profile)?;
        let histograms = MapHistograms::from_maps(&maps)?;
        let prevalence = match &profile.reference_histograms {
            Some(reference)
                if reference.tract_params == self.config.tract
                    && reference.offset_mode == self.config.offset_mode =>
            {
                Some([
                    prevalence(&histograms.o_h, &reference.o_h)?,
                    prevalence(&histograms.o_v, &reference.o_v)?,
                    prevalence(&histograms.t_vert, &reference.t_vert)?,
                    prevalence(&histograms.t_horiz, &reference.t_horiz)?,
                ])
            }
            Some(_) => {
                log::warn!(
                    "reference histograms were computed with other tract parameters; skipping prevalence"
                );
                None
            }
            None => {
                log::warn!("profile has no reference histograms; skipping prevalence");
                None
            }
        };
        Ok(Analysis {
            cochleagram,
            maps,
            histograms,
            prevalence,
        })
    }

    /// Descriptors of one sound for each requested weighting.
    pub fn describe(
        &self,
        signal: &Signal,
        source_id: &str,
        profile: &CorrelationProfile,
        weightings: &[Weighting],
    ) -> Result<Vec<DescriptorTriple>> {
        let cg = self.sound_cochleagram(signal, source_id)?;
        let maps = self.texture(&cg, profile)?;
        weightings
            .iter()
            .map(|w| compute_descriptors(&maps, &cg, &self.config.descriptors, *w))
            .collect()
    }

    /// Descriptors for many files. Failures become error rows; row order
    /// follows `paths`, then `weightings`.
    pub fn batch_descriptors(
        &self,
        paths: &[PathBuf],
        profile: &CorrelationProfile,
        weightings: &[Weighting],
    ) -> Vec<BatchRow> {
        let per_file = exec::map_range(self.exec, paths.len(), |i| {
            let path = &paths[i];
            let file = path.display().to_string();
            let result = signal_io::read_wav(path).and_then(|s| self.describe(&s, &file, profile, weightings));
            match result {
                Ok(triples) => triples
                    .into_iter()
                    .map(|t| BatchRow {
                        file: file.clone(),
                        weighting: t.weighting,
                        outcome: Ok(t),
                    })
                    .collect::<Vec<_>>(),
                Err(e) => {
                    log::error!("{file}: {e}");
                    weightings
                        .iter()
                        .map(|w| BatchRow {
                            file: file.clone(),
                            weighting: *w,
                            outcome: Err(e.to_string()),
                        })
                        .collect()
                }
            }
        });
        per_file.into_iter().flatten().collect()
    }
}

/// `.wav` files directly inside `dir`, sorted by name.
pub fn list_wav_files(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_wav = path
            .extension()
            .is_some_and(|ext| ext.eq_ignore_ascii_case("wav"));
        if path.is_file() && is_wav {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// On-disk format for matrices written by [`write_analysis`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MatrixFormat {
    #[default]
    Csv,
    Binary,
}

/// Writes the cochleagram, the four maps with masks, their histograms and
/// the prevalence reports into `dir`. Returns the files written.
pub fn write_analysis(
    analysis: &Analysis,
    dir: impl AsRef<Path>,
    provenance: &Provenance,
    format: MatrixFormat,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    create_dir(dir)?;
    let cg = &analysis.cochleagram;
    let freqs = cg.channel_frequencies();
    let mut written = Vec::new();
    let ext = match format {
        MatrixFormat::Csv => "csv",
        MatrixFormat::Binary => "stxm",
    };
    let mut matrix = |name: &str, values: &ndarray::Array2<f64>| -> Result<()> {
        let path = dir.join(format!("{name}.{ext}"));
        match format {
            MatrixFormat::Csv => export::write_matrix_csv(values, freqs, &path, provenance)?,
            MatrixFormat::Binary => export::write_matrix_binary(values, cg.frame_rate(), freqs, &path, provenance)?,
        }
        written.push(path);
        Ok(())
    };
    matrix("cochleagram", cg.log_energy())?;
    let maps = &analysis.maps;
    for (name, map) in [
        ("o_h", &maps.o_h),
        ("o_v", &maps.o_v),
        ("t_vert", &maps.t_vert),
        ("t_horiz", &maps.t_horiz),
    ] {
        matrix(name, map.values())?;
        matrix(&format!("{name}_mask"), &map.valid().mapv(|v| if v { 1.0 } else { 0.0 }))?;
    }
    for (name, hist) in analysis.histograms.named() {
        let path = dir.join(format!("{name}_histogram.csv"));
        export::write_histogram_csv(hist, &path, provenance)?;
        written.push(path);
    }
    if let Some(reports) = analysis.prevalence_named() {
        for (name, report) in reports {
            let path = dir.join(format!("{name}_prevalence.csv"));
            export::write_prevalence_csv(report, &path, provenance)?;
            written.push(path);
        }
    }
    Ok(written)
}

fn fmt_value(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        v.to_string()
    }
}

/// Descriptor table: `file,weighting,P,T,N,n_valid_cells,warnings`. Error
/// rows leave the numeric columns empty and put the error in `warnings`.
pub fn write_descriptor_csv(rows: &[BatchRow], path: impl AsRef<Path>, provenance: &Provenance) -> Result<()> {
    let path = path.as_ref();
    let mut buf = provenance.header().into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["file", "weighting", "P", "T", "N", "n_valid_cells", "warnings"])?;
        for row in rows {
            let record = match &row.outcome {
                Ok(t) => [
                    row.file.clone(),
                    row.weighting.as_str().to_string(),
                    fmt_value(t.pulsality),
                    fmt_value(t.tonality),
                    fmt_value(t.noisiness),
                    t.n_valid_cells.to_string(),
                    t.warnings.join("; "),
                ],
                Err(e) => [
                    row.file.clone(),
                    row.weighting.as_str().to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    format!("error: {e}"),
                ],
            };
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Reads a descriptor table; error rows are skipped with a warning.
pub fn read_descriptor_csv(path: impl AsRef<Path>) -> Result<Vec<DescriptorTriple>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
    let headers = rdr.headers()?.clone();
    let expected = ["file", "weighting", "P", "T", "N", "n_valid_cells", "warnings"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Input(format!(
            "{}: expected header {}",
            path.display(),
            expected.join(",")
        )));
    }
    let mut out = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let bad = |what: &str| Error::Input(format!("{}: row {}: {what}", path.display(), line + 1));
        if record[2].is_empty() {
            log::warn!("{}: skipping failed row for {}", path.display(), &record[0]);
            continue;
        }
        let num = |i: usize| record[i].trim().parse::<f64>().map_err(|_| bad("bad number"));
        out.push(DescriptorTriple {
            file: record[0].to_string(),
            weighting: record[1].parse()?,
            pulsality: num(2)?,
            tonality: num(3)?,
            noisiness: num(4)?,
            n_valid_cells: record[5].parse().map_err(|_| bad("bad cell count"))?,
            warnings: record[6]
                .split("; ")
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect(),
        });
    }
    Ok(out)
}

/// Plain-text correlation tables, one per weighting, descriptors × MDS dims.
pub fn correlation_summary(report: &CorrelationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "Pearson correlations with perceptual dimensions ({} sounds matched, {} unmatched)",
        report.matched, report.unmatched
    );
    for weighting in [Weighting::Energy, Weighting::Area] {
        let tag = match weighting {
            Weighting::Energy => "E",
            Weighting::Area => "1",
        };
        if report.get(DescriptorKind::Pulsality, weighting, 1).is_none() {
            continue;
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{} weighting", weighting.as_str());
        let _ = writeln!(s, "{:<18}{:>8}{:>8}{:>8}", "", "MDS1", "MDS2", "MDS3");
        for kind in DescriptorKind::ALL {
            let label = format!("{} {}({tag})", kind.label(), kind.symbol());
            let _ = write!(s, "{label:<18}");
            for dim in 1..=3 {
                let r = report.get(kind, weighting, dim).unwrap_or(f64::NAN);
                let _ = write!(s, "{r:>8.2}");
            }
            let excluded = report
                .entries
                .iter()
                .filter(|e| e.descriptor == kind && e.weighting == weighting)
                .map(|e| e.correlation.excluded)
                .max()
                .unwrap_or(0);
            if excluded > 0 {
                let _ = write!(s, "  ({excluded} excluded)");
            }
            let _ = writeln!(s);
        }
    }
    s
}

fn correlation_grid_csv(report: &CorrelationReport, provenance: &Provenance) -> String {
    let mut s = provenance.header();
    s.push_str("descriptor,weighting,mds_dim,r,abs_r,n,excluded\n");
    for e in &report.entries {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            e.descriptor.symbol(),
            e.weighting.as_str(),
            e.mds_dim,
            e.correlation.r,
            e.correlation.r.abs(),
            e.correlation.n,
            e.correlation.excluded
        );
    }
    s
}

/// A descriptor axis with its sign.
pub type SignedAxis = (f64, DescriptorKind);

/// Scatter axes: (x, y) descriptor with sign, matching the usual plots.
pub const SCATTER_AXES: [(&str, SignedAxis, SignedAxis); 3] = [
    ("negP_T", (-1.0, DescriptorKind::Pulsality), (1.0, DescriptorKind::Tonality)),
    ("N_T", (1.0, DescriptorKind::Noisiness), (1.0, DescriptorKind::Tonality)),
    ("N_negP", (1.0, DescriptorKind::Noisiness), (-1.0, DescriptorKind::Pulsality)),
];

fn scatter_csv(
    descriptors: &[DescriptorTriple],
    perceptual: &PerceptualTable,
    x: (f64, DescriptorKind),
    y: (f64, DescriptorKind),
    provenance: &Provenance,
) -> String {
    let mut s = provenance.header();
    s.push_str("sound_id,category,weighting,x,y\n");
    for weighting in [Weighting::Energy, Weighting::Area] {
        for (d, p) in match_rows(descriptors, weighting, perceptual).pairs {
            let category = serde_json::to_value(p.category)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                p.sound_id,
                category,
                weighting.as_str(),
                fmt_value(x.0 * x.1.value(d)),
                fmt_value(y.0 * y.1.value(d)),
            );
        }
    }
    s
}

/// Correlates descriptors with perceptual coordinates and writes
/// `correlations.csv`, `correlations.txt` and three `scatter_*.csv` files.
pub fn compare(
    descriptors: &[DescriptorTriple],
    perceptual: &PerceptualTable,
    dir: impl AsRef<Path>,
    provenance: &Provenance,
) -> Result<CorrelationReport> {
    let report = correlate_with_mds(descriptors, perceptual)?;
    let dir = dir.as_ref();
    create_dir(dir)?;
    write_text(&dir.join("correlations.csv"), &correlation_grid_csv(&report, provenance))?;
    let mut summary = provenance.header();
    summary.push_str(&correlation_summary(&report));
    write_text(&dir.join("correlations.txt"), &summary)?;
    for (name, x, y) in SCATTER_AXES {
        write_text(
            &dir.join(format!("scatter_{name}.csv")),
            &scatter_csv(descriptors, perceptual, x, y, provenance),
        )?;
    }
    Ok(report)
}

pub use analysis::sound_key;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let text = cfg.to_toml_string();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_toml_overrides_defaults() {
        let cfg = RunConfig::from_toml_str(
            "theta = 0.25\n[tract]\nc_t = 3.0\n[descriptors]\ngate_threshold = 9.0\n[noise]\nseed = 42\n",
        )
        .unwrap();
        assert_eq!(cfg.theta, 0.25);
        assert_eq!(cfg.tract.c_t, 3.0);
        assert_eq!(cfg.tract.c_p, 0.7);
        assert_eq!(cfg.descriptors.gate_threshold, 9.0);
        assert_eq!(cfg.seed(), 42);
        assert_eq!(cfg.floor_spec().seed, 43);
        assert_eq!(cfg.filterbank, FilterbankConfig::default());
    }

    #[test]
    fn bad_configs() {
        assert!(matches!(RunConfig::from_toml_str("thetta = 1"), Err(Error::Config(_))));
        let cfg = RunConfig {
            theta: 1.5,
            ..RunConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = RunConfig::default();
        cfg.filterbank.sample_rate = 48_000;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = RunConfig::default();
        cfg.noise.p = 0.0;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    fn row(file: &str, w: Weighting, p: f64) -> BatchRow {
        BatchRow {
            file: file.into(),
            weighting: w,
            outcome: Ok(DescriptorTriple {
                file: file.into(),
                weighting: w,
                pulsality: p,
                tonality: -0.5,
                noisiness: f64::NEG_INFINITY,
                n_valid_cells: 12,
                warnings: vec!["noisiness gated sum is zero".into()],
            }),
        }
    }

    #[test]
    fn descriptor_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let rows = vec![
            row("a, b.wav", Weighting::Energy, -0.125),
            row("a, b.wav", Weighting::Area, -1.0 / 3.0),
            BatchRow {
                file: "broken.wav".into(),
                weighting: Weighting::Energy,
                outcome: Err("unsupported audio format".into()),
            },
        ];
        let prov = RunConfig::default().provenance().unwrap();
        write_descriptor_csv(&rows, &path, &prov).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# soundtexture"));
        assert!(text.contains("file,weighting,P,T,N,n_valid_cells,warnings\n"));
        assert!(text.contains("broken.wav,energy,,,,,error: unsupported audio format"));
        let back = read_descriptor_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(&back[0], rows[0].outcome.as_ref().unwrap());
        assert_eq!(&back[1], rows[1].outcome.as_ref().unwrap());
    }

    #[test]
    fn wav_listing_is_sorted_and_filtered() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["b.wav", "a.WAV", "c.txt"] {
            std::fs::write(dir.path().join(name), b"").unwrap();
        }
        std::fs::create_dir(dir.path().join("d.wav")).unwrap();
        let files = list_wav_files(dir.path()).unwrap();
        let names: Vec<_> = files
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, ["a.WAV", "b.wav"]);
    }

    #[test]
    fn summary_layout() {
        use crate::analysis::{Category, PerceptualRow};
        let table = PerceptualTable::new(
            (0..5)
                .map(|i| PerceptualRow {
                    sound_id: format!("s{i}"),
                    category: Category::Continuous,
                    mds1: i as f64,
                    mds2: (i * i) as f64,
                    mds3: ((i * 7) % 5) as f64,
                })
                .collect(),
        )
        .unwrap();
        let descriptors: Vec<DescriptorTriple> = (0..5)
            .map(|i| {
                let x = i as f64;
                DescriptorTriple {
                    file: format!("s{i}.wav"),
                    weighting: Weighting::Energy,
                    pulsality: -x,
                    tonality: -(4.0 - x) * 0.3,
                    noisiness: -(x - 2.0).abs() - 0.1,
                    n_valid_cells: 1,
                    warnings: vec![],
                }
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let prov = RunConfig::default().provenance().unwrap();
        let report = compare(&descriptors, &table, dir.path(), &prov).unwrap();
        let text = correlation_summary(&report);
        assert!(text.contains("energy weighting"));
        assert!(!text.contains("area weighting"));
        assert!(text.contains("Pulsality P(E)       -1.00"));
        let scatter = std::fs::read_to_string(dir.path().join("scatter_negP_T.csv")).unwrap();
        assert!(scatter.contains("s3,continuous,energy,3,-0.3"));
    }
}
