use std::path::Path;
use std::sync::OnceLock;

use soundtexture::calibration::CorrelationProfile;
use soundtexture::descriptors::Weighting;
use soundtexture::export::{read_matrix_binary, read_matrix_csv, Provenance};
use soundtexture::pipeline::{self, MatrixFormat};
use soundtexture::signal_io::{synthesize_archetype, write_wav, Archetype, Signal};
use soundtexture::texture::{FeatureMap, TractParams};
use soundtexture::{Error, Execution, Pipeline, RunConfig};

const RATE: u32 = 44_100;

fn config() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.noise.duration_s = 30.0;
    cfg
}

fn profile() -> &'static CorrelationProfile {
    static PROFILE: OnceLock<CorrelationProfile> = OnceLock::new();
    PROFILE.get_or_init(|| Pipeline::new(config(), Execution::Parallel).unwrap().calibrate().unwrap())
}

fn pipeline(exec: Execution) -> Pipeline {
    Pipeline::new(config(), exec).unwrap()
}

fn mix(seconds: f64) -> Signal {
    let tone = synthesize_archetype(Archetype::Tone { frequency_hz: 700.0 }, seconds, 4000.0, RATE).unwrap();
    let clicks = synthesize_archetype(Archetype::ClickTrain { rate_hz: 5.0 }, seconds, 8000.0, RATE).unwrap();
    let s = tone.samples().iter().zip(clicks.samples()).map(|(a, b)| a + b).collect();
    Signal::new(s, RATE).unwrap()
}

fn same_map(a: &FeatureMap, b: &FeatureMap) -> bool {
    a.valid() == b.valid() && a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits())
}

#[test]
fn silence_with_noise_floor_is_analyzable() {
    let silence = synthesize_archetype(Archetype::Silence, 2.0, 0.0, RATE).unwrap();
    let p = pipeline(Execution::Parallel);
    let analysis = p.analyze(&silence, "silence", profile()).unwrap();
    assert!(analysis.cochleagram.log_energy().iter().all(|v| v.is_finite()));
    let triples = p.describe(&silence, "silence", profile(), &[Weighting::Energy, Weighting::Area]).unwrap();
    assert!(triples.iter().all(|t| t.n_valid_cells > 0));
}

#[test]
fn analysis_is_deterministic_and_execution_independent() {
    let signal = mix(2.0);
    let seq = pipeline(Execution::Sequential).analyze(&signal, "mix", profile()).unwrap();
    let par = pipeline(Execution::Parallel).analyze(&signal, "mix", profile()).unwrap();
    let again = pipeline(Execution::Parallel).analyze(&signal, "mix", profile()).unwrap();
    for other in [&par, &again] {
        assert_eq!(seq.cochleagram, other.cochleagram);
        assert!(same_map(&seq.maps.o_h, &other.maps.o_h));
        assert!(same_map(&seq.maps.o_v, &other.maps.o_v));
        assert!(same_map(&seq.maps.t_vert, &other.maps.t_vert));
        assert!(same_map(&seq.maps.t_horiz, &other.maps.t_horiz));
    }
}

#[test]
fn exported_matrices_round_trip() {
    let p = pipeline(Execution::Parallel);
    let analysis = p.analyze(&mix(1.5), "mix", profile()).unwrap();
    let prov = p.config().provenance().unwrap().with_profile(profile()).unwrap();
    let dir = tempfile::tempdir().unwrap();

    let written = pipeline::write_analysis(&analysis, dir.path().join("csv"), &prov, MatrixFormat::Csv).unwrap();
    // cochleagram, 4 maps + 4 masks, 4 histograms, 4 prevalence reports
    assert_eq!(written.len(), 17);
    let (freqs, values) = read_matrix_csv(dir.path().join("csv/cochleagram.csv")).unwrap();
    assert_eq!(freqs, analysis.cochleagram.channel_frequencies());
    assert_eq!(&values, analysis.cochleagram.log_energy());
    let (_, mask) = read_matrix_csv(dir.path().join("csv/t_vert_mask.csv")).unwrap();
    assert_eq!(mask, analysis.maps.t_vert.valid().mapv(|v| if v { 1.0 } else { 0.0 }));
    let text = std::fs::read_to_string(dir.path().join("csv/t_horiz_prevalence.csv")).unwrap();
    assert!(text.starts_with(&prov.header()));

    pipeline::write_analysis(&analysis, dir.path().join("bin"), &prov, MatrixFormat::Binary).unwrap();
    let bin = read_matrix_binary(dir.path().join("bin/cochleagram.stxm")).unwrap();
    assert_eq!(bin.frame_rate, analysis.cochleagram.frame_rate());
    assert_eq!(bin.values, analysis.cochleagram.log_energy().mapv(|v| v as f32));
    assert!(bin.provenance.contains(&format!("seed: {}", p.config().seed())));
}

#[test]
fn batch_descriptors_keep_going_past_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    write_wav(&mix(1.5), dir.path().join("a.wav")).unwrap();
    std::fs::write(dir.path().join("b.wav"), b"not a wav file").unwrap();
    write_wav(
        &synthesize_archetype(Archetype::Tone { frequency_hz: 300.0 }, 1.5, 9000.0, RATE).unwrap(),
        dir.path().join("c.WAV"),
    )
    .unwrap();
    std::fs::write(dir.path().join("notes.txt"), b"ignored").unwrap();

    let p = pipeline(Execution::Parallel);
    let files = pipeline::list_wav_files(dir.path()).unwrap();
    assert_eq!(files.len(), 3);
    let rows = p.batch_descriptors(&files, profile(), &[Weighting::Energy, Weighting::Area]);
    assert_eq!(rows.len(), 6);
    assert!(rows[2].outcome.is_err() && rows[3].outcome.is_err());

    let out = dir.path().join("descriptors.csv");
    let prov = Provenance::new("h", 1, &p.config()).unwrap();
    pipeline::write_descriptor_csv(&rows, &out, &prov).unwrap();
    let back = pipeline::read_descriptor_csv(&out).unwrap();
    assert_eq!(back.len(), 4);
    for (row, t) in rows.iter().filter_map(|r| r.outcome.as_ref().ok()).zip(&back) {
        assert_eq!(row.file, t.file);
        assert_eq!(row.weighting, t.weighting);
        assert_eq!(row.pulsality.to_bits(), t.pulsality.to_bits());
        assert_eq!(row.tonality.to_bits(), t.tonality.to_bits());
        assert_eq!(row.noisiness.to_bits(), t.noisiness.to_bits());
    }
    assert!(Path::new(&back[0].file).ends_with("a.wav"));
}

#[test]
fn foreign_profile_is_a_version_error() {
    let mut other = profile().clone();
    other.config_hash = "0000000000000000".into();
    let err = pipeline(Execution::Parallel).analyze(&mix(1.5), "mix", &other).unwrap_err();
    assert!(matches!(err, Error::Version(_)), "{err}");
}

#[test]
fn prevalence_needs_matching_tract_params() {
    let mut cfg = config();
    cfg.tract = TractParams { c_t: 3.0, ..cfg.tract };
    let p = Pipeline::new(cfg, Execution::Parallel).unwrap();
    let analysis = p.analyze(&mix(1.5), "mix", profile()).unwrap();
    assert!(analysis.prevalence.is_none());
    let default = pipeline(Execution::Parallel).analyze(&mix(1.5), "mix", profile()).unwrap();
    assert!(default.prevalence.is_some());
}
