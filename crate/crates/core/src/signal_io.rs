//! Audio input/output, reference noise generation and test-signal synthesis.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// All calibration constants assume this rate.
pub const REQUIRED_SAMPLE_RATE: u32 = 44_100;

/// Mono waveform on the 16-bit PCM amplitude scale.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Input("signal has no samples".into()));
        }
        if sample_rate == 0 {
            return Err(Error::Input("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Input(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Multiplies every sample by `gain`.
    pub fn scaled(&self, gain: f64) -> Signal {
        Signal {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
        }
    }

    /// Prepends `count` zero samples.
    pub fn delayed(&self, count: usize) -> Signal {
        let mut samples = vec![0.0; count];
        samples.extend_from_slice(&self.samples);
        Signal {
            samples,
            sample_rate: self.sample_rate,
        }
    }

    /// Appends the samples of `other`, which must share the sample rate.
    pub fn concat(&self, other: &Signal) -> Result<Signal> {
        if other.sample_rate != self.sample_rate {
            return Err(Error::Input(format!(
                "cannot concatenate {} Hz and {} Hz signals",
                self.sample_rate, other.sample_rate
            )));
        }
        let mut samples = self.samples.clone();
        samples.extend_from_slice(&other.samples);
        Ok(Signal {
            samples,
            sample_rate: self.sample_rate,
        })
    }
}

/// Binomial white-noise recipe: draw from B(n, p), subtract `offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    pub n_trials: u64,
    pub p: f64,
    pub offset: i64,
    pub duration_s: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            n_trials: 20,
            p: 0.5,
            offset: 10,
            duration_s: 200.0,
            seed: 1,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::Config("noise n_trials must be positive".into()));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::Config(format!(
                "noise p must lie in (0, 1), got {}",
                self.p
            )));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::Config(format!(
                "noise duration must be positive, got {}",
                self.duration_s
            )));
        }
        Ok(())
    }

    pub fn with_duration(&self, duration_s: f64) -> Self {
        Self {
            duration_s,
            ..self.clone()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    /// Variance of a single draw, n·p·(1−p).
    pub fn variance(&self) -> f64 {
        self.n_trials as f64 * self.p * (1.0 - self.p)
    }

    /// Draws `count` samples from a ChaCha8 stream seeded with `self.seed`.
    fn draw(&self, count: usize) -> Result<Vec<f64>> {
        self.validate()?;
        let dist = Binomial::new(self.n_trials, self.p)
            .map_err(|e| Error::Config(format!("binomial: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        Ok((0..count)
            .map(|_| (dist.sample(&mut rng) as i64 - self.offset) as f64)
            .collect())
    }
}

/// White noise of `spec.duration_s` seconds. Deterministic for a given seed.
pub fn generate_white_noise(spec: &NoiseSpec, sample_rate: u32) -> Result<Signal> {
    spec.validate()?;
    let count = (spec.duration_s * sample_rate as f64).round() as usize;
    if count == 0 {
        return Err(Error::Config("noise duration shorter than one sample".into()));
    }
    Signal::new(spec.draw(count)?, sample_rate)
}

/// Adds a fresh noise floor drawn from `spec` (its duration is ignored; the
/// floor always matches the signal length).
pub fn add_noise_floor(signal: &Signal, spec: &NoiseSpec) -> Result<Signal> {
    let floor = spec.draw(signal.len())?;
    let samples = signal
        .samples()
        .iter()
        .zip(&floor)
        .map(|(s, n)| s + n)
        .collect();
    Signal::new(samples, signal.sample_rate())
}

/// Synthetic stand-ins for harmonic, impact and silent sounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Archetype {
    Tone { frequency_hz: f64 },
    ClickTrain { rate_hz: f64 },
    Silence,
}

pub fn synthesize_archetype(
    kind: Archetype,
    duration_s: f64,
    amplitude: f64,
    sample_rate: u32,
) -> Result<Signal> {
    if !(duration_s > 0.0) {
        return Err(Error::Config("archetype duration must be positive".into()));
    }
    let rate = sample_rate as f64;
    let count = (duration_s * rate).round() as usize;
    if count == 0 {
        return Err(Error::Config("archetype shorter than one sample".into()));
    }
    let nyquist = rate / 2.0;
    let samples = match kind {
        Archetype::Tone { frequency_hz } => {
            if !(frequency_hz > 0.0 && frequency_hz < nyquist) {
                return Err(Error::Config(format!(
                    "tone frequency {frequency_hz} Hz aliases at {sample_rate} Hz"
                )));
            }
            let w = 2.0 * std::f64::consts::PI * frequency_hz / rate;
            (0..count).map(|n| amplitude * (w * n as f64).sin()).collect()
        }
        Archetype::ClickTrain { rate_hz } => {
            if !(rate_hz > 0.0 && rate_hz < nyquist) {
                return Err(Error::Config(format!(
                    "click rate {rate_hz} Hz aliases at {sample_rate} Hz"
                )));
            }
            let mut s = vec![0.0; count];
            let period = rate / rate_hz;
            let mut k = 0usize;
            loop {
                let idx = (k as f64 * period).round() as usize;
                if idx >= count {
                    break;
                }
                s[idx] = amplitude;
                k += 1;
            }
            s
        }
        Archetype::Silence => vec![0.0; count],
    };
    Signal::new(samples, sample_rate)
}

/// Reads a 16-bit PCM WAV file. Multi-channel files yield channel 0.
pub fn read_wav(path: impl AsRef<Path>) -> Result<Signal> {
    let path = path.as_ref();
    let mut reader = hound::WavReader::open(path).map_err(|e| wav_error(path, e))?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::Format(format!(
            "{}: expected 16-bit integer PCM, found {:?} {} bit",
            path.display(),
            spec.sample_format,
            spec.bits_per_sample
        )));
    }
    let channels = spec.channels.max(1) as usize;
    if channels > 1 {
        log::warn!(
            "{}: {} channels, using channel 0 only",
            path.display(),
            channels
        );
    }
    let mut samples = Vec::with_capacity(reader.len() as usize / channels);
    for (i, s) in reader.samples::<i16>().enumerate() {
        let s = s.map_err(|e| wav_error(path, e))?;
        if i % channels == 0 {
            samples.push(s as f64);
        }
    }
    if samples.is_empty() {
        return Err(Error::Input(format!("{}: no audio frames", path.display())));
    }
    Signal::new(samples, spec.sample_rate)
}

/// Writes a mono 16-bit PCM WAV. Samples are rounded; values outside the
/// i16 range are rejected rather than clipped.
pub fn write_wav(signal: &Signal, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut ints = Vec::with_capacity(signal.len());
    for (index, &value) in signal.samples().iter().enumerate() {
        let r = value.round();
        if r < i16::MIN as f64 || r > i16::MAX as f64 {
            return Err(Error::Range { index, value });
        }
        ints.push(r as i16);
    }
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate(),
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| wav_error(path, e))?;
    for s in ints {
        writer.write_sample(s).map_err(|e| wav_error(path, e))?;
    }
    writer.finalize().map_err(|e| wav_error(path, e))
}

fn wav_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::Format(format!("{}: {other}", path.display())),
    }
}
