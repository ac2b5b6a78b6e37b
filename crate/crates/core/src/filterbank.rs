//! Gammachirp filterbank and decimated log-energy cochleagrams.
//!
//! Each channel is a complex gammachirp
//! `N_s t^(n-1) exp(-2π b1 (erb1 f_s + erb0) t) exp(i 2π f_s t + i c1 ln t)`,
//! sampled at `t = k / sample_rate` for `k = 0..floor(t_max · sample_rate)`
//! and scaled so that `1 / N_s = f_s · sqrt(Σ |γ|²)`. The `t = 0` tap is zero.
//!
//! Convolution runs as FFT overlap-add; only the samples that survive
//! decimation are kept. Frame `k` holds the energy at input sample
//! `k·D + D − 1` (with `D = decimation_pre · decimation_post`), i.e. the last
//! sample of the `k`-th decimation period, so every frame has a full causal
//! history and frame `k` covers the time span starting at `k / frame_rate`.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::signal_io::Signal;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterbankConfig {
    pub n_seg: usize,
    pub f_min: f64,
    pub f_max: f64,
    /// Gamma order `n`.
    #[serde(rename = "n")]
    pub order: u32,
    pub b1: f64,
    pub c1: f64,
    pub erb0: f64,
    pub erb1: f64,
    pub t_max_s: f64,
    pub sample_rate: u32,
    pub decimation_pre: usize,
    pub decimation_post: usize,
}

impl Default for FilterbankConfig {
    fn default() -> Self {
        Self {
            n_seg: 133,
            f_min: 40.0,
            f_max: 11_025.0,
            order: 4,
            b1: 0.707,
            c1: -3.70,
            erb0: 24.7,
            erb1: 0.0779,
            t_max_s: 0.4,
            sample_rate: 44_100,
            decimation_pre: 2,
            decimation_post: 50,
        }
    }
}

impl FilterbankConfig {
    pub fn validate(&self) -> Result<()> {
        let nyquist = self.sample_rate as f64 / 2.0;
        if self.sample_rate == 0 {
            return Err(Error::Config("sample_rate must be positive".into()));
        }
        if self.n_seg < 2 {
            return Err(Error::Config(format!("n_seg must be >= 2, got {}", self.n_seg)));
        }
        if !(self.f_min > 0.0 && self.f_min < self.f_max) {
            return Err(Error::Config(format!(
                "need 0 < f_min < f_max, got f_min={} f_max={}",
                self.f_min, self.f_max
            )));
        }
        if self.f_max > nyquist {
            return Err(Error::Config(format!(
                "f_max {} Hz exceeds Nyquist {} Hz",
                self.f_max, nyquist
            )));
        }
        if self.order == 0 {
            return Err(Error::Config("gamma order must be >= 1".into()));
        }
        if !(self.b1 > 0.0 && self.erb0 + self.erb1 * self.f_min > 0.0) {
            return Err(Error::Config("filter bandwidths must be positive".into()));
        }
        if self.decimation_pre == 0 || self.decimation_post == 0 {
            return Err(Error::Config("decimation factors must be >= 1".into()));
        }
        if self.filter_len() < 2 {
            return Err(Error::Config(format!(
                "t_max_s={} gives fewer than two filter taps",
                self.t_max_s
            )));
        }
        Ok(())
    }

    /// `f_s = f_min · exp(α (2s − 1) / (2 n_seg))` for `s = 1..=n_seg`.
    pub fn channel_frequencies(&self) -> Vec<f64> {
        let alpha = (self.f_max / self.f_min).ln();
        (1..=self.n_seg)
            .map(|s| self.f_min * (alpha * (2 * s - 1) as f64 / (2 * self.n_seg) as f64).exp())
            .collect()
    }

    pub fn filter_len(&self) -> usize {
        (self.t_max_s * self.sample_rate as f64).floor() as usize
    }

    /// Total decimation factor between input samples and frames.
    pub fn decimation(&self) -> usize {
        self.decimation_pre * self.decimation_post
    }

    pub fn frame_rate(&self) -> f64 {
        self.sample_rate as f64 / self.decimation() as f64
    }

    /// Filter length expressed in frames, rounded up.
    pub fn filter_len_frames(&self) -> usize {
        self.filter_len().div_ceil(self.decimation())
    }

    /// Overlap-add transform size: next power of two ≥ 2 × filter length.
    pub fn fft_len(&self) -> usize {
        (2 * self.filter_len()).next_power_of_two()
    }

    /// Short stable identifier of every setting that shapes the cochleagram.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Debug)]
pub struct GammachirpFilter {
    pub channel: usize,
    pub center_frequency: f64,
    pub coefficients: Vec<Complex64>,
    pub normalization: f64,
}

/// Un-normalized gammachirp tap at time `t` seconds; zero at `t = 0`.
fn gammachirp_tap(config: &FilterbankConfig, f: f64, t: f64) -> Complex64 {
    if t <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let erb = config.erb1 * f + config.erb0;
    let envelope = t.powi(config.order as i32 - 1) * (-2.0 * PI * config.b1 * erb * t).exp();
    let phase = 2.0 * PI * f * t + config.c1 * t.ln();
    Complex64::from_polar(envelope, phase)
}

pub fn build_filterbank(config: &FilterbankConfig) -> Result<Vec<GammachirpFilter>> {
    config.validate()?;
    let len = config.filter_len();
    let rate = config.sample_rate as f64;
    Ok(config
        .channel_frequencies()
        .into_iter()
        .enumerate()
        .map(|(channel, f)| {
            let mut coefficients: Vec<Complex64> = (0..len)
                .map(|k| gammachirp_tap(config, f, k as f64 / rate))
                .collect();
            let power: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
            let normalization = 1.0 / (f * power.sqrt());
            for c in &mut coefficients {
                *c *= normalization;
            }
            GammachirpFilter {
                channel,
                center_frequency: f,
                coefficients,
                normalization,
            }
        })
        .collect())
}

/// Time-frequency matrix of log energies in dB, `frames × channels`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochleagram {
    log_energy: Array2<f64>,
    frame_rate: f64,
    channel_frequencies: Vec<f64>,
    source_id: String,
    config_hash: Option<String>,
}

impl Cochleagram {
    pub fn new(
        log_energy: Array2<f64>,
        frame_rate: f64,
        channel_frequencies: Vec<f64>,
        source_id: impl Into<String>,
    ) -> Result<Self> {
        let (frames, channels) = log_energy.dim();
        if frames == 0 || channels == 0 {
            return Err(Error::Input("cochleagram is empty".into()));
        }
        if channels != channel_frequencies.len() {
            return Err(Error::Input(format!(
                "{} channels but {} frequencies",
                channels,
                channel_frequencies.len()
            )));
        }
        if !(frame_rate > 0.0) {
            return Err(Error::Input("frame rate must be positive".into()));
        }
        if channel_frequencies.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Input("channel frequencies must increase strictly".into()));
        }
        if log_energy.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("cochleagram contains non-finite values".into()));
        }
        Ok(Self {
            log_energy,
            frame_rate,
            channel_frequencies,
            source_id: source_id.into(),
            config_hash: None,
        })
    }

    pub fn with_config_hash(mut self, hash: impl Into<String>) -> Self {
        self.config_hash = Some(hash.into());
        self
    }

    pub fn with_source_id(mut self, id: impl Into<String>) -> Self {
        self.source_id = id.into();
        self
    }

    pub fn log_energy(&self) -> &Array2<f64> {
        &self.log_energy
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn channel_frequencies(&self) -> &[f64] {
        &self.channel_frequencies
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn config_hash(&self) -> Option<&str> {
        self.config_hash.as_deref()
    }

    pub fn n_frames(&self) -> usize {
        self.log_energy.nrows()
    }

    pub fn n_channels(&self) -> usize {
        self.log_energy.ncols()
    }

    pub fn frame_time(&self, frame: usize) -> Result<f64> {
        if frame >= self.n_frames() {
            return Err(Error::Index {
                index: frame,
                len: self.n_frames(),
            });
        }
        Ok(frame as f64 / self.frame_rate)
    }

    /// Drops the first `frames` frames (e.g. filter warm-up).
    pub fn skip_frames(&self, frames: usize) -> Result<Cochleagram> {
        if frames >= self.n_frames() {
            return Err(Error::Input(format!(
                "cannot skip {frames} of {} frames",
                self.n_frames()
            )));
        }
        Ok(Self {
            log_energy: self.log_energy.slice(ndarray::s![frames.., ..]).to_owned(),
            ..self.clone()
        })
    }
}

/// Energy in dB, `10 log10(E)`.
pub fn energy_to_db(energy: f64) -> f64 {
    10.0 * energy.log10()
}

/// Filterbank with pre-transformed filter spectra for overlap-add.
pub struct Filterbank {
    config: FilterbankConfig,
    filters: Vec<GammachirpFilter>,
    spectra: Vec<Vec<Complex64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Filterbank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Filterbank")
            .field("config", &self.config)
            .field("fft_len", &self.config.fft_len())
            .finish()
    }
}

impl Filterbank {
    pub fn new(config: &FilterbankConfig) -> Result<Self> {
        let filters = build_filterbank(config)?;
        let n = config.fft_len();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let spectra = filters
            .iter()
            .map(|filt| {
                let mut buf = vec![Complex64::new(0.0, 0.0); n];
                buf[..filt.coefficients.len()].copy_from_slice(&filt.coefficients);
                forward.process(&mut buf);
                // fold the 1/n of the inverse transform into the filter
                let scale = 1.0 / n as f64;
                buf.iter_mut().for_each(|c| *c *= scale);
                buf
            })
            .collect();
        Ok(Self {
            config: config.clone(),
            filters,
            spectra,
            forward,
            inverse,
        })
    }

    pub fn config(&self) -> &FilterbankConfig {
        &self.config
    }

    pub fn filters(&self) -> &[GammachirpFilter] {
        &self.filters
    }

    fn check_signal(&self, signal: &Signal) -> Result<usize> {
        if signal.sample_rate() != self.config.sample_rate {
            return Err(Error::Input(format!(
                "signal sample rate {} Hz does not match filterbank rate {} Hz (no resampling is done)",
                signal.sample_rate(),
                self.config.sample_rate
            )));
        }
        let len = self.config.filter_len();
        if signal.len() <= len {
            return Err(Error::Input(format!(
                "signal of {} samples is not longer than one filter ({} samples)",
                signal.len(),
                len
            )));
        }
        Ok(signal.len() / self.config.decimation())
    }

    /// Complex filter outputs at the retained (decimated) samples,
    /// `frames × channels`, via FFT overlap-add.
    pub fn amplitudes(&self, signal: &Signal, exec: Execution) -> Result<Array2<Complex64>> {
        let frames = self.check_signal(signal)?;
        let channels = self.filters.len();
        let d = self.config.decimation();
        let n = self.config.fft_len();
        let taps = self.config.filter_len();
        let block = n - taps + 1;
        let x = signal.samples();
        let zero = Complex64::new(0.0, 0.0);

        let mut acc = Array2::from_elem((frames, channels), zero);
        let mut spectrum = vec![zero; n];
        let mut scratch = vec![zero; self.forward.get_inplace_scratch_len()];
        let last_kept = frames * d; // exclusive bound on retained sample indices

        let mut start = 0;
        while start < x.len() {
            let end = (start + block).min(x.len());
            spectrum.iter_mut().for_each(|c| *c = zero);
            for (dst, &s) in spectrum.iter_mut().zip(&x[start..end]) {
                dst.re = s;
            }
            self.forward.process_with_scratch(&mut spectrum, &mut scratch);

            // retained samples g = k·d + d − 1 inside [start, end + taps − 1)
            let span_end = (end + taps - 1).min(last_kept);
            let first_frame = (start + 1).div_ceil(d) - 1;
            if first_frame * d + d > span_end {
                start += block;
                continue;
            }
            let spectrum = &spectrum;
            let inverse = &self.inverse;
            let segments = exec::map_range_with(
                exec,
                channels,
                || {
                    (
                        vec![zero; n],
                        vec![zero; inverse.get_inplace_scratch_len()],
                    )
                },
                |(buf, scratch), c| {
                    for ((b, s), h) in buf.iter_mut().zip(spectrum).zip(&self.spectra[c]) {
                        *b = s * h;
                    }
                    inverse.process_with_scratch(buf, scratch);
                    let mut out = Vec::new();
                    let mut g = first_frame * d + d - 1;
                    while g < span_end {
                        out.push(buf[g - start]);
                        g += d;
                    }
                    out
                },
            );
            for (c, seg) in segments.iter().enumerate() {
                for (j, v) in seg.iter().enumerate() {
                    acc[[first_frame + j, c]] += v;
                }
            }
            start += block;
        }
        Ok(acc)
    }

    /// Reference causal convolution for one channel at the retained samples.
    /// Slow; used to validate the overlap-add path.
    pub fn direct_amplitudes(&self, signal: &Signal, channel: usize) -> Result<Vec<Complex64>> {
        let frames = self.check_signal(signal)?;
        let filt = self.filters.get(channel).ok_or(Error::Index {
            index: channel,
            len: self.filters.len(),
        })?;
        let d = self.config.decimation();
        let x = signal.samples();
        Ok((0..frames)
            .map(|k| {
                let g = k * d + d - 1;
                let upto = filt.coefficients.len().min(g + 1);
                filt.coefficients[..upto]
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c * x[g - j])
                    .sum()
            })
            .collect())
    }

    pub fn cochleagram(&self, signal: &Signal, exec: Execution) -> Result<Cochleagram> {
        let amps = self.amplitudes(signal, exec)?;
        let mut log_energy = Array2::zeros(amps.dim());
        for ((idx, a), out) in amps.indexed_iter().zip(log_energy.iter_mut()) {
            let e = a.norm_sqr();
            if !(e > 0.0) || !e.is_finite() {
                return Err(Error::Numeric(format!(
                    "zero energy at frame {}, channel {}; add a noise floor to the signal",
                    idx.0, idx.1
                )));
            }
            *out = energy_to_db(e);
        }
        Ok(Cochleagram::new(
            log_energy,
            self.config.frame_rate(),
            self.config.channel_frequencies(),
            "",
        )?
        .with_config_hash(self.config.config_hash()))
    }
}

/// One-shot convenience: builds the filterbank and computes the cochleagram.
pub fn compute_cochleagram(signal: &Signal, config: &FilterbankConfig) -> Result<Cochleagram> {
    Filterbank::new(config)?.cochleagram(signal, Execution::default())
}
