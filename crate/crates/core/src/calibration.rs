//! White-noise calibration: correlation distances of the log-energy
//! representation in the four axis directions.
//!
//! For channel `f` the correlation at lag `(δt, δf)` is
//! `mean_t[(X(t,f) − μ_f)(X(t+δt, f+δf) − μ_{f+δf})] / (σ_f σ_{f+δf})`, with
//! μ and σ the population mean and standard deviation over time of the
//! whole channel. Frames without a shifted partner are left out of the mean.
//! A correlation distance is the first lag where the curve drops below θ,
//! refined by linear interpolation against the preceding lag.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::ReferenceHistograms;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::filterbank::{Cochleagram, FilterbankConfig};
use crate::signal_io::NoiseSpec;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_THETA: f64 = 0.2;
/// Calibrations shorter than this draw a warning.
pub const RECOMMENDED_NOISE_S: f64 = 200.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Towards earlier frames (ε_t).
    TimeBackward,
    /// Towards later frames (ε^t).
    TimeForward,
    /// Towards lower channels (ε_f).
    FreqDown,
    /// Towards higher channels (ε^f).
    FreqUp,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationCurve {
    pub channel: usize,
    pub direction: Direction,
    pub lags: Vec<usize>,
    pub values: Vec<f64>,
}

/// Mean-removed channel columns plus their population variances.
struct CenteredChannels {
    columns: Vec<Vec<f64>>,
    variance: Vec<f64>,
}

impl CenteredChannels {
    fn new(cg: &Cochleagram) -> Result<Self> {
        let x = cg.log_energy();
        let frames = cg.n_frames() as f64;
        let mut columns = Vec::with_capacity(cg.n_channels());
        let mut variance = Vec::with_capacity(cg.n_channels());
        for (ch, col) in x.columns().into_iter().enumerate() {
            let mean = col.sum() / frames;
            let centered: Vec<f64> = col.iter().map(|v| v - mean).collect();
            let var = dot(&centered, &centered) / frames;
            if !(var > 0.0) {
                return Err(Error::Numeric(format!(
                    "channel {ch} has zero variance over time"
                )));
            }
            columns.push(centered);
            variance.push(var);
        }
        Ok(Self { columns, variance })
    }

    fn frames(&self) -> usize {
        self.columns[0].len()
    }

    fn channels(&self) -> usize {
        self.columns.len()
    }

    /// Correlation at integer `lag` in `direction`; caller checks ranges.
    fn correlation(&self, channel: usize, direction: Direction, lag: usize) -> f64 {
        let x = &self.columns[channel];
        let n = x.len();
        match direction {
            Direction::TimeForward => {
                dot(&x[..n - lag], &x[lag..]) / (n - lag) as f64 / self.variance[channel]
            }
            Direction::TimeBackward => {
                dot(&x[lag..], &x[..n - lag]) / (n - lag) as f64 / self.variance[channel]
            }
            Direction::FreqDown | Direction::FreqUp => {
                let other = if direction == Direction::FreqUp {
                    channel + lag
                } else {
                    channel - lag
                };
                let y = &self.columns[other];
                let norm = if other == channel {
                    self.variance[channel]
                } else {
                    (self.variance[channel] * self.variance[other]).sqrt()
                };
                dot(x, y) / n as f64 / norm
            }
        }
    }

    fn max_lag(&self, channel: usize, direction: Direction) -> usize {
        match direction {
            Direction::TimeForward | Direction::TimeBackward => self.frames() / 10,
            Direction::FreqDown => channel,
            Direction::FreqUp => self.channels() - 1 - channel,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Correlation curve for lags `0..=max_lag`.
pub fn correlation_curve(
    cg: &Cochleagram,
    channel: usize,
    direction: Direction,
    max_lag: usize,
) -> Result<CorrelationCurve> {
    if channel >= cg.n_channels() {
        return Err(Error::Index {
            index: channel,
            len: cg.n_channels(),
        });
    }
    let cc = CenteredChannels::new(cg)?;
    let limit = cc.max_lag(channel, direction);
    let time = matches!(direction, Direction::TimeForward | Direction::TimeBackward);
    if (time && max_lag >= limit.max(1)) || (!time && max_lag > limit) {
        return Err(Error::Input(format!(
            "lag {max_lag} out of range for channel {channel} in {direction:?} (limit {})",
            if time { limit.saturating_sub(1) } else { limit }
        )));
    }
    let lags: Vec<usize> = (0..=max_lag).collect();
    let values = lags
        .iter()
        .map(|&lag| cc.correlation(channel, direction, lag))
        .collect();
    Ok(CorrelationCurve {
        channel,
        direction,
        lags,
        values,
    })
}

/// Given a curve sampled at lags `0, 1, 2, …`, returns the interpolated lag
/// where it first falls below `theta`, or `None` if it never does.
pub fn interpolate_crossing(values: &[f64], theta: f64) -> Option<f64> {
    crossing_by(|k| values[k], values.len().checked_sub(1)?, theta)
}

fn crossing_by(value: impl Fn(usize) -> f64, max_lag: usize, theta: f64) -> Option<f64> {
    let mut prev = value(0);
    for k in 1..=max_lag {
        let r = value(k);
        if r < theta {
            if prev < theta {
                // already below at lag k - 1; cannot happen past lag 0 unless θ ≥ 1
                return None;
            }
            return Some((k - 1) as f64 + (prev - theta) / (prev - r));
        }
        prev = r;
    }
    None
}

/// Correlation distances of one channel. Frequency distances are `None` where
/// no crossing occurs before the band edge or the search limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelDistances {
    pub index: usize,
    pub frequency_hz: f64,
    /// ε_t, towards earlier frames.
    pub eps_t: f64,
    /// ε^t, towards later frames.
    pub eps_t_up: f64,
    /// ε_f, towards lower channels.
    pub eps_f: Option<f64>,
    /// ε^f, towards higher channels.
    pub eps_f_up: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationProfile {
    pub schema_version: u32,
    pub config_hash: String,
    pub theta: f64,
    pub noise_spec: Option<NoiseSpec>,
    pub duration_s: f64,
    pub channels: Vec<ChannelDistances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_histograms: Option<ReferenceHistograms>,
}

impl CorrelationProfile {
    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    /// Checks that the profile describes the grid of `cg`.
    pub fn check_matches(&self, cg: &Cochleagram) -> Result<()> {
        if self.channels.len() != cg.n_channels() {
            return Err(Error::Version(format!(
                "profile has {} channels, cochleagram has {}",
                self.channels.len(),
                cg.n_channels()
            )));
        }
        if let Some(hash) = cg.config_hash() {
            if !self.config_hash.is_empty() && hash != self.config_hash {
                return Err(Error::Version(format!(
                    "profile config hash {} does not match cochleagram config {}; recalibrate",
                    self.config_hash, hash
                )));
            }
        }
        for (c, f) in self.channels.iter().zip(cg.channel_frequencies()) {
            if (c.frequency_hz - f).abs() > 1e-9 * f.abs().max(1.0) {
                return Err(Error::Version(format!(
                    "channel {} frequency {} Hz differs from {} Hz",
                    c.index, c.frequency_hz, f
                )));
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Version(format!(
                "profile schema version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        for c in &self.channels {
            let all = [Some(c.eps_t), Some(c.eps_t_up), c.eps_f, c.eps_f_up];
            if all.iter().flatten().any(|e| !(*e > 0.0) || !e.is_finite()) {
                return Err(Error::Version(format!(
                    "channel {} has a non-positive correlation distance",
                    c.index
                )));
            }
        }
        Ok(())
    }
}

/// Search limits for [`estimate_profile`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CalibrationSettings {
    pub theta: f64,
    pub max_time_lag: usize,
    pub max_freq_lag: usize,
}

impl CalibrationSettings {
    /// Time lags up to twice the filter length, frequency lags up to 20 channels.
    pub fn for_config(config: &FilterbankConfig, theta: f64) -> Self {
        Self {
            theta,
            max_time_lag: 2 * config.filter_len_frames(),
            max_freq_lag: 20,
        }
    }
}

pub fn estimate_profile(
    noise: &Cochleagram,
    settings: &CalibrationSettings,
    exec: Execution,
) -> Result<CorrelationProfile> {
    let theta = settings.theta;
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Config(format!("theta must lie in (0, 1), got {theta}")));
    }
    let duration_s = noise.n_frames() as f64 / noise.frame_rate();
    if duration_s < RECOMMENDED_NOISE_S {
        log::warn!(
            "calibrating on {duration_s:.1} s of noise; {RECOMMENDED_NOISE_S} s is recommended"
        );
    }
    let cc = CenteredChannels::new(noise)?;
    let time_limit = settings.max_time_lag.min(cc.frames() / 10);
    if time_limit < 1 {
        return Err(Error::Calibration(format!(
            "{} frames are too few to estimate correlations",
            cc.frames()
        )));
    }
    let freqs = noise.channel_frequencies();
    let rows = exec::map_range(exec, cc.channels(), |ch| {
        let along = |dir: Direction, limit: usize| {
            crossing_by(|k| cc.correlation(ch, dir, k), limit, theta)
        };
        let eps_t = along(Direction::TimeBackward, time_limit);
        let eps_t_up = along(Direction::TimeForward, time_limit);
        let down = settings.max_freq_lag.min(ch);
        let up = settings.max_freq_lag.min(cc.channels() - 1 - ch);
        match (eps_t, eps_t_up) {
            (Some(eps_t), Some(eps_t_up)) => Ok(ChannelDistances {
                index: ch,
                frequency_hz: freqs[ch],
                eps_t,
                eps_t_up,
                eps_f: along(Direction::FreqDown, down),
                eps_f_up: along(Direction::FreqUp, up),
            }),
            _ => Err(Error::Calibration(format!(
                "channel {ch}: time correlation stays above {theta} for {time_limit} frames"
            ))),
        }
    });
    let channels = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(CorrelationProfile {
        schema_version: SCHEMA_VERSION,
        config_hash: noise.config_hash().unwrap_or_default().to_string(),
        theta,
        noise_spec: None,
        duration_s,
        channels,
        reference_histograms: None,
    })
}

pub fn save_profile(profile: &CorrelationProfile, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(profile)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Loads a profile and checks it was produced with `config`.
pub fn load_profile(path: impl AsRef<Path>, config: &FilterbankConfig) -> Result<CorrelationProfile> {
    let profile = load_profile_unchecked(path)?;
    let expected = config.config_hash();
    if profile.config_hash != expected {
        return Err(Error::Version(format!(
            "profile was calibrated with config {} but the run uses {}; recalibrate",
            profile.config_hash, expected
        )));
    }
    if profile.channels.len() != config.n_seg {
        return Err(Error::Version(format!(
            "profile has {} channels, config has {}",
            profile.channels.len(),
            config.n_seg
        )));
    }
    Ok(profile)
}

/// Loads a profile, validating only the schema.
pub fn load_profile_unchecked(path: impl AsRef<Path>) -> Result<CorrelationProfile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let profile: CorrelationProfile = serde_json::from_str(&text)
        .map_err(|e| Error::Version(format!("{}: not a valid profile: {e}", path.display())))?;
    profile.validate()?;
    Ok(profile)
}
