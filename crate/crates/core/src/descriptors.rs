//! File-level pulsality, tonality and noisiness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filterbank::Cochleagram;
use crate::texture::TextureMaps;

/// `(1 + tanh(2 s x)) / 2`; slope `s` at the origin.
pub fn sigmoid_gate(x: f64, slope: f64) -> f64 {
    0.5 * (1.0 + (2.0 * slope * x).tanh())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Each cell weighted by its linear energy.
    Energy,
    /// Each cell weighted by one (time-frequency area).
    Area,
}

impl Weighting {
    pub fn as_str(self) -> &'static str {
        match self {
            Weighting::Energy => "energy",
            Weighting::Area => "area",
        }
    }
}

impl std::str::FromStr for Weighting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "energy" => Ok(Weighting::Energy),
            "area" => Ok(Weighting::Area),
            other => Err(Error::Input(format!("unknown weighting {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DescriptorConfig {
    /// Θ in dB.
    pub gate_threshold: f64,
    /// Sigmoid slope per dB.
    pub gate_slope: f64,
    pub log_base: f64,
}

impl Default for DescriptorConfig {
    fn default() -> Self {
        Self {
            gate_threshold: 8.0,
            gate_slope: 2.5,
            log_base: 10.0,
        }
    }
}

impl DescriptorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gate_threshold > 0.0 && self.gate_slope > 0.0) {
            return Err(Error::Config(format!(
                "gate threshold and slope must be positive, got {} and {}",
                self.gate_threshold, self.gate_slope
            )));
        }
        if !(self.log_base > 0.0 && self.log_base != 1.0) {
            return Err(Error::Config(format!("invalid log base {}", self.log_base)));
        }
        Ok(())
    }
}

/// Log fractions of weight gated as pulsal, tonal and noisy. Each is ≤ 0;
/// an empty gated sum is reported as `-inf` with a warning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescriptorTriple {
    pub file: String,
    pub weighting: Weighting,
    pub pulsality: f64,
    pub tonality: f64,
    pub noisiness: f64,
    pub n_valid_cells: usize,
    pub warnings: Vec<String>,
}

/// Gated weight sums before taking logs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GatedSums {
    pub pulse: f64,
    pub tone: f64,
    pub noise: f64,
    pub total: f64,
    pub n_valid_cells: usize,
}

/// Sums over cells valid in both tract maps.
pub fn gated_sums(
    maps: &TextureMaps,
    cg: &Cochleagram,
    config: &DescriptorConfig,
    weighting: Weighting,
) -> Result<GatedSums> {
    config.validate()?;
    let x = cg.log_energy();
    if maps.t_vert.dim() != x.dim() || maps.t_horiz.dim() != x.dim() {
        return Err(Error::Input("texture maps and cochleagram differ in shape".into()));
    }
    let (tv, th) = (maps.t_vert.values(), maps.t_horiz.values());
    let (vv, vh) = (maps.t_vert.valid(), maps.t_horiz.valid());
    // reference level keeps linear weights in range; it cancels in the ratios
    let reference = x
        .indexed_iter()
        .filter(|(i, _)| vv[*i] && vh[*i])
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut s = GatedSums {
        pulse: 0.0,
        tone: 0.0,
        noise: 0.0,
        total: 0.0,
        n_valid_cells: 0,
    };
    for (idx, &db) in x.indexed_iter() {
        if !(vv[idx] && vh[idx]) {
            continue;
        }
        let w = match weighting {
            Weighting::Energy => 10f64.powf((db - reference) / 10.0),
            Weighting::Area => 1.0,
        };
        let gp = sigmoid_gate(tv[idx] - config.gate_threshold, config.gate_slope);
        let gt = sigmoid_gate(th[idx] - config.gate_threshold, config.gate_slope);
        s.pulse += gp * w;
        s.tone += gt * w;
        s.noise += (1.0 - gp) * (1.0 - gt) * w;
        s.total += w;
        s.n_valid_cells += 1;
    }
    if s.n_valid_cells == 0 {
        return Err(Error::Descriptor(format!(
            "{}: no cell is valid in both tract maps",
            cg.source_id()
        )));
    }
    Ok(s)
}

pub fn compute_descriptors(
    maps: &TextureMaps,
    cg: &Cochleagram,
    config: &DescriptorConfig,
    weighting: Weighting,
) -> Result<DescriptorTriple> {
    let s = gated_sums(maps, cg, config, weighting)?;
    let ln_base = config.log_base.ln();
    let mut warnings = Vec::new();
    let mut log_fraction = |name: &str, part: f64| {
        if part > 0.0 {
            (part.ln() - s.total.ln()) / ln_base
        } else {
            let msg = format!("{name} gated sum is zero");
            log::warn!("{}: {msg} ({} weighting)", cg.source_id(), weighting.as_str());
            warnings.push(msg);
            f64::NEG_INFINITY
        }
    };
    let pulsality = log_fraction("pulsality", s.pulse);
    let tonality = log_fraction("tonality", s.tone);
    let noisiness = log_fraction("noisiness", s.noise);
    Ok(DescriptorTriple {
        file: cg.source_id().to_string(),
        weighting,
        pulsality,
        tonality,
        noisiness,
        n_valid_cells: s.n_valid_cells,
        warnings,
    })
}
