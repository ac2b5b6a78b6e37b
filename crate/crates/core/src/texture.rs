//! Oriented center-surround ratios and tract features.
//!
//! `O_h` compares each cell with the mean of the cells one correlation
//! distance earlier and later in time; `O_v` does the same across channels.
//! Tract features are the root-mean-square of a CSR map over a diamond that
//! is short along the CSR axis (`c_p` correlation distances) and long across
//! it (`c_t` correlation distances): `T_|` averages `O_h` along frequency and
//! responds to pulses, `T_−` averages `O_v` along time and responds to tones.
//!
//! All values stay in dB. Cells whose stencil or diamond leaves the grid, or
//! touches an invalid cell, are marked invalid instead of being computed on a
//! truncated neighbourhood.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::calibration::{ChannelDistances, CorrelationProfile};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::filterbank::Cochleagram;

/// A `frames × channels` map with a validity mask. Invalid cells hold NaN.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMap {
    values: Array2<f64>,
    valid: Array2<bool>,
}

impl FeatureMap {
    /// Builds a map from values where NaN marks an invalid cell.
    pub fn from_values(values: Array2<f64>) -> Self {
        let valid = values.mapv(|v| !v.is_nan());
        Self { values, valid }
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn valid(&self) -> &Array2<bool> {
        &self.valid
    }

    pub fn dim(&self) -> (usize, usize) {
        self.values.dim()
    }

    pub fn get(&self, frame: usize, channel: usize) -> Option<f64> {
        match self.valid.get((frame, channel)) {
            Some(true) => Some(self.values[[frame, channel]]),
            _ => None,
        }
    }

    pub fn n_valid(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// Valid values in frame-major order.
    pub fn valid_values(&self) -> Vec<f64> {
        self.frame_strided_values(1)
    }

    /// Valid values from every `stride`-th frame, frame-major.
    pub fn frame_strided_values(&self, stride: usize) -> Vec<f64> {
        let stride = stride.max(1);
        self.values
            .rows()
            .into_iter()
            .zip(self.valid.rows())
            .step_by(stride)
            .flat_map(|(v, ok)| {
                v.into_iter()
                    .zip(ok)
                    .filter(|(_, ok)| **ok)
                    .map(|(v, _)| *v)
                    .collect::<Vec<_>>()
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TextureMaps {
    /// Temporal-direction CSR.
    pub o_h: FeatureMap,
    /// Frequency-direction CSR.
    pub o_v: FeatureMap,
    /// Pulsal tract feature `T_|`.
    pub t_vert: FeatureMap,
    /// Tonal tract feature `T_−`.
    pub t_horiz: FeatureMap,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TractParams {
    /// Diamond extent along the CSR (pattern) axis, in correlation distances.
    pub c_p: f64,
    /// Diamond extent along the tract axis, in correlation distances.
    pub c_t: f64,
}

impl Default for TractParams {
    fn default() -> Self {
        Self { c_p: 0.7, c_t: 2.0 }
    }
}

impl TractParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_p > 0.0 && self.c_t > 0.0) {
            return Err(Error::Config(format!(
                "c_p and c_t must be positive, got {} and {}",
                self.c_p, self.c_t
            )));
        }
        if self.c_p >= 1.0 {
            log::warn!("c_p = {} is not below one correlation distance", self.c_p);
        }
        if self.c_t <= 1.0 {
            log::warn!("c_t = {} does not exceed one correlation distance", self.c_t);
        }
        Ok(())
    }
}

/// How fractional correlation distances address the grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffsetMode {
    /// Linear interpolation between neighbouring cells.
    #[default]
    Interpolate,
    /// Nearest whole cell, at least one cell away.
    Round,
}

/// Reads a column or row at a fractional position; `None` outside `[0, len-1]`.
fn sample_at(get: impl Fn(usize) -> f64, len: usize, pos: f64, mode: OffsetMode) -> Option<f64> {
    let last = (len - 1) as f64;
    match mode {
        OffsetMode::Interpolate => {
            if !(0.0..=last).contains(&pos) {
                return None;
            }
            let i0 = pos.floor();
            let frac = pos - i0;
            let i0 = i0 as usize;
            if frac == 0.0 {
                Some(get(i0))
            } else {
                Some(get(i0) * (1.0 - frac) + get(i0 + 1) * frac)
            }
        }
        OffsetMode::Round => {
            let p = pos.round();
            if !(0.0..=last).contains(&p) {
                return None;
            }
            Some(get(p as usize))
        }
    }
}

fn offset(eps: f64, mode: OffsetMode) -> f64 {
    match mode {
        OffsetMode::Interpolate => eps,
        OffsetMode::Round => eps.round().max(1.0),
    }
}

/// Computes `(O_h, O_v)` for a cochleagram calibrated by `profile`.
pub fn center_surround(
    cg: &Cochleagram,
    profile: &CorrelationProfile,
    mode: OffsetMode,
) -> Result<(FeatureMap, FeatureMap)> {
    profile.check_matches(cg)?;
    let x = cg.log_energy();
    let (frames, channels) = x.dim();
    let mut o_h = Array2::from_elem((frames, channels), f64::NAN);
    let mut o_v = Array2::from_elem((frames, channels), f64::NAN);
    for (f, dist) in profile.channels.iter().enumerate() {
        let back = offset(dist.eps_t, mode);
        let fwd = offset(dist.eps_t_up, mode);
        for t in 0..frames {
            let col = |i: usize| x[[i, f]];
            let before = sample_at(col, frames, t as f64 - back, mode);
            let after = sample_at(col, frames, t as f64 + fwd, mode);
            if let (Some(a), Some(b)) = (before, after) {
                o_h[[t, f]] = x[[t, f]] - 0.5 * (a + b);
            }
        }
        if let (Some(down), Some(up)) = (dist.eps_f, dist.eps_f_up) {
            let down = offset(down, mode);
            let up = offset(up, mode);
            for t in 0..frames {
                let row = |i: usize| x[[t, i]];
                let below = sample_at(row, channels, f as f64 - down, mode);
                let above = sample_at(row, channels, f as f64 + up, mode);
                if let (Some(a), Some(b)) = (below, above) {
                    o_v[[t, f]] = x[[t, f]] - 0.5 * (a + b);
                }
            }
        }
    }
    Ok((FeatureMap::from_values(o_h), FeatureMap::from_values(o_v)))
}

/// Grid cell offset `(dt, df)` from the diamond center, with its weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiamondCell {
    pub dt: isize,
    pub df: isize,
    pub weight: f64,
}

/// Closed quadrilateral with vertices at the tips of two pattern and two
/// tract vectors (given as `(dt, df)` in cell units) around the center.
#[derive(Clone, Debug, PartialEq)]
pub struct Diamond {
    vertices: [(f64, f64); 4],
}

const EDGE_TOLERANCE: f64 = 1e-9;

impl Diamond {
    pub fn new(pattern: [(f64, f64); 2], tract: [(f64, f64); 2]) -> Result<Self> {
        let mut vertices = [pattern[0], tract[0], pattern[1], tract[1]];
        for v in &vertices {
            if !(v.0.is_finite() && v.1.is_finite()) || (v.0 == 0.0 && v.1 == 0.0) {
                return Err(Error::Input(format!("diamond vector {v:?} is zero or not finite")));
            }
        }
        vertices.sort_by(|a, b| a.1.atan2(a.0).total_cmp(&b.1.atan2(b.0)));
        Ok(Self { vertices })
    }

    /// Point-in-region test on cell-center offsets; the boundary is included.
    pub fn contains(&self, dt: f64, df: f64) -> bool {
        (0..4).any(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % 4];
            in_triangle((0.0, 0.0), a, b, (dt, df))
        })
    }

    /// All grid cells inside the region, ordered by `(df, dt)`, unit weights.
    pub fn cells(&self) -> Vec<DiamondCell> {
        let lo_t = self.vertices.iter().map(|v| v.0).fold(0.0, f64::min).floor() as isize;
        let hi_t = self.vertices.iter().map(|v| v.0).fold(0.0, f64::max).ceil() as isize;
        let lo_f = self.vertices.iter().map(|v| v.1).fold(0.0, f64::min).floor() as isize;
        let hi_f = self.vertices.iter().map(|v| v.1).fold(0.0, f64::max).ceil() as isize;
        let mut cells = Vec::new();
        for df in lo_f..=hi_f {
            for dt in lo_t..=hi_t {
                if (dt == 0 && df == 0) || self.contains(dt as f64, df as f64) {
                    cells.push(DiamondCell { dt, df, weight: 1.0 });
                }
            }
        }
        cells
    }
}

fn cross(o: (f64, f64), a: (f64, f64), p: (f64, f64)) -> f64 {
    (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0)
}

fn in_triangle(a: (f64, f64), b: (f64, f64), c: (f64, f64), p: (f64, f64)) -> bool {
    let d1 = cross(a, b, p);
    let d2 = cross(b, c, p);
    let d3 = cross(c, a, p);
    let neg = d1 < -EDGE_TOLERANCE || d2 < -EDGE_TOLERANCE || d3 < -EDGE_TOLERANCE;
    let pos = d1 > EDGE_TOLERANCE || d2 > EDGE_TOLERANCE || d3 > EDGE_TOLERANCE;
    !(neg && pos)
}

/// Cells of the diamond spanned by `pattern` and `tract` vectors.
pub fn diamond_cells(pattern: [(f64, f64); 2], tract: [(f64, f64); 2]) -> Result<Vec<DiamondCell>> {
    Ok(Diamond::new(pattern, tract)?.cells())
}

/// Diamond for `T_|` at a channel: pattern along time, tract along frequency.
pub fn pulse_diamond(dist: &ChannelDistances, params: &TractParams) -> Option<Diamond> {
    let (down, up) = (dist.eps_f?, dist.eps_f_up?);
    Diamond::new(
        [(-params.c_p * dist.eps_t, 0.0), (params.c_p * dist.eps_t_up, 0.0)],
        [(0.0, -params.c_t * down), (0.0, params.c_t * up)],
    )
    .ok()
}

/// Diamond for `T_−` at a channel: pattern along frequency, tract along time.
pub fn tone_diamond(dist: &ChannelDistances, params: &TractParams) -> Option<Diamond> {
    let (down, up) = (dist.eps_f?, dist.eps_f_up?);
    Diamond::new(
        [(0.0, -params.c_p * down), (0.0, params.c_p * up)],
        [(-params.c_t * dist.eps_t, 0.0), (params.c_t * dist.eps_t_up, 0.0)],
    )
    .ok()
}

/// Root-mean-square of `source` over per-channel stencils.
fn rms_over_stencils(
    source: &FeatureMap,
    stencils: &[Option<Vec<DiamondCell>>],
    exec: Execution,
) -> FeatureMap {
    let (frames, channels) = source.dim();
    let values = source.values();
    let valid = source.valid();
    let mut out = vec![f64::NAN; frames * channels];
    exec::for_each_row(exec, &mut out, channels, |t, row| {
        for (f, slot) in row.iter_mut().enumerate() {
            let Some(cells) = &stencils[f] else { continue };
            let mut acc = 0.0;
            let mut complete = true;
            for cell in cells {
                let tt = t as isize + cell.dt;
                let ff = f as isize + cell.df;
                if tt < 0 || ff < 0 || tt >= frames as isize || ff >= channels as isize {
                    complete = false;
                    break;
                }
                let idx = (tt as usize, ff as usize);
                if !valid[idx] {
                    complete = false;
                    break;
                }
                let v = values[idx];
                acc += cell.weight * v * v;
            }
            if complete {
                let total: f64 = cells.iter().map(|c| c.weight).sum();
                *slot = (acc / total).sqrt();
            }
        }
    });
    FeatureMap::from_values(Array2::from_shape_vec((frames, channels), out).expect("shape"))
}

/// Tract features from the CSR maps.
pub fn tract_features(
    o_h: FeatureMap,
    o_v: FeatureMap,
    profile: &CorrelationProfile,
    params: &TractParams,
    exec: Execution,
) -> Result<TextureMaps> {
    params.validate()?;
    if o_h.dim() != o_v.dim() {
        return Err(Error::Input("CSR maps differ in shape".into()));
    }
    if o_h.dim().1 != profile.n_channels() {
        return Err(Error::Input(format!(
            "CSR maps have {} channels, profile has {}",
            o_h.dim().1,
            profile.n_channels()
        )));
    }
    let pulse: Vec<_> = profile
        .channels
        .iter()
        .map(|d| pulse_diamond(d, params).map(|dm| dm.cells()))
        .collect();
    let tone: Vec<_> = profile
        .channels
        .iter()
        .map(|d| tone_diamond(d, params).map(|dm| dm.cells()))
        .collect();
    let t_vert = rms_over_stencils(&o_h, &pulse, exec);
    let t_horiz = rms_over_stencils(&o_v, &tone, exec);
    Ok(TextureMaps {
        o_h,
        o_v,
        t_vert,
        t_horiz,
    })
}

/// CSR maps followed by tract features.
pub fn texture_maps(
    cg: &Cochleagram,
    profile: &CorrelationProfile,
    params: &TractParams,
    mode: OffsetMode,
    exec: Execution,
) -> Result<TextureMaps> {
    let (o_h, o_v) = center_surround(cg, profile, mode)?;
    tract_features(o_h, o_v, profile, params, exec)
}
