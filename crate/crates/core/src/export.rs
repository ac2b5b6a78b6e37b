//! File formats for cochleagrams, feature maps, histograms and prevalence
//! reports. Every text file starts with a `# ` provenance block; the binary
//! matrix format carries the same block as a length-prefixed string.
//!
//! Binary matrix layout (`.stxm`, little-endian):
//!
//! | field        | type                  |
//! |--------------|-----------------------|
//! | magic        | `b"STXM"`             |
//! | version      | `u32` (= 1)           |
//! | provenance   | `u32` length + UTF-8  |
//! | frames       | `u32`                 |
//! | channels     | `u32`                 |
//! | frame_rate   | `f64`                 |
//! | frequencies  | `f64 × channels`      |
//! | values       | `f32 × frames × channels`, row-major (frame-major) |
//!
//! Invalid map cells are stored as NaN; the mask file says which.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{FeatureHistogram, PrevalenceReport};
use crate::calibration::CorrelationProfile;
use crate::error::{Error, Result};
use crate::filterbank::Cochleagram;
use crate::texture::FeatureMap;

pub const BINARY_MAGIC: &[u8; 4] = b"STXM";
pub const BINARY_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = concat!("soundtexture ", env!("CARGO_PKG_VERSION"));

/// Leading comment block written into every output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub config_hash: String,
    pub profile_id: Option<String>,
    pub seed: u64,
    /// Fully resolved run configuration, one-line JSON.
    pub config_json: String,
}

impl Provenance {
    pub fn new(config_hash: impl Into<String>, seed: u64, config: &impl Serialize) -> Result<Self> {
        Ok(Self {
            config_hash: config_hash.into(),
            profile_id: None,
            seed,
            config_json: serde_json::to_string(config)?,
        })
    }

    pub fn with_profile(mut self, profile: &CorrelationProfile) -> Result<Self> {
        self.profile_id = Some(profile_id(profile)?);
        Ok(self)
    }

    pub fn header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {TOOL_VERSION}");
        let _ = writeln!(s, "# config_hash: {}", self.config_hash);
        let _ = writeln!(s, "# profile: {}", self.profile_id.as_deref().unwrap_or("none"));
        let _ = writeln!(s, "# seed: {}", self.seed);
        let _ = writeln!(s, "# config: {}", self.config_json);
        s
    }
}

/// Content hash of a profile: 16 hex digits of SHA-256 over its JSON.
pub fn profile_id(profile: &CorrelationProfile) -> Result<String> {
    let digest = Sha256::digest(serde_json::to_string(profile)?.as_bytes());
    Ok(digest[..8].iter().map(|b| format!("{b:02x}")).collect())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn matrix_csv(header: &[f64], rows: &Array2<f64>, provenance: &Provenance) -> String {
    let mut s = provenance.header();
    let cols: Vec<String> = header.iter().map(|f| f.to_string()).collect();
    let _ = writeln!(s, "{}", cols.join(","));
    for row in rows.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

/// `frames × channels` CSV with a header row of channel frequencies.
pub fn write_matrix_csv(
    values: &Array2<f64>,
    frequencies: &[f64],
    path: impl AsRef<Path>,
    provenance: &Provenance,
) -> Result<()> {
    if frequencies.len() != values.ncols() {
        return Err(Error::Input("frequency axis does not match matrix width".into()));
    }
    write_text(path.as_ref(), &matrix_csv(frequencies, values, provenance))
}

pub fn write_cochleagram_csv(cg: &Cochleagram, path: impl AsRef<Path>, provenance: &Provenance) -> Result<()> {
    write_text(
        path.as_ref(),
        &matrix_csv(cg.channel_frequencies(), cg.log_energy(), provenance),
    )
}

/// Map values (NaN where invalid) in the cochleagram CSV layout.
pub fn write_map_csv(
    map: &FeatureMap,
    frequencies: &[f64],
    path: impl AsRef<Path>,
    provenance: &Provenance,
) -> Result<()> {
    write_matrix_csv(map.values(), frequencies, path, provenance)
}

/// Validity mask as 0/1 in the same layout.
pub fn write_mask_csv(
    map: &FeatureMap,
    frequencies: &[f64],
    path: impl AsRef<Path>,
    provenance: &Provenance,
) -> Result<()> {
    let mask = map.valid().mapv(|v| if v { 1.0 } else { 0.0 });
    write_matrix_csv(&mask, frequencies, path, provenance)
}

/// Reads a matrix CSV written by this module, skipping the provenance block.
pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<(Vec<f64>, Array2<f64>)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Input(format!("{}: bad number {s:?}", path.display())))
    };
    let mut header: Option<Vec<f64>> = None;
    let mut values = Vec::new();
    let mut rows = 0;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let fields = line.split(',').map(parse).collect::<Result<Vec<_>>>()?;
        match &header {
            None => header = Some(fields),
            Some(h) => {
                if fields.len() != h.len() {
                    return Err(Error::Input(format!(
                        "{}: row {} has {} fields, expected {}",
                        path.display(),
                        rows + 1,
                        fields.len(),
                        h.len()
                    )));
                }
                values.extend(fields);
                rows += 1;
            }
        }
    }
    let header = header.ok_or_else(|| Error::Input(format!("{}: no header row", path.display())))?;
    let cols = header.len();
    let matrix = Array2::from_shape_vec((rows, cols), values).expect("row lengths checked");
    Ok((header, matrix))
}

/// Binary matrix in the layout documented at module level.
pub fn write_matrix_binary(
    values: &Array2<f64>,
    frame_rate: f64,
    frequencies: &[f64],
    path: impl AsRef<Path>,
    provenance: &Provenance,
) -> Result<()> {
    let path = path.as_ref();
    let (frames, channels) = values.dim();
    if frequencies.len() != channels {
        return Err(Error::Input("frequency axis does not match matrix width".into()));
    }
    let header = provenance.header();
    let mut buf = Vec::with_capacity(32 + header.len() + 8 * channels + 4 * frames * channels);
    buf.extend_from_slice(BINARY_MAGIC);
    buf.extend_from_slice(&BINARY_VERSION.to_le_bytes());
    buf.extend_from_slice(&(header.len() as u32).to_le_bytes());
    buf.extend_from_slice(header.as_bytes());
    buf.extend_from_slice(&(frames as u32).to_le_bytes());
    buf.extend_from_slice(&(channels as u32).to_le_bytes());
    buf.extend_from_slice(&frame_rate.to_le_bytes());
    for f in frequencies {
        buf.extend_from_slice(&f.to_le_bytes());
    }
    for v in values.iter() {
        buf.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&buf).map_err(|e| Error::io(path, e))
}

/// Contents of a binary matrix file.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryMatrix {
    pub provenance: String,
    pub frame_rate: f64,
    pub frequencies: Vec<f64>,
    pub values: Array2<f32>,
}

pub fn read_matrix_binary(path: impl AsRef<Path>) -> Result<BinaryMatrix> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let bad = |what: &str| Error::Format(format!("{}: {what}", path.display()));
    let mut pos = 0usize;
    let mut take = |n: usize| -> Result<&[u8]> {
        let slice = bytes.get(pos..pos + n).ok_or_else(|| bad("truncated file"))?;
        pos += n;
        Ok(slice)
    };
    if take(4)? != BINARY_MAGIC {
        return Err(bad("not a matrix file"));
    }
    let u32_at = |b: &[u8]| u32::from_le_bytes(b.try_into().expect("4 bytes"));
    let f64_at = |b: &[u8]| f64::from_le_bytes(b.try_into().expect("8 bytes"));
    let version = u32_at(take(4)?);
    if version != BINARY_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let len = u32_at(take(4)?) as usize;
    let provenance = String::from_utf8(take(len)?.to_vec()).map_err(|_| bad("provenance is not UTF-8"))?;
    let frames = u32_at(take(4)?) as usize;
    let channels = u32_at(take(4)?) as usize;
    let frame_rate = f64_at(take(8)?);
    let frequencies = (0..channels)
        .map(|_| take(8).map(f64_at))
        .collect::<Result<Vec<_>>>()?;
    let raw = take(4 * frames * channels)?;
    let values: Vec<f32> = raw
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")))
        .collect();
    Ok(BinaryMatrix {
        provenance,
        frame_rate,
        frequencies,
        values: Array2::from_shape_vec((frames, channels), values).expect("sized above"),
    })
}

/// Columns `bin_low,bin_high,density,flags`; the flags column of the first
/// row carries the underflow/overflow tallies.
pub fn write_histogram_csv(hist: &FeatureHistogram, path: impl AsRef<Path>, provenance: &Provenance) -> Result<()> {
    let mut s = provenance.header();
    let _ = writeln!(
        s,
        "# samples: {}, underflow: {}, overflow: {}",
        hist.sample_count, hist.underflow, hist.overflow
    );
    s.push_str("bin_low,bin_high,density,flags\n");
    for (i, d) in hist.densities.iter().enumerate() {
        let flags = if *d == 0.0 { "empty" } else { "" };
        let _ = writeln!(s, "{},{},{},{}", hist.bin_edges[i], hist.bin_edges[i + 1], d, flags);
    }
    write_text(path.as_ref(), &s)
}

/// Columns `bin_low,bin_high,log10_ratio,flags`; undefined bins have an
/// empty ratio and the `undefined` flag, sound-empty bins read `-inf`.
pub fn write_prevalence_csv(report: &PrevalenceReport, path: impl AsRef<Path>, provenance: &Provenance) -> Result<()> {
    let mut s = provenance.header();
    s.push_str("bin_low,bin_high,log10_ratio,flags\n");
    for (i, r) in report.log10_ratio.iter().enumerate() {
        let (lo, hi) = (report.bin_edges[i], report.bin_edges[i + 1]);
        match r {
            Some(v) if v.is_finite() => {
                let _ = writeln!(s, "{lo},{hi},{v},");
            }
            Some(_) => {
                let _ = writeln!(s, "{lo},{hi},-inf,sound_empty");
            }
            None => {
                let _ = writeln!(s, "{lo},{hi},,undefined");
            }
        }
    }
    write_text(path.as_ref(), &s)
}
