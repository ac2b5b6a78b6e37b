//! Histograms, prevalence ratios against the white-noise reference, Pearson
//! correlations with perceptual coordinates, and KS distances.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::descriptors::{DescriptorTriple, Weighting};
use crate::error::{Error, Result};
use crate::texture::{OffsetMode, TextureMaps, TractParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistogramKind {
    /// Center-surround ratios: −30..30 dB in 2 dB bins.
    Csr,
    /// Tract features: 0..15 dB in 0.25 dB bins.
    Tract,
}

impl HistogramKind {
    fn layout(self) -> (f64, f64, usize) {
        match self {
            HistogramKind::Csr => (-30.0, 2.0, 30),
            HistogramKind::Tract => (0.0, 0.25, 60),
        }
    }

    pub fn bin_edges(self) -> Vec<f64> {
        let (lo, step, bins) = self.layout();
        (0..=bins).map(|i| lo + step * i as f64).collect()
    }
}

/// Density histogram in percent per dB: the in-range area equals
/// 100 × (fraction of samples in range).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureHistogram {
    pub kind: HistogramKind,
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub sample_count: usize,
    pub underflow: usize,
    pub overflow: usize,
}

impl FeatureHistogram {
    pub fn bin_width(&self, i: usize) -> f64 {
        self.bin_edges[i + 1] - self.bin_edges[i]
    }

    /// Fraction of all samples falling in bin `i`.
    pub fn bin_mass(&self, i: usize) -> f64 {
        self.densities[i] * self.bin_width(i) / 100.0
    }

    pub fn n_bins(&self) -> usize {
        self.densities.len()
    }

    /// Lower edge of the most populated bin.
    pub fn modal_bin(&self) -> usize {
        self.densities
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

/// Bins are half-open except the last, which includes its upper edge.
pub fn histogram(values: &[f64], kind: HistogramKind) -> Result<FeatureHistogram> {
    if values.is_empty() {
        return Err(Error::Input("histogram of an empty sample".into()));
    }
    let (lo, step, bins) = kind.layout();
    let hi = lo + step * bins as f64;
    let mut counts = vec![0usize; bins];
    let (mut underflow, mut overflow) = (0, 0);
    for &v in values {
        if v < lo {
            underflow += 1;
        } else if v > hi {
            overflow += 1;
        } else {
            let i = (((v - lo) / step).floor() as usize).min(bins - 1);
            counts[i] += 1;
        }
    }
    let n = values.len() as f64;
    Ok(FeatureHistogram {
        kind,
        bin_edges: kind.bin_edges(),
        densities: counts.iter().map(|&c| 100.0 * c as f64 / (n * step)).collect(),
        sample_count: values.len(),
        underflow,
        overflow,
    })
}

/// White-noise reference histograms stored alongside a calibration profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceHistograms {
    pub tract_params: TractParams,
    pub offset_mode: OffsetMode,
    pub o_h: FeatureHistogram,
    pub o_v: FeatureHistogram,
    pub t_vert: FeatureHistogram,
    pub t_horiz: FeatureHistogram,
}

/// The four histograms of a texture analysis.
#[derive(Clone, Debug, PartialEq)]
pub struct MapHistograms {
    pub o_h: FeatureHistogram,
    pub o_v: FeatureHistogram,
    pub t_vert: FeatureHistogram,
    pub t_horiz: FeatureHistogram,
}

impl MapHistograms {
    pub fn from_maps(maps: &TextureMaps) -> Result<Self> {
        Ok(Self {
            o_h: histogram(&maps.o_h.valid_values(), HistogramKind::Csr)?,
            o_v: histogram(&maps.o_v.valid_values(), HistogramKind::Csr)?,
            t_vert: histogram(&maps.t_vert.valid_values(), HistogramKind::Tract)?,
            t_horiz: histogram(&maps.t_horiz.valid_values(), HistogramKind::Tract)?,
        })
    }

    pub fn named(&self) -> [(&'static str, &FeatureHistogram); 4] {
        [
            ("o_h", &self.o_h),
            ("o_v", &self.o_v),
            ("t_vert", &self.t_vert),
            ("t_horiz", &self.t_horiz),
        ]
    }

    pub fn into_reference(self, tract_params: TractParams, offset_mode: OffsetMode) -> ReferenceHistograms {
        ReferenceHistograms {
            tract_params,
            offset_mode,
            o_h: self.o_h,
            o_v: self.o_v,
            t_vert: self.t_vert,
            t_horiz: self.t_horiz,
        }
    }
}

impl ReferenceHistograms {
    pub fn named(&self) -> [(&'static str, &FeatureHistogram); 4] {
        [
            ("o_h", &self.o_h),
            ("o_v", &self.o_v),
            ("t_vert", &self.t_vert),
            ("t_horiz", &self.t_horiz),
        ]
    }
}

/// Per-bin `log10(sound / reference)`. `None` where the reference is empty;
/// `-inf` where only the sound is empty.
#[derive(Clone, Debug, PartialEq)]
pub struct PrevalenceReport {
    pub bin_edges: Vec<f64>,
    pub log10_ratio: Vec<Option<f64>>,
}

pub fn prevalence(sound: &FeatureHistogram, reference: &FeatureHistogram) -> Result<PrevalenceReport> {
    if sound.bin_edges != reference.bin_edges {
        return Err(Error::Input("histograms have different bin edges".into()));
    }
    let log10_ratio = sound
        .densities
        .iter()
        .zip(&reference.densities)
        .map(|(&s, &r)| {
            if r > 0.0 {
                Some(if s > 0.0 {
                    (s / r).log10()
                } else {
                    f64::NEG_INFINITY
                })
            } else {
                None
            }
        })
        .collect();
    Ok(PrevalenceReport {
        bin_edges: sound.bin_edges.clone(),
        log10_ratio,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Correlation {
    pub r: f64,
    /// Pairs used.
    pub n: usize,
    /// Pairs dropped because either value was not finite.
    pub excluded: usize,
}

/// Pearson product-moment correlation. Pairs with a non-finite member
/// (e.g. `-inf` descriptor sentinels) are dropped and counted.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<Correlation> {
    if xs.len() != ys.len() {
        return Err(Error::Input(format!(
            "pearson: lengths differ ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    let pairs: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(x, y)| (*x, *y))
        .collect();
    let excluded = xs.len() - pairs.len();
    if pairs.len() < 3 {
        return Err(Error::UndefinedCorrelation(format!(
            "{} usable pairs, need at least 3",
            pairs.len()
        )));
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in &pairs {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    Ok(Correlation {
        r,
        n: pairs.len(),
        excluded,
    })
}

/// Two-sample Kolmogorov–Smirnov statistic on every `stride`-th element.
pub fn ks_distance(a: &[f64], b: &[f64], stride: usize) -> Result<f64> {
    if stride == 0 {
        return Err(Error::Input("stride must be >= 1".into()));
    }
    let pick = |s: &[f64]| {
        let mut v: Vec<f64> = s.iter().step_by(stride).copied().collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let (a, b) = (pick(a), pick(b));
    if a.is_empty() || b.is_empty() {
        return Err(Error::Input("KS distance of an empty sample".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Harmonic,
    Impact,
    Continuous,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerceptualRow {
    pub sound_id: String,
    pub category: Category,
    pub mds1: f64,
    pub mds2: f64,
    pub mds3: f64,
}

impl PerceptualRow {
    pub fn mds(&self, dim: usize) -> f64 {
        match dim {
            0 => self.mds1,
            1 => self.mds2,
            _ => self.mds3,
        }
    }
}

/// Perceptual coordinates, CSV header `sound_id,category,mds1,mds2,mds3`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerceptualTable {
    rows: Vec<PerceptualRow>,
}

impl PerceptualTable {
    pub fn new(rows: Vec<PerceptualRow>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for r in &rows {
            if !seen.insert(r.sound_id.as_str()) {
                return Err(Error::Input(format!("duplicate sound_id {:?}", r.sound_id)));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[PerceptualRow] {
        &self.rows
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(file);
        let headers = rdr.headers()?.clone();
        let expected = ["sound_id", "category", "mds1", "mds2", "mds3"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Input(format!(
                "{}: expected header {}",
                path.display(),
                expected.join(",")
            )));
        }
        let rows = rdr
            .deserialize()
            .collect::<std::result::Result<Vec<PerceptualRow>, _>>()?;
        Self::new(rows)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Key used to match descriptor rows to perceptual rows: the file stem.
pub fn sound_key(file: &str) -> String {
    Path::new(file)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| file.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DescriptorKind {
    Pulsality,
    Tonality,
    Noisiness,
}

impl DescriptorKind {
    pub const ALL: [DescriptorKind; 3] = [
        DescriptorKind::Pulsality,
        DescriptorKind::Tonality,
        DescriptorKind::Noisiness,
    ];

    pub fn value(self, d: &DescriptorTriple) -> f64 {
        match self {
            DescriptorKind::Pulsality => d.pulsality,
            DescriptorKind::Tonality => d.tonality,
            DescriptorKind::Noisiness => d.noisiness,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            DescriptorKind::Pulsality => "P",
            DescriptorKind::Tonality => "T",
            DescriptorKind::Noisiness => "N",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DescriptorKind::Pulsality => "Pulsality",
            DescriptorKind::Tonality => "Tonality",
            DescriptorKind::Noisiness => "Noisiness",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationEntry {
    pub descriptor: DescriptorKind,
    pub weighting: Weighting,
    /// 1-based MDS dimension.
    pub mds_dim: usize,
    pub correlation: Correlation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationReport {
    pub entries: Vec<CorrelationEntry>,
    pub matched: usize,
    pub unmatched: usize,
}

impl CorrelationReport {
    pub fn get(&self, descriptor: DescriptorKind, weighting: Weighting, mds_dim: usize) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.descriptor == descriptor && e.weighting == weighting && e.mds_dim == mds_dim)
            .map(|e| e.correlation.r)
    }
}

/// Descriptor values joined to perceptual rows by sound key.
pub struct MatchedRows<'a> {
    pub pairs: Vec<(&'a DescriptorTriple, &'a PerceptualRow)>,
    pub unmatched: usize,
}

pub fn match_rows<'a>(
    descriptors: &'a [DescriptorTriple],
    weighting: Weighting,
    perceptual: &'a PerceptualTable,
) -> MatchedRows<'a> {
    let by_key: HashMap<String, &PerceptualRow> = perceptual
        .rows()
        .iter()
        .map(|r| (sound_key(&r.sound_id), r))
        .collect();
    let mut pairs = Vec::new();
    let mut unmatched = 0;
    for d in descriptors.iter().filter(|d| d.weighting == weighting) {
        match by_key.get(&sound_key(&d.file)) {
            Some(p) => pairs.push((d, *p)),
            None => unmatched += 1,
        }
    }
    MatchedRows { pairs, unmatched }
}

/// Correlates P/T/N (per weighting present) with MDS1–3.
pub fn correlate_with_mds(
    descriptors: &[DescriptorTriple],
    perceptual: &PerceptualTable,
) -> Result<CorrelationReport> {
    let mut entries = Vec::new();
    let mut matched = 0;
    let mut unmatched = 0;
    for weighting in [Weighting::Energy, Weighting::Area] {
        if !descriptors.iter().any(|d| d.weighting == weighting) {
            continue;
        }
        let m = match_rows(descriptors, weighting, perceptual);
        if m.pairs.len() < 3 {
            return Err(Error::Input(format!(
                "only {} descriptor rows ({} weighting) match perceptual sound ids; need 3",
                m.pairs.len(),
                weighting.as_str()
            )));
        }
        matched = matched.max(m.pairs.len());
        unmatched = unmatched.max(m.unmatched);
        for kind in DescriptorKind::ALL {
            let xs: Vec<f64> = m.pairs.iter().map(|(d, _)| kind.value(d)).collect();
            for dim in 0..3 {
                let ys: Vec<f64> = m.pairs.iter().map(|(_, p)| p.mds(dim)).collect();
                let correlation = pearson(&xs, &ys).map_err(|e| match e {
                    Error::UndefinedCorrelation(msg) => Error::UndefinedCorrelation(format!(
                        "{}({}) vs MDS{}: {msg}",
                        kind.symbol(),
                        weighting.as_str(),
                        dim + 1
                    )),
                    other => other,
                })?;
                entries.push(CorrelationEntry {
                    descriptor: kind,
                    weighting,
                    mds_dim: dim + 1,
                    correlation,
                });
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::Input("no descriptor rows".into()));
    }
    Ok(CorrelationReport {
        entries,
        matched,
        unmatched,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn edges_are_exact() {
        let csr = HistogramKind::Csr.bin_edges();
        assert_eq!(csr.len(), 31);
        assert_eq!(csr[0], -30.0);
        assert_eq!(csr[30], 30.0);
        let tract = HistogramKind::Tract.bin_edges();
        assert_eq!(tract.len(), 61);
        assert_eq!(tract[60], 15.0);
        assert_eq!(tract[24], 6.0);
    }

    #[test]
    fn single_bin_histogram() {
        let h = histogram(&[3.1, 3.2, 3.9], HistogramKind::Csr).unwrap();
        assert_eq!(h.densities[16], 100.0 / 2.0);
        assert_eq!(h.densities.iter().filter(|d| **d != 0.0).count(), 1);
    }

    #[test]
    fn area_and_overflow_accounting() {
        let values: Vec<f64> = (0..1000).map(|i| -40.0 + i as f64 * 0.08).collect();
        let h = histogram(&values, HistogramKind::Csr).unwrap();
        let area: f64 = (0..h.n_bins()).map(|i| h.densities[i] * h.bin_width(i)).sum();
        let in_range = h.sample_count - h.underflow - h.overflow;
        assert!((area - 100.0 * in_range as f64 / 1000.0).abs() < 1e-9);
        assert_eq!(h.underflow, 125);
        let h = histogram(&[1.0, 2.0, 14.99, 15.0], HistogramKind::Tract).unwrap();
        let area: f64 = (0..h.n_bins()).map(|i| h.densities[i] * h.bin_width(i)).sum();
        assert!((area - 100.0).abs() < 1e-9);
        assert!(histogram(&[], HistogramKind::Tract).is_err());
    }

    #[test]
    fn uniform_sample_is_flat() {
        let values: Vec<f64> = (0..60_000).map(|i| -30.0 + (i as f64 + 0.5) * 0.001).collect();
        let h = histogram(&values, HistogramKind::Csr).unwrap();
        for d in &h.densities {
            assert!((d - 100.0 / 60.0).abs() < 1e-6);
        }
    }

    #[test]
    fn prevalence_cases() {
        let a = histogram(&[1.0, 1.5, 5.0, 20.0], HistogramKind::Csr).unwrap();
        let same = prevalence(&a, &a).unwrap();
        assert!(same.log10_ratio.iter().flatten().all(|r| *r == 0.0));
        assert_eq!(same.log10_ratio[0], None);

        let mut sound = a.clone();
        sound.densities[15] *= 10.0;
        let p = prevalence(&sound, &a).unwrap();
        assert!((p.log10_ratio[15].unwrap() - 1.0).abs() < 1e-12);

        let mut empty = a.clone();
        empty.densities[17] = 0.0;
        assert_eq!(prevalence(&empty, &a).unwrap().log10_ratio[17], Some(f64::NEG_INFINITY));

        let t = histogram(&[1.0], HistogramKind::Tract).unwrap();
        assert!(prevalence(&t, &a).is_err());
    }

    #[test]
    fn pearson_examples() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let lin: Vec<f64> = xs.iter().map(|x| 2.0 * x + 3.0).collect();
        assert!((pearson(&xs, &lin).unwrap().r - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson(&xs, &neg).unwrap().r + 1.0).abs() < 1e-12);
        // hand computation: cov 0.75·4/… → 0.6
        assert!((pearson(&xs, &[2.0, 1.0, 4.0, 3.0]).unwrap().r - 0.6).abs() < 1e-12);
        assert!(matches!(
            pearson(&xs, &[1.0, 1.0, 1.0, 1.0]),
            Err(Error::UndefinedCorrelation(_))
        ));
    }

    #[test]
    fn pearson_drops_sentinels() {
        let xs = [1.0, 2.0, f64::NEG_INFINITY, 3.0, 4.0];
        let ys = [2.0, 4.0, 5.0, 6.0, 8.0];
        let c = pearson(&xs, &ys).unwrap();
        assert_eq!(c.n, 4);
        assert_eq!(c.excluded, 1);
        assert!((c.r - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn pearson_affine_invariance(
            xs in proptest::collection::vec(-100.0f64..100.0, 5..40),
            a in 0.1f64..10.0, b in -50.0f64..50.0,
        ) {
            let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| x * x + i as f64).collect();
            let Ok(base) = pearson(&xs, &ys) else { return Ok(()); };
            let xt: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            let scaled = pearson(&xt, &ys).unwrap();
            prop_assert!((base.r - scaled.r).abs() < 1e-9);
            let xn: Vec<f64> = xs.iter().map(|x| -x).collect();
            prop_assert!((base.r + pearson(&xn, &ys).unwrap().r).abs() < 1e-9);
        }

        #[test]
        fn prevalence_of_self_is_zero(values in proptest::collection::vec(-40.0f64..40.0, 1..300)) {
            let h = histogram(&values, HistogramKind::Csr).unwrap();
            let p = prevalence(&h, &h).unwrap();
            prop_assert!(p.log10_ratio.iter().flatten().all(|r| *r == 0.0));
            prop_assert!(h.densities.iter().all(|d| d.is_finite() && *d >= 0.0));
            let mass: f64 = (0..h.n_bins()).map(|i| h.bin_mass(i)).sum::<f64>()
                + (h.underflow + h.overflow) as f64 / h.sample_count as f64;
            prop_assert!((mass - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ks_cases() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(ks_distance(&a, &a, 1).unwrap(), 0.0);
        assert_eq!(ks_distance(&a, &[10.0, 11.0], 1).unwrap(), 1.0);
        // stride keeps elements 0 and 2 of each sample
        assert_eq!(ks_distance(&a, &[1.0, 9.0, 3.0], 2).unwrap(), 0.0);
        assert!((ks_distance(&[1.0, 2.0], &[2.0, 3.0], 1).unwrap() - 0.5).abs() < 1e-12);
        assert!(ks_distance(&a, &[], 1).is_err());
        assert!(ks_distance(&a, &a, 0).is_err());
    }

    fn triple(file: &str, w: Weighting, p: f64, t: f64, n: f64) -> DescriptorTriple {
        DescriptorTriple {
            file: file.into(),
            weighting: w,
            pulsality: p,
            tonality: t,
            noisiness: n,
            n_valid_cells: 1,
            warnings: vec![],
        }
    }

    #[test]
    fn mds_correlation_grid() {
        let rows: Vec<PerceptualRow> = (0..6)
            .map(|i| PerceptualRow {
                sound_id: format!("s{i}"),
                category: Category::Impact,
                mds1: i as f64,
                mds2: (i * i) as f64,
                mds3: (i % 2) as f64,
            })
            .collect();
        let table = PerceptualTable::new(rows).unwrap();
        let descriptors: Vec<DescriptorTriple> = (0..6)
            .flat_map(|i| {
                let x = i as f64;
                [
                    triple(&format!("dir/s{i}.wav"), Weighting::Energy, -x, x, -(x * x)),
                    triple(&format!("s{i}.wav"), Weighting::Area, x * 0.5, -x, 1.0 / (x + 1.0)),
                ]
            })
            .collect();
        let report = correlate_with_mds(&descriptors, &table).unwrap();
        assert_eq!(report.entries.len(), 18);
        assert_eq!(report.matched, 6);
        let r = report.get(DescriptorKind::Pulsality, Weighting::Energy, 1).unwrap();
        assert!((r + 1.0).abs() < 1e-12);
        let r = report.get(DescriptorKind::Tonality, Weighting::Energy, 1).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let r = report.get(DescriptorKind::Noisiness, Weighting::Energy, 2).unwrap();
        assert!((r + 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_matches() {
        let table = PerceptualTable::new(vec![PerceptualRow {
            sound_id: "a".into(),
            category: Category::Harmonic,
            mds1: 0.0,
            mds2: 0.0,
            mds3: 0.0,
        }])
        .unwrap();
        let d = vec![triple("a.wav", Weighting::Area, -1.0, -1.0, -1.0)];
        assert!(correlate_with_mds(&d, &table).is_err());
    }

    #[test]
    fn perceptual_csv_round_trip_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let table = PerceptualTable::new(vec![
            PerceptualRow {
                sound_id: "rain".into(),
                category: Category::Continuous,
                mds1: 0.25,
                mds2: -1.5,
                mds3: 3.0,
            },
            PerceptualRow {
                sound_id: "siren".into(),
                category: Category::Harmonic,
                mds1: -0.125,
                mds2: 2.0,
                mds3: 0.0,
            },
        ])
        .unwrap();
        table.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("sound_id,category,mds1,mds2,mds3\n"));
        assert_eq!(PerceptualTable::read_csv(&path).unwrap(), table);
        let dup = vec![table.rows()[0].clone(), table.rows()[0].clone()];
        assert!(PerceptualTable::new(dup).is_err());
    }
}
