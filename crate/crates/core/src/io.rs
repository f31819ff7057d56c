//! Persistence: the graph catalog, feature-vector tables, per-code sample
//! directories and static SVG plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::embedding::{embeddability_check, make_embedding, Embeddability};
use crate::engine::{ingest_samples, SampleMeta, SampleSet};
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::graph::{build_adjacency, classify, GraphCode, IsoClass};

/// One candidate graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogRecord {
    pub code: GraphCode,
    pub embeddable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<IsoClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    /// Mean photon number per mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    /// Common nonzero singular value of the unscaled block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singular_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Class counts over the embeddable records, in table order.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ClassHistogram(pub Vec<(IsoClass, usize)>);

impl ClassHistogram {
    pub fn count(&self, class: IsoClass) -> usize {
        self.0
            .iter()
            .find(|(c, _)| *c == class)
            .map_or(0, |&(_, n)| n)
    }
}

impl Serialize for ClassHistogram {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (class, n) in &self.0 {
            map.serialize_entry(class.label(), n)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for ClassHistogram {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = ClassHistogram;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a map from class label to count")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> std::result::Result<ClassHistogram, A::Error> {
                let mut out = Vec::new();
                while let Some((class, n)) = access.next_entry::<IsoClass, usize>()? {
                    out.push((class, n));
                }
                Ok(ClassHistogram(out))
            }
        }
        d.deserialize_map(V)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub records: Vec<CatalogRecord>,
    pub class_histogram: ClassHistogram,
}

impl Catalog {
    pub fn embeddable(&self) -> impl Iterator<Item = &CatalogRecord> {
        self.records.iter().filter(|r| r.embeddable)
    }
}

fn catalog_record(code: GraphCode) -> CatalogRecord {
    let block = code.decode();
    match embeddability_check(&block) {
        Embeddability::NotEmbeddable(reason) => CatalogRecord {
            code,
            embeddable: false,
            class: None,
            rank: None,
            m: None,
            singular_value: None,
            reason: Some(reason),
        },
        Embeddability::Embeddable(_) => {
            let spec = make_embedding(code).expect("embeddability already checked");
            CatalogRecord {
                code,
                embeddable: true,
                class: Some(classify(build_adjacency(&block).graph())),
                rank: Some(spec.rank),
                m: Some(spec.mean_photon_per_mode),
                singular_value: Some(spec.sigma()),
                reason: None,
            }
        }
    }
}

/// Catalog in ascending code order. With `all_candidates`, the 1024 codes
/// including rejected ones and their reasons.
pub fn build_catalog(all_candidates: bool) -> Catalog {
    let records: Vec<CatalogRecord> = GraphCode::all()
        .map(catalog_record)
        .filter(|r| all_candidates || r.embeddable)
        .collect();
    let mut counts: BTreeMap<IsoClass, usize> = BTreeMap::new();
    for r in records.iter().filter(|r| r.embeddable) {
        *counts.entry(r.class.unwrap_or(IsoClass::Other)).or_default() += 1;
    }
    let mut histogram: Vec<(IsoClass, usize)> = IsoClass::NAMED
        .iter()
        .map(|&c| (c, counts.get(&c).copied().unwrap_or(0)))
        .collect();
    if let Some(&n) = counts.get(&IsoClass::Other) {
        histogram.push((IsoClass::Other, n));
    }
    Catalog {
        records,
        class_histogram: ClassHistogram(histogram),
    }
}

pub fn write_catalog(path: &Path, catalog: &Catalog) -> Result<()> {
    let json = serde_json::to_string_pretty(catalog)?;
    fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_catalog(path: &Path) -> Result<Catalog> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Formats like C's `%.12g`.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (DIGITS - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

/// A feature vector with the graph it describes.
#[derive(Clone, Debug, PartialEq)]
pub struct FvRecord {
    pub code: Option<GraphCode>,
    pub class: Option<IsoClass>,
    pub fv: FeatureVector,
}

pub const FV_HEADER: [&str; 8] = [
    "code",
    "class",
    "provenance",
    "loss_eta",
    "label",
    "value",
    "stat_error",
    "tail_bound",
];

/// One row per component.
pub fn write_fv_csv<W: Write>(out: W, records: &[FvRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FV_HEADER)?;
    for r in records {
        let code = r.code.map(|c| c.to_string()).unwrap_or_default();
        let class = r.class.map(|c| c.label().to_string()).unwrap_or_default();
        for (i, (label, value)) in r.fv.labels.iter().zip(&r.fv.values).enumerate() {
            let stat = r.fv.stat_errors.as_ref().map(|e| e[i]);
            w.write_record([
                code.clone(),
                class.clone(),
                r.fv.provenance.to_string(),
                fmt_sig(r.fv.loss_eta),
                label.to_string(),
                fmt_sig(*value),
                opt(stat),
                opt(r.fv.tail_bound),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

/// Generic header-plus-rows CSV.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// `dir/<code>.jsonl`.
pub fn sample_file(dir: &Path, code: GraphCode) -> PathBuf {
    dir.join(format!("{code}.jsonl"))
}

/// Sample sets for every code, in the order given. Missing files are
/// reported together.
pub fn load_sample_dir(dir: &Path, codes: &[GraphCode]) -> Result<Vec<(GraphCode, SampleSet)>> {
    let missing: Vec<String> = codes
        .iter()
        .filter(|&&c| !sample_file(dir, c).is_file())
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{}: no sample file for {} code(s): {}",
            dir.display(),
            missing.len(),
            missing.join(", ")
        )));
    }
    codes
        .iter()
        .map(|&c| {
            let set = ingest_samples(&sample_file(dir, c))?;
            match set.meta.code {
                Some(found) if found != c => Err(Error::InvalidArgument(format!(
                    "{}: metadata names code {found}",
                    sample_file(dir, c).display()
                ))),
                _ => Ok((c, set)),
            }
        })
        .collect()
}

/// Summary of a sample file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IngestReport {
    pub shots: usize,
    pub meta: SampleMeta,
    /// Per mode: how many shots saw each count.
    pub mode_histograms: Vec<BTreeMap<u16, usize>>,
    pub mean_per_mode: Vec<f64>,
    /// Fraction of shots with an odd total. Lossless emission is pairwise,
    /// so anything above zero points to loss.
    pub odd_total_fraction: f64,
    pub loss_signature: bool,
    /// Fraction of shots per total photon number.
    pub event_frequencies: BTreeMap<usize, f64>,
}

pub fn ingest_report(samples: &SampleSet) -> Result<IngestReport> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = samples.len() as f64;
    let mut mode_histograms = vec![BTreeMap::new(); 8];
    let mut sums = [0u64; 8];
    let mut totals: BTreeMap<usize, usize> = BTreeMap::new();
    for shot in &samples.shots {
        for (mode, &c) in shot.counts().iter().enumerate() {
            *mode_histograms[mode].entry(c).or_insert(0) += 1;
            sums[mode] += u64::from(c);
        }
        *totals.entry(shot.total()).or_insert(0) += 1;
    }
    let odd: usize = totals.iter().filter(|(t, _)| *t % 2 == 1).map(|(_, c)| c).sum();
    Ok(IngestReport {
        shots: samples.len(),
        meta: samples.meta.clone(),
        mode_histograms,
        mean_per_mode: sums.iter().map(|&s| s as f64 / n).collect(),
        odd_total_fraction: odd as f64 / n,
        loss_signature: odd > 0,
        event_frequencies: totals.into_iter().map(|(t, c)| (t, c as f64 / n)).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mark {
    Line,
    Dots,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub mark: Mark,
}

/// One panel of a static plot.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Replaces the numeric x ticks, e.g. with class names.
    pub x_categories: Vec<(f64, String)>,
    /// Dashed horizontal reference line.
    pub y_rule: Option<f64>,
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

const PANEL_W: f64 = 560.0;
const PANEL_H: f64 = 400.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 60.0;

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = if lo.abs() > 1e-12 { lo.abs() * 0.1 } else { 1.0 };
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn render_panel(svg: &mut String, plot: &Plot, ox: f64) {
    let (x0, x1) = bounds(
        plot.series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.0))
            .chain(plot.x_categories.iter().map(|c| c.0)),
    );
    let (y0, y1) = bounds(
        plot.series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.1))
            .chain(plot.y_rule),
    );
    let w = PANEL_W - MARGIN_L - MARGIN_R;
    let h = PANEL_H - MARGIN_T - MARGIN_B;
    let px = |x: f64| ox + MARGIN_L + (x - x0) / (x1 - x0) * w;
    let py = |y: f64| MARGIN_T + h - (y - y0) / (y1 - y0) * h;

    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        ox + MARGIN_L + w / 2.0,
        esc(&plot.title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        ox + MARGIN_L,
        MARGIN_T,
        w,
        h
    );
    if plot.x_categories.is_empty() {
        for t in nice_ticks(x0, x1) {
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{}</text>"#,
                px(t),
                MARGIN_T + h + 14.0,
                fmt_tick(t)
            );
        }
    } else {
        for (x, name) in &plot.x_categories {
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{}</text>"#,
                px(*x),
                MARGIN_T + h + 14.0,
                esc(name)
            );
        }
    }
    for t in nice_ticks(y0, y1) {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{}</text>"#,
            ox + MARGIN_L - 4.0,
            py(t) + 3.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{}</text>"#,
        ox + MARGIN_L + w / 2.0,
        PANEL_H - 20.0,
        esc(&plot.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate({:.1},{:.1}) rotate(-90)" text-anchor="middle" font-size="12">{}</text>"#,
        ox + 16.0,
        MARGIN_T + h / 2.0,
        esc(&plot.y_label)
    );
    if let Some(y) = plot.y_rule {
        let _ = writeln!(
            svg,
            r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#999" stroke-dasharray="4 3"/>"##,
            ox + MARGIN_L,
            py(y),
            ox + MARGIN_L + w,
            py(y)
        );
    }
    for (i, s) in plot.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let finite = s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite());
        match s.mark {
            Mark::Line => {
                let pts: Vec<String> = finite.map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
                let _ = writeln!(
                    svg,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    pts.join(" ")
                );
            }
            Mark::Dots => {
                for &(x, y) in finite {
                    let _ = writeln!(
                        svg,
                        r#"<circle cx="{:.1}" cy="{:.1}" r="2.5" fill="{color}"/>"#,
                        px(x),
                        py(y)
                    );
                }
            }
        }
        let ly = MARGIN_T + 10.0 + 16.0 * i as f64;
        let lx = ox + MARGIN_L + w + 10.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{lx:.1}" y="{:.1}" width="10" height="10" fill="{color}"/><text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#,
            ly - 9.0,
            lx + 14.0,
            ly,
            esc(&s.name)
        );
    }
}

fn fmt_tick(t: f64) -> String {
    let s = format!("{t:.6}");
    let s = trim_zeros(&s);
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Panels side by side. The first line is a version comment; everything
/// after it depends only on the data.
pub fn render_svg(panels: &[Plot]) -> String {
    let width = PANEL_W * panels.len().max(1) as f64;
    let mut svg = String::new();
    let _ = writeln!(svg, "<!-- gbs-graph {} -->", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{PANEL_H:.0}" viewBox="0 0 {width:.0} {PANEL_H:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, p) in panels.iter().enumerate() {
        render_panel(&mut svg, p, PANEL_W * i as f64);
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureLabel, EventSpec, Provenance};

    #[test]
    fn sig_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(0.5), "0.5");
        assert_eq!(fmt_sig(0.243595894001), "0.243595894001");
        assert_eq!(fmt_sig(1f64.tanh().powi(2) / 1f64.cosh().powi(2)), "0.243595894");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(2.5e-7), "2.5e-07");
        assert_eq!(fmt_sig(0.0001234), "0.0001234");
        assert_eq!(fmt_sig(-12.5), "-12.5");
        assert_eq!(fmt_sig(1e15), "1e+15");
        assert_eq!(fmt_sig(123456789012.0), "123456789012");
    }

    #[test]
    fn catalog_counts() {
        let cat = build_catalog(false);
        assert_eq!(cat.records.len(), 75);
        assert!(cat.records.windows(2).all(|w| w[0].code < w[1].code));
        let want = [4, 12, 6, 12, 16, 4, 4, 10, 6, 1];
        for (&class, n) in IsoClass::NAMED.iter().zip(want) {
            assert_eq!(cat.class_histogram.count(class), n, "{class}");
        }
        let all = build_catalog(true);
        assert_eq!(all.records.len(), 1024);
        assert_eq!(all.class_histogram, cat.class_histogram);
        let rejected = all.records.iter().find(|r| r.code.to_string() == "1100000000").unwrap();
        assert!(!rejected.embeddable);
        assert!(rejected.reason.as_ref().unwrap().contains("singular"));
    }

    #[test]
    fn catalog_json_round_trip() {
        let cat = build_catalog(true);
        let json = serde_json::to_string_pretty(&cat).unwrap();
        let back: Catalog = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cat);
        assert!(json.find("\"1K2\"").unwrap() < json.find("\"1K44\"").unwrap());
    }

    #[test]
    fn fv_csv_layout() {
        let fv = FeatureVector {
            labels: vec![FeatureLabel::Event(EventSpec { k: 2, n_max: 8 })],
            values: vec![0.25],
            provenance: Provenance::Sampled,
            loss_eta: 1.0,
            stat_errors: Some(vec![0.01]),
            tail_bound: None,
            shots: Some(100),
        };
        let rec = FvRecord {
            code: Some("1111111111".parse().unwrap()),
            class: Some(IsoClass::OneK44),
            fv,
        };
        let mut out = Vec::new();
        write_fv_csv(&mut out, &[rec]).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "code,class,provenance,loss_eta,label,value,stat_error,tail_bound\n\
             1111111111,1K44,sampled,1,\"event(k=2,n_max=8)\",0.25,0.01,\n"
        );
    }

    #[test]
    fn report_flags_odd_totals() {
        use crate::engine::{PhotonPattern, SampleSource};
        let meta = SampleMeta {
            code: None,
            source: SampleSource::Ingested,
            seed: None,
            loss: None,
            threshold: false,
            shots: 4,
            cutoff_pairs: None,
            covered_mass: None,
        };
        let mut set = SampleSet {
            shots: vec![PhotonPattern([1, 0, 0, 0, 1, 0, 0, 0]), PhotonPattern::vacuum()],
            meta,
        };
        let r = ingest_report(&set).unwrap();
        assert_eq!(r.odd_total_fraction, 0.0);
        assert!(!r.loss_signature);
        assert_eq!(r.mode_histograms[0][&1], 1);
        assert_eq!(r.mean_per_mode[4], 0.5);
        set.shots.push(PhotonPattern([2, 0, 0, 0, 1, 0, 0, 0]));
        set.shots.push(PhotonPattern([0, 0, 0, 0, 1, 0, 0, 0]));
        let r = ingest_report(&set).unwrap();
        assert_eq!(r.odd_total_fraction, 0.5);
        assert!(r.loss_signature);
        assert_eq!(r.event_frequencies[&3], 0.25);
        set.shots.clear();
        assert!(ingest_report(&set).is_err());
    }

    #[test]
    fn svg_is_deterministic() {
        let plot = Plot {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series {
                name: "a<b".into(),
                points: vec![(0.0, 1.0), (1.0, f64::NAN), (2.0, 3.0)],
                mark: Mark::Line,
            }],
            y_rule: Some(0.0),
            ..Plot::default()
        };
        let a = render_svg(&[plot.clone(), plot.clone()]);
        assert_eq!(a, render_svg(&[plot.clone(), plot]));
        assert!(a.starts_with("<!-- gbs-graph "));
        assert!(a.contains("a&lt;b"));
        assert!(!a.contains("NaN"));
    }
}
