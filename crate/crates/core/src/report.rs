//! Data behind the three figures: event-6 values per graph, loss-sweep
//! deviation curves, and orbit-space clustering.

use rayon::prelude::*;

use crate::embedding::make_embedding;
use crate::engine::{LossModel, SampleSet};
use crate::error::{Error, Result};
use crate::features::{
    default_orbits, fv_events_from_samples, fv_orbits_from_samples, match_loss, relative_deviation,
    AnalyticModel, AnalyticReference, DeviationCurve, FeatureLabel, FeatureVector, OrbitId,
};
use crate::graph::{build_adjacency, classify, GraphCode, IsoClass};
use crate::io::{fmt_sig, Mark, Plot, Series};

/// Pair cutoff for analytic orbit values quoted without reference to samples.
pub const REFERENCE_CUTOFF_PAIRS: usize = 20;

pub fn class_of(code: GraphCode) -> IsoClass {
    classify(build_adjacency(&code.decode()).graph())
}

fn class_rank(class: IsoClass) -> usize {
    IsoClass::NAMED
        .iter()
        .position(|&c| c == class)
        .unwrap_or(IsoClass::NAMED.len())
}

/// Transmission the samples were taken at; 1 when unrecorded.
fn sample_loss(samples: &SampleSet) -> Result<LossModel> {
    LossModel::from_transmission(samples.meta.loss.unwrap_or(1.0))
}

fn sorted_by_class(samples: &[(GraphCode, SampleSet)]) -> Vec<(GraphCode, IsoClass, &SampleSet)> {
    let mut rows: Vec<_> = samples.iter().map(|(c, s)| (*c, class_of(*c), s)).collect();
    rows.sort_by_key(|&(code, class, _)| (class_rank(class), code));
    rows
}

/// Midpoint of each class's run of x positions.
fn class_ticks(classes: &[IsoClass]) -> Vec<(f64, String)> {
    let mut ticks = Vec::new();
    let mut start = 0;
    for i in 1..=classes.len() {
        if i == classes.len() || classes[i] != classes[start] {
            ticks.push(((start + i - 1) as f64 / 2.0, classes[start].label().to_string()));
            start = i;
        }
    }
    ticks
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fig2Row {
    pub code: GraphCode,
    pub class: IsoClass,
    pub sampled: f64,
    pub stat_error: f64,
    pub analytic: f64,
    pub loss_eta: f64,
}

/// One event probability per graph, sampled against analytic, graphs
/// grouped by class.
#[derive(Clone, Debug, PartialEq)]
pub struct Fig2 {
    pub k: usize,
    pub n_max: usize,
    pub rows: Vec<Fig2Row>,
}

pub fn fig2(samples: &[(GraphCode, SampleSet)], k: usize, n_max: usize, default_cutoff: usize) -> Result<Fig2> {
    let rows = sorted_by_class(samples)
        .into_par_iter()
        .map(|(code, class, set)| {
            let sampled = fv_events_from_samples(set, &[k], n_max)?;
            let model = AnalyticModel::for_samples(make_embedding(code)?, &set.meta, default_cutoff)?;
            let analytic = model.events(&[k], n_max, sample_loss(set)?);
            Ok(Fig2Row {
                code,
                class,
                sampled: sampled.values[0],
                stat_error: sampled.stat_errors.as_ref().map_or(0.0, |e| e[0]),
                analytic: analytic.values[0],
                loss_eta: analytic.loss_eta,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Fig2 { k, n_max, rows })
}

impl Fig2 {
    pub const HEADER: [&'static str; 7] = ["x", "code", "class", "sampled", "stat_error", "analytic", "loss_eta"];

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(x, r)| {
                vec![
                    x.to_string(),
                    r.code.to_string(),
                    r.class.label().to_string(),
                    fmt_sig(r.sampled),
                    fmt_sig(r.stat_error),
                    fmt_sig(r.analytic),
                    fmt_sig(r.loss_eta),
                ]
            })
            .collect()
    }

    pub fn plot(&self) -> Plot {
        let pts = |f: fn(&Fig2Row) -> f64| {
            self.rows
                .iter()
                .enumerate()
                .map(|(x, r)| (x as f64, f(r)))
                .collect()
        };
        let classes: Vec<IsoClass> = self.rows.iter().map(|r| r.class).collect();
        Plot {
            title: format!("event k={} (n_max={})", self.k, self.n_max),
            x_label: "graph, grouped by class".into(),
            y_label: "probability".into(),
            series: vec![
                Series {
                    name: "sampled".into(),
                    points: pts(|r| r.sampled),
                    mark: Mark::Dots,
                },
                Series {
                    name: "analytic".into(),
                    points: pts(|r| r.analytic),
                    mark: Mark::Dots,
                },
            ],
            x_categories: class_ticks(&classes),
            y_rule: None,
        }
    }
}

/// Deviation curves of one graph's sampled event vector, and where each
/// component meets the analytic value.
#[derive(Clone, Debug, PartialEq)]
pub struct Fig3 {
    pub code: GraphCode,
    pub curve: DeviationCurve,
    pub crossings: Vec<(FeatureLabel, Option<f64>)>,
}

pub fn fig3(code: GraphCode, samples: &SampleSet, events: &[usize], n_max: usize, grid: &[f64], default_cutoff: usize) -> Result<Fig3> {
    if let Some(found) = samples.meta.code.filter(|&c| c != code) {
        return Err(Error::InvalidArgument(format!(
            "samples were generated for {found}, not {code}"
        )));
    }
    let model = AnalyticModel::for_samples(make_embedding(code)?, &samples.meta, default_cutoff)?;
    let sampled = fv_events_from_samples(samples, events, n_max)?;
    let curve = relative_deviation(&sampled, &model, grid)?;
    let crossings = (0..sampled.len())
        .map(|i| Ok((sampled.labels[i].clone(), match_loss(&sampled, &model, i, grid)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Fig3 {
        code,
        curve,
        crossings,
    })
}

impl Fig3 {
    pub const HEADER: [&'static str; 3] = ["loss_factor", "label", "relative_deviation"];
    pub const CROSSING_HEADER: [&'static str; 2] = ["label", "matching_loss_factor"];

    /// Long format; undefined cells are left empty.
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        let mut rows = Vec::new();
        for (l, row) in self.curve.loss_factors.iter().zip(&self.curve.deviations) {
            for (label, dev) in self.curve.labels.iter().zip(row) {
                rows.push(vec![fmt_sig(*l), label.to_string(), dev.map(fmt_sig).unwrap_or_default()]);
            }
        }
        rows
    }

    pub fn crossing_rows(&self) -> Vec<Vec<String>> {
        self.crossings
            .iter()
            .map(|(label, x)| vec![label.to_string(), x.map(fmt_sig).unwrap_or_default()])
            .collect()
    }

    pub fn plot(&self) -> Plot {
        let series = self
            .curve
            .labels
            .iter()
            .enumerate()
            .map(|(i, label)| Series {
                name: label.to_string(),
                points: self
                    .curve
                    .loss_factors
                    .iter()
                    .zip(&self.curve.deviations)
                    .map(|(&l, row)| (l, row[i].unwrap_or(f64::NAN)))
                    .collect(),
                mark: Mark::Line,
            })
            .collect();
        Plot {
            title: format!("relative deviation, {}", self.code),
            x_label: "loss factor".into(),
            y_label: "(sampled - analytic) / analytic".into(),
            series,
            x_categories: Vec::new(),
            y_rule: Some(0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fig4Point {
    pub code: GraphCode,
    pub class: IsoClass,
    pub fv: FeatureVector,
}

/// Cluster statistics of one class in orbit space.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassSpread {
    pub class: IsoClass,
    pub members: usize,
    pub centroid: Vec<f64>,
    /// RMS distance of members to the centroid.
    pub dispersion: f64,
    pub nearest: IsoClass,
    pub nearest_distance: f64,
    /// Nearest centroid farther than the two dispersions combined.
    pub separated: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fig4 {
    pub orbits: Vec<OrbitId>,
    pub points: Vec<Fig4Point>,
    pub spreads: Vec<ClassSpread>,
    /// Analytic orbit-vector distance between the 2P3 and 2S3 classes at
    /// the samples' transmission, with its truncation bound.
    pub p3_s3_distance: Option<(f64, f64)>,
}

impl Fig4 {
    pub fn separated_count(&self) -> usize {
        self.spreads.iter().filter(|s| s.separated).count()
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub fn class_spreads(points: &[Fig4Point]) -> Vec<ClassSpread> {
    let mut groups: Vec<(IsoClass, Vec<&[f64]>)> = Vec::new();
    for p in points {
        match groups.iter_mut().find(|(c, _)| *c == p.class) {
            Some((_, v)) => v.push(&p.fv.values),
            None => groups.push((p.class, vec![&p.fv.values])),
        }
    }
    groups.sort_by_key(|(c, _)| class_rank(*c));
    let stats: Vec<(IsoClass, usize, Vec<f64>, f64)> = groups
        .iter()
        .map(|(class, members)| {
            let dim = members[0].len();
            let n = members.len() as f64;
            let centroid: Vec<f64> = (0..dim).map(|i| members.iter().map(|m| m[i]).sum::<f64>() / n).collect();
            let dispersion = (members.iter().map(|m| dist(m, &centroid).powi(2)).sum::<f64>() / n).sqrt();
            (*class, members.len(), centroid, dispersion)
        })
        .collect();
    stats
        .iter()
        .map(|(class, members, centroid, dispersion)| {
            let (nearest, nearest_distance, other_dispersion) = stats
                .iter()
                .filter(|o| o.0 != *class)
                .map(|o| (o.0, dist(centroid, &o.2), o.3))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap_or((*class, f64::INFINITY, 0.0));
            ClassSpread {
                class: *class,
                members: *members,
                centroid: centroid.clone(),
                dispersion: *dispersion,
                nearest,
                nearest_distance,
                separated: nearest_distance > dispersion + other_dispersion,
            }
        })
        .collect()
}

fn first_member(class: IsoClass) -> Option<GraphCode> {
    GraphCode::all().find(|&c| make_embedding(c).is_ok() && class_of(c) == class)
}

/// Analytic distance between the first members of two classes, with the
/// larger of the two truncation bounds.
pub fn analytic_class_distance(a: IsoClass, b: IsoClass, orbits: &[OrbitId], loss: LossModel, cutoff_pairs: usize) -> Result<(f64, f64)> {
    let fv = |class: IsoClass| -> Result<FeatureVector> {
        let code = first_member(class)
            .ok_or_else(|| Error::InvalidArgument(format!("class {class} has no embeddable member")))?;
        Ok(AnalyticModel::new(make_embedding(code)?, cutoff_pairs, AnalyticReference::Exact)?.orbits(orbits, loss))
    };
    let (fa, fb) = (fv(a)?, fv(b)?);
    Ok((fa.distance(&fb), fa.tail_bound.unwrap_or(0.0).max(fb.tail_bound.unwrap_or(0.0))))
}

/// Orbit-space points for each graph, the class clusters they form, and
/// the analytic 2P3/2S3 separation.
pub fn fig4(samples: &[(GraphCode, SampleSet)], orbits: &[OrbitId]) -> Result<Fig4> {
    let points = sorted_by_class(samples)
        .into_par_iter()
        .map(|(code, class, set)| {
            Ok(Fig4Point {
                code,
                class,
                fv: fv_orbits_from_samples(set, orbits)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let spreads = class_spreads(&points);
    let p3_s3_distance = match samples.first() {
        Some((_, set)) => Some(analytic_class_distance(
            IsoClass::TwoP3,
            IsoClass::TwoS3,
            orbits,
            sample_loss(set)?,
            REFERENCE_CUTOFF_PAIRS,
        )?),
        None => None,
    };
    Ok(Fig4 {
        orbits: orbits.to_vec(),
        points,
        spreads,
        p3_s3_distance,
    })
}

/// Default orbit set of the clustering figure.
pub fn fig4_default(samples: &[(GraphCode, SampleSet)]) -> Result<Fig4> {
    fig4(samples, &default_orbits())
}

impl Fig4 {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["code".to_string(), "class".to_string()];
        h.extend(self.orbits.iter().map(|o| format!("orbit{o}")));
        h
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.points
            .iter()
            .map(|p| {
                let mut row = vec![p.code.to_string(), p.class.label().to_string()];
                row.extend(p.fv.values.iter().map(|&v| fmt_sig(v)));
                row
            })
            .collect()
    }

    pub const SPREAD_HEADER: [&'static str; 6] = ["class", "members", "dispersion", "nearest", "nearest_distance", "separated"];

    pub fn spread_rows(&self) -> Vec<Vec<String>> {
        self.spreads
            .iter()
            .map(|s| {
                vec![
                    s.class.label().to_string(),
                    s.members.to_string(),
                    fmt_sig(s.dispersion),
                    s.nearest.label().to_string(),
                    fmt_sig(s.nearest_distance),
                    s.separated.to_string(),
                ]
            })
            .collect()
    }

    /// Projections onto components (0,1) and (0,2), one series per class.
    pub fn plots(&self) -> Vec<Plot> {
        let dims = self.orbits.len();
        let pairs: Vec<(usize, usize)> = [(0, 1), (0, 2)]
            .into_iter()
            .filter(|&(_, j)| j < dims)
            .collect();
        pairs
            .into_iter()
            .map(|(i, j)| {
                let series = self
                    .spreads
                    .iter()
                    .map(|s| Series {
                        name: s.class.label().to_string(),
                        points: self
                            .points
                            .iter()
                            .filter(|p| p.class == s.class)
                            .map(|p| (p.fv.values[i], p.fv.values[j]))
                            .collect(),
                        mark: Mark::Dots,
                    })
                    .collect();
                Plot {
                    title: format!("orbit{} vs orbit{}", self.orbits[j], self.orbits[i]),
                    x_label: format!("P(orbit{})", self.orbits[i]),
                    y_label: format!("P(orbit{})", self.orbits[j]),
                    series,
                    x_categories: Vec::new(),
                    y_rule: None,
                }
            })
            .collect()
    }
}
