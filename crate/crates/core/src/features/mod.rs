//! Event and orbit feature vectors, sampled and analytic, and loss
//! matching between the two.

mod analytic;
mod deviation;
mod sampled;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use analytic::{fv_events_analytic, fv_orbits_analytic, orbit_patterns, AnalyticModel, AnalyticReference};
pub use deviation::{default_loss_grid, match_loss, relative_deviation, DeviationCurve, UNDEFINED_BELOW};
pub use sampled::{event_of, fv_events_from_samples, fv_orbits_from_samples, orbit_of};

/// Event totals plotted by default.
pub const DEFAULT_EVENTS: [usize; 4] = [2, 4, 6, 8];

/// Default cap on photons per mode for events.
pub const DEFAULT_N_MAX: usize = 8;

/// Orbits [1,1,1], [1,1,1,1] and [2,1,1].
pub fn default_orbits() -> Vec<OrbitId> {
    [&[1u16, 1, 1][..], &[1, 1, 1, 1], &[2, 1, 1]]
        .into_iter()
        .map(|p| OrbitId::new(p.to_vec()).expect("valid orbit"))
        .collect()
}

/// Patterns with total `k` and no mode above `n_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventSpec {
    pub k: usize,
    pub n_max: usize,
}

/// Photon multiset of a pattern: nonzero counts, nonincreasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct OrbitId(Vec<u16>);

impl OrbitId {
    pub fn new(mut parts: Vec<u16>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::InvalidArgument("orbit parts must be positive".into()));
        }
        if parts.len() > 8 {
            return Err(Error::InvalidArgument(format!(
                "orbit {parts:?} has more than 8 parts"
            )));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(OrbitId(parts))
    }

    pub fn parts(&self) -> &[u16] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|&p| usize::from(p)).sum()
    }
}

impl fmt::Display for OrbitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u16::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl FromStr for OrbitId {
    type Err = Error;

    /// Accepts `2,1,1` or `[2,1,1]`; `[]` is the vacuum orbit.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('[').trim_end_matches(']').trim();
        if inner.is_empty() {
            return Ok(OrbitId::default());
        }
        let parts = inner
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<u16>()
                    .map_err(|_| Error::InvalidArgument(format!("bad orbit part {p:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        OrbitId::new(parts)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FeatureLabel {
    Event(EventSpec),
    Orbit(OrbitId),
}

impl fmt::Display for FeatureLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureLabel::Event(e) => write!(f, "event(k={},n_max={})", e.k, e.n_max),
            FeatureLabel::Orbit(o) => write!(f, "orbit{o}"),
        }
    }
}

impl FromStr for FeatureLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unrecognized feature label {s:?}"));
        if let Some(rest) = s.strip_prefix("orbit") {
            return Ok(FeatureLabel::Orbit(rest.parse()?));
        }
        let body = s
            .strip_prefix("event(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (k, n_max) = body.split_once(',').ok_or_else(bad)?;
        let k = k.strip_prefix("k=").and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        let n_max = n_max
            .strip_prefix("n_max=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(bad)?;
        Ok(FeatureLabel::Event(EventSpec { k, n_max }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Sampled,
    Analytic,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Sampled => "sampled",
            Provenance::Analytic => "analytic",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub labels: Vec<FeatureLabel>,
    pub values: Vec<f64>,
    pub provenance: Provenance,
    /// Transmission η the vector refers to.
    pub loss_eta: f64,
    /// Binomial standard error per component (sampled only).
    pub stat_errors: Option<Vec<f64>>,
    /// Upper bound on the truncation error of every component (analytic only).
    pub tail_bound: Option<f64>,
    pub shots: Option<usize>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn distance(&self, other: &FeatureVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Event specs of every label, or `None` if any label is an orbit.
    pub fn event_specs(&self) -> Option<Vec<EventSpec>> {
        self.labels
            .iter()
            .map(|l| match l {
                FeatureLabel::Event(e) => Some(*e),
                FeatureLabel::Orbit(_) => None,
            })
            .collect()
    }
}
