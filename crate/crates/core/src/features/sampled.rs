use crate::engine::{PhotonPattern, SampleSet};
use crate::error::{Error, Result};

use super::{EventSpec, FeatureLabel, FeatureVector, OrbitId, Provenance};

pub fn orbit_of(pattern: &PhotonPattern) -> OrbitId {
    let parts: Vec<u16> = pattern.counts().iter().copied().filter(|&c| c > 0).collect();
    OrbitId::new(parts).expect("nonzero counts of 8 modes")
}

/// Total photon count, unless some mode holds more than `n_max`.
pub fn event_of(pattern: &PhotonPattern, n_max: usize) -> Option<usize> {
    (usize::from(pattern.max_count()) <= n_max).then(|| pattern.total())
}

fn frequencies(samples: &SampleSet, labels: Vec<FeatureLabel>, hit: impl Fn(&PhotonPattern, usize) -> bool) -> Result<FeatureVector> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = samples.len() as f64;
    let mut counts = vec![0usize; labels.len()];
    for shot in &samples.shots {
        for (i, c) in counts.iter_mut().enumerate() {
            if hit(shot, i) {
                *c += 1;
            }
        }
    }
    let values: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let errors = values.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect();
    Ok(FeatureVector {
        labels,
        values,
        provenance: Provenance::Sampled,
        loss_eta: samples.meta.loss.unwrap_or(1.0),
        stat_errors: Some(errors),
        tail_bound: None,
        shots: Some(samples.len()),
    })
}

pub fn fv_events_from_samples(samples: &SampleSet, events: &[usize], n_max: usize) -> Result<FeatureVector> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let labels = events
        .iter()
        .map(|&k| FeatureLabel::Event(EventSpec { k, n_max }))
        .collect();
    frequencies(samples, labels, |shot, i| event_of(shot, n_max) == Some(events[i]))
}

pub fn fv_orbits_from_samples(samples: &SampleSet, orbits: &[OrbitId]) -> Result<FeatureVector> {
    let labels = orbits.iter().cloned().map(FeatureLabel::Orbit).collect();
    frequencies(samples, labels, |shot, i| orbit_of(shot) == orbits[i])
}
