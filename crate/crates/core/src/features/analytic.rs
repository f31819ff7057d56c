use std::sync::OnceLock;

use crate::embedding::EmbeddingSpec;
use crate::engine::{
    binomial, build_table, pair_tail, total_photon_distribution, LossModel, PhotonPattern,
    ProbabilityTable, SampleMeta,
};
use crate::error::Result;

use super::{EventSpec, FeatureLabel, FeatureVector, OrbitId, Provenance};

/// Pair-number sums stop once the remaining mass falls below this.
const EXACT_TAIL: f64 = 1e-16;

/// Which law analytic values describe.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnalyticReference {
    /// The untruncated state. Closed forms are summed to convergence;
    /// table-based values miss the mass above the cutoff, reported as the
    /// tail bound.
    Exact,
    /// The law conditioned on at most `cutoff_pairs` pairs, which is what
    /// the table sampler draws from.
    Conditioned,
}

/// Analytic feature vectors of one embedded graph.
///
/// The probability table is built on first use.
#[derive(Debug)]
pub struct AnalyticModel {
    spec: EmbeddingSpec,
    cutoff_pairs: usize,
    reference: AnalyticReference,
    table: OnceLock<ProbabilityTable>,
}

impl AnalyticModel {
    pub fn new(spec: EmbeddingSpec, cutoff_pairs: usize, reference: AnalyticReference) -> Result<Self> {
        // validates the cutoff up front
        if cutoff_pairs == 0 || cutoff_pairs > crate::engine::MAX_CUTOFF_PAIRS {
            build_table(&spec, cutoff_pairs)?;
        }
        Ok(AnalyticModel {
            spec,
            cutoff_pairs,
            reference,
            table: OnceLock::new(),
        })
    }

    pub fn from_table(table: ProbabilityTable, reference: AnalyticReference) -> Self {
        let model = AnalyticModel {
            spec: table.spec().clone(),
            cutoff_pairs: table.cutoff_pairs(),
            reference,
            table: OnceLock::new(),
        };
        let _ = model.table.set(table);
        model
    }

    /// The reference matching a sample set: conditioned on the cutoff the
    /// shots were simulated with, exact for ingested data.
    pub fn for_samples(spec: EmbeddingSpec, meta: &SampleMeta, default_cutoff: usize) -> Result<Self> {
        match meta.cutoff_pairs {
            Some(cut) => AnalyticModel::new(spec, cut, AnalyticReference::Conditioned),
            None => AnalyticModel::new(spec, default_cutoff, AnalyticReference::Exact),
        }
    }

    pub fn spec(&self) -> &EmbeddingSpec {
        &self.spec
    }

    pub fn cutoff_pairs(&self) -> usize {
        self.cutoff_pairs
    }

    pub fn reference(&self) -> AnalyticReference {
        self.reference
    }

    pub fn table(&self) -> &ProbabilityTable {
        self.table
            .get_or_init(|| build_table(&self.spec, self.cutoff_pairs).expect("cutoff validated in constructor"))
    }

    fn covered_mass(&self) -> f64 {
        1.0 - pair_tail(self.spec.rank, self.cutoff_pairs)
    }

    /// Pair-number law the closed forms sum over, plus the mass left out.
    fn pair_law(&self) -> (Vec<f64>, f64) {
        let rank = self.spec.rank;
        match self.reference {
            AnalyticReference::Conditioned => {
                let covered = self.covered_mass();
                let law = (0..=self.cutoff_pairs)
                    .map(|s| total_photon_distribution(rank, s) / covered)
                    .collect();
                (law, 0.0)
            }
            AnalyticReference::Exact => {
                let mut law = Vec::new();
                let mut s = 0;
                loop {
                    law.push(total_photon_distribution(rank, s));
                    let tail = pair_tail(rank, s);
                    if s >= self.cutoff_pairs && tail < EXACT_TAIL {
                        return (law, tail);
                    }
                    s += 1;
                }
            }
        }
    }

    /// Normalization and error bound for sums over table entries.
    fn table_scale(&self) -> (f64, f64) {
        match self.reference {
            AnalyticReference::Conditioned => (1.0 / self.table().covered_mass(), 0.0),
            AnalyticReference::Exact => (1.0, self.table().analytic_tail()),
        }
    }

    pub fn events(&self, events: &[usize], n_max: usize, loss: LossModel) -> FeatureVector {
        let eta = loss.eta();
        let (law, law_tail) = self.pair_law();
        let mut tail_bound: f64 = 0.0;
        let values = events
            .iter()
            .map(|&k| {
                if n_max >= k {
                    tail_bound = tail_bound.max(law_tail);
                    thinned_total(&law, k, eta)
                } else {
                    let (scale, tail) = self.table_scale();
                    tail_bound = tail_bound.max(tail);
                    scale * capped_event_from_table(self.table(), k, n_max, eta)
                }
            })
            .collect();
        FeatureVector {
            labels: events
                .iter()
                .map(|&k| FeatureLabel::Event(EventSpec { k, n_max }))
                .collect(),
            values,
            provenance: Provenance::Analytic,
            loss_eta: eta,
            stat_errors: None,
            tail_bound: Some(tail_bound),
            shots: None,
        }
    }

    pub fn orbits(&self, orbits: &[OrbitId], loss: LossModel) -> FeatureVector {
        let eta = loss.eta();
        let table = self.table();
        let (scale, tail) = self.table_scale();
        let pmf = ThinningPmf::new(2 * self.cutoff_pairs, eta);
        let values = orbits
            .iter()
            .map(|orbit| {
                let targets = orbit_patterns(orbit);
                let raw = if loss.is_lossless() {
                    targets.iter().map(|p| table.probability(p)).sum()
                } else {
                    table
                        .entries()
                        .iter()
                        .map(|(ideal, p)| {
                            let reach: f64 = targets.iter().map(|d| pmf.pattern(ideal, d)).sum();
                            p * reach
                        })
                        .sum::<f64>()
                };
                scale * raw
            })
            .collect();
        FeatureVector {
            labels: orbits.iter().cloned().map(FeatureLabel::Orbit).collect(),
            values,
            provenance: Provenance::Analytic,
            loss_eta: eta,
            stat_errors: None,
            tail_bound: Some(tail),
            shots: None,
        }
    }
}

/// `Σ_S law[S] · C(2S, k) η^k (1−η)^{2S−k}`.
fn thinned_total(law: &[f64], k: usize, eta: f64) -> f64 {
    law.iter()
        .enumerate()
        .filter(|&(s, _)| 2 * s >= k)
        .map(|(s, p)| {
            let t = 2 * s;
            p * binomial(t as u64, k as u64) * eta.powi(k as i32) * (1.0 - eta).powi((t - k) as i32)
        })
        .sum()
}

/// Binomial survival probabilities `C(t,d) η^d (1−η)^{t−d}` for `t ≤ max`.
struct ThinningPmf {
    rows: Vec<Vec<f64>>,
}

impl ThinningPmf {
    fn new(max: usize, eta: f64) -> Self {
        let rows = (0..=max)
            .map(|t| {
                (0..=t)
                    .map(|d| {
                        binomial(t as u64, d as u64) * eta.powi(d as i32) * (1.0 - eta).powi((t - d) as i32)
                    })
                    .collect()
            })
            .collect();
        ThinningPmf { rows }
    }

    fn get(&self, t: u16, d: u16) -> f64 {
        if d > t {
            0.0
        } else {
            self.rows[usize::from(t)][usize::from(d)]
        }
    }

    /// Probability that thinning `ideal` leaves exactly `detected`.
    fn pattern(&self, ideal: &PhotonPattern, detected: &PhotonPattern) -> f64 {
        let mut p = 1.0;
        for (&t, &d) in ideal.counts().iter().zip(detected.counts()) {
            p *= self.get(t, d);
            if p == 0.0 {
                break;
            }
        }
        p
    }
}

/// Probability that thinned counts total `k` with no mode above `n_max`,
/// summed over the table.
fn capped_event_from_table(table: &ProbabilityTable, k: usize, n_max: usize, eta: f64) -> f64 {
    let pmf = ThinningPmf::new(2 * table.cutoff_pairs(), eta);
    let mut total = 0.0;
    let mut dist = vec![0.0; k + 1];
    let mut next = vec![0.0; k + 1];
    for (ideal, p) in table.entries() {
        if ideal.total() < k {
            continue;
        }
        dist.fill(0.0);
        dist[0] = 1.0;
        for &t in ideal.counts() {
            next.fill(0.0);
            for (acc, &w) in dist.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                for d in 0..=usize::from(t).min(n_max).min(k - acc) {
                    next[acc + d] += w * pmf.get(t, d as u16);
                }
            }
            std::mem::swap(&mut dist, &mut next);
        }
        total += p * dist[k];
    }
    total
}

/// Every arrangement of the orbit's parts over the 8 modes, ascending.
pub fn orbit_patterns(orbit: &OrbitId) -> Vec<PhotonPattern> {
    let mut counts = [0u16; 8];
    for (slot, &p) in counts.iter_mut().zip(orbit.parts()) {
        *slot = p;
    }
    counts.sort_unstable();
    let mut out = vec![PhotonPattern(counts)];
    while next_permutation(&mut counts) {
        out.push(PhotonPattern(counts));
    }
    out
}

fn next_permutation(a: &mut [u16; 8]) -> bool {
    let Some(i) = (0..7).rev().find(|&i| a[i] < a[i + 1]) else {
        return false;
    };
    let j = (i + 1..8).rev().find(|&j| a[j] > a[i]).expect("a[i+1] > a[i]");
    a.swap(i, j);
    a[i + 1..].reverse();
    true
}

/// Event feature vector with the default cutoff and the exact reference.
pub fn fv_events_analytic(spec: &EmbeddingSpec, events: &[usize], n_max: usize, loss: LossModel, cutoff_pairs: usize) -> Result<FeatureVector> {
    Ok(AnalyticModel::new(spec.clone(), cutoff_pairs, AnalyticReference::Exact)?.events(events, n_max, loss))
}

pub fn fv_orbits_analytic(spec: &EmbeddingSpec, orbits: &[OrbitId], loss: LossModel, cutoff_pairs: usize) -> Result<FeatureVector> {
    Ok(AnalyticModel::new(spec.clone(), cutoff_pairs, AnalyticReference::Exact)?.orbits(orbits, loss))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::make_embedding;

    const SECH2: f64 = 0.419_974_341_614_026_1;

    fn spec(code: &str) -> EmbeddingSpec {
        make_embedding(code.parse().unwrap()).unwrap()
    }

    fn eta(x: f64) -> LossModel {
        LossModel::from_transmission(x).unwrap()
    }

    #[test]
    fn orbit_pattern_counts() {
        let n = |s: &str| orbit_patterns(&s.parse().unwrap()).len();
        assert_eq!(n("[]"), 1);
        assert_eq!(n("1,1"), 28);
        assert_eq!(n("1,1,1,1"), 70);
        assert_eq!(n("2,1,1"), 168);
        assert_eq!(n("2,2"), 28);
        let pats = orbit_patterns(&"3,1".parse().unwrap());
        assert_eq!(pats.len(), 56);
        assert!(pats.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn event_closed_forms() {
        let k44 = spec("1111111111");
        let fv = fv_events_analytic(&k44, &[0, 1, 2, 3], 8, LossModel::lossless(), 8).unwrap();
        assert!((fv.values[0] - SECH2).abs() < 1e-14);
        assert_eq!(fv.values[1], 0.0);
        assert!((fv.values[2] - SECH2 * 1f64.tanh().powi(2)).abs() < 1e-14);
        assert_eq!(fv.values[3], 0.0);
        assert!(fv.tail_bound.unwrap() < 1e-15);

        let dark = fv_events_analytic(&k44, &[0, 2, 4], 8, eta(0.0), 8).unwrap();
        assert!((dark.values[0] - 1.0).abs() < 1e-14);
        assert_eq!(&dark.values[1..], &[0.0, 0.0]);
    }

    #[test]
    fn capped_events_use_the_table() {
        // with n_max = 1 on a single edge, only one photon per mode: k = 2 is
        // the single-pair pattern, k = 4 is impossible
        let k2 = spec("0000000100");
        let model = AnalyticModel::new(k2, 8, AnalyticReference::Exact).unwrap();
        let fv = model.events(&[2, 4], 1, LossModel::lossless());
        assert!((fv.values[0] - SECH2 * 1f64.tanh().powi(2)).abs() < 1e-14);
        assert_eq!(fv.values[1], 0.0);
        // capped and closed form agree where the cap does not bind
        let k44 = AnalyticModel::new(spec("1111111111"), 8, AnalyticReference::Conditioned).unwrap();
        let lossy = eta(0.6);
        let capped = k44.events(&[3], 2, lossy).values[0];
        let open = k44.events(&[3], 8, lossy).values[0];
        assert!(capped < open);
        let capped_big = k44.events(&[3], 3, lossy).values[0];
        assert!((capped_big - open).abs() < 1e-12);
    }

    #[test]
    fn orbit_examples() {
        let k2 = spec("0000000100");
        let fv = fv_orbits_analytic(
            &k2,
            &["1,1".parse().unwrap(), "1,1,1".parse().unwrap(), "[]".parse().unwrap()],
            LossModel::lossless(),
            8,
        )
        .unwrap();
        assert!((fv.values[0] - SECH2 * 1f64.tanh().powi(2)).abs() < 1e-14);
        assert_eq!(fv.values[1], 0.0);
        assert!((fv.values[2] - SECH2).abs() < 1e-14);
    }

    #[test]
    fn lossy_orbits_match_lossy_events_for_single_edge() {
        // one edge: every detected pattern lives on modes 2 and 6, so orbit
        // [1] is the whole k = 1 event
        let model = AnalyticModel::new(spec("0000000100"), 8, AnalyticReference::Conditioned).unwrap();
        let loss = eta(0.55);
        let orbit = model.orbits(&["1".parse().unwrap()], loss).values[0];
        let event = model.events(&[1], 8, loss).values[0];
        assert!((orbit - event).abs() < 1e-12);
    }

    #[test]
    fn conditioned_law_sums_to_one() {
        let model = AnalyticModel::new(spec("0110000000"), 11, AnalyticReference::Conditioned).unwrap();
        let ks: Vec<usize> = (0..=22).collect();
        let fv = model.events(&ks, 22, eta(0.7));
        assert!((fv.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
