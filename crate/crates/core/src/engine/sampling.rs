use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::make_embedding;
use crate::error::{Error, Result};
use crate::graph::GraphCode;

use super::pattern::PhotonPattern;
use super::probability::{min_cutoff_for_coverage, MIN_SAMPLING_COVERAGE};
use super::table::{build_table, ProbabilityTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleSource {
    Simulated,
    Ingested,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub code: Option<GraphCode>,
    pub source: SampleSource,
    pub seed: Option<u64>,
    /// Transmission η applied after sampling, if any.
    pub loss: Option<f64>,
    pub threshold: bool,
    pub shots: usize,
    /// Pair cutoff of the truncated law the shots were drawn from.
    pub cutoff_pairs: Option<usize>,
    pub covered_mass: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub shots: Vec<PhotonPattern>,
    pub meta: SampleMeta,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.shots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shots.is_empty()
    }
}

/// Per-photon transmission probability η; the loss factor is `1 − η`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossModel {
    eta: f64,
}

impl LossModel {
    pub fn lossless() -> Self {
        LossModel { eta: 1.0 }
    }

    pub fn from_transmission(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidArgument(format!(
                "transmission must lie in [0, 1], got {eta}"
            )));
        }
        Ok(LossModel { eta })
    }

    pub fn from_loss_factor(loss: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&loss) {
            return Err(Error::InvalidArgument(format!(
                "loss factor must lie in [0, 1], got {loss}"
            )));
        }
        Ok(LossModel { eta: 1.0 - loss })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn loss_factor(&self) -> f64 {
        1.0 - self.eta
    }

    pub fn is_lossless(&self) -> bool {
        self.eta == 1.0
    }
}

/// Independent stream for `stream` under a base seed.
///
/// Parallel per-code work uses `stream = code value`; a ChaCha8 generator
/// seeded with `seed_from_u64(base)` is moved to that stream, so results do
/// not depend on scheduling.
pub fn stream_seed(base: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(stream);
    rng
}

/// Draw `shots` patterns from the table, renormalized by its covered mass.
///
/// Inverse-CDF over the table's fixed entry order with a ChaCha8 generator
/// seeded by `seed_from_u64(seed)`; the same table and seed give the same
/// shots on every platform.
pub fn sample(table: &ProbabilityTable, shots: usize, seed: u64) -> Result<SampleSet> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    if table.covered_mass() < MIN_SAMPLING_COVERAGE {
        return Err(Error::InvalidArgument(format!(
            "table covers only {:.6} of the probability mass at {} pairs (need {MIN_SAMPLING_COVERAGE}); raise the cutoff",
            table.covered_mass(),
            table.cutoff_pairs()
        )));
    }
    let weights = table.entries().iter().map(|(_, p)| *p);
    let dist = WeightedIndex::new(weights)
        .map_err(|e| Error::InvalidArgument(format!("table weights: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = table.entries();
    let shots = (0..shots).map(|_| entries[dist.sample(&mut rng)].0).collect::<Vec<_>>();
    Ok(SampleSet {
        meta: SampleMeta {
            code: Some(table.spec().code),
            source: SampleSource::Simulated,
            seed: Some(seed),
            loss: None,
            threshold: false,
            shots: shots.len(),
            cutoff_pairs: Some(table.cutoff_pairs()),
            covered_mass: Some(table.covered_mass()),
        },
        shots,
    })
}

/// Binomial thinning: every photon independently survives with probability η.
pub fn apply_loss(samples: &SampleSet, loss: LossModel, seed: u64) -> Result<SampleSet> {
    if samples.meta.threshold {
        return Err(Error::InvalidArgument(
            "loss must be applied before threshold conversion".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eta = loss.eta();
    let shots = samples
        .shots
        .iter()
        .map(|p| {
            PhotonPattern(p.0.map(|n| {
                if n == 0 || eta == 1.0 {
                    n
                } else {
                    let kept = Binomial::new(u64::from(n), eta)
                        .expect("eta validated by LossModel")
                        .sample(&mut rng);
                    kept as u16
                }
            }))
        })
        .collect();
    let mut meta = samples.meta.clone();
    meta.loss = Some(meta.loss.unwrap_or(1.0) * eta);
    Ok(SampleSet { shots, meta })
}

/// Click detection: every count clamped to at most 1.
pub fn to_threshold(samples: &SampleSet) -> SampleSet {
    let shots = samples
        .shots
        .iter()
        .map(|p| PhotonPattern(p.0.map(|n| n.min(1))))
        .collect();
    let mut meta = samples.meta.clone();
    meta.threshold = true;
    SampleSet { shots, meta }
}

/// Everything `simulate_code` needs besides the graph.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulateOptions {
    pub shots: usize,
    pub seed: u64,
    pub loss: LossModel,
    pub threshold: bool,
    /// Raised as needed to reach the sampling coverage.
    pub cutoff_pairs: usize,
}

/// Cutoff actually used for sampling a rank-`rank` graph.
pub fn sampling_cutoff(rank: usize, requested: usize) -> usize {
    min_cutoff_for_coverage(rank, MIN_SAMPLING_COVERAGE, requested)
}

/// Per-code seed under a base seed.
pub fn code_seed(base: u64, code: GraphCode) -> u64 {
    stream_seed(base, u64::from(code.value())).next_u64()
}

/// Build the table, sample, then thin with seed `seed + 1` and clamp to
/// clicks if asked.
pub fn simulate_code(code: GraphCode, opts: &SimulateOptions) -> Result<SampleSet> {
    let spec = make_embedding(code)?;
    let cutoff = sampling_cutoff(spec.rank, opts.cutoff_pairs);
    let table = build_table(&spec, cutoff)?;
    let mut set = sample(&table, opts.shots, opts.seed)?;
    if !opts.loss.is_lossless() {
        set = apply_loss(&set, opts.loss, opts.seed.wrapping_add(1))?;
    }
    if opts.threshold {
        set = to_threshold(&set);
    }
    Ok(set)
}

/// `simulate_code` for each code in parallel, each under its own
/// `code_seed` of `opts.seed`. Results keep the input order.
pub fn simulate_many(codes: &[GraphCode], opts: &SimulateOptions) -> Result<Vec<(GraphCode, SampleSet)>> {
    codes
        .par_iter()
        .map(|&code| {
            let per_code = SimulateOptions {
                seed: code_seed(opts.seed, code),
                ..*opts
            };
            Ok((code, simulate_code(code, &per_code)?))
        })
        .collect()
}
