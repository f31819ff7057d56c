//! Exact photon-count statistics of embedded graphs, sampling, loss and
//! detector models.

mod pattern;
mod permanent;
mod probability;
mod sample_io;
mod sampling;
mod table;

pub use pattern::PhotonPattern;
pub use permanent::{permanent, permanent_laplace, permanent_repeated, MAX_RYSER_SIZE};
pub use probability::{
    binomial, factorial, min_cutoff_for_coverage, pair_tail, pattern_probability,
    total_photon_distribution, vacuum_probability, DEFAULT_CUTOFF_PAIRS, MIN_SAMPLING_COVERAGE,
};
pub use sample_io::{ingest_samples, meta_path, read_meta, write_samples};
pub use sampling::{
    apply_loss, code_seed, sample, sampling_cutoff, simulate_code, simulate_many, stream_seed, to_threshold,
    LossModel, SampleMeta, SampleSet, SampleSource, SimulateOptions,
};
pub use table::{build_table, ProbabilityTable, MAX_CUTOFF_PAIRS, MAX_TABLE_ENTRIES};
