//! Classical simulation of Gaussian boson sampling on the 8-mode bipartite
//! device model: 4 signal modes (0..4) are two-mode squeezed against
//! 4 idler modes (4..8).
//!
//! The pipeline runs
//! [`GraphCode`] → [`SymmetricSubMatrix`] → [`BipartiteAdjacency`]
//! → [`EmbeddingSpec`] → [`ProbabilityTable`] → [`SampleSet`]
//! → [`FeatureVector`].

pub mod embedding;
pub mod engine;
mod error;
pub mod features;
pub mod graph;
pub mod io;
pub mod report;

pub use embedding::{
    enumerate_embeddable, make_embedding, mean_photon_total, symmetric_eigendecomposition,
    Embeddability, EigenDecomposition, EmbeddingSpec, M0,
};
pub use engine::{
    apply_loss, build_table, pattern_probability, permanent, sample, to_threshold,
    total_photon_distribution, LossModel, PhotonPattern, ProbabilityTable, SampleMeta, SampleSet,
    SampleSource,
};
pub use error::{Error, Result};

pub use graph::{
    canonical_form, classify, connected_components, is_isomorphic, BipartiteAdjacency,
    ComponentSignature, Graph8, GraphCode, IsoClass, SymmetricSubMatrix,
};
pub use features::{
    AnalyticModel, AnalyticReference, DeviationCurve, EventSpec, FeatureLabel, FeatureVector,
    OrbitId, Provenance,
};
