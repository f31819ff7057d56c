//! Graph codes, bipartite adjacency matrices and isomorphism classes.

mod adjacency;
mod canon;
mod classify;
mod code;

pub use adjacency::{build_adjacency, connected_components, BipartiteAdjacency, Component, Graph8};
pub use canon::{canonical_form, is_isomorphic};
pub use classify::{classify, ComponentKind, ComponentSignature, IsoClass};
pub use code::{GraphCode, SymmetricSubMatrix};
