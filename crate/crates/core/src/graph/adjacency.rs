use std::fmt;

use crate::error::{Error, Result};

use super::classify::ComponentSignature;
use super::code::SymmetricSubMatrix;

/// Simple undirected graph on 8 labelled nodes.
///
/// Row `i` is a byte whose bit `7 - j` is the entry `(i, j)`, so the
/// row-major matrix read as a 64-bit big-endian word orders graphs the same
/// way as lexicographic comparison of their matrices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Graph8 {
    rows: [u8; 8],
}

#[inline]
pub(crate) fn bit(j: usize) -> u8 {
    0x80 >> j
}

impl Graph8 {
    pub const NODES: usize = 8;

    pub fn empty() -> Self {
        Graph8 { rows: [0; 8] }
    }

    /// Validates a 0/1 matrix: symmetric with zero diagonal.
    pub fn from_matrix(m: &[[u8; 8]; 8]) -> Result<Self> {
        let mut rows = [0u8; 8];
        for i in 0..8 {
            if m[i][i] != 0 {
                return Err(Error::InvalidArgument(format!("self-loop at node {i}")));
            }
            for j in 0..8 {
                match m[i][j] {
                    0 => {}
                    1 => rows[i] |= bit(j),
                    v => {
                        return Err(Error::InvalidArgument(format!(
                            "entry ({i},{j}) = {v} is not binary"
                        )))
                    }
                }
                if m[i][j] != m[j][i] {
                    return Err(Error::NotSymmetric {
                        row: i,
                        col: j,
                        gap: 1.0,
                    });
                }
            }
        }
        Ok(Graph8 { rows })
    }

    pub(crate) fn from_rows_unchecked(rows: [u8; 8]) -> Self {
        Graph8 { rows }
    }

    pub fn rows(&self) -> [u8; 8] {
        self.rows
    }

    /// Row-major matrix packed into a word, entry (0,0) most significant.
    pub fn key(&self) -> u64 {
        u64::from_be_bytes(self.rows)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.rows[i] & bit(j) != 0
    }

    pub fn degree(&self, i: usize) -> usize {
        self.rows[i].count_ones() as usize
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum::<usize>() / 2
    }

    pub fn to_matrix(&self) -> [[u8; 8]; 8] {
        std::array::from_fn(|i| std::array::from_fn(|j| u8::from(self.has_edge(i, j))))
    }

    /// Relabel nodes: node `perm[i]` of `self` becomes node `i`.
    pub fn permuted(&self, perm: &[usize; 8]) -> Self {
        let rows = std::array::from_fn(|i| {
            let src = self.rows[perm[i]];
            (0..8).fold(0u8, |acc, j| {
                if src & bit(perm[j]) != 0 {
                    acc | bit(j)
                } else {
                    acc
                }
            })
        });
        Graph8 { rows }
    }

    /// Degree sequence sorted in nonincreasing order.
    pub fn degree_sequence(&self) -> [usize; 8] {
        let mut d: [usize; 8] = std::array::from_fn(|i| self.degree(i));
        d.sort_unstable_by(|a, b| b.cmp(a));
        d
    }
}

impl fmt::Debug for Graph8 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Graph8[")?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{r:08b}")?;
        }
        f.write_str("]")
    }
}

/// Adjacency of the 8-node bipartite graph induced by a signal/idler block.
///
/// Nodes 0..4 are signal modes, 4..8 idler modes, and the edge `(i, 4 + j)`
/// exists iff `M[i][j] = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BipartiteAdjacency {
    block: SymmetricSubMatrix,
    graph: Graph8,
}

impl BipartiteAdjacency {
    pub fn block(&self) -> &SymmetricSubMatrix {
        &self.block
    }

    pub fn graph(&self) -> &Graph8 {
        &self.graph
    }

    pub fn to_matrix(&self) -> [[u8; 8]; 8] {
        self.graph.to_matrix()
    }
}

impl std::ops::Deref for BipartiteAdjacency {
    type Target = Graph8;

    fn deref(&self) -> &Graph8 {
        &self.graph
    }
}

pub fn build_adjacency(block: &SymmetricSubMatrix) -> BipartiteAdjacency {
    let mut rows = [0u8; 8];
    for i in 0..4 {
        for j in 0..4 {
            if block.get(i, j) == 1 {
                rows[i] |= bit(4 + j);
                rows[4 + j] |= bit(i);
            }
        }
    }
    BipartiteAdjacency {
        block: *block,
        graph: Graph8 { rows },
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    /// Ascending node labels.
    pub nodes: Vec<usize>,
    pub signature: ComponentSignature,
}

/// Maximal connected node sets, ordered by their smallest node. Isolated
/// nodes come back as single-node components.
pub fn connected_components(graph: &Graph8) -> Vec<Component> {
    let mut seen = 0u8;
    let mut out = Vec::new();
    for start in 0..8 {
        if seen & bit(start) != 0 {
            continue;
        }
        let mut members = bit(start);
        let mut frontier = bit(start);
        while frontier != 0 {
            let mut next = 0u8;
            for v in 0..8 {
                if frontier & bit(v) != 0 {
                    next |= graph.rows[v];
                }
            }
            frontier = next & !members;
            members |= next;
        }
        seen |= members;
        let nodes: Vec<usize> = (0..8).filter(|&v| members & bit(v) != 0).collect();
        let mut degrees: Vec<usize> = nodes.iter().map(|&v| graph.degree(v)).collect();
        degrees.sort_unstable_by(|a, b| b.cmp(a));
        let signature = ComponentSignature::new(degrees);
        out.push(Component { nodes, signature });
    }
    out
}
