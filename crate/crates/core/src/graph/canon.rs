use super::adjacency::{bit, Graph8};

/// Lexicographically smallest adjacency matrix over all 8! relabelings.
///
/// Exhaustive: walks every permutation with Heap's algorithm, abandoning a
/// candidate at the first row that already exceeds the best so far.
pub fn canonical_form(graph: &Graph8) -> Graph8 {
    let rows = graph.rows();
    let mut best = rows;
    let mut perm: [usize; 8] = std::array::from_fn(|i| i);
    let mut counters = [0usize; 8];

    consider(&rows, &perm, &mut best);
    let mut i = 1;
    while i < 8 {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            consider(&rows, &perm, &mut best);
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Graph8::from_rows_unchecked(best)
}

#[inline]
fn permuted_row(rows: &[u8; 8], perm: &[usize; 8], i: usize) -> u8 {
    let src = rows[perm[i]];
    let mut out = 0u8;
    for (j, &p) in perm.iter().enumerate() {
        if src & bit(p) != 0 {
            out |= bit(j);
        }
    }
    out
}

fn consider(rows: &[u8; 8], perm: &[usize; 8], best: &mut [u8; 8]) {
    let mut i = 0;
    while i < 8 {
        let r = permuted_row(rows, perm, i);
        if r > best[i] {
            return;
        }
        if r < best[i] {
            best[i] = r;
            for k in i + 1..8 {
                best[k] = permuted_row(rows, perm, k);
            }
            return;
        }
        i += 1;
    }
}

pub fn is_isomorphic(a: &Graph8, b: &Graph8) -> bool {
    if a.edge_count() != b.edge_count() || a.degree_sequence() != b.degree_sequence() {
        return false;
    }
    canonical_form(a) == canonical_form(b)
}
