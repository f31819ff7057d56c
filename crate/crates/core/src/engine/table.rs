use std::collections::HashMap;

use rayon::prelude::*;

use crate::embedding::EmbeddingSpec;
use crate::error::{Error, Result};

use super::pattern::PhotonPattern;
use super::probability::{binomial, factorial, pair_tail, vacuum_probability, MIN_SAMPLING_COVERAGE};

/// Integer coefficients stay below 4^S, so u64 is exact up to 31 pairs.
pub const MAX_CUTOFF_PAIRS: usize = 31;

/// Upper limit on the patterns a table may have to hold.
pub const MAX_TABLE_ENTRIES: u64 = 12_000_000;

/// Every lossless pattern with at most `cutoff_pairs` photon pairs and
/// nonzero probability, in a fixed order: pair count, then signal counts,
/// then idler counts, each ascending.
#[derive(Clone, Debug)]
pub struct ProbabilityTable {
    spec: EmbeddingSpec,
    cutoff_pairs: usize,
    entries: Vec<(PhotonPattern, f64)>,
    index: HashMap<PhotonPattern, usize>,
    covered_mass: f64,
}

impl ProbabilityTable {
    pub fn spec(&self) -> &EmbeddingSpec {
        &self.spec
    }

    pub fn cutoff_pairs(&self) -> usize {
        self.cutoff_pairs
    }

    pub fn entries(&self) -> &[(PhotonPattern, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of all entries.
    pub fn covered_mass(&self) -> f64 {
        self.covered_mass
    }

    /// Analytic probability of more than `cutoff_pairs` pairs.
    pub fn analytic_tail(&self) -> f64 {
        pair_tail(self.spec.rank, self.cutoff_pairs)
    }

    /// Set when too little mass is covered to sample from the table.
    pub fn low_coverage(&self) -> bool {
        self.covered_mass < MIN_SAMPLING_COVERAGE
    }

    /// Zero for patterns absent from the table.
    pub fn probability(&self, pattern: &PhotonPattern) -> f64 {
        self.index.get(pattern).map_or(0.0, |&i| self.entries[i].1)
    }

    /// Sum of entries with exactly `pairs` photon pairs.
    pub fn pair_slice_mass(&self, pairs: usize) -> f64 {
        self.entries
            .iter()
            .filter(|(p, _)| p.signal_total() == pairs)
            .map(|(_, v)| v)
            .sum()
    }
}

/// Weak compositions of `total` into 4 parts, ascending lexicographically.
fn compositions(total: usize) -> Vec<[u16; 4]> {
    let mut out = Vec::new();
    for a in 0..=total {
        for b in 0..=total - a {
            for c in 0..=total - a - b {
                out.push([a, b, c, total - a - b - c].map(|x| x as u16));
            }
        }
    }
    out
}

/// Patterns supported on the nonzero rows and columns of the block, summed
/// over pair levels.
fn entry_bound(block: &[[u8; 4]; 4], cutoff_pairs: usize) -> u64 {
    let rows = block.iter().filter(|r| r.iter().any(|&x| x != 0)).count() as u64;
    let cols = (0..4).filter(|&j| block.iter().any(|r| r[j] != 0)).count() as u64;
    let ways = |parts: u64, total: u64| binomial(total + parts.max(1) - 1, parts.max(1) - 1) as u64;
    (0..=cutoff_pairs as u64)
        .map(|s| ways(rows, s).saturating_mul(ways(cols, s)))
        .fold(0u64, u64::saturating_add)
}

/// Enumerate the table through generating polynomials.
///
/// For signal counts `s`, the polynomial `∏_j (Σ_i M_ij x_i)^{s_j}` over idler
/// variables has coefficient `perm(M[d,s]) / ∏ d!` on `x^d`. One polynomial
/// per signal pattern therefore yields every idler pattern at once, and each
/// is one linear-factor multiplication away from a polynomial of the
/// previous pair level. Coefficients are exact integers of the binary block;
/// the scale factor enters as `c^{2S}`.
pub fn build_table(spec: &EmbeddingSpec, cutoff_pairs: usize) -> Result<ProbabilityTable> {
    if cutoff_pairs == 0 || cutoff_pairs > MAX_CUTOFF_PAIRS {
        return Err(Error::InvalidArgument(format!(
            "cutoff_pairs must be in 1..={MAX_CUTOFF_PAIRS}, got {cutoff_pairs}"
        )));
    }
    let block = spec.block.entries();
    let bound = entry_bound(block, cutoff_pairs);
    if bound > MAX_TABLE_ENTRIES {
        return Err(Error::InvalidArgument(format!(
            "cutoff_pairs {cutoff_pairs} is too large for graph {}: up to {bound} patterns, limit {MAX_TABLE_ENTRIES}",
            spec.code
        )));
    }
    let vacuum = vacuum_probability(spec.rank);
    let c2 = spec.scale_c * spec.scale_c;

    // level S: signal pattern -> dense coefficients over compositions(S)
    let mut prev_comps = compositions(0);
    let mut prev_polys: HashMap<[u16; 4], Vec<u64>> = HashMap::from([([0; 4], vec![1u64])]);

    let mut entries = vec![(PhotonPattern::vacuum(), vacuum)];
    for pairs in 1..=cutoff_pairs {
        let comps = compositions(pairs);
        let index: HashMap<[u16; 4], usize> = comps.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        // where x_i · x^d lands, for every d of the previous level
        let shift: Vec<[usize; 4]> = prev_comps
            .iter()
            .map(|d| {
                std::array::from_fn(|i| {
                    let mut e = *d;
                    e[i] += 1;
                    index[&e]
                })
            })
            .collect();

        let level: Vec<([u16; 4], Vec<u64>)> = comps
            .par_iter()
            .map(|&s| {
                let j = s.iter().position(|&x| x > 0).expect("nonzero composition");
                let mut parent = s;
                parent[j] -= 1;
                let src = &prev_polys[&parent];
                let mut poly = vec![0u64; comps.len()];
                for (k, &coef) in src.iter().enumerate() {
                    if coef == 0 {
                        continue;
                    }
                    for i in 0..4 {
                        if block[j][i] != 0 {
                            poly[shift[k][i]] += coef;
                        }
                    }
                }
                (s, poly)
            })
            .collect();

        let scale = vacuum * c2.powi(pairs as i32);
        for (s, poly) in &level {
            let s_fact: f64 = s.iter().map(|&n| factorial(u64::from(n))).product();
            for (d, &coef) in comps.iter().zip(poly) {
                if coef == 0 {
                    continue;
                }
                let d_fact: f64 = d.iter().map(|&n| factorial(u64::from(n))).product();
                let coef = coef as f64;
                let p = scale * d_fact * coef * coef / s_fact;
                entries.push((PhotonPattern::from_halves(*s, *d), p));
            }
        }

        prev_comps = comps;
        prev_polys = level.into_iter().collect();
    }

    let covered_mass = entries.iter().map(|(_, p)| p).sum();
    let index = entries.iter().enumerate().map(|(i, (p, _))| (*p, i)).collect();
    Ok(ProbabilityTable {
        spec: spec.clone(),
        cutoff_pairs,
        entries,
        index,
        covered_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::make_embedding;
    use crate::engine::{pattern_probability, total_photon_distribution};

    fn spec(code: &str) -> EmbeddingSpec {
        make_embedding(code.parse().unwrap()).unwrap()
    }

    #[test]
    fn oversized_tables_are_refused() {
        assert!(build_table(&spec("1111111111"), 21).is_err());
        assert_eq!(entry_bound(spec("1111111111").block.entries(), 20), 11_480_634);
        // one edge: a single pattern per level
        assert_eq!(entry_bound(spec("0000000100").block.entries(), 31), 32);
        assert!(build_table(&spec("0000000100"), 31).is_ok());
    }

    #[test]
    fn compositions_count() {
        for n in 0..10 {
            let c = compositions(n);
            assert_eq!(c.len(), (n + 1) * (n + 2) * (n + 3) / 6);
            assert!(c.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn single_edge_table_lives_on_modes_2_and_6() {
        let table = build_table(&spec("0000000100"), 8).unwrap();
        assert_eq!(table.len(), 9);
        for (p, _) in table.entries() {
            for (m, &c) in p.counts().iter().enumerate() {
                if m != 2 && m != 6 {
                    assert_eq!(c, 0);
                }
            }
        }
        let expected = 1.0 - 1f64.tanh().powi(18);
        assert!((table.covered_mass() - expected).abs() < 1e-12);
        assert!((table.covered_mass() - 0.992_575).abs() < 1e-5);
        assert!(!table.low_coverage());
    }

    #[test]
    fn slices_follow_pair_number_law() {
        let table = build_table(&spec("1111111111"), 6).unwrap();
        for s in 0..=6 {
            assert!((table.pair_slice_mass(s) - total_photon_distribution(1, s)).abs() < 1e-9);
        }
        assert!((table.covered_mass() + table.analytic_tail() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn entries_agree_with_permanent_route() {
        for code in ["1111111111", "0110000000", "0111000000", "1011000111", "1000100010"] {
            let spec = spec(code);
            let table = build_table(&spec, 5).unwrap();
            for (p, v) in table.entries() {
                let direct = pattern_probability(&spec, p);
                assert!((v - direct).abs() <= 1e-12 * v.max(1e-300) + 1e-15, "{code} {p}: {v} vs {direct}");
            }
        }
    }

    #[test]
    fn low_cutoff_sets_warning() {
        let table = build_table(&spec("1000100010"), 8).unwrap();
        assert!(table.low_coverage());
        assert!(build_table(&spec("1000100010"), 0).is_err());
        assert!(build_table(&spec("1000100010"), 32).is_err());
    }
}
