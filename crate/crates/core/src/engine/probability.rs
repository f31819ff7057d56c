use crate::embedding::{EmbeddingSpec, SQUEEZING};

use super::pattern::PhotonPattern;
use super::permanent::permanent_repeated;

/// Default truncation of probability tables, in photon pairs.
pub const DEFAULT_CUTOFF_PAIRS: usize = 8;

/// Sampling refuses tables covering less probability mass than this.
pub const MIN_SAMPLING_COVERAGE: f64 = 0.99;

/// `n!` for `n ≤ 20` computed exactly in integers, beyond that as a float
/// product.
pub fn factorial(n: u64) -> f64 {
    if n <= 20 {
        (1..=n).product::<u64>() as f64
    } else {
        (21..=n).fold((1..=20u64).product::<u64>() as f64, |acc, k| acc * k as f64)
    }
}

/// `C(n, k)`, exact in integers while the running product fits.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        match acc.checked_mul(u128::from(n - i)) {
            Some(v) => acc = v / u128::from(i + 1),
            None => {
                return (0..k).fold(1.0, |a, i| a * (n - i) as f64 / (i + 1) as f64);
            }
        }
    }
    acc as f64
}

fn sech2() -> f64 {
    1.0 / SQUEEZING.cosh().powi(2)
}

fn tanh2() -> f64 {
    SQUEEZING.tanh().powi(2)
}

/// Probability that all `rank` squeezed pairs are empty, `sech(1)^(2·rank)`.
pub fn vacuum_probability(rank: usize) -> f64 {
    sech2().powi(rank as i32)
}

/// Probability of exactly `pairs` photon pairs from `rank` independent
/// two-mode squeezers at `r = 1`: a negative binomial law,
/// `C(S+rank−1, S)·sech(1)^(2·rank)·tanh(1)^(2S)`.
pub fn total_photon_distribution(rank: usize, pairs: usize) -> f64 {
    if rank == 0 {
        return if pairs == 0 { 1.0 } else { 0.0 };
    }
    binomial((pairs + rank - 1) as u64, pairs as u64) * vacuum_probability(rank) * tanh2().powi(pairs as i32)
}

/// Mass of the pair-number law strictly above `cutoff_pairs`, summed
/// directly to avoid cancellation in `1 − Σ`.
pub fn pair_tail(rank: usize, cutoff_pairs: usize) -> f64 {
    let mut tail = 0.0;
    let mut s = cutoff_pairs + 1;
    loop {
        let term = total_photon_distribution(rank, s);
        tail += term;
        if term <= tail * 1e-18 || term == 0.0 {
            return tail;
        }
        s += 1;
    }
}

/// Smallest cutoff (not below `floor`) whose covered mass reaches `coverage`.
pub fn min_cutoff_for_coverage(rank: usize, coverage: f64, floor: usize) -> usize {
    let mut cutoff = floor;
    while 1.0 - pair_tail(rank, cutoff) < coverage {
        cutoff += 1;
    }
    cutoff
}

/// Exact probability of a lossless photon-number pattern.
///
/// Unequal signal and idler totals are impossible. Otherwise, with `B` the
/// scaled block, `s` the signal counts and `d` the idler counts,
/// `P = sech(1)^(2·rank) · perm(B[d,s])² / (∏ s! · ∏ d!)`, where `B[d,s]`
/// repeats row `i` `dᵢ` times and column `j` `sⱼ` times.
pub fn pattern_probability(spec: &EmbeddingSpec, pattern: &PhotonPattern) -> f64 {
    if pattern.signal_total() != pattern.idler_total() {
        return 0.0;
    }
    let s = pattern.signal().map(usize::from);
    let d = pattern.idler().map(usize::from);
    // B is symmetric, so the row/column orientation of B[d,s] is immaterial
    let base: Vec<Vec<f64>> = spec.scaled_matrix.iter().map(|r| r.to_vec()).collect();
    let perm = permanent_repeated(&base, &d, &s).expect("4x4 base with matching totals");
    let divisor: f64 = s.iter().chain(&d).map(|&n| factorial(n as u64)).product();
    vacuum_probability(spec.rank) * perm * perm / divisor
}
