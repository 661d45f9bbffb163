//! Conventional one-dimensional CSE over column super-symbols, measured but
//! never emitted.
//!
//! Each column of an `m x n` binary block becomes one symbol of an alphabet
//! of size `2^m`, and the block is read as a circular string of length `n`.
//! Lengths are ideal (fractional) bit counts.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::codec::{bits::elias_len, rank_bits, stats, CodewordStats};
use crate::error::{CseError, Result};
use crate::grid::Block;

pub const DEFAULT_M_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineStats {
    pub m: usize,
    pub n: usize,
    /// Super-symbol alphabet size `2^m`.
    pub alphabet: u64,
    pub elias_bits: u64,
    /// Single super-symbol counts, each at `log2 n`.
    pub singles: u64,
    pub singles_bits: f64,
    /// Multi-column counts with `2 <= width <= floor(log2 log2 n)`.
    pub mid: u64,
    pub mid_bits: f64,
    /// Remaining multi-column counts.
    pub long: u64,
    pub long_bits: f64,
    pub rank_bits: u64,
    pub total_bits: f64,
    pub bits_per_symbol: f64,
    /// Set when `n` is too small for the middle regime to contain any width.
    pub mid_regime_empty: bool,
}

impl BaselineStats {
    pub fn transmitted(&self) -> u64 {
        self.singles + self.mid + self.long
    }
}

/// Column codes with the top row as most significant bit.
fn super_symbols(p: &Block) -> Vec<u32> {
    (0..p.width()).map(|j| (0..p.height()).fold(0, |acc, i| acc << 1 | p.get(i, j) as u32)).collect()
}

/// Counts of every circular substring of length `len`.
fn substring_counts(x: &[u32], len: usize) -> HashMap<Vec<u32>, u32> {
    let n = x.len();
    let mut counts = HashMap::new();
    for i in 0..n {
        let s: Vec<u32> = (0..len).map(|d| x[(i + d) % n]).collect();
        *counts.entry(s).or_insert(0) += 1;
    }
    counts
}

fn mid_limit(n: usize) -> usize {
    if n < 2 {
        return 0;
    }
    (n as f64).log2().log2().floor().max(0.0) as usize
}

/// Ideal codeword length of conventional CSE on `p`'s column sequence.
pub fn conv_lengths(p: &Block, m_cap: usize) -> Result<BaselineStats> {
    let (m, n) = (p.height(), p.width());
    if m > m_cap || p.alphabet().size() != 2 || m >= 32 {
        return Err(CseError::CapExceeded { m, cap: m_cap });
    }
    if p.is_empty() {
        return Err(CseError::EmptyBlock);
    }
    let x = super_symbols(p);
    let alphabet = 1u64 << m;
    let top = (alphabet - 1) as u32;
    let log_n = (n as f64).log2();
    let limit = mid_limit(n);

    let singles = alphabet - 1;
    let (mut mid, mut mid_bits, mut long, mut long_bits) = (0, 0.0, 0, 0.0);
    let mut prev = substring_counts(&x, 1);
    // Counts of length len-2, with the empty string counting n.
    let mut inner: HashMap<Vec<u32>, u32> = HashMap::from([(Vec::new(), n as u32)]);
    for len in 2..=n {
        if inner.values().all(|&c| c < 2) {
            break;
        }
        let current = substring_counts(&x, len);
        let lefts: HashSet<u32> = prev.keys().map(|s| s[0]).collect();
        for (w, &wc) in &inner {
            let extend = |a: u32, right: bool| {
                let mut s = w.clone();
                if right {
                    s.push(a);
                } else {
                    s.insert(0, a);
                }
                prev.get(&s).copied().unwrap_or(0)
            };
            for &a in &lefts {
                let aw = extend(a, false);
                if aw == 0 || a == top {
                    continue;
                }
                for &c in &lefts {
                    let wc_c = extend(c, true);
                    if wc_c == 0 || c == top {
                        continue;
                    }
                    let slack = aw.min(wc_c).min(wc - aw).min(wc - wc_c);
                    if slack == 0 {
                        continue;
                    }
                    let bits = ((slack + 1) as f64).log2();
                    if len <= limit {
                        mid += 1;
                        mid_bits += bits;
                    } else {
                        long += 1;
                        long_bits += bits;
                    }
                }
            }
        }
        inner = std::mem::replace(&mut prev, current);
    }

    let elias_bits = elias_len(n as u64) as u64;
    let rank = rank_bits(n) as u64;
    let singles_bits = singles as f64 * log_n;
    let total_bits = elias_bits as f64 + singles_bits + mid_bits + long_bits + rank as f64;
    Ok(BaselineStats {
        m,
        n,
        alphabet,
        elias_bits,
        singles,
        singles_bits,
        mid,
        mid_bits,
        long,
        long_bits,
        rank_bits: rank,
        total_bits,
        bits_per_symbol: total_bits / (m * n) as f64,
        mid_regime_empty: limit < 2,
    })
}

/// Side-by-side of the baseline and the 2D codec on one block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub baseline: BaselineStats,
    pub codec: CodewordStats,
    pub baseline_transmitted: u64,
    pub codec_transmitted: u64,
    /// Baseline total over codec total.
    pub length_ratio: f64,
    pub transmitted_ratio: f64,
}

pub fn compare(p: &Block) -> Result<Comparison> {
    compare_with_cap(p, DEFAULT_M_CAP)
}

pub fn compare_with_cap(p: &Block, m_cap: usize) -> Result<Comparison> {
    let baseline = conv_lengths(p, m_cap)?;
    let codec = stats(p)?;
    let t = &codec.transmitted;
    let codec_transmitted = t.b1 + t.b2 + t.b3;
    Ok(Comparison {
        length_ratio: baseline.total_bits / codec.total_bits as f64,
        transmitted_ratio: baseline.transmitted() as f64 / codec_transmitted.max(1) as f64,
        baseline_transmitted: baseline.transmitted(),
        codec_transmitted,
        baseline,
        codec,
    })
}
