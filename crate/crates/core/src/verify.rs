//! Batch verification suites shared by the CLI and the acceptance runner.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::codec::{self, Container, CodewordStats};
use crate::error::Result;
use crate::exec::Exec;
use crate::grid::{Alphabet, Block};
use crate::oracle::{SweepReport, Universe};
use crate::source::SourceSpec;

/// Largest allowed gap between the payload and its ideal length.
pub const FLUSH_SLACK_BITS: f64 = 8.0;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RoundTripReport {
    pub round_trip: SweepReport,
    /// Blocks that went through the coded path.
    pub coded: u64,
    /// Blocks stored raw.
    pub escaped: u64,
    pub overhead: SweepReport,
    /// Largest `total_bits - ideal` seen on the coded path.
    pub max_slack: f64,
}

impl RoundTripReport {
    pub fn passed(&self) -> bool {
        self.round_trip.passed() && self.overhead.passed()
    }

    fn merge(mut self, other: RoundTripReport) -> RoundTripReport {
        self.round_trip = self.round_trip.merge(other.round_trip);
        self.overhead = self.overhead.merge(other.overhead);
        self.coded += other.coded;
        self.escaped += other.escaped;
        self.max_slack = self.max_slack.max(other.max_slack);
        self
    }
}

/// Payload bits beyond `sum log2 widths` plus the fixed fields.
pub fn coder_slack(s: &CodewordStats) -> f64 {
    s.total_bits as f64 - (s.ideal_count_bits() + s.field_bits() as f64)
}

fn through_bytes(c: &Container) -> Result<Block> {
    codec::decompress(&Container::from_bytes(&c.to_bytes())?)
}

/// Round-trips `p` through the coded path when available and through the
/// escape path whenever that is the container `compress` would pick.
/// Primitive blocks must be codable; others must be escaped.
fn check_block(p: &Block, exec: Exec) -> RoundTripReport {
    let mut r = RoundTripReport::default();
    r.round_trip.checked += 1;
    let fail = |r: &mut RoundTripReport, what: &str| r.round_trip.push_violation(format!("{what}: {:?}", p.to_rows()));
    let raw = codec::encode_raw(p);
    let expect_coded = p.height() >= 2 && p.width() >= 2 && p.is_primitive();
    let chosen = match codec::encode_strict(p, exec) {
        Ok(enc) => {
            r.coded += 1;
            if !expect_coded {
                fail(&mut r, "non-primitive block took the coded path");
            }
            match through_bytes(&enc.container) {
                Ok(q) if q == *p => {}
                Ok(_) => fail(&mut r, "coded path mismatch"),
                Err(e) => fail(&mut r, &format!("coded path error {e}")),
            }
            let slack = coder_slack(&enc.stats);
            r.max_slack = slack;
            r.overhead.checked += 1;
            if !(0.0..=FLUSH_SLACK_BITS).contains(&slack) {
                r.overhead.push_violation(format!("slack {slack:.3} bits on {}x{}", p.height(), p.width()));
            }
            codec::shorter(enc, raw)
        }
        Err(_) => {
            r.escaped += 1;
            if expect_coded {
                fail(&mut r, "primitive block rejected by the coded path");
            }
            raw
        }
    };
    if chosen.container.escape {
        match through_bytes(&chosen.container) {
            Ok(q) if q == *p => {}
            Ok(_) => fail(&mut r, "escape path mismatch"),
            Err(e) => fail(&mut r, &format!("escape path error {e}")),
        }
    }
    r
}

/// Every `m x n` block over `alphabet`.
pub fn all_blocks(m: usize, n: usize, alphabet: Alphabet) -> impl Iterator<Item = Block> {
    let j = alphabet.size() as u64;
    (0..j.pow((m * n) as u32)).map(move |mut code| {
        let mut cells = vec![0u8; m * n];
        for c in cells.iter_mut().rev() {
            *c = (code % j) as u8;
            code /= j;
        }
        Block::from_cells(m, n, cells, alphabet).expect("symbols in range")
    })
}

/// Round trip of every binary block of each size.
pub fn exhaustive(sizes: &[(usize, usize)], exec: Exec) -> RoundTripReport {
    let blocks: Vec<Block> = sizes.iter().flat_map(|&(m, n)| all_blocks(m, n, Alphabet::BINARY)).collect();
    exec.map_slice(&blocks, |p| check_block(p, Exec::Sequential))
        .into_iter()
        .fold(RoundTripReport::default(), RoundTripReport::merge)
}

/// The `i`-th block of the seeded random corpus: `J` cycles through
/// `alphabets`, sizes are uniform in `1..=max`, symbols skewed at random.
pub fn random_block(seed: u64, i: u64, max: usize, alphabets: &[usize]) -> Block {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let j = alphabets[i as usize % alphabets.len()];
    let m = rng.gen_range(1..=max);
    let n = rng.gen_range(1..=max);
    let weights: Vec<f64> = (0..j).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let probs = weights.iter().map(|w| w / total).collect();
    SourceSpec::iid(probs, m, n, rng.gen()).expect("normalized").generate()
}

/// Round trip of `count` seeded random blocks.
pub fn random(count: u64, max: usize, alphabets: &[usize], seed: u64, exec: Exec) -> RoundTripReport {
    exec.map_range(count as usize, |i| check_block(&random_block(seed, i as u64, max, alphabets), Exec::Sequential))
        .into_iter()
        .fold(RoundTripReport::default(), RoundTripReport::merge)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub m: usize,
    pub n: usize,
    pub alphabet: usize,
    pub primitive: u64,
    pub lemma1: SweepReport,
    pub lemma2: SweepReport,
    pub telescoping: SweepReport,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.lemma1.passed() && self.lemma2.passed() && self.telescoping.passed()
    }
}

/// Both lemma sweeps and the telescoping check over all primitive blocks.
pub fn lemmas(m: usize, n: usize, alphabet: Alphabet, exec: Exec) -> Result<LemmaReport> {
    let u = Universe::new(m, n, alphabet, exec)?;
    Ok(LemmaReport {
        m,
        n,
        alphabet: alphabet.size(),
        primitive: u.blocks().len() as u64,
        lemma1: u.lemma1_sweep(),
        lemma2: u.lemma2_sweep(),
        telescoping: u.telescoping_sweep(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_exhaustive() {
        let r = exhaustive(&[(1, 2), (2, 2)], Exec::Sequential);
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.round_trip.checked, 4 + 16);
        assert_eq!(r.coded, 8);
    }

    #[test]
    fn random_corpus_is_reproducible() {
        assert_eq!(random_block(5, 17, 12, &[2, 4, 16]), random_block(5, 17, 12, &[2, 4, 16]));
        assert_eq!(random_block(5, 17, 12, &[2, 4, 16]).alphabet().size(), 16);
        assert!(random(12, 6, &[2, 4, 16], 1, Exec::default()).passed());
    }

    #[test]
    fn lemma_report_2x3() {
        let r = lemmas(2, 3, Alphabet::BINARY, Exec::default()).unwrap();
        assert_eq!(r.primitive, 54);
        assert!(r.passed(), "{r:?}");
    }
}
