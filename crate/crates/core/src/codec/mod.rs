//! Compression, decompression and codeword length accounting.
//!
//! Payload of a coded container:
//!
//! ```text
//! E(m) | E(n) | count section | rank (ceil(log2 mn) bits) | zero pad
//! ```
//!
//! `E` is the Elias delta code. The count section is one arithmetic-coded
//! run of uniform values, one per exchanged count, each over its coding
//! interval. Escape payloads carry `E(m) | E(n)` followed by the cells
//! row-major in `ceil(log2 J)` bits each.

pub mod arith;
pub mod bits;
pub mod container;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{CseError, Result};
use crate::exec::Exec;
use crate::grid::{Alphabet, Block};
use crate::inference::BlockClass;
use crate::session::{self, Channel, Exchange, SCHEDULE};
use arith::{UniformDecoder, UniformEncoder};
use bits::{elias_decode, elias_encode, elias_len, BitReader, BitWriter};
pub use container::Container;

/// Largest `m * n` a decoder accepts, guarding against absurd dimensions in
/// corrupt streams.
const MAX_AREA: u64 = 1 << 24;

/// Number of values exchanged per block class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Transmitted {
    pub b1: u64,
    pub b2: u64,
    pub b3: u64,
}

/// Codeword length breakdown. `l1..l3` are ideal lengths `log2(width)` of the
/// exchanged values per class; `l0` holds the size and rank fields plus the
/// coder's termination slack, so the four parts sum to `total_bits`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodewordStats {
    pub escape: bool,
    pub m: usize,
    pub n: usize,
    #[serde(rename = "J")]
    pub j: usize,
    pub l0: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    /// Payload bits before byte padding.
    pub total_bits: u64,
    pub bits_per_symbol: f64,
    pub transmitted: Transmitted,
    /// Values exchanged per size `(k, l)`.
    #[serde(skip)]
    pub per_size: BTreeMap<(usize, usize), u64>,
    /// Exchanges caused by stalled sum completion rather than a rule.
    #[serde(skip)]
    pub promoted: u64,
    /// Bits of the count section as written.
    #[serde(skip)]
    pub section_bits: u64,
}

impl CodewordStats {
    /// `log2` of the product of all coding interval widths.
    pub fn ideal_count_bits(&self) -> f64 {
        self.l1 + self.l2 + self.l3
    }

    /// Header fields in bits: `|E(m)| + |E(n)| + ceil(log2 mn)`.
    pub fn field_bits(&self) -> u64 {
        if self.escape {
            return self.total_bits;
        }
        elias_len(self.m as u64) as u64 + elias_len(self.n as u64) as u64 + rank_bits(self.m * self.n) as u64
    }
}

/// A container together with its length breakdown.
#[derive(Debug, Clone)]
pub struct Encoded {
    pub container: Container,
    pub stats: CodewordStats,
}

/// `ceil(log2 x)` for `x >= 1`.
pub fn rank_bits(area: usize) -> u32 {
    usize::BITS - (area.max(1) - 1).leading_zeros()
}

struct EncodeChannel {
    coder: Option<UniformEncoder>,
    lengths: [f64; 3],
    transmitted: Transmitted,
    per_size: BTreeMap<(usize, usize), u64>,
    promoted: u64,
}

impl Channel for EncodeChannel {
    fn exchange(&mut self, x: Exchange, truth: Option<u32>) -> Result<u32> {
        let v = truth.expect("encoder supplies true counts");
        let width = x.interval.width();
        self.coder.as_mut().expect("coder open").encode((v - x.interval.lo) as u64, width)?;
        let slot = match x.class {
            BlockClass::B1 => {
                self.transmitted.b1 += 1;
                0
            }
            BlockClass::B2 => {
                self.transmitted.b2 += 1;
                1
            }
            BlockClass::B3 => {
                self.transmitted.b3 += 1;
                2
            }
        };
        self.lengths[slot] += (width as f64).log2();
        *self.per_size.entry((x.k, x.l)).or_default() += 1;
        self.promoted += x.promoted as u64;
        Ok(v)
    }
}

struct DecodeChannel<'a> {
    coder: UniformDecoder<'a>,
}

impl Channel for DecodeChannel<'_> {
    fn exchange(&mut self, x: Exchange, _: Option<u32>) -> Result<u32> {
        let offset = self.coder.decode(x.interval.width());
        Ok(x.interval.lo + offset as u32)
    }
}

/// Compresses any block. Non-primitive and thin inputs use the escape path,
/// as does any input whose coded payload would be longer than the raw one.
pub fn compress(p: &Block) -> Container {
    encode(p, Exec::default()).container
}

/// Always uses the coded path; fails on inputs it cannot represent.
pub fn compress_strict(p: &Block) -> Result<Container> {
    Ok(encode_strict(p, Exec::default())?.container)
}

/// Length breakdown of the coded path.
pub fn stats(p: &Block) -> Result<CodewordStats> {
    Ok(encode_strict(p, Exec::default())?.stats)
}

fn codable(p: &Block) -> bool {
    p.height() >= 2 && p.width() >= 2 && p.is_primitive()
}

/// Compresses and reports the length breakdown of the container chosen.
pub fn encode(p: &Block, exec: Exec) -> Encoded {
    let raw = encode_raw(p);
    if !codable(p) {
        return raw;
    }
    shorter(encode_coded(p, exec).expect("coded path is total on primitive blocks"), raw)
}

/// The coded container unless the raw one is strictly shorter.
pub fn shorter(coded: Encoded, raw: Encoded) -> Encoded {
    if coded.stats.total_bits <= raw.stats.total_bits {
        coded
    } else {
        raw
    }
}

/// Coded path only.
pub fn encode_strict(p: &Block, exec: Exec) -> Result<Encoded> {
    if !codable(p) {
        return Err(CseError::NotPrimitive);
    }
    encode_coded(p, exec)
}

/// Escape container: dimensions and raw symbols.
pub fn encode_raw(p: &Block) -> Encoded {
    let (m, n) = (p.height(), p.width());
    let empty = p.is_empty();
    let shift = empty as u64;
    let mut w = BitWriter::new();
    elias_encode(&mut w, m as u64 + shift).expect("positive");
    elias_encode(&mut w, n as u64 + shift).expect("positive");
    let bits = p.alphabet().raw_bits();
    for &c in p.cells() {
        w.write_bits(c as u64, bits);
    }
    let total_bits = w.len();
    let stats = CodewordStats {
        escape: true,
        m,
        n,
        j: p.alphabet().size(),
        l0: total_bits as f64,
        l1: 0.0,
        l2: 0.0,
        l3: 0.0,
        total_bits,
        bits_per_symbol: if empty { 0.0 } else { total_bits as f64 / (m * n) as f64 },
        transmitted: Transmitted::default(),
        per_size: BTreeMap::new(),
        promoted: 0,
        section_bits: 0,
    };
    let container = Container { escape: true, empty, alphabet: p.alphabet(), payload: w.into_bytes() };
    Encoded { container, stats }
}

fn encode_coded(p: &Block, exec: Exec) -> Result<Encoded> {
    let (m, n) = (p.height(), p.width());
    let mut w = BitWriter::new();
    elias_encode(&mut w, m as u64)?;
    elias_encode(&mut w, n as u64)?;
    let head = w.len();
    let mut chan = EncodeChannel {
        coder: Some(UniformEncoder::new(w)),
        lengths: [0.0; 3],
        transmitted: Transmitted::default(),
        per_size: BTreeMap::new(),
        promoted: 0,
    };
    let ledger = session::replay(m, n, p.alphabet(), Some(p), &mut chan, SCHEDULE, exec)?;
    let mut w = chan.coder.take().expect("coder open").finish();
    let section_bits = w.len() - head;

    let ids = session::shift_class_ids(&ledger)?;
    let own = ledger.find(p).expect("source is a candidate of its own size");
    let rank = ids.binary_search(&own).expect("source is in its shift class");
    w.write_bits(rank as u64, rank_bits(m * n));
    let total_bits = w.len();

    let [l1, l2, l3] = chan.lengths;
    let stats = CodewordStats {
        escape: false,
        m,
        n,
        j: p.alphabet().size(),
        l0: total_bits as f64 - (l1 + l2 + l3),
        l1,
        l2,
        l3,
        total_bits,
        bits_per_symbol: total_bits as f64 / (m * n) as f64,
        transmitted: chan.transmitted,
        per_size: chan.per_size,
        promoted: chan.promoted,
        section_bits,
    };
    let container = Container { escape: false, empty: false, alphabet: p.alphabet(), payload: w.into_bytes() };
    Ok(Encoded { container, stats })
}

/// Inverts [`compress`].
pub fn decompress(c: &Container) -> Result<Block> {
    decompress_with(c, Exec::default())
}

pub fn decompress_with(c: &Container, exec: Exec) -> Result<Block> {
    let mut r = BitReader::new(&c.payload);
    let shift = c.empty as u64;
    let m = elias_decode(&mut r)?.checked_sub(shift).ok_or(CseError::Format("bad empty-block size".into()))?;
    let n = elias_decode(&mut r)?.checked_sub(shift).ok_or(CseError::Format("bad empty-block size".into()))?;
    if m.saturating_mul(n) > MAX_AREA {
        return Err(CseError::Format(format!("dimensions {m}x{n} exceed the decoder limit")));
    }
    let (m, n) = (m as usize, n as usize);
    if c.empty != (m * n == 0) {
        return Err(CseError::Format("empty flag disagrees with dimensions".into()));
    }
    if c.escape {
        let bits = c.alphabet.raw_bits();
        let mut cells = Vec::with_capacity(m * n);
        for _ in 0..m * n {
            let v = r.read_bits(bits)?;
            if v >= c.alphabet.size() as u64 {
                return Err(CseError::SymbolOutOfRange { symbol: v as usize, size: c.alphabet.size() });
            }
            cells.push(v as u8);
        }
        return Block::from_cells(m, n, cells, c.alphabet);
    }
    if m < 2 || n < 2 {
        return Err(CseError::Format("coded payload needs at least 2x2".into()));
    }
    let mut chan = DecodeChannel { coder: UniformDecoder::new(BitReader::at(&c.payload, r.position())) };
    let ledger = session::replay(m, n, c.alphabet, None, &mut chan, SCHEDULE, exec)?;
    let mut r = BitReader::at(&c.payload, chan.coder.end()?);
    let rank = r.read_bits(rank_bits(m * n))? as usize;
    let ids = session::shift_class_ids(&ledger)?;
    let id = *ids.get(rank).ok_or(CseError::RankOutOfRange { rank, size: ids.len() })?;
    Ok(ledger.materialize(m, n, id))
}

/// Ideal bits for the raw escape path, for comparisons.
pub fn escape_bits(m: usize, n: usize, alphabet: Alphabet) -> u64 {
    elias_len(m.max(1) as u64) as u64 + elias_len(n.max(1) as u64) as u64 + (m * n) as u64 * alphabet.raw_bits() as u64
}
