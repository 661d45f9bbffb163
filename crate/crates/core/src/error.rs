use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CseError {
    #[error("alphabet size {0} outside 2..=256")]
    BadAlphabet(usize),
    #[error("rows have unequal lengths")]
    RaggedRows,
    #[error("symbol {symbol} out of range for alphabet of size {size}")]
    SymbolOutOfRange { symbol: usize, size: usize },
    #[error("anchor or window ({i}, {j}, {k}, {l}) outside the torus window")]
    AnchorOutOfRange { i: usize, j: usize, k: usize, l: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),
    #[error("cannot trim an empty dimension")]
    EmptyBlock,
    #[error("rank {rank} out of range for a class of {size} blocks")]
    RankOutOfRange { rank: usize, size: usize },
    #[error("query block {qk}x{ql} larger than source {m}x{n}")]
    OversizeQuery { qk: usize, ql: usize, m: usize, n: usize },
    #[error("source block is not primitive")]
    NotPrimitive,
    #[error("size ({k}, {l}) requires smaller sizes that are not finalized")]
    LedgerIncomplete { k: usize, l: usize },
    #[error("axis has extent 1, no decomposition available")]
    AxisUnavailable,
    #[error("counts of size ({k}, {l}) remain undetermined after inference")]
    UnderdeterminedCounts { k: usize, l: usize },
    #[error("inconsistent counts at size ({k}, {l}): {reason}")]
    InconsistentCounts { k: usize, l: usize, reason: &'static str },
    #[error("value {value} outside interval [{lo}, {hi}]")]
    ValueOutOfInterval { value: u64, lo: u64, hi: u64 },
    #[error("Elias codes require a positive integer")]
    NonPositive,
    #[error("bad container magic")]
    BadMagic,
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u8),
    #[error("stream truncated")]
    TruncatedStream,
    #[error("enumeration of {bits} bits exceeds the oracle guard of 20")]
    TooLarge { bits: u32 },
    #[error("height {m} exceeds the baseline cap {cap} (or alphabet is not binary)")]
    CapExceeded { m: usize, cap: usize },
    #[error("bad source spec: {0}")]
    BadSpec(String),
    #[error("grid file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, CseError>;
