//! Lossless compression of two-dimensional blocks by subblock enumeration
//! on the flat torus.
//!
//! A primitive `m x n` block is described by the occurrence counts of its
//! subblocks (read cyclically in both directions) plus its position inside
//! its torus shift class. Most counts follow from smaller ones, so only a
//! small fraction is written, each over the interval of values still
//! feasible.

pub mod baseline;
pub mod codec;
pub mod counting;
pub mod error;
pub mod exec;
pub mod grid;
pub mod inference;
pub mod ledger;
pub mod oracle;
pub mod session;
pub mod source;
pub mod verify;

pub use codec::{compress, compress_strict, decompress, stats, CodewordStats, Container};
pub use counting::{build_ledger, count, CodingOrder};
pub use error::{CseError, Result};
pub use exec::Exec;
pub use grid::{select_by_rank, Alphabet, Axis, Block, ShiftClass, Side};
pub use inference::{BlockClass, Disposition, Interval};
pub use ledger::CountLedger;
