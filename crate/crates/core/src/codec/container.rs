//! Byte framing around the coded payload.
//!
//! ```text
//! offset  size  field
//! 0       6     magic "2DCSE1"
//! 6       1     version, 0x01
//! 7       1     flags: bit 0 escape, bit 1 empty block
//! 8       1     alphabet size minus one
//! 9       ..    payload, MSB-first, zero-padded to a byte
//! ```

use crate::error::{CseError, Result};
use crate::grid::Alphabet;

pub const MAGIC: &[u8; 6] = b"2DCSE1";
pub const VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 9;

const FLAG_ESCAPE: u8 = 0b01;
const FLAG_EMPTY: u8 = 0b10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Container {
    pub escape: bool,
    /// Set when the block has a zero dimension; the payload then stores
    /// `m + 1` and `n + 1`.
    pub empty: bool,
    pub alphabet: Alphabet,
    pub payload: Vec<u8>,
}

impl Container {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        let mut flags = 0;
        if self.escape {
            flags |= FLAG_ESCAPE;
        }
        if self.empty {
            flags |= FLAG_EMPTY;
        }
        out.push(flags);
        out.push((self.alphabet.size() - 1) as u8);
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            return Err(CseError::BadMagic);
        }
        if bytes.len() < HEADER_LEN {
            return Err(CseError::TruncatedStream);
        }
        if bytes[6] != VERSION {
            return Err(CseError::UnsupportedVersion(bytes[6]));
        }
        let flags = bytes[7];
        if flags & !(FLAG_ESCAPE | FLAG_EMPTY) != 0 {
            return Err(CseError::Format(format!("unknown flags {flags:#04x}")));
        }
        Ok(Container {
            escape: flags & FLAG_ESCAPE != 0,
            empty: flags & FLAG_EMPTY != 0,
            alphabet: Alphabet::new(bytes[8] as usize + 1)?,
            payload: bytes[HEADER_LEN..].to_vec(),
        })
    }

    /// Total serialized size in bytes.
    pub fn byte_len(&self) -> usize {
        HEADER_LEN + self.payload.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip() {
        let c = Container { escape: true, empty: false, alphabet: Alphabet::new(16).unwrap(), payload: vec![1, 2, 3] };
        let bytes = c.to_bytes();
        assert_eq!(&bytes[..9], b"2DCSE1\x01\x01\x0f");
        assert_eq!(Container::from_bytes(&bytes).unwrap(), c);
    }

    #[test]
    fn header_errors() {
        assert_eq!(Container::from_bytes(b"PNG..."), Err(CseError::BadMagic));
        assert_eq!(Container::from_bytes(b"2DCSE1\x02\x00\x01"), Err(CseError::UnsupportedVersion(2)));
        assert_eq!(Container::from_bytes(b"2DCSE1\x01"), Err(CseError::TruncatedStream));
        // J = 1 is not an alphabet.
        assert!(Container::from_bytes(b"2DCSE1\x01\x00\x00").is_err());
    }
}
