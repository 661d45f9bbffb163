//! MSB-first bit streams and the Elias delta code.

use crate::error::{CseError, Result};

#[derive(Debug, Clone, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    len: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn write_bit(&mut self, bit: bool) {
        let offset = (self.len % 8) as u8;
        if offset == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> offset;
        }
        self.len += 1;
    }

    /// Writes the low `count` bits of `value`, most significant first.
    pub fn write_bits(&mut self, value: u64, count: u32) {
        for i in (0..count).rev() {
            self.write_bit((value >> i) & 1 == 1);
        }
    }

    /// Number of bits written, excluding padding.
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bytes with the final one zero-padded.
    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    data: &'a [u8],
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        BitReader { data, pos: 0 }
    }

    pub fn at(data: &'a [u8], pos: u64) -> Self {
        BitReader { data, pos }
    }

    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn capacity(&self) -> u64 {
        self.data.len() as u64 * 8
    }

    /// Next bit, or zero past the end of the data.
    pub fn bit_or_zero(&mut self) -> bool {
        let bit = self.peek().unwrap_or(false);
        self.pos += 1;
        bit
    }

    fn peek(&self) -> Option<bool> {
        let byte = *self.data.get((self.pos / 8) as usize)?;
        Some(byte & (0x80 >> (self.pos % 8)) != 0)
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        let bit = self.peek().ok_or(CseError::TruncatedStream)?;
        self.pos += 1;
        Ok(bit)
    }

    pub fn read_bits(&mut self, count: u32) -> Result<u64> {
        let mut v = 0u64;
        for _ in 0..count {
            v = (v << 1) | self.read_bit()? as u64;
        }
        Ok(v)
    }
}

fn bit_length(v: u64) -> u32 {
    64 - v.leading_zeros()
}

/// Appends the Elias delta code of `v`.
pub fn elias_encode(w: &mut BitWriter, v: u64) -> Result<()> {
    if v == 0 {
        return Err(CseError::NonPositive);
    }
    let n = bit_length(v);
    let nn = bit_length(n as u64);
    w.write_bits(0, nn - 1);
    w.write_bits(n as u64, nn);
    w.write_bits(v, n - 1);
    Ok(())
}

pub fn elias_decode(r: &mut BitReader) -> Result<u64> {
    let mut zeros = 0;
    while !r.read_bit()? {
        zeros += 1;
        if zeros > 6 {
            return Err(CseError::Format("malformed Elias code".into()));
        }
    }
    let n = ((1u64 << zeros) | r.read_bits(zeros)?) as u32;
    if n > 64 {
        return Err(CseError::Format("malformed Elias code".into()));
    }
    let low = r.read_bits(n - 1)?;
    Ok(if n == 64 { (1 << 63) | low } else { (1 << (n - 1)) | low })
}

/// Length in bits of the Elias delta code of `v >= 1`.
pub fn elias_len(v: u64) -> u32 {
    let n = bit_length(v);
    n - 1 + 2 * (bit_length(n as u64) - 1) + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn code(v: u64) -> String {
        let mut w = BitWriter::new();
        elias_encode(&mut w, v).unwrap();
        let len = w.len();
        let bytes = w.into_bytes();
        let mut r = BitReader::new(&bytes);
        (0..len).map(|_| if r.read_bit().unwrap() { '1' } else { '0' }).collect()
    }

    /// Textbook delta code built from strings.
    fn reference(v: u64) -> String {
        let bin = format!("{v:b}");
        let len_bin = format!("{:b}", bin.len());
        format!("{}{}{}", "0".repeat(len_bin.len() - 1), len_bin, &bin[1..])
    }

    #[test]
    fn known_codes() {
        assert_eq!(code(1), "1");
        assert_eq!(code(2), "0100");
        assert_eq!(code(5), "01101");
        assert_eq!(elias_len(64), 11);
        assert_eq!(elias_encode(&mut BitWriter::new(), 0), Err(CseError::NonPositive));
    }

    #[test]
    fn bits_are_msb_first() {
        let mut w = BitWriter::new();
        w.write_bits(0b101, 3);
        assert_eq!(w.len(), 3);
        assert_eq!(w.into_bytes(), vec![0b1010_0000]);
    }

    proptest! {
        #[test]
        fn delta_round_trip(v in 1u64..=u64::MAX) {
            prop_assert_eq!(code(v), reference(v));
            prop_assert_eq!(code(v).len() as u32, elias_len(v));
            let mut w = BitWriter::new();
            elias_encode(&mut w, v).unwrap();
            let bytes = w.into_bytes();
            prop_assert_eq!(elias_decode(&mut BitReader::new(&bytes)).unwrap(), v);
        }
    }
}
