//! Binary arithmetic coder for uniformly distributed values.
//!
//! Classic 32-bit low/high coder with pending-bit (underflow) handling. Each
//! renormalization shift produces exactly one output bit and termination adds
//! two, so the decoder knows the section length from its own shift count and
//! whatever follows the section can be read from there.

use super::bits::{BitReader, BitWriter};
use crate::error::{CseError, Result};

const HALF: u64 = 1 << 31;
const QUARTER: u64 = 1 << 30;
const THREE_QUARTERS: u64 = 3 << 30;
const FULL: u64 = (1 << 32) - 1;
/// Widths above this are coded as several digits.
const MAX_DIGIT: u64 = 1 << 16;

/// Splits `value` in `[0, width)` into mixed-radix digits `(digit, radix)`.
fn digits(mut value: u64, mut width: u64, out: &mut Vec<(u64, u64)>) {
    out.clear();
    while width > MAX_DIGIT {
        let radix = width.div_ceil(MAX_DIGIT);
        let hi = value / MAX_DIGIT;
        out.push((hi, radix));
        width = if hi == radix - 1 { width - hi * MAX_DIGIT } else { MAX_DIGIT };
        value %= MAX_DIGIT;
    }
    out.push((value, width));
}

pub struct UniformEncoder {
    out: BitWriter,
    low: u64,
    high: u64,
    pending: u64,
    scratch: Vec<(u64, u64)>,
}

impl UniformEncoder {
    pub fn new(out: BitWriter) -> Self {
        UniformEncoder { out, low: 0, high: FULL, pending: 0, scratch: Vec::new() }
    }

    /// Codes `value` uniformly over `[0, width)`. Width 1 produces nothing.
    pub fn encode(&mut self, value: u64, width: u64) -> Result<()> {
        if value >= width {
            return Err(CseError::ValueOutOfInterval { value, lo: 0, hi: width.saturating_sub(1) });
        }
        let mut ds = std::mem::take(&mut self.scratch);
        digits(value, width, &mut ds);
        for &(d, w) in &ds {
            if w > 1 {
                self.encode_digit(d, w);
            }
        }
        self.scratch = ds;
        Ok(())
    }

    fn emit(&mut self, bit: bool) {
        self.out.write_bit(bit);
        for _ in 0..self.pending {
            self.out.write_bit(!bit);
        }
        self.pending = 0;
    }

    fn encode_digit(&mut self, v: u64, w: u64) {
        let range = self.high - self.low + 1;
        self.high = self.low + range * (v + 1) / w - 1;
        self.low += range * v / w;
        loop {
            if self.high < HALF {
                self.emit(false);
            } else if self.low >= HALF {
                self.emit(true);
                self.low -= HALF;
                self.high -= HALF;
            } else if self.low >= QUARTER && self.high < THREE_QUARTERS {
                self.pending += 1;
                self.low -= QUARTER;
                self.high -= QUARTER;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
        }
    }

    /// Terminates the section and returns the writer.
    pub fn finish(mut self) -> BitWriter {
        self.pending += 1;
        let bit = self.low >= QUARTER;
        self.emit(bit);
        self.out
    }
}

pub struct UniformDecoder<'a> {
    input: BitReader<'a>,
    start: u64,
    low: u64,
    high: u64,
    code: u64,
    shifts: u64,
}

impl<'a> UniformDecoder<'a> {
    /// Starts decoding at the reader's position. Bits past the end of the data
    /// read as zero; [`Self::end`] tells whether the section really fit.
    pub fn new(mut input: BitReader<'a>) -> Self {
        let start = input.position();
        let mut code = 0;
        for _ in 0..32 {
            code = (code << 1) | input.bit_or_zero() as u64;
        }
        UniformDecoder { input, start, low: 0, high: FULL, code, shifts: 0 }
    }

    pub fn decode(&mut self, width: u64) -> u64 {
        // Digit widths depend only on already decoded digits, so rebuild them
        // one at a time.
        let mut value = 0;
        let mut w = width;
        loop {
            if w <= MAX_DIGIT {
                if w > 1 {
                    value += self.decode_digit(w);
                }
                break;
            }
            let radix = w.div_ceil(MAX_DIGIT);
            let hi = self.decode_digit(radix);
            value += hi * MAX_DIGIT;
            w = if hi == radix - 1 { w - hi * MAX_DIGIT } else { MAX_DIGIT };
        }
        value
    }

    fn decode_digit(&mut self, w: u64) -> u64 {
        let range = self.high - self.low + 1;
        let v = (((self.code - self.low + 1) * w - 1) / range).min(w - 1);
        self.high = self.low + range * (v + 1) / w - 1;
        self.low += range * v / w;
        loop {
            if self.high < HALF {
            } else if self.low >= HALF {
                self.low -= HALF;
                self.high -= HALF;
                self.code -= HALF;
            } else if self.low >= QUARTER && self.high < THREE_QUARTERS {
                self.low -= QUARTER;
                self.high -= QUARTER;
                self.code -= QUARTER;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
            self.code = (self.code << 1) | self.input.bit_or_zero() as u64;
            self.shifts += 1;
        }
        v
    }

    /// Bit position just past the section, or `TruncatedStream` when the
    /// section runs beyond the data.
    pub fn end(&self) -> Result<u64> {
        let end = self.start + self.shifts + 2;
        if end > self.input.capacity() {
            return Err(CseError::TruncatedStream);
        }
        Ok(end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn encode_all(values: &[(u64, u64)], trailer: &[bool]) -> (Vec<u8>, u64) {
        let mut enc = UniformEncoder::new(BitWriter::new());
        for &(v, w) in values {
            enc.encode(v, w).unwrap();
        }
        let mut out = enc.finish();
        let section = out.len();
        for &b in trailer {
            out.write_bit(b);
        }
        (out.into_bytes(), section)
    }

    fn ideal(values: &[(u64, u64)]) -> f64 {
        values.iter().map(|&(_, w)| (w as f64).log2()).sum()
    }

    #[test]
    fn power_of_two_width_costs_its_bits() {
        let (_, bits) = encode_all(&[(3, 8)], &[]);
        assert!(bits <= 3 + 2, "{bits}");
    }

    #[test]
    fn width_one_is_free() {
        let (_, a) = encode_all(&[], &[]);
        let (_, b) = encode_all(&[(0, 1), (0, 1)], &[]);
        assert_eq!(a, b);
    }

    #[test]
    fn ten_ternary_values_fit_the_budget() {
        let vals: Vec<(u64, u64)> = (0..10).map(|i| (i % 3, 3)).collect();
        let (_, bits) = encode_all(&vals, &[]);
        assert!(bits <= (10.0 * 3f64.log2()).ceil() as u64 + 8, "{bits}");
    }

    #[test]
    fn out_of_range_value_is_rejected() {
        let mut enc = UniformEncoder::new(BitWriter::new());
        assert!(enc.encode(5, 5).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_with_trailer(
            raw in prop::collection::vec((any::<u64>(), 1u64..(1 << 40)), 0..200),
            small in any::<bool>(),
            trailer in prop::collection::vec(any::<bool>(), 0..40),
        ) {
            let values: Vec<(u64, u64)> = raw
                .iter()
                .map(|&(v, w)| if small { (w, (w % MAX_DIGIT) + 1) } else { (v, w) })
                .map(|(v, w)| (v % w, w))
                .collect();
            let (bytes, section) = encode_all(&values, &trailer);
            if small {
                prop_assert!((section as f64) <= ideal(&values) + 8.0);
            }
            let mut dec = UniformDecoder::new(BitReader::new(&bytes));
            for &(v, w) in &values {
                prop_assert_eq!(dec.decode(w), v);
            }
            prop_assert_eq!(dec.end().unwrap(), section);
            let mut r = BitReader::at(&bytes, section);
            for &b in &trailer {
                prop_assert_eq!(r.read_bit().unwrap(), b);
            }
        }
    }
}
