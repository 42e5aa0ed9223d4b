//! Fixed-width bit packing for the wire format. Bits are written MSB-first
//! into a byte buffer; the final partial byte is zero-padded on the right.
//! The layout is frozen by golden tests and documented in docs/wire-format.md.

use crate::error::{Error, Result};

/// An owned bit sequence with an exact bit length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitString {
    bytes: Vec<u8>,
    len_bits: u64,
}

impl BitString {
    pub fn len_bits(&self) -> u64 {
        self.len_bits
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn to_hex(&self) -> String {
        self.bytes.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn bit(&self, idx: u64) -> bool {
        assert!(idx < self.len_bits);
        let byte = self.bytes[(idx / 8) as usize];
        (byte >> (7 - (idx % 8))) & 1 == 1
    }
}

#[derive(Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    len_bits: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append the low `width` bits of `value`, most significant first.
    pub fn write(&mut self, value: u64, width: u32) {
        assert!(width <= 64);
        if width < 64 {
            debug_assert!(value < (1u64 << width), "value {value} does not fit in {width} bits");
        }
        for i in (0..width).rev() {
            let bit = (value >> i) & 1;
            let pos = self.len_bits % 8;
            if pos == 0 {
                self.bytes.push(0);
            }
            if bit == 1 {
                let last = self.bytes.last_mut().unwrap();
                *last |= 1 << (7 - pos);
            }
            self.len_bits += 1;
        }
    }

    /// Zero-pad up to `target_bits` total.
    pub fn pad_to(&mut self, target_bits: u64) {
        assert!(target_bits >= self.len_bits, "cannot pad backwards");
        let missing = target_bits - self.len_bits;
        for _ in 0..missing {
            self.write(0, 1);
        }
    }

    pub fn len_bits(&self) -> u64 {
        self.len_bits
    }

    pub fn finish(self) -> BitString {
        BitString { bytes: self.bytes, len_bits: self.len_bits }
    }
}

pub struct BitReader<'a> {
    bits: &'a BitString,
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a BitString) -> Self {
        BitReader { bits, pos: 0 }
    }

    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn remaining(&self) -> u64 {
        self.bits.len_bits() - self.pos
    }

    pub fn read(&mut self, width: u32) -> Result<u64> {
        if u64::from(width) > self.remaining() {
            return Err(Error::MalformedSignal(format!(
                "read of {width} bits past end (position {}, length {})",
                self.pos,
                self.bits.len_bits()
            )));
        }
        let mut value = 0u64;
        for _ in 0..width {
            value = (value << 1) | u64::from(self.bits.bit(self.pos));
            self.pos += 1;
        }
        Ok(value)
    }

    /// Consume `count` bits and require them to be zero.
    pub fn expect_zero_padding(&mut self, count: u64) -> Result<()> {
        let mut left = count;
        while left > 0 {
            let chunk = left.min(64) as u32;
            if self.read(chunk)? != 0 {
                return Err(Error::MalformedSignal("nonzero padding".into()));
            }
            left -= u64::from(chunk);
        }
        Ok(())
    }
}

/// Number of bits needed to index `values` distinct values (0 for a single value).
pub fn bits_for(values: u64) -> u32 {
    debug_assert!(values >= 1);
    64 - (values - 1).leading_zeros()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msb_first_layout() {
        let mut w = BitWriter::new();
        w.write(0b101, 3);
        w.write(0b1, 1);
        w.write(0b0011, 4);
        let bits = w.finish();
        assert_eq!(bits.len_bits(), 8);
        assert_eq!(bits.as_bytes(), &[0b1011_0011]);
        assert_eq!(bits.to_hex(), "b3");
    }

    #[test]
    fn writer_reader_round_trip() {
        let mut w = BitWriter::new();
        w.write(5, 3);
        w.write(1023, 10);
        w.write(0, 2);
        w.write(77, 7);
        w.pad_to(30);
        let bits = w.finish();
        let mut r = BitReader::new(&bits);
        assert_eq!(r.read(3).unwrap(), 5);
        assert_eq!(r.read(10).unwrap(), 1023);
        assert_eq!(r.read(2).unwrap(), 0);
        assert_eq!(r.read(7).unwrap(), 77);
        r.expect_zero_padding(r.remaining()).unwrap();
    }

    #[test]
    fn read_past_end_is_an_error() {
        let mut w = BitWriter::new();
        w.write(1, 1);
        let bits = w.finish();
        let mut r = BitReader::new(&bits);
        assert_eq!(r.read(1).unwrap(), 1);
        assert!(r.read(1).is_err());
    }

    #[test]
    fn bits_for_counts() {
        assert_eq!(bits_for(1), 0);
        assert_eq!(bits_for(2), 1);
        assert_eq!(bits_for(3), 2);
        assert_eq!(bits_for(4), 2);
        assert_eq!(bits_for(5), 3);
        assert_eq!(bits_for(1 << 20), 20);
    }
}
