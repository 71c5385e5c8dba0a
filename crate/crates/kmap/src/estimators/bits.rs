//! LSB-first bit packing shared by the internal codecs.
//!
//! The writer tracks the exact number of bits emitted before byte padding,
//! which is what the compression estimators report as their raw output size.

use crate::error::{Error, Result};

/// Accumulates bits least-significant-first into a byte buffer.
#[derive(Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u64,
    acc_bits: u32,
    total_bits: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bytes: usize) -> Self {
        Self {
            bytes: Vec::with_capacity(bytes),
            ..Self::default()
        }
    }

    /// Writes the low `n` bits of `value`, LSB emitted first. `n` ≤ 32.
    pub fn write_bits(&mut self, value: u32, n: u32) {
        debug_assert!(n <= 32);
        debug_assert!(n == 32 || u64::from(value) < (1u64 << n));
        self.acc |= u64::from(value) << self.acc_bits;
        self.acc_bits += n;
        self.total_bits += u64::from(n);
        while self.acc_bits >= 8 {
            self.bytes.push((self.acc & 0xff) as u8);
            self.acc >>= 8;
            self.acc_bits -= 8;
        }
    }

    /// Writes a Huffman code of `len` bits, most-significant bit first.
    pub fn write_code(&mut self, code: u16, len: u32) {
        self.write_bits(u32::from(reverse_bits(code, len)), len);
    }

    /// Aligns to a byte boundary with zero bits. Mid-stream alignment is
    /// part of the encoding, so the padding counts toward `bit_len`.
    pub fn align_byte(&mut self) {
        if self.acc_bits > 0 {
            self.total_bits += u64::from(8 - self.acc_bits);
            self.bytes.push((self.acc & 0xff) as u8);
            self.acc = 0;
            self.acc_bits = 0;
        }
    }

    /// Writes a whole byte, assuming the stream is byte-aligned.
    pub fn write_aligned_byte(&mut self, b: u8) {
        debug_assert_eq!(self.acc_bits, 0);
        self.bytes.push(b);
        self.total_bits += 8;
    }

    /// Number of meaningful bits written so far. Final padding added by
    /// `into_bytes` is not included.
    pub fn bit_len(&self) -> u64 {
        self.total_bits
    }

    /// Finishes the stream, padding the final partial byte with zeros.
    pub fn into_bytes(mut self) -> Vec<u8> {
        if self.acc_bits > 0 {
            self.bytes.push((self.acc & 0xff) as u8);
        }
        self.bytes
    }
}

/// Reads bits least-significant-first from a byte slice.
#[derive(Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    acc: u64,
    acc_bits: u32,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self {
            bytes,
            pos: 0,
            acc: 0,
            acc_bits: 0,
        }
    }

    fn refill(&mut self) {
        while self.acc_bits <= 56 && self.pos < self.bytes.len() {
            self.acc |= u64::from(self.bytes[self.pos]) << self.acc_bits;
            self.pos += 1;
            self.acc_bits += 8;
        }
    }

    /// Reads `n` bits (≤ 32), LSB-first.
    pub fn read_bits(&mut self, n: u32) -> Result<u32> {
        debug_assert!(n <= 32);
        if self.acc_bits < n {
            self.refill();
            if self.acc_bits < n {
                return Err(Error::CorruptStream("bit stream truncated".into()));
            }
        }
        let mask = if n == 32 { u64::MAX >> 32 } else { (1u64 << n) - 1 };
        let out = (self.acc & mask) as u32;
        self.acc >>= n;
        self.acc_bits -= n;
        Ok(out)
    }

    /// Reads a single bit.
    pub fn read_bit(&mut self) -> Result<u32> {
        self.read_bits(1)
    }

    /// Discards buffered bits up to the next byte boundary.
    pub fn align_byte(&mut self) {
        let drop = self.acc_bits % 8;
        self.acc >>= drop;
        self.acc_bits -= drop;
    }

    /// Reads a whole byte, assuming byte alignment.
    pub fn read_aligned_byte(&mut self) -> Result<u8> {
        debug_assert_eq!(self.acc_bits % 8, 0);
        Ok(self.read_bits(8)? as u8)
    }
}

/// Reverses the low `len` bits of `code`.
pub fn reverse_bits(code: u16, len: u32) -> u16 {
    let mut out = 0u16;
    let mut c = code;
    for _ in 0..len {
        out = (out << 1) | (c & 1);
        c >>= 1;
    }
    out
}

/// Expands bytes into bits, most-significant bit of each byte first.
pub fn bytes_to_bits(payload: &[u8]) -> Vec<u8> {
    let mut bits = Vec::with_capacity(payload.len() * 8);
    for &byte in payload {
        for shift in (0..8).rev() {
            bits.push((byte >> shift) & 1);
        }
    }
    bits
}

/// Counts set bits over a byte slice.
pub fn count_ones(payload: &[u8]) -> u64 {
    payload.iter().map(|b| u64::from(b.count_ones() as u8)).sum()
}
