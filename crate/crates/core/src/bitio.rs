//! Bit-granular streams and Elias universal integer codes.
//!
//! Bits are packed most-significant-first within each byte and the final
//! partial byte is zero-padded, so a hex dump reads the same as the bit
//! string it encodes.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitError {
    #[error("value {value} does not fit in {width} bits")]
    ValueTooWide { value: u64, width: u32 },
    #[error("bit width {0} exceeds 64")]
    WidthTooLarge(u32),
    #[error("truncated stream: needed {needed} bits at offset {offset}, {available} available")]
    Truncated {
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error("universal codes are defined on positive integers only")]
    Zero,
    #[error("universal codeword at offset {0} does not fit in 64 bits")]
    Overflow(usize),
    #[error("byte image of {bytes} bytes cannot hold exactly {bits} bits")]
    BadImage { bytes: usize, bits: usize },
    #[error("invalid bit character {0:?}")]
    BadChar(char),
}

/// Length in bits of the Elias gamma codeword for `n`: `2·⌊log₂ n⌋ + 1`.
pub fn gamma_len(n: u64) -> u32 {
    debug_assert!(n >= 1);
    2 * floor_log2(n) + 1
}

/// Length in bits of the Elias delta codeword for `n`.
pub fn delta_len(n: u64) -> u32 {
    debug_assert!(n >= 1);
    let low = floor_log2(n);
    gamma_len(u64::from(low) + 1) + low
}

#[inline]
pub(crate) fn floor_log2(n: u64) -> u32 {
    63 - n.leading_zeros()
}

/// Number of bits needed to write any integer in `0..=span`.
#[inline]
pub fn bits_for_span(span: u64) -> u32 {
    64 - span.leading_zeros()
}

/// An append-only sequence of bits with an exact length.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitStream {
    bytes: Vec<u8>,
    len: usize,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            len: 0,
        }
    }

    /// Wraps a byte image holding exactly `len` bits. The image must be
    /// `⌈len/8⌉` bytes long; pad bits in the last byte are cleared.
    pub fn from_bytes(mut bytes: Vec<u8>, len: usize) -> Result<Self, BitError> {
        if bytes.len() != len.div_ceil(8) {
            return Err(BitError::BadImage {
                bytes: bytes.len(),
                bits: len,
            });
        }
        let rem = len % 8;
        if rem != 0 {
            if let Some(last) = bytes.last_mut() {
                *last &= 0xffu8 << (8 - rem);
            }
        }
        Ok(Self { bytes, len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The packed image: `⌈len/8⌉` bytes, trailing pad bits zero.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader::with_len(&self.bytes, self.len)
    }

    pub fn get(&self, index: usize) -> Option<bool> {
        (index < self.len).then(|| self.bytes[index / 8] & (0x80 >> (index % 8)) != 0)
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.bytes[i / 8] & (0x80 >> (i % 8)) != 0)
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        let offset = self.len % 8;
        if offset == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> offset;
        }
        self.len += 1;
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn write_bits(&mut self, value: u64, width: u32) -> Result<(), BitError> {
        if width > 64 {
            return Err(BitError::WidthTooLarge(width));
        }
        if width < 64 && value >> width != 0 {
            return Err(BitError::ValueTooWide { value, width });
        }
        self.put_bits(value, width);
        Ok(())
    }

    fn put_bits(&mut self, value: u64, width: u32) {
        let mut remaining = width;
        while remaining > 0 {
            let offset = (self.len % 8) as u32;
            if offset == 0 {
                self.bytes.push(0);
            }
            let space = 8 - offset;
            let take = space.min(remaining);
            let chunk = (value >> (remaining - take)) & ((1u64 << take) - 1);
            *self.bytes.last_mut().unwrap() |= (chunk as u8) << (space - take);
            self.len += take as usize;
            remaining -= take;
        }
    }

    /// Elias gamma: `⌊log₂ n⌋` zeros, then `n` in `⌊log₂ n⌋ + 1` bits.
    pub fn write_gamma(&mut self, n: u64) -> Result<(), BitError> {
        if n == 0 {
            return Err(BitError::Zero);
        }
        let zeros = floor_log2(n);
        self.put_bits(0, zeros);
        self.put_bits(n, zeros + 1);
        Ok(())
    }

    /// Elias delta: gamma of the bit length, then the bits below the leading one.
    pub fn write_delta(&mut self, n: u64) -> Result<(), BitError> {
        if n == 0 {
            return Err(BitError::Zero);
        }
        let low = floor_log2(n);
        self.write_gamma(u64::from(low) + 1)?;
        self.put_bits(n & low_mask(low), low);
        Ok(())
    }

    pub fn append(&mut self, other: &BitStream) {
        if self.len % 8 == 0 {
            self.bytes.extend_from_slice(&other.bytes);
            self.len += other.len;
            return;
        }
        let full = other.len / 8;
        for &byte in &other.bytes[..full] {
            self.put_bits(u64::from(byte), 8);
        }
        let rem = (other.len % 8) as u32;
        if rem != 0 {
            self.put_bits(u64::from(other.bytes[full] >> (8 - rem)), rem);
        }
    }

    /// Zero-pads to a byte boundary.
    pub fn pad_to_byte(&mut self) {
        self.len = self.bytes.len() * 8;
    }
}

#[inline]
fn low_mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl fmt::Display for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitStream({}: \"{}\")", self.len, self)
    }
}

impl FromStr for BitStream {
    type Err = BitError;

    /// Parses a string of `0`/`1` characters; `_` and spaces are ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = BitStream::new();
        for c in s.chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                '_' | ' ' => {}
                other => return Err(BitError::BadChar(other)),
            }
        }
        Ok(out)
    }
}

impl FromIterator<bool> for BitStream {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut out = BitStream::new();
        for bit in iter {
            out.push(bit);
        }
        out
    }
}

/// Sequential cursor over a packed bit image.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    len: usize,
    pos: usize,
}

impl<'a> BitReader<'a> {
    /// Reads every bit of `bytes`.
    pub fn new(bytes: &'a [u8]) -> Self {
        Self::with_len(bytes, bytes.len() * 8)
    }

    pub fn with_len(bytes: &'a [u8], len: usize) -> Self {
        let len = len.min(bytes.len() * 8);
        Self { bytes, len, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.len - self.pos
    }

    pub fn bit_len(&self) -> usize {
        self.len
    }

    fn ensure(&self, needed: usize) -> Result<(), BitError> {
        if needed > self.remaining() {
            Err(BitError::Truncated {
                offset: self.pos,
                needed,
                available: self.remaining(),
            })
        } else {
            Ok(())
        }
    }

    #[inline]
    pub fn read_bit(&mut self) -> Result<bool, BitError> {
        self.ensure(1)?;
        let bit = self.bytes[self.pos / 8] & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Ok(bit)
    }

    pub fn read_bits(&mut self, width: u32) -> Result<u64, BitError> {
        if width > 64 {
            return Err(BitError::WidthTooLarge(width));
        }
        self.ensure(width as usize)?;
        let mut value = 0u64;
        let mut remaining = width;
        while remaining > 0 {
            let offset = (self.pos % 8) as u32;
            let space = 8 - offset;
            let take = space.min(remaining);
            let byte = u64::from(self.bytes[self.pos / 8]);
            let chunk = (byte >> (space - take)) & ((1u64 << take) - 1);
            value = (value << take) | chunk;
            self.pos += take as usize;
            remaining -= take;
        }
        Ok(value)
    }

    pub fn read_gamma(&mut self) -> Result<u64, BitError> {
        let start = self.pos;
        let mut zeros = 0u32;
        while !self.read_bit()? {
            zeros += 1;
            if zeros > 63 {
                return Err(BitError::Overflow(start));
            }
        }
        let low = self.read_bits(zeros)?;
        Ok((1u64 << zeros) | low)
    }

    pub fn read_delta(&mut self) -> Result<u64, BitError> {
        let start = self.pos;
        let width = self.read_gamma()?;
        if width > 64 {
            return Err(BitError::Overflow(start));
        }
        let low_width = (width - 1) as u32;
        let low = self.read_bits(low_width)?;
        Ok((1u64 << low_width) | low)
    }
}

/// Packs a bit sequence MSB-first, zero-padding the final byte.
pub fn pack(bits: &[bool]) -> Vec<u8> {
    bits.iter().copied().collect::<BitStream>().into_bytes()
}

/// Unpacks the first `len` bits of a byte image.
pub fn unpack(bytes: &[u8], len: usize) -> Result<Vec<bool>, BitError> {
    if len > bytes.len() * 8 {
        return Err(BitError::BadImage {
            bytes: bytes.len(),
            bits: len,
        });
    }
    let mut reader = BitReader::with_len(bytes, len);
    (0..len).map(|_| reader.read_bit()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> BitStream {
        s.parse().unwrap()
    }

    #[test]
    fn write_bits_examples() {
        let mut s = BitStream::new();
        s.write_bits(0, 0).unwrap();
        assert!(s.is_empty());
        s.write_bits(5, 3).unwrap();
        assert_eq!(s.to_string(), "101");
        let mut s = BitStream::new();
        s.write_bits(1, 4).unwrap();
        assert_eq!(s.to_string(), "0001");
    }

    #[test]
    fn write_bits_rejects_wide_values() {
        let mut s = BitStream::new();
        assert_eq!(
            s.write_bits(8, 3),
            Err(BitError::ValueTooWide { value: 8, width: 3 })
        );
        assert_eq!(s.write_bits(1, 65), Err(BitError::WidthTooLarge(65)));
        assert!(s.is_empty());
        s.write_bits(u64::MAX, 64).unwrap();
        assert_eq!(s.len(), 64);
        assert_eq!(s.reader().read_bits(64).unwrap(), u64::MAX);
    }

    #[test]
    fn read_bits_examples() {
        let s = bits("1011");
        let mut r = s.reader();
        assert_eq!(r.read_bits(0).unwrap(), 0);
        assert_eq!(r.position(), 0);
        assert_eq!(r.read_bits(3).unwrap(), 5);
        let mut r = s.reader();
        assert!(matches!(r.read_bits(8), Err(BitError::Truncated { .. })));
    }

    #[test]
    fn gamma_examples() {
        let cases = [(1, "1"), (5, "00101"), (8, "0001000")];
        for (n, expect) in cases {
            let mut s = BitStream::new();
            s.write_gamma(n).unwrap();
            assert_eq!(s.to_string(), expect);
            assert_eq!(s.reader().read_gamma().unwrap(), n);
        }
        assert_eq!(BitStream::new().write_gamma(0), Err(BitError::Zero));
        assert!(matches!(
            bits("0000").reader().read_gamma(),
            Err(BitError::Truncated { .. })
        ));
    }

    #[test]
    fn delta_examples() {
        let cases = [(1, "1"), (5, "01101"), (17, "001010001")];
        for (n, expect) in cases {
            let mut s = BitStream::new();
            s.write_delta(n).unwrap();
            assert_eq!(s.to_string(), expect);
            assert_eq!(s.len() as u32, delta_len(n));
            assert_eq!(s.reader().read_delta().unwrap(), n);
        }
    }

    #[test]
    fn gamma_and_delta_exhaustive_roundtrip() {
        for n in 1..=(1u64 << 20) {
            let mut s = BitStream::new();
            s.write_gamma(n).unwrap();
            assert_eq!(s.len() as u32, 2 * floor_log2(n) + 1);
            s.write_delta(n).unwrap();
            let mut r = s.reader();
            assert_eq!(r.read_gamma().unwrap(), n);
            assert_eq!(r.read_delta().unwrap(), n);
            assert_eq!(r.remaining(), 0);
        }
    }

    #[test]
    fn extreme_values() {
        let mut s = BitStream::new();
        s.write_gamma(u64::MAX).unwrap();
        s.write_delta(u64::MAX).unwrap();
        assert_eq!(s.len() as u32, gamma_len(u64::MAX) + delta_len(u64::MAX));
        let mut r = s.reader();
        assert_eq!(r.read_gamma().unwrap(), u64::MAX);
        assert_eq!(r.read_delta().unwrap(), u64::MAX);
    }

    #[test]
    fn gamma_rejects_overlong_prefix() {
        let s: BitStream = std::iter::repeat(false)
            .take(70)
            .chain(std::iter::once(true))
            .collect();
        assert_eq!(s.reader().read_gamma(), Err(BitError::Overflow(0)));
    }

    #[test]
    fn append_unaligned() {
        let mut a = bits("101");
        a.append(&bits("0110_1100_11"));
        assert_eq!(a.to_string(), "1010110110011");
        let mut b = BitStream::new();
        b.append(&bits("11"));
        assert_eq!(b.to_string(), "11");
    }

    #[test]
    fn padding_and_images() {
        let mut s = bits("1");
        assert_eq!(s.as_bytes(), &[0x80]);
        s.pad_to_byte();
        assert_eq!(s.len(), 8);
        let s = BitStream::from_bytes(vec![0xff], 3).unwrap();
        assert_eq!(s.as_bytes(), &[0xe0]);
        assert!(BitStream::from_bytes(vec![0, 0], 3).is_err());
        assert_eq!(pack(&[true, false, true]), vec![0xa0]);
        assert_eq!(unpack(&[0xa0], 3).unwrap(), vec![true, false, true]);
    }

    #[test]
    fn bounded_span_widths() {
        assert_eq!(bits_for_span(0), 0);
        assert_eq!(bits_for_span(1), 1);
        assert_eq!(bits_for_span(5), 3);
        assert_eq!(bits_for_span(7), 3);
        assert_eq!(bits_for_span(8), 4);
        assert_eq!(bits_for_span(u64::MAX), 64);
    }
}
