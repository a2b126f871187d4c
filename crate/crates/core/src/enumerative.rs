//! Enumerative coding of fixed-weight bit vectors.
//!
//! A length-`n` vector with `k` ones is represented by its lexicographic
//! index among all `C(n, k)` such vectors. Long vectors are cut into
//! windows of at most 64 bits so every binomial stays exact in `u64`; the
//! per-window weights are sent with a sum-split code that spends nothing on
//! empty or saturated regions.

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::bitio::{bits_for_span, BitError, BitReader, BitStream};

/// Largest window (and largest exact binomial row).
pub const MAX_WINDOW: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumError {
    #[error("binomial row {0} exceeds the 64-row table")]
    RowTooLarge(u64),
    #[error("rank {rank} out of range for length {len} weight {weight}")]
    InvalidRank { rank: u64, len: u32, weight: u32 },
    #[error("value {value} outside [{lo}, {hi}]")]
    OutOfRange { value: u64, lo: u64, hi: u64 },
    #[error("invalid chunk counts: {0}")]
    InvalidCounts(&'static str),
    #[error("window size {0} outside 1..=64")]
    InvalidWindow(u32),
    #[error("vector has weight {found}, expected {expected}")]
    WeightMismatch { expected: u64, found: u64 },
    #[error("vector has length {found}, expected {expected}")]
    LengthMismatch { expected: u64, found: u64 },
    #[error(transparent)]
    Bits(#[from] BitError),
}

struct BinomialTable {
    rows: Vec<[u64; 65]>,
}

impl BinomialTable {
    fn build() -> Self {
        let mut rows = vec![[0u64; 65]; 65];
        for n in 0..=64 {
            rows[n][0] = 1;
            for k in 1..=n {
                rows[n][k] = rows[n - 1][k - 1] + rows[n - 1][k];
            }
        }
        Self { rows }
    }
}

fn table() -> &'static BinomialTable {
    static TABLE: OnceLock<BinomialTable> = OnceLock::new();
    TABLE.get_or_init(BinomialTable::build)
}

#[inline]
fn choose(n: u32, k: u32) -> u64 {
    if k > n {
        0
    } else {
        table().rows[n as usize][k as usize]
    }
}

/// `C(n, k)` for `n ≤ 64`; zero when `k` is outside `0..=n`.
pub fn binom(n: u64, k: i64) -> Result<u64, EnumError> {
    if n > u64::from(MAX_WINDOW) {
        return Err(EnumError::RowTooLarge(n));
    }
    if k < 0 || k as u64 > n {
        return Ok(0);
    }
    Ok(choose(n as u32, k as u32))
}

/// A bit vector of at most 64 bits. The first (leftmost) bit is the most
/// significant of the low `len` bits of `bits`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeightedVector {
    len: u32,
    bits: u64,
}

impl WeightedVector {
    pub fn new(len: u32, bits: u64) -> Result<Self, EnumError> {
        if len > MAX_WINDOW {
            return Err(EnumError::RowTooLarge(u64::from(len)));
        }
        if len < 64 && bits >> len != 0 {
            return Err(EnumError::LengthMismatch {
                expected: u64::from(len),
                found: u64::from(64 - bits.leading_zeros()),
            });
        }
        Ok(Self { len, bits })
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Lexicographic index among vectors of the same length and weight.
    pub fn rank(&self) -> u64 {
        rank_bits(self.bits, self.len, self.weight())
    }
}

impl fmt::Display for WeightedVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.len).rev() {
            f.write_str(if self.bits >> i & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for WeightedVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeightedVector(\"{self}\")")
    }
}

impl std::str::FromStr for WeightedVector {
    type Err = EnumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() > MAX_WINDOW as usize {
            return Err(EnumError::RowTooLarge(s.len() as u64));
        }
        let mut bits = 0u64;
        for c in s.chars() {
            let bit = match c {
                '0' => 0,
                '1' => 1,
                other => return Err(BitError::BadChar(other).into()),
            };
            bits = bits << 1 | bit;
        }
        Self::new(s.len() as u32, bits)
    }
}

fn rank_bits(bits: u64, len: u32, weight: u32) -> u64 {
    let mut ones = weight;
    let mut rank = 0;
    for remaining in (1..=len).rev() {
        if ones == 0 {
            break;
        }
        if bits >> (remaining - 1) & 1 == 1 {
            rank += choose(remaining - 1, ones);
            ones -= 1;
        }
    }
    rank
}

/// Lexicographic rank of `vector` among all vectors of its length and weight.
pub fn rank(vector: &WeightedVector) -> u64 {
    vector.rank()
}

/// Inverse of [`rank`].
pub fn unrank(len: u32, weight: u32, rank: u64) -> Result<WeightedVector, EnumError> {
    if len > MAX_WINDOW {
        return Err(EnumError::RowTooLarge(u64::from(len)));
    }
    if rank >= choose(len, weight) {
        return Err(EnumError::InvalidRank { rank, len, weight });
    }
    let mut ones = weight;
    let mut rank = rank;
    let mut bits = 0u64;
    for remaining in (1..=len).rev() {
        if ones == 0 {
            break;
        }
        let below = choose(remaining - 1, ones);
        if rank >= below {
            rank -= below;
            bits |= 1 << (remaining - 1);
            ones -= 1;
        }
    }
    Ok(WeightedVector { len, bits })
}

/// Writes `value - lo` in `⌈log₂(hi − lo + 1)⌉` bits.
pub fn bounded_encode(out: &mut BitStream, value: u64, lo: u64, hi: u64) -> Result<(), EnumError> {
    if value < lo || value > hi {
        return Err(EnumError::OutOfRange { value, lo, hi });
    }
    out.write_bits(value - lo, bits_for_span(hi - lo))?;
    Ok(())
}

pub fn bounded_decode(input: &mut BitReader<'_>, lo: u64, hi: u64) -> Result<u64, EnumError> {
    debug_assert!(lo <= hi);
    let offset = input.read_bits(bits_for_span(hi - lo))?;
    let value = lo
        .checked_add(offset)
        .filter(|&v| v <= hi)
        .ok_or(EnumError::OutOfRange {
            value: offset,
            lo,
            hi,
        })?;
    Ok(value)
}

fn prefix_sums(capacities: &[u64]) -> Result<Vec<u64>, EnumError> {
    let mut sums = Vec::with_capacity(capacities.len() + 1);
    let mut acc = 0u64;
    sums.push(0);
    for &cap in capacities {
        acc = acc
            .checked_add(cap)
            .ok_or(EnumError::InvalidCounts("capacity overflow"))?;
        sums.push(acc);
    }
    Ok(sums)
}

/// Codes per-chunk counts that are known to sum to `total` by recursive
/// halving: for each segment only the left half's sum is sent, in the range
/// left open by the capacities and the segment sum.
pub fn sum_split_encode(
    out: &mut BitStream,
    capacities: &[u64],
    counts: &[u64],
    total: u64,
) -> Result<(), EnumError> {
    if capacities.len() != counts.len() {
        return Err(EnumError::InvalidCounts("count and capacity lists differ in length"));
    }
    if counts.iter().zip(capacities).any(|(c, cap)| c > cap) {
        return Err(EnumError::InvalidCounts("count exceeds chunk capacity"));
    }
    let caps = prefix_sums(capacities)?;
    let sums = prefix_sums(counts)?;
    if sums[counts.len()] != total {
        return Err(EnumError::InvalidCounts("counts do not sum to the total"));
    }
    if capacities.is_empty() {
        return Ok(());
    }
    let mut stack = vec![(0usize, capacities.len())];
    while let Some((start, end)) = stack.pop() {
        let t = sums[end] - sums[start];
        if end - start == 1 || t == 0 || t == caps[end] - caps[start] {
            continue;
        }
        let mid = start + (end - start) / 2;
        let cap_left = caps[mid] - caps[start];
        let cap_right = caps[end] - caps[mid];
        let left = sums[mid] - sums[start];
        bounded_encode(out, left, t.saturating_sub(cap_right), cap_left.min(t))?;
        stack.push((mid, end));
        stack.push((start, mid));
    }
    Ok(())
}

pub fn sum_split_decode(
    input: &mut BitReader<'_>,
    capacities: &[u64],
    total: u64,
) -> Result<Vec<u64>, EnumError> {
    let caps = prefix_sums(capacities)?;
    if total > caps[capacities.len()] {
        return Err(EnumError::InvalidCounts("total exceeds combined capacity"));
    }
    let mut counts = vec![0u64; capacities.len()];
    if capacities.is_empty() {
        return if total == 0 {
            Ok(counts)
        } else {
            Err(EnumError::InvalidCounts("nonzero total over no chunks"))
        };
    }
    let mut stack = vec![(0usize, capacities.len(), total)];
    while let Some((start, end, t)) = stack.pop() {
        if t == 0 {
            continue;
        }
        if t == caps[end] - caps[start] {
            counts[start..end].copy_from_slice(&capacities[start..end]);
            continue;
        }
        if end - start == 1 {
            counts[start] = t;
            continue;
        }
        let mid = start + (end - start) / 2;
        let cap_left = caps[mid] - caps[start];
        let cap_right = caps[end] - caps[mid];
        let left = bounded_decode(input, t.saturating_sub(cap_right), cap_left.min(t))?;
        stack.push((mid, end, t - left));
        stack.push((start, mid, left));
    }
    Ok(counts)
}

/// Chunk sizes for a node of `len` elements: all `window`, with a shorter
/// final remainder.
pub fn window_plan(len: u64, window: u32) -> Result<Vec<u64>, EnumError> {
    if window == 0 || window > MAX_WINDOW {
        return Err(EnumError::InvalidWindow(window));
    }
    let window = u64::from(window);
    let full = len / window;
    let mut plan = vec![window; full as usize];
    if len % window != 0 {
        plan.push(len % window);
    }
    Ok(plan)
}

/// Bits taken by a rank among `C(len, weight)` vectors.
#[inline]
fn rank_width(len: u32, weight: u32) -> u32 {
    bits_for_span(choose(len, weight).saturating_sub(1))
}

/// Codes one decision vector of `len` bits with `ones` set: the sum-split
/// code of the per-window weights, then each window's rank.
pub fn node_vector_encode(
    out: &mut BitStream,
    bits: &BitStream,
    len: u64,
    ones: u64,
    window: u32,
) -> Result<(), EnumError> {
    if bits.len() as u64 != len {
        return Err(EnumError::LengthMismatch {
            expected: len,
            found: bits.len() as u64,
        });
    }
    if bits.count_ones() as u64 != ones {
        return Err(EnumError::WeightMismatch {
            expected: ones,
            found: bits.count_ones() as u64,
        });
    }
    let plan = window_plan(len, window)?;
    if ones == 0 || ones == len {
        return Ok(());
    }
    let mut reader = bits.reader();
    let mut chunks = Vec::with_capacity(plan.len());
    for &width in &plan {
        chunks.push(reader.read_bits(width as u32)?);
    }
    let counts: Vec<u64> = chunks.iter().map(|c| u64::from(c.count_ones())).collect();
    sum_split_encode(out, &plan, &counts, ones)?;
    for ((&width, &chunk), &weight) in plan.iter().zip(&chunks).zip(&counts) {
        let (width, weight) = (width as u32, weight as u32);
        out.write_bits(rank_bits(chunk, width, weight), rank_width(width, weight))?;
    }
    Ok(())
}

pub fn node_vector_decode(
    input: &mut BitReader<'_>,
    len: u64,
    ones: u64,
    window: u32,
) -> Result<BitStream, EnumError> {
    if ones > len {
        return Err(EnumError::InvalidCounts("weight exceeds vector length"));
    }
    let plan = window_plan(len, window)?;
    let mut out = BitStream::with_capacity(len as usize);
    if ones == 0 || ones == len {
        let fill = if ones == 0 { 0 } else { u64::MAX };
        for &width in &plan {
            out.write_bits(fill >> (64 - width), width as u32)?;
        }
        return Ok(out);
    }
    let counts = sum_split_decode(input, &plan, ones)?;
    for (&width, &weight) in plan.iter().zip(&counts) {
        let (width, weight) = (width as u32, weight as u32);
        let rank = input.read_bits(rank_width(width, weight))?;
        let chunk = unrank(width, weight, rank)?;
        out.write_bits(chunk.bits(), width)?;
    }
    Ok(out)
}
