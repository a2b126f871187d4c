//! The compressor: a sequence is described by the decisions a Fano-pivot
//! quicksort makes while sorting it, plus a description of the sorted data.
//!
//! Two container modes share the same pivot tree:
//!
//! * [`Mode::Raw`] stores every comparison as one bit and the sorted data as
//!   gamma-coded differences. The decoder needs no symbol counts.
//! * [`Mode::Enum`] stores the symbol table up front, so node sizes are
//!   implied and each decision vector is coded enumeratively in about
//!   `log₂ C(n, n_r)` bits.

mod container;
mod permutation;

use thiserror::Error;

use crate::bitio::BitError;
use crate::enumerative::EnumError;
use crate::fano_tree::{SymbolTable, TreeError};

pub use container::{
    decode_counts, decode_detailed, encode_container, encode_counts, encode_enum_body,
    encode_raw_body, DecodedContainer, Sections,
};
pub use permutation::{apply_inverse, record_decisions, replay_decisions, Permutation};

pub const MAGIC: [u8; 4] = *b"PVC1";

/// Deepest allowed nesting of count containers.
pub const MAX_COUNT_DEPTH: u32 = 16;

pub const DEFAULT_WINDOW: u32 = 64;

/// Largest symbol value the container can carry (symbols are gamma-coded as `s + 1`).
pub const MAX_SYMBOL: u64 = u64::MAX - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Raw = 0,
    Enum = 1,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Raw => "raw",
            Mode::Enum => "enum",
        }
    }
}

impl TryFrom<u8> for Mode {
    type Error = CodecError;

    fn try_from(byte: u8) -> Result<Self, Self::Error> {
        match byte {
            0 => Ok(Mode::Raw),
            1 => Ok(Mode::Enum),
            other => Err(CodecError::UnknownMode(other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("bad magic bytes {0:02x?}, expected \"PVC1\"")]
    BadMagic([u8; 4]),
    #[error("unknown mode byte {0:#04x}")]
    UnknownMode(u8),
    #[error("window size {0} outside 1..=64")]
    InvalidWindow(u64),
    #[error("symbol {0} exceeds the largest codable symbol")]
    SymbolTooLarge(u64),
    #[error("declared length {len} exceeds the decode limit of {limit}")]
    TooLarge { len: u64, limit: u64 },
    #[error("count containers nested deeper than {MAX_COUNT_DEPTH}")]
    TooDeep,
    #[error("corrupt stream: {0}")]
    Corrupt(String),
    #[error("{found} trailing bits after the container")]
    Trailing { found: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Bits(#[from] BitError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Enum(EnumError),
}

impl From<EnumError> for CodecError {
    fn from(err: EnumError) -> Self {
        match err {
            EnumError::Bits(bits) => CodecError::Bits(bits),
            other => CodecError::Enum(other),
        }
    }
}

/// Bounds applied while decoding untrusted input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeLimits {
    /// Largest sequence length a container may declare.
    pub max_len: u64,
}

impl Default for DecodeLimits {
    fn default() -> Self {
        Self { max_len: 1 << 28 }
    }
}

/// Sorted distinct symbols with their counts.
pub fn histogram(values: &[u64]) -> SymbolTable {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let mut symbols = Vec::new();
    let mut counts: Vec<u64> = Vec::new();
    for value in sorted {
        if symbols.last() == Some(&value) {
            *counts.last_mut().unwrap() += 1;
        } else {
            symbols.push(value);
            counts.push(1);
        }
    }
    SymbolTable::new(symbols, counts).expect("histogram of a sorted sequence is a valid table")
}

/// Compresses `values` into a byte-aligned container.
pub fn compress(values: &[u64], mode: Mode, window: u32) -> Result<Vec<u8>, CodecError> {
    let mut bits = encode_container(values, mode, window, 0)?;
    bits.pad_to_byte();
    Ok(bits.into_bytes())
}

pub fn decompress(bytes: &[u8]) -> Result<Vec<u64>, CodecError> {
    decompress_with_limits(bytes, &DecodeLimits::default())
}

pub fn decompress_with_limits(bytes: &[u8], limits: &DecodeLimits) -> Result<Vec<u64>, CodecError> {
    Ok(decode_detailed(bytes, limits)?.values)
}
