//! Bit-exact container layout.
//!
//! ```text
//! "PVC1" | mode byte | [ENUM: gamma(W)] | delta(N + 1) | body | zero pad
//!
//! RAW body:  region grammar in pre-order, then gamma(s0 + 1), gamma(d + 1)...
//!            region of size >= 2: flag 1 (all equal) or flag 0 + decision bits
//! ENUM body: gamma(M), gamma(s0 + 1), gamma(s_i - s_{i-1})...
//!            count section: flag 0 + M gamma counts | flag 1 + nested container
//!            node vectors in pre-order, windowed enumerative code
//! ```
//!
//! Nested count containers are embedded bit-aligned without padding.

use crate::bitio::{BitError, BitReader, BitStream};
use crate::enumerative::{node_vector_decode, node_vector_encode, MAX_WINDOW};
use crate::fano_tree::{FanoTree, SymbolTable};

use super::permutation::{apply_inverse, record_decisions, replay_decisions, Permutation};
use super::{histogram, CodecError, DecodeLimits, Mode, MAGIC, MAX_COUNT_DEPTH, MAX_SYMBOL};

/// Bit counts per container section. They sum to the container's bit length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Sections {
    pub header: u64,
    pub symbols: u64,
    pub counts: u64,
    pub decisions: u64,
    pub sorted: u64,
    pub padding: u64,
}

impl Sections {
    pub fn total(&self) -> u64 {
        self.header + self.symbols + self.counts + self.decisions + self.sorted + self.padding
    }
}

/// Everything recovered while decoding a container.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedContainer {
    pub mode: Mode,
    /// Window size; only ENUM containers carry one.
    pub window: Option<u32>,
    pub values: Vec<u64>,
    pub table: SymbolTable,
    pub sections: Sections,
    /// RAW leaf/internal flag bits, included in `sections.decisions`.
    pub flag_bits: u64,
}

fn check_window(window: u32) -> Result<(), CodecError> {
    if window == 0 || window > MAX_WINDOW {
        return Err(CodecError::InvalidWindow(u64::from(window)));
    }
    Ok(())
}

/// Encodes a full (unpadded) container. `depth` is the count-nesting level,
/// zero for a top-level container.
pub fn encode_container(
    values: &[u64],
    mode: Mode,
    window: u32,
    depth: u32,
) -> Result<BitStream, CodecError> {
    check_window(window)?;
    if let Some(&bad) = values.iter().find(|&&v| v > MAX_SYMBOL) {
        return Err(CodecError::SymbolTooLarge(bad));
    }
    let mut out = BitStream::new();
    for byte in MAGIC {
        out.write_bits(u64::from(byte), 8)?;
    }
    out.write_bits(mode as u64, 8)?;
    if mode == Mode::Enum {
        out.write_gamma(u64::from(window))?;
    }
    out.write_delta(values.len() as u64 + 1)?;
    if values.is_empty() {
        return Ok(out);
    }
    let table = histogram(values);
    let tree = FanoTree::build(&table)?;
    let (vectors, _) = record_decisions(values, &tree)?;
    match mode {
        Mode::Raw => encode_raw_body(&mut out, &table, &tree, &vectors)?,
        Mode::Enum => encode_enum_body(&mut out, &table, &tree, &vectors, window, depth)?,
    }
    Ok(out)
}

pub fn encode_raw_body(
    out: &mut BitStream,
    table: &SymbolTable,
    tree: &FanoTree,
    vectors: &[BitStream],
) -> Result<(), CodecError> {
    let mut pending = vectors.iter();
    for node in tree.nodes() {
        if node.size < 2 {
            continue;
        }
        out.push(node.is_leaf());
        if !node.is_leaf() {
            let bits = pending
                .next()
                .ok_or_else(|| CodecError::Inconsistent("missing decision vector".into()))?;
            out.append(bits);
        }
    }
    let mut previous = None;
    for (&symbol, &count) in table.symbols().iter().zip(table.counts()) {
        match previous {
            None => out.write_gamma(symbol + 1)?,
            Some(prev) => out.write_gamma(symbol - prev + 1)?,
        }
        for _ in 1..count {
            out.write_gamma(1)?;
        }
        previous = Some(symbol);
    }
    Ok(())
}

pub fn encode_enum_body(
    out: &mut BitStream,
    table: &SymbolTable,
    tree: &FanoTree,
    vectors: &[BitStream],
    window: u32,
    depth: u32,
) -> Result<(), CodecError> {
    let symbols = table.symbols();
    out.write_gamma(symbols.len() as u64)?;
    out.write_gamma(symbols[0] + 1)?;
    for pair in symbols.windows(2) {
        out.write_gamma(pair[1] - pair[0])?;
    }
    encode_counts(out, table.counts(), window, depth)?;
    let internal: Vec<_> = tree.internal_preorder().collect();
    if internal.len() != vectors.len() {
        return Err(CodecError::Inconsistent(format!(
            "{} decision vectors for {} internal nodes",
            vectors.len(),
            internal.len()
        )));
    }
    for (node, bits) in internal.into_iter().zip(vectors) {
        let right = node.split.map_or(0, |s| s.right_size);
        node_vector_encode(out, bits, node.size, right, window)?;
    }
    Ok(())
}

/// Writes the count section: a flag bit, then either the counts directly as
/// gamma codes or a nested container over the count sequence, whichever is
/// strictly shorter (direct on ties, and always direct at the depth cap).
pub fn encode_counts(
    out: &mut BitStream,
    counts: &[u64],
    window: u32,
    depth: u32,
) -> Result<(), CodecError> {
    let mut direct = BitStream::new();
    for &count in counts {
        direct.write_gamma(count)?;
    }
    if depth < MAX_COUNT_DEPTH {
        let nested = encode_container(counts, Mode::Enum, window, depth + 1)?;
        if nested.len() < direct.len() {
            out.push(true);
            out.append(&nested);
            return Ok(());
        }
    }
    out.push(false);
    out.append(&direct);
    Ok(())
}

pub fn decode_counts(
    input: &mut BitReader<'_>,
    distinct: u64,
    depth: u32,
    limits: &DecodeLimits,
) -> Result<Vec<u64>, CodecError> {
    if input.read_bit()? {
        if depth >= MAX_COUNT_DEPTH {
            return Err(CodecError::TooDeep);
        }
        let nested_limits = DecodeLimits {
            max_len: distinct.min(limits.max_len),
        };
        let nested = decode_container(input, depth + 1, &nested_limits)?;
        if nested.values.len() as u64 != distinct {
            return Err(CodecError::Corrupt(format!(
                "nested count container holds {} counts, expected {distinct}",
                nested.values.len()
            )));
        }
        if nested.values.contains(&0) {
            return Err(CodecError::Corrupt("zero symbol count".into()));
        }
        Ok(nested.values)
    } else {
        ensure_bits(input, distinct)?;
        (0..distinct).map(|_| Ok(input.read_gamma()?)).collect()
    }
}

/// Fails early when `needed` one-bit-minimum codes cannot fit in the rest of
/// the stream, so declared lengths never drive allocation past the input size.
fn ensure_bits(input: &BitReader<'_>, needed: u64) -> Result<(), CodecError> {
    if needed > input.remaining() as u64 {
        return Err(BitError::Truncated {
            offset: input.position(),
            needed: usize::try_from(needed).unwrap_or(usize::MAX),
            available: input.remaining(),
        }
        .into());
    }
    Ok(())
}

struct Decoded {
    mode: Mode,
    window: Option<u32>,
    values: Vec<u64>,
    table: SymbolTable,
    sections: Sections,
    flag_bits: u64,
}

fn read_header(
    input: &mut BitReader<'_>,
    limits: &DecodeLimits,
) -> Result<(Mode, Option<u32>, u64), CodecError> {
    let mut magic = [0u8; 4];
    for byte in &mut magic {
        *byte = input.read_bits(8)? as u8;
    }
    if magic != MAGIC {
        return Err(CodecError::BadMagic(magic));
    }
    let mode = Mode::try_from(input.read_bits(8)? as u8)?;
    let window = match mode {
        Mode::Raw => None,
        Mode::Enum => {
            let w = input.read_gamma()?;
            if w > u64::from(MAX_WINDOW) {
                return Err(CodecError::InvalidWindow(w));
            }
            Some(w as u32)
        }
    };
    let len = input.read_delta()? - 1;
    if len > limits.max_len {
        return Err(CodecError::TooLarge {
            len,
            limit: limits.max_len,
        });
    }
    Ok((mode, window, len))
}

fn decode_container(
    input: &mut BitReader<'_>,
    depth: u32,
    limits: &DecodeLimits,
) -> Result<Decoded, CodecError> {
    let start = input.position();
    let (mode, window, len) = read_header(input, limits)?;
    let mut decoded = Decoded {
        mode,
        window,
        values: Vec::new(),
        table: SymbolTable::default(),
        sections: Sections {
            header: (input.position() - start) as u64,
            ..Sections::default()
        },
        flag_bits: 0,
    };
    if len == 0 {
        return Ok(decoded);
    }
    match (mode, window) {
        (Mode::Enum, Some(w)) => decode_enum_body(input, len, w, depth, limits, &mut decoded)?,
        _ => decode_raw_body(input, len, &mut decoded)?,
    }
    Ok(decoded)
}

fn read_vector(input: &mut BitReader<'_>, len: usize) -> Result<BitStream, CodecError> {
    let mut bits = BitStream::with_capacity(len);
    let mut left = len;
    while left > 0 {
        let take = left.min(64) as u32;
        bits.write_bits(input.read_bits(take)?, take)?;
        left -= take as usize;
    }
    Ok(bits)
}

fn decode_raw_body(
    input: &mut BitReader<'_>,
    len: u64,
    decoded: &mut Decoded,
) -> Result<(), CodecError> {
    // every element costs at least one bit in the sorted section
    ensure_bits(input, len)?;
    let n = len as usize;
    let start = input.position();

    let mut forward = vec![0usize; n];
    let mut next = 0usize;
    let mut shapes: Vec<(u64, Option<u64>)> = Vec::new();
    let mut leaves: Vec<(usize, usize)> = Vec::new();
    let mut stack = vec![(0..n).collect::<Vec<usize>>()];
    while let Some(indices) = stack.pop() {
        let size = indices.len();
        let leaf = if size == 1 {
            true
        } else {
            decoded.flag_bits += 1;
            input.read_bit()?
        };
        if leaf {
            shapes.push((size as u64, None));
            leaves.push((next, size));
            for index in indices {
                forward[index] = next;
                next += 1;
            }
            continue;
        }
        let bits = read_vector(input, size)?;
        let ones = bits.count_ones();
        if ones == 0 || ones == size {
            return Err(CodecError::Corrupt("decision vector leaves a side empty".into()));
        }
        shapes.push((size as u64, Some(ones as u64)));
        let mut left = Vec::with_capacity(size - ones);
        let mut right = Vec::with_capacity(ones);
        for (index, bit) in indices.into_iter().zip(bits.iter()) {
            if bit {
                right.push(index);
            } else {
                left.push(index);
            }
        }
        stack.push(right);
        stack.push(left);
    }
    decoded.sections.decisions = (input.position() - start) as u64;

    let start = input.position();
    ensure_bits(input, len)?;
    let mut sorted = Vec::with_capacity(n);
    let mut previous: Option<u64> = None;
    for _ in 0..n {
        let code = input.read_gamma()?;
        let value = match previous {
            None => code - 1,
            Some(prev) => prev
                .checked_add(code - 1)
                .filter(|&v| v <= MAX_SYMBOL)
                .ok_or_else(|| CodecError::Corrupt("sorted value overflows".into()))?,
        };
        sorted.push(value);
        previous = Some(value);
    }
    decoded.sections.sorted = (input.position() - start) as u64;

    let mut symbols = Vec::with_capacity(leaves.len());
    let mut counts = Vec::with_capacity(leaves.len());
    for &(first, size) in &leaves {
        let run = &sorted[first..first + size];
        if run.iter().any(|&v| v != run[0]) {
            return Err(CodecError::Corrupt("unequal values inside a leaf".into()));
        }
        if symbols.last().is_some_and(|&s| s >= run[0]) {
            return Err(CodecError::Corrupt("adjacent leaves share a value".into()));
        }
        symbols.push(run[0]);
        counts.push(size as u64);
    }
    let table = SymbolTable::new(symbols, counts)?;
    let tree = FanoTree::build(&table)?;
    let expected = tree
        .nodes()
        .iter()
        .map(|node| (node.size, node.split.map(|s| s.right_size)));
    if !expected.eq(shapes.iter().copied()) {
        return Err(CodecError::Corrupt(
            "partition structure does not match the symbol counts".into(),
        ));
    }
    let perm = Permutation::from_forward(forward)?;
    decoded.values = apply_inverse(&sorted, &perm)?;
    decoded.table = table;
    Ok(())
}

fn decode_enum_body(
    input: &mut BitReader<'_>,
    len: u64,
    window: u32,
    depth: u32,
    limits: &DecodeLimits,
    decoded: &mut Decoded,
) -> Result<(), CodecError> {
    let start = input.position();
    let distinct = input.read_gamma()?;
    if distinct > len {
        return Err(CodecError::Corrupt(format!(
            "{distinct} distinct symbols in a sequence of {len}"
        )));
    }
    ensure_bits(input, distinct)?;
    let mut symbols = Vec::with_capacity(distinct as usize);
    let mut previous = input.read_gamma()? - 1;
    symbols.push(previous);
    for _ in 1..distinct {
        let gap = input.read_gamma()?;
        previous = previous
            .checked_add(gap)
            .filter(|&v| v <= MAX_SYMBOL)
            .ok_or_else(|| CodecError::Corrupt("symbol value overflows".into()))?;
        symbols.push(previous);
    }
    decoded.sections.symbols = (input.position() - start) as u64;

    let start = input.position();
    let counts = decode_counts(input, distinct, depth, limits)?;
    let total = counts.iter().try_fold(0u64, |acc, &c| acc.checked_add(c));
    if total != Some(len) {
        return Err(CodecError::Corrupt(format!(
            "symbol counts sum to {total:?}, header declares {len}"
        )));
    }
    decoded.sections.counts = (input.position() - start) as u64;

    let start = input.position();
    let table = SymbolTable::new(symbols, counts)?;
    let tree = FanoTree::build(&table)?;
    let mut vectors = Vec::with_capacity(table.distinct() - 1);
    for node in tree.internal_preorder() {
        let right = node.split.map_or(0, |s| s.right_size);
        vectors.push(node_vector_decode(input, node.size, right, window)?);
    }
    decoded.sections.decisions = (input.position() - start) as u64;

    let perm = replay_decisions(&vectors, &tree)?;
    let mut sorted = Vec::with_capacity(len as usize);
    for (&symbol, &count) in table.symbols().iter().zip(table.counts()) {
        sorted.extend(std::iter::repeat(symbol).take(count as usize));
    }
    decoded.values = apply_inverse(&sorted, &perm)?;
    decoded.table = table;
    Ok(())
}

/// Decodes a byte-aligned top-level container and reports its layout.
///
/// Padding must be zero and no bytes may follow the padded container.
pub fn decode_detailed(bytes: &[u8], limits: &DecodeLimits) -> Result<DecodedContainer, CodecError> {
    let mut input = BitReader::new(bytes);
    let decoded = decode_container(&mut input, 0, limits)?;
    let padding = input.remaining();
    if padding >= 8 {
        return Err(CodecError::Trailing { found: padding });
    }
    if input.read_bits(padding as u32)? != 0 {
        return Err(CodecError::Corrupt("nonzero padding bits".into()));
    }
    let mut sections = decoded.sections;
    sections.padding = padding as u64;
    Ok(DecodedContainer {
        mode: decoded.mode,
        window: decoded.window,
        values: decoded.values,
        table: decoded.table,
        sections,
        flag_bits: decoded.flag_bits,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{compress, decompress, DEFAULT_WINDOW};
    use super::*;
    use crate::bitio::{delta_len, gamma_len};

    fn body_after_header(bytes: &[u8], mode: Mode) -> (BitStream, usize) {
        let mut header = BitStream::new();
        for b in MAGIC {
            header.write_bits(u64::from(b), 8).unwrap();
        }
        header.write_bits(mode as u64, 8).unwrap();
        let all: BitStream = BitStream::from_bytes(bytes.to_vec(), bytes.len() * 8).unwrap();
        (all, header.len())
    }

    fn bits_from(all: &BitStream, from: usize, to: usize) -> String {
        all.to_string()[from..to].to_string()
    }

    #[test]
    fn empty_containers() {
        let raw = compress(&[], Mode::Raw, DEFAULT_WINDOW).unwrap();
        assert_eq!(raw, vec![b'P', b'V', b'C', b'1', 0, 0x80]);
        let enm = compress(&[], Mode::Enum, DEFAULT_WINDOW).unwrap();
        // gamma(64) = 13 bits, delta(1) = 1 bit
        assert_eq!(enm.len(), 7);
        assert_eq!(&enm[..5], b"PVC1\x01");
        assert!(decompress(&raw).unwrap().is_empty());
        assert!(decompress(&enm).unwrap().is_empty());
    }

    #[test]
    fn raw_single_and_pair() {
        let bytes = compress(&[5], Mode::Raw, 64).unwrap();
        let (all, h) = body_after_header(&bytes, Mode::Raw);
        // delta(2) = "0100", gamma(6) = "00110"
        assert_eq!(bits_from(&all, h, h + 9), "010000110");

        let bytes = compress(&[5, 5], Mode::Raw, 64).unwrap();
        let (all, h) = body_after_header(&bytes, Mode::Raw);
        // delta(3) = "0101", flag "1", gamma(6), gamma(1)
        assert_eq!(bits_from(&all, h, h + 4 + 1 + 5 + 1), "0101".to_string() + "1" + "00110" + "1");
    }

    #[test]
    fn raw_running_example() {
        let bytes = compress(&[1, 0, 1], Mode::Raw, 64).unwrap();
        let (all, h) = body_after_header(&bytes, Mode::Raw);
        // delta(4) = "01100"; flag 0 + "101"; right region [b,b] flag 1;
        // sorted [0,1,1]: gamma(1), gamma(2), gamma(1)
        let expect = "01100".to_string() + "0101" + "1" + "1" + "010" + "1";
        assert_eq!(bits_from(&all, h, h + expect.len()), expect);
        let detail = decode_detailed(&bytes, &DecodeLimits::default()).unwrap();
        assert_eq!(detail.values, vec![1, 0, 1]);
        assert_eq!(detail.flag_bits, 2);
        assert_eq!(detail.sections.decisions, 5);
        assert_eq!(detail.sections.sorted, 5);
    }

    #[test]
    fn enum_running_example() {
        let bytes = compress(&[1, 0, 1], Mode::Enum, 64).unwrap();
        let (all, h) = body_after_header(&bytes, Mode::Enum);
        // gamma(64), delta(4), gamma(M=2), gamma(0+1), gamma(1),
        // counts direct: flag 0, gamma(1), gamma(2); root rank("101") = 1 in 2 bits
        let expect = "0000001000000".to_string()
            + "01100"
            + "010"
            + "1"
            + "1"
            + "0"
            + "1"
            + "010"
            + "01";
        assert_eq!(bits_from(&all, h, h + expect.len()), expect);
        let detail = decode_detailed(&bytes, &DecodeLimits::default()).unwrap();
        assert_eq!(detail.values, vec![1, 0, 1]);
        assert_eq!(detail.sections.decisions, 2);
        assert_eq!(detail.sections.total(), bytes.len() as u64 * 8);
    }

    #[test]
    fn enum_all_equal_has_no_decisions() {
        let bytes = compress(&[5; 4], Mode::Enum, 64).unwrap();
        let detail = decode_detailed(&bytes, &DecodeLimits::default()).unwrap();
        assert_eq!(detail.values, vec![5; 4]);
        assert_eq!(detail.sections.decisions, 0);
        assert_eq!(detail.table.counts(), &[4]);
        let long = compress(&[5; 4096], Mode::Enum, 64).unwrap();
        assert!(long.len() <= 32, "{} bytes", long.len());
    }

    #[test]
    fn counts_single() {
        let mut out = BitStream::new();
        encode_counts(&mut out, &[1], 64, 0).unwrap();
        assert_eq!(out.to_string(), "01");
        let got = decode_counts(&mut out.reader(), 1, 0, &DecodeLimits::default()).unwrap();
        assert_eq!(got, vec![1]);
    }

    #[test]
    fn counts_flat_prefers_recursion() {
        let counts = vec![1u64; 256];
        let mut out = BitStream::new();
        encode_counts(&mut out, &counts, 64, 0).unwrap();
        assert_eq!(out.get(0), Some(true));
        assert!(out.len() < 1 + 256);
        let got = decode_counts(&mut out.reader(), 256, 0, &DecodeLimits::default()).unwrap();
        assert_eq!(got, counts);
    }

    #[test]
    fn counts_roundtrip_and_depth_cap() {
        let counts = [3u64, 1, 4, 1, 5];
        for depth in [0, MAX_COUNT_DEPTH - 1, MAX_COUNT_DEPTH] {
            let mut out = BitStream::new();
            encode_counts(&mut out, &counts, 64, depth).unwrap();
            let mut r = out.reader();
            assert_eq!(decode_counts(&mut r, 5, depth, &DecodeLimits::default()).unwrap(), counts);
            assert_eq!(r.remaining(), 0);
        }
        let mut out = BitStream::new();
        encode_counts(&mut out, &[1; 300], 64, MAX_COUNT_DEPTH).unwrap();
        assert_eq!(out.get(0), Some(false));
        let mut forced: BitStream = "1".parse().unwrap();
        forced.append(&encode_container(&[1; 3], Mode::Enum, 64, 1).unwrap());
        assert_eq!(
            decode_counts(&mut forced.reader(), 3, MAX_COUNT_DEPTH, &DecodeLimits::default()),
            Err(CodecError::TooDeep)
        );
    }

    #[test]
    fn direct_count_payload_bound() {
        let counts = [1u64, 7, 100, 3];
        let n: u64 = counts.iter().sum();
        let direct: u32 = counts.iter().map(|&c| gamma_len(c)).sum();
        assert!(u64::from(direct) <= counts.len() as u64 * u64::from(gamma_len(n)));
        assert_eq!(delta_len(n + 1), gamma_len(7) + 6);
    }

    #[test]
    fn rejects_bad_headers() {
        let mut bytes = compress(&[1, 2, 3], Mode::Raw, 64).unwrap();
        bytes[0] = b'X';
        let err = decompress(&bytes).unwrap_err();
        assert!(matches!(err, CodecError::BadMagic(_)));
        assert!(err.to_string().contains("magic"));

        let mut bytes = compress(&[1, 2, 3], Mode::Raw, 64).unwrap();
        bytes[4] = 9;
        assert_eq!(decompress(&bytes), Err(CodecError::UnknownMode(9)));

        assert!(matches!(decompress(b"PV"), Err(CodecError::Bits(BitError::Truncated { .. }))));
    }

    #[test]
    fn rejects_truncation_and_trailing_bytes() {
        let data: Vec<u64> = (0..200).map(|i| (i * 7 % 13) as u64).collect();
        for mode in [Mode::Raw, Mode::Enum] {
            let bytes = compress(&data, mode, 8).unwrap();
            let err = decompress(&bytes[..bytes.len() - 3]).unwrap_err();
            assert!(err.to_string().contains("truncated"), "{mode:?}: {err}");
            let mut long = bytes.clone();
            long.push(0);
            assert!(matches!(decompress(&long), Err(CodecError::Trailing { .. })));
        }
    }

    #[test]
    fn rejects_oversized_declarations() {
        let bytes = compress(&[0; 100], Mode::Enum, 64).unwrap();
        let limits = DecodeLimits { max_len: 50 };
        assert_eq!(
            decode_detailed(&bytes, &limits).unwrap_err(),
            CodecError::TooLarge { len: 100, limit: 50 }
        );
    }

    #[test]
    fn rejects_invalid_window() {
        assert_eq!(compress(&[1], Mode::Enum, 0), Err(CodecError::InvalidWindow(0)));
        assert_eq!(compress(&[1], Mode::Raw, 65), Err(CodecError::InvalidWindow(65)));
        assert_eq!(
            compress(&[u64::MAX], Mode::Raw, 64),
            Err(CodecError::SymbolTooLarge(u64::MAX))
        );
    }

    #[test]
    fn wide_symbols_roundtrip() {
        let data = vec![MAX_SYMBOL, 0, 1 << 40, MAX_SYMBOL, 3];
        for mode in [Mode::Raw, Mode::Enum] {
            let bytes = compress(&data, mode, 64).unwrap();
            assert_eq!(decompress(&bytes).unwrap(), data);
        }
    }
}
