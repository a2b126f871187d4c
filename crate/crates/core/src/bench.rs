//! Rate sweeps over synthetic sources.
//!
//! Columns: `raw_bits_per_symbol` is the RAW container's header plus decision
//! section (the sorted permutation as recorded quicksort comparisons) per
//! symbol; `enum_bits_per_symbol` is the whole ENUM container per symbol.

use std::io::{self, Write};

use crate::codec::{compress, CodecError, Mode};
use crate::corpus::{generate, CorpusError, Distribution};
use crate::stats::inspect;

pub const BENCH_SIZES: [usize; 5] = [1 << 8, 1 << 10, 1 << 12, 1 << 14, 1 << 16];

pub const CSV_HEADER: &str = "source,n,entropy,raw_bits_per_symbol,enum_bits_per_symbol,multinomial_bits_per_symbol,gap_raw,gap_enum";

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("container did not roundtrip for source {name} at n={n}")]
    Roundtrip { name: String, n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    pub name: String,
    pub dist: Distribution,
}

impl Source {
    pub fn new(name: impl Into<String>, dist: Distribution) -> Self {
        Self {
            name: name.into(),
            dist,
        }
    }
}

pub fn default_sources() -> Vec<Source> {
    vec![
        Source::new("constant", Distribution::Constant { value: 0 }),
        Source::new("uniform256", Distribution::Uniform { alphabet: 256 }),
        Source::new(
            "zipf1.0",
            Distribution::Zipf {
                exponent: 1.0,
                alphabet: 256,
            },
        ),
        Source::new(
            "zipf1.5",
            Distribution::Zipf {
                exponent: 1.5,
                alphabet: 256,
            },
        ),
        Source::new("sparse6", Distribution::Sparse { weight: 6 }),
        Source::new("dyadic8", Distribution::Dyadic { alphabet: 8 }),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub source: String,
    pub n: usize,
    pub entropy: f64,
    pub raw_bits_per_symbol: f64,
    pub enum_bits_per_symbol: f64,
    pub multinomial_bits_per_symbol: f64,
    pub gap_raw: f64,
    pub gap_enum: f64,
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            self.source,
            self.n,
            self.entropy,
            self.raw_bits_per_symbol,
            self.enum_bits_per_symbol,
            self.multinomial_bits_per_symbol,
            self.gap_raw,
            self.gap_enum
        )
    }
}

/// Measures one (source, size) cell. Both containers are checked to roundtrip.
pub fn measure(source: &Source, n: usize, seed: u64, window: u32) -> Result<BenchRow, BenchError> {
    let data: Vec<u64> = generate(&source.dist, n, seed)?
        .into_iter()
        .map(u64::from)
        .collect();
    let raw_bytes = compress(&data, Mode::Raw, window)?;
    let enum_bytes = compress(&data, Mode::Enum, window)?;
    let raw = inspect(&raw_bytes)?;
    let enm = inspect(&enum_bytes)?;
    if crate::codec::decompress(&raw_bytes)? != data || crate::codec::decompress(&enum_bytes)? != data {
        return Err(BenchError::Roundtrip {
            name: source.name.clone(),
            n,
        });
    }
    let per = |bits: f64| if n == 0 { 0.0 } else { bits / n as f64 };
    let raw_rate = per((raw.sections.header + raw.sections.decisions) as f64);
    let enum_rate = per(enm.total_bits as f64);
    Ok(BenchRow {
        source: source.name.clone(),
        n,
        entropy: enm.entropy,
        raw_bits_per_symbol: raw_rate,
        enum_bits_per_symbol: enum_rate,
        multinomial_bits_per_symbol: per(enm.multinomial_bits),
        gap_raw: raw_rate - enm.entropy,
        gap_enum: enum_rate - enm.entropy,
    })
}

/// One row per (source, size), sources outermost, in the order given.
pub fn run_bench(
    sources: &[Source],
    sizes: &[usize],
    seed: u64,
    window: u32,
) -> Result<Vec<BenchRow>, BenchError> {
    let mut rows = Vec::with_capacity(sources.len() * sizes.len());
    for source in sources {
        for &n in sizes {
            rows.push(measure(source, n, seed, window)?);
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[BenchRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.to_csv())?;
    }
    Ok(())
}
