//! Rate analysis: sample entropy, comparison cost, multinomial bound, a
//! Huffman reference length, and per-section container accounting.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::codec::{decode_detailed, CodecError, DecodeLimits};
use crate::fano_tree::{FanoTree, SymbolTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("statistics need at least one symbol")]
    EmptyTable,
}

/// Sample entropy in bits per symbol: Σ (cᵢ/N)·log₂(N/cᵢ).
pub fn entropy(table: &SymbolTable) -> Result<f64, StatsError> {
    if table.is_empty() {
        return Err(StatsError::EmptyTable);
    }
    if table.distinct() == 1 {
        return Ok(0.0);
    }
    let n = table.total() as f64;
    Ok(table
        .counts()
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            p * (n / c as f64).log2()
        })
        .sum())
}

/// Σ cᵢ·log₂(N/cᵢ), the idealized comparison count.
pub fn shannon_cost(table: &SymbolTable) -> f64 {
    let n = table.total() as f64;
    table
        .counts()
        .iter()
        .map(|&c| c as f64 * (n / c as f64).log2())
        .sum()
}

/// Cumulative table of log₂(k!) built by direct summation.
#[derive(Debug, Clone)]
pub struct LogFactorials {
    table: Vec<f64>,
}

impl LogFactorials {
    pub fn up_to(n: u64) -> Self {
        let mut table = Vec::with_capacity(n as usize + 1);
        table.push(0.0);
        let mut acc = 0.0f64;
        for k in 1..=n {
            acc += (k as f64).log2();
            table.push(acc);
        }
        Self { table }
    }

    pub fn log2_factorial(&self, k: u64) -> f64 {
        self.table[k as usize]
    }

    pub fn log2_binomial(&self, n: u64, k: u64) -> f64 {
        self.log2_factorial(n) - self.log2_factorial(k) - self.log2_factorial(n - k)
    }
}

/// log₂(N! / Π cᵢ!): the information in the ordering once counts are known.
pub fn multinomial_bits(table: &SymbolTable) -> f64 {
    let logs = LogFactorials::up_to(table.total());
    multinomial_bits_with(table, &logs)
}

fn multinomial_bits_with(table: &SymbolTable, logs: &LogFactorials) -> f64 {
    let denominator: f64 = table.counts().iter().map(|&c| logs.log2_factorial(c)).sum();
    (logs.log2_factorial(table.total()) - denominator).max(0.0)
}

/// Σ over internal tree nodes of log₂ C(n, n_r).
pub fn tree_binomial_bits(tree: &FanoTree) -> f64 {
    let logs = LogFactorials::up_to(tree.root().size);
    tree.internal_preorder()
        .map(|node| logs.log2_binomial(node.size, node.split.map_or(0, |s| s.right_size)))
        .sum()
}

/// Huffman codeword lengths for the table's counts, by table index.
pub fn huffman_lengths(table: &SymbolTable) -> Vec<u32> {
    let m = table.distinct();
    if m <= 1 {
        return vec![0; m];
    }
    // forest of merged subtrees; parent links give depths
    let mut parent = vec![usize::MAX; 2 * m - 1];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = table
        .counts()
        .iter()
        .enumerate()
        .map(|(i, &c)| Reverse((c, i)))
        .collect();
    let mut next = m;
    while heap.len() > 1 {
        let Reverse((wa, a)) = heap.pop().unwrap();
        let Reverse((wb, b)) = heap.pop().unwrap();
        parent[a] = next;
        parent[b] = next;
        heap.push(Reverse((wa + wb, next)));
        next += 1;
    }
    let mut depth = vec![0u32; 2 * m - 1];
    for node in (0..2 * m - 2).rev() {
        depth[node] = depth[parent[node]] + 1;
    }
    depth.truncate(m);
    depth
}

/// Average Huffman codeword length in bits per symbol (0 for a single symbol).
pub fn huffman_average_length(table: &SymbolTable) -> f64 {
    if table.is_empty() {
        return 0.0;
    }
    let weighted: u64 = huffman_lengths(table)
        .iter()
        .zip(table.counts())
        .map(|(&l, &c)| u64::from(l) * c)
        .sum();
    weighted as f64 / table.total() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SectionBits {
    pub header: u64,
    pub symbols: u64,
    pub counts: u64,
    pub decisions: u64,
    pub sorted: u64,
    pub padding: u64,
}

impl SectionBits {
    pub fn total(&self) -> u64 {
        self.header + self.symbols + self.counts + self.decisions + self.sorted + self.padding
    }
}

/// Sample statistics and section sizes for one container.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub mode: &'static str,
    pub n: u64,
    pub m: u64,
    pub entropy: f64,
    pub comparison_bits: u64,
    pub shannon_cost: f64,
    pub multinomial_bits: f64,
    pub total_bits: u64,
    /// RAW leaf/internal flags, counted inside `sections.decisions`.
    pub flag_bits: u64,
    pub sections: SectionBits,
}

impl RateReport {
    /// One `name=value` per line, nested fields dotted.
    pub fn to_key_values(&self) -> String {
        let s = &self.sections;
        let mut out = String::new();
        let fields: [(&str, String); 16] = [
            ("mode", self.mode.to_string()),
            ("n", self.n.to_string()),
            ("m", self.m.to_string()),
            ("entropy", self.entropy.to_string()),
            ("comparison_bits", self.comparison_bits.to_string()),
            ("shannon_cost", self.shannon_cost.to_string()),
            ("multinomial_bits", self.multinomial_bits.to_string()),
            ("total_bits", self.total_bits.to_string()),
            ("flag_bits", self.flag_bits.to_string()),
            ("sections.header", s.header.to_string()),
            ("sections.symbols", s.symbols.to_string()),
            ("sections.counts", s.counts.to_string()),
            ("sections.decisions", s.decisions.to_string()),
            ("sections.sorted", s.sorted.to_string()),
            ("sections.padding", s.padding.to_string()),
            ("sections.total", s.total().to_string()),
        ];
        for (name, value) in fields {
            let _ = writeln!(out, "{name}={value}");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Decodes a container and fills a [`RateReport`].
pub fn inspect(bytes: &[u8]) -> Result<RateReport, CodecError> {
    inspect_with_limits(bytes, &DecodeLimits::default())
}

pub fn inspect_with_limits(bytes: &[u8], limits: &DecodeLimits) -> Result<RateReport, CodecError> {
    let decoded = decode_detailed(bytes, limits)?;
    let table = &decoded.table;
    let (entropy_value, comparison_bits) = if table.is_empty() {
        (0.0, 0)
    } else {
        let tree = FanoTree::build(table)?;
        (entropy(table).unwrap_or(0.0), tree.comparison_cost())
    };
    let s = decoded.sections;
    Ok(RateReport {
        mode: decoded.mode.name(),
        n: table.total(),
        m: table.distinct() as u64,
        entropy: entropy_value,
        comparison_bits,
        shannon_cost: shannon_cost(table),
        multinomial_bits: multinomial_bits(table),
        total_bits: bytes.len() as u64 * 8,
        flag_bits: decoded.flag_bits,
        sections: SectionBits {
            header: s.header,
            symbols: s.symbols,
            counts: s.counts,
            decisions: s.decisions,
            sorted: s.sorted,
            padding: s.padding,
        },
    })
}
