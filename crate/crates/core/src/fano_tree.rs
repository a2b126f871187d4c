//! Maximally uniform partition trees over a sorted symbol table.
//!
//! The tree is rebuilt from counts alone by both encoder and decoder, so the
//! split rule must be total and deterministic: every range is cut where the
//! absolute difference between left and right weight is smallest, leftmost
//! cut on ties.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("symbol table is empty")]
    Empty,
    #[error("symbols must be strictly increasing (index {0})")]
    Unsorted(usize),
    #[error("symbol {0} has a zero count")]
    ZeroCount(usize),
    #[error("symbol and count lists differ in length ({symbols} vs {counts})")]
    Mismatch { symbols: usize, counts: usize },
    #[error("total count overflows")]
    Overflow,
}

/// Sorted distinct symbols with their (positive) occurrence counts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SymbolTable {
    symbols: Vec<u64>,
    counts: Vec<u64>,
    total: u64,
}

impl SymbolTable {
    pub fn new(symbols: Vec<u64>, counts: Vec<u64>) -> Result<Self, TreeError> {
        if symbols.len() != counts.len() {
            return Err(TreeError::Mismatch {
                symbols: symbols.len(),
                counts: counts.len(),
            });
        }
        if let Some(i) = symbols.windows(2).position(|w| w[0] >= w[1]) {
            return Err(TreeError::Unsorted(i + 1));
        }
        if let Some(i) = counts.iter().position(|&c| c == 0) {
            return Err(TreeError::ZeroCount(i));
        }
        let total = counts
            .iter()
            .try_fold(0u64, |acc, &c| acc.checked_add(c))
            .ok_or(TreeError::Overflow)?;
        Ok(Self {
            symbols,
            counts,
            total,
        })
    }

    /// Table over symbols `0..counts.len()`.
    pub fn from_counts(counts: Vec<u64>) -> Result<Self, TreeError> {
        Self::new((0..counts.len() as u64).collect(), counts)
    }

    pub fn symbols(&self) -> &[u64] {
        &self.symbols
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Total number of elements, N.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct symbols, M.
    pub fn distinct(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Split {
    /// First table index of the right range.
    pub mid: usize,
    pub left: usize,
    pub right: usize,
    /// Number of elements sent right (n_r).
    pub right_size: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    /// Table index range `lo..hi` covered by this node.
    pub lo: usize,
    pub hi: usize,
    pub size: u64,
    pub depth: u32,
    pub split: Option<Split>,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }
}

/// Full binary partition tree. Nodes are stored in pre-order; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FanoTree {
    nodes: Vec<Node>,
    table: SymbolTable,
}

impl FanoTree {
    pub fn build(table: &SymbolTable) -> Result<Self, TreeError> {
        if table.is_empty() {
            return Err(TreeError::Empty);
        }
        let mut prefix = Vec::with_capacity(table.counts.len() + 1);
        prefix.push(0u64);
        for &c in &table.counts {
            prefix.push(prefix.last().unwrap() + c);
        }

        let mut nodes: Vec<Node> = Vec::with_capacity(2 * table.distinct() - 1);
        // (lo, hi, depth, parent slot to patch)
        let mut stack = vec![(0usize, table.distinct(), 0u32, None::<(usize, bool)>)];
        while let Some((lo, hi, depth, parent)) = stack.pop() {
            let index = nodes.len();
            if let Some((p, is_right)) = parent {
                let split = nodes[p].split.as_mut().unwrap();
                if is_right {
                    split.right = index;
                } else {
                    split.left = index;
                }
            }
            let size = prefix[hi] - prefix[lo];
            let split = (hi - lo >= 2).then(|| {
                let mid = best_split(&prefix, lo, hi);
                Split {
                    mid,
                    left: 0,
                    right: 0,
                    right_size: prefix[hi] - prefix[mid],
                }
            });
            if let Some(s) = &split {
                stack.push((s.mid, hi, depth + 1, Some((index, true))));
                stack.push((lo, s.mid, depth + 1, Some((index, false))));
            }
            nodes.push(Node {
                lo,
                hi,
                size,
                depth,
                split,
            });
        }
        Ok(Self {
            nodes,
            table: table.clone(),
        })
    }

    pub fn table(&self) -> &SymbolTable {
        &self.table
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn node(&self, index: usize) -> &Node {
        &self.nodes[index]
    }

    /// Smallest symbol of the right range; elements `>=` the pivot go right.
    pub fn pivot(&self, split: &Split) -> u64 {
        self.table.symbols[split.mid]
    }

    /// Internal nodes in pre-order (node, left subtree, right subtree).
    pub fn internal_preorder(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| !n.is_leaf())
    }

    /// Depth of each symbol's leaf, by table index.
    pub fn leaf_depths(&self) -> Vec<u32> {
        let mut depths = vec![0; self.table.distinct()];
        for node in self.nodes.iter().filter(|n| n.is_leaf()) {
            depths[node.lo] = node.depth;
        }
        depths
    }

    /// Total comparisons made while partitioning: Σ cᵢ·depthᵢ.
    pub fn comparison_cost(&self) -> u64 {
        self.leaf_depths()
            .iter()
            .zip(&self.table.counts)
            .map(|(&d, &c)| u64::from(d) * c)
            .sum()
    }

    /// Σ of internal node sizes; equals [`Self::comparison_cost`].
    pub fn internal_size_sum(&self) -> u64 {
        self.internal_preorder().map(|n| n.size).sum()
    }

    /// Σ 2^(−depth) over leaves, computed exactly as a fraction of 2^max_depth.
    pub fn kraft_is_complete(&self) -> bool {
        let depths = self.leaf_depths();
        let max = depths.iter().copied().max().unwrap_or(0);
        if max >= 128 {
            return false;
        }
        let sum: u128 = depths.iter().map(|&d| 1u128 << (max - d)).sum();
        sum == 1u128 << max
    }
}

/// Split index in `lo+1..hi` minimizing |left − right|, leftmost on ties.
/// The signed difference is strictly increasing in the split index, so the
/// optimum sits next to the first index where left ≥ right.
fn best_split(prefix: &[u64], lo: usize, hi: usize) -> usize {
    let total = prefix[hi] - prefix[lo];
    let diff = |m: usize| -> i128 { 2 * i128::from(prefix[m] - prefix[lo]) - i128::from(total) };
    let candidates = &prefix[lo + 1..hi];
    let first_nonneg = lo + 1 + candidates.partition_point(|&p| 2 * i128::from(p - prefix[lo]) < i128::from(total));
    if first_nonneg == hi {
        return hi - 1;
    }
    if first_nonneg > lo + 1 && diff(first_nonneg - 1).abs() <= diff(first_nonneg).abs() {
        first_nonneg - 1
    } else {
        first_nonneg
    }
}

/// Convenience: pre-order internal nodes.
pub fn node_preorder(tree: &FanoTree) -> Vec<&Node> {
    tree.internal_preorder().collect()
}

pub fn build_tree(table: &SymbolTable) -> Result<FanoTree, TreeError> {
    FanoTree::build(table)
}

pub fn comparison_cost(tree: &FanoTree) -> u64 {
    tree.comparison_cost()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(counts: &[u64]) -> FanoTree {
        FanoTree::build(&SymbolTable::from_counts(counts.to_vec()).unwrap()).unwrap()
    }

    /// Reference splitter: scan every cut.
    fn exhaustive_split(counts: &[u64], lo: usize, hi: usize) -> usize {
        let total: u64 = counts[lo..hi].iter().sum();
        let mut best = (u64::MAX, 0);
        let mut left = 0u64;
        for m in lo + 1..hi {
            left += counts[m - 1];
            let d = (2 * left).abs_diff(total);
            if d < best.0 {
                best = (d, m);
            }
        }
        best.1
    }

    fn exhaustive_depths(counts: &[u64], lo: usize, hi: usize, depth: u32, out: &mut Vec<u32>) {
        if hi - lo == 1 {
            out[lo] = depth;
            return;
        }
        let m = exhaustive_split(counts, lo, hi);
        exhaustive_depths(counts, lo, m, depth + 1, out);
        exhaustive_depths(counts, m, hi, depth + 1, out);
    }

    fn ranges(t: &FanoTree) -> Vec<(usize, usize)> {
        t.internal_preorder().map(|n| (n.lo, n.hi)).collect()
    }

    #[test]
    fn dyadic_tree() {
        let t = tree(&[4, 2, 1, 1]);
        assert_eq!(t.leaf_depths(), vec![1, 2, 3, 3]);
        assert_eq!(ranges(&t), vec![(0, 4), (1, 4), (2, 4)]);
        let splits: Vec<usize> = t.internal_preorder().map(|n| n.split.unwrap().mid).collect();
        assert_eq!(splits, vec![1, 2, 3]);
        assert_eq!(t.comparison_cost(), 14);
        assert_eq!(t.internal_size_sum(), 14);
    }

    #[test]
    fn tie_breaks_leftmost() {
        let t = tree(&[3, 1, 1, 1]);
        let splits: Vec<usize> = t.internal_preorder().map(|n| n.split.unwrap().mid).collect();
        assert_eq!(splits, vec![1, 2, 3]);
    }

    #[test]
    fn single_symbol() {
        let t = tree(&[7]);
        assert_eq!(t.nodes().len(), 1);
        assert!(node_preorder(&t).is_empty());
        assert_eq!(t.comparison_cost(), 0);
        assert!(t.kraft_is_complete());
    }

    #[test]
    fn two_symbols() {
        let t = tree(&[1, 1]);
        assert_eq!(ranges(&t), vec![(0, 2)]);
        assert_eq!(t.comparison_cost(), 2);
        assert_eq!(t.root().split.unwrap().right_size, 1);
    }

    #[test]
    fn rejects_empty_and_invalid_tables() {
        assert_eq!(FanoTree::build(&SymbolTable::default()), Err(TreeError::Empty));
        assert_eq!(SymbolTable::new(vec![1, 1], vec![1, 1]), Err(TreeError::Unsorted(1)));
        assert_eq!(SymbolTable::new(vec![1, 2], vec![1, 0]), Err(TreeError::ZeroCount(1)));
        assert!(SymbolTable::new(vec![1], vec![1, 2]).is_err());
        assert_eq!(
            SymbolTable::new(vec![1, 2], vec![u64::MAX, 1]),
            Err(TreeError::Overflow)
        );
    }

    #[test]
    fn matches_exhaustive_splitter() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..500 {
            let m = (next() % 40 + 1) as usize;
            let counts: Vec<u64> = (0..m).map(|_| next() % 20 + 1).collect();
            let t = tree(&counts);
            let mut expect = vec![0; m];
            exhaustive_depths(&counts, 0, m, 0, &mut expect);
            assert_eq!(t.leaf_depths(), expect, "counts {counts:?}");
            assert!(t.kraft_is_complete());
            assert_eq!(t.comparison_cost(), t.internal_size_sum());
            for node in t.internal_preorder() {
                let s = node.split.unwrap();
                assert_eq!(node.size, t.node(s.left).size + s.right_size);
                assert_eq!(t.node(s.right).size, s.right_size);
            }
        }
    }

    #[test]
    fn pivot_is_smallest_right_symbol() {
        let table = SymbolTable::new(vec![3, 10, 20], vec![1, 1, 2]).unwrap();
        let t = FanoTree::build(&table).unwrap();
        let root = t.root().split.unwrap();
        assert_eq!(t.pivot(&root), 20);
    }
}
