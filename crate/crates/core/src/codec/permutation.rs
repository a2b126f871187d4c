//! Recording quicksort decisions and replaying them into a permutation.

use crate::bitio::BitStream;
use crate::fano_tree::FanoTree;

use super::CodecError;

/// A sorting permutation. `forward[i] = j` sends the element at original
/// position `i` to sorted position `j`; `inverse[forward[i]] = i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn identity(len: usize) -> Self {
        Self {
            forward: (0..len).collect(),
            inverse: (0..len).collect(),
        }
    }

    pub fn from_forward(forward: Vec<usize>) -> Result<Self, CodecError> {
        let mut inverse = vec![usize::MAX; forward.len()];
        for (i, &j) in forward.iter().enumerate() {
            match inverse.get_mut(j) {
                Some(slot) if *slot == usize::MAX => *slot = i,
                _ => return Err(CodecError::Corrupt("forward map is not a bijection".into())),
            }
        }
        Ok(Self { forward, inverse })
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// Moves each element to its sorted position.
    pub fn apply<T: Copy>(&self, values: &[T]) -> Result<Vec<T>, CodecError> {
        check_len(values.len(), self.len())?;
        Ok(self.inverse.iter().map(|&i| values[i]).collect())
    }
}

fn check_len(found: usize, expected: usize) -> Result<(), CodecError> {
    if found != expected {
        return Err(CodecError::LengthMismatch { expected, found });
    }
    Ok(())
}

/// Restores original order: `out[i] = sorted[forward[i]]`.
pub fn apply_inverse<T: Copy>(sorted: &[T], perm: &Permutation) -> Result<Vec<T>, CodecError> {
    check_len(sorted.len(), perm.len())?;
    Ok(perm.forward.iter().map(|&j| sorted[j]).collect())
}

fn split_by(indices: Vec<usize>, bits: &BitStream, right_size: usize) -> (Vec<usize>, Vec<usize>) {
    let mut left = Vec::with_capacity(indices.len() - right_size);
    let mut right = Vec::with_capacity(right_size);
    for (index, bit) in indices.into_iter().zip(bits.iter()) {
        if bit {
            right.push(index);
        } else {
            left.push(index);
        }
    }
    (left, right)
}

/// Stable-partitions `values` down `tree`, returning one decision vector per
/// internal node in pre-order (bit 1 iff the element is `>=` the node's
/// pivot) and the resulting sort permutation.
pub fn record_decisions(
    values: &[u64],
    tree: &FanoTree,
) -> Result<(Vec<BitStream>, Permutation), CodecError> {
    let n = values.len();
    if tree.root().size != n as u64 {
        return Err(CodecError::Inconsistent(format!(
            "tree covers {} elements, sequence has {n}",
            tree.root().size
        )));
    }
    let symbols = tree.table().symbols();
    let mut vectors = Vec::with_capacity(tree.table().distinct().saturating_sub(1));
    let mut forward = vec![0usize; n];
    let mut next = 0usize;
    let mut stack = vec![(0usize, (0..n).collect::<Vec<_>>())];
    while let Some((id, indices)) = stack.pop() {
        let node = tree.node(id);
        if indices.len() as u64 != node.size {
            return Err(CodecError::Inconsistent(format!(
                "node over symbols {}..{} expects {} elements, got {}",
                node.lo,
                node.hi,
                node.size,
                indices.len()
            )));
        }
        match node.split {
            None => {
                let symbol = symbols[node.lo];
                for index in indices {
                    if values[index] != symbol {
                        return Err(CodecError::Inconsistent(format!(
                            "element {} not in symbol table",
                            values[index]
                        )));
                    }
                    forward[index] = next;
                    next += 1;
                }
            }
            Some(split) => {
                let pivot = tree.pivot(&split);
                let bits: BitStream = indices.iter().map(|&i| values[i] >= pivot).collect();
                let (left, right) = split_by(indices, &bits, split.right_size as usize);
                vectors.push(bits);
                stack.push((split.right, right));
                stack.push((split.left, left));
            }
        }
    }
    Ok((vectors, Permutation::from_forward(forward)?))
}

/// Re-runs the partitioning using recorded decision vectors instead of
/// symbol comparisons.
pub fn replay_decisions(vectors: &[BitStream], tree: &FanoTree) -> Result<Permutation, CodecError> {
    let n = usize::try_from(tree.root().size)
        .map_err(|_| CodecError::Corrupt("sequence length overflows".into()))?;
    let mut forward = vec![0usize; n];
    let mut next = 0usize;
    let mut pending = vectors.iter();
    let mut stack = vec![(0usize, (0..n).collect::<Vec<_>>())];
    while let Some((id, indices)) = stack.pop() {
        let node = tree.node(id);
        match node.split {
            None => {
                for index in indices {
                    forward[index] = next;
                    next += 1;
                }
            }
            Some(split) => {
                let bits = pending
                    .next()
                    .ok_or_else(|| CodecError::Corrupt("missing decision vector".into()))?;
                if bits.len() != indices.len() {
                    return Err(CodecError::Corrupt(format!(
                        "decision vector of {} bits for a node of {} elements",
                        bits.len(),
                        indices.len()
                    )));
                }
                if bits.count_ones() as u64 != split.right_size {
                    return Err(CodecError::Corrupt(format!(
                        "decision vector sends {} elements right, node expects {}",
                        bits.count_ones(),
                        split.right_size
                    )));
                }
                let (left, right) = split_by(indices, bits, split.right_size as usize);
                stack.push((split.right, right));
                stack.push((split.left, left));
            }
        }
    }
    if pending.next().is_some() {
        return Err(CodecError::Corrupt("unused decision vectors".into()));
    }
    Permutation::from_forward(forward)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::histogram;

    fn tree_for(values: &[u64]) -> FanoTree {
        FanoTree::build(&histogram(values)).unwrap()
    }

    fn stable_argsort_forward(values: &[u64]) -> Vec<usize> {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by_key(|&i| values[i]);
        let mut forward = vec![0; values.len()];
        for (pos, &i) in order.iter().enumerate() {
            forward[i] = pos;
        }
        forward
    }

    #[test]
    fn running_example() {
        let values = [1, 0, 1];
        let tree = tree_for(&values);
        let (vectors, perm) = record_decisions(&values, &tree).unwrap();
        assert_eq!(vectors.len(), 1);
        assert_eq!(vectors[0].to_string(), "101");
        assert_eq!(perm.forward(), &[1, 0, 2]);
        assert_eq!(perm.inverse(), &[1, 0, 2]);
        assert_eq!(replay_decisions(&vectors, &tree).unwrap(), perm);
        assert_eq!(apply_inverse(&[0, 1, 1], &perm).unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn degenerate_inputs() {
        let tree = tree_for(&[9]);
        let (vectors, perm) = record_decisions(&[9], &tree).unwrap();
        assert!(vectors.is_empty());
        assert_eq!(perm.forward(), &[0]);
        assert_eq!(replay_decisions(&[], &tree).unwrap().forward(), &[0]);

        let tree = tree_for(&[5, 5, 5, 5]);
        let (vectors, perm) = record_decisions(&[5, 5, 5, 5], &tree).unwrap();
        assert!(vectors.is_empty());
        assert_eq!(perm, Permutation::identity(4));
        assert!(apply_inverse::<u64>(&[], &Permutation::identity(0)).unwrap().is_empty());
        assert_eq!(apply_inverse(&[3, 4], &Permutation::identity(2)).unwrap(), vec![3, 4]);
    }

    #[test]
    fn replay_rejects_wrong_length() {
        let tree = tree_for(&[1, 0, 1]);
        let short: BitStream = "10".parse().unwrap();
        assert!(matches!(
            replay_decisions(&[short], &tree),
            Err(CodecError::Corrupt(_))
        ));
        assert!(replay_decisions(&[], &tree).is_err());
    }

    #[test]
    fn record_rejects_foreign_symbols() {
        let tree = tree_for(&[1, 0, 1]);
        assert!(matches!(
            record_decisions(&[1, 2, 1], &tree),
            Err(CodecError::Inconsistent(_))
        ));
        assert!(record_decisions(&[1, 0], &tree).is_err());
    }

    #[test]
    fn apply_checks_lengths() {
        let perm = Permutation::identity(3);
        assert!(apply_inverse(&[1, 2], &perm).is_err());
        assert!(perm.apply(&[1, 2]).is_err());
        assert!(Permutation::from_forward(vec![0, 0]).is_err());
        assert!(Permutation::from_forward(vec![0, 2]).is_err());
    }

    #[test]
    fn matches_stable_argsort() {
        let mut state = 12345u64;
        for len in [2usize, 3, 10, 100, 1000] {
            let values: Vec<u64> = (0..len)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    (state >> 33) % 17
                })
                .collect();
            let tree = tree_for(&values);
            let (vectors, perm) = record_decisions(&values, &tree).unwrap();
            assert_eq!(perm.forward(), stable_argsort_forward(&values).as_slice());
            let mut sorted = values.clone();
            sorted.sort();
            assert_eq!(perm.apply(&values).unwrap(), sorted);
            assert_eq!(apply_inverse(&sorted, &perm).unwrap(), values);
            assert_eq!(replay_decisions(&vectors, &tree).unwrap(), perm);
            let total_bits: usize = vectors.iter().map(BitStream::len).sum();
            assert_eq!(total_bits as u64, tree.comparison_cost());
        }
    }
}
