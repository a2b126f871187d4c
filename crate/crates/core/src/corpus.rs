//! Deterministic synthetic byte corpora.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorpusError {
    #[error("alphabet size {0} outside 1..=256")]
    Alphabet(usize),
    #[error("zipf exponent {0} must be finite and non-negative")]
    Exponent(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    /// Every byte in `0..alphabet` equally likely.
    Uniform { alphabet: usize },
    /// P(k) ∝ 1/(k+1)^exponent over `0..alphabet`.
    Zipf { exponent: f64, alphabet: usize },
    /// `weight` ones at random positions, zeros elsewhere.
    Sparse { weight: usize },
    /// Exact counts ⌊size/2^(j+1)⌋ for symbol j, the last symbol taking the rest, shuffled.
    Dyadic { alphabet: usize },
    Constant { value: u8 },
}

impl Distribution {
    pub fn validate(&self) -> Result<(), CorpusError> {
        match *self {
            Distribution::Uniform { alphabet } | Distribution::Dyadic { alphabet } => {
                check_alphabet(alphabet)
            }
            Distribution::Zipf { exponent, alphabet } => {
                if !exponent.is_finite() || exponent < 0.0 {
                    return Err(CorpusError::Exponent(exponent));
                }
                check_alphabet(alphabet)
            }
            Distribution::Sparse { .. } | Distribution::Constant { .. } => Ok(()),
        }
    }
}

fn check_alphabet(alphabet: usize) -> Result<(), CorpusError> {
    if (1..=256).contains(&alphabet) {
        Ok(())
    } else {
        Err(CorpusError::Alphabet(alphabet))
    }
}

/// Generates `size` bytes; identical `(dist, size, seed)` give identical output.
pub fn generate(dist: &Distribution, size: usize, seed: u64) -> Result<Vec<u8>, CorpusError> {
    dist.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = match *dist {
        Distribution::Uniform { alphabet } => {
            (0..size).map(|_| rng.gen_range(0..alphabet) as u8).collect()
        }
        Distribution::Zipf { exponent, alphabet } => {
            let mut cdf: Vec<f64> = (0..alphabet)
                .map(|k| ((k + 1) as f64).powf(-exponent))
                .scan(0.0, |acc, w| {
                    *acc += w;
                    Some(*acc)
                })
                .collect();
            let total = *cdf.last().unwrap();
            cdf.iter_mut().for_each(|c| *c /= total);
            (0..size)
                .map(|_| {
                    let u: f64 = rng.gen();
                    cdf.partition_point(|&c| c <= u).min(alphabet - 1) as u8
                })
                .collect()
        }
        Distribution::Sparse { weight } => {
            let mut data = vec![0u8; size];
            for i in rand::seq::index::sample(&mut rng, size, weight.min(size)) {
                data[i] = 1;
            }
            data
        }
        Distribution::Dyadic { alphabet } => {
            let mut data = Vec::with_capacity(size);
            let mut left = size;
            for symbol in 0..alphabet {
                let count = if symbol + 1 == alphabet {
                    left
                } else {
                    size.checked_shr(symbol as u32 + 1).unwrap_or(0)
                };
                data.extend(std::iter::repeat(symbol as u8).take(count));
                left -= count;
            }
            data.shuffle(&mut rng);
            data
        }
        Distribution::Constant { value } => vec![value; size],
    };
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_sparse() {
        assert_eq!(generate(&Distribution::Constant { value: 9 }, 8, 1).unwrap(), vec![9; 8]);
        assert_eq!(
            generate(&Distribution::Sparse { weight: 0 }, 16, 1).unwrap(),
            vec![0; 16]
        );
        let sparse = generate(&Distribution::Sparse { weight: 6 }, 1000, 3).unwrap();
        assert_eq!(sparse.iter().filter(|&&b| b == 1).count(), 6);
        let tiny = generate(&Distribution::Sparse { weight: 10 }, 4, 3).unwrap();
        assert_eq!(tiny, vec![1; 4]);
    }

    #[test]
    fn seeded_output_is_deterministic() {
        let dist = Distribution::Zipf {
            exponent: 1.0,
            alphabet: 256,
        };
        let a = generate(&dist, 5000, 42).unwrap();
        assert_eq!(a, generate(&dist, 5000, 42).unwrap());
        assert_ne!(a, generate(&dist, 5000, 43).unwrap());
    }

    #[test]
    fn zipf_favours_small_symbols() {
        let dist = Distribution::Zipf {
            exponent: 1.5,
            alphabet: 64,
        };
        let data = generate(&dist, 20000, 7).unwrap();
        let zeros = data.iter().filter(|&&b| b == 0).count();
        let ones = data.iter().filter(|&&b| b == 1).count();
        assert!(zeros > ones && ones > 0);
        assert!(data.iter().all(|&b| b < 64));
    }

    #[test]
    fn dyadic_counts() {
        let data = generate(&Distribution::Dyadic { alphabet: 4 }, 64, 0).unwrap();
        let counts: Vec<usize> = (0..4u8).map(|s| data.iter().filter(|&&b| b == s).count()).collect();
        assert_eq!(counts, vec![32, 16, 8, 8]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(generate(&Distribution::Uniform { alphabet: 0 }, 4, 0).is_err());
        assert!(generate(&Distribution::Uniform { alphabet: 257 }, 4, 0).is_err());
        let bad = Distribution::Zipf {
            exponent: -1.0,
            alphabet: 4,
        };
        assert!(generate(&bad, 4, 0).is_err());
    }
}
