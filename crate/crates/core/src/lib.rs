//! Lossless compression by recording the decisions of a quicksort whose
//! pivots follow a Fano partition tree.
//!
//! A sequence is stored as the sorted permutation (the per-node comparison
//! bits) plus a description of the sorted data. In ENUM mode the symbol
//! counts are sent first, which fixes every node's size and right-count and
//! lets each decision vector be coded enumeratively.
//!
//! ```
//! use pivot_compress::codec::{compress, decompress, Mode};
//!
//! let data = vec![3, 1, 3, 3, 0, 1];
//! let bytes = compress(&data, Mode::Enum, 64).unwrap();
//! assert_eq!(decompress(&bytes).unwrap(), data);
//! ```

pub mod bench;
pub mod bitio;
pub mod cli;
pub mod codec;
pub mod corpus;
pub mod enumerative;
pub mod fano_tree;
pub mod stats;

pub use codec::{compress, decompress, CodecError, Mode};
