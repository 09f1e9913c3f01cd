//! Minimal block grammar code.
//!
//! A string over the alphabet `1..=m` is turned into the block grammar whose
//! local encoding is shortest among all block grammars producing it, and
//! that encoding is the compressed output. The crate also carries the
//! measurements built on this code and the sources used to exercise it.
//!
//! ```
//! use mblk_core::{PsiCode, transform};
//!
//! let code = PsiCode::new(2).unwrap();
//! let u = [1, 2, 1, 2, 1, 2, 1, 2, 1, 2];
//! let bits = transform::encode(&code, &u).unwrap();
//! assert_eq!(bits.len(), 30);
//! assert_eq!(transform::decode(&code, &bits).unwrap().symbols, u);
//! ```

pub mod analysis;
pub mod bits;
pub mod codebook;
pub mod error;
pub mod grammar;
pub mod sources;
mod suffix;
pub mod transform;

pub use bits::{BitReader, BitString};
pub use codebook::PsiCode;
pub use error::{Error, Result};
pub use grammar::{BlockGrammar, DictionaryGrammar, Symbol};
pub use transform::{minimal_block_transform, RankedBlockTable, TransformOptions, TransformResult};
