//! An in-memory index over (path, value) keys that answers
//! content-and-structure queries: a path pattern with child and descendant
//! steps and wildcards, combined with a closed value range.
//!
//! Keys are interleaved dynamically: each trie level splits on whichever
//! dimension discriminates the remaining keys, alternating between path and
//! value where both can. Static interleavings (path-first, value-first,
//! label-wise, z-order) share the same trie and query engine for comparison.
//!
//! ```
//! use rcas::{cas_query, CompositeKey, QueryPath, RcasIndex, Scheme, ValueRange, ValueWidth};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let keys = vec![
//!     CompositeKey::parse("/bom/item/car/battery", 250_714, ValueWidth::W4, 3)?,
//!     CompositeKey::parse("/bom/item/canoe", 69_200, ValueWidth::W4, 1)?,
//! ];
//! let index = RcasIndex::build(&keys, Scheme::Rcas, ValueWidth::W4)?;
//! let q = QueryPath::parse("/bom/item//battery")?;
//! let r = ValueRange::from_u64(100_000, 500_000, ValueWidth::W4)?;
//! let result = cas_query(&index, &q, &r)?;
//! assert_eq!(result.sorted_refs(), vec![3]);
//! # Ok(())
//! # }
//! ```

pub mod bench;
pub mod costmodel;
pub mod dataset;
pub mod interleave;
pub mod keymodel;
pub mod query;
pub mod trie;

#[cfg(test)]
pub(crate) mod testutil;

pub use interleave::Scheme;
pub use keymodel::{CompositeKey, Dimension, NodeRef, PathBytes, ValueBytes, ValueWidth};
pub use query::{cas_query, QueryPath, QueryResult, ValueRange};
pub use trie::RcasIndex;
