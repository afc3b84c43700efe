//! Multi-pattern matching over a compressed bitmap trie.
//!
//! Patterns are compiled into a breadth-first bitmap trie, cut at a fixed
//! depth, and shrunk by sharing identical subtrees near the bottom and
//! folding every leaf into a shared end node. The node matrix is then stored
//! in Compressed Row Storage and scanned failure-lessly: each text position
//! starts its own walk from the root, which makes the scan trivially
//! parallel.
//!
//! ```
//! use crs_trie::{compile, match_all, CompileConfig, CrsTrie, PatternSet, ScanConfig, Verifier};
//!
//! let patterns = PatternSet::new(["he", "she", "hers"]).unwrap();
//! let trie = compile(&patterns, &CompileConfig::default()).unwrap();
//! let crs = CrsTrie::from_trie(&trie);
//! let verifier = Verifier::new(&crs, &patterns).unwrap();
//! let cfg = ScanConfig::new(2, 4, true).unwrap();
//! let hits = match_all(&crs, b"ushers", &cfg, Some(&verifier)).unwrap();
//! let found: Vec<_> = hits.iter().map(|r| (r.position, r.pattern_ids.clone())).collect();
//! assert_eq!(found, vec![(1, vec![1]), (2, vec![0, 2])]);
//! ```

pub mod bench;
pub mod compile;
pub mod crs;
pub mod error;
pub mod format;
pub mod matcher;
pub mod node;
pub mod pattern;
pub mod trie;

pub use compile::{build_trie, compile, merge_leaves, merge_suffixes, truncate, CompileConfig};
pub use crs::{encode_crs, storage_cost, to_dense, CrsTrie, DenseNodeMatrix};
pub use error::{Error, FormatError, Result};
pub use format::{deserialize, serialize};
pub use matcher::{match_all, match_at, MatchRecord, ScanConfig, Verifier};
pub use node::TrieNode;
pub use pattern::{PatternId, PatternSet};
pub use trie::{LevelizedTrie, NodeIndex};
