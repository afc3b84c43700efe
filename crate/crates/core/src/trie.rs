use std::collections::BTreeMap;
use std::ops::Range;

use bitvec::prelude::*;

use crate::error::{Error, Result};
use crate::node::TrieNode;
use crate::pattern::PatternId;

/// Node index within a [`LevelizedTrie`] or [`CrsTrie`](crate::crs::CrsTrie).
pub type NodeIndex = u32;

/// Per-node match flags, one bit per node.
pub type MatchFlags = BitVec<u8, Lsb0>;

/// A bitmap trie laid out breadth-first in a single row-major node array.
///
/// Level `k` occupies `level_starts[k]..level_starts[k + 1]`. Match flags
/// are kept beside the nodes so a node stays exactly 36 bytes. Once leaves
/// have been merged, the last level is the shared end block: all-zero rows
/// that every leaf-only sibling group points into.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelizedTrie {
    pub(crate) nodes: Vec<TrieNode>,
    pub(crate) level_starts: Vec<NodeIndex>,
    pub(crate) match_flags: MatchFlags,
    pub(crate) pattern_index: BTreeMap<NodeIndex, Vec<PatternId>>,
    pub(crate) end_nodes: Option<Range<NodeIndex>>,
    pub(crate) alphabet_size: u16,
}

impl LevelizedTrie {
    pub fn nodes(&self) -> &[TrieNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn level_starts(&self) -> &[NodeIndex] {
        &self.level_starts
    }

    pub fn level_count(&self) -> usize {
        self.level_starts.len()
    }

    /// Node index range of level `k`.
    pub fn level(&self, k: usize) -> Range<usize> {
        let start = self.level_starts[k] as usize;
        let end = self
            .level_starts
            .get(k + 1)
            .map_or(self.nodes.len(), |&s| s as usize);
        start..end
    }

    pub fn level_of(&self, node: NodeIndex) -> usize {
        self.level_starts.partition_point(|&s| s <= node) - 1
    }

    pub fn match_flags(&self) -> &MatchFlags {
        &self.match_flags
    }

    pub fn is_match(&self, node: NodeIndex) -> bool {
        self.match_flags[node as usize]
    }

    pub fn pattern_index(&self) -> &BTreeMap<NodeIndex, Vec<PatternId>> {
        &self.pattern_index
    }

    pub fn pattern_ids(&self, node: NodeIndex) -> &[PatternId] {
        self.pattern_index.get(&node).map_or(&[], Vec::as_slice)
    }

    /// The shared end block, present once leaves have been merged.
    pub fn end_nodes(&self) -> Option<Range<NodeIndex>> {
        self.end_nodes.clone()
    }

    pub fn alphabet_size(&self) -> u16 {
        self.alphabet_size
    }

    /// Child of `node` labeled `c`, found by bitmap rank.
    #[inline]
    pub fn child_lookup(&self, node: NodeIndex, c: u8) -> Option<NodeIndex> {
        self.nodes[node as usize].child(c)
    }

    /// Follows `path` from the root, returning the node reached.
    pub fn walk(&self, path: &[u8]) -> Option<NodeIndex> {
        path.iter()
            .try_fold(0, |node, &c| self.child_lookup(node, c))
    }

    /// Length of the longest root path.
    pub fn height(&self) -> usize {
        // Children always sit at higher indices than their parents.
        let mut depth = vec![0usize; self.nodes.len()];
        let mut height = 0;
        for (i, node) in self.nodes.iter().enumerate() {
            let d = depth[i];
            height = height.max(d);
            let first = node.first_child_offset as usize;
            for child in &mut depth[first..first + node.child_count() as usize] {
                *child = (*child).max(d + 1);
            }
        }
        height
    }

    /// Checks every structural invariant of the layout.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Invariant(msg));
        let n = self.nodes.len();
        if n == 0 {
            return fail("trie has no nodes".into());
        }
        if self.level_starts.first() != Some(&0) {
            return fail("level_starts must begin at 0".into());
        }
        if self.level_starts.windows(2).any(|w| w[0] >= w[1])
            || *self.level_starts.last().unwrap() as usize >= n
        {
            return fail("level_starts must be strictly increasing and in range".into());
        }
        if self.match_flags.len() != n {
            return fail(format!(
                "{} match flags for {n} nodes",
                self.match_flags.len()
            ));
        }
        if let Some(&key) = self.pattern_index.keys().next_back() {
            if key as usize >= n {
                return fail(format!("pattern index references node {key}"));
            }
        }
        if let Some(end) = &self.end_nodes {
            let last = *self.level_starts.last().unwrap();
            if end.start != last || end.end as usize != n || end.is_empty() {
                return fail("end block must be the whole last level".into());
            }
            if self.nodes[end.start as usize..]
                .iter()
                .any(|node| *node != TrieNode::default())
            {
                return fail("end block rows must be all zero".into());
            }
        }
        let in_end = |i: usize| {
            self.end_nodes
                .as_ref()
                .is_some_and(|r| r.contains(&(i as NodeIndex)))
        };
        for (i, node) in self.nodes.iter().enumerate() {
            let count = node.child_count() as usize;
            let first = node.first_child_offset as usize;
            if count == 0 {
                if !self.match_flags[i] {
                    return fail(format!("childless node {i} is not a match node"));
                }
                continue;
            }
            if first + count > n {
                return fail(format!("node {i} children run past the array"));
            }
            let level = self.level_of(i as NodeIndex);
            for child in first..first + count {
                if !in_end(child) && self.level_of(child as NodeIndex) != level + 1 {
                    return fail(format!("node {i} child {child} is not on the next level"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::build_trie;
    use crate::pattern::PatternSet;

    #[test]
    fn walk_and_level_of() {
        let trie = build_trie(&PatternSet::new(["ab", "ac"]).unwrap()).unwrap();
        assert_eq!(trie.walk(b"ac"), Some(3));
        assert_eq!(trie.walk(b"ad"), None);
        assert_eq!(trie.walk(b""), Some(0));
        assert_eq!(trie.level_of(0), 0);
        assert_eq!(trie.level_of(1), 1);
        assert_eq!(trie.level_of(3), 2);
        assert_eq!(trie.height(), 2);
    }

    #[test]
    fn validate_catches_broken_offsets() {
        let mut trie = build_trie(&PatternSet::new(["ab"]).unwrap()).unwrap();
        trie.validate().unwrap();
        trie.nodes[1].first_child_offset = 7;
        assert!(matches!(trie.validate(), Err(Error::Invariant(_))));
    }

    #[test]
    fn validate_catches_level_skips() {
        let mut trie = build_trie(&PatternSet::new(["abc"]).unwrap()).unwrap();
        trie.nodes[0].first_child_offset = 2;
        trie.nodes[1].first_child_offset = 2;
        assert!(trie.validate().is_err());
    }
}
