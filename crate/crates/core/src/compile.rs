//! Pattern compilation: breadth-first construction, truncation, suffix
//! merging and leaf merging.
//!
//! Every transform decodes the node array into a small pointer graph,
//! rewrites the graph, and lays it out again breadth-first. The layout gives
//! each distinct child list one contiguous block, so parents whose children
//! were merged into identical nodes end up sharing a block.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::node::TrieNode;
use crate::pattern::{PatternId, PatternSet};
use crate::trie::{LevelizedTrie, MatchFlags, NodeIndex};

/// Compilation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileConfig {
    /// Longest compiled prefix, in bytes. Deeper levels are cut.
    pub truncation_depth: usize,
    /// How many of the deepest levels take part in suffix merging.
    pub merge_levels: usize,
    pub verify_matches: bool,
}

pub const DEFAULT_MERGE_LEVELS: usize = 3;

impl CompileConfig {
    pub fn new(truncation_depth: usize, merge_levels: usize) -> Result<Self> {
        let cfg = CompileConfig {
            truncation_depth,
            merge_levels,
            verify_matches: true,
        };
        cfg.check()?;
        Ok(cfg)
    }

    /// Default depth for an alphabet: the fewest symbols that carry 64 bits
    /// (8 for bytes), capped at the longest pattern.
    pub fn default_depth(alphabet_size: u16, longest_pattern: usize) -> usize {
        let base = u128::from(alphabet_size.max(2));
        let mut depth = 0;
        let mut span: u128 = 1;
        while span < 1u128 << 64 {
            span *= base;
            depth += 1;
        }
        if alphabet_size == 256 {
            depth
        } else {
            depth.min(longest_pattern).max(1)
        }
    }

    pub fn for_patterns(patterns: &PatternSet) -> Self {
        let truncation_depth = Self::default_depth(patterns.alphabet_size(), patterns.longest());
        CompileConfig {
            truncation_depth,
            merge_levels: DEFAULT_MERGE_LEVELS.min(truncation_depth),
            verify_matches: true,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.truncation_depth < 1 {
            return Err(Error::Config("truncation depth must be at least 1".into()));
        }
        if self.merge_levels > self.truncation_depth {
            return Err(Error::Config(format!(
                "merge levels {} exceed truncation depth {}",
                self.merge_levels, self.truncation_depth
            )));
        }
        Ok(())
    }
}

impl Default for CompileConfig {
    fn default() -> Self {
        CompileConfig {
            truncation_depth: 8,
            merge_levels: DEFAULT_MERGE_LEVELS,
            verify_matches: true,
        }
    }
}

#[derive(Debug, Clone, Default)]
struct GraphNode {
    labels: Vec<u8>,
    children: Vec<usize>,
    terminal: bool,
    ids: Vec<PatternId>,
}

/// Pointer form of a trie. Node 0 is the root.
#[derive(Debug, Clone)]
struct Graph {
    nodes: Vec<GraphNode>,
}

fn union_ids(into: &mut Vec<PatternId>, from: &[PatternId]) {
    if from.is_empty() {
        return;
    }
    into.extend_from_slice(from);
    into.sort_unstable();
    into.dedup();
}

impl Graph {
    fn decode(trie: &LevelizedTrie) -> Self {
        let nodes = trie
            .nodes
            .iter()
            .enumerate()
            .map(|(i, node)| {
                let first = node.first_child_offset as usize;
                GraphNode {
                    labels: node.labels().collect(),
                    children: (first..first + node.child_count() as usize).collect(),
                    terminal: trie.match_flags[i],
                    ids: trie.pattern_ids(i as NodeIndex).to_vec(),
                }
            })
            .collect();
        Graph { nodes }
    }

    /// Shortest root distance of every node; `usize::MAX` when unreachable.
    fn depths(&self) -> Vec<usize> {
        let mut depth = vec![usize::MAX; self.nodes.len()];
        depth[0] = 0;
        let mut queue = VecDeque::from([0]);
        while let Some(g) = queue.pop_front() {
            for &child in &self.nodes[g].children {
                if depth[child] == usize::MAX {
                    depth[child] = depth[g] + 1;
                    queue.push_back(child);
                }
            }
        }
        depth
    }

    /// Rebuilds the graph from representatives, keeping only nodes reachable
    /// from the root. `rep[g]` names the node that replaces `g`.
    fn quotient(&self, rep: &[usize]) -> Graph {
        let mut ids: Vec<Vec<PatternId>> = vec![Vec::new(); self.nodes.len()];
        for (g, node) in self.nodes.iter().enumerate() {
            union_ids(&mut ids[rep[g]], &node.ids);
        }
        let mut new_index = HashMap::new();
        let mut order = vec![rep[0]];
        new_index.insert(rep[0], 0);
        let mut i = 0;
        while i < order.len() {
            let g = order[i];
            for &child in &self.nodes[g].children {
                let r = rep[child];
                if let std::collections::hash_map::Entry::Vacant(e) = new_index.entry(r) {
                    e.insert(order.len());
                    order.push(r);
                }
            }
            i += 1;
        }
        let nodes = order
            .iter()
            .map(|&g| {
                let node = &self.nodes[g];
                GraphNode {
                    labels: node.labels.clone(),
                    children: node.children.iter().map(|&c| new_index[&rep[c]]).collect(),
                    terminal: node.terminal,
                    ids: std::mem::take(&mut ids[g]),
                }
            })
            .collect();
        Graph { nodes }
    }

    /// Lays the graph out breadth-first. With `shared_end`, every childless
    /// node becomes the end node, and sibling groups made only of end nodes
    /// point into one trailing block of all-zero rows.
    fn layout(&self, shared_end: bool, alphabet_size: u16) -> LevelizedTrie {
        let mut end_ids = Vec::new();
        let is_end = |g: usize| shared_end && self.nodes[g].children.is_empty();
        if shared_end {
            for node in self.nodes.iter().filter(|n| n.children.is_empty()) {
                union_ids(&mut end_ids, &node.ids);
            }
        }
        // Child lists keyed with every end node folded into one sentinel.
        const END: usize = usize::MAX;
        let key_of = |g: usize| -> Vec<usize> {
            self.nodes[g]
                .children
                .iter()
                .map(|&c| if is_end(c) { END } else { c })
                .collect()
        };

        let mut rows: Vec<usize> = vec![0];
        let mut offsets: Vec<u32> = Vec::new();
        let mut level_starts: Vec<NodeIndex> = vec![0];
        let mut blocks: HashMap<Vec<usize>, u32> = HashMap::new();
        let mut end_parents = Vec::new();
        let mut end_width = 0;
        let mut begin = 0;
        while begin < rows.len() {
            let end = rows.len();
            for r in begin..end {
                let g = rows[r];
                let children = &self.nodes[g].children;
                if children.is_empty() {
                    offsets.push(0);
                } else if children.iter().all(|&c| is_end(c)) {
                    end_width = end_width.max(children.len());
                    end_parents.push(r);
                    offsets.push(0);
                } else {
                    let key = key_of(g);
                    let offset = *blocks.entry(key).or_insert_with(|| {
                        let at = rows.len() as u32;
                        rows.extend_from_slice(children);
                        at
                    });
                    offsets.push(offset);
                }
            }
            if rows.len() > end {
                level_starts.push(end as NodeIndex);
            }
            begin = end;
        }

        let mut end_nodes = None;
        if shared_end {
            let start = rows.len() as NodeIndex;
            level_starts.push(start);
            for &r in &end_parents {
                offsets[r] = start;
            }
            let rep = (0..self.nodes.len()).find(|&g| is_end(g)).unwrap();
            rows.extend(std::iter::repeat_n(rep, end_width));
            offsets.extend(std::iter::repeat_n(0, end_width));
            end_nodes = Some(start..rows.len() as NodeIndex);
        }

        let mut nodes = Vec::with_capacity(rows.len());
        let mut match_flags = MatchFlags::with_capacity(rows.len());
        let mut pattern_index = BTreeMap::new();
        for (r, &g) in rows.iter().enumerate() {
            let node = &self.nodes[g];
            nodes.push(TrieNode::from_labels(
                node.labels.iter().copied(),
                offsets[r],
            ));
            let ids = if is_end(g) { &end_ids } else { &node.ids };
            match_flags.push(node.terminal || is_end(g));
            if !ids.is_empty() {
                pattern_index.insert(r as NodeIndex, ids.clone());
            }
        }
        LevelizedTrie {
            nodes,
            level_starts,
            match_flags,
            pattern_index,
            end_nodes,
            alphabet_size,
        }
    }
}

/// Builds the full trie of `patterns`, breadth-first and row-major.
pub fn build_trie(patterns: &PatternSet) -> Result<LevelizedTrie> {
    if patterns.is_empty() {
        return Err(Error::Config("pattern set is empty".into()));
    }
    let mut children: Vec<BTreeMap<u8, usize>> = vec![BTreeMap::new()];
    let mut nodes = vec![GraphNode::default()];
    for (id, pattern) in patterns.patterns().iter().enumerate() {
        let mut g = 0;
        for &c in pattern {
            if u16::from(c) >= patterns.alphabet_size() {
                return Err(Error::Encoding {
                    pattern: id,
                    byte: c,
                    alphabet_size: patterns.alphabet_size(),
                });
            }
            let next = nodes.len();
            g = *children[g].entry(c).or_insert(next);
            if g == next {
                children.push(BTreeMap::new());
                nodes.push(GraphNode::default());
            }
        }
        nodes[g].terminal = true;
        nodes[g].ids.push(id as PatternId);
    }
    for (node, kids) in nodes.iter_mut().zip(&children) {
        node.labels = kids.keys().copied().collect();
        node.children = kids.values().copied().collect();
    }
    Ok(Graph { nodes }.layout(false, patterns.alphabet_size()))
}

/// Cuts every root path after `depth` bytes. Nodes left without children
/// become match nodes carrying the ids of every pattern below them.
pub fn truncate(trie: &LevelizedTrie, depth: usize) -> LevelizedTrie {
    let depth = depth.max(1);
    let mut graph = Graph::decode(trie);
    let depths = graph.depths();
    let n = graph.nodes.len();

    // Pattern ids below each node. Children always follow their parents.
    let mut below: Vec<Vec<PatternId>> = vec![Vec::new(); n];
    for g in (0..n).rev() {
        let node = &graph.nodes[g];
        if depths[g] == usize::MAX || (depths[g] < depth && !node.children.is_empty()) {
            continue;
        }
        let mut ids = node.ids.clone();
        for &c in &node.children {
            union_ids(&mut ids, &below[c]);
        }
        below[g] = ids;
    }
    for g in 0..n {
        if depths[g] == depth && !graph.nodes[g].children.is_empty() {
            let node = &mut graph.nodes[g];
            node.labels.clear();
            node.children.clear();
            node.terminal = true;
            node.ids = std::mem::take(&mut below[g]);
        }
    }
    let rep: Vec<usize> = (0..n).collect();
    graph
        .quotient(&rep)
        .layout(trie.end_nodes.is_some(), trie.alphabet_size)
}

/// Level, labels, match flag and merged children of a node.
type MergeKey<'a> = (usize, &'a [u8], bool, Vec<usize>);

/// Shares identical subtrees among the deepest `merge_levels` levels.
///
/// Two nodes on the same level merge when their keys are equal.
pub fn merge_suffixes(trie: &LevelizedTrie, merge_levels: usize) -> LevelizedTrie {
    if merge_levels == 0 {
        return trie.clone();
    }
    let graph = Graph::decode(trie);
    let depths = graph.depths();
    let height = depths
        .iter()
        .copied()
        .filter(|&d| d != usize::MAX)
        .max()
        .unwrap_or(0);
    let window_start = (height + 1).saturating_sub(merge_levels);

    let n = graph.nodes.len();
    let mut rep: Vec<usize> = (0..n).collect();
    let mut seen: HashMap<MergeKey, usize> = HashMap::new();
    // Children always follow their parents, so walking backwards settles
    // every child before its parent.
    for g in (0..n).rev() {
        if depths[g] == usize::MAX || depths[g] < window_start {
            continue;
        }
        let node = &graph.nodes[g];
        let children: Vec<usize> = node.children.iter().map(|&c| rep[c]).collect();
        let key = (depths[g], node.labels.as_slice(), node.terminal, children);
        rep[g] = *seen.entry(key).or_insert(g);
    }
    graph
        .quotient(&rep)
        .layout(trie.end_nodes.is_some(), trie.alphabet_size)
}

/// Replaces every childless node with the shared end node.
pub fn merge_leaves(trie: &LevelizedTrie) -> LevelizedTrie {
    Graph::decode(trie).layout(true, trie.alphabet_size)
}

/// Every intermediate trie of the compile pipeline.
#[derive(Debug, Clone)]
pub struct CompileStages {
    pub full: LevelizedTrie,
    pub truncated: LevelizedTrie,
    pub suffix_merged: LevelizedTrie,
    pub leaf_merged: LevelizedTrie,
}

pub fn compile_stages(patterns: &PatternSet, cfg: &CompileConfig) -> Result<CompileStages> {
    cfg.check()?;
    let full = build_trie(patterns)?;
    let truncated = truncate(&full, cfg.truncation_depth);
    let suffix_merged = merge_suffixes(&truncated, cfg.merge_levels);
    let leaf_merged = merge_leaves(&suffix_merged);
    Ok(CompileStages {
        full,
        truncated,
        suffix_merged,
        leaf_merged,
    })
}

/// Runs the whole pipeline: build, truncate, merge suffixes, merge leaves.
pub fn compile(patterns: &PatternSet, cfg: &CompileConfig) -> Result<LevelizedTrie> {
    cfg.check()?;
    let full = build_trie(patterns)?;
    let truncated = truncate(&full, cfg.truncation_depth);
    Ok(merge_leaves(&merge_suffixes(&truncated, cfg.merge_levels)))
}
