//! Independent oracles shared by the integration suites.
//!
//! Nothing here calls into the compiler or matcher; expected values are
//! derived from a plain pointer trie and from brute-force scanning.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand_mt::Mt;

/// A pointer trie built by straightforward insertion.
#[derive(Debug, Default, Clone)]
pub struct PointerTrie {
    pub children: BTreeMap<u8, PointerTrie>,
    pub terminal: bool,
}

impl PointerTrie {
    pub fn new<P: AsRef<[u8]>>(patterns: &[P]) -> Self {
        let mut root = PointerTrie::default();
        for p in patterns {
            let mut node = &mut root;
            for &c in p.as_ref() {
                node = node.children.entry(c).or_default();
            }
            node.terminal = true;
        }
        root
    }

    /// Same trie cut after `depth` bytes; cut nodes become terminal.
    pub fn truncated(&self, depth: usize) -> Self {
        if depth == 0 {
            return PointerTrie {
                children: BTreeMap::new(),
                terminal: self.terminal || !self.children.is_empty(),
            };
        }
        PointerTrie {
            children: self
                .children
                .iter()
                .map(|(&c, n)| (c, n.truncated(depth - 1)))
                .collect(),
            terminal: self.terminal,
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .children
            .values()
            .map(PointerTrie::node_count)
            .sum::<usize>()
    }

    pub fn height(&self) -> usize {
        self.children
            .values()
            .map(|c| 1 + c.height())
            .max()
            .unwrap_or(0)
    }

    /// Rows needed once identical subtrees within the deepest `merge_levels`
    /// levels are shared, parents with identical child lists share one
    /// block, and (with `merge_leaves`) leaf-only child lists point into a
    /// single end block as wide as the widest such list.
    pub fn merged_row_count(&self, merge_levels: usize, merge_leaves: bool) -> usize {
        let height = self.height();
        let window = (height + 1).saturating_sub(merge_levels);
        let mut counter = 0usize;
        let mut blocks = BTreeSet::new();
        let mut end_width = 0usize;
        let mut rows = 1;

        // Canonical name of each subtree; unique unless inside the window.
        fn name(
            node: &PointerTrie,
            depth: usize,
            window: usize,
            merge_levels: usize,
            merge_leaves: bool,
            counter: &mut usize,
        ) -> String {
            if merge_leaves && node.children.is_empty() {
                return "END".into();
            }
            let inner: Vec<String> = node
                .children
                .iter()
                .map(|(c, n)| {
                    format!(
                        "{c}:{}",
                        name(n, depth + 1, window, merge_levels, merge_leaves, counter)
                    )
                })
                .collect();
            if merge_levels > 0 && depth >= window {
                format!("{depth}:{}({})", u8::from(node.terminal), inner.join(","))
            } else {
                *counter += 1;
                format!("#{counter}")
            }
        }

        // Breadth-first over the tree, naming each child list.
        let mut queue = vec![(self, 0usize)];
        while let Some((node, depth)) = queue.pop() {
            if node.children.is_empty() {
                continue;
            }
            let names: Vec<String> = node
                .children
                .values()
                .map(|n| {
                    name(
                        n,
                        depth + 1,
                        window,
                        merge_levels,
                        merge_leaves,
                        &mut counter,
                    )
                })
                .collect();
            if merge_leaves && names.iter().all(|n| n == "END") {
                end_width = end_width.max(names.len());
                continue;
            }
            // Unique names make non-window lists distinct; window lists are
            // shared when equal.
            let key = names.join("|");
            if blocks.insert(key) {
                rows += names.len();
                for n in node.children.values() {
                    queue.push((n, depth + 1));
                }
            }
        }
        rows + end_width
    }
}

/// Prefix of `p` kept by a trie truncated at `depth`.
pub fn compiled_prefix(p: &[u8], depth: usize) -> &[u8] {
    &p[..p.len().min(depth)]
}

/// Every `(position, pattern id)` where a pattern occurs in full.
pub fn brute_force<P: AsRef<[u8]>>(patterns: &[P], text: &[u8]) -> BTreeSet<(usize, u32)> {
    let mut out = BTreeSet::new();
    for (id, p) in patterns.iter().enumerate() {
        let p = p.as_ref();
        if p.len() > text.len() {
            continue;
        }
        for pos in 0..=text.len() - p.len() {
            if &text[pos..pos + p.len()] == p {
                out.insert((pos, id as u32));
            }
        }
    }
    out
}

/// For each position, the length of the shortest compiled prefix that
/// occurs there, if any.
pub fn shortest_prefix_hits<P: AsRef<[u8]>>(
    patterns: &[P],
    text: &[u8],
    depth: usize,
) -> BTreeMap<usize, usize> {
    let prefixes: BTreeSet<&[u8]> = patterns
        .iter()
        .map(|p| compiled_prefix(p.as_ref(), depth))
        .collect();
    let mut out = BTreeMap::new();
    for pos in 0..text.len() {
        for len in 1..=depth.min(text.len() - pos) {
            if prefixes.contains(&text[pos..pos + len]) {
                out.insert(pos, len);
                break;
            }
        }
    }
    out
}

/// Random inputs for oracle trials.
pub struct TrialGen {
    rng: Mt,
}

pub struct Trial {
    pub alphabet: u16,
    pub patterns: Vec<Vec<u8>>,
    pub text: Vec<u8>,
    pub depth: usize,
    pub merge_levels: usize,
}

impl TrialGen {
    pub fn new(seed: u32) -> Self {
        TrialGen { rng: Mt::new(seed) }
    }

    pub fn below(&mut self, n: usize) -> usize {
        (u64::from(self.rng.next_u32()) % n as u64) as usize
    }

    pub fn bytes(&mut self, len: usize, alphabet: u16) -> Vec<u8> {
        (0..len)
            .map(|_| self.below(alphabet as usize) as u8)
            .collect()
    }

    /// Up to `max_patterns` distinct patterns of 1..=`max_len` bytes.
    pub fn patterns(&mut self, alphabet: u16, max_patterns: usize, max_len: usize) -> Vec<Vec<u8>> {
        let want = 1 + self.below(max_patterns);
        let mut seen = HashMap::new();
        let mut out = Vec::new();
        for _ in 0..want {
            let len = 1 + self.below(max_len);
            let p = if !out.is_empty() && self.below(3) == 0 {
                // share a prefix with an earlier pattern
                let base: &Vec<u8> = &out[self.below(out.len())];
                let keep = self.below(base.len() + 1);
                let mut p = base[..keep].to_vec();
                p.extend(self.bytes(len.saturating_sub(keep).max(1), alphabet));
                p
            } else {
                self.bytes(len, alphabet)
            };
            if seen.insert(p.clone(), ()).is_none() {
                out.push(p);
            }
        }
        out
    }

    /// Random text with pattern copies and near-misses planted in it.
    pub fn text(&mut self, alphabet: u16, patterns: &[Vec<u8>], max_len: usize) -> Vec<u8> {
        let len = self.below(max_len + 1);
        let mut text = self.bytes(len, alphabet);
        if text.is_empty() {
            return text;
        }
        let plants = self.below(len / 8 + 2);
        for _ in 0..plants {
            let p = &patterns[self.below(patterns.len())];
            let mut p = p.clone();
            if self.below(4) == 0 {
                // damage the tail so only a prefix survives
                let at = self.below(p.len());
                p[at] = self.below(alphabet as usize) as u8;
            }
            let pos = self.below(text.len());
            let end = (pos + p.len()).min(text.len());
            text[pos..end].copy_from_slice(&p[..end - pos]);
        }
        text
    }

    pub fn trial(&mut self, alphabet: u16, max_text: usize) -> Trial {
        let patterns = self.patterns(alphabet, 50, 12);
        let text = self.text(alphabet, &patterns, max_text);
        let depth = 1 + self.below(12);
        let merge_levels = self.below(depth.min(4) + 1);
        Trial {
            alphabet,
            patterns,
            text,
            depth,
            merge_levels,
        }
    }
}
