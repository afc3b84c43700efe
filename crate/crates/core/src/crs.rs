//! Dense and Compressed Row Storage views of a levelized trie.
//!
//! The dense view is a `rows x 9` matrix of 32-bit words: eight bitmap words
//! followed by the first-child offset. The CRS view keeps only the non-zero
//! cells in three vectors (`val`, `col_ind`, `row_ptr`).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::node::{TrieNode, BITMAP_WORDS};
use crate::pattern::PatternId;
use crate::trie::{LevelizedTrie, MatchFlags, NodeIndex};

/// Columns per node row: eight bitmap words and the offset.
pub const COLS: usize = 9;

/// Column holding the first-child offset.
pub const OFFSET_COL: u8 = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseNodeMatrix {
    rows: usize,
    cells: Vec<u32>,
}

impl DenseNodeMatrix {
    pub fn from_cells(rows: usize, cells: Vec<u32>) -> Result<Self> {
        if cells.len() != rows * COLS {
            return Err(Error::Invariant(format!(
                "{} cells for {rows} rows of {COLS}",
                cells.len()
            )));
        }
        Ok(DenseNodeMatrix { rows, cells })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        COLS
    }

    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    pub fn cell(&self, row: usize, col: usize) -> u32 {
        self.cells[row * COLS + col]
    }

    pub fn row(&self, row: usize) -> &[u32] {
        &self.cells[row * COLS..(row + 1) * COLS]
    }

    pub fn node(&self, row: usize) -> TrieNode {
        TrieNode::from_words(self.row(row).try_into().unwrap())
    }

    pub fn nnz(&self) -> usize {
        self.cells.iter().filter(|&&c| c != 0).count()
    }

    /// Stored elements when kept dense.
    pub fn element_count(&self) -> usize {
        self.cells.len()
    }
}

/// Lays each node out as one matrix row.
pub fn to_dense(trie: &LevelizedTrie) -> DenseNodeMatrix {
    let cells = trie.nodes().iter().flat_map(TrieNode::words).collect();
    DenseNodeMatrix {
        rows: trie.len(),
        cells,
    }
}

/// A node matrix in Compressed Row Storage, with the match metadata of the
/// trie it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrsTrie {
    pub(crate) val: Vec<u32>,
    pub(crate) col_ind: Vec<u8>,
    pub(crate) row_ptr: Vec<u32>,
    pub(crate) rows: usize,
    pub(crate) match_flags: MatchFlags,
    pub(crate) pattern_index: BTreeMap<NodeIndex, Vec<PatternId>>,
    pub(crate) alphabet_size: u16,
}

/// Encodes the non-zero cells of `m` row by row.
pub fn encode_crs(m: &DenseNodeMatrix) -> CrsTrie {
    let mut val = Vec::new();
    let mut col_ind = Vec::new();
    let mut row_ptr = Vec::with_capacity(m.rows + 1);
    row_ptr.push(0);
    for r in 0..m.rows {
        for (c, &v) in m.row(r).iter().enumerate() {
            if v != 0 {
                val.push(v);
                col_ind.push(c as u8);
            }
        }
        row_ptr.push(val.len() as u32);
    }
    CrsTrie {
        val,
        col_ind,
        row_ptr,
        rows: m.rows,
        match_flags: MatchFlags::repeat(false, m.rows),
        pattern_index: BTreeMap::new(),
        alphabet_size: 256,
    }
}

impl CrsTrie {
    /// Encodes a compiled trie, carrying its match flags and pattern index.
    pub fn from_trie(trie: &LevelizedTrie) -> Self {
        let mut crs = encode_crs(&to_dense(trie));
        crs.match_flags = trie.match_flags().clone();
        crs.pattern_index = trie.pattern_index().clone();
        crs.alphabet_size = trie.alphabet_size();
        crs
    }

    pub fn val(&self) -> &[u32] {
        &self.val
    }

    pub fn col_ind(&self) -> &[u8] {
        &self.col_ind
    }

    pub fn row_ptr(&self) -> &[u32] {
        &self.row_ptr
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn alphabet_size(&self) -> u16 {
        self.alphabet_size
    }

    pub fn match_flags(&self) -> &MatchFlags {
        &self.match_flags
    }

    #[inline]
    pub fn is_match(&self, node: NodeIndex) -> bool {
        let i = node as usize;
        self.match_flags.as_raw_slice()[i >> 3] >> (i & 7) & 1 != 0
    }

    pub fn pattern_index(&self) -> &BTreeMap<NodeIndex, Vec<PatternId>> {
        &self.pattern_index
    }

    #[inline]
    fn segment(&self, row: usize) -> std::ops::Range<usize> {
        self.row_ptr[row] as usize..self.row_ptr[row + 1] as usize
    }

    /// Dense cell value at `(row, col)`; zero when the cell is not stored.
    pub fn crs_lookup(&self, row: usize, col: usize) -> Result<u32> {
        if row >= self.rows || col >= COLS {
            return Err(Error::Bounds {
                row,
                col,
                rows: self.rows,
            });
        }
        let seg = self.segment(row);
        Ok(self.col_ind[seg.clone()]
            .binary_search(&(col as u8))
            .map_or(0, |i| self.val[seg.start + i]))
    }

    /// Child of `node` labeled `c`, resolved directly on the stored words.
    ///
    /// Only words with a column below `c / 32` contribute to the rank, plus
    /// the low bits of word `c / 32` itself.
    #[inline]
    pub fn child_lookup(&self, node: NodeIndex, c: u8) -> Option<NodeIndex> {
        let seg = self.segment(node as usize);
        let cols = &self.col_ind[seg.clone()];
        let vals = &self.val[seg];
        let word = c >> 5;
        let bit = 1u32 << (c & 31);
        let mut rank = 0;
        let mut i = 0;
        while i < cols.len() && cols[i] < word {
            rank += vals[i].count_ones();
            i += 1;
        }
        if i == cols.len() || cols[i] != word || vals[i] & bit == 0 {
            return None;
        }
        rank += (vals[i] & (bit - 1)).count_ones();
        // a row with children always stores its offset last
        let last = cols.len() - 1;
        let offset = if cols[last] == OFFSET_COL {
            vals[last]
        } else {
            0
        };
        Some(offset + rank)
    }

    /// Stored elements: `2 * nnz + n + 1`.
    pub fn storage_cost(&self) -> usize {
        storage_cost(self.nnz(), self.rows)
    }

    /// Rebuilds the dense matrix.
    pub fn to_dense(&self) -> DenseNodeMatrix {
        let mut cells = vec![0u32; self.rows * COLS];
        for r in 0..self.rows {
            for i in self.segment(r) {
                cells[r * COLS + usize::from(self.col_ind[i])] = self.val[i];
            }
        }
        DenseNodeMatrix {
            rows: self.rows,
            cells,
        }
    }

    pub fn node(&self, row: NodeIndex) -> TrieNode {
        let mut words = [0u32; COLS];
        for i in self.segment(row as usize) {
            words[usize::from(self.col_ind[i])] = self.val[i];
        }
        TrieNode::from_words(words)
    }

    /// Length of the longest root path.
    pub fn height(&self) -> usize {
        let mut depth = vec![0usize; self.rows];
        let mut height = 0;
        for r in 0..self.rows {
            let node = self.node(r as NodeIndex);
            let d = depth[r];
            height = height.max(d);
            let first = node.first_child_offset as usize;
            for child in &mut depth[first..first + node.child_count() as usize] {
                *child = (*child).max(d + 1);
            }
        }
        height
    }

    /// Checks the CRS vector invariants and that every child reference is in
    /// range and points forward.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.row_ptr.len() != self.rows + 1 {
            return Err(format!(
                "row_ptr has {} entries for {} rows",
                self.row_ptr.len(),
                self.rows
            ));
        }
        if self.rows == 0 {
            return Err("matrix has no rows".into());
        }
        if self.row_ptr[0] != 0 {
            return Err("row_ptr[0] is not zero".into());
        }
        if self.row_ptr.windows(2).any(|w| w[0] > w[1]) {
            return Err("row_ptr is not monotone".into());
        }
        if self.row_ptr[self.rows] as usize != self.val.len()
            || self.val.len() != self.col_ind.len()
        {
            return Err("row_ptr, val and col_ind lengths disagree".into());
        }
        if self.val.contains(&0) {
            return Err("zero stored in val".into());
        }
        for r in 0..self.rows {
            let cols = &self.col_ind[self.segment(r)];
            if cols.iter().any(|&c| usize::from(c) >= COLS) {
                return Err(format!("row {r} has a column index past {}", COLS - 1));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("row {r} column indices not strictly increasing"));
            }
            let node = self.node(r as NodeIndex);
            let count = node.child_count() as usize;
            if count > 0 {
                let first = node.first_child_offset as usize;
                if first <= r || first + count > self.rows {
                    return Err(format!("row {r} children out of range"));
                }
            }
        }
        if self.match_flags.len() != self.rows {
            return Err("match flag count differs from row count".into());
        }
        if let Some(&key) = self.pattern_index.keys().next_back() {
            if key as usize >= self.rows {
                return Err(format!("pattern index references row {key}"));
            }
        }
        Ok(())
    }
}

/// Elements needed to store an `n`-row matrix with `nnz` non-zeros in CRS.
pub fn storage_cost(nnz: usize, n: usize) -> usize {
    2 * nnz + n + 1
}

/// Elements needed to store `rows` nodes densely.
pub fn dense_cost(rows: usize) -> usize {
    rows * COLS
}

/// Every non-zero cell as `(row, col, value)`.
pub fn occupancy(crs: &CrsTrie) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
    (0..crs.rows).flat_map(move |r| {
        crs.segment(r)
            .map(move |i| (r, usize::from(crs.col_ind[i]), crs.val[i]))
    })
}

// Bitmap words come first in a row, then the offset.
const _: () = assert!(BITMAP_WORDS + 1 == COLS);
