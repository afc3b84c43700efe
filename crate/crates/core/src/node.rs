/// Number of 32-bit words in a node bitmap.
pub const BITMAP_WORDS: usize = 8;

/// Serialized size of a node: 256-bit bitmap plus a 32-bit offset.
pub const NODE_BYTES: usize = 36;

/// A bitmapped trie node.
///
/// Bit `b` of word `w` is set when a child labeled `32 * w + b` exists. The
/// children of a node occupy consecutive node indices starting at
/// `first_child_offset`, in ascending label order, so the child for label `c`
/// lives at `first_child_offset + rank(c)` where `rank(c)` counts the set bits
/// strictly below `c`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct TrieNode {
    pub bitmap: [u32; BITMAP_WORDS],
    pub first_child_offset: u32,
}

impl TrieNode {
    pub fn from_labels(labels: impl IntoIterator<Item = u8>, first_child_offset: u32) -> Self {
        let mut node = TrieNode {
            bitmap: [0; BITMAP_WORDS],
            first_child_offset,
        };
        for c in labels {
            node.set(c);
        }
        node
    }

    pub fn set(&mut self, c: u8) {
        self.bitmap[usize::from(c >> 5)] |= 1 << (c & 31);
    }

    #[inline]
    pub fn has_child(&self, c: u8) -> bool {
        self.bitmap[usize::from(c >> 5)] & (1 << (c & 31)) != 0
    }

    /// Number of set bits strictly below `c`.
    #[inline]
    pub fn rank(&self, c: u8) -> u32 {
        let word = usize::from(c >> 5);
        let below: u32 = self.bitmap[..word].iter().map(|w| w.count_ones()).sum();
        below + (self.bitmap[word] & ((1u32 << (c & 31)) - 1)).count_ones()
    }

    #[inline]
    pub fn child(&self, c: u8) -> Option<u32> {
        self.has_child(c)
            .then(|| self.first_child_offset + self.rank(c))
    }

    pub fn child_count(&self) -> u32 {
        self.bitmap.iter().map(|w| w.count_ones()).sum()
    }

    pub fn is_leaf(&self) -> bool {
        self.bitmap.iter().all(|&w| w == 0)
    }

    /// Child labels in ascending order.
    pub fn labels(&self) -> impl Iterator<Item = u8> + '_ {
        (0..=255u8).filter(move |&c| self.has_child(c))
    }

    pub fn to_bytes(&self) -> [u8; NODE_BYTES] {
        let mut out = [0u8; NODE_BYTES];
        for (chunk, w) in out.chunks_exact_mut(4).zip(self.words()) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8; NODE_BYTES]) -> Self {
        let mut words = [0u32; 9];
        for (w, chunk) in words.iter_mut().zip(bytes.chunks_exact(4)) {
            *w = u32::from_le_bytes(chunk.try_into().unwrap());
        }
        Self::from_words(words)
    }

    /// The node as its nine matrix cells: bitmap words then the offset.
    pub fn words(&self) -> [u32; 9] {
        let mut out = [0u32; 9];
        out[..BITMAP_WORDS].copy_from_slice(&self.bitmap);
        out[BITMAP_WORDS] = self.first_child_offset;
        out
    }

    pub fn from_words(words: [u32; 9]) -> Self {
        let mut bitmap = [0u32; BITMAP_WORDS];
        bitmap.copy_from_slice(&words[..BITMAP_WORDS]);
        TrieNode {
            bitmap,
            first_child_offset: words[BITMAP_WORDS],
        }
    }
}
