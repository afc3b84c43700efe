//! Binary file format for compiled tries.
//!
//! All integers are little-endian.
//!
//! ```text
//! magic        "CRST"
//! version      u16
//! alphabet     u8      alphabet size minus one
//! rows         u32
//! nnz          u32
//! row_ptr      u32 x (rows + 1)
//! col_ind      u8  x nnz
//! val          u32 x nnz
//! match_flags  ceil(rows / 8) bytes, bit i of byte k is node 8k + i
//! index_len    u32
//! index        index_len x (node u32, count u32, count x id u32)
//! ```

use std::collections::BTreeMap;

use crate::crs::CrsTrie;
use crate::error::FormatError;
use crate::trie::MatchFlags;

pub const MAGIC: [u8; 4] = *b"CRST";
pub const VERSION: u16 = 1;

pub fn serialize(crs: &CrsTrie) -> Vec<u8> {
    let mut out =
        Vec::with_capacity(19 + 4 * (crs.rows + 1) + 5 * crs.nnz() + crs.rows.div_ceil(8));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push((crs.alphabet_size - 1) as u8);
    out.extend_from_slice(&(crs.rows as u32).to_le_bytes());
    out.extend_from_slice(&(crs.nnz() as u32).to_le_bytes());
    for &p in &crs.row_ptr {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out.extend_from_slice(&crs.col_ind);
    for &v in &crs.val {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let mut flags = vec![0u8; crs.rows.div_ceil(8)];
    for i in crs.match_flags.iter_ones() {
        flags[i / 8] |= 1 << (i % 8);
    }
    out.extend_from_slice(&flags);
    out.extend_from_slice(&(crs.pattern_index.len() as u32).to_le_bytes());
    for (&node, ids) in &crs.pattern_index {
        out.extend_from_slice(&node.to_le_bytes());
        out.extend_from_slice(&(ids.len() as u32).to_le_bytes());
        for &id in ids {
            out.extend_from_slice(&id.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], FormatError> {
        if self.buf.len() < n {
            return Err(FormatError::Truncated(what));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u32(&mut self, what: &'static str) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u32s(&mut self, n: usize, what: &'static str) -> Result<Vec<u32>, FormatError> {
        let bytes = self.take(n.checked_mul(4).ok_or(FormatError::Truncated(what))?, what)?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn deserialize(bytes: &[u8]) -> Result<CrsTrie, FormatError> {
    let mut r = Reader { buf: bytes };
    let magic: [u8; 4] = r
        .take(4, "magic")
        .map_err(|_| FormatError::BadMagic(padded_magic(bytes)))?
        .try_into()
        .unwrap();
    if magic != MAGIC {
        return Err(FormatError::BadMagic(magic));
    }
    let version = u16::from_le_bytes(r.take(2, "version")?.try_into().unwrap());
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let alphabet_size = u16::from(r.take(1, "alphabet size")?[0]) + 1;
    if alphabet_size < 2 {
        return Err(FormatError::Invariant("alphabet size below 2".into()));
    }
    let rows = r.u32("row count")? as usize;
    let nnz = r.u32("nnz")? as usize;
    let row_ptr = r.u32s(rows + 1, "row_ptr")?;
    let col_ind = r.take(nnz, "col_ind")?.to_vec();
    let val = r.u32s(nnz, "val")?;
    let flag_bytes = r.take(rows.div_ceil(8), "match flags")?;
    let mut match_flags = MatchFlags::from_slice(flag_bytes);
    if match_flags[rows..].any() {
        return Err(FormatError::Invariant(
            "padding bits set in match flags".into(),
        ));
    }
    match_flags.truncate(rows);

    let entries = r.u32("pattern index length")?;
    let mut pattern_index = BTreeMap::new();
    let mut last = None;
    for _ in 0..entries {
        let node = r.u32("pattern index node")?;
        if last.is_some_and(|l| l >= node) {
            return Err(FormatError::Invariant(
                "pattern index not sorted by node".into(),
            ));
        }
        last = Some(node);
        let count = r.u32("pattern index count")? as usize;
        let ids = r.u32s(count, "pattern ids")?;
        if ids.is_empty() || ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FormatError::Invariant(format!(
                "pattern ids of node {node} empty or unsorted"
            )));
        }
        pattern_index.insert(node, ids);
    }
    if !r.buf.is_empty() {
        return Err(FormatError::Invariant(format!(
            "{} trailing bytes",
            r.buf.len()
        )));
    }
    let crs = CrsTrie {
        val,
        col_ind,
        row_ptr,
        rows,
        match_flags,
        pattern_index,
        alphabet_size,
    };
    crs.validate().map_err(FormatError::Invariant)?;
    Ok(crs)
}

fn padded_magic(bytes: &[u8]) -> [u8; 4] {
    let mut m = [0u8; 4];
    let n = bytes.len().min(4);
    m[..n].copy_from_slice(&bytes[..n]);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::{compile, CompileConfig};
    use crate::pattern::PatternSet;

    fn sample() -> CrsTrie {
        let p = PatternSet::new(["he", "she", "his", "hers"]).unwrap();
        CrsTrie::from_trie(&compile(&p, &CompileConfig::default()).unwrap())
    }

    #[test]
    fn round_trip_single_pattern() {
        let p = PatternSet::new(["a"]).unwrap();
        let crs = CrsTrie::from_trie(&compile(&p, &CompileConfig::default()).unwrap());
        let bytes = serialize(&crs);
        let back = deserialize(&bytes).unwrap();
        assert_eq!(back, crs);
        assert_eq!(serialize(&back), bytes);
    }

    #[test]
    fn header_layout() {
        let bytes = serialize(&sample());
        assert_eq!(&bytes[..4], b"CRST");
        assert_eq!(&bytes[4..6], &[1, 0]);
        assert_eq!(bytes[6], 255);
    }

    #[test]
    fn bad_magic() {
        let mut bytes = serialize(&sample());
        bytes[0] = b'X';
        assert!(matches!(deserialize(&bytes), Err(FormatError::BadMagic(_))));
        assert!(matches!(deserialize(b"CR"), Err(FormatError::BadMagic(_))));
    }

    #[test]
    fn bad_version() {
        let mut bytes = serialize(&sample());
        bytes[4] = 9;
        assert_eq!(deserialize(&bytes), Err(FormatError::UnsupportedVersion(9)));
    }

    #[test]
    fn non_monotone_row_ptr() {
        let crs = sample();
        let mut bytes = serialize(&crs);
        // row_ptr[1] starts at byte 15 + 4
        let bogus = crs.row_ptr()[2] + 1;
        bytes[19..23].copy_from_slice(&bogus.to_le_bytes());
        assert!(matches!(
            deserialize(&bytes),
            Err(FormatError::Invariant(_))
        ));
    }

    #[test]
    fn truncated_stream() {
        let crs = sample();
        let bytes = serialize(&crs);
        let val_start = 15 + 4 * (crs.rows() + 1) + crs.nnz();
        assert_eq!(
            deserialize(&bytes[..val_start + 3]),
            Err(FormatError::Truncated("val"))
        );
        assert!(matches!(
            deserialize(&bytes[..bytes.len() - 1]),
            Err(FormatError::Truncated(_))
        ));
    }

    #[test]
    fn trailing_bytes() {
        let mut bytes = serialize(&sample());
        bytes.push(0);
        assert!(matches!(
            deserialize(&bytes),
            Err(FormatError::Invariant(_))
        ));
    }
}
