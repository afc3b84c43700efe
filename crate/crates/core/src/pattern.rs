//! Pattern sets and the two on-disk pattern list formats.
//!
//! The text format holds one pattern per line. Printable ASCII is taken
//! literally; `\xHH` encodes an arbitrary byte and `\\` a backslash. Blank
//! lines are skipped. The binary format is a sequence of records, each a
//! little-endian `u32` length followed by that many bytes.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Identifier of a pattern: its index in [`PatternSet::patterns`].
pub type PatternId = u32;

/// A deduplicated, ordered list of non-empty byte-string patterns over an
/// alphabet of `alphabet_size` symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSet {
    patterns: Vec<Vec<u8>>,
    alphabet_size: u16,
}

impl PatternSet {
    /// Builds a set over the full byte alphabet.
    pub fn new<I, P>(patterns: I) -> Result<Self>
    where
        I: IntoIterator<Item = P>,
        P: AsRef<[u8]>,
    {
        Self::with_alphabet(patterns, 256)
    }

    /// Builds a set, dropping later duplicates. Ids follow first occurrence.
    pub fn with_alphabet<I, P>(patterns: I, alphabet_size: u16) -> Result<Self>
    where
        I: IntoIterator<Item = P>,
        P: AsRef<[u8]>,
    {
        if !(2..=256).contains(&alphabet_size) {
            return Err(Error::Config(format!(
                "alphabet size {alphabet_size} outside [2, 256]"
            )));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for p in patterns {
            let p = p.as_ref();
            if p.is_empty() {
                return Err(Error::Config("empty pattern".into()));
            }
            if let Some(&byte) = p.iter().find(|&&b| u16::from(b) >= alphabet_size) {
                return Err(Error::Encoding {
                    pattern: out.len(),
                    byte,
                    alphabet_size,
                });
            }
            if seen.insert(p.to_vec()) {
                out.push(p.to_vec());
            }
        }
        if out.is_empty() {
            return Err(Error::Config("pattern set is empty".into()));
        }
        Ok(PatternSet {
            patterns: out,
            alphabet_size,
        })
    }

    pub fn patterns(&self) -> &[Vec<u8>] {
        &self.patterns
    }

    pub fn get(&self, id: PatternId) -> Option<&[u8]> {
        self.patterns.get(id as usize).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn alphabet_size(&self) -> u16 {
        self.alphabet_size
    }

    pub fn longest(&self) -> usize {
        self.patterns.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Parses the newline-delimited escaped text format.
    pub fn parse_text(input: &[u8], alphabet_size: u16) -> Result<Self> {
        let mut patterns = Vec::new();
        for (i, line) in input.split(|&b| b == b'\n').enumerate() {
            let line = line.strip_suffix(b"\r").unwrap_or(line);
            if line.is_empty() {
                continue;
            }
            patterns.push(unescape(line).map_err(|message| Error::PatternSyntax {
                line: i + 1,
                message,
            })?);
        }
        Self::with_alphabet(patterns, alphabet_size)
    }

    /// Parses the length-prefixed binary format.
    pub fn parse_binary(mut input: &[u8], alphabet_size: u16) -> Result<Self> {
        let mut patterns = Vec::new();
        while !input.is_empty() {
            if input.len() < 4 {
                return Err(Error::Config("truncated length prefix".into()));
            }
            let len = u32::from_le_bytes(input[..4].try_into().unwrap()) as usize;
            input = &input[4..];
            if input.len() < len {
                return Err(Error::Config(format!(
                    "record of length {len} runs past end of input"
                )));
            }
            patterns.push(&input[..len]);
            input = &input[len..];
        }
        Self::with_alphabet(patterns, alphabet_size)
    }

    pub fn to_text(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for p in &self.patterns {
            out.extend_from_slice(&escape(p));
            out.push(b'\n');
        }
        out
    }

    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for p in &self.patterns {
            out.extend_from_slice(&(p.len() as u32).to_le_bytes());
            out.extend_from_slice(p);
        }
        out
    }
}

/// Escapes a pattern for the text format.
pub fn escape(bytes: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(bytes.len());
    for &b in bytes {
        match b {
            b'\\' => out.extend_from_slice(b"\\\\"),
            0x20..=0x7e => out.push(b),
            _ => out.extend_from_slice(format!("\\x{b:02x}").as_bytes()),
        }
    }
    out
}

/// Reverses [`escape`].
pub fn unescape(line: &[u8]) -> std::result::Result<Vec<u8>, String> {
    let mut out = Vec::with_capacity(line.len());
    let mut i = 0;
    while i < line.len() {
        if line[i] != b'\\' {
            out.push(line[i]);
            i += 1;
            continue;
        }
        match line.get(i + 1) {
            Some(b'\\') => {
                out.push(b'\\');
                i += 2;
            }
            Some(b'x') => {
                let hex = line
                    .get(i + 2..i + 4)
                    .ok_or_else(|| format!("incomplete \\x escape at column {}", i + 1))?;
                let hex =
                    std::str::from_utf8(hex).map_err(|_| "non-ASCII hex digits".to_string())?;
                let b = u8::from_str_radix(hex, 16)
                    .map_err(|_| format!("invalid hex digits {hex:?} at column {}", i + 3))?;
                out.push(b);
                i += 4;
            }
            _ => return Err(format!("unknown escape at column {}", i + 1)),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn duplicates_are_coalesced_in_first_occurrence_order() {
        let set = PatternSet::new(["b", "a", "b", "c", "a"]).unwrap();
        assert_eq!(
            set.patterns(),
            &[b"b".to_vec(), b"a".to_vec(), b"c".to_vec()]
        );
    }

    #[test]
    fn rejects_empty_set_and_empty_pattern() {
        assert!(matches!(
            PatternSet::new(Vec::<&[u8]>::new()),
            Err(Error::Config(_))
        ));
        assert!(matches!(PatternSet::new(["a", ""]), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_bytes_outside_alphabet() {
        let err = PatternSet::with_alphabet([vec![0u8, 1], vec![2, 4]], 4).unwrap_err();
        assert!(matches!(
            err,
            Error::Encoding {
                pattern: 1,
                byte: 4,
                alphabet_size: 4
            }
        ));
        assert!(PatternSet::with_alphabet(["a"], 1).is_err());
        assert!(PatternSet::with_alphabet(["a"], 257).is_err());
    }

    #[test]
    fn text_format_escapes() {
        let set = PatternSet::parse_text(b"abc\n\\x00\\xff\n\na\\\\b\r\n", 256).unwrap();
        assert_eq!(
            set.patterns(),
            &[b"abc".to_vec(), vec![0, 0xff], b"a\\b".to_vec()]
        );
        assert!(matches!(
            PatternSet::parse_text(b"ok\nbad\\q\n", 256),
            Err(Error::PatternSyntax { line: 2, .. })
        ));
        assert!(PatternSet::parse_text(b"\\x4", 256).is_err());
    }

    #[test]
    fn binary_format_rejects_short_records() {
        assert!(PatternSet::parse_binary(&[5, 0, 0, 0, b'a'], 256).is_err());
        assert!(PatternSet::parse_binary(&[1, 0], 256).is_err());
    }

    proptest! {
        #[test]
        fn both_formats_round_trip(pats in prop::collection::vec(prop::collection::vec(any::<u8>(), 1..12), 1..20)) {
            let set = PatternSet::new(&pats).unwrap();
            prop_assert_eq!(&PatternSet::parse_text(&set.to_text(), 256).unwrap(), &set);
            prop_assert_eq!(&PatternSet::parse_binary(&set.to_binary(), 256).unwrap(), &set);
        }
    }
}
