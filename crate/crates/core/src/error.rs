use std::io;

use thiserror::Error;

/// Errors produced while loading a serialized trie.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("bad magic bytes {0:?}, expected \"CRST\"")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("stream truncated while reading {0}")]
    Truncated(&'static str),
    #[error("invariant violated on load: {0}")]
    Invariant(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(
        "pattern {pattern} contains byte {byte:#04x} outside an alphabet of size {alphabet_size}"
    )]
    Encoding {
        pattern: usize,
        byte: u8,
        alphabet_size: u16,
    },
    #[error("pattern file line {line}: {message}")]
    PatternSyntax { line: usize, message: String },
    #[error("cell ({row}, {col}) out of range for a {rows}x9 matrix")]
    Bounds { row: usize, col: usize, rows: usize },
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
