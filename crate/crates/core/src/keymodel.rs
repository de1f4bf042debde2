//! Composite keys and their binary-comparable byte encodings.
//!
//! A composite key pairs a hierarchical path with a fixed-width value. Paths
//! are stored as their ASCII bytes followed by a `0x00` terminator so that no
//! encoded path is a prefix of another; values are big-endian unsigned
//! integers, so byte-wise order equals numeric order.

use std::fmt;

use thiserror::Error;

/// Path terminator byte (written `$` in diagrams).
pub const TERMINATOR: u8 = 0x00;

/// Path separator byte.
pub const SEPARATOR: u8 = b'/';

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeyError {
    #[error("path is empty")]
    EmptyPath,
    #[error("path must start with '/'")]
    MissingLeadingSlash,
    #[error("path contains an empty label at byte {0}")]
    EmptyLabel(usize),
    #[error("path contains disallowed byte 0x{byte:02x} at position {position}")]
    BadByte { byte: u8, position: usize },
    #[error("value {value} does not fit in {width} bytes")]
    ValueOverflow { value: u64, width: usize },
    #[error("unsupported value width {0} (expected 4 or 8)")]
    BadWidth(usize),
    #[error("value has {actual} bytes, index expects {expected}")]
    WidthMismatch { expected: usize, actual: usize },
    #[error("dimension {0} has no complement")]
    NoComplement(Dimension),
    #[error("encoded path is not terminated")]
    Unterminated,
}

/// The partitioning dimension of a node or of a partitioning step.
///
/// `Leaf` marks nodes (and final partitioning steps) that cannot be split
/// any further.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dimension {
    Path,
    Value,
    Leaf,
}

impl Dimension {
    pub fn complement(self) -> Result<Dimension, KeyError> {
        match self {
            Dimension::Path => Ok(Dimension::Value),
            Dimension::Value => Ok(Dimension::Path),
            Dimension::Leaf => Err(KeyError::NoComplement(self)),
        }
    }

    /// Complement for the two searchable dimensions.
    ///
    /// Panics on `Leaf`; callers only flip dimensions they partition on.
    pub(crate) fn flip(self) -> Dimension {
        match self {
            Dimension::Path => Dimension::Value,
            Dimension::Value => Dimension::Path,
            Dimension::Leaf => panic!("leaf dimension has no complement"),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Dimension::Path => 'P',
            Dimension::Value => 'V',
            Dimension::Leaf => '⊥',
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Number of bytes used for every value in one index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueWidth {
    W4,
    W8,
}

impl ValueWidth {
    pub fn from_bytes(width: usize) -> Result<Self, KeyError> {
        match width {
            4 => Ok(ValueWidth::W4),
            8 => Ok(ValueWidth::W8),
            other => Err(KeyError::BadWidth(other)),
        }
    }

    pub fn bytes(self) -> usize {
        match self {
            ValueWidth::W4 => 4,
            ValueWidth::W8 => 8,
        }
    }

    /// Largest encodable value.
    pub fn max_value(self) -> u64 {
        match self {
            ValueWidth::W4 => u32::MAX as u64,
            ValueWidth::W8 => u64::MAX,
        }
    }
}

/// A validated, `0x00`-terminated path.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathBytes(Box<[u8]>);

impl PathBytes {
    pub fn encode(path: &str) -> Result<Self, KeyError> {
        validate_path(path.as_bytes())?;
        let mut bytes = Vec::with_capacity(path.len() + 1);
        bytes.extend_from_slice(path.as_bytes());
        bytes.push(TERMINATOR);
        Ok(PathBytes(bytes.into_boxed_slice()))
    }

    /// Rebuilds a path from its encoded form (terminator included).
    pub fn from_encoded(bytes: &[u8]) -> Result<Self, KeyError> {
        match bytes.split_last() {
            Some((&TERMINATOR, text)) => {
                validate_path(text)?;
                Ok(PathBytes(bytes.into()))
            }
            _ => Err(KeyError::Unterminated),
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// The path text without the terminator.
    pub fn as_str(&self) -> &str {
        // Validation restricts paths to ASCII.
        std::str::from_utf8(&self.0[..self.0.len() - 1]).expect("paths are ASCII")
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Labels of the path, in order from the root.
    pub fn labels(&self) -> impl Iterator<Item = &[u8]> {
        self.0[1..self.0.len() - 1].split(|&b| b == SEPARATOR)
    }
}

impl fmt::Debug for PathBytes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}$", self.as_str())
    }
}

/// Checks the path text (without terminator) against the accepted alphabet:
/// printable ASCII, leading `/`, non-empty labels.
pub fn validate_path(text: &[u8]) -> Result<(), KeyError> {
    if text.is_empty() {
        return Err(KeyError::EmptyPath);
    }
    if text[0] != SEPARATOR {
        return Err(KeyError::MissingLeadingSlash);
    }
    let mut previous = SEPARATOR;
    for (i, &b) in text.iter().enumerate().skip(1) {
        if !is_label_byte(b) && b != SEPARATOR {
            return Err(KeyError::BadByte { byte: b, position: i + 1 });
        }
        if b == SEPARATOR && previous == SEPARATOR {
            return Err(KeyError::EmptyLabel(i + 1));
        }
        previous = b;
    }
    if previous == SEPARATOR {
        return Err(KeyError::EmptyLabel(text.len()));
    }
    Ok(())
}

/// Bytes allowed inside a path label.
pub fn is_label_byte(b: u8) -> bool {
    (0x20..=0x7e).contains(&b) && b != SEPARATOR
}

/// A fixed-width big-endian unsigned value.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValueBytes(Box<[u8]>);

impl ValueBytes {
    pub fn encode(value: u64, width: ValueWidth) -> Result<Self, KeyError> {
        if value > width.max_value() {
            return Err(KeyError::ValueOverflow { value, width: width.bytes() });
        }
        let be = value.to_be_bytes();
        Ok(ValueBytes(be[8 - width.bytes()..].into()))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, KeyError> {
        ValueWidth::from_bytes(bytes.len())?;
        Ok(ValueBytes(bytes.into()))
    }

    pub fn decode(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &b| (acc << 8) | b as u64)
    }

    pub fn width(&self) -> ValueWidth {
        ValueWidth::from_bytes(self.0.len()).expect("validated at construction")
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Debug for ValueBytes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{b:02X}")?;
        }
        Ok(())
    }
}

/// Opaque reference to the data item a key was extracted from.
pub type NodeRef = u64;

/// A (path, value) key together with the reference of its source node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CompositeKey {
    pub path: PathBytes,
    pub value: ValueBytes,
    pub reference: NodeRef,
}

impl CompositeKey {
    pub fn new(path: PathBytes, value: ValueBytes, reference: NodeRef) -> Self {
        CompositeKey { path, value, reference }
    }

    /// Convenience constructor from text and an integer value.
    pub fn parse(path: &str, value: u64, width: ValueWidth, reference: NodeRef) -> Result<Self, KeyError> {
        Ok(CompositeKey { path: PathBytes::encode(path)?, value: ValueBytes::encode(value, width)?, reference })
    }

    /// Bytes of dimension `dim`; `Leaf` has no bytes.
    pub fn dim(&self, dim: Dimension) -> &[u8] {
        match dim {
            Dimension::Path => self.path.as_bytes(),
            Dimension::Value => self.value.as_bytes(),
            Dimension::Leaf => &[],
        }
    }

    /// True when both keys have the same path and value.
    pub fn same_key(&self, other: &CompositeKey) -> bool {
        self.path == other.path && self.value == other.value
    }
}

/// The byte at 1-based position `i`, or `None` (the empty string) past the end.
#[inline]
pub fn byte_at(s: &[u8], i: usize) -> Option<u8> {
    debug_assert!(i >= 1, "positions are 1-based");
    s.get(i - 1).copied()
}

/// The 1-based inclusive substring `s[i, j]`; empty when `i > j`.
#[inline]
pub fn substring(s: &[u8], i: usize, j: usize) -> &[u8] {
    if i > j || i > s.len() {
        return &[];
    }
    &s[i - 1..j.min(s.len())]
}
