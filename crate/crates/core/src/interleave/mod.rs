//! Discriminative bytes, ψ-partitioning and the dynamic interleaving of
//! composite keys.
//!
//! All positions in this module are 1-based, matching [`byte_at`]. A
//! partition is an ordered list of borrowed keys; order is the stable input
//! order and is preserved by every partitioning step.

mod schemes;

pub use schemes::{byte_wise, lw_units, static_interleave, zip_chunks, FlatKey, Scheme, ZoDictionary, SURROGATE_WIDTH};

use std::fmt;

use thiserror::Error;

use crate::keymodel::{byte_at, substring, CompositeKey, Dimension};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterleaveError {
    #[error("dynamic interleaving depends on the key set and has no flat static form")]
    NotStatic,
    #[error("z-order interleaving needs a surrogate dictionary")]
    MissingDictionary,
    #[error("surrogate dictionary overflow: more than {0} distinct labels")]
    DictionaryOverflow(usize),
    #[error("label {0:?} is not in the surrogate dictionary")]
    UnknownLabel(String),
    #[error("path has {depth} labels, dictionary allows at most {max}")]
    PathTooDeep { depth: usize, max: usize },
}

/// An ordered list of keys.
pub type Partition<'a> = Vec<&'a CompositeKey>;

/// Work counters for discriminative-byte scans and partitioning.
///
/// `byte_scans` counts key bytes read at positions where the whole partition
/// agrees (the bytes that end up in a node's substrings). `probe_reads`
/// counts the reads at the position where a scan stops because two keys
/// differ. `moves` counts keys moved into a partition table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScanCounters {
    pub byte_scans: u64,
    pub probe_reads: u64,
    pub moves: u64,
}

impl ScanCounters {
    pub fn total_reads(&self) -> u64 {
        self.byte_scans + self.probe_reads
    }
}

/// Position of the first byte in `dim` at which not all keys agree, or
/// `len + 1` when all keys are equal in `dim`.
///
/// Straight from the definition: every position is checked against every key.
pub fn dsc(keys: &[&CompositeKey], dim: Dimension) -> usize {
    assert!(!keys.is_empty(), "dsc of an empty partition");
    let first = keys[0].dim(dim);
    let longest = keys.iter().map(|k| k.dim(dim).len()).max().unwrap_or(0);
    for m in 1..=longest {
        let b = byte_at(first, m);
        if keys.iter().any(|k| byte_at(k.dim(dim), m) != b) {
            return m;
        }
    }
    first.len() + 1
}

/// [`dsc`] starting the scan at a known lower bound `from`.
pub fn dsc_inc(keys: &[&CompositeKey], dim: Dimension, from: usize) -> usize {
    dsc_inc_counted(keys, dim, from, &mut ScanCounters::default())
}

/// [`dsc_inc`] that records its byte reads.
///
/// Only the first key's length bounds the loop: keys are prefix-free, so a
/// shorter key differs from the first one at some position before it ends.
pub fn dsc_inc_counted(keys: &[&CompositeKey], dim: Dimension, from: usize, counters: &mut ScanCounters) -> usize {
    assert!(!keys.is_empty(), "dsc of an empty partition");
    debug_assert!(from >= 1);
    let first = keys[0].dim(dim);
    if from > first.len() {
        return from;
    }
    // One pass per key: the shortest common run with the first key fixes g,
    // and the first key attaining it is where a byte-at-a-time probe stops.
    let mut common = first.len() + 1 - from;
    let mut stop = None;
    for (j, k) in keys.iter().enumerate().skip(1) {
        let bytes = k.dim(dim);
        let tail = bytes.get(from - 1..).unwrap_or(&[]);
        let run = first[from - 1..].iter().zip(tail).take(common).take_while(|(a, b)| a == b).count();
        if run < common {
            common = run;
            stop = Some(j);
        }
    }
    counters.byte_scans += (common * keys.len()) as u64;
    if let Some(j) = stop {
        counters.probe_reads += j as u64 + 1;
    }
    from + common
}

/// The result of ψ-partitioning a key list on one byte position.
///
/// Slots are indexed by the byte value at the partitioning position. Keys
/// whose dimension ends before that position are kept in `exhausted`; with
/// prefix-free keys this only happens when all keys are equal, in which case
/// the partitioning is the identity.
pub struct Partitioning<'a> {
    slots: Vec<Partition<'a>>,
    exhausted: Partition<'a>,
}

impl<'a> Partitioning<'a> {
    pub fn slot(&self, byte: u8) -> &[&'a CompositeKey] {
        &self.slots[byte as usize]
    }

    pub fn exhausted(&self) -> &[&'a CompositeKey] {
        &self.exhausted
    }

    /// Non-empty partitions in ascending byte order (`None` = exhausted).
    pub fn parts(&self) -> impl Iterator<Item = (Option<u8>, &[&'a CompositeKey])> {
        let exhausted = (!self.exhausted.is_empty()).then_some((None, &self.exhausted[..]));
        exhausted
            .into_iter()
            .chain(self.slots.iter().enumerate().filter(|(_, s)| !s.is_empty()).map(|(b, s)| (Some(b as u8), &s[..])))
    }

    /// Number of non-empty partitions.
    pub fn len(&self) -> usize {
        self.parts().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn into_parts(self) -> Vec<(Option<u8>, Partition<'a>)> {
        let mut out = Vec::new();
        if !self.exhausted.is_empty() {
            out.push((None, self.exhausted));
        }
        out.extend(self.slots.into_iter().enumerate().filter(|(_, s)| !s.is_empty()).map(|(b, s)| (Some(b as u8), s)));
        out
    }
}

/// ψ(K, D, g): distributes `keys` over 256 slots by their byte at position `g`
/// of `dim`, keeping input order within each slot.
pub fn psi<'a>(keys: Vec<&'a CompositeKey>, dim: Dimension, g: usize) -> Partitioning<'a> {
    let mut slots: Vec<Partition<'a>> = vec![Vec::new(); 256];
    let mut exhausted = Vec::new();
    for k in keys {
        match byte_at(k.dim(dim), g) {
            Some(b) => slots[b as usize].push(k),
            None => exhausted.push(k),
        }
    }
    Partitioning { slots, exhausted }
}

/// Moves every key of `keys` into `table[byte]`; the table must be empty.
pub(crate) fn psi_into<'a>(
    table: &mut [Partition<'a>],
    keys: Vec<&'a CompositeKey>,
    dim: Dimension,
    g: usize,
    counters: &mut ScanCounters,
) {
    debug_assert_eq!(table.len(), 256);
    counters.moves += keys.len() as u64;
    for k in keys {
        let b = byte_at(k.dim(dim), g).expect("partitioning position lies inside every key");
        table[b as usize].push(k);
    }
}

/// The partition of `k` in ψ(K, D) at the discriminative byte of K.
fn psi_of<'a>(k: &CompositeKey, keys: &[&'a CompositeKey], dim: Dimension, g: usize) -> Partition<'a> {
    let b = byte_at(k.dim(dim), g);
    keys.iter().copied().filter(|x| byte_at(x.dim(dim), g) == b).collect()
}

/// True when K can be split in `dim`, i.e. its keys are not all equal there.
fn splits(keys: &[&CompositeKey], dim: Dimension) -> Option<usize> {
    let g = dsc(keys, dim);
    (g <= keys[0].dim(dim).len()).then_some(g)
}

/// One element `(K_i, D_i)` of a partitioning sequence.
#[derive(Debug, Clone)]
pub struct SequenceStep<'a> {
    pub keys: Partition<'a>,
    pub dim: Dimension,
}

/// ρ(k, K, V): the chain of partitions containing `k` obtained by recursive
/// ψ-partitioning, alternating dimensions and starting with the value
/// dimension. The last step has dimension [`Dimension::Leaf`].
pub fn partitioning_sequence<'a>(k: &CompositeKey, keys: &[&'a CompositeKey]) -> Vec<SequenceStep<'a>> {
    assert!(keys.iter().any(|x| std::ptr::eq(*x, k) || x.same_key(k)), "key must belong to the set");
    let mut current: Partition<'a> = keys.to_vec();
    let mut dim = Dimension::Value;
    let mut seq = Vec::new();
    loop {
        if let Some(g) = splits(&current, dim) {
            let next = psi_of(k, &current, dim, g);
            seq.push(SequenceStep { keys: current, dim });
            current = next;
            dim = dim.flip();
        } else if splits(&current, dim.flip()).is_some() {
            dim = dim.flip();
        } else {
            seq.push(SequenceStep { keys: current, dim: Dimension::Leaf });
            return seq;
        }
    }
}

/// One tuple of a dynamic interleaving.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tuple {
    pub path: Vec<u8>,
    pub value: Vec<u8>,
    pub dim: Dimension,
    /// Whether the value substring is written first (the previous
    /// partitioning step was on the value dimension).
    pub value_first: bool,
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = render_path_bytes(&self.path);
        let v = render_value_bytes(&self.value);
        if self.value_first {
            write!(f, "({v}, {p}, {})", self.dim)
        } else {
            write!(f, "({p}, {v}, {})", self.dim)
        }
    }
}

/// I_DY(k, K): the tuple sequence of a key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicInterleaving {
    pub tuples: Vec<Tuple>,
}

impl DynamicInterleaving {
    /// Concatenated path substrings.
    pub fn path(&self) -> Vec<u8> {
        self.tuples.iter().flat_map(|t| t.path.iter().copied()).collect()
    }

    /// Concatenated value substrings.
    pub fn value(&self) -> Vec<u8> {
        self.tuples.iter().flat_map(|t| t.value.iter().copied()).collect()
    }
}

impl fmt::Display for DynamicInterleaving {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, t) in self.tuples.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")
    }
}

/// Dynamic interleaving of `k` with respect to the key set `keys`.
pub fn dynamic_interleave(k: &CompositeKey, keys: &[&CompositeKey]) -> DynamicInterleaving {
    let seq = partitioning_sequence(k, keys);
    let (mut prev_p, mut prev_v) = (1usize, 1usize);
    let mut prev_dim = Dimension::Value;
    let mut tuples = Vec::with_capacity(seq.len());
    for step in &seq {
        let cur_p = dsc(&step.keys, Dimension::Path);
        let cur_v = dsc(&step.keys, Dimension::Value);
        tuples.push(Tuple {
            path: substring(k.path.as_bytes(), prev_p, cur_p - 1).to_vec(),
            value: substring(k.value.as_bytes(), prev_v, cur_v - 1).to_vec(),
            dim: step.dim,
            value_first: prev_dim == Dimension::Value,
        });
        prev_p = cur_p;
        prev_v = cur_v;
        prev_dim = step.dim;
    }
    DynamicInterleaving { tuples }
}

/// Checks the monotonicity of discriminative bytes for one ψ-partitioning:
/// every strict sub-partition has a strictly larger discriminative byte in
/// `dim` and an equal or larger one in the other dimension.
pub fn verify_monotonicity(keys: &[&CompositeKey], dim: Dimension) -> bool {
    let g = dsc(keys, dim);
    let other = dim.flip();
    let g_other = dsc(keys, other);
    psi(keys.to_vec(), dim, g)
        .parts()
        .filter(|(_, part)| part.len() < keys.len())
        .all(|(_, part)| dsc(part, dim) > g && dsc(part, other) >= g_other)
}

pub(crate) fn render_path_bytes(bytes: &[u8]) -> String {
    if bytes.is_empty() {
        return "ε".to_string();
    }
    bytes.iter().map(|&b| if b == 0 { '$' } else { b as char }).collect()
}

pub(crate) fn render_value_bytes(bytes: &[u8]) -> String {
    if bytes.is_empty() {
        return "ε".to_string();
    }
    bytes.iter().map(|b| format!("{b:02X}")).collect::<Vec<_>>().join(" ")
}
