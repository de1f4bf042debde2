//! The trie shared by all interleaving schemes.
//!
//! Nodes live in an arena in pre-order; node 0 is the root. Every node stores
//! the path and value bytes it contributes to the keys below it. An inner
//! node's children are keyed by the first byte of the child's substring in
//! the node's dimension; leaves hold the references of one distinct
//! (path, value) pair in input order.

mod bulk;
mod codec;
mod static_build;
mod stats;

pub use bulk::{bulk_load, instrumented_build_cost};
pub use codec::{decode, encode, CodecError, MAGIC};
pub use static_build::build_static;
pub use stats::{collect_stats, IndexStats};

use std::fmt;

use thiserror::Error;

use crate::interleave::{DynamicInterleaving, InterleaveError, ScanCounters, Scheme, Tuple, ZoDictionary};
use crate::keymodel::{CompositeKey, Dimension, NodeRef, ValueWidth};

pub type NodeId = u32;

const NO_CHILD: NodeId = NodeId::MAX;
const NO_SLOT: u8 = u8::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("cannot build an index from an empty key set")]
    Empty,
    #[error("key {index} has a {actual}-byte value, index width is {expected}")]
    WidthMismatch { index: usize, expected: usize, actual: usize },
    #[error(transparent)]
    Interleave(#[from] InterleaveError),
    #[error("index would exceed {} nodes", NodeId::MAX - 1)]
    TooManyNodes,
}

/// Physical layout of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Leaf,
    N4,
    N16,
    N48,
    N256,
}

impl NodeKind {
    pub fn capacity(self) -> usize {
        match self {
            NodeKind::Leaf => 0,
            NodeKind::N4 => 4,
            NodeKind::N16 => 16,
            NodeKind::N48 => 48,
            NodeKind::N256 => 256,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            NodeKind::Leaf => 0,
            NodeKind::N4 => 1,
            NodeKind::N16 => 2,
            NodeKind::N48 => 3,
            NodeKind::N256 => 4,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<NodeKind> {
        [NodeKind::Leaf, NodeKind::N4, NodeKind::N16, NodeKind::N48, NodeKind::N256]
            .into_iter()
            .find(|k| k.code() == code)
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKind::Leaf => f.write_str("leaf"),
            k => write!(f, "n{}", k.capacity()),
        }
    }
}

/// Smallest inner node kind that holds `child_count` children.
pub fn node_kind_for(child_count: usize) -> NodeKind {
    assert!((1..=256).contains(&child_count), "child count {child_count} out of range");
    match child_count {
        0..=4 => NodeKind::N4,
        5..=16 => NodeKind::N16,
        17..=48 => NodeKind::N48,
        _ => NodeKind::N256,
    }
}

/// Child table of an inner node, sized by its final child count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChildTable {
    N4 { len: u8, keys: [u8; 4], ids: [NodeId; 4] },
    N16 { len: u8, keys: [u8; 16], ids: [NodeId; 16] },
    N48 { len: u8, index: Box<[u8; 256]>, ids: Box<[NodeId; 48]> },
    N256 { len: u16, ids: Box<[NodeId; 256]> },
}

impl ChildTable {
    /// Builds a table from children sorted by strictly ascending key byte.
    pub fn from_sorted(entries: &[(u8, NodeId)]) -> ChildTable {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        let n = entries.len();
        match node_kind_for(n) {
            NodeKind::N4 => {
                let (mut keys, mut ids) = ([0; 4], [NO_CHILD; 4]);
                for (i, &(b, id)) in entries.iter().enumerate() {
                    keys[i] = b;
                    ids[i] = id;
                }
                ChildTable::N4 { len: n as u8, keys, ids }
            }
            NodeKind::N16 => {
                let (mut keys, mut ids) = ([0; 16], [NO_CHILD; 16]);
                for (i, &(b, id)) in entries.iter().enumerate() {
                    keys[i] = b;
                    ids[i] = id;
                }
                ChildTable::N16 { len: n as u8, keys, ids }
            }
            NodeKind::N48 => {
                let mut index = Box::new([NO_SLOT; 256]);
                let mut ids = Box::new([NO_CHILD; 48]);
                for (i, &(b, id)) in entries.iter().enumerate() {
                    index[b as usize] = i as u8;
                    ids[i] = id;
                }
                ChildTable::N48 { len: n as u8, index, ids }
            }
            _ => {
                let mut ids = Box::new([NO_CHILD; 256]);
                for &(b, id) in entries {
                    ids[b as usize] = id;
                }
                ChildTable::N256 { len: n as u16, ids }
            }
        }
    }

    pub fn kind(&self) -> NodeKind {
        match self {
            ChildTable::N4 { .. } => NodeKind::N4,
            ChildTable::N16 { .. } => NodeKind::N16,
            ChildTable::N48 { .. } => NodeKind::N48,
            ChildTable::N256 { .. } => NodeKind::N256,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ChildTable::N4 { len, .. } | ChildTable::N16 { len, .. } | ChildTable::N48 { len, .. } => *len as usize,
            ChildTable::N256 { len, .. } => *len as usize,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, byte: u8) -> Option<NodeId> {
        match self {
            ChildTable::N4 { len, keys, ids } => keys[..*len as usize].iter().position(|&k| k == byte).map(|i| ids[i]),
            ChildTable::N16 { len, keys, ids } => keys[..*len as usize].binary_search(&byte).ok().map(|i| ids[i]),
            ChildTable::N48 { index, ids, .. } => match index[byte as usize] {
                NO_SLOT => None,
                slot => Some(ids[slot as usize]),
            },
            ChildTable::N256 { ids, .. } => Some(ids[byte as usize]).filter(|&id| id != NO_CHILD),
        }
    }

    /// Children in ascending key byte order.
    pub fn iter(&self) -> ChildIter<'_> {
        ChildIter { table: self, pos: 0 }
    }
}

pub struct ChildIter<'a> {
    table: &'a ChildTable,
    pos: usize,
}

impl Iterator for ChildIter<'_> {
    type Item = (u8, NodeId);

    fn next(&mut self) -> Option<(u8, NodeId)> {
        match self.table {
            ChildTable::N4 { len, keys, ids } => next_sorted(&keys[..*len as usize], ids, &mut self.pos),
            ChildTable::N16 { len, keys, ids } => next_sorted(&keys[..*len as usize], ids, &mut self.pos),
            ChildTable::N48 { index, ids, .. } => {
                while self.pos < 256 {
                    let b = self.pos;
                    self.pos += 1;
                    if index[b] != NO_SLOT {
                        return Some((b as u8, ids[index[b] as usize]));
                    }
                }
                None
            }
            ChildTable::N256 { ids, .. } => {
                while self.pos < 256 {
                    let b = self.pos;
                    self.pos += 1;
                    if ids[b] != NO_CHILD {
                        return Some((b as u8, ids[b]));
                    }
                }
                None
            }
        }
    }
}

fn next_sorted(keys: &[u8], ids: &[NodeId], pos: &mut usize) -> Option<(u8, NodeId)> {
    let i = *pos;
    (i < keys.len()).then(|| {
        *pos += 1;
        (keys[i], ids[i])
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeBody {
    Inner(Box<ChildTable>),
    Leaf(Box<[NodeRef]>),
}

/// One trie node. `dim` is `Leaf` exactly for leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub dim: Dimension,
    pub path: Box<[u8]>,
    pub value: Box<[u8]>,
    pub body: NodeBody,
}

impl Node {
    pub fn kind(&self) -> NodeKind {
        match &self.body {
            NodeBody::Inner(t) => t.kind(),
            NodeBody::Leaf(_) => NodeKind::Leaf,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.body, NodeBody::Leaf(_))
    }

    /// References stored in a leaf; empty for inner nodes.
    pub fn refs(&self) -> &[NodeRef] {
        match &self.body {
            NodeBody::Leaf(r) => r,
            NodeBody::Inner(_) => &[],
        }
    }

    pub fn children(&self) -> Option<&ChildTable> {
        match &self.body {
            NodeBody::Inner(t) => Some(t),
            NodeBody::Leaf(_) => None,
        }
    }

    pub fn child_count(&self) -> usize {
        self.children().map_or(0, ChildTable::len)
    }

    /// The bytes of dimension `dim` stored in this node.
    pub fn bytes(&self, dim: Dimension) -> &[u8] {
        match dim {
            Dimension::Path => &self.path,
            Dimension::Value => &self.value,
            Dimension::Leaf => &[],
        }
    }
}

/// An immutable index over a set of composite keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RcasIndex {
    pub(crate) nodes: Vec<Node>,
    pub(crate) width: ValueWidth,
    pub(crate) scheme: Scheme,
    pub(crate) dict: Option<ZoDictionary>,
    pub(crate) key_count: u64,
    pub(crate) counters: ScanCounters,
}

impl RcasIndex {
    /// Builds an index over `keys` with the given interleaving scheme.
    pub fn build(keys: &[CompositeKey], scheme: Scheme, width: ValueWidth) -> Result<RcasIndex, BuildError> {
        match scheme {
            Scheme::Rcas => bulk_load(keys, width),
            s => build_static(keys, s, width),
        }
    }

    pub const ROOT: NodeId = 0;

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id as usize]
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn width(&self) -> ValueWidth {
        self.width
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Surrogate dictionary of a z-order index.
    pub fn dictionary(&self) -> Option<&ZoDictionary> {
        self.dict.as_ref()
    }

    /// Number of ingested (key, reference) pairs.
    pub fn key_count(&self) -> u64 {
        self.key_count
    }

    /// Work counters recorded while building.
    pub fn build_counters(&self) -> ScanCounters {
        self.counters
    }

    pub fn stats(&self) -> IndexStats {
        collect_stats(self)
    }

    /// For every leaf in pre-order: the tuples along its root path and its
    /// references. A tuple is value-first when its parent splits on the value
    /// dimension (the root counts as such).
    pub fn leaf_interleavings(&self) -> Vec<(DynamicInterleaving, Vec<NodeRef>)> {
        let mut out = Vec::new();
        let mut path: Vec<Tuple> = Vec::new();
        let mut stack: Vec<(NodeId, usize, Dimension)> = vec![(Self::ROOT, 0, Dimension::Value)];
        while let Some((id, depth, parent_dim)) = stack.pop() {
            let node = self.node(id);
            path.truncate(depth);
            path.push(Tuple {
                path: node.path.to_vec(),
                value: node.value.to_vec(),
                dim: node.dim,
                value_first: parent_dim == Dimension::Value,
            });
            match &node.body {
                NodeBody::Leaf(refs) => {
                    out.push((DynamicInterleaving { tuples: path.clone() }, refs.to_vec()));
                }
                NodeBody::Inner(t) => {
                    let children: Vec<_> = t.iter().collect();
                    for &(_, c) in children.iter().rev() {
                        stack.push((c, depth + 1, node.dim));
                    }
                }
            }
        }
        out
    }

    /// Every stored (path bytes, value bytes, references) triple in pre-order.
    /// For z-order indexes the path is the surrogate path.
    pub fn stored_keys(&self) -> Vec<(Vec<u8>, Vec<u8>, Vec<NodeRef>)> {
        self.leaf_interleavings().into_iter().map(|(dy, refs)| (dy.path(), dy.value(), refs)).collect()
    }
}

pub(crate) fn check_input(keys: &[CompositeKey], width: ValueWidth) -> Result<(), BuildError> {
    if keys.is_empty() {
        return Err(BuildError::Empty);
    }
    for (index, k) in keys.iter().enumerate() {
        if k.value.len() != width.bytes() {
            return Err(BuildError::WidthMismatch { index, expected: width.bytes(), actual: k.value.len() });
        }
    }
    Ok(())
}

/// Assembles arena nodes from per-node child lists collected in pre-order.
pub(crate) fn finish_nodes(mut nodes: Vec<Node>, children: Vec<Vec<(u8, NodeId)>>) -> Vec<Node> {
    for (node, kids) in nodes.iter_mut().zip(children) {
        if !node.is_leaf() {
            node.body = NodeBody::Inner(Box::new(ChildTable::from_sorted(&kids)));
        }
    }
    nodes
}

pub(crate) fn placeholder_inner(dim: Dimension, path: &[u8], value: &[u8]) -> Node {
    Node {
        dim,
        path: path.into(),
        value: value.into(),
        body: NodeBody::Inner(Box::new(ChildTable::N4 { len: 0, keys: [0; 4], ids: [NO_CHILD; 4] })),
    }
}
