//! Versioned binary serialization of an index.
//!
//! Layout (integers little-endian):
//!
//! ```text
//! magic "RCAS1" | width u8 | scheme u8 | key_count u64
//! [z-order only] max_depth u32 | label_count u32 | (len u16, bytes)*
//! node_count u64 | node*
//! node = kind u8 | dim u8 | path (len u32, bytes) | value (len u32, bytes)
//!        | child_count u16 | child key bytes | ref_count u32 | refs u64*
//! ```
//!
//! Nodes are written in pre-order, so child ids are implied by position.
//! Decoding validates the structure completely: a decoded index is safe to
//! query.

use thiserror::Error;

use super::{node_kind_for, ChildTable, Node, NodeBody, NodeId, NodeKind, RcasIndex};
use crate::interleave::{InterleaveError, ScanCounters, Scheme, ZoDictionary, SURROGATE_WIDTH};
use crate::keymodel::{validate_path, Dimension, NodeRef, ValueWidth, TERMINATOR};

pub const MAGIC: &[u8; 5] = b"RCAS1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("input ends early")]
    Truncated,
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported value width {0}")]
    BadWidth(u8),
    #[error("unknown scheme code {0}")]
    BadScheme(u8),
    #[error("unknown node kind {0}")]
    BadKind(u8),
    #[error("unknown dimension code {0}")]
    BadDimension(u8),
    #[error("node {node}: {reason}")]
    Malformed { node: u64, reason: &'static str },
    #[error("{0} trailing bytes after the last node")]
    TrailingBytes(usize),
    #[error("bad surrogate dictionary: {0}")]
    Dictionary(#[from] InterleaveError),
}

fn dim_code(d: Dimension) -> u8 {
    match d {
        Dimension::Path => 0,
        Dimension::Value => 1,
        Dimension::Leaf => 2,
    }
}

fn put_u16(out: &mut Vec<u8>, v: u16) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_bytes(out: &mut Vec<u8>, b: &[u8]) {
    put_u32(out, b.len() as u32);
    out.extend_from_slice(b);
}

pub fn encode(index: &RcasIndex) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.push(index.width.bytes() as u8);
    out.push(index.scheme.code());
    put_u64(&mut out, index.key_count);
    if index.scheme == Scheme::ZOrder {
        let dict = index.dict.as_ref().expect("z-order index has a dictionary");
        put_u32(&mut out, dict.max_depth() as u32);
        put_u32(&mut out, dict.labels().len() as u32);
        for l in dict.labels() {
            put_u16(&mut out, l.len() as u16);
            out.extend_from_slice(l);
        }
    }
    put_u64(&mut out, index.nodes.len() as u64);
    for n in &index.nodes {
        out.push(n.kind().code());
        out.push(dim_code(n.dim));
        put_bytes(&mut out, &n.path);
        put_bytes(&mut out, &n.value);
        let kids: Vec<u8> = n.children().map(|t| t.iter().map(|(b, _)| b).collect()).unwrap_or_default();
        put_u16(&mut out, kids.len() as u16);
        out.extend_from_slice(&kids);
        put_u32(&mut out, n.refs().len() as u32);
        for &r in n.refs() {
            put_u64(&mut out, r);
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if self.buf.len() < n {
            return Err(CodecError::Truncated);
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, CodecError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn bytes(&mut self) -> Result<&'a [u8], CodecError> {
        let n = self.u32()? as usize;
        self.take(n)
    }
}

/// An inner node whose children are still being read.
struct Open {
    id: NodeId,
    dim: Dimension,
    keys: Vec<u8>,
    next: usize,
    path_len: usize,
    value_len: usize,
}

/// Smallest encoded node: kind, dim, two lengths, child count, ref count.
const MIN_NODE_BYTES: usize = 1 + 1 + 4 + 4 + 2 + 4;

pub fn decode(bytes: &[u8]) -> Result<RcasIndex, CodecError> {
    let mut r = Reader { buf: bytes };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(CodecError::BadMagic);
    }
    let w = r.u8()?;
    let width = ValueWidth::from_bytes(w as usize).map_err(|_| CodecError::BadWidth(w))?;
    let s = r.u8()?;
    let scheme = Scheme::from_code(s).ok_or(CodecError::BadScheme(s))?;
    let key_count = r.u64()?;
    let dict = if scheme == Scheme::ZOrder {
        let max_depth = r.u32()? as usize;
        let count = r.u32()? as usize;
        let mut labels = Vec::with_capacity(count.min(r.buf.len() / 2));
        for _ in 0..count {
            let n = r.u16()? as usize;
            let l = r.take(n)?;
            if l.is_empty() || l.iter().any(|&b| !crate::keymodel::is_label_byte(b)) {
                return Err(CodecError::Malformed { node: 0, reason: "invalid dictionary label" });
            }
            labels.push(l.into());
        }
        Some(ZoDictionary::from_parts(labels, max_depth)?)
    } else {
        None
    };

    let node_count = r.u64()?;
    if node_count == 0 {
        return Err(CodecError::Malformed { node: 0, reason: "index has no nodes" });
    }
    if node_count > (r.buf.len() / MIN_NODE_BYTES) as u64 || node_count >= NodeId::MAX as u64 {
        return Err(CodecError::Truncated);
    }
    let mut nodes: Vec<Node> = Vec::with_capacity(node_count as usize);
    let mut children: Vec<Vec<(u8, NodeId)>> = Vec::with_capacity(node_count as usize);
    let mut open: Vec<Open> = Vec::new();
    let mut path_buf: Vec<u8> = Vec::new();
    let mut value_buf: Vec<u8> = Vec::new();
    let mut ref_total: u64 = 0;

    for i in 0..node_count {
        let bad = |reason| CodecError::Malformed { node: i, reason };
        let id = i as NodeId;
        let k = r.u8()?;
        let kind = NodeKind::from_code(k).ok_or(CodecError::BadKind(k))?;
        let d = r.u8()?;
        let dim = match d {
            0 => Dimension::Path,
            1 => Dimension::Value,
            2 => Dimension::Leaf,
            _ => return Err(CodecError::BadDimension(d)),
        };
        let path = r.bytes()?;
        let value = r.bytes()?;
        let child_count = r.u16()? as usize;
        let keys = r.take(child_count)?.to_vec();
        let ref_count = r.u32()? as usize;
        if ref_count > r.buf.len() / 8 {
            return Err(CodecError::Truncated);
        }
        let refs: Vec<NodeRef> = (0..ref_count).map(|_| r.u64()).collect::<Result<_, _>>()?;

        // Attach to the parent and restore the buffers to the parent's depth.
        if i == 0 {
            path_buf.clear();
            value_buf.clear();
        } else {
            let parent = open.last_mut().ok_or(bad("node outside the tree"))?;
            let byte = parent.keys[parent.next];
            parent.next += 1;
            let own = match parent.dim {
                Dimension::Path => path,
                _ => value,
            };
            if own.first() != Some(&byte) {
                return Err(bad("child key differs from the child's first byte"));
            }
            children[parent.id as usize].push((byte, id));
            path_buf.truncate(parent.path_len);
            value_buf.truncate(parent.value_len);
        }
        path_buf.extend_from_slice(path);
        value_buf.extend_from_slice(value);
        if value_buf.len() > width.bytes() {
            return Err(bad("value longer than the index width"));
        }
        check_partial_path(scheme, dict.as_ref(), &path_buf).map_err(bad)?;

        let body = if kind == NodeKind::Leaf {
            if dim != Dimension::Leaf || child_count != 0 {
                return Err(bad("leaf with children or a split dimension"));
            }
            if refs.is_empty() {
                return Err(bad("leaf without references"));
            }
            if value_buf.len() != width.bytes() {
                return Err(bad("leaf value has the wrong width"));
            }
            check_full_path(scheme, dict.as_ref(), &path_buf).map_err(bad)?;
            ref_total = ref_total.saturating_add(refs.len() as u64);
            NodeBody::Leaf(refs.into())
        } else {
            if dim == Dimension::Leaf || !refs.is_empty() {
                return Err(bad("inner node with references or without a split dimension"));
            }
            if child_count < 2 || node_kind_for(child_count) != kind {
                return Err(bad("child count does not fit the node kind"));
            }
            if !keys.windows(2).all(|w| w[0] < w[1]) {
                return Err(bad("child keys are not strictly ascending"));
            }
            open.push(Open { id, dim, keys, next: 0, path_len: path_buf.len(), value_len: value_buf.len() });
            NodeBody::Inner(Box::new(ChildTable::N4 { len: 0, keys: [0; 4], ids: [0; 4] }))
        };
        nodes.push(Node { dim, path: path.into(), value: value.into(), body });
        children.push(Vec::new());
        while open.last().is_some_and(|o| o.next == o.keys.len()) {
            open.pop();
        }
        if open.is_empty() && i + 1 != node_count {
            return Err(bad("tree ends before the last node"));
        }
    }
    if !open.is_empty() {
        return Err(CodecError::Truncated);
    }
    if !r.buf.is_empty() {
        return Err(CodecError::TrailingBytes(r.buf.len()));
    }
    if ref_total != key_count {
        return Err(CodecError::Malformed { node: 0, reason: "key count differs from stored references" });
    }

    Ok(RcasIndex {
        nodes: super::finish_nodes(nodes, children),
        width,
        scheme,
        dict,
        key_count,
        counters: ScanCounters::default(),
    })
}

/// A path prefix on a root path: terminator only at the end.
fn check_partial_path(scheme: Scheme, dict: Option<&ZoDictionary>, path: &[u8]) -> Result<(), &'static str> {
    match dict {
        Some(d) if scheme == Scheme::ZOrder => {
            if path.len() > d.path_len() {
                return Err("surrogate path too long");
            }
        }
        _ => {
            if path.iter().position(|&b| b == TERMINATOR).is_some_and(|p| p + 1 != path.len()) {
                return Err("bytes after the path terminator");
            }
        }
    }
    Ok(())
}

fn check_full_path(scheme: Scheme, dict: Option<&ZoDictionary>, path: &[u8]) -> Result<(), &'static str> {
    match dict {
        Some(d) if scheme == Scheme::ZOrder => {
            if path.len() != d.path_len() {
                return Err("surrogate path has the wrong length");
            }
            let mut padded = false;
            for (i, c) in path.chunks(SURROGATE_WIDTH).enumerate() {
                let code = c.iter().fold(0u32, |acc, &b| (acc << 8) | b as u32);
                if code == 0 {
                    if i == 0 {
                        return Err("surrogate path without labels");
                    }
                    padded = true;
                } else if padded || d.label(code).is_none() {
                    return Err("invalid surrogate code");
                }
            }
            Ok(())
        }
        _ => match path.split_last() {
            Some((&TERMINATOR, text)) => validate_path(text).map_err(|_| "invalid stored path"),
            _ => Err("stored path is not terminated"),
        },
    }
}
