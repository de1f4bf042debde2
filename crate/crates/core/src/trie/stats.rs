//! Structural statistics of a built index.

use std::collections::BTreeMap;
use std::mem::size_of_val;

use super::{NodeId, NodeKind, RcasIndex};
use crate::keymodel::Dimension;

/// Shape of an index: depth distributions, node kinds per dimension and an
/// estimate of the memory footprint. The root has depth 0.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexStats {
    pub node_count: usize,
    pub inner_count: usize,
    pub leaf_count: usize,
    pub key_count: u64,
    pub depth_histogram: Vec<usize>,
    pub leaf_depth_histogram: Vec<usize>,
    pub avg_node_depth: f64,
    pub avg_leaf_depth: f64,
    pub max_depth: usize,
    pub kind_counts: BTreeMap<(NodeKind, Dimension), usize>,
    pub size_bytes: usize,
}

/// Estimated bytes of one child table, with 8-byte child pointers.
fn table_bytes(kind: NodeKind) -> usize {
    match kind {
        NodeKind::Leaf => 0,
        NodeKind::N4 => 4 + 4 * 8,
        NodeKind::N16 => 16 + 16 * 8,
        NodeKind::N48 => 256 + 48 * 8,
        NodeKind::N256 => 256 * 8,
    }
}

/// Header: kind, dimension, child count and two substring lengths.
const HEADER_BYTES: usize = 16;

pub fn collect_stats(index: &RcasIndex) -> IndexStats {
    let mut depth_histogram: Vec<usize> = Vec::new();
    let mut leaf_depth_histogram: Vec<usize> = Vec::new();
    let mut kind_counts = BTreeMap::new();
    let mut size_bytes = 0;
    let mut stack: Vec<(NodeId, usize)> = vec![(RcasIndex::ROOT, 0)];
    while let Some((id, depth)) = stack.pop() {
        let node = index.node(id);
        bump(&mut depth_histogram, depth);
        *kind_counts.entry((node.kind(), node.dim)).or_insert(0) += 1;
        size_bytes +=
            HEADER_BYTES + node.path.len() + node.value.len() + table_bytes(node.kind()) + size_of_val(node.refs());
        match node.children() {
            Some(t) => stack.extend(t.iter().map(|(_, c)| (c, depth + 1))),
            None => bump(&mut leaf_depth_histogram, depth),
        }
    }
    let node_count = index.node_count();
    let leaf_count: usize = leaf_depth_histogram.iter().sum();
    IndexStats {
        node_count,
        inner_count: node_count - leaf_count,
        leaf_count,
        key_count: index.key_count(),
        avg_node_depth: mean(&depth_histogram),
        avg_leaf_depth: mean(&leaf_depth_histogram),
        max_depth: depth_histogram.len() - 1,
        depth_histogram,
        leaf_depth_histogram,
        kind_counts,
        size_bytes,
    }
}

fn bump(hist: &mut Vec<usize>, depth: usize) {
    if hist.len() <= depth {
        hist.resize(depth + 1, 0);
    }
    hist[depth] += 1;
}

fn mean(hist: &[usize]) -> f64 {
    let n: usize = hist.iter().sum();
    if n == 0 {
        return 0.0;
    }
    hist.iter().enumerate().map(|(d, &c)| (d * c) as f64).sum::<f64>() / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keymodel::{CompositeKey, ValueWidth};
    use crate::testutil::bom_keys;
    use crate::trie::bulk_load;

    #[test]
    fn bom_shape() {
        let s = collect_stats(&bulk_load(&bom_keys(), ValueWidth::W4).unwrap());
        assert_eq!(s.node_count, 11);
        assert_eq!(s.leaf_count, 7);
        assert_eq!(s.inner_count, 4);
        assert_eq!(s.depth_histogram, vec![1, 3, 4, 3]);
        assert_eq!(s.leaf_depth_histogram, vec![0, 1, 3, 3]);
        assert!((s.avg_leaf_depth - 16.0 / 7.0).abs() < 1e-12);
        assert!((s.avg_node_depth - 20.0 / 11.0).abs() < 1e-12);
        assert_eq!(s.max_depth, 3);
        assert_eq!(s.kind_counts[&(NodeKind::N4, Dimension::Value)], 3);
        assert_eq!(s.kind_counts[&(NodeKind::N4, Dimension::Path)], 1);
        assert_eq!(s.kind_counts[&(NodeKind::Leaf, Dimension::Leaf)], 7);
        assert_eq!(s.key_count, 8);
    }

    #[test]
    fn singleton_shape() {
        let k = CompositeKey::parse("/a", 1, ValueWidth::W4, 1).unwrap();
        let s = collect_stats(&bulk_load(&[k], ValueWidth::W4).unwrap());
        assert_eq!(s.node_count, 1);
        assert_eq!(s.depth_histogram, vec![1]);
        assert_eq!(s.avg_node_depth, 0.0);
    }
}
