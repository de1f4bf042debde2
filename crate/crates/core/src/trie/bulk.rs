//! Bulk loading of the dynamically interleaved trie.
//!
//! Each node is created from a partition together with lower bounds for the
//! discriminative bytes in both dimensions. The node stores the bytes the
//! partition shares beyond those bounds, then splits the partition on the
//! preferred dimension, or on the other one if the preferred dimension is
//! exhausted. Children prefer the dimension their parent did not split on.
//! The recursion runs on an explicit stack, so key length does not bound the
//! call depth.

use super::{check_input, finish_nodes, placeholder_inner, BuildError, Node, NodeBody, NodeId, RcasIndex};
use crate::interleave::{dsc_inc_counted, psi_into, Partition, ScanCounters, Scheme};
use crate::keymodel::{substring, CompositeKey, Dimension, ValueWidth};

struct Frame<'a> {
    keys: Partition<'a>,
    dim: Dimension,
    g_path: usize,
    g_value: usize,
    parent: Option<(NodeId, u8)>,
}

/// Builds the dynamically interleaved trie over `keys`.
///
/// Duplicate (path, value) pairs share one leaf whose references keep input
/// order; children are created in ascending byte order.
pub fn bulk_load(keys: &[CompositeKey], width: ValueWidth) -> Result<RcasIndex, BuildError> {
    check_input(keys, width)?;
    let mut counters = ScanCounters::default();
    let mut nodes: Vec<Node> = Vec::new();
    let mut children: Vec<Vec<(u8, NodeId)>> = Vec::new();
    let mut table: Vec<Partition<'_>> = vec![Vec::new(); 256];
    let mut stack =
        vec![Frame { keys: keys.iter().collect(), dim: Dimension::Value, g_path: 1, g_value: 1, parent: None }];

    while let Some(f) = stack.pop() {
        if nodes.len() >= NodeId::MAX as usize {
            return Err(BuildError::TooManyNodes);
        }
        let id = nodes.len() as NodeId;
        if let Some((parent, byte)) = f.parent {
            children[parent as usize].push((byte, id));
        }
        let first = f.keys[0];
        let gp = dsc_inc_counted(&f.keys, Dimension::Path, f.g_path, &mut counters);
        let gv = dsc_inc_counted(&f.keys, Dimension::Value, f.g_value, &mut counters);
        let s_path = substring(first.path.as_bytes(), f.g_path, gp - 1);
        let s_value = substring(first.value.as_bytes(), f.g_value, gv - 1);
        children.push(Vec::new());

        if gp > first.path.len() && gv > first.value.len() {
            let refs = f.keys.iter().map(|k| k.reference).collect();
            nodes.push(Node {
                dim: Dimension::Leaf,
                path: s_path.into(),
                value: s_value.into(),
                body: NodeBody::Leaf(refs),
            });
            continue;
        }

        let exhausted = match f.dim {
            Dimension::Path => gp > first.path.len(),
            _ => gv > first.value.len(),
        };
        let dim = if exhausted { f.dim.flip() } else { f.dim };
        let g = if dim == Dimension::Path { gp } else { gv };
        nodes.push(placeholder_inner(dim, s_path, s_value));

        psi_into(&mut table, f.keys, dim, g, &mut counters);
        let start = stack.len();
        for b in (0..256).rev() {
            if !table[b].is_empty() {
                stack.push(Frame {
                    keys: std::mem::take(&mut table[b]),
                    dim: dim.flip(),
                    g_path: gp,
                    g_value: gv,
                    parent: Some((id, b as u8)),
                });
            }
        }
        debug_assert!(stack.len() - start >= 2, "an inner node splits into at least two partitions");
    }

    Ok(RcasIndex {
        nodes: finish_nodes(nodes, children),
        width,
        scheme: Scheme::Rcas,
        dict: None,
        key_count: keys.len() as u64,
        counters,
    })
}

/// Work counters of a bulk load over `keys`.
pub fn instrumented_build_cost(keys: &[CompositeKey], width: ValueWidth) -> Result<ScanCounters, BuildError> {
    Ok(bulk_load(keys, width)?.build_counters())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interleave::dynamic_interleave;
    use crate::testutil::bom_keys;
    use proptest::prelude::*;

    type Shape = (Dimension, Vec<u8>, Vec<u8>, Vec<u64>, Vec<u8>);

    fn shape(index: &RcasIndex) -> Vec<Shape> {
        index
            .nodes()
            .iter()
            .map(|n| {
                let kids = n.children().map(|t| t.iter().map(|(b, _)| b).collect()).unwrap_or_default();
                (n.dim, n.value.to_vec(), n.path.to_vec(), n.refs().to_vec(), kids)
            })
            .collect()
    }

    #[test]
    fn bom_tree() {
        use Dimension::{Leaf as B, Path as P, Value as V};
        let index = bulk_load(&bom_keys(), ValueWidth::W4).unwrap();
        let expected: Vec<Shape> = vec![
            (V, vec![0x00], b"/bom/item/ca".to_vec(), vec![], vec![0x00, 0x01, 0x03]),
            (P, vec![0x00], b"r".to_vec(), vec![], vec![b'/', b'a']),
            (V, vec![], b"/b".to_vec(), vec![], vec![0x0A, 0x0B, 0x0C]),
            (B, vec![0x0A, 0x8C], b"umper\0".to_vec(), vec![7], vec![]),
            (B, vec![0x0B, 0x4A], b"elt\0".to_vec(), vec![5], vec![]),
            (B, vec![0x0C, 0xC2], b"rake\0".to_vec(), vec![6], vec![]),
            (B, vec![0x00, 0xF1], b"abiner\0".to_vec(), vec![2], vec![]),
            (B, vec![0x01, 0x0E, 0x50], b"noe\0".to_vec(), vec![1], vec![]),
            (V, vec![0x03, 0xD3], b"r/battery\0".to_vec(), vec![], vec![0x5A, 0xB0]),
            (B, vec![0x5A], vec![], vec![3, 8], vec![]),
            (B, vec![0xB0], vec![], vec![4], vec![]),
        ];
        assert_eq!(shape(&index), expected);
        assert_eq!(index.key_count(), 8);
    }

    #[test]
    fn singleton_is_one_leaf() {
        let k = CompositeKey::parse("/a/b", 9, ValueWidth::W8, 42).unwrap();
        let index = bulk_load(std::slice::from_ref(&k), ValueWidth::W8).unwrap();
        assert_eq!(index.node_count(), 1);
        let root = index.root();
        assert_eq!(root.dim, Dimension::Leaf);
        assert_eq!(&*root.path, k.path.as_bytes());
        assert_eq!(&*root.value, k.value.as_bytes());
        assert_eq!(root.refs(), &[42]);
        let c = index.build_counters();
        assert_eq!(c.byte_scans, (k.path.len() + k.value.len()) as u64);
        assert_eq!(c.moves, 0);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(bulk_load(&[], ValueWidth::W4), Err(BuildError::Empty));
        let k = CompositeKey::parse("/a", 1, ValueWidth::W8, 1).unwrap();
        assert!(matches!(bulk_load(&[k], ValueWidth::W4), Err(BuildError::WidthMismatch { .. })));
    }

    #[test]
    fn bom_counters_within_bounds() {
        let keys = bom_keys();
        let c = instrumented_build_cost(&keys, ValueWidth::W4).unwrap();
        let total: u64 = keys.iter().map(|k| (k.path.len() + k.value.len()) as u64).sum();
        assert_eq!(c.byte_scans, total);
        let l = keys.iter().map(|k| k.path.len() + k.value.len()).max().unwrap() as u64;
        assert!(c.moves <= l * keys.len() as u64);
    }

    fn keyset() -> impl Strategy<Value = Vec<CompositeKey>> {
        proptest::collection::vec((proptest::collection::vec("[ab]{1,2}", 1..4), 0u64..40), 1..40).prop_map(|rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, (labels, v))| {
                    CompositeKey::parse(&format!("/{}", labels.join("/")), v * 97, ValueWidth::W4, i as u64).unwrap()
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn leaves_match_per_key_interleavings(keys in keyset()) {
            let index = bulk_load(&keys, ValueWidth::W4).unwrap();
            let refs: Vec<&CompositeKey> = keys.iter().collect();
            let leaves = index.leaf_interleavings();
            let mut seen = 0;
            for (dy, leaf_refs) in &leaves {
                let owners: Vec<&CompositeKey> =
                    keys.iter().filter(|k| leaf_refs.contains(&k.reference)).collect();
                prop_assert_eq!(owners.len(), leaf_refs.len());
                // References keep input order.
                prop_assert!(owners.iter().map(|k| k.reference).eq(leaf_refs.iter().copied()));
                for k in owners {
                    prop_assert_eq!(&dynamic_interleave(k, &refs), dy);
                }
                seen += leaf_refs.len();
            }
            prop_assert_eq!(seen, keys.len());
        }

        #[test]
        fn inner_nodes_split_and_stay_distinct(keys in keyset()) {
            let index = bulk_load(&keys, ValueWidth::W4).unwrap();
            for n in index.nodes() {
                if let Some(t) = n.children() {
                    prop_assert!(t.len() >= 2);
                    prop_assert!(n.dim != Dimension::Leaf);
                    for (b, c) in t.iter() {
                        prop_assert_eq!(index.node(c).bytes(n.dim).first(), Some(&b));
                    }
                } else {
                    prop_assert_eq!(n.dim, Dimension::Leaf);
                    prop_assert!(!n.refs().is_empty());
                }
            }
        }

        #[test]
        fn work_counters_within_bounds(keys in keyset()) {
            let c = instrumented_build_cost(&keys, ValueWidth::W4).unwrap();
            let total: u64 = keys.iter().map(|k| (k.path.len() + k.value.len()) as u64).sum();
            let l = keys.iter().map(|k| k.path.len() + k.value.len()).max().unwrap() as u64;
            prop_assert!(c.byte_scans <= total);
            prop_assert!(c.moves <= l * keys.len() as u64);
            prop_assert!(c.probe_reads <= 2 * (c.moves + keys.len() as u64));
        }

        #[test]
        fn builds_are_deterministic(keys in keyset()) {
            prop_assert_eq!(bulk_load(&keys, ValueWidth::W4).unwrap(), bulk_load(&keys, ValueWidth::W4).unwrap());
        }
    }
}
