//! Trie construction for static interleavings.
//!
//! Keys are flattened into dimension-tagged byte strings first; the trie is
//! then a plain compressed trie over those strings. Each node's run of common
//! bytes is split into its path and value parts by tag, and an inner node
//! takes the dimension of the byte its children differ in. Flat strings with
//! an equal prefix have equal tags on that prefix, so the tag at the
//! divergence position is the same for every key of a node.

use super::{check_input, finish_nodes, placeholder_inner, BuildError, Node, NodeBody, NodeId, RcasIndex};
use crate::interleave::{static_interleave, FlatKey, ScanCounters, Scheme, ZoDictionary};
use crate::keymodel::{CompositeKey, Dimension, ValueWidth};

struct Frame {
    members: Vec<u32>,
    pos: usize,
    parent: Option<(NodeId, u8)>,
}

/// Builds the trie over the static interleavings of `keys` under `scheme`.
/// The z-order dictionary is derived from the keys themselves.
pub fn build_static(keys: &[CompositeKey], scheme: Scheme, width: ValueWidth) -> Result<RcasIndex, BuildError> {
    check_input(keys, width)?;
    let dict = match scheme {
        Scheme::ZOrder => Some(ZoDictionary::build(keys.iter().map(|k| &k.path))?),
        _ => None,
    };
    let flats: Vec<FlatKey> =
        keys.iter().map(|k| static_interleave(k, scheme, dict.as_ref())).collect::<Result<_, _>>()?;

    let mut counters = ScanCounters::default();
    let mut nodes: Vec<Node> = Vec::new();
    let mut children: Vec<Vec<(u8, NodeId)>> = Vec::new();
    let mut slots: Vec<Vec<u32>> = vec![Vec::new(); 256];
    let mut stack = vec![Frame { members: (0..keys.len() as u32).collect(), pos: 0, parent: None }];

    while let Some(f) = stack.pop() {
        if nodes.len() >= NodeId::MAX as usize {
            return Err(BuildError::TooManyNodes);
        }
        let id = nodes.len() as NodeId;
        if let Some((parent, byte)) = f.parent {
            children[parent as usize].push((byte, id));
        }
        children.push(Vec::new());

        let first = &flats[f.members[0] as usize];
        let mut end = f.pos;
        'scan: while end < first.len() {
            let b = first.bytes[end];
            for (j, &m) in f.members.iter().enumerate() {
                if flats[m as usize].bytes.get(end) != Some(&b) {
                    counters.probe_reads += j as u64 + 1;
                    break 'scan;
                }
            }
            counters.byte_scans += f.members.len() as u64;
            end += 1;
        }
        let (mut path, mut value) = (Vec::new(), Vec::new());
        for i in f.pos..end {
            match first.tags[i] {
                Dimension::Path => path.push(first.bytes[i]),
                _ => value.push(first.bytes[i]),
            }
        }

        if end == first.len() {
            let refs = f.members.iter().map(|&m| keys[m as usize].reference).collect();
            nodes.push(Node {
                dim: Dimension::Leaf,
                path: path.into(),
                value: value.into(),
                body: NodeBody::Leaf(refs),
            });
            continue;
        }

        nodes.push(placeholder_inner(first.tags[end], &path, &value));
        counters.moves += f.members.len() as u64;
        for m in f.members {
            let b = flats[m as usize].bytes[end];
            slots[b as usize].push(m);
        }
        for b in (0..256).rev() {
            if !slots[b].is_empty() {
                stack.push(Frame { members: std::mem::take(&mut slots[b]), pos: end, parent: Some((id, b as u8)) });
            }
        }
    }

    Ok(RcasIndex { nodes: finish_nodes(nodes, children), width, scheme, dict, key_count: keys.len() as u64, counters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interleave::dsc;
    use crate::testutil::bom_keys;
    use proptest::prelude::*;

    #[test]
    fn path_value_root_splits_at_path_discriminative_byte() {
        let keys = bom_keys();
        let index = build_static(&keys, Scheme::PathValue, ValueWidth::W4).unwrap();
        let root = index.root();
        assert_eq!(root.dim, Dimension::Path);
        let all: Vec<&CompositeKey> = keys.iter().collect();
        assert_eq!(root.path.len() + 1, dsc(&all, Dimension::Path));
        assert_eq!(&*root.path, b"/bom/item/ca");
        assert!(root.value.is_empty());
        let bytes: Vec<u8> = root.children().unwrap().iter().map(|(b, _)| b).collect();
        assert_eq!(bytes, vec![b'n', b'r']);
    }

    #[test]
    fn value_path_root_splits_at_value_byte_two() {
        let keys = bom_keys();
        let index = build_static(&keys, Scheme::ValuePath, ValueWidth::W4).unwrap();
        let root = index.root();
        assert_eq!(root.dim, Dimension::Value);
        assert_eq!(&*root.value, &[0x00]);
        let bytes: Vec<u8> = root.children().unwrap().iter().map(|(b, _)| b).collect();
        assert_eq!(bytes, vec![0x00, 0x01, 0x03]);
    }

    #[test]
    fn static_singletons_are_leaves() {
        let k = CompositeKey::parse("/x", 5, ValueWidth::W4, 3).unwrap();
        for s in [Scheme::PathValue, Scheme::ValuePath, Scheme::LabelWise, Scheme::ZOrder] {
            let index = build_static(std::slice::from_ref(&k), s, ValueWidth::W4).unwrap();
            assert_eq!(index.node_count(), 1, "{s}");
            assert_eq!(index.root().refs(), &[3]);
        }
    }

    fn keyset() -> impl Strategy<Value = Vec<CompositeKey>> {
        proptest::collection::vec((proptest::collection::vec("[ab/]{1,2}", 1..4), 0u64..300), 1..30).prop_map(|rows| {
            rows.into_iter()
                .enumerate()
                .filter_map(|(i, (labels, v))| {
                    let labels: Vec<String> = labels.into_iter().map(|l| l.replace('/', "c")).collect();
                    CompositeKey::parse(&format!("/{}", labels.join("/")), v, ValueWidth::W4, i as u64).ok()
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn static_leaves_reproduce_flat_keys(keys in keyset()) {
            prop_assume!(!keys.is_empty());
            for s in [Scheme::PathValue, Scheme::ValuePath, Scheme::LabelWise, Scheme::ZOrder] {
                let index = build_static(&keys, s, ValueWidth::W4).unwrap();
                let mut total = 0;
                for (p, v, refs) in index.stored_keys() {
                    for r in &refs {
                        let k = &keys[*r as usize];
                        let f = static_interleave(k, s, index.dictionary()).unwrap();
                        prop_assert_eq!(&f.project(Dimension::Path), &p);
                        prop_assert_eq!(&f.project(Dimension::Value), &v);
                    }
                    total += refs.len();
                }
                prop_assert_eq!(total, keys.len());
                for n in index.nodes() {
                    if let Some(t) = n.children() {
                        prop_assert!(t.len() >= 2);
                        for (b, c) in t.iter() {
                            prop_assert_eq!(index.node(c).bytes(n.dim).first(), Some(&b));
                        }
                    }
                }
            }
        }
    }
}
