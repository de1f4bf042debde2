//! Content-and-structure queries over any index built by [`crate::trie`].
//!
//! A query walks the trie once. At each node the path and value bytes from
//! the root are matched against both predicates; a mismatch in either prunes
//! the subtree, a match in both collects every reference below, and
//! otherwise the walk continues into the children that can still match.

mod matcher;
mod path;

pub use matcher::{match_value, value_admits, MatchOutcome, PathMatcher, PathState, ValueState};
pub use path::{parse_query_path, Axis, LabelPattern, PathError, QueryPath, Step, Trailing};

use thiserror::Error;

use crate::interleave::Scheme;
use crate::keymodel::{CompositeKey, Dimension, KeyError, NodeRef, ValueBytes, ValueWidth};
use crate::trie::{NodeId, RcasIndex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("range width {actual} does not match index width {expected}")]
    WidthMismatch { expected: usize, actual: usize },
    #[error("empty range: lower bound {low} exceeds upper bound {high}")]
    EmptyRange { low: u64, high: u64 },
    #[error(transparent)]
    Key(#[from] KeyError),
    #[error(transparent)]
    Path(#[from] PathError),
}

/// A closed value range `[low, high]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueRange {
    low: ValueBytes,
    high: ValueBytes,
}

impl ValueRange {
    pub fn new(low: ValueBytes, high: ValueBytes) -> Result<Self, QueryError> {
        if low.len() != high.len() {
            return Err(QueryError::WidthMismatch { expected: low.len(), actual: high.len() });
        }
        if low > high {
            return Err(QueryError::EmptyRange { low: low.decode(), high: high.decode() });
        }
        Ok(ValueRange { low, high })
    }

    pub fn from_u64(low: u64, high: u64, width: ValueWidth) -> Result<Self, QueryError> {
        if low > high {
            return Err(QueryError::EmptyRange { low, high });
        }
        ValueRange::new(ValueBytes::encode(low, width)?, ValueBytes::encode(high, width)?)
    }

    /// Every value of the given width.
    pub fn full(width: ValueWidth) -> Self {
        ValueRange::from_u64(0, width.max_value(), width).expect("full range is valid")
    }

    pub fn low(&self) -> &ValueBytes {
        &self.low
    }

    pub fn high(&self) -> &ValueBytes {
        &self.high
    }

    pub fn width(&self) -> usize {
        self.low.len()
    }

    pub fn contains(&self, v: &ValueBytes) -> bool {
        self.low <= *v && *v <= self.high
    }
}

/// References found by a query and the number of nodes it visited.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryResult {
    /// In leaf order; duplicates only if the same reference was ingested twice.
    pub refs: Vec<NodeRef>,
    pub visited: u64,
}

impl QueryResult {
    pub fn sorted_refs(&self) -> Vec<NodeRef> {
        let mut r = self.refs.clone();
        r.sort_unstable();
        r
    }
}

struct Walk<'a> {
    index: &'a RcasIndex,
    paths: PathMatcher<'a>,
    range: &'a ValueRange,
    width: usize,
    refs: Vec<NodeRef>,
    visited: u64,
    trace: Option<Vec<NodeId>>,
}

impl Walk<'_> {
    fn touch(&mut self, id: NodeId) {
        self.visited += 1;
        if let Some(t) = self.trace.as_mut() {
            t.push(id);
        }
    }

    fn visit(&mut self, id: NodeId, buff_p: &mut Vec<u8>, buff_v: &mut Vec<u8>, mut ps: PathState, mut vs: ValueState) {
        self.touch(id);
        let node = self.index.node(id);
        let (pl, vl) = (buff_p.len(), buff_v.len());
        buff_p.extend_from_slice(&node.path);
        buff_v.extend_from_slice(&node.value);

        let value_complete = node.is_leaf() || buff_v.len() == self.width;
        let mv = match_value(buff_v, self.range, &mut vs, value_complete);
        let mp = self.paths.match_path(buff_p, &mut ps);
        if mv == MatchOutcome::Match && mp == MatchOutcome::Match {
            self.collect(id);
        } else if mv != MatchOutcome::Mismatch && mp != MatchOutcome::Mismatch {
            if let Some(children) = node.children() {
                for (byte, child) in children.iter() {
                    let admissible = match node.dim {
                        Dimension::Value => value_admits(self.range, &vs, buff_v.len(), byte),
                        Dimension::Path => self.paths.admits(&ps, byte),
                        Dimension::Leaf => unreachable!("leaves have no children"),
                    };
                    if admissible {
                        self.visit(child, buff_p, buff_v, ps.clone(), vs);
                    }
                }
            }
        }
        buff_p.truncate(pl);
        buff_v.truncate(vl);
    }

    /// Adds every reference below `id`; descendants count as visited.
    fn collect(&mut self, id: NodeId) {
        let mut stack = vec![id];
        let mut first = true;
        while let Some(n) = stack.pop() {
            if !first {
                self.touch(n);
            }
            first = false;
            let node = self.index.node(n);
            match node.children() {
                Some(t) => {
                    let kids: Vec<NodeId> = t.iter().map(|(_, c)| c).collect();
                    stack.extend(kids.into_iter().rev());
                }
                None => self.refs.extend_from_slice(node.refs()),
            }
        }
    }
}

fn run(
    index: &RcasIndex,
    q: &QueryPath,
    range: &ValueRange,
    trace: bool,
) -> Result<(QueryResult, Vec<NodeId>), QueryError> {
    let width = index.width().bytes();
    if range.width() != width {
        return Err(QueryError::WidthMismatch { expected: width, actual: range.width() });
    }
    let dict = match index.scheme() {
        Scheme::ZOrder => index.dictionary(),
        _ => None,
    };
    let paths = PathMatcher::new(q, dict);
    let initial = paths.initial();
    let mut walk = Walk { index, paths, range, width, refs: Vec::new(), visited: 0, trace: trace.then(Vec::new) };
    walk.visit(RcasIndex::ROOT, &mut Vec::new(), &mut Vec::new(), initial, ValueState::default());
    Ok((QueryResult { refs: walk.refs, visited: walk.visited }, walk.trace.unwrap_or_default()))
}

/// Evaluates a query: the references of all keys whose path matches `q` and
/// whose value lies in `range`.
pub fn cas_query(index: &RcasIndex, q: &QueryPath, range: &ValueRange) -> Result<QueryResult, QueryError> {
    run(index, q, range, false).map(|(r, _)| r)
}

/// [`cas_query`] that also returns the visited node ids in visiting order.
pub fn cas_query_traced(
    index: &RcasIndex,
    q: &QueryPath,
    range: &ValueRange,
) -> Result<(QueryResult, Vec<NodeId>), QueryError> {
    run(index, q, range, true)
}

/// Number of nodes a query visits.
pub fn instrumented_query_cost(index: &RcasIndex, q: &QueryPath, range: &ValueRange) -> Result<u64, QueryError> {
    Ok(cas_query(index, q, range)?.visited)
}

/// Brute-force evaluation over the key list, in input order.
pub fn scan_query(keys: &[CompositeKey], q: &QueryPath, range: &ValueRange) -> Vec<NodeRef> {
    keys.iter().filter(|k| q.matches(&k.path) && range.contains(&k.value)).map(|k| k.reference).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::bom_keys;
    use proptest::prelude::*;

    fn bom_index(s: Scheme) -> RcasIndex {
        RcasIndex::build(&bom_keys(), s, ValueWidth::W4).unwrap()
    }

    #[test]
    fn worked_query() {
        let index = bom_index(Scheme::Rcas);
        let q = parse_query_path("/bom/item//battery").unwrap();
        let r = ValueRange::from_u64(100_000, 500_000, ValueWidth::W4).unwrap();
        let (res, trace) = cas_query_traced(&index, &q, &r).unwrap();
        assert_eq!(res.refs, vec![3, 8, 4]);
        // Pre-order ids: n1=0, n2=1, n8=7, n9=8, n10=9, n11=10.
        assert_eq!(trace, vec![0, 7, 8, 9, 10]);
        assert_eq!(res.visited, 5);
    }

    #[test]
    fn universal_query_visits_everything() {
        for s in Scheme::ALL {
            let index = bom_index(s);
            let res = cas_query(&index, &QueryPath::match_all(), &ValueRange::full(ValueWidth::W4)).unwrap();
            assert_eq!(res.sorted_refs(), vec![1, 2, 3, 4, 5, 6, 7, 8], "{s}");
            assert_eq!(res.visited as usize, index.node_count(), "{s}");
        }
    }

    #[test]
    fn descendant_query_under_car() {
        for s in Scheme::ALL {
            let index = bom_index(s);
            let q = parse_query_path("/bom/item/car//").unwrap();
            let r = ValueRange::from_u64(50_000, u32::MAX as u64, ValueWidth::W4).unwrap();
            assert_eq!(cas_query(&index, &q, &r).unwrap().sorted_refs(), vec![3, 4, 8], "{s}");
        }
    }

    #[test]
    fn range_errors() {
        assert!(matches!(ValueRange::from_u64(5, 4, ValueWidth::W4), Err(QueryError::EmptyRange { .. })));
        let index = bom_index(Scheme::Rcas);
        let r = ValueRange::full(ValueWidth::W8);
        assert!(matches!(
            cas_query(&index, &QueryPath::match_all(), &r),
            Err(QueryError::WidthMismatch { expected: 4, actual: 8 })
        ));
    }

    fn dataset() -> impl Strategy<Value = Vec<CompositeKey>> {
        proptest::collection::vec((proptest::collection::vec("(a|b|ab)", 1..4), 0u64..1000), 1..30).prop_map(|rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, (l, v))| {
                    CompositeKey::parse(&format!("/{}", l.join("/")), v, ValueWidth::W4, i as u64).unwrap()
                })
                .collect()
        })
    }

    fn query() -> impl Strategy<Value = QueryPath> {
        (proptest::collection::vec(("(/|//)", "(\\*|a|b|ab)"), 0..3), "(|/|//)").prop_filter_map("valid", |(s, t)| {
            parse_query_path(&(s.iter().map(|(a, l)| format!("{a}{l}")).collect::<String>() + &t)).ok()
        })
    }

    proptest! {
        #[test]
        fn all_schemes_agree_with_scan(keys in dataset(), q in query(), a in 0u64..1000, b in 0u64..1000) {
            let r = ValueRange::from_u64(a.min(b), a.max(b), ValueWidth::W4).unwrap();
            let mut expected = scan_query(&keys, &q, &r);
            expected.sort_unstable();
            for s in Scheme::ALL {
                let index = RcasIndex::build(&keys, s, ValueWidth::W4).unwrap();
                let got = cas_query(&index, &q, &r).unwrap();
                prop_assert_eq!(got.sorted_refs(), expected.clone(), "scheme {}", s);
                prop_assert!(got.visited as usize <= index.node_count());
            }
        }
    }
}
