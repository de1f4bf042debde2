#![no_main]

use libfuzzer_sys::fuzz_target;
use rcas::query::QueryPath;
use rcas::trie::{decode, encode};
use rcas::{cas_query, ValueRange};

fuzz_target!(|data: &[u8]| {
    let Ok(index) = decode(data) else { return };
    // Anything accepted is canonical and fully traversable.
    assert_eq!(encode(&index), data);
    let all = QueryPath::parse("//").unwrap();
    let r = cas_query(&index, &all, &ValueRange::full(index.width())).expect("universal query runs");
    assert_eq!(r.visited, index.node_count() as u64);
});
