#![no_main]

use libfuzzer_sys::fuzz_target;
use rcas::query::QueryPath;
use rcas::PathBytes;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(q) = QueryPath::parse(text) else { return };
    // Rendering is canonical: it parses back to the same predicate.
    let again = QueryPath::parse(&q.to_string()).expect("rendered predicate parses");
    assert_eq!(again, q);
    let _ = q.truncate_at_first_branch();
    // The automaton and the label-level oracle agree on a few fixed paths.
    for text in ["/a", "/a/b/c", "/bom/item/car/battery", "/x/a/x/a"] {
        let p = PathBytes::encode(text).unwrap();
        let labels: Vec<&[u8]> = p.labels().collect();
        assert_eq!(q.matches(&p), q.matches_labels(&labels));
    }
});
