//! Replays the checked-in fuzz seed corpora through the same checks the
//! fuzz targets make, so stable test runs cover the parser entry points.

use std::fs;
use std::path::PathBuf;

use rcas::dataset::{format_dataset, parse_dataset, parse_queries, parse_records};
use rcas::query::QueryPath;
use rcas::trie::{decode, encode};
use rcas::{cas_query, PathBytes, ValueBytes, ValueRange, ValueWidth};

fn corpus(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut files: Vec<_> =
        fs::read_dir(&dir).unwrap_or_else(|e| panic!("{}: {e}", dir.display())).map(|e| e.unwrap().path()).collect();
    files.sort();
    assert!(!files.is_empty(), "empty corpus {target}");
    files.into_iter().map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())).collect()
}

#[test]
fn query_path_seeds() {
    let mut accepted = 0;
    for (name, data) in corpus("query_path") {
        let Ok(text) = std::str::from_utf8(&data) else { continue };
        let Ok(q) = QueryPath::parse(text) else { continue };
        accepted += 1;
        assert_eq!(QueryPath::parse(&q.to_string()).unwrap(), q, "{name}");
        let _ = q.truncate_at_first_branch();
        for text in ["/a", "/a/b/c", "/bom/item/car/battery", "/x/a/x/a"] {
            let p = PathBytes::encode(text).unwrap();
            let labels: Vec<&[u8]> = p.labels().collect();
            assert_eq!(q.matches(&p), q.matches_labels(&labels), "{name} on {text}");
        }
    }
    assert!(accepted >= 5);
}

#[test]
fn dataset_text_seeds() {
    for (name, data) in corpus("dataset_text") {
        let Ok(text) = std::str::from_utf8(&data) else { continue };
        if let Ok(records) = parse_records(text) {
            assert_eq!(parse_records(&format_dataset(&records)).unwrap(), records, "{name}");
        }
        let _ = parse_dataset(text, ValueWidth::W4);
        let _ = parse_queries(text);
    }
}

#[test]
fn index_decode_seeds() {
    let mut accepted = 0;
    for (name, data) in corpus("index_decode") {
        let Ok(index) = decode(&data) else { continue };
        accepted += 1;
        assert_eq!(encode(&index), data, "{name}");
        let all = QueryPath::parse("//").unwrap();
        let r = cas_query(&index, &all, &ValueRange::full(index.width())).unwrap();
        assert_eq!(r.visited, index.node_count() as u64, "{name}");
    }
    assert_eq!(accepted, 5);
}

#[test]
fn key_encoding_seeds() {
    for (name, data) in corpus("key_encoding") {
        if let Ok(p) = PathBytes::from_encoded(&data) {
            assert_eq!(PathBytes::encode(p.as_str()).unwrap(), p, "{name}");
        }
        if let Ok(text) = std::str::from_utf8(&data) {
            if let Ok(p) = PathBytes::encode(text) {
                assert_eq!(PathBytes::from_encoded(p.as_bytes()).unwrap(), p, "{name}");
            }
        }
        if let Ok(v) = ValueBytes::from_bytes(&data) {
            assert_eq!(ValueBytes::encode(v.decode(), v.width()).unwrap(), v, "{name}");
        }
    }
}
