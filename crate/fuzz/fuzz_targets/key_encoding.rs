#![no_main]

use libfuzzer_sys::fuzz_target;
use rcas::{PathBytes, ValueBytes};

fuzz_target!(|data: &[u8]| {
    if let Ok(p) = PathBytes::from_encoded(data) {
        assert_eq!(PathBytes::encode(p.as_str()).expect("decoded path re-encodes"), p);
    }
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(p) = PathBytes::encode(text) {
            assert_eq!(PathBytes::from_encoded(p.as_bytes()).expect("encoded path decodes"), p);
        }
    }
    if let Ok(v) = ValueBytes::from_bytes(data) {
        assert_eq!(ValueBytes::encode(v.decode(), v.width()).unwrap(), v);
    }
});
