#![no_main]

use libfuzzer_sys::fuzz_target;
use rcas::dataset::{format_dataset, parse_dataset, parse_queries, parse_records};
use rcas::ValueWidth;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(records) = parse_records(text) {
        assert_eq!(parse_records(&format_dataset(&records)).expect("formatted records parse"), records);
    }
    let _ = parse_dataset(text, ValueWidth::W4);
    let _ = parse_queries(text);
});
