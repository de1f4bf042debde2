//! Dataset and query files, the synthetic generator and the built-in
//! bill-of-materials example.
//!
//! A dataset line is `path;value;ref` with a decimal value and a hexadecimal
//! reference (optionally `0x`-prefixed). A query line is `path;low;high`.
//! Blank lines and lines starting with `#` are ignored in both.

use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use thiserror::Error;

use crate::keymodel::{CompositeKey, KeyError, NodeRef, ValueWidth};
use crate::query::{parse_query_path, PathError, QueryPath, ValueRange};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("dataset contains no records")]
    Empty,
    #[error("invalid generator setting: {0}")]
    Config(String),
}

fn line_error(line: usize, message: impl Into<String>) -> DatasetError {
    DatasetError::Line { line, message: message.into() }
}

/// One dataset line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub path: String,
    pub value: u64,
    pub reference: NodeRef,
}

impl Record {
    pub fn to_key(&self, width: ValueWidth) -> Result<CompositeKey, KeyError> {
        CompositeKey::parse(&self.path, self.value, width, self.reference)
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

fn split3(line: usize, text: &str) -> Result<[&str; 3], DatasetError> {
    let parts: Vec<&str> = text.split(';').collect();
    <[&str; 3]>::try_from(parts)
        .map_err(|p| line_error(line, format!("expected 3 ';'-separated fields, found {}", p.len())))
}

fn parse_decimal(line: usize, field: &str, what: &str) -> Result<u64, DatasetError> {
    let f = field.trim();
    if f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit()) {
        return Err(line_error(line, format!("{what} {f:?} is not an unsigned decimal")));
    }
    f.parse().map_err(|_| line_error(line, format!("{what} {f:?} is too large")))
}

/// Parses one dataset line (`line` is used in errors only).
pub fn parse_record(line: usize, text: &str) -> Result<Record, DatasetError> {
    let [path, value, reference] = split3(line, text)?;
    let value = parse_decimal(line, value, "value")?;
    let r = reference.trim();
    let hex = r.strip_prefix("0x").or_else(|| r.strip_prefix("0X")).unwrap_or(r);
    if hex.is_empty() || hex.len() > 16 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(line_error(line, format!("reference {r:?} is not a 64-bit hex number")));
    }
    let reference = u64::from_str_radix(hex, 16).expect("validated hex");
    Ok(Record { path: path.to_string(), value, reference })
}

/// Formats a record as a dataset line (without newline).
pub fn format_record(r: &Record) -> String {
    format!("{};{};{:016x}", r.path, r.value, r.reference)
}

pub fn parse_records(text: &str) -> Result<Vec<Record>, DatasetError> {
    let records: Vec<Record> = content_lines(text).map(|(n, l)| parse_record(n, l)).collect::<Result<_, _>>()?;
    if records.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(records)
}

/// Parses a dataset into keys of the given width.
pub fn parse_dataset(text: &str, width: ValueWidth) -> Result<Vec<CompositeKey>, DatasetError> {
    let keys: Vec<CompositeKey> = content_lines(text)
        .map(|(n, l)| parse_record(n, l)?.to_key(width).map_err(|e| line_error(n, e.to_string())))
        .collect::<Result<_, _>>()?;
    if keys.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(keys)
}

pub fn format_dataset(records: &[Record]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&format_record(r));
        out.push('\n');
    }
    out
}

/// One query line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuerySpec {
    pub path: String,
    pub low: u64,
    pub high: u64,
}

impl QuerySpec {
    pub fn compile(&self, width: ValueWidth) -> Result<(QueryPath, ValueRange), String> {
        let q = parse_query_path(&self.path).map_err(|e: PathError| e.to_string())?;
        let r = ValueRange::from_u64(self.low, self.high, width).map_err(|e| e.to_string())?;
        Ok((q, r))
    }
}

impl std::fmt::Display for QuerySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{};{};{}", self.path, self.low, self.high)
    }
}

/// Parses a query file. Paths are checked for syntax; an empty file yields
/// no queries.
pub fn parse_queries(text: &str) -> Result<Vec<QuerySpec>, DatasetError> {
    content_lines(text)
        .map(|(n, l)| {
            let [path, low, high] = split3(n, l)?;
            let path = path.trim();
            parse_query_path(path).map_err(|e| line_error(n, e.to_string()))?;
            let low = parse_decimal(n, low, "low bound")?;
            let high = parse_decimal(n, high, "high bound")?;
            if low > high {
                return Err(line_error(n, format!("low bound {low} exceeds high bound {high}")));
            }
            Ok(QuerySpec { path: path.to_string(), low, high })
        })
        .collect()
}

/// The seven-key bill-of-materials example. The battery key occurs twice;
/// its second reference is 8.
pub fn bom_example() -> Vec<Record> {
    [
        ("/bom/item/canoe", 69200, 1),
        ("/bom/item/carabiner", 241, 2),
        ("/bom/item/car/battery", 250714, 3),
        ("/bom/item/car/battery", 250714, 8),
        ("/bom/item/car/battery", 250800, 4),
        ("/bom/item/car/belt", 2890, 5),
        ("/bom/item/car/brake", 3266, 6),
        ("/bom/item/car/bumper", 2700, 7),
    ]
    .iter()
    .map(|&(p, v, r)| Record { path: p.to_string(), value: v, reference: r })
    .collect()
}

/// Settings of the synthetic dataset generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub key_count: usize,
    /// Number of distinct labels per tree level.
    pub label_alphabet_size: usize,
    pub max_depth: usize,
    /// Zipf exponent of values and label choice (0 = uniform).
    pub value_skew: f64,
    /// Probability that a record repeats an earlier (path, value) pair.
    pub duplicate_fraction: f64,
    pub width: ValueWidth,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 1,
            key_count: 1000,
            label_alphabet_size: 16,
            max_depth: 6,
            value_skew: 1.1,
            duplicate_fraction: 0.05,
            width: ValueWidth::W4,
        }
    }
}

impl GeneratorConfig {
    fn validate(&self) -> Result<(), DatasetError> {
        let bad = |m: &str| Err(DatasetError::Config(m.to_string()));
        if self.key_count == 0 {
            return bad("key_count must be positive");
        }
        if self.label_alphabet_size == 0 {
            return bad("label_alphabet_size must be positive");
        }
        if self.max_depth == 0 {
            return bad("max_depth must be positive");
        }
        if !(self.value_skew >= 0.0 && self.value_skew.is_finite()) {
            return bad("value_skew must be a non-negative number");
        }
        if !(0.0..=1.0).contains(&self.duplicate_fraction) {
            return bad("duplicate_fraction must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Largest generated value: values mimic sizes, skewed towards small ones.
const VALUE_SPAN: f64 = 1e9;

fn make_label(rng: &mut ChaCha8Rng, level: usize, i: usize) -> String {
    const SYLLABLES: [&str; 16] =
        ["ba", "ce", "di", "fo", "gu", "ka", "le", "mi", "no", "pu", "ra", "se", "ti", "vo", "xa", "zu"];
    let n = rng.random_range(1..=3);
    let mut s: String = (0..n).map(|_| *SYLLABLES.choose(rng).expect("non-empty")).collect();
    // Level and index keep labels unique within a level.
    let _ = write!(s, "{level}{i}");
    s
}

/// Generates a reproducible dataset: paths share prefixes through
/// Zipf-distributed label choice per level, values are Zipf-skewed, and a
/// fraction of records repeat an earlier (path, value) pair with a new
/// reference. References are 1, 2, ... in output order.
pub fn generate(config: &GeneratorConfig) -> Result<Vec<Record>, DatasetError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let alphabet: Vec<Vec<String>> = (0..config.max_depth)
        .map(|level| (0..config.label_alphabet_size).map(|i| make_label(&mut rng, level, i)).collect())
        .collect();
    let label_dist =
        Zipf::new(config.label_alphabet_size as f64, 1.0).map_err(|e| DatasetError::Config(e.to_string()))?;
    let span = VALUE_SPAN.min(config.width.max_value() as f64);
    let value_dist = Zipf::new(span, config.value_skew).map_err(|e| DatasetError::Config(e.to_string()))?;

    let mut out: Vec<Record> = Vec::with_capacity(config.key_count);
    for i in 0..config.key_count {
        let reference = i as u64 + 1;
        if i > 0 && rng.random_bool(config.duplicate_fraction) {
            let src = &out[rng.random_range(0..i)];
            out.push(Record { path: src.path.clone(), value: src.value, reference });
            continue;
        }
        let depth = rng.random_range(1..=config.max_depth);
        let mut path = String::new();
        for level in alphabet.iter().take(depth) {
            let idx = label_dist.sample(&mut rng) as usize - 1;
            path.push('/');
            path.push_str(&level[idx.min(level.len() - 1)]);
        }
        let value = (value_dist.sample(&mut rng) as u64).saturating_sub(1);
        out.push(Record { path, value, reference });
    }
    Ok(out)
}

/// Kinds of generated queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryShape {
    /// A full stored path.
    Exact,
    /// A stored path prefix followed by `//`.
    Subtree,
    /// A stored path with one label replaced by `*`.
    Wildcard,
    /// A stored path prefix, `//`, then the stored path's last label.
    Descendant,
}

/// Generates `count` queries over `records`: path predicates derived from
/// stored paths with mixed `//` and `*`, and value ranges around stored
/// values, alternating between narrow and wide ranges.
pub fn generate_queries(records: &[Record], count: usize, seed: u64, width: ValueWidth) -> Vec<QuerySpec> {
    assert!(!records.is_empty(), "queries need a non-empty dataset");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shapes = [QueryShape::Exact, QueryShape::Subtree, QueryShape::Wildcard, QueryShape::Descendant];
    let max = width.max_value();
    (0..count)
        .map(|i| {
            let rec = &records[rng.random_range(0..records.len())];
            let labels: Vec<&str> = rec.path[1..].split('/').collect();
            let shape = shapes[rng.random_range(0..shapes.len())];
            let path = shaped_path(&labels, shape, &mut rng);
            let a = records[rng.random_range(0..records.len())].value;
            let b = records[rng.random_range(0..records.len())].value;
            let (low, high) = if i % 2 == 0 {
                (a.min(b), a.max(b))
            } else {
                let w = rng.random_range(0..=a.max(16));
                (a.saturating_sub(w), a.saturating_add(w).min(max))
            };
            QuerySpec { path, low, high }
        })
        .collect()
}

fn shaped_path(labels: &[&str], shape: QueryShape, rng: &mut ChaCha8Rng) -> String {
    let join = |ls: &[&str]| ls.iter().map(|l| format!("/{l}")).collect::<String>();
    match shape {
        QueryShape::Exact => join(labels),
        QueryShape::Subtree => {
            let cut = rng.random_range(0..labels.len());
            if cut == 0 {
                "//".to_string()
            } else {
                format!("{}//", join(&labels[..cut]))
            }
        }
        QueryShape::Wildcard => {
            let mut ls = labels.to_vec();
            let i = rng.random_range(0..ls.len());
            ls[i] = "*";
            join(&ls)
        }
        QueryShape::Descendant => {
            let cut = rng.random_range(0..labels.len());
            format!("{}//{}", join(&labels[..cut]), labels[labels.len() - 1])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_round_trip() {
        let r = parse_record(1, "/a/b;42;0x00000000000000ff").unwrap();
        assert_eq!(r, Record { path: "/a/b".into(), value: 42, reference: 255 });
        assert_eq!(format_record(&r), "/a/b;42;00000000000000ff");
        assert_eq!(parse_record(1, &format_record(&r)).unwrap(), r);
    }

    #[test]
    fn reports_line_numbers() {
        let text = "# header\n/a;1;1\n\n/b;x;2\n";
        assert_eq!(
            parse_dataset(text, ValueWidth::W4).unwrap_err(),
            DatasetError::Line { line: 4, message: "value \"x\" is not an unsigned decimal".into() }
        );
        assert!(matches!(parse_dataset("/a;1\n", ValueWidth::W4), Err(DatasetError::Line { line: 1, .. })));
        assert!(matches!(parse_dataset("a;1;1\n", ValueWidth::W4), Err(DatasetError::Line { line: 1, .. })));
        assert!(matches!(parse_dataset("/a;4294967296;1\n", ValueWidth::W4), Err(DatasetError::Line { .. })));
        assert!(matches!(parse_dataset("/a;1;1g\n", ValueWidth::W4), Err(DatasetError::Line { .. })));
        assert_eq!(parse_dataset("", ValueWidth::W4), Err(DatasetError::Empty));
        assert_eq!(parse_dataset("# nothing\n", ValueWidth::W4), Err(DatasetError::Empty));
    }

    #[test]
    fn bom_example_parses() {
        let text = format_dataset(&bom_example());
        let keys = parse_dataset(&text, ValueWidth::W4).unwrap();
        assert_eq!(keys, crate::testutil::bom_keys());
    }

    #[test]
    fn queries() {
        let q = parse_queries("/bom/item//battery;100000;500000\n# c\n//;0;9\n").unwrap();
        assert_eq!(q.len(), 2);
        assert_eq!(q[0].to_string(), "/bom/item//battery;100000;500000");
        assert!(parse_queries("/a;5;4\n").is_err());
        assert!(parse_queries("/;0;4\n").is_err());
        assert!(parse_queries("").unwrap().is_empty());
    }

    #[test]
    fn generator_is_deterministic() {
        let c = GeneratorConfig { key_count: 500, ..Default::default() };
        let a = generate(&c).unwrap();
        assert_eq!(a, generate(&c).unwrap());
        assert_eq!(a.len(), 500);
        assert_ne!(a, generate(&GeneratorConfig { seed: 2, ..c.clone() }).unwrap());
        let keys = parse_dataset(&format_dataset(&a), ValueWidth::W4).unwrap();
        assert_eq!(keys.len(), 500);
        assert!(a.iter().enumerate().all(|(i, r)| r.reference == i as u64 + 1));
        let dups = a
            .iter()
            .enumerate()
            .filter(|(i, r)| a[..*i].iter().any(|s| s.path == r.path && s.value == r.value))
            .count();
        assert!(dups > 0);
    }

    #[test]
    fn generator_rejects_bad_settings() {
        assert!(generate(&GeneratorConfig { key_count: 0, ..Default::default() }).is_err());
        assert!(generate(&GeneratorConfig { duplicate_fraction: 1.5, ..Default::default() }).is_err());
        assert!(generate(&GeneratorConfig { max_depth: 0, ..Default::default() }).is_err());
    }

    #[test]
    fn generated_queries_compile() {
        let recs = generate(&GeneratorConfig { key_count: 200, ..Default::default() }).unwrap();
        let qs = generate_queries(&recs, 100, 7, ValueWidth::W4);
        assert_eq!(qs.len(), 100);
        for q in &qs {
            q.compile(ValueWidth::W4).unwrap();
        }
        assert!(qs.iter().any(|q| q.path.contains("//")));
        assert!(qs.iter().any(|q| q.path.contains('*')));
    }
}
