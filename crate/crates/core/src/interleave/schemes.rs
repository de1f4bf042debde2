//! Static interleavings: path-value and value-path concatenation, label-wise
//! alternation and the z-order over surrogate-coded paths.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use super::InterleaveError;
use crate::keymodel::{CompositeKey, Dimension, PathBytes, SEPARATOR, TERMINATOR};

/// Bytes per label surrogate code in the z-order scheme.
pub const SURROGATE_WIDTH: usize = 3;

/// Largest number of distinct labels a dictionary can code (code 0 pads).
const MAX_CODES: usize = (1 << (8 * SURROGATE_WIDTH)) - 1;

/// Key layout of an index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Dynamic interleaving at discriminative bytes.
    Rcas,
    /// Path bytes, then value bytes.
    PathValue,
    /// Value bytes, then path bytes.
    ValuePath,
    /// One value byte alternating with one path label.
    LabelWise,
    /// Byte-level z-order over fixed-length surrogate paths.
    ZOrder,
}

impl Scheme {
    pub const ALL: [Scheme; 5] =
        [Scheme::Rcas, Scheme::PathValue, Scheme::ValuePath, Scheme::LabelWise, Scheme::ZOrder];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Rcas => "rcas",
            Scheme::PathValue => "pv",
            Scheme::ValuePath => "vp",
            Scheme::LabelWise => "lw",
            Scheme::ZOrder => "zo",
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Scheme::Rcas => 0,
            Scheme::PathValue => 1,
            Scheme::ValuePath => 2,
            Scheme::LabelWise => 3,
            Scheme::ZOrder => 4,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Scheme> {
        Scheme::ALL.into_iter().find(|s| s.code() == code)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown scheme {s:?} (expected rcas, pv, vp, lw or zo)"))
    }
}

/// A flat interleaved key: every byte is tagged with its source dimension.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FlatKey {
    pub bytes: Vec<u8>,
    pub tags: Vec<Dimension>,
}

impl FlatKey {
    fn push(&mut self, bytes: &[u8], dim: Dimension) {
        self.bytes.extend_from_slice(bytes);
        self.tags.extend(std::iter::repeat_n(dim, bytes.len()));
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    /// Bytes of one dimension, in order.
    pub fn project(&self, dim: Dimension) -> Vec<u8> {
        self.bytes.iter().zip(&self.tags).filter(|(_, &t)| t == dim).map(|(&b, _)| b).collect()
    }
}

impl fmt::Display for FlatKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (&b, &t)) in self.bytes.iter().zip(&self.tags).enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match t {
                Dimension::Value => write!(f, "{b:02X}")?,
                _ if b == TERMINATOR => f.write_str("$")?,
                _ => write!(f, "{}", b as char)?,
            }
        }
        Ok(())
    }
}

/// Label to surrogate code mapping for the z-order scheme.
///
/// Codes are assigned in first-seen order starting at 1; code 0 pads paths
/// shorter than `max_depth` labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZoDictionary {
    codes: HashMap<Box<[u8]>, u32>,
    labels: Vec<Box<[u8]>>,
    max_depth: usize,
}

impl ZoDictionary {
    pub fn build<'a>(paths: impl IntoIterator<Item = &'a PathBytes>) -> Result<Self, InterleaveError> {
        let mut dict = ZoDictionary { codes: HashMap::new(), labels: Vec::new(), max_depth: 0 };
        for p in paths {
            let mut depth = 0;
            for label in p.labels() {
                depth += 1;
                if !dict.codes.contains_key(label) {
                    if dict.labels.len() == MAX_CODES {
                        return Err(InterleaveError::DictionaryOverflow(MAX_CODES));
                    }
                    dict.labels.push(label.into());
                    dict.codes.insert(label.into(), dict.labels.len() as u32);
                }
            }
            dict.max_depth = dict.max_depth.max(depth);
        }
        Ok(dict)
    }

    /// Rebuilds a dictionary from its label list (code `i + 1` for `labels[i]`).
    pub fn from_parts(labels: Vec<Box<[u8]>>, max_depth: usize) -> Result<Self, InterleaveError> {
        if labels.len() > MAX_CODES {
            return Err(InterleaveError::DictionaryOverflow(MAX_CODES));
        }
        let mut codes = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if codes.insert(l.clone(), i as u32 + 1).is_some() {
                return Err(InterleaveError::UnknownLabel(String::from_utf8_lossy(l).into_owned()));
            }
        }
        Ok(ZoDictionary { codes, labels, max_depth })
    }

    pub fn labels(&self) -> &[Box<[u8]>] {
        &self.labels
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    /// Length in bytes of every surrogate path.
    pub fn path_len(&self) -> usize {
        SURROGATE_WIDTH * self.max_depth
    }

    pub fn code(&self, label: &[u8]) -> Option<u32> {
        self.codes.get(label).copied()
    }

    pub fn label(&self, code: u32) -> Option<&[u8]> {
        let i = (code as usize).checked_sub(1)?;
        self.labels.get(i).map(|l| &l[..])
    }

    /// The fixed-length surrogate of a path.
    pub fn encode_path(&self, path: &PathBytes) -> Result<Vec<u8>, InterleaveError> {
        let mut out = Vec::with_capacity(self.path_len());
        for (depth, label) in path.labels().enumerate() {
            if depth == self.max_depth {
                return Err(InterleaveError::PathTooDeep { depth: path.labels().count(), max: self.max_depth });
            }
            let code = self
                .code(label)
                .ok_or_else(|| InterleaveError::UnknownLabel(String::from_utf8_lossy(label).into_owned()))?;
            out.extend_from_slice(&code.to_be_bytes()[4 - SURROGATE_WIDTH..]);
        }
        out.resize(self.path_len(), 0);
        Ok(out)
    }
}

/// Emits `value_chunk` value bytes, then `path_chunk` path bytes, repeatedly,
/// until both inputs are used up. Starts with the value dimension.
pub fn zip_chunks(value: &[u8], path: &[u8], value_chunk: usize, path_chunk: usize) -> FlatKey {
    assert!(value_chunk > 0 && path_chunk > 0, "chunk sizes must be positive");
    let mut out = FlatKey::default();
    let (mut v, mut p) = (value, path);
    while !v.is_empty() || !p.is_empty() {
        let (head, tail) = v.split_at(value_chunk.min(v.len()));
        out.push(head, Dimension::Value);
        v = tail;
        let (head, tail) = p.split_at(path_chunk.min(p.len()));
        out.push(head, Dimension::Path);
        p = tail;
    }
    out
}

/// One value byte alternating with one path byte.
pub fn byte_wise(k: &CompositeKey) -> FlatKey {
    zip_chunks(k.value.as_bytes(), k.path.as_bytes(), 1, 1)
}

/// Splits an encoded path into label units for label-wise interleaving.
///
/// Each unit ends with its delimiter, so units are self-delimiting:
/// `/bom/item/car$` gives `/bom/`, `item/`, `car$`.
pub fn lw_units(path: &[u8]) -> Vec<&[u8]> {
    let mut units = Vec::new();
    let mut start = 0;
    for (i, &b) in path.iter().enumerate().skip(1) {
        if b == SEPARATOR || b == TERMINATOR {
            units.push(&path[start..=i]);
            start = i + 1;
        }
    }
    if start < path.len() {
        units.push(&path[start..]);
    }
    units
}

fn label_wise(k: &CompositeKey) -> FlatKey {
    let mut out = FlatKey::default();
    let value = k.value.as_bytes();
    let units = lw_units(k.path.as_bytes());
    let rounds = value.len().max(units.len());
    for i in 0..rounds {
        if let Some(b) = value.get(i) {
            out.push(std::slice::from_ref(b), Dimension::Value);
        }
        if let Some(u) = units.get(i) {
            out.push(u, Dimension::Path);
        }
    }
    out
}

/// The static interleaving of `k` under `scheme`. The z-order scheme needs
/// the dataset's surrogate dictionary.
pub fn static_interleave(
    k: &CompositeKey,
    scheme: Scheme,
    dict: Option<&ZoDictionary>,
) -> Result<FlatKey, InterleaveError> {
    let mut out = FlatKey::default();
    match scheme {
        Scheme::Rcas => return Err(InterleaveError::NotStatic),
        Scheme::PathValue => {
            out.push(k.path.as_bytes(), Dimension::Path);
            out.push(k.value.as_bytes(), Dimension::Value);
        }
        Scheme::ValuePath => {
            out.push(k.value.as_bytes(), Dimension::Value);
            out.push(k.path.as_bytes(), Dimension::Path);
        }
        Scheme::LabelWise => out = label_wise(k),
        Scheme::ZOrder => {
            let dict = dict.ok_or(InterleaveError::MissingDictionary)?;
            let path = dict.encode_path(&k.path)?;
            let (lv, lp) = (k.value.len(), path.len().max(1));
            out = zip_chunks(k.value.as_bytes(), &path, lv.div_ceil(lp), lp.div_ceil(lv));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keymodel::ValueWidth;
    use proptest::prelude::*;

    fn k6() -> CompositeKey {
        CompositeKey::parse("/bom/item/car/brake", 3266, ValueWidth::W4, 6).unwrap()
    }

    #[test]
    fn concatenations() {
        let k = k6();
        let pv = static_interleave(&k, Scheme::PathValue, None).unwrap();
        assert_eq!(&pv.bytes[..20], b"/bom/item/car/brake\0");
        assert_eq!(&pv.bytes[20..], &[0x00, 0x00, 0x0C, 0xC2]);
        assert!(pv.tags[..20].iter().all(|&t| t == Dimension::Path));
        assert!(pv.tags[20..].iter().all(|&t| t == Dimension::Value));

        let vp = static_interleave(&k, Scheme::ValuePath, None).unwrap();
        assert_eq!(&vp.bytes[..4], &[0x00, 0x00, 0x0C, 0xC2]);
        assert_eq!(&vp.bytes[4..], b"/bom/item/car/brake\0");
        assert!(vp.tags[..4].iter().all(|&t| t == Dimension::Value));
    }

    #[test]
    fn byte_wise_of_k6() {
        let bw = byte_wise(&k6());
        let mut expected = vec![0x00, b'/', 0x00, b'b', 0x0C, b'o', 0xC2, b'm'];
        expected.extend_from_slice(b"/item/car/brake\0");
        assert_eq!(bw.bytes, expected);
        assert_eq!(bw.to_string(), "00 / 00 b 0C o C2 m / i t e m / c a r / b r a k e $");
    }

    #[test]
    fn label_wise_units() {
        assert_eq!(lw_units(b"/bom/item/car\0"), vec![&b"/bom/"[..], b"item/", b"car\0"]);
        let lw = static_interleave(&k6(), Scheme::LabelWise, None).unwrap();
        let mut expected = vec![0x00];
        expected.extend_from_slice(b"/bom/");
        expected.push(0x00);
        expected.extend_from_slice(b"item/");
        expected.push(0x0C);
        expected.extend_from_slice(b"car/");
        expected.push(0xC2);
        expected.extend_from_slice(b"brake\0");
        assert_eq!(lw.bytes, expected);

        // Value outlasts the path.
        let k = CompositeKey::parse("/a", 0x01020304, ValueWidth::W4, 1).unwrap();
        let lw = static_interleave(&k, Scheme::LabelWise, None).unwrap();
        assert_eq!(lw.bytes, vec![0x01, b'/', b'a', 0x00, 0x02, 0x03, 0x04]);
    }

    #[test]
    fn z_order_surrogates() {
        let keys = [
            CompositeKey::parse("/bom/item/car/brake", 3266, ValueWidth::W4, 6).unwrap(),
            CompositeKey::parse("/bom/item/canoe", 69200, ValueWidth::W4, 1).unwrap(),
        ];
        let dict = ZoDictionary::build(keys.iter().map(|k| &k.path)).unwrap();
        assert_eq!(dict.max_depth(), 4);
        assert_eq!(dict.code(b"bom"), Some(1));
        assert_eq!(dict.code(b"canoe"), Some(5));
        assert_eq!(dict.label(3), Some(&b"car"[..]));
        assert_eq!(dict.label(0), None);
        let s = dict.encode_path(&keys[1].path).unwrap();
        assert_eq!(s, vec![0, 0, 1, 0, 0, 2, 0, 0, 5, 0, 0, 0]);

        // l_V = 4, l_P = 12: one value byte, then three path bytes.
        let zo = static_interleave(&keys[1], Scheme::ZOrder, Some(&dict)).unwrap();
        assert_eq!(zo.bytes, vec![0x00, 0, 0, 1, 0x01, 0, 0, 2, 0x0E, 0, 0, 5, 0x50, 0, 0, 0]);
        assert_eq!(zo.project(Dimension::Path), s);

        assert_eq!(static_interleave(&keys[0], Scheme::ZOrder, None), Err(InterleaveError::MissingDictionary));
        let deep = CompositeKey::parse("/bom/item/car/brake/pad", 1, ValueWidth::W4, 9).unwrap();
        assert!(matches!(dict.encode_path(&deep.path), Err(InterleaveError::PathTooDeep { .. })));
        let odd = CompositeKey::parse("/boat", 1, ValueWidth::W4, 9).unwrap();
        assert!(matches!(dict.encode_path(&odd.path), Err(InterleaveError::UnknownLabel(_))));
    }

    #[test]
    fn zip_with_short_path() {
        let zo = zip_chunks(&[1, 2, 3, 4], &[9, 9, 9], 2, 1);
        assert_eq!(zo.bytes, vec![1, 2, 9, 3, 4, 9, 9]);
    }

    fn key() -> impl Strategy<Value = CompositeKey> {
        (proptest::collection::vec("[a-c]{1,3}", 1..5), any::<u32>()).prop_map(|(labels, v)| {
            CompositeKey::parse(&format!("/{}", labels.join("/")), v as u64, ValueWidth::W4, 0).unwrap()
        })
    }

    proptest! {
        #[test]
        fn schemes_preserve_both_dimensions(k in key()) {
            let dict = ZoDictionary::build([&k.path]).unwrap();
            for s in [Scheme::PathValue, Scheme::ValuePath, Scheme::LabelWise] {
                let f = static_interleave(&k, s, None).unwrap();
                prop_assert_eq!(f.project(Dimension::Path), k.path.as_bytes());
                prop_assert_eq!(f.project(Dimension::Value), k.value.as_bytes());
            }
            let z = static_interleave(&k, Scheme::ZOrder, Some(&dict)).unwrap();
            prop_assert_eq!(z.project(Dimension::Path), dict.encode_path(&k.path).unwrap());
            prop_assert_eq!(z.project(Dimension::Value), k.value.as_bytes());
        }
    }
}
