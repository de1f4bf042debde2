//! Query path syntax and its reference semantics over label sequences.
//!
//! A query path is a sequence of steps. `/label` is a child step, `//label`
//! is a descendant step (zero or more labels are skipped before `label`),
//! and `*` matches any single label. A trailing `/` changes nothing; a
//! trailing `//` accepts any suffix of labels, including none. The query
//! `//` alone matches every path.

use std::fmt;

use thiserror::Error;

use crate::keymodel::{is_label_byte, PathBytes, SEPARATOR};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("query path is empty")]
    Empty,
    #[error("query path must start with '/'")]
    MissingLeadingSlash,
    #[error("'/' alone is not a query path (use '//' to match everything)")]
    RootOnly,
    #[error("more than two consecutive '/' at byte {0}")]
    TooManySlashes(usize),
    #[error("disallowed byte 0x{byte:02x} at position {position}")]
    BadByte { byte: u8, position: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Child,
    Descendant,
}

impl Axis {
    fn as_str(self) -> &'static str {
        match self {
            Axis::Child => "/",
            Axis::Descendant => "//",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelPattern {
    Literal(Box<[u8]>),
    Wildcard,
}

impl LabelPattern {
    pub fn matches(&self, label: &[u8]) -> bool {
        match self {
            LabelPattern::Literal(l) => **l == *label,
            LabelPattern::Wildcard => !label.is_empty(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub axis: Axis,
    pub label: LabelPattern,
}

/// What follows the last step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trailing {
    None,
    Child,
    Descendant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryPath {
    pub steps: Vec<Step>,
    pub trailing: Trailing,
}

impl QueryPath {
    /// The query that matches every path.
    pub fn match_all() -> QueryPath {
        QueryPath { steps: Vec::new(), trailing: Trailing::Descendant }
    }

    pub fn parse(text: &str) -> Result<QueryPath, PathError> {
        parse_query_path(text)
    }

    /// Whether `path` satisfies the query.
    pub fn matches(&self, path: &PathBytes) -> bool {
        let labels: Vec<&[u8]> = path.labels().collect();
        self.matches_labels(&labels)
    }

    /// Reference semantics over a label sequence, by dynamic programming:
    /// `ok[i][j]` holds when steps `i..` match labels `j..`.
    pub fn matches_labels(&self, labels: &[&[u8]]) -> bool {
        let (n, m) = (self.steps.len(), labels.len());
        let mut ok = vec![vec![false; m + 1]; n + 1];
        for (j, cell) in ok[n].iter_mut().enumerate() {
            *cell = self.trailing == Trailing::Descendant || j == m;
        }
        for i in (0..n).rev() {
            let step = &self.steps[i];
            // Descendant: some m' >= j with labels[m'] matching and ok[i+1][m'+1].
            let mut later = false;
            for j in (0..=m).rev() {
                let here = j < m && step.label.matches(labels[j]) && ok[i + 1][j + 1];
                ok[i][j] = match step.axis {
                    Axis::Child => here,
                    Axis::Descendant => here || later,
                };
                later = ok[i][j] && step.axis == Axis::Descendant;
            }
        }
        ok[0][0]
    }

    /// Whether any step uses the descendant axis or a wildcard.
    pub fn is_simple(&self) -> bool {
        self.steps.iter().all(|s| s.axis == Axis::Child && s.label != LabelPattern::Wildcard)
    }

    /// The prefix of the query up to its first descendant step, or up to a
    /// wildcard that has further steps after it, ending in a trailing `//`.
    /// Queries without such a step are returned unchanged.
    pub fn truncate_at_first_branch(&self) -> QueryPath {
        let cut = self.steps.iter().enumerate().position(|(i, s)| {
            s.axis == Axis::Descendant || (s.label == LabelPattern::Wildcard && i + 1 < self.steps.len())
        });
        match cut {
            Some(i) => QueryPath { steps: self.steps[..i].to_vec(), trailing: Trailing::Descendant },
            None => self.clone(),
        }
    }
}

impl fmt::Display for QueryPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            f.write_str(s.axis.as_str())?;
            match &s.label {
                LabelPattern::Wildcard => f.write_str("*")?,
                LabelPattern::Literal(l) => f.write_str(&String::from_utf8_lossy(l))?,
            }
        }
        match self.trailing {
            Trailing::None => Ok(()),
            Trailing::Child => f.write_str("/"),
            Trailing::Descendant => f.write_str("//"),
        }
    }
}

impl std::str::FromStr for QueryPath {
    type Err = PathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_query_path(s)
    }
}

/// Parses a query path such as `/bom/*/car//battery`.
pub fn parse_query_path(text: &str) -> Result<QueryPath, PathError> {
    let b = text.as_bytes();
    if b.is_empty() {
        return Err(PathError::Empty);
    }
    if b[0] != SEPARATOR {
        return Err(PathError::MissingLeadingSlash);
    }
    let mut steps = Vec::new();
    let mut i = 0;
    loop {
        let start = i;
        while i < b.len() && b[i] == SEPARATOR {
            i += 1;
        }
        let axis = match i - start {
            1 => Axis::Child,
            2 => Axis::Descendant,
            _ => return Err(PathError::TooManySlashes(start + 3)),
        };
        let label_start = i;
        while i < b.len() && b[i] != SEPARATOR {
            if !is_label_byte(b[i]) {
                return Err(PathError::BadByte { byte: b[i], position: i + 1 });
            }
            i += 1;
        }
        let label = &b[label_start..i];
        if label.is_empty() {
            let trailing = match axis {
                Axis::Child if steps.is_empty() => return Err(PathError::RootOnly),
                Axis::Child => Trailing::Child,
                Axis::Descendant => Trailing::Descendant,
            };
            return Ok(QueryPath { steps, trailing });
        }
        let label = if label == b"*" { LabelPattern::Wildcard } else { LabelPattern::Literal(label.into()) };
        steps.push(Step { axis, label });
        if i == b.len() {
            return Ok(QueryPath { steps, trailing: Trailing::None });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lit(axis: Axis, l: &str) -> Step {
        Step { axis, label: LabelPattern::Literal(l.as_bytes().into()) }
    }

    fn path(p: &str) -> PathBytes {
        PathBytes::encode(p).unwrap()
    }

    #[test]
    fn parses_examples() {
        let q = parse_query_path("/bom/item/car//").unwrap();
        assert_eq!(q.steps, vec![lit(Axis::Child, "bom"), lit(Axis::Child, "item"), lit(Axis::Child, "car")]);
        assert_eq!(q.trailing, Trailing::Descendant);

        let q = parse_query_path("/bom/*/car/battery").unwrap();
        assert_eq!(q.steps[1], Step { axis: Axis::Child, label: LabelPattern::Wildcard });
        assert_eq!(q.trailing, Trailing::None);

        let q = parse_query_path("/bom/item//battery").unwrap();
        assert_eq!(q.steps, vec![lit(Axis::Child, "bom"), lit(Axis::Child, "item"), lit(Axis::Descendant, "battery")]);

        assert_eq!(parse_query_path("//").unwrap(), QueryPath::match_all());
        assert_eq!(parse_query_path("/a/").unwrap().trailing, Trailing::Child);
    }

    #[test]
    fn rejects_malformed() {
        assert_eq!(parse_query_path(""), Err(PathError::Empty));
        assert_eq!(parse_query_path("/"), Err(PathError::RootOnly));
        assert_eq!(parse_query_path("a/b"), Err(PathError::MissingLeadingSlash));
        assert!(matches!(parse_query_path("/a///b"), Err(PathError::TooManySlashes(_))));
        assert!(matches!(parse_query_path("///"), Err(PathError::TooManySlashes(_))));
        assert!(matches!(parse_query_path("/a\tb"), Err(PathError::BadByte { .. })));
        assert!(matches!(parse_query_path("/a/é"), Err(PathError::BadByte { .. })));
    }

    #[test]
    fn reference_semantics() {
        let q = parse_query_path("/bom/item//battery").unwrap();
        assert!(q.matches(&path("/bom/item/car/battery")));
        assert!(q.matches(&path("/bom/item/battery")));
        assert!(!q.matches(&path("/bom/item/car/battery/cell")));
        assert!(!q.matches(&path("/bom/item/canoe")));

        let q = parse_query_path("/bom/item/car//").unwrap();
        assert!(q.matches(&path("/bom/item/car")));
        assert!(q.matches(&path("/bom/item/car/belt")));
        assert!(!q.matches(&path("/bom/item/canoe")));
        assert!(!q.matches(&path("/bom/item/carabiner")));

        let q = parse_query_path("/bom/*/car/battery").unwrap();
        assert!(q.matches(&path("/bom/item/car/battery")));
        assert!(!q.matches(&path("/bom/car/battery")));

        let q = parse_query_path("//a/b").unwrap();
        assert!(q.matches(&path("/x/a/a/b")));
        assert!(q.matches(&path("/a/b")));
        assert!(!q.matches(&path("/a/x/b")));

        assert!(QueryPath::match_all().matches(&path("/z")));
        assert!(parse_query_path("/a/").unwrap().matches(&path("/a")));
        assert!(!parse_query_path("/a/").unwrap().matches(&path("/a/b")));
    }

    #[test]
    fn truncation() {
        let t = |s: &str| parse_query_path(s).unwrap().truncate_at_first_branch().to_string();
        assert_eq!(t("/usr/share//Makefile"), "/usr/share//");
        assert_eq!(t("/a/*/b"), "/a//");
        assert_eq!(t("/a/b/*"), "/a/b/*");
        assert_eq!(t("/a/b//"), "/a/b//");
        assert_eq!(t("//x"), "//");
        assert_eq!(t("/a/b"), "/a/b");
    }

    proptest! {
        #[test]
        fn display_round_trips(steps in proptest::collection::vec(("(/|//)", "(\\*|[a-c]{1,3})"), 1..5), tail in "(|/|//)") {
            let text: String = steps.iter().map(|(a, l)| format!("{a}{l}")).collect::<String>() + &tail;
            let q = parse_query_path(&text).unwrap();
            let again = parse_query_path(&q.to_string()).unwrap();
            prop_assert_eq!(q, again);
        }
    }
}
