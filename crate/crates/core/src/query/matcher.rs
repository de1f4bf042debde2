//! Incremental path and value matching over byte prefixes.
//!
//! Both matchers consume the bytes of one dimension as a trie traversal
//! reveals them and decide as early as possible whether every key below the
//! current node matches, none does, or it is still open.
//!
//! The path matcher simulates a nondeterministic automaton over the encoded
//! path bytes. Keeping the full state set handles any number of descendant
//! steps without backtracking.

use smallvec::SmallVec;

use super::path::{Axis, LabelPattern, QueryPath, Trailing};
use super::ValueRange;
use crate::interleave::{ZoDictionary, SURROGATE_WIDTH};
use crate::keymodel::{is_label_byte, SEPARATOR, TERMINATOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchOutcome {
    Match,
    Mismatch,
    Incomplete,
}

/// Automaton states. `Boundary(i)`: `i` steps matched, a separator or the
/// terminator comes next. `Label(i, j)`: inside the label of step `i` with
/// `j` bytes matched (for a wildcard, `j` is 0 or 1). `Skip(i)`: inside a
/// label that the descendant step `i` skips. `Sink`: the query is exhausted
/// with a trailing `//`, so every completion matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum State {
    Boundary(u32),
    Label(u32, u32),
    Skip(u32),
    Sink,
    Accept,
}

type StateSet = SmallVec<[State; 4]>;

/// Surrogate decoding progress for z-order paths.
#[derive(Debug, Clone, Default)]
struct Surrogate {
    pending: SmallVec<[u8; SURROGATE_WIDTH]>,
    consumed: usize,
    ended: bool,
}

/// Matching progress of one root path.
#[derive(Debug, Clone)]
pub struct PathState {
    states: StateSet,
    consumed: usize,
    complete: bool,
    surrogate: Option<Surrogate>,
}

impl PathState {
    /// Number of buffer bytes consumed so far.
    pub fn consumed(&self) -> usize {
        self.consumed
    }

    /// Whether the path is known in full.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Whether a descendant step is currently skipping labels.
    pub fn descendant_active(&self) -> bool {
        self.states.iter().any(|s| matches!(s, State::Skip(_)))
    }
}

/// Path matcher for one query. With a dictionary it reads z-order surrogate
/// paths instead of path text.
pub struct PathMatcher<'q> {
    query: &'q QueryPath,
    dict: Option<&'q ZoDictionary>,
}

impl<'q> PathMatcher<'q> {
    pub fn new(query: &'q QueryPath, dict: Option<&'q ZoDictionary>) -> Self {
        PathMatcher { query, dict }
    }

    pub fn initial(&self) -> PathState {
        let mut states = StateSet::new();
        states.push(State::Boundary(0));
        PathState { states, consumed: 0, complete: false, surrogate: self.dict.map(|_| Surrogate::default()) }
    }

    /// Consumes the bytes of `buff` beyond those already consumed and
    /// classifies the result.
    pub fn match_path(&self, buff: &[u8], st: &mut PathState) -> MatchOutcome {
        let fresh = &buff[st.consumed.min(buff.len())..];
        self.feed(st, fresh);
        self.outcome(st)
    }

    pub fn outcome(&self, st: &PathState) -> MatchOutcome {
        if st.states.is_empty() {
            MatchOutcome::Mismatch
        } else if st.states.contains(&State::Sink) {
            MatchOutcome::Match
        } else if st.complete {
            if st.states.contains(&State::Accept) {
                MatchOutcome::Match
            } else {
                MatchOutcome::Mismatch
            }
        } else {
            MatchOutcome::Incomplete
        }
    }

    /// Whether the child reached through `byte` can contain a match. While a
    /// descendant step skips labels every child is followed.
    pub fn admits(&self, st: &PathState, byte: u8) -> bool {
        if st.descendant_active() {
            return true;
        }
        let mut next = st.clone();
        self.feed(&mut next, &[byte]);
        self.outcome(&next) != MatchOutcome::Mismatch
    }

    pub fn feed(&self, st: &mut PathState, bytes: &[u8]) {
        st.consumed += bytes.len();
        match (self.dict, st.surrogate.as_mut()) {
            (Some(dict), Some(sur)) => {
                let mut text: Vec<u8> = Vec::new();
                for &b in bytes {
                    sur.consumed += 1;
                    if sur.ended {
                        continue;
                    }
                    sur.pending.push(b);
                    if sur.pending.len() == SURROGATE_WIDTH {
                        let code = sur.pending.iter().fold(0u32, |acc, &x| (acc << 8) | x as u32);
                        sur.pending.clear();
                        match dict.label(code) {
                            Some(label) if code != 0 => {
                                text.push(SEPARATOR);
                                text.extend_from_slice(label);
                            }
                            _ => {
                                text.push(TERMINATOR);
                                sur.ended = true;
                            }
                        }
                    }
                    if !sur.ended && sur.consumed == dict.path_len() {
                        text.push(TERMINATOR);
                        sur.ended = true;
                    }
                }
                self.step_text(st, &text);
            }
            _ => self.step_text(st, bytes),
        }
    }

    fn step_text(&self, st: &mut PathState, bytes: &[u8]) {
        for &c in bytes {
            if st.states.is_empty() || st.complete {
                st.states.clear();
                return;
            }
            let mut next = StateSet::new();
            for &s in &st.states {
                self.step(s, c, &mut next);
            }
            next.sort_unstable();
            next.dedup();
            st.states = next;
            if c == TERMINATOR {
                st.complete = true;
            }
        }
    }

    fn step(&self, s: State, c: u8, out: &mut StateSet) {
        let steps = &self.query.steps;
        match s {
            State::Boundary(i) => self.at_boundary(i, c, out),
            State::Label(i, j) => {
                let pattern = &steps[i as usize].label;
                if c == SEPARATOR || c == TERMINATOR {
                    let done = match pattern {
                        LabelPattern::Literal(l) => j as usize == l.len(),
                        LabelPattern::Wildcard => j == 1,
                    };
                    if done {
                        self.at_boundary(i + 1, c, out);
                    }
                } else if is_label_byte(c) {
                    match pattern {
                        LabelPattern::Literal(l) => {
                            if l.get(j as usize) == Some(&c) {
                                out.push(State::Label(i, j + 1));
                            }
                        }
                        LabelPattern::Wildcard => out.push(State::Label(i, 1)),
                    }
                }
            }
            State::Skip(i) => {
                if c == SEPARATOR {
                    out.push(State::Label(i, 0));
                    out.push(State::Skip(i));
                } else if is_label_byte(c) {
                    out.push(State::Skip(i));
                }
            }
            State::Sink => out.push(State::Sink),
            State::Accept => {}
        }
    }

    /// Transition from `Boundary(i)` on byte `c`.
    fn at_boundary(&self, i: u32, c: u8, out: &mut StateSet) {
        let steps = &self.query.steps;
        let n = steps.len() as u32;
        if c == TERMINATOR {
            if i == n {
                out.push(State::Accept);
            }
        } else if c == SEPARATOR {
            if i < n {
                out.push(State::Label(i, 0));
                if steps[i as usize].axis == Axis::Descendant {
                    out.push(State::Skip(i));
                }
            } else if self.query.trailing == Trailing::Descendant {
                out.push(State::Sink);
            }
        }
    }
}

/// Value matching progress: `lo`/`hi` count the leading bytes equal to the
/// lower/upper bound; `*_open` records that the prefix is already strictly
/// inside that bound.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ValueState {
    pub lo: usize,
    pub hi: usize,
    pub low_open: bool,
    pub high_open: bool,
}

/// Classifies a value prefix against a closed range. `complete` is true when
/// `buff` holds the full value.
pub fn match_value(buff: &[u8], range: &ValueRange, st: &mut ValueState, complete: bool) -> MatchOutcome {
    let (low, high) = (range.low().as_bytes(), range.high().as_bytes());
    if !st.low_open {
        while st.lo < buff.len() && buff[st.lo] == low[st.lo] {
            st.lo += 1;
        }
        if st.lo < buff.len() {
            if buff[st.lo] < low[st.lo] {
                return MatchOutcome::Mismatch;
            }
            st.low_open = true;
        }
    }
    if !st.high_open {
        while st.hi < buff.len() && buff[st.hi] == high[st.hi] {
            st.hi += 1;
        }
        if st.hi < buff.len() {
            if buff[st.hi] > high[st.hi] {
                return MatchOutcome::Mismatch;
            }
            st.high_open = true;
        }
    }
    if (st.low_open && st.high_open) || complete {
        MatchOutcome::Match
    } else {
        MatchOutcome::Incomplete
    }
}

/// Whether a value prefix of length `pos` (already classified by `st`)
/// extended by `byte` can still lie in the range.
pub fn value_admits(range: &ValueRange, st: &ValueState, pos: usize, byte: u8) -> bool {
    let (low, high) = (range.low().as_bytes(), range.high().as_bytes());
    if !st.low_open && st.lo == pos && byte < low[pos] {
        return false;
    }
    if !st.high_open && st.hi == pos && byte > high[pos] {
        return false;
    }
    true
}
