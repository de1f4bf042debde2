//! Benchmark harness comparing interleaving schemes on one dataset.
//!
//! Every scheme answers every query; answers must agree with a scan of the
//! key list, so a disagreement aborts the run. Selectivities are measured by
//! the same scan and reported as fractions of the key count.

use std::time::Instant;

use thiserror::Error;

use crate::dataset::QuerySpec;
use crate::interleave::Scheme;
use crate::keymodel::{CompositeKey, ValueWidth};
use crate::query::{cas_query, scan_query, QueryPath, ValueRange};
use crate::trie::{BuildError, RcasIndex};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("building the {scheme} index failed: {source}")]
    Build { scheme: Scheme, source: BuildError },
    #[error("query {index} ({query}): {message}")]
    Query { index: usize, query: String, message: String },
    #[error("query {index} ({query}): {scheme} returned {got} references, the scan {expected}")]
    Disagreement { index: usize, query: String, scheme: Scheme, got: usize, expected: usize },
}

/// Result selectivity and the selectivities of the two predicates alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selectivity {
    pub sigma: f64,
    pub path: f64,
    pub value: f64,
}

pub fn selectivity(keys: &[CompositeKey], q: &QueryPath, r: &ValueRange) -> Selectivity {
    let n = keys.len().max(1) as f64;
    let (mut both, mut p, mut v) = (0usize, 0usize, 0usize);
    for k in keys {
        let pm = q.matches(&k.path);
        let vm = r.contains(&k.value);
        p += pm as usize;
        v += vm as usize;
        both += (pm && vm) as usize;
    }
    Selectivity { sigma: both as f64 / n, path: p as f64 / n, value: v as f64 / n }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub query: usize,
    pub scheme: Scheme,
    pub runtime_us: f64,
    pub visited: u64,
    pub result_size: usize,
    pub selectivity: Selectivity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub avg: f64,
    pub stddev: f64,
}

/// Mean and sample standard deviation (0 for fewer than two values).
pub fn summarize(xs: &[f64]) -> Summary {
    if xs.is_empty() {
        return Summary { avg: 0.0, stddev: 0.0 };
    }
    let n = xs.len() as f64;
    let avg = xs.iter().sum::<f64>() / n;
    let stddev =
        if xs.len() < 2 { 0.0 } else { (xs.iter().map(|x| (x - avg).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() };
    Summary { avg, stddev }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSummary {
    pub scheme: Scheme,
    pub runtime_us: Summary,
    pub visited: Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub summaries: Vec<SchemeSummary>,
}

pub const CSV_HEADER: &str = "query,scheme,runtime_us,visited,result_size,sigma,sigma_p,sigma_v";

impl BenchReport {
    /// CSV with one row per (query, scheme) and `avg`/`stddev` rows per
    /// scheme. Summary rows fill the runtime and visited columns only.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.3},{},{},{:.6},{:.6},{:.6}\n",
                r.query,
                r.scheme,
                r.runtime_us,
                r.visited,
                r.result_size,
                r.selectivity.sigma,
                r.selectivity.path,
                r.selectivity.value
            ));
        }
        for s in &self.summaries {
            out.push_str(&format!("avg,{},{:.3},{:.3},,,,\n", s.scheme, s.runtime_us.avg, s.visited.avg));
            out.push_str(&format!("stddev,{},{:.3},{:.3},,,,\n", s.scheme, s.runtime_us.stddev, s.visited.stddev));
        }
        out
    }
}

/// Runs every query `repeat` times on every scheme.
pub fn run_bench(
    keys: &[CompositeKey],
    queries: &[QuerySpec],
    schemes: &[Scheme],
    repeat: usize,
    width: ValueWidth,
) -> Result<BenchReport, BenchError> {
    let repeat = repeat.max(1);
    let compiled: Vec<(QueryPath, ValueRange)> = queries
        .iter()
        .enumerate()
        .map(|(index, q)| {
            q.compile(width).map_err(|message| BenchError::Query { index, query: q.to_string(), message })
        })
        .collect::<Result<_, _>>()?;
    let truth: Vec<(Vec<u64>, Selectivity)> = compiled
        .iter()
        .map(|(q, r)| {
            let mut refs = scan_query(keys, q, r);
            refs.sort_unstable();
            (refs, selectivity(keys, q, r))
        })
        .collect();

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for &scheme in schemes {
        let index = RcasIndex::build(keys, scheme, width).map_err(|source| BenchError::Build { scheme, source })?;
        let (mut times, mut visits) = (Vec::new(), Vec::new());
        for (i, (q, r)) in compiled.iter().enumerate() {
            let query_err = |e: crate::query::QueryError| BenchError::Query {
                index: i,
                query: queries[i].to_string(),
                message: e.to_string(),
            };
            let result = cas_query(&index, q, r).map_err(query_err)?;
            let start = Instant::now();
            for _ in 0..repeat {
                std::hint::black_box(cas_query(&index, q, r).map_err(query_err)?);
            }
            let runtime_us = start.elapsed().as_secs_f64() * 1e6 / repeat as f64;
            let (expected, sel) = &truth[i];
            if result.sorted_refs() != *expected {
                return Err(BenchError::Disagreement {
                    index: i,
                    query: queries[i].to_string(),
                    scheme,
                    got: result.refs.len(),
                    expected: expected.len(),
                });
            }
            times.push(runtime_us);
            visits.push(result.visited as f64);
            rows.push(BenchRow {
                query: i,
                scheme,
                runtime_us,
                visited: result.visited,
                result_size: result.refs.len(),
                selectivity: *sel,
            });
        }
        summaries.push(SchemeSummary { scheme, runtime_us: summarize(&times), visited: summarize(&visits) });
    }
    Ok(BenchReport { rows, summaries })
}
