//! `rcas`: build, query and compare content-and-structure indexes.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use rcas::bench::run_bench;
use rcas::costmodel::{
    alternating, calibrate, error_factor, estimate_cost, parse_phi, phi_label, robustness, CostModelParams,
    DatasetStats, LevelSelectivities,
};
use rcas::dataset::{bom_example, format_dataset, generate, parse_dataset, parse_queries, GeneratorConfig};
use rcas::keymodel::{CompositeKey, Dimension};
use rcas::query::{cas_query, parse_query_path, ValueRange};
use rcas::trie::{self, RcasIndex};
use rcas::{Scheme, ValueWidth};

#[derive(Parser)]
#[command(name = "rcas", version, about = "Content-and-structure index over (path, value) keys")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset (or the built-in example) as `path;value;ref` lines
    Generate(GenerateArgs),
    /// Build an index and report build work and shape
    Build(BuildArgs),
    /// Run one query and print the matching references
    Query(QueryArgs),
    /// Print structural statistics of an index
    Stats(SourceArgs),
    /// Compare all schemes on a query file and print CSV
    Bench(BenchArgs),
    /// Evaluate the analytic cost model
    Costmodel(CostArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Emit a built-in dataset instead of a synthetic one
    #[arg(long, value_parser = ["bom"])]
    example: Option<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of records
    #[arg(long = "keys", default_value_t = 1000)]
    key_count: usize,
    /// Distinct labels per path level
    #[arg(long, default_value_t = 16)]
    alphabet: usize,
    #[arg(long, default_value_t = 6)]
    max_depth: usize,
    /// Zipf exponent of the value distribution
    #[arg(long, default_value_t = 1.1)]
    skew: f64,
    /// Fraction of records that repeat an earlier (path, value) pair
    #[arg(long, default_value_t = 0.05)]
    duplicates: f64,
    #[arg(long, default_value_t = 4, value_parser = parse_width)]
    width: usize,
    /// Output file (default: stdout)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    /// Dataset file (`-` for stdin)
    dataset: PathBuf,
    #[arg(long, default_value = "rcas")]
    scheme: Scheme,
    #[arg(long, default_value_t = 4, value_parser = parse_width)]
    width: usize,
    /// Write the index to this file
    #[arg(long)]
    save: Option<PathBuf>,
}

#[derive(Args)]
struct SourceArgs {
    /// Dataset file to build from (`-` for stdin)
    #[arg(long, conflicts_with = "load", required_unless_present = "load")]
    data: Option<PathBuf>,
    /// Saved index file
    #[arg(long)]
    load: Option<PathBuf>,
    #[arg(long, default_value = "rcas")]
    scheme: Scheme,
    #[arg(long, default_value_t = 4, value_parser = parse_width)]
    width: usize,
}

#[derive(Args)]
struct QueryArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Path predicate, e.g. `/bom/item//battery`
    path: String,
    /// Lower value bound (inclusive)
    low: u64,
    /// Upper value bound (inclusive)
    high: u64,
}

#[derive(Args)]
struct BenchArgs {
    dataset: PathBuf,
    /// Query file with `path;low;high` lines
    queries: PathBuf,
    /// Runs per query and scheme
    #[arg(long, default_value_t = 10)]
    repeat: usize,
    /// Schemes to compare (default: all)
    #[arg(long, value_delimiter = ',')]
    schemes: Vec<Scheme>,
    #[arg(long, default_value_t = 4, value_parser = parse_width)]
    width: usize,
}

#[derive(Args)]
struct CostArgs {
    /// Fanout
    #[arg(long, default_value_t = 10.0)]
    o: f64,
    /// Height
    #[arg(long, default_value_t = 12)]
    h: usize,
    /// Per-level path selectivity
    #[arg(long, default_value_t = 0.5)]
    sigma_p: f64,
    /// Per-level value selectivity
    #[arg(long, default_value_t = 0.1)]
    sigma_v: f64,
    /// Leave out the root term, as in the published cost figures
    #[arg(long)]
    exclude_root: bool,
    /// Extra dimension vector, e.g. `I1=VVVVPVPVPPPP` (repeatable)
    #[arg(long = "phi", value_parser = parse_named_phi)]
    phis: Vec<(String, String)>,
    /// Calibrate against this dataset instead (needs --queries)
    #[arg(long, requires = "queries")]
    dataset: Option<PathBuf>,
    /// Query file for calibration
    #[arg(long, requires = "dataset")]
    queries: Option<PathBuf>,
    #[arg(long, default_value_t = 4, value_parser = parse_width)]
    width: usize,
}

fn parse_width(s: &str) -> Result<usize, String> {
    match s {
        "4" => Ok(4),
        "8" => Ok(8),
        _ => Err("width must be 4 or 8".into()),
    }
}

fn parse_named_phi(s: &str) -> Result<(String, String), String> {
    let (name, phi) = s.split_once('=').ok_or("expected NAME=VECTOR")?;
    parse_phi(phi).map_err(|e| e.to_string())?;
    Ok((name.to_string(), phi.to_string()))
}

/// Failure classes with their exit codes.
enum Failure {
    Usage(String),
    Data(String),
}

impl Failure {
    fn data(e: impl std::fmt::Display) -> Failure {
        Failure::Data(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn width_of(w: usize) -> ValueWidth {
    ValueWidth::from_bytes(w).expect("validated by the argument parser")
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| Failure::Data(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn load_keys(path: &Path, width: ValueWidth) -> Result<Vec<CompositeKey>, Failure> {
    parse_dataset(&read_input(path)?, width).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn open_index(src: &SourceArgs) -> Result<RcasIndex, Failure> {
    match (&src.load, &src.data) {
        (Some(file), _) => {
            let bytes = fs::read(file).map_err(|e| Failure::Data(format!("{}: {e}", file.display())))?;
            trie::decode(&bytes).map_err(|e| Failure::Data(format!("{}: {e}", file.display())))
        }
        (None, Some(data)) => {
            let width = width_of(src.width);
            RcasIndex::build(&load_keys(data, width)?, src.scheme, width).map_err(Failure::data)
        }
        (None, None) => Err(Failure::Usage("either --data or --load is required".into())),
    }
}

fn emit(out: &mut impl Write, text: &str) -> Outcome {
    out.write_all(text.as_bytes()).map_err(|e| Failure::Data(format!("write failed: {e}")))
}

fn cmd_generate(a: &GenerateArgs, out: &mut impl Write) -> Outcome {
    let records = match a.example.as_deref() {
        Some(_) => bom_example(),
        None => generate(&GeneratorConfig {
            seed: a.seed,
            key_count: a.key_count,
            label_alphabet_size: a.alphabet,
            max_depth: a.max_depth,
            value_skew: a.skew,
            duplicate_fraction: a.duplicates,
            width: width_of(a.width),
        })
        .map_err(|e| Failure::Usage(e.to_string()))?,
    };
    let text = format_dataset(&records);
    match &a.output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Data(format!("{}: {e}", p.display()))),
        None => emit(out, &text),
    }
}

fn shape_report(index: &RcasIndex) -> String {
    let s = index.stats();
    let mut t = String::new();
    t.push_str(&format!("nodes: {}\n", s.node_count));
    t.push_str(&format!("inner_nodes: {}\n", s.inner_count));
    t.push_str(&format!("leaves: {}\n", s.leaf_count));
    t.push_str(&format!("keys: {}\n", s.key_count));
    t.push_str(&format!("max_depth: {}\n", s.max_depth));
    t.push_str(&format!("avg_node_depth: {:.4}\n", s.avg_node_depth));
    t.push_str(&format!("avg_leaf_depth: {:.4}\n", s.avg_leaf_depth));
    t.push_str(&format!("size_bytes: {}\n", s.size_bytes));
    t.push_str("\ndepth,nodes,leaves\n");
    for (d, n) in s.depth_histogram.iter().enumerate() {
        let leaves = s.leaf_depth_histogram.get(d).copied().unwrap_or(0);
        t.push_str(&format!("{d},{n},{leaves}\n"));
    }
    t.push_str("\nkind,dimension,count\n");
    for ((kind, dim), n) in &s.kind_counts {
        t.push_str(&format!("{kind},{},{n}\n", dim.symbol()));
    }
    t
}

fn cmd_build(a: &BuildArgs, out: &mut impl Write) -> Outcome {
    let width = width_of(a.width);
    let keys = load_keys(&a.dataset, width)?;
    let start = Instant::now();
    let index = RcasIndex::build(&keys, a.scheme, width).map_err(Failure::data)?;
    let elapsed = start.elapsed();
    let c = index.build_counters();
    let total: u64 = keys.iter().map(|k| (k.path.len() + k.value.len()) as u64).sum();
    let longest = keys.iter().map(|k| k.path.len() + k.value.len()).max().unwrap_or(0) as u64;
    let mut t = String::new();
    t.push_str(&format!("scheme: {}\n", a.scheme));
    t.push_str(&format!("build_ms: {:.3}\n", elapsed.as_secs_f64() * 1e3));
    t.push_str(&format!("byte_scans: {}\n", c.byte_scans));
    t.push_str(&format!("byte_scan_bound: {total}\n"));
    t.push_str(&format!("probe_reads: {}\n", c.probe_reads));
    t.push_str(&format!("moves: {}\n", c.moves));
    t.push_str(&format!("move_bound: {}\n", longest * keys.len() as u64));
    t.push_str(&shape_report(&index));
    if let Some(p) = &a.save {
        fs::write(p, trie::encode(&index)).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?;
        t.push_str(&format!("\nsaved: {}\n", p.display()));
    }
    emit(out, &t)
}

fn cmd_query(a: &QueryArgs, out: &mut impl Write) -> Outcome {
    let q = parse_query_path(&a.path).map_err(|e| Failure::Usage(format!("bad path predicate: {e}")))?;
    if a.low > a.high {
        return Err(Failure::Usage(format!("low bound {} exceeds high bound {}", a.low, a.high)));
    }
    let index = open_index(&a.source)?;
    let range = ValueRange::from_u64(a.low, a.high, index.width()).map_err(Failure::data)?;
    let start = Instant::now();
    let result = cas_query(&index, &q, &range).map_err(Failure::data)?;
    let elapsed = start.elapsed();
    let mut t = String::new();
    for r in result.sorted_refs() {
        t.push_str(&format!("{r:016x}\n"));
    }
    t.push_str(&format!("# results: {}\n", result.refs.len()));
    t.push_str(&format!("# visited: {}\n", result.visited));
    t.push_str(&format!("# time_us: {:.3}\n", elapsed.as_secs_f64() * 1e6));
    emit(out, &t)
}

fn cmd_stats(a: &SourceArgs, out: &mut impl Write) -> Outcome {
    let index = open_index(a)?;
    emit(out, &format!("scheme: {}\n{}", index.scheme(), shape_report(&index)))
}

fn cmd_bench(a: &BenchArgs, out: &mut impl Write) -> Outcome {
    let width = width_of(a.width);
    let keys = load_keys(&a.dataset, width)?;
    let queries =
        parse_queries(&read_input(&a.queries)?).map_err(|e| Failure::Data(format!("{}: {e}", a.queries.display())))?;
    let schemes = if a.schemes.is_empty() { Scheme::ALL.to_vec() } else { a.schemes.clone() };
    let report = run_bench(&keys, &queries, &schemes, a.repeat, width).map_err(Failure::data)?;
    emit(out, &report.to_csv())
}

fn cmd_costmodel(a: &CostArgs, out: &mut impl Write) -> Outcome {
    if let (Some(data), Some(queries)) = (&a.dataset, &a.queries) {
        return calibration_report(data, queries, width_of(a.width), !a.exclude_root, out);
    }
    let sel = LevelSelectivities { path: a.sigma_p, value: a.sigma_v };
    let h = a.h;
    let mut rows: Vec<(String, Vec<Dimension>)> = vec![
        ("DY".into(), alternating(h)),
        ("PV".into(), [vec![Dimension::Path; h / 2], vec![Dimension::Value; h - h / 2]].concat()),
        ("VP".into(), [vec![Dimension::Value; h - h / 2], vec![Dimension::Path; h / 2]].concat()),
    ];
    for (name, phi) in &a.phis {
        rows.push((name.clone(), parse_phi(phi).map_err(|e| Failure::Usage(e.to_string()))?));
    }
    let mut t = String::from("interleaving,phi,cost,cost_complementary,avg,stddev\n");
    for (name, phi) in rows {
        let p = CostModelParams::new(a.o, phi, sel).map_err(|e| Failure::Usage(e.to_string()))?;
        let r = robustness(&p, !a.exclude_root);
        t.push_str(&format!(
            "{name},{},{:.2},{:.2},{:.2},{:.2}\n",
            phi_label(&p.phi),
            r.cost,
            r.complementary_cost,
            r.avg,
            r.stddev
        ));
    }
    emit(out, &t)
}

/// Per query: calibrated estimate, visited nodes on the dynamic index, and
/// their error factor.
fn calibration_report(
    data: &Path,
    queries: &Path,
    width: ValueWidth,
    include_root: bool,
    out: &mut impl Write,
) -> Outcome {
    let keys = load_keys(data, width)?;
    let specs =
        parse_queries(&read_input(queries)?).map_err(|e| Failure::Data(format!("{}: {e}", queries.display())))?;
    let index = RcasIndex::build(&keys, Scheme::Rcas, width).map_err(Failure::data)?;
    let s = index.stats();
    let stats = DatasetStats { unique_keys: s.leaf_count as u64, avg_node_depth: s.avg_node_depth };
    let mut t = String::from("query,sigma_p,sigma_v,h,o,varsigma_p,varsigma_v,estimate,visited,error_factor\n");
    for (i, spec) in specs.iter().enumerate() {
        let (q, r) = spec.compile(width).map_err(Failure::Data)?;
        let sel = rcas::bench::selectivity(&keys, &q.truncate_at_first_branch(), &r);
        let visited = cas_query(&index, &q, &r).map_err(Failure::data)?.visited as f64;
        match calibrate(stats, sel.path, sel.value) {
            Ok(p) => {
                let est = estimate_cost(&p, include_root);
                let e = error_factor(est, visited).map_err(Failure::data)?;
                t.push_str(&format!(
                    "{i},{:.6},{:.6},{},{:.4},{:.4},{:.4},{est:.2},{visited},{e:.4}\n",
                    sel.path, sel.value, p.h, p.o, p.sel.path, p.sel.value
                ));
            }
            Err(e) => t.push_str(&format!("{i},{:.6},{:.6},,,,,,{visited},# {e}\n", sel.path, sel.value)),
        }
    }
    emit(out, &t)
}

fn run(cli: &Cli, out: &mut impl Write) -> Outcome {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a, out),
        Command::Build(a) => cmd_build(a, out),
        Command::Query(a) => cmd_query(a, out),
        Command::Stats(a) => cmd_stats(a, out),
        Command::Bench(a) => cmd_bench(a, out),
        Command::Costmodel(a) => cmd_costmodel(a, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(&cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
