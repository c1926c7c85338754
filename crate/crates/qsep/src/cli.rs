//! Command-line front end.
//!
//! Subcommands: `classify`, `factorize`, `verify`, `gen`, `bench`. Input
//! states come from a file (text or structured JSON) or from a registered
//! generator via `--gen KIND`. Reports render as text or as a stable JSON
//! document whose verdict fields are byte-identical across runs; timing
//! lives in its own trailing field outside that guarantee.
//!
//! Exit codes: 0 success, 1 usage error, 2 unparseable input, 3 input
//! violating a state invariant, 4 verification disagreement.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bsm::qubit_one_masks;
use crate::oracle::{dense_vector, oracle_classify, schmidt_rank, schmidt_rank_f64};
use crate::separability::{
    classify_with, factorize_fully, split_at, ClassificationReport, ClassifyOptions, FactorTree,
    FastPath, SplitWitness,
};
use crate::state::{parse_state, serialize_state, state_to_json, PureState, QubitSubset, StateError, TermDoc};
use crate::zoo::{self, GenParams, GeneratorSpec};

const FLOAT_RANK_TOLERANCE: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "qsep",
    version,
    about = "Exact separability testing and entanglement classification for sparse qubit states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Report format (and state format for `gen`).
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads for the bipartition scan.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Seed for seeded generators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    #[value(name = "json-like", alias = "json")]
    JsonLike,
}

#[derive(Args, Clone, Default)]
struct InputArgs {
    /// State file; omit when generating with --gen.
    file: Option<PathBuf>,
    /// Generate the input state instead of reading a file.
    #[arg(long, value_name = "KIND")]
    gen: Option<String>,
    /// Qubit count for generators that take one.
    #[arg(long)]
    n: Option<u8>,
    /// Excitation count (dicke).
    #[arg(long)]
    k: Option<u32>,
    /// Term count (random_sparse).
    #[arg(long)]
    m: Option<usize>,
    /// Comma-separated block sizes (random_product).
    #[arg(long, value_delimiter = ',')]
    blocks: Option<Vec<u8>>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a state into one of the four families.
    Classify(InputArgs),
    /// Factor a state completely into unsplittable tensor factors.
    Factorize(InputArgs),
    /// Cross-check the classifier against the dense Schmidt-rank oracle.
    Verify {
        #[command(flatten)]
        input: InputArgs,
        /// Largest register the dense oracle will expand (at most 14).
        #[arg(long, default_value_t = 12)]
        max_n: u8,
        /// Verify this many consecutive seeds (generator input only).
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// Use the approximate floating-point rank for the per-cut check
        /// (speed comparison only; the exact path is the reference).
        #[arg(long)]
        float_rank: bool,
    },
    /// Write a generated state to a file or stdout.
    Gen {
        /// Generator kind; see `gen list`.
        kind: String,
        #[arg(long)]
        n: Option<u8>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        blocks: Option<Vec<u8>>,
        /// Output path; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Time classification over generated states for a range of n.
    Bench {
        /// Inclusive qubit range, e.g. 4..10.
        #[arg(long, default_value = "4..8", value_parser = parse_range)]
        n_range: (u8, u8),
    },
}

fn parse_range(text: &str) -> Result<(u8, u8), String> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| format!("`{text}` is not a range A..B"))?;
    let a: u8 = a.trim().parse().map_err(|_| format!("bad range start `{a}`"))?;
    let b: u8 = b.trim().parse().map_err(|_| format!("bad range end `{b}`"))?;
    if a == 0 || b < a {
        return Err(format!("`{text}` is not an increasing 1-based range"));
    }
    Ok((a, b))
}

#[derive(Debug)]
enum CliFailure {
    Usage(String),
    Parse(String),
    Invariant(String),
}

impl CliFailure {
    fn exit_code(&self) -> i32 {
        match self {
            CliFailure::Usage(_) => 1,
            CliFailure::Parse(_) => 2,
            CliFailure::Invariant(_) => 3,
        }
    }
}

impl fmt::Display for CliFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliFailure::Usage(msg) | CliFailure::Parse(msg) | CliFailure::Invariant(msg) => {
                write!(f, "{msg}")
            }
        }
    }
}

impl From<StateError> for CliFailure {
    fn from(e: StateError) -> Self {
        if e.is_syntactic() {
            CliFailure::Parse(e.to_string())
        } else {
            CliFailure::Invariant(e.to_string())
        }
    }
}

impl From<zoo::ZooError> for CliFailure {
    fn from(e: zoo::ZooError) -> Self {
        CliFailure::Usage(e.to_string())
    }
}

/// Parses `args` and runs one command, writing reports to `out` and
/// errors to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version surface as non-error "failures".
            return if e.use_stderr() {
                let _ = writeln!(err, "{e}");
                1
            } else {
                let _ = writeln!(out, "{e}");
                0
            };
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "error: {failure}");
            failure.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliFailure> {
    let options = ClassifyOptions {
        workers: cli.workers.max(1),
        ..Default::default()
    };
    match &cli.command {
        Command::Classify(input) => {
            let (state, source) = load_input(input, cli.seed)?;
            let started = Instant::now();
            let report = classify_with(&state, &options);
            let timing_ms = elapsed_ms(started);
            render_classify(cli.format, &source, &state, &report, timing_ms, out);
            Ok(0)
        }
        Command::Factorize(input) => {
            let (state, source) = load_input(input, cli.seed)?;
            let started = Instant::now();
            let tree = factorize_fully(&state);
            let timing_ms = elapsed_ms(started);
            render_factorize(cli.format, &source, &state, &tree, timing_ms, out);
            Ok(0)
        }
        Command::Verify {
            input,
            max_n,
            count,
            float_rank,
        } => run_verify(cli, input, *max_n, *count, *float_rank, &options, out),
        Command::Gen {
            kind,
            n,
            k,
            m,
            blocks,
            output,
        } => {
            let spec = GeneratorSpec {
                kind: kind.clone(),
                params: GenParams {
                    n: *n,
                    k: *k,
                    m: *m,
                    blocks: blocks.clone(),
                    seed: cli.seed,
                },
            };
            let state = zoo::generate(&spec)?;
            let rendered = match cli.format {
                Format::Text => serialize_state(&state),
                Format::JsonLike => state_to_json(&state),
            };
            match output {
                Some(path) => std::fs::write(path, rendered)
                    .map_err(|e| CliFailure::Usage(format!("cannot write {}: {e}", path.display())))?,
                None => {
                    let _ = write!(out, "{rendered}");
                }
            }
            Ok(0)
        }
        Command::Bench { n_range } => {
            run_bench(cli, *n_range, &options, out);
            Ok(0)
        }
    }
}

fn load_input(input: &InputArgs, seed: u64) -> Result<(PureState, String), CliFailure> {
    match (&input.file, &input.gen) {
        (Some(_), Some(_)) => Err(CliFailure::Usage(
            "provide either a FILE or --gen KIND, not both".into(),
        )),
        (None, None) => Err(CliFailure::Usage(
            "no input: provide a FILE or --gen KIND".into(),
        )),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliFailure::Parse(format!("cannot read {}: {e}", path.display())))?;
            Ok((parse_state(&text)?, path.display().to_string()))
        }
        (None, Some(kind)) => {
            let spec = GeneratorSpec {
                kind: kind.clone(),
                params: GenParams {
                    n: input.n,
                    k: input.k,
                    m: input.m,
                    blocks: input.blocks.clone(),
                    seed,
                },
            };
            Ok((zoo::generate(&spec)?, format!("gen:{kind} seed={seed}")))
        }
    }
}

fn elapsed_ms(started: Instant) -> f64 {
    started.elapsed().as_secs_f64() * 1e3
}

// ---------------------------------------------------------------------------
// Report documents
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct WitnessDoc {
    subset: Vec<u8>,
    left_terms: Vec<TermDoc>,
    right_terms: Vec<TermDoc>,
}

impl WitnessDoc {
    fn new(witness: &SplitWitness) -> WitnessDoc {
        WitnessDoc {
            subset: witness.subset.qubits().collect(),
            left_terms: term_docs(&witness.left_factor),
            right_terms: term_docs(&witness.right_factor),
        }
    }
}

fn term_docs(state: &PureState) -> Vec<TermDoc> {
    state
        .terms()
        .iter()
        .map(|(label, coeff)| TermDoc::from_term(label, coeff))
        .collect()
}

#[derive(Serialize)]
struct SearchDoc {
    subsets_examined: u64,
    canonical_forms: u64,
    rank1_hits: u64,
}

#[derive(Serialize)]
struct ClassifyDoc {
    n: u8,
    m: usize,
    family: u8,
    separable: bool,
    fast_path: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessDoc>,
    search: SearchDoc,
    timing_ms: f64,
}

fn render_classify(
    format: Format,
    source: &str,
    state: &PureState,
    report: &ClassificationReport,
    timing_ms: f64,
    out: &mut dyn Write,
) {
    match format {
        Format::JsonLike => {
            let doc = ClassifyDoc {
                n: state.qubit_count(),
                m: state.term_count(),
                family: report.family.index(),
                separable: report.family.is_separable(),
                fast_path: report.fast_path.to_string(),
                witness: report.witness.as_ref().map(WitnessDoc::new),
                search: SearchDoc {
                    subsets_examined: report.search.subsets_examined,
                    canonical_forms: report.search.canonical_forms,
                    rank1_hits: report.search.rank1_hits,
                },
                timing_ms,
            };
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("doc"));
        }
        Format::Text => {
            let _ = writeln!(
                out,
                "input: {source} (n={}, m={})",
                state.qubit_count(),
                state.term_count()
            );
            let _ = writeln!(out, "family: {} — {}", report.family, report.family.description());
            let _ = writeln!(out, "separable: {}", report.family.is_separable());
            let _ = writeln!(out, "fast path: {}", report.fast_path);
            if let Some(witness) = &report.witness {
                let _ = writeln!(out, "witness:");
                let _ = writeln!(out, "  subset {}", witness.subset);
                let _ = writeln!(out, "  left  = {}", witness.left_factor);
                let _ = writeln!(out, "  right = {}", witness.right_factor);
            }
            if report.fast_path == FastPath::PrimeM {
                let _ = writeln!(out, "search: skipped (prime term count)");
            } else {
                let _ = writeln!(
                    out,
                    "search: {} subsets examined, {} canonical forms, {} rank-1 hits",
                    report.search.subsets_examined,
                    report.search.canonical_forms,
                    report.search.rank1_hits
                );
            }
            let _ = writeln!(out, "timing: {timing_ms:.3} ms");
        }
    }
}

#[derive(Serialize)]
struct FactorDoc {
    qubits: Vec<u8>,
    terms: Vec<TermDoc>,
}

#[derive(Serialize)]
struct FactorizeDoc {
    n: u8,
    m: usize,
    factors: Vec<FactorDoc>,
    timing_ms: f64,
}

fn render_factorize(
    format: Format,
    source: &str,
    state: &PureState,
    tree: &FactorTree,
    timing_ms: f64,
    out: &mut dyn Write,
) {
    match format {
        Format::JsonLike => {
            let doc = FactorizeDoc {
                n: state.qubit_count(),
                m: state.term_count(),
                factors: tree
                    .factors
                    .iter()
                    .map(|(subset, factor)| FactorDoc {
                        qubits: subset.qubits().collect(),
                        terms: term_docs(factor),
                    })
                    .collect(),
                timing_ms,
            };
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("doc"));
        }
        Format::Text => {
            let _ = writeln!(
                out,
                "input: {source} (n={}, m={})",
                state.qubit_count(),
                state.term_count()
            );
            let _ = writeln!(out, "factors: {}", tree.factors.len());
            for (subset, factor) in &tree.factors {
                let _ = writeln!(out, "  {subset}: {factor}");
            }
            let _ = writeln!(out, "timing: {timing_ms:.3} ms");
        }
    }
}

// ---------------------------------------------------------------------------
// Verify
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct VerifyStateDoc {
    source: String,
    n: u8,
    m: usize,
    primary_family: u8,
    oracle_family: u8,
    family_agree: bool,
    cuts_total: u64,
    cuts_agree: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    disagreeing_cuts: Vec<Vec<u8>>,
}

#[derive(Serialize)]
struct VerifyDoc {
    states: Vec<VerifyStateDoc>,
    agree: u64,
    total: u64,
    timing_ms: f64,
}

fn run_verify(
    cli: &Cli,
    input: &InputArgs,
    max_n: u8,
    count: u64,
    float_rank: bool,
    options: &ClassifyOptions,
    out: &mut dyn Write,
) -> Result<i32, CliFailure> {
    if max_n == 0 || max_n > 14 {
        return Err(CliFailure::Usage("--max-n must be within 1..=14".into()));
    }
    if count == 0 {
        return Err(CliFailure::Usage("--count must be at least 1".into()));
    }
    if count > 1 && input.gen.is_none() {
        return Err(CliFailure::Usage("--count needs a --gen input".into()));
    }
    let started = Instant::now();
    let mut docs = Vec::new();
    let mut agree = 0u64;
    for i in 0..count {
        let (state, source) = load_input(input, cli.seed + i)?;
        let n = state.qubit_count();
        if n > max_n {
            return Err(CliFailure::Invariant(format!(
                "state has {n} qubits, above the verification bound {max_n}"
            )));
        }
        let primary = classify_with(&state, options);
        let dense = dense_vector(&state).expect("n is within the dense cap");
        let oracle_family = oracle_classify(&dense);
        let family_agree = primary.family == oracle_family;

        let mut cuts_total = 0u64;
        let mut cuts_agree = 0u64;
        let mut disagreeing = Vec::new();
        for mask in qubit_one_masks(n) {
            cuts_total += 1;
            let cut = QubitSubset::from_mask(mask, n).expect("mask fits");
            let splits = split_at(&state, cut)
                .expect("cut is proper")
                .is_some();
            let rank_one = if float_rank {
                schmidt_rank_f64(&dense, cut, FLOAT_RANK_TOLERANCE).expect("cut is proper") == 1
            } else {
                schmidt_rank(&dense, cut).expect("cut is proper") == 1
            };
            if splits == rank_one {
                cuts_agree += 1;
            } else {
                disagreeing.push(cut.qubits().collect());
            }
        }
        let all_agree = family_agree && cuts_agree == cuts_total;
        if all_agree {
            agree += 1;
        }
        docs.push(VerifyStateDoc {
            source,
            n,
            m: state.term_count(),
            primary_family: primary.family.index(),
            oracle_family: oracle_family.index(),
            family_agree,
            cuts_total,
            cuts_agree,
            disagreeing_cuts: disagreeing,
        });
    }
    let timing_ms = elapsed_ms(started);
    let total = count;
    match cli.format {
        Format::JsonLike => {
            let doc = VerifyDoc {
                states: docs,
                agree,
                total,
                timing_ms,
            };
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("doc"));
        }
        Format::Text => {
            for doc in &docs {
                let family_mark = if doc.family_agree { "ok" } else { "MISMATCH" };
                let _ = writeln!(
                    out,
                    "{}: n={} m={} family primary={} oracle={} [{}], cuts {}/{}{}",
                    doc.source,
                    doc.n,
                    doc.m,
                    doc.primary_family,
                    doc.oracle_family,
                    family_mark,
                    doc.cuts_agree,
                    doc.cuts_total,
                    if doc.disagreeing_cuts.is_empty() {
                        String::new()
                    } else {
                        format!(" disagreeing cuts: {:?}", doc.disagreeing_cuts)
                    }
                );
            }
            let _ = writeln!(out, "agree: {agree}/{total}");
            let _ = writeln!(out, "timing: {timing_ms:.3} ms");
        }
    }
    Ok(if agree == total { 0 } else { 4 })
}

// ---------------------------------------------------------------------------
// Bench
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct BenchRow {
    kind: String,
    n: u8,
    m: usize,
    family: u8,
    classify_ms: f64,
}

fn run_bench(cli: &Cli, (lo, hi): (u8, u8), options: &ClassifyOptions, out: &mut dyn Write) {
    let mut rows = Vec::new();
    for n in lo..=hi {
        let mut states: Vec<(String, PureState)> = Vec::new();
        if let Ok(s) = zoo::ghz(n) {
            states.push(("ghz".into(), s));
        }
        if let Ok(s) = zoo::w(n) {
            states.push(("w".into(), s));
        }
        if n >= 3 {
            if let Ok(s) = zoo::dicke(n, 2) {
                states.push(("dicke(k=2)".into(), s));
            }
        }
        let m = (1usize << (n.saturating_sub(1)).min(4)).min(12);
        if let Ok(s) = zoo::random_sparse(n, m, cli.seed) {
            states.push((format!("random_sparse(m={m})"), s));
        }
        for (kind, state) in states {
            let started = Instant::now();
            let report = classify_with(&state, options);
            rows.push(BenchRow {
                kind,
                n,
                m: state.term_count(),
                family: report.family.index(),
                classify_ms: elapsed_ms(started),
            });
        }
    }
    match cli.format {
        Format::JsonLike => {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&rows).expect("rows"));
        }
        Format::Text => {
            let _ = writeln!(out, "{:<22} {:>3} {:>7} {:>7} {:>12}", "kind", "n", "m", "family", "classify_ms");
            for row in rows {
                let _ = writeln!(
                    out,
                    "{:<22} {:>3} {:>7} {:>7} {:>12.3}",
                    row.kind, row.n, row.m, row.family, row.classify_ms
                );
            }
        }
    }
}
