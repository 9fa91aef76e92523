//! Command line surface for the charvar library.
//!
//! Exit codes: 0 on success, 1 on domain errors (reported on stderr), 2 on
//! parse errors (bad words, malformed files, invalid flags).  Seeded
//! commands print the seed actually used so runs can be reproduced.

use charvar::error::Error;
use charvar::graph::{self, EdgeId, Graph, GraphFile, Metric};
use charvar::moment;
use charvar::spin::{self, FaceSpec};
use charvar::tensor::{self, RepFile, Representation};
use charvar::valuation::{self, ValuationPoint};
use charvar::words;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "charvar",
    version,
    about = "SL2 character varieties over marked graphs: lengths, spin semigroups, trace tensors, valuations, moment geometry"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads for batch items; output stays in input order.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Graph structure: validation, spanning trees, spanned-graph catalogue.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Metric lengths of words under the marking.
    Length(WordArgs),
    /// Edge multiplicities of the reduced loop of each word.
    Weights(WordArgs),
    /// Spin semigroup membership, Hilbert basis, decompositions.
    #[command(subcommand)]
    Spin(SpinCmd),
    /// Lattice points and faces of the compactification polytope.
    #[command(subcommand)]
    Polytope(PolytopeCmd),
    /// Trace-word functions of representations.
    #[command(subcommand)]
    Trace(TraceCmd),
    /// Graph tensor evaluation of representations.
    #[command(subcommand)]
    Tensor(TensorCmd),
    /// Tropical embeddings by the length valuation.
    #[command(subcommand)]
    Trop(TropCmd),
    /// Newton-Okounkov lex valuation of words in a fixed edge order.
    Nok(NokArgs),
    /// Moment geometry: descent to momentum zero, exact assignments, the
    /// torus flow, and the momentum image.
    #[command(subcommand)]
    Moment(MomentCmd),
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Validate a graph file; admissibility violations exit 1.
    Check { graph: PathBuf },
    /// List spanning trees.
    Trees { graph: PathBuf },
    /// Enumerate spanned graphs of the given genus up to equivalence.
    Spanned {
        #[arg(long)]
        genus: usize,
    },
}

#[derive(Args)]
struct WordArgs {
    graph: PathBuf,
    /// Word in generator indices, e.g. "1 -2 1"; repeatable.
    #[arg(long = "word", required = true)]
    words: Vec<String>,
}

#[derive(Subcommand)]
enum SpinCmd {
    /// Hilbert basis of the spin weighting semigroup.
    Basis { graph: PathBuf },
    /// Membership of a weighting, e.g. --weights "p=1,q=1,r=0".
    Member {
        graph: PathBuf,
        #[arg(long)]
        weights: String,
    },
    /// Decompose a member over the Hilbert basis.
    Decompose {
        graph: PathBuf,
        #[arg(long)]
        weights: String,
    },
}

#[derive(Subcommand)]
enum PolytopeCmd {
    /// Count lattice points of the m-th dilation.
    Count {
        graph: PathBuf,
        #[arg(long, default_value_t = 1)]
        level: usize,
    },
    /// Dimension and codimension of the face pinned to 1 on given edges.
    Face {
        graph: PathBuf,
        /// Comma-separated edge ids; empty for the whole polytope.
        #[arg(long, default_value = "")]
        ones: String,
    },
}

#[derive(Args)]
struct RepInput {
    /// Representation file (JSON); conflicts with --seed.
    #[arg(long, conflicts_with = "seed")]
    rep: Option<PathBuf>,
    /// Seed for a random representation; CHARVAR_SEED is the fallback.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EvalArgs {
    graph: PathBuf,
    /// Word in generator indices; repeatable.
    #[arg(long = "word", required = true)]
    words: Vec<String>,
    #[command(flatten)]
    rep: RepInput,
}

#[derive(Subcommand)]
enum TraceCmd {
    /// tr(word) under the marking.
    Eval(EvalArgs),
}

#[derive(Subcommand)]
enum TensorCmd {
    /// Contract the word's graph tensor against the representation.
    Eval(EvalArgs),
}

#[derive(Subcommand)]
enum TropCmd {
    /// Length-valuation coordinates over the small trace-word basis.
    Embed { graph: PathBuf },
    /// Compare the embeddings of two marked metric graphs.
    Distinguish { left: PathBuf, right: PathBuf },
}

#[derive(Args)]
struct NokArgs {
    graph: PathBuf,
    #[arg(long = "word", required = true)]
    words: Vec<String>,
    /// Comma-separated edge order; defaults to sorted edge ids.
    #[arg(long)]
    order: Option<String>,
}

#[derive(Subcommand)]
enum MomentCmd {
    /// Gradient descent to the momentum-zero locus.
    Solve {
        graph: PathBuf,
        #[command(flatten)]
        rep: RepInput,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long = "max-iters", default_value_t = 10_000)]
        max_iters: usize,
        /// With N > 1, run seeds seed..seed+N and report each outcome.
        #[arg(long, default_value_t = 1)]
        samples: usize,
    },
    /// Exact momentum-zero representation with all edge lengths positive.
    Assign {
        graph: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Integrable torus flow, e.g. --angles "p=0.5,q=-1.2".
    Flow {
        graph: PathBuf,
        #[command(flatten)]
        rep: RepInput,
        #[arg(long)]
        angles: String,
        #[arg(long = "min-length", default_value_t = 1e-9)]
        min_length: f64,
    },
    /// Edge lengths of a momentum-zero representation.
    Image {
        graph: PathBuf,
        #[command(flatten)]
        rep: RepInput,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

// ---------------------------------------------------------------------------
// Error plumbing.

enum CliError {
    Lib(Error),
    Domain(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Domain(m) => write!(f, "{m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(
                Error::Parse(_) | Error::Json(_) | Error::Io(_) | Error::InvalidWord(_),
            ) => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn domain(msg: impl Into<String>) -> CliError {
    CliError::Domain(msg.into())
}

// ---------------------------------------------------------------------------
// Output.

/// Floats carry 12 significant digits, trailing zeros trimmed.
fn fmt_f(x: f64) -> String {
    if x == 0.0 {
        return "0.0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-9..12).contains(&mag) {
        let s = format!("{x:.11e}");
        let (mant, exp) = s.split_once('e').expect("exponent form");
        let mut mant = mant.to_string();
        while mant.ends_with('0') {
            mant.pop();
        }
        if mant.ends_with('.') {
            mant.push('0');
        }
        return format!("{mant}e{exp}");
    }
    let decimals = (11 - mag).clamp(0, 17) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.push('0');
        }
    } else {
        s.push_str(".0");
    }
    s
}

/// Writes a finished report to stdout; a closed pipe downstream is not an
/// error, the process just stops.
fn emit(text: &str) {
    use std::io::Write;
    let out = std::io::stdout();
    let mut lock = out.lock();
    if lock.write_all(text.as_bytes()).is_err() || lock.flush().is_err() {
        std::process::exit(0);
    }
}

struct Table {
    meta: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Table {
            meta: Vec::new(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn meta(&mut self, key: &str, value: impl Display) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    fn print(&self, format: Format) {
        let mut text = String::new();
        match format {
            Format::Csv => {
                for (k, v) in &self.meta {
                    text.push_str(&format!("# {k} {v}\n"));
                }
                text.push_str(&self.columns.join(","));
                text.push('\n');
                for row in &self.rows {
                    text.push_str(&row.join(","));
                    text.push('\n');
                }
            }
            Format::Json => {
                let mut obj = serde_json::Map::new();
                for (k, v) in &self.meta {
                    obj.insert(k.clone(), serde_json::Value::String(v.clone()));
                }
                obj.insert("columns".to_string(), serde_json::json!(self.columns));
                obj.insert("rows".to_string(), serde_json::json!(self.rows));
                text = serde_json::to_string_pretty(&serde_json::Value::Object(obj))
                    .expect("table serialization cannot fail");
                text.push('\n');
            }
        }
        emit(&text);
    }
}

/// Representations print as one row of matrix entries per edge in CSV, and
/// as a rep-file compatible object (plus bookkeeping fields) in JSON.
fn print_rep(rep: &Representation, meta: &[(String, String)], format: Format) {
    match format {
        Format::Csv => {
            let mut t = Table::new(&[
                "edge", "a_re", "a_im", "b_re", "b_im", "c_re", "c_im", "d_re", "d_im",
            ]);
            for (k, v) in meta {
                t.meta(k, v);
            }
            for (id, m) in rep {
                t.row(vec![
                    id.clone(),
                    fmt_f(m.a.re),
                    fmt_f(m.a.im),
                    fmt_f(m.b.re),
                    fmt_f(m.b.im),
                    fmt_f(m.c.re),
                    fmt_f(m.c.im),
                    fmt_f(m.d.re),
                    fmt_f(m.d.im),
                ]);
            }
            t.print(Format::Csv);
        }
        Format::Json => {
            let file = RepFile::from_representation(rep);
            let mut value = serde_json::to_value(&file).expect("rep serialization cannot fail");
            let obj = value.as_object_mut().expect("rep file is an object");
            for (k, v) in meta {
                obj.insert(k.clone(), serde_json::Value::String(v.clone()));
            }
            let mut text =
                serde_json::to_string_pretty(&value).expect("rep serialization cannot fail");
            text.push('\n');
            emit(&text);
        }
    }
}

// ---------------------------------------------------------------------------
// Shared input handling.

fn load_graph_file(path: &Path) -> CliResult<GraphFile> {
    let text = std::fs::read_to_string(path).map_err(Error::from)?;
    Ok(GraphFile::from_json(&text)?)
}

fn unit_metric(g: &Graph) -> Metric<f64> {
    g.edges.iter().map(|e| (e.id.clone(), 1.0)).collect()
}

fn metric_or_unit(gf: &GraphFile) -> CliResult<Metric<f64>> {
    let g = gf.graph();
    let metric = gf.metric.clone().unwrap_or_else(|| unit_metric(&g));
    graph::validate_metric(&g, &metric)?;
    Ok(metric)
}

fn resolve_seed(flag: Option<u64>) -> CliResult<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("CHARVAR_SEED") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| CliError::Lib(Error::Parse(format!("bad CHARVAR_SEED `{text}`")))),
        Err(_) => Ok(0),
    }
}

fn load_rep(path: &Path, g: &Graph) -> CliResult<Representation> {
    let text = std::fs::read_to_string(path).map_err(Error::from)?;
    let rep = RepFile::from_json(&text)?.representation();
    for e in &g.edges {
        if !rep.contains_key(&e.id) {
            return Err(domain(format!("representation file misses edge `{}`", e.id)));
        }
    }
    Ok(rep)
}

/// Either a representation file or a seeded random one; reports the seed
/// actually used so the run can be reproduced.
fn rep_or_seed(input: &RepInput, g: &Graph) -> CliResult<(Representation, Option<u64>)> {
    match &input.rep {
        Some(path) => Ok((load_rep(path, g)?, None)),
        None => {
            let seed = resolve_seed(input.seed)?;
            Ok((tensor::random_rep(g, seed), Some(seed)))
        }
    }
}

/// Like `rep_or_seed` but seeded inputs come from the exact momentum-zero
/// construction, which is what the moment commands expect.
fn momentum_rep_or_seed(input: &RepInput, g: &Graph) -> CliResult<(Representation, Option<u64>)> {
    match &input.rep {
        Some(path) => Ok((load_rep(path, g)?, None)),
        None => {
            let seed = resolve_seed(input.seed)?;
            let kv = moment::leafless_assignment(g, seed)?;
            Ok((moment::assignment_rep(&kv), Some(seed)))
        }
    }
}

fn parse_words(texts: &[String]) -> CliResult<Vec<Vec<i32>>> {
    texts
        .iter()
        .map(|t| words::parse_word(t).map_err(CliError::from))
        .collect()
}

fn parse_real_map(text: &str, g: &Graph) -> CliResult<BTreeMap<EdgeId, f64>> {
    let mut out = BTreeMap::new();
    for piece in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (id, value) = piece
            .split_once('=')
            .ok_or_else(|| CliError::Lib(Error::Parse(format!("expected edge=value in `{piece}`"))))?;
        let id = id.trim();
        g.edge(id)?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Lib(Error::Parse(format!("bad number in `{piece}`"))))?;
        out.insert(id.to_string(), value);
    }
    Ok(out)
}

fn sorted_edge_ids(g: &Graph) -> Vec<EdgeId> {
    let mut ids: Vec<EdgeId> = g.edges.iter().map(|e| e.id.clone()).collect();
    ids.sort();
    ids
}

/// Runs the per-item closure over a batch, in parallel when --jobs asks for
/// it; results keep the input order either way.
fn batch<T: Send, I: Sync>(
    jobs: usize,
    items: &[I],
    f: impl Fn(&I) -> CliResult<T> + Sync + Send,
) -> CliResult<Vec<T>> {
    if jobs <= 1 {
        items.iter().map(f).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| domain(format!("thread pool: {e}")))?;
        pool.install(|| items.par_iter().map(f).collect())
    }
}

// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs == 0 {
        eprintln!("error: --jobs must be positive");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let format = cli.format;
    let jobs = cli.jobs;
    match cli.command {
        Cmd::Graph(cmd) => run_graph(cmd, format),
        Cmd::Length(args) => run_length(args, format, jobs),
        Cmd::Weights(args) => run_weights(args, format, jobs),
        Cmd::Spin(cmd) => run_spin(cmd, format),
        Cmd::Polytope(cmd) => run_polytope(cmd, format),
        Cmd::Trace(TraceCmd::Eval(args)) => run_eval(args, format, jobs, EvalKind::Trace),
        Cmd::Tensor(TensorCmd::Eval(args)) => run_eval(args, format, jobs, EvalKind::Tensor),
        Cmd::Trop(cmd) => run_trop(cmd, format),
        Cmd::Nok(args) => run_nok(args, format, jobs),
        Cmd::Moment(cmd) => run_moment(cmd, format, jobs),
    }
}

fn run_graph(cmd: GraphCmd, format: Format) -> CliResult<()> {
    match cmd {
        GraphCmd::Check { graph: path } => {
            let gf = load_graph_file(&path)?;
            let g = gf.graph();
            let mut violations = graph::validate(&g);
            violations.extend(graph::admissibility_violations(&g));
            if gf.spanning_tree.is_some() || gf.generator_order.is_some() || gf.basepoint.is_some()
            {
                gf.marking()?;
            }
            if let Some(metric) = &gf.metric {
                graph::validate_metric(&g, metric)?;
            }
            if violations.is_empty() {
                let mut t = Table::new(&["status"]);
                t.row(vec!["ok".to_string()]);
                t.print(format);
                Ok(())
            } else {
                for v in &violations {
                    eprintln!("violation: {v}");
                }
                Err(domain(format!("{} admissibility violation(s)", violations.len())))
            }
        }
        GraphCmd::Trees { graph: path } => {
            let g = load_graph_file(&path)?.graph();
            let mut t = Table::new(&["index", "edges"]);
            for (i, tree) in graph::spanning_trees(&g).iter().enumerate() {
                t.row(vec![
                    i.to_string(),
                    tree.iter().cloned().collect::<Vec<_>>().join(";"),
                ]);
            }
            t.print(format);
            Ok(())
        }
        GraphCmd::Spanned { genus } => {
            if genus == 0 || genus > 3 {
                return Err(domain("supported genus range is 1..=3"));
            }
            let mut t = Table::new(&[
                "index",
                "vertices",
                "edges",
                "tree",
                "generators",
                "basepoint",
            ]);
            for (i, m) in graph::enumerate_spanned_graphs(genus).iter().enumerate() {
                t.row(vec![
                    i.to_string(),
                    m.graph.vertices.join(";"),
                    m.graph
                        .edges
                        .iter()
                        .map(|e| format!("{}:{}>{}", e.id, e.src, e.dst))
                        .collect::<Vec<_>>()
                        .join(";"),
                    m.tree.iter().cloned().collect::<Vec<_>>().join(";"),
                    m.generators.join(";"),
                    m.basepoint.clone(),
                ]);
            }
            t.print(format);
            Ok(())
        }
    }
}

fn run_length(args: WordArgs, format: Format, jobs: usize) -> CliResult<()> {
    let gf = load_graph_file(&args.graph)?;
    let marking = gf.marking()?;
    let metric = metric_or_unit(&gf)?;
    let parsed = parse_words(&args.words)?;
    let values = batch(jobs, &parsed, |w| {
        Ok(words::length::<f64>(w, &marking, &metric)?)
    })?;
    let mut t = Table::new(&["word", "length"]);
    for (text, value) in args.words.iter().zip(values) {
        t.row(vec![text.clone(), fmt_f(value)]);
    }
    t.print(format);
    Ok(())
}

fn run_weights(args: WordArgs, format: Format, jobs: usize) -> CliResult<()> {
    let gf = load_graph_file(&args.graph)?;
    let marking = gf.marking()?;
    let ids = sorted_edge_ids(&marking.graph);
    let parsed = parse_words(&args.words)?;
    let values = batch(jobs, &parsed, |w| Ok(words::edge_weights(w, &marking)?))?;
    let mut cols = vec!["word".to_string()];
    cols.extend(ids.iter().cloned());
    let mut t = Table::new(&cols.iter().map(String::as_str).collect::<Vec<_>>());
    for (text, w) in args.words.iter().zip(values) {
        let mut row = vec![text.clone()];
        row.extend(ids.iter().map(|id| w[id].to_string()));
        t.row(row);
    }
    t.print(format);
    Ok(())
}

fn weighting_rows(t: &mut Table, ids: &[EdgeId], parts: &[spin::Weighting], label: Option<usize>) {
    for (i, part) in parts.iter().enumerate() {
        let mut row = Vec::new();
        if label.is_some() {
            row.push(i.to_string());
        }
        row.extend(
            ids.iter()
                .map(|id| part.get(id).copied().unwrap_or(0).to_string()),
        );
        t.row(row);
    }
}

fn run_spin(cmd: SpinCmd, format: Format) -> CliResult<()> {
    match cmd {
        SpinCmd::Basis { graph: path } => {
            let g = load_graph_file(&path)?.graph();
            let ids = sorted_edge_ids(&g);
            let basis = spin::hilbert_basis(&g)?;
            let mut t = Table::new(&ids.iter().map(String::as_str).collect::<Vec<_>>());
            weighting_rows(&mut t, &ids, &basis, None);
            t.print(format);
            Ok(())
        }
        SpinCmd::Member {
            graph: path,
            weights,
        } => {
            let g = load_graph_file(&path)?.graph();
            let w = spin::parse_weighting(&weights)?;
            let member = spin::is_member(&w, &g)?;
            let mut t = Table::new(&["weights", "member"]);
            t.row(vec![
                spin::format_weighting(&w).replace(',', ";"),
                member.to_string(),
            ]);
            t.print(format);
            Ok(())
        }
        SpinCmd::Decompose {
            graph: path,
            weights,
        } => {
            let g = load_graph_file(&path)?.graph();
            let w = spin::parse_weighting(&weights)?;
            let parts = spin::decompose(&w, &g)?
                .ok_or_else(|| domain("no decomposition over the Hilbert basis"))?;
            let ids = sorted_edge_ids(&g);
            let mut cols = vec!["part".to_string()];
            cols.extend(ids.iter().cloned());
            let mut t = Table::new(&cols.iter().map(String::as_str).collect::<Vec<_>>());
            weighting_rows(&mut t, &ids, &parts, Some(0));
            t.print(format);
            Ok(())
        }
    }
}

fn run_polytope(cmd: PolytopeCmd, format: Format) -> CliResult<()> {
    match cmd {
        PolytopeCmd::Count { graph: path, level } => {
            if level == 0 {
                return Err(domain("--level must be positive"));
            }
            let g = load_graph_file(&path)?.graph();
            let count = spin::polytope_points(&g, level)?.len();
            let mut t = Table::new(&["level", "count"]);
            t.row(vec![level.to_string(), count.to_string()]);
            t.print(format);
            Ok(())
        }
        PolytopeCmd::Face { graph: path, ones } => {
            let g = load_graph_file(&path)?.graph();
            let face = FaceSpec {
                ones: ones
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .collect(),
            };
            let (dim, codim) = spin::face_dimension(&face, &g)?;
            let mut t = Table::new(&["dim", "codim"]);
            t.row(vec![dim.to_string(), codim.to_string()]);
            t.print(format);
            Ok(())
        }
    }
}

enum EvalKind {
    Trace,
    Tensor,
}

fn run_eval(args: EvalArgs, format: Format, jobs: usize, kind: EvalKind) -> CliResult<()> {
    let gf = load_graph_file(&args.graph)?;
    let marking = gf.marking()?;
    let (rep, seed) = rep_or_seed(&args.rep, &marking.graph)?;
    let parsed = parse_words(&args.words)?;
    let values = batch(jobs, &parsed, |w| match kind {
        EvalKind::Trace => Ok(tensor::trace_word_eval(w, &rep, &marking)?),
        EvalKind::Tensor => {
            let t = tensor::word_to_tensor(w, &marking)?;
            Ok(tensor::evaluate_tensor(&t, &rep)?)
        }
    })?;
    let mut t = Table::new(&["word", "re", "im"]);
    if let Some(s) = seed {
        t.meta("seed", s);
    }
    for (text, z) in args.words.iter().zip(values) {
        t.row(vec![text.clone(), fmt_f(z.re), fmt_f(z.im)]);
    }
    t.print(format);
    Ok(())
}

fn embed_point(gf: &GraphFile) -> CliResult<(ValuationPoint<f64>, Vec<Vec<i32>>)> {
    let marking = gf.marking()?;
    if marking.genus() > 4 {
        return Err(domain("tropical embedding supports genus <= 4"));
    }
    let metric = metric_or_unit(gf)?;
    let basis = words::enumerate_s2g(marking.genus());
    Ok((ValuationPoint::new(marking, metric), basis))
}

fn run_trop(cmd: TropCmd, format: Format) -> CliResult<()> {
    match cmd {
        TropCmd::Embed { graph: path } => {
            let gf = load_graph_file(&path)?;
            let (point, basis) = embed_point(&gf)?;
            let values = valuation::tropical_embed(&point, &basis)?;
            let mut t = Table::new(&["word", "value"]);
            for (w, v) in basis.iter().zip(values) {
                t.row(vec![words::format_word(w), fmt_f(v)]);
            }
            t.print(format);
            Ok(())
        }
        TropCmd::Distinguish { left, right } => {
            let lf = load_graph_file(&left)?;
            let rf = load_graph_file(&right)?;
            let (lp, basis) = embed_point(&lf)?;
            let (rp, rbasis) = embed_point(&rf)?;
            if basis != rbasis {
                return Err(domain("the two markings have different genus"));
            }
            let lv = valuation::tropical_embed(&lp, &basis)?;
            let rv = valuation::tropical_embed(&rp, &basis)?;
            let witness = basis
                .iter()
                .zip(lv.iter().zip(&rv))
                .find(|(_, (a, b))| (*a - *b).abs() > 1e-9);
            let mut t = Table::new(&["status", "witness", "left", "right"]);
            match witness {
                Some((w, (a, b))) => t.row(vec![
                    "separated".to_string(),
                    words::format_word(w),
                    fmt_f(*a),
                    fmt_f(*b),
                ]),
                None => t.row(vec![
                    "indistinguishable".to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                ]),
            }
            t.print(format);
            Ok(())
        }
    }
}

fn run_nok(args: NokArgs, format: Format, jobs: usize) -> CliResult<()> {
    let gf = load_graph_file(&args.graph)?;
    let marking = gf.marking()?;
    let order: Vec<EdgeId> = match &args.order {
        Some(text) => text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect(),
        None => sorted_edge_ids(&marking.graph),
    };
    let parsed = parse_words(&args.words)?;
    let values = batch(jobs, &parsed, |w| {
        Ok(valuation::nok_valuation(&marking, &order, w)?)
    })?;
    let mut cols = vec!["word".to_string()];
    cols.extend(order.iter().cloned());
    let mut t = Table::new(&cols.iter().map(String::as_str).collect::<Vec<_>>());
    for (text, v) in args.words.iter().zip(values) {
        let mut row = vec![text.clone()];
        row.extend(v.iter().map(|x| x.to_string()));
        t.row(row);
    }
    t.print(format);
    Ok(())
}

fn run_moment(cmd: MomentCmd, format: Format, jobs: usize) -> CliResult<()> {
    match cmd {
        MomentCmd::Solve {
            graph: path,
            rep,
            tol,
            max_iters,
            samples,
        } => {
            if !(tol > 0.0) {
                return Err(domain("--tol must be positive"));
            }
            if max_iters == 0 || samples == 0 {
                return Err(domain("--max-iters and --samples must be positive"));
            }
            let g = load_graph_file(&path)?.graph();
            if samples == 1 {
                let (start, seed) = rep_or_seed(&rep, &g)?;
                let out = moment::kempf_ness_solve(&start, &g, tol, max_iters)?;
                let image = moment::momentum_image(&out.rep, &g, tol.max(out.residual * 2.0))?;
                let mut t = Table::new(&["edge", "length"]);
                if let Some(s) = seed {
                    t.meta("seed", s);
                }
                t.meta("iterations", out.iterations);
                t.meta("residual", fmt_f(out.residual));
                for (id, len) in &image {
                    t.row(vec![id.clone(), fmt_f(*len)]);
                }
                t.print(format);
                Ok(())
            } else {
                if rep.rep.is_some() {
                    return Err(domain("--samples > 1 requires seeded input"));
                }
                let base = resolve_seed(rep.seed)?;
                let seeds: Vec<u64> = (0..samples as u64).map(|i| base + i).collect();
                let outcomes = batch(jobs, &seeds, |s| {
                    let start = tensor::random_rep(&g, *s);
                    Ok(moment::kempf_ness_solve(&start, &g, tol, max_iters))
                })?;
                let mut t = Table::new(&["sample", "seed", "converged", "iterations", "residual"]);
                t.meta("seed", base);
                for (i, (s, outcome)) in seeds.iter().zip(outcomes).enumerate() {
                    let row = match outcome {
                        Ok(out) => vec![
                            i.to_string(),
                            s.to_string(),
                            "true".to_string(),
                            out.iterations.to_string(),
                            fmt_f(out.residual),
                        ],
                        Err(Error::NotConverged {
                            residual,
                            iterations,
                        }) => vec![
                            i.to_string(),
                            s.to_string(),
                            "false".to_string(),
                            iterations.to_string(),
                            fmt_f(residual),
                        ],
                        Err(e) => return Err(e.into()),
                    };
                    t.row(row);
                }
                t.print(format);
                Ok(())
            }
        }
        MomentCmd::Assign { graph: path, seed } => {
            let g = load_graph_file(&path)?.graph();
            let seed = resolve_seed(seed)?;
            let kv = moment::leafless_assignment(&g, seed)?;
            let rep = moment::assignment_rep(&kv);
            let residual = moment::momentum_residual(&rep, &g)?;
            let meta = vec![
                ("seed".to_string(), seed.to_string()),
                ("residual".to_string(), fmt_f(residual)),
            ];
            print_rep(&rep, &meta, format);
            Ok(())
        }
        MomentCmd::Flow {
            graph: path,
            rep,
            angles,
            min_length,
        } => {
            if !(min_length > 0.0) {
                return Err(domain("--min-length must be positive"));
            }
            let g = load_graph_file(&path)?.graph();
            let (start, seed) = momentum_rep_or_seed(&rep, &g)?;
            let angle_map = parse_real_map(&angles, &g)?;
            if angle_map.is_empty() {
                return Err(domain("--angles lists no edges"));
            }
            let moved = moment::torus_action(&start, &g, &angle_map, min_length)?;
            let mut meta = Vec::new();
            if let Some(s) = seed {
                meta.push(("seed".to_string(), s.to_string()));
            }
            print_rep(&moved, &meta, format);
            Ok(())
        }
        MomentCmd::Image {
            graph: path,
            rep,
            tol,
        } => {
            if !(tol > 0.0) {
                return Err(domain("--tol must be positive"));
            }
            let g = load_graph_file(&path)?.graph();
            let (r, seed) = momentum_rep_or_seed(&rep, &g)?;
            let image = moment::momentum_image(&r, &g, tol)?;
            let residual = moment::momentum_residual(&r, &g)?;
            let mut t = Table::new(&["edge", "length"]);
            if let Some(s) = seed {
                t.meta("seed", s);
            }
            t.meta("residual", fmt_f(residual));
            for (id, len) in &image {
                t.row(vec![id.clone(), fmt_f(*len)]);
            }
            t.print(format);
            Ok(())
        }
    }
}
