//! `mdsconv`: verify, search, construct and exercise MDS convolutional codes.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde_json::{json, Value};

use mdsconv::cdp::{self, Profile};
use mdsconv::codec::{CodeSpec, CodecError};
use mdsconv::construct;
use mdsconv::erasure::{self, LossModel, LossScope, SimConfig, SimStats};
use mdsconv::gf::{Fe, Field};
use mdsconv::rareness::{self, FigureSeries};
use mdsconv::search::{self, Budget, CheckpointConfig, Mode, Outcome, SearchError, SearchOptions};
use mdsconv::tables::{self, Verdict};

#[derive(Parser)]
#[command(name = "mdsconv", version, about = "Systematic MDS convolutional codes over GF(2^m)")]
struct Cli {
    /// Field polynomial as an integer (e.g. 0b1011); defaults to the standard one for m.
    #[arg(long, global = true, value_parser = parse_poly)]
    poly: Option<u32>,
    #[command(subcommand)]
    cmd: Cmd,
}

fn parse_poly(s: &str) -> Result<u32, String> {
    let r = if let Some(b) = s.strip_prefix("0b") {
        u32::from_str_radix(b, 2)
    } else if let Some(h) = s.strip_prefix("0x") {
        u32::from_str_radix(h, 16)
    } else {
        s.parse()
    };
    r.map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Cmd {
    /// Check that codes have column distance profile [2, 3, ..., D+2].
    Verify(VerifyArgs),
    /// Backtracking search for a code of the given free distance.
    Search(SearchArgs),
    /// Closed-form codes of free distance 3 or 4.
    Construct(ConstructArgs),
    /// Upper bounds on free distance or on k.
    Bound(BoundArgs),
    /// Per-depth rareness as CSV.
    Rareness(RarenessArgs),
    /// Per-depth rareness curves for several block lengths, as CSV.
    Figure(FigureArgs),
    /// Erasure-channel simulation of a code file.
    Simulate(SimulateArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("what").required(true).args(["files", "table_all"])))]
struct VerifyArgs {
    /// Code files.
    files: Vec<PathBuf>,
    /// Verify every bundled table entry.
    #[arg(long)]
    table_all: bool,
    /// Include the large-field table entries.
    #[arg(long)]
    slow: bool,
}

#[derive(Args)]
#[command(group(ArgGroup::new("kind").args(["complete", "probe"])))]
struct SearchArgs {
    #[arg(required_unless_present = "resume")]
    m: Option<u32>,
    #[arg(required_unless_present = "resume")]
    n: Option<usize>,
    /// Target free distance.
    #[arg(required_unless_present = "resume")]
    target: Option<usize>,
    /// Try every legal value (default).
    #[arg(long)]
    complete: bool,
    /// Try a random sample of legal values per node.
    #[arg(long)]
    probe: bool,
    /// Legal values tried per node in probe mode.
    #[arg(long, default_value_t = rareness::DEFAULT_PROBE_SAMPLE)]
    sample: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep every symmetric variant of the degree-1 coefficients.
    #[arg(long)]
    no_symmetry: bool,
    /// Skip the follow-up search that decides whether the result is exact.
    #[arg(long)]
    no_confirm: bool,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write a checkpoint file periodically.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Nodes between checkpoint writes.
    #[arg(long, default_value_t = 1_000_000)]
    checkpoint_every: u64,
    /// Continue from a checkpoint file.
    #[arg(long, conflicts_with_all = ["m", "n", "target", "probe", "complete"])]
    resume: Option<PathBuf>,
    /// Write the code found (or the deepest one) to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct BudgetArgs {
    /// Stop after this many coefficient assignments.
    #[arg(long)]
    max_nodes: Option<u64>,
    /// Stop after this many seconds.
    #[arg(long)]
    max_seconds: Option<f64>,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        Budget {
            max_nodes: self.max_nodes,
            max_time: self.max_seconds.map(Duration::from_secs_f64),
        }
    }
}

#[derive(Args)]
#[command(group(ArgGroup::new("which").required(true).args(["d3", "d4"])))]
struct ConstructArgs {
    /// Free distance 3, rate (2^m-1)/2^m.
    #[arg(long, value_name = "M")]
    d3: Option<u32>,
    /// Free distance 4, rate (2^{m-1}-1)/2^{m-1}.
    #[arg(long, value_name = "M")]
    d4: Option<u32>,
    /// Hyperplane element beta (integer representation).
    #[arg(requires = "d4")]
    beta: Option<u16>,
    /// Constant c with Tr(beta c) = 1 (integer representation).
    #[arg(requires = "beta")]
    c: Option<u16>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    m: u32,
    /// Block length; gives the largest free distance.
    #[arg(required_unless_present = "distance", conflicts_with = "distance")]
    n: Option<usize>,
    /// Free distance; gives the largest k.
    #[arg(long)]
    distance: Option<usize>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("kind").required(true).args(["exact", "probe"])))]
struct RarenessArgs {
    m: u32,
    n: usize,
    /// Code degree D.
    degree: usize,
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    probe: bool,
    #[arg(long, default_value_t = rareness::DEFAULT_PROBE_SAMPLE)]
    sample: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(long, default_value_t = 6)]
    m: u32,
    /// Block lengths; each curve runs to the table degree for (m, n).
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4, 7])]
    n: Vec<usize>,
    /// Node budget of each complete traversal.
    #[arg(long, default_value_t = 2_000_000)]
    exact_nodes: u64,
    /// Node budget of each probe.
    #[arg(long, default_value_t = rareness::DEFAULT_PROBE_NODES)]
    probe_nodes: u64,
    #[arg(long, default_value_t = rareness::DEFAULT_PROBE_SAMPLE)]
    sample: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct SimulateArgs {
    code: PathBuf,
    /// iid:<p> or gilbert:<mean good run>:<mean bad run>.
    #[arg(long)]
    loss: LossModel,
    /// Number of blocks sent.
    #[arg(long, default_value_t = 100_000)]
    blocks: usize,
    /// One CSV row per seed.
    #[arg(long, value_delimiter = ',', default_values_t = [0u64])]
    seed: Vec<u64>,
    /// Erase parity symbols only.
    #[arg(long)]
    parity_only: bool,
    /// Decoder window in blocks.
    #[arg(long)]
    window: Option<usize>,
    /// Append this many random degrees to the code before simulating.
    #[arg(long)]
    hybrid: Option<usize>,
    #[arg(long, default_value_t = 0)]
    hybrid_seed: u64,
}

/// Error carrying the exit status: 1 for domain failures, 2 for bad input.
struct Failure {
    code: u8,
    msg: String,
}

fn domain(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 1,
        msg: e.to_string(),
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: 2,
        msg: e.to_string(),
    }
}

fn codec_failure(e: CodecError) -> Failure {
    match e {
        CodecError::Io(_) | CodecError::Parse { .. } => usage(e),
        CodecError::FieldMismatch(_) | CodecError::BadLength(_) | CodecError::BadShape => usage(e),
        CodecError::RowLengthMismatch { .. } | CodecError::LogOutOfRange { .. } => usage(e),
        CodecError::NotSerializable(_) => domain(e),
    }
}

static POLY: std::sync::OnceLock<Option<u32>> = std::sync::OnceLock::new();

fn field(m: u32) -> Result<Arc<Field>, Failure> {
    match POLY.get().copied().flatten() {
        Some(p) => Field::new(m, p),
        None => Field::with_default_poly(m),
    }
    .map(Arc::new)
    .map_err(usage)
}

fn code_text(code: &CodeSpec) -> Result<String, Failure> {
    code.to_text().map_err(codec_failure)
}

fn profile_json(p: &Profile) -> Value {
    json!({
        "profile": p.distances,
        "mds_prefix": p.mds_prefix(),
        "witness": p.witness.as_ref().map(|w| w.to_string()),
    })
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Value::Object(x), Value::Object(y)) = (&mut a, b) {
        x.extend(y);
    }
    a
}

fn cmd_verify(a: VerifyArgs) -> Result<(), Failure> {
    let mut failed = 0usize;
    for path in &a.files {
        let code = CodeSpec::from_file(path)
            .map_err(|e| usage(format!("{}: {}", path.display(), codec_failure(e).msg)))?;
        let p = cdp::cdp_via_minors(&code).map_err(domain)?;
        let pass = p.is_mds();
        failed += usize::from(!pass);
        let line = json!({
            "source": path.display().to_string(),
            "m": code.field().m(),
            "n": code.n(),
            "delta": code.degree() + 2,
            "status": if pass { "PASS" } else { "FAIL" },
        });
        println!("{}", merge(line, profile_json(&p)));
    }
    if a.table_all {
        for e in tables::all_entries() {
            let base = json!({
                "source": format!("table {}", e.table),
                "m": e.m,
                "n": e.n,
                "delta": e.delta,
                "exact": e.exact,
            });
            if e.is_slow() && !a.slow {
                println!("{}", merge(base, json!({"status": "SKIP"})));
                continue;
            }
            let v = e.verify().map_err(domain)?;
            let witness = match &v {
                Verdict::Fail(Some(w)) => Some(w.to_string()),
                _ => None,
            };
            failed += usize::from(!v.passed());
            let status = if v.passed() { "PASS" } else { "FAIL" };
            println!("{}", merge(base, json!({"status": status, "witness": witness})));
        }
    }
    if failed > 0 {
        return Err(domain(format!("{failed} code(s) failed verification")));
    }
    Ok(())
}

fn search_json(r: &search::SearchResult, seed: u64, mode: Mode) -> Value {
    let outcome = match r.outcome {
        Outcome::Found => "found",
        Outcome::Exhausted if r.infeasible() => "infeasible",
        Outcome::Exhausted => "exhausted",
        Outcome::Budget => "budget",
    };
    let mode = match mode {
        Mode::Complete => "complete".to_string(),
        Mode::Incomplete { sample } => format!("probe:{sample}"),
    };
    let code = r.deepest_code();
    json!({
        "m": r.field.m(),
        "n": r.n,
        "target": r.target,
        "mode": mode,
        "seed": seed,
        "outcome": outcome,
        "complete": r.complete,
        "achieved_distance": r.achieved_distance(),
        "nodes": r.stats.nodes,
        "deepest": r.stats.deepest,
        "solutions": r.stats.solutions,
        "visits": r.stats.visits,
        "legal_sum": r.stats.legal_sum,
        "code": code.to_text().ok(),
    })
}

fn run_search(
    f: Arc<Field>,
    n: usize,
    target: usize,
    opts: &SearchOptions,
) -> Result<search::SearchResult, Failure> {
    match search::search(f, n, target, opts) {
        Ok(r) => Ok(r),
        Err(SearchError::BudgetExceeded(r)) => Ok(*r),
        Err(e @ (SearchError::BadLength(_) | SearchError::BadTarget(_) | SearchError::TooDeep(_))) => {
            Err(usage(e))
        }
        Err(e) => Err(domain(e)),
    }
}

fn cmd_search(a: SearchArgs) -> Result<(), Failure> {
    let mode = if a.probe {
        Mode::Incomplete { sample: a.sample }
    } else {
        Mode::Complete
    };
    let opts = SearchOptions {
        mode,
        symmetry: !a.no_symmetry,
        seed: a.seed,
        stop_at_first: true,
        budget: a.budget.budget(),
        jobs: a.jobs,
        checkpoint: a.checkpoint.as_ref().map(|p| CheckpointConfig {
            path: p.clone(),
            every: a.checkpoint_every,
        }),
    };
    let res = match &a.resume {
        Some(path) => match search::resume(path, &opts) {
            Ok(r) => r,
            Err(SearchError::BudgetExceeded(r)) => *r,
            Err(e @ (SearchError::BadCheckpoint(_) | SearchError::Io(_))) => return Err(usage(e)),
            Err(e) => return Err(domain(e)),
        },
        None => {
            let f = field(a.m.expect("required"))?;
            run_search(f, a.n.expect("required"), a.target.expect("required"), &opts)?
        }
    };
    let complete_mode = a.resume.is_none() && mode == Mode::Complete;
    let mut line = search_json(&res, a.seed, mode);

    // decide whether the answer pins delta down
    let mut delta: Option<(usize, &str)> = None;
    if complete_mode && !a.no_confirm {
        let confirm = SearchOptions {
            checkpoint: None,
            ..opts.clone()
        };
        if res.code.is_some() {
            let next = run_search(res.field.clone(), res.n, res.target + 1, &confirm);
            delta = Some(match next {
                Ok(r) if r.infeasible() => (res.target, "exact"),
                _ => (res.target, "lower"),
            });
        } else if res.infeasible() {
            delta = Some((res.target - 1, "upper"));
            if res.target > 3 {
                if let Ok(r) = run_search(res.field.clone(), res.n, res.target - 1, &confirm) {
                    if r.code.is_some() {
                        delta = Some((res.target - 1, "exact"));
                    }
                }
            } else {
                delta = Some((2, "exact"));
            }
        }
    }
    if let Some((d, status)) = delta {
        line = merge(line, json!({"delta": d, "delta_status": status}));
    }
    if let Some(out) = &a.out {
        res.deepest_code().to_file(out).map_err(codec_failure)?;
    }
    println!("{line}");
    match (res.code.is_some(), res.infeasible(), delta) {
        (true, _, Some((d, "exact"))) => eprintln!("found; delta = {d} exact"),
        (true, _, _) => eprintln!("found"),
        (false, true, Some((d, "exact"))) => eprintln!("infeasible; delta = {d} exact"),
        (false, true, _) => eprintln!("infeasible; delta <= {}", res.target - 1),
        (false, false, _) => eprintln!(
            "no code found; deepest record reaches free distance {}",
            res.achieved_distance()
        ),
    }
    if res.infeasible() {
        return Err(domain(format!("target {} is infeasible", res.target)));
    }
    Ok(())
}

fn cmd_construct(a: ConstructArgs) -> Result<(), Failure> {
    let code = if let Some(m) = a.d3 {
        construct::construct_d3(field(m)?)
    } else {
        let f = field(a.d4.expect("group is required"))?;
        match (a.beta, a.c) {
            (None, _) => construct::construct_d4_default(f),
            (Some(beta), c) => {
                let beta = Fe(beta);
                if !f.contains(beta) {
                    return Err(usage(format!("beta {} is not a field element", beta.0)));
                }
                let c = match c {
                    Some(c) if f.contains(Fe(c)) => Fe(c),
                    Some(c) => return Err(usage(format!("c {c} is not a field element"))),
                    None => construct::default_constant(&f, beta).ok_or_else(|| domain("beta must be nonzero"))?,
                };
                construct::construct_d4(f, beta, c).map_err(domain)?
            }
        }
    };
    let text = code_text(&code)?;
    if let Some(out) = &a.out {
        std::fs::write(out, &text).map_err(domain)?;
    }
    print!("{text}");
    eprintln!(
        "n = {}, k = {}, free distance {}",
        code.n(),
        code.k(),
        code.degree() + 2
    );
    Ok(())
}

fn cmd_bound(a: BoundArgs) -> Result<(), Failure> {
    let f = field(a.m)?;
    if let Some(d) = a.distance {
        let k = construct::max_k_bound(&f, d).map_err(usage)?;
        println!("{}", json!({"m": a.m, "distance": d, "max_k": k, "max_n": k + 1}));
        eprintln!("k <= {k}");
    } else {
        let n = a.n.expect("required");
        let d = construct::max_distance_bound(&f, n).map_err(usage)?;
        println!("{}", json!({"m": a.m, "n": n, "max_distance": d}));
        eprintln!("free distance <= {d}");
    }
    Ok(())
}

fn cmd_rareness(a: RarenessArgs) -> Result<(), Failure> {
    let f = field(a.m)?;
    if a.n < 2 {
        return Err(usage(format!("block length must be at least 2, got {}", a.n)));
    }
    let budget = a.budget.budget();
    let rep = if a.exact {
        rareness::rareness_exact(f, a.n, a.degree, &budget, a.jobs)
    } else {
        let budget = Budget {
            max_nodes: budget.max_nodes.or(Some(rareness::DEFAULT_PROBE_NODES)),
            ..budget
        };
        rareness::rareness_estimate(f, a.n, a.degree, a.sample, a.seed, &budget, a.jobs)
    }
    .map_err(|e| match e {
        rareness::RarenessError::BadDegree => usage(e),
        e => domain(e),
    })?;
    print!("{}", rep.to_csv());
    eprintln!(
        "rareness {} ({})",
        rareness::format_log2(rep.log2_value()),
        if rep.exact { "exact" } else { "estimate" }
    );
    Ok(())
}

fn cmd_figure(a: FigureArgs) -> Result<(), Failure> {
    let f = field(a.m)?;
    println!("{}", FigureSeries::CSV_HEADER);
    for &n in &a.n {
        let degree = match tables::lookup(a.m, n) {
            Some(e) => e.degree(),
            None => construct::max_distance_bound(&f, n).map_err(usage)?.saturating_sub(2).max(1),
        };
        let s = rareness::figure_series(
            f.clone(),
            n,
            degree,
            &Budget::nodes(a.exact_nodes),
            a.sample,
            a.seed,
            &Budget::nodes(a.probe_nodes),
            a.jobs,
        )
        .map_err(domain)?;
        print!("{}", s.csv_rows());
        eprintln!("n = {n}: {} exact depths of {}", s.exact_rows, s.rows.len());
    }
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), Failure> {
    let mut code = CodeSpec::from_file(&a.code).map_err(codec_failure)?;
    if let Some(deg) = a.hybrid {
        code = erasure::hybrid_extend(&code, a.hybrid_seed, deg).code();
    }
    println!("{}", SimStats::CSV_HEADER);
    for &seed in &a.seed {
        let cfg = SimConfig {
            loss: a.loss,
            scope: if a.parity_only {
                LossScope::ParityOnly
            } else {
                LossScope::All
            },
            blocks: a.blocks,
            seed,
            window: a.window,
        };
        let s = erasure::simulate(&code, &cfg);
        println!("{}", s.csv_row());
        eprintln!(
            "seed {seed}: {} of {} information symbols unrecovered, wrong {}",
            s.unrecovered,
            s.total(),
            s.wrong
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    POLY.set(cli.poly).expect("set once");
    let r = match cli.cmd {
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Search(a) => cmd_search(a),
        Cmd::Construct(a) => cmd_construct(a),
        Cmd::Bound(a) => cmd_bound(a),
        Cmd::Rareness(a) => cmd_rareness(a),
        Cmd::Figure(a) => cmd_figure(a),
        Cmd::Simulate(a) => cmd_simulate(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
