//! Depth-first coefficient search for MDS codes.
//!
//! Coefficients are assigned one at a time along the walk
//! r_{1,k-1}, ..., r_{1,1}, r_{2,k}, ..., r_{2,1}, r_{3,k}, ... with
//! r_{0,j} = 1 and r_{1,k} = 1 fixed. Assigning r_{i,j} completes exactly
//! the anchored submatrices whose lower-left corner is r_{i,j}; each of
//! their determinants is affine in that coefficient, so the legal values
//! are the nonzero field elements minus one root per submatrix.

use std::fs;
use std::io::{self, Read as _, Write as _};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::codec::CodeSpec;
use crate::gf::{Fe, Field, GfError};
use crate::minors::{self, MAX_ROWS};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"MDSCKPT1";

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("block length must be at least 2, got {0}")]
    BadLength(usize),
    #[error("target distance must be at least 3, got {0}")]
    BadTarget(usize),
    #[error("target distance {0} needs more rows than supported")]
    TooDeep(usize),
    #[error("search budget exhausted at depth {}", .0.stats.deepest)]
    BudgetExceeded(Box<SearchResult>),
    #[error("checkpointing requires a single worker")]
    CheckpointNeedsOneJob,
    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Coefficient position (degree, 0-based column).
pub type Position = (usize, usize);

/// The assignment order for codes with `k` information symbols and degree `d`.
pub fn walk(k: usize, d: usize) -> Vec<Position> {
    let mut w = Vec::with_capacity(k * d);
    for i in 1..=d {
        let top = if i == 1 { k - 1 } else { k };
        for j in (0..top).rev() {
            w.push((i, j));
        }
    }
    w
}

/// Highest degree whose coefficients are all fixed once `assigned` walk
/// positions have values.
pub fn completed_degree(k: usize, assigned: usize) -> usize {
    if assigned == 0 {
        return if k == 1 { 1 } else { 0 };
    }
    let (i, j) = walk(k, assigned / k + 2)[assigned - 1];
    if j == 0 {
        i
    } else {
        i - 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Every legal value is tried.
    Complete,
    /// At each node, at most `sample` legal values are tried, chosen uniformly.
    Incomplete { sample: usize },
}

#[derive(Clone, Debug, Default)]
pub struct Budget {
    pub max_nodes: Option<u64>,
    pub max_time: Option<Duration>,
}

impl Budget {
    pub fn unlimited() -> Budget {
        Budget::default()
    }

    pub fn nodes(n: u64) -> Budget {
        Budget {
            max_nodes: Some(n),
            max_time: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckpointConfig {
    pub path: PathBuf,
    /// Nodes between writes.
    pub every: u64,
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub mode: Mode,
    /// Restrict degree-1 coefficients to one representative per symmetry class.
    pub symmetry: bool,
    pub seed: u64,
    /// Stop at the first code reaching the target; otherwise traverse everything.
    pub stop_at_first: bool,
    pub budget: Budget,
    pub jobs: usize,
    pub checkpoint: Option<CheckpointConfig>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            mode: Mode::Complete,
            symmetry: true,
            seed: 0,
            stop_at_first: true,
            budget: Budget::unlimited(),
            jobs: 1,
            checkpoint: None,
        }
    }
}

impl SearchOptions {
    pub fn complete() -> Self {
        Self::default()
    }

    pub fn probe(sample: usize, seed: u64) -> Self {
        SearchOptions {
            mode: Mode::Incomplete { sample },
            seed,
            ..Self::default()
        }
    }
}

/// Per-depth counters. Depth `d` is walk position `d`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Nodes at which the legal set of depth d was computed.
    pub visits: Vec<u64>,
    /// Sum of the legal-set sizes over those nodes.
    pub legal_sum: Vec<u64>,
    /// Coefficient assignments made.
    pub nodes: u64,
    /// Most walk positions assigned at once.
    pub deepest: usize,
    /// Complete assignments reaching the target.
    pub solutions: u64,
}

impl SearchStats {
    fn new(depths: usize) -> Self {
        SearchStats {
            visits: vec![0; depths],
            legal_sum: vec![0; depths],
            ..Default::default()
        }
    }

    fn merge(&mut self, o: &SearchStats) {
        for (a, b) in self.visits.iter_mut().zip(&o.visits) {
            *a += b;
        }
        for (a, b) in self.legal_sum.iter_mut().zip(&o.legal_sum) {
            *a += b;
        }
        self.nodes += o.nodes;
        self.deepest = self.deepest.max(o.deepest);
        self.solutions += o.solutions;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// A code reaching the target distance was found.
    Found,
    /// The search space was traversed without (further) success.
    Exhausted,
    /// Stopped by the node or time budget.
    Budget,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub field: Arc<Field>,
    pub n: usize,
    pub target: usize,
    pub outcome: Outcome,
    /// First code reaching the target, in walk order.
    pub code: Option<CodeSpec>,
    /// The first longest prefix reached, in walk order.
    pub deepest_prefix: Vec<Fe>,
    /// Whether no legal value was ever skipped.
    pub complete: bool,
    pub stats: SearchStats,
}

impl SearchResult {
    /// Free distance reached: the target on success, else the one implied
    /// by the deepest fully assigned degree.
    pub fn achieved_distance(&self) -> usize {
        if self.code.is_some() {
            return self.target;
        }
        completed_degree(self.n - 1, self.deepest_prefix.len()) + 2
    }

    /// The code formed by the deepest prefix, cut at its last complete degree.
    pub fn deepest_code(&self) -> CodeSpec {
        if let Some(c) = &self.code {
            return c.clone();
        }
        let k = self.n - 1;
        let deg = completed_degree(k, self.deepest_prefix.len());
        let full = prefix_code(&self.field, k, self.target - 2, &self.deepest_prefix);
        full.truncate(deg)
    }

    /// Whether the target was shown unreachable.
    pub fn infeasible(&self) -> bool {
        self.outcome == Outcome::Exhausted && self.complete && self.stats.solutions == 0
    }
}

/// Flat coefficients r[i*k + j] for degrees 0..=d with the fixed entries set.
fn base_coef(k: usize, d: usize) -> Vec<Fe> {
    let mut c = vec![Fe::ZERO; (d + 1) * k];
    c[..k].fill(Fe::ONE);
    if d >= 1 {
        c[k + k - 1] = Fe::ONE;
    }
    c
}

/// Code of degree `d` from assigned walk values; unassigned positions are zero.
pub fn prefix_code(field: &Arc<Field>, k: usize, d: usize, prefix: &[Fe]) -> CodeSpec {
    let mut coef = base_coef(k, d);
    for (&(i, j), &v) in walk(k, d).iter().zip(prefix) {
        coef[i * k + j] = v;
    }
    let rows = coef.chunks(k).map(|r| r.to_vec()).collect();
    CodeSpec::new(field.clone(), rows).expect("valid shape")
}

/// Ordering on nonzero elements used by the degree-1 symmetry filter:
/// by cyclotomic coset leader, then non-leaders before the leader, then log.
pub fn symmetry_key(field: &Field, x: Fe) -> (u32, bool, u32) {
    let l = field.log(x).expect("nonzero");
    let lead = field.coset_leader(l);
    (lead, lead == l, l)
}

/// Legal values for walk position `depth`, ascending by log, given the
/// coefficient array with every earlier position filled in.
fn legal_at(
    field: &Field,
    k: usize,
    coef: &[Fe],
    pos: Position,
    symmetry: bool,
    depth: usize,
) -> Vec<Fe> {
    let (level, first_col) = pos;
    let q = field.size() as usize;
    let mut forbidden = vec![false; q];
    forbidden[0] = true;
    let mut n_forbidden = 1;
    let mut dead = false;
    minors::corner_constraints(field, k, &coef[..(level + 1) * k], level, first_col, |c1, c0| {
        if c1.is_zero() {
            if c0.is_zero() {
                dead = true;
                return false;
            }
            return true;
        }
        let root = field.div(c0, c1).0 as usize;
        if !forbidden[root] {
            forbidden[root] = true;
            n_forbidden += 1;
            if n_forbidden == q {
                return false;
            }
        }
        true
    });
    if dead || n_forbidden == q {
        return Vec::new();
    }
    let mut out: Vec<Fe> = field
        .nonzero_by_log()
        .filter(|x| !forbidden[x.0 as usize])
        .collect();
    if symmetry && level == 1 {
        if depth == 0 {
            out.retain(|&x| field.is_coset_leader(x));
        } else {
            let upper = symmetry_key(field, coef[k + first_col + 1]);
            out.retain(|&x| symmetry_key(field, x) < upper);
        }
    }
    out
}

/// Legal values for the next walk position after `prefix`, for a code with
/// block length `n`. The walk is taken long enough to cover the next position.
pub fn legal_values(field: &Field, n: usize, prefix: &[Fe], symmetry: bool) -> Vec<Fe> {
    let k = n - 1;
    let d = prefix.len() / k + 2;
    let w = walk(k, d);
    let mut coef = base_coef(k, d);
    for (&(i, j), &v) in w.iter().zip(prefix) {
        coef[i * k + j] = v;
    }
    legal_at(field, k, &coef, w[prefix.len()], symmetry, prefix.len())
}

/// Brings a code with r_{0,j} = 1 for all j to the form the symmetry filter
/// keeps: the last column scaled to r_{1,k} = 1, a Frobenius power making
/// the largest degree-1 entry a coset leader, and columns 1..k-1 sorted.
/// Returns None if the degree-1 entries are not distinct and different from 1
/// after scaling (such codes are not MDS beyond degree 0).
pub fn canonicalize(code: &CodeSpec) -> Option<CodeSpec> {
    let f = code.field().clone();
    let k = code.k();
    if code.degree() == 0 || !code.has_unit_constant_terms() || !code.all_nonzero() {
        return None;
    }
    let c = f.inv(code.coeff(1, k - 1)).ok()?;
    let mut cols: Vec<Vec<Fe>> = (0..k)
        .map(|j| {
            let mut ci = Fe::ONE;
            (0..=code.degree())
                .map(|i| {
                    let v = f.mul(ci, code.coeff(i, j));
                    ci = f.mul(ci, c);
                    v
                })
                .collect()
        })
        .collect();
    let mut last = cols.pop().expect("k >= 1");
    if k > 1 {
        let top = cols
            .iter()
            .map(|col| col[1])
            .max_by_key(|&x| symmetry_key(&f, x))
            .expect("nonempty");
        let l = f.log(top).ok()?;
        let lead = f.coset_leader(l);
        let mut t = 0;
        let mut e = l as u64;
        while e as u32 != lead {
            e = e * 2 % f.order() as u64;
            t += 1;
        }
        for col in cols.iter_mut().chain(std::iter::once(&mut last)) {
            for v in col.iter_mut() {
                for _ in 0..t {
                    *v = f.square(*v);
                }
            }
        }
        cols.sort_by_key(|col| symmetry_key(&f, col[1]));
        let keys: Vec<_> = cols.iter().map(|col| col[1]).collect();
        if keys.iter().any(|&x| x == Fe::ONE) || keys.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
    }
    cols.push(last);
    let rows = (0..=code.degree())
        .map(|i| cols.iter().map(|col| col[i]).collect())
        .collect();
    CodeSpec::new(f, rows).ok()
}

/// Whether the degree-1 entries of a canonical code pass the symmetry filter.
pub fn passes_symmetry_filter(code: &CodeSpec) -> bool {
    let f = code.field();
    let k = code.k();
    if k == 1 {
        return true;
    }
    let r1: Vec<Fe> = (0..k - 1).map(|j| code.coeff(1, j)).collect();
    if r1.iter().any(|x| x.is_zero()) {
        return false;
    }
    f.is_coset_leader(r1[k - 2])
        && r1
            .windows(2)
            .all(|w| symmetry_key(f, w[0]) < symmetry_key(f, w[1]))
}

struct Frame {
    cands: Vec<Fe>,
    next: usize,
}

enum Stop {
    Exhausted,
    Found,
    Budget,
    Cancelled,
}

struct Shared<'a> {
    nodes: &'a AtomicU64,
    start: Instant,
    winner: &'a AtomicUsize,
}

struct Engine<'a> {
    field: &'a Field,
    k: usize,
    walk: &'a [Position],
    opts: &'a SearchOptions,
    coef: Vec<Fe>,
    prefix: Vec<Fe>,
    stack: Vec<Frame>,
    branch_base: usize,
    rng: ChaCha8Rng,
    stats: SearchStats,
    deepest_prefix: Vec<Fe>,
    found: Option<Vec<Fe>>,
    hook: Option<&'a mut (dyn FnMut(&[Fe]) + 'a)>,
}

impl<'a> Engine<'a> {
    fn select(&mut self, legal: Vec<Fe>) -> Vec<Fe> {
        match self.opts.mode {
            Mode::Complete => legal,
            Mode::Incomplete { sample } if legal.len() <= sample => legal,
            Mode::Incomplete { sample } => {
                let mut idx = index::sample(&mut self.rng, legal.len(), sample).into_vec();
                idx.sort_unstable();
                idx.into_iter().map(|i| legal[i]).collect()
            }
        }
    }

    fn over_budget(&self, shared: &Shared<'_>, total: u64) -> bool {
        if let Some(max) = self.opts.budget.max_nodes {
            if total > max {
                return true;
            }
        }
        if let Some(t) = self.opts.budget.max_time {
            if total % 256 == 0 && shared.start.elapsed() > t {
                return true;
            }
        }
        false
    }

    fn run(&mut self, shared: &Shared<'_>) -> Stop {
        let nfree = self.walk.len();
        loop {
            if let (Some(cp), 1) = (&self.opts.checkpoint, self.opts.jobs) {
                if self.stats.nodes > 0 && self.stats.nodes % cp.every.max(1) == 0 {
                    // a failed write must not kill an hours-long run
                    if let Err(e) = self.write_checkpoint(&cp.path) {
                        eprintln!("checkpoint write failed: {e}");
                    }
                }
            }
            let Some(d) = self.stack.len().checked_sub(1) else {
                return Stop::Exhausted;
            };
            let top = self.stack.last_mut().expect("nonempty");
            if top.next == top.cands.len() {
                self.stack.pop();
                continue;
            }
            let v = top.cands[top.next];
            top.next += 1;
            if d == 0 {
                let stream = (self.branch_base + top.next) as u64;
                self.rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
                self.rng.set_stream(stream);
            }
            let (i, j) = self.walk[d];
            self.coef[i * self.k + j] = v;
            self.prefix.truncate(d);
            self.prefix.push(v);
            self.stats.nodes += 1;
            if let Some(h) = self.hook.as_mut() {
                h(&self.prefix);
            }
            if d + 1 > self.stats.deepest {
                self.stats.deepest = d + 1;
                self.deepest_prefix = self.prefix.clone();
            }
            let total = shared.nodes.fetch_add(1, Ordering::Relaxed) + 1;
            if self.over_budget(shared, total) {
                return Stop::Budget;
            }
            if self.opts.stop_at_first
                && self.stats.nodes % 64 == 0
                && shared.winner.load(Ordering::Relaxed) < self.branch_base
            {
                return Stop::Cancelled;
            }
            if d + 1 == nfree {
                self.stats.solutions += 1;
                if self.found.is_none() {
                    self.found = Some(self.prefix.clone());
                }
                if self.opts.stop_at_first {
                    return Stop::Found;
                }
                continue;
            }
            let legal = legal_at(
                self.field,
                self.k,
                &self.coef,
                self.walk[d + 1],
                self.opts.symmetry,
                d + 1,
            );
            self.stats.visits[d + 1] += 1;
            self.stats.legal_sum[d + 1] += legal.len() as u64;
            let cands = self.select(legal);
            self.stack.push(Frame { cands, next: 0 });
        }
    }

    fn write_checkpoint(&self, path: &Path) -> io::Result<()> {
        let mut b = Vec::new();
        b.extend_from_slice(CHECKPOINT_MAGIC);
        put32(&mut b, self.field.m());
        put32(&mut b, self.field.poly());
        put32(&mut b, (self.k + 1) as u32);
        put32(&mut b, (self.coef.len() / self.k - 1 + 2) as u32);
        match self.opts.mode {
            Mode::Complete => {
                b.push(0);
                put64(&mut b, 0);
            }
            Mode::Incomplete { sample } => {
                b.push(1);
                put64(&mut b, sample as u64);
            }
        }
        b.push(self.opts.symmetry as u8);
        b.push(self.opts.stop_at_first as u8);
        put64(&mut b, self.opts.seed);
        put64(&mut b, self.stats.nodes);
        put64(&mut b, self.stats.solutions);
        put64(&mut b, self.stats.deepest as u64);
        put32(&mut b, self.stats.visits.len() as u32);
        for (v, s) in self.stats.visits.iter().zip(&self.stats.legal_sum) {
            put64(&mut b, *v);
            put64(&mut b, *s);
        }
        put_fes(&mut b, &self.deepest_prefix);
        match &self.found {
            Some(f) => {
                b.push(1);
                put_fes(&mut b, f);
            }
            None => b.push(0),
        }
        put32(&mut b, self.stack.len() as u32);
        for fr in &self.stack {
            put_fes(&mut b, &fr.cands);
            put32(&mut b, fr.next as u32);
        }
        put64(&mut b, self.rng.get_stream());
        let wp = self.rng.get_word_pos();
        put64(&mut b, wp as u64);
        put64(&mut b, (wp >> 64) as u64);
        let tmp = path.with_extension("tmp");
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&b)?;
        f.sync_all()?;
        fs::rename(tmp, path)
    }
}

fn put32(b: &mut Vec<u8>, x: u32) {
    b.extend_from_slice(&x.to_le_bytes());
}

fn put64(b: &mut Vec<u8>, x: u64) {
    b.extend_from_slice(&x.to_le_bytes());
}

fn put_fes(b: &mut Vec<u8>, v: &[Fe]) {
    put32(b, v.len() as u32);
    for x in v {
        b.extend_from_slice(&x.0.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], SearchError> {
        if self.at + n > self.buf.len() {
            return Err(SearchError::BadCheckpoint("truncated".into()));
        }
        let s = &self.buf[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, SearchError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, SearchError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, SearchError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn fes(&mut self) -> Result<Vec<Fe>, SearchError> {
        let n = self.u32()? as usize;
        (0..n)
            .map(|_| Ok(Fe(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))))
            .collect()
    }
}

fn validate(n: usize, target: usize) -> Result<(), SearchError> {
    if n < 2 {
        return Err(SearchError::BadLength(n));
    }
    if target < 3 {
        return Err(SearchError::BadTarget(target));
    }
    if target - 2 >= MAX_ROWS {
        return Err(SearchError::TooDeep(target));
    }
    Ok(())
}

/// Searches for a systematic rate (n-1)/n code over `field` whose column
/// distance profile is [2, 3, ..., target].
///
/// Returns `Err(BudgetExceeded)` with the partial result if the budget runs out.
pub fn search(
    field: Arc<Field>,
    n: usize,
    target: usize,
    opts: &SearchOptions,
) -> Result<SearchResult, SearchError> {
    search_with_hook(field, n, target, opts, None)
}

fn search_with_hook(
    field: Arc<Field>,
    n: usize,
    target: usize,
    opts: &SearchOptions,
    hook: Option<&mut dyn FnMut(&[Fe])>,
) -> Result<SearchResult, SearchError> {
    validate(n, target)?;
    if opts.checkpoint.is_some() && opts.jobs > 1 {
        return Err(SearchError::CheckpointNeedsOneJob);
    }
    let k = n - 1;
    let d = target - 2;
    let w = walk(k, d);
    let nfree = w.len();
    let mut stats = SearchStats::new(nfree);
    let complete = matches!(opts.mode, Mode::Complete);
    let mut result = SearchResult {
        field: field.clone(),
        n,
        target,
        outcome: Outcome::Exhausted,
        code: None,
        deepest_prefix: Vec::new(),
        complete,
        stats: stats.clone(),
    };
    if nfree == 0 {
        result.outcome = Outcome::Found;
        result.stats.solutions = 1;
        result.code = Some(prefix_code(&field, k, d, &[]));
        return Ok(result);
    }
    let coef = base_coef(k, d);
    let legal = legal_at(&field, k, &coef, w[0], opts.symmetry, 0);
    stats.visits[0] = 1;
    stats.legal_sum[0] = legal.len() as u64;
    let mut root_rng = ChaCha8Rng::seed_from_u64(opts.seed);
    root_rng.set_stream(0);
    let mut root = Engine {
        field: &field,
        k,
        walk: &w,
        opts,
        coef: coef.clone(),
        prefix: Vec::new(),
        stack: Vec::new(),
        branch_base: 0,
        rng: root_rng,
        stats: SearchStats::new(nfree),
        deepest_prefix: Vec::new(),
        found: None,
        hook: None,
    };
    let cands = root.select(legal);
    let nodes = AtomicU64::new(0);
    let winner = AtomicUsize::new(usize::MAX);
    let shared = Shared {
        nodes: &nodes,
        start: Instant::now(),
        winner: &winner,
    };

    if opts.jobs <= 1 || hook.is_some() {
        root.stack.push(Frame { cands, next: 0 });
        root.stats = stats;
        root.hook = hook.map(|h| h as &mut dyn FnMut(&[Fe]));
        let stop = root.run(&shared);
        return finish_sequential(root, stop, result);
    }

    let run_branch = |b: usize| -> (Stop, SearchStats, Vec<Fe>, Option<Vec<Fe>>) {
        let mut e = Engine {
            field: &field,
            k,
            walk: &w,
            opts,
            coef: coef.clone(),
            prefix: Vec::new(),
            stack: vec![Frame {
                cands: vec![cands[b]],
                next: 0,
            }],
            branch_base: b,
            rng: ChaCha8Rng::seed_from_u64(opts.seed),
            stats: SearchStats::new(nfree),
            deepest_prefix: Vec::new(),
            found: None,
            hook: None,
        };
        if opts.stop_at_first && winner.load(Ordering::Relaxed) < b {
            return (Stop::Cancelled, e.stats, Vec::new(), None);
        }
        let stop = e.run(&shared);
        if matches!(stop, Stop::Found) {
            winner.fetch_min(b, Ordering::Relaxed);
        }
        (stop, e.stats, e.deepest_prefix, e.found)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .expect("thread pool");
    let branches: Vec<_> = pool.install(|| {
        (0..cands.len())
            .into_par_iter()
            .with_max_len(1)
            .map(run_branch)
            .collect()
    });
    let mut outcome = Outcome::Exhausted;
    for (stop, st, deep, found) in branches {
        if matches!(stop, Stop::Cancelled) {
            continue;
        }
        let before = stats.deepest;
        stats.merge(&st);
        if st.deepest > before {
            result.deepest_prefix = deep;
        }
        if result.code.is_none() {
            if let Some(f) = found {
                result.code = Some(prefix_code(&field, k, d, &f));
            }
        }
        match stop {
            Stop::Found => {
                outcome = Outcome::Found;
                break;
            }
            Stop::Budget => {
                outcome = Outcome::Budget;
                break;
            }
            _ => {}
        }
    }
    if outcome == Outcome::Exhausted && result.code.is_some() {
        outcome = Outcome::Found;
    }
    result.outcome = outcome;
    result.stats = stats;
    if outcome == Outcome::Budget {
        return Err(SearchError::BudgetExceeded(Box::new(result)));
    }
    Ok(result)
}

fn finish_sequential(
    e: Engine<'_>,
    stop: Stop,
    mut result: SearchResult,
) -> Result<SearchResult, SearchError> {
    let k = e.k;
    let d = result.target - 2;
    result.code = e.found.as_ref().map(|f| prefix_code(&result.field, k, d, f));
    result.deepest_prefix = e.deepest_prefix.clone();
    result.stats = e.stats.clone();
    result.outcome = match stop {
        Stop::Budget => Outcome::Budget,
        _ if result.code.is_some() => Outcome::Found,
        _ => Outcome::Exhausted,
    };
    if result.outcome == Outcome::Budget {
        if let Some(cp) = &e.opts.checkpoint {
            e.write_checkpoint(&cp.path)?;
        }
        return Err(SearchError::BudgetExceeded(Box::new(result)));
    }
    Ok(result)
}

/// Continues a search from a checkpoint file. The mode, seed and symmetry
/// setting come from the file; budget and checkpointing from `opts`.
pub fn resume(path: impl AsRef<Path>, opts: &SearchOptions) -> Result<SearchResult, SearchError> {
    let mut buf = Vec::new();
    fs::File::open(path.as_ref())?.read_to_end(&mut buf)?;
    let mut r = Reader { buf: &buf, at: 0 };
    if r.take(8)? != CHECKPOINT_MAGIC {
        return Err(SearchError::BadCheckpoint("bad magic".into()));
    }
    let m = r.u32()?;
    let poly = r.u32()?;
    let n = r.u32()? as usize;
    let target = r.u32()? as usize;
    validate(n, target)?;
    let mode = match (r.u8()?, r.u64()?) {
        (0, _) => Mode::Complete,
        (1, s) => Mode::Incomplete { sample: s as usize },
        _ => return Err(SearchError::BadCheckpoint("bad mode".into())),
    };
    let symmetry = r.u8()? != 0;
    let stop_at_first = r.u8()? != 0;
    let seed = r.u64()?;
    let opts = SearchOptions {
        mode,
        symmetry,
        seed,
        stop_at_first,
        budget: opts.budget.clone(),
        jobs: 1,
        checkpoint: opts.checkpoint.clone(),
    };
    let field = Arc::new(Field::new(m, poly)?);
    let k = n - 1;
    let d = target - 2;
    let w = walk(k, d);
    let mut stats = SearchStats::new(w.len());
    stats.nodes = r.u64()?;
    stats.solutions = r.u64()?;
    stats.deepest = r.u64()? as usize;
    if r.u32()? as usize != w.len() {
        return Err(SearchError::BadCheckpoint("depth mismatch".into()));
    }
    for t in 0..w.len() {
        stats.visits[t] = r.u64()?;
        stats.legal_sum[t] = r.u64()?;
    }
    let deepest_prefix = r.fes()?;
    let found = if r.u8()? == 1 { Some(r.fes()?) } else { None };
    let depth = r.u32()? as usize;
    if depth > w.len() {
        return Err(SearchError::BadCheckpoint("stack too deep".into()));
    }
    let mut stack = Vec::with_capacity(depth);
    for _ in 0..depth {
        let cands = r.fes()?;
        let next = r.u32()? as usize;
        if next > cands.len() || cands.iter().any(|x| !field.contains(*x)) {
            return Err(SearchError::BadCheckpoint("bad frame".into()));
        }
        stack.push(Frame { cands, next });
    }
    let stream = r.u64()?;
    let lo = r.u64()? as u128;
    let hi = r.u64()? as u128;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(lo | hi << 64);

    let mut coef = base_coef(k, d);
    let mut prefix = Vec::new();
    for (t, fr) in stack.iter().enumerate() {
        if fr.next == 0 {
            if t + 1 != stack.len() {
                return Err(SearchError::BadCheckpoint("unassigned inner frame".into()));
            }
            break;
        }
        let v = fr.cands[fr.next - 1];
        let (i, j) = w[t];
        coef[i * k + j] = v;
        prefix.push(v);
    }
    if stack.last().is_some_and(|f| f.next > 0) {
        // top frame value is overwritten before use
        prefix.pop();
    }
    let mut e = Engine {
        field: &field,
        k,
        walk: &w,
        opts: &opts,
        coef,
        prefix,
        stack,
        branch_base: 0,
        rng,
        stats,
        deepest_prefix,
        found,
        hook: None,
    };
    let nodes = AtomicU64::new(0);
    let winner = AtomicUsize::new(usize::MAX);
    let shared = Shared {
        nodes: &nodes,
        start: Instant::now(),
        winner: &winner,
    };
    let stop = e.run(&shared);
    let result = SearchResult {
        field: field.clone(),
        n,
        target,
        outcome: Outcome::Exhausted,
        code: None,
        deepest_prefix: Vec::new(),
        complete: matches!(mode, Mode::Complete),
        stats: SearchStats::default(),
    };
    finish_sequential(e, stop, result)
}

/// Every prefix accepted by a complete traversal, grouped by length:
/// `out[t]` holds the surviving assignments of walk positions 0..=t.
pub fn surviving_prefixes(
    field: Arc<Field>,
    n: usize,
    target: usize,
    symmetry: bool,
) -> Result<Vec<Vec<Vec<Fe>>>, SearchError> {
    validate(n, target)?;
    let nfree = walk(n - 1, target - 2).len();
    let mut out: Vec<Vec<Vec<Fe>>> = vec![Vec::new(); nfree];
    let mut hook = |p: &[Fe]| out[p.len() - 1].push(p.to_vec());
    let opts = SearchOptions {
        symmetry,
        stop_at_first: false,
        ..SearchOptions::default()
    };
    search_with_hook(field, n, target, &opts, Some(&mut hook))?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaStatus {
    Exact,
    LowerBound,
}

#[derive(Clone, Debug)]
pub struct DeltaResult {
    pub delta: usize,
    pub status: DeltaStatus,
    /// A code achieving `delta` (None when delta is 2, which needs no search).
    pub code: Option<CodeSpec>,
    /// Search statistics per attempted target, starting at 3.
    pub attempts: Vec<(usize, Outcome, SearchStats)>,
}

/// Largest free distance reachable over `field` at block length `n`, by
/// complete searches with increasing targets. Exact when a complete search
/// fails one above; a lower bound when the budget runs out first.
pub fn establish_delta(
    field: Arc<Field>,
    n: usize,
    budget: &Budget,
    jobs: usize,
) -> Result<DeltaResult, SearchError> {
    let start = Instant::now();
    let mut used = 0u64;
    let mut best: Option<CodeSpec> = None;
    let mut attempts = Vec::new();
    let mut target = 3;
    loop {
        let remaining = Budget {
            max_nodes: budget.max_nodes.map(|m| m.saturating_sub(used)),
            max_time: budget.max_time.map(|t| t.saturating_sub(start.elapsed())),
        };
        let opts = SearchOptions {
            budget: remaining,
            jobs,
            ..SearchOptions::complete()
        };
        let delta_so_far = target - 1;
        if target - 2 >= MAX_ROWS {
            return Ok(DeltaResult {
                delta: delta_so_far,
                status: DeltaStatus::LowerBound,
                code: best,
                attempts,
            });
        }
        match search(field.clone(), n, target, &opts) {
            Ok(res) => {
                used += res.stats.nodes;
                attempts.push((target, res.outcome, res.stats.clone()));
                match res.code {
                    Some(c) => {
                        best = Some(c);
                        target += 1;
                    }
                    None => {
                        return Ok(DeltaResult {
                            delta: delta_so_far,
                            status: DeltaStatus::Exact,
                            code: best,
                            attempts,
                        })
                    }
                }
            }
            Err(SearchError::BudgetExceeded(res)) => {
                attempts.push((target, res.outcome, res.stats.clone()));
                return Ok(DeltaResult {
                    delta: delta_so_far,
                    status: DeltaStatus::LowerBound,
                    code: best,
                    attempts,
                });
            }
            Err(e) => return Err(e),
        }
    }
}
