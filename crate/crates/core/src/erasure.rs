//! Streaming encoder, sliding-window erasure decoder, channel simulation,
//! and hybrid codes (an MDS prefix followed by random higher-degree terms).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::codec::CodeSpec;
use crate::gf::{Fe, Field};

/// Block `t` of a stream: k information symbols followed by the parity.
pub type Block = Vec<Fe>;

/// Systematic encoding: parity p_t = sum_i sum_j r_{i,j} info_{t-i,j}.
pub fn encode_stream(code: &CodeSpec, info: &[Vec<Fe>]) -> Vec<Block> {
    let mut enc = Encoder::new(code);
    info.iter().map(|u| enc.push(u)).collect()
}

/// Incremental encoder keeping the last D information blocks.
pub struct Encoder<'a> {
    code: &'a CodeSpec,
    history: Vec<Vec<Fe>>,
}

impl<'a> Encoder<'a> {
    pub fn new(code: &'a CodeSpec) -> Self {
        Encoder {
            code,
            history: Vec::new(),
        }
    }

    pub fn push(&mut self, info: &[Fe]) -> Block {
        let f = self.code.field();
        let k = self.code.k();
        assert_eq!(info.len(), k, "information block must have k symbols");
        self.history.insert(0, info.to_vec());
        self.history.truncate(self.code.degree() + 1);
        let mut p = Fe::ZERO;
        for (i, u) in self.history.iter().enumerate() {
            for (j, &x) in u.iter().enumerate() {
                p += f.mul(self.code.coeff(i, j), x);
            }
        }
        let mut block = info.to_vec();
        block.push(p);
        block
    }
}

/// Symbol coordinates: (block, position), position k being the parity.
pub type Symbol = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recovery {
    pub symbol: Symbol,
    /// Block whose arrival determined the symbol.
    pub at: usize,
    pub value: Fe,
}

impl Recovery {
    pub fn delay(&self) -> usize {
        self.at - self.symbol.0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ErasureTrace {
    pub erased: Vec<Symbol>,
    pub recovered: Vec<Recovery>,
    pub unrecovered: Vec<Symbol>,
}

impl ErasureTrace {
    pub fn recovered_at(&self, s: Symbol) -> Option<usize> {
        self.recovered.iter().find(|r| r.symbol == s).map(|r| r.at)
    }

    pub fn max_delay(&self) -> Option<usize> {
        self.recovered.iter().map(Recovery::delay).max()
    }

    pub fn fully_recovered(&self) -> bool {
        self.unrecovered.is_empty()
    }
}

/// One linear equation over unknown symbols: sum coef * x = rhs.
#[derive(Clone, Debug)]
struct Row {
    terms: BTreeMap<u64, Fe>,
    rhs: Fe,
}

impl Row {
    fn add_scaled(&mut self, f: &Field, other: &Row, c: Fe) {
        for (&v, &a) in &other.terms {
            let e = self.terms.entry(v).or_insert(Fe::ZERO);
            *e += f.mul(c, a);
            if e.is_zero() {
                self.terms.remove(&v);
            }
        }
        self.rhs += f.mul(c, other.rhs);
    }

    fn scale(&mut self, f: &Field, c: Fe) {
        for a in self.terms.values_mut() {
            *a = f.mul(*a, c);
        }
        self.rhs = f.mul(self.rhs, c);
    }
}

/// Sequential erasure decoder. Each arriving block contributes one parity
/// equation; the system over still-unknown symbols is kept in reduced
/// row-echelon form, and every unknown whose row has no other unknown is
/// committed. Unknowns from blocks more than `window` behind are given up
/// and eliminated from the system.
pub struct Decoder {
    code: CodeSpec,
    window: usize,
    t: usize,
    /// Last D+1 received blocks (newest first), None for erased symbols.
    recent: Vec<Vec<Option<Fe>>>,
    /// Unknown id -> symbol.
    vars: BTreeMap<u64, Symbol>,
    by_symbol: HashMap<Symbol, u64>,
    next_var: u64,
    /// Pivot variable -> row.
    rows: BTreeMap<u64, Row>,
    trace: ErasureTrace,
}

impl Decoder {
    pub fn new(code: CodeSpec, window: usize) -> Self {
        Decoder {
            code,
            window,
            t: 0,
            recent: Vec::new(),
            vars: BTreeMap::new(),
            by_symbol: HashMap::new(),
            next_var: 0,
            rows: BTreeMap::new(),
            trace: ErasureTrace::default(),
        }
    }

    /// Default window: free distance plus eight blocks.
    pub fn default_window(code: &CodeSpec) -> usize {
        code.degree() + 2 + 8
    }

    /// Feeds the next block; returns the symbols recovered on its arrival.
    pub fn push(&mut self, block: &[Option<Fe>]) -> Vec<Recovery> {
        let n = self.code.n();
        assert_eq!(block.len(), n, "block must have n symbols");
        let t = self.t;
        for (pos, s) in block.iter().enumerate() {
            if s.is_none() {
                let id = self.next_var;
                self.next_var += 1;
                self.vars.insert(id, (t, pos));
                self.by_symbol.insert((t, pos), id);
                self.trace.erased.push((t, pos));
            }
        }
        self.recent.insert(0, block.to_vec());
        self.recent.truncate(self.code.degree() + 1);

        if let Some(row) = self.equation() {
            self.insert(row);
        }
        let out = self.commit();
        self.abandon_old();
        self.t += 1;
        out
    }

    /// Parity equation of the newest block over current unknowns, or None
    /// if it involves a symbol that was given up.
    fn equation(&self) -> Option<Row> {
        let f = self.code.field();
        let k = self.code.k();
        let t = self.t;
        let mut row = Row {
            terms: BTreeMap::new(),
            rhs: Fe::ZERO,
        };
        for (i, blk) in self.recent.iter().enumerate() {
            let b = t - i;
            let last = if i == 0 { k + 1 } else { k };
            for pos in 0..last {
                let c = if pos == k { Fe::ONE } else { self.code.coeff(i, pos) };
                if c.is_zero() {
                    continue;
                }
                match blk[pos] {
                    Some(x) => row.rhs += f.mul(c, x),
                    None => {
                        let id = *self.by_symbol.get(&(b, pos))?;
                        *row.terms.entry(id).or_insert(Fe::ZERO) += c;
                    }
                }
            }
        }
        Some(row)
    }

    fn insert(&mut self, mut row: Row) {
        let f = self.code.field().clone();
        let pivots: Vec<u64> = row
            .terms
            .keys()
            .copied()
            .filter(|v| self.rows.contains_key(v))
            .collect();
        for p in pivots {
            if let Some(&c) = row.terms.get(&p) {
                let pr = self.rows[&p].clone();
                row.add_scaled(&f, &pr, c);
            }
        }
        // oldest unknown becomes the pivot
        let Some((&p, &c)) = row.terms.iter().next() else {
            return;
        };
        row.scale(&f, f.inv(c).expect("nonzero"));
        for other in self.rows.values_mut() {
            if let Some(&a) = other.terms.get(&p) {
                other.add_scaled(&f, &row, a);
            }
        }
        self.rows.insert(p, row);
    }

    fn commit(&mut self) -> Vec<Recovery> {
        let solved: Vec<u64> = self
            .rows
            .iter()
            .filter(|(_, r)| r.terms.len() == 1)
            .map(|(&p, _)| p)
            .collect();
        let mut out = Vec::new();
        for p in solved {
            let row = self.rows.remove(&p).expect("present");
            let symbol = self.vars.remove(&p).expect("known var");
            self.by_symbol.remove(&symbol);
            self.set_recent(symbol, row.rhs);
            let r = Recovery {
                symbol,
                at: self.t,
                value: row.rhs,
            };
            self.trace.recovered.push(r.clone());
            out.push(r);
        }
        out
    }

    fn set_recent(&mut self, (b, pos): Symbol, v: Fe) {
        if let Some(i) = self.t.checked_sub(b) {
            if let Some(blk) = self.recent.get_mut(i) {
                blk[pos] = Some(v);
            }
        }
    }

    fn abandon_old(&mut self) {
        let Some(limit) = self.t.checked_sub(self.window) else {
            return;
        };
        let old: Vec<u64> = self
            .vars
            .iter()
            .filter(|(_, s)| s.0 < limit)
            .map(|(&v, _)| v)
            .collect();
        for v in old {
            self.project_out(v);
            let s = self.vars.remove(&v).expect("known var");
            self.by_symbol.remove(&s);
            self.trace.unrecovered.push(s);
            // the symbol may still sit in `recent` as erased; equations that
            // touch it are dropped from now on
        }
    }

    /// Removes `v` from the system, keeping every consequence that does not
    /// involve it.
    fn project_out(&mut self, v: u64) {
        let f = self.code.field().clone();
        if self.rows.remove(&v).is_some() {
            return;
        }
        let Some(&key) = self
            .rows
            .iter()
            .find(|(_, r)| r.terms.contains_key(&v))
            .map(|(k, _)| k)
        else {
            return;
        };
        let mut r = self.rows.remove(&key).expect("present");
        let c = r.terms[&v];
        r.scale(&f, f.inv(c).expect("nonzero"));
        for other in self.rows.values_mut() {
            if let Some(&a) = other.terms.get(&v) {
                other.add_scaled(&f, &r, a);
            }
        }
    }

    /// Gives up on every symbol still unknown.
    pub fn finish(mut self) -> ErasureTrace {
        let rest: Vec<Symbol> = self.vars.values().copied().collect();
        self.trace.unrecovered.extend(rest);
        self.trace.unrecovered.sort_unstable();
        self.trace
    }

    pub fn trace(&self) -> &ErasureTrace {
        &self.trace
    }
}

/// Decodes a received stream with erasures marked as None.
pub fn decode_erasures(code: &CodeSpec, received: &[Vec<Option<Fe>>], window: usize) -> ErasureTrace {
    let mut d = Decoder::new(code.clone(), window);
    for b in received {
        d.push(b);
    }
    d.finish()
}

/// Erases the given symbols of a stream.
pub fn apply_erasures(stream: &[Block], erased: &[Symbol]) -> Vec<Vec<Option<Fe>>> {
    let mut rx: Vec<Vec<Option<Fe>>> = stream
        .iter()
        .map(|b| b.iter().map(|&x| Some(x)).collect())
        .collect();
    for &(b, p) in erased {
        rx[b][p] = None;
    }
    rx
}

/// An MDS prefix followed by `degrees` rows of uniformly random nonzero
/// coefficients drawn from a seeded generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HybridCode {
    pub prefix: CodeSpec,
    pub tail: Vec<Vec<Fe>>,
    pub seed: u64,
}

impl HybridCode {
    /// The full code, prefix degrees first.
    pub fn code(&self) -> CodeSpec {
        let mut rows = self.prefix.rows().to_vec();
        rows.extend(self.tail.iter().cloned());
        CodeSpec::new(self.prefix.field().clone(), rows).expect("same width")
    }
}

pub fn hybrid_extend(prefix: &CodeSpec, seed: u64, degrees: usize) -> HybridCode {
    let f = prefix.field();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tail = (0..degrees)
        .map(|_| {
            (0..prefix.k())
                .map(|_| Fe(rng.gen_range(1..f.size()) as u16))
                .collect()
        })
        .collect();
    HybridCode {
        prefix: prefix.clone(),
        tail,
        seed,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LossModel {
    /// Each symbol lost independently with probability p.
    Iid(f64),
    /// Two-state Gilbert channel with mean good-run length `g` and mean
    /// bad-run length `b` (in symbols); every symbol sent in the bad state is lost.
    Gilbert { g: f64, b: f64 },
}

impl fmt::Display for LossModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossModel::Iid(p) => write!(f, "iid:{p}"),
            LossModel::Gilbert { g, b } => write!(f, "gilbert:{g}:{b}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("bad loss model `{0}`: expected iid:<p> or gilbert:<g>:<b>")]
pub struct LossParseError(pub String);

impl std::str::FromStr for LossModel {
    type Err = LossParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LossParseError(s.to_string());
        let num = |t: &str| t.parse::<f64>().ok().filter(|x| x.is_finite());
        let parts: Vec<&str> = s.split(':').collect();
        match parts[..] {
            ["iid", p] => num(p)
                .filter(|p| (0.0..=1.0).contains(p))
                .map(LossModel::Iid)
                .ok_or_else(bad),
            ["gilbert", g, b] => match (num(g), num(b)) {
                (Some(g), Some(b)) if g >= 1.0 && b >= 1.0 => Ok(LossModel::Gilbert { g, b }),
                _ => Err(bad()),
            },
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossScope {
    All,
    ParityOnly,
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub loss: LossModel,
    pub scope: LossScope,
    pub blocks: usize,
    pub seed: u64,
    /// Decoder window; None for the default.
    pub window: Option<usize>,
}

/// Statistics over information symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimStats {
    pub seed: u64,
    pub loss: String,
    pub blocks: usize,
    /// Information symbols received directly.
    pub delivered: u64,
    /// Erased information symbols the decoder recovered.
    pub recovered: u64,
    pub unrecovered: u64,
    /// Recovered values that differ from what was sent (always 0 for a
    /// correct decoder).
    pub wrong: u64,
    /// delay -> number of information symbols (delivered ones at delay 0).
    pub delay_histogram: BTreeMap<usize, u64>,
}

impl SimStats {
    pub fn total(&self) -> u64 {
        self.delivered + self.recovered + self.unrecovered
    }

    pub fn unrecovered_fraction(&self) -> f64 {
        self.unrecovered as f64 / self.total().max(1) as f64
    }

    /// Delay quantile over every information symbol that became available.
    pub fn delay_quantile(&self, q: f64) -> usize {
        let n: u64 = self.delay_histogram.values().sum();
        if n == 0 {
            return 0;
        }
        let rank = ((q * n as f64).ceil() as u64).clamp(1, n);
        let mut acc = 0;
        for (&d, &c) in &self.delay_histogram {
            acc += c;
            if acc >= rank {
                return d;
            }
        }
        0
    }

    pub fn max_delay(&self) -> usize {
        self.delay_histogram.keys().next_back().copied().unwrap_or(0)
    }

    pub const CSV_HEADER: &'static str =
        "seed,loss,blocks,delivered,recovered,unrecovered,p50,p95,p99,max";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.seed,
            self.loss,
            self.blocks,
            self.delivered,
            self.recovered,
            self.unrecovered,
            self.delay_quantile(0.5),
            self.delay_quantile(0.95),
            self.delay_quantile(0.99),
            self.max_delay()
        )
    }
}

struct Channel {
    model: LossModel,
    bad: bool,
}

impl Channel {
    fn lose(&mut self, rng: &mut ChaCha8Rng) -> bool {
        match self.model {
            LossModel::Iid(p) => rng.gen_bool(p.clamp(0.0, 1.0)),
            LossModel::Gilbert { g, b } => {
                let flip = if self.bad { 1.0 / b } else { 1.0 / g };
                if rng.gen_bool(flip.clamp(0.0, 1.0)) {
                    self.bad = !self.bad;
                }
                self.bad
            }
        }
    }
}

/// Sends `blocks` random information blocks through the channel and the
/// decoder. Deterministic for a given seed.
pub fn simulate(code: &CodeSpec, cfg: &SimConfig) -> SimStats {
    let f: &Arc<Field> = code.field();
    let k = code.k();
    let window = cfg.window.unwrap_or_else(|| Decoder::default_window(code));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut chan = Channel {
        model: cfg.loss,
        bad: false,
    };
    let mut enc = Encoder::new(code);
    let mut dec = Decoder::new(code.clone(), window);
    let mut sent: HashMap<Symbol, Fe> = HashMap::new();
    let mut stats = SimStats {
        seed: cfg.seed,
        loss: cfg.loss.to_string(),
        blocks: cfg.blocks,
        delivered: 0,
        recovered: 0,
        unrecovered: 0,
        wrong: 0,
        delay_histogram: BTreeMap::new(),
    };
    let account = |stats: &mut SimStats, sent: &mut HashMap<Symbol, Fe>, recs: Vec<Recovery>| {
        for r in recs {
            let orig = sent.remove(&r.symbol);
            if r.symbol.1 < k {
                stats.recovered += 1;
                *stats.delay_histogram.entry(r.delay()).or_default() += 1;
                if orig != Some(r.value) {
                    stats.wrong += 1;
                }
            }
        }
    };
    for _ in 0..cfg.blocks {
        let info: Vec<Fe> = (0..k).map(|_| Fe(rng.gen_range(0..f.size()) as u16)).collect();
        let block = enc.push(&info);
        let t = dec.t;
        let rx: Vec<Option<Fe>> = block
            .iter()
            .enumerate()
            .map(|(pos, &x)| {
                let exposed = cfg.scope == LossScope::All || pos == k;
                if exposed && chan.lose(&mut rng) {
                    sent.insert((t, pos), x);
                    None
                } else {
                    if pos < k {
                        stats.delivered += 1;
                        *stats.delay_histogram.entry(0).or_default() += 1;
                    }
                    Some(x)
                }
            })
            .collect();
        let recs = dec.push(&rx);
        account(&mut stats, &mut sent, recs);
    }
    let trace = dec.finish();
    stats.unrecovered = trace.unrecovered.iter().filter(|s| s.1 < k).count() as u64;
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdp::cdp_via_minors;

    fn table2() -> CodeSpec {
        let f = Arc::new(Field::with_default_poly(3).unwrap());
        CodeSpec::from_log_rows(f, 2, &[vec![0], vec![1], vec![4], vec![3]]).unwrap()
    }

    #[test]
    fn impulse_response_is_parity_polynomial() {
        let code = table2();
        let f = code.field().clone();
        let v = f.exp(2);
        let mut info = vec![vec![Fe::ZERO]; 7];
        info[0][0] = v;
        let s = encode_stream(&code, &info);
        for (t, b) in s.iter().enumerate() {
            assert_eq!(b[1], f.mul(v, code.coeff(t, 0)));
        }
    }

    #[test]
    fn zero_info_encodes_to_zero() {
        let code = table2();
        let s = encode_stream(&code, &vec![vec![Fe::ZERO]; 5]);
        assert!(s.iter().flatten().all(|x| x.is_zero()));
    }

    #[test]
    fn encoded_prefix_has_zero_syndrome() {
        let code = table2();
        let f = code.field().clone();
        let info: Vec<Vec<Fe>> = (0..6).map(|t| vec![Fe(((t * 5 + 3) % 8) as u16)]).collect();
        let s = encode_stream(&code, &info);
        let h = code.parity_truncated(5);
        let flat: Vec<Fe> = s.iter().flatten().copied().collect();
        for r in 0..h.rows() {
            let mut acc = Fe::ZERO;
            for (c, &x) in flat.iter().enumerate() {
                acc += f.mul(h.get(r, c), x);
            }
            assert!(acc.is_zero());
        }
    }

    #[test]
    fn no_erasures_empty_trace() {
        let code = table2();
        let s = encode_stream(&code, &vec![vec![Fe(3)]; 4]);
        let t = decode_erasures(&code, &apply_erasures(&s, &[]), 10);
        assert_eq!(t, ErasureTrace::default());
    }

    #[test]
    fn single_erasure_recovered_immediately() {
        let code = table2();
        let s = encode_stream(&code, &[vec![Fe(5)], vec![Fe(1)]]);
        let t = decode_erasures(&code, &apply_erasures(&s, &[(0, 0)]), 10);
        assert_eq!(t.recovered_at((0, 0)), Some(0));
        assert_eq!(t.recovered[0].value, Fe(5));
    }

    #[test]
    fn impulse_pattern_is_invisible() {
        let code = table2();
        let s = encode_stream(&code, &vec![vec![Fe(2)]; 12]);
        let erased: Vec<Symbol> = std::iter::once((0, 0)).chain((0..5).map(|b| (b, 1))).collect();
        let t = decode_erasures(&code, &apply_erasures(&s, &erased), 6);
        assert!(t.unrecovered.contains(&(0, 0)));
        for r in &t.recovered {
            assert_eq!(s[r.symbol.0][r.symbol.1], r.value);
        }
    }

    #[test]
    fn hybrid_keeps_prefix_profile() {
        let code = table2();
        assert_eq!(hybrid_extend(&code, 1, 0).code(), code);
        let a = hybrid_extend(&code, 1, 3);
        let b = hybrid_extend(&code, 2, 3);
        assert_ne!(a.tail, b.tail);
        for h in [a, b] {
            assert!(h.tail.iter().flatten().all(|x| !x.is_zero()));
            let full = h.code();
            assert_eq!(full.truncate(4), code);
            assert!(cdp_via_minors(&full.truncate(4)).unwrap().is_mds());
        }
    }

    #[test]
    fn lossless_and_parity_only_channels() {
        let code = table2();
        let s = simulate(&code, &SimConfig {
            loss: LossModel::Iid(0.0),
            scope: LossScope::All,
            blocks: 200,
            seed: 3,
            window: None,
        });
        assert_eq!(s.delivered, 200);
        assert_eq!(s.max_delay(), 0);
        let s = simulate(&code, &SimConfig {
            loss: LossModel::Iid(1.0),
            scope: LossScope::ParityOnly,
            blocks: 200,
            seed: 3,
            window: None,
        });
        assert_eq!((s.delivered, s.unrecovered), (200, 0));
        assert_eq!(s.max_delay(), 0);
    }

    #[test]
    fn quantiles() {
        let mut s = SimStats {
            seed: 0,
            loss: String::new(),
            blocks: 0,
            delivered: 0,
            recovered: 0,
            unrecovered: 0,
            wrong: 0,
            delay_histogram: BTreeMap::new(),
        };
        assert_eq!(s.delay_quantile(0.5), 0);
        s.delay_histogram.insert(0, 90);
        s.delay_histogram.insert(3, 9);
        s.delay_histogram.insert(7, 1);
        assert_eq!(s.delay_quantile(0.5), 0);
        assert_eq!(s.delay_quantile(0.95), 3);
        assert_eq!(s.delay_quantile(0.99), 3);
        assert_eq!(s.delay_quantile(0.995), 7);
        assert_eq!(s.max_delay(), 7);
    }

    #[test]
    fn loss_model_round_trips() {
        for m in [LossModel::Iid(0.05), LossModel::Gilbert { g: 50.0, b: 2.5 }] {
            assert_eq!(m.to_string().parse::<LossModel>(), Ok(m));
        }
        for bad in ["iid", "iid:1.5", "gilbert:0.5:2", "burst:1", "iid:x"] {
            assert!(bad.parse::<LossModel>().is_err(), "{bad}");
        }
    }
}
