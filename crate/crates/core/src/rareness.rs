//! Probability that uniformly random nonzero coefficients give an MDS code.
//!
//! Both the exact and the estimated report come from the same per-depth
//! counters of a search without symmetry filters: the number of nodes at
//! which depth ρ was reached and the summed sizes of their legal sets. The
//! conditional probability at ρ is `legal_sum / ((q-1) * visits)`; the
//! cumulative value is the product of conditionals, kept as a base-2 log.

use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::gf::Field;
use crate::search::{self, Budget, Mode, SearchError, SearchOptions, SearchResult, SearchStats};

/// Legal values tried per node by default in estimate mode.
pub const DEFAULT_PROBE_SAMPLE: usize = 3;
/// Node budget of a default probe.
pub const DEFAULT_PROBE_NODES: u64 = 2_000_000;

#[derive(Debug, Error)]
pub enum RarenessError {
    #[error("exact rareness needs a complete traversal; budget ran out after {nodes} nodes")]
    BudgetExceeded { nodes: u64 },
    #[error("degree must be at least 1")]
    BadDegree,
    #[error(transparent)]
    Search(#[from] SearchError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DepthRow {
    /// Walk index ρ (0-based).
    pub depth: usize,
    /// Coefficient assigned at this depth, (degree, 0-based column).
    pub position: (usize, usize),
    pub conditional: f64,
    pub log2_cumulative: f64,
    /// Nodes that reached this depth.
    pub samples: u64,
}

impl DepthRow {
    pub fn cumulative(&self) -> f64 {
        self.log2_cumulative.exp2()
    }

    pub fn log10_cumulative(&self) -> f64 {
        self.log2_cumulative * std::f64::consts::LOG10_2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RarenessReport {
    pub m: u32,
    pub n: usize,
    pub degree: usize,
    pub exact: bool,
    pub rows: Vec<DepthRow>,
}

impl RarenessReport {
    /// Rareness of the whole sequence space (last depth), as a base-2 log.
    /// A code with no free coefficient is MDS with certainty.
    pub fn log2_value(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.log2_cumulative)
    }

    pub fn value(&self) -> f64 {
        self.log2_value().exp2()
    }

    pub fn log10_value(&self) -> f64 {
        self.log2_value() * std::f64::consts::LOG10_2
    }

    /// `depth,conditional,cumulative,samples`, one line per depth.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("depth,conditional,cumulative,samples\n");
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{},{}",
                r.depth,
                r.conditional,
                format_log2(r.log2_cumulative),
                r.samples
            )
            .unwrap();
        }
        s
    }

    fn from_stats(field: &Field, n: usize, degree: usize, stats: &SearchStats, exact: bool) -> Self {
        let q1 = (field.size() - 1) as f64;
        let positions = search::walk(n - 1, degree);
        let mut acc = 0.0f64;
        let rows = positions
            .iter()
            .enumerate()
            .map(|(d, &position)| {
                let visits = stats.visits[d];
                let conditional = if visits == 0 {
                    0.0
                } else {
                    stats.legal_sum[d] as f64 / (q1 * visits as f64)
                };
                acc += conditional.log2();
                DepthRow {
                    depth: d,
                    position,
                    conditional,
                    log2_cumulative: acc,
                    samples: visits,
                }
            })
            .collect();
        RarenessReport {
            m: field.m(),
            n,
            degree,
            exact,
            rows,
        }
    }
}

/// Decimal rendering of 2^l2 that survives values far below f64 range.
pub fn format_log2(l2: f64) -> String {
    if l2 == f64::NEG_INFINITY {
        return "0".into();
    }
    let l10 = l2 * std::f64::consts::LOG10_2;
    let e = l10.floor();
    let mut mant = 10f64.powf(l10 - e);
    let mut e = e as i64;
    if (mant * 1e4).round() / 1e4 >= 10.0 {
        mant /= 10.0;
        e += 1;
    }
    format!("{mant:.4}e{e}")
}

fn run(
    field: Arc<Field>,
    n: usize,
    degree: usize,
    opts: &SearchOptions,
) -> Result<(SearchResult, bool), RarenessError> {
    if degree == 0 {
        return Err(RarenessError::BadDegree);
    }
    match search::search(field, n, degree + 2, opts) {
        Ok(r) => Ok((r, true)),
        Err(SearchError::BudgetExceeded(r)) => Ok((*r, false)),
        Err(e) => Err(e.into()),
    }
}

/// Exact rareness for degree `degree`, by traversing every canonical
/// sequence (r_{0,*} = 1, r_{1,k} = 1 fixed, no other symmetry reduction).
pub fn rareness_exact(
    field: Arc<Field>,
    n: usize,
    degree: usize,
    budget: &Budget,
    jobs: usize,
) -> Result<RarenessReport, RarenessError> {
    let opts = SearchOptions {
        mode: Mode::Complete,
        symmetry: false,
        stop_at_first: false,
        budget: budget.clone(),
        jobs,
        ..SearchOptions::default()
    };
    let (res, finished) = run(field.clone(), n, degree, &opts)?;
    if !finished {
        return Err(RarenessError::BudgetExceeded {
            nodes: res.stats.nodes,
        });
    }
    Ok(RarenessReport::from_stats(&field, n, degree, &res.stats, true))
}

/// Estimated rareness from an incomplete traversal that tries at most
/// `sample` legal values per node. A budget stop still yields a report
/// over the nodes visited so far.
pub fn rareness_estimate(
    field: Arc<Field>,
    n: usize,
    degree: usize,
    sample: usize,
    seed: u64,
    budget: &Budget,
    jobs: usize,
) -> Result<RarenessReport, RarenessError> {
    let opts = SearchOptions {
        mode: Mode::Incomplete { sample },
        symmetry: false,
        stop_at_first: false,
        seed,
        budget: budget.clone(),
        jobs,
        checkpoint: None,
    };
    let (res, _) = run(field.clone(), n, degree, &opts)?;
    Ok(RarenessReport::from_stats(&field, n, degree, &res.stats, false))
}

/// One curve of the per-depth rareness plot: exact rows for as many depths
/// as a complete traversal finishes within `exact_budget`, continued with
/// estimated conditionals up to `degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct FigureSeries {
    pub n: usize,
    pub rows: Vec<DepthRow>,
    /// Number of leading rows that are exact.
    pub exact_rows: usize,
}

impl FigureSeries {
    pub const CSV_HEADER: &'static str = "n,depth,conditional,cumulative,samples,mode";

    pub fn csv_rows(&self) -> String {
        let mut s = String::new();
        for (i, r) in self.rows.iter().enumerate() {
            let mode = if i < self.exact_rows { "exact" } else { "estimate" };
            writeln!(
                s,
                "{},{},{},{},{},{mode}",
                self.n,
                r.depth,
                r.conditional,
                format_log2(r.log2_cumulative),
                r.samples
            )
            .unwrap();
        }
        s
    }
}

#[allow(clippy::too_many_arguments)]
pub fn figure_series(
    field: Arc<Field>,
    n: usize,
    degree: usize,
    exact_budget: &Budget,
    sample: usize,
    seed: u64,
    probe_budget: &Budget,
    jobs: usize,
) -> Result<FigureSeries, RarenessError> {
    let mut exact: Vec<DepthRow> = Vec::new();
    for d in 1..=degree {
        match rareness_exact(field.clone(), n, d, exact_budget, jobs) {
            Ok(r) => exact = r.rows,
            Err(RarenessError::BudgetExceeded { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    let est = rareness_estimate(field, n, degree, sample, seed, probe_budget, jobs)?;
    let exact_rows = exact.len();
    let mut acc = exact.last().map_or(0.0, |r| r.log2_cumulative);
    let mut rows = exact;
    for r in est.rows.into_iter().skip(exact_rows) {
        acc += r.conditional.log2();
        rows.push(DepthRow {
            log2_cumulative: acc,
            ..r
        });
    }
    Ok(FigureSeries {
        n,
        rows,
        exact_rows,
    })
}

/// log10 of 2^{m-1} (2^{m-1}-1)! / (2^m-1)^{2^m-3}, the chance that random
/// coefficients land on the distance-4 construction for rate (2^{m-1}-1)/2^{m-1}.
pub fn d4_construction_log10(m: u32) -> f64 {
    assert!(m >= 2, "needs m >= 2");
    let half = 1u64 << (m - 1);
    let q1 = ((1u64 << m) - 1) as f64;
    let log_fact: f64 = (2..half).map(|i| (i as f64).log10()).sum();
    (half as f64).log10() + log_fact - ((1u64 << m) - 3) as f64 * q1.log10()
}

pub fn d4_construction_rareness(m: u32) -> f64 {
    10f64.powf(d4_construction_log10(m))
}
