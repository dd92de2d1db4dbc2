//! Column distance profiles, computed two independent ways, and the
//! profile-preserving code transforms.
//!
//! The minors route finds the largest degree `D'` for which H'^(D') is
//! k-superregular; that fixes `d_l = l + 2` for `l <= D'` and says the
//! chain breaks at `D' + 1`, nothing more. The brute-force route encodes
//! every information sequence with a nonzero first block.

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::codec::CodeSpec;
use crate::gf::{Fe, Field};
use crate::minors::{self, MinorsError, ProperSubmatrix};

/// Default number of encodings the brute-force oracle may perform.
pub const DEFAULT_BRUTE_BUDGET: u64 = 1 << 26;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CdpError {
    #[error("brute force needs {needed} encodings, budget is {budget}")]
    BudgetExceeded { needed: f64, budget: u64 },
    #[error("scaling constant must be nonzero")]
    ZeroScalar,
    #[error("a rate 1/2 code cannot be shortened")]
    CannotShortenRateHalf,
    #[error("shortening position {j0} outside 1..={k}")]
    BadPosition { j0: usize, k: usize },
    #[error(transparent)]
    Minors(#[from] MinorsError),
}

/// Column distance profile d_0, d_1, ..., d_L.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Profile {
    /// `None` where the distance was not determined.
    pub distances: Vec<Option<usize>>,
    /// Largest j with d_0..=d_j = 2..=j+2; `None` when even d_0 < 2.
    pub mds_depth: Option<usize>,
    /// Maximum coefficient degree D of the code.
    pub degree: usize,
    /// First singular anchored submatrix past the MDS prefix (minors route only).
    pub witness: Option<ProperSubmatrix>,
}

impl Profile {
    /// Whether the full optimum profile [2, 3, ..., D+2] is achieved.
    pub fn is_mds(&self) -> bool {
        self.mds_depth == Some(self.degree)
    }

    /// Largest distance of the MDS chain, mds_depth + 2.
    pub fn achieved_distance(&self) -> Option<usize> {
        self.mds_depth.map(|d| d + 2)
    }

    /// Free distance when it is determined: D + 2 for MDS codes, otherwise
    /// d_D if it was computed (distances stay constant past degree D).
    pub fn free_distance(&self) -> Option<usize> {
        if self.is_mds() {
            return Some(self.degree + 2);
        }
        self.distances.get(self.degree).copied().flatten()
    }

    /// The MDS prefix [2, 3, ..., mds_depth + 2].
    pub fn mds_prefix(&self) -> Vec<usize> {
        match self.mds_depth {
            Some(d) => (2..=d + 2).collect(),
            None => Vec::new(),
        }
    }

    fn from_distances(distances: Vec<usize>, degree: usize) -> Profile {
        let mds_depth = distances
            .iter()
            .enumerate()
            .take_while(|(l, &d)| d == l + 2)
            .last()
            .map(|(l, _)| l);
        Profile {
            distances: distances.into_iter().map(Some).collect(),
            mds_depth,
            degree,
            witness: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CdpOptions {
    /// Encodings allowed for filling in distances past the MDS prefix.
    pub brute_budget: u64,
    /// Cap on anchored submatrices per superregularity check.
    pub minor_cap: u64,
}

impl Default for CdpOptions {
    fn default() -> Self {
        CdpOptions {
            brute_budget: DEFAULT_BRUTE_BUDGET,
            minor_cap: minors::DEFAULT_CAP,
        }
    }
}

/// Divides every column by its constant term so that r_{0,j} = 1. The
/// result has the same weight structure. Returns None if some r_{0,j} = 0.
pub fn normalize(code: &CodeSpec) -> Option<CodeSpec> {
    let f = code.field();
    let r0 = &code.rows()[0];
    if r0.iter().any(|x| x.is_zero()) {
        return None;
    }
    let rows = code
        .rows()
        .iter()
        .map(|row| row.iter().zip(r0).map(|(&x, &c)| f.div(x, c)).collect())
        .collect();
    Some(CodeSpec::new(f.clone(), rows).expect("same shape"))
}

/// Profile from the superregularity chain, with post-break distances filled
/// in by brute force when affordable.
pub fn cdp_via_minors(code: &CodeSpec) -> Result<Profile, CdpError> {
    cdp_via_minors_with(code, &CdpOptions::default())
}

pub fn cdp_via_minors_with(code: &CodeSpec, opts: &CdpOptions) -> Result<Profile, CdpError> {
    let d = code.degree();
    let Some(norm) = normalize(code) else {
        // some r_{0,j} = 0: a weight-1 information symbol yields a weight-1 block
        let mut p = brute_or_unknown(code, d, opts.brute_budget);
        p.mds_depth = None;
        return Ok(p);
    };
    let count = minors::count_anchored(code.k(), d);
    if count > opts.minor_cap {
        return Err(MinorsError::SizeOverflow {
            count,
            cap: opts.minor_cap,
        }
        .into());
    }
    let mut mds_depth = None;
    let mut witness = None;
    for level in 0..=d {
        match minors::first_singular_at_level(&norm, level)? {
            None => mds_depth = Some(level),
            Some(w) => {
                witness = Some(w);
                break;
            }
        }
    }
    let known = mds_depth.map_or(0, |x| x + 1);
    let mut distances: Vec<Option<usize>> = (0..known).map(|l| Some(l + 2)).collect();
    if known <= d {
        let tail = brute_or_unknown(code, d, opts.brute_budget);
        distances.extend(tail.distances[known..].iter().copied());
    }
    Ok(Profile {
        distances,
        mds_depth,
        degree: d,
        witness,
    })
}

fn brute_or_unknown(code: &CodeSpec, l: usize, budget: u64) -> Profile {
    match cdp_bruteforce(code, l, budget) {
        Ok(p) => p,
        Err(_) => Profile {
            distances: vec![None; l + 1],
            mds_depth: None,
            degree: code.degree(),
            witness: None,
        },
    }
}

/// Number of encodings the brute-force oracle needs at depth `l`.
pub fn brute_force_cost(code: &CodeSpec, l: usize) -> f64 {
    (code.field().size() as f64).powi((code.k() * (l + 1)) as i32)
}

/// d_0..=d_L by encoding every information sequence over L+1 blocks whose
/// first block is nonzero, with the truncated generator matrix.
pub fn cdp_bruteforce(code: &CodeSpec, l: usize, budget: u64) -> Result<Profile, CdpError> {
    let needed = brute_force_cost(code, l);
    if needed > budget as f64 {
        return Err(CdpError::BudgetExceeded { needed, budget });
    }
    let field = code.field().as_ref();
    let g = code.generator_truncated(l);
    let n = code.n();
    let k = code.k();
    let q = field.size();
    let rows: Vec<Vec<Fe>> = (0..g.rows()).map(|r| g.row(r).to_vec()).collect();

    // first information block, as an index over q^k; zero excluded
    let first_blocks: Vec<u64> = (1..(q as u64).pow(k as u32)).collect();
    let best = first_blocks
        .par_iter()
        .with_min_len(1)
        .map(|&idx| {
            let mut word = vec![Fe::ZERO; n * (l + 1)];
            let mut rem = idx;
            for j in 0..k {
                let u = Fe((rem % q as u64) as u16);
                rem /= q as u64;
                add_scaled(field, &mut word, &rows[j], u);
            }
            let mut best = vec![usize::MAX; l + 1];
            let mut search = Brute {
                field,
                rows: &rows,
                n,
                k,
                l,
                q,
                best: &mut best,
            };
            search.finish_block(&mut word, 0, 0);
            best
        })
        .reduce(
            || vec![usize::MAX; l + 1],
            |a, b| a.iter().zip(&b).map(|(x, y)| *x.min(y)).collect(),
        );
    Ok(Profile::from_distances(best, code.degree()))
}

fn add_scaled(field: &Field, word: &mut [Fe], row: &[Fe], u: Fe) {
    if u.is_zero() {
        return;
    }
    for (w, &g) in word.iter_mut().zip(row) {
        *w += field.mul(u, g);
    }
}

struct Brute<'a> {
    field: &'a Field,
    rows: &'a [Vec<Fe>],
    n: usize,
    k: usize,
    l: usize,
    q: u32,
    best: &'a mut Vec<usize>,
}

impl Brute<'_> {
    /// Block `block` of `word` is final; account for its weight and descend.
    fn finish_block(&mut self, word: &mut Vec<Fe>, block: usize, prefix_weight: usize) {
        let w = prefix_weight
            + word[block * self.n..(block + 1) * self.n]
                .iter()
                .filter(|x| !x.is_zero())
                .count();
        if w < self.best[block] {
            self.best[block] = w;
        }
        if block == self.l {
            return;
        }
        // longer prefixes weigh at least w
        if self.best[block + 1..].iter().all(|&b| w >= b) {
            return;
        }
        self.assign(word, block + 1, 0, w);
    }

    fn assign(&mut self, word: &mut Vec<Fe>, block: usize, j: usize, prefix_weight: usize) {
        if j == self.k {
            self.finish_block(word, block, prefix_weight);
            return;
        }
        let row = block * self.k + j;
        let saved: Vec<Fe> = word[block * self.n..].to_vec();
        for v in 0..self.q {
            let u = Fe(v as u16);
            add_scaled(self.field, &mut word[block * self.n..], &self.rows[row][block * self.n..], u);
            self.assign(word, block, j + 1, prefix_weight);
            word[block * self.n..].copy_from_slice(&saved);
        }
    }
}

/// r_{i,j} -> c^i r_{i,j}.
pub fn scale_transform(code: &CodeSpec, c: Fe) -> Result<CodeSpec, CdpError> {
    if c.is_zero() {
        return Err(CdpError::ZeroScalar);
    }
    let f = code.field();
    let mut ci = Fe::ONE;
    let mut rows = Vec::with_capacity(code.rows().len());
    for row in code.rows() {
        rows.push(row.iter().map(|&x| f.mul(ci, x)).collect());
        ci = f.mul(ci, c);
    }
    Ok(CodeSpec::new(f.clone(), rows).expect("same shape"))
}

/// Squares every coefficient.
pub fn frobenius_transform(code: &CodeSpec) -> CodeSpec {
    let f = code.field();
    let rows = code
        .rows()
        .iter()
        .map(|row| row.iter().map(|&x| f.square(x)).collect())
        .collect();
    CodeSpec::new(f.clone(), rows).expect("same shape")
}

/// Removes information position `j0` (1-based), giving a rate (k-1)/k code.
pub fn shorten(code: &CodeSpec, j0: usize) -> Result<CodeSpec, CdpError> {
    let k = code.k();
    if k < 2 {
        return Err(CdpError::CannotShortenRateHalf);
    }
    if j0 == 0 || j0 > k {
        return Err(CdpError::BadPosition { j0, k });
    }
    let rows = code
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(j, _)| j + 1 != j0)
                .map(|(_, &x)| x)
                .collect()
        })
        .collect();
    Ok(CodeSpec::new(code.field().clone(), rows).expect("same shape"))
}

/// Convenience for tests and callers holding a plain field.
pub fn code_from_rows(field: &Arc<Field>, rows: Vec<Vec<Fe>>) -> CodeSpec {
    CodeSpec::new(field.clone(), rows).expect("valid shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(m: u32) -> Arc<Field> {
        Arc::new(Field::with_default_poly(m).unwrap())
    }

    fn table2() -> CodeSpec {
        CodeSpec::from_log_rows(gf(3), 2, &[vec![0], vec![1], vec![4], vec![3]]).unwrap()
    }

    fn gf16_rate_two_thirds() -> CodeSpec {
        CodeSpec::from_log_rows(gf(4), 3, &[vec![0, 1], vec![4, 0], vec![1, 7]]).unwrap()
    }

    #[test]
    fn table_codes_have_full_profile() {
        let p = cdp_via_minors(&table2()).unwrap();
        assert!(p.is_mds());
        assert_eq!(p.mds_prefix(), vec![2, 3, 4, 5, 6]);
        assert_eq!(p.free_distance(), Some(6));

        let p = cdp_via_minors(&gf16_rate_two_thirds()).unwrap();
        assert_eq!(p.mds_prefix(), vec![2, 3, 4, 5]);
        assert_eq!(p.free_distance(), Some(5));
    }

    #[test]
    fn repeated_degree_one_column_breaks_at_one() {
        let f = gf(3);
        let code = code_from_rows(&f, vec![vec![Fe::ONE; 2], vec![f.exp(2), f.exp(2)]]);
        let p = cdp_via_minors(&code).unwrap();
        assert_eq!(p.mds_depth, Some(0));
        assert!(p.witness.is_some());
        // the tail distance comes from brute force: d_1 = 2 here
        assert_eq!(p.distances, vec![Some(2), Some(2)]);
    }

    #[test]
    fn brute_force_small_depths() {
        let p = cdp_bruteforce(&table2(), 2, DEFAULT_BRUTE_BUDGET).unwrap();
        assert_eq!(p.distances, vec![Some(2), Some(3), Some(4)]);
    }

    #[test]
    fn constant_only_code() {
        let f = gf(3);
        let code = code_from_rows(&f, vec![vec![Fe::ONE]]);
        let p = cdp_bruteforce(&code, 3, DEFAULT_BRUTE_BUDGET).unwrap();
        assert_eq!(p.distances, vec![Some(2); 4]);
    }

    #[test]
    fn brute_force_budget() {
        let err = cdp_bruteforce(&gf16_rate_two_thirds(), 5, 1000).unwrap_err();
        assert!(matches!(err, CdpError::BudgetExceeded { .. }));
    }

    #[test]
    fn scale_and_frobenius_keep_profile() {
        let code = table2();
        let f = code.field().clone();
        let base = cdp_via_minors(&code).unwrap();
        assert_eq!(scale_transform(&code, Fe::ONE).unwrap(), code);
        for c in f.nonzero_by_log() {
            let t = scale_transform(&code, c).unwrap();
            assert_eq!(cdp_via_minors(&t).unwrap().mds_prefix(), base.mds_prefix());
            let back = scale_transform(&t, f.inv(c).unwrap()).unwrap();
            assert_eq!(back, code);
        }
        assert_eq!(scale_transform(&code, Fe::ZERO), Err(CdpError::ZeroScalar));

        let sq = frobenius_transform(&gf16_rate_two_thirds());
        assert_eq!(cdp_via_minors(&sq).unwrap().mds_prefix(), vec![2, 3, 4, 5]);
        let mut c = gf16_rate_two_thirds();
        for _ in 0..4 {
            c = frobenius_transform(&c);
        }
        assert_eq!(c, gf16_rate_two_thirds());
        let binary = code_from_rows(&gf(4), vec![vec![Fe::ONE], vec![Fe::ONE]]);
        assert_eq!(frobenius_transform(&binary), binary);
    }

    #[test]
    fn shortening() {
        let code = gf16_rate_two_thirds();
        let s = shorten(&code, 1).unwrap();
        assert_eq!(s.n(), 2);
        let p = cdp_via_minors(&s).unwrap();
        assert!(p.mds_depth.unwrap() >= 3);
        assert_eq!(shorten(&s, 1), Err(CdpError::CannotShortenRateHalf));
        assert!(matches!(shorten(&code, 0), Err(CdpError::BadPosition { .. })));
        assert!(matches!(shorten(&code, 3), Err(CdpError::BadPosition { .. })));
    }

    #[test]
    fn non_unit_constants_are_normalized() {
        let code = table2();
        let f = code.field().clone();
        // scale information position 1 by alpha^3: every coefficient of that column
        let rows = code
            .rows()
            .iter()
            .map(|r| vec![f.mul(r[0], f.exp(3))])
            .collect();
        let scaled = code_from_rows(&f, rows);
        assert!(!scaled.has_unit_constant_terms());
        assert_eq!(normalize(&scaled).unwrap(), code);
        assert!(cdp_via_minors(&scaled).unwrap().is_mds());
        // brute force agrees on the unnormalized code
        let b = cdp_bruteforce(&scaled, 3, DEFAULT_BRUTE_BUDGET).unwrap();
        assert_eq!(b.distances, vec![Some(2), Some(3), Some(4), Some(5)]);
    }
}
