//! Proper submatrices of the reduced matrix H'^(D), exact determinants, and
//! the k-superregularity decision.
//!
//! H'^(D) is block Toeplitz: the entry in row `i`, column `b*k + j` is
//! `r[i-b][j]` (zero when `b > i`). Shifting a proper submatrix down one row
//! and right one block leaves its entries unchanged and keeps it proper, so
//! every proper submatrix has a translate whose first column lies in block 0.
//! Those translates are the *anchored* submatrices: the entry in their
//! lower-left corner is `r[i][j]` with `i` the bottom row and `j` the first
//! column. Checking anchored submatrices is therefore enough.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::codec::{CodeSpec, TruncMatrix};
use crate::gf::{Fe, Field};

/// Default cap on the number of submatrices a single request may touch.
pub const DEFAULT_CAP: u64 = 100_000_000;

/// Rows of H'^(D) handled by the fixed-size elimination buffers.
pub const MAX_ROWS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MinorsError {
    #[error("{count} proper submatrices exceed the cap of {cap}")]
    SizeOverflow { count: u64, cap: u64 },
    #[error("degree {0} exceeds the supported maximum of {max}", max = MAX_ROWS - 1)]
    TooDeep(usize),
}

/// Square submatrix given by strictly increasing 0-based row and column
/// indices, proper when `cols[l] < k * (rows[l] + 1)` for every `l`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProperSubmatrix {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl fmt::Debug for ProperSubmatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ProperSubmatrix {
    /// 1-based, as in the usual matrix notation.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r: Vec<String> = self.rows.iter().map(|x| (x + 1).to_string()).collect();
        let c: Vec<String> = self.cols.iter().map(|x| (x + 1).to_string()).collect();
        write!(f, "rows {{{}}} cols {{{}}}", r.join(","), c.join(","))
    }
}

impl ProperSubmatrix {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn is_proper(&self, k: usize) -> bool {
        self.rows.len() == self.cols.len()
            && !self.rows.is_empty()
            && self.rows.windows(2).all(|w| w[0] < w[1])
            && self.cols.windows(2).all(|w| w[0] < w[1])
            && self
                .rows
                .iter()
                .zip(&self.cols)
                .all(|(&r, &c)| c < k * (r + 1))
    }

    /// The coefficient in the lower-left corner after translating the first
    /// column into block 0.
    pub fn anchor(&self, k: usize) -> Anchor {
        let c0 = self.cols[0];
        let bottom = *self.rows.last().expect("nonempty");
        Anchor {
            degree: bottom - c0 / k,
            position: c0 % k,
        }
    }

    /// Translate with the first column in block 0.
    pub fn anchored(&self, k: usize) -> ProperSubmatrix {
        let b = self.cols[0] / k;
        ProperSubmatrix {
            rows: self.rows.iter().map(|r| r - b).collect(),
            cols: self.cols.iter().map(|c| c - b * k).collect(),
        }
    }
}

/// Coefficient position r_{degree, position} (0-based position).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Anchor {
    pub degree: usize,
    pub position: usize,
}

impl Anchor {
    /// Sort key following the search walk: degree ascending, position descending.
    pub fn walk_key(&self) -> (usize, std::cmp::Reverse<usize>) {
        (self.degree, std::cmp::Reverse(self.position))
    }
}

/// Read access to the entries of H'^(D) without materializing it.
#[derive(Clone, Copy)]
pub struct ToeplitzView<'a> {
    k: usize,
    /// coef[i * k + j] = r_{i,j}
    coef: &'a [Fe],
}

impl<'a> ToeplitzView<'a> {
    pub fn new(k: usize, coef: &'a [Fe]) -> Self {
        debug_assert!(coef.len() % k == 0);
        ToeplitzView { k, coef }
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> Fe {
        let b = col / self.k;
        if b > row {
            return Fe::ZERO;
        }
        let idx = (row - b) * self.k + col % self.k;
        self.coef.get(idx).copied().unwrap_or(Fe::ZERO)
    }
}

fn flat_coeffs(code: &CodeSpec, d: usize) -> Vec<Fe> {
    (0..=d)
        .flat_map(|i| (0..code.k()).map(move |j| (i, j)))
        .map(|(i, j)| code.coeff(i, j))
        .collect()
}

/// Determinant by Gaussian elimination (characteristic 2: no signs).
pub fn determinant(field: &Field, m: &TruncMatrix) -> Fe {
    assert_eq!(m.rows(), m.cols(), "determinant of a non-square matrix");
    let n = m.rows();
    let mut a: Vec<Vec<Fe>> = (0..n).map(|r| m.row(r).to_vec()).collect();
    let mut det = Fe::ONE;
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Fe::ZERO;
        };
        a.swap(col, piv);
        let p = a[col][col];
        det = field.mul(det, p);
        for r in col + 1..n {
            let f = a[r][col];
            if f.is_zero() {
                continue;
            }
            let s = field.div(f, p);
            for c in col..n {
                let v = field.mul(s, a[col][c]);
                a[r][c] += v;
            }
        }
    }
    det
}

/// Determinant of the submatrix of `matrix` selected by `sub`.
pub fn det(field: &Field, sub: &ProperSubmatrix, matrix: &TruncMatrix) -> Fe {
    determinant(field, &matrix.select(&sub.rows, &sub.cols))
}

/// Rows of the selection, ascending; bit `r` of `mask` selects row `r`.
fn rows_of(mask: u64, bottom: usize) -> Vec<usize> {
    let mut rows: Vec<usize> = (0..bottom).filter(|r| mask >> r & 1 == 1).collect();
    rows.push(bottom);
    rows
}

/// Number of strictly increasing column sequences with `c[t] < bounds[t]`
/// and `c[0] >= start`.
fn count_sequences(bounds: &[usize], start: usize) -> u64 {
    let p = bounds.len();
    if p == 0 {
        return 1;
    }
    let width = bounds[p - 1];
    // ways[c] = number of completions for positions t.. given c[t] = c
    let mut ways = vec![0u64; width + 1];
    for c in 0..bounds[p - 1] {
        ways[c] = 1;
    }
    for t in (0..p - 1).rev() {
        let mut next = vec![0u64; width + 1];
        let mut suffix = 0u64;
        // sum of ways[c'] for c' > c
        let mut acc = vec![0u64; width + 2];
        for c in (0..width).rev() {
            suffix = suffix.saturating_add(ways[c]);
            acc[c] = suffix;
        }
        for c in 0..bounds[t] {
            next[c] = acc[c + 1];
        }
        ways = next;
    }
    ways[start..bounds[0]].iter().fold(0u64, |a, &b| a.saturating_add(b))
}

fn bounds_for(rows: &[usize], k: usize, anchored: bool) -> Vec<usize> {
    let mut b: Vec<usize> = rows.iter().map(|r| k * (r + 1)).collect();
    if anchored {
        b[0] = k;
    }
    b
}

/// Number of anchored submatrices with bottom row `level`.
pub fn count_anchored_level(k: usize, level: usize) -> u64 {
    (0..1u64 << level)
        .map(|mask| count_sequences(&bounds_for(&rows_of(mask, level), k, true), 0))
        .fold(0u64, u64::saturating_add)
}

/// Number of anchored submatrices of H'^(d).
pub fn count_anchored(k: usize, d: usize) -> u64 {
    (0..=d)
        .map(|l| count_anchored_level(k, l))
        .fold(0u64, u64::saturating_add)
}

/// Number of proper submatrices of a `rows` x k*rows matrix.
pub fn count_proper(k: usize, rows: usize) -> u64 {
    let mut total = 0u64;
    for mask in 1..1u64 << rows {
        let rs: Vec<usize> = (0..rows).filter(|r| mask >> r & 1 == 1).collect();
        total = total.saturating_add(count_sequences(&bounds_for(&rs, k, false), 0));
    }
    total
}

fn push_sequences(
    rows: &[usize],
    bounds: &[usize],
    cols: &mut Vec<usize>,
    out: &mut Vec<ProperSubmatrix>,
) {
    let t = cols.len();
    if t == rows.len() {
        out.push(ProperSubmatrix {
            rows: rows.to_vec(),
            cols: cols.clone(),
        });
        return;
    }
    let start = cols.last().map_or(0, |c| c + 1);
    for c in start..bounds[t] {
        cols.push(c);
        push_sequences(rows, bounds, cols, out);
        cols.pop();
    }
}

/// Every proper submatrix of a `rows` x k*rows k-lower-triangular matrix,
/// each exactly once, grouped by anchor in search-walk order.
pub fn enumerate_proper(
    k: usize,
    rows: usize,
    cap: u64,
) -> Result<Vec<(Anchor, ProperSubmatrix)>, MinorsError> {
    let count = count_proper(k, rows);
    if count > cap {
        return Err(MinorsError::SizeOverflow { count, cap });
    }
    let mut all = Vec::with_capacity(count as usize);
    for mask in 1..1u64 << rows {
        let rs: Vec<usize> = (0..rows).filter(|r| mask >> r & 1 == 1).collect();
        let bounds = bounds_for(&rs, k, false);
        push_sequences(&rs, &bounds, &mut Vec::new(), &mut all);
    }
    let mut tagged: Vec<(Anchor, ProperSubmatrix)> =
        all.into_iter().map(|s| (s.anchor(k), s)).collect();
    tagged.sort_by(|a, b| a.0.walk_key().cmp(&b.0.walk_key()));
    Ok(tagged)
}

/// Anchored submatrices of H'^(d), grouped by corner in search-walk order.
pub fn enumerate_anchored(
    k: usize,
    d: usize,
    cap: u64,
) -> Result<Vec<(Anchor, ProperSubmatrix)>, MinorsError> {
    let count = count_anchored(k, d);
    if count > cap {
        return Err(MinorsError::SizeOverflow { count, cap });
    }
    let mut out = Vec::with_capacity(count as usize);
    for level in 0..=d {
        let mut lvl = Vec::new();
        for mask in 0..1u64 << level {
            let rs = rows_of(mask, level);
            let bounds = bounds_for(&rs, k, true);
            push_sequences(&rs, &bounds, &mut Vec::new(), &mut lvl);
        }
        let mut tagged: Vec<(Anchor, ProperSubmatrix)> =
            lvl.into_iter().map(|s| (s.anchor(k), s)).collect();
        tagged.sort_by(|a, b| a.0.walk_key().cmp(&b.0.walk_key()));
        out.extend(tagged);
    }
    Ok(out)
}

/// Incremental column elimination in GF(2^m)^p, kept in reduced row-echelon
/// form so a normal vector is available once p-1 columns are in.
#[derive(Clone)]
pub(crate) struct Basis {
    p: usize,
    len: usize,
    pivots: [usize; MAX_ROWS],
    vecs: [[Fe; MAX_ROWS]; MAX_ROWS],
}

impl Basis {
    pub(crate) fn new(p: usize) -> Basis {
        assert!(p <= MAX_ROWS);
        Basis {
            p,
            len: 0,
            pivots: [0; MAX_ROWS],
            vecs: [[Fe::ZERO; MAX_ROWS]; MAX_ROWS],
        }
    }

    /// Adds `v`; returns false (leaving the basis unchanged) if `v` is in the span.
    #[inline]
    pub(crate) fn push(&mut self, field: &Field, mut v: [Fe; MAX_ROWS]) -> bool {
        let p = self.p;
        for s in 0..self.len {
            let f = v[self.pivots[s]];
            if !f.is_zero() {
                let b = &self.vecs[s];
                for i in 0..p {
                    v[i] += field.mul(f, b[i]);
                }
            }
        }
        let Some(q) = (0..p).find(|&i| !v[i].is_zero()) else {
            return false;
        };
        let inv = field.div(Fe::ONE, v[q]);
        for x in v.iter_mut().take(p) {
            *x = field.mul(*x, inv);
        }
        for s in 0..self.len {
            let f = self.vecs[s][q];
            if !f.is_zero() {
                for i in 0..p {
                    let t = field.mul(f, v[i]);
                    self.vecs[s][i] += t;
                }
            }
        }
        self.pivots[self.len] = q;
        self.vecs[self.len] = v;
        self.len += 1;
        true
    }

    /// With exactly p-1 independent vectors, the vector w with w . b = 0 for
    /// every basis vector b, scaled so its free coordinate is 1.
    #[inline]
    pub(crate) fn normal(&self) -> [Fe; MAX_ROWS] {
        debug_assert_eq!(self.len + 1, self.p);
        let mut is_pivot = [false; MAX_ROWS];
        for s in 0..self.len {
            is_pivot[self.pivots[s]] = true;
        }
        let free = (0..self.p).find(|&i| !is_pivot[i]).expect("one free coordinate");
        let mut w = [Fe::ZERO; MAX_ROWS];
        w[free] = Fe::ONE;
        for s in 0..self.len {
            w[self.pivots[s]] = self.vecs[s][free];
        }
        w
    }
}

#[inline]
fn column(view: &ToeplitzView<'_>, rows: &[usize], c: usize) -> [Fe; MAX_ROWS] {
    let mut v = [Fe::ZERO; MAX_ROWS];
    for (s, &r) in rows.iter().enumerate() {
        v[s] = view.entry(r, c);
    }
    v
}

/// Depth-first walk over the column sequences of one anchored group
/// (fixed row set and first column), returning the first singular
/// submatrix in enumeration order.
fn first_singular_in_group(
    field: &Field,
    view: &ToeplitzView<'_>,
    rows: &[usize],
    bounds: &[usize],
    first_col: usize,
) -> Option<ProperSubmatrix> {
    fn walk(
        field: &Field,
        view: &ToeplitzView<'_>,
        rows: &[usize],
        bounds: &[usize],
        stack: &mut Vec<Basis>,
        cols: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        let t = cols.len();
        let p = rows.len();
        let start = cols.last().map_or(0, |c| c + 1);
        for c in start..bounds[t] {
            let mut b = stack[t - 1].clone();
            if !b.push(field, column(view, rows, c)) {
                // every completion of this prefix is singular; report the first one
                let mut w = cols.clone();
                w.push(c);
                while w.len() < p {
                    w.push(w.last().unwrap() + 1);
                }
                return Some(w);
            }
            if t + 1 == p {
                continue;
            }
            stack[t] = b;
            cols.push(c);
            let found = walk(field, view, rows, bounds, stack, cols);
            cols.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }

    let p = rows.len();
    let mut b0 = Basis::new(p);
    if !b0.push(field, column(view, rows, first_col)) {
        let cols: Vec<usize> = (first_col..first_col + p).collect();
        return Some(ProperSubmatrix {
            rows: rows.to_vec(),
            cols,
        });
    }
    if p == 1 {
        return None;
    }
    let mut stack = vec![b0; p];
    let mut cols = vec![first_col];
    walk(field, view, rows, bounds, &mut stack, &mut cols).map(|cols| ProperSubmatrix {
        rows: rows.to_vec(),
        cols,
    })
}

/// Outcome of a superregularity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Superregularity {
    Superregular,
    /// First singular anchored submatrix in enumeration order.
    Singular(ProperSubmatrix),
}

impl Superregularity {
    pub fn holds(&self) -> bool {
        matches!(self, Superregularity::Superregular)
    }
}

/// First singular anchored submatrix whose bottom row is `level`, if any.
pub fn first_singular_at_level(
    code: &CodeSpec,
    level: usize,
) -> Result<Option<ProperSubmatrix>, MinorsError> {
    if level >= MAX_ROWS {
        return Err(MinorsError::TooDeep(level));
    }
    let field = code.field().as_ref();
    let k = code.k();
    let coef = flat_coeffs(code, level);
    let view = ToeplitzView::new(k, &coef);
    let groups: Vec<(u64, usize)> = (0..1u64 << level)
        .flat_map(|mask| (0..k).map(move |c| (mask, c)))
        .collect();
    Ok(groups.par_iter().with_min_len(4).find_map_first(|&(mask, c0)| {
        let rows = rows_of(mask, level);
        let bounds = bounds_for(&rows, k, true);
        first_singular_in_group(field, &view, &rows, &bounds, c0)
    }))
}

/// Whether H'^(d) of `code` is k-superregular, with a witness if not.
pub fn is_k_superregular(code: &CodeSpec, d: usize) -> Result<Superregularity, MinorsError> {
    is_k_superregular_capped(code, d, DEFAULT_CAP)
}

pub fn is_k_superregular_capped(
    code: &CodeSpec,
    d: usize,
    cap: u64,
) -> Result<Superregularity, MinorsError> {
    if d >= MAX_ROWS {
        return Err(MinorsError::TooDeep(d));
    }
    let count = count_anchored(code.k(), d);
    if count > cap {
        return Err(MinorsError::SizeOverflow { count, cap });
    }
    for level in 0..=d {
        if let Some(w) = first_singular_at_level(code, level)? {
            return Ok(Superregularity::Singular(w));
        }
    }
    Ok(Superregularity::Superregular)
}

/// Affine constraints `c1 * x + c0` on the corner coefficient x of every
/// anchored submatrix with corner r_{level, first_col}. The corner must not
/// occur elsewhere in those submatrices, which holds because every other
/// entry has lower degree or lies to the right in the same block.
///
/// `coef` holds r_{i,j} for all degrees up to `level`; the corner entry is
/// ignored. `sink` receives `(c1, c0)`; returning false stops the walk.
pub(crate) fn corner_constraints<F>(
    field: &Field,
    k: usize,
    coef: &[Fe],
    level: usize,
    first_col: usize,
    mut sink: F,
) where
    F: FnMut(Fe, Fe) -> bool,
{
    let view = ToeplitzView::new(k, coef);
    for mask in 0..1u64 << level {
        let rows = rows_of(mask, level);
        let p = rows.len();
        if p == 1 {
            if !sink(Fe::ONE, Fe::ZERO) {
                return;
            }
            continue;
        }
        let bounds = bounds_for(&rows, k, true);
        // entries of the corner column above the bottom row
        let mut head = [Fe::ZERO; MAX_ROWS];
        for (s, &r) in rows[..p - 1].iter().enumerate() {
            head[s] = view.entry(r, first_col);
        }
        let mut stack = vec![Basis::new(p); p];
        if !suffix_walk(
            field, &view, &rows, &bounds, &head, &mut stack, first_col, 1, &mut sink,
        ) {
            return;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn suffix_walk<F>(
    field: &Field,
    view: &ToeplitzView<'_>,
    rows: &[usize],
    bounds: &[usize],
    head: &[Fe; MAX_ROWS],
    stack: &mut Vec<Basis>,
    prev: usize,
    t: usize,
    sink: &mut F,
) -> bool
where
    F: FnMut(Fe, Fe) -> bool,
{
    let p = rows.len();
    for c in prev + 1..bounds[t] {
        let mut b = stack[t - 1].clone();
        if !b.push(field, column(view, rows, c)) {
            // determinant vanishes identically in x
            if !sink(Fe::ZERO, Fe::ZERO) {
                return false;
            }
            continue;
        }
        if t + 1 == p {
            let w = b.normal();
            let mut c0 = Fe::ZERO;
            for s in 0..p - 1 {
                c0 += field.mul(w[s], head[s]);
            }
            if !sink(w[p - 1], c0) {
                return false;
            }
            continue;
        }
        stack[t] = b;
        if !suffix_walk(field, view, rows, bounds, head, stack, c, t + 1, sink) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn gf(m: u32) -> Arc<Field> {
        Arc::new(Field::with_default_poly(m).unwrap())
    }

    /// Brute force over all row and column subsets.
    fn brute_count(k: usize, rows: usize) -> (u64, Vec<u64>) {
        let cols = k * rows;
        let mut by_size = vec![0u64; rows + 1];
        for rmask in 1u64..1 << rows {
            let rs: Vec<usize> = (0..rows).filter(|r| rmask >> r & 1 == 1).collect();
            for cmask in 1u64..1 << cols {
                if cmask.count_ones() as usize != rs.len() {
                    continue;
                }
                let cs: Vec<usize> = (0..cols).filter(|c| cmask >> c & 1 == 1).collect();
                if rs.iter().zip(&cs).all(|(&r, &c)| c + 1 <= k * (r + 1)) {
                    by_size[rs.len()] += 1;
                }
            }
        }
        (by_size.iter().sum(), by_size)
    }

    #[test]
    fn proper_counts_match_brute_force() {
        assert_eq!(brute_count(1, 2).0, 4);
        let (total, by_size) = brute_count(2, 3);
        assert_eq!(total, 54);
        assert_eq!(&by_size[1..], &[12, 28, 14]);
        for (k, rows) in [(1, 2), (2, 3), (1, 4), (3, 3), (2, 4)] {
            let (total, _) = brute_count(k, rows);
            assert_eq!(count_proper(k, rows), total, "k={k} rows={rows}");
            let list = enumerate_proper(k, rows, DEFAULT_CAP).unwrap();
            assert_eq!(list.len() as u64, total);
            let mut uniq: Vec<_> = list.iter().map(|x| x.1.clone()).collect();
            uniq.sort();
            uniq.dedup();
            assert_eq!(uniq.len() as u64, total);
            assert!(list.iter().all(|(_, s)| s.is_proper(k)));
        }
        for k in 1..5 {
            assert_eq!(count_proper(k, 1), k as u64);
        }
    }

    #[test]
    fn anchored_counts_and_grouping() {
        for (k, d) in [(1, 3), (2, 2), (3, 3)] {
            let anchored = enumerate_anchored(k, d, DEFAULT_CAP).unwrap();
            assert_eq!(anchored.len() as u64, count_anchored(k, d));
            // every proper submatrix of the bottom-anchored family translates to one of these
            let all = enumerate_proper(k, d + 1, DEFAULT_CAP).unwrap();
            let mut set: Vec<_> = anchored.iter().map(|x| x.1.clone()).collect();
            set.sort();
            for (a, s) in &all {
                let t = s.anchored(k);
                assert!(set.binary_search(&t).is_ok());
                assert_eq!(t.anchor(k), *a);
            }
            let keys: Vec<_> = anchored.iter().map(|x| (x.0.degree, x.0.walk_key())).collect();
            assert!(keys.windows(2).all(|w| w[0] <= w[1]));
        }
        assert_eq!(count_anchored_level(2, 5), 5169);
    }

    #[test]
    fn enumeration_cap() {
        assert!(matches!(
            enumerate_proper(3, 4, 10),
            Err(MinorsError::SizeOverflow { cap: 10, .. })
        ));
    }

    #[test]
    fn small_determinants() {
        let f = gf(4);
        let (a, b, c) = (f.exp(3), f.exp(7), f.exp(11));
        let m = TruncMatrix::from_rows(vec![vec![Fe::ONE, Fe::ONE], vec![a, b]]);
        assert_eq!(determinant(&f, &m), a + b);
        let m = TruncMatrix::from_rows(vec![vec![a, Fe::ONE], vec![c, b]]);
        assert_eq!(determinant(&f, &m), c + f.mul(a, b));
        let id = TruncMatrix::from_rows(vec![
            vec![Fe::ONE, Fe::ZERO, Fe::ZERO],
            vec![Fe::ZERO, Fe::ONE, Fe::ZERO],
            vec![Fe::ZERO, Fe::ZERO, Fe::ONE],
        ]);
        assert_eq!(determinant(&f, &id), Fe::ONE);
    }

    #[test]
    fn determinant_matches_permutation_expansion() {
        use rand::{Rng, SeedableRng};
        let f = gf(3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for _ in 0..2000 {
            let rows: Vec<Vec<Fe>> = (0..3)
                .map(|_| (0..3).map(|_| Fe(rng.gen_range(0..8))).collect())
                .collect();
            let mut expect = Fe::ZERO;
            for p in perms {
                expect += f.mul(f.mul(rows[0][p[0]], rows[1][p[1]]), rows[2][p[2]]);
            }
            let m = TruncMatrix::from_rows(rows);
            assert_eq!(determinant(&f, &m), expect);
        }
    }

    #[test]
    fn distinct_degree_one_row_is_superregular() {
        for m in 2..=4 {
            let f = gf(m);
            let k = f.order() as usize;
            let row1: Vec<Fe> = f.nonzero_by_log().collect();
            let code = CodeSpec::new(f.clone(), vec![vec![Fe::ONE; k], row1]).unwrap();
            assert!(is_k_superregular(&code, 1).unwrap().holds());
        }
    }

    #[test]
    fn zero_coefficient_gives_singleton_witness() {
        let f = gf(3);
        let code = CodeSpec::new(
            f.clone(),
            vec![vec![Fe::ONE, Fe::ONE], vec![f.exp(1), Fe::ZERO]],
        )
        .unwrap();
        match is_k_superregular(&code, 1).unwrap() {
            Superregularity::Singular(w) => {
                assert_eq!(w.size(), 1);
                assert_eq!(w.rows, vec![1]);
                assert_eq!(w.cols, vec![1]);
            }
            other => panic!("expected a witness, got {other:?}"),
        }
    }

    #[test]
    fn worked_rate_two_thirds_example_is_superregular() {
        let code =
            CodeSpec::from_log_rows(gf(3), 3, &[vec![1, 0], vec![0, 3]]).unwrap();
        assert!(is_k_superregular(&code, 2).unwrap().holds());
    }

    #[test]
    fn normal_vector_annihilates_basis() {
        let f = gf(4);
        let vs = [
            [f.exp(1), f.exp(5), Fe::ONE, f.exp(9)],
            [Fe::ONE, Fe::ZERO, f.exp(3), f.exp(2)],
            [f.exp(7), f.exp(7), Fe::ZERO, Fe::ONE],
        ];
        let mut b = Basis::new(4);
        for v in vs {
            let mut a = [Fe::ZERO; MAX_ROWS];
            a[..4].copy_from_slice(&v);
            assert!(b.push(&f, a));
        }
        let w = b.normal();
        for v in vs {
            let dot = (0..4).fold(Fe::ZERO, |acc, i| acc + f.mul(v[i], w[i]));
            assert_eq!(dot, Fe::ZERO);
        }
        assert!(w[..4].iter().any(|x| !x.is_zero()));
    }
}
