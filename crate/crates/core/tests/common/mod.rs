#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use mdsconv::codec::CodeSpec;
use mdsconv::erasure::{apply_erasures, decode_erasures, encode_stream, Decoder, Symbol};
use mdsconv::gf::{Fe, Field};
use mdsconv::search;

pub fn gf(m: u32) -> Arc<Field> {
    Arc::new(Field::with_default_poly(m).unwrap())
}

/// Shift-and-add multiplication modulo `poly`, no tables.
pub fn clmul(m: u32, poly: u32, a: u32, b: u32) -> u32 {
    let mut acc = 0u32;
    let mut a = a;
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a >> m & 1 == 1 {
            a ^= poly;
        }
    }
    acc
}

/// Column distances d_0..=d_l by encoding every information sequence over
/// l+1 blocks whose first block is nonzero.
pub fn column_distances(code: &CodeSpec, l: usize) -> Vec<usize> {
    let f = code.field();
    let (m, poly) = (f.m(), f.poly());
    let q = f.size() as u64;
    let k = code.k();
    let syms = k * (l + 1);
    let coeff: Vec<Vec<u32>> = (0..=l)
        .map(|i| (0..k).map(|j| code.coeff(i, j).value()).collect())
        .collect();
    let mut best = vec![usize::MAX; l + 1];
    let total = q.pow(syms as u32);
    let mut u = vec![0u32; syms];
    for idx in 0..total {
        let mut r = idx;
        for x in u.iter_mut() {
            *x = (r % q) as u32;
            r /= q;
        }
        if u[..k].iter().all(|&x| x == 0) {
            continue;
        }
        let mut w = 0;
        for t in 0..=l {
            let mut p = 0;
            for i in 0..=t {
                for j in 0..k {
                    p ^= clmul(m, poly, coeff[i][j], u[(t - i) * k + j]);
                }
            }
            w += u[t * k..(t + 1) * k].iter().filter(|&&x| x != 0).count();
            w += usize::from(p != 0);
            best[t] = best[t].min(w);
        }
    }
    best
}

/// Whether the naive profile of the code through its degree is [2, 3, ...].
pub fn naive_is_mds(code: &CodeSpec) -> bool {
    let d = code.degree();
    column_distances(code, d)
        .iter()
        .enumerate()
        .all(|(l, &x)| x == l + 2)
}

/// Every sequence over the nonzero elements, in lexicographic order.
pub fn all_sequences(field: &Field, len: usize) -> Vec<Vec<Fe>> {
    let nz: Vec<Fe> = field.nonzero_by_log().collect();
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p| {
                nz.iter().map(move |&x| {
                    let mut v = p.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out
}

/// Compares the search survivors with a brute-force filtration at every
/// depth that completes a degree. Returns the mismatching depths.
pub fn survivors_vs_brute(field: &Arc<Field>, n: usize, target: usize) -> Vec<usize> {
    let k = n - 1;
    let d = target - 2;
    let surv = search::surviving_prefixes(field.clone(), n, target, false).unwrap();
    let mut bad = Vec::new();
    for (t, got) in surv.iter().enumerate() {
        let deg = search::completed_degree(k, t + 1);
        if search::completed_degree(k, t) == deg && t + 1 != search::walk(k, d).len() {
            continue;
        }
        let want: BTreeSet<Vec<Fe>> = all_sequences(field, t + 1)
            .into_iter()
            .filter(|p| naive_is_mds(&search::prefix_code(field, k, d, p).truncate(deg)))
            .collect();
        let got: BTreeSet<Vec<Fe>> = got.iter().cloned().collect();
        if got != want {
            bad.push(t);
        }
    }
    bad
}

/// All j-subsets of the symbols of blocks 0..j.
pub fn patterns(n: usize, j: usize) -> Vec<Vec<Symbol>> {
    let all: Vec<Symbol> = (0..j).flat_map(|b| (0..n).map(move |p| (b, p))).collect();
    let mut out = Vec::new();
    let mut pick = Vec::new();
    fn rec(all: &[Symbol], start: usize, need: usize, pick: &mut Vec<Symbol>, out: &mut Vec<Vec<Symbol>>) {
        if need == 0 {
            out.push(pick.clone());
            return;
        }
        for i in start..=all.len() - need {
            pick.push(all[i]);
            rec(all, i + 1, need - 1, pick, out);
            pick.pop();
        }
    }
    rec(&all, 0, j, &mut pick, &mut out);
    out
}

/// Outcome of decoding one erasure pattern on a fixed random stream.
pub struct PatternResult {
    pub fully_recovered: bool,
    pub correct: bool,
    pub max_delay: usize,
}

pub fn decode_pattern(code: &CodeSpec, erased: &[Symbol], blocks: usize, seed: u64) -> PatternResult {
    let q = code.field().size() as u64;
    let info: Vec<Vec<Fe>> = (0..blocks)
        .map(|t| {
            (0..code.k())
                .map(|j| Fe(((seed + 7 * t as u64 + 13 * j as u64) * 2654435761 % q) as u16))
                .collect()
        })
        .collect();
    let stream = encode_stream(code, &info);
    let window = Decoder::default_window(code).max(blocks);
    let tr = decode_erasures(code, &apply_erasures(&stream, erased), window);
    PatternResult {
        fully_recovered: tr.fully_recovered(),
        correct: tr.recovered.iter().all(|r| stream[r.symbol.0][r.symbol.1] == r.value),
        max_delay: tr.max_delay().unwrap_or(0),
    }
}

/// For every j < free distance, every pattern of j erasures in the first j
/// blocks; returns the first offending (j, pattern).
pub fn check_erasure_guarantee(code: &CodeSpec) -> Result<usize, (usize, Vec<Symbol>)> {
    let dfree = code.degree() + 2;
    let mut count = 0;
    for j in 1..dfree {
        for p in patterns(code.n(), j) {
            let r = decode_pattern(code, &p, j + dfree + 2, j as u64);
            if !(r.fully_recovered && r.correct && r.max_delay <= j) {
                return Err((j, p));
            }
            count += 1;
        }
    }
    Ok(count)
}

/// Whether some pattern of `dfree` erasures in the first `dfree` blocks is
/// left unrecovered.
pub fn has_unrecoverable_pattern_at_free_distance(code: &CodeSpec) -> bool {
    let dfree = code.degree() + 2;
    patterns(code.n(), dfree)
        .iter()
        .any(|p| !decode_pattern(code, p, 3 * dfree, 1).fully_recovered)
}
