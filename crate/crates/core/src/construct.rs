//! Closed-form codes of free distance 3 and 4, the degree-2 condition
//! checker, and the upper bound k <= (2^m - 1)/(D - 2).

use std::sync::Arc;

use thiserror::Error;

use crate::codec::CodeSpec;
use crate::gf::{Fe, Field};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructError {
    #[error("beta must be nonzero")]
    BadBeta,
    #[error("constant {0:?} lies in the hyperplane Tr(beta x) = 0")]
    BadConstant(Fe),
    #[error("code degree {0} is below 2")]
    DegreeTooSmall(usize),
    #[error("constant terms must all be 1")]
    NotCanonical,
    #[error("target distance {0} is below 3")]
    DistanceTooSmall(usize),
    #[error("block length {0} is below 2")]
    BadLength(usize),
}

/// Rate (2^m - 1)/2^m code of degree 1 with r_{1,j} = alpha^{j-1}.
pub fn construct_d3(field: Arc<Field>) -> CodeSpec {
    let r1: Vec<Fe> = field.nonzero_by_log().collect();
    let r0 = vec![Fe::ONE; r1.len()];
    CodeSpec::new(field, vec![r0, r1]).expect("valid shape")
}

/// {x : Tr(beta x) = 0}, ascending.
pub fn hyperplane(field: &Field, beta: Fe) -> Vec<Fe> {
    field
        .elements()
        .filter(|&x| field.trace(field.mul(beta, x)).is_zero())
        .collect()
}

/// Smallest element (by integer value) with Tr(beta c) = 1.
pub fn default_constant(field: &Field, beta: Fe) -> Option<Fe> {
    field
        .elements()
        .find(|&x| !field.trace(field.mul(beta, x)).is_zero())
}

/// Rate (2^{m-1} - 1)/2^{m-1} code of degree 2: r_{1,s} = a_s runs over the
/// nonzero elements of H_beta in ascending order, r_{2,s} = a_s (a_s + c).
pub fn construct_d4(field: Arc<Field>, beta: Fe, c: Fe) -> Result<CodeSpec, ConstructError> {
    if beta.is_zero() {
        return Err(ConstructError::BadBeta);
    }
    if field.trace(field.mul(beta, c)).is_zero() {
        return Err(ConstructError::BadConstant(c));
    }
    let a: Vec<Fe> = hyperplane(&field, beta)
        .into_iter()
        .filter(|x| !x.is_zero())
        .collect();
    let b: Vec<Fe> = a.iter().map(|&x| field.mul(x, x + c)).collect();
    let r0 = vec![Fe::ONE; a.len()];
    Ok(CodeSpec::new(field, vec![r0, a, b]).expect("valid shape"))
}

/// Distance-4 construction with beta = 1 and the default constant.
pub fn construct_d4_default(field: Arc<Field>) -> CodeSpec {
    let c = default_constant(&field, Fe::ONE).expect("trace is onto");
    construct_d4(field, Fe::ONE, c).expect("default parameters are admissible")
}

/// Outcome of the six degree-2 conditions; each entry holds the first
/// violating 1-based index tuple, or None if the condition holds. The
/// tuples are (i, s) for (i) and (ii)'s i, then (s, t) or (s, t, u).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct D4Report {
    pub violations: [Option<Vec<usize>>; 6],
}

impl D4Report {
    pub fn all_hold(&self) -> bool {
        self.violations.iter().all(Option::is_none)
    }

    pub fn holds(&self, condition: usize) -> bool {
        self.violations[condition - 1].is_none()
    }
}

/// Evaluates the six conditions on the degree-1 and degree-2 coefficients.
pub fn check_d4_conditions(code: &CodeSpec) -> Result<D4Report, ConstructError> {
    if code.degree() < 2 {
        return Err(ConstructError::DegreeTooSmall(code.degree()));
    }
    if !code.has_unit_constant_terms() {
        return Err(ConstructError::NotCanonical);
    }
    let f = code.field();
    let k = code.k();
    let r1 = |s: usize| code.coeff(1, s);
    let r2 = |s: usize| code.coeff(2, s);
    let mut v: [Option<Vec<usize>>; 6] = Default::default();

    'i: for i in 1..=2 {
        for s in 0..k {
            if code.coeff(i, s).is_zero() {
                v[0] = Some(vec![i, s + 1]);
                break 'i;
            }
        }
    }
    'ii: for i in 1..=2 {
        for s in 0..k {
            for t in s + 1..k {
                if code.coeff(i, s) == code.coeff(i, t) {
                    v[1] = Some(vec![i, s + 1, t + 1]);
                    break 'ii;
                }
            }
        }
    }
    // (iii) r_{1,s} r_{1,t} != r_{2,s}
    'iii: for s in 0..k {
        for t in 0..k {
            if f.mul(r1(s), r1(t)) == r2(s) {
                v[2] = Some(vec![s + 1, t + 1]);
                break 'iii;
            }
        }
    }
    // (iv) r_{2,s} r_{1,t} != r_{2,t} r_{1,s}
    'iv: for s in 0..k {
        for t in s + 1..k {
            if f.mul(r2(s), r1(t)) == f.mul(r2(t), r1(s)) {
                v[3] = Some(vec![s + 1, t + 1]);
                break 'iv;
            }
        }
    }
    // (v) r_{2,s} + r_{2,t} != r_{1,u} (r_{1,s} + r_{1,t})
    'v: for s in 0..k {
        for t in s + 1..k {
            for u in 0..k {
                if r2(s) + r2(t) == f.mul(r1(u), r1(s) + r1(t)) {
                    v[4] = Some(vec![s + 1, t + 1, u + 1]);
                    break 'v;
                }
            }
        }
    }
    // (vi) det [1 1 1; r1s r1t r1u; r2s r2t r2u] != 0
    'vi: for s in 0..k {
        for t in s + 1..k {
            for u in t + 1..k {
                let det = f.mul(r1(t), r2(u))
                    + f.mul(r1(u), r2(t))
                    + f.mul(r1(s), r2(u))
                    + f.mul(r1(u), r2(s))
                    + f.mul(r1(s), r2(t))
                    + f.mul(r1(t), r2(s));
                if det.is_zero() {
                    v[5] = Some(vec![s + 1, t + 1, u + 1]);
                    break 'vi;
                }
            }
        }
    }
    Ok(D4Report { violations: v })
}

/// Largest k with a systematic MDS code of free distance `distance`:
/// floor((2^m - 1)/(distance - 2)).
pub fn max_k_bound(field: &Field, distance: usize) -> Result<usize, ConstructError> {
    if distance < 3 {
        return Err(ConstructError::DistanceTooSmall(distance));
    }
    Ok(field.order() as usize / (distance - 2))
}

/// Largest free distance allowed for block length n:
/// floor((2^m - 1)/(n - 1)) + 2.
pub fn max_distance_bound(field: &Field, n: usize) -> Result<usize, ConstructError> {
    if n < 2 {
        return Err(ConstructError::BadLength(n));
    }
    Ok(field.order() as usize / (n - 1) + 2)
}
