//! Table-driven arithmetic in GF(2^m), 1 <= m <= 16.
//!
//! Elements are kept in polynomial (bit-vector) form; logarithms are a view
//! computed through the tables.

use std::fmt;

use thiserror::Error;

pub const MAX_DEGREE: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("extension degree {0} out of range 1..=16")]
    BadDegree(u32),
    #[error("polynomial {poly:#b} does not have degree {m}")]
    BadPolynomial { m: u32, poly: u32 },
    #[error("polynomial {poly:#b} is not primitive: alpha has order {order}, expected {expected}")]
    NotPrimitive { poly: u32, order: u32, expected: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("logarithm of zero")]
    LogOfZero,
}

/// A field element in polynomial representation.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fe(pub u16);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.0 as u32
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fe({:#x})", self.0)
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::ops::Add for Fe {
    type Output = Fe;
    #[inline]
    fn add(self, rhs: Fe) -> Fe {
        Fe(self.0 ^ rhs.0)
    }
}

impl std::ops::AddAssign for Fe {
    #[inline]
    fn add_assign(&mut self, rhs: Fe) {
        self.0 ^= rhs.0;
    }
}

/// Default primitive polynomial (as a bit mask including x^m) for each degree.
///
/// Degrees 3..=14 use the polynomials that define the fields of the published
/// code tables; the others are standard primitive trinomials/pentanomials.
pub fn default_poly(m: u32) -> Option<u32> {
    let p = match m {
        1 => 0b11,
        2 => 0b111,
        3 => 0b1011,                   // 1 + x + x^3
        4 => 0b1_0011,                 // 1 + x + x^4
        5 => 0b10_0101,                // 1 + x^2 + x^5
        6 => 0b100_0011,               // 1 + x + x^6
        7 => 0b1000_1001,              // 1 + x^3 + x^7
        8 => 0b1_0001_1101,            // 1 + x^2 + x^3 + x^4 + x^8
        9 => 0b10_0001_0001,           // 1 + x^4 + x^9
        10 => 0b100_0000_1001,         // 1 + x^3 + x^10
        11 => 0b1000_0000_0101,        // 1 + x^2 + x^11
        12 => 0b1_0000_1001_1001,      // 1 + x^3 + x^4 + x^7 + x^12
        13 => 0b10_0000_0001_1011,     // 1 + x + x^3 + x^4 + x^13
        14 => 0b101_1000_0000_0011,    // 1 + x + x^11 + x^12 + x^14
        15 => 0b1000_0000_0000_0011,   // 1 + x + x^15
        16 => 0b1_0000_0000_0010_1101, // 1 + x^2 + x^3 + x^5 + x^16
        _ => return None,
    };
    Some(p)
}

/// A concrete GF(2^m) with its log/antilog tables. Immutable once built.
#[derive(Clone)]
pub struct Field {
    m: u32,
    poly: u32,
    order: u32,
    /// exp[i] = alpha^i for 0 <= i < 2*(q-1), doubled to skip one reduction in `mul`.
    exp: Vec<u16>,
    /// log[x] for x != 0; log[0] is unused.
    log: Vec<u32>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#b}", self.m, self.poly)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.poly == other.poly
    }
}

impl Eq for Field {}

impl Field {
    pub fn new(m: u32, poly: u32) -> Result<Field, GfError> {
        if !(1..=MAX_DEGREE).contains(&m) {
            return Err(GfError::BadDegree(m));
        }
        if poly >> m != 1 {
            return Err(GfError::BadPolynomial { m, poly });
        }
        let size = 1u32 << m;
        let order = size - 1;
        let mut exp = vec![0u16; 2 * order as usize];
        let mut log = vec![0u32; size as usize];
        let mut x: u32 = 1;
        for i in 0..order {
            if i > 0 && x == 1 {
                return Err(GfError::NotPrimitive {
                    poly,
                    order: i,
                    expected: order,
                });
            }
            exp[i as usize] = x as u16;
            log[x as usize] = i;
            x <<= 1;
            if x & size != 0 {
                x ^= poly;
            }
        }
        if x != 1 {
            // alpha^(q-1) must return to 1; otherwise the walk hit a cycle not through 1
            return Err(GfError::NotPrimitive {
                poly,
                order: 0,
                expected: order,
            });
        }
        for i in 0..order as usize {
            exp[i + order as usize] = exp[i];
        }
        Ok(Field {
            m,
            poly,
            order,
            exp,
            log,
        })
    }

    pub fn with_default_poly(m: u32) -> Result<Field, GfError> {
        let poly = default_poly(m).ok_or(GfError::BadDegree(m))?;
        Field::new(m, poly)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn poly(&self) -> u32 {
        self.poly
    }

    /// Number of field elements, 2^m.
    pub fn size(&self) -> u32 {
        self.order + 1
    }

    /// Order of the multiplicative group, 2^m - 1.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn contains(&self, a: Fe) -> bool {
        a.value() < self.size()
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        a + b
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        let i = self.log[a.0 as usize] + self.log[b.0 as usize];
        Fe(self.exp[i as usize])
    }

    /// a / b; `b` must be nonzero.
    #[inline]
    pub fn div(&self, a: Fe, b: Fe) -> Fe {
        debug_assert!(!b.is_zero(), "division by zero");
        if a.0 == 0 {
            return Fe::ZERO;
        }
        let i = self.log[a.0 as usize] + self.order - self.log[b.0 as usize];
        Fe(self.exp[i as usize])
    }

    pub fn inv(&self, a: Fe) -> Result<Fe, GfError> {
        if a.is_zero() {
            return Err(GfError::ZeroInverse);
        }
        let l = self.log[a.0 as usize];
        Ok(Fe(self.exp[((self.order - l) % self.order) as usize]))
    }

    /// a^e for any integer exponent; negative exponents require a != 0.
    pub fn pow(&self, a: Fe, e: i64) -> Result<Fe, GfError> {
        if a.is_zero() {
            return match e {
                0 => Ok(Fe::ONE),
                e if e > 0 => Ok(Fe::ZERO),
                _ => Err(GfError::ZeroInverse),
            };
        }
        let l = self.log[a.0 as usize] as i64;
        let i = (l * e.rem_euclid(self.order as i64)).rem_euclid(self.order as i64);
        Ok(Fe(self.exp[i as usize]))
    }

    pub fn log(&self, a: Fe) -> Result<u32, GfError> {
        if a.is_zero() {
            return Err(GfError::LogOfZero);
        }
        Ok(self.log[a.0 as usize])
    }

    /// alpha^i, with i taken modulo 2^m - 1.
    #[inline]
    pub fn exp(&self, i: i64) -> Fe {
        Fe(self.exp[i.rem_euclid(self.order as i64) as usize])
    }

    #[inline]
    pub fn square(&self, a: Fe) -> Fe {
        self.mul(a, a)
    }

    /// Absolute trace Tr(x) = x + x^2 + x^4 + ... + x^(2^(m-1)), which lies in GF(2).
    pub fn trace(&self, a: Fe) -> Fe {
        let mut acc = Fe::ZERO;
        let mut y = a;
        for _ in 0..self.m {
            acc += y;
            y = self.square(y);
        }
        acc
    }

    /// All elements in ascending integer order, zero included.
    pub fn elements(&self) -> impl Iterator<Item = Fe> + '_ {
        (0..self.size()).map(|v| Fe(v as u16))
    }

    /// Nonzero elements in ascending log order: 1, alpha, alpha^2, ...
    pub fn nonzero_by_log(&self) -> impl Iterator<Item = Fe> + '_ {
        self.exp[..self.order as usize].iter().map(|&v| Fe(v))
    }

    /// Smallest exponent in the cyclotomic coset {e, 2e, 4e, ...} mod 2^m - 1.
    pub fn coset_leader(&self, e: u32) -> u32 {
        let n = self.order as u64;
        let mut best = e % self.order;
        let mut x = best as u64;
        for _ in 0..self.m {
            x = (2 * x) % n;
            best = best.min(x as u32);
        }
        best
    }

    /// Whether the nonzero element `a` is the minimum-log member of its
    /// cyclotomic coset.
    pub fn is_coset_leader(&self, a: Fe) -> bool {
        match self.log(a) {
            Ok(l) => self.coset_leader(l) == l,
            Err(_) => false,
        }
    }
}

/// Multiplicative order of x modulo `poly` over GF(2), by brute force.
/// Returns None when x is not invertible (poly has zero constant term).
pub fn order_of_x(m: u32, poly: u32) -> Option<u32> {
    if poly & 1 == 0 {
        return None;
    }
    let size = 1u32 << m;
    let mut x: u32 = 1;
    for i in 1..=size {
        x <<= 1;
        if x & size != 0 {
            x ^= poly;
        }
        if x == 1 {
            return Some(i);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf8() -> Field {
        Field::with_default_poly(3).unwrap()
    }

    #[test]
    fn alpha_cubed_is_alpha_plus_one() {
        let f = gf8();
        assert_eq!(f.exp(3), Fe(0b011));
    }

    #[test]
    fn table_polynomials_are_primitive() {
        for m in 1..=16 {
            let f = Field::with_default_poly(m).unwrap();
            assert_eq!(f.m(), m);
            let mut seen = vec![false; f.size() as usize];
            for x in f.nonzero_by_log() {
                assert!(!seen[x.0 as usize]);
                seen[x.0 as usize] = true;
            }
            assert!(!seen[0]);
        }
    }

    #[test]
    fn reducible_polynomial_rejected() {
        // 1 + x + x^2 + x^3 = (1 + x)^3
        let poly = 0b1111;
        assert!(matches!(
            Field::new(3, poly),
            Err(GfError::NotPrimitive { .. })
        ));
        assert_eq!(order_of_x(3, poly), Some(4));
        // 1 + x^2 + x^4 = (1 + x + x^2)^2: x has order 6, not 15
        assert_eq!(order_of_x(4, 0b10101), Some(6));
        assert!(Field::new(4, 0b10101).is_err());
        // irreducible but not primitive: 1 + x + x^2 + x^3 + x^4, x has order 5
        assert_eq!(order_of_x(4, 0b11111), Some(5));
        assert!(Field::new(4, 0b11111).is_err());
    }

    #[test]
    fn bad_degree_and_mask() {
        assert_eq!(Field::new(0, 0b1).unwrap_err(), GfError::BadDegree(0));
        assert_eq!(Field::new(17, 0).unwrap_err(), GfError::BadDegree(17));
        assert!(matches!(
            Field::new(3, 0b10011),
            Err(GfError::BadPolynomial { .. })
        ));
    }

    #[test]
    fn small_products_and_inverses() {
        let f = gf8();
        assert_eq!(f.mul(f.exp(4), f.exp(5)), f.exp(2));
        assert_eq!(f.inv(f.exp(3)).unwrap(), f.exp(4));
        assert_eq!(f.inv(Fe::ZERO), Err(GfError::ZeroInverse));
        assert_eq!(f.log(Fe::ZERO), Err(GfError::LogOfZero));
        assert_eq!(f.exp(-1), f.exp(6));
        assert_eq!(f.pow(f.exp(2), -1).unwrap(), f.exp(5));
        assert_eq!(f.pow(Fe::ZERO, 0).unwrap(), Fe::ONE);
    }

    #[test]
    fn exhaustive_axioms_small_fields() {
        for m in 1..=5 {
            let f = Field::with_default_poly(m).unwrap();
            let els: Vec<Fe> = f.elements().collect();
            for &a in &els {
                assert_eq!(a + a, Fe::ZERO);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), Fe::ONE);
                    assert_eq!(f.exp(f.log(a).unwrap() as i64), a);
                }
                for &b in &els {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    // Frobenius is additive
                    assert_eq!(f.square(a + b), f.square(a) + f.square(b));
                    for &c in &els {
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, b + c), f.mul(a, b) + f.mul(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn trace_is_binary_and_balanced() {
        for m in 1..=8 {
            let f = Field::with_default_poly(m).unwrap();
            let ones = f
                .elements()
                .map(|x| f.trace(x))
                .inspect(|t| assert!(t.0 <= 1))
                .filter(|t| t.0 == 1)
                .count();
            assert_eq!(ones as u32, f.size() / 2);
        }
    }

    #[test]
    fn coset_leaders() {
        let f = Field::with_default_poly(4).unwrap();
        // cosets mod 15: {0}, {1,2,4,8}, {3,6,12,9}, {5,10}, {7,14,13,11}
        let leaders: Vec<u32> = (0..15).filter(|&e| f.coset_leader(e) == e).collect();
        assert_eq!(leaders, vec![0, 1, 3, 5, 7]);
        assert_eq!(f.coset_leader(13), 7);
    }
}
