//! Table-driven arithmetic over GF(q) for prime powers q <= 256.
//!
//! Elements are integers in `0..q`. For an extension field GF(p^s) the base-p
//! digits of an element are the coefficients of its polynomial representative
//! (digit `i` is the coefficient of `x^i`), reduced modulo a fixed monic
//! irreducible polynomial of degree `s`.

use std::fmt;

use thiserror::Error;

/// Largest supported field order.
pub const MAX_ORDER: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("field order {0} is outside the supported range 2..=256")]
    OrderOutOfRange(usize),
    #[error("field order {0} is not a prime power")]
    NotPrimePower(usize),
    #[error("element {value} does not belong to GF({q})")]
    ElementOutOfRange { value: usize, q: usize },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

/// A field element, stored as its canonical index in `0..q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FieldElement(u8);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn value(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// GF(q) with precomputed addition, multiplication, negation and inverse tables.
#[derive(Clone, PartialEq, Eq)]
pub struct Field {
    q: usize,
    p: usize,
    s: usize,
    reduction_poly: Vec<u8>,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("q", &self.q)
            .field("p", &self.p)
            .field("s", &self.s)
            .field("reduction_poly", &self.reduction_poly)
            .finish()
    }
}

/// Returns `(p, s)` with `q = p^s` when `q` is a prime power.
pub fn prime_power_decomposition(q: usize) -> Option<(usize, usize)> {
    if q < 2 {
        return None;
    }
    let p = smallest_prime_factor(q);
    let mut rest = q;
    let mut s = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        s += 1;
    }
    (rest == 1).then_some((p, s))
}

/// Smallest prime factor of `n >= 2`.
pub fn smallest_prime_factor(n: usize) -> usize {
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return d;
        }
        d += 1;
    }
    n
}

impl Field {
    /// Builds GF(q). For `q = p^s` with `s > 1` the reduction polynomial is the
    /// monic irreducible of degree `s` whose lower coefficients, read as a
    /// base-p integer, are smallest.
    pub fn new(q: usize) -> Result<Field, GfError> {
        if !(2..=MAX_ORDER).contains(&q) {
            return Err(GfError::OrderOutOfRange(q));
        }
        let (p, s) = prime_power_decomposition(q).ok_or(GfError::NotPrimePower(q))?;
        let reduction_poly = if s == 1 {
            Vec::new()
        } else {
            smallest_irreducible(p, s)
        };

        let mut add = vec![0u8; q * q];
        let mut mul = vec![0u8; q * q];
        for a in 0..q {
            for b in 0..q {
                add[a * q + b] = digitwise_add(a, b, p) as u8;
                mul[a * q + b] = if s == 1 {
                    ((a * b) % p) as u8
                } else {
                    poly_mul_mod(a, b, p, s, &reduction_poly) as u8
                };
            }
        }
        let mut neg = vec![0u8; q];
        let mut inv = vec![0u8; q];
        for a in 0..q {
            neg[a] = (0..q).find(|&b| add[a * q + b] == 0).expect("additive inverse") as u8;
            if a != 0 {
                inv[a] = (1..q).find(|&b| mul[a * q + b] == 1).expect("multiplicative inverse") as u8;
            }
        }

        Ok(Field {
            q,
            p,
            s,
            reduction_poly,
            add,
            mul,
            neg,
            inv,
        })
    }

    /// Field order.
    #[inline]
    pub fn order(&self) -> usize {
        self.q
    }

    /// Characteristic, the smallest prime factor of the order.
    #[inline]
    pub fn characteristic(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn extension_degree(&self) -> usize {
        self.s
    }

    /// Coefficients of the reduction polynomial from `x^0` up to the leading
    /// `x^s` term. Empty for prime fields.
    pub fn reduction_poly(&self) -> &[u8] {
        &self.reduction_poly
    }

    pub fn element(&self, value: usize) -> Result<FieldElement, GfError> {
        if value < self.q {
            Ok(FieldElement(value as u8))
        } else {
            Err(GfError::ElementOutOfRange { value, q: self.q })
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.q).map(|v| FieldElement(v as u8))
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.add[a.value() * self.q + b.value()])
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.mul[a.value() * self.q + b.value()])
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.neg[a.value()])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, GfError> {
        if a.is_zero() {
            Err(GfError::ZeroInverse)
        } else {
            Ok(FieldElement(self.inv[a.value()]))
        }
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Raw row of the addition table for `a`: entry `b` is `a + b`.
    #[inline]
    pub(crate) fn add_row(&self, a: usize) -> &[u8] {
        &self.add[a * self.q..(a + 1) * self.q]
    }

    #[inline]
    pub(crate) fn mul_row(&self, a: usize) -> &[u8] {
        &self.mul[a * self.q..(a + 1) * self.q]
    }
}

fn digitwise_add(mut a: usize, mut b: usize, p: usize) -> usize {
    let mut out = 0;
    let mut place = 1;
    while a > 0 || b > 0 {
        out += ((a % p + b % p) % p) * place;
        a /= p;
        b /= p;
        place *= p;
    }
    out
}

fn to_digits(mut v: usize, p: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    for slot in d.iter_mut() {
        *slot = v % p;
        v /= p;
    }
    d
}

fn from_digits(d: &[usize], p: usize) -> usize {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

fn poly_mul_mod(a: usize, b: usize, p: usize, s: usize, modulus: &[u8]) -> usize {
    let da = to_digits(a, p, s);
    let db = to_digits(b, p, s);
    let mut prod = vec![0usize; 2 * s - 1];
    for (i, &x) in da.iter().enumerate() {
        for (j, &y) in db.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    // modulus is monic of degree s: x^s = -(lower terms)
    for deg in (s..prod.len()).rev() {
        let c = prod[deg];
        if c == 0 {
            continue;
        }
        prod[deg] = 0;
        for (k, &m) in modulus[..s].iter().enumerate() {
            let t = deg - s + k;
            prod[t] = (prod[t] + p - (c * m as usize) % p) % p;
        }
    }
    from_digits(&prod[..s], p)
}

/// Remainder of `num` divided by monic `den` over GF(p); coefficient vectors
/// are low-to-high.
fn poly_rem(num: &[usize], den: &[usize], p: usize) -> Vec<usize> {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    while r.len() > dd {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dd;
        if lead != 0 {
            for (k, &c) in den.iter().enumerate() {
                r[shift + k] = (r[shift + k] + p * p - lead * c % p) % p;
            }
        }
        r.pop();
    }
    r
}

fn is_irreducible(poly: &[usize], p: usize) -> bool {
    let deg = poly.len() - 1;
    for d in 1..=deg / 2 {
        // every monic polynomial of degree d
        for lower in 0..p.pow(d as u32) {
            let mut cand = to_digits(lower, p, d);
            cand.push(1);
            if poly_rem(poly, &cand, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn smallest_irreducible(p: usize, s: usize) -> Vec<u8> {
    for lower in 0..p.pow(s as u32) {
        let mut poly = to_digits(lower, p, s);
        poly.push(1);
        if is_irreducible(&poly, p) {
            return poly.into_iter().map(|c| c as u8).collect();
        }
    }
    unreachable!("an irreducible polynomial exists for every degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(f: &Field, v: usize) -> FieldElement {
        f.element(v).unwrap()
    }

    #[test]
    fn construction() {
        let f5 = Field::new(5).unwrap();
        assert_eq!((f5.characteristic(), f5.extension_degree()), (5, 1));
        assert!(f5.reduction_poly().is_empty());

        let f4 = Field::new(4).unwrap();
        assert_eq!((f4.characteristic(), f4.extension_degree()), (2, 2));
        assert_eq!(f4.reduction_poly(), &[1, 1, 1]);

        assert_eq!(Field::new(8).unwrap().reduction_poly(), &[1, 1, 0, 1]);
        assert_eq!(Field::new(9).unwrap().reduction_poly(), &[1, 0, 1]);
        assert_eq!(Field::new(256).unwrap().reduction_poly(), &[1, 1, 0, 1, 1, 0, 0, 0, 1]);

        assert_eq!(Field::new(6), Err(GfError::NotPrimePower(6)));
        assert_eq!(Field::new(12), Err(GfError::NotPrimePower(12)));
        assert_eq!(Field::new(1), Err(GfError::OrderOutOfRange(1)));
        assert_eq!(Field::new(257), Err(GfError::OrderOutOfRange(257)));
    }

    #[test]
    fn small_products() {
        let f5 = Field::new(5).unwrap();
        assert_eq!(f5.mul(el(&f5, 2), el(&f5, 4)), el(&f5, 3));
        let f4 = Field::new(4).unwrap();
        // x * (x + 1) = x^2 + x = 1 mod x^2 + x + 1
        assert_eq!(f4.mul(el(&f4, 2), el(&f4, 3)), FieldElement::ONE);
        assert_eq!(f4.add(el(&f4, 2), el(&f4, 3)), FieldElement::ONE);
        assert_eq!(f4.inv(FieldElement::ZERO), Err(GfError::ZeroInverse));
    }

    #[test]
    fn axioms_exhaustive() {
        for q in [2, 3, 4, 5, 7, 8, 9, 11, 13, 16] {
            let f = Field::new(q).unwrap();
            let all: Vec<_> = f.elements().collect();
            for &a in &all {
                assert_eq!(f.add(a, f.neg(a)), FieldElement::ZERO);
                assert_eq!(f.mul(a, FieldElement::ONE), a);
                assert_eq!(f.add(a, FieldElement::ZERO), a);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
                }
                let psum = (0..f.characteristic()).fold(FieldElement::ZERO, |acc, _| f.add(acc, a));
                assert!(psum.is_zero(), "q={q}");
                for &b in &all {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for &c in &all {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn large_fields_have_inverses() {
        for q in [27, 32, 49, 64, 81, 125, 128, 243, 256] {
            let f = Field::new(q).unwrap();
            for a in f.elements().skip(1) {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE, "q={q}");
            }
        }
    }
}
