//! Subsets of GF(q) stored as 256-bit masks.
//!
//! A `SymbolSet` carries only the universe size `q`; the arithmetic that
//! scaling and sumsets need comes from the [`Field`] passed to each operation.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::gf::{Field, FieldElement, MAX_ORDER};

const WORDS: usize = MAX_ORDER / 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SetError {
    #[error("scaling factor must be nonzero")]
    ZeroScale,
    #[error("sumset of an empty family")]
    EmptyFamily,
    #[error("sumset operand is empty")]
    EmptyOperand,
    #[error("sets over different universes ({0} vs {1})")]
    UniverseMismatch(usize, usize),
    #[error("cannot parse symbol set {0:?}")]
    Parse(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolSet {
    bits: [u64; WORDS],
    q: u16,
}

impl SymbolSet {
    pub fn empty(q: usize) -> SymbolSet {
        assert!(q <= MAX_ORDER);
        SymbolSet {
            bits: [0; WORDS],
            q: q as u16,
        }
    }

    /// The whole field.
    pub fn full(q: usize) -> SymbolSet {
        let mut s = SymbolSet::empty(q);
        for v in 0..q {
            s.insert_value(v);
        }
        s
    }

    pub fn singleton(q: usize, x: FieldElement) -> SymbolSet {
        let mut s = SymbolSet::empty(q);
        s.insert(x);
        s
    }

    /// Builds a set from raw element values; values `>= q` are an error.
    pub fn from_values<I: IntoIterator<Item = usize>>(q: usize, values: I) -> Result<SymbolSet, SetError> {
        let mut s = SymbolSet::empty(q);
        for v in values {
            if v >= q {
                return Err(SetError::Parse(format!("element {v} outside GF({q})")));
            }
            s.insert_value(v);
        }
        Ok(s)
    }

    /// Set whose membership mask is the low `q` bits of `mask` (q <= 64).
    pub fn from_mask(q: usize, mask: u64) -> SymbolSet {
        debug_assert!(q <= 64);
        let mut s = SymbolSet::empty(q);
        s.bits[0] = if q == 64 { mask } else { mask & ((1u64 << q) - 1) };
        s
    }

    #[inline]
    pub fn universe(&self) -> usize {
        self.q as usize
    }

    #[inline]
    pub fn insert(&mut self, x: FieldElement) {
        self.insert_value(x.value());
    }

    #[inline]
    fn insert_value(&mut self, v: usize) {
        self.bits[v >> 6] |= 1u64 << (v & 63);
    }

    #[inline]
    pub fn contains(&self, x: FieldElement) -> bool {
        self.contains_value(x.value())
    }

    #[inline]
    pub fn contains_value(&self, v: usize) -> bool {
        v < self.universe() && self.bits[v >> 6] & (1u64 << (v & 63)) != 0
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn is_subset(&self, other: &SymbolSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// Element values in increasing order.
    pub fn values(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let tz = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + tz)
            })
        })
    }

    /// The only element, if the set is a singleton.
    pub fn single_value(&self) -> Option<usize> {
        (self.len() == 1).then(|| self.values().next().unwrap())
    }

    /// `{a * s : s in self}`.
    pub fn scale(&self, field: &Field, a: FieldElement) -> Result<SymbolSet, SetError> {
        if a.is_zero() {
            return Err(SetError::ZeroScale);
        }
        let row = field.mul_row(a.value());
        let mut out = SymbolSet::empty(self.universe());
        for v in self.values() {
            out.insert_value(row[v] as usize);
        }
        Ok(out)
    }

    /// `{s + t : s in self, t in other}`.
    pub fn sumset_pair(&self, field: &Field, other: &SymbolSet) -> SymbolSet {
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        let large_vals: Vec<usize> = large.values().collect();
        let mut out = SymbolSet::empty(self.universe());
        for a in small.values() {
            let row = field.add_row(a);
            for &b in &large_vals {
                out.insert_value(row[b] as usize);
            }
            if out.len() == out.universe() {
                break;
            }
        }
        out
    }

    /// Bitwise intersection with another set over the same universe.
    #[inline]
    pub fn and(&self, other: &SymbolSet) -> SymbolSet {
        let mut out = *self;
        for (a, b) in out.bits.iter_mut().zip(&other.bits) {
            *a &= b;
        }
        out
    }
}

/// Sumset of a nonempty family, folded pairwise from the left.
pub fn sumset(field: &Field, sets: &[SymbolSet]) -> Result<SymbolSet, SetError> {
    let (first, rest) = sets.split_first().ok_or(SetError::EmptyFamily)?;
    check_family(field.order(), sets)?;
    if sets.iter().any(SymbolSet::is_empty) {
        return Err(SetError::EmptyOperand);
    }
    Ok(rest.iter().fold(*first, |acc, s| acc.sumset_pair(field, s)))
}

/// Intersection of a nonempty family. May be empty.
pub fn intersect(sets: &[SymbolSet]) -> Result<SymbolSet, SetError> {
    let (first, rest) = sets.split_first().ok_or(SetError::EmptyFamily)?;
    check_family(first.universe(), sets)?;
    Ok(rest.iter().fold(*first, |acc, s| acc.and(s)))
}

fn check_family(q: usize, sets: &[SymbolSet]) -> Result<(), SetError> {
    match sets.iter().find(|s| s.universe() != q) {
        Some(s) => Err(SetError::UniverseMismatch(q, s.universe())),
        None => Ok(()),
    }
}

impl fmt::Display for SymbolSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.values().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for SymbolSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}/GF({})", self.q)
    }
}

/// Parses `"{0,2,3}"` into a set over GF(q).
pub fn parse_set(q: usize, text: &str) -> Result<SymbolSet, SetError> {
    let t = text.trim();
    let inner = t
        .strip_prefix('{')
        .and_then(|r| r.strip_suffix('}'))
        .ok_or_else(|| SetError::Parse(text.to_string()))?;
    let mut values = Vec::new();
    for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        values.push(usize::from_str(part).map_err(|_| SetError::Parse(text.to_string()))?);
    }
    SymbolSet::from_values(q, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(q: usize, v: &[usize]) -> SymbolSet {
        SymbolSet::from_values(q, v.iter().copied()).unwrap()
    }

    #[test]
    fn scaling() {
        let f5 = Field::new(5).unwrap();
        let two = f5.element(2).unwrap();
        assert_eq!(set(5, &[0, 1, 2]).scale(&f5, two).unwrap(), set(5, &[0, 2, 4]));
        assert_eq!(set(5, &[1, 3]).scale(&f5, FieldElement::ONE).unwrap(), set(5, &[1, 3]));
        assert_eq!(set(5, &[1]).scale(&f5, FieldElement::ZERO), Err(SetError::ZeroScale));

        let f4 = Field::new(4).unwrap();
        let s = set(4, &[1, 2, 3]).scale(&f4, f4.element(2).unwrap()).unwrap();
        assert_eq!(s, set(4, &[1, 2, 3]));
    }

    #[test]
    fn sumsets() {
        let f5 = Field::new(5).unwrap();
        assert_eq!(sumset(&f5, &[set(5, &[3])]).unwrap(), set(5, &[3]));
        assert_eq!(sumset(&f5, &[set(5, &[0, 1]), set(5, &[0, 1])]).unwrap(), set(5, &[0, 1, 2]));
        let f4 = Field::new(4).unwrap();
        assert_eq!(sumset(&f4, &[set(4, &[0, 1]), set(4, &[0, 1])]).unwrap(), set(4, &[0, 1]));
        assert_eq!(sumset(&f4, &[]), Err(SetError::EmptyFamily));
        assert_eq!(sumset(&f4, &[set(4, &[1]), SymbolSet::empty(4)]), Err(SetError::EmptyOperand));
    }

    #[test]
    fn intersections() {
        let s = intersect(&[set(5, &[0, 1]), set(5, &[0, 2, 3]), set(5, &[0, 1, 4])]).unwrap();
        assert_eq!(s, set(5, &[0]));
        assert_eq!(intersect(&[set(5, &[2, 4])]).unwrap(), set(5, &[2, 4]));
        assert!(intersect(&[set(5, &[1, 2]), set(5, &[3, 4])]).unwrap().is_empty());
        assert_eq!(
            intersect(&[set(5, &[1]), set(4, &[1])]),
            Err(SetError::UniverseMismatch(5, 4))
        );
    }

    #[test]
    fn render_and_parse() {
        let s = set(7, &[3, 0, 2]);
        assert_eq!(s.to_string(), "{0,2,3}");
        assert_eq!(parse_set(7, " {0, 2,3} ").unwrap(), s);
        assert_eq!(parse_set(7, "{}").unwrap(), SymbolSet::empty(7));
        assert!(parse_set(7, "{7}").is_err());
        assert!(parse_set(7, "0,1").is_err());
        let big = SymbolSet::full(256);
        assert_eq!(big.len(), 256);
        assert_eq!(big.values().last(), Some(255));
    }

    /// Exhaustive translation and common-scaling invariance of pairwise
    /// sumset size. Independent factors do not preserve size:
    /// {0,1}+{0,1} has 3 elements in GF(5) but {0,1}+{0,2} has 4.
    #[test]
    fn sumset_size_invariances() {
        for q in [2, 3, 4, 5, 7, 8] {
            let f = Field::new(q).unwrap();
            let subsets: Vec<SymbolSet> = (1u64..(1 << q))
                .map(|m| SymbolSet::from_mask(q, m))
                .filter(|s| s.len() <= 3)
                .collect();
            for s in &subsets {
                for t in &subsets {
                    let base = s.sumset_pair(&f, t).len();
                    for a in f.elements() {
                        let row = f.add_row(a.value());
                        let shifted = SymbolSet::from_values(q, s.values().map(|v| row[v] as usize)).unwrap();
                        assert_eq!(shifted.sumset_pair(&f, t).len(), base);
                        if !a.is_zero() {
                            let scaled = s.scale(&f, a).unwrap().sumset_pair(&f, &t.scale(&f, a).unwrap());
                            assert_eq!(scaled.len(), base);
                        }
                    }
                }
            }
        }
        let f5 = Field::new(5).unwrap();
        let s = set(5, &[0, 1]);
        assert_eq!(s.sumset_pair(&f5, &s).len(), 3);
        assert_eq!(s.sumset_pair(&f5, &s.scale(&f5, f5.element(2).unwrap()).unwrap()).len(), 4);
    }

    /// With one operand uniform over all k-subsets, the law of the sumset
    /// size is unchanged by independent nonzero factors.
    #[test]
    fn sumset_size_law_invariant_under_factors() {
        for q in [4, 5, 7] {
            let f = Field::new(q).unwrap();
            for ks in 1..=3 {
                for kt in 1..=3 {
                    let all_s: Vec<SymbolSet> = (1u64..(1 << q)).map(|m| SymbolSet::from_mask(q, m)).filter(|x| x.len() == ks).collect();
                    let all_t: Vec<SymbolSet> = (1u64..(1 << q)).map(|m| SymbolSet::from_mask(q, m)).filter(|x| x.len() == kt).collect();
                    let law = |a: FieldElement, b: FieldElement| {
                        let mut hist = vec![0usize; q + 1];
                        for s in &all_s {
                            for t in &all_t {
                                hist[s.scale(&f, a).unwrap().sumset_pair(&f, &t.scale(&f, b).unwrap()).len()] += 1;
                            }
                        }
                        hist
                    };
                    let base = law(FieldElement::ONE, FieldElement::ONE);
                    for a in f.elements().skip(1) {
                        for b in f.elements().skip(1) {
                            assert_eq!(law(a, b), base);
                        }
                    }
                }
            }
        }
    }

    fn arb_sets(q: usize, n: usize) -> impl Strategy<Value = Vec<SymbolSet>> {
        prop::collection::vec(1u64..(1 << q), 1..=n)
            .prop_map(move |masks| masks.into_iter().map(|m| SymbolSet::from_mask(q, m)).collect())
    }

    proptest! {
        #[test]
        fn sumset_fold_order_irrelevant(sets in arb_sets(8, 4), rot in 0usize..4) {
            let f = Field::new(8).unwrap();
            let a = sumset(&f, &sets).unwrap();
            let mut rotated = sets.clone();
            let k = rot % rotated.len();
            rotated.rotate_left(k);
            rotated.reverse();
            prop_assert_eq!(a, sumset(&f, &rotated).unwrap());
        }

        #[test]
        fn scale_preserves_size(mask in 1u64..(1 << 13), a in 1usize..13) {
            let f = Field::new(13).unwrap();
            let s = SymbolSet::from_mask(13, mask);
            prop_assert_eq!(s.scale(&f, f.element(a).unwrap()).unwrap().len(), s.len());
        }

        #[test]
        fn display_round_trips(mask in any::<u64>()) {
            let s = SymbolSet::from_mask(64, mask);
            prop_assert_eq!(parse_set(64, &s.to_string()).unwrap(), s);
        }
    }
}
