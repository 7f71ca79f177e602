//! Exact counts for intersections of random fixed-size subsets.
//!
//! `I_m` counts ordered families of subsets of a `q`-element universe, with
//! prescribed sizes, whose common intersection has exactly `m` elements. It is
//! an inclusion-exclusion sum with large cancellations, so it is evaluated in
//! big integers and only the final ratios become floating point.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CombError {
    #[error("empty size tuple")]
    EmptyTuple,
    #[error("subset size {size} exceeds universe {universe}")]
    SizeExceedsUniverse { size: usize, universe: usize },
    #[error("intersection size {m} outside {lo}..={hi}")]
    SizeOutOfRange { m: usize, lo: usize, hi: usize },
    #[error("subset sizes must be at least 1")]
    ZeroSize,
}

/// Sizes `|S_j|` of a family of subsets of a `universe`-element set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SizeTuple {
    sizes: Vec<usize>,
    universe: usize,
}

impl SizeTuple {
    pub fn new(mut sizes: Vec<usize>, universe: usize) -> Result<SizeTuple, CombError> {
        if sizes.is_empty() {
            return Err(CombError::EmptyTuple);
        }
        if let Some(&size) = sizes.iter().find(|&&s| s > universe) {
            return Err(CombError::SizeExceedsUniverse { size, universe });
        }
        sizes.sort_unstable();
        Ok(SizeTuple { sizes, universe })
    }

    /// Sizes in nondecreasing order.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    /// Smallest size, `mu`.
    pub fn min_size(&self) -> usize {
        self.sizes[0]
    }

    pub fn max_size(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    fn shifted(&self) -> SizeTuple {
        SizeTuple {
            sizes: self.sizes.iter().map(|s| s - 1).collect(),
            universe: self.universe - 1,
        }
    }
}

/// Binomial coefficient; zero when `k > n`.
pub fn binom(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Binomial coefficient for arguments small enough to fit in `u128`.
pub fn binom_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn binom_signed(n: usize, k: usize) -> BigInt {
    BigInt::from(binom(n, k))
}

/// Number of families with the given sizes whose intersection contains a
/// fixed `l`-set, summed over all `l`-sets.
fn upsilon(t: &SizeTuple, l: usize) -> BigInt {
    let q = t.universe;
    if l > q {
        return BigInt::zero();
    }
    t.sizes.iter().fold(binom_signed(q, l), |acc, &s| {
        if s < l {
            BigInt::zero()
        } else {
            acc * binom_signed(q - l, s - l)
        }
    })
}

/// Number of ordered families with intersection of size exactly `m`.
pub fn intersection_count(t: &SizeTuple, m: usize) -> Result<BigUint, CombError> {
    let mu = t.min_size();
    if m > mu {
        return Err(CombError::SizeOutOfRange { m, lo: 0, hi: mu });
    }
    let mut total = BigInt::zero();
    for i in 0..=(mu - m) {
        let term = upsilon(t, m + i) * binom_signed(m + i, m);
        if i % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(total.to_biguint().expect("intersection count is nonnegative"))
}

/// `[I_0, ..., I_mu]`.
pub fn intersection_counts(t: &SizeTuple) -> Vec<BigUint> {
    (0..=t.min_size())
        .map(|m| intersection_count(t, m).expect("m within range"))
        .collect()
}

/// Exact law of the intersection size for uniformly random subsets:
/// entry `m` is `T_m` for `m = 0..=mu`.
pub fn intersection_law_exact(t: &SizeTuple) -> Vec<BigRational> {
    let counts = intersection_counts(t);
    let total: BigUint = counts.iter().sum();
    let total = BigInt::from(total);
    counts
        .into_iter()
        .map(|c| BigRational::new(BigInt::from(c), total.clone()))
        .collect()
}

/// Exact law of the intersection size when every subset is conditioned to
/// contain a fixed element: entry `m - 1` is `Q_m` for `m = 1..=mu`.
pub fn intersection_law_containing_exact(t: &SizeTuple) -> Result<Vec<BigRational>, CombError> {
    let mu = t.min_size();
    if mu == 0 {
        return Err(CombError::ZeroSize);
    }
    if mu == 1 {
        return Ok(std::iter::once(BigRational::one()).collect());
    }
    let shifted = t.shifted();
    Ok(intersection_law_exact(&shifted))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("finite ratio")
}

type LawCache = RwLock<HashMap<(bool, SizeTuple), Vec<f64>>>;

fn law_cache() -> &'static LawCache {
    static CACHE: OnceLock<LawCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn cached(containing: bool, t: &SizeTuple, compute: impl FnOnce() -> Vec<f64>) -> Vec<f64> {
    let key = (containing, t.clone());
    if let Some(v) = law_cache().read().unwrap().get(&key) {
        return v.clone();
    }
    let v = compute();
    law_cache().write().unwrap().entry(key).or_insert(v).clone()
}

/// `[T_0, ..., T_mu]` as floats, memoized.
pub fn intersection_law(t: &SizeTuple) -> Vec<f64> {
    cached(false, t, || intersection_law_exact(t).iter().map(to_f64).collect())
}

/// `[Q_1, ..., Q_mu]` as floats, memoized.
pub fn intersection_law_containing(t: &SizeTuple) -> Result<Vec<f64>, CombError> {
    if t.min_size() == 0 {
        return Err(CombError::ZeroSize);
    }
    Ok(cached(true, t, || {
        intersection_law_containing_exact(t)
            .expect("sizes checked")
            .iter()
            .map(to_f64)
            .collect()
    }))
}

/// `T_m`: probability that uniformly random subsets with the given sizes
/// intersect in exactly `m` elements.
pub fn intersection_prob_t(t: &SizeTuple, m: usize) -> Result<f64, CombError> {
    let mu = t.min_size();
    if m > mu {
        return Err(CombError::SizeOutOfRange { m, lo: 0, hi: mu });
    }
    Ok(intersection_law(t)[m])
}

/// `Q_m`: as `T_m` but with every subset conditioned to contain zero.
pub fn intersection_prob_q(t: &SizeTuple, m: usize) -> Result<f64, CombError> {
    let mu = t.min_size();
    if mu == 0 {
        return Err(CombError::ZeroSize);
    }
    if !(1..=mu).contains(&m) {
        return Err(CombError::SizeOutOfRange { m, lo: 1, hi: mu });
    }
    Ok(intersection_law_containing(t)?[m - 1])
}
