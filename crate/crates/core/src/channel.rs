//! The q-ary partial erasure channel.
//!
//! With probability `1 - epsilon` the transmitted symbol is delivered intact.
//! Otherwise the receiver gets a set of `M` symbols that contains the
//! transmitted one, chosen uniformly among the `binom(q-1, M-1)` such sets.

use std::sync::Arc;

use rand::seq::index;
use rand::Rng;
use thiserror::Error;

use crate::combinatorics::binom_u128;
use crate::gf::{Field, FieldElement};
use crate::symset::SymbolSet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("partial-erasure size M={m} must satisfy 2 <= M <= q={q}")]
    BadSetSize { m: usize, q: usize },
    #[error("erasure probability {0} outside [0, 1]")]
    BadEpsilon(f64),
}

#[derive(Debug, Clone)]
pub struct Channel {
    field: Arc<Field>,
    m: usize,
    epsilon: f64,
    i_max: u128,
}

/// What the receiver sees for one symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelOutput {
    pub observed: SymbolSet,
}

impl ChannelOutput {
    pub fn is_erasure(&self) -> bool {
        self.observed.len() > 1
    }
}

impl Channel {
    pub fn new(field: Arc<Field>, m: usize, epsilon: f64) -> Result<Channel, ChannelError> {
        let q = field.order();
        if !(2..=q).contains(&m) {
            return Err(ChannelError::BadSetSize { m, q });
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(ChannelError::BadEpsilon(epsilon));
        }
        Ok(Channel {
            i_max: binom_u128(q - 1, m - 1),
            field,
            m,
            epsilon,
        })
    }

    /// Same channel with a different erasure probability.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Channel, ChannelError> {
        Channel::new(self.field.clone(), self.m, epsilon)
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn q(&self) -> usize {
        self.field.order()
    }

    /// Partial-erasure set size `M`.
    pub fn set_size(&self) -> usize {
        self.m
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Number of distinct size-`M` outputs per input symbol.
    pub fn i_max(&self) -> u128 {
        self.i_max
    }

    pub fn transmit<R: Rng + ?Sized>(&self, x: FieldElement, rng: &mut R) -> ChannelOutput {
        let q = self.q();
        let mut observed = SymbolSet::singleton(q, x);
        if self.epsilon > 0.0 && rng.random::<f64>() < self.epsilon {
            // companions are indices into GF(q) \ {x}
            for idx in index::sample(rng, q - 1, self.m - 1).iter() {
                let v = if idx >= x.value() { idx + 1 } else { idx };
                observed.insert(self.field.element(v).expect("index below q"));
            }
        }
        ChannelOutput { observed }
    }

    /// Capacity in q-ary symbols per channel use, `1 - epsilon * log_q(M)`.
    pub fn capacity(&self) -> f64 {
        1.0 - self.epsilon * (self.m as f64).ln() / (self.q() as f64).ln()
    }

    pub fn capacity_bits(&self) -> f64 {
        self.capacity() * (self.q() as f64).log2()
    }

    /// `H(Y|X)` in q-ary units, with `0 log 0 = 0`.
    pub fn conditional_entropy(&self) -> f64 {
        let ln_q = (self.q() as f64).ln();
        let e = self.epsilon;
        let xlogx = |p: f64, scale: f64| if p > 0.0 { p * (p / scale).ln() } else { 0.0 };
        -(xlogx(1.0 - e, 1.0) + xlogx(e, self.i_max as f64)) / ln_q
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn channel(q: usize, m: usize, eps: f64) -> Channel {
        Channel::new(Arc::new(Field::new(q).unwrap()), m, eps).unwrap()
    }

    #[test]
    fn validation() {
        let f = Arc::new(Field::new(4).unwrap());
        assert!(Channel::new(f.clone(), 1, 0.1).is_err());
        assert!(Channel::new(f.clone(), 5, 0.1).is_err());
        assert!(Channel::new(f.clone(), 2, 1.5).is_err());
        assert_eq!(Channel::new(f, 2, 0.5).unwrap().i_max(), 3);
    }

    #[test]
    fn capacity_values() {
        assert!((channel(4, 2, 0.5).capacity() - 0.75).abs() < 1e-12);
        for eps in [0.0, 0.3, 1.0] {
            assert!((channel(2, 2, eps).capacity() - (1.0 - eps)).abs() < 1e-12);
            assert!((channel(7, 7, eps).capacity() - (1.0 - eps)).abs() < 1e-12);
        }
        assert!((channel(4, 2, 0.5).capacity_bits() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn capacity_monotone() {
        for q in [3, 4, 5, 8] {
            let mut prev_m = f64::INFINITY;
            for m in 2..=q {
                let c = channel(q, m, 0.4).capacity();
                assert!(c <= prev_m + 1e-15);
                prev_m = c;
                let mut prev_e = f64::INFINITY;
                for k in 0..=10 {
                    let c = channel(q, m, k as f64 / 10.0).capacity();
                    assert!(c <= prev_e + 1e-15);
                    prev_e = c;
                }
            }
        }
    }

    #[test]
    fn conditional_entropy_values() {
        assert_eq!(channel(4, 2, 0.0).conditional_entropy(), 0.0);
        assert!((channel(2, 2, 0.5).conditional_entropy() - 1.0).abs() < 1e-12);
        assert!((channel(4, 2, 1.0).conditional_entropy() - 3f64.ln() / 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_outputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = channel(5, 3, 0.0);
        for x in ch.field().clone().elements() {
            assert_eq!(ch.transmit(x, &mut rng).observed, SymbolSet::singleton(5, x));
        }
        let ch = channel(5, 5, 1.0);
        for x in ch.field().clone().elements() {
            assert_eq!(ch.transmit(x, &mut rng).observed, SymbolSet::full(5));
        }
    }

    /// Empirical output frequencies against the transition law, 3 standard errors.
    #[test]
    fn transition_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (q, m, eps, x) in [(4, 2, 1.0, 0), (4, 2, 0.4, 2), (5, 3, 0.7, 4)] {
            let ch = channel(q, m, eps);
            let xe = ch.field().element(x).unwrap();
            let trials = 100_000;
            let mut counts: HashMap<SymbolSet, usize> = HashMap::new();
            for _ in 0..trials {
                let out = ch.transmit(xe, &mut rng).observed;
                assert!(out.contains(xe));
                assert!(out.len() == 1 || out.len() == m);
                *counts.entry(out).or_default() += 1;
            }
            let erased = counts.keys().filter(|s| s.len() == m).count();
            if eps > 0.0 {
                assert_eq!(erased as u128, ch.i_max());
            }
            for (set, &c) in &counts {
                let p = if set.len() == 1 { 1.0 - eps } else { eps / ch.i_max() as f64 };
                let se = (p * (1.0 - p) / trials as f64).sqrt();
                let freq = c as f64 / trials as f64;
                assert!((freq - p).abs() <= 3.0 * se + 1e-12, "{set} freq {freq} vs {p}");
            }
        }
    }
}
