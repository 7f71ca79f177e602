//! The check-to-variable size law `P_m`: the distribution of the size of a
//! sumset of independent uniformly random subsets with prescribed sizes.
//!
//! No closed form is known, so this module offers the exact law (enumeration
//! or sampling), point-mass bounds built from Cauchy-Davenport/Karolyi, and
//! two occupancy-chain approximations (balls-and-bins and union).

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::combinatorics::{binom_u128, intersection_prob_t, SizeTuple};
use crate::dist::SizeDistribution;
use crate::gf::Field;
use crate::symset::SymbolSet;

/// Default limit on the number of ordered assignments an exhaustive
/// enumeration may cover.
pub const DEFAULT_ENUMERATION_CAP: u128 = 100_000_000;
pub const DEFAULT_MC_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PmError {
    #[error("empty size tuple")]
    EmptyTuple,
    #[error("subset size {size} outside 1..={q}")]
    BadSize { size: usize, q: usize },
    #[error("exhaustive enumeration needs {needed} assignments, above the cap of {cap}; use a Monte Carlo budget")]
    EnumerationCap { needed: u128, cap: u128 },
}

/// Cauchy-Davenport/Karolyi lower bound, product upper bound and the
/// q-condition for the sumset of sets with the given sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SumsetBounds {
    pub lower: usize,
    pub upper: usize,
    /// Two distinct members whose sizes add up to more than `q`.
    pub q_condition: bool,
}

fn validate(sizes: &[usize], q: usize) -> Result<(), PmError> {
    if sizes.is_empty() {
        return Err(PmError::EmptyTuple);
    }
    match sizes.iter().find(|&&s| s == 0 || s > q) {
        Some(&size) => Err(PmError::BadSize { size, q }),
        None => Ok(()),
    }
}

pub fn sumset_bounds(sizes: &[usize], field: &Field) -> Result<SumsetBounds, PmError> {
    let q = field.order();
    validate(sizes, q)?;
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let k = sorted.len();
    let q_condition = k >= 2 && sorted[0] + sorted[1] > q;
    if q_condition {
        return Ok(SumsetBounds {
            lower: q,
            upper: q,
            q_condition,
        });
    }
    let total: usize = sorted.iter().sum();
    let lower = sorted[0].max(field.characteristic().min(total - k + 1));
    let upper = sorted
        .iter()
        .try_fold(1usize, |acc, &s| acc.checked_mul(s).filter(|&v| v < q))
        .unwrap_or(q);
    Ok(SumsetBounds {
        lower,
        upper,
        q_condition,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// Point mass at the upper bound `B_U` (`P_m^(max)`).
    Max,
    /// Point mass at the lower bound `B_L` (`P_m^(min)`).
    Min,
}

pub fn pm_bound_dist(sizes: &[usize], field: &Field, which: BoundKind) -> Result<SizeDistribution, PmError> {
    let b = sumset_bounds(sizes, field)?;
    let q = field.order();
    let m = match which {
        BoundKind::Max => b.upper,
        BoundKind::Min => b.lower,
    };
    Ok(SizeDistribution::point(q, m))
}

/// Exact sumset-size law as integer counts: `counts[m - 1]` ordered
/// assignments out of `total` produce a sumset of size `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactCounts {
    pub counts: Vec<u128>,
    pub total: u128,
}

impl ExactCounts {
    pub fn to_distribution(&self) -> SizeDistribution {
        SizeDistribution::from_probs(self.counts.iter().map(|&c| c as f64 / self.total as f64).collect())
    }
}

/// Number of ordered assignments of uniformly chosen subsets with the given
/// sizes, saturating at `u128::MAX`.
pub fn assignment_count(sizes: &[usize], q: usize) -> u128 {
    sizes
        .iter()
        .try_fold(1u128, |acc, &s| acc.checked_mul(binom_u128(q, s)))
        .unwrap_or(u128::MAX)
}

/// All `k`-subsets of `GF(q)` in lexicographic order of their element lists.
pub fn k_subsets(q: usize, k: usize) -> Vec<SymbolSet> {
    let mut out = Vec::new();
    if k > q {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(SymbolSet::from_values(q, idx.iter().copied()).expect("indices below q"));
        let Some(pos) = (0..k).rev().find(|&i| idx[i] != i + q - k) else {
            return out;
        };
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exhaustive sumset-size law. Assignments are folded one set at a time,
/// merging assignments that share the same partial sumset, so the result is
/// the exact count over all `prod_j binom(q, |S_j|)` ordered assignments.
pub fn pm_exact_counts(sizes: &[usize], field: &Field, cap: u128) -> Result<ExactCounts, PmError> {
    let q = field.order();
    validate(sizes, q)?;
    let total = assignment_count(sizes, q);
    if total > cap {
        return Err(PmError::EnumerationCap { needed: total, cap });
    }
    let mut partial: HashMap<SymbolSet, u128> = HashMap::new();
    partial.insert(SymbolSet::singleton(q, crate::gf::FieldElement::ZERO), 1);
    for &s in sizes {
        let choices = k_subsets(q, s);
        let mut next: HashMap<SymbolSet, u128> = HashMap::with_capacity(partial.len() * 2);
        for (acc, &weight) in &partial {
            for c in &choices {
                *next.entry(acc.sumset_pair(field, c)).or_default() += weight;
            }
        }
        partial = next;
    }
    let mut counts = vec![0u128; q];
    for (set, weight) in partial {
        counts[set.len() - 1] += weight;
    }
    Ok(ExactCounts { counts, total })
}

/// Monte Carlo estimate of the sumset-size law.
pub fn pm_monte_carlo(sizes: &[usize], field: &Field, samples: usize, seed: u64) -> Result<SizeDistribution, PmError> {
    let q = field.order();
    validate(sizes, q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; q];
    for _ in 0..samples {
        let mut acc = SymbolSet::singleton(q, crate::gf::FieldElement::ZERO);
        for &s in sizes {
            let set = SymbolSet::from_values(q, index::sample(&mut rng, q, s).iter()).expect("indices below q");
            acc = acc.sumset_pair(field, &set);
        }
        counts[acc.len() - 1] += 1;
    }
    Ok(SizeDistribution::from_probs(
        counts.into_iter().map(|c| c as f64 / samples as f64).collect(),
    ))
}

/// How the exact law is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactBudget {
    /// Enumerate every assignment; fail above `cap`.
    Exhaustive { cap: u128 },
    /// Enumerate below `cap`, sample above it.
    Fallback { cap: u128, samples: usize, seed: u64 },
    /// Always sample.
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for ExactBudget {
    fn default() -> Self {
        ExactBudget::Exhaustive {
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

pub fn pm_exact(sizes: &[usize], field: &Field, budget: ExactBudget) -> Result<SizeDistribution, PmError> {
    match budget {
        ExactBudget::Exhaustive { cap } => Ok(pm_exact_counts(sizes, field, cap)?.to_distribution()),
        ExactBudget::Fallback { cap, samples, seed } => {
            if assignment_count(sizes, field.order()) <= cap {
                Ok(pm_exact_counts(sizes, field, cap)?.to_distribution())
            } else {
                pm_monte_carlo(sizes, field, samples, tuple_seed(seed, sizes))
            }
        }
        ExactBudget::MonteCarlo { samples, seed } => pm_monte_carlo(sizes, field, samples, tuple_seed(seed, sizes)),
    }
}

/// Seed derived from the master seed and the sorted tuple, so sampled tables
/// do not depend on evaluation order.
fn tuple_seed(seed: u64, sizes: &[usize]) -> u64 {
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable();
    sorted.iter().fold(seed ^ 0xcbf2_9ce4_8422_2325, |h, &s| {
        (h ^ s as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Transition matrix of the occupancy chain with step size `D` on states
/// `1..=q`: from `i` occupied bins, a uniformly random `D`-set of bins
/// overlapping the occupied ones in `k` places leads to `i + D - k`.
#[derive(Clone, PartialEq)]
pub struct GammaMatrix {
    q: usize,
    step: usize,
    entries: Vec<f64>,
}

impl fmt::Debug for GammaMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for i in 1..=self.q {
            list.entry(&self.row(i));
        }
        list.finish()
    }
}

impl GammaMatrix {
    pub fn new(step: usize, q: usize) -> GammaMatrix {
        assert!((1..=q).contains(&step), "step {step} outside 1..={q}");
        let mut entries = vec![0.0; q * q];
        for i in 1..=q {
            let t = SizeTuple::new(vec![i, step], q).expect("sizes within universe");
            for overlap in 0..=i.min(step) {
                let j = i + step - overlap;
                if j > q {
                    continue;
                }
                entries[(i - 1) * q + (j - 1)] = intersection_prob_t(&t, overlap).expect("overlap within range");
            }
        }
        GammaMatrix { q, step, entries }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// Entry `(i, j)` with 1-based states.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i - 1) * self.q + (j - 1)]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[(i - 1) * self.q..i * self.q]
    }

    /// `v * Gamma` for a row vector over states `1..=q`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.q];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            // upper triangular: row i only reaches j >= i
            let row = &self.entries[i * self.q..(i + 1) * self.q];
            for (o, g) in out[i..].iter_mut().zip(&row[i..]) {
                *o += vi * g;
            }
        }
        out
    }

    /// Distribution of the state after `steps` transitions from `start`.
    pub fn evolve(&self, start: usize, steps: u64) -> Vec<f64> {
        let mut v = vec![0.0; self.q];
        v[start - 1] = 1.0;
        for _ in 0..steps {
            if v[self.q - 1] == 1.0 {
                break;
            }
            v = self.apply(&v);
        }
        v
    }
}

/// Number of occupied bins after throwing `balls` balls uniformly into `q`
/// bins, via the step-1 chain; entry `m - 1` is `P(m occupied)`.
pub fn occupancy_distribution(balls: u64, q: usize) -> Vec<f64> {
    GammaMatrix::new(1, q).evolve(1, balls.saturating_sub(1))
}

fn product_saturating(sizes: &[usize]) -> u64 {
    sizes
        .iter()
        .try_fold(1u64, |acc, &s| acc.checked_mul(s as u64))
        .unwrap_or(u64::MAX)
}

/// Balls-and-bins approximation: `prod |S_j|` independent sums.
pub fn pm_balls(sizes: &[usize], field: &Field) -> Result<SizeDistribution, PmError> {
    let q = field.order();
    let b = sumset_bounds(sizes, field)?;
    if b.q_condition {
        return Ok(SizeDistribution::point(q, q));
    }
    let balls = product_saturating(sizes);
    let g = occupancy_distribution(balls, q);
    Ok(SizeDistribution::from_probs(g).truncate_below(b.lower))
}

/// Union approximation: `prod |S_j| / D` independent translates of a
/// `D`-set, where `D` is the largest size.
pub fn pm_union(sizes: &[usize], field: &Field) -> Result<SizeDistribution, PmError> {
    let q = field.order();
    let b = sumset_bounds(sizes, field)?;
    if b.q_condition {
        return Ok(SizeDistribution::point(q, q));
    }
    let d = *sizes.iter().max().expect("nonempty");
    let steps = product_saturating(sizes) / d as u64;
    let u = GammaMatrix::new(d, q).evolve(d, steps - 1);
    Ok(SizeDistribution::from_probs(u).truncate_below(b.lower))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PmKind {
    Exact,
    /// `P_m^(max)`; yields a lower bound on the decoding threshold.
    BoundLower,
    /// `P_m^(min)`; yields an upper bound on the decoding threshold.
    BoundUpper,
    BallsAndBins,
    Union,
}

impl PmKind {
    pub const ALL: [PmKind; 5] = [
        PmKind::BoundLower,
        PmKind::Exact,
        PmKind::Union,
        PmKind::BallsAndBins,
        PmKind::BoundUpper,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PmKind::Exact => "exact",
            PmKind::BoundLower => "bound-lower",
            PmKind::BoundUpper => "bound-upper",
            PmKind::BallsAndBins => "balls",
            PmKind::Union => "union",
        }
    }
}

impl fmt::Display for PmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PmKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PmKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown model {s:?}; expected one of exact, bound-lower, bound-upper, balls, union"))
    }
}

/// A `P_m` model over a fixed field with a table cache keyed by the sorted
/// size tuple. Shareable across threads.
pub struct PmModel {
    kind: PmKind,
    field: Arc<Field>,
    budget: ExactBudget,
    cache: RwLock<HashMap<Vec<usize>, SizeDistribution>>,
}

impl fmt::Debug for PmModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PmModel")
            .field("kind", &self.kind)
            .field("q", &self.field.order())
            .field("budget", &self.budget)
            .finish()
    }
}

impl PmModel {
    pub fn new(kind: PmKind, field: Arc<Field>) -> PmModel {
        PmModel::with_budget(kind, field, ExactBudget::default())
    }

    pub fn with_budget(kind: PmKind, field: Arc<Field>, budget: ExactBudget) -> PmModel {
        PmModel {
            kind,
            field,
            budget,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn kind(&self) -> PmKind {
        self.kind
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    /// Law of the sumset size for incoming sets with these sizes.
    pub fn distribution(&self, sizes: &[usize]) -> Result<SizeDistribution, PmError> {
        let mut key = sizes.to_vec();
        key.sort_unstable();
        if let Some(d) = self.cache.read().unwrap().get(&key) {
            return Ok(d.clone());
        }
        let d = self.compute(&key)?;
        Ok(self.cache.write().unwrap().entry(key).or_insert(d).clone())
    }

    fn compute(&self, sizes: &[usize]) -> Result<SizeDistribution, PmError> {
        let field = &self.field;
        match self.kind {
            PmKind::Exact => {
                // sizes summing past q force the full field
                if sumset_bounds(sizes, field)?.q_condition {
                    Ok(SizeDistribution::point(field.order(), field.order()))
                } else {
                    pm_exact(sizes, field, self.budget)
                }
            }
            PmKind::BoundLower => pm_bound_dist(sizes, field, BoundKind::Max),
            PmKind::BoundUpper => pm_bound_dist(sizes, field, BoundKind::Min),
            PmKind::BallsAndBins => pm_balls(sizes, field),
            PmKind::Union => pm_union(sizes, field),
        }
    }

    pub fn cached_tables(&self) -> usize {
        self.cache.read().unwrap().len()
    }
}
