use std::fmt;

/// Probability vector over message sizes `1..=q`.
#[derive(Clone, PartialEq)]
pub struct SizeDistribution {
    probs: Vec<f64>,
}

impl SizeDistribution {
    /// All mass at size `m`.
    pub fn point(q: usize, m: usize) -> SizeDistribution {
        assert!((1..=q).contains(&m), "size {m} outside 1..={q}");
        let mut probs = vec![0.0; q];
        probs[m - 1] = 1.0;
        SizeDistribution { probs }
    }

    pub fn zeros(q: usize) -> SizeDistribution {
        SizeDistribution { probs: vec![0.0; q] }
    }

    /// Wraps `probs[m - 1] = P(size = m)` without normalizing.
    pub fn from_probs(probs: Vec<f64>) -> SizeDistribution {
        SizeDistribution { probs }
    }

    pub fn q(&self) -> usize {
        self.probs.len()
    }

    /// Probability of size `m`; zero outside `1..=q`.
    #[inline]
    pub fn get(&self, m: usize) -> f64 {
        if m == 0 {
            0.0
        } else {
            self.probs.get(m - 1).copied().unwrap_or(0.0)
        }
    }

    #[inline]
    pub fn add(&mut self, m: usize, p: f64) {
        self.probs[m - 1] += p;
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Sizes carrying nonzero mass.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs.iter().enumerate().filter(|(_, &p)| p != 0.0).map(|(i, _)| i + 1)
    }

    pub fn scale(&mut self, factor: f64) {
        self.probs.iter_mut().for_each(|p| *p *= factor);
    }

    pub fn accumulate(&mut self, other: &SizeDistribution, weight: f64) {
        for (a, b) in self.probs.iter_mut().zip(&other.probs) {
            *a += weight * b;
        }
    }

    /// Zeroes the mass below `lower` and rescales the rest to sum to one.
    /// Falls back to a point mass at `q` when nothing survives.
    pub fn truncate_below(&self, lower: usize) -> SizeDistribution {
        let mut probs = self.probs.clone();
        for p in probs.iter_mut().take(lower.saturating_sub(1)) {
            *p = 0.0;
        }
        let total: f64 = probs.iter().sum();
        if total <= 0.0 {
            return SizeDistribution::point(self.q(), self.q());
        }
        probs.iter_mut().for_each(|p| *p /= total);
        SizeDistribution { probs }
    }

    /// Rescales to unit mass in place.
    pub fn normalize(&mut self) {
        let total = self.total();
        if total > 0.0 {
            self.scale(1.0 / total);
        }
    }

    pub fn max_abs_diff(&self, other: &SizeDistribution) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for SizeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.probs.iter()).finish()
    }
}
