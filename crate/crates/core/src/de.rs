//! Density evolution over message-size distributions.
//!
//! The state is the law of the size of a variable-to-check message (`z`) and
//! of a check-to-variable message (`w`), each a vector over sizes `1..=q`.
//! Both updates sum over the sizes of the incoming messages; since `P_m` and
//! `Q_m` depend only on the multiset of sizes, the sums run over multisets
//! with multinomial weights.

use std::sync::Arc;

use thiserror::Error;

use crate::channel::Channel;
use crate::combinatorics::{intersection_law_containing, SizeTuple};
use crate::ldpc::DegreeDistribution;
use crate::pm_models::{PmError, PmModel};

pub use crate::dist::SizeDistribution;

/// Stable non-trivial fixed point: failure probability moved less than this.
pub const STALL_TOLERANCE: f64 = 1e-13;
pub const DEFAULT_MAX_ITERS: usize = 2000;
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-10;
pub const DEFAULT_THRESHOLD_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeError {
    #[error(transparent)]
    Pm(#[from] PmError),
    #[error("convergence is not monotone in epsilon: converges at {converging} but not at {failing}")]
    NonMonotone { converging: f64, failing: f64 },
}

/// Calls `visit(sizes, weight)` for every multiset of `k` sizes drawn from the
/// support of `dist`, where `weight` is the multinomial probability of
/// observing that multiset among `k` independent draws.
pub fn for_each_size_multiset(dist: &SizeDistribution, k: usize, mut visit: impl FnMut(&[usize], f64)) {
    let support: Vec<(usize, f64)> = dist.support().map(|m| (m, dist.get(m))).collect();
    let mut sizes = Vec::with_capacity(k);
    // binomial(remaining, count) * p^count per support point
    fn recurse(
        support: &[(usize, f64)],
        remaining: usize,
        weight: f64,
        sizes: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize], f64),
    ) {
        let Some((&(size, p), rest)) = support.split_first() else {
            if remaining == 0 {
                visit(sizes, weight);
            }
            return;
        };
        let lowest = if rest.is_empty() { remaining } else { 0 };
        let mut choose = 1.0;
        let mut power = 1.0;
        for count in 0..=remaining {
            if count > 0 {
                choose = choose * (remaining - count + 1) as f64 / count as f64;
                power *= p;
            }
            if count < lowest {
                continue;
            }
            let before = sizes.len();
            sizes.extend(std::iter::repeat_n(size, count));
            recurse(rest, remaining - count, weight * choose * power, sizes, visit);
            sizes.truncate(before);
        }
    }
    recurse(&support, k, 1.0, &mut sizes, &mut visit);
}

/// Check-node update for a single check degree.
pub fn de_ctv_update(z: &SizeDistribution, dc: usize, pm: &PmModel) -> Result<SizeDistribution, PmError> {
    let mut w = SizeDistribution::zeros(z.q());
    let mut err = None;
    for_each_size_multiset(z, dc - 1, |sizes, weight| {
        if err.is_some() {
            return;
        }
        if sizes.is_empty() {
            w.add(1, weight);
            return;
        }
        match pm.distribution(sizes) {
            Ok(p) => w.accumulate(&p, weight),
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(w),
    }
}

/// Law of the intersection of the channel set with `dv - 1` incoming check
/// messages, for an erased variable.
fn erased_vtc_law(w: &SizeDistribution, dv: usize, set_size: usize) -> SizeDistribution {
    let q = w.q();
    let mut out = SizeDistribution::zeros(q);
    for_each_size_multiset(w, dv - 1, |sizes, weight| {
        let mut all = sizes.to_vec();
        all.push(set_size);
        let t = SizeTuple::new(all, q).expect("sizes within 1..=q");
        let law = intersection_law_containing(&t).expect("sizes at least 1");
        for (i, p) in law.iter().enumerate() {
            out.add(i + 1, weight * p);
        }
    });
    out
}

/// Variable-node update for a single variable degree.
pub fn de_vtc_update(w: &SizeDistribution, dv: usize, channel: &Channel) -> SizeDistribution {
    let eps = channel.epsilon();
    let mut z = erased_vtc_law(w, dv, channel.set_size());
    z.scale(eps);
    z.add(1, 1.0 - eps);
    z
}

/// Irregular check update: mixture over check degrees with weights `rho_i`.
pub fn de_ctv_mix(z: &SizeDistribution, degrees: &DegreeDistribution, pm: &PmModel) -> Result<SizeDistribution, PmError> {
    let mut w = SizeDistribution::zeros(z.q());
    for (dc, weight) in degrees.check_degrees() {
        w.accumulate(&de_ctv_update(z, dc, pm)?, weight);
    }
    Ok(w)
}

/// Irregular variable update: mixture over variable degrees with weights `lambda_i`.
pub fn de_vtc_mix(w: &SizeDistribution, degrees: &DegreeDistribution, channel: &Channel) -> SizeDistribution {
    let mut erased = SizeDistribution::zeros(w.q());
    for (dv, weight) in degrees.variable_degrees() {
        erased.accumulate(&erased_vtc_law(w, dv, channel.set_size()), weight);
    }
    erased.scale(channel.epsilon());
    erased.add(1, 1.0 - channel.epsilon());
    erased
}

#[derive(Debug, Clone)]
pub struct DeConfig {
    pub channel: Channel,
    pub degrees: DegreeDistribution,
    pub pm: Arc<PmModel>,
    pub max_iters: usize,
    pub convergence_tol: f64,
}

impl DeConfig {
    pub fn new(channel: Channel, degrees: DegreeDistribution, pm: Arc<PmModel>) -> DeConfig {
        DeConfig {
            channel,
            degrees,
            pm,
            max_iters: DEFAULT_MAX_ITERS,
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
        }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> DeConfig {
        DeConfig {
            channel: self.channel.with_epsilon(epsilon).expect("epsilon within [0, 1]"),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeRun {
    pub converged: bool,
    pub iterations: usize,
    /// `(iteration, 1 - z_1)` starting from iteration 0.
    pub trajectory: Vec<(usize, f64)>,
    pub final_z: SizeDistribution,
    /// Stopped at a fixed point with failure probability above tolerance.
    pub stalled: bool,
    /// Iterations at which `z_1` decreased (expected to stay empty).
    pub monotonicity_violations: Vec<usize>,
    /// Largest deviation of a distribution's total mass from one.
    pub max_mass_error: f64,
}

fn failure_prob(z: &SizeDistribution) -> f64 {
    // mass above size 1, summed directly to keep precision near zero
    z.probs()[1..].iter().sum()
}

pub fn initial_vtc(channel: &Channel) -> SizeDistribution {
    let mut z = SizeDistribution::zeros(channel.q());
    z.add(1, 1.0 - channel.epsilon());
    z.add(channel.set_size(), channel.epsilon());
    z
}

pub fn de_run(cfg: &DeConfig) -> Result<DeRun, DeError> {
    let mut z = initial_vtc(&cfg.channel);
    let mut pe = failure_prob(&z);
    let mut trajectory = vec![(0, pe)];
    let mut violations = Vec::new();
    let mut max_mass_error: f64 = 0.0;
    let mut iterations = 0;
    let mut stalled = false;
    while pe >= cfg.convergence_tol && iterations < cfg.max_iters {
        iterations += 1;
        let mut w = de_ctv_mix(&z, &cfg.degrees, &cfg.pm)?;
        max_mass_error = max_mass_error.max((w.total() - 1.0).abs());
        // rounding in the total mass is amplified by (d_c - 1)(d_v - 1) per iteration
        w.normalize();
        let mut next = de_vtc_mix(&w, &cfg.degrees, &cfg.channel);
        max_mass_error = max_mass_error.max((next.total() - 1.0).abs());
        next.normalize();
        if next.get(1) < z.get(1) - 1e-12 {
            violations.push(iterations);
        }
        let next_pe = failure_prob(&next);
        trajectory.push((iterations, next_pe));
        let delta = (next_pe - pe).abs();
        z = next;
        pe = next_pe;
        if pe >= cfg.convergence_tol && delta < STALL_TOLERANCE {
            stalled = true;
            break;
        }
    }
    Ok(DeRun {
        converged: pe < cfg.convergence_tol,
        iterations,
        trajectory,
        final_z: z,
        stalled,
        monotonicity_violations: violations,
        max_mass_error,
    })
}

/// Largest epsilon (to within `tol_eps`) at which density evolution
/// converges. A coarse scan brackets the threshold and flags non-monotone
/// behaviour; bisection refines it.
pub fn threshold_search(template: &DeConfig, tol_eps: f64) -> Result<f64, DeError> {
    const SCAN_POINTS: usize = 20;
    let converges = |eps: f64| -> Result<bool, DeError> { Ok(de_run(&template.with_epsilon(eps))?.converged) };

    let mut lo = 0.0;
    let mut hi = None;
    for k in 1..=SCAN_POINTS {
        let eps = k as f64 / SCAN_POINTS as f64;
        let ok = converges(eps)?;
        match (ok, hi) {
            (true, None) => lo = eps,
            (false, None) => hi = Some(eps),
            (true, Some(failing)) => {
                return Err(DeError::NonMonotone {
                    converging: eps,
                    failing,
                })
            }
            (false, Some(_)) => {}
        }
    }
    let Some(mut hi) = hi else {
        return Ok(1.0);
    };
    while hi - lo > tol_eps {
        let mid = 0.5 * (lo + hi);
        if converges(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Field;
    use crate::pm_models::PmKind;

    fn cfg(q: usize, m: usize, eps: f64, kind: PmKind) -> DeConfig {
        let f = Arc::new(Field::new(q).unwrap());
        DeConfig::new(
            Channel::new(f.clone(), m, eps).unwrap(),
            DegreeDistribution::regular(3, 6).unwrap(),
            Arc::new(PmModel::new(kind, f)),
        )
    }

    #[test]
    fn multiset_weights_sum_to_one() {
        let d = SizeDistribution::from_probs(vec![0.2, 0.3, 0.0, 0.5]);
        for k in 0..6 {
            let mut total = 0.0;
            let mut count = 0;
            for_each_size_multiset(&d, k, |sizes, w| {
                assert_eq!(sizes.len(), k);
                assert!(sizes.windows(2).all(|p| p[0] <= p[1]));
                total += w;
                count += 1;
            });
            assert!((total - 1.0).abs() < 1e-12);
            // multisets of size k over 3 support points
            let expect = (k + 1) * (k + 2) / 2;
            assert_eq!(count, expect);
        }
    }

    #[test]
    fn singleton_fixed_points() {
        let c = cfg(4, 2, 0.3, PmKind::Exact);
        let w = de_ctv_update(&SizeDistribution::point(4, 1), 6, &c.pm).unwrap();
        assert_eq!(w, SizeDistribution::point(4, 1));
        let z = de_vtc_update(&SizeDistribution::point(4, 1), 3, &c.channel);
        assert_eq!(z, SizeDistribution::point(4, 1));
        let z = de_vtc_update(&SizeDistribution::from_probs(vec![0.1, 0.2, 0.3, 0.4]), 3, &c.channel.with_epsilon(0.0).unwrap());
        assert_eq!(z, SizeDistribution::point(4, 1));
    }

    #[test]
    fn full_erasure_case_reduces() {
        let c = cfg(5, 5, 0.37, PmKind::Union);
        let z = SizeDistribution::from_probs(vec![0.6, 0.0, 0.0, 0.0, 0.4]);
        let w = de_ctv_update(&z, 6, &c.pm).unwrap();
        assert!((w.get(1) - 0.6f64.powi(5)).abs() < 1e-15);
        assert!((w.get(1) + w.get(5) - 1.0).abs() < 1e-15);
        let z2 = de_vtc_update(&w, 3, &c.channel);
        assert!((z2.get(5) - 0.37 * w.get(5).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn trivial_runs() {
        let r = de_run(&cfg(4, 2, 0.0, PmKind::Exact)).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
        let r = de_run(&cfg(4, 4, 1.0, PmKind::Exact)).unwrap();
        assert!(!r.converged && r.stalled);
        assert!(r.trajectory.iter().all(|&(_, p)| p == 1.0));
    }

    #[test]
    fn irregular_mixture_matches_regular() {
        let c = cfg(4, 2, 0.3, PmKind::BallsAndBins);
        let mixed = DegreeDistribution::new(vec![0.0, 0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let a = de_run(&c).unwrap();
        let b = de_run(&DeConfig { degrees: mixed, ..c.clone() }).unwrap();
        assert_eq!(a.trajectory, b.trajectory);
    }

    #[test]
    fn stalled_runs_stay_bounded() {
        // rounding in the mass used to blow up above threshold
        for (m, eps) in [(3, 0.8), (2, 0.9), (4, 0.85)] {
            let r = de_run(&cfg(4, m, eps, PmKind::Exact)).unwrap();
            assert!(!r.converged && r.stalled, "M={m} eps={eps}");
            assert!(r.trajectory.iter().all(|&(_, p)| (0.0..=1.0 + 1e-12).contains(&p)));
        }
    }
}
