use std::sync::Arc;

use proptest::prelude::*;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qpec::de::{de_ctv_update, de_run, for_each_size_multiset, threshold_search, DeConfig};
use qpec::symset::sumset;
use qpec::{Channel, DegreeDistribution, Field, PmKind, PmModel, SizeDistribution, SymbolSet};

fn config(q: usize, m: usize, eps: f64, kind: PmKind) -> DeConfig {
    let f = Arc::new(Field::new(q).unwrap());
    DeConfig::new(
        Channel::new(f.clone(), m, eps).unwrap(),
        DegreeDistribution::regular(3, 6).unwrap(),
        Arc::new(PmModel::new(kind, f)),
    )
}

fn random_set<R: Rng>(q: usize, size: usize, rng: &mut R) -> SymbolSet {
    SymbolSet::from_values(q, sample(rng, q, size)).unwrap()
}

#[test]
fn check_update_matches_sampled_sumsets() {
    let (q, dc, samples) = (4, 3, 1_000_000u32);
    let f = Arc::new(Field::new(q).unwrap());
    let z = SizeDistribution::from_probs(vec![0.5, 0.5, 0.0, 0.0]);
    let w = de_ctv_update(&z, dc, &PmModel::new(PmKind::Exact, f.clone())).unwrap();

    // labels only permute uniformly random sets, so unscaled sets suffice
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut hits = vec![0u32; q + 1];
    for _ in 0..samples {
        let sets: Vec<SymbolSet> = (0..dc - 1)
            .map(|_| random_set(q, if rng.random_bool(0.5) { 1 } else { 2 }, &mut rng))
            .collect();
        hits[sumset(&f, &sets).unwrap().len()] += 1;
    }
    for (m, &hit) in hits.iter().enumerate().skip(1) {
        let p = w.get(m);
        let freq = hit as f64 / samples as f64;
        let sigma = (p * (1.0 - p) / samples as f64).sqrt();
        assert!((freq - p).abs() <= 3.0 * sigma + 1e-12, "m={m}: sampled {freq}, predicted {p}");
    }
}

/// Ordered-tuple enumeration of the check update, weight = product of probabilities.
fn ordered_ctv(z: &SizeDistribution, k: usize, pm: &PmModel) -> Vec<f64> {
    let q = z.q();
    let mut out = vec![0.0; q];
    let mut idx = vec![1usize; k];
    loop {
        let weight: f64 = idx.iter().map(|&s| z.get(s)).product();
        if weight > 0.0 {
            let d = pm.distribution(&idx).unwrap();
            for m in 1..=q {
                out[m - 1] += weight * d.get(m);
            }
        }
        let mut pos = 0;
        while pos < k && idx[pos] == q {
            idx[pos] = 1;
            pos += 1;
        }
        if pos == k {
            break;
        }
        idx[pos] += 1;
    }
    out
}

#[test]
fn multisets_match_ordered_tuples() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for q in [2, 3, 4, 5] {
        let f = Arc::new(Field::new(q).unwrap());
        for kind in [PmKind::Exact, PmKind::Union, PmKind::BoundLower] {
            let pm = PmModel::new(kind, f.clone());
            for k in 1..=4 {
                let raw: Vec<f64> = (0..q).map(|_| rng.random_range(0.0..1.0)).collect();
                let total: f64 = raw.iter().sum();
                let z = SizeDistribution::from_probs(raw.iter().map(|p| p / total).collect());
                let got = de_ctv_update(&z, k + 1, &pm).unwrap();
                let expect = ordered_ctv(&z, k, &pm);
                for m in 1..=q {
                    assert!((got.get(m) - expect[m - 1]).abs() < 1e-12, "q={q} {kind} k={k} m={m}");
                }
            }
        }
    }
}

#[test]
fn multiset_weights_are_multinomial() {
    let z = SizeDistribution::from_probs(vec![0.1, 0.6, 0.3]);
    let mut seen = Vec::new();
    for_each_size_multiset(&z, 3, |sizes, w| seen.push((sizes.to_vec(), w)));
    let find = |s: &[usize]| seen.iter().find(|(t, _)| t == s).unwrap().1;
    assert!((find(&[1, 2, 3]) - 6.0 * 0.1 * 0.6 * 0.3).abs() < 1e-15);
    assert!((find(&[2, 2, 3]) - 3.0 * 0.36 * 0.3).abs() < 1e-15);
    assert!((find(&[3, 3, 3]) - 0.027).abs() < 1e-15);
    assert_eq!(seen.len(), 10);
}

#[test]
fn full_erasure_is_a_fixed_point() {
    for kind in PmKind::ALL {
        let run = de_run(&config(4, 4, 1.0, kind)).unwrap();
        assert!(!run.converged && run.stalled);
        assert!(run.trajectory.iter().all(|&(_, pe)| pe == 1.0));
    }
}

#[test]
fn threshold_decreases_with_set_size() {
    for kind in PmKind::ALL {
        let th: Vec<f64> = (2..=5)
            .map(|m| threshold_search(&config(5, m, 0.5, kind), 1e-4).unwrap())
            .collect();
        assert!(th.windows(2).all(|w| w[0] >= w[1]), "{kind}: {th:?}");
    }
}

#[test]
fn threshold_brackets_convergence() {
    let cfg = config(5, 3, 0.5, PmKind::Exact);
    let th = threshold_search(&cfg, 1e-4).unwrap();
    assert!(de_run(&cfg.with_epsilon(th)).unwrap().converged);
    assert!(!de_run(&cfg.with_epsilon(th + 1e-4)).unwrap().converged);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mass_preserved_and_progress_monotone(
        q in prop::sample::select(vec![3usize, 4, 5]),
        m_off in 0usize..4,
        eps in 0.0f64..1.0,
        kind in prop::sample::select(PmKind::ALL.to_vec()),
    ) {
        let m = 2 + m_off % (q - 1);
        let mut cfg = config(q, m, eps, kind);
        cfg.max_iters = 300;
        let run = de_run(&cfg).unwrap();
        prop_assert!(run.max_mass_error < 1e-9, "mass error {}", run.max_mass_error);
        prop_assert!(run.monotonicity_violations.is_empty(), "{:?}", run.monotonicity_violations);
        prop_assert!((run.final_z.total() - 1.0).abs() < 1e-9);
    }
}
