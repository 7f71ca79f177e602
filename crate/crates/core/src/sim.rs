//! End-to-end Monte Carlo: transmit the all-zero codeword, decode, aggregate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::Channel;
use crate::decoder::{decode, DecodeError, DecodeStatus};
use crate::gf::FieldElement;
use crate::ldpc::{build_regular, GraphError, TannerGraph};
use crate::symset::SymbolSet;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("decoder committed to a nonzero symbol at variable {var} in trial {trial}")]
    WrongSymbol { trial: u64, var: usize },
}

/// Where each trial's code comes from.
#[derive(Debug, Clone)]
pub enum CodeSource<'a> {
    /// One fixed graph shared by all trials.
    Fixed(&'a TannerGraph),
    /// A fresh `(d_v, d_c)`-regular graph per trial.
    Ensemble { n: usize, dv: usize, dc: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub n: usize,
    pub dv: usize,
    pub dc: usize,
    pub q: usize,
    pub m: usize,
    pub epsilon: f64,
    pub trials: u64,
    pub successes: u64,
    pub avg_iterations: f64,
    /// Fraction of variables left with more than one candidate, over all trials.
    pub residual_symbol_error_rate: f64,
}

impl TrialReport {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

struct TrialResult {
    success: bool,
    iterations: usize,
    unresolved: usize,
}

/// Generator for one trial: stream `trial` of the master seed.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

fn run_one(source: &CodeSource<'_>, ch: &Channel, max_iters: usize, seed: u64, trial: u64) -> Result<TrialResult, SimError> {
    let field = ch.field();
    let mut rng = trial_rng(seed, trial);
    let owned;
    let graph = match source {
        CodeSource::Fixed(g) => *g,
        CodeSource::Ensemble { n, dv, dc } => {
            owned = build_regular(*n, *dv, *dc, field, &mut rng)?;
            &owned
        }
    };
    let received: Vec<SymbolSet> = (0..graph.n())
        .map(|_| ch.transmit(FieldElement::ZERO, &mut rng).observed)
        .collect();
    let outcome = decode(graph, field, &received, max_iters)?;
    for (var, s) in outcome.estimate.iter().enumerate() {
        if !s.contains(FieldElement::ZERO) || (s.len() == 1 && s.single_value() != Some(0)) {
            return Err(SimError::WrongSymbol { trial, var });
        }
    }
    Ok(TrialResult {
        success: outcome.status == DecodeStatus::Success,
        iterations: outcome.iterations,
        unresolved: outcome.unresolved(),
    })
}

/// Runs `trials` independent transmissions in parallel. Results depend only
/// on the arguments, not on scheduling.
pub fn run_trials(source: CodeSource<'_>, ch: &Channel, trials: u64, max_iters: usize, seed: u64) -> Result<TrialReport, SimError> {
    if trials == 0 {
        return Err(SimError::NoTrials);
    }
    let results: Vec<TrialResult> = (0..trials)
        .into_par_iter()
        .map(|t| run_one(&source, ch, max_iters, seed, t))
        .collect::<Result<_, _>>()?;
    let (n, dv, dc) = match &source {
        CodeSource::Fixed(g) => {
            let dv = if g.n() > 0 { g.var_degree(0) } else { 0 };
            let dc = if g.m() > 0 { g.check_degree(0) } else { 0 };
            (g.n(), dv, dc)
        }
        CodeSource::Ensemble { n, dv, dc } => (*n, *dv, *dc),
    };
    let successes = results.iter().filter(|r| r.success).count() as u64;
    let iters: usize = results.iter().map(|r| r.iterations).sum();
    let unresolved: usize = results.iter().map(|r| r.unresolved).sum();
    Ok(TrialReport {
        n,
        dv,
        dc,
        q: ch.q(),
        m: ch.set_size(),
        epsilon: ch.epsilon(),
        trials,
        successes,
        avg_iterations: iters as f64 / trials as f64,
        residual_symbol_error_rate: unresolved as f64 / (trials as f64 * n.max(1) as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Field;
    use std::sync::Arc;

    fn channel(q: usize, m: usize, eps: f64) -> Channel {
        Channel::new(Arc::new(Field::new(q).unwrap()), m, eps).unwrap()
    }

    #[test]
    fn noiseless() {
        let ch = channel(4, 2, 0.0);
        let r = run_trials(CodeSource::Ensemble { n: 60, dv: 3, dc: 6 }, &ch, 8, 50, 1).unwrap();
        assert_eq!(r.successes, 8);
        assert_eq!(r.avg_iterations, 0.0);
        assert_eq!(r.residual_symbol_error_rate, 0.0);
    }

    #[test]
    fn deterministic_and_fixed_graph() {
        let ch = channel(5, 3, 0.3);
        let src = CodeSource::Ensemble { n: 200, dv: 3, dc: 6 };
        let a = run_trials(src.clone(), &ch, 16, 100, 42).unwrap();
        let b = run_trials(src, &ch, 16, 100, 42).unwrap();
        assert_eq!(a, b);

        let g = build_regular(120, 3, 6, ch.field(), &mut trial_rng(9, 0)).unwrap();
        let r = run_trials(CodeSource::Fixed(&g), &ch, 4, 100, 3).unwrap();
        assert_eq!((r.n, r.dv, r.dc), (120, 3, 6));
        assert!(run_trials(CodeSource::Fixed(&g), &ch, 0, 10, 3).is_err());
    }

    #[test]
    fn full_erasure_never_decodes() {
        let ch = channel(4, 4, 1.0);
        let r = run_trials(CodeSource::Ensemble { n: 60, dv: 3, dc: 6 }, &ch, 4, 50, 5).unwrap();
        assert_eq!(r.successes, 0);
        assert_eq!(r.residual_symbol_error_rate, 1.0);
    }
}
