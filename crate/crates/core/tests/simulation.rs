use std::sync::Arc;

use qpec::sim::CodeSource;
use qpec::{run_trials, Channel, Field};

#[test]
fn success_rate_nonincreasing_in_epsilon() {
    let ch = Channel::new(Arc::new(Field::new(5).unwrap()), 3, 0.0).unwrap();
    let trials = 100;
    let rates: Vec<f64> = [0.3, 0.45, 0.55, 0.6, 0.65, 0.8]
        .iter()
        .map(|&eps| {
            let r = run_trials(CodeSource::Ensemble { n: 1200, dv: 3, dc: 6 }, &ch.with_epsilon(eps).unwrap(), trials, 200, 21)
                .unwrap();
            assert!(r.successes <= r.trials);
            assert!((0.0..=1.0).contains(&r.residual_symbol_error_rate));
            r.success_rate()
        })
        .collect();
    for w in rates.windows(2) {
        let sigma = |p: f64| (p * (1.0 - p) / trials as f64).sqrt();
        assert!(w[1] <= w[0] + 3.0 * (sigma(w[0]) + sigma(w[1])).max(1.0 / trials as f64), "{rates:?}");
    }
    assert_eq!(rates[0], 1.0);
    assert_eq!(*rates.last().unwrap(), 0.0);
}
