//! Each calibrated statistical check, rerun under 100 fresh seeds at
//! significance 0.01, may fail at most 5 times.

use std::collections::BTreeMap;

use skewbm::verify::{default_suite, run_checks, CheckParams, CheckSpec, Source};

const REPLICATES: u64 = 100;
const MAX_FAILURES: usize = 5;

fn statistical(spec: &CheckSpec) -> bool {
    spec.params.source != Source::Density
}

/// The built-in statistical checks; walk checks use fewer paths so that a
/// hundred replicates stay cheap.
fn specs(seed: u64) -> Vec<CheckSpec> {
    default_suite(seed)
        .into_iter()
        .filter(statistical)
        .map(|mut s| {
            if s.params.source == Source::Path {
                s.params = CheckParams { n_samples: 2_000, ..s.params };
            }
            s
        })
        .collect()
}

#[test]
fn statistical_checks_fail_at_the_nominal_rate() {
    let mut failures: BTreeMap<String, usize> = BTreeMap::new();
    for rep in 0..REPLICATES {
        let seed = 7_000_000 + rep * 1_000;
        let report = run_checks(seed, &specs(seed)).unwrap();
        for c in &report.checks {
            let entry = failures.entry(c.name.clone()).or_default();
            if !c.pass {
                assert!(c.diagnostic.is_none(), "{}: {:?}", c.name, c.diagnostic);
                *entry += 1;
            }
        }
    }
    assert!(failures.len() >= 15, "expected the full statistical suite, got {}", failures.len());
    eprintln!("failures per check over {REPLICATES} seeds: {failures:?}");
    let excessive: Vec<_> = failures.iter().filter(|(_, &k)| k > MAX_FAILURES).collect();
    assert!(excessive.is_empty(), "failure counts above {MAX_FAILURES}/{REPLICATES}: {excessive:?}");
}
