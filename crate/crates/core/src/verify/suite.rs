use super::{CheckKind, CheckParams, CheckSpec, Observable, Source};

/// Sample sizes of the built-in suite.
pub const SAMPLER_DRAWS: usize = 100_000;
pub const WALK_PATHS: usize = 20_000;
pub const WALK_STEPS: u32 = 10_000;

/// The built-in verification suite. Check `i` is seeded with `seed + i`.
pub fn default_suite(seed: u64) -> Vec<CheckSpec> {
    let mut out: Vec<(String, CheckKind, CheckParams)> = Vec::new();
    let base = CheckParams::default();

    for x in [0.0, 0.5, 2.0] {
        for t in [0.25, 1.0, 4.0] {
            for alpha in [0.1, 0.5, 0.9] {
                out.push((
                    format!("normalization/x={x}/t={t}/alpha={alpha}"),
                    CheckKind::Normalization,
                    CheckParams { x, t, alpha, ..base.clone() },
                ));
            }
        }
    }
    let tuples = CheckParams { n_samples: 1_000, ..base.clone() };
    out.push(("flux-jump/random".into(), CheckKind::FluxJump, tuples.clone()));
    out.push(("symmetry/reflection".into(), CheckKind::Symmetry, tuples.clone()));
    out.push(("scaling/brownian".into(), CheckKind::Scaling, tuples));
    for t in [0.5, 2.0] {
        for alpha in [0.3, 0.7] {
            out.push((
                format!("marginal-consistency/t={t}/alpha={alpha}"),
                CheckKind::MarginalConsistency,
                CheckParams { t, alpha, bins: 20, ..base.clone() },
            ));
        }
    }

    let sampler = CheckParams { source: Source::Sampler, n_samples: SAMPLER_DRAWS, ..base.clone() };
    for x in [0.0, 1.0] {
        for alpha in [0.3, 0.7] {
            out.push((
                format!("chisq-2d/sampler/x={x}/alpha={alpha}"),
                CheckKind::Chisq2d,
                CheckParams { x, alpha, ..sampler.clone() },
            ));
        }
    }
    out.push((
        "ks-1d/sampler/local-time/x=0".into(),
        CheckKind::Ks1d,
        CheckParams { alpha: 0.3, observable: Observable::LocalTime, ..sampler.clone() },
    ));
    out.push((
        "ks-1d/sampler/atom-y/x=1".into(),
        CheckKind::Ks1d,
        CheckParams { x: 1.0, alpha: 0.7, observable: Observable::AtomY, ..sampler.clone() },
    ));
    out.push((
        "atom-fraction/sampler/x=1".into(),
        CheckKind::AtomFraction,
        CheckParams { x: 1.0, alpha: 0.3, ..sampler },
    ));

    let walk = CheckParams { source: Source::Path, n_samples: WALK_PATHS, steps: WALK_STEPS, ..base };
    out.push((
        "ks-1d/path/terminal/x=0/alpha=0.75".into(),
        CheckKind::Ks1d,
        CheckParams { alpha: 0.75, ..walk.clone() },
    ));
    out.push((
        "ks-1d/path/terminal/x=1/alpha=0.3".into(),
        CheckKind::Ks1d,
        CheckParams { x: 1.0, alpha: 0.3, ..walk.clone() },
    ));
    out.push((
        "atom-fraction/path/x=1".into(),
        CheckKind::AtomFraction,
        CheckParams { x: 1.0, alpha: 0.3, ..walk.clone() },
    ));
    out.push((
        "mean/path/local-time/x=0".into(),
        CheckKind::Mean,
        CheckParams { alpha: 0.75, observable: Observable::LocalTime, ..walk.clone() },
    ));
    for alpha in [0.5, 0.75] {
        out.push((
            format!("mean/path/positive/alpha={alpha}"),
            CheckKind::Mean,
            CheckParams { alpha, observable: Observable::Positive, ..walk.clone() },
        ));
    }
    out.push((
        "symmetry/path/drift-mirror".into(),
        CheckKind::Symmetry,
        CheckParams { x: 0.3, alpha: 0.7, v: 0.5, ..walk.clone() },
    ));
    out.push((
        "ks-1d/path/occupation-arcsine".into(),
        CheckKind::Ks1d,
        CheckParams { alpha: 0.5, observable: Observable::Occupation, ..walk.clone() },
    ));
    for x in [0.0, 1.0] {
        for alpha in [0.3, 0.7] {
            out.push((
                format!("chisq-2d/path/x={x}/alpha={alpha}"),
                CheckKind::Chisq2d,
                CheckParams { x, alpha, ..walk.clone() },
            ));
        }
    }

    out.into_iter()
        .enumerate()
        .map(|(i, (name, kind, params))| CheckSpec::new(name, kind, params, seed.wrapping_add(i as u64)))
        .collect()
}
