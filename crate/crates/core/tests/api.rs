use skewbm::stats::{chi_square, ks_one_sample};
use skewbm::verify::{
    histogram2d, run_checks, BinSpec, CheckKind, CheckParams, CheckSpec, Observable, Source, VerificationReport,
};
use skewbm::{
    atom_weight, density, joint_density_continuous, local_time_marginal_density, normalization_mass,
    sample_joint_many, simulate_batch, skew_marginal_density, survival_probability, Error, InterfacePolicy,
    JointSample, QuadratureSpec, QueryPoint, RngStream, SkewParams, WalkConfig,
};

fn alpha(a: f64) -> SkewParams {
    SkewParams::new(a).unwrap()
}

#[test]
fn reference_values() {
    let p = QueryPoint::new(1.0, 1.0, -1.0, 1.0).unwrap();
    let f = joint_density_continuous(&p, &alpha(0.3)).unwrap();
    assert!((f - 0.01861376333013963).abs() < 1e-15);
    assert!((atom_weight(1.0, 1.0, 1.0).unwrap() - 0.3449513138882446).abs() < 1e-15);
    assert!((survival_probability(1.0, 1.0).unwrap() - 0.6826894921370859).abs() < 1e-14);
    assert!((skew_marginal_density(1.0, 2.0, 1.0, &alpha(0.3)).unwrap() - 0.24019798515436815).abs() < 1e-15);
    assert!((local_time_marginal_density(0.0, 1.0, 0.0).unwrap() - 0.7978845608028654).abs() < 1e-15);
}

#[test]
fn interface_needs_a_side() {
    let p = QueryPoint::new(0.5, 1.0, 0.0, 0.2).unwrap();
    let s = alpha(0.3);
    assert!(matches!(joint_density_continuous(&p, &s), Err(Error::InterfaceSide)));
    assert!(matches!(density(&p, &s, InterfacePolicy::Reject), Err(Error::InterfaceSide)));
    let avg = density(&p, &s, InterfacePolicy::Average).unwrap();
    assert!(avg.continuous > 0.0);
}

#[test]
fn invalid_arguments_are_domain_errors() {
    assert!(SkewParams::new(0.0).is_err());
    assert!(SkewParams::new(1.0).is_err());
    assert!(SkewParams::new(f64::NAN).is_err());
    assert!(QueryPoint::new(0.0, 0.0, 1.0, 0.0).is_err());
    assert!(QueryPoint::new(0.0, 1.0, 1.0, -0.1).is_err());
    assert!(survival_probability(1.0, -1.0).is_err());
}

#[test]
fn mass_is_one() {
    for (x, t, a) in [(0.0, 1.0, 0.3), (2.0, 0.25, 0.9), (-0.5, 4.0, 0.1)] {
        let m = normalization_mass(x, t, &alpha(a), &QuadratureSpec::default()).unwrap();
        assert!((m.total() - 1.0).abs() < 1e-6, "{x} {t} {a}: {m:?}");
        assert!(m.tail_bound < 1e-9);
    }
}

#[test]
fn sampler_atom_fraction_matches_survival() {
    let draws = sample_joint_many(1.0, 1.0, &alpha(0.4), 50_000, &mut RngStream::new(11, 0)).unwrap();
    let misses = draws.iter().filter(|d| !d.hit).count() as f64 / draws.len() as f64;
    let q = survival_probability(1.0, 1.0).unwrap();
    let sigma = (q * (1.0 - q) / draws.len() as f64).sqrt();
    assert!((misses - q).abs() < 4.0 * sigma);
}

#[test]
fn sampler_terminal_law_passes_ks() {
    let s = alpha(0.7);
    let ys: Vec<f64> = sample_joint_many(0.4, 2.0, &s, 20_000, &mut RngStream::new(5, 9))
        .unwrap()
        .iter()
        .map(|d| d.y)
        .collect();
    let out = ks_one_sample(&ys, |y| skewbm::skew_marginal_cdf(0.4, y, 2.0, &s).unwrap()).unwrap();
    assert!(out.p_value() > 1e-4, "{out:?}");
}

#[test]
fn batches_are_reproducible_and_stream_keyed() {
    let cfg = WalkConfig::new(0.0, 1.0, 0.6, 0.0, 400).unwrap();
    let a = simulate_batch(&cfg, 64, 42, 0).unwrap();
    let b = simulate_batch(&cfg, 64, 42, 0).unwrap();
    let shifted = simulate_batch(&cfg, 63, 42, 1).unwrap();
    assert_eq!(a, b);
    assert_eq!(&a[1..], &shifted[..]);
    assert!(simulate_batch(&cfg, 0, 42, 0).is_err());
}

#[test]
fn walk_rejects_coarse_lattices() {
    assert!(WalkConfig::new(0.0, 1.0, 0.5, 0.0, 99).is_err());
    assert!(WalkConfig::new(0.0, 1.0, 0.5, 20.0, 100).is_err());
    assert!(WalkConfig::new(0.0, 1.0, 1.5, 0.0, 100).is_err());
}

#[test]
fn histogram_requires_samples_and_proper_bins() {
    let bins = BinSpec::quantile_grid(1.0, 8).unwrap();
    let none: Vec<JointSample> = Vec::new();
    let spec = QuadratureSpec::default();
    assert!(histogram2d(&none, &bins, 0.0, 1.0, &alpha(0.5), &spec).is_err());
    assert!(BinSpec::new(vec![0.5], vec![1.0]).is_err(), "y bins must split at the interface");
    assert!(BinSpec::quantile_grid(1.0, 1).is_err());
}

#[test]
fn histogram_counts_and_masses_add_up() {
    let s = alpha(0.7);
    let draws = sample_joint_many(1.0, 1.0, &s, 5_000, &mut RngStream::new(3, 0)).unwrap();
    let bins = BinSpec::quantile_grid(1.0, 8).unwrap();
    let h = histogram2d(&draws, &bins, 1.0, 1.0, &s, &QuadratureSpec::default()).unwrap();
    let (obs, exp) = h.cells();
    assert_eq!(obs.iter().sum::<u64>(), 5_000);
    assert!((exp.iter().sum::<f64>() - 1.0).abs() < 1e-6);
}

#[test]
fn degenerate_chi_square_is_a_configuration_error() {
    assert!(matches!(chi_square(&[10, 0], &[1.0, 0.0]), Err(Error::Config(_))));
}

fn spec(name: &str, kind: CheckKind, params: CheckParams) -> CheckSpec {
    CheckSpec::new(name, kind, params, 9)
}

#[test]
fn run_checks_rejects_bad_configurations() {
    assert!(matches!(run_checks(1, &[]), Err(Error::Config(_))));

    let mut unknown = spec("u", CheckKind::FluxJump, CheckParams::default());
    unknown.kind = "bogus".into();
    assert!(matches!(run_checks(1, &[unknown]), Err(Error::Config(_))));

    let small = CheckParams { source: Source::Sampler, n_samples: 999, ..Default::default() };
    assert!(run_checks(1, &[spec("s", CheckKind::Chisq2d, small)]).is_err());

    let bad_sig = CheckParams { significance: 1.0, ..Default::default() };
    assert!(run_checks(1, &[spec("b", CheckKind::Normalization, bad_sig)]).is_err());

    let dup = spec("d", CheckKind::FluxJump, CheckParams { n_samples: 10, ..Default::default() });
    assert!(run_checks(1, &[dup.clone(), dup]).is_err());
}

#[test]
fn documented_check_examples_pass() {
    let specs = vec![
        spec("norm", CheckKind::Normalization, CheckParams { alpha: 0.3, ..Default::default() }),
        spec("flux", CheckKind::FluxJump, CheckParams { x: 1.0, alpha: 0.3, ell: 0.7, ..Default::default() }),
        spec(
            "chisq",
            CheckKind::Chisq2d,
            CheckParams { x: 1.0, alpha: 0.7, n_samples: 100_000, source: Source::Sampler, ..Default::default() },
        ),
    ];
    let report = run_checks(4, &specs).unwrap();
    assert!(report.overall_pass, "{}", report.to_json());
    assert!(report.check("norm").unwrap().statistic.unwrap() <= 1e-6);
    assert!(report.check("flux").unwrap().statistic.unwrap() <= 1e-12);
    assert!(report.check("chisq").unwrap().p_value.unwrap() > 0.01);
}

#[test]
fn failures_inside_a_check_become_diagnostics() {
    // A valid spec whose evaluation errors: t = 0 is outside the domain.
    let p = CheckParams { t: 0.0, ..Default::default() };
    let report = run_checks(1, &[spec("zero-time", CheckKind::Normalization, p)]).unwrap();
    let c = report.check("zero-time").unwrap();
    assert!(!c.pass && c.diagnostic.is_some());
    assert!(!report.overall_pass);
}

#[test]
fn report_round_trips_through_json() {
    let p = CheckParams {
        source: Source::Sampler,
        observable: Observable::LocalTime,
        n_samples: 2_000,
        ..Default::default()
    };
    let report = run_checks(8, &[spec("lt", CheckKind::Ks1d, p)]).unwrap();
    let back: VerificationReport = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(back, report);
}
