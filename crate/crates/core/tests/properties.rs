use proptest::prelude::*;
use skewbm::{
    atom_weight, joint_density_continuous, joint_density_sided, local_time_marginal_density, sample_joint,
    simulate_path, skew_marginal_cdf, skew_marginal_density, survival_probability, QueryPoint, RngStream, Side,
    SkewParams, WalkConfig,
};

fn alpha() -> impl Strategy<Value = f64> {
    0.001f64..0.999
}

fn nonzero_y() -> impl Strategy<Value = f64> {
    prop_oneof![-6.0f64..-1e-9, 1e-9f64..6.0]
}

fn joint(x: f64, y: f64, ell: f64, t: f64, a: f64) -> f64 {
    let p = QueryPoint::new(x, t, y, ell).unwrap();
    joint_density_continuous(&p, &SkewParams::new(a).unwrap()).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn density_is_nonnegative(x in -5.0f64..5.0, y in nonzero_y(), ell in 0.0f64..8.0, t in 0.01f64..10.0, a in alpha()) {
        let f = joint(x, y, ell, t, a);
        prop_assert!(f >= 0.0 && f.is_finite());
        prop_assert!(atom_weight(x, y, t).unwrap() >= 0.0);
    }

    #[test]
    fn flux_jump_across_the_interface(x in -4.0f64..4.0, ell in 0.0f64..5.0, t in 0.05f64..5.0, a in alpha()) {
        let s = SkewParams::new(a).unwrap();
        let p = QueryPoint::new(x, t, 0.0, ell).unwrap();
        let above = joint_density_sided(&p, &s, Side::Above).unwrap();
        let below = joint_density_sided(&p, &s, Side::Below).unwrap();
        prop_assert!(((1.0 - a) * above - a * below).abs() <= 1e-12);
    }

    #[test]
    fn reflection_swaps_alpha(x in -4.0f64..4.0, y in nonzero_y(), ell in 0.0f64..5.0, t in 0.05f64..5.0, a in alpha()) {
        let lhs = joint(x, y, ell, t, a);
        let rhs = joint(-x, -y, ell, t, 1.0 - a);
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn brownian_scaling(x in -3.0f64..3.0, y in nonzero_y(), ell in 0.0f64..4.0, t in 0.1f64..3.0, a in alpha(), c in 0.2f64..5.0) {
        // λ-scaled arguments carry a Jacobian of λ^{-2} for the (y, ℓ) density.
        let lhs = joint(c * x, c * y, c * ell, c * c * t, a);
        let rhs = joint(x, y, ell, t, a) / (c * c);
        prop_assert!(close(lhs, rhs, 1e-12));
    }

    #[test]
    fn half_is_the_reflected_brownian_kernel(x in -3.0f64..3.0, y in nonzero_y(), t in 0.05f64..5.0) {
        let half = skew_marginal_density(x, y, t, &SkewParams::new(0.5).unwrap()).unwrap();
        let heat = (-(y - x).powi(2) / (2.0 * t)).exp() / (2.0 * std::f64::consts::PI * t).sqrt();
        prop_assert!(close(half, heat, 1e-13));
    }

    #[test]
    fn positive_side_mass_is_alpha_from_zero(t in 0.05f64..5.0, a in alpha()) {
        let below = skew_marginal_cdf(0.0, 0.0, t, &SkewParams::new(a).unwrap()).unwrap();
        prop_assert!(close(1.0 - below, a, 1e-14));
    }

    #[test]
    fn marginal_cdf_is_monotone(x in -3.0f64..3.0, y in -5.0f64..5.0, dy in 0.0f64..1.0, t in 0.05f64..5.0, a in alpha()) {
        let s = SkewParams::new(a).unwrap();
        let lo = skew_marginal_cdf(x, y, t, &s).unwrap();
        let hi = skew_marginal_cdf(x, y + dy, t, &s).unwrap();
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        prop_assert!(hi >= lo - 1e-15);
    }

    #[test]
    fn survival_is_a_probability(x in -10.0f64..10.0, t in 1e-3f64..100.0) {
        let q = survival_probability(x, t).unwrap();
        prop_assert!((0.0..=1.0).contains(&q));
        prop_assert_eq!(q, survival_probability(-x, t).unwrap());
    }

    #[test]
    fn local_time_law_ignores_the_sign_of_x(x in -4.0f64..4.0, ell in 0.0f64..5.0, t in 0.05f64..5.0) {
        prop_assert_eq!(
            local_time_marginal_density(x, t, ell).unwrap(),
            local_time_marginal_density(-x, t, ell).unwrap()
        );
    }

    #[test]
    fn samples_respect_the_support(x in -3.0f64..3.0, t in 0.05f64..4.0, a in alpha(), seed in any::<u64>()) {
        let s = SkewParams::new(a).unwrap();
        let mut rng = RngStream::new(seed, 0);
        for _ in 0..32 {
            let d = sample_joint(x, t, &s, &mut rng).unwrap();
            prop_assert!(d.ell >= 0.0 && d.y.is_finite());
            prop_assert_eq!(d.hit, d.ell > 0.0);
            if !d.hit {
                // Without touching the interface the path stays on its side.
                prop_assert!(d.y * x > 0.0);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn walk_records_are_consistent(x in -1.0f64..1.0, t in 0.1f64..2.0, a in 0.0f64..=1.0, v in -1.0f64..1.0, seed in any::<u64>()) {
        let cfg = WalkConfig::new(x, t, a, v, 400).unwrap();
        let h = cfg.space_step();
        let r = simulate_path(&cfg, &mut RngStream::new(seed, 3)).unwrap();
        prop_assert!(r.local_time >= 0.0);
        prop_assert!(r.occupation_pos >= 0.0 && r.occupation_pos <= t + 1e-12);
        prop_assert_eq!(r.n_steps, cfg.total_steps());
        // Visits are counted in whole lattice units.
        let visits = r.local_time / h;
        prop_assert!((visits - visits.round()).abs() < 1e-6);
        if a == 1.0 && cfg.start_site() >= 0 {
            prop_assert!(r.terminal >= 0.0);
        }
    }
}
