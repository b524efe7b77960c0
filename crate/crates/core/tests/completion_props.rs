use opext::balls::{bilinear_witness, MEMBER_TOL};
use opext::completion::*;
use opext::matcore::*;
use opext::random::*;
use opext::sector::in_cphi;
use opext::verify::{random_admissible_angle, random_dual_pair, random_proper_pair, random_symmetric_pair};
use opext::{Angle, Tolerances};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

/// Fixed seed so failures reproduce run to run.
fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(0x5eed), failure_persistence: None, ..ProptestConfig::default() }
}
use std::f64::consts::FRAC_PI_2;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn phi1_of(pair: &DualPair) -> Option<f64> {
    match critical_angle(pair, &tol()).unwrap().phi1 {
        Phi1::Angle(p) => Some(p),
        Phi1::PiOverTwoOnly => None,
    }
}

proptest! {
    #![proptest_config(cfg(300))]

    #[test]
    fn completion_is_a_bijection(seed in any::<u64>(), dims in 1usize..=4) {
        let mut g = rng(seed);
        let pair = random_dual_pair(&mut g, dims, &tol()).unwrap();
        let (r, cols) = pair.corner_shape();
        let k = pair.compress_k(&unit_ball(&mut g, r, cols), &tol());
        let t = complete(&pair, &k).unwrap();
        let (back, ok) = recover_k(&pair, &t, &tol()).unwrap();
        prop_assert!(ok);
        prop_assert!(op_norm(&(&back - &k)) < 1e-8);
        prop_assert!(op_norm(&(complete(&pair, &back).unwrap() - &t)) < 1e-8);
    }

    #[test]
    fn sectorial_verdict_matches_direct_membership(seed in any::<u64>(), dims in 1usize..=4) {
        let mut g = rng(seed);
        let pair = random_symmetric_pair(&mut g, dims, &tol()).unwrap();
        let phi = random_admissible_angle(&mut g, &pair, &tol()).unwrap();
        let n2 = pair.u.ncols();
        let size = uniform(&mut g, 0.0, 1.5);
        let k = scale(&unit_ball(&mut g, n2, n2), size);
        let r = sectorial_complete(&pair, phi, &k, MEMBER_TOL, &tol()).unwrap();
        prop_assert_eq!(r.in_class, r.direct.in_class);
    }

    #[test]
    fn sectorial_membership_is_monotone(seed in any::<u64>(), dims in 1usize..=3) {
        let mut g = rng(seed);
        let pair = random_symmetric_pair(&mut g, dims, &tol()).unwrap();
        let phi = random_admissible_angle(&mut g, &pair, &tol()).unwrap();
        let n2 = pair.u.ncols();
        let k = scale(&unit_ball(&mut g, n2, n2), 0.9);
        if sectorial_complete(&pair, phi, &k, MEMBER_TOL, &tol()).unwrap().in_class {
            for i in 1..=10 {
                let later = Angle::new(phi.radians() + (FRAC_PI_2 - phi.radians()) * i as f64 / 10.0).unwrap();
                prop_assert!(sectorial_complete(&pair, later, &k, MEMBER_TOL, &tol()).unwrap().in_class);
            }
        }
    }

    #[test]
    fn krein_extremes_bound_selfadjoint_completions(seed in any::<u64>(), dims in 1usize..=4) {
        let mut g = rng(seed);
        let pair = random_proper_pair(&mut g, dims, &tol()).unwrap();
        let (tm, t_max) = extremal_pair(&pair).unwrap();
        let n2 = pair.u.ncols();
        let k = hermitian(&mut g, n2, 1.0);
        let t = complete(&pair, &k).unwrap();
        prop_assert!(min_eig(&(&t - &tm)) > -1e-10);
        prop_assert!(min_eig(&(&t_max - &t)) > -1e-10);
    }
}

proptest! {
    #![proptest_config(cfg(40))]

    #[test]
    fn critical_angle_separates_solvability(seed in any::<u64>(), dims in 1usize..=3) {
        let mut g = rng(seed);
        let pair = random_symmetric_pair(&mut g, dims, &tol()).unwrap();
        let Some(p1) = phi1_of(&pair) else { return Ok(()) };
        let n2 = pair.u.ncols();
        let zero = zeros(n2, n2);
        if p1 + 1e-6 <= FRAC_PI_2 {
            let above = Angle::new(p1 + 1e-6).unwrap();
            prop_assert!(in_cphi(&complete(&pair, &zero).unwrap(), above, &tol()).unwrap().in_class);
        }
        let q = critical_angle(&pair, &tol()).unwrap().q;
        if p1 > 1e-3 {
            let below = Angle::new(p1 - 1e-3).unwrap();
            prop_assume!(op_norm(&q) * below.cos() > 1.0 + 1e-6);
            prop_assert!(!in_cphi(&complete(&pair, &zero).unwrap(), below, &tol()).unwrap().in_class);
            for _ in 0..500 {
                let size = uniform(&mut g, 0.0, 1.2);
                let k = scale(&unit_ball(&mut g, n2, n2), size);
                prop_assert!(!in_cphi(&complete(&pair, &k).unwrap(), below, &tol()).unwrap().in_class);
            }
        }
    }
}

proptest! {
    #![proptest_config(cfg(200))]

    #[test]
    fn bilinear_bound_fails_exactly_when_critical_angle_positive(seed in any::<u64>(), dims in 1usize..=3) {
        let mut g = rng(seed);
        let pair = random_symmetric_pair(&mut g, dims, &tol()).unwrap();
        let ca = critical_angle(&pair, &tol()).unwrap();
        prop_assume!(ca.consistent && (op_norm(&ca.q) - 1.0).abs() > 1e-6);
        let n2 = pair.u.ncols();
        let a = eye(n2) - &pair.v * &pair.u;
        let w = bilinear_witness(&a, &pair.d_u, &pair.d_v_adj, MEMBER_TOL, &tol());
        prop_assert_eq!(w.is_some(), op_norm(&ca.q) > 1.0);
    }

    #[test]
    fn adjoint_pairs_have_zero_critical_angle(seed in any::<u64>(), dims in 1usize..=3) {
        let mut g = rng(seed);
        let pair = random_proper_pair(&mut g, dims, &tol()).unwrap();
        prop_assert_eq!(phi1_of(&pair), Some(0.0));
        let n2 = pair.u.ncols();
        let a = eye(n2) - &pair.v * &pair.u;
        prop_assert!(bilinear_witness(&a, &pair.d_u, &pair.d_v_adj, MEMBER_TOL, &tol()).is_none());
    }
}
