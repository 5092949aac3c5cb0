use nslab::dimension::{
    boxdim_fit, dyadic_eps, expected_dim, forn_partial_sum, packing_count, packing_curve, packing_sum_lower,
    power_sequence, sqrt_shift_gap, DimensionError, PointSet1D, PowerSequenceSpec,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::{brute_force_packing, harmonic_oracle};

#[test]
fn greedy_matches_brute_force_on_small_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let m = rng.gen_range(1..=12);
        let pts: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
        let set = PointSet1D::new(pts).unwrap();
        for eps in [0.001, 0.02, 0.05, 0.1, 0.3, 1.0] {
            assert_eq!(packing_count(&set, eps).unwrap(), brute_force_packing(set.points(), eps));
        }
    }
}

#[test]
fn ties_at_exactly_two_eps_are_disjoint() {
    let set = PointSet1D::new(vec![0.0, 0.5, 1.0]).unwrap();
    assert_eq!(packing_count(&set, 0.25).unwrap(), 3);
    assert_eq!(packing_count(&set, 0.25000001).unwrap(), 2);
}

#[test]
fn power_sequences_recover_their_dimension() {
    for alpha in [0.5, 1.0, 2.0] {
        let set = power_sequence(&PowerSequenceSpec {
            alpha,
            c: 1.0,
            n_max: 200_000,
        })
        .unwrap();
        let (lo, hi) = (2f64.powi(-16), 2f64.powi(-6));
        let curve = packing_curve(&set, &dyadic_eps(lo, hi).unwrap()).unwrap();
        let fit = boxdim_fit(&curve, lo, hi).unwrap();
        assert!((fit.dimension - expected_dim(alpha)).abs() < 0.05, "alpha {alpha}: {}", fit.dimension);
    }
}

#[test]
fn packing_count_at_one_scale_follows_the_gap_continuum() {
    // points n^-1; greedy keeps all n with gaps >= 2 eps, i.e. n <~ (2 eps)^-1/2,
    // then covers [0, t*] at spacing 2 eps
    let set = power_sequence(&PowerSequenceSpec {
        alpha: 1.0,
        c: 1.0,
        n_max: 1_000_000,
    })
    .unwrap();
    let eps = 2f64.powi(-12);
    let count = packing_count(&set, eps).unwrap() as f64;
    let estimate = 2.0 * (2.0 * eps).powf(-0.5) - 1.0;
    assert!((count - estimate).abs() / estimate < 0.15, "{count} vs {estimate}");
}

#[test]
fn forn_sum_matches_harmonic_oracle_and_diverges() {
    let mut prev = 0.0;
    for m in [10u64, 100, 1_000, 10_000, 100_000, 1_000_000] {
        let s = forn_partial_sum(m);
        assert!((s - harmonic_oracle(m)).abs() < 1e-12 * s);
        assert!(s > prev);
        if m >= 1_000 {
            // each decade adds about ln(10) / sqrt(2)
            let step = s - prev;
            assert!((step - std::f64::consts::LN_10 / std::f64::consts::SQRT_2).abs() < 0.01, "{step}");
        }
        prev = s;
    }
}

#[test]
fn empty_packing_range_is_reported() {
    // 2 (c eps)^-1/2 = eps^-delta exactly
    assert!(matches!(
        packing_sum_lower(2f64.powi(-10), 1.0, 0.6),
        Err(DimensionError::EmptyRange { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn greedy_is_optimal(pts in prop::collection::vec(0.0f64..10.0, 1..12), eps in 0.01f64..2.0) {
        let set = PointSet1D::new(pts).unwrap();
        prop_assert_eq!(packing_count(&set, eps).unwrap(), brute_force_packing(set.points(), eps));
    }

    #[test]
    fn counts_are_scale_and_shift_covariant(
        ints in prop::collection::vec(0i64..4096, 1..200),
        eps_k in 1i32..9,
        scale_k in -5i32..6,
        shift in 0i64..64,
    ) {
        // dyadic rationals keep every operation exact
        let unit = 2f64.powi(-10);
        let pts: Vec<f64> = ints.iter().map(|&i| i as f64 * unit).collect();
        let eps = 2f64.powi(-eps_k);
        let base = packing_count(&PointSet1D::new(pts.clone()).unwrap(), eps).unwrap();
        let s = 2f64.powi(scale_k);
        let scaled = PointSet1D::new(pts.iter().map(|x| x * s).collect()).unwrap();
        prop_assert_eq!(packing_count(&scaled, eps * s).unwrap(), base);
        let shifted = PointSet1D::new(pts.iter().map(|x| x + shift as f64 * unit).collect()).unwrap();
        prop_assert_eq!(packing_count(&shifted, eps).unwrap(), base);
    }

    #[test]
    fn counts_grow_with_insertion_and_shrink_with_eps(
        pts in prop::collection::vec(0.0f64..1.0, 1..300),
        extra in 0.0f64..1.0,
        eps in 1e-4f64..0.1,
    ) {
        let set = PointSet1D::new(pts.clone()).unwrap();
        let n = packing_count(&set, eps).unwrap();
        let mut more = pts;
        more.push(extra);
        prop_assert!(packing_count(&PointSet1D::new(more).unwrap(), eps).unwrap() >= n);
        prop_assert!(packing_count(&set, 2.0 * eps).unwrap() <= n);
        prop_assert!(n <= set.len());
    }

    #[test]
    fn sqrt_shift_gap_lower_bound(x in 0.0f64..10.0, c in 1e-3f64..10.0, eps in 1e-8f64..1.0) {
        let half = 0.5 * (c * eps).sqrt();
        let g = sqrt_shift_gap(x, c, eps);
        prop_assert!(g > 0.0);
        if x < half {
            prop_assert!(g > half);
        }
        prop_assert!(sqrt_shift_gap(x + 1.0, c, eps) <= g);
    }
}
