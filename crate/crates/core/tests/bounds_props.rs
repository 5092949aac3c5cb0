use nslab::bounds::{
    backward_envelope, backward_envelope_integral, calibrate_c, certify_trajectory, forward_envelope, gap_sqrt_sum,
    l4_log_bound_check, packing_budget, regularity_horizon, Envelope, LerayProfile,
};
use nslab::solver::Timeseries;
use proptest::prelude::*;

mod common;
use common::dopri45;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn dopri_oracle_solves_a_known_problem() {
    let y = dopri45(|y| -2.0 * y, 1.0, 1.5, 1e-12);
    assert!(rel(y, (-3.0f64).exp()) < 1e-10);
}

#[test]
fn forward_envelope_matches_ode_oracle() {
    for &(y0, c) in &[(1.0, 1.0), (0.3, 10.0), (50.0, 1e-4), (2.0, 0.01)] {
        let horizon = regularity_horizon(y0, c).unwrap();
        for frac in [0.1, 0.5, 0.9] {
            let dt = frac * horizon;
            let got = forward_envelope(y0, c, dt).unwrap().value().unwrap();
            let want = dopri45(|y| 0.5 * c * y * y * y, y0, dt, 1e-13);
            assert!(rel(got, want) < 1e-9, "y0 {y0} c {c} dt {dt}: {got} vs {want}");
        }
        assert_eq!(forward_envelope(y0, c, 1.01 * horizon).unwrap(), Envelope::HorizonExceeded);
    }
}

#[test]
fn leray_window_integral_matches_quadrature() {
    for &(c, eps) in &[(1.0, 1e-2), (0.3, 1e-3), (5.0, 0.2)] {
        let blowup = 1.0;
        let profile = LerayProfile::new(vec![blowup], c, eps).unwrap();
        // s = T - u^2 removes the endpoint singularity; midpoint rule in u
        let m = 2000;
        let hu = eps.sqrt() / m as f64;
        let integral: f64 = (0..m)
            .map(|j| (j as f64 + 0.5) * hu)
            .map(|u| 2.0 * u * profile.value(blowup - u * u))
            .sum::<f64>()
            * hu;
        let closed = 2.0 * (eps / c).sqrt();
        assert!(rel(integral, closed) < 1e-9, "{integral} vs {closed}");
        // a finite value at T bounds the window integral from below
        let lower = backward_envelope_integral(1e12, c, eps).unwrap();
        assert!(lower <= closed && rel(lower, closed) < 1e-5);
    }
}

#[test]
fn certification_of_exact_envelopes() {
    let c = 0.8;
    let y0 = 1.5;
    let horizon = regularity_horizon(y0, c).unwrap();
    let samples: Vec<_> = (0..200)
        .map(|i| {
            let t = 0.95 * horizon * i as f64 / 199.0;
            (t, 1.0, forward_envelope(y0, c, t).unwrap().value().unwrap())
        })
        .collect();
    let ts = Timeseries::from_samples(&samples).unwrap();
    let c_star = calibrate_c(&ts).unwrap();
    assert!(rel(c_star, c) < 1e-9);
    assert!(certify_trajectory(&ts, c).unwrap().passed);
    assert!(certify_trajectory(&ts, 1.001 * c).unwrap().passed);
    let below = certify_trajectory(&ts, 0.99 * c).unwrap();
    assert!(!below.passed);
    assert_eq!(below.violations.len(), 199);
}

#[test]
fn gap_sums_of_power_sequences() {
    let m = 1_000_000;
    let inv_sq: Vec<f64> = (1..=m).map(|n| (n as f64).powi(-2)).collect();
    let s = gap_sqrt_sum(&inv_sq).unwrap();
    assert!(s <= 3.0 && s > 2.8, "{s}");
    // t_n = n^-1/2 has gaps ~ n^-3/4, whose square roots are not summable
    let slow: Vec<f64> = (1..=1000).map(|n| (n as f64).powf(-0.5)).collect();
    assert!(gap_sqrt_sum(&slow).unwrap() > 10.0);
}

#[test]
fn packing_budget_covers_synthetic_profiles() {
    for c in [1.0, 0.25] {
        for eps in [1e-2, 1e-3] {
            for m in [1usize, 2, 4, 8] {
                let times: Vec<f64> = (1..=m).map(|j| j as f64 * 3.0 * eps).collect();
                let profile = LerayProfile::new(times.clone(), c, eps).unwrap();
                // midpoint rule in u = sqrt(T - s) on every window
                let k = 4000;
                let hu = eps.sqrt() / k as f64;
                let integral: f64 = times
                    .iter()
                    .map(|&t| (0..k).map(|j| (j as f64 + 0.5) * hu).map(|u| 2.0 * u * profile.value(t - u * u)).sum::<f64>() * hu)
                    .sum();
                let budget = packing_budget(integral, c, eps).unwrap();
                assert!(m as u64 <= budget, "m {m} budget {budget}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn backward_inverts_forward(y in 1e-3f64..1e3, c in 1e-3f64..1e3, frac in 0.0f64..0.999) {
        let dt = frac * regularity_horizon(y, c).unwrap();
        let fwd = forward_envelope(y, c, dt).unwrap().value().unwrap();
        let back = backward_envelope(fwd, c, dt).unwrap();
        prop_assert!(rel(back, y) < 1e-12);
    }

    #[test]
    fn envelopes_are_monotone(y in 1e-2f64..1e2, c in 1e-2f64..1e2, a in 0.0f64..0.5, b in 0.0f64..0.5) {
        let h = regularity_horizon(y, c).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let f = |dt: f64| forward_envelope(y, c, dt * h).unwrap().value().unwrap();
        prop_assert!(f(lo) <= f(hi));
        let g = |dt: f64| backward_envelope(y, c, dt * h).unwrap();
        prop_assert!(g(lo) >= g(hi));
        prop_assert!(g(hi) <= y && f(hi) >= y);
    }

    #[test]
    fn l4_bound_holds_on_envelopes(y0 in 0.1f64..10.0, c in 0.01f64..2.0) {
        let horizon = regularity_horizon(y0, c).unwrap();
        let samples: Vec<_> = (0..2000)
            .map(|i| {
                let t = 0.9 * horizon * i as f64 / 1999.0;
                (t, 1.0, forward_envelope(y0, c, t).unwrap().value().unwrap())
            })
            .collect();
        let ts = Timeseries::from_samples(&samples).unwrap();
        let chk = l4_log_bound_check(&ts, c).unwrap();
        prop_assert!(chk.passed, "margin {}", chk.worst_margin);
    }
}
