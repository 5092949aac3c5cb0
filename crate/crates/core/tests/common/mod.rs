//! Oracles shared by the integration tests.

#![allow(dead_code)]

/// Adaptive Dormand-Prince 5(4) for a scalar autonomous ODE `y' = f(y)`,
/// integrated from 0 to `t_end` with relative tolerance `rtol`.
pub fn dopri45(f: impl Fn(f64) -> f64, y0: f64, t_end: f64, rtol: f64) -> f64 {
    const A: [&[f64]; 6] = [
        &[1.0 / 5.0],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
        &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
        &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
        &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let (mut t, mut y) = (0.0, y0);
    let mut h = t_end / 100.0;
    while t < t_end {
        h = h.min(t_end - t);
        let mut k = [0.0; 7];
        k[0] = f(y);
        for s in 0..6 {
            let ys = y + h * A[s].iter().zip(&k).map(|(a, k)| a * k).sum::<f64>();
            k[s + 1] = f(ys);
        }
        // the last stage is evaluated at the 5th-order solution
        let y5 = y + h * A[5].iter().zip(&k).map(|(a, k)| a * k).sum::<f64>();
        let err = h * E.iter().zip(&k).map(|(e, k)| e * k).sum::<f64>();
        let scale = rtol * y.abs().max(y5.abs());
        let ratio = err.abs() / scale;
        if ratio <= 1.0 {
            t += h;
            y = y5;
        }
        h *= (0.9 * ratio.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
    }
    y
}

/// Largest subset with all pairwise gaps `>= 2 eps`, by exhaustive search.
pub fn brute_force_packing(points: &[f64], eps: f64) -> usize {
    let m = points.len();
    assert!(m <= 20);
    let mut best = 0;
    for mask in 0u32..(1 << m) {
        let chosen: Vec<f64> = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| points[i]).collect();
        let ok = chosen
            .iter()
            .enumerate()
            .all(|(i, a)| chosen[i + 1..].iter().all(|b| (a - b).abs() >= 2.0 * eps));
        if ok {
            best = best.max(chosen.len());
        }
    }
    best
}

/// `(H_{m+1} - 1) / sqrt(2)` with `H` the harmonic numbers, summed pairwise.
pub fn harmonic_oracle(m: u64) -> f64 {
    fn sum(lo: u64, hi: u64) -> f64 {
        if hi - lo < 64 {
            (lo..hi).map(|k| 1.0 / k as f64).sum()
        } else {
            let mid = lo + (hi - lo) / 2;
            sum(lo, mid) + sum(mid, hi)
        }
    }
    sum(2, m + 2) / std::f64::consts::SQRT_2
}
