use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xeqci::mipt::*;

fn exact_curve(tau: f64, amp: f64, t_a: f64, times: &[f64]) -> DecayCurve {
    let values = times.iter().map(|t| 1.0 - amp * (-(t - t_a).abs() / tau).exp()).collect();
    DecayCurve {
        times: times.to_vec(),
        values,
        stderr: vec![0.0; times.len()],
        t_a,
        p: 0.1,
        l: 8,
        t: times.len(),
        seed: 0,
        trials: 1,
    }
}

/// Each point is the mean of `trials` Bernoulli draws with success `1 − A e^{−d/τ}`.
fn bernoulli_curve(tau: f64, amp: f64, n: usize, trials: u64, rng: &mut ChaCha8Rng) -> DecayCurve {
    let times: Vec<f64> = (0..n).map(|t| t as f64).collect();
    let mut c = exact_curve(tau, amp, 0.0, &times);
    for (v, se) in c.values.iter_mut().zip(c.stderr.iter_mut()) {
        let hits = (0..trials).filter(|_| rng.random_bool(*v)).count() as f64;
        let m = hits / trials as f64;
        *v = m;
        *se = (m * (1.0 - m) / (trials as f64 - 1.0)).sqrt();
    }
    c.trials = trials;
    c
}

#[test]
fn tau_estimator_bias_small_at_ten_thousand_trials() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for tau in [2.0, 4.0, 8.0] {
        let reps = 60;
        let mut acc = 0.0;
        for _ in 0..reps {
            let c = bernoulli_curve(tau, 0.5, 40, 10_000, &mut rng);
            acc += fit_correlation_time(&c, &FitOptions::default()).unwrap().tau;
        }
        let mean = acc / reps as f64;
        assert!((mean - tau).abs() / tau < 0.05, "τ = {tau}: mean estimate {mean}");
    }
}

#[test]
fn symmetric_decay_about_interior_source() {
    let times: Vec<f64> = (0..41).map(|t| t as f64).collect();
    let f = fit_correlation_time(&exact_curve(5.0, 0.3, 20.0, &times), &FitOptions::default()).unwrap();
    assert!((f.tau - 5.0).abs() < 1e-9);
    assert!((f.amplitude - 0.3).abs() < 1e-9);
    assert!(!f.non_decaying);
}

#[test]
fn flat_curve_reported_as_non_decaying() {
    let times: Vec<f64> = (0..20).map(|t| t as f64).collect();
    let mut c = exact_curve(5.0, 0.3, 0.0, &times);
    c.values.iter_mut().for_each(|v| *v = 0.5);
    let f = fit_correlation_time(&c, &FitOptions::default()).unwrap();
    assert!(f.non_decaying);
    assert!(f.tau.is_infinite());
}

#[test]
fn noise_floor_leaves_too_few_points() {
    let times: Vec<f64> = (0..20).map(|t| t as f64).collect();
    let mut c = exact_curve(1.0, 0.01, 0.0, &times);
    c.stderr.iter_mut().for_each(|s| *s = 0.01);
    assert!(matches!(
        fit_correlation_time(&c, &FitOptions::default()),
        Err(FitError::InsufficientPoints { .. })
    ));
}

fn scaling_function(x: f64) -> f64 {
    0.08 + 0.5 / (1.0 + (x - 0.2).powi(2))
}

fn synthetic_table(p_c: f64, nu: f64) -> Vec<(f64, usize, f64)> {
    let mut table = Vec::new();
    for t in [24usize, 32, 40] {
        for i in 0..11 {
            let p = 0.05 + 0.025 * i as f64;
            let x = (p - p_c) * (t as f64).powf(1.0 / nu);
            table.push((p, t, t as f64 * scaling_function(x)));
        }
    }
    table
}

#[test]
fn collapse_recovers_known_exponents() {
    let table = synthetic_table(0.154, 1.33);
    let r = collapse_fit(&table, &CollapseRanges::default()).unwrap();
    assert!((r.p_c - 0.154).abs() / 0.154 < 0.02, "p_c = {}", r.p_c);
    assert!((r.nu - 1.33).abs() / 1.33 < 0.02, "ν = {}", r.nu);
    assert!(!r.on_boundary);
    assert!(!r.degenerate);
    assert!(r.objective < r.baseline);
}

#[test]
fn collapse_optimum_no_worse_than_any_grid_point() {
    let table = synthetic_table(0.17, 1.1);
    let ranges = CollapseRanges { grid: 21, ..CollapseRanges::default() };
    let r = collapse_fit(&table, &ranges).unwrap();
    for i in 0..ranges.grid {
        for j in 0..ranges.grid {
            let pc = ranges.p_c.0 + (ranges.p_c.1 - ranges.p_c.0) * i as f64 / (ranges.grid - 1) as f64;
            let nu = ranges.nu.0 + (ranges.nu.1 - ranges.nu.0) * j as f64 / (ranges.grid - 1) as f64;
            assert!(r.objective <= collapse_objective(&table, pc, nu));
        }
    }
}

#[test]
fn collapse_rejects_thin_tables() {
    let table = synthetic_table(0.15, 1.3);
    let two: Vec<_> = table.iter().copied().filter(|r| r.1 != 40).collect();
    assert_eq!(collapse_fit(&two, &CollapseRanges::default()).unwrap_err(), FitError::TooFewSizes(2));
    let few: Vec<_> = table.iter().copied().filter(|r| r.0 < 0.14).collect();
    assert_eq!(collapse_fit(&few, &CollapseRanges::default()).unwrap_err(), FitError::TooFewRates(4));
}

#[test]
fn interior_maximum_detection() {
    let s = |v: &[Option<f64>]| v.iter().enumerate().map(|(i, &x)| (i as f64, x)).collect::<Vec<_>>();
    assert!(has_interior_maximum(&s(&[Some(1.0), Some(3.0), Some(2.0)])));
    assert!(!has_interior_maximum(&s(&[Some(1.0), Some(2.0), Some(3.0)])));
    assert!(!has_interior_maximum(&s(&[Some(4.0), Some(2.0), Some(3.0)])));
    assert!(has_interior_maximum(&s(&[None, Some(2.0), Some(1.0)])));
    assert!(!has_interior_maximum(&s(&[None, None])));
}

proptest! {
    #[test]
    fn tau_fit_is_scale_equivariant(
        tau in 1.0f64..10.0,
        amp in 0.05f64..0.9,
        t_a in 0.0f64..5.0,
        s in 0.1f64..10.0,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let times: Vec<f64> = (0..30).map(|t| t as f64).collect();
        let mut c = exact_curve(tau, amp, t_a, &times);
        for (v, se) in c.values.iter_mut().zip(c.stderr.iter_mut()) {
            *se = 1e-4;
            *v += rng.random_range(-1e-4..1e-4);
        }
        let opts = FitOptions::default();
        let base = fit_correlation_time(&c, &opts).unwrap();
        let mut scaled = c.clone();
        scaled.times.iter_mut().for_each(|t| *t *= s);
        scaled.t_a *= s;
        let sopts = FitOptions { window: opts.window * s, ..opts };
        let f = fit_correlation_time(&scaled, &sopts).unwrap();
        prop_assert_eq!(f.points, base.points);
        prop_assert!((f.tau - s * base.tau).abs() <= 1e-9 * s * base.tau);
        prop_assert!((f.amplitude - base.amplitude).abs() <= 1e-9 * base.amplitude);
    }
}
