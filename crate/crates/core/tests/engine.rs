use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xeqci::circuit::{BoundaryConfig, FinalQubit, GateSource, InitialQubit, Region, Spatial};
use xeqci::engine::*;
use xeqci::CircuitSpec;

/// Unitary brickwork on a pure product state with nothing postselected.
fn causal_spec(l: usize, t: usize, gates: GateSource) -> CircuitSpec {
    CircuitSpec {
        l,
        t,
        gates,
        p: 0.0,
        boundary: BoundaryConfig::uniform(l, InitialQubit::Zero, FinalQubit::Open, Spatial::Open),
        a: Region { x: 0, width: 1, t: 0 },
        b: Region { x: 0, width: 1, t: 0 },
        seed: 0,
        monitored: None,
        edge_reset: false,
    }
}

#[test]
fn no_signaling_exact_before_perturbation() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut checked = 0;
    for _ in 0..300 {
        let l = rng.random_range(1..=4usize);
        let t = rng.random_range(1..=4usize);
        let gates = [GateSource::RandomClifford, GateSource::Css, GateSource::DualUnitary][rng.random_range(0..3)];
        let mut spec = causal_spec(l, t, gates);
        let aw = rng.random_range(1..=l.min(2));
        spec.a = Region { x: rng.random_range(0..=l - aw), width: aw, t: rng.random_range(0..=t) };
        let bx = rng.random_range(0..l);
        let disjoint = !spec.a.sites(l).contains(&bx);
        let bt = if disjoint { rng.random_range(0..=spec.a.t) } else if spec.a.t > 0 { rng.random_range(0..spec.a.t) } else { continue };
        spec.b = Region { x: bx, width: 1, t: bt };
        let inst = spec.realize(&mut rng);
        let chi = instance_chi_all_povm(&inst).unwrap().unwrap();
        assert!((chi - 1.0).abs() < 1e-12, "χ = {chi} for {spec:?}");
        checked += 1;
    }
    assert!(checked > 200);
}

#[test]
fn no_signaling_statistical_at_scale() {
    let mut spec = CircuitSpec::preset("clifford-pure", 16, 16).unwrap();
    spec.a.t = 10;
    let xs: Vec<usize> = (0..16).collect();
    let ts: Vec<usize> = (0..10).collect();
    let grid = scan_landscape(&spec, &xs, &ts, 200, 5, Method::Conditioned, None).unwrap();
    for p in &grid.points {
        assert_eq!(p.mean_c, 1.0, "({}, {})", p.x_b, p.t_b);
        assert_eq!(p.neg_log2_chi, 0.0);
    }
}

#[test]
fn single_qubit_toy_is_nine_tenths() {
    let spec = CircuitSpec::single_qubit_toy();
    let inst = spec.realize(&mut ChaCha8Rng::seed_from_u64(0));
    let chi = instance_chi_all_povm(&inst).unwrap().unwrap();
    assert!((chi - 0.9).abs() < 1e-12);
    assert!((enumerate_chi(&inst).unwrap().unwrap() - 0.9).abs() < 1e-12);
    let e = estimate_chi(&spec, 20_000, 1, Method::Conditioned).unwrap();
    assert!((e.mean - 0.9).abs() < 4.0 * e.stderr);
    let e = estimate_chi(&spec, 20_000, 2, Method::InstanceExact).unwrap();
    assert!((e.mean - 0.9).abs() < 4.0 * e.stderr);
}

#[test]
fn trials_are_bernoulli() {
    let spec = CircuitSpec::preset("inverted-cone", 6, 6).unwrap();
    for i in 0..200 {
        let mut rng = trial_rng(3, 0, i);
        let r = literal_trial(&spec, &mut rng, 1000).unwrap();
        assert!(r.trajectory.born_weight_class.is_some());
        let mut rng = trial_rng(3, 1, i);
        let _ = conditioned_trial(&spec, &mut rng, 1000).unwrap().c;
    }
}

#[test]
fn grid_means_are_normalized() {
    for name in ["clifford-pure", "inverted-cone", "css-half-half", "hybrid-mipt"] {
        let spec = CircuitSpec::preset(name, 8, 8).unwrap();
        let xs: Vec<usize> = (0..8).collect();
        let ts: Vec<usize> = (0..=8).collect();
        for method in [Method::Conditioned, Method::InstanceExact] {
            let g = scan_landscape(&spec, &xs, &ts, 100, 7, method, None).unwrap();
            for p in &g.points {
                assert!(p.mean_c >= 0.0 && p.mean_c <= 1.0 + 4.0 * p.stderr, "{name} {method:?}: {p:?}");
                assert!(p.neg_log2_chi.is_finite());
            }
        }
    }
}

#[test]
fn scans_are_seed_deterministic() {
    let xs: Vec<usize> = (0..8).collect();
    let ts = vec![2, 4, 6];
    for method in [Method::Conditioned, Method::Literal, Method::InstanceExact] {
        let name = if method == Method::Literal { "clifford-pure" } else { "css-half-half" };
        let spec = CircuitSpec::preset(name, 8, 8).unwrap();
        let a = scan_landscape(&spec, &xs, &ts, 60, 42, method, None).unwrap();
        let b = scan_landscape(&spec, &xs, &ts, 60, 42, method, None).unwrap();
        assert_eq!(a, b, "{method:?}");
        let c = scan_landscape(&spec, &xs, &ts, 60, 43, method, None).unwrap();
        assert_ne!(a.points, c.points, "{method:?}");
    }
}

#[test]
fn scans_ignore_thread_count() {
    let spec = CircuitSpec::preset("clifford-pure", 8, 8).unwrap();
    let xs: Vec<usize> = (0..8).collect();
    let ts: Vec<usize> = (0..=8).collect();
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            (
                scan_landscape(&spec, &xs, &ts, 150, 9, Method::Conditioned, None).unwrap(),
                scan_landscape(&spec, &xs, &ts[..3], 40, 9, Method::Literal, None).unwrap(),
            )
        })
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn clipping_keeps_logs_finite() {
    assert_eq!(neg_log2_clipped(1.0, 10), 0.0);
    assert!((neg_log2_clipped(0.0, 10) - 100f64.log2()).abs() < 1e-12);
    assert!((neg_log2_clipped(0.25, 10) - 2.0).abs() < 1e-12);
}

#[test]
fn bad_requests_rejected() {
    let spec = CircuitSpec::preset("clifford-pure", 4, 4).unwrap();
    assert_eq!(estimate_chi(&spec, 0, 0, Method::Conditioned).unwrap_err(), EngineError::NoTrials);
    assert!(scan_landscape(&spec, &[9], &[1], 10, 0, Method::Conditioned, None).is_err());
    let mut wide = spec.clone();
    wide.b.width = 2;
    let inst = wide.realize(&mut ChaCha8Rng::seed_from_u64(0));
    assert_eq!(enumerate_chi(&inst).unwrap_err(), EngineError::WideProbe);
}
