use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xeqci::circuit::*;
use xeqci::CircuitSpec;

#[test]
fn measurement_counts_are_binomial() {
    for p in [0.05, 0.15, 0.5] {
        let mut spec = CircuitSpec::preset("hybrid-mipt", 16, 12).unwrap();
        spec.p = p;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 2000;
        let total: usize = (0..n).map(|_| spec.realize(&mut rng).num_measurements()).sum();
        let events = (spec.l * spec.t) as f64;
        let mean = n as f64 * events * p;
        let sigma = (n as f64 * events * p * (1.0 - p)).sqrt();
        assert!((total as f64 - mean).abs() < 4.0 * sigma, "p = {p}: {total} vs {mean} ± {sigma}");
    }
}

#[test]
fn every_bond_gets_one_gate_per_two_steps() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for spatial in [Spatial::Open, Spatial::Periodic] {
        let mut spec = CircuitSpec::preset("clifford-pure", 10, 8).unwrap();
        spec.boundary.spatial = spatial;
        let inst = spec.realize(&mut rng);
        for pair in inst.layers.chunks(2) {
            let mut bonds: Vec<(u16, u16)> = pair.iter().flatten().map(|b| (b.a.min(b.b), b.a.max(b.b))).collect();
            bonds.sort_unstable();
            let len = bonds.len();
            bonds.dedup();
            assert_eq!(bonds.len(), len);
            assert_eq!(len, if spatial == Spatial::Periodic { 10 } else { 9 });
        }
    }
}

#[test]
fn schedule_contains_each_event_once() {
    let spec = CircuitSpec::preset("inverted-cone", 8, 8).unwrap();
    let inst = spec.realize(&mut ChaCha8Rng::seed_from_u64(3));
    let ops = inst.schedule();
    assert_eq!(ops.iter().filter(|o| **o == Op::Depolarize).count(), 1);
    assert_eq!(ops.iter().filter(|o| **o == Op::Probe).count(), 1);
    assert_eq!(ops.iter().filter(|o| matches!(o, Op::Postselect(_))).count(), 8);
    let gates = ops.iter().filter(|o| matches!(o, Op::Gate { .. })).count();
    assert_eq!(gates, inst.layers.iter().map(Vec::len).sum::<usize>());
}

#[test]
fn monitored_links_are_all_measured() {
    let spec = CircuitSpec::preset("dual-monitored", 12, 12).unwrap();
    let m = spec.monitored.unwrap();
    let inst = spec.realize(&mut ChaCha8Rng::seed_from_u64(4));
    let measured: Vec<(usize, usize)> = inst
        .schedule()
        .into_iter()
        .filter_map(|o| match o {
            Op::Measure { site, step } => Some((site, step)),
            _ => None,
        })
        .collect();
    for x in m.x0..=m.x1 {
        for t in m.t0..=m.t1 {
            assert!(measured.contains(&(x, t)), "link ({x}, {t}) not measured");
        }
    }
}

#[test]
fn invalid_specs_name_the_offending_key() {
    let good = CircuitSpec::preset("clifford-pure", 8, 8).unwrap();
    let cases: Vec<(&str, Box<dyn Fn(&mut CircuitSpec)>)> = vec![
        ("p", Box::new(|s| s.p = 1.5)),
        ("L", Box::new(|s| s.l = 0)),
        ("b", Box::new(|s| s.b.t = 9)),
        ("a", Box::new(|s| s.a.width = 0)),
        ("boundary.initial", Box::new(|s| {
            s.boundary.initial.0.pop();
        })),
        ("boundary.spatial", Box::new(|s| {
            s.boundary.spatial = Spatial::Periodic;
            s.l = 7;
            s.boundary.initial.0.truncate(7);
            s.boundary.final_state.0.truncate(7);
        })),
    ];
    for (key, f) in cases {
        let mut s = good.clone();
        f(&mut s);
        match s.validate() {
            Err(SpecError::Invalid { key: k, .. }) => assert_eq!(k, key),
            other => panic!("{key}: {other:?}"),
        }
    }
}

#[test]
fn spec_serde_roundtrip() {
    for name in PRESETS {
        let s = CircuitSpec::preset(name, 8, 6).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<CircuitSpec>(&json).unwrap(), s);
    }
}
