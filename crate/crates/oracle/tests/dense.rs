use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xeqci::engine::{analyze, oracle_pass, quantum_pass};
use xeqci::gates::{self, CliffordGate};
use xeqci::state::Probability;
use xeqci::StabilizerState;
use xeqci_oracle::*;

fn normalized(mut d: Density) -> Density {
    let t = d.trace();
    d.m.scale(1.0 / t);
    d
}

fn dense_of(s: &StabilizerState) -> Density {
    Density::from_generators(s.num_qubits(), &s.generators())
}

fn prob_zero(d: &Density, q: usize) -> f64 {
    d.project(q, false).trace() / d.trace()
}

fn random_sites(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    all.truncate(k);
    all
}

fn random_start(n: usize, rng: &mut ChaCha8Rng) -> StabilizerState {
    let mut s = if rng.random() { StabilizerState::zero(n) } else { StabilizerState::maximally_mixed(n) };
    if rng.random() {
        // partially mixed: start pure and trace out a random subset
        s = StabilizerState::zero(n);
        let g = gates::random_clifford(n, rng);
        s.apply_gate(&g, &(0..n).collect::<Vec<_>>()).unwrap();
        let k = rng.random_range(1..=n);
        s.depolarize_region(&random_sites(n, k, rng)).unwrap();
    }
    s
}

#[test]
fn stabilizer_tracks_dense_density_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..10_000 {
        let n = rng.random_range(1..=4usize);
        let mut s = random_start(n, &mut rng);
        let mut d = dense_of(&s);
        for _ in 0..6 {
            match rng.random_range(0..4) {
                0 => {
                    let k = rng.random_range(1..=n.min(3));
                    let sites = random_sites(n, k, &mut rng);
                    let g = gates::random_clifford(k, &mut rng);
                    s.apply_gate(&g, &sites).unwrap();
                    d.apply_local(&clifford_unitary(&g), &sites);
                }
                1 => {
                    let q = rng.random_range(0..n);
                    let p0 = prob_zero(&d, q);
                    assert!((s.z_probability(q, false).unwrap() - p0).abs() < 1e-12);
                    assert!([0.0, 0.5, 1.0].iter().any(|v| (v - p0).abs() < 1e-12), "p = {p0}");
                    let (o, pr) = s.measure_z(q, &mut rng).unwrap();
                    let want = if o { 1.0 - p0 } else { p0 };
                    assert!((pr.value() - want).abs() < 1e-12);
                    assert_eq!(pr == Probability::One, (want - 1.0).abs() < 1e-12);
                    d = normalized(d.project(q, o));
                }
                2 => {
                    let q = rng.random_range(0..n);
                    let o: bool = rng.random();
                    let p = d.project(q, o).trace() / d.trace();
                    let ok = s.postselect_z(q, o).unwrap();
                    assert_eq!(ok, p > 1e-12);
                    if ok {
                        d = normalized(d.project(q, o));
                    }
                }
                _ => {
                    let k = rng.random_range(1..=n);
                    let region = random_sites(n, k, &mut rng);
                    s.depolarize_region(&region).unwrap();
                    d.depolarize(&region);
                    let mut again = s.clone();
                    again.depolarize_region(&region).unwrap();
                    assert!(dense_of(&again).m.max_abs_diff(&dense_of(&s).m) < 1e-12);
                    assert_eq!(again.rank(), s.rank());
                }
            }
            s.assert_invariants();
            assert!(dense_of(&s).m.max_abs_diff(&d.m) < 1e-10);
        }
    }
}

#[test]
fn support_dimension_matches_outcome_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..3000 {
        let n = rng.random_range(1..=4usize);
        let s = random_start(n, &mut rng);
        let k = rng.random_range(1..=n);
        let sites = random_sites(n, k, &mut rng);
        let r = dense_of(&s).reduce(&sites);
        let probs: Vec<f64> = (0..r.dim).map(|i| r.at(i, i).re).collect();
        let support: Vec<f64> = probs.iter().copied().filter(|&p| p > 1e-12).collect();
        let c = s.z_support_dimension(&sites).unwrap();
        assert_eq!(support.len(), 1 << (k - c), "sites {sites:?}");
        let value = 1.0 / support.len() as f64;
        assert!(support.iter().all(|p| (p - value).abs() < 1e-12));
    }
}

#[test]
fn gate_composition_on_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for _ in 0..2000 {
        let n = rng.random_range(1..=4usize);
        let k = rng.random_range(1..=n);
        let sites = random_sites(n, k, &mut rng);
        let (g1, g2) = (gates::random_clifford(k, &mut rng), gates::random_clifford(k, &mut rng));
        let s0 = random_start(n, &mut rng);
        let mut a = s0.clone();
        a.apply_gate(&g1, &sites).unwrap();
        a.apply_gate(&g2, &sites).unwrap();
        let mut b = s0.clone();
        b.apply_gate(&g1.then(&g2), &sites).unwrap();
        assert!(dense_of(&a).m.max_abs_diff(&dense_of(&b).m) < 1e-12);
        let mut d = dense_of(&s0);
        d.apply_local(&clifford_unitary(&g2).mul(&clifford_unitary(&g1)), &sites);
        assert!(d.m.max_abs_diff(&dense_of(&a).m) < 1e-10);
    }
}

/// Realignment `Ũ[(o₁ i₁), (o₂ i₂)] = U[(o₁ o₂), (i₁ i₂)]` is unitary.
fn is_dual_unitary(g: &CliffordGate) -> bool {
    let u = clifford_unitary(g);
    let mut r = Matrix::zeros(4);
    for o1 in 0..2 {
        for o2 in 0..2 {
            for i1 in 0..2 {
                for i2 in 0..2 {
                    r.data[(o1 | i1 << 1) * 4 + (o2 | i2 << 1)] = u.at(o1 | o2 << 1, i1 | i2 << 1);
                }
            }
        }
    }
    r.mul(&r.adjoint()).max_abs_diff(&Matrix::identity(4)) < 1e-10
}

#[test]
fn reshape_unitarity_oracle() {
    assert!(is_dual_unitary(&CliffordGate::swap()));
    assert!(is_dual_unitary(&gates::dual_unitary_core()));
    assert!(!is_dual_unitary(&CliffordGate::cnot()));
    assert!(!is_dual_unitary(&CliffordGate::identity(2)));
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..500 {
        assert!(is_dual_unitary(&gates::dual_unitary_clifford(&mut rng)));
        assert!(is_dual_unitary(gates::two_qubit(gates::random_dual_unitary_index(&mut rng))));
    }
}

/// Sampling on a fixed instance reproduces the dense `χ_C` within 4σ.
#[test]
fn sampling_is_unbiased_on_fixed_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let n = 4000;
    let mut checked = 0;
    while checked < 40 {
        let spec = random_small_spec(&mut rng);
        let inst = spec.realize(&mut rng);
        let Some(exact) = chi_fixed(&inst, inst.u_b.gate()) else { continue };
        let sigma = (exact * (1.0 - exact) / n as f64).sqrt();
        let an = analyze(&inst);
        let conditioned = (0..n).filter(|_| an.sample(&mut rng).unwrap().0).count() as f64 / n as f64;
        let mut hits = 0usize;
        let mut done = 0usize;
        let mut attempts = 0usize;
        while done < n && attempts < 200 * n {
            attempts += 1;
            let Ok(traj) = quantum_pass(&inst, &mut rng) else { continue };
            let Ok((c, _)) = oracle_pass(&inst, &traj) else { continue };
            hits += c as usize;
            done += 1;
        }
        assert_eq!(done, n, "literal passes stalled on {spec:?}");
        let literal = hits as f64 / n as f64;
        for (name, v) in [("conditioned", conditioned), ("literal", literal)] {
            if sigma == 0.0 {
                assert_eq!(v, exact, "{name} on {spec:?}");
            } else {
                assert!((v - exact).abs() < 4.0 * sigma, "{name}: {v} vs {exact} ± {sigma} on {spec:?}");
            }
        }
        checked += 1;
    }
}
