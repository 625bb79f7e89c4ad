use std::path::Path;

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use xeqci::bgue::{alpha_1, alpha_2, alpha_3, alpha_4, delta_ci_1, delta_ci_2, delta_ci_3, BgueParams};
use xeqci::dual::Lattice;
use xeqci::engine::{enumerate_chi, trial_rng};
use xeqci_oracle::{chi_all_povm, cross_check, random_small_spec};

use crate::config::SelftestArgs;
use crate::manifest::{Manifest, Run};

#[derive(Clone, Debug, Serialize)]
pub struct Suite {
    pub suite: &'static str,
    pub passed: bool,
    pub checked: usize,
    pub failures: usize,
    pub detail: String,
}

fn suite(name: &'static str, checked: usize, failures: Vec<String>) -> Suite {
    Suite {
        suite: name,
        passed: failures.is_empty() && checked > 0,
        checked,
        failures: failures.len(),
        detail: failures.into_iter().take(3).collect::<Vec<_>>().join("; "),
    }
}

/// Stabilizer engine against the dense density-matrix oracle on random small specs.
pub fn oracle_equivalence(specs: usize, seed: u64) -> Suite {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fails = Vec::new();
    for i in 0..specs {
        let spec = random_small_spec(&mut rng);
        let inst = spec.realize(&mut rng);
        if let Err(e) = cross_check(&inst, 1e-12) {
            fails.push(format!("spec {i}: {e}"));
        }
    }
    suite("oracle-equivalence", specs, fails)
}

/// The one-qubit toy case gives 9/10 by enumeration and by the dense oracle.
pub fn toy_closed_form() -> Suite {
    let inst = xeqci::CircuitSpec::single_qubit_toy().realize(&mut trial_rng(0, 0, 0));
    let mut fails = Vec::new();
    for (route, v) in [("enumeration", enumerate_chi(&inst).ok().flatten()), ("dense", chi_all_povm(&inst))] {
        match v {
            Some(v) if (v - 0.9).abs() < 1e-12 => {}
            other => fails.push(format!("{route}: {other:?}")),
        }
    }
    suite("toy-closed-form", 2, fails)
}

/// Cone classifier against gate-pushing cones for every (A, rectangle R).
pub fn dual_trichotomy(side: usize) -> Suite {
    let (n, bad) = xeqci_oracle::cones::exhaustive_trichotomy(Lattice { l: side, t: side - 1 });
    suite("dual-trichotomy", n, bad.iter().map(|m| format!("{m:?}")).collect())
}

/// Random valid BGUE parameters with a nontrivial probe.
pub fn random_bgue<R: Rng + ?Sized>(rng: &mut R) -> BgueParams {
    let n = rng.random_range(2..=60u32);
    let ka = rng.random_range(1..n);
    let kb = rng.random_range(1..=n - ka);
    let d = 2f64.powi(n as i32);
    let smax = d.ln();
    BgueParams::new(
        2f64.powi(ka as i32),
        2f64.powi(kb as i32),
        d,
        rng.random_range(0.0..smax),
        rng.random_range(0.0..smax),
        rng.random_range(0.0..10.0),
    )
    .expect("draw is valid")
}

/// Positivity of α₁–α₄, antisymmetry of ΔCI under S2_i ↔ S2_f, zero at equal entropies.
pub fn bgue_properties(draws: usize, seed: u64) -> Suite {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fails = Vec::new();
    for i in 0..draws {
        let p = random_bgue(&mut rng);
        let a = [alpha_1(&p), alpha_2(&p), alpha_3(&p), alpha_4(&p)];
        if !a.iter().all(|&v| v > 0.0 && v.is_finite()) {
            fails.push(format!("draw {i}: alphas {a:?} at {p:?}"));
        }
        let mut q = p;
        (q.s2_i, q.s2_f) = (p.s2_f, p.s2_i);
        q.purity_f = (-q.s2_f).exp();
        let mut e = p;
        e.s2_f = p.s2_i;
        e.purity_f = (-e.s2_f).exp();
        for f in [delta_ci_1, delta_ci_2, delta_ci_3] {
            let (x, y, z) = (f(&p).unwrap(), f(&q).unwrap(), f(&e).unwrap());
            if x != -y || z != 0.0 {
                fails.push(format!("draw {i}: ΔCI {x} vs swapped {y}, equal {z}"));
            }
        }
    }
    suite("bgue-properties", draws, fails)
}

pub fn run(cfg: &SelftestArgs, out: &Path) -> Result<(Manifest, Vec<Suite>)> {
    let mut run = Run::start("selftest", cfg, out)?;
    let seed = cfg.seed.unwrap();
    let suites = vec![
        oracle_equivalence(cfg.specs.unwrap(), seed),
        toy_closed_form(),
        dual_trichotomy(cfg.lattice.unwrap()),
        bgue_properties(cfg.bgue_draws.unwrap(), seed),
    ];
    run.write_csv("selftest.csv", &suites)?;
    run.write_json("selftest.json", &suites)?;
    Ok((run.finish()?, suites))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        assert!(oracle_equivalence(10, 3).passed);
        assert!(toy_closed_form().passed);
        assert!(dual_trichotomy(6).passed);
        assert!(bgue_properties(2000, 1).passed);
    }
}
