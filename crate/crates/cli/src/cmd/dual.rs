use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Result;
use serde::Serialize;
use xeqci::circuit::Monitored;
use xeqci::dual::{classification_map, classify, cones, future_light_cone, Chirality, Lattice, Link, LinkSet};
use xeqci::engine::{scan_landscape, Method};
use xeqci::{CircuitSpec, Region};

use super::landscape::Row as GridRow;
use crate::config::DualArgs;
use crate::manifest::{Manifest, Run};

#[derive(Serialize)]
struct MapRow {
    x: usize,
    t: usize,
    chirality: &'static str,
    label: &'static str,
}

#[derive(Serialize)]
struct ConeRow {
    x: usize,
    t: usize,
    up: bool,
    down: bool,
    left: bool,
    right: bool,
    in_r: bool,
    in_f: bool,
}

#[derive(Serialize)]
struct Simulation {
    trials: u64,
    significant: usize,
    /// Significant points outside F_A other than A itself.
    violations: Vec<(usize, usize)>,
}

#[derive(Serialize)]
struct Summary {
    lattice: Lattice,
    r: Vec<usize>,
    a: Link,
    a_label: &'static str,
    label_counts: BTreeMap<&'static str, usize>,
    f_a_size: usize,
    simulation: Option<Simulation>,
}

/// Dual-unitary circuit with maximally mixed outer boundaries and region R
/// monitored, perturbed at link `a`.
pub fn simulation_spec(l: usize, t: usize, r: &[usize], a: Link) -> Result<CircuitSpec> {
    let mut spec = CircuitSpec::preset("dual-monitored", l, t)?;
    spec.monitored = Some(Monitored { x0: r[0], x1: r[1], t0: r[2], t1: r[3], gates: xeqci::GateSource::RandomClifford });
    spec.a = Region { x: a.x, width: 1, t: a.t };
    spec.b = Region { x: a.x, width: 1, t: (a.t + 1).min(t) };
    spec.validate()?;
    Ok(spec)
}

pub fn run(cfg: &DualArgs, out: &Path, quiet: bool) -> Result<Manifest> {
    let (l, t) = (cfg.l.unwrap(), cfg.t.unwrap());
    let rv = cfg.r.clone().unwrap();
    let av = cfg.a.clone().unwrap();
    let lattice = Lattice { l, t };
    let r = lattice.rectangle(rv[0], rv[1], rv[2], rv[3]);
    let a = Link { x: av[0], t: av[1] };
    let mut run = Run::start("dual", cfg, out)?;

    let map = classification_map(&r);
    let mut label_counts = BTreeMap::new();
    for (_, lab) in &map {
        *label_counts.entry(lab.as_str()).or_insert(0) += 1;
    }
    run.write_csv(
        "dual_map.csv",
        map.iter().map(|(k, lab)| MapRow {
            x: k.x,
            t: k.t,
            chirality: if k.chirality() == Chirality::Right { "right" } else { "left" },
            label: lab.as_str(),
        }),
    )?;

    let c = cones(a, lattice)?;
    let f = future_light_cone(a, &r)?;
    run.write_csv(
        "cones.csv",
        lattice.links().map(|k| ConeRow {
            x: k.x,
            t: k.t,
            up: c.up.contains(k),
            down: c.down.contains(k),
            left: c.left.contains(k),
            right: c.right.contains(k),
            in_r: r.contains(k),
            in_f: f.contains(k),
        }),
    )?;

    let simulation = if cfg.simulate.unwrap() {
        let spec = simulation_spec(l, t, &rv, a)?;
        let report = super::progress("dual", quiet);
        let xs: Vec<usize> = (0..l).collect();
        let ts: Vec<usize> = (0..=t).collect();
        let trials = cfg.trials.unwrap();
        let grid = scan_landscape(&spec, &xs, &ts, trials, cfg.seed.unwrap(), Method::Conditioned, Some(&report))?;
        run.write_csv("landscape.csv", grid.points.iter().map(GridRow::from))?;
        Some(containment(&grid.points, a, &f, trials))
    } else {
        None
    };

    let summary = Summary {
        lattice,
        r: rv,
        a,
        a_label: classify(a, &r)?.as_str(),
        label_counts,
        f_a_size: f.len(),
        simulation,
    };
    run.write_json("dual.json", &summary)?;
    run.finish()
}

fn containment(points: &[xeqci::engine::GridPoint], a: Link, f: &LinkSet, trials: u64) -> Simulation {
    let sig: Vec<&xeqci::engine::GridPoint> = points.iter().filter(|p| p.neg_log2_chi > 5.0 * p.stderr).collect();
    let violations = sig
        .iter()
        .map(|p| Link { x: p.x_b, t: p.t_b })
        .filter(|&k| k != a && !f.contains(k))
        .map(|k| (k.x, k.t))
        .collect();
    Simulation { trials, significant: sig.len(), violations }
}
