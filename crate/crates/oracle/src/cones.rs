//! Causal cones of dual-unitary brickwork links built by pushing an operator
//! through explicit gates, one gate at a time.
//!
//! The gate of step `s` on bond `(i, i + 1)` exists when `i ≡ s + 1 (mod 2)`.
//! Its legs are `(i, s − 1)`, `(i + 1, s − 1)` (bottom) and `(i, s)`, `(i + 1, s)`
//! (top). Read in a direction, a dual-unitary gate maps the two legs on the
//! trailing side onto the two legs on the leading side.

use std::collections::{HashSet, VecDeque};

use xeqci::dual::{classify, Direction, Label, Lattice, Link, LinkSet};

type P = (i64, i64);

fn gate_exists(i: i64, s: i64) -> bool {
    (i - s - 1).rem_euclid(2) == 0
}

/// Gate (bond, step) whose trailing side in direction `d` holds link `k`.
fn feeding_gate(k: P, d: Direction) -> P {
    let (x, t) = k;
    let candidates: [P; 4] = [(x, t + 1), (x - 1, t + 1), (x, t), (x - 1, t)];
    for (i, s) in candidates {
        if !gate_exists(i, s) {
            continue;
        }
        let trailing: [P; 2] = match d {
            Direction::Up => [(i, s - 1), (i + 1, s - 1)],
            Direction::Down => [(i, s), (i + 1, s)],
            Direction::Right => [(i, s - 1), (i, s)],
            Direction::Left => [(i + 1, s - 1), (i + 1, s)],
        };
        if trailing.contains(&k) {
            return (i, s);
        }
    }
    unreachable!("every link trails exactly one gate per direction")
}

fn leading(g: P, d: Direction) -> [P; 2] {
    let (i, s) = g;
    match d {
        Direction::Up => [(i, s), (i + 1, s)],
        Direction::Down => [(i, s - 1), (i + 1, s - 1)],
        Direction::Right => [(i + 1, s - 1), (i + 1, s)],
        Direction::Left => [(i, s - 1), (i, s)],
    }
}

/// Every link an operator on `a` reaches in direction `d`, including `a`.
pub fn bfs_cone(a: Link, d: Direction, lattice: Lattice) -> LinkSet {
    let pad = (lattice.l + lattice.t + 2) as i64;
    let inside_box = |(x, t): P| x >= -pad && x < lattice.l as i64 + pad && t >= -pad && t <= lattice.t as i64 + pad;
    let start = (a.x as i64, a.t as i64);
    let mut seen: HashSet<P> = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(k) = queue.pop_front() {
        for n in leading(feeding_gate(k, d), d) {
            if inside_box(n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    LinkSet::from_links(
        lattice,
        seen.into_iter()
            .filter(|&(x, t)| x >= 0 && t >= 0 && (x as usize) < lattice.l && t as usize <= lattice.t)
            .map(|(x, t)| Link { x: x as usize, t: t as usize }),
    )
}

/// The four cones of every link, indexed like `lattice.links()`.
pub fn all_cones(lattice: Lattice) -> Vec<[LinkSet; 4]> {
    lattice
        .links()
        .map(|a| xeqci::dual::DIRECTIONS.map(|d| bfs_cone(a, d, lattice)))
        .collect()
}

/// Blocked cones of `a` given its precomputed cones.
pub fn blocked_by(cones: &[LinkSet; 4], r: &LinkSet) -> [bool; 4] {
    [0, 1, 2, 3].map(|i| cones[i].intersects(r))
}

/// Links `b ≠ a` that every unblocked cone contains.
pub fn influence_region(a: Link, cones: &[LinkSet; 4], r: &LinkSet) -> LinkSet {
    let blk = blocked_by(cones, r);
    let lattice = r.lattice;
    LinkSet::from_links(
        lattice,
        lattice.links().filter(|&b| b != a && (0..4).all(|i| blk[i] || cones[i].contains(b))),
    )
}

/// 2-D prefix counts of a link set for O(1) rectangle queries.
struct Prefix {
    w: usize,
    c: Vec<u32>,
}

impl Prefix {
    fn new(s: &LinkSet) -> Self {
        let (l, t) = (s.lattice.l, s.lattice.t + 1);
        let w = l + 1;
        let mut c = vec![0u32; w * (t + 1)];
        for tt in 0..t {
            for x in 0..l {
                let v = s.contains(Link { x, t: tt }) as u32;
                c[(tt + 1) * w + x + 1] = v + c[tt * w + x + 1] + c[(tt + 1) * w + x] - c[tt * w + x];
            }
        }
        Prefix { w, c }
    }

    fn count(&self, x0: usize, x1: usize, t0: usize, t1: usize) -> u32 {
        let w = self.w;
        self.c[(t1 + 1) * w + x1 + 1] + self.c[t0 * w + x0] - self.c[t0 * w + x1 + 1] - self.c[(t1 + 1) * w + x0]
    }
}

/// A disagreement between the closed-form classifier and gate pushing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub a: Link,
    pub rect: [usize; 4],
    pub expected: Label,
    pub got: Label,
}

/// Classifies every link against every rectangle on `lattice` with
/// `xeqci::dual::classify` and with BFS cones. Returns the number of pairs
/// checked and all mismatches.
pub fn exhaustive_trichotomy(lattice: Lattice) -> (usize, Vec<Mismatch>) {
    use rayon::prelude::*;
    let links: Vec<Link> = lattice.links().collect();
    let prefixes: Vec<[Prefix; 4]> = all_cones(lattice).iter().map(|c| [0, 1, 2, 3].map(|i| Prefix::new(&c[i]))).collect();
    let mut rects = Vec::new();
    for x0 in 0..lattice.l {
        for x1 in x0..lattice.l {
            for t0 in 0..=lattice.t {
                for t1 in t0..=lattice.t {
                    rects.push([x0, x1, t0, t1]);
                }
            }
        }
    }
    let out: Vec<(usize, Vec<Mismatch>)> = rects
        .par_iter()
        .map(|&[x0, x1, t0, t1]| {
            let r = lattice.rectangle(x0, x1, t0, t1);
            let mut bad = Vec::new();
            for (i, &a) in links.iter().enumerate() {
                let expected = if (x0..=x1).contains(&a.x) && (t0..=t1).contains(&a.t) {
                    Label::Inside
                } else {
                    Label::from_count(prefixes[i].iter().filter(|p| p.count(x0, x1, t0, t1) > 0).count())
                };
                let got = classify(a, &r).expect("link on lattice");
                if got != expected {
                    bad.push(Mismatch { a, rect: [x0, x1, t0, t1], expected, got });
                }
            }
            (links.len(), bad)
        })
        .collect();
    out.into_iter().fold((0, Vec::new()), |(n, mut all), (k, b)| {
        all.extend(b);
        (n + k, all)
    })
}
