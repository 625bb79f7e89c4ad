use xeqci::dual::{cones, in_cone, Lattice, Link, DIRECTIONS};
use xeqci_oracle::cones::bfs_cone;

#[test]
fn closed_form_cones_match_gate_pushing() {
    let lattice = Lattice { l: 12, t: 12 };
    for a in lattice.links() {
        let c = cones(a, lattice).unwrap();
        for d in DIRECTIONS {
            let bfs = bfs_cone(a, d, lattice);
            assert_eq!(bfs.iter().collect::<Vec<_>>(), c.get(d).iter().collect::<Vec<_>>(), "{a:?} {d:?}");
        }
    }
}

#[test]
fn anti_diagonal_is_uncovered() {
    let lattice = Lattice { l: 12, t: 12 };
    let a = Link { x: 6, t: 6 };
    for k in 1..=5 {
        for b in [Link { x: 6 + k, t: 6 - k }, Link { x: 6 - k, t: 6 + k }] {
            assert!(DIRECTIONS.iter().all(|&d| !in_cone(a, d, b)), "{b:?}");
            assert!(DIRECTIONS.iter().all(|&d| !bfs_cone(a, d, lattice).contains(b)), "{b:?}");
        }
    }
}

#[test]
fn trichotomy_small_lattice() {
    let (n, bad) = xeqci_oracle::cones::exhaustive_trichotomy(Lattice { l: 8, t: 7 });
    assert!(n > 0);
    assert!(bad.is_empty(), "{:?}", &bad[..bad.len().min(5)]);
}
