//! Causal cones of links in dual-unitary brickwork circuits with a monitored
//! region R.
//!
//! A link `(x, t)` is the wire of site `x` at slice `t`. It is right-moving
//! when `x ≡ t (mod 2)`: it leaves the gate of step `t` as its right output
//! and enters the gate of step `t + 1` as its left input.
//!
//! Each of the four cones of a link is the set of links a unitary on it can
//! be pushed onto by conjugating through gates in one direction: the
//! outgoing legs (in that direction) of every gate in the 45-degree cone
//! anchored at the first gate the link feeds in that direction. The link
//! itself belongs to all four. In relative coordinates `u = y − x`,
//! `v = t' − t` of a right-moving link:
//!
//! * up: `v ≥ u` and `v ≥ 1 − u`
//! * right: `u ≥ v` and `u ≥ 1 − v`
//! * down: `u ≥ v` and `u ≤ −1 − v`
//! * left: `u ≤ v` and `u ≤ −1 − v`
//!
//! Left-moving links are the mirror image with left and right exchanged.
//! Same-chirality links on the anti-diagonal `u + v = 0` are inputs only and
//! lie in no cone.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DualError {
    #[error("link ({x}, {t}) lies outside the {l}×{tt} lattice")]
    OffLattice { x: i64, t: i64, l: usize, tt: usize },
}

/// Links `x ∈ [0, L)`, `t ∈ [0, T]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "T")]
    pub t: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Link {
    pub x: usize,
    pub t: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chirality {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

pub const DIRECTIONS: [Direction; 4] = [Direction::Up, Direction::Down, Direction::Left, Direction::Right];

impl Link {
    pub fn chirality(&self) -> Chirality {
        if (self.x + self.t) % 2 == 0 {
            Chirality::Right
        } else {
            Chirality::Left
        }
    }
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.l * (self.t + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.l == 0
    }

    pub fn index(&self, k: Link) -> usize {
        k.t * self.l + k.x
    }

    pub fn link(&self, i: usize) -> Link {
        Link { x: i % self.l, t: i / self.l }
    }

    pub fn contains(&self, k: Link) -> bool {
        k.x < self.l && k.t <= self.t
    }

    pub fn links(&self) -> impl Iterator<Item = Link> + '_ {
        (0..self.len()).map(|i| self.link(i))
    }

    pub fn check(&self, k: Link) -> Result<(), DualError> {
        if self.contains(k) {
            Ok(())
        } else {
            Err(DualError::OffLattice { x: k.x as i64, t: k.t as i64, l: self.l, tt: self.t })
        }
    }

    /// Links `x0..=x1 × t0..=t1`, clipped to the lattice.
    pub fn rectangle(&self, x0: usize, x1: usize, t0: usize, t1: usize) -> LinkSet {
        let mut s = LinkSet::empty(*self);
        for t in t0..=t1.min(self.t) {
            for x in x0..=x1.min(self.l.saturating_sub(1)) {
                s.insert(Link { x, t });
            }
        }
        s
    }
}

/// Whether the relative offset `(u, v)` from a right-moving link lies in cone `d`.
fn in_right_moving_cone(d: Direction, u: i64, v: i64) -> bool {
    if u == 0 && v == 0 {
        return true;
    }
    match d {
        Direction::Up => v >= u && v >= 1 - u,
        Direction::Right => u >= v && u >= 1 - v,
        Direction::Down => u >= v && u <= -1 - v,
        Direction::Left => u <= v && u <= -1 - v,
    }
}

/// Membership of `b` in cone `d` of `a`.
pub fn in_cone(a: Link, d: Direction, b: Link) -> bool {
    let u = b.x as i64 - a.x as i64;
    let v = b.t as i64 - a.t as i64;
    match a.chirality() {
        Chirality::Right => in_right_moving_cone(d, u, v),
        Chirality::Left => {
            let m = match d {
                Direction::Left => Direction::Right,
                Direction::Right => Direction::Left,
                other => other,
            };
            in_right_moving_cone(m, -u, v)
        }
    }
}

/// Set of links as a bitmap over the lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkSet {
    pub lattice: Lattice,
    bits: Vec<bool>,
}

impl LinkSet {
    pub fn empty(lattice: Lattice) -> Self {
        LinkSet { lattice, bits: vec![false; lattice.len()] }
    }

    pub fn from_links(lattice: Lattice, links: impl IntoIterator<Item = Link>) -> Self {
        let mut s = Self::empty(lattice);
        for k in links {
            s.insert(k);
        }
        s
    }

    pub fn insert(&mut self, k: Link) {
        if self.lattice.contains(k) {
            let i = self.lattice.index(k);
            self.bits[i] = true;
        }
    }

    pub fn contains(&self, k: Link) -> bool {
        self.lattice.contains(k) && self.bits[self.lattice.index(k)]
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn iter(&self) -> impl Iterator<Item = Link> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| self.lattice.link(i))
    }

    pub fn intersects(&self, o: &LinkSet) -> bool {
        self.bits.iter().zip(&o.bits).any(|(a, b)| *a && *b)
    }

    pub fn is_subset(&self, o: &LinkSet) -> bool {
        self.bits.iter().zip(&o.bits).all(|(a, b)| !*a || *b)
    }
}

/// The four cones of a link, clipped to the lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeSet {
    pub up: LinkSet,
    pub down: LinkSet,
    pub left: LinkSet,
    pub right: LinkSet,
}

impl ConeSet {
    pub fn get(&self, d: Direction) -> &LinkSet {
        match d {
            Direction::Up => &self.up,
            Direction::Down => &self.down,
            Direction::Left => &self.left,
            Direction::Right => &self.right,
        }
    }
}

pub fn cones(a: Link, lattice: Lattice) -> Result<ConeSet, DualError> {
    lattice.check(a)?;
    let cone = |d| LinkSet::from_links(lattice, lattice.links().filter(|&b| in_cone(a, d, b)));
    Ok(ConeSet {
        up: cone(Direction::Up),
        down: cone(Direction::Down),
        left: cone(Direction::Left),
        right: cone(Direction::Right),
    })
}

/// Cones of `a` that meet R.
pub fn blocked(a: Link, r: &LinkSet) -> [bool; 4] {
    let mut out = [false; 4];
    for k in r.iter() {
        for (i, d) in DIRECTIONS.iter().enumerate() {
            out[i] |= in_cone(a, *d, k);
        }
    }
    out
}

/// `F_A`: links `B ≠ A` such that every cone of A meets `R ∪ {B}`.
pub fn future_light_cone(a: Link, r: &LinkSet) -> Result<LinkSet, DualError> {
    let lattice = r.lattice;
    lattice.check(a)?;
    let blk = blocked(a, r);
    let mut out = LinkSet::empty(lattice);
    for b in lattice.links() {
        if b == a {
            continue;
        }
        if DIRECTIONS.iter().enumerate().all(|(i, d)| blk[i] || in_cone(a, *d, b)) {
            out.insert(b);
        }
    }
    Ok(out)
}

/// Region labels by the number of cones of A that R blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    /// No cone blocked; A has no future light cone.
    Free,
    Gray,
    Yellow,
    Pink,
    /// All four blocked; every link is in F_A.
    Enclosed,
    /// A lies inside R.
    Inside,
}

impl Label {
    pub fn from_count(n: usize) -> Self {
        [Label::Free, Label::Gray, Label::Yellow, Label::Pink, Label::Enclosed][n]
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Free => "free",
            Label::Gray => "gray",
            Label::Yellow => "yellow",
            Label::Pink => "pink",
            Label::Enclosed => "enclosed",
            Label::Inside => "inside",
        }
    }
}

pub fn classify(a: Link, r: &LinkSet) -> Result<Label, DualError> {
    r.lattice.check(a)?;
    if r.contains(a) {
        return Ok(Label::Inside);
    }
    Ok(Label::from_count(blocked(a, r).iter().filter(|&&b| b).count()))
}

/// Label of every link.
pub fn classification_map(r: &LinkSet) -> Vec<(Link, Label)> {
    r.lattice.links().map(|a| (a, classify(a, r).expect("link on lattice"))).collect()
}

/// Links of the light ray leaving `a` in its direction of motion, forward in time.
pub fn light_ray(a: Link, lattice: Lattice) -> LinkSet {
    let mut s = LinkSet::empty(lattice);
    let step: i64 = if a.chirality() == Chirality::Right { 1 } else { -1 };
    let (mut x, mut t) = (a.x as i64, a.t as i64);
    while x >= 0 && (x as usize) < lattice.l && t as usize <= lattice.t {
        s.insert(Link { x: x as usize, t: t as usize });
        x += step;
        t += 1;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAT: Lattice = Lattice { l: 16, t: 16 };

    #[test]
    fn chirality_parity() {
        assert_eq!(Link { x: 2, t: 4 }.chirality(), Chirality::Right);
        assert_eq!(Link { x: 3, t: 4 }.chirality(), Chirality::Left);
    }

    #[test]
    fn right_moving_overlaps() {
        let a = Link { x: 8, t: 8 };
        let c = cones(a, LAT).unwrap();
        assert!(c.up.contains(Link { x: 11, t: 11 }) && c.right.contains(Link { x: 11, t: 11 }));
        assert!(c.down.contains(Link { x: 5, t: 5 }) && c.left.contains(Link { x: 5, t: 5 }));
        assert!(!c.up.contains(Link { x: 5, t: 11 }) || !c.left.contains(Link { x: 5, t: 11 }));
        let b = Link { x: 7, t: 8 };
        let c = cones(b, LAT).unwrap();
        assert!(c.up.contains(Link { x: 4, t: 11 }) && c.left.contains(Link { x: 4, t: 11 }));
    }

    #[test]
    fn corner_cones_are_clipped() {
        let c = cones(Link { x: 0, t: 0 }, LAT).unwrap();
        assert!(c.down.len() <= 1 && c.left.len() <= 1);
        assert!(cones(Link { x: 16, t: 0 }, LAT).is_err());
    }

    #[test]
    fn pink_beside_r() {
        // right-moving link beside the right face of R, heading away from it
        let r = LAT.rectangle(6, 9, 4, 11);
        let a = Link { x: 10, t: 8 };
        assert_eq!(a.chirality(), Chirality::Right);
        assert_eq!(classify(a, &r).unwrap(), Label::Pink);
        let f = future_light_cone(a, &r).unwrap();
        let want = LinkSet::from_links(LAT, cones(a, LAT).unwrap().right.iter().filter(|&b| b != a));
        assert_eq!(f, want);
    }

    #[test]
    fn yellow_off_the_corner() {
        let r = LAT.rectangle(2, 3, 2, 3);
        let a = Link { x: 12, t: 12 };
        assert_eq!(classify(a, &r).unwrap(), Label::Yellow);
        let f = future_light_cone(a, &r).unwrap();
        assert!(!f.is_empty());
        assert!(f.is_subset(&light_ray(a, LAT)));
    }

    #[test]
    fn gray_far_above() {
        let r = LAT.rectangle(2, 3, 2, 3);
        let a = Link { x: 3, t: 14 };
        assert_eq!(classify(a, &r).unwrap(), Label::Gray);
        assert!(future_light_cone(a, &r).unwrap().is_empty());
    }
}
