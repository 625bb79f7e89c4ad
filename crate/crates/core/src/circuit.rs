//! Spacetime circuit programs and their random realizations.
//!
//! Time slice `t ∈ [0, T]` is the state after step `t`; slice 0 is the initial
//! state. Step `t ≥ 1` applies its brickwork layer, then environment resets
//! on idle edge sites (when enabled), then mid-circuit Z measurements, then
//! Z measurements on the monitored region. After that the slice
//! hosts the perturbation A (if `t == t_A`), the probe B (if `t == t_B`) and,
//! at `t == T`, the final-state postselection.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gates::{self, CliffordGate};
use crate::pauli::PauliOperator;

/// Largest probe width; the POVM Clifford acts on `2·width ≤ 32` ancillas.
pub const MAX_PROBE_WIDTH: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("invalid value for `{key}`: {msg}")]
    Invalid { key: &'static str, msg: String },
}

fn invalid(key: &'static str, msg: impl Into<String>) -> SpecError {
    SpecError::Invalid { key, msg: msg.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateSource {
    RandomClifford,
    Css,
    DualUnitary,
    /// The same two-qubit gate everywhere, by index into the two-qubit table.
    Fixed(u16),
}

impl GateSource {
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> u16 {
        match self {
            GateSource::RandomClifford => gates::random_two_qubit_index(rng),
            GateSource::Css => gates::random_css_index(rng),
            GateSource::DualUnitary => gates::random_dual_unitary_index(rng),
            GateSource::Fixed(i) => i,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spatial {
    Open,
    Periodic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialQubit {
    Zero,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FinalQubit {
    Postselect,
    Open,
}

/// Per-site pattern written as a string, one character per site.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern<T>(pub Vec<T>);

pub trait PatternChar: Sized + Copy {
    fn to_char(self) -> char;
    fn from_char(c: char) -> Option<Self>;
}

impl PatternChar for InitialQubit {
    fn to_char(self) -> char {
        match self {
            InitialQubit::Zero => '0',
            InitialQubit::Mixed => 'm',
        }
    }
    fn from_char(c: char) -> Option<Self> {
        match c {
            '0' => Some(InitialQubit::Zero),
            'm' => Some(InitialQubit::Mixed),
            _ => None,
        }
    }
}

impl PatternChar for FinalQubit {
    fn to_char(self) -> char {
        match self {
            FinalQubit::Postselect => 'p',
            FinalQubit::Open => 'o',
        }
    }
    fn from_char(c: char) -> Option<Self> {
        match c {
            'p' => Some(FinalQubit::Postselect),
            'o' => Some(FinalQubit::Open),
            _ => None,
        }
    }
}

impl<T: PatternChar> Pattern<T> {
    pub fn uniform(l: usize, v: T) -> Self {
        Pattern(vec![v; l])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<T: PatternChar> fmt::Display for Pattern<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|c| write!(f, "{}", c.to_char()))
    }
}

impl<T: PatternChar> FromStr for Pattern<T> {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.chars()
            .map(|c| T::from_char(c).ok_or_else(|| format!("unexpected character {c:?} in pattern {s:?}")))
            .collect::<Result<Vec<_>, _>>()
            .map(Pattern)
    }
}

impl<T: PatternChar> Serialize for Pattern<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de, T: PatternChar> Deserialize<'de> for Pattern<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Initial and final states plus the spatial boundary condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConfig {
    /// `0` = |0⟩, `m` = maximally mixed, one character per site.
    pub initial: Pattern<InitialQubit>,
    /// `p` = postselect onto |0⟩ at the final time, `o` = open.
    #[serde(rename = "final")]
    pub final_state: Pattern<FinalQubit>,
    pub spatial: Spatial,
    /// Optional stabilizer generators on the L system qubits, replacing `initial`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_generators: Option<Vec<PauliOperator>>,
}

impl BoundaryConfig {
    pub fn uniform(l: usize, init: InitialQubit, fin: FinalQubit, spatial: Spatial) -> Self {
        Self {
            initial: Pattern::uniform(l, init),
            final_state: Pattern::uniform(l, fin),
            spatial,
            initial_generators: None,
        }
    }
}

/// Block of sites `x .. x + width` (wrapping under periodic boundaries) at slice `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub x: usize,
    pub width: usize,
    pub t: usize,
}

impl Region {
    pub fn sites(&self, l: usize) -> Vec<usize> {
        (0..self.width).map(|k| (self.x + k) % l).collect()
    }
}

/// Rectangle of links `x0..=x1 × t0..=t1` whose every link is Z-measured
/// into the trajectory record, with gates lying entirely inside replaced by
/// `gates`. Conditioning on the record postselects R onto the observed
/// outcomes, which fixes an instance-dependent state on R.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monitored {
    pub x0: usize,
    pub x1: usize,
    pub t0: usize,
    pub t1: usize,
    pub gates: GateSource,
}

impl Monitored {
    pub fn contains(&self, x: usize, t: usize) -> bool {
        (self.x0..=self.x1).contains(&x) && (self.t0..=self.t1).contains(&t)
    }

    /// Gate on bond (i, i+1) at step s has all four legs inside.
    pub fn contains_gate(&self, i: usize, s: usize) -> bool {
        s >= 1 && self.contains(i, s - 1) && self.contains(i + 1, s) && self.contains(i, s) && self.contains(i + 1, s - 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub gates: GateSource,
    /// Probability of a Z measurement per site per step.
    pub p: f64,
    pub boundary: BoundaryConfig,
    /// Perturbation region A.
    pub a: Region,
    /// Probe region B.
    pub b: Region,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monitored: Option<Monitored>,
    /// Swap idle edge sites with a maximally mixed environment after each layer.
    #[serde(default)]
    pub edge_reset: bool,
}

pub const PRESETS: [&str; 6] =
    ["clifford-pure", "css-half-half", "css-pure-center", "hybrid-mipt", "inverted-cone", "dual-monitored"];

impl CircuitSpec {
    /// Named configuration with perturbation A (2 sites × 1 step) centred in
    /// space at `t_A = T/2` unless the preset fixes it otherwise. B defaults to
    /// `(x_A, t_A + 1)`.
    ///
    /// `clifford-pure` puts A early (`t_A = max(T/8, 1)`), before the product
    /// state has scrambled; `inverted-cone` mirrors it to `t_A = T − max(T/8, 1)`.
    ///
    /// `dual-monitored` places A on the first link beside the right face of R
    /// that R encloses on three sides.
    pub fn preset(name: &str, l: usize, t: usize) -> Result<Self, SpecError> {
        use FinalQubit::*;
        use InitialQubit::*;
        let half = l / 2;
        let a = Region { x: half.saturating_sub(1), width: 2.min(l), t: t / 2 };
        let mut spec = CircuitSpec {
            l,
            t,
            gates: GateSource::RandomClifford,
            p: 0.0,
            boundary: BoundaryConfig::uniform(l, Zero, Open, Spatial::Open),
            a,
            b: Region { x: a.x, width: 1, t: (a.t + 1).min(t) },
            seed: 0,
            monitored: None,
            edge_reset: false,
        };
        match name {
            "clifford-pure" => {
                spec.a.t = (t / 8).max(1).min(t);
                spec.b.t = (spec.a.t + 1).min(t);
            }
            "inverted-cone" => {
                spec.boundary = BoundaryConfig::uniform(l, Mixed, Postselect, Spatial::Open);
                spec.a.t = t.saturating_sub((t / 8).max(1));
                spec.b.t = spec.a.t.saturating_sub(1);
            }
            "css-half-half" => {
                spec.gates = GateSource::Css;
                let init = (0..l).map(|x| if x < half { Zero } else { Mixed }).collect();
                let fin = (0..l).map(|x| if x < half { Open } else { Postselect }).collect();
                spec.boundary.initial = Pattern(init);
                spec.boundary.final_state = Pattern(fin);
            }
            "css-pure-center" => {
                spec.gates = GateSource::Css;
                let pure = |x: usize| x >= l / 4 && x < l - l / 4;
                spec.boundary.initial = Pattern((0..l).map(|x| if pure(x) { Zero } else { Mixed }).collect());
                spec.boundary.final_state =
                    Pattern((0..l).map(|x| if pure(x) { Postselect } else { Open }).collect());
            }
            "hybrid-mipt" => {
                spec.p = 0.15;
                spec.boundary.spatial = Spatial::Periodic;
                spec.a = Region { x: 0, width: l, t: t / 2 };
                spec.b = Region { x: 0, width: 1, t: (t / 2 + 1).min(t) };
            }
            "dual-monitored" => {
                spec.gates = GateSource::DualUnitary;
                spec.boundary = BoundaryConfig::uniform(l, Mixed, Open, Spatial::Open);
                spec.edge_reset = true;
                let (wx, wt) = ((l / 4).max(1), (t / 2).max(1));
                let (x0, t0) = ((l - wx) / 2, (t - wt) / 2);
                let m = Monitored { x0, x1: x0 + wx - 1, t0, t1: t0 + wt - 1, gates: GateSource::RandomClifford };
                spec.monitored = Some(m);
                let ax = (m.x1 + 1).min(l - 1);
                let lat = crate::dual::Lattice { l, t };
                let r = lat.rectangle(m.x0, m.x1, m.t0, m.t1);
                let pink = (m.t0..=m.t1)
                    .map(|at| crate::dual::Link { x: ax, t: at })
                    .find(|&k| crate::dual::classify(k, &r) == Ok(crate::dual::Label::Pink));
                let at = pink.map_or((m.t0 + m.t1) / 2, |k| k.t);
                spec.a = Region { x: ax, width: 1, t: at };
                spec.b = Region { x: (ax + 1).min(l - 1), width: 1, t: (at + 1).min(t) };
            }
            other => return Err(SpecError::UnknownPreset(other.to_string())),
        }
        Ok(spec)
    }

    /// One qubit prepared in |0⟩, fully depolarized at slice 0 and probed at
    /// slice 1; no gates act.
    pub fn single_qubit_toy() -> Self {
        CircuitSpec {
            l: 1,
            t: 1,
            gates: GateSource::RandomClifford,
            p: 0.0,
            boundary: BoundaryConfig::uniform(1, InitialQubit::Zero, FinalQubit::Open, Spatial::Open),
            a: Region { x: 0, width: 1, t: 0 },
            b: Region { x: 0, width: 1, t: 1 },
            seed: 0,
            monitored: None,
            edge_reset: false,
        }
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let l = self.l;
        if l == 0 {
            return Err(invalid("L", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.p) || self.p.is_nan() {
            return Err(invalid("p", format!("{} is outside [0, 1]", self.p)));
        }
        if self.boundary.spatial == Spatial::Periodic && (l < 2 || l % 2 == 1) {
            return Err(invalid("boundary.spatial", "periodic brickwork needs an even L ≥ 2"));
        }
        if self.boundary.initial.len() != l {
            return Err(invalid("boundary.initial", format!("length {} != L = {l}", self.boundary.initial.len())));
        }
        if self.boundary.final_state.len() != l {
            return Err(invalid("boundary.final", format!("length {} != L = {l}", self.boundary.final_state.len())));
        }
        if let Some(g) = &self.boundary.initial_generators {
            if g.iter().any(|p| p.num_qubits() != l) {
                return Err(invalid("boundary.initial_generators", "every generator must act on L qubits"));
            }
            crate::StabilizerState::from_generators(l, g)
                .map_err(|e| invalid("boundary.initial_generators", e.to_string()))?;
        }
        let wraps = self.boundary.spatial == Spatial::Periodic;
        for (key, r) in [("a", &self.a), ("b", &self.b)] {
            if r.width == 0 || r.width > l {
                return Err(invalid(key, format!("width {} must be in 1..={l}", r.width)));
            }
            if r.x >= l || (!wraps && r.x + r.width > l) {
                return Err(invalid(key, format!("sites {}..{} exceed L = {l}", r.x, r.x + r.width)));
            }
            if r.t > self.t {
                return Err(invalid(key, format!("time {} exceeds T = {}", r.t, self.t)));
            }
        }
        if self.b.width > MAX_PROBE_WIDTH {
            return Err(invalid("b", format!("width {} exceeds {MAX_PROBE_WIDTH}", self.b.width)));
        }
        if let Some(m) = &self.monitored {
            if m.x0 > m.x1 || m.x1 >= l || m.t0 > m.t1 || m.t1 > self.t {
                return Err(invalid("monitored", "rectangle must satisfy x0 ≤ x1 < L and t0 ≤ t1 ≤ T"));
            }
        }
        if let GateSource::Fixed(i) = self.gates {
            if i as usize >= gates::TWO_QUBIT_CLIFFORDS {
                return Err(invalid("gates", format!("fixed gate index {i} out of range")));
            }
        }
        Ok(())
    }

    /// Total qubits including the `2·width(B)` ancillas.
    pub fn num_qubits(&self) -> usize {
        self.l + 2 * self.b.width
    }

    pub fn with_probe(&self, x: usize, t: usize) -> Self {
        let mut s = self.clone();
        s.b.x = x;
        s.b.t = t;
        s
    }

    /// Draw gates, measurement locations and the POVM Clifford.
    pub fn realize<R: Rng + ?Sized>(&self, rng: &mut R) -> CircuitInstance {
        let mut layers = Vec::with_capacity(self.t);
        let mut measured = Vec::with_capacity(self.t);
        for step in 1..=self.t {
            let bonds = brickwork_bonds(self.l, step, self.boundary.spatial);
            let layer = bonds
                .into_iter()
                .map(|(a, b)| {
                    let src = match &self.monitored {
                        Some(m) if a + 1 == b && m.contains_gate(a, step) => m.gates,
                        _ => self.gates,
                    };
                    Brick { a: a as u16, b: b as u16, gate: src.sample(rng) }
                })
                .collect();
            layers.push(layer);
            let m: Vec<u16> = if self.p <= 0.0 {
                Vec::new()
            } else {
                (0..self.l).filter(|_| rng.random::<f64>() < self.p).map(|x| x as u16).collect()
            };
            measured.push(m);
        }
        let u_b = self.draw_povm(rng);
        CircuitInstance { spec: self.clone(), layers, measured, u_b }
    }

    pub fn draw_povm<R: Rng + ?Sized>(&self, rng: &mut R) -> PovmGate {
        if self.b.width == 1 {
            PovmGate::Table(gates::random_two_qubit_index(rng))
        } else {
            PovmGate::General(gates::random_clifford(2 * self.b.width, rng))
        }
    }
}

/// Bonds of step `step ≥ 1`: `(i, i+1)` with `i ≡ step − 1 (mod 2)`, plus the
/// wrap-around bond `(L−1, 0)` on odd-offset steps under periodic boundaries.
pub fn brickwork_bonds(l: usize, step: usize, spatial: Spatial) -> Vec<(usize, usize)> {
    let off = (step + 1) % 2;
    let mut out: Vec<(usize, usize)> = (off..l.saturating_sub(1)).step_by(2).map(|i| (i, i + 1)).collect();
    if spatial == Spatial::Periodic && off == 1 && l >= 2 {
        out.push((l - 1, 0));
    }
    out
}

/// Sites untouched by the layer of `step`.
pub fn idle_sites(l: usize, step: usize, spatial: Spatial) -> Vec<usize> {
    let mut busy = vec![false; l];
    for (a, b) in brickwork_bonds(l, step, spatial) {
        busy[a] = true;
        busy[b] = true;
    }
    (0..l).filter(|&x| !busy[x]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Brick {
    pub a: u16,
    pub b: u16,
    /// Index into [`gates::two_qubit_table`].
    pub gate: u16,
}

/// The random Clifford of the probe POVM.
#[derive(Clone, Debug, PartialEq)]
pub enum PovmGate {
    Table(u16),
    General(CliffordGate),
}

impl PovmGate {
    pub fn gate(&self) -> &CliffordGate {
        match self {
            PovmGate::Table(i) => gates::two_qubit(*i),
            PovmGate::General(g) => g,
        }
    }
}

/// One elementary step of a realized circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Op {
    Gate { a: usize, b: usize, gate: u16 },
    /// Swap with a maximally mixed environment qubit.
    Reset(usize),
    /// Trajectory measurement (part of m) at `(site, step)`.
    Measure { site: usize, step: usize },
    /// Enforced postselection onto |0⟩.
    Postselect(usize),
    /// Complete depolarization of region A.
    Depolarize,
    /// Swap region B into the ancilla Bell pairs.
    Probe,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    M,
    F,
    B,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitInstance {
    pub spec: CircuitSpec,
    pub layers: Vec<Vec<Brick>>,
    /// Sites measured after the layer of step `s` are `measured[s − 1]`.
    pub measured: Vec<Vec<u16>>,
    pub u_b: PovmGate,
}

impl CircuitInstance {
    pub fn num_qubits(&self) -> usize {
        self.spec.num_qubits()
    }

    pub fn a_sites(&self) -> Vec<usize> {
        self.spec.a.sites(self.spec.l)
    }

    pub fn b_sites(&self) -> Vec<usize> {
        self.spec.b.sites(self.spec.l)
    }

    pub fn ancillas(&self) -> Vec<usize> {
        (self.spec.l..self.num_qubits()).collect()
    }

    /// Trajectory measurements, including those of the monitored region.
    pub fn num_measurements(&self) -> usize {
        self.schedule().iter().filter(|o| matches!(o, Op::Measure { .. })).count()
    }

    /// Initial state on all qubits: system per the boundary, ancillas as Bell pairs.
    pub fn initial_generators(&self) -> Vec<PauliOperator> {
        let n = self.num_qubits();
        let l = self.spec.l;
        let mut gens = Vec::new();
        match &self.spec.boundary.initial_generators {
            Some(g) => {
                for p in g {
                    let mut q = PauliOperator::identity(n);
                    for s in 0..l {
                        q.set(s, p.get(s));
                    }
                    q.set_negative(p.is_negative());
                    gens.push(q);
                }
            }
            None => {
                for (x, &c) in self.spec.boundary.initial.0.iter().enumerate() {
                    if c == InitialQubit::Zero {
                        gens.push(PauliOperator::single(n, x, crate::pauli::Pauli1::Z));
                    }
                }
            }
        }
        for j in 0..self.spec.b.width {
            let (u, v) = (l + 2 * j, l + 2 * j + 1);
            for p in [crate::pauli::Pauli1::X, crate::pauli::Pauli1::Z] {
                let mut q = PauliOperator::identity(n);
                q.set(u, p);
                q.set(v, p);
                gens.push(q);
            }
        }
        gens
    }

    /// Elementary operations in time order. The probe's Clifford and ancilla
    /// measurements are not listed: they commute with everything after the
    /// probe swap and are applied at the end.
    pub fn schedule(&self) -> Vec<Op> {
        let s = &self.spec;
        let mut ops = Vec::new();
        for t in 0..=s.t {
            if t >= 1 {
                for br in &self.layers[t - 1] {
                    ops.push(Op::Gate { a: br.a as usize, b: br.b as usize, gate: br.gate });
                }
                if s.edge_reset {
                    for x in idle_sites(s.l, t, s.boundary.spatial) {
                        if x == 0 || x + 1 == s.l {
                            ops.push(Op::Reset(x));
                        }
                    }
                }
                for &x in &self.measured[t - 1] {
                    ops.push(Op::Measure { site: x as usize, step: t });
                }
            }
            if let Some(m) = &s.monitored {
                for x in 0..s.l {
                    let done = t >= 1 && self.measured[t - 1].contains(&(x as u16));
                    if m.contains(x, t) && !done {
                        ops.push(Op::Measure { site: x, step: t });
                    }
                }
            }
            if t == s.a.t {
                ops.push(Op::Depolarize);
            }
            if t == s.b.t {
                ops.push(Op::Probe);
            }
            if t == s.t {
                for (x, &f) in s.boundary.final_state.0.iter().enumerate() {
                    if f == FinalQubit::Postselect {
                        ops.push(Op::Postselect(x));
                    }
                }
            }
        }
        ops
    }

    /// The schedule with trailing operations dropped when nothing after them
    /// can change the joint outcome distribution: once A and B are both past
    /// and no measurement or postselection remains, the rest only acts on the
    /// system after the ancillas have decoupled.
    pub fn pruned_schedule(&self) -> Vec<Op> {
        let mut ops = self.schedule();
        let last_event = ops.iter().rposition(|o| matches!(o, Op::Measure { .. } | Op::Postselect(_)));
        let dep = ops.iter().position(|o| *o == Op::Depolarize);
        let probe = ops.iter().position(|o| *o == Op::Probe);
        let keep = [last_event, dep, probe].into_iter().flatten().max().map_or(0, |i| i + 1);
        ops.truncate(keep);
        ops
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn presets_validate() {
        for name in PRESETS {
            let s = CircuitSpec::preset(name, 12, 12).unwrap();
            s.validate().unwrap();
        }
        assert!(CircuitSpec::preset("nope", 4, 4).is_err());
    }

    #[test]
    fn brickwork_covers_each_bond_once_per_period() {
        for spatial in [Spatial::Open, Spatial::Periodic] {
            for l in [2usize, 4, 6, 8] {
                let mut count = std::collections::HashMap::new();
                for step in [1, 2] {
                    for (a, b) in brickwork_bonds(l, step, spatial) {
                        *count.entry((a.min(b), a.max(b), a)).or_insert(0) += 1;
                    }
                }
                let want = if spatial == Spatial::Periodic { l } else { l - 1 };
                assert_eq!(count.len(), want, "L={l} {spatial:?}");
                assert!(count.values().all(|&c| c == 1));
            }
        }
    }

    #[test]
    fn measurement_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut s = CircuitSpec::preset("clifford-pure", 6, 5).unwrap();
        assert_eq!(s.realize(&mut rng).num_measurements(), 0);
        s.p = 1.0;
        assert_eq!(s.realize(&mut rng).num_measurements(), 30);
    }

    #[test]
    fn realize_is_deterministic() {
        let s = CircuitSpec::preset("hybrid-mipt", 8, 8).unwrap();
        let a = s.realize(&mut ChaCha8Rng::seed_from_u64(11));
        let b = s.realize(&mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a, b);
    }

    #[test]
    fn pattern_roundtrip() {
        let p: Pattern<InitialQubit> = "00mm0".parse().unwrap();
        assert_eq!(p.to_string(), "00mm0");
        assert!("0x".parse::<Pattern<InitialQubit>>().is_err());
    }

    #[test]
    fn schedule_orders_a_before_b() {
        let mut s = CircuitSpec::preset("clifford-pure", 4, 4).unwrap();
        s.b.t = s.a.t;
        let inst = s.realize(&mut ChaCha8Rng::seed_from_u64(0));
        let ops = inst.schedule();
        let a = ops.iter().position(|o| *o == Op::Depolarize).unwrap();
        let b = ops.iter().position(|o| *o == Op::Probe).unwrap();
        assert!(a < b);
    }
}
