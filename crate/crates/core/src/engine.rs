//! XEQCI trials, estimators and landscape scans.
//!
//! Three routes compute the same quantity:
//!
//! * the literal route replays the protocol: a quantum pass samples `(m, b)`
//!   with A depolarized, an oracle pass postselects them on the unperturbed
//!   circuit, and infeasible trajectories restart;
//! * the conditioned route tracks every outcome as an affine function of
//!   earlier random outcomes. The perturbed pass gives the affine space `Q`
//!   of feasible `(m, b)`, the unperturbed pass gives `O`. Restarts condition
//!   on `m ∈ proj_m(O)`, so a trial is a uniform point of
//!   `S = Q ∩ (proj_m(O) × anything)` and `c = [x ∈ O]`. The per-instance
//!   value is `χ_C = |Q ∩ O| / |S|`;
//! * exhaustive enumeration branches over every measurement outcome and every
//!   two-qubit POVM Clifford.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{CircuitInstance, CircuitSpec, Op, SpecError};
use crate::gates::{self, CliffordGate, TWO_QUBIT_CLIFFORDS};
use crate::gf2::{row_words, AffineSystem};
use crate::pauli::PauliOperator;
use crate::state::{Fresh, StabilizerState, ZKind};

/// Retries of one instance on the literal route before a fresh instance is drawn.
pub const LITERAL_RETRIES: usize = 256;
/// Abort once restarts exceed this multiple of the trial count.
pub const LIVELOCK_FACTOR: u64 = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("restart livelock: {restarts} restarts for {trials} trials")]
    Livelock { restarts: u64, trials: u64 },
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("exhaustive enumeration needs a single-site probe")]
    WideProbe,
}

/// Signal to discard the current trial and restart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Restart;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    /// `(site, step, outcome)` of every trajectory measurement.
    pub m: Vec<(usize, usize, bool)>,
    /// Ancilla outcomes of the probe POVM.
    pub b: Vec<bool>,
    /// `k` with `Pr(b | m, 1) ∈ {0, 2^-k}`; filled in by the oracle pass.
    pub born_weight_class: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialResult {
    pub c: bool,
    /// Restarts spent before this trial succeeded.
    pub discarded: u64,
    pub trajectory: TrajectoryRecord,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Uniform sampling from the conditioned outcome space (default).
    #[default]
    Conditioned,
    /// Quantum pass plus oracle pass with restart-by-rejection.
    Literal,
    /// Exact `χ_C` per sampled instance instead of a Bernoulli `c`.
    InstanceExact,
}

/// Per-trial RNG: stream = point, word position = trial.
pub fn trial_rng(seed: u64, point: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(point);
    rng.set_word_pos((trial as u128) << 36);
    rng
}

fn initial_state(inst: &CircuitInstance, nvars: usize) -> StabilizerState {
    let n = inst.num_qubits();
    let gens = inst.initial_generators();
    StabilizerState::from_generators_symbolic(n, nvars, &gens).expect("validated initial state")
}

fn swap_gate() -> &'static CliffordGate {
    static SWAP: OnceLock<u16> = OnceLock::new();
    gates::two_qubit(*SWAP.get_or_init(|| CliffordGate::swap().table_index().unwrap()))
}

fn apply_probe(st: &mut StabilizerState, inst: &CircuitInstance) {
    let l = inst.spec.l;
    for (j, x) in inst.b_sites().into_iter().enumerate() {
        st.apply_gate_unchecked(swap_gate(), &[x, l + 2 * j]);
    }
}

// ---------------------------------------------------------------------------
// Literal route

/// Forward simulation with A depolarized; samples `m` and `b` by the Born
/// rule. Enforced postselections that fail signal a restart.
pub fn quantum_pass<R: Rng + ?Sized>(inst: &CircuitInstance, rng: &mut R) -> Result<TrajectoryRecord, Restart> {
    let mut st = initial_state(inst, 0);
    let mut m = Vec::with_capacity(inst.num_measurements());
    let a_sites = inst.a_sites();
    for op in inst.schedule() {
        match op {
            Op::Gate { a, b, gate } => st.apply_gate_unchecked(gates::two_qubit(gate), &[a, b]),
            Op::Reset(x) => st.depolarize_unchecked(&[x]),
            Op::Measure { site, step } => {
                let (o, _) = st.measure_z(site, rng).expect("site in range");
                m.push((site, step, o));
            }
            Op::Postselect(x) => {
                let (o, _) = st.measure_z(x, rng).expect("site in range");
                if o {
                    return Err(Restart);
                }
            }
            Op::Depolarize => st.depolarize_unchecked(&a_sites),
            Op::Probe => apply_probe(&mut st, inst),
        }
    }
    let anc = inst.ancillas();
    st.apply_gate_unchecked(inst.u_b.gate(), &anc);
    let b = anc.iter().map(|&q| st.measure_z(q, rng).expect("ancilla in range").0).collect();
    Ok(TrajectoryRecord { m, b, born_weight_class: None })
}

/// Unperturbed simulation postselected on the recorded `m` and then on `b`.
/// Returns `c` and the Born weight class `k`.
pub fn oracle_pass(inst: &CircuitInstance, traj: &TrajectoryRecord) -> Result<(bool, usize), Restart> {
    let mut st = initial_state(inst, 0);
    let mut mi = traj.m.iter();
    for op in inst.schedule() {
        match op {
            Op::Gate { a, b, gate } => st.apply_gate_unchecked(gates::two_qubit(gate), &[a, b]),
            Op::Reset(x) => st.depolarize_unchecked(&[x]),
            Op::Measure { site, .. } => {
                let &(_, _, o) = mi.next().expect("trajectory matches instance");
                if !st.postselect_z(site, o).expect("site in range") {
                    return Err(Restart);
                }
            }
            Op::Postselect(x) => {
                if !st.postselect_z(x, false).expect("site in range") {
                    return Err(Restart);
                }
            }
            Op::Depolarize => {}
            Op::Probe => apply_probe(&mut st, inst),
        }
    }
    let anc = inst.ancillas();
    st.apply_gate_unchecked(inst.u_b.gate(), &anc);
    let k = st.z_support_dimension(&anc).expect("ancillas in range");
    let mut c = true;
    for (&q, &o) in anc.iter().zip(&traj.b) {
        if !st.postselect_z(q, o).expect("ancilla in range") {
            c = false;
            break;
        }
    }
    Ok((c, k))
}

/// One literal trial: draws instances and retries until both passes succeed.
pub fn literal_trial<R: Rng + ?Sized>(spec: &CircuitSpec, rng: &mut R, max_restarts: u64) -> Result<TrialResult, EngineError> {
    let mut restarts = 0u64;
    loop {
        let inst = spec.realize(rng);
        for _ in 0..LITERAL_RETRIES {
            let attempt = quantum_pass(&inst, rng).and_then(|mut traj| {
                let (c, k) = oracle_pass(&inst, &traj)?;
                traj.born_weight_class = Some(k);
                Ok((c, traj))
            });
            match attempt {
                Ok((c, trajectory)) => return Ok(TrialResult { c, discarded: restarts, trajectory }),
                Err(Restart) => {
                    restarts += 1;
                    if restarts > max_restarts {
                        return Err(EngineError::Livelock { restarts, trials: 1 });
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Conditioned route

/// Outcome coordinates: trajectory measurements first, then ancilla bits.
#[derive(Clone, Debug)]
struct Events {
    m: Vec<(usize, usize)>,
    nb: usize,
}

impl Events {
    fn of(ops: &[Op], nb: usize) -> Self {
        let m = ops
            .iter()
            .filter_map(|o| match *o {
                Op::Measure { site, step } => Some((site, step)),
                _ => None,
            })
            .collect();
        Events { m, nb }
    }

    fn coords(&self) -> usize {
        self.m.len() + self.nb
    }

    fn b_cols(&self) -> Vec<usize> {
        (self.m.len()..self.coords()).collect()
    }
}

struct SymPass {
    st: StabilizerState,
    sys: AffineSystem,
    next_m: usize,
    expr: Vec<u64>,
}

impl SymPass {
    fn new(inst: &CircuitInstance, ev: &Events) -> Self {
        let e = ev.coords();
        SymPass {
            st: initial_state(inst, e),
            sys: AffineSystem::with_priority(e, &ev.b_cols()),
            next_m: 0,
            expr: vec![0; row_words(e)],
        }
    }

    /// Z measurement recorded as coordinate `j`.
    fn event(&mut self, site: usize, j: usize) {
        if self.st.measure_z_kernel(site, Fresh::Var(j), &mut self.expr) == ZKind::Determined {
            let k = j + 1;
            self.expr[k >> 6] ^= 1 << (k & 63);
            self.sys.add(&self.expr);
        }
    }

    fn postselect(&mut self, site: usize) {
        if self.st.measure_z_kernel(site, Fresh::Bit(false), &mut self.expr) == ZKind::Determined {
            self.sys.add(&self.expr);
        }
    }

    fn run(&mut self, inst: &CircuitInstance, ops: &[Op], a_sites: &[usize], perturbed: bool) {
        for op in ops {
            match *op {
                Op::Gate { a, b, gate } => self.st.apply_gate_unchecked(gates::two_qubit(gate), &[a, b]),
                Op::Reset(x) => self.st.depolarize_unchecked(&[x]),
                Op::Measure { site, .. } => {
                    let j = self.next_m;
                    self.next_m += 1;
                    self.event(site, j);
                }
                Op::Postselect(x) => self.postselect(x),
                Op::Depolarize => {
                    if perturbed {
                        self.st.depolarize_unchecked(a_sites)
                    }
                }
                Op::Probe => apply_probe(&mut self.st, inst),
            }
        }
    }

    fn finish(&mut self, u_b: &CliffordGate, anc: &[usize], first_b: usize) {
        self.st.apply_gate_unchecked(u_b, anc);
        for (k, &q) in anc.iter().enumerate() {
            self.event(q, first_b + k);
        }
    }
}

/// Affine outcome spaces of one instance.
#[derive(Clone, Debug)]
pub struct InstanceAnalysis {
    /// Feasible `(m, b)` with A depolarized and enforced postselections met.
    pub q: AffineSystem,
    /// Same for the unperturbed circuit.
    pub o: AffineSystem,
    /// Conditioned sampling space; `None` when no feasible `m` survives.
    pub s: Option<AffineSystem>,
    m_events: Vec<(usize, usize)>,
}

impl InstanceAnalysis {
    fn new(q: AffineSystem, o: AffineSystem, m_events: &[(usize, usize)]) -> Self {
        let mut s = q.clone();
        if q.is_consistent() && o.is_consistent() {
            for r in o.projection_rows() {
                s.add(r);
            }
        }
        let ok = q.is_consistent() && o.is_consistent() && s.is_consistent();
        InstanceAnalysis { q, o, s: ok.then_some(s), m_events: m_events.to_vec() }
    }

    /// Exact `χ_C` for this instance and POVM Clifford; `None` if undefined.
    pub fn chi(&self) -> Option<f64> {
        let s = self.s.as_ref()?;
        let mut qo = self.q.clone();
        qo.extend(&self.o);
        if !qo.is_consistent() {
            return Some(0.0);
        }
        let e = qo.rank() as i32 - s.rank() as i32;
        debug_assert!(e >= 0);
        Some((-e as f64).exp2())
    }

    /// Born weight class `k` of the unperturbed `b` given any feasible `m`.
    pub fn born_weight_class(&self) -> usize {
        self.o.priority_rank()
    }

    /// One conditioned trial: uniform `x ∈ S`, `c = [x ∈ O]`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<(bool, TrajectoryRecord)> {
        let s = self.s.as_ref()?;
        let x = s.sample(rng)?;
        let c = self.o.contains(&x);
        let bit = |j: usize| (x[(j + 1) >> 6] >> ((j + 1) & 63)) & 1 == 1;
        let num_m = self.m_events.len();
        let m = self.m_events.iter().enumerate().map(|(j, &(site, step))| (site, step, bit(j))).collect();
        let b = (num_m..self.q.coords()).map(bit).collect();
        Some((c, TrajectoryRecord { m, b, born_weight_class: Some(self.born_weight_class()) }))
    }
}

/// Symbolic simulation of both passes, sharing everything before A.
pub fn analyze(inst: &CircuitInstance) -> InstanceAnalysis {
    let ops = inst.pruned_schedule();
    let anc = inst.ancillas();
    let ev = Events::of(&ops, anc.len());
    let a_sites = inst.a_sites();
    let split = ops.iter().position(|o| *o == Op::Depolarize).unwrap_or(ops.len());
    let mut one = SymPass::new(inst, &ev);
    one.run(inst, &ops[..split], &a_sites, false);
    let mut dep = SymPass { st: one.st.clone(), sys: one.sys.clone(), next_m: one.next_m, expr: one.expr.clone() };
    dep.run(inst, &ops[split..], &a_sites, true);
    one.run(inst, &ops[split..], &a_sites, false);
    let u_b = inst.u_b.gate();
    dep.finish(u_b, &anc, ev.m.len());
    one.finish(u_b, &anc, ev.m.len());
    InstanceAnalysis::new(dep.sys, one.sys, &ev.m)
}

/// Exact `χ_C` averaged over all 11,520 two-qubit POVM Cliffords (single-site
/// probe). Everything up to the POVM is simulated once. `None` if undefined.
pub fn instance_chi_all_povm(inst: &CircuitInstance) -> Result<Option<f64>, EngineError> {
    if inst.spec.b.width != 1 {
        return Err(EngineError::WideProbe);
    }
    let ops = inst.pruned_schedule();
    let anc = inst.ancillas();
    let ev = Events::of(&ops, anc.len());
    let a_sites = inst.a_sites();
    let mut one = SymPass::new(inst, &ev);
    let mut dep = SymPass::new(inst, &ev);
    one.run(inst, &ops, &a_sites, false);
    dep.run(inst, &ops, &a_sites, true);
    let mut total = 0.0;
    for g in gates::two_qubit_table() {
        let mut d = SymPass { st: dep.st.clone(), sys: dep.sys.clone(), next_m: 0, expr: dep.expr.clone() };
        let mut o = SymPass { st: one.st.clone(), sys: one.sys.clone(), next_m: 0, expr: one.expr.clone() };
        d.finish(g, &anc, ev.m.len());
        o.finish(g, &anc, ev.m.len());
        match InstanceAnalysis::new(d.sys, o.sys, &ev.m).chi() {
            Some(v) => total += v,
            None => return Ok(None),
        }
    }
    Ok(Some(total / TWO_QUBIT_CLIFFORDS as f64))
}

impl SymPass {
    fn fork(&self) -> SymPass {
        SymPass { st: self.st.clone(), sys: self.sys.clone(), next_m: self.next_m, expr: self.expr.clone() }
    }
}

/// Analyses of one instance for a single-site probe at `x_b` and every
/// `t_B = 0..=T`, reusing the simulated prefix between probe times.
pub fn analyses_over_time(inst: &CircuitInstance, x_b: usize) -> Result<Vec<InstanceAnalysis>, EngineError> {
    if inst.spec.b.width != 1 {
        return Err(EngineError::WideProbe);
    }
    let tt = inst.spec.t;
    let mut probe_less = inst.clone();
    probe_less.spec.b = crate::circuit::Region { x: x_b, width: 1, t: tt + 1 };
    let ops = probe_less.schedule();
    let cuts: Vec<usize> = (0..=tt)
        .map(|t| {
            let mut s = inst.clone();
            s.spec.b = crate::circuit::Region { x: x_b, width: 1, t };
            s.schedule().iter().position(|o| *o == Op::Probe).expect("probe scheduled")
        })
        .collect();
    let mut probed = inst.clone();
    probed.spec.b.x = x_b;
    let anc = probed.ancillas();
    let ev = Events::of(&ops, anc.len());
    let a_sites = inst.a_sites();
    let split = ops.iter().position(|o| *o == Op::Depolarize).unwrap_or(ops.len());
    let last_event = ops
        .iter()
        .rposition(|o| matches!(o, Op::Measure { .. } | Op::Postselect(_)))
        .map_or(0, |i| i + 1);
    let u_b = inst.u_b.gate();

    let finish = |mut d: SymPass, mut o: SymPass, from: usize| {
        let to = last_event.max(from);
        apply_probe(&mut d.st, &probed);
        apply_probe(&mut o.st, &probed);
        d.run(&probed, &ops[from..to], &a_sites, true);
        o.run(&probed, &ops[from..to], &a_sites, false);
        d.finish(u_b, &anc, ev.m.len());
        o.finish(u_b, &anc, ev.m.len());
        InstanceAnalysis::new(d.sys, o.sys, &ev.m)
    };

    // unperturbed snapshots at every cut, perturbed ones at cuts past A
    let mut one = SymPass::new(&probed, &ev);
    let mut snaps_one = Vec::with_capacity(cuts.len());
    let mut pos = 0;
    let mut dep_start = None;
    for &c in &cuts {
        if pos < split && c > split {
            one.run(&probed, &ops[pos..split], &a_sites, false);
            pos = split;
            dep_start = Some(one.fork());
        }
        one.run(&probed, &ops[pos..c], &a_sites, false);
        pos = c;
        snaps_one.push(one.fork());
    }
    let mut dep = dep_start;
    let mut dep_pos = split;
    let mut out = Vec::with_capacity(cuts.len());
    for (t, &c) in cuts.iter().enumerate() {
        let o = snaps_one[t].fork();
        let v = if c <= split {
            finish(o.fork(), o, c)
        } else {
            let d = dep.as_mut().expect("perturbed pass started");
            d.run(&probed, &ops[dep_pos..c], &a_sites, true);
            dep_pos = c;
            finish(d.fork(), o, c)
        };
        out.push(v);
    }
    Ok(out)
}

/// Exact `χ_C` of one instance for a single-site probe at `x_b` and every
/// `t_B = 0..=T`. `None` if undefined at any time.
pub fn instance_chi_over_time(inst: &CircuitInstance, x_b: usize) -> Result<Option<Vec<f64>>, EngineError> {
    Ok(analyses_over_time(inst, x_b)?.iter().map(InstanceAnalysis::chi).collect())
}

pub fn conditioned_trial<R: Rng + ?Sized>(spec: &CircuitSpec, rng: &mut R, max_restarts: u64) -> Result<TrialResult, EngineError> {
    let mut restarts = 0u64;
    loop {
        let inst = spec.realize(rng);
        let an = analyze(&inst);
        if let Some((c, trajectory)) = an.sample(rng) {
            return Ok(TrialResult { c, discarded: restarts, trajectory });
        }
        restarts += 1;
        if restarts > max_restarts {
            return Err(EngineError::Livelock { restarts, trials: 1 });
        }
    }
}

/// Exact `χ_C` of one freshly drawn instance (and POVM Clifford).
pub fn instance_exact_trial<R: Rng + ?Sized>(spec: &CircuitSpec, rng: &mut R, max_restarts: u64) -> Result<(f64, u64), EngineError> {
    let mut restarts = 0u64;
    loop {
        let inst = spec.realize(rng);
        if let Some(v) = analyze(&inst).chi() {
            return Ok((v, restarts));
        }
        restarts += 1;
        if restarts > max_restarts {
            return Err(EngineError::Livelock { restarts, trials: 1 });
        }
    }
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration by stabilizer branching

/// Canonical form of a stabilizer group: every signed element, sorted.
fn group_elements(st: &StabilizerState) -> Vec<PauliOperator> {
    let gens = st.generators();
    let n = st.num_qubits();
    let mut out = Vec::with_capacity(1 << gens.len());
    for mask in 0u32..(1 << gens.len()) {
        let mut p = PauliOperator::identity(n);
        for (i, g) in gens.iter().enumerate() {
            if (mask >> i) & 1 == 1 {
                p = p.try_mul(g).expect("group elements commute");
            }
        }
        out.push(p);
    }
    out.sort_by_key(|p| p.to_string());
    out
}

/// Z-basis distribution of a state given by all its group elements, after
/// conjugation by `g`: `P(b) = 2^-n Σ_{Z-type s} sign(s) (-1)^{b·z(s)}`.
fn z_distribution(elements: &[PauliOperator], g: &CliffordGate) -> Vec<f64> {
    let n = g.arity();
    let mut p = vec![0.0; 1 << n];
    for e in elements {
        let img = g.conjugate(e);
        if !img.is_z_type() {
            continue;
        }
        let z = img.z_words()[0];
        let s = img.sign() as f64;
        for (b, pb) in p.iter_mut().enumerate() {
            let par = (z & b as u64).count_ones() & 1;
            *pb += if par == 1 { -s } else { s };
        }
    }
    let norm = (1u64 << n) as f64;
    p.iter_mut().for_each(|v| *v /= norm);
    p
}

struct Branch {
    wd: f64,
    sd: StabilizerState,
    s1: StabilizerState,
}

/// Exact `χ̄_C` for a fixed instance by branching over every trajectory
/// measurement outcome and averaging over all two-qubit POVM Cliffords.
/// The instance's own `u_b` is ignored. `None` if no `m` is feasible.
pub fn enumerate_chi(inst: &CircuitInstance) -> Result<Option<f64>, EngineError> {
    if inst.spec.b.width != 1 {
        return Err(EngineError::WideProbe);
    }
    let st0 = initial_state(inst, 0);
    let a_sites = inst.a_sites();
    let mut branches = vec![Branch { wd: 1.0, sd: st0.clone(), s1: st0 }];
    for op in inst.schedule() {
        match op {
            Op::Gate { a, b, gate } => {
                for br in &mut branches {
                    br.sd.apply_gate_unchecked(gates::two_qubit(gate), &[a, b]);
                    br.s1.apply_gate_unchecked(gates::two_qubit(gate), &[a, b]);
                }
            }
            Op::Reset(x) => {
                for br in &mut branches {
                    br.sd.depolarize_unchecked(&[x]);
                    br.s1.depolarize_unchecked(&[x]);
                }
            }
            Op::Depolarize => {
                for br in &mut branches {
                    br.sd.depolarize_unchecked(&a_sites);
                }
            }
            Op::Probe => {
                for br in &mut branches {
                    apply_probe(&mut br.sd, inst);
                    apply_probe(&mut br.s1, inst);
                }
            }
            Op::Measure { site, .. } | Op::Postselect(site) => {
                let outcomes: &[bool] = if matches!(op, Op::Postselect(_)) { &[false] } else { &[false, true] };
                let mut next = Vec::with_capacity(branches.len() * outcomes.len());
                for br in branches {
                    for &o in outcomes {
                        let pd = br.sd.z_probability(site, o).unwrap();
                        let p1 = br.s1.z_probability(site, o).unwrap();
                        if pd == 0.0 || p1 == 0.0 {
                            continue;
                        }
                        let (mut sd, mut s1) = (br.sd.clone(), br.s1.clone());
                        sd.postselect_z(site, o).unwrap();
                        s1.postselect_z(site, o).unwrap();
                        next.push(Branch { wd: br.wd * pd, sd, s1 });
                    }
                }
                branches = next;
            }
        }
    }
    if branches.is_empty() {
        return Ok(None);
    }
    let anc = inst.ancillas();
    // Merge leaves with identical ancilla marginals.
    let mut leaves: HashMap<(Vec<PauliOperator>, Vec<PauliOperator>), f64> = HashMap::new();
    let mut norm = 0.0;
    for br in &branches {
        let key = (
            group_elements(&br.sd.reduced(&anc).unwrap()),
            group_elements(&br.s1.reduced(&anc).unwrap()),
        );
        *leaves.entry(key).or_insert(0.0) += br.wd;
        norm += br.wd;
    }
    let mut leaves: Vec<_> = leaves.into_iter().collect();
    leaves.sort_by(|a, b| format!("{:?}", a.0).cmp(&format!("{:?}", b.0)));
    let total: f64 = gates::two_qubit_table()
        .par_iter()
        .map(|g| {
            let mut acc = 0.0;
            for ((ed, e1), w) in &leaves {
                let pd = z_distribution(ed, g);
                let p1 = z_distribution(e1, g);
                let s2: f64 = p1.iter().map(|v| v * v).sum();
                let cross: f64 = pd.iter().zip(&p1).map(|(a, b)| a * b).sum();
                acc += w * cross / s2;
            }
            acc
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .sum();
    Ok(Some(total / (norm * TWO_QUBIT_CLIFFORDS as f64)))
}

// ---------------------------------------------------------------------------
// Estimators

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
    pub restarts: u64,
}

/// `−log₂ max(mean, 1/(10·trials))`.
pub fn neg_log2_clipped(mean: f64, trials: u64) -> f64 {
    let eps = 1.0 / (10.0 * trials as f64);
    0.0 - mean.max(eps).log2()
}

/// Average of `c` (or exact `χ_C`) over `trials` trials of one grid point.
pub fn estimate_point(spec: &CircuitSpec, trials: u64, seed: u64, point: u64, method: Method) -> Result<Estimate, EngineError> {
    spec.validate()?;
    if trials == 0 {
        return Err(EngineError::NoTrials);
    }
    let cap = LIVELOCK_FACTOR * trials;
    let results: Vec<Result<(f64, u64), EngineError>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, point, i);
            match method {
                Method::Conditioned => conditioned_trial(spec, &mut rng, cap).map(|r| (r.c as u8 as f64, r.discarded)),
                Method::Literal => literal_trial(spec, &mut rng, cap).map(|r| (r.c as u8 as f64, r.discarded)),
                Method::InstanceExact => instance_exact_trial(spec, &mut rng, cap),
            }
        })
        .collect();
    let mut values = Vec::with_capacity(trials as usize);
    let mut restarts = 0u64;
    for r in results {
        let (v, d) = r.map_err(|e| match e {
            EngineError::Livelock { restarts, .. } => EngineError::Livelock { restarts, trials },
            e => e,
        })?;
        values.push(v);
        restarts += d;
    }
    if restarts > cap {
        return Err(EngineError::Livelock { restarts, trials });
    }
    let n = trials as f64;
    let mean = values.iter().sum::<f64>() / n;
    let stderr = match method {
        Method::InstanceExact if trials > 1 => {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        }
        Method::InstanceExact => 0.0,
        _ => (mean * (1.0 - mean) / n).max(0.0).sqrt(),
    };
    Ok(Estimate { mean, stderr, trials, restarts })
}

/// `χ̄` for `spec` as given (A and B at their configured positions).
pub fn estimate_chi(spec: &CircuitSpec, trials: u64, seed: u64, method: Method) -> Result<Estimate, EngineError> {
    estimate_point(spec, trials, seed, 0, method)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub x_b: usize,
    pub t_b: usize,
    pub mean_c: f64,
    pub stderr: f64,
    pub trials: u64,
    pub neg_log2_chi: f64,
    pub restarts: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeGrid {
    pub spec: CircuitSpec,
    pub method: Method,
    pub trials_per_point: u64,
    pub seed: u64,
    pub xs: Vec<usize>,
    pub ts: Vec<usize>,
    /// Row-major in `(t_b, x_b)`; the RNG stream of a point is its index.
    pub points: Vec<GridPoint>,
}

impl LandscapeGrid {
    pub fn get(&self, x_b: usize, t_b: usize) -> Option<&GridPoint> {
        self.points.iter().find(|p| p.x_b == x_b && p.t_b == t_b)
    }
}

/// Stream reserved for instance draws in shared scans.
const INSTANCE_STREAM: u64 = u64::MAX;
const CHUNK: u64 = 64;

/// Scan a single-site probe over `xs × ts`. `progress` is called with
/// `(done, total)` work units.
///
/// `Conditioned` and `InstanceExact` scans draw one instance per trial and
/// reuse it at every grid point (each point still averages over `trials`
/// independent instances). A point where the shared instance is undefined
/// falls back to a private redraw. `Literal` scans run each point on its own.
pub fn scan_landscape(
    spec: &CircuitSpec,
    xs: &[usize],
    ts: &[usize],
    trials: u64,
    seed: u64,
    method: Method,
    progress: Option<&(dyn Fn(usize, usize) + Sync)>,
) -> Result<LandscapeGrid, EngineError> {
    let mut base = spec.clone();
    base.b.width = 1;
    base.validate()?;
    if trials == 0 {
        return Err(EngineError::NoTrials);
    }
    let coords: Vec<(usize, usize)> = ts.iter().flat_map(|&t| xs.iter().map(move |&x| (x, t))).collect();
    for &(x, t) in &coords {
        base.with_probe(x, t).validate()?;
    }
    let estimates = match method {
        Method::Literal => literal_scan(&base, &coords, trials, seed, progress)?,
        _ => shared_scan(&base, xs, ts, trials, seed, method, progress)?,
    };
    let points = coords
        .iter()
        .zip(estimates)
        .map(|(&(x, t), e)| GridPoint {
            x_b: x,
            t_b: t,
            mean_c: e.mean,
            stderr: e.stderr,
            trials: e.trials,
            neg_log2_chi: neg_log2_clipped(e.mean, e.trials),
            restarts: e.restarts,
        })
        .collect();
    Ok(LandscapeGrid {
        spec: base,
        method,
        trials_per_point: trials,
        seed,
        xs: xs.to_vec(),
        ts: ts.to_vec(),
        points,
    })
}

fn literal_scan(
    base: &CircuitSpec,
    coords: &[(usize, usize)],
    trials: u64,
    seed: u64,
    progress: Option<&(dyn Fn(usize, usize) + Sync)>,
) -> Result<Vec<Estimate>, EngineError> {
    let total = coords.len();
    let done = AtomicUsize::new(0);
    coords
        .par_iter()
        .enumerate()
        .map(|(i, &(x, t))| {
            let e = estimate_point(&base.with_probe(x, t), trials, seed, i as u64, Method::Literal)?;
            let k = done.fetch_add(1, Ordering::Relaxed) + 1;
            if let Some(f) = progress {
                f(k, total);
            }
            Ok(e)
        })
        .collect()
}

#[derive(Clone)]
struct Sums {
    sum: Vec<f64>,
    sq: Vec<f64>,
    restarts: Vec<u64>,
}

impl Sums {
    fn new(n: usize) -> Self {
        Sums { sum: vec![0.0; n], sq: vec![0.0; n], restarts: vec![0; n] }
    }

    fn absorb(&mut self, other: &Sums) {
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sq[i] += other.sq[i];
            self.restarts[i] += other.restarts[i];
        }
    }
}

fn shared_scan(
    base: &CircuitSpec,
    xs: &[usize],
    ts: &[usize],
    trials: u64,
    seed: u64,
    method: Method,
    progress: Option<&(dyn Fn(usize, usize) + Sync)>,
) -> Result<Vec<Estimate>, EngineError> {
    let n = xs.len() * ts.len();
    let cap = LIVELOCK_FACTOR * trials;
    let chunks = trials.div_ceil(CHUNK);
    let done = AtomicUsize::new(0);
    let one_trial = |i: u64, acc: &mut Sums| -> Result<(), EngineError> {
        let inst = base.realize(&mut trial_rng(seed, INSTANCE_STREAM, i));
        for (xi, &x) in xs.iter().enumerate() {
            let an = analyses_over_time(&inst, x)?;
            for (ti, &t) in ts.iter().enumerate() {
                let k = ti * xs.len() + xi;
                let mut rng = trial_rng(seed, k as u64, i);
                let shared = match method {
                    Method::InstanceExact => an[t].chi(),
                    _ => an[t].sample(&mut rng).map(|(c, _)| c as u8 as f64),
                };
                let (v, r) = match shared {
                    Some(v) => (v, 0),
                    None => {
                        let s = base.with_probe(x, t);
                        let (v, r) = match method {
                            Method::InstanceExact => instance_exact_trial(&s, &mut rng, cap)?,
                            _ => conditioned_trial(&s, &mut rng, cap).map(|r| (r.c as u8 as f64, r.discarded))?,
                        };
                        (v, r + 1)
                    }
                };
                acc.sum[k] += v;
                acc.sq[k] += v * v;
                acc.restarts[k] += r;
            }
        }
        Ok(())
    };
    let parts: Vec<Sums> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Sums::new(n);
            for i in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                one_trial(i, &mut acc)?;
            }
            let k = done.fetch_add(1, Ordering::Relaxed) + 1;
            if let Some(f) = progress {
                f(k, chunks as usize);
            }
            Ok(acc)
        })
        .collect::<Result<_, EngineError>>()?;
    let mut total = Sums::new(n);
    for p in &parts {
        total.absorb(p);
    }
    let nf = trials as f64;
    (0..n)
        .map(|k| {
            if total.restarts[k] > cap {
                return Err(EngineError::Livelock { restarts: total.restarts[k], trials });
            }
            let mean = total.sum[k] / nf;
            let stderr = match method {
                Method::InstanceExact if trials > 1 => {
                    let var = ((total.sq[k] - nf * mean * mean) / (nf - 1.0)).max(0.0);
                    (var / nf).sqrt()
                }
                Method::InstanceExact => 0.0,
                _ => (mean * (1.0 - mean) / nf).max(0.0).sqrt(),
            };
            Ok(Estimate { mean, stderr, trials, restarts: total.restarts[k] })
        })
        .collect()
}


#[cfg(test)]
mod time_tests {
    use super::*;
    use crate::circuit::CircuitSpec;

    #[test]
    fn over_time_matches_per_time_analysis() {
        for (name, p) in [("hybrid-mipt", 0.2), ("inverted-cone", 0.0), ("css-half-half", 0.1)] {
            let mut spec = CircuitSpec::preset(name, 6, 6).unwrap();
            spec.p = p;
            for seed in 0..8 {
                let inst = spec.realize(&mut trial_rng(seed, 0, 0));
                let x_b = (seed as usize) % 6;
                let all = instance_chi_over_time(&inst, x_b).unwrap();
                let each: Option<Vec<f64>> = (0..=6)
                    .map(|t| {
                        let mut s = inst.clone();
                        s.spec.b.x = x_b;
                        s.spec.b.t = t;
                        analyze(&s).chi()
                    })
                    .collect();
                assert_eq!(all, each, "{name} seed {seed}");
            }
        }
    }
}
