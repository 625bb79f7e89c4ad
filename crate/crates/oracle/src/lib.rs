//! Dense density-matrix oracle.
//!
//! Brute-force reference for small circuits: states are `2^n × 2^n` complex
//! matrices, Clifford gates are turned into explicit unitaries from their
//! Pauli images, and every measurement branch is kept.

pub mod cones;

use num_complex::Complex64;
use xeqci::circuit::{CircuitInstance, Op};
use xeqci::gates::{self, CliffordGate};
use xeqci::pauli::Pauli1;
use xeqci::PauliOperator;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Branches lighter than this are dropped.
pub const PRUNE: f64 = 1e-13;

/// Largest register the oracle accepts.
pub const MAX_QUBITS: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix { dim, data: vec![C0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = C1;
        }
        m
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        let d = self.dim;
        let mut out = Matrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == C0 {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * o.data[k * d + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Matrix {
        let d = self.dim;
        let mut out = Matrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.at(i, i).re).sum()
    }

    pub fn scale(&mut self, f: f64) {
        self.data.iter_mut().for_each(|v| *v *= f);
    }

    pub fn max_abs_diff(&self, o: &Matrix) -> f64 {
        self.data.iter().zip(&o.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// `P|b⟩` for the Hermitian Pauli `P`: returns `(b ⊕ x, phase)`.
fn pauli_action(p: &PauliOperator, b: usize) -> (usize, Complex64) {
    let x = p.x_words()[0] as usize;
    let z = p.z_words()[0] as usize;
    let y = (x & z).count_ones();
    let zb = (z & b).count_ones();
    let k = (y + 2 * zb + if p.is_negative() { 2 } else { 0 }) % 4;
    let ph = [C1, Complex64::new(0.0, 1.0), -C1, Complex64::new(0.0, -1.0)][k as usize];
    (b ^ x, ph)
}

/// Dense matrix of a Pauli operator.
pub fn pauli_matrix(p: &PauliOperator) -> Matrix {
    let d = 1 << p.num_qubits();
    let mut m = Matrix::zeros(d);
    for b in 0..d {
        let (r, ph) = pauli_action(p, b);
        m.data[r * d + b] = ph;
    }
    m
}

fn apply_pauli(p: &PauliOperator, v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![C0; v.len()];
    for (b, &a) in v.iter().enumerate() {
        if a != C0 {
            let (r, ph) = pauli_action(p, b);
            out[r] += ph * a;
        }
    }
    out
}

/// Unitary with `U P U† = gate.image(P)`, fixed up to a global phase.
///
/// `U|0⟩` is the state stabilized by the images of every `Z_k`, and
/// `U|b⟩ = Π_k image(X_k)^{b_k} U|0⟩`.
pub fn clifford_unitary(gate: &CliffordGate) -> Matrix {
    let n = gate.arity();
    let d = 1usize << n;
    let xs: Vec<PauliOperator> = (0..n).map(|k| gate.image(k)).collect();
    let zs: Vec<PauliOperator> = (0..n).map(|k| gate.image(n + k)).collect();
    let mut psi = None;
    for seed in 0..d {
        let mut v = vec![C0; d];
        v[seed] = C1;
        for z in &zs {
            let pv = apply_pauli(z, &v);
            v.iter_mut().zip(pv).for_each(|(a, b)| *a = (*a + b) * 0.5);
        }
        let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        if norm > 1e-6 {
            let s = norm.sqrt();
            psi = Some(v.into_iter().map(|c| c / s).collect::<Vec<_>>());
            break;
        }
    }
    let psi = psi.expect("stabilizer images define a state");
    let mut u = Matrix::zeros(d);
    for b in 0..d {
        let mut col = psi.clone();
        for (k, x) in xs.iter().enumerate().rev() {
            if (b >> k) & 1 == 1 {
                col = apply_pauli(x, &col);
            }
        }
        for (r, c) in col.into_iter().enumerate() {
            u.data[r * d + b] = c;
        }
    }
    u
}

/// Density matrix on `n ≤ MAX_QUBITS` qubits (unnormalized in branches).
#[derive(Clone, Debug, PartialEq)]
pub struct Density {
    pub n: usize,
    pub m: Matrix,
}

impl Density {
    /// `2^-n Π_g (I + g)` for independent commuting generators.
    pub fn from_generators(n: usize, gens: &[PauliOperator]) -> Self {
        assert!(n <= MAX_QUBITS, "dense oracle limited to {MAX_QUBITS} qubits");
        let d = 1 << n;
        let mut m = Matrix::identity(d);
        for g in gens {
            let mut f = pauli_matrix(g);
            for i in 0..d {
                f.data[i * d + i] += C1;
            }
            m = m.mul(&f);
        }
        m.scale(1.0 / d as f64);
        Density { n, m }
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }

    /// `ρ → U ρ U†` with a local unitary `u` on `sites` (site k of `u` ↔ `sites[k]`).
    pub fn apply_local(&mut self, u: &Matrix, sites: &[usize]) {
        let d = 1usize << self.n;
        let ld = u.dim;
        let mask: usize = sites.iter().map(|&s| 1 << s).sum();
        let embed = |l: usize| -> usize { sites.iter().enumerate().map(|(k, &s)| ((l >> k) & 1) << s).sum() };
        let offs: Vec<usize> = (0..ld).map(embed).collect();
        // rows: ρ ← U ρ
        let mut tmp = vec![C0; ld];
        for c in 0..d {
            for base in (0..d).filter(|b| b & mask == 0) {
                for (i, t) in tmp.iter_mut().enumerate() {
                    *t = (0..ld).map(|k| u.at(i, k) * self.m.data[(base | offs[k]) * d + c]).sum();
                }
                for i in 0..ld {
                    self.m.data[(base | offs[i]) * d + c] = tmp[i];
                }
            }
        }
        // columns: ρ ← ρ U†
        for r in 0..d {
            for base in (0..d).filter(|b| b & mask == 0) {
                for (j, t) in tmp.iter_mut().enumerate() {
                    *t = (0..ld).map(|k| self.m.data[r * d + (base | offs[k])] * u.at(j, k).conj()).sum();
                }
                for j in 0..ld {
                    self.m.data[r * d + (base | offs[j])] = tmp[j];
                }
            }
        }
    }

    /// Unnormalized `Π_o ρ Π_o` for a Z measurement outcome `o` on `q`.
    pub fn project(&self, q: usize, o: bool) -> Density {
        let d = 1usize << self.n;
        let mut out = self.clone();
        for r in 0..d {
            for c in 0..d {
                if ((r >> q) & 1 == 1) != o || ((c >> q) & 1 == 1) != o {
                    out.m.data[r * d + c] = C0;
                }
            }
        }
        out
    }

    /// Complete depolarization by the Pauli twirl over `sites`.
    pub fn depolarize(&mut self, sites: &[usize]) {
        let d = 1usize << self.n;
        let k = sites.len();
        let mut acc = Matrix::zeros(d);
        for code in 0..(1usize << (2 * k)) {
            let mut p = PauliOperator::identity(self.n);
            for (j, &s) in sites.iter().enumerate() {
                let c = (code >> (2 * j)) & 3;
                p.set(s, [Pauli1::I, Pauli1::X, Pauli1::Y, Pauli1::Z][c]);
            }
            for r in 0..d {
                let (r2, pr) = pauli_action(&p, r);
                for c in 0..d {
                    let (c2, pc) = pauli_action(&p, c);
                    acc.data[r2 * d + c2] += pr * self.m.data[r * d + c] * pc.conj();
                }
            }
        }
        acc.scale(1.0 / (1usize << (2 * k)) as f64);
        self.m = acc;
    }

    /// Reduced density matrix on `sites` (site k of the result ↔ `sites[k]`).
    pub fn reduce(&self, sites: &[usize]) -> Matrix {
        let d = 1usize << self.n;
        let ld = 1usize << sites.len();
        let mask: usize = sites.iter().map(|&s| 1 << s).sum();
        let local = |b: usize| -> usize { sites.iter().enumerate().map(|(k, &s)| ((b >> s) & 1) << k).sum() };
        let mut out = Matrix::zeros(ld);
        for r in 0..d {
            for c in 0..d {
                if r & !mask == c & !mask {
                    out.data[local(r) * ld + local(c)] += self.m.data[r * d + c];
                }
            }
        }
        out
    }
}

/// Outcome probabilities `⟨b|U ρ U†|b⟩`, normalized.
pub fn born(rho: &Matrix, u: &Matrix) -> Vec<f64> {
    let r = u.mul(rho).mul(&u.adjoint());
    let t = r.trace();
    (0..r.dim).map(|b| r.at(b, b).re / t).collect()
}

/// A pair of unnormalized branch states, perturbed and unperturbed.
#[derive(Clone, Debug)]
struct Branch {
    d: Density,
    one: Density,
}

/// Ancilla marginals of every trajectory branch with nonzero weight in both
/// passes. Returns `(weight, ρ_dep, ρ_1)` per branch with normalized matrices;
/// the weight is the perturbed probability of the branch.
pub fn ancilla_marginals(inst: &CircuitInstance) -> Vec<(f64, Matrix, Matrix)> {
    let n = inst.num_qubits();
    let rho0 = Density::from_generators(n, &inst.initial_generators());
    let mut branches = vec![Branch { d: rho0.clone(), one: rho0 }];
    let a_sites = inst.a_sites();
    let l = inst.spec.l;
    let swap = clifford_unitary(&CliffordGate::swap());
    let mut cache = std::collections::HashMap::new();
    for op in inst.schedule() {
        match op {
            Op::Gate { a, b, gate } => {
                let u = cache.entry(gate).or_insert_with(|| clifford_unitary(gates::two_qubit(gate)));
                for br in &mut branches {
                    br.d.apply_local(u, &[a, b]);
                    br.one.apply_local(u, &[a, b]);
                }
            }
            Op::Reset(x) => {
                for br in &mut branches {
                    br.d.depolarize(&[x]);
                    br.one.depolarize(&[x]);
                }
            }
            Op::Depolarize => {
                for br in &mut branches {
                    br.d.depolarize(&a_sites);
                }
            }
            Op::Probe => {
                for br in &mut branches {
                    for (j, x) in inst.b_sites().into_iter().enumerate() {
                        br.d.apply_local(&swap, &[x, l + 2 * j]);
                        br.one.apply_local(&swap, &[x, l + 2 * j]);
                    }
                }
            }
            Op::Measure { site, .. } | Op::Postselect(site) => {
                let outs: &[bool] = if matches!(op, Op::Postselect(_)) { &[false] } else { &[false, true] };
                let mut next = Vec::new();
                for br in &branches {
                    for &o in outs {
                        let d = br.d.project(site, o);
                        let one = br.one.project(site, o);
                        if d.trace() > PRUNE && one.trace() > PRUNE {
                            // keep the unperturbed branch at unit trace; only ratios matter
                            let mut one = one;
                            let t = one.trace();
                            one.m.scale(1.0 / t);
                            next.push(Branch { d, one });
                        }
                    }
                }
                branches = next;
            }
        }
    }
    let anc = inst.ancillas();
    branches
        .into_iter()
        .map(|br| {
            let w = br.d.trace();
            let mut rd = br.d.reduce(&anc);
            rd.scale(1.0 / w);
            let r1 = br.one.reduce(&anc);
            let t1 = r1.trace();
            let mut r1 = r1;
            r1.scale(1.0 / t1);
            (w, rd, r1)
        })
        .collect()
}

/// Averaged cross-entropy score `Σ_b P_d(b) P_1(b) / Σ_b P_1(b)^2`.
fn score(pd: &[f64], p1: &[f64]) -> f64 {
    let s2: f64 = p1.iter().map(|v| v * v).sum();
    pd.iter().zip(p1).map(|(a, b)| a * b).sum::<f64>() / s2
}

/// Exact `χ̄_C` of the instance for a fixed POVM Clifford. `None` if no
/// trajectory is feasible in both passes.
pub fn chi_fixed(inst: &CircuitInstance, u_b: &CliffordGate) -> Option<f64> {
    let leaves = ancilla_marginals(inst);
    let norm: f64 = leaves.iter().map(|l| l.0).sum();
    if leaves.is_empty() {
        return None;
    }
    let u = clifford_unitary(u_b);
    let v: f64 = leaves.iter().map(|(w, rd, r1)| w * score(&born(rd, &u), &born(r1, &u))).sum();
    Some(v / norm)
}

/// Exact `χ̄_C` of the instance averaged over all two-qubit POVM Cliffords
/// (single-site probe only).
pub fn chi_all_povm(inst: &CircuitInstance) -> Option<f64> {
    assert_eq!(inst.spec.b.width, 1, "two-qubit POVM average needs a single-site probe");
    let leaves = ancilla_marginals(inst);
    if leaves.is_empty() {
        return None;
    }
    let norm: f64 = leaves.iter().map(|l| l.0).sum();
    let us = povm_unitaries();
    let mut total = 0.0;
    for u in us {
        for (w, rd, r1) in &leaves {
            total += w * score(&born(rd, u), &born(r1, u));
        }
    }
    Some(total / (norm * us.len() as f64))
}

fn povm_unitaries() -> &'static [Matrix] {
    static U: std::sync::OnceLock<Vec<Matrix>> = std::sync::OnceLock::new();
    U.get_or_init(|| gates::two_qubit_table().iter().map(clifford_unitary).collect())
}

/// Random spec with `L ≤ 3`, `T ≤ 3`, `p ∈ {0, 0.3, 1}`, random boundary
/// patterns and probe/perturbation positions, for cross-checks.
pub fn random_small_spec<R: rand::Rng + ?Sized>(rng: &mut R) -> xeqci::CircuitSpec {
    use xeqci::circuit::{
        BoundaryConfig, FinalQubit, GateSource, InitialQubit, Monitored, Pattern, Region, Spatial,
    };
    let l = rng.random_range(1..=3usize);
    let t = rng.random_range(1..=3usize);
    let p = [0.0, 0.3, 1.0][rng.random_range(0..3)];
    let spatial = if l == 2 && rng.random_bool(0.3) { Spatial::Periodic } else { Spatial::Open };
    let initial = Pattern(
        (0..l).map(|_| if rng.random() { InitialQubit::Zero } else { InitialQubit::Mixed }).collect(),
    );
    let final_state = Pattern(
        (0..l).map(|_| if rng.random_bool(0.3) { FinalQubit::Postselect } else { FinalQubit::Open }).collect(),
    );
    let gates = match rng.random_range(0..4) {
        0 => GateSource::Css,
        1 => GateSource::DualUnitary,
        _ => GateSource::RandomClifford,
    };
    let aw = rng.random_range(1..=l.min(2));
    let a = Region { x: rng.random_range(0..=l - aw), width: aw, t: rng.random_range(0..=t) };
    let b = Region { x: rng.random_range(0..l), width: 1, t: rng.random_range(0..=t) };
    let monitored = rng.random_bool(0.2).then(|| {
        let x0 = rng.random_range(0..l);
        let t0 = rng.random_range(0..=t);
        Monitored { x0, x1: x0, t0, t1: t0, gates: GateSource::RandomClifford }
    });
    xeqci::CircuitSpec {
        l,
        t,
        gates,
        p,
        boundary: BoundaryConfig { initial, final_state, spatial, initial_generators: None },
        a,
        b,
        seed: rng.random(),
        monitored,
        edge_reset: rng.random_bool(0.2),
    }
}

/// Outcome of cross-checking one small instance against the stabilizer engine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Agreement {
    /// All routes defined and equal; the dense value.
    Defined(f64),
    /// All routes agree that no trajectory is feasible.
    Undefined,
}

/// Compares the dense `χ̄_C` (all POVM Cliffords and the drawn one) with the
/// engine's branch enumeration and affine analysis to within `tol`.
pub fn cross_check(inst: &CircuitInstance, tol: f64) -> Result<Agreement, String> {
    use xeqci::engine::{analyze, enumerate_chi, instance_chi_all_povm};
    let dense = chi_all_povm(inst);
    let branch = enumerate_chi(inst).map_err(|e| e.to_string())?;
    let affine = instance_chi_all_povm(inst).map_err(|e| e.to_string())?;
    let out = match (dense, branch, affine) {
        (Some(d), Some(b), Some(a)) => {
            if (d - b).abs() >= tol || (d - a).abs() >= tol {
                return Err(format!("dense {d} branch {b} affine {a}"));
            }
            Agreement::Defined(d)
        }
        (None, None, None) => Agreement::Undefined,
        other => return Err(format!("definedness differs {other:?}")),
    };
    match (chi_fixed(inst, inst.u_b.gate()), analyze(inst).chi()) {
        (Some(d), Some(a)) if (d - a).abs() < tol => {}
        (None, None) => {}
        other => return Err(format!("fixed POVM differs {other:?}")),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn unitary_conjugates_paulis() {
        let gs = [CliffordGate::hadamard(), CliffordGate::phase(), CliffordGate::cnot(), CliffordGate::cz()];
        for g in gs.iter().chain(gates::two_qubit_table().iter().step_by(997)) {
            let u = clifford_unitary(g);
            let ud = u.adjoint();
            assert!(u.mul(&ud).max_abs_diff(&Matrix::identity(u.dim)) < 1e-12);
            for k in 0..2 * g.arity() {
                let mut q = PauliOperator::identity(g.arity());
                let site = k % g.arity();
                q.set(site, if k < g.arity() { Pauli1::X } else { Pauli1::Z });
                let lhs = u.mul(&pauli_matrix(&q)).mul(&ud);
                assert!(lhs.max_abs_diff(&pauli_matrix(&g.conjugate(&q))) < 1e-12);
            }
        }
    }

    #[test]
    fn bell_marginal_is_mixed() {
        let rho = Density::from_generators(2, &[p("XX"), p("ZZ")]);
        let r = rho.reduce(&[0]);
        assert!(r.max_abs_diff(&{
            let mut i = Matrix::identity(2);
            i.scale(0.5);
            i
        }) < 1e-14);
    }

    #[test]
    fn depolarize_gives_identity_marginal() {
        let mut rho = Density::from_generators(2, &[p("ZI"), p("IX")]);
        rho.depolarize(&[0]);
        let want = Density::from_generators(2, &[p("IX")]);
        assert!(rho.m.max_abs_diff(&want.m) < 1e-14);
    }

    #[test]
    fn apply_local_matches_full() {
        let g = gates::two_qubit(4321);
        let u = clifford_unitary(g);
        let mut rho = Density::from_generators(3, &[p("ZII"), p("IXI"), p("IIY")]);
        rho.apply_local(&u, &[2, 0]);
        let want = Density::from_generators(
            3,
            &[p("ZII"), p("IXI"), p("IIY")]
                .iter()
                .map(|q| {
                    let loc = q.restrict(&[2, 0]);
                    let img = g.conjugate(&loc);
                    let mut out = q.clone();
                    out.set(2, img.get(0));
                    out.set(0, img.get(1));
                    let flip = img.is_negative() != loc.is_negative();
                    out.set_negative(q.is_negative() ^ flip);
                    out
                })
                .collect::<Vec<_>>(),
        );
        assert!(rho.m.max_abs_diff(&want.m) < 1e-12);
    }
}
