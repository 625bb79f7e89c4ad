//! Clifford gates as signed images of the Pauli generators.
//!
//! Local Paulis on an `a`-qubit gate are packed into two `u64` words (bit k =
//! qubit k). Gates with `a ≤ 4` carry a lookup table indexed by `x | z << a`.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use rand::Rng;
use thiserror::Error;

use crate::pauli::{Pauli1, PauliOperator};

pub const MAX_ARITY: usize = 32;
const LUT_ARITY: usize = 4;
const LUT_FLIP: u16 = 1 << 15;

/// Number of two-qubit Cliffords modulo global phase.
pub const TWO_QUBIT_CLIFFORDS: usize = 11_520;
/// Number of two-qubit CSS gates.
pub const CSS_GATES: usize = 96;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GateError {
    #[error("gate arity must be in 1..={MAX_ARITY}, got {0}")]
    Arity(usize),
    #[error("expected {expected} images, got {got}")]
    ImageCount { expected: usize, got: usize },
    #[error("image {0} acts on the wrong number of qubits")]
    ImageLength(usize),
    #[error("images do not preserve the commutation relations")]
    NotSymplectic,
    #[error("CSS gate index {0} out of range 0..96")]
    CssIndex(usize),
    #[error("cannot parse image: {0}")]
    Parse(String),
}

#[inline]
fn pc(v: u64) -> u32 {
    v.count_ones()
}

#[inline]
fn sympl(x1: u64, z1: u64, x2: u64, z2: u64) -> bool {
    (pc(x1 & z2) + pc(z1 & x2)) & 1 == 1
}

/// A Clifford unitary modulo global phase, stored as the images of
/// `X_1..X_a, Z_1..Z_a`.
#[derive(Clone)]
pub struct CliffordGate {
    arity: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    neg: Vec<bool>,
    lut: Vec<u16>,
}

impl PartialEq for CliffordGate {
    fn eq(&self, o: &Self) -> bool {
        self.arity == o.arity && self.x == o.x && self.z == o.z && self.neg == o.neg
    }
}

impl Eq for CliffordGate {}

impl std::hash::Hash for CliffordGate {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.arity.hash(h);
        self.x.hash(h);
        self.z.hash(h);
        self.neg.hash(h);
    }
}

impl fmt::Debug for CliffordGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.arity;
        let mut list = f.debug_list();
        for k in 0..2 * a {
            let name = if k < a { format!("X{}", k + 1) } else { format!("Z{}", k - a + 1) };
            list.entry(&format_args!("{name}->{}", self.image(k)));
        }
        list.finish()
    }
}

impl CliffordGate {
    /// Build from raw image bits: entries `0..a` are images of `X_k`, `a..2a` of `Z_k`.
    pub fn from_bits(arity: usize, x: Vec<u64>, z: Vec<u64>, neg: Vec<bool>) -> Result<Self, GateError> {
        if arity == 0 || arity > MAX_ARITY {
            return Err(GateError::Arity(arity));
        }
        let n = 2 * arity;
        if x.len() != n || z.len() != n || neg.len() != n {
            return Err(GateError::ImageCount { expected: n, got: x.len().min(z.len()).min(neg.len()) });
        }
        let mask = if arity == 64 { !0 } else { (1u64 << arity) - 1 };
        for k in 0..n {
            if x[k] & !mask != 0 || z[k] & !mask != 0 {
                return Err(GateError::ImageLength(k));
            }
        }
        for i in 0..n {
            for j in 0..i {
                let want = i == j + arity;
                if sympl(x[i], z[i], x[j], z[j]) != want {
                    return Err(GateError::NotSymplectic);
                }
            }
        }
        Ok(Self::from_bits_unchecked(arity, x, z, neg))
    }

    fn from_bits_unchecked(arity: usize, x: Vec<u64>, z: Vec<u64>, neg: Vec<bool>) -> Self {
        let mut g = Self { arity, x, z, neg, lut: Vec::new() };
        if arity <= LUT_ARITY {
            let size = 1usize << (2 * arity);
            let mut lut = Vec::with_capacity(size);
            let m = (1u64 << arity) - 1;
            for idx in 0..size as u64 {
                let (xo, zo, f) = g.image_slow(idx & m, idx >> arity);
                lut.push((xo | zo << arity) as u16 | if f { LUT_FLIP } else { 0 });
            }
            g.lut = lut;
        }
        g
    }

    /// Build from Hermitian image Paulis `[X_1', …, X_a', Z_1', …, Z_a']`.
    pub fn from_images(images: &[PauliOperator]) -> Result<Self, GateError> {
        if images.len() % 2 != 0 || images.is_empty() {
            return Err(GateError::ImageCount { expected: 2 * (images.len() / 2).max(1), got: images.len() });
        }
        let a = images.len() / 2;
        if a > MAX_ARITY {
            return Err(GateError::Arity(a));
        }
        let mut x = Vec::with_capacity(2 * a);
        let mut z = Vec::with_capacity(2 * a);
        let mut neg = Vec::with_capacity(2 * a);
        for (k, p) in images.iter().enumerate() {
            if p.num_qubits() != a {
                return Err(GateError::ImageLength(k));
            }
            x.push(p.x_words()[0]);
            z.push(p.z_words()[0]);
            neg.push(p.is_negative());
        }
        Self::from_bits(a, x, z, neg)
    }

    /// Parse images written as strings like `["+XX", "IX", "ZI", "-ZZ"]`.
    pub fn from_strs(images: &[&str]) -> Result<Self, GateError> {
        let ps = images
            .iter()
            .map(|s| s.parse::<PauliOperator>().map_err(|_| GateError::Parse(s.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_images(&ps)
    }

    pub fn identity(arity: usize) -> Self {
        assert!(arity >= 1 && arity <= MAX_ARITY);
        let x = (0..arity).map(|k| 1u64 << k).chain(std::iter::repeat_n(0, arity)).collect();
        let z = std::iter::repeat_n(0, arity).chain((0..arity).map(|k| 1u64 << k)).collect();
        Self::from_bits_unchecked(arity, x, z, vec![false; 2 * arity])
    }

    pub fn hadamard() -> Self {
        Self::from_strs(&["Z", "X"]).unwrap()
    }

    /// Phase gate S: X → Y, Z → Z.
    pub fn phase() -> Self {
        Self::from_strs(&["Y", "Z"]).unwrap()
    }

    pub fn pauli_x() -> Self {
        Self::from_strs(&["X", "-Z"]).unwrap()
    }

    pub fn pauli_z() -> Self {
        Self::from_strs(&["-X", "Z"]).unwrap()
    }

    /// CNOT with control qubit 0 and target qubit 1.
    pub fn cnot() -> Self {
        Self::from_strs(&["XX", "IX", "ZI", "ZZ"]).unwrap()
    }

    pub fn cz() -> Self {
        Self::from_strs(&["XZ", "ZX", "ZI", "IZ"]).unwrap()
    }

    pub fn swap() -> Self {
        Self::from_strs(&["IX", "XI", "IZ", "ZI"]).unwrap()
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Image `k` (`k < a`: of `X_{k+1}`, else of `Z_{k-a+1}`) as a Hermitian Pauli.
    pub fn image(&self, k: usize) -> PauliOperator {
        let a = self.arity;
        let mut p = PauliOperator::identity(a);
        for q in 0..a {
            p.set(q, Pauli1::from_bits((self.x[k] >> q) & 1 == 1, (self.z[k] >> q) & 1 == 1));
        }
        p.set_negative(self.neg[k]);
        p
    }

    pub fn images(&self) -> Vec<PauliOperator> {
        (0..2 * self.arity).map(|k| self.image(k)).collect()
    }

    /// Raw image bits `(x, z, negative)` of generator `k`.
    pub fn image_raw(&self, k: usize) -> (u64, u64, bool) {
        (self.x[k], self.z[k], self.neg[k])
    }

    /// Image of the local Hermitian Pauli with bits `(x, z)`: returns the new
    /// bits and whether the sign flips.
    #[inline]
    pub fn image_bits(&self, x: u64, z: u64) -> (u64, u64, bool) {
        if !self.lut.is_empty() {
            let a = self.arity;
            let e = self.lut[(x | z << a) as usize];
            let m = (1u64 << a) - 1;
            let o = (e & !LUT_FLIP) as u64;
            (o & m, o >> a, e & LUT_FLIP != 0)
        } else {
            self.image_slow(x, z)
        }
    }

    fn image_slow(&self, x: u64, z: u64) -> (u64, u64, bool) {
        // Track i^e X^ax Z^az.
        let a = self.arity;
        let mut e = pc(x & z);
        let (mut ax, mut az) = (0u64, 0u64);
        let mut mul = |k: usize| {
            let (gx, gz) = (self.x[k], self.z[k]);
            e += 2 * self.neg[k] as u32 + pc(gx & gz) + 2 * pc(az & gx);
            ax ^= gx;
            az ^= gz;
        };
        for k in 0..a {
            if (x >> k) & 1 == 1 {
                mul(k);
            }
        }
        for k in 0..a {
            if (z >> k) & 1 == 1 {
                mul(a + k);
            }
        }
        let rest = (e + 4 * 64 - pc(ax & az)) & 3;
        debug_assert!(rest & 1 == 0);
        (ax, az, rest == 2)
    }

    /// `U P U†` for a Pauli `p` on `arity` qubits.
    pub fn conjugate(&self, p: &PauliOperator) -> PauliOperator {
        assert_eq!(p.num_qubits(), self.arity);
        let (x, z, f) = self.image_bits(p.x_words()[0], p.z_words()[0]);
        let mut out = PauliOperator::identity(self.arity);
        for q in 0..self.arity {
            out.set(q, Pauli1::from_bits((x >> q) & 1 == 1, (z >> q) & 1 == 1));
        }
        out.set_negative(p.is_negative() ^ f);
        out
    }

    /// The gate that applies `self` first and then `next`.
    pub fn then(&self, next: &CliffordGate) -> CliffordGate {
        assert_eq!(self.arity, next.arity);
        let n = 2 * self.arity;
        let mut x = Vec::with_capacity(n);
        let mut z = Vec::with_capacity(n);
        let mut neg = Vec::with_capacity(n);
        for k in 0..n {
            let (ix, iz, f) = next.image_bits(self.x[k], self.z[k]);
            x.push(ix);
            z.push(iz);
            neg.push(self.neg[k] ^ f);
        }
        Self::from_bits_unchecked(self.arity, x, z, neg)
    }

    pub fn inverse(&self) -> CliffordGate {
        let a = self.arity;
        let n = 2 * a;
        let mut x = vec![0u64; n];
        let mut z = vec![0u64; n];
        let mut neg = vec![false; n];
        for k in 0..n {
            let (px, pz) = if k < a { (1u64 << k, 0) } else { (0, 1u64 << (k - a)) };
            // Preimage bits from symplectic duality with the images.
            let (mut qx, mut qz) = (0u64, 0u64);
            for j in 0..a {
                if sympl(px, pz, self.x[a + j], self.z[a + j]) {
                    qx |= 1 << j;
                }
                if sympl(px, pz, self.x[j], self.z[j]) {
                    qz |= 1 << j;
                }
            }
            let (ix, iz, f) = self.image_bits(qx, qz);
            debug_assert!(ix == px && iz == pz);
            x[k] = qx;
            z[k] = qz;
            neg[k] = f;
        }
        Self::from_bits_unchecked(a, x, z, neg)
    }

    /// `self ⊗ other`, with `other` on the higher qubits.
    pub fn tensor(&self, other: &CliffordGate) -> CliffordGate {
        let (a, b) = (self.arity, other.arity);
        let ab = a + b;
        assert!(ab <= MAX_ARITY);
        let mut x = vec![0u64; 2 * ab];
        let mut z = vec![0u64; 2 * ab];
        let mut neg = vec![false; 2 * ab];
        for k in 0..a {
            (x[k], z[k], neg[k]) = self.image_raw(k);
            (x[ab + k], z[ab + k], neg[ab + k]) = self.image_raw(a + k);
        }
        for k in 0..b {
            let (ox, oz, on) = other.image_raw(k);
            (x[a + k], z[a + k], neg[a + k]) = (ox << a, oz << a, on);
            let (ox, oz, on) = other.image_raw(b + k);
            (x[ab + a + k], z[ab + a + k], neg[ab + a + k]) = (ox << a, oz << a, on);
        }
        Self::from_bits_unchecked(ab, x, z, neg)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.arity)
    }

    /// Maps X-type Paulis to X-type and Z-type to Z-type.
    pub fn is_css(&self) -> bool {
        let a = self.arity;
        (0..a).all(|k| self.z[k] == 0) && (a..2 * a).all(|k| self.x[k] == 0)
    }

    /// Position of a two-qubit gate in [`two_qubit_table`].
    pub fn table_index(&self) -> Option<u16> {
        if self.arity != 2 {
            return None;
        }
        let t = table();
        let key = sym_key(&self.x, &self.z);
        let sym = *t.by_key.get(&key)?;
        let signs = (0..4).fold(0u16, |acc, k| acc | (self.neg[k] as u16) << k);
        Some(sym * 16 + signs)
    }
}

fn sym_key(x: &[u64], z: &[u64]) -> u16 {
    (0..4).fold(0u16, |acc, k| acc | ((x[k] | z[k] << 2) as u16) << (4 * k))
}

struct Table {
    gates: Vec<CliffordGate>,
    by_key: HashMap<u16, u16>,
}

fn table() -> &'static Table {
    static T: OnceLock<Table> = OnceLock::new();
    T.get_or_init(|| {
        // Each image is a 4-bit vector: x bits in 0..2, z bits in 2..4.
        let mut syms: Vec<[u64; 4]> = Vec::with_capacity(720);
        let sp = |u: u64, v: u64| sympl(u & 3, u >> 2, v & 3, v >> 2);
        for a in 1..16u64 {
            for b in 1..16u64 {
                if sp(a, b) {
                    continue;
                }
                for c in 1..16u64 {
                    if !sp(a, c) || sp(b, c) {
                        continue;
                    }
                    for d in 1..16u64 {
                        if sp(a, d) || !sp(b, d) || sp(c, d) {
                            continue;
                        }
                        syms.push([a, b, c, d]);
                    }
                }
            }
        }
        assert_eq!(syms.len(), 720);
        let mut gates = Vec::with_capacity(TWO_QUBIT_CLIFFORDS);
        let mut by_key = HashMap::with_capacity(720);
        for (i, s) in syms.iter().enumerate() {
            let x: Vec<u64> = s.iter().map(|v| v & 3).collect();
            let z: Vec<u64> = s.iter().map(|v| v >> 2).collect();
            by_key.insert(sym_key(&x, &z), i as u16);
            for signs in 0..16u16 {
                let neg = (0..4).map(|k| (signs >> k) & 1 == 1).collect();
                gates.push(CliffordGate::from_bits_unchecked(2, x.clone(), z.clone(), neg));
            }
        }
        Table { gates, by_key }
    })
}

/// All 11,520 two-qubit Cliffords (mod phase), indexed `symplectic × 16 + signs`
/// with sign bits in the order `X_1, X_2, Z_1, Z_2`.
pub fn two_qubit_table() -> &'static [CliffordGate] {
    &table().gates
}

pub fn two_qubit(index: u16) -> &'static CliffordGate {
    &table().gates[index as usize]
}

const CSS_BASES: [[&str; 4]; 6] = [
    ["XI", "IX", "ZI", "IZ"],
    ["IX", "XI", "IZ", "ZI"],
    ["XX", "IX", "ZI", "ZZ"],
    ["XI", "XX", "ZZ", "IZ"],
    ["IX", "XX", "ZZ", "ZI"],
    ["XX", "XI", "IZ", "ZZ"],
];

/// CSS gate `index = 16·base + signs`, where `base` selects g0..g5 and sign
/// bit k negates the image of `X_1, X_2, Z_1, Z_2` respectively.
pub fn css_gate(index: usize) -> Result<CliffordGate, GateError> {
    if index >= CSS_GATES {
        return Err(GateError::CssIndex(index));
    }
    let (base, signs) = (index / 16, index % 16);
    let imgs: Vec<PauliOperator> = CSS_BASES[base]
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let p: PauliOperator = s.parse().unwrap();
            if (signs >> k) & 1 == 1 {
                p.negated()
            } else {
                p
            }
        })
        .collect();
    Ok(CliffordGate::from_images(&imgs).expect("CSS table entries are Clifford"))
}

/// Table indices of the 96 CSS gates, in `css_gate` order.
pub fn css_table_indices() -> &'static [u16; CSS_GATES] {
    static T: OnceLock<[u16; CSS_GATES]> = OnceLock::new();
    T.get_or_init(|| {
        let mut out = [0u16; CSS_GATES];
        for (i, o) in out.iter_mut().enumerate() {
            *o = css_gate(i).unwrap().table_index().unwrap();
        }
        out
    })
}

/// Uniformly random Clifford on `arity` qubits (modulo global phase).
///
/// Builds a uniformly random symplectic basis one pair at a time: each new
/// image is a uniform vector projected onto the symplectic complement of the
/// pairs chosen so far, then random signs are attached.
pub fn random_clifford<R: Rng + ?Sized>(arity: usize, rng: &mut R) -> CliffordGate {
    assert!((1..=MAX_ARITY).contains(&arity));
    let mask = if arity == 64 { !0 } else { (1u64 << arity) - 1 };
    let mut pairs: Vec<((u64, u64), (u64, u64))> = Vec::with_capacity(arity);
    let project = |v: (u64, u64), pairs: &[((u64, u64), (u64, u64))]| {
        let (mut x, mut z) = v;
        for &((ax, az), (bx, bz)) in pairs {
            // v + <v,B> A + <v,A> B
            let vb = sympl(v.0, v.1, bx, bz);
            let va = sympl(v.0, v.1, ax, az);
            if vb {
                x ^= ax;
                z ^= az;
            }
            if va {
                x ^= bx;
                z ^= bz;
            }
        }
        (x, z)
    };
    for _ in 0..arity {
        let xa = loop {
            let v = project((rng.random::<u64>() & mask, rng.random::<u64>() & mask), &pairs);
            if v != (0, 0) {
                break v;
            }
        };
        let mut zb = project((rng.random::<u64>() & mask, rng.random::<u64>() & mask), &pairs);
        if !sympl(zb.0, zb.1, xa.0, xa.1) {
            let fix = (0..2 * arity)
                .map(|i| if i < arity { (1u64 << i, 0) } else { (0, 1u64 << (i - arity)) })
                .map(|e| project(e, &pairs))
                .find(|f| sympl(f.0, f.1, xa.0, xa.1))
                .expect("complement is nondegenerate");
            zb = (zb.0 ^ fix.0, zb.1 ^ fix.1);
        }
        pairs.push((xa, zb));
    }
    let mut x = vec![0u64; 2 * arity];
    let mut z = vec![0u64; 2 * arity];
    for (k, &((ax, az), (bx, bz))) in pairs.iter().enumerate() {
        (x[k], z[k]) = (ax, az);
        (x[arity + k], z[arity + k]) = (bx, bz);
    }
    let neg = (0..2 * arity).map(|_| rng.random()).collect();
    CliffordGate::from_bits_unchecked(arity, x, z, neg)
}

/// Uniform index into [`two_qubit_table`].
pub fn random_two_qubit_index<R: Rng + ?Sized>(rng: &mut R) -> u16 {
    rng.random_range(0..TWO_QUBIT_CLIFFORDS as u16)
}

/// Uniform index of one of the 96 CSS gates in [`two_qubit_table`].
pub fn random_css_index<R: Rng + ?Sized>(rng: &mut R) -> u16 {
    css_table_indices()[rng.random_range(0..CSS_GATES)]
}

/// The dual-unitary core used for the dual-unitary brickwork: CZ followed by SWAP.
pub fn dual_unitary_core() -> CliffordGate {
    CliffordGate::cz().then(&CliffordGate::swap())
}

fn single_qubit_group() -> &'static [CliffordGate] {
    static G: OnceLock<Vec<CliffordGate>> = OnceLock::new();
    G.get_or_init(|| {
        let mut out: Vec<CliffordGate> = Vec::with_capacity(24);
        let pairs = [("X", "Z"), ("Z", "X"), ("Y", "Z"), ("Z", "Y"), ("X", "Y"), ("Y", "X")];
        for (a, b) in pairs {
            for (sa, sb) in [("+", "+"), ("+", "-"), ("-", "+"), ("-", "-")] {
                out.push(CliffordGate::from_strs(&[&format!("{sa}{a}"), &format!("{sb}{b}")]).unwrap());
            }
        }
        out
    })
}

/// The 24 single-qubit Cliffords.
pub fn single_qubit_cliffords() -> &'static [CliffordGate] {
    single_qubit_group()
}

/// Dual-unitary core dressed with independent uniform single-qubit Cliffords
/// on all four legs.
pub fn dual_unitary_clifford<R: Rng + ?Sized>(rng: &mut R) -> CliffordGate {
    let g = single_qubit_group();
    let mut pick = || &g[rng.random_range(0..24)];
    let before = pick().tensor(pick());
    let after = pick().tensor(pick());
    before.then(&dual_unitary_core()).then(&after)
}

pub fn random_dual_unitary_index<R: Rng + ?Sized>(rng: &mut R) -> u16 {
    dual_unitary_clifford(rng).table_index().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn named_gates() {
        let cx = CliffordGate::cnot();
        assert_eq!(cx.conjugate(&p("XI")), p("XX"));
        assert_eq!(cx.conjugate(&p("IZ")), p("ZZ"));
        assert_eq!(cx.conjugate(&p("YI")), p("YX"));
        // CNOT maps Y⊗Y → -X⊗Z
        assert_eq!(cx.conjugate(&p("YY")), p("-XZ"));
        let h = CliffordGate::hadamard();
        assert_eq!(h.conjugate(&p("Y")), p("-Y"));
        let s = CliffordGate::phase();
        assert_eq!(s.conjugate(&p("Y")), p("-X"));
        assert!(CliffordGate::from_strs(&["X", "X"]).is_err());
    }

    #[test]
    fn css_table_rows() {
        let g3 = css_gate(3 * 16).unwrap();
        let want: Vec<PauliOperator> = ["XI", "XX", "ZZ", "IZ"].iter().map(|s| p(s)).collect();
        assert_eq!(g3.images(), want);
        let g4 = css_gate(4 * 16).unwrap();
        let want: Vec<PauliOperator> = ["IX", "XX", "ZZ", "ZI"].iter().map(|s| p(s)).collect();
        assert_eq!(g4.images(), want);
        assert_eq!(css_gate(16).unwrap(), CliffordGate::swap());
        assert_eq!(css_gate(32).unwrap(), CliffordGate::cnot());
        assert!(css_gate(96).is_err());
    }

    #[test]
    fn table_is_a_bijection() {
        let t = two_qubit_table();
        assert_eq!(t.len(), TWO_QUBIT_CLIFFORDS);
        for (i, g) in t.iter().enumerate().step_by(37) {
            assert_eq!(g.table_index(), Some(i as u16));
        }
    }

    #[test]
    fn inverse_and_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for a in 1..6 {
            for _ in 0..50 {
                let g = random_clifford(a, &mut rng);
                assert!(g.then(&g.inverse()).is_identity());
                assert!(g.inverse().then(&g).is_identity());
            }
        }
    }

    #[test]
    fn tensor_acts_locally() {
        let g = CliffordGate::hadamard().tensor(&CliffordGate::phase());
        assert_eq!(g.conjugate(&p("XX")), p("ZY"));
    }

    #[test]
    fn core_is_swap_after_cz() {
        let c = dual_unitary_core();
        assert_eq!(c.conjugate(&p("XI")), p("ZX"));
        assert_eq!(c.conjugate(&p("ZI")), p("IZ"));
    }
}
