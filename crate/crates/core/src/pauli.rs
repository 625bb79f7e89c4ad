//! Signed Hermitian Pauli strings in the symplectic (x|z) bit representation.
//!
//! A Pauli string with bits `(x, z)` and sign `s` denotes the Hermitian operator
//!
//! ```text
//!   s · i^{|x & z|} · X^{x_0} Z^{z_0} ⊗ X^{x_1} Z^{z_1} ⊗ ...
//! ```
//!
//! so that a qubit with both bits set carries a `Y`. Because the Hermitian
//! form factorizes over qubits, replacing the bits on a subset of qubits by
//! the (Hermitian) image of a local Clifford only ever multiplies the sign by
//! ±1. Imaginary phases only show up transiently while multiplying strings.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of 64-bit words needed to hold `n` qubits.
#[inline]
pub fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

#[inline]
pub(crate) fn get_bit(words: &[u64], i: usize) -> bool {
    (words[i >> 6] >> (i & 63)) & 1 == 1
}

#[inline]
pub(crate) fn set_bit(words: &mut [u64], i: usize, v: bool) {
    let m = 1u64 << (i & 63);
    if v {
        words[i >> 6] |= m;
    } else {
        words[i >> 6] &= !m;
    }
}

/// Symplectic form `x1·z2 + z1·x2 (mod 2)`; zero iff the strings commute.
#[inline]
pub fn symplectic(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> bool {
    let mut acc = 0u64;
    for i in 0..x1.len() {
        acc ^= (x1[i] & z2[i]) ^ (z1[i] & x2[i]);
    }
    acc.count_ones() & 1 == 1
}

/// Power of `i` (mod 4) picked up by the Hermitian product `P1 · P2`,
/// relative to the Hermitian form of the product bits.
///
/// Returns 0 or 2 for commuting strings and 1 or 3 for anticommuting ones.
#[inline]
pub fn product_phase(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> u32 {
    let mut yy1 = 0u32;
    let mut yy2 = 0u32;
    let mut cross = 0u32;
    let mut yy = 0u32;
    for i in 0..x1.len() {
        yy1 += (x1[i] & z1[i]).count_ones();
        yy2 += (x2[i] & z2[i]).count_ones();
        cross += (z1[i] & x2[i]).count_ones();
        yy += ((x1[i] ^ x2[i]) & (z1[i] ^ z2[i])).count_ones();
    }
    // i^{yy1} X^x1 Z^z1 · i^{yy2} X^x2 Z^z2 = i^{yy1+yy2} (-1)^{z1·x2} X^{x1+x2} Z^{z1+z2}
    (yy1 + yy2 + 2 * cross + 4 * 64 * x1.len() as u32 - yy) & 3
}

/// Sign flip (true = multiply by −1) of the product of two commuting
/// Hermitian strings. Panics in debug builds if they anticommute.
#[inline]
pub(crate) fn commuting_product_flip(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> bool {
    let e = product_phase(x1, z1, x2, z2);
    debug_assert!(e & 1 == 0, "product of anticommuting generators");
    e == 2
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PauliError {
    #[error("qubit index {index} out of range for {n} qubits")]
    OutOfRange { index: usize, n: usize },
    #[error("cannot parse Pauli string {0:?}")]
    Parse(String),
    #[error("Pauli strings act on different qubit counts ({0} vs {1})")]
    Length(usize, usize),
    #[error("product of anticommuting Paulis is not Hermitian")]
    Anticommuting,
}

/// Single-qubit Pauli label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli1 {
    I,
    X,
    Y,
    Z,
}

impl Pauli1 {
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli1::I => (false, false),
            Pauli1::X => (true, false),
            Pauli1::Y => (true, true),
            Pauli1::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli1::I,
            (true, false) => Pauli1::X,
            (true, true) => Pauli1::Y,
            (false, true) => Pauli1::Z,
        }
    }
}

/// A signed, Hermitian n-qubit Pauli string.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    negative: bool,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        Self { n, x: vec![0; w], z: vec![0; w], negative: false }
    }

    /// `+P` acting on `site` only.
    pub fn single(n: usize, site: usize, p: Pauli1) -> Self {
        let mut out = Self::identity(n);
        out.set(site, p);
        out
    }

    pub fn from_bits(n: usize, x: Vec<u64>, z: Vec<u64>, negative: bool) -> Self {
        assert_eq!(x.len(), words_for(n));
        assert_eq!(z.len(), words_for(n));
        Self { n, x, z, negative }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    /// Sign as ±1.
    pub fn sign(&self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn set_negative(&mut self, negative: bool) {
        self.negative = negative;
    }

    pub fn negated(mut self) -> Self {
        self.negative = !self.negative;
        self
    }

    pub fn get(&self, site: usize) -> Pauli1 {
        Pauli1::from_bits(get_bit(&self.x, site), get_bit(&self.z, site))
    }

    pub fn set(&mut self, site: usize, p: Pauli1) {
        let (x, z) = p.bits();
        set_bit(&mut self.x, site, x);
        set_bit(&mut self.z, site, z);
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    /// True if every non-identity factor is `Z` (diagonal in the computational basis).
    pub fn is_z_type(&self) -> bool {
        self.x.iter().all(|&w| w == 0)
    }

    pub fn is_x_type(&self) -> bool {
        self.z.iter().all(|&w| w == 0)
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        assert_eq!(self.n, other.n);
        !symplectic(&self.x, &self.z, &other.x, &other.z)
    }

    /// Hermitian product `self · other`; fails if the two anticommute.
    pub fn try_mul(&self, other: &Self) -> Result<Self, PauliError> {
        if self.n != other.n {
            return Err(PauliError::Length(self.n, other.n));
        }
        let e = product_phase(&self.x, &self.z, &other.x, &other.z);
        if e & 1 == 1 {
            return Err(PauliError::Anticommuting);
        }
        let x = self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect();
        let z = self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect();
        Ok(Self { n: self.n, x, z, negative: self.negative ^ other.negative ^ (e == 2) })
    }

    /// Same operator up to sign.
    pub fn same_support(&self, other: &Self) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    /// Restrict to a list of sites, producing a Pauli on `sites.len()` qubits.
    /// The sign is kept.
    pub fn restrict(&self, sites: &[usize]) -> Self {
        let mut out = Self::identity(sites.len());
        for (k, &s) in sites.iter().enumerate() {
            out.set(k, self.get(s));
        }
        out.negative = self.negative;
        out
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.negative { "-" } else { "+" })?;
        for i in 0..self.n {
            let c = match self.get(i) {
                Pauli1::I => 'I',
                Pauli1::X => 'X',
                Pauli1::Y => 'Y',
                Pauli1::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for PauliOperator {
    type Err = PauliError;

    /// Parses strings like `+XIZ`, `-YY`, or `ZZI` (sign optional); qubit 0 first.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (negative, body) = match s.as_bytes().first() {
            Some(b'+') => (false, &s[1..]),
            Some(b'-') => (true, &s[1..]),
            _ => (false, s),
        };
        let mut out = Self::identity(body.len());
        for (i, c) in body.chars().enumerate() {
            let p = match c {
                'I' | '_' | '.' => Pauli1::I,
                'X' => Pauli1::X,
                'Y' => Pauli1::Y,
                'Z' => Pauli1::Z,
                _ => return Err(PauliError::Parse(s.to_string())),
            };
            out.set(i, p);
        }
        out.negative = negative;
        Ok(out)
    }
}

impl Serialize for PauliOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
