//! Mixed stabilizer states stored as a list of independent commuting generators.
//!
//! Rows are bit-packed: each generator owns `w` words of x bits, `w` words of
//! z bits and `sw` words of sign. Sign bit 0 is the constant part; a state
//! built with `nvars > 0` also carries affine sign terms, bit `v + 1` standing
//! for outcome variable `v`. Concrete simulation uses `nvars = 0`, the
//! symbolic outcome tracker uses the same kernels with wider sign rows.

use rand::Rng;
use thiserror::Error;

use crate::gates::CliffordGate;
use crate::pauli::{commuting_product_flip, get_bit, symplectic, words_for, PauliOperator};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StateError {
    #[error("qubit index {index} out of range for {n} qubits")]
    OutOfRange { index: usize, n: usize },
    #[error("gate of arity {arity} applied to {sites} sites")]
    Arity { arity: usize, sites: usize },
    #[error("repeated qubit index {0}")]
    Repeated(usize),
    #[error("generators do not commute")]
    NonCommuting,
    #[error("generators are not independent")]
    Dependent,
    #[error("generator acts on {got} qubits, expected {n}")]
    Length { got: usize, n: usize },
    #[error("region is empty")]
    EmptyRegion,
}

/// Born probability of a Z-basis outcome on a stabilizer state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Probability {
    One,
    Half,
}

impl Probability {
    pub fn value(self) -> f64 {
        match self {
            Probability::One => 1.0,
            Probability::Half => 0.5,
        }
    }
}

/// Sign assigned to a freshly created `±Z` generator after a random outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fresh {
    Bit(bool),
    Var(usize),
}

/// Which branch a Z measurement took.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZKind {
    /// `±Z` already in the group; the sign expression was written out.
    Determined,
    /// Some generator anticommuted with `Z`; rank unchanged.
    Flipped,
    /// `Z` commuted with everything but was missing; rank grew by one.
    Appended,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerState {
    n: usize,
    w: usize,
    sw: usize,
    rows: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    s: Vec<u64>,
}

impl StabilizerState {
    /// Maximally mixed state on `n` qubits (no generators).
    pub fn maximally_mixed(n: usize) -> Self {
        Self::maximally_mixed_symbolic(n, 0)
    }

    pub fn maximally_mixed_symbolic(n: usize, nvars: usize) -> Self {
        let w = words_for(n);
        let sw = (nvars + 1).div_ceil(64);
        Self { n, w, sw, rows: 0, x: Vec::new(), z: Vec::new(), s: Vec::new() }
    }

    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Self {
        let mut st = Self::maximally_mixed(n);
        for q in 0..n {
            st.push_z(q, false);
        }
        st
    }

    /// State stabilized by the given generators, which must commute and be independent.
    pub fn from_generators(n: usize, gens: &[PauliOperator]) -> Result<Self, StateError> {
        Self::from_generators_symbolic(n, 0, gens)
    }

    /// As [`from_generators`](Self::from_generators), with room for `nvars` sign variables.
    pub fn from_generators_symbolic(n: usize, nvars: usize, gens: &[PauliOperator]) -> Result<Self, StateError> {
        let mut st = Self::maximally_mixed_symbolic(n, nvars);
        for g in gens {
            if g.num_qubits() != n {
                return Err(StateError::Length { got: g.num_qubits(), n });
            }
            st.push_row(g.x_words(), g.z_words(), g.is_negative());
        }
        for i in 0..st.rows {
            for j in 0..i {
                if symplectic(st.xr(i), st.zr(i), st.xr(j), st.zr(j)) {
                    return Err(StateError::NonCommuting);
                }
            }
        }
        if st.rank_of_rows() != st.rows {
            return Err(StateError::Dependent);
        }
        Ok(st)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Number of independent generators r.
    pub fn rank(&self) -> usize {
        self.rows
    }

    pub fn is_pure(&self) -> bool {
        self.rows == self.n
    }

    /// Number of sign variables this state can carry.
    pub fn sign_width(&self) -> usize {
        self.sw * 64 - 1
    }

    /// Generators with their constant signs. Symbolic sign terms are dropped.
    pub fn generators(&self) -> Vec<PauliOperator> {
        (0..self.rows)
            .map(|i| {
                PauliOperator::from_bits(
                    self.n,
                    self.xr(i).to_vec(),
                    self.zr(i).to_vec(),
                    self.s[i * self.sw] & 1 == 1,
                )
            })
            .collect()
    }

    /// Sign words of generator `i` (bit 0 constant, bit v+1 variable v).
    pub fn sign_expr(&self, i: usize) -> &[u64] {
        &self.s[i * self.sw..(i + 1) * self.sw]
    }

    #[inline]
    fn xr(&self, i: usize) -> &[u64] {
        &self.x[i * self.w..(i + 1) * self.w]
    }

    #[inline]
    fn zr(&self, i: usize) -> &[u64] {
        &self.z[i * self.w..(i + 1) * self.w]
    }

    fn push_row(&mut self, x: &[u64], z: &[u64], negative: bool) {
        self.x.extend_from_slice(x);
        self.z.extend_from_slice(z);
        let base = self.s.len();
        self.s.resize(base + self.sw, 0);
        self.s[base] = negative as u64;
        self.rows += 1;
    }

    fn push_z(&mut self, q: usize, negative: bool) {
        let base = self.rows * self.w;
        self.x.resize(base + self.w, 0);
        self.z.resize(base + self.w, 0);
        self.z[base + (q >> 6)] |= 1 << (q & 63);
        let sb = self.s.len();
        self.s.resize(sb + self.sw, 0);
        self.s[sb] = negative as u64;
        self.rows += 1;
    }

    fn set_row_z(&mut self, i: usize, q: usize, fresh: Fresh) {
        let w = self.w;
        self.x[i * w..(i + 1) * w].fill(0);
        self.z[i * w..(i + 1) * w].fill(0);
        self.z[i * w + (q >> 6)] |= 1 << (q & 63);
        let sw = self.sw;
        let s = &mut self.s[i * sw..(i + 1) * sw];
        s.fill(0);
        match fresh {
            Fresh::Bit(b) => s[0] = b as u64,
            Fresh::Var(v) => {
                let k = v + 1;
                s[k >> 6] |= 1 << (k & 63);
            }
        }
    }

    /// Row `dst` ← row `src` · row `dst`. The rows must commute.
    #[inline]
    fn rowmul(&mut self, dst: usize, src: usize) {
        let w = self.w;
        let flip = {
            let (xs, zs) = (self.xr(src), self.zr(src));
            let (xd, zd) = (self.xr(dst), self.zr(dst));
            commuting_product_flip(xs, zs, xd, zd)
        };
        for k in 0..w {
            self.x[dst * w + k] ^= self.x[src * w + k];
            self.z[dst * w + k] ^= self.z[src * w + k];
        }
        let sw = self.sw;
        for k in 0..sw {
            self.s[dst * sw + k] ^= self.s[src * sw + k];
        }
        self.s[dst * sw] ^= flip as u64;
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let w = self.w;
        for k in 0..w {
            self.x.swap(a * w + k, b * w + k);
            self.z.swap(a * w + k, b * w + k);
        }
        let sw = self.sw;
        for k in 0..sw {
            self.s.swap(a * sw + k, b * sw + k);
        }
    }

    fn truncate_rows(&mut self, r: usize) {
        self.rows = r;
        self.x.truncate(r * self.w);
        self.z.truncate(r * self.w);
        self.s.truncate(r * self.sw);
    }

    fn check_site(&self, q: usize) -> Result<(), StateError> {
        if q >= self.n {
            Err(StateError::OutOfRange { index: q, n: self.n })
        } else {
            Ok(())
        }
    }

    fn check_sites(&self, sites: &[usize]) -> Result<(), StateError> {
        for (i, &q) in sites.iter().enumerate() {
            self.check_site(q)?;
            if sites[..i].contains(&q) {
                return Err(StateError::Repeated(q));
            }
        }
        Ok(())
    }

    /// Conjugate every generator by `gate` acting on `sites`.
    pub fn apply_gate(&mut self, gate: &CliffordGate, sites: &[usize]) -> Result<(), StateError> {
        if gate.arity() != sites.len() {
            return Err(StateError::Arity { arity: gate.arity(), sites: sites.len() });
        }
        self.check_sites(sites)?;
        self.apply_gate_unchecked(gate, sites);
        self.debug_check();
        Ok(())
    }

    /// Same as [`apply_gate`](Self::apply_gate) without argument validation.
    pub fn apply_gate_unchecked(&mut self, gate: &CliffordGate, sites: &[usize]) {
        let w = self.w;
        let sw = self.sw;
        for i in 0..self.rows {
            let mut xl = 0u64;
            let mut zl = 0u64;
            for (k, &q) in sites.iter().enumerate() {
                let (wi, b) = (i * w + (q >> 6), q & 63);
                xl |= ((self.x[wi] >> b) & 1) << k;
                zl |= ((self.z[wi] >> b) & 1) << k;
            }
            if xl == 0 && zl == 0 {
                continue;
            }
            let (xo, zo, flip) = gate.image_bits(xl, zl);
            for (k, &q) in sites.iter().enumerate() {
                let (wi, b) = (i * w + (q >> 6), q & 63);
                let m = 1u64 << b;
                self.x[wi] = (self.x[wi] & !m) | (((xo >> k) & 1) << b);
                self.z[wi] = (self.z[wi] & !m) | (((zo >> k) & 1) << b);
            }
            self.s[i * sw] ^= flip as u64;
        }
    }

    /// Z measurement kernel shared by the concrete and symbolic routes.
    ///
    /// On `Determined`, the sign words of the `±Z_q` group element are copied
    /// into `expr` (length `sw`), so the outcome is that affine function.
    pub fn measure_z_kernel(&mut self, q: usize, fresh: Fresh, expr: &mut [u64]) -> ZKind {
        let (wq, bq) = (q >> 6, q & 63);
        let w = self.w;
        let mut pivot = None;
        for i in 0..self.rows {
            if (self.x[i * w + wq] >> bq) & 1 == 1 {
                match pivot {
                    None => pivot = Some(i),
                    Some(p) => self.rowmul(i, p),
                }
            }
        }
        if let Some(p) = pivot {
            self.set_row_z(p, q, fresh);
            self.debug_check();
            return ZKind::Flipped;
        }
        if self.z_member_sign(q, expr) {
            return ZKind::Determined;
        }
        self.push_z(q, false);
        let r = self.rows - 1;
        self.set_row_z(r, q, fresh);
        self.debug_check();
        ZKind::Appended
    }

    /// Whether `±Z_q` lies in the group; if so, writes its sign into `expr`.
    /// Assumes `Z_q` commutes with every generator.
    fn z_member_sign(&self, q: usize, expr: &mut [u64]) -> bool {
        let w = self.w;
        // Rows with no z outside q and no x at all; reduce on those columns.
        let mut fx = vec![!0u64; w];
        let mut fz = vec![!0u64; w];
        fx[w - 1] = tail_mask(self.n);
        fz[w - 1] = tail_mask(self.n);
        fz[q >> 6] &= !(1u64 << (q & 63));
        let mut scratch = self.clone();
        let kernel = scratch.eliminate(&fx, &fz);
        for i in kernel {
            if get_bit(scratch.zr(i), q) {
                expr.copy_from_slice(scratch.sign_expr(i));
                return true;
            }
        }
        false
    }

    /// Gaussian elimination against forbidden columns. Returns the indices of
    /// rows left with no forbidden support; together they generate the
    /// subgroup of elements avoiding those columns.
    fn eliminate(&mut self, fx: &[u64], fz: &[u64]) -> Vec<usize> {
        let w = self.w;
        // (row, word, mask, is_x)
        let mut pivots: Vec<(usize, usize, u64, bool)> = Vec::new();
        let mut kernel = Vec::new();
        for i in 0..self.rows {
            for pi in 0..pivots.len() {
                let (p, k, m, is_x) = pivots[pi];
                let hit = if is_x { self.x[i * w + k] & m } else { self.z[i * w + k] & m };
                if hit != 0 {
                    self.rowmul(i, p);
                }
            }
            let mut found = None;
            for k in 0..w {
                let hx = self.x[i * w + k] & fx[k];
                if hx != 0 {
                    found = Some((k, hx & hx.wrapping_neg(), true));
                    break;
                }
                let hz = self.z[i * w + k] & fz[k];
                if hz != 0 {
                    found = Some((k, hz & hz.wrapping_neg(), false));
                    break;
                }
            }
            match found {
                Some((k, m, is_x)) => pivots.push((i, k, m, is_x)),
                None => kernel.push(i),
            }
        }
        kernel
    }

    /// Keep only the listed rows (in order).
    fn retain_rows(&mut self, keep: &[usize]) {
        for (dst, &src) in keep.iter().enumerate() {
            self.swap_rows(dst, src);
        }
        self.truncate_rows(keep.len());
    }

    /// Sample a Z-basis measurement on `site` by the Born rule.
    pub fn measure_z<R: Rng + ?Sized>(
        &mut self,
        site: usize,
        rng: &mut R,
    ) -> Result<(bool, Probability), StateError> {
        self.check_site(site)?;
        let mut expr = vec![0u64; self.sw];
        let coin: bool = rng.random();
        match self.measure_z_kernel(site, Fresh::Bit(coin), &mut expr) {
            ZKind::Determined => Ok((expr[0] & 1 == 1, Probability::One)),
            _ => Ok((coin, Probability::Half)),
        }
    }

    /// Project onto Z outcome `outcome` at `site`. Returns `false` (leaving the
    /// state untouched) when that outcome has zero probability.
    pub fn postselect_z(&mut self, site: usize, outcome: bool) -> Result<bool, StateError> {
        self.check_site(site)?;
        let mut expr = vec![0u64; self.sw];
        match self.measure_z_kernel(site, Fresh::Bit(outcome), &mut expr) {
            ZKind::Determined => Ok(expr[0] & 1 == outcome as u64),
            _ => Ok(true),
        }
    }

    /// Born probability of `outcome` at `site` without changing the state.
    pub fn z_probability(&self, site: usize, outcome: bool) -> Result<f64, StateError> {
        self.check_site(site)?;
        let mut scratch = self.clone();
        let mut expr = vec![0u64; self.sw];
        Ok(match scratch.measure_z_kernel(site, Fresh::Bit(outcome), &mut expr) {
            ZKind::Determined => {
                if expr[0] & 1 == outcome as u64 {
                    1.0
                } else {
                    0.0
                }
            }
            _ => 0.5,
        })
    }

    /// Replace the state on `region` by the maximally mixed state:
    /// `ρ ↦ Tr_region(ρ) ⊗ 1/2^|region|`.
    pub fn depolarize_region(&mut self, region: &[usize]) -> Result<(), StateError> {
        if region.is_empty() {
            return Err(StateError::EmptyRegion);
        }
        self.check_sites(region)?;
        self.depolarize_unchecked(region);
        Ok(())
    }

    pub fn depolarize_unchecked(&mut self, region: &[usize]) {
        let w = self.w;
        let mut f = vec![0u64; w];
        for &q in region {
            f[q >> 6] |= 1 << (q & 63);
        }
        let kernel = self.eliminate(&f, &f);
        self.retain_rows(&kernel);
        self.debug_check();
    }

    /// Number k of independent Z-type constraints on `sites`: the outcome
    /// distribution there is uniform over `2^(|sites| − k)` outcomes.
    pub fn z_support_dimension(&self, sites: &[usize]) -> Result<usize, StateError> {
        self.check_sites(sites)?;
        let w = self.w;
        let mut fx = vec![!0u64; w];
        let mut fz = vec![!0u64; w];
        fx[w - 1] = tail_mask(self.n);
        fz[w - 1] = tail_mask(self.n);
        for &q in sites {
            fz[q >> 6] &= !(1u64 << (q & 63));
        }
        let mut scratch = self.clone();
        Ok(scratch.eliminate(&fx, &fz).len())
    }

    /// Reduced state on `sites` (relabelled 0..sites.len()).
    pub fn reduced(&self, sites: &[usize]) -> Result<StabilizerState, StateError> {
        self.check_sites(sites)?;
        let w = self.w;
        let mut f = vec![!0u64; w];
        f[w - 1] = tail_mask(self.n);
        for &q in sites {
            f[q >> 6] &= !(1u64 << (q & 63));
        }
        let mut scratch = self.clone();
        let kernel = scratch.eliminate(&f, &f);
        let gens: Vec<PauliOperator> = kernel
            .iter()
            .map(|&i| {
                PauliOperator::from_bits(
                    self.n,
                    scratch.xr(i).to_vec(),
                    scratch.zr(i).to_vec(),
                    scratch.s[i * self.sw] & 1 == 1,
                )
                .restrict(sites)
            })
            .collect();
        StabilizerState::from_generators(sites.len(), &gens)
    }

    /// Second Rényi (= von Neumann) entropy of the reduced state on `sites`, in bits.
    pub fn entropy(&self, sites: &[usize]) -> Result<usize, StateError> {
        Ok(sites.len() - self.reduced(sites)?.rank())
    }

    fn rank_of_rows(&self) -> usize {
        let w = self.w;
        let mut f = vec![!0u64; w];
        f[w - 1] = tail_mask(self.n);
        let mut scratch = self.clone();
        self.rows - scratch.eliminate(&f, &f).len()
    }

    /// Verify pairwise commutation and independence; panics on violation.
    pub fn assert_invariants(&self) {
        for i in 0..self.rows {
            for j in 0..i {
                assert!(
                    !symplectic(self.xr(i), self.zr(i), self.xr(j), self.zr(j)),
                    "generators {i} and {j} anticommute"
                );
            }
        }
        assert_eq!(self.rank_of_rows(), self.rows, "generators are dependent");
        assert!(self.rows <= self.n);
    }

    #[inline]
    fn debug_check(&self) {
        if cfg!(any(test, debug_assertions)) {
            self.assert_invariants();
        }
    }
}

#[inline]
fn tail_mask(n: usize) -> u64 {
    match n & 63 {
        0 if n > 0 => !0,
        0 => 0,
        r => (1u64 << r) - 1,
    }
}
