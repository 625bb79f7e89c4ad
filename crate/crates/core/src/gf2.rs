//! Affine subspaces of GF(2)^E given by linear constraints.
//!
//! A constraint row uses the same layout as symbolic sign words: bit 0 is the
//! right-hand side and bit `j + 1` the coefficient of coordinate `j`. The
//! constraint reads `Σ_j row_j · x_j = row_0`.

use rand::Rng;

#[inline]
pub fn row_words(coords: usize) -> usize {
    (coords + 1).div_ceil(64)
}

#[inline]
fn bit(row: &[u64], k: usize) -> bool {
    (row[k >> 6] >> (k & 63)) & 1 == 1
}

/// Echelon basis of a constraint system, built incrementally.
///
/// Rows are reduced against earlier pivots only, so pivot row `i` is free of
/// the pivot columns of rows `0..i` but may contain later ones.
#[derive(Clone, Debug)]
pub struct AffineSystem {
    coords: usize,
    words: usize,
    rows: Vec<u64>,
    pivots: Vec<usize>,
    consistent: bool,
    /// Columns preferred as pivots (eliminated first).
    priority: Vec<u64>,
}

impl AffineSystem {
    pub fn new(coords: usize) -> Self {
        let words = row_words(coords);
        Self { coords, words, rows: Vec::new(), pivots: Vec::new(), consistent: true, priority: vec![0; words] }
    }

    /// System whose pivots are taken from `cols` whenever possible, so that
    /// [`projection_rows`](Self::projection_rows) eliminates those coordinates.
    pub fn with_priority(coords: usize, cols: &[usize]) -> Self {
        let mut s = Self::new(coords);
        for &c in cols {
            let k = c + 1;
            s.priority[k >> 6] |= 1 << (k & 63);
        }
        s
    }

    pub fn coords(&self) -> usize {
        self.coords
    }

    pub fn words(&self) -> usize {
        self.words
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_consistent(&self) -> bool {
        self.consistent
    }

    /// Dimension of the solution set; `None` if empty.
    pub fn dim(&self) -> Option<usize> {
        self.consistent.then(|| self.coords - self.rank())
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.words..(i + 1) * self.words]
    }

    /// Add the constraint `row`. Returns false if it made the system empty.
    pub fn add(&mut self, row: &[u64]) -> bool {
        debug_assert_eq!(row.len(), self.words);
        let w = self.words;
        let mut r = row.to_vec();
        for (i, &p) in self.pivots.iter().enumerate() {
            if bit(&r, p) {
                let src = &self.rows[i * w..(i + 1) * w];
                for k in 0..w {
                    r[k] ^= src[k];
                }
            }
        }
        let lead = |mask: &dyn Fn(usize) -> u64| -> Option<usize> {
            for k in 0..w {
                let m = r[k] & mask(k) & if k == 0 { !1 } else { !0 };
                if m != 0 {
                    return Some(k * 64 + m.trailing_zeros() as usize);
                }
            }
            None
        };
        let piv = lead(&|k| self.priority[k]).or_else(|| lead(&|_| !0));
        match piv {
            Some(p) => {
                self.rows.extend_from_slice(&r);
                self.pivots.push(p);
                true
            }
            None => {
                if r[0] & 1 == 1 {
                    self.consistent = false;
                }
                self.consistent
            }
        }
    }

    /// Add every constraint of `other`.
    pub fn extend(&mut self, other: &AffineSystem) -> bool {
        for i in 0..other.rank() {
            self.add(other.row(i));
        }
        if !other.consistent {
            self.consistent = false;
        }
        self.consistent
    }

    /// Constraint `x_j = v`.
    pub fn fix(&mut self, j: usize, v: bool) -> bool {
        let mut r = vec![0u64; self.words];
        let k = j + 1;
        r[k >> 6] |= 1 << (k & 63);
        r[0] |= v as u64;
        self.add(&r)
    }

    /// Rows of the echelon basis that avoid every priority column. They
    /// generate the constraints of the projection that forgets those columns.
    pub fn projection_rows(&self) -> impl Iterator<Item = &[u64]> + '_ {
        (0..self.rank()).filter(move |&i| !bit(&self.priority, self.pivots[i])).map(move |i| self.row(i))
    }

    /// Number of pivots sitting on priority columns.
    pub fn priority_rank(&self) -> usize {
        self.pivots.iter().filter(|&&p| bit(&self.priority, p)).count()
    }

    /// Whether the point `x` (bit j+1 = coordinate j, bit 0 ignored) satisfies every constraint.
    pub fn contains(&self, x: &[u64]) -> bool {
        if !self.consistent {
            return false;
        }
        (0..self.rank()).all(|i| {
            let r = self.row(i);
            let mut acc = 0u32;
            for k in 0..self.words {
                let m = if k == 0 { !1 } else { !0 };
                acc += (r[k] & x[k] & m).count_ones();
            }
            (acc & 1 == 1) == (r[0] & 1 == 1)
        })
    }

    /// Uniform sample from the solution set (same bit layout as rows).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Vec<u64>> {
        if !self.consistent {
            return None;
        }
        let w = self.words;
        let mut x: Vec<u64> = (0..w).map(|_| rng.random()).collect();
        x[0] &= !1;
        let tail = (self.coords + 1) & 63;
        if tail != 0 {
            x[w - 1] &= (1u64 << tail) - 1;
        }
        for i in (0..self.rank()).rev() {
            let p = self.pivots[i];
            let r = self.row(i);
            let mut acc = 0u32;
            for k in 0..w {
                let mut m = if k == 0 { !1 } else { !0 };
                if k == p >> 6 {
                    m &= !(1u64 << (p & 63));
                }
                acc += (r[k] & x[k] & m).count_ones();
            }
            let v = (acc & 1) as u64 ^ (r[0] & 1);
            x[p >> 6] = (x[p >> 6] & !(1u64 << (p & 63))) | (v << (p & 63));
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn row(coords: usize, ones: &[usize], rhs: bool) -> Vec<u64> {
        let mut r = vec![0u64; row_words(coords)];
        for &j in ones {
            let k = j + 1;
            r[k >> 6] ^= 1 << (k & 63);
        }
        r[0] |= rhs as u64;
        r
    }

    fn brute(sys: &AffineSystem) -> Vec<u64> {
        let e = sys.coords();
        (0..1u64 << e).filter(|&v| sys.contains(&[v << 1])).collect()
    }

    #[test]
    fn rank_and_consistency() {
        let mut s = AffineSystem::new(3);
        assert!(s.add(&row(3, &[0, 1], true)));
        assert!(s.add(&row(3, &[1, 2], false)));
        assert!(s.add(&row(3, &[0, 2], true)));
        assert_eq!(s.rank(), 2);
        assert_eq!(s.dim(), Some(1));
        assert!(!s.add(&row(3, &[0, 2], false)));
        assert_eq!(s.dim(), None);
    }

    #[test]
    fn projection_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let e = 6;
            let mut s = AffineSystem::with_priority(e, &[4, 5]);
            for _ in 0..rng.random_range(0..6) {
                let ones: Vec<usize> = (0..e).filter(|_| rng.random()).collect();
                s.add(&row(e, &ones, rng.random()));
            }
            if !s.is_consistent() {
                continue;
            }
            let mut proj = AffineSystem::new(e);
            for r in s.projection_rows() {
                proj.add(r);
            }
            let sols = brute(&s);
            let shadow: std::collections::BTreeSet<u64> = sols.iter().map(|v| v & 0b1111).collect();
            for v in 0..64u64 {
                assert_eq!(proj.contains(&[v << 1]), shadow.contains(&(v & 0b1111)));
            }
            assert_eq!(sols.len(), 1 << s.dim().unwrap());
        }
    }

    #[test]
    fn samples_are_uniform_solutions() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let e = 5;
        let mut s = AffineSystem::new(e);
        s.add(&row(e, &[0, 3], true));
        s.add(&row(e, &[1, 2, 4], false));
        let mut counts = std::collections::HashMap::new();
        for _ in 0..8000 {
            let x = s.sample(&mut rng).unwrap();
            assert!(s.contains(&x));
            *counts.entry(x[0]).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 8);
        for &c in counts.values() {
            assert!((c as f64 - 1000.0).abs() < 150.0);
        }
    }
}
