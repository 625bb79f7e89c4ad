//! Closed forms for the averaged causal influence in Brownian GUE dynamics
//! with initial state `ρ_i` and final postselection `ρ_f`.
//!
//! Every coefficient is evaluated as `exp` of a log-domain expression so that
//! `d_tot` as large as `2^300` neither overflows nor loses the `−1` terms.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BgueError {
    #[error("{0} must be an integer ≥ {1}, got {2}")]
    Dimension(&'static str, u32, f64),
    #[error("d_A·d_B = {0} exceeds d_tot = {1}")]
    Product(f64, f64),
    #[error("{0} = {1} outside [0, ln d_tot]")]
    Entropy(&'static str, f64),
    #[error("purity_f = {0} outside [1/d_tot, 1]")]
    Purity(f64),
    #[error("purity_f = {purity} disagrees with S2_f (e^-S2_f = {from_entropy})")]
    Inconsistent { purity: f64, from_entropy: f64 },
    #[error("delta_t = {0} must be ≥ 0")]
    Time(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BgueParams {
    pub d_a: f64,
    pub d_b: f64,
    pub d_tot: f64,
    pub s2_i: f64,
    pub s2_f: f64,
    pub purity_f: f64,
    pub delta_t: f64,
}

/// `ln(d² − 1)` without cancellation for large `d`.
fn ln_sq_minus_one(d: f64) -> f64 {
    2.0 * d.ln() + (-(d * d).recip()).ln_1p()
}

fn ln_sq_plus_one(d: f64) -> f64 {
    2.0 * d.ln() + (d * d).recip().ln_1p()
}

fn check_dim(name: &'static str, d: f64, min: u32) -> Result<(), BgueError> {
    if !d.is_finite() || d.fract() != 0.0 || d < min as f64 {
        return Err(BgueError::Dimension(name, min, d));
    }
    Ok(())
}

impl BgueParams {
    /// Parameters with `purity_f = e^{−S2_f}`.
    pub fn new(d_a: f64, d_b: f64, d_tot: f64, s2_i: f64, s2_f: f64, delta_t: f64) -> Result<Self, BgueError> {
        let p = BgueParams { d_a, d_b, d_tot, s2_i, s2_f, purity_f: (-s2_f).exp(), delta_t };
        p.validate()?;
        Ok(p)
    }

    /// Parameters given by purities `tr ρ²` instead of entropies.
    pub fn from_purities(d_a: f64, d_b: f64, d_tot: f64, purity_i: f64, purity_f: f64, delta_t: f64) -> Result<Self, BgueError> {
        let p = BgueParams { d_a, d_b, d_tot, s2_i: -purity_i.ln(), s2_f: -purity_f.ln(), purity_f, delta_t };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), BgueError> {
        check_dim("d_A", self.d_a, 2)?;
        check_dim("d_B", self.d_b, 1)?;
        check_dim("d_tot", self.d_tot, 2)?;
        if self.d_a * self.d_b > self.d_tot {
            return Err(BgueError::Product(self.d_a * self.d_b, self.d_tot));
        }
        let smax = self.d_tot.ln() * (1.0 + 1e-12);
        for (name, s) in [("S2_i", self.s2_i), ("S2_f", self.s2_f)] {
            if !(0.0..=smax).contains(&s) {
                return Err(BgueError::Entropy(name, s));
            }
        }
        let lo = self.d_tot.recip() * (1.0 - 1e-12);
        if !(lo..=1.0).contains(&self.purity_f) {
            return Err(BgueError::Purity(self.purity_f));
        }
        let from_entropy = (-self.s2_f).exp();
        if (from_entropy - self.purity_f).abs() > 1e-12 * self.purity_f.max(1e-300) {
            return Err(BgueError::Inconsistent { purity: self.purity_f, from_entropy });
        }
        if !(self.delta_t >= 0.0) {
            return Err(BgueError::Time(self.delta_t));
        }
        Ok(())
    }

    /// `e^{−S2_i} − e^{−S2_f}`.
    pub fn purity_gap(&self) -> f64 {
        (-self.s2_i).exp() - (-self.s2_f).exp()
    }
}

pub fn ln_alpha_1(p: &BgueParams) -> f64 {
    let (a, d) = (p.d_a, p.d_tot);
    2.0 * ln_sq_minus_one(a) - 4.0 * a.ln() - ln_sq_plus_one(a) + d.ln() - 2.0 * ln_sq_minus_one(d)
}

/// Zero for a trivial probe `d_B = 1`.
pub fn ln_alpha_2(p: &BgueParams) -> f64 {
    let (a, b, d) = (p.d_a, p.d_b, p.d_tot);
    if b == 1.0 {
        return f64::NEG_INFINITY;
    }
    ln_sq_minus_one(a) + ln_sq_minus_one(b) - 2.0 * a.ln() - 2.0 * b.ln() - ln_sq_plus_one(b) + d.ln()
        - 2.0 * ln_sq_minus_one(d)
}

pub fn ln_alpha_3(p: &BgueParams) -> f64 {
    let (a, d) = (p.d_a, p.d_tot);
    ln_sq_minus_one(a) - 2.0 * a.ln() - ln_sq_plus_one(a) - d.ln() - ln_sq_minus_one(d)
}

/// `ln α₄`; `−∞` when `ρ_f` is maximally mixed.
pub fn ln_alpha_4(p: &BgueParams) -> f64 {
    let (a, d) = (p.d_a, p.d_tot);
    let excess = p.purity_f - d.recip();
    if excess <= 0.0 {
        return f64::NEG_INFINITY;
    }
    // d²/d_A² − 1 and (d² + 1) − 2d = (d − 1)²
    let ratio = d / a;
    ln_sq_minus_one(a) + ln_sq_minus_one(ratio) - 2.0 * a.ln() - ln_sq_plus_one(a) - 3.0 * ln_sq_minus_one(d)
        + excess.ln()
        + 2.0 * (d - 1.0).ln()
}

pub fn alpha_1(p: &BgueParams) -> f64 {
    ln_alpha_1(p).exp()
}

pub fn alpha_2(p: &BgueParams) -> f64 {
    ln_alpha_2(p).exp()
}

pub fn alpha_3(p: &BgueParams) -> f64 {
    ln_alpha_3(p).exp()
}

pub fn alpha_4(p: &BgueParams) -> f64 {
    ln_alpha_4(p).exp()
}

/// Long-time difference, A and B on the same region.
pub fn delta_ci_1(p: &BgueParams) -> Result<f64, BgueError> {
    p.validate()?;
    Ok(alpha_1(p) * p.purity_gap())
}

/// Long-time difference, A and B on disjoint regions.
pub fn delta_ci_2(p: &BgueParams) -> Result<f64, BgueError> {
    p.validate()?;
    Ok(alpha_2(p) * p.purity_gap())
}

/// Instantaneous (`δt = 0⁺`) difference, same region. Disjoint regions have
/// no influence at `δt = 0⁺`.
pub fn delta_ci_3(p: &BgueParams) -> Result<f64, BgueError> {
    p.validate()?;
    Ok(alpha_3(p) * p.purity_gap())
}

/// `α₄ e^{−δt}`.
pub fn decay_amplitude(p: &BgueParams) -> Result<f64, BgueError> {
    p.validate()?;
    Ok((ln_alpha_4(p) - p.delta_t).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BgueRow {
    pub params: BgueParams,
    pub delta_ci_1: f64,
    pub delta_ci_2: f64,
    pub delta_ci_3: f64,
    pub decay: f64,
}

pub fn evaluate(p: &BgueParams) -> Result<BgueRow, BgueError> {
    Ok(BgueRow {
        params: *p,
        delta_ci_1: delta_ci_1(p)?,
        delta_ci_2: delta_ci_2(p)?,
        delta_ci_3: delta_ci_3(p)?,
        decay: decay_amplitude(p)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_values() {
        let p = BgueParams::from_purities(2.0, 2.0, 4.0, 1.0, 0.25, 0.0).unwrap();
        assert!((alpha_1(&p) - 1.0 / 500.0).abs() < 1e-17);
        assert!((delta_ci_1(&p).unwrap() - 0.0015).abs() < 1e-17);
        assert!((alpha_3(&p) - 1.0 / 400.0).abs() < 1e-17);
    }

    #[test]
    fn trivial_probe_and_mixed_final() {
        let p = BgueParams::from_purities(2.0, 1.0, 8.0, 1.0, 0.5, 0.0).unwrap();
        assert_eq!(delta_ci_2(&p).unwrap(), 0.0);
        let q = BgueParams::from_purities(2.0, 2.0, 8.0, 1.0, 0.125, 0.0).unwrap();
        assert_eq!(decay_amplitude(&q).unwrap(), 0.0);
    }

    #[test]
    fn huge_dimension() {
        let d = 2f64.powi(20);
        let p = BgueParams::from_purities(2.0, 2.0, d, 1.0, 1.0, 0.0).unwrap();
        assert!(alpha_4(&p) > 0.0);
        assert!(alpha_4(&p).is_finite());
    }

    #[test]
    fn validation() {
        assert!(BgueParams::new(2.5, 2.0, 8.0, 0.0, 0.0, 0.0).is_err());
        assert!(BgueParams::new(4.0, 4.0, 8.0, 0.0, 0.0, 0.0).is_err());
        assert!(BgueParams::new(2.0, 2.0, 8.0, 3.0, 0.0, 0.0).is_err());
        assert!(BgueParams::new(2.0, 2.0, 8.0, 0.0, 0.0, -1.0).is_err());
    }
}
