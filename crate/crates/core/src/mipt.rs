//! Correlation time of the influence in hybrid circuits and its finite-size
//! collapse `τ/T = f((p − p_c) T^{1/ν})`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::CircuitSpec;
use crate::engine::{instance_chi_over_time, trial_rng, EngineError, LIVELOCK_FACTOR};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("only {usable} usable points, need at least {needed}")]
    InsufficientPoints { usable: usize, needed: usize },
    #[error("need τ values for at least 3 distinct T, got {0}")]
    TooFewSizes(usize),
    #[error("need at least 5 values of p, got {0}")]
    TooFewRates(usize),
    #[error("empty search range for {0}")]
    EmptyRange(&'static str),
}

/// Spatially averaged `χ̄(t)` with per-time standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub t_a: f64,
    pub p: f64,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub seed: u64,
    pub trials: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Points with `|t − t_A| ≤ window` are excluded.
    pub window: f64,
    /// Points with `1 − χ̄ < noise_sigmas · stderr` are excluded.
    pub noise_sigmas: f64,
    pub min_points: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { window: 1.0, noise_sigmas: 3.0, min_points: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauFit {
    /// `+∞` when the data do not decay.
    pub tau: f64,
    pub amplitude: f64,
    /// Weighted residual sum of squares in log space.
    pub residual: f64,
    pub points: usize,
    /// Slope was non-negative.
    pub non_decaying: bool,
}

/// Weighted least squares of `ln(1 − χ̄)` against `|t − t_A|`.
pub fn fit_correlation_time(curve: &DecayCurve, opts: &FitOptions) -> Result<TauFit, FitError> {
    let mut pts = Vec::new();
    for ((&t, &v), &se) in curve.times.iter().zip(&curve.values).zip(&curve.stderr) {
        let d = (t - curve.t_a).abs();
        let y = 1.0 - v;
        if d <= opts.window || y <= 0.0 || y < opts.noise_sigmas * se {
            continue;
        }
        pts.push((d, y.ln(), se / y));
    }
    if pts.len() < opts.min_points {
        return Err(FitError::InsufficientPoints { usable: pts.len(), needed: opts.min_points });
    }
    let floor = pts.iter().map(|p| p.2).filter(|&s| s > 0.0).fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = pts
        .iter()
        .map(|p| if floor.is_finite() { 1.0 / p.2.max(floor).powi(2) } else { 1.0 })
        .collect();
    let sw: f64 = weights.iter().sum();
    let mx = pts.iter().zip(&weights).map(|(p, w)| w * p.0).sum::<f64>() / sw;
    let my = pts.iter().zip(&weights).map(|(p, w)| w * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().zip(&weights).map(|(p, w)| w * (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().zip(&weights).map(|(p, w)| w * (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(FitError::InsufficientPoints { usable: 1, needed: opts.min_points });
    }
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let residual = pts.iter().zip(&weights).map(|(p, w)| w * (p.1 - icpt - slope * p.0).powi(2)).sum();
    let non_decaying = slope >= 0.0;
    Ok(TauFit {
        tau: if non_decaying { f64::INFINITY } else { -1.0 / slope },
        amplitude: icpt.exp(),
        residual,
        points: pts.len(),
        non_decaying,
    })
}

/// Decay curve of a hybrid circuit spec with A covering the whole system.
///
/// Each trial draws an instance and a uniformly random probe site and
/// contributes the exact per-instance `χ_C(t)` for every probe time; the
/// translation invariance of the setup makes the site average implicit.
pub fn decay_curve(spec: &CircuitSpec, trials: u64, seed: u64, point: u64) -> Result<DecayCurve, EngineError> {
    spec.validate()?;
    if trials == 0 {
        return Err(EngineError::NoTrials);
    }
    let cap = LIVELOCK_FACTOR * trials;
    let mut probe = spec.clone();
    probe.b.width = 1;
    let rows: Vec<Result<(Vec<f64>, u64), EngineError>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, point, i);
            let mut restarts = 0;
            loop {
                let inst = probe.realize(&mut rng);
                let x_b = rng.random_range(0..spec.l);
                if let Some(v) = instance_chi_over_time(&inst, x_b)? {
                    return Ok((v, restarts));
                }
                restarts += 1;
                if restarts > cap {
                    return Err(EngineError::Livelock { restarts, trials });
                }
            }
        })
        .collect();
    let nt = spec.t + 1;
    let mut sum = vec![0.0; nt];
    let mut sq = vec![0.0; nt];
    let mut restarts = 0;
    for r in rows {
        let (v, d) = r?;
        restarts += d;
        for k in 0..nt {
            sum[k] += v[k];
            sq[k] += v[k] * v[k];
        }
    }
    if restarts > cap {
        return Err(EngineError::Livelock { restarts, trials });
    }
    let n = trials as f64;
    let values: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let stderr = values
        .iter()
        .zip(&sq)
        .map(|(m, q)| if trials > 1 { ((q / n - m * m).max(0.0) * n / (n - 1.0) / n).sqrt() } else { 0.0 })
        .collect();
    Ok(DecayCurve {
        times: (0..nt).map(|t| t as f64).collect(),
        values,
        stderr,
        t_a: spec.a.t as f64,
        p: spec.p,
        l: spec.l,
        t: spec.t,
        seed,
        trials,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauEntry {
    pub p: f64,
    #[serde(rename = "T")]
    pub t: usize,
    pub fit: Option<TauFit>,
    pub error: Option<String>,
    pub curve: DecayCurve,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauTable {
    #[serde(rename = "L")]
    pub l: usize,
    pub trials: u64,
    pub seed: u64,
    pub entries: Vec<TauEntry>,
}

impl TauTable {
    /// `(p, T, τ)` for every entry with a finite fitted τ.
    pub fn points(&self) -> Vec<(f64, usize, f64)> {
        self.entries
            .iter()
            .filter_map(|e| e.fit.as_ref().filter(|f| f.tau.is_finite()).map(|f| (e.p, e.t, f.tau)))
            .collect()
    }

    /// τ(p) at fixed T, ordered by p; unfitted points are `None`.
    pub fn series(&self, t: usize) -> Vec<(f64, Option<f64>)> {
        let mut v: Vec<(f64, Option<f64>)> = self
            .entries
            .iter()
            .filter(|e| e.t == t)
            .map(|e| (e.p, e.fit.as_ref().filter(|f| f.tau.is_finite()).map(|f| f.tau)))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }
}

/// τ for every `(p, T)` with the hybrid preset at system size `l`.
pub fn tau_vs_p_experiment(
    l: usize,
    ts: &[usize],
    ps: &[f64],
    trials: u64,
    seed: u64,
    opts: &FitOptions,
    progress: Option<&(dyn Fn(usize, usize) + Sync)>,
) -> Result<TauTable, EngineError> {
    let mut entries = Vec::new();
    let total = ts.len() * ps.len();
    let mut point = 0u64;
    for &t in ts {
        for &p in ps {
            let mut spec = CircuitSpec::preset("hybrid-mipt", l, t)?;
            spec.p = p;
            spec.seed = seed;
            let curve = decay_curve(&spec, trials, seed, point)?;
            let (fit, error) = match fit_correlation_time(&curve, opts) {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
            entries.push(TauEntry { p, t, fit, error, curve });
            point += 1;
            if let Some(f) = progress {
                f(point as usize, total);
            }
        }
    }
    Ok(TauTable { l, trials, seed, entries })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseRanges {
    pub p_c: (f64, f64),
    pub nu: (f64, f64),
    pub grid: usize,
}

impl Default for CollapseRanges {
    fn default() -> Self {
        CollapseRanges { p_c: (0.05, 0.30), nu: (0.5, 3.0), grid: 51 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseResult {
    pub p_c: f64,
    pub nu: f64,
    pub objective: f64,
    /// Objective at the centre of the search ranges.
    pub baseline: f64,
    /// The optimum sits on an edge of the search range.
    pub on_boundary: bool,
    /// The objective barely depends on `p_c` at the optimal ν.
    pub degenerate: bool,
    /// `(p, T, τ)` used in the fit.
    pub table: Vec<(f64, usize, f64)>,
}

/// Leave-one-T-out collapse quality: mean squared deviation of each rescaled
/// point `((p − p_c) T^{1/ν}, τ/T)` from the piecewise-linear interpolant
/// through the points of all other T. Points outside the others' range are
/// skipped; `+∞` when nothing overlaps.
pub fn collapse_objective(table: &[(f64, usize, f64)], p_c: f64, nu: f64) -> f64 {
    let pts: Vec<(usize, f64, f64)> = table
        .iter()
        .map(|&(p, t, tau)| (t, (p - p_c) * (t as f64).powf(1.0 / nu), tau / t as f64))
        .collect();
    let mut sizes: Vec<usize> = pts.iter().map(|p| p.0).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let mut acc = 0.0;
    let mut used = 0usize;
    for &t in &sizes {
        let mut others: Vec<(f64, f64)> = pts.iter().filter(|p| p.0 != t).map(|p| (p.1, p.2)).collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(_, x, y) in pts.iter().filter(|p| p.0 == t) {
            if let Some(yi) = interpolate(&others, x) {
                acc += (y - yi).powi(2);
                used += 1;
            }
        }
    }
    if used == 0 {
        f64::INFINITY
    } else {
        acc / used as f64
    }
}

fn interpolate(pts: &[(f64, f64)], x: f64) -> Option<f64> {
    let (first, last) = (pts.first()?, pts.last()?);
    if x < first.0 || x > last.0 {
        return None;
    }
    let k = pts.partition_point(|p| p.0 < x);
    if k == 0 {
        return Some(pts[0].1);
    }
    let (a, b) = (pts[k - 1], pts[k.min(pts.len() - 1)]);
    if b.0 == a.0 {
        return Some(0.5 * (a.1 + b.1));
    }
    Some(a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Grid search over `(p_c, ν)` followed by successively finer local grids.
pub fn collapse_fit(table: &[(f64, usize, f64)], ranges: &CollapseRanges) -> Result<CollapseResult, FitError> {
    let mut sizes: Vec<usize> = table.iter().map(|p| p.1).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(FitError::TooFewSizes(sizes.len()));
    }
    let mut rates: Vec<f64> = table.iter().map(|p| p.0).collect();
    rates.sort_by(f64::total_cmp);
    rates.dedup();
    if rates.len() < 5 {
        return Err(FitError::TooFewRates(rates.len()));
    }
    if !(ranges.p_c.0 < ranges.p_c.1) {
        return Err(FitError::EmptyRange("p_c"));
    }
    if !(ranges.nu.0 < ranges.nu.1) || ranges.nu.0 <= 0.0 {
        return Err(FitError::EmptyRange("nu"));
    }
    let n = ranges.grid.max(3);
    let pcs = linspace(ranges.p_c.0, ranges.p_c.1, n);
    let nus = linspace(ranges.nu.0, ranges.nu.1, n);
    let mut best = (f64::INFINITY, pcs[0], nus[0]);
    for &pc in &pcs {
        for &nu in &nus {
            let f = collapse_objective(table, pc, nu);
            if f < best.0 {
                best = (f, pc, nu);
            }
        }
    }
    let grid_best = best;
    let (mut hp, mut hn) = ((pcs[1] - pcs[0]), (nus[1] - nus[0]));
    for _ in 0..30 {
        let (_, c0, c1) = best;
        for &pc in &linspace(c0 - hp, c0 + hp, 9) {
            for &nu in &linspace(c1 - hn, c1 + hn, 9) {
                if pc < ranges.p_c.0 || pc > ranges.p_c.1 || nu < ranges.nu.0 || nu > ranges.nu.1 {
                    continue;
                }
                let f = collapse_objective(table, pc, nu);
                if f < best.0 {
                    best = (f, pc, nu);
                }
            }
        }
        hp *= 0.5;
        hn *= 0.5;
    }
    debug_assert!(best.0 <= grid_best.0);
    let (objective, p_c, nu) = best;
    let tol_p = 0.5 * (pcs[1] - pcs[0]);
    let tol_n = 0.5 * (nus[1] - nus[0]);
    let on_boundary = p_c - ranges.p_c.0 < tol_p
        || ranges.p_c.1 - p_c < tol_p
        || nu - ranges.nu.0 < tol_n
        || ranges.nu.1 - nu < tol_n;
    let along: Vec<f64> = pcs.iter().map(|&pc| collapse_objective(table, pc, nu)).collect();
    let (lo, hi) = along.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let degenerate = (hi - lo) <= 1e-9 * hi.abs().max(1e-300);
    let baseline =
        collapse_objective(table, 0.5 * (ranges.p_c.0 + ranges.p_c.1), 0.5 * (ranges.nu.0 + ranges.nu.1));
    Ok(CollapseResult { p_c, nu, objective, baseline, on_boundary, degenerate, table: table.to_vec() })
}

/// Whether the largest value of `series` sits strictly inside the p range.
pub fn has_interior_maximum(series: &[(f64, Option<f64>)]) -> bool {
    let vals: Vec<(usize, f64)> = series.iter().enumerate().filter_map(|(i, s)| s.1.map(|v| (i, v))).collect();
    match vals.iter().max_by(|a, b| a.1.total_cmp(&b.1)) {
        Some(&(i, _)) => i > 0 && i + 1 < series.len(),
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(taus: f64, amp: f64, t_a: f64, n: usize) -> DecayCurve {
        let times: Vec<f64> = (0..n).map(|t| t as f64).collect();
        let values = times.iter().map(|t| 1.0 - amp * (-(t - t_a).abs() / taus).exp()).collect();
        DecayCurve { stderr: vec![0.0; n], times, values, t_a, p: 0.1, l: 8, t: n - 1, seed: 0, trials: 1 }
    }

    #[test]
    fn exact_exponential() {
        let f = fit_correlation_time(&curve(7.0, 0.5, 0.0, 30), &FitOptions::default()).unwrap();
        assert!((f.tau - 7.0).abs() / 7.0 < 1e-6);
        assert!((f.amplitude - 0.5).abs() < 1e-6);
    }

    #[test]
    fn flat_curve_is_insufficient() {
        let mut c = curve(7.0, 0.5, 0.0, 30);
        c.values.iter_mut().for_each(|v| *v = 1.0);
        assert!(matches!(
            fit_correlation_time(&c, &FitOptions::default()),
            Err(FitError::InsufficientPoints { .. })
        ));
    }

    #[test]
    fn growing_curve_is_flagged() {
        let mut c = curve(7.0, 0.5, 0.0, 30);
        c.values = c.times.iter().map(|t| 1.0 - 0.01 * (t / 10.0).exp()).collect();
        let f = fit_correlation_time(&c, &FitOptions::default()).unwrap();
        assert!(f.non_decaying);
        assert!(f.tau.is_infinite());
    }

    #[test]
    fn interpolation() {
        let pts = [(0.0, 0.0), (1.0, 2.0), (3.0, 4.0)];
        assert_eq!(interpolate(&pts, 0.5), Some(1.0));
        assert_eq!(interpolate(&pts, 2.0), Some(3.0));
        assert_eq!(interpolate(&pts, 3.5), None);
    }

    #[test]
    fn interior_maximum() {
        assert!(has_interior_maximum(&[(0.1, Some(1.0)), (0.2, Some(3.0)), (0.3, Some(2.0))]));
        assert!(!has_interior_maximum(&[(0.1, Some(4.0)), (0.2, Some(3.0)), (0.3, Some(2.0))]));
    }
}
