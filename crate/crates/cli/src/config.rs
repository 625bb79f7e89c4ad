use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use xeqci::engine::Method;

/// Top-level config document. Each subcommand reads its own table.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub landscape: LandscapeArgs,
    #[serde(default)]
    pub mipt: MiptArgs,
    #[serde(default)]
    pub dual: DualArgs,
    #[serde(default)]
    pub bgue: BgueArgs,
    #[serde(default)]
    pub selftest: SelftestArgs,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

pub fn bad(key: &str, msg: impl fmt::Display) -> anyhow::Error {
    anyhow::anyhow!("invalid value for `{key}`: {msg}")
}

fn need<T: Clone>(v: &Option<T>, key: &str) -> Result<T> {
    v.clone().ok_or_else(|| bad(key, "missing"))
}

fn positive(v: u64, key: &str) -> Result<()> {
    if v == 0 {
        bail!(bad(key, "must be at least 1"));
    }
    Ok(())
}

/// Values of `p`: either `start:stop:step` (inclusive) or an explicit list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Range(String),
    List(Vec<f64>),
}

impl FromStr for Grid {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.contains(':') {
            Ok(Grid::Range(s.to_string()))
        } else {
            s.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
                .collect::<Result<_, _>>()
                .map(Grid::List)
        }
    }
}

impl Grid {
    pub fn values(&self, key: &str) -> Result<Vec<f64>> {
        match self {
            Grid::List(v) => Ok(v.clone()),
            Grid::Range(s) => {
                let parts: Vec<f64> = s
                    .split(':')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| bad(key, format!("{s:?}: {e}")))?;
                let [start, stop, step] = parts[..] else {
                    bail!(bad(key, format!("{s:?} is not start:stop:step")));
                };
                if !(step > 0.0) || stop < start {
                    bail!(bad(key, format!("{s:?} is empty")));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                Ok((0..=n).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect())
            }
        }
    }
}

macro_rules! merge {
    ($flag:expr, $file:expr, $($f:ident),+) => {
        Self { $($f: $flag.$f.clone().or_else(|| $file.$f.clone())),+ }
    };
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeArgs {
    /// Preset name (clifford-pure, css-half-half, css-pure-center, hybrid-mipt, inverted-cone, dual-monitored).
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<usize>,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub t: Option<usize>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// conditioned, literal or instance-exact.
    #[arg(long)]
    pub method: Option<String>,
    /// Measurement rate, overriding the preset.
    #[arg(long)]
    pub p: Option<f64>,
    /// Perturbation region as `x,width,t`, overriding the preset.
    #[arg(long, value_delimiter = ',')]
    pub a: Option<Vec<usize>>,
    /// Probe sites (default: all).
    #[arg(long, value_delimiter = ',')]
    pub xs: Option<Vec<usize>>,
    /// Probe times (default: 0..=T).
    #[arg(long, value_delimiter = ',')]
    pub ts: Option<Vec<usize>>,
}

impl LandscapeArgs {
    pub fn merged(&self, file: &Self) -> Self {
        merge!(self, file, preset, l, t, trials, seed, method, p, a, xs, ts)
    }

    /// Fill defaults and check every key.
    pub fn resolve(&self) -> Result<Self> {
        let preset = self.preset.clone().unwrap_or_else(|| "clifford-pure".into());
        if !xeqci::circuit::PRESETS.contains(&preset.as_str()) {
            bail!(bad("landscape.preset", format!("unknown preset {preset:?}")));
        }
        let l = self.l.unwrap_or(20);
        let t = self.t.unwrap_or(20);
        let trials = self.trials.unwrap_or(10_000);
        positive(trials, "landscape.trials")?;
        let method = self.method.clone().unwrap_or_else(|| "conditioned".into());
        parse_method(&method)?;
        if let Some(a) = &self.a {
            if a.len() != 3 {
                bail!(bad("landscape.a", "expected x,width,t"));
            }
        }
        let xs = self.xs.clone().unwrap_or_else(|| (0..l).collect());
        let ts = self.ts.clone().unwrap_or_else(|| (0..=t).collect());
        if let Some(x) = xs.iter().find(|&&x| x >= l) {
            bail!(bad("landscape.xs", format!("site {x} outside 0..{l}")));
        }
        if let Some(s) = ts.iter().find(|&&s| s > t) {
            bail!(bad("landscape.ts", format!("time {s} outside 0..={t}")));
        }
        let r = Self {
            preset: Some(preset),
            l: Some(l),
            t: Some(t),
            trials: Some(trials),
            seed: Some(self.seed.unwrap_or(0)),
            method: Some(method),
            p: self.p,
            a: self.a.clone(),
            xs: Some(xs),
            ts: Some(ts),
        };
        r.spec()?;
        Ok(r)
    }

    pub fn spec(&self) -> Result<xeqci::CircuitSpec> {
        let mut spec = xeqci::CircuitSpec::preset(&need(&self.preset, "landscape.preset")?, need(&self.l, "landscape.L")?, need(&self.t, "landscape.T")?)
            .map_err(|e| bad("landscape.preset", e))?;
        spec.seed = need(&self.seed, "landscape.seed")?;
        if let Some(p) = self.p {
            spec.p = p;
        }
        if let Some(a) = &self.a {
            spec.a = xeqci::Region { x: a[0], width: a[1], t: a[2] };
            spec.b.t = (spec.a.t + 1).min(spec.t);
        }
        spec.validate().map_err(|e| anyhow::anyhow!("landscape: {e}"))?;
        Ok(spec)
    }

    pub fn method(&self) -> Result<Method> {
        parse_method(&need(&self.method, "landscape.method")?)
    }
}

fn parse_method(s: &str) -> Result<Method> {
    match s {
        "conditioned" => Ok(Method::Conditioned),
        "literal" => Ok(Method::Literal),
        "instance-exact" => Ok(Method::InstanceExact),
        other => Err(bad("landscape.method", format!("{other:?} is not conditioned, literal or instance-exact"))),
    }
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MiptArgs {
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<usize>,
    /// Circuit depths, comma separated.
    #[arg(long = "T", value_delimiter = ',')]
    #[serde(rename = "T")]
    pub t: Option<Vec<usize>>,
    /// Measurement rates as `start:stop:step` or a comma list.
    #[arg(long)]
    pub p: Option<Grid>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Half-width of the excluded window around t_A.
    #[arg(long)]
    pub window: Option<f64>,
    /// Noise floor in standard errors.
    #[arg(long)]
    pub noise_sigmas: Option<f64>,
    #[arg(long)]
    pub min_points: Option<usize>,
    /// Collapse search range for p_c as `lo,hi`.
    #[arg(long, value_delimiter = ',')]
    pub p_c_range: Option<Vec<f64>>,
    /// Collapse search range for ν as `lo,hi`.
    #[arg(long, value_delimiter = ',')]
    pub nu_range: Option<Vec<f64>>,
    /// Points per axis of the coarse collapse grid.
    #[arg(long)]
    pub grid: Option<usize>,
}

impl MiptArgs {
    pub fn merged(&self, file: &Self) -> Self {
        merge!(self, file, l, t, p, trials, seed, window, noise_sigmas, min_points, p_c_range, nu_range, grid)
    }

    pub fn resolve(&self) -> Result<Self> {
        let fit = xeqci::mipt::FitOptions::default();
        let ranges = xeqci::mipt::CollapseRanges::default();
        let r = Self {
            l: Some(self.l.unwrap_or(24)),
            t: Some(self.t.clone().unwrap_or_else(|| vec![24, 32, 40])),
            p: Some(Grid::List(self.p.clone().unwrap_or(Grid::Range("0.05:0.30:0.025".into())).values("mipt.p")?)),
            trials: Some(self.trials.unwrap_or(10_000)),
            seed: Some(self.seed.unwrap_or(0)),
            window: Some(self.window.unwrap_or(fit.window)),
            noise_sigmas: Some(self.noise_sigmas.unwrap_or(fit.noise_sigmas)),
            min_points: Some(self.min_points.unwrap_or(fit.min_points)),
            p_c_range: Some(self.p_c_range.clone().unwrap_or(vec![ranges.p_c.0, ranges.p_c.1])),
            nu_range: Some(self.nu_range.clone().unwrap_or(vec![ranges.nu.0, ranges.nu.1])),
            grid: Some(self.grid.unwrap_or(ranges.grid)),
        };
        positive(r.trials.unwrap(), "mipt.trials")?;
        if r.l == Some(0) {
            bail!(bad("mipt.L", "must be at least 1"));
        }
        let ts = r.t.as_ref().unwrap();
        if ts.is_empty() || ts.contains(&0) {
            bail!(bad("mipt.T", "need at least one depth ≥ 1"));
        }
        for p in r.ps() {
            if !(0.0..=1.0).contains(&p) {
                bail!(bad("mipt.p", format!("{p} outside [0, 1]")));
            }
        }
        for (key, v) in [("mipt.p_c_range", &r.p_c_range), ("mipt.nu_range", &r.nu_range)] {
            let v = v.as_ref().unwrap();
            if v.len() != 2 || !(v[0] < v[1]) {
                bail!(bad(key, "expected lo,hi with lo < hi"));
            }
        }
        if r.grid.unwrap() < 3 {
            bail!(bad("mipt.grid", "must be at least 3"));
        }
        if r.min_points.unwrap() < 2 {
            bail!(bad("mipt.min_points", "must be at least 2"));
        }
        Ok(r)
    }

    pub fn ps(&self) -> Vec<f64> {
        match &self.p {
            Some(Grid::List(v)) => v.clone(),
            _ => Vec::new(),
        }
    }

    pub fn fit_options(&self) -> xeqci::mipt::FitOptions {
        xeqci::mipt::FitOptions {
            window: self.window.unwrap(),
            noise_sigmas: self.noise_sigmas.unwrap(),
            min_points: self.min_points.unwrap(),
        }
    }

    pub fn ranges(&self) -> xeqci::mipt::CollapseRanges {
        let (pc, nu) = (self.p_c_range.as_ref().unwrap(), self.nu_range.as_ref().unwrap());
        xeqci::mipt::CollapseRanges { p_c: (pc[0], pc[1]), nu: (nu[0], nu[1]), grid: self.grid.unwrap() }
    }
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualArgs {
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<usize>,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub t: Option<usize>,
    /// Region R as `x0,x1,t0,t1` (inclusive).
    #[arg(long, value_delimiter = ',')]
    pub r: Option<Vec<usize>>,
    /// Link A as `x,t` for cone and F_A output.
    #[arg(long, value_delimiter = ',')]
    pub a: Option<Vec<usize>>,
    /// Also simulate the dual-unitary circuit and check containment in F_A.
    #[arg(long)]
    pub simulate: Option<bool>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl DualArgs {
    pub fn merged(&self, file: &Self) -> Self {
        merge!(self, file, l, t, r, a, simulate, trials, seed)
    }

    pub fn resolve(&self) -> Result<Self> {
        let l = self.l.unwrap_or(16);
        let t = self.t.unwrap_or(16);
        if l < 2 || t < 1 {
            bail!(bad("dual.L", "need L ≥ 2 and T ≥ 1"));
        }
        let default = xeqci::CircuitSpec::preset("dual-monitored", l, t).map_err(|e| bad("dual.L", e))?;
        let m = default.monitored.expect("dual preset has a region");
        let r = self.r.clone().unwrap_or(vec![m.x0, m.x1, m.t0, m.t1]);
        if r.len() != 4 || r[0] > r[1] || r[1] >= l || r[2] > r[3] || r[3] > t {
            bail!(bad("dual.r", "expected x0,x1,t0,t1 with x0 ≤ x1 < L and t0 ≤ t1 ≤ T"));
        }
        let a = self.a.clone().unwrap_or(vec![default.a.x, default.a.t]);
        if a.len() != 2 || a[0] >= l || a[1] > t {
            bail!(bad("dual.a", "expected x,t on the lattice"));
        }
        let trials = self.trials.unwrap_or(2000);
        positive(trials, "dual.trials")?;
        Ok(Self {
            l: Some(l),
            t: Some(t),
            r: Some(r),
            a: Some(a),
            simulate: Some(self.simulate.unwrap_or(false)),
            trials: Some(trials),
            seed: Some(self.seed.unwrap_or(0)),
        })
    }
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BgueArgs {
    #[arg(long, value_delimiter = ',')]
    pub d_a: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub d_b: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub d_tot: Option<Vec<f64>>,
    /// Initial-state second Rényi entropies (natural log).
    #[arg(long, value_delimiter = ',')]
    pub s2_i: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub s2_f: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub delta_t: Option<Vec<f64>>,
}

impl BgueArgs {
    pub fn merged(&self, file: &Self) -> Self {
        merge!(self, file, d_a, d_b, d_tot, s2_i, s2_f, delta_t)
    }

    pub fn resolve(&self) -> Result<Self> {
        let ln16 = 16f64.ln();
        let r = Self {
            d_a: Some(self.d_a.clone().unwrap_or(vec![2.0])),
            d_b: Some(self.d_b.clone().unwrap_or(vec![2.0])),
            d_tot: Some(self.d_tot.clone().unwrap_or(vec![16.0])),
            s2_i: Some(self.s2_i.clone().unwrap_or(vec![0.0, ln16 / 2.0, ln16])),
            s2_f: Some(self.s2_f.clone().unwrap_or(vec![0.0, ln16 / 2.0, ln16])),
            delta_t: Some(self.delta_t.clone().unwrap_or(vec![0.0, 1.0])),
        };
        for (key, v) in [
            ("bgue.d_a", &r.d_a),
            ("bgue.d_b", &r.d_b),
            ("bgue.d_tot", &r.d_tot),
            ("bgue.s2_i", &r.s2_i),
            ("bgue.s2_f", &r.s2_f),
            ("bgue.delta_t", &r.delta_t),
        ] {
            if v.as_ref().unwrap().is_empty() {
                bail!(bad(key, "empty list"));
            }
        }
        Ok(r)
    }
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelftestArgs {
    /// Random small specs checked against the dense oracle.
    #[arg(long)]
    pub specs: Option<usize>,
    /// Randomized parameter draws for the BGUE checks.
    #[arg(long)]
    pub bgue_draws: Option<usize>,
    /// Side of the square lattice for the exhaustive cone check.
    #[arg(long)]
    pub lattice: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl SelftestArgs {
    pub fn merged(&self, file: &Self) -> Self {
        merge!(self, file, specs, bgue_draws, lattice, seed)
    }

    pub fn resolve(&self) -> Result<Self> {
        let r = Self {
            specs: Some(self.specs.unwrap_or(200)),
            bgue_draws: Some(self.bgue_draws.unwrap_or(100_000)),
            lattice: Some(self.lattice.unwrap_or(16)),
            seed: Some(self.seed.unwrap_or(0)),
        };
        if r.lattice.unwrap() < 2 {
            bail!(bad("selftest.lattice", "must be at least 2"));
        }
        Ok(r)
    }
}
