use std::path::Path;

use anyhow::Result;
use serde::Serialize;
use xeqci::engine::{scan_landscape, GridPoint};

use crate::config::LandscapeArgs;
use crate::manifest::{Manifest, Run};

/// Stable CSV schema of a landscape grid.
#[derive(Serialize)]
pub struct Row {
    #[serde(rename = "x_B")]
    pub x_b: usize,
    #[serde(rename = "t_B")]
    pub t_b: usize,
    pub mean_c: f64,
    pub stderr: f64,
    pub trials: u64,
    pub neg_log2_chi: f64,
}

impl From<&GridPoint> for Row {
    fn from(p: &GridPoint) -> Self {
        Row { x_b: p.x_b, t_b: p.t_b, mean_c: p.mean_c, stderr: p.stderr, trials: p.trials, neg_log2_chi: p.neg_log2_chi }
    }
}

pub fn run(cfg: &LandscapeArgs, out: &Path, quiet: bool) -> Result<Manifest> {
    let spec = cfg.spec()?;
    let mut run = Run::start("landscape", cfg, out)?;
    let report = super::progress("landscape", quiet);
    let grid = scan_landscape(
        &spec,
        cfg.xs.as_ref().unwrap(),
        cfg.ts.as_ref().unwrap(),
        cfg.trials.unwrap(),
        cfg.seed.unwrap(),
        cfg.method()?,
        Some(&report),
    )?;
    run.write_csv("landscape.csv", grid.points.iter().map(Row::from))?;
    run.write_json("landscape.json", &grid)?;
    run.finish()
}
