use std::path::Path;

use anyhow::Result;
use serde::Serialize;
use xeqci::mipt::{collapse_fit, has_interior_maximum, tau_vs_p_experiment};

use crate::config::MiptArgs;
use crate::manifest::{Manifest, Run};

#[derive(Serialize)]
struct TauRow {
    #[serde(rename = "L")]
    l: usize,
    #[serde(rename = "T")]
    t: usize,
    p: f64,
    tau: Option<f64>,
    amplitude: Option<f64>,
    residual: Option<f64>,
    points: Option<usize>,
    non_decaying: Option<bool>,
    error: Option<String>,
}

#[derive(Serialize)]
struct CurveRow {
    #[serde(rename = "T")]
    t: usize,
    p: f64,
    time: f64,
    chi_bar: f64,
    stderr: f64,
}

#[derive(Serialize)]
struct Summary {
    interior_maximum: Vec<(usize, bool)>,
    collapse: Option<xeqci::mipt::CollapseResult>,
    collapse_error: Option<String>,
}

pub fn run(cfg: &MiptArgs, out: &Path, quiet: bool) -> Result<Manifest> {
    let mut run = Run::start("mipt", cfg, out)?;
    let report = super::progress("mipt", quiet);
    let ts = cfg.t.clone().unwrap();
    let table = tau_vs_p_experiment(
        cfg.l.unwrap(),
        &ts,
        &cfg.ps(),
        cfg.trials.unwrap(),
        cfg.seed.unwrap(),
        &cfg.fit_options(),
        Some(&report),
    )?;
    let rows = table.entries.iter().map(|e| TauRow {
        l: table.l,
        t: e.t,
        p: e.p,
        tau: e.fit.as_ref().map(|f| f.tau),
        amplitude: e.fit.as_ref().map(|f| f.amplitude),
        residual: e.fit.as_ref().map(|f| f.residual),
        points: e.fit.as_ref().map(|f| f.points),
        non_decaying: e.fit.as_ref().map(|f| f.non_decaying),
        error: e.error.clone(),
    });
    run.write_csv("tau.csv", rows)?;
    let curves = table.entries.iter().flat_map(|e| {
        (0..e.curve.times.len()).map(move |k| CurveRow {
            t: e.t,
            p: e.p,
            time: e.curve.times[k],
            chi_bar: e.curve.values[k],
            stderr: e.curve.stderr[k],
        })
    });
    run.write_csv("curves.csv", curves)?;
    let (collapse, collapse_error) = match collapse_fit(&table.points(), &cfg.ranges()) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let summary = Summary {
        interior_maximum: ts.iter().map(|&t| (t, has_interior_maximum(&table.series(t)))).collect(),
        collapse,
        collapse_error,
    };
    run.write_json("tau.json", &table)?;
    run.write_json("collapse.json", &summary)?;
    run.finish()
}
