use std::path::Path;

use anyhow::Result;
use serde::Serialize;
use xeqci::bgue::{alpha_1, alpha_2, alpha_3, alpha_4, evaluate, BgueParams};

use crate::config::BgueArgs;
use crate::manifest::{Manifest, Run};

#[derive(Serialize, Default)]
struct Row {
    d_a: f64,
    d_b: f64,
    d_tot: f64,
    s2_i: f64,
    s2_f: f64,
    delta_t: f64,
    alpha_1: Option<f64>,
    alpha_2: Option<f64>,
    alpha_3: Option<f64>,
    alpha_4: Option<f64>,
    delta_ci_1: Option<f64>,
    delta_ci_2: Option<f64>,
    delta_ci_3: Option<f64>,
    decay: Option<f64>,
    error: Option<String>,
}

pub fn rows(cfg: &BgueArgs) -> Vec<impl Serialize> {
    let mut out = Vec::new();
    for &d_a in cfg.d_a.as_ref().unwrap() {
        for &d_b in cfg.d_b.as_ref().unwrap() {
            for &d_tot in cfg.d_tot.as_ref().unwrap() {
                for &s2_i in cfg.s2_i.as_ref().unwrap() {
                    for &s2_f in cfg.s2_f.as_ref().unwrap() {
                        for &delta_t in cfg.delta_t.as_ref().unwrap() {
                            let mut row = Row { d_a, d_b, d_tot, s2_i, s2_f, delta_t, ..Default::default() };
                            match BgueParams::new(d_a, d_b, d_tot, s2_i, s2_f, delta_t).and_then(|p| evaluate(&p).map(|r| (p, r))) {
                                Ok((p, r)) => {
                                    row.alpha_1 = Some(alpha_1(&p));
                                    row.alpha_2 = Some(alpha_2(&p));
                                    row.alpha_3 = Some(alpha_3(&p));
                                    row.alpha_4 = Some(alpha_4(&p));
                                    row.delta_ci_1 = Some(r.delta_ci_1);
                                    row.delta_ci_2 = Some(r.delta_ci_2);
                                    row.delta_ci_3 = Some(r.delta_ci_3);
                                    row.decay = Some(r.decay);
                                }
                                Err(e) => row.error = Some(e.to_string()),
                            }
                            out.push(row);
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn run(cfg: &BgueArgs, out: &Path) -> Result<Manifest> {
    let mut run = Run::start("bgue", cfg, out)?;
    let rows = rows(cfg);
    run.write_csv("bgue.csv", &rows)?;
    run.write_json("bgue.json", &rows)?;
    run.finish()
}
