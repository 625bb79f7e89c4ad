use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "xeqci";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance record written next to every set of outputs. `hash` covers
/// tool, version, command and the fully resolved config, so two runs with
/// the same hash produce byte-identical CSV and JSON outputs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: Value,
    pub hash: String,
    pub wall_clock_secs: f64,
    pub threads: usize,
    pub outputs: Vec<String>,
}

pub fn manifest_hash(command: &str, config: &Value) -> String {
    let doc = json!({ "tool": TOOL, "version": VERSION, "command": command, "config": config });
    hex::encode(Sha256::digest(doc.to_string().as_bytes()))
}

pub struct Run {
    command: String,
    config: Value,
    hash: String,
    dir: PathBuf,
    outputs: Vec<String>,
    started: Instant,
}

impl Run {
    pub fn start(command: &str, config: &impl Serialize, dir: &Path) -> Result<Self> {
        let config = serde_json::to_value(config)?;
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Run {
            command: command.to_string(),
            hash: manifest_hash(command, &config),
            config,
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
            started: Instant::now(),
        })
    }

    fn create(&mut self, name: &str) -> Result<fs::File> {
        let path = self.dir.join(name);
        self.outputs.push(name.to_string());
        fs::File::create(&path).with_context(|| format!("writing {}", path.display()))
    }

    /// CSV with a leading `# manifest_hash=…` comment line.
    pub fn write_csv<S: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = S>) -> Result<()> {
        let mut f = self.create(name)?;
        writeln!(f, "# manifest_hash={}", self.hash)?;
        let mut w = csv::Writer::from_writer(f);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// JSON document `{ "manifest_hash": …, "data": … }`.
    pub fn write_json<S: Serialize>(&mut self, name: &str, data: &S) -> Result<()> {
        let f = self.create(name)?;
        let doc = json!({ "manifest_hash": self.hash, "data": data });
        let mut w = std::io::BufWriter::new(f);
        serde_json::to_writer_pretty(&mut w, &doc)?;
        writeln!(w)?;
        Ok(())
    }

    pub fn finish(self) -> Result<Manifest> {
        let m = Manifest {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: self.command,
            config: self.config,
            hash: self.hash,
            wall_clock_secs: self.started.elapsed().as_secs_f64(),
            threads: rayon::current_num_threads(),
            outputs: self.outputs,
        };
        let path = self.dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&m)? + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(m)
    }
}
