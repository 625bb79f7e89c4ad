mod cmd;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use config::{BgueArgs, DualArgs, FileConfig, LandscapeArgs, MiptArgs, SelftestArgs};
use manifest::Manifest;

/// Cross-entropy causal-influence experiments on monitored Clifford circuits.
#[derive(Parser)]
#[command(name = "xeqci", version)]
struct Cli {
    /// TOML config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: $XEQCI_OUT, then ./xeqci-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// No progress on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// χ̄ over a grid of probe positions.
    Landscape(LandscapeArgs),
    /// Correlation time τ(p, T) and its finite-size collapse.
    Mipt(MiptArgs),
    /// Cone classification for a dual-unitary circuit with a monitored region.
    Dual(DualArgs),
    /// Closed-form Brownian GUE tables.
    Bgue(BgueArgs),
    /// Oracle suites; exits nonzero on any failure.
    Selftest(SelftestArgs),
    /// Rerun the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
    },
}

fn out_dir(flag: Option<PathBuf>, file: Option<PathBuf>) -> PathBuf {
    flag.or(file)
        .or_else(|| std::env::var_os("XEQCI_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("xeqci-out"))
}

fn report(m: &Manifest, out: &std::path::Path) {
    println!("{} {} -> {}", m.command, m.hash, out.display());
    for f in &m.outputs {
        println!("  {}", out.join(f).display());
    }
}

fn replay(path: &PathBuf) -> Result<(String, serde_json::Value)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let m: Manifest = serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))?;
    if m.tool != manifest::TOOL || m.version != manifest::VERSION {
        bail!("manifest is from {} {}, this is {} {}", m.tool, m.version, manifest::TOOL, manifest::VERSION);
    }
    Ok((m.command, m.config))
}

fn run(cli: Cli) -> Result<bool> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let threads = cli.threads.or(file.threads);
    if let Some(n) = threads {
        if n == 0 {
            bail!(config::bad("threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("starting worker pool")?;
    }
    let out = out_dir(cli.out, file.out_dir.clone());
    let quiet = cli.quiet;

    let (command, resolved) = match cli.command {
        Command::Replay { manifest } => replay(&manifest)?,
        Command::Landscape(a) => ("landscape".into(), serde_json::to_value(a.merged(&file.landscape).resolve()?)?),
        Command::Mipt(a) => ("mipt".into(), serde_json::to_value(a.merged(&file.mipt).resolve()?)?),
        Command::Dual(a) => ("dual".into(), serde_json::to_value(a.merged(&file.dual).resolve()?)?),
        Command::Bgue(a) => ("bgue".into(), serde_json::to_value(a.merged(&file.bgue).resolve()?)?),
        Command::Selftest(a) => ("selftest".into(), serde_json::to_value(a.merged(&file.selftest).resolve()?)?),
    };

    let m = match command.as_str() {
        "landscape" => cmd::landscape::run(&serde_json::from_value::<LandscapeArgs>(resolved)?.resolve()?, &out, quiet)?,
        "mipt" => cmd::mipt::run(&serde_json::from_value::<MiptArgs>(resolved)?.resolve()?, &out, quiet)?,
        "dual" => cmd::dual::run(&serde_json::from_value::<DualArgs>(resolved)?.resolve()?, &out, quiet)?,
        "bgue" => cmd::bgue::run(&serde_json::from_value::<BgueArgs>(resolved)?.resolve()?, &out)?,
        "selftest" => {
            let (m, suites) = cmd::selftest::run(&serde_json::from_value::<SelftestArgs>(resolved)?.resolve()?, &out)?;
            report(&m, &out);
            for s in &suites {
                println!("{} {} ({} checked, {} failed) {}", if s.passed { "PASS" } else { "FAIL" }, s.suite, s.checked, s.failures, s.detail);
            }
            return Ok(suites.iter().all(|s| s.passed));
        }
        other => bail!("unknown command {other:?} in manifest"),
    };
    report(&m, &out);
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
