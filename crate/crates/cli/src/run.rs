use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use sbpg_core::config::ExperimentConfig;
use sbpg_core::game::VariantKind;
use sbpg_core::maps::save_map;
use sbpg_core::trainer::{
    run_training_with, sweep as run_sweep, write_summaries_jsonl, write_trace_csv, EpisodeMetrics, EpisodeSummary,
    TrainingObserver, TrainingPlan, WindowRecord,
};
use sbpg_core::verify::{run_checks, CheckName, CheckOutcome};
use sbpg_core::Error;

use crate::ConfigArgs;

pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summaries.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug)]
pub enum CliError {
    /// Bad config, flags or overrides.
    Invalid(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::Hierarchy(_)
            | Error::InvalidGamma(_)
            | Error::InvalidGraph(_)
            | Error::ActionOutOfRange(_)
            | Error::EmptySearchSpace => CliError::Invalid(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Config file (or defaults), then `--set` overrides in order, then the
/// dedicated run flags.
pub fn resolve_config(args: &ConfigArgs) -> CliResult<ExperimentConfig> {
    let text = match &args.config {
        Some(p) => fs::read_to_string(p)
            .map_err(|e| CliError::Invalid(format!("cannot read config {}: {e}", p.display())))?,
        None => ExperimentConfig::default().to_toml(),
    };
    let mut overrides = args.set.clone();
    if let Some(s) = args.seed {
        overrides.push(format!("run.seed={s}"));
    }
    if let Some(e) = args.episodes {
        overrides.push(format!("run.episodes={e}"));
    }
    if let Some(h) = args.horizon {
        overrides.push(format!("run.horizon={h:?}"));
    }
    Ok(ExperimentConfig::from_toml(&text, &overrides)?)
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(cfg.to_toml().as_bytes()))
}

fn variants(cfg: &ExperimentConfig, flag: Option<&str>) -> CliResult<Vec<VariantKind>> {
    match flag {
        None => Ok(vec![cfg.run.variant]),
        Some("all") => Ok(vec![VariantKind::Sbpg, VariantKind::Ds2, VariantKind::Stack]),
        Some(v) => Ok(vec![v.parse()?]),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub seed: u64,
    pub variant: VariantKind,
    pub code_version: &'static str,
    /// Paths relative to the manifest's directory.
    pub outputs: Vec<String>,
}

/// Rewrites the trace and summaries after every episode so a failed run
/// keeps the episodes it finished.
struct EpisodeWriter {
    dir: PathBuf,
    trace: Vec<WindowRecord>,
    summaries: Vec<EpisodeSummary>,
}

impl EpisodeWriter {
    fn flush(&self) -> sbpg_core::Result<()> {
        write_trace_csv(BufWriter::new(File::create(self.dir.join(TRACE_FILE))?), &self.trace)?;
        write_summaries_jsonl(BufWriter::new(File::create(self.dir.join(SUMMARY_FILE))?), &self.summaries)
    }
}

impl TrainingObserver for EpisodeWriter {
    fn on_episode(&mut self, m: &EpisodeMetrics) -> sbpg_core::Result<()> {
        self.trace.extend_from_slice(&m.trace);
        self.summaries.push(m.summary.clone());
        self.flush()
    }
}

fn warn_degenerate_stack(plan: &TrainingPlan) -> CliResult<()> {
    for p in 0..plan.plant.players() {
        let game = plan.variant.for_player(&plan.plant.objectives(p))?;
        if game.games() == 1 {
            eprintln!(
                "warning: {} has only two stack objectives; its stack game is the single leader-follower game of ds2",
                plan.plant.actuators[p].name
            );
        }
    }
    Ok(())
}

pub fn train(args: &ConfigArgs, variant: Option<&str>, out: &Path) -> CliResult<bool> {
    let cfg = resolve_config(args)?;
    let kinds = variants(&cfg, variant)?;
    let hash = config_hash(&cfg);
    for &kind in &kinds {
        let dir = if variant == Some("all") { out.join(kind.to_string()) } else { out.to_path_buf() };
        let plan = TrainingPlan::from_config(&cfg, kind)?;
        if kind == VariantKind::Stack {
            warn_degenerate_stack(&plan)?;
        }
        fs::create_dir_all(dir.join("maps"))?;
        fs::write(dir.join("config.toml"), cfg.to_toml())?;

        let mut writer = EpisodeWriter { dir: dir.clone(), trace: Vec::new(), summaries: Vec::new() };
        let outcome = run_training_with(&plan, &mut writer)?;

        let mut outputs = vec!["config.toml".to_string(), TRACE_FILE.into(), SUMMARY_FILE.into()];
        for (p, learner) in outcome.learners.iter().enumerate() {
            for (name, map) in learner.maps() {
                let rel = format!("maps/{}_{name}.map", plan.plant.actuators[p].name);
                save_map(&map, dir.join(&rel))?;
                outputs.push(rel);
            }
        }
        let stats: Vec<_> = outcome.learners.iter().map(|l| l.stats().clone()).collect();
        write_json(&dir.join("learner_stats.json"), &stats)?;
        outputs.push("learner_stats.json".into());

        let manifest = RunManifest {
            config_hash: hash.clone(),
            seed: cfg.run.seed,
            variant: kind,
            code_version: env!("CARGO_PKG_VERSION"),
            outputs,
        };
        write_json(&dir.join(MANIFEST_FILE), &manifest)?;

        if let Some(ev) = outcome.eval() {
            let s = &ev.summary;
            println!(
                "{kind}: demand {:.4} overflow {:.3} L power {:.2} W potential {:.4}",
                s.demand_fulfillment, s.overflow, s.mean_power, s.mean_potential
            );
        }
    }
    Ok(true)
}

pub fn verify(args: &ConfigArgs, checks: &[CheckName], out: Option<&Path>) -> CliResult<bool> {
    let cfg = resolve_config(args)?;
    let report = run_checks(&cfg, checks)?;
    for (name, outcome) in &report.checks {
        let status = if outcome.passed() { "PASS" } else { "FAIL" };
        let detail = match outcome {
            CheckOutcome::Condition(r) => {
                format!("max residual {:e} (tolerance {:e}, {} violations)", r.max_residual, r.tolerance, r.violations.len())
            }
            CheckOutcome::Gradient(r) => format!(
                "leader {:e} follower {:e} (tolerance {:e}, {} fallbacks)",
                r.max_rel_leader, r.max_rel_follower, r.tolerance, r.fallbacks
            ),
            CheckOutcome::Oracle(r) => format!("max gap {:e} over {} models", r.max_gap, r.models),
        };
        println!("{status} {name}: {detail}");
        if let CheckOutcome::Condition(r) = outcome {
            for (a, b) in r.offending_pairs().into_iter().take(5) {
                println!("  offending pair: players {a} and {b}");
            }
        }
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        write_json(&dir.join("report.json"), &report)?;
    }
    Ok(report.passed)
}

pub fn sweep(args: &ConfigArgs, variant: Option<&str>, trials: Option<usize>, out: Option<&Path>) -> CliResult<bool> {
    let cfg = resolve_config(args)?;
    let kind = match variant {
        Some("all") => return Err(CliError::Invalid("sweep takes a single variant".into())),
        _ => variants(&cfg, variant)?[0],
    };
    let report = run_sweep(&cfg, kind, trials.unwrap_or(cfg.sweep.trials), cfg.run.seed)?;
    for (rank, t) in report.trials.iter().enumerate() {
        println!(
            "{:>3}. trial {:>3} potential {:.4} demand {:.4} overflow {:.3} power {:.2} | {}",
            rank + 1,
            t.index,
            t.eval.mean_potential,
            t.eval.demand_fulfillment,
            t.eval.overflow,
            t.eval.mean_power,
            t.overrides.join(" ")
        );
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        write_json(&dir.join("sweep.json"), &report)?;
    }
    Ok(true)
}
