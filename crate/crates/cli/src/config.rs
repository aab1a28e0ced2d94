//! Structured configuration: one TOML file with per-command sections, plus
//! `--set section.key=value` overrides applied before deserialization.

use crate::{CliError, CliResult};
use serde::Deserialize;
use std::path::{Path, PathBuf};

pub const WORKERS_ENV: &str = "MINLUT_WORKERS";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub design: Option<DesignSection>,
    pub threshold: Option<ThresholdSection>,
    pub simulate: Option<SimulateSection>,
}

/// Either one size for every iteration or an explicit per-iteration list.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum AlphabetSpec {
    Constant(usize),
    Schedule(Vec<usize>),
}

impl AlphabetSpec {
    pub fn schedule(&self, iterations: usize) -> Vec<usize> {
        match self {
            AlphabetSpec::Constant(m) => vec![*m; iterations],
            AlphabetSpec::Schedule(v) => v.clone(),
        }
    }
}

fn default_epsilon() -> f64 {
    1e-4
}
fn default_fine_grid() -> usize {
    minlut::channel::DEFAULT_FINE_GRID
}
fn default_fine_clip() -> f64 {
    minlut::channel::DEFAULT_FINE_CLIP
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    pub dv: usize,
    pub dc: usize,
    pub iterations: usize,
    pub tree: String,
    pub llr_levels: usize,
    pub alphabet: AlphabetSpec,
    pub design_set: Option<Vec<usize>>,
    pub ebn0_db: f64,
    pub rate: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub llr_policy: LlrPolicyName,
    /// Run a threshold search first and warn when the design noise level
    /// lies above the threshold (expensive; off by default).
    #[serde(default)]
    pub check_threshold: bool,
    #[serde(default = "default_fine_grid")]
    pub fine_grid: usize,
    #[serde(default = "default_fine_clip")]
    pub fine_clip: f64,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum LlrPolicyName {
    #[default]
    FixedAtRoot,
    SwitchAtCrossover,
}

impl From<LlrPolicyName> for minlut::design::LlrPolicy {
    fn from(v: LlrPolicyName) -> Self {
        match v {
            LlrPolicyName::FixedAtRoot => minlut::design::LlrPolicy::FixedAtRoot,
            LlrPolicyName::SwitchAtCrossover => minlut::design::LlrPolicy::SwitchAtCrossover,
        }
    }
}

fn default_threshold_iterations() -> usize {
    200
}
fn default_sigma_min() -> f64 {
    0.3
}
fn default_sigma_max() -> f64 {
    0.8
}
fn default_delta_sigma() -> f64 {
    1e-4
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    pub dv: usize,
    pub dc: usize,
    /// One search per tree expression.
    pub trees: Vec<String>,
    pub llr_levels: usize,
    pub alphabet: AlphabetSpec,
    #[serde(default = "default_threshold_iterations")]
    pub iterations: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_sigma_min")]
    pub sigma_min: f64,
    #[serde(default = "default_sigma_max")]
    pub sigma_max: f64,
    #[serde(default = "default_delta_sigma")]
    pub delta_sigma: f64,
    #[serde(default = "default_fine_grid")]
    pub fine_grid: usize,
    #[serde(default = "default_fine_clip")]
    pub fine_clip: f64,
    pub csv: Option<PathBuf>,
}

fn default_max_frames() -> u64 {
    10_000_000
}
fn default_min_frame_errors() -> u64 {
    100
}
fn default_baseline_iterations() -> usize {
    8
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub graph: GraphSpec,
    pub decoder: DecoderChoice,
    pub ebn0_db: Vec<f64>,
    /// Defaults to the decoder spec's rate, else the graph design rate.
    pub rate: Option<f64>,
    #[serde(default = "default_max_frames")]
    pub max_frames: u64,
    #[serde(default = "default_min_frame_errors")]
    pub min_frame_errors: u64,
    #[serde(default)]
    pub master_seed: u64,
    /// 0 or absent: MINLUT_WORKERS, else the rayon default.
    pub workers: Option<usize>,
    /// Iteration cap for the min-sum baselines.
    #[serde(default = "default_baseline_iterations")]
    pub max_iterations: usize,
    pub output: PathBuf,
    /// Measured wall time per point in the CSV; off keeps files
    /// byte-reproducible.
    #[serde(default)]
    pub emit_timing: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub alist: Option<PathBuf>,
    pub random: Option<RandomGraphSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomGraphSpec {
    pub n: usize,
    pub dv: usize,
    pub dc: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderChoice {
    /// Path to a designed decoder spec file.
    pub spec: Option<PathBuf>,
    /// `"float"` for the floating-point min-sum baseline.
    pub minsum: Option<String>,
    pub minsum_fixed: Option<MinsumFixedSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinsumFixedSpec {
    pub q_mu: u32,
    pub q_llr: u32,
    /// Channel quantizer step; tuned per SNR point when absent.
    pub step: Option<f64>,
}

/// Loads a config file and applies `--set section.key=value` overrides.
pub fn load_config(path: &Path, overrides: &[String]) -> CliResult<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut value: toml::Value = toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    for ov in overrides {
        apply_override(&mut value, ov)?;
    }
    value
        .try_into()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn apply_override(root: &mut toml::Value, spec: &str) -> CliResult<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set needs key=value, got {spec:?}")))?;
    let parsed: toml::Value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(t) => t["v"].clone(),
        // bare words become strings
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("bad --set path {path:?}")));
    }
    for p in &parts[..parts.len() - 1] {
        let table = cur
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("--set path {path:?} crosses a non-table")))?;
        cur = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    let table = cur
        .as_table_mut()
        .ok_or_else(|| CliError::Config(format!("--set path {path:?} crosses a non-table")))?;
    table.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}

/// Worker count resolution: explicit flag, then config, then environment.
pub fn resolve_workers(flag: Option<usize>, config: Option<usize>) -> usize {
    flag.or(config)
        .or_else(|| {
            std::env::var(WORKERS_ENV)
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0)
}
