//! Run configuration: common flags, an optional key=value config file, and
//! their merge. Flags override the file; the file overrides defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::Args;

use sdcut::boxqn::QnOptions;
use sdcut::model::SIGMA_RANGE;
use sdcut::rounding::ThresholdMode;

/// Keys a config file may set; everything else is a flag-only option.
const KNOWN_KEYS: [&str; 7] =
    ["sigma", "seed", "repeats", "threshold", "memory", "max-iters", "pg-tol"];

#[derive(Args)]
pub struct CommonArgs {
    /// Penalty weight on the spherical-constraint relaxation
    #[arg(long)]
    sigma: Option<f64>,
    /// Master seed; all randomness in a run derives from it
    #[arg(long)]
    seed: Option<u64>,
    /// Number of Gaussian rounding candidates
    #[arg(long)]
    repeats: Option<usize>,
    /// Rounding threshold rule
    #[arg(long, value_parser = parse_threshold)]
    threshold: Option<ThresholdMode>,
    /// Quasi-Newton history length
    #[arg(long)]
    memory: Option<usize>,
    /// Outer iteration cap for the dual solve
    #[arg(long)]
    max_iters: Option<usize>,
    /// Projected-gradient convergence tolerance
    #[arg(long)]
    pg_tol: Option<f64>,
    /// Directory the result files are written to
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Optional key=value file supplying any of: sigma, seed, repeats,
    /// threshold, memory, max-iters, pg-tol. Flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Fully resolved run settings.
#[derive(Clone)]
pub struct Settings {
    pub sigma: f64,
    pub seed: u64,
    pub repeats: usize,
    pub threshold: ThresholdMode,
    pub qn: QnOptions,
    pub out: PathBuf,
}

fn parse_threshold(s: &str) -> Result<ThresholdMode, String> {
    match s {
        "median" => Ok(ThresholdMode::Median),
        "zero" => Ok(ThresholdMode::Zero),
        other => Err(format!("expected median or zero, got {other:?}")),
    }
}

fn parse_config_file(path: &Path) -> anyhow::Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected key=value, got {raw:?}", idx + 1);
        };
        let (key, value) = (key.trim(), value.trim());
        if !KNOWN_KEYS.contains(&key) {
            bail!(
                "config line {}: unknown key {key:?} (known keys: {})",
                idx + 1,
                KNOWN_KEYS.join(", ")
            );
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            bail!("config line {}: duplicate key {key:?}", idx + 1);
        }
    }
    Ok(map)
}

/// Flag value if given, else the parsed config-file value, else none.
fn pick<T>(flag: Option<T>, file: &BTreeMap<String, String>, key: &str) -> anyhow::Result<Option<T>>
where
    T: FromStr,
    T::Err: Display,
{
    if flag.is_some() {
        return Ok(flag);
    }
    match file.get(key) {
        Some(v) => {
            let parsed = v.parse().map_err(|e| anyhow::anyhow!("config key {key}: {e}"))?;
            Ok(Some(parsed))
        }
        None => Ok(None),
    }
}

impl CommonArgs {
    pub fn resolve(&self) -> anyhow::Result<Settings> {
        let file = match &self.config {
            Some(path) => parse_config_file(path)?,
            None => BTreeMap::new(),
        };
        let sigma = pick(self.sigma, &file, "sigma")?.unwrap_or(1e-3);
        let seed = pick(self.seed, &file, "seed")?.unwrap_or(0);
        let repeats = pick(self.repeats, &file, "repeats")?.unwrap_or(100);
        let threshold = match self.threshold {
            Some(t) => t,
            None => match file.get("threshold") {
                Some(v) => parse_threshold(v).map_err(|e| anyhow::anyhow!("config key threshold: {e}"))?,
                None => ThresholdMode::Median,
            },
        };
        let defaults = QnOptions::default();
        let qn = QnOptions {
            memory: pick(self.memory, &file, "memory")?.unwrap_or(defaults.memory),
            max_iters: pick(self.max_iters, &file, "max-iters")?.unwrap_or(defaults.max_iters),
            pg_tol: pick(self.pg_tol, &file, "pg-tol")?.unwrap_or(defaults.pg_tol),
            ..defaults
        };
        if !(sigma > 0.0 && sigma.is_finite()) {
            bail!("sigma must be a positive finite number, got {sigma}");
        }
        warn_sigma(sigma);
        if repeats == 0 {
            bail!("repeats must be at least 1");
        }
        if qn.memory == 0 || qn.max_iters == 0 {
            bail!("memory and max-iters must be at least 1");
        }
        if !(qn.pg_tol > 0.0) {
            bail!("pg-tol must be positive, got {}", qn.pg_tol);
        }
        Ok(Settings { sigma, seed, repeats, threshold, qn, out: self.out.clone() })
    }
}

/// Penalties far outside the working range still solve, but the bound is
/// loose (large sigma) or convergence is slow (tiny sigma); say so once.
pub fn warn_sigma(sigma: f64) {
    let (lo, hi) = SIGMA_RANGE;
    if !(lo..=hi).contains(&sigma) {
        eprintln!("warning: sigma {sigma} is outside the recommended range [{lo}, {hi}]");
    }
}
