//! Run configuration.
//!
//! Flat `key = value` text. Lists (`omega`, `alpha`) are given by repeating
//! the key; every other key may appear at most once. `#` starts a comment.
//!
//! ```text
//! n_spins = 100
//! coupling = 0.1
//! field = 0.01
//! in_degree = 100
//! omega = 1
//! omega = -0.9999
//! alpha = 0.8
//! ants_per_trial = 100000
//! trials = 100
//! master_seed = 2024
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::colony::{DecisionParams, ModelParams};
use crate::ising::IsingParams;
use crate::meanfield::MeanFieldInit;
use crate::refnet::GrowthParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Colony,
    Meanfield,
    Both,
}

impl RunMode {
    pub fn runs_colony(self) -> bool {
        matches!(self, RunMode::Colony | RunMode::Both)
    }

    pub fn runs_meanfield(self) -> bool {
        matches!(self, RunMode::Meanfield | RunMode::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkModeKind {
    /// Every trial grows its own network.
    Coevolve,
    /// One network per `ω`, replayed by every trial.
    Frozen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_spins: usize,
    pub coupling: f64,
    pub field: f64,
    pub in_degree: usize,
    pub omegas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub ants_per_trial: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub mode: RunMode,
    pub network_mode: NetworkModeKind,
    pub output_dir: PathBuf,
    pub hist_bins: usize,
    /// Energy trace stride; `None` means `max(1, T/1000)`.
    pub trace_interval: Option<usize>,
    pub write_trace: bool,
    pub meanfield_init: MeanFieldInit,
    /// Integrator runs per cell; defaults to `trials`.
    pub meanfield_runs: Option<usize>,
}

impl Default for RunConfig {
    /// The experiment grid of the reference study.
    fn default() -> Self {
        Self {
            n_spins: 100,
            coupling: 0.1,
            field: 0.01,
            in_degree: 100,
            omegas: vec![1.0, 0.0, -0.9999, -1.0],
            alphas: default_alpha_grid(),
            ants_per_trial: 100_000,
            trials: 100,
            master_seed: 1,
            mode: RunMode::Colony,
            network_mode: NetworkModeKind::Coevolve,
            output_dir: PathBuf::from("out"),
            hist_bins: 50,
            trace_interval: None,
            write_trace: false,
            meanfield_init: MeanFieldInit::ColonyMatched,
            meanfield_runs: None,
        }
    }
}

/// `0.50, 0.55, …, 0.95, 0.99`.
pub fn default_alpha_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..10).map(|i| round12(0.5 + 0.05 * i as f64)).collect();
    grid.push(0.99);
    grid
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// Parses `lo:hi:step` into an inclusive grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = |m: &str| Error::invalid("alpha_grid", format!("`{spec}`: {m}"));
    if parts.len() != 3 {
        return Err(bad("expected lo:hi:step"));
    }
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|e| bad(&e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(bad("need lo <= hi and step > 0"));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| round12(lo + step * i as f64)).collect())
}

impl RunConfig {
    /// Model parameters of one grid cell.
    pub fn model(&self, omega: f64, alpha: f64) -> Result<ModelParams> {
        Ok(ModelParams {
            ising: IsingParams::new(self.n_spins, self.coupling, self.field)?,
            growth: GrowthParams::new(self.in_degree, omega)?,
            decision: DecisionParams::new(alpha)?,
        })
    }

    pub fn meanfield_runs(&self) -> usize {
        self.meanfield_runs.unwrap_or(self.trials)
    }

    /// Re-checks every constraint the simulation modules impose.
    pub fn validate(&self) -> Result<()> {
        IsingParams::new(self.n_spins, self.coupling, self.field)?;
        GrowthParams::new(self.in_degree, 0.0)?;
        for &w in &self.omegas {
            GrowthParams::new(self.in_degree, w)?;
        }
        for &a in &self.alphas {
            DecisionParams::new(a)?;
        }
        if self.ants_per_trial < self.in_degree + 2 {
            return Err(Error::invalid(
                "ants_per_trial",
                format!(
                    "must be >= in_degree + 2 = {}, got {}",
                    self.in_degree + 2,
                    self.ants_per_trial
                ),
            ));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be >= 1"));
        }
        if self.hist_bins == 0 {
            return Err(Error::invalid("hist_bins", "must be >= 1"));
        }
        if self.trace_interval == Some(0) {
            return Err(Error::invalid("trace_interval", "must be >= 1"));
        }
        if self.meanfield_runs == Some(0) {
            return Err(Error::invalid("meanfield_runs", "must be >= 1"));
        }
        Ok(())
    }
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = RunConfig {
            omegas: Vec::new(),
            alphas: Vec::new(),
            ..RunConfig::default()
        };
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line, message };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, found `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key != "omega" && key != "alpha" && !seen.insert(key.to_string()) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            fn num<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T>
            where
                T::Err: std::fmt::Display,
            {
                value.parse().map_err(|e| Error::Parse {
                    line,
                    message: format!("`{key}`: cannot parse `{value}`: {e}"),
                })
            }
            match key {
                "n_spins" => cfg.n_spins = num(key, value, line)?,
                "coupling" => cfg.coupling = num(key, value, line)?,
                "field" => cfg.field = num(key, value, line)?,
                "in_degree" => cfg.in_degree = num(key, value, line)?,
                "omega" => cfg.omegas.push(num(key, value, line)?),
                "alpha" => cfg.alphas.push(num(key, value, line)?),
                "ants_per_trial" => cfg.ants_per_trial = parse_count(key, value, line)?,
                "trials" => cfg.trials = parse_count(key, value, line)?,
                "master_seed" => cfg.master_seed = num(key, value, line)?,
                "mode" => {
                    cfg.mode = match value {
                        "colony" => RunMode::Colony,
                        "meanfield" => RunMode::Meanfield,
                        "both" => RunMode::Both,
                        _ => {
                            return Err(err(format!(
                                "mode must be colony|meanfield|both, got `{value}`"
                            )))
                        }
                    }
                }
                "network_mode" => {
                    cfg.network_mode = match value {
                        "coevolve" => NetworkModeKind::Coevolve,
                        "frozen" => NetworkModeKind::Frozen,
                        _ => {
                            return Err(err(format!(
                                "network_mode must be coevolve|frozen, got `{value}`"
                            )))
                        }
                    }
                }
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                "hist_bins" => cfg.hist_bins = num(key, value, line)?,
                "trace_interval" => cfg.trace_interval = Some(num(key, value, line)?),
                "write_trace" => cfg.write_trace = num(key, value, line)?,
                "meanfield_init" => {
                    cfg.meanfield_init = match value {
                        "colony" => MeanFieldInit::ColonyMatched,
                        "zero" => MeanFieldInit::Zero,
                        _ => {
                            return Err(err(format!(
                                "meanfield_init must be colony|zero, got `{value}`"
                            )))
                        }
                    }
                }
                "meanfield_runs" => cfg.meanfield_runs = Some(num(key, value, line)?),
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Accepts plain integers and `1e5`-style literals that are whole numbers.
fn parse_count(key: &str, value: &str, line: usize) -> Result<usize> {
    if let Ok(n) = value.parse::<usize>() {
        return Ok(n);
    }
    match value.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 1e15 => Ok(x as usize),
        _ => Err(Error::Parse {
            line,
            message: format!("`{key}`: expected a non-negative integer, got `{value}`"),
        }),
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    std::fs::read_to_string(path)?.parse()
}
