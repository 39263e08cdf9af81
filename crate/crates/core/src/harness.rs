//! Seeded parallel sweeps over the `(ω, α)` grid and their CSV outputs.
//!
//! Layout of an output directory:
//!
//! ```text
//! sweep.csv              one row per completed cell
//! hist.csv               histogram rows per completed cell
//! cells/wII_aJJ/         per-cell trial data (trials.csv, trace.csv, DONE)
//! theory.csv             fixed points per α            (meanfield mode)
//! meanfield.csv          integrator summary per cell   (meanfield mode)
//! meanfield_traj.csv     ensemble trajectory per cell  (meanfield mode)
//! ```
//!
//! Trial seeds depend only on the master seed and the grid indices, and
//! results are written in grid order, so the bytes do not depend on the
//! number of threads.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::analysis::{SweepCell, TrialMetadata, TrialResult};
use crate::colony::{run_trial, NetworkMode, TrialConfig};
use crate::config::{NetworkModeKind, RunConfig};
use crate::meanfield::{integrate, theory_point, IntegrateOptions, TheoryPoint, Trajectory};
use crate::refnet::{GrowthParams, NetworkRecording};
use crate::rng::{derive_seed, trial_rng};
use crate::{Error, Result};

pub const SWEEP_HEADER: &str =
    "omega,alpha,m_mean,m_mean_se,success_prob,success_se,n_trials,n_spins,T,r,J,h,seed";
pub const HIST_HEADER: &str = "omega,alpha,bin_lo,bin_hi,count";
pub const TRACE_HEADER: &str = "trial,t,energy";
pub const TRIALS_HEADER: &str = "trial,seed,spin,m";
pub const THEORY_HEADER: &str = "alpha,m_star,alpha_s,alpha_c,unstable";
pub const MEANFIELD_HEADER: &str = "omega,alpha,m_mean,m_mean_se,n_runs,T";
pub const MEANFIELD_TRAJ_HEADER: &str = "omega,alpha,t,m_mean,m_sd";

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "ANTNET_OUT_DIR";

const DONE_MARKER: &str = "DONE";

pub fn trial_seed(master: u64, omega_index: usize, alpha_index: usize, trial: usize) -> u64 {
    derive_seed(
        master,
        &[0, omega_index as u64, alpha_index as u64, trial as u64],
    )
}

/// Seed of the frozen network for `ω`; keyed by value so `dump-network`
/// reproduces the network a frozen sweep replays.
pub fn network_seed(master: u64, omega: f64) -> u64 {
    derive_seed(master, &[1, omega.to_bits()])
}

pub fn meanfield_seed(master: u64, omega_index: usize, alpha_index: usize, run: usize) -> u64 {
    derive_seed(
        master,
        &[2, omega_index as u64, alpha_index as u64, run as u64],
    )
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    /// Worker threads; `None` uses every core.
    pub threads: Option<usize>,
    /// Reuse cells that already carry a completion marker.
    pub resume: bool,
    pub out_dir: PathBuf,
}

impl SweepOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            ..Self::default()
        }
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads.unwrap_or(0))
            .build()
            .map_err(|e| Error::Configuration(format!("thread pool: {e}")))
    }
}

#[derive(Debug, Clone)]
pub enum CellStatus {
    Done { cell: SweepCell, reused: bool },
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct CellReport {
    pub omega_index: usize,
    pub alpha_index: usize,
    pub omega: f64,
    pub alpha: f64,
    pub status: CellStatus,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Default)]
pub struct SweepReport {
    pub cells: Vec<CellReport>,
    pub warnings: Vec<String>,
}

impl SweepReport {
    pub fn failed(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| matches!(c.status, CellStatus::Failed(_)))
            .count()
    }

    pub fn completed(&self) -> impl Iterator<Item = &SweepCell> {
        self.cells.iter().filter_map(|c| match &c.status {
            CellStatus::Done { cell, .. } => Some(cell),
            CellStatus::Failed(_) => None,
        })
    }

    pub fn cell(&self, omega: f64, alpha: f64) -> Option<&SweepCell> {
        self.completed()
            .find(|c| c.omega == omega && c.alpha == alpha)
    }
}

fn cell_dir(out: &Path, wi: usize, ai: usize) -> PathBuf {
    out.join("cells").join(format!("w{wi:02}_a{ai:02}"))
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn metadata(config: &RunConfig, omega: f64, alpha: f64) -> TrialMetadata {
    TrialMetadata {
        n_spins: config.n_spins,
        coupling: config.coupling,
        field: config.field,
        in_degree: config.in_degree,
        omega,
        alpha,
        n_ants: config.ants_per_trial,
        frozen_network: config.network_mode == NetworkModeKind::Frozen,
    }
}

/// Grows the network every trial of a frozen sweep at `ω` replays.
pub fn frozen_network(config: &RunConfig, omega: f64) -> Result<NetworkRecording> {
    let params = GrowthParams::new(config.in_degree, omega)?;
    let mut rng = trial_rng(network_seed(config.master_seed, omega));
    // one extra ant for the final observation
    Ok(NetworkRecording::grow(params, config.ants_per_trial + 1, &mut rng)?.0)
}

/// Runs the `S` trials of one cell, in parallel on the current pool.
pub fn run_cell_trials(
    config: &RunConfig,
    omega_index: usize,
    alpha_index: usize,
    network: NetworkMode,
) -> Result<Vec<TrialResult>> {
    let omega = config.omegas[omega_index];
    let alpha = config.alphas[alpha_index];
    let trial_config = TrialConfig {
        params: config.model(omega, alpha)?,
        n_ants: config.ants_per_trial,
        trace_interval: config.trace_interval,
        network,
    };
    (0..config.trials)
        .into_par_iter()
        .map(|s| {
            run_trial(
                &trial_config,
                trial_seed(config.master_seed, omega_index, alpha_index, s),
            )
        })
        .collect()
}

fn trials_csv(results: &[TrialResult]) -> String {
    let mut out = String::from(TRIALS_HEADER);
    out.push('\n');
    for (s, r) in results.iter().enumerate() {
        for (k, m) in r.final_magnetizations.iter().enumerate() {
            let _ = writeln!(out, "{s},{},{k},{m}", r.trial_seed);
        }
    }
    out
}

fn trace_csv(results: &[TrialResult]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for (s, r) in results.iter().enumerate() {
        for (t, e) in &r.energy_trace {
            let _ = writeln!(out, "{s},{t},{e}");
        }
    }
    out
}

/// Reads back `trials.csv`; energy traces are not restored.
pub fn load_trials(path: &Path, meta: TrialMetadata) -> Result<Vec<TrialResult>> {
    let file = BufReader::new(fs::File::open(path)?);
    let mut results: Vec<TrialResult> = Vec::new();
    for (i, line) in file.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line != TRIALS_HEADER {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("unexpected header in {}", path.display()),
                });
            }
            continue;
        }
        let bad = |m: String| Error::Parse {
            line: i + 1,
            message: format!("{}: {m}", path.display()),
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(bad(format!("expected 4 fields, got {}", f.len())));
        }
        let trial: usize = f[0].parse().map_err(|e| bad(format!("{e}")))?;
        let seed: u64 = f[1].parse().map_err(|e| bad(format!("{e}")))?;
        let m: f64 = f[3].parse().map_err(|e| bad(format!("{e}")))?;
        if trial == results.len() {
            results.push(TrialResult {
                final_magnetizations: Vec::with_capacity(meta.n_spins),
                trial_seed: seed,
                energy_trace: Vec::new(),
                metadata: meta,
            });
        } else if trial + 1 != results.len() {
            return Err(bad(format!("trial {trial} out of order")));
        }
        results[trial].final_magnetizations.push(m);
    }
    Ok(results)
}

fn sweep_row(out: &mut String, config: &RunConfig, cell: &SweepCell) {
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        cell.omega,
        cell.alpha,
        cell.m_mean,
        cell.m_mean_se,
        cell.success_probability,
        cell.success_se,
        cell.n_trials,
        config.n_spins,
        config.ants_per_trial,
        config.in_degree,
        config.coupling,
        config.field,
        config.master_seed
    );
}

fn hist_rows(out: &mut String, cell: &SweepCell) {
    let h = &cell.histogram;
    for (b, count) in h.counts.iter().enumerate() {
        let (lo, hi) = h.edges(b);
        let _ = writeln!(out, "{},{},{lo},{hi},{count}", cell.omega, cell.alpha);
    }
}

/// Runs every colony cell and writes `sweep.csv` and `hist.csv`.
///
/// A failing trial marks its cell failed; the remaining cells still run.
pub fn run_sweep(config: &RunConfig, opts: &SweepOptions) -> Result<SweepReport> {
    config.validate()?;
    let mut report = SweepReport::default();
    if config.omegas.is_empty() || config.alphas.is_empty() {
        report
            .warnings
            .push("empty omega or alpha list: nothing to simulate".into());
    }
    let out = &opts.out_dir;
    fs::create_dir_all(out.join("cells"))?;
    let pool = opts.pool()?;

    for (wi, &omega) in config.omegas.iter().enumerate() {
        let mut network: Option<std::result::Result<Arc<NetworkRecording>, String>> = None;
        for (ai, &alpha) in config.alphas.iter().enumerate() {
            let started = Instant::now();
            let dir = cell_dir(out, wi, ai);
            let meta = metadata(config, omega, alpha);
            let status = if opts.resume && dir.join(DONE_MARKER).exists() {
                load_trials(&dir.join("trials.csv"), meta)
                    .and_then(|rs| SweepCell::from_results(omega, alpha, &rs, config.hist_bins))
                    .map(|cell| CellStatus::Done { cell, reused: true })
                    .unwrap_or_else(|e| CellStatus::Failed(e.to_string()))
            } else {
                let mode = match config.network_mode {
                    NetworkModeKind::Coevolve => Ok(NetworkMode::Coevolve),
                    NetworkModeKind::Frozen => network
                        .get_or_insert_with(|| {
                            pool.install(|| frozen_network(config, omega))
                                .map(Arc::new)
                                .map_err(|e| e.to_string())
                        })
                        .clone()
                        .map(NetworkMode::Frozen),
                };
                match mode.and_then(|mode| {
                    pool.install(|| run_cell_trials(config, wi, ai, mode))
                        .map_err(|e| e.to_string())
                }) {
                    Ok(results) => persist_cell(&dir, config, &results)
                        .and_then(|_| {
                            SweepCell::from_results(omega, alpha, &results, config.hist_bins)
                        })
                        .map(|cell| CellStatus::Done {
                            cell,
                            reused: false,
                        })
                        .unwrap_or_else(|e| CellStatus::Failed(e.to_string())),
                    Err(e) => CellStatus::Failed(e),
                }
            };
            report.cells.push(CellReport {
                omega_index: wi,
                alpha_index: ai,
                omega,
                alpha,
                status,
                elapsed: started.elapsed(),
            });
        }
    }
    write_summaries(out, config, &report)?;
    Ok(report)
}

fn persist_cell(dir: &Path, config: &RunConfig, results: &[TrialResult]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let _ = fs::remove_file(dir.join(DONE_MARKER));
    write_atomic(&dir.join("trials.csv"), &trials_csv(results))?;
    if config.write_trace {
        write_atomic(&dir.join("trace.csv"), &trace_csv(results))?;
    }
    fs::write(dir.join(DONE_MARKER), "")?;
    Ok(())
}

fn write_summaries(out: &Path, config: &RunConfig, report: &SweepReport) -> Result<()> {
    let mut sweep = String::from(SWEEP_HEADER);
    sweep.push('\n');
    let mut hist = String::from(HIST_HEADER);
    hist.push('\n');
    let mut failures = String::new();
    for c in &report.cells {
        match &c.status {
            CellStatus::Done { cell, .. } => {
                sweep_row(&mut sweep, config, cell);
                hist_rows(&mut hist, cell);
            }
            CellStatus::Failed(e) => {
                let _ = writeln!(failures, "{},{},{}", c.omega, c.alpha, e.replace('\n', " "));
            }
        }
    }
    write_atomic(&out.join("sweep.csv"), &sweep)?;
    write_atomic(&out.join("hist.csv"), &hist)?;
    let failed = out.join("failed_cells.csv");
    if failures.is_empty() {
        let _ = fs::remove_file(failed);
    } else {
        write_atomic(&failed, &format!("omega,alpha,error\n{failures}"))?;
    }
    Ok(())
}

/// Fixed points for each `α`.
pub fn theory_table(coupling: f64, field: f64, alphas: &[f64]) -> Result<Vec<TheoryPoint>> {
    alphas
        .iter()
        .map(|&a| theory_point(coupling, field, a))
        .collect()
}

pub fn theory_csv(points: &[TheoryPoint]) -> String {
    let mut out = String::from(THEORY_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.alpha,
            p.m_star,
            p.alpha_s,
            p.alpha_c,
            u8::from(p.unstable())
        );
    }
    out
}

/// Ensemble summary of integrator runs at one cell.
#[derive(Debug, Clone)]
pub struct MeanfieldCell {
    pub omega: f64,
    pub alpha: f64,
    pub m_mean: f64,
    pub m_mean_se: f64,
    pub n_runs: usize,
    /// `(t, mean, sd)` over runs of the spin-averaged magnetization.
    pub trajectory: Vec<(usize, f64, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct MeanfieldReport {
    pub theory: Vec<TheoryPoint>,
    pub cells: Vec<MeanfieldCell>,
    pub warnings: Vec<String>,
}

fn summarize_runs(omega: f64, alpha: f64, runs: &[Trajectory]) -> MeanfieldCell {
    let n = runs.len() as f64;
    let finals: Vec<f64> = runs.iter().map(|r| r.last().mean()).collect();
    let m_mean = finals.iter().sum::<f64>() / n;
    let m_mean_se = if runs.len() > 1 {
        (finals.iter().map(|m| (m - m_mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    let steps = runs[0].snapshots.len();
    let trajectory = (0..steps)
        .map(|i| {
            let ms: Vec<f64> = runs.iter().map(|r| r.snapshots[i].mean()).collect();
            let mu = ms.iter().sum::<f64>() / n;
            let sd = (ms.iter().map(|m| (m - mu).powi(2)).sum::<f64>() / n).sqrt();
            (runs[0].snapshots[i].t, mu, sd)
        })
        .collect();
    MeanfieldCell {
        omega,
        alpha,
        m_mean,
        m_mean_se,
        n_runs: runs.len(),
        trajectory,
    }
}

/// Writes `theory.csv` and integrates the SDE at every grid cell.
pub fn run_meanfield(config: &RunConfig, opts: &SweepOptions) -> Result<MeanfieldReport> {
    config.validate()?;
    let mut report = MeanfieldReport::default();
    if config.alphas.is_empty() {
        report
            .warnings
            .push("empty alpha list: nothing to integrate".into());
        return Ok(report);
    }
    let out = &opts.out_dir;
    fs::create_dir_all(out)?;
    report.theory = theory_table(config.coupling, config.field, &config.alphas)?;
    write_atomic(&out.join("theory.csv"), &theory_csv(&report.theory))?;

    let pool = opts.pool()?;
    let integrate_opts = IntegrateOptions {
        init: config.meanfield_init,
        snapshot_interval: config
            .trace_interval
            .unwrap_or((config.ants_per_trial / 1000).max(1)),
    };
    for (wi, &omega) in config.omegas.iter().enumerate() {
        for (ai, &alpha) in config.alphas.iter().enumerate() {
            let params = config.model(omega, alpha)?;
            let runs: Vec<Trajectory> = pool.install(|| {
                (0..config.meanfield_runs())
                    .into_par_iter()
                    .map(|run| {
                        integrate(
                            &params,
                            config.ants_per_trial,
                            meanfield_seed(config.master_seed, wi, ai, run),
                            &integrate_opts,
                        )
                    })
                    .collect::<Result<_>>()
            })?;
            report.cells.push(summarize_runs(omega, alpha, &runs));
        }
    }

    let mut summary = String::from(MEANFIELD_HEADER);
    summary.push('\n');
    let mut traj = String::from(MEANFIELD_TRAJ_HEADER);
    traj.push('\n');
    for c in &report.cells {
        let _ = writeln!(
            summary,
            "{},{},{},{},{},{}",
            c.omega, c.alpha, c.m_mean, c.m_mean_se, c.n_runs, config.ants_per_trial
        );
        for (t, m, sd) in &c.trajectory {
            let _ = writeln!(traj, "{},{},{t},{m},{sd}", c.omega, c.alpha);
        }
    }
    write_atomic(&out.join("meanfield.csv"), &summary)?;
    write_atomic(&out.join("meanfield_traj.csv"), &traj)?;
    Ok(report)
}

/// Writes the network a frozen sweep at `ω` would replay.
pub fn dump_network<W: Write>(config: &RunConfig, omega: f64, out: W) -> Result<()> {
    frozen_network(config, omega)?.write_dump(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        RunConfig {
            n_spins: 6,
            in_degree: 2,
            omegas: vec![0.0, -1.0],
            alphas: vec![0.5, 0.9],
            ants_per_trial: 40,
            trials: 3,
            master_seed: 5,
            ..RunConfig::default()
        }
    }

    #[test]
    fn seeds_are_index_keyed() {
        assert_ne!(trial_seed(1, 0, 0, 0), trial_seed(1, 0, 0, 1));
        assert_ne!(trial_seed(1, 0, 1, 0), trial_seed(1, 1, 0, 0));
        assert_ne!(trial_seed(1, 0, 0, 0), meanfield_seed(1, 0, 0, 0));
        assert_ne!(network_seed(1, -1.0), network_seed(1, -0.9999));
    }

    #[test]
    fn trials_round_trip_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small();
        let results = run_cell_trials(&cfg, 0, 1, NetworkMode::Coevolve).unwrap();
        let path = dir.path().join("trials.csv");
        fs::write(&path, trials_csv(&results)).unwrap();
        let back = load_trials(&path, metadata(&cfg, 0.0, 0.9)).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in results.iter().zip(&back) {
            assert_eq!(a.final_magnetizations, b.final_magnetizations);
            assert_eq!(a.trial_seed, b.trial_seed);
        }
        let a = SweepCell::from_results(0.0, 0.9, &results, 50).unwrap();
        let b = SweepCell::from_results(0.0, 0.9, &back, 50).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn theory_csv_flags_unstable_rows() {
        let pts = theory_table(0.1, 0.1, &[0.5, 0.9]).unwrap();
        let csv = theory_csv(&pts);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], THEORY_HEADER);
        assert!(lines[1].starts_with("0.5,0.125,"));
        assert!(lines[1].ends_with(",0"));
        assert!(lines[2].starts_with("0.9,0.9,"));
        assert!(lines[2].ends_with(",1"));
    }

    #[test]
    fn meanfield_empty_alpha_is_noop() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            alphas: vec![],
            ..small()
        };
        let rep = run_meanfield(&cfg, &SweepOptions::new(dir.path())).unwrap();
        assert_eq!(rep.warnings.len(), 1);
        assert!(!dir.path().join("theory.csv").exists());
    }
}
