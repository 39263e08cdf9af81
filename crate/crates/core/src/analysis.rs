//! Observables over many trials: mean magnetization, ground-state success
//! probability and histograms of the final magnetizations.

use crate::{Error, Result};

/// Parameter echo carried by every [`TrialResult`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialMetadata {
    pub n_spins: usize,
    pub coupling: f64,
    pub field: f64,
    pub in_degree: usize,
    pub omega: f64,
    pub alpha: f64,
    pub n_ants: usize,
    pub frozen_network: bool,
}

/// Outcome of one colony trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    /// `M(k,T)` for every spin.
    pub final_magnetizations: Vec<f64>,
    pub trial_seed: u64,
    /// Subsampled `(t, E(t))` pairs, `t` 1-based.
    pub energy_trace: Vec<(u64, f64)>,
    pub metadata: TrialMetadata,
}

impl TrialResult {
    pub fn mean(&self) -> f64 {
        self.final_magnetizations.iter().sum::<f64>() / self.final_magnetizations.len() as f64
    }

    /// Every spin points up, with `sgn(0) = +1`.
    pub fn found_ground_state(&self) -> bool {
        self.final_magnetizations.iter().all(|&m| m >= 0.0)
    }
}

fn non_empty(results: &[TrialResult]) -> Result<()> {
    if results.is_empty() {
        return Err(Error::Domain("no trial results".into()));
    }
    Ok(())
}

/// `M_mean = (1/NS) Σ_{k,s} M(k,T,s)`.
pub fn mean_magnetization(results: &[TrialResult]) -> Result<f64> {
    non_empty(results)?;
    let (sum, count) = results.iter().fold((0.0, 0usize), |(s, c), r| {
        (
            s + r.final_magnetizations.iter().sum::<f64>(),
            c + r.final_magnetizations.len(),
        )
    });
    Ok(sum / count as f64)
}

/// Standard error of `M_mean` from the spread of per-trial means.
/// Zero for a single trial.
pub fn mean_magnetization_se(results: &[TrialResult]) -> Result<f64> {
    non_empty(results)?;
    let s = results.len();
    if s < 2 {
        return Ok(0.0);
    }
    let means: Vec<f64> = results.iter().map(TrialResult::mean).collect();
    let mu = means.iter().sum::<f64>() / s as f64;
    let var = means.iter().map(|m| (m - mu).powi(2)).sum::<f64>() / (s - 1) as f64;
    Ok((var / s as f64).sqrt())
}

pub fn success_count(results: &[TrialResult]) -> usize {
    results.iter().filter(|r| r.found_ground_state()).count()
}

/// Fraction of trials in which every spin ended with `M(k,T) ≥ 0`.
pub fn success_probability(results: &[TrialResult]) -> Result<f64> {
    non_empty(results)?;
    Ok(success_count(results) as f64 / results.len() as f64)
}

/// Binomial standard error `sqrt(p(1−p)/S)`.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Equal-width bins over `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    /// Values outside `[lo, hi]`, folded into the end bins.
    pub out_of_range: u64,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn edges(&self, bin: usize) -> (f64, f64) {
        let width = (self.hi - self.lo) / self.counts.len() as f64;
        let lo = self.lo + bin as f64 * width;
        let hi = if bin + 1 == self.counts.len() {
            self.hi
        } else {
            self.lo + (bin + 1) as f64 * width
        };
        (lo, hi)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Bins `values`. A value on an interior edge goes to the upper bin; `hi`
/// itself lands in the last bin.
pub fn histogram(values: &[f64], bins: usize, range: (f64, f64)) -> Result<Histogram> {
    let (lo, hi) = range;
    if bins == 0 {
        return Err(Error::invalid("bins", "must be >= 1"));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid(
            "range",
            format!("need finite lo < hi, got [{lo}, {hi}]"),
        ));
    }
    let mut h = Histogram {
        lo,
        hi,
        counts: vec![0; bins],
        out_of_range: 0,
    };
    let width = (hi - lo) / bins as f64;
    for &v in values {
        if !(lo..=hi).contains(&v) {
            h.out_of_range += 1;
        }
        let mut b = ((v - lo) / width).floor();
        if b.is_nan() || b < 0.0 {
            b = 0.0;
        }
        let mut b = (b as usize).min(bins - 1);
        // floor can miss by one bin when an edge is not representable
        if b + 1 < bins && v >= h.edges(b + 1).0 {
            b += 1;
        } else if b > 0 && v < h.edges(b).0 {
            b -= 1;
        }
        h.counts[b] += 1;
    }
    Ok(h)
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain(
            "KS statistic needs two non-empty samples".into(),
        ));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic critical value `c(α)·sqrt((n+m)/(nm))` with
/// `c(α) = sqrt(−ln(α/2)/2)`.
pub fn ks_critical_value(n: usize, m: usize, significance: f64) -> f64 {
    let c = (-(significance / 2.0).ln() / 2.0).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}

/// Summary of one `(ω, α)` grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub omega: f64,
    pub alpha: f64,
    pub m_mean: f64,
    pub m_mean_se: f64,
    pub success_probability: f64,
    pub success_se: f64,
    pub successes: usize,
    pub histogram: Histogram,
    pub n_trials: usize,
}

impl SweepCell {
    pub fn from_results(
        omega: f64,
        alpha: f64,
        results: &[TrialResult],
        bins: usize,
    ) -> Result<Self> {
        let m_mean = mean_magnetization(results)?;
        let successes = success_count(results);
        let p = successes as f64 / results.len() as f64;
        let values: Vec<f64> = results
            .iter()
            .flat_map(|r| r.final_magnetizations.iter().copied())
            .collect();
        Ok(Self {
            omega,
            alpha,
            m_mean,
            m_mean_se: mean_magnetization_se(results)?,
            success_probability: p,
            success_se: binomial_se(p, results.len()),
            successes,
            histogram: histogram(&values, bins, (-1.0, 1.0))?,
            n_trials: results.len(),
        })
    }
}
