//! The ant colony search.
//!
//! One ant decides per step. It selects `r` earlier ants on the reference
//! network, reads their Boltzmann-weighted votes for every spin and draws its
//! own choices from the linear decision rule `f(z) = (1−α)/2 + αz`.

use std::sync::Arc;

use rand::Rng;

use crate::analysis::{TrialMetadata, TrialResult};
use crate::ising::{self, IsingParams, SpinConfig};
use crate::refnet::{GrowthParams, NetworkRecording, NetworkState, ReferenceSet};
use crate::rng::trial_rng;
use crate::{Error, Result};

/// Response `α` of an ant to the pheromone ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionParams {
    alpha: f64,
}

impl DecisionParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::invalid(
                "alpha",
                format!("must lie in [0, 1), got {alpha}"),
            ));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Probability of choosing `X = 1` given pheromone ratio `z`.
    #[inline]
    pub fn choice_probability(&self, z: f64) -> f64 {
        (1.0 - self.alpha) * 0.5 + self.alpha * z
    }

    /// `M = 2α(z − ½)`, the expected spin of the next choice.
    #[inline]
    pub fn magnetization(&self, z: f64) -> f64 {
        2.0 * self.alpha * (z - 0.5)
    }
}

/// Everything that defines a colony run apart from its length and seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub ising: IsingParams,
    pub growth: GrowthParams,
    pub decision: DecisionParams,
}

/// One ant's choices and the energy of that configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct AntRecord {
    pub choices: SpinConfig,
    pub energy: f64,
}

impl AntRecord {
    /// Log of the Boltzmann weight `e^{−E}`.
    #[inline]
    pub fn log_weight(&self) -> f64 {
        -self.energy
    }
}

/// Pheromone read by one ant from its reference set.
#[derive(Debug, Clone, PartialEq)]
pub struct PheromoneAggregate {
    /// `log S`, the log of the summed Boltzmann weights.
    pub log_total: f64,
    /// `Z(k) = S₁(k) / S` per spin.
    pub ratios: Vec<f64>,
}

impl PheromoneAggregate {
    pub fn magnetizations(&self, decision: &DecisionParams) -> Vec<f64> {
        self.ratios
            .iter()
            .map(|&z| decision.magnetization(z))
            .collect()
    }
}

/// Sums Boltzmann weights over `refs`, shifted by the largest log weight.
///
/// Weights are accumulated in ascending ant order, so every `S₁(k)` is a
/// partial sum of the same terms as `S` and `Z(k) ≤ 1` holds exactly.
pub fn aggregate_pheromone(ants: &[AntRecord], refs: &ReferenceSet) -> Result<PheromoneAggregate> {
    let first = *refs
        .ants()
        .first()
        .ok_or_else(|| Error::Domain("empty reference set".into()))?;
    if let Some(&last) = refs.ants().last() {
        if last >= ants.len() {
            return Err(Error::IndexOutOfRange {
                index: last,
                len: ants.len(),
            });
        }
    }
    let n = ants[first].choices.len();
    let shift = refs
        .ants()
        .iter()
        .map(|&s| ants[s].log_weight())
        .fold(f64::NEG_INFINITY, f64::max);

    let mut total = 0.0;
    let mut ones = vec![0.0; n];
    for &s in refs.ants() {
        let ant = &ants[s];
        let w = (ant.log_weight() - shift).exp();
        total += w;
        for (chunk, &word) in ones.chunks_mut(64).zip(ant.choices.words()) {
            let mut bits = word;
            while bits != 0 {
                chunk[bits.trailing_zeros() as usize] += w;
                bits &= bits - 1;
            }
        }
    }
    for z in &mut ones {
        *z /= total;
    }
    Ok(PheromoneAggregate {
        log_total: shift + total.ln(),
        ratios: ones,
    })
}

/// Draws every spin independently with probability `f(Z(k))`, in spin order.
pub fn decide<R: Rng + ?Sized>(
    agg: &PheromoneAggregate,
    params: &DecisionParams,
    rng: &mut R,
) -> SpinConfig {
    let mut config = SpinConfig::zeros(agg.ratios.len());
    for (k, &z) in agg.ratios.iter().enumerate() {
        let u: f64 = rng.random();
        if u < params.choice_probability(z) {
            config.set(k, true);
        }
    }
    config
}

/// Fair-coin choices, consuming `n` uniforms like [`decide`] with `α = 0`.
pub fn random_config<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SpinConfig {
    let mut config = SpinConfig::zeros(n);
    for k in 0..n {
        let u: f64 = rng.random();
        if u < 0.5 {
            config.set(k, true);
        }
    }
    config
}

/// Where reference sets come from.
#[derive(Debug, Clone, Default)]
pub enum NetworkMode {
    /// Sample on the fly from the trial's stream.
    #[default]
    Coevolve,
    /// Replay a previously grown network.
    Frozen(Arc<NetworkRecording>),
}

/// Output of a single colony step.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub refs: ReferenceSet,
    pub aggregate: PheromoneAggregate,
    pub energy: f64,
}

/// History of a trial: every ant so far plus the reference network.
#[derive(Debug, Clone)]
pub struct Colony {
    params: ModelParams,
    ants: Vec<AntRecord>,
    network: NetworkState,
    mode: NetworkMode,
}

impl Colony {
    /// Seeds `r+1` ants with fair-coin choices on the complete graph.
    pub fn new<R: Rng + ?Sized>(
        params: ModelParams,
        mode: NetworkMode,
        rng: &mut R,
    ) -> Result<Self> {
        if let NetworkMode::Frozen(rec) = &mode {
            if rec.params != params.growth {
                return Err(Error::Configuration(
                    "frozen network was grown with different parameters".into(),
                ));
            }
        }
        let network = NetworkState::init_complete(params.growth);
        let n = params.ising.n_spins();
        let ants = (0..network.t())
            .map(|_| {
                let choices = random_config(n, rng);
                let energy = ising::energy(&params.ising, &choices)?;
                Ok(AntRecord { choices, energy })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params,
            ants,
            network,
            mode,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn ants(&self) -> &[AntRecord] {
        &self.ants
    }

    pub fn network(&self) -> &NetworkState {
        &self.network
    }

    pub fn t(&self) -> usize {
        self.ants.len()
    }

    /// Reference set the next ant would read, without recording it.
    pub fn next_references<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<ReferenceSet> {
        match &self.mode {
            NetworkMode::Coevolve => self.network.select_references(rng),
            NetworkMode::Frozen(rec) => {
                let i = self.t() - self.params.growth.seed_size();
                rec.selections.get(i).cloned().ok_or_else(|| {
                    Error::Configuration(format!(
                        "frozen network has {} ants, trial needs more",
                        rec.n_ants()
                    ))
                })
            }
        }
    }

    /// Pheromone the next ant would observe. Consumes the reference draws.
    pub fn observe<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<PheromoneAggregate> {
        let refs = self.next_references(rng)?;
        aggregate_pheromone(&self.ants, &refs)
    }

    /// Select, aggregate, decide, evaluate and record one ant.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<StepRecord> {
        let refs = self.next_references(rng)?;
        let aggregate = aggregate_pheromone(&self.ants, &refs)?;
        let choices = decide(&aggregate, &self.params.decision, rng);
        let energy = ising::energy(&self.params.ising, &choices)?;
        self.network.apply_selection(&refs)?;
        self.ants.push(AntRecord { choices, energy });
        Ok(StepRecord {
            refs,
            aggregate,
            energy,
        })
    }
}

/// Length, trace density and network source of a trial.
#[derive(Debug, Clone)]
pub struct TrialConfig {
    pub params: ModelParams,
    /// Total ants `T`, including the `r+1` seed ants.
    pub n_ants: usize,
    /// Energy trace stride; `None` means `max(1, T/1000)`.
    pub trace_interval: Option<usize>,
    pub network: NetworkMode,
}

impl TrialConfig {
    pub fn new(params: ModelParams, n_ants: usize) -> Self {
        Self {
            params,
            n_ants,
            trace_interval: None,
            network: NetworkMode::Coevolve,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let min = self.params.growth.seed_size() + 1;
        if self.n_ants < min {
            return Err(Error::invalid(
                "ants_per_trial",
                format!("must be >= r+2 = {min}, got {}", self.n_ants),
            ));
        }
        if self.trace_interval == Some(0) {
            return Err(Error::invalid("trace_interval", "must be >= 1"));
        }
        if let NetworkMode::Frozen(rec) = &self.network {
            if rec.n_ants() < self.n_ants + 1 {
                return Err(Error::Configuration(format!(
                    "frozen network has {} ants, need {}",
                    rec.n_ants(),
                    self.n_ants + 1
                )));
            }
        }
        Ok(())
    }

    pub fn effective_trace_interval(&self) -> usize {
        self.trace_interval.unwrap_or((self.n_ants / 1000).max(1))
    }
}

/// Runs one trial to `T` ants and reports `M(k,T) = 2α(Z(k,T) − ½)`, where
/// `Z(k,T)` is the pheromone ratio ant `T+1` would observe.
pub fn run_trial(config: &TrialConfig, seed: u64) -> Result<TrialResult> {
    config.validate()?;
    let mut rng = trial_rng(seed);
    let mut colony = Colony::new(config.params, config.network.clone(), &mut rng)?;
    let interval = config.effective_trace_interval();
    let t_final = config.n_ants;

    let mut trace = Vec::with_capacity(t_final / interval + 2);
    for (i, ant) in colony.ants().iter().enumerate() {
        let t = i + 1;
        if t % interval == 0 {
            trace.push((t as u64, ant.energy));
        }
    }
    while colony.t() < t_final {
        let rec = colony.step(&mut rng)?;
        let t = colony.t();
        if t % interval == 0 || t == t_final {
            trace.push((t as u64, rec.energy));
        }
    }
    let last = colony.observe(&mut rng)?;
    let p = &config.params;
    Ok(TrialResult {
        final_magnetizations: last.magnetizations(&p.decision),
        trial_seed: seed,
        energy_trace: trace,
        metadata: TrialMetadata {
            n_spins: p.ising.n_spins(),
            coupling: p.ising.coupling(),
            field: p.ising.field(),
            in_degree: p.growth.in_degree(),
            omega: p.growth.asymmetry(),
            alpha: p.decision.alpha(),
            n_ants: t_final,
            frozen_network: matches!(config.network, NetworkMode::Frozen(_)),
        },
    })
}
