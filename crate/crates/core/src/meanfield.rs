//! Mean-field theory of the colony.
//!
//! In terms of the magnetizations `M(k,t) = 2α(Z(k,t) − ½)` the pheromone
//! dynamics reduce to a multivariate Ornstein–Uhlenbeck process
//!
//! ```text
//! dM(k) = −(r/D(t)) ∂U/∂M(k) dt + (αr/D(t)) dW(k)
//! U(M)  = ½(1−α) Σ M(k)² − α[h Σ M(k) + J/(N−1) Σ_{k≠l} M(k)M(l)]
//! ```
//!
//! with `D(t)` the total popularity of the reference network. The uniform
//! restriction `u(m) = U(m,…,m)/N = ½(1−α(1+2J))m² − αhm` gives the fixed
//! point and thresholds in [`TheoryPoint`].

use rand::Rng;
use rand_distr::StandardNormal;

use crate::colony::{aggregate_pheromone, random_config, AntRecord, ModelParams};
use crate::ising;
use crate::refnet::{total_popularity, ReferenceSet};
use crate::rng::trial_rng;
use crate::{Error, Result};

/// Closed-form predictions at one `(J, h, α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryPoint {
    pub alpha: f64,
    /// Minimizer of `u(m)` on `[−α, α]`.
    pub m_star: f64,
    /// Saturation threshold `(1 − h/2)/(1 + 2J)`.
    pub alpha_s: f64,
    /// Instability threshold `1/(1 + 2J)`.
    pub alpha_c: f64,
    /// Coefficient of `m²` in `2u(m)`: `1 − α(1 + 2J)`.
    pub potential_curvature: f64,
}

impl TheoryPoint {
    /// Above `α_c` the interior minimum is lost and `±α` are the stable states.
    pub fn unstable(&self) -> bool {
        self.alpha > self.alpha_c
    }
}

pub fn theory_point(coupling: f64, field: f64, alpha: f64) -> Result<TheoryPoint> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::invalid(
            "alpha",
            format!("must lie in [0, 1), got {alpha}"),
        ));
    }
    if !(coupling > 0.0) || !coupling.is_finite() {
        return Err(Error::invalid(
            "coupling",
            format!("must be positive, got {coupling}"),
        ));
    }
    if !field.is_finite() {
        return Err(Error::invalid("field", "must be finite"));
    }
    let stiff = 1.0 + 2.0 * coupling;
    let alpha_c = 1.0 / stiff;
    let alpha_s = (1.0 - field / 2.0) / stiff;
    let curvature = 1.0 - alpha * stiff;
    let m_star = if alpha < alpha_s && curvature > 0.0 {
        // the unconstrained minimum can overshoot the range just below α_s
        (alpha * field / curvature).min(alpha)
    } else {
        alpha
    };
    Ok(TheoryPoint {
        alpha,
        m_star,
        alpha_s,
        alpha_c,
        potential_curvature: curvature,
    })
}

/// `u(m) = ½(1 − α(1+2J))m² − αhm`.
pub fn uniform_potential(coupling: f64, field: f64, alpha: f64, m: f64) -> f64 {
    0.5 * (1.0 - alpha * (1.0 + 2.0 * coupling)) * m * m - alpha * field * m
}

/// `U({M(k)})`; the pair sum excludes the diagonal.
pub fn potential(m: &[f64], coupling: f64, field: f64, alpha: f64) -> f64 {
    let n = m.len() as f64;
    let sum: f64 = m.iter().sum();
    let sq: f64 = m.iter().map(|x| x * x).sum();
    let pairs = if m.len() > 1 {
        coupling / (n - 1.0) * (sum * sum - sq)
    } else {
        0.0
    };
    0.5 * (1.0 - alpha) * sq - alpha * (field * sum + pairs)
}

/// Drift per unit `r/D(t)`: `−(1−α)M(k) + α(h + 2J/(N−1) Σ_{l≠k} M(l))`.
pub fn drift(m: &[f64], coupling: f64, field: f64, alpha: f64) -> Vec<f64> {
    let n = m.len();
    let sum: f64 = m.iter().sum();
    let scale = if n > 1 {
        2.0 * coupling / (n - 1) as f64
    } else {
        0.0
    };
    m.iter()
        .map(|&mk| -(1.0 - alpha) * mk + alpha * (field + scale * (sum - mk)))
        .collect()
}

/// Magnetizations of the integrator at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldState {
    pub t: usize,
    pub magnetizations: Vec<f64>,
}

impl MeanFieldState {
    pub fn mean(&self) -> f64 {
        self.magnetizations.iter().sum::<f64>() / self.magnetizations.len() as f64
    }
}

/// One Euler–Maruyama step with `dt = 1`, clamped to `[−α, α]`.
pub fn sde_step<R: Rng + ?Sized>(
    state: &mut MeanFieldState,
    params: &ModelParams,
    rng: &mut R,
) -> Result<()> {
    let r = params.growth.in_degree();
    if state.t < r + 1 {
        return Err(Error::Domain(format!("SDE starts at t = r+1 = {}", r + 1)));
    }
    let rate = r as f64 / total_popularity(&params.growth, state.t)?;
    let alpha = params.decision.alpha();
    let (j, h) = (params.ising.coupling(), params.ising.field());
    let d = drift(&state.magnetizations, j, h, alpha);
    for (mk, dk) in state.magnetizations.iter_mut().zip(d) {
        let xi: f64 = rng.sample(StandardNormal);
        *mk = (*mk + rate * dk + alpha * rate * xi).clamp(-alpha, alpha);
    }
    state.t += 1;
    Ok(())
}

/// Starting point of an integration at `t = r+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanFieldInit {
    /// `M = 2α(Ẑ − ½)` with `Ẑ` the Boltzmann-weighted vote of `r+1`
    /// fair-coin ants, as the colony sees it after seeding.
    #[default]
    ColonyMatched,
    Zero,
}

#[derive(Debug, Clone)]
pub struct IntegrateOptions {
    pub init: MeanFieldInit,
    /// Snapshot every this many steps; the first and last states are always kept.
    pub snapshot_interval: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            init: MeanFieldInit::ColonyMatched,
            snapshot_interval: 1000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<MeanFieldState>,
}

impl Trajectory {
    pub fn last(&self) -> &MeanFieldState {
        self.snapshots.last().expect("trajectory is never empty")
    }
}

pub fn initial_state<R: Rng + ?Sized>(
    params: &ModelParams,
    init: MeanFieldInit,
    rng: &mut R,
) -> Result<MeanFieldState> {
    let seed = params.growth.seed_size();
    let n = params.ising.n_spins();
    let magnetizations = match init {
        MeanFieldInit::Zero => vec![0.0; n],
        MeanFieldInit::ColonyMatched => {
            let ants = (0..seed)
                .map(|_| {
                    let choices = random_config(n, rng);
                    let energy = ising::energy(&params.ising, &choices)?;
                    Ok(AntRecord { choices, energy })
                })
                .collect::<Result<Vec<_>>>()?;
            let all = ReferenceSet::new(seed, (0..seed).collect())?;
            aggregate_pheromone(&ants, &all)?.magnetizations(&params.decision)
        }
    };
    Ok(MeanFieldState {
        t: seed,
        magnetizations,
    })
}

/// Integrates from `t = r+1` to `T`.
pub fn integrate(
    params: &ModelParams,
    n_steps: usize,
    seed: u64,
    options: &IntegrateOptions,
) -> Result<Trajectory> {
    let start = params.growth.seed_size();
    if n_steps < start + 1 {
        return Err(Error::invalid(
            "ants_per_trial",
            format!("must be >= r+2 = {}, got {n_steps}", start + 1),
        ));
    }
    if options.snapshot_interval == 0 {
        return Err(Error::invalid("snapshot_interval", "must be >= 1"));
    }
    let mut rng = trial_rng(seed);
    let mut state = initial_state(params, options.init, &mut rng)?;
    let mut snapshots = vec![state.clone()];
    while state.t < n_steps {
        sde_step(&mut state, params, &mut rng)?;
        if state.t % options.snapshot_interval == 0 && state.t < n_steps {
            snapshots.push(state.clone());
        }
    }
    snapshots.push(state);
    Ok(Trajectory { snapshots })
}

/// Unnormalized `exp(−U / (2α²/(r+1)²))` on the lattice.
///
/// Kept as a diagnostic only: the OU coefficients at `D = r(r+1)/2` give a
/// stationary temperature of `α²/(r+1)`, not `2α²/(r+1)²`.
pub fn stationary_density_lattice(m: &[f64], params: &ModelParams) -> f64 {
    let alpha = params.decision.alpha();
    let r = params.growth.in_degree() as f64;
    let theta = 2.0 * alpha * alpha / ((r + 1.0) * (r + 1.0));
    let u = potential(m, params.ising.coupling(), params.ising.field(), alpha);
    (-u / theta).exp()
}
