//! Infinite-range (complete graph) Ising model.
//!
//! A configuration is a vector of binary choices `X(i) ∈ {0, 1}` mapped to
//! spins `σ(i) = 2X(i) − 1`. The energy is
//!
//! ```text
//! E = −h Σ σ(i) − J/(N−1) Σ_{i≠j} σ(i)σ(j)
//! ```
//!
//! and since `Σ_{i≠j} σσ = (Σσ)² − N` it is evaluated in O(N) from the spin sum.

use crate::{Error, Result};

/// Size and couplings of the energy landscape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingParams {
    n_spins: usize,
    coupling: f64,
    field: f64,
}

impl IsingParams {
    pub fn new(n_spins: usize, coupling: f64, field: f64) -> Result<Self> {
        if n_spins < 2 {
            return Err(Error::invalid(
                "n_spins",
                format!("must be >= 2, got {n_spins}"),
            ));
        }
        if !coupling.is_finite() {
            return Err(Error::invalid("coupling", "must be finite"));
        }
        if !field.is_finite() {
            return Err(Error::invalid("field", "must be finite"));
        }
        Ok(Self {
            n_spins,
            coupling,
            field,
        })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    /// Exchange interaction `J`.
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// External field `h`.
    pub fn field(&self) -> f64 {
        self.field
    }

    fn check(&self, config: &SpinConfig) -> Result<()> {
        if config.len() != self.n_spins {
            return Err(Error::Configuration(format!(
                "config has {} spins, model has {}",
                config.len(),
                self.n_spins
            )));
        }
        Ok(())
    }
}

const WORD: usize = u64::BITS as usize;

/// Bit-packed binary choices, one bit per spin.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    words: Vec<u64>,
    len: usize,
}

impl SpinConfig {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut c = Self::zeros(len);
        for k in 0..len {
            c.set(k, true);
        }
        c
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut c = Self::zeros(bits.len());
        for (k, &b) in bits.iter().enumerate() {
            c.set(k, b);
        }
        c
    }

    /// Builds a configuration from `{0,1}` values; anything non-zero is 1.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut c = Self::zeros(bits.len());
        for (k, &b) in bits.iter().enumerate() {
            c.set(k, b != 0);
        }
        c
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, k: usize) -> bool {
        assert!(k < self.len, "spin index {k} out of range {}", self.len);
        self.words[k / WORD] >> (k % WORD) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, k: usize, value: bool) {
        assert!(k < self.len, "spin index {k} out of range {}", self.len);
        let mask = 1u64 << (k % WORD);
        if value {
            self.words[k / WORD] |= mask;
        } else {
            self.words[k / WORD] &= !mask;
        }
    }

    /// Spin value `σ(k) = 2X(k) − 1`.
    #[inline]
    pub fn spin(&self, k: usize) -> i64 {
        if self.get(k) {
            1
        } else {
            -1
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `Σ σ(i)`.
    pub fn spin_sum(&self) -> i64 {
        2 * self.count_ones() as i64 - self.len as i64
    }

    /// `m = Σ σ(i) / N`.
    pub fn magnetization(&self) -> f64 {
        self.spin_sum() as f64 / self.len as f64
    }

    /// Indices `k` with `X(k) = 1`, ascending.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(w * WORD + b)
                }
            })
        })
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|k| self.get(k)).collect()
    }

    /// Global flip `X(i) → 1 − X(i)`.
    pub fn flipped(&self) -> Self {
        let mut c = self.clone();
        for k in 0..self.len {
            c.set(k, !self.get(k));
        }
        c
    }
}

/// Energy of a configuration, exact including the excluded diagonal.
pub fn energy(params: &IsingParams, config: &SpinConfig) -> Result<f64> {
    params.check(config)?;
    Ok(energy_from_spin_sum(params, config.spin_sum()))
}

/// Energy given `Σσ`. `Σ_{i≠j} σσ = (Σσ)² − N` is an exact integer.
pub fn energy_from_spin_sum(params: &IsingParams, spin_sum: i64) -> f64 {
    let n = params.n_spins as i64;
    let pair = (spin_sum * spin_sum - n) as f64;
    -params.field * spin_sum as f64 - params.coupling / (n - 1) as f64 * pair
}

/// Mean-field energy `E(m) = −N(hm + Jm²)`.
///
/// Differs from [`energy`] by the self-pair correction of order `J`.
pub fn energy_of_magnetization(params: &IsingParams, m: f64) -> Result<f64> {
    if !(m.abs() <= 1.0) {
        return Err(Error::Domain(format!("magnetization {m} outside [-1, 1]")));
    }
    Ok(-(params.n_spins as f64) * (params.field * m + params.coupling * m * m))
}

/// Field felt by spin `k`: `h + 2J/(N−1) Σ_{l≠k} σ(l)`, i.e. `−½ ∂E/∂X(k)`.
pub fn effective_field(params: &IsingParams, config: &SpinConfig, k: usize) -> Result<f64> {
    params.check(config)?;
    if k >= config.len() {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: config.len(),
        });
    }
    let others = config.spin_sum() - config.spin(k);
    Ok(params.field + 2.0 * params.coupling * others as f64 / (params.n_spins - 1) as f64)
}
