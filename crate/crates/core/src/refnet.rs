//! Growing pheromone reference network.
//!
//! Each arriving ant picks `r` distinct earlier ants, each draw proportional
//! to the popularity `max(r + ω·k_out(i), 0)` of the remaining candidates.
//! `ω = −1` degenerates to the extended one-dimensional lattice (the previous
//! `r` ants), `ω = 0` is uniform attachment and `ω = 1` is Barabási–Albert.
//!
//! Ants are numbered from 0 in code. The text dump uses 1-based ids.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::Rng;

use crate::fenwick::WeightIndex;
use crate::{Error, Result};

/// In-degree `r` and asymmetry `ω` of the growth rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthParams {
    in_degree: usize,
    asymmetry: f64,
}

impl GrowthParams {
    pub fn new(in_degree: usize, asymmetry: f64) -> Result<Self> {
        if in_degree == 0 {
            return Err(Error::invalid("in_degree", "must be >= 1"));
        }
        if !(asymmetry >= -1.0) || !asymmetry.is_finite() {
            return Err(Error::invalid(
                "omega",
                format!("must be a finite value >= -1, got {asymmetry}"),
            ));
        }
        Ok(Self {
            in_degree,
            asymmetry,
        })
    }

    pub fn in_degree(&self) -> usize {
        self.in_degree
    }

    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    /// Clamped popularity `max(r + ω·k, 0)`.
    #[inline]
    pub fn weight(&self, out_degree: u32) -> f64 {
        (self.in_degree as f64 + self.asymmetry * out_degree as f64).max(0.0)
    }

    /// Number of ants in the initial complete graph.
    pub fn seed_size(&self) -> usize {
        self.in_degree + 1
    }
}

/// `D(t) = rt(1+ω) − ω·r(r+1)/2`, the unclamped sum of popularities.
pub fn total_popularity(params: &GrowthParams, t: usize) -> Result<f64> {
    let r = params.in_degree;
    if t < r + 1 {
        return Err(Error::Domain(format!(
            "D(t) needs t >= r+1 = {}, got {t}",
            r + 1
        )));
    }
    let w = params.asymmetry;
    let (r, t) = (r as f64, t as f64);
    Ok(r * t * (1.0 + w) - w * r * (r + 1.0) / 2.0)
}

/// `Σ_i k_out(i,t) = r(r+1)/2 + r(t − (r+1))`.
pub fn cumulative_out_degree(in_degree: usize, t: usize) -> u64 {
    let r = in_degree as u64;
    r * (r + 1) / 2 + r * (t as u64 - (r + 1))
}

/// `r` distinct ants chosen by the ant arriving after time `t`, ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReferenceSet {
    t: usize,
    ants: Vec<usize>,
}

impl ReferenceSet {
    /// Validates and sorts; `t` is the number of ants already present.
    pub fn new(t: usize, mut ants: Vec<usize>) -> Result<Self> {
        ants.sort_unstable();
        if ants.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Consistency(format!("duplicate ants in {ants:?}")));
        }
        if let Some(&last) = ants.last() {
            if last >= t {
                return Err(Error::Consistency(format!(
                    "ant {last} not yet present at t={t}"
                )));
            }
        }
        Ok(Self { t, ants })
    }

    /// Network size the set was drawn against.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn ants(&self) -> &[usize] {
        &self.ants
    }

    pub fn len(&self) -> usize {
        self.ants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ants.is_empty()
    }

    pub fn contains(&self, ant: usize) -> bool {
        self.ants.binary_search(&ant).is_ok()
    }
}

/// Out-degrees and clamped popularities of every ant present.
#[derive(Debug, Clone)]
pub struct NetworkState {
    params: GrowthParams,
    out_degrees: Vec<u32>,
    index: WeightIndex,
    positive: usize,
}

impl NetworkState {
    /// The first `r+1` ants, each referencing all of its predecessors.
    pub fn init_complete(params: GrowthParams) -> Self {
        let n = params.seed_size();
        let out_degrees: Vec<u32> = (0..n).map(|i| (n - 1 - i) as u32).collect();
        let weights: Vec<f64> = out_degrees.iter().map(|&k| params.weight(k)).collect();
        let positive = weights.iter().filter(|&&w| w > 0.0).count();
        Self {
            params,
            out_degrees,
            index: WeightIndex::from_weights(&weights),
            positive,
        }
    }

    pub fn params(&self) -> &GrowthParams {
        &self.params
    }

    /// Number of ants that have decided.
    pub fn t(&self) -> usize {
        self.out_degrees.len()
    }

    pub fn out_degrees(&self) -> &[u32] {
        &self.out_degrees
    }

    pub fn weight(&self, ant: usize) -> f64 {
        self.index.get(ant)
    }

    pub fn weights(&self) -> &[f64] {
        self.index.values()
    }

    pub fn total_weight(&self) -> f64 {
        self.index.total()
    }

    pub fn positive_weight_count(&self) -> usize {
        self.positive
    }

    pub fn sum_out_degrees(&self) -> u64 {
        self.out_degrees.iter().map(|&k| k as u64).sum()
    }

    /// Draws `r` distinct ants sequentially, each with probability
    /// proportional to its weight among those not yet drawn.
    ///
    /// Consumes exactly `r` uniforms from `rng`. The network is left unchanged.
    pub fn select_references<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<ReferenceSet> {
        let r = self.params.in_degree;
        let t = self.t();
        if self.positive < r {
            return Err(Error::Exhausted {
                t,
                positive: self.positive,
                required: r,
            });
        }
        let mut chosen = Vec::with_capacity(r);
        self.index.begin_scratch();
        for _ in 0..r {
            let u: f64 = rng.random();
            let target = u * self.index.total();
            let mut i = self.index.search(target);
            if i >= t || self.index.get(i) <= 0.0 {
                // rounding pushed the target onto a zero-weight slot
                i = self.nearest_positive(i);
            }
            chosen.push(i);
            self.index.set(i, 0.0);
        }
        self.index.rollback();
        ReferenceSet::new(t, chosen)
    }

    fn nearest_positive(&self, from: usize) -> usize {
        let w = self.index.values();
        let from = from.min(w.len() - 1);
        (from..w.len())
            .find(|&i| w[i] > 0.0)
            .or_else(|| (0..from).rev().find(|&i| w[i] > 0.0))
            .expect("positive weight count checked before drawing")
    }

    /// Records that `refs` were referenced and appends the new ant.
    pub fn apply_selection(&mut self, refs: &ReferenceSet) -> Result<()> {
        let t = self.t();
        if refs.t() != t {
            return Err(Error::Consistency(format!(
                "reference set drawn at t={}, network is at t={t}",
                refs.t()
            )));
        }
        if refs.len() != self.params.in_degree {
            return Err(Error::Consistency(format!(
                "expected {} references, got {}",
                self.params.in_degree,
                refs.len()
            )));
        }
        if let Some(&bad) = refs.ants().iter().find(|&&i| self.index.get(i) <= 0.0) {
            return Err(Error::Consistency(format!(
                "ant {bad} has zero popularity and cannot be referenced"
            )));
        }
        for &i in refs.ants() {
            self.out_degrees[i] += 1;
            let w = self.params.weight(self.out_degrees[i]);
            if w <= 0.0 {
                self.positive -= 1;
            }
            self.index.set(i, w);
        }
        let w = self.params.weight(0);
        self.out_degrees.push(0);
        self.index.push(w);
        self.positive += 1;
        Ok(())
    }

    /// Counts of ants per out-degree.
    pub fn degree_histogram(&self) -> BTreeMap<u32, usize> {
        let mut hist = BTreeMap::new();
        for &k in &self.out_degrees {
            *hist.entry(k).or_insert(0) += 1;
        }
        hist
    }

    pub fn max_out_degree(&self) -> u32 {
        self.out_degrees.iter().copied().max().unwrap_or(0)
    }
}

/// Full selection history of a network grown from the complete graph.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRecording {
    pub params: GrowthParams,
    /// Reference set of ant `r+1+i` (0-based) at position `i`.
    pub selections: Vec<ReferenceSet>,
}

impl NetworkRecording {
    /// Grows a network to `n_ants` ants, recording each selection.
    pub fn grow<R: Rng + ?Sized>(
        params: GrowthParams,
        n_ants: usize,
        rng: &mut R,
    ) -> Result<(Self, NetworkState)> {
        let mut net = NetworkState::init_complete(params);
        let mut selections = Vec::with_capacity(n_ants.saturating_sub(net.t()));
        while net.t() < n_ants {
            let refs = net.select_references(rng)?;
            net.apply_selection(&refs)?;
            selections.push(refs);
        }
        Ok((Self { params, selections }, net))
    }

    pub fn n_ants(&self) -> usize {
        self.params.seed_size() + self.selections.len()
    }

    /// One line per ant, `ant_id,selected_ids...`, 1-based. The seed ants
    /// list all their predecessors.
    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<()> {
        let seed = self.params.seed_size();
        for ant in 0..seed {
            write!(out, "{}", ant + 1)?;
            for prev in 0..ant {
                write!(out, ",{}", prev + 1)?;
            }
            writeln!(out)?;
        }
        for (i, refs) in self.selections.iter().enumerate() {
            write!(out, "{}", seed + i + 1)?;
            for &a in refs.ants() {
                write!(out, ",{}", a + 1)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Parses a dump written by [`write_dump`](Self::write_dump), replaying
    /// it against `params` to validate every selection.
    pub fn read_dump<B: BufRead>(params: GrowthParams, input: B) -> Result<Self> {
        let seed = params.seed_size();
        let mut net = NetworkState::init_complete(params);
        let mut selections = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: lineno + 1,
                message,
            };
            let ids = line
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|e| parse_err(format!("bad id `{s}`: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let ant = ids[0];
            if ant <= seed {
                let expected: Vec<usize> = (1..ant).collect();
                if ids[1..] != expected[..] {
                    return Err(parse_err(format!("seed ant {ant} must reference 1..{ant}")));
                }
                continue;
            }
            if ant != net.t() + 1 {
                return Err(parse_err(format!(
                    "expected ant {}, found {ant}",
                    net.t() + 1
                )));
            }
            if ids[1..].contains(&0) {
                return Err(parse_err("ant ids are 1-based".into()));
            }
            let refs = ReferenceSet::new(net.t(), ids[1..].iter().map(|&i| i - 1).collect())
                .map_err(|e| parse_err(e.to_string()))?;
            net.apply_selection(&refs)
                .map_err(|e| parse_err(e.to_string()))?;
            selections.push(refs);
        }
        Ok(Self { params, selections })
    }
}
