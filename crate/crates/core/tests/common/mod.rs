//! Brute-force colony used as an oracle.
//!
//! Stores plain `Vec<u8>` choices and out-degrees and recomputes every
//! popularity, cumulative sum, pheromone ratio and energy from scratch at
//! each step. It shares the engine's random stream and numerical recipe
//! (max-shifted weights, ascending summation), nothing else.

#![allow(dead_code)]

use rand::Rng;

pub struct OracleParams {
    pub n: usize,
    pub coupling: f64,
    pub field: f64,
    pub r: usize,
    pub omega: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleStep {
    pub refs: Vec<usize>,
    pub ratios: Vec<f64>,
    pub energy: f64,
}

fn energy(p: &OracleParams, x: &[u8]) -> f64 {
    let spin = |b: u8| 2 * b as i64 - 1;
    let mut pairs = 0i64;
    let mut sum = 0i64;
    for i in 0..p.n {
        sum += spin(x[i]);
        for j in 0..p.n {
            if i != j {
                pairs += spin(x[i]) * spin(x[j]);
            }
        }
    }
    -p.field * sum as f64 - p.coupling / (p.n - 1) as f64 * pairs as f64
}

fn popularity(p: &OracleParams, k: u32) -> f64 {
    (p.r as f64 + p.omega * k as f64).max(0.0)
}

/// Runs `t_final` ants and returns one record per non-seed ant.
pub fn run<R: Rng>(p: &OracleParams, t_final: usize, rng: &mut R) -> Vec<OracleStep> {
    let seed = p.r + 1;
    let mut choices: Vec<Vec<u8>> = Vec::new();
    let mut energies: Vec<f64> = Vec::new();
    let mut k_out: Vec<u32> = Vec::new();
    for i in 0..seed {
        let x: Vec<u8> = (0..p.n)
            .map(|_| u8::from(rng.random::<f64>() < 0.5))
            .collect();
        energies.push(energy(p, &x));
        choices.push(x);
        // complete graph: ant i was referenced by every later seed ant
        k_out.push((p.r - i) as u32);
    }

    let mut steps = Vec::new();
    while choices.len() < t_final {
        let t = choices.len();
        let mut refs: Vec<usize> = Vec::new();
        for _ in 0..p.r {
            let w: Vec<f64> = (0..t)
                .map(|i| {
                    if refs.contains(&i) {
                        0.0
                    } else {
                        popularity(p, k_out[i])
                    }
                })
                .collect();
            let total: f64 = w.iter().sum();
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let pick = (0..t)
                .find(|&i| {
                    acc += w[i];
                    acc > target
                })
                .expect("target below total");
            refs.push(pick);
        }
        refs.sort_unstable();

        let shift = refs
            .iter()
            .map(|&s| -energies[s])
            .fold(f64::NEG_INFINITY, f64::max);
        let mut big_s = 0.0;
        let mut s1 = vec![0.0; p.n];
        for &s in &refs {
            let w = (-energies[s] - shift).exp();
            big_s += w;
            for k in 0..p.n {
                if choices[s][k] == 1 {
                    s1[k] += w;
                }
            }
        }
        let ratios: Vec<f64> = s1.iter().map(|v| v / big_s).collect();

        let x: Vec<u8> = ratios
            .iter()
            .map(|&z| {
                let f = (1.0 - p.alpha) * 0.5 + p.alpha * z;
                u8::from(rng.random::<f64>() < f)
            })
            .collect();
        let e = energy(p, &x);
        for &s in &refs {
            k_out[s] += 1;
        }
        choices.push(x);
        energies.push(e);
        k_out.push(0);
        steps.push(OracleStep {
            refs,
            ratios,
            energy: e,
        });
    }
    steps
}
