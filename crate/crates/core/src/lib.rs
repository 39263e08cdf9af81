//! Ant colony search for the ground state of the infinite-range Ising model,
//! where each new ant reads pheromone from `r` earlier ants picked on a
//! growing preferential-attachment network.
//!
//! The crate is organised bottom-up:
//!
//! * [`ising`] – energy landscape and bit-packed spin configurations.
//! * [`fenwick`] – cumulative weight index used for weighted draws.
//! * [`refnet`] – the pheromone reference network, `l(i,t) = r + ω·k_out(i,t)`.
//! * [`colony`] – pheromone aggregation, the linear decision rule and trials.
//! * [`meanfield`] – fixed points, the Ornstein–Uhlenbeck SDE and its integrator.
//! * [`analysis`] – magnetization statistics, success probability, histograms.
//! * [`config`] / [`harness`] – run configuration and seeded parallel sweeps.

pub mod analysis;
pub mod colony;
pub mod config;
mod error;
pub mod fenwick;
pub mod harness;
pub mod ising;
pub mod meanfield;
pub mod refnet;
pub mod rng;

pub use error::{Error, Result};
