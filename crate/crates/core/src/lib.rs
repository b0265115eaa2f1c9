//! Core algorithms for the two-type reducible branching Brownian motion.
//!
//! Particles of type 1 diffuse with coefficient `sigma2`, branch into two
//! type-1 children at rate `beta` and emit one type-2 child at rate `alpha`;
//! type-2 particles diffuse with coefficient 1 and branch at rate 1. The
//! crate computes the phase diagram and invasion speeds of that system,
//! simulates it exactly, and provides the first-moment oracles, decoration
//! sampler, extreme-value statistics and coupled reaction-diffusion solver
//! used to cross-validate the simulation.
//!
//! The crate is `no_std`-compatible (with `alloc`); IO, parallelism and the
//! command-line harness live in the companion `bbm-lab` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod decoration;
pub mod engine;
pub mod fkpp;
pub mod gauss;
pub mod oracle;
pub mod phase;
pub mod quad;
pub mod rng;
pub mod stats;

pub use phase::{FrontParams, ModelParams, Region};
