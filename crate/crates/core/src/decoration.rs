//! Spine sampler for the decoration point measures of the extremal
//! process at supercritical speeds.
//!
//! A single spine particle starts at the origin and travels backwards in
//! time as a Brownian motion with drift `-rho`. It gives birth at rate 2;
//! a birth at backward-time `tau` seeds an independent standard BBM run
//! forward for duration `tau`, contributing atoms `B_tau - rho tau +
//! X_u(tau)`. Together with the atom at 0 this realizes the truncated
//! measure; the untruncated object is its `horizon -> infinity` limit, so
//! horizon stability is reported as a diagnostic rather than assumed.
//!
//! The acceptance probability `P(no atom above 0)` is the prefactor of the
//! branching Brownian motion large-deviation tail, and conditioning on
//! acceptance yields the decoration law itself.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;
use core::fmt;

use crate::engine::{self, SimConfig, SimError};
use crate::phase::ModelParams;
use crate::rng;

/// Default spine truncation time.
pub const DEFAULT_HORIZON: f64 = 10.0;

/// Default per-sample particle budget across embedded BBM runs.
pub const DEFAULT_PARTICLE_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct DecorationSample {
    /// Atom positions, sorted ascending; always contains 0.
    pub atoms: Vec<f64>,
    pub horizon: f64,
    /// True when no atom exceeds 0 (so the maximal atom is exactly 0).
    pub accepted: bool,
    /// Spine birth times, ascending, all below the horizon.
    pub spine_births: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: u64,
    /// Samples redrawn because an embedded run overran the budget.
    pub overflow_resamples: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DecorationError {
    InvalidArgs(&'static str),
    /// An embedded BBM exceeded the per-sample particle budget.
    BudgetExceeded { sample_seed: u64 },
    /// The conditioned sampler ran out of attempts; carries the running
    /// acceptance estimate for diagnosis.
    MaxRejections { attempts: u64, acceptance_estimate: f64 },
    Engine(SimError),
}

impl fmt::Display for DecorationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecorationError::InvalidArgs(msg) => write!(f, "invalid arguments: {msg}"),
            DecorationError::BudgetExceeded { sample_seed } => write!(
                f,
                "embedded BBM exceeded the particle budget (sample seed {sample_seed})"
            ),
            DecorationError::MaxRejections {
                attempts,
                acceptance_estimate,
            } => write!(
                f,
                "no accepted sample after {attempts} attempts \
                 (running acceptance estimate {acceptance_estimate:.4})"
            ),
            DecorationError::Engine(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for DecorationError {}

fn validate(rho: f64, horizon: f64) -> Result<(), DecorationError> {
    if !(rho > core::f64::consts::SQRT_2) {
        return Err(DecorationError::InvalidArgs("rho must exceed sqrt(2)"));
    }
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(DecorationError::InvalidArgs("horizon must be finite and non-negative"));
    }
    Ok(())
}

/// Samples the truncated spine measure. All contributed atoms are kept.
pub fn sample_decoration_tilde(
    rho: f64,
    horizon: f64,
    seed: u64,
) -> Result<DecorationSample, DecorationError> {
    validate(rho, horizon)?;
    sample_internal(rho, horizon, seed, DEFAULT_PARTICLE_BUDGET, false)
}

/// Sampler core; with `stop_on_reject` the atom collection is abandoned as
/// soon as a positive atom rules the sample out (the flag stays exact, and
/// accepted samples always carry their full atom set).
fn sample_internal(
    rho: f64,
    horizon: f64,
    seed: u64,
    particle_budget: usize,
    stop_on_reject: bool,
) -> Result<DecorationSample, DecorationError> {
    let key = rng::expand_seed(seed);
    // Spine: Poisson(2) birth times and the Brownian path at those times.
    let mut spine_births = Vec::new();
    let mut spine_positions = Vec::new();
    {
        let mut t = 0.0;
        let mut b = 0.0;
        let mut session_idx = 0;
        loop {
            let mut draws = rng::session(&key, 0, session_idx);
            session_idx += 1;
            let gap = draws.exponential(2.0);
            let next = t + gap;
            if next >= horizon {
                break;
            }
            b += (next - t).sqrt() * draws.std_normal();
            t = next;
            spine_births.push(t);
            spine_positions.push(b);
        }
    }

    let mut atoms = Vec::with_capacity(64);
    atoms.push(0.0);
    let mut accepted = true;
    // Dummy parameters: runs started from a type-2 particle only use the
    // unit rates.
    let params = ModelParams::new(1.0, 1.0, 0.0).expect("valid");
    let mut budget_left = particle_budget;

    for (k, (&tau, &b_tau)) in spine_births.iter().zip(&spine_positions).enumerate() {
        let shift = b_tau - rho * tau;
        let mut cfg = SimConfig::new(tau, rng::derive(seed, 1 + k as u64));
        cfg.start_type2 = true;
        cfg.record_births = false;
        cfg.max_particles = budget_left.max(1);
        let out = match engine::simulate(&params, &cfg) {
            Ok(out) => out,
            Err(SimError::TooManyParticles { .. }) => {
                return Err(DecorationError::BudgetExceeded { sample_seed: seed })
            }
            Err(e) => return Err(DecorationError::Engine(e)),
        };
        let snap = out.snapshots.last().expect("one checkpoint");
        budget_left = budget_left.saturating_sub(snap.particles.len());
        for p in &snap.particles {
            let atom = shift + p.position;
            if atom > 0.0 {
                accepted = false;
            }
            atoms.push(atom);
        }
        if stop_on_reject && !accepted {
            break;
        }
    }

    atoms.sort_unstable_by(|a, b| a.total_cmp(b));
    Ok(DecorationSample {
        atoms,
        horizon,
        accepted,
        spine_births,
    })
}

/// Acceptance flag of the `index`-th sample of the `seed` family, redrawing
/// on budget overflow (up to 16 times, counted). This is the unit of work
/// behind [`estimate_c`]; drivers that parallelize over `index` reproduce
/// the sequential estimate exactly.
pub fn sample_acceptance(
    rho: f64,
    horizon: f64,
    seed: u64,
    index: u64,
) -> Result<(bool, u64), DecorationError> {
    validate(rho, horizon)?;
    let mut attempt = 0u64;
    loop {
        let sample_seed = rng::derive(seed, index * 64 + attempt);
        match sample_internal(rho, horizon, sample_seed, DEFAULT_PARTICLE_BUDGET, true) {
            Ok(sample) => return Ok((sample.accepted, attempt)),
            Err(DecorationError::BudgetExceeded { .. }) if attempt < 16 => attempt += 1,
            Err(e) => return Err(e),
        }
    }
}

/// Monte Carlo estimate of the acceptance probability `C(rho)` with its
/// binomial standard error. Budget overflows are redrawn with a derived
/// seed and counted.
pub fn estimate_c(
    rho: f64,
    n_samples: u64,
    horizon: f64,
    seed: u64,
) -> Result<CEstimate, DecorationError> {
    validate(rho, horizon)?;
    if n_samples < 100 {
        return Err(DecorationError::InvalidArgs("need at least 100 samples"));
    }
    let mut accepted = 0u64;
    let mut overflow_resamples = 0u64;
    for i in 0..n_samples {
        let (ok, overflows) = sample_acceptance(rho, horizon, seed, i)?;
        accepted += ok as u64;
        overflow_resamples += overflows;
    }
    let estimate = accepted as f64 / n_samples as f64;
    let std_error = (estimate * (1.0 - estimate) / n_samples as f64).sqrt();
    Ok(CEstimate {
        estimate,
        std_error,
        n_samples,
        overflow_resamples,
    })
}

/// Rejection-samples the conditioned decoration: all atoms at or below 0
/// with the maximal atom exactly at 0. Returns the sample and the number
/// of trials it took.
pub fn sample_decoration_conditioned(
    rho: f64,
    horizon: f64,
    seed: u64,
    max_rejections: u64,
) -> Result<(DecorationSample, u64), DecorationError> {
    validate(rho, horizon)?;
    let mut attempt = 0u64;
    let mut rejected = 0u64;
    while attempt <= max_rejections {
        let sample_seed = rng::derive(seed, attempt);
        match sample_internal(rho, horizon, sample_seed, DEFAULT_PARTICLE_BUDGET, true) {
            Ok(sample) if sample.accepted => return Ok((sample, attempt + 1)),
            Ok(_) => {
                rejected += 1;
                attempt += 1;
            }
            Err(DecorationError::BudgetExceeded { .. }) => attempt += 1,
            Err(e) => return Err(e),
        }
    }
    Err(DecorationError::MaxRejections {
        attempts: attempt,
        acceptance_estimate: 1.0 - rejected as f64 / attempt.max(1) as f64,
    })
}

/// Empirical Laplace functional `-log E[exp(-sum phi(atom + z))]` over a
/// set of (conditioned) samples.
pub fn laplace_functional<F: Fn(f64) -> f64>(
    samples: &[DecorationSample],
    phi: F,
    z: f64,
) -> Result<f64, DecorationError> {
    if samples.is_empty() {
        return Err(DecorationError::InvalidArgs("empty sample set"));
    }
    let mut sum = 0.0;
    for sample in samples {
        let weight: f64 = sample.atoms.iter().map(|&a| phi(a + z)).sum();
        sum += (-weight).exp();
    }
    Ok(-(sum / samples.len() as f64).ln())
}

/// Direct Monte Carlo of `P(M_t >= rho t)` on standard BBM, paired with
/// the tail prediction `c_hat e^(-(rho^2/2 - 1) t) / (sqrt(2 pi t) rho)`.
pub fn large_dev_crosscheck(
    rho: f64,
    t: f64,
    n_runs: u64,
    seed: u64,
    c_hat: f64,
) -> Result<(f64, f64), DecorationError> {
    if !(rho > core::f64::consts::SQRT_2) || !(t > 0.0) || n_runs == 0 {
        return Err(DecorationError::InvalidArgs(
            "need rho > sqrt(2), t > 0 and at least one run",
        ));
    }
    let params = ModelParams::new(1.0, 1.0, 0.0).expect("valid");
    let level = rho * t;
    let mut hits = 0u64;
    for i in 0..n_runs {
        let mut cfg = SimConfig::new(t, rng::derive(seed, i));
        cfg.start_type2 = true;
        cfg.record_births = false;
        let out = engine::simulate(&params, &cfg).map_err(DecorationError::Engine)?;
        let snap = out.snapshots.last().expect("one checkpoint");
        if engine::max_displacement(snap, engine::TypeFilter::All).is_some_and(|m| m >= level) {
            hits += 1;
        }
    }
    let mc = hits as f64 / n_runs as f64;
    let prediction = c_hat * (-(rho * rho / 2.0 - 1.0) * t).exp()
        / ((2.0 * core::f64::consts::PI * t).sqrt() * rho);
    Ok((mc, prediction))
}
