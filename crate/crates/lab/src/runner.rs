//! Replicate-parallel Monte Carlo drivers.
//!
//! Work is split over replicate indices with per-index seeds, and results
//! are collected in index order, so every driver returns the same output
//! for the same seed regardless of the worker count.

use anyhow::{Context, Result};
use bbm_core::decoration::{self, CEstimate};
use bbm_core::engine::{self, CrossingMonitor, SimConfig, TypeFilter};
use bbm_core::phase::ModelParams;
use bbm_core::rng;
use bbm_core::stats::{self, EnsembleMeta, EnsembleOptions, EnsembleResult, ReplicateRecord};
use rayon::prelude::*;

/// Builds a worker pool with `jobs` threads (0 = rayon default).
pub fn build_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if jobs > 0 {
        builder = builder.num_threads(jobs);
    }
    builder.build().context("building worker pool")
}

/// Parallel version of [`stats::run_ensemble`] (same seeds, same records).
pub fn ensemble(
    pool: &rayon::ThreadPool,
    params: &ModelParams,
    t: f64,
    n: u64,
    seed: u64,
    opts: &EnsembleOptions,
) -> Result<EnsembleResult> {
    // Reuse the sequential path's validation and feasibility gate.
    stats::run_ensemble(params, t, 1, seed, opts)
        .map_err(|e| anyhow::anyhow!("{e}"))
        .context("ensemble feasibility")?;
    let theta = opts
        .theta
        .unwrap_or_else(|| bbm_core::phase::front_params(params).map(|f| f.theta).unwrap_or(0.0));
    let records: Vec<ReplicateRecord> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                stats::run_replicate(params, t, seed + i, theta, opts)
                    .map_err(|e| anyhow::anyhow!("replicate {i}: {e}"))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(EnsembleResult {
        meta: EnsembleMeta {
            params: *params,
            t,
            n,
            seed,
            prune_gap: opts.prune_gap,
            theta,
        },
        records,
    })
}

/// Ensembles across a grid of horizons (shared base seed, offset per
/// horizon so replicates never overlap).
pub fn front_series(
    pool: &rayon::ThreadPool,
    params: &ModelParams,
    horizons: &[f64],
    n: u64,
    seed: u64,
    opts: &EnsembleOptions,
) -> Result<Vec<EnsembleResult>> {
    horizons
        .iter()
        .enumerate()
        .map(|(k, &t)| ensemble(pool, params, t, n, seed + (k as u64) * 1_000_000, opts))
        .collect()
}

/// Parallel acceptance-probability estimate, identical to
/// [`decoration::estimate_c`] for the same arguments.
pub fn estimate_c(
    pool: &rayon::ThreadPool,
    rho: f64,
    n_samples: u64,
    horizon: f64,
    seed: u64,
) -> Result<CEstimate> {
    let flags: Vec<(bool, u64)> = pool.install(|| {
        (0..n_samples)
            .into_par_iter()
            .map(|i| {
                decoration::sample_acceptance(rho, horizon, seed, i)
                    .map_err(|e| anyhow::anyhow!("sample {i}: {e}"))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let accepted = flags.iter().filter(|f| f.0).count() as u64;
    let overflow_resamples = flags.iter().map(|f| f.1).sum();
    let estimate = accepted as f64 / n_samples as f64;
    let std_error = (estimate * (1.0 - estimate) / n_samples as f64).sqrt();
    Ok(CEstimate {
        estimate,
        std_error,
        n_samples,
        overflow_resamples,
    })
}

/// Standard-BBM runs with a crossing monitor on `slope * s + offset`;
/// returns the number of replicates that ever crossed, per offset.
pub fn crossing_mc(
    pool: &rayon::ThreadPool,
    t: f64,
    n: u64,
    seed: u64,
    slope: f64,
    offsets: &[f64],
) -> Result<Vec<u64>> {
    let params = ModelParams::new(1.0, 1.0, 0.0).expect("valid");
    let per_run: Vec<Vec<bool>> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut cfg = SimConfig::new(t, seed + i);
                cfg.start_type2 = true;
                cfg.record_births = false;
                cfg.crossing = Some(CrossingMonitor {
                    slope,
                    offsets: offsets.to_vec(),
                });
                engine::simulate(&params, &cfg)
                    .map(|out| out.stats.crossed)
                    .map_err(|e| anyhow::anyhow!("replicate {i}: {e}"))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut hits = vec![0u64; offsets.len()];
    for run in &per_run {
        for (k, &crossed) in run.iter().enumerate() {
            hits[k] += crossed as u64;
        }
    }
    Ok(hits)
}

/// Monte Carlo of `P(M_t >= rho t)` on standard BBM (same seed scheme as
/// [`decoration::large_dev_crosscheck`]).
pub fn large_dev_mc(pool: &rayon::ThreadPool, rho: f64, t: f64, n: u64, seed: u64) -> Result<f64> {
    let params = ModelParams::new(1.0, 1.0, 0.0).expect("valid");
    let level = rho * t;
    let hits: u64 = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut cfg = SimConfig::new(t, rng::derive(seed, i));
                cfg.start_type2 = true;
                cfg.record_births = false;
                engine::simulate(&params, &cfg)
                    .map(|out| {
                        let snap = out.snapshots.last().expect("one checkpoint");
                        engine::max_displacement(snap, TypeFilter::All)
                            .is_some_and(|m| m >= level) as u64
                    })
                    .map_err(|e| anyhow::anyhow!("replicate {i}: {e}"))
            })
            .collect::<Result<Vec<u64>>>()
            .map(|v| v.iter().sum())
    })?;
    Ok(hits as f64 / n as f64)
}

/// First `take` inter-birth gaps along the tracked type-1 lineage, pooled
/// over replicates. Replicates with fewer births are skipped; choose
/// `alpha * t` large enough that this truncates negligible mass.
pub fn lineage_gaps(
    pool: &rayon::ThreadPool,
    params: &ModelParams,
    t: f64,
    n: u64,
    seed: u64,
    take: usize,
) -> Result<Vec<f64>> {
    let per_run: Vec<Vec<f64>> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut cfg = SimConfig::new(t, seed + i);
                cfg.track_lineage = true;
                cfg.record_births = false;
                engine::simulate(params, &cfg)
                    .map(|out| {
                        let times = &out.stats.lineage_birth_times;
                        if times.len() < take {
                            return Vec::new();
                        }
                        let mut gaps = Vec::with_capacity(take);
                        let mut prev = 0.0;
                        for &b in &times[..take] {
                            gaps.push(b - prev);
                            prev = b;
                        }
                        gaps
                    })
                    .map_err(|e| anyhow::anyhow!("replicate {i}: {e}"))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(per_run.into_iter().flatten().collect())
}

/// Per-set output of the count/martingale validation runs.
#[derive(Debug, Clone)]
pub struct CountsRun {
    pub n1: (f64, f64),
    pub n2: (f64, f64),
    pub n1_above: (f64, f64),
    pub n2_above: (f64, f64),
    /// Sample mean and SE of the type-1 additive martingale per requested
    /// exponent.
    pub martingale_means: Vec<(f64, f64, f64)>,
}

/// Unpruned replicates collecting counts, counts above a level, and
/// additive-martingale values for a list of exponents.
pub fn counts_mc(
    pool: &rayon::ThreadPool,
    params: &ModelParams,
    t: f64,
    n: u64,
    seed: u64,
    x: f64,
    thetas: &[f64],
) -> Result<CountsRun> {
    struct Row {
        n1: f64,
        n2: f64,
        a1: f64,
        a2: f64,
        w: Vec<f64>,
    }
    let rows: Vec<Row> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut cfg = SimConfig::new(t, seed + i);
                cfg.record_births = false;
                let out = engine::simulate(params, &cfg)
                    .map_err(|e| anyhow::anyhow!("replicate {i}: {e}"))?;
                let snap = out.snapshots.last().expect("one checkpoint");
                let mut row = Row { n1: 0.0, n2: 0.0, a1: 0.0, a2: 0.0, w: Vec::new() };
                for p in &snap.particles {
                    match p.ptype {
                        engine::ParticleType::Type1 => {
                            row.n1 += 1.0;
                            if p.position >= x {
                                row.a1 += 1.0;
                            }
                        }
                        engine::ParticleType::Type2 => {
                            row.n2 += 1.0;
                            if p.position >= x {
                                row.a2 += 1.0;
                            }
                        }
                    }
                }
                for &theta in thetas {
                    row.w.push(
                        engine::additive_martingale(snap, params, theta).expect("unpruned"),
                    );
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let collect = |f: &dyn Fn(&Row) -> f64| -> (f64, f64) {
        let vals: Vec<f64> = rows.iter().map(f).collect();
        stats::mean_se(&vals)
    };
    let martingale_means = thetas
        .iter()
        .enumerate()
        .map(|(k, &theta)| {
            let (m, se) = collect(&|r: &Row| r.w[k]);
            (theta, m, se)
        })
        .collect();
    Ok(CountsRun {
        n1: collect(&|r| r.n1),
        n2: collect(&|r| r.n2),
        n1_above: collect(&|r| r.a1),
        n2_above: collect(&|r| r.a2),
        martingale_means,
    })
}
