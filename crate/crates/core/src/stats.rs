//! Ensemble experiments and the statistics the limit theorems predict.
//!
//! [`run_ensemble`] drives independent replicates of the particle engine
//! and records, per replicate, the front observables: maxima per type,
//! the atoms near the type-2 front, martingale values and the mutation
//! record of the argmax type-2 particle. The analysis functions turn
//! those records into front-speed regressions, tail-exponent fits,
//! genealogy summaries and a plug-in Gumbel-mixture diagnostic.
//!
//! Medians are used as location statistics throughout: the tightness
//! statements being probed concern centered laws with heavy exponential
//! upper tails, where medians are robust and means are not.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;
use core::fmt;

use crate::engine::{self, ParticleType, SimConfig, SimError};
use crate::oracle;
use crate::phase::ModelParams;
use crate::rng;

// ---------------------------------------------------------------------------
// Small-sample statistics shared across the crate and the harness.

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, (var / n).sqrt())
}

/// Median by sorting a copy.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_unstable_by(|a, b| a.total_cmp(b));
    quantile_sorted(&v, 0.5)
}

/// Quantile of an ascending-sorted slice (linear interpolation).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Asymptotic Kolmogorov distribution tail `Q(lambda)`.
fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.18 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov test against a cdf; returns `(D, p)`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> (f64, f64) {
    let mut v = xs.to_vec();
    v.sort_unstable_by(|a, b| a.total_cmp(b));
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    (d, kolmogorov_tail(lambda))
}

/// Two-sample Kolmogorov-Smirnov test; returns `(D, p)`.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_unstable_by(|x, y| x.total_cmp(y));
    b.sort_unstable_by(|x, y| x.total_cmp(y));
    let (n, m) = (a.len(), b.len());
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let n_eff = (n as f64 * m as f64) / (n as f64 + m as f64);
    let lambda = (n_eff.sqrt() + 0.12 + 0.11 / n_eff.sqrt()) * d;
    (d, kolmogorov_tail(lambda))
}

// ---------------------------------------------------------------------------
// Ensemble runner.

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleOptions {
    pub prune_gap: Option<f64>,
    /// Exponent for the recorded additive martingale values.
    pub theta: Option<f64>,
    /// Window below the type-2 max within which atoms are recorded.
    pub atoms_window: f64,
    pub atoms_top_k: usize,
    /// Start replicates from a single type-2 particle (standard BBM).
    pub start_type2: bool,
    /// Record the derivative martingale (unpruned runs only).
    pub collect_z: bool,
    pub max_particles: usize,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self {
            prune_gap: None,
            theta: None,
            atoms_window: 5.0,
            atoms_top_k: 32,
            start_type2: false,
            collect_z: false,
            max_particles: 50_000_000,
        }
    }
}

/// Per-replicate observables.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRecord {
    pub max_all: Option<f64>,
    pub max_type1: Option<f64>,
    pub max_type2: Option<f64>,
    /// Type-2 positions within the window below the type-2 max,
    /// descending, at most `atoms_top_k` of them.
    pub atoms: Vec<f64>,
    /// Additive martingale of the type-1 population (unpruned runs only).
    pub w_theta: Option<f64>,
    /// Type-2 companion of the additive martingale.
    pub w2_theta: Option<f64>,
    /// Derivative martingale (standard runs; unpruned only).
    pub z: Option<f64>,
    /// Mutation time of the argmax type-2 particle.
    pub argmax_mutation_time: Option<f64>,
    /// Position of that founding birth.
    pub argmax_mutation_position: Option<f64>,
    pub alive: usize,
    pub pruned: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMeta {
    pub params: ModelParams,
    pub t: f64,
    pub n: u64,
    pub seed: u64,
    pub prune_gap: Option<f64>,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub meta: EnsembleMeta,
    pub records: Vec<ReplicateRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatsError {
    /// The unpruned horizon is hopeless; carries the oracle's expected
    /// total population.
    InfeasibleHorizon { expected: f64, max_particles: usize },
    InvalidArgs(&'static str),
    DegenerateDesign,
    InsufficientTail { available: usize, needed: usize },
    NoTypeTwoMaxima,
    Engine(SimError),
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::InfeasibleHorizon { expected, max_particles } => write!(
                f,
                "infeasible horizon: expected population {expected:.3e} exceeds \
                 max_particles {max_particles}; lower t or enable pruning"
            ),
            StatsError::InvalidArgs(msg) => write!(f, "{msg}"),
            StatsError::DegenerateDesign => {
                write!(f, "regression design is degenerate (need >= 4 distinct times)")
            }
            StatsError::InsufficientTail { available, needed } => {
                write!(f, "insufficient tail mass: {available} samples, need {needed}")
            }
            StatsError::NoTypeTwoMaxima => write!(f, "no replicate produced a type-2 maximum"),
            StatsError::Engine(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for StatsError {}

impl From<SimError> for StatsError {
    fn from(e: SimError) -> Self {
        StatsError::Engine(e)
    }
}

/// Runs one replicate and summarizes it. The replicate seed should be
/// `base_seed + index`.
pub fn run_replicate(
    params: &ModelParams,
    t: f64,
    seed: u64,
    theta: f64,
    opts: &EnsembleOptions,
) -> Result<ReplicateRecord, StatsError> {
    let mut cfg = SimConfig::new(t, seed);
    cfg.prune_gap = opts.prune_gap;
    cfg.max_particles = opts.max_particles;
    cfg.start_type2 = opts.start_type2;
    cfg.record_births = false;
    let out = engine::simulate(params, &cfg)?;
    let snap = out.snapshots.last().expect("one checkpoint");

    let max_all = engine::max_displacement(snap, engine::TypeFilter::All);
    let max_type1 = engine::max_displacement(snap, engine::TypeFilter::Type1Only);
    let max_type2 = engine::max_displacement(snap, engine::TypeFilter::Type2Only);

    let mut atoms = Vec::new();
    let mut argmax_mutation_time = None;
    let mut argmax_mutation_position = None;
    if let Some(m2) = max_type2 {
        for p in &snap.particles {
            if p.ptype == ParticleType::Type2 && p.position >= m2 - opts.atoms_window {
                atoms.push(p.position);
            }
            if p.ptype == ParticleType::Type2 && p.position == m2 {
                argmax_mutation_time = p.mutation_time;
                argmax_mutation_position = p.mutation_position;
            }
        }
        atoms.sort_unstable_by(|a, b| b.total_cmp(a));
        atoms.truncate(opts.atoms_top_k);
    }

    let unpruned = snap.pruned_count == 0;
    let w_theta = if unpruned {
        Some(engine::additive_martingale(snap, params, theta).expect("unpruned"))
    } else {
        None
    };
    let w2_theta = if unpruned {
        Some(engine::additive_martingale_type2(snap, theta).expect("unpruned"))
    } else {
        None
    };
    let z = if unpruned && opts.collect_z {
        Some(engine::derivative_martingale(snap).expect("unpruned"))
    } else {
        None
    };

    Ok(ReplicateRecord {
        max_all,
        max_type1,
        max_type2,
        atoms,
        w_theta,
        w2_theta,
        z,
        argmax_mutation_time,
        argmax_mutation_position,
        alive: snap.particles.len(),
        pruned: snap.pruned_count,
    })
}

/// Runs `n` independent replicates (seeds `seed + i`), after a feasibility
/// check of the unpruned expected population against the particle cap.
pub fn run_ensemble(
    params: &ModelParams,
    t: f64,
    n: u64,
    seed: u64,
    opts: &EnsembleOptions,
) -> Result<EnsembleResult, StatsError> {
    if n == 0 {
        return Err(StatsError::InvalidArgs("need at least one replicate"));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(StatsError::InvalidArgs("t must be finite and non-negative"));
    }
    if opts.prune_gap.is_none() && t > 0.0 {
        let expected = if opts.start_type2 {
            t.exp()
        } else {
            (params.beta * t).exp() + oracle::expected_type2_count(params, t)
        };
        if expected > opts.max_particles as f64 {
            return Err(StatsError::InfeasibleHorizon {
                expected,
                max_particles: opts.max_particles,
            });
        }
    }
    let theta = opts.theta.unwrap_or_else(|| {
        crate::phase::front_params(params).map(|f| f.theta).unwrap_or(0.0)
    });
    let mut records = Vec::with_capacity(n as usize);
    for i in 0..n {
        records.push(run_replicate(params, t, seed + i, theta, opts)?);
    }
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

// ---------------------------------------------------------------------------
// Front-speed regression.

#[derive(Debug, Clone, PartialEq)]
pub struct FrontSeriesPoint {
    pub t: f64,
    /// Per-replicate front positions at this horizon.
    pub maxima: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontFit {
    pub intercept: f64,
    pub speed: f64,
    /// Coefficient of `log t` (negative when the median lags `v t`).
    pub log_coeff: f64,
    pub speed_ci: (f64, f64),
    pub log_ci: (f64, f64),
}

/// Exact least squares of `y ~ 1 + t + log t` through given points.
pub fn fit_median_curve(points: &[(f64, f64)]) -> Result<[f64; 3], StatsError> {
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_unstable_by(|a, b| a.total_cmp(b));
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(StatsError::DegenerateDesign);
    }
    // Normal equations for the 3-column design.
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for &(t, y) in points {
        if !(t > 0.0) {
            return Err(StatsError::InvalidArgs("regression times must be positive"));
        }
        let row = [1.0, t, t.ln()];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * y;
        }
    }
    solve3(ata, atb).ok_or(StatsError::DegenerateDesign)
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0f64; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in (row + 1)..3 {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Fits `median(M_t) ~ c0 + speed * t + log_coeff * log t` across horizons,
/// with bootstrap confidence intervals (resampling replicates per horizon).
pub fn front_regression(
    series: &[FrontSeriesPoint],
    bootstrap: usize,
    seed: u64,
) -> Result<FrontFit, StatsError> {
    if series.iter().any(|p| p.maxima.is_empty()) {
        return Err(StatsError::InvalidArgs("every horizon needs samples"));
    }
    let medians: Vec<(f64, f64)> = series.iter().map(|p| (p.t, median(&p.maxima))).collect();
    let [intercept, speed, log_coeff] = fit_median_curve(&medians)?;

    let mut speeds = Vec::with_capacity(bootstrap);
    let mut logs = Vec::with_capacity(bootstrap);
    let key = rng::expand_seed(rng::derive(seed, 0x626f_6f74));
    for b in 0..bootstrap {
        let mut resampled = Vec::with_capacity(series.len());
        for (pi, point) in series.iter().enumerate() {
            let n = point.maxima.len();
            let mut draws = rng::session(&key, (b * series.len() + pi) as u64, 0);
            let mut sample = Vec::with_capacity(n);
            for i in 0..n {
                if i % 24 == 23 {
                    draws = rng::session(
                        &key,
                        (b * series.len() + pi) as u64,
                        (i / 24 + 1) as u64,
                    );
                }
                let idx = (draws.next_u64() % n as u64) as usize;
                sample.push(point.maxima[idx]);
            }
            resampled.push((point.t, median(&sample)));
        }
        if let Ok([_, s, l]) = fit_median_curve(&resampled) {
            speeds.push(s);
            logs.push(l);
        }
    }
    let ci = |v: &mut Vec<f64>, center: f64| {
        if v.len() < 10 {
            (center, center)
        } else {
            v.sort_unstable_by(|a, b| a.total_cmp(b));
            (quantile_sorted(v, 0.025), quantile_sorted(v, 0.975))
        }
    };
    let speed_ci = ci(&mut speeds, speed);
    let log_ci = ci(&mut logs, log_coeff);
    Ok(FrontFit {
        intercept,
        speed,
        log_coeff,
        speed_ci,
        log_ci,
    })
}

// ---------------------------------------------------------------------------
// Tail-exponent fit.

#[derive(Debug, Clone, PartialEq)]
pub struct TailFit {
    /// Fitted exponential decay rate of the upper tail.
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_tail: usize,
}

/// Fits the log-survival slope of the upper `tail_fraction` of the sample
/// (after centering at the median); bootstrap percentile CI.
pub fn tail_exponent(
    samples: &[f64],
    tail_fraction: f64,
    bootstrap: usize,
    seed: u64,
) -> Result<TailFit, StatsError> {
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
        return Err(StatsError::InvalidArgs("tail_fraction must be in (0, 1)"));
    }
    let rate = tail_rate(samples, tail_fraction)?;
    let k = ((samples.len() as f64) * tail_fraction).floor() as usize;

    let mut rates = Vec::with_capacity(bootstrap);
    let key = rng::expand_seed(rng::derive(seed, 0x7461_696c));
    let n = samples.len();
    for b in 0..bootstrap {
        let mut sample = Vec::with_capacity(n);
        let mut draws = rng::session(&key, b as u64, 0);
        for i in 0..n {
            if i % 24 == 23 {
                draws = rng::session(&key, b as u64, (i / 24 + 1) as u64);
            }
            sample.push(samples[(draws.next_u64() % n as u64) as usize]);
        }
        if let Ok(r) = tail_rate(&sample, tail_fraction) {
            rates.push(r);
        }
    }
    let (ci_low, ci_high) = if rates.len() < 10 {
        (rate, rate)
    } else {
        rates.sort_unstable_by(|a, b| a.total_cmp(b));
        (quantile_sorted(&rates, 0.025), quantile_sorted(&rates, 0.975))
    };
    Ok(TailFit {
        rate,
        ci_low,
        ci_high,
        n_tail: k,
    })
}

fn tail_rate(samples: &[f64], tail_fraction: f64) -> Result<f64, StatsError> {
    let n = samples.len();
    let k = ((n as f64) * tail_fraction).floor() as usize;
    if k < 50 {
        return Err(StatsError::InsufficientTail { available: k, needed: 50 });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|a, b| a.total_cmp(b));
    let med = quantile_sorted(&sorted, 0.5);

    // Log-survival regression over the top k order statistics.
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for j in (n - k)..n {
        let x = sorted[j] - med;
        let survival = (n - j) as f64 / n as f64;
        let y = survival.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let kf = k as f64;
    let denom = kf * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return Err(StatsError::DegenerateDesign);
    }
    let slope = (kf * sxy - sx * sy) / denom;
    Ok(-slope)
}

// ---------------------------------------------------------------------------
// Genealogy of the argmax particle.

#[derive(Debug, Clone, PartialEq)]
pub struct GenealogySummary {
    pub n_used: usize,
    /// Mean and spread of `T(u*) / t`.
    pub mean_time_fraction: f64,
    pub sd_time_fraction: f64,
    /// Mean and spread of `X(T(u*)) / t`.
    pub mean_position_slope: f64,
    pub sd_position_slope: f64,
}

/// Distribution of the argmax type-2 particle's mutation fraction and
/// founding-position slope.
pub fn genealogy_profile(result: &EnsembleResult) -> Result<GenealogySummary, StatsError> {
    let t = result.meta.t;
    if !(t > 0.0) {
        return Err(StatsError::InvalidArgs("needs a positive horizon"));
    }
    let mut fracs = Vec::new();
    let mut slopes = Vec::new();
    for r in &result.records {
        if let (Some(tm), Some(xm)) = (r.argmax_mutation_time, r.argmax_mutation_position) {
            fracs.push(tm / t);
            slopes.push(xm / t);
        }
    }
    if fracs.is_empty() {
        return Err(StatsError::NoTypeTwoMaxima);
    }
    let (mf, _) = mean_se(&fracs);
    let (ms, _) = mean_se(&slopes);
    let sd = |v: &[f64], m: f64| {
        (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
    };
    Ok(GenealogySummary {
        n_used: fracs.len(),
        mean_time_fraction: mf,
        sd_time_fraction: sd(&fracs, mf),
        mean_position_slope: ms,
        sd_position_slope: sd(&slopes, ms),
    })
}

// ---------------------------------------------------------------------------
// Gumbel-mixture diagnostic.

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureDiagnostic {
    /// One-parameter scale fitted by matching the cdf at the median.
    pub c_hat: f64,
    /// Sup distance between the empirical cdf and the plug-in mixture.
    pub sup_distance: f64,
    pub n: usize,
}

/// Compares the empirical law of centered maxima against the plug-in
/// mixture `E[exp(-c W e^(-theta x))]` with `c` fitted at the median.
pub fn gumbel_mixture_diagnostic(
    centered_maxima: &[f64],
    martingale_values: &[f64],
    theta: f64,
) -> Result<MixtureDiagnostic, StatsError> {
    if centered_maxima.is_empty() || martingale_values.is_empty() {
        return Err(StatsError::InvalidArgs("empty samples"));
    }
    if !(theta > 0.0) {
        return Err(StatsError::InvalidArgs("theta must be positive"));
    }
    let mixture_cdf = |c: f64, x: f64| -> f64 {
        let mut sum = 0.0;
        for &w in martingale_values {
            sum += (-c * w.max(0.0) * (-theta * x).exp()).exp();
        }
        sum / martingale_values.len() as f64
    };
    let mut sorted = centered_maxima.to_vec();
    sorted.sort_unstable_by(|a, b| a.total_cmp(b));
    let med = quantile_sorted(&sorted, 0.5);

    // G_c(med) is decreasing in c; bisection on log c.
    let mut lo = -30.0f64;
    let mut hi = 30.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mixture_cdf(mid.exp(), med) > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c_hat = (0.5 * (lo + hi)).exp();

    let n = sorted.len();
    let mut sup: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let g = mixture_cdf(c_hat, x);
        sup = sup.max((g - i as f64 / n as f64).abs());
        sup = sup.max(((i + 1) as f64 / n as f64 - g).abs());
    }
    Ok(MixtureDiagnostic {
        c_hat,
        sup_distance: sup,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{expand_seed, session};

    #[test]
    fn median_and_quantiles() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 5.0);
        assert_eq!(quantile_sorted(&v, 0.25), 2.0);
    }

    #[test]
    fn ks_accepts_the_true_law_and_rejects_a_wrong_one() {
        let key = expand_seed(2024);
        let xs: Vec<f64> = (0..4000)
            .map(|i| session(&key, i, 0).exponential(2.0))
            .collect();
        let (_, p_true) = ks_one_sample(&xs, |x| 1.0 - (-2.0 * x).exp());
        assert!(p_true > 0.01, "p = {p_true}");
        let (_, p_wrong) = ks_one_sample(&xs, |x| 1.0 - (-3.0 * x).exp());
        assert!(p_wrong < 1e-6, "p = {p_wrong}");

        let ys: Vec<f64> = (0..4000)
            .map(|i| session(&key, 10_000 + i, 0).exponential(2.0))
            .collect();
        let (_, p_two) = ks_two_sample(&xs, &ys);
        assert!(p_two > 0.01, "p = {p_two}");
        let zs: Vec<f64> = ys.iter().map(|y| y * 1.25).collect();
        let (_, p_shift) = ks_two_sample(&xs, &zs);
        assert!(p_shift < 1e-3, "p = {p_shift}");
    }

    #[test]
    fn exact_median_curve_is_recovered() {
        // median = 2 t - 3 log t, an exact design.
        let points: Vec<(f64, f64)> = [5.0, 7.0, 9.0, 11.0, 13.0]
            .iter()
            .map(|&t| (t, 2.0 * t - 3.0 * t.ln()))
            .collect();
        let [c0, c1, c2] = fit_median_curve(&points).unwrap();
        assert!(c0.abs() < 1e-9);
        assert!((c1 - 2.0).abs() < 1e-9);
        assert!((c2 + 3.0).abs() < 1e-9);

        let series: Vec<FrontSeriesPoint> = points
            .iter()
            .map(|&(t, y)| FrontSeriesPoint { t, maxima: alloc::vec![y] })
            .collect();
        let fit = front_regression(&series, 0, 1).unwrap();
        assert!((fit.speed - 2.0).abs() < 1e-9);
        assert!((fit.log_coeff + 3.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_designs_are_rejected() {
        let points = [(5.0, 1.0), (5.0, 1.1), (7.0, 2.0), (9.0, 2.5)];
        assert!(matches!(
            fit_median_curve(&points),
            Err(StatsError::DegenerateDesign)
        ));
    }

    #[test]
    fn tail_fit_recovers_a_known_exponential_rate() {
        let key = expand_seed(808);
        let xs: Vec<f64> = (0..10_000)
            .map(|i| session(&key, i, 0).exponential(3.0))
            .collect();
        let fit = tail_exponent(&xs, 0.1, 120, 5).unwrap();
        assert!(fit.rate > 2.8 && fit.rate < 3.2, "rate {}", fit.rate);
        assert!(fit.ci_low <= fit.rate && fit.rate <= fit.ci_high);
        assert_eq!(fit.n_tail, 1000);
    }

    #[test]
    fn tail_fit_confidence_calibration() {
        // The CI should cover the truth for the vast majority of synthetic
        // datasets.
        let key = expand_seed(4242);
        let mut covered = 0;
        let runs = 120;
        for r in 0..runs {
            let xs: Vec<f64> = (0..1500)
                .map(|i| session(&key, r * 10_000 + i, 0).exponential(2.0))
                .collect();
            let fit = tail_exponent(&xs, 0.1, 99, r).unwrap();
            if fit.ci_low <= 2.0 && 2.0 <= fit.ci_high {
                covered += 1;
            }
        }
        let coverage = covered as f64 / runs as f64;
        assert!(coverage >= 0.88, "coverage {coverage}");
    }

    #[test]
    fn tail_fit_needs_mass() {
        let xs = [1.0f64; 200];
        assert!(matches!(
            tail_exponent(&xs, 0.1, 10, 0),
            Err(StatsError::InsufficientTail { .. })
        ));
    }

    #[test]
    fn mixture_diagnostic_self_test() {
        // Exact mixture data with W == 1 and known c: M = (ln c - ln E)/theta.
        let theta = 2.0;
        let c = 0.7;
        let key = expand_seed(31337);
        let xs: Vec<f64> = (0..10_000)
            .map(|i| {
                let e = session(&key, i, 0).exponential(1.0);
                (c.ln() - e.ln()) / theta
            })
            .collect();
        let w = alloc::vec![1.0; 64];
        let diag = gumbel_mixture_diagnostic(&xs, &w, theta).unwrap();
        assert!(diag.sup_distance < 0.02, "sup {}", diag.sup_distance);
        assert!((diag.c_hat - c).abs() / c < 0.25, "c_hat {}", diag.c_hat);
    }

    #[test]
    fn ensemble_smoke_and_errors() {
        let params = ModelParams::new(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            run_ensemble(&params, 2.0, 0, 1, &EnsembleOptions::default()),
            Err(StatsError::InvalidArgs(_))
        ));

        // alpha = 0: no type-2 fields anywhere.
        let no_mut = ModelParams::new(1.0, 1.0, 0.0).unwrap();
        let res = run_ensemble(&no_mut, 1.5, 16, 9, &EnsembleOptions::default()).unwrap();
        for r in &res.records {
            assert!(r.max_type2.is_none());
            assert!(r.atoms.is_empty());
            assert!(r.argmax_mutation_time.is_none());
        }
        assert!(genealogy_profile(&res).is_err());

        // Hopeless horizon without pruning is rejected up front.
        let hot = ModelParams::new(2.0, 0.5, 1.0).unwrap();
        let opts = EnsembleOptions { max_particles: 10_000, ..Default::default() };
        assert!(matches!(
            run_ensemble(&hot, 12.0, 1, 1, &opts),
            Err(StatsError::InfeasibleHorizon { .. })
        ));
    }

    #[test]
    fn ensemble_records_are_deterministic() {
        let params = ModelParams::new(2.0, 0.5, 1.0).unwrap();
        let opts = EnsembleOptions::default();
        let a = run_ensemble(&params, 2.0, 8, 77, &opts).unwrap();
        let b = run_ensemble(&params, 2.0, 8, 77, &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn genealogy_profile_reads_the_argmax_record() {
        let params = ModelParams::new(2.0, 0.5, 1.0).unwrap();
        let res = run_ensemble(&params, 3.0, 60, 3, &EnsembleOptions::default()).unwrap();
        let g = genealogy_profile(&res).unwrap();
        assert!(g.n_used > 0);
        assert!(g.mean_time_fraction >= 0.0 && g.mean_time_fraction <= 1.0);
    }
}
