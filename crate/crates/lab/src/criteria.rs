//! Acceptance criteria: summary schemas, pinned thresholds, and the
//! evaluation logic shared by the test suite and the `report` command.
//!
//! Every criterion consumes one or two tagged summary files produced by
//! the other subcommands (`<tag>.summary.json` in the output directory)
//! and reduces to a pass/fail verdict plus a human-readable detail line.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

use crate::io;

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Well-known artifact tags consumed by `report`.
pub mod tags {
    pub const C01_PHASE: &str = "c01_phase_sweep";
    pub const C02_BOUNDARY: &str = "c02_boundary";
    pub const C03_MTO: &str = "c03_mto";
    pub const C04_LINEAGE: &str = "c04_lineage";
    pub const C05_TRIANGLE: &str = "c05_triangle";
    pub const C06_MARTINGALE: &str = "c06_martingale";
    pub const C07_FRONT_C3: &str = "c07_front_c3";
    pub const C08_FRONT_C1: &str = "c08_front_c1";
    pub const C08_FRONT_C2: &str = "c08_front_c2";
    pub const C10_LARGEDEV: &str = "c10_largedev";
    pub const C10_DECORATION: &str = "c10_decoration";
    pub const C11_DECORATION: &str = "c11_decoration";
    pub const C12_FKPP: &str = "c12_fkpp";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Pass,
    Fail,
    Missing,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Missing => "MISSING",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: String,
    pub required: bool,
    pub status: Status,
    pub details: String,
}

fn pass(id: u32, name: &str, ok: bool, details: String) -> CriterionOutcome {
    CriterionOutcome {
        id,
        name: name.to_string(),
        required: true,
        status: if ok { Status::Pass } else { Status::Fail },
        details,
    }
}

fn missing(id: u32, name: &str, tag: &str) -> CriterionOutcome {
    CriterionOutcome {
        id,
        name: name.to_string(),
        required: true,
        status: Status::Missing,
        details: format!("missing artifact {tag}.summary.json"),
    }
}

// ---------------------------------------------------------------------------
// Summary schemas.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseSweepSummary {
    pub n_per_region: u64,
    pub grid_step: f64,
    pub max_abs_diff_brute: f64,
    pub max_abs_diff_envelope: f64,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundarySummary {
    pub grid_points: u64,
    pub max_err_one_three: f64,
    pub max_err_two_three: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentCheck {
    pub label: String,
    pub mc_mean: f64,
    pub mc_se: f64,
    pub oracle: f64,
}

impl MomentCheck {
    pub fn within(&self, k: f64) -> bool {
        (self.mc_mean - self.oracle).abs() <= k * self.mc_se.max(1e-12)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MtoCaseSummary {
    pub beta: f64,
    pub sigma2: f64,
    pub alpha: f64,
    pub t: f64,
    pub x: f64,
    pub n: u64,
    pub checks: Vec<MomentCheck>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MtoSummary {
    pub cases: Vec<MtoCaseSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LineageSummary {
    pub alpha: f64,
    pub t: f64,
    pub take: usize,
    pub n_gaps: usize,
    pub ks_d: f64,
    pub ks_p: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TriangleSummary {
    pub t: f64,
    pub n: u64,
    pub offsets: Vec<f64>,
    pub hits: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MartingaleSummary {
    pub beta: f64,
    pub sigma2: f64,
    pub alpha: f64,
    pub t: f64,
    pub n: u64,
    /// `(theta, mean, se)` per exponent.
    pub entries: Vec<(f64, f64, f64)>,
    /// Derivative martingale at time zero (must be exactly zero).
    pub z0: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailSummary {
    pub t_used: f64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_tail: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenealogyBrief {
    pub t: f64,
    pub n_used: usize,
    pub mean_time_fraction: f64,
    pub mean_position_slope: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrontEnsembleSummary {
    pub beta: f64,
    pub sigma2: f64,
    pub alpha: f64,
    pub region: String,
    /// Tail exponent predicted for the region.
    pub theta_target: f64,
    /// Closed-form speed for the region.
    pub speed_target: f64,
    pub prune_gap: Option<f64>,
    pub n: u64,
    pub horizons: Vec<f64>,
    pub medians: Vec<f64>,
    pub n_effective: Vec<usize>,
    /// Present when at least four distinct horizons were run.
    pub speed: Option<f64>,
    pub speed_ci: Option<(f64, f64)>,
    pub log_coeff: Option<f64>,
    /// Tail fit over the maxima at the largest horizon.
    pub tail: Option<TailSummary>,
    /// Genealogy summaries aligned with `horizons`.
    pub genealogy: Vec<Option<GenealogyBrief>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LargeDevSummary {
    pub rho: f64,
    pub t: f64,
    pub n: u64,
    pub mc: f64,
    pub first_moment_bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CEstimateSummary {
    pub horizon: f64,
    pub n: u64,
    pub estimate: f64,
    pub std_error: f64,
    pub overflow_resamples: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionedSummary {
    pub rho: f64,
    pub horizon: f64,
    pub n: u64,
    pub all_max_atoms_zero: bool,
    pub mean_trials: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecorationSummary {
    pub rho: f64,
    pub estimates: Vec<CEstimateSummary>,
    pub conditioned: Option<ConditionedSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FkppCaseSummary {
    pub beta: f64,
    pub sigma2: f64,
    pub alpha: f64,
    pub dx: f64,
    pub t_end: f64,
    pub speed_u: f64,
    pub speed_v: f64,
    pub target: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FkppSummary {
    pub cases: Vec<FkppCaseSummary>,
    /// `(dx, speed_u)` refinement ladder on the anomalous point.
    pub refinement: Vec<(f64, f64)>,
}

// ---------------------------------------------------------------------------
// Evaluators.

pub fn eval_c01(s: &PhaseSweepSummary) -> CriterionOutcome {
    let tol = 2.0 * s.grid_step;
    let ok = s.max_abs_diff_brute <= tol && s.max_abs_diff_envelope <= tol;
    pass(
        1,
        "phase/optimization agreement",
        ok,
        format!(
            "{} pts/region: |v - brute| <= {:.2e}, |v - envelope| <= {:.2e} (tol {:.2e}), {:.1}s",
            s.n_per_region, s.max_abs_diff_brute, s.max_abs_diff_envelope, tol, s.elapsed_secs
        ),
    )
}

pub fn eval_c02(s: &BoundarySummary) -> CriterionOutcome {
    let ok = s.max_err_one_three <= 1e-9 && s.max_err_two_three <= 1e-9;
    pass(
        2,
        "boundary continuity",
        ok,
        format!(
            "{}-point grids: err(I|III) = {:.2e}, err(II|III) = {:.2e} (tol 1e-9)",
            s.grid_points, s.max_err_one_three, s.max_err_two_three
        ),
    )
}

pub fn eval_c03(s: &MtoSummary) -> CriterionOutcome {
    let mut worst = 0.0f64;
    let mut failures = 0;
    let mut total = 0;
    for case in &s.cases {
        for check in &case.checks {
            total += 1;
            let sigmas = (check.mc_mean - check.oracle).abs() / check.mc_se.max(1e-12);
            worst = worst.max(sigmas);
            if !check.within(3.0) {
                failures += 1;
            }
        }
    }
    pass(
        3,
        "many-to-one oracle agreement",
        failures == 0 && s.cases.len() >= 10,
        format!(
            "{} comparisons over {} parameter sets; worst deviation {:.2} SE (limit 3), {} failures",
            total,
            s.cases.len(),
            worst,
            failures
        ),
    )
}

pub fn eval_c04(s: &LineageSummary) -> CriterionOutcome {
    pass(
        4,
        "exponential mutation structure",
        s.ks_p > 0.01,
        format!(
            "KS vs Exp({}) on {} pooled gaps: D = {:.4}, p = {:.4} (need > 0.01)",
            s.alpha, s.n_gaps, s.ks_d, s.ks_p
        ),
    )
}

pub fn eval_c05(s: &TriangleSummary) -> CriterionOutcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for (k, &y) in s.offsets.iter().enumerate() {
        let phat = s.hits[k] as f64 / s.n as f64;
        let se = (phat * (1.0 - phat) / s.n as f64).sqrt();
        let bound = (-SQRT_2 * y).exp();
        if phat > bound + 3.0 * se {
            ok = false;
        }
        lines.push(format!("y={y}: {phat:.4} <= {bound:.4}+3se"));
    }
    pass(5, "pathwise triangle bound", ok, lines.join("; "))
}

pub fn eval_c06(s: &MartingaleSummary) -> CriterionOutcome {
    let mut ok = s.z0 == 0.0;
    let mut lines = vec![format!("Z_0 = {}", s.z0)];
    for &(theta, mean, se) in &s.entries {
        if (mean - 1.0).abs() > 3.0 * se.max(1e-12) {
            ok = false;
        }
        lines.push(format!("theta={theta}: E[W] = {mean:.4} +- {se:.4}"));
    }
    pass(6, "martingale mean preservation", ok, lines.join("; "))
}

pub fn eval_c07(s: &FrontEnsembleSummary) -> CriterionOutcome {
    let speed = s.speed.unwrap_or(f64::NAN);
    let ci = s.speed_ci.unwrap_or((f64::NAN, f64::NAN));
    let ok = (1.35..=1.65).contains(&speed) && ci.1 > SQRT_2;
    pass(
        7,
        "anomalous spreading speed",
        ok,
        format!(
            "fitted speed {:.4} (CI {:.4}..{:.4}), target 1.5, must lie in [1.35, 1.65] \
             with upper CI above sqrt(2)",
            speed, ci.0, ci.1
        ),
    )
}

pub fn eval_c08(
    c3: &FrontEnsembleSummary,
    c1: &FrontEnsembleSummary,
    c2: &FrontEnsembleSummary,
) -> CriterionOutcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for s in [c3, c1, c2] {
        match &s.tail {
            Some(tail) => {
                let rel = (tail.rate - s.theta_target).abs() / s.theta_target;
                if rel > 0.3 {
                    ok = false;
                }
                lines.push(format!(
                    "{}: rate {:.3} vs theta {:.3} ({:+.0}%)",
                    s.region,
                    tail.rate,
                    s.theta_target,
                    100.0 * (tail.rate - s.theta_target) / s.theta_target
                ));
            }
            None => {
                ok = false;
                lines.push(format!("{}: no tail fit", s.region));
            }
        }
    }
    pass(8, "extremal tail exponents", ok, lines.join("; "))
}

pub fn eval_c09(
    c3: &FrontEnsembleSummary,
    c1: &FrontEnsembleSummary,
    c2: &FrontEnsembleSummary,
) -> CriterionOutcome {
    let pick = |s: &FrontEnsembleSummary, t_want: f64| -> Option<GenealogyBrief> {
        s.genealogy
            .iter()
            .flatten()
            .find(|g| (g.t - t_want).abs() < 1e-9)
            .cloned()
    };
    let g3 = pick(c3, 9.0);
    let g1 = c1.genealogy.iter().flatten().last().cloned();
    let g2 = c2.genealogy.iter().flatten().last().cloned();
    let mut ok = true;
    let mut lines = Vec::new();
    match &g3 {
        Some(g) => {
            // Both the switch-time fraction and the founding-position
            // slope localize near p* = p* a* = 0.5 at this point.
            if !(0.35..=0.65).contains(&g.mean_time_fraction)
                || !(0.35..=0.65).contains(&g.mean_position_slope)
            {
                ok = false;
            }
            lines.push(format!(
                "C_III t={}: mean T(u*)/t = {:.3}, mean X(T(u*))/t = {:.3} (want [0.35, 0.65])",
                g.t, g.mean_time_fraction, g.mean_position_slope
            ));
        }
        None => {
            ok = false;
            lines.push("C_III: no genealogy at t=9".into());
        }
    }
    match &g2 {
        Some(g) => {
            if g.mean_time_fraction >= 0.3 {
                ok = false;
            }
            lines.push(format!(
                "C_II t={}: mean T(u*)/t = {:.3} (want < 0.3)",
                g.t, g.mean_time_fraction
            ));
        }
        None => {
            ok = false;
            lines.push("C_II: no genealogy".into());
        }
    }
    match &g1 {
        Some(g) => {
            if g.mean_time_fraction <= 0.7 {
                ok = false;
            }
            lines.push(format!(
                "C_I t={}: mean (t-T(u*))/t = {:.3} (want < 0.3)",
                g.t,
                1.0 - g.mean_time_fraction
            ));
        }
        None => {
            ok = false;
            lines.push("C_I: no genealogy".into());
        }
    }
    pass(9, "genealogy localization", ok, lines.join("; "))
}

pub fn eval_c10(ld: &LargeDevSummary, dec: &DecorationSummary) -> CriterionOutcome {
    let c_hat = dec.estimates.first().map(|e| e.estimate).unwrap_or(f64::NAN);
    let prediction = c_hat * (-(ld.rho * ld.rho / 2.0 - 1.0) * ld.t).exp()
        / ((2.0 * std::f64::consts::PI * ld.t).sqrt() * ld.rho);
    let ratio = ld.mc / prediction;
    let ok = ld.mc <= ld.first_moment_bound && (0.5..=2.0).contains(&ratio);
    pass(
        10,
        "large-deviation crosscheck",
        ok,
        format!(
            "mc {:.5} <= bound {:.5}; mc / (C_hat * asymptotic) = {:.3} with C_hat({}) = {:.4} \
             (want [0.5, 2.0])",
            ld.mc, ld.first_moment_bound, ratio, ld.rho, c_hat
        ),
    )
}

pub fn eval_c11(s: &DecorationSummary) -> CriterionOutcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for e in &s.estimates {
        if !(e.estimate > 0.0 && e.estimate < 1.0) {
            ok = false;
        }
        lines.push(format!(
            "T={}: C_hat = {:.4} +- {:.4} (n={}, overflows={})",
            e.horizon, e.estimate, e.std_error, e.n, e.overflow_resamples
        ));
    }
    if s.estimates.len() >= 2 {
        let a = &s.estimates[0];
        let b = &s.estimates[1];
        let combined = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        let drift = (a.estimate - b.estimate).abs();
        if drift > 2.0 * combined {
            ok = false;
        }
        lines.push(format!("horizon drift {:.4} vs 2*SE {:.4}", drift, 2.0 * combined));
    } else {
        ok = false;
        lines.push("need two horizons".into());
    }
    match &s.conditioned {
        Some(c) => {
            if !c.all_max_atoms_zero {
                ok = false;
            }
            lines.push(format!(
                "conditioned (rho={}, n={}): max atoms all exactly 0 = {}, mean trials {:.2}",
                c.rho, c.n, c.all_max_atoms_zero, c.mean_trials
            ));
        }
        None => {
            ok = false;
            lines.push("no conditioned batch".into());
        }
    }
    pass(11, "decoration invariants", ok, lines.join("; "))
}

pub fn eval_c12(s: &FkppSummary) -> CriterionOutcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for case in &s.cases {
        let rel = (case.speed_u - case.target).abs() / case.target;
        if rel > 0.07 {
            ok = false;
        }
        lines.push(format!(
            "(beta={}, sigma2={}, alpha={}): speed {:.4} vs {:.4} ({:+.1}%)",
            case.beta,
            case.sigma2,
            case.alpha,
            case.speed_u,
            case.target,
            100.0 * (case.speed_u - case.target) / case.target
        ));
    }
    if s.refinement.len() >= 3 {
        let d1 = (s.refinement[1].1 - s.refinement[0].1).abs();
        let d2 = (s.refinement[2].1 - s.refinement[1].1).abs();
        if d1 < 1.5 * d2 {
            ok = false;
        }
        lines.push(format!("refinement deltas {:.2e} -> {:.2e}", d1, d2));
    } else {
        ok = false;
        lines.push("need a 3-step refinement ladder".into());
    }
    pass(12, "coupled front speeds", ok, lines.join("; "))
}

// ---------------------------------------------------------------------------
// Report assembly.

fn load<T: for<'de> Deserialize<'de>>(dir: &Path, tag: &str) -> Option<T> {
    io::read_summary(dir, tag).and_then(|v| serde_json::from_value(v).ok())
}

/// Evaluates every criterion from the artifacts present in `dir`.
pub fn evaluate_directory(dir: &Path) -> Vec<CriterionOutcome> {
    let mut out = Vec::new();

    out.push(match load::<PhaseSweepSummary>(dir, tags::C01_PHASE) {
        Some(s) => eval_c01(&s),
        None => missing(1, "phase/optimization agreement", tags::C01_PHASE),
    });
    out.push(match load::<BoundarySummary>(dir, tags::C02_BOUNDARY) {
        Some(s) => eval_c02(&s),
        None => missing(2, "boundary continuity", tags::C02_BOUNDARY),
    });
    out.push(match load::<MtoSummary>(dir, tags::C03_MTO) {
        Some(s) => eval_c03(&s),
        None => missing(3, "many-to-one oracle agreement", tags::C03_MTO),
    });
    out.push(match load::<LineageSummary>(dir, tags::C04_LINEAGE) {
        Some(s) => eval_c04(&s),
        None => missing(4, "exponential mutation structure", tags::C04_LINEAGE),
    });
    out.push(match load::<TriangleSummary>(dir, tags::C05_TRIANGLE) {
        Some(s) => eval_c05(&s),
        None => missing(5, "pathwise triangle bound", tags::C05_TRIANGLE),
    });
    out.push(match load::<MartingaleSummary>(dir, tags::C06_MARTINGALE) {
        Some(s) => eval_c06(&s),
        None => missing(6, "martingale mean preservation", tags::C06_MARTINGALE),
    });

    let front_c3 = load::<FrontEnsembleSummary>(dir, tags::C07_FRONT_C3);
    let front_c1 = load::<FrontEnsembleSummary>(dir, tags::C08_FRONT_C1);
    let front_c2 = load::<FrontEnsembleSummary>(dir, tags::C08_FRONT_C2);

    out.push(match &front_c3 {
        Some(s) => eval_c07(s),
        None => missing(7, "anomalous spreading speed", tags::C07_FRONT_C3),
    });
    out.push(match (&front_c3, &front_c1, &front_c2) {
        (Some(a), Some(b), Some(c)) => eval_c08(a, b, c),
        _ => missing(8, "extremal tail exponents", "c07/c08 front ensembles"),
    });
    out.push(match (&front_c3, &front_c1, &front_c2) {
        (Some(a), Some(b), Some(c)) => eval_c09(a, b, c),
        _ => missing(9, "genealogy localization", "c07/c08 front ensembles"),
    });

    out.push(
        match (
            load::<LargeDevSummary>(dir, tags::C10_LARGEDEV),
            load::<DecorationSummary>(dir, tags::C10_DECORATION),
        ) {
            (Some(ld), Some(dec)) => eval_c10(&ld, &dec),
            _ => missing(10, "large-deviation crosscheck", "c10_largedev + c10_decoration"),
        },
    );
    out.push(match load::<DecorationSummary>(dir, tags::C11_DECORATION) {
        Some(s) => eval_c11(&s),
        None => missing(11, "decoration invariants", tags::C11_DECORATION),
    });
    out.push(match load::<FkppSummary>(dir, tags::C12_FKPP) {
        Some(s) => eval_c12(&s),
        None => missing(12, "coupled front speeds", tags::C12_FKPP),
    });

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_behave() {
        let good = PhaseSweepSummary {
            n_per_region: 1000,
            grid_step: 1e-3,
            max_abs_diff_brute: 1.5e-3,
            max_abs_diff_envelope: 1e-3,
            elapsed_secs: 1.0,
        };
        assert_eq!(eval_c01(&good).status, Status::Pass);
        let bad = PhaseSweepSummary {
            max_abs_diff_brute: 2.5e-3,
            ..good
        };
        assert_eq!(eval_c01(&bad).status, Status::Fail);

        let tri = TriangleSummary {
            t: 6.0,
            n: 1000,
            offsets: vec![1.0],
            hits: vec![900],
        };
        assert_eq!(eval_c05(&tri).status, Status::Fail);
    }

    #[test]
    fn empty_directory_reports_missing() {
        let dir = tempfile::tempdir().unwrap();
        let outcomes = evaluate_directory(dir.path());
        assert_eq!(outcomes.len(), 12);
        assert!(outcomes.iter().all(|o| o.status == Status::Missing));
    }
}
