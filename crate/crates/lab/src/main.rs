//! `bbmlab`: command-line laboratory for the two-type branching Brownian
//! motion. See `docs/formats.md` for output schemas and the mapping from
//! subcommand invocations to acceptance-report inputs.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use bbm_core::engine::{self, SimConfig};
use bbm_core::oracle;
use bbm_core::phase::{self, ModelParams};
use bbm_core::quad::{QuadRule, QuadratureSpec};
use bbm_core::stats::EnsembleOptions;
use bbm_lab::{criteria, experiments, io, runner};

#[derive(Parser)]
#[command(
    name = "bbmlab",
    version,
    about = "Simulation and numerical laboratory for the two-type reducible branching Brownian motion"
)]
struct Cli {
    /// Output directory (env BBMLAB_OUTPUT_DIR, default ./bbmlab-out).
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// Worker threads for replicate-parallel work (0 = all cores).
    /// Results are independent of this setting.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// TOML file supplying defaults for flags not given on the command
    /// line (top-level keys named like the long flags).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Phase diagram: classify a point and print its front parameters,
    /// or run the sweep/boundary verification artifacts.
    Phase(PhaseArgs),
    /// Run one simulation and dump snapshots plus the birth record.
    Simulate(SimulateArgs),
    /// Deterministic first-moment oracles (closed forms and quadrature).
    Oracle(OracleArgs),
    /// Decoration sampler: acceptance probability and conditioned samples.
    Decoration(DecorationArgs),
    /// Ensemble experiments (front statistics, count validation, ...).
    Ensemble(EnsembleArgs),
    /// Coupled reaction-diffusion front speeds.
    Fkpp(FkppArgs),
    /// Assemble the acceptance verdicts from artifacts in the output dir.
    Report(ReportArgs),
}

#[derive(Args, Serialize)]
struct PhaseArgs {
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Relative tolerance for boundary detection.
    #[arg(long, default_value_t = phase::DEFAULT_REGION_EPS)]
    eps: f64,
    /// Run the random sweep comparing closed forms to both oracles.
    #[arg(long)]
    sweep_per_region: Option<u64>,
    /// Run the boundary-continuity grid check.
    #[arg(long)]
    boundary_grid: Option<u64>,
    #[arg(long, default_value_t = 1e-3)]
    grid_step: f64,
    #[arg(long, default_value_t = 101)]
    seed: u64,
    #[arg(long)]
    tag: Option<String>,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    sigma2: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long)]
    t_max: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Comma-separated checkpoint times (default: t_max only).
    #[arg(long, value_delimiter = ',')]
    checkpoints: Vec<f64>,
    #[arg(long)]
    prune_gap: Option<f64>,
    #[arg(long)]
    prune_speed: Option<f64>,
    #[arg(long, default_value_t = 50_000_000)]
    max_particles: usize,
    /// Start from a single type-2 particle (standard BBM law).
    #[arg(long)]
    start_type2: bool,
    /// Snapshot format: jsonl, bin, or both.
    #[arg(long, default_value = "jsonl")]
    format: String,
    #[arg(long, default_value = "simulate")]
    tag: String,
}

#[derive(Args, Serialize)]
struct OracleArgs {
    #[command(subcommand)]
    query: OracleQuery,
}

#[derive(Subcommand, Serialize, Clone)]
enum OracleQuery {
    /// Expected type-1 particles at or above x at time t.
    Type1Above {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        sigma2: f64,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        x: f64,
    },
    /// Expected total type-2 particles at time t.
    Type2Count {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        t: f64,
    },
    /// Expected type-2 particles at or above x at time t (quadrature).
    Type2Above {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        sigma2: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        x: f64,
        #[arg(long, default_value = "adaptive")]
        rule: String,
        #[arg(long, default_value_t = 1e-10)]
        abs_tol: f64,
        #[arg(long, default_value_t = 1e-10)]
        rel_tol: f64,
        #[arg(long, default_value_t = 200)]
        max_subdivisions: usize,
    },
    /// Exact Gaussian tail and its classical upper bound.
    GaussianTail {
        #[arg(long)]
        x: f64,
    },
    /// First-moment bound on P(M_t >= rho t + y) for standard BBM.
    LdBound {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 0.0)]
        y: f64,
    },
}

#[derive(Args, Serialize)]
struct DecorationArgs {
    #[arg(long, default_value_t = 2.0)]
    rho: f64,
    /// Comma-separated spine horizons.
    #[arg(long, value_delimiter = ',', default_values_t = vec![10.0])]
    horizons: Vec<f64>,
    /// Sample counts aligned with the horizons (last value repeats).
    #[arg(long, value_delimiter = ',', default_values_t = vec![1000u64])]
    n: Vec<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also draw this many conditioned samples.
    #[arg(long, default_value_t = 0)]
    conditioned: u64,
    #[arg(long)]
    cond_rho: Option<f64>,
    #[arg(long)]
    cond_horizon: Option<f64>,
    #[arg(long, default_value_t = 4000)]
    max_rejections: u64,
    /// Emit at most this many per-sample JSONL summaries.
    #[arg(long, default_value_t = 100)]
    emit_samples: u64,
    #[arg(long, default_value = "decoration")]
    tag: String,
}

#[derive(Args, Serialize)]
struct EnsembleArgs {
    /// front | counts | martingale | lineage | triangle | largedev
    #[arg(long, default_value = "front")]
    mode: String,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Comma-separated horizons (front mode) or a single time.
    #[arg(long, value_delimiter = ',')]
    t: Vec<f64>,
    #[arg(long, default_value_t = 500)]
    n: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    prune_gap: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    /// Threshold for count-above checks (counts mode).
    #[arg(long, default_value_t = 0.0)]
    x: f64,
    /// Martingale exponents (martingale mode).
    #[arg(long, value_delimiter = ',')]
    thetas: Vec<f64>,
    /// Crossing offsets (triangle mode).
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0, 3.0])]
    offsets: Vec<f64>,
    /// Drift for largedev mode.
    #[arg(long)]
    rho: Option<f64>,
    /// First gaps per lineage (lineage mode).
    #[arg(long, default_value_t = 3)]
    take: usize,
    #[arg(long)]
    tag: Option<String>,
}

#[derive(Args, Serialize)]
struct FkppArgs {
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    sigma2: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    dx: f64,
    /// Optional refinement ladder, e.g. 0.1,0.05,0.025.
    #[arg(long, value_delimiter = ',')]
    dx_ladder: Vec<f64>,
    #[arg(long, default_value_t = 60.0)]
    t_end: f64,
    #[arg(long, default_value_t = 0.5)]
    level: f64,
    #[arg(long, default_value = "fkpp")]
    tag: String,
}

#[derive(Args, Serialize)]
struct ReportArgs {
    /// Directory holding the *.summary.json artifacts (default: the
    /// output directory).
    #[arg(long)]
    dir: Option<PathBuf>,
    /// Treat missing artifacts as failures.
    #[arg(long)]
    strict: bool,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}

fn output_dir(cli_dir: &Option<PathBuf>) -> PathBuf {
    cli_dir
        .clone()
        .or_else(|| std::env::var_os("BBMLAB_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("bbmlab-out"))
}

/// Fills flag defaults from a TOML table keyed by the long flag names.
fn config_table(path: &Option<PathBuf>) -> Result<Option<toml::Table>> {
    match path {
        None => Ok(None),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            let table: toml::Table = text
                .parse()
                .map_err(|e| anyhow!("parsing {}: {e}", p.display()))?;
            Ok(Some(table))
        }
    }
}

fn cfg_f64(table: &Option<toml::Table>, key: &str) -> Option<f64> {
    table.as_ref()?.get(key)?.as_float()
}

fn run(cli: Cli) -> Result<i32> {
    let dir = output_dir(&cli.output_dir);
    let pool = runner::build_pool(cli.jobs)?;
    let table = config_table(&cli.config)?;
    match cli.command {
        Command::Phase(args) => cmd_phase(&dir, &table, args),
        Command::Simulate(args) => cmd_simulate(&dir, args),
        Command::Oracle(args) => cmd_oracle(&dir, args),
        Command::Decoration(args) => cmd_decoration(&dir, &pool, args),
        Command::Ensemble(args) => cmd_ensemble(&dir, &pool, &table, args),
        Command::Fkpp(args) => cmd_fkpp(&dir, args),
        Command::Report(args) => cmd_report(&dir, args),
    }
}

fn cmd_phase(dir: &Path, table: &Option<toml::Table>, mut args: PhaseArgs) -> Result<i32> {
    if args.beta.is_none() {
        args.beta = cfg_f64(table, "beta");
    }
    if args.sigma2.is_none() {
        args.sigma2 = cfg_f64(table, "sigma2");
    }

    if let Some(n) = args.sweep_per_region {
        let tag = args.tag.clone().unwrap_or_else(|| criteria::tags::C01_PHASE.into());
        io::write_manifest(dir, &tag, "phase --sweep-per-region", &args, args.seed)?;
        let summary = experiments::build_c01(n, args.grid_step, args.seed)?;
        io::write_summary(dir, &tag, &serde_json::to_value(&summary)?)?;
        println!("{}", serde_json::to_string_pretty(&summary)?);
        return Ok(0);
    }
    if let Some(n) = args.boundary_grid {
        let tag = args.tag.clone().unwrap_or_else(|| criteria::tags::C02_BOUNDARY.into());
        io::write_manifest(dir, &tag, "phase --boundary-grid", &args, args.seed)?;
        let summary = experiments::build_c02(n.max(2));
        io::write_summary(dir, &tag, &serde_json::to_value(&summary)?)?;
        println!("{}", serde_json::to_string_pretty(&summary)?);
        return Ok(0);
    }

    let (beta, sigma2) = match (args.beta, args.sigma2) {
        (Some(b), Some(s)) => (b, s),
        _ => bail!("phase needs --beta and --sigma2 (or a sweep/boundary mode)"),
    };
    let params = ModelParams::new(beta, sigma2, args.alpha).map_err(|e| anyhow!("{e}"))?;
    let region = phase::classify_with_eps(&params, args.eps);
    match phase::front_params_with_eps(&params, args.eps) {
        Ok(front) => {
            let record = serde_json::json!({
                "beta": beta,
                "sigma2": sigma2,
                "region": region.as_str(),
                "v": front.v,
                "theta": front.theta,
                "p_star": front.p_star,
                "a_star": front.a_star,
                "b_star": front.b_star,
                "log_coeff": front.log_coeff,
            });
            println!("{record}");
            Ok(0)
        }
        Err(e) => {
            let record = serde_json::json!({
                "beta": beta,
                "sigma2": sigma2,
                "region": region.as_str(),
                "error": format!("{e}"),
            });
            println!("{record}");
            Ok(2)
        }
    }
}

fn cmd_simulate(dir: &Path, args: SimulateArgs) -> Result<i32> {
    let params = ModelParams::new(args.beta, args.sigma2, args.alpha).map_err(|e| anyhow!("{e}"))?;
    let mut cfg = SimConfig::new(args.t_max, args.seed);
    cfg.checkpoint_times = args.checkpoints.clone();
    cfg.prune_gap = args.prune_gap;
    cfg.prune_speed = args.prune_speed;
    cfg.max_particles = args.max_particles;
    cfg.start_type2 = args.start_type2;
    io::write_manifest(dir, &args.tag, "simulate", &args, args.seed)?;

    let out = engine::simulate(&params, &cfg).map_err(|e| anyhow!("{e}"))?;
    for (k, snap) in out.snapshots.iter().enumerate() {
        if args.format == "jsonl" || args.format == "both" {
            io::write_snapshot_jsonl(&dir.join(format!("{}.snapshot-{k}.jsonl", args.tag)), snap)?;
        }
        if args.format == "bin" || args.format == "both" {
            io::write_snapshot_columnar(&dir.join(format!("{}.snapshot-{k}.bin", args.tag)), snap)?;
        }
    }
    io::write_births_csv(&dir.join(format!("{}.births.csv", args.tag)), &out.birth_record)?;

    let last = out.snapshots.last().expect("at least one snapshot");
    let summary = serde_json::json!({
        "t_max": args.t_max,
        "seed": args.seed,
        "checkpoints": out.snapshots.iter().map(|s| s.time).collect::<Vec<_>>(),
        "final_alive": last.particles.len(),
        "pruned": out.stats.pruned_count,
        "peak_alive": out.stats.peak_alive,
        "events": out.stats.total_events,
        "max_all": engine::max_displacement(last, engine::TypeFilter::All),
        "max_type2": engine::max_displacement(last, engine::TypeFilter::Type2Only),
        "births": out.birth_record.entries.len(),
    });
    io::write_summary(dir, &args.tag, &summary)?;
    println!("{summary}");
    Ok(0)
}

fn cmd_oracle(dir: &Path, args: OracleArgs) -> Result<i32> {
    let (descriptor, value, error) = match &args.query {
        OracleQuery::Type1Above { beta, sigma2, t, x } => {
            let p = ModelParams::new(*beta, *sigma2, 0.0).map_err(|e| anyhow!("{e}"))?;
            (
                format!("type1-above beta={beta} sigma2={sigma2} t={t} x={x}"),
                oracle::expected_type1_above(&p, *t, *x),
                0.0,
            )
        }
        OracleQuery::Type2Count { beta, alpha, t } => {
            let p = ModelParams::new(*beta, 1.0, *alpha).map_err(|e| anyhow!("{e}"))?;
            (
                format!("type2-count beta={beta} alpha={alpha} t={t}"),
                oracle::expected_type2_count(&p, *t),
                0.0,
            )
        }
        OracleQuery::Type2Above {
            beta,
            sigma2,
            alpha,
            t,
            x,
            rule,
            abs_tol,
            rel_tol,
            max_subdivisions,
        } => {
            let p = ModelParams::new(*beta, *sigma2, *alpha).map_err(|e| anyhow!("{e}"))?;
            let spec = QuadratureSpec {
                rule: match rule.as_str() {
                    "adaptive" => QuadRule::AdaptiveGaussKronrod,
                    "simpson" => QuadRule::FixedSimpson,
                    other => bail!("unknown quadrature rule {other}"),
                },
                abs_tol: *abs_tol,
                rel_tol: *rel_tol,
                max_subdivisions: *max_subdivisions,
            };
            let r = oracle::expected_type2_above(&p, *t, *x, &spec).map_err(|e| anyhow!("{e}"))?;
            (
                format!("type2-above beta={beta} sigma2={sigma2} alpha={alpha} t={t} x={x}"),
                r.value,
                r.error_estimate,
            )
        }
        OracleQuery::GaussianTail { x } => {
            let (exact, bound) = oracle::gaussian_tail_bound(*x).map_err(|e| anyhow!("{e}"))?;
            println!("exact {exact:.12e} bound {bound:.12e}");
            (format!("gaussian-tail x={x}"), exact, bound - exact)
        }
        OracleQuery::LdBound { rho, t, y } => (
            format!("ld-bound rho={rho} t={t} y={y}"),
            oracle::ld_first_moment(*rho, *t, *y),
            0.0,
        ),
    };
    println!("{value:.12}");

    std::fs::create_dir_all(dir)?;
    let path = dir.join("oracle.csv");
    let existed = path.exists();
    let file = std::fs::OpenOptions::new().create(true).append(true).open(&path)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    if !existed {
        w.write_record(["query", "value", "error_estimate"])?;
    }
    w.write_record(&[descriptor, format!("{value}"), format!("{error}")])?;
    w.flush()?;
    Ok(0)
}

fn cmd_decoration(dir: &Path, pool: &rayon::ThreadPool, args: DecorationArgs) -> Result<i32> {
    use bbm_core::decoration;
    io::write_manifest(dir, &args.tag, "decoration", &args, args.seed)?;

    let mut estimates = Vec::new();
    let mut csv_w = csv::Writer::from_path(dir.join(format!("{}.c_estimates.csv", args.tag)))?;
    csv_w.write_record(["rho", "c_hat", "se", "horizon", "n"])?;
    for (k, &horizon) in args.horizons.iter().enumerate() {
        let n = *args.n.get(k).or(args.n.last()).unwrap_or(&1000);
        let c = runner::estimate_c(pool, args.rho, n, horizon, args.seed)?;
        csv_w.write_record(&[
            format!("{}", args.rho),
            format!("{}", c.estimate),
            format!("{}", c.std_error),
            format!("{horizon}"),
            format!("{n}"),
        ])?;
        estimates.push(criteria::CEstimateSummary {
            horizon,
            n,
            estimate: c.estimate,
            std_error: c.std_error,
            overflow_resamples: c.overflow_resamples,
        });
    }
    csv_w.flush()?;

    // Per-sample JSONL summaries (bounded count).
    if args.emit_samples > 0 {
        use std::io::Write;
        let mut f = std::io::BufWriter::new(std::fs::File::create(
            dir.join(format!("{}.samples.jsonl", args.tag)),
        )?);
        let horizon = *args.horizons.first().unwrap_or(&10.0);
        for i in 0..args.emit_samples {
            let s = decoration::sample_decoration_tilde(
                args.rho,
                horizon,
                bbm_core::rng::derive(args.seed ^ 0x5a5a, i),
            )
            .map_err(|e| anyhow!("{e}"))?;
            let line = serde_json::json!({
                "horizon": s.horizon,
                "accepted": s.accepted,
                "n_atoms": s.atoms.len(),
                "max_atom": s.atoms.last(),
                "min_atom": s.atoms.first(),
                "n_spine_births": s.spine_births.len(),
            });
            writeln!(f, "{line}")?;
        }
    }

    let conditioned = if args.conditioned > 0 {
        let rho = args.cond_rho.unwrap_or(args.rho);
        let horizon = args.cond_horizon.unwrap_or_else(|| {
            args.horizons.first().copied().unwrap_or(decoration::DEFAULT_HORIZON)
        });
        let mut all_zero = true;
        let mut trials_total = 0u64;
        for i in 0..args.conditioned {
            let (sample, trials) = decoration::sample_decoration_conditioned(
                rho,
                horizon,
                args.seed ^ (0xc0de + i),
                args.max_rejections,
            )
            .map_err(|e| anyhow!("{e}"))?;
            if sample.atoms.last().copied() != Some(0.0) {
                all_zero = false;
            }
            trials_total += trials;
        }
        Some(criteria::ConditionedSummary {
            rho,
            horizon,
            n: args.conditioned,
            all_max_atoms_zero: all_zero,
            mean_trials: trials_total as f64 / args.conditioned as f64,
        })
    } else {
        None
    };

    let summary = criteria::DecorationSummary {
        rho: args.rho,
        estimates,
        conditioned,
    };
    io::write_summary(dir, &args.tag, &serde_json::to_value(&summary)?)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(0)
}

fn cmd_ensemble(
    dir: &Path,
    pool: &rayon::ThreadPool,
    table: &Option<toml::Table>,
    mut args: EnsembleArgs,
) -> Result<i32> {
    if args.beta.is_none() {
        args.beta = cfg_f64(table, "beta");
    }
    if args.sigma2.is_none() {
        args.sigma2 = cfg_f64(table, "sigma2");
    }
    if args.alpha.is_none() {
        args.alpha = cfg_f64(table, "alpha");
    }

    match args.mode.as_str() {
        "front" => {
            let (beta, sigma2, alpha) = required_params(&args)?;
            let tag = args.tag.clone().unwrap_or_else(|| "ensemble_front".into());
            io::write_manifest(dir, &tag, "ensemble --mode front", &args, args.seed)?;
            if args.t.len() < 1 {
                bail!("front mode needs --t");
            }
            let cfg = experiments::FrontConfig {
                beta,
                sigma2,
                alpha,
                horizons: args.t.clone(),
                n: args.n,
                seed: args.seed,
                prune_gap: args.prune_gap.unwrap_or(8.0),
            };
            let summary = experiments::build_front_summary(pool, &cfg)?;
            write_front_csvs(dir, &tag, pool, &cfg)?;
            io::write_summary(dir, &tag, &serde_json::to_value(&summary)?)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(0)
        }
        "counts" => {
            let tag = args.tag.clone().unwrap_or_else(|| criteria::tags::C03_MTO.into());
            io::write_manifest(dir, &tag, "ensemble --mode counts", &args, args.seed)?;
            let summary = experiments::build_c03(pool, args.n, args.seed)?;
            io::write_summary(dir, &tag, &serde_json::to_value(&summary)?)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(0)
        }
        "martingale" => {
            let tag = args.tag.clone().unwrap_or_else(|| criteria::tags::C06_MARTINGALE.into());
            io::write_manifest(dir, &tag, "ensemble --mode martingale", &args, args.seed)?;
            let summary = experiments::build_c06(pool, args.n, args.seed)?;
            io::write_summary(dir, &tag, &serde_json::to_value(&summary)?)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(0)
        }
        "lineage" => {
            let tag = args.tag.clone().unwrap_or_else(|| criteria::tags::C04_LINEAGE.into());
            io::write_manifest(dir, &tag, "ensemble --mode lineage", &args, args.seed)?;
            let summary = experiments::build_c04(pool, args.n, args.seed)?;
            io::write_summary(dir, &tag, &serde_json::to_value(&summary)?)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(0)
        }
        "triangle" => {
            let tag = args.tag.clone().unwrap_or_else(|| criteria::tags::C05_TRIANGLE.into());
            io::write_manifest(dir, &tag, "ensemble --mode triangle", &args, args.seed)?;
            let summary = experiments::build_c05(pool, args.n, args.seed)?;
            io::write_summary(dir, &tag, &serde_json::to_value(&summary)?)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(0)
        }
        "largedev" => {
            let tag = args.tag.clone().unwrap_or_else(|| criteria::tags::C10_LARGEDEV.into());
            io::write_manifest(dir, &tag, "ensemble --mode largedev", &args, args.seed)?;
            let summary = experiments::build_c10_largedev(pool, args.n, args.seed)?;
            io::write_summary(dir, &tag, &serde_json::to_value(&summary)?)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(0)
        }
        other => bail!("unknown ensemble mode {other}"),
    }
}

fn required_params(args: &EnsembleArgs) -> Result<(f64, f64, f64)> {
    match (args.beta, args.sigma2, args.alpha) {
        (Some(b), Some(s), Some(a)) => Ok((b, s, a)),
        (Some(b), Some(s), None) => Ok((b, s, 1.0)),
        _ => bail!("this mode needs --beta and --sigma2"),
    }
}

/// Per-replicate CSVs for a front ensemble (one file per horizon).
fn write_front_csvs(
    dir: &Path,
    tag: &str,
    pool: &rayon::ThreadPool,
    cfg: &experiments::FrontConfig,
) -> Result<()> {
    let p = ModelParams::new(cfg.beta, cfg.sigma2, cfg.alpha).map_err(|e| anyhow!("{e}"))?;
    let theta = phase::front_params(&p).map(|f| f.theta).unwrap_or(0.0);
    let opts = EnsembleOptions {
        prune_gap: Some(cfg.prune_gap),
        theta: Some(theta),
        ..Default::default()
    };
    for (k, &t) in cfg.horizons.iter().enumerate() {
        let res = runner::ensemble(pool, &p, t, cfg.n, cfg.seed + (k as u64) * 1_000_000, &opts)?;
        let mut w = csv::Writer::from_path(dir.join(format!("{tag}.t{t}.csv")))?;
        w.write_record([
            "replicate",
            "max_all",
            "max_type1",
            "max_type2",
            "w_theta",
            "w2_theta",
            "argmax_mutation_time",
            "argmax_mutation_position",
            "alive",
            "pruned",
        ])?;
        let fmt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        for (i, r) in res.records.iter().enumerate() {
            w.write_record(&[
                format!("{i}"),
                fmt(r.max_all),
                fmt(r.max_type1),
                fmt(r.max_type2),
                fmt(r.w_theta),
                fmt(r.w2_theta),
                fmt(r.argmax_mutation_time),
                fmt(r.argmax_mutation_position),
                format!("{}", r.alive),
                format!("{}", r.pruned),
            ])?;
        }
        w.flush()?;
    }
    Ok(())
}

fn cmd_fkpp(dir: &Path, args: FkppArgs) -> Result<i32> {
    use bbm_core::fkpp::{front_speed, FrontSpeedConfig};
    let params = ModelParams::new(args.beta, args.sigma2, args.alpha).map_err(|e| anyhow!("{e}"))?;
    io::write_manifest(dir, &args.tag, "fkpp", &args, 0)?;

    let target = if args.alpha == 0.0 {
        params.type1_speed()
    } else {
        phase::front_params(&params).map(|f| f.v).map_err(|e| anyhow!("{e}"))?
    };

    let run = |dx: f64| -> Result<bbm_core::fkpp::FrontSpeedResult> {
        let cfg = FrontSpeedConfig {
            dx,
            t_end: args.t_end,
            level: args.level,
            ..Default::default()
        };
        front_speed(&params, &cfg).map_err(|e| anyhow!("{e}"))
    };

    let main_run = run(args.dx)?;
    let mut w = csv::Writer::from_path(dir.join(format!("{}.fronts.csv", args.tag)))?;
    w.write_record(["t", "x_front_u", "x_front_v"])?;
    for &(t, xu, xv) in &main_run.history {
        w.write_record(&[format!("{t}"), format!("{xu}"), format!("{xv}")])?;
    }
    w.flush()?;

    let mut refinement = Vec::new();
    for &dx in &args.dx_ladder {
        refinement.push((dx, run(dx)?.speed_u));
    }

    let summary = criteria::FkppSummary {
        cases: vec![criteria::FkppCaseSummary {
            beta: args.beta,
            sigma2: args.sigma2,
            alpha: args.alpha,
            dx: args.dx,
            t_end: args.t_end,
            speed_u: main_run.speed_u,
            speed_v: main_run.speed_v,
            target,
        }],
        refinement,
    };
    io::write_summary(dir, &args.tag, &serde_json::to_value(&summary)?)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(0)
}

fn cmd_report(dir: &Path, args: ReportArgs) -> Result<i32> {
    let report_dir = args.dir.clone().unwrap_or_else(|| dir.to_path_buf());
    let outcomes = criteria::evaluate_directory(&report_dir);
    for o in &outcomes {
        println!("criterion {:02} {:7} {} — {}", o.id, o.status.to_string(), o.name, o.details);
    }
    let report = serde_json::json!({
        "artifact_version": env!("CARGO_PKG_VERSION"),
        "directory": report_dir.display().to_string(),
        "criteria": outcomes,
    });
    std::fs::create_dir_all(&report_dir)?;
    std::fs::write(
        report_dir.join("report.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    let failed = outcomes.iter().any(|o| {
        o.required
            && (o.status == criteria::Status::Fail
                || (args.strict && o.status == criteria::Status::Missing))
    });
    Ok(if failed { 1 } else { 0 })
}
