//! Exact event-driven simulation of the two-type reducible branching
//! Brownian motion.
//!
//! Dynamics: a type-1 particle carries independent exponential clocks of
//! rate `beta` (it is replaced by two type-1 children) and rate `alpha`
//! (it emits one type-2 child at its current position and keeps going,
//! which realizes the Poisson description of type-2 births along type-1
//! trajectories); a type-2 particle is replaced by two type-2 children at
//! rate 1. Between clock rings positions are advanced lazily by exact
//! Gaussian increments, only when a particle is touched by its own event
//! or by a checkpoint.
//!
//! Randomness comes from per-particle counter-based streams
//! ([`crate::rng`]), so a run is bit-reproducible for a fixed
//! configuration regardless of how events interleave.
//!
//! An optional front window discards particles more than `prune_gap`
//! below the moving line `v_proxy * s`. Pruning keeps supercritical
//! horizons tractable but biases exponential sums; the martingale
//! accessors refuse pruned snapshots.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::phase::{self, ModelParams, PhaseError};
use crate::rng;

const NO_PARENT: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParticleType {
    Type1,
    Type2,
}

/// A particle as seen in a snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub id: u64,
    pub parent_id: Option<u64>,
    pub ptype: ParticleType,
    pub position: f64,
    /// Birth time of the oldest type-2 ancestor (none for type 1).
    pub mutation_time: Option<f64>,
    /// Position of that founding birth.
    pub mutation_position: Option<f64>,
}

/// The population at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub particles: Vec<Particle>,
    /// Particles discarded by the front window up to this time.
    pub pruned_count: u64,
    pub rng_seed: u64,
}

/// One entry per type-2 particle born from a type-1 parent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BirthEntry {
    pub time: f64,
    pub position: f64,
    pub parent_id: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BirthRecord {
    pub entries: Vec<BirthEntry>,
}

/// Path-crossing monitor: flags whether any particle was ever observed at
/// or above `slope * s + offset` for each offset.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingMonitor {
    pub slope: f64,
    pub offsets: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub t_max: f64,
    /// Snapshot times, sorted, within `[0, t_max]`; empty means `[t_max]`.
    pub checkpoint_times: Vec<f64>,
    /// Discard particles more than this far below the front proxy line.
    pub prune_gap: Option<f64>,
    /// Slope of the front proxy line; defaults to the region speed (or
    /// `sqrt(2)` for runs started from a type-2 particle).
    pub prune_speed: Option<f64>,
    /// Hard cap on concurrently alive particles.
    pub max_particles: usize,
    pub rng_seed: u64,
    /// Start from a single type-2 particle instead (standard BBM law).
    pub start_type2: bool,
    /// Record the set of type-2 births from type-1 parents.
    pub record_births: bool,
    /// Record type-2 birth times along one surviving type-1 lineage
    /// (first child followed through branchings).
    pub track_lineage: bool,
    pub crossing: Option<CrossingMonitor>,
}

impl SimConfig {
    pub fn new(t_max: f64, rng_seed: u64) -> Self {
        Self {
            t_max,
            checkpoint_times: Vec::new(),
            prune_gap: None,
            prune_speed: None,
            max_particles: 50_000_000,
            rng_seed,
            start_type2: false,
            record_births: true,
            track_lineage: false,
            crossing: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimStats {
    pub pruned_count: u64,
    pub peak_alive: usize,
    pub final_alive: usize,
    pub total_events: u64,
    /// One flag per monitored offset.
    pub crossed: Vec<bool>,
    /// Type-2 birth times along the tracked lineage.
    pub lineage_birth_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub snapshots: Vec<Snapshot>,
    pub birth_record: BirthRecord,
    pub stats: SimStats,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    InvalidConfig(&'static str),
    /// The population hit `max_particles`; the horizon is too ambitious
    /// for the configured budget.
    TooManyParticles { alive: usize, time: f64 },
    Phase(PhaseError),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::InvalidConfig(msg) => write!(f, "invalid simulation config: {msg}"),
            SimError::TooManyParticles { alive, time } => write!(
                f,
                "population cap exceeded: {alive} particles alive at t = {time:.4}; \
                 lower the horizon, enable pruning or raise max_particles"
            ),
            SimError::Phase(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SimError {}

impl From<PhaseError> for SimError {
    fn from(e: PhaseError) -> Self {
        SimError::Phase(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventKind {
    Branch,
    EmitType2,
}

struct Slot {
    id: u64,
    parent_id: u64,
    position: f64,
    updated_at: f64,
    mutation_time: f64, // NaN when type 1
    mutation_position: f64,
    sessions: u64,
    generation: u32,
    ptype: ParticleType,
    pending: EventKind,
    alive: bool,
    on_lineage: bool,
}

struct EventKey {
    time: f64,
    slot: u32,
    generation: u32,
}

impl PartialEq for EventKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for EventKey {}
impl PartialOrd for EventKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for EventKey {
    // Reversed so the std max-heap pops the earliest event; ties broken
    // by slot index for determinism.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.slot.cmp(&self.slot))
    }
}

struct Sim<'a> {
    params: &'a ModelParams,
    config: &'a SimConfig,
    key: [u8; 32],
    slots: Vec<Slot>,
    free: Vec<u32>,
    heap: BinaryHeap<EventKey>,
    alive: usize,
    next_id: u64,
    prune_line: Option<(f64, f64)>, // (speed, gap)
    births: Vec<BirthEntry>,
    stats: SimStats,
}

/// Runs the process from a single particle at the origin and returns one
/// snapshot per checkpoint plus the birth record.
pub fn simulate(params: &ModelParams, config: &SimConfig) -> Result<SimOutput, SimError> {
    let checkpoints = validate(params, config)?;

    let prune_line = match config.prune_gap {
        None => None,
        Some(gap) => {
            let speed = match config.prune_speed {
                Some(v) => v,
                None if config.start_type2 => core::f64::consts::SQRT_2,
                None => phase::front_params(params)?.v,
            };
            Some((speed, gap))
        }
    };

    let mut sim = Sim {
        params,
        config,
        key: rng::expand_seed(config.rng_seed),
        slots: Vec::with_capacity(1024),
        free: Vec::new(),
        heap: BinaryHeap::with_capacity(1024),
        alive: 0,
        next_id: 0,
        prune_line,
        births: Vec::new(),
        stats: SimStats::default(),
    };
    if let Some(monitor) = &config.crossing {
        sim.stats.crossed = alloc::vec![false; monitor.offsets.len()];
    }

    let start_type = if config.start_type2 {
        ParticleType::Type2
    } else {
        ParticleType::Type1
    };
    sim.spawn(start_type, 0.0, 0.0, NO_PARENT, f64::NAN, f64::NAN, config.track_lineage)?;

    let mut snapshots = Vec::with_capacity(checkpoints.len());
    for &cp in &checkpoints {
        sim.run_events_until(cp)?;
        snapshots.push(sim.checkpoint(cp));
    }

    sim.stats.pruned_count = snapshots.last().map_or(0, |s| s.pruned_count);
    sim.stats.final_alive = sim.alive;
    Ok(SimOutput {
        snapshots,
        birth_record: BirthRecord { entries: sim.births },
        stats: sim.stats,
    })
}

fn validate(params: &ModelParams, config: &SimConfig) -> Result<Vec<f64>, SimError> {
    if !(config.t_max >= 0.0) || !config.t_max.is_finite() {
        return Err(SimError::InvalidConfig("t_max must be finite and non-negative"));
    }
    if config.max_particles == 0 {
        return Err(SimError::InvalidConfig("max_particles must be positive"));
    }
    if let Some(gap) = config.prune_gap {
        if !(gap > 0.0) {
            return Err(SimError::InvalidConfig("prune_gap must be positive"));
        }
    }
    let _ = params;
    let mut cps = config.checkpoint_times.clone();
    if cps.is_empty() {
        cps.push(config.t_max);
    }
    let sorted = cps.windows(2).all(|w| w[0] <= w[1]);
    if !sorted {
        return Err(SimError::InvalidConfig("checkpoint_times must be sorted"));
    }
    if cps.iter().any(|&t| t < 0.0 || t > config.t_max) {
        return Err(SimError::InvalidConfig("checkpoints must lie in [0, t_max]"));
    }
    Ok(cps)
}

impl Sim<'_> {
    fn below_window(&self, position: f64, time: f64) -> bool {
        match self.prune_line {
            Some((speed, gap)) => position < speed * time - gap,
            None => false,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn spawn(
        &mut self,
        ptype: ParticleType,
        position: f64,
        time: f64,
        parent_id: u64,
        mutation_time: f64,
        mutation_position: f64,
        on_lineage: bool,
    ) -> Result<(), SimError> {
        if self.below_window(position, time) {
            self.stats.pruned_count += 1;
            return Ok(());
        }
        if self.alive + 1 > self.config.max_particles {
            return Err(SimError::TooManyParticles {
                alive: self.alive + 1,
                time,
            });
        }
        let id = self.next_id;
        self.next_id += 1;

        let idx = match self.free.pop() {
            Some(idx) => idx,
            None => {
                self.slots.push(Slot {
                    id: 0,
                    parent_id: 0,
                    position: 0.0,
                    updated_at: 0.0,
                    mutation_time: f64::NAN,
                    mutation_position: f64::NAN,
                    sessions: 0,
                    generation: 0,
                    ptype: ParticleType::Type1,
                    pending: EventKind::Branch,
                    alive: false,
                    on_lineage: false,
                });
                (self.slots.len() - 1) as u32
            }
        };
        let slot = &mut self.slots[idx as usize];
        slot.id = id;
        slot.parent_id = parent_id;
        slot.position = position;
        slot.updated_at = time;
        slot.mutation_time = mutation_time;
        slot.mutation_position = mutation_position;
        slot.sessions = 0;
        slot.ptype = ptype;
        slot.alive = true;
        slot.on_lineage = on_lineage;
        self.alive += 1;
        self.stats.peak_alive = self.stats.peak_alive.max(self.alive);
        self.schedule(idx, time);
        Ok(())
    }

    /// Draws the next clock ring (and which clock) for the particle.
    fn schedule(&mut self, idx: u32, now: f64) {
        let slot = &mut self.slots[idx as usize];
        let mut draws = rng::session(&self.key, slot.id, slot.sessions);
        slot.sessions += 1;
        let rate = match slot.ptype {
            ParticleType::Type1 => self.params.beta + self.params.alpha,
            ParticleType::Type2 => 1.0,
        };
        let wait = draws.exponential(rate);
        slot.pending = match slot.ptype {
            ParticleType::Type2 => EventKind::Branch,
            ParticleType::Type1 => {
                if draws.uniform_co() * rate < self.params.beta {
                    EventKind::Branch
                } else {
                    EventKind::EmitType2
                }
            }
        };
        self.heap.push(EventKey {
            time: now + wait,
            slot: idx,
            generation: slot.generation,
        });
    }

    /// Advances a particle to `time` with one exact Gaussian increment.
    fn advance(&mut self, idx: u32, time: f64) {
        let slot = &mut self.slots[idx as usize];
        let dt = time - slot.updated_at;
        if dt > 0.0 {
            let var = match slot.ptype {
                ParticleType::Type1 => self.params.sigma2,
                ParticleType::Type2 => 1.0,
            } * dt;
            let mut draws = rng::session(&self.key, slot.id, slot.sessions);
            slot.sessions += 1;
            slot.position += var.sqrt() * draws.std_normal();
            slot.updated_at = time;
        }
        if let Some(monitor) = &self.config.crossing {
            let base = monitor.slope * time;
            let pos = self.slots[idx as usize].position;
            for (flag, &off) in self.stats.crossed.iter_mut().zip(&monitor.offsets) {
                if pos >= base + off {
                    *flag = true;
                }
            }
        }
    }

    fn kill(&mut self, idx: u32) {
        let slot = &mut self.slots[idx as usize];
        debug_assert!(slot.alive);
        slot.alive = false;
        slot.generation = slot.generation.wrapping_add(1);
        self.alive -= 1;
        self.free.push(idx);
    }

    fn run_events_until(&mut self, horizon: f64) -> Result<(), SimError> {
        while let Some(top) = self.heap.peek() {
            if top.time > horizon {
                break;
            }
            let key = self.heap.pop().expect("peeked");
            let slot = &self.slots[key.slot as usize];
            if !slot.alive || slot.generation != key.generation {
                continue; // stale entry of a dead or recycled slot
            }
            self.stats.total_events += 1;
            self.advance(key.slot, key.time);

            let slot = &self.slots[key.slot as usize];
            if self.below_window(slot.position, key.time) {
                self.stats.pruned_count += 1;
                self.kill(key.slot);
                continue;
            }

            let (id, ptype, pos, pending, lineage, mut_t, mut_pos) = {
                let s = &self.slots[key.slot as usize];
                (
                    s.id,
                    s.ptype,
                    s.position,
                    s.pending,
                    s.on_lineage,
                    s.mutation_time,
                    s.mutation_position,
                )
            };
            let now = key.time;
            match (ptype, pending) {
                (ParticleType::Type1, EventKind::Branch) => {
                    self.kill(key.slot);
                    self.spawn(ParticleType::Type1, pos, now, id, f64::NAN, f64::NAN, lineage)?;
                    self.spawn(ParticleType::Type1, pos, now, id, f64::NAN, f64::NAN, false)?;
                }
                (ParticleType::Type1, EventKind::EmitType2) => {
                    if self.config.record_births {
                        self.births.push(BirthEntry {
                            time: now,
                            position: pos,
                            parent_id: id,
                        });
                    }
                    if lineage {
                        self.stats.lineage_birth_times.push(now);
                    }
                    self.spawn(ParticleType::Type2, pos, now, id, now, pos, false)?;
                    // The emitting clock is memoryless: resample the parent.
                    self.schedule(key.slot, now);
                }
                (ParticleType::Type2, _) => {
                    self.kill(key.slot);
                    self.spawn(ParticleType::Type2, pos, now, id, mut_t, mut_pos, false)?;
                    self.spawn(ParticleType::Type2, pos, now, id, mut_t, mut_pos, false)?;
                }
            }
        }
        Ok(())
    }

    /// Advances the whole population to `time` and materializes it.
    fn checkpoint(&mut self, time: f64) -> Snapshot {
        let mut particles = Vec::with_capacity(self.alive);
        for idx in 0..self.slots.len() as u32 {
            if !self.slots[idx as usize].alive {
                continue;
            }
            self.advance(idx, time);
            let slot = &self.slots[idx as usize];
            if self.below_window(slot.position, time) {
                self.stats.pruned_count += 1;
                self.kill(idx);
                continue;
            }
            let slot = &self.slots[idx as usize];
            particles.push(Particle {
                id: slot.id,
                parent_id: if slot.parent_id == NO_PARENT {
                    None
                } else {
                    Some(slot.parent_id)
                },
                ptype: slot.ptype,
                position: slot.position,
                mutation_time: if slot.mutation_time.is_nan() {
                    None
                } else {
                    Some(slot.mutation_time)
                },
                mutation_position: if slot.mutation_position.is_nan() {
                    None
                } else {
                    Some(slot.mutation_position)
                },
            });
        }
        particles.sort_unstable_by_key(|p| p.id);
        Snapshot {
            time,
            particles,
            pruned_count: self.stats.pruned_count,
            rng_seed: self.config.rng_seed,
        }
    }
}

/// Type filter for snapshot queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeFilter {
    All,
    Type1Only,
    Type2Only,
}

impl TypeFilter {
    fn matches(self, ptype: ParticleType) -> bool {
        match self {
            TypeFilter::All => true,
            TypeFilter::Type1Only => ptype == ParticleType::Type1,
            TypeFilter::Type2Only => ptype == ParticleType::Type2,
        }
    }
}

/// Maximal position over matching particles; `None` when empty.
pub fn max_displacement(snapshot: &Snapshot, filter: TypeFilter) -> Option<f64> {
    snapshot
        .particles
        .iter()
        .filter(|p| filter.matches(p.ptype))
        .map(|p| p.position)
        .fold(None, |acc, x| Some(acc.map_or(x, |m: f64| m.max(x))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrunedSnapshot;

impl fmt::Display for PrunedSnapshot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("martingale sums require an unpruned snapshot (pruning biases them)")
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PrunedSnapshot {}

fn require_unpruned(snapshot: &Snapshot) -> Result<(), PrunedSnapshot> {
    if snapshot.pruned_count > 0 {
        Err(PrunedSnapshot)
    } else {
        Ok(())
    }
}

/// Additive martingale of the type-1 sub-population:
/// `sum e^(theta X - t (beta + theta^2 sigma2 / 2))`.
pub fn additive_martingale(
    snapshot: &Snapshot,
    params: &ModelParams,
    theta: f64,
) -> Result<f64, PrunedSnapshot> {
    require_unpruned(snapshot)?;
    let norm = snapshot.time * (params.beta + theta * theta * params.sigma2 / 2.0);
    Ok(snapshot
        .particles
        .iter()
        .filter(|p| p.ptype == ParticleType::Type1)
        .map(|p| (theta * p.position - norm).exp())
        .sum())
}

/// Type-2 version of the additive martingale (unit rates):
/// `sum e^(theta X - t (1 + theta^2 / 2))`.
pub fn additive_martingale_type2(snapshot: &Snapshot, theta: f64) -> Result<f64, PrunedSnapshot> {
    require_unpruned(snapshot)?;
    let norm = snapshot.time * (1.0 + theta * theta / 2.0);
    Ok(snapshot
        .particles
        .iter()
        .filter(|p| p.ptype == ParticleType::Type2)
        .map(|p| (theta * p.position - norm).exp())
        .sum())
}

/// Derivative martingale `sum (sqrt(2) t - X) e^(sqrt(2) X - 2 t)` over the
/// whole population; meaningful for standard-BBM runs (start as type 2).
pub fn derivative_martingale(snapshot: &Snapshot) -> Result<f64, PrunedSnapshot> {
    require_unpruned(snapshot)?;
    let sqrt2 = core::f64::consts::SQRT_2;
    let t = snapshot.time;
    Ok(snapshot
        .particles
        .iter()
        .map(|p| (sqrt2 * t - p.position) * (sqrt2 * p.position - 2.0 * t).exp())
        .sum())
}

/// Number of particles within `h` of the moving level `theta * t`.
pub fn count_near_speed(snapshot: &Snapshot, theta: f64, h: f64) -> usize {
    snapshot
        .particles
        .iter()
        .filter(|p| (p.position - theta * snapshot.time).abs() <= h)
        .count()
}
