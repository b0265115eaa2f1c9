//! Finite-difference solver for the coupled reaction-diffusion system
//!
//! ```text
//! du/dt = (sigma2/2) u_xx - beta u (1 - u) - alpha u (1 - v)
//! dv/dt = (1/2)    v_xx -        v (1 - v)
//! ```
//!
//! with step-like initial data (1 far to the left, 0 far to the right).
//! `u` is the type-1-rooted field and carries the two-type front, whose
//! displacement rate reproduces the invasion speed of the particle system;
//! `v` is the autonomous type-2 field whose front always travels at
//! `sqrt(2)`. With this initial data the level sets move towards negative
//! `x`, so front *speeds* are reported as positive displacement rates.
//!
//! Explicit Euler with centered second differences and Neumann walls; the
//! time step obeys `dt <= 0.9 dx^2 / (2 max(sigma2/2, 1/2))`. Fields are
//! asserted to stay in `[0, 1]` (discrete maximum principle).

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec::Vec;
use core::fmt;

use crate::phase::ModelParams;

#[derive(Debug, Clone, PartialEq)]
pub struct PdeGrid {
    pub dx: f64,
    pub dt: f64,
    /// Coordinate of cell 0.
    pub x_lo: f64,
    pub time: f64,
    /// Type-1-rooted field.
    pub u: Vec<f64>,
    /// Type-2-rooted field.
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PdeError {
    InvalidConfig(&'static str),
    /// NaN or out-of-range value; carries time and cell index.
    Numerics { time: f64, cell: usize },
    /// A tracked front ran into the domain edge.
    FrontAtEdge { time: f64, field: &'static str },
    /// A level crossing could not be located (field all-above or
    /// all-below the level).
    NoCrossing { time: f64, field: &'static str },
}

impl fmt::Display for PdeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PdeError::InvalidConfig(msg) => write!(f, "invalid PDE config: {msg}"),
            PdeError::Numerics { time, cell } => {
                write!(f, "non-finite or out-of-range value at t={time:.4}, cell {cell}")
            }
            PdeError::FrontAtEdge { time, field } => {
                write!(f, "{field}-front reached the window edge at t={time:.4}")
            }
            PdeError::NoCrossing { time, field } => {
                write!(f, "no level crossing in field {field} at t={time:.4}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PdeError {}

/// Largest stable explicit-Euler step for the given resolution.
pub fn stable_dt(params: &ModelParams, dx: f64) -> f64 {
    0.9 * dx * dx / (2.0 * (params.sigma2 / 2.0).max(0.5))
}

impl PdeGrid {
    /// Step-like initial data: both fields 1 for `x <= -interface_halfwidth`,
    /// 0 for `x >= +interface_halfwidth`, linear in between. The window is
    /// `[x_lo, x_lo + width]`.
    pub fn with_front_data(
        params: &ModelParams,
        dx: f64,
        x_lo: f64,
        width: f64,
        interface_halfwidth: f64,
    ) -> Result<Self, PdeError> {
        if !(dx > 0.0) || !(width > 4.0 * dx) {
            return Err(PdeError::InvalidConfig("need dx > 0 and width > 4 dx"));
        }
        let n = (width / dx).round() as usize + 1;
        let a = interface_halfwidth;
        let profile = |x: f64| {
            if x <= -a {
                1.0
            } else if x >= a {
                0.0
            } else {
                (a - x) / (2.0 * a)
            }
        };
        let u: Vec<f64> = (0..n).map(|i| profile(x_lo + i as f64 * dx)).collect();
        Ok(Self {
            dx,
            dt: stable_dt(params, dx),
            x_lo,
            time: 0.0,
            v: u.clone(),
            u,
        })
    }

    pub fn x_hi(&self) -> f64 {
        self.x_lo + (self.u.len() - 1) as f64 * self.dx
    }

    /// One explicit Euler step (centered Laplacian, Neumann walls).
    pub fn step(&mut self, params: &ModelParams) -> Result<(), PdeError> {
        let n = self.u.len();
        let inv_dx2 = 1.0 / (self.dx * self.dx);
        let du_diff = 0.5 * params.sigma2 * inv_dx2 * self.dt;
        let dv_diff = 0.5 * inv_dx2 * self.dt;
        let (beta, alpha) = (params.beta, params.alpha);

        let mut next_u = Vec::with_capacity(n);
        let mut next_v = Vec::with_capacity(n);
        for i in 0..n {
            let (um, up) = neighbors(&self.u, i);
            let (vm, vp) = neighbors(&self.v, i);
            let u = self.u[i];
            let v = self.v[i];
            let lap_u = um - 2.0 * u + up;
            let lap_v = vm - 2.0 * v + vp;
            let ru = -beta * u * (1.0 - u) - alpha * u * (1.0 - v);
            let rv = -v * (1.0 - v);
            next_u.push(u + du_diff * lap_u + self.dt * ru);
            next_v.push(v + dv_diff * lap_v + self.dt * rv);
        }
        self.time += self.dt;
        for i in 0..n {
            for value in [&mut next_u[i], &mut next_v[i]] {
                if !value.is_finite() || *value < -1e-9 || *value > 1.0 + 1e-9 {
                    return Err(PdeError::Numerics { time: self.time, cell: i });
                }
                // Round-off guard; the scheme preserves [0,1] analytically.
                *value = value.clamp(0.0, 1.0);
            }
        }
        self.u = next_u;
        self.v = next_v;
        Ok(())
    }

    /// Position where the field crosses `level` (fields decrease in x with
    /// the front initial data; linear interpolation between cells).
    pub fn level_crossing(&self, field: Field, level: f64) -> Option<f64> {
        let data = match field {
            Field::U => &self.u,
            Field::V => &self.v,
        };
        for i in 0..data.len() - 1 {
            if data[i] >= level && data[i + 1] < level {
                let frac = (data[i] - level) / (data[i] - data[i + 1]);
                return Some(self.x_lo + (i as f64 + frac) * self.dx);
            }
        }
        None
    }

    /// Shifts the window left by `cells`, filling entering cells with the
    /// bulk value 1 and dropping the trailing (already invaded) side.
    fn shift_left(&mut self, cells: usize) {
        if cells == 0 {
            return;
        }
        let n = self.u.len();
        let cells = cells.min(n);
        for data in [&mut self.u, &mut self.v] {
            data.truncate(n - cells);
            data.splice(0..0, core::iter::repeat(1.0).take(cells));
        }
        self.x_lo -= cells as f64 * self.dx;
    }

    /// Discrete monotonicity check (fronts must not develop wiggles).
    pub fn is_monotone_decreasing(&self, field: Field) -> bool {
        let data = match field {
            Field::U => &self.u,
            Field::V => &self.v,
        };
        data.windows(2).all(|w| w[0] >= w[1] - 1e-9)
    }
}

fn neighbors(data: &[f64], i: usize) -> (f64, f64) {
    let n = data.len();
    let minus = if i == 0 { data[0] } else { data[i - 1] };
    let plus = if i + 1 == n { data[n - 1] } else { data[i + 1] };
    (minus, plus)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    U,
    V,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontSpeedConfig {
    pub dx: f64,
    pub t_end: f64,
    pub level: f64,
    /// Window width; the window recenters on the leading (u) front.
    pub window_width: f64,
    pub recenter_every: f64,
    /// Half-width of the initial interface ramp.
    pub interface_halfwidth: f64,
    /// Spacing of front-position samples.
    pub sample_every: f64,
}

impl Default for FrontSpeedConfig {
    fn default() -> Self {
        Self {
            dx: 0.05,
            t_end: 60.0,
            level: 0.5,
            window_width: 400.0,
            recenter_every: 50.0,
            interface_halfwidth: 10.0,
            sample_every: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontSpeedResult {
    /// Invasion speed of the coupled (type-1-rooted) front.
    pub speed_u: f64,
    /// Invasion speed of the autonomous type-2 front.
    pub speed_v: f64,
    /// Sampled `(t, x_u(t), x_v(t))` level-crossing positions.
    pub history: Vec<(f64, f64, f64)>,
}

/// Evolves front data and fits the displacement rate of both level sets
/// over the last half of the run. Speeds are positive (fronts displace
/// towards negative x with this initial data).
pub fn front_speed(params: &ModelParams, cfg: &FrontSpeedConfig) -> Result<FrontSpeedResult, PdeError> {
    if !(cfg.t_end > 0.0) || !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(PdeError::InvalidConfig("need t_end > 0 and level in (0,1)"));
    }
    // Fronts travel left at speeds <= ~2.5; leave the interface room on
    // both sides of the window.
    let mut grid = PdeGrid::with_front_data(
        params,
        cfg.dx,
        -0.7 * cfg.window_width,
        cfg.window_width,
        cfg.interface_halfwidth,
    )?;
    let mut history: Vec<(f64, f64, f64)> = Vec::new();
    let mut next_sample = 0.0;
    let mut next_recenter = cfg.recenter_every;
    let margin = 20.0 * cfg.dx;

    while grid.time < cfg.t_end {
        grid.step(params)?;
        if grid.time >= next_sample {
            next_sample += cfg.sample_every;
            let xu = grid
                .level_crossing(Field::U, cfg.level)
                .ok_or(PdeError::NoCrossing { time: grid.time, field: "u" })?;
            let xv = grid
                .level_crossing(Field::V, cfg.level)
                .ok_or(PdeError::NoCrossing { time: grid.time, field: "v" })?;
            if xu - grid.x_lo < margin || grid.x_hi() - xu < margin {
                return Err(PdeError::FrontAtEdge { time: grid.time, field: "u" });
            }
            if xv - grid.x_lo < margin || grid.x_hi() - xv < margin {
                return Err(PdeError::FrontAtEdge { time: grid.time, field: "v" });
            }
            history.push((grid.time, xu, xv));
        }
        if grid.time >= next_recenter {
            next_recenter += cfg.recenter_every;
            if let Some(xu) = grid.level_crossing(Field::U, cfg.level) {
                let center = grid.x_lo + 0.5 * cfg.window_width;
                let cells = ((center - xu) / cfg.dx).floor();
                if cells > 0.0 {
                    grid.shift_left(cells as usize);
                }
            }
        }
    }

    // Fit x(t) over the last half of the run; report invasion speed.
    let start = history.len() / 2;
    let tail = &history[start..];
    let speed_u = -fit_slope(tail.iter().map(|&(t, xu, _)| (t, xu)));
    let speed_v = -fit_slope(tail.iter().map(|&(t, _, xv)| (t, xv)));
    Ok(FrontSpeedResult {
        speed_u,
        speed_v,
        history,
    })
}

fn fit_slope<I: Iterator<Item = (f64, f64)>>(points: I) -> f64 {
    let mut n = 0.0;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (x, y) in points {
        n += 1.0;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
