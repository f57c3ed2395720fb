//! Iterative radius expansion.
//!
//! Every point starts with a zero radius. Sweep `n = 1, 2, ...` first stops
//! every active point whose ball touches a ball of another class, then grows
//! each surviving point by `exp(-rho * n)`, where `rho` is the density of the
//! point's own class at the point. A point stops for good once its step falls
//! to `min_step` or below.
//!
//! Both phases of a sweep read the radii as they were at the end of the
//! previous sweep, so the outcome does not depend on row order or on how the
//! work is scheduled across threads. In [`Mode::Strict`] each step is further
//! clamped to half the smallest remaining cross-class gap, which keeps balls of
//! different classes disjoint at all times. [`Mode::Paper`] checks contacts
//! only before growing and may end with an overlap of at most one step per
//! point.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{euclidean, Dataset};
use crate::density::{default_shape, DensityModel};
use crate::error::{Error, Result};

pub const DEFAULT_MIN_STEP: f64 = 1e-20;
pub const DEFAULT_MAX_SWEEPS: usize = 10_000;

/// Below this many points, sweeps run on the calling thread.
const PARALLEL_THRESHOLD: usize = 32;

/// Kernel shape: a fixed value or the median-distance heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    #[default]
    Auto,
    Fixed(f64),
}

impl Shape {
    pub fn resolve(self, ds: &Dataset) -> Result<f64> {
        match self {
            Shape::Fixed(v) if v > 0.0 && v.is_finite() => Ok(v),
            Shape::Fixed(v) => Err(Error::InvalidParameter(format!(
                "shape must be positive and finite, got {v}"
            ))),
            // a lone point has only its self-term; any shape gives rho = 1
            Shape::Auto if ds.len() < 2 => Ok(1.0),
            Shape::Auto => default_shape(ds),
        }
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Shape::Auto);
        }
        s.parse::<f64>()
            .ok()
            .filter(|v| *v > 0.0 && v.is_finite())
            .map(Shape::Fixed)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "shape must be `auto` or a positive number, got {s:?}"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Contact checked only before growth; one-step overlaps are possible.
    #[default]
    Paper,
    /// Steps clamped to half the remaining cross-class gap.
    Strict,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Ok(Mode::Paper),
            "strict" => Ok(Mode::Strict),
            _ => Err(Error::InvalidParameter(format!(
                "mode must be `paper` or `strict`, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Paper => "paper",
            Mode::Strict => "strict",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub min_step: f64,
    pub shape: Shape,
    pub mode: Mode,
    pub max_sweeps: usize,
    /// Z-score every feature before expanding; radii are then in standard units.
    pub normalize: bool,
    /// Update radii in place, point by point in row order, instead of the
    /// two-phase sweep. Results then depend on row order.
    pub sequential: bool,
    /// Permit datasets with a single class.
    pub single_class: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            min_step: DEFAULT_MIN_STEP,
            shape: Shape::Auto,
            mode: Mode::Paper,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            normalize: false,
            sequential: false,
            single_class: false,
        }
    }
}

impl RunConfig {
    pub fn strict() -> Self {
        RunConfig {
            mode: Mode::Strict,
            ..RunConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_step > 0.0 && self.min_step.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "min_step must be positive, got {}",
                self.min_step
            )));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidParameter(
                "max_sweeps must be at least 1".into(),
            ));
        }
        if let Shape::Fixed(v) = self.shape {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "shape must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Collision,
    StepUnderflow,
    SweepCap,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Collision => "collision",
            StopReason::StepUnderflow => "step_underflow",
            StopReason::SweepCap => "sweep_cap",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StopReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "collision" => Ok(StopReason::Collision),
            "step_underflow" => Ok(StopReason::StepUnderflow),
            "sweep_cap" => Ok(StopReason::SweepCap),
            _ => Err(Error::Format(format!("unknown stop reason {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusResult {
    pub epsilons: Vec<f64>,
    pub stop_reasons: Vec<StopReason>,
    /// Sweep at which each point stopped.
    pub stop_sweeps: Vec<usize>,
    /// Increment applied in the last sweep that grew each point (0 if none).
    pub last_steps: Vec<f64>,
    /// Number of sweeps run.
    pub sweeps: usize,
    /// Cached `rho_{c(i)}(x_i)`.
    pub densities: Vec<f64>,
    /// The configuration used, with the shape resolved to a fixed value.
    pub config: RunConfig,
}

impl RadiusResult {
    /// Points the sweep cap cut off while still growing.
    pub fn capped(&self) -> Vec<usize> {
        self.stop_reasons
            .iter()
            .enumerate()
            .filter(|(_, r)| **r == StopReason::SweepCap)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Radius increment of sweep `n` for a point of density `rho`.
#[inline]
pub fn step_size(rho: f64, n: usize) -> f64 {
    (-rho * n as f64).exp()
}

fn map_points<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if n < PARALLEL_THRESHOLD {
        (0..n).map(f).collect()
    } else {
        (0..n).into_par_iter().map(f).collect()
    }
}

enum Growth {
    Grow(f64),
    Underflow,
    Blocked,
}

struct Sweeper<'a> {
    ds: &'a Dataset,
    densities: &'a [f64],
    min_step: f64,
    mode: Mode,
}

impl Sweeper<'_> {
    fn touches_foreign(&self, eps: &[f64], i: usize) -> bool {
        let ci = self.ds.label(i);
        let xi = self.ds.coords(i);
        (0..self.ds.len())
            .any(|j| self.ds.label(j) != ci && euclidean(xi, self.ds.coords(j)) <= eps[i] + eps[j])
    }

    fn half_gap(&self, eps: &[f64], i: usize) -> f64 {
        let ci = self.ds.label(i);
        let xi = self.ds.coords(i);
        (0..self.ds.len())
            .filter(|&j| self.ds.label(j) != ci)
            .map(|j| (euclidean(xi, self.ds.coords(j)) - eps[i] - eps[j]) / 2.0)
            .fold(f64::INFINITY, f64::min)
    }

    fn growth(&self, eps: &[f64], i: usize, n: usize) -> Growth {
        let step = step_size(self.densities[i], n);
        if step <= self.min_step {
            return Growth::Underflow;
        }
        match self.mode {
            Mode::Paper => Growth::Grow(step),
            Mode::Strict => {
                let step = step.min(self.half_gap(eps, i).max(0.0));
                if step > 0.0 {
                    Growth::Grow(step)
                } else {
                    Growth::Blocked
                }
            }
        }
    }
}

struct State {
    eps: Vec<f64>,
    stop: Vec<Option<StopReason>>,
    stop_sweeps: Vec<usize>,
    last_steps: Vec<f64>,
}

impl State {
    fn new(n: usize) -> Self {
        State {
            eps: vec![0.0; n],
            stop: vec![None; n],
            stop_sweeps: vec![0; n],
            last_steps: vec![0.0; n],
        }
    }

    fn active(&self, i: usize) -> bool {
        self.stop[i].is_none()
    }

    fn halt(&mut self, i: usize, reason: StopReason, sweep: usize) {
        self.stop[i] = Some(reason);
        self.stop_sweeps[i] = sweep;
    }

    fn apply(&mut self, i: usize, growth: Growth, sweep: usize) {
        match growth {
            Growth::Grow(step) => {
                self.eps[i] += step;
                self.last_steps[i] = step;
            }
            Growth::Underflow => self.halt(i, StopReason::StepUnderflow, sweep),
            Growth::Blocked => self.halt(i, StopReason::Collision, sweep),
        }
    }
}

/// Compute a radius for every point of `ds`.
///
/// Points still growing when `max_sweeps` is reached are reported with
/// [`StopReason::SweepCap`]; the result is returned regardless.
pub fn expand(ds: &Dataset, cfg: &RunConfig) -> Result<RadiusResult> {
    cfg.validate()?;
    if ds.is_single_class() && !cfg.single_class {
        return Err(Error::SingleClass);
    }
    if cfg.normalize {
        let (z, _) = ds.normalized();
        return expand_prepared(&z, cfg);
    }
    expand_prepared(ds, cfg)
}

fn expand_prepared(ds: &Dataset, cfg: &RunConfig) -> Result<RadiusResult> {
    let shape = cfg.shape.resolve(ds)?;
    let model = DensityModel::new(ds, shape)?;
    let densities = map_points(ds.len(), |i| {
        model.density_by_index(ds.coords(i), ds.label(i))
    });

    let sweeper = Sweeper {
        ds,
        densities: &densities,
        min_step: cfg.min_step,
        mode: cfg.mode,
    };
    let mut state = State::new(ds.len());
    let mut sweep = 0;
    while sweep < cfg.max_sweeps && state.stop.iter().any(Option::is_none) {
        sweep += 1;
        if cfg.sequential {
            sequential_sweep(&sweeper, &mut state, sweep);
        } else {
            snapshot_sweep(&sweeper, &mut state, sweep);
        }
    }
    for i in 0..ds.len() {
        if state.active(i) {
            state.halt(i, StopReason::SweepCap, sweep);
        }
    }
    let capped = state
        .stop
        .iter()
        .filter(|s| **s == Some(StopReason::SweepCap))
        .count();
    if capped > 0 {
        log::warn!("{capped} points still growing after {sweep} sweeps");
    }

    Ok(RadiusResult {
        epsilons: state.eps,
        stop_reasons: state
            .stop
            .into_iter()
            .map(|s| s.expect("all halted"))
            .collect(),
        stop_sweeps: state.stop_sweeps,
        last_steps: state.last_steps,
        sweeps: sweep,
        densities,
        config: RunConfig {
            shape: Shape::Fixed(shape),
            ..cfg.clone()
        },
    })
}

fn snapshot_sweep(sweeper: &Sweeper<'_>, state: &mut State, sweep: usize) {
    let n = state.eps.len();
    let collided = {
        let st = &*state;
        map_points(n, |i| st.active(i) && sweeper.touches_foreign(&st.eps, i))
    };
    for (i, hit) in collided.into_iter().enumerate() {
        if hit {
            state.halt(i, StopReason::Collision, sweep);
        }
    }
    let growth = {
        let st = &*state;
        map_points(n, |i| {
            st.active(i).then(|| sweeper.growth(&st.eps, i, sweep))
        })
    };
    for (i, g) in growth.into_iter().enumerate() {
        if let Some(g) = g {
            state.apply(i, g, sweep);
        }
    }
}

/// In-place row-order variant: each point sees the radii already updated
/// earlier in the same sweep.
fn sequential_sweep(sweeper: &Sweeper<'_>, state: &mut State, sweep: usize) {
    for i in 0..state.eps.len() {
        if !state.active(i) {
            continue;
        }
        if sweeper.touches_foreign(&state.eps, i) {
            state.halt(i, StopReason::Collision, sweep);
            continue;
        }
        let g = sweeper.growth(&state.eps, i, sweep);
        state.apply(i, g, sweep);
    }
}
