//! Dynamics of finitely many Dirac masses.
//!
//! For `ρ = Σ m_i δ_{y_i}` the flux selects the velocities
//!
//! ```text
//! m_i y_i' = A(m_i/2 + p_i) - A(-m_i/2 + p_i),   p_i = Σ_{j≠i} m_j K'(y_i - y_j)
//! ```
//!
//! which are integrated with explicit Euler. Particles that cross or touch
//! during a step are fused into one aggregate carrying the summed mass.

use crate::error::{Error, Result};
use crate::model::ChemoModel;
use std::fmt;

/// Sorted Dirac positions with positive masses at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateState {
    t: f64,
    positions: Vec<f64>,
    masses: Vec<f64>,
}

/// Where a fused pair is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MergeRule {
    /// Midpoint of the two colliding positions.
    #[default]
    Midpoint,
    /// Mass-weighted mean; conserves `Σ m y` exactly.
    CenterOfMass,
}

impl MergeRule {
    pub fn name(self) -> &'static str {
        match self {
            MergeRule::Midpoint => "midpoint",
            MergeRule::CenterOfMass => "center_of_mass",
        }
    }

    #[inline]
    fn place(self, (y_l, m_l): (f64, f64), (y_r, m_r): (f64, f64)) -> f64 {
        match self {
            MergeRule::Midpoint => 0.5 * (y_l + y_r),
            MergeRule::CenterOfMass => (m_l * y_l + m_r * y_r) / (m_l + m_r),
        }
    }
}

impl fmt::Display for MergeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MergeRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "midpoint" => Ok(MergeRule::Midpoint),
            "center_of_mass" | "centerofmass" | "com" => Ok(MergeRule::CenterOfMass),
            other => Err(format!("unknown merge rule `{other}` (midpoint|center_of_mass)")),
        }
    }
}

/// Two neighbours fused into one aggregate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeEvent {
    pub t: f64,
    /// Index of the left partner in the array at the moment of fusion.
    pub left_index: usize,
    pub right_index: usize,
    pub new_position: f64,
    pub new_mass: f64,
}

impl AggregateState {
    /// Builds a state from non-decreasing positions. Coincident positions are
    /// fused on the spot.
    pub fn new(t: f64, positions: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if positions.len() != masses.len() {
            return Err(Error::InvalidState(format!(
                "{} positions but {} masses",
                positions.len(),
                masses.len()
            )));
        }
        if positions.is_empty() {
            return Err(Error::InvalidState("no aggregates".into()));
        }
        if !t.is_finite() {
            return Err(Error::InvalidState(format!("time {t} is not finite")));
        }
        if let Some(i) = positions.iter().position(|y| !y.is_finite()) {
            return Err(Error::NonFinite {
                what: "aggregate position",
                index: i,
            });
        }
        if let Some(i) = masses.iter().position(|&m| !(m.is_finite() && m > 0.0)) {
            return Err(Error::InvalidState(format!(
                "mass {} at index {i} is not positive",
                masses[i]
            )));
        }
        if let Some(i) = positions.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidState(format!(
                "positions decrease at index {}",
                i + 1
            )));
        }
        let mut positions = positions;
        let mut masses = masses;
        merge_collisions(&mut positions, &mut masses, MergeRule::Midpoint, t);
        Ok(AggregateState {
            t,
            positions,
            masses,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn first_moment(&self) -> f64 {
        self.positions.iter().zip(&self.masses).map(|(y, m)| y * m).sum()
    }

    pub fn center_of_mass(&self) -> f64 {
        self.first_moment() / self.total_mass()
    }
}

/// `p_i = Σ_{j≠i} m_j K'(y_i - y_j)` for sorted positions, in O(n).
///
/// Uses `p_i = ½ (R_i - L_i)` with `L_i = Σ_{j<i} m_j e^{y_j - y_i}` and
/// `R_i = Σ_{j>i} m_j e^{y_i - y_j}`, both accumulated recursively.
pub fn interaction_sums(positions: &[f64], masses: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(positions.len());
    interaction_sums_into(positions, masses, &mut out);
    out
}

fn interaction_sums_into(positions: &[f64], masses: &[f64], out: &mut Vec<f64>) {
    let n = positions.len();
    out.clear();
    out.resize(n, 0.0);
    let mut left = 0.0;
    for i in 1..n {
        left = (left + masses[i - 1]) * (positions[i - 1] - positions[i]).exp();
        out[i] = -0.5 * left;
    }
    let mut right = 0.0;
    for i in (0..n.saturating_sub(1)).rev() {
        right = (right + masses[i + 1]) * (positions[i] - positions[i + 1]).exp();
        out[i] += 0.5 * right;
    }
}

#[inline]
fn aggregate_velocity(mass: f64, p: f64, model: &ChemoModel) -> f64 {
    let half = 0.5 * mass;
    (model.velocity_potential(half + p) - model.velocity_potential(-half + p)) / mass
}

fn velocities_into(positions: &[f64], masses: &[f64], model: &ChemoModel, out: &mut Vec<f64>) {
    interaction_sums_into(positions, masses, out);
    for (v, &m) in out.iter_mut().zip(masses) {
        *v = aggregate_velocity(m, *v, model);
    }
}

/// Velocities `y_i'` of every aggregate.
pub fn velocity_rhs(state: &AggregateState, model: &ChemoModel) -> Vec<f64> {
    let mut out = Vec::with_capacity(state.len());
    velocities_into(&state.positions, &state.masses, model, &mut out);
    out
}

/// `(p_i - m_i/2, p_i + m_i/2)`; the velocity of aggregate `i` is `a(γ)` for
/// some `γ` in this interval.
pub fn gamma_interval(state: &AggregateState, i: usize) -> (f64, f64) {
    let p = interaction_sums(&state.positions, &state.masses)[i];
    let half = 0.5 * state.masses[i];
    (p - half, p + half)
}

/// Collapse-time estimate `(y_n - y_1) / (v_1^lb - v_n^ub)`.
///
/// `v_1^lb` is the velocity of the leftmost aggregate computed from the
/// interaction `Σ_{j>1} (m_j/2) e^{y_1 - y_j}`, `v_n^ub` its mirror for the
/// rightmost one, both at the given state. Returns `+∞` if the closing rate
/// is not positive (only through underflow for extreme separations).
pub fn collapse_time_bound(state: &AggregateState, model: &ChemoModel) -> Result<f64> {
    let n = state.len();
    if n < 2 {
        return Err(Error::TooFewAggregates { needed: 2, got: n });
    }
    let y = &state.positions;
    let m = &state.masses;
    let q_first: f64 = (1..n).map(|j| 0.5 * m[j] * (y[0] - y[j]).exp()).sum();
    let q_last: f64 = (0..n - 1).map(|j| 0.5 * m[j] * (y[j] - y[n - 1]).exp()).sum();
    let v_first = aggregate_velocity(m[0], q_first, model);
    let v_last = aggregate_velocity(m[n - 1], -q_last, model);
    let closing = v_first - v_last;
    if closing > 0.0 {
        Ok((y[n - 1] - y[0]) / closing)
    } else {
        Ok(f64::INFINITY)
    }
}

/// Fuses neighbours until positions are strictly increasing.
///
/// The leftmost violating pair (`y_{j+1} <= y_j`) is always resolved first;
/// a fused aggregate is re-checked against its left neighbour before the scan
/// moves on.
pub fn merge_collisions(
    positions: &mut Vec<f64>,
    masses: &mut Vec<f64>,
    rule: MergeRule,
    t: f64,
) -> Vec<MergeEvent> {
    let mut events = Vec::new();
    if positions.windows(2).all(|w| w[0] < w[1]) {
        return events;
    }
    let mut top = 0usize;
    for k in 1..positions.len() {
        let mut y = positions[k];
        let mut m = masses[k];
        let mut open = true;
        while open && y <= positions[top] {
            let merged_mass = masses[top] + m;
            y = rule.place((positions[top], masses[top]), (y, m));
            m = merged_mass;
            events.push(MergeEvent {
                t,
                left_index: top,
                right_index: top + 1,
                new_position: y,
                new_mass: m,
            });
            if top == 0 {
                open = false;
            } else {
                top -= 1;
            }
        }
        if open {
            top += 1;
        }
        positions[top] = y;
        masses[top] = m;
    }
    positions.truncate(top + 1);
    masses.truncate(top + 1);
    events
}

/// One explicit Euler step of length `dt` followed by collision merging.
pub fn euler_step(
    state: &AggregateState,
    dt: f64,
    model: &ChemoModel,
    rule: MergeRule,
) -> (AggregateState, Vec<MergeEvent>) {
    let mut next = state.clone();
    let mut scratch = Vec::new();
    let events = next.advance(dt, model, rule, &mut scratch);
    (next, events)
}

impl AggregateState {
    fn advance(
        &mut self,
        dt: f64,
        model: &ChemoModel,
        rule: MergeRule,
        scratch: &mut Vec<f64>,
    ) -> Vec<MergeEvent> {
        velocities_into(&self.positions, &self.masses, model, scratch);
        for (y, v) in self.positions.iter_mut().zip(scratch.iter()) {
            *y += dt * v;
        }
        self.t += dt;
        merge_collisions(&mut self.positions, &mut self.masses, rule, self.t)
    }
}

/// Time stepping controls for [`simulate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub dt: f64,
    pub t_end: f64,
    pub merge_rule: MergeRule,
    /// Record a sample every this many steps (merge steps and the final step
    /// are always recorded).
    pub sample_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<AggregateState>,
    pub events: Vec<MergeEvent>,
    pub terminal: AggregateState,
    pub steps: usize,
}

impl Trajectory {
    pub fn initial(&self) -> &AggregateState {
        &self.samples[0]
    }

    /// Time from which the solution is a single Dirac, if reached.
    pub fn collapse_time(&self) -> Option<f64> {
        if self.terminal.len() != 1 {
            None
        } else {
            Some(self.events.last().map_or(self.initial().t(), |e| e.t))
        }
    }
}

/// Step sizes that start at `t0` and land exactly on `t_end`.
pub(crate) fn step_times(t0: f64, t_end: f64, dt: f64) -> Result<(usize, impl Fn(usize) -> f64)> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidTime(format!("dt must be > 0, got {dt}")));
    }
    if !(t_end.is_finite() && t_end > t0) {
        return Err(Error::InvalidTime(format!(
            "t_end = {t_end} must exceed the start time {t0}"
        )));
    }
    let steps = (((t_end - t0) / dt) - 1e-9).ceil().max(1.0) as usize;
    Ok((steps, move |k: usize| {
        if k >= steps {
            t_end
        } else {
            t0 + k as f64 * dt
        }
    }))
}

/// Integrates the aggregate system from `state0` up to `params.t_end`.
pub fn simulate(state0: &AggregateState, model: &ChemoModel, params: &SimParams) -> Result<Trajectory> {
    let (steps, time_at) = step_times(state0.t(), params.t_end, params.dt)?;
    if let (Some(vmax), Some(gap)) = (
        model.max_speed(),
        state0.positions.windows(2).map(|w| w[1] - w[0]).reduce(f64::min),
    ) {
        if params.dt > 0.1 * gap / vmax {
            log::info!(
                "dt = {} exceeds 0.1 * min gap / max speed = {}",
                params.dt,
                0.1 * gap / vmax
            );
        }
    }
    let every = params.sample_every.max(1);
    let mut state = state0.clone();
    let mut samples = vec![state.clone()];
    let mut events = Vec::new();
    let mut scratch = Vec::with_capacity(state.len());
    for k in 1..=steps {
        let dt = time_at(k) - time_at(k - 1);
        let new_events = state.advance(dt, model, params.merge_rule, &mut scratch);
        state.t = time_at(k);
        if state.positions.iter().any(|y| !y.is_finite()) {
            return Err(Error::NonFiniteState { t: state.t });
        }
        let merged = !new_events.is_empty();
        events.extend(new_events.into_iter().map(|e| MergeEvent { t: state.t, ..e }));
        if merged || k % every == 0 || k == steps {
            samples.push(state.clone());
        }
    }
    Ok(Trajectory {
        samples,
        events,
        terminal: state,
        steps,
    })
}
