//! Time-varying value distributions.
//!
//! Two families are provided: piecewise-constant finite-state schedules whose
//! staying times are drawn uniformly from a range, and a pair of
//! Ornstein-Uhlenbeck processes for `(v_m, v_M)` driven by one shared noise
//! term. Both are advanced on the integration grid, so a distribution never
//! changes inside an RK4 step.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::ValueDistribution;

/// How a finite-state schedule moves between its states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    /// Alternate between two states.
    TwoStateRandom,
    /// Visit `order` repeatedly.
    Cyclic,
    /// Visit `order` once, then remain in its last state.
    ExplicitSequence,
}

impl Transition {
    pub fn name(&self) -> &'static str {
        match self {
            Transition::TwoStateRandom => "two-state-random",
            Transition::Cyclic => "cyclic",
            Transition::ExplicitSequence => "explicit-sequence",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "two-state-random" => Some(Transition::TwoStateRandom),
            "cyclic" => Some(Transition::Cyclic),
            "explicit-sequence" => Some(Transition::ExplicitSequence),
            _ => None,
        }
    }
}

/// Piecewise-constant schedule over `K` value distributions.
///
/// States are kept in presentation order; `order` indexes into them.
/// [`FiniteStateSchedule::sorted_states`] gives the ordering by `v_m` used by
/// the revenue theorems.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteStateSchedule {
    states: Vec<ValueDistribution>,
    transition: Transition,
    stay_range: (f64, f64),
    order: Vec<usize>,
}

impl FiniteStateSchedule {
    pub fn new(
        states: Vec<ValueDistribution>,
        transition: Transition,
        stay_range: (f64, f64),
        order: Vec<usize>,
    ) -> Result<Self> {
        let k = states.len();
        if k == 0 {
            return Err(Error::InvalidSchedule(
                "at least one state is required".into(),
            ));
        }
        let (lo, hi) = stay_range;
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
            return Err(Error::InvalidSchedule(format!(
                "stay range must satisfy 0 <= lo < hi, got [{lo}, {hi}]"
            )));
        }
        let order = match transition {
            Transition::TwoStateRandom => {
                if k > 2 {
                    return Err(Error::InvalidSchedule(format!(
                        "two-state-random needs 1 or 2 states, got {k}"
                    )));
                }
                (0..k).collect()
            }
            Transition::Cyclic | Transition::ExplicitSequence => {
                if order.is_empty() {
                    if k == 1 {
                        vec![0]
                    } else {
                        return Err(Error::InvalidSchedule(format!(
                            "{} needs a non-empty state order",
                            transition.name()
                        )));
                    }
                } else {
                    if let Some(&bad) = order.iter().find(|&&i| i >= k) {
                        return Err(Error::InvalidSchedule(format!(
                            "state index {bad} out of range for {k} states"
                        )));
                    }
                    order
                }
            }
        };
        Ok(Self {
            states,
            transition,
            stay_range,
            order,
        })
    }

    /// A single state held forever.
    pub fn constant(d: ValueDistribution) -> Self {
        Self {
            states: vec![d],
            transition: Transition::Cyclic,
            stay_range: (0.0, 1.0),
            order: vec![0],
        }
    }

    pub fn two_state_random(
        first: ValueDistribution,
        second: ValueDistribution,
        stay_range: (f64, f64),
    ) -> Result<Self> {
        Self::new(
            vec![first, second],
            Transition::TwoStateRandom,
            stay_range,
            vec![],
        )
    }

    pub fn cyclic(
        states: Vec<ValueDistribution>,
        order: Vec<usize>,
        stay_range: (f64, f64),
    ) -> Result<Self> {
        Self::new(states, Transition::Cyclic, stay_range, order)
    }

    pub fn explicit_sequence(
        states: Vec<ValueDistribution>,
        order: Vec<usize>,
        stay_range: (f64, f64),
    ) -> Result<Self> {
        Self::new(states, Transition::ExplicitSequence, stay_range, order)
    }

    pub fn states(&self) -> &[ValueDistribution] {
        &self.states
    }

    pub fn transition(&self) -> Transition {
        self.transition
    }

    pub fn stay_range(&self) -> (f64, f64) {
        self.stay_range
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Presentation indices sorted by `(v_m, v_M)`.
    pub fn sort_permutation(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.states.len()).collect();
        idx.sort_by(|&a, &b| {
            let (sa, sb) = (&self.states[a], &self.states[b]);
            sa.v_min()
                .total_cmp(&sb.v_min())
                .then(sa.v_max().total_cmp(&sb.v_max()))
        });
        idx
    }

    pub fn sorted_states(&self) -> Vec<ValueDistribution> {
        self.sort_permutation()
            .into_iter()
            .map(|i| self.states[i])
            .collect()
    }

    fn is_constant(&self) -> bool {
        self.states.len() == 1 || self.order.len() == 1
    }
}

/// A realisation of a [`FiniteStateSchedule`] on a grid of step `h`.
#[derive(Debug, Clone)]
pub struct FiniteStatePath {
    schedule: FiniteStateSchedule,
    h: f64,
    pos: usize,
    next_switch: Option<u64>,
    started: bool,
    switches: u64,
}

impl FiniteStatePath {
    pub fn new(schedule: FiniteStateSchedule, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::param("h", format!("must be positive, got {h}")));
        }
        Ok(Self {
            schedule,
            h,
            pos: 0,
            next_switch: None,
            started: false,
            switches: 0,
        })
    }

    /// Number of state changes so far.
    pub fn switches(&self) -> u64 {
        self.switches
    }

    /// Presentation index of the state currently in force.
    pub fn current_index(&self) -> usize {
        self.schedule.order[self.pos]
    }

    fn dwell_steps<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let (lo, hi) = self.schedule.stay_range;
        let stay: f64 = rng.random_range(lo..hi);
        // Round up to the grid; the small offset keeps exact multiples exact.
        ((stay / self.h - 1e-9).ceil() as u64).max(1)
    }

    /// Distribution in force on `[t_next, t_next + h)`. Calls must use
    /// nondecreasing `t_next`.
    pub fn schedule_at<R: Rng + ?Sized>(&mut self, rng: &mut R, t_next: f64) -> ValueDistribution {
        let step = (t_next / self.h).round().max(0.0) as u64;
        let constant = self.schedule.is_constant();
        if !self.started {
            self.started = true;
            self.pos = 0;
            self.next_switch = if constant {
                None
            } else {
                Some(self.dwell_steps(rng))
            };
        }
        while let Some(at) = self.next_switch {
            if at > step {
                break;
            }
            let last = self.schedule.order.len() - 1;
            match self.schedule.transition {
                Transition::ExplicitSequence if self.pos == last => {
                    self.next_switch = None;
                    break;
                }
                Transition::ExplicitSequence => self.pos += 1,
                _ => self.pos = if self.pos == last { 0 } else { self.pos + 1 },
            }
            self.switches += 1;
            self.next_switch = Some(at + self.dwell_steps(rng));
        }
        self.schedule.states[self.current_index()]
    }
}

/// Coupled Ornstein-Uhlenbeck processes for `(v_m, v_M)`:
///
/// ```text
/// dv_m = -(v_m - vbar_m) dt + a_m dW
/// dv_M = -(v_M - vbar_M) dt + a_M dW
/// ```
///
/// with the same Wiener increment `dW` in both coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LangevinSchedule {
    target: ValueDistribution,
    noise_min: f64,
    noise_max: f64,
    state: ValueDistribution,
    guard_triggers: u64,
}

impl LangevinSchedule {
    /// Relative size of the smallest admitted support width.
    pub const MIN_WIDTH_FRACTION: f64 = 1e-3;

    /// Starts at the restoring target.
    pub fn new(target: ValueDistribution, noise_min: f64, noise_max: f64) -> Result<Self> {
        for (field, a) in [("a_m", noise_min), ("a_M", noise_max)] {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::param(
                    field,
                    format!("must be finite and >= 0, got {a}"),
                ));
            }
        }
        Ok(Self {
            target,
            noise_min,
            noise_max,
            state: target,
            guard_triggers: 0,
        })
    }

    pub fn target(&self) -> ValueDistribution {
        self.target
    }

    pub fn noise(&self) -> (f64, f64) {
        (self.noise_min, self.noise_max)
    }

    pub fn state(&self) -> ValueDistribution {
        self.state
    }

    /// Number of steps on which the minimum-width guard fired.
    pub fn guard_triggers(&self) -> u64 {
        self.guard_triggers
    }

    pub fn min_width(&self) -> f64 {
        Self::MIN_WIDTH_FRACTION * self.target.width()
    }

    /// One Euler-Maruyama step of size `h` with a single standard-normal draw.
    pub fn langevin_step<R: Rng + ?Sized>(&mut self, rng: &mut R, h: f64) -> ValueDistribution {
        let z: f64 = rng.sample(StandardNormal);
        let dw = h.sqrt() * z;
        let (v_min, v_max) = (self.state.v_min(), self.state.v_max());
        let next_min = v_min - (v_min - self.target.v_min()) * h + self.noise_min * dw;
        let mut next_max = v_max - (v_max - self.target.v_max()) * h + self.noise_max * dw;
        let min_width = self.min_width();
        let width = next_max - next_min;
        if width.is_nan() || width < min_width {
            next_max = next_min + min_width;
            self.guard_triggers += 1;
        }
        self.state = ValueDistribution::new_unchecked(next_min, next_max);
        self.state
    }
}

/// Any source of time-varying value distributions.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Finite(FiniteStateSchedule),
    Langevin(LangevinSchedule),
}

impl Schedule {
    /// Declared states of a finite schedule.
    pub fn finite_states(&self) -> Option<&[ValueDistribution]> {
        match self {
            Schedule::Finite(s) => Some(s.states()),
            Schedule::Langevin(_) => None,
        }
    }
}

/// Step-by-step realisation of a [`Schedule`].
#[derive(Debug, Clone)]
pub enum SchedulePath {
    Finite(FiniteStatePath),
    Langevin {
        process: LangevinSchedule,
        h: f64,
        steps_taken: u64,
    },
}

impl SchedulePath {
    pub fn new(schedule: &Schedule, h: f64) -> Result<Self> {
        Ok(match schedule {
            Schedule::Finite(s) => SchedulePath::Finite(FiniteStatePath::new(s.clone(), h)?),
            Schedule::Langevin(p) => SchedulePath::Langevin {
                process: p.clone(),
                h,
                steps_taken: 0,
            },
        })
    }

    /// Distribution in force during integration step `step` (time `step * h`).
    /// Steps must be requested in increasing order starting from 0.
    pub fn for_step<R: Rng + ?Sized>(&mut self, rng: &mut R, step: u64) -> ValueDistribution {
        match self {
            SchedulePath::Finite(path) => {
                let h = path.h;
                path.schedule_at(rng, step as f64 * h)
            }
            SchedulePath::Langevin {
                process,
                h,
                steps_taken,
            } => {
                while *steps_taken < step {
                    process.langevin_step(rng, *h);
                    *steps_taken += 1;
                }
                process.state()
            }
        }
    }

    pub fn guard_triggers(&self) -> u64 {
        match self {
            SchedulePath::Finite(_) => 0,
            SchedulePath::Langevin { process, .. } => process.guard_triggers(),
        }
    }
}
