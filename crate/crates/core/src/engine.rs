//! Co-evolution of the learned intercept and the environment, with the
//! time-average payoff comparison between first- and second-price auctions.
//!
//! The first-price per-bidder payoff `w†(x)` is integrated with the RK4
//! stage weights of the step that advances `x`; the second-price benchmark
//! `w*` is piecewise constant on the grid. With that quadrature the payoff
//! gap over any stretch of constant width telescopes exactly into
//! `alpha dv (x_end - x_start) / eta`.

use std::fmt;
use std::str::FromStr;

use crate::environments::{Schedule, SchedulePath};
use crate::error::{Error, Result};
use crate::learning::{
    equilibrium_payoff, homogeneous_payoff, rk4_step_with_payoff, DynamicsConfig, LearnerState,
};
use crate::model::{AuctionConfig, ValueDistribution};
use crate::rng::{stream, Purpose};
use crate::stats::NeumaierSum;

pub const DEFAULT_RECORD_EVERY: usize = 100;

/// Multiple of the boundary-term envelope under which a gap counts as zero.
pub const EQUIVALENCE_FACTOR: f64 = 3.0;
/// Relative margin above the envelope reported as undetermined.
pub const UNDETERMINED_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub x: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub w_dagger: f64,
    pub w_star: f64,
    pub cum_avg_dagger: f64,
    pub cum_avg_star: f64,
}

/// Rows sampled every `record_every` steps, starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub n: usize,
    pub record_every: usize,
    pub h: f64,
    pub rows: Vec<TraceRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    FirstHigher,
    SecondHigher,
    Equivalent,
    Undetermined,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::FirstHigher => "FIRST_HIGHER",
            Verdict::SecondHigher => "SECOND_HIGHER",
            Verdict::Equivalent => "EQUIVALENT",
            Verdict::Undetermined => "UNDETERMINED",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "FIRST_HIGHER" => Ok(Verdict::FirstHigher),
            "SECOND_HIGHER" => Ok(Verdict::SecondHigher),
            "EQUIVALENT" => Ok(Verdict::Equivalent),
            "UNDETERMINED" => Ok(Verdict::Undetermined),
            other => Err(format!("unknown verdict `{other}`")),
        }
    }
}

/// Aggregate statistics of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub horizon: f64,
    pub steps: u64,
    pub w_bar_dagger: f64,
    pub w_bar_star: f64,
    /// `w_bar_dagger - w_bar_star`, accumulated from the per-step excess
    /// rather than by subtracting the two averages.
    pub gap: f64,
    /// Total variation of `x` over all steps.
    pub path_length: f64,
    pub path_rate: f64,
    pub total_ascent: f64,
    pub total_descent: f64,
    pub x_initial: f64,
    pub x_final: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub width_min: f64,
    pub width_max: f64,
    pub switches: u64,
    pub guard_triggers: u64,
    pub equivalence_envelope: f64,
    pub bound_low: Option<f64>,
    pub bound_high: Option<f64>,
    pub exact_two_state_gap: Option<f64>,
    pub verdict: Verdict,
}

impl RunSummary {
    /// Spread of the learned intercept over the run.
    pub fn x_amplitude(&self) -> f64 {
        self.x_max - self.x_min
    }
}

/// Boundary-term envelope `3 alpha dv_max x_amplitude / (eta T)`.
pub fn equivalence_envelope(
    cfg: &AuctionConfig,
    dynamics: &DynamicsConfig,
    width_max: f64,
    x_amplitude: f64,
    horizon: f64,
) -> f64 {
    EQUIVALENCE_FACTOR * cfg.alpha() * width_max * x_amplitude / (dynamics.eta() * horizon)
}

pub fn classify(gap: f64, envelope: f64) -> Verdict {
    let magnitude = gap.abs();
    if magnitude <= envelope {
        Verdict::Equivalent
    } else if magnitude <= (1.0 + UNDETERMINED_MARGIN) * envelope {
        Verdict::Undetermined
    } else if gap > 0.0 {
        Verdict::FirstHigher
    } else {
        Verdict::SecondHigher
    }
}

/// Integrates the learning dynamics from `x(0) = v_m(0)` to `t = horizon`.
pub fn run(
    cfg: &AuctionConfig,
    dynamics: &DynamicsConfig,
    schedule: &Schedule,
    horizon: f64,
    seed: u64,
    record_every: usize,
) -> Result<(SimulationTrace, RunSummary)> {
    let h = dynamics.h();
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::param(
            "T",
            format!("must be positive, got {horizon}"),
        ));
    }
    let steps_f = (horizon / h).round();
    if steps_f < 1.0 || (steps_f * h - horizon).abs() > 1e-9 * horizon {
        return Err(Error::param(
            "T",
            format!("{horizon} is not a multiple of the step {h}"),
        ));
    }
    if record_every == 0 {
        return Err(Error::param("record_every", "must be at least 1"));
    }
    let steps = steps_f as u64;

    let mut rng = stream(seed, Purpose::Schedule, 0);
    let mut path = SchedulePath::new(schedule, h)?;

    let first = path.for_step(&mut rng, 0);
    let mut state = LearnerState::new(first.v_min(), 0.0);
    let x_initial = state.x;

    let mut dagger = NeumaierSum::default();
    let mut star = NeumaierSum::default();
    let mut excess = NeumaierSum::default();
    let mut length = NeumaierSum::default();
    let mut ascent = NeumaierSum::default();
    let mut descent = NeumaierSum::default();
    let (mut x_min, mut x_max) = (state.x, state.x);
    let (mut width_min, mut width_max) = (first.width(), first.width());
    let mut switches = 0u64;
    let mut previous = first;

    let mut rows = Vec::with_capacity((steps as usize) / record_every + 1);

    for k in 0..steps {
        let t = k as f64 * h;
        let d = if k == 0 {
            first
        } else {
            path.for_step(&mut rng, k)
        };
        if d != previous {
            switches += 1;
            previous = d;
        }
        width_min = width_min.min(d.width());
        width_max = width_max.max(d.width());

        let w_star = equilibrium_payoff(cfg, &d);
        if (k as usize).is_multiple_of(record_every) {
            let w_dagger = homogeneous_payoff(cfg, &d, state.x);
            let (cum_avg_dagger, cum_avg_star) = if k == 0 {
                (w_dagger, w_star)
            } else {
                (dagger.value() / t, star.value() / t)
            };
            rows.push(TraceRow {
                t,
                x: state.x,
                v_min: d.v_min(),
                v_max: d.v_max(),
                w_dagger,
                w_star,
                cum_avg_dagger,
                cum_avg_star,
            });
        }

        let (next, payoff) = rk4_step_with_payoff(cfg, dynamics, state, &d);
        dagger.add(payoff.dagger);
        star.add(h * w_star);
        excess.add(payoff.excess);

        let dx = next.x - state.x;
        length.add(dx.abs());
        if dx > 0.0 {
            ascent.add(dx);
        } else {
            descent.add(-dx);
        }
        x_min = x_min.min(next.x);
        x_max = x_max.max(next.x);
        state = LearnerState::new(next.x, (k + 1) as f64 * h);
    }

    let w_bar_dagger = dagger.value() / horizon;
    let w_bar_star = star.value() / horizon;
    let gap = excess.value() / horizon;
    let path_length = length.value();
    let envelope = equivalence_envelope(cfg, dynamics, width_max, x_max - x_min, horizon);

    let mut summary = RunSummary {
        horizon,
        steps,
        w_bar_dagger,
        w_bar_star,
        gap,
        path_length,
        path_rate: path_length / horizon,
        total_ascent: ascent.value(),
        total_descent: descent.value(),
        x_initial,
        x_final: state.x,
        x_min,
        x_max,
        width_min,
        width_max,
        switches,
        guard_triggers: path.guard_triggers(),
        equivalence_envelope: envelope,
        bound_low: None,
        bound_high: None,
        exact_two_state_gap: None,
        verdict: classify(gap, envelope),
    };

    if let Some(states) = schedule.finite_states() {
        match theorem_bound(&summary, states, cfg, dynamics) {
            Ok(TheoremBound::Lower(b)) => summary.bound_low = Some(b),
            Ok(TheoremBound::Upper(b)) => summary.bound_high = Some(b),
            Err(_) => {}
        }
        summary.exact_two_state_gap = exact_two_state_gap(&summary, states, cfg, dynamics).ok();
    }

    let trace = SimulationTrace {
        n: cfg.n(),
        record_every,
        h,
        rows,
    };
    Ok((trace, summary))
}

/// Asymptotic bound on the payoff gap implied by a monotone width ordering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TheoremBound {
    /// Widths strictly increase with `v_m`: the gap is at least this.
    Lower(f64),
    /// Widths strictly decrease with `v_m`: the gap is at most this.
    Upper(f64),
}

fn sorted_widths(states: &[ValueDistribution]) -> Result<Vec<f64>> {
    if states.len() < 2 {
        return Err(Error::HypothesisViolated(format!(
            "need at least 2 states, got {}",
            states.len()
        )));
    }
    let mut sorted = states.to_vec();
    sorted.sort_by(|a, b| a.v_min().total_cmp(&b.v_min()));
    if sorted.windows(2).any(|w| w[1].v_min() <= w[0].v_min()) {
        return Err(Error::HypothesisViolated(
            "minimum values must be pairwise distinct".into(),
        ));
    }
    Ok(sorted.iter().map(|d| d.width()).collect())
}

/// `(1/2) alpha min_k(dv_{k+1} - dv_k) path_rate / eta` for widths
/// increasing in `v_m`, or the mirrored upper bound with `max_k` when they
/// decrease.
pub fn theorem_bound(
    summary: &RunSummary,
    states: &[ValueDistribution],
    cfg: &AuctionConfig,
    dynamics: &DynamicsConfig,
) -> Result<TheoremBound> {
    let widths = sorted_widths(states)?;
    let diffs: Vec<f64> = widths.windows(2).map(|w| w[1] - w[0]).collect();
    let scale = 0.5 * cfg.alpha() * summary.path_rate / dynamics.eta();
    if diffs.iter().all(|&d| d > 0.0) {
        let min = diffs.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(TheoremBound::Lower(scale * min))
    } else if diffs.iter().all(|&d| d < 0.0) {
        let max = diffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(TheoremBound::Upper(scale * max))
    } else {
        Err(Error::HypothesisViolated(format!(
            "widths {widths:?} are not strictly monotone in the minimum value"
        )))
    }
}

/// Lower bound for strictly increasing widths.
pub fn theorem_lower_bound(
    summary: &RunSummary,
    states: &[ValueDistribution],
    cfg: &AuctionConfig,
    dynamics: &DynamicsConfig,
) -> Result<f64> {
    match theorem_bound(summary, states, cfg, dynamics)? {
        TheoremBound::Lower(b) => Ok(b),
        TheoremBound::Upper(_) => Err(Error::HypothesisViolated(
            "widths decrease with the minimum value; only an upper bound exists".into(),
        )),
    }
}

/// Upper bound for strictly decreasing widths.
pub fn theorem_upper_bound(
    summary: &RunSummary,
    states: &[ValueDistribution],
    cfg: &AuctionConfig,
    dynamics: &DynamicsConfig,
) -> Result<f64> {
    match theorem_bound(summary, states, cfg, dynamics)? {
        TheoremBound::Upper(b) => Ok(b),
        TheoremBound::Lower(_) => Err(Error::HypothesisViolated(
            "widths increase with the minimum value; only a lower bound exists".into(),
        )),
    }
}

/// Two-state gap prediction `(1/2) alpha (dv_2 - dv_1) path_rate / eta`,
/// states ordered by `v_m`.
pub fn exact_two_state_gap(
    summary: &RunSummary,
    states: &[ValueDistribution],
    cfg: &AuctionConfig,
    dynamics: &DynamicsConfig,
) -> Result<f64> {
    if states.len() != 2 {
        return Err(Error::WrongStateCount(states.len()));
    }
    let (low, high) = if states[0].v_min() <= states[1].v_min() {
        (states[0], states[1])
    } else {
        (states[1], states[0])
    };
    Ok(0.5 * cfg.alpha() * (high.width() - low.width()) * summary.path_rate / dynamics.eta())
}

/// Largest residual of `(w† - w*) + (x - v_m) / n^2` over the trace rows.
pub fn gap_identity_check(trace: &SimulationTrace) -> f64 {
    let n2 = (trace.n * trace.n) as f64;
    trace
        .rows
        .iter()
        .map(|r| ((r.w_dagger - r.w_star) + (r.x - r.v_min) / n2).abs())
        .fold(0.0, f64::max)
}
