use std::fmt;
use std::str::FromStr;

use crate::engine::DEFAULT_RECORD_EVERY;
use crate::environments::{FiniteStateSchedule, LangevinSchedule, Schedule};
use crate::learning::DynamicsConfig;
use crate::model::ValueDistribution;

use super::config::RunConfig;

pub const DEFAULT_BIDDERS: usize = 10;
pub const DEFAULT_HORIZON: f64 = 2000.0;
pub const DEFAULT_SEED: u64 = 1;
/// Staying times of the finite-state experiments are uniform on this range.
pub const STAY_RANGE: (f64, f64) = (0.0, 2.0);

/// Named experiments with fixed schedules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Two states, width grows with the minimum value.
    Fig2a,
    /// Two states of equal width.
    Fig2b,
    /// Two states, width shrinks as the minimum value grows.
    Fig2c,
    /// Langevin, `(a_m, a_M) = (5, 10)`.
    Fig3a,
    /// Langevin, `(a_m, a_M) = (5, 5)`.
    Fig3b,
    /// Langevin, `(a_m, a_M) = (5, 0)`.
    Fig3c,
    /// Four-state cycle `(10,20) -> (10,30) -> (20,40) -> (20,30)`.
    FigA1a,
    /// The reversed cycle `(10,20) -> (20,30) -> (20,40) -> (10,30)`.
    FigA1b,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Fig2a,
        Preset::Fig2b,
        Preset::Fig2c,
        Preset::Fig3a,
        Preset::Fig3b,
        Preset::Fig3c,
        Preset::FigA1a,
        Preset::FigA1b,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig2c => "fig2c",
            Preset::Fig3a => "fig3a",
            Preset::Fig3b => "fig3b",
            Preset::Fig3c => "fig3c",
            Preset::FigA1a => "figA1a",
            Preset::FigA1b => "figA1b",
        }
    }

    pub fn schedule(&self) -> Schedule {
        let d = |a: f64, b: f64| ValueDistribution::new(a, b).expect("preset support");
        let two = |a, b| {
            Schedule::Finite(
                FiniteStateSchedule::two_state_random(a, b, STAY_RANGE).expect("preset schedule"),
            )
        };
        let langevin = |a_m, a_max| {
            Schedule::Langevin(
                LangevinSchedule::new(d(20.0, 40.0), a_m, a_max).expect("preset noise"),
            )
        };
        let cycle = |order: Vec<usize>| {
            let states = vec![d(10.0, 20.0), d(10.0, 30.0), d(20.0, 30.0), d(20.0, 40.0)];
            Schedule::Finite(
                FiniteStateSchedule::cyclic(states, order, STAY_RANGE).expect("preset cycle"),
            )
        };
        match self {
            Preset::Fig2a => two(d(10.0, 20.0), d(20.0, 40.0)),
            Preset::Fig2b => two(d(10.0, 20.0), d(20.0, 30.0)),
            Preset::Fig2c => two(d(10.0, 30.0), d(20.0, 30.0)),
            Preset::Fig3a => langevin(5.0, 10.0),
            Preset::Fig3b => langevin(5.0, 5.0),
            Preset::Fig3c => langevin(5.0, 0.0),
            Preset::FigA1a => cycle(vec![0, 1, 3, 2]),
            Preset::FigA1b => cycle(vec![0, 2, 3, 1]),
        }
    }

    pub fn config(&self, seed: u64, horizon: f64) -> RunConfig {
        RunConfig {
            n: DEFAULT_BIDDERS,
            eta: DynamicsConfig::DEFAULT_ETA,
            h: DynamicsConfig::DEFAULT_STEP,
            horizon,
            seed,
            record_every: DEFAULT_RECORD_EVERY,
            schedule: self.schedule(),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                format!(
                    "unknown preset `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}
