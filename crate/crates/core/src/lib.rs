//! Learning dynamics of first-price bidders facing a time-varying uniform
//! value distribution, and the resulting time-average revenue comparison
//! against second-price auctions.
//!
//! - [`model`]: uniform values, equilibrium bids, expected payments.
//! - [`learning`]: deviant payoff `w(x', x)`, its gradient and the RK4 stepper.
//! - [`environments`]: finite-state and Langevin value schedules.
//! - [`engine`]: simulation runs, time averages and theorem bounds.
//! - [`oracle`]: Monte-Carlo auctions used to validate the closed forms.
//! - [`experiment`]: presets, run configuration files, output formats and
//!   the validation battery behind the `tvauction` command.

pub mod engine;
pub mod environments;
pub mod error;
pub mod experiment;
pub mod learning;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod stats;

pub use engine::{run, RunSummary, SimulationTrace, TraceRow, Verdict};
pub use environments::{FiniteStateSchedule, LangevinSchedule, Schedule, Transition};
pub use error::{Error, Result};
pub use learning::{DynamicsConfig, LearnerState};
pub use model::{AuctionConfig, ValueDistribution};
pub use oracle::McEstimate;
