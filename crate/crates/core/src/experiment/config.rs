//! Run parameters and the plain-text configuration format.
//!
//! A configuration file holds one `key = value` pair per line. Blank lines
//! and text after `#` are ignored. Example:
//!
//! ```text
//! n = 10
//! eta = 2000
//! h = 0.001
//! T = 2000
//! seed = 1
//! schedule = two-state-random
//! states = (10, 20), (20, 40)
//! stay_min = 0
//! stay_max = 2
//! ```
//!
//! Cyclic and explicit-sequence schedules also take `order = 0, 1, 3, 2`.
//! A Langevin schedule uses `v_bar_m`, `v_bar_M`, `a_m` and `a_M` instead of
//! `states`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::engine::{self, RunSummary, SimulationTrace, DEFAULT_RECORD_EVERY};
use crate::environments::{FiniteStateSchedule, LangevinSchedule, Schedule, Transition};
use crate::learning::DynamicsConfig;
use crate::model::{AuctionConfig, ValueDistribution};

use super::preset::{DEFAULT_BIDDERS, DEFAULT_HORIZON, DEFAULT_SEED, STAY_RANGE};

const KEYS: [&str; 15] = [
    "n",
    "eta",
    "h",
    "T",
    "seed",
    "record_every",
    "schedule",
    "states",
    "stay_min",
    "stay_max",
    "order",
    "v_bar_m",
    "v_bar_M",
    "a_m",
    "a_M",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: `{key}` already set on line {first}")]
    DuplicateKey {
        line: usize,
        key: String,
        first: usize,
    },

    #[error("missing required key `{0}`")]
    MissingKey(&'static str),

    #[error("{}invalid `{field}`: {reason}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Invalid {
        field: &'static str,
        line: Option<usize>,
        reason: String,
    },
}

impl ConfigError {
    /// Name of the offending field, when the error concerns one.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { field, .. } => Some(field),
            ConfigError::MissingKey(k) => Some(k),
            ConfigError::UnknownKey { key, .. } | ConfigError::DuplicateKey { key, .. } => {
                Some(key)
            }
            _ => None,
        }
    }
}

/// Fully resolved parameters of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub eta: f64,
    pub h: f64,
    pub horizon: f64,
    pub seed: u64,
    pub record_every: usize,
    pub schedule: Schedule,
}

impl RunConfig {
    pub fn auction(&self) -> crate::Result<AuctionConfig> {
        AuctionConfig::new(self.n)
    }

    pub fn dynamics(&self) -> crate::Result<DynamicsConfig> {
        DynamicsConfig::new(self.eta, self.h)
    }

    pub fn execute(&self) -> crate::Result<(SimulationTrace, RunSummary)> {
        engine::run(
            &self.auction()?,
            &self.dynamics()?,
            &self.schedule,
            self.horizon,
            self.seed,
            self.record_every,
        )
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let entries = parse_entries(text)?;
        let get = |key: &str| entries.get(key).map(|(line, v)| (*line, v.as_str()));

        let n = match get("n") {
            Some((line, v)) => {
                let n: usize = parse_scalar("n", line, v)?;
                if n < 2 {
                    return Err(invalid(
                        "n",
                        Some(line),
                        format!("need at least 2 bidders, got {n}"),
                    ));
                }
                n
            }
            None => DEFAULT_BIDDERS,
        };
        let eta = positive("eta", get("eta"), DynamicsConfig::DEFAULT_ETA)?;
        let h = positive("h", get("h"), DynamicsConfig::DEFAULT_STEP)?;
        let horizon = positive("T", get("T"), DEFAULT_HORIZON)?;
        let seed = match get("seed") {
            Some((line, v)) => parse_scalar("seed", line, v)?,
            None => DEFAULT_SEED,
        };
        let record_every = match get("record_every") {
            Some((line, v)) => {
                let r: usize = parse_scalar("record_every", line, v)?;
                if r == 0 {
                    return Err(invalid(
                        "record_every",
                        Some(line),
                        "must be at least 1".into(),
                    ));
                }
                r
            }
            None => DEFAULT_RECORD_EVERY,
        };

        let (schedule_line, kind) = get("schedule").ok_or(ConfigError::MissingKey("schedule"))?;
        let schedule = if kind == "langevin" {
            for key in ["states", "stay_min", "stay_max", "order"] {
                if let Some((line, _)) = get(key) {
                    return Err(invalid_key(key, line, "not used by a langevin schedule"));
                }
            }
            let num = |key: &'static str| -> Result<(usize, f64), ConfigError> {
                let (line, v) = get(key).ok_or(ConfigError::MissingKey(key))?;
                Ok((line, parse_scalar(key, line, v)?))
            };
            let (_, v_bar_m) = num("v_bar_m")?;
            let (line_max, v_bar_max) = num("v_bar_M")?;
            let target = ValueDistribution::new(v_bar_m, v_bar_max).map_err(|_| {
                invalid(
                    "v_bar_M",
                    Some(line_max),
                    format!("must be finite and exceed v_bar_m ({v_bar_m}), got {v_bar_max}"),
                )
            })?;
            let (line_am, a_m) = num("a_m")?;
            let (line_a_max, a_max) = num("a_M")?;
            if !(a_m.is_finite() && a_m >= 0.0) {
                return Err(invalid(
                    "a_m",
                    Some(line_am),
                    format!("must be non-negative, got {a_m}"),
                ));
            }
            if !(a_max.is_finite() && a_max >= 0.0) {
                return Err(invalid(
                    "a_M",
                    Some(line_a_max),
                    format!("must be non-negative, got {a_max}"),
                ));
            }
            Schedule::Langevin(
                LangevinSchedule::new(target, a_m, a_max)
                    .map_err(|e| invalid("schedule", Some(schedule_line), e.to_string()))?,
            )
        } else {
            let transition = Transition::from_name(kind).ok_or_else(|| {
                invalid(
                    "schedule",
                    Some(schedule_line),
                    format!(
                        "unknown schedule `{kind}` (expected two-state-random, cyclic, explicit-sequence or langevin)"
                    ),
                )
            })?;
            for key in ["v_bar_m", "v_bar_M", "a_m", "a_M"] {
                if let Some((line, _)) = get(key) {
                    return Err(invalid_key(key, line, "only used by a langevin schedule"));
                }
            }
            let (states_line, states_text) =
                get("states").ok_or(ConfigError::MissingKey("states"))?;
            let states = parse_states(states_line, states_text)?;
            let stay_min = non_negative("stay_min", get("stay_min"), STAY_RANGE.0)?;
            let stay_max = non_negative("stay_max", get("stay_max"), STAY_RANGE.1)?;
            if stay_max <= stay_min {
                return Err(invalid(
                    "stay_max",
                    get("stay_max").map(|(l, _)| l),
                    format!("must exceed stay_min ({stay_min}), got {stay_max}"),
                ));
            }
            let order = match get("order") {
                Some((line, v)) => {
                    if transition == Transition::TwoStateRandom {
                        return Err(invalid_key(
                            "order",
                            line,
                            "not used by a two-state-random schedule",
                        ));
                    }
                    parse_list::<usize>("order", line, v)?
                }
                None => Vec::new(),
            };
            if let Some(&bad) = order.iter().find(|&&i| i >= states.len()) {
                return Err(invalid(
                    "order",
                    get("order").map(|(l, _)| l),
                    format!("state index {bad} out of range for {} states", states.len()),
                ));
            }
            Schedule::Finite(
                FiniteStateSchedule::new(states, transition, (stay_min, stay_max), order)
                    .map_err(|e| invalid("schedule", Some(schedule_line), e.to_string()))?,
            )
        };

        Ok(Self {
            n,
            eta,
            h,
            horizon,
            seed,
            record_every,
            schedule,
        })
    }

    /// Renders the configuration in the file format accepted by [`Self::parse`].
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "eta = {}", self.eta);
        let _ = writeln!(s, "h = {}", self.h);
        let _ = writeln!(s, "T = {}", self.horizon);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "record_every = {}", self.record_every);
        for (key, value) in self.schedule_entries() {
            let _ = writeln!(s, "{key} = {value}");
        }
        s
    }

    /// Key/value pairs describing the schedule, in file order.
    pub fn schedule_entries(&self) -> Vec<(&'static str, String)> {
        match &self.schedule {
            Schedule::Finite(f) => {
                let states: Vec<String> = f
                    .states()
                    .iter()
                    .map(|d| format!("({}, {})", d.v_min(), d.v_max()))
                    .collect();
                let mut out = vec![
                    ("schedule", f.transition().name().to_string()),
                    ("states", states.join(", ")),
                    ("stay_min", f.stay_range().0.to_string()),
                    ("stay_max", f.stay_range().1.to_string()),
                ];
                if f.transition() != Transition::TwoStateRandom {
                    let order: Vec<String> = f.order().iter().map(|i| i.to_string()).collect();
                    out.push(("order", order.join(", ")));
                }
                out
            }
            Schedule::Langevin(p) => {
                let (a_m, a_max) = p.noise();
                vec![
                    ("schedule", "langevin".to_string()),
                    ("v_bar_m", p.target().v_min().to_string()),
                    ("v_bar_M", p.target().v_max().to_string()),
                    ("a_m", a_m.to_string()),
                    ("a_M", a_max.to_string()),
                ]
            }
        }
    }
}

fn invalid(field: &'static str, line: Option<usize>, reason: String) -> ConfigError {
    ConfigError::Invalid {
        field,
        line,
        reason,
    }
}

fn invalid_key(key: &str, line: usize, reason: &str) -> ConfigError {
    let field = KEYS
        .iter()
        .find(|k| **k == key)
        .copied()
        .unwrap_or("schedule");
    invalid(field, Some(line), reason.to_string())
}

fn parse_entries(text: &str) -> Result<HashMap<String, (usize, String)>, ConfigError> {
    let mut entries: HashMap<String, (usize, String)> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        if value.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                message: format!("`{key}` has no value"),
            });
        }
        if let Some((first, _)) = entries.get(key) {
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.to_string(),
                first: *first,
            });
        }
        entries.insert(key.to_string(), (line, value.to_string()));
    }
    Ok(entries)
}

fn parse_scalar<T: std::str::FromStr>(
    field: &'static str,
    line: usize,
    v: &str,
) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    v.parse()
        .map_err(|e: T::Err| invalid(field, Some(line), format!("cannot parse `{v}`: {e}")))
}

fn positive(
    field: &'static str,
    entry: Option<(usize, &str)>,
    default: f64,
) -> Result<f64, ConfigError> {
    match entry {
        Some((line, v)) => {
            let x: f64 = parse_scalar(field, line, v)?;
            if x.is_finite() && x > 0.0 {
                Ok(x)
            } else {
                Err(invalid(
                    field,
                    Some(line),
                    format!("must be positive and finite, got {x}"),
                ))
            }
        }
        None => Ok(default),
    }
}

fn non_negative(
    field: &'static str,
    entry: Option<(usize, &str)>,
    default: f64,
) -> Result<f64, ConfigError> {
    match entry {
        Some((line, v)) => {
            let x: f64 = parse_scalar(field, line, v)?;
            if x.is_finite() && x >= 0.0 {
                Ok(x)
            } else {
                Err(invalid(
                    field,
                    Some(line),
                    format!("must be non-negative and finite, got {x}"),
                ))
            }
        }
        None => Ok(default),
    }
}

fn parse_list<T: std::str::FromStr>(
    field: &'static str,
    line: usize,
    v: &str,
) -> Result<Vec<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    v.split(',')
        .map(|item| parse_scalar(field, line, item.trim()))
        .collect()
}

/// `(a, b), (c, d), ...`
fn parse_states(line: usize, text: &str) -> Result<Vec<ValueDistribution>, ConfigError> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = compact
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| {
            invalid(
                "states",
                Some(line),
                format!("expected `(v_m, v_M), ...`, got `{text}`"),
            )
        })?;
    let mut states = Vec::new();
    for (i, pair) in inner.split("),(").enumerate() {
        let nums = parse_list::<f64>("states", line, pair)?;
        let [v_min, v_max] = nums[..] else {
            return Err(invalid(
                "states",
                Some(line),
                format!("state {} must have two numbers, got `({pair})`", i + 1),
            ));
        };
        let d = ValueDistribution::new(v_min, v_max).map_err(|_| {
            invalid(
                "states",
                Some(line),
                format!(
                    "state {}: v_M ({v_max}) must be finite and exceed v_m ({v_min})",
                    i + 1
                ),
            )
        })?;
        states.push(d);
    }
    Ok(states)
}
