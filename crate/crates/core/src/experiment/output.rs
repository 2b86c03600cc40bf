//! `trace.csv` and `summary.txt` writers, and a summary reader.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use crate::engine::{RunSummary, SimulationTrace, Verdict};

use super::config::RunConfig;
use super::svg;

pub const TRACE_HEADER: &str = "t,x,v_m,v_M,w_dagger,w_star,cum_avg_dagger,cum_avg_star";
pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const PLOT_FILE: &str = "plot.svg";

/// Scientific notation with 17 significant digits; parses back exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_else(|| "none".to_string())
}

pub fn trace_csv(trace: &SimulationTrace) -> String {
    let mut s = String::with_capacity(200 * (trace.rows.len() + 1));
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for r in &trace.rows {
        let fields = [
            r.t,
            r.x,
            r.v_min,
            r.v_max,
            r.w_dagger,
            r.w_star,
            r.cum_avg_dagger,
            r.cum_avg_star,
        ];
        for (i, v) in fields.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&fmt_f64(*v));
        }
        s.push('\n');
    }
    s
}

/// Result lines first, then the parameter echo in config-file syntax.
pub fn summary_text(config: &RunConfig, summary: &RunSummary) -> String {
    let mut s = String::new();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    line("verdict", summary.verdict.to_string());
    line("gap", fmt_f64(summary.gap));
    line("w_bar_dagger", fmt_f64(summary.w_bar_dagger));
    line("w_bar_star", fmt_f64(summary.w_bar_star));
    line("bound_low", fmt_opt(summary.bound_low));
    line("bound_high", fmt_opt(summary.bound_high));
    line("exact_two_state_gap", fmt_opt(summary.exact_two_state_gap));
    line(
        "equivalence_envelope",
        fmt_f64(summary.equivalence_envelope),
    );
    line("path_length", fmt_f64(summary.path_length));
    line("path_rate", fmt_f64(summary.path_rate));
    line("total_ascent", fmt_f64(summary.total_ascent));
    line("total_descent", fmt_f64(summary.total_descent));
    line("x_initial", fmt_f64(summary.x_initial));
    line("x_final", fmt_f64(summary.x_final));
    line("x_min", fmt_f64(summary.x_min));
    line("x_max", fmt_f64(summary.x_max));
    line("width_min", fmt_f64(summary.width_min));
    line("width_max", fmt_f64(summary.width_max));
    line("switches", summary.switches.to_string());
    line("guard_triggers", summary.guard_triggers.to_string());
    line("steps", summary.steps.to_string());
    line("horizon", fmt_f64(summary.horizon));
    s.push_str("# parameters\n");
    s.push_str(&config.to_config_string());
    s
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("summary line {line}: {message}")]
pub struct SummaryParseError {
    pub line: usize,
    pub message: String,
}

/// A parsed `summary.txt`: the run statistics plus every raw key.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSummary {
    pub summary: RunSummary,
    pub entries: HashMap<String, String>,
}

impl ParsedSummary {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

pub fn parse_summary(text: &str) -> Result<ParsedSummary, SummaryParseError> {
    let mut entries = HashMap::new();
    let mut lines = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| SummaryParseError {
            line: i + 1,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        entries.insert(k.trim().to_string(), v.trim().to_string());
        lines.insert(k.trim().to_string(), i + 1);
    }
    let raw = |k: &str| {
        entries
            .get(k)
            .map(String::as_str)
            .ok_or_else(|| SummaryParseError {
                line: 0,
                message: format!("missing key `{k}`"),
            })
    };
    let bad = |k: &str, v: &str| SummaryParseError {
        line: lines.get(k).copied().unwrap_or(0),
        message: format!("bad value `{v}` for `{k}`"),
    };
    let float = |k: &str| -> Result<f64, SummaryParseError> {
        let v = raw(k)?;
        v.parse().map_err(|_| bad(k, v))
    };
    let int = |k: &str| -> Result<u64, SummaryParseError> {
        let v = raw(k)?;
        v.parse().map_err(|_| bad(k, v))
    };
    let opt = |k: &str| -> Result<Option<f64>, SummaryParseError> {
        match raw(k)? {
            "none" => Ok(None),
            v => v.parse().map(Some).map_err(|_| bad(k, v)),
        }
    };
    let verdict_text = raw("verdict")?;
    let verdict: Verdict = verdict_text
        .parse()
        .map_err(|_| bad("verdict", verdict_text))?;
    let summary = RunSummary {
        horizon: float("horizon")?,
        steps: int("steps")?,
        w_bar_dagger: float("w_bar_dagger")?,
        w_bar_star: float("w_bar_star")?,
        gap: float("gap")?,
        path_length: float("path_length")?,
        path_rate: float("path_rate")?,
        total_ascent: float("total_ascent")?,
        total_descent: float("total_descent")?,
        x_initial: float("x_initial")?,
        x_final: float("x_final")?,
        x_min: float("x_min")?,
        x_max: float("x_max")?,
        width_min: float("width_min")?,
        width_max: float("width_max")?,
        switches: int("switches")?,
        guard_triggers: int("guard_triggers")?,
        equivalence_envelope: float("equivalence_envelope")?,
        bound_low: opt("bound_low")?,
        bound_high: opt("bound_high")?,
        exact_two_state_gap: opt("exact_two_state_gap")?,
        verdict,
    };
    Ok(ParsedSummary { summary, entries })
}

/// Paths of the files written for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct WrittenFiles {
    pub trace: PathBuf,
    pub summary: PathBuf,
    pub plot: Option<PathBuf>,
}

/// Writes `trace.csv`, `summary.txt` and optionally `plot.svg` into `dir`,
/// creating it if needed.
pub fn write_run(
    dir: &Path,
    config: &RunConfig,
    trace: &SimulationTrace,
    summary: &RunSummary,
    plot: bool,
) -> io::Result<WrittenFiles> {
    std::fs::create_dir_all(dir)?;
    let trace_path = dir.join(TRACE_FILE);
    let summary_path = dir.join(SUMMARY_FILE);
    std::fs::write(&trace_path, trace_csv(trace))?;
    std::fs::write(&summary_path, summary_text(config, summary))?;
    let plot = if plot {
        let p = dir.join(PLOT_FILE);
        std::fs::write(&p, svg::render(trace))?;
        Some(p)
    } else {
        None
    };
    Ok(WrittenFiles {
        trace: trace_path,
        summary: summary_path,
        plot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::Preset;

    fn small_run(p: Preset) -> (RunConfig, SimulationTrace, RunSummary) {
        let c = p.config(3, 20.0);
        let (t, s) = c.execute().unwrap();
        (c, t, s)
    }

    #[test]
    fn float_format_round_trips() {
        for x in [
            0.0,
            -0.0,
            1.0,
            0.1,
            -1.234e-300,
            f64::MAX,
            5e-324,
            1.0 / 3.0,
        ] {
            let y: f64 = fmt_f64(x).parse().unwrap();
            assert_eq!(x.to_bits(), y.to_bits(), "{x}");
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let (_, trace, _) = small_run(Preset::Fig2a);
        let csv = trace_csv(&trace);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        let rows: Vec<_> = lines.collect();
        assert_eq!(rows.len(), trace.rows.len());
        let first: Vec<f64> = rows[0].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(first.len(), 8);
        assert_eq!(first[0], 0.0);
        assert_eq!(first[1], first[2]);
    }

    #[test]
    fn summary_round_trips() {
        for p in [Preset::Fig2a, Preset::Fig3a, Preset::FigA1a] {
            let (c, _, s) = small_run(p);
            let text = summary_text(&c, &s);
            let parsed = parse_summary(&text).unwrap();
            assert_eq!(parsed.summary, s, "{p}");
            assert_eq!(parsed.get("seed"), Some("3"));
            assert_eq!(
                parsed.get("schedule"),
                Some(c.schedule_entries()[0].1.as_str())
            );
        }
    }

    #[test]
    fn summary_echo_is_a_valid_config() {
        let (c, _, s) = small_run(Preset::Fig2c);
        let text = summary_text(&c, &s);
        let echo = text.split_once("# parameters\n").unwrap().1;
        assert_eq!(RunConfig::parse(echo).unwrap(), c);
    }

    #[test]
    fn missing_bounds_are_written_as_none() {
        let (c, _, s) = small_run(Preset::Fig3b);
        let text = summary_text(&c, &s);
        assert!(text.contains("bound_low = none\n"));
        assert!(text.contains("exact_two_state_gap = none\n"));
    }

    #[test]
    fn parse_errors_name_the_key() {
        let e = parse_summary("verdict = MAYBE\n").unwrap_err();
        assert!(e.message.contains("missing") || e.message.contains("verdict"));
        let (c, _, s) = small_run(Preset::Fig2a);
        let text = summary_text(&c, &s).replace("switches = ", "switches = x");
        assert!(parse_summary(&text)
            .unwrap_err()
            .message
            .contains("switches"));
    }

    #[test]
    fn writes_files() {
        let (c, t, s) = small_run(Preset::Fig2b);
        let dir = tempfile::tempdir().unwrap();
        let out = write_run(&dir.path().join("nested"), &c, &t, &s, true).unwrap();
        assert_eq!(std::fs::read_to_string(&out.trace).unwrap(), trace_csv(&t));
        assert!(std::fs::read_to_string(out.plot.unwrap())
            .unwrap()
            .starts_with("<svg"));
    }
}
