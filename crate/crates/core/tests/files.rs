//! Configuration files, presets and output files.

use std::fs;

use tvauction::experiment::output::{SUMMARY_FILE, TRACE_FILE};
use tvauction::experiment::{parse_summary, write_run, Preset, RunConfig};

const FIG2A_FILE: &str = "\
# same parameters as the fig2a preset
schedule = two-state-random
states = (10, 20), (20, 40)
stay_min = 0
stay_max = 2
T = 300
seed = 9
";

#[test]
fn config_file_reproduces_preset_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig2a.cfg");
    fs::write(&path, FIG2A_FILE).unwrap();

    let from_file = RunConfig::from_file(&path).unwrap();
    let preset = Preset::Fig2a.config(9, 300.0);
    assert_eq!(from_file, preset);

    let (ta, sa) = from_file.execute().unwrap();
    let (tb, sb) = preset.execute().unwrap();
    write_run(&dir.path().join("a"), &from_file, &ta, &sa, false).unwrap();
    write_run(&dir.path().join("b"), &preset, &tb, &sb, false).unwrap();
    for f in [TRACE_FILE, SUMMARY_FILE] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn constant_schedule_has_zero_gap() {
    let c = RunConfig::parse("schedule = cyclic\nstates = (10, 20)\nT = 50\n").unwrap();
    let (_, s) = c.execute().unwrap();
    assert_eq!(s.gap, 0.0);
    assert_eq!(s.switches, 0);
    assert_eq!(s.verdict.as_str(), "EQUIVALENT");
}

#[test]
fn summary_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for p in Preset::ALL {
        let c = p.config(4, 40.0);
        let (t, s) = c.execute().unwrap();
        let out = dir.path().join(p.name());
        let files = write_run(&out, &c, &t, &s, false).unwrap();
        let parsed = parse_summary(&fs::read_to_string(files.summary).unwrap()).unwrap();
        assert_eq!(parsed.summary, s, "{p}");
        assert_eq!(parsed.get("seed"), Some("4"));
        assert_eq!(parsed.get("n"), Some("10"));
    }
}

#[test]
fn trace_csv_round_trips_rows() {
    let c = Preset::Fig3a.config(2, 30.0);
    let (t, s) = c.execute().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = write_run(dir.path(), &c, &t, &s, false).unwrap();
    let text = fs::read_to_string(files.trace).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), t.rows.len());
    for (r, row) in rows.iter().zip(&t.rows) {
        let expected = [
            row.t,
            row.x,
            row.v_min,
            row.v_max,
            row.w_dagger,
            row.w_star,
            row.cum_avg_dagger,
            row.cum_avg_star,
        ];
        assert_eq!(r.as_slice(), expected.as_slice());
    }
}

#[test]
fn reversed_support_is_rejected_with_field() {
    let e =
        RunConfig::parse("schedule = two-state-random\nstates = (10, 20), (40, 20)\n").unwrap_err();
    assert_eq!(e.field(), Some("states"));
    assert!(
        e.to_string()
            .contains("v_M (20) must be finite and exceed v_m (40)"),
        "{e}"
    );
}
