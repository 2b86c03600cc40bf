//! Minimal two-panel SVG plot of a trace.

use std::fmt::Write as _;

use crate::engine::SimulationTrace;

const WIDTH: f64 = 800.0;
const PANEL: f64 = 260.0;
const MARGIN: f64 = 50.0;

struct Series<'a> {
    label: &'a str,
    colour: &'a str,
    points: Vec<(f64, f64)>,
}

/// Top panel: `x`, `v_m` and `v_M`. Bottom panel: running averages of the
/// first- and second-price payoffs.
pub fn render(trace: &SimulationTrace) -> String {
    let pick = |f: fn(&crate::engine::TraceRow) -> f64| -> Vec<(f64, f64)> {
        trace.rows.iter().map(|r| (r.t, f(r))).collect()
    };
    let top = [
        Series {
            label: "x",
            colour: "#1f77b4",
            points: pick(|r| r.x),
        },
        Series {
            label: "v_m",
            colour: "#7f7f7f",
            points: pick(|r| r.v_min),
        },
        Series {
            label: "v_M",
            colour: "#bcbd22",
            points: pick(|r| r.v_max),
        },
    ];
    let bottom = [
        Series {
            label: "first-price average",
            colour: "#d62728",
            points: pick(|r| r.cum_avg_dagger),
        },
        Series {
            label: "second-price average",
            colour: "#2ca02c",
            points: pick(|r| r.cum_avg_star),
        },
    ];
    let height = 2.0 * PANEL + 3.0 * MARGIN;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    panel(&mut s, &top, MARGIN);
    panel(&mut s, &bottom, 2.0 * MARGIN + PANEL);
    s.push_str("</svg>\n");
    s
}

fn panel(s: &mut String, series: &[Series], y0: f64) {
    let all = series.iter().flat_map(|c| c.points.iter());
    let (mut t_lo, mut t_hi, mut v_lo, mut v_hi) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(t, v) in all {
        t_lo = t_lo.min(t);
        t_hi = t_hi.max(t);
        v_lo = v_lo.min(v);
        v_hi = v_hi.max(v);
    }
    if !t_lo.is_finite() {
        return;
    }
    if t_hi <= t_lo {
        t_hi = t_lo + 1.0;
    }
    if v_hi <= v_lo {
        v_hi = v_lo + 1.0;
    }
    let pad = 0.05 * (v_hi - v_lo);
    let (v_lo, v_hi) = (v_lo - pad, v_hi + pad);
    let x0 = MARGIN + 20.0;
    let w = WIDTH - x0 - MARGIN;
    let sx = |t: f64| x0 + (t - t_lo) / (t_hi - t_lo) * w;
    let sy = |v: f64| y0 + PANEL - (v - v_lo) / (v_hi - v_lo) * PANEL;

    let _ = writeln!(
        s,
        r##"<rect x="{x0}" y="{y0}" width="{w}" height="{PANEL}" fill="none" stroke="#333"/>"##
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        x0 - 4.0,
        y0 + 10.0,
        short(v_hi)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        x0 - 4.0,
        y0 + PANEL,
        short(v_lo)
    );
    let _ = writeln!(
        s,
        r#"<text x="{x0}" y="{}">{}</text>"#,
        y0 + PANEL + 14.0,
        short(t_lo)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">t = {}</text>"#,
        x0 + w,
        y0 + PANEL + 14.0,
        short(t_hi)
    );
    for (i, c) in series.iter().enumerate() {
        let mut path = String::with_capacity(c.points.len() * 16);
        for (j, &(t, v)) in c.points.iter().enumerate() {
            let _ = write!(
                path,
                "{}{:.2},{:.2}",
                if j == 0 { "M" } else { " L" },
                sx(t),
                sy(v)
            );
        }
        let _ = writeln!(
            s,
            r#"<path d="{path}" fill="none" stroke="{}" stroke-width="1"/>"#,
            c.colour
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{}">{}</text>"#,
            x0 + 8.0 + 170.0 * i as f64,
            y0 - 6.0,
            c.colour,
            c.label
        );
    }
}

fn short(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e5) {
        format!("{v:.3e}")
    } else {
        format!("{v:.3}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::Preset;

    #[test]
    fn renders_both_panels() {
        let (trace, _) = Preset::Fig3a.config(1, 5.0).execute().unwrap();
        let svg = render(&trace);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<path").count(), 5);
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn empty_trace_is_still_valid() {
        let trace = SimulationTrace {
            n: 2,
            record_every: 1,
            h: 1e-3,
            rows: vec![],
        };
        let svg = render(&trace);
        assert!(svg.contains("</svg>"));
        assert_eq!(svg.matches("<path").count(), 0);
    }
}
