//! Two-panel SVG convergence plots: trailing-mean objective against
//! iteration and against elapsed seconds. Full-objective values appear as
//! markers. Output depends only on the inputs.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::optimizer::TraceRecord;

const WIDTH: f64 = 1000.0;
const HEIGHT: f64 = 420.0;
const PANEL_W: f64 = 400.0;
const PANEL_H: f64 = 280.0;
const TOP: f64 = 50.0;
const LEFTS: [f64; 2] = [80.0, 570.0];
const PALETTE: [&str; 8] =
    ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Component count implied by a trace.
pub fn components_in(trace: &[TraceRecord]) -> usize {
    trace.iter().map(|r| r.j + 1).max().unwrap_or(1)
}

/// Mean of `f_j_after` over the trailing `window` records ending at each index.
pub fn trailing_mean(trace: &[TraceRecord], window: usize) -> Vec<f64> {
    let window = window.max(1);
    (0..trace.len())
        .map(|i| {
            let from = (i + 1).saturating_sub(window);
            trace[from..=i].iter().map(|r| r.f_j_after).sum::<f64>() / (i + 1 - from) as f64
        })
        .collect()
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite()) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo <= 1e-12 * (1.0 + lo.abs()) {
            let pad = 0.5 * (1.0 + lo.abs() * 0.1);
            (lo, hi) = (lo - pad, hi + pad);
        }
        Axis { lo, hi, log }
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn tick_label(&self, t: f64) -> String {
        let v = if self.log { 10f64.powf(t) } else { t };
        format!("{v:.3e}")
    }
}

fn coord(v: f64) -> String {
    format!("{v:.2}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders the plot to a string. `log_scale` falls back to a linear axis
/// when any plotted objective value is not positive.
pub fn render_convergence_svg(traces: &[(String, Vec<TraceRecord>)], log_scale: bool) -> Result<String> {
    if traces.is_empty() || traces.iter().all(|(_, t)| t.is_empty()) {
        return Err(Error::InvalidArgument("nothing to plot: no trace records".into()));
    }
    let series: Vec<(Vec<f64>, Vec<f64>, Vec<(usize, f64)>)> = traces
        .iter()
        .map(|(_, t)| {
            let mean = trailing_mean(t, components_in(t));
            let iters = t.iter().map(|r| (r.k + 1) as f64).collect();
            let marks = t.iter().enumerate().filter_map(|(i, r)| r.full_f.map(|f| (i, f))).collect();
            (mean, iters, marks)
        })
        .collect();
    let objective_values = || {
        series.iter().flat_map(|(mean, _, marks)| mean.iter().copied().chain(marks.iter().map(|m| m.1)))
    };
    let log = log_scale && objective_values().filter(|v| v.is_finite()).all(|v| v > 0.0);
    let y = Axis::fit(objective_values(), log);
    let x_iter = Axis::fit(series.iter().flat_map(|(_, it, _)| it.iter().copied()).chain([0.0]), false);
    let x_time = Axis::fit(traces.iter().flat_map(|(_, t)| t.iter().map(|r| r.elapsed)).chain([0.0]), false);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#,
        w = WIDTH,
        h = HEIGHT
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let y_label = if log { "trailing-mean objective (log)" } else { "trailing-mean objective" };
    for (panel, (x_axis, x_label)) in [(&x_iter, "iteration"), (&x_time, "elapsed seconds")].into_iter().enumerate() {
        let left = LEFTS[panel];
        let px = |v: f64| left + x_axis.frac(v) * PANEL_W;
        let py = |v: f64| TOP + (1.0 - y.frac(v)) * PANEL_H;
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            coord(left),
            coord(TOP),
            coord(PANEL_W),
            coord(PANEL_H)
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xt = x_axis.lo + f * (x_axis.hi - x_axis.lo);
            let gx = left + f * PANEL_W;
            let _ = writeln!(
                s,
                r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/><text x="{0}" y="{3}" text-anchor="middle">{4}</text>"#,
                coord(gx),
                coord(TOP + PANEL_H),
                coord(TOP + PANEL_H + 5.0),
                coord(TOP + PANEL_H + 18.0),
                x_axis.tick_label(xt)
            );
            let yt = y.lo + f * (y.hi - y.lo);
            let gy = TOP + (1.0 - f) * PANEL_H;
            let _ = writeln!(
                s,
                r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black"/><text x="{3}" y="{4}" text-anchor="end">{5}</text>"#,
                coord(left - 5.0),
                coord(gy),
                coord(left),
                coord(left - 7.0),
                coord(gy + 4.0),
                y.tick_label(yt)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            coord(left + PANEL_W / 2.0),
            coord(TOP + PANEL_H + 36.0),
            x_label
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{} vs {}</text>"#,
            coord(left + PANEL_W / 2.0),
            coord(TOP - 12.0),
            y_label,
            x_label
        );

        for (idx, ((label, trace), (mean, iters, marks))) in traces.iter().zip(&series).enumerate() {
            let color = PALETTE[idx % PALETTE.len()];
            let xs: Vec<f64> = if panel == 0 { iters.clone() } else { trace.iter().map(|r| r.elapsed).collect() };
            let points: Vec<String> = xs
                .iter()
                .zip(mean)
                .filter(|(_, m)| m.is_finite())
                .map(|(&xv, &m)| format!("{},{}", coord(px(xv)), coord(py(m))))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline data-label="{}" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                escape(label),
                color,
                points.join(" ")
            );
            for &(i, f) in marks.iter().filter(|m| m.1.is_finite()) {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{}" cy="{}" r="3" fill="none" stroke="{}"/>"#,
                    coord(px(xs[i])),
                    coord(py(f)),
                    color
                );
            }
        }
    }
    for (idx, (label, _)) in traces.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let ly = HEIGHT - 30.0 + (idx / 4) as f64 * 14.0 - 14.0 * ((traces.len() - 1) / 4) as f64;
        let lx = 80.0 + (idx % 4) as f64 * 220.0;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            coord(lx),
            coord(ly),
            coord(lx + 20.0),
            coord(ly),
            color,
            coord(lx + 25.0),
            coord(ly + 4.0),
            escape(label)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}">circles: full objective</text>"#,
        coord(WIDTH - 170.0),
        coord(20.0)
    );
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn render_convergence_plot(traces: &[(String, Vec<TraceRecord>)], path: &Path, log_scale: bool) -> Result<()> {
    let svg = render_convergence_svg(traces, log_scale)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(n: usize, f: f64) -> Vec<TraceRecord> {
        (0..n)
            .map(|k| TraceRecord {
                k,
                j: k % 2,
                f_j_before: f,
                f_j_after: f,
                full_f: (k % 2 == 1).then_some(f),
                alpha: 0.0,
                mu: None,
                fallback_used: false,
                elapsed: k as f64 * 1e-3,
                slope: 0.0,
            })
            .collect()
    }

    #[test]
    fn trailing_mean_window() {
        let mut t = flat(4, 0.0);
        for (i, r) in t.iter_mut().enumerate() {
            r.f_j_after = i as f64;
        }
        assert_eq!(trailing_mean(&t, 2), vec![0.0, 0.5, 1.5, 2.5]);
    }

    #[test]
    fn constant_trace_is_a_horizontal_line() {
        let svg = render_convergence_svg(&[("flat".into(), flat(5, 2.0))], false).unwrap();
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let pts = line.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
        let ys: Vec<&str> = pts.split(' ').map(|p| p.split(',').nth(1).unwrap()).collect();
        assert_eq!(ys.len(), 5);
        assert!(ys.iter().all(|y| *y == ys[0]));
    }

    #[test]
    fn two_traces_two_labels_and_stable_bytes() {
        let traces = vec![("a<1>".to_string(), flat(4, 1.0)), ("b".to_string(), flat(6, 3.0))];
        let svg = render_convergence_svg(&traces, true).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 4);
        assert!(svg.contains(r#"data-label="a&lt;1&gt;""#));
        assert!(svg.contains(r#"data-label="b""#));
        assert!(svg.contains("(log)"));
        assert_eq!(svg, render_convergence_svg(&traces, true).unwrap());
    }

    #[test]
    fn log_scale_falls_back_for_nonpositive_values() {
        let svg = render_convergence_svg(&[("neg".into(), flat(3, -1.0))], true).unwrap();
        assert!(!svg.contains("(log)"));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(render_convergence_svg(&[], false).is_err());
        assert!(render_convergence_svg(&[("e".into(), vec![])], false).is_err());
    }
}
