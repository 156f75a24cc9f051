//! Minimal SVG line and scatter charts.

use std::fmt::Write;

use super::metrics::EvalReport;
use crate::vehicle::STATE_NAMES;

const PANEL_W: f64 = 720.0;
const PANEL_H: f64 = 120.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const GAP: f64 = 24.0;

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn polyline(
    out: &mut String,
    xs: &[f64],
    ys: &[f64],
    map: impl Fn(f64, f64) -> (f64, f64),
    color: &str,
) {
    let mut pts = String::new();
    for (&x, &y) in xs.iter().zip(ys) {
        if x.is_finite() && y.is_finite() {
            let (px, py) = map(x, y);
            let _ = write!(pts, "{px:.2},{py:.2} ");
        }
    }
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
        pts.trim_end()
    );
}

/// Seven stacked panels, reference in black and estimate in red, with a
/// dashed rule at the training/validation split.
pub fn state_chart(report: &EvalReport) -> String {
    let n_panels = 7;
    let height = n_panels as f64 * (PANEL_H + GAP) + 40.0;
    let width = MARGIN_L + PANEL_W + MARGIN_R;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN_L}" y="16" font-size="13">{} (train SSE {:.1}, validation SSE {:.1})</text>"#,
        report.label, report.train_sse, report.val_sse
    );
    let all_t = report
        .reference
        .times
        .iter()
        .chain(&report.estimate.times)
        .copied();
    let (t0, t1) = range(all_t);
    for c in 0..n_panels {
        let top = 30.0 + c as f64 * (PANEL_H + GAP);
        let ref_y: Vec<f64> = report.reference.states.iter().map(|r| r[c]).collect();
        let est_y: Vec<f64> = report.estimate.states.iter().map(|r| r[c]).collect();
        let (y0, y1) = range(ref_y.iter().chain(&est_y).copied());
        let map = |t: f64, y: f64| {
            (
                MARGIN_L + (t - t0) / (t1 - t0) * PANEL_W,
                top + PANEL_H - (y - y0) / (y1 - y0) * PANEL_H,
            )
        };
        let _ = writeln!(
            svg,
            r##"<rect x="{MARGIN_L}" y="{top}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="#888"/>"##
        );
        let _ = writeln!(
            svg,
            r#"<text x="8" y="{:.1}">{}</text><text x="{:.1}" y="{:.1}" text-anchor="end">{y1:.3}</text><text x="{:.1}" y="{:.1}" text-anchor="end">{y0:.3}</text>"#,
            top + PANEL_H / 2.0,
            STATE_NAMES[c],
            MARGIN_L - 4.0,
            top + 10.0,
            MARGIN_L - 4.0,
            top + PANEL_H
        );
        let (sx, _) = map(report.split_time, y0);
        let _ = writeln!(
            svg,
            r##"<line x1="{sx:.2}" y1="{top}" x2="{sx:.2}" y2="{:.1}" stroke="#444" stroke-dasharray="4 3"/>"##,
            top + PANEL_H
        );
        polyline(&mut svg, &report.reference.times, &ref_y, map, "black");
        polyline(&mut svg, &report.estimate.times, &est_y, map, "red");
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">time [s]</text>"#,
        MARGIN_L + PANEL_W / 2.0,
        height - 6.0
    );
    svg.push_str("</svg>\n");
    svg
}

/// One point of the model-selection scatter.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatterPoint {
    pub series: String,
    pub param_count: usize,
    pub val_sse: f64,
}

/// Validation error over weight count on a logarithmic y-axis; hollow
/// markers for the first series, filled for the others.
pub fn scatter_chart(points: &[ScatterPoint]) -> String {
    let (w, h) = (640.0, 420.0);
    let (ml, mb, mt, mr) = (70.0, 50.0, 20.0, 20.0);
    let finite: Vec<&ScatterPoint> = points
        .iter()
        .filter(|p| p.val_sse.is_finite() && p.val_sse > 0.0)
        .collect();
    let x_max = finite
        .iter()
        .map(|p| p.param_count as f64)
        .fold(1.0, f64::max)
        * 1.1;
    let (ly0, ly1) = {
        let (lo, hi) = range(finite.iter().map(|p| p.val_sse.log10()));
        (lo.floor(), hi.ceil())
    };
    let map = |x: f64, y: f64| {
        (
            ml + x / x_max * (w - ml - mr),
            mt + (h - mt - mb) * (1.0 - (y.log10() - ly0) / (ly1 - ly0)),
        )
    };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{ml}" y="{mt}" width="{}" height="{}" fill="none" stroke="#888"/>"##,
        w - ml - mr,
        h - mt - mb
    );
    let mut decade = ly0;
    while decade <= ly1 {
        let (_, y) = map(0.0, 10f64.powf(decade));
        let _ = writeln!(
            svg,
            r##"<line x1="{ml}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">1e{decade}</text>"##,
            w - mr,
            ml - 4.0,
            y + 4.0
        );
        decade += 1.0;
    }
    let mut series: Vec<&str> = Vec::new();
    for p in &finite {
        if !series.contains(&p.series.as_str()) {
            series.push(&p.series);
        }
    }
    for p in &finite {
        let (x, y) = map(p.param_count as f64, p.val_sse);
        let fill = if series.first() == Some(&p.series.as_str()) {
            "none"
        } else {
            "black"
        };
        let _ = writeln!(
            svg,
            r#"<circle cx="{x:.1}" cy="{y:.1}" r="3.5" stroke="black" fill="{fill}"><title>{} {} {}</title></circle>"#,
            p.series, p.param_count, p.val_sse
        );
    }
    for (i, s) in series.iter().enumerate() {
        let fill = if i == 0 { "none" } else { "black" };
        let y = mt + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.1}" cy="{y:.1}" r="3.5" stroke="black" fill="{fill}"/><text x="{:.1}" y="{:.1}">{s}</text>"#,
            w - mr - 80.0,
            w - mr - 70.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">number of network weights</text><text x="14" y="{:.1}" transform="rotate(-90 14 {:.1})" text-anchor="middle">validation error</text>"#,
        ml + (w - ml - mr) / 2.0,
        h - 12.0,
        h / 2.0,
        h / 2.0
    );
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::TrajectoryRecord;

    #[test]
    fn scatter_is_deterministic_and_complete() {
        let pts = vec![
            ScatterPoint {
                series: "node".into(),
                param_count: 92,
                val_sse: 972.0,
            },
            ScatterPoint {
                series: "ude".into(),
                param_count: 53,
                val_sse: 47.0,
            },
            ScatterPoint {
                series: "ude".into(),
                param_count: 103,
                val_sse: f64::NAN,
            },
        ];
        let a = scatter_chart(&pts);
        assert_eq!(a, scatter_chart(&pts));
        assert_eq!(a.matches("<circle").count(), 2 + 2);
    }

    #[test]
    fn state_chart_has_seven_panels() {
        let rec = TrajectoryRecord {
            times: vec![0.0, 0.1, 0.2],
            states: vec![vec![0.0; 7], vec![1.0; 7], vec![2.0; 7]],
        };
        let report = EvalReport {
            label: "ude".into(),
            config_hash: String::new(),
            train_sse: 1.0,
            val_sse: 2.0,
            ode_train_sse: 3.0,
            ode_val_sse: 4.0,
            improvement_vs_ode: 0.0,
            per_state_train: vec![0.0; 7],
            per_state_val: vec![0.0; 7],
            split_time: 0.1,
            reference: rec.clone(),
            estimate: rec,
        };
        let svg = state_chart(&report);
        assert_eq!(svg.matches("<polyline").count(), 14);
        assert_eq!(svg.matches("stroke-dasharray").count(), 7);
    }
}
