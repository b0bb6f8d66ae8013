//! Hand-written three-panel SVG for `f`, `f'` and `f''`. Output depends only
//! on the samples, so identical input gives identical bytes.

use std::fmt::Write;

use telescope_core::hard_instance::{CurveSample, Knot};

const PANEL_W: f64 = 320.0;
const PANEL_H: f64 = 240.0;
const MARGIN: f64 = 40.0;
const GAP: f64 = 30.0;

struct Frame {
    left: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

impl Frame {
    fn new(index: usize, x_range: (f64, f64), values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
        if !(lo.is_finite() && hi.is_finite()) {
            (lo, hi) = (0.0, 1.0);
        }
        let pad = if hi > lo {
            0.05 * (hi - lo)
        } else {
            0.5 * lo.abs().max(1.0)
        };
        Self {
            left: MARGIN + index as f64 * (PANEL_W + GAP),
            x_range,
            y_range: (lo - pad, hi + pad),
        }
    }

    fn sx(&self, x: f64) -> f64 {
        let (a, b) = self.x_range;
        self.left + (x - a) / (b - a) * PANEL_W
    }

    fn sy(&self, y: f64) -> f64 {
        let (a, b) = self.y_range;
        MARGIN + PANEL_H - (y - a) / (b - a) * PANEL_H
    }
}

fn polyline(out: &mut String, frame: &Frame, points: &[(f64, f64)], class: &str) {
    if points.is_empty() {
        return;
    }
    let coords: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.3},{:.3}", frame.sx(x), frame.sy(y)))
        .collect();
    let _ = writeln!(
        out,
        r#"  <polyline class="{class}" fill="none" stroke="black" stroke-width="1.2" points="{}"/>"#,
        coords.join(" ")
    );
}

fn axes(out: &mut String, frame: &Frame, title: &str) {
    let (x0, x1) = frame.x_range;
    let (y0, y1) = frame.y_range;
    let _ = writeln!(
        out,
        r#"  <rect x="{:.3}" y="{MARGIN:.3}" width="{PANEL_W:.3}" height="{PANEL_H:.3}" fill="none" stroke="gray"/>"#,
        frame.left
    );
    let _ = writeln!(
        out,
        r#"  <text x="{:.3}" y="{:.3}" font-size="14" text-anchor="middle">{title}</text>"#,
        frame.left + PANEL_W / 2.0,
        MARGIN - 12.0
    );
    let label = |out: &mut String, x: f64, y: f64, anchor: &str, v: f64| {
        let _ = writeln!(
            out,
            r#"  <text x="{x:.3}" y="{y:.3}" font-size="10" text-anchor="{anchor}">{v:.4}</text>"#
        );
    };
    let bottom = MARGIN + PANEL_H + 14.0;
    label(out, frame.left, bottom, "start", x0);
    label(out, frame.left + PANEL_W, bottom, "end", x1);
    label(out, frame.left - 4.0, MARGIN + PANEL_H, "end", y0);
    label(out, frame.left - 4.0, MARGIN + 8.0, "end", y1);
    if y0 < 0.0 && y1 > 0.0 {
        let y = frame.sy(0.0);
        let _ = writeln!(
            out,
            r#"  <line x1="{:.3}" y1="{y:.3}" x2="{:.3}" y2="{y:.3}" stroke="lightgray"/>"#,
            frame.left,
            frame.left + PANEL_W
        );
    }
}

fn knot_marker(out: &mut String, frame: &Frame, k: usize, x: f64, y: f64) {
    let _ = writeln!(
        out,
        r#"  <circle class="knot" data-k="{k}" data-x="{x:e}" data-y="{y:e}" cx="{:.3}" cy="{:.3}" r="2.5"/>"#,
        frame.sx(x),
        frame.sy(y)
    );
}

/// Renders the panels. `f''` is split wherever its one-sided values differ,
/// leaving a vertical gap at each jump.
pub fn render(samples: &[CurveSample], knots: &[Knot]) -> String {
    let x_range = match (samples.first(), samples.last()) {
        (Some(a), Some(b)) if b.x > a.x => (a.x, b.x),
        (Some(a), _) => (a.x - 0.5, a.x + 0.5),
        _ => (0.0, 1.0),
    };
    let width = 2.0 * MARGIN + 3.0 * PANEL_W + 2.0 * GAP;
    let height = 2.0 * MARGIN + PANEL_H + 10.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );

    let f = Frame::new(0, x_range, samples.iter().map(|s| s.f));
    axes(&mut out, &f, "f");
    let pts: Vec<_> = samples.iter().map(|s| (s.x, s.f)).collect();
    polyline(&mut out, &f, &pts, "f");
    for k in knots {
        knot_marker(&mut out, &f, k.k, k.x, k.f);
    }

    let g = Frame::new(1, x_range, samples.iter().map(|s| s.fprime));
    axes(&mut out, &g, "f'");
    let pts: Vec<_> = samples.iter().map(|s| (s.x, s.fprime)).collect();
    polyline(&mut out, &g, &pts, "fprime");
    for k in knots {
        knot_marker(&mut out, &g, k.k, k.x, k.g);
    }

    let h = Frame::new(
        2,
        x_range,
        samples
            .iter()
            .flat_map(|s| [s.fsecond_left, s.fsecond_right]),
    );
    axes(&mut out, &h, "f''");
    let mut piece: Vec<(f64, f64)> = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        if i > 0 && s.fsecond_left != s.fsecond_right {
            piece.push((s.x, s.fsecond_left));
            polyline(&mut out, &h, &piece, "fsecond");
            piece.clear();
        }
        piece.push((s.x, s.fsecond_right));
    }
    if piece.len() > 1 {
        polyline(&mut out, &h, &piece, "fsecond");
    }

    out.push_str("</svg>\n");
    out
}
