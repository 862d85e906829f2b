//! Two-panel SVG of a plan: the complement c.d.f. with the chord lines and
//! segments on top, the supported c.d.f. before and after reinforcement
//! below. Every plotted series is also returned as CSV.

use std::fmt::Write as _;

use crate::io::plan::PlanFile;
use crate::model::{ComplementModel, SupportedSet};

pub const WIDTH: f64 = 960.0;
pub const HEIGHT: f64 = 720.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 930.0;
const TOP: (f64, f64) = (40.0, 340.0);
const BOTTOM: (f64, f64) = (400.0, 680.0);
const SAMPLES: usize = 400;

pub struct Plot {
    pub svg: String,
    pub csv: String,
}

struct Frame {
    x_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        LEFT + (RIGHT - LEFT) * (v / self.x_max).clamp(0.0, 1.0)
    }

    fn y(panel: (f64, f64), f: f64) -> f64 {
        panel.1 - (panel.1 - panel.0) * f.clamp(0.0, 1.0)
    }

    fn path(&self, panel: (f64, f64), pts: &[(f64, f64)]) -> String {
        let mut d = String::new();
        for (i, &(x, f)) in pts.iter().enumerate() {
            let _ = write!(
                d,
                "{}{:.2},{:.2}",
                if i == 0 { "M" } else { " L" },
                self.x(x),
                Frame::y(panel, f)
            );
        }
        d
    }
}

/// Right-continuous step c.d.f. of `scores` (sorted) over `[0, x_max]`.
fn steps(scores: &[f64], x_max: f64) -> Vec<(f64, f64)> {
    let n = scores.len() as f64;
    let mut pts = vec![(0.0, 0.0)];
    let mut i = 0;
    while i < scores.len() {
        let x = scores[i];
        let before = i as f64 / n;
        while i < scores.len() && scores[i] == x {
            i += 1;
        }
        pts.push((x, before));
        pts.push((x, i as f64 / n));
    }
    let last = pts[pts.len() - 1].1;
    pts.push((x_max, last));
    pts
}

fn complement_series(model: &ComplementModel, x_max: f64) -> Vec<(f64, f64)> {
    match model.as_empirical() {
        Some(e) => steps(e.scores(), x_max),
        None => (0..=SAMPLES)
            .map(|k| {
                let x = x_max * k as f64 / SAMPLES as f64;
                (x, model.cdf_at(x))
            })
            .collect(),
    }
}

fn x_extent(supported: &SupportedSet, model: &ComplementModel, plan: &PlanFile) -> f64 {
    let mut hi = supported.max();
    for a in &plan.assignments {
        hi = hi.max(a.to);
    }
    hi = hi.max(match model.support_upper() {
        Some(u) => u,
        None => {
            let mut x = 1.0;
            while model.cdf_at(x) < 0.995 && x < 1e12 {
                x *= 2.0;
            }
            x
        }
    });
    hi * 1.05
}

pub fn render(supported: &SupportedSet, model: &ComplementModel, plan: &PlanFile) -> Plot {
    let frame = Frame {
        x_max: x_extent(supported, model, plan),
    };
    let comp = complement_series(model, frame.x_max);
    let before = steps(supported.scores(), frame.x_max);
    let mut after_scores: Vec<f64> = plan.assignments.iter().map(|a| a.to).collect();
    after_scores.sort_by(f64::total_cmp);
    let after = steps(&after_scores, frame.x_max);

    let mut svg = String::new();
    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record(["series", "x", "y"])
        .expect("in-memory write");
    let mut emit = |name: &str, pts: &[(f64, f64)]| {
        for &(x, y) in pts {
            csv.write_record([name, &x.to_string(), &y.to_string()])
                .expect("in-memory write");
        }
    };

    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    for (panel, label) in [(TOP, "complement"), (BOTTOM, "supported")] {
        let _ = writeln!(
            svg,
            r#"<g class="axes"><line x1="{LEFT}" y1="{b}" x2="{RIGHT}" y2="{b}" stroke="black"/><line x1="{LEFT}" y1="{t}" x2="{LEFT}" y2="{b}" stroke="black"/><text x="{LEFT}" y="{ty}" font-size="14">{label}</text></g>"#,
            b = panel.1,
            t = panel.0,
            ty = panel.0 - 8.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{RIGHT}" y="{}" font-size="12" text-anchor="end">score (0 to {:.4})</text>"#,
        BOTTOM.1 + 30.0,
        frame.x_max
    );

    if plan.assignments.iter().any(|a| a.to > a.from) {
        let mut poly = before.clone();
        poly.extend(after.iter().rev().copied());
        let _ = writeln!(
            svg,
            r#"<path class="reinforced-area" d="{} Z" fill="orange" fill-opacity="0.4" stroke="none"/>"#,
            frame.path(BOTTOM, &poly)
        );
    }
    let _ = writeln!(
        svg,
        r#"<path class="cdf complement" d="{}" fill="none" stroke="black"/>"#,
        frame.path(TOP, &comp)
    );
    let _ = writeln!(
        svg,
        r#"<path class="cdf before" d="{}" fill="none" stroke="gray"/>"#,
        frame.path(BOTTOM, &before)
    );
    let _ = writeln!(
        svg,
        r#"<path class="cdf after" d="{}" fill="none" stroke="blue"/>"#,
        frame.path(BOTTOM, &after)
    );
    emit("complement_cdf", &comp);
    emit("supported_before", &before);
    emit("supported_after", &after);

    if let Some(alpha) = plan.alpha_final {
        for (i, &y) in plan.targets.iter().enumerate() {
            let low = plan
                .segments
                .iter()
                .find(|s| s.high == y)
                .map_or(y, |s| s.low);
            let fy = model.cdf_at(y);
            let line = [(low, fy - alpha * (y - low)), (y, fy)];
            let _ = writeln!(
                svg,
                r#"<path class="chord" d="{}" fill="none" stroke="red" stroke-dasharray="6,3"/>"#,
                frame.path(TOP, &line)
            );
            emit(&format!("chord_{i}"), &line);
        }
    }
    for (i, s) in plan.segments.iter().enumerate() {
        let (x0, x1) = (frame.x(s.low), frame.x(s.high));
        let _ = writeln!(
            svg,
            r#"<rect class="segment" x="{x0:.2}" y="{:.2}" width="{:.2}" height="6" fill="green" fill-opacity="0.6"/>"#,
            TOP.1 + 4.0,
            x1 - x0
        );
        emit(&format!("segment_{i}"), &[(s.low, 0.0), (s.high, 0.0)]);
    }
    svg.push_str("</svg>\n");
    let csv =
        String::from_utf8(csv.into_inner().expect("in-memory flush")).expect("csv writes UTF-8");
    Plot { svg, csv }
}
