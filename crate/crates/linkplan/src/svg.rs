//! Top-down SVG renders of scenes, anchors and trajectories.
//!
//! Output depends only on the inputs: coordinates are printed with a fixed
//! number of decimals and elements are emitted in a fixed order.

use std::fmt::Write as _;

use linkplan_core::esdf::Bounds;
use linkplan_core::{Configuration, EsdfGrid, GlobalTrajectory, ReferencePath, RobotModel};

/// Pixels per meter.
const SCALE: f64 = 100.0;

#[derive(Debug, Clone, Copy, Default)]
pub struct Drawing<'a> {
    pub esdf: Option<&'a EsdfGrid>,
    pub path: Option<&'a ReferencePath>,
    pub anchors: &'a [Configuration],
    pub trajectory: Option<&'a GlobalTrajectory>,
    /// Robot snapshots drawn at uniform times along the trajectory.
    pub snapshots: usize,
}

struct Canvas {
    bounds: Bounds,
    out: String,
}

impl Canvas {
    fn x(&self, x: f64) -> f64 {
        (x - self.bounds.min[0]) * SCALE
    }

    /// SVG y grows downward.
    fn y(&self, y: f64) -> f64 {
        (self.bounds.max[1] - y) * SCALE
    }

    fn robot(&mut self, model: &RobotModel, q: &Configuration, stroke: &str) {
        let (Ok(frames), Ok(rotors)) = (model.link_frames(q), model.rotor_positions(q)) else {
            return;
        };
        let _ = writeln!(self.out, r#"<g class="robot" stroke="{stroke}" fill="none">"#);
        for f in &frames {
            let tip = [f.origin[0] + model.link_length * f.heading.cos(), f.origin[1] + model.link_length * f.heading.sin()];
            let _ = writeln!(
                self.out,
                r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke-width="3"/>"#,
                self.x(f.origin[0]),
                self.y(f.origin[1]),
                self.x(tip[0]),
                self.y(tip[1])
            );
        }
        for r in &rotors {
            let _ = writeln!(
                self.out,
                r#"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" stroke-width="1"/>"#,
                self.x(r.x),
                self.y(r.y),
                model.rotor_radius * SCALE
            );
        }
        self.out.push_str("</g>\n");
    }

    fn polyline(&mut self, points: impl Iterator<Item = [f64; 2]>, class: &str, stroke: &str, dash: bool) {
        let coords: Vec<String> = points.map(|p| format!("{:.3},{:.3}", self.x(p[0]), self.y(p[1]))).collect();
        let dash = if dash { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            self.out,
            r#"<polyline class="{class}" points="{}" fill="none" stroke="{stroke}" stroke-width="2"{dash}/>"#,
            coords.join(" ")
        );
    }
}

/// Renders `drawing` over `bounds` (m).
pub fn render_svg(model: &RobotModel, bounds: Bounds, drawing: &Drawing) -> String {
    let (w, h) = ((bounds.max[0] - bounds.min[0]) * SCALE, (bounds.max[1] - bounds.min[1]) * SCALE);
    let mut c = Canvas { bounds, out: String::new() };
    let _ = writeln!(
        c.out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.3} {h:.3}">"#
    );
    let _ = writeln!(c.out, r##"<rect width="{w:.3}" height="{h:.3}" fill="#ffffff"/>"##);

    if let Some(esdf) = drawing.esdf {
        let g = esdf.geometry;
        let size = g.resolution * SCALE;
        c.out.push_str("<g class=\"obstacles\" fill=\"#444444\">\n");
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                if esdf.at(ix, iy) <= 0.0 {
                    let p = g.cell_center(ix, iy);
                    let (x, y) = (c.x(p[0] - g.resolution / 2.0), c.y(p[1] + g.resolution / 2.0));
                    let _ = writeln!(c.out, r#"<rect x="{x:.3}" y="{y:.3}" width="{size:.3}" height="{size:.3}"/>"#);
                }
            }
        }
        c.out.push_str("</g>\n");
    }

    if let Some(path) = drawing.path {
        c.polyline(path.waypoints.iter().copied(), "reference", "#2a9d8f", true);
    }

    if let Some(traj) = drawing.trajectory {
        let n = traj.segments.iter().map(|s| 200usize.max(s.duration as usize * 20)).sum::<usize>();
        let roots: Vec<[f64; 2]> = (0..=n)
            .filter_map(|j| traj.evaluate(j as f64 / n as f64 * traj.total_duration).ok())
            .map(|q| [q[0], q[1]])
            .collect();
        c.polyline(roots.into_iter(), "root", "#e76f51", false);
        if drawing.snapshots > 0 {
            let k = drawing.snapshots;
            for j in 0..k {
                let t = if k == 1 { 0.0 } else { j as f64 / (k - 1) as f64 * traj.total_duration };
                if let Ok(q) = traj.evaluate(t) {
                    c.robot(model, &Configuration::new(q), "#f4a261");
                }
            }
        }
    }

    for q in drawing.anchors {
        c.robot(model, q, "#264653");
    }
    c.out.push_str("</svg>\n");
    c.out
}
