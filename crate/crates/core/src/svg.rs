//! Minimal deterministic SVG output for mazes and robot trajectories.
//! Coordinates are in cm with y pointing up; numbers are printed with three
//! decimals so the bytes depend only on the input.

use std::fmt::Write as _;

use crate::maze::{Heading, MazeSpec, Point2D};
use crate::motion::EncoderLog;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Drawing {
    pub lines: Vec<(Point2D, Point2D)>,
    pub nodes: Vec<(String, Point2D)>,
    pub trajectory: Vec<Point2D>,
    pub turns: Vec<Point2D>,
}

impl Drawing {
    pub fn from_maze(maze: &MazeSpec) -> Self {
        let at = |id: &str| maze.position(id).expect("edge endpoints exist");
        Drawing {
            lines: maze.edges().iter().map(|e| (at(&e.a), at(&e.b))).collect(),
            nodes: maze.nodes().iter().map(|n| (n.id.clone(), n.position)).collect(),
            ..Drawing::default()
        }
    }

    /// Appends a segment's midpoint trajectory, logged in the segment frame
    /// (x along the line, y to the left), placed at `start` facing `heading`.
    pub fn add_segment(&mut self, start: Point2D, heading: Heading, log: &EncoderLog) {
        let (ux, uy) = heading.unit();
        let place = |p: &Point2D| Point2D::new(start.x + p.x * ux - p.y * uy, start.y + p.x * uy + p.y * ux);
        if let Some(path) = &log.trajectory {
            for p in path {
                let q = place(p);
                if self.trajectory.last() != Some(&q) {
                    self.trajectory.push(q);
                }
            }
        }
        self.turns.extend(log.pivots.iter().map(place));
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let all = self
            .lines
            .iter()
            .flat_map(|(a, b)| [*a, *b])
            .chain(self.nodes.iter().map(|(_, p)| *p))
            .chain(self.trajectory.iter().copied());
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in all {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        if !x0.is_finite() {
            return (0.0, 0.0, 1.0, 1.0);
        }
        (x0, y0, x1, y1)
    }

    pub fn render(&self) -> String {
        // flip to screen coordinates without printing "-0.000"
        let flip = |y: f64| 0.0 - y;
        let (x0, y0, x1, y1) = self.bounds();
        let margin = 2.0;
        let (w, h) = (x1 - x0 + 2.0 * margin, y1 - y0 + 2.0 * margin);
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.3} {:.3} {:.3} {:.3}" width="{:.0}" height="{:.0}">"#,
            x0 - margin,
            flip(y1) - margin,
            w,
            h,
            w * 10.0,
            h * 10.0
        );
        let _ = writeln!(out, r#"<g stroke="black" stroke-width="0.5" stroke-linecap="round">"#);
        for (a, b) in &self.lines {
            let _ = writeln!(
                out,
                r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
                a.x,
                flip(a.y),
                b.x,
                flip(b.y)
            );
        }
        out.push_str("</g>\n");
        for (name, p) in &self.nodes {
            let _ = writeln!(
                out,
                r#"<circle class="node" cx="{:.3}" cy="{:.3}" r="0.6" fill="black"><title>{name}</title></circle>"#,
                p.x,
                flip(p.y)
            );
        }
        if !self.trajectory.is_empty() {
            let pts: Vec<String> = self
                .trajectory
                .iter()
                .map(|p| format!("{:.3},{:.3}", p.x, flip(p.y)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline class="trajectory" fill="none" stroke="red" stroke-width="0.1" points="{}"/>"#,
                pts.join(" ")
            );
        }
        for p in &self.turns {
            let _ = writeln!(
                out,
                r#"<circle class="turn" cx="{:.3}" cy="{:.3}" r="0.15" fill="blue"/>"#,
                p.x,
                flip(p.y)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}
