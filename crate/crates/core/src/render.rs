//! SVG rendering of combined graphs.
//!
//! The horizontal axis is `q`, the vertical axis the value, both with the same scale so
//! that every segment is drawn at ±45°. Output is deterministic: every coordinate is
//! printed with six decimals.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::arith::LatticePoint;
use crate::envelope::{CombinedGraph, PiecewiseLinear, Tail};
use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

const MARGIN: f64 = 24.0;

#[derive(Clone, Debug, PartialEq)]
pub struct RenderConfig {
    /// Right end of the plot window, in the same units as `q`.
    pub q_max: f64,
    pub width: u32,
    pub height: u32,
    pub show_trajectories: bool,
    pub show_q_labels: bool,
}

impl RenderConfig {
    /// Window reaching a quarter past the last vertex (or to `q = 1` for a single vertex).
    pub fn for_graph(graph: &CombinedGraph) -> Self {
        let last = graph.abscissae().last().map_or(0.0, |q| q.to_f64());
        let q_max = match graph.l1().tail() {
            Tail::Truncated if last > 0.0 => last,
            _ if last > 0.0 => last * 1.25,
            _ => 1.0,
        };
        Self {
            q_max,
            width: 640,
            height: 400,
            show_trajectories: false,
            show_q_labels: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q_max.is_finite() && self.q_max > 0.0) {
            return Err(Error::RenderConfig(format!(
                "q_max must be positive, got {}",
                self.q_max
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::RenderConfig(format!(
                "width and height must be positive, got {}x{}",
                self.width, self.height
            )));
        }
        if f64::from(self.width) <= 2.0 * MARGIN || f64::from(self.height) <= 2.0 * MARGIN {
            return Err(Error::RenderConfig(format!(
                "canvas {}x{} leaves no room inside the {MARGIN}px margins",
                self.width, self.height
            )));
        }
        Ok(())
    }
}

/// Fixed six-decimal formatting without negative zero.
fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s.trim_start_matches('-')
        .chars()
        .all(|c| c == '0' || c == '.')
    {
        "0.000000".to_string()
    } else {
        s
    }
}

/// The function sampled at its vertices inside `[0, q_max]`, closed off at `q_max`.
fn float_points(f: &PiecewiseLinear, q_max: f64) -> Vec<(f64, f64)> {
    let mut pts = Vec::new();
    let verts = f.vertices();
    for (i, v) in verts.iter().enumerate() {
        let (q, y) = (v.q.to_f64(), v.v.to_f64());
        if q > q_max {
            let (pq, py) = *pts.last().expect("first vertex lies at q = 0");
            let slope = f64::from(f.slope_from(i - 1).expect("segment").as_i8());
            pts.push((q_max, py + slope * (q_max - pq)));
            return pts;
        }
        pts.push((q, y));
    }
    if let (Tail::Ray(slope), Some(&(pq, py))) = (f.tail(), pts.last()) {
        if q_max > pq {
            pts.push((q_max, py + f64::from(slope.as_i8()) * (q_max - pq)));
        }
    }
    pts
}

fn trajectory_points(t: &Trajectory, q_max: f64) -> Vec<(f64, f64)> {
    let fall = t.falling_level().map(|f| f.to_f64());
    let rise = t.rising_level().map(|r| r.to_f64());
    let at = |q: f64| match (fall, rise) {
        (Some(f), Some(r)) => (f - q).max(r + q),
        (Some(f), None) => f - q,
        (None, Some(r)) => r + q,
        (None, None) => unreachable!("nonzero point"),
    };
    let mut qs = vec![0.0];
    if let Some(b) = t.breakpoint().map(|b| b.to_f64()) {
        if b > 0.0 && b < q_max {
            qs.push(b);
        }
    }
    qs.push(q_max);
    qs.into_iter().map(|q| (q, at(q))).collect()
}

struct Frame {
    scale: f64,
    x0: f64,
    y0: f64,
}

impl Frame {
    fn x(&self, q: f64) -> f64 {
        self.x0 + q * self.scale
    }

    fn y(&self, v: f64) -> f64 {
        self.y0 - v * self.scale
    }

    fn polyline(&self, pts: &[(f64, f64)]) -> String {
        pts.iter()
            .map(|&(q, v)| format!("{},{}", num(self.x(q)), num(self.y(v))))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Renders `graph` as an SVG 1.1 document.
///
/// `L1` and `L2` are the polylines with ids `L1` and `L2`; the `q_n` inside the window are
/// circles of class `qn` on the horizontal axis.
pub fn render_svg(graph: &CombinedGraph, cfg: &RenderConfig) -> Result<String> {
    cfg.validate()?;
    if graph.l1().tail() == Tail::Truncated {
        let reach = graph
            .l1()
            .end()
            .expect("truncated graph ends at a vertex")
            .to_f64();
        if cfg.q_max > reach + 1e-12 {
            return Err(Error::RenderConfig(format!(
                "q_max {} exceeds the range [0, {}] of the truncated graph",
                cfg.q_max, reach
            )));
        }
    }
    let q_max = cfg.q_max;
    let l1 = float_points(graph.l1(), q_max);
    let l2 = float_points(graph.l2(), q_max);

    let owners: BTreeSet<LatticePoint> = graph
        .l1()
        .vertices()
        .iter()
        .chain(graph.l2().vertices())
        .filter(|v| v.q.to_f64() <= q_max)
        .map(|v| v.owner.clone())
        .collect();
    let trajectories: Vec<(LatticePoint, Vec<(f64, f64)>)> = if cfg.show_trajectories {
        owners
            .into_iter()
            .map(|x| {
                let t = Trajectory::new(&x, graph.xi()).expect("owners are nonzero");
                (x, trajectory_points(&t, q_max))
            })
            .collect()
    } else {
        Vec::new()
    };

    let all = l1
        .iter()
        .chain(&l2)
        .chain(trajectories.iter().flat_map(|(_, p)| p));
    let (lo, hi) = all.fold((0.0f64, 0.0f64), |(lo, hi), &(_, v)| (lo.min(v), hi.max(v)));
    let (w, h) = (f64::from(cfg.width), f64::from(cfg.height));
    let span = (hi - lo).max(1e-9);
    let scale = ((w - 2.0 * MARGIN) / q_max).min((h - 2.0 * MARGIN) / span);
    let frame = Frame {
        scale,
        x0: MARGIN,
        y0: MARGIN + hi * scale + ((h - 2.0 * MARGIN) - span * scale) / 2.0,
    };

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        cfg.width, cfg.height, cfg.width, cfg.height
    );
    let _ = writeln!(out, "<title>Combined graph for xi = {}</title>", graph.xi());
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="0.75"/>"#,
        num(frame.x(0.0)),
        num(frame.y(0.0)),
        num(frame.x(q_max)),
        num(frame.y(0.0))
    );
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="0.75"/>"#,
        num(frame.x(0.0)),
        num(frame.y(hi)),
        num(frame.x(0.0)),
        num(frame.y(lo))
    );
    for (x, pts) in &trajectories {
        let _ = writeln!(
            out,
            r#"<polyline class="trajectory" data-owner="({},{})" points="{}" fill="none" stroke="gray" stroke-width="0.5" stroke-dasharray="3,3"/>"#,
            x.q,
            x.p,
            frame.polyline(pts)
        );
    }
    for (id, pts) in [("L1", &l1), ("L2", &l2)] {
        let _ = writeln!(
            out,
            r#"<polyline id="{id}" points="{}" fill="none" stroke="black" stroke-width="1.5"/>"#,
            frame.polyline(pts)
        );
    }
    for (n, q) in graph.q_maxima().iter().enumerate() {
        let qf = q.to_f64();
        if qf > q_max {
            break;
        }
        let _ = writeln!(
            out,
            r#"<circle class="qn" data-n="{n}" cx="{}" cy="{}" r="3" fill="black"/>"#,
            num(frame.x(qf)),
            num(frame.y(0.0))
        );
        if cfg.show_q_labels {
            let _ = writeln!(
                out,
                r#"<text class="qlabel" x="{}" y="{}" font-size="11" text-anchor="middle">q{n}</text>"#,
                num(frame.x(qf)),
                num(frame.y(0.0) + 14.0)
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Slopes of consecutive segments of a rendered polyline, in graph orientation (SVG's
/// y axis points down). Each slope is rounded to the nearest integer.
pub fn polyline_slopes(svg: &str, id: &str) -> Option<Vec<i8>> {
    let tag = format!(r#"<polyline id="{id}" points=""#);
    let start = svg.find(&tag)? + tag.len();
    let end = start + svg[start..].find('"')?;
    let pts: Vec<(f64, f64)> = svg[start..end]
        .split_whitespace()
        .map(|p| {
            let (x, y) = p.split_once(',')?;
            Some((x.parse().ok()?, y.parse().ok()?))
        })
        .collect::<Option<_>>()?;
    Some(
        pts.windows(2)
            .map(|w| (-(w[1].1 - w[0].1) / (w[1].0 - w[0].0)).round() as i8)
            .collect(),
    )
}

/// The slope sequence of `f` inside `[0, q_max]`, tail included, as drawn.
pub fn expected_slopes(f: &PiecewiseLinear, q_max: f64) -> Vec<i8> {
    let mut out: Vec<i8> = Vec::new();
    for (i, v) in f.vertices().iter().enumerate() {
        if v.q.to_f64() >= q_max {
            break;
        }
        match f.slope_from(i) {
            Some(s) => out.push(s.as_i8()),
            None => break,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::envelope::build_graph;

    fn count(svg: &str, needle: &str) -> usize {
        svg.matches(needle).count()
    }

    #[test]
    fn three_sevenths_structure() {
        let g = build_graph(&rat(3, 7), None);
        let cfg = RenderConfig::for_graph(&g);
        let svg = render_svg(&g, &cfg).unwrap();
        assert_eq!(polyline_slopes(&svg, "L1").unwrap(), vec![-1, 1, -1, 1, -1]);
        assert_eq!(count(&svg, r#"class="qn""#), 3);
        assert_eq!(svg, render_svg(&g, &cfg).unwrap());
        assert_eq!(expected_slopes(g.l1(), cfg.q_max), vec![-1, 1, -1, 1, -1]);
    }

    #[test]
    fn l2_humps() {
        // Two maxima on the first interval and three on the second.
        let g = build_graph(&rat(3, 7), None);
        let svg = render_svg(&g, &RenderConfig::for_graph(&g)).unwrap();
        let slopes = polyline_slopes(&svg, "L2").unwrap();
        assert_eq!(
            slopes,
            expected_slopes(g.l2(), RenderConfig::for_graph(&g).q_max)
        );
        assert_eq!(g.interval_max_counts(), &[2, 3]);
    }

    #[test]
    fn zero_and_half() {
        let g = build_graph(&rat(0, 1), None);
        let svg = render_svg(&g, &RenderConfig::for_graph(&g)).unwrap();
        assert_eq!(polyline_slopes(&svg, "L1").unwrap(), vec![-1]);
        assert_eq!(polyline_slopes(&svg, "L2").unwrap(), vec![1]);
        assert_eq!(count(&svg, r#"class="qn""#), 1);

        let g = build_graph(&rat(1, 2), None);
        let svg = render_svg(&g, &RenderConfig::for_graph(&g)).unwrap();
        assert_eq!(polyline_slopes(&svg, "L1").unwrap(), vec![-1, 1, -1]);
        assert_eq!(count(&svg, r#"class="qn""#), 2);
    }

    #[test]
    fn trajectories_are_dashed() {
        let g = build_graph(&rat(3, 7), None);
        let cfg = RenderConfig {
            show_trajectories: true,
            ..RenderConfig::for_graph(&g)
        };
        let svg = render_svg(&g, &cfg).unwrap();
        assert!(count(&svg, r#"class="trajectory""#) >= 3);
        assert!(svg.contains(r#"data-owner="(7,3)""#));
    }

    #[test]
    fn config_errors() {
        let g = build_graph(&rat(3, 7), None);
        let bad = RenderConfig {
            q_max: 0.0,
            ..RenderConfig::for_graph(&g)
        };
        assert!(matches!(render_svg(&g, &bad), Err(Error::RenderConfig(_))));
        let bad = RenderConfig {
            width: 0,
            ..RenderConfig::for_graph(&g)
        };
        assert!(matches!(render_svg(&g, &bad), Err(Error::RenderConfig(_))));

        let truncated = build_graph(&rat(13, 47), Some(2));
        let cfg = RenderConfig::for_graph(&truncated);
        assert!(render_svg(&truncated, &cfg).is_ok());
        let beyond = RenderConfig {
            q_max: cfg.q_max * 2.0,
            ..cfg
        };
        assert!(matches!(
            render_svg(&truncated, &beyond),
            Err(Error::RenderConfig(_))
        ));
    }

    #[test]
    fn number_formatting() {
        assert_eq!(num(-0.0000001), "0.000000");
        assert_eq!(num(1.5), "1.500000");
        assert_eq!(num(-2.25), "-2.250000");
    }
}
