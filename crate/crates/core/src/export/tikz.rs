use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{ExportBundle, ExportError};
use crate::geometry::{convex_hull, cross, dot, lex_cmp, point_segment_distance, sub, Hull, HullError, PointK, GEOM_EPS};

/// Drawing parameters. Missing fields in a style document take the
/// defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TikzStyle {
    pub scale: f64,
    pub font: String,
    pub node_font: String,
    pub fill_opacity: f64,
    pub fill_color: String,
    pub edge_color: String,
    pub arrow_tip: String,
    pub tick_step: f64,
    pub tick_length: f64,
    /// Added to the largest coordinate along each axis to get the arrow
    /// length.
    pub axis_overshoot: f64,
    /// Screen vectors (cm) of the unit x, y and z directions in 3D.
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub z: [f64; 2],
    /// Screen vectors (cm) of the unit x and y directions in 2D.
    pub plane_x: [f64; 2],
    pub plane_y: [f64; 2],
}

impl Default for TikzStyle {
    fn default() -> Self {
        Self {
            scale: 0.3,
            font: "\\scriptsize".into(),
            node_font: "\\tiny".into(),
            fill_opacity: 0.3,
            fill_color: "gray!40".into(),
            edge_color: "gray".into(),
            arrow_tip: "-latex'".into(),
            tick_step: 0.5,
            tick_length: 0.04,
            axis_overshoot: 0.12,
            x: [-4.499513, -1.834018],
            y: [0.0, 6.577848],
            z: [2.304853, -0.661467],
            plane_x: [6.0, 0.0],
            plane_y: [0.0, 6.0],
        }
    }
}

impl TikzStyle {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.fill_opacity) {
            return Err(format!("fill_opacity {} is outside [0, 1]", self.fill_opacity));
        }
        if !(self.tick_step > 0.0 && self.tick_step.is_finite()) {
            return Err(format!("tick_step must be positive, got {}", self.tick_step));
        }
        Ok(())
    }
}

/// At most this many ticks are drawn per axis.
const MAX_TICKS: i64 = 1000;

/// Shortest round-trip decimal, always with a fractional part.
fn num(x: f64) -> String {
    let s = x.to_string();
    if s.contains('.') || !x.is_finite() {
        s
    } else {
        s + ".0"
    }
}

fn coord(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|&x| num(x)).collect();
    format!("({})", parts.join(", "))
}

/// `(0,0,L)`-style axis endpoint.
fn axis_point(k: usize, axis: usize, value: &str) -> String {
    let parts: Vec<&str> = (0..k).map(|i| if i == axis { value } else { "0" }).collect();
    format!("({})", parts.join(","))
}

fn origin(k: usize) -> String {
    axis_point(k, usize::MAX, "")
}

/// TikZ picture of the user-facing under-approximation. In 3D each facet
/// facing the optimisation direction is triangulated into fill paths and
/// edges between two such facets are drawn; in 2D the hull polygon is
/// filled and its facing boundary drawn.
pub fn emit_tikz(bundle: &ExportBundle, style: &TikzStyle) -> Result<String, ExportError> {
    bundle.check()?;
    let k = bundle.k();
    if !(2..=3).contains(&k) {
        return Err(ExportError::UnsupportedDimension(k));
    }
    style.validate().map_err(ExportError::Style)?;
    let points = bundle.user_points();
    if points.is_empty() {
        return Err(ExportError::Empty);
    }
    let facing: Vec<f64> = bundle.axes.iter().map(|a| a.sign.factor()).collect();

    let mut out = String::new();
    let v = |a: [f64; 2]| format!("{{({}cm,{}cm)}}", a[0], a[1]);
    if k == 3 {
        let _ = writeln!(
            out,
            "\\begin{{tikzpicture}}[scale={},x = {}, y = {},z = {},font={}]",
            style.scale,
            v(style.x),
            v(style.y),
            v(style.z),
            style.font
        );
    } else {
        let _ = writeln!(
            out,
            "\\begin{{tikzpicture}}[scale={},x = {}, y = {},font={}]",
            style.scale,
            v(style.plane_x),
            v(style.plane_y),
            style.font
        );
    }
    let _ = writeln!(out, "\\tikzstyle{{every node}}+=[font={}]", style.node_font);

    let lengths: Vec<String> = (0..k)
        .map(|i| {
            let hi = points.iter().map(|p| p.coords()[i]).fold(0.0, f64::max);
            let lo = points.iter().map(|p| p.coords()[i]).fold(0.0, f64::min);
            let end = if hi > 0.0 || lo == 0.0 {
                hi + style.axis_overshoot
            } else {
                lo - style.axis_overshoot
            };
            num(end)
        })
        .collect();
    for i in (0..k).rev() {
        let _ = writeln!(out, "\\draw[{}] {} -- {};", style.arrow_tip, origin(k), axis_point(k, i, &lengths[i]));
    }
    write_ticks(&mut out, &points, k, style);

    let fill = format!(
        "\\path[fill, line width=0pt, opacity={}, color={}]",
        style.fill_opacity, style.fill_color
    );
    match convex_hull(&points, k) {
        Ok(hull) if k == 3 => write_surface(&mut out, &hull, &points, &facing, &fill, style),
        Ok(hull) => write_polygon(&mut out, &hull, &facing, &fill, style),
        Err(HullError::Degenerate { affine_dim, points }) => {
            let _ = writeln!(out, "% degenerate under-approximation: affine dimension {affine_dim}");
            write_degenerate(&mut out, affine_dim, &points, &fill, style);
        }
        Err(e) => unreachable!("user points are finite and of dimension k: {e}"),
    }

    out.push('\n');
    let labels = [("pos=0.9, below", "$x$"), ("pos=0.95, right", "$y$"), ("pos=1, above", "$z$")];
    for i in (0..k).rev() {
        let (opts, text) = labels[i];
        let _ = writeln!(
            out,
            "\\path[{}] {} -- {} node[{opts}] {{{text}}};",
            style.arrow_tip,
            origin(k),
            axis_point(k, i, &lengths[i])
        );
    }
    out.push_str("\\end{tikzpicture}\n");
    Ok(out)
}

fn write_ticks(out: &mut String, points: &[PointK], k: usize, style: &TikzStyle) {
    // axis -> (axis the tick mark extends along, label anchor)
    let layout = [(1, "above"), (0, "left"), (1, "above")];
    let tick = num(style.tick_length);
    for (i, &(along, anchor)) in layout.iter().enumerate().take(k) {
        let hi = points.iter().map(|p| p.coords()[i]).fold(0.0, f64::max);
        let lo = points.iter().map(|p| p.coords()[i]).fold(0.0, f64::min);
        let first = ((lo - GEOM_EPS) / style.tick_step).ceil() as i64;
        let last = ((hi + GEOM_EPS) / style.tick_step).floor() as i64;
        for j in first.max(-MAX_TICKS)..=last.min(MAX_TICKS) {
            if j == 0 {
                continue;
            }
            let t = j as f64 * style.tick_step;
            let at = num(t);
            let start: Vec<&str> = (0..k).map(|a| if a == i { at.as_str() } else { "0" }).collect();
            let end: Vec<&str> = (0..k)
                .map(|a| {
                    if a == i {
                        at.as_str()
                    } else if a == along {
                        tick.as_str()
                    } else {
                        "0"
                    }
                })
                .collect();
            let _ = writeln!(
                out,
                "\\draw ({}) -- ({}) node[{anchor}, inner sep=1pt] {{{t}}};",
                start.join(","),
                end.join(",")
            );
        }
    }
}

/// Whether the outward normal points into the optimisation direction.
fn faces_up(normal: &[f64], facing: &[f64]) -> bool {
    normal.iter().zip(facing).all(|(n, s)| n * s >= -GEOM_EPS)
}

fn write_surface(out: &mut String, hull: &Hull, points: &[PointK], facing: &[f64], fill: &str, style: &TikzStyle) {
    // Hull vertices are copies of input points; facet rings are expressed
    // as indices into `points`, with input points lying on a facet edge
    // inserted so that they appear as vertices of the drawing.
    let id = |c: &[f64]| points.iter().position(|p| p.coords() == c).expect("hull vertex is an input point");
    let mut rings: Vec<Vec<usize>> = Vec::new();
    for f in hull.facets.iter().filter(|f| faces_up(&f.normal, facing)) {
        let corners: Vec<usize> = f.vertices.iter().map(|&v| id(hull.vertices[v].coords())).collect();
        let mut ring = Vec::new();
        for j in 0..corners.len() {
            let (a, b) = (corners[j], corners[(j + 1) % corners.len()]);
            ring.push(a);
            let (pa, pb) = (points[a].coords(), points[b].coords());
            let ab = sub(pb, pa);
            let len2 = dot(&ab, &ab);
            let mut on_edge: Vec<(f64, usize)> = (0..points.len())
                .filter(|&i| i != a && i != b)
                .filter(|&i| point_segment_distance(points[i].coords(), pa, pb) <= GEOM_EPS)
                .map(|i| (dot(&sub(points[i].coords(), pa), &ab) / len2, i))
                .filter(|&(t, _)| t > 0.0 && t < 1.0)
                .collect();
            on_edge.sort_by(|x, y| x.0.total_cmp(&y.0));
            ring.extend(on_edge.into_iter().map(|(_, i)| i));
        }
        rings.push(ring);
    }

    let mut triangles: Vec<Vec<f64>> = Vec::new();
    for ring in &rings {
        for [a, b, c] in ear_clip(ring, points) {
            triangles.push([points[a].coords(), points[b].coords(), points[c].coords()].concat());
        }
    }
    triangles.sort_by(|a, b| lex_cmp(a, b));
    for t in &triangles {
        let _ = writeln!(
            out,
            "{fill} {} -- {} -- {} -- cycle;",
            coord(&t[0..3]),
            coord(&t[3..6]),
            coord(&t[6..9])
        );
    }

    // Edges on the boundary between two shown facets.
    let mut uses: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for ring in &rings {
        for j in 0..ring.len() {
            let (a, b) = (ring[j], ring[(j + 1) % ring.len()]);
            *uses.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut edges: Vec<Vec<f64>> = uses
        .into_iter()
        .filter(|&(_, n)| n == 2)
        .map(|((a, b), _)| {
            let (pa, pb) = (points[a].coords(), points[b].coords());
            let (p, q) = if lex_cmp(pa, pb).is_le() { (pa, pb) } else { (pb, pa) };
            [p, q].concat()
        })
        .collect();
    edges.sort_by(|a, b| lex_cmp(a, b));
    for e in &edges {
        let _ = writeln!(out, "\\draw[color={}] {} -- {};", style.edge_color, coord(&e[0..3]), coord(&e[3..6]));
    }
}

/// Triangulates a convex ring that may contain collinear vertices by
/// repeatedly cutting off the first vertex that is a strict corner, so every
/// ring vertex ends up in some triangle.
fn ear_clip(ring: &[usize], points: &[PointK]) -> Vec<[usize; 3]> {
    let mut ring = ring.to_vec();
    let mut out = Vec::new();
    let corner = |ring: &[usize], i: usize| {
        let n = ring.len();
        let (a, b, c) = (ring[(i + n - 1) % n], ring[i], ring[(i + 1) % n]);
        point_line_distance(points[b].coords(), points[a].coords(), points[c].coords()) > GEOM_EPS
    };
    while ring.len() > 3 {
        let Some(i) = (0..ring.len()).find(|&i| corner(&ring, i)) else {
            return out;
        };
        let n = ring.len();
        out.push([ring[(i + n - 1) % n], ring[i], ring[(i + 1) % n]]);
        ring.remove(i);
    }
    if corner(&ring, 0) {
        out.push([ring[0], ring[1], ring[2]]);
    }
    out
}

/// Distance from `p` to the line through `a` and `b`.
fn point_line_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab = sub(b, a);
    let ap = sub(p, a);
    let len = dot(&ab, &ab).sqrt();
    if len == 0.0 {
        return dot(&ap, &ap).sqrt();
    }
    let c = cross(&ab, &ap);
    dot(&c, &c).sqrt() / len
}

fn write_polygon(out: &mut String, hull: &Hull, facing: &[f64], fill: &str, style: &TikzStyle) {
    // 2D hull vertices are counter-clockwise and facet `i` joins `i` and `i + 1`.
    let body: Vec<String> = hull.vertices.iter().map(|p| coord(p.coords())).collect();
    let _ = writeln!(out, "{fill} {} -- cycle;", body.join(" -- "));

    let m = hull.facets.len();
    let up: Vec<bool> = hull.facets.iter().map(|f| faces_up(&f.normal, facing)).collect();
    let Some(start) = (0..m).find(|&i| up[i] && !up[(i + m - 1) % m]) else {
        return;
    };
    let mut chain = vec![hull.facets[start].vertices[0]];
    let mut i = start;
    while up[i] && chain.len() <= m {
        chain.push(hull.facets[i].vertices[1]);
        i = (i + 1) % m;
    }
    let body: Vec<String> = chain.iter().map(|&v| coord(hull.vertices[v].coords())).collect();
    let _ = writeln!(out, "\\draw[color={}] {};", style.edge_color, body.join(" -- "));
}

fn write_degenerate(out: &mut String, affine_dim: usize, points: &[PointK], fill: &str, style: &TikzStyle) {
    match affine_dim {
        0 | 1 => {
            if let [a, b] = points {
                let _ = writeln!(out, "\\draw[color={}] {} -- {};", style.edge_color, coord(a.coords()), coord(b.coords()));
            }
            for p in points {
                let _ = writeln!(out, "\\fill[color={}] {} circle (1pt);", style.edge_color, coord(p.coords()));
            }
        }
        _ => {
            let body: Vec<String> = points.iter().map(|p| coord(p.coords())).collect();
            let _ = writeln!(out, "{fill} {} -- cycle;", body.join(" -- "));
        }
    }
}
