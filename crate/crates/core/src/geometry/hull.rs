use std::collections::HashMap;

use robust::{orient2d, orient3d, Coord, Coord3D};
use thiserror::Error;

use super::{closest_on_segment, cross, dot, lex_cmp, norm, sort_dedup, sub, PointK, GEOM_EPS};

/// A boundary facet: an edge in 2D, a convex polygon in 3D. Coplanar
/// triangles are merged, so a facet may have more than three vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    /// Indices into `Hull::vertices`, counter-clockwise seen from outside.
    pub vertices: Vec<usize>,
    /// Outward normal with unit L1 norm.
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Facet {
    /// `normal·p − offset`; positive outside.
    pub fn violation(&self, p: &[f64]) -> f64 {
        dot(&self.normal, p) - self.offset
    }

    /// Euclidean-normalised normal and offset.
    pub fn unit_plane(&self) -> (Vec<f64>, f64) {
        let len = norm(&self.normal);
        (self.normal.iter().map(|x| x / len).collect(), self.offset / len)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hull {
    pub dim: usize,
    /// 2D: counter-clockwise from the lexicographically smallest vertex.
    /// 3D: lexicographic order.
    pub vertices: Vec<PointK>,
    pub facets: Vec<Facet>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HullError {
    /// Fewer than `dim + 1` affinely independent points. `points` holds the
    /// extreme points of the lower-dimensional set.
    #[error("degenerate hull: input spans affine dimension {affine_dim}")]
    Degenerate { affine_dim: usize, points: Vec<PointK> },
    #[error("hulls are supported in dimension 2 or 3, not {0}")]
    UnsupportedDimension(usize),
    #[error("point {index} has {found} coordinates, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
    #[error("point {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("no input points")]
    Empty,
}

impl Hull {
    pub fn contains(&self, p: &PointK, tol: f64) -> bool {
        self.facets.iter().all(|f| f.violation(p.coords()) <= tol)
    }

    /// Area in 2D, volume in 3D.
    pub fn volume(&self) -> f64 {
        let c = centroid(&self.vertices);
        match self.dim {
            2 => {
                let n = self.vertices.len();
                (0..n)
                    .map(|i| {
                        let a = sub(self.vertices[i].coords(), &c);
                        let b = sub(self.vertices[(i + 1) % n].coords(), &c);
                        a[0] * b[1] - a[1] * b[0]
                    })
                    .sum::<f64>()
                    / 2.0
            }
            _ => self
                .triangles()
                .iter()
                .map(|t| {
                    let a = sub(self.vertices[t[0]].coords(), &c);
                    let b = sub(self.vertices[t[1]].coords(), &c);
                    let d = sub(self.vertices[t[2]].coords(), &c);
                    dot(&a, &cross(&b, &d))
                })
                .sum::<f64>()
                / 6.0,
        }
    }

    /// Fan triangulation of every 3D facet, as `(facet index, triangle)`.
    pub fn facet_triangles(&self) -> Vec<(usize, [usize; 3])> {
        let mut out = Vec::new();
        for (fi, f) in self.facets.iter().enumerate() {
            for i in 1..f.vertices.len().saturating_sub(1) {
                out.push((fi, [f.vertices[0], f.vertices[i], f.vertices[i + 1]]));
            }
        }
        out
    }

    pub fn triangles(&self) -> Vec<[usize; 3]> {
        self.facet_triangles().into_iter().map(|(_, t)| t).collect()
    }

    /// Euclidean distance from `p` to the (closed) facet `facet`.
    pub fn facet_distance(&self, facet: usize, p: &[f64]) -> f64 {
        norm(&sub(p, &self.facet_nearest(facet, p)))
    }

    /// Point of the (closed) facet `facet` nearest to `p`.
    pub fn facet_nearest(&self, facet: usize, p: &[f64]) -> Vec<f64> {
        let f = &self.facets[facet];
        let vs: Vec<&[f64]> = f.vertices.iter().map(|&i| self.vertices[i].coords()).collect();
        if self.dim == 2 {
            return closest_on_segment(p, vs[0], vs[1]);
        }
        let (n, d) = f.unit_plane();
        let h = dot(&n, p) - d;
        let q: Vec<f64> = p.iter().zip(&n).map(|(x, ni)| x - h * ni).collect();
        let m = vs.len();
        let inside = (0..m).all(|i| {
            let a = vs[i];
            let b = vs[(i + 1) % m];
            dot(&cross(&sub(b, a), &sub(&q, a)), &n) >= -1e-12
        });
        if inside {
            return q;
        }
        (0..m)
            .map(|i| closest_on_segment(p, vs[i], vs[(i + 1) % m]))
            .min_by(|a, b| norm(&sub(p, a)).total_cmp(&norm(&sub(p, b))))
            .expect("facet has vertices")
    }
}

fn centroid(points: &[PointK]) -> Vec<f64> {
    let k = points.first().map_or(0, PointK::dim);
    let mut c = vec![0.0; k];
    for p in points {
        for (ci, x) in c.iter_mut().zip(p.coords()) {
            *ci += x;
        }
    }
    for ci in &mut c {
        *ci /= points.len() as f64;
    }
    c
}

/// Convex hull of `points` in dimension `dim` (2 or 3).
pub fn convex_hull(points: &[PointK], dim: usize) -> Result<Hull, HullError> {
    if !(2..=3).contains(&dim) {
        return Err(HullError::UnsupportedDimension(dim));
    }
    if points.is_empty() {
        return Err(HullError::Empty);
    }
    for (index, p) in points.iter().enumerate() {
        if p.dim() != dim {
            return Err(HullError::DimensionMismatch {
                index,
                expected: dim,
                found: p.dim(),
            });
        }
        if !p.is_finite() {
            return Err(HullError::NonFinite(index));
        }
    }
    let pts = sort_dedup(points, GEOM_EPS);
    let (affine_dim, basis) = affine_basis(&pts);
    if affine_dim < dim {
        return Err(HullError::Degenerate {
            affine_dim,
            points: degenerate_extremes(&pts, affine_dim, &basis),
        });
    }
    Ok(match dim {
        2 => hull_2d(&pts),
        _ => hull_3d(&pts, [basis[0], basis[1], basis[2], basis[3]]),
    })
}

/// Affine dimension of the point set and the indices of up to four points
/// spanning it (first point, farthest point, farthest from their line,
/// farthest from their plane).
fn affine_basis(pts: &[PointK]) -> (usize, Vec<usize>) {
    let dim = pts[0].dim();
    let mut basis = vec![0];
    let p0 = pts[0].coords();

    let far = |score: &dyn Fn(&[f64]) -> f64| -> (usize, f64) {
        pts.iter()
            .enumerate()
            .map(|(i, p)| (i, score(p.coords())))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
    };

    let (i1, d1) = far(&|p| norm(&sub(p, p0)));
    if d1 <= GEOM_EPS {
        return (0, basis);
    }
    basis.push(i1);
    let p1 = pts[i1].coords().to_vec();
    let (i2, d2) = far(&|p| point_line_distance(p, p0, &p1));
    if d2 <= GEOM_EPS || dim < 2 {
        return (1, basis);
    }
    basis.push(i2);
    if dim == 2 {
        return (2, basis);
    }
    let p2 = pts[i2].coords().to_vec();
    let nrm = unit(&cross(&sub(&p1, p0), &sub(&p2, p0)));
    let (i3, d3) = far(&|p| dot(&nrm, &sub(p, p0)).abs());
    if d3 <= GEOM_EPS {
        return (2, basis);
    }
    basis.push(i3);
    (3, basis)
}

fn point_line_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let u = unit(&sub(b, a));
    let ap = sub(p, a);
    let t = dot(&ap, &u);
    let perp: Vec<f64> = ap.iter().zip(&u).map(|(x, ui)| x - t * ui).collect();
    norm(&perp)
}

fn unit(v: &[f64]) -> Vec<f64> {
    let l = norm(v);
    v.iter().map(|x| x / l).collect()
}

fn degenerate_extremes(pts: &[PointK], affine_dim: usize, basis: &[usize]) -> Vec<PointK> {
    match affine_dim {
        0 => vec![pts[0].clone()],
        1 => {
            let p0 = pts[basis[0]].coords();
            let u = unit(&sub(pts[basis[1]].coords(), p0));
            let proj = |p: &PointK| dot(&u, &sub(p.coords(), p0));
            let lo = pts.iter().min_by(|a, b| proj(a).total_cmp(&proj(b))).unwrap();
            let hi = pts.iter().max_by(|a, b| proj(a).total_cmp(&proj(b))).unwrap();
            let mut out = vec![lo.clone(), hi.clone()];
            out.sort_by(|a, b| lex_cmp(a.coords(), b.coords()));
            out
        }
        _ => {
            // Planar set in 3D.
            let p0 = pts[basis[0]].coords();
            let n = unit(&cross(
                &sub(pts[basis[1]].coords(), p0),
                &sub(pts[basis[2]].coords(), p0),
            ));
            let (e1, e2) = plane_basis(&n);
            let order = polygon_in_plane(pts, &(0..pts.len()).collect::<Vec<_>>(), &e1, &e2);
            order.into_iter().map(|i| pts[i].clone()).collect()
        }
    }
}

/// Orthonormal `(e1, e2)` with `e1 × e2 = n`.
fn plane_basis(n: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let axis = (0..3)
        .min_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()))
        .unwrap();
    let mut a = [0.0; 3];
    a[axis] = 1.0;
    let e1 = unit(&cross(n, &a));
    let e2 = cross(n, &e1).to_vec();
    (e1, e2)
}

/// Counter-clockwise convex polygon (in `(e1, e2)` coordinates) of the
/// points `idx`, without collinear vertices, starting at the smallest
/// projected point.
fn polygon_in_plane(pts: &[PointK], idx: &[usize], e1: &[f64], e2: &[f64]) -> Vec<usize> {
    let mut proj: Vec<([f64; 2], usize)> = idx
        .iter()
        .map(|&i| ([dot(pts[i].coords(), e1), dot(pts[i].coords(), e2)], i))
        .collect();
    proj.sort_by(|a, b| lex_cmp(&a.0, &b.0).then(a.1.cmp(&b.1)));
    let flat: Vec<[f64; 2]> = proj.iter().map(|p| p.0).collect();
    convex_polygon(&flat).into_iter().map(|j| proj[j].1).collect()
}

/// Counter-clockwise convex polygon of `p`, as indices, starting at the
/// lowest point among those within `GEOM_EPS` of the smallest first
/// coordinate. The chain is built with exact orientation tests; vertices
/// within `GEOM_EPS` of the line through their neighbours are then removed
/// one at a time, so rounding noise along an edge never survives as a
/// vertex and clustered points cannot produce a self-overlapping ring.
fn convex_polygon(p: &[[f64; 2]]) -> Vec<usize> {
    let n = p.len();
    if n < 3 {
        return (0..n).collect();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lex_cmp(&p[a], &p[b]).then(a.cmp(&b)));
    let turn = |o: usize, a: usize, b: usize| {
        (p[a][0] - p[o][0]) * (p[b][1] - p[o][1]) - (p[a][1] - p[o][1]) * (p[b][0] - p[o][0])
    };
    let exact_turn = |o: usize, a: usize, b: usize| orient2d(c2(p[o]), c2(p[a]), c2(p[b]));
    let mut ring: Vec<usize> = Vec::with_capacity(2 * n);
    for pass in [order.clone(), order.iter().rev().copied().collect()] {
        let base = ring.len();
        for i in pass {
            while ring.len() >= base + 2 && exact_turn(ring[ring.len() - 2], ring[ring.len() - 1], i) <= 0.0 {
                ring.pop();
            }
            ring.push(i);
        }
        ring.pop();
    }

    // Signed distance of `b` to the left of the line a -> c.
    let left = |a: usize, b: usize, c: usize| -> f64 {
        let len = (p[c][0] - p[a][0]).hypot(p[c][1] - p[a][1]);
        if len == 0.0 {
            0.0
        } else {
            -turn(a, b, c) / len
        }
    };
    loop {
        let m = ring.len();
        if m < 3 {
            break;
        }
        let flat = (0..m).find(|&i| left(ring[(i + m - 1) % m], ring[i], ring[(i + 1) % m]) >= -GEOM_EPS);
        match flat {
            Some(i) => {
                ring.remove(i);
            }
            None => break,
        }
    }

    let min_x = ring.iter().map(|&i| p[i][0]).fold(f64::INFINITY, f64::min);
    if let Some(start) = (0..ring.len())
        .filter(|&k| p[ring[k]][0] <= min_x + GEOM_EPS)
        .min_by(|&a, &b| p[ring[a]][1].total_cmp(&p[ring[b]][1]).then(ring[a].cmp(&ring[b])))
    {
        ring.rotate_left(start);
    }
    ring
}

fn c2(p: [f64; 2]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

fn c3(p: &PointK) -> Coord3D<f64> {
    let c = p.coords();
    Coord3D { x: c[0], y: c[1], z: c[2] }
}

/// Plane scaled so the normal has unit L1 norm.
fn l1_plane(normal: &[f64], offset: f64) -> (Vec<f64>, f64) {
    let l1: f64 = normal.iter().map(|x| x.abs()).sum();
    (normal.iter().map(|x| x / l1).collect(), offset / l1)
}

fn hull_2d(pts: &[PointK]) -> Hull {
    let flat: Vec<[f64; 2]> = pts.iter().map(|p| [p.coords()[0], p.coords()[1]]).collect();
    let order = convex_polygon(&flat);
    let vertices: Vec<PointK> = order.iter().map(|&i| pts[i].clone()).collect();
    let m = vertices.len();
    let facets = (0..m)
        .map(|i| {
            let a = vertices[i].coords();
            let b = vertices[(i + 1) % m].coords();
            let raw = [b[1] - a[1], a[0] - b[0]];
            let off = dot(&raw, a).max(dot(&raw, b));
            let (normal, offset) = l1_plane(&raw, off);
            Facet {
                vertices: vec![i, (i + 1) % m],
                normal,
                offset,
            }
        })
        .collect();
    Hull {
        dim: 2,
        vertices,
        facets,
    }
}

struct Tri {
    v: [usize; 3],
    n: Vec<f64>,
    d: f64,
    area: f64,
    alive: bool,
}

fn make_tri(pts: &[PointK], v: [usize; 3]) -> Tri {
    let a = pts[v[0]].coords();
    let raw = cross(&sub(pts[v[1]].coords(), a), &sub(pts[v[2]].coords(), a));
    let len = norm(&raw);
    let n: Vec<f64> = raw.iter().map(|x| x / len).collect();
    let d = dot(&n, a);
    Tri {
        v,
        n,
        d,
        area: len / 2.0,
        alive: true,
    }
}

fn hull_3d(pts: &[PointK], simplex: [usize; 4]) -> Hull {
    let mut tris: Vec<Tri> = Vec::new();
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    // Exact test: `p` strictly outside the plane of the counter-clockwise
    // triangle `v`.
    let outside = |v: &[usize; 3], p: usize| orient3d(c3(&pts[v[0]]), c3(&pts[v[1]]), c3(&pts[v[2]]), c3(&pts[p])) < 0.0;

    let [a, b, c, d] = simplex;
    for (face, opposite) in [([a, b, c], d), ([a, b, d], c), ([a, c, d], b), ([b, c, d], a)] {
        let face = if outside(&face, opposite) { [face[0], face[2], face[1]] } else { face };
        let t = make_tri(pts, face);
        let id = tris.len();
        for e in tri_edges(&t.v) {
            edges.insert(e, id);
        }
        tris.push(t);
    }

    for p in 0..pts.len() {
        if simplex.contains(&p) {
            continue;
        }
        let visible: Vec<usize> = (0..tris.len()).filter(|&t| tris[t].alive && outside(&tris[t].v, p)).collect();
        if visible.is_empty() {
            continue;
        }
        let is_visible = |t: usize| visible.binary_search(&t).is_ok();
        let mut horizon = Vec::new();
        for &t in &visible {
            for (u, w) in tri_edges(&tris[t].v) {
                match edges.get(&(w, u)) {
                    Some(&nb) if is_visible(nb) => {}
                    _ => horizon.push((u, w)),
                }
            }
        }
        for &t in &visible {
            tris[t].alive = false;
            for e in tri_edges(&tris[t].v) {
                if edges.get(&e) == Some(&t) {
                    edges.remove(&e);
                }
            }
        }
        for (u, w) in horizon {
            let t = make_tri(pts, [u, w, p]);
            let id = tris.len();
            for e in tri_edges(&t.v) {
                edges.insert(e, id);
            }
            tris.push(t);
        }
    }

    // Merge the surface into facets: starting from the largest unassigned
    // triangle, absorb neighbours whose vertices lie within `GEOM_EPS` of
    // its plane. Every surface triangle ends up in exactly one facet.
    let mut order: Vec<usize> = (0..tris.len()).filter(|&t| tris[t].alive).collect();
    order.sort_by(|&x, &y| tris[y].area.total_cmp(&tris[x].area).then(x.cmp(&y)));
    let mut assigned = vec![false; tris.len()];
    let mut raw_facets: Vec<(Vec<usize>, Vec<f64>, f64)> = Vec::new();
    for seed in order {
        if assigned[seed] {
            continue;
        }
        assigned[seed] = true;
        let (n, d) = (tris[seed].n.clone(), tris[seed].d);
        let mut idx: Vec<usize> = tris[seed].v.to_vec();
        let mut stack = vec![seed];
        while let Some(t) = stack.pop() {
            for (u, w) in tri_edges(&tris[t].v) {
                let Some(&nb) = edges.get(&(w, u)) else { continue };
                if assigned[nb] || tris[nb].v.iter().any(|&i| (dot(&n, pts[i].coords()) - d).abs() > GEOM_EPS) {
                    continue;
                }
                assigned[nb] = true;
                idx.extend(tris[nb].v);
                stack.push(nb);
            }
        }
        idx.sort_unstable();
        idx.dedup();
        let (e1, e2) = plane_basis(&n);
        let poly = polygon_in_plane(pts, &idx, &e1, &e2);
        if poly.len() < 3 {
            continue;
        }
        let off = idx.iter().map(|&i| dot(&n, pts[i].coords())).fold(d, f64::max);
        raw_facets.push((poly, n, off));
    }

    let mut used: Vec<usize> = raw_facets.iter().flat_map(|f| f.0.iter().copied()).collect();
    used.sort_unstable();
    used.dedup();
    let remap: HashMap<usize, usize> = used.iter().enumerate().map(|(j, &i)| (i, j)).collect();
    let vertices: Vec<PointK> = used.iter().map(|&i| pts[i].clone()).collect();

    let mut facets: Vec<Facet> = raw_facets
        .into_iter()
        .map(|(poly, n, off)| {
            let mut vs: Vec<usize> = poly.iter().map(|i| remap[i]).collect();
            let start = (0..vs.len()).min_by_key(|&i| vs[i]).unwrap();
            vs.rotate_left(start);
            let (normal, offset) = l1_plane(&n, off);
            Facet {
                vertices: vs,
                normal,
                offset,
            }
        })
        .collect();
    facets.sort_by(|x, y| x.vertices.cmp(&y.vertices));

    Hull {
        dim: 3,
        vertices,
        facets,
    }
}

fn tri_edges(v: &[usize; 3]) -> [(usize, usize); 3] {
    [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(raw: &[&[f64]]) -> Vec<PointK> {
        raw.iter().map(|c| PointK::new(c.to_vec())).collect()
    }

    #[test]
    fn square_with_interior_and_edge_points() {
        let h = convex_hull(
            &pts(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[0.2, 0.2], &[0.5, 0.5]]),
            2,
        )
        .unwrap();
        assert_eq!(h.vertices, pts(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]));
        assert_eq!(h.facets.len(), 3);
        assert!((h.volume() - 0.5).abs() < 1e-15);
        let diag = h.facets.iter().find(|f| f.normal[0] > 0.0 && f.normal[1] > 0.0).unwrap();
        assert!((diag.normal[0] - 0.5).abs() < 1e-15 && (diag.offset - 0.5).abs() < 1e-15);
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let err = convex_hull(&pts(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0], &[0.5, 0.5]]), 2).unwrap_err();
        match err {
            HullError::Degenerate { affine_dim, points } => {
                assert_eq!(affine_dim, 1);
                assert_eq!(points, pts(&[&[0.0, 0.0], &[2.0, 2.0]]));
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn coplanar_points_in_3d_are_degenerate() {
        let err = convex_hull(
            &pts(&[&[0.0, 0.0, 1.0], &[1.0, 0.0, 1.0], &[0.0, 1.0, 1.0], &[1.0, 1.0, 1.0]]),
            3,
        )
        .unwrap_err();
        match err {
            HullError::Degenerate { affine_dim, points } => {
                assert_eq!(affine_dim, 2);
                assert_eq!(points.len(), 4);
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn single_point_has_affine_dimension_zero() {
        let err = convex_hull(&pts(&[&[1.0, 2.0], &[1.0, 2.0]]), 2).unwrap_err();
        assert!(matches!(err, HullError::Degenerate { affine_dim: 0, .. }));
    }

    #[test]
    fn cube_merges_coplanar_triangles() {
        let mut raw = Vec::new();
        for x in [0.0, 1.0] {
            for y in [0.0, 1.0] {
                for z in [0.0, 1.0] {
                    raw.push(PointK::from([x, y, z]));
                }
            }
        }
        raw.push(PointK::from([0.5, 0.5, 0.5]));
        raw.push(PointK::from([0.5, 0.5, 1.0]));
        raw.push(PointK::from([1.0, 0.5, 1.0]));
        let h = convex_hull(&raw, 3).unwrap();
        assert_eq!(h.vertices.len(), 8);
        assert_eq!(h.facets.len(), 6);
        assert!(h.facets.iter().all(|f| f.vertices.len() == 4));
        assert!((h.volume() - 1.0).abs() < 1e-12);
        for p in &raw {
            assert!(h.contains(p, GEOM_EPS));
        }
        let top = h.facets.iter().find(|f| f.normal[2] > 0.5).unwrap();
        assert!((top.normal[2] - 1.0).abs() < 1e-12);
        assert!((h.facet_distance(h.facets.iter().position(|f| f == top).unwrap(), &[0.5, 0.5, 3.0]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn facet_distance_outside_polygon_uses_edges() {
        let h = convex_hull(
            &pts(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]),
            3,
        )
        .unwrap();
        let bottom = h.facets.iter().position(|f| f.normal[2] < -0.5).unwrap();
        // Below and beyond the hypotenuse of the bottom triangle.
        let d = h.facet_distance(bottom, &[1.0, 1.0, -1.0]);
        assert!((d - (0.5 + 1.0f64).sqrt()).abs() < 1e-12, "{d}");
    }

    #[test]
    fn wrong_dimension_is_an_error() {
        assert!(matches!(
            convex_hull(&pts(&[&[0.0, 0.0]]), 3),
            Err(HullError::DimensionMismatch { index: 0, .. })
        ));
        assert!(matches!(convex_hull(&pts(&[&[0.0]]), 1), Err(HullError::UnsupportedDimension(1))));
        assert_eq!(convex_hull(&[], 2), Err(HullError::Empty));
    }
}
