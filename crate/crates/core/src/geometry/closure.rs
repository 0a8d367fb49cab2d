//! Distances to the downward closure `conv(P) − ℝ₊ᵏ` of a point set.
//!
//! The closure is unbounded, so it is truncated at a floor strictly below
//! every point: each point is copied with every nonempty subset of its
//! coordinates lowered to the floor, and the hull of the copies is taken.
//! That hull is always full-dimensional, so single points and collinear
//! sets need no special path. For a query `v` the nearest closure point is
//! `min(v, y)` for some `y ∈ conv(P)`, so after raising `v` to the per-axis
//! minimum of `P` (which leaves the distance unchanged) the nearest point
//! never touches the floor.

use super::{convex_hull, lex_cmp, norm, sort_dedup, sub, Hull, PointK, WeightVector, GEOM_EPS};

#[derive(Debug, Clone)]
pub struct DownwardClosure {
    dim: usize,
    /// Per-axis minimum over the generating points.
    min_corner: Vec<f64>,
    /// Per-axis maximum, used directly in dimension 1.
    max_corner: Vec<f64>,
    /// Hull of the floor-extended point set (dimension 2 and 3).
    hull: Option<Hull>,
}

/// Distance from a query point to the closure and the outward normal of the
/// nearest violated facet.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureDistance {
    pub distance: f64,
    pub weight: Option<WeightVector>,
}

impl DownwardClosure {
    /// `points` must be nonempty, finite and of a common dimension 1–3.
    pub fn new(points: &[PointK]) -> Self {
        assert!(!points.is_empty(), "downward closure of an empty set");
        let dim = points[0].dim();
        assert!((1..=3).contains(&dim), "dimension {dim} unsupported");
        let pts = maximal_points(&sort_dedup(points, GEOM_EPS));
        let min_corner: Vec<f64> = (0..dim)
            .map(|i| pts.iter().map(|p| p.coords()[i]).fold(f64::INFINITY, f64::min))
            .collect();
        let max_corner: Vec<f64> = (0..dim)
            .map(|i| pts.iter().map(|p| p.coords()[i]).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let hull = if dim == 1 {
            None
        } else {
            let floor: Vec<f64> = (0..dim)
                .map(|i| min_corner[i] - (max_corner[i] - min_corner[i]).max(1.0))
                .collect();
            let mut extended = Vec::with_capacity(pts.len() << dim);
            for p in &pts {
                for mask in 0..(1usize << dim) {
                    let c = (0..dim)
                        .map(|i| if mask & (1 << i) != 0 { floor[i] } else { p.coords()[i] })
                        .collect();
                    extended.push(PointK::new(c));
                }
            }
            Some(convex_hull(&extended, dim).expect("floor-extended set is full-dimensional"))
        };
        Self {
            dim,
            min_corner,
            max_corner,
            hull,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn distance(&self, v: &PointK) -> ClosureDistance {
        assert_eq!(v.dim(), self.dim);
        let Some(hull) = &self.hull else {
            let d = (v.coords()[0] - self.max_corner[0]).max(0.0);
            return ClosureDistance {
                distance: d,
                weight: (d > 0.0).then(|| WeightVector::unit(1, 0)),
            };
        };
        let q: Vec<f64> = v
            .coords()
            .iter()
            .zip(&self.min_corner)
            .map(|(x, m)| x.max(*m))
            .collect();

        // (distance, violation, facet, nearest point)
        let mut best: Option<(f64, f64, usize, Vec<f64>)> = None;
        for (fi, f) in hull.facets.iter().enumerate() {
            let viol = f.violation(&q);
            if viol <= 0.0 {
                continue;
            }
            let y = hull.facet_nearest(fi, &q);
            let d = norm(&sub(&q, &y));
            let better = match &best {
                None => true,
                Some((bd, bv, _, _)) => d < bd - 1e-12 || (d <= bd + 1e-12 && viol > bv + 1e-12),
            };
            if better {
                best = Some((d, viol, fi, y));
            }
        }
        let Some((d, _, fi, y)) = best else {
            return ClosureDistance {
                distance: 0.0,
                weight: None,
            };
        };
        // The facet normal, unless the nearest point sits on an edge where
        // that normal tilts below zero; then the direction to the nearest
        // point, which is nonnegative for a downward-closed set.
        let normal = &hull.facets[fi].normal;
        let weight = if normal.iter().all(|&x| x >= 0.0) {
            WeightVector::normalized(normal).ok()
        } else {
            let dir: Vec<f64> = q.iter().zip(&y).map(|(a, b)| (a - b).max(0.0)).collect();
            WeightVector::normalized(&dir).ok()
        };
        ClosureDistance { distance: d, weight }
    }

    pub fn contains(&self, v: &PointK, tol: f64) -> bool {
        self.distance(v).distance <= tol
    }
}

/// Drops points weakly dominated by another point; they add nothing to the
/// closure.
fn maximal_points(pts: &[PointK]) -> Vec<PointK> {
    pts.iter()
        .enumerate()
        .filter(|(i, p)| {
            !pts.iter()
                .enumerate()
                .any(|(j, q)| *i != j && p.is_dominated_by(q, 0.0) && (!q.is_dominated_by(p, 0.0) || j < *i))
        })
        .map(|(_, p)| p.clone())
        .collect()
}

/// Progress measure between an under- and an over-approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    /// Largest distance from an over vertex to the closure of the under
    /// set; distances up to `GEOM_EPS` count as zero.
    pub gap: f64,
    pub witness: PointK,
    /// Outward normal of the closure facet nearest the witness; uniform
    /// when the gap is zero.
    pub suggested_weight: WeightVector,
}

/// Gap between the downward closure of `under` and the polytope with
/// vertices `over_vertices`. Both lists must be nonempty.
pub fn pareto_gap(under: &[PointK], over_vertices: &[PointK]) -> GapReport {
    assert!(!over_vertices.is_empty(), "no over-approximation vertices");
    let closure = DownwardClosure::new(under);
    pareto_gap_with(&closure, over_vertices)
}

pub(crate) fn pareto_gap_with(closure: &DownwardClosure, over_vertices: &[PointK]) -> GapReport {
    let k = closure.dim();
    let mut over = over_vertices.to_vec();
    over.sort_by(|a, b| lex_cmp(a.coords(), b.coords()));
    let mut best: Option<(f64, usize, Option<WeightVector>)> = None;
    for (i, v) in over.iter().enumerate() {
        let cd = closure.distance(v);
        let d = if cd.distance <= GEOM_EPS { 0.0 } else { cd.distance };
        if best.as_ref().is_none_or(|(bd, _, _)| d > *bd + 1e-12) {
            best = Some((d, i, cd.weight));
        }
    }
    let (gap, wi, weight) = best.expect("nonempty");
    let suggested_weight = if gap > 0.0 {
        weight.unwrap_or_else(|| WeightVector::uniform(k))
    } else {
        WeightVector::uniform(k)
    };
    GapReport {
        gap,
        witness: over[wi].clone(),
        suggested_weight,
    }
}
