mod common;

use common::{distance_to_closure_2d, maximal};
use mopareto::{convex_hull, halfspace_vertices, pareto_gap, BoundingBox, Halfspace, HullError, PointK, WeightVector};
use proptest::prelude::*;

/// Points on a coarse grid, so coincident, collinear and coplanar subsets
/// are common.
fn grid_points(dim: usize, max: usize) -> impl Strategy<Value = Vec<PointK>> {
    prop::collection::vec(prop::collection::vec(0u32..=8, dim), 1..=max)
        .prop_map(|ps| ps.into_iter().map(|c| PointK::new(c.into_iter().map(|x| x as f64 / 8.0).collect())).collect())
}

/// Points with arbitrary coordinates.
fn cloud(dim: usize, max: usize) -> impl Strategy<Value = Vec<PointK>> {
    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, dim), 1..=max)
        .prop_map(|ps| ps.into_iter().map(PointK::new).collect())
}

fn points(max: usize) -> impl Strategy<Value = (usize, Vec<PointK>)> {
    (2usize..=3).prop_flat_map(move |d| (Just(d), prop_oneof![grid_points(d, max), cloud(d, max)]))
}

fn same_set(a: &[PointK], b: &[PointK], tol: f64) -> bool {
    a.len() == b.len() && a.iter().all(|p| b.iter().any(|q| p.approx_eq(q, tol)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn hull_contains_its_input((dim, pts) in points(24)) {
        match convex_hull(&pts, dim) {
            Ok(hull) => {
                for p in &pts {
                    prop_assert!(hull.contains(p, 1e-9), "{p:?} outside");
                }
                for f in &hull.facets {
                    for &v in &f.vertices {
                        prop_assert!(f.violation(hull.vertices[v].coords()).abs() <= 1e-9);
                    }
                    let l1: f64 = f.normal.iter().map(|x| x.abs()).sum();
                    prop_assert!((l1 - 1.0).abs() <= 1e-12);
                }
                // Outward normals: the vertex centroid is strictly inside.
                let n = hull.vertices.len() as f64;
                let centroid: Vec<f64> = (0..dim)
                    .map(|i| hull.vertices.iter().map(|v| v.coords()[i]).sum::<f64>() / n)
                    .collect();
                for f in &hull.facets {
                    prop_assert!(f.violation(&centroid) < 0.0);
                }
            }
            Err(HullError::Degenerate { affine_dim, .. }) => prop_assert!(affine_dim < dim),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn hull_is_idempotent((dim, pts) in points(24)) {
        if let Ok(hull) = convex_hull(&pts, dim) {
            let again = convex_hull(&hull.vertices, dim).unwrap();
            prop_assert!(same_set(&hull.vertices, &again.vertices, 0.0));
            prop_assert_eq!(hull.facets.len(), again.facets.len());
        }
    }

    /// On grid input every reported vertex is extreme: the hull of the
    /// remaining points leaves it outside.
    #[test]
    fn hull_vertices_are_extreme((dim, pts) in (2usize..=3).prop_flat_map(|d| (Just(d), grid_points(d, 16)))) {
        if let Ok(hull) = convex_hull(&pts, dim) {
            for (i, v) in hull.vertices.iter().enumerate() {
                let rest: Vec<PointK> = pts.iter().filter(|p| *p != v).cloned().collect();
                match convex_hull(&rest, dim) {
                    Ok(h) => prop_assert!(!h.contains(v, 1e-9), "vertex {i} {v:?} not extreme"),
                    Err(HullError::Degenerate { .. }) => {}
                    Err(e) => prop_assert!(false, "{e}"),
                }
            }
        }
    }

    /// Near-duplicates a few tolerances apart must neither open holes in
    /// the surface nor double-count it.
    #[test]
    fn clustered_copies_keep_the_volume(
        pts in cloud(3, 12),
        jitter in prop::collection::vec(prop::collection::vec(-1e-8f64..1e-8, 3), 12),
    ) {
        let Ok(base) = convex_hull(&pts, 3) else { return Ok(()) };
        let mut noisy = pts.clone();
        noisy.extend(pts.iter().zip(&jitter).map(|(p, j)| PointK::new(p.coords().iter().zip(j).map(|(x, e)| x + e).collect())));
        let hull = convex_hull(&noisy, 3).unwrap();
        prop_assert!((hull.volume() - base.volume()).abs() <= 1e-6, "{} vs {}", hull.volume(), base.volume());
        for p in &noisy {
            prop_assert!(hull.contains(p, 1e-9));
        }
    }

    /// The facets of the hull of the vertex enumeration imply every input
    /// halfspace on the box.
    #[test]
    fn vertex_enumeration_duality(
        dim in 2usize..=3,
        hs in prop::collection::vec((prop::collection::vec(0.0f64..1.0, 3), 0.05f64..1.5), 1..=8),
        upper in 0.5f64..2.0,
    ) {
        let hs: Vec<Halfspace> = hs
            .into_iter()
            .map(|(w, b)| Halfspace::new(WeightVector::normalized(&w[..dim]).unwrap_or_else(|_| WeightVector::uniform(dim)), b))
            .collect();
        let bbox = BoundingBox::new(PointK::zeros(dim), PointK::new(vec![upper; dim]));
        let vertices = halfspace_vertices(&hs, &bbox);
        let hull = convex_hull(&vertices, dim).unwrap();
        prop_assert!(same_set(&hull.vertices, &vertices, 1e-6));
        for h in &hs {
            // max of w·x over the facet polytope is attained at a vertex.
            let top = hull.vertices.iter().map(|v| h.weights.dot(v)).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(top <= h.offset + 1e-6);
        }
    }

    /// The gap equals the largest oracle distance from an over vertex to
    /// the closure of the under set.
    #[test]
    fn gap_matches_oracle_in_the_plane(
        under in prop_oneof![grid_points(2, 8), cloud(2, 8)],
        over in prop_oneof![grid_points(2, 8), cloud(2, 8)],
    ) {
        let report = pareto_gap(&under, &over);
        let oracle = over.iter().map(|v| distance_to_closure_2d(v, &under)).fold(0.0, f64::max);
        let oracle = if oracle <= 1e-9 { 0.0 } else { oracle };
        prop_assert!((report.gap - oracle).abs() <= 1e-8, "{} vs {}", report.gap, oracle);
        prop_assert_eq!(report.gap == 0.0, over.iter().all(|v| distance_to_closure_2d(v, &under) <= 1e-9));
        let w = report.suggested_weight.as_slice();
        prop_assert!(w.iter().all(|&x| x >= 0.0));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    /// Over vertices dominated by an under point contribute nothing.
    #[test]
    fn dominated_vertices_have_zero_gap((dim, under) in points(10), shrink in prop::collection::vec(0.0f64..1.0, 10)) {
        let over: Vec<PointK> = maximal(&under)
            .iter()
            .zip(&shrink)
            .map(|(p, s)| PointK::new(p.coords().iter().map(|x| x - s).collect()))
            .collect();
        let report = pareto_gap(&under, &over);
        prop_assert_eq!(report.gap, 0.0);
        prop_assert_eq!(report.suggested_weight.dim(), dim);
    }
}

#[test]
fn spec_style_examples() {
    let h = convex_hull(
        &[PointK::from([0.0, 0.0]), PointK::from([1.0, 0.0]), PointK::from([0.0, 1.0]), PointK::from([0.2, 0.2])],
        2,
    )
    .unwrap();
    assert!(same_set(
        &h.vertices,
        &[PointK::from([0.0, 0.0]), PointK::from([1.0, 0.0]), PointK::from([0.0, 1.0])],
        0.0
    ));
    let coplanar = [[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 1.0]].map(PointK::from);
    assert!(matches!(convex_hull(&coplanar, 3), Err(HullError::Degenerate { affine_dim: 2, .. })));

    let half = Halfspace::new(WeightVector::uniform(2), 0.5);
    let unit = BoundingBox::new(PointK::zeros(2), PointK::from([1.0, 1.0]));
    assert_eq!(
        halfspace_vertices(&[half], &unit),
        [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]].map(PointK::from)
    );
    let left = Halfspace::new(WeightVector::unit(2, 0), -1.0);
    assert!(halfspace_vertices(&[left], &unit).is_empty());

    let triangle = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]].map(PointK::from);
    let r = pareto_gap(&triangle, &[PointK::from([1.0, 1.0])]);
    assert!((r.gap - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    assert_eq!(r.suggested_weight.as_slice(), &[0.5, 0.5]);
    let r = pareto_gap(&[PointK::from([1.0, 0.0])], &[PointK::from([1.0, 1.0])]);
    assert!((r.gap - 1.0).abs() < 1e-12);
    assert_eq!(r.suggested_weight.as_slice(), &[0.0, 1.0]);
}
