use serde::{Deserialize, Serialize};

use super::{dot, sort_dedup, Halfspace, PointK, GEOM_EPS, PIVOT_EPS};

/// Axis-aligned box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lower: PointK,
    pub upper: PointK,
}

impl BoundingBox {
    pub fn new(lower: PointK, upper: PointK) -> Self {
        Self { lower, upper }
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.lower
            .coords()
            .iter()
            .zip(self.upper.coords())
            .any(|(l, u)| l > u)
    }
}

/// Vertices of `{q : w·q ≤ b for every halfspace} ∩ box`.
///
/// Every `dim`-subset of the bounding planes (halfspace boundaries and box
/// faces) is solved as a linear system; solutions satisfying all
/// constraints within `GEOM_EPS` are kept. Subsets whose elimination meets a
/// pivot below `PIVOT_EPS` are skipped. The result is deduplicated and
/// sorted lexicographically; an empty intersection yields an empty list.
pub fn halfspace_vertices(halfspaces: &[Halfspace], bbox: &BoundingBox) -> Vec<PointK> {
    let dim = bbox.dim();
    if dim == 0 || bbox.is_empty() {
        return Vec::new();
    }
    let mut planes: Vec<(Vec<f64>, f64)> = halfspaces
        .iter()
        .filter(|h| h.weights.dim() == dim)
        .map(|h| (h.weights.as_slice().to_vec(), h.offset))
        .collect();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        planes.push((e.clone(), bbox.upper.coords()[i]));
        e[i] = -1.0;
        planes.push((e, -bbox.lower.coords()[i]));
    }

    let feasible = |x: &[f64]| planes.iter().all(|(a, b)| dot(a, x) <= b + GEOM_EPS);
    let mut found = Vec::new();
    let mut subset: Vec<usize> = (0..dim).collect();
    let m = planes.len();
    loop {
        let rows: Vec<&(Vec<f64>, f64)> = subset.iter().map(|&i| &planes[i]).collect();
        if let Some(x) = solve(&rows) {
            if x.iter().all(|v| v.is_finite()) && feasible(&x) {
                found.push(PointK::new(x));
            }
        }
        if !next_combination(&mut subset, m) {
            break;
        }
    }
    sort_dedup(&found, GEOM_EPS)
}

/// Advances `c` to the next `c.len()`-combination of `0..n`.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Gaussian elimination with partial pivoting; `None` when a pivot falls
/// below `PIVOT_EPS`.
fn solve(rows: &[&(Vec<f64>, f64)]) -> Option<Vec<f64>> {
    let n = rows.len();
    let mut a: Vec<Vec<f64>> = rows
        .iter()
        .map(|(coef, b)| {
            let mut r = coef.clone();
            r.push(*b);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < PIVOT_EPS {
            return None;
        }
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=n {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}
