//! Convex geometry in dimensions 1 to 3.
//!
//! Everything here works in plain `f64` with absolute tolerances. Point
//! lists are sorted lexicographically before any construction, so outputs
//! are reproducible.

mod closure;
mod hull;
mod vertices;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use closure::{pareto_gap, ClosureDistance, DownwardClosure, GapReport};
pub(crate) use closure::pareto_gap_with;
pub use hull::{convex_hull, Facet, Hull, HullError};
pub use vertices::{halfspace_vertices, BoundingBox};

/// Tolerance for every geometric predicate.
pub const GEOM_EPS: f64 = 1e-9;
/// Pivots below this are treated as singular.
pub const PIVOT_EPS: f64 = 1e-12;
/// Tolerance on the L1 norm of a weight vector.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// A value vector with one coordinate per objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointK(Vec<f64>);

impl PointK {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn zeros(k: usize) -> Self {
        Self(vec![0.0; k])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        dot(&self.0, w)
    }

    pub fn distance(&self, other: &PointK) -> f64 {
        norm(&sub(&self.0, &other.0))
    }

    /// `other` is at least as large in every coordinate, up to `tol`.
    pub fn is_dominated_by(&self, other: &PointK, tol: f64) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a <= *b + tol)
    }

    pub fn approx_eq(&self, other: &PointK, tol: f64) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| (a - b).abs() <= tol)
    }
}

impl From<Vec<f64>> for PointK {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl<const N: usize> From<[f64; N]> for PointK {
    fn from(v: [f64; N]) -> Self {
        Self(v.to_vec())
    }
}

impl fmt::Display for PointK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

pub fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Sorts lexicographically and drops points within `tol` (per coordinate)
/// of an earlier kept point.
pub fn sort_dedup(points: &[PointK], tol: f64) -> Vec<PointK> {
    let mut sorted: Vec<PointK> = points.to_vec();
    sorted.sort_by(|a, b| lex_cmp(a.coords(), b.coords()));
    let mut kept: Vec<PointK> = Vec::with_capacity(sorted.len());
    for p in sorted {
        if !kept.iter().any(|q| q.approx_eq(&p, tol)) {
            kept.push(p);
        }
    }
    kept
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error("weight vector is empty")]
    Empty,
    #[error("weight {index} is {value}; weights must be finite and nonnegative")]
    Negative { index: usize, value: f64 },
    #[error("weights sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("weight vector has no positive entry")]
    Zero,
}

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self, WeightError> {
        if w.is_empty() {
            return Err(WeightError::Empty);
        }
        if let Some((index, &value)) = w.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x >= 0.0)) {
            return Err(WeightError::Negative { index, value });
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(WeightError::NotNormalized(sum));
        }
        Ok(Self(w))
    }

    /// Divides by the L1 norm. Entries in `[-1e-12, 0)` are treated as zero.
    pub fn normalized(raw: &[f64]) -> Result<Self, WeightError> {
        if raw.is_empty() {
            return Err(WeightError::Empty);
        }
        let mut w = Vec::with_capacity(raw.len());
        for (index, &x) in raw.iter().enumerate() {
            if !x.is_finite() || x < -PIVOT_EPS {
                return Err(WeightError::Negative { index, value: x });
            }
            w.push(x.max(0.0));
        }
        let sum: f64 = w.iter().sum();
        if sum <= 0.0 {
            return Err(WeightError::Zero);
        }
        for x in &mut w {
            *x /= sum;
        }
        Ok(Self(w))
    }

    pub fn unit(k: usize, axis: usize) -> Self {
        let mut w = vec![0.0; k];
        w[axis] = 1.0;
        Self(w)
    }

    pub fn uniform(k: usize) -> Self {
        Self(vec![1.0 / k as f64; k])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, p: &PointK) -> f64 {
        dot(&self.0, p.coords())
    }

    pub fn approx_eq(&self, other: &WeightVector, tol: f64) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| (a - b).abs() <= tol)
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = WeightError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        WeightVector::new(v)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", PointK(self.0.clone()))
    }
}

/// The region `{q : w·q ≤ offset}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub weights: WeightVector,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(weights: WeightVector, offset: f64) -> Self {
        Self { weights, offset }
    }

    /// `w·p − offset`; positive outside.
    pub fn violation(&self, p: &PointK) -> f64 {
        self.weights.dot(p) - self.offset
    }

    pub fn contains(&self, p: &PointK, tol: f64) -> bool {
        self.violation(p) <= tol
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Euclidean distance from `p` to the segment `[a, b]`.
pub(crate) fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    norm(&sub(p, &closest_on_segment(p, a, b)))
}

pub(crate) fn closest_on_segment(p: &[f64], a: &[f64], b: &[f64]) -> Vec<f64> {
    let ab = sub(b, a);
    let ap = sub(p, a);
    let len2 = dot(&ab, &ab);
    let t = if len2 > 0.0 { (dot(&ap, &ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    a.iter().zip(&ab).map(|(x, d)| x + t * d).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![0.5, 0.5]).is_ok());
        assert!(matches!(WeightVector::new(vec![0.5, 0.6]), Err(WeightError::NotNormalized(_))));
        assert!(matches!(WeightVector::new(vec![-0.1, 1.1]), Err(WeightError::Negative { index: 0, .. })));
        assert_eq!(WeightVector::new(vec![]), Err(WeightError::Empty));
        assert_eq!(WeightVector::normalized(&[0.0, 0.0]), Err(WeightError::Zero));
        let w = WeightVector::normalized(&[1.0, 3.0]).unwrap();
        assert_eq!(w.as_slice(), &[0.25, 0.75]);
        let u = WeightVector::uniform(3);
        assert!((u.as_slice().iter().sum::<f64>() - 1.0).abs() <= WEIGHT_SUM_TOLERANCE);
    }

    #[test]
    fn weight_vector_serde_validates() {
        let ok: WeightVector = serde_json::from_str("[0.25,0.75]").unwrap();
        assert_eq!(ok.as_slice(), &[0.25, 0.75]);
        assert!(serde_json::from_str::<WeightVector>("[0.5,0.75]").is_err());
    }

    #[test]
    fn dedup_merges_near_duplicates_out_of_lex_order() {
        let pts = vec![
            PointK::from([0.0, 1.0]),
            PointK::from([1e-12, 0.5]),
            PointK::from([2e-12, 1.0]),
        ];
        let d = sort_dedup(&pts, GEOM_EPS);
        assert_eq!(d.len(), 2);
        assert_eq!(d[0], PointK::from([0.0, 1.0]));
    }

    #[test]
    fn halfspace_violation_sign() {
        let h = Halfspace::new(WeightVector::uniform(2), 0.5);
        assert!(h.contains(&PointK::from([0.5, 0.5]), 0.0));
        assert!(h.violation(&PointK::from([1.0, 1.0])) > 0.0);
    }

    #[test]
    fn segment_distance() {
        let d = point_segment_distance(&[1.0, 1.0], &[1.0, 0.0], &[0.0, 1.0]);
        assert!((d - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(point_segment_distance(&[2.0, 0.0], &[0.0, 0.0], &[1.0, 0.0]), 1.0);
    }
}
