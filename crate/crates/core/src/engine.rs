//! The refinement loop.
//!
//! The unit weights are queried first; they bound every axis and fix the
//! box that closes the over-approximation. Afterwards each round takes the
//! over vertex farthest from the under-approximation and queries the
//! normal of the closure facet nearest to it. A query either lifts the
//! under set past that facet or adds a halfspace cutting the vertex off.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::geometry::{
    halfspace_vertices, pareto_gap_with, BoundingBox, DownwardClosure, Halfspace, PointK,
    WeightVector, GEOM_EPS,
};
use crate::objective::NormalizedObjectives;
use crate::solver::{CompiledModel, QueryResult, SolverConfig, SolverError};

/// Added to each single-objective optimum to form the box's upper corner.
pub const BOX_MARGIN: f64 = 1e-6;
/// Two weights closer than this (per entry) count as the same query.
pub const REPEAT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub epsilon: f64,
    pub max_queries: usize,
    pub solver: SolverConfig,
    pub box_margin: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            max_queries: 64,
            solver: SolverConfig::default(),
            box_margin: BOX_MARGIN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    QueryBudgetExhausted,
    ViNotConverged,
    /// Stopped because a repeated weight made no progress.
    Degenerate,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::QueryBudgetExhausted => "query-budget-exhausted",
            Status::ViNotConverged => "vi-not-converged",
            Status::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub weight: WeightVector,
    pub point: PointK,
    pub scalar_value: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoApproximation {
    pub k: usize,
    /// Achieved value vectors, normalised orientation.
    pub under_points: Vec<PointK>,
    pub halfspaces: Vec<Halfspace>,
    pub query_log: Vec<QueryRecord>,
    /// Infinite until every unit weight has been answered.
    #[serde(serialize_with = "finite_or_null", deserialize_with = "null_as_infinity")]
    pub gap: f64,
    pub epsilon: f64,
    pub status: Status,
    pub bounding_box: Option<BoundingBox>,
    /// Vertices of the over-approximation inside the box.
    pub over_vertices: Vec<PointK>,
}

fn finite_or_null<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_none()
    }
}

fn null_as_infinity<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Achievability {
    Achievable,
    NotAchievable,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("{0} objectives given; between 1 and 3 are supported")]
    UnsupportedDimension(usize),
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("query budget {budget} is below the objective count {k}")]
    BudgetBelowObjectives { budget: usize, k: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Runs the refinement loop to completion.
pub fn approximate_pareto(
    norm: &NormalizedObjectives,
    cfg: &EngineConfig,
) -> Result<ParetoApproximation, EngineError> {
    approximate_pareto_observed(norm, cfg, |_| {})
}

/// Like [`approximate_pareto`], calling `observer` with the current state
/// after every query.
pub fn approximate_pareto_observed(
    norm: &NormalizedObjectives,
    cfg: &EngineConfig,
    mut observer: impl FnMut(&ParetoApproximation),
) -> Result<ParetoApproximation, EngineError> {
    let k = norm.k();
    if !(1..=3).contains(&k) {
        return Err(EngineError::UnsupportedDimension(k));
    }
    if !(cfg.epsilon > 0.0) {
        return Err(EngineError::InvalidEpsilon(cfg.epsilon));
    }
    if cfg.max_queries < k {
        return Err(EngineError::BudgetBelowObjectives {
            budget: cfg.max_queries,
            k,
        });
    }
    let model = CompiledModel::new(norm);
    let horizon = common_horizon(&model)?;
    let query = |w: &WeightVector| -> Result<QueryResult, SolverError> {
        match horizon {
            None => model.weighted_value_iteration(w, cfg.solver, None),
            Some(h) => model.finite_horizon(w, h),
        }
    };

    let mut approx = ParetoApproximation {
        k,
        under_points: Vec::new(),
        halfspaces: Vec::new(),
        query_log: Vec::new(),
        gap: f64::INFINITY,
        epsilon: cfg.epsilon,
        status: Status::QueryBudgetExhausted,
        bounding_box: None,
        over_vertices: Vec::new(),
    };

    for axis in 0..k {
        let w = WeightVector::unit(k, axis);
        if !record(&mut approx, &model, &w, query(&w)?) {
            approx.status = Status::ViNotConverged;
            observer(&approx);
            return Ok(approx);
        }
        observer(&approx);
    }
    if k == 1 {
        approx.gap = 0.0;
        approx.status = Status::Converged;
        approx.over_vertices = approx.under_points.clone();
        return Ok(approx);
    }

    let lower: Vec<f64> = (0..k)
        .map(|i| approx.under_points.iter().map(|p| p.coords()[i]).fold(0.0, f64::min))
        .collect();
    let upper: Vec<f64> = (0..k)
        .map(|i| approx.query_log[i].point.coords()[i] + cfg.box_margin)
        .collect();
    let bbox = BoundingBox::new(PointK::new(lower), PointK::new(upper));
    approx.bounding_box = Some(bbox.clone());

    loop {
        let closure = DownwardClosure::new(&approx.under_points);
        approx.over_vertices = halfspace_vertices(&approx.halfspaces, &bbox);
        if approx.over_vertices.is_empty() {
            // Only reachable through solver inexactness.
            approx.gap = 0.0;
            approx.status = Status::Degenerate;
            return Ok(approx);
        }
        let report = pareto_gap_with(&closure, &approx.over_vertices);
        approx.gap = report.gap;
        if report.gap <= cfg.epsilon {
            approx.status = Status::Converged;
            return Ok(approx);
        }
        if approx.query_log.len() >= cfg.max_queries {
            approx.status = Status::QueryBudgetExhausted;
            return Ok(approx);
        }
        let w = report.suggested_weight;
        let previous = approx
            .query_log
            .iter()
            .filter(|q| q.weight.approx_eq(&w, REPEAT_TOLERANCE))
            .map(|q| q.scalar_value)
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
        let result = query(&w)?;
        let stalled = previous.is_some_and(|b| result.scalar_value < b + 1e-9);
        if !record(&mut approx, &model, &w, result) {
            approx.status = Status::ViNotConverged;
            observer(&approx);
            return Ok(approx);
        }
        observer(&approx);
        if stalled {
            approx.status = Status::Degenerate;
            return Ok(approx);
        }
    }
}

/// Logs the query; a converged answer also contributes its point and
/// supporting halfspace. Returns whether it converged.
fn record(approx: &mut ParetoApproximation, model: &CompiledModel, w: &WeightVector, r: QueryResult) -> bool {
    let point = model.to_user(&r.point);
    approx.query_log.push(QueryRecord {
        weight: w.clone(),
        point: point.clone(),
        scalar_value: r.scalar_value,
        iterations: r.iterations_used,
        converged: r.converged,
    });
    if r.converged {
        approx.under_points.push(point);
        approx.halfspaces.push(Halfspace::new(w.clone(), r.scalar_value));
    }
    r.converged
}

fn common_horizon(model: &CompiledModel) -> Result<Option<usize>, SolverError> {
    let hs = model.horizons();
    if hs.iter().all(|h| *h == hs[0]) {
        Ok(hs[0].map(|h| h as usize))
    } else {
        Err(SolverError::MixedHorizons(hs.to_vec()))
    }
}

/// Decides `target` (normalised orientation) against both approximations.
pub fn query_achievability(approx: &ParetoApproximation, target: &PointK) -> Achievability {
    assert_eq!(target.dim(), approx.k, "target dimension");
    if !approx.under_points.is_empty()
        && DownwardClosure::new(&approx.under_points).distance(target).distance <= GEOM_EPS
    {
        return Achievability::Achievable;
    }
    if approx.halfspaces.iter().any(|h| h.violation(target) > GEOM_EPS) {
        return Achievability::NotAchievable;
    }
    Achievability::Unknown
}
