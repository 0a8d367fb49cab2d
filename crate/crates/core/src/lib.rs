//! Multi-objective model checking for Markov decision processes.
//!
//! The Pareto curve of a multi-objective MDP is approximated from both
//! sides by weighted-sum value iteration: each scalarised query contributes
//! an achievable point (growing the under-approximation) and a supporting
//! halfspace (shrinking the over-approximation) until the two are within a
//! requested distance of each other.

pub mod engine;
pub mod export;
pub mod geometry;
pub mod io;
pub mod mdp;
pub mod objective;
pub mod solver;

pub use geometry::{
    convex_hull, halfspace_vertices, pareto_gap, BoundingBox, Facet, GapReport, Halfspace, Hull,
    HullError, PointK, WeightVector,
};
pub use mdp::{validate_mdp, Action, Mdp, ValidationReport, Violation};
pub use objective::{
    normalize_objectives, NormalizeError, NormalizedObjectives, ObjectiveKind, ObjectiveSpec,
    Sign, Strategy,
};
pub use solver::{
    evaluate_strategy, finite_horizon_weighted_vi, weighted_value_iteration, QueryResult,
    SolverConfig, SolverError,
};
pub use engine::{
    approximate_pareto, approximate_pareto_observed, query_achievability, Achievability,
    EngineConfig, EngineError, ParetoApproximation, QueryRecord, Status,
};
pub use io::{parse_model_document, serialize_model_document, ModelDocument, ParseError};
pub use export::{emit_csv, emit_json, emit_tikz, parse_json, Axis, ExportBundle, ExportError, TikzStyle};
