//! The `.momdp.json` model document.
//!
//! A document bundles one model with its objective list. Parsing goes
//! through serde, so syntax and schema errors report a line and column;
//! semantic checks run afterwards and report the document path of the
//! offending element. Serialisation is canonical: fixed key order, labels
//! and rewards sorted by name, transitions sorted by target and floats in
//! shortest round-trip form.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mdp::{validate_mdp, Action, Mdp, Violation};
use crate::objective::ObjectiveSpec;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelDocument {
    pub format_version: u32,
    pub model: Mdp,
    pub objectives: Vec<ObjectiveSpec>,
}

impl ModelDocument {
    pub fn new(model: Mdp, objectives: Vec<ObjectiveSpec>) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            model,
            objectives,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticIssue {
    /// Location inside the document, e.g. `model.states[0].actions[1]`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for SemanticIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("schema error at line {line}, column {column}: {message}")]
    Schema { line: usize, column: usize, message: String },
    #[error("{}", join_issues(.0))]
    Semantic(Vec<SemanticIssue>),
}

fn join_issues(issues: &[SemanticIssue]) -> String {
    issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentRepr {
    format_version: u32,
    model: ModelRepr,
    objectives: Vec<ObjectiveRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelRepr {
    num_states: usize,
    initial_state: usize,
    states: Vec<StateRepr>,
    #[serde(default)]
    labels: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    rewards: BTreeMap<String, Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateRepr {
    actions: Vec<ActionRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionRepr {
    label: String,
    transitions: Vec<(usize, f64)>,
}

/// Same fields as `ObjectiveSpec`, but strict about unknown keys.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectiveRepr {
    kind: crate::objective::ObjectiveKind,
    target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    step_bound: Option<u32>,
}

pub fn parse_model_document(text: &str) -> Result<ModelDocument, ParseError> {
    let repr: DocumentRepr = serde_json::from_str(text).map_err(|e| {
        let (line, column) = (e.line(), e.column());
        let full = e.to_string();
        let suffix = format!(" at line {line} column {column}");
        let message = full.strip_suffix(&suffix).unwrap_or(&full).to_string();
        match e.classify() {
            serde_json::error::Category::Data => ParseError::Schema { line, column, message },
            _ => ParseError::Syntax { line, column, message },
        }
    })?;

    let mut issues = Vec::new();
    if repr.format_version != FORMAT_VERSION {
        issues.push(SemanticIssue {
            path: "format_version".into(),
            message: format!("unsupported version {}, expected {FORMAT_VERSION}", repr.format_version),
        });
    }
    let m = repr.model;
    let model = Mdp {
        num_states: m.num_states,
        initial_state: m.initial_state,
        actions: m
            .states
            .into_iter()
            .map(|s| s.actions.into_iter().map(|a| Action::new(a.label, a.transitions)).collect())
            .collect(),
        labels: m.labels.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect(),
        rewards: m.rewards,
    };
    issues.extend(validate_mdp(&model).violations.iter().map(|v| SemanticIssue {
        path: violation_path(v),
        message: v.to_string(),
    }));
    let objectives: Vec<ObjectiveSpec> = repr
        .objectives
        .into_iter()
        .map(|o| ObjectiveSpec {
            kind: o.kind,
            target: o.target,
            step_bound: o.step_bound,
        })
        .collect();
    for (i, o) in objectives.iter().enumerate() {
        let known = if o.kind.is_reachability() {
            model.labels.contains_key(&o.target)
        } else {
            model.rewards.contains_key(&o.target)
        };
        if !known {
            let what = if o.kind.is_reachability() { "label" } else { "reward structure" };
            issues.push(SemanticIssue {
                path: format!("objectives[{i}].target"),
                message: format!("no {what} named \"{}\"", o.target),
            });
        }
        if o.step_bound == Some(0) {
            issues.push(SemanticIssue {
                path: format!("objectives[{i}].step_bound"),
                message: "step bound must be at least 1".into(),
            });
        }
    }
    if !issues.is_empty() {
        return Err(ParseError::Semantic(issues));
    }
    Ok(ModelDocument {
        format_version: repr.format_version,
        model,
        objectives,
    })
}

fn violation_path(v: &Violation) -> String {
    match v {
        Violation::StateCountMismatch { .. } => "model.num_states".into(),
        Violation::InitialStateOutOfRange { .. } => "model.initial_state".into(),
        Violation::NoActions { state } => format!("model.states[{state}].actions"),
        Violation::EmptyDistribution { state, action }
        | Violation::TargetOutOfRange { state, action, .. }
        | Violation::DuplicateTarget { state, action, .. }
        | Violation::ProbabilityOutOfRange { state, action, .. }
        | Violation::ProbabilitySum { state, action, .. } => {
            format!("model.states[{state}].actions[{action}].transitions")
        }
        Violation::LabelStateOutOfRange { label, .. } => format!("model.labels.{label}"),
        Violation::RewardShape { reward, state: None, .. } => format!("model.rewards.{reward}"),
        Violation::RewardShape { reward, state: Some(s), .. } => format!("model.rewards.{reward}[{s}]"),
        Violation::RewardValue { reward, state, action, .. } => {
            format!("model.rewards.{reward}[{state}][{action}]")
        }
    }
}

/// Canonical text of `doc`. States, label entries, reward entries and
/// objectives each take one line.
pub fn serialize_model_document(doc: &ModelDocument) -> String {
    let m = &doc.model;
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"format_version\": {},\n", doc.format_version));
    out.push_str("  \"model\": {\n");
    out.push_str(&format!("    \"num_states\": {},\n", m.num_states));
    out.push_str(&format!("    \"initial_state\": {},\n", m.initial_state));
    out.push_str("    \"states\": [");
    for (s, acts) in m.actions.iter().enumerate() {
        out.push_str(if s == 0 { "\n" } else { ",\n" });
        let state = StateRepr {
            actions: acts
                .iter()
                .map(|a| ActionRepr {
                    label: a.label.clone(),
                    transitions: a.distribution.clone(),
                })
                .collect(),
        };
        out.push_str("      ");
        out.push_str(&compact(&state));
    }
    out.push_str(if m.actions.is_empty() { "],\n" } else { "\n    ],\n" });
    let labels: Vec<(String, String)> = m
        .labels
        .iter()
        .map(|(k, v)| (k.clone(), compact(&v.iter().copied().collect::<Vec<usize>>())))
        .collect();
    write_map(&mut out, "labels", &labels, true);
    let rewards: Vec<(String, String)> = m.rewards.iter().map(|(k, v)| (k.clone(), compact(v))).collect();
    write_map(&mut out, "rewards", &rewards, false);
    out.push_str("  },\n");
    out.push_str("  \"objectives\": [");
    for (i, o) in doc.objectives.iter().enumerate() {
        out.push_str(if i == 0 { "\n    " } else { ",\n    " });
        let repr = ObjectiveRepr {
            kind: o.kind,
            target: o.target.clone(),
            step_bound: o.step_bound,
        };
        out.push_str(&compact(&repr));
    }
    out.push_str(if doc.objectives.is_empty() { "]\n" } else { "\n  ]\n" });
    out.push_str("}\n");
    out
}

fn write_map(out: &mut String, name: &str, entries: &[(String, String)], trailing_comma: bool) {
    out.push_str(&format!("    \"{name}\": {{"));
    for (i, (k, v)) in entries.iter().enumerate() {
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        out.push_str(&format!("      {}: {v}", compact(k)));
    }
    out.push_str(if entries.is_empty() { "}" } else { "\n    }" });
    out.push_str(if trailing_comma { ",\n" } else { "\n" });
}

fn compact<T: Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serialises")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::trade_off_fixture;
    use crate::objective::ObjectiveKind;

    const MINIMAL: &str = r#"{"format_version":1,"model":{"num_states":1,"initial_state":0,
        "states":[{"actions":[{"label":"loop","transitions":[[0,1.0]]}]}],
        "rewards":{"r":[[0.5]]}},"objectives":[{"kind":"reward-max","target":"r","step_bound":3}]}"#;

    fn m1_doc() -> ModelDocument {
        ModelDocument::new(
            trade_off_fixture(),
            vec![
                ObjectiveSpec::new(ObjectiveKind::RewardMax, "r1"),
                ObjectiveSpec::new(ObjectiveKind::RewardMax, "r2"),
            ],
        )
    }

    #[test]
    fn minimal_document() {
        let d = parse_model_document(MINIMAL).unwrap();
        assert_eq!(d.model.num_states, 1);
        assert_eq!(d.objectives[0].step_bound, Some(3));
    }

    #[test]
    fn missing_initial_state_is_named() {
        let text = MINIMAL.replace("\"initial_state\":0,", "");
        let e = parse_model_document(&text).unwrap_err();
        assert!(matches!(e, ParseError::Schema { line: 3, .. }), "{e:?}");
        assert!(e.to_string().contains("initial_state"));
    }

    #[test]
    fn syntax_errors_have_positions() {
        let e = parse_model_document("{\n  \"format_version\": 1,\n  oops").unwrap_err();
        assert!(matches!(e, ParseError::Syntax { line: 3, column: 3, .. }), "{e:?}");
        let e = parse_model_document("").unwrap_err();
        assert!(matches!(e, ParseError::Syntax { line: 1, .. }), "{e:?}");
    }

    #[test]
    fn semantic_errors_have_paths() {
        let text = MINIMAL.replace("[[0,1.0]]", "[[0,0.9]]").replace("\"target\":\"r\"", "\"target\":\"q\"");
        let ParseError::Semantic(issues) = parse_model_document(&text).unwrap_err() else {
            panic!("expected semantic error");
        };
        let paths: Vec<&str> = issues.iter().map(|i| i.path.as_str()).collect();
        assert_eq!(paths, ["model.states[0].actions[0].transitions", "objectives[0].target"]);
        let text = MINIMAL.replace("\"format_version\":1", "\"format_version\":2");
        assert!(parse_model_document(&text).unwrap_err().to_string().starts_with("format_version:"));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = MINIMAL.replace("\"label\":\"loop\"", "\"label\":\"loop\",\"weight\":2");
        assert!(matches!(parse_model_document(&text), Err(ParseError::Schema { .. })));
    }

    #[test]
    fn m1_round_trip_is_a_fixed_point() {
        let doc = m1_doc();
        let text = serialize_model_document(&doc);
        let back = parse_model_document(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(serialize_model_document(&back), text);
        assert_eq!(back.model.actions[0].len(), 2);
    }

    #[test]
    fn shortest_float_rendering() {
        let mut m = Mdp::with_states(2, 0);
        m.add_action(0, Action::new("p", vec![(1, 0.9), (0, 0.1)]));
        m.add_action(1, Action::to("q", 1));
        m.label_states("goal", [1]);
        let text = serialize_model_document(&ModelDocument::new(
            m,
            vec![ObjectiveSpec::new(ObjectiveKind::ProbReachMax, "goal")],
        ));
        assert!(text.contains("[[0,0.1],[1,0.9]]"), "{text}");
        assert!(text.contains("\"rewards\": {}\n"), "{text}");
    }
}
