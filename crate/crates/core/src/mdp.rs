//! Explicit-state Markov decision processes.
//!
//! States are dense indices `0..num_states`. Every state owns an ordered list
//! of actions; an action is a sparse distribution over successor states.
//! Reward structures assign a nonnegative value to every (state, action)
//! pair and are addressed by name, as are atomic-proposition labels.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Tolerance on `sum(probabilities) == 1`.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-9;

pub type StateIndex = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub label: String,
    /// `(target, probability)` pairs, sorted by target.
    pub distribution: Vec<(StateIndex, f64)>,
}

impl Action {
    pub fn new(label: impl Into<String>, mut distribution: Vec<(StateIndex, f64)>) -> Self {
        distribution.sort_by_key(|&(t, _)| t);
        Self {
            label: label.into(),
            distribution,
        }
    }

    /// Deterministic move to `target`.
    pub fn to(label: impl Into<String>, target: StateIndex) -> Self {
        Self::new(label, vec![(target, 1.0)])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mdp {
    pub num_states: usize,
    pub initial_state: StateIndex,
    /// `actions[s]` lists the actions enabled in state `s`.
    pub actions: Vec<Vec<Action>>,
    pub labels: BTreeMap<String, BTreeSet<StateIndex>>,
    /// `rewards[name][s][a]`.
    pub rewards: BTreeMap<String, Vec<Vec<f64>>>,
}

impl Mdp {
    /// A model with `num_states` states and no actions, labels or rewards.
    /// Callers fill in actions before use; an action-less state is invalid.
    pub fn with_states(num_states: usize, initial_state: StateIndex) -> Self {
        Self {
            num_states,
            initial_state,
            actions: vec![Vec::new(); num_states],
            labels: BTreeMap::new(),
            rewards: BTreeMap::new(),
        }
    }

    /// Appends an action to `state` and returns its index. Every existing
    /// reward structure gets a zero entry for it.
    pub fn add_action(&mut self, state: StateIndex, action: Action) -> usize {
        self.actions[state].push(action);
        for per_state in self.rewards.values_mut() {
            per_state[state].push(0.0);
        }
        self.actions[state].len() - 1
    }

    /// Registers a reward structure, zero everywhere, and returns a handle
    /// to set individual entries.
    pub fn add_reward_structure(&mut self, name: impl Into<String>) -> &mut Vec<Vec<f64>> {
        let zeros = self.actions.iter().map(|acts| vec![0.0; acts.len()]).collect();
        self.rewards.entry(name.into()).or_insert(zeros)
    }

    pub fn set_reward(&mut self, name: &str, state: StateIndex, action: usize, value: f64) {
        if let Some(table) = self.rewards.get_mut(name) {
            table[state][action] = value;
        }
    }

    pub fn label_states(&mut self, name: impl Into<String>, states: impl IntoIterator<Item = StateIndex>) {
        self.labels.entry(name.into()).or_default().extend(states);
    }

    pub fn num_choices(&self) -> usize {
        self.actions.iter().map(Vec::len).sum()
    }

    pub fn validate(&self) -> ValidationReport {
        validate_mdp(self)
    }
}

/// One broken model invariant, with the coordinates it was found at.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    StateCountMismatch { declared: usize, actual: usize },
    InitialStateOutOfRange { initial: StateIndex, num_states: usize },
    NoActions { state: StateIndex },
    EmptyDistribution { state: StateIndex, action: usize },
    TargetOutOfRange { state: StateIndex, action: usize, target: StateIndex },
    DuplicateTarget { state: StateIndex, action: usize, target: StateIndex },
    ProbabilityOutOfRange { state: StateIndex, action: usize, target: StateIndex, probability: f64 },
    ProbabilitySum { state: StateIndex, action: usize, sum: f64 },
    LabelStateOutOfRange { label: String, state: StateIndex },
    RewardShape { reward: String, state: Option<StateIndex>, expected: usize, actual: usize },
    RewardValue { reward: String, state: StateIndex, action: usize, value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::StateCountMismatch { declared, actual } => {
                write!(f, "num_states is {declared} but {actual} states are defined")
            }
            Violation::InitialStateOutOfRange { initial, num_states } => {
                write!(f, "initial state {initial} out of range (num_states = {num_states})")
            }
            Violation::NoActions { state } => write!(f, "state {state} has no actions"),
            Violation::EmptyDistribution { state, action } => {
                write!(f, "empty distribution at ({state},{action})")
            }
            Violation::TargetOutOfRange { state, action, target } => {
                write!(f, "target {target} out of range at ({state},{action})")
            }
            Violation::DuplicateTarget { state, action, target } => {
                write!(f, "target {target} listed twice at ({state},{action})")
            }
            Violation::ProbabilityOutOfRange { state, action, target, probability } => {
                write!(f, "probability {probability} to {target} not in (0,1] at ({state},{action})")
            }
            Violation::ProbabilitySum { state, action, sum } => {
                write!(f, "sum {sum} ≠ 1 at ({state},{action})")
            }
            Violation::LabelStateOutOfRange { label, state } => {
                write!(f, "label \"{label}\" names state {state}, which does not exist")
            }
            Violation::RewardShape { reward, state: None, expected, actual } => {
                write!(f, "reward \"{reward}\" covers {actual} states, expected {expected}")
            }
            Violation::RewardShape { reward, state: Some(s), expected, actual } => {
                write!(f, "reward \"{reward}\" has {actual} entries at state {s}, expected {expected}")
            }
            Violation::RewardValue { reward, state, action, value } => {
                write!(f, "reward \"{reward}\" value {value} is negative or non-finite at ({state},{action})")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every structural invariant and reports all violations found.
/// Never stops at the first problem.
pub fn validate_mdp(model: &Mdp) -> ValidationReport {
    let mut violations = Vec::new();
    let n = model.num_states;

    if model.actions.len() != n {
        violations.push(Violation::StateCountMismatch {
            declared: n,
            actual: model.actions.len(),
        });
    }
    let defined = model.actions.len();
    if model.initial_state >= n.min(defined) {
        violations.push(Violation::InitialStateOutOfRange {
            initial: model.initial_state,
            num_states: n,
        });
    }

    for (s, acts) in model.actions.iter().enumerate() {
        if acts.is_empty() {
            violations.push(Violation::NoActions { state: s });
        }
        for (a, action) in acts.iter().enumerate() {
            if action.distribution.is_empty() {
                violations.push(Violation::EmptyDistribution { state: s, action: a });
                continue;
            }
            let mut seen = BTreeSet::new();
            let mut sum = 0.0;
            for &(t, p) in &action.distribution {
                if t >= n {
                    violations.push(Violation::TargetOutOfRange { state: s, action: a, target: t });
                }
                if !seen.insert(t) {
                    violations.push(Violation::DuplicateTarget { state: s, action: a, target: t });
                }
                if !(p > 0.0 && p <= 1.0) {
                    violations.push(Violation::ProbabilityOutOfRange {
                        state: s,
                        action: a,
                        target: t,
                        probability: p,
                    });
                }
                sum += p;
            }
            if !((sum - 1.0).abs() <= PROBABILITY_SUM_TOLERANCE) {
                violations.push(Violation::ProbabilitySum { state: s, action: a, sum });
            }
        }
    }

    for (label, states) in &model.labels {
        for &s in states {
            if s >= n {
                violations.push(Violation::LabelStateOutOfRange {
                    label: label.clone(),
                    state: s,
                });
            }
        }
    }

    for (name, table) in &model.rewards {
        if table.len() != defined {
            violations.push(Violation::RewardShape {
                reward: name.clone(),
                state: None,
                expected: defined,
                actual: table.len(),
            });
            continue;
        }
        for (s, row) in table.iter().enumerate() {
            let expected = model.actions[s].len();
            if row.len() != expected {
                violations.push(Violation::RewardShape {
                    reward: name.clone(),
                    state: Some(s),
                    expected,
                    actual: row.len(),
                });
            }
            for (a, &value) in row.iter().enumerate() {
                if !(value.is_finite() && value >= 0.0) {
                    violations.push(Violation::RewardValue {
                        reward: name.clone(),
                        state: s,
                        action: a,
                        value,
                    });
                }
            }
        }
    }

    ValidationReport { violations }
}

/// The two-action trade-off model used throughout the tests: from `s0`,
/// action `a` pays `(1, 0)` and action `b` pays `(0, 1)`, both moving to an
/// absorbing zero-reward sink.
pub fn trade_off_fixture() -> Mdp {
    let mut m = Mdp::with_states(2, 0);
    m.add_action(0, Action::to("a", 1));
    m.add_action(0, Action::to("b", 1));
    m.add_action(1, Action::to("loop", 1));
    m.add_reward_structure("r1");
    m.add_reward_structure("r2");
    m.set_reward("r1", 0, 0, 1.0);
    m.set_reward("r2", 0, 1, 1.0);
    m
}
