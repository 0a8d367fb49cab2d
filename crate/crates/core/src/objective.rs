//! Objectives, strategies and the reduction of every objective kind to a
//! maximised expected total reward.
//!
//! Reachability objectives become "reward on first entry": the model is
//! unfolded with a bitmask of the reach targets visited so far, and every
//! action taken with bit `i` unset pays the probability mass that enters
//! target `i`. When only reachability objectives are present, states whose
//! mask is full are made absorbing (one zero-reward self-loop). Each
//! original state `s` keeps index `s` in the unfolded model, carrying the
//! targets it satisfies plus those of the initial state; states reached with
//! other masks are appended after them in discovery order. Minimising
//! objectives are negated, so the solver only ever maximises.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::PointK;
use crate::mdp::{validate_mdp, Action, Mdp, StateIndex, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    ProbReachMax,
    ProbReachMin,
    RewardMax,
    RewardMin,
}

impl ObjectiveKind {
    pub fn is_reachability(self) -> bool {
        matches!(self, ObjectiveKind::ProbReachMax | ObjectiveKind::ProbReachMin)
    }

    pub fn sign(self) -> Sign {
        match self {
            ObjectiveKind::ProbReachMax | ObjectiveKind::RewardMax => Sign::Maximize,
            ObjectiveKind::ProbReachMin | ObjectiveKind::RewardMin => Sign::Minimize,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectiveKind::ProbReachMax => "prob-reach-max",
            ObjectiveKind::ProbReachMin => "prob-reach-min",
            ObjectiveKind::RewardMax => "reward-max",
            ObjectiveKind::RewardMin => "reward-min",
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    /// Proposition name for reachability kinds, reward-structure name otherwise.
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_bound: Option<u32>,
}

impl ObjectiveSpec {
    pub fn new(kind: ObjectiveKind, target: impl Into<String>) -> Self {
        Self {
            kind,
            target: target.into(),
            step_bound: None,
        }
    }

    pub fn bounded(kind: ObjectiveKind, target: impl Into<String>, steps: u32) -> Self {
        Self {
            kind,
            target: target.into(),
            step_bound: Some(steps),
        }
    }
}

impl fmt::Display for ObjectiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind, self.target)?;
        if let Some(k) = self.step_bound {
            write!(f, "[<={k}]")?;
        }
        Ok(())
    }
}

/// Orientation of an objective once normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sign {
    Maximize,
    Minimize,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Maximize => 1.0,
            Sign::Minimize => -1.0,
        }
    }

    /// Applies the sign; applying it twice is the identity. Zero stays `+0.0`.
    pub fn apply(self, x: f64) -> f64 {
        let y = self.factor() * x;
        if y == 0.0 {
            0.0
        } else {
            y
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedObjective {
    pub spec: ObjectiveSpec,
    /// Reward structure on the transformed model.
    pub reward: String,
    pub sign: Sign,
    pub horizon: Option<u32>,
    /// Raw value already collected before the first step (a reach target
    /// that holds in the initial state).
    pub offset: f64,
}

/// Where a transformed state came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProductState {
    pub state: StateIndex,
    /// Bit `i` set: reach target `i` has been visited.
    pub visited: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedObjectives {
    pub model: Mdp,
    pub objectives: Vec<NormalizedObjective>,
    /// Indexed by transformed state.
    pub origin: Vec<ProductState>,
    /// Transformed states collapsed to a single zero-reward self-loop.
    pub absorbing: Vec<bool>,
    /// Proposition names behind the bits of `ProductState::visited`.
    pub reach_targets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NormalizeError {
    #[error("at least one objective is required")]
    NoObjectives,
    #[error("objective {index} ({spec}): unknown proposition \"{name}\"")]
    UnknownProposition { index: usize, spec: String, name: String },
    #[error("objective {index} ({spec}): unknown reward structure \"{name}\"")]
    UnknownReward { index: usize, spec: String, name: String },
    #[error("objective {index} ({spec}): step bound must be at least 1")]
    ZeroStepBound { index: usize, spec: String },
    #[error("at most 64 distinct reachability targets are supported, got {0}")]
    TooManyTargets(usize),
    #[error("invalid model: {0}")]
    InvalidModel(ValidationReport),
}

impl NormalizedObjectives {
    pub fn k(&self) -> usize {
        self.objectives.len()
    }

    pub fn signs(&self) -> Vec<Sign> {
        self.objectives.iter().map(|o| o.sign).collect()
    }

    /// Converts a value vector in normalised (maximising) orientation back to
    /// the user's orientation.
    pub fn to_user(&self, point: &PointK) -> PointK {
        PointK::new(
            point
                .coords()
                .iter()
                .zip(&self.objectives)
                .map(|(&x, o)| o.sign.apply(x))
                .collect(),
        )
    }

    /// Normalised value from the raw transformed-model values at the initial
    /// state: adds the offsets and applies the signs.
    pub fn normalize_raw(&self, raw: &[f64]) -> PointK {
        PointK::new(
            raw.iter()
                .zip(&self.objectives)
                .map(|(&x, o)| o.sign.apply(x + o.offset))
                .collect(),
        )
    }

    /// Lifts a strategy of the original model to the transformed model.
    /// Absorbing states only have action 0.
    pub fn lift_strategy(&self, strategy: &Strategy) -> Strategy {
        let lift = |choices: &[usize]| -> Vec<usize> {
            self.origin
                .iter()
                .zip(&self.absorbing)
                .map(|(o, &abs)| if abs { 0 } else { choices[o.state] })
                .collect()
        };
        match strategy {
            Strategy::Memoryless(c) => Strategy::Memoryless(lift(c)),
            Strategy::FiniteHorizon(steps) => {
                Strategy::FiniteHorizon(steps.iter().map(|c| lift(c)).collect())
            }
        }
    }
}

/// Normalises `specs` against `model`. All objectives share one transformed
/// model.
pub fn normalize_objectives(
    model: &Mdp,
    specs: &[ObjectiveSpec],
) -> Result<NormalizedObjectives, NormalizeError> {
    if specs.is_empty() {
        return Err(NormalizeError::NoObjectives);
    }
    let report = validate_mdp(model);
    if !report.is_valid() {
        return Err(NormalizeError::InvalidModel(report));
    }

    let mut reach_targets: Vec<String> = Vec::new();
    for (index, spec) in specs.iter().enumerate() {
        if spec.step_bound == Some(0) {
            return Err(NormalizeError::ZeroStepBound {
                index,
                spec: spec.to_string(),
            });
        }
        if spec.kind.is_reachability() {
            if !model.labels.contains_key(&spec.target) {
                return Err(NormalizeError::UnknownProposition {
                    index,
                    spec: spec.to_string(),
                    name: spec.target.clone(),
                });
            }
            if !reach_targets.contains(&spec.target) {
                reach_targets.push(spec.target.clone());
            }
        } else if !model.rewards.contains_key(&spec.target) {
            return Err(NormalizeError::UnknownReward {
                index,
                spec: spec.to_string(),
                name: spec.target.clone(),
            });
        }
    }
    if reach_targets.len() > 64 {
        return Err(NormalizeError::TooManyTargets(reach_targets.len()));
    }

    let objectives_for = |reward_of: &dyn Fn(&ObjectiveSpec) -> String, init_mask: u64| {
        specs
            .iter()
            .map(|spec| {
                let offset = if spec.kind.is_reachability() {
                    let bit = reach_targets.iter().position(|t| t == &spec.target).unwrap();
                    if init_mask & (1 << bit) != 0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    0.0
                };
                NormalizedObjective {
                    spec: spec.clone(),
                    reward: reward_of(spec),
                    sign: spec.kind.sign(),
                    horizon: spec.step_bound,
                    offset,
                }
            })
            .collect::<Vec<_>>()
    };

    if reach_targets.is_empty() {
        let n = model.num_states;
        return Ok(NormalizedObjectives {
            model: model.clone(),
            objectives: objectives_for(&|s| s.target.clone(), 0),
            origin: (0..n).map(|state| ProductState { state, visited: 0 }).collect(),
            absorbing: vec![false; n],
            reach_targets,
        });
    }

    let target_masks: Vec<u64> = (0..model.num_states)
        .map(|s| {
            reach_targets
                .iter()
                .enumerate()
                .filter(|(_, name)| model.labels[*name].contains(&s))
                .fold(0u64, |m, (bit, _)| m | (1 << bit))
        })
        .collect();
    let full = if reach_targets.len() == 64 {
        u64::MAX
    } else {
        (1u64 << reach_targets.len()) - 1
    };
    let only_reach = specs.iter().all(|s| s.kind.is_reachability());
    let init_mask = target_masks[model.initial_state];

    let reach_names: Vec<String> = reach_targets
        .iter()
        .map(|t| unique_reward_name(model, &format!("reach:{t}")))
        .collect();

    let mut index: HashMap<ProductState, usize> = HashMap::new();
    let mut origin: Vec<ProductState> = Vec::new();
    let mut queue = VecDeque::new();
    for s in 0..model.num_states {
        let p = ProductState {
            state: s,
            visited: target_masks[s] | init_mask,
        };
        // Distinct states always give distinct seeds.
        index.insert(p, origin.len());
        origin.push(p);
        queue.push_back(p);
    }

    let mut actions: Vec<Vec<Action>> = Vec::new();
    let mut absorbing: Vec<bool> = Vec::new();
    // Per transformed state, per action: original action index (None for
    // the synthetic self-loop).
    let mut source_action: Vec<Vec<Option<usize>>> = Vec::new();

    while let Some(p) = queue.pop_front() {
        let id = index[&p];
        if actions.len() <= id {
            actions.resize(id + 1, Vec::new());
            absorbing.resize(id + 1, false);
            source_action.resize(id + 1, Vec::new());
        }
        if only_reach && p.visited == full {
            actions[id] = vec![Action::to("absorb", id)];
            absorbing[id] = true;
            source_action[id] = vec![None];
            continue;
        }
        let mut acts = Vec::with_capacity(model.actions[p.state].len());
        for action in &model.actions[p.state] {
            let mut dist = Vec::with_capacity(action.distribution.len());
            for &(t, prob) in &action.distribution {
                let q = ProductState {
                    state: t,
                    visited: p.visited | target_masks[t],
                };
                let qid = *index.entry(q).or_insert_with(|| {
                    origin.push(q);
                    queue.push_back(q);
                    origin.len() - 1
                });
                dist.push((qid, prob));
            }
            acts.push(Action::new(action.label.clone(), dist));
        }
        source_action[id] = (0..acts.len()).map(Some).collect();
        actions[id] = acts;
    }

    let n = origin.len();
    let mut rewards: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
    for (name, table) in &model.rewards {
        let lifted = (0..n)
            .map(|id| {
                source_action[id]
                    .iter()
                    .map(|src| src.map_or(0.0, |a| table[origin[id].state][a]))
                    .collect()
            })
            .collect();
        rewards.insert(name.clone(), lifted);
    }
    for (bit, name) in reach_names.iter().enumerate() {
        let target = &model.labels[&reach_targets[bit]];
        let table = (0..n)
            .map(|id| {
                let p = origin[id];
                source_action[id]
                    .iter()
                    .map(|src| match src {
                        Some(a) if p.visited & (1 << bit) == 0 => model.actions[p.state][*a]
                            .distribution
                            .iter()
                            .filter(|(t, _)| target.contains(t))
                            .map(|(_, prob)| prob)
                            .sum::<f64>()
                            .min(1.0),
                        _ => 0.0,
                    })
                    .collect()
            })
            .collect();
        rewards.insert(name.clone(), table);
    }

    let mut labels = BTreeMap::new();
    for (name, states) in &model.labels {
        let lifted = (0..n).filter(|&id| states.contains(&origin[id].state)).collect();
        labels.insert(name.clone(), lifted);
    }

    let transformed = Mdp {
        num_states: n,
        initial_state: model.initial_state,
        actions,
        labels,
        rewards,
    };
    debug_assert!(validate_mdp(&transformed).is_valid());

    let reward_of = |spec: &ObjectiveSpec| {
        if spec.kind.is_reachability() {
            let bit = reach_targets.iter().position(|t| t == &spec.target).unwrap();
            reach_names[bit].clone()
        } else {
            spec.target.clone()
        }
    };
    let objectives = objectives_for(&reward_of, init_mask);

    Ok(NormalizedObjectives {
        model: transformed,
        objectives,
        origin,
        absorbing,
        reach_targets,
    })
}

fn unique_reward_name(model: &Mdp, base: &str) -> String {
    let mut name = base.to_string();
    let mut i = 1;
    while model.rewards.contains_key(&name) {
        name = format!("{base}#{i}");
        i += 1;
    }
    name
}

/// A deterministic strategy.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// `choices[s]` is the action taken in state `s`.
    Memoryless(Vec<usize>),
    /// `steps[r - 1][s]` is the action taken in `s` with `r` steps remaining.
    FiniteHorizon(Vec<Vec<usize>>),
}

impl Strategy {
    /// Action in `state` with `remaining` steps to go. Memoryless strategies
    /// ignore `remaining`.
    pub fn choice(&self, remaining: usize, state: StateIndex) -> usize {
        match self {
            Strategy::Memoryless(c) => c[state],
            Strategy::FiniteHorizon(steps) => steps[remaining - 1][state],
        }
    }

    pub fn horizon(&self) -> Option<usize> {
        match self {
            Strategy::Memoryless(_) => None,
            Strategy::FiniteHorizon(steps) => Some(steps.len()),
        }
    }

    pub fn is_valid_for(&self, model: &Mdp) -> bool {
        let ok = |c: &Vec<usize>| {
            c.len() == model.num_states
                && c.iter().enumerate().all(|(s, &a)| a < model.actions[s].len())
        };
        match self {
            Strategy::Memoryless(c) => ok(c),
            Strategy::FiniteHorizon(steps) => !steps.is_empty() && steps.iter().all(ok),
        }
    }
}
