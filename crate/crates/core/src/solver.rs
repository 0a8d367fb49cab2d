//! Scalarised queries.
//!
//! Given weights over the normalised objectives, value iteration tracks a
//! full value vector per state. Each sweep picks, per state, the action
//! maximising the weighted one-step lookahead (lowest index among ties) and
//! backs up the whole vector along it, so the value vector of the returned
//! strategy comes out of the same pass as the optimum.

use std::collections::VecDeque;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use thiserror::Error;

use crate::geometry::{PointK, WeightVector};
use crate::mdp::StateIndex;
use crate::objective::{NormalizedObjectives, Sign, Strategy};

pub const DEFAULT_DELTA: f64 = 1e-8;
pub const DEFAULT_MAX_ITERS: usize = 1_000_000;
/// Any state value beyond this aborts the computation.
pub const DIVERGENCE_LIMIT: f64 = 1e12;
/// Convergence threshold for fixed-strategy evaluation.
pub const EVALUATION_TOLERANCE: f64 = 1e-10;
/// Relative tolerance under which two action values count as tied.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(
        "possibly infinite value: objective {objective} can collect reward forever from state {state}"
    )]
    PossiblyInfinite { state: StateIndex, objective: usize },
    #[error("possibly infinite value: state {state} exceeded {DIVERGENCE_LIMIT:e}")]
    Diverged { state: StateIndex },
    #[error("weight vector has {found} entries, expected {expected}")]
    WeightDimension { expected: usize, found: usize },
    #[error("objective {0} is step-bounded; use the finite-horizon solver")]
    BoundedObjective(usize),
    #[error("objectives have different step bounds ({0:?}); mixed horizons are not supported")]
    MixedHorizons(Vec<Option<u32>>),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("convergence threshold must be positive, got {0}")]
    InvalidDelta(f64),
    #[error("strategy does not fit the transformed model")]
    InvalidStrategy,
    #[error("strategy evaluation did not converge within {0} sweeps")]
    EvaluationNotConverged(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub delta: f64,
    pub max_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    /// Value vector at the initial state, minimised objectives reported with
    /// their own sign.
    pub point: PointK,
    /// `w · q` where `q` is `point` in normalised orientation.
    pub scalar_value: f64,
    pub strategy: Strategy,
    pub iterations_used: usize,
    pub converged: bool,
}

/// Transformed model in compressed sparse form with signed reward vectors.
#[derive(Debug, Clone)]
pub struct CompiledModel {
    k: usize,
    n: usize,
    initial: StateIndex,
    /// `choice_start[s]..choice_start[s + 1]` are the choices of state `s`.
    choice_start: Vec<usize>,
    /// `trans_start[c]..trans_start[c + 1]` index `targets`/`probs`.
    trans_start: Vec<usize>,
    targets: Vec<usize>,
    probs: Vec<f64>,
    /// `rewards[c * k + i]`, sign already applied.
    rewards: Vec<f64>,
    /// Same, before the sign.
    raw_rewards: Vec<f64>,
    reachable: Vec<StateIndex>,
    offsets: Vec<f64>,
    horizons: Vec<Option<u32>>,
    signs: Vec<Sign>,
}

impl CompiledModel {
    pub fn new(norm: &NormalizedObjectives) -> Self {
        let m = &norm.model;
        let k = norm.k();
        let tables: Vec<&Vec<Vec<f64>>> = norm.objectives.iter().map(|o| &m.rewards[&o.reward]).collect();
        let mut choice_start = Vec::with_capacity(m.num_states + 1);
        let mut trans_start = vec![0];
        let mut targets = Vec::new();
        let mut probs = Vec::new();
        let mut rewards = Vec::new();
        let mut raw_rewards = Vec::new();
        for (s, acts) in m.actions.iter().enumerate() {
            choice_start.push(trans_start.len() - 1);
            for (a, act) in acts.iter().enumerate() {
                for &(t, p) in &act.distribution {
                    targets.push(t);
                    probs.push(p);
                }
                trans_start.push(targets.len());
                for (i, o) in norm.objectives.iter().enumerate() {
                    let r = tables[i][s][a];
                    raw_rewards.push(r);
                    rewards.push(o.sign.factor() * r);
                }
            }
        }
        choice_start.push(trans_start.len() - 1);

        let mut seen = vec![false; m.num_states];
        let mut queue = VecDeque::from([m.initial_state]);
        seen[m.initial_state] = true;
        while let Some(s) = queue.pop_front() {
            for act in &m.actions[s] {
                for &(t, _) in &act.distribution {
                    if !seen[t] {
                        seen[t] = true;
                        queue.push_back(t);
                    }
                }
            }
        }
        let reachable = (0..m.num_states).filter(|&s| seen[s]).collect();

        Self {
            k,
            n: m.num_states,
            initial: m.initial_state,
            choice_start,
            trans_start,
            targets,
            probs,
            rewards,
            raw_rewards,
            reachable,
            offsets: norm.objectives.iter().map(|o| o.sign.factor() * o.offset).collect(),
            horizons: norm.objectives.iter().map(|o| o.horizon).collect(),
            signs: norm.signs(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn horizons(&self) -> &[Option<u32>] {
        &self.horizons
    }

    fn num_actions(&self, s: StateIndex) -> usize {
        self.choice_start[s + 1] - self.choice_start[s]
    }

    /// `r(c) + Σ_t P(c, t) · x(t)` written into `out`.
    fn backup(&self, c: usize, x: &[f64], out: &mut [f64]) {
        let k = self.k;
        out.copy_from_slice(&self.rewards[c * k..(c + 1) * k]);
        for j in self.trans_start[c]..self.trans_start[c + 1] {
            let t = self.targets[j];
            let p = self.probs[j];
            for i in 0..k {
                out[i] += p * x[t * k + i];
            }
        }
    }

    /// Flips minimised coordinates; its own inverse.
    pub fn to_user(&self, point: &PointK) -> PointK {
        PointK::new(point.coords().iter().zip(&self.signs).map(|(&x, s)| s.apply(x)).collect())
    }

    /// Normalised value at the initial state.
    fn finish(&self, x: &[f64]) -> PointK {
        let s = self.initial;
        PointK::new(
            (0..self.k)
                .map(|i| {
                    let v = x[s * self.k + i] + self.offsets[i];
                    if v == 0.0 {
                        0.0
                    } else {
                        v
                    }
                })
                .collect(),
        )
    }

    fn check_weights(&self, w: &WeightVector) -> Result<(), SolverError> {
        if w.dim() != self.k {
            return Err(SolverError::WeightDimension {
                expected: self.k,
                found: w.dim(),
            });
        }
        Ok(())
    }

    /// Rejects models where a maximised unbounded objective has a reachable
    /// end component containing a positive-reward action.
    pub fn check_finite(&self) -> Result<(), SolverError> {
        let objectives: Vec<usize> = (0..self.k)
            .filter(|&i| self.signs[i] == Sign::Maximize && self.horizons[i].is_none())
            .collect();
        if objectives.is_empty() {
            return Ok(());
        }
        for (state, actions) in self.end_components() {
            for c in actions {
                for &i in &objectives {
                    if self.raw_rewards[c * self.k + i] > 0.0 {
                        return Err(SolverError::PossiblyInfinite { state, objective: i });
                    }
                }
            }
        }
        Ok(())
    }

    /// Maximal end components among reachable states, flattened to
    /// `(state, choices kept inside the component)`.
    fn end_components(&self) -> Vec<(StateIndex, Vec<usize>)> {
        let mut in_play = vec![false; self.n];
        for &s in &self.reachable {
            in_play[s] = true;
        }
        let mut kept: Vec<Vec<usize>> = (0..self.n)
            .map(|s| {
                if in_play[s] {
                    (self.choice_start[s]..self.choice_start[s + 1]).collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        loop {
            let mut graph: DiGraph<StateIndex, ()> = DiGraph::new();
            let nodes: Vec<Option<NodeIndex>> = (0..self.n)
                .map(|s| in_play[s].then(|| graph.add_node(s)))
                .collect();
            for s in 0..self.n {
                if let Some(u) = nodes[s] {
                    for &c in &kept[s] {
                        for j in self.trans_start[c]..self.trans_start[c + 1] {
                            if let Some(v) = nodes[self.targets[j]] {
                                graph.add_edge(u, v, ());
                            }
                        }
                    }
                }
            }
            let mut comp = vec![usize::MAX; self.n];
            for (ci, scc) in tarjan_scc(&graph).into_iter().enumerate() {
                for node in scc {
                    comp[graph[node]] = ci;
                }
            }
            let mut changed = false;
            for s in 0..self.n {
                if !in_play[s] {
                    continue;
                }
                let before = kept[s].len();
                kept[s].retain(|&c| {
                    (self.trans_start[c]..self.trans_start[c + 1]).all(|j| {
                        let t = self.targets[j];
                        in_play[t] && comp[t] == comp[s]
                    })
                });
                if kept[s].len() != before {
                    changed = true;
                }
                if kept[s].is_empty() {
                    in_play[s] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        (0..self.n)
            .filter(|&s| in_play[s])
            .map(|s| (s, std::mem::take(&mut kept[s])))
            .collect()
    }

    /// Greedy action for `s` against `x` (lowest index among ties); leaves
    /// its backed-up vector in `best`.
    fn greedy(&self, s: StateIndex, w: &[f64], x: &[f64], scratch: &mut [f64], best: &mut [f64]) -> (usize, f64) {
        let start = self.choice_start[s];
        let na = self.num_actions(s);
        let mut values = [0.0f64; 16];
        let mut heap_values = Vec::new();
        let vals: &mut [f64] = if na <= 16 {
            &mut values[..na]
        } else {
            heap_values.resize(na, 0.0);
            &mut heap_values
        };
        let mut max = f64::NEG_INFINITY;
        for a in 0..na {
            self.backup(start + a, x, scratch);
            let v: f64 = scratch.iter().zip(w).map(|(xi, wi)| xi * wi).sum();
            vals[a] = v;
            max = max.max(v);
        }
        let tol = TIE_TOLERANCE * max.abs().max(1.0);
        let chosen = (0..na).find(|&a| vals[a] >= max - tol).unwrap_or(0);
        self.backup(start + chosen, x, best);
        (chosen, vals[chosen])
    }

    /// Weighted value iteration; `trace` receives the scalarised value at
    /// the initial state after every sweep.
    pub fn weighted_value_iteration(
        &self,
        w: &WeightVector,
        cfg: SolverConfig,
        mut trace: Option<&mut Vec<f64>>,
    ) -> Result<QueryResult, SolverError> {
        self.check_weights(w)?;
        if let Some(i) = self.horizons.iter().position(Option::is_some) {
            return Err(SolverError::BoundedObjective(i));
        }
        if !(cfg.delta > 0.0) {
            return Err(SolverError::InvalidDelta(cfg.delta));
        }
        self.check_finite()?;

        let k = self.k;
        let wv = w.as_slice();
        let mut x = vec![0.0; self.n * k];
        let mut next = vec![0.0; self.n * k];
        let mut scratch = vec![0.0; k];
        let mut best = vec![0.0; k];
        let mut choices = vec![0usize; self.n];
        let mut iterations = 0;
        let mut converged = false;

        while iterations < cfg.max_iters {
            iterations += 1;
            let mut change: f64 = 0.0;
            for &s in &self.reachable {
                let (a, scalar) = self.greedy(s, wv, &x, &mut scratch, &mut best);
                choices[s] = a;
                let old = &x[s * k..(s + 1) * k];
                let old_scalar: f64 = old.iter().zip(wv).map(|(o, wi)| o * wi).sum();
                change = change.max((scalar - old_scalar).abs());
                for i in 0..k {
                    change = change.max((best[i] - old[i]).abs());
                    if !(best[i].abs() <= DIVERGENCE_LIMIT) {
                        return Err(SolverError::Diverged { state: s });
                    }
                }
                next[s * k..(s + 1) * k].copy_from_slice(&best);
            }
            std::mem::swap(&mut x, &mut next);
            if let Some(t) = trace.as_deref_mut() {
                let s = self.initial;
                t.push(x[s * k..(s + 1) * k].iter().zip(wv).map(|(o, wi)| o * wi).sum());
            }
            if change < cfg.delta {
                converged = true;
                break;
            }
        }

        let point = self.finish(&x);
        Ok(QueryResult {
            scalar_value: w.dot(&point),
            point: self.to_user(&point),
            strategy: Strategy::Memoryless(choices),
            iterations_used: iterations,
            converged,
        })
    }

    /// Exactly `horizon` backward sweeps from zero. Unbounded objectives are
    /// truncated at `horizon`; a different explicit bound is an error.
    pub fn finite_horizon(&self, w: &WeightVector, horizon: usize) -> Result<QueryResult, SolverError> {
        self.check_weights(w)?;
        if horizon == 0 {
            return Err(SolverError::ZeroHorizon);
        }
        if self.horizons.iter().any(|h| h.is_some_and(|h| h as usize != horizon)) {
            return Err(SolverError::MixedHorizons(self.horizons.clone()));
        }
        let k = self.k;
        let wv = w.as_slice();
        let mut x = vec![0.0; self.n * k];
        let mut next = vec![0.0; self.n * k];
        let mut scratch = vec![0.0; k];
        let mut best = vec![0.0; k];
        let mut table = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            let mut choices = vec![0usize; self.n];
            for &s in &self.reachable {
                let (a, _) = self.greedy(s, wv, &x, &mut scratch, &mut best);
                choices[s] = a;
                if best.iter().any(|v| !(v.abs() <= DIVERGENCE_LIMIT)) {
                    return Err(SolverError::Diverged { state: s });
                }
                next[s * k..(s + 1) * k].copy_from_slice(&best);
            }
            std::mem::swap(&mut x, &mut next);
            table.push(choices);
        }
        let point = self.finish(&x);
        Ok(QueryResult {
            scalar_value: w.dot(&point),
            point: self.to_user(&point),
            strategy: Strategy::FiniteHorizon(table),
            iterations_used: horizon,
            converged: true,
        })
    }

    /// Value vector of a fixed strategy at the initial state.
    pub fn evaluate(&self, strategy: &Strategy) -> Result<PointK, SolverError> {
        let fits = |c: &Vec<usize>| c.len() == self.n && (0..self.n).all(|s| c[s] < self.num_actions(s));
        let k = self.k;
        match strategy {
            Strategy::FiniteHorizon(table) => {
                if table.is_empty() || !table.iter().all(fits) {
                    return Err(SolverError::InvalidStrategy);
                }
                let h = table.len();
                if self.horizons.iter().any(|b| b.is_some_and(|b| b as usize != h)) {
                    return Err(SolverError::MixedHorizons(self.horizons.clone()));
                }
                let x = self.sweep_fixed(|step, s| table[step][s], h);
                Ok(self.to_user(&self.finish(&x)))
            }
            Strategy::Memoryless(choices) => {
                if !fits(choices) {
                    return Err(SolverError::InvalidStrategy);
                }
                let mut out = vec![0.0; self.n * k];
                let unbounded: Vec<usize> = (0..k).filter(|&i| self.horizons[i].is_none()).collect();
                if !unbounded.is_empty() {
                    self.check_chain_finite(choices, &unbounded)?;
                    let x = self.fixed_point(choices)?;
                    for s in 0..self.n {
                        for &i in &unbounded {
                            out[s * k + i] = x[s * k + i];
                        }
                    }
                }
                let mut bounds: Vec<u32> = self.horizons.iter().flatten().copied().collect();
                bounds.sort_unstable();
                bounds.dedup();
                for h in bounds {
                    let x = self.sweep_fixed(|_, s| choices[s], h as usize);
                    for s in 0..self.n {
                        for i in 0..k {
                            if self.horizons[i] == Some(h) {
                                out[s * k + i] = x[s * k + i];
                            }
                        }
                    }
                }
                Ok(self.to_user(&self.finish(&out)))
            }
        }
    }

    /// `steps` backups along `choice(remaining - 1, state)`.
    fn sweep_fixed(&self, choice: impl Fn(usize, StateIndex) -> usize, steps: usize) -> Vec<f64> {
        let k = self.k;
        let mut x = vec![0.0; self.n * k];
        let mut next = vec![0.0; self.n * k];
        for step in 0..steps {
            for &s in &self.reachable {
                let c = self.choice_start[s] + choice(step, s);
                self.backup(c, &x, &mut next[s * k..(s + 1) * k]);
            }
            std::mem::swap(&mut x, &mut next);
        }
        x
    }

    fn fixed_point(&self, choices: &[usize]) -> Result<Vec<f64>, SolverError> {
        let k = self.k;
        let mut x = vec![0.0; self.n * k];
        let mut next = vec![0.0; self.n * k];
        for _ in 0..DEFAULT_MAX_ITERS {
            let mut change: f64 = 0.0;
            for &s in &self.reachable {
                let c = self.choice_start[s] + choices[s];
                let out = &mut next[s * k..(s + 1) * k];
                self.backup(c, &x, out);
                for i in 0..k {
                    change = change.max((out[i] - x[s * k + i]).abs());
                    if !(out[i].abs() <= DIVERGENCE_LIMIT) {
                        return Err(SolverError::Diverged { state: s });
                    }
                }
            }
            std::mem::swap(&mut x, &mut next);
            if change < EVALUATION_TOLERANCE {
                return Ok(x);
            }
        }
        Err(SolverError::EvaluationNotConverged(DEFAULT_MAX_ITERS))
    }

    /// In the chain induced by `choices`, rewards of bottom components must
    /// be zero for every unbounded objective.
    fn check_chain_finite(&self, choices: &[usize], objectives: &[usize]) -> Result<(), SolverError> {
        let mut graph: DiGraph<StateIndex, ()> = DiGraph::new();
        let nodes: Vec<NodeIndex> = (0..self.n).map(|s| graph.add_node(s)).collect();
        for &s in &self.reachable {
            let c = self.choice_start[s] + choices[s];
            for j in self.trans_start[c]..self.trans_start[c + 1] {
                graph.add_edge(nodes[s], nodes[self.targets[j]], ());
            }
        }
        let mut reachable = vec![false; self.n];
        for &s in &self.reachable {
            reachable[s] = true;
        }
        let sccs = tarjan_scc(&graph);
        let mut comp = vec![0; self.n];
        for (ci, scc) in sccs.iter().enumerate() {
            for &node in scc {
                comp[graph[node]] = ci;
            }
        }
        for scc in &sccs {
            let states: Vec<StateIndex> = scc.iter().map(|&nd| graph[nd]).collect();
            if !states.iter().all(|&s| reachable[s]) {
                continue;
            }
            let bottom = states.iter().all(|&s| {
                let c = self.choice_start[s] + choices[s];
                (self.trans_start[c]..self.trans_start[c + 1]).all(|j| comp[self.targets[j]] == comp[s])
            });
            if !bottom {
                continue;
            }
            for &s in &states {
                let c = self.choice_start[s] + choices[s];
                for &i in objectives {
                    if self.raw_rewards[c * self.k + i] != 0.0 {
                        return Err(SolverError::PossiblyInfinite { state: s, objective: i });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Optimal strategy and value vector for the weighted sum `w` of unbounded
/// objectives.
pub fn weighted_value_iteration(
    norm: &NormalizedObjectives,
    w: &WeightVector,
    delta: f64,
    max_iters: usize,
) -> Result<QueryResult, SolverError> {
    CompiledModel::new(norm).weighted_value_iteration(w, SolverConfig { delta, max_iters }, None)
}

/// Like [`weighted_value_iteration`], also returning the scalarised value at
/// the initial state after each sweep.
pub fn weighted_value_iteration_traced(
    norm: &NormalizedObjectives,
    w: &WeightVector,
    delta: f64,
    max_iters: usize,
) -> Result<(QueryResult, Vec<f64>), SolverError> {
    let mut trace = Vec::new();
    let r = CompiledModel::new(norm).weighted_value_iteration(w, SolverConfig { delta, max_iters }, Some(&mut trace))?;
    Ok((r, trace))
}

pub fn finite_horizon_weighted_vi(
    norm: &NormalizedObjectives,
    w: &WeightVector,
    horizon: usize,
) -> Result<QueryResult, SolverError> {
    CompiledModel::new(norm).finite_horizon(w, horizon)
}

pub fn evaluate_strategy(norm: &NormalizedObjectives, strategy: &Strategy) -> Result<PointK, SolverError> {
    CompiledModel::new(norm).evaluate(strategy)
}
