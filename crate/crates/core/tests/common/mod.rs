//! Random models and brute-force oracles shared by the integration tests.
//!
//! Nothing here calls the library's solver or geometry: strategy values come
//! from dense linear solves, optima from exhaustive enumeration.

#![allow(dead_code, unused_imports)]

use mopareto::{Action, Mdp, ObjectiveKind, ObjectiveSpec, PointK};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as TestRng;

pub const LABELS: [&str; 2] = ["goal", "alt"];

pub const QUARTERS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone)]
pub struct ModelShape {
    /// Non-sink states drawn uniformly from `1..=max_states`.
    pub max_states: usize,
    pub max_actions: usize,
    pub rewards: usize,
    /// Add an absorbing zero-reward sink reached with probability ≥ 0.2 by
    /// every action, so total rewards are finite.
    pub sink: bool,
}

impl ModelShape {
    pub fn transient(max_states: usize, max_actions: usize, rewards: usize) -> Self {
        Self {
            max_states,
            max_actions,
            rewards,
            sink: true,
        }
    }
}

pub fn reward_name(i: usize) -> String {
    format!("r{i}")
}

/// Random model with reward structures `r0, r1, ...` in quarter steps and,
/// when a sink is present, labels `goal` and `alt` on random nonempty state
/// subsets.
pub fn random_model(rng: &mut impl Rng, shape: &ModelShape) -> Mdp {
    let n = rng.gen_range(1..=shape.max_states);
    let total = n + usize::from(shape.sink);
    let mut m = Mdp::with_states(total, 0);
    for i in 0..shape.rewards {
        m.add_reward_structure(reward_name(i));
    }
    for s in 0..n {
        let actions = rng.gen_range(1..=shape.max_actions);
        for a in 0..actions {
            m.add_action(s, Action::new(format!("a{a}"), random_distribution(rng, n, shape.sink)));
            for i in 0..shape.rewards {
                m.set_reward(&reward_name(i), s, a, QUARTERS[rng.gen_range(0..QUARTERS.len())]);
            }
        }
    }
    if shape.sink {
        m.add_action(n, Action::to("stay", n));
        for name in LABELS {
            let set: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
            m.label_states(name, if set.is_empty() { vec![rng.gen_range(0..n)] } else { set });
        }
    }
    m
}

/// Integer weights over `0..n` plus, with a sink, at least a fifth of the
/// mass on state `n`.
fn random_distribution(rng: &mut impl Rng, n: usize, sink: bool) -> Vec<(usize, f64)> {
    loop {
        let weights: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=3)).collect();
        let body: u32 = weights.iter().sum();
        let to_sink = if sink { rng.gen_range(body.div_ceil(4).max(1)..=body.max(1) + 2) } else { 0 };
        let total = body + to_sink;
        if total == 0 {
            continue;
        }
        let mut dist: Vec<(usize, f64)> = weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0)
            .map(|(t, &w)| (t, w as f64 / total as f64))
            .collect();
        if sink {
            dist.push((n, to_sink as f64 / total as f64));
        }
        return dist;
    }
}

/// Reward objectives over the first `k` structures with random directions.
pub fn random_reward_specs(rng: &mut impl Rng, k: usize, step_bound: Option<u32>) -> Vec<ObjectiveSpec> {
    (0..k)
        .map(|i| {
            let kind = if rng.gen_bool(0.3) { ObjectiveKind::RewardMin } else { ObjectiveKind::RewardMax };
            ObjectiveSpec {
                kind,
                target: reward_name(i),
                step_bound,
            }
        })
        .collect()
}

/// Any mix of reward and reachability objectives.
pub fn random_specs(rng: &mut impl Rng, k: usize, rewards: usize) -> Vec<ObjectiveSpec> {
    use ObjectiveKind::*;
    (0..k)
        .map(|_| {
            let kind = [ProbReachMax, ProbReachMin, RewardMax, RewardMin][rng.gen_range(0..4)];
            let target = if kind.is_reachability() {
                LABELS[rng.gen_range(0..LABELS.len())].to_string()
            } else {
                reward_name(rng.gen_range(0..rewards))
            };
            ObjectiveSpec::new(kind, target)
        })
        .collect()
}

/// Every memoryless deterministic strategy, in odometer order.
pub fn memoryless_strategies(m: &Mdp) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut c = vec![0usize; m.num_states];
    loop {
        out.push(c.clone());
        let mut s = 0;
        loop {
            if s == m.num_states {
                return out;
            }
            c[s] += 1;
            if c[s] < m.actions[s].len() {
                break;
            }
            c[s] = 0;
            s += 1;
        }
    }
}

/// Every time-dependent table `steps[r - 1][s]` for `r` in `1..=horizon`.
pub fn time_dependent_strategies(m: &Mdp, horizon: usize) -> Vec<Vec<Vec<usize>>> {
    let layers = memoryless_strategies(m);
    let mut out: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for _ in 0..horizon {
        out = out
            .into_iter()
            .flat_map(|t| {
                layers.iter().map(move |l| {
                    let mut t = t.clone();
                    t.push(l.clone());
                    t
                })
            })
            .collect();
    }
    out
}

fn is_zero_trap(m: &Mdp, s: usize, a: usize, reward: impl Fn(usize, usize) -> f64) -> bool {
    m.actions[s][a].distribution == [(s, 1.0)] && reward(s, a) == 0.0
}

/// Solves `x = r + P x` with `x = fixed` on pinned states.
fn solve_chain(m: &Mdp, choices: &[usize], reward: impl Fn(usize, usize) -> f64, pinned: &[Option<f64>]) -> Vec<f64> {
    let n = m.num_states;
    let mut a = DMatrix::<f64>::identity(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for s in 0..n {
        if let Some(v) = pinned[s] {
            b[s] = v;
            continue;
        }
        b[s] = reward(s, choices[s]);
        for &(t, p) in &m.actions[s][choices[s]].distribution {
            a[(s, t)] -= p;
        }
    }
    let x = a.lu().solve(&b).expect("induced chain is transient");
    x.iter().copied().collect()
}

/// Expected total reward of a memoryless strategy, per state.
pub fn total_reward(m: &Mdp, choices: &[usize], name: &str) -> Vec<f64> {
    let r = &m.rewards[name];
    let reward = |s: usize, a: usize| r[s][a];
    let pinned: Vec<Option<f64>> = (0..m.num_states)
        .map(|s| is_zero_trap(m, s, choices[s], reward).then_some(0.0))
        .collect();
    solve_chain(m, choices, reward, &pinned)
}

/// Probability of eventually reaching `label` under a memoryless strategy.
pub fn reach_probability(m: &Mdp, choices: &[usize], label: &str) -> Vec<f64> {
    let targets = &m.labels[label];
    let pinned: Vec<Option<f64>> = (0..m.num_states)
        .map(|s| {
            if targets.contains(&s) {
                Some(1.0)
            } else if is_zero_trap(m, s, choices[s], |_, _| 0.0) {
                Some(0.0)
            } else {
                None
            }
        })
        .collect();
    solve_chain(m, choices, |_, _| 0.0, &pinned)
}

/// Expected reward over the first `table.len()` steps.
pub fn bounded_reward(m: &Mdp, table: &[Vec<usize>], name: &str) -> Vec<f64> {
    let r = &m.rewards[name];
    let mut x = vec![0.0; m.num_states];
    for layer in table {
        x = (0..m.num_states)
            .map(|s| {
                let a = layer[s];
                r[s][a] + m.actions[s][a].distribution.iter().map(|&(t, p)| p * x[t]).sum::<f64>()
            })
            .collect();
    }
    x
}

fn oriented(kind: ObjectiveKind, v: f64) -> f64 {
    match kind {
        ObjectiveKind::RewardMax | ObjectiveKind::ProbReachMax => v,
        ObjectiveKind::RewardMin | ObjectiveKind::ProbReachMin => -v,
    }
}

/// Value vector at the initial state in user orientation.
pub fn memoryless_value(m: &Mdp, specs: &[ObjectiveSpec], choices: &[usize]) -> PointK {
    PointK::new(
        specs
            .iter()
            .map(|o| {
                let x = if o.kind.is_reachability() {
                    reach_probability(m, choices, &o.target)
                } else {
                    total_reward(m, choices, &o.target)
                };
                x[m.initial_state]
            })
            .collect(),
    )
}

/// Same in maximising orientation (minimised objectives negated).
pub fn memoryless_value_normalized(m: &Mdp, specs: &[ObjectiveSpec], choices: &[usize]) -> PointK {
    let v = memoryless_value(m, specs, choices);
    PointK::new(specs.iter().zip(v.coords()).map(|(o, &x)| oriented(o.kind, x)).collect())
}

/// Bounded reward values at the initial state in user orientation.
pub fn time_dependent_value(m: &Mdp, specs: &[ObjectiveSpec], table: &[Vec<usize>]) -> PointK {
    PointK::new(specs.iter().map(|o| bounded_reward(m, table, &o.target)[m.initial_state]).collect())
}

pub fn normalized(specs: &[ObjectiveSpec], user: &PointK) -> PointK {
    PointK::new(specs.iter().zip(user.coords()).map(|(o, &x)| oriented(o.kind, x)).collect())
}

pub fn dot(w: &[f64], p: &PointK) -> f64 {
    w.iter().zip(p.coords()).map(|(a, b)| a * b).sum()
}

/// Random point of the probability simplex.
pub fn random_weight(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| -rng.gen_range(f64::EPSILON..1.0f64).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

/// Points not dominated by another point of the set.
pub fn maximal(points: &[PointK]) -> Vec<PointK> {
    let mut out: Vec<PointK> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let dominated = points.iter().enumerate().any(|(j, q)| {
            j != i
                && q.coords().iter().zip(p.coords()).all(|(a, b)| a >= b)
                && (q != p || j < i)
        });
        if !dominated {
            out.push(p.clone());
        }
    }
    out
}

/// Distinct points up to 1e-9 per coordinate.
pub fn sort_distinct(points: Vec<PointK>) -> Vec<PointK> {
    let mut out: Vec<PointK> = Vec::new();
    for p in points {
        if !out.iter().any(|q| q.approx_eq(&p, 1e-9)) {
            out.push(p);
        }
    }
    out
}

/// Minimises a convex function on `[0, 1]`.
fn ternary_min(f: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if f(a) <= f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    f(0.0).min(f(1.0)).min(f((lo + hi) / 2.0))
}

/// Distance from `p` to the downward closure of `conv(q)` in the plane.
///
/// The closure is the union of the closures of all segments between points
/// of `q`; along each segment the distance is convex in the parameter.
pub fn distance_to_closure_2d(p: &PointK, q: &[PointK]) -> f64 {
    let excess = |y: [f64; 2]| {
        let dx = (p.coords()[0] - y[0]).max(0.0);
        let dy = (p.coords()[1] - y[1]).max(0.0);
        dx.hypot(dy)
    };
    let mut best = f64::INFINITY;
    for (i, a) in q.iter().enumerate() {
        for b in &q[i..] {
            let (a, b) = (a.coords(), b.coords());
            let d = ternary_min(|t| excess([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]));
            best = best.min(d);
        }
    }
    best
}

/// Hausdorff distance between the downward closures of `conv(a)` and
/// `conv(b)`. Distance to a convex set is convex and monotone under
/// domination, so the suprema are attained at the generating points.
pub fn hausdorff_closure_2d(a: &[PointK], b: &[PointK]) -> f64 {
    let a = maximal(a);
    let b = maximal(b);
    let ab = a.iter().map(|p| distance_to_closure_2d(p, &b)).fold(0.0, f64::max);
    let ba = b.iter().map(|p| distance_to_closure_2d(p, &a)).fold(0.0, f64::max);
    ab.max(ba)
}
