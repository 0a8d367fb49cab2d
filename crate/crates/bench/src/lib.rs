//! Seeded inputs for the benchmarks in `benches/`.

use mopareto::{normalize_objectives, Action, Mdp, NormalizedObjectives, ObjectiveKind, ObjectiveSpec, PointK};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `states` transient states with `actions` actions each, every action
/// leaking a quarter of its mass into an absorbing sink, and `k` maximised
/// reward objectives with uniform rewards in `[0, 1)`.
pub fn random_problem(seed: u64, states: usize, actions: usize, k: usize) -> NormalizedObjectives {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sink = states;
    let mut m = Mdp::with_states(states + 1, 0);
    let names: Vec<String> = (0..k).map(|i| format!("r{i}")).collect();
    for n in &names {
        m.add_reward_structure(n.clone());
    }
    for s in 0..states {
        for a in 0..actions {
            let succ: Vec<usize> = (0..3).map(|_| rng.gen_range(0..states)).collect();
            let mut dist: Vec<(usize, f64)> = vec![(sink, 0.25)];
            for t in succ {
                match dist.iter_mut().find(|(x, _)| *x == t) {
                    Some(e) => e.1 += 0.25,
                    None => dist.push((t, 0.25)),
                }
            }
            m.add_action(s, Action::new(format!("a{a}"), dist));
            for n in &names {
                m.set_reward(n, s, a, rng.gen());
            }
        }
    }
    m.add_action(sink, Action::to("stay", sink));
    let specs: Vec<ObjectiveSpec> = names.iter().map(|n| ObjectiveSpec::new(ObjectiveKind::RewardMax, n)).collect();
    normalize_objectives(&m, &specs).expect("generated problem is well formed")
}

/// Points on the positive octant of the unit sphere, so most are hull
/// vertices.
pub fn sphere_points(seed: u64, n: usize) -> Vec<PointK> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..3).map(|_| rng.gen_range(0.01..1.0)).collect();
            let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            PointK::new(v.into_iter().map(|x| x / len).collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_seeded_and_valid() {
        let a = random_problem(9, 20, 2, 3);
        assert!(a.model.validate().is_valid());
        assert_eq!(a, random_problem(9, 20, 2, 3));
        let p = sphere_points(4, 50);
        assert_eq!(p, sphere_points(4, 50));
        assert!(p.iter().all(|q| (q.coords().iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12));
    }
}
