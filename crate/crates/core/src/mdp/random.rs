//! Seeded random instances for property suites and tests.

use rand::Rng;

use crate::mdp::{Policy, TabularMdp};

/// Strictly positive random distribution of the given length.
pub fn random_distribution<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / sum).collect()
}

/// Dense random MDP with rewards in [0, 1], γ = 0.9 and evenly spread
/// action coordinates.
pub fn random_mdp<R: Rng>(rng: &mut R, n_states: usize, n_actions: usize) -> TabularMdp {
    let transition = (0..n_states)
        .map(|_| {
            (0..n_actions)
                .map(|_| random_distribution(rng, n_states))
                .collect()
        })
        .collect();
    let reward = (0..n_states)
        .map(|_| (0..n_actions).map(|_| rng.gen::<f64>()).collect())
        .collect();
    TabularMdp {
        n_states,
        n_actions,
        transition,
        reward,
        gamma: 0.9,
        rho0: random_distribution(rng, n_states),
        action_coords: (0..n_actions)
            .map(|a| a as f64 / n_actions.max(2) as f64)
            .collect(),
        reward_max: 1.0,
    }
}

/// Random fully mixed policy.
pub fn random_policy<R: Rng>(rng: &mut R, n_states: usize, n_actions: usize) -> Policy {
    Policy {
        probs: (0..n_states)
            .map(|_| random_distribution(rng, n_actions))
            .collect(),
    }
}
