//! Exact tabular MDP lab.
//!
//! Small finite MDPs solved by direct linear algebra: occupancy measures,
//! exact Q tables, behavior-policy mixtures, Wasserstein action mismatch,
//! empirical Bellman/mismatch errors over stored trajectories, and an
//! off-policy training loop whose every logged quantity has a DP oracle.

pub mod empirical;
pub mod envs;
pub mod random;
pub mod solve;
pub mod textfmt;
pub mod train;
pub mod transport;

use crate::error::{Error, Result};

const DIST_TOL: f64 = 1e-12;

/// Finite MDP with enumerated states and actions. Actions carry a 1-D real
/// coordinate, which induces the action metric used by the Wasserstein
/// mismatch terms.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    pub n_states: usize,
    pub n_actions: usize,
    /// transition[s][a] is a distribution over next states.
    pub transition: Vec<Vec<Vec<f64>>>,
    /// reward[s][a], bounded to [0, reward_max].
    pub reward: Vec<Vec<f64>>,
    pub gamma: f64,
    /// Initial state distribution.
    pub rho0: Vec<f64>,
    /// Real coordinate of each action.
    pub action_coords: Vec<f64>,
    pub reward_max: f64,
}

impl TabularMdp {
    pub fn validate(&self) -> Result<()> {
        if self.n_states == 0 || self.n_actions == 0 {
            return Err(Error::parameter("need at least one state and one action"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::parameter("gamma must lie in (0, 1)"));
        }
        if !(self.reward_max > 0.0 && self.reward_max.is_finite()) {
            return Err(Error::parameter("reward_max must be positive and finite"));
        }
        if self.transition.len() != self.n_states || self.reward.len() != self.n_states {
            return Err(Error::parameter("transition/reward tables sized off n_states"));
        }
        for s in 0..self.n_states {
            if self.transition[s].len() != self.n_actions
                || self.reward[s].len() != self.n_actions
            {
                return Err(Error::parameter("transition/reward rows sized off n_actions"));
            }
            for a in 0..self.n_actions {
                check_distribution(&self.transition[s][a], self.n_states)?;
                let r = self.reward[s][a];
                if !(r >= 0.0 && r <= self.reward_max) {
                    return Err(Error::parameter(format!(
                        "reward[{s}][{a}] = {r} outside [0, {}]",
                        self.reward_max
                    )));
                }
            }
        }
        check_distribution(&self.rho0, self.n_states)?;
        if self.action_coords.len() != self.n_actions {
            return Err(Error::parameter("one coordinate per action required"));
        }
        if self.action_coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::parameter("action coordinates must be finite"));
        }
        Ok(())
    }

    /// Spread of the action coordinates; the diam_A of the bounds.
    pub fn action_diameter(&self) -> f64 {
        let lo = self.action_coords.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.action_coords.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }

    /// Upper end of the admissible Q range, reward_max/(1-gamma).
    pub fn q_cap(&self) -> f64 {
        self.reward_max / (1.0 - self.gamma)
    }
}

/// Stochastic policy: one action distribution per state.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub probs: Vec<Vec<f64>>,
}

impl Policy {
    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Policy {
            probs: vec![vec![1.0 / n_actions as f64; n_actions]; n_states],
        }
    }

    pub fn validate(&self, n_states: usize, n_actions: usize) -> Result<()> {
        if self.probs.len() != n_states {
            return Err(Error::parameter("policy sized off n_states"));
        }
        for row in &self.probs {
            check_distribution(row, n_actions)?;
        }
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        self.probs.len()
    }
}

pub(crate) fn check_distribution(p: &[f64], len: usize) -> Result<()> {
    if p.len() != len {
        return Err(Error::parameter(format!(
            "distribution has {} entries, expected {len}",
            p.len()
        )));
    }
    if p.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::parameter("distribution entries must be in [0, 1]"));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > DIST_TOL {
        return Err(Error::parameter(format!(
            "distribution sums to {sum}, expected 1"
        )));
    }
    Ok(())
}

pub(crate) use check_distribution as validate_distribution;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::envs;

    #[test]
    fn shipped_environments_validate() {
        let chain = envs::chain_walk();
        chain.validate().unwrap();
        assert_eq!(chain.n_states, 8);
        assert_eq!(chain.n_actions, 4);
        assert!((chain.action_diameter() - 1.0).abs() < 1e-12);
        assert!((chain.q_cap() - 10.0).abs() < 1e-9);

        let grid = envs::gridworld();
        grid.validate().unwrap();
        assert_eq!(grid.n_states, 25);
        assert_eq!(grid.n_actions, 4);
    }

    #[test]
    fn validation_catches_broken_tables() {
        let mut mdp = envs::chain_walk();
        mdp.transition[0][0][0] += 0.5;
        assert!(mdp.validate().is_err());

        let mut mdp = envs::chain_walk();
        mdp.reward[2][1] = 7.0;
        assert!(mdp.validate().is_err());

        let mut mdp = envs::chain_walk();
        mdp.gamma = 1.0;
        assert!(mdp.validate().is_err());

        let mut mdp = envs::chain_walk();
        mdp.action_coords.pop();
        assert!(mdp.validate().is_err());
    }

    #[test]
    fn uniform_policy_rows_are_distributions() {
        let p = Policy::uniform(6, 3);
        p.validate(6, 3).unwrap();
        assert!(p.validate(6, 4).is_err());
    }
}
