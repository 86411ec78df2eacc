//! Empirical Bellman and policy-mismatch errors over stored trajectories.
//!
//! Both errors average an averaging-discounted sum over episodes:
//!
//! ```text
//! err = (1/Σ_e w_e) Σ_e w_e Σ_{j=i}^{L-1} (1-γ) γ^(j-i) f(s_j^e, a_j^e)
//! ```
//!
//! with f either the absolute Bellman residual of the fitted Q table or
//! the per-state Wasserstein gap between the current policy and the step-i
//! behavior mixture.

use rand::Rng;

use crate::error::{Error, Result};
use crate::mdp::solve::bellman_apply;
use crate::mdp::transport::w1_distance;
use crate::mdp::{Policy, TabularMdp};

/// One stored episode: aligned state and action sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Roll out `len` steps of `policy` from the MDP's initial distribution.
pub fn sample_trajectory<R: Rng>(
    mdp: &TabularMdp,
    policy: &Policy,
    len: usize,
    rng: &mut R,
) -> Result<Trajectory> {
    policy.validate(mdp.n_states, mdp.n_actions)?;
    if len == 0 {
        return Err(Error::parameter("trajectory length must be >= 1"));
    }
    let mut states = Vec::with_capacity(len);
    let mut actions = Vec::with_capacity(len);
    let mut state = draw_index(&mdp.rho0, rng);
    for _ in 0..len {
        let action = draw_index(&policy.probs[state], rng);
        states.push(state);
        actions.push(action);
        state = draw_index(&mdp.transition[state][action], rng);
    }
    Ok(Trajectory { states, actions })
}

fn draw_index<R: Rng>(dist: &[f64], rng: &mut R) -> usize {
    let mut u = rng.gen::<f64>();
    for (idx, p) in dist.iter().enumerate() {
        u -= p;
        if u < 0.0 {
            return idx;
        }
    }
    dist.len() - 1
}

/// The two measured error terms plus a flag for an empty step range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalErrors {
    /// Averaging-discounted |Q - BQ| over stored transitions.
    pub bellman: f64,
    /// Averaging-discounted W1(current policy, behavior policy) over
    /// stored states.
    pub mismatch: f64,
    /// True when start_step >= horizon left nothing to sum.
    pub degenerate: bool,
}

/// Measure both errors over steps [start_step, horizon) of each stored
/// trajectory, optionally weighting episodes.
#[allow(clippy::too_many_arguments)]
pub fn empirical_errors(
    mdp: &TabularMdp,
    trajectories: &[Trajectory],
    q_hat: &[Vec<f64>],
    current_policy: &Policy,
    behavior: &Policy,
    start_step: usize,
    horizon: usize,
    episode_weights: Option<&[f64]>,
) -> Result<EmpiricalErrors> {
    if trajectories.is_empty() {
        return Err(Error::parameter("need at least one trajectory"));
    }
    if q_hat.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::parameter("fitted Q table must be finite"));
    }
    if start_step >= horizon {
        return Ok(EmpiricalErrors {
            bellman: 0.0,
            mismatch: 0.0,
            degenerate: true,
        });
    }
    let weights = match episode_weights {
        Some(w) => {
            if w.len() != trajectories.len() {
                return Err(Error::parameter("one weight per trajectory required"));
            }
            if w.iter().any(|x| !(x > &0.0 && x.is_finite())) {
                return Err(Error::parameter("episode weights must be positive and finite"));
            }
            w.to_vec()
        }
        None => vec![1.0; trajectories.len()],
    };
    let weight_total: f64 = weights.iter().sum();

    let backed_up = bellman_apply(mdp, current_policy, q_hat);
    // W1 between the two policies depends on the state alone
    let state_gap: Vec<f64> = (0..mdp.n_states)
        .map(|s| {
            w1_distance(
                &current_policy.probs[s],
                &behavior.probs[s],
                &mdp.action_coords,
            )
        })
        .collect::<Result<_>>()?;

    let mut bellman = 0.0;
    let mut mismatch = 0.0;
    for (traj, w) in trajectories.iter().zip(&weights) {
        if traj.len() < horizon {
            return Err(Error::parameter(format!(
                "trajectory of length {} cannot cover horizon {horizon}",
                traj.len()
            )));
        }
        let share = w / weight_total;
        let mut discount = 1.0 - mdp.gamma;
        for j in start_step..horizon {
            let (s, a) = (traj.states[j], traj.actions[j]);
            bellman += share * discount * (q_hat[s][a] - backed_up[s][a]).abs();
            mismatch += share * discount * state_gap[s];
            discount *= mdp.gamma;
        }
    }
    Ok(EmpiricalErrors {
        bellman,
        mismatch,
        degenerate: false,
    })
}
