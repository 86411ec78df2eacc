//! Exact policy evaluation: occupancy measures, value/Q solves, Bellman
//! operators, and the occupancy-weighted behavior-policy mixture.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mdp::{Policy, TabularMdp};

/// Residual allowed between a solved occupancy measure and one application
/// of the flow operator.
pub const FLOW_TOL: f64 = 1e-10;

/// Above this state count the linear solve gives way to fixed-point
/// iteration.
const DIRECT_SOLVE_LIMIT: usize = 2000;

/// State-to-state kernel under a policy: P[s][s'] = sum_a pi(a|s) T[s][a][s'].
fn policy_kernel(mdp: &TabularMdp, policy: &Policy) -> Vec<Vec<f64>> {
    let n = mdp.n_states;
    let mut kernel = vec![vec![0.0; n]; n];
    for (s, row) in kernel.iter_mut().enumerate() {
        for a in 0..mdp.n_actions {
            let p = policy.probs[s][a];
            if p == 0.0 {
                continue;
            }
            for (s2, t) in mdp.transition[s][a].iter().enumerate() {
                row[s2] += p * t;
            }
        }
    }
    kernel
}

/// One application of the flow operator: (1-γ)ρ_init + γ·(push ρ through
/// the policy kernel).
pub fn bellman_flow_apply(
    mdp: &TabularMdp,
    rho_init: &[f64],
    policy: &Policy,
    rho: &[f64],
) -> Vec<f64> {
    let kernel = policy_kernel(mdp, policy);
    bellman_flow_apply_kernel(mdp, rho_init, &kernel, rho)
}

fn bellman_flow_apply_kernel(
    mdp: &TabularMdp,
    rho_init: &[f64],
    kernel: &[Vec<f64>],
    rho: &[f64],
) -> Vec<f64> {
    let n = mdp.n_states;
    let mut out = vec![0.0; n];
    for s2 in 0..n {
        out[s2] = (1.0 - mdp.gamma) * rho_init[s2];
    }
    for s in 0..n {
        if rho[s] == 0.0 {
            continue;
        }
        for s2 in 0..n {
            out[s2] += mdp.gamma * rho[s] * kernel[s][s2];
        }
    }
    out
}

/// Normalized discounted state occupancy of `policy` started from
/// `rho_init`: the unique fixed point of the flow operator.
pub fn occupancy_measure(mdp: &TabularMdp, rho_init: &[f64], policy: &Policy) -> Result<Vec<f64>> {
    mdp.validate()?;
    super::validate_distribution(rho_init, mdp.n_states)?;
    policy.validate(mdp.n_states, mdp.n_actions)?;
    let n = mdp.n_states;
    let kernel = policy_kernel(mdp, policy);

    let mut rho = if n <= DIRECT_SOLVE_LIMIT {
        // (I - γ Pᵀ) ρ = (1-γ) ρ_init
        let system = DMatrix::<f64>::from_fn(n, n, |i, j| {
            let identity = if i == j { 1.0 } else { 0.0 };
            identity - mdp.gamma * kernel[j][i]
        });
        let rhs = DVector::<f64>::from_fn(n, |i, _| (1.0 - mdp.gamma) * rho_init[i]);
        let solved = system
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical("occupancy system reported singular".into()))?;
        solved.iter().cloned().collect::<Vec<f64>>()
    } else {
        let mut rho = rho_init.to_vec();
        // contraction factor γ per sweep; iterate to below tolerance
        let sweeps = ((FLOW_TOL / 2.0).ln() / mdp.gamma.ln()).ceil() as usize + 1;
        for _ in 0..sweeps {
            rho = bellman_flow_apply_kernel(mdp, rho_init, &kernel, &rho);
        }
        rho
    };

    for x in rho.iter_mut() {
        if *x < 0.0 {
            if *x < -1e-9 {
                return Err(Error::Numerical(format!(
                    "occupancy solve produced {x}, well below zero"
                )));
            }
            *x = 0.0;
        }
    }
    let total: f64 = rho.iter().sum();
    for x in rho.iter_mut() {
        *x /= total;
    }

    let image = bellman_flow_apply_kernel(mdp, rho_init, &kernel, &rho);
    let residual: f64 = rho.iter().zip(&image).map(|(a, b)| (a - b).abs()).sum();
    if residual > FLOW_TOL {
        return Err(Error::Numerical(format!(
            "occupancy fixed-point residual {residual:.3e} exceeds {FLOW_TOL:.1e}"
        )));
    }
    Ok(rho)
}

/// State values under a policy: solves (I - γ P_π) V = r_π.
pub fn exact_v(mdp: &TabularMdp, policy: &Policy) -> Result<Vec<f64>> {
    mdp.validate()?;
    policy.validate(mdp.n_states, mdp.n_actions)?;
    let n = mdp.n_states;
    let kernel = policy_kernel(mdp, policy);
    let system = DMatrix::<f64>::from_fn(n, n, |i, j| {
        let identity = if i == j { 1.0 } else { 0.0 };
        identity - mdp.gamma * kernel[i][j]
    });
    let rhs = DVector::<f64>::from_fn(n, |s, _| {
        (0..mdp.n_actions)
            .map(|a| policy.probs[s][a] * mdp.reward[s][a])
            .sum()
    });
    let v = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("value system reported singular".into()))?;
    Ok(v.iter().cloned().collect())
}

/// Exact Q table under a policy; entries land in [0, reward_max/(1-γ)].
pub fn exact_q(mdp: &TabularMdp, policy: &Policy) -> Result<Vec<Vec<f64>>> {
    let v = exact_v(mdp, policy)?;
    let cap = mdp.q_cap();
    let mut q = vec![vec![0.0; mdp.n_actions]; mdp.n_states];
    for (s, row) in q.iter_mut().enumerate() {
        for (a, slot) in row.iter_mut().enumerate() {
            let future: f64 = mdp.transition[s][a]
                .iter()
                .zip(&v)
                .map(|(t, val)| t * val)
                .sum();
            let value = mdp.reward[s][a] + mdp.gamma * future;
            if value < -1e-9 || value > cap + 1e-9 {
                return Err(Error::Numerical(format!(
                    "Q[{s}][{a}] = {value} escapes [0, {cap}]"
                )));
            }
            *slot = value.clamp(0.0, cap);
        }
    }
    Ok(q)
}

/// One Bellman backup of an arbitrary Q table:
/// r(s,a) + γ E_{s'~T, a'~π} Q(s',a').
pub fn bellman_apply(mdp: &TabularMdp, policy: &Policy, q: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let state_value: Vec<f64> = (0..mdp.n_states)
        .map(|s2| {
            (0..mdp.n_actions)
                .map(|a2| policy.probs[s2][a2] * q[s2][a2])
                .sum()
        })
        .collect();
    (0..mdp.n_states)
        .map(|s| {
            (0..mdp.n_actions)
                .map(|a| {
                    let future: f64 = mdp.transition[s][a]
                        .iter()
                        .zip(&state_value)
                        .map(|(t, v)| t * v)
                        .sum();
                    mdp.reward[s][a] + mdp.gamma * future
                })
                .collect()
        })
        .collect()
}

/// Expected discounted return of a policy from the MDP's initial
/// distribution.
pub fn policy_return(mdp: &TabularMdp, policy: &Policy) -> Result<f64> {
    let v = exact_v(mdp, policy)?;
    Ok(mdp.rho0.iter().zip(&v).map(|(p, val)| p * val).sum())
}

/// Occupancy-weighted mixture of per-episode policies, and the matching
/// mixture of start distributions.
///
/// The returned policy has rows pi(a|s) proportional to
/// sum_e w_e·occupancy_e(s)·pi_e(a|s); states no episode reaches get a
/// uniform row (they carry zero measure in every evaluated expectation).
pub fn behavior_policy(
    mdp: &TabularMdp,
    episode_policies: &[Policy],
    episode_starts: &[Vec<f64>],
    episode_weights: Option<&[f64]>,
) -> Result<(Policy, Vec<f64>)> {
    mdp.validate()?;
    if episode_policies.is_empty() || episode_policies.len() != episode_starts.len() {
        return Err(Error::parameter(
            "need one start distribution per episode policy, at least one episode",
        ));
    }
    let n_ep = episode_policies.len();
    let weights = match episode_weights {
        Some(w) => {
            if w.len() != n_ep {
                return Err(Error::parameter("one weight per episode required"));
            }
            if w.iter().any(|x| !(x > &0.0 && x.is_finite())) {
                return Err(Error::parameter("episode weights must be positive and finite"));
            }
            w.to_vec()
        }
        None => vec![1.0; n_ep],
    };
    let weight_total: f64 = weights.iter().sum();

    let n = mdp.n_states;
    let mut numerator = vec![vec![0.0; mdp.n_actions]; n];
    let mut denominator = vec![0.0; n];
    let mut mixed_start = vec![0.0; n];
    for e in 0..n_ep {
        let occ = occupancy_measure(mdp, &episode_starts[e], &episode_policies[e])?;
        let w = weights[e] / weight_total;
        for s in 0..n {
            denominator[s] += w * occ[s];
            mixed_start[s] += w * episode_starts[e][s];
            let probs = &episode_policies[e].probs[s];
            for (slot, p) in numerator[s].iter_mut().zip(probs) {
                *slot += w * occ[s] * p;
            }
        }
    }
    let uniform = 1.0 / mdp.n_actions as f64;
    let probs = (0..n)
        .map(|s| {
            if denominator[s] > 0.0 {
                let row: Vec<f64> = numerator[s].iter().map(|x| x / denominator[s]).collect();
                let sum: f64 = row.iter().sum();
                row.into_iter().map(|x| x / sum).collect()
            } else {
                vec![uniform; mdp.n_actions]
            }
        })
        .collect();
    Ok((Policy { probs }, mixed_start))
}

/// L1 gap between the averaged per-episode occupancy and the occupancy
/// generated by the mixture (start, policy) pair. The flow identity makes
/// this zero in exact arithmetic.
pub fn verify_flow_identity(
    mdp: &TabularMdp,
    episode_policies: &[Policy],
    episode_starts: &[Vec<f64>],
    episode_weights: Option<&[f64]>,
) -> Result<f64> {
    let (mixture, mixed_start) =
        behavior_policy(mdp, episode_policies, episode_starts, episode_weights)?;
    let n_ep = episode_policies.len();
    let weights = match episode_weights {
        Some(w) => w.to_vec(),
        None => vec![1.0; n_ep],
    };
    let weight_total: f64 = weights.iter().sum();
    let mut averaged = vec![0.0; mdp.n_states];
    for e in 0..n_ep {
        let occ = occupancy_measure(mdp, &episode_starts[e], &episode_policies[e])?;
        for s in 0..mdp.n_states {
            averaged[s] += weights[e] / weight_total * occ[s];
        }
    }
    let generated = occupancy_measure(mdp, &mixed_start, &mixture)?;
    Ok(averaged
        .iter()
        .zip(&generated)
        .map(|(a, b)| (a - b).abs())
        .sum())
}

/// Total variation distance between two distributions on the same support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
