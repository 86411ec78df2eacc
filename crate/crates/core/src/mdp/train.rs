//! Off-policy actor-critic loop on a tabular MDP, instrumented so every
//! logged quantity has an exact DP oracle.
//!
//! Per episode: roll one trajectory under the current policy, push it to
//! the replay buffer, reweight by the sampling scheme, fit the critic by
//! mini-batch steps toward frozen Bellman targets, then improve the policy
//! by a softmax over the critic with annealed temperature. The record for
//! the episode carries the exact return of the improved policy, the exact
//! evaluation error of the critic against the behavior mixture, and the
//! matching high-probability bound evaluated at measured constants.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{
    truncated_eval_error_bound, weighted_eval_error_bound, BoundInputs, Horizon,
};
use crate::error::{Error, Result};
use crate::mdp::empirical::{empirical_errors, sample_trajectory, Trajectory};
use crate::mdp::solve::{behavior_policy, bellman_apply, exact_q, policy_return};
use crate::mdp::{Policy, TabularMdp};
use crate::replay::{ReplayBuffer, Transition};
use crate::weighting::{EreParams, WeightScheme};

#[derive(Debug, Clone)]
pub struct LoopConfig {
    pub episodes: u64,
    pub traj_len: usize,
    pub seed: u64,
    /// Failure probability of the per-episode logged bound.
    pub delta: f64,
    /// Step size of each mini-batch move toward the frozen target.
    pub learning_rate: f64,
    pub batches_per_episode: usize,
    pub batch_size: usize,
    /// Batches between target refreshes.
    pub target_refresh: usize,
    pub tau_init: f64,
    pub tau_floor: f64,
    pub tau_decay: f64,
}

impl LoopConfig {
    pub fn new(episodes: u64, traj_len: usize, seed: u64) -> Self {
        LoopConfig {
            episodes,
            traj_len,
            seed,
            delta: 0.05,
            learning_rate: 0.5,
            batches_per_episode: 50,
            batch_size: 64,
            target_refresh: 10,
            tau_init: 1.0,
            tau_floor: 0.05,
            tau_decay: 0.9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes < 1 {
            return Err(Error::parameter("episodes must be >= 1"));
        }
        if self.traj_len < 1 {
            return Err(Error::parameter("traj_len must be >= 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::parameter("delta must lie in (0, 1)"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::parameter("learning_rate must be positive and finite"));
        }
        if self.batches_per_episode < 1 || self.batch_size < 1 || self.target_refresh < 1 {
            return Err(Error::parameter(
                "batches_per_episode, batch_size and target_refresh must be >= 1",
            ));
        }
        if !(self.tau_init > 0.0 && self.tau_floor > 0.0 && self.tau_floor <= self.tau_init) {
            return Err(Error::parameter("need 0 < tau_floor <= tau_init"));
        }
        if !(self.tau_decay > 0.0 && self.tau_decay <= 1.0) {
            return Err(Error::parameter("tau_decay must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Everything logged about one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub episode: u64,
    /// Exact discounted return of the improved policy.
    pub return_estimate: f64,
    /// Exact E over rho0 and the behavior policy of |critic - exact Q|.
    pub lhs_error: f64,
    /// Matching high-probability bound at measured constants.
    pub rhs_bound: f64,
    pub bellman_err: f64,
    pub mismatch_err: f64,
    pub buffer_len: usize,
    /// How far the critic left [0, r_max/(1-γ)] before clipping.
    pub preclip_excess: f64,
}

/// Softmax policy over a Q table at temperature tau.
pub fn softmax_policy(q: &[Vec<f64>], tau: f64) -> Policy {
    let probs = q
        .iter()
        .map(|row| {
            let top = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let raw: Vec<f64> = row.iter().map(|v| ((v - top) / tau).exp()).collect();
            let sum: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / sum).collect()
        })
        .collect();
    Policy { probs }
}

/// Deterministic argmax policy over a Q table; ties go to the lowest
/// action index.
pub fn greedy_policy(q: &[Vec<f64>]) -> Policy {
    let probs = q
        .iter()
        .map(|row| {
            let best = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, _)| i)
                .unwrap();
            let mut p = vec![0.0; row.len()];
            p[best] = 1.0;
            p
        })
        .collect();
    Policy { probs }
}

/// Largest slope of any Q row over the action coordinates.
pub fn action_lipschitz(q: &[Vec<f64>], coords: &[f64]) -> f64 {
    let mut lip: f64 = 0.0;
    for row in q {
        for a in 0..coords.len() {
            for b in a + 1..coords.len() {
                let gap = (coords[a] - coords[b]).abs();
                if gap > 1e-12 {
                    lip = lip.max((row[a] - row[b]).abs() / gap);
                }
            }
        }
    }
    lip
}

/// Rebuild the scheme's parameters against the current buffer length, so
/// the recency window tracks the growing buffer.
fn scheme_at(scheme: &WeightScheme, buffer_len: u64) -> WeightScheme {
    let resize = |p: &EreParams| EreParams {
        buffer_size: buffer_len,
        horizon: p.horizon,
        eta: p.eta,
        min_coverage: p.min_coverage.min(buffer_len),
        stages: p.stages,
    };
    match scheme {
        WeightScheme::EreStaged(p) => WeightScheme::EreStaged(resize(p)),
        WeightScheme::EreExact(p) => WeightScheme::EreExact(resize(p)),
        WeightScheme::EreApprox(p) => WeightScheme::EreApprox(resize(p)),
        other => *other,
    }
}

pub fn run_off_policy_loop(
    mdp: &TabularMdp,
    scheme: &WeightScheme,
    config: &LoopConfig,
) -> Result<Vec<RunRecord>> {
    mdp.validate()?;
    // the buffer grows during the run, so the template's size is not binding
    scheme_at(scheme, 1).validate()?;
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (n_states, n_actions) = (mdp.n_states, mdp.n_actions);
    let cap = mdp.q_cap();
    let blowup = 10.0 * cap;
    let is_priority = matches!(scheme, WeightScheme::PriorityBaseline { .. });

    let mut policy = Policy::uniform(n_states, n_actions);
    let mut q_hat = vec![vec![0.0; n_actions]; n_states];
    let mut buffer = ReplayBuffer::new();
    let mut past_policies: Vec<Policy> = Vec::new();
    let mut trajectories: Vec<Trajectory> = Vec::new();
    let mut tau = config.tau_init;
    let mut global_time = 0u64;
    let mut records = Vec::with_capacity(config.episodes as usize);

    for episode in 1..=config.episodes {
        let traj = sample_trajectory(mdp, &policy, config.traj_len, &mut rng)?;
        for j in 0..config.traj_len {
            global_time += 1;
            let (s, a) = (traj.states[j], traj.actions[j]);
            let next_state = if j + 1 < config.traj_len {
                traj.states[j + 1]
            } else {
                draw_from(&mdp.transition[s][a], &mut rng)
            };
            buffer.push(Transition {
                state: s,
                action: a,
                reward: mdp.reward[s][a],
                next_state,
                episode: episode as u32,
                step: j as u32,
                global_time,
            })?;
        }
        let step_scheme = scheme_at(scheme, buffer.len() as u64);
        buffer.reweight(&step_scheme, global_time)?;

        let mut target = bellman_apply(mdp, &policy, &q_hat);
        for batch in 0..config.batches_per_episode {
            if batch > 0 && batch % config.target_refresh == 0 {
                target = bellman_apply(mdp, &policy, &q_hat);
            }
            let drawn = buffer.sample_batch_with_rng(config.batch_size, &mut rng)?;
            for idx in &drawn {
                let t = buffer.entry(*idx);
                let (s, a) = (t.state, t.action);
                q_hat[s][a] += config.learning_rate * (target[s][a] - q_hat[s][a]);
                if q_hat[s][a].abs() > blowup {
                    return Err(Error::Divergence {
                        value: q_hat[s][a].abs(),
                        limit: blowup,
                    });
                }
            }
            if is_priority {
                for idx in drawn {
                    let t = buffer.entry(idx);
                    let residual = (q_hat[t.state][t.action] - target[t.state][t.action]).abs();
                    buffer.set_priority(idx, residual + 1e-6)?;
                }
                buffer.reweight(&step_scheme, global_time)?;
            }
        }

        let mut preclip_excess: f64 = 0.0;
        for row in q_hat.iter_mut() {
            for v in row.iter_mut() {
                preclip_excess = preclip_excess.max(-*v).max(*v - cap);
                *v = v.clamp(0.0, cap);
            }
        }

        past_policies.push(policy.clone());
        trajectories.push(traj);
        let episode_weights = if matches!(scheme, WeightScheme::Uniform) {
            None
        } else {
            Some(mean_episode_weights(&buffer, episode)?)
        };
        let starts = vec![mdp.rho0.clone(); past_policies.len()];
        let (behavior, _mixed_start) =
            behavior_policy(mdp, &past_policies, &starts, episode_weights.as_deref())?;
        let errs = empirical_errors(
            mdp,
            &trajectories,
            &q_hat,
            &policy,
            &behavior,
            0,
            config.traj_len,
            episode_weights.as_deref(),
        )?;
        let q_exact = exact_q(mdp, &policy)?;
        let mut lhs = 0.0;
        for s in 0..n_states {
            for a in 0..n_actions {
                lhs += mdp.rho0[s] * behavior.probs[s][a] * (q_hat[s][a] - q_exact[s][a]).abs();
            }
        }
        let lipschitz = action_lipschitz(&q_hat, &mdp.action_coords)
            .max(action_lipschitz(&q_exact, &mdp.action_coords));
        let inputs = BoundInputs {
            reward_max: mdp.reward_max,
            gamma: mdp.gamma,
            action_lipschitz: lipschitz,
            action_diameter: mdp.action_diameter(),
            delta: config.delta,
            episodes: episode,
            start_step: 0,
            horizon: Horizon::Finite(config.traj_len as u64),
            bellman_err: errs.bellman,
            w1_err: errs.mismatch,
            episode_weights: episode_weights.clone(),
        };
        let rhs_bound = if episode_weights.is_some() {
            weighted_eval_error_bound(&inputs)?
        } else {
            truncated_eval_error_bound(&inputs)?
        };

        tau = (tau * config.tau_decay).max(config.tau_floor);
        policy = softmax_policy(&q_hat, tau);
        records.push(RunRecord {
            episode,
            return_estimate: policy_return(mdp, &policy)?,
            lhs_error: lhs,
            rhs_bound,
            bellman_err: errs.bellman,
            mismatch_err: errs.mismatch,
            buffer_len: buffer.len(),
            preclip_excess,
        });
    }
    Ok(records)
}

/// Mean buffer weight of each episode's transitions, in episode order.
/// Zero means are nudged to a tiny floor so downstream weighted averages
/// stay defined.
fn mean_episode_weights(buffer: &ReplayBuffer, episodes: u64) -> Result<Vec<f64>> {
    let mut sums = vec![0.0f64; episodes as usize];
    let mut counts = vec![0u64; episodes as usize];
    for idx in 0..buffer.len() {
        let t = buffer.entry(idx);
        let e = t.episode as usize - 1;
        sums[e] += buffer.weight(idx);
        counts[e] += 1;
    }
    if counts.contains(&0) {
        return Err(Error::Sampling(
            "an episode has no surviving transitions in the buffer".into(),
        ));
    }
    Ok(sums
        .iter()
        .zip(&counts)
        .map(|(s, c)| (s / *c as f64).max(1e-300))
        .collect())
}

fn draw_from<R: Rng>(dist: &[f64], rng: &mut R) -> usize {
    let mut u = rng.gen::<f64>();
    for (idx, p) in dist.iter().enumerate() {
        u -= p;
        if u < 0.0 {
            return idx;
        }
    }
    dist.len() - 1
}

/// Fraction of independent trials whose final measured evaluation error
/// exceeds its logged bound. Trials run in parallel on disjoint seeds.
pub fn bound_violation_rate(
    mdp: &TabularMdp,
    scheme: &WeightScheme,
    config: &LoopConfig,
    trials: u64,
) -> Result<f64> {
    if trials < 1 {
        return Err(Error::parameter("trials must be >= 1"));
    }
    let violations: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut trial_config = config.clone();
            trial_config.seed = config
                .seed
                .wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(trial + 1));
            let records = run_off_policy_loop(mdp, scheme, &trial_config)?;
            let last = records.last().expect("episodes >= 1");
            Ok(last.lhs_error > last.rhs_bound)
        })
        .collect::<Result<_>>()?;
    Ok(violations.iter().filter(|v| **v).count() as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::envs;

    #[test]
    fn bookkeeping_five_episodes() {
        let mdp = envs::chain_walk();
        let config = LoopConfig::new(5, 20, 42);
        let records = run_off_policy_loop(&mdp, &WeightScheme::Uniform, &config).unwrap();
        assert_eq!(records.len(), 5);
        let sizes: Vec<usize> = records.iter().map(|r| r.buffer_len).collect();
        assert_eq!(sizes, vec![20, 40, 60, 80, 100]);
        for r in &records {
            assert!(r.return_estimate.is_finite());
            assert!(r.lhs_error.is_finite() && r.lhs_error >= 0.0);
            assert!(r.rhs_bound.is_finite() && r.rhs_bound > 0.0);
        }
    }

    #[test]
    fn fixed_seed_repeats_bit_for_bit() {
        let mdp = envs::chain_walk();
        let config = LoopConfig::new(6, 15, 7);
        let scheme = WeightScheme::OneOverAge;
        let a = run_off_policy_loop(&mdp, &scheme, &config).unwrap();
        let b = run_off_policy_loop(&mdp, &scheme, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn greedy_improvement_on_exact_q_never_loses_return() {
        // classical policy iteration as the oracle for the tau -> 0 limit
        let mdp = envs::chain_walk();
        let mut policy = Policy::uniform(8, 4);
        let mut last = policy_return(&mdp, &policy).unwrap();
        for _ in 0..12 {
            let q = exact_q(&mdp, &policy).unwrap();
            policy = greedy_policy(&q);
            let ret = policy_return(&mdp, &policy).unwrap();
            assert!(ret >= last - 1e-12, "{ret} < {last}");
            last = ret;
        }
        // optimal chain behavior reaches the right end and stays
        assert!(last > 1.0);
    }

    #[test]
    fn cold_softmax_matches_greedy() {
        let q = vec![vec![0.3, 0.9, 0.1], vec![2.0, 1.0, 1.99]];
        let cold = softmax_policy(&q, 1e-6);
        let greedy = greedy_policy(&q);
        for s in 0..2 {
            for a in 0..3 {
                assert!((cold.probs[s][a] - greedy.probs[s][a]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn warm_softmax_is_near_uniform() {
        let q = vec![vec![0.3, 0.9, 0.1]];
        let warm = softmax_policy(&q, 1e6);
        for a in 0..3 {
            assert!((warm.probs[0][a] - 1.0 / 3.0).abs() < 1e-6);
        }
    }

    #[test]
    fn lipschitz_of_a_linear_row_is_its_slope() {
        let coords = [0.0, 0.5, 1.0];
        let q = vec![vec![0.0, 1.5, 3.0]];
        assert!((action_lipschitz(&q, &coords) - 3.0).abs() < 1e-12);
        let flat = vec![vec![2.0, 2.0, 2.0]];
        assert_eq!(action_lipschitz(&flat, &coords), 0.0);
    }

    #[test]
    fn oversized_learning_rate_trips_the_divergence_guard() {
        let mdp = envs::chain_walk();
        let mut config = LoopConfig::new(40, 20, 3);
        config.learning_rate = 3.0;
        let err = run_off_policy_loop(&mdp, &WeightScheme::Uniform, &config).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }), "got {err}");
    }

    #[test]
    fn ere_scheme_trains_end_to_end() {
        let mdp = envs::chain_walk();
        let config = LoopConfig::new(8, 20, 11);
        let scheme = WeightScheme::EreApprox(EreParams {
            buffer_size: 1,
            horizon: 50,
            eta: 0.94,
            min_coverage: 60,
            stages: 50,
        });
        let records = run_off_policy_loop(&mdp, &scheme, &config).unwrap();
        assert_eq!(records.len(), 8);
        assert!(records.iter().all(|r| r.rhs_bound.is_finite()));
    }

    #[test]
    fn priority_scheme_trains_end_to_end() {
        let mdp = envs::chain_walk();
        let config = LoopConfig::new(5, 15, 19);
        let scheme = WeightScheme::PriorityBaseline { exponent: 0.6 };
        let records = run_off_policy_loop(&mdp, &scheme, &config).unwrap();
        assert_eq!(records.len(), 5);
    }

    #[test]
    fn learned_policy_beats_the_uniform_start() {
        let mdp = envs::chain_walk();
        let config = LoopConfig::new(60, 40, 23);
        let records = run_off_policy_loop(&mdp, &WeightScheme::OneOverAge, &config).unwrap();
        let start = policy_return(&mdp, &Policy::uniform(8, 4)).unwrap();
        let last = records.last().unwrap().return_estimate;
        assert!(last > start, "{last} vs start {start}");
    }

    #[test]
    fn violation_rate_is_zero_on_a_tiny_sweep() {
        let mdp = envs::chain_walk();
        let config = LoopConfig::new(6, 20, 100);
        let rate =
            bound_violation_rate(&mdp, &WeightScheme::OneOverAge, &config, 8).unwrap();
        assert_eq!(rate, 0.0);
    }
}
