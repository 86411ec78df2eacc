//! Concentration errors of weight vectors and high-probability upper
//! bounds on the policy-evaluation error of an off-policy critic.
//!
//! The bounds share one skeleton. With failure probability δ, discount γ,
//! reward range [0, r_max], an action metric with Lipschitz constant L_A
//! and diameter diam_A, Bellman residual ε_Q and behavior/target action
//! mismatch W1 (a Wasserstein-1 distance), the evaluation error after N
//! episodes is at most
//!
//! ```text
//! r_max/(1-γ) · sqrt(ln(2/δ)/(2N))
//!   + (r_max/(1-γ)² + 2·L_A·diam_A/(1-γ)) · (sqrt(2·ln(2/δ)/N) + tail)
//!   + (ε_Q + 2·L_A·W1)/(1-γ)
//! ```
//!
//! where `tail` is γ^(L-i) when only steps i..L of each episode are used
//! (0 for the full-horizon case). Replacing the per-episode average with a
//! weighted one substitutes Σw²/(Σw)² for 1/N in both square roots.

use crate::error::{Error, Result};

/// Episode-truncation horizon. `Finite(l)` uses steps up to l; `Infinite`
/// uses whole episodes and makes the truncation tail exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Finite(u64),
    Infinite,
}

/// Everything the evaluation-error bounds depend on.
#[derive(Debug, Clone)]
pub struct BoundInputs {
    /// Upper end of the reward range [0, r_max].
    pub reward_max: f64,
    pub gamma: f64,
    /// Lipschitz constant of the critic in the action coordinate.
    pub action_lipschitz: f64,
    pub action_diameter: f64,
    /// Failure probability of the bound.
    pub delta: f64,
    pub episodes: u64,
    /// First step of each episode that enters the estimate.
    pub start_step: u64,
    pub horizon: Horizon,
    /// Worst-case Bellman residual of the critic over visited pairs.
    pub bellman_err: f64,
    /// Worst-case action-distribution mismatch over visited states.
    pub w1_err: f64,
    /// Per-episode weights; None means the plain average over episodes.
    pub episode_weights: Option<Vec<f64>>,
}

impl BoundInputs {
    /// Full-horizon inputs with no mismatch terms; fields are adjusted via
    /// struct update.
    pub fn full_horizon(reward_max: f64, gamma: f64, delta: f64, episodes: u64) -> Self {
        Self {
            reward_max,
            gamma,
            action_lipschitz: 0.0,
            action_diameter: 0.0,
            delta,
            episodes,
            start_step: 0,
            horizon: Horizon::Infinite,
            bellman_err: 0.0,
            w1_err: 0.0,
            episode_weights: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.reward_max > 0.0 && self.reward_max.is_finite()) {
            return Err(Error::parameter("reward_max must be positive and finite"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::parameter("gamma must lie in (0, 1)"));
        }
        if !(self.action_lipschitz >= 0.0 && self.action_lipschitz.is_finite()) {
            return Err(Error::parameter("action_lipschitz must be >= 0 and finite"));
        }
        if !(self.action_diameter >= 0.0 && self.action_diameter.is_finite()) {
            return Err(Error::parameter("action_diameter must be >= 0 and finite"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::parameter("delta must lie in (0, 1)"));
        }
        if self.episodes < 1 {
            return Err(Error::parameter("episodes must be >= 1"));
        }
        if !(self.bellman_err >= 0.0 && self.bellman_err.is_finite()) {
            return Err(Error::parameter("bellman_err must be >= 0 and finite"));
        }
        if !(self.w1_err >= 0.0 && self.w1_err.is_finite()) {
            return Err(Error::parameter("w1_err must be >= 0 and finite"));
        }
        if let Horizon::Finite(l) = self.horizon {
            if self.start_step >= l {
                return Err(Error::parameter(format!(
                    "start_step {} must be below the finite horizon {l}",
                    self.start_step
                )));
            }
        }
        if let Some(w) = &self.episode_weights {
            if w.len() as u64 != self.episodes {
                return Err(Error::parameter(format!(
                    "{} episode weights for {} episodes",
                    w.len(),
                    self.episodes
                )));
            }
            if w.iter().any(|x| !(x > &0.0 && x.is_finite())) {
                return Err(Error::parameter("episode weights must be positive and finite"));
            }
        }
        Ok(())
    }
}

/// sqrt(Σ w²)/Σ w, the relative concentration scale of a weighted average.
/// Equal weights minimize it at 1/sqrt(N).
pub fn hoeffding_error(weights: &[f64]) -> Result<f64> {
    if weights.is_empty() {
        return Err(Error::parameter("need at least one weight"));
    }
    if weights.iter().any(|w| !(w > &0.0 && w.is_finite())) {
        return Err(Error::parameter("weights must be positive and finite"));
    }
    let sum: f64 = weights.iter().sum();
    let sum_sq: f64 = weights.iter().map(|w| w * w).sum();
    Ok(sum_sq.sqrt() / sum)
}

/// Deviation bound Δ·sqrt(2·Σw²·ln(1/δ))/Σw for a weighted average of a
/// bounded-difference martingale with per-term range 2Δ, at confidence
/// level 1-δ.
pub fn azuma_weighted_error(weights: &[f64], value_range: f64, delta: f64) -> Result<f64> {
    if weights.is_empty() {
        return Err(Error::parameter("need at least one weight"));
    }
    if weights.iter().any(|w| !(w > &0.0 && w.is_finite())) {
        return Err(Error::parameter("weights must be positive and finite"));
    }
    if !(value_range > 0.0 && value_range.is_finite()) {
        return Err(Error::parameter("value_range must be positive and finite"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::parameter("delta must lie in (0, 1]"));
    }
    let sum: f64 = weights.iter().sum();
    let sum_sq: f64 = weights.iter().map(|w| w * w).sum();
    Ok(value_range * (2.0 * sum_sq * (1.0 / delta).ln()).sqrt() / sum)
}

/// Full-horizon evaluation-error bound: plain episode average, whole
/// episodes. Requires start_step 0, infinite horizon and no weights.
pub fn eval_error_bound(inputs: &BoundInputs) -> Result<f64> {
    inputs.validate()?;
    if inputs.start_step != 0 || inputs.horizon != Horizon::Infinite {
        return Err(Error::parameter(
            "full-horizon bound needs start_step 0 and an infinite horizon",
        ));
    }
    if inputs.episode_weights.is_some() {
        return Err(Error::parameter(
            "full-horizon bound takes no episode weights",
        ));
    }
    Ok(bound_value(inputs, 1.0 / inputs.episodes as f64))
}

/// Evaluation-error bound when only steps start_step..horizon of each
/// episode enter the estimate; the discount tail γ^(L-i) is added to the
/// sampling factor of the middle term.
pub fn truncated_eval_error_bound(inputs: &BoundInputs) -> Result<f64> {
    inputs.validate()?;
    if inputs.episode_weights.is_some() {
        return Err(Error::parameter(
            "truncated bound takes no episode weights; use the weighted form",
        ));
    }
    Ok(bound_value(inputs, 1.0 / inputs.episodes as f64))
}

/// Evaluation-error bound for a weighted episode average: 1/N becomes
/// Σw²/(Σw)² inside both square roots.
pub fn weighted_eval_error_bound(inputs: &BoundInputs) -> Result<f64> {
    inputs.validate()?;
    let weights = inputs
        .episode_weights
        .as_ref()
        .ok_or_else(|| Error::parameter("weighted bound requires episode weights"))?;
    let sum: f64 = weights.iter().sum();
    let sum_sq: f64 = weights.iter().map(|w| w * w).sum();
    Ok(bound_value(inputs, sum_sq / (sum * sum)))
}

/// The bound split into its five summands.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundTerms {
    /// Concentration of the initial-state average.
    pub variance_initial: f64,
    /// Concentration of the per-step averages, through the middle
    /// coefficient r_max/(1-γ)² + 2·L_A·diam_A/(1-γ).
    pub variance_middle: f64,
    /// Horizon-truncation remainder γ^(L-i) through the same coefficient.
    pub truncation: f64,
    /// Bellman residual ε_Q/(1-γ).
    pub bellman: f64,
    /// Action-mismatch 2·L_A·W1/(1-γ).
    pub mismatch: f64,
}

impl BoundTerms {
    pub fn total(&self) -> f64 {
        self.variance_initial + self.variance_middle + self.truncation + self.bellman
            + self.mismatch
    }
}

/// Term decomposition of the bound, dispatching on whether episode
/// weights are present.
pub fn eval_error_terms(inputs: &BoundInputs) -> Result<BoundTerms> {
    inputs.validate()?;
    let ratio = match &inputs.episode_weights {
        Some(weights) => {
            let sum: f64 = weights.iter().sum();
            let sum_sq: f64 = weights.iter().map(|w| w * w).sum();
            sum_sq / (sum * sum)
        }
        None => 1.0 / inputs.episodes as f64,
    };
    Ok(bound_terms(inputs, ratio))
}

/// `weight_ratio` is Σw²/(Σw)², which the unweighted forms fix at 1/N.
fn bound_terms(inputs: &BoundInputs, weight_ratio: f64) -> BoundTerms {
    let residual = 1.0 - inputs.gamma;
    let ln_two_over_delta = (2.0 / inputs.delta).ln();
    let tail = match inputs.horizon {
        Horizon::Infinite => 0.0,
        Horizon::Finite(l) => inputs.gamma.powf((l - inputs.start_step) as f64),
    };
    let mid_coeff = inputs.reward_max / (residual * residual)
        + 2.0 * inputs.action_lipschitz * inputs.action_diameter / residual;
    BoundTerms {
        variance_initial: inputs.reward_max / residual
            * (ln_two_over_delta * weight_ratio / 2.0).sqrt(),
        variance_middle: mid_coeff * (2.0 * ln_two_over_delta * weight_ratio).sqrt(),
        truncation: mid_coeff * tail,
        bellman: inputs.bellman_err / residual,
        mismatch: 2.0 * inputs.action_lipschitz * inputs.w1_err / residual,
    }
}

fn bound_value(inputs: &BoundInputs, weight_ratio: f64) -> f64 {
    bound_terms(inputs, weight_ratio).total()
}
