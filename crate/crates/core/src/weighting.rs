//! Sampling-weight schemes for replay buffers.
//!
//! Ages are 1-based: the newest entry has age 1. A scheme maps an age (and,
//! for the priority baseline, an externally maintained priority) to an
//! unnormalized sampling weight. Comparisons between schemes normalize the
//! resulting weight vectors first, so only relative values matter.
//!
//! The recency schedule behind the staged scheme samples the k-th of K
//! updates uniformly from the most recent
//! `c_k = max(floor(N0 * eta^(k*L0/K)), c_min)` entries, clamped to the
//! buffer size N0. Aggregated over all K updates, an entry of age t is
//! expected to be drawn proportionally to
//!
//! ```text
//! w(t) = sum over stages k with c_k >= t of 1/c_k
//! ```
//!
//! [`ere_aggregate_oracle`] evaluates that sum directly and serves as the
//! ground truth. [`ere_exact_weight`] is its closed form,
//!
//! ```text
//! w(t) ∝ 1/(1 - eta^(L0/K)) * (1/max(t, c_min, N0*eta^L0) - 1/N0)
//!        + 1(t <= c_min) * (K/c_min) * max(1 - ln(c_min/N0)/(L0 ln eta), 0)
//! ```
//!
//! and [`ere_apx_weight`] the first-order (in L0/K) simplification
//!
//! ```text
//! w(t) ∝ 1/max(t, c_min, N0*eta^L0) - 1/N0
//!        + 1(t <= c_min)/c_min * max(ln(c_min/(N0*eta^L0)), 0)
//! ```
//!
//! which drops the stage count K entirely and exposes the implicit
//! one-over-age behaviour on mid-range ages.

use crate::error::{Error, Result};

/// Parameters of the staged recency schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EreParams {
    /// Buffer size N0 the schedule is computed against.
    pub buffer_size: u64,
    /// Decay horizon L0 (the exponent scale, the paper's max episode length).
    pub horizon: u64,
    /// Per-horizon decay rate eta in (0, 1].
    pub eta: f64,
    /// Smallest window any stage may shrink to.
    pub min_coverage: u64,
    /// Number of stages K (updates per episode).
    pub stages: u64,
}

impl EreParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) || !self.eta.is_finite() {
            return Err(Error::parameter(format!(
                "eta must lie in (0, 1], got {}",
                self.eta
            )));
        }
        if self.min_coverage < 1 {
            return Err(Error::parameter("min_coverage must be >= 1"));
        }
        if self.buffer_size < 1 {
            return Err(Error::parameter("buffer_size must be >= 1"));
        }
        if self.min_coverage > self.buffer_size {
            return Err(Error::parameter(format!(
                "min_coverage {} exceeds buffer_size {}",
                self.min_coverage, self.buffer_size
            )));
        }
        if self.stages < 1 {
            return Err(Error::parameter("stages must be >= 1"));
        }
        if self.horizon < 1 {
            return Err(Error::parameter("horizon must be >= 1"));
        }
        Ok(())
    }

    /// Rejects eta = 1, where the closed forms divide by 1 - eta^(L0/K).
    fn validate_closed_form(&self) -> Result<()> {
        self.validate()?;
        if self.eta >= 1.0 {
            return Err(Error::parameter(
                "closed-form weights are undefined at eta = 1; use Uniform",
            ));
        }
        Ok(())
    }

    fn check_age(&self, t: u64) -> Result<()> {
        if t < 1 || t > self.buffer_size {
            return Err(Error::parameter(format!(
                "age {t} outside [1, {}]",
                self.buffer_size
            )));
        }
        Ok(())
    }

    /// N0 * eta^L0, the age at which the closed-form head flattens out.
    pub fn decayed_floor(&self) -> f64 {
        self.buffer_size as f64 * self.eta.powf(self.horizon as f64)
    }
}

/// How sampling weights are assigned to buffer entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightScheme {
    /// Every entry weighted equally.
    Uniform,
    /// Weight 1/age.
    OneOverAge,
    /// Staged windows; per-age weight is the aggregate over all stages.
    EreStaged(EreParams),
    /// Closed form of the staged aggregate.
    EreExact(EreParams),
    /// First-order simplification of the closed form.
    EreApprox(EreParams),
    /// priority^exponent, with priorities maintained by the caller. No
    /// importance-sampling correction is applied.
    PriorityBaseline { exponent: f64 },
}

impl WeightScheme {
    pub fn validate(&self) -> Result<()> {
        match self {
            WeightScheme::Uniform | WeightScheme::OneOverAge => Ok(()),
            WeightScheme::EreStaged(p) => p.validate(),
            WeightScheme::EreExact(p) | WeightScheme::EreApprox(p) => p.validate_closed_form(),
            WeightScheme::PriorityBaseline { exponent } => {
                if !exponent.is_finite() || *exponent < 0.0 {
                    Err(Error::parameter(format!(
                        "priority exponent must be finite and >= 0, got {exponent}"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// True when the weight depends only on the entry's age.
    pub fn is_age_based(&self) -> bool {
        !matches!(self, WeightScheme::PriorityBaseline { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            WeightScheme::Uniform => "uniform",
            WeightScheme::OneOverAge => "one-over-age",
            WeightScheme::EreStaged(_) => "ere-staged",
            WeightScheme::EreExact(_) => "ere-exact",
            WeightScheme::EreApprox(_) => "ere-approx",
            WeightScheme::PriorityBaseline { .. } => "priority",
        }
    }

    /// Unnormalized sampling weight of an entry of age `t`.
    ///
    /// Ages past the schedule's buffer size fall outside every stage window
    /// and get weight 0 rather than an error, so a buffer holding more than
    /// N0 entries simply stops sampling the surplus.
    pub fn weight(&self, t: u64, priority: Option<f64>) -> Result<f64> {
        if t < 1 {
            return Err(Error::parameter("age must be >= 1"));
        }
        match self {
            WeightScheme::Uniform => Ok(1.0),
            WeightScheme::OneOverAge => Ok(1.0 / t as f64),
            WeightScheme::EreStaged(p) => {
                if t > p.buffer_size {
                    Ok(0.0)
                } else {
                    ere_aggregate_oracle(p, t)
                }
            }
            WeightScheme::EreExact(p) => {
                if t > p.buffer_size {
                    Ok(0.0)
                } else {
                    ere_exact_weight(p, t)
                }
            }
            WeightScheme::EreApprox(p) => {
                if t > p.buffer_size {
                    Ok(0.0)
                } else {
                    ere_apx_weight(p, t)
                }
            }
            WeightScheme::PriorityBaseline { exponent } => {
                let pr = priority.ok_or_else(|| {
                    Error::parameter("priority scheme requires a per-entry priority")
                })?;
                if !pr.is_finite() || pr < 0.0 {
                    return Err(Error::parameter(format!(
                        "priority must be finite and >= 0, got {pr}"
                    )));
                }
                Ok(pr.powf(*exponent))
            }
        }
    }
}

/// Window size of stage k: `max(floor(N0 * eta^(k*L0/K)), c_min)`, clamped
/// to N0. Stage indices are 1-based.
pub fn ere_stage_coverage(params: &EreParams, k: u64) -> Result<u64> {
    params.validate()?;
    if k < 1 || k > params.stages {
        return Err(Error::parameter(format!(
            "stage {k} outside [1, {}]",
            params.stages
        )));
    }
    let exponent = k as f64 * params.horizon as f64 / params.stages as f64;
    let raw = params.buffer_size as f64 * params.eta.powf(exponent);
    let floored = raw.floor() as u64;
    Ok(floored.max(params.min_coverage).min(params.buffer_size))
}

/// Ground-truth aggregate weight of age `t`: the direct sum of 1/c_k over
/// every stage whose window still covers the entry.
pub fn ere_aggregate_oracle(params: &EreParams, t: u64) -> Result<f64> {
    params.check_age(t)?;
    let mut sum = 0.0;
    for k in 1..=params.stages {
        let ck = ere_stage_coverage(params, k)?;
        if ck >= t {
            sum += 1.0 / ck as f64;
        }
    }
    Ok(sum)
}

/// Aggregate-oracle weights for every age 1..=N0 in O(N0 + K).
///
/// Stage windows shrink as k grows, so the stages covering age t form a
/// prefix of the stage list; a running cursor over the sorted windows gives
/// each age its prefix sum of 1/c_k.
pub fn ere_aggregate_oracle_profile(params: &EreParams) -> Result<Vec<f64>> {
    params.validate()?;
    let n0 = params.buffer_size as usize;
    let mut coverages = Vec::with_capacity(params.stages as usize);
    for k in 1..=params.stages {
        coverages.push(ere_stage_coverage(params, k)?);
    }
    // non-increasing in k
    let mut prefix = Vec::with_capacity(coverages.len() + 1);
    prefix.push(0.0);
    for &c in &coverages {
        let last = *prefix.last().unwrap();
        prefix.push(last + 1.0 / c as f64);
    }
    let mut out = vec![0.0; n0];
    let mut covered = coverages.len();
    for t in 1..=n0 {
        while covered > 0 && (coverages[covered - 1] as usize) < t {
            covered -= 1;
        }
        out[t - 1] = prefix[covered];
    }
    Ok(out)
}

/// Closed form of the staged aggregate weight.
pub fn ere_exact_weight(params: &EreParams, t: u64) -> Result<f64> {
    params.validate_closed_form()?;
    params.check_age(t)?;
    let n0 = params.buffer_size as f64;
    let c_min = params.min_coverage as f64;
    let k = params.stages as f64;
    let l0 = params.horizon as f64;
    let xi = params.eta.powf(l0 / k);
    let floor_age = (t as f64).max(c_min).max(params.decayed_floor());
    let head = (1.0 / floor_age - 1.0 / n0) / (1.0 - xi);
    let tail = if t as f64 <= c_min {
        let ratio = (c_min / n0).ln() / (l0 * params.eta.ln());
        (k / c_min) * (1.0 - ratio).max(0.0)
    } else {
        0.0
    };
    Ok(head + tail)
}

/// First-order simplification of [`ere_exact_weight`], independent of the
/// stage count.
pub fn ere_apx_weight(params: &EreParams, t: u64) -> Result<f64> {
    params.validate_closed_form()?;
    params.check_age(t)?;
    let n0 = params.buffer_size as f64;
    let c_min = params.min_coverage as f64;
    let decayed = params.decayed_floor();
    let floor_age = (t as f64).max(c_min).max(decayed);
    let head = 1.0 / floor_age - 1.0 / n0;
    let tail = if t as f64 <= c_min {
        (c_min / decayed).ln().max(0.0) / c_min
    } else {
        0.0
    };
    Ok(head + tail)
}

/// Normalizes a weight vector to sum to 1.
pub fn normalize(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(Error::parameter("cannot normalize an empty weight vector"));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::Numerical(
            "weights must be finite and non-negative".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::Numerical("total weight is zero".into()));
    }
    Ok(weights.iter().map(|w| w / total).collect())
}
