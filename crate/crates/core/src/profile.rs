//! Expected selection-count profiles.
//!
//! An entry inserted at step s of a horizon-T run (one insertion per step,
//! buffer starting empty, u weighted updates of b draws after each
//! insertion) is expected to be drawn
//!
//! ```text
//! E[s] = sum over n = s..T of u * b * w(n - s + 1) / W_n,   W_n = sum_{t<=n} w(t)
//! ```
//!
//! times in total. The profile is that expectation for every insertion
//! step. E[s] is a cross-correlation of the age-weight sequence with the
//! inverse normalizers, so long horizons go through an FFT; short ones are
//! summed directly.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::replay::{transition_at, ReplayBuffer};
use crate::weighting::WeightScheme;

/// Horizon length above which the FFT path takes over from direct summation.
const DIRECT_LIMIT: usize = 2048;

#[derive(Debug, Clone)]
pub struct SelectionProfile {
    /// expected[s-1] is the expected total selection count of the entry
    /// inserted at step s (1-based).
    pub expected: Vec<f64>,
}

impl SelectionProfile {
    pub fn horizon(&self) -> usize {
        self.expected.len()
    }

    /// Expected count for the entry inserted at 1-based step `s`.
    pub fn at_step(&self, s: usize) -> f64 {
        self.expected[s - 1]
    }

    /// Coefficient of variation (std/mean) over 1-based steps lo..=hi.
    pub fn cv_over(&self, lo: usize, hi: usize) -> Result<f64> {
        if lo < 1 || hi > self.expected.len() || lo > hi {
            return Err(Error::parameter(format!(
                "step range [{lo}, {hi}] invalid for horizon {}",
                self.expected.len()
            )));
        }
        let seg = &self.expected[lo - 1..hi];
        let mean = seg.iter().sum::<f64>() / seg.len() as f64;
        if mean <= 0.0 {
            return Err(Error::Numerical("profile segment has zero mean".into()));
        }
        let var = seg.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / seg.len() as f64;
        Ok(var.sqrt() / mean)
    }

    /// CV over the middle `fraction` of steps (e.g. 0.8 drops 10% per side).
    pub fn cv_middle(&self, fraction: f64) -> Result<f64> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::parameter("fraction must lie in (0, 1]"));
        }
        let t = self.expected.len();
        let margin = ((1.0 - fraction) / 2.0 * t as f64).round() as usize;
        let lo = (margin + 1).min(t);
        let hi = t.saturating_sub(margin).max(lo);
        self.cv_over(lo, hi)
    }
}

/// Exact expected selection counts for every insertion step, computed
/// analytically. Only age-based schemes have a profile.
pub fn expected_selection_profile(
    scheme: &WeightScheme,
    horizon: usize,
    batch: usize,
    updates_per_step: usize,
) -> Result<SelectionProfile> {
    scheme.validate()?;
    if horizon < 1 {
        return Err(Error::parameter("horizon must be >= 1"));
    }
    if batch < 1 || updates_per_step < 1 {
        return Err(Error::parameter("batch and updates_per_step must be >= 1"));
    }
    if !scheme.is_age_based() {
        return Err(Error::parameter(
            "priority schemes have no age-based selection profile",
        ));
    }
    let weights: Vec<f64> = (1..=horizon as u64)
        .map(|age| scheme.weight(age, None))
        .collect::<Result<_>>()?;
    let mut normalizers = Vec::with_capacity(horizon);
    let mut acc = 0.0;
    for &w in &weights {
        acc += w;
        if !acc.is_finite() || acc <= 0.0 {
            return Err(Error::Numerical(
                "total weight is zero at some step; profile undefined".into(),
            ));
        }
        normalizers.push(1.0 / acc);
    }
    let per_step = (batch * updates_per_step) as f64;
    let expected = if horizon <= DIRECT_LIMIT {
        correlate_direct(&weights, &normalizers, per_step)
    } else {
        correlate_fft(&weights, &normalizers, per_step)
    };
    Ok(SelectionProfile { expected })
}

fn correlate_direct(weights: &[f64], normalizers: &[f64], per_step: f64) -> Vec<f64> {
    let t = weights.len();
    let mut out = vec![0.0; t];
    for s in 1..=t {
        let mut sum = 0.0;
        for n in s..=t {
            sum += weights[n - s] * normalizers[n - 1];
        }
        out[s - 1] = per_step * sum;
    }
    out
}

// E[s] = sum_m w[m] * c[s-1+m] is a correlation; with both sequences padded
// to length >= 2T there is no circular wrap-around for the lags we keep.
fn correlate_fft(weights: &[f64], normalizers: &[f64], per_step: f64) -> Vec<f64> {
    let t = weights.len();
    let size = (2 * t).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(size);
    let ifft = planner.plan_fft_inverse(size);

    let mut wa: Vec<Complex64> = weights
        .iter()
        .map(|&w| Complex64::new(w, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut cb: Vec<Complex64> = normalizers
        .iter()
        .map(|&c| Complex64::new(c, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(size)
        .collect();
    fft.process(&mut wa);
    fft.process(&mut cb);
    for (a, b) in wa.iter_mut().zip(cb.iter()) {
        *a = a.conj() * b;
    }
    ifft.process(&mut wa);
    let scale = per_step / size as f64;
    (0..t).map(|lag| wa[lag].re * scale).collect()
}

/// Simulated selection counts from end-to-end buffer sampling.
///
/// Runs `runs` independent simulations of the same growing-buffer protocol
/// the analytic profile models, and returns per-step mean counts together
/// with the standard error of that mean across runs.
pub fn monte_carlo_selection_profile(
    scheme: &WeightScheme,
    horizon: usize,
    batch: usize,
    updates_per_step: usize,
    seed: u64,
    runs: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    scheme.validate()?;
    if runs < 2 {
        return Err(Error::parameter("need at least 2 runs for a standard error"));
    }
    if !scheme.is_age_based() {
        return Err(Error::parameter(
            "priority schemes have no age-based selection profile",
        ));
    }
    let mut totals = vec![0.0f64; horizon];
    let mut squares = vec![0.0f64; horizon];
    for run in 0..runs {
        let mut counts = vec![0u64; horizon];
        let mut buf = ReplayBuffer::new();
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
            seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(run as u64 + 1)),
        );
        for step in 1..=horizon as u64 {
            buf.push(transition_at(step))?;
            buf.reweight(scheme, step)?;
            for _ in 0..updates_per_step {
                for idx in buf.sample_batch_with_rng(batch, &mut rng)? {
                    counts[buf.entry(idx).global_time as usize - 1] += 1;
                }
            }
        }
        for (s, &c) in counts.iter().enumerate() {
            totals[s] += c as f64;
            squares[s] += (c as f64) * (c as f64);
        }
    }
    let n = runs as f64;
    let mut means = Vec::with_capacity(horizon);
    let mut stderrs = Vec::with_capacity(horizon);
    for s in 0..horizon {
        let mean = totals[s] / n;
        let var = (squares[s] / n - mean * mean).max(0.0) * n / (n - 1.0);
        means.push(mean);
        stderrs.push((var / n).sqrt());
    }
    Ok((means, stderrs))
}
