//! Flag definitions and the key=value config-file merge.
//!
//! Precedence: built-in defaults < config file < explicit flags. The merge
//! consults clap's value sources, so a flag left at its default is
//! overridable by the file while an explicit one is not.

use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, Parser, Subcommand};
use erelab::analysis::{BoundInputs, Horizon};
use erelab::error::{Error, Result};
use erelab::weighting::{EreParams, WeightScheme};

#[derive(Parser, Debug)]
#[command(
    name = "erelab",
    version,
    about = "Replay-weighting experiment desk: selection profiles, evaluation-error bounds, tabular training runs and verification suites",
    long_about = None
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Emit the expected-selection profile of a sampling scheme as CSV
    /// (columns: time_step, expected_count, scheme; --mc-runs adds
    /// mc_count and mc_stderr columns)
    Profile(ProfileArgs),
    /// Print the evaluation-error bound term by term as key=value lines
    Bound(BoundArgs),
    /// Run the off-policy loop on a tabular environment and emit
    /// per-episode CSV (columns: episode, return, lhs_error, rhs_bound,
    /// eps_q, w1, scheme, seed)
    Train(TrainArgs),
    /// Run verification suites and print per-check results
    Verify(VerifyArgs),
}

/// Sampling-scheme selection, shared by profile and train.
#[derive(Args, Debug, Clone)]
pub struct SchemeArgs {
    /// Sampling scheme: uniform, one-over-age, ere-staged, ere-exact,
    /// ere-approx or priority
    #[arg(long, default_value = "uniform")]
    pub scheme: String,
    /// Schedule buffer size N0 (ere schemes)
    #[arg(long, default_value_t = 8000)]
    pub buffer_size: u64,
    /// Schedule horizon L0 (ere schemes)
    #[arg(long, default_value_t = 100)]
    pub ere_horizon: u64,
    /// Recency decay eta in (0, 1] (ere schemes)
    #[arg(long, default_value_t = 0.96)]
    pub eta: f64,
    /// Smallest stage coverage c_min (ere schemes)
    #[arg(long, default_value_t = 500)]
    pub min_coverage: u64,
    /// Stage count K (ere schemes)
    #[arg(long, default_value_t = 50)]
    pub stages: u64,
    /// Priority exponent (priority scheme)
    #[arg(long, default_value_t = 0.6)]
    pub priority_exponent: f64,
}

impl SchemeArgs {
    fn params(&self) -> EreParams {
        EreParams {
            buffer_size: self.buffer_size,
            horizon: self.ere_horizon,
            eta: self.eta,
            min_coverage: self.min_coverage,
            stages: self.stages,
        }
    }

    pub fn build(&self) -> Result<WeightScheme> {
        let scheme = match self.scheme.as_str() {
            "uniform" => WeightScheme::Uniform,
            "one-over-age" => WeightScheme::OneOverAge,
            "ere-staged" => WeightScheme::EreStaged(self.params()),
            "ere-exact" => WeightScheme::EreExact(self.params()),
            "ere-approx" => WeightScheme::EreApprox(self.params()),
            "priority" => WeightScheme::PriorityBaseline {
                exponent: self.priority_exponent,
            },
            other => {
                return Err(Error::parameter(format!(
                    "unknown scheme '{other}'; expected uniform, one-over-age, ere-staged, ere-exact, ere-approx or priority"
                )))
            }
        };
        scheme.validate()?;
        Ok(scheme)
    }

    fn pairs(&self, out: &mut Vec<(&'static str, String)>) {
        out.push(("scheme", self.scheme.clone()));
        out.push(("buffer-size", self.buffer_size.to_string()));
        out.push(("ere-horizon", self.ere_horizon.to_string()));
        out.push(("eta", self.eta.to_string()));
        out.push(("min-coverage", self.min_coverage.to_string()));
        out.push(("stages", self.stages.to_string()));
        out.push(("priority-exponent", self.priority_exponent.to_string()));
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "scheme" => self.scheme = value.to_string(),
            "buffer-size" => self.buffer_size = parse_kv(key, value)?,
            "ere-horizon" => self.ere_horizon = parse_kv(key, value)?,
            "eta" => self.eta = parse_kv(key, value)?,
            "min-coverage" => self.min_coverage = parse_kv(key, value)?,
            "stages" => self.stages = parse_kv(key, value)?,
            "priority-exponent" => self.priority_exponent = parse_kv(key, value)?,
            other => return Err(unknown_key(other)),
        }
        Ok(())
    }
}

#[derive(Args, Debug)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Insertion steps in the simulated run
    #[arg(long, default_value_t = 1000)]
    pub horizon: usize,
    /// Entries drawn per update
    #[arg(long, default_value_t = 1)]
    pub batch: usize,
    /// Updates per insertion step
    #[arg(long, default_value_t = 1)]
    pub updates: usize,
    /// Monte Carlo cross-check runs appended as extra columns (0 = off)
    #[arg(long, default_value_t = 0)]
    pub mc_runs: usize,
    /// Seed of the Monte Carlo cross-check
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// key=value file supplying values for flags not given explicitly
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl ProfileArgs {
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        self.scheme.pairs(&mut out);
        out.push(("horizon", self.horizon.to_string()));
        out.push(("batch", self.batch.to_string()));
        out.push(("updates", self.updates.to_string()));
        out.push(("mc-runs", self.mc_runs.to_string()));
        out.push(("seed", self.seed.to_string()));
        out
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "horizon" => self.horizon = parse_kv(key, value)?,
            "batch" => self.batch = parse_kv(key, value)?,
            "updates" => self.updates = parse_kv(key, value)?,
            "mc-runs" => self.mc_runs = parse_kv(key, value)?,
            "seed" => self.seed = parse_kv(key, value)?,
            _ => return self.scheme.apply(key, value),
        }
        Ok(())
    }
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    /// Upper end of the reward range
    #[arg(long, default_value_t = 1.0)]
    pub reward_max: f64,
    #[arg(long, default_value_t = 0.9)]
    pub gamma: f64,
    /// Critic Lipschitz constant over the action coordinate
    #[arg(long, default_value_t = 0.0)]
    pub lipschitz: f64,
    /// Action-coordinate diameter
    #[arg(long, default_value_t = 0.0)]
    pub diameter: f64,
    /// Failure probability of the bound
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 100)]
    pub episodes: u64,
    /// First trajectory step entering the estimate
    #[arg(long, default_value_t = 0)]
    pub start_step: u64,
    /// Episode horizon: a step count, or "inf" for whole episodes
    #[arg(long, default_value = "inf")]
    pub horizon: String,
    /// Measured Bellman residual
    #[arg(long, default_value_t = 0.0)]
    pub bellman_err: f64,
    /// Measured action-mismatch Wasserstein distance
    #[arg(long, default_value_t = 0.0)]
    pub w1_err: f64,
    /// Comma-separated per-episode weights; omitted = plain average
    #[arg(long)]
    pub weights: Option<String>,
    /// key=value file supplying values for flags not given explicitly
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl BoundArgs {
    pub fn build(&self) -> Result<BoundInputs> {
        let horizon = match self.horizon.as_str() {
            "inf" | "infinite" => Horizon::Infinite,
            text => Horizon::Finite(text.parse().map_err(|_| {
                Error::parameter(format!("horizon must be a step count or \"inf\", got '{text}'"))
            })?),
        };
        let episode_weights = match &self.weights {
            None => None,
            Some(list) => Some(
                list.split(',')
                    .map(|piece| {
                        piece.trim().parse::<f64>().map_err(|_| {
                            Error::parameter(format!("bad weight '{}' in --weights", piece.trim()))
                        })
                    })
                    .collect::<Result<Vec<f64>>>()?,
            ),
        };
        Ok(BoundInputs {
            reward_max: self.reward_max,
            gamma: self.gamma,
            action_lipschitz: self.lipschitz,
            action_diameter: self.diameter,
            delta: self.delta,
            episodes: self.episodes,
            start_step: self.start_step,
            horizon,
            bellman_err: self.bellman_err,
            w1_err: self.w1_err,
            episode_weights,
        })
    }

    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            ("reward-max", self.reward_max.to_string()),
            ("gamma", self.gamma.to_string()),
            ("lipschitz", self.lipschitz.to_string()),
            ("diameter", self.diameter.to_string()),
            ("delta", self.delta.to_string()),
            ("episodes", self.episodes.to_string()),
            ("start-step", self.start_step.to_string()),
            ("horizon", self.horizon.clone()),
            ("bellman-err", self.bellman_err.to_string()),
            ("w1-err", self.w1_err.to_string()),
        ];
        if let Some(w) = &self.weights {
            out.push(("weights", w.clone()));
        }
        out
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "reward-max" => self.reward_max = parse_kv(key, value)?,
            "gamma" => self.gamma = parse_kv(key, value)?,
            "lipschitz" => self.lipschitz = parse_kv(key, value)?,
            "diameter" => self.diameter = parse_kv(key, value)?,
            "delta" => self.delta = parse_kv(key, value)?,
            "episodes" => self.episodes = parse_kv(key, value)?,
            "start-step" => self.start_step = parse_kv(key, value)?,
            "horizon" => self.horizon = value.to_string(),
            "bellman-err" => self.bellman_err = parse_kv(key, value)?,
            "w1-err" => self.w1_err = parse_kv(key, value)?,
            "weights" => self.weights = Some(value.to_string()),
            other => return Err(unknown_key(other)),
        }
        Ok(())
    }
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Environment: chain, grid, or a path to an environment file
    #[arg(long, default_value = "chain")]
    pub env: String,
    #[arg(long, default_value_t = 200)]
    pub episodes: u64,
    #[arg(long, default_value_t = 40)]
    pub traj_len: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Independent runs at seeds seed, seed+7919, seed+2*7919, ...
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    /// Failure probability of the per-episode logged bound
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub learning_rate: f64,
    /// Critic mini-batches per episode
    #[arg(long, default_value_t = 50)]
    pub batches: usize,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    /// Batches between target refreshes
    #[arg(long, default_value_t = 10)]
    pub target_refresh: usize,
    #[arg(long, default_value_t = 1.0)]
    pub tau_init: f64,
    #[arg(long, default_value_t = 0.05)]
    pub tau_floor: f64,
    #[arg(long, default_value_t = 0.9)]
    pub tau_decay: f64,
    /// key=value file supplying values for flags not given explicitly
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl TrainArgs {
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![("env", self.env.clone())];
        self.scheme.pairs(&mut out);
        out.push(("episodes", self.episodes.to_string()));
        out.push(("traj-len", self.traj_len.to_string()));
        out.push(("seed", self.seed.to_string()));
        out.push(("seeds", self.seeds.to_string()));
        out.push(("delta", self.delta.to_string()));
        out.push(("learning-rate", self.learning_rate.to_string()));
        out.push(("batches", self.batches.to_string()));
        out.push(("batch-size", self.batch_size.to_string()));
        out.push(("target-refresh", self.target_refresh.to_string()));
        out.push(("tau-init", self.tau_init.to_string()));
        out.push(("tau-floor", self.tau_floor.to_string()));
        out.push(("tau-decay", self.tau_decay.to_string()));
        out
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "env" => self.env = value.to_string(),
            "episodes" => self.episodes = parse_kv(key, value)?,
            "traj-len" => self.traj_len = parse_kv(key, value)?,
            "seed" => self.seed = parse_kv(key, value)?,
            "seeds" => self.seeds = parse_kv(key, value)?,
            "delta" => self.delta = parse_kv(key, value)?,
            "learning-rate" => self.learning_rate = parse_kv(key, value)?,
            "batches" => self.batches = parse_kv(key, value)?,
            "batch-size" => self.batch_size = parse_kv(key, value)?,
            "target-refresh" => self.target_refresh = parse_kv(key, value)?,
            "tau-init" => self.tau_init = parse_kv(key, value)?,
            "tau-floor" => self.tau_floor = parse_kv(key, value)?,
            "tau-decay" => self.tau_decay = parse_kv(key, value)?,
            _ => return self.scheme.apply(key, value),
        }
        Ok(())
    }
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Run a single suite by name instead of all of them
    #[arg(long)]
    pub suite: Option<String>,
}

fn parse_kv<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e| Error::parameter(format!("config key '{key}': {e}")))
}

fn unknown_key(key: &str) -> Error {
    Error::parameter(format!("config key '{key}' does not name a flag"))
}

/// One key=value assignment per line; `#` starts a comment; blank lines
/// are skipped.
fn read_kv(path: &std::path::Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::parameter(format!("config file {}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::parameter(format!(
                "config file {} line {}: expected key=value",
                path.display(),
                idx + 1
            )));
        };
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

/// Applies config-file values to every flag the command line left at its
/// default. `apply` writes one parsed value; unknown keys error.
pub fn merge_config<F>(
    config: Option<&std::path::Path>,
    sub: &ArgMatches,
    mut apply: F,
) -> Result<()>
where
    F: FnMut(&str, &str) -> Result<()>,
{
    let Some(path) = config else {
        return Ok(());
    };
    for (key, value) in read_kv(path)? {
        if key == "config" || key == "output" {
            return Err(Error::parameter(format!(
                "config key '{key}' is not allowed in a config file"
            )));
        }
        let id = key.replace('-', "_");
        if sub.try_contains_id(&id).is_err() {
            return Err(unknown_key(&key));
        }
        if sub.value_source(&id) == Some(ValueSource::CommandLine) {
            continue;
        }
        apply(&key, &value)?;
    }
    Ok(())
}

pub fn merge_profile(args: &mut ProfileArgs, sub: &ArgMatches) -> Result<()> {
    merge_config(args.config.clone().as_deref(), sub, |k, v| args.apply(k, v))
}

pub fn merge_bound(args: &mut BoundArgs, sub: &ArgMatches) -> Result<()> {
    merge_config(args.config.clone().as_deref(), sub, |k, v| args.apply(k, v))
}

pub fn merge_train(args: &mut TrainArgs, sub: &ArgMatches) -> Result<()> {
    merge_config(args.config.clone().as_deref(), sub, |k, v| args.apply(k, v))
}
