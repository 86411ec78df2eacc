//! The four subcommand bodies. Each returns the full output text; the
//! caller decides between stdout and a file.
//!
//! Every emitted table starts with one `#` provenance line holding the
//! command and the complete flag set (config file already resolved, output
//! path omitted), so re-running that line reproduces the bytes.

use std::fmt::Write as _;
use std::path::Path;

use erelab::error::{Error, Result};
use erelab::mdp::train::{run_off_policy_loop, LoopConfig};
use erelab::mdp::{envs, textfmt, TabularMdp};
use erelab::profile::{expected_selection_profile, monte_carlo_selection_profile};
use erelab::suites::{run_all, run_suite};
use rayon::prelude::*;

use crate::args::{BoundArgs, ProfileArgs, TrainArgs, VerifyArgs};

fn provenance(cmd: &str, pairs: &[(&'static str, String)]) -> String {
    let mut line = format!("# erelab {cmd}");
    for (key, value) in pairs {
        let _ = write!(line, " --{key} {value}");
    }
    line.push('\n');
    line
}

pub fn cmd_profile(args: &ProfileArgs) -> Result<String> {
    let scheme = args.scheme.build()?;
    let profile = expected_selection_profile(&scheme, args.horizon, args.batch, args.updates)?;
    let mut out = provenance("profile", &args.pairs());
    if args.mc_runs > 0 {
        let (mc_mean, mc_stderr) = monte_carlo_selection_profile(
            &scheme,
            args.horizon,
            args.batch,
            args.updates,
            args.seed,
            args.mc_runs,
        )?;
        out.push_str("time_step,expected_count,scheme,mc_count,mc_stderr\n");
        for s in 1..=args.horizon {
            let _ = writeln!(
                out,
                "{s},{},{},{},{}",
                profile.at_step(s),
                scheme.label(),
                mc_mean[s - 1],
                mc_stderr[s - 1]
            );
        }
    } else {
        out.push_str("time_step,expected_count,scheme\n");
        for s in 1..=args.horizon {
            let _ = writeln!(out, "{s},{},{}", profile.at_step(s), scheme.label());
        }
    }
    Ok(out)
}

pub fn cmd_bound(args: &BoundArgs) -> Result<String> {
    let inputs = args.build()?;
    let terms = erelab::analysis::eval_error_terms(&inputs)?;
    let mut out = provenance("bound", &args.pairs());
    let _ = writeln!(out, "variance_initial={}", terms.variance_initial);
    let _ = writeln!(out, "variance_middle={}", terms.variance_middle);
    let _ = writeln!(out, "truncation={}", terms.truncation);
    let _ = writeln!(out, "bellman={}", terms.bellman);
    let _ = writeln!(out, "mismatch={}", terms.mismatch);
    let _ = writeln!(out, "total={}", terms.total());
    Ok(out)
}

fn load_env(name: &str) -> Result<TabularMdp> {
    if let Some(mdp) = envs::by_name(name) {
        return Ok(mdp);
    }
    let path = Path::new(name);
    if path.exists() {
        return textfmt::load(path);
    }
    Err(Error::parameter(format!(
        "unknown environment '{name}'; expected chain, grid, or a file path"
    )))
}

pub fn cmd_train(args: &TrainArgs) -> Result<String> {
    let mdp = load_env(&args.env)?;
    let scheme = args.scheme.build()?;
    if args.seeds == 0 {
        return Err(Error::parameter("--seeds must be at least 1"));
    }
    let mut config = LoopConfig::new(args.episodes, args.traj_len, args.seed);
    config.delta = args.delta;
    config.learning_rate = args.learning_rate;
    config.batches_per_episode = args.batches;
    config.batch_size = args.batch_size;
    config.target_refresh = args.target_refresh;
    config.tau_init = args.tau_init;
    config.tau_floor = args.tau_floor;
    config.tau_decay = args.tau_decay;
    config.validate()?;

    let dir = tempfile::tempdir().map_err(Error::from)?;
    let label = scheme.label();
    let parts = (0..args.seeds)
        .into_par_iter()
        .map(|k| {
            let seed_k = args.seed.wrapping_add(7919u64.wrapping_mul(k));
            let mut run_config = config.clone();
            run_config.seed = seed_k;
            let records = run_off_policy_loop(&mdp, &scheme, &run_config)?;
            let mut rows = String::new();
            for r in &records {
                let _ = writeln!(
                    rows,
                    "{},{},{},{},{},{},{label},{seed_k}",
                    r.episode, r.return_estimate, r.lhs_error, r.rhs_bound, r.bellman_err,
                    r.mismatch_err
                );
            }
            let path = dir.path().join(format!("part-{k}.csv"));
            std::fs::write(&path, rows).map_err(Error::from)?;
            Ok(path)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = provenance("train", &args.pairs());
    out.push_str("episode,return,lhs_error,rhs_bound,eps_q,w1,scheme,seed\n");
    for path in parts {
        out.push_str(&std::fs::read_to_string(&path).map_err(Error::from)?);
    }
    Ok(out)
}

/// Returns the report text and whether every suite passed.
pub fn cmd_verify(args: &VerifyArgs) -> Result<(String, bool)> {
    let reports = match &args.suite {
        Some(name) => vec![run_suite(name)?],
        None => run_all(),
    };
    let mut out = String::new();
    let mut passed = 0usize;
    for report in &reports {
        let verdict = if report.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "suite {}: {verdict}", report.name);
        for detail in &report.details {
            let _ = writeln!(out, "  {detail}");
        }
        if report.passed {
            passed += 1;
        }
    }
    let _ = writeln!(out, "{passed}/{} suites passed", reports.len());
    Ok((out, passed == reports.len()))
}
