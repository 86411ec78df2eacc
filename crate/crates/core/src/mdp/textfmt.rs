//! Plain-text environment files.
//!
//! Line-oriented, keyword-first, `#` comments. Header keywords declare
//! sizes and constants; `coords` and `rho0` list one value per action or
//! state; `reward s a value` and `transition s a s2 p` rows are sparse
//! with zero defaults.
//!
//! ```text
//! states 2
//! actions 1
//! gamma 0.9
//! reward_max 1.0
//! coords 0
//! rho0 1 0
//! reward 0 0 1
//! transition 0 0 1 1
//! transition 1 0 0 1
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mdp::TabularMdp;

pub fn parse(text: &str) -> Result<TabularMdp> {
    let mut states: Option<usize> = None;
    let mut actions: Option<usize> = None;
    let mut gamma: Option<f64> = None;
    let mut reward_max: Option<f64> = None;
    let mut coords: Option<Vec<f64>> = None;
    let mut rho0: Option<Vec<f64>> = None;
    let mut rewards: Vec<(usize, usize, f64)> = Vec::new();
    let mut transitions: Vec<(usize, usize, usize, f64)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let keyword = parts.next().unwrap();
        let rest: Vec<&str> = parts.collect();
        let at = |msg: &str| Error::Format(format!("line {}: {msg}", lineno + 1));
        match keyword {
            "states" => states = Some(parse_one(&rest).map_err(|m| at(&m))?),
            "actions" => actions = Some(parse_one(&rest).map_err(|m| at(&m))?),
            "gamma" => gamma = Some(parse_one(&rest).map_err(|m| at(&m))?),
            "reward_max" => reward_max = Some(parse_one(&rest).map_err(|m| at(&m))?),
            "coords" => coords = Some(parse_all(&rest).map_err(|m| at(&m))?),
            "rho0" => rho0 = Some(parse_all(&rest).map_err(|m| at(&m))?),
            "reward" => {
                if rest.len() != 3 {
                    return Err(at("reward takes: state action value"));
                }
                rewards.push((
                    parse_field(rest[0]).map_err(|m| at(&m))?,
                    parse_field(rest[1]).map_err(|m| at(&m))?,
                    parse_field(rest[2]).map_err(|m| at(&m))?,
                ));
            }
            "transition" => {
                if rest.len() != 4 {
                    return Err(at("transition takes: state action next_state probability"));
                }
                transitions.push((
                    parse_field(rest[0]).map_err(|m| at(&m))?,
                    parse_field(rest[1]).map_err(|m| at(&m))?,
                    parse_field(rest[2]).map_err(|m| at(&m))?,
                    parse_field(rest[3]).map_err(|m| at(&m))?,
                ));
            }
            other => return Err(at(&format!("unknown keyword '{other}'"))),
        }
    }

    let n_states = states.ok_or_else(|| Error::Format("missing 'states' line".into()))?;
    let n_actions = actions.ok_or_else(|| Error::Format("missing 'actions' line".into()))?;
    let gamma = gamma.ok_or_else(|| Error::Format("missing 'gamma' line".into()))?;
    let reward_max = reward_max.unwrap_or(1.0);
    let action_coords =
        coords.ok_or_else(|| Error::Format("missing 'coords' line".into()))?;
    let rho0 = rho0.ok_or_else(|| Error::Format("missing 'rho0' line".into()))?;

    let mut reward = vec![vec![0.0; n_actions]; n_states];
    for (s, a, v) in rewards {
        if s >= n_states || a >= n_actions {
            return Err(Error::Format(format!("reward index ({s}, {a}) out of range")));
        }
        reward[s][a] = v;
    }
    let mut transition = vec![vec![vec![0.0; n_states]; n_actions]; n_states];
    for (s, a, s2, p) in transitions {
        if s >= n_states || a >= n_actions || s2 >= n_states {
            return Err(Error::Format(format!(
                "transition index ({s}, {a}, {s2}) out of range"
            )));
        }
        transition[s][a][s2] = p;
    }

    let mdp = TabularMdp {
        n_states,
        n_actions,
        transition,
        reward,
        gamma,
        rho0,
        action_coords,
        reward_max,
    };
    mdp.validate()?;
    Ok(mdp)
}

pub fn render(mdp: &TabularMdp) -> Result<String> {
    mdp.validate()?;
    let mut out = String::new();
    let _ = writeln!(out, "states {}", mdp.n_states);
    let _ = writeln!(out, "actions {}", mdp.n_actions);
    let _ = writeln!(out, "gamma {}", mdp.gamma);
    let _ = writeln!(out, "reward_max {}", mdp.reward_max);
    let _ = writeln!(out, "coords {}", join(&mdp.action_coords));
    let _ = writeln!(out, "rho0 {}", join(&mdp.rho0));
    for s in 0..mdp.n_states {
        for a in 0..mdp.n_actions {
            if mdp.reward[s][a] != 0.0 {
                let _ = writeln!(out, "reward {s} {a} {}", mdp.reward[s][a]);
            }
        }
    }
    for s in 0..mdp.n_states {
        for a in 0..mdp.n_actions {
            for s2 in 0..mdp.n_states {
                if mdp.transition[s][a][s2] != 0.0 {
                    let _ = writeln!(out, "transition {s} {a} {s2} {}", mdp.transition[s][a][s2]);
                }
            }
        }
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<TabularMdp> {
    parse(&std::fs::read_to_string(path)?)
}

pub fn save(mdp: &TabularMdp, path: &Path) -> Result<()> {
    std::fs::write(path, render(mdp)?)?;
    Ok(())
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_field<T: std::str::FromStr>(token: &str) -> std::result::Result<T, String> {
    token
        .parse()
        .map_err(|_| format!("cannot parse '{token}'"))
}

fn parse_one<T: std::str::FromStr>(rest: &[&str]) -> std::result::Result<T, String> {
    if rest.len() != 1 {
        return Err("expected exactly one value".into());
    }
    parse_field(rest[0])
}

fn parse_all(rest: &[&str]) -> std::result::Result<Vec<f64>, String> {
    if rest.is_empty() {
        return Err("expected at least one value".into());
    }
    rest.iter().map(|t| parse_field(t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::envs;

    #[test]
    fn shipped_environments_round_trip() {
        for mdp in [envs::chain_walk(), envs::gridworld()] {
            let text = render(&mdp).unwrap();
            let back = parse(&text).unwrap();
            assert_eq!(mdp, back);
        }
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "\
# a tiny cycle
states 2
actions 1
gamma 0.5   # discount

reward_max 1.0
coords 0
rho0 1 0
reward 0 0 1
transition 0 0 1 1
transition 1 0 0 1
";
        let mdp = parse(text).unwrap();
        assert_eq!(mdp.n_states, 2);
        assert_eq!(mdp.gamma, 0.5);
        assert_eq!(mdp.reward[0][0], 1.0);
    }

    #[test]
    fn malformed_files_name_the_line() {
        let err = parse("states 2\nbogus 1\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
        assert!(parse("states 2\nactions 1\n").is_err());
        // rows that do not sum to one fail validation
        let text = "states 2\nactions 1\ngamma 0.5\ncoords 0\nrho0 1 0\ntransition 0 0 1 0.5\ntransition 1 0 0 1\n";
        assert!(parse(text).is_err());
    }
}
