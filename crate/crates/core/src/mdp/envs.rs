//! Shipped testbed environments.

use crate::mdp::TabularMdp;

/// 8-state chain. Four actions with coordinates {0, 1/3, 2/3, 1} displace
/// the state by {-1, 0, +1, +2}; with probability 0.1 the move slips to
/// -1 instead. Positions clamp to the ends. The rightmost state pays
/// reward 1 under every action; the walk starts at the left end.
pub fn chain_walk() -> TabularMdp {
    let n_states = 8usize;
    let n_actions = 4usize;
    let displacement = [-1i64, 0, 1, 2];
    let slip = 0.1;
    let clamp = |s: i64| s.clamp(0, n_states as i64 - 1) as usize;
    let mut transition = vec![vec![vec![0.0; n_states]; n_actions]; n_states];
    for s in 0..n_states {
        for a in 0..n_actions {
            transition[s][a][clamp(s as i64 + displacement[a])] += 1.0 - slip;
            transition[s][a][clamp(s as i64 - 1)] += slip;
        }
    }
    let reward = (0..n_states)
        .map(|s| vec![if s == n_states - 1 { 1.0 } else { 0.0 }; n_actions])
        .collect();
    let mut rho0 = vec![0.0; n_states];
    rho0[0] = 1.0;
    TabularMdp {
        n_states,
        n_actions,
        transition,
        reward,
        gamma: 0.9,
        rho0,
        action_coords: vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0],
        reward_max: 1.0,
    }
}

/// 5x5 gridworld. Four moves (up/down/left/right, coordinates
/// {0, 1/3, 2/3, 1}); each move goes as intended with probability 0.9 and
/// slips to one of the other three directions with probability 0.1/3.
/// Off-grid moves stay in place. The bottom-right cell is absorbing with
/// reward 1; the start is uniform over all cells.
pub fn gridworld() -> TabularMdp {
    let side = 5usize;
    let n_states = side * side;
    let n_actions = 4usize;
    let goal = n_states - 1;
    let moves = [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)];
    let step = |s: usize, mv: (i64, i64)| -> usize {
        let (row, col) = ((s / side) as i64, (s % side) as i64);
        let (r2, c2) = (row + mv.0, col + mv.1);
        if r2 < 0 || r2 >= side as i64 || c2 < 0 || c2 >= side as i64 {
            s
        } else {
            (r2 * side as i64 + c2) as usize
        }
    };
    let mut transition = vec![vec![vec![0.0; n_states]; n_actions]; n_states];
    for s in 0..n_states {
        for (a, row) in transition[s].iter_mut().enumerate() {
            if s == goal {
                row[goal] = 1.0;
                continue;
            }
            for (b, mv) in moves.iter().enumerate() {
                let p = if b == a { 0.9 } else { 0.1 / 3.0 };
                row[step(s, *mv)] += p;
            }
        }
    }
    let reward = (0..n_states)
        .map(|s| vec![if s == goal { 1.0 } else { 0.0 }; n_actions])
        .collect();
    TabularMdp {
        n_states,
        n_actions,
        transition,
        reward,
        gamma: 0.9,
        rho0: vec![1.0 / n_states as f64; n_states],
        action_coords: vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0],
        reward_max: 1.0,
    }
}

/// Environment ids understood by the CLI and the text loader.
pub fn by_name(name: &str) -> Option<TabularMdp> {
    match name {
        "chain" => Some(chain_walk()),
        "grid" => Some(gridworld()),
        _ => None,
    }
}
