//! Randomized property checks across the library surface.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use erelab::analysis::{eval_error_bound, hoeffding_error};
use erelab::mdp::random::{random_distribution, random_mdp, random_policy};
use erelab::mdp::solve::{bellman_apply, exact_q, verify_flow_identity};
use erelab::mdp::transport::{min_cost_transport, w1_distance};
use erelab::mdp::textfmt;
use erelab::profile::expected_selection_profile;
use erelab::replay::transition_at;
use erelab::weighting::{ere_apx_weight, ere_exact_weight};
use erelab::{BoundInputs, EreParams, ReplayBuffer, WeightScheme};

fn ere_params() -> impl Strategy<Value = EreParams> {
    (2u64..1200, 1u64..400, 0.5f64..0.9999, 1u64..150).prop_flat_map(
        |(size, horizon, eta, stages)| {
            (1u64..=size).prop_map(move |min_coverage| EreParams {
                buffer_size: size,
                horizon,
                eta,
                min_coverage,
                stages,
            })
        },
    )
}

fn distribution(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-3f64..1.0, n).prop_map(|raw| {
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / s).collect()
    })
}

proptest! {
    #[test]
    fn buffer_tree_survives_op_interleavings(
        ops in prop::collection::vec((0u8..4, 0.01f64..5.0), 1..60)
    ) {
        let mut buf = ReplayBuffer::with_capacity(16).unwrap();
        let mut now = 0u64;
        buf.push(transition_at({ now += 1; now })).unwrap();
        for (kind, val) in ops {
            match kind {
                0 => buf.push(transition_at({ now += 1; now })).unwrap(),
                1 => {
                    let idx = (val * 1000.0) as usize % buf.len();
                    buf.set_weight(idx, val).unwrap();
                }
                2 => buf.reweight(&WeightScheme::OneOverAge, now).unwrap(),
                _ => {
                    let params = EreParams {
                        buffer_size: buf.len() as u64,
                        horizon: 40,
                        eta: 0.95,
                        min_coverage: 4.min(buf.len() as u64),
                        stages: 10,
                    };
                    buf.reweight(&WeightScheme::EreApprox(params), now).unwrap();
                }
            }
            prop_assert!(buf.consistency_error() <= 1e-9);
            for i in 0..buf.len() {
                prop_assert!(buf.weight(i) >= 0.0);
            }
        }
    }

    #[test]
    fn batches_are_deterministic_and_in_range(
        pushes in 1usize..40,
        batch in 1usize..12,
        seed in any::<u64>()
    ) {
        let mut buf = ReplayBuffer::new();
        for t in 1..=pushes as u64 {
            buf.push(transition_at(t)).unwrap();
        }
        let a = buf.sample_batch(batch, seed).unwrap();
        let b = buf.sample_batch(batch, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.iter().all(|i| *i < buf.len()));
    }

    #[test]
    fn ere_weights_nonnegative_and_nonincreasing(params in ere_params()) {
        let mut last_apx = f64::INFINITY;
        let mut last_exact = f64::INFINITY;
        for t in 1..=params.buffer_size {
            let apx = ere_apx_weight(&params, t).unwrap();
            let exact = ere_exact_weight(&params, t).unwrap();
            prop_assert!(apx >= 0.0 && exact >= 0.0);
            prop_assert!(apx <= last_apx + 1e-15);
            prop_assert!(exact <= last_exact + 1e-15);
            last_apx = apx;
            last_exact = exact;
        }
    }

    #[test]
    fn near_one_eta_gives_flat_weights(
        size in 100u64..2000,
        horizon in 10u64..2000,
        min_coverage in 1u64..50
    ) {
        let eta = (1.0f64 - 1e-8).powf(1.0 / horizon as f64);
        let params = EreParams { buffer_size: size, horizon, eta, min_coverage, stages: horizon };
        let floor = params.decayed_floor();
        prop_assert!(floor >= size as f64 * (1.0 - 1e-6));
        let covered = floor as u64;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for t in (1..=covered).step_by((covered as usize / 37).max(1)) {
            let w = ere_apx_weight(&params, t).unwrap();
            lo = lo.min(w);
            hi = hi.max(w);
        }
        prop_assert!((hi - lo) / lo <= 1e-6);
    }

    #[test]
    fn hoeffding_scale_invariant_and_floored(
        w in prop::collection::vec(1e-3f64..1e3, 1..64),
        c in prop::sample::select(vec![1e-6, 0.25, 1.0, 42.0, 1e6])
    ) {
        let base = hoeffding_error(&w).unwrap();
        let scaled: Vec<f64> = w.iter().map(|x| c * x).collect();
        prop_assert!((hoeffding_error(&scaled).unwrap() - base).abs() <= 1e-12);
        prop_assert!(base >= 1.0 / (w.len() as f64).sqrt() - 1e-12);
    }

    #[test]
    fn bound_shrinks_with_more_episodes(
        episodes in 1u64..10_000,
        factor in 2u64..50,
        gamma in 0.5f64..0.95,
        eps in 0.0f64..1.0
    ) {
        let few = BoundInputs {
            action_lipschitz: 1.0,
            action_diameter: 1.0,
            bellman_err: eps,
            w1_err: eps / 2.0,
            ..BoundInputs::full_horizon(1.0, gamma, 0.1, episodes)
        };
        let many = BoundInputs { episodes: episodes * factor, ..few.clone() };
        prop_assert!(eval_error_bound(&many).unwrap() <= eval_error_bound(&few).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn w1_is_a_metric_and_matches_lp(
        (p, q, r, coords) in (2usize..=7).prop_flat_map(|n| (
            distribution(n),
            distribution(n),
            distribution(n),
            prop::collection::vec(-2.0f64..2.0, n),
        ))
    ) {
        let pq = w1_distance(&p, &q, &coords).unwrap();
        let qp = w1_distance(&q, &p, &coords).unwrap();
        prop_assert!((pq - qp).abs() <= 1e-12);
        prop_assert!(w1_distance(&p, &p, &coords).unwrap() == 0.0);
        let pr = w1_distance(&p, &r, &coords).unwrap();
        let rq = w1_distance(&r, &q, &coords).unwrap();
        prop_assert!(pq <= pr + rq + 1e-12);
        let lp = min_cost_transport(&p, &q, &coords).unwrap();
        prop_assert!((pq - lp).abs() <= 1e-7);
    }

    #[test]
    fn lipschitz_expectations_bounded_by_w1(
        (p1, p2, slopes, start) in (2usize..=8).prop_flat_map(|n| (
            distribution(n),
            distribution(n),
            prop::collection::vec(-1.0f64..1.0, n - 1),
            -5.0f64..5.0,
        )),
        scale in 0.1f64..4.0
    ) {
        let n = p1.len();
        let coords: Vec<f64> = (0..n).map(|k| k as f64 * 0.37).collect();
        let mut q = vec![start];
        for k in 1..n {
            q.push(q[k - 1] + scale * slopes[k - 1] * (coords[k] - coords[k - 1]));
        }
        let e1: f64 = p1.iter().zip(&q).map(|(p, v)| p * v).sum();
        let e2: f64 = p2.iter().zip(&q).map(|(p, v)| p * v).sum();
        let w1 = w1_distance(&p1, &p2, &coords).unwrap();
        prop_assert!((e1 - e2).abs() <= scale * w1 + 1e-12);
    }

    #[test]
    fn exact_q_in_range_and_bellman_fixed(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mdp = random_mdp(&mut rng, 6, 3);
        let policy = random_policy(&mut rng, 6, 3);
        let q = exact_q(&mdp, &policy).unwrap();
        let cap = mdp.q_cap();
        for row in &q {
            for v in row {
                prop_assert!(*v >= 0.0 && *v <= cap);
            }
        }
        let back = bellman_apply(&mdp, &policy, &q);
        for (r1, r2) in q.iter().zip(&back) {
            for (a, b) in r1.iter().zip(r2) {
                prop_assert!((a - b).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn profile_mass_and_scaling(
        horizon in 2usize..150,
        batch in 1usize..5,
        updates in 1usize..4
    ) {
        let unit = expected_selection_profile(&WeightScheme::OneOverAge, horizon, 1, 1).unwrap();
        let scaled = expected_selection_profile(&WeightScheme::OneOverAge, horizon, batch, updates).unwrap();
        let k = (batch * updates) as f64;
        for (u, s) in unit.expected.iter().zip(&scaled.expected) {
            prop_assert!((k * u - s).abs() <= 1e-9 * k);
        }
        let mass: f64 = scaled.expected.iter().sum();
        let want = k * horizon as f64;
        prop_assert!((mass - want).abs() / want <= 1e-9);
    }

    #[test]
    fn text_format_round_trips(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mdp = random_mdp(&mut rng, 5, 3);
        let text = textfmt::render(&mdp).unwrap();
        let back = textfmt::parse(&text).unwrap();
        prop_assert_eq!(mdp.transition, back.transition);
        prop_assert_eq!(mdp.reward, back.reward);
        prop_assert_eq!(mdp.rho0, back.rho0);
        prop_assert_eq!(mdp.gamma, back.gamma);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn flow_identity_residual_small(seed in any::<u64>(), episodes in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mdp = random_mdp(&mut rng, 6, 3);
        let policies: Vec<_> = (0..episodes).map(|_| random_policy(&mut rng, 6, 3)).collect();
        let starts: Vec<Vec<f64>> = (0..episodes)
            .map(|_| random_distribution(&mut rng, 6))
            .collect();
        let residual = verify_flow_identity(&mdp, &policies, &starts, None).unwrap();
        prop_assert!(residual <= 1e-8);
    }
}
