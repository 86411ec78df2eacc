//! 1-Wasserstein distance between action distributions.
//!
//! Actions live on the real line through their coordinates, so W1 is the
//! area between the two CDFs over the sorted support. A min-cost transport
//! LP provides an independent oracle for cross-checks.

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::{Error, Result};

/// Exact W1 under |x - y|: integral of |CDF_p - CDF_q| over the sorted
/// coordinates.
pub fn w1_distance(p: &[f64], q: &[f64], coords: &[f64]) -> Result<f64> {
    check_pair(p, q, coords)?;
    let mut order: Vec<usize> = (0..coords.len()).collect();
    order.sort_by(|&i, &j| coords[i].partial_cmp(&coords[j]).unwrap());
    let mut cdf_gap = 0.0;
    let mut total = 0.0;
    for w in order.windows(2) {
        cdf_gap += p[w[0]] - q[w[0]];
        total += cdf_gap.abs() * (coords[w[1]] - coords[w[0]]);
    }
    Ok(total)
}

/// Minimum-cost transport plan value between p and q with cost |x - y|,
/// solved as an LP. Exists as an independent check on `w1_distance`.
pub fn min_cost_transport(p: &[f64], q: &[f64], coords: &[f64]) -> Result<f64> {
    check_pair(p, q, coords)?;
    let n = coords.len();
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let mut vars = vec![vec![]; n];
    for i in 0..n {
        for j in 0..n {
            let cost = (coords[i] - coords[j]).abs();
            vars[i].push(problem.add_var(cost, (0.0, f64::INFINITY)));
        }
    }
    for i in 0..n {
        let row: Vec<_> = (0..n).map(|j| (vars[i][j], 1.0)).collect();
        problem.add_constraint(&row, ComparisonOp::Eq, p[i]);
    }
    for j in 0..n {
        let col: Vec<_> = (0..n).map(|i| (vars[i][j], 1.0)).collect();
        problem.add_constraint(&col, ComparisonOp::Eq, q[j]);
    }
    let solution = problem
        .solve()
        .map_err(|e| Error::Numerical(format!("transport LP failed: {e:?}")))?;
    Ok(solution.objective())
}

fn check_pair(p: &[f64], q: &[f64], coords: &[f64]) -> Result<()> {
    if p.len() != coords.len() || q.len() != coords.len() || coords.is_empty() {
        return Err(Error::parameter(
            "both distributions must cover the coordinate set",
        ));
    }
    if coords.iter().any(|c| !c.is_finite()) {
        return Err(Error::parameter("coordinates must be finite"));
    }
    for dist in [p, q] {
        if dist.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::parameter("distribution entries must be >= 0"));
        }
        let sum: f64 = dist.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::parameter(format!(
                "distribution sums to {sum}, expected 1"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_distributions_have_zero_distance() {
        let p = [0.25, 0.25, 0.5];
        let coords = [0.0, 1.0, 3.0];
        assert_eq!(w1_distance(&p, &p, &coords).unwrap(), 0.0);
    }

    #[test]
    fn point_masses_pay_their_separation() {
        let d = w1_distance(&[1.0, 0.0], &[0.0, 1.0], &[0.0, 1.0]).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_mass_move_costs_half() {
        let d = w1_distance(&[0.5, 0.5], &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
        let lp = min_cost_transport(&[0.5, 0.5], &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((lp - 0.5).abs() < 1e-9);
    }

    #[test]
    fn unsorted_coordinates_are_handled() {
        // same masses as above with the axis listed backwards
        let d = w1_distance(&[0.5, 0.5], &[0.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cdf_area_agrees_with_the_transport_lp() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for n in 2..=8 {
            for _ in 0..20 {
                let mut draw = || {
                    let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-6).collect();
                    let sum: f64 = raw.iter().sum();
                    raw.into_iter().map(|x| x / sum).collect::<Vec<f64>>()
                };
                let p = draw();
                let q = draw();
                let coords: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect();
                let exact = w1_distance(&p, &q, &coords).unwrap();
                let lp = min_cost_transport(&p, &q, &coords).unwrap();
                assert!((exact - lp).abs() < 1e-7, "n={n}: {exact} vs {lp}");
            }
        }
    }

    #[test]
    fn metric_axioms_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let n = 5;
        let draw = |rng: &mut ChaCha8Rng| {
            let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-6).collect();
            let sum: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / sum).collect::<Vec<f64>>()
        };
        let coords: Vec<f64> = (0..n).map(|k| k as f64 * 0.7).collect();
        for _ in 0..50 {
            let p = draw(&mut rng);
            let q = draw(&mut rng);
            let r = draw(&mut rng);
            let pq = w1_distance(&p, &q, &coords).unwrap();
            let qp = w1_distance(&q, &p, &coords).unwrap();
            let pr = w1_distance(&p, &r, &coords).unwrap();
            let rq = w1_distance(&r, &q, &coords).unwrap();
            assert!((pq - qp).abs() < 1e-12);
            assert!(pq <= pr + rq + 1e-12);
            assert!(w1_distance(&p, &p, &coords).unwrap() < 1e-12);
        }
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(w1_distance(&[1.0], &[0.5, 0.5], &[0.0, 1.0]).is_err());
        assert!(w1_distance(&[0.7, 0.7], &[0.5, 0.5], &[0.0, 1.0]).is_err());
        assert!(w1_distance(&[0.5, 0.5], &[0.5, 0.5], &[f64::NAN, 1.0]).is_err());
        assert!(w1_distance(&[], &[], &[]).is_err());
    }
}
