use crate::error::CfldError;
use crate::model::{DerivedCoefficients, FractionalPoint, Instance, Solution};
use crate::Result;

/// Per-zone attraction totals z_i = Σ_jr b_ijr y_jr + 1, always ≥ 1.
///
/// Every fractional quantity below is a function of these totals.
pub fn zone_totals(coeffs: &DerivedCoefficients, point: &FractionalPoint) -> Vec<f64> {
    let y = point.as_slice();
    (0..coeffs.num_zones())
        .map(|i| {
            let b = coeffs.zone_b(i);
            let mut s = 0.0;
            for (bv, yv) in b.iter().zip(y) {
                s += bv * yv;
            }
            s + 1.0
        })
        .collect()
}

/// Gravity patronage probabilities p_ij, row-major zone × candidate.
///
/// p_ij = (Σ_r b_ijr y_jr) / z_i; per zone the probabilities plus the
/// competitor share 1/z_i sum to one.
pub fn patronage_probabilities(coeffs: &DerivedCoefficients, point: &FractionalPoint) -> Vec<f64> {
    let z = zone_totals(coeffs, point);
    let (nc, nl) = (coeffs.num_candidates(), coeffs.num_levels());
    let y = point.as_slice();
    let mut p = Vec::with_capacity(coeffs.num_zones() * nc);
    for (i, zi) in z.iter().enumerate() {
        let b = coeffs.zone_b(i);
        for j in 0..nc {
            let mut num = 0.0;
            for r in 0..nl {
                num += b[j * nl + r] * y[j * nl + r];
            }
            p.push(num / zi);
        }
    }
    p
}

/// Captured demand fraction per zone: F_i = (z_i − 1) / z_i ∈ [0, 1).
pub fn capture_fraction(coeffs: &DerivedCoefficients, point: &FractionalPoint) -> Vec<f64> {
    zone_totals(coeffs, point)
        .into_iter()
        .map(|z| (z - 1.0) / z)
        .collect()
}

/// Lost demand fraction per zone: F̂_i = 1 − F_i = 1 / z_i ∈ (0, 1].
pub fn capture_complement(coeffs: &DerivedCoefficients, point: &FractionalPoint) -> Vec<f64> {
    zone_totals(coeffs, point)
        .into_iter()
        .map(|z| 1.0 / z)
        .collect()
}

/// Expected profit of a feasible binary assignment:
/// φ = Σ_i a_i F_i − Σ_j f_j x_j − Σ_jr c_jr y_jr.
pub fn profit(
    instance: &Instance,
    coeffs: &DerivedCoefficients,
    solution: &Solution,
) -> Result<f64> {
    if solution.num_candidates() != instance.num_candidates() {
        return Err(CfldError::InfeasibleSolution(format!(
            "solution covers {} candidates, instance has {}",
            solution.num_candidates(),
            instance.num_candidates()
        )));
    }
    for (j, choice) in solution.choices().iter().enumerate() {
        if let Some(r) = choice {
            if *r >= instance.num_levels() {
                return Err(CfldError::InfeasibleSolution(format!(
                    "candidate {j} uses level {r}, instance has {} levels",
                    instance.num_levels()
                )));
            }
        }
    }
    let point = solution.to_point(instance.num_levels());
    let captures = capture_fraction(coeffs, &point);
    let revenue: f64 = captures
        .iter()
        .enumerate()
        .map(|(i, f)| instance.buying_power(i) * f)
        .sum();
    let costs: f64 = solution
        .choices()
        .iter()
        .enumerate()
        .map(|(j, choice)| match choice {
            Some(r) => instance.fixed_cost(j) + instance.level_cost(j, *r),
            None => 0.0,
        })
        .sum();
    Ok(revenue - costs)
}

/// Minimization-form objective over the relaxed region:
/// Σ_j f_j s_j + Σ_jr c_jr y_jr + Σ_i a_i / z_i, with s_j = Σ_r y_jr.
///
/// At binary points this equals Σ_i a_i − profit.
pub fn min_objective(
    instance: &Instance,
    coeffs: &DerivedCoefficients,
    point: &FractionalPoint,
) -> f64 {
    let nl = instance.num_levels();
    let mut costs = 0.0;
    for j in 0..instance.num_candidates() {
        let mut sum_j = 0.0;
        for r in 0..nl {
            let yv = point.y(j, r);
            sum_j += yv;
            costs += instance.level_cost(j, r) * yv;
        }
        costs += instance.fixed_cost(j) * sum_j;
    }
    let lost: f64 = zone_totals(coeffs, point)
        .iter()
        .enumerate()
        .map(|(i, z)| instance.buying_power(i) / z)
        .sum();
    costs + lost
}

/// [`min_objective`] of a binary solution.
pub fn min_objective_solution(
    instance: &Instance,
    coeffs: &DerivedCoefficients,
    solution: &Solution,
) -> Result<f64> {
    if solution.num_candidates() != instance.num_candidates() {
        return Err(CfldError::InfeasibleSolution(format!(
            "solution covers {} candidates, instance has {}",
            solution.num_candidates(),
            instance.num_candidates()
        )));
    }
    Ok(min_objective(
        instance,
        coeffs,
        &solution.to_point(instance.num_levels()),
    ))
}

/// Gradient of the lost-demand fractions: ∂F̂_i/∂y_jr = −b_ijr / z_i²,
/// flattened zone × candidate × level. Every entry is strictly negative.
pub fn gradient_fhat(coeffs: &DerivedCoefficients, point: &FractionalPoint) -> Vec<f64> {
    let z = zone_totals(coeffs, point);
    let stride = coeffs.num_candidates() * coeffs.num_levels();
    let mut g = Vec::with_capacity(coeffs.num_zones() * stride);
    for (i, zi) in z.iter().enumerate() {
        let inv_sq = 1.0 / (zi * zi);
        for bv in coeffs.zone_b(i) {
            g.push(-bv * inv_sq);
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::test_fixtures::{random_instance, random_point, tiny_symmetric_instance};
    use crate::model::DerivedCoefficients;

    fn tiny() -> (Instance, DerivedCoefficients) {
        let inst = tiny_symmetric_instance();
        let coeffs = DerivedCoefficients::from_instance(&inst);
        (inst, coeffs)
    }

    #[test]
    fn all_closed_probabilities_are_zero() {
        let (inst, coeffs) = tiny();
        let p = patronage_probabilities(&coeffs, &FractionalPoint::zeros(1, 1));
        assert_eq!(p, vec![0.0]);
        let f = capture_fraction(&coeffs, &FractionalPoint::zeros(1, 1));
        assert_eq!(f, vec![0.0]);
        let fhat = capture_complement(&coeffs, &FractionalPoint::zeros(1, 1));
        assert_eq!(fhat, vec![1.0]);
        let _ = inst;
    }

    #[test]
    fn single_open_facility_splits_evenly_with_competitor() {
        // b_111 = 1 means the new facility matches the competitor utility,
        // so the zone splits 50/50.
        let (inst, coeffs) = tiny();
        let sol = Solution::from_choices(vec![Some(0)]);
        let point = sol.to_point(1);
        assert_eq!(patronage_probabilities(&coeffs, &point), vec![0.5]);
        assert_eq!(capture_fraction(&coeffs, &point), vec![0.5]);
        assert_eq!(profit(&inst, &coeffs, &sol).unwrap(), 500.0);
    }

    #[test]
    fn normalization_holds_per_zone() {
        let inst = random_instance(3, 6, 4, 3, 3);
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let point = random_point(17, 4, 3);
        let p = patronage_probabilities(&coeffs, &point);
        let fhat = capture_complement(&coeffs, &point);
        let f = capture_fraction(&coeffs, &point);
        for i in 0..6 {
            let row_sum: f64 = p[i * 4..(i + 1) * 4].iter().sum();
            assert!((row_sum + fhat[i] - 1.0).abs() < 1e-12);
            assert!((f[i] + fhat[i] - 1.0).abs() < 1e-12);
            assert!((f[i] - row_sum).abs() < 1e-12);
        }
    }

    #[test]
    fn profit_all_closed_is_zero() {
        let (inst, coeffs) = tiny();
        assert_eq!(profit(&inst, &coeffs, &Solution::closed(1)).unwrap(), 0.0);
    }

    #[test]
    fn min_objective_all_closed_is_total_buying_power() {
        let (inst, coeffs) = tiny();
        let m = min_objective(&inst, &coeffs, &FractionalPoint::zeros(1, 1));
        assert_eq!(m, 1000.0);
        // The φ = 500 point has min-form value Σa − 500 = 500.
        let sol = Solution::from_choices(vec![Some(0)]);
        assert_eq!(
            min_objective_solution(&inst, &coeffs, &sol).unwrap(),
            500.0
        );
    }

    #[test]
    fn profit_rejects_wrong_width() {
        let (inst, coeffs) = tiny();
        let err = profit(&inst, &coeffs, &Solution::closed(2)).unwrap_err();
        assert!(matches!(err, CfldError::InfeasibleSolution(_)));
    }

    #[test]
    fn objective_duality_on_random_feasible_solutions() {
        let inst = random_instance(5, 7, 4, 2, 3);
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let total = inst.total_buying_power();
        let mut rng = crate::instancegen::SplitMix64::new(99);
        for _ in 0..50 {
            let choices: Vec<Option<usize>> = (0..4)
                .map(|_| {
                    let d = (rng.next_u64() % 4) as usize;
                    if d == 0 {
                        None
                    } else {
                        Some(d - 1)
                    }
                })
                .collect();
            let sol = Solution::from_choices(choices);
            let phi = profit(&inst, &coeffs, &sol).unwrap();
            let m = min_objective_solution(&inst, &coeffs, &sol).unwrap();
            assert!(
                (phi + m - total).abs() < 1e-9,
                "profit {phi} + min {m} != total {total}"
            );
        }
    }

    #[test]
    fn gradient_at_zero_is_minus_b() {
        let (inst, coeffs) = tiny();
        let g = gradient_fhat(&coeffs, &FractionalPoint::zeros(1, 1));
        assert_eq!(g, vec![-1.0]);
        let _ = inst;
    }

    #[test]
    fn gradient_at_open_tiny_point() {
        let (_, coeffs) = tiny();
        let sol = Solution::from_choices(vec![Some(0)]);
        let g = gradient_fhat(&coeffs, &sol.to_point(1));
        assert_eq!(g, vec![-0.25]);
    }

    #[test]
    fn gradient_matches_central_finite_differences() {
        let inst = random_instance(21, 5, 3, 2, 2);
        let coeffs = DerivedCoefficients::from_instance(&inst);
        let point = random_point(33, 3, 2);
        let g = gradient_fhat(&coeffs, &point);
        let h = 1e-6;
        for j in 0..3 {
            for r in 0..2 {
                let mut up = point.as_slice().to_vec();
                let mut dn = up.clone();
                up[j * 2 + r] += h;
                dn[j * 2 + r] -= h;
                let fu = capture_complement(&coeffs, &FractionalPoint::from_raw(up, 3, 2));
                let fd = capture_complement(&coeffs, &FractionalPoint::from_raw(dn, 3, 2));
                for i in 0..5 {
                    let fd_approx = (fu[i] - fd[i]) / (2.0 * h);
                    let exact = g[(i * 3 + j) * 2 + r];
                    let denom = exact.abs().max(1e-12);
                    assert!(
                        ((fd_approx - exact) / denom).abs() < 1e-5,
                        "zone {i} var ({j},{r}): fd {fd_approx} vs exact {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn capture_is_midpoint_concave_and_monotone() {
        let inst = random_instance(8, 4, 5, 2, 3);
        let coeffs = DerivedCoefficients::from_instance(&inst);
        for trial in 0..50u64 {
            let p1 = random_point(1000 + trial, 5, 3);
            let p2 = random_point(2000 + trial, 5, 3);
            let mid: Vec<f64> = p1
                .as_slice()
                .iter()
                .zip(p2.as_slice())
                .map(|(a, b)| 0.5 * (a + b))
                .collect();
            let f1 = capture_fraction(&coeffs, &p1);
            let f2 = capture_fraction(&coeffs, &p2);
            let fm = capture_fraction(&coeffs, &FractionalPoint::from_raw(mid, 5, 3));
            for i in 0..4 {
                assert!(fm[i] >= 0.5 * (f1[i] + f2[i]) - 1e-12);
            }

            // Raising a single coordinate never decreases any capture.
            let mut bumped = p1.as_slice().to_vec();
            let j = (trial % 5) as usize;
            let r = (trial % 3) as usize;
            let s = p1.facility_sum(j);
            let room = (1.0 - s).max(0.0);
            bumped[j * 3 + r] += 0.5 * room;
            let fb = capture_fraction(&coeffs, &FractionalPoint::from_raw(bumped, 5, 3));
            for i in 0..4 {
                assert!(fb[i] >= f1[i] - 1e-15);
            }
        }
    }
}
