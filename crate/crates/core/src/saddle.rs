//! The per-round min-max problem over the simplex and its linear-programming
//! reduction.
//!
//! For weights `p` in the simplex, the inner supremum over admissible loss
//! vectors has the closed form
//!
//! ```text
//!   F(p) = <p, c> + max_i ( a[i] - 2 p[i] c[i] )
//! ```
//!
//! and minimizing `F` is the epigraph linear program
//!
//! ```text
//!   minimize <p, c> + s   subject to   s >= a[i] - 2 c[i] p[i],  p in simplex.
//! ```
//!
//! For fixed epigraph level `s` the cheapest feasible weights are forced:
//! `p[i] >= max(0, (a[i] - s) / (2 c[i]))`, with any leftover mass placed on
//! the cheapest coordinate. The objective along that path is piecewise linear
//! and convex in `s`, so scanning its breakpoints solves the program exactly;
//! no iteration budget is needed.

use crate::error::{CoreError, Result};
use crate::scale::{ScaleProfile, SimplexWeights};

/// Coefficients of one round's min-max problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleProblem {
    c: Vec<f64>,
    a: Vec<f64>,
}

impl SaddleProblem {
    /// Build directly from coefficient vectors. `c` entries must be >= 1.
    pub fn new(c: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        if c.len() != a.len() {
            return Err(CoreError::DimensionMismatch {
                expected: c.len(),
                got: a.len(),
            });
        }
        if c.is_empty() {
            return Err(CoreError::InvalidProfile("empty saddle problem".into()));
        }
        for (i, &ci) in c.iter().enumerate() {
            if !ci.is_finite() || ci < 1.0 {
                return Err(CoreError::InvalidProfile(format!(
                    "saddle scale c[{i}] = {ci} must be >= 1"
                )));
            }
        }
        for (i, &ai) in a.iter().enumerate() {
            if !ai.is_finite() {
                return Err(CoreError::NonFinite(format!("saddle coefficient a[{i}] = {ai}")));
            }
        }
        Ok(SaddleProblem { c, a })
    }

    pub fn num_experts(&self) -> usize {
        self.c.len()
    }

    pub fn scales(&self) -> &[f64] {
        &self.c
    }

    pub fn offsets(&self) -> &[f64] {
        &self.a
    }
}

/// Weights returned by a solver together with the achieved value and a
/// certified additive optimality gap.
#[derive(Debug, Clone)]
pub struct SaddleSolution {
    pub weights: SimplexWeights,
    pub value: f64,
    pub accuracy: f64,
}

/// Assemble `a[i] = c_i - G_{t-1}(i) + 4 * tail_i * c_i - B(i)`.
pub fn build_saddle_coefficients(
    cumulative_losses: &[f64],
    tails: &[f64],
    profile: &ScaleProfile,
    bounds: &[f64],
) -> Result<SaddleProblem> {
    let n = profile.num_experts();
    for len in [cumulative_losses.len(), tails.len(), bounds.len()] {
        if len != n {
            return Err(CoreError::DimensionMismatch {
                expected: n,
                got: len,
            });
        }
    }
    let c = profile.scales().to_vec();
    let a: Vec<f64> = (0..n)
        .map(|i| c[i] - cumulative_losses[i] + 4.0 * tails[i] * c[i] - bounds[i])
        .collect();
    SaddleProblem::new(c, a)
}

/// The exact inner supremum over the admissible loss vector for fixed `p`.
pub fn closed_form_value(problem: &SaddleProblem, weights: &SimplexWeights) -> f64 {
    let p = weights.weights();
    let dot: f64 = p.iter().zip(&problem.c).map(|(pi, ci)| pi * ci).sum();
    let worst = problem
        .a
        .iter()
        .zip(&problem.c)
        .zip(p)
        .map(|((ai, ci), pi)| ai - 2.0 * pi * ci)
        .fold(f64::NEG_INFINITY, f64::max);
    dot + worst
}

/// Objective of the epigraph path at level `s`: forced mass below, slack on
/// the cheapest coordinate.
fn path_objective(problem: &SaddleProblem, cheapest: f64, s: f64) -> (f64, f64) {
    let mut half_sum = 0.0; // sum over active of (a_i - s) / 2
    let mut mass = 0.0; // forced simplex mass at this level
    for (&ai, &ci) in problem.a.iter().zip(&problem.c) {
        if ai > s {
            half_sum += (ai - s) / 2.0;
            mass += (ai - s) / (2.0 * ci);
        }
    }
    let slack = (1.0 - mass).max(0.0);
    (s + half_sum + cheapest * slack, mass)
}

/// Solve the round's linear program to additive accuracy `epsilon`.
///
/// The parametric scan is exact up to floating arithmetic, so the returned
/// gap certificate `accuracy = epsilon` is conservative. Ties between
/// breakpoints resolve toward the larger epigraph level, which concentrates
/// the weights on the smallest support; leftover mass goes to the cheapest
/// (then lowest-indexed) coordinate.
pub fn solve(problem: &SaddleProblem, epsilon: f64) -> Result<SaddleSolution> {
    if !(epsilon > 0.0) {
        return Err(CoreError::Config(format!(
            "solver accuracy epsilon = {epsilon} must be positive"
        )));
    }
    let n = problem.num_experts();
    let cheapest_idx = problem
        .c
        .iter()
        .enumerate()
        .fold(0usize, |best, (i, &ci)| {
            if ci < problem.c[best] {
                i
            } else {
                best
            }
        });
    let cheapest = problem.c[cheapest_idx];

    // Feasibility floor: level where the forced mass fills the simplex.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| problem.a[j].partial_cmp(&problem.a[i]).unwrap());
    let mut sum_ratio = 0.0; // sum a_i / (2 c_i) over the active prefix
    let mut sum_inv = 0.0; // sum 1 / (2 c_i) over the active prefix
    let mut floor = f64::NEG_INFINITY;
    for (rank, &idx) in order.iter().enumerate() {
        sum_ratio += problem.a[idx] / (2.0 * problem.c[idx]);
        sum_inv += 1.0 / (2.0 * problem.c[idx]);
        let candidate = (sum_ratio - 1.0) / sum_inv;
        let below_ok = candidate <= problem.a[idx] + 1e-9 * (1.0 + problem.a[idx].abs());
        let above_ok = match order.get(rank + 1) {
            Some(&next) => candidate >= problem.a[next] - 1e-9 * (1.0 + problem.a[next].abs()),
            None => true,
        };
        if below_ok && above_ok {
            floor = candidate;
            break;
        }
    }
    if !floor.is_finite() {
        return Err(CoreError::NonFinite(
            "no feasible epigraph level found".into(),
        ));
    }

    // Scan the convex piecewise-linear objective over its breakpoints.
    let mut candidates: Vec<f64> = problem.a.iter().cloned().filter(|&ai| ai > floor).collect();
    candidates.push(floor);
    let mut best: Option<(f64, f64)> = None; // (objective, level)
    for &s in &candidates {
        let (obj, _) = path_objective(problem, cheapest, s);
        let replace = match best {
            None => true,
            Some((best_obj, best_s)) => {
                let tol = 1e-12 * (1.0 + best_obj.abs());
                obj < best_obj - tol || (obj <= best_obj + tol && s > best_s)
            }
        };
        if replace {
            best = Some((obj, s));
        }
    }
    let (_, best_s) = best.expect("candidate list is non-empty");

    // Materialize the weights at the chosen level.
    let mut p = vec![0.0; n];
    let mut mass = 0.0;
    for ((pi, &ai), &ci) in p.iter_mut().zip(&problem.a).zip(&problem.c) {
        if ai > best_s {
            *pi = (ai - best_s) / (2.0 * ci);
            mass += *pi;
        }
    }
    p[cheapest_idx] += (1.0 - mass).max(0.0);
    let total: f64 = p.iter().sum();
    for pi in p.iter_mut() {
        *pi /= total;
    }
    let weights = SimplexWeights::new(p)?;
    let value = closed_form_value(problem, &weights);
    Ok(SaddleSolution {
        weights,
        value,
        accuracy: epsilon,
    })
}

/// Exact optimum for instances with at most 6 experts, by enumerating the
/// basic solutions of the epigraph linear program. Ties between optimal
/// vertices resolve toward the lexicographically smallest support.
///
/// Two vertex families cover every basic solution:
/// - partition vertices: each coordinate either sits on its epigraph
///   constraint or at zero, with the level `s` pinned by the simplex sum;
/// - breakpoint vertices: the level coincides with some `a[j]` whose
///   coordinate is both zero and tight, a tight set rides the constraints,
///   and one free coordinate absorbs the leftover simplex mass.
///
/// Every candidate is scored by [`closed_form_value`] directly, so an
/// infeasible-for-`s` candidate can only overestimate and never corrupts the
/// minimum. This is the test oracle for [`solve`]; it shares no code with
/// the parametric scan.
pub fn solve_exact_small(problem: &SaddleProblem) -> Result<SaddleSolution> {
    let n = problem.num_experts();
    if n > 6 {
        return Err(CoreError::ExactSolverSize { n });
    }
    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    let mut consider = |candidate: Vec<f64>| {
        if candidate.iter().any(|&pi| pi < -1e-9) {
            return;
        }
        let mut p: Vec<f64> = candidate.iter().map(|&pi| pi.max(0.0)).collect();
        let total: f64 = p.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            return;
        }
        for pi in p.iter_mut() {
            *pi /= total;
        }
        let weights = match SimplexWeights::new(p.clone()) {
            Ok(w) => w,
            Err(_) => return,
        };
        let value = closed_form_value(problem, &weights);
        let support: Vec<usize> = (0..n).filter(|&i| p[i] > 1e-12).collect();
        let replace = match &best {
            None => true,
            Some((best_value, best_support, _)) => {
                let tol = 1e-9 * (1.0 + best_value.abs());
                value < best_value - tol
                    || ((value - best_value).abs() <= tol && support < *best_support)
            }
        };
        if replace {
            best = Some((value, support, p));
        }
    };

    let tight_mass = |mask: u32, s: f64| -> Vec<f64> {
        let mut p = vec![0.0; n];
        for (i, pi) in p.iter_mut().enumerate() {
            if mask & (1 << i) != 0 {
                *pi = (problem.a[i] - s) / (2.0 * problem.c[i]);
            }
        }
        p
    };

    // Partition vertices: level from the simplex equation over the tight set.
    for mask in 1u32..(1 << n) {
        let mut sum_ratio = 0.0;
        let mut sum_inv = 0.0;
        for i in 0..n {
            if mask & (1 << i) != 0 {
                sum_ratio += problem.a[i] / (2.0 * problem.c[i]);
                sum_inv += 1.0 / (2.0 * problem.c[i]);
            }
        }
        let s = (sum_ratio - 1.0) / sum_inv;
        consider(tight_mass(mask, s));
    }

    // Breakpoint vertices: level s = a[j], slack on a free coordinate m.
    for j in 0..n {
        let s = problem.a[j];
        for mask in 0u32..(1 << n) {
            if mask & (1 << j) != 0 {
                continue;
            }
            let base = tight_mass(mask, s);
            if base.iter().any(|&pi| pi < -1e-9) {
                continue;
            }
            let residual = 1.0 - base.iter().map(|&pi| pi.max(0.0)).sum::<f64>();
            if residual < -1e-9 {
                continue;
            }
            if residual <= 1e-12 {
                consider(base);
                continue;
            }
            for m in 0..n {
                if m == j || mask & (1 << m) != 0 {
                    continue;
                }
                let mut p = base.clone();
                p[m] += residual;
                consider(p);
            }
        }
    }

    let (value, _, p) = best.ok_or_else(|| {
        CoreError::NonFinite("vertex enumeration found no feasible basis".into())
    })?;
    Ok(SaddleSolution {
        weights: SimplexWeights::new(p)?,
        value,
        accuracy: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn problem(c: &[f64], a: &[f64]) -> SaddleProblem {
        SaddleProblem::new(c.to_vec(), a.to_vec()).unwrap()
    }

    fn uniform(n: usize) -> Vec<f64> {
        vec![1.0 / n as f64; n]
    }

    #[test]
    fn coefficient_construction() {
        let profile = ScaleProfile::with_uniform_prior(vec![1.0, 1.0]).unwrap();
        let b = 0.25;
        let p = build_saddle_coefficients(&[0.0, 0.0], &[0.0, 0.0], &profile, &[b, b]).unwrap();
        assert_eq!(p.offsets(), &[1.0 - b, 1.0 - b]);

        let p = build_saddle_coefficients(&[5.0, -5.0], &[0.0, 0.0], &profile, &[0.0, 0.0]).unwrap();
        assert_eq!(p.offsets(), &[-4.0, 6.0]);

        let profile = ScaleProfile::with_uniform_prior(vec![3.0]).unwrap();
        let p = build_saddle_coefficients(&[0.0], &[2.0], &profile, &[1.0]).unwrap();
        assert_eq!(p.offsets(), &[26.0]);

        let err = build_saddle_coefficients(&[0.0], &[0.0, 0.0], &profile, &[0.0]);
        assert!(matches!(err, Err(CoreError::DimensionMismatch { .. })));
    }

    #[test]
    fn closed_form_examples() {
        let w = SimplexWeights::new(uniform(2)).unwrap();
        assert_eq!(closed_form_value(&problem(&[1.0, 1.0], &[0.0, 0.0]), &w), 0.0);

        let w = SimplexWeights::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(closed_form_value(&problem(&[1.0, 1.0], &[10.0, 0.0]), &w), 9.0);

        let w = SimplexWeights::new(vec![1.0]).unwrap();
        assert_eq!(closed_form_value(&problem(&[2.0], &[5.0]), &w), 3.0);
    }

    #[test]
    fn solve_single_expert() {
        let p = problem(&[2.0], &[5.0]);
        let sol = solve(&p, 1e-6).unwrap();
        assert_eq!(sol.weights.weights(), &[1.0]);
        // value = c + a - 2c
        assert!((sol.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn solve_symmetric_instance() {
        let p = problem(&[1.0, 1.0], &[0.0, 0.0]);
        let sol = solve(&p, 1e-6).unwrap();
        assert!((sol.value - 0.0).abs() < 1e-12);
        assert!((sol.weights.weights()[0] - 0.5).abs() < 1e-12);
        assert!((sol.weights.weights()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn solve_concentrates_on_leader() {
        // Hand LP: minimize 1 + max(10 - 2 p1, -2 (1 - p1)); decreasing in p1,
        // optimum at p1 = 1 with value 9.
        let p = problem(&[1.0, 1.0], &[10.0, 0.0]);
        let sol = solve(&p, 1e-6).unwrap();
        assert!((sol.value - 9.0).abs() < 1e-12);
        assert!((sol.weights.weights()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_small_matches_solve_on_named_instances() {
        for (c, a) in [
            (vec![2.0], vec![5.0]),
            (vec![1.0, 1.0], vec![0.0, 0.0]),
            (vec![1.0, 1.0], vec![10.0, 0.0]),
        ] {
            let p = SaddleProblem::new(c, a).unwrap();
            let fast = solve(&p, 1e-9).unwrap();
            let exact = solve_exact_small(&p).unwrap();
            assert!(
                (fast.value - exact.value).abs() < 1e-9,
                "{} vs {}",
                fast.value,
                exact.value
            );
        }
    }

    #[test]
    fn exact_small_rejects_large_instances() {
        let p = problem(&[1.0; 7], &[0.0; 7]);
        assert!(matches!(
            solve_exact_small(&p),
            Err(CoreError::ExactSolverSize { n: 7 })
        ));
    }

    #[test]
    fn degenerate_equal_offsets() {
        let p = problem(&[1.0, 1.0], &[4.0, 4.0]);
        let fast = solve(&p, 1e-9).unwrap();
        let exact = solve_exact_small(&p).unwrap();
        assert!((fast.value - 4.0).abs() < 1e-12);
        assert!((exact.value - 4.0).abs() < 1e-9);
    }

    /// Dense simplex sweep; brute-force reference for two experts.
    fn grid_min_value_two(problem: &SaddleProblem, points: usize) -> f64 {
        let mut best = f64::INFINITY;
        for k in 0..=points {
            let p0 = k as f64 / points as f64;
            let w = SimplexWeights::new(vec![p0, 1.0 - p0]).unwrap();
            best = best.min(closed_form_value(problem, &w));
        }
        best
    }

    #[test]
    fn grid_oracle_agreement_two_experts() {
        let p = problem(&[1.0, 3.0], &[0.0, 0.0]);
        let exact = solve_exact_small(&p).unwrap();
        let grid = grid_min_value_two(&p, 10_000);
        assert!((exact.value - grid).abs() < 1e-3);
        let fast = solve(&p, 1e-6).unwrap();
        assert!((fast.value - grid).abs() < 1e-3);
    }

    #[test]
    fn random_instances_match_exact_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..500 {
            let n = rng.random_range(1..=6);
            let c: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..10.0)).collect();
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
            let p = SaddleProblem::new(c, a).unwrap();
            let eps = 1e-6;
            let fast = solve(&p, eps).unwrap();
            let exact = solve_exact_small(&p).unwrap();
            assert!(
                (fast.value - exact.value).abs() <= eps,
                "trial {trial}: fast {} vs exact {}",
                fast.value,
                exact.value
            );
            // Lower-bound consistency: no weights beat the solver value by
            // more than the certified gap.
            assert!(closed_form_value(&p, &fast.weights) >= fast.value - eps);
            assert!(closed_form_value(&p, &exact.weights) >= fast.value - eps);
        }
    }

    #[test]
    fn constant_shift_moves_value_not_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let n = rng.random_range(1..=5);
            let c: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..8.0)).collect();
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-20.0..20.0)).collect();
            let kappa: f64 = rng.random_range(-30.0..30.0);
            let base = SaddleProblem::new(c.clone(), a.clone()).unwrap();
            let shifted =
                SaddleProblem::new(c, a.iter().map(|ai| ai + kappa).collect()).unwrap();
            let s0 = solve(&base, 1e-8).unwrap();
            let s1 = solve(&shifted, 1e-8).unwrap();
            assert!(
                ((s1.value - s0.value) - kappa).abs() < 1e-9 * (1.0 + kappa.abs()),
                "value shift mismatch"
            );
            for (w0, w1) in s0.weights.weights().iter().zip(s1.weights.weights()) {
                assert!((w0 - w1).abs() < 1e-9);
            }
        }
    }
}
