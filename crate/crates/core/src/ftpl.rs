//! Multi-scale follow-the-perturbed-leader over experts with heterogeneous
//! loss ranges.
//!
//! Each round draws a fresh tail perturbation for the remaining rounds,
//! solves the induced min-max problem over the simplex, samples an expert
//! from the resulting weights, and then folds the observed loss vector into
//! the cumulative totals. Regret to expert `i` is controlled by the penalty
//!
//! ```text
//!   B(i) = 5 c_i sqrt( n ln(4 c_i^2 n / pi_i) )
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::ledger::CompensatedSum;
use crate::saddle;
use crate::scale::{LossVector, ScaleProfile, SimplexWeights};

/// How the tail sums of future sign vectors are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PerturbationMode {
    /// Exact sums of `n - t` independent uniform signs per coordinate.
    RademacherExact,
    /// One Gaussian draw with variance `n - t` per coordinate; avoids the
    /// O(n) per-round sampling cost at matching first and second moments.
    GaussianTail,
}

/// The vector `z` standing in for `sum_{s=t+1}^{n} sigma_s`, one entry per
/// expert.
#[derive(Debug, Clone, PartialEq)]
pub struct TailPerturbation {
    pub z: Vec<f64>,
}

/// The per-expert comparator penalty `5 c sqrt(n ln(4 c^2 n / pi))`.
///
/// With `c >= 1`, `n >= 1` and `pi <= 1` the log argument is at least 4, so
/// the value is always real and positive.
pub fn compute_bound(c_i: f64, n: usize, pi_i: f64) -> f64 {
    let arg = 4.0 * c_i * c_i * (n as f64) / pi_i;
    5.0 * c_i * ((n as f64) * arg.ln()).sqrt()
}

/// Distribution, sampled expert, and audit data for one round.
#[derive(Debug, Clone)]
pub struct FtplDecision {
    pub round: usize,
    pub weights: SimplexWeights,
    pub chosen: usize,
    pub perturbation: TailPerturbation,
    pub saddle_value: f64,
}

/// MultiScaleFTPL state for a fixed horizon.
#[derive(Debug, Clone)]
pub struct MultiScaleFtpl {
    profile: ScaleProfile,
    bounds: Vec<f64>,
    cumulative: Vec<CompensatedSum>,
    observed_rounds: usize,
    horizon: usize,
    mode: PerturbationMode,
    seed: u64,
    epsilon: f64,
}

impl MultiScaleFtpl {
    /// Build the state; the bounds `B(i)` are precomputed here and never
    /// mutated. Fails if `4 c_i^2 n / pi_i` overflows.
    pub fn new(
        profile: ScaleProfile,
        horizon: usize,
        mode: PerturbationMode,
        seed: u64,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(CoreError::Config("horizon must be at least 1".into()));
        }
        let n = profile.num_experts();
        let mut bounds = Vec::with_capacity(n);
        for i in 0..n {
            let c = profile.scales()[i];
            let pi = profile.prior()[i];
            let arg = 4.0 * c * c * (horizon as f64) / pi;
            if !arg.is_finite() {
                return Err(CoreError::Sizing(format!(
                    "4 c^2 n / pi overflows for expert {i} (c = {c}, pi = {pi})"
                )));
            }
            let b = compute_bound(c, horizon, pi);
            if !b.is_finite() {
                return Err(CoreError::Sizing(format!("bound B({i}) is not finite")));
            }
            bounds.push(b);
        }
        let epsilon = default_epsilon(horizon, profile.max_scale());
        Ok(MultiScaleFtpl {
            profile,
            bounds,
            cumulative: vec![CompensatedSum::new(); n],
            observed_rounds: 0,
            horizon,
            mode,
            seed,
            epsilon,
        })
    }

    pub fn profile(&self) -> &ScaleProfile {
        &self.profile
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn mode(&self) -> PerturbationMode {
        self.mode
    }

    /// Index of the round the next `step` plays, 1-based.
    pub fn current_round(&self) -> usize {
        self.observed_rounds + 1
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Override the solver accuracy (callers may tighten the default).
    pub fn set_epsilon(&mut self, epsilon: f64) -> Result<()> {
        if !(epsilon > 0.0) {
            return Err(CoreError::Config("epsilon must be positive".into()));
        }
        self.epsilon = epsilon;
        Ok(())
    }

    /// Snapshot of the cumulative expert losses `G`.
    pub fn cumulative_losses(&self) -> Vec<f64> {
        self.cumulative.iter().map(|s| s.total()).collect()
    }

    /// RNG streams are split per round index and purpose, so a change in one
    /// consumer (solver, mode) never perturbs another's draws.
    fn round_rng(&self, round: usize, purpose: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(2 * round as u64 + purpose);
        rng
    }

    /// Draw the tail perturbation for the current round. At `t = n` the tail
    /// is empty and the zero vector is returned in both modes.
    pub fn draw_tail_perturbation(&self) -> TailPerturbation {
        let t = self.current_round();
        let remaining = self.horizon.saturating_sub(t);
        let n_experts = self.profile.num_experts();
        if remaining == 0 {
            return TailPerturbation {
                z: vec![0.0; n_experts],
            };
        }
        let mut rng = self.round_rng(t, 0);
        let z = match self.mode {
            PerturbationMode::RademacherExact => sample_sign_sums(&mut rng, remaining, n_experts),
            PerturbationMode::GaussianTail => {
                let sd = (remaining as f64).sqrt();
                (0..n_experts)
                    .map(|_| {
                        let g: f64 = StandardNormal.sample(&mut rng);
                        sd * g
                    })
                    .collect()
            }
        };
        TailPerturbation { z }
    }

    /// Play one round: perturb, solve the saddle problem, sample an expert.
    ///
    /// Does not advance the round counter; [`observe`](Self::observe) does.
    /// Identical state therefore reproduces the identical decision.
    pub fn step(&self) -> Result<FtplDecision> {
        let round = self.current_round();
        if round > self.horizon {
            return Err(CoreError::Config(format!(
                "horizon {} already exhausted",
                self.horizon
            )));
        }
        let perturbation = self.draw_tail_perturbation();
        let problem = saddle::build_saddle_coefficients(
            &self.cumulative_losses(),
            &perturbation.z,
            &self.profile,
            &self.bounds,
        )
        .map_err(|e| e.in_round(round))?;
        let solution =
            saddle::solve(&problem, self.epsilon).map_err(|e| e.in_round(round))?;
        let u: f64 = self.round_rng(round, 1).random();
        let chosen = solution.weights.sample_inverse_cdf(u);
        Ok(FtplDecision {
            round,
            weights: solution.weights,
            chosen,
            perturbation,
            saddle_value: solution.value,
        })
    }

    /// Fold an observed loss vector into the cumulative totals and advance
    /// the round.
    pub fn observe(&mut self, g: &LossVector) -> Result<()> {
        self.profile.check_loss(g.values())?;
        if self.observed_rounds >= self.horizon {
            return Err(CoreError::Config(format!(
                "horizon {} already exhausted",
                self.horizon
            )));
        }
        for (acc, &gi) in self.cumulative.iter_mut().zip(g.values()) {
            acc.add(gi);
        }
        self.observed_rounds += 1;
        Ok(())
    }
}

/// Default solver accuracy `epsilon = 1 / (sqrt(n) max_i c_i)`: the
/// per-round gap stays an order below the sqrt(n)-scale regret.
pub fn default_epsilon(horizon: usize, max_scale: f64) -> f64 {
    1.0 / ((horizon as f64).sqrt() * max_scale)
}

/// Sum of `count` independent uniform signs per coordinate, drawn through
/// the binomial transform `2 Bin(count, 1/2) - count` (identical in
/// distribution, O(1) per coordinate).
fn sample_sign_sums(rng: &mut ChaCha8Rng, count: usize, coords: usize) -> Vec<f64> {
    let binom = Binomial::new(count as u64, 0.5).expect("valid binomial parameters");
    (0..coords)
        .map(|_| {
            let heads = binom.sample(rng) as f64;
            2.0 * heads - count as f64
        })
        .collect()
}

/// Monte Carlo estimate of the relaxation
/// `E_sigma sup_i [ -G[i] + 4 z[i] c_i - B(i) ]` with `z` the Rademacher
/// tail sums over `remaining` rounds. With `remaining = 0` the value is
/// exact and no sampling happens.
pub fn relaxation_estimate(
    cumulative_losses: &[f64],
    profile: &ScaleProfile,
    bounds: &[f64],
    remaining: usize,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> f64 {
    assert!(samples >= 1, "at least one Monte Carlo sample required");
    let n = profile.num_experts();
    assert_eq!(cumulative_losses.len(), n);
    assert_eq!(bounds.len(), n);
    if remaining == 0 {
        return (0..n)
            .map(|i| -cumulative_losses[i] - bounds[i])
            .fold(f64::NEG_INFINITY, f64::max);
    }
    let binom = Binomial::new(remaining as u64, 0.5).expect("valid binomial parameters");
    let mut acc = CompensatedSum::new();
    for _ in 0..samples {
        let mut sup = f64::NEG_INFINITY;
        for i in 0..n {
            let z = 2.0 * binom.sample(rng) as f64 - remaining as f64;
            let v = -cumulative_losses[i] + 4.0 * z * profile.scales()[i] - bounds[i];
            sup = sup.max(v);
        }
        acc.add(sup);
    }
    acc.total() / samples as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_expert_state(mode: PerturbationMode, seed: u64) -> MultiScaleFtpl {
        let profile = ScaleProfile::with_uniform_prior(vec![1.0, 1.0]).unwrap();
        MultiScaleFtpl::new(profile, 8, mode, seed).unwrap()
    }

    #[test]
    fn bound_examples() {
        // High-precision evaluations of the closed form.
        assert!((compute_bound(1.0, 1, 1.0) - 5.887050112577373).abs() < 1e-12);
        assert!((compute_bound(1.0, 100, 0.5) - 129.27308041185457).abs() < 1e-10);
    }

    #[test]
    fn bound_is_increasing_in_scale() {
        let mut prev = 0.0;
        for k in 1..50 {
            let c = 1.0 + k as f64 * 0.5;
            let b = compute_bound(c, 1, 1.0);
            assert!(b > prev);
            prev = b;
        }
    }

    #[test]
    fn tail_is_zero_at_final_round() {
        for mode in [PerturbationMode::RademacherExact, PerturbationMode::GaussianTail] {
            let profile = ScaleProfile::with_uniform_prior(vec![1.0]).unwrap();
            let mut state = MultiScaleFtpl::new(profile.clone(), 3, mode, 5).unwrap();
            for _ in 0..2 {
                let g = LossVector::checked(vec![0.5], &profile).unwrap();
                state.observe(&g).unwrap();
            }
            assert_eq!(state.current_round(), 3);
            assert_eq!(state.draw_tail_perturbation().z, vec![0.0]);
        }
    }

    #[test]
    fn single_sign_tail_is_plus_minus_one() {
        // n - t = 1: each coordinate is a single uniform sign.
        let profile = ScaleProfile::with_uniform_prior(vec![1.0, 1.0]).unwrap();
        for seed in 0..20 {
            let mut state =
                MultiScaleFtpl::new(profile.clone(), 2, PerturbationMode::RademacherExact, seed)
                    .unwrap();
            let g = LossVector::checked(vec![0.0, 0.0], &profile).unwrap();
            let _ = g;
            let tail = state.draw_tail_perturbation();
            for z in tail.z {
                assert!(z == 1.0 || z == -1.0);
            }
            state
                .observe(&LossVector::checked(vec![0.0, 0.0], &profile).unwrap())
                .unwrap();
        }
    }

    #[test]
    fn rademacher_tail_variance() {
        // Tail of 4 signs: variance 4 within 0.1 at 1e5 draws.
        let profile = ScaleProfile::with_uniform_prior(vec![1.0]).unwrap();
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        let draws = 100_000;
        for seed in 0..draws {
            let state = MultiScaleFtpl::new(
                profile.clone(),
                5,
                PerturbationMode::RademacherExact,
                seed,
            )
            .unwrap();
            let z = state.draw_tail_perturbation().z[0];
            assert!(z.abs() <= 4.0);
            assert_eq!((z as i64 - 4).rem_euclid(2), 0, "parity must match n - t");
            sum += z;
            sumsq += z * z;
        }
        let mean = sum / draws as f64;
        let var = sumsq / draws as f64 - mean * mean;
        assert!((var - 4.0).abs() < 0.1, "sample variance {var}");
    }

    #[test]
    fn single_expert_always_plays_it() {
        let profile = ScaleProfile::with_uniform_prior(vec![3.0]).unwrap();
        let state =
            MultiScaleFtpl::new(profile, 5, PerturbationMode::GaussianTail, 17).unwrap();
        let d = state.step().unwrap();
        assert_eq!(d.chosen, 0);
        assert_eq!(d.weights.weights(), &[1.0]);
    }

    #[test]
    fn symmetric_state_splits_evenly() {
        // At t = n the tail is deterministically zero; with equal scales,
        // equal prior and zero cumulative losses the saddle solution is the
        // uniform distribution.
        let profile = ScaleProfile::with_uniform_prior(vec![1.0, 1.0]).unwrap();
        let mut state =
            MultiScaleFtpl::new(profile.clone(), 1, PerturbationMode::RademacherExact, 2).unwrap();
        let d = state.step().unwrap();
        assert!((d.weights.weights()[0] - 0.5).abs() < 1e-12);
        assert!((d.weights.weights()[1] - 0.5).abs() < 1e-12);
        state
            .observe(&LossVector::checked(vec![1.0, -1.0], &profile).unwrap())
            .unwrap();
    }

    #[test]
    fn lagging_expert_gets_the_weight() {
        // G = (5, -5), z = 0, B = 0 gives a = (-4, 6); the exact solver
        // concentrates every weight on the low-loss expert.
        let problem = saddle::build_saddle_coefficients(
            &[5.0, -5.0],
            &[0.0, 0.0],
            &ScaleProfile::with_uniform_prior(vec![1.0, 1.0]).unwrap(),
            &[0.0, 0.0],
        )
        .unwrap();
        assert_eq!(problem.offsets(), &[-4.0, 6.0]);
        let exact = saddle::solve_exact_small(&problem).unwrap();
        assert!((exact.weights.weights()[1] - 1.0).abs() < 1e-9);
        let fast = saddle::solve(&problem, 1e-9).unwrap();
        assert!((fast.weights.weights()[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn observe_accumulates_and_cancels() {
        let profile = ScaleProfile::with_uniform_prior(vec![1.0, 2.0]).unwrap();
        let mut state =
            MultiScaleFtpl::new(profile.clone(), 10, PerturbationMode::GaussianTail, 1).unwrap();
        let zero = LossVector::checked(vec![0.0, 0.0], &profile).unwrap();
        state.observe(&zero).unwrap();
        assert_eq!(state.cumulative_losses(), vec![0.0, 0.0]);
        assert_eq!(state.current_round(), 2);

        let g = LossVector::checked(vec![0.5, -1.5], &profile).unwrap();
        let neg = LossVector::checked(vec![-0.5, 1.5], &profile).unwrap();
        state.observe(&g).unwrap();
        state.observe(&neg).unwrap();
        assert_eq!(state.cumulative_losses(), vec![0.0, 0.0]);
    }

    #[test]
    fn repeated_max_scale_accumulates_exactly() {
        let c = vec![1.0, 2.5];
        let profile = ScaleProfile::with_uniform_prior(c.clone()).unwrap();
        let n = 200;
        let mut state =
            MultiScaleFtpl::new(profile.clone(), n, PerturbationMode::GaussianTail, 1).unwrap();
        let g = LossVector::checked(c.clone(), &profile).unwrap();
        for _ in 0..n {
            state.observe(&g).unwrap();
        }
        let totals = state.cumulative_losses();
        assert_eq!(totals[0], n as f64 * c[0]);
        assert_eq!(totals[1], n as f64 * c[1]);
    }

    #[test]
    fn observe_rejects_scale_violation() {
        let profile = ScaleProfile::with_uniform_prior(vec![1.0, 1.0]).unwrap();
        let mut state =
            MultiScaleFtpl::new(profile.clone(), 5, PerturbationMode::GaussianTail, 1).unwrap();
        let bad = LossVector::checked(vec![0.0, 1.2], &profile);
        assert!(matches!(
            bad,
            Err(CoreError::ScaleViolation { index: 1, .. })
        ));
        let _ = &mut state;
    }

    #[test]
    fn steps_are_deterministic_per_seed() {
        for mode in [PerturbationMode::RademacherExact, PerturbationMode::GaussianTail] {
            let mut a = two_expert_state(mode, 123);
            let mut b = two_expert_state(mode, 123);
            let profile = a.profile().clone();
            for round in 0..8 {
                let da = a.step().unwrap();
                let db = b.step().unwrap();
                assert_eq!(da.chosen, db.chosen, "round {round}");
                assert_eq!(da.weights.weights(), db.weights.weights());
                let sign = if round % 2 == 0 { 1.0 } else { -1.0 };
                let g = LossVector::checked(vec![sign, -sign], &profile).unwrap();
                a.observe(&g).unwrap();
                b.observe(&g).unwrap();
            }
        }
    }

    #[test]
    fn relaxation_empty_tail_is_exact() {
        let profile = ScaleProfile::with_uniform_prior(vec![1.0, 2.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let v = relaxation_estimate(&[3.0, -1.0], &profile, &[0.5, 0.25], 0, 1, &mut rng);
        assert_eq!(v, (-(-1.0f64) - 0.25).max(-3.0 - 0.5));
    }

    #[test]
    fn relaxation_initial_value_is_at_most_one() {
        // Single expert: the initial relaxation is at most
        // 2 pi / (4 c^2 n) <= 1 with the closed-form penalty.
        let n = 25;
        let profile = ScaleProfile::with_uniform_prior(vec![1.0]).unwrap();
        let b = compute_bound(1.0, n, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let samples = 100_000;
        let est = relaxation_estimate(&[0.0], &profile, &[b], n, samples, &mut rng);
        // Crude SE bound: the summand is bounded by 4 c n in magnitude.
        let se = 4.0 * n as f64 / (samples as f64).sqrt();
        assert!(est <= 1.0 + 3.0 * se, "estimate {est}");
    }

    #[test]
    fn relaxation_single_expert_mean_is_zero() {
        let profile = ScaleProfile::with_uniform_prior(vec![1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let samples = 200_000;
        let est = relaxation_estimate(&[0.0], &profile, &[0.0], 4, samples, &mut rng);
        // E[4 z] = 0; SE of 4 z with Var z = 4 is 8 / sqrt(samples).
        let se = 8.0 / (samples as f64).sqrt();
        assert!(est.abs() <= 4.0 * se, "estimate {est}");
    }

    #[test]
    fn overflow_guard_fires() {
        let profile = ScaleProfile::new(vec![1e200], vec![1.0]).unwrap();
        let err = MultiScaleFtpl::new(profile, 10, PerturbationMode::GaussianTail, 0);
        assert!(matches!(err, Err(CoreError::Sizing(_))));
    }
}
