//! Numerical verification suites for the sign-perturbation comparison
//! inequalities and the multi-scale maximal inequality.
//!
//! The two comparison checks are exact enumerations (every sign pattern on
//! both sides), so their pass threshold is roundoff-level. The maximal
//! inequality is Monte Carlo with a three-standard-error gate.

use multiscale_core::ledger::CompensatedSum;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{HarnessError, Result};

/// Exact-enumeration tolerance.
pub const ENUMERATION_TOLERANCE: f64 = 1e-12;

/// Outcome of an enumeration suite.
#[derive(Debug, Clone, Serialize)]
pub struct EnumerationReport {
    pub name: String,
    pub cases: usize,
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn mean_over_signs<F: FnMut(&[f64]) -> f64>(n: usize, mut f: F) -> f64 {
    let mut acc = CompensatedSum::new();
    let patterns = 1usize << n;
    let mut sigma = vec![0.0; n];
    for mask in 0..patterns {
        for (i, s) in sigma.iter_mut().enumerate() {
            *s = if mask & (1 << i) != 0 { 1.0 } else { -1.0 };
        }
        acc.add(f(&sigma));
    }
    acc.total() / patterns as f64
}

fn max_over_signs<F: FnMut(&[f64]) -> f64>(n: usize, mut f: F) -> f64 {
    let mut best = f64::NEG_INFINITY;
    let patterns = 1usize << n;
    let mut sigma = vec![0.0; n];
    for mask in 0..patterns {
        for (i, s) in sigma.iter_mut().enumerate() {
            *s = if mask & (1 << i) != 0 { 1.0 } else { -1.0 };
        }
        best = best.max(f(&sigma));
    }
    best
}

fn max_index_value(w: &[f64], sigma: &[f64], c: &[f64], coef: f64) -> f64 {
    w.iter()
        .zip(sigma)
        .zip(c)
        .map(|((wi, si), ci)| wi + coef * si * ci)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Violation `LHS - RHS` of the two-expert comparison
/// `sup_sigma E_eps max_i {w_i + eps sigma_i c_i} <= E_sigma max_i {w_i + 2 sigma_i c_i}`
/// by full enumeration.
pub fn lemma_n2_violation(w: &[f64; 2], c: &[f64; 2]) -> f64 {
    let lhs = max_over_signs(2, |sigma| {
        0.5 * (max_index_value(w, sigma, c, 1.0) + max_index_value(w, sigma, c, -1.0))
    });
    let rhs = mean_over_signs(2, |sigma| max_index_value(w, sigma, c, 2.0));
    lhs - rhs
}

/// Run the two-expert suite over a grid of (w, c) pairs.
pub fn verify_lemma_n2(grid: &[([f64; 2], [f64; 2])]) -> EnumerationReport {
    let mut worst = f64::NEG_INFINITY;
    for (w, c) in grid {
        worst = worst.max(lemma_n2_violation(w, c));
    }
    EnumerationReport {
        name: "two-expert sign comparison".into(),
        cases: grid.len(),
        max_violation: worst,
        tolerance: ENUMERATION_TOLERANCE,
        passed: worst <= ENUMERATION_TOLERANCE,
    }
}

/// Violation `LHS - RHS` of the general comparison
/// `sup_sigma E_eps max_i {w_i + 2 eps sigma_i c_i} <= E_sigma max_i {w_i + 4 sigma_i c_i}`
/// by full enumeration over sign patterns; sizes up to 4.
pub fn perturbation_violation(w: &[f64], c: &[f64]) -> Result<f64> {
    let n = w.len();
    if n == 0 || n > 4 || c.len() != n {
        return Err(HarnessError::BadInput(format!(
            "perturbation check needs 1..=4 matched coordinates, got {n}"
        )));
    }
    let lhs = max_over_signs(n, |sigma| {
        0.5 * (max_index_value(w, sigma, c, 2.0) + max_index_value(w, sigma, c, -2.0))
    });
    let rhs = mean_over_signs(n, |sigma| max_index_value(w, sigma, c, 4.0));
    Ok(lhs - rhs)
}

pub fn verify_perturbation_theorem(grid: &[(Vec<f64>, Vec<f64>)]) -> Result<EnumerationReport> {
    let mut worst = f64::NEG_INFINITY;
    for (w, c) in grid {
        worst = worst.max(perturbation_violation(w, c)?);
    }
    Ok(EnumerationReport {
        name: "sign-perturbation comparison".into(),
        cases: grid.len(),
        max_violation: worst,
        tolerance: ENUMERATION_TOLERANCE,
        passed: worst <= ENUMERATION_TOLERANCE,
    })
}

/// Parameters of one maximal-inequality check: per-index mgf scales `h`,
/// the exponent `p` of the mgf bound, and the prior.
#[derive(Debug, Clone, Serialize)]
pub struct MaximalInequalitySpec {
    pub h: Vec<f64>,
    pub p_exp: f64,
    pub pi: Vec<f64>,
}

impl MaximalInequalitySpec {
    pub fn validate(&self) -> Result<()> {
        if self.h.len() != self.pi.len() || self.h.is_empty() {
            return Err(HarnessError::BadInput("h and pi must match".into()));
        }
        if !(self.p_exp > 0.0) {
            return Err(HarnessError::BadInput("p must be positive".into()));
        }
        for (i, (&h, &pi)) in self.h.iter().zip(&self.pi).enumerate() {
            if !(h > 0.0) || !(pi > 0.0) {
                return Err(HarnessError::BadInput(format!(
                    "h[{i}] and pi[{i}] must be positive"
                )));
            }
            if h / pi < std::f64::consts::E {
                return Err(HarnessError::BadInput(format!(
                    "precondition h[{i}]/pi[{i}] >= e violated ({})",
                    h / pi
                )));
            }
        }
        Ok(())
    }

    /// Per-index penalty `(2 + 1/p) h^{1/p} (ln h + ln(1/pi))^{1 - 1/p}`.
    pub fn penalty(&self, i: usize) -> f64 {
        let p = self.p_exp;
        let h = self.h[i];
        let pi = self.pi[i];
        (2.0 + 1.0 / p) * h.powf(1.0 / p) * (h.ln() + (1.0 / pi).ln()).powf(1.0 - 1.0 / p)
    }

    /// Right-hand side `sum_i pi_i / h_i`.
    pub fn rhs(&self) -> f64 {
        self.h.iter().zip(&self.pi).map(|(h, pi)| pi / h).sum()
    }
}

/// Monte Carlo report for the maximal inequality.
#[derive(Debug, Clone, Serialize)]
pub struct MaximalReport {
    pub estimate: f64,
    pub standard_error: f64,
    pub rhs: f64,
    pub samples: usize,
    pub passed: bool,
}

/// Estimate `E sup_i { X_i - penalty(i) }` for a sampled process and test it
/// against `sum_i pi_i / h_i` at three standard errors.
pub fn verify_maximal_inequality<F>(
    spec: &MaximalInequalitySpec,
    mut sampler: F,
    samples: usize,
    seed: u64,
) -> Result<MaximalReport>
where
    F: FnMut(&mut ChaCha8Rng) -> Vec<f64>,
{
    spec.validate()?;
    assert!(samples >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let penalties: Vec<f64> = (0..spec.h.len()).map(|i| spec.penalty(i)).collect();
    let mut sum = CompensatedSum::new();
    let mut sum_sq = CompensatedSum::new();
    for _ in 0..samples {
        let xs = sampler(&mut rng);
        debug_assert_eq!(xs.len(), penalties.len());
        let sup = xs
            .iter()
            .zip(&penalties)
            .map(|(x, b)| x - b)
            .fold(f64::NEG_INFINITY, f64::max);
        sum.add(sup);
        sum_sq.add(sup * sup);
    }
    let mean = sum.total() / samples as f64;
    let var = (sum_sq.total() / samples as f64 - mean * mean).max(0.0);
    let se = (var / samples as f64).sqrt();
    let rhs = spec.rhs();
    Ok(MaximalReport {
        estimate: mean,
        standard_error: se,
        rhs,
        samples,
        passed: mean <= rhs + 3.0 * se,
    })
}

/// The bounded-sum process from the expert-game analysis:
/// `X_i = 2 c_i * (sum of n uniform signs)`, which satisfies the mgf premise
/// with `h_i = 4 c_i^2 n` and `p = 2`. Sampled through the binomial
/// transform.
pub fn rademacher_sum_sampler(c: Vec<f64>, n: usize) -> impl FnMut(&mut ChaCha8Rng) -> Vec<f64> {
    let binom = Binomial::new(n as u64, 0.5).expect("valid binomial");
    move |rng| {
        c.iter()
            .map(|ci| {
                let heads = binom.sample(rng) as f64;
                2.0 * ci * (2.0 * heads - n as f64)
            })
            .collect()
    }
}

/// The matching spec for [`rademacher_sum_sampler`]: `h_i = 4 c_i^2 n`,
/// `p = 2`.
pub fn rademacher_sum_spec(c: &[f64], n: usize, pi: Vec<f64>) -> MaximalInequalitySpec {
    MaximalInequalitySpec {
        h: c.iter().map(|ci| 4.0 * ci * ci * n as f64).collect(),
        p_exp: 2.0,
        pi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use multiscale_core::compute_bound;

    #[test]
    fn lemma_n2_named_cases() {
        // w = (0,0), c = (1,1): both sides equal 1.
        let v = lemma_n2_violation(&[0.0, 0.0], &[1.0, 1.0]);
        assert!(v.abs() <= 1e-15, "violation {v}");

        // Degenerate scales: both sides are max(w1, w2).
        let v = lemma_n2_violation(&[0.3, -0.7], &[0.0, 0.0]);
        assert!(v.abs() <= 1e-15);

        // Dominated case: LHS = 10 <= RHS.
        let v = lemma_n2_violation(&[10.0, 0.0], &[1.0, 1.0]);
        assert!(v <= 0.0);
    }

    #[test]
    fn perturbation_named_cases() {
        // Single coordinate: both sides reduce to w1.
        let v = perturbation_violation(&[1.3], &[2.0]).unwrap();
        assert!(v.abs() <= 1e-15);

        // N = 2 symmetric: LHS = 2, RHS = 2.
        let v = perturbation_violation(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!(v.abs() <= 1e-15);

        assert!(perturbation_violation(&[0.0; 5], &[1.0; 5]).is_err());
    }

    #[test]
    fn penalty_matches_expert_bound_at_p2() {
        // With h = 4 c^2 n and p = 2 the penalty is exactly the expert-game
        // bound 5 c sqrt(n ln(4 c^2 n / pi)).
        let c = 3.0;
        let n = 50;
        let pi = 0.25;
        let spec = rademacher_sum_spec(&[c], n, vec![pi]);
        assert!((spec.penalty(0) - compute_bound(c, n, pi)).abs() < 1e-9);
    }

    #[test]
    fn maximal_inequality_trivial_process() {
        // Deterministic X = 0: LHS <= 0 < RHS.
        let spec = MaximalInequalitySpec {
            h: vec![10.0],
            p_exp: 2.0,
            pi: vec![1.0],
        };
        let report = verify_maximal_inequality(&spec, |_| vec![0.0], 100, 0).unwrap();
        assert!(report.passed);
        assert!(report.estimate < report.rhs);
    }

    #[test]
    fn maximal_inequality_rejects_bad_precondition() {
        let spec = MaximalInequalitySpec {
            h: vec![1.0],
            p_exp: 2.0,
            pi: vec![1.0],
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn maximal_inequality_single_rademacher_process() {
        let c = vec![1.0];
        let n = 25;
        let spec = rademacher_sum_spec(&c, n, vec![1.0]);
        let report =
            verify_maximal_inequality(&spec, rademacher_sum_sampler(c, n), 100_000, 1).unwrap();
        assert!(report.passed, "estimate {} rhs {}", report.estimate, report.rhs);
    }

    #[test]
    fn maximal_inequality_scaled_h_still_passes() {
        // Scaling h by 10 shrinks the RHS tenfold; the mgf premise only gets
        // weaker, so the check still passes.
        let c = vec![1.0, 2.0];
        let n = 16;
        let mut spec = rademacher_sum_spec(&c, n, vec![0.5, 0.5]);
        for h in spec.h.iter_mut() {
            *h *= 10.0;
        }
        let report =
            verify_maximal_inequality(&spec, rademacher_sum_sampler(c, n), 100_000, 2).unwrap();
        assert!(report.passed);
    }
}
