//! Online Mirror Descent over norm balls.
//!
//! Regularizers covered: half squared l2, half squared lp for p in (1, 2]
//! (strong convexity p - 1 w.r.t. the lp norm), and negative entropy over
//! the mass-R simplex (strong convexity 1/R w.r.t. l1). The Bregman
//! projection onto the lp ball is radial scaling; for negative entropy it is
//! renormalization of the total mass.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Regularizer choice for a mirror-descent learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Regularizer {
    HalfSquaredL2,
    HalfSquaredLp { p: f64 },
    NegativeEntropy,
}

impl Regularizer {
    pub fn validate(&self) -> Result<()> {
        if let Regularizer::HalfSquaredLp { p } = self {
            if !(*p > 1.0 && *p <= 2.0) {
                return Err(CoreError::Config(format!(
                    "lp regularizer needs p in (1, 2], got {p}"
                )));
            }
        }
        Ok(())
    }

    /// Strong convexity constant with respect to the regularizer's norm.
    pub fn strong_convexity(&self, radius: f64) -> f64 {
        match self {
            Regularizer::HalfSquaredL2 => 1.0,
            Regularizer::HalfSquaredLp { p } => p - 1.0,
            Regularizer::NegativeEntropy => 1.0 / radius,
        }
    }

    /// Primal norm the ball is measured in.
    pub fn norm(&self, w: &[f64]) -> f64 {
        match self {
            Regularizer::HalfSquaredL2 => lp_norm(w, 2.0),
            Regularizer::HalfSquaredLp { p } => lp_norm(w, *p),
            Regularizer::NegativeEntropy => lp_norm(w, 1.0),
        }
    }

    /// Dual norm, for the right-hand side of the regret certificate.
    pub fn dual_norm(&self, g: &[f64]) -> f64 {
        match self {
            Regularizer::HalfSquaredL2 => lp_norm(g, 2.0),
            Regularizer::HalfSquaredLp { p } => lp_norm(g, p / (p - 1.0)),
            Regularizer::NegativeEntropy => g.iter().fold(0.0f64, |m, x| m.max(x.abs())),
        }
    }

    /// Regularizer value, normalized to vanish at the learner's start point.
    pub fn value(&self, w: &[f64], radius: f64) -> f64 {
        match self {
            Regularizer::HalfSquaredL2 => 0.5 * w.iter().map(|x| x * x).sum::<f64>(),
            Regularizer::HalfSquaredLp { p } => {
                let n = lp_norm(w, *p);
                0.5 * n * n
            }
            Regularizer::NegativeEntropy => {
                let n = w.len() as f64;
                w.iter()
                    .map(|&x| {
                        if x <= 0.0 {
                            0.0
                        } else {
                            x * (x * n / radius).ln()
                        }
                    })
                    .sum()
            }
        }
    }
}

pub fn lp_norm(w: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        return w.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    if p == 1.0 {
        return w.iter().map(|x| x.abs()).sum();
    }
    // Scale out the max entry so large exponents stay in range.
    let m = w.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = w.iter().map(|x| (x.abs() / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

/// Gradient of half the squared lp norm.
fn lp_mirror_map(w: &[f64], p: f64) -> Vec<f64> {
    let n = lp_norm(w, p);
    if n == 0.0 {
        return vec![0.0; w.len()];
    }
    let scale = n.powf(2.0 - p);
    w.iter()
        .map(|&x| scale * x.abs().powf(p - 1.0) * x.signum())
        .collect()
}

/// One mirror-descent learner: iterate, step size, ball radius, regularizer.
#[derive(Debug, Clone)]
pub struct MirrorDescent {
    w: Vec<f64>,
    eta: f64,
    radius: f64,
    regularizer: Regularizer,
}

impl MirrorDescent {
    /// Start at the regularizer's minimizer over the ball: the origin for the
    /// lp family, the uniform point for negative entropy.
    pub fn new(dim: usize, eta: f64, radius: f64, regularizer: Regularizer) -> Result<Self> {
        regularizer.validate()?;
        if dim == 0 {
            return Err(CoreError::Config("zero-dimensional learner".into()));
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(CoreError::Config(format!("learning rate {eta} must be positive")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(CoreError::Config(format!("radius {radius} must be positive")));
        }
        let w = match regularizer {
            Regularizer::NegativeEntropy => vec![radius / dim as f64; dim],
            _ => vec![0.0; dim],
        };
        Ok(MirrorDescent {
            w,
            eta,
            radius,
            regularizer,
        })
    }

    pub fn iterate(&self) -> &[f64] {
        &self.w
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn regularizer(&self) -> Regularizer {
        self.regularizer
    }

    /// Mirror update followed by the Bregman projection onto the ball.
    pub fn step(&mut self, g: &[f64]) -> Result<()> {
        if g.len() != self.w.len() {
            return Err(CoreError::DimensionMismatch {
                expected: self.w.len(),
                got: g.len(),
            });
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(CoreError::NonFinite("gradient has non-finite entries".into()));
        }
        match self.regularizer {
            Regularizer::HalfSquaredL2 => {
                for (wi, gi) in self.w.iter_mut().zip(g) {
                    *wi -= self.eta * gi;
                }
                radial_project(&mut self.w, self.radius, 2.0);
            }
            Regularizer::HalfSquaredLp { p } => {
                let mut theta = lp_mirror_map(&self.w, p);
                for (ti, gi) in theta.iter_mut().zip(g) {
                    *ti -= self.eta * gi;
                }
                let q = p / (p - 1.0);
                self.w = lp_mirror_map(&theta, q);
                radial_project(&mut self.w, self.radius, p);
            }
            Regularizer::NegativeEntropy => {
                for (wi, gi) in self.w.iter_mut().zip(g) {
                    *wi *= (-self.eta * gi).exp();
                }
                let mass: f64 = self.w.iter().sum();
                if mass <= 0.0 || !mass.is_finite() {
                    return Err(CoreError::NonFinite(
                        "entropy update produced a degenerate mass".into(),
                    ));
                }
                let scale = self.radius / mass;
                for wi in self.w.iter_mut() {
                    *wi *= scale;
                }
            }
        }
        Ok(())
    }
}

/// Scale back onto the lp ball if outside; the Bregman projection for the
/// half-squared-lp regularizer is exactly this radial map.
pub fn radial_project(w: &mut [f64], radius: f64, p: f64) {
    let n = lp_norm(w, p);
    if n > radius {
        let s = radius / n;
        for wi in w.iter_mut() {
            *wi *= s;
        }
    }
}

/// Both sides of the mirror-descent regret certificate
///
/// ```text
///   sum_t <w_t - w, g_t>  <=  eta / (2 lambda) sum_t ||g_t||_*^2 + R(w) / eta
/// ```
///
/// evaluated on a recorded trace of (iterate, gradient) pairs.
pub fn md_regret_certificate(
    trace: &[(Vec<f64>, Vec<f64>)],
    comparator: &[f64],
    eta: f64,
    radius: f64,
    regularizer: Regularizer,
) -> Result<(f64, f64)> {
    let comp_norm = regularizer.norm(comparator);
    if comp_norm > radius * (1.0 + 1e-9) {
        return Err(CoreError::Config(format!(
            "comparator norm {comp_norm} outside the radius-{radius} ball"
        )));
    }
    let lambda = regularizer.strong_convexity(radius);
    let mut lhs = 0.0;
    let mut dual_sq = 0.0;
    for (w, g) in trace {
        let mut inner = 0.0;
        for i in 0..g.len() {
            inner += (w[i] - comparator[i]) * g[i];
        }
        lhs += inner;
        let d = regularizer.dual_norm(g);
        dual_sq += d * d;
    }
    let rhs = eta / (2.0 * lambda) * dual_sq + regularizer.value(comparator, radius) / eta;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_gradient_is_identity() {
        for reg in [
            Regularizer::HalfSquaredL2,
            Regularizer::HalfSquaredLp { p: 1.5 },
            Regularizer::NegativeEntropy,
        ] {
            let mut md = MirrorDescent::new(3, 0.5, 2.0, reg).unwrap();
            let before = md.iterate().to_vec();
            md.step(&[0.0, 0.0, 0.0]).unwrap();
            for (a, b) in before.iter().zip(md.iterate()) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn l2_interior_step() {
        let mut md = MirrorDescent::new(2, 1.0, 10.0, Regularizer::HalfSquaredL2).unwrap();
        md.step(&[1.0, 0.0]).unwrap();
        assert_eq!(md.iterate(), &[-1.0, 0.0]);
    }

    #[test]
    fn l2_projected_step() {
        let mut md = MirrorDescent::new(2, 1.0, 1.0, Regularizer::HalfSquaredL2).unwrap();
        md.step(&[3.0, 0.0]).unwrap();
        assert_eq!(md.iterate(), &[-1.0, 0.0]);
    }

    #[test]
    fn rejects_non_finite_gradient() {
        let mut md = MirrorDescent::new(2, 1.0, 1.0, Regularizer::HalfSquaredL2).unwrap();
        assert!(md.step(&[f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn lp_mirror_map_roundtrip() {
        let p = 1.5;
        let q = p / (p - 1.0);
        let w = vec![0.3, -1.2, 0.9];
        let theta = lp_mirror_map(&w, p);
        let back = lp_mirror_map(&theta, q);
        for (a, b) in w.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn projections_are_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for p in [1.5, 2.0] {
            for _ in 0..50 {
                let mut w: Vec<f64> = (0..4).map(|_| rng.random_range(-5.0..5.0)).collect();
                radial_project(&mut w, 1.0, p);
                let once = w.clone();
                radial_project(&mut w, 1.0, p);
                for (a, b) in once.iter().zip(&w) {
                    assert!((a - b).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn certificate_on_empty_trace() {
        let comparator = vec![0.5, 0.5];
        let (lhs, rhs) = md_regret_certificate(
            &[],
            &comparator,
            0.1,
            1.0,
            Regularizer::HalfSquaredL2,
        )
        .unwrap();
        assert_eq!(lhs, 0.0);
        assert!((rhs - Regularizer::HalfSquaredL2.value(&comparator, 1.0) / 0.1).abs() < 1e-15);
        assert!(lhs <= rhs);
    }

    #[test]
    fn certificate_single_zero_gradient_step() {
        let md = MirrorDescent::new(3, 0.2, 1.0, Regularizer::HalfSquaredL2).unwrap();
        let trace = vec![(md.iterate().to_vec(), vec![0.0; 3])];
        let (lhs, rhs) =
            md_regret_certificate(&trace, &[0.1, 0.0, 0.0], 0.2, 1.0, Regularizer::HalfSquaredL2)
                .unwrap();
        assert_eq!(lhs, 0.0);
        assert!(lhs <= rhs);
    }

    fn run_and_certify(reg: Regularizer, seed: u64) {
        let d = 3;
        let n = 100;
        let radius = 2.0;
        let lambda = reg.strong_convexity(radius);
        // Tuned eta: radius / (G sqrt(n / lambda)) with gradient scale G = 1.
        let eta = radius * (lambda / n as f64).sqrt();
        let mut md = MirrorDescent::new(d, eta, radius, reg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut trace = Vec::new();
        for _ in 0..n {
            let g: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            trace.push((md.iterate().to_vec(), g.clone()));
            md.step(&g).unwrap();
        }
        // Comparators: a few random points of the ball (or simplex).
        for _ in 0..10 {
            let comparator: Vec<f64> = match reg {
                Regularizer::NegativeEntropy => {
                    let raw: Vec<f64> = (0..d).map(|_| rng.random_range(0.01..1.0)).collect();
                    let s: f64 = raw.iter().sum();
                    raw.iter().map(|x| x * radius / s).collect()
                }
                _ => {
                    let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                    radial_project(&mut v, radius, 2.0);
                    v
                }
            };
            let (lhs, rhs) = md_regret_certificate(&trace, &comparator, eta, radius, reg).unwrap();
            assert!(lhs <= rhs + 1e-9, "{reg:?}: lhs {lhs} > rhs {rhs}");
        }
    }

    #[test]
    fn certificate_holds_on_random_runs() {
        for seed in 0..20 {
            run_and_certify(Regularizer::HalfSquaredL2, seed);
            run_and_certify(Regularizer::HalfSquaredLp { p: 1.5 }, 100 + seed);
            run_and_certify(Regularizer::NegativeEntropy, 200 + seed);
        }
    }

    /// Bregman divergence of the half-squared-lp regularizer.
    fn lp_bregman(to: &[f64], from: &[f64], p: f64) -> f64 {
        let reg = Regularizer::HalfSquaredLp { p };
        let grad = lp_mirror_map(from, p);
        let mut inner = 0.0;
        for i in 0..to.len() {
            inner += grad[i] * (to[i] - from[i]);
        }
        reg.value(to, 1.0) - reg.value(from, 1.0) - inner
    }

    #[test]
    fn radial_projection_beats_grid_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for p in [1.5, 2.0] {
            for d in [2usize, 3, 4] {
                for _ in 0..5 {
                    let outside: Vec<f64> =
                        (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
                    if lp_norm(&outside, p) <= 1.0 {
                        continue;
                    }
                    let mut radial = outside.clone();
                    radial_project(&mut radial, 1.0, p);
                    let d_radial = lp_bregman(&radial, &outside, p);

                    let step = match d {
                        2 => 0.01,
                        3 => 0.04,
                        _ => 0.1,
                    };
                    let mut best = f64::INFINITY;
                    let mut idx = vec![0usize; d];
                    let m = (2.0 / step) as usize + 1;
                    'grid: loop {
                        let point: Vec<f64> =
                            idx.iter().map(|&k| -1.0 + k as f64 * step).collect();
                        if lp_norm(&point, p) <= 1.0 {
                            best = best.min(lp_bregman(&point, &outside, p));
                        }
                        let mut pos = 0;
                        loop {
                            idx[pos] += 1;
                            if idx[pos] < m {
                                break;
                            }
                            idx[pos] = 0;
                            pos += 1;
                            if pos == d {
                                break 'grid;
                            }
                        }
                    }
                    assert!(
                        d_radial <= best + 1e-6,
                        "p={p} d={d}: radial {d_radial} vs grid {best}"
                    );
                }
            }
        }
    }
}
