//! Adversarial stream generators.
//!
//! Every generator is a pure function of its parameters and seed, and the
//! whole stream is materialized before play begins: the adversary is
//! oblivious by construction.

use multiscale_core::point::SymMat;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Linear-loss gradients `g_t = -bias + noise_scale * xi_t`, rescaled so the
/// Euclidean (dual) norm never exceeds `lipschitz`.
pub fn gen_linear_stream(
    d: usize,
    n: usize,
    lipschitz: f64,
    bias: &[f64],
    noise_scale: f64,
    seed: u64,
) -> Vec<Vec<f64>> {
    assert_eq!(bias.len(), d, "bias direction must have dimension d");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut g: Vec<f64> = (0..d)
                .map(|i| {
                    let xi: f64 = StandardNormal.sample(&mut rng);
                    -bias[i] + noise_scale * xi
                })
                .collect();
            let norm = l2_norm(&g);
            if norm > lipschitz {
                let s = lipschitz / norm;
                for x in g.iter_mut() {
                    *x *= s;
                }
            }
            g
        })
        .collect()
}

/// Supervised pairs: contexts on the unit ball, outcomes
/// `y = <target, x> + noise`, clipped to `[-clip, clip]`.
pub fn gen_supervised_stream(
    d: usize,
    n: usize,
    target: &[f64],
    label_noise: f64,
    clip: f64,
    seed: u64,
) -> Vec<(Vec<f64>, f64)> {
    assert_eq!(target.len(), d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut x: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = l2_norm(&x);
            if norm > 0.0 {
                // Uniform radius profile inside the ball.
                let u: f64 = rng.random::<f64>();
                let r = u.powf(1.0 / d as f64);
                for xi in x.iter_mut() {
                    *xi *= r / norm;
                }
            }
            let clean: f64 = target.iter().zip(&x).map(|(t, xi)| t * xi).sum();
            let noise: f64 = StandardNormal.sample(&mut rng);
            let y = (clean + label_noise * noise).clamp(-clip, clip);
            (x, y)
        })
        .collect()
}

/// Families of expert-level loss streams, all respecting `|g_t[i]| <= c_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpertStreamKind {
    /// Independent fair signs at full scale.
    IidSigns,
    /// Per-expert drifts fixed once, noise on top.
    DriftingMeans,
    /// Deterministic sign flips staggered across experts, with jitter.
    Alternating,
    /// One expert quietly better than the crowd.
    HiddenGood,
    /// Block phases: the favored expert rotates every block.
    Sawtooth,
}

impl ExpertStreamKind {
    pub const ALL: [ExpertStreamKind; 5] = [
        ExpertStreamKind::IidSigns,
        ExpertStreamKind::DriftingMeans,
        ExpertStreamKind::Alternating,
        ExpertStreamKind::HiddenGood,
        ExpertStreamKind::Sawtooth,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExpertStreamKind::IidSigns => "iid-signs",
            ExpertStreamKind::DriftingMeans => "drifting-means",
            ExpertStreamKind::Alternating => "alternating",
            ExpertStreamKind::HiddenGood => "hidden-good",
            ExpertStreamKind::Sawtooth => "sawtooth",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.name() == name)
    }
}

/// Materialize an expert-level stream for scales `c`.
pub fn gen_expert_stream(
    kind: ExpertStreamKind,
    c: &[f64],
    n: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let num = c.len();
    let sign = |rng: &mut ChaCha8Rng| if rng.random::<bool>() { 1.0 } else { -1.0 };
    match kind {
        ExpertStreamKind::IidSigns => (0..n)
            .map(|_| c.iter().map(|ci| ci * sign(&mut rng)).collect())
            .collect(),
        ExpertStreamKind::DriftingMeans => {
            let drifts: Vec<f64> = (0..num).map(|_| rng.random_range(-0.3..0.3)).collect();
            (0..n)
                .map(|_| {
                    c.iter()
                        .zip(&drifts)
                        .map(|(ci, mu)| ci * (mu + 0.7 * sign(&mut rng)).clamp(-1.0, 1.0))
                        .collect()
                })
                .collect()
        }
        ExpertStreamKind::Alternating => (0..n)
            .map(|t| {
                c.iter()
                    .enumerate()
                    .map(|(i, ci)| {
                        let base = if (t + i) % 2 == 0 { 1.0 } else { -1.0 };
                        let jitter: f64 = rng.random_range(-0.2..0.2);
                        ci * (base * 0.8 + jitter).clamp(-1.0, 1.0)
                    })
                    .collect()
            })
            .collect(),
        ExpertStreamKind::HiddenGood => {
            let good = rng.random_range(0..num);
            (0..n)
                .map(|_| {
                    c.iter()
                        .enumerate()
                        .map(|(i, ci)| {
                            let mu = if i == good { -0.15 } else { 0.0 };
                            ci * (mu + 0.8 * sign(&mut rng)).clamp(-1.0, 1.0)
                        })
                        .collect()
                })
                .collect()
        }
        ExpertStreamKind::Sawtooth => {
            let block = (n as f64).sqrt().ceil() as usize;
            (0..n)
                .map(|t| {
                    let favored = (t / block.max(1)) % num;
                    c.iter()
                        .enumerate()
                        .map(|(i, ci)| {
                            let mu = if i == favored { -0.4 } else { 0.2 };
                            ci * (mu + 0.5 * sign(&mut rng)).clamp(-1.0, 1.0)
                        })
                        .collect()
                })
                .collect()
        }
    }
}

/// Strict sign alternation along the first coordinate with a slight
/// magnitude asymmetry: even rounds pull with `-1`, odd rounds push back with
/// `1 - drift`. Every gradient-following learner pays each reversal, while
/// the net drift `n * drift / 2` feeds the comparators. Deterministic.
pub fn gen_alternating_drift_stream(d: usize, n: usize, drift: f64) -> Vec<Vec<f64>> {
    assert!((0.0..1.0).contains(&drift));
    (0..n)
        .map(|t| {
            let mut g = vec![0.0; d];
            g[0] = if t % 2 == 0 { -1.0 } else { 1.0 - drift };
            g
        })
        .collect()
}

/// Two-expert bait-and-switch stream against a range-tuned Hedge baseline
/// with learning rate `hedge_eta`: expert 1 plays unit-scale signs, expert 2
/// plays `±big`, flipping whenever the simulated Hedge weight crosses the
/// hysteresis thresholds. Deterministic, hence oblivious; the simulated
/// baseline plays its expected weights.
pub fn gen_two_scale_bait_stream(big: f64, n: usize, hedge_eta: f64) -> Vec<Vec<f64>> {
    let mut log_odds: f64 = 0.0; // log(w2 / w1) of the simulated baseline
    let mut hitting = true;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let w2 = 1.0 / (1.0 + (-log_odds).exp());
        if hitting && w2 < 0.25 {
            hitting = false;
        } else if !hitting && w2 >= 0.45 {
            hitting = true;
        }
        let g = if hitting {
            vec![-1.0, big]
        } else {
            vec![1.0, -big]
        };
        log_odds += hedge_eta * (g[0] - g[1]);
        out.push(g);
    }
    out
}

/// PSD matrix stream with a planted rank-one spike: each loss matrix is a
/// convex mix of the spike and a random rank-one disturbance, so it is PSD
/// with spectral norm at most one.
pub fn gen_planted_spike_stream(
    d: usize,
    n: usize,
    spike_weight: f64,
    seed: u64,
) -> (Vec<f64>, Vec<SymMat>) {
    assert!((0.0..=1.0).contains(&spike_weight));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = l2_norm(&v);
    for x in v.iter_mut() {
        *x /= norm;
    }
    let spike = SymMat::outer(&v);
    let stream = (0..n)
        .map(|_| {
            let mut z: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let zn = l2_norm(&z);
            for x in z.iter_mut() {
                *x /= zn;
            }
            let noise = SymMat::outer(&z);
            let m = spike.as_matrix() * spike_weight + noise.as_matrix() * (1.0 - spike_weight);
            SymMat::new(m)
        })
        .collect();
    (v, stream)
}

/// Symmetric loss matrices with spectral norm at most one, random rank-one
/// signs; exercises the trace-ball learner.
pub fn gen_matrix_sign_stream(d: usize, n: usize, seed: u64) -> Vec<SymMat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut z: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let zn = l2_norm(&z);
            for x in z.iter_mut() {
                *x /= zn;
            }
            let s: f64 = if rng.random::<bool>() { 1.0 } else { -1.0 };
            SymMat::new(DMatrix::from_fn(d, d, |i, j| s * z[i] * z[j]))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_stream_zero_cases() {
        let zero_bias = vec![0.0; 3];
        let s = gen_linear_stream(3, 10, 1.0, &zero_bias, 0.0, 1);
        assert!(s.iter().all(|g| g.iter().all(|&x| x == 0.0)));

        let bias = vec![1.0, 0.0, 0.0];
        let s = gen_linear_stream(3, 10, 1.0, &bias, 0.0, 1);
        for g in &s {
            assert_eq!(g, &vec![-1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn linear_stream_dual_norm_bounded() {
        let bias = vec![0.4, -0.2, 0.1];
        let s = gen_linear_stream(3, 200, 1.0, &bias, 2.0, 5);
        for g in &s {
            assert!(l2_norm(g) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn linear_stream_deterministic() {
        let bias = vec![0.0, 0.0];
        let a = gen_linear_stream(2, 50, 1.0, &bias, 1.0, 9);
        let b = gen_linear_stream(2, 50, 1.0, &bias, 1.0, 9);
        assert_eq!(a, b);
    }

    #[test]
    fn supervised_contexts_on_the_ball() {
        let target = vec![0.5, -0.5];
        let s = gen_supervised_stream(2, 100, &target, 0.1, 2.0, 3);
        for (x, y) in &s {
            assert!(l2_norm(x) <= 1.0 + 1e-12);
            assert!(y.abs() <= 2.0);
        }
    }

    #[test]
    fn supervised_target_sets_the_comparator_loss() {
        // Zero target, zero noise: outcomes vanish, so the best comparator
        // loss is zero under the absolute loss.
        let s = gen_supervised_stream(3, 50, &[0.0; 3], 0.0, 1.0, 4);
        assert!(s.iter().all(|(_, y)| *y == 0.0));

        // With a linear target, the target predictor's absolute loss is the
        // noise level: mean |noise| = sigma sqrt(2/pi) for Gaussian labels.
        let target = vec![0.3, -0.2, 0.1];
        let sigma = 0.05;
        let n = 4000;
        let s = gen_supervised_stream(3, n, &target, sigma, 10.0, 4);
        let mean_loss: f64 = s
            .iter()
            .map(|(x, y)| {
                let pred: f64 = target.iter().zip(x).map(|(t, xi)| t * xi).sum();
                (pred - y).abs()
            })
            .sum::<f64>()
            / n as f64;
        let expect = sigma * (2.0 / std::f64::consts::PI).sqrt();
        assert!((mean_loss - expect).abs() < 0.005, "{mean_loss} vs {expect}");
    }

    #[test]
    fn expert_streams_respect_scales() {
        let c = vec![1.0, 4.0, 16.0];
        for kind in ExpertStreamKind::ALL {
            let s = gen_expert_stream(kind, &c, 300, 11);
            assert_eq!(s.len(), 300);
            for g in &s {
                for (gi, ci) in g.iter().zip(&c) {
                    assert!(gi.abs() <= ci * (1.0 + 1e-12), "{kind:?}");
                }
            }
        }
    }

    #[test]
    fn bait_stream_shape() {
        let s = gen_two_scale_bait_stream(100.0, 400, 5e-4);
        assert_eq!(s.len(), 400);
        for g in &s {
            assert_eq!(g[0].abs(), 1.0);
            assert_eq!(g[1].abs(), 100.0);
            assert_eq!(g[0].signum(), -g[1].signum());
        }
        // Both phases occur.
        assert!(s.iter().any(|g| g[1] > 0.0));
        assert!(s.iter().any(|g| g[1] < 0.0));
    }

    #[test]
    fn planted_spike_is_psd_contraction() {
        let (v, stream) = gen_planted_spike_stream(4, 50, 0.9, 2);
        assert!((l2_norm(&v) - 1.0).abs() < 1e-12);
        for y in &stream {
            let eig = nalgebra::SymmetricEigen::new(y.as_matrix().clone());
            for lam in eig.eigenvalues.iter() {
                assert!(*lam >= -1e-10 && *lam <= 1.0 + 1e-10);
            }
        }
    }
}
