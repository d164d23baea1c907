//! A plain exponential-weights baseline.
//!
//! One learning rate for all experts, tuned to the largest loss range; the
//! classical strategy whose regret scales with the worst range in play. Used
//! as the comparison point the multi-scale algorithm is designed to beat,
//! and as a scalar oracle for the trace-ball learner.

/// Exponential weights with a fixed learning rate; plays its expected
/// weights (deterministic).
#[derive(Debug, Clone)]
pub struct Hedge {
    eta: f64,
    log_weights: Vec<f64>,
}

impl Hedge {
    pub fn new(num_experts: usize, eta: f64) -> Self {
        Hedge {
            eta,
            log_weights: vec![0.0; num_experts],
        }
    }

    /// Tuned rate for losses in `[-half_range, half_range]`:
    /// `sqrt(8 ln N / n) / (2 half_range)`.
    pub fn tuned_eta(n: usize, num_experts: usize, half_range: f64) -> f64 {
        (8.0 * (num_experts as f64).ln() / n as f64).sqrt() / (2.0 * half_range)
    }

    pub fn weights(&self) -> Vec<f64> {
        let top = self
            .log_weights
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let raw: Vec<f64> = self.log_weights.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = raw.iter().sum();
        raw.iter().map(|w| w / total).collect()
    }

    pub fn observe(&mut self, losses: &[f64]) {
        for (lw, l) in self.log_weights.iter_mut().zip(losses) {
            *lw -= self.eta * l;
        }
    }
}

/// Cumulative expected loss of the baseline over a fixed stream.
pub fn hedge_expected_loss(stream: &[Vec<f64>], eta: f64) -> f64 {
    let num = stream.first().map(|g| g.len()).unwrap_or(0);
    let mut hedge = Hedge::new(num, eta);
    let mut total = 0.0;
    for g in stream {
        let w = hedge.weights();
        total += w.iter().zip(g).map(|(wi, gi)| wi * gi).sum::<f64>();
        hedge.observe(g);
    }
    total
}
