//! Regret bookkeeping with compensated accumulation.

use crate::error::{CoreError, Result};

/// Neumaier-compensated running sum. Tracks the rounding error of every
/// addition in a second float, so totals stay exact at desk scale
/// (n <= 1e5, moderate magnitudes) and do not depend on insertion order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        CompensatedSum::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// One realized round of the meta-game.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub expert: usize,
    pub loss: f64,
}

/// A comparator tracked alongside the game: a descriptor (for reports) plus
/// its cumulative loss.
#[derive(Debug, Clone)]
pub struct ComparatorRecord {
    pub descriptor: String,
    total: CompensatedSum,
}

impl ComparatorRecord {
    pub fn cumulative_loss(&self) -> f64 {
        self.total.total()
    }
}

/// Per-round losses of the meta-algorithm, cumulative per-expert losses, and
/// comparator sweeps. Single-writer.
#[derive(Debug, Clone, Default)]
pub struct RegretLedger {
    rounds: Vec<RoundRecord>,
    meta_total: CompensatedSum,
    sub_totals: Vec<CompensatedSum>,
    comparators: Vec<ComparatorRecord>,
}

impl RegretLedger {
    pub fn new(num_experts: usize) -> Self {
        RegretLedger {
            rounds: Vec::new(),
            meta_total: CompensatedSum::new(),
            sub_totals: vec![CompensatedSum::new(); num_experts],
            comparators: Vec::new(),
        }
    }

    pub fn add_comparator(&mut self, descriptor: impl Into<String>) -> usize {
        self.comparators.push(ComparatorRecord {
            descriptor: descriptor.into(),
            total: CompensatedSum::new(),
        });
        self.comparators.len() - 1
    }

    pub fn record_round(&mut self, round: usize, expert: usize, loss: f64) {
        self.rounds.push(RoundRecord {
            round,
            expert,
            loss,
        });
        self.meta_total.add(loss);
    }

    /// Accumulate this round's full loss vector into the per-expert totals.
    pub fn record_expert_losses(&mut self, g: &[f64]) -> Result<()> {
        if g.len() != self.sub_totals.len() {
            return Err(CoreError::DimensionMismatch {
                expected: self.sub_totals.len(),
                got: g.len(),
            });
        }
        for (acc, &gi) in self.sub_totals.iter_mut().zip(g) {
            acc.add(gi);
        }
        Ok(())
    }

    pub fn record_comparator_loss(&mut self, comparator: usize, loss: f64) {
        self.comparators[comparator].total.add(loss);
    }

    pub fn rounds(&self) -> &[RoundRecord] {
        &self.rounds
    }

    pub fn num_rounds(&self) -> usize {
        self.rounds.len()
    }

    pub fn cumulative_meta_loss(&self) -> f64 {
        self.meta_total.total()
    }

    pub fn expert_cumulative_losses(&self) -> Vec<f64> {
        self.sub_totals.iter().map(|s| s.total()).collect()
    }

    pub fn comparators(&self) -> &[ComparatorRecord] {
        &self.comparators
    }

    /// Regret of the realized play against a comparator's cumulative loss.
    ///
    /// Panics if no round has been recorded.
    pub fn cumulative_regret(&self, comparator_loss: f64) -> f64 {
        assert!(
            !self.rounds.is_empty(),
            "cumulative_regret on an empty ledger"
        );
        self.cumulative_meta_loss() - comparator_loss
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};

    #[test]
    fn regret_examples() {
        let mut ledger = RegretLedger::new(1);
        for (t, l) in [1.0, 1.0, 1.0].iter().enumerate() {
            ledger.record_round(t + 1, 0, *l);
        }
        assert_eq!(ledger.cumulative_regret(3.0), 0.0);

        let mut ledger = RegretLedger::new(1);
        ledger.record_round(1, 0, 0.0);
        ledger.record_round(2, 0, 0.0);
        assert_eq!(ledger.cumulative_regret(-2.0), 2.0);

        // 100 rounds of 0.5 against a comparator at 40: 50 - 40 = 10.
        let mut ledger = RegretLedger::new(1);
        for t in 1..=100 {
            ledger.record_round(t, 0, 0.5);
        }
        assert_eq!(ledger.cumulative_regret(40.0), 10.0);
    }

    #[test]
    fn meta_total_matches_recorded_rounds() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut ledger = RegretLedger::new(2);
        let mut losses = Vec::new();
        for t in 1..=1000 {
            let l: f64 = rng.random_range(-1000.0..1000.0);
            losses.push(l);
            ledger.record_round(t, 0, l);
        }
        let mut check = CompensatedSum::new();
        for l in &losses {
            check.add(*l);
        }
        assert_eq!(ledger.cumulative_meta_loss(), check.total());
    }

    #[test]
    fn totals_are_permutation_independent() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let n = rng.random_range(2..400);
            let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-1000.0..1000.0)).collect();
            let mut shuffled = xs.clone();
            shuffled.shuffle(&mut rng);
            let mut a = CompensatedSum::new();
            let mut b = CompensatedSum::new();
            for x in &xs {
                a.add(*x);
            }
            for x in &shuffled {
                b.add(*x);
            }
            assert_eq!(a.total(), b.total());
        }
    }

    #[test]
    #[should_panic]
    fn regret_requires_rounds() {
        let ledger = RegretLedger::new(1);
        let _ = ledger.cumulative_regret(0.0);
    }
}
