//! Scale profiles, loss vectors and simplex weights for the expert game.
//!
//! Expert `i` incurs losses in `[-c_i, c_i]`; the prior `pi` weights the
//! experts. Everything downstream (the bound `B(i)`, the saddle problem, the
//! sampling step) is parameterized by this pair.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Relative slack admitted when checking `|g[i]| <= c_i`.
pub const SCALE_TOLERANCE: f64 = 1e-12;

/// Per-expert loss ranges `c` with a prior `pi` over the experts.
///
/// Invariants enforced at construction: equal lengths, every `c_i >= 1`,
/// strictly positive prior summing to one within `1e-12`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleProfile {
    c: Vec<f64>,
    pi: Vec<f64>,
}

impl ScaleProfile {
    pub fn new(c: Vec<f64>, pi: Vec<f64>) -> Result<Self> {
        if c.is_empty() {
            return Err(CoreError::InvalidProfile("no experts".into()));
        }
        if c.len() != pi.len() {
            return Err(CoreError::DimensionMismatch {
                expected: c.len(),
                got: pi.len(),
            });
        }
        for (i, &ci) in c.iter().enumerate() {
            if !ci.is_finite() || ci < 1.0 {
                return Err(CoreError::InvalidProfile(format!(
                    "scale c[{i}] = {ci} must be finite and >= 1"
                )));
            }
        }
        let mut sum = 0.0;
        for (i, &p) in pi.iter().enumerate() {
            if !p.is_finite() || p <= 0.0 {
                return Err(CoreError::InvalidProfile(format!(
                    "prior pi[{i}] = {p} must be positive"
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(CoreError::InvalidProfile(format!(
                "prior sums to {sum}, expected 1 within 1e-12"
            )));
        }
        Ok(ScaleProfile { c, pi })
    }

    /// Like [`ScaleProfile::new`] but lifts sub-unit scales to 1 instead of
    /// rejecting them. Returns the indices that were lifted so callers can
    /// record a warning.
    pub fn lifted(raw_scales: Vec<f64>, pi: Vec<f64>) -> Result<(Self, Vec<usize>)> {
        let mut lifted = Vec::new();
        let mut c = raw_scales;
        for (i, ci) in c.iter_mut().enumerate() {
            if !ci.is_finite() || *ci <= 0.0 {
                return Err(CoreError::InvalidProfile(format!(
                    "scale c[{i}] = {ci} must be finite and positive"
                )));
            }
            if *ci < 1.0 {
                *ci = 1.0;
                lifted.push(i);
            }
        }
        Ok((ScaleProfile::new(c, pi)?, lifted))
    }

    /// Uniform prior over `c.len()` experts.
    pub fn with_uniform_prior(c: Vec<f64>) -> Result<Self> {
        let n = c.len();
        if n == 0 {
            return Err(CoreError::InvalidProfile("no experts".into()));
        }
        ScaleProfile::new(c, vec![1.0 / n as f64; n])
    }

    pub fn num_experts(&self) -> usize {
        self.c.len()
    }

    pub fn scales(&self) -> &[f64] {
        &self.c
    }

    pub fn prior(&self) -> &[f64] {
        &self.pi
    }

    pub fn max_scale(&self) -> f64 {
        self.c.iter().cloned().fold(f64::MIN, f64::max)
    }

    /// Validate a raw loss vector against this profile.
    pub fn check_loss(&self, g: &[f64]) -> Result<()> {
        if g.len() != self.c.len() {
            return Err(CoreError::DimensionMismatch {
                expected: self.c.len(),
                got: g.len(),
            });
        }
        for (i, (&gi, &ci)) in g.iter().zip(&self.c).enumerate() {
            if !gi.is_finite() || gi.abs() > ci * (1.0 + SCALE_TOLERANCE) {
                return Err(CoreError::ScaleViolation {
                    index: i,
                    value: gi,
                    bound: ci,
                });
            }
        }
        Ok(())
    }
}

/// One round of expert losses, validated against a [`ScaleProfile`] on
/// ingestion.
#[derive(Debug, Clone, PartialEq)]
pub struct LossVector {
    g: Vec<f64>,
}

impl LossVector {
    pub fn checked(g: Vec<f64>, profile: &ScaleProfile) -> Result<Self> {
        profile.check_loss(&g)?;
        Ok(LossVector { g })
    }

    pub fn values(&self) -> &[f64] {
        &self.g
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }
}

/// A probability vector over the experts.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexWeights {
    p: Vec<f64>,
}

impl SimplexWeights {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(CoreError::InvalidProfile("empty weight vector".into()));
        }
        let mut sum = 0.0;
        for (i, &w) in p.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(CoreError::InvalidProfile(format!(
                    "weight p[{i}] = {w} must be non-negative"
                )));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CoreError::InvalidProfile(format!(
                "weights sum to {sum}, expected 1 within 1e-9"
            )));
        }
        Ok(SimplexWeights { p })
    }

    pub fn weights(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// Inverse-CDF sample in ascending index order: the smallest index `k`
    /// with `u < p_0 + ... + p_k`.
    pub fn sample_inverse_cdf(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, &w) in self.p.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        self.p.len() - 1
    }
}
