//! Kernelized online gradient descent on an RKHS norm ball.
//!
//! The predictor is kept in dual form, `f = sum_j alpha_j K(x_j, .)`; a step
//! appends the new context with coefficient `-eta * grad` and rescales the
//! coefficients when the RKHS norm leaves the ball (the Bregman projection
//! for the half-squared RKHS norm is radial, so the scaling is exact).
//! Support grows unboundedly; fine at desk scale.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Positive-definite kernels available to the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    /// `K(x, y) = <x, y>`.
    Linear,
    /// `K(x, y) = exp(-gamma ||x - y||^2)`.
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Kernel::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
            Kernel::Rbf { gamma } => {
                let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * sq).exp()
            }
        }
    }

    /// Upper bound on `sqrt(K(x, x))` over the unit context ball.
    pub fn bound_on_unit_ball(&self) -> f64 {
        match self {
            Kernel::Linear => 1.0,
            Kernel::Rbf { .. } => 1.0,
        }
    }
}

/// Online gradient descent in the RKHS of `kernel`, constrained to the
/// radius-`radius` norm ball.
#[derive(Debug, Clone)]
pub struct KernelOgd {
    kernel: Kernel,
    eta: f64,
    radius: f64,
    support: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    norm_sq: f64,
}

impl KernelOgd {
    pub fn new(kernel: Kernel, eta: f64, radius: f64) -> Result<Self> {
        if !(eta > 0.0) || !(radius > 0.0) {
            return Err(CoreError::Config(
                "kernel learner needs positive eta and radius".into(),
            ));
        }
        Ok(KernelOgd {
            kernel,
            eta,
            radius,
            support: Vec::new(),
            alpha: Vec::new(),
            norm_sq: 0.0,
        })
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    pub fn rkhs_norm(&self) -> f64 {
        self.norm_sq.max(0.0).sqrt()
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.alpha)
            .map(|(xj, aj)| aj * self.kernel.eval(xj, x))
            .sum()
    }

    /// Gradient step at context `x` with the loss derivative evaluated at the
    /// current prediction, followed by the radial RKHS-ball projection.
    ///
    /// The running norm accounting is exact for a positive-definite kernel; a
    /// significantly negative squared norm is a witness that the kernel is
    /// not positive definite and is rejected.
    pub fn step(&mut self, x: &[f64], loss_grad_at_prediction: f64) -> Result<()> {
        if !loss_grad_at_prediction.is_finite() {
            return Err(CoreError::NonFinite("loss gradient".into()));
        }
        if loss_grad_at_prediction == 0.0 {
            return Ok(());
        }
        let beta = -self.eta * loss_grad_at_prediction;
        let fx = self.predict(x);
        let kxx = self.kernel.eval(x, x);
        self.norm_sq += 2.0 * beta * fx + beta * beta * kxx;
        self.support.push(x.to_vec());
        self.alpha.push(beta);
        if self.norm_sq < -1e-8 {
            return Err(CoreError::KernelNotPd {
                min_eigenvalue: self.norm_sq,
            });
        }
        if self.norm_sq > self.radius * self.radius {
            let scale = self.radius / self.norm_sq.sqrt();
            for a in self.alpha.iter_mut() {
                *a *= scale;
            }
            self.norm_sq = self.radius * self.radius;
        }
        Ok(())
    }
}
