//! Loss-function abstraction.
//!
//! Subgradients are hand-coded per loss family; there is no automatic
//! differentiation here. The meta layer only ever needs evaluation, a
//! subgradient, and a Lipschitz constant.

use crate::error::{CoreError, Result};
use crate::point::Point;

/// A convex loss over decision points `D`, with a hand-coded subgradient.
pub trait Loss<D: Point> {
    fn eval(&self, w: &D) -> f64;
    fn subgrad(&self, w: &D) -> D;
    /// Lipschitz constant with respect to the relevant norm.
    fn lipschitz(&self) -> f64;
}

/// `f(w) = <g, w>`.
#[derive(Debug, Clone)]
pub struct LinearLoss<D> {
    pub gradient: D,
}

impl<D: Point> LinearLoss<D> {
    pub fn new(gradient: D) -> Self {
        LinearLoss { gradient }
    }
}

impl<D: Point> Loss<D> for LinearLoss<D> {
    fn eval(&self, w: &D) -> f64 {
        self.gradient.pair(w)
    }

    fn subgrad(&self, _w: &D) -> D {
        self.gradient.clone()
    }

    fn lipschitz(&self) -> f64 {
        self.gradient.norm()
    }
}

/// `f(w) = <g, w> + b`.
#[derive(Debug, Clone)]
pub struct AffineLoss<D> {
    pub gradient: D,
    pub offset: f64,
}

impl<D: Point> AffineLoss<D> {
    pub fn new(gradient: D, offset: f64) -> Self {
        AffineLoss { gradient, offset }
    }
}

impl<D: Point> Loss<D> for AffineLoss<D> {
    fn eval(&self, w: &D) -> f64 {
        self.gradient.pair(w) + self.offset
    }

    fn subgrad(&self, _w: &D) -> D {
        self.gradient.clone()
    }

    fn lipschitz(&self) -> f64 {
        self.gradient.norm()
    }
}

/// `f(w) = |<a, w> - b|`; covers one-dimensional pieces like `|w - 1|`.
#[derive(Debug, Clone)]
pub struct AbsDeviationLoss<D> {
    pub direction: D,
    pub target: f64,
}

impl<D: Point> AbsDeviationLoss<D> {
    pub fn new(direction: D, target: f64) -> Self {
        AbsDeviationLoss { direction, target }
    }
}

impl<D: Point> Loss<D> for AbsDeviationLoss<D> {
    fn eval(&self, w: &D) -> f64 {
        (self.direction.pair(w) - self.target).abs()
    }

    fn subgrad(&self, w: &D) -> D {
        let s = (self.direction.pair(w) - self.target).signum();
        let sign = if self.direction.pair(w) == self.target {
            0.0
        } else {
            s
        };
        let mut g = self.direction.zeros_like();
        g.add_scaled(sign, &self.direction);
        g
    }

    fn lipschitz(&self) -> f64 {
        self.direction.norm()
    }
}

/// A loss shifted so that it vanishes at zero: `f~(w) = f(w) - f(0)`.
/// Subgradients are untouched.
pub struct CenteredLoss<'a, D: Point> {
    inner: &'a dyn Loss<D>,
    offset: f64,
}

impl<'a, D: Point> CenteredLoss<'a, D> {
    pub fn offset(&self) -> f64 {
        self.offset
    }
}

impl<'a, D: Point> Loss<D> for CenteredLoss<'a, D> {
    fn eval(&self, w: &D) -> f64 {
        self.inner.eval(w) - self.offset
    }

    fn subgrad(&self, w: &D) -> D {
        self.inner.subgrad(w)
    }

    fn lipschitz(&self) -> f64 {
        self.inner.lipschitz()
    }
}

/// Center a loss at the origin of the decision set.
///
/// `zero` is the ambient zero element (the decision set must contain it);
/// a non-finite value of `f(0)` is a configuration error.
pub fn center_loss<'a, D: Point>(f: &'a dyn Loss<D>, zero: &D) -> Result<CenteredLoss<'a, D>> {
    let offset = f.eval(zero);
    if !offset.is_finite() {
        return Err(CoreError::Config(
            "loss not evaluable at the zero decision point".into(),
        ));
    }
    Ok(CenteredLoss { inner: f, offset })
}

/// Scalar loss `l(yhat, y)` for the supervised protocol.
pub trait ScalarLoss {
    fn eval(&self, prediction: f64, outcome: f64) -> f64;
    /// Subgradient in the prediction argument.
    fn grad_prediction(&self, prediction: f64, outcome: f64) -> f64;
    /// Lipschitz constant in the prediction over `[-radius, radius]`.
    fn lipschitz_on(&self, radius: f64) -> f64;
}

/// Absolute loss `|yhat - y|`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AbsoluteLoss;

impl ScalarLoss for AbsoluteLoss {
    fn eval(&self, prediction: f64, outcome: f64) -> f64 {
        (prediction - outcome).abs()
    }

    fn grad_prediction(&self, prediction: f64, outcome: f64) -> f64 {
        if prediction == outcome {
            0.0
        } else {
            (prediction - outcome).signum()
        }
    }

    fn lipschitz_on(&self, _radius: f64) -> f64 {
        1.0
    }
}

/// Squared loss `(yhat - y)^2 / 2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HalfSquaredLoss;

impl ScalarLoss for HalfSquaredLoss {
    fn eval(&self, prediction: f64, outcome: f64) -> f64 {
        0.5 * (prediction - outcome) * (prediction - outcome)
    }

    fn grad_prediction(&self, prediction: f64, outcome: f64) -> f64 {
        prediction - outcome
    }

    fn lipschitz_on(&self, radius: f64) -> f64 {
        // |yhat - y| <= radius + sup |y|; callers bound outcomes by the same
        // radius convention used for predictions.
        2.0 * radius
    }
}
