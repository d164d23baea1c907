//! Aggregation of sub-algorithms through the multi-scale expert core.
//!
//! The OCO wrapper queries every sub-algorithm for its iterate, plays the
//! iterate of the expert sampled by the perturbed-leader core, centers the
//! incoming loss at zero, and feeds every sub-algorithm its own gradient.
//! The supervised wrapper does the same with scalar predictions and a
//! centered scalar loss. All handles are updated every round: their regret
//! bounds are full-information.

use crate::error::{CoreError, Result};
use crate::ftpl::{FtplDecision, MultiScaleFtpl, PerturbationMode};
use crate::kernel::KernelOgd;
use crate::ledger::RegretLedger;
use crate::loss::{center_loss, Loss, ScalarLoss};
use crate::matrix::{MatrixExpGradient, MatrixMultWeights};
use crate::mirror::MirrorDescent;
use crate::point::{Point, SymMat};
use crate::scale::{LossVector, ScaleProfile, SimplexWeights};

/// A full-information online learner over decision space `D`, exposed to the
/// meta-algorithm as (current iterate, gradient feedback).
pub trait OcoSubAlgorithm<D: Point> {
    fn iterate(&self) -> D;
    fn receive_gradient(&mut self, gradient: &D) -> Result<()>;
}

impl OcoSubAlgorithm<Vec<f64>> for MirrorDescent {
    fn iterate(&self) -> Vec<f64> {
        MirrorDescent::iterate(self).to_vec()
    }

    fn receive_gradient(&mut self, gradient: &Vec<f64>) -> Result<()> {
        self.step(gradient)
    }
}

impl OcoSubAlgorithm<SymMat> for MatrixExpGradient {
    fn iterate(&self) -> SymMat {
        MatrixExpGradient::iterate(self).clone()
    }

    fn receive_gradient(&mut self, gradient: &SymMat) -> Result<()> {
        // Online PCA losses are <I - W, Y>; the gradient is -Y.
        let mut y = gradient.zeros_like();
        y.add_scaled(-1.0, gradient);
        self.step(y.as_matrix())
    }
}

impl OcoSubAlgorithm<SymMat> for MatrixMultWeights {
    fn iterate(&self) -> SymMat {
        MatrixMultWeights::iterate(self).clone()
    }

    fn receive_gradient(&mut self, gradient: &SymMat) -> Result<()> {
        self.step(gradient.as_matrix())
    }
}

/// A sub-algorithm with its declared set radius and loss Lipschitz constant.
/// The expert scale is `max(1, radius * lipschitz)`.
pub struct OcoHandle<D: Point> {
    pub radius: f64,
    pub lipschitz: f64,
    pub learner: Box<dyn OcoSubAlgorithm<D>>,
}

impl<D: Point> OcoHandle<D> {
    pub fn new(radius: f64, lipschitz: f64, learner: Box<dyn OcoSubAlgorithm<D>>) -> Self {
        OcoHandle {
            radius,
            lipschitz,
            learner,
        }
    }
}

/// Outcome of one OCO round, for audit and reporting.
#[derive(Debug, Clone)]
pub struct OcoRound<D> {
    pub round: usize,
    pub chosen: usize,
    pub weights: SimplexWeights,
    pub played: D,
    /// Centered losses of every sub-algorithm, `g_t[i] = f~(w_t^i)`.
    pub expert_losses: Vec<f64>,
    /// The centering constant `f(0)` removed this round.
    pub center_offset: f64,
}

fn build_profile(raw_scales: Vec<f64>, prior: &[f64]) -> Result<(ScaleProfile, Vec<usize>)> {
    if raw_scales.is_empty() {
        return Err(CoreError::Config("no sub-algorithms registered".into()));
    }
    if prior.len() != raw_scales.len() {
        return Err(CoreError::DimensionMismatch {
            expected: raw_scales.len(),
            got: prior.len(),
        });
    }
    ScaleProfile::lifted(raw_scales, prior.to_vec())
}

/// MultiScaleOCO: aggregation of OCO sub-algorithms over one decision space.
pub struct MultiScaleOco<D: Point> {
    handles: Vec<OcoHandle<D>>,
    ftpl: MultiScaleFtpl,
    ledger: RegretLedger,
    zero: D,
    lifted: Vec<usize>,
}

impl<D: Point> MultiScaleOco<D> {
    /// Build the meta state: scales `c_i = max(1, R_i L_i)`, bounds from the
    /// closed form, prior as given.
    pub fn register(
        handles: Vec<OcoHandle<D>>,
        prior: &[f64],
        horizon: usize,
        mode: PerturbationMode,
        seed: u64,
    ) -> Result<Self> {
        let raw: Vec<f64> = handles.iter().map(|h| h.radius * h.lipschitz).collect();
        let (profile, lifted) = build_profile(raw, prior)?;
        let ftpl = MultiScaleFtpl::new(profile, horizon, mode, seed)?;
        let zero = handles[0].learner.iterate().zeros_like();
        let num = handles.len();
        Ok(MultiScaleOco {
            handles,
            ftpl,
            ledger: RegretLedger::new(num),
            zero,
            lifted,
        })
    }

    /// Indices whose raw scale `R_i L_i < 1` was lifted to 1.
    pub fn lifted_scales(&self) -> &[usize] {
        &self.lifted
    }

    pub fn ftpl(&self) -> &MultiScaleFtpl {
        &self.ftpl
    }

    pub fn ledger(&self) -> &RegretLedger {
        &self.ledger
    }

    pub fn num_handles(&self) -> usize {
        self.handles.len()
    }

    pub fn add_comparator(&mut self, descriptor: impl Into<String>) -> usize {
        self.ledger.add_comparator(descriptor)
    }

    pub fn record_comparator_loss(&mut self, comparator: usize, loss: f64) {
        self.ledger.record_comparator_loss(comparator, loss);
    }

    /// Current iterate of one sub-algorithm (for comparator construction and
    /// tests).
    pub fn handle_iterate(&self, i: usize) -> D {
        self.handles[i].learner.iterate()
    }

    /// Play one round against loss `f`.
    pub fn oco_round(&mut self, f: &dyn Loss<D>) -> Result<OcoRound<D>> {
        let round = self.ftpl.current_round();
        let iterates: Vec<D> = self.handles.iter().map(|h| h.learner.iterate()).collect();
        let decision: FtplDecision = self.ftpl.step()?;
        let centered = center_loss(f, &self.zero)?;

        let mut expert_losses = Vec::with_capacity(iterates.len());
        for (i, w) in iterates.iter().enumerate() {
            let v = centered.eval(w);
            if !v.is_finite() {
                return Err(CoreError::NonFinite(format!(
                    "centered loss of handle {i} is {v}"
                ))
                .in_round(round));
            }
            expert_losses.push(v);
        }
        let loss_vec = LossVector::checked(expert_losses.clone(), self.ftpl.profile())
            .map_err(|e| match e {
                CoreError::ScaleViolation {
                    index,
                    value,
                    bound,
                } => CoreError::AssumptionViolated {
                    handle: index,
                    value,
                    bound,
                }
                .in_round(round),
                other => other.in_round(round),
            })?;

        self.ledger
            .record_round(round, decision.chosen, expert_losses[decision.chosen]);
        self.ledger.record_expert_losses(&expert_losses)?;
        self.ftpl.observe(&loss_vec)?;

        for (i, (handle, w)) in self.handles.iter_mut().zip(&iterates).enumerate() {
            let gradient = centered.subgrad(w);
            handle
                .learner
                .receive_gradient(&gradient)
                .map_err(|e| CoreError::InRound {
                    round,
                    source: Box::new(CoreError::Config(format!("handle {i}: {e}"))),
                })?;
        }

        Ok(OcoRound {
            round,
            chosen: decision.chosen,
            weights: decision.weights,
            played: iterates[decision.chosen].clone(),
            expert_losses,
            center_offset: centered.offset(),
        })
    }
}

/// A scalar-prediction learner for the supervised protocol.
pub trait SupervisedSubAlgorithm {
    fn predict(&mut self, context: &[f64]) -> f64;
    fn update(&mut self, context: &[f64], loss_grad_at_prediction: f64) -> Result<()>;
}

impl SupervisedSubAlgorithm for KernelOgd {
    fn predict(&mut self, context: &[f64]) -> f64 {
        KernelOgd::predict(self, context)
    }

    fn update(&mut self, context: &[f64], loss_grad_at_prediction: f64) -> Result<()> {
        self.step(context, loss_grad_at_prediction)
    }
}

/// Linear predictor `<w, x>` backed by mirror descent; turns any vector
/// learner into a supervised one.
pub struct LinearPredictor {
    md: MirrorDescent,
}

impl LinearPredictor {
    pub fn new(md: MirrorDescent) -> Self {
        LinearPredictor { md }
    }
}

impl SupervisedSubAlgorithm for LinearPredictor {
    fn predict(&mut self, context: &[f64]) -> f64 {
        self.md.iterate().iter().zip(context).map(|(w, x)| w * x).sum()
    }

    fn update(&mut self, context: &[f64], loss_grad_at_prediction: f64) -> Result<()> {
        let g: Vec<f64> = context.iter().map(|x| loss_grad_at_prediction * x).collect();
        self.md.step(&g)
    }
}

/// Supervised handle: declared prediction range and loss Lipschitz constant
/// on that range.
pub struct LearningHandle {
    pub radius: f64,
    pub lipschitz: f64,
    pub learner: Box<dyn SupervisedSubAlgorithm>,
}

impl LearningHandle {
    pub fn new(radius: f64, lipschitz: f64, learner: Box<dyn SupervisedSubAlgorithm>) -> Self {
        LearningHandle {
            radius,
            lipschitz,
            learner,
        }
    }
}

/// Outcome of one supervised round.
#[derive(Debug, Clone)]
pub struct LearningRound {
    pub round: usize,
    pub chosen: usize,
    pub weights: SimplexWeights,
    pub prediction: f64,
    pub outcome: f64,
    pub expert_losses: Vec<f64>,
}

/// MultiScaleLearning: supervised aggregation with a centered scalar loss.
pub struct MultiScaleLearning {
    handles: Vec<LearningHandle>,
    ftpl: MultiScaleFtpl,
    ledger: RegretLedger,
    loss: Box<dyn ScalarLoss>,
    lifted: Vec<usize>,
}

impl MultiScaleLearning {
    pub fn register(
        handles: Vec<LearningHandle>,
        prior: &[f64],
        loss: Box<dyn ScalarLoss>,
        horizon: usize,
        mode: PerturbationMode,
        seed: u64,
    ) -> Result<Self> {
        let raw: Vec<f64> = handles
            .iter()
            .map(|h| h.radius * h.lipschitz)
            .collect();
        let (profile, lifted) = build_profile(raw, prior)?;
        let ftpl = MultiScaleFtpl::new(profile, horizon, mode, seed)?;
        let num = handles.len();
        Ok(MultiScaleLearning {
            handles,
            ftpl,
            ledger: RegretLedger::new(num),
            loss,
            lifted,
        })
    }

    pub fn lifted_scales(&self) -> &[usize] {
        &self.lifted
    }

    pub fn ftpl(&self) -> &MultiScaleFtpl {
        &self.ftpl
    }

    pub fn ledger(&self) -> &RegretLedger {
        &self.ledger
    }

    /// Play one supervised round: commit to a prediction for `x`, then learn
    /// from the outcome the callback reveals.
    pub fn learning_round(
        &mut self,
        context: &[f64],
        outcome: impl FnOnce(f64) -> f64,
    ) -> Result<LearningRound> {
        let round = self.ftpl.current_round();
        let mut predictions = Vec::with_capacity(self.handles.len());
        for (i, h) in self.handles.iter_mut().enumerate() {
            let p = h.learner.predict(context);
            if !p.is_finite() || p.abs() > h.radius * (1.0 + 1e-9) {
                return Err(CoreError::AssumptionViolated {
                    handle: i,
                    value: p,
                    bound: h.radius,
                }
                .in_round(round));
            }
            predictions.push(p);
        }
        let decision = self.ftpl.step()?;
        let prediction = predictions[decision.chosen];
        let y = outcome(prediction);
        if !y.is_finite() {
            return Err(CoreError::NonFinite(format!("outcome {y}")).in_round(round));
        }

        let base = self.loss.eval(0.0, y);
        let expert_losses: Vec<f64> = predictions
            .iter()
            .map(|&p| self.loss.eval(p, y) - base)
            .collect();
        let loss_vec = LossVector::checked(expert_losses.clone(), self.ftpl.profile())
            .map_err(|e| match e {
                CoreError::ScaleViolation {
                    index,
                    value,
                    bound,
                } => CoreError::AssumptionViolated {
                    handle: index,
                    value,
                    bound,
                }
                .in_round(round),
                other => other.in_round(round),
            })?;

        self.ledger
            .record_round(round, decision.chosen, expert_losses[decision.chosen]);
        self.ledger.record_expert_losses(&expert_losses)?;
        self.ftpl.observe(&loss_vec)?;

        // Handle updates in ascending index order, for reproducibility.
        for (h, &p) in self.handles.iter_mut().zip(&predictions) {
            let grad = self.loss.grad_prediction(p, y);
            h.learner.update(context, grad)?;
        }

        Ok(LearningRound {
            round,
            chosen: decision.chosen,
            weights: decision.weights,
            prediction,
            outcome: y,
            expert_losses,
        })
    }
}
