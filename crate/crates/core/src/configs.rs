//! Preset expert grids: nested norm balls, the lp-norm grid, online PCA
//! budgets, trace-ball doublings, and multiple-kernel nests.
//!
//! Builders produce blueprints, not live learners; instantiation functions
//! turn a blueprint list into handles for the meta layer. Grids use
//! exponentially spaced radii, so any comparator norm `u` in range has a
//! handle radius within a factor `e` above it.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::kernel::{Kernel, KernelOgd};
use crate::matrix::{MatrixExpGradient, MatrixMultWeights};
use crate::meta::{LearningHandle, LinearPredictor, OcoHandle};
use crate::mirror::{MirrorDescent, Regularizer};
use crate::point::SymMat;

/// What to instantiate behind one expert slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LearnerBlueprint {
    MirrorDescent {
        regularizer: Regularizer,
        radius: f64,
        eta: f64,
    },
    MatrixExpGradient {
        dim: usize,
        trace_budget: usize,
        eta: f64,
    },
    MatrixMultWeights {
        dim: usize,
        trace_radius: f64,
        eta: f64,
    },
    KernelOgd {
        kernel: Kernel,
        rkhs_radius: f64,
        eta: f64,
    },
}

/// One expert slot: declared range `radius`, loss Lipschitz constant, and
/// the learner blueprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandleBlueprint {
    pub radius: f64,
    pub lipschitz: f64,
    pub learner: LearnerBlueprint,
}

/// A named collection of expert slots with its prior and horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSpec {
    pub name: String,
    pub handles: Vec<HandleBlueprint>,
    pub prior: Vec<f64>,
    pub horizon: usize,
    pub notes: String,
}

impl ConfigSpec {
    pub fn num_handles(&self) -> usize {
        self.handles.len()
    }
}

fn uniform_prior(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// Nested balls `R_i = e^{i-1}` with mirror descent at
/// `eta_i = (R_i / L) sqrt(lambda / n)`, uniform prior over `n + 1` handles
/// (or `max_experts`, when the comparator range is known a priori).
pub fn banach_nested_config(
    lipschitz: f64,
    lambda: f64,
    n: usize,
    max_experts: Option<usize>,
) -> Result<ConfigSpec> {
    if !(lipschitz > 0.0) || !(lambda > 0.0) || n == 0 {
        return Err(CoreError::Config(
            "need positive Lipschitz bound, positive lambda and n >= 1".into(),
        ));
    }
    let count = max_experts.unwrap_or(n + 1);
    if count == 0 {
        return Err(CoreError::Config("need at least one expert".into()));
    }
    let mut handles = Vec::with_capacity(count);
    for i in 1..=count {
        let radius = ((i - 1) as f64).exp();
        let eta = radius / lipschitz * (lambda / n as f64).sqrt();
        handles.push(HandleBlueprint {
            radius,
            lipschitz,
            learner: LearnerBlueprint::MirrorDescent {
                regularizer: Regularizer::HalfSquaredL2,
                radius,
                eta,
            },
        });
    }
    Ok(ConfigSpec {
        name: "banach-nested".into(),
        prior: uniform_prior(count),
        horizon: n,
        notes: format!("nested l2 balls, L = {lipschitz}, lambda = {lambda}"),
        handles,
    })
}

/// The lp exponent grid `p_k = 1 + delta + min((k-1) eps, 1 - delta)` with
/// `eps = 1 / ln d` and `K = ceil((1 - delta) / eps) + 1`.
pub fn lp_grid_exponents(delta: f64, ln_d: f64) -> Result<Vec<f64>> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CoreError::Config(format!(
            "delta = {delta} must lie strictly inside (0, 1)"
        )));
    }
    if !(ln_d > 0.0) {
        return Err(CoreError::Config("dimension must exceed 1".into()));
    }
    let eps = 1.0 / ln_d;
    let k = ((1.0 - delta) / eps).ceil() as usize + 1;
    Ok((1..=k)
        .map(|i| 1.0 + delta + ((i - 1) as f64 * eps).min(1.0 - delta))
        .collect())
}

/// Grid over lp norms crossed with nested radii: handle `(k, j)` runs mirror
/// descent with the half-squared lp_k regularizer on the radius-`e^{j-1}`
/// ball, `eta = (R_j / L_k) sqrt((p_k - 1) / n)`. Index order is `k`-major.
///
/// `max_radii` truncates the per-exponent radius ladder the same way
/// `max_experts` does for the nested config.
pub fn lp_grid_config(
    delta: f64,
    d: usize,
    lipschitz_of_p: impl Fn(f64) -> f64,
    n: usize,
    max_radii: Option<usize>,
) -> Result<ConfigSpec> {
    if d < 2 {
        return Err(CoreError::Config("lp grid needs d >= 2".into()));
    }
    let exponents = lp_grid_exponents(delta, (d as f64).ln())?;
    let radii_count = max_radii.unwrap_or(n + 1);
    let mut handles = Vec::with_capacity(exponents.len() * radii_count);
    for &p in &exponents {
        let lipschitz = lipschitz_of_p(p);
        if !(lipschitz > 0.0) {
            return Err(CoreError::Config(format!(
                "Lipschitz bound for p = {p} must be positive"
            )));
        }
        let lambda = p - 1.0;
        for j in 1..=radii_count {
            let radius = ((j - 1) as f64).exp();
            let eta = radius / lipschitz * (lambda / n as f64).sqrt();
            handles.push(HandleBlueprint {
                radius,
                lipschitz,
                learner: LearnerBlueprint::MirrorDescent {
                    regularizer: Regularizer::HalfSquaredLp { p },
                    radius,
                    eta,
                },
            });
        }
    }
    let count = handles.len();
    Ok(ConfigSpec {
        name: "lp-grid".into(),
        prior: uniform_prior(count),
        horizon: n,
        notes: format!("lp grid, delta = {delta}, d = {d}, exponents = {exponents:?}"),
        handles,
    })
}

/// Online PCA budgets: `ceil(ln(d / 2)) + 1` exponential trace budgets
/// `e^{i-1}`, rounded to the nearest integer >= 1 because the comparator
/// class is integer-rank projections; budgets exceeding `d / 2` are dropped.
pub fn pca_config(d: usize, n: usize) -> Result<ConfigSpec> {
    if d < 2 {
        return Err(CoreError::Config("online PCA needs d >= 2".into()));
    }
    let count = (d as f64 / 2.0).ln().ceil().max(0.0) as usize + 1;
    let eta = ((d as f64).ln() / n as f64).sqrt();
    let mut handles = Vec::new();
    for i in 1..=count {
        let raw = ((i - 1) as f64).exp();
        let budget = raw.round().max(1.0) as usize;
        if 2 * budget > d {
            continue;
        }
        handles.push(HandleBlueprint {
            radius: budget as f64,
            lipschitz: 1.0,
            learner: LearnerBlueprint::MatrixExpGradient {
                dim: d,
                trace_budget: budget,
                eta,
            },
        });
    }
    if handles.is_empty() {
        return Err(CoreError::Config(format!(
            "no feasible trace budget for d = {d}"
        )));
    }
    let count = handles.len();
    Ok(ConfigSpec {
        name: "pca".into(),
        prior: uniform_prior(count),
        horizon: n,
        notes: format!("online PCA capped-spectraplex budgets, d = {d}"),
        handles,
    })
}

/// Trace-norm ball doublings `R_i = 2^{i-1}` with matrix multiplicative
/// weights, uniform prior.
pub fn mmw_config(d: usize, n: usize, max_experts: Option<usize>) -> Result<ConfigSpec> {
    if d == 0 || n == 0 {
        return Err(CoreError::Config("need d >= 1 and n >= 1".into()));
    }
    let count = max_experts.unwrap_or(n + 1);
    let eta = ((d as f64 + 1.0).ln() / n as f64).sqrt();
    let mut handles = Vec::with_capacity(count);
    for i in 1..=count {
        let radius = 2f64.powi(i as i32 - 1);
        handles.push(HandleBlueprint {
            radius,
            lipschitz: 1.0,
            learner: LearnerBlueprint::MatrixMultWeights {
                dim: d,
                trace_radius: radius,
                eta,
            },
        });
    }
    Ok(ConfigSpec {
        name: "mmw".into(),
        prior: uniform_prior(count),
        horizon: n,
        notes: format!("trace-ball doublings, d = {d}"),
        handles,
    })
}

/// Multiple kernel learning: for kernel `k` (1-based) with bound `B_k`, a
/// ladder of RKHS balls `e^{j-1}` with prior weight proportional to
/// `1 / (n k^2)`. Predictions of the radius-`r` ball stay within `B_k r`,
/// which is the declared handle range. Assumes a 1-Lipschitz loss.
pub fn mkl_config(
    kernels: &[(Kernel, f64)],
    n: usize,
    max_radii: Option<usize>,
) -> Result<ConfigSpec> {
    if kernels.is_empty() {
        return Err(CoreError::Config("need at least one kernel".into()));
    }
    let radii_count = max_radii.unwrap_or(n + 1);
    let mut handles = Vec::new();
    let mut prior = Vec::new();
    for (k_idx, &(kernel, bound)) in kernels.iter().enumerate() {
        if !(bound > 0.0) {
            return Err(CoreError::Config(format!(
                "kernel {k_idx} bound must be positive"
            )));
        }
        let k = (k_idx + 1) as f64;
        for j in 1..=radii_count {
            let rkhs_radius = ((j - 1) as f64).exp();
            let eta = rkhs_radius / (bound * (n as f64).sqrt());
            handles.push(HandleBlueprint {
                radius: bound * rkhs_radius,
                lipschitz: 1.0,
                learner: LearnerBlueprint::KernelOgd {
                    kernel,
                    rkhs_radius,
                    eta,
                },
            });
            prior.push(1.0 / (n as f64 * k * k));
        }
    }
    let total: f64 = prior.iter().sum();
    for w in prior.iter_mut() {
        *w /= total;
    }
    Ok(ConfigSpec {
        name: "mkl".into(),
        prior,
        horizon: n,
        notes: format!("{} kernels, nested RKHS balls", kernels.len()),
        handles,
    })
}

/// Comparator norms beyond `exp((L n / c)^{1 / gamma})` cannot improve a
/// regret bound of shape `c (r + 1) log(r + 1)^gamma`, so sweeps and grids
/// may stop there. Returns a flagged infinity on overflow; the harness caps
/// sweeps at `e^n` in that case.
pub fn comparator_range(lipschitz: f64, n: usize, c: f64, gamma: f64) -> f64 {
    assert!(c > 0.0 && gamma > 0.0, "need c > 0 and gamma > 0");
    let exponent = (lipschitz * n as f64 / c).powf(1.0 / gamma);
    if exponent >= f64::MAX.ln() {
        return f64::INFINITY;
    }
    exponent.exp()
}

/// Build vector-space handles from mirror-descent blueprints.
pub fn instantiate_vector_handles(
    spec: &ConfigSpec,
    dim: usize,
) -> Result<Vec<OcoHandle<Vec<f64>>>> {
    spec.handles
        .iter()
        .map(|h| match &h.learner {
            LearnerBlueprint::MirrorDescent {
                regularizer,
                radius,
                eta,
            } => {
                let md = MirrorDescent::new(dim, *eta, *radius, *regularizer)?;
                Ok(OcoHandle::new(h.radius, h.lipschitz, Box::new(md) as _))
            }
            other => Err(CoreError::Config(format!(
                "not a vector-space blueprint: {other:?}"
            ))),
        })
        .collect()
}

/// Build symmetric-matrix handles from the spectral blueprints.
pub fn instantiate_matrix_handles(spec: &ConfigSpec) -> Result<Vec<OcoHandle<SymMat>>> {
    spec.handles
        .iter()
        .map(|h| match &h.learner {
            LearnerBlueprint::MatrixExpGradient {
                dim,
                trace_budget,
                eta,
            } => {
                let eg = MatrixExpGradient::new(*dim, *trace_budget, *eta)?;
                Ok(OcoHandle::new(h.radius, h.lipschitz, Box::new(eg) as _))
            }
            LearnerBlueprint::MatrixMultWeights {
                dim,
                trace_radius,
                eta,
            } => {
                let mmw = MatrixMultWeights::new(*dim, *trace_radius, *eta)?;
                Ok(OcoHandle::new(h.radius, h.lipschitz, Box::new(mmw) as _))
            }
            other => Err(CoreError::Config(format!(
                "not a matrix-space blueprint: {other:?}"
            ))),
        })
        .collect()
}

/// Build supervised handles: kernel learners directly, mirror descent as a
/// linear predictor.
pub fn instantiate_supervised_handles(
    spec: &ConfigSpec,
    dim: usize,
) -> Result<Vec<LearningHandle>> {
    spec.handles
        .iter()
        .map(|h| match &h.learner {
            LearnerBlueprint::KernelOgd {
                kernel,
                rkhs_radius,
                eta,
            } => {
                let ogd = KernelOgd::new(*kernel, *eta, *rkhs_radius)?;
                Ok(LearningHandle::new(h.radius, h.lipschitz, Box::new(ogd) as _))
            }
            LearnerBlueprint::MirrorDescent {
                regularizer,
                radius,
                eta,
            } => {
                let md = MirrorDescent::new(dim, *eta, *radius, *regularizer)?;
                Ok(LearningHandle::new(
                    h.radius,
                    h.lipschitz,
                    Box::new(LinearPredictor::new(md)) as _,
                ))
            }
            other => Err(CoreError::Config(format!(
                "not a supervised blueprint: {other:?}"
            ))),
        })
        .collect()
}
