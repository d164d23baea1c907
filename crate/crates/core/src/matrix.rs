//! Spectral learners: matrix exponentiated gradient on the capped
//! spectraplex (online PCA) and matrix multiplicative weights on the
//! trace-norm ball.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{CoreError, Result};
use crate::point::SymMat;

/// Max tolerated asymmetry of incoming loss matrices.
pub const ASYMMETRY_TOLERANCE: f64 = 1e-8;
/// Slack on spectral-range validation of loss matrices.
pub const SPECTRAL_TOLERANCE: f64 = 1e-8;

fn symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    (eig.eigenvalues.iter().cloned().collect(), eig.eigenvectors)
}

fn reconstruct(vectors: &DMatrix<f64>, values: &[f64]) -> DMatrix<f64> {
    let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(values));
    vectors * diag * vectors.transpose()
}

fn validate_loss_matrix(
    y: &DMatrix<f64>,
    dim: usize,
    require_psd: bool,
) -> Result<DMatrix<f64>> {
    if y.nrows() != dim || y.ncols() != dim {
        return Err(CoreError::DimensionMismatch {
            expected: dim,
            got: y.nrows(),
        });
    }
    let asym = SymMat::asymmetry(y);
    if asym > ASYMMETRY_TOLERANCE {
        return Err(CoreError::Config(format!(
            "loss matrix asymmetry {asym} exceeds {ASYMMETRY_TOLERANCE}"
        )));
    }
    let sym = (y + y.transpose()) * 0.5;
    let (vals, _) = symmetric_eigen(&sym);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_abs = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if require_psd && min < -SPECTRAL_TOLERANCE {
        return Err(CoreError::Config(format!(
            "loss matrix not positive semidefinite (eigenvalue {min})"
        )));
    }
    if max_abs > 1.0 + SPECTRAL_TOLERANCE {
        return Err(CoreError::Config(format!(
            "loss matrix spectral norm {max_abs} exceeds 1"
        )));
    }
    Ok(sym)
}

/// Relative-entropy projection of non-negative eigenvalues onto the capped
/// simplex slice `{ 0 <= v <= 1, sum v = k }`: scale by a common factor and
/// cap at one (water-filling). Monotone order is preserved.
pub fn capped_spectraplex_project(eigs: &[f64], k: usize) -> Result<Vec<f64>> {
    let d = eigs.len();
    if k == 0 || k > d {
        return Err(CoreError::InfeasibleProjection(format!(
            "trace budget {k} outside 1..={d}"
        )));
    }
    if eigs.iter().any(|&e| e < 0.0 || !e.is_finite()) {
        return Err(CoreError::NonFinite(
            "eigenvalue input must be non-negative and finite".into(),
        ));
    }
    if k == d {
        return Ok(vec![1.0; d]);
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eigs[j].partial_cmp(&eigs[i]).unwrap());
    let sorted: Vec<f64> = order.iter().map(|&i| eigs[i]).collect();

    for capped in 0..k {
        let rest: f64 = sorted[capped..].iter().sum();
        if rest <= 0.0 {
            break;
        }
        let beta = (k - capped) as f64 / rest;
        let below = beta * sorted[capped] <= 1.0 + 1e-12;
        let above = capped == 0 || beta * sorted[capped - 1] >= 1.0 - 1e-12;
        if below && above {
            let out: Vec<f64> = eigs
                .iter()
                .map(|&e| (beta * e).clamp(0.0, 1.0))
                .collect();
            return Ok(out);
        }
    }
    // Degenerate tail: exactly the k largest carry positive mass.
    if sorted[k - 1] > 0.0 {
        let threshold = sorted[k - 1];
        let mut out = vec![0.0; d];
        let mut assigned = 0;
        for &i in &order {
            if assigned < k && eigs[i] >= threshold {
                out[i] = 1.0;
                assigned += 1;
            }
        }
        if assigned == k {
            return Ok(out);
        }
    }
    Err(CoreError::InfeasibleProjection(format!(
        "fewer than {k} positive eigenvalues"
    )))
}

/// Matrix exponentiated gradient over the capped spectraplex
/// `{ 0 <= W <= I, tr W = k }`, for online PCA losses `<I - W, Y>` with
/// `Y >= 0`, `||Y||_sigma <= 1`.
#[derive(Debug, Clone)]
pub struct MatrixExpGradient {
    dim: usize,
    trace_budget: usize,
    eta: f64,
    accumulated: DMatrix<f64>,
    iterate: SymMat,
}

impl MatrixExpGradient {
    pub fn new(dim: usize, trace_budget: usize, eta: f64) -> Result<Self> {
        if trace_budget == 0 || trace_budget > dim {
            return Err(CoreError::Config(format!(
                "trace budget {trace_budget} outside 1..={dim}"
            )));
        }
        if !(eta > 0.0) {
            return Err(CoreError::Config("eta must be positive".into()));
        }
        let iterate = SymMat::new(
            DMatrix::identity(dim, dim) * (trace_budget as f64 / dim as f64),
        );
        Ok(MatrixExpGradient {
            dim,
            trace_budget,
            eta,
            accumulated: DMatrix::zeros(dim, dim),
            iterate,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trace_budget(&self) -> usize {
        self.trace_budget
    }

    pub fn iterate(&self) -> &SymMat {
        &self.iterate
    }

    /// Multiplicative update with the new loss matrix, then projection onto
    /// the capped spectraplex by eigenvalue water-filling.
    pub fn step(&mut self, y: &DMatrix<f64>) -> Result<()> {
        let sym = validate_loss_matrix(y, self.dim, true)?;
        // Gradient of <I - W, Y> in W is -Y; the exponent accumulates +eta Y.
        self.accumulated += sym * self.eta;
        let (vals, vecs) = symmetric_eigen(&self.accumulated);
        let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = vals.iter().map(|v| (v - top).exp()).collect();
        let capped = capped_spectraplex_project(&weights, self.trace_budget)?;
        self.iterate = SymMat::new(reconstruct(&vecs, &capped));
        Ok(())
    }
}

/// Matrix multiplicative weights over the trace ball
/// `{ W >= 0, ||W||_Sigma <= r }`, implemented as exponentiated gradient on
/// an augmented spectraplex of trace `r`; the extra dimension absorbs the
/// slack `||W||_Sigma < r`.
#[derive(Debug, Clone)]
pub struct MatrixMultWeights {
    dim: usize,
    radius: f64,
    eta: f64,
    accumulated: DMatrix<f64>, // (dim + 1) x (dim + 1)
    iterate: SymMat,           // dim x dim block
}

impl MatrixMultWeights {
    pub fn new(dim: usize, radius: f64, eta: f64) -> Result<Self> {
        if dim == 0 {
            return Err(CoreError::Config("zero-dimensional learner".into()));
        }
        if !(radius > 0.0) || !(eta > 0.0) {
            return Err(CoreError::Config(
                "radius and eta must be positive".into(),
            ));
        }
        let init = DMatrix::identity(dim, dim) * (radius / (dim as f64 + 1.0));
        Ok(MatrixMultWeights {
            dim,
            radius,
            eta,
            accumulated: DMatrix::zeros(dim + 1, dim + 1),
            iterate: SymMat::new(init),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn iterate(&self) -> &SymMat {
        &self.iterate
    }

    /// Exponentiated-gradient update for losses `<W, Y>` with
    /// `||Y||_sigma <= 1`.
    pub fn step(&mut self, y: &DMatrix<f64>) -> Result<()> {
        let sym = validate_loss_matrix(y, self.dim, false)?;
        for i in 0..self.dim {
            for j in 0..self.dim {
                self.accumulated[(i, j)] -= self.eta * sym[(i, j)];
            }
        }
        let (vals, vecs) = symmetric_eigen(&self.accumulated);
        let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = vals.iter().map(|v| (v - top).exp()).collect();
        let total: f64 = weights.iter().sum();
        let scaled: Vec<f64> = weights
            .iter()
            .map(|w| self.radius * w / total)
            .collect();
        let full = reconstruct(&vecs, &scaled);
        let block = full.view((0, 0), (self.dim, self.dim)).into_owned();
        self.iterate = SymMat::new(block);
        Ok(())
    }
}
