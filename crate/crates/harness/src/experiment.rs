//! Experiment execution: materialize an oblivious stream, play the game for
//! every seed, and emit the CSV rows plus a JSON summary with per-expert
//! certificates and comparator sweeps.

use std::fs;
use std::path::PathBuf;

use multiscale_core::configs::{
    self, banach_nested_config, comparator_range, lp_grid_config, mkl_config, mmw_config,
    pca_config, ConfigSpec,
};
use multiscale_core::kernel::Kernel;
use multiscale_core::ledger::CompensatedSum;
use multiscale_core::loss::{AbsoluteLoss, AffineLoss, LinearLoss};
use multiscale_core::point::{Point, SymMat};
use multiscale_core::{
    LossVector, MultiScaleFtpl, MultiScaleLearning, MultiScaleOco, PerturbationMode, ScaleProfile,
};
use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Adversary, ExperimentConfig, Preset};
use crate::error::{HarnessError, Result};
use crate::report::{self, ReportRow};
use crate::stream::{
    gen_expert_stream, gen_linear_stream, gen_matrix_sign_stream, gen_planted_spike_stream,
    gen_supervised_stream, gen_two_scale_bait_stream, ExpertStreamKind,
};

/// Result of one seed's full game.
#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub rows: Vec<ReportRow>,
    /// Realized play loss `sum_t g_t[i_t]`.
    pub meta_loss: f64,
    /// Per-expert cumulative losses `sum_t g_t[i]`.
    pub expert_losses: Vec<f64>,
    /// Final cumulative loss of each tracked comparator.
    pub comparator_losses: Vec<f64>,
}

impl SeedOutcome {
    /// `sum_t g_t[i_t] - sum_t g_t[i] - B(i)` per expert.
    pub fn certificates(&self, bounds: &[f64]) -> Vec<f64> {
        self.expert_losses
            .iter()
            .zip(bounds)
            .map(|(l, b)| self.meta_loss - l - b)
            .collect()
    }

    /// The strong certificate: play loss minus `min_i (expert loss + B(i))`.
    pub fn strong_certificate(&self, bounds: &[f64]) -> f64 {
        self.certificates(bounds)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Mean and standard error over seeds.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub standard_error: f64,
}

pub fn stat_of(values: &[f64]) -> Stat {
    let n = values.len().max(1) as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Stat {
        mean,
        standard_error: (var / n).sqrt(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateStat {
    pub expert: usize,
    pub bound: f64,
    pub mean: f64,
    pub standard_error: f64,
    /// Whether the seed mean clears `1 + 3 SE`.
    pub within_bound: bool,
}

/// Ratios of measured regret to the oracle-inequality shape
/// `(r + 1) sqrt(n ln((r + 1) L n))`, one per comparator norm.
#[derive(Debug, Clone, Serialize)]
pub struct ShapeFit {
    pub norms: Vec<f64>,
    pub mean_regrets: Vec<f64>,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub stability: f64,
}

/// Per-seed detail echoed into the JSON summary.
#[derive(Debug, Clone, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub meta_loss: f64,
    /// Per-expert certificate values `play - expert_i - B(i)`.
    pub certificates: Vec<f64>,
    /// Final regret against each tracked comparator.
    pub comparator_regrets: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub schema: String,
    pub config: ExperimentConfig,
    pub num_experts: usize,
    pub bounds: Vec<f64>,
    pub seeds_completed: Vec<u64>,
    pub per_seed: Vec<SeedSummary>,
    pub per_expert: Vec<CertificateStat>,
    pub strong_certificate: Stat,
    pub strong_certificate_within_bound: bool,
    pub comparator_names: Vec<String>,
    pub comparator_mean_regrets: Vec<f64>,
    pub shape_fit: Option<ShapeFit>,
    /// Seeds that aborted with a module error.
    pub seed_failures: usize,
    /// Failure messages plus informational notes (comparator capping).
    pub diagnostics: Vec<String>,
}

pub struct RunArtifacts {
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
    pub summary: RunSummary,
}

/// The oracle-inequality denominator for a comparator of norm `r`.
pub fn bound_shape(r: f64, lipschitz: f64, n: usize) -> f64 {
    (r + 1.0) * ((n as f64) * ((r + 1.0) * lipschitz * n as f64).ln()).sqrt()
}

fn running_regret_row(
    seed: u64,
    round: usize,
    expert: usize,
    loss: f64,
    meta_running: f64,
    comparator_running: &[f64],
) -> ReportRow {
    ReportRow {
        seed,
        round,
        expert,
        loss,
        regrets: comparator_running
            .iter()
            .map(|c| meta_running - c)
            .collect(),
    }
}

/// Raw expert game on a fixed stream with per-expert comparators.
pub fn run_expert_game(
    profile: &ScaleProfile,
    stream: &[Vec<f64>],
    mode: PerturbationMode,
    seed: u64,
) -> Result<SeedOutcome> {
    let n = stream.len();
    let num = profile.num_experts();
    let mut state = MultiScaleFtpl::new(profile.clone(), n, mode, seed)?;
    let mut meta = CompensatedSum::new();
    let mut per_expert = vec![CompensatedSum::new(); num];
    let mut rows = Vec::with_capacity(n);
    for (t, g) in stream.iter().enumerate() {
        let decision = state.step()?;
        meta.add(g[decision.chosen]);
        for (acc, &gi) in per_expert.iter_mut().zip(g) {
            acc.add(gi);
        }
        let running: Vec<f64> = per_expert.iter().map(|a| a.total()).collect();
        rows.push(running_regret_row(
            seed,
            t + 1,
            decision.chosen,
            g[decision.chosen],
            meta.total(),
            &running,
        ));
        state.observe(&LossVector::checked(g.clone(), profile)?)?;
    }
    Ok(SeedOutcome {
        seed,
        rows,
        meta_loss: meta.total(),
        expert_losses: per_expert.iter().map(|a| a.total()).collect(),
        comparator_losses: per_expert.iter().map(|a| a.total()).collect(),
    })
}

/// Hindsight comparator decisions for a linear stream: norm-`r` points along
/// the most profitable direction.
fn linear_comparators(stream: &[Vec<f64>], norms: &[f64]) -> Vec<Vec<f64>> {
    let d = stream.first().map(|g| g.len()).unwrap_or(0);
    let mut total = vec![0.0; d];
    for g in stream {
        for (t, gi) in total.iter_mut().zip(g) {
            *t += gi;
        }
    }
    let norm = total.iter().map(|x| x * x).sum::<f64>().sqrt();
    let direction: Vec<f64> = if norm > 0.0 {
        total.iter().map(|x| -x / norm).collect()
    } else {
        let mut e = vec![0.0; d];
        if d > 0 {
            e[0] = 1.0;
        }
        e
    };
    norms
        .iter()
        .map(|r| direction.iter().map(|x| r * x).collect())
        .collect()
}

/// Vector-space OCO game over a preset grid with norm-ball comparators.
pub fn run_vector_game(
    spec: &ConfigSpec,
    dim: usize,
    stream: &[Vec<f64>],
    comparator_norms: &[f64],
    mode: PerturbationMode,
    seed: u64,
) -> Result<SeedOutcome> {
    let handles = configs::instantiate_vector_handles(spec, dim)?;
    let mut meta = MultiScaleOco::register(handles, &spec.prior, stream.len(), mode, seed)?;
    let comparators = linear_comparators(stream, comparator_norms);
    let mut comp_running = vec![CompensatedSum::new(); comparators.len()];
    let mut meta_running = CompensatedSum::new();
    let mut rows = Vec::with_capacity(stream.len());
    for (t, g) in stream.iter().enumerate() {
        let loss = LinearLoss::new(g.clone());
        let outcome = meta.oco_round(&loss)?;
        meta_running.add(outcome.expert_losses[outcome.chosen]);
        for (acc, w) in comp_running.iter_mut().zip(&comparators) {
            acc.add(g.pair(w));
        }
        let running: Vec<f64> = comp_running.iter().map(|a| a.total()).collect();
        rows.push(running_regret_row(
            seed,
            t + 1,
            outcome.chosen,
            outcome.expert_losses[outcome.chosen],
            meta_running.total(),
            &running,
        ));
    }
    Ok(SeedOutcome {
        seed,
        rows,
        meta_loss: meta.ledger().cumulative_meta_loss(),
        expert_losses: meta.ledger().expert_cumulative_losses(),
        comparator_losses: comp_running.iter().map(|a| a.total()).collect(),
    })
}

/// Which matrix game is being played.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFlavor {
    /// Losses `<I - W, Y>`, capped-spectraplex learners.
    Pca,
    /// Losses `<W, Y>`, trace-ball learners.
    TraceBall,
}

/// Hindsight comparators for the matrix games, one per handle constraint.
fn matrix_comparators(
    spec: &ConfigSpec,
    stream: &[SymMat],
    flavor: MatrixFlavor,
) -> Vec<SymMat> {
    let d = stream[0].dim();
    let mut total = SymMat::zeros(d);
    for y in stream {
        total.add_scaled(1.0, y);
    }
    let eig = SymmetricEigen::new(total.as_matrix().clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    spec.handles
        .iter()
        .map(|h| match flavor {
            MatrixFlavor::Pca => {
                // Best rank-k projector: top-k eigenvectors of the total.
                let k = h.radius.round() as usize;
                let mut w = SymMat::zeros(d);
                for &idx in order.iter().take(k.min(d)) {
                    let v: Vec<f64> = (0..d).map(|r| eig.eigenvectors[(r, idx)]).collect();
                    w.add_scaled(1.0, &SymMat::outer(&v));
                }
                w
            }
            MatrixFlavor::TraceBall => {
                // Minimize <W, total> over the trace ball of radius R.
                let &worst = order.last().unwrap();
                if eig.eigenvalues[worst] < 0.0 {
                    let v: Vec<f64> = (0..d).map(|r| eig.eigenvectors[(r, worst)]).collect();
                    let mut w = SymMat::zeros(d);
                    w.add_scaled(h.radius, &SymMat::outer(&v));
                    w
                } else {
                    SymMat::zeros(d)
                }
            }
        })
        .collect()
}

/// Matrix OCO game (online PCA or trace-ball prediction).
pub fn run_matrix_game(
    spec: &ConfigSpec,
    stream: &[SymMat],
    flavor: MatrixFlavor,
    mode: PerturbationMode,
    seed: u64,
) -> Result<SeedOutcome> {
    let handles = configs::instantiate_matrix_handles(spec)?;
    let mut meta = MultiScaleOco::register(handles, &spec.prior, stream.len(), mode, seed)?;
    let comparators = matrix_comparators(spec, stream, flavor);
    let mut comp_running = vec![CompensatedSum::new(); comparators.len()];
    let mut meta_running = CompensatedSum::new();
    let mut rows = Vec::with_capacity(stream.len());
    for (t, y) in stream.iter().enumerate() {
        let outcome = match flavor {
            MatrixFlavor::Pca => {
                let mut grad = y.zeros_like();
                grad.add_scaled(-1.0, y);
                let loss = AffineLoss::new(grad, y.trace());
                meta.oco_round(&loss)?
            }
            MatrixFlavor::TraceBall => {
                let loss = LinearLoss::new(y.clone());
                meta.oco_round(&loss)?
            }
        };
        meta_running.add(outcome.expert_losses[outcome.chosen]);
        for (acc, w) in comp_running.iter_mut().zip(&comparators) {
            // Centered comparator loss matches the ledger's centered play.
            let centered = match flavor {
                MatrixFlavor::Pca => -w.pair(y),
                MatrixFlavor::TraceBall => w.pair(y),
            };
            acc.add(centered);
        }
        let running: Vec<f64> = comp_running.iter().map(|a| a.total()).collect();
        rows.push(running_regret_row(
            seed,
            t + 1,
            outcome.chosen,
            outcome.expert_losses[outcome.chosen],
            meta_running.total(),
            &running,
        ));
    }
    Ok(SeedOutcome {
        seed,
        rows,
        meta_loss: meta.ledger().cumulative_meta_loss(),
        expert_losses: meta.ledger().expert_cumulative_losses(),
        comparator_losses: comp_running.iter().map(|a| a.total()).collect(),
    })
}

/// Supervised game with the absolute loss; the zero predictor is the tracked
/// comparator (its centered loss is identically zero).
pub fn run_supervised_game(
    spec: &ConfigSpec,
    dim: usize,
    stream: &[(Vec<f64>, f64)],
    mode: PerturbationMode,
    seed: u64,
) -> Result<SeedOutcome> {
    let handles = configs::instantiate_supervised_handles(spec, dim)?;
    let mut meta = MultiScaleLearning::register(
        handles,
        &spec.prior,
        Box::new(AbsoluteLoss),
        stream.len(),
        mode,
        seed,
    )?;
    let mut meta_running = CompensatedSum::new();
    let mut rows = Vec::with_capacity(stream.len());
    for (t, (x, y)) in stream.iter().enumerate() {
        let outcome = meta.learning_round(x, |_| *y)?;
        meta_running.add(outcome.expert_losses[outcome.chosen]);
        rows.push(running_regret_row(
            seed,
            t + 1,
            outcome.chosen,
            outcome.expert_losses[outcome.chosen],
            meta_running.total(),
            &[0.0],
        ));
    }
    Ok(SeedOutcome {
        seed,
        rows,
        meta_loss: meta.ledger().cumulative_meta_loss(),
        expert_losses: meta.ledger().expert_cumulative_losses(),
        comparator_losses: vec![0.0],
    })
}

/// Everything the dispatcher materializes once per experiment, shared across
/// seeds.
enum PreparedGame {
    Experts {
        profile: ScaleProfile,
        stream: Vec<Vec<f64>>,
    },
    Vector {
        spec: ConfigSpec,
        stream: Vec<Vec<f64>>,
    },
    Matrix {
        spec: ConfigSpec,
        stream: Vec<SymMat>,
        flavor: MatrixFlavor,
    },
    Supervised {
        spec: ConfigSpec,
        stream: Vec<(Vec<f64>, f64)>,
    },
}

fn prepare(cfg: &ExperimentConfig) -> Result<PreparedGame> {
    let n = cfg.horizon;
    match (cfg.preset, &cfg.adversary) {
        (Preset::Experts, Adversary::TwoScaleBait) => {
            let eta = crate::hedge::Hedge::tuned_eta(n, 2, cfg.scale_big);
            let stream = gen_two_scale_bait_stream(cfg.scale_big, n, eta);
            let profile = ScaleProfile::with_uniform_prior(vec![1.0, cfg.scale_big])
                .map_err(HarnessError::Core)?;
            Ok(PreparedGame::Experts { profile, stream })
        }
        (Preset::Experts, Adversary::Experts(kind)) => {
            let kind = ExpertStreamKind::from_name(kind).ok_or_else(|| {
                HarnessError::Config(format!("unknown expert stream `{kind}`"))
            })?;
            let profile = ScaleProfile::with_uniform_prior(cfg.scales.clone())
                .map_err(HarnessError::Core)?;
            let stream = gen_expert_stream(kind, cfg.scales.as_slice(), n, cfg.stream_seed);
            Ok(PreparedGame::Experts { profile, stream })
        }
        (
            Preset::Banach,
            Adversary::LinearNoise | Adversary::LinearBias | Adversary::AlternatingDrift,
        ) => {
            let spec =
                banach_nested_config(cfg.lipschitz, cfg.lambda, n, cfg.max_experts)?;
            let stream = linear_stream_for(cfg);
            Ok(PreparedGame::Vector { spec, stream })
        }
        (
            Preset::LpGrid,
            Adversary::LinearNoise | Adversary::LinearBias | Adversary::AlternatingDrift,
        ) => {
            let lipschitz = cfg.lipschitz;
            let spec = lp_grid_config(cfg.delta, cfg.dim, |_| lipschitz, n, cfg.max_experts)?;
            let stream = linear_stream_for(cfg);
            Ok(PreparedGame::Vector { spec, stream })
        }
        (Preset::Pca, Adversary::PlantedSpike) => {
            let spec = pca_config(cfg.dim, n)?;
            let (_, stream) = gen_planted_spike_stream(cfg.dim, n, 0.9, cfg.stream_seed);
            Ok(PreparedGame::Matrix {
                spec,
                stream,
                flavor: MatrixFlavor::Pca,
            })
        }
        (Preset::Mmw, Adversary::MatrixSigns) => {
            let spec = mmw_config(cfg.dim, n, cfg.max_experts)?;
            let stream = gen_matrix_sign_stream(cfg.dim, n, cfg.stream_seed);
            Ok(PreparedGame::Matrix {
                spec,
                stream,
                flavor: MatrixFlavor::TraceBall,
            })
        }
        (Preset::Mkl, Adversary::SupervisedLinear) => {
            let spec = mkl_config(
                &[(Kernel::Linear, 1.0), (Kernel::Rbf { gamma: 1.0 }, 1.0)],
                n,
                cfg.max_experts,
            )?;
            let mut target = vec![0.0; cfg.dim];
            if cfg.dim > 0 {
                let scale = cfg.bias_scale / (cfg.dim as f64).sqrt();
                for t in target.iter_mut() {
                    *t = scale;
                }
            }
            let clip = cfg.bias_scale + 3.0 * cfg.noise_scale + 1.0;
            let stream = gen_supervised_stream(
                cfg.dim,
                n,
                &target,
                cfg.noise_scale,
                clip,
                cfg.stream_seed,
            );
            Ok(PreparedGame::Supervised { spec, stream })
        }
        (preset, adversary) => Err(HarnessError::Config(format!(
            "preset `{}` cannot play adversary `{}`",
            preset.name(),
            adversary.name()
        ))),
    }
}

fn linear_stream_for(cfg: &ExperimentConfig) -> Vec<Vec<f64>> {
    if matches!(cfg.adversary, Adversary::AlternatingDrift) {
        return crate::stream::gen_alternating_drift_stream(cfg.dim, cfg.horizon, cfg.bias_scale);
    }
    let mut bias = vec![0.0; cfg.dim];
    if cfg.dim > 0 && matches!(cfg.adversary, Adversary::LinearBias) {
        let scale = cfg.bias_scale / (cfg.dim as f64).sqrt();
        for b in bias.iter_mut() {
            *b = scale;
        }
    }
    gen_linear_stream(
        cfg.dim,
        cfg.horizon,
        cfg.lipschitz,
        &bias,
        cfg.noise_scale,
        cfg.stream_seed,
    )
}

fn comparator_names(cfg: &ExperimentConfig, game: &PreparedGame) -> Vec<String> {
    match game {
        PreparedGame::Experts { profile, .. } => (0..profile.num_experts())
            .map(|i| format!("expert_{i}"))
            .collect(),
        PreparedGame::Vector { .. } => cfg
            .comparators
            .iter()
            .map(|r| format!("norm_{r}"))
            .collect(),
        PreparedGame::Matrix { spec, flavor, .. } => spec
            .handles
            .iter()
            .map(|h| match flavor {
                MatrixFlavor::Pca => format!("rank_{}", h.radius.round() as usize),
                MatrixFlavor::TraceBall => format!("trace_{}", h.radius),
            })
            .collect(),
        PreparedGame::Supervised { .. } => vec!["zero".into()],
    }
}

/// Bounds `B(i)` for the experiment's expert set.
fn bounds_for(cfg: &ExperimentConfig, game: &PreparedGame) -> Result<Vec<f64>> {
    let profile = match game {
        PreparedGame::Experts { profile, .. } => profile.clone(),
        PreparedGame::Vector { spec, .. }
        | PreparedGame::Matrix { spec, .. }
        | PreparedGame::Supervised { spec, .. } => {
            let raw: Vec<f64> = spec
                .handles
                .iter()
                .map(|h| h.radius * h.lipschitz)
                .collect();
            ScaleProfile::lifted(raw, spec.prior.clone())
                .map_err(HarnessError::Core)?
                .0
        }
    };
    let state = MultiScaleFtpl::new(profile, cfg.horizon, cfg.mode, 0)?;
    Ok(state.bounds().to_vec())
}

/// Comparator norms beyond this range cannot tighten a regret bound of the
/// sweep's shape, so the sweep stops there. Falls back to `e^n` when the
/// closed form overflows; above the float range the cap is a no-op.
fn sweep_norm_cap(lipschitz: f64, n: usize) -> f64 {
    let cap = comparator_range(lipschitz, n, lipschitz * (n as f64).sqrt(), 0.5);
    if cap.is_finite() {
        cap
    } else {
        (n as f64).exp()
    }
}

/// Run the configured experiment: all seeds (in parallel), one CSV of rows,
/// one JSON summary. A failing seed is recorded as a diagnostic; the other
/// seeds still complete.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    let mut cfg = cfg.clone();
    let mut diagnostics = Vec::new();
    let cap = sweep_norm_cap(cfg.lipschitz, cfg.horizon);
    if cap.is_finite() {
        let before = cfg.comparators.len();
        cfg.comparators.retain(|&r| r <= cap);
        if cfg.comparators.len() < before {
            diagnostics.push(format!(
                "dropped {} comparator norms beyond the sweep range {cap:.3e}",
                before - cfg.comparators.len()
            ));
        }
    }
    let cfg = &cfg;
    let game = prepare(cfg)?;
    let names = comparator_names(cfg, &game);
    let bounds = bounds_for(cfg, &game)?;

    let results: Vec<(u64, std::result::Result<SeedOutcome, String>)> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let outcome = match &game {
                PreparedGame::Experts { profile, stream } => {
                    run_expert_game(profile, stream, cfg.mode, seed)
                }
                PreparedGame::Vector { spec, stream } => {
                    run_vector_game(spec, cfg.dim, stream, &cfg.comparators, cfg.mode, seed)
                }
                PreparedGame::Matrix {
                    spec,
                    stream,
                    flavor,
                } => run_matrix_game(spec, stream, *flavor, cfg.mode, seed),
                PreparedGame::Supervised { spec, stream } => {
                    run_supervised_game(spec, cfg.dim, stream, cfg.mode, seed)
                }
            };
            (seed, outcome.map_err(|e| e.to_string()))
        })
        .collect();

    let mut outcomes = Vec::new();
    let mut seed_failures = 0;
    for (seed, result) in results {
        match result {
            Ok(o) => outcomes.push(o),
            Err(e) => {
                seed_failures += 1;
                diagnostics.push(format!("seed {seed}: {e}"));
            }
        }
    }
    if outcomes.is_empty() {
        return Err(HarnessError::Config(format!(
            "every seed failed: {diagnostics:?}"
        )));
    }

    let num_experts = bounds.len();
    let per_expert: Vec<CertificateStat> = (0..num_experts)
        .map(|i| {
            let vals: Vec<f64> = outcomes
                .iter()
                .map(|o| o.meta_loss - o.expert_losses[i] - bounds[i])
                .collect();
            let s = stat_of(&vals);
            CertificateStat {
                expert: i,
                bound: bounds[i],
                mean: s.mean,
                standard_error: s.standard_error,
                within_bound: s.mean <= 1.0 + 3.0 * s.standard_error,
            }
        })
        .collect();
    let strong: Vec<f64> = outcomes
        .iter()
        .map(|o| o.strong_certificate(&bounds))
        .collect();
    let strong_stat = stat_of(&strong);

    let comparator_mean_regrets: Vec<f64> = (0..names.len())
        .map(|j| {
            let vals: Vec<f64> = outcomes
                .iter()
                .map(|o| o.meta_loss - o.comparator_losses[j])
                .collect();
            stat_of(&vals).mean
        })
        .collect();

    let shape_fit = match &game {
        PreparedGame::Vector { .. } => {
            let ratios: Vec<f64> = cfg
                .comparators
                .iter()
                .zip(&comparator_mean_regrets)
                .map(|(r, reg)| reg / bound_shape(*r, cfg.lipschitz, cfg.horizon))
                .collect();
            let max_ratio = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            Some(ShapeFit {
                norms: cfg.comparators.clone(),
                mean_regrets: comparator_mean_regrets.clone(),
                ratios,
                max_ratio,
                min_ratio,
                stability: max_ratio / min_ratio,
            })
        }
        _ => None,
    };

    let mut rows = Vec::new();
    for o in &outcomes {
        rows.extend(o.rows.iter().cloned());
    }

    fs::create_dir_all(&cfg.out_dir).map_err(|e| HarnessError::io(&cfg.out_dir, e))?;
    let csv_path = cfg.out_dir.join(format!("{}.csv", cfg.name));
    let json_path = cfg.out_dir.join(format!("{}.json", cfg.name));
    report::write_csv(&csv_path, &names, &rows)?;

    let per_seed: Vec<SeedSummary> = outcomes
        .iter()
        .map(|o| SeedSummary {
            seed: o.seed,
            meta_loss: o.meta_loss,
            certificates: o.certificates(&bounds),
            comparator_regrets: o
                .comparator_losses
                .iter()
                .map(|c| o.meta_loss - c)
                .collect(),
        })
        .collect();

    let summary = RunSummary {
        schema: "msftpl-report-v1".into(),
        config: cfg.clone(),
        num_experts,
        bounds,
        seeds_completed: outcomes.iter().map(|o| o.seed).collect(),
        per_seed,
        per_expert,
        strong_certificate: strong_stat,
        strong_certificate_within_bound: strong_stat.mean
            <= 1.0 + 3.0 * strong_stat.standard_error,
        comparator_names: names,
        comparator_mean_regrets,
        shape_fit,
        seed_failures,
        diagnostics,
    };
    report::write_json(&json_path, &summary)?;

    Ok(RunArtifacts {
        csv_path,
        json_path,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config(
        preset: Preset,
        adversary: Adversary,
        out: &tempfile::TempDir,
    ) -> ExperimentConfig {
        ExperimentConfig {
            preset,
            adversary,
            horizon: 12,
            dim: 3,
            seeds: vec![1, 2],
            max_experts: Some(4),
            comparators: vec![0.5, 2.0],
            out_dir: out.path().to_path_buf(),
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn single_expert_single_round() {
        let profile = ScaleProfile::with_uniform_prior(vec![1.0]).unwrap();
        let stream = vec![vec![0.25]];
        let o = run_expert_game(&profile, &stream, PerturbationMode::GaussianTail, 5).unwrap();
        assert_eq!(o.rows.len(), 1);
        assert_eq!(o.rows[0].expert, 0);
        assert_eq!(o.meta_loss, 0.25);
        // Regret against the only expert is zero.
        assert_eq!(o.rows[0].regrets[0], 0.0);
    }

    #[test]
    fn vector_game_runs_and_aggregates() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(Preset::Banach, Adversary::LinearNoise, &dir);
        let artifacts = run_experiment(&cfg).unwrap();
        assert!(artifacts.summary.diagnostics.is_empty());
        assert_eq!(artifacts.summary.seeds_completed, vec![1, 2]);
        assert_eq!(artifacts.summary.num_experts, 4);
        assert!(artifacts.csv_path.exists());
        assert!(artifacts.json_path.exists());
        assert!(artifacts.summary.shape_fit.is_some());
    }

    #[test]
    fn incompatible_preset_adversary_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(Preset::Banach, Adversary::MatrixSigns, &dir);
        assert!(run_experiment(&cfg).is_err());
    }

    #[test]
    fn reruns_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_config(Preset::Experts, Adversary::Experts("iid-signs".into()), &dir);
        cfg.scales = vec![1.0, 8.0];
        let a = run_experiment(&cfg).unwrap();
        let first = std::fs::read(&a.csv_path).unwrap();
        let b = run_experiment(&cfg).unwrap();
        let second = std::fs::read(&b.csv_path).unwrap();
        assert_eq!(first, second);
        let ja = std::fs::read(&a.json_path).unwrap();
        let jb = std::fs::read(&b.json_path).unwrap();
        assert_eq!(ja, jb);
    }

    #[test]
    fn row_cardinality() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_config(Preset::Experts, Adversary::Experts("alternating".into()), &dir);
        cfg.scales = vec![1.0, 2.0];
        cfg.horizon = 3;
        cfg.seeds = vec![1, 2];
        let artifacts = run_experiment(&cfg).unwrap();
        let body = std::fs::read_to_string(&artifacts.csv_path).unwrap();
        // Header plus 2 seeds x 3 rounds.
        assert_eq!(body.lines().count(), 1 + 6);
    }
}
