//! Experiment configuration: a flat, human-readable key-value file.
//!
//! Grammar (one setting per line):
//!
//! ```text
//!   # comment            -- '#' starts a comment, anywhere in a line
//!   key = value          -- keys are snake_case; whitespace is trimmed
//!   seeds = 1,2,3        -- lists are comma-separated
//! ```
//!
//! The first setting must be `schema = msftpl-v1`. Unknown keys are
//! rejected. See the repository README for the full key reference.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use multiscale_core::PerturbationMode;
use serde::Serialize;

use crate::error::{HarnessError, Result};

pub const SCHEMA_VERSION: &str = "msftpl-v1";

/// Which preset grid the experiment plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Preset {
    /// Nested Euclidean balls with mirror descent.
    Banach,
    /// The lp-exponent grid crossed with nested radii.
    LpGrid,
    /// Online PCA trace budgets.
    Pca,
    /// Trace-norm ball doublings.
    Mmw,
    /// Multiple-kernel RKHS ladders (supervised).
    Mkl,
    /// Raw expert game straight on the perturbed-leader core.
    Experts,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Banach => "banach",
            Preset::LpGrid => "lp-grid",
            Preset::Pca => "pca",
            Preset::Mmw => "mmw",
            Preset::Mkl => "mkl",
            Preset::Experts => "experts",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "banach" => Some(Preset::Banach),
            "lp-grid" => Some(Preset::LpGrid),
            "pca" => Some(Preset::Pca),
            "mmw" => Some(Preset::Mmw),
            "mkl" => Some(Preset::Mkl),
            "experts" => Some(Preset::Experts),
            _ => None,
        }
    }

    pub const ALL: [Preset; 6] = [
        Preset::Banach,
        Preset::LpGrid,
        Preset::Pca,
        Preset::Mmw,
        Preset::Mkl,
        Preset::Experts,
    ];
}

/// Adversary choice; which ones are admissible depends on the preset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Adversary {
    /// Mean-zero noise gradients, dual norm capped at the Lipschitz bound.
    LinearNoise,
    /// Biased gradients along a fixed direction plus noise.
    LinearBias,
    /// Sign alternation with a small net drift (`bias_scale`); the
    /// oracle-inequality sweep adversary.
    AlternatingDrift,
    /// Two-expert bait-and-switch against a range-tuned Hedge.
    TwoScaleBait,
    /// Expert-level stream family (see `stream::ExpertStreamKind`).
    Experts(String),
    /// PSD matrices concentrating on a planted direction.
    PlantedSpike,
    /// Random signed rank-one matrices.
    MatrixSigns,
    /// Supervised pairs from a linear target with label noise.
    SupervisedLinear,
}

impl Adversary {
    pub fn name(&self) -> String {
        match self {
            Adversary::LinearNoise => "linear-noise".into(),
            Adversary::LinearBias => "linear-bias".into(),
            Adversary::AlternatingDrift => "alternating-drift".into(),
            Adversary::TwoScaleBait => "two-scale-bait".into(),
            Adversary::Experts(kind) => format!("experts-{kind}"),
            Adversary::PlantedSpike => "planted-spike".into(),
            Adversary::MatrixSigns => "matrix-signs".into(),
            Adversary::SupervisedLinear => "supervised-linear".into(),
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "linear-noise" => Some(Adversary::LinearNoise),
            "linear-bias" => Some(Adversary::LinearBias),
            "alternating-drift" => Some(Adversary::AlternatingDrift),
            "two-scale-bait" => Some(Adversary::TwoScaleBait),
            "planted-spike" => Some(Adversary::PlantedSpike),
            "matrix-signs" => Some(Adversary::MatrixSigns),
            "supervised-linear" => Some(Adversary::SupervisedLinear),
            other => other
                .strip_prefix("experts-")
                .map(|k| Adversary::Experts(k.to_string())),
        }
    }
}

/// Everything one experiment run needs.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub preset: Preset,
    pub adversary: Adversary,
    pub horizon: usize,
    pub dim: usize,
    pub seeds: Vec<u64>,
    pub stream_seed: u64,
    /// Comparator norm grid for the sweep columns.
    pub comparators: Vec<f64>,
    pub lipschitz: f64,
    pub lambda: f64,
    pub delta: f64,
    pub noise_scale: f64,
    pub bias_scale: f64,
    /// Large-expert scale for the two-scale game.
    pub scale_big: f64,
    /// Expert ranges for the raw expert game.
    pub scales: Vec<f64>,
    pub max_experts: Option<usize>,
    pub samples: usize,
    pub mode: PerturbationMode,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "experiment".into(),
            preset: Preset::Banach,
            adversary: Adversary::LinearNoise,
            horizon: 100,
            dim: 5,
            seeds: vec![1],
            stream_seed: 7777,
            comparators: vec![0.1, 1.0, 10.0, 100.0],
            lipschitz: 1.0,
            lambda: 1.0,
            delta: 0.25,
            noise_scale: 1.0,
            bias_scale: 0.0,
            scale_big: 100.0,
            scales: vec![
                1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0,
            ],
            max_experts: None,
            samples: 100_000,
            mode: PerturbationMode::GaussianTail,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if map.insert(key.clone(), value).is_some() {
                return Err(HarnessError::Config(format!("duplicate key `{key}`")));
            }
        }

        let schema = map
            .remove("schema")
            .ok_or_else(|| HarnessError::Config("missing `schema`".into()))?;
        if schema != SCHEMA_VERSION {
            return Err(HarnessError::Config(format!(
                "schema `{schema}` not supported; expected `{SCHEMA_VERSION}`"
            )));
        }

        let mut cfg = ExperimentConfig::default();
        let mut take = |key: &str| map.remove(key);

        if let Some(v) = take("name") {
            cfg.name = v;
        }
        if let Some(v) = take("preset") {
            cfg.preset = Preset::from_name(&v)
                .ok_or_else(|| HarnessError::Config(format!("unknown preset `{v}`")))?;
        }
        if let Some(v) = take("adversary") {
            cfg.adversary = Adversary::from_name(&v)
                .ok_or_else(|| HarnessError::Config(format!("unknown adversary `{v}`")))?;
        }
        if let Some(v) = take("n") {
            cfg.horizon = parse_num(&v, "n")?;
        }
        if let Some(v) = take("d") {
            cfg.dim = parse_num(&v, "d")?;
        }
        if let Some(v) = take("seeds") {
            cfg.seeds = parse_list(&v, "seeds")?;
        }
        if let Some(v) = take("stream_seed") {
            cfg.stream_seed = parse_num(&v, "stream_seed")?;
        }
        if let Some(v) = take("comparators") {
            cfg.comparators = parse_list(&v, "comparators")?;
        }
        if let Some(v) = take("lipschitz") {
            cfg.lipschitz = parse_num(&v, "lipschitz")?;
        }
        if let Some(v) = take("lambda") {
            cfg.lambda = parse_num(&v, "lambda")?;
        }
        if let Some(v) = take("delta") {
            cfg.delta = parse_num(&v, "delta")?;
        }
        if let Some(v) = take("noise_scale") {
            cfg.noise_scale = parse_num(&v, "noise_scale")?;
        }
        if let Some(v) = take("bias_scale") {
            cfg.bias_scale = parse_num(&v, "bias_scale")?;
        }
        if let Some(v) = take("scale_c") {
            cfg.scale_big = parse_num(&v, "scale_c")?;
        }
        if let Some(v) = take("scales") {
            cfg.scales = parse_list(&v, "scales")?;
        }
        if let Some(v) = take("max_experts") {
            cfg.max_experts = Some(parse_num(&v, "max_experts")?);
        }
        if let Some(v) = take("samples") {
            cfg.samples = parse_num(&v, "samples")?;
        }
        if let Some(v) = take("mode") {
            cfg.mode = match v.as_str() {
                "gaussian" => PerturbationMode::GaussianTail,
                "rademacher" => PerturbationMode::RademacherExact,
                other => {
                    return Err(HarnessError::Config(format!(
                        "unknown mode `{other}` (gaussian | rademacher)"
                    )))
                }
            };
        }
        if let Some(v) = take("out") {
            cfg.out_dir = PathBuf::from(v);
        }

        if let Some((key, _)) = map.into_iter().next() {
            return Err(HarnessError::Config(format!("unknown key `{key}`")));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("seeds must be non-empty".into()));
        }
        if self.horizon == 0 {
            return Err(HarnessError::Config("n must be at least 1".into()));
        }
        Ok(())
    }

    /// The flat file form of this config (round-trips through `parse`).
    pub fn to_flat_string(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("schema = {SCHEMA_VERSION}\n"));
        s.push_str(&format!("name = {}\n", self.name));
        s.push_str(&format!("preset = {}\n", self.preset.name()));
        s.push_str(&format!("adversary = {}\n", self.adversary.name()));
        s.push_str(&format!("n = {}\n", self.horizon));
        s.push_str(&format!("d = {}\n", self.dim));
        s.push_str(&format!("seeds = {}\n", join(&self.seeds)));
        s.push_str(&format!("stream_seed = {}\n", self.stream_seed));
        s.push_str(&format!("comparators = {}\n", join(&self.comparators)));
        s.push_str(&format!("lipschitz = {}\n", self.lipschitz));
        s.push_str(&format!("lambda = {}\n", self.lambda));
        s.push_str(&format!("delta = {}\n", self.delta));
        s.push_str(&format!("noise_scale = {}\n", self.noise_scale));
        s.push_str(&format!("bias_scale = {}\n", self.bias_scale));
        s.push_str(&format!("scale_c = {}\n", self.scale_big));
        s.push_str(&format!("scales = {}\n", join(&self.scales)));
        if let Some(m) = self.max_experts {
            s.push_str(&format!("max_experts = {m}\n"));
        }
        s.push_str(&format!("samples = {}\n", self.samples));
        let mode = match self.mode {
            PerturbationMode::GaussianTail => "gaussian",
            PerturbationMode::RademacherExact => "rademacher",
        };
        s.push_str(&format!("mode = {mode}\n"));
        s.push_str(&format!("out = {}\n", self.out_dir.display()));
        s
    }
}

fn parse_num<T: std::str::FromStr>(v: &str, key: &str) -> Result<T> {
    v.parse()
        .map_err(|_| HarnessError::Config(format!("key `{key}`: cannot parse `{v}`")))
}

fn parse_list<T: std::str::FromStr>(v: &str, key: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(s, key))
        .collect()
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
