//! Every preset grid must round-trip through registration and play a
//! conforming stream without range errors, across seeds and adversaries.

use multiscale_harness::{Adversary, ExperimentConfig, Preset};

fn play(preset: Preset, adversary: Adversary, dim: usize, extra: impl FnOnce(&mut ExperimentConfig)) {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig {
        name: format!("{}-roundtrip", preset.name()),
        preset,
        adversary,
        horizon: 30,
        dim,
        seeds: (0..20).collect(),
        max_experts: Some(4),
        out_dir: dir.path().to_path_buf(),
        ..ExperimentConfig::default()
    };
    extra(&mut cfg);
    let artifacts = multiscale_harness::experiment::run_experiment(&cfg).unwrap();
    assert_eq!(
        artifacts.summary.seed_failures, 0,
        "{}: {:?}",
        cfg.name, artifacts.summary.diagnostics
    );
    assert_eq!(artifacts.summary.seeds_completed.len(), 20);
}

#[test]
fn banach_round_trip() {
    play(Preset::Banach, Adversary::LinearNoise, 4, |_| {});
    play(Preset::Banach, Adversary::LinearBias, 4, |cfg| {
        cfg.bias_scale = 0.5;
    });
    play(Preset::Banach, Adversary::AlternatingDrift, 4, |cfg| {
        cfg.bias_scale = 0.02;
    });
}

#[test]
fn lp_grid_round_trip() {
    play(Preset::LpGrid, Adversary::LinearNoise, 6, |cfg| {
        cfg.max_experts = Some(3);
    });
}

#[test]
fn pca_round_trip() {
    play(Preset::Pca, Adversary::PlantedSpike, 6, |_| {});
}

#[test]
fn mmw_round_trip() {
    play(Preset::Mmw, Adversary::MatrixSigns, 4, |_| {});
}

#[test]
fn mkl_round_trip() {
    play(Preset::Mkl, Adversary::SupervisedLinear, 3, |cfg| {
        cfg.bias_scale = 0.4;
        cfg.noise_scale = 0.1;
        cfg.max_experts = Some(3);
    });
}

#[test]
fn expert_streams_round_trip() {
    for kind in ["iid-signs", "drifting-means", "alternating", "hidden-good", "sawtooth"] {
        play(
            Preset::Experts,
            Adversary::Experts(kind.into()),
            1,
            |cfg| {
                cfg.scales = vec![1.0, 4.0, 16.0];
            },
        );
    }
    play(Preset::Experts, Adversary::TwoScaleBait, 1, |cfg| {
        cfg.scale_big = 50.0;
    });
}
