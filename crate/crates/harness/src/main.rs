//! Command-line front end: `run`, `verify`, `sweep`, `presets`.
//! Exit code 0 if and only if every invoked check passed.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use multiscale_core::configs::{
    banach_nested_config, lp_grid_config, mkl_config, mmw_config, pca_config, ConfigSpec,
};
use multiscale_core::kernel::Kernel;
use multiscale_harness::experiment::{run_experiment, RunArtifacts};
use multiscale_harness::report;
use multiscale_harness::verify::{
    rademacher_sum_sampler, rademacher_sum_spec, verify_lemma_n2, verify_maximal_inequality,
    verify_perturbation_theorem,
};
use multiscale_harness::{ExperimentConfig, HarnessError};

#[derive(Parser)]
#[command(
    name = "multiscale",
    about = "Multi-scale expert aggregation: experiments and verification suites"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play a configured experiment; writes one CSV of rows and a JSON summary.
    Run {
        /// Flat key-value config file (see README for the grammar).
        #[arg(long)]
        config: PathBuf,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the seed list (repeatable).
        #[arg(long)]
        seed: Vec<u64>,
        /// Override the expert-grid truncation.
        #[arg(long)]
        max_experts: Option<usize>,
        /// Override the Monte Carlo sample count.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Exact-enumeration and Monte Carlo verification suites.
    Verify {
        /// Monte Carlo samples per maximal-inequality check.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Seed for the random grids and samplers.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Comparator-grid oracle-inequality sweep; checks the bound-shape
    /// stability of the measured regrets.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the preset expert grids, or emit one as JSON.
    Presets {
        /// Preset to emit (banach | lp-grid | pca | mmw | mkl).
        #[arg(long)]
        emit: Option<String>,
        /// File to write the emitted preset to (stdout otherwise).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        d: usize,
        #[arg(long)]
        max_experts: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool, HarnessError> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            max_experts,
            samples,
        } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(out) = out {
                cfg.out_dir = out;
            }
            if !seed.is_empty() {
                cfg.seeds = seed;
            }
            if max_experts.is_some() {
                cfg.max_experts = max_experts;
            }
            if let Some(s) = samples {
                cfg.samples = s;
            }
            let artifacts = run_experiment(&cfg)?;
            print_run(&artifacts);
            Ok(artifacts.summary.seed_failures == 0)
        }
        Command::Verify { samples, seed } => run_verify(samples, seed),
        Command::Sweep { config, out } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(out) = out {
                cfg.out_dir = out;
            }
            let artifacts = run_experiment(&cfg)?;
            print_run(&artifacts);
            let ok = match &artifacts.summary.shape_fit {
                Some(fit) => {
                    println!(
                        "sweep: ratio stability max/min = {:.3} (max {:.4}, min {:.4})",
                        fit.stability, fit.max_ratio, fit.min_ratio
                    );
                    fit.stability <= 4.0
                }
                None => {
                    eprintln!("sweep: config does not produce a norm-comparator sweep");
                    false
                }
            };
            Ok(ok && artifacts.summary.seed_failures == 0)
        }
        Command::Presets {
            emit,
            out,
            n,
            d,
            max_experts,
        } => run_presets(emit, out, n, d, max_experts),
    }
}

fn print_run(artifacts: &RunArtifacts) {
    let s = &artifacts.summary;
    println!(
        "run `{}`: {} experts, {} seeds completed, rows -> {}",
        s.config.name,
        s.num_experts,
        s.seeds_completed.len(),
        artifacts.csv_path.display()
    );
    println!(
        "strong certificate: mean {:.4} (se {:.4}) vs threshold 1 -> {}",
        s.strong_certificate.mean,
        s.strong_certificate.standard_error,
        if s.strong_certificate_within_bound {
            "ok"
        } else {
            "exceeded"
        }
    );
    for d in &s.diagnostics {
        eprintln!("diagnostic: {d}");
    }
}

fn run_verify(samples: usize, seed: u64) -> Result<bool, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all_ok = true;

    let mut grid2 = vec![
        ([0.0, 0.0], [1.0, 1.0]),
        ([10.0, 0.0], [1.0, 1.0]),
        ([0.3, -0.7], [0.0, 0.0]),
    ];
    for _ in 0..1000 {
        grid2.push((
            [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)],
            [rng.random_range(0.0..5.0), rng.random_range(0.0..5.0)],
        ));
    }
    let report = verify_lemma_n2(&grid2);
    println!(
        "{}: {} cases, max violation {:.3e} -> {}",
        report.name,
        report.cases,
        report.max_violation,
        if report.passed { "PASS" } else { "FAIL" }
    );
    all_ok &= report.passed;

    for n in 1..=4usize {
        let mut grid = Vec::new();
        for _ in 0..1000 {
            let w: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
            let c: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
            grid.push((w, c));
        }
        let report = verify_perturbation_theorem(&grid)?;
        println!(
            "{} (N = {}): {} cases, max violation {:.3e} -> {}",
            report.name,
            n,
            report.cases,
            report.max_violation,
            if report.passed { "PASS" } else { "FAIL" }
        );
        all_ok &= report.passed;
    }

    for case in 0..10 {
        let num = rng.random_range(1..=6);
        let c: Vec<f64> = (0..num).map(|_| rng.random_range(1.0..5.0)).collect();
        let n = rng.random_range(16..100);
        let raw: Vec<f64> = (0..num).map(|_| rng.random_range(0.2..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let pi: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let spec = rademacher_sum_spec(&c, n, pi);
        let report = verify_maximal_inequality(
            &spec,
            rademacher_sum_sampler(c, n),
            samples,
            seed + 1000 + case,
        )?;
        println!(
            "maximal inequality case {case}: estimate {:.4} (se {:.4}) vs rhs {:.4} -> {}",
            report.estimate,
            report.standard_error,
            report.rhs,
            if report.passed { "PASS" } else { "FAIL" }
        );
        all_ok &= report.passed;
    }

    Ok(all_ok)
}

fn run_presets(
    emit: Option<String>,
    out: Option<PathBuf>,
    n: usize,
    d: usize,
    max_experts: Option<usize>,
) -> Result<bool, HarnessError> {
    let build = |name: &str| -> Result<ConfigSpec, HarnessError> {
        let spec = match name {
            "banach" => banach_nested_config(1.0, 1.0, n, max_experts)?,
            "lp-grid" => lp_grid_config(0.25, d.max(2), |_| 1.0, n, max_experts)?,
            "pca" => pca_config(d.max(2), n)?,
            "mmw" => mmw_config(d, n, max_experts)?,
            "mkl" => mkl_config(
                &[(Kernel::Linear, 1.0), (Kernel::Rbf { gamma: 1.0 }, 1.0)],
                n,
                max_experts,
            )?,
            other => {
                return Err(HarnessError::BadInput(format!("unknown preset `{other}`")));
            }
        };
        Ok(spec)
    };
    match emit {
        Some(name) => {
            let spec = build(&name)?;
            let body = report::to_json_17(&spec)?;
            match out {
                Some(path) => std::fs::write(&path, body)
                    .map_err(|e| HarnessError::io(path.clone(), e))?,
                None => println!("{body}"),
            }
            Ok(true)
        }
        None => {
            for name in ["banach", "lp-grid", "pca", "mmw", "mkl"] {
                let spec = build(name)?;
                println!(
                    "{name}: {} handles, horizon {}, note: {}",
                    spec.num_handles(),
                    spec.horizon,
                    spec.notes
                );
            }
            Ok(true)
        }
    }
}
