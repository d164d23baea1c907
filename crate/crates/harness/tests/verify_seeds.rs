//! The verification suites must pass for any seeding of their random grids,
//! not just the one the acceptance run happens to use.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use multiscale_harness::verify::{
    rademacher_sum_sampler, rademacher_sum_spec, verify_lemma_n2, verify_maximal_inequality,
    verify_perturbation_theorem,
};

#[test]
fn enumeration_suites_pass_across_20_seeds() {
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut grid2 = Vec::new();
        for _ in 0..200 {
            grid2.push((
                [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)],
                [rng.random_range(0.0..5.0), rng.random_range(0.0..5.0)],
            ));
        }
        let report = verify_lemma_n2(&grid2);
        assert!(report.passed, "seed {seed}: {}", report.max_violation);

        for n in 1..=4usize {
            let grid: Vec<(Vec<f64>, Vec<f64>)> = (0..200)
                .map(|_| {
                    (
                        (0..n).map(|_| rng.random_range(-10.0..10.0)).collect(),
                        (0..n).map(|_| rng.random_range(0.0..5.0)).collect(),
                    )
                })
                .collect();
            let report = verify_perturbation_theorem(&grid).unwrap();
            assert!(report.passed, "seed {seed} N={n}: {}", report.max_violation);
        }
    }
}

#[test]
fn maximal_inequality_passes_across_20_seeds() {
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let num = rng.random_range(1..=4);
        let c: Vec<f64> = (0..num).map(|_| rng.random_range(1.0..4.0)).collect();
        let n = rng.random_range(16..64);
        let spec = rademacher_sum_spec(&c, n, vec![1.0 / num as f64; num]);
        let report =
            verify_maximal_inequality(&spec, rademacher_sum_sampler(c, n), 20_000, seed).unwrap();
        assert!(
            report.passed,
            "seed {seed}: estimate {} vs rhs {}",
            report.estimate, report.rhs
        );
    }
}
