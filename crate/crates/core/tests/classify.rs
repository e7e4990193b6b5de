use margin_core::analysis::MixtureBenchmark;
use margin_core::classify::*;
use margin_core::kernels::{self, Kernel, Point};
use margin_core::losses::Loss;
use margin_core::optim::Backend;
use margin_core::rng;
use proptest::prelude::*;
use rand::Rng;

fn pts(v: &[&[f64]]) -> Vec<Point> {
    v.iter().map(|p| Point::Real(p.to_vec())).collect()
}

/// Exhaustive minimum of the objective over `[-5, 5]ⁿ` with step 0.05.
fn grid_minimum(data: &LabeledDataset, kernel: &Kernel, loss: Loss, lambda: f64) -> f64 {
    let n = data.len();
    let k = kernels::gram(kernel, data.points()).unwrap();
    let grid: Vec<f64> = (0..=200).map(|i| -5.0 + 0.05 * i as f64).collect();
    let mut best = f64::INFINITY;
    let mut idx = vec![0usize; n];
    loop {
        let c: Vec<f64> = idx.iter().map(|&i| grid[i]).collect();
        best = best.min(objective_with_gram(&k, data.labels(), loss, lambda, &c));
        let mut pos = 0;
        loop {
            if pos == n {
                return best;
            }
            idx[pos] += 1;
            if idx[pos] < grid.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

#[test]
fn training_matches_brute_force_grid() {
    let sets = [
        (pts(&[&[0.5]]), vec![1.0]),
        (pts(&[&[-1.0], &[1.0]]), vec![-1.0, 1.0]),
        (pts(&[&[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]]), vec![1.0, -1.0, 1.0]),
    ];
    for (points, labels) in sets {
        let data = LabeledDataset::new(points, labels).unwrap();
        for kernel in [Kernel::Linear, Kernel::gaussian(1.0).unwrap()] {
            for loss in [Loss::Hinge, Loss::Quadratic] {
                let lambda = 0.5;
                let fit = fit(&data, &TrainConfig::new(kernel, loss, lambda)).unwrap();
                let grid = grid_minimum(&data, &kernel, loss, lambda);
                let trained = fit.optimization.objective;
                assert!(
                    (trained - grid).abs() <= 1e-2,
                    "n={} {kernel} {loss}: {trained} vs {grid}",
                    data.len()
                );
            }
        }
    }
}

#[test]
fn separable_pair_is_classified() {
    let data = LabeledDataset::new(pts(&[&[-1.0], &[1.0]]), vec![-1.0, 1.0]).unwrap();
    let model = train(&data, &TrainConfig::new(Kernel::Linear, Loss::Hinge, 0.1)).unwrap();
    assert_eq!(model.predict(&Point::Real(vec![-1.0])).unwrap(), -1.0);
    assert_eq!(model.predict(&Point::Real(vec![1.0])).unwrap(), 1.0);
}

#[test]
fn hinge_is_sparser_than_quadratic() {
    let mix = MixtureBenchmark::symmetric_1d(1.0);
    let g = Kernel::gaussian(1.0).unwrap();
    let n = 200;
    let lambda = 1.0 / (n as f64).sqrt();
    let mut diffs: Vec<f64> = (0..20)
        .map(|seed| {
            let data = mix.sample(n, seed).unwrap();
            let sf = |loss| {
                train(&data, &TrainConfig::new(g, loss, lambda))
                    .unwrap()
                    .support_fraction(DEFAULT_SUPPORT_THRESHOLD)
            };
            sf(Loss::Quadratic) - sf(Loss::Hinge)
        })
        .collect();
    diffs.sort_by(f64::total_cmp);
    assert!(diffs[10] > 0.0, "{diffs:?}");
}

#[test]
fn low_rank_gram_tracks_dense_training() {
    let mix = MixtureBenchmark::symmetric_1d(1.0);
    let data = mix.sample(300, 4).unwrap();
    let g = Kernel::gaussian(1.0).unwrap();
    let dense = fit(&data, &TrainConfig::new(g, Loss::Logistic, 0.05)).unwrap();
    let mut cfg = TrainConfig::new(g, Loss::Logistic, 0.05);
    cfg.gram = GramMode::LowRank { relative_tol: 1e-12 };
    let low = fit(&data, &cfg).unwrap();
    let exact = regularized_objective(&data, &g, Loss::Logistic, 0.05, &low.model.coefficients).unwrap();
    assert!((exact - dense.optimization.objective).abs() <= 1e-6);
}

fn random_dataset(seed: u64, n: usize) -> LabeledDataset {
    let mut r = rng::seeded(seed);
    let points = (0..n)
        .map(|_| Point::Real(vec![r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)]))
        .collect();
    let labels = (0..n).map(|_| if r.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
    LabeledDataset::new(points, labels).unwrap()
}

fn kernel_strategy() -> impl Strategy<Value = Kernel> {
    prop_oneof![
        Just(Kernel::Linear),
        (0.3f64..3.0).prop_map(|s| Kernel::gaussian(s).unwrap()),
        (1u32..4).prop_map(|d| Kernel::polynomial(d, 1.0).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn trained_norm_respects_sieve(
        seed in any::<u64>(),
        n in 2usize..40,
        kernel in kernel_strategy(),
        loss in prop::sample::select(Loss::ALL.to_vec()),
        log_lambda in -3.0f64..1.0,
        bundle in any::<bool>(),
    ) {
        let lambda = 10f64.powf(log_lambda);
        let data = random_dataset(seed, n);
        let mut cfg = TrainConfig::new(kernel, loss, lambda);
        cfg.max_iter = 300;
        if bundle {
            cfg.backend = Backend::Bundle;
        }
        let fit = fit(&data, &cfg).unwrap();
        prop_assert!(fit.model.rkhs_norm_sq().unwrap() <= loss.at_zero() / lambda + 1e-6);
        prop_assert!(fit.optimization.objective <= loss.at_zero());
    }

    #[test]
    fn decision_is_linear_in_coefficients(seed in any::<u64>(), n in 1usize..20) {
        let data = random_dataset(seed, n);
        let mut r = rng::seeded(seed ^ 1);
        let c1: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let c2: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let sum: Vec<f64> = c1.iter().zip(&c2).map(|(a, b)| a + b).collect();
        let g = Kernel::gaussian(1.0).unwrap();
        let model = |c: Vec<f64>| Model::from_parts(g, Loss::Hinge, 1.0, data.points().to_vec(), c).unwrap();
        let x = Point::Real(vec![r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)]);
        let lhs = model(sum).decision(&x).unwrap();
        let rhs = model(c1).decision(&x).unwrap() + model(c2).decision(&x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }
}
