use margin_core::optim::*;
use margin_core::rng;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn config(backend: Backend, max_iter: usize, step_c: f64) -> MinimizeConfig {
    MinimizeConfig {
        max_iter,
        step_c,
        backend,
    }
}

/// ½xᵀAx − bᵀx with A = QᵀDQ, eigenvalues in [0.5, 2].
fn random_quadratic(seed: u64, dim: usize) -> (DMatrix<f64>, DVector<f64>) {
    let mut r = rng::seeded(seed);
    let g: DMatrix<f64> = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut r));
    let q = g.qr().q();
    let d = DMatrix::from_diagonal(&DVector::from_fn(dim, |_, _| r.gen_range(0.5..2.0)));
    let a: DMatrix<f64> = q.transpose() * d * q;
    let a = (&a + a.transpose()) * 0.5;
    let b = DVector::from_fn(dim, |_, _| r.gen_range(-2.0..2.0));
    (a, b)
}

#[test]
fn random_quadratics_reach_closed_form_optimum() {
    for seed in 0..20 {
        let dim = 1 + (seed as usize % 10);
        let (a, b) = random_quadratic(seed, dim);
        let xstar = a.clone().cholesky().unwrap().solve(&b);
        let fstar = -0.5 * b.dot(&xstar);
        let f = FnObjective::new(dim, |x: &[f64]| {
            let x = DVector::from_column_slice(x);
            let ax = &a * &x;
            (0.5 * x.dot(&ax) - b.dot(&x), (ax - &b).as_slice().to_vec())
        });
        for backend in [Backend::Subgradient, Backend::Bundle] {
            let r = minimize(&f, &vec![0.0; dim], &config(backend, 1500, 1.0)).unwrap();
            assert!(
                r.objective - fstar <= 1e-4,
                "seed {seed} {backend:?}: {} vs {fstar}",
                r.objective
            );
        }
    }
}

type Battery = Vec<(&'static str, usize, Box<dyn Fn(&[f64]) -> (f64, Vec<f64>)>)>;

fn battery() -> Battery {
    vec![
        (
            "abs",
            1,
            Box::new(|x: &[f64]| ((x[0] - 3.0).abs(), vec![if x[0] >= 3.0 { 1.0 } else { -1.0 }])),
        ),
        (
            "l1+l2",
            3,
            Box::new(|x: &[f64]| {
                let t = [1.0, -2.0, 0.5];
                let mut v = 0.0;
                let mut g = vec![0.0; 3];
                for i in 0..3 {
                    v += (x[i] - t[i]).abs() + 0.5 * x[i] * x[i];
                    g[i] = if x[i] >= t[i] { 1.0 } else { -1.0 } + x[i];
                }
                (v, g)
            }),
        ),
        (
            "max-affine",
            2,
            Box::new(|x: &[f64]| {
                let planes = [([1.0, 1.0], 0.0), ([-1.0, 0.5], 1.0), ([0.2, -1.0], 0.5)];
                let (i, v) = planes
                    .iter()
                    .enumerate()
                    .map(|(i, (a, b))| (i, a[0] * x[0] + a[1] * x[1] + b))
                    .fold((0, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc });
                let v = v + 0.1 * (x[0] * x[0] + x[1] * x[1]);
                (v, vec![planes[i].0[0] + 0.2 * x[0], planes[i].0[1] + 0.2 * x[1]])
            }),
        ),
        (
            "hinge",
            1,
            Box::new(|x: &[f64]| {
                let m = 1.0 - 2.0 * x[0];
                let (h, g) = if m > 0.0 { (m, -2.0) } else { (0.0, 0.0) };
                (h + 0.25 * x[0] * x[0], vec![g + 0.5 * x[0]])
            }),
        ),
    ]
}

#[test]
fn backends_agree_on_battery() {
    for (name, dim, f) in battery() {
        let obj = FnObjective::new(dim, f);
        let s = minimize(&obj, &vec![0.0; dim], &config(Backend::Subgradient, 5000, 0.5)).unwrap();
        let b = minimize(&obj, &vec![0.0; dim], &config(Backend::Bundle, 5000, 0.5)).unwrap();
        assert!(
            (s.objective - b.objective).abs() <= 1e-3,
            "{name}: {} vs {}",
            s.objective,
            b.objective
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn best_so_far_is_monotone(seed in any::<u64>(), bundle in any::<bool>()) {
        let (a, b) = random_quadratic(seed, 4);
        let f = FnObjective::new(4, |x: &[f64]| {
            let x = DVector::from_column_slice(x);
            let ax = &a * &x;
            let l1: f64 = x.iter().map(|v| v.abs()).sum();
            let g: Vec<f64> = (ax.clone() - &b).iter().zip(x.iter()).map(|(g, v)| g + if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
            (0.5 * x.dot(&ax) - b.dot(&x) + l1, g)
        });
        let backend = if bundle { Backend::Bundle } else { Backend::Subgradient };
        let r = minimize(&f, &[1.0, -1.0, 0.5, 2.0], &config(backend, 300, 1.0)).unwrap();
        prop_assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(*r.history.last().unwrap(), r.objective);
    }
}
