//! The reproducible experiment battery.
//!
//! Every experiment derives its randomness from `ExperimentConfig::seed`:
//! replicate `r` draws its data seeds from `rng::replicate(seed, r)`, so rows
//! are reproducible bit for bit and independent of execution order.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use margin_core::analysis::{DiscreteJoint, MixtureBenchmark};
use margin_core::classify::{self, GramMode, LabeledDataset, Model, TrainConfig, DEFAULT_SUPPORT_THRESHOLD};
use margin_core::kernels::{Kernel, Point};
use margin_core::kmethods::{self, KdrSettings, SdrConfig};
use margin_core::linalg::{self, Matrix};
use margin_core::losses::{Loss, ProbabilityEstimate};
use margin_core::optim::Backend;
use margin_core::rng;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::report::{Cell, Report};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("unknown experiment {0:?}")]
    Unknown(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Classify(#[from] classify::ClassifyError),
    #[error(transparent)]
    Analysis(#[from] margin_core::analysis::AnalysisError),
    #[error(transparent)]
    Kernel(#[from] kmethods::KernelMethodError),
    #[error(transparent)]
    Loss(#[from] margin_core::losses::LossError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    SvFraction,
    PsiBound,
    SieveBound,
    Calibration,
    Consistency,
    CcaPower,
    SdrRecovery,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::SvFraction,
        Experiment::PsiBound,
        Experiment::SieveBound,
        Experiment::Calibration,
        Experiment::Consistency,
        Experiment::CcaPower,
        Experiment::SdrRecovery,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::SvFraction => "sv_fraction",
            Experiment::PsiBound => "psi_bound",
            Experiment::SieveBound => "sieve_bound",
            Experiment::Calibration => "calibration",
            Experiment::Consistency => "consistency",
            Experiment::CcaPower => "cca_power",
            Experiment::SdrRecovery => "sdr_recovery",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| ExperimentError::Unknown(s.into()))
    }
}

/// `λ_n = c · n^(-exponent)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaSchedule {
    pub c: f64,
    pub exponent: f64,
}

impl LambdaSchedule {
    pub fn at(&self, n: usize) -> f64 {
        self.c * (n as f64).powf(-self.exponent)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    /// Training sample sizes (or data sizes for the kernel-method studies).
    pub sizes: Vec<usize>,
    /// Seeded replicates per size (runs, triples or datasets, depending on
    /// the experiment).
    pub replicates: usize,
    pub schedule: LambdaSchedule,
    pub kernel: Kernel,
    pub loss: Loss,
    pub backend: Backend,
    pub iterations: usize,
    /// Adds a wall-clock column; off by default so that reports are
    /// byte-identical across runs.
    pub timings: bool,
}

/// Held-out points used for φ-risk and calibration error.
pub const HELD_OUT: usize = 2000;
/// Factor tolerance used for the mixture experiments.
pub const MIXTURE_RANK_TOLERANCE: f64 = 1e-12;
/// Grid for locating sign changes in exact 1-d risk evaluation.
pub const RISK_GRID_STEP: f64 = 1e-2;

impl ExperimentConfig {
    /// Defaults for each experiment.
    pub fn defaults(experiment: Experiment, seed: u64) -> Self {
        let gauss = |s| Kernel::gaussian(s).expect("positive bandwidth");
        let base = ExperimentConfig {
            experiment,
            seed,
            sizes: vec![],
            replicates: 10,
            schedule: LambdaSchedule { c: 1.0, exponent: 0.5 },
            kernel: gauss(1.0),
            loss: Loss::Hinge,
            backend: Backend::Subgradient,
            iterations: 2000,
            timings: false,
        };
        match experiment {
            Experiment::SvFraction => ExperimentConfig {
                sizes: vec![200, 2000],
                ..base
            },
            Experiment::Consistency => ExperimentConfig {
                sizes: vec![250, 4000],
                ..base
            },
            Experiment::Calibration => ExperimentConfig {
                sizes: vec![2000],
                schedule: LambdaSchedule { c: 0.1, exponent: 0.5 },
                ..base
            },
            Experiment::SieveBound => ExperimentConfig {
                sizes: vec![10, 40, 80],
                replicates: 100,
                ..base
            },
            Experiment::PsiBound => ExperimentConfig {
                sizes: vec![6],
                replicates: 10_000,
                ..base
            },
            Experiment::CcaPower => ExperimentConfig {
                sizes: vec![500],
                replicates: 20,
                kernel: gauss(0.5),
                ..base
            },
            Experiment::SdrRecovery => ExperimentConfig {
                sizes: vec![500],
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.into()));
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return bad("sample sizes must be positive");
        }
        if self.replicates == 0 {
            return bad("need at least one replicate");
        }
        if self.iterations == 0 {
            return bad("need at least one iteration");
        }
        if !(self.schedule.c > 0.0) || !self.schedule.c.is_finite() {
            return bad("lambda schedule constant must be positive");
        }
        let uses_schedule = matches!(
            self.experiment,
            Experiment::SvFraction | Experiment::Calibration | Experiment::Consistency
        );
        if uses_schedule && !(self.schedule.exponent > 0.0 && self.schedule.exponent < 1.0) {
            return bad("lambda schedule exponent must lie in (0, 1)");
        }
        if self.experiment == Experiment::PsiBound && self.sizes.iter().any(|&m| m > 6) {
            return bad("psi_bound supports at most 6 atoms");
        }
        Ok(())
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Report, ExperimentError> {
    config.validate()?;
    match config.experiment {
        Experiment::SvFraction => sv_fraction(config),
        Experiment::PsiBound => psi_bound(config),
        Experiment::SieveBound => sieve_bound(config),
        Experiment::Calibration => calibration(config),
        Experiment::Consistency => consistency(config),
        Experiment::CcaPower => cca_power(config),
        Experiment::SdrRecovery => sdr_recovery(config),
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and
/// the uniform distribution on [0, 1].
pub fn ks_uniform(samples: &[f64]) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &p)| (p - i as f64 / m).max((i + 1) as f64 / m - p))
        .fold(0.0, f64::max)
}

/// Train and test seeds for replicate `r`.
fn replicate_seeds(seed: u64, r: usize) -> (u64, u64) {
    let mut g = rng::replicate(seed, r as u64);
    (g.next_u64(), g.next_u64())
}

struct MixtureRun {
    model: Model,
    lambda: f64,
    objective: f64,
    iterations: usize,
    test_risk: f64,
    phi_risk: f64,
    norm_sq: f64,
    support_fraction: f64,
    seconds: f64,
}

fn mixture_run(
    config: &ExperimentConfig,
    mix: &MixtureBenchmark,
    n: usize,
    loss: Loss,
    train: &LabeledDataset,
    test: &LabeledDataset,
) -> Result<MixtureRun, ExperimentError> {
    let start = Instant::now();
    let lambda = config.schedule.at(n);
    let mut tc = TrainConfig::new(config.kernel, loss, lambda);
    tc.max_iter = config.iterations;
    tc.backend = config.backend;
    tc.gram = GramMode::LowRank {
        relative_tol: MIXTURE_RANK_TOLERANCE,
    };
    let fit = classify::fit(train, &tc)?;
    let model = fit.model;
    let f = |x: f64| model.decision(&Point::Real(vec![x])).unwrap_or(f64::NAN);
    let test_risk = mix.risk_1d(&f, RISK_GRID_STEP)?;
    let mut phi = 0.0;
    for (x, &y) in test.points().iter().zip(test.labels()) {
        phi += loss.value(y * model.decision(x)?);
    }
    Ok(MixtureRun {
        lambda,
        objective: fit.optimization.objective,
        iterations: fit.optimization.iterations,
        test_risk,
        phi_risk: phi / test.len() as f64,
        norm_sq: model.rkhs_norm_sq()?,
        support_fraction: model.support_fraction(DEFAULT_SUPPORT_THRESHOLD),
        seconds: start.elapsed().as_secs_f64(),
        model,
    })
}

const MIXTURE_COLUMNS: [&str; 11] = [
    "n",
    "replicate",
    "loss",
    "lambda",
    "test_risk",
    "phi_risk",
    "norm_sq",
    "support_fraction",
    "objective",
    "iterations",
    "probability_mae",
];

fn mixture_report(config: &ExperimentConfig) -> Report {
    let mut cols: Vec<&str> = MIXTURE_COLUMNS.to_vec();
    if config.timings {
        cols.push("wall_seconds");
    }
    Report::new(config.experiment.name(), &cols)
}

fn mixture_row(config: &ExperimentConfig, n: usize, r: usize, loss: Loss, run: &MixtureRun, mae: Cell) -> Vec<Cell> {
    let mut row = vec![
        n.into(),
        r.into(),
        loss.name().into(),
        run.lambda.into(),
        run.test_risk.into(),
        run.phi_risk.into(),
        run.norm_sq.into(),
        run.support_fraction.into(),
        run.objective.into(),
        run.iterations.into(),
        mae,
    ];
    if config.timings {
        row.push(run.seconds.into());
    }
    row
}

fn mixture_data(
    mix: &MixtureBenchmark,
    config: &ExperimentConfig,
    n: usize,
    r: usize,
) -> Result<(LabeledDataset, LabeledDataset), ExperimentError> {
    let (train_seed, test_seed) = replicate_seeds(config.seed, r);
    Ok((mix.sample(n, train_seed)?, mix.sample(HELD_OUT, test_seed)?))
}

fn is_size(n: usize) -> impl Fn(&[Cell]) -> bool {
    move |row| row[0] == Cell::Int(n as u64)
}

fn sv_fraction(config: &ExperimentConfig) -> Result<Report, ExperimentError> {
    let mix = MixtureBenchmark::symmetric_1d(1.0);
    let bayes = mix.bayes_risk();
    let mut report = mixture_report(config);
    for &n in &config.sizes {
        for r in 0..config.replicates {
            let (train, test) = mixture_data(&mix, config, n, r)?;
            let run = mixture_run(config, &mix, n, config.loss, &train, &test)?;
            report.push(mixture_row(config, n, r, config.loss, &run, Cell::Text(String::new())));
        }
    }
    let (small, large) = (config.sizes[0], config.sizes[config.sizes.len() - 1]);
    let gap = |n: usize| {
        let sf = report.reals("support_fraction", is_size(n));
        median(&sf.iter().map(|s| (s - 2.0 * bayes).abs()).collect::<Vec<_>>())
    };
    let (gap_small, gap_large) = (gap(small), gap(large));
    report.verdict(
        "sv_fraction_trend",
        "support fraction approaches twice the Bayes risk as n grows",
        gap_large < gap_small,
        format!("median |sf - 2R*| = {gap_small:.4} at n={small}, {gap_large:.4} at n={large}; R* = {bayes:.5}"),
    );
    let sf_large = median(&report.reals("support_fraction", is_size(large)));
    report.verdict(
        "sv_fraction_window",
        "median support fraction at the largest n lies in [0.20, 0.44]",
        (0.20..=0.44).contains(&sf_large),
        format!("median support fraction {sf_large:.4} at n={large}"),
    );
    Ok(report)
}

fn consistency(config: &ExperimentConfig) -> Result<Report, ExperimentError> {
    let mix = MixtureBenchmark::symmetric_1d(1.0);
    let bayes = mix.bayes_risk();
    let mut report = mixture_report(config);
    for &n in &config.sizes {
        for r in 0..config.replicates {
            let (train, test) = mixture_data(&mix, config, n, r)?;
            let run = mixture_run(config, &mix, n, config.loss, &train, &test)?;
            report.push(mixture_row(config, n, r, config.loss, &run, Cell::Text(String::new())));
        }
    }
    let (small, large) = (config.sizes[0], config.sizes[config.sizes.len() - 1]);
    let risk_small = median(&report.reals("test_risk", is_size(small)));
    let risk_large = median(&report.reals("test_risk", is_size(large)));
    report.verdict(
        "consistency_near_bayes",
        "median test risk at the largest n is within 0.03 of the Bayes risk",
        (risk_large - bayes).abs() <= 0.03,
        format!("median risk {risk_large:.5} at n={large}; R* = {bayes:.5}"),
    );
    report.verdict(
        "consistency_trend",
        "median test risk decreases from the smallest to the largest n",
        risk_large < risk_small,
        format!("median risk {risk_small:.5} at n={small}, {risk_large:.5} at n={large}"),
    );
    Ok(report)
}

fn calibration(config: &ExperimentConfig) -> Result<Report, ExperimentError> {
    let mix = MixtureBenchmark::symmetric_1d(1.0);
    let mut report = mixture_report(config);
    let mut hinge_unavailable = true;
    for &n in &config.sizes {
        for r in 0..config.replicates {
            let (train, test) = mixture_data(&mix, config, n, r)?;
            for loss in [Loss::Logistic, Loss::Quadratic, Loss::Hinge] {
                let run = mixture_run(config, &mix, n, loss, &train, &test)?;
                let mut total = 0.0;
                let mut available = true;
                for x in test.points() {
                    match run.model.estimate_probability(x)? {
                        ProbabilityEstimate::Probability(p) => {
                            total += (p - mix.eta(x.as_real().expect("mixture points are real"))).abs()
                        }
                        ProbabilityEstimate::Unavailable => available = false,
                    }
                }
                let mae = if loss == Loss::Hinge {
                    hinge_unavailable &= !available;
                    Cell::Text("unavailable".into())
                } else {
                    Cell::Real(total / test.len() as f64)
                };
                report.push(mixture_row(config, n, r, loss, &run, mae));
            }
        }
    }
    let large = config.sizes[config.sizes.len() - 1];
    for loss in [Loss::Logistic, Loss::Quadratic] {
        let mae = median(&report.reals("probability_mae", |row| {
            is_size(large)(row) && row[2] == Cell::Text(loss.name().into())
        }));
        report.verdict(
            &format!("calibration_{}", loss.name()),
            "probability estimates through the loss link track the true posterior (median MAE <= 0.1)",
            mae <= 0.1,
            format!("median MAE {mae:.4} at n={large}"),
        );
    }
    report.verdict(
        "calibration_hinge",
        "hinge models offer no probability estimate",
        hinge_unavailable,
        "estimate_probability returned Unavailable on every held-out point".into(),
    );
    Ok(report)
}

fn random_kernel(r: &mut impl Rng) -> Kernel {
    match r.gen_range(0..3) {
        0 => Kernel::Linear,
        1 => Kernel::polynomial(r.gen_range(1..=3), 1.0).expect("valid degree"),
        _ => Kernel::gaussian(r.gen_range(0.3..3.0)).expect("positive bandwidth"),
    }
}

fn sieve_bound(config: &ExperimentConfig) -> Result<Report, ExperimentError> {
    let mut cols = vec![
        "run",
        "n",
        "loss",
        "kernel",
        "lambda",
        "norm_sq",
        "bound",
        "objective",
        "holds",
    ];
    if config.timings {
        cols.push("wall_seconds");
    }
    let mut report = Report::new(config.experiment.name(), &cols);
    let mix = MixtureBenchmark::new(vec![1.0, 0.0], vec![-1.0, 0.5], 1.0)?;
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for run in 0..config.replicates {
        let start = Instant::now();
        let mut g = rng::replicate(config.seed, run as u64);
        let n = config.sizes[g.gen_range(0..config.sizes.len())];
        let loss = Loss::ALL[g.gen_range(0..4)];
        let kernel = random_kernel(&mut g);
        let lambda = 10f64.powf(g.gen_range(-3.0..1.0));
        let data = mix.sample(n, g.next_u64())?;
        let mut tc = TrainConfig::new(kernel, loss, lambda);
        tc.max_iter = config.iterations;
        tc.backend = config.backend;
        let fit = classify::fit(&data, &tc)?;
        let norm_sq = fit.model.rkhs_norm_sq()?;
        let bound = loss.at_zero() / lambda;
        let holds = norm_sq <= bound + 1e-6;
        violations += usize::from(!holds);
        worst = worst.max(norm_sq / bound);
        let mut row: Vec<Cell> = vec![
            run.into(),
            n.into(),
            loss.name().into(),
            Cell::Text(kernel.to_string()),
            lambda.into(),
            norm_sq.into(),
            bound.into(),
            fit.optimization.objective.into(),
            holds.into(),
        ];
        if config.timings {
            row.push(start.elapsed().as_secs_f64().into());
        }
        report.push(row);
    }
    report.verdict(
        "sieve_bound",
        "trained RKHS norm satisfies ||f||^2 <= phi(0)/lambda",
        violations == 0,
        format!(
            "{violations} violations in {} runs; largest ||f||^2 lambda / phi(0) = {worst:.6}",
            config.replicates
        ),
    );
    Ok(report)
}

/// Random discrete joint with at most `max_atoms` atoms; posteriors include
/// the extreme values 0, 1/2 and 1.
pub fn random_joint(r: &mut impl Rng, max_atoms: usize) -> DiscreteJoint {
    let m = r.gen_range(1..=max_atoms);
    let support = (0..m).map(|j| vec![j as f64]).collect();
    let w: Vec<f64> = (0..m).map(|_| r.gen_range(0.01..1.0)).collect();
    let total: f64 = w.iter().sum();
    let marginal = w.iter().map(|v| v / total).collect();
    let eta = (0..m)
        .map(|_| match r.gen_range(0..10) {
            0 => 0.0,
            1 => 1.0,
            2 => 0.5,
            _ => r.gen::<f64>(),
        })
        .collect();
    DiscreteJoint::new(support, marginal, eta).expect("valid random joint")
}

/// Decision values at each atom, including exact zeros and tiny magnitudes.
pub fn random_decision(r: &mut impl Rng, m: usize) -> Vec<f64> {
    (0..m)
        .map(|_| match r.gen_range(0..6) {
            0 => 0.0,
            1 => r.gen_range(-1e-3..1e-3),
            _ => r.gen_range(-4.0..4.0),
        })
        .collect()
}

fn psi_bound(config: &ExperimentConfig) -> Result<Report, ExperimentError> {
    let mut report = Report::new(
        config.experiment.name(),
        &[
            "triple",
            "loss",
            "atoms",
            "excess_risk",
            "excess_phi_risk",
            "psi",
            "holds",
        ],
    );
    let max_atoms = config.sizes[0];
    let mut violations = 0;
    for t in 0..config.replicates {
        let mut g = rng::replicate(config.seed, t as u64);
        let d = random_joint(&mut g, max_atoms);
        let f = random_decision(&mut g, d.len());
        let loss = Loss::ALL[t % 4];
        let check = d.check_psi_bound(|x: &[f64]| f[x[0] as usize], loss)?;
        violations += usize::from(!check.holds);
        report.push(vec![
            t.into(),
            loss.name().into(),
            d.len().into(),
            check.excess_risk.into(),
            check.excess_phi_risk.into(),
            check.psi_value.into(),
            check.holds.into(),
        ]);
    }
    report.verdict(
        "psi_bound",
        "psi(R(f) - R*) <= R_phi(f) - R_phi* at slack 1e-9",
        violations == 0,
        format!("{violations} violations in {} triples", config.replicates),
    );
    Ok(report)
}

/// Permutations per independence test.
pub const CCA_PERMUTATIONS: usize = 99;
/// Null-calibration study: runs and sample size.
pub const CCA_NULL_RUNS: usize = 200;
pub const CCA_NULL_SIZE: usize = 100;

fn uniform_points(r: &mut impl Rng, n: usize) -> Vec<Point> {
    (0..n).map(|_| Point::Real(vec![r.gen_range(-1.0..1.0)])).collect()
}

fn cca_power(config: &ExperimentConfig) -> Result<Report, ExperimentError> {
    let kappa = kmethods::DEFAULT_KAPPA;
    let k = config.kernel;
    let mut report = Report::new(config.experiment.name(), &["study", "run", "n", "rho", "p_value"]);

    let mut g = rng::replicate(config.seed, 0);
    let x = uniform_points(&mut g, 50);
    let identical = kmethods::kernel_cca(&x, &x, &k, &k, 1e-6)?;
    report.push(vec![
        "identical".into(),
        0usize.into(),
        50usize.into(),
        identical.rho.into(),
        Cell::Text(String::new()),
    ]);

    let mut null_p = Vec::with_capacity(CCA_NULL_RUNS);
    for run in 0..CCA_NULL_RUNS {
        let mut g = rng::replicate(config.seed, 1 + run as u64);
        let x = uniform_points(&mut g, CCA_NULL_SIZE);
        let y = uniform_points(&mut g, CCA_NULL_SIZE);
        let t = kmethods::independence_test(&x, &y, &k, &k, kappa, CCA_PERMUTATIONS, g.next_u64())?;
        null_p.push(t.p_value);
        report.push(vec![
            "null".into(),
            run.into(),
            CCA_NULL_SIZE.into(),
            t.rho.into(),
            t.p_value.into(),
        ]);
    }

    let n = config.sizes[0];
    let mut rejections = 0;
    for run in 0..config.replicates {
        let mut g = rng::replicate(config.seed, (1 + CCA_NULL_RUNS + run) as u64);
        let x = uniform_points(&mut g, n);
        let y: Vec<Point> = x
            .iter()
            .map(|p| {
                let v = p.as_real().expect("real")[0];
                Point::Real(vec![v * v])
            })
            .collect();
        let t = kmethods::independence_test(&x, &y, &k, &k, kappa, CCA_PERMUTATIONS, g.next_u64())?;
        rejections += usize::from(t.p_value <= 0.05);
        report.push(vec![
            "power".into(),
            run.into(),
            n.into(),
            t.rho.into(),
            t.p_value.into(),
        ]);
    }

    report.verdict(
        "cca_identical",
        "identical inputs are maximally correlated (rho >= 0.99)",
        identical.rho >= 0.99,
        format!("rho = {:.6}", identical.rho),
    );
    let ks = ks_uniform(&null_p);
    report.verdict(
        "cca_null_calibration",
        "permutation p-values are uniform under independence (KS <= 0.15)",
        ks <= 0.15,
        format!("KS distance {ks:.4} over {CCA_NULL_RUNS} runs at n={CCA_NULL_SIZE}"),
    );
    let power = rejections as f64 / config.replicates as f64;
    report.verdict(
        "cca_power",
        "the test detects Y = X^2 (p <= 0.05 in >= 90% of runs)",
        power >= 0.9,
        format!("power {power:.3} over {} runs at n={n}", config.replicates),
    );
    Ok(report)
}

/// Sample size and noise of the planar SDR check.
pub const SDR_PLANAR_SIZE: usize = 300;
pub const SDR_PLANAR_RUNS: usize = 3;
pub const SDR_DIMENSION: usize = 5;

fn gaussian_inputs(r: &mut impl Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| StandardNormal.sample(r)).collect())
        .collect()
}

fn column(v: &[f64]) -> Matrix {
    Matrix::from_row_major(v.len(), 1, v.to_vec()).expect("column shape")
}

/// Angle in [0, π) minimizing the objective over `B = (cos t, sin t)` on a
/// 0.01 grid.
pub fn angle_sweep(
    xs: &[Vec<f64>],
    ys: &[Point],
    kx: &Kernel,
    ky: &Kernel,
    settings: &KdrSettings,
) -> Result<f64, kmethods::KernelMethodError> {
    let mut best = (0.0, f64::INFINITY);
    for i in 0..=314 {
        let t = i as f64 * 0.01;
        let v = kmethods::kdr_objective(&column(&[t.cos(), t.sin()]), xs, ys, kx, ky, settings)?;
        if v < best.1 {
            best = (t, v);
        }
    }
    Ok(best.0)
}

fn sdr_recovery(config: &ExperimentConfig) -> Result<Report, ExperimentError> {
    let k = config.kernel;
    let sdr = SdrConfig::default();
    let mut report = Report::new(
        config.experiment.name(),
        &["study", "run", "d", "n", "angle_deg", "objective"],
    );

    let mut worst_planar: f64 = 0.0;
    for run in 0..SDR_PLANAR_RUNS {
        let mut g = rng::replicate(config.seed, run as u64);
        let xs = gaussian_inputs(&mut g, SDR_PLANAR_SIZE, 2);
        let ys: Vec<Point> = xs
            .iter()
            .map(|x| {
                let e: f64 = StandardNormal.sample(&mut g);
                Point::Real(vec![x[0] + 0.1 * e])
            })
            .collect();
        let fit = kmethods::estimate_sdr(
            &xs,
            &ys,
            1,
            &k,
            &k,
            &SdrConfig {
                seed: g.next_u64(),
                ..sdr
            },
        )?;
        let t = angle_sweep(&xs, &ys, &k, &k, &sdr.settings)?;
        let angle = linalg::largest_principal_angle(&fit.basis, &column(&[t.cos(), t.sin()]))
            .expect("unit columns")
            .to_degrees();
        worst_planar = worst_planar.max(angle);
        report.push(vec![
            "planar_vs_sweep".into(),
            run.into(),
            2usize.into(),
            SDR_PLANAR_SIZE.into(),
            angle.into(),
            fit.objective.into(),
        ]);
    }

    let n = config.sizes[0];
    let d = SDR_DIMENSION;
    let mut truth = vec![0.0; d];
    truth[0] = std::f64::consts::FRAC_1_SQRT_2;
    truth[1] = std::f64::consts::FRAC_1_SQRT_2;
    let truth_col = column(&truth);
    let mut recovered = 0;
    for run in 0..config.replicates {
        let mut g = rng::replicate(config.seed, (SDR_PLANAR_RUNS + run) as u64);
        let xs = gaussian_inputs(&mut g, n, d);
        let ys: Vec<Point> = xs
            .iter()
            .map(|x| {
                let z = linalg::dot(x, &truth);
                let e: f64 = StandardNormal.sample(&mut g);
                Point::Real(vec![z * z + 0.1 * e])
            })
            .collect();
        let fit = kmethods::estimate_sdr(
            &xs,
            &ys,
            1,
            &k,
            &k,
            &SdrConfig {
                seed: g.next_u64(),
                ..sdr
            },
        )?;
        let angle = linalg::largest_principal_angle(&fit.basis, &truth_col)
            .expect("unit columns")
            .to_degrees();
        recovered += usize::from(angle <= 10.0);
        report.push(vec![
            "recovery".into(),
            run.into(),
            d.into(),
            n.into(),
            angle.into(),
            fit.objective.into(),
        ]);
    }

    report.verdict(
        "sdr_planar",
        "estimated direction matches the brute-force angle sweep within 2 degrees",
        worst_planar <= 2.0,
        format!("largest angle {worst_planar:.3} deg over {SDR_PLANAR_RUNS} runs"),
    );
    let needed = (config.replicates * 8).div_ceil(10);
    report.verdict(
        "sdr_recovery",
        "the true 1-d subspace is recovered within 10 degrees in at least 8 of 10 runs",
        recovered >= needed,
        format!("{recovered} of {} runs within 10 deg (d={d}, n={n})", config.replicates),
    );
    Ok(report)
}
