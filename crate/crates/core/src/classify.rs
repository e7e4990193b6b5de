//! Regularized large-margin classifiers in a reproducing kernel Hilbert space.
//!
//! A model is the kernel expansion `f(x) = Σᵢ cᵢ k(xᵢ, x)` over the training
//! points, with no intercept. Training minimizes
//!
//! ```text
//! J(c) = (1/n) Σᵢ φ(yᵢ (Kc)ᵢ) + λ cᵀKc
//! ```
//!
//! from `c = 0`, so the best-so-far iterate always satisfies `J(c) ≤ φ(0)` and
//! hence `‖f‖²_H = cᵀKc ≤ φ(0)/λ`.
//!
//! The coefficient-space subgradient of `J` is `K w` with
//! `w = (1/n) y∘g + 2λc`, `gᵢ ∈ ∂φ(yᵢ(Kc)ᵢ)`. The optimizer steps along `w`,
//! which is the functional subgradient of `J` in the RKHS; at a minimizer this
//! drives `cᵢ = -yᵢ gᵢ / (2λn)`, so coefficients vanish exactly where the
//! loss is flat (margins above one for the hinge).

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::kernels::{self, GramMatrix, Kernel, KernelError, LowRankFactor, Point};
use crate::linalg::{dot, Matrix};
use crate::losses::{Loss, ProbabilityEstimate};
use crate::optim::{self, Backend, Evaluation, MinimizeConfig, Objective, OptResult, OptimError};

/// Version written into persisted models.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Default coefficient magnitude above which a training point counts as a
/// support vector.
pub const DEFAULT_SUPPORT_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("regularization coefficient must be positive and finite, got {0}")]
    InvalidLambda(f64),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("{points} points but {labels} labels")]
    LengthMismatch { points: usize, labels: usize },
    #[error("label {0} is not -1 or +1")]
    InvalidLabel(f64),
    #[error("{coefficients} coefficients for {points} training points")]
    CoefficientMismatch { points: usize, coefficients: usize },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Optim(#[from] OptimError),
}

/// Points with labels in {-1, +1}.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    points: Vec<Point>,
    labels: Vec<f64>,
}

impl LabeledDataset {
    pub fn new(points: Vec<Point>, labels: Vec<f64>) -> Result<Self, ClassifyError> {
        if points.len() != labels.len() {
            return Err(ClassifyError::LengthMismatch {
                points: points.len(),
                labels: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
            return Err(ClassifyError::InvalidLabel(bad));
        }
        Ok(LabeledDataset { points, labels })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// How the training objective applies the Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum GramMode {
    /// Exact n×n matrix.
    #[default]
    Dense,
    /// Pivoted incomplete Cholesky `K ≈ LLᵀ`, stopped once the residual trace
    /// falls to `relative_tol · trace(K)`. Each objective evaluation then
    /// costs O(n·k) instead of O(n²).
    LowRank { relative_tol: f64 },
}

/// Step constant `c` of the optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum StepSize {
    /// [`auto_step`] evaluated on the training data.
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub kernel: Kernel,
    pub loss: Loss,
    pub lambda: f64,
    pub max_iter: usize,
    pub backend: Backend,
    pub step: StepSize,
    pub gram: GramMode,
}

impl TrainConfig {
    /// Defaults: 2000 subgradient iterations with the automatic step and the
    /// exact Gram matrix.
    pub fn new(kernel: Kernel, loss: Loss, lambda: f64) -> Self {
        TrainConfig {
            kernel,
            loss,
            lambda,
            max_iter: 2000,
            backend: Backend::Subgradient,
            step: StepSize::Auto,
            gram: GramMode::Dense,
        }
    }
}

/// `1 / (2λ + φ''(0)·k̄)`, with `k̄` the mean of `k(xᵢ, xᵢ)`: the inverse of
/// a smoothness bound of `J` in the RKHS metric near `f = 0`. For the hinge
/// this is `1/(2λ)`, and the first step lands exactly on
/// `c = -(1/n) y∘g / (2λ)`.
pub fn auto_step(loss: Loss, lambda: f64, mean_diagonal: f64) -> f64 {
    let smoothness = 2.0 * lambda + loss.curvature_at_zero() * mean_diagonal.max(0.0);
    if smoothness > 0.0 && smoothness.is_finite() {
        1.0 / smoothness
    } else {
        1.0
    }
}

/// Kernel discriminant `f(x) = Σᵢ cᵢ k(xᵢ, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub kernel: Kernel,
    pub loss: Loss,
    pub lambda: f64,
    pub points: Vec<Point>,
    pub coefficients: Vec<f64>,
    pub format_version: u32,
}

/// A trained model with the optimizer's report.
#[derive(Debug, Clone)]
pub struct Fit {
    pub model: Model,
    pub optimization: OptResult,
}

enum GramOperator {
    Dense(Matrix),
    LowRank(LowRankFactor),
}

impl GramOperator {
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        match self {
            GramOperator::Dense(k) => k.mul_vec(v),
            GramOperator::LowRank(f) => f.apply(v),
        }
    }
}

/// `J(c)` with a value/subgradient oracle in the RKHS metric.
struct RegularizedRisk<'a> {
    gram: GramOperator,
    labels: &'a [f64],
    loss: Loss,
    lambda: f64,
}

impl Objective for RegularizedRisk<'_> {
    fn dimension(&self) -> usize {
        self.labels.len()
    }

    fn evaluate(&self, c: &[f64]) -> Evaluation {
        let n = self.labels.len() as f64;
        let kc = self.gram.apply(c);
        let mut risk = 0.0;
        let mut direction = vec![0.0; c.len()];
        for (i, (&y, &fi)) in self.labels.iter().zip(&kc).enumerate() {
            let margin = y * fi;
            risk += self.loss.value(margin);
            let g = self.loss.subdifferential(margin).hi;
            direction[i] = y * g / n + 2.0 * self.lambda * c[i];
        }
        let value = risk / n + self.lambda * dot(c, &kc);
        let subgradient = self.gram.apply(&direction);
        Evaluation {
            value,
            subgradient,
            direction,
        }
    }

    /// Radial projection onto the sieve ball `cᵀKc ≤ φ(0)/λ`, which holds
    /// every minimizer since `J(c*) ≤ J(0) = φ(0)`. Keeps the iterates
    /// bounded for losses without a global Lipschitz constant.
    fn project(&self, c: &mut [f64]) {
        let radius_sq = self.loss.at_zero() / self.lambda;
        let norm_sq = dot(c, &self.gram.apply(c));
        if norm_sq > radius_sq {
            let scale = libm::sqrt(radius_sq / norm_sq);
            c.iter_mut().for_each(|v| *v *= scale);
        }
    }
}

fn validate(data: &LabeledDataset, lambda: f64) -> Result<(), ClassifyError> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(ClassifyError::InvalidLambda(lambda));
    }
    if data.is_empty() {
        return Err(ClassifyError::EmptyDataset);
    }
    Ok(())
}

/// Trains a model and returns it with the optimizer report.
pub fn fit(data: &LabeledDataset, config: &TrainConfig) -> Result<Fit, ClassifyError> {
    validate(data, config.lambda)?;
    let trace: f64 = data
        .points()
        .iter()
        .map(|p| config.kernel.eval(p, p))
        .sum::<Result<f64, _>>()?;
    let gram = match config.gram {
        GramMode::Dense => GramOperator::Dense(kernels::gram(&config.kernel, data.points())?.into_matrix()),
        GramMode::LowRank { relative_tol } => GramOperator::LowRank(kernels::incomplete_cholesky(
            &config.kernel,
            data.points(),
            relative_tol * trace,
            data.len(),
        )?),
    };
    let step_c = match config.step {
        StepSize::Auto => auto_step(config.loss, config.lambda, trace / data.len() as f64),
        StepSize::Fixed(c) => c,
    };
    let optimizer = MinimizeConfig {
        max_iter: config.max_iter,
        step_c,
        backend: config.backend,
    };
    let objective = RegularizedRisk {
        gram,
        labels: data.labels(),
        loss: config.loss,
        lambda: config.lambda,
    };
    let start = vec![0.0; data.len()];
    let optimization = optim::minimize(&objective, &start, &optimizer)?;
    let model = Model {
        kernel: config.kernel,
        loss: config.loss,
        lambda: config.lambda,
        points: data.points().to_vec(),
        coefficients: optimization.minimizer.clone(),
        format_version: MODEL_FORMAT_VERSION,
    };
    Ok(Fit { model, optimization })
}

pub fn train(data: &LabeledDataset, config: &TrainConfig) -> Result<Model, ClassifyError> {
    fit(data, config).map(|f| f.model)
}

/// `J(c)` for arbitrary coefficients, with the exact Gram matrix.
pub fn regularized_objective(
    data: &LabeledDataset,
    kernel: &Kernel,
    loss: Loss,
    lambda: f64,
    coefficients: &[f64],
) -> Result<f64, ClassifyError> {
    validate(data, lambda)?;
    if coefficients.len() != data.len() {
        return Err(ClassifyError::CoefficientMismatch {
            points: data.len(),
            coefficients: coefficients.len(),
        });
    }
    let k = kernels::gram(kernel, data.points())?;
    Ok(objective_with_gram(&k, data.labels(), loss, lambda, coefficients))
}

/// `J(c)` given a precomputed Gram matrix.
pub fn objective_with_gram(k: &GramMatrix, labels: &[f64], loss: Loss, lambda: f64, c: &[f64]) -> f64 {
    let kc = k.entries().mul_vec(c);
    let n = labels.len() as f64;
    let risk: f64 = labels.iter().zip(&kc).map(|(y, f)| loss.value(y * f)).sum();
    risk / n + lambda * dot(c, &kc)
}

impl Model {
    /// Builds a model from explicit coefficients.
    pub fn from_parts(
        kernel: Kernel,
        loss: Loss,
        lambda: f64,
        points: Vec<Point>,
        coefficients: Vec<f64>,
    ) -> Result<Self, ClassifyError> {
        if points.len() != coefficients.len() {
            return Err(ClassifyError::CoefficientMismatch {
                points: points.len(),
                coefficients: coefficients.len(),
            });
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(ClassifyError::InvalidLambda(lambda));
        }
        Ok(Model {
            kernel,
            loss,
            lambda,
            points,
            coefficients,
            format_version: MODEL_FORMAT_VERSION,
        })
    }

    /// `f(x) = Σᵢ cᵢ k(xᵢ, x)`.
    pub fn decision(&self, x: &Point) -> Result<f64, ClassifyError> {
        let mut f = 0.0;
        for (p, &c) in self.points.iter().zip(&self.coefficients) {
            let k = self.kernel.eval(p, x)?;
            if c != 0.0 {
                f += c * k;
            }
        }
        Ok(f)
    }

    /// `sign(f(x))` with `sign(0) = +1`.
    pub fn predict(&self, x: &Point) -> Result<f64, ClassifyError> {
        self.decision(x).map(sign)
    }

    /// `cᵀKc`.
    pub fn rkhs_norm_sq(&self) -> Result<f64, ClassifyError> {
        let k = kernels::gram(&self.kernel, &self.points)?;
        Ok(k.entries().quadratic_form(&self.coefficients).max(0.0))
    }

    /// Fraction of coefficients with `|cᵢ| > threshold`.
    pub fn support_fraction(&self, threshold: f64) -> f64 {
        if self.coefficients.is_empty() {
            return 0.0;
        }
        let count = self.coefficients.iter().filter(|c| c.abs() > threshold).count();
        count as f64 / self.coefficients.len() as f64
    }

    /// Posterior `P(Y = 1 | x)` through the loss's link, when it has one.
    pub fn estimate_probability(&self, x: &Point) -> Result<ProbabilityEstimate, ClassifyError> {
        if self.loss == Loss::Hinge {
            return Ok(ProbabilityEstimate::Unavailable);
        }
        Ok(self.loss.invert_link(self.decision(x)?))
    }
}

/// Classification convention shared by prediction and risk evaluation.
#[inline]
pub fn sign(f: f64) -> f64 {
    if f >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(v: &[f64]) -> Point {
        Point::from(v)
    }

    fn two_point() -> LabeledDataset {
        LabeledDataset::new(vec![real(&[-1.0]), real(&[1.0])], vec![-1.0, 1.0]).unwrap()
    }

    #[test]
    fn unbounded_curvature_losses_stay_finite() {
        let data = LabeledDataset::new(
            vec![real(&[1.5, -2.0]), real(&[-1.8, 0.4]), real(&[0.3, 1.9])],
            vec![1.0, 1.0, -1.0],
        )
        .unwrap();
        for loss in [Loss::Quadratic, Loss::Exponential] {
            let model = train(&data, &TrainConfig::new(Kernel::Linear, loss, 1e-3)).unwrap();
            assert!(model.rkhs_norm_sq().unwrap() <= 1.0 / 1e-3 + 1e-6);
        }
    }

    #[test]
    fn dataset_validation() {
        assert!(matches!(
            LabeledDataset::new(vec![real(&[0.0])], vec![]),
            Err(ClassifyError::LengthMismatch { .. })
        ));
        assert_eq!(
            LabeledDataset::new(vec![real(&[0.0])], vec![0.0]),
            Err(ClassifyError::InvalidLabel(0.0))
        );
    }

    #[test]
    fn train_errors() {
        let cfg = TrainConfig::new(Kernel::Linear, Loss::Hinge, 0.0);
        assert_eq!(train(&two_point(), &cfg), Err(ClassifyError::InvalidLambda(0.0)));
        let empty = LabeledDataset::new(vec![], vec![]).unwrap();
        let cfg = TrainConfig::new(Kernel::Linear, Loss::Hinge, 1.0);
        assert_eq!(train(&empty, &cfg), Err(ClassifyError::EmptyDataset));
    }

    #[test]
    fn huge_lambda_gives_tiny_coefficients() {
        let data = two_point();
        for loss in Loss::ALL {
            let model = train(&data, &TrainConfig::new(Kernel::gaussian(1.0).unwrap(), loss, 1e6)).unwrap();
            assert!(model.coefficients.iter().all(|c| c.abs() <= 1e-3), "{loss}");
            assert!(model.decision(&real(&[0.3])).unwrap().abs() < 1e-3);
        }
    }

    #[test]
    fn separable_pair_is_classified() {
        let data = two_point();
        let model = train(&data, &TrainConfig::new(Kernel::Linear, Loss::Hinge, 0.01)).unwrap();
        for (x, &y) in data.points().iter().zip(data.labels()) {
            assert_eq!(model.predict(x).unwrap(), y);
        }
        assert!(model.rkhs_norm_sq().unwrap() <= 1.0 / 0.01 + 1e-6);
    }

    #[test]
    fn decision_examples() {
        let g = Kernel::gaussian(1.0).unwrap();
        let zero = Model::from_parts(g, Loss::Hinge, 1.0, vec![real(&[1.0])], vec![0.0]).unwrap();
        assert_eq!(zero.decision(&real(&[5.0])).unwrap(), 0.0);
        assert_eq!(zero.predict(&real(&[5.0])).unwrap(), 1.0);

        let unit = Model::from_parts(g, Loss::Hinge, 1.0, vec![real(&[0.4])], vec![1.0]).unwrap();
        assert_eq!(unit.decision(&real(&[0.4])).unwrap(), 1.0);

        let pair = Model::from_parts(
            Kernel::Linear,
            Loss::Hinge,
            1.0,
            vec![real(&[1.0, 2.0]), real(&[0.5, -1.0])],
            vec![1.0, -1.0],
        )
        .unwrap();
        let x = real(&[2.0, 3.0]);
        // k(x1, x) - k(x2, x) = 8 - (-2)
        assert_eq!(pair.decision(&x).unwrap(), 10.0);
        assert_eq!(pair.predict(&real(&[-2.0, -3.0])).unwrap(), -1.0);
        assert!(pair.decision(&real(&[1.0])).is_err());
    }

    #[test]
    fn norm_and_sparsity_examples() {
        let g = Kernel::gaussian(1.0).unwrap();
        let m = Model::from_parts(g, Loss::Hinge, 1.0, vec![real(&[0.0])], vec![2.0]).unwrap();
        assert_eq!(m.rkhs_norm_sq().unwrap(), 4.0);
        assert_eq!(m.support_fraction(DEFAULT_SUPPORT_THRESHOLD), 1.0);
        let z = Model::from_parts(g, Loss::Hinge, 1.0, vec![real(&[0.0]), real(&[1.0])], vec![0.0, 0.0]).unwrap();
        assert_eq!(z.rkhs_norm_sq().unwrap(), 0.0);
        assert_eq!(z.support_fraction(DEFAULT_SUPPORT_THRESHOLD), 0.0);
    }

    #[test]
    fn probability_examples() {
        let pts = vec![real(&[0.0])];
        let hinge = Model::from_parts(Kernel::Linear, Loss::Hinge, 1.0, pts.clone(), vec![1.0]).unwrap();
        assert_eq!(
            hinge.estimate_probability(&real(&[1.0])).unwrap(),
            ProbabilityEstimate::Unavailable
        );
        let logistic = Model::from_parts(Kernel::Linear, Loss::Logistic, 1.0, pts, vec![1.0]).unwrap();
        assert_eq!(
            logistic.estimate_probability(&real(&[3.0])).unwrap(),
            ProbabilityEstimate::Probability(0.5)
        );
        let quad = Model::from_parts(Kernel::Linear, Loss::Quadratic, 1.0, vec![real(&[1.0])], vec![0.2]).unwrap();
        let p = quad.estimate_probability(&real(&[1.0])).unwrap().probability().unwrap();
        assert!((p - 0.6).abs() < 1e-15);
    }

    #[test]
    fn objective_never_exceeds_value_at_zero() {
        let pts: Vec<Point> = (0..15)
            .map(|i| real(&[libm::sin(i as f64), libm::cos(2.0 * i as f64)]))
            .collect();
        let labels: Vec<f64> = (0..15).map(|i| if i % 3 == 0 { -1.0 } else { 1.0 }).collect();
        let data = LabeledDataset::new(pts, labels).unwrap();
        for loss in Loss::ALL {
            let cfg = TrainConfig::new(Kernel::gaussian(0.8).unwrap(), loss, 0.05);
            let fit = fit(&data, &cfg).unwrap();
            assert!(fit.optimization.objective <= loss.at_zero());
            let exact = regularized_objective(&data, &cfg.kernel, loss, cfg.lambda, &fit.model.coefficients).unwrap();
            assert!((exact - fit.optimization.objective).abs() < 1e-12);
        }
    }
}
