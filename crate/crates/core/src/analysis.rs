//! Exact risk oracles on finite distributions and a two-component Gaussian
//! benchmark with a known Bayes risk.

use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::classify::{sign, ClassifyError, LabeledDataset};
use crate::kernels::Point;
use crate::losses::{Loss, LossError};
use crate::quadrature::{adaptive_simpson, normal_cdf, normal_pdf};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("empty support")]
    EmptySupport,
    #[error("support, marginal and eta lengths differ ({support}, {marginal}, {eta})")]
    LengthMismatch {
        support: usize,
        marginal: usize,
        eta: usize,
    },
    #[error("marginal sums to {0}, expected 1")]
    NotNormalized(f64),
    #[error("invalid probability {0}")]
    InvalidProbability(f64),
    #[error("support points {0} and {1} coincide")]
    DuplicateSupport(usize, usize),
    #[error("support points have differing dimensions")]
    DimensionMismatch,
    #[error("invalid benchmark: {0}")]
    InvalidBenchmark(&'static str),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Slack allowed in the ψ-bound comparison.
pub const PSI_BOUND_SLACK: f64 = 1e-9;

/// Finite joint law of (X, Y): support points `xⱼ` with masses `pⱼ` and
/// `ηⱼ = P(Y = 1 | X = xⱼ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteJoint {
    support: Vec<Vec<f64>>,
    marginal: Vec<f64>,
    eta: Vec<f64>,
}

impl DiscreteJoint {
    pub fn new(support: Vec<Vec<f64>>, marginal: Vec<f64>, eta: Vec<f64>) -> Result<Self, AnalysisError> {
        let m = support.len();
        if m == 0 {
            return Err(AnalysisError::EmptySupport);
        }
        if marginal.len() != m || eta.len() != m {
            return Err(AnalysisError::LengthMismatch {
                support: m,
                marginal: marginal.len(),
                eta: eta.len(),
            });
        }
        if support.iter().any(|x| x.len() != support[0].len()) {
            return Err(AnalysisError::DimensionMismatch);
        }
        for &v in marginal.iter().chain(&eta) {
            if !(0.0..=1.0).contains(&v) {
                return Err(AnalysisError::InvalidProbability(v));
            }
        }
        let total: f64 = marginal.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(AnalysisError::NotNormalized(total));
        }
        for i in 0..m {
            for j in i + 1..m {
                if support[i] == support[j] {
                    return Err(AnalysisError::DuplicateSupport(i, j));
                }
            }
        }
        Ok(DiscreteJoint { support, marginal, eta })
    }

    pub fn support(&self) -> &[Vec<f64>] {
        &self.support
    }

    pub fn marginal(&self) -> &[f64] {
        &self.marginal
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    fn atoms(&self) -> impl Iterator<Item = (&[f64], f64, f64)> {
        self.support
            .iter()
            .zip(&self.marginal)
            .zip(&self.eta)
            .map(|((x, &p), &e)| (x.as_slice(), p, e))
    }

    /// `R* = Σⱼ pⱼ min(ηⱼ, 1 - ηⱼ)`.
    pub fn bayes_risk(&self) -> f64 {
        self.atoms().map(|(_, p, e)| p * e.min(1.0 - e)).sum()
    }

    /// Misclassification risk of `sign(f)` (with `sign(0) = +1`).
    pub fn risk(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.atoms()
            .map(|(x, p, e)| p * if sign(f(x)) > 0.0 { 1.0 - e } else { e })
            .sum()
    }

    /// `E φ(Y f(X))`.
    pub fn phi_risk(&self, f: impl Fn(&[f64]) -> f64, loss: Loss) -> f64 {
        self.atoms().map(|(x, p, e)| p * loss.conditional_risk(e, f(x))).sum()
    }

    /// `R_φ* = Σⱼ pⱼ H(ηⱼ)`.
    pub fn optimal_phi_risk(&self, loss: Loss) -> f64 {
        self.atoms().map(|(_, p, e)| p * loss.optimal_conditional_risk(e)).sum()
    }

    /// Evaluates both sides of `ψ(R(f) - R*) ≤ R_φ(f) - R_φ*` exactly.
    pub fn check_psi_bound(&self, f: impl Fn(&[f64]) -> f64, loss: Loss) -> Result<PsiCheck, AnalysisError> {
        let excess_risk = (self.risk(&f) - self.bayes_risk()).clamp(0.0, 1.0);
        let excess_phi_risk = self.phi_risk(&f, loss) - self.optimal_phi_risk(loss);
        let psi_value = loss.psi_transform(excess_risk)?;
        Ok(PsiCheck {
            excess_risk,
            excess_phi_risk,
            psi_value,
            holds: psi_value <= excess_phi_risk + PSI_BOUND_SLACK,
        })
    }

    /// `n` i.i.d. draws.
    pub fn sample(&self, n: usize, seed: u64) -> Result<LabeledDataset, AnalysisError> {
        let mut rng = rng::seeded(seed);
        let cumulative: Vec<f64> = self
            .marginal
            .iter()
            .scan(0.0, |acc, &p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        let mut points = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let u: f64 = rng.gen::<f64>() * cumulative[cumulative.len() - 1];
            let j = cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1);
            let y = if rng.gen::<f64>() < self.eta[j] { 1.0 } else { -1.0 };
            points.push(Point::Real(self.support[j].clone()));
            labels.push(y);
        }
        Ok(LabeledDataset::new(points, labels)?)
    }
}

/// Both sides of the ψ-transform inequality on one distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiCheck {
    pub excess_risk: f64,
    pub excess_phi_risk: f64,
    pub psi_value: f64,
    pub holds: bool,
}

/// Equal-prior mixture of two isotropic Gaussians with a shared standard
/// deviation; the `positive` component generates label +1.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureBenchmark {
    positive: Vec<f64>,
    negative: Vec<f64>,
    sigma: f64,
}

/// Absolute tolerance of the Bayes-risk quadrature.
pub const BAYES_RISK_QUADRATURE_TOL: f64 = 1e-6;

impl MixtureBenchmark {
    pub fn new(positive: Vec<f64>, negative: Vec<f64>, sigma: f64) -> Result<Self, AnalysisError> {
        if positive.is_empty() || positive.len() != negative.len() {
            return Err(AnalysisError::InvalidBenchmark(
                "component means must share a nonzero dimension",
            ));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(AnalysisError::InvalidBenchmark("standard deviation must be positive"));
        }
        Ok(MixtureBenchmark {
            positive,
            negative,
            sigma,
        })
    }

    /// One-dimensional components at `±offset` with unit variance.
    pub fn symmetric_1d(offset: f64) -> Self {
        MixtureBenchmark {
            positive: alloc::vec![offset],
            negative: alloc::vec![-offset],
            sigma: 1.0,
        }
    }

    pub fn dimension(&self) -> usize {
        self.positive.len()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Signed coordinates of the two means along the inter-mean axis, and
    /// that unit axis (the first coordinate axis when the means coincide).
    fn axis(&self) -> (f64, f64, Vec<f64>) {
        let diff: Vec<f64> = self.positive.iter().zip(&self.negative).map(|(a, b)| a - b).collect();
        let len = crate::linalg::norm(&diff);
        let unit: Vec<f64> = if len > 0.0 {
            diff.iter().map(|d| d / len).collect()
        } else {
            let mut e = alloc::vec![0.0; diff.len()];
            e[0] = 1.0;
            e
        };
        let a = crate::linalg::dot(&unit, &self.positive);
        let b = crate::linalg::dot(&unit, &self.negative);
        (a, b, unit)
    }

    /// `η(x) = P(Y = 1 | X = x)`.
    pub fn eta(&self, x: &[f64]) -> f64 {
        // Log-odds are linear along the inter-mean axis.
        let s2 = self.sigma * self.sigma;
        let sq = |m: &[f64]| -> f64 { x.iter().zip(m).map(|(a, b)| (a - b) * (a - b)).sum() };
        let log_odds = (sq(&self.negative) - sq(&self.positive)) / (2.0 * s2);
        1.0 / (1.0 + libm::exp(-log_odds))
    }

    /// Bayes risk by adaptive quadrature of `min(π₊ p₊, π₋ p₋)` along the
    /// inter-mean axis; orthogonal directions carry identical densities in both
    /// components and integrate out.
    pub fn bayes_risk(&self) -> f64 {
        let (a, b, _) = self.axis();
        let s = self.sigma;
        let integrand = |t: f64| 0.5 * normal_pdf(t, a, s).min(normal_pdf(t, b, s));
        let lo = a.min(b) - 12.0 * s;
        let hi = a.max(b) + 12.0 * s;
        adaptive_simpson(&integrand, lo, hi, BAYES_RISK_QUADRATURE_TOL)
    }

    /// `Φ(-Δ / 2σ)` with `Δ` the distance between the means.
    pub fn bayes_risk_closed_form(&self) -> f64 {
        let (a, b, _) = self.axis();
        normal_cdf(-(a - b).abs() / (2.0 * self.sigma))
    }

    /// `n` i.i.d. labelled draws with equal class priors.
    pub fn sample(&self, n: usize, seed: u64) -> Result<LabeledDataset, AnalysisError> {
        let mut rng = rng::seeded(seed);
        let mut points = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let positive = rng.gen::<bool>();
            let mean = if positive { &self.positive } else { &self.negative };
            let x: Vec<f64> = mean
                .iter()
                .map(|&m| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    m + self.sigma * z
                })
                .collect();
            points.push(Point::Real(x));
            labels.push(if positive { 1.0 } else { -1.0 });
        }
        Ok(LabeledDataset::new(points, labels)?)
    }

    /// Exact misclassification risk of `sign(f)` for one-dimensional
    /// benchmarks. Sign changes of `f` are located on a grid of `grid_step`
    /// and refined by bisection; class masses between them come from the
    /// normal CDF.
    pub fn risk_1d(&self, f: &dyn Fn(f64) -> f64, grid_step: f64) -> Result<f64, AnalysisError> {
        if self.dimension() != 1 {
            return Err(AnalysisError::InvalidBenchmark(
                "risk_1d needs a one-dimensional benchmark",
            ));
        }
        let (p, q) = (self.positive[0], self.negative[0]);
        let s = self.sigma;
        let lo = p.min(q) - 12.0 * s;
        let hi = p.max(q) + 12.0 * s;
        let steps = libm::ceil((hi - lo) / grid_step) as usize;

        // Breakpoints where sign(f) flips, and the sign on the first segment.
        let mut cuts = Vec::new();
        let mut prev_x = lo;
        let mut prev_s = sign(f(lo));
        let first = prev_s;
        for i in 1..=steps {
            let x = if i == steps { hi } else { lo + i as f64 * grid_step };
            let s_x = sign(f(x));
            if s_x != prev_s {
                let (mut a, mut b) = (prev_x, x);
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    if sign(f(m)) == prev_s {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                cuts.push(0.5 * (a + b));
            }
            prev_x = x;
            prev_s = s_x;
        }

        // Mass of the wrong class on each segment; the tails beyond ±12σ are
        // attributed to the end segments.
        let mass = |mean: f64, a: f64, b: f64| normal_cdf((b - mean) / s) - normal_cdf((a - mean) / s);
        let mut edges = alloc::vec![f64::NEG_INFINITY];
        edges.extend(cuts);
        edges.push(f64::INFINITY);
        let mut risk = 0.0;
        let mut current = first;
        for w in edges.windows(2) {
            let wrong_mean = if current > 0.0 { q } else { p };
            risk += 0.5 * mass(wrong_mean, w[0], w[1]);
            current = -current;
        }
        Ok(risk)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_point(eta: [f64; 2]) -> DiscreteJoint {
        DiscreteJoint::new(vec![vec![0.0], vec![1.0]], vec![0.5, 0.5], eta.to_vec()).unwrap()
    }

    #[test]
    fn validation() {
        assert_eq!(
            DiscreteJoint::new(vec![], vec![], vec![]),
            Err(AnalysisError::EmptySupport)
        );
        assert!(matches!(
            DiscreteJoint::new(vec![vec![0.0]], vec![0.9], vec![0.5]),
            Err(AnalysisError::NotNormalized(_))
        ));
        assert!(matches!(
            DiscreteJoint::new(vec![vec![0.0], vec![0.0]], vec![0.5, 0.5], vec![0.5, 0.5]),
            Err(AnalysisError::DuplicateSupport(0, 1))
        ));
        assert!(matches!(
            DiscreteJoint::new(vec![vec![0.0]], vec![1.0], vec![1.5]),
            Err(AnalysisError::InvalidProbability(_))
        ));
    }

    #[test]
    fn bayes_risk_examples() {
        assert_eq!(two_point([1.0, 1.0]).bayes_risk(), 0.0);
        assert_eq!(two_point([0.5, 0.5]).bayes_risk(), 0.5);
        assert!((two_point([0.9, 0.2]).bayes_risk() - 0.15).abs() < 1e-15);
    }

    #[test]
    fn risk_examples() {
        let d = two_point([0.9, 0.2]);
        assert_eq!(d.phi_risk(|_| 0.0, Loss::Hinge), 1.0);
        let bayes = |x: &[f64]| if x[0] < 0.5 { 1.0 } else { -1.0 };
        assert!((d.risk(bayes) - d.bayes_risk()).abs() < 1e-15);
        // hinge: H(η) = 2 min(η, 1-η)
        assert!((d.optimal_phi_risk(Loss::Hinge) - (0.5 * 0.2 + 0.5 * 0.4)).abs() < 1e-15);
    }

    #[test]
    fn psi_check_at_bayes_rule() {
        let d = two_point([0.9, 0.2]);
        let bayes = |x: &[f64]| if x[0] < 0.5 { 1.0 } else { -1.0 };
        let c = d.check_psi_bound(bayes, Loss::Hinge).unwrap();
        assert!(c.excess_risk.abs() < 1e-15);
        assert!(c.excess_phi_risk.abs() < 1e-15);
        assert!(c.holds);
    }

    #[test]
    fn psi_check_with_one_flipped_point() {
        // flipping the first atom costs p·|2η-1| = 0.5·0.8 in 0–1 risk and
        // p·(C_η(-1) - H(η)) = 0.5·(1.8 - 0.2) in hinge risk
        let d = two_point([0.9, 0.2]);
        let flipped = |_: &[f64]| -1.0;
        let c = d.check_psi_bound(flipped, Loss::Hinge).unwrap();
        assert!((c.excess_risk - 0.4).abs() < 1e-15);
        assert!((c.psi_value - 0.4).abs() < 1e-12);
        assert!((c.excess_phi_risk - 0.8).abs() < 1e-12);
        assert!(c.holds);
    }

    #[test]
    fn sampling() {
        let single = DiscreteJoint::new(vec![vec![2.0, 3.0]], vec![1.0], vec![0.3]).unwrap();
        let s = single.sample(50, 1).unwrap();
        assert!(s.points().iter().all(|p| p.as_real() == Some(&[2.0, 3.0][..])));
        assert_eq!(single.sample(50, 9).unwrap(), single.sample(50, 9).unwrap());

        let d = DiscreteJoint::new(vec![vec![0.0], vec![1.0]], vec![0.3, 0.7], vec![0.5, 0.5]).unwrap();
        let big = d.sample(100_000, 4).unwrap();
        let first = big.points().iter().filter(|p| p.as_real() == Some(&[0.0][..])).count() as f64 / 1e5;
        assert!((first - 0.3).abs() <= 0.01);
    }

    #[test]
    fn mixture_bayes_risk_examples() {
        let b = MixtureBenchmark::symmetric_1d(1.0);
        assert!((b.bayes_risk() - 0.15865525393145707).abs() < 1e-6);
        assert!((b.bayes_risk() - b.bayes_risk_closed_form()).abs() < 1e-6);
        let same = MixtureBenchmark::new(vec![0.3, 1.0], vec![0.3, 1.0], 2.0).unwrap();
        assert!((same.bayes_risk() - 0.5).abs() < 1e-6);
        assert!(MixtureBenchmark::symmetric_1d(10.0).bayes_risk() < 1e-6);
    }

    #[test]
    fn mixture_eta_is_monotone_along_axis() {
        let b = MixtureBenchmark::new(vec![1.0, 1.0], vec![-1.0, 0.0], 1.3).unwrap();
        let mut last = 0.0;
        for i in -40..=40 {
            let t = i as f64 * 0.1;
            let e = b.eta(&[t * 2.0 / libm::sqrt(5.0), t / libm::sqrt(5.0)]);
            assert!(e >= last);
            last = e;
        }
    }

    #[test]
    fn exact_1d_risk_of_bayes_rule() {
        let b = MixtureBenchmark::symmetric_1d(1.0);
        let r = b.risk_1d(&|x| x, 1e-2).unwrap();
        assert!((r - b.bayes_risk_closed_form()).abs() < 1e-12);
        let constant = b.risk_1d(&|_| 1.0, 1e-2).unwrap();
        assert!((constant - 0.5).abs() < 1e-12);
        // threshold at 0.3: 0.5·(Φ(-0.7) + Φ(-1.3))
        let shifted = b.risk_1d(&|x| x - 0.3, 1e-2).unwrap();
        let expected = 0.5 * (normal_cdf(-0.7) + normal_cdf(-1.3));
        assert!((shifted - expected).abs() < 1e-12);
    }
}
