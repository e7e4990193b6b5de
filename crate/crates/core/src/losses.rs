//! Convex surrogate margin losses.
//!
//! Every loss is normalized so that `φ(0) = 1`, which makes each one an upper
//! bound on the 0–1 loss `1{α ≤ 0}` with constant one. The logistic loss is
//! therefore `ln(1 + e^{-α}) / ln 2`.
//!
//! For each loss we expose the conditional risk
//! `C_η(α) = η φ(α) + (1 - η) φ(-α)`, its infimum `H(η)`, the infimum `H⁻(η)`
//! over wrong-signed `α`, and the ψ-transform, which is the convex envelope of
//! `θ ↦ H⁻((1+θ)/2) - H((1+θ)/2)`.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LossError {
    #[error("argument {0} is outside [0, 1]")]
    OutOfUnitInterval(f64),
    #[error("unknown loss `{0}`")]
    UnknownLoss(alloc::string::String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Loss {
    Hinge,
    Logistic,
    Exponential,
    Quadratic,
}

/// Closed subdifferential interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }
}

/// A real number or a signed infinity. Infinite minimizers are kept as markers
/// and never fed into arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInfinity,
    NegInfinity,
}

impl ExtendedReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            _ => None,
        }
    }
}

/// Posterior estimate from a decision value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbabilityEstimate {
    Probability(f64),
    /// The loss does not determine class probabilities (hinge).
    Unavailable,
}

impl ProbabilityEstimate {
    pub fn probability(self) -> Option<f64> {
        match self {
            ProbabilityEstimate::Probability(p) => Some(p),
            ProbabilityEstimate::Unavailable => None,
        }
    }
}

/// Grid used for the convex envelope in [`Loss::psi_transform`].
const PSI_GRID_STEPS: usize = 1000;

impl Loss {
    pub const ALL: [Loss; 4] = [Loss::Hinge, Loss::Logistic, Loss::Exponential, Loss::Quadratic];

    pub fn name(self) -> &'static str {
        match self {
            Loss::Hinge => "hinge",
            Loss::Logistic => "logistic",
            Loss::Exponential => "exp",
            Loss::Quadratic => "quad",
        }
    }

    /// `φ(α)`.
    pub fn value(self, alpha: f64) -> f64 {
        match self {
            Loss::Hinge => (1.0 - alpha).max(0.0),
            Loss::Logistic => softplus(-alpha) / core::f64::consts::LN_2,
            Loss::Exponential => libm::exp(-alpha),
            Loss::Quadratic => (1.0 - alpha) * (1.0 - alpha),
        }
    }

    /// `φ(0)`; equal to one for every variant.
    pub fn at_zero(self) -> f64 {
        self.value(0.0)
    }

    /// `φ''(0)`, the curvature at the start of training (zero for the hinge,
    /// whose kink is at one).
    pub fn curvature_at_zero(self) -> f64 {
        match self {
            Loss::Hinge => 0.0,
            Loss::Logistic => 0.25 / core::f64::consts::LN_2,
            Loss::Exponential => 1.0,
            Loss::Quadratic => 2.0,
        }
    }

    /// The exact subdifferential `∂φ(α)`.
    pub fn subdifferential(self, alpha: f64) -> Interval {
        match self {
            Loss::Hinge => {
                if alpha < 1.0 {
                    Interval::point(-1.0)
                } else if alpha > 1.0 {
                    Interval::point(0.0)
                } else {
                    Interval { lo: -1.0, hi: 0.0 }
                }
            }
            Loss::Logistic => Interval::point(-logistic_sigmoid(-alpha) / core::f64::consts::LN_2),
            Loss::Exponential => Interval::point(-libm::exp(-alpha)),
            Loss::Quadratic => Interval::point(-2.0 * (1.0 - alpha)),
        }
    }

    /// `η φ(α) + (1 - η) φ(-α)`.
    pub fn conditional_risk(self, eta: f64, alpha: f64) -> f64 {
        // Skip zero-weight terms so that η ∈ {0, 1} never multiplies 0 · ∞.
        let mut r = 0.0;
        if eta != 0.0 {
            r += eta * self.value(alpha);
        }
        if eta != 1.0 {
            r += (1.0 - eta) * self.value(-alpha);
        }
        r
    }

    /// A global minimizer of `α ↦ C_η(α)`.
    pub fn conditional_minimizer(self, eta: f64) -> ExtendedReal {
        match self {
            Loss::Hinge => ExtendedReal::Finite(if eta > 0.5 {
                1.0
            } else if eta < 0.5 {
                -1.0
            } else {
                0.0
            }),
            Loss::Logistic => log_odds(eta, 1.0),
            Loss::Exponential => log_odds(eta, 0.5),
            Loss::Quadratic => ExtendedReal::Finite(2.0 * eta - 1.0),
        }
    }

    /// `H(η) = inf_α C_η(α)`, in closed form.
    pub fn optimal_conditional_risk(self, eta: f64) -> f64 {
        let m = eta.min(1.0 - eta);
        match self {
            Loss::Hinge => 2.0 * m,
            Loss::Logistic => binary_entropy_bits(eta),
            Loss::Exponential => 2.0 * libm::sqrt(eta * (1.0 - eta)),
            Loss::Quadratic => 4.0 * eta * (1.0 - eta),
        }
    }

    /// `H⁻(η)`: the infimum of `C_η(α)` over `α(2η - 1) ≤ 0`.
    ///
    /// `C_η` is convex with an unconstrained minimizer of the same sign as
    /// `2η - 1`, so the constrained infimum sits at `α = 0`.
    pub fn wrong_sign_conditional_risk(self, eta: f64) -> f64 {
        self.conditional_risk(eta, 0.0)
    }

    /// `H⁻((1+θ)/2) - H((1+θ)/2)` before taking the convex envelope.
    pub fn calibration_gap(self, theta: f64) -> f64 {
        let eta = (1.0 + theta) / 2.0;
        self.wrong_sign_conditional_risk(eta) - self.optimal_conditional_risk(eta)
    }

    /// ψ(θ): the largest convex function below [`Loss::calibration_gap`],
    /// computed as the lower convex hull of the gap sampled on a 1e-3 grid
    /// together with θ itself.
    pub fn psi_transform(self, theta: f64) -> Result<f64, LossError> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(LossError::OutOfUnitInterval(theta));
        }
        let mut xs: Vec<f64> = (0..=PSI_GRID_STEPS).map(|i| i as f64 / PSI_GRID_STEPS as f64).collect();
        if let Err(pos) = xs.binary_search_by(|x| x.total_cmp(&theta)) {
            xs.insert(pos, theta);
        }
        let samples: Vec<(f64, f64)> = xs.iter().map(|&x| (x, self.calibration_gap(x))).collect();
        Ok(lower_hull_at(&samples, theta).max(0.0))
    }

    /// Inverse of the conditional minimizer where it is injective.
    pub fn invert_link(self, f: f64) -> ProbabilityEstimate {
        match self {
            Loss::Hinge => ProbabilityEstimate::Unavailable,
            Loss::Logistic => ProbabilityEstimate::Probability(logistic_sigmoid(f)),
            Loss::Exponential => ProbabilityEstimate::Probability(logistic_sigmoid(2.0 * f)),
            Loss::Quadratic => ProbabilityEstimate::Probability(((f + 1.0) / 2.0).clamp(0.0, 1.0)),
        }
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Loss {
    type Err = LossError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "hinge" => Ok(Loss::Hinge),
            "logistic" => Ok(Loss::Logistic),
            "exp" => Ok(Loss::Exponential),
            "quad" => Ok(Loss::Quadratic),
            other => Err(LossError::UnknownLoss(other.into())),
        }
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + libm::log1p(libm::exp(-x))
    } else {
        libm::log1p(libm::exp(x))
    }
}

fn logistic_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

fn log_odds(eta: f64, scale: f64) -> ExtendedReal {
    if eta <= 0.0 {
        ExtendedReal::NegInfinity
    } else if eta >= 1.0 {
        ExtendedReal::PosInfinity
    } else {
        ExtendedReal::Finite(scale * (libm::log(eta) - libm::log1p(-eta)))
    }
}

fn binary_entropy_bits(eta: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * libm::log2(p) };
    term(eta) + term(1.0 - eta)
}

/// Evaluates the lower convex hull of `samples` (sorted by x) at `x`.
fn lower_hull_at(samples: &[(f64, f64)], x: f64) -> f64 {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(samples.len());
    for &p in samples {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b when it lies on or above the chord a→p
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    match hull.iter().position(|&(hx, _)| hx >= x) {
        Some(0) => hull[0].1,
        None => hull[hull.len() - 1].1,
        Some(i) => {
            let (a, b) = (hull[i - 1], hull[i]);
            if b.0 == x {
                b.1
            } else {
                a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
            }
        }
    }
}
