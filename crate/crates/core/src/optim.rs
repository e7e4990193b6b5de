//! Nonsmooth convex minimization from value + subgradient oracles.
//!
//! Two deterministic backends share one interface:
//!
//! * [`Backend::Subgradient`]: `x_{t+1} = x_t - (c / √t) d_t`, returning the
//!   best iterate visited.
//! * [`Backend::Bundle`]: a proximal cutting-plane method that keeps at most
//!   [`MAX_PLANES`] linearizations and halves its prox step after each null
//!   step.
//!
//! An oracle may report a step direction `d = M⁻¹ g` for a positive definite
//! metric `M` of its choosing alongside the Euclidean subgradient `g`. Both
//! backends move along `d` and measure lengths with `⟨g, d⟩`, so a kernel
//! objective can descend in the RKHS geometry while still exposing a true
//! coefficient-space subgradient. Oracles without a preferred metric set
//! `d = g`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::linalg::{axpy, dot, norm};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimError {
    #[error("non-finite objective or subgradient at iteration {iteration}, iterate {iterate:?}")]
    NonFinite { iteration: usize, iterate: Vec<f64> },
    #[error("start point has {got} entries, oracle dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("step constant must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("unknown backend `{0}` (expected `subgrad` or `bundle`)")]
    UnknownBackend(alloc::string::String),
}

/// Oracle output at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    /// Euclidean subgradient `g`.
    pub subgradient: Vec<f64>,
    /// Step direction `M⁻¹ g`.
    pub direction: Vec<f64>,
}

impl Evaluation {
    /// Evaluation in the plain Euclidean metric (`d = g`).
    pub fn euclidean(value: f64, subgradient: Vec<f64>) -> Self {
        Evaluation {
            value,
            direction: subgradient.clone(),
            subgradient,
        }
    }

    fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.subgradient.iter().all(|v| v.is_finite())
            && self.direction.iter().all(|v| v.is_finite())
    }
}

/// A convex function with a subgradient oracle. Implementations must return
/// `g` with `f(y) ≥ f(x) + gᵀ(y - x)` for all `y`.
pub trait Objective {
    fn dimension(&self) -> usize;
    fn evaluate(&self, x: &[f64]) -> Evaluation;

    /// Maps `x` into a closed convex set known to contain a minimizer. The
    /// subgradient backend applies it after every step; the default leaves
    /// `x` unchanged.
    fn project(&self, _x: &mut [f64]) {}
}

/// Closure adapter for Euclidean objectives.
pub struct FnObjective<F> {
    dimension: usize,
    f: F,
}

impl<F> FnObjective<F>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    pub fn new(dimension: usize, f: F) -> Self {
        FnObjective { dimension, f }
    }
}

impl<F> Objective for FnObjective<F>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn evaluate(&self, x: &[f64]) -> Evaluation {
        let (value, g) = (self.f)(x);
        Evaluation::euclidean(value, g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    Subgradient,
    Bundle,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Subgradient => "subgrad",
            Backend::Bundle => "bundle",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = OptimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "subgrad" => Ok(Backend::Subgradient),
            "bundle" => Ok(Backend::Bundle),
            other => Err(OptimError::UnknownBackend(other.into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeConfig {
    pub max_iter: usize,
    /// `c` in the `c/√t` schedule; initial prox step for the bundle backend.
    pub step_c: f64,
    pub backend: Backend,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        MinimizeConfig {
            max_iter: 2000,
            step_c: 1.0,
            backend: Backend::Subgradient,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub minimizer: Vec<f64>,
    /// Objective value at `minimizer`.
    pub objective: f64,
    /// Oracle steps taken after the start point.
    pub iterations: usize,
    /// Euclidean norm of the subgradient reported at `minimizer`.
    pub best_subgradient_norm: f64,
    /// Best-so-far objective after each iteration, starting with the start
    /// point.
    pub history: Vec<f64>,
}

/// Minimizes `oracle` from `start`.
///
/// Runs until `config.max_iter` oracle steps have been taken. The only early
/// exit is exact stationarity: a zero step direction (subgradient backend) or
/// a zero predicted decrease (bundle backend), after which every further
/// iterate would repeat the current one.
pub fn minimize(oracle: &dyn Objective, start: &[f64], config: &MinimizeConfig) -> Result<OptResult, OptimError> {
    if start.len() != oracle.dimension() {
        return Err(OptimError::DimensionMismatch {
            expected: oracle.dimension(),
            got: start.len(),
        });
    }
    if !(config.step_c > 0.0) || !config.step_c.is_finite() {
        return Err(OptimError::InvalidStep(config.step_c));
    }
    match config.backend {
        Backend::Subgradient => subgradient_descent(oracle, start, config),
        Backend::Bundle => proximal_bundle(oracle, start, config),
    }
}

fn checked_eval(oracle: &dyn Objective, x: &[f64], iteration: usize) -> Result<Evaluation, OptimError> {
    let e = oracle.evaluate(x);
    if e.is_finite() {
        Ok(e)
    } else {
        Err(OptimError::NonFinite {
            iteration,
            iterate: x.to_vec(),
        })
    }
}

struct Incumbent {
    x: Vec<f64>,
    value: f64,
    grad_norm: f64,
}

impl Incumbent {
    fn new(x: &[f64], e: &Evaluation) -> Self {
        Incumbent {
            x: x.to_vec(),
            value: e.value,
            grad_norm: norm(&e.subgradient),
        }
    }

    fn offer(&mut self, x: &[f64], e: &Evaluation) {
        if e.value < self.value {
            self.x.copy_from_slice(x);
            self.value = e.value;
            self.grad_norm = norm(&e.subgradient);
        }
    }

    fn finish(self, iterations: usize, history: Vec<f64>) -> OptResult {
        OptResult {
            minimizer: self.x,
            objective: self.value,
            iterations,
            best_subgradient_norm: self.grad_norm,
            history,
        }
    }
}

fn subgradient_descent(
    oracle: &dyn Objective,
    start: &[f64],
    config: &MinimizeConfig,
) -> Result<OptResult, OptimError> {
    let mut x = start.to_vec();
    let mut e = checked_eval(oracle, &x, 0)?;
    let mut best = Incumbent::new(&x, &e);
    let mut history = Vec::with_capacity(config.max_iter + 1);
    history.push(best.value);

    let mut iterations = 0;
    for t in 1..=config.max_iter {
        if e.direction.iter().all(|&v| v == 0.0) {
            break;
        }
        let step = config.step_c / libm::sqrt(t as f64);
        axpy(-step, &e.direction, &mut x);
        oracle.project(&mut x);
        e = checked_eval(oracle, &x, t)?;
        best.offer(&x, &e);
        history.push(best.value);
        iterations = t;
    }
    Ok(best.finish(iterations, history))
}

/// Retained cutting planes in the bundle backend.
pub const MAX_PLANES: usize = 50;
const SERIOUS_FRACTION: f64 = 0.1;
const QP_ITERATIONS: usize = 400;

/// Linearization `f(z) - error + gᵀ(x - z)` around the current center `z`.
struct Plane {
    error: f64,
    subgradient: Vec<f64>,
    direction: Vec<f64>,
}

fn proximal_bundle(oracle: &dyn Objective, start: &[f64], config: &MinimizeConfig) -> Result<OptResult, OptimError> {
    let dim = start.len();
    let mut center = start.to_vec();
    let e0 = checked_eval(oracle, &center, 0)?;
    let mut center_value = e0.value;
    let mut best = Incumbent::new(&center, &e0);
    let mut history = Vec::with_capacity(config.max_iter + 1);
    history.push(best.value);

    let mut planes = vec![Plane {
        error: 0.0,
        subgradient: e0.subgradient,
        direction: e0.direction,
    }];
    let mut prox_step = config.step_c;
    let mut iterations = 0;

    for t in 1..=config.max_iter {
        // Dual of the prox subproblem: min over the simplex of
        // Σ θ_j e_j + (τ/2) θᵀ Q θ with Q_ij = ⟨g_i, d_j⟩.
        let q = plane_products(&planes);
        let errors: Vec<f64> = planes.iter().map(|p| p.error).collect();
        let theta = simplex_qp(&q, &errors, prox_step);

        let mut agg_g = vec![0.0; dim];
        let mut agg_d = vec![0.0; dim];
        let mut agg_e = 0.0;
        for (p, &w) in planes.iter().zip(&theta) {
            if w != 0.0 {
                axpy(w, &p.subgradient, &mut agg_g);
                axpy(w, &p.direction, &mut agg_d);
                agg_e += w * p.error;
            }
        }
        let predicted = agg_e + prox_step * dot(&agg_g, &agg_d);
        if !(predicted > 0.0) {
            break;
        }

        let mut candidate = center.clone();
        axpy(-prox_step, &agg_d, &mut candidate);
        let e = checked_eval(oracle, &candidate, t)?;
        best.offer(&candidate, &e);
        history.push(best.value);
        iterations = t;

        // Linearization error of the new plane relative to the center.
        let shift: Vec<f64> = center.iter().zip(&candidate).map(|(c, x)| c - x).collect();
        let new_error = |center_value: f64| center_value - e.value - dot(&e.subgradient, &shift);

        if planes.len() >= MAX_PLANES {
            let mut keep: Vec<Plane> = Vec::with_capacity(MAX_PLANES);
            let active: Vec<bool> = theta.iter().map(|&w| w > 1e-12).collect();
            for (p, a) in planes.into_iter().zip(active) {
                if a {
                    keep.push(p);
                }
            }
            if keep.len() >= MAX_PLANES {
                keep.clear();
                keep.push(Plane {
                    error: agg_e,
                    subgradient: agg_g.clone(),
                    direction: agg_d.clone(),
                });
            }
            planes = keep;
        }

        if e.value <= center_value - SERIOUS_FRACTION * predicted {
            // Serious step: re-anchor every plane at the new center.
            let step: Vec<f64> = candidate.iter().zip(&center).map(|(x, c)| x - c).collect();
            for p in &mut planes {
                p.error = (p.error + e.value - center_value - dot(&p.subgradient, &step)).max(0.0);
            }
            planes.push(Plane {
                error: 0.0,
                subgradient: e.subgradient,
                direction: e.direction,
            });
            center = candidate;
            center_value = e.value;
            prox_step = (2.0 * prox_step).min(config.step_c);
        } else {
            planes.push(Plane {
                error: new_error(center_value).max(0.0),
                subgradient: e.subgradient,
                direction: e.direction,
            });
            prox_step *= 0.5;
        }
    }
    Ok(best.finish(iterations, history))
}

fn plane_products(planes: &[Plane]) -> Vec<Vec<f64>> {
    let k = planes.len();
    let mut q = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let v = 0.5
                * (dot(&planes[i].subgradient, &planes[j].direction)
                    + dot(&planes[j].subgradient, &planes[i].direction));
            q[i][j] = v;
            q[j][i] = v;
        }
    }
    q
}

/// Accelerated projected gradient for `min_{θ ∈ Δ} eᵀθ + (τ/2) θᵀ Q θ`.
fn simplex_qp(q: &[Vec<f64>], e: &[f64], tau: f64) -> Vec<f64> {
    let k = e.len();
    if k == 1 {
        return vec![1.0];
    }
    // Gershgorin bound on the largest eigenvalue.
    let lipschitz = tau
        * q.iter()
            .map(|row| row.iter().map(|v| libm::fabs(*v)).sum::<f64>())
            .fold(0.0, f64::max);
    let mut theta = vec![0.0; k];
    // start on the plane with the smallest error (the center's own plane)
    let start = e
        .iter()
        .enumerate()
        .fold(0, |bi, (i, &v)| if v < e[bi] { i } else { bi });
    theta[start] = 1.0;
    if !(lipschitz > 0.0) {
        return theta;
    }
    let step = 1.0 / lipschitz;
    let mut y = theta.clone();
    let mut momentum = 1.0;
    for _ in 0..QP_ITERATIONS {
        let grad: Vec<f64> = (0..k).map(|i| e[i] + tau * dot(&q[i], &y)).collect();
        let mut next: Vec<f64> = y.iter().zip(&grad).map(|(v, g)| v - step * g).collect();
        project_to_simplex(&mut next);
        let next_momentum = (1.0 + libm::sqrt(1.0 + 4.0 * momentum * momentum)) / 2.0;
        let beta = (momentum - 1.0) / next_momentum;
        y = next.iter().zip(&theta).map(|(n, o)| n + beta * (n - o)).collect();
        theta = next;
        momentum = next_momentum;
    }
    theta
}

/// Euclidean projection onto the probability simplex.
fn project_to_simplex(v: &mut [f64]) {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let candidate = (cumulative - 1.0) / (i + 1) as f64;
        if s - candidate > 0.0 {
            shift = candidate;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - shift).max(0.0);
    }
}
