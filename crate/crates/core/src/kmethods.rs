//! Kernel canonical correlation for independence testing, and kernel
//! dimension reduction through the trace of the conditional covariance
//! operator.
//!
//! Both methods work through pivoted incomplete Cholesky factors of the Gram
//! matrices, so their cost is O(n·k²) in the factor rank k rather than O(n³).
//!
//! Kernel CCA solves
//!
//! ```text
//! [0      K̃₁K̃₂] [a]       [(K̃₁ + nκ/2·I)²  0             ] [a]
//! [K̃₂K̃₁   0   ] [b]  = ρ  [0              (K̃₂ + nκ/2·I)²] [b]
//! ```
//!
//! for centered Grams `K̃`. With `uᵢ = (K̃ᵢ + nκ/2·I) aᵢ` this becomes a
//! singular value problem for `A₁A₂`, `Aᵢ = (K̃ᵢ + nκ/2·I)⁻¹K̃ᵢ`, and both
//! `Aᵢ` share eigenvectors with `K̃ᵢ`.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::kernels::{self, Kernel, KernelError, LowRankFactor, Point};
use crate::linalg::{self, Cholesky, LinalgError, Matrix, SymmetricEigen};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelMethodError {
    #[error("sample counts differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("regularization must be positive and finite, got {0}")]
    InvalidRegularization(f64),
    #[error("non-finite Gram matrix entries")]
    NonFiniteGram,
    #[error("need at least {needed} permutations, got {got}")]
    TooFewPermutations { needed: usize, got: usize },
    #[error("projection is not orthonormal (max deviation {0:e})")]
    NotOrthonormal(f64),
    #[error("target dimension {target} is not in 1..={dimension}")]
    InvalidTargetDimension { target: usize, dimension: usize },
    #[error("all inputs are identical")]
    DegenerateData,
    #[error("inputs have inconsistent dimensions")]
    DimensionMismatch,
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Minimum number of permutations accepted by [`independence_test`].
pub const MIN_PERMUTATIONS: usize = 19;
/// Default kernel CCA regularization.
pub const DEFAULT_KAPPA: f64 = 1e-2;
/// Default factor tolerance, relative to the Gram trace.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-12;

/// First kernel canonical correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct CcaResult {
    /// Clipped to [0, 1].
    pub rho: f64,
    pub rho_unclipped: f64,
    /// Dual coefficients of the first canonical pair.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub kappa: f64,
}

/// Spectral form of `A = (K̃ + sI)⁻¹K̃`: orthonormal eigenvectors `U` of `K̃`
/// with eigenvalues `λ`, shrunk to `λ / (λ + s)`.
struct Whitened {
    vectors: Matrix,
    eigenvalues: Vec<f64>,
    shrunk: Vec<f64>,
}

/// Eigenvalues below this fraction of the largest are treated as zero.
const SPECTRUM_FLOOR: f64 = 1e-13;

fn centered_factor(kernel: &Kernel, points: &[Point], rank_tol: f64) -> Result<Matrix, KernelMethodError> {
    let trace: f64 = points.iter().map(|p| kernel.eval(p, p)).sum::<Result<f64, _>>()?;
    if !trace.is_finite() {
        return Err(KernelMethodError::NonFiniteGram);
    }
    let LowRankFactor { mut factor, .. } =
        kernels::incomplete_cholesky(kernel, points, rank_tol * trace, points.len())?;
    if factor.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(KernelMethodError::NonFiniteGram);
    }
    center_columns(&mut factor);
    Ok(factor)
}

/// `H G` for `H = I - (1/n)11ᵀ`, so that `(HG)(HG)ᵀ = H GGᵀ H`.
fn center_columns(g: &mut Matrix) {
    let n = g.rows();
    for j in 0..g.cols() {
        let mean = (0..n).map(|i| g[(i, j)]).sum::<f64>() / n as f64;
        for i in 0..n {
            g[(i, j)] -= mean;
        }
    }
}

fn whiten(g: &Matrix, shift: f64) -> Result<Whitened, KernelMethodError> {
    let n = g.rows();
    if g.cols() == 0 {
        return Ok(Whitened {
            vectors: Matrix::zeros(n, 0),
            eigenvalues: vec![],
            shrunk: vec![],
        });
    }
    let eig = SymmetricEigen::new(&g.transpose_matmul(g))?;
    let top = eig.values[0].max(0.0);
    let keep: Vec<usize> = (0..eig.values.len())
        .filter(|&j| eig.values[j] > SPECTRUM_FLOOR * top)
        .collect();
    // U = G W Λ^{-1/2}
    let w = Matrix::from_fn(g.cols(), keep.len(), |i, j| {
        eig.vectors[(i, keep[j])] / libm::sqrt(eig.values[keep[j]])
    });
    let vectors = g.matmul(&w);
    let eigenvalues: Vec<f64> = keep.iter().map(|&j| eig.values[j]).collect();
    let shrunk = eigenvalues.iter().map(|&l| l / (l + shift)).collect();
    Ok(Whitened {
        vectors,
        eigenvalues,
        shrunk,
    })
}

/// `S₁ (U₁ᵀ U₂) S₂` with the rows of `U₂` optionally permuted.
fn coupling(w1: &Whitened, w2: &Whitened, permutation: Option<&[usize]>) -> Matrix {
    let (u1, u2) = (&w1.vectors, &w2.vectors);
    let mut c = Matrix::zeros(u1.cols(), u2.cols());
    for i in 0..u1.rows() {
        let src = permutation.map_or(i, |p| p[i]);
        let r2 = u2.row(src);
        for (a, &v) in u1.row(i).iter().enumerate() {
            if v != 0.0 {
                linalg::axpy(v, r2, c.row_mut(a));
            }
        }
    }
    for a in 0..c.rows() {
        for b in 0..c.cols() {
            c[(a, b)] *= w1.shrunk[a] * w2.shrunk[b];
        }
    }
    c
}

fn check_pair(n1: usize, n2: usize, kappa: f64) -> Result<(), KernelMethodError> {
    if n1 != n2 {
        return Err(KernelMethodError::LengthMismatch(n1, n2));
    }
    if n1 < 2 {
        return Err(KernelMethodError::TooFewSamples { needed: 2, got: n1 });
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(KernelMethodError::InvalidRegularization(kappa));
    }
    Ok(())
}

struct CcaProblem {
    left: Whitened,
    right: Whitened,
    shift: f64,
}

impl CcaProblem {
    fn new(
        x1s: &[Point],
        x2s: &[Point],
        k1: &Kernel,
        k2: &Kernel,
        kappa: f64,
        rank_tol: f64,
    ) -> Result<Self, KernelMethodError> {
        check_pair(x1s.len(), x2s.len(), kappa)?;
        let n = x1s.len() as f64;
        let shift = n * kappa / 2.0;
        let left = whiten(&centered_factor(k1, x1s, rank_tol)?, shift)?;
        let right = whiten(&centered_factor(k2, x2s, rank_tol)?, shift)?;
        Ok(CcaProblem { left, right, shift })
    }

    fn rho(&self, permutation: Option<&[usize]>) -> Result<f64, KernelMethodError> {
        let t = coupling(&self.left, &self.right, permutation);
        if t.rows() == 0 || t.cols() == 0 {
            return Ok(0.0);
        }
        Ok(linalg::largest_singular_value(&t)?)
    }

    fn solve(&self, kappa: f64) -> Result<CcaResult, KernelMethodError> {
        let n = self.left.vectors.rows();
        let t = coupling(&self.left, &self.right, None);
        if t.rows() == 0 || t.cols() == 0 {
            return Ok(CcaResult {
                rho: 0.0,
                rho_unclipped: 0.0,
                a: vec![0.0; n],
                b: vec![0.0; n],
                kappa,
            });
        }
        // top left/right singular vectors of T
        let eig = SymmetricEigen::new(&t.matmul(&t.transpose()))?;
        let sigma = libm::sqrt(eig.values[0].max(0.0));
        let p = eig.vectors.column(0);
        let mut q = t.transpose_mul_vec(&p);
        if sigma > 0.0 {
            q.iter_mut().for_each(|v| *v /= sigma);
        }
        // a = (K̃₁ + sI)⁻¹ U₁ p = U₁ diag(1/(λ + s)) p
        let dual = |w: &Whitened, coef: &[f64]| -> Vec<f64> {
            let scaled: Vec<f64> = coef
                .iter()
                .zip(&w.eigenvalues)
                .map(|(c, l)| c / (l + self.shift))
                .collect();
            w.vectors.mul_vec(&scaled)
        };
        Ok(CcaResult {
            rho: sigma.clamp(0.0, 1.0),
            rho_unclipped: sigma,
            a: dual(&self.left, &p),
            b: dual(&self.right, &q),
            kappa,
        })
    }
}

/// First regularized kernel canonical correlation between paired samples.
pub fn kernel_cca(
    x1s: &[Point],
    x2s: &[Point],
    k1: &Kernel,
    k2: &Kernel,
    kappa: f64,
) -> Result<CcaResult, KernelMethodError> {
    kernel_cca_with_tolerance(x1s, x2s, k1, k2, kappa, DEFAULT_RANK_TOLERANCE)
}

/// [`kernel_cca`] with an explicit factor tolerance (relative to each Gram
/// trace).
pub fn kernel_cca_with_tolerance(
    x1s: &[Point],
    x2s: &[Point],
    k1: &Kernel,
    k2: &Kernel,
    kappa: f64,
    rank_tol: f64,
) -> Result<CcaResult, KernelMethodError> {
    CcaProblem::new(x1s, x2s, k1, k2, kappa, rank_tol)?.solve(kappa)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceResult {
    pub rho: f64,
    pub p_value: f64,
    /// ρ for each shuffle, in replicate order.
    pub null_samples: Vec<f64>,
}

/// Permutation test of independence using the kernel CCA statistic.
///
/// Shuffles permute `x2s` only; shuffle `b` draws from
/// `rng::replicate(seed, b)`. The p-value is the add-one estimate
/// `(1 + #{ρ_b ≥ ρ}) / (B + 1)`.
pub fn independence_test(
    x1s: &[Point],
    x2s: &[Point],
    k1: &Kernel,
    k2: &Kernel,
    kappa: f64,
    permutations: usize,
    seed: u64,
) -> Result<IndependenceResult, KernelMethodError> {
    if permutations < MIN_PERMUTATIONS {
        return Err(KernelMethodError::TooFewPermutations {
            needed: MIN_PERMUTATIONS,
            got: permutations,
        });
    }
    let problem = CcaProblem::new(x1s, x2s, k1, k2, kappa, DEFAULT_RANK_TOLERANCE)?;
    let observed = problem.rho(None)?.clamp(0.0, 1.0);
    let n = x1s.len();
    let mut null_samples = Vec::with_capacity(permutations);
    let mut exceed = 0usize;
    for b in 0..permutations {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng::replicate(seed, b as u64));
        let rho = problem.rho(Some(&perm))?.clamp(0.0, 1.0);
        // ties count as exceedances; relative slack absorbs round-off
        if rho >= observed - 1e-12 * observed.max(1e-300) {
            exceed += 1;
        }
        null_samples.push(rho);
    }
    Ok(IndependenceResult {
        rho: observed,
        p_value: (1 + exceed) as f64 / (permutations + 1) as f64,
        null_samples,
    })
}

/// Settings for the kernel dimension reduction objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdrSettings {
    /// ε in `(G̃ + nεI)⁻¹`.
    pub epsilon: f64,
    /// `None` uses dense Grams; `Some(tol)` uses incomplete Cholesky factors
    /// with residual trace `tol · trace`.
    pub rank_tolerance: Option<f64>,
}

impl Default for KdrSettings {
    fn default() -> Self {
        KdrSettings {
            epsilon: 1e-3,
            rank_tolerance: Some(DEFAULT_RANK_TOLERANCE),
        }
    }
}

/// Maximum allowed deviation of `BᵀB` from the identity.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-8;

fn orthonormality_error(b: &Matrix) -> f64 {
    let btb = b.transpose_matmul(b);
    btb.max_abs_diff(&Matrix::identity(b.cols()))
}

fn project(b: &Matrix, xs: &[Vec<f64>]) -> Vec<Point> {
    xs.iter().map(|x| Point::Real(b.transpose_mul_vec(x))).collect()
}

/// Precomputed response side of the KDR objective.
struct ResponseGram {
    /// Centered factor `F̃` with `G̃_Y ≈ F̃F̃ᵀ` (low-rank mode).
    factor: Option<Matrix>,
    /// Centered dense Gram (dense mode).
    dense: Option<Matrix>,
}

struct KdrProblem<'a> {
    xs: &'a [Vec<f64>],
    kx: Kernel,
    settings: KdrSettings,
    response: ResponseGram,
}

impl<'a> KdrProblem<'a> {
    fn new(
        xs: &'a [Vec<f64>],
        ys: &[Point],
        kx: &Kernel,
        ky: &Kernel,
        settings: KdrSettings,
    ) -> Result<Self, KernelMethodError> {
        if xs.len() != ys.len() {
            return Err(KernelMethodError::LengthMismatch(xs.len(), ys.len()));
        }
        if xs.is_empty() {
            return Err(KernelMethodError::TooFewSamples { needed: 1, got: 0 });
        }
        if xs.iter().any(|x| x.len() != xs[0].len()) {
            return Err(KernelMethodError::DimensionMismatch);
        }
        if !(settings.epsilon > 0.0) || !settings.epsilon.is_finite() {
            return Err(KernelMethodError::InvalidRegularization(settings.epsilon));
        }
        let response = match settings.rank_tolerance {
            Some(tol) => ResponseGram {
                factor: Some(centered_factor(ky, ys, tol)?),
                dense: None,
            },
            None => ResponseGram {
                factor: None,
                dense: Some(kernels::center_gram(&kernels::gram(ky, ys)?).into_matrix()),
            },
        };
        Ok(KdrProblem {
            xs,
            kx: *kx,
            settings,
            response,
        })
    }

    /// Objective at any d×m matrix, orthonormal or not.
    fn value(&self, b: &Matrix) -> Result<f64, KernelMethodError> {
        let z = project(b, self.xs);
        let n = z.len() as f64;
        let s = n * self.settings.epsilon;
        match (
            &self.response.factor,
            &self.response.dense,
            self.settings.rank_tolerance,
        ) {
            (Some(f), _, Some(tol)) => {
                // Tr[F̃F̃ᵀ (G̃G̃ᵀ + sI)⁻¹]
                //   = (‖F̃‖² - ‖L⁻¹ G̃ᵀF̃‖²) / s,  LLᵀ = sI + G̃ᵀG̃
                let g = centered_factor(&self.kx, &z, tol)?;
                let mut inner = g.transpose_matmul(&g);
                inner.add_diagonal(s);
                let chol = Cholesky::factor(&inner)?;
                let cross = g.transpose_matmul(f);
                let mut explained = 0.0;
                for j in 0..cross.cols() {
                    let mut col = cross.column(j);
                    chol.forward_substitute(&mut col);
                    explained += linalg::dot(&col, &col);
                }
                let total: f64 = f.as_slice().iter().map(|v| v * v).sum();
                Ok((total - explained) / s)
            }
            (_, Some(gy), _) => {
                let mut gx = kernels::center_gram(&kernels::gram(&self.kx, &z)?).into_matrix();
                gx.add_diagonal(s);
                let chol = Cholesky::factor(&gx)?;
                // Tr[G̃_Y M⁻¹] = Σ_j (M⁻¹ G̃_Y)_jj
                let mut tr = 0.0;
                for j in 0..gy.cols() {
                    let col = chol.solve(&gy.column(j));
                    tr += col[j];
                }
                Ok(tr)
            }
            _ => unreachable!("response gram matches settings"),
        }
    }

    /// Central differences over the entries of `b`.
    fn gradient(&self, b: &Matrix, h: f64) -> Result<Matrix, KernelMethodError> {
        let mut grad = Matrix::zeros(b.rows(), b.cols());
        let mut probe = b.clone();
        for i in 0..b.rows() {
            for j in 0..b.cols() {
                let orig = b[(i, j)];
                probe[(i, j)] = orig + h;
                let up = self.value(&probe)?;
                probe[(i, j)] = orig - h;
                let down = self.value(&probe)?;
                probe[(i, j)] = orig;
                grad[(i, j)] = (up - down) / (2.0 * h);
            }
        }
        Ok(grad)
    }
}

/// `Tr[G̃_Y (G̃_X^B + nεI)⁻¹]`, where `G_X^B` is the Gram of the projected
/// inputs `Bᵀx` and `G̃` denotes centering.
pub fn kdr_objective(
    b: &Matrix,
    xs: &[Vec<f64>],
    ys: &[Point],
    kx: &Kernel,
    ky: &Kernel,
    settings: &KdrSettings,
) -> Result<f64, KernelMethodError> {
    let dev = orthonormality_error(b);
    if !(dev <= ORTHONORMAL_TOLERANCE) {
        return Err(KernelMethodError::NotOrthonormal(dev));
    }
    if xs.first().is_some_and(|x| x.len() != b.rows()) {
        return Err(KernelMethodError::DimensionMismatch);
    }
    KdrProblem::new(xs, ys, kx, ky, *settings)?.value(b)
}

/// Step used for the central-difference gradient.
pub const KDR_GRADIENT_STEP: f64 = 1e-5;

/// Central-difference gradient of the KDR objective in the entries of `b`.
pub fn kdr_gradient(
    b: &Matrix,
    xs: &[Vec<f64>],
    ys: &[Point],
    kx: &Kernel,
    ky: &Kernel,
    settings: &KdrSettings,
    step: f64,
) -> Result<Matrix, KernelMethodError> {
    KdrProblem::new(xs, ys, kx, ky, *settings)?.gradient(b, step)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdrConfig {
    pub settings: KdrSettings,
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SdrConfig {
    fn default() -> Self {
        SdrConfig {
            settings: KdrSettings::default(),
            restarts: 5,
            max_iter: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdrResult {
    /// d×m matrix with orthonormal columns.
    pub basis: Matrix,
    pub objective: f64,
    pub restarts_used: usize,
    /// Objective reached by each restart, in order.
    pub restart_objectives: Vec<f64>,
}

const MIN_LINE_STEP: f64 = 1e-10;

fn orthonormalized(mut b: Matrix) -> Result<Matrix, KernelMethodError> {
    linalg::orthonormalize_columns(&mut b)?;
    // a second pass removes the round-off of the first
    linalg::orthonormalize_columns(&mut b)?;
    Ok(b)
}

/// Minimizes the KDR objective over d×m matrices with orthonormal columns.
///
/// Each restart starts from a Gaussian random matrix (drawn from
/// `rng::replicate(seed, restart)`) and runs projected gradient descent:
/// step along the normalized finite-difference gradient, re-orthonormalize,
/// and halve the step from 1.0 until the objective decreases. The best
/// restart wins.
pub fn estimate_sdr(
    xs: &[Vec<f64>],
    ys: &[Point],
    target_dim: usize,
    kx: &Kernel,
    ky: &Kernel,
    config: &SdrConfig,
) -> Result<SdrResult, KernelMethodError> {
    let d = xs.first().map_or(0, Vec::len);
    if target_dim == 0 || target_dim > d {
        return Err(KernelMethodError::InvalidTargetDimension {
            target: target_dim,
            dimension: d,
        });
    }
    if xs.len() < target_dim + 1 {
        return Err(KernelMethodError::TooFewSamples {
            needed: target_dim + 1,
            got: xs.len(),
        });
    }
    if xs.iter().all(|x| x == &xs[0]) {
        return Err(KernelMethodError::DegenerateData);
    }
    let problem = KdrProblem::new(xs, ys, kx, ky, config.settings)?;

    let mut best: Option<(Matrix, f64)> = None;
    let mut restart_objectives = Vec::with_capacity(config.restarts.max(1));
    for r in 0..config.restarts.max(1) {
        let mut rng = rng::replicate(config.seed, r as u64);
        let start = Matrix::from_fn(d, target_dim, |_, _| StandardNormal.sample(&mut rng));
        let mut b = orthonormalized(start)?;
        let mut value = problem.value(&b)?;
        for _ in 0..config.max_iter {
            let grad = problem.gradient(&b, KDR_GRADIENT_STEP)?;
            let gnorm = linalg::norm(grad.as_slice());
            if !(gnorm > 0.0) {
                break;
            }
            let mut step = 1.0;
            let mut moved = false;
            while step >= MIN_LINE_STEP {
                let candidate = Matrix::from_fn(d, target_dim, |i, j| b[(i, j)] - step * grad[(i, j)] / gnorm);
                if let Ok(candidate) = orthonormalized(candidate) {
                    let v = problem.value(&candidate)?;
                    if v < value {
                        b = candidate;
                        value = v;
                        moved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        restart_objectives.push(value);
        if best.as_ref().is_none_or(|(_, v)| value < *v) {
            best = Some((b, value));
        }
    }
    let (basis, objective) = best.expect("at least one restart");
    Ok(SdrResult {
        basis,
        objective,
        restarts_used: restart_objectives.len(),
        restart_objectives,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn line(n: usize, f: impl Fn(f64) -> f64) -> Vec<Point> {
        (0..n).map(|i| Point::Real(vec![f(i as f64 / n as f64)])).collect()
    }

    #[test]
    fn cca_errors() {
        let g = Kernel::gaussian(1.0).unwrap();
        let a = line(5, |t| t);
        let b = line(4, |t| t);
        assert_eq!(
            kernel_cca(&a, &b, &g, &g, 0.1).unwrap_err(),
            KernelMethodError::LengthMismatch(5, 4)
        );
        assert!(matches!(
            kernel_cca(&a, &a, &g, &g, 0.0),
            Err(KernelMethodError::InvalidRegularization(_))
        ));
        assert!(matches!(
            kernel_cca(&a[..1], &a[..1], &g, &g, 0.1),
            Err(KernelMethodError::TooFewSamples { .. })
        ));
        let bad = vec![Point::Real(vec![f64::NAN]), Point::Real(vec![1.0])];
        assert!(kernel_cca(&bad, &bad, &Kernel::Linear, &Kernel::Linear, 0.1).is_err());
        assert!(matches!(
            independence_test(&a, &a, &g, &g, 0.1, 10, 0),
            Err(KernelMethodError::TooFewPermutations { .. })
        ));
    }

    #[test]
    fn identical_inputs_are_maximally_correlated() {
        let g = Kernel::gaussian(0.5).unwrap();
        let x = line(30, |t| libm::sin(7.0 * t));
        let r = kernel_cca(&x, &x, &g, &g, 1e-6).unwrap();
        assert!(r.rho >= 0.99, "{}", r.rho);
    }

    #[test]
    fn two_points_bounded() {
        let x = line(2, |t| t);
        let y = line(2, |t| 1.0 - t * t);
        let r = kernel_cca(&x, &y, &Kernel::Linear, &Kernel::Linear, 0.5).unwrap();
        assert!((0.0..=1.0).contains(&r.rho));
    }

    #[test]
    fn identical_inputs_give_minimal_p_value() {
        let g = Kernel::gaussian(1.0).unwrap();
        let x = line(6, |t| t * t + 0.1 * t);
        for seed in 0..5 {
            let r = independence_test(&x, &x, &g, &g, 1e-2, 23, seed).unwrap();
            assert_eq!(r.p_value, 1.0 / 24.0);
            assert_eq!(r.null_samples.len(), 23);
        }
    }

    #[test]
    fn kdr_errors() {
        let xs = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.5]];
        let ys: Vec<Point> = (0..3).map(|i| Point::Real(vec![i as f64])).collect();
        let g = Kernel::gaussian(1.0).unwrap();
        let skew = Matrix::from_row_major(2, 1, vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            kdr_objective(&skew, &xs, &ys, &g, &g, &KdrSettings::default()),
            Err(KernelMethodError::NotOrthonormal(_))
        ));
        let e1 = Matrix::from_row_major(2, 1, vec![1.0, 0.0]).unwrap();
        let bad = KdrSettings {
            epsilon: 0.0,
            ..KdrSettings::default()
        };
        assert!(kdr_objective(&e1, &xs, &ys, &g, &g, &bad).is_err());
        let cfg = SdrConfig::default();
        assert!(matches!(
            estimate_sdr(&xs, &ys, 3, &g, &g, &cfg),
            Err(KernelMethodError::InvalidTargetDimension { .. })
        ));
        let same = vec![vec![1.0, 1.0]; 3];
        assert_eq!(
            estimate_sdr(&same, &ys, 1, &g, &g, &cfg),
            Err(KernelMethodError::DegenerateData)
        );
        assert!(matches!(
            estimate_sdr(&xs[..2], &ys[..2], 2, &g, &g, &cfg),
            Err(KernelMethodError::TooFewSamples { .. })
        ));
    }
}
