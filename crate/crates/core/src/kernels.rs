//! Positive semidefinite kernels, Gram matrices, centering and pivoted
//! incomplete Cholesky.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("the spectrum kernel needs string inputs")]
    ExpectedText,
    #[error("kernel `{0}` needs real-vector inputs")]
    ExpectedReal(&'static str),
    #[error("empty point list")]
    Empty,
    #[error("invalid kernel parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("cannot parse kernel spec `{0}`")]
    Parse(String),
}

/// An input point: a real vector, or a string for the spectrum kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Real(Vec<f64>),
    Text(String),
}

impl Point {
    pub fn as_real(&self) -> Option<&[f64]> {
        match self {
            Point::Real(v) => Some(v),
            Point::Text(_) => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Point::Text(s) => Some(s),
            Point::Real(_) => None,
        }
    }

    /// Coordinate count for real points, `None` for strings.
    pub fn dimension(&self) -> Option<usize> {
        self.as_real().map(<[f64]>::len)
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point::Real(v)
    }
}

impl From<&[f64]> for Point {
    fn from(v: &[f64]) -> Self {
        Point::Real(v.to_vec())
    }
}

impl From<&str> for Point {
    fn from(s: &str) -> Self {
        Point::Text(s.to_string())
    }
}

/// Kernel family. The Gaussian uses `exp(-‖x - y‖² / (2σ²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Linear,
    Polynomial {
        degree: u32,
        offset: f64,
    },
    Gaussian {
        sigma: f64,
    },
    /// p-spectrum string kernel: inner product of length-p substring counts.
    Spectrum {
        p: usize,
    },
}

impl Kernel {
    pub fn polynomial(degree: u32, offset: f64) -> Result<Self, KernelError> {
        if degree == 0 {
            return Err(KernelError::InvalidParameter("polynomial degree must be positive"));
        }
        if !(offset >= 0.0) || !offset.is_finite() {
            return Err(KernelError::InvalidParameter("polynomial offset must be nonnegative"));
        }
        Ok(Kernel::Polynomial { degree, offset })
    }

    pub fn gaussian(sigma: f64) -> Result<Self, KernelError> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(KernelError::InvalidParameter("gaussian bandwidth must be positive"));
        }
        Ok(Kernel::Gaussian { sigma })
    }

    pub fn spectrum(p: usize) -> Result<Self, KernelError> {
        if p == 0 {
            return Err(KernelError::InvalidParameter("spectrum length p must be positive"));
        }
        Ok(Kernel::Spectrum { p })
    }

    pub fn is_string_kernel(&self) -> bool {
        matches!(self, Kernel::Spectrum { .. })
    }

    /// `k(x, y)`.
    pub fn eval(&self, x: &Point, y: &Point) -> Result<f64, KernelError> {
        match (self, x, y) {
            (Kernel::Spectrum { p }, Point::Text(s), Point::Text(t)) => spectrum_eval(*p, s, t),
            (Kernel::Spectrum { .. }, _, _) => Err(KernelError::ExpectedText),
            (_, Point::Real(a), Point::Real(b)) => self.eval_real(a, b),
            _ => Err(KernelError::ExpectedReal(self.name())),
        }
    }

    /// `k(x, y)` for real vectors.
    pub fn eval_real(&self, x: &[f64], y: &[f64]) -> Result<f64, KernelError> {
        if x.len() != y.len() {
            return Err(KernelError::DimensionMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        Ok(match *self {
            Kernel::Linear => crate::linalg::dot(x, y),
            Kernel::Polynomial { degree, offset } => libm::pow(crate::linalg::dot(x, y) + offset, degree as f64),
            Kernel::Gaussian { sigma } => {
                let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                libm::exp(-sq / (2.0 * sigma * sigma))
            }
            Kernel::Spectrum { .. } => return Err(KernelError::ExpectedText),
        })
    }

    fn name(&self) -> &'static str {
        match self {
            Kernel::Linear => "linear",
            Kernel::Polynomial { .. } => "poly",
            Kernel::Gaussian { .. } => "gauss",
            Kernel::Spectrum { .. } => "spectrum",
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Linear => write!(f, "linear"),
            Kernel::Polynomial { degree, offset } => write!(f, "poly:{degree}:{offset:?}"),
            Kernel::Gaussian { sigma } => write!(f, "gauss:{sigma:?}"),
            Kernel::Spectrum { p } => write!(f, "spectrum:{p}"),
        }
    }
}

/// Parses `linear`, `poly:<degree>:<offset>`, `gauss:<sigma>`, `spectrum:<p>`.
impl FromStr for Kernel {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || KernelError::Parse(s.to_string());
        let mut parts = s.trim().split(':');
        let head = parts.next().ok_or_else(bad)?;
        let args: Vec<&str> = parts.collect();
        match (head, args.as_slice()) {
            ("linear", []) => Ok(Kernel::Linear),
            ("poly", [d, c]) => Kernel::polynomial(d.parse().map_err(|_| bad())?, c.parse().map_err(|_| bad())?),
            ("gauss", [sigma]) => Kernel::gaussian(sigma.parse().map_err(|_| bad())?),
            ("spectrum", [p]) => Kernel::spectrum(p.parse().map_err(|_| bad())?),
            _ => Err(bad()),
        }
    }
}

/// p-spectrum kernel: Σ over length-p substrings u of count_s(u)·count_t(u).
/// Substrings are taken over Unicode scalar values.
pub fn spectrum_eval(p: usize, s: &str, t: &str) -> Result<f64, KernelError> {
    if p == 0 {
        return Err(KernelError::InvalidParameter("spectrum length p must be positive"));
    }
    let s: Vec<char> = s.chars().collect();
    let t: Vec<char> = t.chars().collect();
    if s.len() < p || t.len() < p {
        return Ok(0.0);
    }
    let mut counts: BTreeMap<&[char], u64> = BTreeMap::new();
    for w in s.windows(p) {
        *counts.entry(w).or_insert(0) += 1;
    }
    let total: u64 = t.windows(p).map(|w| counts.get(w).copied().unwrap_or(0)).sum();
    Ok(total as f64)
}

fn check_uniform(points: &[Point]) -> Result<(), KernelError> {
    let first = points.first().ok_or(KernelError::Empty)?;
    if let Some(d) = first.dimension() {
        for p in points {
            match p.dimension() {
                Some(e) if e == d => {}
                Some(e) => return Err(KernelError::DimensionMismatch { left: d, right: e }),
                None => return Err(KernelError::ExpectedReal("mixed")),
            }
        }
    }
    Ok(())
}

/// Symmetric n×n kernel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: Matrix,
}

impl GramMatrix {
    /// Wraps a square matrix. Symmetry is the caller's responsibility.
    pub fn from_matrix(entries: Matrix) -> Self {
        assert_eq!(entries.rows(), entries.cols(), "gram matrix must be square");
        GramMatrix { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn into_matrix(self) -> Matrix {
        self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// PSD tolerance scaled to this matrix: 1e-8 · trace.
    pub fn psd_tolerance(&self) -> f64 {
        PSD_RELATIVE_TOLERANCE * self.trace().abs()
    }
}

pub const PSD_RELATIVE_TOLERANCE: f64 = 1e-8;

/// Builds `K[i][j] = k(points[i], points[j])`. Only the upper triangle is
/// evaluated, so the result is exactly symmetric.
pub fn gram(kernel: &Kernel, points: &[Point]) -> Result<GramMatrix, KernelError> {
    check_uniform(points)?;
    let n = points.len();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(&points[i], &points[j])?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(GramMatrix { entries: m })
}

/// Cross-kernel matrix `C[i][j] = k(rows[i], cols[j])`.
pub fn cross_gram(kernel: &Kernel, rows: &[Point], cols: &[Point]) -> Result<Matrix, KernelError> {
    let mut m = Matrix::zeros(rows.len(), cols.len());
    for (i, x) in rows.iter().enumerate() {
        for (j, y) in cols.iter().enumerate() {
            m[(i, j)] = kernel.eval(x, y)?;
        }
    }
    Ok(m)
}

/// `H G H` with `H = I - (1/n) 1 1ᵀ`.
pub fn center_gram(g: &GramMatrix) -> GramMatrix {
    let n = g.len();
    let m = &g.entries;
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n).map(|i| m.row(i).iter().sum::<f64>() / nf).collect();
    let col_means: Vec<f64> = (0..n).map(|j| (0..n).map(|i| m[(i, j)]).sum::<f64>() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    let centered = Matrix::from_fn(n, n, |i, j| m[(i, j)] - row_means[i] - col_means[j] + grand);
    GramMatrix { entries: centered }
}

/// Residual diagonal entries at or below this fraction of the largest kernel
/// diagonal are treated as exhausted.
const PIVOT_FLOOR: f64 = 1e-13;

/// Pivoted partial Cholesky factor `K ≈ L Lᵀ`.
#[derive(Debug, Clone)]
pub struct LowRankFactor {
    /// n×k factor `L`.
    pub factor: Matrix,
    pub pivots: Vec<usize>,
    /// `trace(K) - trace(L Lᵀ)`.
    pub residual_trace: f64,
    /// Residual trace before each pivot, followed by the final value.
    pub residual_history: Vec<f64>,
    /// Kernel evaluations spent building the factor.
    pub kernel_evaluations: usize,
}

impl LowRankFactor {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn reconstruct(&self) -> Matrix {
        self.factor.matmul(&self.factor.transpose())
    }

    /// `L (Lᵀ v)`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.factor.mul_vec(&self.factor.transpose_mul_vec(v))
    }
}

/// Greedy pivoted incomplete Cholesky. Stops once the residual trace is at or
/// below `tol`, the rank reaches `max_rank`, or the residual diagonal is
/// numerically exhausted. Ties between maximal residual diagonals go to the
/// lowest index.
///
/// Spends n kernel evaluations on the diagonal and n per pivot column, with
/// O(n·k²) arithmetic.
pub fn incomplete_cholesky(
    kernel: &Kernel,
    points: &[Point],
    tol: f64,
    max_rank: usize,
) -> Result<LowRankFactor, KernelError> {
    check_uniform(points)?;
    let n = points.len();
    let max_rank = max_rank.min(n);
    let mut evals = 0usize;

    let mut diag = Vec::with_capacity(n);
    for p in points {
        diag.push(kernel.eval(p, p)?);
        evals += 1;
    }
    let floor = PIVOT_FLOOR * diag.iter().copied().fold(0.0, f64::max);

    // Columns stored contiguously, transposed at the end.
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut pivots = Vec::new();
    let mut history = Vec::new();
    let mut residual: f64 = diag.iter().sum();

    while pivots.len() < max_rank && residual > tol {
        history.push(residual);
        let (pivot, best) =
            diag.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |(bi, bv), (i, &v)| {
                    if v > bv {
                        (i, v)
                    } else {
                        (bi, bv)
                    }
                },
            );
        if !(best > floor) {
            history.pop();
            break;
        }
        let root = libm::sqrt(best);
        let mut col = vec![0.0; n];
        for i in 0..n {
            let kij = kernel.eval(&points[i], &points[pivot])?;
            evals += 1;
            let correction: f64 = columns.iter().map(|c| c[i] * c[pivot]).sum();
            col[i] = (kij - correction) / root;
        }
        col[pivot] = root;
        for i in 0..n {
            diag[i] -= col[i] * col[i];
        }
        diag[pivot] = 0.0;
        columns.push(col);
        pivots.push(pivot);
        residual = diag.iter().sum();
    }
    history.push(residual);

    let k = columns.len();
    let factor = Matrix::from_fn(n, k, |i, j| columns[j][i]);
    Ok(LowRankFactor {
        factor,
        pivots,
        residual_trace: residual,
        residual_history: history,
        kernel_evaluations: evals,
    })
}
