//! Dense linear algebra kernels: validated vectors, SPD matrices with
//! cached Cholesky factors, power-iteration spectral norms, and symmetric
//! (possibly singular) solves for Gram systems.
//!
//! Everything here is sized for the scales the solvers run at (tens to a
//! few thousand dimensions), so the implementations favor clarity and
//! exact, testable contracts over blocked performance tricks.

use std::ops::{Add, Index, Mul, Sub};
use std::sync::OnceLock;

use crate::error::CoreError;

/// Iteration cap for the power method.
const SPECTRAL_MAX_ITERS: usize = 10_000;

/// Relative eigenvalue cutoff below which a Gram system is treated as
/// singular and solved in the least-squares sense.
const PSEUDO_INVERSE_CUTOFF: f64 = 1e-12;

/// Column vector with finite entries. Finiteness is checked on
/// construction; arithmetic assumes operands of equal dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector {
    entries: Vec<f64>,
}

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self, CoreError> {
        for (i, x) in entries.iter().enumerate() {
            if !x.is_finite() {
                return Err(CoreError::NonFinite { index: i });
            }
        }
        Ok(Vector { entries })
    }

    /// Panics on non-finite input; intended for literals and values that
    /// are finite by construction.
    pub fn from_slice(entries: &[f64]) -> Self {
        assert!(
            entries.iter().all(|x| x.is_finite()),
            "vector entries must be finite"
        );
        Vector {
            entries: entries.to_vec(),
        }
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<f64>) -> Self {
        Vector { entries }
    }

    pub fn zeros(n: usize) -> Self {
        Vector {
            entries: vec![0.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.entries.iter()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dot: dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dist: dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, t: f64) -> Vector {
        Vector {
            entries: self.entries.iter().map(|x| x * t).collect(),
        }
    }

    /// self += t * other
    pub fn axpy(&mut self, t: f64, other: &Vector) {
        assert_eq!(self.dim(), other.dim(), "axpy: dimension mismatch");
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += t * b;
        }
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        assert_eq!(self.dim(), rhs.dim(), "add: dimension mismatch");
        Vector {
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        assert_eq!(self.dim(), rhs.dim(), "sub: dimension mismatch");
        Vector {
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, t: f64) -> Vector {
        self.scale(t)
    }
}

/// Symmetric positive definite matrix, row-major, with a lazily computed
/// cached Cholesky factor. Symmetry is exact by construction; positive
/// definiteness is certified by the first successful factorization.
#[derive(Clone, Debug)]
pub struct SpdMatrix {
    n: usize,
    entries: Vec<f64>,
    factor: OnceLock<Result<TriangularFactor, CoreError>>,
}

impl PartialEq for SpdMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.entries == other.entries
    }
}

impl SpdMatrix {
    /// Builds from full rows, rejecting non-square, non-finite, or
    /// asymmetric input. Symmetry must hold exactly: these matrices are
    /// either constructed symmetric or read back from files that store
    /// them symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, CoreError> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(CoreError::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for (j, x) in row.iter().enumerate() {
                if !x.is_finite() {
                    return Err(CoreError::NonFinite { index: i * n + j });
                }
            }
            entries.extend_from_slice(row);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if entries[i * n + j] != entries[j * n + i] {
                    return Err(CoreError::InvalidInstance(format!(
                        "matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(SpdMatrix {
            n,
            entries,
            factor: OnceLock::new(),
        })
    }

    /// Builds a symmetric matrix by evaluating `f` on the upper triangle
    /// (i <= j) and mirroring. Panics on non-finite values.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                assert!(v.is_finite(), "matrix entry ({i},{j}) must be finite");
                entries[i * n + j] = v;
                entries[j * n + i] = v;
            }
        }
        SpdMatrix {
            n,
            entries,
            factor: OnceLock::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        SpdMatrix::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn matvec(&self, v: &Vector) -> Vector {
        assert_eq!(self.n, v.dim(), "matvec: dimension mismatch");
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.entries[i * self.n..(i + 1) * self.n];
            out[i] = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        }
        Vector::from_vec_unchecked(out)
    }

    /// Cholesky factor `L` with `L L^T = M`, computed once and cached.
    /// Fails with `NotPositiveDefinite` when a pivot is <= 0.
    pub fn factorization(&self) -> Result<&TriangularFactor, CoreError> {
        self.factor
            .get_or_init(|| cholesky(self.n, &self.entries))
            .as_ref()
            .map_err(|e| e.clone())
    }

    /// Largest eigenvalue via power iteration from the deterministic
    /// normalized all-ones start, to relative accuracy `tol`.
    ///
    /// Stops on a residual certificate ||Mv - lambda v|| <= tol*lambda, or
    /// on Rayleigh-quotient stagnation (which only happens once the top of
    /// the spectrum is resolved to better than `tol` relative).
    pub fn spectral_norm(&self, tol: f64) -> Result<f64, CoreError> {
        assert!(tol > 0.0, "spectral_norm: tol must be positive");
        assert!(self.n > 0, "spectral_norm: empty matrix");
        let inv_sqrt_n = 1.0 / (self.n as f64).sqrt();
        let mut v = Vector::from_vec_unchecked(vec![inv_sqrt_n; self.n]);
        let mut prev = f64::NAN;
        let mut stagnant = 0;
        for _ in 0..SPECTRAL_MAX_ITERS {
            let w = self.matvec(&v);
            let lambda = v.dot(&w);
            let mut res_sq = 0.0;
            for i in 0..self.n {
                let r = w[i] - lambda * v[i];
                res_sq += r * r;
            }
            if res_sq.sqrt() <= tol * lambda.abs() {
                return Ok(lambda);
            }
            if (lambda - prev).abs() <= 0.01 * tol * lambda.abs() {
                stagnant += 1;
                // Progress per step scales with the relative gap at the
                // top of the spectrum; stalling this hard means the gap
                // (and hence the remaining error) is below tol.
                if stagnant >= 3 {
                    return Ok(lambda);
                }
            } else {
                stagnant = 0;
            }
            prev = lambda;
            let wn = w.norm();
            if wn == 0.0 {
                return Ok(0.0);
            }
            v = w.scale(1.0 / wn);
        }
        Err(CoreError::NonConvergence {
            op: "power iteration",
            iterations: SPECTRAL_MAX_ITERS,
        })
    }
}

/// Lower-triangular Cholesky factor.
#[derive(Clone, Debug)]
pub struct TriangularFactor {
    n: usize,
    lower: Vec<f64>,
}

impl TriangularFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.n + j]
    }

    /// Solves M x = rhs where M = L L^T is the factored matrix.
    pub fn solve(&self, rhs: &Vector) -> Result<Vector, CoreError> {
        if rhs.dim() != self.n {
            return Err(CoreError::DimensionMismatch {
                expected: self.n,
                got: rhs.dim(),
            });
        }
        let n = self.n;
        // forward: L z = rhs
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut s = rhs[i];
            for k in 0..i {
                s -= self.lower[i * n + k] * z[k];
            }
            z[i] = s / self.lower[i * n + i];
        }
        // backward: L^T x = z
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in (i + 1)..n {
                s -= self.lower[k * n + i] * x[k];
            }
            x[i] = s / self.lower[i * n + i];
        }
        Ok(Vector::from_vec_unchecked(x))
    }
}

fn cholesky(n: usize, entries: &[f64]) -> Result<TriangularFactor, CoreError> {
    let mut lower = vec![0.0; n * n];
    for j in 0..n {
        for i in j..n {
            let mut s = entries[i * n + j];
            for k in 0..j {
                s -= lower[i * n + k] * lower[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(CoreError::NotPositiveDefinite { index: j, pivot: s });
                }
                lower[j * n + j] = s.sqrt();
            } else {
                lower[i * n + j] = s / lower[j * n + j];
            }
        }
    }
    Ok(TriangularFactor { n, lower })
}

/// Solves the symmetric system G a = rhs (row-major `gram`, `dim` x
/// `dim`). Exact solve when G is well conditioned; minimum-norm
/// least-squares solution via a spectral pseudo-inverse when G is
/// (near-)singular, with eigenvalues below 1e-12 * lambda_max dropped.
pub fn solve_symmetric(dim: usize, gram: &[f64], rhs: &[f64]) -> Vec<f64> {
    assert_eq!(gram.len(), dim * dim, "solve_symmetric: bad gram size");
    assert_eq!(rhs.len(), dim, "solve_symmetric: bad rhs size");
    if dim == 0 {
        return Vec::new();
    }
    let (eigvals, eigvecs) = jacobi_eigen(dim, gram);
    let lambda_max = eigvals.iter().fold(0.0_f64, |a, &b| a.max(b));
    if lambda_max <= 0.0 {
        return vec![0.0; dim];
    }
    let cutoff = PSEUDO_INVERSE_CUTOFF * lambda_max;
    let mut out = vec![0.0; dim];
    for j in 0..dim {
        if eigvals[j] <= cutoff {
            continue;
        }
        // coefficient of eigenvector j: (v_j . rhs) / lambda_j
        let mut proj = 0.0;
        for i in 0..dim {
            proj += eigvecs[i * dim + j] * rhs[i];
        }
        let coeff = proj / eigvals[j];
        for i in 0..dim {
            out[i] += coeff * eigvecs[i * dim + j];
        }
    }
    out
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// (eigenvalues, eigenvectors) with eigenvector j stored in column j.
fn jacobi_eigen(n: usize, sym: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut a = sym.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let fro: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if fro == 0.0 {
        return (vec![0.0; n], v);
    }
    let off_tol = 1e-14 * fro;
    for _sweep in 0..60 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= off_tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= off_tol / (n as f64) {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // rotate rows/columns p and q of A
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                // accumulate rotation into V
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eig = (0..n).map(|i| a[i * n + i]).collect();
    (eig, v)
}
