//! Dense complex Hermitian linear algebra.
//!
//! Eigendecomposition and matrix functions restricted to the support; the
//! numerical substrate of every update rule. The eigensolver is a cyclic
//! Jacobi iteration with complex plane rotations: deterministic for identical
//! input bits, which keeps solver traces reproducible across runs.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;

use crate::error::{QbaError, Result};
use crate::scalar::{real, real_of_usize, Real};
use crate::tol;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<R: Real> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<R>>,
}

impl<R: Real> ComplexMatrix<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(R::zero(), R::zero()); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Complex::new(R::one(), R::zero());
        }
        m
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex<R>,
    ) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex<R>>>) -> Result<Self> {
        let nr = rows.len();
        let nc = rows.first().map_or(0, Vec::len);
        if nr == 0 || nc == 0 {
            return Err(QbaError::Dimension("matrix must be non-empty".into()));
        }
        if rows.iter().any(|r| r.len() != nc) {
            return Err(QbaError::Dimension("ragged rows".into()));
        }
        Ok(Self {
            rows: nr,
            cols: nc,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Convenience construction from real entries (imaginary parts zero).
    pub fn from_real_rows(rows: &[&[R]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex::new(x, R::zero())).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, factor: Complex<R>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: R) -> Self {
        self.scale(Complex::new(factor, R::zero()))
    }

    pub fn trace(&self) -> Complex<R> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .fold(Complex::new(R::zero(), R::zero()), |acc, z| acc + z)
    }

    pub fn frobenius_norm(&self) -> R {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(R::zero(), |a, b| a + b)
            .sqrt()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] =
                            self[(i, j)] * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(QbaError::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

impl<R: Real> Index<(usize, usize)> for ComplexMatrix<R> {
    type Output = Complex<R>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<R> {
        &self.data[i * self.cols + j]
    }
}

impl<R: Real> IndexMut<(usize, usize)> for ComplexMatrix<R> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<R> {
        &mut self.data[i * self.cols + j]
    }
}

impl<R: Real> Mul for &ComplexMatrix<R> {
    type Output = ComplexMatrix<R>;

    fn mul(self, rhs: &ComplexMatrix<R>) -> ComplexMatrix<R> {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re.is_zero() && a.im.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<R: Real> Add for &ComplexMatrix<R> {
    type Output = ComplexMatrix<R>;

    fn add(self, rhs: &ComplexMatrix<R>) -> ComplexMatrix<R> {
        self.same_shape(rhs).expect("matrix sum dimension mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl<R: Real> Sub for &ComplexMatrix<R> {
    type Output = ComplexMatrix<R>;

    fn sub(self, rhs: &ComplexMatrix<R>) -> ComplexMatrix<R> {
        self.same_shape(rhs)
            .expect("matrix difference dimension mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Square complex matrix stored exactly Hermitian.
///
/// Construction re-symmetrizes `M ← (M + M†)/2`; entrywise this is exact in
/// floating point, so the stored residual `‖M − M†‖_F` is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<R: Real> {
    mat: ComplexMatrix<R>,
}

impl<R: Real> HermitianMatrix<R> {
    pub fn new(mat: ComplexMatrix<R>) -> Result<Self> {
        if !mat.is_square() {
            return Err(QbaError::Dimension(format!(
                "{}x{} not square",
                mat.rows, mat.cols
            )));
        }
        if !mat.is_finite() {
            return Err(QbaError::InvalidMatrix);
        }
        let mut m = mat;
        let n = m.rows;
        for i in 0..n {
            m[(i, i)] = Complex::new(m[(i, i)].re, R::zero());
            for j in (i + 1)..n {
                let half = real::<R>(0.5);
                let avg = (m[(i, j)] + m[(j, i)].conj()) * Complex::new(half, R::zero());
                m[(i, j)] = avg;
                m[(j, i)] = avg.conj();
            }
        }
        Ok(Self { mat: m })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(dim),
        }
    }

    pub fn from_diagonal(diag: &[R]) -> Self {
        let mut m = ComplexMatrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, R::zero());
        }
        Self { mat: m }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix<R> {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix<R> {
        self.mat
    }

    pub fn diagonal_real(&self) -> Vec<R> {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).collect()
    }

    /// Entrywise sum; Hermiticity is closed under addition, exactly.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.mat.same_shape(&other.mat)?;
        Ok(Self {
            mat: &self.mat + &other.mat,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.mat.same_shape(&other.mat)?;
        Ok(Self {
            mat: &self.mat - &other.mat,
        })
    }

    pub fn scale(&self, factor: R) -> Self {
        Self {
            mat: self.mat.scale_real(factor),
        }
    }

    pub fn frobenius_norm(&self) -> R {
        self.mat.frobenius_norm()
    }

    pub fn trace_real(&self) -> R {
        self.mat.trace().re
    }
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues ascending,
/// eigenvectors as unitary matrix columns.
#[derive(Debug, Clone)]
pub struct EigenSystem<R: Real> {
    pub eigenvalues: Vec<R>,
    pub eigenvectors: ComplexMatrix<R>,
}

impl<R: Real> EigenSystem<R> {
    /// `V diag(f(λ)) V†`, re-symmetrized.
    pub fn assemble(&self, mut f: impl FnMut(R) -> R) -> HermitianMatrix<R> {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let g = f(lam);
            if g.is_zero() {
                continue;
            }
            let gc = Complex::new(g, R::zero());
            for i in 0..n {
                let vik = v[(i, k)] * gc;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        HermitianMatrix::new(out).expect("assembled spectral function is square and finite")
    }

    /// `V diag(λ) V†`, for residual checks.
    pub fn reconstruct(&self) -> HermitianMatrix<R> {
        self.assemble(|lam| lam)
    }

    pub fn min_eigenvalue(&self) -> R {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> R {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// `‖V†V − 1‖_F`, for unitarity checks.
    pub fn unitarity_residual(&self) -> R {
        let v = &self.eigenvectors;
        let gram = &v.adjoint() * v;
        (&gram - &ComplexMatrix::identity(v.cols())).frobenius_norm()
    }
}

const MAX_JACOBI_SWEEPS: usize = 64;

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Eigenvalues are returned ascending (ties broken by original index, so the
/// result is deterministic). Residuals land near machine precision; the
/// contract bound is `‖V diag(λ) V† − M‖_F ≤ 1e-9 · max(1, ‖M‖_F)`.
pub fn eig_hermitian<R: Real>(m: &HermitianMatrix<R>) -> Result<EigenSystem<R>> {
    if !m.matrix().is_finite() {
        return Err(QbaError::InvalidMatrix);
    }
    let n = m.dim();
    let mut a = m.matrix().clone();
    let mut v = ComplexMatrix::<R>::identity(n);
    let scale = a.frobenius_norm().max(R::one());
    let threshold = scale * R::epsilon() * real_of_usize::<R>(n.max(2));

    for _sweep in 0..MAX_JACOBI_SWEEPS {
        let mut off = R::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if (off + off).sqrt() <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(i, i)]
            .re
            .partial_cmp(&a[(j, j)].re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let eigenvalues: Vec<R> = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

/// One complex Jacobi rotation zeroing the `(p, q)` entry of `a`,
/// accumulating the rotation into `v`.
fn rotate<R: Real>(a: &mut ComplexMatrix<R>, v: &mut ComplexMatrix<R>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r.is_zero() {
        return;
    }
    let u = apq / Complex::new(r, R::zero());
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (app - aqq) / (r + r);
    // Smaller-magnitude root of t² − 2τt − 1 = 0 for stability.
    let t = if tau.abs() > real::<R>(1e150) {
        -real::<R>(0.5) / tau
    } else if tau >= R::zero() {
        -R::one() / (tau + (R::one() + tau * tau).sqrt())
    } else {
        R::one() / (-tau + (R::one() + tau * tau).sqrt())
    };
    let c = R::one() / (R::one() + t * t).sqrt();
    let s = t * c;
    let cs = Complex::new(c, R::zero());
    let su = u * Complex::new(s, R::zero());

    let n = a.rows();
    // Columns p, q of A ← A·R.
    for i in 0..n {
        let x = a[(i, p)];
        let y = a[(i, q)];
        a[(i, p)] = x * cs - y * su.conj();
        a[(i, q)] = x * su + y * cs;
    }
    // Rows p, q of A ← R†·A.
    for j in 0..n {
        let x = a[(p, j)];
        let y = a[(q, j)];
        a[(p, j)] = x * cs - y * su;
        a[(q, j)] = x * su.conj() + y * cs;
    }
    // The targeted entry is zero by construction; pin it and keep the
    // diagonal exactly real.
    a[(p, q)] = Complex::new(R::zero(), R::zero());
    a[(q, p)] = Complex::new(R::zero(), R::zero());
    a[(p, p)] = Complex::new(a[(p, p)].re, R::zero());
    a[(q, q)] = Complex::new(a[(q, q)].re, R::zero());

    for i in 0..n {
        let x = v[(i, p)];
        let y = v[(i, q)];
        v[(i, p)] = x * cs - y * su.conj();
        v[(i, q)] = x * su + y * cs;
    }
}

/// Matrix exponential `V diag(exp λ) V†` of a Hermitian matrix.
///
/// Rejects spectra reaching past the overflow window; callers shift by the
/// top eigenvalue first (softmax-style) and add it back to the normalizer.
pub fn matrix_exp<R: Real>(m: &HermitianMatrix<R>) -> Result<HermitianMatrix<R>> {
    let eig = eig_hermitian(m)?;
    let cap = real::<R>(tol::EXP_OVERFLOW);
    if eig.max_eigenvalue() > cap {
        return Err(QbaError::OverflowRisk(format!(
            "eigenvalue {:e} exceeds {:e}; shift the spectrum first",
            eig.max_eigenvalue().to_f64().unwrap_or(f64::NAN),
            tol::EXP_OVERFLOW,
        )));
    }
    Ok(eig.assemble(|lam| lam.exp()))
}

/// Matrix logarithm on the support of a PSD matrix.
///
/// Eigenvalues at or below `support_tol` are treated as exact zeros and
/// excluded; an eigenvalue below `-support_tol` fails PSD validation. Returns
/// the logarithm alongside the support projector.
pub fn matrix_log_support<R: Real>(
    m: &HermitianMatrix<R>,
    support_tol: R,
) -> Result<(HermitianMatrix<R>, HermitianMatrix<R>)> {
    let eig = eig_hermitian(m)?;
    if eig.min_eigenvalue() < -support_tol {
        return Err(QbaError::NotPsd {
            min_eigenvalue: eig.min_eigenvalue().to_f64().unwrap_or(f64::NAN),
            tolerance: support_tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    let log = eig.assemble(|lam| {
        if lam > support_tol {
            lam.ln()
        } else {
            R::zero()
        }
    });
    let proj = eig.assemble(|lam| {
        if lam > support_tol {
            R::one()
        } else {
            R::zero()
        }
    });
    Ok((log, proj))
}

/// `Re Tr(ab)` for Hermitian `a`, `b`, evaluated as `Σ_ij a_ij b_ji` without
/// forming the product. The imaginary part is a rounding artifact and is
/// asserted small.
pub fn trace_product<R: Real>(a: &HermitianMatrix<R>, b: &HermitianMatrix<R>) -> Result<R> {
    if a.dim() != b.dim() {
        return Err(QbaError::Dimension(format!("{} vs {}", a.dim(), b.dim())));
    }
    let n = a.dim();
    let (am, bm) = (a.matrix(), b.matrix());
    let mut acc = Complex::new(R::zero(), R::zero());
    for i in 0..n {
        for j in 0..n {
            acc += am[(i, j)] * bm[(j, i)];
        }
    }
    let bound = real::<R>(tol::EIG_RESIDUAL) * a.frobenius_norm() * b.frobenius_norm();
    assert!(
        acc.im.abs() <= bound.max(real::<R>(tol::EIG_RESIDUAL)),
        "trace of Hermitian product must be real (got imaginary part {:e})",
        acc.im.to_f64().unwrap_or(f64::NAN),
    );
    Ok(acc.re)
}
