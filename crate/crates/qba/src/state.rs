//! Density operators, probability vectors, and entropy functionals.
//!
//! The relative entropy is support-aware: it is finite exactly when the
//! support of the first argument sits inside the support of the second, and
//! is the scalar value `+∞` otherwise (a legitimate function value, not an
//! error).

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{QbaError, Result};
use crate::linalg::{
    eig_hermitian, matrix_log_support, trace_product, ComplexMatrix, HermitianMatrix,
};
use crate::scalar::{real, real_of_usize, Real};
use crate::tol;

/// Unit-trace positive semidefinite matrix.
///
/// Construction admits eigenvalues down to `-1e-10` (channel application
/// accumulates rounding) and clamps any negative ones to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator<R: Real> {
    matrix: HermitianMatrix<R>,
}

impl<R: Real> DensityOperator<R> {
    pub fn new(matrix: HermitianMatrix<R>) -> Result<Self> {
        let window = real::<R>(tol::VALIDATION);
        let trace_dev = (matrix.trace_real() - R::one()).abs();
        if trace_dev > window {
            return Err(QbaError::Validation {
                invariant: "density operator has unit trace".into(),
                residual: trace_dev.to_f64().unwrap_or(f64::NAN),
            });
        }
        let eig = eig_hermitian(&matrix)?;
        let min = eig.min_eigenvalue();
        if min < -window {
            return Err(QbaError::NotPsd {
                min_eigenvalue: min.to_f64().unwrap_or(f64::NAN),
                tolerance: tol::VALIDATION,
            });
        }
        let matrix = if min < R::zero() {
            eig.assemble(|lam| lam.max(R::zero()))
        } else {
            matrix
        };
        Ok(Self { matrix })
    }

    /// Skips validation; for internal paths where positivity is structural
    /// (normalized exponentials, convex mixtures of validated states).
    pub(crate) fn new_unchecked(matrix: HermitianMatrix<R>) -> Self {
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = R::one() / real_of_usize::<R>(dim);
        Self {
            matrix: HermitianMatrix::from_diagonal(&vec![w; dim]),
        }
    }

    /// Computational basis state `|k⟩⟨k|`.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut d = vec![R::zero(); dim];
        d[k] = R::one();
        Self {
            matrix: HermitianMatrix::from_diagonal(&d),
        }
    }

    pub fn from_diagonal(weights: &[R]) -> Result<Self> {
        Self::new(HermitianMatrix::from_diagonal(weights))
    }

    /// Density operator of a pure state given its amplitudes.
    pub fn from_ket(amplitudes: &[Complex<R>]) -> Result<Self> {
        let n = amplitudes.len();
        let norm_sqr: R = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        let m = ComplexMatrix::from_fn(n, n, |i, j| {
            amplitudes[i] * amplitudes[j].conj() / Complex::new(norm_sqr, R::zero())
        });
        Self::new(HermitianMatrix::new(m)?)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix<R> {
        &self.matrix
    }

    pub fn min_eigenvalue(&self) -> Result<R> {
        Ok(eig_hermitian(&self.matrix)?.min_eigenvalue())
    }

    /// Diagonal entries, real parts; the full weight vector for diagonal
    /// (classical) states.
    pub fn diagonal_weights(&self) -> Vec<R> {
        self.matrix.diagonal_real()
    }
}

/// Probability distribution, embedded as a diagonal density operator in the
/// fixed computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector<R: Real> {
    weights: Vec<R>,
}

impl<R: Real> ProbabilityVector<R> {
    pub fn new(weights: Vec<R>) -> Result<Self> {
        let clamp = real::<R>(tol::WEIGHT_CLAMP);
        let mut w = weights;
        for x in &mut w {
            if !x.is_finite() {
                return Err(QbaError::InvalidMatrix);
            }
            if *x < -clamp {
                return Err(QbaError::Validation {
                    invariant: "probability weights nonnegative".into(),
                    residual: x.to_f64().unwrap_or(f64::NAN).abs(),
                });
            }
            if *x < R::zero() {
                *x = R::zero();
            }
        }
        let total: R = w.iter().copied().sum();
        let dev = (total - R::one()).abs();
        if dev > real::<R>(tol::VALIDATION) {
            return Err(QbaError::Validation {
                invariant: "probability weights sum to one".into(),
                residual: dev.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { weights: w })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![R::one() / real_of_usize::<R>(n); n],
        }
    }

    pub fn point_mass(n: usize, index: usize) -> Self {
        let mut w = vec![R::zero(); n];
        w[index] = R::one();
        Self { weights: w }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[R] {
        &self.weights
    }

    pub fn embed(&self) -> DensityOperator<R> {
        DensityOperator::new_unchecked(HermitianMatrix::from_diagonal(&self.weights))
    }
}

/// Reference operators for the thermodynamic capacity: strictly positive
/// definite `Γ_A`, `Γ_B`, optionally generated from Hamiltonians at a fixed
/// inverse temperature.
#[derive(Debug, Clone)]
pub struct GibbsSpec<R: Real> {
    pub gamma_a: HermitianMatrix<R>,
    pub gamma_b: HermitianMatrix<R>,
}

impl<R: Real> GibbsSpec<R> {
    pub fn new(gamma_a: HermitianMatrix<R>, gamma_b: HermitianMatrix<R>) -> Result<Self> {
        for (label, g) in [("gamma_a", &gamma_a), ("gamma_b", &gamma_b)] {
            let min = eig_hermitian(g)?.min_eigenvalue();
            if min <= R::zero() {
                return Err(QbaError::InvalidParameter(format!(
                    "{label} must be strictly positive definite (min eigenvalue {:e})",
                    min.to_f64().unwrap_or(f64::NAN)
                )));
            }
        }
        Ok(Self { gamma_a, gamma_b })
    }

    /// Trivial reference `Γ_A = 1, Γ_B = 1`.
    pub fn trivial(dim_in: usize, dim_out: usize) -> Self {
        Self {
            gamma_a: HermitianMatrix::identity(dim_in),
            gamma_b: HermitianMatrix::identity(dim_out),
        }
    }

    /// `Γ = exp(−H/β)` for each side. `β = ∞` maps to the identity; `β ≤ 0`
    /// is rejected since it has no positive-definite meaning here.
    pub fn from_hamiltonians(
        h_a: &HermitianMatrix<R>,
        h_b: &HermitianMatrix<R>,
        beta: R,
    ) -> Result<Self> {
        if beta <= R::zero() || beta.is_nan() {
            return Err(QbaError::InvalidParameter(format!(
                "inverse temperature must be positive, got {beta}"
            )));
        }
        if beta.is_infinite() {
            return Ok(Self::trivial(h_a.dim(), h_b.dim()));
        }
        let gamma_of = |h: &HermitianMatrix<R>| -> Result<HermitianMatrix<R>> {
            let eig = eig_hermitian(h)?;
            Ok(eig.assemble(|lam| (-lam / beta).exp()))
        };
        Self::new(gamma_of(h_a)?, gamma_of(h_b)?)
    }
}

/// Von Neumann entropy `S(ρ) = −Tr ρ log ρ` in nats, taken on the support.
pub fn von_neumann_entropy<R: Real>(rho: &DensityOperator<R>) -> Result<R> {
    let eig = eig_hermitian(rho.matrix())?;
    let support = real::<R>(tol::SUPPORT);
    Ok(eig
        .eigenvalues
        .iter()
        .filter(|&&lam| lam > support)
        .fold(R::zero(), |acc, &lam| acc - lam * lam.ln()))
}

/// Quantum relative entropy `D(ρ‖σ) = Tr ρ(log ρ − log σ)` in nats when the
/// support of `ρ` lies inside the support of `σ`, `+∞` otherwise.
///
/// The support-inclusion test is the projector residual
/// `‖(1−P_σ) ρ (1−P_σ)‖_F ≤ 1e-10` with `P_σ` the support projector of `σ`.
pub fn relative_entropy<R: Real>(
    rho: &DensityOperator<R>,
    sigma: &DensityOperator<R>,
) -> Result<R> {
    if rho.dim() != sigma.dim() {
        return Err(QbaError::Dimension(format!(
            "{} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let support = real::<R>(tol::SUPPORT);
    let (log_sigma, proj) = matrix_log_support(sigma.matrix(), support)?;
    let outside = HermitianMatrix::identity(sigma.dim()).sub(&proj)?;
    let leak = &(outside.matrix() * rho.matrix().matrix()) * outside.matrix();
    if leak.frobenius_norm() > real::<R>(tol::SUPPORT_INCLUSION) {
        return Ok(R::infinity());
    }
    let eig_rho = eig_hermitian(rho.matrix())?;
    let tr_rho_log_rho = eig_rho
        .eigenvalues
        .iter()
        .filter(|&&lam| lam > support)
        .fold(R::zero(), |acc, &lam| acc + lam * lam.ln());
    Ok(tr_rho_log_rho - trace_product(rho.matrix(), &log_sigma)?)
}

/// `D(ρ‖Γ)` against a strictly positive (not necessarily normalized)
/// reference operator; always finite.
pub fn relative_entropy_vs_positive<R: Real>(
    rho: &DensityOperator<R>,
    reference: &HermitianMatrix<R>,
) -> Result<R> {
    if rho.dim() != reference.dim() {
        return Err(QbaError::Dimension(format!(
            "{} vs {}",
            rho.dim(),
            reference.dim()
        )));
    }
    let eig_ref = eig_hermitian(reference)?;
    if eig_ref.min_eigenvalue() <= R::zero() {
        return Err(QbaError::InvalidParameter(
            "reference operator must be strictly positive definite".into(),
        ));
    }
    let log_ref = eig_ref.assemble(|lam| lam.ln());
    let support = real::<R>(tol::SUPPORT);
    let eig_rho = eig_hermitian(rho.matrix())?;
    let tr_rho_log_rho = eig_rho
        .eigenvalues
        .iter()
        .filter(|&&lam| lam > support)
        .fold(R::zero(), |acc, &lam| acc + lam * lam.ln());
    Ok(tr_rho_log_rho - trace_product(rho.matrix(), &log_ref)?)
}

/// Slack in the Gibbs variational principle:
/// `log Tr exp(H) − (Tr ωH − Tr ω log ω) ≥ 0`, with equality exactly at the
/// Gibbs state of `H`. The log-sum-exp is evaluated with a spectral shift,
/// so no overflow can occur.
pub fn gibbs_gap<R: Real>(omega: &DensityOperator<R>, h: &HermitianMatrix<R>) -> Result<R> {
    if omega.dim() != h.dim() {
        return Err(QbaError::Dimension(format!(
            "{} vs {}",
            omega.dim(),
            h.dim()
        )));
    }
    let eig_h = eig_hermitian(h)?;
    let h_max = eig_h.max_eigenvalue();
    let z_shifted = eig_h
        .eigenvalues
        .iter()
        .fold(R::zero(), |acc, &lam| acc + (lam - h_max).exp());
    let log_partition = h_max + z_shifted.ln();
    let energy = trace_product(omega.matrix(), h)?;
    let entropy = von_neumann_entropy(omega)?;
    Ok(log_partition - energy - entropy)
}

/// Trace distance `½‖a − b‖₁`.
pub fn trace_distance<R: Real>(a: &DensityOperator<R>, b: &DensityOperator<R>) -> Result<R> {
    if a.dim() != b.dim() {
        return Err(QbaError::Dimension(format!("{} vs {}", a.dim(), b.dim())));
    }
    let diff = a.matrix().sub(b.matrix())?;
    let eig = eig_hermitian(&diff)?;
    Ok(real::<R>(0.5)
        * eig
            .eigenvalues
            .iter()
            .fold(R::zero(), |acc, &lam| acc + lam.abs()))
}

/// Full-rank random density operator: `GG†/Tr(GG†)` with `G` a complex
/// Gaussian matrix drawn from the given generator.
pub fn random_density<R: Real, G: Rng>(dim: usize, rng: &mut G) -> DensityOperator<R> {
    let gauss = |rng: &mut G| -> R { real::<R>(StandardNormal.sample(rng)) };
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| Complex::new(gauss(rng), gauss(rng)));
    let gg = &g * &g.adjoint();
    let trace = gg.trace().re;
    let m = HermitianMatrix::new(gg.scale_real(R::one() / trace))
        .expect("GG† is finite, square, Hermitian");
    DensityOperator::new(m).expect("normalized GG† is a density operator")
}
