//! Independent baselines used to validate solver outputs at desk scale.
//!
//! Nothing here runs in the solve path: the classical iteration works on
//! probability vectors only, the Bloch-ball search brute-forces qubit-input
//! objectives on a grid, and the Taylor exponential avoids the
//! eigendecomposition route entirely.

use std::time::Instant;

use num_complex::Complex;

use crate::channel::KrausChannel;
use crate::engine::{IterationTrace, TerminationReason, TraceRow};
use crate::error::{QbaError, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix, HermitianMatrix};
use crate::scalar::{real, real_of_usize, Real};
use crate::tol;

/// Result of the classical alternating optimization on a stochastic matrix.
#[derive(Debug, Clone)]
pub struct ClassicalBaResult<R: Real> {
    /// Capacity estimate, nats.
    pub capacity: R,
    pub iterations_used: u64,
    pub terminated_by: TerminationReason,
    /// Input distributions `λ^{(1)}, λ^{(2)}, …` including the start.
    pub iterates: Vec<Vec<R>>,
    pub trace: IterationTrace<R>,
}

fn validate_column_stochastic<R: Real>(q: &[Vec<R>]) -> Result<(usize, usize)> {
    let rows = q.len();
    let cols = q.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(QbaError::InvalidParameter(
            "stochastic matrix must be non-empty".into(),
        ));
    }
    if q.iter().any(|r| r.len() != cols) {
        return Err(QbaError::Dimension("ragged stochastic matrix".into()));
    }
    for x in 0..cols {
        let mut total = R::zero();
        for row in q {
            if row[x] < -real::<R>(tol::WEIGHT_CLAMP) || !row[x].is_finite() {
                return Err(QbaError::InvalidParameter(format!(
                    "negative entry in column {x}"
                )));
            }
            total += row[x].max(R::zero());
        }
        if (total - R::one()).abs() > real::<R>(1e-8) {
            return Err(QbaError::InvalidParameter(format!(
                "column {x} does not sum to one"
            )));
        }
    }
    Ok((rows, cols))
}

/// Classical alternating optimization on probability vectors (no matrix
/// functions anywhere): multiplicative update
/// `λ'_x ∝ λ_x exp(d_x/γ)` with `d_x = Σ_y Q_yx ln(Q_yx / (Qλ)_y)`,
/// terminated by the same a-posteriori criterion `max_x d_x − C(t) ≤ ε`.
pub fn classical_ba_solve<R: Real>(
    q: &[Vec<R>],
    gamma: R,
    epsilon: R,
    max_iterations: u64,
) -> Result<ClassicalBaResult<R>> {
    let (rows, cols) = validate_column_stochastic(q)?;
    if gamma <= R::zero() || epsilon <= R::zero() {
        return Err(QbaError::InvalidParameter(
            "gamma and epsilon must be positive".into(),
        ));
    }
    let started = Instant::now();
    let mut lambda = vec![R::one() / real_of_usize::<R>(cols); cols];
    let mut iterates = vec![lambda.clone()];
    let mut trace = IterationTrace::default();
    let mut capacity = R::zero();
    let budget = max_iterations.max(1);

    for t in 1..=budget {
        let mut output = vec![R::zero(); rows];
        for y in 0..rows {
            for x in 0..cols {
                output[y] += q[y][x] * lambda[x];
            }
        }
        let mut divergences = vec![R::zero(); cols];
        for x in 0..cols {
            let mut d = R::zero();
            for y in 0..rows {
                let qyx = q[y][x];
                if qyx > R::zero() {
                    d += qyx * (qyx / output[y]).ln();
                }
            }
            divergences[x] = d;
        }
        let mut top = R::neg_infinity();
        for (x, &w) in lambda.iter().enumerate() {
            if w > R::zero() {
                top = top.max(w.ln() + divergences[x] / gamma);
            }
        }
        let mut next = vec![R::zero(); cols];
        let mut z = R::zero();
        for x in 0..cols {
            if lambda[x] > R::zero() {
                let v = (lambda[x].ln() + divergences[x] / gamma - top).exp();
                next[x] = v;
                z += v;
            }
        }
        for v in &mut next {
            *v /= z;
        }
        let log_z = top + z.ln();
        capacity = gamma * log_z;
        let alpha_max = divergences.iter().copied().fold(R::neg_infinity(), R::max);
        lambda = next;
        iterates.push(lambda.clone());
        trace.rows.push(TraceRow {
            t,
            capacity_estimate: capacity,
            posterior_gap: alpha_max - capacity,
            gamma,
            log_z,
            elapsed: started.elapsed(),
        });
        if alpha_max - capacity <= epsilon {
            return Ok(ClassicalBaResult {
                capacity,
                iterations_used: t,
                terminated_by: TerminationReason::PosteriorGap,
                iterates,
                trace,
            });
        }
    }
    Ok(ClassicalBaResult {
        capacity,
        iterations_used: budget,
        terminated_by: TerminationReason::IterationBudget,
        iterates,
        trace,
    })
}

/// Classical channel capacity at the standard parameter, with the a-priori
/// iteration budget as fallback.
pub fn classical_ba_capacity<R: Real>(q: &[Vec<R>], epsilon: R) -> Result<R> {
    let (_, cols) = validate_column_stochastic(q)?;
    let budget = crate::engine::a_priori_iterations(R::one(), epsilon, cols)?;
    Ok(classical_ba_solve(q, R::one(), epsilon, budget)?.capacity)
}

/// Qubit-input objectives the Bloch-ball search can maximize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlochObjective {
    /// `S(ρ) − S(E(ρ))`: thermodynamic capacity at trivial references.
    ThermoGamma1,
    /// `S(E(ρ)) − S(E_c(ρ))`.
    CoherentInfo,
    /// `S(ρ) + S(E(ρ)) − S(E_c(ρ))`.
    MutualInfo,
}

/// Action of a channel on the Bloch parametrization: output
/// `½(E(1) + x·E(X) + y·E(Y) + z·E(Z))` assembled per point.
struct BlochImage<R: Real> {
    basis: [ComplexMatrix<R>; 4],
    dim: usize,
}

impl<R: Real> BlochImage<R> {
    fn new(ch: &KrausChannel<R>) -> Result<Self> {
        let zero = Complex::new(R::zero(), R::zero());
        let one = Complex::new(R::one(), R::zero());
        let i = Complex::new(R::zero(), R::one());
        let pauli_x = ComplexMatrix::from_rows(vec![vec![zero, one], vec![one, zero]])?;
        let pauli_y = ComplexMatrix::from_rows(vec![vec![zero, -i], vec![i, zero]])?;
        let pauli_z = ComplexMatrix::from_rows(vec![vec![one, zero], vec![zero, -one]])?;
        let map = |m: ComplexMatrix<R>| -> Result<ComplexMatrix<R>> {
            Ok(ch.apply_hermitian(&HermitianMatrix::new(m)?)?.into_matrix())
        };
        let basis = [
            map(ComplexMatrix::identity(2))?,
            map(pauli_x)?,
            map(pauli_y)?,
            map(pauli_z)?,
        ];
        let dim = ch.dim_out();
        Ok(Self { basis, dim })
    }

    /// Entropy of the image of the Bloch point `(x, y, z)`.
    fn output_entropy(&self, x: R, y: R, z: R) -> R {
        let half = real::<R>(0.5);
        let coeffs = [R::one(), x, y, z];
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for (basis, &c) in self.basis.iter().zip(&coeffs) {
            if c.is_zero() {
                continue;
            }
            let cc = Complex::new(c * half, R::zero());
            for r in 0..self.dim {
                for s in 0..self.dim {
                    m[(r, s)] += basis[(r, s)] * cc;
                }
            }
        }
        entropy_of_psd(&m, self.dim)
    }
}

/// Entropy from eigenvalues of a PSD unit-trace matrix; closed form for
/// dimensions one and two, Jacobi otherwise. Tiny negatives are clamped.
fn entropy_of_psd<R: Real>(m: &ComplexMatrix<R>, dim: usize) -> R {
    let term = |lam: R| {
        if lam > real::<R>(tol::SUPPORT) {
            -lam * lam.ln()
        } else {
            R::zero()
        }
    };
    match dim {
        1 => R::zero(),
        2 => {
            let a = m[(0, 0)].re;
            let d = m[(1, 1)].re;
            let mid = (a + d) * real::<R>(0.5);
            let radius = ((a - d) * (a - d) * real::<R>(0.25) + m[(0, 1)].norm_sqr()).sqrt();
            term(mid + radius) + term(mid - radius)
        }
        _ => {
            let herm = HermitianMatrix::new(m.clone()).expect("finite square matrix");
            let eig = eig_hermitian(&herm).expect("finite Hermitian matrix");
            eig.eigenvalues
                .iter()
                .fold(R::zero(), |acc, &lam| acc + term(lam))
        }
    }
}

fn binary_entropy<R: Real>(p: R) -> R {
    let term = |x: R| {
        if x > R::zero() {
            -x * x.ln()
        } else {
            R::zero()
        }
    };
    term(p) + term(R::one() - p)
}

/// Brute-force maximization of a qubit-input objective over a Bloch-ball
/// grid `(r, θ, φ)` with `resolution` points per axis, followed by one
/// golden-section refinement pass along each axis around the best grid
/// point. The returned value is a guaranteed lower bound on the true
/// maximum, within O(grid spacing²) of it for smooth objectives.
pub fn bloch_grid_oracle<R: Real>(
    ch: &KrausChannel<R>,
    objective: BlochObjective,
    resolution: usize,
) -> Result<R> {
    if ch.dim_in() != 2 {
        return Err(QbaError::Unsupported(format!(
            "Bloch-ball search needs a qubit input, channel has dim {}",
            ch.dim_in()
        )));
    }
    if resolution < 2 {
        return Err(QbaError::InvalidParameter(
            "resolution must be at least 2".into(),
        ));
    }
    let image = BlochImage::new(ch)?;
    let env_image = match objective {
        BlochObjective::ThermoGamma1 => None,
        BlochObjective::CoherentInfo | BlochObjective::MutualInfo => {
            Some(BlochImage::new(&ch.complementary()?)?)
        }
    };
    let half = real::<R>(0.5);
    let evaluate = |r: R, theta: R, phi: R| -> R {
        let (st, ct) = (theta.sin(), theta.cos());
        let (sp, cp) = (phi.sin(), phi.cos());
        let (x, y, z) = (r * st * cp, r * st * sp, r * ct);
        let input_entropy = binary_entropy(half * (R::one() + r));
        match objective {
            BlochObjective::ThermoGamma1 => input_entropy - image.output_entropy(x, y, z),
            BlochObjective::CoherentInfo => {
                image.output_entropy(x, y, z)
                    - env_image
                        .as_ref()
                        .expect("built above")
                        .output_entropy(x, y, z)
            }
            BlochObjective::MutualInfo => {
                input_entropy + image.output_entropy(x, y, z)
                    - env_image
                        .as_ref()
                        .expect("built above")
                        .output_entropy(x, y, z)
            }
        }
    };

    let steps = resolution - 1;
    let pi = R::PI();
    let two_pi = pi + pi;
    let r_step = R::one() / real_of_usize::<R>(steps);
    let theta_step = pi / real_of_usize::<R>(steps);
    let phi_step = two_pi / real_of_usize::<R>(resolution);

    let mut best = R::neg_infinity();
    let mut best_point = (R::zero(), R::zero(), R::zero());
    for ir in 0..resolution {
        let r = real_of_usize::<R>(ir) * r_step;
        for it in 0..resolution {
            let theta = real_of_usize::<R>(it) * theta_step;
            for ip in 0..resolution {
                let phi = real_of_usize::<R>(ip) * phi_step;
                let value = evaluate(r, theta, phi);
                // Strict comparison keeps the lexicographically first
                // maximizer, so the reduction is deterministic.
                if value > best {
                    best = value;
                    best_point = (r, theta, phi);
                }
            }
        }
    }

    // One golden-section pass per axis within one grid spacing of the
    // incumbent; heuristic refinement, accounted for in caller tolerances.
    let (mut r, mut theta, mut phi) = best_point;
    let refine = |lo: R, hi: R, f: &dyn Fn(R) -> R| -> (R, R) {
        let golden = real::<R>(0.618_033_988_749_894_9);
        let (mut a, mut b) = (lo, hi);
        let mut c = b - golden * (b - a);
        let mut d = a + golden * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..40 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - golden * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + golden * (b - a);
                fd = f(d);
            }
        }
        let mid = (a + b) * half;
        (mid, f(mid))
    };
    let (nr, v1) = refine(
        (r - r_step).max(R::zero()),
        (r + r_step).min(R::one()),
        &|t| evaluate(t, theta, phi),
    );
    if v1 > best {
        best = v1;
        r = nr;
    }
    let (nt, v2) = refine(
        (theta - theta_step).max(R::zero()),
        (theta + theta_step).min(pi),
        &|t| evaluate(r, t, phi),
    );
    if v2 > best {
        best = v2;
        theta = nt;
    }
    let (np, v3) = refine(phi - phi_step, phi + phi_step, &|t| evaluate(r, theta, t));
    if v3 > best {
        best = v3;
        phi = np;
    }
    let _ = phi;
    Ok(best)
}

const EXPM_MAX_TERMS: usize = 64;

/// Matrix exponential by scaling-and-squaring with a Taylor series; no
/// eigendecomposition anywhere, so it cross-checks the spectral route.
/// Inputs must already be spectrally shifted: a Gershgorin bound above the
/// overflow window is rejected.
pub fn independent_expm<R: Real>(m: &HermitianMatrix<R>) -> Result<HermitianMatrix<R>> {
    let n = m.dim();
    let mat = m.matrix();
    let mut gershgorin = R::neg_infinity();
    for i in 0..n {
        let mut radius = R::zero();
        for j in 0..n {
            if i != j {
                radius += mat[(i, j)].norm();
            }
        }
        gershgorin = gershgorin.max(mat[(i, i)].re + radius);
    }
    if gershgorin > real::<R>(tol::EXP_OVERFLOW) {
        return Err(QbaError::OverflowRisk(format!(
            "spectral upper bound {:e} exceeds {:e}",
            gershgorin.to_f64().unwrap_or(f64::NAN),
            tol::EXP_OVERFLOW
        )));
    }

    let norm = mat.frobenius_norm();
    let mut squarings = 0usize;
    let mut scale = R::one();
    while norm * scale > real::<R>(0.5) {
        scale *= real::<R>(0.5);
        squarings += 1;
    }
    let scaled = mat.scale_real(scale);

    let mut result = ComplexMatrix::<R>::identity(n);
    let mut term = ComplexMatrix::<R>::identity(n);
    for k in 1..=EXPM_MAX_TERMS {
        term = &term * &scaled;
        term = term.scale_real(R::one() / real_of_usize::<R>(k));
        result = &result + &term;
        if term.frobenius_norm() <= R::epsilon() * result.frobenius_norm() {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    HermitianMatrix::new(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{amplitude_damping, depolarizing, identity_channel};
    use crate::linalg::matrix_exp;
    use crate::state::random_density;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn classical_noiseless_channel_reaches_log_n() {
        let q = vec![
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ];
        let result = classical_ba_solve(&q, 1.0, 1e-6, 100).unwrap();
        assert!((result.capacity - 4.0f64.ln()).abs() < 1e-9);
        assert_eq!(result.iterations_used, 1);
    }

    #[test]
    fn classical_binary_symmetric_channel_capacity() {
        let p = 0.1f64;
        let q = vec![vec![1.0 - p, p], vec![p, 1.0 - p]];
        let capacity = classical_ba_capacity(&q, 1e-9).unwrap();
        let h_nats = -p * p.ln() - (1.0 - p) * (1.0 - p).ln();
        assert!((capacity - (2.0f64.ln() - h_nats)).abs() < 1e-9);
    }

    #[test]
    fn classical_rejects_invalid_matrix() {
        let q = vec![vec![0.7, 0.2], vec![0.2, 0.2]];
        assert!(classical_ba_capacity(&q, 1e-6).is_err());
    }

    #[test]
    fn bloch_identity_mutual_info_is_two_bits() {
        let ch = identity_channel::<f64>(2);
        let v = bloch_grid_oracle(&ch, BlochObjective::MutualInfo, 200).unwrap();
        assert!((v - 2.0 * 2.0f64.ln()).abs() < 1e-6, "got {v}");
    }

    #[test]
    fn bloch_unital_thermo_is_zero() {
        let ch = depolarizing(0.5f64, 2).unwrap();
        let v = bloch_grid_oracle(&ch, BlochObjective::ThermoGamma1, 60).unwrap();
        assert!(v.abs() < 1e-6, "got {v}");
    }

    #[test]
    fn bloch_rejects_non_qubit_input() {
        let ch = identity_channel::<f64>(3);
        assert!(matches!(
            bloch_grid_oracle(&ch, BlochObjective::MutualInfo, 10),
            Err(QbaError::Unsupported(_))
        ));
    }

    #[test]
    fn bloch_coherent_info_matches_diagonal_scan_for_damping() {
        // The optimum of the damping channel sits on the z-axis; a dense 1-D
        // scan over diagonal inputs is an independent check of the grid.
        let p = 0.3;
        let ch = amplitude_damping(p).unwrap();
        let grid = bloch_grid_oracle(&ch, BlochObjective::CoherentInfo, 80).unwrap();
        let h = |x: f64| binary_entropy(x);
        let mut scan_best = f64::NEG_INFINITY;
        for i in 0..=200_000 {
            let q = i as f64 / 200_000.0;
            scan_best = scan_best.max(h((1.0 - p) * q) - h(p * q));
        }
        assert!(
            (grid - scan_best).abs() < 1e-5,
            "grid {grid} vs scan {scan_best}"
        );
    }

    #[test]
    fn expm_of_zero_and_diagonal() {
        let e = independent_expm(&HermitianMatrix::<f64>::zero(3)).unwrap();
        assert!((e.matrix() - &ComplexMatrix::identity(3)).frobenius_norm() < 1e-14);

        let e = independent_expm(&HermitianMatrix::from_diagonal(&[0.0f64, 1.0])).unwrap();
        assert!((e.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!((e.matrix()[(1, 1)].re - 1.0f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn expm_cross_path_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..5 {
            let src = random_density::<f64, _>(6, &mut rng);
            // Shifted Hermitian with spectrum in a tame range.
            let m = src
                .matrix()
                .scale(4.0)
                .sub(&HermitianMatrix::identity(6).scale(0.7))
                .unwrap();
            let taylor = independent_expm(&m).unwrap();
            let spectral = matrix_exp(&m).unwrap();
            let rel =
                (taylor.matrix() - spectral.matrix()).frobenius_norm() / spectral.frobenius_norm();
            assert!(rel <= 1e-8, "cross-path relative residual {rel:e}");
        }
    }

    #[test]
    fn expm_rejects_unshifted_spectra() {
        let m = HermitianMatrix::from_diagonal(&[0.0f64, 750.0]);
        assert!(matches!(
            independent_expm(&m),
            Err(QbaError::OverflowRisk(_))
        ));
    }

    /// One solver update transcribed by hand, with the exponential taken on
    /// the Taylor path instead of the spectral one.
    #[test]
    fn solver_update_matches_taylor_transcription() {
        use crate::engine::ba_update;
        use crate::objectives::thermo_objective;
        use crate::state::{DensityOperator, GibbsSpec};

        let ch = amplitude_damping(0.3f64).unwrap();
        let spec = thermo_objective(&ch, &GibbsSpec::trivial(2, 2)).unwrap();
        let rho = DensityOperator::maximally_mixed(2);
        let (next, log_z) = ba_update(&rho, 1.0, &spec).unwrap();

        // log(1/2) is exactly −ln 2 on the diagonal.
        let log_rho = HermitianMatrix::from_diagonal(&[-2.0f64.ln(), -2.0f64.ln()]);
        let exponent = log_rho.add(&spec.f_map(&rho).unwrap()).unwrap();
        // Shift by a Gershgorin bound (no eigendecomposition anywhere).
        let m = exponent.matrix();
        let mut shift = f64::NEG_INFINITY;
        for i in 0..2 {
            let radius: f64 = (0..2).filter(|&j| j != i).map(|j| m[(i, j)].norm()).sum();
            shift = shift.max(m[(i, i)].re + radius);
        }
        let shifted = exponent
            .sub(&HermitianMatrix::identity(2).scale(shift))
            .unwrap();
        let numerator = independent_expm(&shifted).unwrap();
        let trace = numerator.trace_real();
        let transcribed = numerator.scale(1.0 / trace);

        assert!(
            (transcribed.matrix() - next.matrix().matrix()).frobenius_norm() <= 1e-8,
            "state mismatch"
        );
        assert!(
            (shift + trace.ln() - log_z).abs() <= 1e-8,
            "normalizer mismatch"
        );
    }

    /// The diagonal-restricted quantum solver and the classical iteration
    /// are the same algorithm on classical channels.
    #[test]
    fn classical_and_quantum_paths_agree_on_asymmetric_channel() {
        use crate::channel::classical_channel;
        use crate::engine::{solve, SolverConfig};
        use crate::objectives::holevo_objective;

        let q: Vec<Vec<f64>> = vec![
            vec![0.5, 1.0, 0.0],
            vec![0.5, 0.0, 1.0],
            vec![0.0, 0.0, 0.0],
        ];
        let classical = classical_ba_solve(&q, 1.0, 1e-8, 1000).unwrap();
        let spec = holevo_objective(&classical_channel(&q).unwrap()).unwrap();
        let quantum = solve(&spec, &SolverConfig::with_epsilon(1e-8), None).unwrap();
        assert!(
            (classical.capacity - quantum.capacity).abs() <= 1e-8,
            "classical {} vs quantum {}",
            classical.capacity,
            quantum.capacity
        );
    }
}
