//! Generic alternating-optimization iterator for capacity objectives.
//!
//! One iteration maps the current input state `ρ` to
//! `ρ' = exp(log ρ + F(ρ)/γ) / Z`, a softmax-like step stabilized by
//! shifting the spectrum by its top eigenvalue before exponentiating. The
//! capacity estimate after each step is `C(t) = γ · log Z`, which is
//! non-decreasing in standard mode and converges to the capacity from below;
//! the largest eigenvalue of `F(ρ)` upper-bounds the capacity, and the
//! difference is a certified a-posteriori error usable for termination far
//! earlier than the a-priori `⌈γ log(dim)/ε⌉` budget.

use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::error::{QbaError, Result};
use crate::linalg::{eig_hermitian, trace_product, HermitianMatrix};
use crate::scalar::{real, real_of_usize, Real};
use crate::state::{relative_entropy, DensityOperator, ProbabilityVector};
use crate::tol;

type FMap<R> = Arc<dyn Fn(&DensityOperator<R>) -> Result<HermitianMatrix<R>> + Send + Sync>;
type StateFn<R> = Arc<dyn Fn(&DensityOperator<R>) -> Result<R> + Send + Sync>;
type PairFn<R> = Arc<dyn Fn(&DensityOperator<R>, &DensityOperator<R>) -> Result<R> + Send + Sync>;

/// A capacity objective: the Hermitian-valued super-operator `F` driving the
/// update rule, the acceleration-parameter interval `(γ_min, γ_max]`, and a
/// direct evaluator of the single-variable objective.
///
/// Exact lower endpoints of the provable interval are channel-dependent
/// contraction/expansion coefficients that are themselves hard optimization
/// problems; specs built by this crate store `γ_min = 0` and only pin the
/// provable upper endpoint.
#[derive(Clone)]
pub struct ObjectiveSpec<R: Real> {
    name: String,
    dim_in: usize,
    gamma_min: R,
    gamma_default: R,
    gamma_max: R,
    diagonal_only: bool,
    f_map: FMap<R>,
    objective: StateFn<R>,
    identity_rhs: PairFn<R>,
}

impl<R: Real> fmt::Debug for ObjectiveSpec<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveSpec")
            .field("name", &self.name)
            .field("dim_in", &self.dim_in)
            .field("gamma_default", &self.gamma_default)
            .field("gamma_max", &self.gamma_max)
            .field("diagonal_only", &self.diagonal_only)
            .finish()
    }
}

impl<R: Real> ObjectiveSpec<R> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        dim_in: usize,
        gamma_min: R,
        gamma_default: R,
        gamma_max: R,
        diagonal_only: bool,
        f_map: FMap<R>,
        objective: StateFn<R>,
        identity_rhs: PairFn<R>,
    ) -> Result<Self> {
        if !(gamma_default > gamma_min && gamma_default <= gamma_max) {
            return Err(QbaError::InvalidParameter(format!(
                "gamma_default {gamma_default} outside ({gamma_min}, {gamma_max}]"
            )));
        }
        Ok(Self {
            name: name.into(),
            dim_in,
            gamma_min,
            gamma_default,
            gamma_max,
            diagonal_only,
            f_map,
            objective,
            identity_rhs,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn gamma_default(&self) -> R {
        self.gamma_default
    }

    pub fn gamma_interval(&self) -> (R, R) {
        (self.gamma_min, self.gamma_max)
    }

    pub fn gamma_max(&self) -> R {
        self.gamma_max
    }

    /// True when iterates are restricted to probability vectors and the
    /// update reduces to the vector rule (no matrix exponentials).
    pub fn diagonal_only(&self) -> bool {
        self.diagonal_only
    }

    pub fn f_map(&self, sigma: &DensityOperator<R>) -> Result<HermitianMatrix<R>> {
        (self.f_map)(sigma)
    }

    /// The single-variable objective this solver maximizes, evaluated
    /// directly from its entropic definition (an independent route from
    /// `Tr ρF(ρ)`).
    pub fn objective_eval(&self, rho: &DensityOperator<R>) -> Result<R> {
        (self.objective)(rho)
    }

    /// Reference value of `Tr ρ(F(σ) − F(ρ))` from relative entropies; the
    /// right-hand side of the objective's pairing identity.
    pub fn identity_rhs(&self, rho: &DensityOperator<R>, sigma: &DensityOperator<R>) -> Result<R> {
        (self.identity_rhs)(rho, sigma)
    }

    /// Two-variable extension `J_γ(ρ, σ) = −γ D(ρ‖σ) + Tr ρF(σ)`.
    pub fn j_gamma(
        &self,
        rho: &DensityOperator<R>,
        sigma: &DensityOperator<R>,
        gamma: R,
    ) -> Result<R> {
        let div = relative_entropy(rho, sigma)?;
        let pairing = state_observable_trace(rho, &self.f_map(sigma)?, self.diagonal_only)?;
        Ok(pairing - gamma * div)
    }
}

/// `Tr ρF` with the zero-weight convention `0·∞ = 0` on diagonal objectives,
/// so evaluations at boundary distributions stay meaningful.
pub fn state_observable_trace<R: Real>(
    rho: &DensityOperator<R>,
    f: &HermitianMatrix<R>,
    diagonal: bool,
) -> Result<R> {
    if diagonal {
        let weights = rho.diagonal_weights();
        let entries = f.diagonal_real();
        if weights.len() != entries.len() {
            return Err(QbaError::Dimension(format!(
                "{} vs {}",
                weights.len(),
                entries.len()
            )));
        }
        Ok(weights
            .iter()
            .zip(&entries)
            .filter(|(w, _)| **w > R::zero())
            .fold(R::zero(), |acc, (&w, &x)| acc + w * x))
    } else {
        trace_product(rho.matrix(), f)
    }
}

/// Acceleration-parameter policy for a solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverMode<R: Real> {
    /// The objective's default γ; provably convergent and monotone.
    Standard,
    /// Caller-chosen fixed γ; monotonicity is only guaranteed inside the
    /// objective's provable interval.
    FixedGamma(R),
    /// Per-iteration adaptive γ; typically far fewer iterations, but the
    /// estimate may be non-monotone.
    Adaptive,
}

#[derive(Debug, Clone)]
pub struct SolverConfig<R: Real> {
    /// Additive error target in nats.
    pub epsilon: R,
    /// Iteration budget; `None` uses the a-priori bound `⌈γ log(dim)/ε⌉`.
    pub max_iterations: Option<u64>,
    pub mode: SolverMode<R>,
    /// Eigenvalues at or below this are outside the support for logarithms.
    pub support_tol: R,
    /// Iterates must keep their smallest eigenvalue above this.
    pub eig_tol: R,
    /// Record every k-th iteration into the trace (the final one always).
    pub trace_every: u64,
}

impl<R: Real> Default for SolverConfig<R> {
    fn default() -> Self {
        Self {
            epsilon: real(1e-6),
            max_iterations: None,
            mode: SolverMode::Standard,
            support_tol: real(tol::SUPPORT),
            eig_tol: real(tol::SUPPORT),
            trace_every: 1,
        }
    }
}

impl<R: Real> SolverConfig<R> {
    pub fn with_epsilon(epsilon: R) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    pub fn with_mode(mode: SolverMode<R>) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }
}

/// One recorded iteration.
#[derive(Debug, Clone)]
pub struct TraceRow<R: Real> {
    pub t: u64,
    pub capacity_estimate: R,
    pub posterior_gap: R,
    pub gamma: R,
    pub log_z: R,
    pub elapsed: Duration,
}

/// Per-iteration record of a solve.
#[derive(Debug, Clone)]
pub struct IterationTrace<R: Real> {
    pub rows: Vec<TraceRow<R>>,
}

impl<R: Real> Default for IterationTrace<R> {
    fn default() -> Self {
        Self { rows: Vec::new() }
    }
}

impl<R: Real> IterationTrace<R> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRow<R>> {
        self.rows.last()
    }

    /// Largest decrease of the capacity estimate between consecutive rows;
    /// zero for a monotone trace.
    pub fn worst_decrease(&self) -> R {
        self.rows
            .windows(2)
            .map(|w| (w[0].capacity_estimate - w[1].capacity_estimate).max(R::zero()))
            .fold(R::zero(), |a, b| a.max(b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    /// The a-posteriori gap certified the estimate within ε.
    PosteriorGap,
    /// The iteration budget ran out first.
    IterationBudget,
}

#[derive(Debug, Clone)]
pub struct CapacityResult<R: Real> {
    /// Final lower-bound estimate, nats.
    pub capacity: R,
    /// Iterate after the last update, strictly positive.
    pub final_state: DensityOperator<R>,
    pub iterations_used: u64,
    pub terminated_by: TerminationReason,
    pub posterior_gap_final: R,
    pub trace: IterationTrace<R>,
}

/// A-priori iteration count `⌈γ ln(dim)/ε⌉` guaranteeing an additive error
/// of at most ε.
pub fn a_priori_iterations<R: Real>(gamma: R, epsilon: R, dim: usize) -> Result<u64> {
    if epsilon <= R::zero() || epsilon.is_nan() {
        return Err(QbaError::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if gamma <= R::zero() || gamma.is_nan() {
        return Err(QbaError::InvalidParameter(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let n = (gamma * real_of_usize::<R>(dim).ln() / epsilon).ceil();
    Ok(n.to_u64().unwrap_or(u64::MAX))
}

/// `C(t) = γ log Z^{(t+1)}`; agrees with the direct evaluation
/// `J_γ(ρ^{(t+1)}, ρ^{(t)})` of the two-variable objective.
pub fn capacity_estimate_from_logz<R: Real>(gamma: R, log_z: R) -> R {
    gamma * log_z
}

/// A-posteriori error bound at the current iterate: the largest eigenvalue
/// of `F(ρ)` upper-bounds the capacity, so `α_max − C(t)` bounds the
/// remaining error.
pub fn posterior_gap<R: Real>(
    rho: &DensityOperator<R>,
    c_t: R,
    spec: &ObjectiveSpec<R>,
) -> Result<R> {
    let f = spec.f_map(rho)?;
    Ok(f_max_eigenvalue(&f, spec.diagonal_only)? - c_t)
}

fn f_max_eigenvalue<R: Real>(f: &HermitianMatrix<R>, diagonal: bool) -> Result<R> {
    if diagonal {
        Ok(f.diagonal_real()
            .into_iter()
            .fold(R::neg_infinity(), R::max))
    } else {
        Ok(eig_hermitian(f)?.max_eigenvalue())
    }
}

/// One update `ρ' = exp(log ρ + F(ρ)/γ)/Z`, returning the next iterate and
/// `log Z` (computed with the spectral shift, so no overflow). On diagonal
/// objectives this is the vector rule `λ'_i ∝ λ_i exp(F_ii/γ)`.
pub fn ba_update<R: Real>(
    rho: &DensityOperator<R>,
    gamma: R,
    spec: &ObjectiveSpec<R>,
) -> Result<(DensityOperator<R>, R)> {
    let f = spec.f_map(rho)?;
    let support = real(tol::SUPPORT);
    ba_update_with_f(rho, &f, gamma, spec.diagonal_only, support, support)
}

/// Update with a precomputed `F(ρ)`, shared with the gap extraction inside
/// the solver loop.
fn ba_update_with_f<R: Real>(
    rho: &DensityOperator<R>,
    f: &HermitianMatrix<R>,
    gamma: R,
    diagonal: bool,
    eig_tol: R,
    support_tol: R,
) -> Result<(DensityOperator<R>, R)> {
    if gamma <= R::zero() || gamma.is_nan() {
        return Err(QbaError::InvalidParameter(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    if diagonal {
        let weights = rho.diagonal_weights();
        let min = weights.iter().copied().fold(R::infinity(), R::min);
        if min <= eig_tol {
            return Err(QbaError::RankDeficientIterate(
                min.to_f64().unwrap_or(f64::NAN),
            ));
        }
        let entries = f.diagonal_real();
        let mut shifted: Vec<R> = weights
            .iter()
            .zip(&entries)
            .map(|(&w, &x)| w.ln() + x / gamma)
            .collect();
        let top = shifted.iter().copied().fold(R::neg_infinity(), R::max);
        for h in &mut shifted {
            *h = (*h - top).exp();
        }
        let z: R = shifted.iter().copied().sum();
        let next: Vec<R> = shifted.into_iter().map(|w| w / z).collect();
        let state = ProbabilityVector::new(next)
            .expect("normalized exponential weights form a distribution")
            .embed();
        Ok((state, top + z.ln()))
    } else {
        let eig_rho = eig_hermitian(rho.matrix())?;
        let min = eig_rho.min_eigenvalue();
        if min <= eig_tol {
            return Err(QbaError::RankDeficientIterate(
                min.to_f64().unwrap_or(f64::NAN),
            ));
        }
        let log_rho = eig_rho.assemble(|lam| {
            if lam > support_tol {
                lam.ln()
            } else {
                R::zero()
            }
        });
        let exponent = log_rho.add(&f.scale(R::one() / gamma))?;
        let eig_h = eig_hermitian(&exponent)?;
        let top = eig_h.max_eigenvalue();
        let z = eig_h
            .eigenvalues
            .iter()
            .fold(R::zero(), |acc, &lam| acc + (lam - top).exp());
        let next = eig_h.assemble(|lam| (lam - top).exp() / z);
        Ok((DensityOperator::new_unchecked(next), top + z.ln()))
    }
}

/// Adaptive acceleration parameter from two consecutive iterates:
/// `γ' = Tr ρ_t(F(ρ_{t−1}) − F(ρ_t)) / D(ρ_t‖ρ_{t−1})`, clamped into
/// `[1e-6, γ_max]`; degenerate denominators keep the previous value.
pub fn adaptive_gamma<R: Real>(
    rho_t: &DensityOperator<R>,
    rho_prev: &DensityOperator<R>,
    spec: &ObjectiveSpec<R>,
    gamma_prev: R,
) -> Result<R> {
    let f_t = spec.f_map(rho_t)?;
    let f_prev = spec.f_map(rho_prev)?;
    adaptive_gamma_with_f(rho_t, &f_t, rho_prev, &f_prev, spec, gamma_prev)
}

fn adaptive_gamma_with_f<R: Real>(
    rho_t: &DensityOperator<R>,
    f_t: &HermitianMatrix<R>,
    rho_prev: &DensityOperator<R>,
    f_prev: &HermitianMatrix<R>,
    spec: &ObjectiveSpec<R>,
    gamma_prev: R,
) -> Result<R> {
    let denominator = relative_entropy(rho_t, rho_prev)?;
    if !denominator.is_finite() || denominator < real(tol::ADAPTIVE_DENOMINATOR) {
        return Ok(gamma_prev);
    }
    let numerator = state_observable_trace(rho_t, &f_prev.sub(f_t)?, spec.diagonal_only)?;
    let candidate = numerator / denominator;
    if candidate.is_nan() {
        return Ok(gamma_prev);
    }
    Ok(candidate.max(real(tol::GAMMA_FLOOR)).min(spec.gamma_max))
}

/// Run the alternating optimization until the a-posteriori gap closes below
/// ε or the iteration budget runs out.
///
/// The default start is the maximally mixed state (uniform distribution for
/// diagonal objectives). In standard mode a decrease of the estimate beyond
/// 1e-8 raises [`QbaError::NonMonotone`], since the estimate is provably
/// non-decreasing there. An infinite gap never terminates the loop; only a
/// finite certified gap can.
pub fn solve<R: Real>(
    spec: &ObjectiveSpec<R>,
    config: &SolverConfig<R>,
    initial: Option<DensityOperator<R>>,
) -> Result<CapacityResult<R>> {
    if config.epsilon <= R::zero() || config.epsilon.is_nan() {
        return Err(QbaError::InvalidParameter(format!(
            "epsilon must be positive, got {}",
            config.epsilon
        )));
    }
    let gamma_start = match config.mode {
        SolverMode::Standard | SolverMode::Adaptive => spec.gamma_default,
        SolverMode::FixedGamma(g) => {
            if g <= R::zero() || g.is_nan() {
                return Err(QbaError::InvalidParameter(format!(
                    "fixed gamma must be positive, got {g}"
                )));
            }
            g
        }
    };
    let budget = config
        .max_iterations
        .map_or_else(
            || a_priori_iterations(gamma_start, config.epsilon, spec.dim_in),
            Ok,
        )?
        .max(1);

    let rho0 = initial.unwrap_or_else(|| DensityOperator::maximally_mixed(spec.dim_in));
    if rho0.dim() != spec.dim_in {
        return Err(QbaError::Dimension(format!(
            "initial state dim {} vs objective {}",
            rho0.dim(),
            spec.dim_in
        )));
    }
    if spec.diagonal_only {
        let off = off_diagonal_norm(&rho0);
        if off > real(tol::VALIDATION) {
            return Err(QbaError::InvalidParameter(
                "diagonal-restricted objective needs a diagonal initial state".into(),
            ));
        }
    }

    let started = Instant::now();
    let mut rho = rho0;
    let mut gamma = gamma_start;
    let mut previous: Option<(DensityOperator<R>, HermitianMatrix<R>)> = None;
    let mut previous_estimate: Option<R> = None;
    let mut trace = IterationTrace::default();
    let mut last: Option<(DensityOperator<R>, R, R)> = None;

    for t in 1..=budget {
        let f_t = spec.f_map(&rho)?;
        if config.mode == SolverMode::Adaptive {
            if let Some((ref rho_prev, ref f_prev)) = previous {
                gamma = adaptive_gamma_with_f(&rho, &f_t, rho_prev, f_prev, spec, gamma)?;
            }
        }
        let (rho_next, log_z) = ba_update_with_f(
            &rho,
            &f_t,
            gamma,
            spec.diagonal_only,
            config.eig_tol,
            config.support_tol,
        )?;
        let estimate = capacity_estimate_from_logz(gamma, log_z);
        let gap = f_max_eigenvalue(&f_t, spec.diagonal_only)? - estimate;

        if config.mode == SolverMode::Standard {
            if let Some(prev) = previous_estimate {
                let drop = prev - estimate;
                if drop > real(1e-8) {
                    return Err(QbaError::NonMonotone(drop.to_f64().unwrap_or(f64::NAN)));
                }
            }
        }

        let converged = gap.is_finite() && gap <= config.epsilon;
        if converged || t == budget || t % config.trace_every.max(1) == 0 {
            trace.rows.push(TraceRow {
                t,
                capacity_estimate: estimate,
                posterior_gap: gap,
                gamma,
                log_z,
                elapsed: started.elapsed(),
            });
        }

        if converged {
            return Ok(CapacityResult {
                capacity: estimate,
                final_state: rho_next,
                iterations_used: t,
                terminated_by: TerminationReason::PosteriorGap,
                posterior_gap_final: gap,
                trace,
            });
        }

        previous_estimate = Some(estimate);
        previous = Some((rho, f_t));
        last = Some((rho_next.clone(), estimate, gap));
        rho = rho_next;
    }

    let (final_state, capacity, gap) = last.expect("budget >= 1 ran at least one iteration");
    Ok(CapacityResult {
        capacity,
        final_state,
        iterations_used: budget,
        terminated_by: TerminationReason::IterationBudget,
        posterior_gap_final: gap,
        trace,
    })
}

fn off_diagonal_norm<R: Real>(rho: &DensityOperator<R>) -> R {
    let m = rho.matrix().matrix();
    let n = rho.dim();
    let mut acc = R::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Fitted exponential decay rate of the trailing error `C_final − C(t)`.
///
/// Least-squares fit of `ln(C_final − C(t))` against `t` over rows whose
/// remaining gap exceeds `10·ε` (below that the numbers are termination
/// noise); needs at least four usable points. The final recorded estimate
/// stands in for the true capacity. Purely diagnostic.
pub fn exponential_rate_diagnostic<R: Real>(trace: &IterationTrace<R>, epsilon: R) -> Option<R> {
    let c_final = trace.last()?.capacity_estimate;
    let cutoff = real::<R>(10.0) * epsilon;
    let points: Vec<(R, R)> = trace
        .rows
        .iter()
        .filter_map(|row| {
            let gap = c_final - row.capacity_estimate;
            (gap > cutoff).then(|| (real_of_usize::<R>(row.t as usize), gap.ln()))
        })
        .collect();
    if points.len() < 4 {
        return None;
    }
    let n = real_of_usize::<R>(points.len());
    let sum_x: R = points.iter().map(|p| p.0).sum();
    let sum_y: R = points.iter().map(|p| p.1).sum();
    let sum_xx: R = points.iter().map(|p| p.0 * p.0).sum();
    let sum_xy: R = points.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sum_xy - sum_x * sum_y) / (n * sum_xx - sum_x * sum_x);
    Some(R::one() - slope.exp())
}
