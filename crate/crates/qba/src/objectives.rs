//! The four capacity objectives, plus derived quantities and sampling
//! diagnostics for the relative-entropy contraction/expansion coefficients.
//!
//! Each builder packages the objective's `F` super-operator, its provable
//! acceleration interval, and a direct entropic evaluator into an
//! [`ObjectiveSpec`]. Logarithms of channel outputs are always taken on the
//! support: complementary channels routinely produce rank-deficient outputs
//! (a noiseless channel has a constant environment), and the pairing
//! identities hold on supports because full-rank inputs of a fixed channel
//! share one output support.

use std::sync::Arc;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{CqChannel, KrausChannel};
use crate::engine::{solve, state_observable_trace, CapacityResult, ObjectiveSpec, SolverConfig};
use crate::error::{QbaError, Result};
use crate::linalg::{eig_hermitian, matrix_log_support, trace_product, HermitianMatrix};
use crate::scalar::{real, Real};
use crate::state::{
    random_density, relative_entropy, relative_entropy_vs_positive, von_neumann_entropy,
    DensityOperator, GibbsSpec,
};
use crate::tol;

/// Holevo quantity of a cq channel: diagonal-restricted objective whose
/// divergence vector is `F_ii = D(τ_i ‖ E(ρ_μ))`. The per-output constants
/// `Tr τ_i log τ_i` are precomputed once.
pub fn holevo_objective<R: Real>(ch: &CqChannel<R>) -> Result<ObjectiveSpec<R>> {
    let ch = Arc::new(ch.clone());
    let dim_in = ch.dim_in();
    let support = real::<R>(tol::SUPPORT);

    let mut output_log_traces = Vec::with_capacity(dim_in);
    for tau in ch.outputs() {
        let eig = eig_hermitian(tau.matrix())?;
        let c = eig
            .eigenvalues
            .iter()
            .filter(|&&lam| lam > support)
            .fold(R::zero(), |acc, &lam| acc + lam * lam.ln());
        output_log_traces.push(c);
    }
    let constants = Arc::new(output_log_traces);

    let f_ch = Arc::clone(&ch);
    let f_constants = Arc::clone(&constants);
    let f_map = Arc::new(
        move |mu: &DensityOperator<R>| -> Result<HermitianMatrix<R>> {
            let weights = mu.diagonal_weights();
            let mix = f_ch.mix_hermitian(&weights)?;
            let (log_mix, proj) = matrix_log_support(&mix, real(tol::SUPPORT))?;
            let mut diag = Vec::with_capacity(f_ch.dim_in());
            for (tau, &c) in f_ch.outputs().iter().zip(f_constants.iter()) {
                // Mass of τ_i outside the support of the mixture: the divergence
                // is infinite there.
                let outside = R::one() - trace_product(tau.matrix(), &proj)?;
                if outside > real(tol::SUPPORT_INCLUSION) {
                    diag.push(R::infinity());
                } else {
                    diag.push(c - trace_product(tau.matrix(), &log_mix)?);
                }
            }
            Ok(HermitianMatrix::from_diagonal(&diag))
        },
    );

    let o_ch = Arc::clone(&ch);
    let objective = Arc::new(move |lam: &DensityOperator<R>| -> Result<R> {
        let weights = lam.diagonal_weights();
        let mix = DensityOperator::new_unchecked(o_ch.mix_hermitian(&weights)?);
        let mut total = R::zero();
        for (w, tau) in weights.iter().zip(o_ch.outputs()) {
            if *w <= R::zero() {
                continue;
            }
            let div = relative_entropy(tau, &mix)?;
            if !div.is_finite() {
                return Ok(R::infinity());
            }
            total += *w * div;
        }
        Ok(total)
    });

    let r_ch = Arc::clone(&ch);
    let identity_rhs = Arc::new(
        move |lam: &DensityOperator<R>, mu: &DensityOperator<R>| -> Result<R> {
            let out_lam =
                DensityOperator::new_unchecked(r_ch.mix_hermitian(&lam.diagonal_weights())?);
            let out_mu =
                DensityOperator::new_unchecked(r_ch.mix_hermitian(&mu.diagonal_weights())?);
            relative_entropy(&out_lam, &out_mu)
        },
    );

    ObjectiveSpec::new(
        "holevo",
        dim_in,
        R::zero(),
        R::one(),
        R::one(),
        true,
        f_map,
        objective,
        identity_rhs,
    )
}

/// Thermodynamic capacity relative to `Γ_A, Γ_B > 0`:
/// `F(σ) = −log σ + E†(log E(σ)) + log Γ_A − E†(log Γ_B)`, maximizing
/// `D(E(ρ)‖Γ_B) − D(ρ‖Γ_A)`.
pub fn thermo_objective<R: Real>(
    ch: &KrausChannel<R>,
    gibbs: &GibbsSpec<R>,
) -> Result<ObjectiveSpec<R>> {
    if gibbs.gamma_a.dim() != ch.dim_in() || gibbs.gamma_b.dim() != ch.dim_out() {
        return Err(QbaError::Dimension(format!(
            "reference operators {}x{} vs channel {}→{}",
            gibbs.gamma_a.dim(),
            gibbs.gamma_b.dim(),
            ch.dim_in(),
            ch.dim_out()
        )));
    }
    let log_positive = |g: &HermitianMatrix<R>, label: &str| -> Result<HermitianMatrix<R>> {
        let eig = eig_hermitian(g)?;
        if eig.min_eigenvalue() <= R::zero() {
            return Err(QbaError::InvalidParameter(format!(
                "{label} must be strictly positive definite"
            )));
        }
        Ok(eig.assemble(|lam| lam.ln()))
    };
    let log_gamma_a = log_positive(&gibbs.gamma_a, "gamma_a")?;
    let log_gamma_b = log_positive(&gibbs.gamma_b, "gamma_b")?;
    let constant = log_gamma_a.sub(&ch.apply_adjoint(&log_gamma_b)?)?;

    let ch = Arc::new(ch.clone());
    let f_ch = Arc::clone(&ch);
    let f_const = Arc::new(constant);
    let f_map_const = Arc::clone(&f_const);
    let f_map = Arc::new(
        move |sigma: &DensityOperator<R>| -> Result<HermitianMatrix<R>> {
            let (log_sigma, _) = matrix_log_support(sigma.matrix(), real(tol::SUPPORT))?;
            let out = f_ch.apply_hermitian(sigma.matrix())?;
            let (log_out, _) = matrix_log_support(&out, real(tol::SUPPORT))?;
            f_ch.apply_adjoint(&log_out)?
                .sub(&log_sigma)?
                .add(&f_map_const)
        },
    );

    let o_ch = Arc::clone(&ch);
    let gamma_a = gibbs.gamma_a.clone();
    let gamma_b = gibbs.gamma_b.clone();
    let objective = Arc::new(move |rho: &DensityOperator<R>| -> Result<R> {
        let out = DensityOperator::new_unchecked(o_ch.apply_hermitian(rho.matrix())?);
        Ok(relative_entropy_vs_positive(&out, &gamma_b)?
            - relative_entropy_vs_positive(rho, &gamma_a)?)
    });

    let r_ch = Arc::clone(&ch);
    let identity_rhs = Arc::new(
        move |rho: &DensityOperator<R>, sigma: &DensityOperator<R>| -> Result<R> {
            let out_rho = DensityOperator::new_unchecked(r_ch.apply_hermitian(rho.matrix())?);
            let out_sigma = DensityOperator::new_unchecked(r_ch.apply_hermitian(sigma.matrix())?);
            Ok(relative_entropy(rho, sigma)? - relative_entropy(&out_rho, &out_sigma)?)
        },
    );

    ObjectiveSpec::new(
        "thermo",
        ch.dim_in(),
        R::zero(),
        R::one(),
        R::one(),
        false,
        f_map,
        objective,
        identity_rhs,
    )
}

/// Coherent information of a channel:
/// `F(σ) = E_c†(log E_c(σ)) − E†(log E(σ))`, maximizing
/// `S(E(ρ)) − S(E_c(ρ))`.
///
/// Convergence guarantees hold on less noisy channels; on other channels the
/// solver still runs and every iterate yields a valid lower bound, but the
/// result is not certified (see [`less_noisy_check`]).
pub fn coherent_info_objective<R: Real>(ch: &KrausChannel<R>) -> Result<ObjectiveSpec<R>> {
    let comp = ch.complementary()?;
    build_two_channel_objective(ch, &comp, "coherent_info", false)
}

/// Channel mutual information:
/// `F(σ) = −log σ + E_c†(log E_c(σ)) − E†(log E(σ))`, maximizing
/// `S(ρ) + S(E(ρ)) − S(E_c(ρ))`; the standard acceleration parameter is 2.
pub fn mutual_info_objective<R: Real>(ch: &KrausChannel<R>) -> Result<ObjectiveSpec<R>> {
    let comp = ch.complementary()?;
    build_two_channel_objective(ch, &comp, "mutual_info", true)
}

/// Shared construction for the coherent-information and mutual-information
/// objectives, which differ by one `−log σ` term and the γ interval.
fn build_two_channel_objective<R: Real>(
    ch: &KrausChannel<R>,
    comp: &KrausChannel<R>,
    name: &str,
    with_input_entropy: bool,
) -> Result<ObjectiveSpec<R>> {
    let ch = Arc::new(ch.clone());
    let comp = Arc::new(comp.clone());

    let f_ch = Arc::clone(&ch);
    let f_comp = Arc::clone(&comp);
    let f_map = Arc::new(
        move |sigma: &DensityOperator<R>| -> Result<HermitianMatrix<R>> {
            let out = f_ch.apply_hermitian(sigma.matrix())?;
            let (log_out, _) = matrix_log_support(&out, real(tol::SUPPORT))?;
            let env = f_comp.apply_hermitian(sigma.matrix())?;
            let (log_env, _) = matrix_log_support(&env, real(tol::SUPPORT))?;
            let base = f_comp
                .apply_adjoint(&log_env)?
                .sub(&f_ch.apply_adjoint(&log_out)?)?;
            if with_input_entropy {
                let (log_sigma, _) = matrix_log_support(sigma.matrix(), real(tol::SUPPORT))?;
                base.sub(&log_sigma)
            } else {
                Ok(base)
            }
        },
    );

    let o_ch = Arc::clone(&ch);
    let o_comp = Arc::clone(&comp);
    let objective = Arc::new(move |rho: &DensityOperator<R>| -> Result<R> {
        let out = DensityOperator::new_unchecked(o_ch.apply_hermitian(rho.matrix())?);
        let env = DensityOperator::new_unchecked(o_comp.apply_hermitian(rho.matrix())?);
        let mut value = von_neumann_entropy(&out)? - von_neumann_entropy(&env)?;
        if with_input_entropy {
            value += von_neumann_entropy(rho)?;
        }
        Ok(value)
    });

    let r_ch = Arc::clone(&ch);
    let r_comp = Arc::clone(&comp);
    let identity_rhs = Arc::new(
        move |rho: &DensityOperator<R>, sigma: &DensityOperator<R>| -> Result<R> {
            let out_rho = DensityOperator::new_unchecked(r_ch.apply_hermitian(rho.matrix())?);
            let out_sigma = DensityOperator::new_unchecked(r_ch.apply_hermitian(sigma.matrix())?);
            let env_rho = DensityOperator::new_unchecked(r_comp.apply_hermitian(rho.matrix())?);
            let env_sigma = DensityOperator::new_unchecked(r_comp.apply_hermitian(sigma.matrix())?);
            let mut value =
                relative_entropy(&out_rho, &out_sigma)? - relative_entropy(&env_rho, &env_sigma)?;
            if with_input_entropy {
                value += relative_entropy(rho, sigma)?;
            }
            Ok(value)
        },
    );

    let (gamma_default, gamma_max) = if with_input_entropy {
        (real::<R>(2.0), real::<R>(2.0))
    } else {
        (R::one(), R::one())
    };
    ObjectiveSpec::new(
        name,
        ch.dim_in(),
        R::zero(),
        gamma_default,
        gamma_max,
        false,
        f_map,
        objective,
        identity_rhs,
    )
}

/// Minimal entropy gain `G(E) = min_ρ S(E(ρ)) − S(ρ)`, the negated
/// thermodynamic capacity at trivial reference operators.
pub fn entropy_gain<R: Real>(ch: &KrausChannel<R>, config: &SolverConfig<R>) -> Result<R> {
    let spec = thermo_objective(ch, &GibbsSpec::trivial(ch.dim_in(), ch.dim_out()))?;
    Ok(-solve(&spec, config, None)?.capacity)
}

/// Completely bounded minimal conditional entropy, the negated
/// trivial-reference thermodynamic capacity of the complementary channel.
pub fn cb_min_conditional_entropy<R: Real>(
    ch: &KrausChannel<R>,
    config: &SolverConfig<R>,
) -> Result<R> {
    entropy_gain(&ch.complementary()?, config)
}

/// Solve wrapper returning the result of the trivial-reference thermo
/// objective, for callers that want the full trace.
pub fn entropy_gain_result<R: Real>(
    ch: &KrausChannel<R>,
    config: &SolverConfig<R>,
) -> Result<CapacityResult<R>> {
    let spec = thermo_objective(ch, &GibbsSpec::trivial(ch.dim_in(), ch.dim_out()))?;
    solve(&spec, config, None)
}

/// Residual `|Tr ρ(F(σ) − F(ρ)) − rhs|` of the objective's pairing identity,
/// where `rhs` is the relative-entropy expression the identity equates the
/// trace with. Small residuals on random full-rank pairs validate the `F`
/// implementation against an independent route.
pub fn identity_check<R: Real>(
    spec: &ObjectiveSpec<R>,
    rho: &DensityOperator<R>,
    sigma: &DensityOperator<R>,
) -> Result<R> {
    let f_sigma = spec.f_map(sigma)?;
    let f_rho = spec.f_map(rho)?;
    let lhs = state_observable_trace(rho, &f_sigma.sub(&f_rho)?, spec.diagonal_only())?;
    let rhs = spec.identity_rhs(rho, sigma)?;
    Ok((lhs - rhs).abs())
}

/// Sampled check of the less-noisy condition
/// `D(E(ρ)‖E(σ)) ≥ D(E_c(ρ)‖E_c(σ))` over random full-rank pairs.
///
/// Returns the pass flag (worst sampled margin above `-1e-9`) and the worst
/// margin itself. Sampling can only refute, never certify.
pub fn less_noisy_check<R: Real>(
    ch: &KrausChannel<R>,
    samples: usize,
    seed: u64,
) -> Result<(bool, R)> {
    if samples == 0 {
        return Err(QbaError::InvalidParameter(
            "need at least one sample".into(),
        ));
    }
    let comp = ch.complementary()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = R::infinity();
    for _ in 0..samples {
        let rho = random_density::<R, _>(ch.dim_in(), &mut rng);
        let sigma = random_density::<R, _>(ch.dim_in(), &mut rng);
        let front = relative_entropy(
            &DensityOperator::new_unchecked(ch.apply_hermitian(rho.matrix())?),
            &DensityOperator::new_unchecked(ch.apply_hermitian(sigma.matrix())?),
        )?;
        let back = relative_entropy(
            &DensityOperator::new_unchecked(comp.apply_hermitian(rho.matrix())?),
            &DensityOperator::new_unchecked(comp.apply_hermitian(sigma.matrix())?),
        )?;
        let margin = front - back;
        if margin < worst {
            worst = margin;
        }
    }
    Ok((worst >= -real::<R>(1e-9), worst))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMethod {
    MonteCarlo,
}

/// Sampled extremes of the relative-entropy ratios under a channel and its
/// complementary channel.
///
/// Direction of the bounds: a sampled maximum of a ratio lower-bounds the
/// true supremum (contraction side), a sampled minimum upper-bounds the true
/// infimum (expansion side). Purely diagnostic; the exact coefficients are
/// themselves hard optimization problems.
#[derive(Debug, Clone)]
pub struct CoefficientEstimates<R: Real> {
    /// Lower bound on `sup D(E(ρ)‖E(σ))/D(ρ‖σ)`.
    pub eta_contraction_lower: R,
    /// Upper bound on `inf D(E(ρ)‖E(σ))/D(ρ‖σ)`.
    pub eta_expansion_upper: R,
    /// Lower bound on `sup [D(E(ρ)‖E(σ)) − D(E_c(ρ)‖E_c(σ))]/D(ρ‖σ)`.
    pub zeta_contraction_lower: R,
    /// Upper bound on `inf [D(E(ρ)‖E(σ)) − D(E_c(ρ)‖E_c(σ))]/D(ρ‖σ)`.
    pub zeta_expansion_upper: R,
    pub samples_used: usize,
    pub method: EstimateMethod,
}

/// Monte-Carlo bound estimates for the contraction/expansion coefficients.
/// Pairs closer than `1e-8` in relative entropy are rejected.
pub fn estimate_coefficients<R: Real>(
    ch: &KrausChannel<R>,
    samples: usize,
    seed: u64,
) -> Result<CoefficientEstimates<R>> {
    if samples == 0 {
        return Err(QbaError::InvalidParameter(
            "need at least one sample".into(),
        ));
    }
    let comp = ch.complementary()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut eta_low = R::neg_infinity();
    let mut eta_high = R::infinity();
    let mut zeta_low = R::neg_infinity();
    let mut zeta_high = R::infinity();
    let mut used = 0;
    let mut attempts = 0;
    while used < samples && attempts < samples * 20 {
        attempts += 1;
        let rho = random_density::<R, _>(ch.dim_in(), &mut rng);
        let sigma = random_density::<R, _>(ch.dim_in(), &mut rng);
        let base = relative_entropy(&rho, &sigma)?;
        if !base.is_finite() || base < real(1e-8) {
            continue;
        }
        let front = relative_entropy(
            &DensityOperator::new_unchecked(ch.apply_hermitian(rho.matrix())?),
            &DensityOperator::new_unchecked(ch.apply_hermitian(sigma.matrix())?),
        )?;
        let back = relative_entropy(
            &DensityOperator::new_unchecked(comp.apply_hermitian(rho.matrix())?),
            &DensityOperator::new_unchecked(comp.apply_hermitian(sigma.matrix())?),
        )?;
        let eta = front / base;
        let zeta = (front - back) / base;
        eta_low = eta_low.max(eta);
        eta_high = eta_high.min(eta);
        zeta_low = zeta_low.max(zeta);
        zeta_high = zeta_high.min(zeta);
        used += 1;
    }
    if used == 0 {
        return Err(QbaError::InvalidParameter(
            "no usable sample pairs (all rejected as too close)".into(),
        ));
    }
    Ok(CoefficientEstimates {
        eta_contraction_lower: eta_low,
        eta_expansion_upper: eta_high,
        zeta_contraction_lower: zeta_low,
        zeta_expansion_upper: zeta_high,
        samples_used: used,
        method: EstimateMethod::MonteCarlo,
    })
}
