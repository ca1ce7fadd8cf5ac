//! Quantum channels in Kraus form, classical-quantum channels as output
//! tables, and a small builtin channel library.
//!
//! A `KrausChannel` eagerly builds lookup tables of `E(|i⟩⟨j|)` and
//! `E†(|i⟩⟨j|)` at construction, so channel application is a table
//! contraction with constant-time entry access. The complementary channel is
//! derived from the Kraus operators with environment dimension equal to the
//! Kraus rank.

use num_complex::Complex;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{QbaError, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix};
use crate::scalar::{real, real_of_usize, Real};
use crate::state::{random_density, DensityOperator, ProbabilityVector};
use crate::tol;

/// Lookup tables of a channel's action on matrix units.
#[derive(Debug, Clone)]
pub struct ChannelTable<R: Real> {
    /// `forward[i * dim_in + j] = E(|i⟩⟨j|)`, each `dim_out × dim_out`.
    forward: Vec<ComplexMatrix<R>>,
    /// `adjoint[i * dim_out + j] = E†(|i⟩⟨j|)`, each `dim_in × dim_in`.
    adjoint: Vec<ComplexMatrix<R>>,
    dim_in: usize,
    dim_out: usize,
}

impl<R: Real> ChannelTable<R> {
    fn build(kraus_ops: &[ComplexMatrix<R>], dim_in: usize, dim_out: usize) -> Self {
        let mut forward = Vec::with_capacity(dim_in * dim_in);
        for i in 0..dim_in {
            for j in 0..dim_in {
                // E(|i⟩⟨j|) = Σ_k A_k |i⟩⟨j| A_k† ; entry (r,c) = Σ_k A_k[r,i] conj(A_k[c,j]).
                forward.push(ComplexMatrix::from_fn(dim_out, dim_out, |r, c| {
                    kraus_ops
                        .iter()
                        .map(|a| a[(r, i)] * a[(c, j)].conj())
                        .fold(Complex::new(R::zero(), R::zero()), |acc, z| acc + z)
                }));
            }
        }
        let mut adjoint = Vec::with_capacity(dim_out * dim_out);
        for i in 0..dim_out {
            for j in 0..dim_out {
                // E†(|i⟩⟨j|) = Σ_k A_k† |i⟩⟨j| A_k ; entry (r,c) = Σ_k conj(A_k[i,r]) A_k[j,c].
                adjoint.push(ComplexMatrix::from_fn(dim_in, dim_in, |r, c| {
                    kraus_ops
                        .iter()
                        .map(|a| a[(i, r)].conj() * a[(j, c)])
                        .fold(Complex::new(R::zero(), R::zero()), |acc, z| acc + z)
                }));
            }
        }
        Self {
            forward,
            adjoint,
            dim_in,
            dim_out,
        }
    }

    pub fn forward_entry(&self, i: usize, j: usize) -> &ComplexMatrix<R> {
        &self.forward[i * self.dim_in + j]
    }

    pub fn adjoint_entry(&self, i: usize, j: usize) -> &ComplexMatrix<R> {
        &self.adjoint[i * self.dim_out + j]
    }

    /// Hermiticity pairing residual `max_{i,j} ‖entry(j,i) − entry(i,j)†‖_F`.
    pub fn pairing_residual(&self) -> R {
        let mut worst = R::zero();
        for i in 0..self.dim_in {
            for j in 0..self.dim_in {
                let r = (self.forward_entry(j, i) - &self.forward_entry(i, j).adjoint())
                    .frobenius_norm();
                worst = worst.max(r);
            }
        }
        worst
    }
}

/// Completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone)]
pub struct KrausChannel<R: Real> {
    kraus_ops: Vec<ComplexMatrix<R>>,
    dim_in: usize,
    dim_out: usize,
    table: ChannelTable<R>,
}

impl<R: Real> KrausChannel<R> {
    /// Validates shape consistency, `K ≤ |A||B|`, and trace preservation
    /// `Σ A_k†A_k = 1` within the construction window.
    pub fn new(kraus_ops: Vec<ComplexMatrix<R>>) -> Result<Self> {
        let first = kraus_ops.first().ok_or_else(|| {
            QbaError::InvalidParameter("channel needs at least one Kraus operator".into())
        })?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        if dim_in == 0 || dim_out == 0 {
            return Err(QbaError::Dimension(
                "Kraus operators must be non-empty".into(),
            ));
        }
        for a in &kraus_ops {
            if a.rows() != dim_out || a.cols() != dim_in {
                return Err(QbaError::Dimension(format!(
                    "Kraus operator {}x{} differs from {}x{}",
                    a.rows(),
                    a.cols(),
                    dim_out,
                    dim_in
                )));
            }
            if !a.is_finite() {
                return Err(QbaError::InvalidMatrix);
            }
        }
        if kraus_ops.len() > dim_in * dim_out {
            return Err(QbaError::Validation {
                invariant: format!("Kraus rank at most {}", dim_in * dim_out),
                residual: (kraus_ops.len() - dim_in * dim_out) as f64,
            });
        }
        let mut completeness = ComplexMatrix::zeros(dim_in, dim_in);
        for a in &kraus_ops {
            completeness = &completeness + &(&a.adjoint() * a);
        }
        let residual = (&completeness - &ComplexMatrix::identity(dim_in)).frobenius_norm();
        if residual > real::<R>(tol::VALIDATION) {
            return Err(QbaError::Validation {
                invariant: "Kraus completeness Σ A†A = 1".into(),
                residual: residual.to_f64().unwrap_or(f64::NAN),
            });
        }
        let table = ChannelTable::build(&kraus_ops, dim_in, dim_out);
        Ok(Self {
            kraus_ops,
            dim_in,
            dim_out,
            table,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    /// Number of Kraus operators.
    pub fn kraus_rank(&self) -> usize {
        self.kraus_ops.len()
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix<R>] {
        &self.kraus_ops
    }

    pub fn table(&self) -> &ChannelTable<R> {
        &self.table
    }

    /// Linear extension of the channel to Hermitian inputs via the lookup
    /// table: `E(h) = Σ_{ij} h_ij E(|i⟩⟨j|)`.
    pub fn apply_hermitian(&self, h: &HermitianMatrix<R>) -> Result<HermitianMatrix<R>> {
        if h.dim() != self.dim_in {
            return Err(QbaError::Dimension(format!(
                "input dim {} vs channel {}",
                h.dim(),
                self.dim_in
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for i in 0..self.dim_in {
            for j in 0..self.dim_in {
                let coeff = h.matrix()[(i, j)];
                if coeff.re.is_zero() && coeff.im.is_zero() {
                    continue;
                }
                let entry = self.table.forward_entry(i, j);
                for r in 0..self.dim_out {
                    for c in 0..self.dim_out {
                        out[(r, c)] += coeff * entry[(r, c)];
                    }
                }
            }
        }
        HermitianMatrix::new(out)
    }

    /// Channel application to a state, with output validation.
    pub fn apply(&self, rho: &DensityOperator<R>) -> Result<DensityOperator<R>> {
        DensityOperator::new(self.apply_hermitian(rho.matrix())?)
    }

    /// Adjoint map `E†(X) = Σ_k A_k† X A_k` via the adjoint lookup table;
    /// satisfies `Tr(E(ρ)X) = Tr(ρ E†(X))`.
    pub fn apply_adjoint(&self, x: &HermitianMatrix<R>) -> Result<HermitianMatrix<R>> {
        if x.dim() != self.dim_out {
            return Err(QbaError::Dimension(format!(
                "input dim {} vs channel output {}",
                x.dim(),
                self.dim_out
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for i in 0..self.dim_out {
            for j in 0..self.dim_out {
                let coeff = x.matrix()[(i, j)];
                if coeff.re.is_zero() && coeff.im.is_zero() {
                    continue;
                }
                let entry = self.table.adjoint_entry(i, j);
                for r in 0..self.dim_in {
                    for c in 0..self.dim_in {
                        out[(r, c)] += coeff * entry[(r, c)];
                    }
                }
            }
        }
        HermitianMatrix::new(out)
    }

    /// Direct Kraus sum `Σ_k A_k h A_k†`; reference path for the table.
    pub fn apply_via_kraus_sum(&self, h: &HermitianMatrix<R>) -> Result<HermitianMatrix<R>> {
        if h.dim() != self.dim_in {
            return Err(QbaError::Dimension(format!(
                "input dim {} vs channel {}",
                h.dim(),
                self.dim_in
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for a in &self.kraus_ops {
            out = &out + &(&(a * h.matrix()) * &a.adjoint());
        }
        HermitianMatrix::new(out)
    }

    /// Complementary channel `A → E` with environment dimension equal to the
    /// Kraus rank: `⟨k|E_c(ρ)|l⟩ = Tr(A_k ρ A_l†)`. Its Kraus operators
    /// `B_e` stack the `e`-th rows of the `A_k`.
    pub fn complementary(&self) -> Result<KrausChannel<R>> {
        let rank = self.kraus_rank();
        let ops = (0..self.dim_out)
            .map(|e| ComplexMatrix::from_fn(rank, self.dim_in, |k, a| self.kraus_ops[k][(e, a)]))
            .collect();
        KrausChannel::new(ops)
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)`; PSD for a completely positive
    /// map.
    pub fn choi_matrix(&self) -> HermitianMatrix<R> {
        let d = self.dim_in * self.dim_out;
        let mut out = ComplexMatrix::zeros(d, d);
        for i in 0..self.dim_in {
            for j in 0..self.dim_in {
                let entry = self.table.forward_entry(i, j);
                for r in 0..self.dim_out {
                    for c in 0..self.dim_out {
                        out[(i * self.dim_out + r, j * self.dim_out + c)] = entry[(r, c)];
                    }
                }
            }
        }
        HermitianMatrix::new(out).expect("Choi matrix is square and finite")
    }
}

/// Classical-quantum channel: a table of output states `τ_x`, one per input
/// symbol.
#[derive(Debug, Clone)]
pub struct CqChannel<R: Real> {
    outputs: Vec<DensityOperator<R>>,
    dim_out: usize,
}

impl<R: Real> CqChannel<R> {
    pub fn new(outputs: Vec<DensityOperator<R>>) -> Result<Self> {
        let dim_out = outputs.first().map(DensityOperator::dim).ok_or_else(|| {
            QbaError::InvalidParameter("cq channel needs at least one output".into())
        })?;
        if outputs.iter().any(|t| t.dim() != dim_out) {
            return Err(QbaError::Dimension(
                "cq outputs must share one dimension".into(),
            ));
        }
        Ok(Self { outputs, dim_out })
    }

    pub fn dim_in(&self) -> usize {
        self.outputs.len()
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn outputs(&self) -> &[DensityOperator<R>] {
        &self.outputs
    }

    /// Unvalidated mixture `Σ_x λ_x τ_x` as a Hermitian matrix; the hot path
    /// of the Holevo iteration.
    pub fn mix_hermitian(&self, weights: &[R]) -> Result<HermitianMatrix<R>> {
        if weights.len() != self.outputs.len() {
            return Err(QbaError::Dimension(format!(
                "{} weights vs {} outputs",
                weights.len(),
                self.outputs.len()
            )));
        }
        let mut acc = HermitianMatrix::zero(self.dim_out);
        for (w, tau) in weights.iter().zip(&self.outputs) {
            if w.is_zero() {
                continue;
            }
            acc = acc.add(&tau.matrix().scale(*w))?;
        }
        Ok(acc)
    }

    /// Channel output `E(ρ_λ) = Σ_x λ_x τ_x`.
    pub fn apply(&self, lam: &ProbabilityVector<R>) -> Result<DensityOperator<R>> {
        Ok(DensityOperator::new_unchecked(
            self.mix_hermitian(lam.weights())?,
        ))
    }
}

/// Qubit amplitude damping channel with decay probability `p`.
pub fn amplitude_damping<R: Real>(p: R) -> Result<KrausChannel<R>> {
    if !(R::zero()..=R::one()).contains(&p) || p.is_nan() {
        return Err(QbaError::InvalidParameter(format!(
            "damping probability {p} outside [0, 1]"
        )));
    }
    let zero = Complex::new(R::zero(), R::zero());
    let one = Complex::new(R::one(), R::zero());
    let keep = Complex::new((R::one() - p).sqrt(), R::zero());
    let decay = Complex::new(p.sqrt(), R::zero());
    let a0 = ComplexMatrix::from_rows(vec![vec![one, zero], vec![zero, keep]])?;
    let a1 = ComplexMatrix::from_rows(vec![vec![zero, decay], vec![zero, zero]])?;
    KrausChannel::new(vec![a0, a1])
}

/// Depolarizing channel `ρ ↦ (1−q)ρ + q·Tr(ρ)·1/d` on dimension `dim`,
/// realized with the discrete Heisenberg-Weyl operators.
pub fn depolarizing<R: Real>(q: R, dim: usize) -> Result<KrausChannel<R>> {
    if !(R::zero()..=R::one()).contains(&q) || q.is_nan() {
        return Err(QbaError::InvalidParameter(format!(
            "depolarizing strength {q} outside [0, 1]"
        )));
    }
    if dim < 2 {
        return Err(QbaError::InvalidParameter(
            "depolarizing needs dim >= 2".into(),
        ));
    }
    let d = real_of_usize::<R>(dim);
    let dd = d * d;
    let mut ops = Vec::with_capacity(dim * dim);
    let id_coeff = (R::one() - q + q / dd).sqrt();
    let w_coeff = (q / dd).sqrt();
    let two_pi = R::PI() + R::PI();
    for shift in 0..dim {
        for clock in 0..dim {
            let coeff = if shift == 0 && clock == 0 {
                id_coeff
            } else {
                w_coeff
            };
            // (X^shift Z^clock)[r, c] = δ_{r, c+shift} ω^{clock·c}
            let op = ComplexMatrix::from_fn(dim, dim, |r, c| {
                if r == (c + shift) % dim {
                    let phase = two_pi * real_of_usize::<R>(clock * c % dim) / d;
                    Complex::new(coeff * phase.cos(), coeff * phase.sin())
                } else {
                    Complex::new(R::zero(), R::zero())
                }
            });
            ops.push(op);
        }
    }
    KrausChannel::new(ops)
}

/// Identity channel on dimension `dim`.
pub fn identity_channel<R: Real>(dim: usize) -> KrausChannel<R> {
    KrausChannel::new(vec![ComplexMatrix::identity(dim)]).expect("identity is trace preserving")
}

/// Embed a column-stochastic matrix `Q` (entry `[y][x] = P(y|x)`) as a cq
/// channel with diagonal outputs.
pub fn classical_channel<R: Real>(q: &[Vec<R>]) -> Result<CqChannel<R>> {
    let rows = q.len();
    if rows == 0 || q[0].is_empty() {
        return Err(QbaError::InvalidParameter(
            "stochastic matrix must be non-empty".into(),
        ));
    }
    let cols = q[0].len();
    if q.iter().any(|r| r.len() != cols) {
        return Err(QbaError::Dimension("ragged stochastic matrix".into()));
    }
    let window = real::<R>(1e-8);
    let mut outputs = Vec::with_capacity(cols);
    for x in 0..cols {
        let mut column = Vec::with_capacity(rows);
        let mut total = R::zero();
        for row in q {
            let v = row[x];
            if v < -real::<R>(tol::WEIGHT_CLAMP) || !v.is_finite() {
                return Err(QbaError::Validation {
                    invariant: format!("stochastic entries nonnegative (column {x})"),
                    residual: v.to_f64().unwrap_or(f64::NAN).abs(),
                });
            }
            column.push(v.max(R::zero()));
            total += v;
        }
        let dev = (total - R::one()).abs();
        if dev > window {
            return Err(QbaError::Validation {
                invariant: format!("stochastic column {x} sums to one"),
                residual: dev.to_f64().unwrap_or(f64::NAN),
            });
        }
        outputs.push(DensityOperator::new_unchecked(
            HermitianMatrix::from_diagonal(&column),
        ));
    }
    CqChannel::new(outputs)
}

/// Seed-deterministic random cq channel: each output is a normalized `GG†`
/// with `G` complex Gaussian of size `dim_out × dim_out`. Approximates the
/// usual random-density-matrix ensembles; the exact reference distribution is
/// not reproduced.
pub fn random_cq<R: Real>(inputs: usize, dim_out: usize, seed: u64) -> Result<CqChannel<R>> {
    if inputs == 0 || dim_out == 0 {
        return Err(QbaError::InvalidParameter(
            "random cq channel needs positive dimensions".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outputs = (0..inputs)
        .map(|_| random_density::<R, _>(dim_out, &mut rng))
        .collect();
    CqChannel::new(outputs)
}

/// Seed-deterministic random channel: the Kraus operators are blocks of a
/// Haar-ish isometry `A → B⊗E` obtained by orthonormalizing the columns of a
/// complex Gaussian matrix.
pub fn random_channel<R: Real>(
    dim_in: usize,
    dim_out: usize,
    kraus_rank: usize,
    seed: u64,
) -> Result<KrausChannel<R>> {
    let total = dim_out * kraus_rank;
    if dim_in == 0 || total < dim_in {
        return Err(QbaError::InvalidParameter(
            "isometry needs dim_out * kraus_rank >= dim_in > 0".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || real::<R>(rand::Rng::gen::<f64>(&mut rng) - 0.5);
    let mut cols: Vec<Vec<Complex<R>>> = (0..dim_in)
        .map(|_| (0..total).map(|_| Complex::new(draw(), draw())).collect())
        .collect();
    // Gram-Schmidt; generic Gaussian columns are well separated.
    for j in 0..dim_in {
        let (done, rest) = cols.split_at_mut(j);
        let current = &mut rest[0];
        for previous in done.iter() {
            let dot = previous
                .iter()
                .zip(current.iter())
                .fold(Complex::new(R::zero(), R::zero()), |acc, (p, c)| {
                    acc + p.conj() * *c
                });
            for (c, p) in current.iter_mut().zip(previous) {
                *c -= dot * *p;
            }
        }
        let norm = current
            .iter()
            .map(|z| z.norm_sqr())
            .fold(R::zero(), |a, b| a + b)
            .sqrt();
        for c in current.iter_mut() {
            *c /= Complex::new(norm, R::zero());
        }
    }
    let ops = (0..kraus_rank)
        .map(|k| ComplexMatrix::from_fn(dim_out, dim_in, |b, a| cols[a][b * kraus_rank + k]))
        .collect();
    KrausChannel::new(ops)
}

/// Restrict a quantum channel to classical basis-state inputs:
/// `τ_i = E(|i⟩⟨i|)`.
pub fn cq_from_channel<R: Real>(ch: &KrausChannel<R>) -> Result<CqChannel<R>> {
    let outputs = (0..ch.dim_in())
        .map(|i| {
            let entry = ch.table().forward_entry(i, i).clone();
            DensityOperator::new(HermitianMatrix::new(entry)?)
        })
        .collect::<Result<Vec<_>>>()?;
    CqChannel::new(outputs)
}
