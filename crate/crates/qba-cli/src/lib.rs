//! Command-line runner: parse channel files, run the selected capacity
//! solver, emit a flat key-value summary on stdout and an optional
//! per-iteration CSV trace.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use qba::Complex;
use serde::Deserialize;

use qba::channel::{classical_channel, CqChannel, KrausChannel};
use qba::engine::{
    a_priori_iterations, solve, IterationTrace, ObjectiveSpec, SolverConfig, SolverMode,
    TerminationReason,
};
use qba::linalg::{ComplexMatrix, HermitianMatrix};
use qba::objectives::{
    coherent_info_objective, holevo_objective, less_noisy_check, mutual_info_objective,
    thermo_objective,
};
use qba::oracles::classical_ba_solve;
use qba::state::{DensityOperator, GibbsSpec};

const LN2: f64 = std::f64::consts::LN_2;
const MAX_ITERS_CAP: u64 = 10_000_000;
const LESS_NOISY_SAMPLES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Holevo,
    Thermo,
    Coherent,
    Mutual,
    EntropyGain,
    CbMin,
    Classical,
}

impl Task {
    pub fn label(self) -> &'static str {
        match self {
            Task::Holevo => "holevo",
            Task::Thermo => "thermo",
            Task::Coherent => "coherent",
            Task::Mutual => "mutual",
            Task::EntropyGain => "entropy-gain",
            Task::CbMin => "cb-min",
            Task::Classical => "classical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Standard,
    Adaptive,
    FixedGamma(f64),
}

impl Mode {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "standard" => Ok(Mode::Standard),
            "adaptive" => Ok(Mode::Adaptive),
            other => {
                if let Some(value) = other.strip_prefix("fixed-gamma=") {
                    let gamma: f64 = value
                        .parse()
                        .with_context(|| format!("invalid gamma value {value:?}"))?;
                    if gamma <= 0.0 {
                        bail!("fixed-gamma must be positive, got {gamma}");
                    }
                    Ok(Mode::FixedGamma(gamma))
                } else {
                    bail!("mode must be standard, adaptive, or fixed-gamma=<value>, got {other:?}")
                }
            }
        }
    }

    fn label(self) -> String {
        match self {
            Mode::Standard => "standard".into(),
            Mode::Adaptive => "adaptive".into(),
            Mode::FixedGamma(g) => format!("fixed-gamma={g}"),
        }
    }

    fn solver_mode(self) -> SolverMode<f64> {
        match self {
            Mode::Standard => SolverMode::Standard,
            Mode::Adaptive => SolverMode::Adaptive,
            Mode::FixedGamma(g) => SolverMode::FixedGamma(g),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogBase {
    Nats,
    Bits,
}

impl LogBase {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "nats" => Ok(LogBase::Nats),
            "bits" => Ok(LogBase::Bits),
            other => bail!("log base must be nats or bits, got {other:?}"),
        }
    }
}

/// Everything one invocation needs.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub task: Task,
    pub channel_path: PathBuf,
    pub epsilon: f64,
    pub max_iters: Option<u64>,
    pub mode: Mode,
    pub log_base: LogBase,
    pub trace_path: Option<PathBuf>,
    pub seed: u64,
    pub gibbs_path: Option<PathBuf>,
}

// ---------------------------------------------------------------- file formats

type EntryData = [f64; 2];
type MatrixData = Vec<Vec<EntryData>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    kraus: Option<KrausSection>,
    cq: Option<CqSection>,
    stochastic: Option<Vec<Vec<f64>>>,
    gibbs: Option<GibbsSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KrausSection {
    dim_in: usize,
    dim_out: usize,
    operators: Vec<MatrixData>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CqSection {
    outputs: Vec<MatrixData>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GibbsSection {
    gamma_a: Option<MatrixData>,
    gamma_b: Option<MatrixData>,
    hamiltonian_a: Option<MatrixData>,
    hamiltonian_b: Option<MatrixData>,
    beta: Option<f64>,
}

/// Channel parsed from disk, with validated invariants.
#[derive(Debug, Clone)]
pub enum ParsedChannel {
    Kraus(Box<KrausChannel<f64>>, Option<GibbsSpec<f64>>),
    Cq(CqChannel<f64>),
    Stochastic(Vec<Vec<f64>>),
}

fn matrix_from_data(data: &MatrixData, what: &str) -> Result<ComplexMatrix<f64>> {
    let rows = data
        .iter()
        .map(|row| row.iter().map(|&[re, im]| Complex::new(re, im)).collect())
        .collect();
    ComplexMatrix::from_rows(rows).with_context(|| format!("malformed matrix in {what}"))
}

fn hermitian_from_data(data: &MatrixData, what: &str) -> Result<HermitianMatrix<f64>> {
    HermitianMatrix::new(matrix_from_data(data, what)?)
        .with_context(|| format!("{what} is not a valid Hermitian matrix"))
}

fn gibbs_from_section(section: &GibbsSection) -> Result<GibbsSpec<f64>> {
    match section {
        GibbsSection {
            gamma_a: Some(a),
            gamma_b: Some(b),
            hamiltonian_a: None,
            hamiltonian_b: None,
            beta: None,
        } => GibbsSpec::new(
            hermitian_from_data(a, "gibbs.gamma_a")?,
            hermitian_from_data(b, "gibbs.gamma_b")?,
        )
        .map_err(|e| anyhow!("gibbs operators rejected: {e}")),
        GibbsSection {
            gamma_a: None,
            gamma_b: None,
            hamiltonian_a: Some(ha),
            hamiltonian_b: Some(hb),
            beta: Some(beta),
        } => GibbsSpec::from_hamiltonians(
            &hermitian_from_data(ha, "gibbs.hamiltonian_a")?,
            &hermitian_from_data(hb, "gibbs.hamiltonian_b")?,
            *beta,
        )
        .map_err(|e| anyhow!("gibbs hamiltonians rejected: {e}")),
        _ => bail!(
            "gibbs section needs either gamma_a + gamma_b, or hamiltonian_a + hamiltonian_b + beta"
        ),
    }
}

/// Parse and validate a channel file. Structural invariants (Kraus
/// completeness, density-operator normalization, stochasticity) are checked
/// on load and rejected with the violated invariant and its residual.
pub fn parse_channel_file(path: &Path) -> Result<ParsedChannel> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read channel file {}", path.display()))?;
    let file: ChannelFile = serde_json::from_str(&text)
        .with_context(|| format!("cannot parse channel file {}", path.display()))?;

    let sections = usize::from(file.kraus.is_some())
        + usize::from(file.cq.is_some())
        + usize::from(file.stochastic.is_some());
    if sections != 1 {
        bail!("channel file must contain exactly one of: kraus, cq, stochastic");
    }

    let gibbs = file.gibbs.as_ref().map(gibbs_from_section).transpose()?;

    if let Some(kraus) = &file.kraus {
        let mut ops = Vec::with_capacity(kraus.operators.len());
        for (k, data) in kraus.operators.iter().enumerate() {
            let m = matrix_from_data(data, &format!("kraus operator {k}"))?;
            if m.rows() != kraus.dim_out || m.cols() != kraus.dim_in {
                bail!(
                    "kraus operator {k} is {}x{}, declared dims are {}x{}",
                    m.rows(),
                    m.cols(),
                    kraus.dim_out,
                    kraus.dim_in
                );
            }
            ops.push(m);
        }
        let channel = KrausChannel::new(ops).map_err(|e| anyhow!("kraus section rejected: {e}"))?;
        return Ok(ParsedChannel::Kraus(Box::new(channel), gibbs));
    }
    if let Some(cq) = &file.cq {
        let mut outputs = Vec::with_capacity(cq.outputs.len());
        for (i, data) in cq.outputs.iter().enumerate() {
            let h = hermitian_from_data(data, &format!("cq output {i}"))?;
            outputs
                .push(DensityOperator::new(h).map_err(|e| anyhow!("cq output {i} rejected: {e}"))?);
        }
        let channel = CqChannel::new(outputs).map_err(|e| anyhow!("cq section rejected: {e}"))?;
        return Ok(ParsedChannel::Cq(channel));
    }
    let q = file.stochastic.expect("exactly one section present");
    // Validate by constructing the embedded channel.
    classical_channel(&q).map_err(|e| anyhow!("stochastic section rejected: {e}"))?;
    Ok(ParsedChannel::Stochastic(q))
}

// ---------------------------------------------------------------- execution

/// Completed run ready for reporting.
pub struct RunOutcome {
    pub summary: String,
    pub exit_code: i32,
}

struct SolveReport {
    capacity_nats: f64,
    iterations: u64,
    terminated_by: TerminationReason,
    posterior_gap: f64,
    gamma_final: f64,
    trace: IterationTrace<f64>,
    extra: Vec<(String, String)>,
}

fn eig_tol_from_env() -> Result<f64> {
    match std::env::var("QBA_EIG_TOL") {
        Ok(text) => {
            let v: f64 = text
                .parse()
                .with_context(|| format!("QBA_EIG_TOL must be a float, got {text:?}"))?;
            if v <= 0.0 {
                bail!("QBA_EIG_TOL must be positive, got {v}");
            }
            Ok(v)
        }
        Err(_) => Ok(1e-12),
    }
}

fn twelve_digits(x: f64) -> String {
    format!("{x:.11e}")
}

/// Run the manifest end to end: returns the summary text and exit code
/// (0 = gap-certified, 2 = budget exhausted). Hard errors surface as `Err`
/// and map to exit code 1.
pub fn run(manifest: &RunManifest) -> Result<RunOutcome> {
    if manifest.epsilon <= 0.0 {
        bail!("epsilon must be positive, got {}", manifest.epsilon);
    }
    let started = Instant::now();
    let parsed = parse_channel_file(&manifest.channel_path)?;

    let report = match manifest.task {
        Task::Classical => run_classical(manifest, &parsed)?,
        Task::Holevo => {
            let cq = match &parsed {
                ParsedChannel::Cq(cq) => cq.clone(),
                _ => bail!("holevo needs a cq channel file"),
            };
            let spec = holevo_objective(&cq)?;
            run_quantum(manifest, &spec, Vec::new())?
        }
        Task::Thermo => {
            let (ch, embedded) = expect_kraus(&parsed, "thermo")?;
            let gibbs = load_gibbs(manifest, embedded, ch.dim_in(), ch.dim_out())?;
            let spec = thermo_objective(ch, &gibbs)?;
            run_quantum(manifest, &spec, Vec::new())?
        }
        Task::Coherent => {
            let (ch, _) = expect_kraus(&parsed, "coherent")?;
            let (certified, worst) = less_noisy_check(ch, LESS_NOISY_SAMPLES, manifest.seed)?;
            let extra = vec![
                (
                    "less_noisy".into(),
                    if certified {
                        "pass".into()
                    } else {
                        "fail".into()
                    },
                ),
                ("less_noisy_worst_margin".into(), twelve_digits(worst)),
                (
                    "certified".into(),
                    if certified {
                        "true".into()
                    } else {
                        "false".into()
                    },
                ),
            ];
            let spec = coherent_info_objective(ch)?;
            run_quantum(manifest, &spec, extra)?
        }
        Task::Mutual => {
            let (ch, _) = expect_kraus(&parsed, "mutual")?;
            let spec = mutual_info_objective(ch)?;
            run_quantum(manifest, &spec, Vec::new())?
        }
        Task::EntropyGain => {
            let (ch, _) = expect_kraus(&parsed, "entropy-gain")?;
            let spec = thermo_objective(ch, &GibbsSpec::trivial(ch.dim_in(), ch.dim_out()))?;
            let mut report = run_quantum(manifest, &spec, Vec::new())?;
            report.capacity_nats = -report.capacity_nats;
            report.extra.push((
                "derived_from".into(),
                "negated trivial-reference thermo".into(),
            ));
            report
        }
        Task::CbMin => {
            let (ch, _) = expect_kraus(&parsed, "cb-min")?;
            let comp = ch.complementary()?;
            let spec = thermo_objective(&comp, &GibbsSpec::trivial(comp.dim_in(), comp.dim_out()))?;
            let mut report = run_quantum(manifest, &spec, Vec::new())?;
            report.capacity_nats = -report.capacity_nats;
            report.extra.push((
                "derived_from".into(),
                "negated thermo of the complementary channel".into(),
            ));
            report
        }
    };

    if let Some(trace_path) = &manifest.trace_path {
        write_trace_csv(trace_path, &report.trace)
            .with_context(|| format!("cannot write trace to {}", trace_path.display()))?;
    }

    let (capacity_display, unit) = match manifest.log_base {
        LogBase::Nats => (report.capacity_nats, "nats"),
        LogBase::Bits => (report.capacity_nats / LN2, "bits"),
    };
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;

    let mut summary = String::new();
    let mut field = |key: &str, value: String| {
        let _ = writeln!(summary, "{key} = {value}");
    };
    field("subcommand", manifest.task.label().into());
    field("channel", manifest.channel_path.display().to_string());
    field("mode", manifest.mode.label());
    field("epsilon", format!("{:e}", manifest.epsilon));
    field("capacity", twelve_digits(capacity_display));
    field("unit", unit.into());
    field("iterations", report.iterations.to_string());
    field(
        "terminated_by",
        match report.terminated_by {
            TerminationReason::PosteriorGap => "posterior_gap".into(),
            TerminationReason::IterationBudget => "iteration_budget".into(),
        },
    );
    field("posterior_gap", twelve_digits(report.posterior_gap));
    field("gamma_final", twelve_digits(report.gamma_final));
    for (key, value) in &report.extra {
        field(key, value.clone());
    }
    field("wall_time_ms", format!("{wall_ms:.3}"));

    let exit_code = match report.terminated_by {
        TerminationReason::PosteriorGap => 0,
        TerminationReason::IterationBudget => 2,
    };
    Ok(RunOutcome { summary, exit_code })
}

fn expect_kraus<'a>(
    parsed: &'a ParsedChannel,
    task: &str,
) -> Result<(&'a KrausChannel<f64>, Option<&'a GibbsSpec<f64>>)> {
    match parsed {
        ParsedChannel::Kraus(ch, gibbs) => Ok((ch, gibbs.as_ref())),
        _ => bail!("{task} needs a kraus channel file"),
    }
}

fn load_gibbs(
    manifest: &RunManifest,
    embedded: Option<&GibbsSpec<f64>>,
    dim_in: usize,
    dim_out: usize,
) -> Result<GibbsSpec<f64>> {
    if let Some(path) = &manifest.gibbs_path {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read gibbs file {}", path.display()))?;
        let section: GibbsSection = serde_json::from_str(&text)
            .with_context(|| format!("cannot parse gibbs file {}", path.display()))?;
        return gibbs_from_section(&section);
    }
    if let Some(gibbs) = embedded {
        return Ok(gibbs.clone());
    }
    Ok(GibbsSpec::trivial(dim_in, dim_out))
}

fn solver_config(manifest: &RunManifest, spec_gamma: f64, dim: usize) -> Result<SolverConfig<f64>> {
    let default_budget = a_priori_iterations(spec_gamma, manifest.epsilon, dim)?.min(MAX_ITERS_CAP);
    Ok(SolverConfig {
        epsilon: manifest.epsilon,
        max_iterations: Some(manifest.max_iters.unwrap_or(default_budget)),
        mode: manifest.mode.solver_mode(),
        eig_tol: eig_tol_from_env()?,
        ..SolverConfig::default()
    })
}

fn run_quantum(
    manifest: &RunManifest,
    spec: &ObjectiveSpec<f64>,
    extra: Vec<(String, String)>,
) -> Result<SolveReport> {
    let gamma_budget = match manifest.mode {
        Mode::FixedGamma(g) => g,
        _ => spec.gamma_default(),
    };
    let config = solver_config(manifest, gamma_budget, spec.dim_in())?;
    let result = solve(spec, &config, None)?;
    let gamma_final = result
        .trace
        .last()
        .map_or(spec.gamma_default(), |row| row.gamma);
    Ok(SolveReport {
        capacity_nats: result.capacity,
        iterations: result.iterations_used,
        terminated_by: result.terminated_by,
        posterior_gap: result.posterior_gap_final,
        gamma_final,
        trace: result.trace,
        extra,
    })
}

fn run_classical(manifest: &RunManifest, parsed: &ParsedChannel) -> Result<SolveReport> {
    let q = &match parsed {
        ParsedChannel::Stochastic(q) => q.clone(),
        // A cq file qualifies too when every output state is diagonal; its
        // diagonals are the columns of the stochastic matrix.
        ParsedChannel::Cq(cq) => stochastic_from_diagonal_cq(cq)?,
        _ => bail!("classical needs a stochastic or diagonal cq channel file"),
    };
    let cols = q[0].len();
    let gamma = match manifest.mode {
        Mode::Standard => 1.0,
        Mode::FixedGamma(g) => g,
        Mode::Adaptive => bail!("classical runs support standard or fixed-gamma modes only"),
    };
    let budget = manifest
        .max_iters
        .unwrap_or(a_priori_iterations(gamma, manifest.epsilon, cols)?.min(MAX_ITERS_CAP));
    let result = classical_ba_solve(q, gamma, manifest.epsilon, budget)?;
    let gap = result
        .trace
        .last()
        .map_or(f64::INFINITY, |row| row.posterior_gap);
    Ok(SolveReport {
        capacity_nats: result.capacity,
        iterations: result.iterations_used,
        terminated_by: result.terminated_by,
        posterior_gap: gap,
        gamma_final: gamma,
        trace: result.trace,
        extra: Vec::new(),
    })
}

fn stochastic_from_diagonal_cq(cq: &CqChannel<f64>) -> Result<Vec<Vec<f64>>> {
    let rows = cq.dim_out();
    let cols = cq.dim_in();
    let mut q = vec![vec![0.0; cols]; rows];
    for (x, tau) in cq.outputs().iter().enumerate() {
        let m = tau.matrix().matrix();
        for i in 0..rows {
            for j in 0..rows {
                if i != j && m[(i, j)].norm() > 1e-10 {
                    bail!("classical needs diagonal outputs; output {x} has off-diagonal weight");
                }
            }
            q[i][x] = m[(i, i)].re;
        }
    }
    Ok(q)
}

/// CSV trace with one flushed row per iteration, so interrupted runs keep
/// their partial trace.
fn write_trace_csv(path: &Path, trace: &IterationTrace<f64>) -> Result<()> {
    let file = File::create(path)?;
    let mut out = BufWriter::new(file);
    writeln!(
        out,
        "t,capacity_estimate,posterior_gap,gamma,log_Z,elapsed_ms"
    )?;
    out.flush()?;
    for row in &trace.rows {
        writeln!(
            out,
            "{},{},{},{},{},{:.3}",
            row.t,
            row.capacity_estimate,
            row.posterior_gap,
            row.gamma,
            row.log_z,
            row.elapsed.as_secs_f64() * 1e3
        )?;
        out.flush()?;
    }
    Ok(())
}
