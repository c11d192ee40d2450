//! `nucsim`: parse, fuse and simulate projection circuits, build them from
//! Hamiltonians, and evaluate the dense reference filters.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nucsim_core::circuit::{emit_qasm, parse_qasm, Circuit, CircuitError, EmitOptions, QasmError};
use nucsim_core::engine::{run, EngineError, RunMode, RunOptions, RunReport};
use nucsim_core::fusion::{fuse_pipeline, FusionStats};
use nucsim_core::hamiltonian::{
    ground_state, load_hamiltonian, shift_rescale, GroundState, HamiltonianError, PauliHamiltonian,
};
use nucsim_core::lcu::{self, LcuError, DEFAULT_TAIL_TOL};
use nucsim_core::projection::{build_filter_circuit, default_schedule, FilterSchedule, ProjectionError, TrialState};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "nucsim", version, about = "State-vector simulator for measurement-assisted projection circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a QASM circuit and write a JSON report.
    Simulate(SimulateArgs),
    /// Run the fusion pipeline and report per-pass gate counts.
    Fuse(FuseArgs),
    /// Build a filter circuit from a Hamiltonian and write it as QASM.
    Prepare(PrepareArgs),
    /// Diagonalize a Hamiltonian and report its spectrum.
    Spectrum(SpectrumArgs),
    /// Evaluate the cos^2m filter and its LCU expansion densely.
    FilterLcu(FilterLcuArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Mma,
    Rejection,
}

impl From<ModeArg> for RunMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Mma => RunMode::Mma,
            ModeArg::Rejection => RunMode::Rejection,
        }
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// OpenQASM 2.0 circuit.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "mma")]
    mode: ModeArg,
    #[arg(long, default_value_t = 1024)]
    shots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Qubit checked by the assertions; inferred when absent.
    #[arg(long)]
    ancilla: Option<usize>,
    #[arg(long, env = "NUCSIM_THREADS", default_value_t = 1)]
    threads: usize,
    /// Simulate the circuit as written.
    #[arg(long)]
    no_fuse: bool,
    /// Hamiltonian whose expectation is taken before the final measurements.
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FuseArgs {
    #[arg(long)]
    input: PathBuf,
    /// Statistics path; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the fused circuit here, with fused gates decomposed into the standard gate set.
    #[arg(long)]
    decompose: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PrepareArgs {
    /// Pauli-string or second-quantized Hamiltonian.
    #[arg(long)]
    hamiltonian: PathBuf,
    /// Schedule JSON `{"steps":[{"t":..,"delta":..}]}`; overrides --gap and --steps.
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Gap for the default schedule; computed by diagonalization when absent.
    #[arg(long)]
    gap: Option<f64>,
    /// Number of filtering steps in the default schedule.
    #[arg(long, default_value_t = 4)]
    steps: usize,
    /// Trotter slices per filtering step.
    #[arg(long, default_value_t = 1)]
    trotter: usize,
    /// Energy subtracted from H; the ground energy when absent.
    #[arg(long, allow_hyphen_values = true)]
    shift: Option<f64>,
    /// Basis trial state, qubit 0 first; the basis state with the largest
    /// ground-state overlap when absent.
    #[arg(long)]
    trial: Option<String>,
    /// QASM path; stdout when absent, with the statistics on stderr.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[arg(long)]
    hamiltonian: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FilterLcuArgs {
    #[arg(long)]
    hamiltonian: PathBuf,
    /// Half-power of the cos^2m filter.
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = DEFAULT_TAIL_TOL)]
    tail_tol: f64,
    /// Energy mapped to zero; the ground energy when absent.
    #[arg(long, allow_hyphen_values = true)]
    shift: Option<f64>,
    /// Divisor applied after the shift; by default just above the spectral
    /// width, so the shifted spectrum lies in [0, 1).
    #[arg(long)]
    scale: Option<f64>,
    /// Basis trial state, qubit 0 first; the basis state with the largest
    /// ground-state overlap when absent.
    #[arg(long)]
    trial: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Qasm(#[from] QasmError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Lcu(#[from] LcuError),
}

impl CliError {
    /// 0 success, 2 parse or configuration error, 3 assertion failure,
    /// 4 resource guard.
    fn exit_code(&self) -> u8 {
        use EngineError as E;
        match self {
            Self::Engine(E::AssertionFailed { .. } | E::ProjectionImpossible { .. }) => 3,
            Self::Engine(E::TooManyQubits { .. })
            | Self::Hamiltonian(HamiltonianError::TooLarge { .. })
            | Self::Projection(ProjectionError::TooLarge { .. } | ProjectionError::Hamiltonian(HamiltonianError::TooLarge { .. }))
            | Self::Lcu(LcuError::TooLarge { .. } | LcuError::Hamiltonian(HamiltonianError::TooLarge { .. })) => 4,
            _ => 2,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io { path: p.to_owned(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    write_out(path, &text)
}

fn load_circuit(path: &Path) -> Result<Circuit, CliError> {
    Ok(parse_qasm(&read(path)?)?)
}

fn load_ham(path: &Path) -> Result<PauliHamiltonian, CliError> {
    Ok(load_hamiltonian(&read(path)?)?)
}

/// The run report plus circuit-level facts.
#[derive(Debug, Serialize)]
struct SimulateOutput {
    #[serde(flatten)]
    report: RunReport,
    n_qubits: usize,
    gates_before: usize,
    gates_after: usize,
    /// Ancilla index as used, and under reversed qubit labels.
    ancilla_index: Option<usize>,
    ancilla_index_reversed: Option<usize>,
}

fn cmd_simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let circuit = load_circuit(&a.input)?;
    let hamiltonian = a.hamiltonian.as_deref().map(load_ham).transpose()?;
    let n = circuit.n_qubits();
    let gates_before = circuit.gate_count();
    let (to_run, stats) = if a.no_fuse {
        (circuit, None)
    } else {
        let (fused, stats) = fuse_pipeline(&circuit);
        (fused, Some(stats))
    };
    let opts = RunOptions {
        mode: a.mode.into(),
        shots: a.shots,
        seed: a.seed,
        ancilla: a.ancilla,
        threads: a.threads,
        hamiltonian,
        initial_state: None,
    };
    let mut report = run(&to_run, &opts)?;
    let ancilla = a.ancilla.or_else(|| first_mid_measure(&to_run));
    let gates_after = to_run.gate_count();
    report.fusion_stats = stats;
    report.wall_time_s = start.elapsed().as_secs_f64();
    let out = SimulateOutput {
        report,
        n_qubits: n,
        gates_before,
        gates_after,
        ancilla_index: ancilla,
        ancilla_index_reversed: ancilla.map(|q| n - 1 - q),
    };
    write_json(a.output.as_deref(), &out)
}

/// Qubit of the first measurement followed later by a gate or reset.
fn first_mid_measure(c: &Circuit) -> Option<usize> {
    use nucsim_core::circuit::Instruction;
    let insts = c.instructions();
    let final_start = insts
        .iter()
        .rposition(|i| !matches!(i, Instruction::Measure { .. } | Instruction::Barrier { .. }))
        .map_or(0, |k| k + 1);
    insts[..final_start].iter().find_map(|i| match i {
        Instruction::Measure { qubit, .. } => Some(*qubit),
        _ => None,
    })
}

#[derive(Debug, Serialize)]
struct FuseOutput {
    #[serde(flatten)]
    stats: FusionStats,
    two_qubit_gates_before: usize,
    two_qubit_gates_after: usize,
}

fn cmd_fuse(a: &FuseArgs) -> Result<(), CliError> {
    let circuit = load_circuit(&a.input)?;
    let (fused, stats) = fuse_pipeline(&circuit);
    if let Some(path) = &a.decompose {
        let text = emit_qasm(&fused, EmitOptions { decompose: true })?;
        write_out(Some(path), &text)?;
    }
    let out = FuseOutput {
        stats,
        two_qubit_gates_before: circuit.two_qubit_gate_count(),
        two_qubit_gates_after: fused.two_qubit_gate_count(),
    };
    write_json(a.output.as_deref(), &out)
}

/// Basis state with the largest overlap with the ground vector.
fn dominant_basis_state(g: &GroundState) -> TrialState {
    let best = g
        .vector
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()).then(b.0.cmp(&a.0)))
        .map_or(0, |(k, _)| k);
    TrialState::Basis(best)
}

#[derive(Debug, Serialize)]
struct PrepareOutput {
    n_qubits: usize,
    gates: usize,
    two_qubit_gates: usize,
    filtering_steps: usize,
    trotter_steps: usize,
    shift: f64,
    schedule: FilterSchedule,
    trial_basis_index: usize,
    ancilla_index: usize,
    ancilla_index_reversed: usize,
}

fn cmd_prepare(a: &PrepareArgs) -> Result<(), CliError> {
    let h = load_ham(&a.hamiltonian)?;
    let n = h.n_qubits();
    let needs_spectrum = a.shift.is_none() || a.trial.is_none() || (a.schedule.is_none() && a.gap.is_none());
    let ground = if needs_spectrum { Some(ground_state(&h)?) } else { None };
    let shift = a.shift.or(ground.as_ref().map(|g| g.energy)).unwrap_or(0.0);
    let schedule = match &a.schedule {
        Some(path) => FilterSchedule::from_json(&read(path)?)?,
        None => {
            let gap = a.gap.or(ground.as_ref().map(|g| g.gap)).expect("gap computed when absent");
            default_schedule(gap, a.steps)?
        }
    };
    let trial = match (&a.trial, &ground) {
        (Some(bits), _) => {
            if bits.len() != n {
                return Err(CliError::Config(format!("trial has {} bits for {n} qubits", bits.len())));
            }
            TrialState::from_bits(bits)?
        }
        (None, Some(g)) => dominant_basis_state(g),
        (None, None) => unreachable!("spectrum computed when trial is absent"),
    };
    let shifted = shift_rescale(&h, shift, 1.0)?;
    let circuit = build_filter_circuit(&shifted, &schedule, a.trotter, &trial)?;
    let text = emit_qasm(&circuit, EmitOptions::default())?;
    let TrialState::Basis(trial_basis_index) = trial else { unreachable!("basis trial") };
    let stats = PrepareOutput {
        n_qubits: circuit.n_qubits(),
        gates: circuit.gate_count(),
        two_qubit_gates: circuit.two_qubit_gate_count(),
        filtering_steps: schedule.len(),
        trotter_steps: a.trotter,
        shift,
        schedule,
        trial_basis_index,
        ancilla_index: n,
        ancilla_index_reversed: 0,
    };
    match &a.output {
        Some(path) => {
            write_out(Some(path), &text)?;
            write_json(None, &stats)
        }
        None => {
            write_out(None, &text)?;
            eprintln!("{}", serde_json::to_string_pretty(&stats).expect("stats serialize"));
            Ok(())
        }
    }
}

#[derive(Debug, Serialize)]
struct SpectrumOutput {
    n_qubits: usize,
    e0: f64,
    gap: f64,
    eigenvalues: Vec<f64>,
}

fn cmd_spectrum(a: &SpectrumArgs) -> Result<(), CliError> {
    let h = load_ham(&a.hamiltonian)?;
    let g = ground_state(&h)?;
    let out = SpectrumOutput {
        n_qubits: h.n_qubits(),
        e0: g.energy,
        gap: g.gap,
        eigenvalues: g.spectrum,
    };
    write_json(a.output.as_deref(), &out)
}

#[derive(Debug, Serialize)]
struct FilterLcuOutput {
    m: usize,
    m0: usize,
    tail_mass: f64,
    /// `α_k` for `k = −m0..=m0`.
    coefficients: Vec<f64>,
    shift: f64,
    scale: f64,
    #[serde(rename = "P_s")]
    p_s: f64,
    /// `⟨H⟩` of the normalized truncated-LCU output, in the input units.
    energy_after_filter: f64,
    /// `⟨H⟩` of the exact `cos^2m` output, in the input units.
    energy_exact_filter: f64,
    e0: f64,
}

fn cmd_filter_lcu(a: &FilterLcuArgs) -> Result<(), CliError> {
    let h = load_ham(&a.hamiltonian)?;
    let n = h.n_qubits();
    let g = ground_state(&h)?;
    let shift = a.shift.unwrap_or(g.energy);
    let width = g.spectrum.last().copied().unwrap_or(g.energy) - shift;
    let scale = a.scale.unwrap_or_else(|| width.max(f64::MIN_POSITIVE) * (1.0 + 1e-6));
    let h_prime = shift_rescale(&h, shift, scale)?;
    let trial = match &a.trial {
        Some(bits) => {
            if bits.len() != n {
                return Err(CliError::Config(format!("trial has {} bits for {n} qubits", bits.len())));
            }
            TrialState::from_bits(bits)?
        }
        None => dominant_basis_state(&g),
    };
    let psi = trial.amplitudes(n)?;
    let expansion = lcu::lcu_coefficients(a.m, a.tail_tol)?;
    let filtered = lcu::lcu_reference(&h_prime, &expansion, &psi)?;
    let p_s = lcu::lcu_success_probability(&h_prime, &expansion, &psi)?;
    let exact = lcu::apply_cos_filter(&h_prime, a.m, &psi)?;
    let out = FilterLcuOutput {
        m: expansion.m,
        m0: expansion.m0,
        tail_mass: expansion.tail_mass,
        coefficients: expansion.coeffs.clone(),
        shift,
        scale,
        p_s,
        energy_after_filter: lcu::energy(&h, &filtered),
        energy_exact_filter: lcu::energy(&h, &exact),
        e0: g.energy,
    };
    write_json(a.output.as_deref(), &out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fuse(a) => cmd_fuse(a),
        Command::Prepare(a) => cmd_prepare(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::FilterLcu(a) => cmd_filter_lcu(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
