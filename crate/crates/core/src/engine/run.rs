//! Whole-circuit execution in measurement-assertion and rejection modes.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use super::state::StateVector;
use super::EngineError;
use crate::circuit::{Circuit, Instruction};
use crate::fusion::FusionStats;
use crate::hamiltonian::PauliHamiltonian;
use crate::linalg::{swap_roles, tree_sum};

/// Maximum deviation of a supplied initial state's norm from 1.
const INITIAL_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    /// Every mid-circuit measurement on the ancilla is forced to `|0⟩` and
    /// its probability recorded; the circuit runs once.
    Mma,
    /// Each shot runs the circuit end to end with random mid-circuit outcomes
    /// and is discarded if any of them is 1.
    Rejection,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub mode: RunMode,
    pub shots: usize,
    /// Seeds the single xoshiro256++ stream used for every random draw.
    pub seed: u64,
    /// Qubit checked by the assertions; inferred from the first mid-circuit
    /// measurement when absent.
    pub ancilla: Option<usize>,
    pub threads: usize,
    /// Evaluated on the state just before the final measurements.
    pub hamiltonian: Option<PauliHamiltonian>,
    /// Replaces `|0…0⟩` as the starting state.
    pub initial_state: Option<Vec<Complex64>>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            mode: RunMode::Mma,
            shots: 1024,
            seed: 0,
            ancilla: None,
            threads: 1,
            hamiltonian: None,
            initial_state: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: RunMode,
    /// `P(ancilla = 0)` at each mid-circuit measurement (assertion mode only).
    pub assert_probs: Vec<f64>,
    /// Product of `assert_probs` in recorded order, or accepted/shots.
    pub overall_success: f64,
    /// Final-measurement bitstrings, highest classical bit first.
    pub samples: BTreeMap<String, u64>,
    pub energy: Option<f64>,
    pub fusion_stats: Option<FusionStats>,
    pub wall_time_s: f64,
    pub shots: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub accepted: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rejected: Option<u64>,
    /// Shots rejected at each mid-circuit measurement (first failure only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rejections_per_measure: Option<Vec<u64>>,
}

/// Left-to-right product, the multiplication order used for `overall_success`.
pub fn success_product(probs: &[f64]) -> f64 {
    probs.iter().fold(1.0, |acc, p| acc * p)
}

/// Where the final measurements start and which bits they write. Gates are
/// dispatched straight from the instruction list, so memory stays
/// independent of circuit length.
struct Program<'c> {
    n_qubits: usize,
    ins: &'c [Instruction],
    /// Instructions before this index run before the final measurements.
    final_from: usize,
    /// `(clbit, qubit)` for each bit written by the final segment, highest clbit first.
    final_bits: Vec<(usize, usize)>,
    mid_measures: usize,
}

impl<'c> Program<'c> {
    fn new(circuit: &'c Circuit) -> Self {
        let ins = circuit.instructions();
        let final_from = ins
            .iter()
            .rposition(|i| !matches!(i, Instruction::Measure { .. } | Instruction::Barrier { .. }))
            .map_or(0, |k| k + 1);
        let mid_measures = ins[..final_from].iter().filter(|i| matches!(i, Instruction::Measure { .. })).count();
        let mut last_writer: BTreeMap<usize, usize> = BTreeMap::new();
        for inst in &ins[final_from..] {
            if let Instruction::Measure { qubit, clbit } = inst {
                last_writer.insert(*clbit, *qubit);
            }
        }
        Self {
            n_qubits: circuit.n_qubits(),
            ins,
            final_from,
            final_bits: last_writer.into_iter().rev().collect(),
            mid_measures,
        }
    }

    fn body(&self) -> &'c [Instruction] {
        &self.ins[..self.final_from]
    }

    fn sample_key(&self, index: usize) -> String {
        self.final_bits
            .iter()
            .map(|&(_, q)| if (index >> q) & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Final-measurement histogram of `shots` draws from `state`.
    fn histogram<R: rand::Rng>(&self, state: &StateVector, shots: usize, rng: &mut R) -> BTreeMap<String, u64> {
        let mut samples = BTreeMap::new();
        if self.final_bits.is_empty() {
            return samples;
        }
        let draws = state.sample_indices(shots, rng);
        for run in draws.chunk_by(|a, b| a == b) {
            *samples.entry(self.sample_key(run[0])).or_insert(0) += run.len() as u64;
        }
        samples
    }
}

/// Checks that every mid-circuit measurement targets the ancilla and is
/// followed, after any barriers, by a reset of it. Returns the ancilla.
fn check_mma_structure(circuit: &Circuit, ancilla: Option<usize>) -> Result<Option<usize>, EngineError> {
    let ins = circuit.instructions();
    let final_from = ins
        .iter()
        .rposition(|i| !matches!(i, Instruction::Measure { .. } | Instruction::Barrier { .. }))
        .map_or(0, |k| k + 1);
    let mut ancilla = ancilla;
    if let Some(a) = ancilla {
        if a >= circuit.n_qubits() {
            return Err(EngineError::QubitOutOfRange { qubit: a, n_qubits: circuit.n_qubits() });
        }
    }
    for (k, inst) in ins[..final_from].iter().enumerate() {
        let Instruction::Measure { qubit, .. } = inst else { continue };
        let a = *ancilla.get_or_insert(*qubit);
        if *qubit != a {
            return Err(EngineError::MmaStructure(format!(
                "instruction {k}: mid-circuit measurement of qubit {qubit}, ancilla is {a}"
            )));
        }
        let next = ins[k + 1..].iter().find(|i| !matches!(i, Instruction::Barrier { .. }));
        if !matches!(next, Some(Instruction::Reset { qubit }) if *qubit == a) {
            return Err(EngineError::MmaStructure(format!(
                "instruction {k}: measurement of the ancilla is not followed by its reset"
            )));
        }
    }
    Ok(ancilla)
}

fn initial_state(n: usize, opts: &RunOptions) -> Result<StateVector, EngineError> {
    match &opts.initial_state {
        None => StateVector::new(n),
        Some(v) => {
            if v.len() != 1usize << n {
                return Err(EngineError::InvalidState(format!(
                    "initial state has {} amplitudes, circuit needs {}",
                    v.len(),
                    1usize << n
                )));
            }
            let s = StateVector::from_amplitudes(v.clone())?;
            let dev = (s.norm_sqr() - 1.0).abs();
            if dev > INITIAL_NORM_TOL {
                return Err(EngineError::InvalidState(format!("initial state norm² deviates by {dev:e}")));
            }
            Ok(s)
        }
    }
}

/// Applies a gate instruction; returns `false` for anything else.
fn apply_gate(state: &mut StateVector, inst: &Instruction) -> Result<bool, EngineError> {
    let Instruction::Gate { kind, qubits } = inst else { return Ok(false) };
    match qubits[..] {
        [q] => state.apply_1q(&kind.matrix_1q().expect("1-qubit gate"), q)?,
        [a, b] => {
            let m = kind.matrix_2q().expect("2-qubit gate");
            if a < b {
                state.apply_2q(&m, a, b)?
            } else {
                state.apply_2q(&swap_roles(&m), b, a)?
            }
        }
        _ => state.apply_multi(&kind.matrix(), qubits)?,
    }
    Ok(true)
}

fn energy_of(state: &StateVector, h: Option<&PauliHamiltonian>) -> Result<Option<f64>, EngineError> {
    h.map(|h| state.expectation_pauli(h)).transpose()
}

/// Executes a circuit and reports assertion probabilities, samples and energy.
pub fn run(circuit: &Circuit, opts: &RunOptions) -> Result<RunReport, EngineError> {
    run_with_state(circuit, opts).map(|(r, _)| r)
}

/// As [`run`], also returning the state before the final measurements (for
/// rejection mode, that of the last accepted shot, or of the last shot when
/// none was accepted).
pub fn run_with_state(circuit: &Circuit, opts: &RunOptions) -> Result<(RunReport, StateVector), EngineError> {
    if opts.threads == 0 {
        return Err(EngineError::Config("thread count must be at least 1".into()));
    }
    if opts.shots == 0 {
        return Err(EngineError::Config("shot count must be at least 1".into()));
    }
    if circuit.n_qubits() > super::state::MAX_QUBITS {
        return Err(EngineError::TooManyQubits { n_qubits: circuit.n_qubits(), max: super::state::MAX_QUBITS });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| EngineError::Config(e.to_string()))?;
    pool.install(|| match opts.mode {
        RunMode::Mma => run_mma(circuit, opts),
        RunMode::Rejection => run_rejection(circuit, opts),
    })
}

fn run_mma(circuit: &Circuit, opts: &RunOptions) -> Result<(RunReport, StateVector), EngineError> {
    let start = Instant::now();
    let ancilla = check_mma_structure(circuit, opts.ancilla)?;
    let prog = Program::new(circuit);
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(opts.seed);
    let mut state = initial_state(prog.n_qubits, opts)?;
    let mut probs = Vec::with_capacity(prog.mid_measures);
    for inst in prog.body() {
        if apply_gate(&mut state, inst)? {
            continue;
        }
        match inst {
            Instruction::Measure { qubit, .. } => {
                debug_assert_eq!(Some(*qubit), ancilla);
                let step = probs.len();
                let p0 = state.assert_measure(*qubit).map_err(|e| match e {
                    EngineError::ProjectionImpossible { qubit, probability, .. } => {
                        EngineError::AssertionFailed { step, qubit, probability }
                    }
                    other => other,
                })?;
                probs.push(p0);
            }
            Instruction::Reset { qubit } => state.reset(*qubit, &mut rng)?,
            _ => {}
        }
    }
    let energy = energy_of(&state, opts.hamiltonian.as_ref())?;
    let samples = prog.histogram(&state, opts.shots, &mut rng);
    let report = RunReport {
        mode: RunMode::Mma,
        overall_success: success_product(&probs),
        assert_probs: probs,
        samples,
        energy,
        fusion_stats: None,
        wall_time_s: start.elapsed().as_secs_f64(),
        shots: opts.shots as u64,
        accepted: None,
        rejected: None,
        rejections_per_measure: None,
    };
    Ok((report, state))
}

fn run_rejection(circuit: &Circuit, opts: &RunOptions) -> Result<(RunReport, StateVector), EngineError> {
    let start = Instant::now();
    let prog = Program::new(circuit);
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(opts.seed);
    let initial = initial_state(prog.n_qubits, opts)?;
    let mut rejections = vec![0u64; prog.mid_measures];
    let mut samples = BTreeMap::new();
    let mut energies = Vec::new();
    let mut accepted = 0u64;
    let mut kept: Option<StateVector> = None;
    let mut last = initial.clone();
    for _ in 0..opts.shots {
        let mut state = initial.clone();
        let mut failed = None;
        let mut ordinal = 0;
        for inst in prog.body() {
            if apply_gate(&mut state, inst)? {
                continue;
            }
            match inst {
                Instruction::Measure { qubit, .. } => {
                    if state.measure(*qubit, &mut rng)? == 1 {
                        failed = Some(ordinal);
                        break;
                    }
                    ordinal += 1;
                }
                Instruction::Reset { qubit } => state.reset(*qubit, &mut rng)?,
                _ => {}
            }
        }
        match failed {
            Some(k) => {
                rejections[k] += 1;
                last = state;
            }
            None => {
                accepted += 1;
                if let Some(e) = energy_of(&state, opts.hamiltonian.as_ref())? {
                    energies.push(e);
                }
                for (key, count) in prog.histogram(&state, 1, &mut rng) {
                    *samples.entry(key).or_insert(0) += count;
                }
                kept = Some(state);
            }
        }
    }
    let energy = (!energies.is_empty()).then(|| tree_sum(&energies) / energies.len() as f64);
    let shots = opts.shots as u64;
    let report = RunReport {
        mode: RunMode::Rejection,
        assert_probs: Vec::new(),
        overall_success: accepted as f64 / shots as f64,
        samples,
        energy,
        fusion_stats: None,
        wall_time_s: start.elapsed().as_secs_f64(),
        shots,
        accepted: Some(accepted),
        rejected: Some(shots - accepted),
        rejections_per_measure: Some(rejections),
    };
    Ok((report, kept.unwrap_or(last)))
}
