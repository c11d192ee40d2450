//! State-vector execution: kernels, measurement primitives and circuit runs.

mod run;
mod state;

use thiserror::Error;

pub use run::{run, run_with_state, success_product, RunMode, RunOptions, RunReport};
pub use state::{inner_det, StateVector, MAX_QUBITS, PROJECTION_EPS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("qubit {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("two-qubit kernel needs distinct qubits in ascending order, got ({p}, {q})")]
    QubitOrder { p: usize, q: usize },
    #[error("{n_qubits} qubits exceeds the engine limit of {max}")]
    TooManyQubits { n_qubits: usize, max: usize },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("cannot project qubit {qubit} onto {outcome}: probability {probability:e}")]
    ProjectionImpossible { qubit: usize, outcome: u8, probability: f64 },
    #[error("assertion {step} failed: P(qubit {qubit} = 0) = {probability:e}")]
    AssertionFailed { step: usize, qubit: usize, probability: f64 },
    #[error("circuit does not fit assertion mode: {0}")]
    MmaStructure(String),
    #[error("Hamiltonian coefficient has imaginary part {0:e}")]
    ComplexCoefficient(f64),
    #[error("expectation value has imaginary part {0:e}")]
    ComplexExpectation(f64),
    #[error("Hamiltonian on {hamiltonian} qubits exceeds the {state}-qubit state")]
    HamiltonianWidth { hamiltonian: usize, state: usize },
    #[error("invalid run configuration: {0}")]
    Config(String),
}
