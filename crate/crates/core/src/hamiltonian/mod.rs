//! Pauli-string Hamiltonians, Jordan-Wigner construction, exact
//! diagonalization and the text formats.

mod io;
mod jw;
mod pauli;
mod spectrum;

use thiserror::Error;

pub use io::{is_second_quantized, load_hamiltonian, parse_pauli_text, parse_second_quantized, to_pauli_text};
pub use jw::{build_hamiltonian, jw_annihilation, jw_creation, SecondQuantized};
pub use pauli::{Pauli, PauliHamiltonian, PauliString, COEFF_EPS, MAX_DENSE_QUBITS, MAX_PAULI_QUBITS};
pub use spectrum::{eigen, ground_state, shift_rescale, GroundState, DISTINCT_TOL, HERMITIAN_TOL};

use crate::linalg::LinalgError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HamiltonianError {
    #[error("index {index} out of range for {size} orbitals or qubits")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("{n_qubits} qubits exceeds the limit of {max}")]
    TooLarge { n_qubits: usize, max: usize },
    #[error("Pauli string on {got} qubits in a {expected}-qubit operator")]
    WidthMismatch { expected: usize, got: usize },
    #[error("term {term} has complex coefficient (imaginary part {imag:e})")]
    ComplexCoefficient { term: String, imag: f64 },
    #[error("operator is not Hermitian (imaginary coefficient up to {0:e})")]
    NonHermitian(f64),
    #[error("inconsistent matrix elements: {0}")]
    Inconsistent(String),
    #[error("spectrum is fully degenerate; no gap")]
    Degenerate,
    #[error("scale must be positive, got {0}")]
    InvalidScale(f64),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
