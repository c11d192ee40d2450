//! Exact diagonalization, gap extraction and spectrum shifting.

use num_complex::Complex64;

use super::pauli::{PauliHamiltonian, PauliString};
use super::HamiltonianError;
use crate::linalg::{hermitian_eigen, HermitianEigen};

/// Eigenvalues closer than this are treated as one level when finding the gap.
pub const DISTINCT_TOL: f64 = 1e-9;

/// Tolerance on imaginary coefficients for an operator to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub vector: Vec<Complex64>,
    /// Distance from the ground energy to the next distinct level.
    pub gap: f64,
    /// All eigenvalues, ascending.
    pub spectrum: Vec<f64>,
}

/// Full dense eigendecomposition.
pub fn eigen(h: &PauliHamiltonian) -> Result<HermitianEigen, HamiltonianError> {
    if !h.is_hermitian(HERMITIAN_TOL) {
        return Err(HamiltonianError::NonHermitian(h.max_imag()));
    }
    Ok(hermitian_eigen(&h.dense()?)?)
}

/// Ground energy, ground vector, gap and spectrum. A spectrum with a single
/// distinct level has no gap and is reported as degenerate.
pub fn ground_state(h: &PauliHamiltonian) -> Result<GroundState, HamiltonianError> {
    let eig = eigen(h)?;
    let energy = eig.values[0];
    let gap = eig
        .values
        .iter()
        .find(|&&e| e - energy > DISTINCT_TOL)
        .map(|&e| e - energy)
        .ok_or(HamiltonianError::Degenerate)?;
    Ok(GroundState {
        energy,
        vector: eig.vector(0),
        gap,
        spectrum: eig.values,
    })
}

/// `(H − shift·I) / scale`.
pub fn shift_rescale(h: &PauliHamiltonian, shift: f64, scale: f64) -> Result<PauliHamiltonian, HamiltonianError> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(HamiltonianError::InvalidScale(scale));
    }
    let n = h.n_qubits();
    let mut terms: Vec<(Complex64, PauliString)> = h.terms().to_vec();
    terms.push((Complex64::new(-shift, 0.0), PauliString::identity(n)));
    Ok(PauliHamiltonian::from_terms(n, terms)?.scale(Complex64::new(1.0 / scale, 0.0)))
}
