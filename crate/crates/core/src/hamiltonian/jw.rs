//! Jordan-Wigner encoding of second-quantized one- and two-body operators.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::pauli::{Pauli, PauliHamiltonian, PauliString};
use super::HamiltonianError;

/// Tolerance for matrix-element consistency at load time and for the
/// Hermiticity check of the built operator.
pub const ELEMENT_TOL: f64 = 1e-12;

/// `a†_i = ½ (∏_{j<i} Z_j)(X_i − iY_i)` on `n_orbitals` qubits.
pub fn jw_creation(i: usize, n_orbitals: usize) -> Result<PauliHamiltonian, HamiltonianError> {
    ladder(i, n_orbitals, -1.0)
}

/// `a_i = ½ (∏_{j<i} Z_j)(X_i + iY_i)` on `n_orbitals` qubits.
pub fn jw_annihilation(i: usize, n_orbitals: usize) -> Result<PauliHamiltonian, HamiltonianError> {
    ladder(i, n_orbitals, 1.0)
}

fn ladder(i: usize, n: usize, y_sign: f64) -> Result<PauliHamiltonian, HamiltonianError> {
    if i >= n {
        return Err(HamiltonianError::IndexOutOfRange { index: i, size: n });
    }
    let mut letters: Vec<(usize, Pauli)> = (0..i).map(|j| (j, Pauli::Z)).collect();
    letters.push((i, Pauli::X));
    let x = PauliString::from_letters(n, &letters)?;
    letters[i] = (i, Pauli::Y);
    let y = PauliString::from_letters(n, &letters)?;
    PauliHamiltonian::from_terms(
        n,
        vec![(Complex64::new(0.5, 0.0), x), (Complex64::new(0.0, 0.5 * y_sign), y)],
    )
}

/// One-body elements `t_ij` and antisymmetrized two-body elements `V_ij,kl`
/// over `n_orbitals` single-particle states of one species. Inserting an
/// element also stores its symmetry partners; a partner that contradicts an
/// earlier entry is an error.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SecondQuantized {
    n_orbitals: usize,
    one_body: BTreeMap<(usize, usize), f64>,
    two_body: BTreeMap<(usize, usize, usize, usize), f64>,
}

impl SecondQuantized {
    pub fn new(n_orbitals: usize) -> Self {
        Self {
            n_orbitals,
            ..Self::default()
        }
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    pub fn one_body(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.one_body
    }

    pub fn two_body(&self) -> &BTreeMap<(usize, usize, usize, usize), f64> {
        &self.two_body
    }

    fn check_index(&self, i: usize) -> Result<(), HamiltonianError> {
        if i < self.n_orbitals {
            Ok(())
        } else {
            Err(HamiltonianError::IndexOutOfRange { index: i, size: self.n_orbitals })
        }
    }

    /// Sets `t_ij` and `t_ji`.
    pub fn set_one_body(&mut self, i: usize, j: usize, value: f64) -> Result<(), HamiltonianError> {
        self.check_index(i)?;
        self.check_index(j)?;
        store(&mut self.one_body, (i, j), value, "t")?;
        store(&mut self.one_body, (j, i), value, "t")
    }

    /// Sets `V_ij,kl` with `V_ji,kl = V_ij,lk = −V_ij,kl`.
    pub fn set_two_body(&mut self, i: usize, j: usize, k: usize, l: usize, value: f64) -> Result<(), HamiltonianError> {
        for idx in [i, j, k, l] {
            self.check_index(idx)?;
        }
        if (i == j || k == l) && value.abs() > ELEMENT_TOL {
            return Err(HamiltonianError::Inconsistent(format!(
                "v {i} {j} {k} {l} must vanish by antisymmetry"
            )));
        }
        store(&mut self.two_body, (i, j, k, l), value, "v")?;
        store(&mut self.two_body, (j, i, k, l), -value, "v")?;
        store(&mut self.two_body, (i, j, l, k), -value, "v")?;
        store(&mut self.two_body, (j, i, l, k), value, "v")
    }
}

fn store<K: Ord + Copy + std::fmt::Debug>(
    map: &mut BTreeMap<K, f64>,
    key: K,
    value: f64,
    label: &str,
) -> Result<(), HamiltonianError> {
    if let Some(&old) = map.get(&key) {
        if (old - value).abs() > ELEMENT_TOL * old.abs().max(value.abs()).max(1.0) {
            return Err(HamiltonianError::Inconsistent(format!(
                "{label}{key:?} given as both {old} and {value}"
            )));
        }
    }
    map.insert(key, value);
    Ok(())
}

/// `H = Σ t_ij a†_i a_j + ½ Σ V_ij,kl a†_i a†_j a_l a_k`, expanded into Pauli
/// strings on one qubit per orbital.
pub fn build_hamiltonian(input: &SecondQuantized) -> Result<PauliHamiltonian, HamiltonianError> {
    let n = input.n_orbitals;
    let create: Vec<PauliHamiltonian> = (0..n).map(|i| jw_creation(i, n)).collect::<Result<_, _>>()?;
    let annihilate: Vec<PauliHamiltonian> = (0..n).map(|i| jw_annihilation(i, n)).collect::<Result<_, _>>()?;
    let mut terms = Vec::new();
    for (&(i, j), &t) in &input.one_body {
        let op = create[i].mul(&annihilate[j]);
        terms.extend(op.terms().iter().map(|&(c, p)| (c * t, p)));
    }
    for (&(i, j, k, l), &v) in &input.two_body {
        let op = create[i].mul(&create[j]).mul(&annihilate[l]).mul(&annihilate[k]);
        terms.extend(op.terms().iter().map(|&(c, p)| (c * (0.5 * v), p)));
    }
    let h = PauliHamiltonian::from_terms(n, terms)?;
    let imag = h.max_imag();
    if imag > ELEMENT_TOL {
        return Err(HamiltonianError::NonHermitian(imag));
    }
    // Drop the rounding residue in the imaginary parts.
    let real: Vec<(f64, PauliString)> = h.terms().iter().map(|&(c, p)| (c.re, p)).collect();
    PauliHamiltonian::from_real_terms(n, &real)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::ground_state;
    use crate::linalg::{DenseMatrix, ONE, ZERO};

    #[test]
    fn annihilation_on_one_orbital() {
        let a = jw_annihilation(0, 1).unwrap().dense().unwrap();
        let want = DenseMatrix::from_rows(&[[ZERO, ONE], [ZERO, ZERO]]);
        assert!(a.max_abs_diff(&want) <= 1e-15);
    }

    #[test]
    fn creation_expansion_on_second_orbital() {
        let c = jw_creation(1, 2).unwrap();
        let want = PauliHamiltonian::from_terms(
            2,
            vec![
                (Complex64::new(0.5, 0.0), PauliString::parse("ZX").unwrap()),
                (Complex64::new(0.0, -0.5), PauliString::parse("ZY").unwrap()),
            ],
        )
        .unwrap();
        assert_eq!(c, want);
    }

    #[test]
    fn creation_is_adjoint_of_annihilation() {
        for i in 0..4 {
            let c = jw_creation(i, 4).unwrap().dense().unwrap();
            let a = jw_annihilation(i, 4).unwrap().dense().unwrap();
            assert!(c.max_abs_diff(&a.adjoint()) <= 1e-15);
        }
    }

    #[test]
    fn single_orbital_number_operator() {
        let mut input = SecondQuantized::new(1);
        input.set_one_body(0, 0, 1.7).unwrap();
        let h = build_hamiltonian(&input).unwrap();
        let want = PauliHamiltonian::from_real_terms(
            1,
            &[(0.85, PauliString::parse("I").unwrap()), (-0.85, PauliString::parse("Z").unwrap())],
        )
        .unwrap();
        assert_eq!(h, want);
        let d = h.dense().unwrap();
        assert!((d[(0, 0)].re).abs() < 1e-15 && (d[(1, 1)].re - 1.7).abs() < 1e-15);
    }

    #[test]
    fn empty_input_gives_zero_operator() {
        assert!(build_hamiltonian(&SecondQuantized::new(3)).unwrap().is_empty());
    }

    #[test]
    fn hopping_spectrum() {
        let g = 0.8;
        let mut input = SecondQuantized::new(2);
        input.set_one_body(0, 1, g).unwrap();
        let h = build_hamiltonian(&input).unwrap();
        let mut spec = ground_state(&h).unwrap().spectrum;
        spec.sort_by(f64::total_cmp);
        for (got, want) in spec.iter().zip([-g, 0.0, 0.0, g]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn two_body_pair_term_matches_dense_product() {
        // V_01,01 = w and its three partners each contribute ½w·n_0 n_1 after
        // reordering the operators, so the sum is 2w·n_0 n_1.
        let w = 1.3;
        let mut input = SecondQuantized::new(2);
        input.set_two_body(0, 1, 0, 1, w).unwrap();
        let d = build_hamiltonian(&input).unwrap().dense().unwrap();
        let n0 = jw_creation(0, 2).unwrap().mul(&jw_annihilation(0, 2).unwrap()).dense().unwrap();
        let n1 = jw_creation(1, 2).unwrap().mul(&jw_annihilation(1, 2).unwrap()).dense().unwrap();
        let want = n0.matmul(&n1).scale(Complex64::new(2.0 * w, 0.0));
        assert!(d.max_abs_diff(&want) <= 1e-12);
    }

    #[test]
    fn load_time_consistency() {
        let mut input = SecondQuantized::new(3);
        input.set_one_body(0, 1, 1.0).unwrap();
        assert!(input.set_one_body(1, 0, 2.0).is_err());
        assert!(input.set_one_body(0, 3, 1.0).is_err());
        input.set_two_body(0, 1, 1, 2, 0.5).unwrap();
        assert_eq!(input.two_body()[&(1, 0, 1, 2)], -0.5);
        assert_eq!(input.two_body()[&(1, 0, 2, 1)], 0.5);
        assert!(input.set_two_body(1, 0, 1, 2, 0.5).is_err());
        assert!(input.set_two_body(0, 0, 1, 2, 0.5).is_err());
    }

    #[test]
    fn non_hermitian_two_body_is_rejected() {
        let mut input = SecondQuantized::new(3);
        input.set_two_body(0, 1, 0, 2, 1.0).unwrap();
        assert!(matches!(build_hamiltonian(&input), Err(HamiltonianError::NonHermitian(_))));
    }
}
