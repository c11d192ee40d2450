//! Pauli strings as bit masks and weighted sums of them.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use super::HamiltonianError;
use crate::linalg::{DenseMatrix, I, ONE, ZERO};

/// Coefficients below this magnitude are dropped by [`PauliHamiltonian::simplify`].
pub const COEFF_EPS: f64 = 1e-14;

/// Largest register a Pauli string can address.
pub const MAX_PAULI_QUBITS: usize = 64;

/// Largest register for which dense matrices are materialized.
pub const MAX_DENSE_QUBITS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Self::I),
            'X' => Some(Self::X),
            'Y' => Some(Self::Y),
            'Z' => Some(Self::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Self::I => 'I',
            Self::X => 'X',
            Self::Y => 'Y',
            Self::Z => 'Z',
        }
    }
}

/// A tensor product of single-qubit Paulis. Qubit `q` carries X if bit `q`
/// of `x` is set, Z if bit `q` of `z` is set, and Y if both are.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits <= MAX_PAULI_QUBITS);
        Self { n_qubits, x: 0, z: 0 }
    }

    /// Builds a string from `(qubit, letter)` pairs; unlisted qubits are I.
    pub fn from_letters(n_qubits: usize, letters: &[(usize, Pauli)]) -> Result<Self, HamiltonianError> {
        let mut s = Self::identity(n_qubits);
        for &(q, p) in letters {
            if q >= n_qubits {
                return Err(HamiltonianError::IndexOutOfRange { index: q, size: n_qubits });
            }
            s.set(q, p);
        }
        Ok(s)
    }

    /// Parses letters with the leftmost letter on qubit 0.
    pub fn parse(text: &str) -> Option<Self> {
        let letters: Vec<Pauli> = text.chars().map(Pauli::from_char).collect::<Option<_>>()?;
        if letters.len() > MAX_PAULI_QUBITS {
            return None;
        }
        let mut s = Self::identity(letters.len());
        for (q, p) in letters.into_iter().enumerate() {
            s.set(q, p);
        }
        Some(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn get(&self, q: usize) -> Pauli {
        match ((self.x >> q) & 1, (self.z >> q) & 1) {
            (0, 0) => Pauli::I,
            (1, 0) => Pauli::X,
            (1, 1) => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let bit = 1u64 << q;
        let (x, z) = match p {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        };
        self.x = if x { self.x | bit } else { self.x & !bit };
        self.z = if z { self.z | bit } else { self.z & !bit };
    }

    /// Qubits carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        let m = self.x | self.z;
        (0..self.n_qubits).filter(|q| (m >> q) & 1 == 1).collect()
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Same letters on a register of `n_qubits` (must not drop any support).
    pub fn widened(&self, n_qubits: usize) -> Self {
        assert!(n_qubits >= self.n_qubits && n_qubits <= MAX_PAULI_QUBITS);
        Self { n_qubits, ..*self }
    }

    /// `self · other = phase · result`.
    pub fn mul(&self, other: &Self) -> (Complex64, Self) {
        assert_eq!(self.n_qubits, other.n_qubits);
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        // P = i^{|x&z|} X^x Z^z, and Z^a X^b = (-1)^{|a&b|} X^b Z^a.
        let e = self.y_count() as i64 + other.y_count() as i64 + 2 * (self.z & other.x).count_ones() as i64
            - (x & z).count_ones() as i64;
        (i_pow(e), Self { n_qubits: self.n_qubits, x, z })
    }

    /// `P|k⟩ = phase · |k'⟩`.
    #[inline]
    pub fn apply_to_basis(&self, k: usize) -> (Complex64, usize) {
        let sign = if ((k as u64) & self.z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        (i_pow(self.y_count() as i64) * sign, k ^ self.x as usize)
    }

    /// `out = P·psi`.
    pub fn apply_into(&self, psi: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(psi.len(), out.len());
        let base = i_pow(self.y_count() as i64);
        let (x, z) = (self.x as usize, self.z as usize);
        for (k, &a) in psi.iter().enumerate() {
            let v = if (k & z).count_ones() % 2 == 1 { -base } else { base };
            out[k ^ x] = v * a;
        }
    }

    pub fn dense(&self) -> Result<DenseMatrix, HamiltonianError> {
        check_dense(self.n_qubits)?;
        let dim = 1usize << self.n_qubits;
        let mut m = DenseMatrix::zeros(dim);
        for k in 0..dim {
            let (ph, r) = self.apply_to_basis(k);
            m[(r, k)] = ph;
        }
        Ok(m)
    }

    fn sort_key(&self) -> impl Iterator<Item = Pauli> + '_ {
        (0..self.n_qubits).map(|q| self.get(q))
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n_qubits
            .cmp(&other.n_qubits)
            .then_with(|| self.sort_key().cmp(other.sort_key()))
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits {
            write!(f, "{}", self.get(q).as_char())?;
        }
        Ok(())
    }
}

fn i_pow(e: i64) -> Complex64 {
    match e.rem_euclid(4) {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

fn check_dense(n: usize) -> Result<(), HamiltonianError> {
    if n > MAX_DENSE_QUBITS {
        Err(HamiltonianError::TooLarge { n_qubits: n, max: MAX_DENSE_QUBITS })
    } else {
        Ok(())
    }
}

/// `Σ_j c_j P_j` on a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliHamiltonian {
    n_qubits: usize,
    terms: Vec<(Complex64, PauliString)>,
}

impl PauliHamiltonian {
    pub fn zero(n_qubits: usize) -> Self {
        Self { n_qubits, terms: Vec::new() }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::from_terms(n_qubits, vec![(ONE, PauliString::identity(n_qubits))]).expect("valid")
    }

    /// Builds and simplifies; every string must live on `n_qubits`.
    pub fn from_terms(n_qubits: usize, terms: Vec<(Complex64, PauliString)>) -> Result<Self, HamiltonianError> {
        if n_qubits > MAX_PAULI_QUBITS {
            return Err(HamiltonianError::TooLarge { n_qubits, max: MAX_PAULI_QUBITS });
        }
        for (_, s) in &terms {
            if s.n_qubits != n_qubits {
                return Err(HamiltonianError::WidthMismatch { expected: n_qubits, got: s.n_qubits });
            }
        }
        let mut h = Self { n_qubits, terms };
        h.simplify();
        Ok(h)
    }

    /// Real-coefficient convenience constructor.
    pub fn from_real_terms(n_qubits: usize, terms: &[(f64, PauliString)]) -> Result<Self, HamiltonianError> {
        Self::from_terms(n_qubits, terms.iter().map(|&(c, s)| (Complex64::new(c, 0.0), s)).collect())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Terms in canonical order: lexicographic by letters, qubit 0 first, I<X<Y<Z.
    pub fn terms(&self) -> &[(Complex64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Merges duplicate strings, drops negligible coefficients, sorts.
    pub fn simplify(&mut self) {
        let mut acc: BTreeMap<PauliString, Complex64> = BTreeMap::new();
        for (c, s) in self.terms.drain(..) {
            *acc.entry(s).or_insert(ZERO) += c;
        }
        self.terms = acc
            .into_iter()
            .filter(|(_, c)| c.norm() > COEFF_EPS)
            .map(|(s, c)| (c, s))
            .collect();
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n_qubits, other.n_qubits);
        let mut h = Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().chain(&other.terms).cloned().collect(),
        };
        h.simplify();
        h
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut h = Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|&(c, p)| (c * s, p)).collect(),
        };
        h.simplify();
        h
    }

    /// Operator product `self · other`, expanded through the Pauli table.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n_qubits, other.n_qubits);
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, p) in &self.terms {
            for (b, q) in &other.terms {
                let (ph, r) = p.mul(q);
                terms.push((a * b * ph, r));
            }
        }
        let mut h = Self { n_qubits: self.n_qubits, terms };
        h.simplify();
        h
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|&(c, p)| (c.conj(), p)).collect(),
        }
    }

    /// Largest imaginary part among the (simplified) coefficients.
    pub fn max_imag(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_imag() <= tol
    }

    /// Real coefficients, failing if any exceeds `tol` in imaginary part.
    pub fn real_terms(&self, tol: f64) -> Result<Vec<(f64, PauliString)>, HamiltonianError> {
        self.terms
            .iter()
            .map(|&(c, p)| {
                if c.im.abs() > tol {
                    Err(HamiltonianError::ComplexCoefficient { term: p.to_string(), imag: c.im })
                } else {
                    Ok((c.re, p))
                }
            })
            .collect()
    }

    /// Coefficient of the identity string.
    pub fn constant(&self) -> Complex64 {
        self.terms
            .iter()
            .find(|(_, p)| p.is_identity())
            .map_or(ZERO, |(c, _)| *c)
    }

    /// `Σ|c_j|`, an upper bound on the operator norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.norm()).sum()
    }

    /// Same operator on a wider register.
    pub fn widened(&self, n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: self.terms.iter().map(|&(c, p)| (c, p.widened(n_qubits))).collect(),
        }
    }

    pub fn dense(&self) -> Result<DenseMatrix, HamiltonianError> {
        check_dense(self.n_qubits)?;
        let dim = 1usize << self.n_qubits;
        let mut m = DenseMatrix::zeros(dim);
        for (c, p) in &self.terms {
            for k in 0..dim {
                let (ph, r) = p.apply_to_basis(k);
                m[(r, k)] += c * ph;
            }
        }
        Ok(m)
    }

    /// Matrix-free `H·psi`.
    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(psi.len(), 1usize << self.n_qubits);
        let mut out = vec![ZERO; psi.len()];
        let mut scratch = vec![ZERO; psi.len()];
        for (c, p) in &self.terms {
            p.apply_into(psi, &mut scratch);
            for (o, s) in out.iter_mut().zip(&scratch) {
                *o += c * s;
            }
        }
        out
    }
}
