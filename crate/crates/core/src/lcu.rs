//! The `cos^{2m}(H′)` filter written as a linear combination of unitaries,
//! `cos^{2m}(H′) = Σ_{k=−m}^{m} α_k e^{−2iH′k}` with `α_k = C(2m, m+k)/4^m`,
//! and dense reference evaluations of the truncated sum.

use std::f64::consts::FRAC_PI_2;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::hamiltonian::{eigen, HamiltonianError, PauliHamiltonian};
use crate::linalg::{normalized, HermitianEigen};

/// Default bound on the discarded coefficient mass.
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;

/// Largest half-power accepted by [`lcu_coefficients`].
pub const MAX_HALF_POWER: usize = 10_000;

/// Largest system size for the dense evaluations.
pub const MAX_LCU_QUBITS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LcuError {
    #[error("half-power m = {0} is outside 1..={MAX_HALF_POWER}")]
    HalfPower(usize),
    #[error("tail tolerance {0} is outside (0, 1)")]
    TailTolerance(f64),
    #[error("spectrum [{min}, {max}] leaves the open interval (-pi/2, pi/2)")]
    SpectrumGuard { min: f64, max: f64 },
    #[error("state has {got} amplitudes, expected {expected}")]
    StateLength { expected: usize, got: usize },
    #[error("{n_qubits} qubits exceed the dense limit of {max}")]
    TooLarge { n_qubits: usize, max: usize },
    #[error("the filter annihilates the state")]
    Annihilated,
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
}

/// Truncated expansion: `coeffs[j]` is `α_{j − m0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LcuExpansion {
    pub m: usize,
    pub m0: usize,
    pub coeffs: Vec<f64>,
    /// `Σ_{|k|>m0} α_k`, exact up to the final rounding.
    pub tail_mass: f64,
}

impl LcuExpansion {
    pub fn alpha(&self, k: i64) -> f64 {
        let j = k + self.m0 as i64;
        usize::try_from(j).ok().and_then(|j| self.coeffs.get(j)).copied().unwrap_or(0.0)
    }

    /// `Σ_{|k|≤m0} |α_k|`.
    pub fn one_norm(&self) -> f64 {
        self.coeffs.iter().map(|a| a.abs()).sum()
    }

    /// The same expansion cut at a smaller radius.
    pub fn truncated(&self, m0: usize) -> Self {
        if m0 >= self.m0 {
            return self.clone();
        }
        let cut = self.m0 - m0;
        let kept = self.coeffs[cut..self.coeffs.len() - cut].to_vec();
        let dropped: f64 = self.coeffs[..cut].iter().sum::<f64>() * 2.0;
        Self {
            m: self.m,
            m0,
            coeffs: kept,
            tail_mass: self.tail_mass + dropped,
        }
    }
}

/// Row `2m` of Pascal's triangle, exactly.
pub fn binomial_row(m: usize) -> Vec<BigUint> {
    let n = 2 * m;
    let mut row = Vec::with_capacity(n + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for j in 0..n {
        c = c * (n - j) / (j + 1);
        row.push(c.clone());
    }
    row
}

/// `num / 2^shift` rounded to double from the top 64 bits of `num`.
fn ratio_to_f64(num: &BigUint, shift: u64) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let bits = num.bits();
    let drop = bits.saturating_sub(64);
    let top = (num >> drop).to_u64().expect("at most 64 bits") as f64;
    let e = drop as i64 - shift as i64;
    // Two factors keep each power of two inside the double range.
    let half = (e / 2) as i32;
    top * 2f64.powi(half) * 2f64.powi(e as i32 - half)
}

/// Coefficients `α_k` from exact binomials, truncated at the smallest `m0`
/// whose discarded mass is at most `tail_tol`.
pub fn lcu_coefficients(m: usize, tail_tol: f64) -> Result<LcuExpansion, LcuError> {
    if m == 0 || m > MAX_HALF_POWER {
        return Err(LcuError::HalfPower(m));
    }
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(LcuError::TailTolerance(tail_tol));
    }
    let shift = 2 * m as u64;
    let total = BigUint::one() << shift;
    // Walk outward from the centre: C(2m, m+k+1) = C(2m, m+k)·(m−k)/(m+k+1).
    let mut central = BigUint::one();
    for j in 0..m {
        central = central * (2 * m - j) / (j + 1);
    }
    let mut kept = central.clone();
    let mut current = central;
    let mut side = vec![ratio_to_f64(&current, shift)];
    let mut k = 0usize;
    loop {
        let tail = &total - &kept;
        let tail_mass = ratio_to_f64(&tail, shift);
        if tail_mass <= tail_tol || k == m {
            let mut coeffs: Vec<f64> = side.iter().rev().copied().collect();
            coeffs.extend(side.iter().skip(1).copied());
            return Ok(LcuExpansion { m, m0: k, coeffs, tail_mass });
        }
        current = current * (m - k) / (m + k + 1);
        kept += &current << 1u32;
        side.push(ratio_to_f64(&current, shift));
        k += 1;
    }
}

/// Untruncated expansion, `m0 = m`.
pub fn full_expansion(m: usize) -> Result<LcuExpansion, LcuError> {
    if m == 0 || m > MAX_HALF_POWER {
        return Err(LcuError::HalfPower(m));
    }
    let row = binomial_row(m);
    let coeffs = row.iter().map(|b| ratio_to_f64(b, 2 * m as u64)).collect();
    Ok(LcuExpansion { m, m0: m, coeffs, tail_mass: 0.0 })
}

fn guarded_eigen(h: &PauliHamiltonian, state: &[Complex64]) -> Result<HermitianEigen, LcuError> {
    let n = h.n_qubits();
    if n > MAX_LCU_QUBITS {
        return Err(LcuError::TooLarge { n_qubits: n, max: MAX_LCU_QUBITS });
    }
    let dim = 1usize << n;
    if state.len() != dim {
        return Err(LcuError::StateLength { expected: dim, got: state.len() });
    }
    let eig = eigen(h)?;
    let (min, max) = (eig.values[0], eig.values[dim - 1]);
    if !(min > -FRAC_PI_2 && max < FRAC_PI_2) {
        return Err(LcuError::SpectrumGuard { min, max });
    }
    Ok(eig)
}

/// `cos^{2m}(H′)ψ`, normalized, from the eigendecomposition of `H′`.
pub fn apply_cos_filter(h: &PauliHamiltonian, m: usize, state: &[Complex64]) -> Result<Vec<Complex64>, LcuError> {
    let eig = guarded_eigen(h, state)?;
    let mut coeffs = eig.coefficients(state);
    for (c, &e) in coeffs.iter_mut().zip(&eig.values) {
        *c *= e.cos().powi(2 * m as i32);
    }
    let out = eig.synthesize(&coeffs);
    if out.iter().all(|a| a.norm_sqr() == 0.0) {
        return Err(LcuError::Annihilated);
    }
    Ok(normalized(&out))
}

/// Unnormalized `Σ_{|k|≤m0} α_k e^{−2iH′k} ψ`, summing powers of the dense
/// unitary `e^{−2iH′}` and its inverse.
pub fn lcu_reference(
    h: &PauliHamiltonian,
    expansion: &LcuExpansion,
    state: &[Complex64],
) -> Result<Vec<Complex64>, LcuError> {
    let eig = guarded_eigen(h, state)?;
    let u = eig.function(|l| Complex64::from_polar(1.0, -2.0 * l));
    let u_inv = u.adjoint();
    let mut out: Vec<Complex64> = state.iter().map(|a| a * expansion.alpha(0)).collect();
    let (mut fwd, mut back) = (state.to_vec(), state.to_vec());
    for k in 1..=expansion.m0 as i64 {
        fwd = u.matvec(&fwd);
        back = u_inv.matvec(&back);
        let (a_pos, a_neg) = (expansion.alpha(k), expansion.alpha(-k));
        for ((o, f), b) in out.iter_mut().zip(&fwd).zip(&back) {
            *o += f * a_pos + b * a_neg;
        }
    }
    Ok(out)
}

/// Post-selection success `⟨Φ|O²|Φ⟩ / (Σ|α_k|)²` for the truncated
/// combination `O`, which is Hermitian so `⟨Φ|O²|Φ⟩ = ‖OΦ‖²`.
pub fn lcu_success_probability(
    h: &PauliHamiltonian,
    expansion: &LcuExpansion,
    state: &[Complex64],
) -> Result<f64, LcuError> {
    let o_phi = lcu_reference(h, expansion, state)?;
    let eta2: f64 = o_phi.iter().map(|a| a.norm_sqr()).sum();
    let alpha = expansion.one_norm();
    Ok(eta2 / (alpha * alpha))
}

/// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩`.
pub fn energy(h: &PauliHamiltonian, state: &[Complex64]) -> f64 {
    let hpsi = h.apply(state);
    let num: Complex64 = state.iter().zip(&hpsi).map(|(a, b)| a.conj() * b).sum();
    let den: f64 = state.iter().map(|a| a.norm_sqr()).sum();
    if den == 0.0 {
        0.0
    } else {
        num.re / den
    }
}
