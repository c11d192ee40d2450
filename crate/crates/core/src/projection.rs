//! Energy-filtering circuits: each step applies `exp[−i(H̃t + δ)Y_a]` to the
//! system plus a fresh ancilla and keeps the `|0⟩` ancilla branch, which
//! multiplies every eigencomponent of `H̃` by `cos(E t + δ)`.
//!
//! The ancilla is qubit `n`, after the `n` system qubits.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, GateKind};
use crate::hamiltonian::{eigen, HamiltonianError, DISTINCT_TOL, Pauli, PauliHamiltonian, PauliString};
use crate::linalg::{hermitian_eigen, norm, DenseMatrix, LinalgError, ZERO};

/// Allowed deviation from unit norm for an explicit trial vector.
pub const TRIAL_NORM_TOL: f64 = 1e-10;

/// Largest system size accepted by the dense predictors.
pub const MAX_ORACLE_QUBITS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectionError {
    #[error("gap must be positive and finite, got {0}")]
    InvalidGap(f64),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("trotter_steps must be at least 1")]
    TrotterSteps,
    #[error("invalid trial state: {0}")]
    InvalidTrial(String),
    #[error("{n_qubits} system qubits exceed the dense limit of {max}")]
    TooLarge { n_qubits: usize, max: usize },
    #[error("every eigencomponent of the trial state is filtered out")]
    Annihilated,
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterStep {
    pub t: f64,
    pub delta: f64,
}

/// Evolution times and phases, one pair per ancilla measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchedule")]
pub struct FilterSchedule {
    steps: Vec<FilterStep>,
}

#[derive(Deserialize)]
struct RawSchedule {
    steps: Vec<FilterStep>,
}

impl TryFrom<RawSchedule> for FilterSchedule {
    type Error = ProjectionError;

    fn try_from(raw: RawSchedule) -> Result<Self, Self::Error> {
        Self::new(raw.steps)
    }
}

impl FilterSchedule {
    /// Requires at least one step, every `t > 0` and every value finite.
    pub fn new(steps: Vec<FilterStep>) -> Result<Self, ProjectionError> {
        if steps.is_empty() {
            return Err(ProjectionError::InvalidSchedule("no steps".into()));
        }
        for (i, s) in steps.iter().enumerate() {
            if !(s.t > 0.0 && s.t.is_finite()) {
                return Err(ProjectionError::InvalidSchedule(format!("step {i}: t = {} is not positive", s.t)));
            }
            if !s.delta.is_finite() {
                return Err(ProjectionError::InvalidSchedule(format!("step {i}: delta is not finite")));
            }
        }
        Ok(Self { steps })
    }

    pub fn from_json(text: &str) -> Result<Self, ProjectionError> {
        serde_json::from_str(text).map_err(|e| ProjectionError::InvalidSchedule(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }

    pub fn steps(&self) -> &[FilterStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.t).collect()
    }

    pub fn total_time(&self) -> f64 {
        self.steps.iter().map(|s| s.t).sum()
    }
}

/// `t_1 = π/(2Δ)`, each later time half the previous one, all phases zero.
pub fn default_schedule(gap: f64, n_steps: usize) -> Result<FilterSchedule, ProjectionError> {
    if !(gap > 0.0 && gap.is_finite()) {
        return Err(ProjectionError::InvalidGap(gap));
    }
    let mut t = PI / (2.0 * gap);
    let mut steps = Vec::with_capacity(n_steps);
    for _ in 0..n_steps {
        steps.push(FilterStep { t, delta: 0.0 });
        t /= 2.0;
    }
    FilterSchedule::new(steps)
}

/// One step `t = π/(2|E|)` per distinct nonzero level of a shifted
/// spectrum, longest time first, all phases zero. Each step zeroes one
/// level exactly; levels closer than `DISTINCT_TOL` share a step.
pub fn level_schedule(levels: &[f64]) -> Result<FilterSchedule, ProjectionError> {
    let mut excited: Vec<f64> = levels.iter().map(|e| e.abs()).filter(|e| *e > DISTINCT_TOL).collect();
    if excited.iter().any(|e| !e.is_finite()) {
        return Err(ProjectionError::InvalidSchedule("non-finite level".into()));
    }
    excited.sort_by(f64::total_cmp);
    excited.dedup_by(|b, a| *b - *a <= DISTINCT_TOL);
    if excited.is_empty() {
        return Err(ProjectionError::InvalidSchedule("no nonzero level".into()));
    }
    FilterSchedule::new(excited.into_iter().map(|e| FilterStep { t: PI / (2.0 * e), delta: 0.0 }).collect())
}

/// `∏ cos(E t_i + δ_i)`, the factor on an eigencomponent of energy `E`
/// after every ancilla measurement returned 0.
pub fn predicted_amplitude(energy: f64, schedule: &FilterSchedule) -> f64 {
    schedule.steps.iter().map(|s| (energy * s.t + s.delta).cos()).product()
}

/// `∏ cos²(δ_i)`, the success lost on a zero-energy target to the phases.
pub fn phase_penalty(schedule: &FilterSchedule) -> f64 {
    schedule.steps.iter().map(|s| s.delta.cos().powi(2)).product()
}

/// `∏ cos²[(E_target − E) t_n / 2]`.
pub fn rodeo_probability(energy: f64, target: f64, times: &[f64]) -> f64 {
    times.iter().map(|t| ((target - energy) * t / 2.0).cos().powi(2)).product()
}

/// Initial system state.
#[derive(Debug, Clone, PartialEq)]
pub enum TrialState {
    /// Computational basis state; bit `q` of the index is qubit `q`.
    Basis(usize),
    /// Normalized amplitudes over the system qubits.
    Vector(Vec<Complex64>),
}

impl TrialState {
    /// Parses a bitstring with qubit 0 first.
    pub fn from_bits(bits: &str) -> Result<Self, ProjectionError> {
        let mut index = 0usize;
        for (q, c) in bits.chars().enumerate() {
            match c {
                '0' => {}
                '1' if q < usize::BITS as usize => index |= 1 << q,
                _ => return Err(ProjectionError::InvalidTrial(format!("bad bit {c:?} at position {q}"))),
            }
        }
        Ok(Self::Basis(index))
    }

    pub fn from_vector(amps: Vec<Complex64>) -> Result<Self, ProjectionError> {
        if !amps.len().is_power_of_two() {
            return Err(ProjectionError::InvalidTrial(format!("length {} is not a power of two", amps.len())));
        }
        let nrm = norm(&amps);
        if (nrm - 1.0).abs() > TRIAL_NORM_TOL {
            return Err(ProjectionError::InvalidTrial(format!("norm {nrm} differs from 1")));
        }
        Ok(Self::Vector(amps))
    }

    fn check_width(&self, n_qubits: usize) -> Result<(), ProjectionError> {
        match self {
            Self::Basis(k) if n_qubits < usize::BITS as usize && k >> n_qubits != 0 => Err(
                ProjectionError::InvalidTrial(format!("basis index {k} needs more than {n_qubits} qubits")),
            ),
            Self::Vector(v) if v.len() != 1usize << n_qubits => Err(ProjectionError::InvalidTrial(format!(
                "{} amplitudes for {n_qubits} qubits",
                v.len()
            ))),
            _ => Ok(()),
        }
    }

    /// Amplitudes over `n_qubits` system qubits.
    pub fn amplitudes(&self, n_qubits: usize) -> Result<Vec<Complex64>, ProjectionError> {
        self.check_width(n_qubits)?;
        Ok(match self {
            Self::Basis(k) => {
                let mut v = vec![ZERO; 1 << n_qubits];
                v[*k] = Complex64::new(1.0, 0.0);
                v
            }
            Self::Vector(v) => v.clone(),
        })
    }

    /// Starting state for the filter circuit on `n_qubits + 1` qubits, with
    /// the ancilla in `|0⟩`. Basis trials are prepared by gates instead and
    /// give `None`.
    pub fn initial_state(&self, n_qubits: usize) -> Result<Option<Vec<Complex64>>, ProjectionError> {
        self.check_width(n_qubits)?;
        Ok(match self {
            Self::Basis(_) => None,
            Self::Vector(v) => {
                let mut full = v.clone();
                full.resize(2 << n_qubits, ZERO);
                Some(full)
            }
        })
    }
}

/// Appends `exp(−iθ P⊗Y_a)`: basis changes, a CX ladder ending on the
/// ancilla, `rz(2θ)` and the mirror.
fn push_pauli_rotation(c: &mut Circuit, p: &PauliString, theta: f64, ancilla: usize) -> Result<(), CircuitError> {
    if p.is_identity() {
        return c.gate(GateKind::RY(2.0 * theta), &[ancilla]);
    }
    let support = p.support();
    for &q in &support {
        match p.get(q) {
            Pauli::X => c.gate(GateKind::H, &[q])?,
            Pauli::Y => {
                c.gate(GateKind::SDG, &[q])?;
                c.gate(GateKind::H, &[q])?;
            }
            _ => {}
        }
    }
    c.gate(GateKind::SDG, &[ancilla])?;
    c.gate(GateKind::H, &[ancilla])?;
    let chain: Vec<usize> = support.iter().copied().chain([ancilla]).collect();
    for w in chain.windows(2) {
        c.gate(GateKind::CX, &[w[0], w[1]])?;
    }
    c.gate(GateKind::RZ(2.0 * theta), &[ancilla])?;
    for w in chain.windows(2).rev() {
        c.gate(GateKind::CX, &[w[0], w[1]])?;
    }
    c.gate(GateKind::H, &[ancilla])?;
    c.gate(GateKind::S, &[ancilla])?;
    for &q in &support {
        match p.get(q) {
            Pauli::X => c.gate(GateKind::H, &[q])?,
            Pauli::Y => {
                c.gate(GateKind::H, &[q])?;
                c.gate(GateKind::S, &[q])?;
            }
            _ => {}
        }
    }
    Ok(())
}

/// Builds the filter circuit on `n + 1` qubits with classical registers
/// `c[N]` for the ancilla outcomes and `r[n+1]` for the final readout.
///
/// Each step is an exact `ry(2δ)` on the ancilla followed by `trotter_steps`
/// first-order slices over the terms of `h` in canonical order, then
/// measure, barrier, reset, barrier. A vector trial is not encoded in gates;
/// pass [`TrialState::initial_state`] to the engine instead.
pub fn build_filter_circuit(
    h: &PauliHamiltonian,
    schedule: &FilterSchedule,
    trotter_steps: usize,
    trial: &TrialState,
) -> Result<Circuit, ProjectionError> {
    if trotter_steps == 0 {
        return Err(ProjectionError::TrotterSteps);
    }
    let n = h.n_qubits();
    trial.check_width(n)?;
    let terms = h.real_terms(crate::hamiltonian::HERMITIAN_TOL)?;
    let ancilla = n;
    let mut c = Circuit::new(n + 1);
    c.add_creg("c", schedule.len())?;
    let readout = c.add_creg("r", n + 1)?;
    if let TrialState::Basis(k) = trial {
        for q in 0..n {
            if (k >> q) & 1 == 1 {
                c.gate(GateKind::X, &[q])?;
            }
        }
    }
    let r = trotter_steps as f64;
    for (i, step) in schedule.steps.iter().enumerate() {
        if step.delta != 0.0 {
            c.gate(GateKind::RY(2.0 * step.delta), &[ancilla])?;
        }
        for _ in 0..trotter_steps {
            for (coeff, p) in &terms {
                push_pauli_rotation(&mut c, p, coeff * step.t / r, ancilla)?;
            }
        }
        c.measure(ancilla, i)?;
        c.barrier_all()?;
        c.reset(ancilla)?;
        c.barrier_all()?;
    }
    for q in 0..=n {
        c.measure(q, readout + q)?;
    }
    Ok(c)
}

/// Trotter-free outcome of the filter on a trial state.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterPrediction {
    /// Probability that every ancilla measurement returns 0.
    pub success: f64,
    /// `⟨H⟩` in the filtered state.
    pub energy: f64,
    /// Filtered system state, normalized.
    pub state: Vec<Complex64>,
}

fn check_oracle_size(n: usize) -> Result<(), ProjectionError> {
    if n > MAX_ORACLE_QUBITS {
        Err(ProjectionError::TooLarge { n_qubits: n, max: MAX_ORACLE_QUBITS })
    } else {
        Ok(())
    }
}

/// Scales each eigencomponent of the trial by [`predicted_amplitude`].
pub fn predict_success(
    h: &PauliHamiltonian,
    trial: &TrialState,
    schedule: &FilterSchedule,
) -> Result<FilterPrediction, ProjectionError> {
    let n = h.n_qubits();
    check_oracle_size(n)?;
    let psi = trial.amplitudes(n)?;
    let eig = eigen(h)?;
    let mut coeffs = eig.coefficients(&psi);
    for (c, &e) in coeffs.iter_mut().zip(&eig.values) {
        *c *= predicted_amplitude(e, schedule);
    }
    let success: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if success <= 0.0 {
        return Err(ProjectionError::Annihilated);
    }
    let energy = coeffs.iter().zip(&eig.values).map(|(c, e)| c.norm_sqr() * e).sum::<f64>() / success;
    let scale = Complex64::new(1.0 / success.sqrt(), 0.0);
    let state = eig.synthesize(&coeffs).into_iter().map(|a| a * scale).collect();
    Ok(FilterPrediction { success, energy, state })
}

/// Dense reference for the circuit: per step, the exact exponential of the
/// generator `(H̃t + δ)⊗Y_a` on `n + 1` qubits followed by projection of
/// the ancilla onto `|0⟩`. Returns the success probability and the
/// normalized state on all `n + 1` qubits.
pub fn filter_oracle(
    h: &PauliHamiltonian,
    trial: &TrialState,
    schedule: &FilterSchedule,
) -> Result<(f64, Vec<Complex64>), ProjectionError> {
    let n = h.n_qubits();
    check_oracle_size(n)?;
    let hs = h.dense()?;
    let dim = 1usize << n;
    let y = [[ZERO, Complex64::new(0.0, -1.0)], [Complex64::new(0.0, 1.0), ZERO]];
    let mut psi = trial.amplitudes(n)?;
    psi.resize(2 * dim, ZERO);
    let mut success = 1.0;
    for step in &schedule.steps {
        let mut g = DenseMatrix::zeros(2 * dim);
        for r in 0..2 * dim {
            for c in 0..2 * dim {
                let ya = y[r >> n][c >> n];
                if ya != ZERO {
                    let mut sys = hs[(r % dim, c % dim)] * step.t;
                    if r % dim == c % dim {
                        sys += step.delta;
                    }
                    g[(r, c)] = sys * ya;
                }
            }
        }
        let u = hermitian_eigen(&g)?.function(|l| Complex64::from_polar(1.0, -l));
        psi = u.matvec(&psi);
        for a in &mut psi[dim..] {
            *a = ZERO;
        }
        let p: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        if p <= 0.0 {
            return Err(ProjectionError::Annihilated);
        }
        success *= p;
        let s = 1.0 / p.sqrt();
        for a in &mut psi {
            *a *= s;
        }
    }
    Ok((success, psi))
}
