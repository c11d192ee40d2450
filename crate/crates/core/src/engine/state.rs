//! Amplitude storage and the gate, measurement and sampling kernels.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use super::EngineError;
use crate::hamiltonian::PauliHamiltonian;
use crate::linalg::{tree_sum, tree_sum_complex, DenseMatrix, Mat2, Mat4, ZERO};

/// Threshold on a branch probability below which projection onto it is
/// refused; sits above rounding noise for circuits of ~1e8 gates.
pub const PROJECTION_EPS: f64 = 1e-12;

/// Widest register the engine allocates (2^30 amplitudes = 16 GiB).
pub const MAX_QUBITS: usize = 30;

/// Registers below this width always run single-threaded.
const PARALLEL_MIN_QUBITS: usize = 14;

/// Fixed block length for reductions, so partial sums never depend on the
/// thread count.
const REDUCE_CHUNK: usize = 1 << 12;

/// Raw pointer handed to workers that write provably disjoint index sets.
#[derive(Clone, Copy)]
struct SendPtr(*mut Complex64);
unsafe impl Send for SendPtr {}
unsafe impl Sync for SendPtr {}

impl SendPtr {
    #[inline(always)]
    fn get(self) -> *mut Complex64 {
        self.0
    }
}

/// `2^n` double-precision amplitudes; bit `q` of an index is qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn new(n_qubits: usize) -> Result<Self, EngineError> {
        if n_qubits > MAX_QUBITS {
            return Err(EngineError::TooManyQubits { n_qubits, max: MAX_QUBITS });
        }
        let mut amps = vec![ZERO; 1usize << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Takes ownership of an amplitude vector whose length is a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, EngineError> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(EngineError::InvalidState(format!("length {len} is not a power of two")));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(EngineError::TooManyQubits { n_qubits, max: MAX_QUBITS });
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.reduce(|_, a| a.norm_sqr())
    }

    fn check_qubit(&self, q: usize) -> Result<(), EngineError> {
        if q < self.n_qubits {
            Ok(())
        } else {
            Err(EngineError::QubitOutOfRange { qubit: q, n_qubits: self.n_qubits })
        }
    }

    fn parallel(&self) -> bool {
        self.n_qubits >= PARALLEL_MIN_QUBITS && rayon::current_num_threads() > 1
    }

    /// Runs `body` over `0..total`, split into contiguous blocks across the
    /// current pool when the register is wide enough.
    fn for_blocks<F>(&self, total: usize, body: F)
    where
        F: Fn(std::ops::Range<usize>) + Sync + Send,
    {
        if !self.parallel() {
            body(0..total);
            return;
        }
        let blocks = (rayon::current_num_threads() * 4).min(total).max(1);
        let size = total.div_ceil(blocks);
        (0..blocks).into_par_iter().for_each(|b| {
            let start = b * size;
            let end = ((b + 1) * size).min(total);
            if start < end {
                body(start..end);
            }
        });
    }

    /// Deterministic sum of `f(index, amp)` over all amplitudes: fixed-size
    /// chunk sums combined by a fixed pairwise tree.
    fn reduce<F>(&self, f: F) -> f64
    where
        F: Fn(usize, &Complex64) -> f64 + Sync + Send,
    {
        let chunk_sum = |(c, chunk): (usize, &[Complex64])| -> f64 {
            let base = c * REDUCE_CHUNK;
            chunk.iter().enumerate().map(|(k, a)| f(base + k, a)).sum()
        };
        let partial: Vec<f64> = if self.parallel() {
            self.amps.par_chunks(REDUCE_CHUNK).enumerate().map(chunk_sum).collect()
        } else {
            self.amps.chunks(REDUCE_CHUNK).enumerate().map(chunk_sum).collect()
        };
        tree_sum(&partial)
    }

    /// Replaces each pair `(s, s + 2^q)` with `U` times it, where
    /// `s_i = ⌊i/2^q⌋·2^{q+1} + (i mod 2^q)` for `i < 2^{n-1}`. `U` need not be unitary.
    pub fn apply_1q(&mut self, u: &Mat2, q: usize) -> Result<(), EngineError> {
        self.check_qubit(q)?;
        let stride = 1usize << q;
        let low = stride - 1;
        let ptr = SendPtr(self.amps.as_mut_ptr());
        let u = *u;
        self.for_blocks(self.amps.len() >> 1, move |range| {
            let p = ptr.get();
            for i in range {
                let s = ((i >> q) << (q + 1)) | (i & low);
                // SAFETY: distinct i give distinct, in-bounds pairs (s, s + stride).
                unsafe {
                    let a = *p.add(s);
                    let b = *p.add(s + stride);
                    *p.add(s) = u[0][0] * a + u[0][1] * b;
                    *p.add(s + stride) = u[1][0] * a + u[1][1] * b;
                }
            }
        });
        Ok(())
    }

    /// Replaces each quadruple `(s, s+2^p, s+2^q, s+2^p+2^q)` with `U` times
    /// it; local index bit 0 is qubit `p`, bit 1 is qubit `q`. Requires `p < q`.
    pub fn apply_2q(&mut self, u: &Mat4, p: usize, q: usize) -> Result<(), EngineError> {
        self.check_qubit(p)?;
        self.check_qubit(q)?;
        if p >= q {
            return Err(EngineError::QubitOrder { p, q });
        }
        let (sp, sq) = (1usize << p, 1usize << q);
        let low = sp - 1;
        let mid = (1usize << (q - p - 1)) - 1;
        let ptr = SendPtr(self.amps.as_mut_ptr());
        let u = *u;
        self.for_blocks(self.amps.len() >> 2, move |range| {
            let ptr = ptr.get();
            for i in range {
                let hi = i >> p;
                let s = ((hi >> (q - p - 1)) << (q + 1)) | ((hi & mid) << (p + 1)) | (i & low);
                let idx = [s, s + sp, s + sq, s + sp + sq];
                // SAFETY: distinct i give disjoint, in-bounds quadruples.
                unsafe {
                    let v = [*ptr.add(idx[0]), *ptr.add(idx[1]), *ptr.add(idx[2]), *ptr.add(idx[3])];
                    for (r, &k) in idx.iter().enumerate() {
                        *ptr.add(k) = u[r][0] * v[0] + u[r][1] * v[1] + u[r][2] * v[2] + u[r][3] * v[3];
                    }
                }
            }
        });
        Ok(())
    }

    /// Applies a `2^k x 2^k` matrix whose local bit `j` is `qubits[j]`.
    pub fn apply_multi(&mut self, u: &DenseMatrix, qubits: &[usize]) -> Result<(), EngineError> {
        let k = qubits.len();
        if u.dim() != 1 << k {
            return Err(EngineError::InvalidState(format!(
                "{}x{} matrix on {k} qubits",
                u.dim(),
                u.dim()
            )));
        }
        for (j, &q) in qubits.iter().enumerate() {
            self.check_qubit(q)?;
            if qubits[..j].contains(&q) {
                return Err(EngineError::QubitOrder { p: q, q });
            }
        }
        let mut sorted = qubits.to_vec();
        sorted.sort_unstable();
        let offsets: Vec<usize> = (0..1usize << k)
            .map(|l| (0..k).filter(|j| (l >> j) & 1 == 1).map(|j| 1usize << qubits[j]).sum())
            .collect();
        let ptr = SendPtr(self.amps.as_mut_ptr());
        let dim = 1usize << k;
        self.for_blocks(self.amps.len() >> k, |range| {
            let ptr = ptr.get();
            let mut v = vec![ZERO; dim];
            for i in range {
                // Spread i over the non-target bits.
                let mut s = i;
                for &q in &sorted {
                    s = ((s >> q) << (q + 1)) | (s & ((1 << q) - 1));
                }
                // SAFETY: distinct i give disjoint, in-bounds index groups.
                unsafe {
                    for (l, &o) in offsets.iter().enumerate() {
                        v[l] = *ptr.add(s + o);
                    }
                    for (r, &o) in offsets.iter().enumerate() {
                        let mut acc = ZERO;
                        for (c, x) in v.iter().enumerate() {
                            acc += u[(r, c)] * x;
                        }
                        *ptr.add(s + o) = acc;
                    }
                }
            }
        });
        Ok(())
    }

    /// `P(qubit q = 1)`.
    pub fn prob_one(&self, q: usize) -> Result<f64, EngineError> {
        self.check_qubit(q)?;
        Ok(self.reduce(|i, a| if (i >> q) & 1 == 1 { a.norm_sqr() } else { 0.0 }))
    }

    /// Projects onto `qubit q = outcome`, renormalizes and returns the
    /// branch probability.
    pub fn measure_project(&mut self, q: usize, outcome: u8) -> Result<f64, EngineError> {
        self.check_qubit(q)?;
        let want = usize::from(outcome != 0);
        let p = self.reduce(|i, a| if (i >> q) & 1 == want { a.norm_sqr() } else { 0.0 });
        if !(p >= PROJECTION_EPS) {
            return Err(EngineError::ProjectionImpossible { qubit: q, outcome, probability: p });
        }
        let scale = 1.0 / p.sqrt();
        // The state is normalized, so anything above 1 is rounding.
        let p = p.min(1.0);
        let apply = |(i, a): (usize, &mut Complex64)| {
            if (i >> q) & 1 == want {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        };
        if self.parallel() {
            self.amps.par_iter_mut().enumerate().for_each(apply);
        } else {
            self.amps.iter_mut().enumerate().for_each(apply);
        }
        Ok(p)
    }

    /// Forces `qubit q = 0`: returns `p0` and leaves the renormalized
    /// projected state, or fails when `p0 < PROJECTION_EPS`.
    pub fn assert_measure(&mut self, q: usize) -> Result<f64, EngineError> {
        self.measure_project(q, 0)
    }

    /// Random projective measurement; draws from `rng` only when both
    /// outcomes are possible.
    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<u8, EngineError> {
        let p1 = self.prob_one(q)?;
        let outcome = if p1 <= 0.0 {
            0
        } else if p1 >= 1.0 {
            1
        } else {
            u8::from(rng.gen::<f64>() < p1)
        };
        self.measure_project(q, outcome)?;
        Ok(outcome)
    }

    /// Measures and flips to `|0⟩`; a qubit already in `|0⟩` is left untouched
    /// without drawing a random number.
    pub fn reset<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<(), EngineError> {
        if self.prob_one(q)? == 0.0 {
            return Ok(());
        }
        if self.measure(q, rng)? == 1 {
            let x = [[ZERO, Complex64::new(1.0, 0.0)], [Complex64::new(1.0, 0.0), ZERO]];
            self.apply_1q(&x, q)?;
        }
        Ok(())
    }

    /// Draws `shots` basis indices in ascending order by sweeping the
    /// cumulative distribution once with sorted uniform draws. Memory is
    /// linear in `shots`; zero-probability indices are never returned.
    pub fn sample_indices<R: Rng + ?Sized>(&self, shots: usize, rng: &mut R) -> Vec<usize> {
        let total = self.norm_sqr();
        let mut draws: Vec<f64> = (0..shots).map(|_| rng.gen::<f64>() * total).collect();
        draws.sort_unstable_by(f64::total_cmp);
        let mut out = Vec::with_capacity(shots);
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (k, a) in self.amps.iter().enumerate() {
            if out.len() == shots {
                break;
            }
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            last_nonzero = k;
            acc += p;
            while out.len() < shots && draws[out.len()] < acc {
                out.push(k);
            }
        }
        // Rounding in the running sum can leave the largest draws unassigned.
        out.resize(shots, last_nonzero);
        out
    }

    /// `⟨ψ|φ⟩` with a deterministic reduction order.
    pub fn inner(&self, other: &[Complex64]) -> Complex64 {
        inner_det(&self.amps, other)
    }

    /// `Σ_j h_j ⟨ψ|P_j|ψ⟩` using one scratch vector.
    pub fn expectation_pauli(&self, h: &PauliHamiltonian) -> Result<f64, EngineError> {
        let mut scratch = vec![ZERO; self.amps.len()];
        self.expectation_with_scratch(h, &mut scratch)
    }

    /// As [`expectation_pauli`](Self::expectation_pauli) with caller-owned scratch.
    pub fn expectation_with_scratch(&self, h: &PauliHamiltonian, scratch: &mut [Complex64]) -> Result<f64, EngineError> {
        if h.n_qubits() > self.n_qubits {
            return Err(EngineError::HamiltonianWidth { hamiltonian: h.n_qubits(), state: self.n_qubits });
        }
        let mut values = Vec::with_capacity(h.len());
        for (c, p) in h.terms() {
            if c.im.abs() > 1e-12 {
                return Err(EngineError::ComplexCoefficient(c.im));
            }
            p.widened(self.n_qubits).apply_into(&self.amps, scratch);
            values.push(self.inner(scratch) * c.re);
        }
        let total = tree_sum_complex(&values);
        if total.im.abs() >= 1e-9 {
            return Err(EngineError::ComplexExpectation(total.im));
        }
        Ok(total.re)
    }
}

/// `⟨a|b⟩` summed in fixed chunks and combined by a pairwise tree.
pub fn inner_det(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    assert_eq!(a.len(), b.len());
    let partial: Vec<Complex64> = a
        .chunks(REDUCE_CHUNK)
        .zip(b.chunks(REDUCE_CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p.conj() * q).sum())
        .collect();
    tree_sum_complex(&partial)
}
