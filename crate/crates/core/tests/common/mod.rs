//! Random circuits and dense references shared by the integration tests.
#![allow(dead_code)]

use nucsim_core::circuit::{Circuit, GateKind, Instruction};
use nucsim_core::linalg::{DenseMatrix, ZERO};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn angle<R: Rng>(rng: &mut R) -> f64 {
    rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)
}

/// Haar-ish random unitary: exponential of a random Hermitian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> DenseMatrix {
    let mut h = DenseMatrix::zeros(dim);
    for r in 0..dim {
        h[(r, r)] = Complex64::new(rng.gen_range(-3.0..3.0), 0.0);
        for c in r + 1..dim {
            let z = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            h[(r, c)] = z;
            h[(c, r)] = z.conj();
        }
    }
    h.hermitian_function(|x| Complex64::from_polar(1.0, x)).unwrap()
}

pub fn random_state<R: Rng>(rng: &mut R, n_qubits: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..1usize << n_qubits)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    nucsim_core::linalg::normalized(&v)
}

/// A random gate from the whole library that fits on `n` qubits, on
/// distinct random operands.
pub fn random_gate<R: Rng>(rng: &mut R, n: usize) -> (GateKind, Vec<usize>) {
    loop {
        let kind = match rng.gen_range(0..36) {
            0 => GateKind::U3(angle(rng), angle(rng), angle(rng)),
            1 => GateKind::U2(angle(rng), angle(rng)),
            2 => GateKind::U1(angle(rng)),
            3 => GateKind::CX,
            4 => GateKind::ID,
            5 => GateKind::X,
            6 => GateKind::Y,
            7 => GateKind::Z,
            8 => GateKind::H,
            9 => GateKind::S,
            10 => GateKind::SDG,
            11 => GateKind::T,
            12 => GateKind::TDG,
            13 => GateKind::RX(angle(rng)),
            14 => GateKind::RY(angle(rng)),
            15 => GateKind::RZ(angle(rng)),
            16 => GateKind::CZ,
            17 => GateKind::CY,
            18 => GateKind::SWAP,
            19 => GateKind::CH,
            20 => GateKind::CCX,
            21 => GateKind::CSWAP,
            22 => GateKind::CRX(angle(rng)),
            23 => GateKind::CRY(angle(rng)),
            24 => GateKind::CRZ(angle(rng)),
            25 => GateKind::CU1(angle(rng)),
            26 => GateKind::CU3(angle(rng), angle(rng), angle(rng)),
            27 => GateKind::RXX(angle(rng)),
            28 => GateKind::RZZ(angle(rng)),
            29 => GateKind::RCCX,
            30 => GateKind::RC3X,
            31 => GateKind::C3X,
            32 => GateKind::C3SQRTX,
            33 => GateKind::C4X,
            34 => GateKind::C1(random_unitary(rng, 2).to_mat2()),
            _ => GateKind::C2(Box::new(random_unitary(rng, 4).to_mat4())),
        };
        let k = kind.num_qubits();
        if k <= n {
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(rng);
            all.truncate(k);
            return (kind, all);
        }
    }
}

/// Gates restricted to one and two qubits, biased towards runs that fusion
/// can merge.
pub fn random_fusable_gate<R: Rng>(rng: &mut R, n: usize) -> (GateKind, Vec<usize>) {
    loop {
        let (kind, qubits) = random_gate(rng, n.min(2).max(1));
        if kind.num_qubits() > 2 {
            continue;
        }
        // Map the local operands onto a random pair of the full register.
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(rng);
        let mapped = qubits.iter().map(|&q| all[q]).collect();
        return (kind, mapped);
    }
}

pub fn random_unitary_circuit<R: Rng>(rng: &mut R, n: usize, len: usize) -> Circuit {
    let mut c = Circuit::new(n);
    for _ in 0..len {
        let (g, q) = random_gate(rng, n);
        c.gate(g, &q).unwrap();
    }
    c
}

/// Circuit in the filter layout: `blocks` groups of random gates on all
/// `n_sys + 1` qubits, each ended by measure, barrier, reset, barrier on
/// the ancilla `n_sys`, then a measurement of every qubit.
pub fn random_filter_layout_circuit<R: Rng>(rng: &mut R, n_sys: usize, blocks: usize, gates_per_block: usize) -> Circuit {
    let n = n_sys + 1;
    let mut c = Circuit::new(n);
    c.add_creg("c", blocks).unwrap();
    let r = c.add_creg("r", n).unwrap();
    for b in 0..blocks {
        for _ in 0..gates_per_block {
            let (g, q) = if rng.gen_bool(0.7) { random_fusable_gate(rng, n) } else { random_gate(rng, n) };
            c.gate(g, &q).unwrap();
        }
        // Make sure the ancilla is entangled with the system in every block.
        c.gate(GateKind::CRY(angle(rng)), &[rng.gen_range(0..n_sys), n_sys]).unwrap();
        c.measure(n_sys, b).unwrap();
        c.barrier_all().unwrap();
        c.reset(n_sys).unwrap();
        c.barrier_all().unwrap();
    }
    for q in 0..n {
        c.measure(q, r + q).unwrap();
    }
    c
}

/// Dense post-selection reference for a filter-layout circuit: block
/// unitaries from the oracle, projector `|0⟩⟨0|` on the ancilla at each
/// mid-circuit measurement. Returns the success probability and the
/// normalized final state.
pub fn dense_postselect(c: &Circuit, ancilla: usize, initial: Option<&[Complex64]>) -> (f64, Vec<Complex64>) {
    let n = c.n_qubits();
    let mut psi = match initial {
        Some(v) => v.to_vec(),
        None => {
            let mut v = vec![ZERO; 1 << n];
            v[0] = Complex64::new(1.0, 0.0);
            v
        }
    };
    let insts = c.instructions();
    let final_start = insts
        .iter()
        .rposition(|i| !matches!(i, Instruction::Measure { .. } | Instruction::Barrier { .. }))
        .map_or(0, |k| k + 1);
    let mut block = c.clone_header();
    for inst in &insts[..final_start] {
        match inst {
            Instruction::Gate { .. } => block.push(inst.clone()).unwrap(),
            Instruction::Barrier { .. } => {}
            Instruction::Measure { qubit, .. } => {
                assert_eq!(*qubit, ancilla);
                psi = block.unitary().unwrap().matvec(&psi);
                block = c.clone_header();
                for (k, a) in psi.iter_mut().enumerate() {
                    if (k >> ancilla) & 1 == 1 {
                        *a = ZERO;
                    }
                }
            }
            // The ancilla was just projected onto |0⟩.
            Instruction::Reset { .. } => {}
        }
    }
    psi = block.unitary().unwrap().matvec(&psi);
    let p: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    let s = 1.0 / p.sqrt();
    (p, psi.into_iter().map(|a| a * s).collect())
}

/// Unitary part of a circuit applied to `|0…0⟩` densely.
pub fn dense_final_state(c: &Circuit) -> Vec<Complex64> {
    let mut psi = vec![ZERO; 1 << c.n_qubits()];
    psi[0] = Complex64::new(1.0, 0.0);
    c.unitary().unwrap().matvec(&psi)
}
