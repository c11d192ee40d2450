//! Gate fusion: merge 1-qubit runs, absorb 1-qubit gates into neighbouring
//! 2-qubit gates, put every 2-qubit gate on ascending qubits, then merge runs
//! of 2-qubit gates on the same pair.
//!
//! Only adjacency along each qubit's own instruction timeline is used; gates
//! on disjoint qubits are never reordered. Measures, resets, barriers and
//! gates on three or more qubits block fusion on the qubits they touch.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, GateKind, Instruction};
use crate::linalg::{lift_to_pair, mat2_mul, mat4_mul, swap_roles, Mat2, Mat4};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassCount {
    pub name: String,
    pub gates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionStats {
    pub gates_before: usize,
    pub gates_after: usize,
    /// Gate count after each pass, in pipeline order.
    pub per_pass: Vec<PassCount>,
    /// `gates_before / gates_after`, or 1 for an empty result.
    pub reduction_factor: f64,
}

/// Instructions linked per qubit: for node `i`, `links[i][k]` holds the
/// previous and next node on the qubit in slot `k` of that instruction.
struct Timeline {
    insts: Vec<Option<Instruction>>,
    links: Vec<Vec<(Option<usize>, Option<usize>)>>,
    template: Circuit,
}

impl Timeline {
    fn new(circuit: &Circuit) -> Self {
        let insts: Vec<Option<Instruction>> = circuit.instructions().iter().cloned().map(Some).collect();
        let mut links: Vec<Vec<(Option<usize>, Option<usize>)>> = insts
            .iter()
            .map(|i| vec![(None, None); i.as_ref().unwrap().qubits().len()])
            .collect();
        let mut last: Vec<Option<(usize, usize)>> = vec![None; circuit.n_qubits()];
        for (i, inst) in insts.iter().enumerate() {
            for (k, &q) in inst.as_ref().unwrap().qubits().iter().enumerate() {
                if let Some((p, pk)) = last[q] {
                    links[p][pk].1 = Some(i);
                    links[i][k].0 = Some(p);
                }
                last[q] = Some((i, k));
            }
        }
        Self {
            insts,
            links,
            template: circuit.clone_header(),
        }
    }

    fn inst(&self, i: usize) -> &Instruction {
        self.insts[i].as_ref().expect("live node")
    }

    fn slot(&self, i: usize, q: usize) -> usize {
        self.inst(i).qubits().iter().position(|&x| x == q).expect("qubit on node")
    }

    fn next_on(&self, i: usize, q: usize) -> Option<usize> {
        self.links[i][self.slot(i, q)].1
    }

    fn prev_on(&self, i: usize, q: usize) -> Option<usize> {
        self.links[i][self.slot(i, q)].0
    }

    fn remove(&mut self, i: usize) {
        let qubits = self.inst(i).qubits().to_vec();
        for (k, q) in qubits.into_iter().enumerate() {
            let (p, n) = self.links[i][k];
            if let Some(p) = p {
                let s = self.slot(p, q);
                self.links[p][s].1 = n;
            }
            if let Some(n) = n {
                let s = self.slot(n, q);
                self.links[n][s].0 = p;
            }
        }
        self.insts[i] = None;
    }

    /// Replaces a node's instruction with one on the same qubits in the same order.
    fn replace(&mut self, i: usize, inst: Instruction) {
        debug_assert_eq!(self.inst(i).qubits(), inst.qubits());
        self.insts[i] = Some(inst);
    }

    fn into_circuit(self) -> Circuit {
        let insts = self.insts.into_iter().flatten().collect();
        self.template
            .with_instructions(insts)
            .expect("fusion preserves validity")
    }
}

fn one_qubit(inst: &Instruction) -> Option<(Mat2, usize)> {
    match inst {
        Instruction::Gate { kind, qubits } if qubits.len() == 1 => Some((kind.matrix_1q()?, qubits[0])),
        _ => None,
    }
}

fn two_qubit(inst: &Instruction) -> Option<(Mat4, [usize; 2])> {
    match inst {
        Instruction::Gate { kind, qubits } if qubits.len() == 2 => Some((kind.matrix_2q()?, [qubits[0], qubits[1]])),
        _ => None,
    }
}

fn c1(m: Mat2, q: usize) -> Instruction {
    Instruction::Gate {
        kind: GateKind::C1(m),
        qubits: vec![q],
    }
}

fn c2(m: Mat4, qubits: [usize; 2]) -> Instruction {
    Instruction::Gate {
        kind: GateKind::C2(Box::new(m)),
        qubits: qubits.to_vec(),
    }
}

/// Collapses each run of 1-qubit gates on a qubit into one `C1` at the
/// position of the run's first gate; later gates multiply on the left.
pub fn merge_1q(circuit: &Circuit) -> Circuit {
    let mut out: Vec<Instruction> = Vec::with_capacity(circuit.len());
    let mut open: Vec<Option<usize>> = vec![None; circuit.n_qubits()];
    for inst in circuit.instructions() {
        match one_qubit(inst) {
            Some((m, q)) => match open[q] {
                Some(k) => {
                    let Instruction::Gate { kind: GateKind::C1(acc), .. } = &mut out[k] else {
                        unreachable!("open run holds a C1")
                    };
                    *acc = mat2_mul(&m, acc);
                }
                None => {
                    open[q] = Some(out.len());
                    out.push(c1(m, q));
                }
            },
            None => {
                for &q in inst.qubits() {
                    open[q] = None;
                }
                out.push(inst.clone());
            }
        }
    }
    circuit.with_instructions(out).expect("fusion preserves validity")
}

/// Folds each 1-qubit gate into an adjacent 2-qubit gate on its qubit,
/// preferring the next one, repeated until nothing changes.
pub fn absorb_1q(circuit: &Circuit) -> Circuit {
    let mut tl = Timeline::new(circuit);
    loop {
        let mut changed = false;
        for i in 0..tl.insts.len() {
            let Some(inst) = &tl.insts[i] else { continue };
            let Some((v, q)) = one_qubit(inst) else { continue };
            let target = |j: Option<usize>| j.and_then(|j| two_qubit(tl.inst(j)).map(|(u, qs)| (j, u, qs)));
            if let Some((j, u, qs)) = target(tl.next_on(i, q)) {
                let lifted = lift_to_pair(&v, tl.slot(j, q));
                tl.replace(j, c2(mat4_mul(&u, &lifted), qs));
            } else if let Some((j, u, qs)) = target(tl.prev_on(i, q)) {
                let lifted = lift_to_pair(&v, tl.slot(j, q));
                tl.replace(j, c2(mat4_mul(&lifted, &u), qs));
            } else {
                continue;
            }
            tl.remove(i);
            changed = true;
        }
        if !changed {
            return tl.into_circuit();
        }
    }
}

/// Rewrites every 2-qubit gate whose first operand is the higher qubit as a
/// `C2` on ascending qubits, conjugating its matrix by SWAP.
pub fn normalize_2q_order(circuit: &Circuit) -> Circuit {
    let out = circuit
        .instructions()
        .iter()
        .map(|inst| match two_qubit(inst) {
            Some((m, [a, b])) if a > b => c2(swap_roles(&m), [b, a]),
            _ => inst.clone(),
        })
        .collect();
    circuit.with_instructions(out).expect("fusion preserves validity")
}

/// Turns every 2-qubit gate into a `C2` and merges consecutive ones on the
/// same ordered pair. Expects ascending operand order.
pub fn fuse_2q(circuit: &Circuit) -> Circuit {
    let mut tl = Timeline::new(circuit);
    for i in 0..tl.insts.len() {
        let Some(inst) = &tl.insts[i] else { continue };
        let Some((u, [a, b])) = two_qubit(inst) else { continue };
        let next = tl.next_on(i, a);
        let merged = next.filter(|&j| tl.next_on(i, b) == Some(j)).and_then(|j| {
            let (v, qs) = two_qubit(tl.inst(j))?;
            (qs == [a, b]).then_some((j, v))
        });
        match merged {
            Some((j, v)) => {
                tl.replace(j, c2(mat4_mul(&v, &u), [a, b]));
                tl.remove(i);
            }
            None => {
                if !matches!(inst, Instruction::Gate { kind: GateKind::C2(_), .. }) {
                    tl.replace(i, c2(u, [a, b]));
                }
            }
        }
    }
    tl.into_circuit()
}

/// Runs the four passes in order and reports gate counts.
pub fn fuse_pipeline(circuit: &Circuit) -> (Circuit, FusionStats) {
    let passes: [(&str, fn(&Circuit) -> Circuit); 4] = [
        ("merge_1q", merge_1q),
        ("absorb_1q", absorb_1q),
        ("normalize_2q_order", normalize_2q_order),
        ("fuse_2q", fuse_2q),
    ];
    let gates_before = circuit.gate_count();
    let mut current = circuit.clone();
    let mut per_pass = Vec::with_capacity(passes.len());
    for (name, pass) in passes {
        current = pass(&current);
        per_pass.push(PassCount {
            name: name.to_string(),
            gates: current.gate_count(),
        });
    }
    let gates_after = current.gate_count();
    let reduction_factor = if gates_after == 0 {
        1.0
    } else {
        gates_before as f64 / gates_after as f64
    };
    let stats = FusionStats {
        gates_before,
        gates_after,
        per_pass,
        reduction_factor,
    };
    (current, stats)
}
