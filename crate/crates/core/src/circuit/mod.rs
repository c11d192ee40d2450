//! Circuit representation and the OpenQASM 2.0 frontend.

mod decompose;
mod gates;
mod qasm;

use thiserror::Error;

pub use decompose::{decompose_c1, decompose_c2};
pub use gates::{phase, rx, ry, rz, u3, GateKind};
pub use qasm::{emit_qasm, parse_qasm, EmitOptions, QasmError};

use crate::linalg::DenseMatrix;

/// Tolerance on `max|U†U - I|` for fused-gate payloads.
pub const PAYLOAD_UNITARITY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("qubit {qubit} out of range for {width}-qubit register")]
    QubitOutOfRange { qubit: usize, width: usize },
    #[error("classical bit {bit} out of range for {width} classical bits")]
    ClbitOutOfRange { bit: usize, width: usize },
    #[error("repeated qubit {0} in one instruction")]
    DuplicateQubit(usize),
    #[error("gate {gate} expects {expected} qubits, got {got}")]
    Arity {
        gate: String,
        expected: usize,
        got: usize,
    },
    #[error("fused gate payload is not unitary (deviation {0:e})")]
    NonUnitaryPayload(f64),
    #[error("duplicate register name {0:?}")]
    DuplicateRegister(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    Gate { kind: GateKind, qubits: Vec<usize> },
    Measure { qubit: usize, clbit: usize },
    Reset { qubit: usize },
    Barrier { qubits: Vec<usize> },
}

impl Instruction {
    pub fn gate(kind: GateKind, qubits: &[usize]) -> Self {
        Self::Gate {
            kind,
            qubits: qubits.to_vec(),
        }
    }

    pub fn qubits(&self) -> &[usize] {
        match self {
            Self::Gate { qubits, .. } | Self::Barrier { qubits } => qubits,
            Self::Measure { qubit, .. } | Self::Reset { qubit } => std::slice::from_ref(qubit),
        }
    }

    pub fn is_gate(&self) -> bool {
        matches!(self, Self::Gate { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalRegister {
    pub name: String,
    pub size: usize,
}

/// An ordered instruction list over one quantum register and any number of
/// classical registers. Classical bits are addressed by a global index that
/// runs through the registers in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    qreg_name: String,
    cregs: Vec<ClassicalRegister>,
    instructions: Vec<Instruction>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self::with_register_name(n_qubits, "q")
    }

    pub fn with_register_name(n_qubits: usize, qreg_name: &str) -> Self {
        Self {
            n_qubits,
            qreg_name: qreg_name.to_string(),
            cregs: Vec::new(),
            instructions: Vec::new(),
        }
    }

    /// Declares a classical register; returns the global index of its bit 0.
    pub fn add_creg(&mut self, name: &str, size: usize) -> Result<usize, CircuitError> {
        if name == self.qreg_name || self.cregs.iter().any(|r| r.name == name) {
            return Err(CircuitError::DuplicateRegister(name.to_string()));
        }
        let offset = self.n_clbits();
        self.cregs.push(ClassicalRegister {
            name: name.to_string(),
            size,
        });
        Ok(offset)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_clbits(&self) -> usize {
        self.cregs.iter().map(|r| r.size).sum()
    }

    pub fn qreg_name(&self) -> &str {
        &self.qreg_name
    }

    pub fn cregs(&self) -> &[ClassicalRegister] {
        &self.cregs
    }

    /// Global index of bit 0 of the named register.
    pub fn creg_offset(&self, name: &str) -> Option<(usize, usize)> {
        let mut offset = 0;
        for r in &self.cregs {
            if r.name == name {
                return Some((offset, r.size));
            }
            offset += r.size;
        }
        None
    }

    /// `(register name, local index)` for a global classical bit.
    pub fn clbit_location(&self, bit: usize) -> Option<(&str, usize)> {
        let mut offset = 0;
        for r in &self.cregs {
            if bit < offset + r.size {
                return Some((&r.name, bit - offset));
            }
            offset += r.size;
        }
        None
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn gate_count(&self) -> usize {
        self.instructions.iter().filter(|i| i.is_gate()).count()
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.instructions
            .iter()
            .filter(|i| matches!(i, Instruction::Gate { qubits, .. } if qubits.len() == 2))
            .count()
    }

    /// Validates and appends an instruction.
    pub fn push(&mut self, inst: Instruction) -> Result<(), CircuitError> {
        self.validate(&inst)?;
        self.instructions.push(inst);
        Ok(())
    }

    pub fn gate(&mut self, kind: GateKind, qubits: &[usize]) -> Result<(), CircuitError> {
        self.push(Instruction::gate(kind, qubits))
    }

    pub fn measure(&mut self, qubit: usize, clbit: usize) -> Result<(), CircuitError> {
        self.push(Instruction::Measure { qubit, clbit })
    }

    pub fn reset(&mut self, qubit: usize) -> Result<(), CircuitError> {
        self.push(Instruction::Reset { qubit })
    }

    pub fn barrier(&mut self, qubits: &[usize]) -> Result<(), CircuitError> {
        self.push(Instruction::Barrier {
            qubits: qubits.to_vec(),
        })
    }

    pub fn barrier_all(&mut self) -> Result<(), CircuitError> {
        let all: Vec<usize> = (0..self.n_qubits).collect();
        self.barrier(&all)
    }

    /// Returns a circuit with the same registers and a replacement instruction list.
    pub fn with_instructions(&self, instructions: Vec<Instruction>) -> Result<Self, CircuitError> {
        let mut out = Self {
            instructions: Vec::with_capacity(instructions.len()),
            ..self.clone_header()
        };
        for inst in instructions {
            out.push(inst)?;
        }
        Ok(out)
    }

    /// Same registers, no instructions.
    pub fn clone_header(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            qreg_name: self.qreg_name.clone(),
            cregs: self.cregs.clone(),
            instructions: Vec::new(),
        }
    }

    fn validate(&self, inst: &Instruction) -> Result<(), CircuitError> {
        let qs = inst.qubits();
        for (k, &q) in qs.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(CircuitError::QubitOutOfRange {
                    qubit: q,
                    width: self.n_qubits,
                });
            }
            if qs[..k].contains(&q) {
                return Err(CircuitError::DuplicateQubit(q));
            }
        }
        match inst {
            Instruction::Gate { kind, qubits } => {
                let expected = kind.num_qubits();
                if qubits.len() != expected {
                    return Err(CircuitError::Arity {
                        gate: kind.qasm_name().unwrap_or("fused").to_string(),
                        expected,
                        got: qubits.len(),
                    });
                }
                let payload_err = match kind {
                    GateKind::C1(m) => Some(DenseMatrix::from_mat2(m).unitarity_error()),
                    GateKind::C2(m) => Some(DenseMatrix::from_mat4(m).unitarity_error()),
                    _ => None,
                };
                if let Some(err) = payload_err {
                    if !(err <= PAYLOAD_UNITARITY_TOL) {
                        return Err(CircuitError::NonUnitaryPayload(err));
                    }
                }
            }
            Instruction::Measure { clbit, .. } => {
                if *clbit >= self.n_clbits() {
                    return Err(CircuitError::ClbitOutOfRange {
                        bit: *clbit,
                        width: self.n_clbits(),
                    });
                }
            }
            Instruction::Reset { .. } | Instruction::Barrier { .. } => {}
        }
        Ok(())
    }

    /// Dense unitary of the gate-only prefix; measures, resets and barriers are
    /// not allowed. Reference oracle for small circuits.
    pub fn unitary(&self) -> Option<DenseMatrix> {
        let mut acc = DenseMatrix::identity(1 << self.n_qubits);
        for inst in &self.instructions {
            match inst {
                Instruction::Gate { kind, qubits } => {
                    acc = kind.matrix().embed(qubits, self.n_qubits).matmul(&acc);
                }
                Instruction::Barrier { .. } => {}
                _ => return None,
            }
        }
        Some(acc)
    }
}
