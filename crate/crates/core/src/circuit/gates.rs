//! The qelib1 gate set plus the general fused gates `C1` and `C2`.
//!
//! Matrices are little-endian in the gate's own operand order: operand `j`
//! of an instruction is bit `j` of the local basis index. For controlled
//! gates the controls come first, so `CX` on `[c, t]` flips bit 1 when bit 0
//! is set.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::linalg::{DenseMatrix, Mat2, Mat4, I, ONE, ZERO};

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    U3(f64, f64, f64),
    U2(f64, f64),
    U1(f64),
    CX,
    ID,
    X,
    Y,
    Z,
    H,
    S,
    SDG,
    T,
    TDG,
    RX(f64),
    RY(f64),
    RZ(f64),
    CZ,
    CY,
    SWAP,
    CH,
    CCX,
    CSWAP,
    CRX(f64),
    CRY(f64),
    CRZ(f64),
    CU1(f64),
    CU3(f64, f64, f64),
    RXX(f64),
    RZZ(f64),
    RCCX,
    RC3X,
    C3X,
    C3SQRTX,
    C4X,
    /// General fused 1-qubit gate.
    C1(Mat2),
    /// General fused 2-qubit gate.
    C2(Box<Mat4>),
}

/// Names accepted by the parser, with operand and parameter counts.
const NAMED: &[(&str, usize, usize)] = &[
    ("u3", 1, 3),
    ("u2", 1, 2),
    ("u1", 1, 1),
    ("cx", 2, 0),
    ("id", 1, 0),
    ("x", 1, 0),
    ("y", 1, 0),
    ("z", 1, 0),
    ("h", 1, 0),
    ("s", 1, 0),
    ("sdg", 1, 0),
    ("t", 1, 0),
    ("tdg", 1, 0),
    ("rx", 1, 1),
    ("ry", 1, 1),
    ("rz", 1, 1),
    ("cz", 2, 0),
    ("cy", 2, 0),
    ("swap", 2, 0),
    ("ch", 2, 0),
    ("ccx", 3, 0),
    ("cswap", 3, 0),
    ("crx", 2, 1),
    ("cry", 2, 1),
    ("crz", 2, 1),
    ("cu1", 2, 1),
    ("cu3", 2, 3),
    ("rxx", 2, 1),
    ("rzz", 2, 1),
    ("rccx", 3, 0),
    ("rc3x", 4, 0),
    ("c3x", 4, 0),
    ("c3sqrtx", 4, 0),
    ("c4x", 5, 0),
];

impl GateKind {
    /// Looks up a qelib1 name (plus the builtin `U`/`CX` spellings).
    /// Returns `(num_qubits, num_params)`.
    pub fn signature(name: &str) -> Option<(usize, usize)> {
        let canonical = canonical_name(name)?;
        NAMED
            .iter()
            .find(|(n, _, _)| *n == canonical)
            .map(|&(_, q, p)| (q, p))
    }

    /// Builds a gate from its QASM name; `params.len()` must match the signature.
    pub fn from_name(name: &str, params: &[f64]) -> Option<Self> {
        let canonical = canonical_name(name)?;
        let (_, _, np) = *NAMED.iter().find(|(n, _, _)| *n == canonical)?;
        if params.len() != np {
            return None;
        }
        let p = |i: usize| params[i];
        Some(match canonical {
            "u3" => Self::U3(p(0), p(1), p(2)),
            "u2" => Self::U2(p(0), p(1)),
            "u1" => Self::U1(p(0)),
            "cx" => Self::CX,
            "id" => Self::ID,
            "x" => Self::X,
            "y" => Self::Y,
            "z" => Self::Z,
            "h" => Self::H,
            "s" => Self::S,
            "sdg" => Self::SDG,
            "t" => Self::T,
            "tdg" => Self::TDG,
            "rx" => Self::RX(p(0)),
            "ry" => Self::RY(p(0)),
            "rz" => Self::RZ(p(0)),
            "cz" => Self::CZ,
            "cy" => Self::CY,
            "swap" => Self::SWAP,
            "ch" => Self::CH,
            "ccx" => Self::CCX,
            "cswap" => Self::CSWAP,
            "crx" => Self::CRX(p(0)),
            "cry" => Self::CRY(p(0)),
            "crz" => Self::CRZ(p(0)),
            "cu1" => Self::CU1(p(0)),
            "cu3" => Self::CU3(p(0), p(1), p(2)),
            "rxx" => Self::RXX(p(0)),
            "rzz" => Self::RZZ(p(0)),
            "rccx" => Self::RCCX,
            "rc3x" => Self::RC3X,
            "c3x" => Self::C3X,
            "c3sqrtx" => Self::C3SQRTX,
            "c4x" => Self::C4X,
            _ => return None,
        })
    }

    /// The qelib1 name, or `None` for the fused gates.
    pub fn qasm_name(&self) -> Option<&'static str> {
        Some(match self {
            Self::U3(..) => "u3",
            Self::U2(..) => "u2",
            Self::U1(_) => "u1",
            Self::CX => "cx",
            Self::ID => "id",
            Self::X => "x",
            Self::Y => "y",
            Self::Z => "z",
            Self::H => "h",
            Self::S => "s",
            Self::SDG => "sdg",
            Self::T => "t",
            Self::TDG => "tdg",
            Self::RX(_) => "rx",
            Self::RY(_) => "ry",
            Self::RZ(_) => "rz",
            Self::CZ => "cz",
            Self::CY => "cy",
            Self::SWAP => "swap",
            Self::CH => "ch",
            Self::CCX => "ccx",
            Self::CSWAP => "cswap",
            Self::CRX(_) => "crx",
            Self::CRY(_) => "cry",
            Self::CRZ(_) => "crz",
            Self::CU1(_) => "cu1",
            Self::CU3(..) => "cu3",
            Self::RXX(_) => "rxx",
            Self::RZZ(_) => "rzz",
            Self::RCCX => "rccx",
            Self::RC3X => "rc3x",
            Self::C3X => "c3x",
            Self::C3SQRTX => "c3sqrtx",
            Self::C4X => "c4x",
            Self::C1(_) | Self::C2(_) => return None,
        })
    }

    pub fn num_qubits(&self) -> usize {
        match self {
            Self::C1(_) => 1,
            Self::C2(_) => 2,
            other => {
                let name = other.qasm_name().expect("named gate");
                NAMED.iter().find(|(n, _, _)| *n == name).unwrap().1
            }
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Self::U3(a, b, c) | Self::CU3(a, b, c) => vec![a, b, c],
            Self::U2(a, b) => vec![a, b],
            Self::U1(a)
            | Self::RX(a)
            | Self::RY(a)
            | Self::RZ(a)
            | Self::CRX(a)
            | Self::CRY(a)
            | Self::CRZ(a)
            | Self::CU1(a)
            | Self::RXX(a)
            | Self::RZZ(a) => vec![a],
            _ => vec![],
        }
    }

    /// Dense little-endian matrix of size `2^k` for a `k`-qubit gate.
    pub fn matrix(&self) -> DenseMatrix {
        match self {
            Self::C1(m) => DenseMatrix::from_mat2(m),
            Self::C2(m) => DenseMatrix::from_mat4(m),
            _ => match self.num_qubits() {
                1 => DenseMatrix::from_mat2(&self.matrix_1q().unwrap()),
                2 => DenseMatrix::from_mat4(&self.matrix_2q().unwrap()),
                _ => self.matrix_multi(),
            },
        }
    }

    /// 2x2 matrix for 1-qubit gates.
    pub fn matrix_1q(&self) -> Option<Mat2> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        Some(match *self {
            Self::U3(theta, phi, lambda) => u3(theta, phi, lambda),
            Self::U2(phi, lambda) => u3(FRAC_PI_2, phi, lambda),
            Self::U1(lambda) => phase(lambda),
            Self::ID => [[ONE, ZERO], [ZERO, ONE]],
            Self::X => [[ZERO, ONE], [ONE, ZERO]],
            Self::Y => [[ZERO, -I], [I, ZERO]],
            Self::Z => [[ONE, ZERO], [ZERO, -ONE]],
            Self::H => {
                let h = c(FRAC_1_SQRT_2, 0.0);
                [[h, h], [h, -h]]
            }
            Self::S => [[ONE, ZERO], [ZERO, I]],
            Self::SDG => [[ONE, ZERO], [ZERO, -I]],
            Self::T => phase(FRAC_PI_4),
            Self::TDG => phase(-FRAC_PI_4),
            Self::RX(theta) => rx(theta),
            Self::RY(theta) => ry(theta),
            Self::RZ(theta) => rz(theta),
            Self::C1(m) => m,
            _ => return None,
        })
    }

    /// 4x4 matrix for 2-qubit gates (operand 0 = low bit).
    pub fn matrix_2q(&self) -> Option<Mat4> {
        Some(match self {
            Self::CX => controlled(&Self::X.matrix_1q().unwrap()),
            Self::CZ => controlled(&Self::Z.matrix_1q().unwrap()),
            Self::CY => controlled(&Self::Y.matrix_1q().unwrap()),
            Self::CH => controlled(&Self::H.matrix_1q().unwrap()),
            Self::SWAP => {
                let mut m = [[ZERO; 4]; 4];
                m[0][0] = ONE;
                m[1][2] = ONE;
                m[2][1] = ONE;
                m[3][3] = ONE;
                m
            }
            Self::CRX(t) => controlled(&rx(*t)),
            Self::CRY(t) => controlled(&ry(*t)),
            Self::CRZ(t) => controlled(&rz(*t)),
            Self::CU1(l) => controlled(&phase(*l)),
            Self::CU3(t, p, l) => controlled(&u3(*t, *p, *l)),
            Self::RXX(theta) => {
                // exp(-i θ/2 X⊗X)
                let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
                let cc = Complex64::new(c, 0.0);
                let ms = Complex64::new(0.0, -s);
                let mut m = [[ZERO; 4]; 4];
                for k in 0..4 {
                    m[k][k] = cc;
                    m[k][3 - k] = ms;
                }
                m
            }
            Self::RZZ(theta) => {
                // exp(-i θ/2 Z⊗Z)
                let a = Complex64::from_polar(1.0, -theta / 2.0);
                let b = Complex64::from_polar(1.0, theta / 2.0);
                let mut m = [[ZERO; 4]; 4];
                m[0][0] = a;
                m[1][1] = b;
                m[2][2] = b;
                m[3][3] = a;
                m
            }
            Self::C2(m) => **m,
            _ => return None,
        })
    }

    fn matrix_multi(&self) -> DenseMatrix {
        let x = Self::X.matrix_1q().unwrap();
        match self {
            Self::CCX => multi_controlled(&x, 2),
            Self::C3X => multi_controlled(&x, 3),
            Self::C4X => multi_controlled(&x, 4),
            Self::C3SQRTX => {
                let a = Complex64::new(0.5, 0.5);
                let b = Complex64::new(0.5, -0.5);
                multi_controlled(&[[a, b], [b, a]], 3)
            }
            Self::CSWAP => {
                let mut m = DenseMatrix::zeros(8);
                for idx in 0..8usize {
                    let out = if idx & 1 == 1 {
                        let (a, b) = ((idx >> 1) & 1, (idx >> 2) & 1);
                        1 | (b << 1) | (a << 2)
                    } else {
                        idx
                    };
                    m[(out, idx)] = ONE;
                }
                m
            }
            Self::RCCX => {
                // qelib1: u2(0,pi) c; u1(pi/4) c; cx b,c; u1(-pi/4) c; cx a,c;
                //         u1(pi/4) c; cx b,c; u1(-pi/4) c; u2(0,pi) c;
                let (a, b, c) = (0, 1, 2);
                compose(
                    3,
                    &[
                        (Self::U2(0.0, PI), vec![c]),
                        (Self::U1(FRAC_PI_4), vec![c]),
                        (Self::CX, vec![b, c]),
                        (Self::U1(-FRAC_PI_4), vec![c]),
                        (Self::CX, vec![a, c]),
                        (Self::U1(FRAC_PI_4), vec![c]),
                        (Self::CX, vec![b, c]),
                        (Self::U1(-FRAC_PI_4), vec![c]),
                        (Self::U2(0.0, PI), vec![c]),
                    ],
                )
            }
            Self::RC3X => {
                let (a, b, c, d) = (0, 1, 2, 3);
                compose(
                    4,
                    &[
                        (Self::U2(0.0, PI), vec![d]),
                        (Self::U1(FRAC_PI_4), vec![d]),
                        (Self::CX, vec![c, d]),
                        (Self::U1(-FRAC_PI_4), vec![d]),
                        (Self::U2(0.0, PI), vec![d]),
                        (Self::CX, vec![a, d]),
                        (Self::U1(FRAC_PI_4), vec![d]),
                        (Self::CX, vec![b, d]),
                        (Self::U1(-FRAC_PI_4), vec![d]),
                        (Self::CX, vec![a, d]),
                        (Self::U1(FRAC_PI_4), vec![d]),
                        (Self::CX, vec![b, d]),
                        (Self::U1(-FRAC_PI_4), vec![d]),
                        (Self::U2(0.0, PI), vec![d]),
                        (Self::U1(FRAC_PI_4), vec![d]),
                        (Self::CX, vec![c, d]),
                        (Self::U1(-FRAC_PI_4), vec![d]),
                        (Self::U2(0.0, PI), vec![d]),
                    ],
                )
            }
            other => panic!("{other:?} is not a multi-qubit gate"),
        }
    }
}

fn canonical_name(name: &str) -> Option<&'static str> {
    let lower = match name {
        "U" => "u3",
        "CX" => "cx",
        "c3xsqrtx" => "c3sqrtx",
        other => return NAMED.iter().map(|(n, _, _)| *n).find(|n| *n == other),
    };
    Some(lower)
}

pub fn u3(theta: f64, phi: f64, lambda: f64) -> Mat2 {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    [
        [
            Complex64::new(c, 0.0),
            -Complex64::from_polar(s, lambda),
        ],
        [
            Complex64::from_polar(s, phi),
            Complex64::from_polar(c, phi + lambda),
        ],
    ]
}

pub fn phase(lambda: f64) -> Mat2 {
    [[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, lambda)]]
}

pub fn rx(theta: f64) -> Mat2 {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    [
        [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
        [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
    ]
}

pub fn ry(theta: f64) -> Mat2 {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

pub fn rz(theta: f64) -> Mat2 {
    [
        [Complex64::from_polar(1.0, -theta / 2.0), ZERO],
        [ZERO, Complex64::from_polar(1.0, theta / 2.0)],
    ]
}

/// Control on operand 0 (low bit), target on operand 1.
fn controlled(u: &Mat2) -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    m[0][0] = ONE;
    m[2][2] = ONE;
    // control set: indices 1 (target 0) and 3 (target 1)
    m[1][1] = u[0][0];
    m[1][3] = u[0][1];
    m[3][1] = u[1][0];
    m[3][3] = u[1][1];
    m
}

/// Operands `0..controls` are controls; the target is the last operand.
fn multi_controlled(u: &Mat2, controls: usize) -> DenseMatrix {
    let dim = 1usize << (controls + 1);
    let cmask = (1usize << controls) - 1;
    let tbit = 1usize << controls;
    let mut m = DenseMatrix::zeros(dim);
    for idx in 0..dim {
        if idx & cmask == cmask {
            let t = (idx & tbit) >> controls;
            let base = idx & !tbit;
            m[(base, idx)] = u[0][t];
            m[(base | tbit, idx)] = u[1][t];
        } else {
            m[(idx, idx)] = ONE;
        }
    }
    m
}

/// Product of a gate sequence on a `width`-qubit register (first gate applied first).
fn compose(width: usize, seq: &[(GateKind, Vec<usize>)]) -> DenseMatrix {
    seq.iter().fold(DenseMatrix::identity(1 << width), |acc, (g, qs)| {
        g.matrix().embed(qs, width).matmul(&acc)
    })
}
