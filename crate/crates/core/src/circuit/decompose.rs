//! Rewrites fused gates into qelib1 gates, exact up to a global phase.

#[cfg(test)]
use num_complex::Complex64;

use super::GateKind;
use crate::linalg::{Mat2, Mat4};

/// Splits a 2x2 unitary as `e^{iγ} U3(θ, φ, λ)`; returns `(γ, θ, φ, λ)`.
fn u3_angles(m: &Mat2) -> (f64, f64, f64, f64) {
    let (c, s) = (m[0][0].norm(), m[1][0].norm());
    let theta = 2.0 * s.atan2(c);
    let gamma = m[0][0].arg();
    let phi = m[1][0].arg() - gamma;
    // Take the remaining phase from the larger of the two entries it affects.
    let lambda = if c >= s {
        m[1][1].arg() - gamma - phi
    } else {
        (-m[0][1]).arg() - gamma
    };
    (gamma, theta, phi, lambda)
}

/// A `C1` payload as a `u3` gate, dropping the global phase.
pub fn decompose_c1(m: &Mat2) -> GateKind {
    let (_, theta, phi, lambda) = u3_angles(m);
    GateKind::U3(theta, phi, lambda)
}

/// Basis states of two qubits in Gray-code order: neighbours differ in one bit.
const GRAY: [usize; 4] = [0, 1, 3, 2];

/// A `C2` payload as a gate list over local operands `0` and `1`, in
/// application order. The unitary is reduced to a diagonal by two-level
/// rotations between Gray-adjacent basis states; each rotation becomes a
/// `cu3` (with `x` conjugation when it acts on the control-0 subspace) and
/// the diagonal becomes `u1`, `u1`, `cu1`.
pub fn decompose_c2(m: &Mat4) -> Vec<(GateKind, Vec<usize>)> {
    let mut work = *m;
    // Each entry is the two-level unitary G (on the row pair) applied from the left.
    let mut rotations: Vec<(usize, usize, Mat2)> = Vec::new();
    for col_pos in 0..3 {
        let col = GRAY[col_pos];
        for p in (col_pos..3).rev() {
            let (r1, r2) = (GRAY[p], GRAY[p + 1]);
            let (a, b) = (work[r1][col], work[r2][col]);
            let nu = (a.norm_sqr() + b.norm_sqr()).sqrt();
            if b.norm() <= 1e-15 || nu == 0.0 {
                continue;
            }
            let g = [[a.conj() / nu, b.conj() / nu], [-b / nu, a / nu]];
            for c in 0..4 {
                let (x, y) = (work[r1][c], work[r2][c]);
                work[r1][c] = g[0][0] * x + g[0][1] * y;
                work[r2][c] = g[1][0] * x + g[1][1] * y;
            }
            rotations.push((r1, r2, g));
        }
    }

    let mut out = Vec::new();
    let theta: Vec<f64> = (0..4).map(|k| work[k][k].arg()).collect();
    let a = theta[1] - theta[0];
    let b = theta[2] - theta[0];
    let c = theta[3] - theta[0] - a - b;
    out.push((GateKind::U1(a), vec![0]));
    out.push((GateKind::U1(b), vec![1]));
    out.push((GateKind::CU1(c), vec![0, 1]));

    // m = G_1† ... G_K† D, so after D the adjoints run from the last rotation back.
    for (r1, r2, g) in rotations.into_iter().rev() {
        let adj = [
            [g[0][0].conj(), g[1][0].conj()],
            [g[0][1].conj(), g[1][1].conj()],
        ];
        let target = (r1 ^ r2).trailing_zeros() as usize;
        let control = 1 - target;
        let control_value = (r1 >> control) & 1;
        // Orient the block as (target=0, target=1).
        let v = if (r1 >> target) & 1 == 0 {
            adj
        } else {
            [[adj[1][1], adj[1][0]], [adj[0][1], adj[0][0]]]
        };
        let (gamma, th, phi, lambda) = u3_angles(&v);
        if control_value == 0 {
            out.push((GateKind::X, vec![control]));
        }
        out.push((GateKind::CU3(th, phi, lambda), vec![control, target]));
        if gamma != 0.0 {
            out.push((GateKind::U1(gamma), vec![control]));
        }
        if control_value == 0 {
            out.push((GateKind::X, vec![control]));
        }
    }
    out
}

/// Phase-insensitive distance between two matrices of equal size.
#[cfg(test)]
pub(crate) fn distance_up_to_phase(a: &crate::linalg::DenseMatrix, b: &crate::linalg::DenseMatrix) -> f64 {
    let mut overlap = Complex64::new(0.0, 0.0);
    for (x, y) in a.data().iter().zip(b.data()) {
        overlap += x.conj() * y;
    }
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.scale(phase).max_abs_diff(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{u3, Circuit};
    use crate::linalg::{mat4_identity, DenseMatrix};
    use proptest::prelude::*;

    fn random_unitary(dim: usize, seed: &[f64]) -> DenseMatrix {
        let mut h = DenseMatrix::zeros(dim);
        let mut k = 0;
        for r in 0..dim {
            for c in r..dim {
                let re = seed[k % seed.len()] * (1.0 + k as f64).sin();
                let im = if r == c { 0.0 } else { seed[(k + 1) % seed.len()] * (2.0 + k as f64).cos() };
                h[(r, c)] = Complex64::new(re, im);
                h[(c, r)] = Complex64::new(re, -im);
                k += 1;
            }
        }
        h.hermitian_function(|x| Complex64::from_polar(1.0, 3.0 * x)).unwrap()
    }

    fn rebuild(gates: &[(GateKind, Vec<usize>)]) -> DenseMatrix {
        let mut c = Circuit::new(2);
        for (g, q) in gates {
            c.gate(g.clone(), q).unwrap();
        }
        c.unitary().unwrap()
    }

    #[test]
    fn c1_special_cases() {
        let cases = [
            u3(0.0, 0.0, 0.0),
            u3(std::f64::consts::PI, 0.3, -1.2),
            u3(1e-9, 2.0, 1.0),
            u3(0.7, -0.4, 2.5),
        ];
        for m in cases {
            let GateKind::U3(t, p, l) = decompose_c1(&m) else { panic!() };
            let back = DenseMatrix::from_mat2(&u3(t, p, l));
            assert!(distance_up_to_phase(&back, &DenseMatrix::from_mat2(&m)) < 1e-12);
        }
    }

    #[test]
    fn c2_identity_and_permutations() {
        let id = mat4_identity();
        assert!(distance_up_to_phase(&rebuild(&decompose_c2(&id)), &DenseMatrix::from_mat4(&id)) < 1e-12);
        let swap = GateKind::SWAP.matrix_2q().unwrap();
        let back = rebuild(&decompose_c2(&swap));
        assert!(distance_up_to_phase(&back, &DenseMatrix::from_mat4(&swap)) < 1e-12);
    }

    proptest! {
        #[test]
        fn c1_round_trip(seed in proptest::collection::vec(-2.0f64..2.0, 4)) {
            let m = random_unitary(2, &seed).to_mat2();
            let GateKind::U3(t, p, l) = decompose_c1(&m) else { panic!() };
            let back = DenseMatrix::from_mat2(&u3(t, p, l));
            prop_assert!(distance_up_to_phase(&back, &DenseMatrix::from_mat2(&m)) < 1e-11);
        }

        #[test]
        fn c2_round_trip(seed in proptest::collection::vec(-2.0f64..2.0, 10)) {
            let m = random_unitary(4, &seed);
            let back = rebuild(&decompose_c2(&m.to_mat4()));
            prop_assert!(distance_up_to_phase(&back, &m) < 1e-10);
        }
    }
}
