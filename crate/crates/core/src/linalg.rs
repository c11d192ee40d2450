//! Small dense complex linear algebra: matrices used as reference oracles,
//! gate matrices of arbitrary width, and a Hermitian eigensolver.
//!
//! The eigensolver reduces a Hermitian matrix to real symmetric tridiagonal
//! form with complex Householder reflections, absorbs the remaining
//! off-diagonal phases into a diagonal unitary, and finishes with the
//! implicit QL iteration (EISPACK `tql2`). Cost is O(N^3) for an N x N
//! matrix; eigenvalues are returned in ascending order.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use thiserror::Error;

pub type Mat2 = [[Complex64; 2]; 2];
pub type Mat4 = [[Complex64; 4]; 4];

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("QL iteration did not converge")]
    NoConvergence,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| {
                    let z = self[(r, c)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row slices. Panics if the rows are ragged or not square.
    pub fn from_rows<R: AsRef<[Complex64]>>(rows: &[R]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            let row = row.as_ref();
            assert_eq!(row.len(), dim, "matrix must be square");
            data.extend_from_slice(row);
        }
        Self { dim, data }
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_mat2(m: &Mat2) -> Self {
        Self::from_rows(&[m[0], m[1]])
    }

    pub fn from_mat4(m: &Mat4) -> Self {
        Self::from_rows(&[m[0], m[1], m[2], m[3]])
    }

    pub fn to_mat2(&self) -> Mat2 {
        assert_eq!(self.dim, 2);
        [[self[(0, 0)], self[(0, 1)]], [self[(1, 0)], self[(1, 1)]]]
    }

    pub fn to_mat4(&self) -> Mat4 {
        assert_eq!(self.dim, 4);
        let mut out = [[ZERO; 4]; 4];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self[(r, c)];
            }
        }
        out
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let dst = &mut out.data[r * n..(r + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|r| {
                self.data[r * self.dim..(r + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(-ONE))
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!(self.dim, rhs.dim);
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max |U^dagger U - I| over all entries.
    pub fn unitarity_error(&self) -> f64 {
        self.adjoint()
            .matmul(self)
            .max_abs_diff(&Self::identity(self.dim))
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// Kronecker product `self ⊗ rhs`; `rhs` occupies the low-order index bits.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (a, b) = (self.dim, rhs.dim);
        let mut out = Self::zeros(a * b);
        for r1 in 0..a {
            for c1 in 0..a {
                let x = self[(r1, c1)];
                if x == ZERO {
                    continue;
                }
                for r2 in 0..b {
                    for c2 in 0..b {
                        out[(r1 * b + r2, c1 * b + c2)] = x * rhs[(r2, c2)];
                    }
                }
            }
        }
        out
    }

    /// Conjugates a 4x4 matrix by the SWAP permutation, exchanging the roles
    /// of its two local qubits.
    pub fn swap_qubit_roles(&self) -> Self {
        assert_eq!(self.dim, 4);
        let p = |i: usize| match i {
            1 => 2,
            2 => 1,
            x => x,
        };
        let mut out = Self::zeros(4);
        for r in 0..4 {
            for c in 0..4 {
                out[(p(r), p(c))] = self[(r, c)];
            }
        }
        out
    }

    /// Lifts a `2^k x 2^k` operator acting on `qubits` (local bit j = `qubits[j]`)
    /// into the full `2^n x 2^n` little-endian space.
    pub fn embed(&self, qubits: &[usize], n: usize) -> Self {
        let k = qubits.len();
        assert_eq!(self.dim, 1 << k);
        let full = 1usize << n;
        let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
        let local = |idx: usize| -> usize {
            qubits
                .iter()
                .enumerate()
                .map(|(j, &q)| ((idx >> q) & 1) << j)
                .sum()
        };
        let mut out = Self::zeros(full);
        for r in 0..full {
            let lr = local(r);
            let rest = r & !mask;
            for lc in 0..self.dim {
                let v = self[(lr, lc)];
                if v == ZERO {
                    continue;
                }
                let c = rest
                    | qubits
                        .iter()
                        .enumerate()
                        .map(|(j, &q)| ((lc >> j) & 1) << q)
                        .sum::<usize>();
                out[(r, c)] = v;
            }
        }
        out
    }

    /// Applies `f` to the spectrum of a Hermitian matrix: `V f(Λ) V†`.
    pub fn hermitian_function<F>(&self, f: F) -> Result<Self, LinalgError>
    where
        F: Fn(f64) -> Complex64,
    {
        let eig = hermitian_eigen(self)?;
        Ok(eig.function(f))
    }
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

pub fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            let mut acc = ZERO;
            for k in 0..4 {
                acc += a[r][k] * b[k][c];
            }
            out[r][c] = acc;
        }
    }
    out
}

pub fn mat2_identity() -> Mat2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

pub fn mat4_identity() -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    m
}

/// Conjugates a 4x4 matrix by the SWAP permutation (local indices 1 and 2).
pub fn swap_roles(m: &Mat4) -> Mat4 {
    const P: [usize; 4] = [0, 2, 1, 3];
    let mut out = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            out[P[r]][P[c]] = m[r][c];
        }
    }
    out
}

/// Lifts a 1-qubit matrix onto local slot `slot` (0 = low bit, 1 = high bit)
/// of a 2-qubit space.
pub fn lift_to_pair(v: &Mat2, slot: usize) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            let (rs, cs) = ((r >> slot) & 1, (c >> slot) & 1);
            let other = 1 - slot;
            if (r >> other) & 1 == (c >> other) & 1 {
                out[r][c] = v[rs][cs];
            }
        }
    }
    out
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Column `j` is the unit eigenvector for `values[j]`.
    pub vectors: DenseMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, j: usize) -> Vec<Complex64> {
        (0..self.vectors.dim()).map(|r| self.vectors[(r, j)]).collect()
    }

    /// `V f(Λ) V†`
    pub fn function<F>(&self, f: F) -> DenseMatrix
    where
        F: Fn(f64) -> Complex64,
    {
        let n = self.values.len();
        let fv: Vec<Complex64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = DenseMatrix::zeros(n);
        for r in 0..n {
            for c in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += self.vectors[(r, k)] * fv[k] * self.vectors[(c, k)].conj();
                }
                out[(r, c)] = acc;
            }
        }
        out
    }

    /// Coefficients `⟨v_j|ψ⟩` of a vector in the eigenbasis.
    pub fn coefficients(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let n = self.values.len();
        (0..n)
            .map(|j| (0..n).map(|r| self.vectors[(r, j)].conj() * psi[r]).sum())
            .collect()
    }

    /// Rebuilds `Σ_j c_j v_j`.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let n = self.values.len();
        (0..n)
            .map(|r| (0..n).map(|j| self.vectors[(r, j)] * coeffs[j]).sum())
            .collect()
    }
}

const HERMITIAN_TOL: f64 = 1e-9;

pub fn hermitian_eigen(a: &DenseMatrix) -> Result<HermitianEigen, LinalgError> {
    let n = a.dim();
    let scale = a.data.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let herr = a.hermiticity_error();
    if herr > HERMITIAN_TOL * scale {
        return Err(LinalgError::NotHermitian(herr));
    }
    if n == 0 {
        return Ok(HermitianEigen {
            values: vec![],
            vectors: DenseMatrix::zeros(0),
        });
    }

    let (diag, sub, q) = tridiagonalize(a);

    // Rotate the complex subdiagonal onto the non-negative real axis.
    let mut phases = vec![ONE; n];
    let mut e = vec![0.0; n];
    for i in 0..n - 1 {
        let s = sub[i];
        let r = s.norm();
        e[i + 1] = r;
        phases[i + 1] = if r > 0.0 { phases[i] * (s / r) } else { phases[i] };
    }

    let mut d = diag;
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tql2(&mut d, &mut e, &mut z, n)?;

    // vectors = Q · diag(phases) · Z
    let mut qd = q;
    for r in 0..n {
        for c in 0..n {
            qd[(r, c)] *= phases[c];
        }
    }
    let mut vectors = DenseMatrix::zeros(n);
    for r in 0..n {
        for k in 0..n {
            let a = qd[(r, k)];
            if a == ZERO {
                continue;
            }
            let zrow = &z[k * n..(k + 1) * n];
            for c in 0..n {
                vectors.data[r * n + c] += a * zrow[c];
            }
        }
    }
    Ok(HermitianEigen { values: d, vectors })
}

/// Householder reduction `A = Q T Q†`. Returns the real diagonal of `T`,
/// its complex subdiagonal `T[i+1, i]`, and `Q`.
fn tridiagonalize(a: &DenseMatrix) -> (Vec<f64>, Vec<Complex64>, DenseMatrix) {
    let n = a.dim();
    let mut a = a.clone();
    let mut q = DenseMatrix::identity(n);
    let mut v = vec![ZERO; n];
    let mut w = vec![ZERO; n];
    let mut qv = vec![ZERO; n];

    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let tail: f64 = (lo + 1..n).map(|i| a[(i, k)].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let x0 = a[(lo, k)];
        let xnorm = (tail + x0.norm_sqr()).sqrt();
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * xnorm;

        for i in lo..n {
            v[i] = a[(i, k)];
        }
        v[lo] -= alpha;
        let vnorm = (lo..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        for x in v[lo..n].iter_mut() {
            *x /= vnorm;
        }

        a[(lo, k)] = alpha;
        a[(k, lo)] = alpha.conj();
        for i in lo + 1..n {
            a[(i, k)] = ZERO;
            a[(k, i)] = ZERO;
        }

        // Trailing block: B <- B - 2 v w† - 2 w v† + 4 K v v†, with w = B v, K = v† w.
        for i in lo..n {
            let mut acc = ZERO;
            for j in lo..n {
                acc += a[(i, j)] * v[j];
            }
            w[i] = acc;
        }
        let kk: f64 = (lo..n).map(|i| (v[i].conj() * w[i]).re).sum();
        for i in lo..n {
            for j in lo..n {
                let upd = v[i] * w[j].conj() * 2.0 + w[i] * v[j].conj() * 2.0
                    - v[i] * v[j].conj() * (4.0 * kk);
                a[(i, j)] -= upd;
            }
        }

        // Q <- Q (I - 2 v v†)
        for r in 0..n {
            let mut acc = ZERO;
            for j in lo..n {
                acc += q[(r, j)] * v[j];
            }
            qv[r] = acc;
        }
        for r in 0..n {
            for j in lo..n {
                q[(r, j)] -= qv[r] * v[j].conj() * 2.0;
            }
        }
    }

    let diag = (0..n).map(|i| a[(i, i)].re).collect();
    let sub = (0..n.saturating_sub(1)).map(|i| a[(i + 1, i)]).collect();
    (diag, sub, q)
}

/// Implicit QL on a symmetric tridiagonal matrix; `e[i]` couples `i-1` and `i`.
/// `z` (row-major n x n) accumulates the rotations; columns are eigenvectors.
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize) -> Result<(), LinalgError> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 64 {
                    return Err(LinalgError::NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    for k in 0..n {
                        let zk = &mut z[k * n..(k + 1) * n];
                        h = zk[i + 1];
                        zk[i + 1] = s * zk[i] + c * h;
                        zk[i] = c * zk[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Selection sort keeps eigenvector columns paired with their values.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for row in 0..n {
                z.swap(row * n + i, row * n + k);
            }
        }
    }
    Ok(())
}

/// Pairwise summation over a fixed binary tree; the result depends only on
/// the input order, never on how the inputs were produced.
pub fn tree_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        len => {
            let mid = len.next_power_of_two() / 2;
            tree_sum(&values[..mid]) + tree_sum(&values[mid..])
        }
    }
}

pub fn tree_sum_complex(values: &[Complex64]) -> Complex64 {
    match values.len() {
        0 => ZERO,
        1 => values[0],
        len => {
            let mid = len.next_power_of_two() / 2;
            tree_sum_complex(&values[..mid]) + tree_sum_complex(&values[mid..])
        }
    }
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalized(a: &[Complex64]) -> Vec<Complex64> {
    let n = norm(a);
    a.iter().map(|z| z / n).collect()
}

/// `|⟨a|b⟩|` for unit vectors, i.e. fidelity-amplitude up to global phase.
pub fn overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
    inner(a, b).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    fn det(m: &DenseMatrix) -> Complex64 {
        let n = m.dim();
        let mut a = m.clone();
        let mut det = ONE;
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm()))
                .unwrap();
            if a[(piv, col)].norm() == 0.0 {
                return ZERO;
            }
            if piv != col {
                for j in 0..n {
                    let t = a[(piv, j)];
                    a[(piv, j)] = a[(col, j)];
                    a[(col, j)] = t;
                }
                det = -det;
            }
            det *= a[(col, col)];
            for r in col + 1..n {
                let f = a[(r, col)] / a[(col, col)];
                for j in col..n {
                    let v = a[(col, j)];
                    a[(r, j)] -= f * v;
                }
            }
        }
        det
    }

    fn random_hermitian(n: usize, seed: u64) -> DenseMatrix {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut m = DenseMatrix::zeros(n);
        for r in 0..n {
            m[(r, r)] = c(next(), 0.0);
            for cc in r + 1..n {
                let z = c(next(), next());
                m[(r, cc)] = z;
                m[(cc, r)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn eigenvalues_are_roots_of_characteristic_polynomial() {
        for (dim, seed) in [(2, 1), (4, 2), (8, 3), (4, 4), (8, 5)] {
            let a = random_hermitian(dim, seed);
            let eig = hermitian_eigen(&a).unwrap();
            let scale = det(&a).norm().max(1.0);
            for &lam in &eig.values {
                let shifted = a.sub(&DenseMatrix::identity(dim).scale(c(lam, 0.0)));
                // |det(A - λI)| = Π|λ_j - λ|; compare against the product of the gaps
                // to the other roots so that the check is relative.
                let others: f64 = eig
                    .values
                    .iter()
                    .map(|&m| (m - lam).abs())
                    .filter(|&g| g > 1e-6)
                    .product();
                assert!(
                    det(&shifted).norm() <= 1e-9 * scale.max(others),
                    "dim {dim}: det at {lam} = {}",
                    det(&shifted).norm()
                );
            }
            let trace: f64 = (0..dim).map(|i| a[(i, i)].re).sum();
            let sum: f64 = eig.values.iter().sum();
            assert!((trace - sum).abs() < 1e-10);
        }
    }

    #[test]
    fn eigenvectors_reconstruct_matrix() {
        for (dim, seed) in [(1, 7), (3, 8), (16, 9), (32, 10)] {
            let a = random_hermitian(dim, seed);
            let eig = hermitian_eigen(&a).unwrap();
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
            assert!(eig.vectors.unitarity_error() < 1e-12);
            let rebuilt = eig.function(|l| c(l, 0.0));
            assert!(rebuilt.max_abs_diff(&a) < 1e-12);
        }
    }

    #[test]
    fn two_by_two_closed_form() {
        // [[a, b], [b*, d]]: λ = (a+d)/2 ± sqrt(((a-d)/2)^2 + |b|^2)
        let a = DenseMatrix::from_rows(&[[c(0.3, 0.0), c(0.2, -0.7)], [c(0.2, 0.7), c(-1.1, 0.0)]]);
        let eig = hermitian_eigen(&a).unwrap();
        let mid = (0.3 - 1.1) / 2.0;
        let rad = (((0.3 + 1.1) / 2.0f64).powi(2) + 0.04 + 0.49).sqrt();
        assert!((eig.values[0] - (mid - rad)).abs() < 1e-14);
        assert!((eig.values[1] - (mid + rad)).abs() < 1e-14);
    }

    #[test]
    fn degenerate_and_diagonal_inputs() {
        let a = DenseMatrix::from_diagonal(&[c(2.0, 0.0), c(-1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        let eig = hermitian_eigen(&a).unwrap();
        assert_eq!(eig.values, vec![-1.0, 0.0, 2.0, 2.0]);
        let zero = hermitian_eigen(&DenseMatrix::zeros(4)).unwrap();
        assert!(zero.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = DenseMatrix::from_rows(&[[ZERO, ONE], [ZERO, ZERO]]);
        assert!(matches!(hermitian_eigen(&a), Err(LinalgError::NotHermitian(_))));
    }

    #[test]
    fn embed_matches_kron() {
        let h = DenseMatrix::from_rows(&[[ONE, ONE], [ONE, -ONE]]);
        let id = DenseMatrix::identity(2);
        // qubit 1 of 2 is the high bit: H ⊗ I
        assert!(h.embed(&[1], 2).max_abs_diff(&h.kron(&id)) == 0.0);
        assert!(h.embed(&[0], 2).max_abs_diff(&id.kron(&h)) == 0.0);
    }

    #[test]
    fn tree_sum_is_order_fixed() {
        let v: Vec<f64> = (0..1000).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        assert_eq!(tree_sum(&v), tree_sum(&v.clone()));
        assert!((tree_sum(&v) - v.iter().sum::<f64>()).abs() < 1e-12);
    }
}
