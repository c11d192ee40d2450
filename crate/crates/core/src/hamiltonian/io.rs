//! Plain-text Hamiltonian formats. Blank lines and `#` comments are ignored.
//!
//! Pauli form, one term per line, leftmost letter on qubit 0:
//! ```text
//! qubits 2        # optional; otherwise taken from the string length
//! -0.5  ZI
//! 0.25  XX
//! ```
//! Second-quantized form:
//! ```text
//! orbitals 3      # optional; otherwise one past the largest index
//! t 0 1 -1.0      # t_ij (t_ji is implied)
//! v 0 1 0 1 0.5   # V_ij,kl (antisymmetric partners are implied)
//! ```

use std::fmt::Write as _;

use super::jw::{build_hamiltonian, SecondQuantized};
use super::pauli::{PauliHamiltonian, PauliString};
use super::HamiltonianError;

fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

fn parse_err(line: usize, msg: impl Into<String>) -> HamiltonianError {
    HamiltonianError::Parse { line, msg: msg.into() }
}

fn number<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, HamiltonianError> {
    s.parse().map_err(|_| parse_err(line, format!("bad number `{s}`")))
}

/// True when the text uses the second-quantized record form.
pub fn is_second_quantized(text: &str) -> bool {
    records(text)
        .next()
        .is_some_and(|(_, f)| matches!(f[0], "t" | "v" | "orbitals"))
}

pub fn parse_pauli_text(text: &str) -> Result<PauliHamiltonian, HamiltonianError> {
    let mut declared: Option<usize> = None;
    let mut terms: Vec<(f64, PauliString, usize)> = Vec::new();
    for (line, f) in records(text) {
        if f[0] == "qubits" {
            if f.len() != 2 || declared.is_some() || !terms.is_empty() {
                return Err(parse_err(line, "`qubits N` must appear once, before any term"));
            }
            declared = Some(number(line, f[1])?);
            continue;
        }
        if f.len() != 2 {
            return Err(parse_err(line, "expected `coefficient LETTERS`"));
        }
        let c: f64 = number(line, f[0])?;
        let s = PauliString::parse(f[1]).ok_or_else(|| parse_err(line, format!("bad Pauli string `{}`", f[1])))?;
        terms.push((c, s, line));
    }
    let n = declared.or_else(|| terms.first().map(|(_, s, _)| s.n_qubits())).unwrap_or(0);
    let mut out = Vec::with_capacity(terms.len());
    for (c, s, line) in terms {
        if s.n_qubits() != n {
            return Err(parse_err(line, format!("string has {} letters, expected {n}", s.n_qubits())));
        }
        out.push((c, s));
    }
    PauliHamiltonian::from_real_terms(n, &out)
}

pub fn parse_second_quantized(text: &str) -> Result<SecondQuantized, HamiltonianError> {
    let mut declared: Option<usize> = None;
    let mut one: Vec<(usize, [usize; 2], f64)> = Vec::new();
    let mut two: Vec<(usize, [usize; 4], f64)> = Vec::new();
    let mut largest = None;
    for (line, f) in records(text) {
        match (f[0], f.len()) {
            ("orbitals", 2) => {
                if declared.is_some() {
                    return Err(parse_err(line, "duplicate `orbitals` line"));
                }
                declared = Some(number(line, f[1])?);
            }
            ("t", 4) => {
                let idx = [number(line, f[1])?, number(line, f[2])?];
                largest = idx.iter().copied().chain(largest).max();
                one.push((line, idx, number(line, f[3])?));
            }
            ("v", 6) => {
                let idx = [number(line, f[1])?, number(line, f[2])?, number(line, f[3])?, number(line, f[4])?];
                largest = idx.iter().copied().chain(largest).max();
                two.push((line, idx, number(line, f[5])?));
            }
            _ => return Err(parse_err(line, "expected `orbitals N`, `t i j value` or `v i j k l value`")),
        }
    }
    let n = declared.unwrap_or_else(|| largest.map_or(0, |m| m + 1));
    let mut input = SecondQuantized::new(n);
    let at = |line: usize, e: HamiltonianError| parse_err(line, e.to_string());
    for (line, [i, j], v) in one {
        input.set_one_body(i, j, v).map_err(|e| at(line, e))?;
    }
    for (line, [i, j, k, l], v) in two {
        input.set_two_body(i, j, k, l, v).map_err(|e| at(line, e))?;
    }
    Ok(input)
}

/// Reads either format, mapping second-quantized input through Jordan-Wigner.
pub fn load_hamiltonian(text: &str) -> Result<PauliHamiltonian, HamiltonianError> {
    if is_second_quantized(text) {
        build_hamiltonian(&parse_second_quantized(text)?)
    } else {
        parse_pauli_text(text)
    }
}

/// Writes the Pauli form; real parts only, at full precision.
pub fn to_pauli_text(h: &PauliHamiltonian) -> String {
    let mut out = format!("qubits {}\n", h.n_qubits());
    for (c, p) in h.terms() {
        let _ = writeln!(out, "{:.17e} {p}", c.re);
    }
    out
}
