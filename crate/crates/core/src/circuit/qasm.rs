//! OpenQASM 2.0 reader and writer for the qelib1 subset.

use std::fmt::{self, Write as _};

use thiserror::Error;

use super::{decompose_c1, decompose_c2, Circuit, CircuitError, GateKind, Instruction};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QasmError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: unknown gate `{name}`")]
    UnknownGate { line: usize, col: usize, name: String },
    #[error("{line}:{col}: unknown register `{name}`")]
    UnknownRegister { line: usize, col: usize, name: String },
    #[error("{line}:{col}: index {index} out of bounds for register `{name}` of size {size}")]
    OutOfBounds {
        line: usize,
        col: usize,
        name: String,
        index: usize,
        size: usize,
    },
    #[error("{line}:{col}: only one quantum register is supported")]
    MultipleQregs { line: usize, col: usize },
    #[error("{line}:{col}: unsupported construct `{what}`")]
    Unsupported { line: usize, col: usize, what: String },
    #[error("{line}:{col}: {source}")]
    Circuit {
        line: usize,
        col: usize,
        source: CircuitError,
    },
    #[error("gate has no OpenQASM 2.0 name (enable decomposition to emit fused gates)")]
    Unrepresentable,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64, bool),
    Str(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(x, _) => write!(f, "`{x}`"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: &[&str] = &["->", "==", ";", ",", "(", ")", "[", "]", "{", "}", "+", "-", "*", "/", "^"];

fn lex(text: &str) -> Result<Vec<Spanned>, QasmError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let syntax = |line, col, msg: String| QasmError::Syntax { line, col, msg };

    while i < chars.len() {
        let ch = chars[i];
        if ch == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if ch.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if ch == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if ch == '/' && chars.get(i + 1) == Some(&'*') {
            i += 2;
            col += 2;
            loop {
                match chars.get(i) {
                    None => return Err(syntax(line, col, "unterminated block comment".into())),
                    Some('*') if chars.get(i + 1) == Some(&'/') => {
                        i += 2;
                        col += 2;
                        break;
                    }
                    Some('\n') => {
                        line += 1;
                        col = 1;
                        i += 1;
                    }
                    Some(_) => {
                        i += 1;
                        col += 1;
                    }
                }
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: start_line,
                col: start_col,
            });
            continue;
        }
        if ch.is_ascii_digit() || (ch == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())) {
            let start = i;
            let mut integer = true;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                integer = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    integer = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let value = s
                .parse::<f64>()
                .map_err(|_| syntax(start_line, start_col, format!("bad number `{s}`")))?;
            out.push(Spanned {
                tok: Tok::Number(value, integer),
                line: start_line,
                col: start_col,
            });
            continue;
        }
        if ch == '"' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                i += 1;
            }
            if chars.get(i) != Some(&'"') {
                return Err(syntax(start_line, start_col, "unterminated string".into()));
            }
            let s: String = chars[start..i].iter().collect();
            i += 1;
            col += s.chars().count() + 2;
            out.push(Spanned {
                tok: Tok::Str(s),
                line: start_line,
                col: start_col,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                i += sym.len();
                col += sym.len();
                out.push(Spanned {
                    tok: Tok::Sym(sym),
                    line: start_line,
                    col: start_col,
                });
            }
            None => return Err(syntax(line, col, format!("unexpected character `{ch}`"))),
        }
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

/// A register reference: `name` or `name[index]`.
struct Arg {
    name: String,
    index: Option<usize>,
    line: usize,
    col: usize,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    circuit: Option<Circuit>,
    pending_cregs: Vec<(String, usize, usize, usize)>,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> QasmError {
        let t = self.peek();
        QasmError::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        }
    }

    fn expect_sym(&mut self, sym: &'static str) -> Result<(), QasmError> {
        if self.peek().tok == Tok::Sym(sym) {
            self.next();
            Ok(())
        } else {
            Err(self.err(format!("expected `{sym}`, found {}", self.peek().tok)))
        }
    }

    fn eat_sym(&mut self, sym: &'static str) -> bool {
        if self.peek().tok == Tok::Sym(sym) {
            self.next();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<Spanned, QasmError> {
        match self.peek().tok {
            Tok::Ident(_) => Ok(self.next()),
            _ => Err(self.err(format!("expected identifier, found {}", self.peek().tok))),
        }
    }

    fn integer(&mut self) -> Result<usize, QasmError> {
        match self.peek().tok {
            Tok::Number(v, true) if v >= 0.0 && v <= usize::MAX as f64 => {
                self.next();
                Ok(v as usize)
            }
            _ => Err(self.err(format!("expected non-negative integer, found {}", self.peek().tok))),
        }
    }

    fn program(mut self) -> Result<Circuit, QasmError> {
        if matches!(&self.peek().tok, Tok::Ident(s) if s == "OPENQASM") {
            self.next();
            match self.next().tok {
                Tok::Number(v, _) if (v - 2.0).abs() < 1e-12 => {}
                _ => {
                    let t = &self.toks[self.pos - 1];
                    return Err(QasmError::Unsupported {
                        line: t.line,
                        col: t.col,
                        what: "OpenQASM version other than 2.0".into(),
                    });
                }
            }
            self.expect_sym(";")?;
        }
        while self.peek().tok != Tok::Eof {
            self.statement()?;
        }
        self.flush_header()?;
        Ok(self.circuit.expect("header flushed"))
    }

    /// Classical registers may be declared before the quantum register, so they
    /// are buffered until the circuit exists.
    fn flush_header(&mut self) -> Result<(), QasmError> {
        if self.circuit.is_none() {
            self.circuit = Some(Circuit::new(0));
        }
        let circuit = self.circuit.as_mut().unwrap();
        for (name, size, line, col) in self.pending_cregs.drain(..) {
            circuit
                .add_creg(&name, size)
                .map_err(|source| QasmError::Circuit { line, col, source })?;
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<(), QasmError> {
        let head = self.ident()?;
        let Tok::Ident(word) = head.tok.clone() else { unreachable!() };
        match word.as_str() {
            "include" => {
                let t = self.next();
                match t.tok {
                    Tok::Str(ref s) if s == "qelib1.inc" => {}
                    Tok::Str(s) => {
                        return Err(QasmError::Unsupported {
                            line: t.line,
                            col: t.col,
                            what: format!("include \"{s}\""),
                        })
                    }
                    _ => return Err(QasmError::Syntax {
                        line: t.line,
                        col: t.col,
                        msg: "expected file name".into(),
                    }),
                }
                self.expect_sym(";")
            }
            "qreg" => {
                let name = self.ident()?;
                self.expect_sym("[")?;
                let size = self.integer()?;
                self.expect_sym("]")?;
                self.expect_sym(";")?;
                if self.circuit.is_some() {
                    return Err(QasmError::MultipleQregs {
                        line: head.line,
                        col: head.col,
                    });
                }
                let Tok::Ident(name) = name.tok else { unreachable!() };
                if self.pending_cregs.iter().any(|(n, ..)| *n == name) {
                    return Err(QasmError::Circuit {
                        line: head.line,
                        col: head.col,
                        source: CircuitError::DuplicateRegister(name),
                    });
                }
                self.circuit = Some(Circuit::with_register_name(size, &name));
                self.flush_header()
            }
            "creg" => {
                let name = self.ident()?;
                self.expect_sym("[")?;
                let size = self.integer()?;
                self.expect_sym("]")?;
                self.expect_sym(";")?;
                let Tok::Ident(name) = name.tok else { unreachable!() };
                match self.circuit.as_mut() {
                    Some(c) => c.add_creg(&name, size).map(|_| ()).map_err(|source| {
                        QasmError::Circuit {
                            line: head.line,
                            col: head.col,
                            source,
                        }
                    }),
                    None => {
                        if self.pending_cregs.iter().any(|(n, ..)| *n == name) {
                            return Err(QasmError::Circuit {
                                line: head.line,
                                col: head.col,
                                source: CircuitError::DuplicateRegister(name),
                            });
                        }
                        self.pending_cregs.push((name, size, head.line, head.col));
                        Ok(())
                    }
                }
            }
            "gate" | "opaque" | "if" => Err(QasmError::Unsupported {
                line: head.line,
                col: head.col,
                what: word,
            }),
            "measure" => {
                let q = self.arg()?;
                self.expect_sym("->")?;
                let c = self.arg()?;
                self.expect_sym(";")?;
                let qs = self.resolve_qubits(&q)?;
                let cs = self.resolve_clbits(&c)?;
                if qs.len() != cs.len() {
                    return Err(QasmError::Syntax {
                        line: head.line,
                        col: head.col,
                        msg: format!(
                            "measure register sizes differ ({} qubits -> {} bits)",
                            qs.len(),
                            cs.len()
                        ),
                    });
                }
                for (qubit, clbit) in qs.into_iter().zip(cs) {
                    self.push(Instruction::Measure { qubit, clbit }, &head)?;
                }
                Ok(())
            }
            "reset" => {
                let q = self.arg()?;
                self.expect_sym(";")?;
                for qubit in self.resolve_qubits(&q)? {
                    self.push(Instruction::Reset { qubit }, &head)?;
                }
                Ok(())
            }
            "barrier" => {
                let args = self.arg_list()?;
                self.expect_sym(";")?;
                let mut qubits = Vec::new();
                for a in &args {
                    for q in self.resolve_qubits(a)? {
                        if !qubits.contains(&q) {
                            qubits.push(q);
                        }
                    }
                }
                self.push(Instruction::Barrier { qubits }, &head)
            }
            _ => self.gate_application(word, head),
        }
    }

    fn gate_application(&mut self, name: String, head: Spanned) -> Result<(), QasmError> {
        let Some((arity, nparams)) = GateKind::signature(&name) else {
            return Err(QasmError::UnknownGate {
                line: head.line,
                col: head.col,
                name,
            });
        };
        let mut params = Vec::new();
        if self.eat_sym("(") {
            if !self.eat_sym(")") {
                loop {
                    params.push(self.expr()?);
                    if self.eat_sym(")") {
                        break;
                    }
                    self.expect_sym(",")?;
                }
            }
        }
        if params.len() != nparams {
            return Err(QasmError::Syntax {
                line: head.line,
                col: head.col,
                msg: format!("gate `{name}` takes {nparams} parameters, got {}", params.len()),
            });
        }
        let args = self.arg_list()?;
        self.expect_sym(";")?;
        if args.len() != arity {
            return Err(QasmError::Syntax {
                line: head.line,
                col: head.col,
                msg: format!("gate `{name}` takes {arity} qubit arguments, got {}", args.len()),
            });
        }
        let kind = GateKind::from_name(&name, &params).expect("signature checked");
        let resolved: Vec<(Vec<usize>, bool)> = args
            .iter()
            .map(|a| self.resolve_qubits(a).map(|qs| (qs, a.index.is_none())))
            .collect::<Result<_, _>>()?;
        // Whole-register arguments broadcast over the register.
        let width = resolved
            .iter()
            .filter(|(_, whole)| *whole)
            .map(|(qs, _)| qs.len())
            .max();
        match width {
            None => {
                let qubits = resolved.into_iter().map(|(qs, _)| qs[0]).collect();
                self.push(Instruction::Gate { kind, qubits }, &head)
            }
            Some(w) => {
                for k in 0..w {
                    let qubits = resolved
                        .iter()
                        .map(|(qs, whole)| if *whole { qs[k] } else { qs[0] })
                        .collect();
                    self.push(
                        Instruction::Gate {
                            kind: kind.clone(),
                            qubits,
                        },
                        &head,
                    )?;
                }
                Ok(())
            }
        }
    }

    fn push(&mut self, inst: Instruction, at: &Spanned) -> Result<(), QasmError> {
        let circuit = self.circuit.as_mut().ok_or(QasmError::Syntax {
            line: at.line,
            col: at.col,
            msg: "instruction before qreg declaration".into(),
        })?;
        circuit.push(inst).map_err(|source| QasmError::Circuit {
            line: at.line,
            col: at.col,
            source,
        })
    }

    fn arg(&mut self) -> Result<Arg, QasmError> {
        let id = self.ident()?;
        let Tok::Ident(name) = id.tok else { unreachable!() };
        let index = if self.eat_sym("[") {
            let i = self.integer()?;
            self.expect_sym("]")?;
            Some(i)
        } else {
            None
        };
        Ok(Arg {
            name,
            index,
            line: id.line,
            col: id.col,
        })
    }

    fn arg_list(&mut self) -> Result<Vec<Arg>, QasmError> {
        let mut args = vec![self.arg()?];
        while self.eat_sym(",") {
            args.push(self.arg()?);
        }
        Ok(args)
    }

    fn resolve_qubits(&self, a: &Arg) -> Result<Vec<usize>, QasmError> {
        let circuit = match &self.circuit {
            Some(c) if c.qreg_name() == a.name => c,
            _ => {
                return Err(QasmError::UnknownRegister {
                    line: a.line,
                    col: a.col,
                    name: a.name.clone(),
                })
            }
        };
        index_range(a, circuit.n_qubits())
    }

    fn resolve_clbits(&self, a: &Arg) -> Result<Vec<usize>, QasmError> {
        let found = self.circuit.as_ref().and_then(|c| c.creg_offset(&a.name));
        let Some((offset, size)) = found else {
            return Err(QasmError::UnknownRegister {
                line: a.line,
                col: a.col,
                name: a.name.clone(),
            });
        };
        Ok(index_range(a, size)?.into_iter().map(|i| i + offset).collect())
    }

    fn expr(&mut self) -> Result<f64, QasmError> {
        let mut acc = self.term()?;
        loop {
            if self.eat_sym("+") {
                acc += self.term()?;
            } else if self.eat_sym("-") {
                acc -= self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<f64, QasmError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat_sym("*") {
                acc *= self.unary()?;
            } else if self.eat_sym("/") {
                acc /= self.unary()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<f64, QasmError> {
        if self.eat_sym("-") {
            return Ok(-self.unary()?);
        }
        if self.eat_sym("+") {
            return self.unary();
        }
        let base = self.primary()?;
        if self.eat_sym("^") {
            return Ok(base.powf(self.unary()?));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<f64, QasmError> {
        let t = self.next();
        match t.tok {
            Tok::Number(v, _) => Ok(v),
            Tok::Ident(ref s) if s == "pi" => Ok(std::f64::consts::PI),
            Tok::Ident(ref s) if matches!(s.as_str(), "sin" | "cos" | "tan" | "exp" | "ln" | "sqrt") => {
                self.expect_sym("(")?;
                let x = self.expr()?;
                self.expect_sym(")")?;
                Ok(match s.as_str() {
                    "sin" => x.sin(),
                    "cos" => x.cos(),
                    "tan" => x.tan(),
                    "exp" => x.exp(),
                    "ln" => x.ln(),
                    _ => x.sqrt(),
                })
            }
            Tok::Sym("(") => {
                let x = self.expr()?;
                self.expect_sym(")")?;
                Ok(x)
            }
            other => Err(QasmError::Syntax {
                line: t.line,
                col: t.col,
                msg: format!("expected expression, found {other}"),
            }),
        }
    }
}

fn index_range(a: &Arg, size: usize) -> Result<Vec<usize>, QasmError> {
    match a.index {
        None => Ok((0..size).collect()),
        Some(i) if i < size => Ok(vec![i]),
        Some(i) => Err(QasmError::OutOfBounds {
            line: a.line,
            col: a.col,
            name: a.name.clone(),
            index: i,
            size,
        }),
    }
}

/// Parses an OpenQASM 2.0 program. The `OPENQASM 2.0;` header is optional;
/// exactly one `qreg` may be declared, user-defined gates are rejected.
pub fn parse_qasm(text: &str) -> Result<Circuit, QasmError> {
    let toks = lex(text)?;
    Parser {
        toks,
        pos: 0,
        circuit: None,
        pending_cregs: Vec::new(),
    }
    .program()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EmitOptions {
    /// Rewrite `C1` as `u3` and `C2` as a two-level-unitary network of
    /// qelib1 gates instead of failing on them.
    pub decompose: bool,
}

fn fmt_angle(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a circuit as OpenQASM 2.0, one instruction per line with angles
/// at 17 significant digits.
pub fn emit_qasm(circuit: &Circuit, opts: EmitOptions) -> Result<String, QasmError> {
    let mut out = String::new();
    let q = circuit.qreg_name();
    out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg {q}[{}];", circuit.n_qubits());
    for r in circuit.cregs() {
        let _ = writeln!(out, "creg {}[{}];", r.name, r.size);
    }
    let all: Vec<usize> = (0..circuit.n_qubits()).collect();
    for inst in circuit.instructions() {
        match inst {
            Instruction::Gate { kind, qubits } => match kind {
                GateKind::C1(m) if opts.decompose => {
                    write_gate(&mut out, q, &decompose_c1(m), qubits);
                }
                GateKind::C2(m) if opts.decompose => {
                    for (g, local) in decompose_c2(m) {
                        let mapped: Vec<usize> = local.iter().map(|&l| qubits[l]).collect();
                        write_gate(&mut out, q, &g, &mapped);
                    }
                }
                GateKind::C1(_) | GateKind::C2(_) => return Err(QasmError::Unrepresentable),
                _ => write_gate(&mut out, q, kind, qubits),
            },
            Instruction::Measure { qubit, clbit } => {
                let (reg, idx) = circuit.clbit_location(*clbit).expect("validated clbit");
                let _ = writeln!(out, "measure {q}[{qubit}] -> {reg}[{idx}];");
            }
            Instruction::Reset { qubit } => {
                let _ = writeln!(out, "reset {q}[{qubit}];");
            }
            Instruction::Barrier { qubits } => {
                if *qubits == all && !all.is_empty() {
                    let _ = writeln!(out, "barrier {q};");
                } else {
                    let args: Vec<String> = qubits.iter().map(|i| format!("{q}[{i}]")).collect();
                    let _ = writeln!(out, "barrier {};", args.join(","));
                }
            }
        }
    }
    Ok(out)
}

fn write_gate(out: &mut String, reg: &str, kind: &GateKind, qubits: &[usize]) {
    let name = kind.qasm_name().expect("named gate");
    let params = kind.params();
    out.push_str(name);
    if !params.is_empty() {
        let ps: Vec<String> = params.into_iter().map(fmt_angle).collect();
        let _ = write!(out, "({})", ps.join(","));
    }
    let args: Vec<String> = qubits.iter().map(|i| format!("{reg}[{i}]")).collect();
    let _ = writeln!(out, " {};", args.join(","));
}
