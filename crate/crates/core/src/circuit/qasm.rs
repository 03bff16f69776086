//! OpenQASM 2.0 export and import for the supported gate set.
//!
//! Export prints parameters with 17 significant digits so that every `f64`
//! survives a round trip bit for bit. Import accepts a single quantum and a
//! single classical register, the gates `x sx sxdg h s sdg rx rz u1 cx`,
//! `measure`, `barrier` (ignored) and parameter expressions over numbers and
//! `pi` with `+ - * /` and parentheses.

use std::fmt::Write;

use super::{Circuit, Gate};
use crate::error::{Error, Result};

fn angle(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_qasm(circuit: &Circuit) -> String {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let n_clbits = circuit
        .measurements()
        .iter()
        .map(|&(_, c)| c + 1)
        .max()
        .unwrap_or(0);
    let _ = writeln!(out, "qreg q[{}];", circuit.n_qubits());
    if n_clbits > 0 {
        let _ = writeln!(out, "creg c[{n_clbits}];");
    }
    for seg in circuit.segments() {
        let _ = writeln!(out, "// segment {} gates {}..{}", seg.label, seg.range.start, seg.range.end);
    }
    for g in circuit.gates() {
        let line = match *g {
            Gate::X(q) => format!("x q[{q}];"),
            Gate::SX(q) => format!("sx q[{q}];"),
            Gate::SXdg(q) => format!("sxdg q[{q}];"),
            Gate::H(q) => format!("h q[{q}];"),
            Gate::S(q) => format!("s q[{q}];"),
            Gate::Sdg(q) => format!("sdg q[{q}];"),
            Gate::Rx(q, t) => format!("rx({}) q[{q}];", angle(t)),
            Gate::Rz(q, t) => format!("rz({}) q[{q}];", angle(t)),
            Gate::U1(q, t) => format!("u1({}) q[{q}];", angle(t)),
            Gate::CX { control, target } => format!("cx q[{control}],q[{target}];"),
            Gate::Measure { qubit, cbit } => format!("measure q[{qubit}] -> c[{cbit}];"),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

struct Registers {
    qreg: Option<(String, usize)>,
    creg: Option<(String, usize)>,
}

pub fn from_qasm(text: &str) -> Result<Circuit> {
    let mut regs = Registers { qreg: None, creg: None };
    let mut circuit: Option<Circuit> = None;
    let mut seen_header = false;

    for (line_no, raw) in statements(text) {
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let stmt = raw.trim();
        if stmt.is_empty() {
            continue;
        }
        if let Some(version) = stmt.strip_prefix("OPENQASM") {
            if version.trim() != "2.0" {
                return Err(err(format!("unsupported version {:?}", version.trim())));
            }
            seen_header = true;
            continue;
        }
        if !seen_header {
            return Err(err("missing OPENQASM 2.0 header".into()));
        }
        if stmt.starts_with("include") || stmt.starts_with("barrier") {
            continue;
        }
        if let Some(decl) = stmt.strip_prefix("qreg") {
            if regs.qreg.is_some() {
                return Err(err("only one quantum register is supported".into()));
            }
            let (name, size) = parse_indexed(decl.trim()).map_err(err)?;
            regs.qreg = Some((name, size));
            circuit = Some(Circuit::new(size).map_err(|e| err(e.to_string()))?);
            continue;
        }
        if let Some(decl) = stmt.strip_prefix("creg") {
            if regs.creg.is_some() {
                return Err(err("only one classical register is supported".into()));
            }
            regs.creg = Some(parse_indexed(decl.trim()).map_err(err)?);
            continue;
        }
        let c = circuit
            .as_mut()
            .ok_or_else(|| err("gate before qreg declaration".into()))?;
        let gate = parse_gate(stmt, &regs).map_err(err)?;
        c.push(gate).map_err(|e| err(e.to_string()))?;
    }
    circuit.ok_or_else(|| Error::Parse {
        line: text.lines().count(),
        msg: "no qreg declared".into(),
    })
}

/// Splits on `;`, strips `//` comments, and tags each statement with its
/// starting line number.
fn statements(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start_line = 1;
    for (idx, line) in text.lines().enumerate() {
        let line = line.split("//").next().unwrap_or("");
        for ch in line.chars() {
            if current.trim().is_empty() && !ch.is_whitespace() {
                start_line = idx + 1;
            }
            if ch == ';' {
                out.push((start_line, std::mem::take(&mut current)));
            } else {
                current.push(ch);
            }
        }
        current.push(' ');
    }
    if !current.trim().is_empty() {
        out.push((start_line, current));
    }
    out
}

fn parse_indexed(s: &str) -> std::result::Result<(String, usize), String> {
    let open = s.find('[').ok_or_else(|| format!("expected `name[index]`, got {s:?}"))?;
    let close = s.rfind(']').ok_or_else(|| format!("missing `]` in {s:?}"))?;
    let name = s[..open].trim().to_string();
    let idx = s[open + 1..close]
        .trim()
        .parse::<usize>()
        .map_err(|_| format!("bad index in {s:?}"))?;
    if name.is_empty() {
        return Err(format!("missing register name in {s:?}"));
    }
    Ok((name, idx))
}

fn operand(s: &str, reg: &Option<(String, usize)>, kind: &str) -> std::result::Result<usize, String> {
    let (name, idx) = parse_indexed(s)?;
    let (reg_name, size) = reg.as_ref().ok_or_else(|| format!("no {kind} register declared"))?;
    if &name != reg_name {
        return Err(format!("unknown {kind} register {name:?}"));
    }
    if idx >= *size {
        return Err(format!("index {idx} out of range for {name}[{size}]"));
    }
    Ok(idx)
}

fn parse_gate(stmt: &str, regs: &Registers) -> std::result::Result<Gate, String> {
    if let Some(rest) = stmt.strip_prefix("measure") {
        let (q, c) = rest
            .split_once("->")
            .ok_or_else(|| "measure needs `->`".to_string())?;
        return Ok(Gate::measure(
            operand(q.trim(), &regs.qreg, "quantum")?,
            operand(c.trim(), &regs.creg, "classical")?,
        ));
    }

    let (head, args) = match stmt.find(')') {
        Some(close) if stmt.contains('(') => (&stmt[..=close], stmt[close + 1..].trim()),
        _ => {
            let split = stmt
                .find(char::is_whitespace)
                .ok_or_else(|| format!("malformed statement {stmt:?}"))?;
            (&stmt[..split], stmt[split..].trim())
        }
    };
    let (name, param) = match head.find('(') {
        Some(open) => (
            head[..open].trim(),
            Some(eval_expr(&head[open + 1..head.len() - 1])?),
        ),
        None => (head.trim(), None),
    };
    let qubits = args
        .split(',')
        .map(|a| operand(a.trim(), &regs.qreg, "quantum"))
        .collect::<std::result::Result<Vec<_>, _>>()?;

    let one = |qs: &[usize]| -> std::result::Result<usize, String> {
        match qs {
            [q] => Ok(*q),
            _ => Err(format!("{name} takes one qubit")),
        }
    };
    let theta = || param.ok_or_else(|| format!("{name} needs a parameter"));
    let no_param = || {
        if param.is_some() {
            Err(format!("{name} takes no parameter"))
        } else {
            Ok(())
        }
    };
    Ok(match name {
        "x" => { no_param()?; Gate::X(one(&qubits)?) }
        "sx" => { no_param()?; Gate::SX(one(&qubits)?) }
        "sxdg" => { no_param()?; Gate::SXdg(one(&qubits)?) }
        "h" => { no_param()?; Gate::H(one(&qubits)?) }
        "s" => { no_param()?; Gate::S(one(&qubits)?) }
        "sdg" => { no_param()?; Gate::Sdg(one(&qubits)?) }
        "rx" => Gate::Rx(one(&qubits)?, theta()?),
        "rz" => Gate::Rz(one(&qubits)?, theta()?),
        "u1" => Gate::U1(one(&qubits)?, theta()?),
        "cx" | "CX" => {
            no_param()?;
            match qubits.as_slice() {
                [c, t] => Gate::cx(*c, *t),
                _ => return Err("cx takes two qubits".into()),
            }
        }
        other => return Err(format!("unsupported gate {other:?}")),
    })
}

/// Recursive-descent evaluator for parameter expressions.
fn eval_expr(src: &str) -> std::result::Result<f64, String> {
    struct P<'a> {
        s: &'a [u8],
        i: usize,
    }
    impl P<'_> {
        fn ws(&mut self) {
            while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
                self.i += 1;
            }
        }
        fn peek(&mut self) -> Option<u8> {
            self.ws();
            self.s.get(self.i).copied()
        }
        fn expr(&mut self) -> std::result::Result<f64, String> {
            let mut v = self.term()?;
            while let Some(op @ (b'+' | b'-')) = self.peek() {
                self.i += 1;
                let r = self.term()?;
                v = if op == b'+' { v + r } else { v - r };
            }
            Ok(v)
        }
        fn term(&mut self) -> std::result::Result<f64, String> {
            let mut v = self.unary()?;
            while let Some(op @ (b'*' | b'/')) = self.peek() {
                self.i += 1;
                let r = self.unary()?;
                v = if op == b'*' { v * r } else { v / r };
            }
            Ok(v)
        }
        fn unary(&mut self) -> std::result::Result<f64, String> {
            match self.peek() {
                Some(b'-') => {
                    self.i += 1;
                    Ok(-self.unary()?)
                }
                Some(b'+') => {
                    self.i += 1;
                    self.unary()
                }
                _ => self.atom(),
            }
        }
        fn atom(&mut self) -> std::result::Result<f64, String> {
            match self.peek() {
                Some(b'(') => {
                    self.i += 1;
                    let v = self.expr()?;
                    if self.peek() != Some(b')') {
                        return Err("unbalanced parentheses".into());
                    }
                    self.i += 1;
                    Ok(v)
                }
                Some(b'p') if self.s[self.i..].starts_with(b"pi") => {
                    self.i += 2;
                    Ok(std::f64::consts::PI)
                }
                Some(c) if c.is_ascii_digit() || c == b'.' => {
                    let start = self.i;
                    while self.i < self.s.len() {
                        let c = self.s[self.i];
                        let exp_sign = (c == b'+' || c == b'-')
                            && matches!(self.s[self.i - 1], b'e' | b'E');
                        if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                            self.i += 1;
                        } else {
                            break;
                        }
                    }
                    let lit = std::str::from_utf8(&self.s[start..self.i]).unwrap();
                    lit.parse::<f64>().map_err(|_| format!("bad number {lit:?}"))
                }
                other => Err(format!("unexpected token {:?}", other.map(char::from))),
            }
        }
    }
    let mut p = P { s: src.as_bytes(), i: 0 };
    let v = p.expr()?;
    if p.peek().is_some() {
        return Err(format!("trailing input in expression {src:?}"));
    }
    Ok(v)
}
