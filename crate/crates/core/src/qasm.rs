//! OpenQASM 2.0 subset reader and writer.
//!
//! Accepted: one `qreg` and at most one `creg`, the gates `h x sx rz rx u cx
//! cp swap` (`cu1` and `u3` as aliases), `measure`, `barrier`, `//` comments.
//! Angles are decimal literals or rational multiples of `pi`. `include`
//! lines are skipped with a warning; `gate` definitions and `if` are errors.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::circuit::{Circuit, Op};
use crate::gate::Gate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// A located message about the source text. Line and column are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub severity: Severity,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}", .diagnostics.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
pub struct ParseError {
    /// All diagnostics, errors first in source order then warnings.
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseError {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub circuit: Circuit,
    pub warnings: Vec<Diagnostic>,
}

/// Parses source text into a circuit.
pub fn parse(text: &str) -> Result<Parsed, ParseError> {
    Parser::new(text).run()
}

/// Convenience wrapper that drops warnings.
pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    parse(text).map(|p| p.circuit)
}

/// Writes a circuit in the interchange format. Every [`Gate`] has a textual
/// form, so this cannot fail.
pub fn serialize(circuit: &Circuit) -> String {
    let mut out = String::from("OPENQASM 2.0;\n");
    let _ = writeln!(out, "qreg q[{}];", circuit.num_qubits());
    if circuit.num_clbits() > 0 {
        let _ = writeln!(out, "creg c[{}];", circuit.num_clbits());
    }
    for op in circuit.ops() {
        let args = op.qubits.iter().map(|q| format!("q[{q}]")).collect::<Vec<_>>().join(",");
        match op.gate {
            Gate::Measure => {
                let _ = writeln!(out, "measure {args} -> c[{}];", op.clbit.unwrap_or(0));
            }
            g => {
                let angles = g.angles();
                if angles.is_empty() {
                    let _ = writeln!(out, "{} {args};", g.name());
                } else {
                    let list = angles.iter().map(|a| format!("{a:?}")).collect::<Vec<_>>().join(",");
                    let _ = writeln!(out, "{}({list}) {args};", g.name());
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    Sym(char),
    Arrow,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Register {
    name: String,
    size: usize,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
    qreg: Option<Register>,
    creg: Option<Register>,
    ops: Vec<Op>,
    end: (usize, usize),
}

type Located<T> = Result<T, (usize, usize, String)>;

impl Parser {
    fn new(text: &str) -> Self {
        let mut diags = Vec::new();
        let (tokens, end) = tokenize(text, &mut diags);
        Parser { tokens, pos: 0, diags, qreg: None, creg: None, ops: Vec::new(), end }
    }

    fn run(mut self) -> Result<Parsed, ParseError> {
        if let Err((l, c, m)) = self.header() {
            self.error(l, c, m);
            return Err(self.finish_err());
        }
        while self.pos < self.tokens.len() {
            let start = self.pos;
            if let Err((l, c, m)) = self.statement() {
                self.error(l, c, m);
                let terminated = self.pos > start && self.tokens[self.pos - 1].tok == Tok::Sym(';');
                if !terminated {
                    self.skip_statement();
                }
            }
        }
        if self.qreg.is_none() && !self.has_errors() {
            let (l, c) = self.end;
            self.error(l, c, "missing register declaration: no qreg found".into());
        }
        if self.has_errors() {
            return Err(self.finish_err());
        }
        let qreg = self.qreg.take().expect("checked above");
        let num_clbits = self.creg.as_ref().map_or(0, |r| r.size);
        match Circuit::from_ops(qreg.size, num_clbits, std::mem::take(&mut self.ops)) {
            Ok(circuit) => Ok(Parsed { circuit, warnings: self.diags }),
            Err(e) => {
                let (l, c) = self.end;
                self.error(l, c, e.to_string());
                Err(self.finish_err())
            }
        }
    }

    fn has_errors(&self) -> bool {
        self.diags.iter().any(|d| d.severity == Severity::Error)
    }

    fn finish_err(mut self) -> ParseError {
        self.diags.sort_by_key(|d| (d.severity == Severity::Warning, d.line, d.column));
        ParseError { diagnostics: self.diags }
    }

    fn error(&mut self, line: usize, column: usize, message: String) {
        self.diags.push(Diagnostic { line, column, message, severity: Severity::Error });
    }

    fn warn(&mut self, line: usize, column: usize, message: String) {
        self.diags.push(Diagnostic { line, column, message, severity: Severity::Warning });
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn loc(&self) -> (usize, usize) {
        self.peek().map_or(self.end, |t| (t.line, t.col))
    }

    fn next(&mut self) -> Located<Token> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err((self.end.0, self.end.1, "unexpected end of input".into())),
        }
    }

    fn expect_sym(&mut self, c: char) -> Located<()> {
        let t = self.next()?;
        if t.tok == Tok::Sym(c) {
            Ok(())
        } else {
            Err((t.line, t.col, format!("expected '{c}', found {}", describe(&t.tok))))
        }
    }

    fn ident(&mut self) -> Located<(String, usize, usize)> {
        let t = self.next()?;
        match t.tok {
            Tok::Ident(s) => Ok((s, t.line, t.col)),
            other => Err((t.line, t.col, format!("expected identifier, found {}", describe(&other)))),
        }
    }

    fn integer(&mut self) -> Located<usize> {
        let t = self.next()?;
        match &t.tok {
            Tok::Number(s) => s.parse().map_err(|_| (t.line, t.col, format!("expected integer, found '{s}'"))),
            other => Err((t.line, t.col, format!("expected integer, found {}", describe(other)))),
        }
    }

    fn skip_statement(&mut self) {
        while let Some(t) = self.tokens.get(self.pos) {
            self.pos += 1;
            if t.tok == Tok::Sym(';') {
                break;
            }
        }
    }

    fn header(&mut self) -> Located<()> {
        let (l, c) = self.loc();
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Ident(s)) if s == "OPENQASM" => {}
            _ => return Err((l, c, "missing header: expected 'OPENQASM 2.0;'".into())),
        }
        self.pos += 1;
        let t = self.next()?;
        match &t.tok {
            Tok::Number(v) if v == "2.0" || v == "2" => {}
            other => return Err((t.line, t.col, format!("unsupported version {}, expected 2.0", describe(other)))),
        }
        self.expect_sym(';')
    }

    fn statement(&mut self) -> Located<()> {
        let (kw, line, col) = self.ident()?;
        match kw.as_str() {
            "include" => {
                let t = self.next()?;
                if !matches!(t.tok, Tok::Str(_)) {
                    return Err((t.line, t.col, "expected file name after include".into()));
                }
                self.expect_sym(';')?;
                self.warn(line, col, "include ignored; the standard gate set is built in".into());
                Ok(())
            }
            "qreg" | "creg" => self.register(&kw, line, col),
            "gate" | "opaque" => Err((line, col, "custom gate definitions are not supported".into())),
            "if" => Err((line, col, "classically controlled operations are not supported".into())),
            "reset" => Err((line, col, "reset is not supported".into())),
            "measure" => self.measure(),
            "barrier" => {
                let mut qubits = Vec::new();
                loop {
                    qubits.extend(self.qubit_arg(true)?);
                    let t = self.next()?;
                    match t.tok {
                        Tok::Sym(',') => continue,
                        Tok::Sym(';') => break,
                        other => return Err((t.line, t.col, format!("expected ',' or ';', found {}", describe(&other)))),
                    }
                }
                let mut seen = Vec::with_capacity(qubits.len());
                for q in qubits {
                    if !seen.contains(&q) {
                        seen.push(q);
                    }
                }
                self.ops.push(Op::new(Gate::Barrier, &seen));
                Ok(())
            }
            name => self.gate(name, line, col),
        }
    }

    fn register(&mut self, kind: &str, line: usize, col: usize) -> Located<()> {
        let (name, _, _) = self.ident()?;
        self.expect_sym('[')?;
        let (sl, sc) = self.loc();
        let size = self.integer()?;
        self.expect_sym(']')?;
        self.expect_sym(';')?;
        if kind == "qreg" && size == 0 {
            return Err((sl, sc, "quantum register must have at least one qubit".into()));
        }
        let slot = if kind == "qreg" { &mut self.qreg } else { &mut self.creg };
        if let Some(existing) = slot {
            return Err((
                line,
                col,
                format!("only one {kind} is supported; '{}' is already declared", existing.name),
            ));
        }
        *slot = Some(Register { name, size });
        Ok(())
    }

    /// `name[index]`, or a whole register when `allow_whole` is set.
    fn qubit_arg(&mut self, allow_whole: bool) -> Located<Vec<usize>> {
        self.reg_arg(true, allow_whole)
    }

    fn reg_arg(&mut self, quantum: bool, allow_whole: bool) -> Located<Vec<usize>> {
        let (name, line, col) = self.ident()?;
        let reg = if quantum { &self.qreg } else { &self.creg };
        let kind = if quantum { "qreg" } else { "creg" };
        let Some(reg) = reg else {
            return Err((line, col, format!("missing register declaration: '{name}' used before any {kind}")));
        };
        if reg.name != name {
            return Err((line, col, format!("unknown register '{name}'")));
        }
        let size = reg.size;
        if self.peek().map(|t| &t.tok) == Some(&Tok::Sym('[')) {
            self.pos += 1;
            let (il, ic) = self.loc();
            let idx = self.integer()?;
            self.expect_sym(']')?;
            if idx >= size {
                return Err((il, ic, format!("index out of range: {name}[{idx}] but {name} has size {size}")));
            }
            Ok(vec![idx])
        } else if allow_whole {
            Ok((0..size).collect())
        } else {
            Err((line, col, format!("expected an indexed argument like {name}[0]")))
        }
    }

    fn measure(&mut self) -> Located<()> {
        let (ql, qc) = self.loc();
        let qubits = self.reg_arg(true, true)?;
        let t = self.next()?;
        if t.tok != Tok::Arrow {
            return Err((t.line, t.col, format!("expected '->', found {}", describe(&t.tok))));
        }
        let clbits = self.reg_arg(false, true)?;
        self.expect_sym(';')?;
        if qubits.len() != clbits.len() {
            return Err((ql, qc, "measure: register sizes differ".into()));
        }
        for (q, c) in qubits.into_iter().zip(clbits) {
            self.ops.push(Op::measure(q, c));
        }
        Ok(())
    }

    fn gate(&mut self, name: &str, line: usize, col: usize) -> Located<()> {
        let (nparams, nqubits) = match name {
            "h" | "x" | "sx" => (0, 1),
            "rz" | "rx" => (1, 1),
            "u" | "u3" => (3, 1),
            "cx" | "swap" => (0, 2),
            "cp" | "cu1" => (1, 2),
            _ => return Err((line, col, format!("unknown gate '{name}'"))),
        };
        let mut params = Vec::new();
        if self.peek().map(|t| &t.tok) == Some(&Tok::Sym('(')) {
            self.pos += 1;
            loop {
                params.push(self.angle()?);
                let t = self.next()?;
                match t.tok {
                    Tok::Sym(',') => continue,
                    Tok::Sym(')') => break,
                    other => {
                        return Err((t.line, t.col, format!("malformed angle expression: unexpected {}", describe(&other))))
                    }
                }
            }
        }
        if params.len() != nparams {
            return Err((line, col, format!("gate '{name}' takes {nparams} parameter(s), got {}", params.len())));
        }
        let mut qubits = Vec::with_capacity(nqubits);
        loop {
            let (al, ac) = self.loc();
            let arg = self.qubit_arg(false)?;
            if qubits.contains(&arg[0]) {
                return Err((al, ac, format!("gate '{name}' uses qubit {} twice", arg[0])));
            }
            qubits.push(arg[0]);
            let t = self.next()?;
            match t.tok {
                Tok::Sym(',') => continue,
                Tok::Sym(';') => break,
                other => return Err((t.line, t.col, format!("expected ',' or ';', found {}", describe(&other)))),
            }
        }
        if qubits.len() != nqubits {
            return Err((line, col, format!("gate '{name}' takes {nqubits} qubit(s), got {}", qubits.len())));
        }
        let gate = match name {
            "h" => Gate::H,
            "x" => Gate::X,
            "sx" => Gate::SX,
            "rz" => Gate::RZ(params[0]),
            "rx" => Gate::RX(params[0]),
            "u" | "u3" => Gate::U(params[0], params[1], params[2]),
            "cx" => Gate::CX,
            "swap" => Gate::Swap,
            _ => Gate::CP(params[0]),
        };
        self.ops.push(Op::new(gate, &qubits));
        Ok(())
    }

    /// `[-] (number ['*' pi] | pi) ['/' number]`
    fn angle(&mut self) -> Located<f64> {
        let (line, col) = self.loc();
        let malformed = |msg: &str| (line, col, format!("malformed angle expression: {msg}"));
        let mut sign = 1.0;
        while let Some(Tok::Sym(c @ ('-' | '+'))) = self.peek().map(|t| t.tok.clone()) {
            if c == '-' {
                sign = -sign;
            }
            self.pos += 1;
        }
        let t = self.next()?;
        let mut value = match &t.tok {
            Tok::Ident(s) if s == "pi" => PI,
            Tok::Number(s) => {
                let v: f64 = s.parse().map_err(|_| malformed(&format!("bad number '{s}'")))?;
                if self.peek().map(|t| &t.tok) == Some(&Tok::Sym('*')) {
                    self.pos += 1;
                    match self.next()?.tok {
                        Tok::Ident(p) if p == "pi" => v * PI,
                        _ => return Err(malformed("only multiples of pi are allowed after '*'")),
                    }
                } else {
                    v
                }
            }
            other => return Err(malformed(&format!("unexpected {}", describe(other)))),
        };
        if self.peek().map(|t| &t.tok) == Some(&Tok::Sym('/')) {
            self.pos += 1;
            match self.next()?.tok {
                Tok::Number(s) => {
                    let d: f64 = s.parse().map_err(|_| malformed(&format!("bad number '{s}'")))?;
                    if d == 0.0 {
                        return Err(malformed("division by zero"));
                    }
                    value /= d;
                }
                _ => return Err(malformed("expected a number after '/'")),
            }
        }
        if !value.is_finite() {
            return Err(malformed("value is not finite"));
        }
        Ok(sign * value)
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Number(s) => format!("'{s}'"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Sym(c) => format!("'{c}'"),
        Tok::Arrow => "'->'".into(),
    }
}

fn tokenize(text: &str, diags: &mut Vec<Diagnostic>) -> (Vec<Token>, (usize, usize)) {
    let mut tokens = Vec::new();
    let mut line = 1;
    let mut end = (1, 1);
    for raw in text.lines() {
        let src = raw.split("//").next().unwrap_or("");
        let chars: Vec<char> = src.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                tokens.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line, col });
            } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                tokens.push(Token { tok: Tok::Number(chars[start..i].iter().collect()), line, col });
            } else if c == '"' {
                let start = i + 1;
                i += 1;
                while i < chars.len() && chars[i] != '"' {
                    i += 1;
                }
                if i >= chars.len() {
                    diags.push(Diagnostic {
                        line,
                        column: col,
                        message: "unterminated string".into(),
                        severity: Severity::Error,
                    });
                }
                tokens.push(Token { tok: Tok::Str(chars[start..i.min(chars.len())].iter().collect()), line, col });
                i += 1;
            } else if c == '-' && chars.get(i + 1) == Some(&'>') {
                tokens.push(Token { tok: Tok::Arrow, line, col });
                i += 2;
            } else if "()[],;*/+-".contains(c) {
                tokens.push(Token { tok: Tok::Sym(c), line, col });
                i += 1;
            } else {
                diags.push(Diagnostic {
                    line,
                    column: col,
                    message: format!("unexpected character '{c}'"),
                    severity: Severity::Error,
                });
                i += 1;
            }
        }
        end = (line, raw.chars().count().max(1));
        line += 1;
    }
    (tokens, end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn err_messages(text: &str) -> Vec<String> {
        parse(text).unwrap_err().errors().map(|d| d.message.clone()).collect()
    }

    #[test]
    fn single_h() {
        let c = parse_circuit("OPENQASM 2.0;\nqreg q[1];\nh q[0];\n").unwrap();
        assert_eq!(c.num_qubits(), 1);
        assert_eq!(c.ops(), &[Op::new(Gate::H, &[0])]);
    }

    #[test]
    fn bell_program() {
        let src = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\nh q[0];\ncx q[0],q[1];\n";
        let parsed = parse(src).unwrap();
        assert_eq!(parsed.circuit.ops(), &[Op::new(Gate::H, &[0]), Op::new(Gate::CX, &[0, 1])]);
        assert_eq!(parsed.warnings.len(), 1);
        assert_eq!(parsed.warnings[0].line, 2);
        assert_eq!(parsed.warnings[0].severity, Severity::Warning);
    }

    #[test]
    fn index_out_of_range() {
        let err = parse("OPENQASM 2.0;\nqreg q[2];\ncx q[0],q[5];\n").unwrap_err();
        let d = err.errors().next().unwrap();
        assert!(d.message.contains("index out of range"), "{}", d.message);
        assert_eq!((d.line, d.column), (3, 11));
    }

    #[test]
    fn error_paths() {
        assert!(err_messages("OPENQASM 2.0;\nqreg q[1];\nfoo q[0];")[0].contains("unknown gate"));
        assert!(err_messages("OPENQASM 2.0;\nqreg q[1];\nrz(pi*2*x) q[0];")[0].contains("malformed angle"));
        assert!(err_messages("OPENQASM 2.0;\nrz(pi) q[0];")[0].contains("missing register declaration"));
        assert!(err_messages("OPENQASM 2.0;\ncreg c[1];")[0].contains("missing register declaration"));
        assert!(err_messages("qreg q[1];")[0].contains("missing header"));
        assert!(err_messages("OPENQASM 2.0;\nqreg q[1];\nqreg r[1];")[0].contains("only one qreg"));
        assert!(err_messages("OPENQASM 2.0;\nqreg q[1];\ngate foo a { h a; }")[0].contains("custom gate"));
        assert!(err_messages("OPENQASM 2.0;\nqreg q[2];\ncx q[0],q[0];")[0].contains("twice"));
    }

    #[test]
    fn reports_every_bad_statement() {
        let err = parse("OPENQASM 2.0;\nqreg q[1];\nfoo q[0];\nbar q[0];\nh q[0];\n").unwrap_err();
        let lines: Vec<_> = err.errors().map(|d| d.line).collect();
        assert_eq!(lines, vec![3, 4]);
    }

    #[test]
    fn angle_forms() {
        let src = "OPENQASM 2.0;\nqreg q[1];\nrz(pi/8) q[0];\nrz(-3*pi/4) q[0];\nrz(0.25) q[0];\nrz(-pi) q[0];\nrz(1.5e-3) q[0];\nu(pi/2,0,pi) q[0];\n";
        let c = parse_circuit(src).unwrap();
        let angles: Vec<f64> = c.ops().iter().flat_map(|o| o.gate.angles()).collect();
        let want = [PI / 8.0, -3.0 * PI / 4.0, 0.25, -PI, 1.5e-3, PI / 2.0, 0.0, PI];
        for (a, w) in angles.iter().zip(want) {
            assert!((a - w).abs() < 1e-9);
        }
    }

    #[test]
    fn measure_and_barrier() {
        let src = "OPENQASM 2.0;\nqreg q[3];\ncreg c[3];\nbarrier q;\nmeasure q[1] -> c[2];\nmeasure q -> c;\n";
        let c = parse_circuit(src).unwrap();
        assert_eq!(c.ops()[0], Op::new(Gate::Barrier, &[0, 1, 2]));
        assert_eq!(c.ops()[1], Op::measure(1, 2));
        assert_eq!(c.len(), 5);
    }

    #[test]
    fn serialize_empty() {
        assert_eq!(serialize(&Circuit::new(2, 0)), "OPENQASM 2.0;\nqreg q[2];\n");
    }

    #[test]
    fn barrier_round_trip() {
        let mut c = Circuit::new(3, 1);
        c.h(0).barrier(&[0, 2]).measure(2, 0);
        let text = serialize(&c);
        assert!(text.contains("barrier q[0],q[2];"));
        assert_eq!(parse_circuit(&text).unwrap(), c);
    }

    fn arb_op(n: usize, m: usize) -> impl Strategy<Value = Op> {
        let angle = -10.0..10.0f64;
        (0..11u8, 0..n, 0..n, angle.clone(), angle.clone(), angle, 0..m).prop_map(move |(k, a, b, t, p, l, c)| {
            let b = if a == b { (a + 1) % n } else { b };
            match k {
                0 => Op::new(Gate::H, &[a]),
                1 => Op::new(Gate::X, &[a]),
                2 => Op::new(Gate::SX, &[a]),
                3 => Op::new(Gate::RZ(t), &[a]),
                4 => Op::new(Gate::RX(t * 1e-7), &[a]),
                5 => Op::new(Gate::U(t, p, l), &[a]),
                6 => Op::new(Gate::CX, &[a, b]),
                7 => Op::new(Gate::CP(t), &[a, b]),
                8 => Op::new(Gate::Swap, &[a, b]),
                9 => Op::measure(a, c),
                _ => Op::new(Gate::Barrier, &[b, a]),
            }
        })
    }

    proptest! {
        #[test]
        fn round_trip(ops in proptest::collection::vec(arb_op(4, 3), 0..40)) {
            let c = Circuit::from_ops(4, 3, ops).unwrap();
            let back = parse_circuit(&serialize(&c)).unwrap();
            prop_assert_eq!(back.num_qubits(), c.num_qubits());
            prop_assert_eq!(back.num_clbits(), c.num_clbits());
            prop_assert_eq!(back.len(), c.len());
            for (x, y) in back.ops().iter().zip(c.ops()) {
                prop_assert_eq!(x.gate.class(), y.gate.class());
                prop_assert_eq!(&x.qubits, &y.qubits);
                prop_assert_eq!(x.clbit, y.clbit);
                for (a, b) in x.gate.angles().iter().zip(y.gate.angles()) {
                    prop_assert!((a - b).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn parser_is_total(text in "\\PC{0,200}") {
            // Must return, never panic.
            let _ = parse(&text);
        }

        #[test]
        fn parser_is_total_on_near_valid(body in proptest::collection::vec(
            prop_oneof![
                Just("h q[0];"), Just("cx q[0],q[1];"), Just("rz(pi/"), Just("q[9]"), Just(";"),
                Just("measure q[0] -> c[0];"), Just("creg c[1];"), Just("barrier"), Just("u("), Just(")")
            ], 0..12)) {
            let text = format!("OPENQASM 2.0;\nqreg q[2];\n{}", body.join(" "));
            match parse(&text) {
                Ok(_) => {}
                Err(e) => prop_assert!(e.errors().count() >= 1),
            }
        }
    }
}
