//! Benchmark circuit generators.
//!
//! Names follow `<family>_<qubits>`, e.g. `qft_12`, `surface_25`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::circuit::{Circuit, Op};
use crate::gate::{wrap_angle, Gate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("{family} needs at least {min} qubit(s), got {got}")]
    TooFewQubits { family: &'static str, min: usize, got: usize },
    #[error("phase {0} is outside [0, 1)")]
    PhaseOutOfRange(f64),
    #[error("surface lattice dimensions must be odd, got {0}x{1}")]
    EvenDimension(usize, usize),
    #[error("at least one round/step is required")]
    ZeroRounds,
    #[error("stabilizer {index} '{text}': {reason}")]
    BadStabilizer { index: usize, text: String, reason: String },
    #[error("unknown benchmark '{0}'")]
    Unknown(String),
    #[error("no {family} circuit has exactly {qubits} qubits")]
    NoSuchSize { family: &'static str, qubits: usize },
}

/// Gate list of the Fourier transform over `qubits` (little-endian).
fn qft_ops(qubits: &[usize]) -> Vec<Op> {
    let n = qubits.len();
    let mut ops = Vec::with_capacity(n * (n + 1) / 2 + n / 2);
    for j in (0..n).rev() {
        ops.push(Op::new(Gate::H, &[qubits[j]]));
        for k in (0..j).rev() {
            let angle = PI / 2f64.powi((j - k) as i32);
            ops.push(Op::new(Gate::CP(angle), &[qubits[j], qubits[k]]));
        }
    }
    for i in 0..n / 2 {
        ops.push(Op::new(Gate::Swap, &[qubits[i], qubits[n - 1 - i]]));
    }
    ops
}

fn inverse_ops(ops: Vec<Op>) -> Vec<Op> {
    ops.into_iter().rev().map(|op| Op { gate: op.gate.inverse(), ..op }).collect()
}

/// Quantum Fourier transform: `n` H, `n(n-1)/2` CP and `n/2` SWAP.
pub fn qft(n: usize) -> Result<Circuit, GenError> {
    if n == 0 {
        return Err(GenError::TooFewQubits { family: "qft", min: 1, got: 0 });
    }
    let qubits: Vec<usize> = (0..n).collect();
    Ok(Circuit::from_ops(n, 0, qft_ops(&qubits)).expect("generated ops are valid"))
}

/// Phase estimation of `P(2 pi theta)` with `n - 1` counting qubits and the
/// eigenstate `|1>` on the last qubit. Counting qubit `j` is read into
/// clbit `j`.
pub fn qpe(n: usize, theta: f64) -> Result<Circuit, GenError> {
    if n < 2 {
        return Err(GenError::TooFewQubits { family: "qpe", min: 2, got: n });
    }
    if !(0.0..1.0).contains(&theta) {
        return Err(GenError::PhaseOutOfRange(theta));
    }
    let m = n - 1;
    let target = m;
    let mut c = Circuit::new(n, m);
    c.x(target);
    for q in 0..m {
        c.h(q);
    }
    for j in 0..m {
        // 2^j * theta reduced mod 1 before scaling keeps the angle exact
        let turns = (theta * 2f64.powi(j as i32)).rem_euclid(1.0);
        c.cp(wrap_angle(TAU * turns), j, target);
    }
    let counting: Vec<usize> = (0..m).collect();
    for op in inverse_ops(qft_ops(&counting)) {
        c.push(op);
    }
    for q in 0..m {
        c.measure(q, q);
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingParams {
    pub coupling: f64,
    pub field: f64,
    pub time: f64,
    pub steps: usize,
}

impl Default for IsingParams {
    fn default() -> Self {
        IsingParams { coupling: 1.0, field: 1.0, time: 1.0, steps: 3 }
    }
}

/// First-order Trotter evolution under `-J sum Z_i Z_{i+1} - h sum X_i` on an
/// open chain. Each step is `n-1` CX-RZ-CX blocks followed by `n` RX.
pub fn ising(n: usize, params: IsingParams) -> Result<Circuit, GenError> {
    if n < 2 {
        return Err(GenError::TooFewQubits { family: "ising", min: 2, got: n });
    }
    if params.steps == 0 {
        return Err(GenError::ZeroRounds);
    }
    let dt = params.time / params.steps as f64;
    let zz = 2.0 * params.coupling * dt;
    let x = 2.0 * params.field * dt;
    let mut c = Circuit::new(n, 0);
    for _ in 0..params.steps {
        for i in 0..n - 1 {
            c.cx(i, i + 1).rz(zz, i + 1).cx(i, i + 1);
        }
        for i in 0..n {
            c.rx(x, i);
        }
    }
    Ok(c)
}

/// Checkerboard surface-code lattice of `rows x cols` qubits, `q = i*cols + j`.
/// Sites with `i + j` odd are measure qubits: X-type on even rows, Z-type on
/// odd rows. Each round entangles every measure qubit with its lattice
/// neighbours in N, W, E, S order and measures it.
pub fn surface(rows: usize, cols: usize, rounds: usize) -> Result<Circuit, GenError> {
    if rows % 2 == 0 || cols % 2 == 0 {
        return Err(GenError::EvenDimension(rows, cols));
    }
    if rounds == 0 {
        return Err(GenError::ZeroRounds);
    }
    let idx = |i: usize, j: usize| i * cols + j;
    let ancillas: Vec<(usize, usize)> =
        (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).filter(|(i, j)| (i + j) % 2 == 1).collect();
    let is_x = |i: usize| i % 2 == 0;
    let mut c = Circuit::new(rows * cols, ancillas.len() * rounds);
    let dirs: [(isize, isize); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
    for r in 0..rounds {
        for &(i, j) in &ancillas {
            if is_x(i) {
                c.h(idx(i, j));
            }
        }
        for (di, dj) in dirs {
            for &(i, j) in &ancillas {
                let (ni, nj) = (i as isize + di, j as isize + dj);
                if ni < 0 || nj < 0 || ni >= rows as isize || nj >= cols as isize {
                    continue;
                }
                let (a, d) = (idx(i, j), idx(ni as usize, nj as usize));
                if is_x(i) {
                    c.cx(a, d);
                } else {
                    c.cx(d, a);
                }
            }
        }
        for &(i, j) in &ancillas {
            if is_x(i) {
                c.h(idx(i, j));
            }
        }
        for (k, &(i, j)) in ancillas.iter().enumerate() {
            c.measure(idx(i, j), r * ancillas.len() + k);
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pauli {
    I,
    X,
    Y,
    Z,
}

fn parse_stabilizers(data_count: usize, stabilizers: &[&str]) -> Result<Vec<Vec<Pauli>>, GenError> {
    stabilizers
        .iter()
        .enumerate()
        .map(|(index, s)| {
            let bad = |reason: String| GenError::BadStabilizer { index, text: s.to_string(), reason };
            let paulis = s
                .chars()
                .map(|ch| match ch {
                    'I' => Ok(Pauli::I),
                    'X' => Ok(Pauli::X),
                    'Y' => Ok(Pauli::Y),
                    'Z' => Ok(Pauli::Z),
                    other => Err(bad(format!("'{other}' is not a Pauli"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if paulis.len() != data_count {
                return Err(bad(format!("length {} but there are {data_count} data qubits", paulis.len())));
            }
            Ok(paulis)
        })
        .collect()
}

/// Appends one syndrome-extraction round. Stabilizer `k` uses ancilla
/// `ancilla_start + k` and clbit `clbit_start + k`; character `i` of each
/// string acts on `data[i]`.
fn append_round(c: &mut Circuit, data: &[usize], ancilla_start: usize, clbit_start: usize, stabs: &[Vec<Pauli>]) {
    for (k, paulis) in stabs.iter().enumerate() {
        let anc = ancilla_start + k;
        let z_only = paulis.iter().all(|p| matches!(p, Pauli::I | Pauli::Z));
        if z_only {
            for (i, p) in paulis.iter().enumerate() {
                if *p == Pauli::Z {
                    c.cx(data[i], anc);
                }
            }
        } else {
            c.h(anc);
            for (i, p) in paulis.iter().enumerate() {
                let q = data[i];
                match p {
                    Pauli::I => {}
                    Pauli::X => {
                        c.cx(anc, q);
                    }
                    Pauli::Z => {
                        c.h(q).cx(anc, q).h(q);
                    }
                    Pauli::Y => {
                        c.rz(-FRAC_PI_2, q).cx(anc, q).rz(FRAC_PI_2, q);
                    }
                }
            }
            c.h(anc);
        }
        c.measure(anc, clbit_start + k);
    }
}

/// One round of parity checks on `data_count` data qubits (0..data_count)
/// with one fresh ancilla and one clbit per stabilizer.
pub fn stabilizer_round(data_count: usize, stabilizers: &[&str]) -> Result<Circuit, GenError> {
    let stabs = parse_stabilizers(data_count, stabilizers)?;
    let k = stabs.len();
    let mut c = Circuit::new(data_count + k, k);
    let data: Vec<usize> = (0..data_count).collect();
    append_round(&mut c, &data, data_count, 0, &stabs);
    Ok(c)
}

/// Prepares data with `prep`, then runs `rounds` rounds of `stabilizers`,
/// each on fresh ancillas.
pub fn stabilizer_code(
    data_count: usize,
    prep: &Circuit,
    stabilizers: &[&str],
    rounds: usize,
) -> Result<Circuit, GenError> {
    if rounds == 0 {
        return Err(GenError::ZeroRounds);
    }
    let stabs = parse_stabilizers(data_count, stabilizers)?;
    let k = stabs.len();
    let mut c = Circuit::new(data_count + k * rounds, k * rounds);
    c.extend(prep);
    let data: Vec<usize> = (0..data_count).collect();
    for r in 0..rounds {
        append_round(&mut c, &data, data_count + r * k, r * k, &stabs);
    }
    Ok(c)
}

/// Generators of the [[7,1,3]] code: X checks then Z checks.
pub const STEANE_STABILIZERS: [&str; 6] = ["IIIXXXX", "IXXIIXX", "XIXIXIX", "IIIZZZZ", "IZZIIZZ", "ZIZIZIZ"];

/// Encoder for the logical zero of the [[7,1,3]] code.
pub fn steane_encoder() -> Circuit {
    let mut c = Circuit::new(7, 0);
    // pivots 0, 1, 3 each appear in exactly one X check
    c.h(0).h(1).h(3);
    for t in [2, 4, 6] {
        c.cx(0, t);
    }
    for t in [2, 5, 6] {
        c.cx(1, t);
    }
    for t in [4, 5, 6] {
        c.cx(3, t);
    }
    c
}

/// Encoded logical zero followed by `rounds` syndrome rounds
/// (`7 + 6 * rounds` qubits).
pub fn steane(rounds: usize) -> Result<Circuit, GenError> {
    stabilizer_code(7, &steane_encoder(), &STEANE_STABILIZERS, rounds)
}

/// [[4,2,2]] code: GHZ preparation then `rounds` rounds of XXXX and ZZZZ
/// checks (`4 + 2 * rounds` qubits).
pub fn code422(rounds: usize) -> Result<Circuit, GenError> {
    let mut prep = Circuit::new(4, 0);
    prep.h(0).cx(0, 1).cx(0, 2).cx(0, 3);
    stabilizer_code(4, &prep, &["XXXX", "ZZZZ"], rounds)
}

pub const DEFAULT_QPE_PHASE: f64 = 0.15;

#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Qft { qubits: usize },
    Qpe { qubits: usize, phase: f64 },
    Ising { qubits: usize, params: IsingParams },
    Surface { rows: usize, cols: usize, rounds: usize },
    Steane { rounds: usize },
    Code422 { rounds: usize },
}

impl Generator {
    pub fn family(&self) -> &'static str {
        match self {
            Generator::Qft { .. } => "qft",
            Generator::Qpe { .. } => "qpe",
            Generator::Ising { .. } => "ising",
            Generator::Surface { .. } => "surface",
            Generator::Steane { .. } => "steane",
            Generator::Code422 { .. } => "code422",
        }
    }

    pub fn num_qubits(&self) -> usize {
        match *self {
            Generator::Qft { qubits } | Generator::Qpe { qubits, .. } | Generator::Ising { qubits, .. } => qubits,
            Generator::Surface { rows, cols, .. } => rows * cols,
            Generator::Steane { rounds } => 7 + 6 * rounds,
            Generator::Code422 { rounds } => 4 + 2 * rounds,
        }
    }

    pub fn generate(&self) -> Result<Circuit, GenError> {
        match *self {
            Generator::Qft { qubits } => qft(qubits),
            Generator::Qpe { qubits, phase } => qpe(qubits, phase),
            Generator::Ising { qubits, params } => ising(qubits, params),
            Generator::Surface { rows, cols, rounds } => surface(rows, cols, rounds),
            Generator::Steane { rounds } => steane(rounds),
            Generator::Code422 { rounds } => code422(rounds),
        }
    }

    /// Default-parameter generator of `family` with exactly `qubits` qubits.
    pub fn for_size(family: &str, qubits: usize) -> Result<Generator, GenError> {
        let none = |family: &'static str| GenError::NoSuchSize { family, qubits };
        Ok(match family {
            "qft" => Generator::Qft { qubits },
            "qpe" => Generator::Qpe { qubits, phase: DEFAULT_QPE_PHASE },
            "ising" => Generator::Ising { qubits, params: IsingParams::default() },
            "surface" => {
                // most square odd factorisation with rows >= cols
                let cols = (1..=qubits)
                    .rev()
                    .filter(|c| c % 2 == 1 && qubits % c == 0)
                    .find(|&c| c * c <= qubits && (qubits / c) % 2 == 1)
                    .ok_or_else(|| none("surface"))?;
                Generator::Surface { rows: qubits / cols, cols, rounds: 1 }
            }
            "steane" => {
                if qubits < 13 || (qubits - 7) % 6 != 0 {
                    return Err(none("steane"));
                }
                Generator::Steane { rounds: (qubits - 7) / 6 }
            }
            "code422" => {
                if qubits < 6 || qubits % 2 != 0 {
                    return Err(none("code422"));
                }
                Generator::Code422 { rounds: (qubits - 4) / 2 }
            }
            other => return Err(GenError::Unknown(other.to_string())),
        })
    }
}

/// A named benchmark; the name's numeric suffix is its qubit count.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSpec {
    pub name: String,
    pub generator: Generator,
}

impl BenchmarkSpec {
    pub fn new(generator: Generator) -> Self {
        BenchmarkSpec { name: format!("{}_{}", generator.family(), generator.num_qubits()), generator }
    }

    pub fn num_qubits(&self) -> usize {
        self.generator.num_qubits()
    }

    pub fn generate(&self) -> Result<Circuit, GenError> {
        let c = self.generator.generate()?;
        debug_assert_eq!(c.num_qubits(), self.num_qubits());
        Ok(c)
    }
}

impl FromStr for BenchmarkSpec {
    type Err = GenError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (family, size) = s.rsplit_once('_').ok_or_else(|| GenError::Unknown(s.to_string()))?;
        let qubits: usize = size.parse().map_err(|_| GenError::Unknown(s.to_string()))?;
        Ok(BenchmarkSpec::new(Generator::for_size(family, qubits)?))
    }
}

impl fmt::Display for BenchmarkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

pub const DEFAULT_SUITE: [&str; 9] =
    ["qft_12", "qft_16", "qft_30", "qft_32", "qpe_15", "steane_25", "surface_15", "surface_25", "ising_6"];

pub fn default_suite() -> Vec<BenchmarkSpec> {
    DEFAULT_SUITE.iter().map(|n| n.parse().expect("default names are valid")).collect()
}

const BUNDLED: [(&str, &str); 9] = [
    ("qft_12", include_str!("../data/benchmarks/qft_12.qasm")),
    ("qft_16", include_str!("../data/benchmarks/qft_16.qasm")),
    ("qft_30", include_str!("../data/benchmarks/qft_30.qasm")),
    ("qft_32", include_str!("../data/benchmarks/qft_32.qasm")),
    ("qpe_15", include_str!("../data/benchmarks/qpe_15.qasm")),
    ("steane_25", include_str!("../data/benchmarks/steane_25.qasm")),
    ("surface_15", include_str!("../data/benchmarks/surface_15.qasm")),
    ("surface_25", include_str!("../data/benchmarks/surface_25.qasm")),
    ("ising_6", include_str!("../data/benchmarks/ising_6.qasm")),
];

/// The pre-generated interchange files for the default suite.
pub fn bundled() -> Vec<(&'static str, Circuit)> {
    BUNDLED
        .iter()
        .map(|(name, src)| (*name, crate::qasm::parse_circuit(src).expect("bundled benchmark parses")))
        .collect()
}
