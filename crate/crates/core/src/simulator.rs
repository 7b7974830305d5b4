//! Dense statevector simulation.
//!
//! Qubit 0 is the least-significant bit of the basis index. Measurements are
//! recorded but do not collapse the state, which is returned as it stands
//! before readout.

use std::sync::{Condvar, Mutex, OnceLock};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::{Circuit, Op};
use crate::gate::{Gate, Mat2, Mat4};

pub const DEFAULT_MAX_QUBITS: usize = 24;
/// Overrides [`DEFAULT_MAX_QUBITS`].
pub const MAX_QUBITS_ENV: &str = "QARCH_MAX_QUBITS";
/// Total bytes of amplitudes that concurrent simulations may hold.
pub const MEMORY_BUDGET_ENV: &str = "QARCH_SIM_MEMORY_BUDGET";

const NORM_TOLERANCE: f64 = 1e-10;
const PARALLEL_MIN_QUBITS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("{num_qubits} qubits exceed the simulator limit of {max_qubits} (would need {bytes} bytes of amplitudes)")]
    Capacity { num_qubits: usize, max_qubits: usize, bytes: u128 },
    #[error("simulation needs {bytes} bytes but the memory budget is {budget} bytes")]
    OverBudget { bytes: u128, budget: u128 },
    #[error("initial state has {got} qubits, circuit has {want}")]
    StateSize { got: usize, want: usize },
    #[error("basis index {index} out of range for {num_qubits} qubits")]
    BasisOutOfRange { index: u64, num_qubits: usize },
    #[error("amplitude vector: {0}")]
    BadState(String),
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),
}

/// Bytes needed for `n` qubits of complex double amplitudes.
pub fn state_bytes(num_qubits: usize) -> u128 {
    16u128 << num_qubits
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: u64) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        StateVector { num_qubits, amps }
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, SimError> {
        if !amps.len().is_power_of_two() {
            return Err(SimError::BadState(format!("length {} is not a power of two", amps.len())));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(SimError::BadState(format!("norm {norm} is not 1")));
        }
        Ok(StateVector { num_qubits: amps.len().trailing_zeros() as usize, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    fn parallel(&self) -> bool {
        self.num_qubits >= PARALLEL_MIN_QUBITS
    }

    pub fn apply_1q(&mut self, q: usize, m: &Mat2) {
        let stride = 1usize << q;
        let [[m00, m01], [m10, m11]] = *m;
        let kernel = |chunk: &mut [Complex64]| {
            let (lo, hi) = chunk.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = m00 * x + m01 * y;
                *b = m10 * x + m11 * y;
            }
        };
        if self.parallel() {
            self.amps.par_chunks_mut(stride << 1).for_each(kernel);
        } else {
            self.amps.chunks_mut(stride << 1).for_each(kernel);
        }
    }

    /// Multiplies amplitudes whose `q` bit is 0 by `d0` and 1 by `d1`.
    pub fn apply_diagonal_1q(&mut self, q: usize, d0: Complex64, d1: Complex64) {
        let mask = 1usize << q;
        let kernel = |(i, a): (usize, &mut Complex64)| {
            *a *= if i & mask == 0 { d0 } else { d1 };
        };
        if self.parallel() {
            self.amps.par_iter_mut().enumerate().for_each(kernel);
        } else {
            self.amps.iter_mut().enumerate().for_each(kernel);
        }
    }

    /// Applies `m` (index `2*bit(b) + bit(a)`) to qubits `a`, `b`.
    pub fn apply_2q(&mut self, a: usize, b: usize, m: &Mat4) {
        let (ma, mb) = (1usize << a, 1usize << b);
        let hi = a.max(b);
        let block = 1usize << (hi + 1);
        let kernel = |chunk: &mut [Complex64]| {
            for i in 0..block {
                if i & ma != 0 || i & mb != 0 {
                    continue;
                }
                let idx = [i, i | ma, i | mb, i | ma | mb];
                let v = idx.map(|k| chunk[k]);
                for (r, &k) in idx.iter().enumerate() {
                    chunk[k] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
                }
            }
        };
        if self.parallel() {
            self.amps.par_chunks_mut(block).for_each(kernel);
        } else {
            self.amps.chunks_mut(block).for_each(kernel);
        }
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) {
        let (mc, mt) = (1usize << control, 1usize << target);
        let block = 1usize << (control.max(target) + 1);
        let kernel = |chunk: &mut [Complex64]| {
            for i in 0..block {
                if i & mc != 0 && i & mt == 0 {
                    chunk.swap(i, i | mt);
                }
            }
        };
        if self.parallel() {
            self.amps.par_chunks_mut(block).for_each(kernel);
        } else {
            self.amps.chunks_mut(block).for_each(kernel);
        }
    }

    pub fn apply_swap(&mut self, a: usize, b: usize) {
        let (ma, mb) = (1usize << a, 1usize << b);
        let block = 1usize << (a.max(b) + 1);
        let kernel = |chunk: &mut [Complex64]| {
            for i in 0..block {
                if i & ma != 0 && i & mb == 0 {
                    chunk.swap(i, (i ^ ma) | mb);
                }
            }
        };
        if self.parallel() {
            self.amps.par_chunks_mut(block).for_each(kernel);
        } else {
            self.amps.chunks_mut(block).for_each(kernel);
        }
    }

    pub fn apply_cp(&mut self, a: usize, b: usize, theta: f64) {
        let mask = (1usize << a) | (1usize << b);
        let phase = Complex64::from_polar(1.0, theta);
        let kernel = |(i, amp): (usize, &mut Complex64)| {
            if i & mask == mask {
                *amp *= phase;
            }
        };
        if self.parallel() {
            self.amps.par_iter_mut().enumerate().for_each(kernel);
        } else {
            self.amps.iter_mut().enumerate().for_each(kernel);
        }
    }

    /// Applies one op. Measurements and barriers leave the state unchanged.
    pub fn apply_op(&mut self, op: &Op) {
        let q = &op.qubits;
        match op.gate {
            Gate::Measure | Gate::Barrier => {}
            Gate::RZ(t) => {
                self.apply_diagonal_1q(q[0], Complex64::from_polar(1.0, -t / 2.0), Complex64::from_polar(1.0, t / 2.0))
            }
            Gate::CX => self.apply_cx(q[0], q[1]),
            Gate::CP(t) => self.apply_cp(q[0], q[1], t),
            Gate::Swap => self.apply_swap(q[0], q[1]),
            g => self.apply_1q(q[0], &g.matrix_1q().expect("single-qubit gate")),
        }
    }

    /// Marginal distribution over `qubits`; bit `k` of an outcome is the
    /// value of `qubits[k]`.
    pub fn probabilities(&self, qubits: &[usize]) -> Distribution {
        let mut probs = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let mut key = 0usize;
            for (k, &q) in qubits.iter().enumerate() {
                key |= ((i >> q) & 1) << k;
            }
            probs[key] += p;
        }
        Distribution { width: qubits.len(), probs }
    }
}

/// Dense outcome distribution over `width` bits.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    width: usize,
    probs: Vec<f64>,
}

impl Distribution {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, outcome: u64) -> f64 {
        self.probs.get(outcome as usize).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Bitstring with the highest-index qubit first.
    pub fn label(&self, outcome: u64) -> String {
        (0..self.width).rev().map(|k| if outcome >> k & 1 == 1 { '1' } else { '0' }).collect()
    }

    /// The `k` most likely outcomes; ties resolved by lower outcome.
    pub fn top(&self, k: usize) -> Vec<(u64, f64)> {
        let mut v: Vec<(u64, f64)> = self.probs.iter().enumerate().map(|(i, &p)| (i as u64, p)).collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        v.truncate(k);
        v
    }
}

#[derive(Debug, Clone)]
pub enum InitialState {
    Basis(u64),
    State(StateVector),
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub state: StateVector,
    /// Wall-clock time of amplitude evolution only.
    pub elapsed: Duration,
    /// `(qubit, clbit)` for every measurement, in program order.
    pub measurements: Vec<(usize, usize)>,
}

/// Admission control over total amplitude memory.
struct MemoryBudget {
    limit: u128,
    used: Mutex<u128>,
    freed: Condvar,
}

struct BudgetGuard<'a> {
    budget: &'a MemoryBudget,
    bytes: u128,
}

impl MemoryBudget {
    fn acquire(&self, bytes: u128) -> Result<BudgetGuard<'_>, SimError> {
        if bytes > self.limit {
            return Err(SimError::OverBudget { bytes, budget: self.limit });
        }
        let mut used = self.used.lock().unwrap_or_else(|e| e.into_inner());
        while *used + bytes > self.limit {
            used = self.freed.wait(used).unwrap_or_else(|e| e.into_inner());
        }
        *used += bytes;
        Ok(BudgetGuard { budget: self, bytes })
    }
}

impl Drop for BudgetGuard<'_> {
    fn drop(&mut self) {
        let mut used = self.budget.used.lock().unwrap_or_else(|e| e.into_inner());
        *used -= self.bytes;
        self.budget.freed.notify_all();
    }
}

fn budget() -> &'static MemoryBudget {
    static BUDGET: OnceLock<MemoryBudget> = OnceLock::new();
    BUDGET.get_or_init(|| {
        let default = (2 * state_bytes(max_qubits_from_env())).max(2 * state_bytes(DEFAULT_MAX_QUBITS));
        let limit = std::env::var(MEMORY_BUDGET_ENV).ok().and_then(|v| v.parse().ok()).unwrap_or(default);
        MemoryBudget { limit, used: Mutex::new(0), freed: Condvar::new() }
    })
}

fn max_qubits_from_env() -> usize {
    std::env::var(MAX_QUBITS_ENV).ok().and_then(|v| v.parse().ok()).unwrap_or(DEFAULT_MAX_QUBITS)
}

#[derive(Debug, Clone, Copy)]
pub struct Simulator {
    max_qubits: usize,
}

impl Default for Simulator {
    fn default() -> Self {
        Simulator::from_env()
    }
}

impl Simulator {
    /// Limit taken from `QARCH_MAX_QUBITS`, else [`DEFAULT_MAX_QUBITS`].
    pub fn from_env() -> Self {
        Simulator { max_qubits: max_qubits_from_env() }
    }

    pub fn with_max_qubits(max_qubits: usize) -> Self {
        Simulator { max_qubits }
    }

    pub fn max_qubits(&self) -> usize {
        self.max_qubits
    }

    pub fn check_capacity(&self, num_qubits: usize) -> Result<(), SimError> {
        if num_qubits > self.max_qubits {
            return Err(SimError::Capacity { num_qubits, max_qubits: self.max_qubits, bytes: state_bytes(num_qubits) });
        }
        Ok(())
    }

    pub fn simulate(&self, circuit: &Circuit, initial: InitialState) -> Result<SimOutcome, SimError> {
        let n = circuit.num_qubits();
        self.check_capacity(n)?;
        let _guard = budget().acquire(state_bytes(n))?;
        let mut state = match initial {
            InitialState::Basis(index) => {
                if n < 64 && index >> n != 0 {
                    return Err(SimError::BasisOutOfRange { index, num_qubits: n });
                }
                StateVector::basis(n, index)
            }
            InitialState::State(s) => {
                if s.num_qubits != n {
                    return Err(SimError::StateSize { got: s.num_qubits, want: n });
                }
                s
            }
        };
        let mut measurements = Vec::new();
        let start = Instant::now();
        for op in circuit.ops() {
            if op.gate == Gate::Measure {
                measurements.push((op.qubits[0], op.clbit.unwrap_or(0)));
            }
            state.apply_op(op);
        }
        let elapsed = start.elapsed();
        Ok(SimOutcome { state, elapsed, measurements })
    }

    /// Overlap `|<orig|P^-1 trans>|` where `final_layout[i]` is the qubit of
    /// `transpiled` holding logical qubit `i` at the end. Qubits of
    /// `transpiled` outside the layout image must finish in `|0>`; any
    /// weight elsewhere lowers the result.
    pub fn equivalence(&self, original: &Circuit, transpiled: &Circuit, final_layout: &[usize]) -> Result<f64, SimError> {
        let n = original.num_qubits();
        if final_layout.len() < n {
            return Err(SimError::LayoutMismatch(format!(
                "layout covers {} qubits, circuit has {n}",
                final_layout.len()
            )));
        }
        let image = &final_layout[..n];
        let mut seen = vec![false; transpiled.num_qubits()];
        for &p in image {
            if p >= transpiled.num_qubits() || seen[p] {
                return Err(SimError::LayoutMismatch(format!("invalid or repeated physical qubit {p}")));
            }
            seen[p] = true;
        }
        let (compact, map) = compact(transpiled, image);
        self.check_capacity(compact.num_qubits())?;
        self.check_capacity(n)?;
        let orig = self.simulate(original, InitialState::Basis(0))?.state;
        let trans = self.simulate(&compact, InitialState::Basis(0))?.state;
        let targets: Vec<usize> = image.iter().map(|&p| map[p]).collect();
        let mut overlap = Complex64::new(0.0, 0.0);
        for (x, a) in orig.amps.iter().enumerate() {
            let mut y = 0usize;
            for (i, &t) in targets.iter().enumerate() {
                y |= ((x >> i) & 1) << t;
            }
            overlap += a.conj() * trans.amps[y];
        }
        Ok(overlap.norm().min(1.0))
    }
}

/// Restricts `circuit` to its active qubits plus `keep`, renumbered in
/// ascending order. Returns the compacted circuit and the old-to-new map
/// (`usize::MAX` for dropped qubits).
pub fn compact(circuit: &Circuit, keep: &[usize]) -> (Circuit, Vec<usize>) {
    let mut used = vec![false; circuit.num_qubits()];
    for q in circuit.active_qubits().into_iter().chain(keep.iter().copied()) {
        used[q] = true;
    }
    let mut map = vec![usize::MAX; circuit.num_qubits()];
    let mut next = 0;
    for (q, u) in used.iter().enumerate() {
        if *u {
            map[q] = next;
            next += 1;
        }
    }
    let compact = circuit.remap(&map, next).expect("active qubits are all mapped");
    (compact, map)
}

/// Runs with the environment-configured simulator.
pub fn simulate(circuit: &Circuit, initial: InitialState) -> Result<SimOutcome, SimError> {
    Simulator::from_env().simulate(circuit, initial)
}

pub fn equivalence(original: &Circuit, transpiled: &Circuit, final_layout: &[usize]) -> Result<f64, SimError> {
    Simulator::from_env().equivalence(original, transpiled, final_layout)
}
