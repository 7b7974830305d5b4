//! Native-gate transpilation: decompose, choose a layout, insert SWAPs,
//! optimize.

mod layout;
mod optimize;
mod route;
mod synth;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::arch::Architecture;
use crate::circuit::{Circuit, Op};
use crate::gate::Gate;

pub use layout::Layout;
pub use optimize::{absorb_trailing_swaps, cancel_cx_pairs, fold_swaps, merge_single_qubit_runs, optimize, Optimized};
pub use route::{route_basic, route_sabre, sabre_layout, Routed};
pub use synth::{decompose_to_native, euler_angles, is_identity_up_to_phase, is_native, push_native, synthesize_1q};

pub const MAX_OPT_LEVEL: u8 = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TranspileError {
    #[error("circuit has {circuit} qubits but the architecture has only {device}")]
    TooManyQubits { circuit: usize, device: usize },
    #[error("optimization level {0} is out of range 0..=3")]
    BadOptLevel(u8),
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("unknown router '{0}' (expected basic or sabre)")]
    UnknownRouter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RouterKind {
    /// Trivial layout, shortest-path SWAP chains.
    Basic,
    /// Forward-backward refined layout, lookahead SWAP search.
    Sabre,
}

impl RouterKind {
    pub const ALL: [RouterKind; 2] = [RouterKind::Basic, RouterKind::Sabre];

    pub fn as_str(self) -> &'static str {
        match self {
            RouterKind::Basic => "basic",
            RouterKind::Sabre => "sabre",
        }
    }
}

impl fmt::Display for RouterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RouterKind {
    type Err = TranspileError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "basic" => Ok(RouterKind::Basic),
            "sabre" => Ok(RouterKind::Sabre),
            _ => Err(TranspileError::UnknownRouter(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SabreParams {
    pub extended_set_size: usize,
    pub extended_set_weight: f64,
    pub decay_increment: f64,
    /// Decay multipliers reset after this many consecutive SWAPs.
    pub decay_reset_interval: usize,
    /// Forward-backward passes used to refine the initial layout.
    pub layout_iterations: usize,
}

impl Default for SabreParams {
    fn default() -> Self {
        SabreParams {
            extended_set_size: 20,
            extended_set_weight: 0.5,
            decay_increment: 0.001,
            decay_reset_interval: 5,
            layout_iterations: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranspileConfig {
    pub router: RouterKind,
    pub opt_level: u8,
    pub seed: u64,
    pub sabre: SabreParams,
}

impl TranspileConfig {
    pub fn new(router: RouterKind, opt_level: u8, seed: u64) -> Self {
        TranspileConfig { router, opt_level, seed, sabre: SabreParams::default() }
    }
}

impl Default for TranspileConfig {
    fn default() -> Self {
        TranspileConfig::new(RouterKind::Sabre, 1, 0)
    }
}

#[derive(Debug, Clone)]
pub struct TranspileOutcome {
    /// Native circuit over the architecture's physical qubits.
    pub circuit: Circuit,
    pub initial_layout: Layout,
    /// Where each logical qubit's state resides at the end.
    pub final_layout: Layout,
    /// SWAPs inserted by the router, before optimization.
    pub swaps: usize,
    pub t_trans: Duration,
    pub config: TranspileConfig,
}

/// Decompose, lay out, route, expand SWAPs and optimize.
pub fn transpile(
    circuit: &Circuit,
    arch: &Architecture,
    config: &TranspileConfig,
) -> Result<TranspileOutcome, TranspileError> {
    let start = Instant::now();
    if config.opt_level > MAX_OPT_LEVEL {
        return Err(TranspileError::BadOptLevel(config.opt_level));
    }
    let n_phys = arch.num_qubits();
    if circuit.num_qubits() > n_phys {
        return Err(TranspileError::TooManyQubits { circuit: circuit.num_qubits(), device: n_phys });
    }
    let native = decompose_to_native(circuit);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (initial_layout, routed) = match config.router {
        RouterKind::Basic => {
            let layout = Layout::trivial(circuit.num_qubits(), n_phys);
            let routed = route_basic(&native, arch, &layout);
            (layout, routed)
        }
        RouterKind::Sabre => {
            let layout = sabre_layout(&native, arch, &config.sabre, &mut rng);
            let routed = route_sabre(&native, arch, &layout, &config.sabre, &mut rng);
            (layout, routed)
        }
    };
    let expanded = decompose_to_native(&routed.circuit);
    let optimized = optimize(&expanded, config.opt_level);
    let final_layout = routed.final_layout.relabel(&optimized.wire_map);
    debug_assert!(validate_output(&optimized.circuit, arch).is_ok());
    Ok(TranspileOutcome {
        circuit: optimized.circuit,
        initial_layout,
        final_layout,
        swaps: routed.swaps,
        t_trans: start.elapsed(),
        config: config.clone(),
    })
}

/// Checks the output contract: native gates only, two-qubit gates on couplers.
pub fn validate_output(circuit: &Circuit, arch: &Architecture) -> Result<(), String> {
    for (i, op) in circuit.ops().iter().enumerate() {
        if !is_native(&op.gate) {
            return Err(format!("op {i}: {} is not native", op.gate.name()));
        }
        if op.is_two_qubit() && !arch.is_coupled(op.qubits[0], op.qubits[1]) {
            return Err(format!("op {i}: cx {} {} is not on a coupler", op.qubits[0], op.qubits[1]));
        }
    }
    Ok(())
}

/// Fraction of two-qubit gates acting on coupled pairs (1.0 when there are none).
pub fn coupled_fraction(circuit: &Circuit, arch: &Architecture) -> f64 {
    let two: Vec<&Op> = circuit.ops().iter().filter(|op| op.is_two_qubit()).collect();
    if two.is_empty() {
        return 1.0;
    }
    let ok = two.iter().filter(|op| arch.is_coupled(op.qubits[0], op.qubits[1])).count();
    ok as f64 / two.len() as f64
}

/// Number of SWAP gates in a circuit.
pub fn count_swaps(circuit: &Circuit) -> usize {
    circuit.ops().iter().filter(|op| op.gate == Gate::Swap).count()
}

#[cfg(test)]
mod tests;
