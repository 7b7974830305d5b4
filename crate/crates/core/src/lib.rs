//! Benchmarking qubit coupling architectures: circuits, coupling maps,
//! benchmark generators, a routing transpiler, error scoring, a statevector
//! simulator and the experiment harness that ties them together.

pub mod arch;
pub mod benchgen;
pub mod circuit;
pub mod gate;
pub mod harness;
pub mod qasm;
pub mod scoring;
pub mod simulator;
pub mod transpiler;

pub use arch::{Architecture, DistanceMatrix, Family};
pub use circuit::{Circuit, GateCounts, Op};
pub use gate::{Gate, GateClass};
pub use benchgen::{BenchmarkSpec, Generator};
pub use simulator::{InitialState, SimError, Simulator, StateVector};
pub use transpiler::{Layout, RouterKind, TranspileConfig, TranspileOutcome};
pub use harness::{BenchmarkRecord, Protocol, Status};
pub use scoring::{ErrorModel, Metrics};
