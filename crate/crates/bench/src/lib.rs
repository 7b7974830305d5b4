//! Shared inputs for the criterion benchmarks.

use qarch_core::arch::{self, Architecture};
use qarch_core::{BenchmarkSpec, Circuit};

/// Architectures spanning the connectivity range of each family.
pub const ARCHS: [&str; 4] = ["r1", "r4", "s1", "s4"];

pub fn architecture(name: &str) -> Architecture {
    arch::builtin(name).expect("built-in architecture")
}

pub fn benchmark(name: &str) -> Circuit {
    name.parse::<BenchmarkSpec>().expect("benchmark name").generate().expect("benchmark generates")
}
