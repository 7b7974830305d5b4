//! Circuit IR: an ordered list of operations over indexed qubits and clbits.

use std::collections::BTreeMap;

use smallvec::SmallVec;
use thiserror::Error;

use crate::gate::{Arity, Gate, GateClass};

pub type Qubits = SmallVec<[usize; 2]>;

#[derive(Debug, Clone, PartialEq)]
pub struct Op {
    pub gate: Gate,
    pub qubits: Qubits,
    pub clbit: Option<usize>,
}

impl Op {
    pub fn new(gate: Gate, qubits: &[usize]) -> Self {
        Op { gate, qubits: SmallVec::from_slice(qubits), clbit: None }
    }

    pub fn measure(qubit: usize, clbit: usize) -> Self {
        Op { gate: Gate::Measure, qubits: SmallVec::from_slice(&[qubit]), clbit: Some(clbit) }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.gate.class().is_two_qubit()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("op {index} ({gate}): qubit {qubit} out of range for {num_qubits} qubits")]
    QubitOutOfRange { index: usize, gate: &'static str, qubit: usize, num_qubits: usize },
    #[error("op {index} ({gate}): clbit {clbit} out of range for {num_clbits} clbits")]
    ClbitOutOfRange { index: usize, gate: &'static str, clbit: usize, num_clbits: usize },
    #[error("op {index} ({gate}): expected {expected} qubits, got {got}")]
    Arity { index: usize, gate: &'static str, expected: usize, got: usize },
    #[error("op {index} ({gate}): repeated qubit {qubit}")]
    RepeatedQubit { index: usize, gate: &'static str, qubit: usize },
    #[error("op {index} ({gate}): non-finite angle")]
    NonFiniteAngle { index: usize, gate: &'static str },
    #[error("op {index}: measure needs a clbit")]
    MissingClbit { index: usize },
}

/// A quantum circuit. Construct with [`Circuit::new`] and push ops with the
/// builder helpers; [`Circuit::validate`] checks every invariant.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    num_qubits: usize,
    num_clbits: usize,
    ops: Vec<Op>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Self {
        Circuit { num_qubits, num_clbits, ops: Vec::new() }
    }

    /// Builds a circuit from raw parts, checking invariants.
    pub fn from_ops(num_qubits: usize, num_clbits: usize, ops: Vec<Op>) -> Result<Self, CircuitError> {
        let c = Circuit { num_qubits, num_clbits, ops };
        c.validate()?;
        Ok(c)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_clbits(&self) -> usize {
        self.num_clbits
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn into_ops(self) -> Vec<Op> {
        self.ops
    }

    /// Appends an op. Panics if it violates the circuit invariants; use
    /// [`Circuit::try_push`] for untrusted input.
    pub fn push(&mut self, op: Op) -> &mut Self {
        if let Err(e) = self.check_op(self.ops.len(), &op) {
            panic!("invalid op: {e}");
        }
        self.ops.push(op);
        self
    }

    pub fn try_push(&mut self, op: Op) -> Result<&mut Self, CircuitError> {
        self.check_op(self.ops.len(), &op)?;
        self.ops.push(op);
        Ok(self)
    }

    pub fn apply(&mut self, gate: Gate, qubits: &[usize]) -> &mut Self {
        self.push(Op::new(gate, qubits))
    }

    pub fn h(&mut self, q: usize) -> &mut Self {
        self.apply(Gate::H, &[q])
    }

    pub fn x(&mut self, q: usize) -> &mut Self {
        self.apply(Gate::X, &[q])
    }

    pub fn rz(&mut self, theta: f64, q: usize) -> &mut Self {
        self.apply(Gate::RZ(theta), &[q])
    }

    pub fn rx(&mut self, theta: f64, q: usize) -> &mut Self {
        self.apply(Gate::RX(theta), &[q])
    }

    pub fn cx(&mut self, control: usize, target: usize) -> &mut Self {
        self.apply(Gate::CX, &[control, target])
    }

    pub fn cp(&mut self, theta: f64, control: usize, target: usize) -> &mut Self {
        self.apply(Gate::CP(theta), &[control, target])
    }

    pub fn swap(&mut self, a: usize, b: usize) -> &mut Self {
        self.apply(Gate::Swap, &[a, b])
    }

    pub fn measure(&mut self, q: usize, c: usize) -> &mut Self {
        self.push(Op::measure(q, c))
    }

    pub fn barrier(&mut self, qubits: &[usize]) -> &mut Self {
        self.apply(Gate::Barrier, qubits)
    }

    /// Appends every op of `other`, which must fit in this circuit's registers.
    pub fn extend(&mut self, other: &Circuit) -> &mut Self {
        for op in &other.ops {
            self.push(op.clone());
        }
        self
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        for (i, op) in self.ops.iter().enumerate() {
            self.check_op(i, op)?;
        }
        Ok(())
    }

    fn check_op(&self, index: usize, op: &Op) -> Result<(), CircuitError> {
        let gate = op.gate.name();
        match op.gate.arity() {
            Arity::Fixed(n) if op.qubits.len() != n => {
                return Err(CircuitError::Arity { index, gate, expected: n, got: op.qubits.len() })
            }
            Arity::AtLeastOne if op.qubits.is_empty() => {
                return Err(CircuitError::Arity { index, gate, expected: 1, got: 0 })
            }
            _ => {}
        }
        for (k, &q) in op.qubits.iter().enumerate() {
            if q >= self.num_qubits {
                return Err(CircuitError::QubitOutOfRange { index, gate, qubit: q, num_qubits: self.num_qubits });
            }
            if op.qubits[..k].contains(&q) {
                return Err(CircuitError::RepeatedQubit { index, gate, qubit: q });
            }
        }
        if op.gate.angles().iter().any(|a| !a.is_finite()) {
            return Err(CircuitError::NonFiniteAngle { index, gate });
        }
        match (op.gate, op.clbit) {
            (Gate::Measure, None) => return Err(CircuitError::MissingClbit { index }),
            (_, Some(c)) if c >= self.num_clbits => {
                return Err(CircuitError::ClbitOutOfRange { index, gate, clbit: c, num_clbits: self.num_clbits })
            }
            _ => {}
        }
        Ok(())
    }

    /// Longest dependency chain, counting every op (barriers and measurements
    /// included) as one slot on each of its qubits.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.num_qubits];
        let mut depth = 0;
        for op in &self.ops {
            let l = op.qubits.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
            for &q in &op.qubits {
                level[q] = l;
            }
            depth = depth.max(l);
        }
        depth
    }

    /// As-soon-as-possible layering; returns op indices per layer.
    pub fn layers(&self) -> Vec<Vec<usize>> {
        let mut level = vec![0usize; self.num_qubits];
        let mut layers: Vec<Vec<usize>> = Vec::new();
        for (i, op) in self.ops.iter().enumerate() {
            let l = op.qubits.iter().map(|&q| level[q]).max().unwrap_or(0);
            for &q in &op.qubits {
                level[q] = l + 1;
            }
            if layers.len() <= l {
                layers.resize_with(l + 1, Vec::new);
            }
            layers[l].push(i);
        }
        layers
    }

    pub fn gate_counts(&self) -> GateCounts {
        let mut counts = BTreeMap::new();
        for op in &self.ops {
            *counts.entry(op.gate.class()).or_insert(0) += 1;
        }
        GateCounts(counts)
    }

    /// Number of unitary gates (measurements and barriers excluded).
    pub fn num_gates(&self) -> usize {
        self.ops.iter().filter(|op| op.gate.is_unitary()).count()
    }

    pub fn num_two_qubit_gates(&self) -> usize {
        self.ops.iter().filter(|op| op.is_two_qubit()).count()
    }

    /// Qubits touched by at least one op, ascending.
    pub fn active_qubits(&self) -> Vec<usize> {
        let mut used = vec![false; self.num_qubits];
        for op in &self.ops {
            for &q in &op.qubits {
                used[q] = true;
            }
        }
        (0..self.num_qubits).filter(|&q| used[q]).collect()
    }

    /// Relabels qubits through `map` (old index -> new index) into a circuit
    /// of `num_qubits` qubits.
    pub fn remap(&self, map: &[usize], num_qubits: usize) -> Result<Circuit, CircuitError> {
        let ops = self
            .ops
            .iter()
            .map(|op| Op { gate: op.gate, qubits: op.qubits.iter().map(|&q| map[q]).collect(), clbit: op.clbit })
            .collect();
        Circuit::from_ops(num_qubits, self.num_clbits, ops)
    }

    /// Same registers, ops in reverse order.
    pub fn reversed(&self) -> Circuit {
        let mut ops = self.ops.clone();
        ops.reverse();
        Circuit { num_qubits: self.num_qubits, num_clbits: self.num_clbits, ops }
    }

    /// Builds a circuit without re-validating; callers guarantee invariants.
    pub(crate) fn from_ops_unchecked(num_qubits: usize, num_clbits: usize, ops: Vec<Op>) -> Circuit {
        debug_assert!(Circuit { num_qubits, num_clbits, ops: Vec::new() }.check_all(&ops));
        Circuit { num_qubits, num_clbits, ops }
    }

    fn check_all(&self, ops: &[Op]) -> bool {
        ops.iter().enumerate().all(|(i, op)| self.check_op(i, op).is_ok())
    }
}

/// Gate tally keyed by class, in a stable order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GateCounts(pub BTreeMap<GateClass, usize>);

impl GateCounts {
    pub fn get(&self, class: GateClass) -> usize {
        self.0.get(&class).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    pub fn single_qubit(&self) -> usize {
        self.0.iter().filter(|(c, _)| c.is_single_qubit()).map(|(_, n)| n).sum()
    }

    pub fn two_qubit(&self) -> usize {
        self.0.iter().filter(|(c, _)| c.is_two_qubit()).map(|(_, n)| n).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (GateClass, usize)> + '_ {
        self.0.iter().map(|(c, n)| (*c, *n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn depth_examples() {
        assert_eq!(Circuit::new(2, 0).depth(), 0);

        let mut c = Circuit::new(2, 0);
        c.h(0).h(1);
        assert_eq!(c.depth(), 1);

        let mut c = Circuit::new(2, 0);
        c.h(0).cx(0, 1).h(1);
        assert_eq!(c.depth(), 3);
    }

    #[test]
    fn barrier_takes_a_slot() {
        let mut c = Circuit::new(2, 0);
        c.h(0).barrier(&[0, 1]).h(1);
        assert_eq!(c.depth(), 3);
        assert_eq!(c.gate_counts().get(GateClass::Barrier), 1);
        assert_eq!(c.num_gates(), 2);
    }

    #[test]
    fn measure_counts_toward_depth() {
        let mut c = Circuit::new(1, 1);
        c.h(0).measure(0, 0);
        assert_eq!(c.depth(), 2);
        assert_eq!(c.gate_counts().get(GateClass::Measure), 1);
        assert_eq!(c.num_gates(), 1);
    }

    #[test]
    fn gate_count_examples() {
        assert!(Circuit::new(3, 0).gate_counts().is_empty());
        let mut c = Circuit::new(2, 0);
        c.cx(0, 1).cx(1, 0).h(0);
        let counts = c.gate_counts();
        assert_eq!(counts.get(GateClass::CX), 2);
        assert_eq!(counts.get(GateClass::H), 1);
        assert_eq!(counts.0.len(), 2);
    }

    #[test]
    fn layers_examples() {
        let mut c = Circuit::new(2, 0);
        c.h(0).h(1);
        assert_eq!(c.layers(), vec![vec![0, 1]]);

        let mut c = Circuit::new(2, 0);
        c.h(0).cx(0, 1);
        assert_eq!(c.layers().len(), 2);

        // 3-qubit Fourier ladder
        let mut c = Circuit::new(3, 0);
        c.h(2).cp(1.0, 2, 1).cp(0.5, 2, 0).h(1).cp(1.0, 1, 0).h(0).swap(0, 2);
        assert_eq!(c.layers().len(), c.depth());
        assert_eq!(c.depth(), 6);
    }

    #[test]
    fn invalid_ops_rejected() {
        let mut c = Circuit::new(2, 1);
        assert!(matches!(
            c.try_push(Op::new(Gate::CX, &[0, 2])),
            Err(CircuitError::QubitOutOfRange { qubit: 2, .. })
        ));
        assert!(matches!(c.try_push(Op::new(Gate::CX, &[1, 1])), Err(CircuitError::RepeatedQubit { .. })));
        assert!(matches!(c.try_push(Op::new(Gate::H, &[0, 1])), Err(CircuitError::Arity { .. })));
        assert!(matches!(c.try_push(Op::new(Gate::RZ(f64::NAN), &[0])), Err(CircuitError::NonFiniteAngle { .. })));
        assert!(matches!(c.try_push(Op::measure(0, 3)), Err(CircuitError::ClbitOutOfRange { .. })));
        assert!(matches!(c.try_push(Op::new(Gate::Barrier, &[])), Err(CircuitError::Arity { .. })));
        assert!(c.is_empty());
    }

    fn arb_circuit(max_qubits: usize, max_ops: usize) -> impl Strategy<Value = Circuit> {
        (2..=max_qubits).prop_flat_map(move |n| {
            let op = (0..5u8, 0..n, 0..n, -3.0..3.0f64).prop_map(move |(k, a, b, t)| {
                let b = if a == b { (b + 1) % n } else { b };
                match k {
                    0 => Op::new(Gate::H, &[a]),
                    1 => Op::new(Gate::RZ(t), &[a]),
                    2 => Op::new(Gate::CX, &[a, b]),
                    3 => Op::new(Gate::CP(t), &[a, b]),
                    _ => Op::new(Gate::Barrier, &[a, b]),
                }
            });
            proptest::collection::vec(op, 0..max_ops).prop_map(move |ops| Circuit::from_ops(n, 0, ops).unwrap())
        })
    }

    proptest! {
        #[test]
        fn depth_equals_layer_count(c in arb_circuit(6, 40)) {
            prop_assert_eq!(c.depth(), c.layers().len());
            // every op appears exactly once, and layer order respects program order per qubit
            let mut seen = vec![usize::MAX; c.len()];
            for (l, layer) in c.layers().iter().enumerate() {
                for &i in layer { seen[i] = l; }
            }
            prop_assert!(seen.iter().all(|&l| l != usize::MAX));
            let mut last = vec![None::<usize>; c.num_qubits()];
            for (i, op) in c.ops().iter().enumerate() {
                for &q in &op.qubits {
                    if let Some(prev) = last[q] { prop_assert!(seen[prev] < seen[i]); }
                    last[q] = Some(i);
                }
            }
        }

        #[test]
        fn depth_ignores_fresh_qubits(c in arb_circuit(5, 30)) {
            let n = c.num_qubits();
            let mut wider = Circuit::new(n + 2, 0);
            wider.extend(&c);
            wider.h(n).cx(n, n + 1);
            prop_assert_eq!(wider.depth(), c.depth().max(2));
            let mut same = Circuit::new(n + 2, 0);
            same.extend(&c);
            prop_assert_eq!(same.depth(), c.depth());
        }

        #[test]
        fn concatenation_depth_subadditive(a in arb_circuit(4, 20), b in arb_circuit(4, 20)) {
            let n = a.num_qubits().max(b.num_qubits());
            let mut ab = Circuit::new(n, 0);
            ab.extend(&a).extend(&b);
            prop_assert!(ab.depth() <= a.depth() + b.depth());
        }

        #[test]
        fn counts_sum_to_non_barrier_ops(c in arb_circuit(5, 30)) {
            let counts = c.gate_counts();
            let non_barrier: usize = counts.iter().filter(|(k, _)| *k != GateClass::Barrier).map(|(_, n)| n).sum();
            prop_assert_eq!(non_barrier, c.ops().iter().filter(|o| o.gate != Gate::Barrier).count());
        }
    }
}
