//! Peephole optimization of native circuits.

use smallvec::SmallVec;

use super::synth::{is_identity_up_to_phase, run_matrix, synthesize_1q};
use crate::circuit::{Circuit, Op};
use crate::gate::Gate;

/// Longest per-wire backward walk when looking for a cancelling CX.
const MAX_WALK: usize = 64;
/// Rounds of merge + cancel before giving up on a fixpoint.
const MAX_ROUNDS: usize = 8;

/// Optimized circuit plus the wire relabeling introduced by absorbed SWAPs:
/// content that would end on physical `p` ends on `wire_map[p]`.
#[derive(Debug, Clone)]
pub struct Optimized {
    pub circuit: Circuit,
    pub wire_map: Vec<usize>,
}

/// Level 0 is the identity. Level 1 merges single-qubit runs, drops
/// identities and cancels adjacent CX pairs. Level 2 also cancels CX pairs
/// across commuting gates. Level 3 first folds and absorbs 3-CX SWAPs.
pub fn optimize(circuit: &Circuit, level: u8) -> Optimized {
    let n = circuit.num_qubits();
    let identity: Vec<usize> = (0..n).collect();
    if level == 0 {
        return Optimized { circuit: circuit.clone(), wire_map: identity };
    }
    let mut ops = circuit.ops().to_vec();
    let mut wire_map = identity;
    if level >= 3 {
        ops = absorb_trailing_swaps(ops, n, &mut wire_map);
        ops = fold_swaps(ops, n);
    }
    let commute = level >= 2;
    for _ in 0..MAX_ROUNDS {
        let before = ops.len();
        ops = merge_single_qubit_runs(ops, n);
        ops = cancel_cx_pairs(ops, n, commute);
        if ops.len() == before {
            break;
        }
    }
    Optimized { circuit: Circuit::from_ops_unchecked(n, circuit.num_clbits(), ops), wire_map }
}

fn is_1q_unitary(op: &Op) -> bool {
    op.gate.class().is_single_qubit()
}

/// Replaces each maximal run of single-qubit gates on a wire by its ZSX
/// synthesis when that is not longer.
pub fn merge_single_qubit_runs(ops: Vec<Op>, num_qubits: usize) -> Vec<Op> {
    let mut runs: Vec<Vec<usize>> = vec![Vec::new(); num_qubits];
    let mut replacement: Vec<Option<Vec<Op>>> = vec![None; ops.len()];
    let mut removed = vec![false; ops.len()];

    let flush = |run: &mut Vec<usize>, q: usize, replacement: &mut Vec<Option<Vec<Op>>>, removed: &mut Vec<bool>| {
        if run.is_empty() {
            return;
        }
        let m = run_matrix(run.iter().map(|&i| &ops[i]));
        let new = if is_identity_up_to_phase(&m, 1e-10) { Vec::new() } else { synthesize_1q(&m, q) };
        if new.len() < run.len() || (new.len() == run.len() && run.len() > 1) {
            for &i in run.iter() {
                removed[i] = true;
            }
            replacement[run[0]] = Some(new);
        }
        run.clear();
    };

    for (i, op) in ops.iter().enumerate() {
        if is_1q_unitary(op) {
            runs[op.qubits[0]].push(i);
        } else {
            for &q in &op.qubits {
                flush(&mut runs[q], q, &mut replacement, &mut removed);
            }
        }
    }
    for (q, run) in runs.iter_mut().enumerate() {
        flush(run, q, &mut replacement, &mut removed);
    }

    let mut out = Vec::with_capacity(ops.len());
    for (i, op) in ops.into_iter().enumerate() {
        if let Some(new) = replacement[i].take() {
            out.extend(new);
        } else if !removed[i] {
            out.push(op);
        }
    }
    out
}

/// `op` (on wire `w`) commutes with CX(c, t) when `w == c`.
fn commutes_on_control(op: &Op, c: usize) -> bool {
    match op.gate {
        Gate::RZ(_) => true,
        Gate::CX => op.qubits[0] == c,
        _ => false,
    }
}

/// `op` (on wire `w`) commutes with CX(c, t) when `w == t`.
fn commutes_on_target(op: &Op, t: usize) -> bool {
    match op.gate {
        Gate::X | Gate::SX | Gate::RX(_) => true,
        Gate::CX => op.qubits[1] == t,
        _ => false,
    }
}

/// Indices of live CX(c, t) reachable walking back along `stack` through
/// ops that commute with CX(c, t). Without `commute` only the nearest live op
/// is inspected.
fn reachable(
    stack: &[usize],
    ops: &[Option<Op>],
    c: usize,
    t: usize,
    on_control: bool,
    commute: bool,
) -> SmallVec<[usize; 4]> {
    let mut found = SmallVec::new();
    let mut steps = 0;
    for &k in stack.iter().rev() {
        let Some(op) = &ops[k] else { continue };
        steps += 1;
        if op.gate == Gate::CX && op.qubits[0] == c && op.qubits[1] == t {
            found.push(k);
        } else if !commute {
            break;
        } else {
            let ok = if on_control { commutes_on_control(op, c) } else { commutes_on_target(op, t) };
            if !ok {
                break;
            }
        }
        if !commute || steps >= MAX_WALK {
            break;
        }
    }
    found
}

/// Removes pairs of identical CX gates that are adjacent, or with
/// `commute`, separated only by gates that commute with them.
pub fn cancel_cx_pairs(ops: Vec<Op>, num_qubits: usize, commute: bool) -> Vec<Op> {
    let mut live: Vec<Option<Op>> = Vec::with_capacity(ops.len());
    let mut stacks: Vec<Vec<usize>> = vec![Vec::new(); num_qubits];
    for op in ops {
        let i = live.len();
        if op.gate == Gate::CX {
            let (c, t) = (op.qubits[0], op.qubits[1]);
            let on_c = reachable(&stacks[c], &live, c, t, true, commute);
            if !on_c.is_empty() {
                let on_t = reachable(&stacks[t], &live, c, t, false, commute);
                if let Some(&j) = on_c.iter().filter(|j| on_t.contains(j)).max() {
                    live[j] = None;
                    live.push(None);
                    continue;
                }
            }
        }
        for &q in &op.qubits {
            stacks[q].push(i);
        }
        live.push(Some(op));
    }
    live.into_iter().flatten().collect()
}

/// Per-wire op index lists and, for each op, its position in each wire list.
fn wire_lists(ops: &[Option<Op>], num_qubits: usize) -> (Vec<Vec<usize>>, Vec<SmallVec<[usize; 2]>>) {
    let mut wires: Vec<Vec<usize>> = vec![Vec::new(); num_qubits];
    let mut pos = Vec::with_capacity(ops.len());
    for (i, op) in ops.iter().enumerate() {
        let mut p = SmallVec::new();
        if let Some(op) = op {
            for &q in &op.qubits {
                p.push(wires[q].len());
                wires[q].push(i);
            }
        }
        pos.push(p);
    }
    (wires, pos)
}

fn is_cx(op: &Option<Op>, c: usize, t: usize) -> bool {
    matches!(op, Some(o) if o.gate == Gate::CX && o.qubits[0] == c && o.qubits[1] == t)
}

struct Wires<'a> {
    ops: &'a [Option<Op>],
    wires: Vec<Vec<usize>>,
    pos: Vec<SmallVec<[usize; 2]>>,
}

impl<'a> Wires<'a> {
    fn slot(&self, i: usize, q: usize) -> usize {
        let op = self.ops[i].as_ref().expect("live op");
        let k = op.qubits.iter().position(|&x| x == q).expect("op acts on q");
        self.pos[i][k]
    }

    fn prev_live(&self, i: usize, q: usize, ops: &[Option<Op>]) -> Option<usize> {
        let s = self.slot(i, q);
        self.wires[q][..s].iter().rev().copied().find(|&k| ops[k].is_some())
    }

    fn next_live(&self, i: usize, q: usize, ops: &[Option<Op>]) -> Option<usize> {
        let s = self.slot(i, q);
        self.wires[q][s + 1..].iter().copied().find(|&k| ops[k].is_some())
    }
}

/// `(i, j, k)` when op `i` starts a CX(a,b) CX(b,a) CX(a,b) block adjacent on both wires.
fn swap_block(w: &Wires, ops: &[Option<Op>], i: usize) -> Option<(usize, usize, usize, usize, usize)> {
    let op = ops[i].as_ref()?;
    if op.gate != Gate::CX {
        return None;
    }
    let (a, b) = (op.qubits[0], op.qubits[1]);
    let j = w.next_live(i, a, ops)?;
    if w.next_live(i, b, ops)? != j || !is_cx(&ops[j], b, a) {
        return None;
    }
    let k = w.next_live(j, a, ops)?;
    if w.next_live(j, b, ops)? != k || !is_cx(&ops[k], a, b) {
        return None;
    }
    Some((i, j, k, a, b))
}

/// Deletes 3-CX SWAP blocks followed only by single-qubit gates,
/// measurements and barriers on their wires, relabeling those later ops
/// and recording the exchange in `wire_map`.
pub fn absorb_trailing_swaps(ops: Vec<Op>, num_qubits: usize, wire_map: &mut [usize]) -> Vec<Op> {
    let mut ops: Vec<Option<Op>> = ops.into_iter().map(Some).collect();
    let snapshot = ops.clone();
    let w = {
        let (wires, pos) = wire_lists(&snapshot, num_qubits);
        Wires { ops: &snapshot, wires, pos }
    };
    let mut later_2q = vec![false; num_qubits];
    let mut i = ops.len();
    while i > 0 {
        i -= 1;
        let Some(op) = &ops[i] else { continue };
        if op.gate == Gate::CX && !later_2q[op.qubits[0]] && !later_2q[op.qubits[1]] {
            // `i` may be the last CX of a block CX(b,a)... ending the triple.
            let (a, b) = (op.qubits[1], op.qubits[0]);
            let found = w
                .prev_live(i, a, &ops)
                .filter(|&j| w.prev_live(i, b, &ops) == Some(j) && is_cx(&ops[j], a, b))
                .and_then(|j| {
                    w.prev_live(j, a, &ops)
                        .filter(|&h| w.prev_live(j, b, &ops) == Some(h) && is_cx(&ops[h], b, a))
                        .map(|h| (h, j))
                });
            if let Some((h, j)) = found {
                ops[h] = None;
                ops[j] = None;
                ops[i] = None;
                for later in ops[i + 1..].iter_mut().flatten() {
                    for q in later.qubits.iter_mut() {
                        if *q == a {
                            *q = b;
                        } else if *q == b {
                            *q = a;
                        }
                    }
                }
                for m in wire_map.iter_mut() {
                    if *m == a {
                        *m = b;
                    } else if *m == b {
                        *m = a;
                    }
                }
                i = h;
                continue;
            }
        }
        let op = ops[i].as_ref().expect("live");
        if op.is_two_qubit() {
            for &q in &op.qubits {
                later_2q[q] = true;
            }
        }
    }
    ops.into_iter().flatten().collect()
}

/// Folds a SWAP block with an adjacent reversed CX on the same pair:
/// `CX(b,a) SWAP` and `SWAP CX(b,a)` each become two CX gates.
pub fn fold_swaps(ops: Vec<Op>, num_qubits: usize) -> Vec<Op> {
    let mut ops: Vec<Option<Op>> = ops.into_iter().map(Some).collect();
    let snapshot = ops.clone();
    let w = {
        let (wires, pos) = wire_lists(&snapshot, num_qubits);
        Wires { ops: &snapshot, wires, pos }
    };
    for i in 0..ops.len() {
        let Some((i, _j, k, a, b)) = swap_block(&w, &ops, i) else { continue };
        let before = w.prev_live(i, a, &ops).filter(|&p| w.prev_live(i, b, &ops) == Some(p) && is_cx(&ops[p], b, a));
        if let Some(p) = before {
            ops[p] = None;
            ops[k] = None;
            continue;
        }
        let after = w.next_live(k, a, &ops).filter(|&s| w.next_live(k, b, &ops) == Some(s) && is_cx(&ops[s], b, a));
        if let Some(s) = after {
            ops[i] = None;
            ops[s] = None;
        }
    }
    ops.into_iter().flatten().collect()
}
