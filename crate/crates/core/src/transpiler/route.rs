//! SWAP insertion. Inputs are logical circuits whose two-qubit gates are CX;
//! outputs act on physical qubits and contain explicit `Swap` ops.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use smallvec::SmallVec;

use super::layout::Layout;
use super::SabreParams;
use crate::arch::Architecture;
use crate::circuit::{Circuit, Op};
use crate::gate::Gate;

/// Result of routing: a physical circuit and where each logical qubit ends up.
#[derive(Debug, Clone)]
pub struct Routed {
    pub circuit: Circuit,
    pub final_layout: Layout,
    pub swaps: usize,
}

fn map_op(op: &Op, layout: &Layout) -> Op {
    Op { gate: op.gate, qubits: op.qubits.iter().map(|&q| layout.physical(q)).collect(), clbit: op.clbit }
}

/// Moves the content of physical `from` next to physical `to` along a
/// shortest path, always stepping to the lowest-index closer neighbour.
fn walk_toward(arch: &Architecture, layout: &mut Layout, mut from: usize, to: usize, out: &mut Vec<Op>) -> usize {
    let dist = arch.distance_matrix();
    let mut swaps = 0;
    while dist.get(from, to) > 1 {
        let d = dist.get(from, to);
        let next = *arch
            .neighbors(from)
            .iter()
            .find(|&&n| dist.get(n, to) == d - 1)
            .expect("connected architecture has a closer neighbour");
        layout.swap_physical(from, next);
        out.push(Op::new(Gate::Swap, &[from, next]));
        from = next;
        swaps += 1;
    }
    swaps
}

/// Blocked gates resolved exactly when ranking SWAP chains.
const BASIC_SEARCH_DEPTH: usize = 4;
/// Chain evaluations allowed per routing decision.
const BASIC_SEARCH_BUDGET: usize = 4096;
/// Gates scored by the leaf estimate once the search stops.
const BASIC_LEAF_WINDOW: usize = 4;
/// Shortest paths enumerated per blocked gate.
const BASIC_MAX_PATHS: usize = 16;

/// Shortest paths from `from` to `to` (both included), in ascending
/// neighbour order.
fn shortest_paths(arch: &Architecture, from: usize, to: usize, cap: usize) -> Vec<Vec<usize>> {
    fn dfs(arch: &Architecture, to: usize, cap: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let dist = arch.distance_matrix();
        let at = *path.last().expect("non-empty");
        if at == to {
            out.push(path.clone());
            return;
        }
        for &n in arch.neighbors(at) {
            if out.len() >= cap {
                return;
            }
            if dist.get(n, to) + 1 == dist.get(at, to) {
                path.push(n);
                dfs(arch, to, cap, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    dfs(arch, to, cap, &mut vec![from], &mut out);
    out
}

/// SWAP chains that make physical `pa` and `pb` adjacent: along each
/// shortest path, `pa`'s content advances `k` steps and `pb`'s content the
/// rest. Chains with the same resulting layout are listed once.
fn meeting_chains(arch: &Architecture, layout: &Layout, pa: usize, pb: usize) -> Vec<Vec<(usize, usize)>> {
    let mut seen: Vec<Vec<usize>> = Vec::new();
    let mut out = Vec::new();
    for path in shortest_paths(arch, pa, pb, BASIC_MAX_PATHS) {
        let d = path.len() - 1;
        for k in (0..d).rev() {
            let mut chain = Vec::with_capacity(d - 1);
            for i in 0..k {
                chain.push((path[i], path[i + 1]));
            }
            for i in (k + 2..=d).rev() {
                chain.push((path[i], path[i - 1]));
            }
            let mut trial = layout.clone();
            for &(a, b) in &chain {
                trial.swap_physical(a, b);
            }
            if !seen.iter().any(|l| l.as_slice() == trial.l2p()) {
                seen.push(trial.l2p().to_vec());
                out.push(chain);
            }
        }
    }
    out
}

struct BasicPlanner<'a> {
    arch: &'a Architecture,
    /// Logical qubit pairs of the circuit's two-qubit gates, in order.
    gates: Vec<(usize, usize)>,
    budget: usize,
}

impl<'a> BasicPlanner<'a> {
    fn blocked(&self, layout: &Layout, g: usize) -> bool {
        let (a, b) = self.gates[g];
        self.arch.distance_matrix().get(layout.physical(a), layout.physical(b)) > 1
    }

    /// SWAPs a walk that always moves the first qubit would spend on the
    /// next few gates.
    fn estimate(&self, layout: &Layout, from: usize) -> u32 {
        let dist = self.arch.distance_matrix();
        let mut trial = layout.clone();
        let mut swaps = 0u32;
        for &(a, b) in self.gates.iter().skip(from).take(BASIC_LEAF_WINDOW) {
            let (mut pa, pb) = (trial.physical(a), trial.physical(b));
            while dist.get(pa, pb) > 1 {
                let d = dist.get(pa, pb);
                let next = *self.arch.neighbors(pa).iter().find(|&&n| dist.get(n, pb) == d - 1).expect("connected");
                trial.swap_physical(pa, next);
                pa = next;
                swaps += 1;
            }
        }
        swaps
    }

    /// Fewest SWAPs to execute gates from `from` on, resolving up to `depth`
    /// blocked gates exactly and estimating the rest.
    fn cost(&mut self, layout: &Layout, mut from: usize, depth: usize) -> u32 {
        while from < self.gates.len() && !self.blocked(layout, from) {
            from += 1;
        }
        if from == self.gates.len() {
            return 0;
        }
        if depth == 0 || self.budget == 0 {
            return self.estimate(layout, from);
        }
        let (a, b) = self.gates[from];
        let (pa, pb) = (layout.physical(a), layout.physical(b));
        let mut best = u32::MAX;
        for chain in meeting_chains(self.arch, layout, pa, pb) {
            self.budget = self.budget.saturating_sub(1);
            let mut trial = layout.clone();
            for &(x, y) in &chain {
                trial.swap_physical(x, y);
            }
            let c = chain.len() as u32 + self.cost(&trial, from + 1, depth - 1);
            best = best.min(c);
        }
        best
    }

    /// Chain chosen for blocked gate `g`: lowest searched cost, first
    /// enumerated on ties.
    fn choose(&mut self, layout: &Layout, g: usize) -> Vec<(usize, usize)> {
        self.budget = BASIC_SEARCH_BUDGET;
        let (a, b) = self.gates[g];
        let (pa, pb) = (layout.physical(a), layout.physical(b));
        let mut best: Option<(u32, Vec<(usize, usize)>)> = None;
        for chain in meeting_chains(self.arch, layout, pa, pb) {
            let mut trial = layout.clone();
            for &(x, y) in &chain {
                trial.swap_physical(x, y);
            }
            let c = chain.len() as u32 + self.cost(&trial, g + 1, BASIC_SEARCH_DEPTH - 1);
            if best.as_ref().map_or(true, |(bc, _)| c < *bc) {
                best = Some((c, chain));
            }
        }
        best.expect("a blocked gate has a shortest path").1
    }
}

/// Greedy router. A blocked CX is resolved by a SWAP chain along a shortest
/// path between its qubits, both ends moving toward a meeting point. The
/// chain is picked by a bounded search over the next few blocked gates;
/// ties go to the first enumerated chain (lowest indices).
pub fn route_basic(circuit: &Circuit, arch: &Architecture, initial: &Layout) -> Routed {
    let gates: Vec<(usize, usize)> =
        circuit.ops().iter().filter(|op| op.is_two_qubit()).map(|op| (op.qubits[0], op.qubits[1])).collect();
    let mut planner = BasicPlanner { arch, gates, budget: 0 };
    let mut layout = initial.clone();
    let mut out = Vec::with_capacity(circuit.len() * 2);
    let mut swaps = 0;
    let mut g = 0;
    for op in circuit.ops() {
        if op.is_two_qubit() {
            if planner.blocked(&layout, g) {
                for (a, b) in planner.choose(&layout, g) {
                    layout.swap_physical(a, b);
                    out.push(Op::new(Gate::Swap, &[a, b]));
                    swaps += 1;
                }
            }
            g += 1;
        }
        out.push(map_op(op, &layout));
    }
    Routed {
        circuit: Circuit::from_ops_unchecked(arch.num_qubits(), circuit.num_clbits(), out),
        final_layout: layout,
        swaps,
    }
}

/// Dependency graph over op indices; an op depends on the previous op on
/// each of its qubits and clbit.
struct Dag {
    succ: Vec<SmallVec<[usize; 2]>>,
    npred: Vec<u32>,
}

impl Dag {
    fn build(ops: &[Op], num_qubits: usize, num_clbits: usize) -> Dag {
        let mut succ: Vec<SmallVec<[usize; 2]>> = vec![SmallVec::new(); ops.len()];
        let mut npred = vec![0u32; ops.len()];
        let mut last_q: Vec<Option<usize>> = vec![None; num_qubits];
        let mut last_c: Vec<Option<usize>> = vec![None; num_clbits];
        for (i, op) in ops.iter().enumerate() {
            let mut preds: SmallVec<[usize; 3]> = SmallVec::new();
            let clbit_slot = op.clbit.map(|c| &mut last_c[c]);
            let mut prev_c = None;
            if let Some(slot) = clbit_slot {
                prev_c = slot.replace(i);
            }
            for p in op.qubits.iter().map(|&q| last_q[q].replace(i)).chain(std::iter::once(prev_c)).flatten() {
                if !preds.contains(&p) {
                    preds.push(p);
                }
            }
            for &p in &preds {
                succ[p].push(i);
            }
            npred[i] = preds.len() as u32;
        }
        Dag { succ, npred }
    }
}

struct Sabre<'a> {
    arch: &'a Architecture,
    params: &'a SabreParams,
    ops: &'a [Op],
    dag: Dag,
}

impl<'a> Sabre<'a> {
    fn dist(&self, a: usize, b: usize) -> f64 {
        self.arch.distance_matrix().get(a, b) as f64
    }

    fn gate_dist(&self, g: usize, layout: &Layout) -> u32 {
        let q = &self.ops[g].qubits;
        self.arch.distance_matrix().get(layout.physical(q[0]), layout.physical(q[1]))
    }

    fn extended_set(&self, front: &[usize], remaining: &[u32], seen: &mut [u32], stamp: u32) -> Vec<usize> {
        let mut ext = Vec::with_capacity(self.params.extended_set_size);
        let mut pending: Vec<u32> = Vec::new();
        let mut queue: std::collections::VecDeque<usize> = front.iter().copied().collect();
        let mut pending_idx: Vec<usize> = Vec::new();
        // Simulated execution: a node enters the set once all its predecessors
        // are in the front or the set.
        while let Some(g) = queue.pop_front() {
            if ext.len() >= self.params.extended_set_size {
                break;
            }
            for &s in &self.dag.succ[g] {
                let slot = match pending_idx.iter().position(|&x| x == s) {
                    Some(k) => k,
                    None if seen[s] == stamp => continue,
                    None => {
                        pending_idx.push(s);
                        pending.push(remaining[s]);
                        pending.len() - 1
                    }
                };
                pending[slot] -= 1;
                if pending[slot] == 0 {
                    seen[s] = stamp;
                    pending_idx.swap_remove(slot);
                    pending.swap_remove(slot);
                    if self.ops[s].is_two_qubit() {
                        ext.push(s);
                        if ext.len() >= self.params.extended_set_size {
                            break;
                        }
                    }
                    queue.push_back(s);
                }
            }
        }
        ext
    }

    /// Routes `ops` starting from `layout`, leaving the final layout in place.
    fn run(&self, layout: &mut Layout, rng: &mut ChaCha8Rng, mut out: Option<&mut Vec<Op>>) -> usize {
        let n_phys = self.arch.num_qubits();
        let mut remaining = self.dag.npred.clone();
        let mut front: Vec<usize> = (0..self.ops.len()).filter(|&i| remaining[i] == 0).collect();
        let mut decay = vec![1.0f64; n_phys];
        let mut seen = vec![0u32; self.ops.len()];
        let mut stamp = 0u32;
        let mut ext: Vec<usize> = Vec::new();
        let mut steps = 0usize;
        let mut stalled = 0usize;
        let mut swaps = 0usize;
        let release_after = 10 * n_phys;
        let mut candidates: Vec<(usize, usize)> = Vec::new();
        let mut best: Vec<(usize, usize)> = Vec::new();

        loop {
            let mut progressed = false;
            loop {
                let mut executed = false;
                let mut next = Vec::with_capacity(front.len());
                for &g in &front {
                    let op = &self.ops[g];
                    if !op.is_two_qubit() || self.gate_dist(g, layout) == 1 {
                        if let Some(out) = out.as_deref_mut() {
                            out.push(map_op(op, layout));
                        }
                        executed = true;
                        for &s in &self.dag.succ[g] {
                            remaining[s] -= 1;
                            if remaining[s] == 0 {
                                next.push(s);
                            }
                        }
                    } else {
                        next.push(g);
                    }
                }
                next.sort_unstable();
                front = next;
                if !executed {
                    break;
                }
                progressed = true;
            }
            if front.is_empty() {
                break;
            }
            if progressed {
                decay.iter_mut().for_each(|d| *d = 1.0);
                steps = 0;
                stalled = 0;
                stamp += 1;
                for &g in &front {
                    seen[g] = stamp;
                }
                ext = self.extended_set(&front, &remaining, &mut seen, stamp);
            }

            if stalled >= release_after {
                // Force progress on the closest blocked gate.
                let g = *front.iter().min_by_key(|&&g| (self.gate_dist(g, layout), g)).expect("front is non-empty");
                let q = &self.ops[g].qubits;
                let (pa, pb) = (layout.physical(q[0]), layout.physical(q[1]));
                let mut buf = Vec::new();
                swaps += walk_toward(self.arch, layout, pa, pb, &mut buf);
                if let Some(out) = out.as_deref_mut() {
                    out.extend(buf);
                }
                decay.iter_mut().for_each(|d| *d = 1.0);
                stalled = 0;
                continue;
            }

            candidates.clear();
            for &g in &front {
                for &q in &self.ops[g].qubits {
                    let p = layout.physical(q);
                    for &n in self.arch.neighbors(p) {
                        candidates.push((p.min(n), p.max(n)));
                    }
                }
            }
            candidates.sort_unstable();
            candidates.dedup();

            let ext_weight = if ext.is_empty() { 0.0 } else { self.params.extended_set_weight / ext.len() as f64 };
            let mut best_score = f64::INFINITY;
            best.clear();
            for &(a, b) in &candidates {
                let phys = |l: usize| {
                    let p = layout.physical(l);
                    if p == a {
                        b
                    } else if p == b {
                        a
                    } else {
                        p
                    }
                };
                let cost = |g: usize| {
                    let q = &self.ops[g].qubits;
                    self.dist(phys(q[0]), phys(q[1]))
                };
                let h_front: f64 = front.iter().map(|&g| cost(g)).sum();
                let h_ext: f64 = ext.iter().map(|&g| cost(g)).sum();
                let score = decay[a].max(decay[b]) * (h_front + ext_weight * h_ext);
                if score < best_score - 1e-12 {
                    best_score = score;
                    best.clear();
                    best.push((a, b));
                } else if (score - best_score).abs() <= 1e-12 {
                    best.push((a, b));
                }
            }
            let (a, b) = if best.len() == 1 { best[0] } else { best[rng.gen_range(0..best.len())] };
            layout.swap_physical(a, b);
            if let Some(out) = out.as_deref_mut() {
                out.push(Op::new(Gate::Swap, &[a, b]));
            }
            swaps += 1;
            stalled += 1;
            steps += 1;
            if steps % self.params.decay_reset_interval == 0 {
                decay.iter_mut().for_each(|d| *d = 1.0);
            } else {
                decay[a] += self.params.decay_increment;
                decay[b] += self.params.decay_increment;
            }
        }
        swaps
    }
}

/// Lookahead router with decay; ties between equal-score SWAPs are broken by `rng`.
pub fn route_sabre(
    circuit: &Circuit,
    arch: &Architecture,
    initial: &Layout,
    params: &SabreParams,
    rng: &mut ChaCha8Rng,
) -> Routed {
    let sabre = Sabre {
        arch,
        params,
        ops: circuit.ops(),
        dag: Dag::build(circuit.ops(), circuit.num_qubits(), circuit.num_clbits()),
    };
    let mut layout = initial.clone();
    let mut out = Vec::with_capacity(circuit.len() * 2);
    let swaps = sabre.run(&mut layout, rng, Some(&mut out));
    Routed {
        circuit: Circuit::from_ops_unchecked(arch.num_qubits(), circuit.num_clbits(), out),
        final_layout: layout,
        swaps,
    }
}

/// Random start refined by alternating forward and backward routing passes
/// over the two-qubit skeleton of `circuit`.
pub fn sabre_layout(circuit: &Circuit, arch: &Architecture, params: &SabreParams, rng: &mut ChaCha8Rng) -> Layout {
    let n_phys = arch.num_qubits();
    let mut l2p: Vec<usize> = (0..n_phys).collect();
    l2p.shuffle(rng);
    let mut layout = Layout::from_bijection(l2p, circuit.num_qubits());
    let forward: Vec<Op> = circuit.ops().iter().filter(|op| op.is_two_qubit()).cloned().collect();
    if forward.is_empty() {
        return layout;
    }
    let backward: Vec<Op> = forward.iter().rev().cloned().collect();
    let fwd = Sabre { arch, params, ops: &forward, dag: Dag::build(&forward, n_phys, 0) };
    let bwd = Sabre { arch, params, ops: &backward, dag: Dag::build(&backward, n_phys, 0) };
    for _ in 0..params.layout_iterations {
        fwd.run(&mut layout, rng, None);
        bwd.run(&mut layout, rng, None);
    }
    layout
}
