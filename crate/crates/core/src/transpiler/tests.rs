use std::collections::{HashMap, VecDeque};
use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::gate::{GateClass, Mat2};
use crate::simulator::{equivalence, StateVector};

fn random_state(n: usize, seed: u64) -> StateVector {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps: Vec<Complex64> = (0..1 << n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

fn run(c: &Circuit, mut s: StateVector) -> StateVector {
    for op in c.ops() {
        s.apply_op(op);
    }
    s
}

/// Moves bit `p` of every basis index to bit `map[p]`.
fn permute(s: &StateVector, map: &[usize]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); s.amplitudes().len()];
    for (x, a) in s.amplitudes().iter().enumerate() {
        let mut y = 0;
        for (p, &m) in map.iter().enumerate() {
            y |= ((x >> p) & 1) << m;
        }
        out[y] = *a;
    }
    out
}

fn overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm()
}

/// `a` and `b` implement the same unitary up to phase and the wire relabeling.
fn assert_same_action(a: &Circuit, b: &Circuit, wire_map: &[usize]) {
    let n = a.num_qubits();
    for seed in 0..3 {
        let s = random_state(n, seed);
        let want = permute(&run(a, s.clone()), wire_map);
        let got = run(b, s);
        let f = overlap(&want, got.amplitudes());
        assert!((f - 1.0).abs() < 1e-9, "overlap {f}");
    }
}

fn identity_map(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn mat_equal_up_to_phase(a: &Mat2, b: &Mat2) -> bool {
    // phase from the largest entry of a
    let (mut bi, mut bj) = (0, 0);
    for i in 0..2 {
        for j in 0..2 {
            if a[i][j].norm() > a[bi][bj].norm() {
                bi = i;
                bj = j;
            }
        }
    }
    let phase = b[bi][bj] / a[bi][bj];
    (0..2).all(|i| (0..2).all(|j| (a[i][j] * phase - b[i][j]).norm() < 1e-9))
}

#[test]
fn hadamard_synthesis() {
    let ops = synthesize_1q(&Gate::H.matrix_1q().unwrap(), 0);
    let gates: Vec<Gate> = ops.iter().map(|o| o.gate).collect();
    assert_eq!(gates.len(), 3);
    assert!(matches!(gates[0], Gate::RZ(a) if (a - FRAC_PI_2).abs() < 1e-12));
    assert_eq!(gates[1], Gate::SX);
    assert!(matches!(gates[2], Gate::RZ(a) if (a - FRAC_PI_2).abs() < 1e-12));
    // explicit matrix oracle: rz(pi/2) sx rz(pi/2) ~ H
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h: Mat2 = [[Complex64::new(s, 0.0), Complex64::new(s, 0.0)], [Complex64::new(s, 0.0), Complex64::new(-s, 0.0)]];
    let got = synth::run_matrix(ops.iter());
    assert!(mat_equal_up_to_phase(&h, &got));
}

#[test]
fn native_gates_resynthesize_to_themselves() {
    assert_eq!(synthesize_1q(&Gate::SX.matrix_1q().unwrap(), 0), vec![Op::new(Gate::SX, &[0])]);
    assert_eq!(synthesize_1q(&Gate::X.matrix_1q().unwrap(), 0), vec![Op::new(Gate::X, &[0])]);
    assert!(synthesize_1q(&Gate::RZ(0.0).matrix_1q().unwrap(), 0).is_empty());
    assert!(synthesize_1q(&Gate::RZ(2.0 * PI).matrix_1q().unwrap(), 0).is_empty());
}

proptest! {
    #[test]
    fn synthesis_is_exact(t in -4.0f64..4.0, p in -4.0f64..4.0, l in -4.0f64..4.0, special in 0usize..4) {
        let theta = match special { 0 => 0.0, 1 => FRAC_PI_2, 2 => PI, _ => t };
        let m = crate::gate::u_matrix(theta, p, l);
        let ops = synthesize_1q(&m, 0);
        prop_assert!(ops.len() <= 5);
        prop_assert!(ops.iter().all(|o| is_native(&o.gate)));
        prop_assert!(mat_equal_up_to_phase(&m, &synth::run_matrix(ops.iter())));
    }
}

#[test]
fn decompose_rules() {
    let mut c = Circuit::new(2, 0);
    c.cx(0, 1);
    assert_eq!(decompose_to_native(&c).ops(), c.ops());

    let mut c = Circuit::new(2, 0);
    c.swap(0, 1);
    let d = decompose_to_native(&c);
    assert_eq!(d.ops(), &[Op::new(Gate::CX, &[0, 1]), Op::new(Gate::CX, &[1, 0]), Op::new(Gate::CX, &[0, 1])]);
    assert_eq!(d.gate_counts().iter().collect::<Vec<_>>(), vec![(GateClass::CX, 3)]);
    // 4x4 oracle: SWAP maps basis |b a> to |a b>
    for x in 0..4u64 {
        let s = run(&d, StateVector::basis(2, x));
        let y = ((x & 1) << 1) | (x >> 1);
        assert!((s.amplitudes()[y as usize].norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn decompose_preserves_action() {
    let mut c = Circuit::new(3, 0);
    c.h(0).cp(0.7, 0, 2).apply(Gate::U(0.3, -1.2, 2.5), &[1]).rx(1.1, 2).swap(1, 2).cp(-2.0, 2, 0).x(1);
    let d = decompose_to_native(&c);
    assert!(d.ops().iter().all(|o| is_native(&o.gate)));
    assert_same_action(&c, &d, &identity_map(3));
}

#[test]
fn level0_is_identity_and_level1_cancels() {
    let mut c = Circuit::new(2, 0);
    c.cx(0, 1).cx(0, 1);
    assert_eq!(optimize(&c, 0).circuit.ops(), c.ops());
    assert!(optimize(&c, 1).circuit.is_empty());

    let mut c = Circuit::new(1, 0);
    c.rz(0.4, 0).rz(0.9, 0);
    let o = optimize(&c, 1).circuit;
    assert_eq!(o.len(), 1);
    assert!(matches!(o.ops()[0].gate, Gate::RZ(a) if (a - 1.3).abs() < 1e-12));

    let mut c = Circuit::new(1, 0);
    c.rz(0.0, 0);
    assert!(optimize(&c, 1).circuit.is_empty());
}

#[test]
fn commutation_needs_level2() {
    // RZ on the control and X on the target sit between two equal CX
    let mut c = Circuit::new(2, 0);
    c.cx(0, 1).rz(0.3, 0).x(1).cx(0, 1);
    assert_eq!(optimize(&c, 1).circuit.num_two_qubit_gates(), 2);
    let o = optimize(&c, 2);
    assert_eq!(o.circuit.num_two_qubit_gates(), 0);
    assert_same_action(&c, &o.circuit, &o.wire_map);

    // RZ on the target blocks
    let mut c = Circuit::new(2, 0);
    c.cx(0, 1).rz(0.3, 1).cx(0, 1);
    assert_eq!(optimize(&c, 2).circuit.num_two_qubit_gates(), 2);

    // CX sharing a control commute
    let mut c = Circuit::new(3, 0);
    c.cx(0, 1).cx(0, 2).cx(0, 1);
    let o = optimize(&c, 2);
    assert_eq!(o.circuit.num_two_qubit_gates(), 1);
    assert_same_action(&c, &o.circuit, &o.wire_map);
}

#[test]
fn swap_folding_and_absorption() {
    // CX(1,0) then SWAP(0,1) as 3 CX, followed by an H
    let mut c = Circuit::new(2, 0);
    c.cx(1, 0).cx(0, 1).cx(1, 0).cx(0, 1).h(0).cx(0, 1);
    let folded = fold_swaps(c.ops().to_vec(), 2);
    assert_eq!(folded.iter().filter(|o| o.gate == Gate::CX).count(), 3);
    assert_same_action(&c, &Circuit::from_ops(2, 0, folded).unwrap(), &identity_map(2));

    let mut c = Circuit::new(2, 0);
    c.cx(0, 1).cx(1, 0).cx(0, 1).cx(1, 0).h(1);
    let folded = fold_swaps(c.ops().to_vec(), 2);
    assert_eq!(folded.iter().filter(|o| o.gate == Gate::CX).count(), 2);
    assert_same_action(&c, &Circuit::from_ops(2, 0, folded).unwrap(), &identity_map(2));

    // trailing swap becomes a relabeling
    let mut c = Circuit::new(3, 1);
    c.h(0).cx(0, 2).cx(1, 2).cx(2, 1).cx(1, 2).rz(0.5, 1).measure(2, 0);
    let mut map = identity_map(3);
    let ops = absorb_trailing_swaps(c.ops().to_vec(), 3, &mut map);
    assert_eq!(map, vec![0, 2, 1]);
    assert_eq!(ops.iter().filter(|o| o.gate == Gate::CX).count(), 1);
    let o = Circuit::from_ops(3, 1, ops).unwrap();
    assert_same_action(&c, &o, &map);
}

fn arb_native_circuit(n: usize) -> impl Strategy<Value = Circuit> {
    let pair = (0..n, 0..n).prop_filter("distinct", |(a, b)| a != b);
    let op = prop_oneof![
        1 => (0..n).prop_map(|q| Op::new(Gate::SX, &[q])),
        1 => (0..n).prop_map(|q| Op::new(Gate::X, &[q])),
        1 => (prop_oneof![Just(0.0), Just(PI), -3.0f64..3.0], 0..n).prop_map(|(t, q)| Op::new(Gate::RZ(t), &[q])),
        3 => pair.prop_map(|(a, b)| Op::new(Gate::CX, &[a, b])),
    ];
    proptest::collection::vec(op, 0..40).prop_map(move |ops| Circuit::from_ops(n, 0, ops).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimize_preserves_action_and_never_grows(c in arb_native_circuit(4), level in 1u8..=3) {
        let o = optimize(&c, level);
        prop_assert!(o.circuit.num_gates() <= c.num_gates());
        prop_assert!(o.circuit.ops().iter().all(|op| is_native(&op.gate)));
        assert_same_action(&c, &o.circuit, &o.wire_map);
    }

    #[test]
    fn swap_heavy_optimize(pairs in proptest::collection::vec((0usize..3, 0usize..3, any::<bool>()), 1..8), level in 2u8..=3) {
        let mut c = Circuit::new(3, 0);
        for (a, b, swap) in pairs {
            if a == b { continue; }
            if swap { c.cx(a, b).cx(b, a).cx(a, b); } else { c.cx(a, b).apply(Gate::SX, &[a]); }
        }
        let o = optimize(&c, level);
        prop_assert!(o.circuit.num_gates() <= c.num_gates());
        assert_same_action(&c, &o.circuit, &o.wire_map);
    }
}

#[test]
fn line_routing_inserts_one_swap() {
    let line = Architecture::line(3).unwrap();
    let mut c = Circuit::new(3, 0);
    c.cx(0, 1);
    let r = route_basic(&c, &line, &Layout::trivial(3, 3));
    assert_eq!(r.swaps, 0);

    let mut c = Circuit::new(3, 0);
    c.cx(0, 2);
    let r = route_basic(&c, &line, &Layout::trivial(3, 3));
    assert_eq!(r.swaps, 1);
    assert_eq!(r.circuit.len(), 2);
    let out = decompose_to_native(&r.circuit);
    assert_eq!(out.gate_counts().get(GateClass::CX), 4);

    let cfg = TranspileConfig::new(RouterKind::Basic, 0, 0);
    let t = transpile(&c, &line, &cfg).unwrap();
    assert_eq!(t.swaps, 1);
    assert_eq!(t.circuit.num_two_qubit_gates(), 4);
}

#[test]
fn complete_graph_needs_no_swaps() {
    let k = Architecture::complete(6).unwrap();
    let c = crate::benchgen::qft(6).unwrap();
    for router in RouterKind::ALL {
        for seed in 0..3 {
            let t = transpile(&c, &k, &TranspileConfig::new(router, 0, seed)).unwrap();
            assert_eq!(t.swaps, 0, "{router}");
        }
    }
}

#[test]
fn sabre_layout_places_pair_adjacently() {
    let line = Architecture::line(3).unwrap();
    let mut c = Circuit::new(2, 0);
    c.cx(0, 1);
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = sabre_layout(&c, &line, &SabreParams::default(), &mut rng);
        assert!(line.is_coupled(l.physical(0), l.physical(1)), "seed {seed}: {l}");
        let mut rng2 = ChaCha8Rng::seed_from_u64(seed);
        assert_eq!(l, sabre_layout(&c, &line, &SabreParams::default(), &mut rng2));
    }
}

/// Fewest SWAPs needed to execute `gates` in order from the trivial layout,
/// by breadth-first search over (layout, progress).
fn min_swaps(gates: &[(usize, usize)], arch: &Architecture) -> usize {
    let n = arch.num_qubits();
    let advance = |l2p: &[usize], mut k: usize| {
        while k < gates.len() && arch.is_coupled(l2p[gates[k].0], l2p[gates[k].1]) {
            k += 1;
        }
        k
    };
    let start: Vec<usize> = (0..n).collect();
    let k0 = advance(&start, 0);
    let mut dist: HashMap<(Vec<usize>, usize), usize> = HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert((start.clone(), k0), 0);
    queue.push_back((start, k0));
    while let Some((l2p, k)) = queue.pop_front() {
        let d = dist[&(l2p.clone(), k)];
        if k == gates.len() {
            return d;
        }
        for (a, b) in arch.couplers() {
            let mut next = l2p.clone();
            for p in next.iter_mut() {
                if *p == a {
                    *p = b;
                } else if *p == b {
                    *p = a;
                }
            }
            let nk = advance(&next, k);
            if !dist.contains_key(&(next.clone(), nk)) {
                dist.insert((next.clone(), nk), d + 1);
                queue.push_back((next, nk));
            }
        }
    }
    unreachable!("connected architectures can always finish")
}

fn arb_small_instance() -> impl Strategy<Value = (Architecture, Vec<(usize, usize)>)> {
    (3usize..=5).prop_flat_map(|n| {
        // random spanning tree plus random extra edges
        let parents = proptest::collection::vec(any::<prop::sample::Index>(), n - 1);
        let extra = proptest::collection::vec((0..n, 0..n), 0..3);
        let gates = proptest::collection::vec((0..n, 1..n).prop_map(move |(a, k)| (a, (a + k) % n)), 1..=4);
        (Just(n), parents, extra, gates).prop_map(|(n, parents, extra, gates)| {
            let mut edges: Vec<(usize, usize)> = parents.iter().enumerate().map(|(i, p)| (i + 1, p.index(i + 1))).collect();
            edges.extend(extra.into_iter().filter(|(a, b)| a != b));
            let arch = Architecture::new("rand", n, crate::arch::Family::Custom, None, edges).unwrap();
            (arch, gates)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn basic_router_within_twice_optimal((arch, gates) in arb_small_instance()) {
        let mut c = Circuit::new(arch.num_qubits(), 0);
        for &(a, b) in &gates {
            c.cx(a, b);
        }
        let r = route_basic(&c, &arch, &Layout::trivial(arch.num_qubits(), arch.num_qubits()));
        let opt = min_swaps(&gates, &arch);
        prop_assert!(r.swaps >= opt);
        prop_assert!(r.swaps <= 2 * opt, "basic {} vs optimal {} for {:?} on {:?}", r.swaps, opt, gates, arch.edges());
    }
}

fn small_benchmarks() -> Vec<(&'static str, Circuit)> {
    let mut bell = Circuit::new(2, 2);
    bell.h(0).cx(0, 1).measure(0, 0).measure(1, 1);
    vec![
        ("bell", bell),
        ("qft5", crate::benchgen::qft(5).unwrap()),
        ("qpe4", crate::benchgen::qpe(4, 0.125).unwrap()),
        ("ising4", crate::benchgen::ising(4, Default::default()).unwrap()),
    ]
}

#[test]
fn transpiled_circuits_are_equivalent_and_valid() {
    let archs = [
        crate::arch::builtin("r3").unwrap(),
        crate::arch::builtin("s5").unwrap(),
        Architecture::line(6).unwrap(),
    ];
    for arch in &archs {
        for (name, c) in small_benchmarks() {
            for router in RouterKind::ALL {
                for level in 0..=3 {
                    let cfg = TranspileConfig::new(router, level, 7);
                    let t = transpile(&c, arch, &cfg).unwrap();
                    validate_output(&t.circuit, arch).unwrap();
                    let f = equivalence(&c, &t.circuit, t.final_layout.logical_to_physical()).unwrap();
                    assert!(f >= 1.0 - 1e-9, "{name} on {} {router} o{level}: {f}", arch.name());
                }
            }
        }
    }
}

#[test]
fn transpile_is_deterministic() {
    let arch = crate::arch::builtin("s4").unwrap();
    let c = crate::benchgen::qft(10).unwrap();
    for router in RouterKind::ALL {
        let cfg = TranspileConfig::new(router, 3, 42);
        let a = transpile(&c, &arch, &cfg).unwrap();
        let b = transpile(&c, &arch, &cfg).unwrap();
        assert_eq!(a.circuit, b.circuit);
        assert_eq!(a.final_layout, b.final_layout);
        assert_eq!(a.initial_layout, b.initial_layout);
    }
}

#[test]
fn rejects_bad_inputs() {
    let line = Architecture::line(3).unwrap();
    let c = crate::benchgen::qft(4).unwrap();
    assert!(matches!(
        transpile(&c, &line, &TranspileConfig::default()),
        Err(TranspileError::TooManyQubits { circuit: 4, device: 3 })
    ));
    let c = crate::benchgen::qft(2).unwrap();
    assert!(matches!(transpile(&c, &line, &TranspileConfig::new(RouterKind::Basic, 4, 0)), Err(TranspileError::BadOptLevel(4))));
    assert!("greedy".parse::<RouterKind>().is_err());
    assert_eq!("SABRE".parse::<RouterKind>().unwrap(), RouterKind::Sabre);
}
