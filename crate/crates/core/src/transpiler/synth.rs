//! Single-qubit ZSX synthesis and translation to the native gate set.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::circuit::{Circuit, Op};
use crate::gate::{wrap_angle, Gate, Mat2};

const ANGLE_TOL: f64 = 1e-10;

/// Gates a device executes directly.
pub fn is_native(gate: &Gate) -> bool {
    matches!(gate, Gate::RZ(_) | Gate::SX | Gate::X | Gate::CX | Gate::Measure | Gate::Barrier)
}

/// `(theta, phi, lambda)` with `m = e^{i g} U(theta, phi, lambda)`.
pub fn euler_angles(m: &Mat2) -> (f64, f64, f64) {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = det.sqrt().inv();
    let u00 = m[0][0] * scale;
    let u10 = m[1][0] * scale;
    let u11 = m[1][1] * scale;
    let theta = 2.0 * u10.norm().atan2(u00.norm());
    let (a11, a10) = (u11.arg(), u10.arg());
    (theta, a11 + a10, a11 - a10)
}

/// `true` when `m` equals the identity up to global phase.
pub fn is_identity_up_to_phase(m: &Mat2, tol: f64) -> bool {
    let off = m[0][1].norm() + m[1][0].norm();
    off < tol && (m[0][0] - m[1][1]).norm() < tol
}

fn push_rz(out: &mut Vec<Op>, angle: f64, q: usize) {
    let a = wrap_angle(angle);
    if a.abs() > ANGLE_TOL && (a.abs() - 2.0 * PI).abs() > ANGLE_TOL {
        out.push(Op::new(Gate::RZ(a), &[q]));
    }
}

/// Native ops equal to `m` on qubit `q` up to global phase: at most
/// RZ-SX-RZ-SX-RZ, with special shorter forms for theta in {0, pi/2, pi}.
pub fn synthesize_1q(m: &Mat2, q: usize) -> Vec<Op> {
    let (theta, phi, lambda) = euler_angles(m);
    let mut out = Vec::with_capacity(5);
    if theta.abs() < ANGLE_TOL {
        push_rz(&mut out, phi + lambda, q);
    } else if (theta - FRAC_PI_2).abs() < ANGLE_TOL {
        push_rz(&mut out, lambda - FRAC_PI_2, q);
        out.push(Op::new(Gate::SX, &[q]));
        push_rz(&mut out, phi + FRAC_PI_2, q);
    } else if (theta - PI).abs() < ANGLE_TOL {
        push_rz(&mut out, lambda - phi + PI, q);
        out.push(Op::new(Gate::X, &[q]));
    } else {
        push_rz(&mut out, lambda, q);
        out.push(Op::new(Gate::SX, &[q]));
        push_rz(&mut out, theta + PI, q);
        out.push(Op::new(Gate::SX, &[q]));
        push_rz(&mut out, phi + PI, q);
    }
    out
}

/// Appends the native form of `op`. SWAPs are emitted as `CX(a,b) CX(b,a) CX(a,b)`.
pub fn push_native(out: &mut Vec<Op>, op: &Op) {
    let q = &op.qubits;
    match op.gate {
        g if is_native(&g) => out.push(op.clone()),
        Gate::CP(theta) => {
            let (c, t) = (q[0], q[1]);
            push_rz(out, theta / 2.0, c);
            out.push(Op::new(Gate::CX, &[c, t]));
            push_rz(out, -theta / 2.0, t);
            out.push(Op::new(Gate::CX, &[c, t]));
            push_rz(out, theta / 2.0, t);
        }
        Gate::Swap => {
            let (a, b) = (q[0], q[1]);
            out.push(Op::new(Gate::CX, &[a, b]));
            out.push(Op::new(Gate::CX, &[b, a]));
            out.push(Op::new(Gate::CX, &[a, b]));
        }
        g => {
            let m = g.matrix_1q().expect("remaining gates are single-qubit");
            out.extend(synthesize_1q(&m, q[0]));
        }
    }
}

/// Rewrites every gate into {RZ, SX, X, CX} plus measurements and barriers.
pub fn decompose_to_native(circuit: &Circuit) -> Circuit {
    let mut ops = Vec::with_capacity(circuit.len() * 2);
    for op in circuit.ops() {
        push_native(&mut ops, op);
    }
    Circuit::from_ops_unchecked(circuit.num_qubits(), circuit.num_clbits(), ops)
}

/// Product of the single-qubit gates in `ops`, applied in order.
pub(crate) fn run_matrix<'a>(ops: impl IntoIterator<Item = &'a Op>) -> Mat2 {
    let mut acc = crate::gate::mat2_identity();
    for op in ops {
        let m = op.gate.matrix_1q().expect("single-qubit gate");
        acc = crate::gate::mat2_mul(&m, &acc);
    }
    acc
}
