//! Gate vocabulary shared by the IR, the interchange format and the simulator.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;

/// 2x2 complex matrix, row-major.
pub type Mat2 = [[Complex64; 2]; 2];

/// 4x4 complex matrix, row-major. Basis index is `2 * b + a` for a gate on
/// qubits `[a, b]`, so the first listed qubit is the low bit.
pub type Mat4 = [[Complex64; 4]; 4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H,
    X,
    SX,
    RZ(f64),
    /// Generic single-qubit rotation `U(theta, phi, lambda)`.
    U(f64, f64, f64),
    RX(f64),
    CX,
    /// Controlled phase.
    CP(f64),
    Swap,
    Measure,
    Barrier,
}

/// Class used when tallying gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GateClass {
    H,
    X,
    SX,
    RZ,
    U,
    RX,
    CX,
    CP,
    Swap,
    Measure,
    Barrier,
}

impl GateClass {
    pub fn name(self) -> &'static str {
        match self {
            GateClass::H => "h",
            GateClass::X => "x",
            GateClass::SX => "sx",
            GateClass::RZ => "rz",
            GateClass::U => "u",
            GateClass::RX => "rx",
            GateClass::CX => "cx",
            GateClass::CP => "cp",
            GateClass::Swap => "swap",
            GateClass::Measure => "measure",
            GateClass::Barrier => "barrier",
        }
    }

    /// Unitary gates acting on exactly one qubit.
    pub fn is_single_qubit(self) -> bool {
        matches!(
            self,
            GateClass::H | GateClass::X | GateClass::SX | GateClass::RZ | GateClass::U | GateClass::RX
        )
    }

    pub fn is_two_qubit(self) -> bool {
        matches!(self, GateClass::CX | GateClass::CP | GateClass::Swap)
    }
}

impl fmt::Display for GateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Number of qubits a gate acts on. Barriers span any non-empty set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Fixed(usize),
    AtLeastOne,
}

impl Gate {
    pub fn class(&self) -> GateClass {
        match self {
            Gate::H => GateClass::H,
            Gate::X => GateClass::X,
            Gate::SX => GateClass::SX,
            Gate::RZ(_) => GateClass::RZ,
            Gate::U(..) => GateClass::U,
            Gate::RX(_) => GateClass::RX,
            Gate::CX => GateClass::CX,
            Gate::CP(_) => GateClass::CP,
            Gate::Swap => GateClass::Swap,
            Gate::Measure => GateClass::Measure,
            Gate::Barrier => GateClass::Barrier,
        }
    }

    pub fn name(&self) -> &'static str {
        self.class().name()
    }

    pub fn arity(&self) -> Arity {
        match self {
            Gate::CX | Gate::CP(_) | Gate::Swap => Arity::Fixed(2),
            Gate::Barrier => Arity::AtLeastOne,
            _ => Arity::Fixed(1),
        }
    }

    /// Angle parameters in declaration order.
    pub fn angles(&self) -> Vec<f64> {
        match *self {
            Gate::RZ(a) | Gate::RX(a) | Gate::CP(a) => vec![a],
            Gate::U(t, p, l) => vec![t, p, l],
            _ => Vec::new(),
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, Gate::Measure | Gate::Barrier)
    }

    /// Matrix of a single-qubit gate.
    pub fn matrix_1q(&self) -> Option<Mat2> {
        let c = Complex64::new;
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        Some(match *self {
            Gate::H => {
                let s = c(FRAC_1_SQRT_2, 0.0);
                [[s, s], [s, -s]]
            }
            Gate::X => [[z, one], [one, z]],
            Gate::SX => {
                let p = c(0.5, 0.5);
                let m = c(0.5, -0.5);
                [[p, m], [m, p]]
            }
            Gate::RZ(t) => [
                [Complex64::from_polar(1.0, -t / 2.0), z],
                [z, Complex64::from_polar(1.0, t / 2.0)],
            ],
            Gate::RX(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
            }
            Gate::U(t, p, l) => u_matrix(t, p, l),
            _ => return None,
        })
    }

    /// Matrix of a two-qubit gate on `[a, b]` (a = control where relevant).
    pub fn matrix_2q(&self) -> Option<Mat4> {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let mut m = [[z; 4]; 4];
        match *self {
            Gate::CX => {
                // a is the low bit: |b a>; flips b when a = 1.
                m[0][0] = one;
                m[2][2] = one;
                m[3][1] = one;
                m[1][3] = one;
            }
            Gate::CP(t) => {
                m[0][0] = one;
                m[1][1] = one;
                m[2][2] = one;
                m[3][3] = Complex64::from_polar(1.0, t);
            }
            Gate::Swap => {
                m[0][0] = one;
                m[1][2] = one;
                m[2][1] = one;
                m[3][3] = one;
            }
            _ => return None,
        }
        Some(m)
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::RZ(t) => Gate::RZ(-t),
            Gate::RX(t) => Gate::RX(-t),
            Gate::CP(t) => Gate::CP(-t),
            Gate::U(t, p, l) => Gate::U(-t, -l, -p),
            Gate::SX => Gate::RX(-std::f64::consts::FRAC_PI_2),
            g => g,
        }
    }
}

/// `U(theta, phi, lambda)` in the standard convention
/// `[[cos t/2, -e^{il} sin t/2], [e^{ip} sin t/2, e^{i(p+l)} cos t/2]]`.
pub fn u_matrix(theta: f64, phi: f64, lambda: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), -Complex64::from_polar(s, lambda)],
        [Complex64::from_polar(s, phi), Complex64::from_polar(c, phi + lambda)],
    ]
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat2_identity() -> Mat2 {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    [[one, z], [z, one]]
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut t = theta % TAU;
    if t <= -PI {
        t += TAU;
    } else if t > PI {
        t -= TAU;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_unitary(m: &Mat2) -> bool {
        for i in 0..2 {
            for j in 0..2 {
                let dot = m[0][i].conj() * m[0][j] + m[1][i].conj() * m[1][j];
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot - Complex64::new(want, 0.0)).norm() > 1e-12 {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn single_qubit_matrices_are_unitary() {
        for g in [
            Gate::H,
            Gate::X,
            Gate::SX,
            Gate::RZ(0.3),
            Gate::RX(-1.2),
            Gate::U(0.4, 1.1, -2.0),
        ] {
            assert!(is_unitary(&g.matrix_1q().unwrap()), "{g:?}");
        }
    }

    #[test]
    fn sx_squared_is_x() {
        let sx = Gate::SX.matrix_1q().unwrap();
        let x = Gate::X.matrix_1q().unwrap();
        let sq = mat2_mul(&sx, &sx);
        for i in 0..2 {
            for j in 0..2 {
                assert!((sq[i][j] - x[i][j]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_cancels() {
        for g in [Gate::SX, Gate::U(0.4, 1.1, -2.0), Gate::RZ(0.7), Gate::RX(2.2)] {
            let m = mat2_mul(&g.inverse().matrix_1q().unwrap(), &g.matrix_1q().unwrap());
            let phase = m[0][0];
            assert!((phase.norm() - 1.0).abs() < 1e-12);
            assert!(m[0][1].norm() < 1e-12 && m[1][0].norm() < 1e-12);
            assert!((m[1][1] - phase).norm() < 1e-12, "{g:?}");
        }
    }

    #[test]
    fn wrap_angle_range() {
        use std::f64::consts::PI;
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.5) - 0.5).abs() < 1e-15);
    }
}
