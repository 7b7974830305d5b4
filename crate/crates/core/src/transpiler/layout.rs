use std::fmt;

use super::TranspileError;

/// Bijection between logical and physical qubits of a device.
///
/// Logical indices at or above `num_logical` are ancillas that fill the
/// physical qubits the circuit does not use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    l2p: Vec<usize>,
    p2l: Vec<usize>,
    num_logical: usize,
}

impl Layout {
    pub fn trivial(num_logical: usize, num_physical: usize) -> Self {
        assert!(num_logical <= num_physical);
        let ids: Vec<usize> = (0..num_physical).collect();
        Layout { l2p: ids.clone(), p2l: ids, num_logical }
    }

    /// Extends an injective partial assignment to a bijection, filling unused
    /// physical qubits in ascending order.
    pub fn from_partial(assignment: &[usize], num_physical: usize) -> Result<Self, TranspileError> {
        if assignment.len() > num_physical {
            return Err(TranspileError::TooManyQubits { circuit: assignment.len(), device: num_physical });
        }
        let mut used = vec![false; num_physical];
        for &p in assignment {
            if p >= num_physical || used[p] {
                return Err(TranspileError::InvalidLayout(format!("{assignment:?} is not injective into 0..{num_physical}")));
            }
            used[p] = true;
        }
        let mut l2p = assignment.to_vec();
        l2p.extend((0..num_physical).filter(|&p| !used[p]));
        Ok(Self::from_bijection(l2p, assignment.len()))
    }

    /// `l2p` must be a permutation of `0..l2p.len()`.
    pub(crate) fn from_bijection(l2p: Vec<usize>, num_logical: usize) -> Self {
        let mut p2l = vec![usize::MAX; l2p.len()];
        for (l, &p) in l2p.iter().enumerate() {
            p2l[p] = l;
        }
        debug_assert!(p2l.iter().all(|&l| l != usize::MAX));
        Layout { l2p, p2l, num_logical }
    }

    pub fn num_logical(&self) -> usize {
        self.num_logical
    }

    pub fn num_physical(&self) -> usize {
        self.l2p.len()
    }

    pub fn physical(&self, logical: usize) -> usize {
        self.l2p[logical]
    }

    pub fn logical(&self, physical: usize) -> usize {
        self.p2l[physical]
    }

    /// Physical position of each circuit qubit (ancillas excluded).
    pub fn logical_to_physical(&self) -> &[usize] {
        &self.l2p[..self.num_logical]
    }

    /// Full map including ancillas.
    pub fn l2p(&self) -> &[usize] {
        &self.l2p
    }

    pub fn p2l(&self) -> &[usize] {
        &self.p2l
    }

    /// Exchanges the contents of two physical qubits.
    pub fn swap_physical(&mut self, a: usize, b: usize) {
        let (la, lb) = (self.p2l[a], self.p2l[b]);
        self.p2l.swap(a, b);
        self.l2p[la] = b;
        self.l2p[lb] = a;
    }

    /// Moves every logical qubit from physical `p` to `wire_map[p]`.
    pub(crate) fn relabel(&self, wire_map: &[usize]) -> Layout {
        Self::from_bijection(self.l2p.iter().map(|&p| wire_map[p]).collect(), self.num_logical)
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.logical_to_physical().iter().map(|p| p.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}
