//! Stabilizer codes on data qubits.

use crate::error::{Error, Result};
use crate::gf2::{rank_of, BitVec};
use crate::pauli::PauliString;

/// A stabilizer code with one logical qubit.
#[derive(Debug, Clone)]
pub struct StabilizerCode {
    pub stabilizers: Vec<PauliString>,
    pub logical_x: PauliString,
    pub logical_z: PauliString,
    /// Present for families where a short native Y-type representative exists.
    pub logical_y: Option<PauliString>,
    pub coordinates: Vec<(i32, i32)>,
}

impl StabilizerCode {
    pub fn num_qubits(&self) -> usize {
        self.logical_x.num_qubits()
    }

    pub fn logicals(&self) -> impl Iterator<Item = &PauliString> {
        [&self.logical_x, &self.logical_z].into_iter().chain(self.logical_y.as_ref())
    }

    /// Checks the defining algebraic invariants of the code.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_qubits();
        for (i, s) in self.stabilizers.iter().enumerate() {
            if s.num_qubits() != n {
                return Err(Error::Dimension { expected: n, got: s.num_qubits() });
            }
            if s.phase() % 2 == 1 {
                return Err(Error::InvalidCode(format!("stabilizer {i} is not Hermitian")));
            }
            for (j, t) in self.stabilizers.iter().enumerate().skip(i + 1) {
                if !s.commutes(t)? {
                    return Err(Error::InvalidCode(format!("stabilizers {i} and {j} anticommute")));
                }
            }
            for l in self.logicals() {
                if !s.commutes(l)? {
                    return Err(Error::InvalidCode(format!("stabilizer {i} anticommutes with logical {l}")));
                }
            }
        }
        let pairs = [(Some(&self.logical_x), Some(&self.logical_z)), (Some(&self.logical_x), self.logical_y.as_ref()), (self.logical_y.as_ref(), Some(&self.logical_z))];
        for (a, b) in pairs {
            if let (Some(a), Some(b)) = (a, b) {
                if a.commutes(b)? {
                    return Err(Error::InvalidCode(format!("logicals {a} and {b} commute")));
                }
            }
        }
        // Independent generators cannot multiply to -I.
        let rows: Vec<BitVec> = self.stabilizers.iter().map(symplectic_row).collect();
        let rank = rank_of(&rows);
        if rank != self.stabilizers.len() {
            return Err(Error::InvalidCode(format!(
                "stabilizer generators are dependent (rank {rank} of {})",
                self.stabilizers.len()
            )));
        }
        Ok(())
    }
}

/// `(x | z)` concatenated into one vector of length `2n`.
pub(crate) fn symplectic_row(p: &PauliString) -> BitVec {
    let n = p.num_qubits();
    let mut v = BitVec::zeros(2 * n);
    for q in p.x_bits().iter_ones() {
        v.set(q, true);
    }
    for q in p.z_bits().iter_ones() {
        v.set(n + q, true);
    }
    v
}
