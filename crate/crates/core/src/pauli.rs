//! Pauli strings in symplectic form.
//!
//! An operator is stored as `i^phase * (x) sigma(x_q, z_q)` where
//! `sigma(1,0) = X`, `sigma(0,1) = Z` and `sigma(1,1) = Y`. Decoding paths only
//! look at the bit vectors; the phase is kept exact so algebraic invariants
//! (`P * P = +-I`, commutation of stabilizers, `-I` not in the group) can be
//! checked.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitVec;

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | '_' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Single-qubit Clifford applied by boundary deformation. `A = H S H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum CliffordTag {
    #[default]
    I,
    H,
    A,
}

impl CliffordTag {
    /// Conjugation `U P U^dagger`; returns the image letter and whether a sign flip occurs.
    pub fn conjugate(self, p: Pauli) -> (Pauli, bool) {
        match (self, p) {
            (_, Pauli::I) | (CliffordTag::I, _) => (p, false),
            (CliffordTag::H, Pauli::X) => (Pauli::Z, false),
            (CliffordTag::H, Pauli::Z) => (Pauli::X, false),
            (CliffordTag::H, Pauli::Y) => (Pauli::Y, true),
            (CliffordTag::A, Pauli::X) => (Pauli::X, false),
            (CliffordTag::A, Pauli::Y) => (Pauli::Z, false),
            (CliffordTag::A, Pauli::Z) => (Pauli::Y, true),
        }
    }
}

/// n-qubit Pauli operator with phase `i^phase`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    x: BitVec,
    z: BitVec,
    phase: u8,
}

/// Phase exponent (of `i`) picked up by `sigma(x1,z1) * sigma(x2,z2)`.
#[inline]
fn product_phase(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    let (x1, z1, x2, z2) = (x1 as i32, z1 as i32, x2 as i32, z2 as i32);
    match (x1, z1) {
        (0, 0) => 0,
        (1, 1) => z2 - x2,
        (1, 0) => z2 * (2 * x2 - 1),
        _ => x2 * (1 - 2 * z2),
    }
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self { x: BitVec::zeros(n), z: BitVec::zeros(n), phase: 0 }
    }

    pub fn from_bits(x: BitVec, z: BitVec) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::Dimension { expected: x.len(), got: z.len() });
        }
        Ok(Self { x, z, phase: 0 })
    }

    /// Operator acting as `letter` on every listed qubit.
    pub fn from_support(n: usize, support: impl IntoIterator<Item = (usize, Pauli)>) -> Self {
        let mut p = Self::identity(n);
        for (q, letter) in support {
            p.set(q, letter);
        }
        p
    }

    pub fn single(n: usize, qubit: usize, letter: Pauli) -> Self {
        Self::from_support(n, [(qubit, letter)])
    }

    pub fn uniform(n: usize, letter: Pauli) -> Self {
        Self::from_support(n, (0..n).map(|q| (q, letter)))
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn x_bits(&self) -> &BitVec {
        &self.x
    }

    pub fn z_bits(&self) -> &BitVec {
        &self.z
    }

    /// Exponent `k` of the overall factor `i^k`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x.get(q), self.z.get(q))
    }

    pub fn set(&mut self, q: usize, letter: Pauli) {
        let (x, z) = letter.bits();
        self.x.set(q, x);
        self.z.set(q, z);
    }

    pub fn weight(&self) -> usize {
        self.x.words().iter().zip(self.z.words()).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    pub fn support(&self) -> impl Iterator<Item = (usize, Pauli)> + '_ {
        (0..self.num_qubits()).map(|q| (q, self.get(q))).filter(|(_, p)| *p != Pauli::I)
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    fn check_len(&self, other: &PauliString) -> Result<()> {
        if self.num_qubits() != other.num_qubits() {
            return Err(Error::Dimension { expected: self.num_qubits(), got: other.num_qubits() });
        }
        Ok(())
    }

    /// True iff the symplectic inner product is even.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_len(other)?;
        Ok(self.x.dot(&other.z) == other.x.dot(&self.z))
    }

    /// Exact product `self * other`, including phase.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        self.check_len(other)?;
        let mut phase = self.phase as i32 + other.phase as i32;
        for q in 0..self.num_qubits() {
            phase += product_phase(self.x.get(q), self.z.get(q), other.x.get(q), other.z.get(q));
        }
        let mut x = self.x.clone();
        x.xor_assign(&other.x);
        let mut z = self.z.clone();
        z.xor_assign(&other.z);
        Ok(PauliString { x, z, phase: phase.rem_euclid(4) as u8 })
    }

    /// Qubit-wise conjugation by single-qubit Cliffords.
    pub fn conjugate_by(&self, tags: &[CliffordTag]) -> Result<PauliString> {
        if tags.len() != self.num_qubits() {
            return Err(Error::Dimension { expected: self.num_qubits(), got: tags.len() });
        }
        let mut out = PauliString::identity(self.num_qubits());
        let mut phase = self.phase;
        for (q, &tag) in tags.iter().enumerate() {
            let (image, negate) = tag.conjugate(self.get(q));
            out.set(q, image);
            if negate {
                phase = (phase + 2) % 4;
            }
        }
        out.phase = phase;
        Ok(out)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["+", "+i", "-", "-i"][self.phase as usize])?;
        for q in 0..self.num_qubits() {
            write!(f, "{}", self.get(q).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses strings such as `"+XIZ"`, `"-iYY"` or `"XZ_Z"`.
    fn from_str(s: &str) -> Result<Self> {
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else {
            (0, s)
        };
        let letters: Vec<Pauli> = body
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::Parameter(format!("bad Pauli letter {c:?}"))))
            .collect::<Result<_>>()?;
        let p = PauliString::from_support(letters.len(), letters.into_iter().enumerate());
        Ok(p.with_phase(phase))
    }
}
