//! Exhaustive distance searches over GF(2) kernels.

use crate::code::StabilizerCode;
use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitVec};

/// Largest kernel dimension enumerated by [`z_type_distance`].
pub const Z_KERNEL_DIM_LIMIT: usize = 20;
/// Largest kernel dimension enumerated by [`min_logical_weight`].
pub const LOGICAL_KERNEL_DIM_LIMIT: usize = 28;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZDistance {
    /// Minimum weight of a Z-type logical; `None` when the code has none.
    pub distance: Option<usize>,
    /// Every Z-type logical found, as Z-support vectors.
    pub logicals: Vec<BitVec>,
    /// Number of nonzero kernel elements that are Z-type stabilizers.
    pub z_stabilizer_count: usize,
    pub kernel_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliType {
    X,
    Y,
    Z,
    Any,
}

/// Walks all nonzero combinations of `basis` in Gray-code order, calling `f`
/// with the running XOR and a bitmask of anticommutation with the logicals.
fn for_each_combination(basis: &[BitVec], flips: &[u32], mut f: impl FnMut(&BitVec, u32)) {
    let k = basis.len();
    if k == 0 {
        return;
    }
    let mut acc = BitVec::zeros(basis[0].len());
    let mut mask = 0u32;
    for i in 1u64..(1u64 << k) {
        let j = i.trailing_zeros() as usize;
        acc.xor_assign(&basis[j]);
        mask ^= flips[j];
        f(&acc, mask);
    }
}

/// Enumerates Z-type operators in the kernel of the X-component check matrix
/// and splits them into stabilizers and logicals.
pub fn z_type_distance(code: &StabilizerCode) -> Result<ZDistance> {
    let n = code.num_qubits();
    let rows: Vec<BitVec> = code.stabilizers.iter().map(|s| s.x_bits().clone()).collect();
    let basis = BinaryMatrix::from_rows(n, &rows).kernel();
    if basis.len() > Z_KERNEL_DIM_LIMIT {
        return Err(Error::Capacity { what: "Z-type kernel dimension", value: basis.len(), limit: Z_KERNEL_DIM_LIMIT });
    }
    let logicals: Vec<&BitVec> = code.logicals().map(|l| l.x_bits()).collect();
    let flips: Vec<u32> = basis
        .iter()
        .map(|v| logicals.iter().enumerate().fold(0u32, |m, (i, lx)| m | ((v.dot(lx) as u32) << i)))
        .collect();
    let mut out = ZDistance { distance: None, logicals: Vec::new(), z_stabilizer_count: 0, kernel_dim: basis.len() };
    for_each_combination(&basis, &flips, |v, mask| {
        if mask == 0 {
            out.z_stabilizer_count += 1;
        } else {
            let w = v.count_ones();
            out.distance = Some(out.distance.map_or(w, |d| d.min(w)));
            out.logicals.push(v.clone());
        }
    });
    Ok(out)
}

/// Minimum weight of a nontrivial logical operator restricted to `pauli_type`.
/// Returns `None` when no logical of that type exists.
pub fn min_logical_weight(code: &StabilizerCode, pauli_type: PauliType) -> Result<Option<usize>> {
    let n = code.num_qubits();
    // Each candidate is a vector v; the operator it denotes and the check row
    // it must be orthogonal to depend on the type.
    let (cols, rows): (usize, Vec<BitVec>) = match pauli_type {
        PauliType::X => (n, code.stabilizers.iter().map(|s| s.z_bits().clone()).collect()),
        PauliType::Z => (n, code.stabilizers.iter().map(|s| s.x_bits().clone()).collect()),
        PauliType::Y => (
            n,
            code.stabilizers
                .iter()
                .map(|s| {
                    let mut r = s.x_bits().clone();
                    r.xor_assign(s.z_bits());
                    r
                })
                .collect(),
        ),
        PauliType::Any => (2 * n, code.stabilizers.iter().map(|s| concat(s.z_bits(), s.x_bits())).collect()),
    };
    let basis = BinaryMatrix::from_rows(cols, &rows).kernel();
    if basis.len() > LOGICAL_KERNEL_DIM_LIMIT {
        return Err(Error::Capacity { what: "logical kernel dimension", value: basis.len(), limit: LOGICAL_KERNEL_DIM_LIMIT });
    }
    // Same orthogonality test against each logical.
    let logical_rows: Vec<BitVec> = code
        .logicals()
        .map(|l| match pauli_type {
            PauliType::X => l.z_bits().clone(),
            PauliType::Z => l.x_bits().clone(),
            PauliType::Y => {
                let mut r = l.x_bits().clone();
                r.xor_assign(l.z_bits());
                r
            }
            PauliType::Any => concat(l.z_bits(), l.x_bits()),
        })
        .collect();
    let flips: Vec<u32> = basis
        .iter()
        .map(|v| logical_rows.iter().enumerate().fold(0u32, |m, (i, r)| m | ((v.dot(r) as u32) << i)))
        .collect();
    let mut best: Option<usize> = None;
    for_each_combination(&basis, &flips, |v, mask| {
        if mask != 0 {
            let w = if pauli_type == PauliType::Any { support_weight(v, n) } else { v.count_ones() };
            best = Some(best.map_or(w, |b| b.min(w)));
        }
    });
    Ok(best)
}

fn concat(a: &BitVec, b: &BitVec) -> BitVec {
    let n = a.len();
    BitVec::from_indices(n + b.len(), a.iter_ones().chain(b.iter_ones().map(|i| i + n)))
}

fn support_weight(v: &BitVec, n: usize) -> usize {
    let mut w = 0;
    for q in 0..n {
        if v.get(q) || v.get(q + n) {
            w += 1;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{build_css, build_xy, build_xy_deformed};

    #[test]
    fn css_distances() {
        let c = build_css(3, 3).unwrap().to_code();
        assert_eq!(min_logical_weight(&c, PauliType::Any).unwrap(), Some(3));
        let r = build_css(3, 5).unwrap().to_code();
        assert_eq!(min_logical_weight(&r, PauliType::X).unwrap(), Some(3));
        assert_eq!(min_logical_weight(&r, PauliType::Z).unwrap(), Some(5));
        let r = build_css(5, 3).unwrap().to_code();
        assert_eq!(min_logical_weight(&r, PauliType::X).unwrap(), Some(5));
        assert_eq!(min_logical_weight(&r, PauliType::Z).unwrap(), Some(3));
    }

    #[test]
    fn xy_code_z_distance_is_n() {
        let c = build_xy(5).unwrap().to_code();
        assert_eq!(min_logical_weight(&c, PauliType::Z).unwrap(), Some(25));
        let z = z_type_distance(&c).unwrap();
        assert_eq!(z.distance, Some(25));
        assert_eq!(z.z_stabilizer_count, 0);
        assert!(z.logicals.iter().any(|v| v.count_ones() == 25));
    }

    #[test]
    fn xy_code_other_distances() {
        let c = build_xy(3).unwrap().to_code();
        assert_eq!(min_logical_weight(&c, PauliType::X).unwrap(), Some(3));
        assert_eq!(min_logical_weight(&c, PauliType::Y).unwrap(), Some(3));
        assert_eq!(min_logical_weight(&c, PauliType::Any).unwrap(), Some(3));
    }

    #[test]
    fn deformed_l15_has_a_z_stabilizer() {
        let (layout, _) = build_xy_deformed(15).unwrap();
        let z = z_type_distance(&layout.to_code()).unwrap();
        assert_eq!(z.kernel_dim, 2);
        assert_eq!(z.z_stabilizer_count, 1);
    }

    #[test]
    fn css_kernel_too_large_for_z_enumeration() {
        let c = build_css(7, 7).unwrap().to_code();
        assert!(matches!(z_type_distance(&c), Err(Error::Capacity { .. })));
    }
}
