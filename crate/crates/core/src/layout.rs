//! Rotated surface-code layouts: CSS (square or rectangular), XY, and XY with
//! deformed boundaries, together with their 4-slot syndrome-extraction plan.
//!
//! Data qubit `(c, r)` sits at coordinate `(2c, 2r)` with index `r * cols + c`.
//! Ancillas sit at odd-odd plaquette centres `(2c+1, 2r+1)` and are numbered
//! after the data qubits. X-type stabilizers own the top and bottom boundaries,
//! Z/Y-type stabilizers the left and right ones, so logical X runs down a
//! column (weight `rows = d_x`) and logical Z along a row (weight `cols = d_z`).

use serde::{Deserialize, Serialize};

use crate::code::StabilizerCode;
use crate::error::{Error, Result};
use crate::pauli::{CliffordTag, Pauli, PauliString};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CodeFamily {
    Css,
    Xy,
    XyDeformed,
}

/// Stabilizer species before any boundary deformation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabilizerKind {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledQubit {
    pub data: usize,
    /// Pauli measured on this qubit (after deformation).
    pub pauli: Pauli,
    /// Two-qubit gate slot, 0..=3.
    pub slot: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerDescriptor {
    /// Qubit index of the measuring ancilla.
    pub ancilla: usize,
    pub coord: (i32, i32),
    pub kind: StabilizerKind,
    pub boundary: bool,
    pub support: Vec<ScheduledQubit>,
}

impl StabilizerDescriptor {
    /// Ancillas prepared in |0> and targeted by CX (CSS Z checks) measure in Z;
    /// everything else is a |+> control measured in X.
    pub fn ancilla_basis(&self) -> Pauli {
        if self.kind == StabilizerKind::Z {
            Pauli::Z
        } else {
            Pauli::X
        }
    }
}

/// Per-data-qubit single-qubit Clifford tags for the deformed XY code.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DeformationMap {
    pub tags: Vec<CliffordTag>,
}

impl DeformationMap {
    pub fn identity(n: usize) -> Self {
        Self { tags: vec![CliffordTag::I; n] }
    }

    pub fn tagged_count(&self) -> usize {
        self.tags.iter().filter(|t| **t != CliffordTag::I).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceCodeLayout {
    pub family: CodeFamily,
    /// Rows of data qubits; the X distance.
    pub d_x: usize,
    /// Columns of data qubits; the Z distance of the CSS code.
    pub d_z: usize,
    pub data_coords: Vec<(i32, i32)>,
    pub ancilla_coords: Vec<(i32, i32)>,
    pub stabilizers: Vec<StabilizerDescriptor>,
    pub deformation: DeformationMap,
}

// Offsets (dx, dy) from ancilla to data qubit, indexed by slot. The last two
// X-check gates share a row and the last two Z/Y-check gates share a column,
// so hook errors run perpendicular to the logical they could shorten.
const X_ORDER: [(i32, i32); 4] = [(-1, -1), (1, -1), (-1, 1), (1, 1)];
const ZY_ORDER: [(i32, i32); 4] = [(-1, -1), (-1, 1), (1, -1), (1, 1)];

fn check_dim(name: &str, d: usize) -> Result<()> {
    if d < 3 || d % 2 == 0 {
        return Err(Error::Parameter(format!("{name} must be odd and >= 3, got {d}")));
    }
    Ok(())
}

impl SurfaceCodeLayout {
    pub fn num_data(&self) -> usize {
        self.data_coords.len()
    }

    pub fn num_ancillas(&self) -> usize {
        self.ancilla_coords.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.num_data() + self.num_ancillas()
    }

    pub fn data_index(&self, col: usize, row: usize) -> usize {
        row * self.d_z + col
    }

    /// Stabilizer generators on the data qubits, including deformation.
    pub fn stabilizer_paulis(&self) -> Vec<PauliString> {
        let n = self.num_data();
        self.stabilizers
            .iter()
            .map(|s| PauliString::from_support(n, s.support.iter().map(|q| (q.data, q.pauli))))
            .collect()
    }

    fn deform(&self, p: PauliString) -> PauliString {
        p.conjugate_by(&self.deformation.tags).expect("deformation length matches data count")
    }

    /// Logical X: X down column 0.
    pub fn logical_x(&self) -> PauliString {
        let n = self.num_data();
        self.deform(PauliString::from_support(n, (0..self.d_x).map(|r| (self.data_index(0, r), Pauli::X))))
    }

    /// Logical Z: Z along row 0 for CSS, Z on every qubit for the XY families.
    pub fn logical_z(&self) -> PauliString {
        let n = self.num_data();
        let p = match self.family {
            CodeFamily::Css => PauliString::from_support(n, (0..self.d_z).map(|c| (self.data_index(c, 0), Pauli::Z))),
            CodeFamily::Xy | CodeFamily::XyDeformed => PauliString::uniform(n, Pauli::Z),
        };
        self.deform(p)
    }

    /// Logical Y: Y along row 0 for the XY families.
    pub fn logical_y(&self) -> Option<PauliString> {
        match self.family {
            CodeFamily::Css => None,
            CodeFamily::Xy | CodeFamily::XyDeformed => {
                let n = self.num_data();
                Some(self.deform(PauliString::from_support(n, (0..self.d_z).map(|c| (self.data_index(c, 0), Pauli::Y)))))
            }
        }
    }

    pub fn to_code(&self) -> StabilizerCode {
        StabilizerCode {
            stabilizers: self.stabilizer_paulis(),
            logical_x: self.logical_x(),
            logical_z: self.logical_z(),
            logical_y: self.logical_y(),
            coordinates: self.data_coords.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serializes")
    }
}

fn build_rotated(family: CodeFamily, rows: usize, cols: usize) -> SurfaceCodeLayout {
    let data_coords: Vec<(i32, i32)> =
        (0..rows).flat_map(|r| (0..cols).map(move |c| (2 * c as i32, 2 * r as i32))).collect();
    let n = data_coords.len();
    let (ri, ci) = (rows as i32, cols as i32);
    let mut stabilizers = Vec::new();
    let mut ancilla_coords = Vec::new();
    for r in -1..ri {
        for c in -1..ci {
            let x_type = (c + r).rem_euclid(2) == 0;
            let vertical_edge = r == -1 || r == ri - 1;
            let horizontal_edge = c == -1 || c == ci - 1;
            let keep = match (vertical_edge, horizontal_edge) {
                (false, false) => true,
                (true, false) => x_type,
                (false, true) => !x_type,
                (true, true) => false,
            };
            if !keep {
                continue;
            }
            let kind = match (x_type, family) {
                (true, _) => StabilizerKind::X,
                (false, CodeFamily::Css) => StabilizerKind::Z,
                (false, _) => StabilizerKind::Y,
            };
            let order = if kind == StabilizerKind::X { &X_ORDER } else { &ZY_ORDER };
            let pauli = match kind {
                StabilizerKind::X => Pauli::X,
                StabilizerKind::Y => Pauli::Y,
                StabilizerKind::Z => Pauli::Z,
            };
            let centre = (2 * c + 1, 2 * r + 1);
            let mut support = Vec::new();
            for (slot, &(dx, dy)) in order.iter().enumerate() {
                let (x, y) = (centre.0 + dx, centre.1 + dy);
                if x < 0 || y < 0 || x > 2 * (ci - 1) || y > 2 * (ri - 1) {
                    continue;
                }
                let data = (y / 2) as usize * cols + (x / 2) as usize;
                support.push(ScheduledQubit { data, pauli, slot: slot as u8 });
            }
            stabilizers.push(StabilizerDescriptor {
                ancilla: n + ancilla_coords.len(),
                coord: centre,
                kind,
                boundary: support.len() == 2,
                support,
            });
            ancilla_coords.push(centre);
        }
    }
    SurfaceCodeLayout {
        family,
        d_x: rows,
        d_z: cols,
        data_coords,
        ancilla_coords,
        stabilizers,
        deformation: DeformationMap::identity(n),
    }
}

/// Rotated CSS surface code with X distance `d_x` and Z distance `d_z`.
pub fn build_css(d_x: usize, d_z: usize) -> Result<SurfaceCodeLayout> {
    check_dim("d_x", d_x)?;
    check_dim("d_z", d_z)?;
    Ok(build_rotated(CodeFamily::Css, d_x, d_z))
}

/// XY surface code: the square CSS geometry with every Z check replaced by Y.
pub fn build_xy(l: usize) -> Result<SurfaceCodeLayout> {
    check_dim("L", l)?;
    Ok(build_rotated(CodeFamily::Xy, l, l))
}

/// XY code with H applied to one qubit of each weight-2 Y check and
/// `A = HSH` to one qubit of each weight-2 X check. The tagged qubit is the
/// one with the lexicographically smaller coordinate.
pub fn build_xy_deformed(l: usize) -> Result<(SurfaceCodeLayout, DeformationMap)> {
    check_dim("L", l)?;
    let mut layout = build_rotated(CodeFamily::XyDeformed, l, l);
    let mut tags = vec![CliffordTag::I; layout.num_data()];
    for s in layout.stabilizers.iter().filter(|s| s.boundary) {
        let target = s
            .support
            .iter()
            .map(|q| q.data)
            .min_by_key(|&q| layout.data_coords[q])
            .expect("boundary check has support");
        if tags[target] != CliffordTag::I {
            return Err(Error::InvalidCode(format!("qubit {target} lies on two boundary checks")));
        }
        tags[target] = match s.kind {
            StabilizerKind::X => CliffordTag::A,
            _ => CliffordTag::H,
        };
    }
    for s in layout.stabilizers.iter_mut() {
        for q in s.support.iter_mut() {
            q.pauli = tags[q.data].conjugate(q.pauli).0;
        }
    }
    let map = DeformationMap { tags };
    layout.deformation = map.clone();
    Ok((layout, map))
}

/// One two-qubit gate of the extraction plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedGate {
    pub stabilizer: usize,
    pub ancilla: usize,
    pub data: usize,
    pub pauli: Pauli,
}

/// Gates grouped into the four slots of one syndrome cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GatePlan {
    pub slots: [Vec<PlannedGate>; 4],
}

/// Groups the layout's gates by slot and checks that no qubit is used twice in a slot.
pub fn schedule(layout: &SurfaceCodeLayout) -> Result<GatePlan> {
    let mut slots: [Vec<PlannedGate>; 4] = Default::default();
    for (si, s) in layout.stabilizers.iter().enumerate() {
        for q in &s.support {
            slots[q.slot as usize].push(PlannedGate { stabilizer: si, ancilla: s.ancilla, data: q.data, pauli: q.pauli });
        }
    }
    let mut used = vec![usize::MAX; layout.num_qubits()];
    for (slot, gates) in slots.iter().enumerate() {
        for g in gates {
            for qubit in [g.ancilla, g.data] {
                if used[qubit] == slot {
                    return Err(Error::ScheduleConflict { qubit, slot });
                }
                used[qubit] = slot;
            }
        }
    }
    Ok(GatePlan { slots })
}
