//! Memory-experiment circuits and the biased circuit-level noise model.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{schedule, CodeFamily, StabilizerKind, SurfaceCodeLayout};
use crate::pauli::Pauli;

/// One circuit operation. Gates come first inside a timestep, noise channels after.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Op {
    PrepX(u32),
    PrepZ(u32),
    MeasX(u32),
    MeasZ(u32),
    /// Measure then reinitialise in the same basis.
    MeasResetX(u32),
    MeasResetZ(u32),
    Cx(u32, u32),
    Cy(u32, u32),
    Cz(u32, u32),
    Idle(u32),
    /// Independent-outcome single-qubit channel.
    Pauli1 { q: u32, px: f64, py: f64, pz: f64 },
    /// Two-qubit channel; entry `k - 1` is the probability of outcome
    /// `(k >> 2, k & 3)` with letters encoded I=0, X=1, Y=2, Z=3.
    Pauli2 { a: u32, b: u32, probs: [f64; 15] },
    /// Classical flip of a measurement record.
    RecordFlip { record: u32, p: f64 },
}

impl Op {
    pub fn is_noise(&self) -> bool {
        matches!(self, Op::Pauli1 { .. } | Op::Pauli2 { .. } | Op::RecordFlip { .. })
    }

    pub fn is_measurement(&self) -> bool {
        matches!(self, Op::MeasX(_) | Op::MeasZ(_) | Op::MeasResetX(_) | Op::MeasResetZ(_))
    }

    /// Qubits touched by a non-noise op.
    pub fn qubits(&self) -> Vec<u32> {
        match *self {
            Op::PrepX(q) | Op::PrepZ(q) | Op::MeasX(q) | Op::MeasZ(q) | Op::MeasResetX(q) | Op::MeasResetZ(q) | Op::Idle(q) => {
                vec![q]
            }
            Op::Cx(a, b) | Op::Cy(a, b) | Op::Cz(a, b) => vec![a, b],
            Op::Pauli1 { q, .. } => vec![q],
            Op::Pauli2 { a, b, .. } => vec![a, b],
            Op::RecordFlip { .. } => vec![],
        }
    }

    /// Total probability that a noise op does anything.
    pub fn total_probability(&self) -> f64 {
        match self {
            Op::Pauli1 { px, py, pz, .. } => px + py + pz,
            Op::Pauli2 { probs, .. } => probs.iter().sum(),
            Op::RecordFlip { p, .. } => *p,
            _ => 0.0,
        }
    }
}

/// Letter encoding used by [`Op::Pauli2`].
pub fn pauli_from_code(c: usize) -> Pauli {
    [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][c & 3]
}

pub fn pauli_code(p: Pauli) -> usize {
    match p {
        Pauli::I => 0,
        Pauli::X => 1,
        Pauli::Y => 2,
        Pauli::Z => 3,
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Timestep {
    pub ops: Vec<Op>,
    /// Excluded from noise attachment (perfect boundary rounds).
    pub noiseless: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub num_qubits: usize,
    pub timesteps: Vec<Timestep>,
    /// Each detector is the parity of these measurement records.
    pub detectors: Vec<Vec<u32>>,
    /// `(x, y, t)` per detector: ancilla or plaquette coordinate and round index.
    pub detector_coords: Vec<(i32, i32, u32)>,
    pub observables: Vec<Vec<u32>>,
}

impl Circuit {
    pub fn num_measurements(&self) -> usize {
        self.timesteps.iter().flat_map(|t| &t.ops).filter(|o| o.is_measurement()).count()
    }

    pub fn num_detectors(&self) -> usize {
        self.detectors.len()
    }

    pub fn num_observables(&self) -> usize {
        self.observables.len()
    }

    /// Noise ops in program order; positions in this list are the site ids
    /// used by the sampler's injection API and by the DEM builder.
    pub fn noise_sites(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (t, step) in self.timesteps.iter().enumerate() {
            for (i, op) in step.ops.iter().enumerate() {
                if op.is_noise() {
                    out.push((t, i));
                }
            }
        }
        out
    }

    pub fn is_noiseless(&self) -> bool {
        self.timesteps.iter().flat_map(|t| &t.ops).all(|o| !o.is_noise() || o.total_probability() == 0.0)
    }

    /// Checks that no qubit is used twice in a timestep and all indices are in range.
    pub fn validate(&self) -> Result<()> {
        let n_meas = self.num_measurements();
        let mut used = vec![usize::MAX; self.num_qubits];
        for (t, step) in self.timesteps.iter().enumerate() {
            for op in step.ops.iter().filter(|o| !o.is_noise()) {
                for q in op.qubits() {
                    let q = q as usize;
                    if q >= self.num_qubits {
                        return Err(Error::Dimension { expected: self.num_qubits, got: q + 1 });
                    }
                    if used[q] == t {
                        return Err(Error::ScheduleConflict { qubit: q, slot: t });
                    }
                    used[q] = t;
                }
            }
            for op in &step.ops {
                let total = op.total_probability();
                if !(0.0..=1.0).contains(&total) {
                    return Err(Error::Parameter(format!("noise channel with total probability {total}")));
                }
                if let Op::RecordFlip { record, .. } = op {
                    if *record as usize >= n_meas {
                        return Err(Error::Dimension { expected: n_meas, got: *record as usize + 1 });
                    }
                }
            }
        }
        for rec in self.detectors.iter().chain(&self.observables).flatten() {
            if *rec as usize >= n_meas {
                return Err(Error::Dimension { expected: n_meas, got: *rec as usize + 1 });
            }
        }
        Ok(())
    }

    /// Human-readable listing; grammar documented in `docs/formats.md`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "qubits {}", self.num_qubits).unwrap();
        for step in &self.timesteps {
            writeln!(s, "{}", if step.noiseless { "tick noiseless" } else { "tick" }).unwrap();
            for op in &step.ops {
                writeln!(s, "  {op}").unwrap();
            }
        }
        for (i, (d, c)) in self.detectors.iter().zip(&self.detector_coords).enumerate() {
            write!(s, "detector D{i} ({},{},{})", c.0, c.1, c.2).unwrap();
            for r in d {
                write!(s, " m{r}").unwrap();
            }
            s.push('\n');
        }
        for (i, o) in self.observables.iter().enumerate() {
            write!(s, "observable L{i}").unwrap();
            for r in o {
                write!(s, " m{r}").unwrap();
            }
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::PrepX(q) => write!(f, "PREP_X {q}"),
            Op::PrepZ(q) => write!(f, "PREP_Z {q}"),
            Op::MeasX(q) => write!(f, "MEAS_X {q}"),
            Op::MeasZ(q) => write!(f, "MEAS_Z {q}"),
            Op::MeasResetX(q) => write!(f, "MEAS_RESET_X {q}"),
            Op::MeasResetZ(q) => write!(f, "MEAS_RESET_Z {q}"),
            Op::Cx(a, b) => write!(f, "CX {a} {b}"),
            Op::Cy(a, b) => write!(f, "CY {a} {b}"),
            Op::Cz(a, b) => write!(f, "CZ {a} {b}"),
            Op::Idle(q) => write!(f, "IDLE {q}"),
            Op::Pauli1 { q, px, py, pz } => write!(f, "PAULI1({px},{py},{pz}) {q}"),
            Op::Pauli2 { a, b, probs } => {
                let ps: Vec<String> = probs.iter().map(|p| p.to_string()).collect();
                write!(f, "PAULI2({}) {a} {b}", ps.join(","))
            }
            Op::RecordFlip { record, p } => write!(f, "FLIP({p}) m{record}"),
        }
    }
}

/// Biased circuit-level noise: strength `p` and bias `eta >= 1` (may be infinite).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p: f64,
    pub eta: f64,
}

impl NoiseModel {
    pub fn new(p: f64, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(Error::Parameter(format!("p must lie in [0,1], got {p}")));
        }
        if eta.is_nan() || eta < 1.0 {
            return Err(Error::Parameter(format!("eta must be >= 1, got {eta}")));
        }
        Ok(Self { p, eta })
    }

    /// Model whose two-qubit channel has total probability `p_cx`.
    pub fn from_cnot_infidelity(p_cx: f64, eta: f64) -> Result<Self> {
        let unit = cnot_infidelity(1.0, eta)?;
        Self::new(p_cx / unit, eta)
    }

    pub fn p_cx(&self) -> f64 {
        cnot_infidelity(self.p, self.eta).expect("validated model")
    }

    fn low(&self, denom: f64) -> f64 {
        if self.eta.is_infinite() {
            0.0
        } else {
            self.p / (denom * self.eta)
        }
    }

    /// Two-qubit channel: ZZ, ZI, IZ at p/15, the other twelve at p/(15 eta).
    pub fn two_qubit_probs(&self) -> [f64; 15] {
        let mut probs = [self.low(15.0); 15];
        for k in [3usize, 12, 15] {
            probs[k - 1] = self.p / 15.0;
        }
        probs
    }

    /// `(px, py, pz)` for single-qubit gates and idles.
    pub fn single_qubit_probs(&self) -> (f64, f64, f64) {
        (self.low(3.0), self.low(3.0), self.p / 3.0)
    }

    /// Flip probability of X-basis preparation or measurement.
    pub fn x_basis_flip(&self) -> f64 {
        2.0 * self.p / 3.0
    }

    /// Flip probability of Z-basis preparation or measurement.
    pub fn z_basis_flip(&self) -> f64 {
        2.0 * self.low(3.0)
    }
}

/// Total two-qubit channel probability `(1/5 + 4/(5 eta)) p`.
pub fn cnot_infidelity(p: f64, eta: f64) -> Result<f64> {
    let m = NoiseModel::new(p, eta)?;
    let tail = if m.eta.is_infinite() { 0.0 } else { 4.0 / (5.0 * m.eta) };
    Ok((0.2 + tail) * m.p)
}

/// Returns a copy of `circuit` with channels placed after every instruction of
/// every non-noiseless timestep. Existing noise ops are discarded.
pub fn attach_noise(circuit: &Circuit, model: &NoiseModel) -> Circuit {
    let mut out = circuit.clone();
    let mut record = 0u32;
    let (px, py, pz) = model.single_qubit_probs();
    let two = model.two_qubit_probs();
    let (fx, fz) = (model.x_basis_flip(), model.z_basis_flip());
    for step in out.timesteps.iter_mut() {
        step.ops.retain(|o| !o.is_noise());
        let mut noise = Vec::new();
        for op in &step.ops {
            let rec = record;
            if op.is_measurement() {
                record += 1;
            }
            if step.noiseless {
                continue;
            }
            match *op {
                Op::PrepX(q) => noise.push(Op::Pauli1 { q, px: 0.0, py: 0.0, pz: fx }),
                Op::PrepZ(q) => noise.push(Op::Pauli1 { q, px: fz, py: 0.0, pz: 0.0 }),
                Op::MeasX(_) => noise.push(Op::RecordFlip { record: rec, p: fx }),
                Op::MeasZ(_) => noise.push(Op::RecordFlip { record: rec, p: fz }),
                Op::MeasResetX(q) => {
                    noise.push(Op::RecordFlip { record: rec, p: fx });
                    noise.push(Op::Pauli1 { q, px: 0.0, py: 0.0, pz: fx });
                }
                Op::MeasResetZ(q) => {
                    noise.push(Op::RecordFlip { record: rec, p: fz });
                    noise.push(Op::Pauli1 { q, px: fz, py: 0.0, pz: 0.0 });
                }
                Op::Cx(a, b) | Op::Cy(a, b) | Op::Cz(a, b) => noise.push(Op::Pauli2 { a, b, probs: two }),
                Op::Idle(q) => noise.push(Op::Pauli1 { q, px, py, pz }),
                _ => {}
            }
        }
        noise.retain(|o| o.total_probability() > 0.0);
        step.ops.extend(noise);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MemoryBasis {
    X,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spam {
    /// Noiseless preparation, readout and one noiseless syndrome round on each side.
    Perfect,
    Noisy,
}

struct Builder {
    num_qubits: usize,
    timesteps: Vec<Timestep>,
    records: u32,
}

impl Builder {
    fn tick(&mut self, ops: Vec<Op>, noiseless: bool) -> Vec<u32> {
        let mut touched = vec![false; self.num_qubits];
        let mut recs = Vec::new();
        for op in &ops {
            for q in op.qubits() {
                touched[q as usize] = true;
            }
            if op.is_measurement() {
                recs.push(self.records);
                self.records += 1;
            }
        }
        let mut ops = ops;
        ops.extend((0..self.num_qubits).filter(|&q| !touched[q]).map(|q| Op::Idle(q as u32)));
        self.timesteps.push(Timestep { ops, noiseless });
        recs
    }
}

/// Memory experiment: prepare data in the eigenbasis of the chosen logical,
/// run `rounds` noisy syndrome cycles, measure the data transversally.
///
/// Detectors compare each stabilizer's outcome with its previous round. With
/// `Spam::Noisy` the first round is anchored against the preparation for
/// stabilizers that are deterministic on the initial product state, and the
/// final round is compared with the stabilizer value reconstructed from the
/// data measurement. With `Spam::Perfect` a noiseless round precedes and
/// follows the noisy ones and only round-to-round comparisons are used.
pub fn build_memory_experiment(layout: &SurfaceCodeLayout, rounds: usize, basis: MemoryBasis, spam: Spam) -> Result<Circuit> {
    if rounds == 0 {
        return Err(Error::Parameter("rounds must be >= 1".into()));
    }
    if layout.family != CodeFamily::Css && basis == MemoryBasis::Z {
        return Err(Error::Parameter("XY-family memory experiments use the X basis".into()));
    }
    let plan = schedule(layout)?;
    let n = layout.num_data();
    let nq = layout.num_qubits();
    let base = match basis {
        MemoryBasis::X => Pauli::X,
        MemoryBasis::Z => Pauli::Z,
    };
    // Per-data-qubit preparation / readout letter.
    let data_basis: Vec<Pauli> = (0..n).map(|q| layout.deformation.tags[q].conjugate(base).0).collect();
    let logical = match basis {
        MemoryBasis::X => layout.logical_x(),
        MemoryBasis::Z => layout.logical_z(),
    };
    for (q, letter) in logical.support() {
        if letter != data_basis[q] {
            return Err(Error::InvalidCode(format!("logical letter {letter:?} on qubit {q} does not match readout basis")));
        }
    }
    let deterministic: Vec<bool> =
        layout.stabilizers.iter().map(|s| s.support.iter().all(|d| d.pauli == data_basis[d.data])).collect();

    let mut b = Builder { num_qubits: nq, timesteps: Vec::new(), records: 0 };
    let perfect = spam == Spam::Perfect;
    let prep_data = |q: usize| if data_basis[q] == Pauli::X { Op::PrepX(q as u32) } else { Op::PrepZ(q as u32) };
    let mut prep: Vec<Op> = (0..n).map(prep_data).collect();
    for s in &layout.stabilizers {
        let a = s.ancilla as u32;
        prep.push(if s.ancilla_basis() == Pauli::Z { Op::PrepZ(a) } else { Op::PrepX(a) });
    }
    b.tick(prep, perfect);

    let total_rounds = if perfect { rounds + 2 } else { rounds };
    let mut round_records: Vec<Vec<u32>> = Vec::with_capacity(total_rounds);
    for round in 0..total_rounds {
        let noiseless = perfect && (round == 0 || round == total_rounds - 1);
        for slot in &plan.slots {
            let ops = slot
                .iter()
                .map(|g| {
                    let kind = layout.stabilizers[g.stabilizer].kind;
                    let (a, d) = (g.ancilla as u32, g.data as u32);
                    if kind == StabilizerKind::Z {
                        Op::Cx(d, a)
                    } else {
                        match g.pauli {
                            Pauli::X => Op::Cx(a, d),
                            Pauli::Y => Op::Cy(a, d),
                            _ => Op::Cz(a, d),
                        }
                    }
                })
                .collect();
            b.tick(ops, noiseless);
        }
        // Before a perfect closing round the ancillas are re-prepared in a
        // noiseless step, so reset noise cannot mimic a readout error there.
        let reprepare = perfect && round + 2 == total_rounds;
        let last = round == total_rounds - 1 || reprepare;
        let meas = layout
            .stabilizers
            .iter()
            .map(|s| {
                let a = s.ancilla as u32;
                match (s.ancilla_basis() == Pauli::Z, last) {
                    (true, true) => Op::MeasZ(a),
                    (true, false) => Op::MeasResetZ(a),
                    (false, true) => Op::MeasX(a),
                    (false, false) => Op::MeasResetX(a),
                }
            })
            .collect();
        round_records.push(b.tick(meas, noiseless));
        if reprepare {
            let preps = layout
                .stabilizers
                .iter()
                .map(|s| if s.ancilla_basis() == Pauli::Z { Op::PrepZ(s.ancilla as u32) } else { Op::PrepX(s.ancilla as u32) })
                .collect();
            b.tick(preps, true);
        }
    }
    let data_meas: Vec<Op> =
        (0..n).map(|q| if data_basis[q] == Pauli::X { Op::MeasX(q as u32) } else { Op::MeasZ(q as u32) }).collect();
    let data_records = b.tick(data_meas, perfect);

    let mut detectors = Vec::new();
    let mut coords = Vec::new();
    for (round, recs) in round_records.iter().enumerate() {
        for (si, s) in layout.stabilizers.iter().enumerate() {
            let c = (s.coord.0, s.coord.1, round as u32);
            if round == 0 {
                if !perfect && deterministic[si] {
                    detectors.push(vec![recs[si]]);
                    coords.push(c);
                }
            } else {
                detectors.push(vec![round_records[round - 1][si], recs[si]]);
                coords.push(c);
            }
        }
    }
    if !perfect {
        let last = round_records.last().expect("at least one round");
        for (si, s) in layout.stabilizers.iter().enumerate() {
            if deterministic[si] {
                let mut d: Vec<u32> = s.support.iter().map(|q| data_records[q.data]).collect();
                d.push(last[si]);
                d.sort_unstable();
                detectors.push(d);
                coords.push((s.coord.0, s.coord.1, total_rounds as u32));
            }
        }
    }
    let observable: Vec<u32> = logical.support().map(|(q, _)| data_records[q]).collect();
    let circuit = Circuit { num_qubits: nq, timesteps: b.timesteps, detectors, detector_coords: coords, observables: vec![observable] };
    circuit.validate()?;
    Ok(circuit)
}
