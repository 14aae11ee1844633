//! Pauli-frame simulation, 64 shots per machine word.
//!
//! Each lane of a `u64` is one shot. Measurement records store the flip of the
//! outcome relative to the noiseless reference run. After a measurement or
//! preparation the component of the frame that acts trivially on the resulting
//! eigenstate is randomised, so non-deterministic outcomes come out random.

use std::io::{self, Write};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{pauli_code, pauli_from_code, Circuit, Op};
use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::pauli::Pauli;

/// Frame state for 64 parallel lanes.
pub(crate) struct Frame {
    pub x: Vec<u64>,
    pub z: Vec<u64>,
    pub records: Vec<u64>,
}

impl Frame {
    pub fn new(num_qubits: usize, num_records: usize) -> Self {
        Self { x: vec![0; num_qubits], z: vec![0; num_qubits], records: Vec::with_capacity(num_records) }
    }

    /// Applies a non-noise op. `gauge` supplies random words for randomisation;
    /// `None` leaves the frame components untouched (used for fault propagation).
    pub fn apply_gate(&mut self, op: &Op, gauge: &mut Option<&mut ChaCha8Rng>) {
        let random = |g: &mut Option<&mut ChaCha8Rng>| g.as_mut().map_or(0, |r| r.next_u64());
        match *op {
            Op::PrepX(q) => {
                let q = q as usize;
                self.z[q] = 0;
                self.x[q] = random(gauge);
            }
            Op::PrepZ(q) => {
                let q = q as usize;
                self.x[q] = 0;
                self.z[q] = random(gauge);
            }
            Op::MeasX(q) => {
                let q = q as usize;
                self.records.push(self.z[q]);
                self.x[q] ^= random(gauge);
            }
            Op::MeasZ(q) => {
                let q = q as usize;
                self.records.push(self.x[q]);
                self.z[q] ^= random(gauge);
            }
            Op::MeasResetX(q) => {
                let q = q as usize;
                self.records.push(self.z[q]);
                self.z[q] = 0;
                self.x[q] = random(gauge);
            }
            Op::MeasResetZ(q) => {
                let q = q as usize;
                self.records.push(self.x[q]);
                self.x[q] = 0;
                self.z[q] = random(gauge);
            }
            Op::Cx(c, t) => {
                let (c, t) = (c as usize, t as usize);
                self.x[t] ^= self.x[c];
                self.z[c] ^= self.z[t];
            }
            Op::Cz(a, b) => {
                let (a, b) = (a as usize, b as usize);
                self.z[a] ^= self.x[b];
                self.z[b] ^= self.x[a];
            }
            Op::Cy(c, t) => {
                let (c, t) = (c as usize, t as usize);
                self.z[c] ^= self.x[t] ^ self.z[t];
                self.x[t] ^= self.x[c];
                self.z[t] ^= self.x[c];
            }
            Op::Idle(_) | Op::Pauli1 { .. } | Op::Pauli2 { .. } | Op::RecordFlip { .. } => {}
        }
    }

    /// XORs the letter `p` onto qubit `q` in the lanes of `mask`.
    pub fn apply_pauli(&mut self, q: usize, p: Pauli, mask: u64) {
        let (x, z) = p.bits();
        if x {
            self.x[q] ^= mask;
        }
        if z {
            self.z[q] ^= mask;
        }
    }

    pub fn parities(&self, sets: &[Vec<u32>]) -> Vec<u64> {
        sets.iter().map(|s| s.iter().fold(0u64, |acc, &r| acc ^ self.records[r as usize])).collect()
    }
}

/// Lane indices (< `lanes`) hit by a Bernoulli(p) process, via geometric skips.
fn bernoulli_lanes(rng: &mut ChaCha8Rng, p: f64, lanes: u32) -> u64 {
    if p <= 0.0 {
        return 0;
    }
    let full = if lanes == 64 { u64::MAX } else { (1u64 << lanes) - 1 };
    if p >= 1.0 {
        return full;
    }
    let log_q = (-p).ln_1p();
    let mut mask = 0u64;
    let mut pos: f64 = 0.0;
    loop {
        let u: f64 = 1.0 - rng.gen::<f64>();
        pos += (u.ln() / log_q).floor();
        if pos >= lanes as f64 {
            return mask;
        }
        mask |= 1u64 << (pos as u32);
        pos += 1.0;
    }
}

/// Picks an outcome index from `probs` conditioned on some outcome occurring.
fn categorical(rng: &mut ChaCha8Rng, probs: &[f64], total: f64) -> usize {
    let mut u = rng.gen::<f64>() * total;
    for (i, &p) in probs.iter().enumerate() {
        if u < p {
            return i;
        }
        u -= p;
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Sampled detector and observable bits, row-packed per shot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotBatch {
    pub shots: usize,
    pub num_detectors: usize,
    pub num_observables: usize,
    pub rng_seed: u64,
    pub detector_bits: Vec<BitVec>,
    pub observable_bits: Vec<BitVec>,
}

impl ShotBatch {
    pub fn syndrome(&self, shot: usize) -> &BitVec {
        &self.detector_bits[shot]
    }

    pub fn observables(&self, shot: usize) -> &BitVec {
        &self.observable_bits[shot]
    }

    /// Row-packed binary: per shot, detectors then observables, each bit
    /// little-endian within bytes, rows padded to whole bytes.
    pub fn write_b8<W: Write>(&self, mut w: W) -> io::Result<()> {
        let width = self.num_detectors + self.num_observables;
        let mut row = vec![0u8; width.div_ceil(8)];
        for s in 0..self.shots {
            row.iter_mut().for_each(|b| *b = 0);
            let bits = self.detector_bits[s].iter_ones().chain(self.observable_bits[s].iter_ones().map(|i| i + self.num_detectors));
            for i in bits {
                row[i / 8] |= 1 << (i % 8);
            }
            w.write_all(&row)?;
        }
        Ok(())
    }

    pub fn read_b8(data: &[u8], shots: usize, num_detectors: usize, num_observables: usize) -> Result<Self> {
        let width = num_detectors + num_observables;
        let stride = width.div_ceil(8);
        if data.len() != stride * shots {
            return Err(Error::Dimension { expected: stride * shots, got: data.len() });
        }
        let mut out = ShotBatch { shots, num_detectors, num_observables, rng_seed: 0, detector_bits: Vec::new(), observable_bits: Vec::new() };
        for row in data.chunks(stride) {
            let bit = |i: usize| row[i / 8] >> (i % 8) & 1 == 1;
            out.detector_bits.push(BitVec::from_indices(num_detectors, (0..num_detectors).filter(|&i| bit(i))));
            out.observable_bits
                .push(BitVec::from_indices(num_observables, (0..num_observables).filter(|&i| bit(num_detectors + i))));
        }
        Ok(out)
    }

    /// CSV with header `shot,D0,...,L0,...`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut header = vec!["shot".to_string()];
        header.extend((0..self.num_detectors).map(|i| format!("D{i}")));
        header.extend((0..self.num_observables).map(|i| format!("L{i}")));
        writeln!(w, "{}", header.join(","))?;
        for s in 0..self.shots {
            let mut line = s.to_string();
            for b in self.detector_bits[s].to_bools().into_iter().chain(self.observable_bits[s].to_bools()) {
                line.push_str(if b { ",1" } else { ",0" });
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Simulates one block of up to 64 shots. Block `i` of seed `s` always draws
/// from ChaCha8 stream `i` of key `s`, so any block range is reproducible.
pub fn sample_block(circuit: &Circuit, seed: u64, block: u64, lanes: u32) -> (Vec<u64>, Vec<u64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    let lanes = lanes.min(64);
    let lane_mask = if lanes == 64 { u64::MAX } else { (1u64 << lanes) - 1 };
    let mut frame = Frame::new(circuit.num_qubits, circuit.num_measurements());
    for step in &circuit.timesteps {
        for op in &step.ops {
            match *op {
                Op::Pauli1 { q, px, py, pz } => {
                    let total = px + py + pz;
                    let mut hits = bernoulli_lanes(&mut rng, total, lanes);
                    while hits != 0 {
                        let lane = hits.trailing_zeros();
                        hits &= hits - 1;
                        let letter = [Pauli::X, Pauli::Y, Pauli::Z][categorical(&mut rng, &[px, py, pz], total)];
                        frame.apply_pauli(q as usize, letter, 1u64 << lane);
                    }
                }
                Op::Pauli2 { a, b, ref probs } => {
                    let total: f64 = probs.iter().sum();
                    let mut hits = bernoulli_lanes(&mut rng, total, lanes);
                    while hits != 0 {
                        let lane = hits.trailing_zeros();
                        hits &= hits - 1;
                        let k = categorical(&mut rng, probs, total) + 1;
                        frame.apply_pauli(a as usize, pauli_from_code(k >> 2), 1u64 << lane);
                        frame.apply_pauli(b as usize, pauli_from_code(k & 3), 1u64 << lane);
                    }
                }
                Op::RecordFlip { record, p } => {
                    let hits = bernoulli_lanes(&mut rng, p, lanes);
                    frame.records[record as usize] ^= hits;
                }
                _ => frame.apply_gate(op, &mut Some(&mut rng)),
            }
        }
    }
    let dets = frame.parities(&circuit.detectors).into_iter().map(|w| w & lane_mask).collect();
    let obs = frame.parities(&circuit.observables).into_iter().map(|w| w & lane_mask).collect();
    (dets, obs)
}

fn transpose_into(words: &[u64], lanes: u32, width: usize, rows: &mut Vec<BitVec>) {
    let start = rows.len();
    rows.extend((0..lanes).map(|_| BitVec::zeros(width)));
    for (i, &w) in words.iter().enumerate() {
        let mut w = w;
        while w != 0 {
            let lane = w.trailing_zeros() as usize;
            w &= w - 1;
            rows[start + lane].set(i, true);
        }
    }
}

/// Samples `shots` shots. Shot `k` is lane `k % 64` of block `k / 64`.
pub fn sample(circuit: &Circuit, shots: usize, seed: u64) -> ShotBatch {
    sample_blocks(circuit, shots, seed, 0)
}

/// Samples `shots` shots starting at block `first_block`; lets callers split
/// a run across workers without changing the stream assignment.
pub fn sample_blocks(circuit: &Circuit, shots: usize, seed: u64, first_block: u64) -> ShotBatch {
    let mut batch = ShotBatch {
        shots,
        num_detectors: circuit.num_detectors(),
        num_observables: circuit.num_observables(),
        rng_seed: seed,
        detector_bits: Vec::with_capacity(shots),
        observable_bits: Vec::with_capacity(shots),
    };
    let mut remaining = shots;
    let mut block = first_block;
    while remaining > 0 {
        let lanes = remaining.min(64) as u32;
        let (d, o) = sample_block(circuit, seed, block, lanes);
        transpose_into(&d, lanes, batch.num_detectors, &mut batch.detector_bits);
        transpose_into(&o, lanes, batch.num_observables, &mut batch.observable_bits);
        remaining -= lanes as usize;
        block += 1;
    }
    batch
}

/// Detector and observable bits produced by a single explicit fault.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaultEffect {
    pub detectors: Vec<u32>,
    pub observables: Vec<u32>,
}

/// Effect of one outcome of one noise site on the otherwise noiseless circuit.
/// `outcome` is 0-based: for single-qubit sites 0/1/2 = X/Y/Z; for two-qubit
/// sites `k - 1` in the channel encoding; record flips take 0.
pub fn inject_fault(circuit: &Circuit, site: usize, outcome: usize) -> Result<FaultEffect> {
    let sites = circuit.noise_sites();
    let &(t0, i0) = sites.get(site).ok_or(Error::Dimension { expected: sites.len(), got: site + 1 })?;
    let mut frame = Frame::new(circuit.num_qubits, circuit.num_measurements());
    let mut none = None;
    for (t, step) in circuit.timesteps.iter().enumerate() {
        for (i, op) in step.ops.iter().enumerate() {
            if !op.is_noise() {
                frame.apply_gate(op, &mut none);
            }
            if (t, i) != (t0, i0) {
                continue;
            }
            match *op {
                Op::Pauli1 { q, .. } if outcome < 3 => frame.apply_pauli(q as usize, [Pauli::X, Pauli::Y, Pauli::Z][outcome], 1),
                Op::Pauli2 { a, b, .. } if outcome < 15 => {
                    let k = outcome + 1;
                    frame.apply_pauli(a as usize, pauli_from_code(k >> 2), 1);
                    frame.apply_pauli(b as usize, pauli_from_code(k & 3), 1);
                }
                Op::RecordFlip { record, .. } if outcome == 0 => frame.records[record as usize] ^= 1,
                _ => return Err(Error::Parameter(format!("outcome {outcome} invalid for site {site}"))),
            }
        }
    }
    let ones = |v: Vec<u64>| v.iter().enumerate().filter(|(_, &w)| w & 1 == 1).map(|(i, _)| i as u32).collect();
    Ok(FaultEffect { detectors: ones(frame.parities(&circuit.detectors)), observables: ones(frame.parities(&circuit.observables)) })
}

/// Encodes a two-qubit outcome for [`inject_fault`].
pub fn two_qubit_outcome(a: Pauli, b: Pauli) -> usize {
    (pauli_code(a) << 2 | pauli_code(b)) - 1
}
