//! Frame sampling against an exact density-matrix simulation on 3 qubits.

use std::collections::HashMap;

use bm_core::circuit::{pauli_from_code, Circuit, Op, Timestep};
use bm_core::pauli::Pauli;
use bm_core::sampler::sample;

type C = (f64, f64);
const DIM: usize = 8;

fn mul(a: C, b: C) -> C {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

type Mat = Vec<C>;

fn zero() -> Mat {
    vec![(0.0, 0.0); DIM * DIM]
}

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let mut out = zero();
    for i in 0..DIM {
        for k in 0..DIM {
            let x = a[i * DIM + k];
            if x == (0.0, 0.0) {
                continue;
            }
            for j in 0..DIM {
                let y = mul(x, b[k * DIM + j]);
                out[i * DIM + j].0 += y.0;
                out[i * DIM + j].1 += y.1;
            }
        }
    }
    out
}

fn dagger(a: &Mat) -> Mat {
    let mut out = zero();
    for i in 0..DIM {
        for j in 0..DIM {
            let x = a[j * DIM + i];
            out[i * DIM + j] = (x.0, -x.1);
        }
    }
    out
}

fn conj(u: &Mat, rho: &Mat) -> Mat {
    matmul(&matmul(u, rho), &dagger(u))
}

fn add_scaled(acc: &mut Mat, m: &Mat, s: f64) {
    for (a, b) in acc.iter_mut().zip(m) {
        a.0 += s * b.0;
        a.1 += s * b.1;
    }
}

fn trace(m: &Mat) -> f64 {
    (0..DIM).map(|i| m[i * DIM + i].0).sum()
}

/// Operator on the full space from its action on basis states.
fn from_action(f: impl Fn(usize) -> Vec<(usize, C)>) -> Mat {
    let mut m = zero();
    for col in 0..DIM {
        for (row, amp) in f(col) {
            m[row * DIM + col].0 += amp.0;
            m[row * DIM + col].1 += amp.1;
        }
    }
    m
}

fn pauli(q: usize, p: Pauli) -> Mat {
    from_action(|b| {
        let bit = b >> q & 1;
        let flipped = b ^ (1 << q);
        match p {
            Pauli::I => vec![(b, (1.0, 0.0))],
            Pauli::X => vec![(flipped, (1.0, 0.0))],
            Pauli::Z => vec![(b, (if bit == 0 { 1.0 } else { -1.0 }, 0.0))],
            // Y|0> = i|1>, Y|1> = -i|0>
            Pauli::Y => vec![(flipped, (0.0, if bit == 0 { 1.0 } else { -1.0 }))],
        }
    })
}

fn controlled(c: usize, t: usize, p: Pauli) -> Mat {
    let pm = pauli(t, p);
    from_action(|b| {
        if b >> c & 1 == 0 {
            vec![(b, (1.0, 0.0))]
        } else {
            (0..DIM).filter(|&r| pm[r * DIM + b] != (0.0, 0.0)).map(|r| (r, pm[r * DIM + b])).collect()
        }
    })
}

/// Projector onto outcome `bit` of measuring `basis` on qubit `q`.
fn projector(q: usize, basis: Pauli, bit: usize) -> Mat {
    let p = pauli(q, basis);
    let id = pauli(q, Pauli::I);
    let s = if bit == 0 { 0.5 } else { -0.5 };
    let mut out = zero();
    add_scaled(&mut out, &id, 0.5);
    add_scaled(&mut out, &p, s);
    out
}

/// Record history -> unnormalised density matrix.
type State = HashMap<Vec<u8>, Mat>;

fn apply_all(state: &State, f: impl Fn(&Mat) -> Mat) -> State {
    state.iter().map(|(k, v)| (k.clone(), f(v))).collect()
}

fn measure(state: &State, q: usize, basis: Pauli, reset: bool) -> State {
    let mut out = State::new();
    let fix = pauli(q, if basis == Pauli::Z { Pauli::X } else { Pauli::Z });
    for (k, rho) in state {
        for bit in 0..2 {
            let pr = projector(q, basis, bit);
            let mut r = conj(&pr, rho);
            if reset && bit == 1 {
                r = conj(&fix, &r);
            }
            if trace(&r) > 1e-15 {
                let mut key = k.clone();
                key.push(bit as u8);
                out.insert(key, r);
            }
        }
    }
    out
}

fn prepare(state: &State, q: usize, basis: Pauli) -> State {
    let fix = pauli(q, if basis == Pauli::Z { Pauli::X } else { Pauli::Z });
    apply_all(state, |rho| {
        let mut out = conj(&projector(q, basis, 0), rho);
        let flipped = conj(&fix, &conj(&projector(q, basis, 1), rho));
        add_scaled(&mut out, &flipped, 1.0);
        out
    })
}

fn pauli_channel(state: &State, terms: &[(f64, Mat)]) -> State {
    apply_all(state, |rho| {
        let total: f64 = terms.iter().map(|t| t.0).sum();
        let mut out = zero();
        add_scaled(&mut out, rho, 1.0 - total);
        for (p, m) in terms {
            add_scaled(&mut out, &conj(m, rho), *p);
        }
        out
    })
}

/// Probability that each detector/observable parity differs from its noiseless value.
fn exact_flip_rates(c: &Circuit) -> Vec<f64> {
    let mut rho = zero();
    rho[0] = (1.0, 0.0);
    let mut state: State = HashMap::from([(Vec::new(), rho)]);
    for step in &c.timesteps {
        for op in &step.ops {
            state = match *op {
                Op::PrepX(q) => prepare(&state, q as usize, Pauli::X),
                Op::PrepZ(q) => prepare(&state, q as usize, Pauli::Z),
                Op::MeasX(q) => measure(&state, q as usize, Pauli::X, false),
                Op::MeasZ(q) => measure(&state, q as usize, Pauli::Z, false),
                Op::MeasResetX(q) => measure(&state, q as usize, Pauli::X, true),
                Op::MeasResetZ(q) => measure(&state, q as usize, Pauli::Z, true),
                Op::Cx(a, b) => apply_all(&state, |r| conj(&controlled(a as usize, b as usize, Pauli::X), r)),
                Op::Cy(a, b) => apply_all(&state, |r| conj(&controlled(a as usize, b as usize, Pauli::Y), r)),
                Op::Cz(a, b) => apply_all(&state, |r| conj(&controlled(a as usize, b as usize, Pauli::Z), r)),
                Op::Idle(_) => state,
                Op::Pauli1 { q, px, py, pz } => {
                    let q = q as usize;
                    pauli_channel(&state, &[(px, pauli(q, Pauli::X)), (py, pauli(q, Pauli::Y)), (pz, pauli(q, Pauli::Z))])
                }
                Op::Pauli2 { a, b, probs } => {
                    let terms: Vec<(f64, Mat)> = (1..16)
                        .map(|k| (probs[k - 1], matmul(&pauli(a as usize, pauli_from_code(k >> 2)), &pauli(b as usize, pauli_from_code(k & 3)))))
                        .collect();
                    pauli_channel(&state, &terms)
                }
                Op::RecordFlip { record, p } => {
                    let mut out = State::new();
                    for (k, rho) in &state {
                        let mut flipped = k.clone();
                        flipped[record as usize] ^= 1;
                        for (key, w) in [(k.clone(), 1.0 - p), (flipped, p)] {
                            let e = out.entry(key).or_insert_with(zero);
                            add_scaled(e, rho, w);
                        }
                    }
                    out
                }
            };
        }
    }
    let sets: Vec<&Vec<u32>> = c.detectors.iter().chain(&c.observables).collect();
    sets.iter()
        .map(|set| {
            let mut p1 = 0.0;
            for (k, rho) in &state {
                let parity = set.iter().fold(0u8, |a, &r| a ^ k[r as usize]);
                if parity == 1 {
                    p1 += trace(rho);
                }
            }
            p1
        })
        .collect()
}

fn strip_noise(c: &Circuit) -> Circuit {
    let mut out = c.clone();
    for s in out.timesteps.iter_mut() {
        s.ops.retain(|o| !o.is_noise());
    }
    out
}

fn toy_circuit(p: f64) -> Circuit {
    let two: [f64; 15] = std::array::from_fn(|k| p * (1.0 + k as f64) / 40.0);
    let one = |q| Op::Pauli1 { q, px: p, py: p / 2.0, pz: 2.0 * p };
    let steps = vec![
        vec![Op::PrepZ(0), Op::PrepZ(1), Op::PrepX(2), Op::Pauli1 { q: 2, px: 0.0, py: 0.0, pz: p }],
        vec![Op::Cy(2, 0), Op::Idle(1), Op::Pauli2 { a: 2, b: 0, probs: two }, one(1)],
        vec![Op::Cy(2, 1), Op::Idle(0), Op::Pauli2 { a: 2, b: 1, probs: two }, one(0)],
        vec![Op::MeasResetX(2), Op::Idle(0), Op::Idle(1), Op::RecordFlip { record: 0, p }, one(0), one(1), one(2)],
        vec![Op::Cy(2, 0), Op::Idle(1), Op::Pauli2 { a: 2, b: 0, probs: two }],
        vec![Op::Cy(2, 1), Op::Idle(0), Op::Pauli2 { a: 1, b: 2, probs: two }],
        vec![Op::MeasResetX(2), Op::Idle(0), Op::Idle(1), Op::RecordFlip { record: 1, p }, one(2)],
        vec![Op::Cz(2, 0), Op::Idle(1), Op::Pauli2 { a: 0, b: 2, probs: two }],
        vec![Op::Cz(2, 1), Op::Idle(0), Op::Pauli2 { a: 2, b: 1, probs: two }],
        vec![Op::MeasX(2), Op::Cx(1, 0), Op::Pauli2 { a: 1, b: 0, probs: two }],
        vec![Op::MeasZ(0), Op::MeasZ(1), Op::RecordFlip { record: 3, p: 2.0 * p }],
    ];
    // Two Y0Y1 rounds via CY, one Z0Z1 round via CZ, then Z0Z1 read out through CX.
    Circuit {
        num_qubits: 3,
        timesteps: steps.into_iter().map(|ops| Timestep { ops, noiseless: false }).collect(),
        detectors: vec![vec![0, 1], vec![2, 3]],
        detector_coords: vec![(0, 0, 0); 2],
        observables: vec![vec![3]],
    }
}

#[test]
fn toy_circuit_is_deterministic_without_noise() {
    let c = strip_noise(&toy_circuit(0.0));
    let rates = exact_flip_rates(&c);
    for r in rates {
        assert!(r < 1e-12 || r > 1.0 - 1e-12, "{r}");
    }
}

#[test]
fn frame_sampler_matches_exact_simulation() {
    let noisy = toy_circuit(0.03);
    let clean = strip_noise(&noisy);
    let reference = exact_flip_rates(&clean);
    let raw = exact_flip_rates(&noisy);
    let shots = 400_000;
    let batch = sample(&noisy, shots, 2024);
    let d = noisy.detectors.len();
    for (i, (&r0, &r)) in reference.iter().zip(&raw).enumerate() {
        let expected = if r0 > 0.5 { 1.0 - r } else { r };
        let bits = if i < d { &batch.detector_bits } else { &batch.observable_bits };
        let idx = if i < d { i } else { i - d };
        let f = bits.iter().filter(|v| v.get(idx)).count() as f64 / shots as f64;
        let sigma = (expected * (1.0 - expected) / shots as f64).sqrt();
        assert!((f - expected).abs() < 5.0 * sigma, "parity {i}: sampled {f}, exact {expected}");
        assert!(expected > 0.01);
    }
}
