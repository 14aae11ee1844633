//! Detector error models: independent error mechanisms over detectors, their
//! hyperedge decompositions, a text format, and circuit-level distance search.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::{self, Write as _};

use crate::circuit::{pauli_from_code, Circuit, Op};
use crate::error::{Error, Result};
use crate::sampler::Frame;

/// Mechanisms below this probability are dropped.
pub const MIN_PROBABILITY: f64 = 1e-15;
/// Largest supported detector set of one mechanism.
pub const MAX_DETECTORS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecompositionPart {
    pub detectors: Vec<u32>,
    pub observables: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMechanism {
    pub probability: f64,
    pub detectors: Vec<u32>,
    pub observables: Vec<u32>,
    /// Graphlike parts; present for decomposed hyperedges.
    pub decomposition: Option<Vec<DecompositionPart>>,
}

impl ErrorMechanism {
    pub fn is_graphlike(&self) -> bool {
        !self.detectors.is_empty() && self.detectors.len() <= 2
    }

    pub fn observable_mask(&self) -> u64 {
        mask_of(&self.observables)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectorErrorModel {
    pub num_detectors: usize,
    pub num_observables: usize,
    pub mechanisms: Vec<ErrorMechanism>,
}

pub(crate) fn mask_of(obs: &[u32]) -> u64 {
    obs.iter().fold(0u64, |m, &o| m ^ (1u64 << o))
}

pub(crate) fn obs_of(mask: u64) -> Vec<u32> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

fn sym_diff(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Probability that exactly one of two independent events occurs.
pub fn xor_merge(p1: f64, p2: f64) -> f64 {
    p1 * (1.0 - p2) + p2 * (1.0 - p1)
}

/// Detector/observable signature of one fault.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Signature {
    pub detectors: Vec<u32>,
    pub observables: u64,
}

impl Signature {
    fn xor(&self, other: &Signature) -> Signature {
        Signature { detectors: sym_diff(&self.detectors, &other.detectors), observables: self.observables ^ other.observables }
    }
}

/// Every outcome of one noise site with its probability and signature.
#[derive(Debug, Clone)]
pub struct SiteEffects {
    pub site: usize,
    /// `(outcome index, probability, signature)`; outcome indices follow
    /// [`crate::sampler::inject_fault`].
    pub outcomes: Vec<(usize, f64, Signature)>,
}

/// Propagates X and Z basis faults of every noise site through the circuit,
/// 64 at a time, and combines them into per-outcome signatures.
pub fn site_effects(circuit: &Circuit) -> Vec<SiteEffects> {
    let sites = circuit.noise_sites();
    // Basis faults: (site, qubit or record, is_x / is_z / is_flip).
    #[derive(Clone, Copy)]
    enum Basis {
        X(u32),
        Z(u32),
        Flip(u32),
    }
    let mut basis: Vec<(usize, Basis)> = Vec::new();
    let mut first_basis = Vec::with_capacity(sites.len());
    for (s, &(t, i)) in sites.iter().enumerate() {
        first_basis.push(basis.len());
        match circuit.timesteps[t].ops[i] {
            Op::Pauli1 { q, .. } => basis.extend([(s, Basis::X(q)), (s, Basis::Z(q))]),
            Op::Pauli2 { a, b, .. } => basis.extend([(s, Basis::X(a)), (s, Basis::Z(a)), (s, Basis::X(b)), (s, Basis::Z(b))]),
            Op::RecordFlip { record, .. } => basis.push((s, Basis::Flip(record))),
            _ => unreachable!("noise_sites returns noise ops"),
        }
    }
    let mut sigs: Vec<Signature> = vec![Signature::default(); basis.len()];
    for chunk_start in (0..basis.len()).step_by(64) {
        let chunk = &basis[chunk_start..(chunk_start + 64).min(basis.len())];
        // Site index -> list of (lane, basis fault).
        let mut at_site: HashMap<usize, Vec<(u32, Basis)>> = HashMap::new();
        for (lane, &(s, b)) in chunk.iter().enumerate() {
            at_site.entry(s).or_default().push((lane as u32, b));
        }
        let mut frame = Frame::new(circuit.num_qubits, circuit.num_measurements());
        let mut none = None;
        let mut site = 0usize;
        for step in &circuit.timesteps {
            for op in &step.ops {
                if !op.is_noise() {
                    frame.apply_gate(op, &mut none);
                    continue;
                }
                if let Some(faults) = at_site.get(&site) {
                    for &(lane, b) in faults {
                        let m = 1u64 << lane;
                        match b {
                            Basis::X(q) => frame.x[q as usize] ^= m,
                            Basis::Z(q) => frame.z[q as usize] ^= m,
                            Basis::Flip(r) => frame.records[r as usize] ^= m,
                        }
                    }
                }
                site += 1;
            }
        }
        let dets = frame.parities(&circuit.detectors);
        let obs = frame.parities(&circuit.observables);
        for (d, &w) in dets.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let lane = w.trailing_zeros() as usize;
                w &= w - 1;
                sigs[chunk_start + lane].detectors.push(d as u32);
            }
        }
        for (o, &w) in obs.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let lane = w.trailing_zeros() as usize;
                w &= w - 1;
                sigs[chunk_start + lane].observables ^= 1 << o;
            }
        }
    }
    let mut out = Vec::with_capacity(sites.len());
    for (s, &(t, i)) in sites.iter().enumerate() {
        let b0 = first_basis[s];
        let outcomes = match circuit.timesteps[t].ops[i] {
            Op::Pauli1 { px, py, pz, .. } => {
                let (x, z) = (&sigs[b0], &sigs[b0 + 1]);
                vec![(0, px, x.clone()), (1, py, x.xor(z)), (2, pz, z.clone())]
            }
            Op::Pauli2 { ref probs, .. } => (1..16usize)
                .map(|k| {
                    let mut sig = Signature::default();
                    for (letter, offset) in [(pauli_from_code(k >> 2), 0), (pauli_from_code(k & 3), 2)] {
                        let (x, z) = letter.bits();
                        if x {
                            sig = sig.xor(&sigs[b0 + offset]);
                        }
                        if z {
                            sig = sig.xor(&sigs[b0 + offset + 1]);
                        }
                    }
                    (k - 1, probs[k - 1], sig)
                })
                .collect(),
            Op::RecordFlip { p, .. } => vec![(0, p, sigs[b0].clone())],
            _ => unreachable!(),
        };
        out.push(SiteEffects { site: s, outcomes });
    }
    out
}

/// Builds the merged detector error model of a noisy circuit, treating every
/// outcome of every channel as an independent mechanism.
pub fn build_dem(circuit: &Circuit) -> Result<DetectorErrorModel> {
    let mut merged: BTreeMap<(Vec<u32>, u64), f64> = BTreeMap::new();
    for effects in site_effects(circuit) {
        for (_, p, sig) in effects.outcomes {
            if p <= 0.0 {
                continue;
            }
            if sig.detectors.is_empty() {
                if sig.observables != 0 {
                    return Err(Error::UndetectableLogical {
                        site: effects.site,
                        observables: obs_of(sig.observables).into_iter().map(|o| o as usize).collect(),
                    });
                }
                continue;
            }
            if sig.detectors.len() > MAX_DETECTORS {
                return Err(Error::TooManyDetectors { count: sig.detectors.len() });
            }
            let e = merged.entry((sig.detectors, sig.observables)).or_insert(0.0);
            *e = xor_merge(*e, p);
        }
    }
    let mechanisms = merged
        .into_iter()
        .filter(|(_, p)| *p >= MIN_PROBABILITY)
        .map(|((detectors, obs), probability)| ErrorMechanism {
            probability,
            detectors,
            observables: obs_of(obs),
            decomposition: None,
        })
        .collect();
    Ok(DetectorErrorModel { num_detectors: circuit.num_detectors(), num_observables: circuit.num_observables(), mechanisms })
}

/// All ways to split `dets` into `k` nonempty parts of size at most 2, each
/// part sorted, parts sorted, output sorted lexicographically.
fn partitions(dets: &[u32], k: usize) -> Vec<Vec<Vec<u32>>> {
    fn rec(rest: &[u32], k: usize, cur: &mut Vec<Vec<u32>>, out: &mut Vec<Vec<Vec<u32>>>) {
        if rest.is_empty() {
            if cur.len() == k {
                out.push(cur.clone());
            }
            return;
        }
        if cur.len() >= k {
            return;
        }
        // The first remaining element opens a new part, alone or with one partner.
        let first = rest[0];
        cur.push(vec![first]);
        rec(&rest[1..], k, cur, out);
        cur.pop();
        for j in 1..rest.len() {
            let mut remaining = rest[1..].to_vec();
            remaining.remove(j - 1);
            cur.push(vec![first, rest[j]]);
            rec(&remaining, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(dets, k, &mut Vec::new(), &mut out);
    out.sort();
    out
}

impl DetectorErrorModel {
    /// Adds a decomposition to every mechanism with 3 or 4 detectors.
    ///
    /// Parts must be detector sets of existing graphlike mechanisms. Two-part
    /// splits are preferred over three-part ones; within that, a split whose
    /// parts' observable masks already XOR to the mechanism's mask is
    /// preferred; ties go to the lexicographically first split. If no split is
    /// observable-consistent, each part takes the mask of its most probable
    /// graphlike mechanism and the remainder is put on the part holding the
    /// smallest detector.
    pub fn decompose_hyperedges(&self) -> Result<DetectorErrorModel> {
        let mut graphlike: HashMap<&[u32], Vec<(u64, f64)>> = HashMap::new();
        for m in self.mechanisms.iter().filter(|m| m.is_graphlike()) {
            graphlike.entry(&m.detectors).or_default().push((m.observable_mask(), m.probability));
        }
        for masks in graphlike.values_mut() {
            masks.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        }
        let mut out = self.clone();
        for m in out.mechanisms.iter_mut() {
            if m.detectors.len() <= 2 {
                continue;
            }
            let target = m.observable_mask();
            let mut fallback: Option<Vec<(Vec<u32>, u64)>> = None;
            let mut chosen: Option<Vec<(Vec<u32>, u64)>> = None;
            'parts: for k in 2..=3 {
                for split in partitions(&m.detectors, k) {
                    let options: Option<Vec<&Vec<(u64, f64)>>> = split.iter().map(|p| graphlike.get(p.as_slice())).collect();
                    let Some(options) = options else { continue };
                    if fallback.is_none() {
                        fallback = Some(split.iter().zip(&options).map(|(p, o)| (p.clone(), o[0].0)).collect());
                    }
                    // Search mask combinations in order of the sorted options.
                    let mut idx = vec![0usize; k];
                    loop {
                        let x = idx.iter().zip(&options).fold(0u64, |a, (&i, o)| a ^ o[i].0);
                        if x == target {
                            chosen = Some(split.iter().zip(&options).zip(&idx).map(|((p, o), &i)| (p.clone(), o[i].0)).collect());
                            break 'parts;
                        }
                        let mut d = 0;
                        while d < k {
                            idx[d] += 1;
                            if idx[d] < options[d].len() {
                                break;
                            }
                            idx[d] = 0;
                            d += 1;
                        }
                        if d == k {
                            break;
                        }
                    }
                }
                if fallback.is_some() {
                    break;
                }
            }
            let mut parts = match (chosen, fallback) {
                (Some(c), _) => c,
                (None, Some(f)) => f,
                (None, None) => return Err(Error::Decomposition { detectors: m.detectors.clone() }),
            };
            let remainder = parts.iter().fold(target, |a, p| a ^ p.1);
            if remainder != 0 {
                // Parts are sorted, so the first one holds the smallest detector.
                parts[0].1 ^= remainder;
            }
            m.decomposition =
                Some(parts.into_iter().map(|(detectors, mask)| DecompositionPart { detectors, observables: obs_of(mask) }).collect());
        }
        Ok(out)
    }

    /// Canonical text: one `error(p) ...` line per mechanism, in stored order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for m in &self.mechanisms {
            write!(s, "{m}").unwrap();
            s.push('\n');
        }
        s
    }

    /// Parses the text format. Detector and observable counts are the smallest
    /// consistent with the mechanisms unless `detector D<n>` lines are present
    /// (not produced by [`Self::to_text`]; counts may be fixed afterwards).
    pub fn parse(text: &str) -> Result<DetectorErrorModel> {
        let mut dem = DetectorErrorModel::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| Error::Parse { line: lineno + 1, message: message.to_string() };
            let rest = line.strip_prefix("error(").ok_or_else(|| err("expected `error(`"))?;
            let close = rest.find(')').ok_or_else(|| err("missing `)`"))?;
            let probability: f64 = rest[..close].trim().parse().map_err(|_| err("bad probability"))?;
            if !(probability > 0.0 && probability <= 1.0) {
                return Err(err("probability outside (0,1]"));
            }
            let mut parts: Vec<(Vec<u32>, u64)> = vec![(Vec::new(), 0)];
            for tok in rest[close + 1..].split_whitespace() {
                if tok == "^" {
                    parts.push((Vec::new(), 0));
                } else if let Some(d) = tok.strip_prefix('D') {
                    let d: u32 = d.parse().map_err(|_| err(&format!("bad detector token `{tok}`")))?;
                    parts.last_mut().unwrap().0.push(d);
                } else if let Some(o) = tok.strip_prefix('L') {
                    let o: u32 = o.parse().map_err(|_| err(&format!("bad observable token `{tok}`")))?;
                    if o >= 64 {
                        return Err(err("observable index >= 64"));
                    }
                    parts.last_mut().unwrap().1 ^= 1 << o;
                } else {
                    return Err(err(&format!("unexpected token `{tok}`")));
                }
            }
            let mut detectors = Vec::new();
            let mut obs = 0u64;
            for p in parts.iter_mut() {
                p.0.sort_unstable();
                let before = p.0.len();
                p.0.dedup();
                if p.0.len() != before {
                    return Err(err("repeated detector within a part"));
                }
                detectors = sym_diff(&detectors, &p.0);
                obs ^= p.1;
            }
            if detectors.is_empty() {
                return Err(err("mechanism flips no detector"));
            }
            let decomposition = if parts.len() > 1 {
                if parts.iter().any(|p| p.0.is_empty()) {
                    return Err(err("empty decomposition part"));
                }
                Some(parts.into_iter().map(|(d, o)| DecompositionPart { detectors: d, observables: obs_of(o) }).collect())
            } else {
                None
            };
            for &d in &detectors {
                dem.num_detectors = dem.num_detectors.max(d as usize + 1);
            }
            dem.num_observables = dem.num_observables.max(64 - obs.leading_zeros() as usize);
            dem.mechanisms.push(ErrorMechanism { probability, detectors, observables: obs_of(obs), decomposition });
        }
        Ok(dem)
    }

    /// Sorts mechanisms by (detectors, observables).
    pub fn canonicalize(&mut self) {
        self.mechanisms.sort_by(|a, b| (&a.detectors, &a.observables).cmp(&(&b.detectors, &b.observables)));
    }

    /// Smallest number of mechanisms whose combined effect flips an observable
    /// but no detector, searching up to `max_weight`.
    ///
    /// Breadth-first over (active detectors, observable mask) states, always
    /// extending by a mechanism touching the smallest active detector; a state
    /// with more active detectors than the remaining steps can cancel is pruned.
    pub fn circuit_distance(&self, max_weight: usize) -> Option<usize> {
        let mut by_detector: Vec<Vec<usize>> = vec![Vec::new(); self.num_detectors];
        for (i, m) in self.mechanisms.iter().enumerate() {
            for &d in &m.detectors {
                by_detector[d as usize].push(i);
            }
        }
        let max_deg = self.mechanisms.iter().map(|m| m.detectors.len()).max().unwrap_or(0).max(1);
        let mut seen: HashSet<(Vec<u32>, u64)> = HashSet::new();
        let mut frontier: Vec<(Vec<u32>, u64)> = Vec::new();
        for m in self.mechanisms.iter().filter(|m| m.observable_mask() != 0) {
            let state = (m.detectors.clone(), m.observable_mask());
            if seen.insert(state.clone()) {
                frontier.push(state);
            }
        }
        for weight in 1..=max_weight {
            let mut next = Vec::new();
            for (dets, obs) in &frontier {
                if dets.is_empty() {
                    if *obs != 0 {
                        return Some(weight);
                    }
                    continue;
                }
                if weight == max_weight {
                    continue;
                }
                let remaining = max_weight - weight;
                for &mi in &by_detector[dets[0] as usize] {
                    let m = &self.mechanisms[mi];
                    let nd = sym_diff(dets, &m.detectors);
                    let no = obs ^ m.observable_mask();
                    if nd.len() > max_deg * (remaining - 1) {
                        continue;
                    }
                    if nd.is_empty() && no == 0 {
                        continue;
                    }
                    let state = (nd, no);
                    if seen.insert(state.clone()) {
                        next.push(state);
                    }
                }
            }
            frontier = next;
        }
        None
    }
}

impl fmt::Display for ErrorMechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error({})", self.probability)?;
        let single = [DecompositionPart { detectors: self.detectors.clone(), observables: self.observables.clone() }];
        let parts: &[DecompositionPart] = self.decomposition.as_deref().unwrap_or(&single);
        for (i, p) in parts.iter().enumerate() {
            if i > 0 {
                write!(f, " ^")?;
            }
            for d in &p.detectors {
                write!(f, " D{d}")?;
            }
            for o in &p.observables {
                write!(f, " L{o}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_formula() {
        assert!((xor_merge(0.1, 0.1) - 0.18).abs() < 1e-15);
        assert_eq!(xor_merge(0.0, 0.3), 0.3);
    }

    #[test]
    fn partitions_enumerate_pairs() {
        let p = partitions(&[1, 2, 3, 4], 2);
        assert_eq!(p, vec![vec![vec![1, 2], vec![3, 4]], vec![vec![1, 3], vec![2, 4]], vec![vec![1, 4], vec![2, 3]]]);
        let p = partitions(&[1, 2, 3], 2);
        assert_eq!(p.len(), 3);
        assert_eq!(partitions(&[1, 2, 3, 4], 3).len(), 6);
    }

    #[test]
    fn text_round_trip() {
        let dem = DetectorErrorModel::parse("error(0.001) D0 D1\n").unwrap();
        assert_eq!(dem.to_text(), "error(0.001) D0 D1\n");
        let dem = DetectorErrorModel::parse("error(0.002) D0 D1 ^ D2 D3 L0").unwrap();
        let m = &dem.mechanisms[0];
        assert_eq!(m.detectors, vec![0, 1, 2, 3]);
        assert_eq!(m.observables, vec![0]);
        assert_eq!(m.decomposition.as_ref().unwrap().len(), 2);
        assert_eq!(dem.to_text(), "error(0.002) D0 D1 ^ D2 D3 L0\n");
        assert_eq!(dem.num_detectors, 4);
        assert_eq!(dem.num_observables, 1);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = DetectorErrorModel::parse("error(0.1) D0\nerror(0.1) Q3\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        assert!(matches!(DetectorErrorModel::parse("oops").unwrap_err(), Error::Parse { line: 1, .. }));
        assert!(DetectorErrorModel::parse("error(1.5) D0").is_err());
        assert!(DetectorErrorModel::parse("error(0.1) L0").is_err());
    }

    #[test]
    fn decomposition_uses_existing_edges() {
        let mut dem = DetectorErrorModel::parse(
            "error(0.01) D0 D1\nerror(0.01) D2 D3\nerror(0.01) D0 D2\nerror(0.01) D1 D3 L0\nerror(0.001) D0 D1 D2 D3\nerror(0.01) D4 D5",
        )
        .unwrap();
        dem.canonicalize();
        let d = dem.decompose_hyperedges().unwrap();
        let h = d.mechanisms.iter().find(|m| m.detectors.len() == 4).unwrap();
        let parts = h.decomposition.as_ref().unwrap();
        assert_eq!(parts[0].detectors, vec![0, 1]);
        assert_eq!(parts[1].detectors, vec![2, 3]);
        // A hyperedge flipping L0 prefers the observable-consistent split.
        let dem = DetectorErrorModel::parse("error(0.01) D0 D1\nerror(0.01) D2 D3\nerror(0.01) D0 D2\nerror(0.01) D1 D3 L0\nerror(0.001) D0 D1 D2 D3 L0")
            .unwrap();
        let d = dem.decompose_hyperedges().unwrap();
        let parts = d.mechanisms[4].decomposition.as_ref().unwrap();
        assert_eq!(parts[0].detectors, vec![0, 2]);
        assert_eq!(parts[1].observables, vec![0]);
    }

    #[test]
    fn remainder_goes_to_smallest_detector_part() {
        let dem = DetectorErrorModel::parse("error(0.01) D0 D1\nerror(0.01) D2\nerror(0.001) D0 D1 D2 L0").unwrap();
        let d = dem.decompose_hyperedges().unwrap();
        let parts = d.mechanisms[2].decomposition.as_ref().unwrap();
        assert_eq!(parts[0].detectors, vec![0, 1]);
        assert_eq!(parts[0].observables, vec![0]);
        assert!(parts[1].observables.is_empty());
    }

    #[test]
    fn missing_edges_are_a_decomposition_error() {
        let dem = DetectorErrorModel::parse("error(0.01) D0 D1 D2").unwrap();
        assert!(matches!(dem.decompose_hyperedges(), Err(Error::Decomposition { .. })));
    }

    #[test]
    fn distance_of_a_repetition_chain() {
        // Boundary - D0 - D1 - boundary, observable on the left boundary edge.
        let dem = DetectorErrorModel::parse("error(0.1) D0 L0\nerror(0.1) D0 D1\nerror(0.1) D1\n").unwrap();
        assert_eq!(dem.circuit_distance(5), Some(3));
        assert_eq!(dem.circuit_distance(2), None);
    }
}
