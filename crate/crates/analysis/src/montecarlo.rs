//! Memory-experiment Monte Carlo: circuit, DEM, sampling, decoding and
//! failure counting, with an append-only JSON-lines checkpoint.

use std::collections::HashMap;
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use bm_core::circuit::{attach_noise, build_memory_experiment, cnot_infidelity, Circuit, MemoryBasis, NoiseModel, Spam};
use bm_core::dem::build_dem;
use bm_core::gf2::BitVec;
use bm_core::layout::{build_css, build_xy, build_xy_deformed, CodeFamily, SurfaceCodeLayout};
use bm_core::sampler::sample_blocks;
use bm_decode::{BPConfig, BpVariant, Decoder, DecoderConfig, DecoderKind};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AnalysisError, Result};
use crate::stats::{binomial_std_error, wilson_interval};

/// Blocks of 64 shots handed to one worker at a time.
const BLOCKS_PER_TASK: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeSpec {
    #[serde(with = "family_name")]
    pub family: CodeFamily,
    pub d_x: usize,
    pub d_z: usize,
}

impl CodeSpec {
    pub fn css(d_x: usize, d_z: usize) -> Self {
        Self { family: CodeFamily::Css, d_x, d_z }
    }

    pub fn xy(l: usize) -> Self {
        Self { family: CodeFamily::Xy, d_x: l, d_z: l }
    }

    pub fn xy_deformed(l: usize) -> Self {
        Self { family: CodeFamily::XyDeformed, d_x: l, d_z: l }
    }

    /// `family` with both dimensions set to `l`.
    pub fn square(family: CodeFamily, l: usize) -> Self {
        Self { family, d_x: l, d_z: l }
    }

    /// Lattice size used for finite-size scaling.
    pub fn size(&self) -> usize {
        self.d_x.max(self.d_z)
    }

    pub fn num_data(&self) -> usize {
        self.d_x * self.d_z
    }

    /// `max(d_x, d_z)` rounds of stabilizer measurement.
    pub fn default_rounds(&self) -> usize {
        self.size()
    }

    pub fn layout(&self) -> Result<SurfaceCodeLayout> {
        match self.family {
            CodeFamily::Css => Ok(build_css(self.d_x, self.d_z)?),
            CodeFamily::Xy | CodeFamily::XyDeformed if self.d_x != self.d_z => {
                Err(AnalysisError::Parameter(format!("{} codes are square, got {}x{}", family_str(self.family), self.d_x, self.d_z)))
            }
            CodeFamily::Xy => Ok(build_xy(self.d_x)?),
            CodeFamily::XyDeformed => Ok(build_xy_deformed(self.d_x)?.0),
        }
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}x{}", family_str(self.family), self.d_x, self.d_z)
    }
}

pub fn family_str(family: CodeFamily) -> &'static str {
    match family {
        CodeFamily::Css => "css",
        CodeFamily::Xy => "xy",
        CodeFamily::XyDeformed => "xy-deformed",
    }
}

pub fn parse_family(s: &str) -> Result<CodeFamily> {
    match s {
        "css" => Ok(CodeFamily::Css),
        "xy" => Ok(CodeFamily::Xy),
        "xy-deformed" => Ok(CodeFamily::XyDeformed),
        _ => Err(AnalysisError::Parameter(format!("unknown code family '{s}' (expected css, xy or xy-deformed)"))),
    }
}

mod family_name {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(f: &CodeFamily, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(family_str(*f))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CodeFamily, D::Error> {
        let s = String::deserialize(d)?;
        parse_family(&s).map_err(serde::de::Error::custom)
    }
}

/// Serializes any `Display + FromStr` type as its string form.
mod as_str {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<T: fmt::Display, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D>(d: D) -> std::result::Result<T, D::Error>
    where
        T: FromStr,
        T::Err: fmt::Display,
        D: Deserializer<'de>,
    {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoderSpec {
    #[serde(with = "as_str")]
    pub kind: DecoderKind,
    pub bp_max_iter: usize,
    #[serde(with = "as_str")]
    pub bp_variant: BpVariant,
    pub min_sum_scale: f64,
}

impl DecoderSpec {
    pub fn new(kind: DecoderKind) -> Self {
        let bp = BPConfig::default();
        Self { kind, bp_max_iter: bp.max_iter, bp_variant: bp.variant, min_sum_scale: bp.min_sum_scale }
    }

    pub fn config(&self) -> DecoderConfig {
        let bp = BPConfig { max_iter: self.bp_max_iter, variant: self.bp_variant, min_sum_scale: self.min_sum_scale, ..BPConfig::default() };
        DecoderConfig { kind: self.kind, bp }
    }
}

/// One memory experiment to simulate. `p` is the physical noise strength;
/// the CNOT infidelity is derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSpec {
    pub code: CodeSpec,
    pub decoder: DecoderSpec,
    pub p: f64,
    pub eta: f64,
    pub rounds: usize,
    pub spam: Spam,
    pub shots: u64,
    pub seed: u64,
}

impl PointSpec {
    pub fn p_cx(&self) -> f64 {
        cnot_infidelity(self.p, self.eta).unwrap_or(f64::NAN)
    }

    /// Canonical text of the spec, used as the checkpoint key.
    fn key(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloPoint {
    #[serde(flatten)]
    pub spec: PointSpec,
    pub p_cx: f64,
    pub failures: u64,
}

impl MonteCarloPoint {
    pub fn rate(&self) -> f64 {
        if self.spec.shots == 0 {
            0.0
        } else {
            self.failures as f64 / self.spec.shots as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        binomial_std_error(self.failures, self.spec.shots)
    }

    /// Wilson interval at `z` standard deviations.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.failures, self.spec.shots, z)
    }
}

/// Stable 64-bit FNV-1a.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Sampling seed for a point: a hash of the base seed and every field that
/// changes the circuit. The decoder is excluded so that decoders compared at
/// the same point see the same shots.
pub fn derive_seed(base: u64, code: &CodeSpec, p: f64, eta: f64, rounds: usize, spam: Spam) -> u64 {
    let text = format!("{base}|{code}|{:016x}|{:016x}|{rounds}|{spam:?}", p.to_bits(), eta.to_bits());
    fnv1a(text.as_bytes())
}

/// Whether grid noise values are physical strengths or CNOT infidelities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseAxis {
    Physical,
    CnotInfidelity,
}

/// Cartesian product of codes, decoders, noise values and biases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub codes: Vec<CodeSpec>,
    pub decoders: Vec<DecoderSpec>,
    pub noise: Vec<f64>,
    pub axis: NoiseAxis,
    pub etas: Vec<f64>,
    /// Defaults to each code's `default_rounds`.
    pub rounds: Option<usize>,
    pub spam: Spam,
    pub shots: u64,
    pub base_seed: u64,
}

impl SweepGrid {
    pub fn expand(&self) -> Result<Vec<PointSpec>> {
        let mut out = Vec::new();
        for code in &self.codes {
            let rounds = self.rounds.unwrap_or_else(|| code.default_rounds());
            for &eta in &self.etas {
                for &x in &self.noise {
                    let model = match self.axis {
                        NoiseAxis::Physical => NoiseModel::new(x, eta)?,
                        NoiseAxis::CnotInfidelity => NoiseModel::from_cnot_infidelity(x, eta)?,
                    };
                    let seed = derive_seed(self.base_seed, code, model.p, eta, rounds, self.spam);
                    for decoder in &self.decoders {
                        out.push(PointSpec { code: *code, decoder: *decoder, p: model.p, eta, rounds, spam: self.spam, shots: self.shots, seed });
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Circuit and decoder for one point, built once and shared by all workers.
pub struct PreparedPoint {
    pub circuit: Circuit,
    pub decoder: Decoder,
}

impl PreparedPoint {
    pub fn new(spec: &PointSpec) -> Result<Self> {
        let layout = spec.code.layout()?;
        let ideal = build_memory_experiment(&layout, spec.rounds, MemoryBasis::X, spec.spam)?;
        let circuit = attach_noise(&ideal, &NoiseModel::new(spec.p, spec.eta)?);
        let dem = build_dem(&circuit)?.decompose_hyperedges()?;
        let decoder = Decoder::new(&dem, spec.decoder.config())?;
        Ok(Self { circuit, decoder })
    }

    /// Failures among shots `[64 * first_block, 64 * first_block + shots)`.
    pub fn count_failures(&self, seed: u64, first_block: u64, shots: usize) -> Result<u64> {
        let batch = sample_blocks(&self.circuit, shots, seed, first_block);
        let mut failures = 0;
        for s in 0..shots {
            let predicted = self.decoder.decode(batch.syndrome(s))?.observables;
            if predicted != mask(batch.observables(s)) {
                failures += 1;
            }
        }
        Ok(failures)
    }
}

fn mask(bits: &BitVec) -> u64 {
    bits.iter_ones().fold(0, |m, i| m | (1 << i))
}

/// Simulates one point, splitting its shots over the rayon pool.
pub fn run_point(spec: &PointSpec) -> Result<MonteCarloPoint> {
    let prepared = PreparedPoint::new(spec)?;
    let tasks = spec.shots.div_ceil(64 * BLOCKS_PER_TASK);
    let failures = (0..tasks)
        .into_par_iter()
        .map(|t| {
            let first_block = t * BLOCKS_PER_TASK;
            let shots = (spec.shots - first_block * 64).min(64 * BLOCKS_PER_TASK) as usize;
            prepared.count_failures(spec.seed, first_block, shots)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(MonteCarloPoint { spec: *spec, p_cx: spec.p_cx(), failures })
}

fn checkpoint_error(path: &Path, message: impl fmt::Display) -> AnalysisError {
    AnalysisError::Checkpoint { path: path.display().to_string(), message: message.to_string() }
}

/// Reads every point recorded in a JSON-lines checkpoint. A missing file is
/// empty; a truncated final line (interrupted write) is ignored.
pub fn load_checkpoint(path: &Path) -> Result<Vec<MonteCarloPoint>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(checkpoint_error(path, e)),
    };
    let lines: Vec<String> = BufReader::new(file).lines().collect::<std::io::Result<_>>().map_err(|e| checkpoint_error(path, e))?;
    let mut out = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(p) => out.push(p),
            Err(_) if i + 1 == lines.len() => break,
            Err(e) => return Err(checkpoint_error(path, format!("line {}: {e}", i + 1))),
        }
    }
    Ok(out)
}

/// Runs every spec in order. With a checkpoint, points already recorded there
/// are reused and each new point is appended as soon as it finishes, so an
/// error or interruption keeps everything completed so far.
pub fn run_points(specs: &[PointSpec], checkpoint: Option<&Path>, mut on_point: impl FnMut(&MonteCarloPoint, bool)) -> Result<Vec<MonteCarloPoint>> {
    let mut done: HashMap<String, MonteCarloPoint> = HashMap::new();
    let mut sink = None;
    if let Some(path) = checkpoint {
        for p in load_checkpoint(path)? {
            done.insert(p.spec.key(), p);
        }
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(|e| checkpoint_error(path, e))?;
        sink = Some((path, file));
    }
    let mut out = Vec::with_capacity(specs.len());
    for spec in specs {
        if let Some(p) = done.get(&spec.key()) {
            on_point(p, true);
            out.push(p.clone());
            continue;
        }
        let point = run_point(spec)?;
        if let Some((path, file)) = sink.as_mut() {
            let line = serde_json::to_string(&point).expect("point serializes");
            writeln!(file, "{line}").and_then(|_| file.flush()).map_err(|e| checkpoint_error(path, e))?;
        }
        on_point(&point, false);
        out.push(point);
    }
    Ok(out)
}
