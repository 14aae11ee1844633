//! Decoder front end: plain matching, or BP followed by matching on a graph
//! reweighted from the BP posteriors.

use std::fmt;
use std::str::FromStr;

use bm_core::dem::DetectorErrorModel;
use bm_core::gf2::BitVec;

use crate::bp::{run_bp, BPConfig, TannerGraph};
use crate::error::{DecodeError, Result};
use crate::graph::MatchingGraph;
use crate::mwpm::mwpm_decode;
use crate::uf::uf_decode;
use crate::DecodeOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Matcher {
    Mwpm,
    UnionFind,
}

impl Matcher {
    pub fn decode(self, graph: &MatchingGraph, defects: &[u32]) -> Result<DecodeOutcome> {
        let out = match self {
            Matcher::Mwpm => mwpm_decode(graph, defects)?,
            Matcher::UnionFind => uf_decode(graph, defects)?,
        };
        debug_assert_eq!(graph.boundary_of(&out.edges), defects, "correction does not reproduce the syndrome");
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecoderKind {
    Mwpm,
    UnionFind,
    BeliefMatching,
    BeliefFind,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 4] = [DecoderKind::Mwpm, DecoderKind::UnionFind, DecoderKind::BeliefMatching, DecoderKind::BeliefFind];

    pub fn matcher(self) -> Matcher {
        match self {
            DecoderKind::Mwpm | DecoderKind::BeliefMatching => Matcher::Mwpm,
            DecoderKind::UnionFind | DecoderKind::BeliefFind => Matcher::UnionFind,
        }
    }

    pub fn uses_bp(self) -> bool {
        matches!(self, DecoderKind::BeliefMatching | DecoderKind::BeliefFind)
    }

    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Mwpm => "mwpm",
            DecoderKind::UnionFind => "uf",
            DecoderKind::BeliefMatching => "belief-matching",
            DecoderKind::BeliefFind => "belief-find",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderKind {
    type Err = DecodeError;

    fn from_str(s: &str) -> Result<Self> {
        DecoderKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| DecodeError::Parameter(format!("unknown decoder '{s}' (expected mwpm, uf, belief-matching or belief-find)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderConfig {
    pub kind: DecoderKind,
    pub bp: BPConfig,
}

impl DecoderConfig {
    pub fn new(kind: DecoderKind) -> Self {
        Self { kind, bp: BPConfig::default() }
    }
}

/// Immutable decoding structures for one DEM; `decode` may be called from
/// many threads at once.
#[derive(Debug, Clone)]
pub struct Decoder {
    pub config: DecoderConfig,
    graph: MatchingGraph,
    tanner: Option<TannerGraph>,
    mechanism_observables: Vec<u64>,
}

impl Decoder {
    /// `dem` must have its hyperedges decomposed.
    pub fn new(dem: &DetectorErrorModel, config: DecoderConfig) -> Result<Self> {
        let graph = MatchingGraph::build(dem)?;
        let tanner = if config.kind.uses_bp() {
            config.bp.validate()?;
            Some(TannerGraph::from_dem(dem)?)
        } else {
            None
        };
        let mechanism_observables = dem.mechanisms.iter().map(|m| m.observable_mask()).collect();
        Ok(Self { config, graph, tanner, mechanism_observables })
    }

    pub fn graph(&self) -> &MatchingGraph {
        &self.graph
    }

    pub fn num_detectors(&self) -> usize {
        self.graph.num_detectors
    }

    pub fn decode(&self, syndrome: &BitVec) -> Result<DecodeOutcome> {
        if syndrome.len() != self.graph.num_detectors {
            return Err(DecodeError::Dimension { expected: self.graph.num_detectors, got: syndrome.len() });
        }
        let defects: Vec<u32> = syndrome.iter_ones().map(|d| d as u32).collect();
        if defects.is_empty() {
            return Ok(DecodeOutcome { bp_converged: self.tanner.as_ref().map(|_| true), ..DecodeOutcome::empty() });
        }
        let matcher = self.config.kind.matcher();
        let Some(tanner) = &self.tanner else {
            return matcher.decode(&self.graph, &defects);
        };
        let bp = run_bp(tanner, syndrome, &self.config.bp)?;
        if bp.converged {
            let mechanisms: Vec<usize> = bp.hard_decisions.iter_ones().collect();
            let observables = mechanisms.iter().fold(0u64, |m, &i| m ^ self.mechanism_observables[i]);
            return Ok(DecodeOutcome { observables, mechanisms, bp_converged: Some(true), ..Default::default() });
        }
        let reweighted = self.graph.reweight(&bp.posteriors);
        let mut out = matcher.decode(&reweighted, &defects)?;
        out.bp_converged = Some(false);
        Ok(out)
    }
}

/// One-shot convenience wrapper around [`Decoder`].
pub fn belief_decode(dem: &DetectorErrorModel, syndrome: &BitVec, config: DecoderConfig) -> Result<DecodeOutcome> {
    Decoder::new(dem, config)?.decode(syndrome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoder_names_round_trip() {
        for k in DecoderKind::ALL {
            assert_eq!(k.name().parse::<DecoderKind>().unwrap(), k);
        }
        assert!("blossom".parse::<DecoderKind>().is_err());
    }

    #[test]
    fn converged_bp_skips_matching() {
        let dem = DetectorErrorModel::parse("error(0.01) D0 D1 L0\nerror(0.01) D1 D2\nerror(0.01) D0\nerror(0.01) D2").unwrap();
        let cfg = DecoderConfig::new(DecoderKind::BeliefMatching);
        let out = belief_decode(&dem, &BitVec::from_indices(3, [0, 1]), cfg).unwrap();
        assert_eq!(out.bp_converged, Some(true));
        assert_eq!(out.observables, 1);
        assert_eq!(out.mechanisms, vec![0]);
        assert!(out.edges.is_empty());
        let out = belief_decode(&dem, &BitVec::zeros(3), cfg).unwrap();
        assert_eq!(out.observables, 0);
        assert!(out.mechanisms.is_empty());
    }
}
