//! Decoders for detector error models: belief propagation, exact
//! minimum-weight perfect matching, weighted union-find, and their
//! belief-reweighted combinations.

pub mod belief;
pub mod blossom;
pub mod bp;
pub mod error;
pub mod graph;
pub mod mwpm;
pub mod uf;

pub use belief::{Decoder, DecoderConfig, DecoderKind, Matcher};
pub use bp::{run_bp, BPConfig, BPResult, BpVariant, TannerGraph};
pub use error::{DecodeError, Result};
pub use graph::{MatchingEdge, MatchingGraph};
pub use mwpm::mwpm_decode;
pub use uf::uf_decode;

/// Result of decoding one syndrome.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecodeOutcome {
    /// Predicted observable flips, bit `i` for observable `i`.
    pub observables: u64,
    /// Matching-graph edges of the correction (empty on the BP fast path).
    pub edges: Vec<usize>,
    /// DEM mechanisms of the correction: the edges' source mechanisms, or the
    /// BP hard decision when BP converged.
    pub mechanisms: Vec<usize>,
    pub bp_converged: Option<bool>,
    pub matched_weight: Option<f64>,
    pub clusters_grown: Option<usize>,
}

impl DecodeOutcome {
    pub(crate) fn empty() -> Self {
        Self { matched_weight: Some(0.0), ..Default::default() }
    }

    pub(crate) fn from_edges(graph: &MatchingGraph, used: &[bool]) -> Self {
        let edges: Vec<usize> = (0..used.len()).filter(|&e| used[e]).collect();
        let observables = edges.iter().fold(0u64, |m, &e| m ^ graph.edges[e].observables);
        let matched_weight = edges.iter().map(|&e| graph.edges[e].weight).sum();
        let mechanisms = edges.iter().map(|&e| graph.edges[e].mechanism).collect();
        Self { observables, edges, mechanisms, matched_weight: Some(matched_weight), ..Default::default() }
    }
}
