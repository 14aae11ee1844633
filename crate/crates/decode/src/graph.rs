//! Matching graph built from the graphlike mechanisms of a decomposed DEM.

use std::collections::BTreeMap;
use std::sync::Arc;

use bm_core::dem::DetectorErrorModel;

use crate::error::{DecodeError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MatchingEdge {
    pub u: u32,
    /// Second endpoint; equals the graph's boundary node for boundary edges.
    pub v: u32,
    pub probability: f64,
    pub weight: f64,
    pub observables: u64,
    /// Mechanism currently defining the edge (lowest weight among parallel ones).
    pub mechanism: usize,
}

/// Graph over detectors `0..num_detectors` plus the boundary node
/// `num_detectors`. Parallel graphlike mechanisms share one edge carrying the
/// smallest weight.
#[derive(Debug, Clone)]
pub struct MatchingGraph {
    pub num_detectors: usize,
    pub edges: Vec<MatchingEdge>,
    topology: Arc<Topology>,
}

/// Weight-independent structure shared by reweighted copies.
#[derive(Debug)]
struct Topology {
    /// Incident edge ids per node, boundary last.
    adjacency: Vec<Vec<u32>>,
    /// Graphlike mechanisms behind each edge.
    candidates: Vec<Vec<usize>>,
    /// Hyperedge mechanisms whose decomposition includes each graphlike mechanism.
    contributions: Vec<Vec<usize>>,
    observable_masks: Vec<u64>,
}

fn weight_of(p: f64) -> (f64, f64) {
    let pw = p.min(1.0);
    (pw, -pw.ln())
}

impl MatchingGraph {
    /// Builds the graph and sets weights from the mechanism priors.
    pub fn build(dem: &DetectorErrorModel) -> Result<Self> {
        let n = dem.num_detectors;
        let mut by_dets: BTreeMap<&[u32], Vec<usize>> = BTreeMap::new();
        for (i, m) in dem.mechanisms.iter().enumerate() {
            if m.is_graphlike() {
                by_dets.entry(&m.detectors).or_default().push(i);
            }
        }
        let observable_masks: Vec<u64> = dem.mechanisms.iter().map(|m| m.observable_mask()).collect();
        let mut contributions = vec![Vec::new(); dem.mechanisms.len()];
        for (h, m) in dem.mechanisms.iter().enumerate() {
            if m.detectors.len() <= 2 {
                continue;
            }
            let parts = m.decomposition.as_ref().ok_or_else(|| DecodeError::Undecomposed { detectors: m.detectors.clone() })?;
            for part in parts {
                let cands = by_dets
                    .get(part.detectors.as_slice())
                    .ok_or_else(|| DecodeError::Undecomposed { detectors: m.detectors.clone() })?;
                let mask = part.observables.iter().fold(0u64, |a, &o| a ^ (1 << o));
                // Same observables if possible, else the most probable parallel mechanism.
                let target = cands.iter().copied().find(|&c| observable_masks[c] == mask).unwrap_or_else(|| {
                    *cands
                        .iter()
                        .max_by(|&&a, &&b| dem.mechanisms[a].probability.total_cmp(&dem.mechanisms[b].probability).then(b.cmp(&a)))
                        .unwrap()
                });
                contributions[target].push(h);
            }
        }
        let mut edges = Vec::with_capacity(by_dets.len());
        let mut candidates = Vec::with_capacity(by_dets.len());
        let mut adjacency = vec![Vec::new(); n + 1];
        for (dets, cands) in by_dets {
            let (u, v) = if dets.len() == 1 { (dets[0], n as u32) } else { (dets[0], dets[1]) };
            let id = edges.len() as u32;
            adjacency[u as usize].push(id);
            adjacency[v as usize].push(id);
            edges.push(MatchingEdge { u, v, probability: 0.0, weight: 0.0, observables: 0, mechanism: cands[0] });
            candidates.push(cands);
        }
        let topology = Arc::new(Topology { adjacency, candidates, contributions, observable_masks });
        let mut g = MatchingGraph { num_detectors: n, edges, topology };
        let priors: Vec<f64> = dem.mechanisms.iter().map(|m| m.probability).collect();
        g.set_weights(&priors);
        Ok(g)
    }

    pub fn boundary(&self) -> u32 {
        self.num_detectors as u32
    }

    pub fn num_nodes(&self) -> usize {
        self.num_detectors + 1
    }

    pub fn incident(&self, node: usize) -> &[u32] {
        &self.topology.adjacency[node]
    }

    /// Weights from per-mechanism probabilities `p` (priors or BP posteriors):
    /// `p_adj(m) = p(m) + sum of p(h)` over hyperedges `h` decomposing into
    /// `m`, `p_w = min(p_adj, 1)`, `w = -ln p_w`.
    pub fn set_weights(&mut self, p: &[f64]) {
        let topo = &self.topology;
        for (e, cands) in self.edges.iter_mut().zip(&topo.candidates) {
            let mut best: Option<(f64, f64, usize)> = None;
            for &m in cands {
                let adj = p[m] + topo.contributions[m].iter().map(|&h| p[h]).sum::<f64>();
                let (pw, w) = weight_of(adj);
                if best.map_or(true, |b| w < b.1) {
                    best = Some((pw, w, m));
                }
            }
            let (pw, w, m) = best.expect("edge has a mechanism");
            e.probability = pw;
            e.weight = w;
            e.mechanism = m;
            e.observables = topo.observable_masks[m];
        }
    }

    /// Copy of the graph reweighted from BP posteriors.
    pub fn reweight(&self, posteriors: &[f64]) -> MatchingGraph {
        let mut g = self.clone();
        g.set_weights(posteriors);
        g
    }

    /// Detector parity of an edge set (boundary excluded).
    pub fn boundary_of(&self, edges: &[usize]) -> Vec<u32> {
        let mut parity = vec![false; self.num_detectors + 1];
        for &e in edges {
            let edge = &self.edges[e];
            parity[edge.u as usize] ^= true;
            parity[edge.v as usize] ^= true;
        }
        (0..self.num_detectors).filter(|&d| parity[d]).map(|d| d as u32).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dem(text: &str) -> DetectorErrorModel {
        DetectorErrorModel::parse(text).unwrap()
    }

    #[test]
    fn boundary_edge_weight() {
        let g = MatchingGraph::build(&dem("error(0.1) D0")).unwrap();
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.edges[0].v, 1);
        assert!((g.edges[0].weight + 0.1f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn parallel_mechanisms_keep_minimum_weight() {
        let g = MatchingGraph::build(&dem("error(0.1) D0 D1\nerror(0.2) D0 D1 L0")).unwrap();
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.edges[0].observables, 1);
        assert!((g.edges[0].probability - 0.2).abs() < 1e-12);
    }

    #[test]
    fn reweight_clips_and_sums() {
        let mut d = dem("error(0.3) D0 D1\nerror(0.4) D2 D3\nerror(0.01) D0 D1 ^ D2 D3\nerror(0.01) D0 D1 ^ D2 D3 L0\nerror(0.1) D2 D3 L0");
        d.num_detectors = 4;
        let g = MatchingGraph::build(&d).unwrap();
        let e01 = g.edges.iter().position(|e| (e.u, e.v) == (0, 1)).unwrap();
        let post = [0.3, 0.4, 0.4, 0.5, 0.01];
        let r = g.reweight(&post);
        // 0.3 + 0.4 + 0.5 = 1.2 -> clipped to 1 -> weight 0.
        assert_eq!(r.edges[e01].probability, 1.0);
        assert_eq!(r.edges[e01].weight, 0.0);
        let r = g.reweight(&[0.5, 0.4, 0.0, 0.0, 0.01]);
        assert!((r.edges[e01].weight - 2f64.ln()).abs() < 1e-12);
        let r = g.reweight(&[0.2, 0.4, 0.0, 0.0, 0.01]);
        assert!((r.edges[e01].weight + 0.2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn undecomposed_hyperedge_is_rejected() {
        assert!(MatchingGraph::build(&dem("error(0.1) D0 D1 D2\nerror(0.1) D0")).is_err());
    }
}
