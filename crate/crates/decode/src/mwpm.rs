//! Exact minimum-weight perfect matching over syndrome defects.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::blossom::max_weight_matching;
use crate::error::{DecodeError, Result};
use crate::graph::MatchingGraph;
use crate::DecodeOutcome;

/// Fixed-point scale for blossom weights.
const SCALE: f64 = (1u64 << 20) as f64;

struct ShortestPaths {
    dist: Vec<f64>,
    /// Edge used to reach each node, `u32::MAX` if unreached or the source.
    pred: Vec<u32>,
}

/// Dijkstra from `source`. The boundary node is a sink: paths never continue
/// through it. Stops once every node in `targets` is settled.
fn dijkstra(graph: &MatchingGraph, source: usize, targets: &[bool], mut remaining: usize) -> ShortestPaths {
    let n = graph.num_nodes();
    let boundary = graph.boundary() as usize;
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![u32::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    // Non-negative f64 bit patterns order like the values themselves.
    heap.push(Reverse((0u64, source)));
    while let Some(Reverse((bits, u))) = heap.pop() {
        if done[u] || f64::from_bits(bits) > dist[u] {
            continue;
        }
        done[u] = true;
        if targets[u] {
            remaining -= 1;
            if remaining == 0 {
                break;
            }
        }
        if u == boundary && u != source {
            continue;
        }
        for &e in graph.incident(u) {
            let edge = &graph.edges[e as usize];
            let v = if edge.u as usize == u { edge.v as usize } else { edge.u as usize };
            let nd = dist[u] + edge.weight;
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = e;
                heap.push(Reverse((nd.to_bits(), v)));
            }
        }
    }
    ShortestPaths { dist, pred }
}

fn walk_back(graph: &MatchingGraph, paths: &ShortestPaths, source: usize, mut target: usize, out: &mut Vec<bool>) {
    while target != source {
        let e = paths.pred[target] as usize;
        out[e] ^= true;
        let edge = &graph.edges[e];
        target = if edge.u as usize == target { edge.v as usize } else { edge.u as usize };
    }
}

pub(crate) fn check_defects(graph: &MatchingGraph, defects: &[u32]) -> Result<()> {
    for &d in defects {
        if d as usize >= graph.num_detectors {
            return Err(DecodeError::Dimension { expected: graph.num_detectors, got: d as usize + 1 });
        }
    }
    Ok(())
}

/// Minimum-weight correction for the flipped detectors `defects` (sorted,
/// distinct).
pub fn mwpm_decode(graph: &MatchingGraph, defects: &[u32]) -> Result<DecodeOutcome> {
    check_defects(graph, defects)?;
    let k = defects.len();
    if k == 0 {
        return Ok(DecodeOutcome::empty());
    }
    let boundary = graph.boundary() as usize;
    let mut targets = vec![false; graph.num_nodes()];
    for &d in defects {
        targets[d as usize] = true;
    }
    targets[boundary] = true;
    let paths: Vec<ShortestPaths> = defects.iter().map(|&d| dijkstra(graph, d as usize, &targets, k + 1)).collect();

    // Vertices 0..k are defects, k..2k their boundary images.
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..k {
        let bi = paths[i].dist[boundary];
        if bi.is_finite() {
            edges.push((i, k + i, bi));
        }
        for j in i + 1..k {
            let dij = paths[i].dist[defects[j] as usize];
            let bj = paths[j].dist[boundary];
            // A pair no cheaper than sending both to the boundary is never needed.
            if dij.is_finite() && !(dij >= bi + bj) {
                edges.push((i, j, dij));
            }
            edges.push((k + i, k + j, 0.0));
        }
    }
    let ints: Vec<i64> = edges.iter().map(|e| (e.2 * SCALE).round() as i64).collect();
    let top = ints.iter().copied().max().unwrap_or(0) + 1;
    let weighted: Vec<(usize, usize, i64)> = edges.iter().zip(&ints).map(|(e, &w)| (e.0, e.1, top - w)).collect();
    let mate = max_weight_matching(2 * k, &weighted, true);

    let mut used = vec![false; graph.edges.len()];
    for i in 0..k {
        match mate[i] {
            Some(j) if j < k => {
                if i < j {
                    walk_back(graph, &paths[i], defects[i] as usize, defects[j] as usize, &mut used);
                }
            }
            Some(j) if j == k + i => walk_back(graph, &paths[i], defects[i] as usize, boundary, &mut used),
            _ => return Err(DecodeError::Infeasible { detector: defects[i] as usize }),
        }
    }
    Ok(DecodeOutcome::from_edges(graph, &used))
}
