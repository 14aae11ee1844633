//! Weighted union-find decoding on the split-edge graph with peeling.
//!
//! Every matching-graph edge `e = (u, v)` gets a middle node; half-edge `2e`
//! joins `u` to it and `2e + 1` joins it to `v`. Each half is as long as the
//! discretized weight of `e`, so growth is counted in half-weight units.

use std::collections::VecDeque;

use crate::error::{DecodeError, Result};
use crate::graph::MatchingGraph;
use crate::mwpm::check_defects;
use crate::DecodeOutcome;

const MIN_UNIT: f64 = 8.0;
const MAX_UNITS: u32 = 1 << 16;

/// Integer edge lengths: the smallest positive weight maps to 8, others scale
/// and round, capped at 2^16. Zero weights stay zero.
pub fn discretize(weights: &[f64]) -> Vec<u32> {
    let min_pos = weights.iter().copied().filter(|&w| w > 0.0).fold(f64::INFINITY, f64::min);
    weights
        .iter()
        .map(|&w| {
            if w <= 0.0 {
                0
            } else {
                ((w * MIN_UNIT / min_pos).round() as u64).clamp(1, MAX_UNITS as u64) as u32
            }
        })
        .collect()
}

struct Clusters {
    parent: Vec<u32>,
    size: Vec<u32>,
    odd: Vec<bool>,
    touches_boundary: Vec<bool>,
    /// Half-edges on the cluster's frontier (may hold stale entries).
    frontier: Vec<Vec<u32>>,
    /// Last round in which the cluster grew.
    grew: Vec<u32>,
}

impl Clusters {
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let gp = self.parent[self.parent[x] as usize];
            self.parent[x] = gp;
            x = gp as usize;
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> usize {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        if (self.size[ra], std::cmp::Reverse(ra)) < (self.size[rb], std::cmp::Reverse(rb)) {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        self.odd[ra] ^= self.odd[rb];
        self.touches_boundary[ra] |= self.touches_boundary[rb];
        self.grew[ra] = self.grew[ra].max(self.grew[rb]);
        let moved = std::mem::take(&mut self.frontier[rb]);
        self.frontier[ra].extend(moved);
        ra
    }

    fn active(&self, r: usize) -> bool {
        self.odd[r] && !self.touches_boundary[r]
    }
}

/// Weighted union-find correction for the flipped detectors `defects`.
pub fn uf_decode(graph: &MatchingGraph, defects: &[u32]) -> Result<DecodeOutcome> {
    check_defects(graph, defects)?;
    if defects.is_empty() {
        return Ok(DecodeOutcome::empty());
    }
    let ne = graph.edges.len();
    let n = graph.num_nodes();
    let boundary = graph.boundary() as usize;
    let nodes = n + ne;
    let weights: Vec<f64> = graph.edges.iter().map(|e| e.weight).collect();
    let len = discretize(&weights);
    let half_ends = |h: usize| -> (usize, usize) {
        let e = &graph.edges[h / 2];
        let mid = n + h / 2;
        if h % 2 == 0 {
            (e.u as usize, mid)
        } else {
            (mid, e.v as usize)
        }
    };
    let mut incident: Vec<Vec<u32>> = vec![Vec::new(); n];
    for h in 0..2 * ne {
        let (a, b) = half_ends(h);
        if a < n {
            incident[a].push(h as u32);
        }
        if b < n {
            incident[b].push(h as u32);
        }
    }
    let node_halves = |x: usize, incident: &Vec<Vec<u32>>| -> Vec<u32> {
        if x < n {
            incident[x].clone()
        } else {
            let e = (x - n) as u32;
            vec![2 * e, 2 * e + 1]
        }
    };

    let mut growth = vec![0u32; 2 * ne];
    let mut cl = Clusters {
        parent: (0..nodes as u32).collect(),
        size: vec![1; nodes],
        odd: vec![false; nodes],
        touches_boundary: vec![false; nodes],
        frontier: vec![Vec::new(); nodes],
        grew: vec![0; nodes],
    };
    cl.touches_boundary[boundary] = true;
    for &d in defects {
        cl.odd[d as usize] = true;
        cl.frontier[d as usize] = incident[d as usize].clone();
    }
    // Nodes reached by a cluster contribute their half-edges once.
    let mut absorbed = vec![false; nodes];
    for &d in defects {
        absorbed[d as usize] = true;
    }

    let full = |h: usize, growth: &[u32]| growth[h] >= len[h / 2];
    let absorb = |cl: &mut Clusters, absorbed: &mut Vec<bool>, x: usize, y: usize| {
        for z in [x, y] {
            if !absorbed[z] {
                absorbed[z] = true;
                let hs = node_halves(z, &incident);
                let r = cl.find(z);
                cl.frontier[r].extend(hs);
            }
        }
        cl.union(x, y);
    };
    // Zero-length edges are contracted up front.
    for e in 0..ne {
        if len[e] == 0 {
            let (a, m) = half_ends(2 * e);
            let (_, b) = half_ends(2 * e + 1);
            absorb(&mut cl, &mut absorbed, a, m);
            absorb(&mut cl, &mut absorbed, m, b);
        }
    }

    let mut clusters_grown = 0usize;
    let mut round = 0u32;
    loop {
        round += 1;
        let mut roots: Vec<usize> = defects.iter().map(|&d| cl.find(d as usize)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.retain(|&r| cl.active(r));
        if roots.is_empty() {
            break;
        }
        roots.sort_by_key(|&r| (cl.size[r], r));
        for r0 in roots {
            let r = cl.find(r0);
            if !cl.active(r) || cl.grew[r] == round {
                continue;
            }
            cl.grew[r] = round;
            clusters_grown += 1;
            let frontier = std::mem::take(&mut cl.frontier[r]);
            let mut keep = Vec::with_capacity(frontier.len());
            let mut completed = Vec::new();
            for h in frontier {
                let hu = h as usize;
                if full(hu, &growth) {
                    continue;
                }
                let (a, b) = half_ends(hu);
                if cl.find(a) == cl.find(b) {
                    continue;
                }
                growth[hu] += 1;
                if full(hu, &growth) {
                    completed.push(hu);
                } else {
                    keep.push(h);
                }
            }
            if keep.is_empty() && completed.is_empty() {
                let detector = defects.iter().map(|&d| d as usize).find(|&d| cl.find(d) == r).unwrap_or(0);
                return Err(DecodeError::Infeasible { detector });
            }
            let r = cl.find(r);
            cl.frontier[r].extend(keep);
            for h in completed {
                let (a, b) = half_ends(h);
                absorb(&mut cl, &mut absorbed, a, b);
            }
        }
    }

    let used = peel(graph, defects, &growth, &len, boundary, n);
    let mut out = DecodeOutcome::from_edges(graph, &used);
    out.clusters_grown = Some(clusters_grown);
    Ok(out)
}

/// Peeling on a BFS spanning forest of the fully grown half-edges, rooted at
/// the boundary when a cluster reaches it.
fn peel(graph: &MatchingGraph, defects: &[u32], growth: &[u32], len: &[u32], boundary: usize, n: usize) -> Vec<bool> {
    let ne = graph.edges.len();
    let nodes = n + ne;
    let mut adj: Vec<Vec<(u32, u32)>> = vec![Vec::new(); nodes];
    for h in 0..2 * ne {
        if growth[h] >= len[h / 2] {
            let e = &graph.edges[h / 2];
            let mid = n + h / 2;
            let (a, b) = if h % 2 == 0 { (e.u as usize, mid) } else { (mid, e.v as usize) };
            adj[a].push((b as u32, h as u32));
            adj[b].push((a as u32, h as u32));
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    let mut mark = vec![false; nodes];
    for &d in defects {
        mark[d as usize] = true;
    }
    let mut visited = vec![false; nodes];
    let mut parent_half = vec![u32::MAX; nodes];
    let mut parent_node = vec![u32::MAX; nodes];
    let mut order = Vec::new();
    let starts = std::iter::once(boundary).chain(defects.iter().map(|&d| d as usize));
    for s in starts {
        if visited[s] {
            continue;
        }
        visited[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            order.push(x);
            for &(y, h) in &adj[x] {
                let y = y as usize;
                if !visited[y] {
                    visited[y] = true;
                    parent_half[y] = h;
                    parent_node[y] = x as u32;
                    queue.push_back(y);
                }
            }
        }
    }
    let mut half_used = vec![false; 2 * ne];
    for &x in order.iter().rev() {
        if mark[x] && parent_half[x] != u32::MAX {
            half_used[parent_half[x] as usize] = true;
            mark[x] = false;
            mark[parent_node[x] as usize] ^= true;
        }
    }
    debug_assert!((0..nodes).all(|x| !mark[x] || x == boundary), "unpaired defect after peeling");
    (0..ne).map(|e| half_used[2 * e]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mwpm::mwpm_decode;
    use bm_core::dem::DetectorErrorModel;

    fn graph(text: &str) -> MatchingGraph {
        MatchingGraph::build(&DetectorErrorModel::parse(text).unwrap()).unwrap()
    }

    #[test]
    fn discretization() {
        assert_eq!(discretize(&[0.5, 1.0, 0.0, 1e9]), vec![8, 16, 0, 1 << 16]);
        assert_eq!(discretize(&[0.3, 0.35]), vec![8, 9]);
    }

    #[test]
    fn single_defect_goes_to_nearby_boundary() {
        // D0 -(0.01)- D1 -(0.2)- boundary, D0 -(0.1)- boundary
        let g = graph("error(0.1) D0 L0\nerror(0.01) D0 D1\nerror(0.2) D1");
        let out = uf_decode(&g, &[0]).unwrap();
        assert_eq!(out.observables, 1);
        assert_eq!(out.edges.len(), 1);
    }

    #[test]
    fn pair_matches_mwpm() {
        let g = graph("error(0.1) D0 D1\nerror(0.1) D1 D2 L0\nerror(0.01) D0\nerror(0.01) D2");
        for defects in [[0u32, 1], [1, 2], [0, 2]] {
            let a = uf_decode(&g, &defects).unwrap();
            let b = mwpm_decode(&g, &defects).unwrap();
            assert_eq!(a.observables, b.observables);
            assert_eq!(g.boundary_of(&a.edges), defects.to_vec());
        }
    }

    #[test]
    fn zero_weight_edges_are_contracted() {
        let g = graph("error(0.1) D0 D1").reweight(&[1.0]);
        let out = uf_decode(&g, &[0, 1]).unwrap();
        assert_eq!(out.edges, vec![0]);
    }

    #[test]
    fn infeasible_detected() {
        let g = graph("error(0.1) D0 D1\nerror(0.1) D2");
        assert!(matches!(uf_decode(&g, &[0]), Err(DecodeError::Infeasible { detector: 0 })));
    }
}
