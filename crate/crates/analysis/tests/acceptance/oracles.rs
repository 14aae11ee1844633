//! Brute-force references used by the exactness criterion.

use bm_core::dem::{DetectorErrorModel, ErrorMechanism};
use bm_core::gf2::BitVec;
use bm_decode::MatchingGraph;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random graphlike DEM on at most `max_detectors` detectors.
pub fn random_graph_dem(rng: &mut ChaCha8Rng, max_detectors: usize, max_edges: usize) -> DetectorErrorModel {
    let n = rng.gen_range(2..=max_detectors);
    let mut seen = std::collections::BTreeSet::new();
    let mut mechanisms = Vec::new();
    let target = rng.gen_range(1..=max_edges);
    for _ in 0..4 * target {
        if mechanisms.len() == target {
            break;
        }
        let a = rng.gen_range(0..n as u32);
        let dets = if rng.gen_bool(0.3) {
            vec![a]
        } else {
            let b = rng.gen_range(0..n as u32);
            if a == b {
                continue;
            }
            vec![a.min(b), a.max(b)]
        };
        if seen.insert(dets.clone()) {
            let observables = if rng.gen_bool(0.3) { vec![0] } else { vec![] };
            mechanisms.push(ErrorMechanism { probability: rng.gen_range(0.001..0.5), detectors: dets, observables, decomposition: None });
        }
    }
    DetectorErrorModel { num_detectors: n, num_observables: 1, mechanisms }
}

/// Minimum total weight of an edge set whose boundary is `defects`:
/// Floyd-Warshall distances (paths may pass through the boundary) and a
/// bitmask DP over pairings, each defect pairing with another or the boundary.
pub fn min_pairing_weight(g: &MatchingGraph, defects: &[u32]) -> f64 {
    let n = g.num_nodes();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for e in &g.edges {
        let (u, v) = (e.u as usize, e.v as usize);
        d[u][v] = d[u][v].min(e.weight);
        d[v][u] = d[v][u].min(e.weight);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    let b = g.boundary() as usize;
    let k = defects.len();
    let mut f = vec![f64::INFINITY; 1 << k];
    f[0] = 0.0;
    for mask in 1usize..1 << k {
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut best = d[defects[i] as usize][b] + f[rest];
        for j in i + 1..k {
            if rest >> j & 1 == 1 {
                best = best.min(d[defects[i] as usize][defects[j] as usize] + f[rest & !(1 << j)]);
            }
        }
        f[mask] = best;
    }
    f[(1 << k) - 1]
}

/// Random bipartite tree; returns the check count and each variable's checks.
pub fn random_tree(rng: &mut ChaCha8Rng, total: usize) -> (usize, Vec<Vec<u32>>) {
    let mut vars: Vec<Vec<u32>> = vec![Vec::new()];
    let mut num_checks = 0usize;
    for _ in 1..total {
        if rng.gen_bool(0.5) || num_checks == 0 {
            let v = rng.gen_range(0..vars.len());
            vars[v].push(num_checks as u32);
            num_checks += 1;
        } else {
            let c = rng.gen_range(0..num_checks) as u32;
            vars.push(vec![c]);
        }
    }
    (num_checks, vars)
}

/// Exact posterior marginals by summing over every error configuration.
pub fn brute_marginals(num_checks: usize, vars: &[(Vec<u32>, f64)], syndrome: &BitVec) -> Vec<f64> {
    let nv = vars.len();
    let mut z = 0.0;
    let mut ones = vec![0.0; nv];
    for x in 0u32..1 << nv {
        let mut s = BitVec::zeros(num_checks);
        let mut w = 1.0;
        for (v, (checks, p)) in vars.iter().enumerate() {
            if x >> v & 1 == 1 {
                w *= p;
                for &c in checks {
                    s.toggle(c as usize);
                }
            } else {
                w *= 1.0 - p;
            }
        }
        if s == *syndrome {
            z += w;
            for (v, o) in ones.iter_mut().enumerate() {
                if x >> v & 1 == 1 {
                    *o += w;
                }
            }
        }
    }
    ones.iter().map(|o| o / z).collect()
}

/// Rank by textbook elimination on a dense 0/1 matrix.
pub fn naive_rank(mut m: Vec<Vec<u8>>) -> usize {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| m[r][c] == 1) else { continue };
        m.swap(rank, p);
        for r in 0..rows {
            if r != rank && m[r][c] == 1 {
                for k in 0..cols {
                    m[r][k] ^= m[rank][k];
                }
            }
        }
        rank += 1;
    }
    rank
}
