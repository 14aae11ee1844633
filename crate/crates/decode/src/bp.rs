//! Flooding belief propagation with log-likelihood-ratio messages.

use bm_core::dem::DetectorErrorModel;
use bm_core::gf2::BitVec;

use crate::error::{DecodeError, Result};

/// Bipartite graph: one variable per error mechanism, one check per detector.
/// Edges are stored once and indexed from both sides.
#[derive(Debug, Clone)]
pub struct TannerGraph {
    pub num_checks: usize,
    pub priors: Vec<f64>,
    prior_llrs: Vec<f64>,
    edge_var: Vec<u32>,
    edge_check: Vec<u32>,
    var_start: Vec<usize>,
    /// Edge ids grouped by check.
    check_edges: Vec<u32>,
    check_start: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpVariant {
    SumProduct,
    MinSum,
}

impl BpVariant {
    pub fn name(self) -> &'static str {
        match self {
            BpVariant::SumProduct => "sum-product",
            BpVariant::MinSum => "min-sum",
        }
    }
}

impl std::fmt::Display for BpVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BpVariant {
    type Err = DecodeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum-product" => Ok(BpVariant::SumProduct),
            "min-sum" => Ok(BpVariant::MinSum),
            _ => Err(DecodeError::Parameter(format!("unknown BP variant '{s}' (expected sum-product or min-sum)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BPConfig {
    pub max_iter: usize,
    pub variant: BpVariant,
    pub min_sum_scale: f64,
    pub llr_clamp: f64,
    /// Stop at the first iteration whose hard decision reproduces the syndrome.
    pub stop_on_convergence: bool,
}

impl Default for BPConfig {
    fn default() -> Self {
        Self { max_iter: 30, variant: BpVariant::SumProduct, min_sum_scale: 1.0, llr_clamp: 50.0, stop_on_convergence: true }
    }
}

impl BPConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(DecodeError::Parameter("max_iter must be >= 1".into()));
        }
        if !(self.min_sum_scale > 0.0 && self.min_sum_scale <= 1.0) {
            return Err(DecodeError::Parameter(format!("min_sum_scale must lie in (0,1], got {}", self.min_sum_scale)));
        }
        if !(self.llr_clamp > 0.0) {
            return Err(DecodeError::Parameter("llr_clamp must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BPResult {
    pub posteriors: Vec<f64>,
    pub llrs: Vec<f64>,
    pub hard_decisions: BitVec,
    pub converged: bool,
    pub iterations_used: usize,
}

/// `log((1-p)/p)`, clamped to `[-50, 50]`.
pub fn llr(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(DecodeError::Parameter(format!("probability must lie in (0,1), got {p}")));
    }
    Ok(((1.0 - p) / p).ln().clamp(-50.0, 50.0))
}

impl TannerGraph {
    /// `vars[i]` lists the checks of variable `i` together with its prior.
    pub fn new(num_checks: usize, vars: &[(Vec<u32>, f64)]) -> Result<Self> {
        let mut edge_var = Vec::new();
        let mut edge_check = Vec::new();
        let mut var_start = vec![0];
        let mut priors = Vec::with_capacity(vars.len());
        let mut prior_llrs = Vec::with_capacity(vars.len());
        for (v, (checks, p)) in vars.iter().enumerate() {
            for &c in checks {
                if c as usize >= num_checks {
                    return Err(DecodeError::Dimension { expected: num_checks, got: c as usize + 1 });
                }
                edge_var.push(v as u32);
                edge_check.push(c);
            }
            var_start.push(edge_var.len());
            priors.push(*p);
            prior_llrs.push(llr(*p)?);
        }
        let mut counts = vec![0usize; num_checks + 1];
        for &c in &edge_check {
            counts[c as usize + 1] += 1;
        }
        for i in 0..num_checks {
            counts[i + 1] += counts[i];
        }
        let check_start = counts.clone();
        let mut fill = counts;
        let mut check_edges = vec![0u32; edge_check.len()];
        for (e, &c) in edge_check.iter().enumerate() {
            check_edges[fill[c as usize]] = e as u32;
            fill[c as usize] += 1;
        }
        Ok(Self { num_checks, priors, prior_llrs, edge_var, edge_check, var_start, check_edges, check_start })
    }

    pub fn from_dem(dem: &DetectorErrorModel) -> Result<Self> {
        let vars: Vec<(Vec<u32>, f64)> = dem.mechanisms.iter().map(|m| (m.detectors.clone(), m.probability)).collect();
        Self::new(dem.num_detectors, &vars)
    }

    pub fn num_vars(&self) -> usize {
        self.priors.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_var.len()
    }

    pub fn var_checks(&self, v: usize) -> &[u32] {
        &self.edge_check[self.var_start[v]..self.var_start[v + 1]]
    }

    /// `H x` over GF(2).
    pub fn syndrome_of(&self, x: &BitVec) -> BitVec {
        let mut s = BitVec::zeros(self.num_checks);
        for v in x.iter_ones() {
            for &c in self.var_checks(v) {
                s.toggle(c as usize);
            }
        }
        s
    }
}

/// Runs BP on `graph` for the given syndrome.
pub fn run_bp(graph: &TannerGraph, syndrome: &BitVec, config: &BPConfig) -> Result<BPResult> {
    config.validate()?;
    if syndrome.len() != graph.num_checks {
        return Err(DecodeError::Dimension { expected: graph.num_checks, got: syndrome.len() });
    }
    let clamp = config.llr_clamp;
    let ne = graph.num_edges();
    let nv = graph.num_vars();
    let mut v2c: Vec<f64> = (0..ne).map(|e| graph.prior_llrs[graph.edge_var[e] as usize].clamp(-clamp, clamp)).collect();
    let mut c2v = vec![0.0f64; ne];
    let mut q = vec![0.0f64; nv];
    let mut x = BitVec::zeros(nv);
    let mut converged = false;
    let mut iterations = 0;
    let mut tanh_buf: Vec<f64> = Vec::new();
    let mut suffix: Vec<f64> = Vec::new();
    let mut parity = vec![false; graph.num_checks];
    for it in 1..=config.max_iter {
        iterations = it;
        // Check-to-variable.
        for c in 0..graph.num_checks {
            let edges = &graph.check_edges[graph.check_start[c]..graph.check_start[c + 1]];
            let sign = if syndrome.get(c) { -1.0 } else { 1.0 };
            match config.variant {
                BpVariant::SumProduct => {
                    tanh_buf.clear();
                    tanh_buf.extend(edges.iter().map(|&e| (v2c[e as usize] / 2.0).tanh()));
                    // suffix[i] = product of tanh_buf[i..]
                    let k = tanh_buf.len();
                    suffix.clear();
                    suffix.resize(k + 1, 1.0);
                    for i in (0..k).rev() {
                        suffix[i] = suffix[i + 1] * tanh_buf[i];
                    }
                    let mut prefix = 1.0;
                    for (i, &e) in edges.iter().enumerate() {
                        let prod = (prefix * suffix[i + 1]).clamp(-1.0, 1.0);
                        c2v[e as usize] = (sign * 2.0 * prod.atanh()).clamp(-clamp, clamp);
                        prefix *= tanh_buf[i];
                    }
                }
                BpVariant::MinSum => {
                    // Track the two smallest magnitudes and the total sign.
                    let (mut m1, mut m2, mut arg1) = (f64::INFINITY, f64::INFINITY, usize::MAX);
                    let mut neg = false;
                    for (i, &e) in edges.iter().enumerate() {
                        let m = v2c[e as usize];
                        neg ^= m < 0.0;
                        let a = m.abs();
                        if a < m1 {
                            m2 = m1;
                            m1 = a;
                            arg1 = i;
                        } else if a < m2 {
                            m2 = a;
                        }
                    }
                    for (i, &e) in edges.iter().enumerate() {
                        let m = v2c[e as usize];
                        let s = if neg ^ (m < 0.0) { -sign } else { sign };
                        let mag = if i == arg1 { m2 } else { m1 };
                        let mag = if mag.is_infinite() { clamp } else { mag };
                        c2v[e as usize] = (s * config.min_sum_scale * mag).clamp(-clamp, clamp);
                    }
                }
            }
        }
        // Variable-to-check and pseudo-posteriors.
        parity.iter_mut().for_each(|b| *b = false);
        for v in 0..nv {
            let range = graph.var_start[v]..graph.var_start[v + 1];
            let total = graph.prior_llrs[v] + c2v[range.clone()].iter().sum::<f64>();
            q[v] = total.clamp(-clamp, clamp);
            for e in range {
                v2c[e] = (total - c2v[e]).clamp(-clamp, clamp);
            }
            let flip = q[v] <= 0.0;
            x.set(v, flip);
            if flip {
                for &c in graph.var_checks(v) {
                    parity[c as usize] ^= true;
                }
            }
        }
        converged = (0..graph.num_checks).all(|c| parity[c] == syndrome.get(c));
        if converged && config.stop_on_convergence {
            break;
        }
    }
    let posteriors = q.iter().map(|&l| 1.0 / (1.0 + l.exp())).collect();
    Ok(BPResult { posteriors, llrs: q, hard_decisions: x, converged, iterations_used: iterations })
}
