//! Threshold and below-threshold fits.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{AnalysisError, Result};
use crate::montecarlo::MonteCarloPoint;

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Stop when the relative chi2 decrease falls below this.
    pub tolerance: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iter: 500, tolerance: 1e-14 }
    }
}

#[derive(Debug, Clone)]
pub struct LmResult {
    pub params: Vec<f64>,
    pub chi2: f64,
    pub iterations: usize,
    /// `(J^T J)^-1` at the solution, if invertible.
    pub covariance: Option<DMatrix<f64>>,
}

fn jacobian(residuals: &impl Fn(&[f64]) -> Vec<f64>, x: &[f64], m: usize) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(m, x.len());
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        let h = 1e-6 * x[j].abs().max(1e-6);
        xp[j] = x[j] + h;
        let rp = residuals(&xp);
        xp[j] = x[j] - h;
        let rm = residuals(&xp);
        xp[j] = x[j];
        for i in 0..m {
            jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
        }
    }
    jac
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Levenberg-Marquardt minimisation of `sum residuals(x)^2` with a central
/// difference Jacobian and Marquardt diagonal scaling.
pub fn levenberg_marquardt(residuals: impl Fn(&[f64]) -> Vec<f64>, x0: &[f64], opts: LmOptions) -> Result<LmResult> {
    let mut x = x0.to_vec();
    let mut r = residuals(&x);
    let m = r.len();
    let mut chi2 = sum_sq(&r);
    if !chi2.is_finite() {
        return Err(AnalysisError::Fit { message: "non-finite residuals at the starting point".into(), iterations: 0, chi2 });
    }
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let jac = jacobian(&residuals, &x, m);
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * DVector::from_column_slice(&r);
        let mut improved = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for j in 0..x.len() {
                a[(j, j)] += lambda * jtj[(j, j)].max(1e-30);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rt = residuals(&trial);
            let ct = sum_sq(&rt);
            if ct.is_finite() && ct <= chi2 {
                let decrease = chi2 - ct;
                x = trial;
                r = rt;
                chi2 = ct;
                lambda = (lambda / 10.0).max(1e-15);
                improved = decrease > opts.tolerance * chi2.max(1e-300);
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let jac = jacobian(&residuals, &x, m);
    let covariance = (jac.transpose() * &jac).try_inverse();
    Ok(LmResult { params: x, chi2, iterations, covariance })
}

/// One observed failure rate for threshold fitting; `p` in CNOT-infidelity units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdDatum {
    pub size: usize,
    pub p: f64,
    pub rate: f64,
    pub shots: f64,
}

impl ThresholdDatum {
    pub fn from_point(p: &MonteCarloPoint) -> Self {
        Self { size: p.spec.code.size(), p: p.p_cx, rate: p.rate(), shots: p.spec.shots as f64 }
    }

    /// Binomial sigma with a half-count pseudo-observation so empty bins
    /// still carry weight.
    fn sigma(&self) -> f64 {
        let f = (self.rate * self.shots + 0.5) / (self.shots + 1.0);
        (f * (1.0 - f) / self.shots).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFit {
    /// Threshold in CNOT-infidelity units.
    pub p_th: f64,
    pub nu: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Leave-one-size-out jackknife standard error of `p_th`.
    pub sigma_pth: f64,
    pub chi2_dof: f64,
}

/// `f = A + B x + C x^2` with `x = (p - p_th) L^(1/nu)`; `params = [p_th, nu, A, B, C]`.
pub fn scaling_model(params: &[f64], size: usize, p: f64) -> f64 {
    let x = (p - params[0]) * (size as f64).powf(1.0 / params[1]);
    params[2] + params[3] * x + params[4] * x * x
}

const NU_STARTS: [f64; 3] = [0.7, 1.0, 1.4];

/// Weighted linear solve for `A, B, C` with `p_th`, `nu` held fixed.
fn quadratic_start(data: &[ThresholdDatum], p_th: f64, nu: f64) -> Option<[f64; 3]> {
    let mut xtx = DMatrix::<f64>::zeros(3, 3);
    let mut xty = DVector::<f64>::zeros(3);
    for d in data {
        let x = (d.p - p_th) * (d.size as f64).powf(1.0 / nu);
        let w = d.sigma().powi(-2);
        let row = [1.0, x, x * x];
        for i in 0..3 {
            xty[i] += w * row[i] * d.rate;
            for j in 0..3 {
                xtx[(i, j)] += w * row[i] * row[j];
            }
        }
    }
    let sol = xtx.lu().solve(&xty)?;
    Some([sol[0], sol[1], sol[2]])
}

/// Best of a multi-start LM fit; no domain checks.
fn fit_scaling(data: &[ThresholdDatum]) -> Result<LmResult> {
    let (lo, hi) = p_range(data);
    let sigmas: Vec<f64> = data.iter().map(|d| d.sigma()).collect();
    let residuals = |x: &[f64]| -> Vec<f64> {
        if !(x[1] > 0.05 && x[1] < 20.0) {
            return vec![f64::INFINITY; data.len()];
        }
        data.iter().zip(&sigmas).map(|(d, s)| (d.rate - scaling_model(x, d.size, d.p)) / s).collect()
    };
    let mut best: Option<LmResult> = None;
    for &nu in &NU_STARTS {
        for frac in [0.25, 0.5, 0.75] {
            let p_th = lo + frac * (hi - lo);
            let Some([a, b, c]) = quadratic_start(data, p_th, nu) else { continue };
            let Ok(res) = levenberg_marquardt(residuals, &[p_th, nu, a, b, c], LmOptions::default()) else { continue };
            if best.as_ref().map_or(true, |b| res.chi2 < b.chi2) {
                best = Some(res);
            }
        }
    }
    best.ok_or_else(|| AnalysisError::Fit { message: "no start converged".into(), iterations: 0, chi2: f64::NAN })
}

fn p_range(data: &[ThresholdDatum]) -> (f64, f64) {
    data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| (lo.min(d.p), hi.max(d.p)))
}

fn sizes(data: &[ThresholdDatum]) -> Vec<usize> {
    let mut s: Vec<usize> = data.iter().map(|d| d.size).collect();
    s.sort_unstable();
    s.dedup();
    s
}

/// Critical-exponent threshold fit over `{p_th, nu, A, B, C}` with a
/// leave-one-size-out jackknife error.
pub fn fit_threshold_data(data: &[ThresholdDatum]) -> Result<ThresholdFit> {
    let sizes = sizes(data);
    if sizes.len() < 3 {
        return Err(AnalysisError::Parameter(format!("threshold fit needs at least 3 lattice sizes, got {}", sizes.len())));
    }
    for &l in &sizes {
        let mut ps: Vec<u64> = data.iter().filter(|d| d.size == l).map(|d| d.p.to_bits()).collect();
        ps.sort_unstable();
        ps.dedup();
        if ps.len() < 4 {
            return Err(AnalysisError::Parameter(format!("threshold fit needs at least 4 noise values per size; L={l} has {}", ps.len())));
        }
    }
    let res = fit_scaling(data)?;
    let (lo, hi) = p_range(data);
    let p_th = res.params[0];
    if !(lo..=hi).contains(&p_th) {
        return Err(AnalysisError::FitDomain(format!("fitted crossing {p_th:.5e} lies outside the scanned range [{lo:.5e}, {hi:.5e}]")));
    }
    let mut leave_out = Vec::with_capacity(sizes.len());
    for &l in &sizes {
        let subset: Vec<ThresholdDatum> = data.iter().copied().filter(|d| d.size != l).collect();
        leave_out.push(fit_scaling(&subset)?.params[0]);
    }
    let k = leave_out.len() as f64;
    let mean = leave_out.iter().sum::<f64>() / k;
    let sigma_pth = ((k - 1.0) / k * leave_out.iter().map(|t| (t - mean).powi(2)).sum::<f64>()).sqrt();
    let dof = data.len().saturating_sub(5).max(1) as f64;
    let q = &res.params;
    Ok(ThresholdFit { p_th, nu: q[1], a: q[2], b: q[3], c: q[4], sigma_pth, chi2_dof: res.chi2 / dof })
}

pub fn fit_threshold(points: &[MonteCarloPoint]) -> Result<ThresholdFit> {
    let data: Vec<ThresholdDatum> = points.iter().map(ThresholdDatum::from_point).collect();
    fit_threshold_data(&data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzFamily {
    /// `a (b p)^((L+1)/2)` for square codes with `n = L^2`.
    Xy,
    /// `a r d_z / d_x^2 (b p)^((d_x+1)/2)`.
    RectX,
    /// `a r d_x / d_z^2 (b p)^((d_z+1)/2)`.
    RectZ,
}

impl AnsatzFamily {
    /// Exponent on `b p` and the multiplicative prefactor besides `a`.
    fn terms(self, d: &AnsatzDatum) -> (f64, f64) {
        let (dx, dz, r) = (d.d_x as f64, d.d_z as f64, d.rounds as f64);
        match self {
            AnsatzFamily::Xy => ((dx + 1.0) / 2.0, 1.0),
            AnsatzFamily::RectX => ((dx + 1.0) / 2.0, r * dz / (dx * dx)),
            AnsatzFamily::RectZ => ((dz + 1.0) / 2.0, r * dx / (dz * dz)),
        }
    }

    pub fn evaluate(self, a: f64, b: f64, d_x: usize, d_z: usize, rounds: usize, p: f64) -> f64 {
        let (e, pre) = self.terms(&AnsatzDatum { d_x, d_z, rounds, p, rate: 0.0, shots: 0.0 });
        a * pre * (b * p).powf(e)
    }
}

/// One below-threshold logical error rate; `p` is the physical noise strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnsatzDatum {
    pub d_x: usize,
    pub d_z: usize,
    pub rounds: usize,
    pub p: f64,
    pub rate: f64,
    pub shots: f64,
}

impl AnsatzDatum {
    pub fn from_point(p: &MonteCarloPoint) -> Self {
        let c = p.spec.code;
        Self { d_x: c.d_x, d_z: c.d_z, rounds: p.spec.rounds, p: p.spec.p, rate: p.rate(), shots: p.spec.shots as f64 }
    }

    /// Standard error of `ln rate` by the delta method.
    fn log_sigma(&self) -> f64 {
        ((1.0 - self.rate) / (self.rate * self.shots)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnsatzFit {
    pub family: AnsatzFamily,
    pub a: f64,
    pub b: f64,
    pub a_err: f64,
    pub b_err: f64,
    pub chi2_dof: f64,
}

/// Weighted linear least squares `y = X beta`; returns `beta`, its covariance
/// and the weighted residual sum of squares.
fn weighted_lstsq(rows: &[Vec<f64>], y: &[f64], sigma: &[f64]) -> Option<(DVector<f64>, DMatrix<f64>, f64)> {
    let k = rows[0].len();
    let x = DMatrix::from_fn(rows.len(), k, |i, j| rows[i][j] / sigma[i]);
    let yv = DVector::from_fn(rows.len(), |i, _| y[i] / sigma[i]);
    let cov = (x.transpose() * &x).try_inverse()?;
    let beta = &cov * x.transpose() * &yv;
    let resid = &x * &beta - &yv;
    Some((beta, cov, resid.norm_squared()))
}

fn usable(data: &[AnsatzDatum]) -> Vec<AnsatzDatum> {
    data.iter().copied().filter(|d| d.rate > 0.0 && d.rate < 1.0 && d.shots > 0.0).collect()
}

/// Fits `a`, `b` in log space. The log of every ansatz is linear in
/// `(ln a, ln b)`, so weighted linear least squares is the exact minimiser.
pub fn fit_ansatz_data(data: &[AnsatzDatum], family: AnsatzFamily) -> Result<AnsatzFit> {
    let data = usable(data);
    let mut shapes: Vec<(usize, usize)> = data.iter().map(|d| (d.d_x, d.d_z)).collect();
    shapes.sort_unstable();
    shapes.dedup();
    if shapes.len() < 3 {
        return Err(AnalysisError::Parameter(format!("ansatz fit needs at least 3 code sizes with failures, got {}", shapes.len())));
    }
    let mut rows = Vec::with_capacity(data.len());
    let mut y = Vec::with_capacity(data.len());
    let mut sigma = Vec::with_capacity(data.len());
    for d in &data {
        let (e, pre) = family.terms(d);
        rows.push(vec![1.0, e]);
        y.push(d.rate.ln() - pre.ln() - e * d.p.ln());
        sigma.push(d.log_sigma());
    }
    let (beta, cov, chi2) = weighted_lstsq(&rows, &y, &sigma)
        .ok_or_else(|| AnalysisError::Fit { message: "singular design: exponents do not vary".into(), iterations: 1, chi2: f64::NAN })?;
    let (a, b) = (beta[0].exp(), beta[1].exp());
    let dof = data.len().saturating_sub(2).max(1) as f64;
    Ok(AnsatzFit { family, a, b, a_err: a * cov[(0, 0)].sqrt(), b_err: b * cov[(1, 1)].sqrt(), chi2_dof: chi2 / dof })
}

pub fn fit_ansatz(points: &[MonteCarloPoint], family: AnsatzFamily) -> Result<AnsatzFit> {
    let data: Vec<AnsatzDatum> = points.iter().map(AnsatzDatum::from_point).collect();
    fit_ansatz_data(&data, family)
}

/// Free-exponent fit `ln f = c + e (g + beta ln p)` with `e = (sqrt(n)+1)/2`.
/// The square ansatz predicts `beta = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub beta: f64,
    pub beta_err: f64,
    pub chi2_dof: f64,
}

pub fn fit_exponent_scaling(data: &[AnsatzDatum]) -> Result<ExponentFit> {
    let data = usable(data);
    let mut ps: Vec<u64> = data.iter().map(|d| d.p.to_bits()).collect();
    ps.sort_unstable();
    ps.dedup();
    if ps.len() < 2 {
        return Err(AnalysisError::Parameter("exponent fit needs at least 2 noise values with failures".into()));
    }
    let mut rows = Vec::new();
    let mut y = Vec::new();
    let mut sigma = Vec::new();
    for d in &data {
        let e = (((d.d_x * d.d_z) as f64).sqrt() + 1.0) / 2.0;
        rows.push(vec![1.0, e, e * d.p.ln()]);
        y.push(d.rate.ln());
        sigma.push(d.log_sigma());
    }
    let (beta, cov, chi2) = weighted_lstsq(&rows, &y, &sigma)
        .ok_or_else(|| AnalysisError::Fit { message: "singular design: need several sizes and noise values".into(), iterations: 1, chi2: f64::NAN })?;
    let dof = data.len().saturating_sub(3).max(1) as f64;
    Ok(ExponentFit { beta: beta[2], beta_err: cov[(2, 2)].sqrt(), chi2_dof: chi2 / dof })
}
