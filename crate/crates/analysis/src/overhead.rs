//! Qubit overhead needed to reach a target logical error rate under the
//! below-threshold ansätze.

use serde::{Deserialize, Serialize};

use crate::error::{AnalysisError, Result};
use crate::fit::{AnsatzFamily, AnsatzFit};

/// Largest distance searched.
pub const MAX_DISTANCE: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub a: f64,
    pub b: f64,
}

impl From<&AnsatzFit> for Coefficients {
    fn from(f: &AnsatzFit) -> Self {
        Self { a: f.a, b: f.b }
    }
}

/// Reference coefficients at bias 100 with belief-matching: the XY code, and
/// the X and Z logical channels of the CSS code.
pub const XY_REFERENCE: Coefficients = Coefficients { a: 0.0419, b: 24.76 };
pub const CSS_X_REFERENCE: Coefficients = Coefficients { a: 0.1015, b: 42.30 };
pub const CSS_Z_REFERENCE: Coefficients = Coefficients { a: 0.0527, b: 1.69 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "code")]
pub enum OverheadModel {
    /// Square XY code.
    Xy { fit: Coefficients },
    /// Square CSS code; fails if either logical channel fails.
    SquareCss { x: Coefficients, z: Coefficients },
    /// Rectangular CSS code with the two channels balanced at half the target each.
    RectCss { x: Coefficients, z: Coefficients },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousOverhead {
    pub d_x: f64,
    pub d_z: f64,
    pub qubits: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overhead {
    pub d_x: usize,
    pub d_z: usize,
    pub rounds: usize,
    /// Data plus ancilla qubits, `2 d_x d_z - 1`.
    pub qubits: usize,
    /// Ansatz logical error rate at the chosen dimensions.
    pub p_log: f64,
    pub continuous: ContinuousOverhead,
}

/// Physical noise strength for a CNOT infidelity at bias `eta`.
pub fn physical_from_cnot(p_cx: f64, eta: f64) -> f64 {
    let tail = if eta.is_infinite() { 0.0 } else { 0.8 / eta };
    p_cx / (0.2 + tail)
}

pub fn xy_rate(c: Coefficients, l: f64, p: f64) -> f64 {
    c.a * (c.b * p).powf((l + 1.0) / 2.0)
}

/// `(p_log^X, p_log^Z)` for a `d_x` by `d_z` CSS code over `max(d_x, d_z)` rounds.
pub fn css_rates(x: Coefficients, z: Coefficients, d_x: f64, d_z: f64, p: f64) -> (f64, f64) {
    let r = d_x.max(d_z);
    let px = x.a * r * d_z / (d_x * d_x) * (x.b * p).powf((d_x + 1.0) / 2.0);
    let pz = z.a * r * d_x / (d_z * d_z) * (z.b * p).powf((d_z + 1.0) / 2.0);
    (px, pz)
}

fn odd_distances() -> impl Iterator<Item = usize> {
    (3..=MAX_DISTANCE).step_by(2)
}

/// Root of a decreasing `f` on `[lo, hi]` by bisection.
fn bisect_decreasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    if f(hi) > 0.0 {
        return None;
    }
    if f(lo) <= 0.0 {
        return Some(lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

fn range_error(target: f64) -> AnalysisError {
    AnalysisError::Range { target, limit: MAX_DISTANCE }
}

/// Smallest-qubit odd dimensions meeting `target` at physical noise `p`.
pub fn solve_overhead(model: &OverheadModel, p: f64, target: f64) -> Result<Overhead> {
    if !(p > 0.0 && target > 0.0 && target < 1.0) {
        return Err(AnalysisError::Parameter(format!("need p > 0 and 0 < target < 1, got p={p}, target={target}")));
    }
    let hi = MAX_DISTANCE as f64;
    match *model {
        OverheadModel::Xy { fit } => {
            let l = odd_distances().find(|&l| xy_rate(fit, l as f64, p) <= target).ok_or_else(|| range_error(target))?;
            let lc = bisect_decreasing(|l| xy_rate(fit, l, p).ln() - target.ln(), 1.0, hi).ok_or_else(|| range_error(target))?;
            Ok(Overhead {
                d_x: l,
                d_z: l,
                rounds: l,
                qubits: 2 * l * l - 1,
                p_log: xy_rate(fit, l as f64, p),
                continuous: ContinuousOverhead { d_x: lc, d_z: lc, qubits: 2.0 * lc * lc - 1.0 },
            })
        }
        OverheadModel::SquareCss { x, z } => {
            let total = |l: f64| {
                let (px, pz) = css_rates(x, z, l, l, p);
                px + pz
            };
            let l = odd_distances().find(|&l| total(l as f64) <= target).ok_or_else(|| range_error(target))?;
            let lc = bisect_decreasing(|l| total(l).ln() - target.ln(), 1.0, hi).ok_or_else(|| range_error(target))?;
            Ok(Overhead {
                d_x: l,
                d_z: l,
                rounds: l,
                qubits: 2 * l * l - 1,
                p_log: total(l as f64),
                continuous: ContinuousOverhead { d_x: lc, d_z: lc, qubits: 2.0 * lc * lc - 1.0 },
            })
        }
        OverheadModel::RectCss { x, z } => {
            let half = target / 2.0;
            let mut best: Option<(usize, usize, usize)> = None;
            for dz in odd_distances() {
                for dx in odd_distances() {
                    let (px, pz) = css_rates(x, z, dx as f64, dz as f64, p);
                    if px <= half && pz <= half {
                        let q = 2 * dx * dz - 1;
                        if best.map_or(true, |b| q < b.2) {
                            best = Some((dx, dz, q));
                        }
                    }
                }
            }
            let (dx, dz, q) = best.ok_or_else(|| range_error(target))?;
            let (px, pz) = css_rates(x, z, dx as f64, dz as f64, p);
            let (cx, cz) = balance_rect(x, z, p, half).ok_or_else(|| range_error(target))?;
            Ok(Overhead {
                d_x: dx,
                d_z: dz,
                rounds: dx.max(dz),
                qubits: q,
                p_log: px + pz,
                continuous: ContinuousOverhead { d_x: cx, d_z: cz, qubits: 2.0 * cx * cz - 1.0 },
            })
        }
    }
}

/// Real `(d_x, d_z)` with both channels exactly at `half`, by alternating
/// one-dimensional solves.
fn balance_rect(x: Coefficients, z: Coefficients, p: f64, half: f64) -> Option<(f64, f64)> {
    let hi = 10.0 * MAX_DISTANCE as f64;
    let (mut dx, mut dz) = (3.0, 3.0);
    for _ in 0..500 {
        let nx = bisect_decreasing(|d| css_rates(x, z, d, dz, p).0.ln() - half.ln(), 1.0, hi)?;
        let nz = bisect_decreasing(|d| css_rates(x, z, nx, d, p).1.ln() - half.ln(), 1.0, hi)?;
        let moved = (nx - dx).abs() + (nz - dz).abs();
        dx = nx;
        dz = nz;
        if moved < 1e-10 {
            break;
        }
    }
    if dx > MAX_DISTANCE as f64 || dz > MAX_DISTANCE as f64 {
        return None;
    }
    Some((dx, dz))
}

/// Builds an overhead model from fitted ansätze: the XY fit if present,
/// otherwise the CSS pair.
pub fn model_from_fits(fits: &[AnsatzFit], rectangular: bool) -> Result<OverheadModel> {
    let find = |f: AnsatzFamily| fits.iter().find(|x| x.family == f).map(Coefficients::from);
    if let Some(fit) = find(AnsatzFamily::Xy) {
        return Ok(OverheadModel::Xy { fit });
    }
    match (find(AnsatzFamily::RectX), find(AnsatzFamily::RectZ)) {
        (Some(x), Some(z)) if rectangular => Ok(OverheadModel::RectCss { x, z }),
        (Some(x), Some(z)) => Ok(OverheadModel::SquareCss { x, z }),
        _ => Err(AnalysisError::Parameter("need an xy fit, or both rect_x and rect_z fits".into())),
    }
}
