//! Fragile-boundary experiments: SPAM sensitivity and Z-type distance scans.

use bm_core::circuit::Spam;
use bm_core::distance::z_type_distance;
use bm_core::layout::{build_xy, build_xy_deformed};
use serde::{Deserialize, Serialize};

use crate::error::{AnalysisError, Result};
use crate::montecarlo::{run_point, MonteCarloPoint, PointSpec};
use crate::stats::rate_ratio;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpamRatio {
    pub noisy: MonteCarloPoint,
    pub perfect: MonteCarloPoint,
    pub ratio: f64,
    pub sigma: f64,
}

/// Logical error rate with noisy preparation and readout divided by the rate
/// with perfect ones. `spec.spam` is ignored; both runs use `spec.seed`.
pub fn spam_ratio(spec: &PointSpec) -> Result<SpamRatio> {
    let noisy = run_point(&PointSpec { spam: Spam::Noisy, ..*spec })?;
    let perfect = run_point(&PointSpec { spam: Spam::Perfect, ..*spec })?;
    let (ratio, sigma) = rate_ratio(noisy.failures, noisy.spec.shots, perfect.failures, perfect.spec.shots).ok_or(
        AnalysisError::UndefinedRatio { numerator_failures: noisy.failures, denominator_failures: perfect.failures, shots: spec.shots },
    )?;
    Ok(SpamRatio { noisy, perfect, ratio, sigma })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZDistanceRow {
    pub l: usize,
    pub n: usize,
    /// `None` when no Z-type logical exists.
    pub d_z: Option<usize>,
    pub ratio: Option<f64>,
    pub kernel_dim: usize,
    pub z_stabilizers: usize,
    pub z_logicals: usize,
}

/// Minimum-weight Z-type logical for each odd `l` of the XY code, deformed
/// or not, by enumerating the Z-type kernel.
pub fn z_distance_scan(ls: &[usize], deformed: bool) -> Result<Vec<ZDistanceRow>> {
    ls.iter()
        .map(|&l| {
            let layout = if deformed { build_xy_deformed(l)?.0 } else { build_xy(l)? };
            let z = z_type_distance(&layout.to_code())?;
            let n = layout.num_data();
            Ok(ZDistanceRow {
                l,
                n,
                d_z: z.distance,
                ratio: z.distance.map(|d| d as f64 / n as f64),
                kernel_dim: z.kernel_dim,
                z_stabilizers: z.z_stabilizer_count,
                z_logicals: z.logicals.len(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{CodeSpec, DecoderSpec};
    use bm_decode::DecoderKind;

    #[test]
    fn zero_noise_ratio_is_undefined() {
        let spec = PointSpec {
            code: CodeSpec::css(3, 3),
            decoder: DecoderSpec::new(DecoderKind::Mwpm),
            p: 0.0,
            eta: 1.0,
            rounds: 3,
            spam: Spam::Noisy,
            shots: 64,
            seed: 1,
        };
        let err = spam_ratio(&spec).unwrap_err();
        assert!(matches!(err, AnalysisError::UndefinedRatio { numerator_failures: 0, denominator_failures: 0, shots: 64 }));
    }

    #[test]
    fn undeformed_xy_z_distance_is_n() {
        for row in z_distance_scan(&[3, 5], false).unwrap() {
            assert_eq!(row.d_z, Some(row.n));
            assert_eq!(row.ratio, Some(1.0));
        }
    }
}
