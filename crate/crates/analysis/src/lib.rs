//! Experiment orchestration and post-processing: Monte Carlo sweeps over
//! memory experiments, threshold and below-threshold fits, qubit-overhead
//! solving, and fragile-boundary studies.

pub mod error;
pub mod fit;
pub mod fragility;
pub mod montecarlo;
pub mod overhead;
pub mod stats;

pub use error::{AnalysisError, Result};
pub use fit::{fit_ansatz, fit_ansatz_data, fit_exponent_scaling, fit_threshold, fit_threshold_data, AnsatzDatum, AnsatzFamily, AnsatzFit, ExponentFit, ThresholdDatum, ThresholdFit};
pub use fragility::{spam_ratio, z_distance_scan, SpamRatio, ZDistanceRow};
pub use montecarlo::{derive_seed, load_checkpoint, run_point, run_points, CodeSpec, DecoderSpec, MonteCarloPoint, NoiseAxis, PointSpec, SweepGrid};
pub use overhead::{solve_overhead, Coefficients, Overhead, OverheadModel};
pub use stats::wilson_interval;
