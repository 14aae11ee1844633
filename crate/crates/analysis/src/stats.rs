//! Binomial estimators.

/// Wilson score interval for `failures` out of `shots` at `z` standard
/// deviations. Returns `(0, 1)` when `shots == 0`.
pub fn wilson_interval(failures: u64, shots: u64, z: f64) -> (f64, f64) {
    if shots == 0 {
        return (0.0, 1.0);
    }
    let n = shots as f64;
    let f = failures as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (f + z2 / (2.0 * n)) / denom;
    let half = z * (f * (1.0 - f) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// `sqrt(f (1 - f) / shots)`.
pub fn binomial_std_error(failures: u64, shots: u64) -> f64 {
    if shots == 0 {
        return 0.0;
    }
    let f = failures as f64 / shots as f64;
    (f * (1.0 - f) / shots as f64).sqrt()
}

/// Ratio `f1 / f2` of two binomial rates with first-order error propagation.
pub fn rate_ratio(f1: u64, n1: u64, f2: u64, n2: u64) -> Option<(f64, f64)> {
    if f2 == 0 || n1 == 0 || n2 == 0 {
        return None;
    }
    let r1 = f1 as f64 / n1 as f64;
    let r2 = f2 as f64 / n2 as f64;
    let ratio = r1 / r2;
    let rel1 = if f1 == 0 { 0.0 } else { binomial_std_error(f1, n1) / r1 };
    let rel2 = binomial_std_error(f2, n2) / r2;
    Some((ratio, ratio * (rel1 * rel1 + rel2 * rel2).sqrt()))
}
