use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{compute_errors, run_open_loop, DisturbanceModel, Granularity, Harness, Polyline, SimError};

/// Noise scale fitted to a target open-loop error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub scale: f64,
    pub model: DisturbanceModel,
    pub mean_open_loop_rmse_m: f64,
}

/// Mean full-step open-loop RMSE of `model` over `seeds`.
pub fn mean_open_loop_rmse(
    path: &Polyline,
    harness: &Harness,
    model: &DisturbanceModel,
    seeds: Range<u64>,
) -> Result<f64, SimError> {
    let n = seeds.end.saturating_sub(seeds.start);
    if n == 0 {
        return Err(SimError::InvalidConfig("seed range is empty".into()));
    }
    let mut total = 0.0;
    for seed in seeds {
        let h = harness.with_disturbance(DisturbanceModel { seed, enabled: true, ..*model });
        total += compute_errors(&run_open_loop(path, &h)?.log, Granularity::Fullstep)?.rmse_m;
    }
    Ok(total / n as f64)
}

/// Scales all of `base`'s standard deviations by a common factor, found by
/// bisection, so the mean open-loop RMSE over `seeds` hits `target_rmse`.
pub fn calibrate_noise(
    path: &Polyline,
    harness: &Harness,
    base: &DisturbanceModel,
    seeds: Range<u64>,
    target_rmse: f64,
) -> Result<Calibration, SimError> {
    if !(target_rmse.is_finite() && target_rmse > 0.0) {
        return Err(SimError::InvalidConfig(format!("target RMSE must be positive, got {target_rmse}")));
    }
    let eval = |scale: f64| mean_open_loop_rmse(path, harness, &base.scaled(scale), seeds.clone());

    let (mut lo, mut hi) = (0.0, 1.0);
    let mut hi_value = eval(hi)?;
    let mut doublings = 0;
    while hi_value < target_rmse {
        lo = hi;
        hi *= 2.0;
        hi_value = eval(hi)?;
        doublings += 1;
        if doublings > 40 {
            return Err(SimError::InvalidConfig("noise shape cannot reach the target error".into()));
        }
    }
    let (mut scale, mut value) = (hi, hi_value);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let v = eval(mid)?;
        (scale, value) = (mid, v);
        if (v - target_rmse).abs() <= 1e-6 * target_rmse {
            break;
        }
        if v < target_rmse {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Calibration { scale, model: base.scaled(scale), mean_open_loop_rmse_m: value })
}
