//! Closed foot trajectory for one canter-gait step.
//!
//! The stance phase is a flat stroke of length `a` at `z2 = -H`, centred on
//! the middle of the longest feasible stroke so every admissible `a` stays
//! inside the reach. The swing phase returns along an Archimedean spiral
//! section `r(φ) = 2h (1 - φ/π)`, `h = a / 2`, with its pole at the rear end
//! of the stroke: `φ = 0` lands on the front end and `φ = π` on the pole. The
//! spiral's vertical axis is scaled so the arc peaks at `step_height`.

use std::f64::consts::PI;

use super::{KinematicsError, LimbGeometry, LimbTarget};

pub const MIN_TRAJECTORY_SAMPLES: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct StepTrajectory {
    /// Stance samples front to rear, then swing samples rear to front.
    pub samples: Vec<LimbTarget>,
    pub step_length: f64,
    pub step_height: f64,
    stance_len: usize,
}

impl StepTrajectory {
    pub fn stance(&self) -> &[LimbTarget] {
        &self.samples[..self.stance_len]
    }

    pub fn swing(&self) -> &[LimbTarget] {
        &self.samples[self.stance_len..]
    }

    pub fn apex(&self) -> f64 {
        self.samples.iter().map(|s| s.z2).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Peak of `(1 - φ/π) sin φ` on `[0, π]`, by Newton on its derivative.
fn spiral_peak() -> (f64, f64) {
    let mut phi: f64 = 1.1;
    for _ in 0..20 {
        let d1 = -phi.sin() / PI + (1.0 - phi / PI) * phi.cos();
        let d2 = -2.0 * phi.cos() / PI - (1.0 - phi / PI) * phi.sin();
        phi -= d1 / d2;
    }
    (phi, (1.0 - phi / PI) * phi.sin())
}

/// Samples one full step: the stance stroke first, then the swing arc.
pub fn gait_step_trajectory(
    geom: &LimbGeometry,
    step_length: f64,
    step_height: f64,
    n_samples: usize,
) -> Result<StepTrajectory, KinematicsError> {
    let a_max = geom.max_step_length()?;
    if !(step_length > 0.0 && step_length <= a_max + 1e-12) {
        return Err(KinematicsError::StepOutOfBounds { a: step_length, a_max });
    }
    if !(step_height.is_finite() && step_height > 0.0) {
        return Err(KinematicsError::BadStepHeight(step_height));
    }
    if n_samples < MIN_TRAJECTORY_SAMPLES {
        return Err(KinematicsError::InsufficientSamples { got: n_samples, min: MIN_TRAJECTORY_SAMPLES });
    }

    let z_ground = -geom.body_height;
    let half = step_length / 2.0;
    let centre = a_max / 2.0;
    let (front, rear) = (centre + half, centre - half);

    let stance_len = n_samples.div_ceil(2);
    let swing_len = n_samples - stance_len;

    let mut samples = Vec::with_capacity(n_samples);
    for i in 0..stance_len {
        let s = i as f64 / (stance_len - 1) as f64;
        samples.push(LimbTarget::new(front + (rear - front) * s, z_ground));
    }

    let (_, peak) = spiral_peak();
    let vertical_scale = step_height / (2.0 * half * peak);
    for j in 1..=swing_len {
        let phi = PI * (1.0 - j as f64 / (swing_len + 1) as f64);
        let r = 2.0 * half * (1.0 - phi / PI);
        samples.push(LimbTarget::new(rear + r * phi.cos(), z_ground + vertical_scale * r * phi.sin()));
    }

    if let Some(bad) = samples.iter().find(|s| !s.is_reachable(geom)) {
        return Err(KinematicsError::Unreachable { x2: bad.x2, z2: bad.z2 });
    }
    Ok(StepTrajectory { samples, step_length, step_height, stance_len })
}
