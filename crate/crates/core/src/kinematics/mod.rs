//! Limb geometry, two-link inverse kinematics and the canter-gait model.
//!
//! Each limb is a femur/tibia pair working in its own sagittal plane:
//! `x2` is the horizontal reach from the hip, `z2` the vertical offset
//! (negative below the hip). Only the knee-down branch (`θ2 ≤ 0`) is used.

mod gait;
mod motion;

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gait::{gait_step_trajectory, StepTrajectory, MIN_TRAJECTORY_SAMPLES};
pub use motion::{
    Axis, BodyState, CanterGait, Direction, Limb, StepDecomposition, ARM_MOUNT_ANGLE,
};

/// Slack on `|cos θ2| ≤ 1` absorbed by clamping rather than rejected.
pub const ACOS_CLAMP_TOLERANCE: f64 = 1e-12;
// acos loses ~sqrt(eps) near full extension, so limits get matching slack.
const LIMIT_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinematicsError {
    #[error("target ({x2}, {z2}) is outside the reachable annulus")]
    Unreachable { x2: f64, z2: f64 },
    #[error("{joint} angle {value} rad violates its limits [{min}, {max}]")]
    JointLimit { joint: &'static str, value: f64, min: f64, max: f64 },
    #[error("invalid limb geometry: {0}")]
    GeometryInvalid(String),
    #[error("step length {a} m outside [0, {a_max}] m")]
    StepOutOfBounds { a: f64, a_max: f64 },
    #[error("step trajectory needs at least {min} samples, got {got}")]
    InsufficientSamples { got: usize, min: usize },
    #[error("step height must be positive, got {0}")]
    BadStepHeight(f64),
}

/// Closed angle interval in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleRange {
    pub min: f64,
    pub max: f64,
}

impl AngleRange {
    pub fn from_degrees(min: f64, max: f64) -> Self {
        Self { min: min.to_radians(), max: max.to_radians() }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min - LIMIT_TOLERANCE && v <= self.max + LIMIT_TOLERANCE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimbGeometry {
    pub femur_length: f64,
    pub tibia_length: f64,
    pub body_height: f64,
    pub shoulder_yaw_limits: AngleRange,
    pub hip_pitch_limits: AngleRange,
    pub knee_pitch_limits: AngleRange,
}

impl Default for LimbGeometry {
    fn default() -> Self {
        Self {
            femur_length: 0.154,
            tibia_length: 0.206,
            body_height: 0.31,
            shoulder_yaw_limits: AngleRange::from_degrees(-35.0, 35.0),
            hip_pitch_limits: AngleRange::from_degrees(-90.0, 0.0),
            knee_pitch_limits: AngleRange::from_degrees(-90.0, 0.0),
        }
    }
}

impl LimbGeometry {
    pub fn reach(&self) -> f64 {
        self.femur_length + self.tibia_length
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        let positive = [self.femur_length, self.tibia_length, self.body_height]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !positive {
            return Err(KinematicsError::GeometryInvalid(
                "limb lengths and body height must be positive".into(),
            ));
        }
        if self.body_height >= self.reach() {
            return Err(KinematicsError::GeometryInvalid(format!(
                "body height {} m is not below full limb reach {} m",
                self.body_height,
                self.reach()
            )));
        }
        Ok(())
    }

    /// Longest stroke the limb can make while the body stays at its height:
    /// `sqrt((l_F + l_T)^2 - H^2)`.
    pub fn max_step_length(&self) -> Result<f64, KinematicsError> {
        self.validate()?;
        Ok((self.reach().powi(2) - self.body_height.powi(2)).sqrt())
    }
}

/// Free-function form of [`LimbGeometry::max_step_length`].
pub fn max_step_length(geom: &LimbGeometry) -> Result<f64, KinematicsError> {
    geom.max_step_length()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JointAngles {
    pub shoulder_yaw: f64,
    pub hip_pitch: f64,
    pub knee_pitch: f64,
}

/// Foot position in the limb plane, relative to the hip.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LimbTarget {
    pub x2: f64,
    pub z2: f64,
}

impl LimbTarget {
    pub const fn new(x2: f64, z2: f64) -> Self {
        Self { x2, z2 }
    }

    /// Inside the ring between full fold and full extension.
    pub fn is_reachable(&self, geom: &LimbGeometry) -> bool {
        let r2 = self.x2 * self.x2 + self.z2 * self.z2;
        let (f, t) = (geom.femur_length, geom.tibia_length);
        let inner = f * f + t * t - 2.0 * f * t;
        let outer = (f + t) * (f + t);
        let slack = ACOS_CLAMP_TOLERANCE * 2.0 * f * t;
        r2 >= inner - slack && r2 <= outer + slack
    }
}

pub fn forward_kinematics(geom: &LimbGeometry, angles: &JointAngles) -> LimbTarget {
    let (t1, t12) = (angles.hip_pitch, angles.hip_pitch + angles.knee_pitch);
    LimbTarget {
        x2: geom.femur_length * t1.cos() + geom.tibia_length * t12.cos(),
        z2: geom.femur_length * t1.sin() + geom.tibia_length * t12.sin(),
    }
}

/// Hip and knee pitch for `target`, without checking joint limits.
pub fn solve_limb_plane(
    geom: &LimbGeometry,
    target: LimbTarget,
) -> Result<(f64, f64), KinematicsError> {
    let (f, t) = (geom.femur_length, geom.tibia_length);
    let LimbTarget { x2, z2 } = target;
    let cos_knee = (x2 * x2 + z2 * z2 - f * f - t * t) / (2.0 * f * t);
    if !cos_knee.is_finite() || cos_knee.abs() > 1.0 + ACOS_CLAMP_TOLERANCE {
        return Err(KinematicsError::Unreachable { x2, z2 });
    }
    let knee = -cos_knee.clamp(-1.0, 1.0).acos();
    let hip = z2.atan2(x2) - (t * knee.sin()).atan2(f + t * knee.cos());
    Ok((hip, knee))
}

/// Joint angles placing the foot at `target`. The shoulder yaw is passed
/// through and checked against its limits with the two pitch joints.
pub fn inverse_kinematics(
    geom: &LimbGeometry,
    target: LimbTarget,
    shoulder_yaw: f64,
) -> Result<JointAngles, KinematicsError> {
    let (hip_pitch, knee_pitch) = solve_limb_plane(geom, target)?;
    let angles = JointAngles { shoulder_yaw, hip_pitch, knee_pitch };
    check_limits(geom, &angles)?;
    Ok(angles)
}

pub fn check_limits(geom: &LimbGeometry, a: &JointAngles) -> Result<(), KinematicsError> {
    for (joint, value, range) in [
        ("shoulder yaw", a.shoulder_yaw, geom.shoulder_yaw_limits),
        ("hip pitch", a.hip_pitch, geom.hip_pitch_limits),
        ("knee pitch", a.knee_pitch, geom.knee_pitch_limits),
    ] {
        if !range.contains(value) {
            return Err(KinematicsError::JointLimit { joint, value, min: range.min, max: range.max });
        }
    }
    Ok(())
}

/// Hip pitch of the fully extended, straight-down limb.
pub const STRAIGHT_DOWN: f64 = -FRAC_PI_2;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn table() -> LimbGeometry {
        LimbGeometry::default()
    }

    #[test]
    fn max_step_on_default_geometry() {
        // sqrt(0.36^2 - 0.31^2) = sqrt(0.0335)
        assert_abs_diff_eq!(table().max_step_length().unwrap(), 0.0335f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(table().max_step_length().unwrap(), 0.183030, epsilon = 1e-6);
    }

    #[test]
    fn max_step_degenerate_heights() {
        // zero height is rejected by validation, so probe the formula's limit
        let mut g = table();
        g.body_height = 1e-12;
        assert_abs_diff_eq!(g.max_step_length().unwrap(), g.reach(), epsilon = 1e-12);
        g.body_height = g.reach() - 1e-12;
        assert!(g.max_step_length().unwrap() < 1e-5);
        g.body_height = g.reach();
        assert!(matches!(g.max_step_length(), Err(KinematicsError::GeometryInvalid(_))));
    }

    #[test]
    fn ik_fully_extended_cases() {
        let g = table();
        let flat = inverse_kinematics(&g, LimbTarget::new(g.reach(), 0.0), 0.0).unwrap();
        assert_abs_diff_eq!(flat.hip_pitch, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(flat.knee_pitch, 0.0, epsilon = 1e-6);

        let down = inverse_kinematics(&g, LimbTarget::new(0.0, -g.reach()), 0.0).unwrap();
        assert_abs_diff_eq!(down.hip_pitch, STRAIGHT_DOWN, epsilon = 1e-6);
        assert_abs_diff_eq!(down.knee_pitch, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn ik_max_stride_stance_point_round_trips() {
        let g = table();
        let target = LimbTarget::new(0.18303, -0.31);
        let a = inverse_kinematics(&g, target, 0.0).unwrap();
        let back = forward_kinematics(&g, &a);
        assert_abs_diff_eq!(back.x2, target.x2, epsilon = 1e-9);
        assert_abs_diff_eq!(back.z2, target.z2, epsilon = 1e-9);
    }

    #[test]
    fn fk_examples() {
        let g = table();
        let zero = forward_kinematics(&g, &JointAngles::default());
        assert_abs_diff_eq!(zero.x2, 0.36, epsilon = 1e-15);
        assert_abs_diff_eq!(zero.z2, 0.0, epsilon = 1e-15);
        let down = forward_kinematics(&g, &JointAngles { hip_pitch: -FRAC_PI_2, ..Default::default() });
        assert_abs_diff_eq!(down.x2, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(down.z2, -0.36, epsilon = 1e-15);
    }

    #[test]
    fn ik_errors() {
        let g = table();
        assert!(matches!(
            inverse_kinematics(&g, LimbTarget::new(0.5, -0.2), 0.0),
            Err(KinematicsError::Unreachable { .. })
        ));
        assert!(matches!(
            inverse_kinematics(&g, LimbTarget::new(0.01, 0.0), 0.0),
            Err(KinematicsError::Unreachable { .. })
        ));
        // reachable, but the hip would have to pitch up
        assert!(matches!(
            inverse_kinematics(&g, LimbTarget::new(0.2, 0.1), 0.0),
            Err(KinematicsError::JointLimit { joint: "hip pitch", .. })
        ));
        assert!(matches!(
            inverse_kinematics(&g, LimbTarget::new(0.1, -0.3), 40f64.to_radians()),
            Err(KinematicsError::JointLimit { joint: "shoulder yaw", .. })
        ));
    }

    #[test]
    fn annulus_boundary_is_clamped_not_rejected() {
        let g = table();
        let nudged = LimbTarget::new(g.reach() * (1.0 + 1e-15), 0.0);
        assert!(nudged.is_reachable(&g));
        assert!(solve_limb_plane(&g, nudged).is_ok());
    }

    proptest! {
        #[test]
        fn fk_of_ik_reproduces_targets(r_frac in 0.0f64..1.0, phi in -3.1f64..3.1) {
            let g = table();
            let (inner, outer) = (g.tibia_length - g.femur_length, g.reach());
            let r = inner + (outer - inner) * r_frac;
            let target = LimbTarget::new(r * phi.cos(), r * phi.sin());
            prop_assert!(target.is_reachable(&g));
            let (hip, knee) = solve_limb_plane(&g, target).unwrap();
            prop_assert!(knee <= 0.0);
            let back = forward_kinematics(&g, &JointAngles { shoulder_yaw: 0.0, hip_pitch: hip, knee_pitch: knee });
            prop_assert!((back.x2 - target.x2).abs() < 1e-9);
            prop_assert!((back.z2 - target.z2).abs() < 1e-9);
        }
    }
}
