//! Zigzag body motion of the canter gait.
//!
//! A full step is two sub-steps, each driven by one diagonal limb pair with
//! stroke length `a`. Moving along x, the sub-steps displace the body by
//! `(a cos θ0, a sin θ0)` and `(a cos θ0, -a sin θ0)`; along y the sine and
//! cosine terms swap. Lateral components cancel, leaving `2 a cos θ0` along
//! the commanded axis.

use std::fmt;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::{inverse_kinematics, JointAngles, KinematicsError, LimbGeometry, LimbTarget};

/// Yaw of each arm's rest position off the body axes. The limbs sit on the
/// diagonals, so a gait yaw `θ0` corresponds to a shoulder joint angle of
/// `θ0 - ARM_MOUNT_ANGLE`.
pub const ARM_MOUNT_ANGLE: f64 = std::f64::consts::FRAC_PI_4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Reverse => -1.0,
        }
    }

    pub fn of(value: f64) -> Self {
        if value < 0.0 {
            Direction::Reverse
        } else {
            Direction::Forward
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Limb {
    FrontLeft,
    FrontRight,
    RearLeft,
    RearRight,
}

impl Limb {
    pub const ALL: [Limb; 4] = [Limb::FrontLeft, Limb::FrontRight, Limb::RearLeft, Limb::RearRight];

    pub fn id(self) -> &'static str {
        match self {
            Limb::FrontLeft => "FL",
            Limb::FrontRight => "FR",
            Limb::RearLeft => "RL",
            Limb::RearRight => "RR",
        }
    }
}

/// Planar body position and full-step counter.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BodyState {
    pub x: f64,
    pub y: f64,
    pub k: u64,
}

impl BodyState {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y, k: 0 }
    }

    pub fn position(&self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }

    pub fn component(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
        }
    }

    /// Advances one full step along `axis` by `delta`.
    pub fn advanced(&self, axis: Axis, delta: f64) -> Self {
        let mut next = Self { k: self.k + 1, ..*self };
        match axis {
            Axis::X => next.x += delta,
            Axis::Y => next.y += delta,
        }
        next
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDecomposition {
    pub substeps: [Vector2<f64>; 2],
    /// Diagonal pair driving each sub-step.
    pub pairs: [[Limb; 2]; 2],
    pub next: BodyState,
}

/// Canter gait with a fixed gait yaw `θ0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanterGait {
    geometry: LimbGeometry,
    theta0: f64,
    max_step: f64,
}

impl CanterGait {
    pub fn new(geometry: LimbGeometry, theta0: f64) -> Result<Self, KinematicsError> {
        let max_step = geometry.max_step_length()?;
        let joint_yaw = theta0 - ARM_MOUNT_ANGLE;
        if !geometry.shoulder_yaw_limits.contains(joint_yaw) {
            let r = geometry.shoulder_yaw_limits;
            return Err(KinematicsError::JointLimit {
                joint: "shoulder yaw",
                value: joint_yaw,
                min: r.min,
                max: r.max,
            });
        }
        Ok(Self { geometry, theta0, max_step })
    }

    pub fn geometry(&self) -> &LimbGeometry {
        &self.geometry
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn max_step(&self) -> f64 {
        self.max_step
    }

    /// Net full-step advance at stroke length `a`.
    pub fn stride(&self, a: f64) -> f64 {
        2.0 * a * self.theta0.cos()
    }

    pub fn max_stride(&self) -> f64 {
        self.stride(self.max_step)
    }

    pub fn check_step(&self, a: f64) -> Result<(), KinematicsError> {
        if a.is_finite() && (0.0..=self.max_step + 1e-12).contains(&a) {
            Ok(())
        } else {
            Err(KinematicsError::StepOutOfBounds { a, a_max: self.max_step })
        }
    }

    /// Splits one full step into its two diagonal-pair sub-steps.
    ///
    /// Reverse motion negates both displacements and swaps which pair
    /// leads.
    pub fn decompose_step(
        &self,
        state: &BodyState,
        a: f64,
        axis: Axis,
        direction: Direction,
    ) -> Result<StepDecomposition, KinematicsError> {
        self.check_step(a)?;
        let (c, s) = (a * self.theta0.cos(), a * self.theta0.sin());
        let sign = direction.sign();
        let left_lead = [Limb::FrontLeft, Limb::RearRight];
        let right_lead = [Limb::FrontRight, Limb::RearLeft];
        let (substeps, pairs) = match axis {
            Axis::X => ([Vector2::new(c, s), Vector2::new(c, -s)], [left_lead, right_lead]),
            Axis::Y => ([Vector2::new(s, c), Vector2::new(-s, c)], [right_lead, left_lead]),
        };
        let (substeps, pairs) = match direction {
            Direction::Forward => (substeps, pairs),
            Direction::Reverse => (substeps.map(|v| -v), [pairs[1], pairs[0]]),
        };
        Ok(StepDecomposition {
            substeps,
            pairs,
            next: state.advanced(axis, sign * self.stride(a)),
        })
    }

    /// Joint angles of a stepping limb at touchdown, the front end of a
    /// stroke of length `a`.
    pub fn touchdown_angles(&self, a: f64) -> Result<JointAngles, KinematicsError> {
        self.check_step(a)?;
        let x2 = (self.max_step + a) / 2.0;
        let target = LimbTarget::new(x2, -self.geometry.body_height);
        inverse_kinematics(&self.geometry, target, self.theta0 - ARM_MOUNT_ANGLE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn gait() -> CanterGait {
        CanterGait::new(LimbGeometry::default(), FRAC_PI_4).unwrap()
    }

    #[test]
    fn zero_step_is_identity() {
        let s = BodyState::new(1.0, -2.0);
        let d = gait().decompose_step(&s, 0.0, Axis::X, Direction::Forward).unwrap();
        assert_eq!(d.substeps, [Vector2::zeros(), Vector2::zeros()]);
        assert_eq!((d.next.x, d.next.y), (1.0, -2.0));
        assert_eq!(d.next.k, 1);
    }

    #[test]
    fn forty_five_degree_x_step() {
        let d = gait().decompose_step(&BodyState::default(), 0.1, Axis::X, Direction::Forward).unwrap();
        assert_abs_diff_eq!(d.next.x, 0.141421, epsilon = 1e-6);
        assert_eq!(d.next.y, 0.0);
        assert_abs_diff_eq!(d.substeps[0].y, 0.070711, epsilon = 1e-6);
        assert_abs_diff_eq!(d.substeps[1].y, -0.070711, epsilon = 1e-6);
        assert_eq!(d.pairs[0], [Limb::FrontLeft, Limb::RearRight]);
        assert_eq!(d.pairs[1], [Limb::FrontRight, Limb::RearLeft]);
    }

    #[test]
    fn reverse_mirrors_forward() {
        let g = gait();
        let s = BodyState::default();
        let f = g.decompose_step(&s, 0.1, Axis::Y, Direction::Forward).unwrap();
        let r = g.decompose_step(&s, 0.1, Axis::Y, Direction::Reverse).unwrap();
        assert_eq!(r.substeps, f.substeps.map(|v| -v));
        assert_eq!(r.pairs, [f.pairs[1], f.pairs[0]]);
        assert_eq!(r.next.y, -f.next.y);
    }

    #[test]
    fn step_bounds_are_enforced() {
        let g = gait();
        let s = BodyState::default();
        assert!(g.decompose_step(&s, -0.01, Axis::X, Direction::Forward).is_err());
        assert!(g.decompose_step(&s, 0.19, Axis::X, Direction::Forward).is_err());
        assert!(g.decompose_step(&s, g.max_step(), Axis::X, Direction::Forward).is_ok());
    }

    #[test]
    fn gait_yaw_must_map_into_shoulder_limits() {
        assert!(CanterGait::new(LimbGeometry::default(), 5f64.to_radians()).is_err());
        assert!(CanterGait::new(LimbGeometry::default(), 80f64.to_radians()).is_ok());
    }

    #[test]
    fn touchdown_angles_are_within_limits() {
        let g = gait();
        for a in [0.0, 0.05, g.max_step()] {
            let angles = g.touchdown_angles(a).unwrap();
            assert_eq!(angles.shoulder_yaw, 0.0);
        }
    }

    proptest! {
        #[test]
        fn y_axis_mirrors_x_axis(a_frac in 0.0f64..=1.0, theta_deg in 10.0f64..80.0) {
            let g = CanterGait::new(LimbGeometry::default(), theta_deg.to_radians()).unwrap();
            let a = a_frac * g.max_step();
            let s = BodyState::default();
            let x = g.decompose_step(&s, a, Axis::X, Direction::Forward).unwrap();
            let y = g.decompose_step(&s, a, Axis::Y, Direction::Forward).unwrap();
            let swap = |v: Vector2<f64>| Vector2::new(v.y, v.x);
            prop_assert_eq!(swap(x.substeps[0]), y.substeps[0]);
            prop_assert_eq!(swap(x.substeps[1]), y.substeps[1]);
            prop_assert_eq!((x.next.x, x.next.y), (y.next.y, y.next.x));
        }

        #[test]
        fn lateral_components_cancel(a_frac in 0.0f64..=1.0, theta_deg in 10.0f64..80.0) {
            let g = CanterGait::new(LimbGeometry::default(), theta_deg.to_radians()).unwrap();
            let a = a_frac * g.max_step();
            let s = BodyState::default();
            let x = g.decompose_step(&s, a, Axis::X, Direction::Forward).unwrap();
            prop_assert_eq!(x.substeps[0].y + x.substeps[1].y, 0.0);
            let y = g.decompose_step(&s, a, Axis::Y, Direction::Forward).unwrap();
            prop_assert_eq!(y.substeps[0].x + y.substeps[1].x, 0.0);
        }

        #[test]
        fn stride_is_monotone_in_step_length(a1 in 0.0f64..0.18, da in 1e-6f64..0.003, theta_deg in 1.0f64..89.0) {
            let g = CanterGait::new(
                LimbGeometry { shoulder_yaw_limits: crate::kinematics::AngleRange::from_degrees(-90.0, 90.0), ..Default::default() },
                theta_deg.to_radians(),
            ).unwrap();
            prop_assert!(g.stride(a1 + da) > g.stride(a1));
            prop_assert!((g.stride(a1) - 2.0 * a1 * theta_deg.to_radians().cos()).abs() < 1e-15);
        }
    }
}
