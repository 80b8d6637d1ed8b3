//! Receding-horizon step-length controller.
//!
//! The state is the planar body position and the only input is the stroke
//! length `u(k)`. Over a horizon of `N` full steps along one axis the
//! controller minimises
//!
//! ```text
//! J(u) = Σ_{k=0}^{N-1} ‖x(k+1) - r(k)‖²_Q + R u(k)²,   0 ≤ u(k) ≤ a_max
//! ```
//!
//! with `x(k+1) = x(k) ± 2 u(k) cos θ0` on the chosen axis. The dynamics are
//! linear in `u` and `R > 0`, so `J` is a strictly convex quadratic on a
//! box and projected coordinate descent reaches its unique minimiser.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{Axis, BodyState, Direction, LimbGeometry};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MpcError {
    #[error("infeasible controller configuration: {0}")]
    InfeasibleConfig(String),
    #[error("reference has {got} stages, horizon is {horizon}")]
    ReferenceLength { got: usize, horizon: usize },
    #[error("step length {u} m outside [0, {a_max}] m")]
    InputOutOfBounds { u: f64, a_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpcConfig {
    pub q_x: f64,
    pub q_y: f64,
    pub r: f64,
    pub horizon: usize,
    pub a_max: f64,
    /// Coordinate-descent sweeps per solve.
    pub max_iterations: usize,
    /// Sweeps stop once no coordinate moves by more than this, meters.
    pub step_tolerance: f64,
}

impl Default for MpcConfig {
    fn default() -> Self {
        let a_max = LimbGeometry::default()
            .max_step_length()
            .expect("default geometry is valid");
        Self {
            q_x: 3.0,
            q_y: 3.0,
            r: 0.2,
            horizon: 3,
            a_max,
            max_iterations: 100,
            step_tolerance: 1e-12,
        }
    }
}

impl MpcConfig {
    pub fn for_geometry(geom: &LimbGeometry) -> Result<Self, MpcError> {
        let a_max = geom
            .max_step_length()
            .map_err(|e| MpcError::InfeasibleConfig(e.to_string()))?;
        Ok(Self { a_max, ..Self::default() })
    }

    pub fn validate(&self) -> Result<(), MpcError> {
        let bad = |msg: &str| Err(MpcError::InfeasibleConfig(msg.to_string()));
        if self.horizon == 0 {
            return bad("horizon must be at least 1");
        }
        if !(self.a_max.is_finite() && self.a_max > 0.0) {
            return bad("a_max must be positive");
        }
        if !(self.q_x >= 0.0 && self.q_y >= 0.0 && self.q_x.is_finite() && self.q_y.is_finite()) {
            return bad("state weights must be non-negative");
        }
        if !(self.r.is_finite() && self.r > 0.0) {
            return bad("input weight must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1");
        }
        Ok(())
    }

    fn weight(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.q_x,
            Axis::Y => self.q_y,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpcProblem {
    pub x0: BodyState,
    /// Reference position for each stage, compared against the state
    /// reached after that stage's step.
    pub reference: Vec<Vector2<f64>>,
    pub axis: Axis,
    pub direction: Direction,
    pub theta0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpcSolution {
    pub u: Vec<f64>,
    pub predicted: Vec<BodyState>,
    pub cost: f64,
    pub iterations: usize,
}

/// One full step of the motion model.
pub fn predict(
    state: &BodyState,
    u: f64,
    axis: Axis,
    direction: Direction,
    theta0: f64,
    a_max: f64,
) -> Result<BodyState, MpcError> {
    if !(u.is_finite() && (0.0..=a_max + 1e-12).contains(&u)) {
        return Err(MpcError::InputOutOfBounds { u, a_max });
    }
    Ok(state.advanced(axis, direction.sign() * 2.0 * u * theta0.cos()))
}

/// `Qx (x - x_r)² + Qy (y - y_r)² + R u²`.
pub fn stage_cost(state: &BodyState, reference: Vector2<f64>, u: f64, cfg: &MpcConfig) -> f64 {
    cfg.q_x * (state.x - reference.x).powi(2)
        + cfg.q_y * (state.y - reference.y).powi(2)
        + cfg.r * u * u
}

/// Total cost of an input sequence, rolling the model forward from `x0`.
pub fn sequence_cost(problem: &MpcProblem, u: &[f64], cfg: &MpcConfig) -> f64 {
    let gain = problem.direction.sign() * 2.0 * problem.theta0.cos();
    let mut state = problem.x0;
    u.iter()
        .zip(&problem.reference)
        .map(|(&uk, &rk)| {
            state = state.advanced(problem.axis, gain * uk);
            stage_cost(&state, rk, uk, cfg)
        })
        .sum()
}

/// Optimal stroke sequence for `problem`.
pub fn solve(problem: &MpcProblem, cfg: &MpcConfig) -> Result<MpcSolution, MpcError> {
    cfg.validate()?;
    let n = cfg.horizon;
    if problem.reference.len() != n {
        return Err(MpcError::ReferenceLength { got: problem.reference.len(), horizon: n });
    }

    let axis = problem.axis;
    let gain = problem.direction.sign() * 2.0 * problem.theta0.cos();
    let weight = cfg.weight(axis);
    let p0 = problem.x0.component(axis);
    // offset of the unforced trajectory from each stage's reference
    let offset: Vec<f64> = problem
        .reference
        .iter()
        .map(|r| p0 - match axis {
            Axis::X => r.x,
            Axis::Y => r.y,
        })
        .collect();

    // Stage k sees the cumulative input Σ_{j≤k} u(j), so
    //   ∂J/∂u(i) = 2 Σ_{k≥i} w g (e_k + g S_k) + 2 R u(i)
    //   ∂²J/∂u(i)² = 2 w g² (N - i) + 2 R.
    let mut u = vec![0.0; n];
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let mut largest_move: f64 = 0.0;
        for i in 0..n {
            let mut cumulative = 0.0;
            let mut grad = 2.0 * cfg.r * u[i];
            for k in 0..n {
                cumulative += u[k];
                if k >= i {
                    grad += 2.0 * weight * gain * (offset[k] + gain * cumulative);
                }
            }
            let curvature = 2.0 * weight * gain * gain * (n - i) as f64 + 2.0 * cfg.r;
            let updated = (u[i] - grad / curvature).clamp(0.0, cfg.a_max);
            largest_move = largest_move.max((updated - u[i]).abs());
            u[i] = updated;
        }
        if largest_move <= cfg.step_tolerance {
            break;
        }
    }

    let mut predicted = Vec::with_capacity(n);
    let mut state = problem.x0;
    for &uk in &u {
        state = state.advanced(axis, gain * uk);
        predicted.push(state);
    }
    let cost = sequence_cost(problem, &u, cfg);
    Ok(MpcSolution { u, predicted, cost, iterations })
}

/// Axis with the larger position error towards `target`, and the sign of
/// that error. Ties go to x.
pub fn select_axis(state: &BodyState, target: Vector2<f64>) -> (Axis, Direction) {
    let (ex, ey) = (target.x - state.x, target.y - state.y);
    if ex.abs() >= ey.abs() {
        (Axis::X, Direction::of(ex))
    } else {
        (Axis::Y, Direction::of(ey))
    }
}
