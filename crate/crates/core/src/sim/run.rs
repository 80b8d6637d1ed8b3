use nalgebra::{Vector2, Vector3};

use crate::grid::{OccupancyGrid, WorldPoint};
use crate::kinematics::{Axis, BodyState, CanterGait, Direction, LimbGeometry};
use crate::mpc::{select_axis, solve, MpcConfig, MpcProblem};
use crate::planner::{plan_bimodal, Mode, ModalPath, SearchConfig, WorldWaypoint};

use super::{
    DisturbanceModel, Granularity, JointRow, LogRecord, MpcTraceRow, Polyline, SimConfig, SimError,
    TrajectoryLog,
};

/// Everything a run needs besides the path.
#[derive(Debug, Clone, PartialEq)]
pub struct Harness {
    pub gait: CanterGait,
    pub mpc: MpcConfig,
    pub disturbance: DisturbanceModel,
    pub sim: SimConfig,
}

impl Default for Harness {
    fn default() -> Self {
        let gait = CanterGait::new(LimbGeometry::default(), std::f64::consts::FRAC_PI_4)
            .expect("default gait is valid");
        Self {
            gait,
            mpc: MpcConfig { a_max: gait.max_step(), ..MpcConfig::default() },
            disturbance: DisturbanceModel::default(),
            sim: SimConfig::default(),
        }
    }
}

impl Harness {
    pub fn new(
        gait: CanterGait,
        mpc: MpcConfig,
        disturbance: DisturbanceModel,
        sim: SimConfig,
    ) -> Result<Self, SimError> {
        mpc.validate()?;
        if mpc.a_max > gait.max_step() + 1e-12 {
            return Err(SimError::InvalidConfig(format!(
                "controller bound {} m exceeds the gait's maximum step {} m",
                mpc.a_max,
                gait.max_step()
            )));
        }
        disturbance.validate().map_err(SimError::InvalidConfig)?;
        sim.validate()?;
        Ok(Self { gait, mpc, disturbance, sim })
    }

    pub fn with_disturbance(&self, disturbance: DisturbanceModel) -> Self {
        Self { disturbance, ..self.clone() }
    }

    /// Full steps needed to cover `length` at the maximum stride.
    pub fn nominal_steps(&self, length: f64) -> u64 {
        (length / self.stride() - 1e-9).ceil().max(1.0) as u64
    }

    fn stride(&self) -> f64 {
        self.gait.stride(self.mpc.a_max)
    }
}

/// Log and side channels of one run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOutput {
    pub log: TrajectoryLog,
    pub trace: Vec<MpcTraceRow>,
    pub joints: Vec<JointRow>,
    /// False when the step budget ran out before the end was reached.
    pub converged: bool,
    pub steps: u64,
    pub final_position: Vector2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionRun {
    pub path: ModalPath,
    pub output: RunOutput,
}

struct Runner<'a> {
    h: &'a Harness,
    t: u64,
    substep: u64,
    out: RunOutput,
}

impl<'a> Runner<'a> {
    fn new(h: &'a Harness) -> Self {
        Self { h, t: 0, substep: 0, out: RunOutput { converged: true, ..Default::default() } }
    }

    fn record(&mut self, path: &Polyline, pos: Vector2<f64>, z: f64, granularity: Granularity) {
        let r = path.project(pos).point;
        self.out.log.push(LogRecord::new(
            self.t,
            WorldPoint::new(r.x, r.y, z),
            WorldPoint::new(pos.x, pos.y, z),
            Mode::Ground,
            granularity,
        ));
    }

    fn execute_step(
        &mut self,
        path: &Polyline,
        pos: &mut Vector2<f64>,
        z: f64,
        a: f64,
        axis: Axis,
        direction: Direction,
    ) -> Result<(), SimError> {
        let gait = &self.h.gait;
        let d = gait.decompose_step(&BodyState::new(pos.x, pos.y), a, axis, direction)?;
        let angles = gait.touchdown_angles(a)?;
        for (j, nominal) in d.substeps.iter().enumerate() {
            *pos += self.h.disturbance.apply(*nominal, self.substep);
            self.substep += 1;
            self.t += 1;
            self.record(path, *pos, z, Granularity::Substep);
            for limb in d.pairs[j] {
                self.out.joints.push(JointRow {
                    step_index: self.out.steps,
                    substep: j as u8 + 1,
                    limb_id: limb.id().to_string(),
                    theta0_rad: angles.shoulder_yaw,
                    theta1_rad: angles.hip_pitch,
                    theta2_rad: angles.knee_pitch,
                });
            }
        }
        self.record(path, *pos, z, Granularity::Fullstep);
        self.out.steps += 1;
        Ok(())
    }

    /// MPC tracking of `path` from `pos`. Returns whether the end was reached
    /// within the step budget.
    fn closed_loop(&mut self, path: &Polyline, pos: &mut Vector2<f64>, z: f64) -> Result<bool, SimError> {
        let h = self.h;
        let stride = h.stride();
        let budget = (h.nominal_steps(path.length()) as f64 * h.sim.step_budget_factor).ceil() as u64;
        let theta0 = h.gait.theta0();
        let mut s = 0.0;
        for _ in 0..budget {
            if (*pos - path.end()).norm() <= h.sim.tolerance {
                return Ok(true);
            }
            s = path.project_within(*pos, s, s + 2.0 * stride).s;
            let state = BodyState::new(pos.x, pos.y);
            let s_target = s + h.sim.selection_lookahead;
            let (axis, direction) = select_axis(&state, path.point_at(s_target));
            // one axis per step cannot follow a turn inside the horizon, so
            // stage references stop at the corner ahead
            let s_limit = path.next_vertex(s_target);
            let reference: Vec<Vector2<f64>> = (1..=h.mpc.horizon)
                .map(|k| path.point_at((s + k as f64 * stride).min(s_limit)))
                .collect();
            let problem = MpcProblem { x0: state, reference, axis, direction, theta0 };
            let sol = solve(&problem, &h.mpc)?;
            self.out.trace.push(MpcTraceRow {
                step_index: self.out.steps,
                axis,
                direction,
                u: sol.u.clone(),
                cost: sol.cost,
                x: pos.x,
                y: pos.y,
                ref_x: problem.reference[0].x,
                ref_y: problem.reference[0].y,
            });
            self.execute_step(path, pos, z, sol.u[0], axis, direction)?;
        }
        Ok((*pos - path.end()).norm() <= h.sim.tolerance)
    }

    /// Fixed step plan from the path geometry alone: each segment's x and y
    /// extents are split into equal strokes, interleaved by progress.
    fn open_loop(&mut self, path: &Polyline, pos: &mut Vector2<f64>, z: f64) -> Result<(), SimError> {
        let stride = self.h.stride();
        let unit = 2.0 * self.h.gait.theta0().cos();
        for w in path.points().windows(2) {
            let delta = w[1] - w[0];
            let plan = |d: f64| {
                let n = if d == 0.0 { 0 } else { (d.abs() / stride - 1e-9).ceil().max(1.0) as u64 };
                let a = if n == 0 { 0.0 } else { (d.abs() / (n as f64 * unit)).min(self.h.mpc.a_max) };
                (n, a, Direction::of(d))
            };
            let (nx, ax, dx) = plan(delta.x);
            let (ny, ay, dy) = plan(delta.y);
            let (mut i, mut j) = (0, 0);
            while i < nx || j < ny {
                let x_first = j >= ny || (i < nx && (2 * i + 1) * ny <= (2 * j + 1) * nx);
                if x_first {
                    self.execute_step(path, pos, z, ax, Axis::X, dx)?;
                    i += 1;
                } else {
                    self.execute_step(path, pos, z, ay, Axis::Y, dy)?;
                    j += 1;
                }
            }
        }
        Ok(())
    }

    /// Constant-speed flight through `points`, logged as AIR until arrival.
    fn fly(&mut self, points: &[Vector3<f64>]) {
        let step = self.h.sim.air_step;
        let mut at = points[0];
        for &target in &points[1..] {
            loop {
                let gap = target - at;
                let dist = gap.norm();
                if dist == 0.0 {
                    break;
                }
                at = if dist <= step { target } else { at + gap * (step / dist) };
                self.t += 1;
                let p = WorldPoint::new(at.x, at.y, at.z);
                self.out.log.push(LogRecord::new(self.t, p, p, Mode::Air, Granularity::Fullstep));
            }
        }
        if let Some(last) = self.out.log.records.last_mut() {
            last.mode = Mode::Ground;
        }
    }

    fn finish(mut self, pos: Vector2<f64>, converged: bool) -> RunOutput {
        self.out.converged &= converged;
        self.out.final_position = pos;
        self.out
    }
}

/// MPC tracking of a ground polyline from its first point.
pub fn run_closed_loop(path: &Polyline, harness: &Harness) -> Result<RunOutput, SimError> {
    let mut runner = Runner::new(harness);
    let mut pos = path.start();
    runner.record(path, pos, 0.0, Granularity::Fullstep);
    let converged = runner.closed_loop(path, &mut pos, 0.0)?;
    Ok(runner.finish(pos, converged))
}

/// Uncorrected execution of the nominal step plan for `path`.
pub fn run_open_loop(path: &Polyline, harness: &Harness) -> Result<RunOutput, SimError> {
    let mut runner = Runner::new(harness);
    let mut pos = path.start();
    runner.record(path, pos, 0.0, Granularity::Fullstep);
    runner.open_loop(path, &mut pos, 0.0)?;
    Ok(runner.finish(pos, true))
}

/// Plans between two world points and executes the result: ground phases
/// under the MPC, aerial phases flown exactly.
pub fn run_mission(
    grid: &OccupancyGrid,
    start: WorldPoint,
    goal: WorldPoint,
    search: &SearchConfig,
    harness: &Harness,
) -> Result<MissionRun, SimError> {
    let path = plan_bimodal(grid, start, goal, search)?;
    let output = execute_path(&path, grid, harness)?;
    Ok(MissionRun { path, output })
}

/// Executes an already planned path.
pub fn execute_path(path: &ModalPath, grid: &OccupancyGrid, harness: &Harness) -> Result<RunOutput, SimError> {
    let world = path.to_world(grid)?;
    let phases = split_phases(&world);
    let Some(first) = world.first() else {
        return Err(SimError::InvalidPath("path is empty".into()));
    };
    if first.mode != Mode::Ground {
        return Err(SimError::InvalidPath("missions must start on the ground".into()));
    }

    let mut runner = Runner::new(harness);
    let mut pos = Vector2::new(first.point.x, first.point.y);
    let mut converged = true;
    for (n, phase) in phases.iter().enumerate() {
        match phase[0].mode {
            Mode::Ground => {
                let z = phase[0].point.z;
                let line = Polyline::new(phase.iter().map(|w| Vector2::new(w.point.x, w.point.y)))
                    .expect("phases are non-empty");
                if n == 0 {
                    runner.record(&line, pos, z, Granularity::Fullstep);
                }
                converged &= runner.closed_loop(&line, &mut pos, z)?;
            }
            Mode::Air => {
                let takeoff_z = phases[n - 1][0].point.z;
                let landing = phases
                    .get(n + 1)
                    .map(|p| p[0].point)
                    .ok_or_else(|| SimError::InvalidPath("path ends in the air".into()))?;
                let mut points = vec![Vector3::new(pos.x, pos.y, takeoff_z)];
                points.extend(phase.iter().map(|w| Vector3::new(w.point.x, w.point.y, w.point.z)));
                points.push(Vector3::new(landing.x, landing.y, landing.z));
                runner.fly(&points);
                pos = Vector2::new(landing.x, landing.y);
            }
        }
    }
    Ok(runner.finish(pos, converged))
}

fn split_phases(world: &[WorldWaypoint]) -> Vec<&[WorldWaypoint]> {
    world.chunk_by(|a, b| a.mode == b.mode).collect()
}
